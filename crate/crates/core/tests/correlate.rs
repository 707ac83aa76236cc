mod common;

use std::sync::Arc;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

use nilcorr::correlate::mv::cutoff;
use nilcorr::correlate::vaughan::vaughan_terms;
use nilcorr::correlate::{
    correlation_sum, correlation_sum_serial, correlation_sum_with, decay_scan, log_weight_decompose,
    vaughan_check, von_mangoldt_log_identity, CorrelationOptions,
};
use nilcorr::multfunc::{euler_phi, normalize_gl2, tau_table, MultFuncTable, SieveConfig};
use nilcorr::nilgroup::{bump, e, Element, LipschitzTestFunction, Nilmanifold, TestFn};
use nilcorr::polyseq::PolySequence;
use nilcorr::Error;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SQRT2M1: f64 = std::f64::consts::SQRT_2 - 1.0;

fn mu(n: u64) -> MultFuncTable {
    MultFuncTable::sieve_mobius(n, &SieveConfig::default()).unwrap()
}

fn lam(n: u64) -> MultFuncTable {
    normalize_gl2(Arc::new(tau_table(n).unwrap()))
}

fn heis_seq() -> PolySequence<f64> {
    PolySequence::new(
        Nilmanifold::heisenberg(),
        vec![
            Element::new([0.0; 3]),
            Element::new([SQRT2M1, GOLDEN, 0.0]),
            Element::new([0.0, 0.0, -GOLDEN * SQRT2M1]),
        ],
    )
    .unwrap()
}

fn heis_fn() -> LipschitzTestFunction {
    LipschitzTestFunction::new(TestFn::product(vec![TestFn::phase(2, -1), TestFn::bump(0), TestFn::bump(1)]))
}

/// `e(β n ⌊n α⌋) ψ({β n}) ψ({α n})`, evaluated directly.
fn heis_oracle(n: u64) -> Complex64 {
    let nf = n as f64;
    let (x, y) = (nf * SQRT2M1, nf * GOLDEN);
    e((x * y.floor()).fract()) * bump(x.fract()) * bump(y.fract())
}

/// `(φ(W)/(WN)) Σ (f(W(n−1)+b) − mean) F(n)` by a plain loop.
fn naive_s(f: &MultFuncTable, big_f: impl Fn(u64) -> Complex64, n: u64, w: u64, b: u64) -> Complex64 {
    let vals: Vec<Complex64> = (1..=n).map(|k| f.get(w * (k - 1) + b)).collect();
    let mean = vals.iter().sum::<Complex64>() / n as f64;
    let raw: Complex64 = vals.iter().zip(1..=n).map(|(v, k)| (v - mean) * big_f(k)).sum();
    raw * euler_phi(w) as f64 / (w * n) as f64
}

#[test]
fn delta_hand_value() {
    let f = MultFuncTable::from_fn("delta", 10, |n| Complex64::new(if n == 1 { 1.0 } else { 0.0 }, 0.0));
    let g = PolySequence::torus_1d(&[0.0, 0.5]);
    let r = correlation_sum(&f, &g, &LipschitzTestFunction::character(0, 1), 10, 1, 1).unwrap();
    // mean 1/10; Σ_{n≤10} (−1)^n = 0, so S = (1/10)(1 − 1/10)(−1) + (1/10)(−1/10)(1) = −1/10
    assert!((r.mean_f.re - 0.1).abs() < 1e-15);
    assert!((r.s - Complex64::new(-0.1, 0.0)).norm() < 1e-15, "{}", r.s);
}

#[test]
fn mobius_golden_rotation_decays() {
    let n = 1_000_000;
    let f = mu(n);
    let g = PolySequence::torus_1d(&[0.0, GOLDEN]);
    let r = correlation_sum(&f, &g, &LipschitzTestFunction::character(0, 1), n, 1, 1).unwrap();
    let oracle = naive_s(&f, |k| e((k as f64 * GOLDEN).fract()), n, 1, 1);
    assert!((r.s - oracle).norm() < 1e-9);
    assert!(r.s.norm() < 1e-2, "{}", r.s.norm());
    assert!(r.decay_stat >= 0.0);
}

#[test]
fn brute_force_small_n() {
    let f = mu(7000);
    let l = lam(7000);
    let quad = PolySequence::torus_1d(&[0.0, GOLDEN, SQRT2M1]);
    let ch = LipschitzTestFunction::character(0, 1);
    for &(n, w, b) in &[(1000u64, 1u64, 1u64), (997, 6, 5), (500, 12, 7), (1, 1, 1)] {
        for f in [&f, &l] {
            let r = correlation_sum(f, &quad, &ch, n, w, b).unwrap();
            let oracle = naive_s(
                f,
                |k| {
                    let k = k as f64;
                    e((k * GOLDEN + k * (k - 1.0) / 2.0 * SQRT2M1).fract())
                },
                n,
                w,
                b,
            );
            assert!((r.s - oracle).norm() < 1e-10, "n={n} W={w}: {} vs {oracle}", r.s);

            let r = correlation_sum(f, &heis_seq(), &heis_fn(), n, w, b).unwrap();
            let oracle = naive_s(f, heis_oracle, n, w, b);
            assert!((r.s - oracle).norm() < 1e-10, "heis n={n} W={w}");
        }
    }
}

#[test]
fn single_scan_matches_sum() {
    let f = mu(100);
    let g = PolySequence::torus_1d(&[0.0, GOLDEN]);
    let ch = LipschitzTestFunction::character(0, 1);
    let opts = CorrelationOptions::default();
    let scan = decay_scan(&f, &g, &ch, &[10], 1, 1, &opts).unwrap();
    let one = correlation_sum_with(&f, &g, &ch, 10, 1, 1, &opts).unwrap();
    assert_eq!(scan.len(), 1);
    assert_eq!(scan[0].s, one.s);
    assert_eq!(scan[0].decay_stat, one.decay_stat);
    assert!(matches!(
        decay_scan(&f, &g, &ch, &[20, 10], 1, 1, &opts),
        Err(Error::Config { path, .. }) if path == "N_list"
    ));
}

#[test]
fn precondition_errors() {
    let f = mu(1000);
    let g = PolySequence::torus_1d(&[0.0, GOLDEN]);
    let ch = LipschitzTestFunction::character(0, 1);
    assert_eq!(correlation_sum(&f, &g, &ch, 100, 4, 2).unwrap_err(), Error::NonCoprime { b: 2, w: 4 });
    assert!(matches!(
        correlation_sum(&f, &g, &ch, 200, 6, 5),
        Err(Error::TableTooShort { .. })
    ));
    assert!(correlation_sum(&f, &heis_seq(), &ch, 100, 1, 1).is_ok());
    assert!(correlation_sum(&f, &g, &heis_fn(), 100, 1, 1).is_err());
}

#[test]
fn w1_bit_identical_to_serial_and_thread_count() {
    let n = 300_000;
    let f = lam(n);
    let g = PolySequence::torus_1d(&[0.0, GOLDEN, SQRT2M1]);
    let ch = LipschitzTestFunction::character(0, 1);
    let opts = CorrelationOptions {
        chunk_size: 4096,
        ..Default::default()
    };
    let par = correlation_sum_with(&f, &g, &ch, n, 1, 1, &opts).unwrap();
    let ser = correlation_sum_serial(&f, &g, &ch, n, 1, 1, &opts).unwrap();
    assert_eq!(par.s, ser.s);
    assert_eq!(par.mean_f, ser.mean_f);
    let run = |t| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .unwrap()
            .install(|| correlation_sum_with(&f, &g, &ch, n, 1, 1, &opts).unwrap().s)
    };
    assert_eq!(run(1), par.s);
    assert_eq!(run(3), par.s);
}

#[test]
fn mv_identity_small_against_oracle() {
    let n = 100u64;
    let f = mu(n);
    let g = PolySequence::torus_1d(&[0.0, GOLDEN]);
    let ch = LipschitzTestFunction::character(0, 1);
    let d = log_weight_decompose(&f, &g, &ch, n, 1, 1, &CorrelationOptions::default()).unwrap();
    let u = 21u64;
    assert_eq!(d.u, u);
    assert_eq!(cutoff(n), u);
    let big = |k: u64| e((k as f64 * GOLDEN).fract());
    let z = Complex64::new(0.0, 0.0);
    let (mut total, mut small, mut large, mut pp, mut ns) = (z, z, z, z, z);
    for m in 1..=n {
        let fm = f.get(m);
        total += (m as f64).ln() * fm * big(m);
        for (p, e) in factor(m) {
            let lp = (p as f64).ln();
            let split = f.get(p) * f.get(m / p);
            if p <= u {
                small += lp * split * big(m);
            } else {
                large += lp * split * big(m);
            }
            ns += lp * (fm - split) * big(m);
            pp += (e - 1) as f64 * lp * fm * big(m);
        }
    }
    for (got, want) in [
        (d.total, total),
        (d.small_prime_part, small),
        (d.large_prime_part, large),
        (d.prime_power_part, pp),
        (d.nonsplit_part, ns),
    ] {
        assert!((got - want).norm() < 1e-9, "{got} vs {want}");
    }
    assert!((d.reassembled() - d.total).norm() < 1e-9);
    let small_bins: Complex64 = d.dyadic_breakdown.iter().filter(|b| b.hi <= u as f64).map(|b| b.value).sum();
    let large_bins: Complex64 = d.dyadic_breakdown.iter().filter(|b| b.lo >= u as f64).map(|b| b.value).sum();
    assert!((small_bins - d.small_prime_part).norm() < 1e-9);
    assert!((large_bins - d.large_prime_part).norm() < 1e-9);
}

#[test]
fn mv_one_function_has_no_nonsplit() {
    let f = MultFuncTable::one(20_000);
    let d = log_weight_decompose(
        &f,
        &heis_seq(),
        &heis_fn(),
        20_000,
        1,
        1,
        &CorrelationOptions::default(),
    )
    .unwrap();
    assert_eq!(d.nonsplit_part, Complex64::new(0.0, 0.0));
    assert!(d.relative_error() < 1e-9);
}

#[test]
fn mv_identity_lambda_delta_and_w_trick() {
    let n = 100_000;
    let f = lam(6 * n);
    let g = PolySequence::torus_1d(&[0.0, GOLDEN, SQRT2M1]);
    let ch = LipschitzTestFunction::character(0, 1);
    let opts = CorrelationOptions::default();
    let d = log_weight_decompose(&f, &g, &ch, n, 1, 1, &opts).unwrap();
    assert!(d.relative_error() < 1e-6, "{}", d.relative_error());
    let d = log_weight_decompose(&f, &g, &ch, n, 6, 5, &opts).unwrap();
    assert!(d.relative_error() < 1e-6);
}

#[test]
fn vaughan_and_log_identity() {
    assert!(vaughan_check(1000).unwrap() < 1e-9);
    assert!(von_mangoldt_log_identity(10_000).unwrap() < 1e-9);
    let t = vaughan_terms(1000).unwrap();
    let at = |n: usize| t.iter().map(|v| v[n]).sum::<f64>();
    assert_eq!(at(1), 0.0);
    for p in [11usize, 97, 997] {
        assert!((at(p) - (p as f64).ln()).abs() < 1e-9, "p = {p}");
        assert_eq!(t[0][p], 0.0);
    }
    assert!((at(8) - 2f64.ln()).abs() < 1e-9);
    assert!(at(12).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn constant_test_function_gives_zero(
        which in 0usize..3, n in 1u64..3000, w in prop::sample::select(vec![1u64, 2, 6, 30]), b_seed in 0u64..30, c in -3.0f64..3.0,
    ) {
        let b = (1..=w).map(|i| (b_seed + i) % w + 1).find(|&b| num_integer::gcd(b, w) == 1).unwrap();
        let len = w * n + b;
        let f = match which {
            0 => mu(len),
            1 => MultFuncTable::sieve_von_mangoldt(len, &SieveConfig::default()).unwrap(),
            _ => lam(len),
        };
        let konst = LipschitzTestFunction::new(TestFn::Const { re: c, im: 0.5 });
        let r = correlation_sum(&f, &heis_seq(), &konst, n, w, b).unwrap();
        prop_assert_eq!(r.s, Complex64::new(0.0, 0.0));
        prop_assert_eq!(r.decay_stat, 0.0);
    }

    #[test]
    fn linear_in_test_function(k1 in -3i64..4, k2 in -3i64..4, n in 10u64..2000) {
        let f = mu(2000);
        let g = heis_seq();
        let f1 = TestFn::product(vec![TestFn::phase(2, k1), TestFn::bump(0)]);
        let f2 = TestFn::product(vec![TestFn::phase(1, k2), TestFn::coord(2)]);
        let s = |t: TestFn| correlation_sum(&f, &g, &LipschitzTestFunction::new(t), n, 1, 1).unwrap().s;
        let lhs = s(TestFn::sum(vec![f1.clone(), f2.clone()]));
        prop_assert!((lhs - s(f1) - s(f2)).norm() < 1e-9);
    }
}
