//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when a criterion outside `KNOWN_RED` fails.

mod common;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nilcorr::correlate::{
    correlation_sum, correlation_sum_serial, correlation_sum_with, decay_scan, log_weight_decompose,
    vaughan_check, von_mangoldt_log_identity, CorrelationOptions, CorrelationReport,
};
use nilcorr::equidist::leibman_search;
use nilcorr::io::tau_cached;
use nilcorr::multfunc::{
    builtin_delta, check_conditions, hecke_extend, normalize_gl2, MultFuncTable, SieveConfig, TauTable,
};
use nilcorr::nilgroup::{Element, LipschitzTestFunction, Nilmanifold, TestFn};
use nilcorr::polyseq::PolySequence;
use nilcorr::scalar::Dd;

const HEIS_SAMPLES: usize = 10_000;
const HEIS_FLOAT_TOL: f64 = 1e-12;
const HEIS_TIME: Duration = Duration::from_secs(5);
const VAUGHAN_N: u64 = 10_000;
const IDENTITY_TOL: f64 = 1e-9;
const VAUGHAN_TIME: Duration = Duration::from_secs(10);
const TAU_EXACT_N: u64 = 1_000;
const TAU_CROSS_N: u64 = 100_000;
const TAU_CROSS_TOL: f64 = 1e-9;
const HECKE_BOUND: u64 = 1_000_000;
const DELIGNE_P: u64 = 100_000;
const TAU_TIME: Duration = Duration::from_secs(120);
const RS_TOL: f64 = 0.10;
const LEIBMAN_Q: u64 = 50;
const LEIBMAN_N: u64 = 100_000;
const LEIBMAN_TIME: Duration = Duration::from_secs(5);
const DECAY_NS: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];
const DECAY_FACTOR: f64 = 2.0;
const DECAY_TIME: Duration = Duration::from_secs(600);
const CENTERING_CONFIGS: usize = 20;
const FL2_TOL: f64 = 0.01;
const MV_TOL: f64 = 1e-6;
const SIEVE_N: u64 = 100_000_000;
const SIEVE_TIME: Duration = Duration::from_secs(60);
const CORR_N: u64 = 10_000_000;
const CORR_TIME: Duration = Duration::from_secs(30);

/// Criteria expected to stay red; see the project notes for the analysis.
const KNOWN_RED: &[usize] = &[7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cache_dir() -> PathBuf {
    std::env::var_os("NILCORR_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("nilcorr-cache"))
}

struct Tables {
    mu: MultFuncTable,
    tau: Arc<TauTable>,
    lam: MultFuncTable,
    tau_time: Duration,
}

fn tables() -> Tables {
    let n = *DECAY_NS.last().unwrap();
    let t = Instant::now();
    let tau = tau_cached(&cache_dir(), n).unwrap();
    let tau_time = t.elapsed();
    Tables {
        mu: MultFuncTable::sieve_mobius(n, &SieveConfig::default()).unwrap(),
        lam: normalize_gl2(tau.clone()),
        tau,
        tau_time,
    }
}

fn golden() -> Dd {
    (Dd::from_f64(5.0).sqrt() - Dd::from_f64(1.0)) / Dd::from_f64(2.0)
}

fn sqrt2m1() -> Dd {
    Dd::from_f64(2.0).sqrt() - Dd::from_f64(1.0)
}

fn linear() -> PolySequence<Dd> {
    PolySequence::torus_1d(&[Dd::from_f64(0.0), golden()])
}

fn quadratic() -> PolySequence<Dd> {
    PolySequence::torus_1d(&[Dd::from_f64(0.0), golden(), sqrt2m1()])
}

/// `g(n) = (nβ, nα, 0)` in second-kind coordinates, with `α` golden and `β = √2 − 1`.
fn heisenberg() -> PolySequence<Dd> {
    let (a, b) = (golden(), sqrt2m1());
    let z = Dd::from_f64(0.0);
    PolySequence::new(
        Nilmanifold::heisenberg(),
        vec![Element::new([z, z, z]), Element::new([b, a, z]), Element::new([z, z, -(a * b)])],
    )
    .unwrap()
}

/// `e(βn⌊nα⌋) ψ({βn}) ψ({αn})` on the sequence above.
fn heisenberg_fn() -> LipschitzTestFunction {
    LipschitzTestFunction::labeled(
        "e(-x3) psi(x1) psi(x2)",
        TestFn::product(vec![TestFn::phase(2, -1), TestFn::bump(0), TestFn::bump(1)]),
    )
}

fn c1() -> Outcome {
    let t = Instant::now();
    let h = Nilmanifold::heisenberg();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut exact_bad = 0;
    for _ in 0..HEIS_SAMPLES {
        let mut r = || q(rng.gen_range(-1000..=1000), rng.gen_range(1..=97));
        let a = Element::new([r(), r(), r()]);
        let b = Element::new([r(), r(), r()]);
        let ma = heis_matrix(&a.coords[0], &a.coords[1], &a.coords[2]);
        let mb = heis_matrix(&b.coords[0], &b.coords[1], &b.coords[2]);
        let prod = heis_from_matrix(&matmul(&ma, &mb));
        let inv = h.inv(&a).unwrap();
        let mi = heis_matrix(&inv.coords[0], &inv.coords[1], &inv.coords[2]);
        if h.mul(&a, &b).unwrap().coords.to_vec() != prod.to_vec() || matmul(&ma, &mi) != eye(3) {
            exact_bad += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..HEIS_SAMPLES {
        let mut r = || rng.gen_range(-10.0..10.0f64);
        let (a, b) = ([r(), r(), r()], [r(), r(), r()]);
        let got = h.mul(&Element::new(a), &Element::new(b)).unwrap();
        // (x, y, z)(x', y', z') = (x + x', y + y', z + z' + x y') from the matrix product
        let want = [a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]];
        let inv = h.inv(&Element::new(a)).unwrap();
        let inv_want = [-a[0], -a[1], a[0] * a[1] - a[2]];
        for k in 0..3 {
            worst = worst.max((got.coords[k] - want[k]).abs()).max((inv.coords[k] - inv_want[k]).abs());
        }
    }
    let el = t.elapsed();
    outcome(
        exact_bad == 0 && worst < HEIS_FLOAT_TOL && el < HEIS_TIME,
        format!("exact mismatches {exact_bad}, float error {worst:.2e} (< {HEIS_FLOAT_TOL:e}), {el:.2?} (< {HEIS_TIME:?})"),
    )
}

fn c2() -> Outcome {
    let t = Instant::now();
    let e = vaughan_check(VAUGHAN_N).unwrap();
    let el = t.elapsed();
    outcome(
        e < IDENTITY_TOL && el < VAUGHAN_TIME,
        format!("max_error {e:.2e} (< {IDENTITY_TOL:e}) at N = {VAUGHAN_N}, {el:.2?} (< {VAUGHAN_TIME:?})"),
    )
}

fn c3() -> Outcome {
    let e = von_mangoldt_log_identity(VAUGHAN_N).unwrap();
    outcome(e < IDENTITY_TOL, format!("max_error {e:.2e} (< {IDENTITY_TOL:e}) at N = {VAUGHAN_N}"))
}

fn c4(tb: &Tables) -> Outcome {
    let t = Instant::now();
    let tau = &tb.tau;
    let oracle = tau_from_primes(TAU_EXACT_N, |p| tau.tau(p));
    let exact_bad = (1..=TAU_EXACT_N).filter(|&n| tau.tau(n) != oracle[n as usize]).count();
    let dense = tau_dense(200);
    let dense_bad = (1..200u64).filter(|&n| tau.tau(n) != dense[n as usize]).count();
    let ext = hecke_extend(&builtin_delta(tau, TAU_CROSS_N), TAU_CROSS_N).unwrap();
    let cross = (1..=TAU_CROSS_N)
        .map(|n| (ext.get(n).re - tau.normalized(n)).abs().max(ext.get(n).im.abs()))
        .fold(0.0, f64::max);
    let hecke = tau.hecke_violations(HECKE_BOUND).len();
    let deligne = tau.deligne_violations(DELIGNE_P).len();
    let el = t.elapsed() + tb.tau_time;
    outcome(
        exact_bad == 0 && dense_bad == 0 && cross < TAU_CROSS_TOL && hecke == 0 && deligne == 0 && el < TAU_TIME,
        format!(
            "exact mismatches n ≤ {TAU_EXACT_N}: {exact_bad}, dense-product mismatches: {dense_bad}, \
             normalized error n ≤ {TAU_CROSS_N}: {cross:.2e}, Hecke violations: {hecke}, \
             Deligne violations: {deligne}, {el:.2?} incl. table (< {TAU_TIME:?})"
        ),
    )
}

fn c5(tb: &Tables) -> Outcome {
    let m = |n: u64| (1..=n).map(|k| tb.lam.get(k).norm_sqr()).sum::<f64>() / n as f64;
    let (a, b) = (m(100_000), m(1_000_000));
    let rel = (a - b).abs() / b;
    outcome(rel < RS_TOL, format!("mean |λ|² {a:.4} at 1e5, {b:.4} at 1e6, relative change {rel:.3} (< {RS_TOL})"))
}

fn c6() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for qq in 1..=LEIBMAN_Q as i64 {
        for p in 0..qq {
            let g = PolySequence::torus_1d(&[q(0, 1), q(p, qq)]);
            let want = (qq / num_integer::gcd(p, qq)) as u64;
            match leibman_search(&g, 1000, LEIBMAN_Q, 0.0) {
                Some(w) if w.character.modulus() == want => {}
                _ => bad.push(format!("{p}/{qq}")),
            }
        }
    }
    let g = PolySequence::torus_1d(&[0.0, (5f64.sqrt() - 1.0) / 2.0]);
    let none = leibman_search(&g, LEIBMAN_N, LEIBMAN_Q, 1.0).is_none();
    // the smallest norm available is N min_{k ≤ Q} ‖kα‖, which must exceed the bound
    let oracle_none = LEIBMAN_N as f64 * cf_min_dist(5, 1, 2, LEIBMAN_Q) > 1.0;
    let el = t.elapsed();
    outcome(
        bad.is_empty() && none && oracle_none && el < LEIBMAN_TIME,
        format!(
            "rational failures {:?}, golden none: {none} (oracle agrees: {oracle_none}), {el:.2?} (< {LEIBMAN_TIME:?})",
            bad
        ),
    )
}

/// Worst `decay_stat(N)/decay_stat(N₀)` over the scan.
fn ratio(r: &[CorrelationReport]) -> f64 {
    r.iter().map(|x| x.decay_stat).fold(0.0, f64::max) / r[0].decay_stat
}

fn decay_block(fs: &[(&str, &MultFuncTable)]) -> (Outcome, Vec<String>) {
    let t = Instant::now();
    let opts = CorrelationOptions::default();
    let ch = LipschitzTestFunction::character(0, 1);
    let mut lines = Vec::new();
    let mut worst = 0.0f64;
    let mut pass = true;
    for (name, f) in fs {
        let cases: [(&str, Vec<CorrelationReport>); 3] = [
            ("linear", decay_scan(f, &linear(), &ch, &DECAY_NS, 1, 1, &opts).unwrap()),
            ("quadratic", decay_scan(f, &quadratic(), &ch, &DECAY_NS, 1, 1, &opts).unwrap()),
            ("heisenberg", decay_scan(f, &heisenberg(), &heisenberg_fn(), &DECAY_NS, 1, 1, &opts).unwrap()),
        ];
        for (seq, r) in cases {
            let q = ratio(&r);
            worst = worst.max(q);
            let ok = q <= DECAY_FACTOR;
            pass &= ok;
            let series: Vec<String> = r.iter().map(|x| format!("{:.3e}", x.decay_stat)).collect();
            lines.push(format!(
                "{} {name:>8} {seq:<10} max ratio {q:.2}  decay_stat [{}]",
                if ok { "ok " } else { "RED" },
                series.join(", ")
            ));
        }
    }
    let el = t.elapsed();
    pass &= el < DECAY_TIME;
    (
        outcome(
            pass,
            format!("worst ratio to N = 1e4: {worst:.2} (≤ {DECAY_FACTOR}), scans {el:.2?} (< {DECAY_TIME:?})"),
        ),
        lines,
    )
}

fn c9(tb: &Tables) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut nonzero = 0;
    let fs = [&tb.mu, &tb.lam];
    for _ in 0..CENTERING_CONFIGS {
        let w = [1u64, 2, 6, 30, 210][rng.gen_range(0..5)];
        let b = loop {
            let b = rng.gen_range(1..=w);
            if num_integer::gcd(b, w) == 1 {
                break b;
            }
        };
        let n = rng.gen_range(1..=40_000);
        let f = fs[rng.gen_range(0..2)];
        let c = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let konst = LipschitzTestFunction::new(TestFn::Const { re: c.re, im: c.im });
        let g = if rng.gen_bool(0.5) { heisenberg() } else { quadratic() };
        let r = correlation_sum(f, &g, &konst, n, w, b).unwrap();
        if r.s != Complex64::new(0.0, 0.0) {
            nonzero += 1;
        }
    }
    let opts = CorrelationOptions {
        chunk_size: 1 << 14,
        ..Default::default()
    };
    let g = heisenberg();
    let par = correlation_sum_with(&tb.lam, &g, &heisenberg_fn(), 1_000_000, 1, 1, &opts).unwrap();
    let ser = correlation_sum_serial(&tb.lam, &g, &heisenberg_fn(), 1_000_000, 1, 1, &opts).unwrap();
    let identical = par.s == ser.s && par.mean_f == ser.mean_f;
    outcome(
        nonzero == 0 && identical,
        format!("nonzero S for F ≡ c: {nonzero}/{CENTERING_CONFIGS}, W = 1 parallel == serial bitwise: {identical}"),
    )
}

fn c10(tb: &Tables) -> Outcome {
    let n = 1_000_000;
    let r = check_conditions(&tb.mu, 1, 1, 2.0, n).unwrap();
    let density = 6.0 / std::f64::consts::PI.powi(2);
    let oracle = squarefree_count(n) as f64 / n as f64;
    let fl2_ok = (r.fl2_ratio - density).abs() < FL2_TOL && (r.fl2_ratio - oracle).abs() < 1e-12;
    let stat_ok = r.w_equi_stat.is_finite() && r.w_equi_stat >= 0.0;
    let opts = CorrelationOptions::default();
    let ch = LipschitzTestFunction::character(0, 1);
    let e_mu = log_weight_decompose(&tb.mu, &linear(), &ch, n, 1, 1, &opts).unwrap().relative_error();
    let e_lam = log_weight_decompose(&tb.lam, &quadratic(), &ch, n, 1, 1, &opts).unwrap().relative_error();
    outcome(
        fl2_ok && stat_ok && e_mu < MV_TOL && e_lam < MV_TOL,
        format!(
            "fl2_ratio {:.5} (6/π² = {density:.5}, squarefree oracle {oracle:.5}, tol {FL2_TOL}), \
             w_equi_stat {:.3}, MV relative error μ {e_mu:.1e}, λ_Δ {e_lam:.1e} (< {MV_TOL:e})",
            r.fl2_ratio, r.w_equi_stat
        ),
    )
}

fn c11(tb: &Tables) -> Outcome {
    let t = Instant::now();
    let mu = nilcorr::multfunc::sieve::mobius(SIEVE_N, &SieveConfig::default()).unwrap();
    let sieve = t.elapsed();
    let spot = [1u64, 30, 97, 99_999_989, 99_999_999].iter().all(|&n| mu[n as usize] == mobius_naive(n));
    drop(mu);
    let t = Instant::now();
    let r = correlation_sum(&tb.lam, &heisenberg(), &heisenberg_fn(), CORR_N, 1, 1).unwrap();
    let corr = t.elapsed();
    outcome(
        spot && sieve < SIEVE_TIME && corr < CORR_TIME,
        format!(
            "Möbius sieve to 1e8 {sieve:.2?} (< {SIEVE_TIME:?}), Heisenberg correlation over 1e7 terms {corr:.2?} \
             (< {CORR_TIME:?}), |S| = {:.2e}, threads {}",
            r.s.norm(),
            rayon::current_num_threads()
        ),
    )
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let started = Instant::now();
    let mut results: Vec<(usize, Outcome, Vec<String>)> = Vec::new();
    let mut report = |k: usize, o: Outcome, extra: Vec<String>| {
        let status = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_RED.contains(&k) { " [known red]" } else { "" };
        println!("criterion {k:>2}: {status}{note}  {}", o.detail);
        for l in &extra {
            println!("    {l}");
        }
        results.push((k, o, extra));
    };
    report(1, c1(), vec![]);
    report(2, c2(), vec![]);
    report(3, c3(), vec![]);
    let tb = tables();
    report(4, c4(&tb), vec![]);
    report(5, c5(&tb), vec![]);
    report(6, c6(), vec![]);
    let (o, lines) = decay_block(&[("mu", &tb.mu), ("lambda", &tb.lam)]);
    report(7, o, lines);
    let ml = tb.mu.pointwise(&tb.lam);
    let (o, lines) = decay_block(&[("mu*lam", &ml)]);
    report(8, o, lines);
    drop(ml);
    report(9, c9(&tb), vec![]);
    report(10, c10(&tb), vec![]);
    report(11, c11(&tb), vec![]);

    let unexpected: Vec<usize> = results
        .iter()
        .filter(|(k, o, _)| !o.pass && !KNOWN_RED.contains(k))
        .map(|r| r.0)
        .collect();
    let red: Vec<usize> = results.iter().filter(|(_, o, _)| !o.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria pass; red {:?}; total {:.1?}",
        results.len() - red.len(),
        results.len(),
        red,
        started.elapsed()
    );
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
