//! Executes an [`ExperimentConfig`].

use std::io::Write;


use num_integer::Integer;
use serde_json::json;

use super::config::{
    sequence_from_config, CorrelateParams, EquidistMode, EquidistParams, FunctionSpec, TableKind,
};
use super::{cache_dir, ncf1, tau_cached, write_atomic, Command, ExperimentConfig, Format, Provenance};
use crate::correlate::{
    decay_scan, log_weight_decompose, vaughan_check, von_mangoldt_log_identity, write_reports_csv,
    CorrelationOptions, CorrelationReport, MVDecomposition,
};
use crate::equidist::{
    empirical_discrepancy, horizontal_family, leibman_search, total_discrepancy, LeibmanParams,
};
use crate::error::{Error, Result};
use crate::multfunc::automorphic::import_lfunc_with_seed;
use crate::multfunc::conditions::tricked_index;
use crate::multfunc::{check_conditions, normalize_gl2, MultFuncTable, SieveConfig};

/// `0` on success, `2` for capacity errors, `1` for everything else.
pub fn exit_code(r: &Result<()>) -> i32 {
    match r {
        Ok(()) => 0,
        Err(Error::CapacityExceeded(_)) => 2,
        Err(_) => 1,
    }
}

fn config_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config {
        path: path.into(),
        msg: msg.to_string(),
    }
}

/// Checks that do not need any tables.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let wb = |w: u64, b: u64| -> Result<()> {
        if w == 0 {
            return Err(config_err("W", "must be positive"));
        }
        if b == 0 {
            return Err(config_err("b", "must be positive"));
        }
        if b.gcd(&w) != 1 {
            return Err(config_err("b", Error::NonCoprime { b, w }));
        }
        Ok(())
    };
    match &cfg.command {
        Command::Correlate(p) | Command::Scan(p) => {
            wb(p.w, p.b)?;
            if p.n_list.is_empty() {
                return Err(config_err("N_list", "empty"));
            }
            if p.n_list.windows(2).any(|x| x[0] >= x[1]) {
                return Err(config_err("N_list", "must be strictly increasing"));
            }
            if p.chunk_size == 0 {
                return Err(config_err("chunk_size", "must be positive"));
            }
            if cfg.format == Format::Binary {
                return Err(config_err("format", "binary output is for tables only"));
            }
        }
        Command::Conditions { w, b, .. } => wb(*w, *b)?,
        Command::Sieve { n, .. } | Command::Vaughan { n } if *n == 0 => {
            return Err(config_err("n", "must be positive"));
        }
        Command::Equidist(p) => {
            if !(p.delta > 0.0 && p.delta <= 1.0) {
                return Err(config_err("delta", "must lie in (0, 1]"));
            }
            if cfg.format == Format::Binary {
                return Err(config_err("format", "binary output is for tables only"));
            }
        }
        _ => {}
    }
    Ok(())
}

/// The table of `kind` covering `1..=n`.
pub fn build_table(kind: TableKind, n: u64) -> Result<MultFuncTable> {
    let cfg = SieveConfig::default();
    match kind {
        TableKind::Mobius => MultFuncTable::sieve_mobius(n, &cfg),
        TableKind::Liouville => MultFuncTable::sieve_liouville(n, &cfg),
        TableKind::Mangoldt => MultFuncTable::sieve_von_mangoldt(n, &cfg),
        TableKind::Tau => Ok(crate::multfunc::tau::tau_as_table(&*tau_cached(&cache_dir(), n)?)),
        TableKind::LambdaDelta => Ok(normalize_gl2(tau_cached(&cache_dir(), n)?)),
        TableKind::MobiusTimesLambda => {
            let mu = MultFuncTable::sieve_mobius(n, &cfg)?;
            Ok(mu.pointwise(&normalize_gl2(tau_cached(&cache_dir(), n)?)))
        }
        TableKind::One => Ok(MultFuncTable::one(n)),
    }
}

fn function_table(spec: &FunctionSpec, n: u64, seed: u64) -> Result<MultFuncTable> {
    match spec {
        FunctionSpec::Builtin { kind } => build_table(*kind, n),
        FunctionSpec::Imported { file } => {
            let (_, t) = import_lfunc_with_seed(file, seed)?;
            t.check_len(n)?;
            Ok(t)
        }
    }
}

/// Output sink: the configured path (written atomically) or stdout.
fn emit(cfg: &ExperimentConfig, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match &cfg.output_path {
        Some(p) => write_atomic(p, |w| body(w)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn emit_json(cfg: &ExperimentConfig, prov: &Provenance, result: serde_json::Value) -> Result<()> {
    let doc = json!({ "provenance": prov, "result": result });
    emit(cfg, |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)
    })
}

fn emit_csv(
    cfg: &ExperimentConfig,
    prov: &Provenance,
    rows: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    emit(cfg, |w| {
        writeln!(w, "{}", prov.csv_line())?;
        rows(w)
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    validate(cfg)?;
    let prov = Provenance::for_config(cfg);
    match &cfg.command {
        Command::Sieve { kind, n } => run_sieve(cfg, &prov, *kind, *n),
        Command::Correlate(p) => run_correlate(cfg, &prov, p, false),
        Command::Scan(p) => run_correlate(cfg, &prov, p, true),
        Command::Equidist(p) => run_equidist(cfg, &prov, p),
        Command::Conditions { kind, n, w, b, c } => {
            let table = build_table(*kind, w * n)?;
            let r = check_conditions(&table, *w, *b, *c, *n)?;
            match cfg.format {
                Format::Json => emit_json(cfg, &prov, serde_json::to_value(&r).expect("report serializes")),
                Format::Csv => emit_csv(cfg, &prov, |w| {
                    let mut wr = csv::Writer::from_writer(w);
                    wr.write_record(["N", "W", "b", "C", "w_equi_stat", "lp2_ratio", "fl2_ratio", "wl2_min", "wl2_max"])?;
                    let wl = r.wl2_ratios.iter().map(|x| x.1);
                    let lo = wl.clone().fold(f64::INFINITY, f64::min);
                    let hi = wl.fold(0.0, f64::max);
                    wr.write_record([
                        r.n.to_string(),
                        r.w_used.to_string(),
                        r.b_used.to_string(),
                        r.c_used.to_string(),
                        r.w_equi_stat.to_string(),
                        r.lp2_ratio.to_string(),
                        r.fl2_ratio.to_string(),
                        lo.to_string(),
                        hi.to_string(),
                    ])?;
                    wr.flush()
                }),
                Format::Binary => Err(config_err("format", "binary output is for tables only")),
            }
        }
        Command::Vaughan { n } => {
            let v = vaughan_check(*n)?;
            let l = von_mangoldt_log_identity(*n)?;
            println!("max_error = {v:.3e}");
            println!("log_identity_max_error = {l:.3e}");
            if cfg.output_path.is_none() {
                return Ok(());
            }
            match cfg.format {
                Format::Json => emit_json(
                    cfg,
                    &prov,
                    json!({ "N": n, "vaughan_max_error": v, "log_identity_max_error": l }),
                ),
                Format::Csv => emit_csv(cfg, &prov, |w| {
                    writeln!(w, "N,vaughan_max_error,log_identity_max_error")?;
                    writeln!(w, "{n},{v},{l}")
                }),
                Format::Binary => Err(config_err("format", "binary output is for tables only")),
            }
        }
        Command::Ingest { file } => {
            let (spec, table) = import_lfunc_with_seed(file, cfg.seed)?;
            eprintln!(
                "ingested {}: rank {}, {} primes, table to N = {}",
                spec.conductor_label,
                spec.m_rank,
                spec.satake_params.len(),
                table.len()
            );
            match cfg.format {
                Format::Binary => match &cfg.output_path {
                    Some(p) => ncf1::save_table(p, &table, Some(&prov)),
                    None => Err(config_err("output_path", "binary output needs a path")),
                },
                Format::Csv => emit_csv(cfg, &prov, |w| table.write_csv(w).map_err(std::io::Error::other)),
                Format::Json => emit_json(
                    cfg,
                    &prov,
                    json!({
                        "label": spec.conductor_label,
                        "rank": spec.m_rank,
                        "primes": spec.satake_params.len(),
                        "N": table.len(),
                    }),
                ),
            }
        }
    }
}

fn run_sieve(cfg: &ExperimentConfig, prov: &Provenance, kind: TableKind, n: u64) -> Result<()> {
    if kind == TableKind::Tau {
        let t = tau_cached(&cache_dir(), n)?;
        return match cfg.format {
            Format::Binary => match &cfg.output_path {
                Some(p) => ncf1::save_tau(p, &t, Some(prov)),
                None => Err(config_err("output_path", "binary output needs a path")),
            },
            Format::Csv => emit_csv(cfg, prov, |w| {
                writeln!(w, "n,re,im")?;
                for k in 1..=t.len() {
                    writeln!(w, "{k},{},0", t.tau(k))?;
                }
                Ok(())
            }),
            Format::Json => Err(config_err("format", "tables are written as binary or csv")),
        };
    }
    let table = build_table(kind, n)?;
    match cfg.format {
        Format::Binary => match &cfg.output_path {
            Some(p) => ncf1::save_table(p, &table, Some(prov)),
            None => Err(config_err("output_path", "binary output needs a path")),
        },
        Format::Csv => emit_csv(cfg, prov, |w| table.write_csv(w).map_err(std::io::Error::other)),
        Format::Json => Err(config_err("format", "tables are written as binary or csv")),
    }
}

fn run_correlate(cfg: &ExperimentConfig, prov: &Provenance, p: &CorrelateParams, scan: bool) -> Result<()> {
    let g = sequence_from_config(&p.manifold, &p.sequence)?;
    p.test_function
        .check_manifold(g.manifold())
        .map_err(|e| config_err("test_function", e))?;
    let n_max = *p.n_list.last().expect("validated non-empty");
    let need = tricked_index(p.w, p.b, n_max);
    let f = function_table(&p.function, need, cfg.seed)?;
    let opts = CorrelationOptions {
        chunk_size: p.chunk_size,
        ..Default::default()
    };
    let reports: Vec<CorrelationReport> = decay_scan(&f, &g, &p.test_function, &p.n_list, p.w, p.b, &opts)?;
    let decomps: Vec<MVDecomposition> = if p.decompose {
        p.n_list
            .iter()
            .map(|&n| log_weight_decompose(&f, &g, &p.test_function, n, p.w, p.b, &opts))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    for r in &reports {
        log::info!("N = {}: |S| = {:.6e}, decay_stat = {:.6e}", r.n, r.s.norm(), r.decay_stat);
    }
    match cfg.format {
        Format::Csv => emit_csv(cfg, prov, |w| write_reports_csv(&reports, w)),
        Format::Json => {
            let mut result = json!({ "reports": reports });
            if scan {
                let first = reports.first().map(|r| r.decay_stat).unwrap_or(0.0);
                let worst = reports.iter().map(|r| r.decay_stat).fold(0.0, f64::max);
                result["max_ratio_to_first"] = json!(if first > 0.0 { worst / first } else { f64::NAN });
            }
            if p.decompose {
                result["decompositions"] = serde_json::to_value(&decomps).expect("serializes");
            }
            emit_json(cfg, prov, result)
        }
        Format::Binary => unreachable!("rejected by validate"),
    }
}

fn run_equidist(cfg: &ExperimentConfig, prov: &Provenance, p: &EquidistParams) -> Result<()> {
    let g = sequence_from_config(&p.manifold, &p.sequence)?;
    if p.mode == EquidistMode::Leibman {
        let d = LeibmanParams::from_delta(p.delta);
        let q_max = p.q_max.unwrap_or(d.q_max);
        let bound = p.norm_bound.unwrap_or(d.norm_bound);
        let w = leibman_search(&g, p.n, q_max, bound);
        return match cfg.format {
            Format::Json => emit_json(
                cfg,
                prov,
                json!({ "N": p.n, "q_max": q_max, "norm_bound": bound, "witness": w }),
            ),
            _ => emit_csv(cfg, prov, |out| {
                writeln!(out, "N,q_max,norm_bound,character,norm")?;
                match &w {
                    Some(w) => {
                        let k: Vec<String> = w.character.k.iter().map(|x| x.to_string()).collect();
                        writeln!(out, "{},{q_max},{bound},{},{}", p.n, k.join(" "), w.norm)
                    }
                    None => writeln!(out, "{},{q_max},{bound},,", p.n),
                }
            }),
        };
    }
    let family = match &p.test_functions {
        Some(f) => f.clone(),
        None => horizontal_family(g.manifold(), p.kmax),
    };
    let report = match p.mode {
        EquidistMode::Empirical => empirical_discrepancy(&g, p.n, &family, p.delta)?,
        _ => total_discrepancy(&g, p.n, &family, p.delta)?,
    };
    match cfg.format {
        Format::Json => emit_json(cfg, prov, serde_json::to_value(&report).expect("serializes")),
        _ => emit_csv(cfg, prov, |w| report.write_csv(w)),
    }
}

/// `decay_stat` of the largest `N` over that of the first.
pub fn trend_ratio(reports: &[CorrelationReport]) -> f64 {
    match reports.first() {
        Some(f) if f.decay_stat > 0.0 => reports.iter().map(|r| r.decay_stat).fold(0.0, f64::max) / f.decay_stat,
        _ => f64::NAN,
    }
}

