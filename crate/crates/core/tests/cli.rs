use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::Duration;

use proptest::prelude::*;
use tempfile::TempDir;

use nilcorr::io::config::{CorrelateParams, FunctionSpec, SequenceSpec};
use nilcorr::io::ncf1::{self, Payload};
use nilcorr::io::{Command as Cmd, ExperimentConfig, Format, TableKind};
use nilcorr::multfunc::sieve::mobius;
use nilcorr::multfunc::{tau_table, SieveConfig};
use nilcorr::nilgroup::LipschitzTestFunction;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nilcorr"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .env("NILCORR_CACHE_DIR", dir.join("cache"))
        .env("RUST_LOG", "info")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CORRELATE_TOML: &str = r#"
function = { kind = "mobius" }
manifold = "torus"
sequence = { coeffs = [[0], ["golden"], ["frac(sqrt(2))"]] }
N_list = [1000, 5000, 20000]
W = 1
b = 1
chunk_size = 1024
seed = 3

[test_function]
expression = { type = "phase", coord = 0, freq = 1 }
"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// CSV body with the provenance line dropped and the `runtime_ms` column blanked.
fn masked_body(text: &str) -> String {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# nilcorr "));
    lines
        .map(|l| {
            let mut cells: Vec<&str> = l.split(',').collect();
            cells.pop();
            cells.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn vaughan_prints_small_error() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["vaughan", "--n", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("max_error")).unwrap();
    let v: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!(v < 1e-9, "{v}");
}

#[test]
fn constant_test_function_reports_zero() {
    let dir = TempDir::new().unwrap();
    let text = CORRELATE_TOML.replace(
        r#"expression = { type = "phase", coord = 0, freq = 1 }"#,
        r#"expression = { type = "const", re = 1.0, im = 0.0 }"#,
    );
    let cfg = write(dir.path(), "c.toml", &text);
    let o = run_in(dir.path(), &["correlate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(out.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "|S|").unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r[col].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn non_coprime_config_exits_1() {
    let dir = TempDir::new().unwrap();
    let text = CORRELATE_TOML.replace("W = 1\nb = 1", "W = 4\nb = 2");
    let cfg = write(dir.path(), "c.toml", &text);
    let o = run_in(dir.path(), &["correlate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("not coprime") && err.contains("`b`"), "{err}");

    let o = run_in(dir.path(), &["conditions", "--kind", "mobius", "--n", "100", "--w", "4", "--b", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let text = CORRELATE_TOML.replace("N_list = [1000, 5000, 20000]", "N_list = [5000, 1000]");
    let cfg = write(dir.path(), "c.toml", &text);
    let o = run_in(dir.path(), &["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("N_list"));

    let o = run_in(dir.path(), &["correlate", "--config", "missing.toml"]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = write(dir.path(), "v.toml", "command = \"vaughan\"\nn = 100\n");
    let o = run_in(dir.path(), &["correlate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("command"));
}

#[test]
fn capacity_error_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["sieve", "--kind", "tau", "--n", "2e7"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = run_in(dir.path(), &["sieve", "--kind", "mobius", "--n", "1e12", "--out", "mu.bin"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!dir.path().join("mu.bin").exists());
}

#[test]
fn deterministic_csv_bodies() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.toml", CORRELATE_TOML);
    let c = cfg.to_str().unwrap();
    let a = run_in(dir.path(), &["scan", "--config", c, "--out", "a.csv"]);
    let b = run_in(dir.path(), &["--threads", "1", "scan", "--config", c, "--out", "b.csv"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(masked_body(&a), masked_body(&b));
    assert!(a.lines().nth(1).unwrap().starts_with("N,W,b,re(S),im(S),|S|,decay_stat,lip_estimate,runtime_ms"));
    assert!(a.lines().next().unwrap().contains("seed=3"));
}

#[test]
fn json_output_and_decomposition() {
    let dir = TempDir::new().unwrap();
    let text = format!("{CORRELATE_TOML}\n").replace("seed = 3", "seed = 3\ndecompose = true\nformat = \"json\"");
    let cfg = write(dir.path(), "c.toml", &text);
    let o = run_in(dir.path(), &["scan", "--config", cfg.to_str().unwrap(), "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["provenance"]["command"], "scan");
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 3);
    let d = &v["result"]["decompositions"][2];
    assert_eq!(d["N"], 20000);
    assert_eq!(d["U"], 736);
}

#[test]
fn ncf1_round_trip_and_cache() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["sieve", "--kind", "mobius", "--n", "1e4", "--out", "mu.ncf1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (payload, prov) = ncf1::load(&dir.path().join("mu.ncf1")).unwrap();
    let prov = prov.expect("provenance trailer");
    assert_eq!(prov.command, "sieve");
    let Payload::Table(t) = payload else { panic!("expected a table") };
    let mu = mobius(10_000, &SieveConfig::default()).unwrap();
    assert_eq!(t.len(), 10_000);
    for n in 1..=10_000u64 {
        assert_eq!(t.get_int(n), Some(mu[n as usize] as i64));
    }
    let bytes = std::fs::read(dir.path().join("mu.ncf1")).unwrap();
    assert_eq!(&bytes[..4], b"NCF1");
    assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 10_000);

    let o = run_in(dir.path(), &["sieve", "--kind", "tau", "--n", "3000", "--out", "tau.ncf1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("cache miss"));
    let o = run_in(dir.path(), &["sieve", "--kind", "tau", "--n", "2000", "--out", "tau2.ncf1"]);
    assert!(stderr(&o).contains("cache hit"), "{}", stderr(&o));
    let Payload::Tau(t) = ncf1::load(&dir.path().join("tau2.ncf1")).unwrap().0 else { panic!() };
    let want = tau_table(2000).unwrap();
    assert_eq!(t.len(), 2000);
    for n in 1..=2000 {
        assert_eq!(t.tau(n), want.tau(n));
    }
}

#[test]
fn killed_run_leaves_no_output() {
    let dir = TempDir::new().unwrap();
    let mut child = bin()
        .args(["sieve", "--kind", "liouville", "--n", "1e8", "--out", "big.ncf1"])
        .current_dir(dir.path())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    std::thread::sleep(Duration::from_millis(300));
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(!dir.path().join("big.ncf1").exists());

    // a failing run leaves an existing file untouched
    std::fs::write(dir.path().join("keep.csv"), "old").unwrap();
    let o = run_in(dir.path(), &["ingest", "--file", "nope.json", "--out", "keep.csv", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_to_string(dir.path().join("keep.csv")).unwrap(), "old");
}

#[test]
fn equidist_and_ingest() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "e.toml",
        "manifold = \"torus\"\nsequence = { coeffs = [[0], [\"sqrt(2)\"]] }\nN = 20000\ndelta = 0.1\nformat = \"json\"\n",
    );
    let o = run_in(dir.path(), &["equidist", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["verdict"], "pass");

    let o = run_in(dir.path(), &["equidist", "--config", cfg.to_str().unwrap(), "--mode", "leibman"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["result"]["witness"].is_null());

    let tau = tau_table(250).unwrap();
    let spec = nilcorr::multfunc::builtin_delta(&tau, 200);
    let file = nilcorr::multfunc::LfuncFile::from_spec(&spec, None);
    write(dir.path(), "delta.json", &serde_json::to_string(&file).unwrap());
    let o = run_in(dir.path(), &["ingest", "--file", "delta.json", "--out", "delta.ncf1", "--format", "binary"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let Payload::Table(t) = ncf1::load(&dir.path().join("delta.ncf1")).unwrap().0 else { panic!() };
    // data for p ≤ 200 reaches just below the next prime, 211
    assert_eq!(t.len(), 210);
    assert!((t.get(210).re - tau.normalized(210)).abs() < 1e-9);
}

fn sample_config(n: u64, w: u64, b: u64, seed: u64, pick: u8) -> ExperimentConfig {
    let command = match pick % 4 {
        0 => Cmd::Sieve { kind: TableKind::Liouville, n },
        1 => Cmd::Conditions { kind: TableKind::Mobius, n, w, b, c: 1.5 },
        2 => Cmd::Vaughan { n },
        _ => Cmd::Correlate(CorrelateParams {
            function: FunctionSpec::Builtin { kind: TableKind::LambdaDelta },
            manifold: serde_json::json!("heisenberg"),
            sequence: SequenceSpec::Coeffs {
                coeffs: vec![
                    vec![0.into(), 0.into(), 0.into()],
                    vec!["frac(sqrt(2))".into(), 0.25.into(), 0.into()],
                ],
            },
            test_function: LipschitzTestFunction::character(1, -2),
            n_list: vec![n, n + 10],
            w,
            b,
            chunk_size: 512,
            decompose: pick % 2 == 0,
        }),
    };
    let mut c = ExperimentConfig::new(command);
    c.seed = seed;
    c.format = if pick % 3 == 0 { Format::Json } else { Format::Csv };
    if pick % 5 == 0 {
        c.output_path = Some("out/x.csv".into());
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips(n in 1u64..1_000_000_000, w in 1u64..100, b in 1u64..100, seed in any::<u64>(), pick in any::<u8>()) {
        let cfg = sample_config(n, w, b, seed, pick);
        let toml = cfg.to_toml().unwrap();
        prop_assert_eq!(&ExperimentConfig::parse(&toml, None).unwrap(), &cfg);
        let json = cfg.to_json();
        prop_assert_eq!(&ExperimentConfig::parse(&json, None).unwrap(), &cfg);
    }
}
