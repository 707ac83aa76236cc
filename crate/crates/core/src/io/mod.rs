//! Configuration, persistence and the command runner behind the `nilcorr` binary.

pub mod config;
pub mod ncf1;
pub mod provenance;
pub mod run;

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::multfunc::{tau_table, TauTable};

pub use config::{Command, ExperimentConfig, Format, TableKind};
pub use provenance::Provenance;
pub use run::{exit_code, run};

/// Environment variable naming the table cache directory.
pub const CACHE_ENV: &str = "NILCORR_CACHE_DIR";

/// Writes `path` through a temporary file in the same directory, renamed
/// into place only after `body` succeeds.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut tempfile::NamedTempFile>) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    {
        let mut w = BufWriter::new(&mut tmp);
        body(&mut w)?;
        w.flush()?;
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// The cache directory: `$NILCORR_CACHE_DIR`, else `$XDG_CACHE_HOME/nilcorr`,
/// else `~/.cache/nilcorr`, else a directory under the system temp dir.
pub fn cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(d);
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(d).join("nilcorr");
    }
    if let Some(h) = std::env::var_os("HOME") {
        return PathBuf::from(h).join(".cache").join("nilcorr");
    }
    std::env::temp_dir().join("nilcorr-cache")
}

pub fn cache_path(dir: &Path, kind: &str, n: u64) -> PathBuf {
    dir.join(format!("{kind}-{n}.ncf1"))
}

/// Smallest cached `N' ≥ n` for `kind` in `dir`.
fn find_cached(dir: &Path, kind: &str, n: u64) -> Option<(u64, PathBuf)> {
    let prefix = format!("{kind}-");
    std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let m: u64 = name.strip_prefix(&prefix)?.strip_suffix(".ncf1")?.parse().ok()?;
            (m >= n).then(|| (m, e.path()))
        })
        .min_by_key(|(m, _)| *m)
}

/// `τ(1..=n)`, read from the cache in `dir` when a large enough table is
/// there, otherwise computed and stored.
pub fn tau_cached(dir: &Path, n: u64) -> Result<Arc<TauTable>> {
    if let Some((m, path)) = find_cached(dir, "tau", n) {
        match ncf1::load(&path) {
            Ok((ncf1::Payload::Tau(t), _)) => {
                log::info!("cache hit: {} (N = {m})", path.display());
                let t = if m == n {
                    t
                } else {
                    TauTable::from_residues(t.residues()[..=n as usize].to_vec())
                };
                return Ok(Arc::new(t));
            }
            Ok(_) => log::warn!("{} is not a tau table; recomputing", path.display()),
            Err(e) => log::warn!("unreadable cache file {}: {e}; recomputing", path.display()),
        }
    }
    log::info!("cache miss: tau to {n}");
    let t = tau_table(n)?;
    let path = cache_path(dir, "tau", n);
    if let Err(e) = ncf1::save_tau(&path, &t, None) {
        log::warn!("could not write cache {}: {e}", path.display());
    }
    Ok(Arc::new(t))
}
