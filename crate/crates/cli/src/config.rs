//! `key=value` configuration files and the resolved run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use crate::Opts;

/// The only environment variable consulted.
pub const OUTPUT_DIR_VAR: &str = "OUTPUT_DIR";

const KEYS: [&str; 13] = ["dim", "id", "endo", "mu", "body", "f", "c", "seed", "grid", "tol", "jobs", "out", "strict"];

/// Reads `key=value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("config line {}: expected key=value, got {raw:?}", i + 1))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !KEYS.contains(&k.as_str()) {
            bail!("config line {}: unknown key {k:?}", i + 1);
        }
        if map.insert(k.clone(), v).is_some() {
            bail!("config line {}: duplicate key {k:?}", i + 1);
        }
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| anyhow!("config key {key}: cannot parse {v:?}: {e}"))
}

/// Fills every flag left unset on the command line from the config file.
pub fn merge(mut opts: Opts) -> Result<Opts> {
    let Some(path) = opts.config.clone() else { return Ok(opts) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let map = parse_config(&text)?;
    let text_opt = |slot: &mut Option<String>, key: &str| {
        if slot.is_none() {
            *slot = map.get(key).cloned();
        }
    };
    text_opt(&mut opts.id, "id");
    text_opt(&mut opts.endo, "endo");
    text_opt(&mut opts.mu, "mu");
    text_opt(&mut opts.body, "body");
    text_opt(&mut opts.f, "f");
    text_opt(&mut opts.c, "c");
    text_opt(&mut opts.seed, "seed");
    if opts.dim.is_none() {
        opts.dim = map.get("dim").map(|v| parse_value("dim", v)).transpose()?;
    }
    if opts.grid.is_none() {
        opts.grid = map.get("grid").map(|v| parse_value("grid", v)).transpose()?;
    }
    if opts.tol.is_none() {
        opts.tol = map.get("tol").map(|v| parse_value("tol", v)).transpose()?;
    }
    if opts.jobs.is_none() {
        opts.jobs = map.get("jobs").map(|v| parse_value("jobs", v)).transpose()?;
    }
    if opts.out.is_none() {
        opts.out = map.get("out").map(PathBuf::from);
    }
    if !opts.strict {
        opts.strict = map.get("strict").map(|v| parse_value::<bool>("strict", v)).transpose()?.unwrap_or(false);
    }
    Ok(opts)
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dim: usize,
    pub id: Option<String>,
    pub endo: Option<String>,
    pub mu: Option<String>,
    pub body: Option<String>,
    pub f: Option<String>,
    pub cs: Vec<f64>,
    /// Never empty; every output row records its seed.
    pub seeds: Vec<u64>,
    pub grid: Option<usize>,
    /// Positive when set.
    pub tol: Option<f64>,
    pub jobs: usize,
    pub out: PathBuf,
    pub strict: bool,
}

impl RunConfig {
    pub fn resolve(opts: Opts, default_dim: usize) -> Result<Self> {
        let opts = merge(opts)?;
        let dim = opts.dim.unwrap_or(default_dim);
        if dim < 1 {
            bail!("--dim must be at least 1");
        }
        if let Some(t) = opts.tol {
            if !(t > 0.0 && t.is_finite()) {
                bail!("--tol must be positive, got {t}");
            }
        }
        if opts.grid == Some(0) {
            bail!("--grid must be positive");
        }
        let jobs = opts.jobs.unwrap_or(1);
        if jobs == 0 {
            bail!("--jobs must be positive");
        }
        let cs = match &opts.c {
            Some(s) => parse_list(s)?,
            None => Vec::new(),
        };
        let seeds = match &opts.seed {
            Some(s) => parse_seeds(s)?,
            None => vec![0],
        };
        Ok(RunConfig {
            dim,
            id: opts.id,
            endo: opts.endo,
            mu: opts.mu,
            body: opts.body,
            f: opts.f,
            cs,
            seeds,
            grid: opts.grid,
            tol: opts.tol,
            jobs,
            out: output_dir(opts.out),
            strict: opts.strict,
        })
    }
}

/// `--out`, else `OUTPUT_DIR`, else the working directory.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| anyhow!("bad number {x:?} in {s:?}")))
        .collect()
}

/// `7`, `1,2,3` or the half-open range `a..b`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        (a..b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse::<u64>().map_err(|_| anyhow!("bad seed {x:?}"))).collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        bail!("seed range {s:?} is empty");
    }
    Ok(seeds)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let map = parse_config("# run\ndim = 3\nendo=delta # inline\n\nstrict=true\n").unwrap();
        assert_eq!(map["dim"], "3");
        assert_eq!(map["endo"], "delta");
        assert_eq!(map["strict"], "true");
        assert!(parse_config("bogus=1").is_err());
        assert!(parse_config("dim").is_err());
        assert!(parse_config("dim=2\ndim=3").is_err());
    }

    #[test]
    fn seeds_and_lists() {
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("1, 2,3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("2..5").unwrap(), vec![2, 3, 4]);
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("x").is_err());
        assert_eq!(parse_list("1,0.5,0.1").unwrap(), vec![1.0, 0.5, 0.1]);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "dim=2\nendo=sigma\ntol=0.01\n").unwrap();
        let opts = Opts { dim: Some(3), config: Some(path), ..Default::default() };
        let cfg = RunConfig::resolve(opts, 4).unwrap();
        assert_eq!(cfg.dim, 3);
        assert_eq!(cfg.endo.as_deref(), Some("sigma"));
        assert_eq!(cfg.tol, Some(0.01));
        assert_eq!(cfg.seeds, vec![0]);
        let bad = Opts { tol: Some(-1.0), ..Default::default() };
        assert!(RunConfig::resolve(bad, 3).is_err());
    }
}
