//! Merging result CSV files into one summary.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use blaschke::inequalities::read_reports_csv;
use blaschke::{CheckId, InequalityReport};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ensure_dir;

const REPORT_HEADER: &str = "id,n,subject,params,lhs,rhs,margin,rel_margin,tol,pass,grid,seed,millis";

#[derive(Debug, Serialize)]
pub struct Source {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Serialize)]
pub struct IdSummary {
    pub id: String,
    pub total: usize,
    pub passed: usize,
    pub worst_rel_margin: f64,
    pub worst_subject: String,
    pub worst_params: String,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub sources: Vec<Source>,
    pub total: usize,
    pub passed: usize,
    pub checks: Vec<IdSummary>,
}

fn is_report_csv(path: &Path) -> Result<bool> {
    if path.extension().and_then(|e| e.to_str()) != Some("csv") {
        return Ok(false);
    }
    let text = std::fs::read_to_string(path)?;
    Ok(text.lines().next().map(str::trim) == Some(REPORT_HEADER))
}

/// Report CSVs named directly or found one level inside a directory, sorted by path.
pub fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            found.sort();
            for p in found {
                if p.is_file() && is_report_csv(&p)? {
                    files.push(p);
                }
            }
        } else if input.is_file() {
            if !is_report_csv(input)? {
                bail!("{} is not a report CSV (expected header {REPORT_HEADER})", input.display());
            }
            files.push(input.clone());
        } else {
            bail!("input {} does not exist", input.display());
        }
    }
    if files.is_empty() {
        bail!("no result files found");
    }
    Ok(files)
}

/// Orders ids as in [`CheckId::ALL`], unknown ids last.
fn id_rank(id: &str) -> (usize, String) {
    let pos = CheckId::ALL.iter().position(|c| c.name() == id).unwrap_or(usize::MAX);
    (pos, id.to_string())
}

pub fn summarize(files: &[PathBuf]) -> Result<Summary> {
    let mut sources = Vec::new();
    let mut rows: Vec<InequalityReport> = Vec::new();
    for path in files {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let parsed = read_reports_csv(bytes.as_slice()).with_context(|| format!("parsing {}", path.display()))?;
        let hash = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect::<String>();
        sources.push(Source { path: path.display().to_string(), sha256: hash, rows: parsed.len() });
        rows.extend(parsed);
    }
    let mut by_id: BTreeMap<(usize, String), Vec<&InequalityReport>> = BTreeMap::new();
    for r in &rows {
        by_id.entry(id_rank(&r.id)).or_default().push(r);
    }
    let checks = by_id
        .into_iter()
        .map(|((_, id), group)| {
            let worst = group.iter().min_by(|a, b| a.rel_margin.total_cmp(&b.rel_margin)).expect("groups are non-empty");
            IdSummary {
                id,
                total: group.len(),
                passed: group.iter().filter(|r| r.pass).count(),
                worst_rel_margin: worst.rel_margin,
                worst_subject: worst.subject.clone(),
                worst_params: worst.params.clone(),
            }
        })
        .collect();
    Ok(Summary { sources, total: rows.len(), passed: rows.iter().filter(|r| r.pass).count(), checks })
}

/// Writes `summary.json`, `summary.csv` and `summary.dat`; passes iff every merged row passed.
pub fn run(inputs: &[PathBuf], out: &Path) -> Result<bool> {
    let files = collect_inputs(inputs)?;
    let summary = summarize(&files)?;
    ensure_dir(out)?;
    serde_json::to_writer_pretty(BufWriter::new(File::create(out.join("summary.json"))?), &summary)?;
    let mut w = csv::Writer::from_path(out.join("summary.csv"))?;
    for c in &summary.checks {
        w.serialize(c)?;
    }
    w.flush()?;
    let mut dat = BufWriter::new(File::create(out.join("summary.dat"))?);
    writeln!(dat, "# index id passed total worst_rel_margin")?;
    for (i, c) in summary.checks.iter().enumerate() {
        writeln!(dat, "{i} {} {} {} {:.12e}", c.id, c.passed, c.total, c.worst_rel_margin)?;
    }
    dat.flush()?;
    for s in &summary.sources {
        println!("source {} sha256={} rows={}", s.path, s.sha256, s.rows);
    }
    for c in &summary.checks {
        println!("{:<16} {}/{} passed, worst rel_margin {:+.3e} ({})", c.id, c.passed, c.total, c.worst_rel_margin, c.worst_subject);
    }
    println!("total {}/{} passed", summary.passed, summary.total);
    Ok(summary.passed == summary.total)
}
