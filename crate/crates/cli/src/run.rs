//! Subcommand implementations. Each returns `Ok(all_passed)`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use blaschke::counterexample::{divergence_sweep, SweepRow};
use blaschke::inequalities::{
    check_functional, check_geometric_subject, equality_margin_scan, write_reports_csv, write_reports_json, GeometricSubject,
    ScanFamily, GEOMETRIC_RESOLUTION,
};
use blaschke::sphere::build_quadrature;
use blaschke::{AsplundEndo, CheckId, FunctionalOptions, InequalityReport, MinkowskiEndo};
use rayon::prelude::*;

use crate::config::{ensure_dir, output_dir, RunConfig};
use crate::{specs, Command, Family, Kind};

pub fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Verify { kind: Kind::Geometric, opts } => verify_geometric(&RunConfig::resolve(opts, 3)?),
        Command::Verify { kind: Kind::Functional, opts } => verify_functional(&RunConfig::resolve(opts, 2)?),
        Command::Counterexample { opts } => counterexample(&RunConfig::resolve(opts, 2)?),
        Command::Report { inputs, out } => crate::report::run(&inputs, &output_dir(out)),
        Command::Sweep { family, values, opts } => {
            let default_dim = if family == Family::Ellipsoid { 3 } else { 2 };
            sweep(family, &values, &RunConfig::resolve(opts, default_dim)?)
        }
    }
}

fn select_ids(cfg: &RunConfig, geometric: bool) -> Result<Vec<CheckId>> {
    let spec = cfg.id.as_deref().ok_or_else(|| anyhow!("--id is required"))?;
    let ids: Vec<CheckId> = CheckId::parse_group(spec)?.into_iter().filter(|id| id.is_geometric() == geometric).collect();
    if ids.is_empty() {
        bail!("--id {spec} selects no {} check", if geometric { "geometric" } else { "functional" });
    }
    Ok(ids)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().context("building worker pool")
}

fn finish(mut r: InequalityReport, seed: u64, tol: Option<f64>) -> InequalityReport {
    r.seed = Some(seed);
    match tol {
        Some(t) => r.with_tol(t),
        None => r,
    }
}

fn print_rows(rows: &[InequalityReport]) {
    for r in rows {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        let equality = if r.rel_margin.abs() <= r.tol { " equality" } else { "" };
        println!(
            "{verdict} {:<16} n={} {} lhs={:.9e} rhs={:.9e} rel_margin={:+.3e} tol={:.0e}{equality}",
            r.id, r.n, r.subject, r.lhs, r.rhs, r.rel_margin, r.tol
        );
    }
}

/// Writes `<stem>.csv` and `<stem>.json` in the output directory.
fn write_rows(out: &Path, stem: &str, rows: &[InequalityReport]) -> Result<PathBuf> {
    ensure_dir(out)?;
    let csv_path = out.join(format!("{stem}.csv"));
    write_reports_csv(BufWriter::new(File::create(&csv_path)?), rows)?;
    write_reports_json(BufWriter::new(File::create(out.join(format!("{stem}.json")))?), rows)?;
    Ok(csv_path)
}

fn verify_geometric(cfg: &RunConfig) -> Result<bool> {
    let ids = select_ids(cfg, true)?;
    let body_spec = cfg.body.as_deref().ok_or_else(|| anyhow!("--body is required"))?;
    let phi = cfg.endo.as_deref().map(|e| MinkowskiEndo::from_spec(e, cfg.dim)).transpose()?;
    let quad = Arc::new(build_quadrature(cfg.dim, cfg.grid.unwrap_or(GEOMETRIC_RESOLUTION))?);
    let seeds = if specs::body_is_random(body_spec) { cfg.seeds.clone() } else { cfg.seeds[..1].to_vec() };
    // One task per body; ids of a body share its cached volume and mean width.
    let batches: Vec<Result<Vec<InequalityReport>>> = pool(cfg.jobs)?.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let body = specs::parse_body(body_spec, cfg.dim, seed)?;
                let subject = GeometricSubject::new(body, quad.clone())?;
                ids.iter()
                    .map(|&id| Ok(finish(check_geometric_subject(id, &subject, phi.as_ref())?, seed, cfg.tol)))
                    .collect()
            })
            .collect()
    });
    let rows: Vec<InequalityReport> = batches.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    print_rows(&rows);
    let path = write_rows(&cfg.out, "verify-geometric", &rows)?;
    eprintln!("wrote {}", path.display());
    Ok(rows.iter().all(|r| r.pass))
}

fn verify_functional(cfg: &RunConfig) -> Result<bool> {
    let ids = select_ids(cfg, false)?;
    let f_spec = cfg.f.as_deref().ok_or_else(|| anyhow!("--f is required"))?;
    let mu = cfg.mu.as_deref().map(|m| AsplundEndo::from_spec(m, cfg.dim)).transpose()?;
    let opts = FunctionalOptions { strict: cfg.strict, ..FunctionalOptions::default() };
    let seeds = if specs::function_is_random(f_spec) { cfg.seeds.clone() } else { cfg.seeds[..1].to_vec() };
    let batches: Vec<Result<Vec<InequalityReport>>> = pool(cfg.jobs)?.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let f = specs::parse_function(f_spec, cfg.dim, seed, cfg.grid)?;
                ids.iter().map(|&id| Ok(finish(check_functional(id, &f, mu.as_ref(), opts)?, seed, cfg.tol))).collect()
            })
            .collect()
    });
    let rows: Vec<InequalityReport> = batches.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    print_rows(&rows);
    let path = write_rows(&cfg.out, "verify-functional", &rows)?;
    eprintln!("wrote {}", path.display());
    Ok(rows.iter().all(|r| r.pass))
}

fn counterexample(cfg: &RunConfig) -> Result<bool> {
    if cfg.cs.is_empty() {
        bail!("--c is required (comma-separated)");
    }
    let rows = divergence_sweep(cfg.dim, &cfg.cs)?;
    ensure_dir(&cfg.out)?;
    let stem = format!("counterexample-n{}", cfg.dim);
    let csv_path = cfg.out.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    write_counterexample_dat(&cfg.out.join(format!("{stem}.dat")), &rows)?;
    println!("n,c,closed_form,pipeline,ratio");
    for r in &rows {
        println!("{},{},{:.12e},{:.12e},{:.9}", r.n, r.c, r.closed_form, r.pipeline, r.ratio);
    }
    eprintln!("wrote {}", csv_path.display());
    Ok(true)
}

fn write_counterexample_dat(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# c closed_form pipeline ratio")?;
    for r in rows {
        writeln!(w, "{} {:.12e} {:.12e} {:.12e}", r.c, r.closed_form, r.pipeline, r.ratio)?;
    }
    Ok(w.flush()?)
}

fn sweep(family: Family, values: &[f64], cfg: &RunConfig) -> Result<bool> {
    let ids = select_ids(cfg, family == Family::Ellipsoid)?;
    let [id] = ids.as_slice() else { bail!("sweep runs a single check id, got {}", ids.len()) };
    let (scan_family, stem, phi, mu) = match family {
        Family::Ellipsoid => {
            let quad = Arc::new(build_quadrature(cfg.dim, cfg.grid.unwrap_or(GEOMETRIC_RESOLUTION))?);
            let phi = cfg.endo.as_deref().map(|e| MinkowskiEndo::from_spec(e, cfg.dim)).transpose()?;
            (ScanFamily::Ellipsoids { n: cfg.dim, quad }, "sweep-ellipsoid", phi, None)
        }
        Family::Skew => {
            let mu = cfg.mu.as_deref().map(|m| AsplundEndo::from_spec(m, cfg.dim)).transpose()?;
            (ScanFamily::GaussianSkew { n: cfg.dim }, "sweep-skew", None, mu)
        }
    };
    let scan = equality_margin_scan(*id, &scan_family, values, phi.as_ref(), mu.as_ref())?;
    let rows: Vec<InequalityReport> = scan.rows.into_iter().map(|r| finish(r, cfg.seeds[0], cfg.tol)).collect();
    print_rows(&rows);
    println!("extremal parameter {} ; margin monotone in distance: {}", scan.extremal, scan.monotone);
    let path = write_rows(&cfg.out, stem, &rows)?;
    let mut dat = BufWriter::new(File::create(cfg.out.join(format!("{stem}.dat")))?);
    writeln!(dat, "# param rel_margin margin pass")?;
    for (p, r) in values.iter().zip(&rows) {
        writeln!(dat, "{p} {:.12e} {:.12e} {}", r.rel_margin, r.margin, u8::from(r.pass))?;
    }
    dat.flush()?;
    eprintln!("wrote {}", path.display());
    Ok(rows.iter().all(|r| r.pass))
}
