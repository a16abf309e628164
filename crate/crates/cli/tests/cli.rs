use std::path::Path;
use std::process::{Command, Output};

use blaschke::inequalities::read_reports_csv;

fn blaschke(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blaschke"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<blaschke::InequalityReport> {
    read_reports_csv(std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn ball_is_extremal_for_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let o = blaschke(&["verify", "geometric", "--id", "thm1", "--endo", "sigma", "--body", "ball", "--dim", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&dir.path().join("verify-geometric.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].seed, Some(0));
    assert!(r[0].rel_margin.abs() < 1e-3, "{:?}", r[0]);
    assert!(dir.path().join("verify-geometric.json").exists());
}

#[test]
fn gaussian_is_flagged_as_equality() {
    let dir = tempfile::tempdir().unwrap();
    let o = blaschke(&["verify", "functional", "--id", "thm4", "--mu", "nu", "--f", "gaussian", "--dim", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS") && stdout(&o).contains("equality"), "{}", stdout(&o));
}

#[test]
fn random_polytope_chain_passes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "geometric", "--id", "thm2", "--endo", "delta", "--body", "random-polytope", "--seed", "7", "--dim", "3"];
    let o = blaschke(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&dir.path().join("verify-geometric.csv"));
    assert_eq!(r.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["THM2_LEFT", "THM2_RIGHT"]);
    assert!(r.iter().all(|r| r.seed == Some(7) && r.subject.contains("seed=7")));
}

#[test]
fn seed_ranges_run_in_parallel_and_stay_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "geometric", "--id", "thm1", "--endo", "sigma", "--body", "random-polytope:k=8", "--seed", "0..4", "--grid", "24", "--jobs", "3"];
    let o = blaschke(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let seeds: Vec<_> = rows(&dir.path().join("verify-geometric.csv")).iter().map(|r| r.seed.unwrap()).collect();
    assert_eq!(seeds, [0, 1, 2, 3]);
}

/// CSV text with the timing column blanked.
fn without_millis(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
}

#[test]
fn identical_runs_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["verify", "geometric", "--id", "geometric", "--endo", "sigma", "--body", "random-polytope:k=10", "--seed", "3,5", "--grid", "24"];
    for d in [&a, &b] {
        assert_eq!(blaschke(&args, d.path()).status.code(), Some(0));
    }
    let (x, y) = (without_millis(&a.path().join("verify-geometric.csv")), without_millis(&b.path().join("verify-geometric.csv")));
    assert_eq!(x.len(), 1 + 2 * 7);
    assert_eq!(x, y);
}

#[test]
fn counterexample_products_increase() {
    let dir = tempfile::tempdir().unwrap();
    let o = blaschke(&["counterexample", "--dim", "2", "--c", "1,0.5,0.1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut reader = csv::Reader::from_path(dir.path().join("counterexample-n2.csv")).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), ["n", "c", "closed_form", "pipeline", "ratio"]);
    let products: Vec<f64> = reader.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
    assert_eq!(products.len(), 3);
    assert!(products.windows(2).all(|w| w[1] > w[0]), "{products:?}");
    let dat = std::fs::read_to_string(dir.path().join("counterexample-n2.dat")).unwrap();
    assert_eq!(dat.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn counterexample_pipeline_matches_closed_form_in_3d() {
    let dir = tempfile::tempdir().unwrap();
    let o = blaschke(&["counterexample", "--dim", "3", "--c", "0.5"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut reader = csv::Reader::from_path(dir.path().join("counterexample-n3.csv")).unwrap();
    let ratio: f64 = reader.records().next().unwrap().unwrap()[4].parse().unwrap();
    assert!((ratio - 1.0).abs() <= 1e-3, "ratio {ratio}");
}

#[test]
fn counterexample_refuses_tiny_c() {
    let dir = tempfile::tempdir().unwrap();
    let o = blaschke(&["counterexample", "--dim", "2", "--c", "0.0001"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ill-conditioned"), "{}", stderr(&o));
}

#[test]
fn report_merges_runs() {
    let runs = tempfile::tempdir().unwrap();
    for (i, endo) in ["sigma", "delta", "pi1"].iter().enumerate() {
        let sub = runs.path().join(format!("run{i}"));
        let o = blaschke(&["verify", "geometric", "--id", "thm1", "--endo", endo, "--body", "cube", "--grid", "24"], &sub);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::rename(sub.join("verify-geometric.csv"), runs.path().join(format!("run{i}.csv"))).unwrap();
    }
    let out = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_blaschke")).arg("report").arg(runs.path()).arg("--out").arg(out.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.path().join("summary.json")).unwrap()).unwrap();
    let sources = summary["sources"].as_array().unwrap();
    assert_eq!(sources.len(), 3);
    assert!(sources.iter().all(|s| s["sha256"].as_str().unwrap().len() == 64));
    let checks = summary["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["id"], "THM1");
    assert_eq!(checks[0]["total"], 3);
    assert!(checks[0]["worst_rel_margin"].as_f64().unwrap() > 0.0);
    assert!(out.path().join("summary.csv").exists() && out.path().join("summary.dat").exists());
}

#[test]
fn report_exit_codes() {
    let empty = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_blaschke")).arg("report").arg(empty.path()).arg("--out").arg(empty.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("failing.csv");
    std::fs::write(
        &path,
        "id,n,subject,params,lhs,rhs,margin,rel_margin,tol,pass,grid,seed,millis\nBS,3,k,,2.0,1.0,-1.0,-1.0,0.001,false,,1,0\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_blaschke")).arg("report").arg(&path).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# ball check\nid=thm1\nendo=delta\nbody=ball\ndim=2\ngrid=24\n").unwrap();
    let o = blaschke(&["verify", "geometric", "--config", cfg.to_str().unwrap(), "--endo", "sigma"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&dir.path().join("verify-geometric.csv"));
    assert_eq!(r[0].n, 2);
    assert!(r[0].params.contains("sigma"), "{:?}", r[0]);

    std::fs::write(&cfg, "colour=blue\n").unwrap();
    let o = blaschke(&["verify", "geometric", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify", "geometric", "--id", "nonsense", "--body", "ball"][..],
        &["verify", "geometric", "--id", "thm1", "--endo", "sigma", "--body", "ball", "--tol", "-1"],
        &["verify", "geometric", "--id", "thm4", "--body", "ball"],
        &["verify", "functional", "--id", "thm4", "--f", "gaussian"],
        &["verify", "geometric", "--id", "thm2", "--endo", "J", "--body", "ball"],
        &["frobnicate"],
    ] {
        let o = blaschke(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_blaschke"))
        .args(["counterexample", "--dim", "2", "--c", "0.5"])
        .env("OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("counterexample-n2.csv").exists());
}

#[test]
fn ellipsoid_sweep_separates_delta_from_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let o = blaschke(&["sweep", "--family", "ellipsoid", "--values", "1,2,5", "--id", "thm1", "--endo", "delta", "--grid", "32"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let delta = rows(&dir.path().join("sweep-ellipsoid.csv"));
    assert!(delta.iter().all(|r| r.rel_margin.abs() < 1e-3));
    let o = blaschke(&["sweep", "--family", "ellipsoid", "--values", "1,2,5", "--id", "thm1", "--endo", "sigma", "--grid", "32"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let sigma = rows(&dir.path().join("sweep-ellipsoid.csv"));
    assert!(sigma[0].rel_margin.abs() < 1e-3 && sigma[1].rel_margin > 1e-2);
    let dat = std::fs::read_to_string(dir.path().join("sweep-ellipsoid.dat")).unwrap();
    assert_eq!(dat.lines().count(), 4);
}
