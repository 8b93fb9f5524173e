//! The ten acceptance criteria at their pinned sizes and tolerances.
//!
//! Each criterion prints one `PASS` or `FAIL` line to stdout, uncaptured, and
//! asserts its verdict. Outputs land in the test target's scratch directory.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use peelfrag::harness::config::ExperimentConfig;
use peelfrag::harness::experiments::{self, preset, with_threads, Outcome};
use peelfrag::harness::report::{Check, ComparisonReport};
use peelfrag::harness::validate::{validate, ValidateConfig};

/// Fixed before any run.
const SEED: u64 = 20_240_501;

fn out_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}

fn verdict(n: u32, title: &str, checks: &[&Check], rep: &ComparisonReport) -> bool {
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    let mut text = format!(
        "criterion {n:>2} {title}: {} ({}/{} checks, {:.0} s)\n",
        if pass { "PASS" } else { "FAIL" },
        checks.iter().filter(|c| c.pass).count(),
        checks.len(),
        rep.runtime_s
    );
    for c in checks.iter().filter(|c| !c.pass) {
        text.push_str(&format!("    {}\n", c.line()));
    }
    for note in &rep.notes {
        text.push_str(&format!("    note: {note}\n"));
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    lock.write_all(text.as_bytes()).unwrap();
    lock.flush().unwrap();
    pass
}

fn run(name: &str) -> Outcome {
    let mut cfg = preset(name).unwrap();
    cfg.seed = SEED;
    let o = experiments::run(&cfg).unwrap();
    o.write(&out_dir(name)).unwrap();
    o
}

fn all(rep: &ComparisonReport) -> Vec<&Check> {
    rep.checks.iter().collect()
}

#[test]
fn criterion_01_exact_suite() {
    let rep = validate(&ValidateConfig::default()).unwrap();
    assert!(rep.runtime_s < 60.0, "exact suite took {} s", rep.runtime_s);
    let ok = verdict(1, "exact suite", &all(&rep), &rep);
    assert!(ok, "{}", rep.summary());
}

#[test]
fn criterion_02_martingales() {
    let o = run("martingale");
    let ok = verdict(2, "martingale and volume means", &all(&o.report), &o.report);
    assert!(ok, "{}", o.report.summary());
}

#[test]
fn criterion_03_uipt() {
    let o = run("uipt");
    let checks: Vec<&Check> = o.report.checks.iter().filter(|c| !c.name.starts_with("E[f(L~")).collect();
    let ok = verdict(3, "reweighted rows and cycle martingale", &checks, &o.report);
    assert!(ok, "{}", o.report.summary());
}

#[test]
fn criterion_04_llc_scaling() {
    let o = run("llc");
    let ok = verdict(4, "locally largest cycle scaling", &all(&o.report), &o.report);
    assert!(ok, "{}", o.report.summary());
}

#[test]
fn criterion_05_ranked_cycles() {
    let o = run("theorem1");
    let ok = verdict(5, "ranked cycle marginals", &all(&o.report), &o.report);
    assert!(ok, "{}", o.report.summary());
}

fn cutoff_outcome() -> &'static Outcome {
    static CELL: OnceLock<Outcome> = OnceLock::new();
    CELL.get_or_init(|| run("theorem2"))
}

#[test]
fn criterion_06_cutoff_mass() {
    let o = cutoff_outcome();
    let checks: Vec<&Check> = o.report.checks.iter().filter(|c| !c.name.starts_with("P(")).collect();
    let ok = verdict(6, "cutoff lost mass and frozen mass", &checks, &o.report);
    assert!(ok, "{}", o.report.summary());
}

#[test]
fn criterion_07_frozen_heights() {
    let o = cutoff_outcome();
    let checks: Vec<&Check> = o.report.checks.iter().filter(|c| c.name.starts_with("P(")).collect();
    let ok = verdict(7, "frozen-hole heights", &checks, &o.report);
    assert!(ok, "{}", o.report.summary());
}

#[test]
fn criterion_08_height() {
    let o = run("height");
    let ok = verdict(8, "height against extinction", &all(&o.report), &o.report);
    assert!(ok, "{}", o.report.summary());
}

#[test]
fn criterion_09_continuum() {
    let o = run("continuum");
    let ok = verdict(9, "continuum internal checks", &all(&o.report), &o.report);
    assert!(ok, "{}", o.report.summary());
}

fn small(name: &str) -> ExperimentConfig {
    let mut c = preset(name).unwrap();
    c.seed = SEED;
    match name {
        "theorem1" => {
            c.p = vec![64];
            c.samples = 300;
            c.continuum_samples = 300;
            c.floor = 0.05;
        }
        "theorem2" => {
            c.p = vec![200];
            c.samples = 40;
        }
        _ => unreachable!(),
    }
    c
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_10_reproducibility() {
    let tmp = tempfile::tempdir().unwrap();
    let mut checks = Vec::new();
    let mut rep = None;
    for name in ["theorem1", "theorem2"] {
        let cfg = small(name);
        let mut runs = Vec::new();
        for threads in [1, 4] {
            let dir = tmp.path().join(format!("{name}-{threads}"));
            let o = with_threads(Some(threads), || experiments::run(&cfg)).unwrap().unwrap();
            o.write(&dir).unwrap();
            runs.push(csv_bytes(&dir));
            rep.get_or_insert(o.report);
        }
        let same = !runs[0].is_empty() && runs[0] == runs[1];
        checks.push(Check::at_most(
            format!("{name} CSVs byte-identical on 1 and 4 threads"),
            if same { 0.0 } else { 1.0 },
            0.0,
            format!("{} files", runs[0].len()),
        ));
    }
    let mut rep = rep.unwrap();
    rep.notes.clear();
    rep.runtime_s = 0.0;
    let refs: Vec<&Check> = checks.iter().collect();
    let ok = verdict(10, "reproducibility across thread counts", &refs, &rep);
    assert!(ok);
}
