use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_peelfrag"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn header_ok(text: &str) -> bool {
    text.lines().next().is_some_and(|l| l.starts_with("# peelfrag ") && l.contains(" seed=") && l.contains(" config="))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn weights_json_to_stdout() {
    let o = run(&["weights", "--p-max", "5", "--counts", "2", "2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("\"provenance\""));
    assert!(text.contains("\"log_z\""));
    assert!(text.contains("\"time_factor\": 0.846284"));
    assert!(text.contains("\"count\": \"24\""));
    let o = run(&["weights", "--p-max", "5", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(header_ok(&text));
    assert!(text.lines().nth(1).unwrap().starts_with("p,log_z"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn kernel_rows() {
    let o = run(&["kernel", "--p", "3", "--llc"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(header_ok(&text));
    assert_eq!(&text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect::<Vec<_>>(), &["y", "4", "3", "1"]);
    let o = run(&["kernel", "--p", "3", "--llc", "--odd-split", "larger"]);
    assert!(String::from_utf8(o.stdout).unwrap().lines().last().unwrap().starts_with("2,"));
    let o = run(&["kernel", "--p", "2", "--format", "json"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("0.7698"));
    let o = run(&["kernel", "--p", "2"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 6);
}

#[test]
fn table_commands_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: &[(&[&str], &[&str])] = &[
        (&["explore", "--p", "30", "--samples", "4", "--sync", "--cutoff", "0.2"], &["snapshots.csv", "genealogy.csv", "martingales.csv", "summary.csv"]),
        (&["gf", "--floor", "0.1", "--samples", "3", "--horizon", "0.5"], &["masses.csv", "extinction.csv"]),
    ];
    for (i, (args, files)) in cases.iter().enumerate() {
        let out = d.join(format!("case{i}"));
        let mut full = vec!["--seed", "5", "--out", out.to_str().unwrap()];
        full.extend_from_slice(args);
        let o = run(&full);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        for f in *files {
            assert!(header_ok(&read(&out.join(f))), "{args:?} {f}");
        }
    }
    for (args, name) in [
        (vec!["llc", "--p", "50", "--samples", "5", "--heights"], "llc.csv"),
        (vec!["cumulants", "--q-grid", "0.5,2,4"], "cumulants.csv"),
    ] {
        let path = d.join(name);
        let mut full = vec!["--out", path.to_str().unwrap()];
        full.extend(args.iter().copied());
        let o = run(&full);
        assert!(o.status.success(), "{args:?}");
        assert!(header_ok(&read(&path)));
    }
    let text = read(&d.join("cumulants.csv"));
    let row = text.lines().find(|l| l.starts_with("4")).unwrap();
    assert!(row.contains("3.14159"), "{row}");
}

#[test]
fn experiment_writes_report_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("uipt");
    let o = run(&["--seed", "2", "--out", out.to_str().unwrap(), "uipt", "--samples", "2000"]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("uipt ["));
    assert!(read(&out.join("uipt_report.json")).contains("\"checks\""));
    let cfg = read(&out.join("uipt.cfg"));
    assert!(cfg.contains("samples = 2000") && cfg.contains("seed = 2"));
    // the written configuration reproduces the run
    let again = dir.path().join("again");
    let o2 = run(&["--config", out.join("uipt.cfg").to_str().unwrap(), "--out", again.to_str().unwrap(), "uipt"]);
    assert_eq!(o.status.code(), o2.status.code());
    for e in std::fs::read_dir(&out).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "csv") {
            assert_eq!(read(&p), read(&again.join(p.file_name().unwrap())));
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = run(&[
            "--seed", "11", "--threads", threads, "--out", out.to_str().unwrap(),
            "theorem1", "--p", "36", "--samples", "100", "--set", "floor=0.1",
        ]);
        assert!(o.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&o.stderr));
        texts.push((read(&out.join("theorem1_samples.csv")), read(&out.join("theorem1_ks.csv"))));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn exit_codes() {
    // the exact suite carries one failing check
    let o = run(&["validate", "--p-max", "100", "--counts-max", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));

    let o = run(&["--config", "/nonexistent/peelfrag.cfg", "uipt"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "samples = 10\nsamples = 20\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "uipt"]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&cfg, "experiment = height\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "uipt"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["uipt", "--set", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["kernel", "--p", "4", "--odd-split", "middle"]);
    assert_eq!(o.status.code(), Some(2));
}
