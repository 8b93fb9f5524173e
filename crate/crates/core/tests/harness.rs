use std::collections::HashSet;

use peelfrag::harness::config::{config_hash, ExperimentConfig, FORMAT_VERSION};
use peelfrag::harness::export::{num, write_csv, write_csv_to, write_json, Provenance, Table};
use peelfrag::harness::report::{Check, ComparisonReport};
use peelfrag::harness::stats::*;
use peelfrag::harness::validate::{validate_with, ValidateConfig};
use peelfrag::rng::{child_key, root_key, stream, tagged_key};
use peelfrag::weights::WeightTable;
use proptest::prelude::*;
use rand::RngCore;

#[test]
fn config_parses_lists_and_comments() {
    let text = "experiment = theorem1\n# comment\np = 100, 200\ngrid = 0.5,1\nsamples = 50 # trailing\nseed = 9\n";
    let c = ExperimentConfig::parse(text).unwrap();
    assert_eq!(c.experiment, "theorem1");
    assert_eq!(c.p, vec![100, 200]);
    assert_eq!(c.grid, vec![0.5, 1.0]);
    assert_eq!(c.samples, 50);
    assert_eq!(c.continuum_samples, 50);
    assert_eq!(c.seed, 9);
    let c = ExperimentConfig::parse("samples = 50\ncontinuum_samples = 7").unwrap();
    assert_eq!(c.continuum_samples, 7);
}

#[test]
fn config_rejects_bad_input() {
    assert!(ExperimentConfig::parse("p = 1\np = 2").is_err());
    assert!(ExperimentConfig::parse("colour = red").is_err());
    assert!(ExperimentConfig::parse("samples = many").is_err());
    assert!(ExperimentConfig::parse("just text").is_err());
    assert!(ExperimentConfig::parse(&format!("format_version = {}", FORMAT_VERSION + 1)).is_err());
    assert!(ExperimentConfig::parse(&format!("format_version = {FORMAT_VERSION}")).is_ok());
}

#[test]
fn canonical_text_round_trips() {
    let mut c = ExperimentConfig::new("height");
    c.p = vec![400];
    c.floor = 1.0 / 400.0;
    c.delta = 1e-4;
    c.out = Some("somewhere".into());
    let back = ExperimentConfig::parse(&c.canonical()).unwrap();
    assert_eq!(back.canonical(), c.canonical());
    assert_eq!(back.hash(), c.hash());
    assert_eq!(back.floor, c.floor);
    // the output directory does not change the hash
    let mut d = c.clone();
    d.out = None;
    assert_eq!(d.hash(), c.hash());
    d.seed += 1;
    assert_ne!(d.hash(), c.hash());
}

#[test]
fn hash_is_stable() {
    assert_eq!(config_hash(""), "e3b0c44298fc1c14");
    assert_eq!(config_hash("abc"), "ba7816bf8f01cfea");
    assert_eq!(ExperimentConfig::new("x").hash().len(), 16);
}

// Brute force sup |F_a - F_b| over every sample point.
fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter().chain(b).map(|&x| (cdf(a, x) - cdf(b, x)).abs()).fold(0.0, f64::max)
}

#[test]
fn ks_known_values() {
    assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 1.0);
    assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), 0.0);
    assert_eq!(ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0, 5.0, 6.0]), 0.5);
    assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
    assert!((kolmogorov_q(KS_C_1PCT) - 0.01).abs() < 5e-4);
    assert_eq!(kolmogorov_q(0.0), 1.0);
    let r = ks_two_sample(&[], &[1.0]);
    assert!(!r.pass && r.d.is_nan());
    let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
    let r = ks_two_sample(&a, &a);
    assert!(r.pass && r.p_value > 0.99);
    assert!((r.critical - KS_C_1PCT * (200.0f64 / 10_000.0).sqrt()).abs() < 1e-12);
}

#[test]
fn ks_detects_a_shift() {
    let mut rng = stream(root_key(1, 0));
    let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let a: Vec<f64> = (0..2000).map(|_| u()).collect();
    let b: Vec<f64> = (0..2000).map(|_| u() + 0.1).collect();
    let c: Vec<f64> = (0..2000).map(|_| u()).collect();
    assert!(!ks_two_sample(&a, &b).pass);
    assert!(ks_two_sample(&a, &c).pass);
}

#[test]
fn medians_and_means() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    assert!(median(&[]).is_nan());
    assert!(median_se(&[1.0; 5]).is_nan());
    let m = MeanSe::of(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m.mean, 2.5);
    assert!((m.se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    assert!((m.z(2.0) - 0.5 / m.se).abs() < 1e-15);
    // median of a uniform sample has se about 1 / (2 √n)
    let mut rng = stream(root_key(2, 0));
    let xs: Vec<f64> = (0..10_000).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).collect();
    let se = median_se(&xs);
    assert!((se - 0.005).abs() < 0.001, "{se}");
}

#[test]
fn checks_and_reports() {
    let ok = Check::at_most("a", 1.0, 1.0, "");
    let bad = Check::mean("b", &MeanSe { mean: 1.0, se: 0.1, n: 10 }, 0.0, 3.0);
    assert!(ok.pass && !bad.pass);
    assert!(bad.line().starts_with("FAIL b"));
    let mut rep = ComparisonReport::new("x", Provenance::new(1, "h"));
    assert!(!rep.pass());
    rep.checks.push(ok);
    assert!(rep.pass());
    rep.checks.push(bad);
    assert!(!rep.pass());
    assert_eq!(rep.failures().len(), 1);
    assert!(rep.summary().starts_with("x [FAIL]"));
}

#[test]
fn csv_has_a_provenance_header() {
    let prov = Provenance::new(42, "0123456789abcdef");
    let mut t = Table::new(&["p", "value"]);
    t.push([num(1.0), num(0.1)]);
    t.push(["2".to_string(), "a,b".to_string()]);
    let mut buf = Vec::new();
    write_csv_to(&mut buf, &prov, &t).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# peelfrag "));
    assert!(lines[0].contains(&format!("format={FORMAT_VERSION}")));
    assert!(lines[0].contains("seed=42"));
    assert!(lines[0].ends_with("config=0123456789abcdef"));
    assert_eq!(&lines[1..], &["p,value", "1.0,0.1", "2,\"a,b\""]);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_csv(&path, &prov, &t).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    let jpath = dir.path().join("r.json");
    write_json(&jpath, &ComparisonReport::new("x", prov)).unwrap();
    assert!(std::fs::read_to_string(&jpath).unwrap().contains("\"experiment\": \"x\""));
}

#[test]
fn numbers_round_trip() {
    for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5] {
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }
}

#[test]
fn perturbed_table_fails_validation() {
    let cfg = ValidateConfig { p_max: 200, k_max: 200, counts_max: 10 };
    let w = WeightTable::new(202).unwrap();
    let rep = validate_with(&w, &cfg).unwrap();
    let rec = rep.checks.iter().find(|c| c.name == "Z recurrence").unwrap();
    assert!(rec.pass);
    let mut bad = w.clone();
    bad.perturb(7, 1e-6);
    let rep = validate_with(&bad, &cfg).unwrap();
    let rec = rep.checks.iter().find(|c| c.name == "Z recurrence").unwrap();
    assert!(!rec.pass);
    assert!(!rep.pass());
}

#[test]
fn rng_streams_are_distinct_and_repeatable() {
    let mut keys = HashSet::new();
    for s in 0..1000 {
        let k = root_key(7, s);
        assert!(keys.insert(k));
        for i in 1..5 {
            assert!(keys.insert(child_key(k, i)));
        }
    }
    assert!(keys.insert(tagged_key(root_key(7, 0), "a")));
    assert!(keys.insert(tagged_key(root_key(7, 0), "b")));
    assert_eq!(root_key(7, 3), root_key(7, 3));
    assert_ne!(root_key(7, 3), root_key(8, 3));
    let a: Vec<u64> = (0..4).map({
        let mut r = stream(5);
        move |_| r.next_u64()
    }).collect();
    let b: Vec<u64> = (0..4).map({
        let mut r = stream(5);
        move |_| r.next_u64()
    }).collect();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn ks_statistic_matches_brute_force(
        a in prop::collection::vec(0u8..20, 1..40),
        b in prop::collection::vec(0u8..20, 1..40),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        prop_assert!((ks_statistic(&a, &b) - ks_oracle(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn config_set_then_canonical_parses(samples in 1usize..1_000_000, seed in any::<u64>(), floor in 1e-6f64..1.0) {
        let mut c = ExperimentConfig::new("theorem2");
        c.samples = samples;
        c.seed = seed;
        c.floor = floor;
        let back = ExperimentConfig::parse(&c.canonical()).unwrap();
        prop_assert_eq!(back, c);
    }
}
