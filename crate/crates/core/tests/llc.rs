use peelfrag::kernel::{llc_kernel, OddSplit};
use peelfrag::layers::{explore, ExploreConfig};
use peelfrag::llc::*;
use peelfrag::rng::{root_key, stream};
use peelfrag::weights::WeightTable;
use proptest::prelude::*;

#[test]
fn one_step_frequencies_at_three() {
    let mut w = WeightTable::new(64).unwrap();
    let row = llc_kernel(&w, 3, OddSplit::Literal).unwrap();
    let n = 200_000;
    let mut counts = std::collections::BTreeMap::new();
    let mut rng = stream(root_key(3, 0));
    for _ in 0..n {
        let path = simulate_llc(&mut w, 3, OddSplit::Literal, 1, &mut rng).unwrap();
        *counts.entry(path.values[1]).or_insert(0u64) += 1;
    }
    for &(y, m) in &row.entries {
        let c = counts.get(&y).copied().unwrap_or(0) as f64;
        let sd = (n as f64 * m * (1.0 - m)).sqrt();
        assert!((c - n as f64 * m).abs() <= 4.0 * sd, "y = {y}: {c}");
    }
    assert_eq!(counts.keys().copied().collect::<Vec<_>>(), vec![1, 3, 4]);
}

#[test]
fn chain_is_absorbed_within_the_cap() {
    let mut w = WeightTable::new(400).unwrap();
    let mut rng = stream(root_key(4, 0));
    for _ in 0..200 {
        let path = simulate_llc(&mut w, 100, OddSplit::Literal, default_step_cap(100), &mut rng).unwrap();
        assert!(path.absorbed);
        let n = path.absorption_step().unwrap();
        assert_eq!(path.at(n), Some(0));
        assert_eq!(path.at(n + 5), Some(0));
        assert!(path.values[..n].iter().all(|&v| v > 0));
    }
}

#[test]
fn capped_path_is_open() {
    let mut w = WeightTable::new(400).unwrap();
    let mut rng = stream(root_key(4, 1));
    let path = simulate_llc(&mut w, 100, OddSplit::Literal, 3, &mut rng).unwrap();
    assert_eq!(path.values.len(), 4);
    assert!(!path.absorbed);
    assert_eq!(path.at(4), None);
    assert_eq!(path.absorption_step(), None);
}

#[test]
fn zero_perimeter_is_rejected() {
    let mut w = WeightTable::new(16).unwrap();
    let mut rng = stream(1);
    assert!(simulate_llc(&mut w, 0, OddSplit::Literal, 10, &mut rng).is_err());
    assert!(simulate_llc_engine(&mut w, 0, 1, 0, 10).is_err());
}

#[test]
fn engine_heights_move_by_at_most_one() {
    let mut w = WeightTable::new(1000).unwrap();
    for s in 0..100 {
        let path = simulate_llc_engine(&mut w, 200, 7, s, default_step_cap(200)).unwrap();
        assert_eq!(path.values.len(), path.heights.len());
        assert_eq!(path.heights[0], 0);
        assert!(path.heights.windows(2).all(|h| h[1] == h[0] || h[1] == h[0] + 1));
        let l = llc_at_heights(&path, 50);
        assert_eq!(l[0], Some(200));
        if path.absorbed {
            assert_eq!(absorption_height(&path), path.heights.last().copied());
            assert_eq!(*l.last().unwrap(), Some(0));
        }
    }
}

#[test]
fn engine_path_is_the_root_twig() {
    let mut w = WeightTable::new(1000).unwrap();
    for s in 0..30 {
        let path = simulate_llc_engine(&mut w, 80, 12, s, default_step_cap(80)).unwrap();
        let mut cfg = ExploreConfig::new(80, 12);
        cfg.sample = s;
        cfg.limits.max_height = None;
        let trace = explore(&cfg).unwrap();
        let r_max = trace.snapshots.len() as u32 + 2;
        for (r, l) in llc_at_heights(&path, r_max).into_iter().enumerate() {
            match l {
                Some(0) | None => {}
                Some(v) => assert!(trace.at_height(r).contains(&v), "sample {s}, height {r}, L = {v}"),
            }
        }
    }
}

#[test]
fn supermartingale_sweep_is_non_positive() {
    let w = WeightTable::new(10_001).unwrap();
    for rule in [OddSplit::Literal, OddSplit::Larger] {
        let (p, worst) = supermartingale_sweep(&w, 10_000, rule).unwrap();
        assert!(worst <= 1e-12, "{rule:?}: {worst} at p = {p}");
    }
    let row = llc_kernel(&w, 2, OddSplit::Literal).unwrap();
    assert!(row.mass(0) > 0.0);
}

proptest! {
    #[test]
    fn values_never_drop_below_half(p0 in 1usize..300, seed in any::<u64>(), larger in any::<bool>()) {
        let rule = if larger { OddSplit::Larger } else { OddSplit::Literal };
        let mut w = WeightTable::new(1200).unwrap();
        let mut rng = stream(seed);
        let path = simulate_llc(&mut w, p0, rule, 5000, &mut rng).unwrap();
        for v in path.values.windows(2) {
            if v[1] == 0 {
                // V at 2, or the literal middle split of the 1-gon
                prop_assert!(v[0] == 2 || (v[0] == 1 && rule == OddSplit::Literal));
            } else if rule == OddSplit::Larger {
                prop_assert!(2 * v[1] >= v[0]);
            } else {
                prop_assert!(2 * v[1] + 1 >= v[0]);
            }
            prop_assert!(v[1] <= v[0] + 1);
        }
    }
}
