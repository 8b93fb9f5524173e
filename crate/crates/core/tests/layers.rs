use peelfrag::kernel::Event;
use peelfrag::layers::*;
use peelfrag::weights::{cycle_weight, volume_weight};
use proptest::prelude::*;

fn marks(s: &str) -> CycleState {
    CycleState { marks: s.chars().map(|c| c == 'T').collect(), base_height: 0 }
}

// Cycle listed high^(p-low) then low^low; its peel edge ends the high run.
fn arc(p: usize, low: usize) -> CycleState {
    let mut m = vec![true; p - low];
    m.extend(std::iter::repeat_n(false, low));
    CycleState { marks: m, base_height: 3 }
}

fn compact(c: &CycleState) -> (usize, usize, u32) {
    (c.perimeter(), c.low_arc(), c.base_height)
}

// Transition of the (perimeter, low, base) description.
fn compact_child(p: usize, low: usize, base: u32) -> (usize, usize, u32) {
    if low == 0 {
        (p, p, base + 1)
    } else {
        (p, low, base)
    }
}

#[test]
fn peel_edge_examples() {
    assert_eq!(select_peel_edge(&marks("FFF")).unwrap(), 0);
    assert_eq!(select_peel_edge(&marks("TTFF")).unwrap(), 1);
    assert_eq!(select_peel_edge(&marks("FTTF")).unwrap(), 2);
    assert!(select_peel_edge(&marks("TTT")).is_err());
    assert!(select_peel_edge(&marks("")).is_err());
}

#[test]
fn property_p() {
    assert!(marks("FFTT").satisfies_p());
    assert!(marks("TFFT").satisfies_p());
    assert!(!marks("FTFT").satisfies_p());
    assert!(!marks("TTT").satisfies_p());
}

#[test]
fn event_examples() {
    assert_eq!(apply_event(&marks("TF"), 0, Event::V).unwrap(), Outcome::Closed);
    match apply_event(&CycleState::fresh(3, 0), 0, Event::G(0)).unwrap() {
        Outcome::Split(a, b) => {
            assert_eq!(a.perimeter(), 1);
            assert_eq!(b.perimeter(), 3);
            assert_eq!(a.low_arc(), 1);
        }
        o => panic!("{o:?}"),
    }
    let c = marks("TFFFF");
    match apply_event(&c, 0, Event::C).unwrap() {
        Outcome::Grown(g) => {
            assert_eq!(g.perimeter(), 6);
            assert_eq!(g.marks.iter().filter(|m| **m).count(), 2);
            assert!(g.satisfies_p());
        }
        o => panic!("{o:?}"),
    }
}

#[test]
fn invalid_events_are_rejected() {
    assert!(apply_event(&marks("FFF"), 0, Event::V).is_err());
    assert!(apply_event(&marks("FFF"), 0, Event::G(3)).is_err());
    assert!(apply_event(&marks("FFF"), 3, Event::C).is_err());
}

#[test]
fn all_high_child_advances_its_layer() {
    match apply_event(&marks("TTFF"), 1, Event::G(0)).unwrap() {
        Outcome::Split(a, b) => {
            assert_eq!((a.perimeter(), a.base_height), (1, 0));
            assert_eq!(compact(&b), (4, 2, 0));
        }
        o => panic!("{o:?}"),
    }
    match apply_event(&marks("TTFF"), 1, Event::G(2)).unwrap() {
        Outcome::Split(a, b) => {
            assert_eq!(compact(&a), (3, 2, 0));
            assert_eq!(compact(&b), (2, 2, 1));
        }
        o => panic!("{o:?}"),
    }
}

fn run(p0: usize, seed: u64, f: impl FnOnce(&mut ExploreConfig)) -> Trace {
    let mut cfg = ExploreConfig::new(p0, seed);
    f(&mut cfg);
    explore(&cfg).unwrap()
}

#[test]
fn one_gon_has_an_inner_vertex() {
    for s in 0..200 {
        let t = run(1, s, |_| {});
        assert!(t.volume() >= 1, "sample {s}");
        assert!(t.height() >= 1);
        assert!(t.stats.complete && !t.stats.truncated);
    }
}

#[test]
fn exploration_is_deterministic() {
    let a = run(50, 9, |c| c.genealogy = true);
    let b = run(50, 9, |c| c.genealogy = true);
    assert_eq!(a.snapshots, b.snapshots);
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.genealogy.len(), b.genealogy.len());
    let c = run(50, 10, |_| {});
    assert_ne!((a.snapshots, a.stats.steps), (c.snapshots, c.stats.steps));
}

#[test]
fn root_layer_is_the_boundary() {
    let t = run(20, 1, |_| {});
    assert_eq!(t.at_height(0), &[20]);
    let total: u64 = t.volume_by_height.iter().sum();
    assert_eq!(total, t.volume());
    assert_eq!(t.volume_by_height.first().copied().unwrap_or(0), 0);
    assert_eq!(t.snapshots.len() as u32, t.height());
}

#[test]
fn cutoff_bounds() {
    for eps in [0.0, 1.0, 2.0, -0.5] {
        let mut cfg = ExploreConfig::new(10, 1);
        cfg.cutoff = Some(eps);
        assert!(explore(&cfg).is_err(), "cutoff {eps}");
    }
    let mut cfg = ExploreConfig::new(0, 1);
    cfg.cutoff = None;
    assert!(explore(&cfg).is_err());
}

#[test]
fn frozen_holes_are_small_and_lose_mass() {
    let mut lost = 0.0;
    for s in 0..50 {
        let t = run(200, s, |c| {
            c.cutoff = Some(0.1);
            c.limits.frozen = FrozenMode::Continue;
        });
        assert!(t.frozen.iter().all(|f| f.perimeter < 20));
        assert_eq!(t.at_height(0), &[200]);
        for fz in &t.frozen {
            if let Some(h) = fz.max_vertex_height {
                assert!(h > fz.base);
            }
        }
        lost += t.lost_mass();
        assert!(t.lost_mass() <= 1.0);
    }
    assert!(lost > 0.0);
}

#[test]
fn schedules_agree_on_keyed_streams() {
    for s in 0..20 {
        let a = run(60, s, |_| {});
        let b = run(60, s, |c| c.limits.schedule = Schedule::Synchronized);
        assert_eq!(a.snapshots, b.snapshots, "sample {s}");
        assert_eq!(a.volume(), b.volume());
        assert_eq!(a.height(), b.height());
    }
}

#[test]
fn synchronized_martingales_match_the_trace() {
    for s in 0..20 {
        let t = run(30, s, |c| {
            c.limits.schedule = Schedule::Synchronized;
            c.limits.martingales = true;
        });
        let m = &t.stats.martingales;
        assert_eq!(m[0], (cycle_weight(30), volume_weight(30)));
        let rebuilt = martingale_at_layers(&t, m.len() - 1);
        for (r, (a, b)) in m.iter().zip(&rebuilt).enumerate() {
            assert!((a.0 - b.0).abs() < 1e-9 * a.0.max(1.0), "M at {r}");
            assert!((a.1 - b.1).abs() < 1e-9 * a.1.max(1.0), "V at {r}");
        }
        // after extinction M vanishes and V is the volume
        let last = m.last().unwrap();
        assert_eq!(last.0, 0.0);
        assert_eq!(last.1, t.volume() as f64);
    }
}

#[test]
fn height_budget_truncates() {
    let t = run(400, 2, |c| c.limits.max_height = Some(2));
    assert!(t.stats.truncated);
    assert!(t.height() <= 2);
    let t = run(400, 2, |c| c.limits.max_height = Some(0));
    assert!(t.stats.truncated);
    assert_eq!(t.volume(), 0);
}

#[test]
fn step_cap_marks_incomplete() {
    let t = run(400, 2, |c| c.limits.step_cap = 10);
    assert!(!t.stats.complete);
    assert_eq!(t.stats.steps, 10);
}

#[test]
fn ulam_labels() {
    let t = run(40, 3, |c| c.genealogy = true);
    assert_eq!(ulam_label(&t.genealogy, 0), "∅");
    for (id, ind) in t.genealogy.iter().enumerate().skip(1) {
        let label = ulam_label(&t.genealogy, id as u32);
        assert!(label.ends_with(&ind.index.to_string()));
        let parent = ind.parent.unwrap();
        assert!(parent < id as u32);
        if parent == 0 {
            assert!(!label.contains('.'));
        }
    }
}

proptest! {
    #[test]
    fn marks_agree_with_compact_state(p in 1usize..40, low_frac in 0.0f64..1.0, k_frac in 0.0f64..1.0, grow in any::<bool>()) {
        let low = 1 + ((p - 1) as f64 * low_frac) as usize;
        let c = arc(p, low);
        prop_assert!(c.satisfies_p());
        let edge = select_peel_edge(&c).unwrap();
        let base = c.base_height;
        if grow {
            match apply_event(&c, edge, Event::C).unwrap() {
                Outcome::Grown(g) => {
                    prop_assert_eq!(compact(&g), (p + 1, low, base));
                    prop_assert!(g.satisfies_p());
                }
                o => prop_assert!(false, "{:?}", o),
            }
        } else {
            let k = ((p as f64 * k_frac) as usize).min(p - 1);
            match apply_event(&c, edge, Event::G(k)).unwrap() {
                Outcome::Split(a, b) => {
                    prop_assert_eq!(compact(&a), compact_child(k + 1, (k + 1).min(low), base));
                    prop_assert_eq!(compact(&b), compact_child(p - k, low.saturating_sub(k), base));
                    prop_assert!(a.satisfies_p() && b.satisfies_p());
                }
                o => prop_assert!(false, "{:?}", o),
            }
        }
    }

    #[test]
    fn snapshots_are_sorted_and_positive(p in 1usize..80, seed in 0u64..1000) {
        let t = run(p, seed, |_| {});
        for s in &t.snapshots {
            prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(s.iter().all(|&x| x >= 1));
        }
    }
}
