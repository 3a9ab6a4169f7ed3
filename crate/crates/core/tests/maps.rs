use approx::assert_relative_eq;
use proptest::prelude::*;

use halfplane::enumeration::{phi_closed, PhiTable};
use halfplane::law::{p_i, p_ik, total_mass_partial, PeelLaw};
use halfplane::map::document::MapDocument;
use halfplane::map::eventlog::{canonically_equal, from_event_log};
use halfplane::map::validate_halfplane;
use halfplane::sampler::{
    build_ball, check_hull, core, expand_nonsimple, peel_steps, BallConfig, NonSimpleParams, Schedule,
};

fn law(a: &str) -> PeelLaw {
    a.parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn peeled_maps_survive_every_round_trip(seed in 0u64..1_000_000, steps in 1u64..60) {
        let (map, log) = peel_steps(&law("4/5"), steps, seed, Schedule::leftmost()).unwrap();
        prop_assert!(validate_halfplane(&map).is_ok());

        let doc = MapDocument::from_halfplane(&map, Some(log.clone()));
        let back = MapDocument::from_json(&doc.to_json()).unwrap().to_halfplane().unwrap();
        prop_assert_eq!(&back, &map);

        let replayed = from_event_log(&log).unwrap();
        prop_assert!(canonically_equal(&replayed, &map).unwrap());
    }

    #[test]
    fn core_undoes_expansion(seed in 0u64..1_000_000, q in 0.0f64..0.8) {
        let (map, _) = peel_steps(&law("2/3"), 25, seed, Schedule::leftmost()).unwrap();
        let (wide, _) = expand_nonsimple(&map, &NonSimpleParams::new(q, Some(2.0 / 3.0)), seed ^ 1).unwrap();
        prop_assert_eq!(core(&wide).unwrap(), map);
    }

    #[test]
    fn distances_are_one_lipschitz(seed in 0u64..1_000_000, steps in 1u64..80) {
        let (map, _) = peel_steps(&law("4/5"), steps, seed, Schedule::leftmost()).unwrap();
        let s = map.store();
        let d = map.bfs_distance(map.root_vertex());
        for h in 0..s.half_edge_count() as u32 {
            let (a, b) = (d.get(s.origin(h)), d.get(s.dest(h)));
            prop_assert!(a != u64::MAX && b != u64::MAX);
            prop_assert!(a.abs_diff(b) <= s.run(h));
        }
    }
}

#[test]
fn balls_are_hulls() {
    for (a, r) in [("1/3", 2), ("2/3", 3), ("4/5", 2)] {
        for seed in 0..10 {
            let b = build_ball(&law(a), r, seed, &BallConfig::default()).unwrap();
            assert!(b.anomaly.is_none(), "{a} seed {seed}");
            check_hull(&b.map, r).unwrap();
            assert!(validate_halfplane(&b.map).is_ok());
        }
    }
}

#[test]
fn one_sided_masses_split_by_enclosed_size() {
    let l = law("4/5");
    for i in 1..8 {
        let one_side: f64 = (0..400).map(|k| p_ik(&l, i, k)).sum();
        assert_relative_eq!(2.0 * one_side, p_i(&l, i), max_relative = 1e-9);
    }
    assert_relative_eq!(total_mass_partial(&law("0.9"), 200), 1.0, epsilon = 1e-12);
}

#[test]
fn closed_counts_agree_with_table_beyond_the_acceptance_range() {
    let table = PhiTable::build(20, 16).unwrap();
    for m in 2..=16 {
        for n in 0..=20 {
            assert_eq!(phi_closed(n, m).unwrap(), table.get(n, m).unwrap(), "({n},{m})");
        }
    }
}
