use std::collections::BTreeMap;

use proptest::prelude::*;
use qsmodels_core::arena::WaypointId;
use qsmodels_core::opponent::OpponentModel;

fn w(i: u32) -> WaypointId {
    WaypointId::new(format!("w{i}")).unwrap()
}

#[test]
fn scripted_sightings_give_the_hand_computed_argmax() {
    let script = [
        (0, 0),
        (1, 5),
        (2, 10),
        (1, 15),
        (0, 20),
        (1, 25),
        (2, 30),
        (3, 35),
        (2, 40),
        (1, 45),
        (3, 200),
        (3, 205),
    ];
    let mut m = OpponentModel::new(30);
    for (wp, tick) in script {
        m.observe(&w(wp), tick);
    }
    // Counted moves: w0>w1 x2, w1>w2 x2, w1>w0, w2>w1 x2, w2>w3, w3>w2.
    // The jump to w3 at 200 is stale and the repeat at 205 is no move.
    let want: BTreeMap<(WaypointId, WaypointId), u64> = [
        ((0, 1), 2),
        ((1, 2), 2),
        ((1, 0), 1),
        ((2, 1), 2),
        ((2, 3), 1),
        ((3, 2), 1),
    ]
    .into_iter()
    .map(|((a, b), n)| ((w(a), w(b)), n))
    .collect();
    assert_eq!(m.counts(), &want);
    let expected = [(0, 1), (1, 2), (2, 1), (3, 2), (4, 4)];
    for (from, to) in expected {
        assert_eq!(m.predict_next(&w(from)), w(to), "from w{from}");
    }
    assert_eq!(m.last_seen(), Some(&(w(3), 205)));
}

#[test]
fn ties_go_to_the_smallest_id() {
    let m = OpponentModel::from_counts([((w(5), w(7)), 1), ((w(5), w(6)), 1), ((w(5), w(8)), 0)]);
    assert_eq!(m.predict_next(&w(5)), w(6));
}

/// Reference counting: consecutive distinct sightings at most `window`
/// ticks apart.
fn reference(sightings: &[(u32, u64)], window: u64) -> BTreeMap<(WaypointId, WaypointId), u64> {
    let mut out = BTreeMap::new();
    for pair in sightings.windows(2) {
        let ((a, ta), (b, tb)) = (pair[0], pair[1]);
        if a != b && tb - ta <= window {
            *out.entry((w(a), w(b))).or_insert(0) += 1;
        }
    }
    out
}

proptest! {
    #[test]
    fn scaling_counts_keeps_predictions(counts in prop::collection::btree_map((0u32..6, 0u32..6), 0u64..20, 0..20), k in 1u64..50) {
        let base = OpponentModel::from_counts(counts.iter().map(|(&(a, b), &n)| ((w(a), w(b)), n)));
        let scaled = OpponentModel::from_counts(counts.iter().map(|(&(a, b), &n)| ((w(a), w(b)), n * k)));
        for src in 0..6 {
            prop_assert_eq!(base.predict_next(&w(src)), scaled.predict_next(&w(src)));
        }
    }

    #[test]
    fn counts_follow_the_reference(steps in prop::collection::vec((0u32..5, 1u64..50), 1..40), window in 1u64..40) {
        let mut tick = 0;
        let sightings: Vec<(u32, u64)> = steps.iter().map(|&(wp, dt)| { tick += dt; (wp, tick) }).collect();
        let mut m = OpponentModel::new(window);
        for &(wp, t) in &sightings {
            m.observe(&w(wp), t);
        }
        prop_assert_eq!(m.counts(), &reference(&sightings, window));
        let last = *sightings.last().unwrap();
        prop_assert_eq!(m.last_seen(), Some(&(w(last.0), last.1)));
        let frozen = {
            let mut f = OpponentModel::new(window).without_learning();
            for &(wp, t) in &sightings {
                f.observe(&w(wp), t);
            }
            f
        };
        prop_assert!(frozen.counts().is_empty());
    }
}
