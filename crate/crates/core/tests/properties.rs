use std::collections::BTreeSet;

use dynatrack::lifecycle::{classify_events, total_consistency, ConsistencyMode, EventKind};
use dynatrack::oracle::brute_force_track;
use dynatrack::render::{AlluvialLayout, RenderOptions};
use dynatrack::similarity::{fim, FimKind};
use dynatrack::snapshot::RawSnapshot;
use dynatrack::{track, ClusterRef, ClusteringSequence, InputFormat};
use proptest::prelude::*;

/// Per snapshot, the cluster (if any) of each of `members` members.
fn sequences(
    max_snapshots: usize,
    members: usize,
    max_clusters: usize,
) -> impl Strategy<Value = ClusteringSequence> {
    prop::collection::vec(
        prop::collection::vec(prop::option::weighted(0.8, 0..max_clusters), members),
        1..=max_snapshots,
    )
    .prop_map(move |snaps| {
        let raw = snaps
            .into_iter()
            .map(|assign| {
                let mut clusters = vec![Vec::new(); max_clusters];
                for (m, c) in assign.into_iter().enumerate() {
                    if let Some(c) = c {
                        clusters[c].push(format!("id {m}"));
                    }
                }
                clusters.retain(|c: &Vec<String>| !c.is_empty());
                RawSnapshot {
                    label: None,
                    clusters,
                }
            })
            .collect();
        ClusteringSequence::from_raw(raw).unwrap()
    })
}

fn member_sets() -> impl Strategy<Value = (BTreeSet<u8>, BTreeSet<u8>, BTreeSet<u8>)> {
    let s = || prop::collection::btree_set(0u8..16, 0..10);
    (s(), s(), s())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn residents_are_symmetric(seq in sequences(5, 12, 3), i in 0usize..5, j in 0usize..5) {
        let (i, j) = (i % seq.len(), j % seq.len());
        let r = seq.residents(i, j).unwrap();
        prop_assert_eq!(&r, &seq.residents(j, i).unwrap());
        let all: BTreeSet<_> = seq.snapshot(i).unwrap().members().collect();
        prop_assert!(r.is_subset(&all));
        if i == j {
            prop_assert_eq!(r, all);
        }
    }

    #[test]
    fn json_and_csv_round_trip(seq in sequences(5, 12, 4)) {
        let json = ClusteringSequence::parse(seq.to_json().as_bytes(), InputFormat::Json).unwrap();
        prop_assert_eq!(&json, &seq);
        // an empty snapshot has no CSV rows
        if seq.snapshots().iter().all(|s| !s.is_empty()) {
            let csv = ClusteringSequence::parse(seq.to_csv().as_bytes(), InputFormat::Csv).unwrap();
            prop_assert_eq!(csv.to_raw(), seq.to_raw());
        }
    }

    #[test]
    fn fim_is_a_fraction((a, b, r) in member_sets()) {
        for kind in [FimKind::Symmetric, FimKind::Forward, FimKind::Backward] {
            if let Some(v) = fim(&a, &b, &r, kind) {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        prop_assert_eq!(fim(&a, &b, &r, FimKind::Symmetric), fim(&b, &a, &r, FimKind::Symmetric));
        prop_assert_eq!(fim(&a, &b, &r, FimKind::Forward), fim(&b, &a, &r, FimKind::Backward));
    }

    #[test]
    fn tracker_matches_oracle(seq in sequences(6, 14, 4), x in 0usize..5) {
        let (fast, slow) = (track(&seq, x), brute_force_track(&seq, x).unwrap());
        prop_assert_eq!(fast.labels(), slow.labels());
    }

    #[test]
    fn tracking_is_deterministic(seq in sequences(6, 14, 4), x in 0usize..5) {
        let (a, b) = (track(&seq, x), track(&seq, x));
        prop_assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn consistency_is_a_fraction(seq in sequences(6, 14, 4), x in 0usize..5) {
        let dc = track(&seq, x);
        for mode in [ConsistencyMode::AllMembers, ConsistencyMode::ResidentsOnly] {
            if let Some(c) = total_consistency(&dc, &seq, mode) {
                prop_assert!((0.0..=1.0).contains(&c));
            }
        }
    }

    #[test]
    fn every_dc_has_a_beginning(seq in sequences(6, 14, 4), x in 0usize..5) {
        let dc = track(&seq, x);
        let events = classify_events(&dc, &seq);
        for e in &events {
            prop_assert!(e.time < seq.len());
        }
        // snapshot 0 clusters are all births
        let born: BTreeSet<_> = events.iter().filter(|e| e.kind == EventKind::Birth && e.time == 0).map(|e| e.dc).collect();
        let first: BTreeSet<_> = dc.labels()[0].iter().copied().collect();
        prop_assert_eq!(born, first);
    }

    #[test]
    fn flows_account_for_members(seq in sequences(5, 14, 4), x in 0usize..4) {
        let dc = track(&seq, x);
        let layout = AlluvialLayout::new(&seq, &dc, &RenderOptions::default());
        for t in 0..seq.len() {
            let prev: BTreeSet<_> = match t.checked_sub(1) {
                Some(p) => seq.snapshot(p).unwrap().members().collect(),
                None => BTreeSet::new(),
            };
            let next: BTreeSet<_> = match seq.snapshot(t + 1) {
                Some(s) => s.members().collect(),
                None => BTreeSet::new(),
            };
            for (c, members) in seq.snapshot(t).unwrap().clusters().iter().enumerate() {
                let g = ClusterRef::new(t, c);
                let arriving = members.iter().filter(|m| !prev.contains(m)).count();
                let leaving = members.iter().filter(|m| !next.contains(m)).count();
                prop_assert_eq!(members.len() - layout.inflow(g), arriving);
                prop_assert_eq!(members.len() - layout.outflow(g), leaving);
            }
        }
    }
}
