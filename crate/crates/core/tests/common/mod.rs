#![allow(dead_code)]

use dynatrack::dynamic::canonicalize;
use dynatrack::snapshot::RawSnapshot;
use dynatrack::{ClusteringSequence, DcId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random small instance: each of `members` ids is present with some
/// probability and placed into one of at most `max_clusters` clusters.
pub fn random_instance(
    seed: u64,
    max_snapshots: usize,
    members: usize,
    max_clusters: usize,
) -> ClusteringSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_count = rng.gen_range(1..=max_snapshots);
    let presence = rng.gen_range(0.5..1.0);
    let raw = (0..t_count)
        .map(|_| {
            let k = rng.gen_range(1..=max_clusters);
            let mut clusters: Vec<Vec<String>> = vec![Vec::new(); k];
            for m in 0..members {
                if rng.gen_bool(presence) {
                    clusters[rng.gen_range(0..k)].push(format!("m{m}"));
                }
            }
            clusters.retain(|c| !c.is_empty());
            RawSnapshot {
                label: None,
                clusters,
            }
        })
        .collect();
    ClusteringSequence::from_raw(raw).unwrap()
}

/// Same instance with the clusters of every snapshot shuffled; returns the
/// shuffled sequence and, per snapshot, the new position of each old cluster.
pub fn shuffle_clusters(
    seq: &ClusteringSequence,
    seed: u64,
) -> (ClusteringSequence, Vec<Vec<usize>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = seq.to_raw();
    let mut positions = Vec::new();
    for snap in &mut raw {
        let mut order: Vec<usize> = (0..snap.clusters.len()).collect();
        order.shuffle(&mut rng);
        let old = std::mem::take(&mut snap.clusters);
        let mut pos = vec![0; old.len()];
        for (new, &o) in order.iter().enumerate() {
            pos[o] = new;
        }
        snap.clusters = order.iter().map(|&o| old[o].clone()).collect();
        positions.push(pos);
    }
    (ClusteringSequence::from_raw(raw).unwrap(), positions)
}

pub fn canonical(labels: &[Vec<DcId>]) -> Vec<Vec<DcId>> {
    canonicalize(labels)
}

/// Random instance with persistence: clusters mostly carry over from one
/// snapshot to the next, members move, leave or arrive with small
/// probability, which produces splinters, merges and deep matches.
pub fn evolving_instance(
    seed: u64,
    max_snapshots: usize,
    members: usize,
    max_clusters: usize,
) -> ClusteringSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_count = rng.gen_range(1..=max_snapshots);
    let move_p = rng.gen_range(0.05..0.4);
    let absent_p = rng.gen_range(0.0..0.3);
    let mut assign: Vec<usize> = (0..members)
        .map(|_| rng.gen_range(0..max_clusters))
        .collect();
    let mut raw = Vec::new();
    for _ in 0..t_count {
        if rng.gen_bool(0.3) {
            // relabel one cluster wholesale into another: merge or split-off
            let (a, b) = (
                rng.gen_range(0..max_clusters),
                rng.gen_range(0..max_clusters),
            );
            for c in assign.iter_mut() {
                if *c == a && rng.gen_bool(0.6) {
                    *c = b;
                }
            }
        }
        for c in assign.iter_mut() {
            if rng.gen_bool(move_p) {
                *c = rng.gen_range(0..max_clusters);
            }
        }
        let mut clusters: Vec<Vec<String>> = vec![Vec::new(); max_clusters];
        for (m, &c) in assign.iter().enumerate() {
            if !rng.gen_bool(absent_p) {
                clusters[c].push(format!("m{m}"));
            }
        }
        clusters.retain(|c| !c.is_empty());
        raw.push(RawSnapshot {
            label: None,
            clusters,
        });
    }
    ClusteringSequence::from_raw(raw).unwrap()
}
