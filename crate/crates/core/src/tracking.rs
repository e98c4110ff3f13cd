//! Progressive detection of dynamic clusters.
//!
//! Snapshots are processed in order. For each cluster of the newest snapshot
//! (the *target*) the tracker follows its tracing path back at most
//! `history` snapshots, looks for the earliest cluster set that forms a
//! bijective majority match with the target and lies within a single DC (the
//! *source set*), and then assigns the target, every cluster on the paths
//! between the two (the *identity flow*), and every cluster embedded in that
//! flow (the *marginal* clusters) to the DC of the source set. Without a
//! qualifying source set the target starts a new DC.
//!
//! Earlier labels within the history horizon may be rewritten by this step;
//! labels further back are final.

use std::collections::{BTreeMap, BTreeSet};

use crate::dynamic::{DcId, DynamicClustering};
use crate::error::{Error, Result};
use crate::similarity::{Relation, Relations};
use crate::snapshot::{ClusterRef, ClusteringSequence};

/// Source set of a target cluster and the depth at which it was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSet {
    /// Number of snapshots between the source set and the target (`n*`).
    pub depth: usize,
    pub clusters: BTreeSet<ClusterRef>,
}

/// Clusters that carry the identity of a DC from a source set to a target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityFlow {
    pub depth: usize,
    pub source: BTreeSet<ClusterRef>,
    /// Tracing path of the target and mapping path of the source set, all levels.
    pub flow: BTreeSet<ClusterRef>,
    /// Clusters embedded between the two paths but not part of them.
    pub marginals: BTreeSet<ClusterRef>,
}

type Level = BTreeSet<usize>;

fn lift(rels: &Relations, relation: Relation, t: usize, level: &Level) -> Level {
    level
        .iter()
        .flat_map(|&c| rels.raw(relation, t, c).iter().copied())
        .collect()
}

fn at(time: usize, level: &Level) -> impl Iterator<Item = ClusterRef> + '_ {
    level.iter().map(move |&c| ClusterRef::new(time, c))
}

fn check_cluster(rels: &Relations, g: ClusterRef) -> Result<()> {
    if g.cluster < rels.clusters_at(g.time) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("cluster {g} does not exist")))
    }
}

/// `ts^n(g)`: the tracing set applied `n` times; `ts^0(g) = {g}`.
pub fn tracing_path(rels: &Relations, g: ClusterRef, n: usize) -> Result<BTreeSet<ClusterRef>> {
    check_cluster(rels, g)?;
    if n > g.time {
        return Err(Error::OutOfRange(format!(
            "tracing path of depth {n} from {g}"
        )));
    }
    let mut level: Level = [g.cluster].into();
    for k in 0..n {
        level = lift(rels, Relation::Tracing, g.time - k, &level);
    }
    Ok(at(g.time - n, &level).collect())
}

/// `ms^n(S)`: the mapping set applied `n` times; `ms^0(S) = S`.
/// All clusters of `set` must belong to the same snapshot.
pub fn mapping_path(
    rels: &Relations,
    set: &BTreeSet<ClusterRef>,
    n: usize,
) -> Result<BTreeSet<ClusterRef>> {
    let Some(first) = set.first() else {
        return Ok(BTreeSet::new());
    };
    let time = first.time;
    for &g in set {
        check_cluster(rels, g)?;
        if g.time != time {
            return Err(Error::OutOfRange(format!(
                "mapping path over clusters of different snapshots ({first}, {g})"
            )));
        }
    }
    if time + n >= rels.len() {
        return Err(Error::OutOfRange(format!(
            "mapping path of depth {n} from snapshot {time}"
        )));
    }
    let mut level: Level = set.iter().map(|g| g.cluster).collect();
    for k in 0..n {
        level = lift(rels, Relation::Mapping, time + k, &level);
    }
    Ok(at(time + n, &level).collect())
}

/// Whether `g` and `ts^n(g)` reciprocally hold each other's majority:
/// `ms^n(ts^n(g)) = {g}`.
pub fn is_bijective_match(rels: &Relations, g: ClusterRef, n: usize) -> Result<bool> {
    let source = tracing_path(rels, g, n)?;
    if source.is_empty() {
        return Ok(false);
    }
    Ok(mapping_path(rels, &source, n)? == BTreeSet::from([g]))
}

/// Identity flow and marginal clusters for target `g` and its source set.
pub fn identity_flow(rels: &Relations, g: ClusterRef, source: &SourceSet) -> Result<IdentityFlow> {
    check_cluster(rels, g)?;
    let n = source.depth;
    if n > g.time {
        return Err(Error::OutOfRange(format!(
            "identity flow of depth {n} into {g}"
        )));
    }
    let origin = g.time - n;
    if source.clusters.iter().any(|s| s.time != origin) {
        return Err(Error::OutOfRange(format!(
            "source set is not at snapshot {origin}"
        )));
    }
    let start: Level = source.clusters.iter().map(|s| s.cluster).collect();
    let mut flow = BTreeSet::from([g]);

    let mut level: Level = [g.cluster].into();
    for k in 0..n {
        level = lift(rels, Relation::Tracing, g.time - k, &level);
        flow.extend(at(g.time - k - 1, &level));
    }
    let mut level = start.clone();
    flow.extend(at(origin, &level));
    for k in 0..n {
        level = lift(rels, Relation::Mapping, origin + k, &level);
        flow.extend(at(origin + k + 1, &level));
    }

    let mut mapper_tree = BTreeSet::new();
    let mut level: Level = [g.cluster].into();
    for k in 0..n {
        level = lift(rels, Relation::Mapper, g.time - k, &level);
        mapper_tree.extend(at(g.time - k - 1, &level));
    }
    let mut tracer_tree = BTreeSet::new();
    let mut level = start;
    for k in 0..n {
        level = lift(rels, Relation::Tracer, origin + k, &level);
        tracer_tree.extend(at(origin + k + 1, &level));
    }
    let marginals = mapper_tree
        .intersection(&tracer_tree)
        .filter(|c| !flow.contains(c))
        .copied()
        .collect();

    Ok(IdentityFlow {
        depth: n,
        source: source.clusters.clone(),
        flow,
        marginals,
    })
}

const UNASSIGNED: DcId = DcId(u64::MAX);

/// Labels, DC registry and history parameter of a running tracker.
#[derive(Clone, Debug)]
pub struct TrackingState {
    history: usize,
    labels: Vec<Vec<DcId>>,
    registry: BTreeMap<DcId, BTreeSet<ClusterRef>>,
    next_id: u64,
}

impl TrackingState {
    pub fn new(history: usize) -> Self {
        Self {
            history,
            labels: Vec::new(),
            registry: BTreeMap::new(),
            next_id: 0,
        }
    }

    pub fn history(&self) -> usize {
        self.history
    }

    /// Index of the last processed snapshot.
    pub fn frontier(&self) -> Option<usize> {
        self.labels.len().checked_sub(1)
    }

    pub fn label(&self, g: ClusterRef) -> Option<DcId> {
        self.labels
            .get(g.time)?
            .get(g.cluster)
            .copied()
            .filter(|&d| d != UNASSIGNED)
    }

    pub fn labels(&self) -> &[Vec<DcId>] {
        &self.labels
    }

    /// Clusters per live DC; the exact inverse of the labels.
    pub fn registry(&self) -> &BTreeMap<DcId, BTreeSet<ClusterRef>> {
        &self.registry
    }

    /// Whether the clusters of the newest snapshot all carry distinct DCs.
    pub fn frontier_is_injective(&self) -> bool {
        self.labels.last().is_none_or(|row| {
            let distinct: BTreeSet<_> = row.iter().collect();
            distinct.len() == row.len()
        })
    }

    fn fresh(&mut self) -> DcId {
        let id = DcId(self.next_id);
        self.next_id += 1;
        id
    }

    fn assign(&mut self, g: ClusterRef, dc: DcId) {
        let slot = &mut self.labels[g.time][g.cluster];
        let old = std::mem::replace(slot, dc);
        if old == dc {
            return;
        }
        if old != UNASSIGNED {
            if let Some(set) = self.registry.get_mut(&old) {
                set.remove(&g);
                if set.is_empty() {
                    self.registry.remove(&old);
                }
            }
        }
        self.registry.entry(dc).or_default().insert(g);
    }

    /// Deepest cluster set within the history horizon that forms a bijective
    /// majority match with `g` and lies in a single DC; `{g}` at depth 0 if
    /// none does.
    ///
    /// The tracing path is extended one snapshot at a time while the next set
    /// maps forward into the path built so far; it stops at the first set that
    /// does not, at the horizon, at snapshot 0, or when the tracing set is
    /// empty. Only sets on that path are candidates.
    pub fn find_source_set(&self, rels: &Relations, g: ClusterRef) -> Result<SourceSet> {
        check_cluster(rels, g)?;
        let t = g.time;
        if t > 0 && self.labels.len() < t {
            return Err(Error::Sequencing {
                expected: self.labels.len(),
                got: t,
            });
        }
        let target: Level = [g.cluster].into();
        let mut levels = vec![target.clone()];
        let mut candidates = Vec::new();
        for k in 1..=t.min(self.history) {
            let next = lift(rels, Relation::Tracing, t - k + 1, &levels[k - 1]);
            if next.is_empty() {
                break;
            }
            let mut admitted = false;
            let mut image = next.clone();
            for m in 1..=k {
                image = lift(rels, Relation::Mapping, t - k + m - 1, &image);
                admitted |= image.is_subset(&levels[k - m]);
            }
            if !admitted {
                break;
            }
            if image == target {
                candidates.push(k);
            }
            levels.push(next);
        }
        for &k in candidates.iter().rev() {
            let mut dcs = levels[k].iter().map(|&c| self.labels[t - k][c]);
            let first = dcs.next().expect("non-empty candidate");
            if dcs.all(|d| d == first) {
                return Ok(SourceSet {
                    depth: k,
                    clusters: at(t - k, &levels[k]).collect(),
                });
            }
        }
        Ok(SourceSet {
            depth: 0,
            clusters: BTreeSet::from([g]),
        })
    }

    /// Processes snapshot `t` with targets in ascending cluster order and
    /// returns the identity flows of the targets that continued a DC.
    pub fn process_snapshot(&mut self, rels: &Relations, t: usize) -> Result<Vec<IdentityFlow>> {
        let order: Vec<usize> = (0..rels.clusters_at(t)).collect();
        self.process_snapshot_in_order(rels, t, &order)
    }

    /// Processes snapshot `t`, visiting its clusters in the given order.
    pub fn process_snapshot_in_order(
        &mut self,
        rels: &Relations,
        t: usize,
        order: &[usize],
    ) -> Result<Vec<IdentityFlow>> {
        if t != self.labels.len() {
            return Err(Error::Sequencing {
                expected: self.labels.len(),
                got: t,
            });
        }
        if t >= rels.len() {
            return Err(Error::OutOfRange(format!(
                "snapshot {t} is not covered by the relations"
            )));
        }
        let m = rels.clusters_at(t);
        let mut seen = vec![false; m];
        if order.len() != m
            || order
                .iter()
                .any(|&c| c >= m || std::mem::replace(&mut seen[c], true))
        {
            return Err(Error::OutOfRange(format!(
                "processing order is not a permutation of the {m} clusters of snapshot {t}"
            )));
        }
        self.labels.push(vec![UNASSIGNED; m]);
        let mut flows = Vec::new();
        for &alpha in order {
            let g = ClusterRef::new(t, alpha);
            let source = self.find_source_set(rels, g)?;
            if source.depth == 0 {
                let dc = self.fresh();
                self.assign(g, dc);
                continue;
            }
            let first = *source.clusters.first().expect("non-empty source set");
            let dc = self.labels[first.time][first.cluster];
            let flow = identity_flow(rels, g, &source)?;
            for c in flow.flow.iter().chain(&flow.marginals) {
                self.assign(*c, dc);
            }
            flows.push(flow);
        }
        debug_assert!(
            self.frontier_is_injective(),
            "snapshot {t}: two clusters share a DC"
        );
        Ok(flows)
    }

    /// Final dynamic clustering, with canonical DC identifiers.
    pub fn into_clustering(self, seq: &ClusteringSequence) -> Result<DynamicClustering> {
        if self.labels.len() != seq.len() {
            return Err(Error::Sequencing {
                expected: seq.len(),
                got: self.labels.len(),
            });
        }
        DynamicClustering::from_labels(seq, &self.labels, self.history)
    }
}

/// Tracks dynamic clusters through `seq` with an `history`-step history.
pub fn track(seq: &ClusteringSequence, history: usize) -> DynamicClustering {
    track_with(seq, &Relations::build(seq), history)
}

/// [`track`] reusing precomputed relations.
pub fn track_with(seq: &ClusteringSequence, rels: &Relations, history: usize) -> DynamicClustering {
    let mut state = TrackingState::new(history);
    for t in 0..seq.len() {
        state
            .process_snapshot(rels, t)
            .expect("snapshots are processed in order");
    }
    state
        .into_clustering(seq)
        .expect("every snapshot processed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(snaps: &[Vec<Vec<&str>>]) -> ClusteringSequence {
        ClusteringSequence::from_clusters(snaps).unwrap()
    }

    fn refs(time: usize, cs: &[usize]) -> BTreeSet<ClusterRef> {
        cs.iter().map(|&c| ClusterRef::new(time, c)).collect()
    }

    fn labels(dc: &DynamicClustering) -> Vec<Vec<u64>> {
        dc.labels()
            .iter()
            .map(|r| r.iter().map(|d| d.0).collect())
            .collect()
    }

    #[test]
    fn paths_of_depth_zero_are_identities() {
        let s = seq(&[vec![vec!["a"]], vec![vec!["a"]]]);
        let rels = Relations::build(&s);
        let g = ClusterRef::new(1, 0);
        assert_eq!(tracing_path(&rels, g, 0).unwrap(), refs(1, &[0]));
        assert_eq!(
            mapping_path(&rels, &refs(0, &[0]), 0).unwrap(),
            refs(0, &[0])
        );
        assert!(is_bijective_match(&rels, g, 0).unwrap());
        assert!(tracing_path(&rels, g, 2).is_err());
        assert!(mapping_path(&rels, &refs(0, &[0]), 2).is_err());
    }

    #[test]
    fn chain_of_unique_majorities() {
        let s = seq(&[
            vec![vec!["1", "2", "3"]],
            vec![vec!["1", "2", "4"]],
            vec![vec!["1", "2", "5"]],
        ]);
        let rels = Relations::build(&s);
        assert_eq!(
            tracing_path(&rels, ClusterRef::new(2, 0), 2).unwrap(),
            refs(0, &[0])
        );
        assert_eq!(
            mapping_path(&rels, &refs(0, &[0]), 2).unwrap(),
            refs(2, &[0])
        );
    }

    #[test]
    fn empty_tracing_set_is_no_match() {
        let s = seq(&[vec![vec!["1"]], vec![vec!["2"]]]);
        let rels = Relations::build(&s);
        assert!(!is_bijective_match(&rels, ClusterRef::new(1, 0), 1).unwrap());
    }

    #[test]
    fn identical_snapshots_continue_dcs() {
        let snap = vec![vec!["a", "b"], vec!["c", "d", "e"], vec!["f"]];
        let s = seq(&[snap.clone(), snap.clone(), snap]);
        let dc = track(&s, 1);
        assert_eq!(dc.dc_count(), 3);
        assert_eq!(labels(&dc), vec![vec![0, 1, 2]; 3]);
    }

    #[test]
    fn new_members_start_new_dcs() {
        let s = seq(&[vec![vec!["a", "b"]], vec![vec!["c"], vec!["d"]]]);
        let dc = track(&s, 3);
        assert_eq!(labels(&dc), vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn single_snapshot_has_one_dc_per_cluster() {
        let s = seq(&[vec![vec!["a"], vec!["b"], vec!["c"]]]);
        assert_eq!(track(&s, 4).dc_count(), 3);
    }

    #[test]
    fn zero_history_gives_one_dc_per_cluster() {
        let snap = vec![vec!["a", "b"], vec!["c"]];
        let s = seq(&[snap.clone(), snap]);
        assert_eq!(track(&s, 0).dc_count(), 4);
    }

    #[test]
    fn processing_must_be_sequential() {
        let s = seq(&[vec![vec!["a"]], vec![vec!["a"]]]);
        let rels = Relations::build(&s);
        let mut state = TrackingState::new(1);
        assert!(matches!(
            state.process_snapshot(&rels, 1),
            Err(Error::Sequencing {
                expected: 0,
                got: 1
            })
        ));
        state.process_snapshot(&rels, 0).unwrap();
        assert!(state.process_snapshot_in_order(&rels, 1, &[0, 0]).is_err());
        state.process_snapshot(&rels, 1).unwrap();
        assert!(state.process_snapshot(&rels, 2).is_err());
    }

    /// A one-snapshot splinter is re-attached to its host once the host is
    /// whole again: the splinter first gets its own DC, then is relabeled.
    #[test]
    fn splinter_is_relabeled_retroactively() {
        let host: Vec<&str> = vec!["1", "2", "3", "4", "5", "6"];
        let s = seq(&[
            vec![host.clone()],
            vec![host.clone()],
            vec![vec!["1", "2", "3", "4"], vec!["5", "6"]],
            vec![host],
        ]);
        let rels = Relations::build(&s);
        let mut state = TrackingState::new(2);
        for t in 0..3 {
            state.process_snapshot(&rels, t).unwrap();
        }
        let host_dc = state.label(ClusterRef::new(0, 0)).unwrap();
        assert_ne!(state.label(ClusterRef::new(2, 1)).unwrap(), host_dc);
        assert_eq!(state.registry().len(), 2);
        state.process_snapshot(&rels, 3).unwrap();
        assert_eq!(state.label(ClusterRef::new(2, 1)).unwrap(), host_dc);
        assert_eq!(state.label(ClusterRef::new(3, 0)).unwrap(), host_dc);
        // the splinter DC vanished from the registry
        assert_eq!(state.registry().len(), 1);

        // with a one-step history the splinter stays on its own
        assert_eq!(track(&s, 1).dc_count(), 2);
        assert_eq!(track(&s, 2).dc_count(), 1);
    }

    #[test]
    fn registry_is_inverse_of_labels() {
        let s = seq(&[
            vec![vec!["1", "2", "3", "4"], vec!["5", "6"]],
            vec![vec!["1", "2"], vec!["3", "4", "5"], vec!["6"]],
            vec![vec!["1", "2", "3", "4", "5", "6"]],
        ]);
        let rels = Relations::build(&s);
        let mut state = TrackingState::new(2);
        for t in 0..s.len() {
            state.process_snapshot(&rels, t).unwrap();
        }
        let mut inverse: BTreeMap<DcId, BTreeSet<ClusterRef>> = BTreeMap::new();
        for g in s.cluster_refs() {
            inverse
                .entry(state.label(g).unwrap())
                .or_default()
                .insert(g);
        }
        assert_eq!(&inverse, state.registry());
    }
}
