//! Overlap similarities and majority relations between neighbouring snapshots.
//!
//! All relations are derived from integer intersection counts between the
//! clusters of snapshot `t` and `t + 1`. Only members present in both
//! snapshots can contribute to an intersection, so member turnover never
//! changes a relation. Argmax ties are kept, which gives multi-cluster
//! mapping and tracing sets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::snapshot::{ClusterRef, ClusteringSequence};

/// Normalisation of the fraction of identical members.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FimKind {
    /// `|a ∩ b| / |a ∪ b|` (Jaccard index).
    Symmetric,
    /// `|a ∩ b| / |a|`, the share of `a` found in `b`.
    Forward,
    /// `|a ∩ b| / |b|`, the share of `b` found in `a`.
    Backward,
}

/// Fraction of identical members between `a` and `b`, with every count
/// restricted to `residents`. Returns `None` when the denominator is empty.
pub fn fim<T: Ord>(
    a: &BTreeSet<T>,
    b: &BTreeSet<T>,
    residents: &BTreeSet<T>,
    kind: FimKind,
) -> Option<f64> {
    let shared = a.intersection(b).filter(|m| residents.contains(m)).count();
    let denominator = match kind {
        FimKind::Symmetric => a.union(b).filter(|m| residents.contains(m)).count(),
        FimKind::Forward => a.intersection(residents).count(),
        FimKind::Backward => b.intersection(residents).count(),
    };
    if denominator == 0 {
        None
    } else {
        Some(shared as f64 / denominator as f64)
    }
}

/// The four elementary relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// Forward argmax overlap (`ms`).
    Mapping,
    /// Backward argmax overlap (`ts`).
    Tracing,
    /// Later clusters whose tracing set is exactly the given cluster.
    Tracer,
    /// Earlier clusters whose mapping set is exactly the given cluster.
    Mapper,
}

impl Relation {
    fn forward(self) -> bool {
        matches!(self, Relation::Mapping | Relation::Tracer)
    }
}

/// Relations between snapshot `t` and `t + 1`.
#[derive(Clone, Debug, Default)]
struct Step {
    /// Cluster at `t` -> (cluster at `t + 1`, intersection size), ascending.
    overlaps: Vec<Vec<(usize, u32)>>,
    mapping: Vec<Vec<usize>>,
    tracing: Vec<Vec<usize>>,
    tracer: Vec<Vec<usize>>,
    mapper: Vec<Vec<usize>>,
}

/// Cached majority relations for every neighbouring snapshot pair.
///
/// Storage is proportional to the number of cluster pairs with a non-empty
/// intersection. The cache is built once and only read afterwards, except for
/// [`Relations::extend`] which appends pairs for newly arrived snapshots.
#[derive(Clone, Debug, Default)]
pub struct Relations {
    sizes: Vec<usize>,
    steps: Vec<Step>,
}

impl Relations {
    pub fn build(seq: &ClusteringSequence) -> Self {
        let mut rels = Relations::default();
        rels.extend(seq);
        rels
    }

    /// Computes relations for snapshots of `seq` not yet covered.
    pub fn extend(&mut self, seq: &ClusteringSequence) {
        let snaps = seq.snapshots();
        if self.sizes.is_empty() {
            if let Some(first) = snaps.first() {
                self.sizes.push(first.len());
            }
        }
        while self.sizes.len() < snaps.len() {
            let t = self.sizes.len() - 1;
            self.steps.push(build_step(seq, t));
            self.sizes.push(snaps[t + 1].len());
        }
    }

    /// Number of snapshots covered.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Number of clusters in snapshot `t`.
    pub fn clusters_at(&self, t: usize) -> usize {
        self.sizes.get(t).copied().unwrap_or(0)
    }

    fn check(&self, g: ClusterRef) -> Result<()> {
        if g.time < self.sizes.len() && g.cluster < self.sizes[g.time] {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("cluster {g} does not exist")))
        }
    }

    /// Intersection size of cluster `a` at `t` with cluster `b` at `t + 1`.
    pub fn overlap(&self, t: usize, a: usize, b: usize) -> u32 {
        self.steps
            .get(t)
            .and_then(|s| s.overlaps.get(a))
            .and_then(|row| {
                row.binary_search_by_key(&b, |&(c, _)| c)
                    .ok()
                    .map(|i| row[i].1)
            })
            .unwrap_or(0)
    }

    /// Non-zero overlaps between snapshots `t` and `t + 1` as `(a, b, size)`.
    pub fn overlaps(&self, t: usize) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.steps
            .get(t)
            .into_iter()
            .flat_map(|s| s.overlaps.iter().enumerate())
            .flat_map(|(a, row)| row.iter().map(move |&(b, n)| (a, b, n)))
    }

    /// Raw relation lookup: cluster positions in the neighbouring snapshot.
    /// Returns an empty slice when the neighbour does not exist.
    pub(crate) fn raw(&self, relation: Relation, t: usize, c: usize) -> &[usize] {
        let step = if relation.forward() {
            self.steps.get(t)
        } else {
            t.checked_sub(1).and_then(|s| self.steps.get(s))
        };
        let Some(step) = step else { return &[] };
        let table = match relation {
            Relation::Mapping => &step.mapping,
            Relation::Tracing => &step.tracing,
            Relation::Tracer => &step.tracer,
            Relation::Mapper => &step.mapper,
        };
        table.get(c).map(Vec::as_slice).unwrap_or(&[])
    }

    fn neighbour_set(&self, relation: Relation, g: ClusterRef) -> Result<BTreeSet<ClusterRef>> {
        self.check(g)?;
        let time = if relation.forward() {
            if g.time + 1 >= self.sizes.len() {
                return Err(Error::OutOfRange(format!("{g} has no following snapshot")));
            }
            g.time + 1
        } else {
            if g.time == 0 {
                return Err(Error::OutOfRange(format!("{g} has no preceding snapshot")));
            }
            g.time - 1
        };
        Ok(self
            .raw(relation, g.time, g.cluster)
            .iter()
            .map(|&c| ClusterRef::new(time, c))
            .collect())
    }

    /// Clusters at `t + 1` holding the largest share of `g`'s members.
    pub fn mapping_set(&self, g: ClusterRef) -> Result<BTreeSet<ClusterRef>> {
        self.neighbour_set(Relation::Mapping, g)
    }

    /// Clusters at `t - 1` holding the largest share of `g`'s members.
    pub fn tracing_set(&self, g: ClusterRef) -> Result<BTreeSet<ClusterRef>> {
        self.neighbour_set(Relation::Tracing, g)
    }

    /// Clusters at `t + 1` whose tracing set is exactly `{g}`.
    pub fn tracer_set(&self, g: ClusterRef) -> Result<BTreeSet<ClusterRef>> {
        self.neighbour_set(Relation::Tracer, g)
    }

    /// Clusters at `t - 1` whose mapping set is exactly `{g}`.
    pub fn mapper_set(&self, g: ClusterRef) -> Result<BTreeSet<ClusterRef>> {
        self.neighbour_set(Relation::Mapper, g)
    }

    /// Applies `relation` to every cluster of `set` and returns the union.
    pub fn lift(
        &self,
        relation: Relation,
        set: &BTreeSet<ClusterRef>,
    ) -> Result<BTreeSet<ClusterRef>> {
        let mut out = BTreeSet::new();
        for &g in set {
            out.extend(self.neighbour_set(relation, g)?);
        }
        Ok(out)
    }
}

fn build_step(seq: &ClusteringSequence, t: usize) -> Step {
    let here = &seq.snapshots()[t];
    let next = &seq.snapshots()[t + 1];
    let position = next.assignment();
    let mut counts = vec![0u32; next.len()];
    let mut touched = Vec::new();

    let mut overlaps = Vec::with_capacity(here.len());
    for cluster in here.clusters() {
        for m in cluster {
            if let Some(&b) = position.get(m) {
                if counts[b] == 0 {
                    touched.push(b);
                }
                counts[b] += 1;
            }
        }
        touched.sort_unstable();
        overlaps.push(touched.iter().map(|&b| (b, counts[b])).collect::<Vec<_>>());
        for &b in &touched {
            counts[b] = 0;
        }
        touched.clear();
    }

    let mut backward: Vec<Vec<(usize, u32)>> = vec![Vec::new(); next.len()];
    for (a, row) in overlaps.iter().enumerate() {
        for &(b, n) in row {
            backward[b].push((a, n));
        }
    }

    let mapping: Vec<Vec<usize>> = overlaps.iter().map(|row| argmax(row)).collect();
    let tracing: Vec<Vec<usize>> = backward.iter().map(|row| argmax(row)).collect();

    let mut tracer = vec![Vec::new(); here.len()];
    for (b, ts) in tracing.iter().enumerate() {
        if let [a] = ts.as_slice() {
            tracer[*a].push(b);
        }
    }
    let mut mapper = vec![Vec::new(); next.len()];
    for (a, ms) in mapping.iter().enumerate() {
        if let [b] = ms.as_slice() {
            mapper[*b].push(a);
        }
    }

    Step {
        overlaps,
        mapping,
        tracing,
        tracer,
        mapper,
    }
}

/// All positions attaining the maximal count; rows are sorted by position.
fn argmax(row: &[(usize, u32)]) -> Vec<usize> {
    let Some(best) = row.iter().map(|&(_, n)| n).max() else {
        return Vec::new();
    };
    row.iter()
        .filter(|&&(_, n)| n == best)
        .map(|&(c, _)| c)
        .collect()
}
