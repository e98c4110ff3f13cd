//! Brute-force reference tracker for small instances.
//!
//! Replays the same sequential procedure as [`crate::tracking`] but from
//! first principles: clusters are plain sets of member names, every majority
//! relation is recomputed by scanning all clusters of the neighbouring
//! snapshot, and every path is evaluated by literal recursion at every query.
//! Nothing is cached and nothing from the tracker or the relation cache is
//! used, so agreement between the two is meaningful.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::dynamic::DynamicClustering;
use crate::error::{Error, Result};
use crate::snapshot::ClusteringSequence;

pub const MAX_SNAPSHOTS: usize = 12;
pub const MAX_CLUSTERS: usize = 40;

type Node = (usize, usize);
type Nodes = BTreeSet<Node>;

struct Naive<'a> {
    clusters: Vec<Vec<BTreeSet<&'a str>>>,
}

impl<'a> Naive<'a> {
    fn new(seq: &'a ClusteringSequence) -> Self {
        let clusters = seq
            .snapshots()
            .iter()
            .map(|s| {
                s.clusters()
                    .iter()
                    .map(|c| c.iter().map(|&m| seq.name(m)).collect())
                    .collect()
            })
            .collect();
        Naive { clusters }
    }

    fn shared(&self, a: Node, b: Node) -> usize {
        self.clusters[a.0][a.1]
            .intersection(&self.clusters[b.0][b.1])
            .count()
    }

    /// Clusters of snapshot `other` sharing the most members with `g`.
    fn best_overlap(&self, g: Node, other: usize) -> Nodes {
        let mut best = 0;
        let mut out = Nodes::new();
        for h in 0..self.clusters[other].len() {
            let n = self.shared(g, (other, h));
            if n == 0 || n < best {
                continue;
            }
            if n > best {
                best = n;
                out.clear();
            }
            out.insert((other, h));
        }
        out
    }

    fn ms(&self, g: Node) -> Nodes {
        if g.0 + 1 >= self.clusters.len() {
            return Nodes::new();
        }
        self.best_overlap(g, g.0 + 1)
    }

    fn ts(&self, g: Node) -> Nodes {
        if g.0 == 0 {
            return Nodes::new();
        }
        self.best_overlap(g, g.0 - 1)
    }

    fn ts_of_set(&self, set: &Nodes) -> Nodes {
        set.iter().flat_map(|&g| self.ts(g)).collect()
    }

    fn ms_of_set(&self, set: &Nodes) -> Nodes {
        set.iter().flat_map(|&g| self.ms(g)).collect()
    }

    fn ts_n(&self, g: Node, n: usize) -> Nodes {
        if n == 0 {
            Nodes::from([g])
        } else {
            self.ts_of_set(&self.ts_n(g, n - 1))
        }
    }

    fn ms_n(&self, set: &Nodes, n: usize) -> Nodes {
        if n == 0 {
            set.clone()
        } else {
            self.ms_n(&self.ms_of_set(set), n - 1)
        }
    }

    /// Clusters at `g.0 + 1` whose tracing set is exactly `{g}`.
    fn tracers(&self, set: &Nodes) -> Nodes {
        let mut out = Nodes::new();
        for &g in set {
            if g.0 + 1 >= self.clusters.len() {
                continue;
            }
            for h in 0..self.clusters[g.0 + 1].len() {
                if self.ts((g.0 + 1, h)) == Nodes::from([g]) {
                    out.insert((g.0 + 1, h));
                }
            }
        }
        out
    }

    /// Clusters at `g.0 - 1` whose mapping set is exactly `{g}`.
    fn mappers(&self, set: &Nodes) -> Nodes {
        let mut out = Nodes::new();
        for &g in set {
            if g.0 == 0 {
                continue;
            }
            for h in 0..self.clusters[g.0 - 1].len() {
                if self.ms((g.0 - 1, h)) == Nodes::from([g]) {
                    out.insert((g.0 - 1, h));
                }
            }
        }
        out
    }
}

/// One association step performed by the oracle: `target` and everything it
/// pulled into its DC.
#[derive(Clone, Debug)]
pub struct Association {
    pub target: (usize, usize),
    pub depth: usize,
    pub ensemble: BTreeSet<(usize, usize)>,
}

/// Output of [`brute_force_run`].
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub clustering: DynamicClustering,
    pub associations: Vec<Association>,
}

impl OracleRun {
    /// DCs (canonical ids) whose clusters do not form a single ensemble when
    /// linked through the associations that produced their final labels.
    /// Such a DC could be split into two independently valid ensembles, so
    /// it would not be minimal. An empty result means every DC is minimal.
    pub fn minimality_violations(&self) -> Vec<u64> {
        let label = |n: (usize, usize)| self.clustering.labels()[n.0][n.1];
        let mut parent: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        fn find(
            parent: &mut HashMap<(usize, usize), (usize, usize)>,
            n: (usize, usize),
        ) -> (usize, usize) {
            let p = *parent.get(&n).unwrap_or(&n);
            if p == n {
                return n;
            }
            let root = find(parent, p);
            parent.insert(n, root);
            root
        }
        for a in &self.associations {
            for &c in &a.ensemble {
                if label(c) == label(a.target) {
                    let (x, y) = (find(&mut parent, c), find(&mut parent, a.target));
                    if x != y {
                        parent.insert(x, y);
                    }
                }
            }
        }
        let mut roots: BTreeMap<u64, BTreeSet<(usize, usize)>> = BTreeMap::new();
        for (t, row) in self.clustering.labels().iter().enumerate() {
            for (c, dc) in row.iter().enumerate() {
                let root = find(&mut parent, (t, c));
                roots.entry(dc.0).or_default().insert(root);
            }
        }
        roots
            .into_iter()
            .filter(|(_, r)| r.len() > 1)
            .map(|(dc, _)| dc)
            .collect()
    }
}

/// Reference labeling of `seq` with an `history`-step history.
pub fn brute_force_track(seq: &ClusteringSequence, history: usize) -> Result<DynamicClustering> {
    brute_force_run(seq, history).map(|run| run.clustering)
}

pub fn brute_force_run(seq: &ClusteringSequence, history: usize) -> Result<OracleRun> {
    if seq.len() > MAX_SNAPSHOTS {
        return Err(Error::OracleTooLarge(format!(
            "{} snapshots (limit {MAX_SNAPSHOTS})",
            seq.len()
        )));
    }
    if seq.cluster_count() > MAX_CLUSTERS {
        return Err(Error::OracleTooLarge(format!(
            "{} clusters (limit {MAX_CLUSTERS})",
            seq.cluster_count()
        )));
    }
    let naive = Naive::new(seq);
    let mut labels: HashMap<Node, u64> = HashMap::new();
    let mut next_label = 0u64;
    let mut associations = Vec::new();

    for t in 0..naive.clusters.len() {
        for alpha in 0..naive.clusters[t].len() {
            let g = (t, alpha);

            // tracing flow: extend while the next set maps back into it
            let mut depth_reached = 0;
            while depth_reached < history && depth_reached < t {
                let k = depth_reached + 1;
                let candidate = naive.ts_n(g, k);
                if candidate.is_empty() {
                    break;
                }
                let returns =
                    (1..=k).any(|m| naive.ms_n(&candidate, m).is_subset(&naive.ts_n(g, k - m)));
                if !returns {
                    break;
                }
                depth_reached = k;
            }

            // earliest potential source set within a single DC
            let source = (1..=depth_reached).rev().find(|&n| {
                let set = naive.ts_n(g, n);
                if naive.ms_n(&set, n) != Nodes::from([g]) {
                    return false;
                }
                let dcs: BTreeSet<u64> = set.iter().map(|c| labels[c]).collect();
                dcs.len() == 1
            });

            let Some(n) = source else {
                labels.insert(g, next_label);
                next_label += 1;
                associations.push(Association {
                    target: g,
                    depth: 0,
                    ensemble: Nodes::from([g]),
                });
                continue;
            };

            let source_set = naive.ts_n(g, n);
            let dc = labels[source_set.iter().next().expect("non-empty")];
            let mut flow = Nodes::new();
            for k in 0..=n {
                flow.extend(naive.ts_n(g, k));
                flow.extend(naive.ms_n(&source_set, k));
            }
            let mut mapper_tree = Nodes::new();
            let mut level = Nodes::from([g]);
            for _ in 0..n {
                level = naive.mappers(&level);
                mapper_tree.extend(level.iter().copied());
            }
            let mut tracer_tree = Nodes::new();
            let mut level = source_set.clone();
            for _ in 0..n {
                level = naive.tracers(&level);
                tracer_tree.extend(level.iter().copied());
            }
            let mut ensemble = flow.clone();
            ensemble.extend(
                mapper_tree
                    .intersection(&tracer_tree)
                    .filter(|c| !flow.contains(c))
                    .copied(),
            );
            for &c in &ensemble {
                labels.insert(c, dc);
            }
            associations.push(Association {
                target: g,
                depth: n,
                ensemble,
            });
        }
    }

    let rows: Vec<Vec<u64>> = naive
        .clusters
        .iter()
        .enumerate()
        .map(|(t, row)| (0..row.len()).map(|c| labels[&(t, c)]).collect())
        .collect();
    Ok(OracleRun {
        clustering: DynamicClustering::from_labels(seq, &rows, history)?,
        associations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_guard() {
        let snaps: Vec<Vec<Vec<&str>>> = (0..13).map(|_| vec![vec!["a"]]).collect();
        let seq = ClusteringSequence::from_clusters(&snaps).unwrap();
        assert!(matches!(
            brute_force_track(&seq, 1),
            Err(Error::OracleTooLarge(_))
        ));

        let names: Vec<String> = (0..41).map(|i| i.to_string()).collect();
        let wide: Vec<Vec<Vec<&str>>> = vec![names.iter().map(|n| vec![n.as_str()]).collect()];
        let seq = ClusteringSequence::from_clusters(&wide).unwrap();
        assert!(matches!(
            brute_force_track(&seq, 1),
            Err(Error::OracleTooLarge(_))
        ));
    }

    #[test]
    fn single_snapshot() {
        let seq = ClusteringSequence::from_clusters(&[vec![vec!["a"], vec!["b"]]]).unwrap();
        let dc = brute_force_track(&seq, 3).unwrap();
        assert_eq!(dc.dc_count(), 2);
    }

    #[test]
    fn splinter_absorbed_with_enough_history() {
        let host = vec!["1", "2", "3", "4", "5", "6"];
        let seq = ClusteringSequence::from_clusters(&[
            vec![host.clone()],
            vec![vec!["1", "2", "3", "4"], vec!["5", "6"]],
            vec![host],
        ])
        .unwrap();
        assert_eq!(brute_force_track(&seq, 1).unwrap().dc_count(), 2);
        let run = brute_force_run(&seq, 2).unwrap();
        assert_eq!(run.clustering.dc_count(), 1);
        assert!(run.minimality_violations().is_empty());
    }
}
