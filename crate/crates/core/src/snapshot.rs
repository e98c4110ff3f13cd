//! Snapshot data model: an ordered sequence of clusterings.
//!
//! Member identifiers are opaque strings. They are interned on construction
//! into dense [`MemberId`]s (in order of first appearance) so that set
//! operations downstream work on integers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interned member identifier, dense in order of first appearance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemberId(pub u32);

/// Handle of one cluster: snapshot index and position within the snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClusterRef {
    pub time: usize,
    pub cluster: usize,
}

impl ClusterRef {
    pub fn new(time: usize, cluster: usize) -> Self {
        Self { time, cluster }
    }
}

impl fmt::Display for ClusterRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g[{},{}]", self.time, self.cluster)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Json,
    Csv,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(InputFormat::Json),
            "csv" => Ok(InputFormat::Csv),
            other => Err(format!(
                "unknown input format {other:?} (expected json or csv)"
            )),
        }
    }
}

/// One time point: a family of pairwise disjoint, non-empty clusters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    index: usize,
    label: Option<String>,
    clusters: Vec<Vec<MemberId>>,
}

impl Snapshot {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn clusters(&self) -> &[Vec<MemberId>] {
        &self.clusters
    }

    pub fn cluster(&self, cluster: usize) -> Option<&[MemberId]> {
        self.clusters.get(cluster).map(Vec::as_slice)
    }

    /// Number of clusters in this snapshot.
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// All members present in this snapshot, cluster by cluster.
    pub fn members(&self) -> impl Iterator<Item = MemberId> + '_ {
        self.clusters.iter().flatten().copied()
    }

    pub fn member_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// Member to cluster-position lookup for this snapshot.
    pub fn assignment(&self) -> HashMap<MemberId, usize> {
        let mut map = HashMap::with_capacity(self.member_count());
        for (alpha, cluster) in self.clusters.iter().enumerate() {
            for &m in cluster {
                map.insert(m, alpha);
            }
        }
        map
    }
}

/// Input-side representation of a snapshot before interning.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSnapshot {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub clusters: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct RawSequence {
    snapshots: Vec<RawSnapshot>,
}

/// Ordered snapshots over a shared member vocabulary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusteringSequence {
    snapshots: Vec<Snapshot>,
    names: Vec<String>,
    ids: HashMap<String, MemberId>,
}

impl ClusteringSequence {
    /// Validates and interns raw snapshots. Snapshot order is the slice order.
    pub fn from_raw(raw: Vec<RawSnapshot>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut names = Vec::new();
        let mut ids: HashMap<String, MemberId> = HashMap::new();
        let mut snapshots = Vec::with_capacity(raw.len());
        for (index, snap) in raw.into_iter().enumerate() {
            let mut seen = BTreeSet::new();
            let mut clusters = Vec::with_capacity(snap.clusters.len());
            for (alpha, cluster) in snap.clusters.into_iter().enumerate() {
                if cluster.is_empty() {
                    return Err(Error::EmptyCluster {
                        snapshot: index,
                        cluster: alpha,
                    });
                }
                let mut members = Vec::with_capacity(cluster.len());
                for name in cluster {
                    if name.is_empty() {
                        return Err(Error::EmptyMemberId { snapshot: index });
                    }
                    let id = match ids.get(&name) {
                        Some(&id) => id,
                        None => {
                            let id = MemberId(names.len() as u32);
                            ids.insert(name.clone(), id);
                            names.push(name);
                            id
                        }
                    };
                    if !seen.insert(id) {
                        return Err(Error::DuplicateMember {
                            member: names[id.0 as usize].clone(),
                            snapshot: index,
                        });
                    }
                    members.push(id);
                }
                clusters.push(members);
            }
            snapshots.push(Snapshot {
                index,
                label: snap.label,
                clusters,
            });
        }
        Ok(Self {
            snapshots,
            names,
            ids,
        })
    }

    /// Convenience constructor from nested string slices, without labels.
    pub fn from_clusters<S: AsRef<str>>(snapshots: &[Vec<Vec<S>>]) -> Result<Self> {
        Self::from_raw(
            snapshots
                .iter()
                .map(|clusters| RawSnapshot {
                    label: None,
                    clusters: clusters
                        .iter()
                        .map(|c| c.iter().map(|m| m.as_ref().to_owned()).collect())
                        .collect(),
                })
                .collect(),
        )
    }

    pub fn parse<R: Read>(input: R, format: InputFormat) -> Result<Self> {
        match format {
            InputFormat::Json => Self::parse_json(input),
            InputFormat::Csv => Self::parse_csv(input),
        }
    }

    /// Parses `{"snapshots":[{"label":..,"clusters":[[..],..]},..]}`.
    pub fn parse_json<R: Read>(input: R) -> Result<Self> {
        let raw: RawSequence = serde_json::from_reader(input).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_raw(raw.snapshots)
    }

    /// Parses `t,member,cluster` rows. Rows may come in any order; the set of
    /// `t` values must be exactly `0..T`. Clusters are ordered by their
    /// numeric id, members by row order.
    pub fn parse_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = reader.headers().map_err(csv_error)?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "member", "cluster"] {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!(
                    "expected header `t,member,cluster`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut grouped: BTreeMap<usize, BTreeMap<u64, Vec<String>>> = BTreeMap::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize| record.get(i).unwrap_or_default();
            let t: usize = field(0).parse().map_err(|_| Error::Parse {
                line,
                column: 1,
                message: format!(
                    "snapshot index {:?} is not a non-negative integer",
                    field(0)
                ),
            })?;
            let cluster: u64 = field(2).parse().map_err(|_| Error::Parse {
                line,
                column: 3,
                message: format!("cluster id {:?} is not a non-negative integer", field(2)),
            })?;
            grouped
                .entry(t)
                .or_default()
                .entry(cluster)
                .or_default()
                .push(field(1).to_owned());
        }
        let mut raw = Vec::with_capacity(grouped.len());
        for (expected, (t, clusters)) in grouped.into_iter().enumerate() {
            if t != expected {
                return Err(Error::SnapshotGap { missing: expected });
            }
            raw.push(RawSnapshot {
                label: None,
                clusters: clusters.into_values().collect(),
            });
        }
        Self::from_raw(raw)
    }

    pub fn to_raw(&self) -> Vec<RawSnapshot> {
        self.snapshots
            .iter()
            .map(|s| RawSnapshot {
                label: s.label.clone(),
                clusters: s
                    .clusters
                    .iter()
                    .map(|c| c.iter().map(|&m| self.name(m).to_owned()).collect())
                    .collect(),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = RawSequence {
            snapshots: self.to_raw(),
        };
        serde_json::to_string_pretty(&doc).expect("sequence serializes")
    }

    /// CSV export. Labels and empty snapshots cannot be represented in CSV.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(["t", "member", "cluster"])
            .expect("in-memory write");
        for snap in &self.snapshots {
            for (alpha, cluster) in snap.clusters.iter().enumerate() {
                for &m in cluster {
                    writer
                        .write_record([
                            snap.index.to_string(),
                            self.name(m).to_owned(),
                            alpha.to_string(),
                        ])
                        .expect("in-memory write");
                }
            }
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> Option<&Snapshot> {
        self.snapshots.get(t)
    }

    /// Number of snapshots, `T`.
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Size of the member vocabulary across all snapshots.
    pub fn member_count(&self) -> usize {
        self.names.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.snapshots.iter().map(Snapshot::len).sum()
    }

    pub fn name(&self, id: MemberId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn id(&self, name: &str) -> Option<MemberId> {
        self.ids.get(name).copied()
    }

    pub fn members_of(&self, g: ClusterRef) -> Option<&[MemberId]> {
        self.snapshots.get(g.time)?.cluster(g.cluster)
    }

    pub fn contains(&self, g: ClusterRef) -> bool {
        self.members_of(g).is_some()
    }

    /// All cluster handles in snapshot order, then cluster order.
    pub fn cluster_refs(&self) -> impl Iterator<Item = ClusterRef> + '_ {
        self.snapshots
            .iter()
            .flat_map(|s| (0..s.len()).map(move |c| ClusterRef::new(s.index, c)))
    }

    /// Members present in both snapshot `i` and snapshot `j`.
    pub fn residents(&self, i: usize, j: usize) -> Result<BTreeSet<MemberId>> {
        let (a, b) = match (self.snapshots.get(i), self.snapshots.get(j)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::OutOfRange(format!(
                    "snapshots ({i}, {j}) of a sequence of length {}",
                    self.len()
                )))
            }
        };
        let present: BTreeSet<MemberId> = a.members().collect();
        Ok(b.members().filter(|m| present.contains(m)).collect())
    }

    /// The first `len` snapshots as a sequence of their own.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::OutOfRange(format!(
                "prefix of length {len} of a sequence of length {}",
                self.len()
            )));
        }
        Self::from_raw(self.to_raw().into_iter().take(len).collect())
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        column: 0,
        message: e.to_string(),
    }
}
