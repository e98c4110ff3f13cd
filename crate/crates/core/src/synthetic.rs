//! Seeded scenario generator with planted dynamic clusters.
//!
//! Randomness comes from ChaCha8 seeded with the scenario's 64-bit seed, so
//! a scenario file always produces the same fixture on every platform.
//! Member ids are `m0, m1, ...` in order of creation; members introduced by
//! turnover continue the same counter.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snapshot::{ClusteringSequence, RawSnapshot};

/// A planted DC alive on the inclusive snapshot interval `[start, end]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedDc {
    pub size: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioEventKind {
    /// `fraction` of the members form a separate cluster for `duration`
    /// snapshots, then rejoin.
    Splinter,
    /// A sub-cluster starting at `fraction` of the members grows step by
    /// step over `duration` snapshots until it holds them all.
    Transition,
    /// `fraction` of the members leave for good and form a new DC that lives
    /// for `duration` snapshots.
    Split,
    /// `fraction` of the members join DC `into`; the rest leave the system
    /// and the DC ends.
    Merge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEvent {
    pub kind: ScenarioEventKind,
    pub dc: usize,
    pub start: usize,
    #[serde(default = "one")]
    pub duration: usize,
    pub fraction: f64,
    /// Receiving DC of a merge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub into: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// Number of snapshots.
    pub snapshots: usize,
    pub dcs: Vec<PlantedDc>,
    #[serde(default)]
    pub events: Vec<ScenarioEvent>,
    /// Per member and snapshot probability of being replaced by a new member.
    #[serde(default)]
    pub turnover_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    /// One DC of 30 members over 10 snapshots with a three-snapshot splinter
    /// and, later, a three-snapshot transition.
    pub fn splinter_and_transition(seed: u64) -> Self {
        ScenarioSpec {
            snapshots: 10,
            dcs: vec![PlantedDc {
                size: 30,
                start: 0,
                end: 9,
            }],
            events: vec![
                ScenarioEvent {
                    kind: ScenarioEventKind::Splinter,
                    dc: 0,
                    start: 2,
                    duration: 3,
                    fraction: 0.3,
                    into: None,
                },
                ScenarioEvent {
                    kind: ScenarioEventKind::Transition,
                    dc: 0,
                    start: 6,
                    duration: 3,
                    fraction: 0.3,
                    into: None,
                },
            ],
            turnover_rate: 0.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Scenario(msg));
        if self.snapshots == 0 {
            return bad("at least one snapshot is required".into());
        }
        if !(0.0..=1.0).contains(&self.turnover_rate) {
            return bad(format!(
                "turnover rate {} is not a probability",
                self.turnover_rate
            ));
        }
        for (i, dc) in self.dcs.iter().enumerate() {
            if dc.size == 0 {
                return bad(format!("dc {i} has no members"));
            }
            if dc.start > dc.end || dc.end >= self.snapshots {
                return bad(format!(
                    "dc {i} lifespan [{}, {}] is outside the sequence",
                    dc.start, dc.end
                ));
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            let Some(host) = self.dcs.get(e.dc) else {
                return bad(format!("event {i} refers to unknown dc {}", e.dc));
            };
            if !(e.fraction > 0.0 && e.fraction < 1.0) {
                return bad(format!(
                    "event {i}: fraction {} is not in (0, 1)",
                    e.fraction
                ));
            }
            if e.duration == 0 {
                return bad(format!("event {i}: duration must be at least 1"));
            }
            let end = match e.kind {
                ScenarioEventKind::Merge => e.start,
                _ => e.start + e.duration - 1,
            };
            if e.start < host.start || end > host.end {
                return bad(format!("event {i} is outside the lifespan of dc {}", e.dc));
            }
            if e.kind == ScenarioEventKind::Merge {
                if e.start == host.start {
                    return bad(format!(
                        "event {i}: a dc cannot merge at its first snapshot"
                    ));
                }
                match e.into.and_then(|d| self.dcs.get(d).map(|p| (d, p))) {
                    Some((d, p)) if d != e.dc && p.start < e.start && e.start <= p.end => {}
                    _ => {
                        return bad(format!(
                            "event {i}: merge target must be another dc alive before and at {}",
                            e.start
                        ))
                    }
                }
            }
        }
        for (i, a) in self.events.iter().enumerate() {
            for b in &self.events[i + 1..] {
                let transient = |k| {
                    matches!(
                        k,
                        ScenarioEventKind::Splinter | ScenarioEventKind::Transition
                    )
                };
                if a.dc == b.dc
                    && transient(a.kind)
                    && transient(b.kind)
                    && a.start < b.start + b.duration
                    && b.start < a.start + a.duration
                {
                    return bad(format!(
                        "overlapping splinter/transition events on dc {}",
                        a.dc
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Generated fixture: the sequence and the planted DC of every cluster.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub sequence: ClusteringSequence,
    pub truth: Vec<Vec<usize>>,
}

struct Pool {
    members: Vec<String>,
    start: usize,
    end: usize,
}

struct Ids(usize);

impl Ids {
    fn fresh(&mut self) -> String {
        let id = format!("m{}", self.0);
        self.0 += 1;
        id
    }
}

/// Number of members that make up `fraction` of `size`, kept within
/// `[1, size - 1]` when `proper` is set.
fn portion(size: usize, fraction: f64, proper: bool, event: usize) -> Result<usize> {
    let k = (size as f64 * fraction).round() as usize;
    if k == 0 || (proper && k >= size) || k > size {
        return Err(Error::Scenario(format!(
            "event {event}: fraction {fraction} of {size} members gives an empty cluster"
        )));
    }
    Ok(k)
}

pub fn generate(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut ids = Ids(0);
    let mut pools: Vec<Pool> = spec
        .dcs
        .iter()
        .map(|dc| Pool {
            members: (0..dc.size).map(|_| ids.fresh()).collect(),
            start: dc.start,
            end: dc.end,
        })
        .collect();
    // detached member positions per transient event, drawn when it starts
    let mut detached: Vec<Vec<usize>> = vec![Vec::new(); spec.events.len()];

    let mut raw = Vec::with_capacity(spec.snapshots);
    let mut truth = Vec::with_capacity(spec.snapshots);
    for t in 0..spec.snapshots {
        if spec.turnover_rate > 0.0 {
            for pool in pools.iter_mut().filter(|p| p.start < t && t <= p.end) {
                for m in pool.members.iter_mut() {
                    if rng.gen_bool(spec.turnover_rate) {
                        *m = ids.fresh();
                    }
                }
            }
        }

        for (i, e) in spec.events.iter().enumerate().filter(|(_, e)| e.start == t) {
            match e.kind {
                ScenarioEventKind::Splinter | ScenarioEventKind::Transition => {
                    let mut order: Vec<usize> = (0..pools[e.dc].members.len()).collect();
                    order.shuffle(&mut rng);
                    detached[i] = order;
                }
                ScenarioEventKind::Split => {
                    let host = &mut pools[e.dc];
                    let k = portion(host.members.len(), e.fraction, true, i)?;
                    host.members.shuffle(&mut rng);
                    let leaving = host.members.split_off(host.members.len() - k);
                    pools.push(Pool {
                        members: leaving,
                        start: t,
                        end: t + e.duration - 1,
                    });
                }
                ScenarioEventKind::Merge => {
                    let into = e.into.expect("validated");
                    let donor = &mut pools[e.dc];
                    let k = portion(donor.members.len(), e.fraction, false, i)?;
                    donor.members.shuffle(&mut rng);
                    let moving: Vec<String> = donor.members.drain(..k).collect();
                    donor.end = t - 1;
                    pools[into].members.extend(moving);
                }
            }
        }

        let mut clusters = Vec::new();
        let mut labels = Vec::new();
        for (d, pool) in pools.iter().enumerate() {
            if t < pool.start || t > pool.end {
                continue;
            }
            let active = spec.events.iter().enumerate().find(|(_, e)| {
                e.dc == d
                    && matches!(
                        e.kind,
                        ScenarioEventKind::Splinter | ScenarioEventKind::Transition
                    )
                    && e.start <= t
                    && t < e.start + e.duration
            });
            let size = pool.members.len();
            let part = match active {
                None => 0,
                Some((i, e)) if e.kind == ScenarioEventKind::Splinter => {
                    portion(size, e.fraction, true, i)?
                }
                Some((i, e)) => {
                    let step = (t - e.start) as f64 / e.duration as f64;
                    let share = e.fraction + (1.0 - e.fraction) * step;
                    portion(size, share, false, i)?.min(size - 1).max(1)
                }
            };
            if part == 0 || size < 2 {
                clusters.push(pool.members.clone());
                labels.push(d);
                continue;
            }
            let order = &detached[active.expect("part > 0").0];
            let mut inside = vec![false; size];
            for &p in order.iter().filter(|&&p| p < size).take(part) {
                inside[p] = true;
            }
            let (mut rest, mut group) = (Vec::new(), Vec::new());
            for (p, m) in pool.members.iter().enumerate() {
                if inside[p] {
                    group.push(m.clone());
                } else {
                    rest.push(m.clone());
                }
            }
            clusters.push(rest);
            clusters.push(group);
            labels.push(d);
            labels.push(d);
        }
        raw.push(RawSnapshot {
            label: None,
            clusters,
        });
        truth.push(labels);
    }
    Ok(Scenario {
        sequence: ClusteringSequence::from_raw(raw)?,
        truth,
    })
}
