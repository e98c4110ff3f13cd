//! Scans of the history parameter.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifecycle::{summary_stats, total_consistency, ConsistencyMode};
use crate::similarity::Relations;
use crate::snapshot::ClusteringSequence;
use crate::tracking::track_with;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub history: usize,
    pub dc_count: usize,
    pub mean_lifespan: Option<f64>,
    pub weighted_mean_lifespan: Option<f64>,
    pub lifespan_histogram: BTreeMap<usize, usize>,
    pub consistency_all: Option<f64>,
    pub consistency_resident: Option<f64>,
    /// Set on the rows with the highest `consistency_all`.
    pub best: bool,
}

#[derive(Serialize)]
struct CsvRow {
    x: usize,
    dc_count: usize,
    mean_lifespan: Option<f64>,
    weighted_mean_lifespan: Option<f64>,
    consistency_all: Option<f64>,
    consistency_resident: Option<f64>,
}

pub fn sweep_point(seq: &ClusteringSequence, rels: &Relations, history: usize) -> SweepRow {
    let dc = track_with(seq, rels, history);
    let stats = summary_stats(&dc);
    SweepRow {
        history,
        dc_count: stats.dc_count,
        mean_lifespan: stats.mean_lifespan,
        weighted_mean_lifespan: stats.weighted_mean_lifespan,
        lifespan_histogram: stats.lifespan_histogram,
        consistency_all: total_consistency(&dc, seq, ConsistencyMode::AllMembers),
        consistency_resident: total_consistency(&dc, seq, ConsistencyMode::ResidentsOnly),
        best: false,
    }
}

pub fn check_range(range: &RangeInclusive<usize>) -> Result<()> {
    if range.start() > range.end() {
        return Err(Error::OutOfRange(format!(
            "history range {}..={} is empty",
            range.start(),
            range.end()
        )));
    }
    Ok(())
}

/// Evaluates every history value in `range` one after the other.
pub fn sweep(seq: &ClusteringSequence, range: RangeInclusive<usize>) -> Result<Vec<SweepRow>> {
    check_range(&range)?;
    let rels = Relations::build(seq);
    let mut rows: Vec<SweepRow> = range.map(|x| sweep_point(seq, &rels, x)).collect();
    mark_best(&mut rows);
    Ok(rows)
}

/// Flags the rows whose total consistency equals the maximum.
pub fn mark_best(rows: &mut [SweepRow]) {
    let max = rows
        .iter()
        .filter_map(|r| r.consistency_all)
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
    for row in rows.iter_mut() {
        row.best = matches!((row.consistency_all, max), (Some(c), Some(m)) if m - c < 1e-12);
    }
}

/// CSV with one line per row; undefined values are empty fields.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in rows {
        writer
            .serialize(CsvRow {
                x: r.history,
                dc_count: r.dc_count,
                mean_lifespan: r.mean_lifespan,
                weighted_mean_lifespan: r.weighted_mean_lifespan,
                consistency_all: r.consistency_all,
                consistency_resident: r.consistency_resident,
            })
            .expect("in-memory write");
    }
    if rows.is_empty() {
        writer
            .write_record([
                "x",
                "dc_count",
                "mean_lifespan",
                "weighted_mean_lifespan",
                "consistency_all",
                "consistency_resident",
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_fixture_is_flat() {
        let snaps: Vec<Vec<Vec<&str>>> = (0..5)
            .map(|_| vec![vec!["a", "b"], vec!["c", "d"]])
            .collect();
        let seq = ClusteringSequence::from_clusters(&snaps).unwrap();
        let rows = sweep(&seq, 1..=4).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows
            .iter()
            .all(|r| r.dc_count == 2 && r.consistency_all == Some(1.0) && r.best));
    }

    #[test]
    fn single_point_and_empty_range() {
        let seq = ClusteringSequence::from_clusters(&[vec![vec!["a"]], vec![vec!["a"]]]).unwrap();
        assert_eq!(sweep(&seq, 2..=2).unwrap().len(), 1);
        #[allow(clippy::reversed_empty_ranges)]
        let err = sweep(&seq, 3..=2).unwrap_err();
        assert!(matches!(err, Error::OutOfRange(_)));
    }

    #[test]
    fn csv_layout() {
        let seq = ClusteringSequence::from_clusters(&[vec![vec!["a"]], vec![vec!["b"]]]).unwrap();
        let csv = to_csv(&sweep(&seq, 1..=1).unwrap());
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("x,dc_count,mean_lifespan,weighted_mean_lifespan,consistency_all,consistency_resident")
        );
        assert_eq!(lines.next(), Some("1,2,1.0,1.0,,"));
        assert!(to_csv(&[]).starts_with("x,dc_count"));
    }
}
