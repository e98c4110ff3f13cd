//! Alluvial diagrams: one column per snapshot, one block per cluster and
//! ribbons for the members shared by clusters of neighbouring snapshots.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dynamic::{DcId, DynamicClustering};
use crate::similarity::Relations;
use crate::snapshot::{ClusterRef, ClusteringSequence};

pub const PALETTE: [&str; 12] = [
    "#1f78b4", "#33a02c", "#e31a1c", "#ff7f00", "#6a3d9a", "#b15928", "#a6cee3", "#b2df8a",
    "#fb9a99", "#fdbf6f", "#cab2d6", "#8c8c3c",
];

pub fn color(dc: DcId) -> &'static str {
    PALETTE[(dc.0 % PALETTE.len() as u64) as usize]
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderOptions {
    pub block_width: f64,
    /// Vertical space between blocks of one column.
    pub gap: f64,
    /// Horizontal space between neighbouring columns.
    pub column_spacing: f64,
    pub margin: f64,
    /// Multiplier from layout units to the SVG's width and height.
    pub scale: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            block_width: 12.0,
            gap: 4.0,
            column_spacing: 60.0,
            margin: 10.0,
            scale: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Block {
    pub cluster: ClusterRef,
    pub dc: DcId,
    pub color: &'static str,
    pub size: usize,
    pub x: f64,
    pub y: f64,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flow {
    pub from: ClusterRef,
    pub to: ClusterRef,
    pub magnitude: usize,
    /// Top of the ribbon where it leaves `from`.
    pub y_from: f64,
    /// Top of the ribbon where it enters `to`.
    pub y_to: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlluvialLayout {
    pub width: f64,
    pub height: f64,
    pub block_width: f64,
    pub columns: Vec<Column>,
    pub flows: Vec<Vec<Flow>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub label: String,
    pub x: f64,
    /// Blocks from top to bottom, grouped by DC.
    pub blocks: Vec<Block>,
}

const LABEL_SPACE: f64 = 14.0;

impl AlluvialLayout {
    pub fn new(seq: &ClusteringSequence, dc: &DynamicClustering, opts: &RenderOptions) -> Self {
        let rels = Relations::build(seq);
        let mut columns = Vec::with_capacity(seq.len());
        let mut tallest: f64 = 0.0;
        for snap in seq.snapshots() {
            let t = snap.index();
            let x = opts.margin + t as f64 * (opts.block_width + opts.column_spacing);
            let mut order: Vec<usize> = (0..snap.len()).collect();
            order.sort_by_key(|&c| (dc.labels()[t][c], c));
            let mut y = opts.margin + LABEL_SPACE;
            let mut blocks = Vec::with_capacity(order.len());
            for c in order {
                let id = dc.labels()[t][c];
                let size = snap.clusters()[c].len();
                blocks.push(Block {
                    cluster: ClusterRef::new(t, c),
                    dc: id,
                    color: color(id),
                    size,
                    x,
                    y,
                    height: size as f64,
                });
                y += size as f64 + opts.gap;
            }
            tallest = tallest.max(y - opts.gap);
            let label = snap.label().map_or_else(|| t.to_string(), str::to_string);
            columns.push(Column { label, x, blocks });
        }

        let mut flows = Vec::with_capacity(seq.len().saturating_sub(1));
        for t in 0..seq.len().saturating_sub(1) {
            let rank = |col: &Column| {
                let mut r = vec![0; col.blocks.len()];
                for (pos, b) in col.blocks.iter().enumerate() {
                    r[b.cluster.cluster] = pos;
                }
                r
            };
            let (left, right) = (&columns[t], &columns[t + 1]);
            let (rank_l, rank_r) = (rank(left), rank(right));
            let mut pairs: Vec<(usize, usize, usize)> = rels
                .overlaps(t)
                .map(|(a, b, n)| (a, b, n as usize))
                .collect();
            // ribbons leave each block in the order of their targets
            pairs.sort_by_key(|&(a, b, _)| (rank_l[a], rank_r[b]));
            let mut out_offset = vec![0.0; left.blocks.len()];
            let mut in_offset = vec![0.0; right.blocks.len()];
            let mut step = Vec::with_capacity(pairs.len());
            for &(a, b, n) in &pairs {
                let y_from = left.blocks[rank_l[a]].y + out_offset[a];
                out_offset[a] += n as f64;
                step.push(Flow {
                    from: ClusterRef::new(t, a),
                    to: ClusterRef::new(t + 1, b),
                    magnitude: n,
                    y_from,
                    y_to: 0.0,
                });
            }
            // and enter their targets in the order of their sources
            let mut by_target: Vec<usize> = (0..step.len()).collect();
            by_target.sort_by_key(|&i| (rank_r[step[i].to.cluster], rank_l[step[i].from.cluster]));
            for i in by_target {
                let b = step[i].to.cluster;
                step[i].y_to = right.blocks[rank_r[b]].y + in_offset[b];
                in_offset[b] += step[i].magnitude as f64;
            }
            flows.push(step);
        }

        let width = if seq.is_empty() {
            2.0 * opts.margin
        } else {
            2.0 * opts.margin
                + seq.len() as f64 * opts.block_width
                + (seq.len() - 1) as f64 * opts.column_spacing
        };
        AlluvialLayout {
            width,
            height: tallest.max(opts.margin + LABEL_SPACE) + opts.margin,
            block_width: opts.block_width,
            columns,
            flows,
        }
    }

    pub fn block(&self, g: ClusterRef) -> Option<&Block> {
        self.columns
            .get(g.time)?
            .blocks
            .iter()
            .find(|b| b.cluster == g)
    }

    /// Summed magnitude of the ribbons entering `g`.
    pub fn inflow(&self, g: ClusterRef) -> usize {
        match g.time.checked_sub(1).and_then(|t| self.flows.get(t)) {
            Some(step) => step.iter().filter(|f| f.to == g).map(|f| f.magnitude).sum(),
            None => 0,
        }
    }

    /// Summed magnitude of the ribbons leaving `g`.
    pub fn outflow(&self, g: ClusterRef) -> usize {
        match self.flows.get(g.time) {
            Some(step) => step
                .iter()
                .filter(|f| f.from == g)
                .map(|f| f.magnitude)
                .sum(),
            None => 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("layout serializes");
        out.push('\n');
        out
    }

    pub fn to_svg(&self, opts: &RenderOptions) -> String {
        let mut svg = String::new();
        let w = num(self.width);
        let h = num(self.height);
        let _ = writeln!(
            svg,
            r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
        );
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {w} {h}">"#,
            num(self.width * opts.scale),
            num(self.height * opts.scale),
        );
        let _ = writeln!(svg, "<title>Alluvial diagram</title>");

        let _ = writeln!(svg, r#"<g fill-opacity="0.45" stroke="none">"#);
        for step in &self.flows {
            for f in step {
                let (Some(a), Some(b)) = (self.block(f.from), self.block(f.to)) else {
                    continue;
                };
                let m = f.magnitude as f64;
                let x0 = a.x + self.block_width;
                let x1 = b.x;
                let mx = (x0 + x1) / 2.0;
                let my = (f.y_from + f.y_to) / 2.0;
                let d = format!(
                    "M{} {} Q{} {} {} {} T{} {} L{} {} Q{} {} {} {} T{} {} Z",
                    num(x0),
                    num(f.y_from),
                    num((x0 + mx) / 2.0),
                    num(f.y_from),
                    num(mx),
                    num(my),
                    num(x1),
                    num(f.y_to),
                    num(x1),
                    num(f.y_to + m),
                    num((x1 + mx) / 2.0),
                    num(f.y_to + m),
                    num(mx),
                    num(my + m),
                    num(x0),
                    num(f.y_from + m),
                );
                let _ = writeln!(
                    svg,
                    r#"<path d="{d}" fill="{}"><title>{} to {}: {}</title></path>"#,
                    a.color, f.from, f.to, f.magnitude
                );
            }
        }
        let _ = writeln!(svg, "</g>");

        let _ = writeln!(svg, r##"<g stroke="#333333" stroke-width="0.3">"##);
        for col in &self.columns {
            for b in &col.blocks {
                let _ = writeln!(
                    svg,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"><title>{} {} ({} members)</title></rect>"#,
                    num(b.x),
                    num(b.y),
                    num(self.block_width),
                    num(b.height),
                    b.color,
                    b.cluster,
                    b.dc,
                    b.size
                );
            }
        }
        let _ = writeln!(svg, "</g>");

        let _ = writeln!(
            svg,
            r#"<g font-family="sans-serif" font-size="8" text-anchor="middle">"#
        );
        for col in &self.columns {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}">{}</text>"#,
                num(col.x + self.block_width / 2.0),
                num(opts.margin + 8.0),
                escape(&col.label)
            );
        }
        let _ = writeln!(svg, "</g>");
        svg.push_str("</svg>\n");
        svg
    }
}

pub fn render_svg(
    seq: &ClusteringSequence,
    dc: &DynamicClustering,
    opts: &RenderOptions,
) -> String {
    AlluvialLayout::new(seq, dc, opts).to_svg(opts)
}

/// Fixed-point formatting with trailing zeros removed.
fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track;

    fn fixture() -> ClusteringSequence {
        ClusteringSequence::from_clusters(&[
            vec![vec!["a", "b", "c"], vec!["d", "e"]],
            vec![vec!["a", "b"], vec!["c", "d", "f"]],
            vec![vec!["a", "b", "c", "d", "f", "g"]],
        ])
        .unwrap()
    }

    #[test]
    fn number_format() {
        assert_eq!(num(3.0), "3");
        assert_eq!(num(2.5), "2.5");
        assert_eq!(num(1.0 / 3.0), "0.333");
        assert_eq!(num(-0.0001), "0");
    }

    #[test]
    fn heights_and_flow_balance() {
        let seq = fixture();
        let dc = track(&seq, 1);
        let layout = AlluvialLayout::new(&seq, &dc, &RenderOptions::default());
        for t in 0..seq.len() {
            let snap = seq.snapshot(t).unwrap();
            let prev = t
                .checked_sub(1)
                .map(|p| seq.snapshot(p).unwrap().assignment());
            for (c, members) in snap.clusters().iter().enumerate() {
                let g = ClusterRef::new(t, c);
                let block = layout.block(g).unwrap();
                assert_eq!(block.height, members.len() as f64);
                let new = members
                    .iter()
                    .filter(|m| prev.as_ref().is_none_or(|p| !p.contains_key(m)))
                    .count();
                assert_eq!(members.len() - layout.inflow(g), new, "{g}");
            }
        }
        assert_eq!(layout.outflow(ClusterRef::new(0, 1)), 1);
    }

    #[test]
    fn ribbons_stay_inside_blocks() {
        let seq = fixture();
        let layout = AlluvialLayout::new(&seq, &track(&seq, 1), &RenderOptions::default());
        for step in &layout.flows {
            for f in step {
                let (a, b) = (layout.block(f.from).unwrap(), layout.block(f.to).unwrap());
                assert!(f.y_from >= a.y && f.y_from + f.magnitude as f64 <= a.y + a.height);
                assert!(f.y_to >= b.y && f.y_to + f.magnitude as f64 <= b.y + b.height);
            }
        }
    }

    #[test]
    fn single_snapshot_and_determinism() {
        let seq = ClusteringSequence::from_clusters(&[vec![vec!["a", "b"], vec!["c"]]]).unwrap();
        let dc = track(&seq, 1);
        let svg = render_svg(&seq, &dc, &RenderOptions::default());
        assert_eq!(svg.matches("<rect").count(), 2);
        assert_eq!(svg.matches("<path").count(), 0);
        assert_eq!(svg, render_svg(&seq, &dc, &RenderOptions::default()));
    }

    #[test]
    fn labels_are_escaped() {
        let raw = vec![crate::snapshot::RawSnapshot {
            label: Some("<2020 & co>".into()),
            clusters: vec![vec!["a".into()]],
        }];
        let seq = ClusteringSequence::from_raw(raw).unwrap();
        let svg = render_svg(&seq, &track(&seq, 1), &RenderOptions::default());
        assert!(svg.contains("&lt;2020 &amp; co&gt;"));
    }
}
