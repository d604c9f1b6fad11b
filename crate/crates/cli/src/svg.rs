//! Static SVG snapshots of chords on the manifold. Output depends only on
//! its inputs, so repeated runs produce identical bytes.

use std::fmt::Write;

use chordflow::census::OgcCluster;
use chordflow::flow::FlowState;
use chordflow::manifold::ManifoldModel;
use nalgebra::DVector;

/// Samples per chart coordinate for the manifold outline.
pub const OUTLINE_SAMPLES: usize = 512;
/// Iso-lines per coordinate family for surfaces.
pub const ISO_LINES: usize = 12;
pub const SNAPSHOTS: usize = 8;
const WIDTH: f64 = 640.0;
const MARGIN: f64 = 0.05;

const PALETTE: [&str; SNAPSHOTS] = [
    "#2c7bb6", "#00a6ca", "#00ccbc", "#90eb9d", "#f9d057", "#f29e2e", "#e76818", "#d7191c",
];

/// Plane coordinates with y pointing up; ℝ³ and beyond use the isometric
/// view of the first three coordinates.
fn project(x: &DVector<f64>) -> (f64, f64) {
    match x.len() {
        1 => (x[0], 0.0),
        2 => (x[0], x[1]),
        _ => {
            let c = 3f64.sqrt() / 2.0;
            ((x[0] - x[1]) * c, x[2] - (x[0] + x[1]) / 2.0)
        }
    }
}

/// Snapshot times `t_final · (2^i − 1)/(2^(S−1) − 1)` for `i = 0..S`.
pub fn snapshot_times(t_final: f64) -> Vec<f64> {
    let last = (1u64 << (SNAPSHOTS - 1)) as f64 - 1.0;
    (0..SNAPSHOTS)
        .map(|i| t_final * ((1u64 << i) as f64 - 1.0) / last)
        .collect()
}

/// Index of the sample nearest each snapshot time (first on ties).
pub fn snapshot_indices(samples: &[FlowState], t_final: f64) -> Vec<usize> {
    snapshot_times(t_final)
        .into_iter()
        .map(|t| {
            samples
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |best, (i, s)| {
                    let d = (s.t - t).abs();
                    if d < best.1 {
                        (i, d)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}

/// Fixed five-decimal coordinate without a sign on zero.
fn c5(v: f64) -> String {
    let s = format!("{v:.5}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

struct Canvas {
    outline: Vec<Vec<(f64, f64)>>,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

impl Canvas {
    fn new(m: &ManifoldModel) -> Self {
        let lines = if m.k == 1 { 1 } else { ISO_LINES };
        let outline: Vec<Vec<(f64, f64)>> = m
            .sample_polylines(OUTLINE_SAMPLES, lines)
            .iter()
            .map(|l| l.iter().map(project).collect())
            .collect();
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for &(x, y) in outline.iter().flatten() {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        let extent = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-9);
        let pad = MARGIN * extent;
        Self {
            outline,
            x0: lo.0 - pad,
            y0: -hi.1 - pad,
            w: hi.0 - lo.0 + 2.0 * pad,
            h: hi.1 - lo.1 + 2.0 * pad,
        }
    }

    fn stroke(&self) -> f64 {
        0.004 * self.w.max(self.h)
    }

    fn begin(&self, out: &mut String, title: &str) {
        let height = (WIDTH * self.h / self.w).round().max(1.0);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}" width="{WIDTH}" height="{height}">"#,
            self.x0, self.y0, self.w, self.h
        );
        let _ = writeln!(out, "<title>{title}</title>");
        let _ = writeln!(
            out,
            r#"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}" fill="white"/>"#,
            self.x0, self.y0, self.w, self.h
        );
        let _ = writeln!(
            out,
            r##"<g fill="none" stroke="#606060" stroke-width="{:.6}" stroke-linejoin="round">"##,
            self.stroke() * 0.6
        );
        for line in &self.outline {
            let pts: Vec<String> = line.iter().map(|(x, y)| format!("{},{}", c5(*x), c5(-y))).collect();
            let _ = writeln!(out, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        out.push_str("</g>\n");
    }

    fn chord(&self, out: &mut String, p: &DVector<f64>, q: &DVector<f64>, color: &str) {
        let (a, b) = (project(p), project(q));
        let sw = self.stroke();
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="{sw:.6}"/>"#,
            c5(a.0),
            c5(-a.1),
            c5(b.0),
            c5(-b.1)
        );
        for (x, y) in [a, b] {
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="{:.6}" fill="{color}"/>"#,
                c5(x),
                c5(-y),
                1.5 * sw
            );
        }
    }
}

/// Chord snapshots along a trajectory.
pub fn render_flow(m: &ManifoldModel, samples: &[FlowState], t_final: f64) -> String {
    let canvas = Canvas::new(m);
    let mut out = String::new();
    canvas.begin(&mut out, "chord flow snapshots");
    for (color, i) in PALETTE.iter().zip(snapshot_indices(samples, t_final)) {
        if let Some(s) = samples.get(i) {
            canvas.chord(&mut out, &s.chord.jet_p.x, &s.chord.jet_q.x, color);
        }
    }
    out.push_str("</svg>\n");
    out
}

/// All cluster representatives of a census.
pub fn render_census(m: &ManifoldModel, clusters: &[OgcCluster]) -> String {
    let canvas = Canvas::new(m);
    let mut out = String::new();
    canvas.begin(&mut out, "orthogonal chord census");
    for (i, c) in clusters.iter().enumerate() {
        let r = &c.representative;
        let p = DVector::from_column_slice(&r.p);
        let q = DVector::from_column_slice(&r.q);
        canvas.chord(&mut out, &p, &q, PALETTE[i % PALETTE.len()]);
    }
    out.push_str("</svg>\n");
    out
}
