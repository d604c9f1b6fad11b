use std::f64::consts::PI;
use std::time::Instant;

use chordflow::chord::{boundary_angle, make_chord, ogc_residual};
use chordflow::flow::{run, FlowOutcome, FlowParams, ReportStride};
use chordflow::manifold::{ChartPoint, ManifoldModel, ManifoldSpec};

fn model(name: &str, params: &[(&str, f64)]) -> ManifoldModel {
    ManifoldModel::from_spec(&ManifoldSpec::builtin(name, params)).unwrap()
}

fn pt(chart: usize, coords: &[f64]) -> ChartPoint {
    ChartPoint::new(chart, coords.to_vec())
}

#[test]
fn ellipse_thirty_degree_chord_reaches_minor_axis() {
    let m = model("ellipse", &[]);
    let u = (2.0 * (PI / 6.0).tan()).atan();
    let c = make_chord(&m, pt(0, &[u]), pt(0, &[u + PI])).unwrap();
    let start = Instant::now();
    let traj = run(&m, c, &FlowParams::default()).unwrap();
    eprintln!("ellipse: {:?}, {} samples", start.elapsed(), traj.samples.len());
    let FlowOutcome::ConvergedToOgc { state, t_final, .. } = &traj.outcome else {
        panic!("unexpected outcome {}", traj.outcome.kind());
    };
    eprintln!("t_final {t_final}");
    let (a, b) = (&state.chord.jet_p.x, &state.chord.jet_q.x);
    let (top, bottom) = if a[1] > 0.0 { (a, b) } else { (b, a) };
    assert!(top[0].abs() < 1e-4 && (top[1] - 0.5).abs() < 1e-4, "{top}");
    assert!(bottom[0].abs() < 1e-4 && (bottom[1] + 0.5).abs() < 1e-4, "{bottom}");
}

/// Implicit closed form of h' = −2h/√(1+h²): F(h) = F(h₀) − 2t.
fn strip_invariant(h: f64) -> f64 {
    let s = (1.0 + h * h).sqrt();
    s + h.ln() - (1.0 + s).ln()
}

#[test]
fn strip_height_follows_closed_form() {
    let m = model("strip-lines", &[]);
    let c = make_chord(&m, pt(0, &[-0.5]), pt(1, &[0.5])).unwrap();
    let params = FlowParams {
        stride: ReportStride::Every(0.01),
        ..FlowParams::default()
    };
    let traj = run(&m, c, &params).unwrap();
    assert!(
        matches!(traj.outcome, FlowOutcome::ConvergedToOgc { .. }),
        "{}",
        traj.outcome.kind()
    );
    let f0 = strip_invariant(1.0);
    for s in &traj.samples[1..] {
        let h = s.chord.jet_q.x[1] - s.chord.jet_p.x[1];
        let drift = strip_invariant(h) - (f0 - 2.0 * s.t);
        assert!(drift.abs() < 1e-8, "t {} drift {drift:e}", s.t);
        // h e^{2t} increases, so the exponential is a lower bound.
        assert!(h > (-2.0 * s.t).exp(), "t {} h {}", s.t, h);
    }
    let last = traj.outcome.state();
    assert!(last.chord.jet_q.x[1] - last.chord.jet_p.x[1] < 1e-8);
}

#[test]
fn convex_ellipse_chord_shrinks_in_finite_time() {
    let m = model("ellipse", &[]);
    let c = make_chord(&m, pt(0, &[2.0]), pt(0, &[0.8])).unwrap();
    let a = boundary_angle(&c, &m).unwrap();
    assert!(a.is_convex());
    assert!(ogc_residual(&c) > 1e-3);
    let traj = run(&m, c, &FlowParams::default()).unwrap();
    let FlowOutcome::ShrunkToPoint { t_final, .. } = traj.outcome else {
        panic!("unexpected outcome {}", traj.outcome.kind());
    };
    assert!(t_final.is_finite() && t_final < 2.0);
    let mut prev_ratio = f64::NEG_INFINITY;
    for s in &traj.samples {
        let th = s.theta.as_ref().unwrap();
        assert!(th.f0.min(th.f1) >= -1e-10);
        let ratio = (th.f0 + th.f1) / s.ell;
        assert!(ratio >= prev_ratio - 1e-10);
        prev_ratio = ratio;
    }
}
