mod common;

use std::f64::consts::PI;

use chordflow::chord::make_chord;
use chordflow::flow::{integrate_fixed, rk4_step};
use chordflow::manifold::{ChartPoint, ManifoldModel, ManifoldSpec};
use chordflow::verify::ellipse_central_parameter;

const A: f64 = 1.0;
const B: f64 = 0.5;

fn setup() -> (ManifoldModel, f64, f64) {
    let m = ManifoldModel::from_spec(&ManifoldSpec::builtin("ellipse", &[])).unwrap();
    let up = ellipse_central_parameter(PI / 6.0, A, B);
    (m, up, up + PI)
}

fn chord_at(m: &ManifoldModel, up: f64, uq: f64) -> chordflow::chord::Chord {
    make_chord(m, ChartPoint::new(0, vec![up]), ChartPoint::new(0, vec![uq])).unwrap()
}

/// Chart coordinates of a chord, unwrapped next to a reference pair.
fn coords_near(c: &chordflow::chord::Chord, near: (f64, f64)) -> (f64, f64) {
    let unwrap = |x: f64, r: f64| x - (2.0 * PI) * ((x - r) / (2.0 * PI)).round();
    (unwrap(c.p.coords[0], near.0), unwrap(c.q.coords[0], near.1))
}

#[test]
fn one_rk4_step_matches_euler_micro_steps() {
    let (m, up, uq) = setup();
    let dt = 1e-3;
    let next = rk4_step(&m, &chord_at(&m, up, uq), dt).unwrap();
    let (ep, eq) = common::ellipse_euler(A, B, up, uq, dt / 1000.0, 1000);
    let (rp, rq) = coords_near(&next, (ep, eq));
    let err = (rp - ep).abs().max((rq - eq).abs());
    assert!(err < 1e-8, "RK4 vs Euler micro-steps differ by {err:e}");
}

#[test]
fn rk4_is_fourth_order_on_ellipse() {
    let (m, up, uq) = setup();
    let reference = common::ellipse_reference(A, B, up, uq, 1.0, 100_000);
    let errors: Vec<f64> = [0.1f64, 0.05, 0.025]
        .iter()
        .map(|&dt| {
            let steps = (1.0 / dt).round() as usize;
            let traj = integrate_fixed(&m, &chord_at(&m, up, uq), dt, steps).unwrap();
            let (p, q) = coords_near(traj.last().unwrap(), reference);
            (p - reference.0).abs().max((q - reference.1).abs())
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.5, "errors {errors:?}, order {order}");
    }
}
