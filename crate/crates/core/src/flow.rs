//! Integration of the chord shortening flow in chart coordinates.
//!
//! Each endpoint moves with ambient velocity −η^T, pulled back to its chart.
//! Steps are classical RK4 with step-doubling error control; steps that
//! lengthen the chord are rejected and retried with half the step.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::chord::{boundary_angle, conormal_data, Chord, EndpointField};
use crate::manifold::{ChartPoint, ManifoldModel};
use crate::{Error, Result};

/// When trajectory samples are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStride {
    /// Every accepted step.
    EveryStep,
    /// At multiples of the given reporting interval only; steps are cut to
    /// land on them exactly.
    Every(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    pub dt_init: f64,
    pub dt_max: f64,
    pub t_max: f64,
    /// Length below which the chord counts as shrunk to a point.
    pub eps_shrink: f64,
    /// Residual ‖η^T‖ below which the chord counts as orthogonal.
    pub eps_ogc: f64,
    /// Consecutive accepted steps below `eps_ogc` needed for convergence.
    pub ogc_dwell: usize,
    pub safety: f64,
    /// Steps are capped at `shrink_step_cap · ℓ`.
    pub shrink_step_cap: f64,
    /// Relative step-doubling tolerance, scaled by `1 + ‖state‖∞`.
    pub tolerance: f64,
    pub max_halvings: usize,
    pub stride: ReportStride,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            dt_init: 1e-2,
            dt_max: 1e-1,
            t_max: 200.0,
            eps_shrink: 1e-6,
            eps_ogc: 1e-8,
            ogc_dwell: 10,
            safety: 0.9,
            shrink_step_cap: 0.2,
            tolerance: 1e-9,
            max_halvings: 20,
            stride: ReportStride::EveryStep,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt_init", self.dt_init),
            ("dt_max", self.dt_max),
            ("t_max", self.t_max),
            ("eps_shrink", self.eps_shrink),
            ("eps_ogc", self.eps_ogc),
            ("safety", self.safety),
            ("shrink_step_cap", self.shrink_step_cap),
            ("tolerance", self.tolerance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.ogc_dwell == 0 {
            return Err(Error::InvalidParams("ogc_dwell must be at least 1".into()));
        }
        if self.safety > 1.0 {
            return Err(Error::InvalidParams(format!(
                "safety must not exceed 1, got {}",
                self.safety
            )));
        }
        if let ReportStride::Every(dt) = self.stride {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "report interval must be positive, got {dt}"
                )));
            }
        }
        Ok(())
    }
}

/// A chord at a time, with the diagnostics recorded in trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub chord: Chord,
    pub ell: f64,
    pub eta_t_norm_sq: f64,
    /// Boundary angles, for planar domain boundaries.
    pub theta: Option<EndpointField<f64>>,
}

impl FlowState {
    pub fn new(m: &ManifoldModel, t: f64, chord: Chord) -> Result<Self> {
        let eta_t_norm_sq = conormal_data(&chord).eta_t.l2_norm_sq();
        let theta = if m.is_planar_domain_boundary {
            Some(boundary_angle(&chord, m)?.theta)
        } else {
            None
        };
        Ok(Self {
            t,
            ell: chord.ell,
            eta_t_norm_sq,
            theta,
            chord,
        })
    }

    pub fn residual(&self) -> f64 {
        self.eta_t_norm_sq.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowOutcome {
    ShrunkToPoint {
        t_final: f64,
        limit_point: DVector<f64>,
        state: FlowState,
    },
    ConvergedToOgc {
        t_final: f64,
        residual: f64,
        state: FlowState,
    },
    BudgetExhausted {
        state: FlowState,
    },
    StepFailure {
        t: f64,
        reason: String,
        state: FlowState,
    },
}

impl FlowOutcome {
    pub fn kind(&self) -> &'static str {
        match self {
            FlowOutcome::ShrunkToPoint { .. } => "shrunk_to_point",
            FlowOutcome::ConvergedToOgc { .. } => "converged_to_ogc",
            FlowOutcome::BudgetExhausted { .. } => "budget_exhausted",
            FlowOutcome::StepFailure { .. } => "step_failure",
        }
    }

    /// Last state reached by the integrator.
    pub fn state(&self) -> &FlowState {
        match self {
            FlowOutcome::ShrunkToPoint { state, .. }
            | FlowOutcome::ConvergedToOgc { state, .. }
            | FlowOutcome::BudgetExhausted { state }
            | FlowOutcome::StepFailure { state, .. } => state,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<FlowState>,
    pub outcome: FlowOutcome,
}

/// Chart velocities of both endpoints: the pullbacks of −η^T.
pub fn velocity(c: &Chord) -> (DVector<f64>, DVector<f64>) {
    let eta_p = (&c.jet_p.x - &c.jet_q.x) / c.ell;
    // The pullback annihilates normal components, so projecting first is
    // unnecessary.
    let vp = c.jet_p.pullback(&(-&eta_p));
    let vq = c.jet_q.pullback(&eta_p);
    (vp, vq)
}

fn shifted(pt: &ChartPoint, v: &DVector<f64>, h: f64) -> ChartPoint {
    let coords = pt.coords.iter().zip(v.iter()).map(|(c, d)| c + h * d).collect();
    ChartPoint::new(pt.chart, coords)
}

/// One classical RK4 step of size `dt`, without acceptance checks. Chart
/// indices stay fixed and coordinates are not reduced.
pub fn rk4_step(m: &ManifoldModel, c: &Chord, dt: f64) -> Result<Chord> {
    let (k1p, k1q) = velocity(c);
    let stage = |h: f64, vp: &DVector<f64>, vq: &DVector<f64>| -> Result<Chord> {
        let p = shifted(&c.p, vp, h);
        let q = shifted(&c.q, vq, h);
        crate::chord::make_chord(m, p, q)
    };
    let c2 = stage(dt / 2.0, &k1p, &k1q)?;
    let (k2p, k2q) = velocity(&c2);
    let c3 = stage(dt / 2.0, &k2p, &k2q)?;
    let (k3p, k3q) = velocity(&c3);
    let c4 = stage(dt, &k3p, &k3q)?;
    let (k4p, k4q) = velocity(&c4);
    let dp = (k1p + k2p * 2.0 + k3p * 2.0 + k4p) / 6.0;
    let dq = (k1q + k2q * 2.0 + k3q * 2.0 + k4q) / 6.0;
    stage(dt, &dp, &dq)
}

/// Fixed-step RK4 over `steps` steps; returns every intermediate chord,
/// starting with `c`.
pub fn integrate_fixed(m: &ManifoldModel, c: &Chord, dt: f64, steps: usize) -> Result<Vec<Chord>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(c.clone());
    for _ in 0..steps {
        let next = rk4_step(m, out.last().expect("non-empty"), dt)?;
        out.push(next);
    }
    Ok(out)
}

/// Whether `next` is short enough to count as not lengthening `prev`.
fn length_ok(prev: f64, next: f64) -> bool {
    next <= prev * (1.0 + 4.0 * f64::EPSILON)
}

/// One RK4 step that never lengthens the chord: an offending step is
/// retried with half the step, up to `max_halvings` times. The returned
/// state carries the time actually reached.
pub fn step(m: &ManifoldModel, s: &FlowState, dt: f64, max_halvings: usize) -> Result<FlowState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!("step size must be positive, got {dt}")));
    }
    let mut h = dt;
    let mut reason = String::new();
    for _ in 0..=max_halvings {
        match rk4_step(m, &s.chord, h) {
            Ok(next) if length_ok(s.ell, next.ell) => return FlowState::new(m, s.t + h, next),
            Ok(next) => reason = format!("length increased from {} to {}", s.ell, next.ell),
            Err(e) => reason = e.to_string(),
        }
        h /= 2.0;
    }
    Err(Error::StepRejected {
        t: s.t,
        halvings: max_halvings,
        reason,
    })
}

/// Reduces periodic coordinates and moves endpoints off chart
/// singularities.
fn normalize(m: &ManifoldModel, c: Chord) -> Result<Chord> {
    let fix = |mut pt: ChartPoint, jet| {
        m.reduce(&mut pt);
        match m.rechart(&pt, &jet) {
            Some(better) => better,
            None => (pt, jet),
        }
    };
    let (p, jp) = fix(c.p, c.jet_p);
    let (q, jq) = fix(c.q, c.jet_q);
    Chord::from_jets(p, jp, q, jq)
}

fn state_norm(c: &Chord) -> f64 {
    c.p.coords.iter().chain(&c.q.coords).fold(0.0, |a, x| a.max(x.abs()))
}

fn coord_distance(a: &Chord, b: &Chord) -> f64 {
    let d = |x: &[f64], y: &[f64]| x.iter().zip(y).fold(0.0f64, |acc, (u, v)| acc.max((u - v).abs()));
    d(&a.p.coords, &b.p.coords).max(d(&a.q.coords, &b.q.coords))
}

/// Applies the threshold rules to the most recent accepted states (oldest
/// first). Shrink takes precedence; convergence needs the last `ogc_dwell`
/// states below `eps_ogc` with the chord still long.
pub fn classify(states: &[FlowState], params: &FlowParams) -> FlowOutcome {
    let last = states.last().expect("classify needs at least one state").clone();
    if last.ell < params.eps_shrink {
        return FlowOutcome::ShrunkToPoint {
            t_final: last.t,
            limit_point: last.chord.midpoint(),
            state: last,
        };
    }
    let dwell = params.ogc_dwell;
    if states.len() >= dwell
        && states[states.len() - dwell..]
            .iter()
            .all(|s| s.residual() < params.eps_ogc && s.ell > params.eps_shrink)
    {
        return FlowOutcome::ConvergedToOgc {
            t_final: last.t,
            residual: last.residual(),
            state: last,
        };
    }
    FlowOutcome::BudgetExhausted { state: last }
}

/// Finds the time within an accepted step at which the length crosses
/// `eps` by bisection on the step size from the pre-step chord.
fn refine_shrink(m: &ManifoldModel, prev: &Chord, dt: f64, eps: f64) -> (f64, Option<Chord>) {
    let (mut lo, mut hi) = (0.0, dt);
    let mut best = None;
    for _ in 0..200 {
        if hi - lo <= f64::EPSILON * dt.max(1e-300) * 4.0 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match rk4_step(m, prev, mid) {
            Ok(c) if c.ell >= eps => lo = mid,
            Ok(c) => {
                hi = mid;
                best = Some(c);
            }
            Err(_) => hi = mid,
        }
    }
    (hi, best)
}

/// Integrates the flow from `initial` until it shrinks, converges to an
/// orthogonal chord, exhausts the time budget or fails.
pub fn run(m: &ManifoldModel, initial: Chord, params: &FlowParams) -> Result<Trajectory> {
    params.validate()?;
    let initial = normalize(m, initial)?;
    let mut current = FlowState::new(m, 0.0, initial)?;
    let mut samples = vec![current.clone()];
    let mut window: Vec<FlowState> = vec![current.clone()];
    let mut dt = params.dt_init.min(params.dt_max);
    let mut reports_done = 0u64;

    let push_window = |window: &mut Vec<FlowState>, s: FlowState| {
        window.push(s);
        if window.len() > params.ogc_dwell {
            window.remove(0);
        }
    };

    loop {
        if current.t >= params.t_max {
            let outcome = classify(&window, params);
            return Ok(Trajectory { samples, outcome });
        }
        let t = current.t;
        let mut target_report = None;
        let mut h = dt
            .min(params.dt_max)
            .min(params.shrink_step_cap * current.ell)
            .min(params.t_max - t);
        if let ReportStride::Every(every) = params.stride {
            let next = (reports_done + 1) as f64 * every;
            // Stretch by at most 0.1% rather than leave a sliver step.
            if t + h >= next - 1e-3 * h {
                h = next - t;
                target_report = Some(next);
            }
        }
        let landing = (params.t_max - t) <= h;

        let mut halvings = 0;
        let accepted = loop {
            let attempt = rk4_step(m, &current.chord, h).and_then(|full| {
                let half = rk4_step(m, &current.chord, h / 2.0)?;
                let two = rk4_step(m, &half, h / 2.0)?;
                Ok((full, two))
            });
            let reason = match attempt {
                Ok((full, two)) if length_ok(current.ell, two.ell) && length_ok(current.ell, full.ell) => {
                    let err = coord_distance(&full, &two);
                    let tol = params.tolerance * (1.0 + state_norm(&current.chord));
                    if err <= tol {
                        let grow = if err == 0.0 {
                            5.0
                        } else {
                            (params.safety * (tol / err).powf(0.2)).min(5.0)
                        };
                        break (two, h, grow);
                    }
                    // Too inaccurate: shrink by the usual fifth-root rule.
                    h *= (params.safety * (tol / err).powf(0.2)).clamp(0.1, 0.5);
                    target_report = None;
                    if h >= f64::EPSILON * (1.0 + t) {
                        continue;
                    }
                    format!("step-doubling error {err:e} above tolerance {tol:e}")
                }
                Ok((_, two)) => format!("length increased from {} to {}", current.ell, two.ell),
                Err(e) => e.to_string(),
            };
            halvings += 1;
            if halvings > params.max_halvings || h < f64::EPSILON * (1.0 + t) {
                let outcome = FlowOutcome::StepFailure {
                    t,
                    reason: format!("{reason} (after {} halvings)", halvings - 1),
                    state: current,
                };
                return Ok(Trajectory { samples, outcome });
            }
            h /= 2.0;
            target_report = None;
        };
        let (next_chord, taken, grow) = accepted;
        dt = (taken * grow).min(params.dt_max);
        let t_next = match target_report {
            Some(report) if taken == report - t => report,
            _ if landing && taken == params.t_max - t => params.t_max,
            _ => t + taken,
        };

        if next_chord.ell < params.eps_shrink {
            let (tau, refined) = refine_shrink(m, &current.chord, taken, params.eps_shrink);
            let chord = refined.unwrap_or(next_chord);
            let state = FlowState::new(m, t + tau, chord)?;
            if matches!(params.stride, ReportStride::EveryStep) {
                samples.push(state.clone());
            }
            push_window(&mut window, state);
            let outcome = classify(&window, params);
            return Ok(Trajectory { samples, outcome });
        }

        let chord = normalize(m, next_chord)?;
        current = FlowState::new(m, t_next, chord)?;
        match params.stride {
            ReportStride::EveryStep => samples.push(current.clone()),
            ReportStride::Every(_) => {
                if target_report == Some(t_next) {
                    reports_done += 1;
                    samples.push(current.clone());
                }
            }
        }
        push_window(&mut window, current.clone());
        if let o @ FlowOutcome::ConvergedToOgc { .. } = classify(&window, params) {
            return Ok(Trajectory { samples, outcome: o });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chord::{make_chord, ogc_residual};
    use crate::manifold::ManifoldSpec;
    use std::f64::consts::PI;

    fn model(name: &str, params: &[(&str, f64)]) -> ManifoldModel {
        ManifoldModel::from_spec(&ManifoldSpec::builtin(name, params)).unwrap()
    }

    fn chord1(m: &ManifoldModel, (cp, up): (usize, f64), (cq, uq): (usize, f64)) -> Chord {
        make_chord(m, ChartPoint::new(cp, vec![up]), ChartPoint::new(cq, vec![uq])).unwrap()
    }

    #[test]
    fn flat_velocity_is_unit_and_closing() {
        let m = model("line", &[]);
        let c = chord1(&m, (0, -1.0), (0, 1.0));
        let (vp, vq) = velocity(&c);
        assert_eq!(vp[0], 1.0);
        assert_eq!(vq[0], -1.0);
    }

    #[test]
    fn strip_velocity_closes_gap() {
        let m = model("strip-lines", &[]);
        let h: f64 = 1.0;
        let c = chord1(&m, (0, -h / 2.0), (1, h / 2.0));
        let (vp, vq) = velocity(&c);
        let speed = h / (1.0 + h * h).sqrt();
        assert!((vp[0] - speed).abs() < 1e-15);
        assert!((vq[0] + speed).abs() < 1e-15);
    }

    #[test]
    fn ogc_velocity_is_zero_and_state_fixed() {
        let m = model("ellipse", &[]);
        let c = chord1(&m, (0, PI / 2.0), (0, 3.0 * PI / 2.0));
        let (vp, vq) = velocity(&c);
        assert!(vp.amax() < 1e-15 && vq.amax() < 1e-15);
        let s = FlowState::new(&m, 0.0, c.clone()).unwrap();
        let next = step(&m, &s, 0.1, 20).unwrap().chord;
        assert!((next.p.coords[0] - c.p.coords[0]).abs() < 1e-14);
        assert!((next.q.coords[0] - c.q.coords[0]).abs() < 1e-14);
    }

    #[test]
    fn flat_step_is_exact() {
        let m = model("line", &[]);
        let c = chord1(&m, (0, -1.0), (0, 1.0));
        let s = FlowState::new(&m, 0.0, c).unwrap();
        let next = step(&m, &s, 0.1, 20).unwrap();
        assert_eq!(next.t, 0.1);
        assert!((next.ell - 1.8).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = FlowParams {
            t_max: -1.0,
            ..FlowParams::default()
        };
        assert!(matches!(p.validate(), Err(Error::InvalidParams(_))));
        let p = FlowParams {
            stride: ReportStride::Every(0.0),
            ..FlowParams::default()
        };
        assert!(p.validate().is_err());
    }

    fn state_with(m: &ManifoldModel, ell_target: Option<f64>, t: f64) -> FlowState {
        // Builds a state on the x-axis with the requested length.
        let half = ell_target.unwrap_or(1.0) / 2.0;
        let c = chord1(m, (0, -half), (0, half));
        FlowState::new(m, t, c).unwrap()
    }

    #[test]
    fn classify_threshold_rules() {
        let params = FlowParams::default();
        let line = model("line", &[]);
        let tiny = state_with(&line, Some(1e-9), 1.0);
        assert!(matches!(classify(&[tiny], &params), FlowOutcome::ShrunkToPoint { .. }));

        let circle = model("circle", &[]);
        let diam = chord1(&circle, (0, 0.0), (0, PI));
        let states: Vec<_> = (0..10)
            .map(|i| FlowState::new(&circle, i as f64, diam.clone()).unwrap())
            .collect();
        assert!(ogc_residual(&diam) < 1e-12);
        assert!(matches!(classify(&states, &params), FlowOutcome::ConvergedToOgc { .. }));
        assert!(matches!(
            classify(&states[1..], &params),
            FlowOutcome::BudgetExhausted { .. }
        ));

        let slanted = chord1(&circle, (0, 0.0), (0, 2.0));
        let s = FlowState::new(&circle, 200.0, slanted).unwrap();
        assert!(s.residual() > 1e-3);
        assert!(matches!(classify(&[s], &params), FlowOutcome::BudgetExhausted { .. }));
    }

    #[test]
    fn flat_run_shrinks_at_unit_time() {
        let m = model("line", &[]);
        let c = chord1(&m, (0, -1.0), (0, 1.0));
        let traj = run(&m, c, &FlowParams::default()).unwrap();
        match &traj.outcome {
            FlowOutcome::ShrunkToPoint {
                t_final, limit_point, ..
            } => {
                assert!((t_final - 1.0).abs() < 1e-6, "t_final {t_final}");
                assert!(limit_point.amax() < 1e-6);
            }
            other => panic!("unexpected outcome {}", other.kind()),
        }
        for s in &traj.samples {
            assert!((s.ell - (2.0 - 2.0 * s.t)).abs() < 1e-10);
        }
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn report_stride_lands_on_grid() {
        let m = model("line", &[]);
        let c = chord1(&m, (0, -1.0), (0, 1.0));
        let params = FlowParams {
            stride: ReportStride::Every(0.05),
            ..FlowParams::default()
        };
        let traj = run(&m, c, &params).unwrap();
        for (i, s) in traj.samples.iter().enumerate() {
            assert_eq!(s.t, i as f64 * 0.05, "sample {i}");
        }
        assert!(traj.samples.len() >= 19);
    }

    #[test]
    fn chord_on_orthogonal_chord_converges_after_dwell() {
        let m = model("circle", &[]);
        let c = chord1(&m, (0, 0.0), (0, PI));
        let traj = run(&m, c, &FlowParams::default()).unwrap();
        assert!(matches!(traj.outcome, FlowOutcome::ConvergedToOgc { .. }));
        assert_eq!(traj.samples.len(), 10);
    }

    #[test]
    fn budget_exhausted_on_slow_flow() {
        let m = model("ellipse", &[]);
        let u = (2.0 * (PI / 6.0).tan()).atan();
        let c = chord1(&m, (0, u), (0, u + PI));
        let params = FlowParams {
            t_max: 0.5,
            ..FlowParams::default()
        };
        let traj = run(&m, c, &params).unwrap();
        match &traj.outcome {
            FlowOutcome::BudgetExhausted { state } => assert_eq!(state.t, 0.5),
            other => panic!("unexpected outcome {}", other.kind()),
        }
    }
}
