//! Residuals of the evolution equations and monotone quantities along
//! flow trajectories.
//!
//! Time derivatives are centered differences over uniformly spaced samples;
//! right-hand sides are assembled pointwise from the chord and manifold
//! geometry at each sample.

mod equations;
mod suite;

use serde::{Deserialize, Serialize};

use nalgebra::DVector;

use crate::chord::{boundary_angle, conormal_data, make_chord};
use crate::flow::{velocity, FlowState};
use crate::manifold::{ChartPoint, ManifoldModel};
use crate::{Error, Result};

pub use equations::{eta_norm_rhs, eta_t_rhs, theta_rhs, ThetaRhs};
pub use suite::{
    calibrate_orientation, ellipse_central_parameter, run_suite, strip_invariant, uniform_trajectory, CheckEntry,
    SuiteReport, MIN_ORDER, NOISE_FLOOR, SUITE_NAMES,
};

/// Slack for the monotonicity checks.
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Residual series of one equation along one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: String,
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max: f64,
    /// Observed order under halving of the reporting step, when measured.
    pub order: Option<f64>,
}

impl ResidualReport {
    fn new(equation: &str, times: Vec<f64>, residuals: Vec<f64>) -> Self {
        let max = residuals.iter().fold(0.0f64, |a, r| a.max(*r));
        Self {
            equation: equation.to_string(),
            times,
            residuals,
            max,
            order: None,
        }
    }

    /// Largest residual at the given sample times (matched to 1e-9).
    pub fn max_at(&self, times: &[f64]) -> f64 {
        let mut j = 0;
        let mut max = 0.0f64;
        for &t in times {
            while j < self.times.len() && self.times[j] < t - 1e-9 {
                j += 1;
            }
            if j < self.times.len() && (self.times[j] - t).abs() <= 1e-9 {
                max = max.max(self.residuals[j]);
            }
        }
        max
    }
}

/// `log₂(max_coarse / max_fine)` over the sample times both reports share.
pub fn convergence_order(coarse: &ResidualReport, fine: &ResidualReport) -> f64 {
    let shared: Vec<f64> = coarse
        .times
        .iter()
        .copied()
        .filter(|t| fine.times.iter().any(|s| (s - t).abs() <= 1e-9))
        .collect();
    (coarse.max_at(&shared) / fine.max_at(&shared)).log2()
}

/// Common spacing of the sample times. Needs at least three samples.
pub fn uniform_step(samples: &[FlowState]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            found: samples.len(),
        });
    }
    let dt = samples[1].t - samples[0].t;
    let uniform = samples
        .windows(2)
        .all(|w| ((w[1].t - w[0].t) - dt).abs() <= 1e-9 * dt.max(1.0));
    if !(dt > 0.0) || !uniform {
        return Err(Error::NonUniformSamples);
    }
    Ok(dt)
}

/// Resamples an arbitrary trajectory onto the uniform grid `k·dt` by cubic
/// Hermite interpolation of chart coordinates, using the flow velocity as
/// the derivative at each sample. Consecutive samples must share charts.
pub fn resample_uniform(m: &ManifoldModel, samples: &[FlowState], dt: f64) -> Result<Vec<FlowState>> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: samples.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!(
            "resampling step must be positive, got {dt}"
        )));
    }
    let t_end = samples.last().expect("non-empty").t;
    let mut out = Vec::new();
    let mut seg = 0;
    let mut k = 0u64;
    loop {
        let t = k as f64 * dt;
        if t > t_end * (1.0 + 1e-12) {
            break;
        }
        while seg + 2 < samples.len() && samples[seg + 1].t < t {
            seg += 1;
        }
        let (a, b) = (&samples[seg], &samples[seg + 1]);
        if a.chord.p.chart != b.chord.p.chart || a.chord.q.chart != b.chord.q.chart {
            return Err(Error::InvalidPoint(format!(
                "cannot interpolate across a chart change at t = {}",
                b.t
            )));
        }
        let h = b.t - a.t;
        let s = ((t - a.t) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = (
            2.0 * s.powi(3) - 3.0 * s * s + 1.0,
            s.powi(3) - 2.0 * s * s + s,
            -2.0 * s.powi(3) + 3.0 * s * s,
            s.powi(3) - s * s,
        );
        let (vpa, vqa) = velocity(&a.chord);
        let (vpb, vqb) = velocity(&b.chord);
        let interp = |pt_a: &ChartPoint, pt_b: &ChartPoint, va: &DVector<f64>, vb: &DVector<f64>| {
            let periods = &m.charts[pt_a.chart].periods;
            let coords = (0..pt_a.coords.len())
                .map(|i| {
                    let (xa, mut xb) = (pt_a.coords[i], pt_b.coords[i]);
                    // Undo a periodic reduction between the two samples.
                    if let Some(period) = periods[i] {
                        xb -= period * ((xb - xa) / period).round();
                    }
                    h00 * xa + h10 * h * va[i] + h01 * xb + h11 * h * vb[i]
                })
                .collect();
            ChartPoint::new(pt_a.chart, coords)
        };
        let p = interp(&a.chord.p, &b.chord.p, &vpa, &vpb);
        let q = interp(&a.chord.q, &b.chord.q, &vqa, &vqb);
        let chord = make_chord(m, p, q)?;
        out.push(FlowState::new(m, t, chord)?);
        k += 1;
    }
    Ok(out)
}

fn centered<T>(
    samples: &[FlowState],
    dt: f64,
    mut f: impl FnMut(usize, f64) -> Result<T>,
) -> Result<(Vec<f64>, Vec<T>)> {
    let mut times = Vec::with_capacity(samples.len().saturating_sub(2));
    let mut vals = Vec::with_capacity(times.capacity());
    for (i, s) in samples.iter().enumerate().take(samples.len().saturating_sub(1)).skip(1) {
        times.push(s.t);
        vals.push(f(i, 2.0 * dt)?);
    }
    Ok((times, vals))
}

/// `|dℓ/dt + ‖η^T‖²|` at interior samples.
pub fn check_length_evolution(samples: &[FlowState]) -> Result<ResidualReport> {
    let dt = uniform_step(samples)?;
    let (times, res) = centered(samples, dt, |i, span| {
        let d = (samples[i + 1].ell - samples[i - 1].ell) / span;
        Ok((d + samples[i].eta_t_norm_sq).abs())
    })?;
    Ok(ResidualReport::new("length", times, res))
}

/// `|∂η^T/∂t − RHS|`, the larger of the two endpoint errors.
pub fn check_eta_evolution(samples: &[FlowState]) -> Result<ResidualReport> {
    let dt = uniform_step(samples)?;
    let eta_t: Vec<_> = samples.iter().map(|s| conormal_data(&s.chord).eta_t).collect();
    let (times, res) = centered(samples, dt, |i, span| {
        let rhs = eta_t_rhs(&samples[i].chord)?;
        let d = eta_t[i + 1].sub(&eta_t[i - 1]).scale(1.0 / span);
        let e = d.sub(&rhs);
        Ok(e.f0.norm().max(e.f1.norm()))
    })?;
    Ok(ResidualReport::new("eta_t", times, res))
}

/// `|½ d/dt ‖η^T‖² − RHS|`.
pub fn check_eta_norm_evolution(samples: &[FlowState]) -> Result<ResidualReport> {
    let dt = uniform_step(samples)?;
    let (times, res) = centered(samples, dt, |i, span| {
        let d = 0.5 * (samples[i + 1].eta_t_norm_sq - samples[i - 1].eta_t_norm_sq) / span;
        Ok((d - eta_norm_rhs(&samples[i].chord)?).abs())
    })?;
    Ok(ResidualReport::new("eta_t_norm", times, res))
}

/// Residuals of the boundary-angle equation (pointwise, larger endpoint
/// error), of its endpoint-sum corollary and of its norm corollary.
pub fn check_theta_evolution(samples: &[FlowState], m: &ManifoldModel) -> Result<[ResidualReport; 3]> {
    if !m.is_planar_domain_boundary {
        return Err(Error::NotPlanarBoundary);
    }
    let dt = uniform_step(samples)?;
    let theta: Vec<_> = samples
        .iter()
        .map(|s| boundary_angle(&s.chord, m).map(|a| a.theta))
        .collect::<Result<_>>()?;
    let (times, res) = centered(samples, dt, |i, span| {
        let rhs = theta_rhs(&samples[i].chord, m)?;
        let d = theta[i + 1].sub(&theta[i - 1]).scale(1.0 / span);
        let point = (d.f0 - rhs.theta.f0).abs().max((d.f1 - rhs.theta.f1).abs());
        let avg = (d.sum() - rhs.theta_sum).abs();
        let norm = 0.5 * (theta[i + 1].l2_norm_sq() - theta[i - 1].l2_norm_sq()) / span;
        Ok([point, avg, (norm - rhs.half_norm_sq).abs()])
    })?;
    let series = |j: usize, name: &str| ResidualReport::new(name, times.clone(), res.iter().map(|r| r[j]).collect());
    Ok([series(0, "theta"), series(1, "theta_sum"), series(2, "theta_norm")])
}

/// `|J·v − Θ N|` at every sample, where `v` is the chart velocity of the
/// flow: an algebraic identity, no differencing.
pub fn check_planar_velocity_identity(samples: &[FlowState], m: &ManifoldModel) -> Result<ResidualReport> {
    if !m.is_planar_domain_boundary {
        return Err(Error::NotPlanarBoundary);
    }
    let mut times = Vec::with_capacity(samples.len());
    let mut res = Vec::with_capacity(samples.len());
    for s in samples {
        let c = &s.chord;
        let a = boundary_angle(c, m)?;
        let (vp, vq) = velocity(c);
        let n = a.n_field();
        let rp = (c.jet_p.push_forward(&vp) - &n.f0 * a.theta.f0).norm();
        let rq = (c.jet_q.push_forward(&vq) - &n.f1 * a.theta.f1).norm();
        times.push(s.t);
        res.push(rp.max(rq));
    }
    Ok(ResidualReport::new("planar_velocity", times, res))
}

/// Pointwise identities of the two-point calculus at every sample: the
/// half-Laplacian of η^T sums to zero, `Σ⟨η^T, Δ^{1/2}η^T⟩ = (ℓ/2)‖Δ^{1/2}η^T‖²`,
/// the bound by `(2/ℓ)‖η^T‖²` (violation amount), and on planar boundaries
/// `‖η^T‖² = ‖Θ‖²`.
pub fn check_identities(samples: &[FlowState], m: &ManifoldModel) -> Result<ResidualReport> {
    let mut times = Vec::with_capacity(samples.len());
    let mut res = Vec::with_capacity(samples.len());
    for s in samples {
        let eta_t = conormal_data(&s.chord).eta_t;
        let h = eta_t.half_laplacian(s.ell)?;
        let pairing = eta_t.dot_sum(&h);
        let bound = 2.0 / s.ell * eta_t.l2_norm_sq();
        let mut r = h.sum().amax();
        r = r.max((pairing - s.ell / 2.0 * h.l2_norm_sq()).abs());
        r = r.max((pairing - bound).max(0.0));
        if m.is_planar_domain_boundary {
            let theta = boundary_angle(&s.chord, m)?.theta;
            r = r.max((eta_t.l2_norm_sq() - theta.l2_norm_sq()).abs());
        }
        times.push(s.t);
        res.push(r);
    }
    Ok(ResidualReport::new("identities", times, res))
}

/// One monotonicity claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub status: Status,
    /// Largest violation beyond the slack (zero when the claim holds).
    pub worst_violation: f64,
    pub note: Option<String>,
}

impl MonotoneCheck {
    fn skipped(note: &str) -> Self {
        Self {
            status: Status::Skipped,
            worst_violation: 0.0,
            note: Some(note.to_string()),
        }
    }

    fn from_violation(worst: f64) -> Self {
        Self {
            status: if worst > 0.0 { Status::Fail } else { Status::Pass },
            worst_violation: worst,
            note: None,
        }
    }

    /// Checks that `values` never decreases by more than the slack.
    fn non_decreasing(values: impl Iterator<Item = f64>) -> Self {
        let mut prev = f64::NEG_INFINITY;
        let mut worst = 0.0f64;
        for v in values {
            worst = worst.max(prev - v - MONOTONE_SLACK);
            prev = v;
        }
        Self::from_violation(worst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub ell_non_increasing: MonotoneCheck,
    pub theta_min_non_negative: MonotoneCheck,
    pub theta_min_over_ell: MonotoneCheck,
    pub theta_sum_over_ell: MonotoneCheck,
}

impl MonotoneReport {
    pub fn checks(&self) -> [(&'static str, &MonotoneCheck); 4] {
        [
            ("ell_non_increasing", &self.ell_non_increasing),
            ("theta_min_non_negative", &self.theta_min_non_negative),
            ("theta_min_over_ell", &self.theta_min_over_ell),
            ("theta_sum_over_ell", &self.theta_sum_over_ell),
        ]
    }
}

/// Length is always checked; the boundary-angle claims need a convex planar
/// domain and a convex initial chord and are skipped otherwise.
pub fn check_monotone(samples: &[FlowState], m: &ManifoldModel) -> Result<MonotoneReport> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, found: 0 });
    }
    let ell = MonotoneCheck::non_decreasing(samples.iter().map(|s| -s.ell));
    let reason = if !m.is_planar_domain_boundary {
        Some("not a planar domain boundary")
    } else if !m.bounds_convex_domain() {
        Some("domain is not convex")
    } else if !boundary_angle(&samples[0].chord, m)?.is_convex() {
        Some("initial chord is not convex")
    } else {
        None
    };
    if let Some(reason) = reason {
        return Ok(MonotoneReport {
            ell_non_increasing: ell,
            theta_min_non_negative: MonotoneCheck::skipped(reason),
            theta_min_over_ell: MonotoneCheck::skipped(reason),
            theta_sum_over_ell: MonotoneCheck::skipped(reason),
        });
    }
    let theta: Vec<_> = samples
        .iter()
        .map(|s| boundary_angle(&s.chord, m).map(|a| a.theta))
        .collect::<Result<_>>()?;
    let min_neg = theta
        .iter()
        .fold(0.0f64, |w, th| w.max(-th.f0.min(th.f1) - MONOTONE_SLACK));
    Ok(MonotoneReport {
        ell_non_increasing: ell,
        theta_min_non_negative: MonotoneCheck::from_violation(min_neg),
        theta_min_over_ell: MonotoneCheck::non_decreasing(
            theta.iter().zip(samples).map(|(th, s)| th.f0.min(th.f1) / s.ell),
        ),
        theta_sum_over_ell: MonotoneCheck::non_decreasing(theta.iter().zip(samples).map(|(th, s)| th.sum() / s.ell)),
    })
}
