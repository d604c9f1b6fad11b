//! Right-hand sides of the evolution equations, evaluated at one chord.

use nalgebra::DVector;

use crate::chord::{boundary_angle, conormal_data, Chord, EndpointField};
use crate::manifold::{AmbientJet, ManifoldModel};
use crate::Result;

/// RHS of the η^T equation at the endpoint with jet `jet`, where `own` and
/// `other` are η^T at this and the opposite endpoint.
fn eta_t_rhs_at(
    jet: &AmbientJet,
    own: &DVector<f64>,
    other: &DVector<f64>,
    eta_n: &DVector<f64>,
    ell: f64,
    norm_sq: f64,
) -> Result<DVector<f64>> {
    let mut rhs = -(own - other) / ell + own * (norm_sq / ell);
    for e in jet.orthonormal_tangent_basis() {
        let c = jet.second_fundamental_form(own, &e)?.dot(eta_n);
        rhs.axpy(-c, &e, 1.0);
    }
    // At this endpoint the endpoint sum minus the own value is the other
    // endpoint's value.
    rhs -= jet.project_normal(other) / ell;
    rhs -= jet.second_fundamental_form(own, own)?;
    Ok(rhs)
}

/// `−Δ^{1/2}η^T + (1/ℓ)‖η^T‖²η^T − Σ⟨A(η^T,eᵢ),η^N⟩eᵢ − (1/ℓ)(η̄^T − η^T)^N − A(η^T,η^T)`.
pub fn eta_t_rhs(c: &Chord) -> Result<EndpointField<DVector<f64>>> {
    let d = conormal_data(c);
    let n2 = d.eta_t.l2_norm_sq();
    Ok(EndpointField::new(
        eta_t_rhs_at(&c.jet_p, &d.eta_t.f0, &d.eta_t.f1, &d.eta_n.f0, c.ell, n2)?,
        eta_t_rhs_at(&c.jet_q, &d.eta_t.f1, &d.eta_t.f0, &d.eta_n.f1, c.ell, n2)?,
    ))
}

/// `−(ℓ/2)‖Δ^{1/2}η^T‖² + (1/ℓ)‖η^T‖⁴ − Σ⟨A(η^T,η^T),η⟩`, the RHS for
/// `½ d/dt ‖η^T‖²`.
pub fn eta_norm_rhs(c: &Chord) -> Result<f64> {
    let d = conormal_data(c);
    let h = d.eta_t.half_laplacian(c.ell)?;
    let n2 = d.eta_t.l2_norm_sq();
    let a0 = c
        .jet_p
        .second_fundamental_form(&d.eta_t.f0, &d.eta_t.f0)?
        .dot(&d.eta.f0);
    let a1 = c
        .jet_q
        .second_fundamental_form(&d.eta_t.f1, &d.eta_t.f1)?
        .dot(&d.eta.f1);
    Ok(-c.ell / 2.0 * h.l2_norm_sq() + n2 * n2 / c.ell - (a0 + a1))
}

/// Right-hand sides of the boundary-angle equation and its two corollaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRhs {
    /// RHS for ∂Θ/∂t at each endpoint.
    pub theta: EndpointField<f64>,
    /// RHS for the time derivative of Θ(p) + Θ(q).
    pub theta_sum: f64,
    /// RHS for `½ d/dt ‖Θ‖²`.
    pub half_norm_sq: f64,
}

pub fn theta_rhs(c: &Chord, m: &ManifoldModel) -> Result<ThetaRhs> {
    let a = boundary_angle(c, m)?;
    let eta = conormal_data(c).eta;
    let ell = c.ell;
    let th = &a.theta;
    let n2 = th.l2_norm_sq();
    let xi = a.xi_dot();
    let bar = th.sum();
    // k⟨−η, ν⟩ at each endpoint.
    let kp = a.frame_p.curvature * (-eta.f0.dot(&a.frame_p.nu));
    let kq = a.frame_q.curvature * (-eta.f1.dot(&a.frame_q.nu));
    let lap = th.half_laplacian(ell)?;
    let point = |theta: f64, lap: f64, kappa: f64| -lap + (n2 / ell + kappa) * theta + (1.0 + xi) / ell * (theta - bar);
    let theta = EndpointField::new(point(th.f0, lap.f0, kp), point(th.f1, lap.f1, kq));
    let theta_sum = (n2 - 1.0 - xi) / ell * bar + kp * th.f0 + kq * th.f1;
    let half_norm_sq =
        ell / 2.0 * xi * lap.l2_norm_sq() + kp * th.f0 * th.f0 + kq * th.f1 * th.f1 + (n2 - 1.0 - xi) / ell * n2;
    Ok(ThetaRhs {
        theta,
        theta_sum,
        half_norm_sq,
    })
}
