//! Chords, endpoint fields and the two-point calculus on them.

use nalgebra::DVector;

use crate::manifold::{AmbientJet, ChartPoint, ManifoldModel, PlanarFrame};
use crate::{Error, Result};

/// Chords shorter than this are treated as degenerate.
pub const MIN_CHORD_LENGTH: f64 = 1e-12;

/// Slack allowed on Θ ≥ 0 when deciding whether a chord is convex.
pub const CONVEX_SLACK: f64 = 1e-12;

/// Values that can be attached to chord endpoints.
pub trait FieldValue: Clone {
    fn dot(&self, other: &Self) -> f64;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
}

impl FieldValue for f64 {
    fn dot(&self, other: &Self) -> f64 {
        self * other
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

impl FieldValue for DVector<f64> {
    fn dot(&self, other: &Self) -> f64 {
        nalgebra::Matrix::dot(self, other)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

/// A value at each end of a chord: `f0` at p (u = 0), `f1` at q (u = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointField<T> {
    pub f0: T,
    pub f1: T,
}

impl<T: FieldValue> EndpointField<T> {
    pub fn new(f0: T, f1: T) -> Self {
        Self { f0, f1 }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.f0.dot(&self.f0) + self.f1.dot(&self.f1)
    }

    /// `(|f0|² + |f1|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Endpoint sum `f0 + f1`.
    pub fn sum(&self) -> T {
        self.f0.add(&self.f1)
    }

    /// Sum over endpoints of `⟨f, g⟩`.
    pub fn dot_sum(&self, other: &Self) -> f64 {
        self.f0.dot(&other.f0) + self.f1.dot(&other.f1)
    }

    /// `((f0 − f1)/ℓ, (f1 − f0)/ℓ)`.
    pub fn half_laplacian(&self, ell: f64) -> Result<Self> {
        if !(ell > 0.0) {
            return Err(Error::DegenerateChord { length: ell });
        }
        let d = self.f0.sub(&self.f1).scale(1.0 / ell);
        Ok(Self {
            f1: d.scale(-1.0),
            f0: d,
        })
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> EndpointField<U> {
        EndpointField {
            f0: f(&self.f0),
            f1: f(&self.f1),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.f0.add(&other.f0), self.f1.add(&other.f1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.f0.sub(&other.f0), self.f1.sub(&other.f1))
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.f1.clone(), self.f0.clone())
    }
}

/// Oriented chord from p to q with cached jets.
#[derive(Debug, Clone, PartialEq)]
pub struct Chord {
    pub p: ChartPoint,
    pub q: ChartPoint,
    pub jet_p: AmbientJet,
    pub jet_q: AmbientJet,
    pub ell: f64,
}

/// Evaluates both endpoints and builds the chord.
pub fn make_chord(m: &ManifoldModel, p: ChartPoint, q: ChartPoint) -> Result<Chord> {
    let jet_p = m.evaluate(&p)?;
    let jet_q = m.evaluate(&q)?;
    Chord::from_jets(p, jet_p, q, jet_q)
}

impl Chord {
    pub fn from_jets(p: ChartPoint, jet_p: AmbientJet, q: ChartPoint, jet_q: AmbientJet) -> Result<Self> {
        let ell = (&jet_p.x - &jet_q.x).norm();
        if !(ell >= MIN_CHORD_LENGTH) {
            return Err(Error::DegenerateChord { length: ell });
        }
        Ok(Self {
            p,
            q,
            jet_p,
            jet_q,
            ell,
        })
    }

    /// Same chord traversed from q to p.
    pub fn reversed(&self) -> Self {
        Self {
            p: self.q.clone(),
            q: self.p.clone(),
            jet_p: self.jet_q.clone(),
            jet_q: self.jet_p.clone(),
            ell: self.ell,
        }
    }

    pub fn jets(&self) -> EndpointField<&AmbientJet> {
        EndpointField {
            f0: &self.jet_p,
            f1: &self.jet_q,
        }
    }

    pub fn midpoint(&self) -> DVector<f64> {
        (&self.jet_p.x + &self.jet_q.x) * 0.5
    }
}

/// Unit conormal and its tangential and normal parts at both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConormalData {
    pub eta: EndpointField<DVector<f64>>,
    pub eta_t: EndpointField<DVector<f64>>,
    pub eta_n: EndpointField<DVector<f64>>,
}

pub fn conormal_data(c: &Chord) -> ConormalData {
    let eta_p = (&c.jet_p.x - &c.jet_q.x) / c.ell;
    let eta_q = -&eta_p;
    let eta_t = EndpointField::new(c.jet_p.project_tangent(&eta_p), c.jet_q.project_tangent(&eta_q));
    let eta = EndpointField::new(eta_p, eta_q);
    let eta_n = eta.sub(&eta_t);
    ConormalData { eta, eta_t, eta_n }
}

/// `‖η^T‖_{L²}`; zero exactly for orthogonal geodesic chords.
pub fn ogc_residual(c: &Chord) -> f64 {
    conormal_data(c).eta_t.l2_norm()
}

/// Signed contact angles of a chord with an oriented planar boundary,
/// together with the boundary frames at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryAngle {
    /// `Θ(p) = ⟨η(p), ξ(p)⟩`, `Θ(q) = −⟨η(q), ξ(q)⟩`.
    pub theta: EndpointField<f64>,
    pub frame_p: PlanarFrame,
    pub frame_q: PlanarFrame,
}

impl BoundaryAngle {
    pub fn is_convex(&self) -> bool {
        self.theta.f0 >= -CONVEX_SLACK && self.theta.f1 >= -CONVEX_SLACK
    }

    /// `N(p) = −ξ(p)`, `N(q) = ξ(q)`.
    pub fn n_field(&self) -> EndpointField<DVector<f64>> {
        EndpointField::new(-&self.frame_p.xi, self.frame_q.xi.clone())
    }

    /// `⟨ξ(p), ξ(q)⟩`.
    pub fn xi_dot(&self) -> f64 {
        self.frame_p.xi.dot(&self.frame_q.xi)
    }
}

pub fn boundary_angle(c: &Chord, m: &ManifoldModel) -> Result<BoundaryAngle> {
    if !m.is_planar_domain_boundary {
        return Err(Error::NotPlanarBoundary);
    }
    let frame_p = m.planar_frame_at(c.p.chart, &c.jet_p)?;
    let frame_q = m.planar_frame_at(c.q.chart, &c.jet_q)?;
    let eta_p = (&c.jet_p.x - &c.jet_q.x) / c.ell;
    let theta = EndpointField::new(eta_p.dot(&frame_p.xi), eta_p.dot(&frame_q.xi));
    Ok(BoundaryAngle {
        theta,
        frame_p,
        frame_q,
    })
}

/// `max |−η^T − Θ N|` over both endpoints.
pub fn planar_velocity_residual(c: &Chord, m: &ManifoldModel) -> Result<f64> {
    let angle = boundary_angle(c, m)?;
    let eta_t = conormal_data(c).eta_t;
    let n = angle.n_field();
    let r0 = (-&eta_t.f0 - &n.f0 * angle.theta.f0).norm();
    let r1 = (-&eta_t.f1 - &n.f1 * angle.theta.f1).norm();
    Ok(r0.max(r1))
}

/// `|⟨ξ(p),ξ(q)⟩ − (Θ_p Θ_q − √((1−Θ_p²)(1−Θ_q²)))|`, or `None` when the
/// chord is not convex and the identity does not apply.
pub fn xi_angle_identity_check(c: &Chord, m: &ManifoldModel) -> Result<Option<f64>> {
    let angle = boundary_angle(c, m)?;
    if !angle.is_convex() {
        return Ok(None);
    }
    let (tp, tq) = (angle.theta.f0, angle.theta.f1);
    let rhs = tp * tq - ((1.0 - tp * tp).max(0.0) * (1.0 - tq * tq).max(0.0)).sqrt();
    Ok(Some((angle.xi_dot() - rhs).abs()))
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::manifold::ManifoldSpec;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn ellipse() -> ManifoldModel {
        ManifoldModel::from_spec(&ManifoldSpec::builtin("ellipse", &[])).unwrap()
    }

    fn field() -> impl Strategy<Value = EndpointField<DVector<f64>>> {
        (1usize..5).prop_flat_map(|m| {
            (
                proptest::collection::vec(-10.0f64..10.0, m),
                proptest::collection::vec(-10.0f64..10.0, m),
            )
                .prop_map(|(a, b)| EndpointField::new(DVector::from_vec(a), DVector::from_vec(b)))
        })
    }

    proptest! {
        #[test]
        fn half_laplacian_identity(f in field(), ell in 1e-3f64..100.0) {
            let h = f.half_laplacian(ell).unwrap();
            prop_assert_eq!(h.sum().amax(), 0.0);
            let lhs = f.dot_sum(&h);
            let mid = ell / 2.0 * h.l2_norm_sq();
            prop_assert!((lhs - mid).abs() <= 1e-12 * lhs.abs().max(1.0));
            prop_assert!(lhs <= 2.0 / ell * f.l2_norm_sq() * (1.0 + 1e-12));
        }

        #[test]
        fn planar_identities_on_ellipse(up in 0.0f64..TAU, uq in 0.0f64..TAU) {
            let m = ellipse();
            let c = make_chord(&m, ChartPoint::new(0, vec![up]), ChartPoint::new(0, vec![uq]));
            prop_assume!(c.as_ref().is_ok_and(|c| c.ell > 1e-6));
            let c = c.unwrap();
            let a = boundary_angle(&c, &m).unwrap();
            prop_assert!(planar_velocity_residual(&c, &m).unwrap() < 1e-12);
            let res2 = ogc_residual(&c).powi(2);
            prop_assert!((res2 - a.theta.l2_norm_sq()).abs() < 1e-12);
            let r = boundary_angle(&c.reversed(), &m).unwrap();
            prop_assert_eq!(r.theta, a.theta.swapped().scale(-1.0));
            if let Some(res) = xi_angle_identity_check(&c, &m).unwrap() {
                prop_assert!(res < 1e-10, "xi identity residual {}", res);
            }
        }
    }
}
