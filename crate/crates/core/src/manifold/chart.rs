use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::expr::{self, Expr};
use crate::Result;

/// Position, first partials and second partials of a chart map at a point.
pub(crate) struct RawJet {
    pub x: DVector<f64>,
    pub jac: DMatrix<f64>,
    /// `hess[i * k + j]` is the ambient vector ∂²φ/∂uᵢ∂uⱼ.
    pub hess: Vec<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub(crate) enum ChartMap {
    /// `origin + u·direction`.
    Line {
        origin: DVector<f64>,
        direction: DVector<f64>,
    },
    /// `(cx + rx cos u, cy + ry sin u)`; a circle when `rx == ry`.
    Conic {
        center: [f64; 2],
        rx: f64,
        ry: f64,
    },
    /// Spherical coordinates `(θ, φ)` about the pole `frame[2]`, scaled by
    /// the semi-axes: `x = axes ⊙ (sinθ cosφ f₀ + sinθ sinφ f₁ + cosθ f₂)`.
    Ellipsoid {
        axes: [f64; 3],
        frame: [[f64; 3]; 3],
    },
    Torus {
        major: f64,
        minor: f64,
    },
    Expressions(Vec<Expr>),
}

fn v3(a: [f64; 3]) -> DVector<f64> {
    DVector::from_column_slice(&a)
}

fn comb(frame: &[[f64; 3]; 3], axes: &[f64; 3], c: [f64; 3]) -> DVector<f64> {
    let mut out = [0.0; 3];
    for (r, o) in out.iter_mut().enumerate() {
        *o = axes[r] * (c[0] * frame[0][r] + c[1] * frame[1][r] + c[2] * frame[2][r]);
    }
    v3(out)
}

impl ChartMap {
    pub fn eval(&self, u: &[f64], k: usize, n: usize) -> Result<RawJet> {
        Ok(match self {
            ChartMap::Line { origin, direction } => RawJet {
                x: origin + direction * u[0],
                jac: DMatrix::from_column_slice(n, 1, direction.as_slice()),
                hess: vec![DVector::zeros(n)],
            },
            ChartMap::Conic { center, rx, ry } => {
                let (s, c) = u[0].sin_cos();
                RawJet {
                    x: DVector::from_column_slice(&[center[0] + rx * c, center[1] + ry * s]),
                    jac: DMatrix::from_column_slice(2, 1, &[-rx * s, ry * c]),
                    hess: vec![DVector::from_column_slice(&[-rx * c, -ry * s])],
                }
            }
            ChartMap::Ellipsoid { axes, frame } => {
                let (st, ct) = u[0].sin_cos();
                let (sp, cp) = u[1].sin_cos();
                let x = comb(frame, axes, [st * cp, st * sp, ct]);
                let dt = comb(frame, axes, [ct * cp, ct * sp, -st]);
                let dp = comb(frame, axes, [-st * sp, st * cp, 0.0]);
                let dtt = -x.clone();
                let dtp = comb(frame, axes, [-ct * sp, ct * cp, 0.0]);
                let dpp = comb(frame, axes, [-st * cp, -st * sp, 0.0]);
                let mut jac = DMatrix::zeros(3, 2);
                jac.set_column(0, &dt);
                jac.set_column(1, &dp);
                RawJet {
                    x,
                    jac,
                    hess: vec![dtt, dtp.clone(), dtp, dpp],
                }
            }
            ChartMap::Torus { major, minor } => {
                let (su, cu) = u[0].sin_cos();
                let (sv, cv) = u[1].sin_cos();
                let w = major + minor * cv;
                let x = v3([w * cu, w * su, minor * sv]);
                let du = v3([-w * su, w * cu, 0.0]);
                let dv = v3([-minor * sv * cu, -minor * sv * su, minor * cv]);
                let duu = v3([-w * cu, -w * su, 0.0]);
                let duv = v3([minor * sv * su, -minor * sv * cu, 0.0]);
                let dvv = v3([-minor * cv * cu, -minor * cv * su, -minor * sv]);
                let mut jac = DMatrix::zeros(3, 2);
                jac.set_column(0, &du);
                jac.set_column(1, &dv);
                RawJet {
                    x,
                    jac,
                    hess: vec![duu, duv.clone(), duv, dvv],
                }
            }
            ChartMap::Expressions(exprs) => {
                let mut x = DVector::zeros(n);
                let mut jac = DMatrix::zeros(n, k);
                let mut hess = vec![DVector::zeros(n); k * k];
                for (r, e) in exprs.iter().enumerate() {
                    for i in 0..k {
                        for j in i..k {
                            let h = expr::eval_jet(e, u, i, j)?;
                            x[r] = h.value;
                            if i == j {
                                jac[(r, i)] = h.d1;
                            }
                            hess[i * k + j][r] = h.d12;
                            hess[j * k + i][r] = h.d12;
                        }
                    }
                }
                RawJet { x, jac, hess }
            }
        })
    }

    /// Chart coordinates of an ambient point known to lie on the image,
    /// for maps that support re-charting.
    pub fn invert(&self, x: &DVector<f64>) -> Option<Vec<f64>> {
        match self {
            ChartMap::Ellipsoid { axes, frame } => {
                let mut s = [x[0] / axes[0], x[1] / axes[1], x[2] / axes[2]];
                let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
                s.iter_mut().for_each(|c| *c /= norm);
                let dot = |f: &[f64; 3]| f[0] * s[0] + f[1] * s[1] + f[2] * s[2];
                let theta = dot(&frame[2]).clamp(-1.0, 1.0).acos();
                let phi = dot(&frame[1]).atan2(dot(&frame[0])).rem_euclid(TAU);
                Some(vec![theta, phi])
            }
            _ => None,
        }
    }
}

/// One coordinate patch of a manifold.
#[derive(Debug, Clone)]
pub struct Chart {
    /// Connected component this chart belongs to.
    pub component: usize,
    pub(crate) map: ChartMap,
    /// Period length for closed coordinates, `None` for open ones.
    pub periods: Vec<Option<f64>>,
    /// Sampling interval per coordinate, used by sweeps and plots.
    pub sample_ranges: Vec<(f64, f64)>,
    /// Sign turning the coordinate direction into the boundary orientation
    /// field (planar boundaries only).
    pub orientation: f64,
    /// Whether sweeps draw initial chords from this chart. Overlap charts
    /// of an atlas are not primary.
    pub primary: bool,
}

impl Chart {
    pub(crate) fn new(component: usize, map: ChartMap, periods: Vec<Option<f64>>) -> Self {
        let sample_ranges = periods
            .iter()
            .map(|p| match p {
                Some(period) => (0.0, *period),
                None => (-1.0, 1.0),
            })
            .collect();
        Self {
            component,
            map,
            periods,
            sample_ranges,
            orientation: 1.0,
            primary: true,
        }
    }

    pub(crate) fn with_ranges(mut self, ranges: Vec<(f64, f64)>) -> Self {
        self.sample_ranges = ranges;
        self
    }

    pub(crate) fn with_orientation(mut self, orientation: f64) -> Self {
        self.orientation = orientation;
        self
    }

    pub(crate) fn overlap(mut self) -> Self {
        self.primary = false;
        self
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    /// Reduces periodic coordinates to `[0, period)`.
    pub fn reduce(&self, coords: &mut [f64]) {
        for (c, p) in coords.iter_mut().zip(&self.periods) {
            if let Some(period) = p {
                let mut r = c.rem_euclid(*period);
                if r >= *period {
                    r = 0.0;
                }
                *c = r;
            }
        }
    }

    /// Grid samples of each coordinate: `resolution` equally spaced points
    /// on a periodic coordinate, `resolution + 1` points including both
    /// ends on an open one.
    pub fn coordinate_samples(&self, axis: usize, resolution: usize) -> Vec<f64> {
        let (lo, hi) = self.sample_ranges[axis];
        match self.periods[axis] {
            Some(period) => (0..resolution)
                .map(|i| lo + period * i as f64 / resolution as f64)
                .collect(),
            None => (0..=resolution)
                .map(|i| lo + (hi - lo) * i as f64 / resolution as f64)
                .collect(),
        }
    }
}
