//! Parametric submanifolds of ℝⁿ and their pointwise differential geometry.

mod chart;
mod jet;

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use chart::Chart;
use chart::ChartMap;
pub use jet::{AmbientJet, RANK_TOLERANCE, TANGENCY_TOLERANCE};

use crate::expr::{self, Expr};
use crate::{Error, Result};

/// Charts whose Jacobian condition drops below this hand the point over to
/// a better conditioned chart of the same component, when one exists.
pub const RECHART_CONDITION: f64 = 0.3;

/// Names accepted by [`ManifoldSpec::Builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "line",
    "circle",
    "ellipse",
    "two-circles",
    "strip-lines",
    "sphere",
    "ellipsoid",
    "torus",
];

/// Declarative description of a manifold, as found in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Builtin {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Parametric {
        /// One expression in `u1..uk` per ambient coordinate.
        expressions: Vec<String>,
        /// Period per chart coordinate, `null` for open coordinates.
        periods: Vec<Option<f64>>,
        #[serde(default)]
        sample_ranges: Option<Vec<(f64, f64)>>,
        /// Sign of the boundary orientation for planar curves; when present
        /// the curve is treated as an oriented domain boundary.
        #[serde(default)]
        boundary_orientation: Option<f64>,
    },
}

impl ManifoldSpec {
    pub fn builtin(name: &str, params: &[(&str, f64)]) -> Self {
        ManifoldSpec::Builtin {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

/// A point given by chart index and chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: usize,
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: usize, coords: Vec<f64>) -> Self {
        Self { chart, coords }
    }
}

/// Oriented frame of a planar domain boundary at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarFrame {
    /// Unit orientation field.
    pub xi: DVector<f64>,
    /// Inward unit normal, ξ rotated counterclockwise by 90°.
    pub nu: DVector<f64>,
    /// Signed curvature ⟨∇_ξ ξ, ν⟩.
    pub curvature: f64,
}

/// An immersed k-dimensional submanifold of ℝⁿ covered by charts.
#[derive(Debug, Clone)]
pub struct ManifoldModel {
    pub k: usize,
    pub n: usize,
    pub charts: Vec<Chart>,
    pub spec: ManifoldSpec,
    pub is_planar_domain_boundary: bool,
}

struct Params<'a> {
    name: &'a str,
    given: &'a BTreeMap<String, f64>,
}

impl Params<'_> {
    fn check_known(&self, known: &[&str]) -> Result<()> {
        for key in self.given.keys() {
            if !known.contains(&key.as_str()) {
                return Err(Error::InvalidModel(format!(
                    "unknown parameter '{key}' for builtin '{}' (expected one of: {})",
                    self.name,
                    known.join(", ")
                )));
            }
        }
        for (key, v) in self.given {
            if !v.is_finite() {
                return Err(Error::InvalidModel(format!("parameter '{key}' must be finite")));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.given.get(key).copied().unwrap_or(default)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.get(key, default);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidModel(format!(
                "parameter '{key}' of builtin '{}' must be positive, got {v}",
                self.name
            )))
        }
    }
}

fn ellipsoid_atlas(axes: [f64; 3]) -> Vec<Chart> {
    let z_pole = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let x_pole = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
    let periods = vec![None, Some(TAU)];
    let ranges = vec![(0.0, PI), (0.0, TAU)];
    vec![
        Chart::new(0, ChartMap::Ellipsoid { axes, frame: z_pole }, periods.clone()).with_ranges(ranges.clone()),
        Chart::new(0, ChartMap::Ellipsoid { axes, frame: x_pole }, periods)
            .with_ranges(ranges)
            .overlap(),
    ]
}

fn circle_chart(component: usize, center: [f64; 2], rx: f64, ry: f64) -> Chart {
    Chart::new(component, ChartMap::Conic { center, rx, ry }, vec![Some(TAU)])
}

impl ManifoldModel {
    pub fn from_spec(spec: &ManifoldSpec) -> Result<Self> {
        match spec {
            ManifoldSpec::Builtin { name, params } => Self::builtin(name, params),
            ManifoldSpec::Parametric {
                expressions,
                periods,
                sample_ranges,
                boundary_orientation,
            } => Self::parametric(expressions, periods, sample_ranges.clone(), *boundary_orientation),
        }
    }

    fn builtin(name: &str, given: &BTreeMap<String, f64>) -> Result<Self> {
        let p = Params { name, given };
        let spec = ManifoldSpec::Builtin {
            name: name.to_string(),
            params: given.clone(),
        };
        let (k, n, planar, charts) = match name {
            "line" => {
                p.check_known(&["x0", "y0", "dx", "dy"])?;
                let dir = [p.get("dx", 1.0), p.get("dy", 0.0)];
                if dir[0] == 0.0 && dir[1] == 0.0 {
                    return Err(Error::InvalidModel("line direction must be non-zero".into()));
                }
                let map = ChartMap::Line {
                    origin: DVector::from_column_slice(&[p.get("x0", 0.0), p.get("y0", 0.0)]),
                    direction: DVector::from_column_slice(&dir),
                };
                (1, 2, false, vec![Chart::new(0, map, vec![None])])
            }
            "circle" => {
                p.check_known(&["r", "cx", "cy"])?;
                let r = p.positive("r", 1.0)?;
                let c = [p.get("cx", 0.0), p.get("cy", 0.0)];
                (1, 2, true, vec![circle_chart(0, c, r, r)])
            }
            "ellipse" => {
                p.check_known(&["a", "b"])?;
                let a = p.positive("a", 1.0)?;
                let b = p.positive("b", 0.5)?;
                (1, 2, true, vec![circle_chart(0, [0.0, 0.0], a, b)])
            }
            "two-circles" => {
                p.check_known(&["r1", "c1x", "c1y", "r2", "c2x", "c2y"])?;
                let r1 = p.positive("r1", 1.0)?;
                let r2 = p.positive("r2", 1.0)?;
                let c1 = [p.get("c1x", 0.0), p.get("c1y", 0.0)];
                let c2 = [p.get("c2x", 3.0), p.get("c2y", 0.0)];
                let gap = ((c1[0] - c2[0]).powi(2) + (c1[1] - c2[1]).powi(2)).sqrt();
                if gap <= r1 + r2 {
                    return Err(Error::InvalidModel("two-circles requires disjoint disks".into()));
                }
                let charts = vec![circle_chart(0, c1, r1, r1), circle_chart(1, c2, r2, r2)];
                (1, 2, true, charts)
            }
            "strip-lines" => {
                p.check_known(&["width", "half_range"])?;
                let w = p.positive("width", 1.0)?;
                let half = p.positive("half_range", 2.0)?;
                let up = DVector::from_column_slice(&[0.0, 1.0]);
                let left = ChartMap::Line {
                    origin: DVector::from_column_slice(&[0.0, 0.0]),
                    direction: up.clone(),
                };
                let right = ChartMap::Line {
                    origin: DVector::from_column_slice(&[w, 0.0]),
                    direction: up,
                };
                // Orientation chosen so the inward normal points into the strip.
                let charts = vec![
                    Chart::new(0, left, vec![None])
                        .with_ranges(vec![(-half, half)])
                        .with_orientation(-1.0),
                    Chart::new(1, right, vec![None]).with_ranges(vec![(-half, half)]),
                ];
                (1, 2, true, charts)
            }
            "sphere" => {
                p.check_known(&["r"])?;
                let r = p.positive("r", 1.0)?;
                (2, 3, false, ellipsoid_atlas([r, r, r]))
            }
            "ellipsoid" => {
                p.check_known(&["a", "b", "c"])?;
                let axes = [p.positive("a", 1.0)?, p.positive("b", 0.8)?, p.positive("c", 0.6)?];
                (2, 3, false, ellipsoid_atlas(axes))
            }
            "torus" => {
                p.check_known(&["R", "r"])?;
                let major = p.positive("R", 2.0)?;
                let minor = p.positive("r", 1.0)?;
                if minor >= major {
                    return Err(Error::InvalidModel("torus requires r < R".into()));
                }
                let chart = Chart::new(0, ChartMap::Torus { major, minor }, vec![Some(TAU), Some(TAU)]);
                (2, 3, false, vec![chart])
            }
            other => {
                return Err(Error::InvalidModel(format!(
                    "unknown builtin '{other}' (expected one of: {})",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        };
        Ok(Self {
            k,
            n,
            charts,
            spec,
            is_planar_domain_boundary: planar,
        })
    }

    fn parametric(
        sources: &[String],
        periods: &[Option<f64>],
        sample_ranges: Option<Vec<(f64, f64)>>,
        orientation: Option<f64>,
    ) -> Result<Self> {
        let n = sources.len();
        let k = periods.len();
        if k == 0 || n <= k {
            return Err(Error::InvalidModel(format!(
                "need n > k >= 1, got {n} expressions for {k} coordinates"
            )));
        }
        if periods.iter().flatten().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidModel("periods must be positive and finite".into()));
        }
        let exprs = sources
            .iter()
            .map(|s| {
                let e = expr::parse(s)?;
                expr::check_dimension(&e, k)?;
                Ok(e)
            })
            .collect::<Result<Vec<Expr>>>()?;
        let mut chart = Chart::new(0, ChartMap::Expressions(exprs), periods.to_vec());
        if let Some(ranges) = &sample_ranges {
            if ranges.len() != k || ranges.iter().any(|(lo, hi)| !(lo < hi)) {
                return Err(Error::InvalidModel(format!(
                    "sample_ranges must hold {k} increasing intervals"
                )));
            }
            chart = chart.with_ranges(ranges.clone());
        }
        let planar = match orientation {
            Some(s) if s == 1.0 || s == -1.0 => {
                if k != 1 || n != 2 {
                    return Err(Error::InvalidModel(
                        "boundary_orientation requires a planar curve (k = 1, n = 2)".into(),
                    ));
                }
                chart = chart.with_orientation(s);
                true
            }
            Some(s) => {
                return Err(Error::InvalidModel(format!(
                    "boundary_orientation must be 1 or -1, got {s}"
                )))
            }
            None => false,
        };
        Ok(Self {
            k,
            n,
            charts: vec![chart],
            spec: ManifoldSpec::Parametric {
                expressions: sources.to_vec(),
                periods: periods.to_vec(),
                sample_ranges,
                boundary_orientation: orientation,
            },
            is_planar_domain_boundary: planar,
        })
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        self.charts.iter().map(|c| c.component + 1).max().unwrap_or(0)
    }

    pub fn component_of(&self, pt: &ChartPoint) -> usize {
        self.charts[pt.chart].component
    }

    fn check_point(&self, pt: &ChartPoint) -> Result<&Chart> {
        let chart = self.charts.get(pt.chart).ok_or_else(|| {
            Error::InvalidPoint(format!(
                "chart {} does not exist ({} charts)",
                pt.chart,
                self.charts.len()
            ))
        })?;
        if pt.coords.len() != self.k {
            return Err(Error::InvalidPoint(format!(
                "expected {} coordinates, got {}",
                self.k,
                pt.coords.len()
            )));
        }
        if pt.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinates {:?}", pt.coords)));
        }
        Ok(chart)
    }

    /// Reduces periodic coordinates of `pt` to their fundamental domain.
    pub fn reduce(&self, pt: &mut ChartPoint) {
        if let Some(chart) = self.charts.get(pt.chart) {
            chart.reduce(&mut pt.coords);
        }
    }

    /// Position, Jacobian and Hessian at a chart point.
    pub fn evaluate(&self, pt: &ChartPoint) -> Result<AmbientJet> {
        let chart = self.check_point(pt)?;
        let mut coords = pt.coords.clone();
        chart.reduce(&mut coords);
        let raw = chart.map.eval(&coords, self.k, self.n)?;
        AmbientJet::new(pt.chart, &coords, raw.x, raw.jac, raw.hess)
    }

    pub fn project_tangent(&self, pt: &ChartPoint, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.evaluate(pt)?.project_tangent(v))
    }

    pub fn second_fundamental_form(&self, pt: &ChartPoint, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.evaluate(pt)?.second_fundamental_form(a, b)
    }

    pub fn pullback_velocity(&self, pt: &ChartPoint, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.evaluate(pt)?.pullback(v))
    }

    /// Orientation frame and curvature of a planar boundary, from an
    /// already evaluated jet.
    pub fn planar_frame_at(&self, chart: usize, jet: &AmbientJet) -> Result<PlanarFrame> {
        if !self.is_planar_domain_boundary {
            return Err(Error::NotPlanarBoundary);
        }
        let t = jet.jac.column(0);
        let xi = t.into_owned() * (self.charts[chart].orientation / t.norm());
        let nu = DVector::from_column_slice(&[-xi[1], xi[0]]);
        let curvature = jet.second_fundamental_form(&xi, &xi)?.dot(&nu);
        Ok(PlanarFrame { xi, nu, curvature })
    }

    pub fn planar_frame(&self, pt: &ChartPoint) -> Result<PlanarFrame> {
        if !self.is_planar_domain_boundary {
            return Err(Error::NotPlanarBoundary);
        }
        let jet = self.evaluate(pt)?;
        self.planar_frame_at(pt.chart, &jet)
    }

    /// Whether the planar boundary encloses a convex domain: curvature is
    /// non-negative at every sample, and a boundary with several components
    /// is made of straight pieces only (parallel lines bounding a strip).
    pub fn bounds_convex_domain(&self) -> bool {
        if !self.is_planar_domain_boundary {
            return false;
        }
        let mut all_flat = true;
        for (idx, chart) in self.charts.iter().enumerate() {
            for u in chart.coordinate_samples(0, 512) {
                let Ok(frame) = self.planar_frame(&ChartPoint::new(idx, vec![u])) else {
                    return false;
                };
                if frame.curvature < -1e-12 {
                    return false;
                }
                all_flat &= frame.curvature.abs() <= 1e-12;
            }
        }
        self.components() == 1 || all_flat
    }

    /// Moves a point to a better conditioned chart of its component when the
    /// current chart is close to a coordinate singularity.
    pub fn rechart(&self, pt: &ChartPoint, jet: &AmbientJet) -> Option<(ChartPoint, AmbientJet)> {
        if jet.condition() >= RECHART_CONDITION {
            return None;
        }
        let component = self.charts[pt.chart].component;
        let mut best: Option<(ChartPoint, AmbientJet)> = None;
        for (idx, chart) in self.charts.iter().enumerate() {
            if idx == pt.chart || chart.component != component {
                continue;
            }
            let Some(mut coords) = chart.map.invert(&jet.x) else {
                continue;
            };
            chart.reduce(&mut coords);
            let cand = ChartPoint::new(idx, coords);
            let Ok(cjet) = self.evaluate(&cand) else {
                continue;
            };
            let current = best.as_ref().map_or(jet.condition(), |(_, j)| j.condition());
            if cjet.condition() > current {
                best = Some((cand, cjet));
            }
        }
        best
    }

    /// Ambient polyline samples of every chart: `per_axis` points along
    /// each coordinate line family. For curves this is a single polyline per
    /// chart; for surfaces it is a set of iso-lines.
    pub fn sample_polylines(&self, per_axis: usize, lines: usize) -> Vec<Vec<DVector<f64>>> {
        let mut out = Vec::new();
        for chart in self.charts.iter().filter(|c| c.primary) {
            // Closed coordinates repeat the first sample at the end so the
            // polyline closes.
            let axis_samples = |axis: usize, count: usize| -> Vec<f64> {
                let (lo, hi) = chart.sample_ranges[axis];
                (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect()
            };
            let mut push_line = |coords: Vec<Vec<f64>>| {
                let pts: Vec<DVector<f64>> = coords
                    .into_iter()
                    .filter_map(|c| chart.map.eval(&c, self.k, self.n).ok().map(|r| r.x))
                    .collect();
                if pts.len() > 1 {
                    out.push(pts);
                }
            };
            if self.k == 1 {
                push_line(axis_samples(0, per_axis).into_iter().map(|u| vec![u]).collect());
            } else {
                for axis in 0..self.k {
                    for other in 0..self.k {
                        if other == axis {
                            continue;
                        }
                        for fixed in axis_samples(other, lines) {
                            let line = axis_samples(axis, per_axis)
                                .into_iter()
                                .map(|u| {
                                    let mut c = vec![0.0; self.k];
                                    c[axis] = u;
                                    c[other] = fixed;
                                    c
                                })
                                .collect();
                            push_line(line);
                        }
                    }
                }
            }
        }
        out
    }

    /// Axis-aligned bounding box `(min, max)` of the sampled manifold.
    pub fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        let mut lo = DVector::from_element(self.n, f64::INFINITY);
        let mut hi = DVector::from_element(self.n, f64::NEG_INFINITY);
        for line in self.sample_polylines(256, 32) {
            for x in line {
                lo = lo.inf(&x);
                hi = hi.sup(&x);
            }
        }
        (lo, hi)
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }
}
