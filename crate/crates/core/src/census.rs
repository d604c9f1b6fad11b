//! Grid sweeps over initial chords and clustering of their orthogonal
//! limits.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chord::{make_chord, Chord};
use crate::flow::{run, FlowOutcome, FlowParams};
use crate::manifold::{ChartPoint, ManifoldModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepPlan {
    /// Grid resolution per chart coordinate; a single entry applies to all.
    pub resolution: Vec<usize>,
    /// Pairs closer than this fraction of the manifold diameter are skipped.
    pub min_length_fraction: f64,
    /// Ambient single-linkage tolerance for merging limits.
    pub dedupe_tol: f64,
    pub flow: FlowParams,
}

impl Default for SweepPlan {
    fn default() -> Self {
        Self {
            resolution: vec![24],
            min_length_fraction: 0.05,
            dedupe_tol: 1e-4,
            flow: FlowParams::default(),
        }
    }
}

impl SweepPlan {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.resolution.len() != 1 && self.resolution.len() != k {
            return Err(Error::InvalidParams(format!(
                "resolution needs 1 or {k} entries, got {}",
                self.resolution.len()
            )));
        }
        if !(self.min_length_fraction >= 0.0 && self.min_length_fraction < 1.0) {
            return Err(Error::InvalidParams(format!(
                "min_length_fraction must lie in [0, 1), got {}",
                self.min_length_fraction
            )));
        }
        if !(self.dedupe_tol > 0.0 && self.dedupe_tol.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "dedupe_tol must be positive, got {}",
                self.dedupe_tol
            )));
        }
        self.flow.validate()
    }

    fn resolution_of(&self, axis: usize) -> usize {
        if self.resolution.len() == 1 {
            self.resolution[0]
        } else {
            self.resolution[axis]
        }
    }
}

/// Grid points of all primary charts, in chart order, skipping singular
/// chart points.
fn grid_points(m: &ManifoldModel, plan: &SweepPlan) -> Vec<ChartPoint> {
    let mut out = Vec::new();
    for (idx, chart) in m.charts.iter().enumerate().filter(|(_, c)| c.primary) {
        let axes: Vec<Vec<f64>> = (0..m.k)
            .map(|a| chart.coordinate_samples(a, plan.resolution_of(a)))
            .collect();
        let mut counter = vec![0usize; m.k];
        'grid: loop {
            let coords: Vec<f64> = counter.iter().enumerate().map(|(a, &i)| axes[a][i]).collect();
            let pt = ChartPoint::new(idx, coords);
            if m.evaluate(&pt).is_ok() {
                out.push(pt);
            }
            for a in (0..m.k).rev() {
                counter[a] += 1;
                if counter[a] < axes[a].len() {
                    continue 'grid;
                }
                counter[a] = 0;
            }
            break;
        }
    }
    out
}

/// One initial chord per unordered grid pair `i < j`, skipping pairs
/// shorter than the plan's minimum length. Pairs on different components
/// are always kept.
pub fn sample_chords(m: &ManifoldModel, plan: &SweepPlan) -> Result<Vec<Chord>> {
    plan.validate(m.k)?;
    if (0..m.k).any(|a| plan.resolution_of(a) < 2) {
        return Err(Error::EmptyPlan);
    }
    let points = grid_points(m, plan);
    let min_len = plan.min_length_fraction * m.diameter();
    let mut chords = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (p, q) = (&points[i], &points[j]);
            let cross = m.component_of(p) != m.component_of(q);
            let Ok(c) = make_chord(m, p.clone(), q.clone()) else {
                continue;
            };
            if cross || c.ell >= min_len {
                chords.push(c);
            }
        }
    }
    if chords.is_empty() {
        return Err(Error::EmptyPlan);
    }
    Ok(chords)
}

/// An orthogonal chord found as a flow limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgcLimit {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub p_chart: ChartPoint,
    pub q_chart: ChartPoint,
    pub length: f64,
    pub residual: f64,
}

impl OgcLimit {
    /// Puts the lexicographically smaller endpoint first.
    fn normalized(mut self) -> Self {
        if self.q.partial_cmp(&self.p) == Some(std::cmp::Ordering::Less) {
            std::mem::swap(&mut self.p, &mut self.q);
            std::mem::swap(&mut self.p_chart, &mut self.q_chart);
        }
        self
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `min(|p−p′|+|q−q′|, |p−q′|+|q−p′|)`.
pub fn pair_distance(a: &OgcLimit, b: &OgcLimit) -> f64 {
    let same = dist(&a.p, &b.p) + dist(&a.q, &b.q);
    let swapped = dist(&a.p, &b.q) + dist(&a.q, &b.p);
    same.min(swapped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgcCluster {
    /// Lowest-residual member.
    pub representative: OgcLimit,
    pub basin_count: usize,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Single-linkage clustering under the swap-invariant pair distance.
/// Limits are processed in lexicographic endpoint order so the result does
/// not depend on input order.
pub fn dedupe(limits: &[OgcLimit], tol: f64) -> Vec<OgcCluster> {
    let mut items: Vec<OgcLimit> = limits.iter().cloned().map(OgcLimit::normalized).collect();
    items.sort_by(|a, b| {
        a.p.partial_cmp(&b.p)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.q.partial_cmp(&b.q).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.residual.total_cmp(&b.residual))
    });
    let mut parent: Vec<usize> = (0..items.len()).collect();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            if pair_distance(&items[i], &items[j]) <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: Vec<(usize, OgcCluster)> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let root = find(&mut parent, i);
        match clusters.iter_mut().find(|(r, _)| *r == root) {
            Some((_, c)) => {
                c.basin_count += 1;
                if item.residual < c.representative.residual {
                    c.representative = item.clone();
                }
            }
            None => clusters.push((
                root,
                OgcCluster {
                    representative: item.clone(),
                    basin_count: 1,
                },
            )),
        }
    }
    clusters.into_iter().map(|(_, c)| c).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgcCensus {
    pub total: usize,
    pub clusters: Vec<OgcCluster>,
    pub shrink_count: usize,
    pub budget_count: usize,
    pub failure_count: usize,
    /// Initial chords joining different components, and how many of them
    /// shrank (which would contradict the length bound between components).
    pub cross_component_total: usize,
    pub cross_component_shrink: usize,
    pub failures: Vec<String>,
}

impl OgcCensus {
    pub fn ogc_count(&self) -> usize {
        self.clusters.iter().map(|c| c.basin_count).sum()
    }
}

/// Flows every chord (concurrently) and aggregates the outcomes in input
/// order.
pub fn census_of(m: &ManifoldModel, chords: &[Chord], plan: &SweepPlan) -> Result<OgcCensus> {
    census_with_limits(m, chords, plan).map(|(c, _)| c)
}

/// Like [`census_of`], also returning every individual limit in input
/// order.
pub fn census_with_limits(m: &ManifoldModel, chords: &[Chord], plan: &SweepPlan) -> Result<(OgcCensus, Vec<OgcLimit>)> {
    plan.validate(m.k)?;
    let outcomes: Vec<Result<FlowOutcome>> = chords
        .par_iter()
        .map(|c| run(m, c.clone(), &plan.flow).map(|t| t.outcome))
        .collect();
    let mut census = OgcCensus {
        total: chords.len(),
        clusters: Vec::new(),
        shrink_count: 0,
        budget_count: 0,
        failure_count: 0,
        cross_component_total: 0,
        cross_component_shrink: 0,
        failures: Vec::new(),
    };
    let mut limits = Vec::new();
    for (c, outcome) in chords.iter().zip(outcomes) {
        let cross = m.component_of(&c.p) != m.component_of(&c.q);
        census.cross_component_total += usize::from(cross);
        match outcome {
            Ok(FlowOutcome::ShrunkToPoint { .. }) => {
                census.shrink_count += 1;
                census.cross_component_shrink += usize::from(cross);
            }
            Ok(FlowOutcome::ConvergedToOgc { state, residual, .. }) => {
                let ch = &state.chord;
                limits.push(OgcLimit {
                    p: ch.jet_p.x.as_slice().to_vec(),
                    q: ch.jet_q.x.as_slice().to_vec(),
                    p_chart: ch.p.clone(),
                    q_chart: ch.q.clone(),
                    length: ch.ell,
                    residual,
                });
            }
            Ok(FlowOutcome::BudgetExhausted { .. }) => census.budget_count += 1,
            Ok(FlowOutcome::StepFailure { t, reason, .. }) => {
                census.failure_count += 1;
                census.failures.push(format!("t = {t}: {reason}"));
            }
            Err(e) => {
                census.failure_count += 1;
                census.failures.push(e.to_string());
            }
        }
    }
    census.clusters = dedupe(&limits, plan.dedupe_tol);
    Ok((census, limits))
}

/// Sweeps the grid of the plan.
pub fn census(m: &ManifoldModel, plan: &SweepPlan) -> Result<OgcCensus> {
    let chords = sample_chords(m, plan)?;
    census_of(m, &chords, plan)
}

/// Whether a cluster representative lies within `tol` of the unordered
/// endpoint pair `{a, b}` (each endpoint within `tol`).
pub fn matches_pair(limit: &OgcLimit, a: &[f64], b: &[f64], tol: f64) -> bool {
    let direct = dist(&limit.p, a) <= tol && dist(&limit.q, b) <= tol;
    let swapped = dist(&limit.p, b) <= tol && dist(&limit.q, a) <= tol;
    direct || swapped
}

/// Ambient endpoint pair of a representative, as vectors.
pub fn endpoints(limit: &OgcLimit) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_column_slice(&limit.p),
        DVector::from_column_slice(&limit.q),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldSpec;

    fn model(name: &str) -> ManifoldModel {
        ManifoldModel::from_spec(&ManifoldSpec::builtin(name, &[])).unwrap()
    }

    fn limit(p: &[f64], q: &[f64], residual: f64) -> OgcLimit {
        OgcLimit {
            p: p.to_vec(),
            q: q.to_vec(),
            p_chart: ChartPoint::new(0, vec![0.0]),
            q_chart: ChartPoint::new(0, vec![0.0]),
            length: dist(p, q),
            residual,
        }
    }

    #[test]
    fn circle_resolution_eight_gives_all_pairs() {
        let plan = SweepPlan {
            resolution: vec![8],
            ..SweepPlan::default()
        };
        let chords = sample_chords(&model("circle"), &plan).unwrap();
        assert_eq!(chords.len(), 8 * 9 / 2 - 8);
    }

    #[test]
    fn resolution_one_is_empty() {
        let plan = SweepPlan {
            resolution: vec![1],
            ..SweepPlan::default()
        };
        assert_eq!(sample_chords(&model("circle"), &plan).unwrap_err(), Error::EmptyPlan);
    }

    #[test]
    fn near_diagonal_pairs_are_skipped() {
        let plan = SweepPlan {
            resolution: vec![8],
            min_length_fraction: 0.4,
            ..SweepPlan::default()
        };
        // Diameter of the unit circle's bounding box is 2√2; chords shorter
        // than 0.4 of that (adjacent grid points, 2 sin(π/8)) are dropped.
        let chords = sample_chords(&model("circle"), &plan).unwrap();
        assert_eq!(chords.len(), 28 - 8);
    }

    #[test]
    fn cross_component_pairs_always_present() {
        let plan = SweepPlan {
            resolution: vec![4],
            min_length_fraction: 0.99,
            ..SweepPlan::default()
        };
        let m = model("two-circles");
        let chords = sample_chords(&m, &plan).unwrap();
        let cross = chords
            .iter()
            .filter(|c| m.component_of(&c.p) != m.component_of(&c.q))
            .count();
        assert_eq!(cross, 16);
    }

    #[test]
    fn dedupe_examples() {
        let a = limit(&[0.0, 0.5], &[0.0, -0.5], 1e-12);
        let b = limit(&[0.0, 0.5 + 1e-6], &[0.0, -0.5], 1e-13);
        let clusters = dedupe(&[a.clone(), b], 1e-4);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].basin_count, 2);
        assert_eq!(clusters[0].representative.residual, 1e-13);

        let swapped = limit(&[0.0, -0.5], &[0.0, 0.5], 1e-12);
        assert_eq!(dedupe(&[a.clone(), swapped], 1e-4).len(), 1);

        let major = limit(&[1.0, 0.0], &[-1.0, 0.0], 0.0);
        assert_eq!(dedupe(&[a, major], 1e-4).len(), 2);
    }

    #[test]
    fn dedupe_is_order_independent() {
        let ls = vec![
            limit(&[1.0, 0.0], &[-1.0, 0.0], 0.0),
            limit(&[0.0, 0.5], &[0.0, -0.5], 1e-12),
            limit(&[-1.0, 0.0], &[1.0, 1e-7], 1e-11),
        ];
        let mut rev = ls.clone();
        rev.reverse();
        assert_eq!(dedupe(&ls, 1e-4), dedupe(&rev, 1e-4));
    }

    #[test]
    fn invalid_plan_rejected() {
        let plan = SweepPlan {
            resolution: vec![4, 4, 4],
            ..SweepPlan::default()
        };
        assert!(matches!(plan.validate(2), Err(Error::InvalidParams(_))));
    }
}
