use std::time::Instant;

use chordflow::census::{census, census_of, matches_pair, sample_chords, OgcCensus, SweepPlan};
use chordflow::chord::{make_chord, ogc_residual};
use chordflow::manifold::{ManifoldModel, ManifoldSpec};

fn model(name: &str) -> ManifoldModel {
    ManifoldModel::from_spec(&ManifoldSpec::builtin(name, &[])).unwrap()
}

fn plan(res: usize) -> SweepPlan {
    SweepPlan {
        resolution: vec![res],
        ..SweepPlan::default()
    }
}

fn has(c: &OgcCensus, a: &[f64], b: &[f64], tol: f64) -> bool {
    c.clusters.iter().any(|cl| matches_pair(&cl.representative, a, b, tol))
}

fn representatives_recheck(m: &ManifoldModel, c: &OgcCensus, eps: f64) {
    for cl in &c.clusters {
        let r = &cl.representative;
        let ch = make_chord(m, r.p_chart.clone(), r.q_chart.clone()).unwrap();
        let res = ogc_residual(&ch);
        assert!(res < eps, "representative residual {res:e}");
    }
}

#[test]
fn ellipse_census_finds_both_axes() {
    let m = model("ellipse");
    let start = Instant::now();
    let c = census(&m, &plan(24)).unwrap();
    eprintln!("ellipse census: {:?}, {} chords", start.elapsed(), c.total);
    assert_eq!(c.clusters.len(), 2, "{:#?}", c.clusters);
    assert!(has(&c, &[1.0, 0.0], &[-1.0, 0.0], 1e-6));
    assert!(has(&c, &[0.0, 0.5], &[0.0, -0.5], 1e-4));
    assert_eq!(c.failure_count, 0, "{:?}", c.failures);
    assert_eq!(c.shrink_count + c.budget_count + c.ogc_count(), c.total);
    representatives_recheck(&m, &c, 1e-8);
}

#[test]
fn ellipsoid_census_finds_principal_axes() {
    let m = model("ellipsoid");
    let start = Instant::now();
    let c = census(&m, &plan(12)).unwrap();
    eprintln!(
        "ellipsoid census: {:?}, {} chords, {} clusters, {} budget",
        start.elapsed(),
        c.total,
        c.clusters.len(),
        c.budget_count
    );
    assert!(c.clusters.len() >= 3);
    assert!(has(&c, &[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0], 1e-3));
    assert!(has(&c, &[0.0, 0.8, 0.0], &[0.0, -0.8, 0.0], 1e-3));
    assert!(has(&c, &[0.0, 0.0, 0.6], &[0.0, 0.0, -0.6], 1e-3));
    assert_eq!(c.failure_count, 0, "{:?}", c.failures);
    representatives_recheck(&m, &c, 1e-8);
}

#[test]
fn two_circles_never_shrink_across_components() {
    let m = model("two-circles");
    let c = census(&m, &plan(24)).unwrap();
    assert!(c.cross_component_total > 0);
    assert_eq!(c.cross_component_shrink, 0);
    assert!(has(&c, &[1.0, 0.0], &[2.0, 0.0], 1e-4));
    assert_eq!(c.failure_count, 0, "{:?}", c.failures);
    representatives_recheck(&m, &c, 1e-8);
}

#[test]
fn census_is_invariant_under_endpoint_swap() {
    let m = model("ellipse");
    let p = plan(12);
    let chords = sample_chords(&m, &p).unwrap();
    let swapped: Vec<_> = chords.iter().map(|c| c.reversed()).collect();
    let a = census_of(&m, &chords, &p).unwrap();
    let b = census_of(&m, &swapped, &p).unwrap();
    assert_eq!(a, b);
}

#[test]
fn doubling_resolution_keeps_every_cluster() {
    for (name, res) in [("ellipse", 12), ("ellipsoid", 4)] {
        let m = model(name);
        let coarse = census(&m, &plan(res)).unwrap();
        let fine = census(&m, &plan(2 * res)).unwrap();
        assert!(fine.clusters.len() >= coarse.clusters.len(), "{name}");
        for cl in &coarse.clusters {
            let r = &cl.representative;
            assert!(has(&fine, &r.p, &r.q, 1e-4), "{name}: {:?} lost", r);
        }
    }
}
