//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use chordflow::expr::{eval, eval_jet, parse, Expr};
use rand::{Rng, RngExt};

/// Random expression source text over `u1..u{dim}`.
pub fn random_expr_text<R: Rng>(rng: &mut R, dim: usize, depth: u32) -> String {
    let leaf = depth == 0 || rng.random_range(0..4) == 0;
    if leaf {
        return match rng.random_range(0..5) {
            0 => format!("{:.3}", rng.random_range(0.5..2.0)),
            1 => ["pi", "e"][rng.random_range(0..2)].to_string(),
            _ => format!("u{}", rng.random_range(1..=dim)),
        };
    }
    let a = random_expr_text(rng, dim, depth - 1);
    match rng.random_range(0..10) {
        0 => format!("({a}) + ({})", random_expr_text(rng, dim, depth - 1)),
        1 => format!("({a}) - ({})", random_expr_text(rng, dim, depth - 1)),
        2 | 3 => format!("({a}) * ({})", random_expr_text(rng, dim, depth - 1)),
        4 => format!("({a}) / ({})", random_expr_text(rng, dim, depth - 1)),
        5 => format!("-({a})"),
        6 => format!("({a})^{}", ["2", "3", "0.5", "1.5", "-1"][rng.random_range(0..5)]),
        _ => {
            let f = ["sin", "cos", "tan", "exp", "log", "sqrt"][rng.random_range(0..6)];
            format!("{f}({a})")
        }
    }
}

/// `|a − b| / max(|a|, |b|, 1)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub const FD_STEP: f64 = 1e-5;

/// Largest relative error between the hyper-dual derivatives and central
/// differences at `u`: first partials against differences of plain
/// evaluation, second partials against differences of first partials.
/// `None` when the expression is outside its domain or too steep near `u`
/// for differences to be meaningful.
pub fn ad_vs_fd(expr: &Expr, u: &[f64]) -> Option<f64> {
    let dim = u.len();
    let bump = |i: usize, s: f64| {
        let mut v = u.to_vec();
        v[i] += s;
        v
    };
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let jet = eval_jet(expr, u, i, j).ok()?;
            if !jet.value.is_finite() || jet.d12.abs() > 1e4 || jet.d1.abs() > 1e4 || jet.value.abs() > 1e4 {
                return None;
            }
            let fp = eval(expr, &bump(i, FD_STEP)).ok()?;
            let fm = eval(expr, &bump(i, -FD_STEP)).ok()?;
            let d1 = (fp - fm) / (2.0 * FD_STEP);
            let gp = eval_jet(expr, &bump(j, FD_STEP), i, j).ok()?.d1;
            let gm = eval_jet(expr, &bump(j, -FD_STEP), i, j).ok()?.d1;
            let d12 = (gp - gm) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(jet.d1, d1)).max(rel_err(jet.d12, d12));
        }
    }
    Some(worst)
}

/// Draws random expressions and points until `count` of them are inside
/// their domain; returns each source with its worst relative error.
pub fn ad_sample<R: Rng>(rng: &mut R, count: usize) -> Vec<(String, f64)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let dim = rng.random_range(1..=3);
        let text = random_expr_text(rng, dim, 4);
        let expr = parse(&text).unwrap_or_else(|e| panic!("generated '{text}' failed to parse: {e}"));
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(0.2..1.5)).collect();
        if let Some(err) = ad_vs_fd(&expr, &u) {
            out.push((text, err));
        }
    }
    out
}

/// Chart velocity of the chord flow on the ellipse `(a cos u, b sin u)`,
/// written out by hand: each endpoint parameter moves by the tangential
/// component of `∓(x_p − x_q)/ℓ` divided by the speed squared.
pub fn ellipse_velocity(a: f64, b: f64, up: f64, uq: f64) -> (f64, f64) {
    let (xp, yp) = (a * up.cos(), b * up.sin());
    let (xq, yq) = (a * uq.cos(), b * uq.sin());
    let ell = ((xp - xq).powi(2) + (yp - yq).powi(2)).sqrt();
    let (ex, ey) = ((xp - xq) / ell, (yp - yq) / ell);
    let (tpx, tpy) = (-a * up.sin(), b * up.cos());
    let (tqx, tqy) = (-a * uq.sin(), b * uq.cos());
    let vp = -(ex * tpx + ey * tpy) / (tpx * tpx + tpy * tpy);
    let vq = (ex * tqx + ey * tqy) / (tqx * tqx + tqy * tqy);
    (vp, vq)
}

/// Forward Euler on [`ellipse_velocity`] with `steps` steps of size `h`.
pub fn ellipse_euler(a: f64, b: f64, mut up: f64, mut uq: f64, h: f64, steps: usize) -> (f64, f64) {
    for _ in 0..steps {
        let (vp, vq) = ellipse_velocity(a, b, up, uq);
        up += h * vp;
        uq += h * vq;
    }
    (up, uq)
}

/// Euler with Richardson extrapolation `2·y(h/2) − y(h)`, second order.
pub fn ellipse_reference(a: f64, b: f64, up: f64, uq: f64, t: f64, steps: usize) -> (f64, f64) {
    let (p1, q1) = ellipse_euler(a, b, up, uq, t / steps as f64, steps);
    let (p2, q2) = ellipse_euler(a, b, up, uq, t / (2 * steps) as f64, 2 * steps);
    (2.0 * p2 - p1, 2.0 * q2 - q1)
}
