//! Plot series: (series, x, y) triples in a fixed order.

use lindeberg::chf::{BoundContext, FractionKind};
use lindeberg::constants::{t_thresholds, universal_constants, Extended};
use lindeberg::optimize::bisect_root;
use lindeberg::solver::{aex_upper, default_l0, level_curve, C1Evaluator, C1Settings};
use lindeberg::Result;
use serde::Serialize;

use crate::parallel::par_map;

#[derive(Debug, Clone, Serialize)]
pub struct Point {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

fn point(series: impl Into<String>, x: f64, y: f64) -> Point {
    Point {
        series: series.into(),
        x,
        y,
    }
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn linear(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// t_γ, t₁,γ and the limit t_∞ against γ.
pub fn thresholds() -> Result<Vec<Point>> {
    let grid = linear(0.01, 3.0, 300);
    let mut out = Vec::with_capacity(3 * grid.len());
    for (name, pick) in [("t_gamma", 0usize), ("t1_gamma", 1)] {
        for &g in &grid {
            let t = t_thresholds(Extended::Finite(g))?;
            out.push(point(name, g, if pick == 0 { t.t_gamma } else { t.t1 }));
        }
    }
    let t_inf = universal_constants().t_infinity();
    out.extend(grid.iter().map(|&g| point("t_inf", g, t_inf)));
    Ok(out)
}

/// Smallest γ with Ĉ*_E(ε, γ) ≤ `target`, if any.
fn aex_level(eps: Extended, target: f64) -> Option<f64> {
    let f = |lg: f64| aex_upper(FractionKind::Esseen, eps, Extended::Finite(lg.exp())).map_or(f64::NAN, |v| v - target);
    if aex_upper(FractionKind::Esseen, eps, Extended::Infinite).ok()? > target {
        return None;
    }
    bisect_root(f, (1e-3f64).ln(), (1e6f64).ln(), 1e-10).map(f64::exp)
}

/// Level curves in (ε, γ): Ĉ*_E = 1.72 and max over L of C₁ = 2.65. Infinite ε is
/// written as `inf` in the x column; unattainable points are omitted.
pub fn level_curves(jobs: usize) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    let mut eps: Vec<Extended> = geometric(3.0, 100.0, 40).into_iter().map(Extended::Finite).collect();
    eps.push(Extended::Infinite);
    for e in &eps {
        if let Some(g) = aex_level(*e, 1.72) {
            out.push(point("aex_1.72", e.value(), g));
        }
    }
    let eps: Vec<Extended> = [2.56, 2.62, 2.65, 2.74, 3.13, 4.0, 5.37, 8.0]
        .into_iter()
        .map(Extended::Finite)
        .chain([Extended::Infinite])
        .collect();
    let settings = C1Settings::default();
    let curve = par_map(&eps, jobs, |e| level_curve(FractionKind::Esseen, 2.65, &[*e], &settings));
    for p in curve.into_iter().flatten() {
        if let Some(g) = p.gamma {
            out.push(point("c1_2.65", p.eps.value(), g));
        }
    }
    Ok(out)
}

/// Ĉ*_R(ε, γ) against ε for γ ∈ {γ*, 0.4, 0.3, 0.2}.
pub fn rozovskii_aex() -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (name, g) in [
        ("gamma*", Extended::gamma_star()),
        ("gamma=0.4", Extended::Finite(0.4)),
        ("gamma=0.3", Extended::Finite(0.3)),
        ("gamma=0.2", Extended::Finite(0.2)),
    ] {
        for e in geometric(0.3, 10.0, 200) {
            out.push(point(name, e, aex_upper(FractionKind::Rozovskii, Extended::Finite(e), g)?));
        }
    }
    Ok(out)
}

/// C₁(∞, ∞, L) for the Esseen fraction and C₁(2.12, γ*, L) for the Rozovskii fraction.
pub fn c1_curves(range: Option<(f64, f64)>, points: usize, jobs: usize) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (name, kind, eps, gamma) in [
        ("esseen(inf,inf)", FractionKind::Esseen, Extended::Infinite, Extended::Infinite),
        ("rozovskii(2.12,gamma*)", FractionKind::Rozovskii, Extended::Finite(2.12), Extended::gamma_star()),
    ] {
        let (lo, hi) = range.unwrap_or((default_l0(kind, eps), lindeberg::solver::L1));
        let grid = linear(lo, hi, points.max(2));
        let values = par_map(&grid, jobs, |&l| -> Result<f64> {
            let ctx = BoundContext::new(kind, eps, gamma, l)?;
            Ok(C1Evaluator::new(&ctx, C1Settings::default())?.minimize(None)?.total)
        });
        for (l, v) in grid.into_iter().zip(values) {
            out.push(point(name, l, v?));
        }
    }
    Ok(out)
}
