//! Two-dimensional minimization over a convex feasible set: a coarse
//! geometric grid followed by golden-section line searches along the
//! coordinate axes and the accumulated displacement direction.

use crate::optimize::golden_min;

/// Axis-aligned box with a convex feasibility predicate inside it.
pub struct Region<'a> {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub feasible: &'a dyn Fn([f64; 2]) -> bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchSettings {
    pub grid: usize,
    pub tol: f64,
    pub max_rounds: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            grid: 64,
            tol: 1e-9,
            max_rounds: 60,
        }
    }
}

fn geometric(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        return (lo * hi).sqrt();
    }
    lo * (hi / lo).powf(i as f64 / (n - 1) as f64)
}

/// Largest step s ≥ 0 with x + s·d feasible, found by doubling and bisection.
fn max_step(region: &Region, x: [f64; 2], d: [f64; 2]) -> f64 {
    let at = |s: f64| [x[0] + s * d[0], x[1] + s * d[1]];
    let ok = |p: [f64; 2]| {
        p[0] >= region.lo[0]
            && p[0] <= region.hi[0]
            && p[1] >= region.lo[1]
            && p[1] <= region.hi[1]
            && (region.feasible)(p)
    };
    let norm = d[0].abs().max(d[1].abs());
    if norm == 0.0 {
        return 0.0;
    }
    let mut good = 0.0;
    let mut bad = 1e-6 / norm;
    while ok(at(bad)) {
        good = bad;
        bad *= 2.0;
        if bad * norm > 1e6 {
            return good;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (good + bad);
        if ok(at(mid)) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Minimizes `f` over the region. Non-finite values count as +∞; a feasible
/// start with a finite value is refined directly instead of scanning the grid.
pub fn minimize_2d<F: FnMut([f64; 2]) -> f64>(
    mut f: F,
    region: &Region,
    settings: &SearchSettings,
    start: Option<[f64; 2]>,
) -> Option<([f64; 2], f64)> {
    let mut eval = |p: [f64; 2]| {
        let v = f(p);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut best: Option<([f64; 2], f64)> = None;
    let consider = |p: [f64; 2], v: f64, best: &mut Option<([f64; 2], f64)>| {
        if v < best.map_or(f64::INFINITY, |b| b.1) {
            *best = Some((p, v));
        }
    };
    if let Some(s) = start {
        if (region.feasible)(s) {
            let v = eval(s);
            consider(s, v, &mut best);
        }
    }
    let n = if best.is_some_and(|b| b.1.is_finite()) { 0 } else { settings.grid };
    for i in 0..n {
        for j in 0..n {
            let p = [
                geometric(region.lo[0], region.hi[0], n, i),
                geometric(region.lo[1], region.hi[1], n, j),
            ];
            if (region.feasible)(p) {
                let v = eval(p);
                consider(p, v, &mut best);
            }
        }
    }
    let (mut x, mut fx) = best?;
    if !fx.is_finite() {
        return None;
    }
    let mut dirs = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..settings.max_rounds {
        let x_start = x;
        let f_start = fx;
        for k in 0..2 {
            let d = dirs[k];
            let (nx, nf) = line_min(&mut eval, region, x, fx, d, settings.tol);
            x = nx;
            fx = nf;
        }
        let disp = [x[0] - x_start[0], x[1] - x_start[1]];
        let len = disp[0].hypot(disp[1]);
        if len > 0.0 {
            let d = [disp[0] / len, disp[1] / len];
            let (nx, nf) = line_min(&mut eval, region, x, fx, d, settings.tol);
            x = nx;
            fx = nf;
            dirs = [dirs[1], d];
        }
        let moved = (x[0] - x_start[0]).hypot(x[1] - x_start[1]);
        if moved < settings.tol && f_start - fx <= 1e-15 * fx.abs() {
            // stuck, e.g. against a slanted constraint: try a fan of other directions
            let before = fx;
            for k in 1..8 {
                if k == 4 {
                    continue;
                }
                let a = k as f64 * std::f64::consts::PI / 8.0;
                let (nx, nf) = line_min(&mut eval, region, x, fx, [a.cos(), a.sin()], settings.tol);
                x = nx;
                fx = nf;
            }
            if before - fx <= 1e-15 * fx.abs() {
                break;
            }
        }
    }
    Some((x, fx))
}

fn line_min<F: FnMut([f64; 2]) -> f64>(
    eval: &mut F,
    region: &Region,
    x: [f64; 2],
    fx: f64,
    d: [f64; 2],
    tol: f64,
) -> ([f64; 2], f64) {
    let fwd = max_step(region, x, d) * (1.0 - 1e-12);
    let back = max_step(region, x, [-d[0], -d[1]]) * (1.0 - 1e-12);
    if fwd + back <= tol {
        return (x, fx);
    }
    let at = |s: f64| [x[0] + s * d[0], x[1] + s * d[1]];
    let (s, v) = golden_min(|s| eval(at(s)), -back, fwd, tol);
    if v < fx {
        (at(s), v)
    } else {
        (x, fx)
    }
}
