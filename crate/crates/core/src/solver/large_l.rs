//! Large-L regime: the four smoothing-inequality integrals evaluated by
//! quadrature and minimized over (T₀, T₁).

use std::f64::consts::PI;

use super::prawitz::{kernel_norm_from_gap, prawitz_kernel, prawitz_kernel_regular_part};
use super::search::{minimize_2d, Region, SearchSettings};
use super::{BoundBreakdown, LargeLParams, Params};
use crate::chf::{diff_bound, BoundContext, FractionKind};
use crate::constants::{k_capped, t_thresholds, tau0_bar, Extended};
use crate::error::{Error, Result};
use crate::special::{integrate, log_tail_integral, QuadratureSettings};

/// Past this exponent the tabulated part of |f| stops; e^{−100} is far below any quadrature tolerance.
const EXPONENT_STOP: f64 = 100.0;
/// Near τ = L³t = π/4 the exponent is tabulated in x = ln(π/4 − τ), at most up to τ = 15π/64.
const NEAR_SPAN: f64 = PI / 64.0;
const NEAR_STEP: f64 = 0.04;
/// Closest approach to π/4 covered, relative.
const NEAR_FLOOR: f64 = 1e-13;
const GAP_RATIO: f64 = 1.1;
const GAP_DEPTH: u32 = 12;
const I2_ABS_TOL: f64 = 5e-10;

#[derive(Debug, Clone, Copy)]
pub struct C1Settings {
    pub quadrature: QuadratureSettings,
    /// Grid of the (T₀L, T₁L³) search.
    pub grid: usize,
    /// Parameter tolerance of the line searches.
    pub tol: f64,
    /// Step in t of the tabulated exponent k(L³t, 2εt)·t²; `None` evaluates it exactly.
    pub table_step: Option<f64>,
}

impl Default for C1Settings {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSettings::default(),
            grid: 16,
            tol: 1e-6,
            table_step: Some(1.0 / 64.0),
        }
    }
}

/// Catmull–Rom interpolation of samples on a uniform grid.
struct Uniform {
    x0: f64,
    step: f64,
    values: Vec<f64>,
    /// The sampled function is even about x0.
    even: bool,
}

impl Uniform {
    fn end(&self) -> f64 {
        self.x0 + (self.values.len() - 1) as f64 * self.step
    }

    fn at(&self, x: f64) -> f64 {
        let v = &self.values;
        let n = v.len();
        let y = ((x - self.x0) / self.step).max(0.0);
        let j = (y.floor() as usize).min(n - 2);
        let s = y - j as f64;
        let p0 = match j {
            0 if self.even => v[1],
            0 => 2.0 * v[0] - v[1],
            _ => v[j - 1],
        };
        let p1 = v[j];
        let p2 = v[j + 1];
        let p3 = if j + 2 < n { v[j + 2] } else { 2.0 * p2 - p1 };
        0.5 * (2.0 * p1
            + s * ((p2 - p0)
                + s * ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) + s * (3.0 * (p1 - p2) + p3 - p0))))
    }
}

/// E(t) = k(L³t, 2εt)·t², the exponent of the |f̄ₙ| majorant.
struct Exponent {
    l3: f64,
    two_eps: f64,
    /// Start of the near-π/4 stretch.
    t_near: f64,
    x_near: f64,
    tables: Option<Tables>,
}

struct Tables {
    far: Uniform,
    /// Sampled backwards from t_near while E stays below the cutoff.
    below_near: Option<Uniform>,
    near: Uniform,
    /// Cells between the two t-tables where E may fall below the cutoff; the rest is negligible.
    gap: Vec<(f64, f64)>,
}

impl Exponent {
    fn new(ctx: &BoundContext, step: Option<f64>) -> Self {
        let l3 = ctx.l.powi(3);
        let two_eps = 2.0 * ctx.eps.value();
        let x_lo = (PI / 4.0 * NEAR_FLOOR).ln();
        let x_cap = NEAR_SPAN.ln();
        let mut e = Self {
            l3,
            two_eps,
            t_near: (PI / 4.0 - x_cap.exp()) / l3,
            x_near: x_cap,
            tables: None,
        };
        let Some(h) = step else { return e };
        // near stretch: from π/4 outwards until E is well past the cutoff
        let mut near_values = Vec::new();
        loop {
            let x = x_lo + near_values.len() as f64 * NEAR_STEP;
            let v = e.exact_near(x);
            near_values.push(v);
            if x >= x_cap || v > 2.0 * EXPONENT_STOP {
                e.x_near = x;
                e.t_near = (PI / 4.0 - x.exp()) / l3;
                break;
            }
        }
        let near = Uniform {
            x0: x_lo,
            step: NEAR_STEP,
            values: near_values,
            even: false,
        };
        let mut values = Vec::new();
        loop {
            let t = values.len() as f64 * h;
            let v = e.exact(t);
            values.push(v);
            if t >= e.t_near || (t >= 1.0 && v > 2.0 * EXPONENT_STOP) {
                break;
            }
        }
        let far = Uniform {
            x0: 0.0,
            step: h,
            values,
            even: true,
        };
        let mut below = Vec::new();
        while far.end() < e.t_near {
            let t = e.t_near - below.len() as f64 * h;
            if t <= far.end() {
                break;
            }
            let v = e.exact(t);
            below.push(v);
            if v > 2.0 * EXPONENT_STOP && below.len() >= 2 {
                break;
            }
        }
        let below_near = (below.len() >= 2).then(|| {
            below.reverse();
            Uniform {
                x0: e.t_near - (below.len() - 1) as f64 * h,
                step: h,
                values: below,
                even: false,
            }
        });
        let gap_end = below_near.as_ref().map_or(e.t_near, |u| u.x0);
        let mut gap = Vec::new();
        let mut s = far.end();
        while s < gap_end {
            let s2 = (s * GAP_RATIO).min(gap_end);
            e.certify_gap(s, s2, GAP_DEPTH, &mut gap);
            s = s2;
        }
        e.tables = Some(Tables {
            far,
            below_near,
            near,
            gap,
        });
        e
    }

    /// Splits [a, b] until E is certified above the cutoff; cells that never are go to `exact`.
    fn certify_gap(&self, a: f64, b: f64, depth: u32, exact: &mut Vec<(f64, f64)>) {
        // k decreases in τ and increases in u, so this bounds E below on [a, b]
        let lower = k_capped(self.l3 * b, self.two_eps * a) * a * a;
        if lower >= EXPONENT_STOP {
            return;
        }
        if depth == 0 {
            exact.push((a, b));
            return;
        }
        let m = 0.5 * (a + b);
        self.certify_gap(a, m, depth - 1, exact);
        self.certify_gap(m, b, depth - 1, exact);
    }

    fn exact(&self, t: f64) -> f64 {
        k_capped(self.l3 * t, self.two_eps * t) * t * t
    }

    fn exact_near(&self, x: f64) -> f64 {
        let t = (PI / 4.0 - x.exp()) / self.l3;
        self.exact(t)
    }

    /// E(t) for t < t_near; +∞ where it is certified above the cutoff.
    fn far(&self, t: f64) -> f64 {
        match &self.tables {
            None => self.exact(t),
            Some(tab) if t <= tab.far.end() => tab.far.at(t),
            Some(Tables {
                below_near: Some(u),
                ..
            }) if t >= u.x0 => u.at(t),
            Some(tab) => {
                if tab.gap.iter().any(|&(a, b)| t >= a && t <= b) {
                    self.exact(t)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// E at t = (π/4 − eˣ)/L³.
    fn near(&self, x: f64) -> f64 {
        match &self.tables {
            None => self.exact_near(x),
            Some(tab) => tab.near.at(x),
        }
    }

    /// Breakpoints inside (0, t_near) where the far representation changes.
    fn far_cuts(&self) -> Vec<f64> {
        match &self.tables {
            None => vec![],
            Some(tab) => {
                let mut c = vec![tab.far.end()];
                c.extend(tab.below_near.as_ref().map(|u| u.x0));
                for &(a, b) in &tab.gap {
                    c.push(a);
                    c.push(b);
                }
                c
            }
        }
    }

    fn negligible(&self, a: f64, b: f64) -> bool {
        match &self.tables {
            Some(tab)
                if a >= tab.far.end()
                    && b <= tab.below_near.as_ref().map_or(f64::INFINITY, |u| u.x0) =>
            {
                !tab.gap.iter().any(|&(lo, hi)| lo < b && hi > a)
            }
            _ => false,
        }
    }
}

/// Evaluates the C₁ objective for one context, reusing the |f| exponent table.
pub struct C1Evaluator {
    ctx: BoundContext,
    settings: C1Settings,
    exponent: Exponent,
    breaks: Vec<f64>,
}

impl C1Evaluator {
    pub fn new(ctx: &BoundContext, settings: C1Settings) -> Result<Self> {
        let exponent = Exponent::new(ctx, settings.table_step);
        // kinks of p_E / p_R
        let th = t_thresholds(ctx.gamma)?;
        let breaks = match (ctx.kind, ctx.eps) {
            (_, Extended::Infinite) => vec![],
            (FractionKind::Esseen, Extended::Finite(e)) => vec![th.t_gamma / e],
            (FractionKind::Rozovskii, Extended::Finite(e)) => vec![th.t1 / e, th.t2 / e],
        };
        Ok(Self {
            ctx: *ctx,
            settings,
            exponent,
            breaks,
        })
    }

    pub fn context(&self) -> &BoundContext {
        &self.ctx
    }

    /// (2/T₁)∫ over [T₀, T₁] of |K(t/T₁)|·exp(−E(t)), before division by L³.
    fn i2(&self, t0: f64, t1: f64) -> Result<f64> {
        let e = &self.exponent;
        // The tabulated exponent is only C¹; ask for I₂/L³ to ~1e−9 rather than to full relative precision.
        let q = &self.settings.quadrature;
        let quadrature = QuadratureSettings {
            abs_tol: q.abs_tol.max(I2_ABS_TOL * t1 * e.l3),
            ..*q
        };
        let mut total = 0.0;
        let far_hi = t1.min(e.t_near);
        if far_hi > t0 {
            let mut points = vec![t0];
            points.extend(e.far_cuts().into_iter().filter(|&c| c > t0 && c < far_hi));
            points.push(far_hi);
            for w in points.windows(2).filter(|w| w[1] > w[0]) {
                if e.negligible(w[0], w[1]) {
                    continue;
                }
                total += integrate(
                    |t: f64| prawitz_kernel(t / t1).norm() * (-e.far(t)).exp().min(1.0),
                    w[0],
                    w[1],
                    &quadrature,
                )?;
            }
        }
        let near_lo = t0.max(e.t_near);
        if t1 > near_lo {
            // t = (π/4 − eˣ)/L³, dt = −eˣ/L³ dx, and 1 − t/T₁ = (eˣ − (π/4 − τ₁))/τ₁
            let tau1 = t1 * e.l3;
            let rest = PI / 4.0 - tau1;
            let x_hi = if near_lo == e.t_near {
                e.x_near
            } else {
                (PI / 4.0 - e.l3 * near_lo).ln()
            };
            let x_lo = rest.ln();
            if x_hi > x_lo {
                total += integrate(
                    |x: f64| {
                        let ex = x.exp();
                        kernel_norm_from_gap((ex - rest) / tau1) * (-e.near(x)).exp().min(1.0) * ex
                            / e.l3
                    },
                    x_lo,
                    x_hi,
                    &quadrature,
                )?;
            }
        }
        Ok(total)
    }

    fn check(&self, p: LargeLParams) -> Result<()> {
        let l = self.ctx.l;
        let t0_hi = tau0_bar(self.ctx.eps) / l;
        let t1_hi = PI / (4.0 * l.powi(3));
        if !(p.t0 > 0.0 && p.t0 < t0_hi) {
            return Err(Error::Constraint(format!(
                "T₀ = {} outside (0, τ̄₀(ε)/L = {t0_hi})",
                p.t0
            )));
        }
        if !(p.t1 > p.t0 && p.t1 < t1_hi) {
            return Err(Error::Constraint(format!(
                "T₁ = {} outside (T₀ = {}, π/(4L³) = {t1_hi})",
                p.t1, p.t0
            )));
        }
        Ok(())
    }

    fn integrate_split<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        cuts: &[f64],
    ) -> Result<f64> {
        let mut points = vec![a];
        points.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
        points.push(b);
        let mut total = 0.0;
        for w in points.windows(2).filter(|w| w[1] > w[0]) {
            total += integrate(&mut f, w[0], w[1], &self.settings.quadrature)?;
        }
        Ok(total)
    }

    /// I₁…I₄ divided by L³.
    pub fn objective(&self, p: LargeLParams) -> Result<BoundBreakdown> {
        self.check(p)?;
        let LargeLParams { t0, t1 } = p;
        let ctx = &self.ctx;
        let mut err = None;
        let i1 = self.integrate_split(
            |t| match diff_bound(t, ctx) {
                Ok(d) => prawitz_kernel(t / t1).norm() * d,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            t0,
            &self.breaks,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        let i2 = self.i2(t0, t1)?;
        let i3 = integrate(
            |t: f64| prawitz_kernel_regular_part(t / t1).norm() * (-t * t / 2.0).exp(),
            0.0,
            t0,
            &self.settings.quadrature,
        )?;
        let i4 = log_tail_integral(t0)? / PI;
        let l3 = ctx.l.powi(3);
        let scale = 2.0 / (t1 * l3);
        Ok(BoundBreakdown::new(
            [i1 * scale, i2 * scale, i3 * scale, i4 / l3],
            Params::Large(p),
            ctx.l,
        ))
    }

    /// Minimizes the objective over (T₀L, T₁L³), optionally seeded with a start point.
    pub fn minimize(&self, start: Option<LargeLParams>) -> Result<BoundBreakdown> {
        let l = self.ctx.l;
        let l2 = l * l;
        let t0bar = tau0_bar(self.ctx.eps);
        let top = PI / 4.0 * (1.0 - 1e-12);
        let feasible =
            |q: [f64; 2]| q[0] > 0.0 && q[0] < t0bar && q[1] < PI / 4.0 && q[1] > l2 * q[0];
        let region = Region {
            lo: [t0bar * 1e-2, 1e-2],
            hi: [t0bar * (1.0 - 1e-9), top],
            feasible: &feasible,
        };
        let f = |q: [f64; 2]| match self.objective(LargeLParams::from_scaled(l, q[0], q[1])) {
            Ok(b) => b.total,
            Err(_) => f64::INFINITY,
        };
        let search = SearchSettings {
            grid: self.settings.grid,
            tol: self.settings.tol,
            ..SearchSettings::default()
        };
        let start = start.map(|p| {
            let (a, b) = p.scaled(l);
            [a, b]
        });
        let (q, _) = minimize_2d(f, &region, &search, start).ok_or_else(|| {
            Error::EmptyFeasibleRegion("no feasible (T₀, T₁) with a finite objective".into())
        })?;
        self.objective(LargeLParams::from_scaled(l, q[0], q[1]))
    }
}

/// C₁ objective at given (T₀, T₁) with default settings.
pub fn c1_objective(ctx: &BoundContext, params: LargeLParams) -> Result<BoundBreakdown> {
    c1_objective_with(ctx, params, C1Settings::default())
}

pub fn c1_objective_with(
    ctx: &BoundContext,
    params: LargeLParams,
    settings: C1Settings,
) -> Result<BoundBreakdown> {
    // a single evaluation does not pay for a table
    C1Evaluator::new(
        ctx,
        C1Settings {
            table_step: None,
            ..settings
        },
    )?
    .objective(params)
}

/// C₁(ε, γ, L) = inf over (T₀, T₁).
pub fn c1(ctx: &BoundContext) -> Result<BoundBreakdown> {
    c1_with(ctx, C1Settings::default(), None)
}

pub fn c1_with(
    ctx: &BoundContext,
    settings: C1Settings,
    start: Option<LargeLParams>,
) -> Result<BoundBreakdown> {
    C1Evaluator::new(ctx, settings)?.minimize(start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::Extended::Infinite;

    fn gs() -> Extended {
        Extended::gamma_star()
    }

    #[test]
    fn table_point_esseen_infinite() {
        let l = 0.48338;
        let ctx = BoundContext::esseen(Infinite, Infinite, l).unwrap();
        let b = c1_objective(&ctx, LargeLParams::from_scaled(l, 0.94138, 0.69255)).unwrap();
        assert!((b.total - 2.64082).abs() < 5e-3, "{b:?}");
        for (got, want) in [
            (b.i1, 0.28367),
            (b.i2, 0.74541),
            (b.i3, 1.53214),
            (b.i4, 0.07961),
        ] {
            assert!((got - want).abs() < 5e-3, "{got} vs {want}");
        }
        assert!((b.i1 + b.i2 + b.i3 + b.i4 - b.total).abs() < 1e-10);
    }

    #[test]
    fn table_point_rozovskii() {
        let l = 0.48273;
        let ctx = BoundContext::rozovskii(2.12, gs(), l).unwrap();
        let b = c1_objective(&ctx, LargeLParams::from_scaled(l, 0.93728, 0.69293)).unwrap();
        assert!((b.total - 2.65925).abs() < 5e-3, "{b:?}");
    }

    #[test]
    fn tabulated_exponent_matches_exact() {
        for (ctx, p) in [
            (
                BoundContext::esseen(Infinite, Infinite, 0.48338).unwrap(),
                (0.94138, 0.69255),
            ),
            (
                BoundContext::rozovskii(2.12, gs(), 0.48273).unwrap(),
                (0.93728, 0.69293),
            ),
            (
                BoundContext::esseen(
                    Extended::finite(0.6).unwrap(),
                    Extended::finite(0.3).unwrap(),
                    0.2,
                )
                .unwrap(),
                (0.5, 0.4),
            ),
            (
                BoundContext::esseen(Infinite, Infinite, 0.1).unwrap(),
                (0.93625, 0.78487),
            ),
            (
                BoundContext::rozovskii(1.0, gs(), 0.05).unwrap(),
                (0.88, 0.78533),
            ),
        ] {
            let params = LargeLParams::from_scaled(ctx.l, p.0, p.1);
            let exact = c1_objective(&ctx, params).unwrap().total;
            let fast = C1Evaluator::new(&ctx, C1Settings::default())
                .unwrap()
                .objective(params)
                .unwrap()
                .total;
            assert!((exact - fast).abs() < 2e-8, "{ctx:?}: {exact} vs {fast}");
        }
    }

    #[test]
    fn invariant_under_more_subdivisions() {
        let l = 0.48338;
        let ctx = BoundContext::esseen(Infinite, Infinite, l).unwrap();
        let p = LargeLParams::from_scaled(l, 0.94138, 0.69255);
        let base = C1Settings::default();
        let mut doubled = base;
        doubled.quadrature = QuadratureSettings::new(1e-12, 1e-10, 400).unwrap();
        let a = c1_objective_with(&ctx, p, base).unwrap().total;
        let b = c1_objective_with(&ctx, p, doubled).unwrap().total;
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_params() {
        let ctx = BoundContext::esseen(Infinite, Infinite, 0.5).unwrap();
        assert!(matches!(
            c1_objective(&ctx, LargeLParams { t0: 2.0, t1: 1.0 }),
            Err(Error::Constraint(_))
        ));
        assert!(matches!(
            c1_objective(&ctx, LargeLParams { t0: 1.0, t1: 100.0 }),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn optimizer_beats_table_point() {
        let l = 0.48338;
        let ctx = BoundContext::esseen(Infinite, Infinite, l).unwrap();
        let ev = C1Evaluator::new(&ctx, C1Settings::default()).unwrap();
        let at_table = ev
            .objective(LargeLParams::from_scaled(l, 0.94138, 0.69255))
            .unwrap()
            .total;
        let best = ev.minimize(None).unwrap();
        assert!(
            best.total <= at_table + 1e-9,
            "{} vs {at_table}",
            best.total
        );
        let Params::Large(p) = best.params else {
            panic!()
        };
        let (a, b) = p.scaled(l);
        assert!(
            (a - 0.94138).abs() < 2e-2 && (b - 0.69255).abs() < 2e-2,
            "{a} {b}"
        );
    }
}
