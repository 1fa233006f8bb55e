//! Small-L regime: closed-form incomplete-gamma majorants of I₁₁, I₁₂, I₂ and
//! I₃ + I₄, their minimization over (τ₀, τ₁), and the L → 0 limits Ĉ*.

use std::f64::consts::{PI, SQRT_2};

use super::search::{minimize_2d, Region, SearchSettings};
use super::{BoundBreakdown, Params, SmallLParams};
use crate::chf::{cubic_coefficient, envelope_a, envelope_b, BoundContext, FractionKind};
use crate::constants::{alpha, k_tau, t_thresholds, tau0_bar, universal_constants, Extended};
use crate::error::{domain, Error, Result};
use crate::special::{gamma_lower, gamma_upper};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const PRAWITZ_CONSTANT: f64 = 1.0253;

fn up(r: f64, x: f64) -> f64 {
    gamma_upper(r, x).expect("incomplete gamma arguments are nonnegative")
}

fn low(r: f64, x: f64) -> f64 {
    gamma_lower(r, x).expect("incomplete gamma arguments are nonnegative")
}

fn check_kind(kind: FractionKind, eps: Extended, gamma: Extended) -> Result<()> {
    BoundContext::new(kind, eps, gamma, 1.0).map(|_| ())
}

/// Ĉ*_E(ε, γ) or Ĉ*_R(ε, γ).
pub fn aex_upper(kind: FractionKind, eps: Extended, gamma: Extended) -> Result<f64> {
    check_kind(kind, eps, gamma)?;
    let u = universal_constants();
    let th = t_thresholds(gamma)?;
    let sum = match kind {
        FractionKind::Esseen => {
            let c = SQRT_2 * cubic_coefficient(gamma);
            match eps {
                Extended::Infinite => c * up(1.5, 0.0),
                Extended::Finite(e) => {
                    let x = th.t_gamma * th.t_gamma / (2.0 * e * e);
                    u.kappa / e * low(1.0, x) + e / 12.0 * low(2.0, x) + c * up(1.5, x)
                }
            }
        }
        FractionKind::Rozovskii => {
            let e = eps.value();
            let y1 = th.t1 * th.t1 / (2.0 * e * e);
            let y2 = th.t2 * th.t2 / (2.0 * e * e);
            let mut s =
                u.kappa / e * low(1.0, y1) + e / 12.0 * low(2.0, y1) + e / 6.0 * up(2.0, y2);
            if gamma.value() < u.gamma_star {
                let g = gamma.value();
                s += SQRT_2 / (6.0 * g) * (PI.sqrt() / 2.0 - low(1.5, y1) - up(1.5, y2));
            }
            s
        }
    };
    Ok(4.0 * FRAC_1_SQRT_2PI + sum / PI)
}

/// Largest admissible small-L cap: L₀ ≤ L̄₀(ε) ∧ (ε/4)^{1/3}, and L₀ ≤ 3α(ε)/ε for Rozovskii.
///
/// The feasible (τ₀, τ₁) region is empty at the second bound itself, so callers
/// must stay strictly below it.
pub fn small_l_cap(kind: FractionKind, eps: Extended) -> f64 {
    let l0_bar = eps.value() * tau0_bar(eps);
    let mut cap = l0_bar.min((eps.value() / 4.0).cbrt());
    if kind == FractionKind::Rozovskii {
        cap = cap.min(3.0 * alpha(eps) / eps.value());
    }
    cap
}

/// C₀(ε, γ, L, τ₀, τ₁) with the τ₁ lower limit taken at the cap L₀ = L.
pub fn c0_objective(ctx: &BoundContext, params: SmallLParams) -> Result<BoundBreakdown> {
    c0_objective_capped(ctx, params, ctx.l)
}

fn check_cap(ctx: &BoundContext, l0: f64) -> Result<()> {
    let cap = small_l_cap(ctx.kind, ctx.eps);
    if !(l0 > 0.0) || l0 > cap || ctx.l > l0 {
        return Err(Error::Constraint(format!(
            "need 0 < L = {} ≤ L₀ = {l0} ≤ {cap} (small-L admissible cap)",
            ctx.l
        )));
    }
    Ok(())
}

fn tau1_lower(eps: Extended, l0: f64) -> f64 {
    PI * l0.powi(3) * eps.recip()
}

/// C₀ objective where the τ₁ range is (πL₀³/ε, π/4) for the cap `l0` ≥ L.
pub fn c0_objective_capped(
    ctx: &BoundContext,
    params: SmallLParams,
    l0: f64,
) -> Result<BoundBreakdown> {
    check_cap(ctx, l0)?;
    let SmallLParams { tau0, tau1 } = params;
    let l = ctx.l;
    let t0bar = tau0_bar(ctx.eps);
    if !(tau0 > 0.0 && tau0 < t0bar) {
        return Err(Error::Constraint(format!(
            "τ₀ = {tau0} outside (0, τ̄₀(ε) = {t0bar})"
        )));
    }
    let lower = tau1_lower(ctx.eps, l0);
    if !(tau1 > lower && tau1 < PI / 4.0) {
        return Err(Error::Constraint(format!(
            "τ₁ = {tau1} outside (πL₀³/ε = {lower}, π/4)"
        )));
    }
    if tau1 < l * l * tau0 {
        return Err(Error::Constraint(format!(
            "τ₁ = {tau1} below L²τ₀ = {}",
            l * l * tau0
        )));
    }
    let u = universal_constants();
    let b = envelope_b(tau0, ctx.eps)?;
    let t3 = tau0.powi(3);
    let kt = k_tau(tau1);
    if !(kt > 0.0) {
        return Err(domain(
            "c0_objective",
            format!("k(τ₁) = {kt} is not positive"),
        ));
    }
    let i2 =
        PRAWITZ_CONSTANT / (2.0 * PI * t3 * kt.powf(1.5)) * up(1.5, kt * tau0 * tau0 / (l * l));
    let i3 = (PI / 2.0).sqrt() / tau1;
    let i4 = SQRT_2 / (PI * t3) * up(1.5, tau0 * tau0 / (2.0 * l * l));
    let a = envelope_a(ctx.kind, tau0, ctx.eps, ctx.gamma, l)?;
    let th = t_thresholds(ctx.gamma)?;
    let (i11, i12) = match ctx.kind {
        FractionKind::Esseen => {
            let c = cubic_coefficient(ctx.gamma);
            let (j11, j12) = match ctx.eps {
                Extended::Infinite => (c * (2.0 * PI).sqrt() / 2.0, 2.0 * c),
                Extended::Finite(e) => {
                    let x = th.t_gamma * th.t_gamma / (2.0 * e * e);
                    (
                        u.kappa / e * low(1.0, x)
                            + e / 12.0 * low(2.0, x)
                            + SQRT_2 * c * up(1.5, x),
                        SQRT_2 * u.kappa / e * low(1.5, x)
                            + SQRT_2 * e / 6.0 * low(2.5, x)
                            + 2.0 * c * up(2.0, x),
                    )
                }
            };
            (
                a / PI * (j11 + 2.0 * b * l),
                l.powi(3) * a / tau1 * (j12 + 1.5 * (2.0 * PI).sqrt() * b * l),
            )
        }
        FractionKind::Rozovskii => {
            let e = ctx.eps.value();
            let h = 1.0 - e * tau0 * tau0 * l / 6.0;
            if !(h > 0.0) {
                return Err(Error::Constraint(format!(
                    "h = 1 − ετ₀²L/6 = {h} is not positive"
                )));
            }
            let y1 = h * th.t1 * th.t1 / (2.0 * e * e);
            let y2 = h * th.t2 * th.t2 / (2.0 * e * e);
            let mut j11 = u.kappa / (e * h) * low(1.0, y1)
                + e / (12.0 * h * h) * low(2.0, y1)
                + e / (6.0 * h * h) * up(2.0, y2)
                + 2.0 * b * l / (h * h);
            let h25 = h.powf(2.5);
            let mut j12 = SQRT_2 * u.kappa / (e * h.powf(1.5)) * low(1.5, y1)
                + SQRT_2 * e / (12.0 * h25) * low(2.5, y1)
                + SQRT_2 * e / (6.0 * h25) * up(2.5, y2)
                + 3.0 * (2.0 * PI).sqrt() * b * l / (2.0 * h25);
            let g = ctx.gamma.value();
            if g < u.gamma_star {
                j11 += SQRT_2 / (6.0 * g * h.powf(1.5))
                    * (PI.sqrt() / 2.0 - low(1.5, y1) - up(1.5, y2));
                j12 += 1.0 / (3.0 * g * h * h) * (1.0 - low(2.0, y1) - up(2.0, y2));
            }
            (a / PI * j11, l.powi(3) * a / tau1 * j12)
        }
    };
    Ok(BoundBreakdown::new(
        [i11 + i12, i2, i3, i4],
        Params::Small(params),
        l,
    ))
}

/// C₀(ε, γ, L) = inf over (τ₀, τ₁) with the cap L₀ = L.
pub fn c0(ctx: &BoundContext) -> Result<BoundBreakdown> {
    c0_capped(ctx, ctx.l)
}

/// C₀ with the τ₁ lower limit πL₀³/ε taken at the cap `l0` ≥ L.
pub fn c0_capped(ctx: &BoundContext, l0: f64) -> Result<BoundBreakdown> {
    check_cap(ctx, l0)?;
    let lower = tau1_lower(ctx.eps, l0);
    if lower >= PI / 4.0 {
        return Err(Error::EmptyFeasibleRegion(format!(
            "πL₀³/ε = {lower} ≥ π/4"
        )));
    }
    let t0bar = tau0_bar(ctx.eps);
    let l = ctx.l;
    let top = PI / 4.0 * (1.0 - 1e-12);
    let feasible = |p: [f64; 2]| {
        p[0] > 0.0 && p[0] < t0bar && p[1] > lower && p[1] < PI / 4.0 && p[1] >= l * l * p[0]
    };
    let region = Region {
        lo: [t0bar * 1e-3, (lower * (1.0 + 1e-9)).max(1e-3).min(top)],
        hi: [t0bar * (1.0 - 1e-9), top],
        feasible: &feasible,
    };
    let f = |p: [f64; 2]| match c0_objective_capped(
        ctx,
        SmallLParams {
            tau0: p[0],
            tau1: p[1],
        },
        l0,
    ) {
        Ok(b) => b.total,
        Err(_) => f64::INFINITY,
    };
    let (p, _) = minimize_2d(f, &region, &SearchSettings::default(), None).ok_or_else(|| {
        Error::EmptyFeasibleRegion("no feasible (τ₀, τ₁) with a finite objective".into())
    })?;
    c0_objective_capped(
        ctx,
        SmallLParams {
            tau0: p[0],
            tau1: p[1],
        },
        l0,
    )
}
