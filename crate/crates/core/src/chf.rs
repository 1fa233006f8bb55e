//! Majorants for the characteristic function of a normalized sum: the
//! polynomial envelopes p_E, p_R, the absolute-value bounds built on the
//! k-functions, and the bounds on |f̄ₙ(t) − e^{−t²/2}|.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::constants::{
    alpha, k_capped, k_tau, t_thresholds, tau0_bar, truncation_geometry, universal_constants,
    Extended,
};
use crate::error::{domain, Error, Result};

/// Which fraction the bound is stated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FractionKind {
    Esseen,
    Rozovskii,
}

impl fmt::Display for FractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FractionKind::Esseen => "esseen",
            FractionKind::Rozovskii => "rozovskii",
        })
    }
}

impl FromStr for FractionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "esseen" | "e" => Ok(FractionKind::Esseen),
            "rozovskii" | "rozovsky" | "r" => Ok(FractionKind::Rozovskii),
            _ => Err(Error::Parse(format!("unknown fraction kind {s:?}"))),
        }
    }
}

/// Kind, truncation parameter ε, balancing parameter γ and fraction level L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundContext {
    pub kind: FractionKind,
    pub eps: Extended,
    pub gamma: Extended,
    #[serde(rename = "L")]
    pub l: f64,
}

impl BoundContext {
    pub fn new(kind: FractionKind, eps: Extended, gamma: Extended, l: f64) -> Result<Self> {
        if kind == FractionKind::Rozovskii && eps.is_infinite() {
            return Err(domain(
                "BoundContext",
                "the Rozovskii fraction needs a finite ε",
            ));
        }
        for (name, v) in [("ε", eps), ("γ", gamma)] {
            if let Extended::Finite(x) = v {
                if !(x > 0.0) || !x.is_finite() {
                    return Err(domain(
                        "BoundContext",
                        format!("{name} must be positive, got {x}"),
                    ));
                }
            }
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(domain(
                "BoundContext",
                format!("L must be positive, got {l}"),
            ));
        }
        Ok(Self {
            kind,
            eps,
            gamma,
            l,
        })
    }

    pub fn esseen(eps: Extended, gamma: Extended, l: f64) -> Result<Self> {
        Self::new(FractionKind::Esseen, eps, gamma, l)
    }

    pub fn rozovskii(eps: f64, gamma: Extended, l: f64) -> Result<Self> {
        Self::new(FractionKind::Rozovskii, Extended::finite(eps)?, gamma, l)
    }

    /// Same kind and parameters at another fraction level.
    pub fn with_l(&self, l: f64) -> Result<Self> {
        Self::new(self.kind, self.eps, self.gamma, l)
    }
}

/// √(6ϰγ² + 1)/(6γ), the cubic coefficient of p_E; 1/(6γ*) at γ = ∞.
pub fn cubic_coefficient(gamma: Extended) -> f64 {
    let u = universal_constants();
    match gamma {
        Extended::Infinite => 1.0 / (6.0 * u.gamma_star),
        Extended::Finite(g) => (6.0 * u.kappa * g * g + 1.0).sqrt() / (6.0 * g),
    }
}

fn check_positive(op: &'static str, v: Extended) -> Result<()> {
    match v {
        Extended::Finite(x) if !(x > 0.0) => {
            Err(domain(op, format!("parameter must be positive, got {x}")))
        }
        _ => Ok(()),
    }
}

/// p_E(t, ε, γ).
pub fn p_esseen(t: f64, eps: Extended, gamma: Extended) -> Result<f64> {
    check_positive("p_esseen", eps)?;
    check_positive("p_esseen", gamma)?;
    let t = t.abs();
    if let Extended::Finite(e) = eps {
        let tg = t_thresholds(gamma)?.t_gamma;
        if e * t <= tg {
            let kappa = universal_constants().kappa;
            return Ok(kappa * t * t / e + e * t.powi(4) / 24.0);
        }
    }
    Ok(cubic_coefficient(gamma) * t.powi(3))
}

/// p_R(t, ε, γ) = t²·max{|t|/(6(γ∧γ*)), ϰ/ε + εt²/24, εt²/12}, evaluated by branch.
pub fn p_rozovskii(t: f64, eps: f64, gamma: Extended) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(domain(
            "p_rozovskii",
            format!("ε must be finite and positive, got {eps}"),
        ));
    }
    check_positive("p_rozovskii", gamma)?;
    let t = t.abs();
    let th = t_thresholds(gamma)?;
    let s = eps * t;
    let t2 = t * t;
    if s <= th.t1 {
        Ok(t2 * (universal_constants().kappa / eps + eps * t2 / 24.0))
    } else if s <= th.t2 {
        let g = gamma.min(Extended::gamma_star()).value();
        Ok(t2 * t / (6.0 * g))
    } else {
        Ok(eps * t2 * t2 / 12.0)
    }
}

/// p_E or p_R according to the context kind.
pub fn p_kind(t: f64, ctx: &BoundContext) -> Result<f64> {
    match ctx.kind {
        FractionKind::Esseen => p_esseen(t, ctx.eps, ctx.gamma),
        FractionKind::Rozovskii => p_rozovskii(t, ctx.eps.value(), ctx.gamma),
    }
}

/// B(τ, ε) = √(α/2)/(2 − ατ²) for 0 ≤ τ < τ̄₀(ε).
pub fn envelope_b(tau: f64, eps: Extended) -> Result<f64> {
    let a = alpha(eps);
    if !(tau >= 0.0) || tau >= tau0_bar(eps) {
        return Err(domain(
            "envelope_B",
            format!("τ = {tau} outside [0, τ̄₀(ε))"),
        ));
    }
    Ok((a / 2.0).sqrt() / (2.0 - a * tau * tau))
}

/// B(u, ε, L) = −4α₁/(α²u⁴)·[ln(1 − αu²/2) + αu²/2] for 0 ≤ u < τ̄₀(ε).
pub fn envelope_b_full(u: f64, eps: Extended, l: f64) -> Result<f64> {
    let g = truncation_geometry(eps, l)?;
    let u = u.abs();
    if u >= g.tau0_bar {
        return Err(domain(
            "envelope_B_full",
            format!("L|t| = {u} ≥ τ̄₀(ε) = {}", g.tau0_bar),
        ));
    }
    let x = g.alpha * u * u / 2.0;
    if x < 0.1 {
        // α₁ Σ x^j/(j+2)
        let mut sum = 0.0;
        let mut p = 1.0;
        for j in 0..40 {
            let term = p / (j as f64 + 2.0);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
            p *= x;
        }
        return Ok(g.alpha1 * sum);
    }
    Ok(-g.alpha1 / (x * x) * ((-x).ln_1p() + x))
}

/// A_E or A_R at τ₀.
pub fn envelope_a(
    kind: FractionKind,
    tau0: f64,
    eps: Extended,
    gamma: Extended,
    l: f64,
) -> Result<f64> {
    let g = truncation_geometry(eps, l)?;
    if l > g.l0_bar {
        return Err(domain(
            "envelope_A",
            format!("L = {l} exceeds L̄₀(ε) = {}", g.l0_bar),
        ));
    }
    let b = envelope_b(tau0, eps)?;
    let u = universal_constants();
    let t3 = tau0.powi(3);
    let tail = u.kappa * eps.recip() * l * tau0 * tau0;
    let exponent = tau0.powi(4) * b
        + match kind {
            FractionKind::Esseen => t3 * gamma.recip() / 6.0 + (u.kappa / 3.0).sqrt() * t3 + tail,
            FractionKind::Rozovskii => {
                let below = gamma.value() < u.gamma_star;
                if below {
                    t3 * gamma.recip() / 6.0 + tail
                } else {
                    tail
                }
            }
        };
    Ok(exponent.exp())
}

/// exp{−k(L³|t|, 2ε|t|)·t²}.
pub fn abs_chf_bound(t: f64, ctx: &BoundContext) -> f64 {
    let t = t.abs();
    if t == 0.0 {
        return 1.0;
    }
    let tau = ctx.l.powi(3) * t;
    let u = 2.0 * ctx.eps.value() * t;
    (-k_capped(tau, u) * t * t).exp().min(1.0)
}

/// exp{−k(τ₁)·t²}, valid for τ₁ ≥ πL³/ε and |t| ≤ τ₁/L³.
pub fn abs_chf_bound_flat(t: f64, tau1: f64, ctx: &BoundContext) -> Result<f64> {
    let l3 = ctx.l.powi(3);
    let lower = std::f64::consts::PI * l3 * ctx.eps.recip();
    if !(tau1 >= lower) {
        return Err(Error::Constraint(format!(
            "τ₁ = {tau1} below πL³/ε = {lower}"
        )));
    }
    if t.abs() > tau1 / l3 {
        return Err(Error::Constraint(format!(
            "|t| = {} beyond τ₁/L³ = {}",
            t.abs(),
            tau1 / l3
        )));
    }
    Ok((-k_tau(tau1) * t * t).exp().min(1.0))
}

/// (exp{L³p(t) + L⁴t⁴B(L|t|, ε, L)} − 1)·e^{−t²/2} for L|t| < τ̄₀(ε).
pub fn diff_bound(t: f64, ctx: &BoundContext) -> Result<f64> {
    let t = t.abs();
    let l = ctx.l;
    let b = envelope_b_full(l * t, ctx.eps, l)?;
    let p = p_kind(t, ctx)?;
    let exponent = l.powi(3) * p + (l * t).powi(4) * b;
    Ok(exponent.exp_m1() * (-t * t / 2.0).exp())
}

/// h(τ₀, ε, L) = 1 − ετ₀²L/6.
pub fn rozovskii_h(tau0: f64, eps: f64, l: f64) -> f64 {
    1.0 - eps * tau0 * tau0 * l / 6.0
}

/// Analytic small-L form: A·(p + B(τ₀, ε)·L·t⁴)·L³·e^{−ht²/2}, h = 1 for Esseen.
pub fn diff_bound_small_l(t: f64, ctx: &BoundContext, tau0: f64) -> Result<f64> {
    let t = t.abs();
    let l = ctx.l;
    let g = truncation_geometry(ctx.eps, l)?;
    if l > g.l0_bar {
        return Err(Error::Constraint(format!(
            "L = {l} exceeds L̄₀(ε) = {}",
            g.l0_bar
        )));
    }
    if !(tau0 > 0.0 && tau0 < g.tau0_bar) {
        return Err(Error::Constraint(format!("τ₀ = {tau0} outside (0, τ̄₀(ε))")));
    }
    if l * t >= tau0 {
        return Err(Error::Constraint(format!("L|t| = {} ≥ τ₀ = {tau0}", l * t)));
    }
    let a = envelope_a(ctx.kind, tau0, ctx.eps, ctx.gamma, l)?;
    let b = envelope_b(tau0, ctx.eps)?;
    let p = p_kind(t, ctx)?;
    let h = match ctx.kind {
        FractionKind::Esseen => 1.0,
        FractionKind::Rozovskii => {
            let h = rozovskii_h(tau0, ctx.eps.value(), l);
            if !(h > 0.0) {
                return Err(Error::Constraint(format!(
                    "h(τ₀, ε, L) = {h} is not positive"
                )));
            }
            h
        }
    };
    Ok(a * (p + b * l * t.powi(4)) * l.powi(3) * (-h * t * t / 2.0).exp())
}
