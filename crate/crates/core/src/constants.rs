//! Universal constants, the Prawitz cosine coefficients a(θ), b(θ), the
//! threshold family t_γ, the truncation geometry α(ε), τ̄₀, L̄₀, α₁, and the
//! k-functions that drive the characteristic-function majorants.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::optimize::{bisect_root, golden_max};

/// A positive parameter that may be +∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn finite(x: f64) -> Result<Self> {
        if x > 0.0 && x.is_finite() {
            Ok(Extended::Finite(x))
        } else if x == f64::INFINITY {
            Ok(Extended::Infinite)
        } else {
            Err(domain(
                "Extended",
                format!("parameter must be positive, got {x}"),
            ))
        }
    }

    /// The balancing parameter value γ*.
    pub fn gamma_star() -> Self {
        Extended::Finite(universal_constants().gamma_star)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// Value as `f64`, with +∞ for the infinite variant.
    pub fn value(self) -> f64 {
        match self {
            Extended::Finite(x) => x,
            Extended::Infinite => f64::INFINITY,
        }
    }

    /// 1/x, with 1/∞ = 0.
    pub fn recip(self) -> f64 {
        match self {
            Extended::Finite(x) => 1.0 / x,
            Extended::Infinite => 0.0,
        }
    }

    pub fn min(self, other: Extended) -> Extended {
        if self.value() <= other.value() {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) if *x == universal_constants().gamma_star => f.write_str("gamma*"),
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Extended {
    type Err = Error;

    /// Accepts a positive number, `inf`/`∞`, or `gamma*`/`γ*`/`gstar`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => return Ok(Extended::Infinite),
            "gamma*" | "gstar" | "γ*" | "g*" => return Ok(Extended::gamma_star()),
            _ => {}
        }
        let x: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("not a parameter value: {s:?}")))?;
        Extended::finite(x)
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(x) => s.serialize_f64(*x),
            Extended::Infinite => s.serialize_str("inf"),
        }
    }
}

/// x₀, ϰ and γ*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniversalConstants {
    pub x0: f64,
    pub kappa: f64,
    pub gamma_star: f64,
}

impl UniversalConstants {
    /// t_∞ = 2/γ*.
    pub fn t_infinity(&self) -> f64 {
        2.0 / self.gamma_star
    }

    /// τ̄₁ = π/4, the zero of k(τ).
    pub fn tau1_bar(&self) -> f64 {
        PI / 4.0
    }
}

/// 8(cos x − 1) + 8x sin x − 4x² cos x − x³ sin x.
pub fn kappa_equation(x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    8.0 * (c - 1.0) + 8.0 * x * s - 4.0 * x * x * c - x * x * x * s
}

/// Solves for x₀ on (π, 2π) and derives ϰ and γ*.
pub fn solve_universal_constants() -> UniversalConstants {
    let x0 = bisect_root(kappa_equation, PI, TAU, 1e-15).expect("the root is bracketed by (π, 2π)");
    let (s, c) = x0.sin_cos();
    let kappa = (c - 1.0 + x0 * x0 / 2.0).hypot(s - x0) / (x0 * x0);
    UniversalConstants {
        x0,
        kappa,
        gamma_star: 1.0 / (6.0 * kappa).sqrt(),
    }
}

/// Shared, lazily computed constants.
pub fn universal_constants() -> &'static UniversalConstants {
    static CELL: OnceLock<UniversalConstants> = OnceLock::new();
    CELL.get_or_init(solve_universal_constants)
}

/// a(θ) and b(θ) at one θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosCoefficients {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
}

const SERIES_CUTOFF: f64 = 1.0;

fn factorials() -> &'static [f64; 40] {
    static F: OnceLock<[f64; 40]> = OnceLock::new();
    F.get_or_init(|| {
        let mut f = [1.0; 40];
        for i in 1..40 {
            f[i] = f[i - 1] * i as f64;
        }
        f
    })
}

/// a(θ), b(θ) without domain checks.
pub(crate) fn ab(theta: f64) -> (f64, f64) {
    if theta < SERIES_CUTOFF {
        let f = factorials();
        let x = theta * theta;
        let (mut a, mut b, mut p, mut sign) = (0.0, 0.0, 1.0, 1.0);
        for k in 0..16 {
            a += sign * (2.0 / f[2 * k + 2] - 0.5 / f[2 * k + 1]) * p;
            b -= sign * (1.0 / f[2 * k + 4] - 0.5 / f[2 * k + 3]) * p;
            p *= x;
            sign = -sign;
        }
        return (a, b);
    }
    if theta >= TAU {
        return (0.0, 0.0);
    }
    let half = (0.5 * theta).sin();
    let one_minus_cos = 2.0 * half * half;
    let sin = theta.sin();
    let t2 = theta * theta;
    let a = 2.0 * one_minus_cos / t2 - sin / (2.0 * theta);
    let b = one_minus_cos / (t2 * t2) - sin / (2.0 * t2 * theta);
    (a, b)
}

/// a(θ) = 2(1−cos θ)/θ² − sin θ/(2θ), b(θ) = (1−cos θ)/θ⁴ − sin θ/(2θ³).
pub fn cos_coefficients(theta: f64) -> Result<CosCoefficients> {
    if !(0.0..=TAU).contains(&theta) {
        return Err(domain(
            "cos_coefficients",
            format!("θ must lie in [0, 2π], got {theta}"),
        ));
    }
    let (a, b) = ab(theta);
    Ok(CosCoefficients { theta, a, b })
}

/// The threshold family t_γ ≤ t₁,γ ≤ t₂,γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TThresholds {
    pub t_gamma: f64,
    pub t1: f64,
    pub t2: f64,
}

pub fn t_thresholds(gamma: Extended) -> Result<TThresholds> {
    let gs = universal_constants().gamma_star;
    let t_inf = 2.0 / gs;
    match gamma {
        Extended::Infinite => Ok(TThresholds {
            t_gamma: t_inf,
            t1: t_inf,
            t2: t_inf,
        }),
        Extended::Finite(g) => {
            if !(g > 0.0) {
                return Err(domain(
                    "t_thresholds",
                    format!("γ must be positive, got {g}"),
                ));
            }
            let r = g / gs;
            // √(r²+1) − 1 without cancellation.
            let t_gamma = 2.0 / g * (r * r / ((r * r + 1.0).sqrt() + 1.0));
            let t2 = 2.0 * (1.0 / g).max(1.0 / gs);
            let t1 = if r >= 1.0 {
                t2
            } else {
                let s = 1.0 - r * r;
                t2 * (r * r / (1.0 + s.sqrt()))
            };
            Ok(TThresholds { t_gamma, t1, t2 })
        }
    }
}

/// α(ε), τ̄₀(ε), L̄₀(ε) and α₁(ε, L).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationGeometry {
    pub alpha: f64,
    pub tau0_bar: f64,
    pub l0_bar: f64,
    pub alpha1: f64,
}

/// α(ε) = inf over 0 < x < ε ∧ 1 of (x − x³)^{−2/3}.
pub fn alpha(eps: Extended) -> f64 {
    match eps {
        Extended::Finite(e) if e <= 1.0 / 3f64.sqrt() => (e - e * e * e).powf(-2.0 / 3.0),
        _ => 3.0 * 2f64.powf(-2.0 / 3.0),
    }
}

/// τ̄₀(ε) = √(2/α(ε)).
pub fn tau0_bar(eps: Extended) -> f64 {
    (2.0 / alpha(eps)).sqrt()
}

pub fn truncation_geometry(eps: Extended, l: f64) -> Result<TruncationGeometry> {
    if let Extended::Finite(e) = eps {
        if !(e > 0.0) {
            return Err(domain(
                "truncation_geometry",
                format!("ε must be positive, got {e}"),
            ));
        }
    }
    if !(l > 0.0) {
        return Err(domain(
            "truncation_geometry",
            format!("L must be positive, got {l}"),
        ));
    }
    let alpha = alpha(eps);
    let tau0_bar = (2.0 / alpha).sqrt();
    let (l0_bar, alpha1) = match eps {
        Extended::Infinite => (f64::INFINITY, (alpha / 2.0).sqrt()),
        Extended::Finite(e) => {
            let l0_bar = e * tau0_bar;
            let alpha1 = if l <= l0_bar {
                (alpha / 2.0).sqrt()
            } else {
                e / (2.0 * l) + alpha * l / (4.0 * e)
            };
            (l0_bar, alpha1)
        }
    };
    Ok(TruncationGeometry {
        alpha,
        tau0_bar,
        l0_bar,
        alpha1,
    })
}

/// k(τ, u, θ) = a(θ) − 4τu⁻¹(a(θ) + b(θ)u²).
pub fn k_theta(tau: f64, u: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= TAU) {
        return Err(domain(
            "k_theta",
            format!("θ must lie in (0, 2π], got {theta}"),
        ));
    }
    if !(tau >= 0.0) || !(u >= 0.0) {
        return Err(domain(
            "k_theta",
            format!("need τ, u ≥ 0, got ({tau}, {u})"),
        ));
    }
    let (a, b) = ab(theta);
    Ok(k_raw(tau, u, a, b))
}

fn k_raw(tau: f64, u: f64, a: f64, b: f64) -> f64 {
    if u == 0.0 {
        return if tau == 0.0 { a } else { f64::NEG_INFINITY };
    }
    if tau == 0.0 {
        return a;
    }
    a - 4.0 * tau * (a / u + b * u)
}

const GRID_CELLS: usize = 2048;

struct ThetaTable {
    theta: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    sqrt_ab: Vec<f64>,
    ratio: Vec<f64>,
}

/// √(a/b), with its limit 2π at θ = 2π.
fn cap_ratio(theta: f64, a: f64, b: f64) -> f64 {
    if theta >= TAU || b <= 0.0 {
        TAU
    } else {
        (a / b).sqrt()
    }
}

fn theta_table() -> &'static ThetaTable {
    static T: OnceLock<ThetaTable> = OnceLock::new();
    T.get_or_init(|| {
        let n = GRID_CELLS + 1;
        let mut t = ThetaTable {
            theta: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            sqrt_ab: Vec::with_capacity(n),
            ratio: Vec::with_capacity(n),
        };
        for i in 0..n {
            let theta = TAU * i as f64 / GRID_CELLS as f64;
            let (a, b) = ab(theta);
            t.theta.push(theta);
            t.a.push(a);
            t.b.push(b);
            t.sqrt_ab.push((a * b).sqrt());
            t.ratio.push(cap_ratio(theta, a, b));
        }
        t
    })
}

/// Capped objective k(τ, u ∧ √(a/b), θ) from a, b.
#[inline]
fn capped_value(tau: f64, u: f64, a: f64, b: f64, sqrt_ab: f64, ratio: f64) -> f64 {
    if u >= ratio {
        a - 8.0 * tau * sqrt_ab
    } else {
        k_raw(tau, u, a, b)
    }
}

fn capped_at(tau: f64, u: f64, theta: f64) -> f64 {
    let (a, b) = ab(theta);
    capped_value(tau, u, a, b, (a * b).sqrt(), cap_ratio(theta, a, b))
}

/// Grid scan followed by golden refinement around the competitive local maxima.
fn theta_sup(tau: f64, u: f64) -> f64 {
    let t = theta_table();
    let n = t.theta.len();
    let mut vals = [0.0f64; GRID_CELLS + 1];
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let v = capped_value(tau, u, t.a[i], t.b[i], t.sqrt_ab[i], t.ratio[i]);
        vals[i] = v;
        if v > best {
            best = v;
        }
    }
    let mut result = best;
    let mut refined = 0;
    for i in 0..n {
        let left = if i > 0 {
            vals[i - 1]
        } else {
            f64::NEG_INFINITY
        };
        let right = if i + 1 < n {
            vals[i + 1]
        } else {
            f64::NEG_INFINITY
        };
        if vals[i] >= left && vals[i] >= right && vals[i] >= best - 1e-4 {
            let lo = t.theta[i.saturating_sub(1)];
            let hi = t.theta[(i + 1).min(n - 1)];
            let (_, v) = golden_max(|th| capped_at(tau, u, th), lo, hi, 1e-9);
            result = result.max(v).max(vals[i]);
            refined += 1;
            if refined == 4 {
                break;
            }
        }
    }
    result
}

/// k(τ, u) = sup over θ of k(τ, u ∧ √(a(θ)/b(θ)), θ).
///
/// `u = +∞` gives [`k_tau`].
pub fn k_capped(tau: f64, u: f64) -> f64 {
    if tau == 0.0 {
        return 0.5;
    }
    if u == 0.0 {
        return f64::NEG_INFINITY;
    }
    theta_sup(tau, u)
}

/// k(τ) = sup over θ of a(θ) − 8τ√(a(θ)b(θ)); positive iff τ < π/4.
pub fn k_tau(tau: f64) -> f64 {
    k_capped(tau, f64::INFINITY)
}
