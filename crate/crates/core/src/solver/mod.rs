//! Evaluation of the constants C_E(ε,γ), C_R(ε,γ): the closed-form small-L
//! bound C₀, the quadrature bound C₁ and its certified supremum over L, the
//! final assembly, and the asymptotic bounds Ĉ*.

mod large_l;
mod prawitz;
pub mod search;
mod small_l;
mod sup;

use serde::Serialize;

pub use large_l::{c1, c1_objective, c1_objective_with, c1_with, C1Evaluator, C1Settings};
pub use prawitz::{prawitz_kernel, prawitz_kernel_regular_part};
pub use small_l::{aex_upper, c0, c0_capped, c0_objective, c0_objective_capped, small_l_cap};
pub use sup::{
    absolute_constant, absolute_constant_with, c1_extreme, c1_sup, default_l0, level_curve,
    max_standardized_distance, ConstantReport, LevelPoint, SupResult, SupSettings,
};

/// Upper end of the large-L range.
pub const L1: f64 = 0.65;
/// Default small-L cap.
pub const DEFAULT_L0: f64 = 0.03;
/// Floor of every constant: for L > L₁ the bound Δₙ ≤ 0.5409… already gives Δₙ < 2L³.
pub const C_MIN: f64 = 2.0;

/// Smoothing parameters of the small-L bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallLParams {
    pub tau0: f64,
    pub tau1: f64,
}

/// Smoothing parameters of the large-L bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeLParams {
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
}

impl LargeLParams {
    /// From the scaled pair (T₀L, T₁L³).
    pub fn from_scaled(l: f64, tau0: f64, tau1: f64) -> Self {
        Self {
            t0: tau0 / l,
            t1: tau1 / l.powi(3),
        }
    }

    /// (T₀L, T₁L³).
    pub fn scaled(&self, l: f64) -> (f64, f64) {
        (self.t0 * l, self.t1 * l.powi(3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Small(SmallLParams),
    Large(LargeLParams),
}

/// Terms of a bound, each already divided by L³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundBreakdown {
    pub total: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    #[serde(rename = "I3")]
    pub i3: f64,
    #[serde(rename = "I4")]
    pub i4: f64,
    pub params: Params,
    #[serde(rename = "L")]
    pub l: f64,
}

impl BoundBreakdown {
    fn new(i: [f64; 4], params: Params, l: f64) -> Self {
        Self {
            total: i.iter().sum(),
            i1: i[0],
            i2: i[1],
            i3: i[2],
            i4: i[3],
            params,
            l,
        }
    }
}

/// Rounds up to `digits` decimals, for reporting upper bounds.
pub fn round_up(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    let y = (x * s).ceil() / s;
    if y < x {
        y + 1.0 / s
    } else {
        y
    }
}
