//! Supremum of C₁ over L, the assembled constant C(ε, γ) and its level curves.

use serde::Serialize;

use super::large_l::{C1Evaluator, C1Settings};
use super::small_l::{c0_capped, small_l_cap};
use super::{BoundBreakdown, LargeLParams, Params, C_MIN, DEFAULT_L0, L1};
use crate::chf::{BoundContext, FractionKind};
use crate::constants::Extended;
use crate::error::{Error, Result};
use crate::optimize::golden_max;
use crate::special::std_normal_cdf;

/// sup over x > 0 of |1/(1 + x²) − Φ(−x)|, the largest Kolmogorov distance of a standardized law.
pub fn max_standardized_distance() -> f64 {
    let f = |x: f64| (1.0 / (1.0 + x * x) - std_normal_cdf(-x)).abs();
    golden_max(f, 0.0, 2.0, 1e-12).1
}

#[derive(Debug, Clone, Copy)]
pub struct SupSettings {
    pub c1: C1Settings,
    /// Geometric cells of the starting L-grid.
    pub initial_cells: usize,
    /// Refinement stops once the certified bound exceeds the best point value by less than this.
    pub slack: f64,
    /// Cap on C₁ evaluations during refinement.
    pub max_evaluations: usize,
}

impl Default for SupSettings {
    fn default() -> Self {
        Self {
            c1: C1Settings::default(),
            initial_cells: 64,
            slack: 5e-3,
            max_evaluations: 400,
        }
    }
}

impl SupSettings {
    /// Settings for reported constants, tight enough that rounding up to two decimals is not affected by the slack.
    pub fn reporting() -> Self {
        Self {
            slack: 2e-4,
            max_evaluations: 1000,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SupResult {
    /// Certified upper bound for max C₁ over the range.
    pub value: f64,
    /// Grid point with the largest C₁.
    pub argmax: f64,
    pub best: BoundBreakdown,
    /// Certified bound minus best point value.
    pub gap: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Node {
    l: f64,
    b: BoundBreakdown,
}

fn params_of(b: &BoundBreakdown) -> Option<LargeLParams> {
    match b.params {
        Params::Large(p) => Some(p),
        Params::Small(_) => None,
    }
}

fn eval_at(
    family: &BoundContext,
    l: f64,
    settings: &C1Settings,
    hint: Option<&BoundBreakdown>,
) -> Result<BoundBreakdown> {
    let ctx = family.with_l(l)?;
    let start = hint.and_then(|h| {
        let (a, b) = params_of(h)?.scaled(h.l);
        Some(LargeLParams::from_scaled(l, a, b))
    });
    C1Evaluator::new(&ctx, *settings)?.minimize(start)
}

fn cell_bound(lo: &Node, hi: &Node) -> f64 {
    hi.b.total * (hi.l / lo.l).powi(3)
}

/// Certified sup of C₁(ε, γ, L) over [`l_lo`, `l_hi`] by the ratio rule
/// max over [L′, L″] ≤ C₁(L″)(L″/L′)³ on a refining geometric grid.
pub fn c1_sup(
    family: &BoundContext,
    l_lo: f64,
    l_hi: f64,
    settings: &SupSettings,
) -> Result<SupResult> {
    if !(l_lo > 0.0 && l_hi >= l_lo) {
        return Err(Error::Constraint(format!(
            "need 0 < L_lo ≤ L_hi, got [{l_lo}, {l_hi}]"
        )));
    }
    if l_hi == l_lo {
        let b = eval_at(family, l_hi, &settings.c1, None)?;
        return Ok(SupResult {
            value: b.total,
            argmax: l_hi,
            best: b,
            gap: 0.0,
            evaluations: 1,
            converged: true,
        });
    }
    let n = settings.initial_cells.max(1);
    let mut nodes: Vec<Node> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let l = l_lo * (l_hi / l_lo).powf(i as f64 / n as f64);
        let b = eval_at(family, l, &settings.c1, nodes.last().map(|x| &x.b))?;
        nodes.push(Node { l, b });
    }
    let mut evaluations = n + 1;
    loop {
        let (best_i, best) = nodes.iter().enumerate().map(|(i, x)| (i, x.b.total)).fold(
            (0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
        let (worst_cell, certified) = (0..nodes.len() - 1)
            .map(|i| (i, cell_bound(&nodes[i], &nodes[i + 1])))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        let certified = certified.max(best);
        let gap = certified - best;
        let converged = gap < settings.slack;
        if converged || evaluations >= settings.max_evaluations {
            return Ok(SupResult {
                value: certified,
                argmax: nodes[best_i].l,
                best: nodes[best_i].b,
                gap,
                evaluations,
                converged,
            });
        }
        let (lo, hi) = (&nodes[worst_cell], &nodes[worst_cell + 1]);
        let mid = (lo.l * hi.l).sqrt();
        let hint = if lo.b.total > hi.b.total {
            &lo.b
        } else {
            &hi.b
        };
        let b = eval_at(family, mid, &settings.c1, Some(hint))?;
        nodes.insert(worst_cell + 1, Node { l: mid, b });
        evaluations += 1;
    }
}

/// Point maximum of C₁ over [`l_lo`, `l_hi`]: a coarse scan, then golden-section search.
pub fn c1_extreme(
    family: &BoundContext,
    l_lo: f64,
    l_hi: f64,
    settings: &C1Settings,
) -> Result<(f64, BoundBreakdown)> {
    const SCAN: usize = 12;
    let mut scan: Vec<(f64, BoundBreakdown)> = Vec::with_capacity(SCAN + 1);
    for i in 0..=SCAN {
        let l = l_lo * (l_hi / l_lo).powf(i as f64 / SCAN as f64);
        let b = eval_at(family, l, settings, scan.last().map(|x| &x.1))?;
        scan.push((l, b));
    }
    let k = (0..scan.len()).fold(0, |k, i| {
        if scan[i].1.total > scan[k].1.total {
            i
        } else {
            k
        }
    });
    let lo = scan[k.saturating_sub(1)].0;
    let hi = scan[(k + 1).min(SCAN)].0;
    let hint = scan[k].1;
    let mut failure = None;
    let (l, _) = golden_max(
        |l| match eval_at(family, l, settings, Some(&hint)) {
            Ok(b) => b.total,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        1e-5,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let b = eval_at(family, l, settings, Some(&hint))?;
    if b.total >= scan[k].1.total {
        Ok((l, b))
    } else {
        Ok(scan[k])
    }
}

/// The small-L cap actually used: 0.03, or just below the admissible cap when that is smaller.
pub fn default_l0(kind: FractionKind, eps: Extended) -> f64 {
    DEFAULT_L0.min(small_l_cap(kind, eps) * (1.0 - 1e-6))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantReport {
    pub kind: FractionKind,
    pub eps: Extended,
    pub gamma: Extended,
    /// max{C_min, C₀(L₀), certified sup C₁}.
    pub value: f64,
    pub c_min: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    pub c0: BoundBreakdown,
    pub c1: SupResult,
}

/// C(ε, γ) = max{C_min, C₀(ε, γ, L₀), sup over [L₀, L₁] of C₁} with default settings.
pub fn absolute_constant(
    kind: FractionKind,
    eps: Extended,
    gamma: Extended,
) -> Result<ConstantReport> {
    absolute_constant_with(kind, eps, gamma, None, &SupSettings::default())
}

pub fn absolute_constant_with(
    kind: FractionKind,
    eps: Extended,
    gamma: Extended,
    l0: Option<f64>,
    settings: &SupSettings,
) -> Result<ConstantReport> {
    let l0 = l0.unwrap_or_else(|| default_l0(kind, eps));
    let family = BoundContext::new(kind, eps, gamma, l0)?;
    let c0 = c0_capped(&family, l0)?;
    let c1 = c1_sup(&family, l0, L1, settings)?;
    Ok(ConstantReport {
        kind,
        eps,
        gamma,
        value: C_MIN.max(c0.total).max(c1.value),
        c_min: C_MIN,
        l0,
        l1: L1,
        c0,
        c1,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelPoint {
    pub eps: Extended,
    /// Smallest γ meeting the target, `None` when no γ does.
    pub gamma: Option<f64>,
    pub value: Option<f64>,
    pub note: Option<String>,
}

/// Point estimate of C(ε, γ): max{C_min, C₀(L₀), max over L of C₁}.
fn point_constant(
    kind: FractionKind,
    eps: Extended,
    gamma: Extended,
    settings: &C1Settings,
) -> Result<f64> {
    let l0 = default_l0(kind, eps);
    let family = BoundContext::new(kind, eps, gamma, l0)?;
    let c0 = c0_capped(&family, l0)?.total;
    let (_, c1) = c1_extreme(&family, l0, L1, settings)?;
    Ok(C_MIN.max(c0).max(c1.total))
}

/// For each ε, the smallest γ (to relative accuracy 1e−3) whose constant is ≤ `target`.
///
/// Uses the point maximum of C₁ over L, which is what the level curves are drawn from.
pub fn level_curve(
    kind: FractionKind,
    target: f64,
    eps_grid: &[Extended],
    settings: &C1Settings,
) -> Vec<LevelPoint> {
    eps_grid
        .iter()
        .map(|&eps| level_point(kind, target, eps, settings))
        .collect()
}

fn level_point(
    kind: FractionKind,
    target: f64,
    eps: Extended,
    settings: &C1Settings,
) -> LevelPoint {
    let fail = |note: String| LevelPoint {
        eps,
        gamma: None,
        value: None,
        note: Some(note),
    };
    let at = |g: Extended| point_constant(kind, eps, g, settings);
    const G_LO: f64 = 0.05;
    const G_HI: f64 = 1e3;
    match super::small_l::aex_upper(kind, eps, Extended::Infinite) {
        Ok(a) if a > target => {
            return fail(format!("not attainable: Ĉ*(ε, ∞) = {a:.5} > {target}"))
        }
        Err(e) => return fail(e.to_string()),
        _ => {}
    }
    let v_hi = match at(Extended::Finite(G_HI)) {
        Ok(v) => v,
        Err(e) => return fail(e.to_string()),
    };
    if v_hi > target {
        return fail(format!("not attainable for γ ≤ {G_HI}: C = {v_hi:.5}"));
    }
    let mut lo = G_LO;
    let mut hi = G_HI;
    let mut v_at_hi = v_hi;
    match at(Extended::Finite(lo)) {
        Ok(v) if v <= target => {
            return LevelPoint {
                eps,
                gamma: Some(lo),
                value: Some(v),
                note: Some(format!("target met already at γ = {G_LO}")),
            }
        }
        Ok(_) => {}
        Err(e) => return fail(e.to_string()),
    }
    while hi / lo > 1.0 + 1e-3 {
        let mid = (lo * hi).sqrt();
        match at(Extended::Finite(mid)) {
            Ok(v) if v <= target => {
                hi = mid;
                v_at_hi = v;
            }
            Ok(_) => lo = mid,
            Err(e) => return fail(format!("bisection failed at γ = {mid}: {e}")),
        }
    }
    LevelPoint {
        eps,
        gamma: Some(hi),
        value: Some(v_at_hi),
        note: None,
    }
}
