#![allow(dead_code)]

use lindeberg::fractions::{DiscreteDistribution, SummandSystem};
use proptest::prelude::*;

/// Zero-mean distribution with `atoms` distinct atoms in roughly [−4, 4].
pub fn zero_mean(atoms: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DiscreteDistribution<f64>> {
    atoms
        .prop_flat_map(|k| (prop::collection::vec(-3.0f64..3.0, k), prop::collection::vec(0.05f64..1.0, k)))
        .prop_filter_map("atoms too close", |(xs, ws)| {
            let total: f64 = ws.iter().sum();
            let ps: Vec<f64> = ws.iter().map(|w| w / total).collect();
            let mean: f64 = xs.iter().zip(&ps).map(|(x, p)| x * p).sum();
            let mut atoms: Vec<(f64, f64)> = xs.iter().map(|x| x - mean).zip(ps).collect();
            atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
            if atoms.windows(2).any(|w| w[1].0 - w[0].0 < 1e-6) {
                return None;
            }
            DiscreteDistribution::centered(atoms).ok()
        })
}

/// Up to `blocks` independent blocks, each repeated up to `repeat` times.
pub fn system(
    blocks: usize,
    repeat: usize,
    atoms: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = SummandSystem<f64>> {
    prop::collection::vec((zero_mean(atoms), 1..=repeat), 1..=blocks)
        .prop_filter_map("degenerate system", |b| SummandSystem::new(b).ok())
}

/// Deterministic runner so suites give the same verdict on every run.
pub fn runner(cases: u32) -> proptest::test_runner::TestRunner {
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

use lindeberg::chf::{abs_chf_bound, diff_bound, BoundContext, FractionKind};
use lindeberg::constants::Extended;
use lindeberg::fractions::{chf, esseen_fraction, rozovskii_fraction, symmetrize};

/// σ²_s(z) ≤ 4σ²(z/2) and σ²_s(z) ≤ 2σ²(αz) + 2σ²((1−α)z) on random laws.
pub fn quadratic_tail_suite(cases: u32) -> Result<(), String> {
    let strategy = (zero_mean(2..=5), 0.01f64..6.0, 0.0f64..=1.0);
    runner(cases)
        .run(&strategy, |(d, z, a)| {
            let s = symmetrize(&d).sigma_tail(&z);
            prop_assert!(s <= 4.0 * d.sigma_tail(&(z / 2.0)) + 1e-12);
            prop_assert!(s <= 2.0 * d.sigma_tail(&(a * z)) + 2.0 * d.sigma_tail(&((1.0 - a) * z)) + 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn t_grid() -> Vec<f64> {
    let mut t: Vec<f64> = (1..=200).map(|i| 0.05 * i as f64).collect();
    t.extend((1..=30).map(|i| 10.0 * 100f64.powf(i as f64 / 30.0)));
    t
}

fn fraction(sys: &SummandSystem<f64>, kind: FractionKind, eps: Extended, gamma: f64) -> f64 {
    match (kind, eps) {
        (FractionKind::Esseen, Extended::Infinite) => esseen_fraction(sys, None, &gamma),
        (FractionKind::Esseen, Extended::Finite(e)) => esseen_fraction(sys, Some(&e), &gamma),
        (FractionKind::Rozovskii, e) => rozovskii_fraction(sys, &e.value(), &gamma),
    }
    .unwrap()
}

/// Exact |f̄ₙ(t)| and |f̄ₙ(t) − e^{−t²/2}| of random systems (n ≤ 5, ≤ 4 atoms) against
/// the majorants built from each system's own L. Returns the number of difference checks.
pub fn majorant_suite(cases: u32) -> Result<usize, String> {
    let eps_values = [0.5, 1.0, 2.12, 4.0, f64::INFINITY];
    let gamma_values = [0.2, 0.5599, 1.0, 3.0];
    let strategy = (
        system(3, 2, 2..=4).prop_filter("at most five summands", |s| s.len() <= 5),
        any::<bool>(),
        0..eps_values.len(),
        0..gamma_values.len(),
    );
    let grid = t_grid();
    let checked = std::cell::Cell::new(0usize);
    runner(cases)
        .run(&strategy, |(sys, esseen, ei, gi)| {
            let kind = if esseen { FractionKind::Esseen } else { FractionKind::Rozovskii };
            let eps = Extended::finite(eps_values[ei]).unwrap();
            if kind == FractionKind::Rozovskii && eps.is_infinite() {
                return Ok(());
            }
            let gamma = gamma_values[gi];
            let l = fraction(&sys, kind, eps, gamma).cbrt();
            let ctx = BoundContext::new(kind, eps, Extended::Finite(gamma), l).unwrap();
            for &t in &grid {
                let f = chf(&sys, t);
                let bound = abs_chf_bound(t, &ctx);
                prop_assert!(f.norm() <= bound + 1e-12, "{kind} {eps} {gamma} L={l} t={t}: |f|={} > {bound}", f.norm());
                // the difference bound is only defined for L|t| < τ̄₀(ε) and L ≤ L̄₀(ε)
                if let Ok(d) = diff_bound(t, &ctx) {
                    let r = (f - (-t * t / 2.0).exp()).norm();
                    prop_assert!(r <= d + 1e-12, "{kind} {eps} {gamma} L={l} t={t}: r={r} > {d}");
                    checked.set(checked.get() + 1);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(checked.get())
}
