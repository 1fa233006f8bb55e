//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use lindeberg::chf::{BoundContext, FractionKind};
use lindeberg::constants::{solve_universal_constants, Extended};
use lindeberg::fractions::scenario::{scenario, scenario_exact, ScenarioName};
use lindeberg::fractions::{
    esseen_fraction, kolmogorov_distance, osipov_fraction, rozovskii_fraction, DiscreteDistribution, SummandSystem,
};
use lindeberg::optimize::golden_min;
use lindeberg::solver::{
    aex_upper, absolute_constant_with, c0_capped, c1_extreme, default_l0, C1Settings, ConstantReport, SupSettings, L1,
};
use lindeberg::tables::{reproduce, Status, TableOptions};
use num_rational::BigRational;

use FractionKind::{Esseen, Rozovskii};

type Outcome = Result<String, String>;

fn fin(x: f64) -> Extended {
    Extended::Finite(x)
}

fn gs() -> Extended {
    Extended::gamma_star()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    check((got - want).abs() <= tol, format!("{name} = {got:.7}, expected {want} ± {tol:e}"))
}

fn in_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed <= limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

/// Constants are expensive; the end-to-end check reuses the final-constant runs.
#[derive(Default)]
struct Constants(HashMap<String, ConstantReport>);

impl Constants {
    fn get(&mut self, kind: FractionKind, eps: Extended, gamma: Extended) -> &ConstantReport {
        let key = format!("{kind}/{eps}/{gamma}");
        self.0.entry(key).or_insert_with(|| {
            let settings = SupSettings {
                slack: 5e-4,
                max_evaluations: 1000,
                ..SupSettings::default()
            };
            absolute_constant_with(kind, eps, gamma, None, &settings).expect("constant evaluates")
        })
    }
}

fn universal() -> Outcome {
    let start = Instant::now();
    let u = solve_universal_constants();
    let elapsed = start.elapsed();
    within("x0", u.x0, 5.487414, 1e-5)?;
    within("kappa", u.kappa, 0.531551, 1e-5)?;
    within("gamma*", u.gamma_star, 0.5599, 1e-4)?;
    in_time(elapsed, Duration::from_secs(1))?;
    Ok(format!("x0 = {:.8}, kappa = {:.8}, gamma* = {:.8}", u.x0, u.kappa, u.gamma_star))
}

fn table_status(id: u8, limit: Duration) -> Outcome {
    let start = Instant::now();
    let r = reproduce(id, &TableOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let bad: Vec<String> = r
        .cells
        .iter()
        .filter(|c| c.status != Status::Pass)
        .map(|c| format!("{:?}/{}/{}: {:+.2e}", c.eps, c.gamma, c.column, c.deviation))
        .collect();
    check(bad.is_empty(), format!("table {id}: {}", bad.join(", ")))?;
    in_time(elapsed, limit)?;
    let worst = r
        .cells
        .iter()
        .map(|c| c.deviation.abs() / c.tolerance)
        .fold(0.0, f64::max);
    Ok(format!("table {id}: {} cells, worst |dev|/tol = {worst:.2}, {elapsed:.1?}", r.cells.len()))
}

fn table_one() -> Outcome {
    table_status(1, Duration::from_secs(1))
}

fn closed_forms() -> Outcome {
    let start = Instant::now();
    let e = |eps, g| aex_upper(Esseen, eps, g).unwrap();
    within("C*_E(inf,inf)", e(Extended::Infinite, Extended::Infinite), 1.7145, 1e-4)?;
    within("C*_E(inf,1)", e(Extended::Infinite, fin(1.0)), 1.7318, 1e-4)?;
    within("C*_E(inf,gamma*)", e(Extended::Infinite, gs()), 1.7636, 1e-4)?;
    let r = |eps: f64| aex_upper(Rozovskii, fin(eps), gs()).unwrap();
    let at = r(1.89);
    check(at <= 1.75, format!("C*_R(1.89, gamma*) = {at}"))?;
    let (eps_min, v_min) = golden_min(r, 0.5, 5.0, 1e-6);
    check((eps_min - 1.89).abs() <= 0.02, format!("argmin over eps at {eps_min}"))?;
    in_time(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("C*_R(1.89, gamma*) = {at:.5}, min {v_min:.5} at eps = {eps_min:.4}"))
}

fn small_l_tables() -> Outcome {
    let start = Instant::now();
    let a = table_status(2, Duration::from_secs(60))?;
    let b = table_status(3, Duration::from_secs(60))?;
    in_time(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{a}; {b}"))
}

fn large_l_tables() -> Outcome {
    let start = Instant::now();
    let a = table_status(4, Duration::from_secs(600))?;
    let b = table_status(5, Duration::from_secs(600))?;
    in_time(start.elapsed(), Duration::from_secs(600))?;
    Ok(format!("{a}; {b}"))
}

const HEADLINES: [(FractionKind, Option<f64>, Option<f64>, f64); 5] = [
    (Esseen, None, None, 2.655),
    (Rozovskii, Some(2.12), Some(-1.0), 2.665),
    (Esseen, Some(1.0), Some(0.72), 2.735),
    (Rozovskii, Some(1.0), Some(-1.0), 2.735),
    (Esseen, None, Some(0.97), 2.665),
];

/// None is +∞ and a negative value stands for γ*.
fn decode(v: Option<f64>) -> Extended {
    match v {
        None => Extended::Infinite,
        Some(x) if x < 0.0 => gs(),
        Some(x) => fin(x),
    }
}

fn final_constants(cache: &mut Constants) -> Outcome {
    let mut parts = Vec::new();
    for (kind, eps, gamma, limit) in HEADLINES {
        let (eps, gamma) = (decode(eps), decode(gamma));
        let c = cache.get(kind, eps, gamma);
        check(
            c.value <= limit,
            format!("C_{kind}({eps}, {gamma}) = {:.5} > {limit}", c.value),
        )?;
        parts.push(format!("C_{kind}({eps},{gamma}) = {:.5}", c.value));
    }
    Ok(parts.join(", "))
}

fn exact_identities() -> Outcome {
    let one = q(1, 1);
    let three_point = scenario_exact(ScenarioName::ThreePoint, 4, None).map_err(|e| e.to_string())?;
    let e = esseen_fraction(&three_point, Some(&one), &one).unwrap() * q(2, 1);
    let r = rozovskii_fraction(&three_point, &one, &one).unwrap() * q(2, 1);
    check(e == q(643, 675) && r == q(22, 25), format!("three-point: {e}, {r}"))?;

    let four_point = scenario_exact(ScenarioName::FourPoint, 9, None).unwrap();
    let e = esseen_fraction(&four_point, Some(&one), &one).unwrap() * q(3, 1);
    let r = rozovskii_fraction(&four_point, &one, &one).unwrap() * q(3, 1);
    let o = osipov_fraction(&four_point, Some(&one)).unwrap() * q(3, 1);
    check(e == q(9, 10) && r == q(9, 10) && o == q(87, 65), format!("four-point: {e}, {r}, {o}"))?;
    let lhs = q(273, 100) * e.clone().max(r);
    check(lhs == q(2457, 1000) && lhs < q(187, 100) * o, "four-point: 2.457 < 1.87·87/65 fails")?;

    for n in [4usize, 16, 36] {
        let sys = scenario_exact(ScenarioName::Alternating, n, None).unwrap();
        let rn = sys.b_n().unwrap();
        let e = esseen_fraction(&sys, Some(&one), &one).unwrap() * rn.clone();
        let r = rozovskii_fraction(&sys, &one, &one).unwrap() * rn;
        check(e == q(8, 9) && r == q(8, 9), format!("alternating n = {n}: {e}, {r}"))?;
    }
    let sys = scenario_exact(ScenarioName::Alternating, 4, None).unwrap();
    let o = osipov_fraction(&sys, Some(&one)).unwrap() * q(2, 1);
    check(o == q(25, 18), format!("alternating osipov: {o}"))?;
    check(q(273, 100) * q(8, 9) < q(187, 100) * o, "alternating: 2.4266 < 2.5972 fails")?;
    Ok("643/675, 22/25, 9/10, 87/65, 8/9, 25/18 exact".into())
}

fn quadratic_tails() -> Outcome {
    common::quadratic_tail_suite(10_000)?;
    let (a, b) = (q(49995, 100000), q(5001, 10000));
    let s = a.clone() + b.clone();
    let d = DiscreteDistribution::centered(vec![(-b.clone(), a.clone() / s.clone()), (a, b / s)]).unwrap();
    let ratio = lindeberg::fractions::quadratic_tail_ratio(&d, &one_q()).unwrap();
    check(ratio > q(399, 100), format!("extremal ratio {ratio}"))?;
    Ok(format!("10^4 random cases, extremal ratio = {:.5}", num_traits::ToPrimitive::to_f64(&ratio).unwrap()))
}

fn one_q() -> BigRational {
    q(1, 1)
}

fn majorants() -> Outcome {
    let n = common::majorant_suite(200)?;
    Ok(format!("200 systems, {n} difference checks"))
}

/// (E,1,1), (E,∞,∞), (R,1,1), (R,2.12,γ*).
fn soundness_configs() -> [(FractionKind, Extended, Extended); 4] {
    [
        (Esseen, fin(1.0), fin(1.0)),
        (Esseen, Extended::Infinite, Extended::Infinite),
        (Rozovskii, fin(1.0), fin(1.0)),
        (Rozovskii, fin(2.12), gs()),
    ]
}

/// L³ for the given kind, or `None` when γ = ∞ makes it infinite.
fn fraction_cubed(sys: &SummandSystem<f64>, kind: FractionKind, eps: Extended, gamma: Extended) -> Option<f64> {
    // γ = ∞ only keeps systems whose truncated third moments vanish
    let g = if gamma.is_infinite() { 1e6 } else { gamma.value() };
    let v = match (kind, eps) {
        (Esseen, Extended::Infinite) => esseen_fraction(sys, None, &g),
        (Esseen, Extended::Finite(e)) => esseen_fraction(sys, Some(&e), &g),
        (Rozovskii, e) => rozovskii_fraction(sys, &e.value(), &g),
    }
    .unwrap();
    (!gamma.is_infinite() || v < 1e3).then_some(v)
}

fn scenario_systems() -> Vec<(String, SummandSystem<f64>)> {
    let mut out = Vec::new();
    for p in [0.5, 0.55, 0.64, 0.8, 0.95] {
        for n in [1, 2, 3, 5, 8, 13, 21, 34] {
            out.push((format!("two-point p={p} n={n}"), scenario(ScenarioName::TwoPoint, n, Some(p)).unwrap()));
        }
    }
    for n in [1, 2, 4, 9, 16, 25] {
        out.push((format!("three-point n={n}"), scenario(ScenarioName::ThreePoint, n, None).unwrap()));
        out.push((format!("four-point n={n}"), scenario(ScenarioName::FourPoint, n, None).unwrap()));
    }
    for n in (2..=30).step_by(2) {
        out.push((format!("alternating n={n}"), scenario(ScenarioName::Alternating, n, None).unwrap()));
    }
    out
}

fn random_systems(count: u32) -> Vec<(String, SummandSystem<f64>)> {
    use proptest::strategy::{Strategy, ValueTree};
    let mut runner = common::runner(count);
    let strategy = common::system(3, 3, 2..=4);
    (0..count)
        .map(|i| {
            let s = strategy.new_tree(&mut runner).unwrap().current();
            (format!("random #{i}"), s)
        })
        .collect()
}

fn end_to_end(cache: &mut Constants) -> Outcome {
    let mut systems = scenario_systems();
    systems.extend(random_systems(50));
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    let mut tightest_at = String::new();
    let deltas: Vec<f64> = systems
        .iter()
        .map(|(_, s)| kolmogorov_distance(s).expect("within the atom cap"))
        .collect();
    for (kind, eps, gamma) in soundness_configs() {
        let c = cache.get(kind, eps, gamma).value;
        for ((name, sys), delta) in systems.iter().zip(&deltas) {
            let Some(l3) = fraction_cubed(sys, kind, eps, gamma) else {
                continue;
            };
            let bound = c * l3;
            check(
                *delta < bound,
                format!("{name}: Δ = {delta} ≥ C_{kind}({eps},{gamma})·L³ = {bound}"),
            )?;
            checked += 1;
            if bound - delta < tightest {
                tightest = bound - delta;
                tightest_at = format!("{name}, {kind}({eps},{gamma})");
            }
        }
    }
    Ok(format!("{checked} system/constant pairs, smallest margin {tightest:.4} ({tightest_at})"))
}

const EPS_GRID: [Option<f64>; 5] = [Some(0.6), Some(1.0), Some(2.12), Some(4.0), None];
const GAMMA_GRID: [Option<f64>; 5] = [Some(0.2), Some(0.4), Some(-1.0), Some(1.0), None];

struct Values {
    aex: f64,
    c0: f64,
    c1: f64,
}

fn values_at(kind: FractionKind, eps: Extended, gamma: Extended) -> Values {
    let l0 = default_l0(kind, eps);
    let family = BoundContext::new(kind, eps, gamma, l0).unwrap();
    Values {
        aex: aex_upper(kind, eps, gamma).unwrap(),
        c0: c0_capped(&family, l0).unwrap().total,
        c1: c1_extreme(&family, l0, L1, &C1Settings::default()).unwrap().1.total,
    }
}

fn monotonicity() -> Outcome {
    const TOL: f64 = 1e-6;
    let mut compared = 0;
    for kind in [Esseen, Rozovskii] {
        let eps_grid: Vec<Extended> = EPS_GRID
            .iter()
            .map(|&e| decode(e))
            .filter(|e| kind == Esseen || !e.is_infinite())
            .collect();
        let gammas: Vec<Extended> = GAMMA_GRID.iter().map(|&g| decode(g)).collect();
        let grid: Vec<Vec<Values>> = eps_grid
            .iter()
            .map(|&e| gammas.iter().map(|&g| values_at(kind, e, g)).collect())
            .collect();
        let pick = |v: &Values, k: usize| [v.aex, v.c0, v.c1][k];
        let names = ["C*", "C0", "C1"];
        for (i, row) in grid.iter().enumerate() {
            for j in 1..row.len() {
                for k in 0..3 {
                    let (a, b) = (pick(&row[j - 1], k), pick(&row[j], k));
                    check(
                        b <= a + TOL,
                        format!("{kind} {} at eps={}: gamma {} -> {}: {a} -> {b}", names[k], eps_grid[i], gammas[j - 1], gammas[j]),
                    )?;
                    compared += 1;
                    // Rozovskii values do not depend on γ ≥ γ*
                    if kind == Rozovskii && j >= 3 {
                        check(b == a, format!("{kind} {} at eps={} not constant for gamma >= gamma*: {a} vs {b}", names[k], eps_grid[i]))?;
                    }
                }
            }
        }
        if kind == Esseen {
            for j in 0..gammas.len() {
                for i in 1..grid.len() {
                    for k in 0..3 {
                        let (a, b) = (pick(&grid[i - 1][j], k), pick(&grid[i][j], k));
                        check(
                            b <= a + TOL,
                            format!("{kind} {} at gamma={}: eps {} -> {}: {a} -> {b}", names[k], gammas[j], eps_grid[i - 1], eps_grid[i]),
                        )?;
                        compared += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{compared} neighbour comparisons"))
}

fn main() {
    let mut cache = Constants::default();
    let mut failed = 0;
    let mut run = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS  {id:>2} {name}: {msg} [{secs:.1} s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {id:>2} {name}: {msg} [{secs:.1} s]");
            }
        }
    };
    run(1, "universal constants", &mut universal);
    run(2, "threshold table", &mut table_one);
    run(3, "asymptotic closed forms", &mut closed_forms);
    run(4, "small-L tables", &mut small_l_tables);
    run(5, "large-L tables", &mut large_l_tables);
    run(6, "final constants", &mut || final_constants(&mut cache));
    run(7, "exact scenario identities", &mut exact_identities);
    run(8, "quadratic tails", &mut quadratic_tails);
    run(9, "majorant soundness", &mut majorants);
    run(10, "end-to-end soundness", &mut || end_to_end(&mut cache));
    run(11, "monotonicity", &mut monotonicity);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
