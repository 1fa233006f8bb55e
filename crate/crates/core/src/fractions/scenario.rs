//! Named summand systems where the Esseen and Rozovskii fractions can be
//! compared with the Lyapunov and Osipov fractions in closed form, and the
//! moment formulas of a heavy-tailed family whose skewness ratio diverges.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::Serialize;

use super::{DiscreteDistribution, SummandSystem};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    /// √(q/p) w.p. p, −√(p/q) w.p. q.
    TwoPoint,
    /// 4/5, −1, 7/5 with masses 10/27, 53/108, 5/36.
    ThreePoint,
    /// ±0.9, ±3 with P(|X| = 0.9) = 800/819.
    FourPoint,
    /// X and −X alternating, X on 1/2, −1, 2 with masses 4/9, 4/9, 1/9.
    Alternating,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 4] = [
        ScenarioName::TwoPoint,
        ScenarioName::ThreePoint,
        ScenarioName::FourPoint,
        ScenarioName::Alternating,
    ];
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioName::TwoPoint => "two-point",
            ScenarioName::ThreePoint => "three-point",
            ScenarioName::FourPoint => "four-point",
            ScenarioName::Alternating => "alternating",
        })
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        ScenarioName::ALL
            .into_iter()
            .find(|n| key == n.to_string() || key.starts_with(&format!("{n}-")))
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown scenario '{s}'; expected one of two-point, three-point, four-point, alternating"
                ))
            })
    }
}

fn q<T: Scalar>(n: i64, d: i64) -> T {
    T::from_ratio(n, d)
}

/// F_p: √(q/p) w.p. p and −√(p/q) w.p. q = 1 − p, for ½ ≤ p < 1.
pub fn two_point<T: Scalar>(p: T) -> Result<DiscreteDistribution<T>> {
    if !(p >= q::<T>(1, 2) && p < T::one()) {
        return Err(Error::Constraint(format!("p = {p:?} outside [1/2, 1)")));
    }
    let qq = T::one() - p.clone();
    let up = (qq.clone() / p.clone())
        .sqrt_exact()
        .ok_or_else(|| Error::Inexact(format!("√(q/p) for p = {p:?}")))?;
    let down = (p.clone() / qq.clone())
        .sqrt_exact()
        .ok_or_else(|| Error::Inexact(format!("√(p/q) for p = {p:?}")))?;
    DiscreteDistribution::centered(vec![(up, p), (-down, qq)])
}

pub fn three_point<T: Scalar>() -> DiscreteDistribution<T> {
    DiscreteDistribution::centered(vec![
        (q(4, 5), q(10, 27)),
        (q(-1, 1), q(53, 108)),
        (q(7, 5), q(5, 36)),
    ])
    .expect("fixture is a centered distribution")
}

pub fn four_point<T: Scalar>() -> DiscreteDistribution<T> {
    let (p, r) = (q::<T>(400, 819), q::<T>(19, 1638));
    DiscreteDistribution::centered(vec![
        (q(-3, 1), r.clone()),
        (q(-9, 10), p.clone()),
        (q(9, 10), p),
        (q(3, 1), r),
    ])
    .expect("fixture is a centered distribution")
}

pub fn alternating_base<T: Scalar>() -> DiscreteDistribution<T> {
    DiscreteDistribution::centered(vec![(q(1, 2), q(4, 9)), (q(-1, 1), q(4, 9)), (q(2, 1), q(1, 9))])
        .expect("fixture is a centered distribution")
}

/// The named system with `n` summands; `p` is only used by the two-point family.
pub fn scenario<T: Scalar>(name: ScenarioName, n: usize, p: Option<T>) -> Result<SummandSystem<T>> {
    if n == 0 {
        return Err(Error::Constraint("n must be positive".into()));
    }
    match name {
        ScenarioName::TwoPoint => {
            let p = p.ok_or_else(|| Error::Constraint("two-point scenario needs p".into()))?;
            SummandSystem::iid(two_point(p)?, n)
        }
        ScenarioName::ThreePoint => SummandSystem::iid(three_point(), n),
        ScenarioName::FourPoint => SummandSystem::iid(four_point(), n),
        ScenarioName::Alternating => {
            if n % 2 != 0 {
                return Err(Error::Constraint(format!("alternating scenario needs even n, got {n}")));
            }
            let x = alternating_base::<T>();
            SummandSystem::new(vec![(x.negated(), n / 2), (x, n / 2)])
        }
    }
}

/// Exact-rational variant of [`scenario`].
pub fn scenario_exact(name: ScenarioName, n: usize, p: Option<BigRational>) -> Result<SummandSystem<BigRational>> {
    scenario(name, n, p)
}

/// σ²(θ) and α₃(θ) of the density a·x^{−4−θ} on x > 1, b|x|^{−5} on x < −1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoMoments {
    pub theta: f64,
    pub sigma2: f64,
    pub alpha3: f64,
}

impl ParetoMoments {
    /// |α₃|/σ², unbounded as θ → 0.
    pub fn skewness_ratio(&self) -> f64 {
        self.alpha3.abs() / self.sigma2
    }

    /// E X² 1(|X| ≥ z).
    pub fn sigma_tail(&self, z: f64) -> f64 {
        let t = self.theta;
        if z <= 1.0 {
            return self.sigma2;
        }
        let (a, b) = pareto_weights(t);
        a / (1.0 + t) * z.powf(-1.0 - t) + b / 2.0 * z.powi(-2)
    }
}

fn pareto_weights(theta: f64) -> (f64, f64) {
    let d = 17.0 + 7.0 * theta;
    (4.0 * (2.0 + theta) * (3.0 + theta) / d, 12.0 * (3.0 + theta) / d)
}

/// Moments of the heavy-tailed density p_θ, θ ∈ (0, 1).
pub fn pareto_theta(theta: f64) -> Result<ParetoMoments> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Constraint(format!("θ = {theta} outside (0, 1)")));
    }
    let t = theta;
    let d = 17.0 + 7.0 * t;
    let (a, b) = pareto_weights(t);
    Ok(ParetoMoments {
        theta,
        sigma2: 2.0 * (3.0 + t) * (7.0 + 5.0 * t) / ((1.0 + t) * d),
        // a/θ − b; the positive tail carries x³·a·x^{−4−θ}
        alpha3: a / t - b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractions::{esseen_fraction, osipov_fraction, rozovskii_fraction};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn fixture_masses() {
        let d = three_point::<BigRational>();
        let masses: Vec<_> = d.atoms().iter().map(|a| a.p.clone()).collect();
        assert_eq!(masses, vec![r(53, 108), r(10, 27), r(5, 36)]);
        let f = four_point::<BigRational>();
        assert_eq!(f.atoms()[1].p.clone() + f.atoms()[2].p.clone(), r(800, 819));
        for d in [three_point::<BigRational>(), four_point(), alternating_base()] {
            assert_eq!(d.second_moment(), r(1, 1));
        }
    }

    #[test]
    fn names_round_trip() {
        for n in ScenarioName::ALL {
            assert_eq!(n.to_string().parse::<ScenarioName>().unwrap(), n);
        }
        assert_eq!("four_point_symmetric".parse::<ScenarioName>().unwrap(), ScenarioName::FourPoint);
        assert!("five-point".parse::<ScenarioName>().is_err());
    }

    #[test]
    fn exact_two_point_needs_square_ratio() {
        // q/p = 9/16
        let d = two_point(r(16, 25)).unwrap();
        assert_eq!(d.atoms()[1].x, r(3, 4));
        assert!(matches!(two_point(r(11, 20)), Err(Error::Inexact(_))));
        assert!(two_point(r(1, 3)).is_err());
        assert!(two_point(0.55f64).is_ok());
    }

    #[test]
    fn alternating_needs_even_n() {
        assert!(scenario::<BigRational>(ScenarioName::Alternating, 5, None).is_err());
        let s = scenario::<BigRational>(ScenarioName::Alternating, 4, None).unwrap();
        assert_eq!(s.truncated_third(None).unwrap(), r(0, 1));
    }

    #[test]
    fn three_point_identities() {
        let s = scenario_exact(ScenarioName::ThreePoint, 4, None).unwrap();
        let two = r(2, 1);
        let one = r(1, 1);
        assert_eq!(esseen_fraction(&s, Some(&one), &one).unwrap() * two.clone(), r(643, 675));
        assert_eq!(rozovskii_fraction(&s, &one, &one).unwrap() * two, r(22, 25));
    }

    #[test]
    fn four_point_identities() {
        let s = scenario_exact(ScenarioName::FourPoint, 9, None).unwrap();
        let one = r(1, 1);
        let three = r(3, 1);
        assert_eq!(esseen_fraction(&s, Some(&one), &one).unwrap() * three.clone(), r(9, 10));
        assert_eq!(rozovskii_fraction(&s, &one, &one).unwrap() * three.clone(), r(9, 10));
        assert_eq!(osipov_fraction(&s, Some(&one)).unwrap() * three, r(87, 65));
    }

    #[test]
    fn pareto_divergence() {
        let m = pareto_theta(1e-4).unwrap();
        assert!(m.skewness_ratio() > 1e3);
        // σ² from the tail integral agrees with the closed form
        let (a, b) = pareto_weights(0.4);
        let m = pareto_theta(0.4).unwrap();
        assert!((m.sigma2 - (a / 1.4 + b / 2.0)).abs() < 1e-14);
        assert!((m.alpha3 - 4.0 * 3.4 * 1.2 / (0.4 * 19.8)).abs() < 1e-13);
        // unit mass and zero mean
        assert!((a / 3.4 + b / 4.0 - 1.0).abs() < 1e-15);
        assert!((a / 2.4 - b / 3.0).abs() < 1e-15);
        assert_eq!(m.sigma_tail(0.5), m.sigma2);
        assert!((m.sigma_tail(1.0 + 1e-12) - m.sigma2).abs() < 1e-10);
        assert!(pareto_theta(1.0).is_err());
    }
}
