//! Finite discrete summand systems and their fractions: the Lindeberg tail
//! L_n(z), the truncated third moment M_n(z), the Esseen and Rozovskii
//! fractions, and the Lyapunov and Osipov fractions they are compared with.
//!
//! Everything is generic over [`Scalar`], so fixtures with rational atoms give
//! exact answers whenever B_n is rational.

mod convolution;
pub mod input;
pub mod scenario;

use std::cmp::Ordering;

use serde::Serialize;

use crate::constants::Extended;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use convolution::{chf, kolmogorov_distance, kolmogorov_distance_capped, symmetrize, DEFAULT_ATOM_CAP};

const MASS_TOLERANCE: f64 = 1e-12;

/// One support point.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom<T> {
    pub x: T,
    pub p: T,
}

/// Distribution with finitely many atoms, sorted by position.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<T> {
    atoms: Vec<Atom<T>>,
}

fn by_position<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

impl<T: Scalar> DiscreteDistribution<T> {
    /// Validates positive masses summing to one and distinct positions.
    pub fn new(atoms: Vec<(T, T)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let mut atoms: Vec<Atom<T>> = atoms.into_iter().map(|(x, p)| Atom { x, p }).collect();
        if let Some(a) = atoms.iter().find(|a| !(a.p > T::zero())) {
            return Err(Error::InvalidDistribution(format!("mass {} at {} is not positive", a.p, a.x)));
        }
        atoms.sort_by(|a, b| by_position(&a.x, &b.x));
        if atoms.windows(2).any(|w| w[0].x == w[1].x) {
            return Err(Error::InvalidDistribution("duplicate atom position".into()));
        }
        let total = atoms.iter().fold(T::zero(), |s, a| s + a.p.clone());
        if (total.clone() - T::one()).abs() > T::slack(MASS_TOLERANCE) {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        Ok(Self { atoms })
    }

    /// As [`Self::new`], additionally requiring zero mean.
    pub fn centered(atoms: Vec<(T, T)>) -> Result<Self> {
        let d = Self::new(atoms)?;
        let m = d.mean();
        if m.abs() > T::slack(MASS_TOLERANCE) {
            return Err(Error::InvalidDistribution(format!("mean {m} is not zero")));
        }
        Ok(d)
    }

    pub(crate) fn from_sorted(atoms: Vec<Atom<T>>) -> Self {
        Self { atoms }
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    fn moment(&self, keep: impl Fn(&T) -> bool, power: impl Fn(&T) -> T) -> T {
        self.atoms
            .iter()
            .filter(|a| keep(&a.x))
            .fold(T::zero(), |s, a| s + a.p.clone() * power(&a.x))
    }

    pub fn mean(&self) -> T {
        self.moment(|_| true, |x| x.clone())
    }

    /// E X².
    pub fn second_moment(&self) -> T {
        self.moment(|_| true, |x| x.clone() * x.clone())
    }

    /// E X³.
    pub fn third_moment(&self) -> T {
        self.moment(|_| true, |x| x.clone() * x.clone() * x.clone())
    }

    /// E|X|³.
    pub fn abs_third_moment(&self) -> T {
        self.moment(|_| true, |x| x.abs() * x.clone() * x.clone())
    }

    /// σ²(z) = E X² 1(|X| ≥ z).
    pub fn sigma_tail(&self, z: &T) -> T {
        self.moment(|x| x.abs() >= *z, |x| x.clone() * x.clone())
    }

    /// μ(z) = E X³ 1(|X| < z).
    pub fn mu_trunc(&self, z: &T) -> T {
        self.moment(|x| x.abs() < *z, |x| x.clone() * x.clone() * x.clone())
    }

    /// E|X|³ 1(|X| < z).
    pub fn abs_third_trunc(&self, z: &T) -> T {
        self.moment(|x| x.abs() < *z, |x| x.abs() * x.clone() * x.clone())
    }

    /// Distribution of −X.
    pub fn negated(&self) -> Self {
        let mut atoms: Vec<Atom<T>> = self
            .atoms
            .iter()
            .rev()
            .map(|a| Atom {
                x: -a.x.clone(),
                p: a.p.clone(),
            })
            .collect();
        atoms.sort_by(|a, b| by_position(&a.x, &b.x));
        Self { atoms }
    }

    pub fn to_f64(&self) -> DiscreteDistribution<f64> {
        DiscreteDistribution {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    x: a.x.to_f64_value(),
                    p: a.p.to_f64_value(),
                })
                .collect(),
        }
    }
}

/// σ_s²(z)/σ²(z/2) for the symmetrization X − X′; never above 4.
pub fn quadratic_tail_ratio<T: Scalar>(d: &DiscreteDistribution<T>, z: &T) -> Result<T> {
    let half = z.clone() / T::from_ratio(2, 1);
    let den = d.sigma_tail(&half);
    if den.is_zero() {
        return Err(Error::RatioUndefined(format!("σ²({half}) = 0")));
    }
    Ok(symmetrize(d).sigma_tail(z) / den)
}

/// Independent zero-mean summands, grouped into i.i.d. blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SummandSystem<T> {
    blocks: Vec<(DiscreteDistribution<T>, usize)>,
    variance: T,
}

impl<T: Scalar> SummandSystem<T> {
    /// Each block is a distribution and its repeat count.
    pub fn new(blocks: Vec<(DiscreteDistribution<T>, usize)>) -> Result<Self> {
        let blocks: Vec<_> = blocks.into_iter().filter(|b| b.1 > 0).collect();
        if blocks.is_empty() {
            return Err(Error::InvalidDistribution("system has no summands".into()));
        }
        for (d, _) in &blocks {
            let m = d.mean();
            if m.abs() > T::slack(MASS_TOLERANCE) {
                return Err(Error::InvalidDistribution(format!("summand mean {m} is not zero")));
            }
        }
        let variance = blocks
            .iter()
            .fold(T::zero(), |s, (d, k)| s + d.second_moment() * count::<T>(*k));
        if !(variance > T::zero()) {
            return Err(Error::InvalidDistribution("B_n = 0".into()));
        }
        Ok(Self { blocks, variance })
    }

    /// n i.i.d. copies of `d`.
    pub fn iid(d: DiscreteDistribution<T>, n: usize) -> Result<Self> {
        Self::new(vec![(d, n)])
    }

    pub fn blocks(&self) -> &[(DiscreteDistribution<T>, usize)] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// B_n².
    pub fn variance(&self) -> &T {
        &self.variance
    }

    /// B_n, or [`Error::Inexact`] when it is irrational for an exact scalar type.
    pub fn b_n(&self) -> Result<T> {
        self.variance
            .sqrt_exact()
            .ok_or_else(|| Error::Inexact(format!("B_n = √{}", self.variance)))
    }

    fn total(&self, f: impl Fn(&DiscreteDistribution<T>) -> T) -> T {
        self.blocks
            .iter()
            .fold(T::zero(), |s, (d, k)| s + f(d) * count::<T>(*k))
    }

    /// L_n(z) = B_n⁻² Σ E X_k² 1(|X_k| ≥ zB_n).
    pub fn lindeberg(&self, z: &T) -> Result<T> {
        let b = self.b_n()?;
        let at = z.clone() * b;
        Ok(self.total(|d| d.sigma_tail(&at)) / self.variance.clone())
    }

    /// M_n(z) = B_n⁻³ Σ E X_k³ 1(|X_k| < zB_n); `None` means z = ∞.
    pub fn truncated_third(&self, z: Option<&T>) -> Result<T> {
        let b = self.b_n()?;
        let b3 = self.variance.clone() * b.clone();
        let sum = match z {
            Some(z) => {
                let at = z.clone() * b;
                self.total(|d| d.mu_trunc(&at))
            }
            None => self.total(|d| d.third_moment()),
        };
        Ok(sum / b3)
    }

    /// Λ_n(z) = B_n⁻³ Σ E|X_k|³ 1(|X_k| < zB_n).
    pub fn truncated_abs_third(&self, z: &T) -> Result<T> {
        let b = self.b_n()?;
        let at = z.clone() * b.clone();
        Ok(self.total(|d| d.abs_third_trunc(&at)) / (self.variance.clone() * b))
    }

    /// Distinct nonzero atom magnitudes, the thresholds where L_n and M_n jump.
    fn magnitudes(&self) -> Vec<T> {
        let mut a: Vec<T> = self
            .blocks
            .iter()
            .flat_map(|(d, _)| d.atoms.iter().map(|a| a.x.abs()))
            .filter(|a| *a > T::zero())
            .collect();
        a.sort_by(by_position);
        a.dedup();
        a
    }

    pub fn to_f64(&self) -> SummandSystem<f64> {
        SummandSystem {
            blocks: self.blocks.iter().map(|(d, k)| (d.to_f64(), *k)).collect(),
            variance: self.variance.to_f64_value(),
        }
    }
}

fn count<T: Scalar>(k: usize) -> T {
    T::from_ratio(k as i64, 1)
}

/// sup over 0 < z ≤ ε of γ|M_n(z)| + zL_n(z), with M_n frozen at ε when `frozen_third` is set.
///
/// Between consecutive atom magnitudes L_n and M_n are constant and left-continuous,
/// and the objective grows with z, so only the magnitudes (as thresholds |x| = zB_n)
/// and ε itself can attain the supremum. Thresholds are kept in absolute units so
/// that floating point systems hit their atoms exactly.
fn tail_sup<T: Scalar>(sys: &SummandSystem<T>, eps: Option<&T>, gamma: &T, frozen_third: bool) -> Result<T> {
    let b = sys.b_n()?;
    let b2 = sys.variance.clone();
    let b3 = b2.clone() * b.clone();
    let third = |a: &T| {
        if frozen_third {
            T::zero()
        } else {
            gamma.clone() * sys.total(|d| d.mu_trunc(a)).abs() / b3.clone()
        }
    };
    let value = |a: &T| third(a) + a.clone() / b.clone() * sys.total(|d| d.sigma_tail(a)) / b2.clone();
    let cap = eps.map(|e| e.clone() * b.clone());
    let mut best = match &cap {
        Some(c) => value(c),
        None if frozen_third => T::zero(),
        None => gamma.clone() * sys.total(|d| d.third_moment()).abs() / b3.clone(),
    };
    for a in sys.magnitudes() {
        if cap.as_ref().is_some_and(|c| a > *c) {
            break;
        }
        let v = value(&a);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// L_E³(ε, γ) = sup over 0 < z ≤ ε of γ|M_n(z)| + zL_n(z); `eps = None` is ε = ∞.
pub fn esseen_fraction<T: Scalar>(sys: &SummandSystem<T>, eps: Option<&T>, gamma: &T) -> Result<T> {
    check_parameters(eps, gamma)?;
    tail_sup(sys, eps, gamma, false)
}

/// L_R³(ε, γ) = γ|M_n(ε)| + sup over 0 < z ≤ ε of zL_n(z).
pub fn rozovskii_fraction<T: Scalar>(sys: &SummandSystem<T>, eps: &T, gamma: &T) -> Result<T> {
    check_parameters(Some(eps), gamma)?;
    let tail = tail_sup(sys, Some(eps), gamma, true)?;
    Ok(gamma.clone() * sys.truncated_third(Some(eps))?.abs() + tail)
}

/// Λ_n(ε) + L_n(ε); with ε = ∞ this is the Lyapunov fraction L_{3,n}.
pub fn osipov_fraction<T: Scalar>(sys: &SummandSystem<T>, eps: Option<&T>) -> Result<T> {
    match eps {
        Some(e) => {
            check_parameters(Some(e), &T::one())?;
            Ok(sys.truncated_abs_third(e)? + sys.lindeberg(e)?)
        }
        None => lyapunov_fraction_exact(sys),
    }
}

/// L_{3,n} = B_n⁻³ Σ E|X_k|³, exactly.
pub fn lyapunov_fraction_exact<T: Scalar>(sys: &SummandSystem<T>) -> Result<T> {
    let b = sys.b_n()?;
    Ok(sys.total(|d| d.abs_third_moment()) / (sys.variance.clone() * b))
}

/// L_{2+δ,n} = B_n^{−2−δ} Σ E|X_k|^{2+δ} for δ ∈ (0, 1], in floating point.
pub fn lyapunov_fraction<T: Scalar>(sys: &SummandSystem<T>, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Constraint(format!("δ = {delta} outside (0, 1]")));
    }
    let s = sys.to_f64();
    let sum: f64 = s
        .blocks
        .iter()
        .map(|(d, k)| *k as f64 * d.atoms.iter().map(|a| a.p * a.x.abs().powf(2.0 + delta)).sum::<f64>())
        .sum();
    Ok(sum / s.variance.powf(1.0 + delta / 2.0))
}

fn check_parameters<T: Scalar>(eps: Option<&T>, gamma: &T) -> Result<()> {
    if let Some(e) = eps {
        if !(*e > T::zero()) {
            return Err(Error::Constraint(format!("ε = {e} must be positive")));
        }
    }
    if !(*gamma > T::zero()) {
        return Err(Error::Constraint(format!("γ = {gamma} must be positive")));
    }
    Ok(())
}

/// All fractions of one system, in floating point.
#[derive(Debug, Clone, Serialize)]
pub struct FractionReport {
    /// L_E³(ε, γ).
    pub esseen: f64,
    /// L_R³(ε, γ); absent for ε = ∞.
    pub rozovskii: Option<f64>,
    /// L_{2+δ,n}.
    pub lyapunov: f64,
    /// Λ_n(ε) + L_n(ε).
    pub osipov: f64,
    /// L_n(ε).
    pub lindeberg: f64,
    pub eps: Extended,
    pub gamma: Extended,
    pub delta: f64,
    /// Whether the values were computed in exact arithmetic.
    pub exact: bool,
}

/// Evaluates every fraction; `gamma = ∞` is rejected since the fractions would be infinite.
pub fn fraction_report<T: Scalar>(sys: &SummandSystem<T>, eps: Extended, gamma: Extended, delta: f64) -> Result<FractionReport> {
    let g = match gamma {
        Extended::Finite(g) => g,
        Extended::Infinite => return Err(Error::Constraint("γ must be finite for fraction values".into())),
    };
    let representable = sys.b_n().is_ok() && exact_value::<T>(g).is_some() && eps_exact::<T>(eps).is_some();
    if representable {
        let gt = exact_value::<T>(g).unwrap();
        let et = eps_exact::<T>(eps).unwrap();
        let f = |x: T| x.to_f64_value();
        Ok(FractionReport {
            esseen: f(esseen_fraction(sys, et.as_ref(), &gt)?),
            rozovskii: match &et {
                Some(e) => Some(f(rozovskii_fraction(sys, e, &gt)?)),
                None => None,
            },
            lyapunov: lyapunov_fraction(sys, delta)?,
            osipov: f(osipov_fraction(sys, et.as_ref())?),
            lindeberg: match &et {
                Some(e) => f(sys.lindeberg(e)?),
                None => 0.0,
            },
            eps,
            gamma,
            delta,
            exact: T::slack(1.0).is_zero(),
        })
    } else {
        let mut r = fraction_report(&sys.to_f64(), eps, gamma, delta)?;
        r.exact = false;
        Ok(r)
    }
}

fn exact_value<T: Scalar>(x: f64) -> Option<T> {
    T::from_f64_value(x)
}

fn eps_exact<T: Scalar>(eps: Extended) -> Option<Option<T>> {
    match eps {
        Extended::Finite(e) => exact_value::<T>(e).map(Some),
        Extended::Infinite => Some(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn two_point(p: f64) -> DiscreteDistribution<f64> {
        let qq = 1.0 - p;
        DiscreteDistribution::centered(vec![((qq / p).sqrt(), p), (-(p / qq).sqrt(), qq)]).unwrap()
    }

    #[test]
    fn rejects_bad_atoms() {
        assert!(DiscreteDistribution::new(vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(DiscreteDistribution::new(vec![(0.0, 0.5), (0.0, 0.5)]).is_err());
        assert!(DiscreteDistribution::new(vec![(1.0, 1.5), (0.0, -0.5)]).is_err());
        assert!(DiscreteDistribution::<f64>::new(vec![]).is_err());
        assert!(DiscreteDistribution::centered(vec![(1.0, 0.5), (0.0, 0.5)]).is_err());
        assert!(DiscreteDistribution::new(vec![(q(1, 1), q(1, 3)), (q(0, 1), q(2, 3) + q(1, 1_000_000_000_000_000))]).is_err());
    }

    #[test]
    fn boundary_conventions() {
        let d = DiscreteDistribution::centered(vec![(q(-1, 1), q(1, 2)), (q(1, 1), q(1, 2))]).unwrap();
        assert_eq!(d.sigma_tail(&q(1, 1)), q(1, 1));
        assert_eq!(d.mu_trunc(&q(1, 1)), q(0, 1));
        assert_eq!(d.sigma_tail(&q(0, 1)), d.second_moment());
        assert_eq!(d.mu_trunc(&q(0, 1)), q(0, 1));
        let s = DiscreteDistribution::centered(vec![(q(-2, 1), q(1, 3)), (q(1, 1), q(2, 3))]).unwrap();
        assert_eq!(s.sigma_tail(&q(2, 1)), q(4, 3));
        assert_eq!(s.mu_trunc(&q(2, 1)), q(2, 3));
        assert_eq!(s.mu_trunc(&q(3, 1)), s.third_moment());
    }

    #[test]
    fn two_point_piecewise_moments() {
        let p = 0.7;
        let qq = 1.0 - p;
        let d = two_point(p);
        let z = 0.5 * ((qq / p).sqrt() + (p / qq).sqrt());
        assert!((d.sigma_tail(&z) - p).abs() < 1e-15);
        assert!((d.mu_trunc(&z) - qq * qq / (p * qq).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lindeberg_at_zero_is_one() {
        let d = DiscreteDistribution::centered(vec![(q(-2, 1), q(1, 3)), (q(1, 1), q(2, 3))]).unwrap();
        let sys = SummandSystem::iid(d, 2).unwrap();
        assert_eq!(sys.lindeberg(&q(0, 1)).unwrap(), q(1, 1));
    }

    #[test]
    fn inexact_normalization_is_reported() {
        let d = DiscreteDistribution::centered(vec![(q(-1, 1), q(1, 2)), (q(1, 1), q(1, 2))]).unwrap();
        let sys = SummandSystem::iid(d, 2).unwrap();
        assert!(matches!(sys.b_n(), Err(Error::Inexact(_))));
        let r = fraction_report(&sys, Extended::Finite(1.0), Extended::Finite(1.0), 1.0).unwrap();
        assert!(!r.exact);
        assert!((r.lyapunov - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn iid_two_point_closed_forms() {
        // n ε² > p/q
        let (p, n) = (0.6, 16);
        let qq = 1.0 - p;
        let sys = SummandSystem::iid(two_point(p), n).unwrap();
        let rn = (n as f64).sqrt();
        let es = esseen_fraction(&sys, Some(&1.0), &1.0).unwrap() * rn;
        assert!((es - (qq * qq + p * p) / (p * qq).sqrt()).abs() < 1e-12);
        let ro = rozovskii_fraction(&sys, &1.0, &1.0).unwrap() * rn;
        assert!((ro - p / (p * qq).sqrt()).abs() < 1e-12);
        let ly = lyapunov_fraction(&sys, 1.0).unwrap() * rn;
        assert!((ly - (p * p + qq * qq) / (p * qq).sqrt()).abs() < 1e-12);
        assert!(ro > ly);
    }

    #[test]
    fn esseen_bounded_by_lyapunov_when_gamma_at_most_one() {
        let d = DiscreteDistribution::centered(vec![(-1.5, 0.2), (0.25, 0.4), (0.5, 0.4)]).unwrap();
        let sys = SummandSystem::new(vec![(d.clone(), 3), (d.negated(), 2)]).unwrap();
        let ly = lyapunov_fraction_exact(&sys).unwrap();
        for eps in [0.1, 0.5, 1.0, 3.0] {
            for gamma in [0.2, 0.7, 1.0] {
                assert!(esseen_fraction(&sys, Some(&eps), &gamma).unwrap() <= ly + 1e-15);
            }
        }
        assert!(esseen_fraction(&sys, None, &1.0).unwrap() <= ly + 1e-15);
    }

    #[test]
    fn infinite_eps_limit() {
        let d = DiscreteDistribution::centered(vec![(-1.5, 0.2), (0.25, 0.4), (0.5, 0.4)]).unwrap();
        let sys = SummandSystem::iid(d, 3).unwrap();
        let inf = esseen_fraction(&sys, None, &0.4).unwrap();
        let big = esseen_fraction(&sys, Some(&1e6), &0.4).unwrap();
        assert!((inf - big).abs() < 1e-15);
        assert!(osipov_fraction(&sys, None).unwrap() == lyapunov_fraction_exact(&sys).unwrap());
    }
}
