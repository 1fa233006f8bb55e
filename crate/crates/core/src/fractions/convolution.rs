//! Exact convolutions: symmetrization, characteristic functions and the
//! Kolmogorov distance of a normalized sum.

use num_complex::Complex64;

use super::{by_position, Atom, DiscreteDistribution, SummandSystem};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::std_normal_cdf;

/// Default bound on the number of atoms of a convolution.
pub const DEFAULT_ATOM_CAP: usize = 2_000_000;

/// Positions closer than this are merged in floating point convolutions.
const MERGE_TOLERANCE: f64 = 1e-12;

/// Sorts and merges atoms whose positions agree within the scalar's slack.
fn merged<T: Scalar>(mut atoms: Vec<Atom<T>>, slack: &T) -> Vec<Atom<T>> {
    atoms.sort_by(|a, b| by_position(&a.x, &b.x));
    let mut out: Vec<Atom<T>> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if (a.x.clone() - last.x.clone()).abs() <= *slack => last.p = last.p.clone() + a.p,
            _ => out.push(a),
        }
    }
    out
}

/// Distribution of X − X′ with X′ an independent copy of X.
pub fn symmetrize<T: Scalar>(d: &DiscreteDistribution<T>) -> DiscreteDistribution<T> {
    let mut atoms = Vec::with_capacity(d.atoms.len() * d.atoms.len());
    for a in &d.atoms {
        for b in &d.atoms {
            atoms.push(Atom {
                x: a.x.clone() - b.x.clone(),
                p: a.p.clone() * b.p.clone(),
            });
        }
    }
    DiscreteDistribution::from_sorted(merged(atoms, &T::slack(MERGE_TOLERANCE)))
}

/// E exp(itS_n/B_n).
pub fn chf<T: Scalar>(sys: &SummandSystem<T>, t: f64) -> Complex64 {
    let s = sys.to_f64();
    let b = s.variance.sqrt();
    s.blocks.iter().fold(Complex64::new(1.0, 0.0), |acc, (d, k)| {
        let f: Complex64 = d
            .atoms
            .iter()
            .map(|a| Complex64::from_polar(a.p, t * a.x / b))
            .sum();
        acc * f.powi(*k as i32)
    })
}

/// sup over x of |P(S_n/B_n ≤ x) − Φ(x)| with the default atom cap.
pub fn kolmogorov_distance<T: Scalar>(sys: &SummandSystem<T>) -> Result<f64> {
    kolmogorov_distance_capped(sys, DEFAULT_ATOM_CAP)
}

/// Exact Δ_n by convolving all summands; fails once the running convolution exceeds `cap` atoms.
pub fn kolmogorov_distance_capped<T: Scalar>(sys: &SummandSystem<T>, cap: usize) -> Result<f64> {
    let s = sys.to_f64();
    let b = s.variance.sqrt();
    let mut law = vec![Atom { x: 0.0, p: 1.0 }];
    for (d, k) in &s.blocks {
        let step: Vec<Atom<f64>> = d.atoms.iter().map(|a| Atom { x: a.x / b, p: a.p }).collect();
        for _ in 0..*k {
            let mut next = Vec::with_capacity(law.len() * step.len());
            for a in &law {
                for c in &step {
                    next.push(Atom { x: a.x + c.x, p: a.p * c.p });
                }
            }
            law = merged(next, &MERGE_TOLERANCE);
            if law.len() > cap {
                return Err(Error::AtomCapExceeded { cap });
            }
        }
    }
    // the sup of |step − Φ| is attained at a jump, from one side or the other
    let mut below = 0.0;
    let mut worst: f64 = 0.0;
    for a in &law {
        let phi = std_normal_cdf(a.x);
        let above = below + a.p;
        worst = worst.max((below - phi).abs()).max((above - phi).abs());
        below = above;
    }
    Ok(worst)
}
