//! The Prawitz smoothing kernel
//! K(s) = ½(1 − |s|) + (i/2)[(1 − |s|)cot(πs) + sgn(s)/π] on [−1, 1].

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;

const SERIES_CUTOFF: f64 = 1e-3;

/// 1/x − cot x for 0 < x < π.
fn cot_defect(x: f64) -> f64 {
    if x < PI * SERIES_CUTOFF {
        let x2 = x * x;
        x * (1.0 / 3.0
            + x2 * (1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (1.0 / 4725.0 + x2 * 2.0 / 93555.0))))
    } else {
        1.0 / x - 1.0 / x.tan()
    }
}

fn odd(s: f64, re: f64, im: f64) -> Complex64 {
    Complex64::new(re, if s < 0.0 { -im } else { im })
}

/// K(s); zero for |s| ≥ 1 − 1e−9.
pub fn prawitz_kernel(s: f64) -> Complex64 {
    let a = s.abs();
    if a >= 1.0 - 1e-9 {
        return Complex64::new(0.0, 0.0);
    }
    if a == 0.0 {
        return Complex64::new(0.5, f64::INFINITY);
    }
    // (1 − a)cot(πa) + 1/π = (1 − a)·(1/x − cot x) at x = π(1 − a)
    let d = 1.0 - a;
    odd(s, 0.5 * d, 0.5 * d * cot_defect(PI * d))
}

/// |K(1 − d)| for 0 ≤ d ≤ 1, accurate when d is tiny.
pub(crate) fn kernel_norm_from_gap(d: f64) -> f64 {
    if d <= 1e-9 {
        return 0.0;
    }
    0.5 * d * cot_defect(PI * d).hypot(1.0)
}

/// K(s) − i/(2πs), bounded at s = 0.
pub fn prawitz_kernel_regular_part(s: f64) -> Complex64 {
    let a = s.abs();
    if a >= 1.0 - 1e-9 {
        return odd(s, 0.0, -0.5 * FRAC_1_PI / a);
    }
    let d = 1.0 - a;
    odd(s, 0.5 * d, -0.5 * d * cot_defect(PI * a))
}
