//! Incomplete gamma functions, Gaussian moment integrals, the normal
//! distribution function, the exponential integral and adaptive quadrature.

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

const MAX_ITER: usize = 1000;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        return ln_gamma(x + T::one()) - x.ln();
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(*c) / (x + T::lit(i as f64));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * T::TAU().ln() + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// Γ(x) for x > 0.
pub fn gamma<T: Real>(x: T) -> T {
    // Exact on the half integers that dominate the callers.
    let twice = x + x;
    if twice == twice.round() && twice <= T::lit(40.0) {
        let mut g = if twice.to_u32().unwrap_or(0) % 2 == 0 {
            T::one()
        } else {
            T::PI().sqrt()
        };
        let mut r = if g == T::one() { T::one() } else { T::lit(0.5) };
        while r < x {
            g = g * r;
            r = r + T::one();
        }
        return g;
    }
    ln_gamma(x).exp()
}

fn check_args<T: Real>(op: &'static str, r: T, x: T) -> Result<()> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(domain(op, format!("order must be positive, got {r:?}")));
    }
    if !(x >= T::zero()) {
        return Err(domain(
            op,
            format!("argument must be nonnegative, got {x:?}"),
        ));
    }
    Ok(())
}

/// Returns (lower, upper) unregularized incomplete gamma values.
fn incomplete_pair<T: Real>(r: T, x: T) -> (T, T) {
    let full = gamma(r);
    if x == T::zero() {
        return (T::zero(), full);
    }
    if x.is_infinite() {
        return (full, T::zero());
    }
    let eps = T::epsilon();
    let prefactor = (r * x.ln() - x).exp();
    if x < r + T::one() {
        let mut ap = r;
        let mut del = T::one() / r;
        let mut sum = del;
        for _ in 0..MAX_ITER {
            ap = ap + T::one();
            del = del * x / ap;
            sum = sum + del;
            if del.abs() < sum.abs() * eps {
                break;
            }
        }
        let lower = sum * prefactor;
        (lower, full - lower)
    } else {
        // Modified Lentz evaluation of the continued fraction.
        let tiny = T::min_positive_value() / eps;
        let mut b = x + T::one() - r;
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let i = T::lit(i as f64);
            let an = -i * (i - r);
            b = b + T::lit(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = T::one() / d;
            let del = d * c;
            h = h * del;
            if (del - T::one()).abs() < eps {
                break;
            }
        }
        let upper = prefactor * h;
        (full - upper, upper)
    }
}

/// Upper incomplete gamma function Γ(r, x) = ∫_x^∞ t^{r−1} e^{−t} dt.
pub fn gamma_upper<T: Real>(r: T, x: T) -> Result<T> {
    check_args("gamma_upper", r, x)?;
    Ok(incomplete_pair(r, x).1)
}

/// Lower incomplete gamma function Υ(r, x) = Γ(r) − Γ(r, x).
pub fn gamma_lower<T: Real>(r: T, x: T) -> Result<T> {
    check_args("gamma_lower", r, x)?;
    Ok(incomplete_pair(r, x).0)
}

fn check_gaussian<T: Real>(op: &'static str, s: T, k: T, x: T) -> Result<()> {
    if !(s >= T::zero()) || !(k > T::zero()) || !(x >= T::zero()) {
        return Err(domain(
            op,
            format!("need s ≥ 0, k > 0, x ≥ 0; got ({s:?}, {k:?}, {x:?})"),
        ));
    }
    Ok(())
}

/// ∫_x^∞ t^s e^{−k t²} dt.
pub fn gaussian_power_tail<T: Real>(s: T, k: T, x: T) -> Result<T> {
    check_gaussian("gaussian_power_tail", s, k, x)?;
    let r = (s + T::one()) / T::lit(2.0);
    Ok(k.powf(-r) / T::lit(2.0) * incomplete_pair(r, k * x * x).1)
}

/// ∫_0^x t^s e^{−k t²} dt.
pub fn gaussian_power_head<T: Real>(s: T, k: T, x: T) -> Result<T> {
    check_gaussian("gaussian_power_head", s, k, x)?;
    let r = (s + T::one()) / T::lit(2.0);
    Ok(k.powf(-r) / T::lit(2.0) * incomplete_pair(r, k * x * x).0)
}

/// Standard normal distribution function.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let half = T::lit(0.5);
    // Φ(−|x|) = Γ(1/2, x²/2) / (2√π)
    let lower_tail = |y: T| incomplete_pair(half, y * y * half).1 / (T::lit(2.0) * T::PI().sqrt());
    if x < T::zero() {
        lower_tail(x)
    } else {
        T::one() - lower_tail(x)
    }
}

/// Exponential integral E₁(x) = ∫_x^∞ e^{−t}/t dt for x > 0.
pub fn exp_integral_e1<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(domain(
            "exp_integral_e1",
            format!("argument must be positive, got {x:?}"),
        ));
    }
    if x.is_infinite() {
        return Ok(T::zero());
    }
    let eps = T::epsilon();
    if x <= T::one() {
        let euler = T::lit(0.577_215_664_901_532_9);
        let mut sum = T::zero();
        let mut fact = T::one();
        for k in 1..MAX_ITER {
            let kf = T::lit(k as f64);
            fact = -fact * x / kf;
            let del = -fact / kf;
            sum = sum + del;
            if del.abs() < sum.abs() * eps {
                break;
            }
        }
        Ok(-euler - x.ln() + sum)
    } else {
        let tiny = T::min_positive_value() / eps;
        let mut b = x + T::one();
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let i = T::lit(i as f64);
            let an = -i * i;
            b = b + T::lit(2.0);
            d = T::one() / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h = h * del;
            if (del - T::one()).abs() < eps {
                break;
            }
        }
        Ok(h * (-x).exp())
    }
}

/// ∫_T^∞ e^{−t²/2} t^{−1} dt = E₁(T²/2)/2.
pub fn log_tail_integral<T: Real>(t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(domain(
            "log_tail_integral",
            format!("lower limit must be positive, got {t:?}"),
        ));
    }
    Ok(exp_integral_e1(t * t / T::lit(2.0))? / T::lit(2.0))
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions == 0 {
            return Err(domain(
                "QuadratureSettings",
                format!("need positive tolerances and subdivisions; got ({abs_tol}, {rel_tol}, {max_subdivisions})"),
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_518_306,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// 21-point Kronrod rule with the embedded 10-point Gauss estimate.
fn kronrod21<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = radius * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    (kronrod * radius, ((kronrod - gauss) * radius).abs())
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub subdivisions: usize,
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// An infinite `b` is mapped onto `(0, 1]` with `t = a + (1 − s)/s`.
pub fn integrate_detailed<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    settings: &QuadratureSettings,
) -> Result<Quadrature<T>> {
    if !(a < b) || !a.is_finite() || b.is_nan() {
        return Err(domain(
            "integrate",
            format!("need finite a < b, got [{a:?}, {b:?}]"),
        ));
    }
    if b.is_infinite() {
        let g = move |s: T| {
            let t = a + (T::one() - s) / s;
            f(t) / (s * s)
        };
        return adaptive(g, T::zero(), T::one(), settings);
    }
    adaptive(f, a, b, settings)
}

fn adaptive<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    settings: &QuadratureSettings,
) -> Result<Quadrature<T>> {
    let abs_tol = T::lit(settings.abs_tol);
    let rel_tol = T::lit(settings.rel_tol);
    let (value, error) = kronrod21(&mut f, a, b);
    let mut cells = vec![(a, b, value, error)];
    let mut total = value;
    let mut total_err = error;
    loop {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Quadrature {
                value: total,
                error: total_err,
                subdivisions: cells.len(),
            });
        }
        if cells.len() >= settings.max_subdivisions {
            return Err(Error::Quadrature {
                subdivisions: cells.len(),
                estimate: total_err.to_f64().unwrap_or(f64::NAN),
            });
        }
        let worst = cells
            .iter()
            .enumerate()
            .fold(0, |best, (i, c)| if c.3 > cells[best].3 { i } else { best });
        let (lo, hi, _, _) = cells[worst];
        let mid = T::lit(0.5) * (lo + hi);
        let left = kronrod21(&mut f, lo, mid);
        let right = kronrod21(&mut f, mid, hi);
        cells[worst] = (lo, mid, left.0, left.1);
        cells.push((mid, hi, right.0, right.1));
        // Re-summing keeps the totals free of cancellation drift.
        total = cells.iter().fold(T::zero(), |s, c| s + c.2);
        total_err = cells.iter().fold(T::zero(), |s, c| s + c.3);
    }
}

/// Adaptive integration returning only the value.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    f: F,
    a: T,
    b: T,
    settings: &QuadratureSettings,
) -> Result<T> {
    integrate_detailed(f, a, b, settings).map(|q| q.value)
}
