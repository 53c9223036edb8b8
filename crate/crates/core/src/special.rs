//! Principal-branch Lambert W and the Airy function Ai with its first zeros.

use std::f64::consts::E;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialError {
    #[error("lambert_w0 is undefined for z = {0} < -1/e")]
    LambertDomain(f64),
    #[error("airy_ai argument {0} outside the supported range |x| <= {AIRY_MAX_ABS_X}")]
    AiryOutOfRange(f64),
    #[error("airy zero index {0} not supported (max {AIRY_MAX_ZERO_INDEX})")]
    AiryZeroIndex(usize),
}

const INV_E: f64 = 0.36787944117144233;
const INV_E_LO: f64 = -1.2428753672788363e-17;

/// Principal branch W0 of the Lambert function: the `w >= -1` solving
/// `w e^w = z`.
pub fn lambert_w0(z: f64) -> Result<f64, SpecialError> {
    if z.is_nan() || z < -INV_E - 4.0 * f64::EPSILON {
        return Err(SpecialError::LambertDomain(z));
    }
    if z <= -INV_E {
        return Ok(-1.0);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = if z < -0.25 {
        // branch-point series in p = sqrt(2(ez + 1)), with z + 1/e formed
        // from a split constant to keep the tiny offset exact
        let p = (2.0 * E * ((z + INV_E) + INV_E_LO)).max(0.0).sqrt();
        let series = -1.0
            + p * (1.0
                + p * (-1.0 / 3.0
                    + p * (11.0 / 72.0
                        + p * (-43.0 / 540.0 + p * (769.0 / 17280.0 - p * 221.0 / 8505.0)))));
        if p < 1e-3 {
            return Ok(series);
        }
        series
    } else if z < 0.0 {
        z * (1.0 - z)
    } else if z < 3.0 {
        z.ln_1p()
    } else {
        let l = z.ln();
        l - l.ln()
    };

    for _ in 0..32 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        let next = (w - step).max(-1.0);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

/// Largest |x| accepted by [`airy_ai`]. Chosen to cover the tenth zero
/// (about -12.83) with margin.
pub const AIRY_MAX_ABS_X: f64 = 13.5;
pub const AIRY_MAX_ZERO_INDEX: usize = 9;
const AIRY_TERMS: usize = 60;

// Ai(0) and -Ai'(0), each split into a double-double.
const AIRY_C1: DoubleDouble = DoubleDouble {
    hi: 0.3550280538878172,
    lo: 2.05233632436212e-17,
};
const AIRY_C2: DoubleDouble = DoubleDouble {
    hi: 0.2588194037928068,
    lo: -2.522243111610832e-17,
};

/// Ai(x) from its two Maclaurin series, `Ai = c1 f(x) - c2 g(x)`.
///
/// The series cancel badly on the negative axis (terms reach ~1e13 near the
/// tenth zero), so they are summed in double-double arithmetic.
pub fn airy_ai(x: f64) -> Result<f64, SpecialError> {
    let (f, g) = airy_series(x)?;
    Ok((AIRY_C1 * f - AIRY_C2 * g).to_f64())
}

/// Ai'(x) from the differentiated series.
pub fn airy_ai_prime(x: f64) -> Result<f64, SpecialError> {
    if !(x.abs() <= AIRY_MAX_ABS_X) {
        return Err(SpecialError::AiryOutOfRange(x));
    }
    let x3 = DoubleDouble::from(x) * x * x;
    // f'(x) = sum 3k c_k x^(3k-1), g'(x) = sum (3k+1) d_k x^(3k)
    let mut fp_term = DoubleDouble::from(x) * x * 0.5;
    let mut fp = fp_term;
    let mut gp_term = DoubleDouble::from(1.0);
    let mut gp = gp_term;
    for k in 1..AIRY_TERMS {
        let kf = k as f64;
        if k > 1 {
            fp_term = (fp_term * x3) / ((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            fp = fp + fp_term;
        }
        gp_term = (gp_term * x3) / ((3.0 * kf - 2.0) * (3.0 * kf));
        gp = gp + gp_term;
    }
    Ok((AIRY_C1 * fp - AIRY_C2 * gp).to_f64())
}

fn airy_series(x: f64) -> Result<(DoubleDouble, DoubleDouble), SpecialError> {
    if !(x.abs() <= AIRY_MAX_ABS_X) {
        return Err(SpecialError::AiryOutOfRange(x));
    }
    let x3 = DoubleDouble::from(x) * x * x;
    let mut f_term = DoubleDouble::from(1.0);
    let mut f = f_term;
    let mut g_term = DoubleDouble::from(x);
    let mut g = g_term;
    for k in 1..AIRY_TERMS {
        let kf = k as f64;
        f_term = (f_term * x3) / ((3.0 * kf - 1.0) * (3.0 * kf));
        g_term = (g_term * x3) / ((3.0 * kf) * (3.0 * kf + 1.0));
        f = f + f_term;
        g = g + g_term;
    }
    Ok((f, g))
}

/// A zero of Ai on the negative axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryZero {
    /// 0 for the zero closest to the origin.
    pub index: usize,
    pub alpha: f64,
}

/// The `(n+1)`-th zero of Ai, located by bracketing sign changes of the
/// series evaluator and bisecting to full precision.
pub fn airy_zero(n: usize) -> Result<AiryZero, SpecialError> {
    static ZEROS: OnceLock<Vec<f64>> = OnceLock::new();
    if n > AIRY_MAX_ZERO_INDEX {
        return Err(SpecialError::AiryZeroIndex(n));
    }
    let zeros = ZEROS.get_or_init(compute_airy_zeros);
    Ok(AiryZero {
        index: n,
        alpha: zeros[n],
    })
}

fn compute_airy_zeros() -> Vec<f64> {
    let ai = |x: f64| airy_ai(x).expect("scan stays inside the series range");
    let step = 0.05;
    let mut zeros = Vec::with_capacity(AIRY_MAX_ZERO_INDEX + 1);
    let mut hi = 0.0;
    let mut f_hi = ai(hi);
    while zeros.len() <= AIRY_MAX_ZERO_INDEX {
        let lo = (hi - step).max(-AIRY_MAX_ABS_X);
        let f_lo = ai(lo);
        if f_lo == 0.0 {
            zeros.push(lo);
        } else if f_lo.signum() != f_hi.signum() {
            zeros.push(bisect_sign_change(ai, lo, hi, f_lo));
        }
        assert!(lo > -AIRY_MAX_ABS_X, "airy zero scan ran out of range");
        hi = lo;
        f_hi = f_lo;
    }
    zeros
}

fn bisect_sign_change(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl From<f64> for DoubleDouble {
    fn from(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }
}

impl std::ops::Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl std::ops::Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl std::ops::Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl std::ops::Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        let (p, e) = two_prod(self.hi, o);
        let (hi, lo) = quick_two_sum(p, e + self.lo * o);
        Self { hi, lo }
    }
}

impl std::ops::Div<f64> for DoubleDouble {
    type Output = Self;
    fn div(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let q2 = ((self.hi - p) - e + self.lo) / d;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }
}
