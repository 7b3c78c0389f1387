//! Closed-form moments `∫_a^b r^s (ln r)^q dr`.
//!
//! Everything is done in `t = ln r`, where the integrand becomes
//! `e^{ct} t^q` with `c = s + 1`.

use std::cell::RefCell;
use std::collections::HashMap;

use dashu_float::FBig;

use crate::hp::{self, Hp, PRECISION};

use super::TermKey;

/// Guard bits carried on top of the working precision inside one moment.
const GUARD: usize = 64;

/// Terms of a convergent series below `2^-(prec + 8)` of the running scale
/// are dropped.
const MAX_SERIES_TERMS: usize = 4096;

type Key = (u64, i64, i32, u64, u64);

thread_local! {
    static MOMENTS: RefCell<HashMap<Key, Hp>> = RefCell::new(HashMap::new());
}

fn lift(x: f64, prec: usize) -> FBig {
    FBig::try_from(x).expect("finite").with_precision(prec).value()
}

fn int(k: i64, prec: usize) -> FBig {
    FBig::from(k).with_precision(prec).value()
}

fn negligible(term: &FBig, scale: &FBig, prec: usize) -> bool {
    let t = hp::to_f64(&hp::abs(term));
    let s = hp::to_f64(scale);
    t == 0.0 || t <= s * (-(prec as f64 + 8.0)).exp2()
}

/// `∫_a^b r^s (ln r)^q dr` for `0 < a < b`.
///
/// Negative `q` needs `[a, b]` on one side of `r = 1` (touching is not
/// allowed either, the integral would diverge).
///
/// # Panics
///
/// Panics if `q < 0` and `1 ∈ [a, b]`, or if the interval is invalid.
pub fn moment(s: f64, q: i32, a: f64, b: f64) -> Hp {
    moment_key(&TermKey::new(s, q), a, b)
}

/// [`moment`] for an exact exponent key.
pub(crate) fn moment_key(k: &TermKey, a: f64, b: f64) -> Hp {
    assert!(a > 0.0 && a < b && b.is_finite(), "invalid moment interval [{a}, {b}]");
    let key = (k.base().to_bits(), k.offset(), k.logpow(), a.to_bits(), b.to_bits());
    if let Some(v) = MOMENTS.with(|m| m.borrow().get(&key).cloned()) {
        return v;
    }
    let v = compute(k.base(), k.offset() + 1, k.logpow(), a, b).with_precision(PRECISION).value();
    MOMENTS.with(|m| m.borrow_mut().insert(key, v.clone()));
    v
}

/// `c = base + offset` exactly; `base` is zero or non-integer.
fn exponent(base: f64, offset: i64, prec: usize) -> FBig {
    lift(base, prec) + int(offset, prec)
}

fn compute(base: f64, offset: i64, q: i32, a: f64, b: f64) -> FBig {
    let c = base + offset as f64;
    let c_is_zero = base == 0.0 && offset == 0;
    let t_max = a.ln().abs().max(b.ln().abs());
    if q >= 0 {
        let prec = PRECISION + GUARD + (2 * q as usize);
        let ta = lift(a, prec).ln();
        let tb = lift(b, prec).ln();
        if c_is_zero {
            return (tb.powi((q + 1).into()) - ta.powi((q + 1).into())) / int(i64::from(q + 1), prec);
        }
        let cf = exponent(base, offset, prec);
        if c.abs() * t_max <= 1.0 {
            small_c_series(&cf, q, &ta, &tb, prec)
        } else {
            primitive(&cf, q, &tb, prec) - primitive(&cf, q, &ta, prec)
        }
    } else {
        assert!(b < 1.0 || a > 1.0, "negative log power on [{a}, {b}] which reaches r = 1");
        // the J(-1) series has terms as large as e^{|c| T}
        let boost = (1.443 * c.abs() * t_max).ceil() as usize;
        let prec = PRECISION + GUARD + boost;
        let ta = lift(a, prec).ln();
        let tb = lift(b, prec).ln();
        negative_log(&exponent(base, offset, prec), c_is_zero, -q, &ta, &tb, prec)
    }
}

/// `e^{ct} Σ_i (-1)^i q!/(q-i)! t^{q-i} / c^{i+1}`, a primitive of `e^{ct} t^q`.
fn primitive(c: &FBig, q: i32, t: &FBig, prec: usize) -> FBig {
    let mut sum = int(0, prec);
    let mut factor = int(1, prec) / c.clone();
    for i in 0..=q {
        sum += factor.clone() * t.powi((q - i).into());
        factor = -factor * int(i64::from(q - i), prec) / c.clone();
    }
    (c.clone() * t.clone()).exp() * sum
}

/// `Σ_j c^j/j! (tb^{q+j+1} - ta^{q+j+1}) / (q+j+1)`, for `|c| T ≤ 1`.
fn small_c_series(cf: &FBig, q: i32, ta: &FBig, tb: &FBig, prec: usize) -> FBig {
    let mut sum = int(0, prec);
    let mut scale = int(0, prec);
    let mut coeff = int(1, prec);
    let mut pa = ta.powi((q + 1).into());
    let mut pb = tb.powi((q + 1).into());
    for j in 0..MAX_SERIES_TERMS {
        let term = coeff.clone() * (pb.clone() - pa.clone()) / int(i64::from(q) + j as i64 + 1, prec);
        sum += term.clone();
        scale += hp::abs(&term);
        if j > 0 && negligible(&term, &scale, prec) {
            break;
        }
        coeff = coeff * cf.clone() / int(j as i64 + 1, prec);
        pa *= ta.clone();
        pb *= tb.clone();
    }
    sum
}

/// `∫ e^{ct} t^{-m} dt` between `ta` and `tb` (same sign), via the
/// exponential-integral series for `m = 1` and integration by parts upward.
fn negative_log(cf: &FBig, c_is_zero: bool, m: i32, ta: &FBig, tb: &FBig, prec: usize) -> FBig {
    let c = hp::to_f64(cf);
    if c_is_zero {
        return if m == 1 {
            (tb.clone() / ta.clone()).ln()
        } else {
            let e = i64::from(1 - m);
            (hp::powi(tb, e) - hp::powi(ta, e)) / int(e, prec)
        };
    }
    // J(-1) = ln(tb/ta) + Σ_k c^k (tb^k - ta^k) / (k k!)
    let mut j = (tb.clone() / ta.clone()).ln();
    let mut scale = hp::abs(&j);
    let mut coeff = int(1, prec);
    let mut pa = int(1, prec);
    let mut pb = int(1, prec);
    let t_max = hp::to_f64(&hp::abs(ta)).max(hp::to_f64(&hp::abs(tb)));
    for k in 1..MAX_SERIES_TERMS {
        coeff = coeff * cf.clone() / int(k as i64, prec);
        pa *= ta.clone();
        pb *= tb.clone();
        let term = coeff.clone() * (pb.clone() - pa.clone()) / int(k as i64, prec);
        j += term.clone();
        scale += hp::abs(&term);
        if (k as f64) > 2.0 * c.abs() * t_max + 2.0 && negligible(&term, &scale, prec) {
            break;
        }
    }
    // J(-m) = ([e^{ct} t^{1-m}] - c J(1-m)) / (1-m)
    let ea = (cf.clone() * ta.clone()).exp();
    let eb = (cf.clone() * tb.clone()).exp();
    for k in 2..=m {
        let e = i64::from(1 - k);
        let boundary = eb.clone() * hp::powi(tb, e) - ea.clone() * hp::powi(ta, e);
        j = (boundary - cf.clone() * j) / int(e, prec);
    }
    j
}
