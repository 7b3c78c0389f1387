//! High-precision scalars used for term coefficients.
//!
//! Expanded monomial forms of smooth bumps cancel catastrophically in
//! binary64, so coefficients and closed-form integrals are carried in
//! 256-bit binary floats and only rounded to `f64` at the very end.

use std::cell::RefCell;
use std::collections::HashMap;

use dashu_float::FBig;

/// Binary float with the crate's working precision.
pub type Hp = FBig;

/// Working precision in bits.
pub const PRECISION: usize = 256;

/// Lifts an `f64` exactly into working precision.
///
/// # Panics
///
/// Panics on NaN or infinite input.
pub fn hp(x: f64) -> Hp {
    assert!(x.is_finite(), "non-finite value {x} cannot enter the term algebra");
    FBig::try_from(x)
        .expect("finite f64 converts exactly")
        .with_precision(PRECISION)
        .value()
}

/// Integer constant in working precision.
pub fn hp_int(k: i64) -> Hp {
    FBig::from(k).with_precision(PRECISION).value()
}

/// Zero with a bounded precision.
pub fn zero() -> Hp {
    hp_int(0)
}

pub fn one() -> Hp {
    hp_int(1)
}

/// Rounds to the nearest `f64`.
pub fn to_f64(x: &Hp) -> f64 {
    x.to_f64().value()
}

pub fn is_zero(x: &Hp) -> bool {
    x.repr().is_zero()
}

pub fn is_negative(x: &Hp) -> bool {
    x.repr().sign() == dashu_base::Sign::Negative && !is_zero(x)
}

pub fn abs(x: &Hp) -> Hp {
    if is_negative(x) {
        -x.clone()
    } else {
        x.clone()
    }
}

/// Integer power, negative exponents allowed.
pub fn powi(x: &Hp, k: i64) -> Hp {
    if k >= 0 {
        x.powi(dashu_int::IBig::from(k))
    } else {
        one() / x.powi(dashu_int::IBig::from(-k))
    }
}

thread_local! {
    static LN_CACHE: RefCell<HashMap<u64, Hp>> = RefCell::new(HashMap::new());
    static POW_CACHE: RefCell<HashMap<(u64, u64), Hp>> = RefCell::new(HashMap::new());
}

/// Natural logarithm of a positive `f64`, memoized per thread.
pub fn ln_f64(x: f64) -> Hp {
    assert!(x > 0.0 && x.is_finite(), "logarithm of non-positive value {x}");
    LN_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry(x.to_bits())
            .or_insert_with(|| hp(x).ln())
            .clone()
    })
}

/// `x^s` for positive `x` and any real `s`, memoized per thread.
///
/// Integer exponents are exact up to rounding of the products; the
/// fractional part goes through `exp(frac * ln x)`.
pub fn pow_f64(x: f64, s: f64) -> Hp {
    assert!(x > 0.0 && x.is_finite(), "power of non-positive base {x}");
    let s = if s == 0.0 { 0.0 } else { s };
    POW_CACHE.with(|cache| {
        if let Some(v) = cache.borrow().get(&(x.to_bits(), s.to_bits())) {
            return v.clone();
        }
        let v = pow_uncached(x, s);
        cache.borrow_mut().insert((x.to_bits(), s.to_bits()), v.clone());
        v
    })
}

fn pow_uncached(x: f64, s: f64) -> Hp {
    let whole = s.floor();
    let frac = s - whole;
    let base = hp(x);
    let int_part = powi(&base, whole as i64);
    if frac == 0.0 {
        int_part
    } else if frac == 0.5 {
        int_part * sqrt(&base)
    } else {
        int_part * (ln_f64(x) * hp(frac)).exp()
    }
}

/// `x^s` for a high-precision positive base (no caching).
pub fn pow_hp(x: &Hp, s: f64) -> Hp {
    let whole = s.floor();
    let frac = s - whole;
    let int_part = powi(x, whole as i64);
    if frac == 0.0 {
        int_part
    } else if frac == 0.5 {
        int_part * sqrt(x)
    } else {
        int_part * (x.ln() * hp(frac)).exp()
    }
}

pub fn sqrt(x: &Hp) -> Hp {
    (x.ln() / hp_int(2)).exp()
}

/// Binomial coefficient as a high-precision integer.
pub fn binomial(n: u32, k: u32) -> Hp {
    let mut acc = one();
    for i in 0..k {
        acc = acc * hp_int(i64::from(n - i)) / hp_int(i64::from(i + 1));
    }
    acc
}
