//! Canned test profiles.
//!
//! `polybump(a, b, k) = (r-a)^k (b-r)^k` on `[a, b]` vanishes to order `k`
//! at both ends, so it is `C^{k-1}` as a function on `(0, ∞)` and stays in
//! the polynomial term algebra. Random multipliers are drawn from a seeded
//! ChaCha stream so every case can be replayed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::hp;
use crate::radial::{PiecewiseRadial, RadialError, RadialPoly, TermKey};

/// `(r-a)^k (b-r)^k` on `[a, b]`, expanded with high-precision coefficients.
///
/// ```
/// use hardy_rellich::families::polybump;
/// let f = polybump(1.0, 2.0, 2).unwrap();
/// assert_eq!(f.eval(1.5), 0.0625);
/// assert_eq!(f.eval(1.0), 0.0);
/// ```
pub fn polybump(a: f64, b: f64, k: u32) -> Result<PiecewiseRadial, RadialError> {
    let left = binomial_expansion(-a, 1.0, k);
    let right = binomial_expansion(b, -1.0, k);
    PiecewiseRadial::single(a, b, left.mul(&right))
}

/// `(c0 + c1 r)^k` as a polynomial in `r`.
fn binomial_expansion(c0: f64, c1: f64, k: u32) -> RadialPoly {
    let mut p = RadialPoly::zero();
    let (c0, c1) = (hp::hp(c0), hp::hp(c1));
    for i in 0..=k {
        let coeff = hp::binomial(k, i)
            * hp::powi(&c1, i64::from(i))
            * hp::powi(&c0, i64::from(k - i));
        p.add_term(TermKey::new(f64::from(i), 0), coeff);
    }
    p
}

/// Description of a test profile; enough to rebuild it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub a: f64,
    pub b: f64,
    pub k: u32,
    /// Ascending coefficients of a polynomial multiplier (empty means 1).
    pub multiplier: Vec<f64>,
    /// Extra factor `r^power`.
    pub power: f64,
}

impl TestFunction {
    pub fn bump(a: f64, b: f64, k: u32) -> Self {
        Self { a, b, k, multiplier: Vec::new(), power: 0.0 }
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    pub fn with_multiplier(mut self, coeffs: Vec<f64>) -> Self {
        self.multiplier = coeffs;
        self
    }

    /// A bump times a random polynomial of degree ≤ 3 whose values stay in
    /// a band around 1, so the product keeps one sign.
    pub fn random(a: f64, b: f64, k: u32, rng: &mut ChaCha8Rng) -> Self {
        // scale higher coefficients by the support size so that |p - 1| ≤ 0.9 on [a, b]
        let mut coeffs = vec![1.0];
        for j in 1..=3 {
            let c: f64 = rng.gen_range(-0.3..0.3);
            coeffs.push(c / b.powi(j));
        }
        Self::bump(a, b, k).with_multiplier(coeffs)
    }

    pub fn profile(&self) -> Result<PiecewiseRadial, RadialError> {
        let mut f = polybump(self.a, self.b, self.k)?;
        if !self.multiplier.is_empty() {
            let m = PiecewiseRadial::single(self.a, self.b, RadialPoly::polynomial(&self.multiplier))?;
            f = f.multiply(&m);
        }
        if self.power != 0.0 {
            f = f.mul_power(self.power);
        }
        Ok(f)
    }

    pub fn label(&self) -> String {
        let mut s = format!("bump({},{},{})", self.a, self.b, self.k);
        if !self.multiplier.is_empty() {
            s.push_str("*poly");
        }
        if self.power != 0.0 {
            s.push_str(&format!("*r^{}", self.power));
        }
        s
    }
}

/// The standard supports: `(1, 2)`, `(1/2, 3)` and `(e^{-3}, e^{-1})`.
pub fn standard_supports() -> [(f64, f64); 3] {
    [(1.0, 2.0), (0.5, 3.0), ((-3.0f64).exp(), (-1.0f64).exp())]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` random bumps on the given support.
pub fn random_bumps(a: f64, b: f64, k: u32, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut r = rng(seed);
    (0..count).map(|_| TestFunction::random(a, b, k, &mut r)).collect()
}
