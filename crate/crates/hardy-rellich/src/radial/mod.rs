//! Exact algebra of piecewise radial functions.
//!
//! A [`PiecewiseRadial`] is a finite sum of terms `c·r^p·(ln r)^q` on each of
//! finitely many disjoint pieces `[a, b] ⊂ (0, ∞)`, zero elsewhere. The class
//! is closed under the operators of the mode calculus and every weighted
//! integral has a closed form, so identities can be checked without
//! discretization error.
//!
//! Exponents are stored exactly as `(f64 power, i32 logpow)` keys and merged
//! without tolerance. Coefficients live in 256-bit floats (see [`crate::hp`]).
//!
//! ```
//! use hardy_rellich::radial::{PiecewiseRadial, weighted_norm_sq};
//! let one = PiecewiseRadial::monomial(1.0, 2.0, 1.0, 0.0, 0).unwrap();
//! // ∫₁² r² dr with n = 3, β = 0
//! assert!((weighted_norm_sq(&one, 0.0, 3) - 7.0 / 3.0).abs() < 1e-15);
//! ```

mod integrate;

use std::collections::BTreeMap;
use std::fmt;

use ordered_float::OrderedFloat;

use crate::hp::{self, Hp};

pub use integrate::moment;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RadialError {
    #[error("invalid piece [{a}, {b}]: need 0 < a < b < ∞")]
    InvalidPiece { a: f64, b: f64 },
    #[error("pieces overlap or are unsorted near r = {at}")]
    Overlap { at: f64 },
    #[error("piece [{a}, {b}] straddles r = 1 where ln r changes sign")]
    StraddlesOne { a: f64, b: f64 },
    #[error("negative powers of ln r cannot be {what}")]
    NotRepresentable { what: &'static str },
}

/// Exponent key of a term `r^p (ln r)^q`, with `p = base + offset` held
/// exactly.
///
/// Sums of non-dyadic exponents round, and rounding `p_i + p_j` pair by pair
/// would perturb each product term differently, which destroys the heavy
/// cancellation inside expanded bumps. Keeping the integer part apart makes
/// every term that shares a base share its rounding as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    base: OrderedFloat<f64>,
    offset: i64,
    logpow: i32,
}

impl TermKey {
    /// # Panics
    ///
    /// Panics if `power` is not finite.
    pub fn new(power: f64, logpow: i32) -> Self {
        assert!(power.is_finite(), "term power must be finite, got {power}");
        Self::normalized(power, 0, logpow)
    }

    fn normalized(base: f64, offset: i64, logpow: i32) -> Self {
        if base.fract() == 0.0 && base.abs() < 9.0e15 {
            Self { base: OrderedFloat(0.0), offset: offset + base as i64, logpow }
        } else {
            Self { base: OrderedFloat(base), offset, logpow }
        }
    }

    /// The key of the product of two terms.
    pub fn combine(&self, other: &Self) -> Self {
        Self::normalized(self.base.0 + other.base.0, self.offset + other.offset, self.logpow + other.logpow)
    }

    fn with_offset(&self, d: i64, dq: i32) -> Self {
        Self { base: self.base, offset: self.offset + d, logpow: self.logpow + dq }
    }

    /// The power rounded to `f64`.
    pub fn power(&self) -> f64 {
        self.base.0 + self.offset as f64
    }

    /// Non-integer part of the power (zero for integer powers).
    pub fn base(&self) -> f64 {
        self.base.0
    }

    /// Integer part of the power relative to [`TermKey::base`].
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// The power in working precision, without rounding.
    pub fn power_hp(&self) -> Hp {
        hp::hp(self.base.0) + hp::hp_int(self.offset)
    }

    fn is_power(&self, p: i64) -> bool {
        self.base.0 == 0.0 && self.offset == p
    }

    pub fn logpow(&self) -> i32 {
        self.logpow
    }
}

/// A single summand `coeff · r^power · (ln r)^logpow`, rounded to `f64`
/// for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialTerm {
    pub coeff: f64,
    pub power: f64,
    pub logpow: i32,
}

/// Finite sum of terms keyed by `(power, logpow)`; zero coefficients are
/// never stored.
#[derive(Clone, Default, PartialEq)]
pub struct RadialPoly {
    terms: BTreeMap<TermKey, Hp>,
}

impl fmt::Debug for RadialPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.terms()).finish()
    }
}

impl RadialPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0.0, 0)
    }

    pub fn monomial(coeff: f64, power: f64, logpow: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(TermKey::new(power, logpow), hp::hp(coeff));
        p
    }

    /// Builds a polynomial from `(coeff, power, logpow)` triples, merging
    /// equal keys.
    pub fn from_terms<I: IntoIterator<Item = (f64, f64, i32)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (c, power, logpow) in terms {
            p.add_term(TermKey::new(power, logpow), hp::hp(c));
        }
        p
    }

    /// Polynomial `Σ c_j r^j` from ascending coefficients.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(j, &c)| (c, j as f64, 0)))
    }

    pub(crate) fn add_term(&mut self, key: TermKey, coeff: Hp) {
        if hp::is_zero(&coeff) {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if hp::is_zero(&sum) {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in key order with coefficients rounded to `f64`.
    pub fn terms(&self) -> Vec<RadialTerm> {
        self.terms
            .iter()
            .map(|(k, c)| RadialTerm { coeff: hp::to_f64(c), power: k.power(), logpow: k.logpow() })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TermKey, &Hp)> {
        self.terms.iter()
    }

    pub fn min_logpow(&self) -> i32 {
        self.terms.keys().map(|k| k.logpow).min().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn scale_hp(&self, c: &Hp) -> Self {
        let mut out = Self::zero();
        if hp::is_zero(c) {
            return out;
        }
        for (k, v) in &self.terms {
            out.add_term(*k, v.clone() * c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                out.add_term(k1.combine(k2), c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Multiplies by `r^dp (ln r)^dq`.
    pub fn shift(&self, dp: f64, dq: i32) -> Self {
        let by = TermKey::new(dp, dq);
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(k.combine(&by), c.clone());
        }
        out
    }

    /// Formal derivative in `r`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            if !k.is_power(0) {
                out.add_term(k.with_offset(-1, 0), c.clone() * k.power_hp());
            }
            if k.logpow != 0 {
                out.add_term(k.with_offset(-1, -1), c.clone() * hp::hp_int(i64::from(k.logpow)));
            }
        }
        out
    }

    /// An antiderivative in `r`, defined for nonnegative logpows only.
    pub fn antiderivative(&self) -> Result<Self, RadialError> {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let q = k.logpow;
            if q < 0 {
                return Err(RadialError::NotRepresentable { what: "integrated symbolically" });
            }
            if k.is_power(-1) {
                out.add_term(TermKey::new(0.0, q + 1), c.clone() / hp::hp_int(i64::from(q + 1)));
                continue;
            }
            // ∫ r^p (ln r)^q = r^{p+1} Σ_i (-1)^i q!/(q-i)! (ln r)^{q-i} / (p+1)^{i+1}
            let p1 = k.power_hp() + hp::one();
            let mut factor = c.clone() / p1.clone();
            for i in 0..=q {
                out.add_term(k.with_offset(1, -i), factor.clone());
                factor = -factor * hp::hp_int(i64::from(q - i)) / p1.clone();
            }
        }
        Ok(out)
    }

    /// Evaluates at `r > 0` in working precision.
    pub fn eval_hp(&self, r: f64) -> Hp {
        let r_hp = hp::hp(r);
        let mut ln_r: Option<Hp> = None;
        let mut frac_cache: Vec<(u64, Hp)> = Vec::new();
        let mut acc = hp::zero();
        for (k, c) in &self.terms {
            let frac = k.base();
            let mut v = hp::powi(&r_hp, k.offset());
            if frac != 0.0 {
                let fp = match frac_cache.iter().find(|(bits, _)| *bits == frac.to_bits()) {
                    Some((_, v)) => v.clone(),
                    None => {
                        let l = ln_r.get_or_insert_with(|| hp::ln_f64(r)).clone();
                        let v = if frac == 0.5 { hp::sqrt(&r_hp) } else { (l * hp::hp(frac)).exp() };
                        frac_cache.push((frac.to_bits(), v.clone()));
                        v
                    }
                };
                v *= fp;
            }
            if k.logpow != 0 {
                let l = ln_r.get_or_insert_with(|| hp::ln_f64(r)).clone();
                v *= hp::powi(&l, i64::from(k.logpow));
            }
            acc += c.clone() * v;
        }
        acc
    }
}

/// One piece `[a, b]` of a [`PiecewiseRadial`].
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub body: RadialPoly,
}

impl Piece {
    /// Sign of `ln r` on the piece, `None` if the piece straddles 1.
    fn log_sign(&self) -> Option<i32> {
        if self.a >= 1.0 {
            Some(1)
        } else if self.b <= 1.0 {
            Some(-1)
        } else {
            None
        }
    }
}

/// Piecewise radial function supported on finitely many disjoint pieces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PiecewiseRadial {
    pieces: Vec<Piece>,
}

fn check_piece(a: f64, b: f64) -> Result<(), RadialError> {
    if a > 0.0 && a < b && b.is_finite() {
        Ok(())
    } else {
        Err(RadialError::InvalidPiece { a, b })
    }
}

impl PiecewiseRadial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(a: f64, b: f64, body: RadialPoly) -> Result<Self, RadialError> {
        check_piece(a, b)?;
        let pieces = if body.is_zero() { vec![] } else { vec![Piece { a, b, body }] };
        Ok(Self { pieces })
    }

    /// `coeff · r^power · (ln r)^logpow` on `[a, b]`.
    pub fn monomial(a: f64, b: f64, coeff: f64, power: f64, logpow: i32) -> Result<Self, RadialError> {
        Self::single(a, b, RadialPoly::monomial(coeff, power, logpow))
    }

    /// Builds from sorted, pairwise disjoint pieces.
    pub fn from_pieces(pieces: Vec<(f64, f64, RadialPoly)>) -> Result<Self, RadialError> {
        let mut out = Vec::with_capacity(pieces.len());
        let mut last_b = 0.0;
        for (a, b, body) in pieces {
            check_piece(a, b)?;
            if a < last_b {
                return Err(RadialError::Overlap { at: a });
            }
            last_b = b;
            if !body.is_zero() {
                out.push(Piece { a, b, body });
            }
        }
        Ok(Self { pieces: out })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Convex hull of the support, `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((self.pieces.first()?.a, self.pieces.last()?.b))
    }

    fn map_bodies(&self, f: impl Fn(&RadialPoly) -> RadialPoly) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { a: p.a, b: p.b, body: f(&p.body) })
            .filter(|p| !p.body.is_zero())
            .collect();
        Self { pieces }
    }

    fn try_map_pieces(
        &self,
        f: impl Fn(&Piece) -> Result<RadialPoly, RadialError>,
    ) -> Result<Self, RadialError> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            let body = f(p)?;
            if !body.is_zero() {
                pieces.push(Piece { a: p.a, b: p.b, body });
            }
        }
        Ok(Self { pieces })
    }

    fn body_covering(&self, lo: f64, hi: f64) -> Option<&RadialPoly> {
        self.pieces.iter().find(|p| p.a <= lo && hi <= p.b).map(|p| &p.body)
    }

    /// Pointwise sum on the common refinement of both partitions.
    pub fn add(&self, other: &Self) -> Self {
        let mut cuts: Vec<f64> = self
            .pieces
            .iter()
            .chain(other.pieces.iter())
            .flat_map(|p| [p.a, p.b])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let body = match (self.body_covering(lo, hi), other.body_covering(lo, hi)) {
                (None, None) => continue,
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (Some(x), Some(y)) => x.add(y),
            };
            if !body.is_zero() {
                pieces.push(Piece { a: lo, b: hi, body });
            }
        }
        Self { pieces }
    }

    pub fn neg(&self) -> Self {
        self.map_bodies(RadialPoly::neg)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.scale_hp(&hp::hp(c))
    }

    pub fn scale_hp(&self, c: &Hp) -> Self {
        self.map_bodies(|b| b.scale_hp(c))
    }

    /// Pointwise product.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut pieces = Vec::new();
        for x in &self.pieces {
            for y in &other.pieces {
                let (lo, hi) = (x.a.max(y.a), x.b.min(y.b));
                if lo < hi {
                    let body = x.body.mul(&y.body);
                    if !body.is_zero() {
                        pieces.push(Piece { a: lo, b: hi, body });
                    }
                }
            }
        }
        pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
        Self { pieces }
    }

    /// Per-piece formal derivative.
    pub fn differentiate(&self) -> Self {
        self.map_bodies(RadialPoly::derivative)
    }

    /// Per-piece antiderivative; requires nonnegative logpows.
    pub fn antiderivative(&self) -> Result<Self, RadialError> {
        self.try_map_pieces(|p| p.body.antiderivative())
    }

    /// Multiplies by `r^s`.
    pub fn mul_power(&self, s: f64) -> Self {
        self.map_bodies(|b| b.shift(s, 0))
    }

    /// Multiplies by `|ln r|^q` for an integer `q`, which needs a fixed sign
    /// of `ln r` on every piece.
    pub fn mul_abs_log(&self, q: i32) -> Result<Self, RadialError> {
        if q == 0 {
            return Ok(self.clone());
        }
        self.try_map_pieces(|p| {
            let sign = p.log_sign().ok_or(RadialError::StraddlesOne { a: p.a, b: p.b })?;
            if q < 0 && (p.a == 1.0 || p.b == 1.0) {
                return Err(RadialError::StraddlesOne { a: p.a, b: p.b });
            }
            let body = p.body.shift(0.0, q);
            Ok(if sign < 0 && q % 2 != 0 { body.neg() } else { body })
        })
    }

    /// Multiplies by `(ln r)^q`; negative `q` needs every piece strictly on
    /// one side of `r = 1`.
    pub fn mul_log(&self, q: i32) -> Result<Self, RadialError> {
        self.try_map_pieces(|p| {
            if q < 0 && p.a <= 1.0 && 1.0 <= p.b {
                return Err(RadialError::StraddlesOne { a: p.a, b: p.b });
            }
            Ok(p.body.shift(0.0, q))
        })
    }

    /// Whether every piece lies strictly on one side of `r = 1`.
    pub fn avoids_one(&self) -> bool {
        self.pieces.iter().all(|p| p.b < 1.0 || p.a > 1.0)
    }

    /// Value at `r`; pieces are closed on the left, the last one also on the right.
    pub fn eval(&self, r: f64) -> f64 {
        hp::to_f64(&self.eval_hp(r))
    }

    pub fn eval_hp(&self, r: f64) -> Hp {
        let n = self.pieces.len();
        for (i, p) in self.pieces.iter().enumerate() {
            if p.a <= r && (r < p.b || (r == p.b && (i + 1 == n || self.pieces[i + 1].a != r))) {
                return p.body.eval_hp(r);
            }
        }
        hp::zero()
    }

    /// The function `r ↦ x(λ r)`, with pieces mapped to `[a/λ, b/λ]`.
    pub fn dilate(&self, lambda: f64) -> Result<Self, RadialError> {
        assert!(lambda > 0.0 && lambda.is_finite(), "dilation factor must be positive");
        let ln_l = hp::ln_f64(lambda);
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            let mut body = RadialPoly::zero();
            for (k, c) in p.body.iter() {
                if k.logpow < 0 {
                    return Err(RadialError::NotRepresentable { what: "dilated" });
                }
                // c λ^p r^p (ln λ + ln r)^q
                let scale = c.clone() * hp::pow_f64(lambda, k.base()) * hp::powi(&hp::hp(lambda), k.offset());
                let q = k.logpow as u32;
                for i in 0..=q {
                    let coeff = scale.clone()
                        * hp::binomial(q, i)
                        * hp::powi(&ln_l, i64::from(q - i));
                    body.add_term(k.with_offset(0, i as i32 - k.logpow), coeff);
                }
            }
            if !body.is_zero() {
                pieces.push(Piece { a: p.a / lambda, b: p.b / lambda, body });
            }
        }
        Ok(Self { pieces })
    }

    /// `∫ x(r) r^γ dr` in working precision.
    pub fn integrate_moment_hp(&self, gamma: f64) -> Hp {
        let mut acc = hp::zero();
        for p in &self.pieces {
            acc += integrate_body(&p.body, gamma, p.a, p.b);
        }
        acc
    }
}

fn integrate_body(body: &RadialPoly, gamma: f64, a: f64, b: f64) -> Hp {
    let weight = TermKey::new(gamma, 0);
    let mut acc = hp::zero();
    for (k, c) in body.iter() {
        acc += c.clone() * integrate::moment_key(&k.combine(&weight), a, b);
    }
    acc
}

/// `∫ x·y·r^γ dr` without materializing the product function.
fn inner_moment_hp(x: &PiecewiseRadial, y: &PiecewiseRadial, gamma: f64) -> Hp {
    let mut acc = hp::zero();
    for px in &x.pieces {
        for py in &y.pieces {
            let (lo, hi) = (px.a.max(py.a), px.b.min(py.b));
            if lo < hi {
                acc += integrate_body(&px.body.mul(&py.body), gamma, lo, hi);
            }
        }
    }
    acc
}

impl std::ops::Add for &PiecewiseRadial {
    type Output = PiecewiseRadial;
    fn add(self, rhs: Self) -> PiecewiseRadial {
        PiecewiseRadial::add(self, rhs)
    }
}

impl std::ops::Sub for &PiecewiseRadial {
    type Output = PiecewiseRadial;
    fn sub(self, rhs: Self) -> PiecewiseRadial {
        PiecewiseRadial::sub(self, rhs)
    }
}

impl std::ops::Mul for &PiecewiseRadial {
    type Output = PiecewiseRadial;
    fn mul(self, rhs: Self) -> PiecewiseRadial {
        self.multiply(rhs)
    }
}

impl std::ops::Neg for &PiecewiseRadial {
    type Output = PiecewiseRadial;
    fn neg(self) -> PiecewiseRadial {
        PiecewiseRadial::neg(self)
    }
}

pub fn add(x: &PiecewiseRadial, y: &PiecewiseRadial) -> PiecewiseRadial {
    x.add(y)
}

pub fn multiply(x: &PiecewiseRadial, y: &PiecewiseRadial) -> PiecewiseRadial {
    x.multiply(y)
}

pub fn differentiate(x: &PiecewiseRadial) -> PiecewiseRadial {
    x.differentiate()
}

/// `∫ x(r) r^γ dr` over all pieces, in closed form.
///
/// # Panics
///
/// Panics if a piece carrying a negative power of `ln r` touches `r = 1`;
/// the constructors that produce such terms refuse those pieces.
pub fn integrate_moment(x: &PiecewiseRadial, gamma: f64) -> f64 {
    hp::to_f64(&x.integrate_moment_hp(gamma))
}

/// `‖x‖²_β = ∫ x² r^{n-1-β} dr`.
pub fn weighted_norm_sq(x: &PiecewiseRadial, beta: f64, n: u32) -> f64 {
    hp::to_f64(&weighted_norm_sq_hp(x, beta, n))
}

pub fn weighted_norm_sq_hp(x: &PiecewiseRadial, beta: f64, n: u32) -> Hp {
    inner_moment_hp(x, x, f64::from(n) - 1.0 - beta)
}

/// `⟨x, y⟩_β = ∫ x y r^{n-1-β} dr`.
pub fn weighted_inner(x: &PiecewiseRadial, y: &PiecewiseRadial, beta: f64, n: u32) -> f64 {
    hp::to_f64(&weighted_inner_hp(x, y, beta, n))
}

pub fn weighted_inner_hp(x: &PiecewiseRadial, y: &PiecewiseRadial, beta: f64, n: u32) -> Hp {
    inner_moment_hp(x, y, f64::from(n) - 1.0 - beta)
}
