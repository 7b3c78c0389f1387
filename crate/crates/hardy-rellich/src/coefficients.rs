//! Constants and coefficient recurrences.
//!
//! Everything is generic over [`Scalar`] so the same recurrence code runs in
//! binary64 and in exact rational arithmetic. An `f64` parameter converts
//! exactly to a rational with [`rational`].

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// Field operations needed by the recurrences.
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(k: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact text for rationals, shortest round-trip text for floats.
    fn to_exact_string(&self) -> String;
}

impl Scalar for f64 {
    fn from_i64(k: i64) -> Self {
        k as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_exact_string(&self) -> String {
        format!("{self}")
    }
}

impl Scalar for BigRational {
    fn from_i64(k: i64) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_exact_string(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Exact rational value of a finite `f64`.
///
/// # Panics
///
/// Panics on non-finite input.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

fn sq<S: Scalar>(x: S) -> S {
    x.clone() * x
}

fn shift<S: Scalar>(x: &S, k: i64) -> S {
    x.clone() + S::from_i64(k)
}

/// `A_β = (n+β)(n-4-β)/4`.
///
/// ```
/// use hardy_rellich::coefficients::{a_const, d_const};
/// assert_eq!(a_const(5, &0.0), 1.25);
/// assert_eq!(d_const(5, &0.0), 6.5);
/// ```
pub fn a_const<S: Scalar>(n: u32, beta: &S) -> S {
    let n = S::from_i64(i64::from(n));
    (n.clone() + beta.clone()) * (n - S::from_i64(4) - beta.clone()) / S::from_i64(4)
}

/// `D_β = ((n+β)² + (n-4-β)²)/4`.
pub fn d_const<S: Scalar>(n: u32, beta: &S) -> S {
    let n = S::from_i64(i64::from(n));
    (sq(n.clone() + beta.clone()) + sq(n - S::from_i64(4) - beta.clone())) / S::from_i64(4)
}

/// `γ_j = (2j-1)!!/2^j`, with `γ_0 = 1`.
pub fn gamma_halfint(j: u32) -> f64 {
    (1..=j).fold(1.0, |acc, i| acc * f64::from(2 * i - 1) / 2.0)
}

/// `c` with `(-Δ)^k r^σ = c r^{σ-2k}`, namely `∏_{l<k} -(σ-2l)(σ-2l+n-2)`.
pub fn power_rule_constant<S: Scalar>(n: u32, sigma: &S, k: u32) -> S {
    let n2 = S::from_i64(i64::from(n) - 2);
    (0..k).fold(S::from_i64(1), |acc, l| {
        let s = shift(sigma, -2 * i64::from(l));
        acc * -(s.clone() * (s + n2.clone()))
    })
}

/// Memoized `C`, `Ĉ` and `H` at fixed `(n, α)`.
///
/// The memo is owned by the instance; use one per task for concurrent work.
#[derive(Debug, Clone)]
pub struct Coefficients<S: Scalar> {
    n: u32,
    alpha: S,
    c: HashMap<(i64, u32), S>,
    // key: (j, m, α-shift in units of 2, k)
    c_hat: HashMap<(i64, u32, i64, i64), S>,
}

impl<S: Scalar> Coefficients<S> {
    pub fn new(n: u32, alpha: S) -> Self {
        Self { n, alpha, c: HashMap::new(), c_hat: HashMap::new() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> &S {
        &self.alpha
    }

    /// `α + 2s`.
    fn alpha_plus(&self, twice: i64) -> S {
        shift(&self.alpha, twice)
    }

    pub fn a(&self, offset: i64) -> S {
        a_const(self.n, &self.alpha_plus(offset))
    }

    pub fn d(&self, offset: i64) -> S {
        d_const(self.n, &self.alpha_plus(offset))
    }

    /// `C_{j,m,α}`; zero outside `0 ≤ j ≤ 2m`.
    ///
    /// `C_{j,k+1} = A²_{α+4k} C_{j-2,k} + D_{α+4k} C_{j-1,k} + C_{j,k}`, `C_{0,0} = 1`.
    pub fn c(&mut self, j: i64, m: u32) -> S {
        if j < 0 || j > 2 * i64::from(m) {
            return S::from_i64(0);
        }
        if m == 0 {
            return S::from_i64(1);
        }
        if let Some(v) = self.c.get(&(j, m)) {
            return v.clone();
        }
        let k = i64::from(m - 1);
        let v = sq(self.a(4 * k)) * self.c(j - 2, m - 1)
            + self.d(4 * k) * self.c(j - 1, m - 1)
            + self.c(j, m - 1);
        self.c.insert((j, m), v.clone());
        v
    }

    /// `H_k = ∏_{l=0}^{k} A²_{α+4l}`, with `H_{-1} = 1`.
    pub fn h(&self, k: i64) -> S {
        assert!(k >= -1, "H is defined for k ≥ -1");
        (0..=k).fold(S::from_i64(1), |acc, l| acc * sq(self.a(4 * l)))
    }

    /// `∏_{l<m} A²_{α+offset+4l}`.
    pub fn a_product(&self, offset: i64, m: u32) -> S {
        (0..i64::from(m)).fold(S::from_i64(1), |acc, l| acc * sq(self.a(offset + 4 * l)))
    }

    /// `Ĉ_{j,m,α+2s,k}`: coefficient of `‖R_{α+2s+2j, 2m+k-j} f‖²` in the
    /// expansion of `‖R_{α+2s,k} Δ_r^m f‖²`.
    pub fn c_hat_shifted(&mut self, j: i64, m: u32, s: i64, k: i64) -> S {
        if j < 0 || j > 2 * i64::from(m) {
            return S::from_i64(0);
        }
        if m == 0 {
            return S::from_i64(1);
        }
        if let Some(v) = self.c_hat.get(&(j, m, s, k)) {
            return v.clone();
        }
        let off = 2 * s + 2 * k + 2;
        let v = sq(self.a(off)) * self.c_hat_shifted(j - 2, m - 1, s + 2, k)
            + self.d(off) * self.c_hat_shifted(j - 1, m - 1, s + 1, k + 1)
            + self.c_hat_shifted(j, m - 1, s, k + 2);
        self.c_hat.insert((j, m, s, k), v.clone());
        v
    }

    /// `Ĉ_{j,m,α,k}`.
    pub fn c_hat(&mut self, j: i64, m: u32, k: i64) -> S {
        self.c_hat_shifted(j, m, 0, k)
    }

    /// `C̃_{j,m,α} = Ĉ_{j,m,α,0} + ((n-2-α)/2)² C_{j-1,m,α+2}`.
    pub fn c_tilde(&mut self, j: i64, m: u32) -> S {
        let c = (S::from_i64(i64::from(self.n) - 2) - self.alpha.clone()) / S::from_i64(2);
        let mut shifted = Coefficients::new(self.n, self.alpha_plus(2));
        self.c_hat(j, m, 0) + sq(c) * shifted.c(j - 1, m)
    }

    /// Table of one coefficient kind for `m = 1..=m_max`.
    pub fn table(&mut self, kind: CoefficientKind, m_max: u32) -> CoefficientTable {
        let mut entries = Vec::new();
        for m in 1..=m_max {
            for j in 0..=2 * i64::from(m) {
                let v = match kind {
                    CoefficientKind::C => self.c(j, m),
                    CoefficientKind::CHat => self.c_hat(j, m, 0),
                    CoefficientKind::CTilde => self.c_tilde(j, m),
                };
                entries.push(TableEntry { j, m, value: v.to_f64(), exact: v.to_exact_string() });
            }
        }
        CoefficientTable { n: self.n, alpha: self.alpha.to_f64(), kind, entries }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    C,
    CHat,
    CTilde,
}

impl fmt::Display for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::C => "C",
            Self::CHat => "C_hat",
            Self::CTilde => "C_tilde",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub j: i64,
    pub m: u32,
    pub value: f64,
    pub exact: String,
}

/// Coefficient values at fixed `(n, α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub n: u32,
    pub alpha: f64,
    pub kind: CoefficientKind,
    pub entries: Vec<TableEntry>,
}

impl CoefficientTable {
    pub fn get(&self, j: i64, m: u32) -> f64 {
        self.entries
            .iter()
            .find(|e| e.j == j && e.m == m)
            .map_or(0.0, |e| e.value)
    }

    pub fn all_positive(&self) -> bool {
        self.entries.iter().all(|e| e.value > 0.0)
    }
}

/// One row of the flat export written by the `coefficients` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRow {
    pub name: String,
    pub n: u32,
    pub alpha: f64,
    pub j: Option<i64>,
    pub m: Option<i64>,
    pub value: f64,
    pub exact: String,
}

/// `A`, `D`, `H`, `C`, `Ĉ` and `C̃` rows at `(n, α)` up to order `m_max`.
///
/// Uses rational arithmetic, so `exact` holds reduced fractions.
pub fn export_rows(n: u32, alpha: f64, m_max: u32) -> Vec<ExportRow> {
    let mut co = Coefficients::new(n, rational(alpha));
    let mut rows = Vec::new();
    let mut push = |name: &str, j: Option<i64>, m: Option<i64>, v: BigRational| {
        rows.push(ExportRow {
            name: name.to_owned(),
            n,
            alpha,
            j,
            m,
            value: Scalar::to_f64(&v),
            exact: v.to_exact_string(),
        });
    };
    for l in 0..2 * i64::from(m_max) {
        push("A", Some(2 * l), None, co.a(2 * l));
        push("D", Some(2 * l), None, co.d(2 * l));
    }
    for k in -1..i64::from(m_max) {
        push("H", None, Some(k), co.h(k));
    }
    for kind in [CoefficientKind::C, CoefficientKind::CHat, CoefficientKind::CTilde] {
        for m in 1..=m_max {
            for j in 0..=2 * i64::from(m) {
                let v = match kind {
                    CoefficientKind::C => co.c(j, m),
                    CoefficientKind::CHat => co.c_hat(j, m, 0),
                    CoefficientKind::CTilde => co.c_tilde(j, m),
                };
                push(&kind.to_string(), Some(j), Some(i64::from(m)), v);
            }
        }
    }
    rows
}

/// CSV text of [`export_rows`]. `A`/`D` rows carry the weight offset in `j`.
pub fn export_csv(rows: &[ExportRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Range predicates of the inequality statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeId {
    /// `|α+2| ≤ √(n²-2n+2)`.
    Rellich,
    /// `|α+2| ≤ 2√(n²-2n+2)`, as printed in the introduction.
    RellichIntroVariant,
    /// `|3α+n+4| ≤ 2√(n²-n+1)`.
    GradRellich,
    /// `-n ≤ α ≤ (n³-9n²+25n-24)/(3n²-11n+11)`, `n ≥ 3`.
    Tz2c,
    /// `(α+2)² ≤ n-1`: the remainder of the two-form inequality is
    /// nonnegative mode by mode.
    Tz1,
}

impl RangeId {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "rellich" => Self::Rellich,
            "rellich_intro_variant" => Self::RellichIntroVariant,
            "grad_rellich" => Self::GradRellich,
            "tz2c" => Self::Tz2c,
            "tz1" => Self::Tz1,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Rellich => "rellich",
            Self::RellichIntroVariant => "rellich_intro_variant",
            Self::GradRellich => "grad_rellich",
            Self::Tz2c => "tz2c",
            Self::Tz1 => "tz1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RangeError {
    #[error("the tz2c range needs n ≥ 3, got n = {n}")]
    DimensionTooSmall { n: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeVerdict {
    pub id: RangeId,
    pub n: u32,
    pub alpha: f64,
    pub holds: bool,
    /// `[lower, upper]` on `α`.
    pub bounds: [f64; 2],
}

/// Evaluates a range predicate exactly (squares compared in rational
/// arithmetic, so boundary points are classified correctly).
///
/// ```
/// use hardy_rellich::coefficients::{range_check, RangeId};
/// assert!(range_check(RangeId::Rellich, 5, 0.0).unwrap().holds);
/// assert!(!range_check(RangeId::Tz2c, 3, 0.0).unwrap().holds);
/// assert!(range_check(RangeId::Tz2c, 3, -1.0).unwrap().holds);
/// ```
pub fn range_check(id: RangeId, n: u32, alpha: f64) -> Result<RangeVerdict, RangeError> {
    let a = rational(alpha);
    let nr = BigRational::from_i64(i64::from(n));
    let nf = f64::from(n);
    let (holds, bounds) = match id {
        RangeId::Rellich | RangeId::RellichIntroVariant => {
            let scale: i32 = if id == RangeId::Rellich { 1 } else { 4 };
            let rhs = (nr.clone() * nr.clone() - BigRational::from_i64(2) * nr + BigRational::from_i64(2))
                * BigRational::from_i64(i64::from(scale));
            let radius = (f64::from(scale) * (nf * nf - 2.0 * nf + 2.0)).sqrt();
            (sq(a + BigRational::from_i64(2)) <= rhs, [-2.0 - radius, -2.0 + radius])
        }
        RangeId::GradRellich => {
            let lhs = sq(BigRational::from_i64(3) * a + nr.clone() + BigRational::from_i64(4));
            let rhs = BigRational::from_i64(4) * (nr.clone() * nr.clone() - nr + BigRational::from_i64(1));
            let radius = 2.0 * (nf * nf - nf + 1.0).sqrt();
            (lhs <= rhs, [(-nf - 4.0 - radius) / 3.0, (-nf - 4.0 + radius) / 3.0])
        }
        RangeId::Tz1 => {
            let rhs = nr - BigRational::from_i64(1);
            let radius = (nf - 1.0).max(0.0).sqrt();
            (sq(a + BigRational::from_i64(2)) <= rhs, [-2.0 - radius, -2.0 + radius])
        }
        RangeId::Tz2c => {
            if n < 3 {
                return Err(RangeError::DimensionTooSmall { n });
            }
            let upper = tz2c_upper(n);
            let lower = -nr;
            (lower <= a && a <= upper, [-nf, Scalar::to_f64(&upper)])
        }
    };
    Ok(RangeVerdict { id, n, alpha, holds, bounds })
}

/// `(n³-9n²+25n-24)/(3n²-11n+11)`.
pub fn tz2c_upper(n: u32) -> BigRational {
    let n = i64::from(n);
    BigRational::new(
        BigInt::from(n * n * n - 9 * n * n + 25 * n - 24),
        BigInt::from(3 * n * n - 11 * n + 11),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Signed, Zero};

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    #[test]
    fn a_and_d() {
        assert_eq!(a_const(5, &q(0, 1)), q(5, 4));
        assert_eq!(d_const(5, &q(0, 1)), q(13, 2));
        for n in 1..12 {
            let nn = i64::from(n);
            assert!(a_const(n, &q(nn - 4, 1)).is_zero());
            assert!(a_const(n, &q(-nn, 1)).is_zero());
            assert_eq!(d_const(n, &q(-nn, 1)), q((nn - 2) * (nn - 2), 1));
        }
    }

    #[test]
    fn c_boundary_values() {
        let mut co = Coefficients::new(7, q(1, 3));
        for m in 0..6 {
            assert_eq!(co.c(0, m), BigRational::from_i64(1));
            assert!(co.c(-1, m).is_zero());
            assert!(co.c(2 * i64::from(m) + 1, m).is_zero());
        }
        assert_eq!(co.c(1, 1), co.d(0));
        assert_eq!(co.c(2, 1), sq(co.a(0)));
    }

    #[test]
    fn c_two_two_expansion() {
        for (n, alpha) in [(3, q(0, 1)), (5, q(-2, 1)), (8, q(5, 2))] {
            let mut co = Coefficients::new(n, alpha);
            let expect = sq(co.a(4)) + co.d(4) * co.d(0) + sq(co.a(0));
            assert_eq!(co.c(2, 2), expect);
        }
    }

    #[test]
    fn h_values() {
        let co = Coefficients::new(5, q(0, 1));
        assert_eq!(co.h(-1), BigRational::from_i64(1));
        assert_eq!(co.h(0), q(25, 16));
        let mut co = Coefficients::new(6, q(-1, 2));
        for k in -1..5 {
            assert_eq!(co.h(k), co.c(2 * k + 2, u32::try_from(k + 1).unwrap()));
        }
    }

    #[test]
    fn c_hat_conventions() {
        let mut co = Coefficients::new(5, 0.5f64);
        for k in 0..4 {
            assert_eq!(co.c_hat(0, 0, k), 1.0);
        }
        assert_eq!(co.c_tilde(0, 3), co.c_hat(0, 3, 0));
        // m = 1: coefficients of the three-term R-expansion
        assert_eq!(co.c_hat(1, 1, 1), co.d(4));
        assert_eq!(co.c_hat(2, 1, 1), sq(co.a(4)));
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_halfint(0), 1.0);
        assert_eq!(gamma_halfint(1), 0.5);
        assert_eq!(gamma_halfint(2), 0.75);
        assert_eq!(gamma_halfint(3), 15.0 / 8.0);
    }

    #[test]
    fn power_rule() {
        assert!(power_rule_constant(5, &-3.0, 1).abs() == 0.0);
        assert_eq!(power_rule_constant(7, &2.5, 1), -2.5 * (2.5 + 5.0));
        assert_eq!(power_rule_constant(5, &-1.5, 1), 2.25);
        for k in 1..5 {
            let next = power_rule_constant(6, &q(3, 7), k + 1);
            let s = q(3, 7) - q(2 * i64::from(k), 1);
            let step = -(s.clone() * (s + q(4, 1)));
            assert_eq!(next, power_rule_constant(6, &q(3, 7), k) * step);
        }
    }

    #[test]
    fn range_examples() {
        assert!(range_check(RangeId::Rellich, 5, 0.0).unwrap().holds);
        assert!(range_check(RangeId::GradRellich, 5, 0.0).unwrap().holds);
        let v = range_check(RangeId::Tz2c, 3, 0.0).unwrap();
        assert!(!v.holds);
        assert_eq!(v.bounds[1], -0.6);
        assert!(range_check(RangeId::Tz2c, 3, -1.0).unwrap().holds);
        assert!(range_check(RangeId::Tz2c, 2, 0.0).is_err());
        assert!(range_check(RangeId::RellichIntroVariant, 3, 2.0).unwrap().holds);
        assert!(!range_check(RangeId::Rellich, 3, 2.0).unwrap().holds);
    }

    #[test]
    fn rellich_range_matches_a_criterion() {
        for n in 1..12u32 {
            for num in -80..80 {
                let alpha = f64::from(num) / 4.0;
                let verdict = range_check(RangeId::Rellich, n, alpha).unwrap().holds;
                let crit = BigRational::from_i64(2) * a_const(n, &rational(alpha))
                    + BigRational::from_i64(i64::from(n) - 1);
                assert_eq!(verdict, !crit.is_negative(), "n={n} α={alpha}");
            }
        }
    }

    #[test]
    fn csv_export_has_all_kinds() {
        let csv = export_csv(&export_rows(5, 0.0, 3)).unwrap();
        assert!(csv.starts_with("name,n,alpha,j,m,value,exact"));
        for tag in ["\nA,", "\nD,", "\nH,", "\nC,", "\nC_hat,", "\nC_tilde,"] {
            assert!(csv.contains(tag), "{tag}");
        }
        assert!(csv.contains("\nH,5,0.0,,0,1.5625,25/16"));
    }
}
