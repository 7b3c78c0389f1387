//! Rellich-type identities and inequalities on hyperbolic space.
//!
//! Functions are `u = f(ρ) Y_ℓ` with `ρ` the geodesic distance to the
//! origin and `f` compactly supported in `(0, ∞)`. Norms are taken against
//! `sh^{n-1} ρ dρ` with the sphere area dropped, and the sphere derivatives
//! reduce to `Σ_j ‖Λ_j u‖² = μ_ℓ ∫ (f/sh ρ)² sh^{n-1} ρ dρ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::families::TestFunction;
use crate::manifold::{sample_points, Integrals, ModelSpace, Slots, MANIFOLD_TOL};
use crate::modes::mu_eigenvalue;
use crate::profile::{CompactProfile, Func, ProfileExpr};
use crate::quadrature::QuadratureError;
use crate::report::{CheckKind, Params, ResidualReport, Terms};

/// Tolerance of the hyperbolic identities and inequality probes.
pub const HYPERBOLIC_TOL: f64 = MANIFOLD_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Ball radius `r` to geodesic distance `ρ`.
    RToRho,
    /// Geodesic distance `ρ` to ball radius `r`.
    RhoToR,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("{x} is outside the domain of the conversion")]
pub struct DomainError {
    pub x: f64,
}

/// `ρ = ln((1+r)/(1-r))` and its inverse `r = tanh(ρ/2)`.
///
/// ```
/// use hardy_rellich::hyperbolic::{rho_r_convert, Direction};
/// let e = std::f64::consts::E;
/// let rho = rho_r_convert((e - 1.0) / (e + 1.0), Direction::RToRho).unwrap();
/// assert!((rho - 1.0).abs() < 1e-15);
/// ```
pub fn rho_r_convert(x: f64, direction: Direction) -> Result<f64, DomainError> {
    match direction {
        Direction::RToRho if (0.0..1.0).contains(&x) => Ok(2.0 * x.atanh()),
        Direction::RhoToR if x >= 0.0 && x.is_finite() => Ok((0.5 * x).tanh()),
        _ => Err(DomainError { x }),
    }
}

/// `f'' + (n-1) coth ρ f'`.
pub fn delta_rho_h(n: u32, f: &ProfileExpr) -> ProfileExpr {
    ModelSpace::Hyperbolic(n).laplacian(f)
}

/// The named integrals of one mode function `f Y_ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypNormSet {
    pub n: u32,
    pub ell: u32,
    pub mu: f64,
    /// `‖u‖²`
    pub u: f64,
    /// `‖u/ρ‖²`
    pub u_rho: f64,
    /// `‖u/ρ²‖²`
    pub u_rho2: f64,
    /// `‖u/sh‖²`
    pub u_sh: f64,
    /// `‖u/sh²‖²`
    pub u_sh2: f64,
    /// `‖u/(ρ sh)‖²`
    pub u_rho_sh: f64,
    /// `‖∂_ρ u‖²`
    pub d_rho: f64,
    /// `‖Δ_{ρ,ℍ} u‖²`
    pub delta_rho: f64,
    /// `‖Δ_ℍ u‖²`
    pub delta_h: f64,
    /// `‖(Δ_ℍ - Δ_{ρ,ℍ}) u‖²`
    pub defect: f64,
    /// `Σ‖Λ_j u‖²`
    pub lambda: f64,
    /// `Σ‖∂_ρ Λ_j u‖²`
    pub d_lambda: f64,
    /// `Σ‖Λ_j u/sh‖²`
    pub lambda_sh: f64,
    /// `Σ‖Λ_j u/ρ‖²`
    pub lambda_rho: f64,
    /// `Σ‖coth ρ Λ_j u‖²`
    pub lambda_coth: f64,
}

impl HypNormSet {
    pub fn compute(n: u32, ell: u32, f: &CompactProfile) -> Result<Self, QuadratureError> {
        let mu = mu_eigenvalue(n, ell).unwrap_or(0.0);
        let space = ModelSpace::Hyperbolic(n);
        let rho = ProfileExpr::var();
        let sh = rho.apply(Func::Sinh);
        let coth = rho.apply(Func::Coth);
        let g = f.expr.div(&sh);
        let mut s = Slots::default();
        let iu = s.push(&f.expr);
        let idu = s.push(&f.expr.derivative(1));
        let idelta = s.push(&delta_rho_h(n, &f.expr));
        let ish = s.push(&sh);
        let icoth = s.push(&coth);
        let ig = s.push(&g);
        let idg = s.push(&g.derivative(1));
        let irho = s.push(&rho);
        let q = Integrals::new(space, &s.0, f.a, f.b);
        let u2 = |x: &[f64]| x[iu] * x[iu];
        let g2 = |x: &[f64]| x[ig] * x[ig];
        Ok(Self {
            n,
            ell,
            mu,
            u: q.integrate(u2)?,
            u_rho: q.integrate(|x| u2(x) / x[irho].powi(2))?,
            u_rho2: q.integrate(|x| u2(x) / x[irho].powi(4))?,
            u_sh: q.integrate(g2)?,
            u_sh2: q.integrate(|x| g2(x) / (x[ish] * x[ish]))?,
            u_rho_sh: q.integrate(|x| g2(x) / x[irho].powi(2))?,
            d_rho: q.integrate(|x| x[idu] * x[idu])?,
            delta_rho: q.integrate(|x| x[idelta] * x[idelta])?,
            delta_h: q.integrate(|x| (x[idelta] - mu * x[ig] / x[ish]).powi(2))?,
            defect: mu * mu * q.integrate(|x| g2(x) / (x[ish] * x[ish]))?,
            lambda: mu * q.integrate(g2)?,
            d_lambda: mu * q.integrate(|x| x[idg] * x[idg])?,
            lambda_sh: mu * q.integrate(|x| g2(x) / (x[ish] * x[ish]))?,
            lambda_rho: mu * q.integrate(|x| g2(x) / x[irho].powi(2))?,
            lambda_coth: mu * q.integrate(|x| (x[icoth] * x[ig]).powi(2))?,
        })
    }
}

fn params(n: u32, ell: u32, f: &CompactProfile) -> Params {
    Params::new().n(n).ell(ell).f(format!("H^{n}; f on [{}, {}]", f.a, f.b))
}

fn norms_or_fail(id: &str, kind: CheckKind, n: u32, ell: u32, f: &CompactProfile) -> Result<HypNormSet, ResidualReport> {
    HypNormSet::compute(n, ell, f).map_err(|e| ResidualReport::failed(id, kind, params(n, ell, f), format!("quadrature: {e}")))
}

/// `‖Δ_ℍu‖² = ‖Δ_{ρ,ℍ}u‖² + ‖(Δ_ℍ-Δ_{ρ,ℍ})u‖² + 2Σ‖∂_ρΛ_ju‖² - 2Σ‖Λ_ju‖² - 2Σ‖Λ_ju/sh‖²`.
pub fn check_identity_hr2hyper(n: u32, ell: u32, f: &CompactProfile) -> ResidualReport {
    let s = match norms_or_fail("HR2hyper", CheckKind::Identity, n, ell, f) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let terms = Terms::new()
        .with("|D_rho u|^2", s.delta_rho)
        .with("|(D_H-D_rho)u|^2", s.defect)
        .with("2*sum|d Lu|^2", 2.0 * s.d_lambda)
        .with("-2*sum|Lu|^2", -2.0 * s.lambda)
        .with("-2*sum|Lu/sh|^2", -2.0 * s.lambda_sh);
    let scale: f64 = terms.iter().map(|(_, v)| v.abs()).sum();
    ResidualReport::identity("HR2hyper", params(n, ell, f), s.delta_h, terms, HYPERBOLIC_TOL)
        .with_scale(scale)
        .check_finite()
}

/// `‖∂_ρu‖² = ¼‖u/ρ‖² + (n-1)²/4 ‖u‖² + (n-1)(n-3)/4 ‖u/sh‖²
///          + ∫|∂_ρ(u ρ^{-1/2} sh^{(n-1)/2})|² ρ dρ` for radial `u`.
pub fn check_hyp_equality(n: u32, f: &CompactProfile) -> ResidualReport {
    let s = match norms_or_fail("hyp", CheckKind::Identity, n, 0, f) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let nm1 = f64::from(n) - 1.0;
    let rho = ProfileExpr::var();
    let sh = rho.apply(Func::Sinh);
    let h = f.expr.mul(&rho.powf(-0.5)).mul(&sh.powf(nm1 / 2.0));
    // the measure ρ dρ, written against the density sh^{n-1}
    let integrand = h.derivative(1).powf(2.0).mul(&rho).div(&sh.powf(nm1));
    let q = Integrals::new(ModelSpace::Hyperbolic(n), &[integrand], f.a, f.b);
    let remainder = match q.integrate(|x| x[0]) {
        Ok(v) => v,
        Err(e) => return ResidualReport::failed("hyp", CheckKind::Identity, params(n, 0, f), format!("quadrature: {e}")),
    };
    let terms = Terms::new()
        .with("|u/rho|^2/4", 0.25 * s.u_rho)
        .with("(n-1)^2/4*|u|^2", nm1 * nm1 / 4.0 * s.u)
        .with("(n-1)(n-3)/4*|u/sh|^2", nm1 * (nm1 - 2.0) / 4.0 * s.u_sh)
        .with("remainder", remainder);
    let scale: f64 = terms.iter().map(|(_, v)| v.abs()).sum();
    ResidualReport::identity("hyp", params(n, 0, f), s.d_rho, terms, HYPERBOLIC_TOL)
        .with_scale(scale)
        .check_finite()
}

/// With `v = sh^{(n-1)/2} u`, `w = v/sh` and
/// `A = (n-1)²/4 + (n-1)(n-3)/(4 sh²)`:
///
/// ```text
/// ∫(v''² + A²v² - 2Avv'') = ∫v''² + (n-1)⁴/16 ∫v² + (n-1)²/2 ∫v'²
///     + [(n-1)²(n-3)²/16 - (n-1)(n-3)/2] ∫v²/sh⁴
///     + [(n-1)³(n-3)/8 - (n-1)(n-3)/2] ∫v²/sh²
///     + (n-1)(n-3)/2 ∫w'²
/// ```
///
/// and the left side also equals `‖Δ_{ρ,ℍ} u‖²`.
pub fn check_newhyp1(n: u32, f: &CompactProfile) -> ResidualReport {
    let p = params(n, 0, f);
    let s = match norms_or_fail("newhyp1", CheckKind::Identity, n, 0, f) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let nm1 = f64::from(n) - 1.0;
    let nm3 = nm1 - 2.0;
    let rho = ProfileExpr::var();
    let sh = rho.apply(Func::Sinh);
    let v = sh.powf(nm1 / 2.0).mul(&f.expr);
    let w = v.div(&sh);
    let a = ProfileExpr::constant(nm1 * nm1 / 4.0).add(&ProfileExpr::constant(nm1 * nm3 / 4.0).div(&sh.powf(2.0)));
    // plain dρ integrals: divide the density back out
    let density = ModelSpace::Hyperbolic(n).density();
    let mut slots = Slots::default();
    let iv = slots.push(&v);
    let idv = slots.push(&v.derivative(1));
    let id2v = slots.push(&v.derivative(2));
    let idw = slots.push(&w.derivative(1));
    let ia = slots.push(&a);
    let ish = slots.push(&sh);
    let is = slots.push(&density);
    let q = Integrals::new(ModelSpace::Hyperbolic(n), &slots.0, f.a, f.b);
    let run = || -> Result<(f64, Terms), QuadratureError> {
        let plain = |g: &dyn Fn(&[f64]) -> f64| q.integrate(|x| g(x) / x[is]);
        let lhs = plain(&|x| x[id2v].powi(2) + (x[ia] * x[iv]).powi(2) - 2.0 * x[ia] * x[iv] * x[id2v])?;
        let terms = Terms::new()
            .with("int v''^2", plain(&|x| x[id2v].powi(2))?)
            .with("(n-1)^4/16*int v^2", nm1.powi(4) / 16.0 * plain(&|x| x[iv].powi(2))?)
            .with("(n-1)^2/2*int v'^2", nm1 * nm1 / 2.0 * plain(&|x| x[idv].powi(2))?)
            .with(
                "c4*int v^2/sh^4",
                (nm1 * nm1 * nm3 * nm3 / 16.0 - nm1 * nm3 / 2.0) * plain(&|x| (x[iv] / x[ish].powi(2)).powi(2))?,
            )
            .with(
                "c2*int v^2/sh^2",
                (nm1.powi(3) * nm3 / 8.0 - nm1 * nm3 / 2.0) * plain(&|x| (x[iv] / x[ish]).powi(2))?,
            )
            .with("(n-1)(n-3)/2*int w'^2", nm1 * nm3 / 2.0 * plain(&|x| x[idw].powi(2))?);
        Ok((lhs, terms))
    };
    match run() {
        Ok((lhs, terms)) => {
            let scale: f64 = terms.iter().map(|(_, v)| v.abs()).sum();
            ResidualReport::identity("newhyp1", p, lhs, terms, HYPERBOLIC_TOL)
                .with_scale(scale)
                .require("equals_delta_rho", lhs, s.delta_rho, HYPERBOLIC_TOL)
                .check_finite()
        }
        Err(e) => ResidualReport::failed("newhyp1", CheckKind::Identity, p, format!("quadrature: {e}")),
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Coefficients of the weighted estimate, in the order
/// `‖u‖², ‖u/ρ‖², ‖u/ρ²‖², ‖u/sh²‖², ‖u/sh‖², ‖u/(ρ sh)‖²`.
pub fn hrhyper2_coefficients(n: u32) -> [BigRational; 6] {
    let n = i64::from(n);
    [
        rational((n - 1).pow(4), 16),
        rational((n - 1).pow(2), 8),
        rational(9, 16),
        rational((n * n - 1) * (n - 3) * (n - 5), 16),
        rational((n * n - 1) * (n - 3).pow(2), 8),
        rational((n - 1) * (n - 3), 8),
    ]
}

/// `(μ_ℓ², (n-1) μ_ℓ)`: the per-mode defect bound compares these.
pub fn mode_defect(n: u32, ell: u32) -> (u64, u64) {
    let mu = u64::from(ell) * (u64::from(ell) + u64::from(n) - 2);
    (mu * mu, (u64::from(n) - 1) * mu)
}

/// Smallest `sh² ρ - ρ²` over the scan points of `[a, b]`.
pub fn min_sh_sq_minus_rho_sq(a: f64, b: f64) -> f64 {
    sample_points(a, b, 256)
        .chain([a, b])
        .map(|t| t.sinh().powi(2) - t * t)
        .fold(f64::INFINITY, f64::min)
}

fn to_f64(q: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}

/// Slack probes for one mode function: both forms of the Rellich
/// inequality, the weighted estimate, the ℍ³ and ℍ⁴ displays and the defect
/// bound.
pub fn probe_one(n: u32, ell: u32, f: &CompactProfile) -> Vec<ResidualReport> {
    let p = params(n, ell, f);
    let s = match norms_or_fail("HRhyper", CheckKind::Inequality, n, ell, f) {
        Ok(s) => s,
        Err(r) => return vec![r],
    };
    let ineq = |id: &str, terms: Terms| ResidualReport::inequality(id, p.clone(), s.delta_h, terms, HYPERBOLIC_TOL).check_finite();
    let mut out = Vec::new();
    let nf = f64::from(n);
    if n >= 3 {
        let c = (nf + 1.0) * (nf - 3.0) / 2.0;
        let base = Terms::new().with("|D_rho u|^2", s.delta_rho).with("sum|Lu/rho|^2/2", 0.5 * s.lambda_rho);
        let intermediate = base.clone().with("c*(sum|Lu|^2+sum|Lu/sh|^2)", c * (s.lambda + s.lambda_sh));
        let final_form = base.with("c*sum|coth Lu|^2", c * s.lambda_coth);
        // coth² = 1 + csch², so both right sides are the same number
        let (rhs_final, rhs_intermediate) = (final_form.sum(), intermediate.sum());
        out.push(ineq("HRhyper1", final_form).require("forms_agree", rhs_final, rhs_intermediate, HYPERBOLIC_TOL));
        out.push(ineq("HRhyper1-intermediate", intermediate));
        let c6 = hrhyper2_coefficients(n).map(|q| to_f64(&q));
        let terms = Terms::new()
            .with("c1*|u|^2", c6[0] * s.u)
            .with("c2*|u/rho|^2", c6[1] * s.u_rho)
            .with("c3*|u/rho^2|^2", c6[2] * s.u_rho2)
            .with("c4*|u/sh^2|^2", c6[3] * s.u_sh2)
            .with("c5*|u/sh|^2", c6[4] * s.u_sh)
            .with("c6*|u/(rho sh)|^2", c6[5] * s.u_rho_sh);
        out.push(ineq("HRhyper2", terms));
    } else {
        for id in ["HRhyper1", "HRhyper1-intermediate", "HRhyper2"] {
            out.push(ResidualReport::skipped(id, CheckKind::Inequality, p.clone(), "requires n >= 3"));
        }
    }
    if n == 3 {
        let terms = Terms::new()
            .with("|u|^2", s.u)
            .with("|u/rho|^2/2", 0.5 * s.u_rho)
            .with("9/16*|u/rho^2|^2", 9.0 / 16.0 * s.u_rho2);
        out.push(ineq("HRhyper2-H3", terms));
    }
    if n == 4 {
        let terms = Terms::new()
            .with("81/16*|u|^2", 81.0 / 16.0 * s.u)
            .with("9/8*|u/rho|^2", 9.0 / 8.0 * s.u_rho)
            .with("15/8*|u/sh|^2", 15.0 / 8.0 * s.u_sh);
        out.push(ineq("HRhyper2-H4", terms).require_at_least("rho_le_sh", min_sh_sq_minus_rho_sq(f.a, f.b), 0.0, 0.0));
    }
    let defect = Terms::new().with("(n-1)*sum|Lu/sh|^2", (nf - 1.0) * s.lambda_sh);
    let (mu2, bound) = mode_defect(n, ell);
    out.push(
        ResidualReport::inequality("D-Drhyper", p.clone(), s.defect, defect, HYPERBOLIC_TOL)
            .with_diagnostic("mu^2-(n-1)mu", mu2 as f64 - bound as f64)
            .check_finite(),
    );
    out
}

/// Runs [`probe_one`] over every sample.
pub fn probe_hyper_inequalities(n: u32, ell: u32, samples: &[TestFunction]) -> Vec<ResidualReport> {
    samples
        .iter()
        .flat_map(|t| match CompactProfile::from_test_function(t) {
            Ok(f) => probe_one(n, ell, &f),
            Err(e) => vec![ResidualReport::failed("HRhyper", CheckKind::Inequality, Params::new().n(n).ell(ell), e.to_string())],
        })
        .collect()
}

/// Relative gap in `⟨∂_ρf, h⟩ + ⟨f, ∂_ρh⟩ + (n-1)⟨f, coth ρ h⟩ = 0`.
pub fn ipp_gap(n: u32, f: &ProfileExpr, h: &ProfileExpr, a: f64, b: f64) -> Result<f64, QuadratureError> {
    let coth = ProfileExpr::var().apply(Func::Coth);
    let exprs = [f.derivative(1), h.clone(), f.clone(), h.derivative(1), coth];
    let q = Integrals::new(ModelSpace::Hyperbolic(n), &exprs, a, b);
    let nm1 = f64::from(n) - 1.0;
    let parts = [
        q.integrate(|x| x[0] * x[1])?,
        q.integrate(|x| x[2] * x[3])?,
        nm1 * q.integrate(|x| x[2] * x[4] * x[1])?,
    ];
    let scale: f64 = parts.iter().map(|v| v.abs()).sum();
    Ok(parts.iter().sum::<f64>().abs() / scale.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::random_bumps;

    fn bump(a: f64, b: f64) -> CompactProfile {
        CompactProfile::bump(a, b, 6).unwrap()
    }

    #[test]
    fn conversions() {
        assert_eq!(rho_r_convert(0.0, Direction::RToRho).unwrap(), 0.0);
        assert!(rho_r_convert(1.0, Direction::RToRho).is_err());
        assert!(rho_r_convert(-0.5, Direction::RhoToR).is_err());
        let mut rng = crate::families::rng(5);
        for _ in 0..10 {
            let r: f64 = rand::Rng::gen_range(&mut rng, 0.0..0.99);
            let back = rho_r_convert(rho_r_convert(r, Direction::RToRho).unwrap(), Direction::RhoToR).unwrap();
            assert!((back - r).abs() <= 1e-14);
        }
    }

    #[test]
    fn laplacian_of_cosh() {
        let f = ProfileExpr::var().apply(Func::Cosh);
        let d = delta_rho_h(5, &f);
        assert!((d.eval(0.8) - 5.0 * 0.8f64.cosh()).abs() < 1e-13);
        assert!(delta_rho_h(3, &ProfileExpr::constant(1.0)).is_const(0.0));
    }

    #[test]
    fn rellich_identity_all_modes() {
        for n in 2..=5 {
            for ell in 0..=2 {
                for (a, b) in [(1.0, 2.0), (0.1, 0.6)] {
                    let r = check_identity_hr2hyper(n, ell, &bump(a, b));
                    assert!(r.passed(), "{r:#?}");
                    if ell == 0 {
                        assert_eq!(r.terms.iter().skip(1).map(|(_, v)| v.abs()).sum::<f64>(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn radial_equalities() {
        for n in [3, 5, 6] {
            for (a, b) in [(1.0, 2.0), (0.2, 1.5)] {
                let r = check_hyp_equality(n, &bump(a, b));
                assert!(r.passed(), "{r:#?}");
                let r = check_newhyp1(n, &bump(a, b));
                assert!(r.passed(), "{r:#?}");
            }
        }
        let zero = CompactProfile::new(ProfileExpr::constant(0.0), 1.0, 2.0).unwrap();
        assert!(check_newhyp1(4, &zero).passed());
    }

    #[test]
    fn coefficient_displays() {
        let c3 = hrhyper2_coefficients(3);
        assert_eq!(c3[0], rational(1, 1));
        assert_eq!(c3[1], rational(1, 2));
        assert_eq!(c3[2], rational(9, 16));
        assert!(c3[3..].iter().all(num_traits::Zero::is_zero));
        let c4 = hrhyper2_coefficients(4);
        assert_eq!(c4[0], rational(81, 16));
        assert_eq!(c4[1], rational(9, 8));
        assert_eq!(c4[4], rational(15, 8));
        // the dropped ℍ⁴ terms are nonnegative once ρ ≤ sh ρ
        assert_eq!(&c4[2] + &c4[3] + &c4[5] * rational(2, 1) - rational(3, 8), rational(0, 1));
        assert_eq!(mode_defect(7, 1).0, mode_defect(7, 1).1);
        assert!(mode_defect(7, 2).0 > mode_defect(7, 2).1);
    }

    #[test]
    fn probes_hold_on_random_bumps() {
        for n in 3..=5 {
            for ell in 0..=2 {
                let samples = random_bumps(0.3, 2.5, 6, 5, 11 + u64::from(n));
                for r in probe_hyper_inequalities(n, ell, &samples) {
                    assert!(r.passed(), "{r:#?}");
                }
            }
        }
        let skipped = probe_one(2, 1, &bump(1.0, 2.0));
        assert_eq!(skipped[0].status, crate::report::Status::Skipped);
    }

    #[test]
    fn integration_by_parts() {
        let f = ProfileExpr::polybump(0.5, 2.0, 4);
        let h = ProfileExpr::polybump(0.5, 2.0, 3).mul(&ProfileExpr::var().apply(Func::Cosh));
        for n in 2..=6 {
            assert!(ipp_gap(n, &f, &h, 0.5, 2.0).unwrap() < 1e-9);
        }
    }
}
