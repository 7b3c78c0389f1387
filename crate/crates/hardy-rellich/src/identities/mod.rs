//! Residual checks for the Euclidean identities.
//!
//! Every check reduces `u = f(r) Y_ℓ` to radial integrals and reports
//! `lhs` (one norm) against `rhs` (a sum of named terms). Norm subscripts
//! follow `‖g‖²_β = ∫ g² r^{n-1-β} dr`.

pub mod inequalities;
pub mod log;

use num_rational::BigRational;

use crate::coefficients::{a_const, d_const, rational, Coefficients, Scalar};
use crate::modes::{
    angular_defect_norm_sq, angular_sum_lj_norm_sq, angular_sum_t_of_lj_norm_sq, apply_delta_power,
    apply_delta_r, apply_delta_r_mode, apply_r, apply_t, gradient_norm_sq, Mode, ModeFunction,
};
use crate::radial::{weighted_inner, weighted_norm_sq, PiecewiseRadial};
use crate::report::{relative_gap, Params, ResidualReport, Terms};

/// Default relative tolerance for closed-form identity checks.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Depth guard for radial polyharmonic identities.
pub const MAX_RADIAL_M: u32 = 4;

/// Depth guard for full polyharmonic identities.
pub const MAX_FULL_M: u32 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IdentityError {
    #[error("order m = {m} exceeds the composition depth guard {max}")]
    DepthGuard { m: u32, max: u32 },
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error(transparent)]
    Mode(#[from] crate::modes::ModeError),
    #[error(transparent)]
    Radial(#[from] crate::radial::RadialError),
}

pub(crate) fn nsq(f: &PiecewiseRadial, beta: f64, n: u32) -> f64 {
    weighted_norm_sq(f, beta, n)
}

/// `(n-2-α)/2`.
pub(crate) fn hardy_shift(n: u32, alpha: f64) -> f64 {
    (f64::from(n) - 2.0 - alpha) / 2.0
}

fn coefficients(n: u32, alpha: f64) -> Coefficients<BigRational> {
    Coefficients::new(n, rational(alpha))
}

fn radial_params(n: u32, alpha: f64) -> Params {
    Params::new().n(n).alpha(alpha)
}

/// `‖f'‖²_α = ((n-2-α)/2)² ‖f‖²_{α+2} + ‖T_α f‖²_α`.
pub fn check_hardy_radial(n: u32, alpha: f64, f: &PiecewiseRadial) -> ResidualReport {
    let c = hardy_shift(n, alpha);
    let lhs = nsq(&f.differentiate(), alpha, n);
    let terms = Terms::new()
        .with("c2*|f|^2_{a+2}", c * c * nsq(f, alpha + 2.0, n))
        .with("|T_a f|^2_a", nsq(&apply_t(alpha, n, f), alpha, n));
    ResidualReport::identity("rHR1a", radial_params(n, alpha), lhs, terms, IDENTITY_TOL)
}

/// `‖∇u‖²_α = ((n-2-α)/2)² ‖u‖²_{α+2} + ‖∇(r^{(n-2-α)/2} u)‖²_{n-2}`.
pub fn check_hardy_full(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    let mode = Mode::new(n, ell)?;
    let c = hardy_shift(n, alpha);
    let u = ModeFunction::new(mode, f.clone());
    let h = ModeFunction::new(mode, f.mul_power(c));
    let grad_h = gradient_norm_sq(&h, f64::from(n) - 2.0);
    let lhs = gradient_norm_sq(&u, alpha);
    let terms = Terms::new()
        .with("c2*|u|^2_{a+2}", c * c * nsq(f, alpha + 2.0, n))
        .with("|grad h|^2_{n-2}", grad_h);
    // the same term through the scaling rule: ‖T_α f‖²_α + μ‖f‖²_{α+2}
    let direct = nsq(&apply_t(alpha, n, f), alpha, n) + angular_sum_lj_norm_sq(&u, alpha);
    Ok(ResidualReport::identity("HR1a", radial_params(n, alpha).ell(ell), lhs, terms, IDENTITY_TOL)
        .require("h_form_vs_direct", grad_h, direct, IDENTITY_TOL))
}

/// `‖T_β f‖²_α = ‖T_α f‖²_α + (β-α)²/4 ‖f‖²_{α+2}`.
pub fn check_t0(n: u32, alpha: f64, beta: f64, f: &PiecewiseRadial) -> ResidualReport {
    let lhs = nsq(&apply_t(beta, n, f), alpha, n);
    let terms = Terms::new()
        .with("|T_a f|^2_a", nsq(&apply_t(alpha, n, f), alpha, n))
        .with("(b-a)^2/4*|f|^2_{a+2}", (beta - alpha).powi(2) / 4.0 * nsq(f, alpha + 2.0, n));
    ResidualReport::identity("T0", radial_params(n, alpha).extra("beta", beta), lhs, terms, IDENTITY_TOL)
}

/// `‖T_β(r^σ f)‖²_α = ‖T_{β-2σ} f‖²_{α-2σ}`.
pub fn check_new_t1(n: u32, alpha: f64, beta: f64, sigma: f64, f: &PiecewiseRadial) -> ResidualReport {
    let lhs = nsq(&apply_t(beta, n, &f.mul_power(sigma)), alpha, n);
    let terms = Terms::new().with(
        "|T_{b-2s} f|^2_{a-2s}",
        nsq(&apply_t(beta - 2.0 * sigma, n, f), alpha - 2.0 * sigma, n),
    );
    let params = radial_params(n, alpha).extra("beta", beta).extra("sigma", sigma);
    ResidualReport::identity("newT1", params, lhs, terms, IDENTITY_TOL)
}

/// `⟨T_α f', T_{α+2} f⟩_{α+1} = (4+α-n)/2 ‖T_{α+2} f‖²_{α+2}`.
pub fn check_new_t2(n: u32, alpha: f64, f: &PiecewiseRadial) -> ResidualReport {
    let t2 = apply_t(alpha + 2.0, n, f);
    let lhs = weighted_inner(&apply_t(alpha, n, &f.differentiate()), &t2, alpha + 1.0, n);
    let coeff = (4.0 + alpha - f64::from(n)) / 2.0;
    let terms = Terms::new().with("(4+a-n)/2*|T_{a+2} f|^2_{a+2}", coeff * nsq(&t2, alpha + 2.0, n));
    let scale = (nsq(&apply_t(alpha, n, &f.differentiate()), alpha, n) * nsq(&t2, alpha + 2.0, n)).sqrt();
    ResidualReport::identity("newT2", radial_params(n, alpha), lhs, terms, IDENTITY_TOL).with_scale(scale)
}

/// `‖R_{α,k} f'‖²_α = (n-2k-4-α)²/4 ‖R_{α+2,k} f‖²_{α+2} + ‖R_{α,k+1} f‖²_α`.
pub fn check_ka(n: u32, alpha: f64, k: u32, f: &PiecewiseRadial) -> ResidualReport {
    let lhs = nsq(&apply_r(alpha, k, n, &f.differentiate()), alpha, n);
    let c = (f64::from(n) - 2.0 * f64::from(k) - 4.0 - alpha) / 2.0;
    let terms = Terms::new()
        .with("c2*|R_{a+2,k} f|^2_{a+2}", c * c * nsq(&apply_r(alpha + 2.0, k, n, f), alpha + 2.0, n))
        .with("|R_{a,k+1} f|^2_a", nsq(&apply_r(alpha, k + 1, n, f), alpha, n));
    ResidualReport::identity("kA", radial_params(n, alpha).k(k), lhs, terms, IDENTITY_TOL)
}

/// `⟨R_{α,k} f', R_{α+2,k} f⟩_{α+1} = (α+2k+4-n)/2 ‖R_{α+2,k} f‖²_{α+2}`.
pub fn check_kb(n: u32, alpha: f64, k: u32, f: &PiecewiseRadial) -> ResidualReport {
    let inner = apply_r(alpha + 2.0, k, n, f);
    let lhs = weighted_inner(&apply_r(alpha, k, n, &f.differentiate()), &inner, alpha + 1.0, n);
    let c = (alpha + 2.0 * f64::from(k) + 4.0 - f64::from(n)) / 2.0;
    let terms = Terms::new().with("c*|R_{a+2,k} f|^2_{a+2}", c * nsq(&inner, alpha + 2.0, n));
    let scale = (nsq(&apply_r(alpha, k, n, &f.differentiate()), alpha, n) * nsq(&inner, alpha + 2.0, n)).sqrt();
    ResidualReport::identity("kB", radial_params(n, alpha).k(k), lhs, terms, IDENTITY_TOL).with_scale(scale)
}

/// `R_{α,k}(r^β f) = r^β R_{α-2β,k} f` as functions.
///
/// Reports both squared norms at weight `α`; the residual is the larger of
/// the norm gap and `‖X - Y‖²/(‖X‖² + ‖Y‖²)`.
pub fn check_new_r1(n: u32, alpha: f64, beta: f64, k: u32, f: &PiecewiseRadial) -> ResidualReport {
    let x = apply_r(alpha, k, n, &f.mul_power(beta));
    let y = apply_r(alpha - 2.0 * beta, k, n, f).mul_power(beta);
    let nx = nsq(&x, alpha, n);
    let ny = nsq(&y, alpha, n);
    let diff = nsq(&x.sub(&y), alpha, n);
    let mut r = ResidualReport::identity(
        "newR1",
        radial_params(n, alpha).k(k).extra("beta", beta),
        nx,
        Terms::new().with("|r^b R_{a-2b,k} f|^2_a", ny),
        IDENTITY_TOL,
    );
    let pointwise = diff / (nx + ny + f64::MIN_POSITIVE);
    r.rel_residual = r.rel_residual.max(pointwise);
    r = r.with_diagnostic("difference_norm_ratio", pointwise);
    r.retolerance(IDENTITY_TOL)
}

/// `‖R_{α,k} Δ_r f‖²_α = A²_{α+2k+2} ‖R_{α+4,k} f‖²_{α+4} + D_{α+2k+2} ‖R_{α+2,k+1} f‖²_{α+2} + ‖R_{α,k+2} f‖²_α`.
pub fn check_ite_rak(n: u32, alpha: f64, k: u32, f: &PiecewiseRadial) -> ResidualReport {
    let lhs = nsq(&apply_r(alpha, k, n, &apply_delta_r(n, f)), alpha, n);
    let beta = alpha + 2.0 * f64::from(k) + 2.0;
    let a = a_const(n, &beta);
    let terms = Terms::new()
        .with("A^2*|R_{a+4,k} f|^2_{a+4}", a * a * nsq(&apply_r(alpha + 4.0, k, n, f), alpha + 4.0, n))
        .with("D*|R_{a+2,k+1} f|^2_{a+2}", d_const(n, &beta) * nsq(&apply_r(alpha + 2.0, k + 1, n, f), alpha + 2.0, n))
        .with("|R_{a,k+2} f|^2_a", nsq(&apply_r(alpha, k + 2, n, f), alpha, n));
    ResidualReport::identity("iteRak", radial_params(n, alpha).k(k), lhs, terms, IDENTITY_TOL)
}

/// `‖Δ_r f‖²_α = (n+α)²/4 ‖f'‖²_{α+2} + ‖T_α f'‖²_α`.
pub fn check_hr13(n: u32, alpha: f64, f: &PiecewiseRadial) -> ResidualReport {
    let d = f.differentiate();
    let lhs = nsq(&apply_delta_r(n, f), alpha, n);
    let c = (f64::from(n) + alpha) / 2.0;
    let terms = Terms::new()
        .with("(n+a)^2/4*|f'|^2_{a+2}", c * c * nsq(&d, alpha + 2.0, n))
        .with("|T_a f'|^2_a", nsq(&apply_t(alpha, n, &d), alpha, n));
    ResidualReport::identity("HR13", radial_params(n, alpha), lhs, terms, IDENTITY_TOL)
}

/// The three radial terms of `‖Δ_r g‖²_β` at weight offset `β`.
fn rhr2a_terms(n: u32, beta: f64, g: &PiecewiseRadial, prefix: &str, scale: f64, terms: &mut Terms) {
    let a = a_const(n, &beta);
    terms.push(format!("{prefix}A^2*|g|^2_{{b+4}}"), scale * a * a * nsq(g, beta + 4.0, n));
    terms.push(
        format!("{prefix}D*|T_{{b+2}} g|^2_{{b+2}}"),
        scale * d_const(n, &beta) * nsq(&apply_t(beta + 2.0, n, g), beta + 2.0, n),
    );
    terms.push(format!("{prefix}|R_{{b,1}} g|^2_b"), scale * nsq(&apply_r(beta, 1, n, g), beta, n));
}

/// `‖Δ_r f‖²_α = A²_α ‖f‖²_{α+4} + D_α ‖T_{α+2} f‖²_{α+2} + ‖R_{α,1} f‖²_α`.
pub fn check_rhr2a(n: u32, alpha: f64, f: &PiecewiseRadial) -> ResidualReport {
    let lhs = nsq(&apply_delta_r(n, f), alpha, n);
    let mut terms = Terms::new();
    rhr2a_terms(n, alpha, f, "", 1.0, &mut terms);
    ResidualReport::identity("rHR2a", radial_params(n, alpha), lhs, terms, IDENTITY_TOL)
}

/// Angular terms of `‖Δ g‖²_β - ‖Δ_r g‖²_β` for `g` in mode `mode`.
fn angular_terms(mode: Mode, beta: f64, g: &PiecewiseRadial, prefix: &str, scale: f64, terms: &mut Terms) {
    if mode.mu() == 0.0 {
        return;
    }
    let u = ModeFunction::new(mode, g.clone());
    let a = a_const(mode.n(), &beta);
    terms.push(format!("{prefix}|(D-D_r)g|^2_b"), scale * angular_defect_norm_sq(&u, beta));
    terms.push(format!("{prefix}2A*sum|L_j g|^2_{{b+2}}"), scale * 2.0 * a * angular_sum_lj_norm_sq(&u, beta + 2.0));
    terms.push(format!("{prefix}2*sum|T_b L_j g|^2_b"), scale * 2.0 * angular_sum_t_of_lj_norm_sq(&u, beta));
}

/// `‖Δu‖²_α = ‖Δ_r u‖²_α + ‖(Δ-Δ_r)u‖²_α + 2A_α Σ‖L_j u‖²_{α+2} + 2Σ‖T_α(L_j u)‖²_α`.
pub fn check_hr2a(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    let mode = Mode::new(n, ell)?;
    let lhs = nsq(&apply_delta_r_mode(mode, f), alpha, n);
    let mut terms = Terms::new().with("|D_r u|^2_a", nsq(&apply_delta_r(n, f), alpha, n));
    angular_terms(mode, alpha, f, "", 1.0, &mut terms);
    Ok(ResidualReport::identity("HR2a", radial_params(n, alpha).ell(ell), lhs, terms, IDENTITY_TOL))
}

fn check_depth(m: u32, max: u32) -> Result<(), IdentityError> {
    if m == 0 {
        Err(IdentityError::ZeroOrder)
    } else if m > max {
        Err(IdentityError::DepthGuard { m, max })
    } else {
        Ok(())
    }
}

fn to_f64(x: &BigRational) -> f64 {
    Scalar::to_f64(x)
}

/// `‖Δ_r^m f‖²_α = ∏_{l<m} A²_{α+4l} ‖f‖²_{α+4m} + Σ_{j<2m} C_{j,m,α} ‖R_{α+2j,2m-1-j} f‖²_{α+2j}`.
pub fn check_thm_radial_poly(n: u32, alpha: f64, m: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    check_depth(m, MAX_RADIAL_M)?;
    let mut co = coefficients(n, alpha);
    let lhs = nsq(&apply_delta_power(Mode::radial(n), m, f), alpha, n);
    let mut terms = Terms::new();
    terms.push("prodA2*|f|^2_{a+4m}", to_f64(&co.a_product(0, m)) * nsq(f, alpha + 4.0 * f64::from(m), n));
    for j in 0..2 * m {
        let c = to_f64(&co.c(i64::from(j), m));
        let beta = alpha + 2.0 * f64::from(j);
        terms.push(format!("C_{j}*|R_{{a+{},{}}} f|^2", 2 * j, 2 * m - 1 - j), c * nsq(&apply_r(beta, 2 * m - 1 - j, n, f), beta, n));
    }
    Ok(ResidualReport::identity("rHRma", radial_params(n, alpha).m(m), lhs, terms, IDENTITY_TOL))
}

/// `‖(Δ_r^m f)'‖²_α` through the `C̃` coefficients; also checks the
/// expansion of `‖T_α Δ_r^m f‖²_α` through `Ĉ`.
pub fn check_prop_radial_grad(n: u32, alpha: f64, m: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    check_depth(m, MAX_RADIAL_M)?;
    let mut co = coefficients(n, alpha);
    let g = apply_delta_power(Mode::radial(n), m, f);
    let lhs = nsq(&g.differentiate(), alpha, n);
    let c = hardy_shift(n, alpha);
    let prod = to_f64(&co.a_product(2, m));
    let mut terms = Terms::new();
    terms.push("c2*prodA2*|f|^2_{a+2+4m}", c * c * prod * nsq(f, alpha + 2.0 + 4.0 * f64::from(m), n));
    let mut tma_rhs = 0.0;
    for j in 0..=2 * m {
        let beta = alpha + 2.0 * f64::from(j);
        let norm = nsq(&apply_r(beta, 2 * m - j, n, f), beta, n);
        let ct = to_f64(&co.c_tilde(i64::from(j), m));
        tma_rhs += to_f64(&co.c_hat(i64::from(j), m, 0)) * norm;
        terms.push(format!("Ct_{j}*|R_{{a+{},{}}} f|^2", 2 * j, 2 * m - j), ct * norm);
    }
    let tma_lhs = nsq(&apply_t(alpha, n, &g), alpha, n);
    Ok(ResidualReport::identity("rHRmad", radial_params(n, alpha).m(m), lhs, terms, IDENTITY_TOL)
        .require("rTma", tma_lhs, tma_rhs, IDENTITY_TOL))
}

/// `‖Δ^m u‖²_α` for `u = f Y_ℓ`, the sum over `k` of the `(HR2a)+(rHR2a)`
/// brackets of `Δ^{m-k} u` at weight `α+4k-4`, weighted by `H_{k-2}`, plus
/// `H_{m-1} ‖u‖²_{α+4m}`.
pub fn check_thm_poly(n: u32, alpha: f64, m: u32, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    check_depth(m, MAX_FULL_M)?;
    let mode = Mode::new(n, ell)?;
    let co = coefficients(n, alpha);
    let lhs = nsq(&apply_delta_power(mode, m, f), alpha, n);
    let mut terms = Terms::new();
    terms.push("H_{m-1}*|u|^2_{a+4m}", to_f64(&co.h(i64::from(m) - 1)) * nsq(f, alpha + 4.0 * f64::from(m), n));
    for k in 1..=m {
        let g = apply_delta_power(mode, m - k, f);
        let beta = alpha + 4.0 * f64::from(k) - 4.0;
        let h = to_f64(&co.h(i64::from(k) - 2));
        let prefix = format!("k{k}:");
        // the A² term of rHR2a is the next level's lhs; only D and R terms stay
        let dd = d_const(n, &beta);
        terms.push(format!("{prefix}D*|T g|^2"), h * dd * nsq(&apply_t(beta + 2.0, n, &g), beta + 2.0, n));
        terms.push(format!("{prefix}|R_1 g|^2"), h * nsq(&apply_r(beta, 1, n, &g), beta, n));
        angular_terms(mode, beta, &g, &prefix, h, &mut terms);
    }
    Ok(ResidualReport::identity("HRm", radial_params(n, alpha).m(m).ell(ell), lhs, terms, IDENTITY_TOL))
}

/// Relative gap re-exported for callers assembling custom checks.
pub fn gap(x: f64, y: f64) -> f64 {
    relative_gap(x, y)
}
