//! Identities with weights `|x|^α |ln|x||^b`.
//!
//! Test profiles must live on one side of `r = 1`, where `|ln r|` is a
//! fixed-sign multiple of `ln r` and negative powers stay in the term algebra.

use crate::coefficients::{a_const, d_const, gamma_halfint, range_check, RangeId};
use crate::modes::{apply_delta_r_mode, apply_g, apply_r, apply_t, Mode, ModeFunction};
use crate::quadrature::integrate_scaled;
use crate::radial::{PiecewiseRadial, RadialError};
use crate::report::{CheckKind, Params, ResidualReport, Terms};

use super::{nsq, IdentityError, IDENTITY_TOL};

/// Tolerance once a quadrature-backed term enters.
pub const QUADRATURE_TOL: f64 = 1e-8;

/// Largest chain length accepted by [`check_hr34`].
pub const MAX_LOG_K: u32 = 3;

/// `‖|ln r|^q g‖²_β` for an integer `q`, in closed form.
fn log_nsq(g: &PiecewiseRadial, q: i32, beta: f64, n: u32) -> Result<f64, RadialError> {
    Ok(nsq(&g.mul_abs_log(q)?, beta, n))
}

/// `‖|ln r|^b g‖²_β` for a real `b`, by adaptive quadrature on each piece.
fn log_nsq_quadrature(g: &PiecewiseRadial, b: f64, beta: f64, n: u32) -> f64 {
    let power = f64::from(n) - 1.0 - beta;
    g.pieces()
        .iter()
        .map(|p| {
            let piece = PiecewiseRadial::single(p.a, p.b, p.body.clone()).expect("piece is valid");
            let integrand = |r: f64| {
                let v = piece.eval(r);
                v * v * r.ln().abs().powf(2.0 * b) * r.powf(power)
            };
            integrate_scaled(integrand, p.a, p.b, 1e-13).map_or(f64::NAN, |q| q.value)
        })
        .sum()
}

fn require_one_side(f: &PiecewiseRadial) -> Result<(), IdentityError> {
    if let Some(p) = f.pieces().iter().find(|p| !(p.b < 1.0 || p.a > 1.0)) {
        return Err(RadialError::StraddlesOne { a: p.a, b: p.b }.into());
    }
    Ok(())
}

/// `‖|ln r|^b T_α f‖²_α = (2b-1)²/4 ‖|ln r|^{b-1} f‖²_{α+2} + ‖|ln r|^b G_{α,b} f‖²_α`.
///
/// Integer `b` is exact; other `b` go through quadrature and the looser
/// tolerance.
pub fn check_hr32(n: u32, alpha: f64, b: f64, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    require_one_side(f)?;
    let t = apply_t(alpha, n, f);
    let g = apply_g(alpha, b, n, f)?;
    let c = (2.0 * b - 1.0).powi(2) / 4.0;
    let params = Params::new().n(n).alpha(alpha).extra("b", b);
    let report = if b.fract() == 0.0 && b.abs() < 64.0 {
        let q = b as i32;
        let lhs = log_nsq(&t, q, alpha, n)?;
        let terms = Terms::new()
            .with("(2b-1)^2/4*|ln^{b-1} f|^2_{a+2}", c * log_nsq(f, q - 1, alpha + 2.0, n)?)
            .with("|ln^b G_{a,b} f|^2_a", log_nsq(&g, q, alpha, n)?);
        ResidualReport::identity("HR32", params, lhs, terms, IDENTITY_TOL)
    } else {
        let lhs = log_nsq_quadrature(&t, b, alpha, n);
        let terms = Terms::new()
            .with("(2b-1)^2/4*|ln^{b-1} f|^2_{a+2}", c * log_nsq_quadrature(f, b - 1.0, alpha + 2.0, n))
            .with("|ln^b G_{a,b} f|^2_a", log_nsq_quadrature(&g, b, alpha, n));
        ResidualReport::identity("HR32", params, lhs, terms, QUADRATURE_TOL)
    };
    Ok(report.check_finite())
}

/// `‖R_{γ,k} f‖²_γ` expanded into `G`-chains with the weights `γ_j²`.
pub fn check_hr34(n: u32, gamma: f64, k: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    require_one_side(f)?;
    if k == 0 || k > MAX_LOG_K {
        return Err(IdentityError::DepthGuard { m: k, max: MAX_LOG_K });
    }
    let ki = k as i32;
    let lhs = nsq(&apply_r(gamma, k, n, f), gamma, n);
    let mut terms = Terms::new();
    let g_top = gamma_halfint(k + 1);
    terms.push(
        format!("g{}^2*|ln^-{} f|^2", k + 1, k + 1),
        g_top * g_top * log_nsq(f, -ki - 1, gamma + 2.0 * f64::from(k) + 2.0, n)?,
    );
    let gk = gamma_halfint(k);
    let base = gamma + 2.0 * f64::from(k);
    terms.push(
        format!("g{k}^2*|ln^-{k} G f|^2"),
        gk * gk * log_nsq(&apply_g(base, -f64::from(k), n, f)?, -ki, base, n)?,
    );
    for j in 0..k {
        let gj = gamma_halfint(j);
        let beta = gamma + 2.0 * f64::from(j);
        let inner = apply_r(beta + 2.0, k - j - 1, n, f);
        let chain = apply_g(beta, -f64::from(j), n, &inner)?;
        terms.push(format!("g{j}^2*|ln^-{j} G R f|^2"), gj * gj * log_nsq(&chain, -(j as i32), beta, n)?);
    }
    let params = Params::new().n(n).alpha(gamma).k(k);
    Ok(ResidualReport::identity("HR34", params, lhs, terms, IDENTITY_TOL))
}

/// Log-weight expansion of `‖Δu‖²_α` for `u = f Y_ℓ`.
pub fn check_hrln2a(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    require_one_side(f)?;
    let mode = Mode::new(n, ell)?;
    let a = a_const(n, &alpha);
    let d = d_const(n, &alpha);
    let lhs = nsq(&apply_delta_r_mode(mode, f), alpha, n);
    let mut terms = Terms::new()
        .with("A^2*|u|^2_{a+4}", a * a * nsq(f, alpha + 4.0, n))
        .with("D/4*|ln^-1 u|^2_{a+4}", d / 4.0 * log_nsq(f, -1, alpha + 4.0, n)?)
        .with("9/16*|ln^-2 u|^2_{a+4}", 9.0 / 16.0 * log_nsq(f, -2, alpha + 4.0, n)?)
        .with("D*|G_{a+2,0} u|^2_{a+2}", d * nsq(&apply_g(alpha + 2.0, 0.0, n, f)?, alpha + 2.0, n))
        .with(
            "|G_{a,0} T_{a+2} u|^2_a",
            nsq(&apply_g(alpha, 0.0, n, &apply_t(alpha + 2.0, n, f))?, alpha, n),
        )
        .with(
            "1/4*|ln^-1 G_{a+2,-1} u|^2_{a+2}",
            0.25 * log_nsq(&apply_g(alpha + 2.0, -1.0, n, f)?, -1, alpha + 2.0, n)?,
        );
    push_angular(mode, alpha, f, &mut terms);
    Ok(ResidualReport::identity("HRln2a", Params::new().n(n).alpha(alpha).ell(ell), lhs, terms, IDENTITY_TOL))
}

/// The three log-weight identities for one profile: (HR32) at `b`,
/// (HR34) at `k`, and the log expansion of `‖Δu‖²_α` in the radial mode.
pub fn check_log_suite(n: u32, alpha: f64, b: f64, k: u32, f: &PiecewiseRadial) -> Result<Vec<ResidualReport>, IdentityError> {
    Ok(vec![check_hr32(n, alpha, b, f)?, check_hr34(n, alpha, k, f)?, check_hrln2a(n, alpha, 0, f)?])
}

fn push_angular(mode: Mode, alpha: f64, f: &PiecewiseRadial, terms: &mut Terms) {
    if mode.mu() == 0.0 {
        return;
    }
    let n = mode.n();
    let mu = mode.mu();
    let a = a_const(n, &alpha);
    terms.push("2A*sum|L_j u|^2_{a+2}", 2.0 * a * mu * nsq(f, alpha + 4.0, n));
    terms.push("|(D-D_r)u|^2_a", mu * mu * nsq(f, alpha + 4.0, n));
    terms.push("2*sum|T_a L_j u|^2_a", 2.0 * mu * nsq(&apply_t(alpha + 2.0, n, f), alpha + 2.0, n));
}

/// `‖Δu‖²_α ≥ (n+α)²/4 ‖∇u‖²_{α+2} + (n-4-α)²/16 ‖u/ln‖²_{α+4} + 9/16 ‖u/ln²‖²_{α+4}`
/// on the punctured unit ball, inside the `grad_rellich` range.
///
/// The exact remainder identity from the proof is checked alongside.
pub fn probe_hr21ln(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> ResidualReport {
    let params = Params::new().n(n).alpha(alpha).ell(ell);
    let id = "HR21ln";
    match range_check(RangeId::GradRellich, n, alpha) {
        Ok(v) if v.holds => {}
        _ => return ResidualReport::skipped(id, CheckKind::Inequality, params, "outside grad_rellich range"),
    }
    if f.support().is_some_and(|(_, b)| b >= 1.0) {
        return ResidualReport::skipped(id, CheckKind::Inequality, params, "support not inside the unit ball");
    }
    match hr21ln_inner(n, alpha, ell, f, params.clone()) {
        Ok(r) => r,
        Err(e) => ResidualReport::failed(id, CheckKind::Inequality, params, e.to_string()),
    }
}

fn hr21ln_inner(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial, params: Params) -> Result<ResidualReport, IdentityError> {
    let mode = Mode::new(n, ell)?;
    let u = ModeFunction::new(mode, f.clone());
    let mu = mode.mu();
    let lhs = nsq(&apply_delta_r_mode(mode, f), alpha, n);
    let c = (f64::from(n) + alpha) / 2.0;
    let e = (f64::from(n) - 4.0 - alpha).powi(2);
    let grad = crate::modes::gradient_norm_sq(&u, alpha + 2.0);
    let l1 = log_nsq(f, -1, alpha + 4.0, n)?;
    let l2 = log_nsq(f, -2, alpha + 4.0, n)?;
    let terms = Terms::new()
        .with("(n+a)^2/4*|grad u|^2_{a+2}", c * c * grad)
        .with("(n-4-a)^2/16*|ln^-1 u|^2_{a+4}", e / 16.0 * l1)
        .with("9/16*|ln^-2 u|^2_{a+4}", 9.0 / 16.0 * l2);
    // remainder identity of the proof
    let remainder = e / 16.0 * l1
        + 9.0 / 16.0 * l2
        + mu * mu * nsq(f, alpha + 4.0, n)
        + (f64::from(n) + alpha) * (f64::from(n) - 8.0 - 3.0 * alpha) / 4.0 * mu * nsq(f, alpha + 4.0, n)
        + 0.25 * log_nsq(&apply_g(alpha + 2.0, -1.0, n, f)?, -1, alpha + 2.0, n)?
        + nsq(&apply_g(alpha, 0.0, n, &apply_t(alpha + 2.0, n, f))?, alpha, n)
        + 2.0 * mu * nsq(&apply_t(alpha + 2.0, n, f), alpha + 2.0, n)
        + e / 4.0 * nsq(&apply_g(alpha + 2.0, 0.0, n, f)?, alpha + 2.0, n);
    Ok(ResidualReport::inequality("HR21ln", params, lhs, terms, 1e-10)
        .require("remainder_identity", lhs - c * c * grad, remainder, IDENTITY_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::polybump;
    use crate::report::Status;

    fn inner_bump() -> PiecewiseRadial {
        polybump((-3.0f64).exp(), (-1.0f64).exp(), 8).unwrap()
    }

    fn assert_pass(r: &ResidualReport) {
        assert_eq!(r.status, Status::Pass, "{r:#?}");
    }

    #[test]
    fn g_degenerates_to_t_at_half() {
        let f = inner_bump();
        let r = check_hr32(3, 0.0, 0.5, &f).unwrap();
        assert_eq!(r.terms.0[0].1, 0.0);
        assert_pass(&r);
    }

    #[test]
    fn hr32_integer_and_real_b() {
        let f = inner_bump();
        for n in [2, 3, 5] {
            for alpha in [-1.0, 0.0, 1.0] {
                for b in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                    assert_pass(&check_hr32(n, alpha, b, &f).unwrap());
                }
                let r = check_hr32(n, alpha, 0.3, &f).unwrap();
                assert_eq!(r.tolerance, QUADRATURE_TOL);
                assert_pass(&r);
            }
        }
    }

    #[test]
    fn hr34_chains() {
        let f = inner_bump();
        for n in [2, 3, 5] {
            for alpha in [-1.0, 0.0, 1.0] {
                for k in 1..=2 {
                    assert_pass(&check_hr34(n, alpha, k, &f).unwrap());
                }
            }
        }
    }

    #[test]
    fn hrln2a_terms_sum() {
        let f = inner_bump();
        for n in [2, 3, 5] {
            for alpha in [-1.0, 0.0, 1.0] {
                for ell in 0..3 {
                    assert_pass(&check_hrln2a(n, alpha, ell, &f).unwrap());
                }
            }
        }
    }

    #[test]
    fn outside_unit_ball_side_works_too() {
        let f = polybump(1.5, 4.0, 8).unwrap();
        assert_pass(&check_hr34(3, 0.0, 2, &f).unwrap());
    }

    #[test]
    fn straddling_rejected() {
        let f = polybump(0.5, 3.0, 6).unwrap();
        assert!(check_hr32(3, 0.0, 0.0, &f).is_err());
        assert!(check_hrln2a(3, 0.0, 0, &f).is_err());
    }

    #[test]
    fn theorem_probe_and_gate() {
        let f = inner_bump();
        for n in [2, 3, 5] {
            for alpha in [-1.0, 0.0, 1.0] {
                for ell in 0..3 {
                    let r = probe_hr21ln(n, alpha, ell, &f);
                    let inside = range_check(RangeId::GradRellich, n, alpha).unwrap().holds;
                    if inside {
                        assert_pass(&r);
                    } else {
                        assert_eq!(r.status, Status::Skipped);
                    }
                }
            }
        }
    }
}
