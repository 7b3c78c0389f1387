//! Inequality probes: each case reports `lhs - rhs` and passes when the
//! normalized slack stays above `-INEQUALITY_TOL`.
//!
//! Probes whose statement carries a parameter range skip cases outside it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coefficients::{a_const, d_const, range_check, RangeId};
use crate::families::TestFunction;
use crate::modes::{apply_delta_power, apply_delta_r, apply_delta_r_mode, apply_r, apply_t, gradient_norm_sq, Mode, ModeFunction};
use crate::radial::PiecewiseRadial;
use crate::report::{CheckKind, Params, ResidualReport, Terms};

use super::{coefficients, log, nsq, IdentityError, IDENTITY_TOL};

/// Slack floor of inequality probes.
pub const INEQUALITY_TOL: f64 = 1e-10;

/// Modes sampled by probes of full-space statements.
pub const PROBE_ELLS: [u32; 3] = [0, 1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InequalityId {
    Hr21r,
    IneHr2ma { m: u32 },
    IneHr2m1 { m: u32 },
    LrL,
    SphereGap,
    Tz1,
    Tz2,
    Hr21ln,
}

impl InequalityId {
    pub const ALL: [InequalityId; 8] = [
        Self::Hr21r,
        Self::IneHr2ma { m: 1 },
        Self::IneHr2m1 { m: 1 },
        Self::LrL,
        Self::SphereGap,
        Self::Tz1,
        Self::Tz2,
        Self::Hr21ln,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Hr21r => "HR21r",
            Self::IneHr2ma { .. } => "ineHR2ma",
            Self::IneHr2m1 { .. } => "ineHR2m1",
            Self::LrL => "LrL",
            Self::SphereGap => "sphere_gap",
            Self::Tz1 => "TZ1",
            Self::Tz2 => "TZ2",
            Self::Hr21ln => "HR21ln",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IneHr2ma { m } | Self::IneHr2m1 { m } => write!(f, "{}:{m}", self.name()),
            _ => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown inequality id `{0}`")]
pub struct UnknownInequality(pub String);

impl FromStr for InequalityId {
    type Err = UnknownInequality;

    /// Accepts the names of [`InequalityId::name`]; the polyharmonic probes
    /// take an optional order, as in `ineHR2ma:2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || UnknownInequality(s.to_owned());
        let (head, m) = match s.split_once(':') {
            Some((h, m)) => (h, Some(m.parse::<u32>().map_err(|_| bad())?)),
            None => (s, None),
        };
        let id = match head {
            "HR21r" => Self::Hr21r,
            "ineHR2ma" => Self::IneHr2ma { m: m.unwrap_or(1) },
            "ineHR2m1" => Self::IneHr2m1 { m: m.unwrap_or(1) },
            "LrL" => Self::LrL,
            "sphere_gap" => Self::SphereGap,
            "TZ1" => Self::Tz1,
            "TZ2" => Self::Tz2,
            "HR21ln" => Self::Hr21ln,
            _ => return Err(bad()),
        };
        match (id, m) {
            (Self::IneHr2ma { m: 0 } | Self::IneHr2m1 { m: 0 }, _) => Err(bad()),
            (Self::IneHr2ma { .. } | Self::IneHr2m1 { .. }, _) | (_, None) => Ok(id),
            _ => Err(bad()),
        }
    }
}

/// Runs one probe over every sample, and over [`PROBE_ELLS`] where the
/// statement is not purely radial.
pub fn probe_inequality(id: InequalityId, n: u32, alpha: f64, samples: &[TestFunction]) -> Vec<ResidualReport> {
    let ells: &[u32] = if id == InequalityId::Hr21r { &[0] } else { &PROBE_ELLS };
    let mut out = Vec::with_capacity(samples.len() * ells.len());
    for sample in samples {
        let label = sample.label();
        for &ell in ells {
            let params = Params::new().n(n).alpha(alpha).ell(ell).f(label.clone());
            let report = match sample.profile() {
                Ok(f) => probe_one(id, n, alpha, ell, &f),
                Err(e) => ResidualReport::failed(id.name(), CheckKind::Inequality, params.clone(), e.to_string()),
            };
            out.push(relabel(report, &label));
        }
    }
    out
}

fn relabel(mut r: ResidualReport, label: &str) -> ResidualReport {
    r.params.f = Some(label.to_owned());
    r
}

/// Probe for one profile in mode `ell`.
pub fn probe_one(id: InequalityId, n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> ResidualReport {
    let params = Params::new().n(n).alpha(alpha).ell(ell);
    let result = match id {
        InequalityId::Hr21r => Ok(probe_hr21r(n, alpha, f)),
        InequalityId::IneHr2ma { m } => probe_ine_hr2ma(n, alpha, m, ell, f),
        InequalityId::IneHr2m1 { m } => probe_ine_hr2m1(n, alpha, m, ell, f),
        InequalityId::LrL => probe_lrl(n, alpha, ell, f),
        InequalityId::SphereGap => probe_sphere_gap(n, alpha, ell, f),
        InequalityId::Tz1 => probe_tz1(n, alpha, ell, f),
        InequalityId::Tz2 => probe_tz2(n, alpha, ell, f),
        InequalityId::Hr21ln => Ok(log::probe_hr21ln(n, alpha, ell, f)),
    };
    result.unwrap_or_else(|e| ResidualReport::failed(id.name(), CheckKind::Inequality, params, e.to_string()))
}

fn skip(id: &str, params: Params, why: impl Into<String>) -> ResidualReport {
    ResidualReport::skipped(id, CheckKind::Inequality, params, why)
}

fn in_range(id: RangeId, n: u32, alpha: f64) -> bool {
    range_check(id, n, alpha).is_ok_and(|v| v.holds)
}

/// `‖Δ_r f‖²_α ≥ (n+α)²/4 ‖f'‖²_{α+2}`.
pub fn probe_hr21r(n: u32, alpha: f64, f: &PiecewiseRadial) -> ResidualReport {
    let lhs = nsq(&apply_delta_r(n, f), alpha, n);
    let c = (f64::from(n) + alpha) / 2.0;
    let terms = Terms::new().with("(n+a)^2/4*|f'|^2_{a+2}", c * c * nsq(&f.differentiate(), alpha + 2.0, n));
    ResidualReport::inequality("HR21r", Params::new().n(n).alpha(alpha), lhs, terms, INEQUALITY_TOL)
}

/// `‖Δ^m u‖²_α ≥ ∏_{l<m} A²_{α+4l} ‖u‖²_{α+4m}` for `n > 2m`, `-n < α < n-4m`.
pub fn probe_ine_hr2ma(n: u32, alpha: f64, m: u32, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    let params = Params::new().n(n).alpha(alpha).m(m).ell(ell);
    let nf = f64::from(n);
    if m == 0 {
        return Err(IdentityError::ZeroOrder);
    }
    if n <= 2 * m || !(-nf < alpha && alpha < nf - 4.0 * f64::from(m)) {
        return Ok(skip("ineHR2ma", params, "needs n > 2m and -n < α < n-4m"));
    }
    let mode = Mode::new(n, ell)?;
    let co = coefficients(n, alpha);
    let lhs = nsq(&apply_delta_power(mode, m, f), alpha, n);
    let prod = crate::coefficients::Scalar::to_f64(&co.a_product(0, m));
    let terms = Terms::new().with("prodA2*|u|^2_{a+4m}", prod * nsq(f, alpha + 4.0 * f64::from(m), n));
    Ok(ResidualReport::inequality("ineHR2ma", params, lhs, terms, INEQUALITY_TOL))
}

/// `‖∇Δ^m u‖²_α ≥ ‖∂_r Δ^m u‖²_α ≥ ((n-2-α)/2)² ∏_{l<m} A²_{α+4l+2} ‖u‖²_{α+4m+2}`
/// for `n > 2m`, `-n < α+2 < n-4m`.
pub fn probe_ine_hr2m1(n: u32, alpha: f64, m: u32, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    let params = Params::new().n(n).alpha(alpha).m(m).ell(ell);
    let nf = f64::from(n);
    if m == 0 {
        return Err(IdentityError::ZeroOrder);
    }
    let a2 = alpha + 2.0;
    if n <= 2 * m || !(-nf < a2 && a2 < nf - 4.0 * f64::from(m)) {
        return Ok(skip("ineHR2m1", params, "needs n > 2m and -n < α+2 < n-4m"));
    }
    let mode = Mode::new(n, ell)?;
    let co = coefficients(n, alpha);
    let g = apply_delta_power(mode, m, f);
    let radial_part = nsq(&g.differentiate(), alpha, n);
    let lhs = gradient_norm_sq(&ModeFunction::new(mode, g), alpha);
    let c = super::hardy_shift(n, alpha);
    let prod = crate::coefficients::Scalar::to_f64(&co.a_product(2, m));
    let rhs = c * c * prod * nsq(f, alpha + 4.0 * f64::from(m) + 2.0, n);
    let terms = Terms::new().with("c2*prodA2*|u|^2_{a+4m+2}", rhs);
    Ok(ResidualReport::inequality("ineHR2m1", params, lhs, terms, INEQUALITY_TOL)
        .require_at_least("radial_part_vs_rhs", radial_part, rhs, INEQUALITY_TOL))
}

/// `‖Δu‖²_α ≥ ‖Δ_r u‖²_α` inside the Rellich range; the gap is checked
/// against its closed form `2A_α μ‖f‖²_{α+4} + μ²‖f‖²_{α+4} + 2μ‖T_{α+2} f‖²_{α+2}`.
pub fn probe_lrl(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    let params = Params::new().n(n).alpha(alpha).ell(ell);
    if !in_range(RangeId::Rellich, n, alpha) {
        return Ok(skip("LrL", params, "outside rellich range"));
    }
    let mode = Mode::new(n, ell)?;
    let mu = mode.mu();
    let lhs = nsq(&apply_delta_r_mode(mode, f), alpha, n);
    let radial = nsq(&apply_delta_r(n, f), alpha, n);
    let w4 = nsq(f, alpha + 4.0, n);
    let gap = 2.0 * a_const(n, &alpha) * mu * w4 + mu * mu * w4 + 2.0 * mu * nsq(&apply_t(alpha + 2.0, n, f), alpha + 2.0, n);
    Ok(
        ResidualReport::inequality("LrL", params, lhs, Terms::new().with("|D_r u|^2_a", radial), INEQUALITY_TOL)
            .require("gap_identity", lhs - radial, gap, IDENTITY_TOL),
    )
}

/// `‖(Δ-Δ_r)u‖²_α ≥ (n-1) Σ_j ‖L_j u‖²_{α+2}`, i.e. `μ² ≥ (n-1)μ` per mode.
pub fn probe_sphere_gap(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    let mode = Mode::new(n, ell)?;
    let mu = mode.mu();
    let w4 = nsq(f, alpha + 4.0, n);
    let terms = Terms::new().with("(n-1)*mu*|u|^2_{a+4}", (f64::from(n) - 1.0) * mu * w4);
    let params = Params::new().n(n).alpha(alpha).ell(ell);
    Ok(ResidualReport::inequality("sphere_gap", params, mu * mu * w4, terms, INEQUALITY_TOL)
        .with_diagnostic("mu^2-(n-1)mu", mu * mu - (f64::from(n) - 1.0) * mu))
}

/// `φ = r^{(n-4-α)/2} f`, in the same mode.
fn phi(n: u32, alpha: f64, f: &PiecewiseRadial) -> PiecewiseRadial {
    f.mul_power((f64::from(n) - 4.0 - alpha) / 2.0)
}

/// Gradient form and Rellich form of the two-weight inequality: both
/// differences equal the same remainder, which is nonnegative when
/// `(α+2)² ≤ n-1`.
pub fn probe_tz1(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    let params = Params::new().n(n).alpha(alpha).ell(ell);
    if !in_range(RangeId::Tz1, n, alpha) {
        return Ok(skip("TZ1", params, "outside tz1 range"));
    }
    let mode = Mode::new(n, ell)?;
    let mu = mode.mu();
    let nf = f64::from(n);
    let lhs = nsq(&apply_delta_r_mode(mode, f), alpha, n);
    let u = ModeFunction::new(mode, f.clone());
    let grad_phi = gradient_norm_sq(&ModeFunction::new(mode, phi(n, alpha, f)), nf - 2.0);
    let c = (nf + alpha) / 2.0;
    let e = (nf - 4.0 - alpha) / 2.0;
    let terms = Terms::new()
        .with("(n+a)^2/4*|grad u|^2_{a+2}", c * c * gradient_norm_sq(&u, alpha + 2.0))
        .with("(n-4-a)^2/4*|grad phi|^2_{n-2}", e * e * grad_phi);
    let form1 = lhs - terms.sum();
    let a = a_const(n, &alpha);
    let w4 = nsq(f, alpha + 4.0, n);
    let form2 = lhs - a * a * w4 - d_const(n, &alpha) * grad_phi;
    let remainder = -(2.0 + alpha).powi(2) * mu * w4
        + mu * mu * w4
        + nsq(&apply_r(alpha, 1, n, f), alpha, n)
        + 2.0 * mu * nsq(&apply_t(alpha + 2.0, n, f), alpha + 2.0, n);
    // differences are compared at the scale of the full norm
    let scale = lhs.abs() + f64::MIN_POSITIVE;
    Ok(ResidualReport::inequality("TZ1", params, lhs, terms, INEQUALITY_TOL)
        .require("forms_agree", lhs + form1 - form2, lhs, 1e-10)
        .require("remainder_identity", scale + form1, scale + remainder, IDENTITY_TOL)
        .with_diagnostic("rellich_form_slack", form2))
}

/// `c' = (n-4-α)²/(4(n-2)²)`.
fn tz2_constant(n: u32, alpha: f64) -> f64 {
    let nf = f64::from(n);
    (nf - 4.0 - alpha).powi(2) / (4.0 * (nf - 2.0).powi(2))
}

/// The exact decomposition behind the second two-weight inequality
/// (`n ≠ 2`):
/// `‖Δu‖²_α = (n+α)²/4 ‖∇u‖²_{α+2} + c' ‖Δφ‖²_{n-4}
///   + (1-c')(‖R_{α,1} f‖²_α + μ²‖f‖²_{α+4} + 2μ‖T_{α+2} f‖²_{α+2})
///   + (2A_α - (n+α)²/4) μ ‖f‖²_{α+4}`.
pub fn check_new58(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    let params = Params::new().n(n).alpha(alpha).ell(ell);
    if n == 2 {
        return Ok(ResidualReport::skipped("new58", CheckKind::Identity, params, "undefined for n = 2"));
    }
    let mode = Mode::new(n, ell)?;
    let lhs = nsq(&apply_delta_r_mode(mode, f), alpha, n);
    Ok(ResidualReport::identity("new58", params, lhs, new58_terms(mode, alpha, f), IDENTITY_TOL))
}

fn new58_terms(mode: Mode, alpha: f64, f: &PiecewiseRadial) -> Terms {
    let n = mode.n();
    let mu = mode.mu();
    let nf = f64::from(n);
    let cp = tz2_constant(n, alpha);
    let c = (nf + alpha) / 2.0;
    let u = ModeFunction::new(mode, f.clone());
    let w4 = nsq(f, alpha + 4.0, n);
    let lap_phi = nsq(&apply_delta_r_mode(mode, &phi(n, alpha, f)), nf - 4.0, n);
    let rest = nsq(&apply_r(alpha, 1, n, f), alpha, n)
        + mu * mu * w4
        + 2.0 * mu * nsq(&apply_t(alpha + 2.0, n, f), alpha + 2.0, n);
    Terms::new()
        .with("(n+a)^2/4*|grad u|^2_{a+2}", c * c * gradient_norm_sq(&u, alpha + 2.0))
        .with("c'*|D phi|^2_{n-4}", cp * lap_phi)
        .with("(1-c')*(|R_1 u|^2+mu^2|u|^2+2mu|T u|^2)", (1.0 - cp) * rest)
        .with("(2A-(n+a)^2/4)*mu*|u|^2_{a+4}", (2.0 * a_const(n, &alpha) - c * c) * mu * w4)
}

/// `‖Δu‖²_α ≥ (n+α)²/4 ‖∇u‖²_{α+2} + c' ‖Δφ‖²_{n-4}` inside the tz2c range.
pub fn probe_tz2(n: u32, alpha: f64, ell: u32, f: &PiecewiseRadial) -> Result<ResidualReport, IdentityError> {
    let params = Params::new().n(n).alpha(alpha).ell(ell);
    if !in_range(RangeId::Tz2c, n, alpha) {
        return Ok(skip("TZ2", params, "outside tz2c range"));
    }
    let mode = Mode::new(n, ell)?;
    let lhs = nsq(&apply_delta_r_mode(mode, f), alpha, n);
    let full = new58_terms(mode, alpha, f);
    let terms = Terms(full.0[..2].to_vec());
    Ok(ResidualReport::inequality("TZ2", params, lhs, terms, INEQUALITY_TOL)
        .require("decomposition", lhs, full.sum(), IDENTITY_TOL))
}
