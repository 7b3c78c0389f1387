//! Operator calculus on separable functions `u = f(r)·Y_ℓ(σ)`.
//!
//! Spherical harmonics are never materialized. Every angular quantity is
//! reduced to a radial integral through `Σ_j |L_j Y_ℓ|² = μ_ℓ/r²` for an
//! L²-normalized `Y_ℓ`, so `Σ_j ‖L_j u‖²_β = μ_ℓ ‖f‖²_{β+2}`.

use serde::{Deserialize, Serialize};

use crate::radial::{weighted_norm_sq, PiecewiseRadial, RadialError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModeError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("in dimension 1 only the radial mode ell = 0 exists, got ell = {ell}")]
    NoSphere { ell: u32 },
}

/// Spherical-harmonic mode of degree `ell` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    n: u32,
    ell: u32,
    mu: f64,
}

impl Mode {
    pub fn new(n: u32, ell: u32) -> Result<Self, ModeError> {
        if n == 0 {
            return Err(ModeError::ZeroDimension);
        }
        let mu = mu_eigenvalue(n, ell)?;
        Ok(Self { n, ell, mu })
    }

    /// The radial mode `ell = 0`.
    pub fn radial(n: u32) -> Self {
        Self::new(n.max(1), 0).expect("radial mode always exists")
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Eigenvalue of `-Δ_σ` on this mode.
    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// `ℓ(ℓ + n - 2)`, the `ℓ`-th eigenvalue of `-Δ_σ` on `S^{n-1}`.
///
/// ```
/// use hardy_rellich::modes::mu_eigenvalue;
/// assert_eq!(mu_eigenvalue(3, 2).unwrap(), 6.0);
/// assert!(mu_eigenvalue(1, 1).is_err());
/// ```
pub fn mu_eigenvalue(n: u32, ell: u32) -> Result<f64, ModeError> {
    if n <= 1 && ell > 0 {
        return Err(ModeError::NoSphere { ell });
    }
    Ok(f64::from(ell) * (f64::from(ell) + f64::from(n) - 2.0))
}

/// Separable function `f(r) Y_ℓ(σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction {
    pub mode: Mode,
    pub profile: PiecewiseRadial,
}

impl ModeFunction {
    pub fn new(mode: Mode, profile: PiecewiseRadial) -> Self {
        Self { mode, profile }
    }

    pub fn n(&self) -> u32 {
        self.mode.n
    }

    pub fn mu(&self) -> f64 {
        self.mode.mu
    }
}

/// `T_α f = f' + (n-2-α)/(2r) f`.
pub fn apply_t(alpha: f64, n: u32, f: &PiecewiseRadial) -> PiecewiseRadial {
    let c = (f64::from(n) - 2.0 - alpha) / 2.0;
    f.differentiate().add(&f.mul_power(-1.0).scale(c))
}

/// `R_{α,k} = T_α ∘ T_{α+2} ∘ … ∘ T_{α+2k}`, innermost factor applied first.
pub fn apply_r(alpha: f64, k: u32, n: u32, f: &PiecewiseRadial) -> PiecewiseRadial {
    (0..=k)
        .rev()
        .fold(f.clone(), |acc, i| apply_t(alpha + 2.0 * f64::from(i), n, &acc))
}

/// `Δ_r f = f'' + (n-1)/r f'`.
pub fn apply_delta_r(n: u32, f: &PiecewiseRadial) -> PiecewiseRadial {
    let d = f.differentiate();
    d.differentiate().add(&d.mul_power(-1.0).scale(f64::from(n) - 1.0))
}

/// Laplacian restricted to the mode: `f'' + (n-1)/r f' - μ f/r²`.
pub fn apply_delta_r_mode(mode: Mode, f: &PiecewiseRadial) -> PiecewiseRadial {
    let radial = apply_delta_r(mode.n, f);
    if mode.mu == 0.0 {
        radial
    } else {
        radial.sub(&f.mul_power(-2.0).scale(mode.mu))
    }
}

/// `m`-fold mode Laplacian; `m = 0` returns `f`.
pub fn apply_delta_power(mode: Mode, m: u32, f: &PiecewiseRadial) -> PiecewiseRadial {
    (0..m).fold(f.clone(), |acc, _| apply_delta_r_mode(mode, &acc))
}

/// `G_{α,b} f = T_α f + (2b-1)/(2r ln r) f`, for pieces on one side of `r = 1`.
///
/// On `(0,1)` this is `T_α f - (2b-1)/(2r|ln r|) f`, the sign for which
/// `‖|ln r|^b T_α f‖²_α = (2b-1)²/4 ‖|ln r|^{b-1} f‖²_{α+2} + ‖|ln r|^b G_{α,b} f‖²_α`
/// holds.
pub fn apply_g(alpha: f64, b: f64, n: u32, f: &PiecewiseRadial) -> Result<PiecewiseRadial, RadialError> {
    let log_part = f.mul_power(-1.0).mul_log(-1)?;
    Ok(apply_t(alpha, n, f).add(&log_part.scale((2.0 * b - 1.0) / 2.0)))
}

/// `Σ_j ‖L_j u‖²_β = μ ‖f‖²_{β+2}`.
pub fn angular_sum_lj_norm_sq(u: &ModeFunction, beta: f64) -> f64 {
    if u.mu() == 0.0 {
        return 0.0;
    }
    u.mu() * weighted_norm_sq(&u.profile, beta + 2.0, u.n())
}

/// `Σ_j ‖T_β(L_j u)‖²_β = μ ‖T_{β+2} f‖²_{β+2}`.
pub fn angular_sum_t_of_lj_norm_sq(u: &ModeFunction, beta: f64) -> f64 {
    if u.mu() == 0.0 {
        return 0.0;
    }
    u.mu() * weighted_norm_sq(&apply_t(beta + 2.0, u.n(), &u.profile), beta + 2.0, u.n())
}

/// `‖(Δ - Δ_r) u‖²_β = μ² ‖f‖²_{β+4}`.
pub fn angular_defect_norm_sq(u: &ModeFunction, beta: f64) -> f64 {
    if u.mu() == 0.0 {
        return 0.0;
    }
    u.mu() * u.mu() * weighted_norm_sq(&u.profile, beta + 4.0, u.n())
}

/// `‖∇u‖²_β = ‖f'‖²_β + μ ‖f‖²_{β+2}`.
pub fn gradient_norm_sq(u: &ModeFunction, beta: f64) -> f64 {
    weighted_norm_sq(&u.profile.differentiate(), beta, u.n()) + angular_sum_lj_norm_sq(u, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(a: f64, b: f64, p: f64) -> PiecewiseRadial {
        PiecewiseRadial::monomial(a, b, 1.0, p, 0).unwrap()
    }

    fn only_term(x: &PiecewiseRadial) -> (f64, f64) {
        let t = x.pieces()[0].body.terms();
        assert_eq!(t.len(), 1, "{t:?}");
        (t[0].coeff, t[0].power)
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(mu_eigenvalue(3, 1).unwrap(), 2.0);
        assert_eq!(mu_eigenvalue(3, 2).unwrap(), 6.0);
        assert_eq!(mu_eigenvalue(5, 1).unwrap(), 4.0);
        assert_eq!(mu_eigenvalue(1, 0).unwrap(), 0.0);
        assert!(Mode::new(1, 2).is_err());
        assert!(Mode::new(0, 0).is_err());
    }

    #[test]
    fn t_examples() {
        assert_eq!(only_term(&apply_t(0.0, 3, &mono(1.0, 2.0, 0.0))), (0.5, -1.0));
        assert!(apply_t(0.6, 5, &mono(1.0, 2.0, -(5.0 - 2.0 - 0.6) / 2.0)).is_zero());
        assert_eq!(only_term(&apply_t(2.0, 5, &mono(1.0, 2.0, 1.0))), (1.5, 0.0));
    }

    #[test]
    fn r_examples() {
        let f = mono(1.0, 2.0, 2.5);
        assert_eq!(apply_r(0.3, 0, 4, &f), apply_t(0.3, 4, &f));
        assert!(apply_r(0.0, 1, 7, &mono(1.0, 2.0, -1.5)).is_zero());
        let manual = apply_t(1.0, 6, &apply_t(3.0, 6, &apply_t(5.0, 6, &f)));
        assert_eq!(apply_r(1.0, 2, 6, &f), manual);
    }

    #[test]
    fn laplacian_examples() {
        for n in 1..7 {
            let d = apply_delta_r_mode(Mode::radial(n), &mono(1.0, 2.0, 2.0));
            assert_eq!(only_term(&d), (2.0 * f64::from(n), 0.0));
        }
        for (n, ell) in [(3, 1), (4, 2), (6, 3)] {
            let f = mono(1.0, 2.0, f64::from(ell));
            assert!(apply_delta_r_mode(Mode::new(n, ell).unwrap(), &f).is_zero());
        }
        assert!(apply_delta_r_mode(Mode::radial(3), &mono(1.0, 2.0, -1.0)).is_zero());
        let d2 = apply_delta_power(Mode::radial(5), 2, &mono(1.0, 2.0, 4.0));
        assert_eq!(only_term(&d2), (280.0, 0.0));
    }

    #[test]
    fn g_examples() {
        let f = mono((-2.0f64).exp(), (-1.0f64).exp(), 0.0);
        assert_eq!(apply_g(0.7, 0.5, 4, &f).unwrap(), apply_t(0.7, 4, &f));
        let g = apply_g(0.0, 0.0, 3, &f).unwrap();
        let r: f64 = 0.25;
        assert!((g.eval(r) - (0.5 / r + 0.5 / (r * (1.0 / r).ln()))).abs() < 1e-14);
        assert!(apply_g(0.0, 0.0, 3, &mono(0.5, 2.0, 0.0)).is_err());
    }

    #[test]
    fn angular_examples() {
        let one = ModeFunction::new(Mode::new(3, 1).unwrap(), mono(1.0, 2.0, 0.0));
        assert!((angular_sum_lj_norm_sq(&one, 0.0) - 2.0).abs() < 1e-15);
        assert!((angular_defect_norm_sq(&one, 0.0) - 2.0).abs() < 1e-15);
        let radial = ModeFunction::new(Mode::radial(3), mono(1.0, 2.0, 1.0));
        assert_eq!(angular_sum_lj_norm_sq(&radial, 0.0), 0.0);
        assert_eq!(angular_sum_t_of_lj_norm_sq(&radial, 0.0), 0.0);
        assert_eq!(angular_defect_norm_sq(&radial, 0.0), 0.0);
        let beta = 0.5;
        let kernel = mono(1.0, 2.0, -(4.0 - 4.0 - beta) / 2.0);
        let u = ModeFunction::new(Mode::new(4, 3).unwrap(), kernel);
        assert_eq!(angular_sum_t_of_lj_norm_sq(&u, beta), 0.0);
    }

    #[test]
    fn sphere_gap_per_mode() {
        for n in 2..9u32 {
            for ell in 0..5 {
                let mu = mu_eigenvalue(n, ell).unwrap();
                let gap = mu * mu - f64::from(n - 1) * mu;
                assert!(gap >= 0.0 || ell == 0);
                assert_eq!(gap == 0.0, ell <= 1, "n={n} ell={ell}");
            }
        }
    }
}
