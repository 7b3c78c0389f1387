//! Worked examples checked against values computed here from scratch:
//! truncated Taylor jets and composite Gauss-Legendre quadrature, both
//! independent of the library's term algebra and integrators.

use hardy_rellich::coefficients::{a_const, d_const, gamma_halfint, power_rule_constant, range_check, rational, Coefficients, RangeId};
use hardy_rellich::families::polybump;
use hardy_rellich::hyperbolic::{check_identity_hr2hyper, delta_rho_h, rho_r_convert, Direction};
use hardy_rellich::identities::log::check_hr32;
use hardy_rellich::identities::{check_hardy_radial, check_thm_poly, check_thm_radial_poly};
use hardy_rellich::manifold::{bessel_weight, check_hrv, ModelSpace};
use hardy_rellich::modes::{
    angular_defect_norm_sq, angular_sum_lj_norm_sq, apply_delta_power, apply_delta_r_mode, apply_g, apply_r, apply_t, mu_eigenvalue, Mode,
    ModeFunction,
};
use hardy_rellich::profile::{parse_profile, CompactProfile, Func, ProfileExpr};
use hardy_rellich::radial::{integrate_moment, weighted_inner, weighted_norm_sq, PiecewiseRadial, RadialPoly};
use hardy_rellich::sharp::{dirichlet_pair_1d, smallest_generalized_eigenvalue};
use num_bigint::BigInt;
use num_rational::BigRational;

/// Truncated Taylor expansion `Σ c_i h^i` about a point: exact derivatives
/// of products and quotients without expanding the bump into monomials.
#[derive(Clone, Debug)]
struct Jet(Vec<f64>);

impl Jet {
    fn var(x: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x;
        if order > 0 {
            c[1] = 1.0;
        }
        Self(c)
    }

    fn constant(x: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x;
        Self(c)
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn add(&self, o: &Self) -> Self {
        Self(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    fn mul(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        Self((0..n).map(|i| (0..=i).map(|j| self.0[j] * o.0[i - j]).sum()).collect())
    }

    fn div(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        let mut q = vec![0.0; n];
        for i in 0..n {
            let acc: f64 = (0..i).map(|j| q[j] * o.0[i - j]).sum();
            q[i] = (self.0[i] - acc) / o.0[0];
        }
        Self(q)
    }

    fn powi(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(1.0, self.len() - 1), |acc, _| acc.mul(self))
    }

    fn deriv(&self) -> Self {
        Self((1..self.len()).map(|i| i as f64 * self.0[i]).collect())
    }

    fn value(&self) -> f64 {
        self.0[0]
    }
}

/// `((r-a)(b-r))^k` expanded about `r`.
fn bump_jet(r: f64, a: f64, b: f64, k: u32, order: usize) -> Jet {
    let x = Jet::var(r, order);
    x.add(&Jet::constant(-a, order)).mul(&Jet::constant(b, order).add(&x.scale(-1.0))).powi(k)
}

/// `g'' + (n-1) g'/r - μ g/r²`.
fn euclid_laplacian(g: &Jet, r: f64, n: u32, mu: f64) -> Jet {
    let order = g.len() - 1;
    let inv = Jet::constant(1.0, order).div(&Jet::var(r, order));
    let d1 = g.deriv();
    d1.deriv().add(&d1.mul(&inv).scale(f64::from(n) - 1.0)).add(&g.mul(&inv).mul(&inv).scale(-mu))
}

/// `sinh` and `cosh` expanded about `t`.
fn hyperbolic_jets(t: f64, order: usize) -> (Jet, Jet) {
    let mut fact = 1.0;
    let (mut s, mut c) = (Vec::new(), Vec::new());
    for i in 0..=order {
        if i > 0 {
            fact *= i as f64;
        }
        let (even, odd) = (t.cosh() / fact, t.sinh() / fact);
        s.push(if i % 2 == 0 { odd } else { even });
        c.push(if i % 2 == 0 { even } else { odd });
    }
    (Jet(s), Jet(c))
}

/// Composite 5-point Gauss-Legendre on `panels` equal panels.
fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let mid = a + (i as f64 + 0.5) * h;
            X.iter().zip(W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn one_on(a: f64, b: f64) -> PiecewiseRadial {
    PiecewiseRadial::single(a, b, RadialPoly::constant(1.0)).unwrap()
}

fn mono(a: f64, b: f64, power: f64, logpow: i32) -> PiecewiseRadial {
    PiecewiseRadial::monomial(a, b, 1.0, power, logpow).unwrap()
}

#[test]
fn moments_and_norms() {
    let e = std::f64::consts::E;
    assert!(rel(integrate_moment(&one_on(1.0, 2.0), 2.0), 7.0 / 3.0) < 1e-15);
    assert!(rel(integrate_moment(&mono(1.0, e, 0.0, 2), -1.0), 1.0 / 3.0) < 1e-15);
    assert!(rel(integrate_moment(&mono(1.0, 2.0, 0.3, 0), 0.7), 1.5) < 1e-15);
    assert!(rel(weighted_norm_sq(&one_on(1.0, 2.0), 0.0, 3), 7.0 / 3.0) < 1e-15);
    assert!(rel(weighted_norm_sq(&mono(1.0, 2.0, 1.0, 0), 0.0, 3), 31.0 / 5.0) < 1e-15);
    assert_eq!(weighted_norm_sq(&PiecewiseRadial::zero(), 0.0, 3), 0.0);
    assert!(rel(weighted_inner(&one_on(1.0, 2.0), &mono(1.0, 2.0, 1.0, 0), 0.0, 3), 15.0 / 4.0) < 1e-15);
}

#[test]
fn refinement_adds_pointwise() {
    let x = mono(1.0, 3.0, 1.0, 0).add(&mono(2.0, 4.0, 2.0, 0));
    assert!((x.eval(2.5) - 8.75).abs() < 1e-14);
    assert!(mono(1.0, 2.0, 1.0, 0).add(&mono(1.0, 2.0, 1.0, 0).neg()).is_zero());
}

#[test]
fn sphere_eigenvalues() {
    assert_eq!(mu_eigenvalue(3, 1).unwrap(), 2.0);
    assert_eq!(mu_eigenvalue(3, 2).unwrap(), 6.0);
    assert_eq!(mu_eigenvalue(5, 1).unwrap(), 4.0);
}

#[test]
fn first_order_operators() {
    let t = apply_t(0.0, 3, &one_on(1.0, 2.0));
    for r in [1.1, 1.5, 1.9] {
        assert!((t.eval(r) - 0.5 / r).abs() < 1e-15);
    }
    let t = apply_t(2.0, 5, &mono(1.0, 2.0, 1.0, 0));
    assert!((t.eval(1.3) - 1.5).abs() < 1e-15);
    // inner factor T_2 annihilates r^{-(n-4)/2}
    let kernel = apply_r(0.0, 1, 6, &mono(1.0, 2.0, -1.0, 0));
    assert!([1.2, 1.5, 1.8].iter().all(|&r| kernel.eval(r).abs() < 1e-15));

    let e2 = (-2.0f64).exp();
    let g = apply_g(0.0, 0.0, 3, &one_on(e2, (-1.0f64).exp())).unwrap();
    for r in [0.15f64, 0.2, 0.3] {
        let expect = 0.5 / r + 0.5 / (r * (1.0 / r).ln());
        assert!(rel(g.eval(r), expect) < 1e-14);
    }
}

#[test]
fn laplacian_powers() {
    let m = Mode::new(5, 0).unwrap();
    let r4 = mono(1.0, 2.0, 4.0, 0);
    let d2 = apply_delta_power(m, 2, &r4);
    assert!((d2.eval(1.4) - 280.0).abs() < 1e-12);
    let d = apply_delta_r_mode(Mode::new(4, 0).unwrap(), &mono(1.0, 2.0, 2.0, 0));
    assert!((d.eval(1.7) - 8.0).abs() < 1e-13);
    let harmonic = apply_delta_r_mode(Mode::new(4, 2).unwrap(), &mono(1.0, 2.0, 2.0, 0));
    assert!(harmonic.eval(1.3).abs() < 1e-13);
    assert!(apply_delta_r_mode(Mode::new(3, 0).unwrap(), &mono(1.0, 2.0, -1.0, 0)).eval(1.5).abs() < 1e-14);
}

#[test]
fn angular_reductions() {
    let u = ModeFunction::new(Mode::new(3, 1).unwrap(), one_on(1.0, 2.0));
    assert!(rel(angular_sum_lj_norm_sq(&u, 0.0), 2.0) < 1e-15);
    assert!(rel(angular_defect_norm_sq(&u, 0.0), 2.0) < 1e-15);
}

#[test]
fn coefficient_constants() {
    assert_eq!(a_const(5, &q(0, 1)), q(5, 4));
    assert_eq!(d_const(5, &q(0, 1)), q(13, 2));
    assert_eq!(a_const(7, &q(3, 1)), q(0, 1));
    assert_eq!(d_const(7, &q(-7, 1)), q(25, 1));
    for alpha in [-2.0, 0.5, 3.0] {
        let mut c = Coefficients::<BigRational>::new(5, rational(alpha));
        let (a0, a4, d0, d4) = (c.a(0), c.a(4), c.d(0), c.d(4));
        assert_eq!(c.c(2, 2), a4.clone() * a4 + d4 * d0 + a0.clone() * a0);
        for m in 0..4 {
            assert_eq!(c.c(0, m), q(1, 1));
            assert_eq!(c.c_tilde(0, m), c.c_hat(0, m, 0));
        }
        assert_eq!(c.c_hat(0, 0, 3), q(1, 1));
        assert_eq!(c.h(-1), q(1, 1));
    }
    assert_eq!(Coefficients::<BigRational>::new(5, q(0, 1)).h(0), q(25, 16));
    assert_eq!(gamma_halfint(0), 1.0);
    assert_eq!(gamma_halfint(1), 0.5);
    assert_eq!(gamma_halfint(2), 0.75);
    assert_eq!(power_rule_constant(5, &q(-3, 2), 1), q(9, 4));
    assert_eq!(power_rule_constant(6, &q(-4, 1), 1), q(0, 1));
}

#[test]
fn range_examples() {
    assert!(range_check(RangeId::Rellich, 5, 0.0).unwrap().holds);
    assert!(range_check(RangeId::GradRellich, 5, 0.0).unwrap().holds);
    assert!(!range_check(RangeId::Tz2c, 3, 0.0).unwrap().holds);
    assert!(range_check(RangeId::Tz2c, 3, -1.0).unwrap().holds);
}

#[test]
fn hardy_identity_against_quadrature() {
    let (n, alpha) = (3u32, 0.0);
    let c = (f64::from(n) - 2.0 - alpha) / 2.0;
    let w = |r: f64, beta: f64| r.powf(f64::from(n) - 1.0 - beta);
    let df = |r: f64| bump_jet(r, 1.0, 2.0, 4, 1).deriv().value();
    let f = |r: f64| bump_jet(r, 1.0, 2.0, 4, 0).value();
    let lhs = gauss(|r| df(r).powi(2) * w(r, alpha), 1.0, 2.0, 400);
    let zero = gauss(|r| f(r).powi(2) * w(r, alpha + 2.0), 1.0, 2.0, 400);
    let t = gauss(|r| (df(r) + c / r * f(r)).powi(2) * w(r, alpha), 1.0, 2.0, 400);
    assert!(rel(c * c * zero + t, lhs) < 1e-12);
    let report = check_hardy_radial(n, alpha, &polybump(1.0, 2.0, 4).unwrap());
    assert!(rel(report.lhs, lhs) < 1e-12, "{} vs {lhs}", report.lhs);
    assert!(report.rel_residual <= 1e-10);
}

/// `‖Δ_{r,ℓ}² f‖²_α` for the bump `((r-1)(2-r))^8`.
fn biharmonic_norm(n: u32, alpha: f64, mu: f64) -> f64 {
    let integrand = |r: f64| {
        let f = bump_jet(r, 1.0, 2.0, 8, 4);
        let d2 = euclid_laplacian(&euclid_laplacian(&f, r, n, mu), r, n, mu);
        d2.value().powi(2) * r.powf(f64::from(n) - 1.0 - alpha)
    };
    gauss(integrand, 1.0, 2.0, 400)
}

#[test]
fn polyharmonic_lhs_against_quadrature() {
    let lhs = biharmonic_norm(5, 0.0, 0.0);
    let report = check_thm_radial_poly(5, 0.0, 2, &polybump(1.0, 2.0, 8).unwrap()).unwrap();
    assert!(rel(report.lhs, lhs) < 1e-10, "{} vs {lhs}", report.lhs);
    assert!(report.rel_residual <= 1e-9);

    let (n, ell) = (4u32, 1u32);
    let lhs = biharmonic_norm(n, 1.5, f64::from(ell * (ell + n - 2)));
    let report = check_thm_poly(n, 1.5, 2, ell, &polybump(1.0, 2.0, 8).unwrap()).unwrap();
    assert!(rel(report.lhs, lhs) < 1e-10, "{} vs {lhs}", report.lhs);
    assert!(report.rel_residual <= 1e-9);
}

#[test]
fn log_weight_degenerate_case() {
    let f = polybump((-3.0f64).exp(), (-1.0f64).exp(), 6).unwrap();
    let g = apply_g(0.5, 0.5, 3, &f).unwrap();
    let t = apply_t(0.5, 3, &f);
    for r in [0.06, 0.1, 0.3] {
        assert!((g.eval(r) - t.eval(r)).abs() <= 1e-14 * t.eval(r).abs().max(1e-30));
    }
    assert!(check_hr32(3, 0.5, 0.5, &f).unwrap().rel_residual <= 1e-9);
}

#[test]
fn profile_examples() {
    let x = ProfileExpr::var();
    let d = x.apply(Func::Sinh).derivative(1);
    assert!((d.eval(0.7) - 0.7f64.cosh()).abs() < 1e-15);
    let d = x.apply(Func::Coth).derivative(1);
    assert!((d.eval(0.7) + 1.0 / 0.7f64.sinh().powi(2)).abs() < 1e-13);
    let d4 = ProfileExpr::power(-1.5).derivative(4);
    let c = -1.5 * -2.5 * -3.5 * -4.5;
    assert!(rel(d4.eval(1.3), c * 1.3f64.powf(-5.5)) < 1e-14);
    assert_eq!(parse_profile("r^").unwrap_err().offset(), 2);
    let nested = parse_profile("exp(-1/((r-1)*(2-r)))").unwrap();
    assert!(rel(nested.eval(1.5), (-4.0f64).exp()) < 1e-15);
}

#[test]
fn bessel_weights() {
    let w = bessel_weight(&ProfileExpr::constant(1.0), &ProfileExpr::power(-1.5), ModelSpace::Euclidean(5));
    for r in [0.5, 1.0, 2.5] {
        assert!(rel(w.eval(r), 2.25 / (r * r)) < 1e-13);
    }
    let (n, alpha) = (7u32, 1.0);
    let c = (f64::from(n) - 2.0 - alpha) / 2.0;
    let w = bessel_weight(&ProfileExpr::power(-alpha), &ProfileExpr::power(-c), ModelSpace::Euclidean(n));
    for i in 0..20 {
        let r = 0.3 + 0.2 * f64::from(i);
        assert!(rel(w.eval(r), c * c * r.powf(-alpha - 2.0)) < 1e-12);
    }
    let w = bessel_weight(&ProfileExpr::constant(1.0), &ProfileExpr::constant(3.0), ModelSpace::Euclidean(4));
    assert!(w.eval(1.2).abs() < 1e-15);
}

#[test]
fn general_weight_odd_order() {
    let u = CompactProfile::bump(1.0, 2.0, 8).unwrap();
    let r = check_hrv(3, &ProfileExpr::constant(1.0), &ProfileExpr::power(-1.5), &u, ModelSpace::Euclidean(8));
    assert!(r.passed() && r.rel_residual <= 1e-8, "{r:?}");
}

#[test]
fn hyperbolic_examples() {
    assert_eq!(rho_r_convert(0.0, Direction::RToRho).unwrap(), 0.0);
    let e = std::f64::consts::E;
    assert!((rho_r_convert((e - 1.0) / (e + 1.0), Direction::RToRho).unwrap() - 1.0).abs() < 1e-15);
    let cosh = ProfileExpr::var().apply(Func::Cosh);
    for n in [2, 5] {
        let d = delta_rho_h(n, &cosh);
        assert!(rel(d.eval(0.8), f64::from(n) * 0.8f64.cosh()) < 1e-14);
    }

    // ‖Δ_ℍ u‖² for u = f Y_1 on ℍ³, f a bump in ρ
    let (n, ell) = (3u32, 1u32);
    let mu = f64::from(ell * (ell + n - 2));
    let lhs = gauss(
        |t| {
            let f = bump_jet(t, 1.0, 2.0, 6, 2);
            let (sh, ch) = hyperbolic_jets(t, 2);
            let d1 = f.deriv();
            let lap = d1.deriv().value() + (f64::from(n) - 1.0) * ch.value() / sh.value() * d1.value()
                - mu * f.value() / sh.value().powi(2);
            lap * lap * sh.value().powi(n as i32 - 1)
        },
        1.0,
        2.0,
        400,
    );
    let report = check_identity_hr2hyper(n, ell, &CompactProfile::bump(1.0, 2.0, 6).unwrap());
    assert!(rel(report.lhs, lhs) < 1e-9, "{} vs {lhs}", report.lhs);
    assert!(report.rel_residual <= 1e-8);
    let report = check_identity_hr2hyper(4, 2, &CompactProfile::bump(1.0, 2.0, 6).unwrap());
    assert!(report.rel_residual <= 1e-8);
}

#[test]
fn dirichlet_eigenvalue() {
    let length = 3.0;
    let pair = dirichlet_pair_1d(length, 2001).unwrap();
    let est = smallest_generalized_eigenvalue(&pair).unwrap();
    let exact = (std::f64::consts::PI / length).powi(2);
    assert!(est.converged);
    assert!(rel(est.value, exact) < 1e-5, "{} vs {exact}", est.value);
}
