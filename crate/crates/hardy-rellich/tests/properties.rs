use hardy_rellich::coefficients::{a_const, power_rule_constant, range_check, rational, Coefficients, RangeId};
use hardy_rellich::families::TestFunction;
use hardy_rellich::hyperbolic::{ipp_gap, min_sh_sq_minus_rho_sq};
use hardy_rellich::identities::{check_hr13, check_ka, check_kb, check_new_r1, check_new_t1, check_new_t2, check_rhr2a, check_t0};
use hardy_rellich::manifold::{adjointness_gap, ModelSpace, OperatorTower};
use hardy_rellich::modes::{apply_r, apply_t};
use hardy_rellich::oracle::{cross_validate, random_piecewise};
use hardy_rellich::profile::ProfileExpr;
use hardy_rellich::quadrature::integrate_adaptive;
use hardy_rellich::radial::{integrate_moment, weighted_inner, weighted_norm_sq, PiecewiseRadial, RadialPoly};
use hardy_rellich::report::ResidualReport;
use hardy_rellich::sharp::{assemble_forms, smallest_generalized_eigenvalue, RadialGrid, Target};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A bump on `(a, a + w)` times a mild polynomial and a power of `r`.
fn test_function() -> impl Strategy<Value = TestFunction> {
    smooth_test_function(4..10)
}

/// Same, with the vanishing order drawn from `orders`; chains of `k`
/// first-order operators need order above `k + 2` at both ends.
fn smooth_test_function(orders: std::ops::Range<u32>) -> impl Strategy<Value = TestFunction> {
    (0.3f64..2.0, 0.5f64..2.0, orders, prop::collection::vec(-0.25f64..0.25, 3), -2.0f64..2.0).prop_map(|(a, w, k, mut c, p)| {
        let b = a + w;
        c.insert(0, 1.0);
        for (j, x) in c.iter_mut().enumerate().skip(1) {
            *x /= b.powi(j as i32);
        }
        TestFunction::bump(a, b, k).with_multiplier(c).with_power(p)
    })
}

fn profile(t: &TestFunction) -> PiecewiseRadial {
    t.profile().expect("valid test function")
}

/// Terms `c r^p (ln r)^q` with quarter-integer powers.
fn radial_poly() -> impl Strategy<Value = RadialPoly> {
    prop::collection::vec((0.5f64..2.0, -12i32..=12, 0i32..=3), 1..5)
        .prop_map(|terms| RadialPoly::from_terms(terms.into_iter().map(|(c, p, q)| (c, f64::from(p) / 4.0, q))))
}

fn tight(r: &ResidualReport, tol: f64) -> Result<(), TestCaseError> {
    prop_assert!(r.passed() && r.rel_residual <= tol, "{} rel {:e} note {:?}", r.id, r.rel_residual, r.note);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_of_antiderivative_round_trips(p in radial_poly(), r in 0.6f64..2.9) {
        let x = PiecewiseRadial::single(0.5, 3.0, p).unwrap();
        let back = x.antiderivative().unwrap().differentiate();
        let (got, want) = (back.eval(r), x.eval(r));
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "{got} vs {want}");
    }

    #[test]
    fn integration_by_parts_has_no_boundary_term(s in test_function(), m in prop::collection::vec(-0.3f64..0.3, 2)) {
        let x = profile(&s);
        let y = profile(&TestFunction::bump(s.a, s.b, s.k).with_multiplier(vec![1.0, m[0] / s.b, m[1] / (s.b * s.b)]));
        let first = integrate_moment(&x.differentiate().multiply(&y), 0.0);
        let second = integrate_moment(&x.multiply(&y.differentiate()), 0.0);
        prop_assert!((first + second).abs() <= 1e-12 * first.abs().max(1.0), "{first} + {second}");
    }

    #[test]
    fn inner_product_is_bilinear_and_symmetric(
        s in test_function(), t in test_function(), u in test_function(),
        c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, beta in -3.0f64..3.0, n in 2u32..9,
    ) {
        let (x1, x2, y) = (profile(&s), profile(&t), profile(&u));
        let combo = x1.scale(c1).add(&x2.scale(c2));
        let left = weighted_inner(&combo, &y, beta, n);
        let (a, b) = (weighted_inner(&x1, &y, beta, n), weighted_inner(&x2, &y, beta, n));
        let scale = (c1 * a).abs() + (c2 * b).abs() + 1e-300;
        prop_assert!((left - c1 * a - c2 * b).abs() <= 1e-12 * scale);
        let swapped = weighted_inner(&y, &x1, beta, n);
        prop_assert!((a - swapped).abs() <= 1e-12 * a.abs().max(1e-300));
        prop_assert!((weighted_inner(&y, &y, beta, n) - weighted_norm_sq(&y, beta, n)).abs() <= 1e-12 * weighted_norm_sq(&y, beta, n));
    }

    #[test]
    fn norms_are_positive(seed in any::<u64>(), beta in -4.0f64..4.0, n in 1u32..10) {
        let x = random_piecewise(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(weighted_norm_sq(&x, beta, n) > 0.0);
        prop_assert_eq!(weighted_norm_sq(&PiecewiseRadial::zero(), beta, n), 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature(seed in any::<u64>()) {
        for row in cross_validate(3, seed) {
            prop_assert!(row.rel_gap <= 1e-10, "{row:?}");
        }
    }

    #[test]
    fn first_order_identities(s in test_function(), n in 2u32..9, alpha in -3.0f64..3.0, beta in -3.0f64..3.0, sigma in -1.5f64..1.5) {
        let f = profile(&s);
        tight(&check_t0(n, alpha, beta, &f), 1e-10)?;
        tight(&check_new_t1(n, alpha, beta, sigma, &f), 1e-10)?;
        tight(&check_new_t2(n, alpha, &f), 1e-9)?;
        tight(&check_hr13(n, alpha, &f), 1e-9)?;
    }

    #[test]
    fn r_chain_identities(s in smooth_test_function(8..14), n in 2u32..9, alpha in -3.0f64..3.0, beta in -2.0f64..2.0, k in 0u32..=4) {
        let f = profile(&s);
        tight(&check_ka(n, alpha, k, &f), 1e-9)?;
        tight(&check_kb(n, alpha, k, &f), 1e-9)?;
        tight(&check_new_r1(n, alpha, beta, k, &f), 1e-9)?;
    }

    #[test]
    fn r_is_the_fold_of_t(s in smooth_test_function(6..12), n in 2u32..9, alpha in -3.0f64..3.0, k in 0u32..=3, r in 0.0f64..1.0) {
        let f = profile(&s);
        let chained = (0..=k).rev().fold(f.clone(), |g, i| apply_t(alpha + 2.0 * f64::from(i), n, &g));
        let direct = apply_r(alpha, k, n, &f);
        let x = s.a + r * (s.b - s.a);
        let (p, q) = (direct.eval(x), chained.eval(x));
        prop_assert!((p - q).abs() <= 1e-11 * (p.abs() + q.abs()).max(1e-300), "{p} vs {q}");
    }

    #[test]
    fn residuals_are_scale_covariant(s in test_function(), n in 2u32..9, alpha in -3.0f64..3.0, lambda in 0.25f64..4.0) {
        let f = profile(&s);
        let g = f.dilate(lambda).unwrap();
        let (x, y) = (check_rhr2a(n, alpha, &f), check_rhr2a(n, alpha, &g));
        tight(&x, 1e-9)?;
        tight(&y, 1e-9)?;
        let ratio = y.lhs / x.lhs;
        let scale: f64 = y.terms.iter().map(|(_, v)| v.abs()).sum::<f64>() + y.lhs.abs();
        for ((_, a), (_, b)) in x.terms.iter().zip(y.terms.iter()) {
            prop_assert!((b - ratio * a).abs() <= 1e-9 * scale);
        }
        let doubled = check_rhr2a(n, alpha, &f.scale(2.0));
        prop_assert!((doubled.lhs - 4.0 * x.lhs).abs() <= 1e-12 * 4.0 * x.lhs.abs());
        prop_assert!((doubled.rhs - 4.0 * x.rhs).abs() <= 1e-12 * 4.0 * x.rhs.abs());
    }

    #[test]
    fn power_rule_recurrence(n in 1u32..12, p in -40i64..40, k in 1u32..5) {
        let sigma = BigRational::new(p.into(), 4.into());
        let two_k = BigRational::from_u32(2 * k).unwrap();
        let step = -(sigma.clone() - two_k.clone()) * (sigma.clone() - two_k + BigRational::from_u32(n).unwrap() - BigRational::from_u32(2).unwrap());
        prop_assert_eq!(power_rule_constant(n, &sigma, k + 1), power_rule_constant(n, &sigma, k) * step);
    }

    #[test]
    fn rellich_range_is_the_a_criterion(n in 1u32..16, p in -200i64..200) {
        let alpha = p as f64 / 8.0;
        let a = a_const(n, &rational(alpha));
        let criterion = a * BigRational::from_u32(2).unwrap() + BigRational::from_u32(n).unwrap() - BigRational::from_u32(1).unwrap();
        prop_assert_eq!(range_check(RangeId::Rellich, n, alpha).unwrap().holds, criterion >= BigRational::zero());
    }

    #[test]
    fn in_range_coefficients_are_positive(n in 3u32..14, p in -60i64..60, m in 1u32..=4) {
        let alpha = p as f64 / 4.0;
        let nf = f64::from(n);
        prop_assume!(-nf < alpha && alpha + 4.0 * f64::from(m) - 2.0 < nf - 4.0);
        let mut c = Coefficients::<BigRational>::new(n, rational(alpha));
        for j in 0..=2 * i64::from(m) {
            prop_assert!(c.c(j, m) > BigRational::zero());
            prop_assert!(c.c_hat(j, m, 0) > BigRational::zero());
            prop_assert!(c.c_tilde(j, m) > BigRational::zero());
        }
    }

    #[test]
    fn sinh_dominates_rho(a in 0.0f64..3.0, w in 0.01f64..3.0) {
        prop_assert!(min_sh_sq_minus_rho_sq(a, a + w) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn model_laplacians_are_symmetric(a in 0.3f64..1.5, w in 0.5f64..1.5, k in 4u32..8, n in 2u32..8, hyperbolic in any::<bool>()) {
        let space = if hyperbolic { ModelSpace::Hyperbolic(n) } else { ModelSpace::Euclidean(n) };
        let b = a + w;
        let x = ProfileExpr::polybump(a, b, k);
        let y = ProfileExpr::polybump(a, b, k + 1).mul(&ProfileExpr::var());
        prop_assert!(adjointness_gap(space, &x, &y, a, b).unwrap() <= 1e-9);
        if hyperbolic {
            prop_assert!(ipp_gap(n, &x, &y, a, b).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn tower_levels_are_consistent(p in -3.0f64..0.5, n in 3u32..10, hyperbolic in any::<bool>()) {
        let space = if hyperbolic { ModelSpace::Hyperbolic(n) } else { ModelSpace::Euclidean(n) };
        let tower = OperatorTower::new(space, &ProfileExpr::power(p), 3);
        prop_assert!(tower.consistency_error(0.5, 2.0, 20) <= 1e-10);
    }

    #[test]
    fn quadrature_is_additive(c in -2.0f64..2.0, freq in 0.5f64..6.0, a in -2.0f64..0.0, w in 0.5f64..4.0, split in 0.05f64..0.95) {
        let f = |x: f64| (c * x).exp() * (freq * x).sin() + 1.5;
        let b = a + w;
        let mid = a + split * w;
        let whole = integrate_adaptive(f, a, b, 0.0, 1e-15).unwrap().value;
        let parts = integrate_adaptive(f, a, mid, 0.0, 1e-15).unwrap().value + integrate_adaptive(f, mid, b, 0.0, 1e-15).unwrap().value;
        prop_assert!((whole - parts).abs() <= 1e-13 * whole.abs());
    }

    #[test]
    fn minimum_bounds_every_rayleigh_quotient(
        n in 3u32..7, ell in 0u32..3, rellich in any::<bool>(), centre in -2.0f64..2.0, width in 0.5f64..3.0, wobble in -0.5f64..0.5,
    ) {
        let target = if rellich { Target::Rellich } else { Target::Grad };
        let grid = RadialGrid::symmetric(6.0, 256).unwrap();
        let pair = assemble_forms(n, 0.0, ell, grid, target).unwrap();
        let lambda = smallest_generalized_eigenvalue(&pair).unwrap().value;
        let x = pair.sample(|r| {
            let s = (r.ln() - centre) / width;
            if s.abs() < 1.0 { (1.0 - s * s).powi(4) * (1.0 + wobble * s) } else { 0.0 }
        });
        prop_assume!(x.iter().any(|v| *v != 0.0));
        let q = pair.rayleigh_quotient(&x);
        prop_assert!(q >= lambda - 1e-8 * lambda.abs().max(1.0), "{q} < {lambda}");
    }
}
