//! Weighted identities on radial model spaces.
//!
//! Everything here is radial: the weight `V`, the positive profile `f` and
//! the test function `u` are [`ProfileExpr`]s in the radial coordinate, the
//! operators act through the model-space Laplacian `g'' + (s'/s) g'`, and
//! integrals are taken against the volume density `s` by adaptive
//! quadrature.
//!
//! `D_j` is `Δ^{j/2}` for even `j` and `∇Δ^{(j-1)/2}` for odd `j`; for radial
//! functions `|D_j u|` is a one-dimensional quantity.

use std::fmt;

use serde::Serialize;

use crate::profile::{CompactProfile, Func, ProfileExpr, Tape};
use crate::quadrature::{integrate_scaled, QuadratureError};
use crate::report::{CheckKind, Params, ResidualReport, Terms};

/// Identity tolerance for quadrature-backed checks.
pub const MANIFOLD_TOL: f64 = 1e-8;

/// Per-integral relative quadrature tolerance.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Highest order accepted by [`check_hrv`].
pub const MAX_ORDER: u32 = 5;

/// Sample count of the sign scans.
pub const SCAN_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "n")]
pub enum ModelSpace {
    Euclidean(u32),
    Hyperbolic(u32),
}

impl fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Euclidean(n) => write!(f, "R^{n}"),
            Self::Hyperbolic(n) => write!(f, "H^{n}"),
        }
    }
}

impl ModelSpace {
    pub fn dim(self) -> u32 {
        match self {
            Self::Euclidean(n) | Self::Hyperbolic(n) => n,
        }
    }

    fn radius(self) -> ProfileExpr {
        match self {
            Self::Euclidean(_) => ProfileExpr::var(),
            Self::Hyperbolic(_) => ProfileExpr::var().apply(Func::Sinh),
        }
    }

    /// Volume density `r^{n-1}` or `sh^{n-1} ρ`.
    pub fn density(self) -> ProfileExpr {
        self.radius().powf(f64::from(self.dim()) - 1.0)
    }

    pub fn density_at(self, t: f64) -> f64 {
        let e = f64::from(self.dim()) as i32 - 1;
        match self {
            Self::Euclidean(_) => t.powi(e),
            Self::Hyperbolic(_) => t.sinh().powi(e),
        }
    }

    /// `s'/s`: `(n-1)/r` or `(n-1) coth ρ`.
    pub fn drift(self) -> ProfileExpr {
        let c = ProfileExpr::constant(f64::from(self.dim()) - 1.0);
        match self {
            Self::Euclidean(_) => c.div(&ProfileExpr::var()),
            Self::Hyperbolic(_) => c.mul(&ProfileExpr::var().apply(Func::Coth)),
        }
    }

    /// Radial Laplacian `g'' + (s'/s) g'`.
    pub fn laplacian(self, g: &ProfileExpr) -> ProfileExpr {
        let d1 = g.derivative(1);
        d1.derivative(1).add(&self.drift().mul(&d1))
    }

    /// `div(V ∇g) = (V g')' + (s'/s) V g'`.
    pub fn div_weighted_grad(self, v: &ProfileExpr, g: &ProfileExpr) -> ProfileExpr {
        let flux = v.mul(&g.derivative(1));
        flux.derivative(1).add(&self.drift().mul(&flux))
    }

    /// `(s g')'/s`, the Laplacian assembled through the density.
    fn laplacian_density_form(self, g: &ProfileExpr) -> ProfileExpr {
        let s = self.density();
        s.mul(&g.derivative(1)).derivative(1).div(&s)
    }
}

/// `Δ^ℓ f` and `∂Δ^ℓ f` for `ℓ = 0..=top`.
#[derive(Debug, Clone)]
pub struct OperatorTower {
    space: ModelSpace,
    levels: Vec<ProfileExpr>,
    grads: Vec<ProfileExpr>,
}

impl OperatorTower {
    pub fn new(space: ModelSpace, base: &ProfileExpr, top: u32) -> Self {
        let mut levels = vec![base.clone()];
        for _ in 0..top {
            let next = space.laplacian(levels.last().expect("nonempty"));
            levels.push(next);
        }
        let grads = levels.iter().map(|g| g.derivative(1)).collect();
        Self { space, levels, grads }
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn top(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    pub fn level(&self, l: u32) -> &ProfileExpr {
        &self.levels[l as usize]
    }

    pub fn grad(&self, l: u32) -> &ProfileExpr {
        &self.grads[l as usize]
    }

    /// `D_j`.
    pub fn d(&self, j: u32) -> &ProfileExpr {
        if j % 2 == 0 {
            self.level(j / 2)
        } else {
            self.grad(j / 2)
        }
    }

    /// Largest relative disagreement between entry `ℓ+1` and the Laplacian
    /// of entry `ℓ` assembled in density form, over `samples` points of
    /// `[a, b]`.
    pub fn consistency_error(&self, a: f64, b: f64, samples: usize) -> f64 {
        let mut worst = 0.0f64;
        for w in self.levels.windows(2) {
            let other = self.space.laplacian_density_form(&w[0]);
            let (x, y) = (Tape::new(&w[1]), Tape::new(&other));
            for t in sample_points(a, b, samples) {
                let (p, q) = (x.eval(t), y.eval(t));
                let scale = p.abs().max(q.abs()).max(f64::MIN_POSITIVE);
                worst = worst.max((p - q).abs() / scale);
            }
        }
        worst
    }
}

/// `count` points strictly inside `[a, b]`.
pub fn sample_points(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    let h = (b - a) / count as f64;
    (0..count).map(move |i| a + h * (i as f64 + 0.5))
}

/// Sign of `g` on `[a, b]` if it keeps one strict sign at every scan point.
pub fn constant_sign(g: &ProfileExpr, a: f64, b: f64) -> Option<f64> {
    let tape = Tape::new(g);
    let mut sign = None;
    for t in sample_points(a, b, SCAN_POINTS).chain([a, 0.5 * (a + b), b]) {
        let v = tape.eval(t);
        if !(v.is_finite() && v != 0.0) {
            return None;
        }
        match sign {
            None => sign = Some(v.signum()),
            Some(s) if s != v.signum() => return None,
            _ => {}
        }
    }
    sign
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("singular sample at t = {t}")]
pub struct SingularSample {
    pub t: f64,
}

/// Bessel weight `W = -div(V ∇f)/f = -(V/f)[f'' + (s'/s + V'/V) f']`.
pub fn bessel_weight(v: &ProfileExpr, f: &ProfileExpr, space: ModelSpace) -> ProfileExpr {
    space.div_weighted_grad(v, f).div(f).neg()
}

/// Values of `w` at `count` points of `[a, b]`, failing on the first
/// non-finite sample.
pub fn sample_profile(w: &ProfileExpr, a: f64, b: f64, count: usize) -> Result<Vec<(f64, f64)>, SingularSample> {
    let tape = Tape::new(w);
    sample_points(a, b, count)
        .map(|t| {
            let y = tape.eval(t);
            if y.is_finite() {
                Ok((t, y))
            } else {
                Err(SingularSample { t })
            }
        })
        .collect()
}

/// Integrals of several integrands built from one tape over the support.
pub(crate) struct Integrals {
    tape: Tape,
    a: f64,
    b: f64,
    width: usize,
}

impl Integrals {
    /// The first output of the tape is always the density.
    pub(crate) fn new(space: ModelSpace, exprs: &[ProfileExpr], a: f64, b: f64) -> Self {
        let mut all = vec![space.density()];
        all.extend_from_slice(exprs);
        Self { tape: Tape::many(&all), a, b, width: all.len() }
    }

    /// `∫ g(values) s dt`, where `values[i]` is expression `i` at `t`.
    pub(crate) fn integrate(&self, g: impl Fn(&[f64]) -> f64) -> Result<f64, QuadratureError> {
        let mut scratch = Vec::with_capacity(self.tape.len());
        let mut out = vec![0.0; self.width];
        let integrand = |t: f64| {
            self.tape.eval_into(t, &mut scratch, &mut out);
            g(&out[1..]) * out[0]
        };
        Ok(integrate_scaled(integrand, self.a, self.b, QUADRATURE_TOL)?.value)
    }
}

/// Collects expressions for one [`Integrals`] and hands out their slots.
#[derive(Default)]
pub(crate) struct Slots(pub(crate) Vec<ProfileExpr>);

impl Slots {
    pub(crate) fn push(&mut self, e: &ProfileExpr) -> usize {
        self.0.push(e.clone());
        self.0.len() - 1
    }
}

fn label(space: ModelSpace, v: &ProfileExpr, f: &ProfileExpr, u: &CompactProfile) -> String {
    format!("{space}; V={v}; f={f}; u on [{}, {}]", u.a, u.b)
}

fn params(space: ModelSpace, k: u32, v: &ProfileExpr, f: &ProfileExpr, u: &CompactProfile) -> Params {
    let p = Params::new().n(space.dim()).k(k).f(label(space, v, f, u));
    match space {
        ModelSpace::Euclidean(_) => p,
        ModelSpace::Hyperbolic(_) => p.extra("hyperbolic", 1.0),
    }
}

fn quadrature_failure(id: &str, kind: CheckKind, p: Params, e: QuadratureError) -> ResidualReport {
    ResidualReport::failed(id, kind, p, format!("quadrature: {e}"))
}

/// `∫V|∇u|² = -∫(div(V∇f)/f) u² + ∫V|∇u - (u/f)∇f|²`.
pub fn check_hy_equa1(v: &ProfileExpr, f: &ProfileExpr, u: &CompactProfile, space: ModelSpace) -> ResidualReport {
    let p = params(space, 1, v, f, u);
    if constant_sign(f, u.a, u.b).is_none() {
        return ResidualReport::failed("HYequa1", CheckKind::Identity, p, "f vanishes on the support of u");
    }
    let mut s = Slots::default();
    let (iv, iu, idu) = (s.push(v), s.push(&u.expr), s.push(&u.expr.derivative(1)));
    let (i_f, idf) = (s.push(f), s.push(&f.derivative(1)));
    let iw = s.push(&bessel_weight(v, f, space));
    let q = Integrals::new(space, &s.0, u.a, u.b);
    let run = || -> Result<(f64, Terms), QuadratureError> {
        let lhs = q.integrate(|x| x[iv] * x[idu] * x[idu])?;
        let terms = Terms::new()
            .with("potential", q.integrate(|x| x[iw] * x[iu] * x[iu])?)
            .with("remainder", q.integrate(|x| x[iv] * (x[idu] - x[iu] / x[i_f] * x[idf]).powi(2))?);
        Ok((lhs, terms))
    };
    match run() {
        Ok((lhs, terms)) => ResidualReport::identity("HYequa1", p, lhs, terms, MANIFOLD_TOL).check_finite(),
        Err(e) => quadrature_failure("HYequa1", CheckKind::Identity, p, e),
    }
}

/// `Φ_j = D_j^*(V D_k f)` for `j ≡ k (mod 2)`, `j ≤ k`, indexed by `j / 2`.
fn phis(space: ModelSpace, v: &ProfileExpr, f: &OperatorTower, k: u32) -> Vec<ProfileExpr> {
    let m = k / 2;
    if k % 2 == 0 {
        OperatorTower::new(space, &v.mul(f.level(m)), m).levels
    } else {
        let h = space.div_weighted_grad(v, f.level(m));
        OperatorTower::new(space, &h, m).levels.iter().map(ProfileExpr::neg).collect()
    }
}

/// Order-`k` identity for `D_k` with weight `V`:
///
/// ```text
/// ∫V|D_k u|² = ∫(Φ_k/f) u²
///            - 2 Σ_{2ℓ≤k-2} ∫(Φ_{k-2-2ℓ}/Δ^ℓf) |∇Δ^ℓu - (Δ^ℓu/Δ^ℓf) ∇Δ^ℓf|²
///            + Σ_{1≤ℓ, 2ℓ≤k-1} ∫(Φ_{k-2ℓ}/Δ^ℓf) (Δ^ℓu - (Δ^{ℓ-1}u/Δ^{ℓ-1}f) Δ^ℓf)²
///            + ∫V |D_k u - (D_{2q}u/D_{2q}f) D_k f|²,     q = ⌊(k-1)/2⌋
/// ```
///
/// with `Φ_j = D_j^*(V D_k f)`. The case is skipped when some `Δ^ℓ f`,
/// `ℓ ≤ q`, changes sign or vanishes on the support of `u`. For `V ≡ 1` the
/// right side is also assembled from the powers `(-Δ)^j f` directly and the
/// two assemblies must agree.
pub fn check_hrv(k: u32, v: &ProfileExpr, f: &ProfileExpr, u: &CompactProfile, space: ModelSpace) -> ResidualReport {
    let p = params(space, k, v, f, u);
    if k == 0 || k > MAX_ORDER {
        return ResidualReport::skipped("HRV", CheckKind::Identity, p, format!("order {k} outside 1..={MAX_ORDER}"));
    }
    let q = (k - 1) / 2;
    let unit = v.is_const(1.0);
    let ft = OperatorTower::new(space, f, if unit { k } else { k.div_ceil(2) });
    for l in 0..=q {
        if constant_sign(ft.level(l), u.a, u.b).is_none() {
            return ResidualReport::skipped("HRV", CheckKind::Identity, p, format!("Delta^{l} f vanishes or changes sign on the support"));
        }
    }
    let ut = OperatorTower::new(space, &u.expr, k.div_ceil(2));
    let phi = phis(space, v, &ft, k);

    let mut s = Slots::default();
    let iv = s.push(v);
    let iu: Vec<_> = (0..=ut.top()).map(|l| s.push(ut.level(l))).collect();
    let igu: Vec<_> = (0..=ut.top()).map(|l| s.push(ut.grad(l))).collect();
    let i_f: Vec<_> = (0..=ft.top()).map(|l| s.push(ft.level(l))).collect();
    let igf: Vec<_> = (0..=ft.top()).map(|l| s.push(ft.grad(l))).collect();
    let iphi: Vec<_> = phi.iter().map(|e| s.push(e)).collect();
    let integrals = Integrals::new(space, &s.0, u.a, u.b);
    // slot of D_j for the u and f towers
    let du = |j: u32| if j % 2 == 0 { iu[(j / 2) as usize] } else { igu[(j / 2) as usize] };
    let df = |j: u32| if j % 2 == 0 { i_f[(j / 2) as usize] } else { igf[(j / 2) as usize] };
    let ph = |j: u32| iphi[(j / 2) as usize];

    let run = || -> Result<(f64, Terms, Option<f64>), QuadratureError> {
        let (dk_u, dk_f, dq_u, dq_f) = (du(k), df(k), du(2 * q), df(2 * q));
        let lhs = integrals.integrate(|x| x[iv] * x[dk_u] * x[dk_u])?;
        let mut terms = Terms::new();
        let (pk, u0, f0) = (ph(k), iu[0], i_f[0]);
        terms.push("potential", integrals.integrate(|x| x[pk] / x[f0] * x[u0] * x[u0])?);
        let mut grad_parts = Vec::new();
        let mut level_parts = Vec::new();
        for l in (0..).take_while(|l| 2 * l + 2 <= k) {
            let (c, lu, gu, lf, gf) = (ph(k - 2 - 2 * l), iu[l as usize], igu[l as usize], i_f[l as usize], igf[l as usize]);
            let sq = move |x: &[f64]| (x[gu] - x[lu] / x[lf] * x[gf]).powi(2);
            let value = integrals.integrate(|x| -2.0 * x[c] / x[lf] * sq(x))?;
            terms.push(format!("grad_l{l}"), value);
            grad_parts.push(integrals.integrate(|x| sq(x))?);
        }
        for l in (1..).take_while(|l| 2 * l < k) {
            let (c, lu, pu, lf, pf) = (ph(k - 2 * l), iu[l as usize], iu[l as usize - 1], i_f[l as usize], i_f[l as usize - 1]);
            let sq = move |x: &[f64]| (x[lu] - x[pu] / x[pf] * x[lf]).powi(2);
            terms.push(format!("level_l{l}"), integrals.integrate(|x| x[c] / x[lf] * sq(x))?);
            level_parts.push(integrals.integrate(|x| sq(x))?);
        }
        terms.push(
            "remainder",
            integrals.integrate(|x| x[iv] * (x[dk_u] - x[dq_u] / x[dq_f] * x[dk_f]).powi(2))?,
        );
        // the same right side through the powers of -Δ when V ≡ 1
        let unit_rhs = if unit {
            let neg = |x: &[f64], j: u32| if j % 2 == 0 { x[i_f[j as usize]] } else { -x[i_f[j as usize]] };
            let mut total = integrals.integrate(|x| neg(x, k) / x[f0] * x[u0] * x[u0])?;
            for l in (0..).take_while(|l| 2 * l + 2 <= k) {
                let (lu, gu, lf, gf) = (iu[l as usize], igu[l as usize], i_f[l as usize], igf[l as usize]);
                total += integrals.integrate(|x| {
                    2.0 * neg(x, k - 1 - l) / neg(x, l) * (x[gu] - x[lu] / x[lf] * x[gf]).powi(2)
                })?;
            }
            for l in (1..).take_while(|l| 2 * l < k) {
                let (lu, pu, lf, pf) = (iu[l as usize], iu[l as usize - 1], i_f[l as usize], i_f[l as usize - 1]);
                total += integrals.integrate(|x| neg(x, k - l) / neg(x, l) * (x[lu] - x[pu] / x[pf] * x[lf]).powi(2))?;
            }
            total += terms.get("remainder").unwrap_or(0.0);
            Some(total)
        } else {
            None
        };
        Ok((lhs, terms, unit_rhs))
    };
    match run() {
        Ok((lhs, terms, unit_rhs)) => {
            let scale: f64 = terms.iter().map(|(_, v)| v.abs()).sum();
            let rhs = terms.sum();
            let mut report = ResidualReport::identity("HRV", p, lhs, terms, MANIFOLD_TOL).with_scale(scale).check_finite();
            if let Some(alt) = unit_rhs {
                report = report.require("unit_weight_form", rhs, alt, MANIFOLD_TOL);
            }
            report
        }
        Err(e) => quadrature_failure("HRV", CheckKind::Identity, p, e),
    }
}

/// `∫|D_k u|² ≥ ∫((-Δ)^k f/f) u²` whenever `(-Δ)^ℓ f > 0` on the support
/// of `u` for `ℓ < k`; skipped otherwise.
pub fn probe_corollary15(k: u32, f: &ProfileExpr, u: &CompactProfile, space: ModelSpace) -> ResidualReport {
    let one = ProfileExpr::constant(1.0);
    let p = params(space, k, &one, f, u);
    if k == 0 || k > MAX_ORDER {
        return ResidualReport::skipped("iHRV2k", CheckKind::Inequality, p, format!("order {k} outside 1..={MAX_ORDER}"));
    }
    let ft = OperatorTower::new(space, f, k);
    for l in 0..k {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        if constant_sign(ft.level(l), u.a, u.b) != Some(sign) {
            return ResidualReport::skipped("iHRV2k", CheckKind::Inequality, p, format!("(-Delta)^{l} f is not positive on the support"));
        }
    }
    let ut = OperatorTower::new(space, &u.expr, k.div_ceil(2));
    let mut s = Slots::default();
    let (idk, iu, i_f, ifk) = (s.push(ut.d(k)), s.push(&u.expr), s.push(f), s.push(ft.level(k)));
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let q = Integrals::new(space, &s.0, u.a, u.b);
    let run = || -> Result<(f64, f64), QuadratureError> {
        Ok((
            q.integrate(|x| x[idk] * x[idk])?,
            q.integrate(|x| sign * x[ifk] / x[i_f] * x[iu] * x[iu])?,
        ))
    };
    match run() {
        Ok((lhs, weighted)) => {
            let terms = Terms::new().with("weighted", weighted);
            ResidualReport::inequality("iHRV2k", p, lhs, terms, MANIFOLD_TOL)
                .with_diagnostic("slack", lhs - weighted)
                .check_finite()
        }
        Err(e) => quadrature_failure("iHRV2k", CheckKind::Inequality, p, e),
    }
}

/// Relative gap in `∫(Δx) y s = ∫x (Δy) s` for profiles supported in `[a, b]`.
pub fn adjointness_gap(space: ModelSpace, x: &ProfileExpr, y: &ProfileExpr, a: f64, b: f64) -> Result<f64, QuadratureError> {
    let exprs = [space.laplacian(x), y.clone(), x.clone(), space.laplacian(y)];
    let q = Integrals::new(space, &exprs, a, b);
    let left = q.integrate(|v| v[0] * v[1])?;
    let right = q.integrate(|v| v[2] * v[3])?;
    let scale = q.integrate(|v| (v[0] * v[1]).abs())? + q.integrate(|v| (v[2] * v[3]).abs())?;
    Ok((left - right).abs() / scale.max(f64::MIN_POSITIVE))
}

/// The general-weight acceptance cases: `(k, space, f)` with `V ≡ 1`.
pub fn standard_cases() -> Vec<(u32, ModelSpace, ProfileExpr)> {
    vec![
        (2, ModelSpace::Euclidean(12), ProfileExpr::power(-4.0)),
        (3, ModelSpace::Euclidean(8), ProfileExpr::power(-1.5)),
        (4, ModelSpace::Euclidean(12), ProfileExpr::power(-4.0)),
        (1, ModelSpace::Hyperbolic(5), ProfileExpr::var().scale(-2.0).apply(Func::Exp)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> CompactProfile {
        CompactProfile::bump(1.0, 2.0, 8).unwrap()
    }

    fn one() -> ProfileExpr {
        ProfileExpr::constant(1.0)
    }

    #[test]
    fn bessel_weight_of_the_hardy_pair() {
        let w = bessel_weight(&one(), &ProfileExpr::power(-1.5), ModelSpace::Euclidean(5));
        for (t, y) in sample_profile(&w, 0.5, 3.0, 20).unwrap() {
            assert!((y - 2.25 / (t * t)).abs() < 1e-13 * y, "{t} {y}");
        }
        let alpha = 1.5;
        let n = 7.0;
        let v = ProfileExpr::power(-alpha);
        let f = ProfileExpr::power(-(n - 2.0 - alpha) / 2.0);
        let w = bessel_weight(&v, &f, ModelSpace::Euclidean(7));
        let c = ((n - 2.0 - alpha) / 2.0).powi(2);
        for (t, y) in sample_profile(&w, 0.5, 3.0, 20).unwrap() {
            let expect = c * t.powf(-alpha - 2.0);
            assert!((y - expect).abs() < 1e-12 * expect, "{t} {y} {expect}");
        }
        let w = bessel_weight(&one(), &ProfileExpr::constant(3.0), ModelSpace::Hyperbolic(4));
        assert!(w.is_const(0.0));
        let singular = bessel_weight(&one(), &ProfileExpr::var().sub(&ProfileExpr::constant(1.5)), ModelSpace::Euclidean(3));
        assert!(sample_profile(&singular, 1.0, 2.0, 1).is_err());
    }

    #[test]
    fn hy_equa1_cases() {
        let f = ProfileExpr::power(-1.0);
        let r = check_hy_equa1(&one(), &f, &bump(), ModelSpace::Euclidean(4));
        assert!(r.passed(), "{r:?}");
        // u a multiple of f under a wide cutoff: the remainder is small
        let u = CompactProfile::new(ProfileExpr::polybump(0.5, 4.0, 6).mul(&f), 0.5, 4.0).unwrap();
        let r = check_hy_equa1(&one(), &f, &u, ModelSpace::Euclidean(4));
        assert!(r.passed(), "{r:?}");
        let zero = CompactProfile::new(ProfileExpr::constant(0.0), 1.0, 2.0).unwrap();
        assert!(check_hy_equa1(&one(), &f, &zero, ModelSpace::Euclidean(4)).passed());
        let v = ProfileExpr::var().add(&ProfileExpr::constant(1.0));
        let r = check_hy_equa1(&v, &ProfileExpr::var().apply(Func::Cosh), &bump(), ModelSpace::Hyperbolic(3));
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn hrv_standard_cases() {
        for (k, space, f) in standard_cases() {
            let r = check_hrv(k, &one(), &f, &bump(), space);
            assert!(r.passed(), "{r:#?}");
            let c = probe_corollary15(k, &f, &bump(), space);
            assert!(c.passed() && c.slack() > 0.0, "{c:#?}");
        }
    }

    #[test]
    fn hrv_general_weight_and_odd_orders() {
        let v = ProfileExpr::power(-1.0);
        let f = ProfileExpr::power(-0.5);
        for k in 1..=MAX_ORDER {
            let r = check_hrv(k, &v, &f, &bump(), ModelSpace::Euclidean(6));
            assert!(r.passed(), "{r:#?}");
        }
        let f = ProfileExpr::var().scale(-1.0).apply(Func::Exp);
        let v = ProfileExpr::var().apply(Func::Cosh);
        for k in 1..=3 {
            let r = check_hrv(k, &v, &f, &bump(), ModelSpace::Hyperbolic(4));
            assert!(r.passed(), "{r:#?}");
        }
    }

    #[test]
    fn hrv_gates() {
        let f = ProfileExpr::var().sub(&ProfileExpr::constant(1.5));
        let r = check_hrv(2, &one(), &f, &bump(), ModelSpace::Euclidean(5));
        assert_eq!(r.status, crate::report::Status::Skipped);
        // Δ r^{2} = 2n > 0, so -Δf < 0 and the corollary is gated off
        let r = probe_corollary15(2, &ProfileExpr::power(2.0), &bump(), ModelSpace::Euclidean(5));
        assert_eq!(r.status, crate::report::Status::Skipped);
        let zero = CompactProfile::new(ProfileExpr::constant(0.0), 1.0, 2.0).unwrap();
        let r = probe_corollary15(2, &ProfileExpr::power(-4.0), &zero, ModelSpace::Euclidean(12));
        assert!(r.passed() && r.slack() == 0.0);
    }

    #[test]
    fn tower_and_adjointness() {
        for space in [ModelSpace::Euclidean(5), ModelSpace::Hyperbolic(3)] {
            let t = OperatorTower::new(space, &ProfileExpr::var().scale(-2.0).apply(Func::Exp), 3);
            assert!(t.consistency_error(0.5, 3.0, 20) < 1e-10);
            let x = ProfileExpr::polybump(1.0, 2.0, 5);
            let y = ProfileExpr::polybump(1.0, 2.0, 4).mul(&ProfileExpr::var().apply(Func::Sinh));
            assert!(adjointness_gap(space, &x, &y, 1.0, 2.0).unwrap() < 1e-9);
        }
        // cosh ρ is an eigenfunction: Δ cosh = n cosh on H^n
        let t = OperatorTower::new(ModelSpace::Hyperbolic(4), &ProfileExpr::var().apply(Func::Cosh), 1);
        let x = 1.3f64;
        assert!((t.level(1).eval(x) - 4.0 * x.cosh()).abs() < 1e-12);
    }

    #[test]
    fn tower_matches_finite_differences() {
        let space = ModelSpace::Euclidean(3);
        let f = ProfileExpr::power(-1.5).mul(&ProfileExpr::var().apply(Func::Ln).add(&ProfileExpr::constant(2.0)));
        let t = OperatorTower::new(space, &f, 1);
        let h = 1e-4;
        for x in [0.7, 1.1, 2.5] {
            let (a, b, c) = (f.eval(x - h), f.eval(x), f.eval(x + h));
            let fd = (a - 2.0 * b + c) / (h * h) + 2.0 / x * (c - a) / (2.0 * h);
            let exact = t.level(1).eval(x);
            assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0));
        }
    }
}
