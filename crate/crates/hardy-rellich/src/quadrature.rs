//! Adaptive Gauss–Kronrod (7–15) integration.
//!
//! This is the independent oracle for the closed-form term algebra and the
//! only backend for hyperbolic and general-weight integrals.

use std::collections::BinaryHeap;

use serde::Serialize;

/// Kronrod abscissae on [-1, 1], from the QUADPACK `qk15` table.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Kronrod weights.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Gauss weights for the embedded 7-point rule (abscissae XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Maximum number of subintervals kept in the queue.
pub const MAX_SUBINTERVALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("integrand returned NaN at x = {x}")]
    NotANumber { x: f64 },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Roundoff floor of the error estimate; bisecting cannot go below it.
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if fc.is_nan() {
        return Err(QuadratureError::NotANumber { x: center });
    }
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if f1.is_nan() {
            return Err(QuadratureError::NotANumber { x: x1 });
        }
        if f2.is_nan() {
            return Err(QuadratureError::NotANumber { x: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Ok(Panel { a, b, value, error, floor })
}

/// Integrates `f` over `[a, b]` until the global error estimate drops below
/// `max(abs_tol, rel_tol * |value|)`, bisecting the worst panel first.
///
/// Panels whose estimate sits at the roundoff floor are not bisected
/// further; if only such panels remain the result counts as converged.
/// Non-convergence within [`MAX_SUBINTERVALS`] panels is reported through
/// `converged = false` together with the best estimate.
///
/// ```
/// use hardy_rellich::quadrature::integrate_adaptive;
/// let q = integrate_adaptive(|x| x * x, 0.0, 1.0, 1e-14, 1e-14).unwrap();
/// assert!((q.value - 1.0 / 3.0).abs() < 1e-15 && q.converged);
/// ```
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::InvalidInterval { a, b });
    }
    let first = kronrod_panel(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(QuadratureResult { value, error_estimate: error, evaluations, converged: true });
        }
        if heap.len() >= MAX_SUBINTERVALS {
            break;
        }
        let worst = heap.pop().expect("queue never empties");
        if worst.error <= worst.floor {
            heap.push(worst);
            let value: f64 = heap.iter().map(|p| p.value).sum();
            let error: f64 = heap.iter().map(|p| p.error).sum();
            return Ok(QuadratureResult { value, error_estimate: error, evaluations, converged: true });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // interval exhausted at machine resolution
            heap.push(worst);
            break;
        }
        let left = kronrod_panel(&mut f, worst.a, mid)?;
        let right = kronrod_panel(&mut f, mid, worst.b)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // recompute sums from scratch to shed accumulated drift
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    let converged = error <= abs_tol.max(rel_tol * value.abs());
    Ok(QuadratureResult { value, error_estimate: error, evaluations, converged })
}

/// Integrates with a tolerance scaled to the size of `|f|`.
///
/// A coarse pass estimates `∫|f|`; the absolute tolerance becomes
/// `rel_tol` times that scale, which keeps signed integrands with small
/// results from chasing unreachable relative accuracy.
pub fn integrate_scaled<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    let panels = 8;
    let width = (b - a) / panels as f64;
    let mut scale = 0.0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let mut g = |x: f64| f(x).abs();
        scale += kronrod_panel(&mut g, lo, hi)?.value;
    }
    let abs_tol = (rel_tol * scale).max(f64::MIN_POSITIVE);
    integrate_adaptive(f, a, b, abs_tol, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_moments() {
        let q = integrate_adaptive(|x| x * x, 0.0, 1.0, 1e-15, 1e-15).unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 4.0 * f64::EPSILON, "{q:?}");
        assert!(q.converged);
    }

    #[test]
    fn logarithm() {
        let q = integrate_adaptive(f64::ln, 1.0, 2.0, 1e-15, 1e-15).unwrap();
        assert!((q.value - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn degree_thirteen_single_panel() {
        let f = |x: f64| 3.0 * x.powi(13) - x.powi(7) + 2.0;
        let p = kronrod_panel(&mut { f }, -1.0, 2.0).unwrap();
        let exact = 3.0 * (2f64.powi(14) - 1.0) / 14.0 - (2f64.powi(8) - 1.0) / 8.0 + 6.0;
        assert!((p.value - exact).abs() <= 1e-13 * exact.abs());
    }

    #[test]
    fn nan_aborts() {
        let err = integrate_adaptive(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, 1e-10, 1e-10);
        assert!(matches!(err, Err(QuadratureError::NotANumber { .. })));
    }

    #[test]
    fn non_convergence_flagged() {
        let q = integrate_adaptive(|x: f64| (1.0 / x).sin(), 1e-9, 1.0, 1e-300, 1e-300).unwrap();
        assert!(!q.converged);
    }

    #[test]
    fn bad_interval() {
        assert!(integrate_adaptive(|x| x, 1.0, 1.0, 1e-10, 1e-10).is_err());
    }
}
