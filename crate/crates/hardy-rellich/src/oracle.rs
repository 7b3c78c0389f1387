//! Cross-validation of the closed-form moments against adaptive quadrature.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::families::rng;
use crate::quadrature::integrate_adaptive;
use crate::radial::{PiecewiseRadial, RadialPoly};

/// Agreement required between the two backends.
pub const ORACLE_TOL: f64 = 1e-10;

/// A random function with one to three pieces inside `[0.2, 6]`, each a sum
/// of up to four terms `c r^p (ln r)^q` with `|p| ≤ 3`, `q ≤ 3`.
pub fn random_piecewise(rng: &mut ChaCha8Rng) -> PiecewiseRadial {
    let count = rng.gen_range(1..=3);
    let mut cuts: Vec<f64> = (0..2 * count).map(|_| rng.gen_range(0.2..6.0)).collect();
    cuts.sort_by(f64::total_cmp);
    let pieces = cuts
        .chunks(2)
        .filter(|c| c[1] - c[0] > 1e-3)
        .map(|c| {
            let terms = (0..rng.gen_range(1..=4))
                .map(|_| {
                    // quarter-integer powers half of the time, to hit r^{-1} exactly now and then
                    let p = if rng.gen_bool(0.5) { f64::from(rng.gen_range(-12..=12)) / 4.0 } else { rng.gen_range(-3.0..3.0) };
                    (rng.gen_range(0.5..2.0), p, rng.gen_range(0..=3))
                })
                .collect::<Vec<_>>();
            (c[0], c[1], RadialPoly::from_terms(terms))
        })
        .collect();
    PiecewiseRadial::from_pieces(pieces).expect("pieces are sorted, disjoint and positive")
}

/// One closed-form versus quadrature comparison of `∫ x r^γ dr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub index: usize,
    pub gamma: f64,
    pub pieces: usize,
    pub closed_form: f64,
    pub quadrature: f64,
    pub rel_gap: f64,
    pub pass: bool,
}

/// Compares `count` random moments generated from `seed`.
pub fn cross_validate(count: usize, seed: u64) -> Vec<OracleRow> {
    let mut r = rng(seed);
    (0..count)
        .map(|index| {
            let x = random_piecewise(&mut r);
            let gamma = f64::from(r.gen_range(-8..=8)) / 4.0;
            let closed_form = crate::radial::integrate_moment(&x, gamma);
            let quadrature: f64 = x
                .pieces()
                .iter()
                .map(|p| {
                    let q = integrate_adaptive(|t| x.eval(t) * t.powf(gamma), p.a, p.b, 0.0, 1e-14)
                        .expect("pieces have finite positive endpoints");
                    q.value
                })
                .sum();
            let rel_gap = (closed_form - quadrature).abs() / closed_form.abs().max(f64::MIN_POSITIVE);
            OracleRow { index, gamma, pieces: x.pieces().len(), closed_form, quadrature, rel_gap, pass: rel_gap <= ORACLE_TOL }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backends_agree() {
        let rows = cross_validate(40, 3);
        for row in &rows {
            assert!(row.pass, "{row:?}");
        }
    }

    #[test]
    fn generation_is_seeded() {
        assert_eq!(cross_validate(5, 9), cross_validate(5, 9));
    }
}
