//! Harmonic measures of real intervals and of the two sides of a slit.
//!
//! By conformal invariance the measure of a slit side seen from `f⁻¹(i, t)`
//! equals the measure, seen from `i`, of that side's image interval:
//! `[λ, f1]` for the right side and `[f2, λ]` for the left side.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{argument, Error, Result};
use crate::evolution::EvolutionResult;

/// `ω(z0; [a, b], ℍ)`: the angle subtended by `[a, b]` at `z0`, over `π`.
pub fn hm_interval(z0: Complex64, a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(argument(format!(
            "interval endpoints must satisfy a < b, got [{a}, {b}]"
        )));
    }
    if !(z0.im > 0.0) {
        return Err(argument(format!(
            "evaluation point must lie in the upper half-plane, got {z0}"
        )));
    }
    Ok(hm_interval_unchecked(z0, a, b))
}

#[inline]
pub(crate) fn hm_interval_unchecked(z0: Complex64, a: f64, b: f64) -> f64 {
    let upper = z0.im.atan2(z0.re - b);
    let lower = z0.im.atan2(z0.re - a);
    (upper - lower) / std::f64::consts::PI
}

/// Harmonic measures `(m1, m2)` of the right and left slit sides at node `j`,
/// evaluated at the preimage of `i`.
pub fn hm_slit_sides(result: &EvolutionResult, j: usize) -> Result<(f64, f64)> {
    if j == 0 || j >= result.len() {
        return Err(argument(format!(
            "node index {j} must lie in 1..{}",
            result.len()
        )));
    }
    let (f1, f2, lambda) = (result.f1[j], result.f2[j], result.lambda[j]);
    if !(f2 < lambda && lambda < f1) {
        return Err(Error::Consistency(format!(
            "ordering f2 < λ < f1 violated at node {j}: {f2}, {lambda}, {f1}"
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    Ok((
        hm_interval_unchecked(i, lambda, f1),
        hm_interval_unchecked(i, f2, lambda),
    ))
}

/// Harmonic measures of both sides over a set of times.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MeasureSeries {
    pub times: Vec<f64>,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl MeasureSeries {
    pub fn push(&mut self, t: f64, m1: f64, m2: f64) {
        self.times.push(t);
        self.m1.push(m1);
        self.m2.push(m2);
        self.ratio.push(m1 / m2);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Measure series at the given node indices of an evolution.
pub fn measure_series(result: &EvolutionResult, nodes: &[usize]) -> Result<MeasureSeries> {
    let mut series = MeasureSeries::default();
    for &j in nodes {
        let (m1, m2) = hm_slit_sides(result, j)?;
        series.push(result.times()[j], m1, m2);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::DrivingTerm;
    use crate::evolution::singular_solutions;
    use crate::mesh::TimeMesh;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    /// Composite Gauss–Legendre quadrature of the Poisson kernel.
    fn poisson_quadrature(z0: Complex64, a: f64, b: f64) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let kernel = |x: f64| z0.im / ((x - z0.re).powi(2) + z0.im * z0.im) / PI;
        let panels = 2000;
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let mid = a + (p as f64 + 0.5) * h;
                NODES
                    .iter()
                    .zip(WEIGHTS)
                    .map(|(x, w)| w * kernel(mid + 0.5 * h * x))
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum()
    }

    #[test]
    fn interval_examples() {
        assert_abs_diff_eq!(hm_interval(I, 0.0, 1.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(hm_interval(I, -1.0, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(hm_interval(I, -1e12, 1e12).unwrap(), 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(poisson_quadrature(I, 0.0, 1.0), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn interval_argument_errors() {
        assert!(hm_interval(I, 1.0, 1.0).is_err());
        assert!(hm_interval(I, 2.0, 1.0).is_err());
        assert!(hm_interval(Complex64::new(0.0, 0.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn zero_driver_sides_are_equal() {
        let mesh = TimeMesh::graded(0.25, 100, 2.0).unwrap();
        let r = singular_solutions(&DrivingTerm::zero(), &mesh).unwrap();
        for j in 1..r.len() {
            let (m1, m2) = hm_slit_sides(&r, j).unwrap();
            assert_abs_diff_eq!(m1, m2, epsilon = 1e-14);
        }
        let (m1, _) = hm_slit_sides(&r, 100).unwrap();
        assert_abs_diff_eq!(m1, 0.25, epsilon = 1e-12);
        assert!(hm_slit_sides(&r, 0).is_err());
        assert!(hm_slit_sides(&r, 101).is_err());
    }

    #[test]
    fn series_ratio_is_quotient() {
        let mesh = TimeMesh::graded(1.0, 200, 2.0).unwrap();
        let r = singular_solutions(&DrivingTerm::sqrt(1.0).unwrap(), &mesh).unwrap();
        let s = measure_series(&r, &[10, 50, 200]).unwrap();
        for k in 0..s.len() {
            assert_eq!(s.ratio[k], s.m1[k] / s.m2[k]);
            assert!(s.m1[k] > 0.0 && s.m2[k] > 0.0 && s.m1[k] + s.m2[k] < 1.0);
        }
    }

    #[test]
    fn quadrature_agreement_on_random_cases() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let z0 = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..2.0));
            let a = rng.gen_range(-3.0..3.0);
            let b = a + rng.gen_range(0.01..3.0);
            let closed = hm_interval(z0, a, b).unwrap();
            assert!((closed - poisson_quadrature(z0, a, b)).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn additivity(x in -3.0f64..3.0, y in 0.01f64..3.0, a in -5.0f64..5.0, l1 in 0.001f64..3.0, l2 in 0.001f64..3.0) {
            let z = Complex64::new(x, y);
            let (b, c) = (a + l1, a + l1 + l2);
            let lhs = hm_interval(z, a, b).unwrap() + hm_interval(z, b, c).unwrap();
            prop_assert!((lhs - hm_interval(z, a, c).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_the_interval(x in -3.0f64..3.0, y in 0.01f64..3.0, a in -5.0f64..5.0, l in 0.001f64..3.0, grow in 0.0f64..1.0) {
            let z = Complex64::new(x, y);
            let inner = hm_interval(z, a, a + l).unwrap();
            let outer = hm_interval(z, a - grow, a + l + grow).unwrap();
            prop_assert!(outer >= inner);
        }

        #[test]
        fn translation_and_scaling(x in -3.0f64..3.0, y in 0.05f64..3.0, a in -3.0f64..3.0, l in 0.01f64..3.0, s in -5.0f64..5.0, rho in 0.1f64..10.0) {
            let z = Complex64::new(x, y);
            let base = hm_interval(z, a, a + l).unwrap();
            let shifted = hm_interval(z + s, a + s, a + l + s).unwrap();
            let scaled = hm_interval(z * rho, rho * a, rho * (a + l)).unwrap();
            prop_assert!((base - shifted).abs() < 1e-12);
            prop_assert!((base - scaled).abs() < 1e-12);
        }
    }
}
