//! Vertical-slit zipper: the discrete inverse of the forward evolution.
//!
//! Step `k` maps the image `w_k` of vertex `k` to the real axis with the
//! elementary map of driving value `Re w_k` and capacity `(Im w_k)²/4`, then
//! pushes every later vertex through the same map. Feeding the resulting
//! sampled driver back into [`crate::evolution`] reproduces the same maps.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::curve::Curve;
use crate::driving::{DrivingTerm, SampledDriving};
use crate::error::{argument, Error, Result};
use crate::evolution::slit_map;
use crate::mesh::TimeMesh;

/// Largest `|c|` accepted for angled line fixtures.
pub const MAX_LINE_ANGLE_PARAM: f64 = 0.9;

/// Fixtures below their first quadratic vertex are refined geometrically
/// with this ratio down to [`FIXTURE_DEPTH`] of its arclength.
pub const FIXTURE_RATIO: f64 = 1.05;
pub const FIXTURE_DEPTH: f64 = 1e-8;

/// Zip a curve down to the real axis.
///
/// Returns the sampled driver (one step per vertex after the origin) and the
/// capacity mesh `t_k = Σ δ`.
pub fn compute_driving(curve: &Curve) -> Result<(DrivingTerm, TimeMesh)> {
    if curve.len() < 2 {
        return Err(argument("zipper needs a curve with at least 2 points"));
    }
    let mut images: Vec<Complex64> = curve.points()[1..].to_vec();
    let n = images.len();
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    times.push(0.0);
    values.push(0.0);
    let mut t = 0.0;
    for k in 0..n {
        let w = images[k];
        if !(w.im > 0.0) {
            return Err(Error::Geometry {
                index: k + 1,
                reason: format!("image {w} left the upper half-plane before its step"),
            });
        }
        let lambda = w.re;
        let delta = 0.25 * w.im * w.im;
        let next = t + delta;
        if !(next > t) {
            return Err(Error::Geometry {
                index: k + 1,
                reason: "capacity increment vanished in floating point".into(),
            });
        }
        t = next;
        times.push(t);
        values.push(lambda);
        for z in &mut images[k + 1..] {
            *z = slit_map(*z, lambda, delta);
        }
    }
    let driving = SampledDriving::from_parts(times, values)?;
    let mesh = driving.mesh();
    Ok((DrivingTerm::Sampled(driving), mesh))
}

/// Arclength fractions of the fixture vertices: `(k/n)²` for `k = k₀..=n`,
/// preceded by a geometric run of ratio [`FIXTURE_RATIO`] from
/// `FIXTURE_DEPTH·(k₀/n)²` up to `(k₀/n)²`, where `k₀` is the first `k` at
/// which consecutive quadratic steps grow by less than that ratio.
///
/// With purely quadratic grading the capacity grows like `k⁴` and the first
/// zipper steps are too coarse for the singular solutions to stay attached to
/// a tilted slit.
pub fn fixture_grid(n: usize) -> Vec<f64> {
    let k0 = ((FIXTURE_RATIO.sqrt() - 1.0).recip().ceil() as usize).min(n);
    let quadratic = |k: usize| {
        let u = k as f64 / n as f64;
        u * u
    };
    let first = quadratic(k0);
    let levels = (FIXTURE_DEPTH.recip().ln() / FIXTURE_RATIO.ln()).ceil() as i32;
    let mut grid = vec![0.0];
    grid.extend((1..=levels).rev().map(|i| first * FIXTURE_RATIO.powi(-i)));
    grid.extend((k0..=n).map(quadratic));
    grid
}

/// Circular arc `γ(θ) = r(1 − e^{−iθ})`, leaving the origin vertically and
/// bending right, sampled at `θ = θ_max·σ` over [`fixture_grid`].
pub fn make_arc_curve(radius: f64, max_angle: f64, n: usize) -> Result<Curve> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(argument(format!(
            "arc radius must be positive, got {radius}"
        )));
    }
    if !(max_angle > 0.0 && max_angle <= FRAC_PI_2) {
        return Err(argument(format!(
            "arc angle must lie in (0, π/2], got {max_angle}"
        )));
    }
    if n < 2 {
        return Err(argument("arc needs n >= 2"));
    }
    let points = fixture_grid(n)
        .into_iter()
        .map(|sigma| {
            let theta = max_angle * sigma;
            let half = (0.5 * theta).sin();
            Complex64::new(2.0 * radius * half * half, radius * theta.sin())
        })
        .collect();
    Curve::new(points)
}

/// Segment from the origin at angle `(π/2)(1 − c)` to the real axis, graded
/// in arclength by [`fixture_grid`].
pub fn make_line_curve(c_angle: f64, length: f64, n: usize) -> Result<Curve> {
    if !(c_angle.abs() < MAX_LINE_ANGLE_PARAM) {
        return Err(argument(format!(
            "line angle parameter must satisfy |c| < {MAX_LINE_ANGLE_PARAM}, got {c_angle}"
        )));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(argument(format!(
            "line length must be positive, got {length}"
        )));
    }
    if n < 2 {
        return Err(argument("line needs n >= 2"));
    }
    let half = FRAC_PI_2 * c_angle;
    let direction = Complex64::new(half.sin(), half.cos());
    let points = fixture_grid(n)
        .into_iter()
        .map(|sigma| direction * (length * sigma))
        .collect();
    Curve::new(points)
}

/// Vertical segment `[0, i·h]` with `n` equal pieces.
pub fn make_vertical_curve(height: f64, n: usize) -> Result<Curve> {
    if !(height > 0.0) || n < 1 {
        return Err(argument(
            "vertical segment needs positive height and n >= 1",
        ));
    }
    Curve::new(
        (0..=n)
            .map(|k| Complex64::new(0.0, height * k as f64 / n as f64))
            .collect(),
    )
}

/// Pairs `(t_k, s_k)` of capacity time and polyline arclength at each vertex.
pub fn arclength_profile(curve: &Curve, mesh: &TimeMesh) -> Result<Vec<(f64, f64)>> {
    if curve.len() != mesh.nodes().len() {
        return Err(argument(format!(
            "curve has {} vertices but mesh has {} nodes",
            curve.len(),
            mesh.nodes().len()
        )));
    }
    Ok(mesh
        .nodes()
        .iter()
        .copied()
        .zip(curve.arclength().iter().copied())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn samples(term: &DrivingTerm) -> &SampledDriving {
        match term {
            DrivingTerm::Sampled(s) => s,
            _ => panic!("zipper must return a sampled driver"),
        }
    }

    #[test]
    fn vertical_segment_has_zero_driver() {
        let h = 1.5;
        let curve = make_vertical_curve(h, 100).unwrap();
        let (term, mesh) = compute_driving(&curve).unwrap();
        assert!(samples(&term).values().iter().all(|&v| v == 0.0));
        assert_abs_diff_eq!(mesh.end(), h * h / 4.0, epsilon = 1e-12);
        let profile = arclength_profile(&curve, &mesh).unwrap();
        for (t, s) in profile {
            assert_abs_diff_eq!(s, 2.0 * t.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn arc_fixture_geometry() {
        let curve = make_arc_curve(1.0, FRAC_PI_2, 10_000).unwrap();
        let d = curve.points()[1] - curve.points()[0];
        assert!((d.arg() - FRAC_PI_2).abs() < 1e-2);
        assert_abs_diff_eq!(
            (curve.tip() - Complex64::new(1.0, 1.0)).norm(),
            0.0,
            epsilon = 1e-12
        );
        assert!((curve.length() - FRAC_PI_2).abs() < 1e-6 * FRAC_PI_2);
    }

    #[test]
    fn line_fixture_geometry() {
        let v = make_line_curve(0.0, 1.0, 10).unwrap();
        assert_eq!(v.tip(), Complex64::new(0.0, 1.0));
        let r = make_line_curve(0.5, 1.0, 10).unwrap();
        let expected = Complex64::new(1.0, 1.0) / 2f64.sqrt();
        assert_abs_diff_eq!((r.tip() - expected).norm(), 0.0, epsilon = 1e-15);
        let l = make_line_curve(-0.5, 1.0, 10).unwrap();
        assert_abs_diff_eq!(
            (l.tip() - Complex64::new(-1.0, 1.0) / 2f64.sqrt()).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert!((l.tip().arg() - 3.0 * PI / 4.0).abs() < 1e-14);
        assert!(make_line_curve(0.9, 1.0, 10).is_err());
        assert!(make_line_curve(-0.95, 1.0, 10).is_err());
    }

    #[test]
    fn capacity_is_positive_and_increasing() {
        let curve = make_arc_curve(1.0, 0.5, 500).unwrap();
        let (_, mesh) = compute_driving(&curve).unwrap();
        assert!(mesh.steps().all(|d| d > 0.0));
    }

    #[test]
    fn fixture_grid_layout() {
        let g = fixture_grid(10);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.windows(2).all(|p| p[1] > p[0]));
        assert!(g[1] <= FIXTURE_DEPTH * FIXTURE_RATIO);
        assert!(g[2..]
            .windows(2)
            .all(|p| p[1] / p[0] <= FIXTURE_RATIO * (1.0 + 1e-12)));
        let fine = fixture_grid(1000);
        assert!(fine
            .windows(2)
            .skip(1)
            .all(|p| p[1] / p[0] <= FIXTURE_RATIO * (1.0 + 1e-12)));
        assert!(fine.contains(&0.25));
    }

    #[test]
    fn reflection_negates_driver_exactly() {
        let curve = make_arc_curve(0.7, 0.8, 400).unwrap();
        let (a, ma) = compute_driving(&curve).unwrap();
        let (b, mb) = compute_driving(&curve.reflected()).unwrap();
        assert_eq!(ma, mb);
        for (x, y) in samples(&a).values().iter().zip(samples(&b).values()) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn scaling_covariance() {
        let curve = make_line_curve(0.3, 1.0, 300).unwrap();
        let rho = 2.5;
        let (a, ma) = compute_driving(&curve).unwrap();
        let (b, mb) = compute_driving(&curve.scaled(rho).unwrap()).unwrap();
        for (x, y) in samples(&a).values().iter().zip(samples(&b).values()) {
            assert!((rho * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
        for (s, t) in ma.nodes().iter().zip(mb.nodes()) {
            assert!((rho * rho * s - t).abs() <= 1e-12 * t.abs());
        }
    }

    #[test]
    fn self_touching_curve_is_rejected() {
        // The third vertex sits on the first segment.
        let curve = Curve::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(1.0, 2.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 1.0),
        ])
        .unwrap();
        match compute_driving(&curve) {
            Err(Error::Geometry { index, .. }) => assert_eq!(index, 3),
            other => panic!("expected geometry error, got {other:?}"),
        }
    }

    #[test]
    fn profile_length_mismatch() {
        let curve = make_vertical_curve(1.0, 4).unwrap();
        let mesh = TimeMesh::graded(1.0, 3, 2.0).unwrap();
        assert!(arclength_profile(&curve, &mesh).is_err());
    }
}
