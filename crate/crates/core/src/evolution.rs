//! Forward chordal Loewner evolution by composition of elementary slit maps.
//!
//! With the driver frozen at `λ` on a step of capacity `δ`, the Loewner flow
//! is solved exactly by `w ↦ λ + √((w−λ)² + 4δ)`, which removes a vertical
//! slit of height `2√δ` standing on `λ`. A run over a [`TimeMesh`] is the
//! composition of one such map per interval.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::Curve;
use crate::driving::DrivingTerm;
use crate::error::{argument, Error, Result};
use crate::mesh::TimeMesh;

/// Relative size of the hull-collision guard.
pub const HULL_GUARD: f64 = 1e-12;

/// Square root with nonnegative imaginary part, by the half-angle construction.
///
/// Results on the real axis are the nonnegative root. The construction is
/// exactly covariant under `z ↦ z̄`: `upper_sqrt(z̄) = −conj(upper_sqrt(z))`
/// whenever the result is off the real axis.
#[inline]
pub fn upper_sqrt(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let r = (x * x + y * y).sqrt();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if x >= 0.0 {
        let a = (0.5 * (r + x)).sqrt();
        let b = y / (2.0 * a);
        if b < 0.0 {
            Complex64::new(-a, -b)
        } else {
            Complex64::new(a, b)
        }
    } else {
        let b = (0.5 * (r - x)).sqrt();
        Complex64::new(y / (2.0 * b), b)
    }
}

/// Elementary slit map `w ↦ λ + √((w−λ)² + 4δ)` onto the closed upper half-plane.
///
/// The slit `[λ, λ + 2i√δ]` is opened onto `[λ − 2√δ, λ + 2√δ]`; real points keep
/// their side of `λ`.
#[inline]
pub fn slit_map(w: Complex64, lambda: f64, delta: f64) -> Complex64 {
    let u = w - lambda;
    if w.im == 0.0 {
        let r = (u.re * u.re + 4.0 * delta).sqrt();
        let x = if u.re >= 0.0 { lambda + r } else { lambda - r };
        return Complex64::new(x, 0.0);
    }
    lambda + upper_sqrt(u * u + 4.0 * delta)
}

/// Inverse elementary map `w ↦ λ + √((w−λ)² − 4δ)`, from the half-plane onto
/// the half-plane minus the vertical slit `[λ, λ + 2i√δ]`. `λ` goes to the tip.
#[inline]
pub fn slit_map_inverse(w: Complex64, lambda: f64, delta: f64) -> Complex64 {
    let u = w - lambda;
    if w.im == 0.0 {
        let d = u.re * u.re - 4.0 * delta;
        return if d >= 0.0 {
            let r = d.sqrt();
            Complex64::new(if u.re >= 0.0 { lambda + r } else { lambda - r }, 0.0)
        } else {
            Complex64::new(lambda, (-d).sqrt())
        };
    }
    lambda + upper_sqrt(u * u - 4.0 * delta)
}

/// Per-node output of a forward run.
///
/// `lambda[j]` is the driving value in force on step `j`, i.e. the image of the
/// trace tip at `t_j`; `lambda[0] = 0`. `tip` is empty unless the trace was
/// requested.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionResult {
    pub mesh: TimeMesh,
    pub lambda: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub tip: Vec<Complex64>,
}

impl EvolutionResult {
    pub fn times(&self) -> &[f64] {
        self.mesh.nodes()
    }

    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    /// Checks `f2 < λ < f1` at every positive node and the monotonicity of `f1`, `f2`.
    pub fn check_ordering(&self) -> Result<()> {
        for j in 1..self.len() {
            let (f1, f2, lambda) = (self.f1[j], self.f2[j], self.lambda[j]);
            if !(f2 < lambda && lambda < f1) {
                return Err(Error::Branch {
                    step: j,
                    f1,
                    f2,
                    lambda,
                });
            }
            if self.f1[j] < self.f1[j - 1] || self.f2[j] > self.f2[j - 1] {
                return Err(Error::Consistency(format!(
                    "singular solutions not monotone at node {j}"
                )));
            }
        }
        Ok(())
    }
}

/// Largest relative width `(s_i − s_{i−1})/s_{i−1}` of the sub-steps used for
/// drivers that are not piecewise constant.
pub const MAX_RELATIVE_SUBSTEP: f64 = 0.05;

/// The first mesh interval `[0, t_1]` is resolved geometrically from `t_1` down to this fraction of it.
pub const FIRST_STEP_DEPTH: f64 = 1e-12;

/// Sub-steps are bisected until the driver moves by at most this multiple of `√δ` across them.
pub const MAX_DRIVER_VARIATION: f64 = 0.5;

const MAX_BISECTIONS: u32 = 24;

/// Elementary maps `(λ, δ)` of a run, with `ends[j]` the number of maps up to node `j`.
///
/// A piecewise-constant driver gets one map per mesh interval, which is exact.
/// Other drivers get each interval split so that no sub-step is wider than
/// [`MAX_RELATIVE_SUBSTEP`] relative to its start and the driver varies by at
/// most [`MAX_DRIVER_VARIATION`]`·√δ` across each; otherwise the early
/// intervals of a graded mesh, or a fast driver, let the midpoint value jump
/// past a singular solution. Both bounds are invariant under `t ↦ nt`, `λ ↦ √n·λ`.
struct Steps {
    maps: Vec<(f64, f64)>,
    ends: Vec<usize>,
}

impl Steps {
    fn new(term: &DrivingTerm, mesh: &TimeMesh) -> Result<Self> {
        let coarse = term.eval_on_mesh(mesh)?;
        if term.is_piecewise_constant() {
            return Ok(Self {
                maps: coarse.into_iter().zip(mesh.steps()).collect(),
                ends: (0..=mesh.intervals()).collect(),
            });
        }
        let nodes = mesh.nodes();
        let mut maps = Vec::with_capacity(mesh.intervals() + 1000);
        let mut ends = vec![0];
        let push = |a: f64, b: f64, maps: &mut Vec<(f64, f64)>| refine(term, a, b, maps, 0);
        let t1 = nodes[1];
        let levels = ((1.0 / FIRST_STEP_DEPTH).ln() / MAX_RELATIVE_SUBSTEP.ln_1p()).ceil() as i32;
        let ratio = FIRST_STEP_DEPTH.powf(1.0 / levels as f64);
        let mut prev = 0.0;
        for i in (0..=levels).rev() {
            let s = if i == 0 { t1 } else { t1 * ratio.powi(i) };
            push(prev, s, &mut maps);
            prev = s;
        }
        ends.push(maps.len());
        for pair in nodes[1..].windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let m = ((b - a) / (MAX_RELATIVE_SUBSTEP * a)).ceil().max(1.0) as usize;
            let h = (b - a) / m as f64;
            for i in 0..m {
                let lo = a + i as f64 * h;
                let hi = if i + 1 == m {
                    b
                } else {
                    a + (i + 1) as f64 * h
                };
                push(lo, hi, &mut maps);
            }
            ends.push(maps.len());
        }
        Ok(Self { maps, ends })
    }

    /// Mesh interval (1-based) containing map `i`.
    fn interval_of(&self, i: usize) -> usize {
        self.ends.partition_point(|&e| e <= i)
    }
}

fn refine(term: &DrivingTerm, a: f64, b: f64, maps: &mut Vec<(f64, f64)>, depth: u32) {
    let mid = 0.5 * (a + b);
    let swing = (term.eval_unchecked(b) - term.eval_unchecked(a)).abs();
    if depth < MAX_BISECTIONS && swing > MAX_DRIVER_VARIATION * (b - a).sqrt() {
        refine(term, a, mid, maps, depth + 1);
        refine(term, mid, b, maps, depth + 1);
    } else {
        maps.push((term.eval_unchecked(mid), b - a));
    }
}

/// `f(z, t_j)` at every node of `mesh`, starting from `f(z, 0) = z`.
pub fn solve_forward(term: &DrivingTerm, mesh: &TimeMesh, z: Complex64) -> Result<Vec<Complex64>> {
    if !(z.im > 0.0) {
        return Err(argument(format!(
            "start point must lie in the upper half-plane, got {z}"
        )));
    }
    let mut out = Vec::with_capacity(mesh.intervals() + 1);
    out.push(z);
    if mesh.intervals() == 0 {
        return Ok(out);
    }
    let steps = Steps::new(term, mesh)?;
    let mut w = z;
    for (i, &(lambda, delta)) in steps.maps.iter().enumerate() {
        let distance = (w - lambda).norm();
        if distance < HULL_GUARD * lambda.abs().max(1.0) {
            return Err(Error::HullCollision {
                step: steps.interval_of(i),
                distance,
            });
        }
        w = slit_map(w, lambda, delta);
        if steps.ends[out.len()] == i + 1 {
            out.push(w);
        }
    }
    Ok(out)
}

/// The two singular solutions `f1(0, t)`, `f2(0, t)` through the singular point `(0, 0)`.
///
/// The first map is the exact constant-driver solution `λ₁ ± 2√δ₁`; later
/// maps follow the real branches of [`slit_map`]. `lambda[j]` records the
/// value of the last map before node `j`.
pub fn singular_solutions(term: &DrivingTerm, mesh: &TimeMesh) -> Result<EvolutionResult> {
    if mesh.intervals() == 0 {
        return Err(argument(
            "singular solutions need at least one mesh interval",
        ));
    }
    let steps = Steps::new(term, mesh)?;
    let n = mesh.intervals() + 1;
    let mut lambda = Vec::with_capacity(n);
    let mut f1 = Vec::with_capacity(n);
    let mut f2 = Vec::with_capacity(n);
    lambda.push(0.0);
    f1.push(0.0);
    f2.push(0.0);

    let (l1, d1) = steps.maps[0];
    let mut a = l1 + 2.0 * d1.sqrt();
    let mut b = l1 - 2.0 * d1.sqrt();
    let mut last = l1;
    for (i, &(l, d)) in steps.maps.iter().enumerate() {
        if i > 0 {
            if !(a > l && b < l) {
                return Err(Error::Branch {
                    step: steps.interval_of(i),
                    f1: a,
                    f2: b,
                    lambda: l,
                });
            }
            let (ua, ub) = (a - l, b - l);
            a = l + (ua * ua + 4.0 * d).sqrt();
            b = l - (ub * ub + 4.0 * d).sqrt();
            last = l;
        }
        if steps.ends[f1.len()] == i + 1 {
            lambda.push(last);
            f1.push(a);
            f2.push(b);
        }
    }
    Ok(EvolutionResult {
        mesh: mesh.clone(),
        lambda,
        f1,
        f2,
        tip: Vec::new(),
    })
}

/// Singular solutions plus the trace tip at every node.
pub fn evolve(term: &DrivingTerm, mesh: &TimeMesh) -> Result<EvolutionResult> {
    let mut result = singular_solutions(term, mesh)?;
    result.tip = trace_points(term, mesh)?;
    Ok(result)
}

fn tip_from_steps(steps: &Steps, j: usize) -> Complex64 {
    let end = steps.ends[j];
    if end == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let (l, d) = steps.maps[end - 1];
    let mut w = Complex64::new(l, 2.0 * d.sqrt());
    for &(l, d) in steps.maps[..end - 1].iter().rev() {
        w = slit_map_inverse(w, l, d);
    }
    w
}

fn trace_points(term: &DrivingTerm, mesh: &TimeMesh) -> Result<Vec<Complex64>> {
    if mesh.intervals() == 0 {
        return Ok(vec![Complex64::new(0.0, 0.0)]);
    }
    let steps = Steps::new(term, mesh)?;
    Ok((0..steps.ends.len())
        .into_par_iter()
        .map(|j| tip_from_steps(&steps, j))
        .collect())
}

/// Trace tips `γ(t_j)` at the requested node indices only.
pub fn trace_at(term: &DrivingTerm, mesh: &TimeMesh, indices: &[usize]) -> Result<Vec<Complex64>> {
    let steps = Steps::new(term, mesh)?;
    if let Some(&j) = indices.iter().find(|&&j| j > mesh.intervals()) {
        return Err(argument(format!(
            "node index {j} beyond mesh of {} intervals",
            mesh.intervals()
        )));
    }
    Ok(indices
        .par_iter()
        .map(|&j| tip_from_steps(&steps, j))
        .collect())
}

/// The trace `γ(t_j) = f⁻¹(λ_j, t_j)` as a polyline in capacity parametrization.
///
/// Cost is quadratic in the number of intervals.
pub fn compute_trace(term: &DrivingTerm, mesh: &TimeMesh) -> Result<Curve> {
    Curve::new(trace_points(term, mesh)?)
}

/// `f⁻¹(w, T)`: the point of the slit domain mapped to `w` at the end of `mesh`.
pub fn preimage(term: &DrivingTerm, mesh: &TimeMesh, w: Complex64) -> Result<Complex64> {
    if mesh.intervals() == 0 {
        return Ok(w);
    }
    let steps = Steps::new(term, mesh)?;
    Ok(steps
        .maps
        .iter()
        .rev()
        .fold(w, |w, &(l, d)| slit_map_inverse(w, l, d)))
}

/// Minimum radius accepted by [`hydrodynamic_coefficient`].
pub const MIN_NORMALIZATION_RADIUS: f64 = 100.0;

/// The coefficient `b` in `f(z, T) = z + b/z + O(1/z²)`, estimated at `z = iR`.
pub fn hydrodynamic_coefficient(term: &DrivingTerm, mesh: &TimeMesh, radius: f64) -> Result<f64> {
    if !(radius >= MIN_NORMALIZATION_RADIUS) {
        return Err(argument(format!(
            "normalization radius must be at least {MIN_NORMALIZATION_RADIUS}, got {radius}"
        )));
    }
    let z = Complex64::new(0.0, radius);
    let f = *solve_forward(term, mesh, z)?.last().unwrap();
    Ok(((f - z) * z).re)
}
