//! Adaptive fourth-order Runge–Kutta integration of `df/dt = 2/(f − λ(t))`.
//!
//! This engine never touches the elementary slit maps and serves as the
//! cross-check for [`crate::evolution`].

use num_complex::Complex64;

use crate::driving::DrivingTerm;
use crate::error::{argument, Error, Result};

/// Local error control for [`Rk4`].
#[derive(Debug, Clone, Copy)]
pub struct Rk4 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Rk4 {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-15,
            max_steps: 5_000_000,
        }
    }
}

impl Rk4 {
    fn rhs(term: &DrivingTerm, t: f64, f: Complex64) -> Complex64 {
        let lambda = term.eval(t.max(0.0)).unwrap_or(f64::NAN);
        2.0 / (f - lambda)
    }

    fn step(term: &DrivingTerm, t: f64, f: Complex64, h: f64) -> Complex64 {
        let k1 = Self::rhs(term, t, f);
        let k2 = Self::rhs(term, t + 0.5 * h, f + k1 * (0.5 * h));
        let k3 = Self::rhs(term, t + 0.5 * h, f + k2 * (0.5 * h));
        let k4 = Self::rhs(term, t + h, f + k3 * h);
        f + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0)
    }

    /// Integrate from `(t0, f0)` to `t1` with step doubling; `h0` is the first trial step.
    pub fn integrate(
        &self,
        term: &DrivingTerm,
        t0: f64,
        f0: Complex64,
        t1: f64,
        h0: f64,
    ) -> Result<Complex64> {
        if !(t1 >= t0) {
            return Err(argument("integration must run forward in time"));
        }
        let mut t = t0;
        let mut f = f0;
        let mut h = h0.min(t1 - t0).max(f64::MIN_POSITIVE);
        let mut steps = 0usize;
        while t < t1 {
            if steps >= self.max_steps {
                return Err(Error::Consistency(format!(
                    "RK4 step budget exhausted at t = {t}"
                )));
            }
            steps += 1;
            if t + h > t1 {
                h = t1 - t;
            }
            let full = Self::step(term, t, f, h);
            let half = Self::step(term, t, f, 0.5 * h);
            let fine = Self::step(term, t + 0.5 * h, half, 0.5 * h);
            let err = (fine - full).norm() / 15.0;
            let tol = self.atol + self.rtol * fine.norm();
            if !err.is_finite() || !fine.re.is_finite() {
                h *= 0.25;
                if h < 1e-300 {
                    return Err(Error::Consistency(format!("RK4 step underflow at t = {t}")));
                }
                continue;
            }
            if err <= tol {
                t = if t1 - (t + h) <= 0.0 { t1 } else { t + h };
                f = fine + (fine - full) / 15.0;
            }
            let factor = if err == 0.0 {
                4.0
            } else {
                0.9 * (tol / err).powf(0.2)
            };
            h *= factor.clamp(0.1, 4.0);
        }
        Ok(f)
    }

    /// `f(z, t)` at each requested time, integrating from `f(z, 0) = z`.
    pub fn forward(
        &self,
        term: &DrivingTerm,
        z: Complex64,
        times: &[f64],
    ) -> Result<Vec<Complex64>> {
        if !(z.im > 0.0) {
            return Err(argument("start point must lie in the upper half-plane"));
        }
        let mut out = Vec::with_capacity(times.len());
        let (mut t, mut f) = (0.0, z);
        for &target in times {
            let span = target - t;
            f = self.integrate(term, t, f, target, (1e-6 * span).max(1e-300))?;
            t = target;
            out.push(f);
        }
        Ok(out)
    }

    /// Singular solutions `(f1(0, t), f2(0, t))`.
    ///
    /// Both branches start at `t0 = 1e-16·t` from the constant-driver
    /// solution `λ(t0/2) ± 2√t0`; the offset from the true branch decays
    /// like a positive power of `t0/t`.
    pub fn singular(&self, term: &DrivingTerm, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(argument("singular solutions need t > 0"));
        }
        let t0 = 1e-16 * t;
        let l0 = term.eval(0.5 * t0)?;
        let r0 = 2.0 * t0.sqrt();
        let h0 = 1e-3 * t0;
        let f1 = self.integrate(term, t0, Complex64::new(l0 + r0, 0.0), t, h0)?;
        let f2 = self.integrate(term, t0, Complex64::new(l0 - r0, 0.0), t, h0)?;
        Ok((f1.re, f2.re))
    }
}
