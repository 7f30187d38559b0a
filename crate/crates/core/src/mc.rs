//! Monte Carlo estimate of slit-side harmonic measures.
//!
//! Walkers move by walk-on-spheres jumps while far from the boundary and by
//! isotropic Gaussian increments of standard deviation `step` once within a
//! few steps of it. Gaussian steps are absorbed on an actual crossing of `ℝ`
//! or of a slit segment, and otherwise with the Brownian-bridge probability
//! `exp(−2·d0·d1/step²)` of an unseen crossing of the nearest straight piece.
//! Walker `i` always draws from stream `i` of a generator seeded with `seed`,
//! so results do not depend on how walkers are scheduled.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::Curve;
use crate::error::{argument, Error, Result};

/// Walk-on-spheres is used while the distance to the boundary exceeds this many steps.
const SPHERE_THRESHOLD: f64 = 3.0;

/// Largest admissible `step / diameter`.
pub const MAX_RELATIVE_STEP: f64 = 1e-3;

/// Largest admissible fraction of walkers that exhaust their budget.
pub const MAX_LOST_FRACTION: f64 = 1e-3;

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// Slit side: `Right` is mapped to `[λ, f1]`, `Left` to `[f2, λ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Right = 1,
    Left = 2,
}

impl TryFrom<u8> for Side {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Side::Right),
            2 => Ok(Side::Left),
            _ => Err(argument(format!("side must be 1 or 2, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub estimate: f64,
    pub stderr: f64,
    pub absorbed: u64,
    pub lost: u64,
    pub seed: u64,
    /// Absorptions on the right side, the left side and the real axis.
    pub right: u64,
    pub left: u64,
    pub real: u64,
}

#[derive(Debug, Clone, Copy)]
enum Exit {
    Real(f64),
    Side(Side),
    Lost,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: Complex64,
    dir: Complex64,
    len: f64,
}

impl Segment {
    /// Arclength parameter of the projection and the signed distance
    /// (negative on the right side).
    #[inline]
    fn local(&self, z: Complex64) -> (f64, f64) {
        let v = (z - self.start) * self.dir.conj();
        (v.re, v.im)
    }

    #[inline]
    fn distance(&self, z: Complex64) -> f64 {
        let (s, h) = self.local(z);
        if s < 0.0 {
            (z - self.start).norm()
        } else if s > self.len {
            (z - self.start - self.dir * self.len).norm()
        } else {
            h.abs()
        }
    }

    /// Parameter in `[0, 1]` at which the move `z0 → z1` crosses the segment.
    #[inline]
    fn crossing(&self, z0: Complex64, z1: Complex64) -> Option<f64> {
        let (s0, h0) = self.local(z0);
        let (s1, h1) = self.local(z1);
        if (h0 > 0.0 && h1 > 0.0) || (h0 < 0.0 && h1 < 0.0) || h0 == h1 {
            return None;
        }
        let u = h0 / (h0 - h1);
        let s = s0 + u * (s1 - s0);
        (0.0..=self.len).contains(&s).then_some(u)
    }
}

struct Domain {
    segments: Vec<Segment>,
    tip: Complex64,
    step: f64,
}

impl Domain {
    fn new(curve: Option<&Curve>, step: f64) -> Self {
        let (segments, tip) = match curve {
            Some(curve) => {
                let segments = curve
                    .points()
                    .windows(2)
                    .map(|p| {
                        let d = p[1] - p[0];
                        let len = d.norm();
                        Segment {
                            start: p[0],
                            dir: d / len,
                            len,
                        }
                    })
                    .collect();
                (segments, curve.tip())
            }
            None => (Vec::new(), Complex64::new(0.0, 0.0)),
        };
        Self {
            segments,
            tip,
            step,
        }
    }

    /// Distance to `ℝ ∪ slit` and the index of the nearest slit segment.
    fn distance(&self, z: Complex64) -> (f64, Option<usize>) {
        let mut best = z.im;
        let mut nearest = None;
        let mut slit = f64::INFINITY;
        for (k, seg) in self.segments.iter().enumerate() {
            let d = seg.distance(z);
            if d < slit {
                slit = d;
                nearest = Some(k);
            }
        }
        if slit < best {
            best = slit;
        }
        (best, nearest)
    }

    fn side_of(&self, k: usize, from: Complex64, hit: Complex64) -> Side {
        let (seg, reference) = if (hit - self.tip).norm() <= 0.5 * self.step {
            (self.segments.last().unwrap(), self.tip)
        } else {
            (&self.segments[k], self.segments[k].start)
        };
        if ((from - reference) * seg.dir.conj()).im < 0.0 {
            Side::Right
        } else {
            Side::Left
        }
    }

    fn walk(&self, z0: Complex64, rng: &mut ChaCha8Rng, budget: u64) -> Exit {
        let step = self.step;
        let mut z = z0;
        for _ in 0..budget {
            let (d, nearest) = self.distance(z);
            if d > SPHERE_THRESHOLD * step {
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                z += Complex64::from_polar(d, theta);
                if z.im <= 0.0 {
                    return Exit::Real(z.re);
                }
                continue;
            }

            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            let z1 = z + Complex64::new(dx, dy) * step;
            let reach = (z1 - z).norm();

            let mut first: Option<(f64, Exit)> = None;
            if z1.im <= 0.0 {
                let u = z.im / (z.im - z1.im);
                first = Some((u, Exit::Real(z.re + u * (z1.re - z.re))));
            }
            for (k, seg) in self.segments.iter().enumerate() {
                if seg.distance(z) > reach {
                    continue;
                }
                if let Some(u) = seg.crossing(z, z1) {
                    if first.is_none_or(|(v, _)| u < v) {
                        let hit = z + (z1 - z) * u;
                        first = Some((u, Exit::Side(self.side_of(k, z, hit))));
                    }
                }
            }
            if let Some((_, exit)) = first {
                return exit;
            }

            let two_over_var = 2.0 / (step * step);
            if rng.gen::<f64>() < (-two_over_var * z.im * z1.im).exp() {
                return Exit::Real(0.5 * (z.re + z1.re));
            }
            if let Some(k) = nearest {
                let seg = &self.segments[k];
                let (s0, h0) = seg.local(z);
                let (s1, h1) = seg.local(z1);
                let inside = |s: f64| (0.0..=seg.len).contains(&s);
                if inside(s0) && inside(s1) && rng.gen::<f64>() < (-two_over_var * h0 * h1).exp() {
                    return Exit::Side(self.side_of(k, z, z));
                }
            }
            z = z1;
        }
        Exit::Lost
    }
}

fn run(
    domain: &Domain,
    z0: Complex64,
    n_walkers: u64,
    seed: u64,
    budget: u64,
    target: impl Fn(Exit) -> bool + Sync,
) -> Result<McReport> {
    #[derive(Default, Clone, Copy)]
    struct Tally {
        right: u64,
        left: u64,
        real: u64,
        lost: u64,
        hits: u64,
    }
    let tally = (0..n_walkers)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let exit = domain.walk(z0, &mut rng, budget);
            let mut t = Tally::default();
            match exit {
                Exit::Real(_) => t.real = 1,
                Exit::Side(Side::Right) => t.right = 1,
                Exit::Side(Side::Left) => t.left = 1,
                Exit::Lost => t.lost = 1,
            }
            if !matches!(exit, Exit::Lost) && target(exit) {
                t.hits = 1;
            }
            t
        })
        .reduce(Tally::default, |a, b| Tally {
            right: a.right + b.right,
            left: a.left + b.left,
            real: a.real + b.real,
            lost: a.lost + b.lost,
            hits: a.hits + b.hits,
        });

    if tally.lost as f64 > MAX_LOST_FRACTION * n_walkers as f64 {
        return Err(Error::WalkerBudget {
            lost: tally.lost,
            total: n_walkers,
        });
    }
    let absorbed = n_walkers - tally.lost;
    let p = tally.hits as f64 / absorbed as f64;
    Ok(McReport {
        estimate: p,
        stderr: (p * (1.0 - p) / absorbed as f64).sqrt(),
        absorbed,
        lost: tally.lost,
        seed,
        right: tally.right,
        left: tally.left,
        real: tally.real,
    })
}

/// Hitting probability of one side of `curve` for Brownian motion from `z0`
/// in `ℍ \ curve`.
pub fn hm_mc_oracle(
    curve: &Curve,
    side: Side,
    z0: Complex64,
    n_walkers: u64,
    step: f64,
    seed: u64,
) -> Result<McReport> {
    hm_mc_oracle_with_budget(curve, side, z0, n_walkers, step, seed, DEFAULT_STEP_BUDGET)
}

pub fn hm_mc_oracle_with_budget(
    curve: &Curve,
    side: Side,
    z0: Complex64,
    n_walkers: u64,
    step: f64,
    seed: u64,
    budget: u64,
) -> Result<McReport> {
    let (lo, hi) = curve.points().iter().fold(
        (
            Complex64::new(f64::MAX, f64::MAX),
            Complex64::new(f64::MIN, f64::MIN),
        ),
        |(lo, hi), p| {
            (
                Complex64::new(lo.re.min(p.re), lo.im.min(p.im)),
                Complex64::new(hi.re.max(p.re), hi.im.max(p.im)),
            )
        },
    );
    // Bounding-box diagonal; within a factor √2 of the true diameter.
    let diameter = (hi - lo).norm();
    check_common(z0, n_walkers, step, diameter)?;
    if curve.len() < 2 {
        return Err(argument("slit needs at least two points"));
    }
    let domain = Domain::new(Some(curve), step);
    if domain.distance(z0).0 <= 0.0 {
        return Err(argument(format!("start point {z0} lies on the slit")));
    }
    run(
        &domain,
        z0,
        n_walkers,
        seed,
        budget,
        |e| matches!(e, Exit::Side(s) if s == side),
    )
}

/// Hitting probability of `[a, b]` for Brownian motion from `z0` in the empty half-plane.
pub fn hm_mc_interval(
    z0: Complex64,
    a: f64,
    b: f64,
    n_walkers: u64,
    step: f64,
    seed: u64,
) -> Result<McReport> {
    if !(a < b) {
        return Err(argument("interval endpoints must satisfy a < b"));
    }
    check_common(z0, n_walkers, step, b - a)?;
    let domain = Domain::new(None, step);
    run(
        &domain,
        z0,
        n_walkers,
        seed,
        DEFAULT_STEP_BUDGET,
        |e| matches!(e, Exit::Real(x) if (a..=b).contains(&x)),
    )
}

fn check_common(z0: Complex64, n_walkers: u64, step: f64, diameter: f64) -> Result<()> {
    if !(z0.im > 0.0) {
        return Err(argument(format!(
            "start point {z0} is outside the upper half-plane"
        )));
    }
    if n_walkers == 0 {
        return Err(argument("need at least one walker"));
    }
    if !(step > 0.0 && step <= MAX_RELATIVE_STEP * diameter) {
        return Err(argument(format!(
            "step {step} must be positive and at most {MAX_RELATIVE_STEP} × diameter {diameter}"
        )));
    }
    Ok(())
}
