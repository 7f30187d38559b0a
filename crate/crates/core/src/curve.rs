use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// A polyline slit in the closed upper half-plane, starting at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    points: Vec<Complex64>,
    arclength: Vec<f64>,
}

impl Curve {
    /// Validates `points[0] = 0`, `Im > 0` afterwards and no repeated consecutive vertex.
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        match points.first() {
            Some(p) if p.re == 0.0 && p.im == 0.0 => {}
            Some(_) => {
                return Err(Error::Geometry {
                    index: 0,
                    reason: "curve must start at the origin".into(),
                })
            }
            None => {
                return Err(Error::Geometry {
                    index: 0,
                    reason: "curve has no points".into(),
                })
            }
        }
        let mut arclength = Vec::with_capacity(points.len());
        arclength.push(0.0);
        for k in 1..points.len() {
            let p = points[k];
            if !(p.im > 0.0) || !p.re.is_finite() || !p.im.is_finite() {
                return Err(Error::Geometry {
                    index: k,
                    reason: format!("vertex {p} is not in the open upper half-plane"),
                });
            }
            let step = (p - points[k - 1]).norm();
            if step == 0.0 {
                return Err(Error::Geometry {
                    index: k,
                    reason: "repeated vertex".into(),
                });
            }
            arclength.push(arclength[k - 1] + step);
        }
        Ok(Self { points, arclength })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Cumulative polyline length to each vertex.
    pub fn arclength(&self) -> &[f64] {
        &self.arclength
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        *self.arclength.last().unwrap()
    }

    pub fn tip(&self) -> Complex64 {
        *self.points.last().unwrap()
    }

    pub fn max_segment(&self) -> f64 {
        self.arclength
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Mirror image across the imaginary axis.
    pub fn reflected(&self) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| Complex64::new(-p.re, p.im))
                .collect(),
            arclength: self.arclength.clone(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| p * factor).collect())
    }

    /// Symmetric Hausdorff distance between the vertex sets of two curves.
    pub fn hausdorff_vertices(&self, other: &Curve) -> f64 {
        fn directed(a: &[Complex64], b: &[Complex64]) -> f64 {
            a.iter()
                .map(|p| {
                    b.iter()
                        .map(|q| (p - q).norm())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        }
        directed(&self.points, &other.points).max(directed(&other.points, &self.points))
    }
}
