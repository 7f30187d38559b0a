//! Driving terms `λ(t)` of the chordal Loewner equation.
//!
//! Every term satisfies `λ(0) = 0`. Closed-form terms are defined for all
//! `t >= 0`; sampled terms only up to their last sample time.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::mesh::TimeMesh;

/// Largest admissible exponent of a power-law driver.
pub const MAX_POWER_EXPONENT: f64 = 4.0;

/// A real-valued continuous driving function with `λ(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TermSpec", into = "TermSpec")]
pub enum DrivingTerm {
    /// `λ ≡ 0`.
    Zero,
    /// `λ(t) = c·√t`.
    SqrtCoeff { c: f64 },
    /// `λ(t) = A·t^α` with `1/2 < α <= 4`.
    PowerLaw { amplitude: f64, alpha: f64 },
    /// Piecewise-constant steps, typically produced by the zipper.
    Sampled(SampledDriving),
    /// Pointwise sum of other terms, e.g. `c√t + t`.
    Sum(Vec<DrivingTerm>),
}

/// Step values of a piecewise-constant driver.
///
/// `values[k]` is the driving value on the step `(times[k-1], times[k]]`;
/// `times[0] = 0` and `values[0] = 0` pin down `λ(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDriving {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SampledDriving {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let (times, values): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        Self::from_parts(times, values)
    }

    pub fn from_parts(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(argument("sampled driver: time and value lengths differ"));
        }
        if times.len() < 2 {
            return Err(argument("sampled driver needs at least two points"));
        }
        if times[0] != 0.0 || values[0] != 0.0 {
            return Err(argument("sampled driver must start at (0, 0)"));
        }
        for (k, pair) in times.windows(2).enumerate() {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() {
                return Err(argument(format!(
                    "sampled driver times must be strictly increasing (entries {k} and {})",
                    k + 1
                )));
            }
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(argument(format!("sampled driver value {k} is not finite")));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// The mesh formed by the sample times.
    pub fn mesh(&self) -> TimeMesh {
        TimeMesh::from_nodes(self.times.clone()).expect("validated on construction")
    }

    fn value_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s < t);
        self.values[k.min(self.values.len() - 1)]
    }
}

impl DrivingTerm {
    pub fn zero() -> Self {
        Self::Zero
    }

    pub fn sqrt(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(argument("sqrt coefficient must be finite"));
        }
        Ok(Self::SqrtCoeff { c })
    }

    pub fn power(amplitude: f64, alpha: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(argument("power-law amplitude must be finite"));
        }
        if !(alpha > 0.5 && alpha <= MAX_POWER_EXPONENT) {
            return Err(argument(format!(
                "power-law exponent must lie in (1/2, {MAX_POWER_EXPONENT}], got {alpha}"
            )));
        }
        Ok(Self::PowerLaw { amplitude, alpha })
    }

    pub fn sampled(points: Vec<(f64, f64)>) -> Result<Self> {
        SampledDriving::new(points).map(Self::Sampled)
    }

    pub fn sum(terms: Vec<DrivingTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(argument("sum of driving terms must not be empty"));
        }
        Ok(Self::Sum(terms))
    }

    /// Last time at which the term is defined; `None` for closed forms.
    pub fn domain_end(&self) -> Option<f64> {
        match self {
            Self::Sampled(s) => Some(s.end()),
            Self::Sum(terms) => terms
                .iter()
                .filter_map(|t| t.domain_end())
                .min_by(|a, b| a.total_cmp(b)),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let end = self.domain_end();
        if !(t >= 0.0) || end.is_some_and(|e| t > e) {
            return Err(Error::Domain {
                t,
                end: end.unwrap_or(f64::INFINITY),
            });
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::SqrtCoeff { c } => c * t.sqrt(),
            Self::PowerLaw { amplitude, alpha } => amplitude * t.powf(*alpha),
            Self::Sampled(s) => s.value_at(t),
            Self::Sum(terms) => terms.iter().map(|term| term.eval_unchecked(t)).sum(),
        }
    }

    /// True when the driver is a step function, so frozen-driver maps are exact.
    pub fn is_piecewise_constant(&self) -> bool {
        match self {
            Self::Zero | Self::Sampled(_) => true,
            Self::SqrtCoeff { c } => *c == 0.0,
            Self::PowerLaw { amplitude, .. } => *amplitude == 0.0,
            Self::Sum(terms) => terms.iter().all(Self::is_piecewise_constant),
        }
    }

    /// One value per mesh interval, taken at the interval midpoint.
    ///
    /// For a sampled term on its own sample mesh this returns exactly the
    /// stored step values.
    pub fn eval_on_mesh(&self, mesh: &TimeMesh) -> Result<Vec<f64>> {
        if mesh.intervals() == 0 {
            return Err(argument("mesh has no intervals"));
        }
        if let Some(end) = self.domain_end() {
            if mesh.end() > end * (1.0 + 1e-12) {
                return Err(Error::Domain { t: mesh.end(), end });
            }
        }
        Ok(mesh.midpoints().map(|t| self.eval_unchecked(t)).collect())
    }

    /// The rescaled driver `√n·λ(t/n)`.
    pub fn scaled(&self, n: f64) -> Self {
        let root = n.sqrt();
        match self {
            Self::Zero => Self::Zero,
            Self::SqrtCoeff { c } => Self::SqrtCoeff { c: *c },
            Self::PowerLaw { amplitude, alpha } => Self::PowerLaw {
                amplitude: amplitude * n.powf(0.5 - alpha),
                alpha: *alpha,
            },
            Self::Sampled(s) => Self::Sampled(SampledDriving {
                times: s.times.iter().map(|t| t * n).collect(),
                values: s.values.iter().map(|v| v * root).collect(),
            }),
            Self::Sum(terms) => Self::Sum(terms.iter().map(|t| t.scaled(n)).collect()),
        }
    }

    /// The mirror-image driver `−λ(t)`.
    pub fn reflected(&self) -> Self {
        match self {
            Self::Zero => Self::Zero,
            Self::SqrtCoeff { c } => Self::SqrtCoeff { c: -c },
            Self::PowerLaw { amplitude, alpha } => Self::PowerLaw {
                amplitude: -amplitude,
                alpha: *alpha,
            },
            Self::Sampled(s) => Self::Sampled(SampledDriving {
                times: s.times.clone(),
                values: s.values.iter().map(|v| -v).collect(),
            }),
            Self::Sum(terms) => Self::Sum(terms.iter().map(|t| t.reflected()).collect()),
        }
    }

    /// Parse the JSON form, e.g. `{"kind": "sqrt", "c": 1.0}`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("driving term: {e}")))
    }
}

/// Wire format of a driving term.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum TermSpec {
    Zero,
    Sqrt {
        c: f64,
    },
    Power {
        #[serde(rename = "A")]
        amplitude: f64,
        alpha: f64,
    },
    Sampled {
        points: Vec<[f64; 2]>,
    },
    Sum {
        terms: Vec<TermSpec>,
    },
}

impl TryFrom<TermSpec> for DrivingTerm {
    type Error = Error;

    fn try_from(spec: TermSpec) -> Result<Self> {
        match spec {
            TermSpec::Zero => Ok(Self::Zero),
            TermSpec::Sqrt { c } => Self::sqrt(c),
            TermSpec::Power { amplitude, alpha } => Self::power(amplitude, alpha),
            TermSpec::Sampled { points } => {
                Self::sampled(points.into_iter().map(|[t, v]| (t, v)).collect())
            }
            TermSpec::Sum { terms } => Self::sum(
                terms
                    .into_iter()
                    .map(Self::try_from)
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}

impl From<DrivingTerm> for TermSpec {
    fn from(term: DrivingTerm) -> Self {
        match term {
            DrivingTerm::Zero => Self::Zero,
            DrivingTerm::SqrtCoeff { c } => Self::Sqrt { c },
            DrivingTerm::PowerLaw { amplitude, alpha } => Self::Power { amplitude, alpha },
            DrivingTerm::Sampled(s) => Self::Sampled {
                points: s
                    .times
                    .into_iter()
                    .zip(s.values)
                    .map(|(t, v)| [t, v])
                    .collect(),
            },
            DrivingTerm::Sum(terms) => Self::Sum {
                terms: terms.into_iter().map(Self::from).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(DrivingTerm::zero().eval(0.25).unwrap(), 0.0);
        assert_eq!(DrivingTerm::sqrt(1.0).unwrap().eval(4.0).unwrap(), 2.0);
        assert_eq!(
            DrivingTerm::power(-3.0, 0.6).unwrap().eval(1.0).unwrap(),
            -3.0
        );
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        assert!(matches!(
            DrivingTerm::sqrt(1.0).unwrap().eval(-1e-3),
            Err(Error::Domain { .. })
        ));
        let s = DrivingTerm::sampled(vec![(0.0, 0.0), (1.0, 0.5)]).unwrap();
        assert!(matches!(s.eval(1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn power_exponent_range() {
        assert!(DrivingTerm::power(1.0, 0.5).is_err());
        assert!(DrivingTerm::power(1.0, 4.5).is_err());
        assert!(DrivingTerm::power(1.0, 4.0).is_ok());
    }

    #[test]
    fn sampled_steps_are_right_closed() {
        let s = DrivingTerm::sampled(vec![(0.0, 0.0), (1.0, 0.5), (2.0, -1.0)]).unwrap();
        assert_eq!(s.eval(0.0).unwrap(), 0.0);
        assert_eq!(s.eval(0.3).unwrap(), 0.5);
        assert_eq!(s.eval(1.0).unwrap(), 0.5);
        assert_eq!(s.eval(1.0001).unwrap(), -1.0);
        assert_eq!(s.eval(2.0).unwrap(), -1.0);
    }

    #[test]
    fn sampled_requires_origin_start() {
        assert!(DrivingTerm::sampled(vec![(0.0, 0.1), (1.0, 0.5)]).is_err());
        assert!(DrivingTerm::sampled(vec![(0.5, 0.0), (1.0, 0.5)]).is_err());
        assert!(DrivingTerm::sampled(vec![(0.0, 0.0), (1.0, 0.5), (1.0, 0.2)]).is_err());
    }

    #[test]
    fn mesh_evaluation_uses_midpoints() {
        let mesh = TimeMesh::graded(1.0, 5, 2.0).unwrap();
        assert_eq!(
            DrivingTerm::zero().eval_on_mesh(&mesh).unwrap(),
            vec![0.0; 5]
        );

        let mesh = TimeMesh::from_nodes(vec![0.0, 1.0, 4.0]).unwrap();
        let v = DrivingTerm::sqrt(2.0).unwrap().eval_on_mesh(&mesh).unwrap();
        assert_eq!(v, vec![2.0 * 0.5f64.sqrt(), 2.0 * 2.5f64.sqrt()]);

        let s = DrivingTerm::sampled(vec![(0.0, 0.0), (1.0, 0.5)]).unwrap();
        let mesh = TimeMesh::from_nodes(vec![0.0, 1.0]).unwrap();
        assert_eq!(s.eval_on_mesh(&mesh).unwrap(), vec![0.5]);
    }

    #[test]
    fn mesh_beyond_samples_rejected() {
        let s = DrivingTerm::sampled(vec![(0.0, 0.0), (1.0, 0.5)]).unwrap();
        let mesh = TimeMesh::graded(2.0, 4, 1.0).unwrap();
        assert!(s.eval_on_mesh(&mesh).is_err());
        let empty = TimeMesh::from_nodes(vec![0.0]).unwrap();
        assert!(DrivingTerm::zero().eval_on_mesh(&empty).is_err());
    }

    #[test]
    fn json_forms() {
        assert_eq!(
            DrivingTerm::from_json(r#"{"kind": "sqrt", "c": 1.0}"#).unwrap(),
            DrivingTerm::SqrtCoeff { c: 1.0 }
        );
        assert_eq!(
            DrivingTerm::from_json(r#"{"kind": "power", "A": 1.0, "alpha": 0.75}"#).unwrap(),
            DrivingTerm::PowerLaw {
                amplitude: 1.0,
                alpha: 0.75
            }
        );
        assert_eq!(
            DrivingTerm::from_json(r#"{"kind": "zero"}"#).unwrap(),
            DrivingTerm::Zero
        );
        let s = DrivingTerm::from_json(r#"{"kind": "sampled", "points": [[0, 0], [0.5, 1.5]]}"#)
            .unwrap();
        assert_eq!(s.eval(0.25).unwrap(), 1.5);
        assert!(DrivingTerm::from_json(r#"{"kind": "power", "A": 1.0, "alpha": 0.2}"#).is_err());
        assert!(DrivingTerm::from_json(r#"{"kind": "wiggle"}"#).is_err());

        let sum = DrivingTerm::from_json(
            r#"{"kind": "sum", "terms": [{"kind": "sqrt", "c": 2}, {"kind": "power", "A": 1, "alpha": 1}]}"#,
        )
        .unwrap();
        assert_eq!(sum.eval(4.0).unwrap(), 8.0);
        let text = serde_json::to_string(&sum).unwrap();
        assert_eq!(DrivingTerm::from_json(&text).unwrap(), sum);
    }

    proptest! {
        #[test]
        fn sqrt_term_is_homogeneous(c in -4.0f64..4.0, t in 0.0f64..10.0, s in 0.01f64..100.0) {
            let term = DrivingTerm::sqrt(c).unwrap();
            let lhs = term.eval(s * s * t).unwrap();
            let rhs = s * term.eval(t).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn every_kind_vanishes_at_zero(c in -4.0f64..4.0, a in -5.0f64..5.0, alpha in 0.51f64..4.0) {
            for term in [
                DrivingTerm::zero(),
                DrivingTerm::sqrt(c).unwrap(),
                DrivingTerm::power(a, alpha).unwrap(),
                DrivingTerm::sampled(vec![(0.0, 0.0), (1.0, c)]).unwrap(),
            ] {
                prop_assert_eq!(term.eval(0.0).unwrap(), 0.0);
            }
        }

        #[test]
        fn one_value_per_interval(n in 2usize..200, end in 0.01f64..10.0, p in 1.0f64..3.0) {
            let mesh = TimeMesh::graded(end, n, p).unwrap();
            let v = DrivingTerm::sqrt(1.0).unwrap().eval_on_mesh(&mesh).unwrap();
            prop_assert_eq!(v.len(), mesh.intervals());
        }
    }
}
