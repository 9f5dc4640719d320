//! Convergence notions for sequences of meromorphic maps, tested on
//! sampled graphs.
//!
//! Every tester returns a [`ConvergenceReport`]. Verdicts are numerical
//! evidence at the stated tolerances: `converges` means the distance trace
//! settled below tolerance, `diverges` means it stayed clearly above it, and
//! anything else is `undecided`.

mod checks;
pub(crate) mod engine;
mod notions;
mod series;

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::graphgeom::{GeomError, GraphCloud, MetricSpec, ProjectionOptions};
use crate::meromap::MapError;

pub use checks::{hartogs_propagation, lift_convergence_check, rouche_check, HartogsReport, LiftReport, RoucheReport};
pub use notions::{gamma_converge, s_converge, stabilization_test, w_converge};
pub use series::{series_convergence_def1, spherical_convergence_def2, RatFun};

type C64 = Complex<f64>;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    Strong,
    Weak,
    Gamma,
    Stabilized,
    Def1Series,
    Def2Spherical,
}

impl std::str::FromStr for Notion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "strong" => Notion::Strong,
            "weak" => Notion::Weak,
            "gamma" => Notion::Gamma,
            "stabilized" => Notion::Stabilized,
            "def1" | "def1_series" => Notion::Def1Series,
            "def2" | "def2_spherical" => Notion::Def2Spherical,
            other => return Err(format!("unknown notion `{other}`")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Undecided,
}

impl Verdict {
    /// `0` converges, `2` diverges, `1` undecided.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Converges => 0,
            Verdict::Diverges => 2,
            Verdict::Undecided => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converges => "converges",
            Verdict::Diverges => "diverges",
            Verdict::Undecided => "undecided",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergeError {
    #[error("failing samples form {found} clusters, more than the {max} allowed")]
    ExceptionalSetNotFinite { found: usize, max: usize },
    #[error("Rouche check violated: {0}")]
    RoucheViolation(String),
    #[error("propagation violated: {0}")]
    PropagationViolation(String),
    #[error("term {0} is not a rational function of one variable")]
    NonRationalTerm(usize),
    #[error("schedule must be nonempty and strictly increasing")]
    BadSchedule,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Tolerances and sampling controls shared by the testers.
#[derive(Clone, Debug)]
pub struct ConvergeOptions {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    pub metric: MetricSpec,
    /// Number of trailing schedule entries the verdict looks at.
    pub tail: usize,
    /// Largest admissible number of exceptional points.
    pub max_points: usize,
    /// Single-linkage distance for clustering failing samples, relative to
    /// the region size.
    pub cluster_factor: f64,
    /// Radii of the balls removed around exceptional points, relative to the
    /// region size.
    pub excision_radii: Vec<f64>,
    /// Minimal target diameter of a fiber counted as vertical.
    pub fiber_diam_tol: f64,
    /// Constant for the lower bound on the vertical volume, if known.
    pub nu: Option<f64>,
    pub projection: ProjectionOptions,
}

impl Default for ConvergeOptions {
    fn default() -> Self {
        Self {
            tol: 2e-2,
            samples: 10_000,
            seed: 0,
            metric: MetricSpec::default(),
            tail: 5,
            max_points: 16,
            cluster_factor: 0.1,
            excision_radii: vec![0.5, 0.25, 0.1],
            fiber_diam_tol: 0.1,
            nu: None,
            projection: ProjectionOptions::default(),
        }
    }
}

/// A point removed from the region, with the radii at which convergence
/// off it was tested.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalPoint {
    #[serde(serialize_with = "crate::serial::cvec")]
    pub point: Vec<C64>,
    pub radii: Vec<f64>,
}

/// A source point over which the limit graph contains a vertical piece.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerticalPart {
    #[serde(serialize_with = "crate::serial::cvec")]
    pub point: Vec<C64>,
    pub fiber_diameter: f64,
    pub samples: usize,
}

/// Splitting of a limit graph into the graph of a map and vertical parts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub graph_samples: usize,
    pub vertical: Vec<VerticalPart>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub schema: u32,
    pub notion: Notion,
    pub verdict: Verdict,
    pub distance_trace: Vec<(usize, f64)>,
    pub exceptional_points: Vec<ExceptionalPoint>,
    /// Final-stage cloud of the limit, when one was sampled.
    #[serde(skip)]
    pub limit_cloud: Option<GraphCloud>,
    pub decomposition: Option<Decomposition>,
    /// Named numeric side results (volumes, counts, sub-verdicts).
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub(crate) fn new(notion: Notion) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            notion,
            verdict: Verdict::Undecided,
            distance_trace: Vec::new(),
            exceptional_points: Vec::new(),
            limit_cloud: None,
            decomposition: None,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The distance trace as `n,distance` lines.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("n,distance\n");
        for (n, d) in &self.distance_trace {
            s.push_str(&format!("{n},{d:.12e}\n"));
        }
        s
    }
}

/// Verdict for a distance trace.
///
/// Converges when the last value is below `tol` and the last `tail` values
/// do not grow by more than 20% (plus a small absolute slack) from one entry
/// to the next. Diverges when the last `tail` values are all above `tol` and
/// the last is not much smaller than the first of them.
pub fn judge(trace: &[f64], tol: f64, tail: usize) -> Verdict {
    if trace.is_empty() {
        return Verdict::Undecided;
    }
    let t = &trace[trace.len().saturating_sub(tail.max(1))..];
    let last = *t.last().expect("nonempty");
    let settled = t.windows(2).all(|w| w[1] <= 1.2 * w[0] + 0.1 * tol);
    if last < tol && settled {
        return Verdict::Converges;
    }
    if t.len() >= tail.min(trace.len()).max(1) && t.iter().all(|&d| d > tol) && last >= 0.8 * t[0] {
        return Verdict::Diverges;
    }
    Verdict::Undecided
}

pub(crate) fn check_schedule(schedule: &[usize]) -> Result<(), ConvergeError> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] == 0 {
        return Err(ConvergeError::BadSchedule);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn judging_traces() {
        assert_eq!(judge(&[0.3, 0.1, 0.05, 0.02, 0.01, 0.005], 2e-2, 5), Verdict::Converges);
        assert_eq!(judge(&[0.5, 0.5, 0.49, 0.5, 0.5], 2e-2, 5), Verdict::Diverges);
        assert_eq!(judge(&[0.5, 0.4, 0.2, 0.1, 0.05], 2e-2, 5), Verdict::Undecided);
        assert_eq!(judge(&[0.0; 5], 2e-2, 5), Verdict::Converges);
        assert_eq!(judge(&[], 2e-2, 5), Verdict::Undecided);
        // a late jump is not settled
        assert_eq!(judge(&[0.001, 0.001, 0.001, 0.001, 0.015], 2e-2, 5), Verdict::Undecided);
    }
}
