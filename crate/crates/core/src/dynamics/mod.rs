//! Iterates of rational self-maps of `CP^2`: strong and weak Fatou sets on a
//! grid of one chart, the dichotomy between them, and forward propagation of
//! Fatou membership.

mod dichotomy;
mod fatou;
mod locus;

use thiserror::Error;

use crate::converge::ConvergeError;
use crate::graphgeom::GeomError;
use crate::meromap::{MapError, RationalMap};

pub use dichotomy::{classify_dichotomy, fit_curve, CurveFit, DichotomyOptions, DichotomyReport};
pub use fatou::{fatou_scan, CellEvidence, CellVerdict, FatouCell, FatouGrid, FatouOptions, GridSpec, MIN_SCHEDULE};
pub use locus::{degeneracy_locus_sample, lemma_251_check, DegeneracyLocus, ImageCheck, PropagationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("schedule has {0} entries, at least {MIN_SCHEDULE} are needed")]
    ScheduleTooShort(usize),
    #[error("expected a self-map of CP^2")]
    NotAPlaneSelfMap,
    #[error("no cell is weakly but not strongly Fatou")]
    NoDichotomyEvidence,
    #[error("no curve of degree <= {max_degree} fits the limit values (best residual {residual:e})")]
    CurveFitFailed { max_degree: usize, residual: f64 },
    #[error("Fatou membership did not propagate: {0}")]
    PropagationViolation(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Converge(#[from] ConvergeError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

fn check_plane_self_map(f: &RationalMap) -> Result<(), DynamicsError> {
    if f.is_self_map() && f.source().dim() == 2 {
        Ok(())
    } else {
        Err(DynamicsError::NotAPlaneSelfMap)
    }
}

/// `deg(f^j)` for `j = 1..=k`, cut short where the exact iterate outgrows
/// `budget`.
pub fn degree_trace(f: &RationalMap, k: usize, budget: u64) -> Result<Vec<u32>, MapError> {
    if k == 0 {
        return Ok(Vec::new());
    }
    match f.iterate(k, budget) {
        Ok(it) => Ok(it.degree_trace),
        Err(MapError::BudgetExceeded { step, .. }) if step > 1 => Ok(f.iterate(step - 1, budget)?.degree_trace),
        Err(MapError::BudgetExceeded { .. }) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}
