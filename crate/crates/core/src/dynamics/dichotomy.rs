use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use super::fatou::{CellVerdict, FatouGrid};
use super::{check_plane_self_map, DynamicsError};
use crate::converge::engine::{centroid, cluster, members, Reference};
use crate::graphgeom::{volume, CompactRegion, VolumeOptions};
use crate::meromap::{CompiledMap, MapFamily, ProjectivePoint, RationalMap, TargetPoint, DEFAULT_BIT_BUDGET};
use crate::meromap::sphere_directions;

type C64 = Complex<f64>;

const MAX_CURVE_DEGREE: usize = 3;

/// A homogeneous polynomial in `z0, z1, z2` fitted to a set of points.
#[derive(Clone, Debug, Serialize)]
pub struct CurveFit {
    pub degree: usize,
    /// Exponent vectors, `z0` power first, in the order of `coefficients`.
    pub monomials: Vec<[u32; 3]>,
    /// Scaled so that the largest coefficient is exactly 1.
    #[serde(serialize_with = "crate::serial::cvec")]
    pub coefficients: Vec<C64>,
    /// Root mean square of the polynomial over the unit-normalized points.
    pub residual: f64,
}

fn monomials(d: usize) -> Vec<[u32; 3]> {
    let d = d as u32;
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            out.push([a, b, d - a - b]);
        }
    }
    out
}

/// Lowest-degree curve through `points` (degree at most 3) whose residual
/// is below `accept`.
pub fn fit_curve(points: &[ProjectivePoint], accept: f64) -> Result<CurveFit, DynamicsError> {
    let mut best = f64::INFINITY;
    for d in 1..=MAX_CURVE_DEGREE {
        let mons = monomials(d);
        if points.len() < mons.len() {
            break;
        }
        let rows: Vec<Vec<C64>> = points
            .iter()
            .map(|p| {
                let z = p.coords();
                let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                let u: Vec<C64> = z.iter().map(|c| c / n).collect();
                mons.iter().map(|e| (0..3).map(|i| u[i].powu(e[i])).product()).collect()
            })
            .collect();
        let a = DMatrix::from_fn(rows.len(), mons.len(), |i, j| rows[i][j]);
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let (k, sigma) = svd
            .singular_values
            .iter()
            .copied()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty");
        let residual = sigma / (points.len() as f64).sqrt();
        best = best.min(residual);
        if residual < accept {
            let v: Vec<C64> = (0..mons.len()).map(|j| vt[(k, j)].conj()).collect();
            let lead = *v.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("nonempty");
            let coefficients = v.iter().map(|c| if c == &lead { C64::new(1.0, 0.0) } else { c / lead }).collect();
            return Ok(CurveFit { degree: d, monomials: mons, coefficients, residual });
        }
    }
    Err(DynamicsError::CurveFitFailed { max_degree: MAX_CURVE_DEGREE, residual: best })
}

#[derive(Clone, Debug)]
pub struct DichotomyOptions {
    pub volume_samples: usize,
    pub seed: u64,
    /// Region of the chart the graph volumes are taken over.
    pub volume_region: CompactRegion,
    pub fiber_directions: usize,
    pub fiber_radius: f64,
    pub fit_accept: f64,
    pub budget: u64,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        Self {
            volume_samples: 20_000,
            seed: 0,
            volume_region: CompactRegion::unit_polydisc(2),
            fiber_directions: 64,
            fiber_radius: 1e-3,
            fit_accept: 1e-6,
            budget: DEFAULT_BIT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumePoint {
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomyReport {
    pub schema: u32,
    /// The strong-exceptional point, in homogeneous coordinates.
    #[serde(serialize_with = "crate::serial::cvec")]
    pub exceptional_point: Vec<C64>,
    pub exceptional_cells: Vec<usize>,
    /// The curve the limit values lie on.
    pub curve: CurveFit,
    /// Largest chordal distance between limit values on a small sphere
    /// around the exceptional point.
    pub fiber_spread: f64,
    pub fiber_samples: usize,
    pub volume_trace: Vec<VolumePoint>,
    pub notes: Vec<String>,
}

impl DichotomyReport {
    pub fn point(&self) -> ProjectivePoint {
        ProjectivePoint::new(self.exceptional_point.clone()).expect("nonzero")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `max / min` of the volume trace.
    pub fn volume_ratio(&self) -> f64 {
        let v = self.volume_trace.iter().map(|p| p.value);
        v.clone().fold(0.0, f64::max) / v.fold(f64::INFINITY, f64::min)
    }
}

fn spread(points: &[TargetPoint]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.max(points[i].distance(&points[j]));
        }
    }
    best
}

/// Evidence for the second alternative of the dichotomy: a strong-exceptional
/// point `p` and a curve `C` carrying the weak limit.
///
/// `p` is the centroid of the largest cluster of exceptional points found on
/// the weak-only cells. The limit is the lift limit of the iterates for the
/// last schedule entry when one exists, else the last iterate itself; `C` is
/// fitted to its values at the strongly Fatou cell centers.
pub fn classify_dichotomy(
    f: &RationalMap,
    grid: &FatouGrid,
    schedule: &[usize],
    opts: &DichotomyOptions,
) -> Result<DichotomyReport, DynamicsError> {
    check_plane_self_map(f)?;
    let chart = grid.grid.chart;
    let weak_only: Vec<_> = grid.cells.iter().filter(|c| c.verdict == CellVerdict::InPhiWOnly).collect();
    if weak_only.is_empty() {
        return Err(DynamicsError::NoDichotomyEvidence);
    }
    let mut found: Vec<Vec<C64>> = weak_only.iter().flat_map(|c| c.evidence.exceptional_points.iter().cloned()).collect();
    if found.is_empty() {
        found = weak_only.iter().map(|c| c.center.clone()).collect();
    }
    let groups = cluster(&found, 2.0 * grid.grid.cell);
    let largest = groups.iter().max_by_key(|g| g.len()).expect("nonempty");
    let p_aff = centroid(&found, largest);
    let mut notes = Vec::new();
    if groups.len() > 1 {
        notes.push(format!("{} separate clusters of exceptional points; the largest is reported", groups.len()));
    }

    let fam = MapFamily::iterates_of(f.clone())?.with_budget(opts.budget);
    let mems = members(&fam, schedule, chart)?;
    let last = mems.last().ok_or(DynamicsError::ScheduleTooShort(0))?;
    let reference = Reference::build(&fam, None, chart)?;
    let limit: &CompiledMap = match reference.class(last.n) {
        Some(t) => &t.map,
        None => {
            notes.push(format!("no lift limit: iterate n = {} stands in for the limit", last.n));
            &last.target.map
        }
    };

    let targets: Vec<ProjectivePoint> = grid
        .cells
        .iter()
        .filter(|c| c.verdict == CellVerdict::InPhiS)
        .filter_map(|c| limit.eval(&c.center))
        .map(|t| t.factors[0].clone())
        .collect();
    let curve = fit_curve(&targets, opts.fit_accept)?;

    let fiber: Vec<TargetPoint> = sphere_directions(2, opts.fiber_directions)
        .iter()
        .filter_map(|u| {
            let x: Vec<C64> = p_aff.iter().zip(u).map(|(a, d)| a + d * opts.fiber_radius).collect();
            limit.eval(&x)
        })
        .collect();

    let mut volume_trace = Vec::with_capacity(mems.len());
    for m in &mems {
        let vo = VolumeOptions { focus: vec![p_aff.clone()], indeterminacy: m.target.indet.clone(), ..VolumeOptions::default() };
        let v = volume(&m.target.map, &opts.volume_region, opts.volume_samples, opts.seed, &vo)?;
        volume_trace.push(VolumePoint { n: m.n, value: v.value, stderr: v.stderr });
    }

    Ok(DichotomyReport {
        schema: 1,
        exceptional_point: ProjectivePoint::from_affine(&p_aff, chart).coords().to_vec(),
        exceptional_cells: weak_only.iter().map(|c| c.index).collect(),
        curve,
        fiber_spread: spread(&fiber),
        fiber_samples: fiber.len(),
        volume_trace,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(z: [f64; 3]) -> ProjectivePoint {
        ProjectivePoint::new(z.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn fits_a_line_and_a_conic() {
        let line: Vec<_> = (0..20).map(|k| pt([0.0, 1.0, k as f64 * 0.3 - 2.0])).collect();
        let fit = fit_curve(&line, 1e-9).unwrap();
        assert_eq!(fit.degree, 1);
        assert!((fit.coefficients[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(fit.coefficients[1].norm() < 1e-12 && fit.coefficients[2].norm() < 1e-12);

        // z0 z2 = z1^2, parametrized by [1 : t : t^2]
        let conic: Vec<_> = (0..30).map(|k| { let t = k as f64 * 0.1 - 1.5; pt([1.0, t, t * t]) }).collect();
        let fit = fit_curve(&conic, 1e-9).unwrap();
        assert_eq!(fit.degree, 2);
        let c = |e: [u32; 3]| fit.coefficients[fit.monomials.iter().position(|m| *m == e).unwrap()];
        assert!((c([1, 0, 1]) + c([0, 2, 0])).norm() < 1e-9);
    }

    #[test]
    fn generic_points_fit_no_curve() {
        let pts: Vec<_> = (0..60)
            .map(|k| { let k = k as f64; pt([1.0, (k * 0.37).sin() * 2.0, (k * 0.71).cos() * 3.0 + k * 0.01]) })
            .collect();
        assert!(matches!(fit_curve(&pts, 1e-6), Err(DynamicsError::CurveFitFailed { max_degree: 3, .. })));
    }
}
