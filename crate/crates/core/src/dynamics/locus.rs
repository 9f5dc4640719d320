use num_complex::Complex;
use serde::Serialize;

use super::fatou::{CellVerdict, FatouGrid, FatouOptions, GridSpec, Scan};
use super::{check_plane_self_map, DynamicsError};
use crate::graphgeom::splitmix64;
use crate::meromap::{point_image, CompiledMap, ProjectivePoint, RationalMap};

type C64 = Complex<f64>;

/// Smallest singular value below which the chart Jacobian counts as rank
/// deficient.
const RANK_THRESHOLD: f64 = 1e-8;

/// Grid points where `f^l` has a rank-deficient Jacobian.
#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyLocus {
    pub l: usize,
    pub threshold: f64,
    /// Grid points where `f^l` is defined.
    pub sampled: usize,
    #[serde(serialize_with = "crate::serial::cvecs")]
    pub points: Vec<Vec<C64>>,
    pub min_singular_values: Vec<f64>,
}

impl DegeneracyLocus {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Smallest singular value of the Jacobian of `g` read in the target chart
/// of its largest coordinate, or `None` where `g` is undefined.
fn smallest_singular(g: &CompiledMap, x: &[C64]) -> Option<f64> {
    g.eval(x)?;
    let jet = g.jet(x);
    let (v, d) = &jet[0];
    let k = (0..v.len()).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))?;
    let vk = v[k];
    // d(v_i / v_k) = (dv_i v_k - v_i dv_k) / v_k^2
    let rows: Vec<[C64; 2]> = (0..v.len())
        .filter(|&i| i != k)
        .map(|i| {
            let e = |a: usize| (d[i][a] * vk - v[i] * d[k][a]) / (vk * vk);
            [e(0), e(1)]
        })
        .collect();
    let [a, b] = rows[0];
    let [c, e] = rows[1];
    let frob = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + e.norm_sqr();
    let det = (a * e - b * c).norm();
    let big = ((frob + (frob * frob - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt();
    Some(if big == 0.0 { 0.0 } else { det / big })
}

/// Cell centers of `grid` over which `f^l` degenerates, i.e. has a chart
/// Jacobian of smallest singular value below `1e-8`.
pub fn degeneracy_locus_sample(f: &RationalMap, l: usize, grid: &GridSpec) -> Result<DegeneracyLocus, DynamicsError> {
    check_plane_self_map(f)?;
    let fl = f.iterate(l, u64::MAX)?.map;
    let g = CompiledMap::from_map(&fl, grid.chart);
    let mut out = DegeneracyLocus { l, threshold: RANK_THRESHOLD, sampled: 0, points: Vec::new(), min_singular_values: Vec::new() };
    for i in 0..grid.len() {
        let x = grid.center(i);
        if let Some(s) = smallest_singular(&g, &x) {
            out.sampled += 1;
            if s < RANK_THRESHOLD {
                out.points.push(x);
                out.min_singular_values.push(s);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ImageCheck {
    #[serde(serialize_with = "crate::serial::cvec")]
    pub point: Vec<C64>,
    pub verdict: CellVerdict,
    /// `grid` when read off the scan, `fresh` when tested on the spot.
    pub source: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationReport {
    pub l: usize,
    pub source_verdict: CellVerdict,
    pub images: Vec<ImageCheck>,
    /// Image samples dropped for lying near the image of the degeneracy locus.
    pub skipped: usize,
    pub vacuous: bool,
}

/// Forward propagation of Fatou membership: points of `f^l[z]` away from
/// the image of the degeneracy locus must be at least as Fatou as `z`.
///
/// Verdicts are read from `grid` where the image falls in it and computed
/// with the same cell test otherwise.
pub fn lemma_251_check(
    f: &RationalMap,
    l: usize,
    z: &ProjectivePoint,
    grid: &FatouGrid,
    opts: &FatouOptions,
) -> Result<PropagationReport, DynamicsError> {
    let chart = grid.grid.chart;
    let radius = grid.cells.first().map_or(0.75 * grid.grid.cell, |c| c.ball_radius);
    let scan = Scan::new(f, chart, radius, &grid.schedule, opts)?;
    let fresh_seed = |x: &[C64]| splitmix64(opts.seed ^ x.iter().fold(0u64, |h, c| splitmix64(h ^ c.re.to_bits() ^ c.im.to_bits().rotate_left(17))));
    let verdict_at = |x: &[C64]| -> Result<(CellVerdict, &'static str), DynamicsError> {
        match grid.verdict_at(x) {
            Some(v) => Ok((v, "grid")),
            None => Ok((scan.test(x, fresh_seed(x))?.0, "fresh")),
        }
    };
    let Some(z_aff) = z.affine(chart) else {
        return Ok(PropagationReport { l, source_verdict: CellVerdict::Undecided, images: Vec::new(), skipped: 0, vacuous: true });
    };
    let (source_verdict, _) = verdict_at(&z_aff)?;

    let fl = f.iterate(l, opts.budget)?.map;
    let locus = degeneracy_locus_sample(f, l, &grid.grid)?;
    let locus_images: Vec<ProjectivePoint> = locus
        .points
        .iter()
        .filter_map(|x| fl.eval_point(ProjectivePoint::from_affine(x, chart).coords(), 0.0))
        .collect();
    let clearance = 2.0 * grid.grid.cell;

    let mut images = Vec::new();
    let mut skipped = 0;
    for w in point_image(&fl, z, 32, 1e-3) {
        if locus_images.iter().any(|d| d.distance(&w) < clearance) {
            skipped += 1;
            continue;
        }
        let Some(w_aff) = w.affine(chart) else {
            skipped += 1;
            continue;
        };
        let (verdict, source) = verdict_at(&w_aff)?;
        if verdict < source_verdict {
            return Err(DynamicsError::PropagationViolation(format!(
                "{} at {:?} maps to {} at {:?}",
                source_verdict.as_str(),
                z_aff,
                verdict.as_str(),
                w_aff
            )));
        }
        images.push(ImageCheck { point: w_aff, verdict, source });
    }
    let vacuous = images.is_empty() || source_verdict == CellVerdict::Undecided;
    Ok(PropagationReport { l, source_verdict, images, skipped, vacuous })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meromap::Source;

    fn small_grid() -> GridSpec {
        GridSpec { chart: 0, resolution: 9, lower: [-1.125, -1.125], cell: 0.25 }
    }

    #[test]
    fn identity_has_no_degeneracy() {
        let loc = degeneracy_locus_sample(&RationalMap::identity(2), 1, &small_grid()).unwrap();
        assert!(loc.is_empty());
        assert_eq!(loc.sampled, 81);
    }

    #[test]
    fn projection_degenerates_everywhere() {
        let p = RationalMap::parse(Source::Projective(2), &["0", "z1", "z2"]).unwrap();
        let loc = degeneracy_locus_sample(&p, 1, &small_grid()).unwrap();
        // the center of the grid is the indeterminacy point
        assert_eq!(loc.sampled, 80);
        assert_eq!(loc.points.len(), 80);
    }

    #[test]
    fn cremona_degenerates_on_the_axes() {
        let loc = degeneracy_locus_sample(&RationalMap::cremona(), 1, &small_grid()).unwrap();
        assert_eq!(loc.sampled, 80);
        assert_eq!(loc.points.len(), 16);
        for x in &loc.points {
            assert!(x[0].norm() == 0.0 || x[1].norm() == 0.0);
        }
    }
}
