use num_complex::Complex;
use rayon::prelude::*;

use super::region::dist;
use super::{CompactRegion, GeomError, LowDiscrepancy, MetricSpec};
use crate::meromap::{CompiledMap, TargetPoint};
use crate::scalar::Real;

type C64 = Complex<f64>;

/// One sample `(z, f(z))` of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPoint<T: Real = f64> {
    pub source: Vec<Complex<T>>,
    pub target: TargetPoint<T>,
}

impl<T: Real> GraphPoint<T> {
    pub fn distance(&self, other: &Self, metric: &MetricSpec) -> T {
        metric.source_distance(&self.source, &other.source) + T::lit(metric.target_scale) * self.target.distance(&other.target)
    }
}

/// A finite sample of `closure(graph f) n (K x X)`.
#[derive(Clone, Debug)]
pub struct GraphCloud<T: Real = f64> {
    pub points: Vec<GraphPoint<T>>,
    pub region: CompactRegion,
    pub metric: MetricSpec,
    pub map_id: String,
    pub seed: u64,
}

/// Controls for [`sample_graph`].
#[derive(Clone, Debug)]
pub struct SampleOptions {
    /// Sample points closer than this to `own_indeterminacy` are dropped.
    pub indet_clearance: f64,
    /// Indeterminacy points of the sampled map (affine chart coordinates).
    pub own_indeterminacy: Vec<Vec<C64>>,
    /// Further points around which rings of samples are added, typically
    /// the indeterminacy points of the maps this graph is compared with.
    pub special_points: Vec<Vec<C64>>,
    pub ring_directions: usize,
    /// Smallest ring radius around special points the map is defined at.
    pub ring_min_radius: f64,
    pub metric: MetricSpec,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            indet_clearance: 1e-4,
            own_indeterminacy: Vec::new(),
            special_points: Vec::new(),
            ring_directions: 32,
            ring_min_radius: 1e-12,
            metric: MetricSpec::default(),
        }
    }
}

/// Candidate source points for a cloud: `n` quasi-uniform points of the
/// region plus geometric rings around special points.
pub fn sample_sources(region: &CompactRegion, n: usize, seed: u64, opts: &SampleOptions) -> Result<Vec<Vec<C64>>, GeomError> {
    let q = region.dim();
    let seq = LowDiscrepancy::new(2 * q, seed);
    let clear = |x: &[C64]| opts.own_indeterminacy.iter().all(|a| dist(x, a) >= opts.indet_clearance);
    let mut out = Vec::with_capacity(n);
    let max_tries = 64 * n as u64 + 1024;
    let mut k = 0u64;
    while out.len() < n && k < max_tries {
        let x = region.base_point(&seq.point(k));
        k += 1;
        if region.contains(&x) && clear(&x) {
            out.push(x);
        }
    }
    if out.is_empty() && n > 0 {
        return Err(GeomError::RegionEmpty);
    }
    let mut specials: Vec<(&Vec<C64>, f64)> = opts.own_indeterminacy.iter().map(|a| (a, opts.indet_clearance)).collect();
    specials.extend(opts.special_points.iter().map(|a| (a, opts.ring_min_radius)));
    let rmax = 0.5 * region.scale();
    for (a, rmin) in specials {
        if a.len() != q {
            continue;
        }
        let mut r = rmax;
        let mut level = 0usize;
        while r >= rmin {
            for u in ring_directions(q, opts.ring_directions, level) {
                let x: Vec<C64> = a.iter().zip(&u).map(|(c, d)| c + d * r).collect();
                if region.contains(&x) && clear(&x) {
                    out.push(x);
                }
            }
            r *= 0.5;
            level += 1;
        }
    }
    Ok(out)
}

fn ring_directions(q: usize, count: usize, level: usize) -> Vec<Vec<C64>> {
    let twist = C64::from_polar(1.0, std::f64::consts::TAU * (level as f64 * 0.381_966_011_250_105).fract());
    crate::meromap::sphere_directions(q, count)
        .into_iter()
        .map(|mut u| {
            u[0] *= twist;
            u
        })
        .collect()
}

/// Evaluate a compiled map over given source points, dropping points where
/// it is undefined. Order is preserved.
pub fn graph_from_sources<T: Real>(
    f: &CompiledMap<T>,
    sources: Vec<Vec<C64>>,
    region: &CompactRegion,
    metric: MetricSpec,
    seed: u64,
) -> GraphCloud<T> {
    let points: Vec<GraphPoint<T>> = sources
        .into_par_iter()
        .filter_map(|x| {
            let xt: Vec<Complex<T>> = x.iter().map(|c| Complex::new(T::lit(c.re), T::lit(c.im))).collect();
            f.eval(&xt).map(|t| GraphPoint { source: xt, target: t })
        })
        .collect();
    GraphCloud { points, region: region.clone(), metric, map_id: String::new(), seed }
}

/// `n` quasi-uniform graph samples over `region`, plus rings.
pub fn sample_graph<T: Real>(
    f: &CompiledMap<T>,
    region: &CompactRegion,
    n: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<GraphCloud<T>, GeomError> {
    if f.source_dim() != region.dim() {
        return Err(GeomError::UnsupportedDimension(region.dim()));
    }
    let sources = sample_sources(region, n, seed, opts)?;
    let cloud = graph_from_sources(f, sources, region, opts.metric, seed);
    if cloud.points.is_empty() {
        return Err(GeomError::RegionEmpty);
    }
    Ok(cloud)
}
