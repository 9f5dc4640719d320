//! Shared machinery: instantiating schedules, sampling clouds with the right
//! special points, comparing graphs, clustering failing samples.

use num_complex::Complex;

use super::{ConvergeError, ConvergeOptions};
use crate::graphgeom::{graph_distance, sample_graph, CompactRegion, GeomError, GraphCloud, GraphDistance, SampleOptions};
use crate::meromap::{indeterminacy_points, CompiledMap, MapFamily, MapInstance, ProductMap};

type C64 = Complex<f64>;

/// A map ready for sampling, with its indeterminacy points in the chart.
pub(crate) struct Target {
    pub map: CompiledMap<f64>,
    pub indet: Vec<Vec<C64>>,
    pub exact: Option<ProductMap>,
}

impl Target {
    pub fn new(p: &ProductMap, chart: usize) -> Result<Self, ConvergeError> {
        Ok(Self { map: CompiledMap::new(p, chart), indet: indet_points(p, chart)?, exact: Some(p.clone()) })
    }

    fn from_instance(inst: &MapInstance, chart: usize) -> Result<Self, ConvergeError> {
        match inst {
            MapInstance::Exact(p) => Self::new(p, chart),
            MapInstance::Orbit { base, .. } => Ok(Self {
                map: CompiledMap::from_instance(inst, chart),
                // the base map's points stand in for those of the iterate
                indet: indet_points(&ProductMap::single(base.clone()), chart)?,
                exact: None,
            }),
        }
    }
}

/// Indeterminacy points of all factors in affine coordinates of `chart`,
/// without duplicates.
pub(crate) fn indet_points(p: &ProductMap, chart: usize) -> Result<Vec<Vec<C64>>, ConvergeError> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for f in p.factors() {
        for q in indeterminacy_points(f)?.points {
            if let Some(x) = q.affine(chart) {
                if !out.iter().any(|y| dist(y, &x) < 1e-9) {
                    out.push(x);
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn dist(x: &[C64], y: &[C64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) struct Member {
    pub n: usize,
    pub target: Target,
}

pub(crate) fn members(fam: &MapFamily, schedule: &[usize], chart: usize) -> Result<Vec<Member>, ConvergeError> {
    super::check_schedule(schedule)?;
    fam.instantiate_schedule(schedule)?
        .iter()
        .map(|(n, inst)| Ok(Member { n: *n, target: Target::from_instance(inst, chart)? }))
        .collect()
}

pub(crate) fn any_orbit(members: &[Member]) -> bool {
    members.iter().any(|m| m.target.exact.is_none())
}

/// What the members are compared with.
pub(crate) enum Reference {
    /// One limit per residue class of `n`.
    Classes(Vec<Target>),
    /// No limit known: consecutive members of the same class are compared.
    Cauchy(usize),
}

impl Reference {
    pub fn build(fam: &MapFamily, limit: Option<&ProductMap>, chart: usize) -> Result<Self, ConvergeError> {
        if let Some(l) = limit {
            return Ok(Reference::Classes(vec![Target::new(l, chart)?]));
        }
        match fam.lift_limit() {
            Some(lim) => Ok(Reference::Classes(
                lim.classes.iter().map(|c| Target::new(c, chart)).collect::<Result<_, _>>()?,
            )),
            None => Ok(Reference::Cauchy(1)),
        }
    }

    pub fn period(&self) -> usize {
        match self {
            Reference::Classes(c) => c.len(),
            Reference::Cauchy(p) => *p,
        }
    }

    pub fn class(&self, n: usize) -> Option<&Target> {
        match self {
            Reference::Classes(c) => Some(&c[n % c.len()]),
            Reference::Cauchy(_) => None,
        }
    }

    /// Indeterminacy points of all classes.
    pub fn indet(&self) -> Vec<Vec<C64>> {
        match self {
            Reference::Classes(c) => c.iter().flat_map(|t| t.indet.iter().cloned()).collect(),
            Reference::Cauchy(_) => Vec::new(),
        }
    }
}

pub(crate) struct Comparison {
    pub dist: GraphDistance,
    pub a: GraphCloud,
    pub b: GraphCloud,
}

impl Comparison {
    /// Sources of samples (from either cloud) farther than `tol` from the
    /// other graph.
    pub fn failing_sources(&self, tol: f64) -> Vec<Vec<C64>> {
        let pick = |cloud: &GraphCloud, d: &[f64]| {
            cloud.points.iter().zip(d).filter(|(_, &d)| d > tol).map(|(p, _)| p.source.clone()).collect::<Vec<_>>()
        };
        let mut out = pick(&self.a, &self.dist.forward);
        out.extend(pick(&self.b, &self.dist.backward));
        out
    }
}

pub(crate) struct Sampler<'a> {
    pub region: CompactRegion,
    pub opts: &'a ConvergeOptions,
}

impl<'a> Sampler<'a> {
    pub fn new(region: &CompactRegion, opts: &'a ConvergeOptions) -> Self {
        Self { region: region.clone(), opts }
    }

    pub fn with_region(&self, region: CompactRegion) -> Self {
        Self { region, opts: self.opts }
    }

    pub fn cloud(&self, t: &Target, specials: &[Vec<C64>]) -> Result<GraphCloud, GeomError> {
        let q = self.region.dim();
        let opts = SampleOptions {
            own_indeterminacy: t.indet.iter().filter(|x| x.len() == q).cloned().collect(),
            special_points: specials.iter().filter(|x| x.len() == q && !t.indet.contains(x)).cloned().collect(),
            metric: self.opts.metric,
            ..SampleOptions::default()
        };
        sample_graph(&t.map, &self.region, self.opts.samples, self.opts.seed, &opts)
    }

    /// Graph distance between `a` and `b`, each cloud ringed around the
    /// other's indeterminacy points and around `extra`.
    pub fn compare(&self, a: &Target, b: &Target, extra: &[Vec<C64>]) -> Result<Comparison, GeomError> {
        let sa: Vec<Vec<C64>> = b.indet.iter().chain(extra).cloned().collect();
        let sb: Vec<Vec<C64>> = a.indet.iter().chain(extra).cloned().collect();
        let ca = self.cloud(a, &sa)?;
        let cb = self.cloud(b, &sb)?;
        let dist = graph_distance(&ca, Some(&a.map), &cb, Some(&b.map), self.opts.tol, &self.opts.projection)?;
        Ok(Comparison { dist, a: ca, b: cb })
    }

    /// Distances of the members from the reference, or between consecutive
    /// members of a class when there is no reference. Returns the trace and
    /// the last comparison.
    pub fn trace(
        &self,
        members: &[Member],
        reference: &Reference,
        extra: &[Vec<C64>],
    ) -> Result<(Vec<(usize, f64)>, Option<Comparison>), GeomError> {
        let mut trace = Vec::new();
        let mut last = None;
        match reference {
            Reference::Classes(_) => {
                for m in members {
                    let l = reference.class(m.n).expect("classes");
                    let c = self.compare(&m.target, l, extra)?;
                    trace.push((m.n, c.dist.value));
                    last = Some(c);
                }
            }
            Reference::Cauchy(period) => {
                for (k, m) in members.iter().enumerate() {
                    let Some(prev) = members[..k].iter().rev().find(|p| (m.n - p.n) % period == 0) else { continue };
                    let c = self.compare(&m.target, &prev.target, extra)?;
                    trace.push((m.n, c.dist.value));
                    last = Some(c);
                }
            }
        }
        Ok((trace, last))
    }
}

/// Single-linkage clusters of `points` at linkage distance `link`, each a
/// sorted list of indices; clusters are ordered by their first index.
pub(crate) fn cluster(points: &[Vec<C64>], link: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist(&points[i], &points[j]) <= link {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

pub(crate) fn centroid(points: &[Vec<C64>], idx: &[usize]) -> Vec<C64> {
    let q = points[idx[0]].len();
    let mut c = vec![C64::new(0.0, 0.0); q];
    for &i in idx {
        for (s, x) in c.iter_mut().zip(&points[i]) {
            *s += x;
        }
    }
    c.iter().map(|s| s / idx.len() as f64).collect()
}

/// Exceptional point candidates: clustered failing sources, each centroid
/// replaced by the nearest of `anchors` within `snap` if there is one.
pub(crate) fn exceptional_candidates(
    failing: &[Vec<C64>],
    anchors: &[Vec<C64>],
    link: f64,
    snap: f64,
    max_points: usize,
) -> Result<Vec<Vec<C64>>, ConvergeError> {
    if failing.is_empty() {
        return Ok(Vec::new());
    }
    let clusters = cluster(failing, link);
    if clusters.len() > max_points {
        return Err(ConvergeError::ExceptionalSetNotFinite { found: clusters.len(), max: max_points });
    }
    let mut out: Vec<Vec<C64>> = Vec::new();
    for c in clusters {
        let mid = centroid(failing, &c);
        let spread = c.iter().map(|&i| dist(&failing[i], &mid)).fold(0.0, f64::max);
        let best = anchors
            .iter()
            .map(|a| (dist(a, &mid), a))
            .filter(|(d, _)| *d <= snap + spread)
            .min_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
        let p = best.map_or(mid, |(_, a)| a.clone());
        if !out.iter().any(|q| dist(q, &p) < 1e-12) {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_by_linkage() {
        let p = |a: f64| vec![C64::new(a, 0.0)];
        let pts = vec![p(0.0), p(0.05), p(0.5), p(0.1), p(0.55)];
        let c = cluster(&pts, 0.06);
        assert_eq!(c, vec![vec![0, 1, 3], vec![2, 4]]);
        let anchors = vec![p(0.0)];
        let e = exceptional_candidates(&pts, &anchors, 0.06, 0.01, 4).unwrap();
        assert_eq!(e[0], p(0.0));
        assert!((e[1][0].re - 0.525).abs() < 1e-12);
        assert!(matches!(
            exceptional_candidates(&pts, &anchors, 0.01, 0.01, 2),
            Err(ConvergeError::ExceptionalSetNotFinite { .. })
        ));
    }
}
