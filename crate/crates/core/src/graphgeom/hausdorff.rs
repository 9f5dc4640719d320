use rayon::prelude::*;

use super::{GeomError, GraphCloud, GraphPoint, MetricSpec};
use crate::scalar::Real;

/// Nearest-neighbour search over a cloud under the product metric.
///
/// A k-d tree over a Euclidean embedding of the graph: the real source
/// coordinates together with the orthogonal projector `u u^*` of each
/// target factor, scaled so that the chordal distance is
/// `|P - Q|_F / sqrt(2)`. The Euclidean distance of embeddings is then at
/// most the product distance, so boxes farther than the best distance found
/// so far are skipped without changing the answer.
pub struct NearestIndex<'a, T: Real> {
    points: &'a [GraphPoint<T>],
    dim: usize,
    /// Embeddings in tree order, `dim` reals per point.
    keys: Vec<T>,
    /// Tree position to index in `points`.
    perm: Vec<usize>,
    nodes: Vec<Node<T>>,
    metric: MetricSpec,
}

struct Node<T> {
    lo: Vec<T>,
    hi: Vec<T>,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

const LEAF: usize = 16;

fn embed<T: Real>(p: &GraphPoint<T>, target_scale: T) -> Vec<T> {
    let mut out: Vec<T> = p.source.iter().flat_map(|z| [z.re, z.im]).collect();
    let half = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    for f in &p.target.factors {
        let u = f.coords();
        let n2: T = u.iter().map(|z| z.re * z.re + z.im * z.im).sum();
        let k = target_scale * half / n2;
        for i in 0..u.len() {
            out.push(k * (u[i].re * u[i].re + u[i].im * u[i].im));
            for j in i + 1..u.len() {
                let c = u[i] * u[j].conj();
                let r2 = T::lit(std::f64::consts::SQRT_2);
                out.push(k * r2 * c.re);
                out.push(k * r2 * c.im);
            }
        }
    }
    out
}

impl<'a, T: Real> NearestIndex<'a, T> {
    pub fn new(points: &'a [GraphPoint<T>], metric: MetricSpec) -> Self {
        let scale = T::lit(metric.target_scale);
        let raw: Vec<T> = points.iter().flat_map(|p| embed(p, scale)).collect();
        let dim = if points.is_empty() { 0 } else { raw.len() / points.len() };
        let mut perm: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            build(&raw, dim, &mut perm, 0, points.len(), &mut nodes);
        }
        let keys = perm.iter().flat_map(|&i| raw[i * dim..(i + 1) * dim].iter().copied()).collect();
        Self { points, dim, keys, perm, nodes, metric }
    }

    /// Distance to, and index of, the nearest point; `None` if empty.
    pub fn nearest(&self, p: &GraphPoint<T>) -> Option<(T, usize)> {
        self.nearest_below(p, T::infinity())
    }

    /// The nearest point if it is closer than `bound`.
    pub fn nearest_below(&self, p: &GraphPoint<T>, bound: T) -> Option<(T, usize)> {
        self.search(p, bound, T::neg_infinity())
    }

    /// Like [`NearestIndex::nearest_below`], but returns the first point
    /// found within `stop`, which need not be the nearest.
    pub fn any_within(&self, p: &GraphPoint<T>, bound: T, stop: T) -> Option<(T, usize)> {
        self.search(p, bound, stop)
    }

    fn search(&self, p: &GraphPoint<T>, bound: T, stop: T) -> Option<(T, usize)> {
        if self.points.is_empty() {
            return None;
        }
        let q = embed(p, T::lit(self.metric.target_scale));
        let mut best = bound;
        let mut arg = usize::MAX;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if box_distance(&q, &node.lo, &node.hi) >= best {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    let dl = box_distance(&q, &self.nodes[l].lo, &self.nodes[l].hi);
                    let dr = box_distance(&q, &self.nodes[r].lo, &self.nodes[r].hi);
                    // the nearer child is popped first
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for k in node.start..node.end {
                        let key = &self.keys[k * self.dim..(k + 1) * self.dim];
                        let lower = key.iter().zip(&q).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt();
                        if lower >= best {
                            continue;
                        }
                        let idx = self.perm[k];
                        let d = p.distance(&self.points[idx], &self.metric);
                        if d < best {
                            best = d;
                            arg = idx;
                            if best <= stop {
                                return Some((best, arg));
                            }
                        }
                    }
                }
            }
        }
        (arg != usize::MAX).then_some((best, arg))
    }
}

fn box_distance<T: Real>(q: &[T], lo: &[T], hi: &[T]) -> T {
    q.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&x, (&a, &b))| {
            let d = if x < a {
                a - x
            } else if x > b {
                x - b
            } else {
                T::zero()
            };
            d * d
        })
        .sum::<T>()
        .sqrt()
}

fn build<T: Real>(raw: &[T], dim: usize, perm: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node<T>>) -> usize {
    let mut lo = vec![T::infinity(); dim];
    let mut hi = vec![T::neg_infinity(); dim];
    for &i in &perm[start..end] {
        for d in 0..dim {
            let v = raw[i * dim + d];
            lo[d] = lo[d].min(v);
            hi[d] = hi[d].max(v);
        }
    }
    let id = nodes.len();
    nodes.push(Node { lo: lo.clone(), hi: hi.clone(), start, end, children: None });
    if end - start > LEAF {
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).partial_cmp(&(hi[b] - lo[b])).expect("finite"))
            .unwrap_or(0);
        let mid = (start + end) / 2;
        perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            raw[a * dim + axis].partial_cmp(&raw[b * dim + axis]).expect("finite").then(a.cmp(&b))
        });
        let l = build(raw, dim, perm, start, mid, nodes);
        let r = build(raw, dim, perm, mid, end, nodes);
        nodes[id].children = Some((l, r));
    }
    id
}

fn check<T: Real>(a: &GraphCloud<T>, b: &GraphCloud<T>) -> Result<(), GeomError> {
    if a.metric != b.metric || a.region != b.region {
        return Err(GeomError::MetricMismatch);
    }
    Ok(())
}

/// `sup_{a in A} inf_{b in B} d(a, b)` with the pruned search.
pub fn directed<T: Real>(a: &GraphCloud<T>, b: &GraphCloud<T>) -> T {
    let index = NearestIndex::new(&b.points, b.metric);
    a.points
        .par_iter()
        .map(|p| index.nearest(p).map_or(T::infinity(), |(d, _)| d))
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), |m, d| if d > m { d } else { m })
}

/// Hausdorff distance between two clouds under their common product metric.
pub fn hausdorff<T: Real>(a: &GraphCloud<T>, b: &GraphCloud<T>) -> Result<T, GeomError> {
    check(a, b)?;
    let ab = directed(a, b);
    let ba = directed(b, a);
    Ok(if ab > ba { ab } else { ba })
}

/// Reference implementation: plain double loop.
pub fn hausdorff_brute<T: Real>(a: &GraphCloud<T>, b: &GraphCloud<T>) -> Result<T, GeomError> {
    check(a, b)?;
    let dir = |x: &GraphCloud<T>, y: &GraphCloud<T>| {
        x.points.iter().fold(T::zero(), |m, p| {
            let d = y.points.iter().fold(T::infinity(), |best, q| {
                let d = p.distance(q, &x.metric);
                if d < best {
                    d
                } else {
                    best
                }
            });
            if d > m {
                d
            } else {
                m
            }
        })
    };
    let ab = dir(a, b);
    let ba = dir(b, a);
    Ok(if ab > ba { ab } else { ba })
}
