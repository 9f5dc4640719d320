//! Indeterminacy loci of rational maps on surfaces.
//!
//! For all-monomial components the locus is read off exactly. Otherwise two
//! generic combinations of the components are eliminated chart by chart with
//! Sylvester resultants, the univariate roots are paired and Newton-polished,
//! and candidates are kept when every component vanishes at them. Surviving
//! points are then snapped to small-denominator Gaussian rationals and, when
//! the snap is an exact common zero, certified.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{MapError, ProjectivePoint, RationalMap};
use crate::exactalg::{GaussianRational as Q, HomoPoly, UniPoly};

type C64 = Complex<f64>;

/// Tolerances for the numeric path.
#[derive(Clone, Copy, Debug)]
pub struct IndetConfig {
    /// Maximum relative residual of an accepted point.
    pub residual_tol: f64,
    /// Points closer than this (chordal) are merged.
    pub dedup_tol: f64,
    /// Largest denominator tried when certifying a point exactly.
    pub max_denominator: i64,
}

impl Default for IndetConfig {
    fn default() -> Self {
        Self { residual_tol: 1e-8, dedup_tol: 1e-6, max_denominator: 1 << 16 }
    }
}

/// The finite indeterminacy set of a map on a surface.
#[derive(Clone, Debug)]
pub struct IndetSet {
    pub points: Vec<ProjectivePoint>,
    pub residual_tolerance: f64,
    /// `true` when every point carries exact coordinates verified to
    /// annihilate all components.
    pub exact: bool,
}

impl IndetSet {
    pub fn empty(residual_tolerance: f64) -> Self {
        Self { points: Vec::new(), residual_tolerance, exact: true }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Points that lie in the affine chart `z0 = 1`, in affine coordinates.
    pub fn affine_points(&self) -> Vec<Vec<C64>> {
        self.points.iter().filter_map(|p| chart_zero(p)).collect()
    }

    /// Whether `p` is within `tol` (chordal) of a listed point.
    pub fn contains(&self, p: &ProjectivePoint, tol: f64) -> bool {
        self.points.iter().any(|q| q.distance(p) <= tol)
    }
}

fn chart_zero(p: &ProjectivePoint) -> Option<Vec<C64>> {
    let z0 = p.coords()[0];
    if z0.norm() < 1e-300 {
        return None;
    }
    Some(p.coords()[1..].iter().map(|c| c / z0).collect())
}

pub fn indeterminacy_locus(f: &RationalMap) -> Result<IndetSet, MapError> {
    indeterminacy_locus_with(f, &IndetConfig::default())
}

pub fn indeterminacy_locus_with(f: &RationalMap, cfg: &IndetConfig) -> Result<IndetSet, MapError> {
    if f.source().dim() != 2 {
        return Err(MapError::NotASurfaceSource(f.source()));
    }
    let comps: Vec<&HomoPoly> = f.components().iter().filter(|c| !c.is_zero()).collect();
    if f.degree() == 0 || comps.len() < 2 && comps.iter().all(|c| c.is_monomial() && pure_power(c).is_some()) {
        // constant maps and single-component maps have no common zeros
        // besides those of that one form, which is handled below when needed
        if f.degree() == 0 {
            return Ok(IndetSet::empty(cfg.residual_tol));
        }
    }
    if comps.iter().all(|c| c.is_monomial()) {
        return Ok(monomial_locus(f, &comps, cfg));
    }
    numeric_locus(f, &comps, cfg)
}

/// The resultant route alone, without the monomial shortcut. Useful as an
/// independent check of maps whose locus is also known exactly.
pub fn indeterminacy_numeric(f: &RationalMap, cfg: &IndetConfig) -> Result<IndetSet, MapError> {
    if f.source().dim() != 2 {
        return Err(MapError::NotASurfaceSource(f.source()));
    }
    let comps: Vec<&HomoPoly> = f.components().iter().filter(|c| !c.is_zero()).collect();
    if f.degree() == 0 {
        return Ok(IndetSet::empty(cfg.residual_tol));
    }
    numeric_locus(f, &comps, cfg)
}

/// Empty for curves (finite sets of codimension two do not exist there);
/// the locus for surfaces.
pub fn indeterminacy_points(f: &RationalMap) -> Result<IndetSet, MapError> {
    match f.source().dim() {
        1 => Ok(IndetSet::empty(IndetConfig::default().residual_tol)),
        2 => indeterminacy_locus(f),
        _ => Err(MapError::NotASurfaceSource(f.source())),
    }
}

/// The variable index `j` if `c` is a multiple of `z_j^d`.
fn pure_power(c: &HomoPoly) -> Option<usize> {
    let (e, _) = c.leading()?;
    let nz: Vec<usize> = e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, _)| i).collect();
    (nz.len() == 1).then(|| nz[0])
}

fn monomial_locus(f: &RationalMap, comps: &[&HomoPoly], cfg: &IndetConfig) -> IndetSet {
    // A reduced monomial system only vanishes simultaneously at coordinate
    // points; e_j is a common zero unless some component is a power of z_j.
    let m = f.nvars() - 1;
    let points = (0..=m)
        .filter(|&j| comps.iter().all(|c| pure_power(c) != Some(j)))
        .map(|j| ProjectivePoint::coordinate(m, j))
        .collect();
    IndetSet { points, residual_tolerance: cfg.residual_tol, exact: true }
}

/// Small fixed integer weights for the generic combinations.
const WEIGHTS: [[i64; 4]; 6] = [
    [1, 2, 3, 5],
    [3, -1, 2, 7],
    [2, 5, -3, 1],
    [-4, 1, 6, 3],
    [5, 3, 1, -2],
    [1, -6, 4, 9],
];

fn combine(comps: &[&HomoPoly], w: &[i64; 4], shift: usize) -> HomoPoly {
    let mut acc = HomoPoly::zero(comps[0].nvars(), comps[0].degree());
    for (i, c) in comps.iter().enumerate() {
        let k = w[(i + shift) % 4];
        acc = acc.add(&c.scale(&Q::from_int(k))).expect("same shape");
    }
    acc
}

fn numeric_locus(f: &RationalMap, comps: &[&HomoPoly], cfg: &IndetConfig) -> Result<IndetSet, MapError> {
    let mut candidates: Vec<ProjectivePoint> = Vec::new();
    for chart in 0..3 {
        let mut found = false;
        for attempt in 0..WEIGHTS.len() {
            let (p, q) = if comps.len() == 2 {
                if attempt > 0 {
                    break;
                }
                (comps[0].clone(), comps[1].clone())
            } else {
                (combine(comps, &WEIGHTS[attempt], 0), combine(comps, &WEIGHTS[(attempt + 3) % 6], 1))
            };
            if let Some(pts) = chart_solve(&p, &q, chart) {
                candidates.extend(pts);
                found = true;
                break;
            }
        }
        if !found {
            return Err(MapError::RootFindingFailed);
        }
    }

    let mut points: Vec<ProjectivePoint> = Vec::new();
    for c in candidates {
        if f.residual(c.coords()) >= cfg.residual_tol {
            continue;
        }
        if points.iter().any(|q| q.distance(&c) < cfg.dedup_tol) {
            continue;
        }
        points.push(c);
    }
    let mut exact = true;
    let points = points
        .into_iter()
        .map(|p| match certify(f, &p, cfg) {
            Some(e) => e,
            None => {
                exact = false;
                p
            }
        })
        .collect::<Vec<_>>();
    let mut points = points;
    points.sort_by(|a, b| order_key(a).partial_cmp(&order_key(b)).expect("finite"));
    Ok(IndetSet { points, residual_tolerance: cfg.residual_tol, exact })
}

fn order_key(p: &ProjectivePoint) -> Vec<f64> {
    p.coords().iter().flat_map(|c| [-c.norm(), c.re, c.im]).collect()
}

fn certify(f: &RationalMap, p: &ProjectivePoint, cfg: &IndetConfig) -> Option<ProjectivePoint> {
    let exact: Option<Vec<Q>> =
        p.coords().iter().map(|&c| Q::approximate(c, cfg.max_denominator, 1e-9)).collect();
    let exact = exact?;
    f.annihilates(&exact).then(|| ProjectivePoint::from_exact(exact)).flatten()
}

/// Dehomogenized form in the chart `z_chart = 1`, as rows indexed by the
/// exponent of the second free variable `y` holding polynomials in `x`.
fn bivariate(p: &HomoPoly, chart: usize) -> Vec<UniPoly> {
    let free: Vec<usize> = (0..3).filter(|&i| i != chart).collect();
    let d = p.degree() as usize;
    let mut rows = vec![vec![Q::zero(); d + 1]; d + 1];
    for (e, c) in p.terms() {
        rows[e[free[1]] as usize][e[free[0]] as usize] += c;
    }
    let mut out: Vec<UniPoly> = rows.into_iter().map(UniPoly::new).collect();
    while out.last().is_some_and(UniPoly::is_zero) {
        out.pop();
    }
    out
}

fn transpose(b: &[UniPoly]) -> Vec<UniPoly> {
    let dx = b.iter().filter_map(UniPoly::degree).max().map_or(0, |d| d + 1);
    let mut rows = vec![vec![Q::zero(); b.len()]; dx];
    for (j, row) in b.iter().enumerate() {
        for (i, c) in row.coeffs().iter().enumerate() {
            rows[i][j] = c.clone();
        }
    }
    let mut out: Vec<UniPoly> = rows.into_iter().map(UniPoly::new).collect();
    while out.last().is_some_and(UniPoly::is_zero) {
        out.pop();
    }
    out
}

/// `Res_y(P, Q)` as a polynomial in `x`, by exact evaluation at integer
/// nodes and Newton interpolation. `None` when `P` or `Q` is free of `y`
/// in a way that makes the resultant meaningless.
fn resultant_y(p: &[UniPoly], q: &[UniPoly], bound: usize) -> UniPoly {
    let m = p.len().saturating_sub(1);
    let n = q.len().saturating_sub(1);
    if m == 0 && n == 0 {
        // both free of y: no elimination possible
        return UniPoly::zero();
    }
    let nodes: Vec<Q> = (0..=bound as i64).map(Q::from_int).collect();
    let values: Vec<Q> = nodes
        .iter()
        .map(|x| {
            let pv: Vec<Q> = p.iter().map(|c| c.eval_exact(x)).collect();
            let qv: Vec<Q> = q.iter().map(|c| c.eval_exact(x)).collect();
            sylvester_det(&pv, &qv)
        })
        .collect();
    newton_interpolate(&nodes, &values)
}

fn sylvester_det(p: &[Q], q: &[Q]) -> Q {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    if size == 0 {
        return Q::one();
    }
    let mut a = vec![vec![Q::zero(); size]; size];
    for r in 0..n {
        for (k, c) in p.iter().rev().enumerate() {
            a[r][r + k] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in q.iter().rev().enumerate() {
            a[n + r][r + k] = c.clone();
        }
    }
    det(a)
}

fn det(mut a: Vec<Vec<Q>>) -> Q {
    let n = a.len();
    let mut d = Q::one();
    for col in 0..n {
        let piv = match (col..n).find(|&r| !a[r][col].is_zero()) {
            Some(r) => r,
            None => return Q::zero(),
        };
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        let inv = a[col][col].inv().expect("nonzero pivot");
        d = &d * &a[col][col];
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            for k in col..n {
                let t = &factor * &a[col][k];
                a[r][k] -= &t;
            }
        }
    }
    d
}

fn newton_interpolate(nodes: &[Q], values: &[Q]) -> UniPoly {
    let n = nodes.len();
    let mut dd = values.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = &dd[i] - &dd[i - 1];
            let den = &nodes[i] - &nodes[i - j];
            dd[i] = num.checked_div(&den).expect("distinct nodes");
        }
    }
    let mut poly = UniPoly::constant(dd[n - 1].clone());
    for i in (0..n - 1).rev() {
        let lin = UniPoly::new(vec![-nodes[i].clone(), Q::one()]);
        poly = poly.mul(&lin).add(&UniPoly::constant(dd[i].clone()));
    }
    poly
}

/// Common zeros of `p`, `q` in one chart. `None` if the resultant vanishes
/// identically (a shared factor in this chart).
fn chart_solve(p: &HomoPoly, q: &HomoPoly, chart: usize) -> Option<Vec<ProjectivePoint>> {
    let bp = bivariate(p, chart);
    let bq = bivariate(q, chart);
    let bound = (p.degree() * q.degree()) as usize;
    let rx = resultant_y(&bp, &bq, bound);
    let ry = resultant_y(&transpose(&bp), &transpose(&bq), bound);
    if rx.is_zero() || ry.is_zero() {
        return None;
    }
    let xs = rx.roots();
    let ys = ry.roots();
    let free: Vec<usize> = (0..3).filter(|&i| i != chart).collect();
    let dp: Vec<HomoPoly> = free.iter().map(|&v| p.derivative(v)).collect();
    let dq: Vec<HomoPoly> = free.iter().map(|&v| q.derivative(v)).collect();
    let lift = |x: C64, y: C64| {
        let mut z = vec![C64::new(0.0, 0.0); 3];
        z[chart] = C64::new(1.0, 0.0);
        z[free[0]] = x;
        z[free[1]] = y;
        z
    };
    let mut out = Vec::new();
    // When one resultant has no roots the other coordinate is unconstrained
    // only at infinity, which another chart covers.
    for &x0 in &xs {
        for &y0 in &ys {
            let (mut x, mut y) = (x0, y0);
            for _ in 0..60 {
                let z = lift(x, y);
                let (pv, qv) = (p.eval_float(&z), q.eval_float(&z));
                let (a, b) = (dp[0].eval_float(&z), dp[1].eval_float(&z));
                let (c, d) = (dq[0].eval_float(&z), dq[1].eval_float(&z));
                let det = a * d - b * c;
                if det.norm() < 1e-300 {
                    break;
                }
                let sx = (d * pv - b * qv) / det;
                let sy = (a * qv - c * pv) / det;
                x -= sx;
                y -= sy;
                if !(x.re.is_finite() && x.im.is_finite() && y.re.is_finite() && y.im.is_finite()) {
                    break;
                }
                if sx.norm() + sy.norm() < 1e-16 * (1.0 + x.norm() + y.norm()) {
                    break;
                }
            }
            let z = lift(x, y);
            if let Some(pt) = ProjectivePoint::new(z) {
                out.push(pt);
            }
            // keep the unpolished pair too: Newton can wander off singular
            // intersections where the raw roots are already accurate
            if let Some(pt) = ProjectivePoint::new(lift(x0, y0)) {
                out.push(pt);
            }
        }
    }
    Some(out)
}
