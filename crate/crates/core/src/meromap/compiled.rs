//! Float evaluation of maps in a fixed source chart.

use num_complex::Complex;

use super::{MapInstance, ProductMap, ProjectivePoint, RationalMap, Source};
use crate::exactalg::HomoPoly;
use crate::graphgeom::fs_distance;
use crate::scalar::{norm_sqr, vec_norm, Real};

/// A point of a product of projective spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetPoint<T: Real = f64> {
    pub factors: Vec<ProjectivePoint<T>>,
}

impl<T: Real> TargetPoint<T> {
    pub fn single(p: ProjectivePoint<T>) -> Self {
        Self { factors: vec![p] }
    }

    /// Sum of the chordal distances of the factors.
    pub fn distance(&self, other: &Self) -> T {
        self.factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| fs_distance(a.coords(), b.coords()))
            .sum()
    }
}

#[derive(Clone, Debug)]
struct Poly<T> {
    terms: Vec<(Complex<T>, Vec<u32>)>,
}

impl<T: Real> Poly<T> {
    fn new(p: &HomoPoly) -> Self {
        Self { terms: p.terms().map(|(e, c)| (c.to_complex::<T>(), e.to_vec())).collect() }
    }

    fn eval(&self, pw: &[Vec<Complex<T>>]) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (c, e) in &self.terms {
            let mut t = *c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t * pw[i][k as usize];
                }
            }
            acc = acc + t;
        }
        acc
    }
}

#[derive(Clone, Debug)]
struct Factor<T> {
    degree: u32,
    comps: Vec<Poly<T>>,
    /// `deriv[i][v] = dF_i / dz_v`.
    deriv: Vec<Vec<Poly<T>>>,
}

impl<T: Real> Factor<T> {
    fn new(f: &RationalMap) -> Self {
        let nv = f.nvars();
        Self {
            degree: f.degree(),
            comps: f.components().iter().map(Poly::new).collect(),
            deriv: f
                .components()
                .iter()
                .map(|c| (0..nv).map(|v| Poly::new(&c.derivative(v))).collect())
                .collect(),
        }
    }

    fn eval(&self, pw: &[Vec<Complex<T>>]) -> Vec<Complex<T>> {
        self.comps.iter().map(|p| p.eval(pw)).collect()
    }

    fn jacobian(&self, pw: &[Vec<Complex<T>>]) -> Vec<Vec<Complex<T>>> {
        self.deriv.iter().map(|row| row.iter().map(|p| p.eval(pw)).collect()).collect()
    }
}

fn powers<T: Real>(z: &[Complex<T>], d: u32) -> Vec<Vec<Complex<T>>> {
    z.iter()
        .map(|&x| {
            let mut v = Vec::with_capacity(d as usize + 1);
            v.push(Complex::new(T::one(), T::zero()));
            for k in 1..=d as usize {
                let prev = v[k - 1];
                v.push(prev * x);
            }
            v
        })
        .collect()
}

#[derive(Clone, Debug)]
enum Kind<T> {
    Direct(Vec<Factor<T>>),
    Orbit { base: Factor<T>, steps: usize },
}

/// A map prepared for repeated float evaluation at affine points of one
/// source chart.
///
/// Affine sources always use the chart `z0 = 1`; projective sources may use
/// any coordinate chart.
#[derive(Clone, Debug)]
pub struct CompiledMap<T: Real = f64> {
    source: Source,
    chart: usize,
    kind: Kind<T>,
}

/// Homogeneous values and derivatives along the affine coordinates, one
/// entry per target factor.
pub type LiftJet<T> = Vec<(Vec<Complex<T>>, Vec<Vec<Complex<T>>>)>;

impl<T: Real> CompiledMap<T> {
    pub fn new(map: &ProductMap, chart: usize) -> Self {
        assert!(chart < map.source().nvars(), "chart index out of range");
        Self { source: map.source(), chart, kind: Kind::Direct(map.factors().iter().map(Factor::new).collect()) }
    }

    pub fn from_map(map: &RationalMap, chart: usize) -> Self {
        Self::new(&ProductMap::single(map.clone()), chart)
    }

    pub fn from_instance(inst: &MapInstance, chart: usize) -> Self {
        match inst {
            MapInstance::Exact(p) => Self::new(p, chart),
            MapInstance::Orbit { base, steps } => {
                Self { source: base.source(), chart, kind: Kind::Orbit { base: Factor::new(base), steps: *steps } }
            }
        }
    }

    /// Complex dimension of the source chart.
    pub fn source_dim(&self) -> usize {
        self.source.dim()
    }

    pub fn chart(&self) -> usize {
        self.chart
    }

    pub fn is_orbit(&self) -> bool {
        matches!(self.kind, Kind::Orbit { .. })
    }

    pub fn homogenize(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut h = x.to_vec();
        h.insert(self.chart, Complex::new(T::one(), T::zero()));
        h
    }

    /// `f(x)`, or `None` at (numerical) indeterminacy.
    pub fn eval(&self, x: &[Complex<T>]) -> Option<TargetPoint<T>> {
        let z = self.homogenize(x);
        let eps = T::epsilon() * T::lit(64.0);
        match &self.kind {
            Kind::Direct(factors) => {
                let dmax = factors.iter().map(|f| f.degree).max().unwrap_or(0);
                let pw = powers(&z, dmax);
                let zn = vec_norm(&z);
                let mut out = Vec::with_capacity(factors.len());
                for f in factors {
                    let v = f.eval(&pw);
                    if vec_norm(&v) <= eps * zn.powi(f.degree as i32) {
                        return None;
                    }
                    out.push(ProjectivePoint::new(v)?);
                }
                Some(TargetPoint { factors: out })
            }
            Kind::Orbit { base, steps } => {
                let mut z = z;
                for _ in 0..*steps {
                    let zn = vec_norm(&z);
                    let v = base.eval(&powers(&z, base.degree));
                    let vn = vec_norm(&v);
                    if !(vn > eps * zn.powi(base.degree as i32)) {
                        return None;
                    }
                    z = v.iter().map(|c| *c / vn).collect();
                }
                Some(TargetPoint::single(ProjectivePoint::new(z)?))
            }
        }
    }

    /// Homogeneous lift and its derivatives along the affine source
    /// coordinates at `x`. Any holomorphic rescaling of the lift is allowed,
    /// so orbit steps divide by a frozen constant.
    pub fn jet(&self, x: &[Complex<T>]) -> LiftJet<T> {
        let z = self.homogenize(x);
        let free: Vec<usize> = (0..z.len()).filter(|&i| i != self.chart).collect();
        let restrict = |jac: Vec<Vec<Complex<T>>>| -> Vec<Vec<Complex<T>>> {
            jac.into_iter().map(|row| free.iter().map(|&v| row[v]).collect()).collect()
        };
        match &self.kind {
            Kind::Direct(factors) => {
                let dmax = factors.iter().map(|f| f.degree).max().unwrap_or(0);
                let pw = powers(&z, dmax);
                factors.iter().map(|f| (f.eval(&pw), restrict(f.jacobian(&pw)))).collect()
            }
            Kind::Orbit { base, steps } => {
                let q = free.len();
                let n = z.len();
                // dz[i][a] = d z_i / d x_a
                let mut dz: Vec<Vec<Complex<T>>> = (0..n)
                    .map(|i| {
                        (0..q)
                            .map(|a| if free[a] == i { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) })
                            .collect()
                    })
                    .collect();
                let mut z = z;
                for _ in 0..*steps {
                    let pw = powers(&z, base.degree);
                    let v = base.eval(&pw);
                    let jac = base.jacobian(&pw);
                    let mut ndz = vec![vec![Complex::new(T::zero(), T::zero()); q]; n];
                    for i in 0..n {
                        for a in 0..q {
                            let mut s = Complex::new(T::zero(), T::zero());
                            for k in 0..n {
                                s = s + jac[i][k] * dz[k][a];
                            }
                            ndz[i][a] = s;
                        }
                    }
                    let scale = largest(&v);
                    if norm_sqr(scale) == T::zero() {
                        return vec![(v, ndz)];
                    }
                    z = v.iter().map(|c| *c / scale).collect();
                    dz = ndz.iter().map(|row| row.iter().map(|c| *c / scale).collect()).collect();
                }
                vec![(z, dz)]
            }
        }
    }
}

fn largest<T: Real>(v: &[Complex<T>]) -> Complex<T> {
    let mut best = Complex::new(T::zero(), T::zero());
    for c in v {
        if norm_sqr(*c) > norm_sqr(best) {
            best = *c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meromap::MapFamily;

    type C = Complex<f64>;

    #[test]
    fn direct_and_orbit_agree() {
        let f = RationalMap::parse(Source::Projective(2), &["z0^2", "z1^2 + z0*z2", "z2^2 - z0*z1"]).unwrap();
        let fam = MapFamily::iterates_of(f).unwrap();
        let exact = fam.instantiate(3).unwrap();
        let direct = CompiledMap::<f64>::from_instance(&exact, 0);
        let orbit = CompiledMap::<f64>::from_instance(&MapInstance::Orbit { base: fam.base().unwrap().clone(), steps: 3 }, 0);
        let x = [C::new(0.3, -0.2), C::new(-0.1, 0.4)];
        let a = direct.eval(&x).unwrap();
        let b = orbit.eval(&x).unwrap();
        assert!(a.distance(&b) < 1e-12);

        // derivatives of the affine target coordinates agree too
        let affine = |jet: &LiftJet<f64>| {
            let (v, d) = &jet[0];
            (0..2)
                .map(|a| d[1][a] / v[0] - v[1] * d[0][a] / (v[0] * v[0]))
                .collect::<Vec<_>>()
        };
        let ja = affine(&direct.jet(&x));
        let jb = affine(&orbit.jet(&x));
        for (p, q) in ja.iter().zip(&jb) {
            assert!((p - q).norm() < 1e-9 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn indeterminacy_is_undefined() {
        let f = RationalMap::parse(Source::Affine(2), &["z1", "z2"]).unwrap();
        let c = CompiledMap::<f64>::from_map(&f, 0);
        assert!(c.eval(&[C::new(0.0, 0.0), C::new(0.0, 0.0)]).is_none());
        let p = c.eval(&[C::new(1.0, 0.0), C::new(1.0, 0.0)]).unwrap();
        assert!((p.factors[0].coords()[0] - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn single_precision() {
        let c = CompiledMap::<f32>::from_map(&RationalMap::cremona(), 0);
        let p = c.eval(&[Complex::new(2.0f32, 0.0), Complex::new(4.0, 0.0)]).unwrap();
        // [8 : 4 : 2] -> [1 : 1/2 : 1/4]
        assert!((p.factors[0].coords()[2].re - 0.25).abs() < 1e-6);
    }
}
