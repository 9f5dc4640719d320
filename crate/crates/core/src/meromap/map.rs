use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::Zero;

use super::{MapError, ProjectivePoint};
use crate::exactalg::{certify_coprime, GaussianRational, HomoPoly};
use crate::scalar::{vec_norm, Real};

/// Default cap on the total coefficient bit size of an iterate.
pub const DEFAULT_BIT_BUDGET: u64 = 1_000_000;

/// Domain of a map: `CP^n`, or an affine chart `C^n` homogenized with `z0`
/// as the extra coordinate (so the affine coordinates are `z1..zn`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Projective(usize),
    Affine(usize),
}

impl Source {
    /// Complex dimension `n`.
    pub fn dim(self) -> usize {
        match self {
            Source::Projective(n) | Source::Affine(n) => n,
        }
    }

    /// Number of homogeneous variables, `n + 1`.
    pub fn nvars(self) -> usize {
        self.dim() + 1
    }

    pub fn is_projective(self) -> bool {
        matches!(self, Source::Projective(_))
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Projective(n) => write!(f, "P{n}"),
            Source::Affine(n) => write!(f, "A{n}"),
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_at(s.len().min(1));
        let n: usize = rest.parse().map_err(|_| format!("bad source '{s}', expected P<n> or A<n>"))?;
        if n == 0 {
            return Err(format!("bad source '{s}': dimension must be positive"));
        }
        match kind {
            "P" => Ok(Source::Projective(n)),
            "A" => Ok(Source::Affine(n)),
            _ => Err(format!("bad source '{s}', expected P<n> or A<n>")),
        }
    }
}

/// A rational map in gcd-free normal form.
///
/// `components` are `m + 1` forms of one common degree in `n + 1`
/// variables; the map is `z -> [F_0(z) : ... : F_m(z)]`.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMap {
    source: Source,
    components: Vec<HomoPoly>,
}

/// Result of [`RationalMap::iterate`].
#[derive(Clone, Debug)]
pub struct Iteration {
    pub map: RationalMap,
    /// `deg(f^j)` for `j = 1..=k`.
    pub degree_trace: Vec<u32>,
}

impl RationalMap {
    /// Divide the components by their gcd.
    pub fn normalize(source: Source, components: Vec<HomoPoly>) -> Result<Self, MapError> {
        Self::normalize_with_factor(source, components).map(|(m, _)| m)
    }

    /// Like [`normalize`](Self::normalize), also returning the cancelled gcd.
    pub fn normalize_with_factor(
        source: Source,
        components: Vec<HomoPoly>,
    ) -> Result<(Self, HomoPoly), MapError> {
        let nv = source.nvars();
        let d = components.iter().find(|c| !c.is_zero()).map(HomoPoly::degree).ok_or(MapError::AllZero)?;
        for c in &components {
            if c.nvars() != nv {
                return Err(MapError::DimensionMismatch { expected: nv, found: c.nvars() });
            }
            if c.degree() != d && !c.is_zero() {
                return Err(MapError::DegreeMismatch(d, c.degree()));
            }
        }
        if certify_coprime(&components.iter().collect::<Vec<_>>()) {
            return Ok((Self { source, components }, HomoPoly::one(nv)));
        }
        let mut g: Option<HomoPoly> = None;
        for c in components.iter().filter(|c| !c.is_zero()) {
            g = Some(match g {
                None => c.monic(),
                Some(acc) => acc.gcd(c)?,
            });
        }
        let g = g.ok_or(MapError::AllZero)?;
        let dd = d - g.degree();
        let components = components
            .iter()
            .map(|c| {
                if c.is_zero() {
                    HomoPoly::zero(nv, dd)
                } else {
                    c.div_exact(&g).expect("gcd divides every component")
                }
            })
            .collect();
        Ok((Self { source, components }, g))
    }

    /// Parse components written in the polynomial text grammar.
    pub fn parse(source: Source, components: &[&str]) -> Result<Self, MapError> {
        let nv = source.nvars();
        let mut polys: Vec<HomoPoly> = Vec::with_capacity(components.len());
        for c in components {
            polys.push(HomoPoly::parse(c, nv)?);
        }
        let d = polys.iter().filter(|p| !p.is_zero()).map(HomoPoly::degree).next().unwrap_or(0);
        for p in polys.iter_mut() {
            if p.is_zero() {
                *p = HomoPoly::zero(nv, d);
            }
        }
        Self::normalize(source, polys)
    }

    pub fn identity(n: usize) -> Self {
        let nv = n + 1;
        Self {
            source: Source::Projective(n),
            components: (0..nv).map(|i| HomoPoly::var(nv, i)).collect(),
        }
    }

    /// The standard quadratic involution `[z1z2 : z0z2 : z0z1]` of `CP^2`.
    pub fn cremona() -> Self {
        Self::parse(Source::Projective(2), &["z1*z2", "z0*z2", "z0*z1"]).expect("valid literal")
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn components(&self) -> &[HomoPoly] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.components[0].degree()
    }

    /// `m` for a map into `CP^m`.
    pub fn target_dim(&self) -> usize {
        self.components.len() - 1
    }

    pub fn nvars(&self) -> usize {
        self.source.nvars()
    }

    pub fn is_self_map(&self) -> bool {
        self.source.is_projective() && self.target_dim() == self.source.dim()
    }

    pub fn bit_size(&self) -> u64 {
        self.components.iter().map(HomoPoly::bit_size).sum()
    }

    /// Same map with a different domain descriptor (same variable count).
    pub fn with_source(&self, source: Source) -> Result<Self, MapError> {
        if source.nvars() != self.nvars() {
            return Err(MapError::DimensionMismatch { expected: self.nvars(), found: source.nvars() });
        }
        Ok(Self { source, components: self.components.clone() })
    }

    /// `true` when the component tuples are proportional.
    pub fn projectively_equal(&self, other: &Self) -> bool {
        if self.source != other.source || self.components.len() != other.components.len() {
            return false;
        }
        let pick = self.components.iter().zip(&other.components).find(|(a, _)| !a.is_zero());
        let (a, b) = match pick {
            Some(p) => p,
            None => return false,
        };
        let (ea, ca) = a.leading().expect("nonzero");
        let cb = b.coeff(ea);
        let ratio = match cb.checked_div(ca) {
            Some(r) if !r.is_zero() => r,
            _ => return false,
        };
        self.components.iter().zip(&other.components).all(|(x, y)| x.scale(&ratio) == *y)
    }

    /// `g ∘ f` in normal form.
    pub fn compose(g: &Self, f: &Self) -> Result<Self, MapError> {
        Self::compose_with_factor(g, f).map(|(m, _)| m)
    }

    /// `g ∘ f` together with the common factor cancelled during reduction.
    /// `deg(g∘f) + deg(factor) = deg(g) * deg(f)` always holds.
    pub fn compose_with_factor(g: &Self, f: &Self) -> Result<(Self, HomoPoly), MapError> {
        if g.nvars() != f.components.len() {
            return Err(MapError::DimensionMismatch { expected: g.nvars(), found: f.components.len() });
        }
        let raw: Vec<HomoPoly> =
            g.components.iter().map(|c| c.substitute(&f.components)).collect::<Result<_, _>>()?;
        Self::normalize_with_factor(f.source, raw)
    }

    /// All iterates `f^1..f^k`, each reduced. Fails once the coefficient bit
    /// size of an iterate exceeds `budget`.
    pub fn iterates(&self, k: usize, budget: u64) -> Result<Vec<Self>, MapError> {
        if !self.is_self_map() {
            return Err(MapError::NotASelfMap);
        }
        let mut out = Vec::with_capacity(k);
        let mut cur = self.clone();
        for step in 1..=k {
            if step > 1 {
                cur = Self::compose(self, &cur)?;
            }
            let bits = cur.bit_size();
            if bits > budget {
                return Err(MapError::BudgetExceeded { step, bits, budget });
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// `f^k` with the degree trace `deg(f^j)`, `j <= k`.
    pub fn iterate(&self, k: usize, budget: u64) -> Result<Iteration, MapError> {
        if k == 0 {
            return Err(MapError::ZeroIterate);
        }
        let all = self.iterates(k, budget)?;
        let degree_trace = all.iter().map(Self::degree).collect();
        Ok(Iteration { map: all.into_iter().last().expect("k >= 1"), degree_trace })
    }

    /// Raw homogeneous values `F_i(z)` at homogeneous source coordinates.
    pub fn eval_lift<T: Real>(&self, z: &[Complex<T>]) -> Vec<Complex<T>> {
        self.components.iter().map(|c| c.eval_float(z)).collect()
    }

    /// `f(z)`, or `None` where every component vanishes to within `tol`
    /// relative to `|z|^d`.
    pub fn eval_point<T: Real>(&self, z: &[Complex<T>], tol: T) -> Option<ProjectivePoint<T>> {
        let v = self.eval_lift(z);
        let scale = vec_norm(z).powi(self.degree() as i32);
        if vec_norm(&v) <= tol * scale {
            return None;
        }
        ProjectivePoint::new(v)
    }

    /// Relative residual `max_i |F_i(z)| / (|F_i|_1 |z|^d)` used to decide
    /// whether `z` is a common zero.
    pub fn residual(&self, z: &[Complex<f64>]) -> f64 {
        let zn = vec_norm(z);
        self.components
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| {
                let w: f64 = c.terms().map(|(_, k)| k.to_c64().norm()).sum();
                c.eval_float(z).norm() / (w * zn.powi(c.degree() as i32))
            })
            .fold(0.0, f64::max)
    }

    /// Exact test for `z` being a common zero of all components.
    pub fn annihilates(&self, z: &[GaussianRational]) -> bool {
        self.components.iter().all(|c| c.eval_exact(z).map(|v| v.is_zero()).unwrap_or(false))
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(HomoPoly::pretty).collect();
        write!(f, "[{}]", parts.join(" : "))
    }
}

impl fmt::Debug for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalMap({}, {})", self.source, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2(c: &[&str]) -> RationalMap {
        RationalMap::parse(Source::Projective(2), c).unwrap()
    }

    #[test]
    fn normalize_cancels_common_factor() {
        let m = RationalMap::parse(Source::Projective(2), &["z0*z2", "z1*z2"]).unwrap();
        assert_eq!(m.components()[0], HomoPoly::parse("z0", 3).unwrap());
        assert_eq!(m.degree(), 1);
        let again = RationalMap::normalize(m.source(), m.components().to_vec()).unwrap();
        assert_eq!(again, m);
        assert!(matches!(
            RationalMap::normalize(Source::Projective(1), vec![HomoPoly::zero(2, 1)]),
            Err(MapError::AllZero)
        ));
    }

    #[test]
    fn cremona_times_cube_reduces() {
        let raw = ["z0*z1^2*z2^2", "z0^2*z1*z2^2", "z0^2*z1^2*z2"];
        let m = p2(&raw);
        assert_eq!(m, RationalMap::cremona());
    }

    #[test]
    fn cremona_is_an_involution() {
        let c = RationalMap::cremona();
        let (sq, factor) = RationalMap::compose_with_factor(&c, &c).unwrap();
        assert_eq!(sq, RationalMap::identity(2));
        assert_eq!(factor, HomoPoly::parse("z0*z1*z2", 3).unwrap());
        let it = c.iterate(2, DEFAULT_BIT_BUDGET).unwrap();
        assert_eq!(it.degree_trace, vec![2, 1]);
    }

    #[test]
    fn linear_iterates_have_closed_form() {
        let f = p2(&["z0", "2*z1", "2*z2"]);
        let it = f.iterate(10, DEFAULT_BIT_BUDGET).unwrap();
        assert_eq!(it.map, p2(&["z0", "1024*z1", "1024*z2"]));
        assert!(it.degree_trace.iter().all(|&d| d == 1));
        assert_eq!(RationalMap::compose(&f, &RationalMap::identity(2)).unwrap(), f);
    }

    #[test]
    fn budget_is_enforced() {
        let f = p2(&["z0^2", "z1^2 + 3*z0*z2", "z2^2 - z0*z1"]);
        let err = f.iterate(12, 5_000).unwrap_err();
        assert!(matches!(err, MapError::BudgetExceeded { .. }));
    }

    #[test]
    fn source_text() {
        assert_eq!("P2".parse::<Source>().unwrap(), Source::Projective(2));
        assert_eq!("A1".parse::<Source>().unwrap(), Source::Affine(1));
        assert!("Q2".parse::<Source>().is_err());
        assert_eq!(Source::Affine(2).to_string(), "A2");
    }

    #[test]
    fn projective_equality_ignores_scalars() {
        let a = p2(&["z0", "z1", "z2"]);
        let b = p2(&["2*z0", "2*z1", "2*z2"]);
        assert!(a.projectively_equal(&b));
        assert!(!a.projectively_equal(&p2(&["z0", "z1", "2*z2"])));
    }
}
