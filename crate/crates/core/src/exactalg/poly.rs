use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use super::sparse::{self, SparsePoly};
use super::text::parse_terms;
use super::{AlgebraError, GaussianRational, UniPoly};
use crate::scalar::Real;

/// Exponent vector of a monomial, one entry per variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }
}

/// Homogeneous polynomial over `Q(i)` in `nvars` variables `z0, z1, ...`.
///
/// The zero polynomial keeps a nominal degree so sums type-check.
#[derive(Clone, PartialEq, Eq)]
pub struct HomoPoly {
    degree: u32,
    inner: SparsePoly,
}

impl HomoPoly {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        Self { degree, inner: SparsePoly::zero(nvars) }
    }

    pub fn constant(nvars: usize, c: GaussianRational) -> Self {
        Self { degree: 0, inner: SparsePoly::constant(nvars, c) }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, GaussianRational::one())
    }

    /// The coordinate `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(Monomial(e), GaussianRational::one())
    }

    pub fn monomial(m: Monomial, c: GaussianRational) -> Self {
        let degree = m.degree();
        let nvars = m.nvars();
        let mut terms = BTreeMap::new();
        terms.insert(m.0, c);
        Self { degree, inner: SparsePoly::from_terms(nvars, terms) }
    }

    /// Build from terms; fails unless all monomials share one degree.
    /// `degree` is required only to type an empty (zero) term list.
    pub fn from_terms(
        nvars: usize,
        degree: Option<u32>,
        terms: impl IntoIterator<Item = (Monomial, GaussianRational)>,
    ) -> Result<Self, AlgebraError> {
        let mut map: BTreeMap<Vec<u32>, GaussianRational> = BTreeMap::new();
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(AlgebraError::VariableCountMismatch(nvars, m.nvars()));
            }
            *map.entry(m.0).or_insert_with(GaussianRational::zero) += &c;
        }
        let inner = SparsePoly::from_terms(nvars, map);
        Self::from_sparse(inner, degree)
    }

    pub(crate) fn from_sparse(inner: SparsePoly, degree: Option<u32>) -> Result<Self, AlgebraError> {
        let mut degs = inner.terms.keys().map(|e| e.iter().sum::<u32>());
        let d = match degs.next() {
            Some(d) => d,
            None => return Ok(Self { degree: degree.unwrap_or(0), inner }),
        };
        if degs.any(|x| x != d) {
            return Err(AlgebraError::NotHomogeneous);
        }
        if let Some(want) = degree {
            if want != d {
                return Err(AlgebraError::DegreeMismatch(want, d));
            }
        }
        Ok(Self { degree: d, inner })
    }

    pub fn nvars(&self) -> usize {
        self.inner.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    pub fn num_terms(&self) -> usize {
        self.inner.terms.len()
    }

    pub fn is_monomial(&self) -> bool {
        self.num_terms() == 1
    }

    /// Terms in ascending lexicographic order of exponents.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&[u32], &GaussianRational)> + '_ {
        self.inner.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coeff(&self, exps: &[u32]) -> GaussianRational {
        self.inner.terms.get(exps).cloned().unwrap_or_default()
    }

    /// Leading term in the lexicographic order `z0 > z1 > ...`.
    pub fn leading(&self) -> Option<(&[u32], &GaussianRational)> {
        self.inner.leading().map(|(e, c)| (e.as_slice(), c))
    }

    fn check_vars(&self, rhs: &Self) -> Result<(), AlgebraError> {
        if self.nvars() != rhs.nvars() {
            return Err(AlgebraError::VariableCountMismatch(self.nvars(), rhs.nvars()));
        }
        Ok(())
    }

    fn check_same_shape(&self, rhs: &Self) -> Result<(), AlgebraError> {
        self.check_vars(rhs)?;
        if self.degree != rhs.degree {
            return Err(AlgebraError::DegreeMismatch(self.degree, rhs.degree));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.check_same_shape(rhs)?;
        Ok(Self { degree: self.degree, inner: self.inner.add(&rhs.inner) })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.check_same_shape(rhs)?;
        Ok(Self { degree: self.degree, inner: self.inner.sub(&rhs.inner) })
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.check_vars(rhs)?;
        Ok(Self { degree: self.degree + rhs.degree, inner: self.inner.mul(&rhs.inner) })
    }

    pub fn neg(&self) -> Self {
        Self { degree: self.degree, inner: self.inner.neg() }
    }

    pub fn scale(&self, k: &GaussianRational) -> Self {
        Self { degree: self.degree, inner: self.inner.scale(k) }
    }

    pub fn pow(&self, k: u32) -> Self {
        Self { degree: self.degree * k, inner: self.inner.pow(k) }
    }

    /// Exact quotient, `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if self.nvars() != d.nvars() || d.is_zero() {
            return None;
        }
        let q = self.inner.div_exact(&d.inner)?;
        Some(Self { degree: self.degree.checked_sub(d.degree)?, inner: q })
    }

    /// Scale so the lex-leading coefficient is 1 (zero stays zero).
    pub fn monic(&self) -> Self {
        Self { degree: self.degree, inner: self.inner.monic() }
    }

    /// Greatest common divisor, homogeneous, with lex-leading coefficient 1.
    pub fn gcd(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.check_vars(rhs)?;
        if self.is_zero() && rhs.is_zero() {
            return Err(AlgebraError::BothZero);
        }
        let g = sparse::gcd(&self.inner, &rhs.inner);
        Self::from_sparse(g, None)
    }

    pub fn eval_exact(&self, x: &[GaussianRational]) -> Result<GaussianRational, AlgebraError> {
        if x.len() != self.nvars() {
            return Err(AlgebraError::VariableCountMismatch(self.nvars(), x.len()));
        }
        let maxdeg = self.degree as usize;
        let powers: Vec<Vec<GaussianRational>> = x
            .iter()
            .map(|xi| {
                let mut p = Vec::with_capacity(maxdeg + 1);
                p.push(GaussianRational::one());
                for k in 1..=maxdeg {
                    let next = &p[k - 1] * xi;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut acc = GaussianRational::zero();
        for (e, c) in self.terms() {
            let mut t = c.clone();
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &powers[v][k as usize];
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation with per-variable power tables.
    ///
    /// `x` must have `nvars` entries.
    pub fn eval_float<T: Real>(&self, x: &[Complex<T>]) -> Complex<T> {
        debug_assert_eq!(x.len(), self.nvars());
        let zero = Complex::new(T::zero(), T::zero());
        if self.is_zero() {
            return zero;
        }
        let maxdeg = self.degree as usize;
        let powers: Vec<Vec<Complex<T>>> = x
            .iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(maxdeg + 1);
                p.push(Complex::new(T::one(), T::zero()));
                for k in 1..=maxdeg {
                    p.push(p[k - 1] * xi);
                }
                p
            })
            .collect();
        self.terms().fold(zero, |acc, (e, c)| {
            let mut t = c.to_complex::<T>();
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t * powers[v][k as usize];
                }
            }
            acc + t
        })
    }

    /// Partial derivative with respect to `z_v`.
    pub fn derivative(&self, v: usize) -> Self {
        let nv = self.nvars();
        let mut terms = BTreeMap::new();
        for (e, c) in self.terms() {
            if e[v] == 0 {
                continue;
            }
            let mut e2 = e.to_vec();
            e2[v] -= 1;
            terms.insert(e2, c * &GaussianRational::from_int(i64::from(e[v])));
        }
        Self { degree: self.degree.saturating_sub(1), inner: SparsePoly::from_terms(nv, terms) }
    }

    /// Substitute `z_v := subs[v]`; all substitutes must share one degree `e`
    /// and variable count, and the result has degree `deg(self) * e`.
    pub fn substitute(&self, subs: &[HomoPoly]) -> Result<Self, AlgebraError> {
        if subs.len() != self.nvars() {
            return Err(AlgebraError::VariableCountMismatch(self.nvars(), subs.len()));
        }
        let nv = subs[0].nvars();
        let e = subs[0].degree;
        for s in subs {
            if s.nvars() != nv {
                return Err(AlgebraError::VariableCountMismatch(nv, s.nvars()));
            }
            if s.degree != e {
                return Err(AlgebraError::DegreeMismatch(e, s.degree));
            }
        }
        let maxdeg = self.degree as usize;
        let powers: Vec<Vec<SparsePoly>> = subs
            .iter()
            .map(|s| {
                let mut p = vec![SparsePoly::one(nv)];
                for k in 1..=maxdeg {
                    let next = p[k - 1].mul(&s.inner);
                    p.push(next);
                }
                p
            })
            .collect();
        let mut acc = SparsePoly::zero(nv);
        for (ex, c) in self.terms() {
            let mut t = SparsePoly::constant(nv, c.clone());
            for (v, &k) in ex.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&powers[v][k as usize]);
                }
            }
            acc = acc.add(&t);
        }
        Ok(Self { degree: self.degree * e, inner: acc })
    }

    /// Restriction of a two-variable form to the chart `z_chart = 1`, as a
    /// polynomial in the other variable.
    pub fn to_univariate(&self, chart: usize) -> UniPoly {
        assert_eq!(self.nvars(), 2, "binary form expected");
        let other = 1 - chart;
        let mut coeffs = vec![GaussianRational::zero(); self.degree as usize + 1];
        for (e, c) in self.terms() {
            coeffs[e[other] as usize] += c;
        }
        UniPoly::new(coeffs)
    }

    /// Total bit size of all coefficients.
    pub fn bit_size(&self) -> u64 {
        self.terms().map(|(_, c)| c.bit_size()).sum()
    }

    /// Parse the text form over `nvars` variables. The zero polynomial `0`
    /// gets degree 0; use [`HomoPoly::parse_with_degree`] to type it.
    pub fn parse(text: &str, nvars: usize) -> Result<Self, AlgebraError> {
        Self::parse_inner(text, nvars, None)
    }

    pub fn parse_with_degree(text: &str, nvars: usize, degree: u32) -> Result<Self, AlgebraError> {
        Self::parse_inner(text, nvars, Some(degree))
    }

    fn parse_inner(text: &str, nvars: usize, degree: Option<u32>) -> Result<Self, AlgebraError> {
        let terms = parse_terms(text, nvars)?;
        let mut out = Vec::with_capacity(terms.len());
        for (expr, exps) in terms {
            if expr.uses_index() {
                return Err(AlgebraError::Parse {
                    column: 1,
                    message: "coefficient depends on the family index n".into(),
                });
            }
            let c = expr.eval(None).ok_or_else(|| AlgebraError::Parse {
                column: 1,
                message: "coefficient expression divides by zero".into(),
            })?;
            out.push((Monomial(exps), c));
        }
        let all_zero_const = out.iter().all(|(_, c)| c.is_zero());
        let degree = match degree {
            Some(d) => Some(d),
            None if all_zero_const => Some(out.first().map(|(m, _)| m.degree()).unwrap_or(0)),
            None => None,
        };
        if all_zero_const {
            return Ok(Self::zero(nvars, degree.unwrap_or(0)));
        }
        Self::from_terms(nvars, degree, out)
    }
}

impl fmt::Display for HomoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", c.canonical())?;
            for (v, k) in e.iter().enumerate() {
                write!(f, "*z{v}^{k}")?;
            }
        }
        Ok(())
    }
}

impl HomoPoly {
    /// Compact human-readable form, e.g. `z0^2 - 1/2*z0*z1 + (1+2i)*z2^2`.
    /// Not accepted back by the canonical round trip; use `Display` for that.
    pub fn pretty(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms().rev().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { format!("z{v}") } else { format!("z{v}^{k}") })
                .collect();
            let (neg, mag) = if c.is_real() && c.re() < &num_rational::BigRational::zero() {
                (true, -c.clone())
            } else {
                (false, c.clone())
            };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let coeff = if mag.is_one() && !mono.is_empty() {
                String::new()
            } else if mag.is_real() {
                format!("{}", mag.re())
            } else {
                format!("{mag}")
            };
            match (coeff.is_empty(), mono.is_empty()) {
                (true, _) => out.push_str(&mono.join("*")),
                (false, true) => out.push_str(&coeff),
                (false, false) => {
                    out.push_str(&coeff);
                    out.push('*');
                    out.push_str(&mono.join("*"));
                }
            }
        }
        out
    }
}

impl fmt::Debug for HomoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomoPoly[deg {}]({})", self.degree, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, nv: usize) -> HomoPoly {
        HomoPoly::parse(s, nv).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(p("z0*z1", 3).add(&p("z0*z1", 3)).unwrap(), p("2*z0*z1", 3));
        let x = p("z0^2 - z1^2", 3);
        assert_eq!(x.add(&HomoPoly::zero(3, 2)).unwrap(), x);
        assert_eq!(x.add(&p("z1^2 - z2^2", 3)).unwrap(), p("z0^2 - z2^2", 3));
        assert_eq!(x.add(&p("z0", 3)), Err(AlgebraError::DegreeMismatch(2, 1)));
        assert_eq!(x.add(&p("z0^2", 2)), Err(AlgebraError::VariableCountMismatch(3, 2)));
    }

    #[test]
    fn cancellation_drops_terms() {
        let s = p("z0*z1 + z2^2", 3).sub(&p("z2^2", 3)).unwrap();
        assert_eq!(s.num_terms(), 1);
        let z = p("z0", 3).sub(&p("z0", 3)).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.degree(), 1);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p("z0", 2).mul(&p("z1", 2)).unwrap(), p("z0*z1", 2));
        let q = p("z0^2 + 3*z0*z1", 2);
        assert_eq!(q.mul(&HomoPoly::one(2)).unwrap(), q);
        assert_eq!(p("z0 + z1", 2).mul(&p("z0 - z1", 2)).unwrap(), p("z0^2 - z1^2", 2));
    }

    #[test]
    fn eval_examples() {
        let q = p("z0*z1", 2);
        let v = |a: GaussianRational, b: i64| vec![a, GaussianRational::from_int(b)];
        assert_eq!(q.eval_exact(&v(GaussianRational::from_int(2), 3)).unwrap(), GaussianRational::from_int(6));
        let two_i = &GaussianRational::from_int(2) * &GaussianRational::i();
        assert_eq!(q.eval_exact(&v(two_i, 3)).unwrap(), &GaussianRational::from_int(6) * &GaussianRational::i());
        let f = q.eval_float(&[Complex::new(1.0f64, 0.0), Complex::new(2.0, 0.0)]);
        assert_eq!(f, Complex::new(2.0, 0.0));
        let zero = HomoPoly::zero(2, 3).eval_float(&[Complex::new(5.0f64, 1.0), Complex::new(2.0, 0.0)]);
        assert_eq!(zero, Complex::new(0.0, 0.0));
        assert!(q.eval_exact(&[GaussianRational::one()]).is_err());
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(p("z0*z1", 3).gcd(&p("z0*z2", 3)).unwrap(), p("z0", 3));
        assert_eq!(p("z0^2 - z1^2", 2).gcd(&p("z0 - z1", 2)).unwrap(), p("z0 - z1", 2));
        let c = p("z0*z1*z2", 3);
        let g = c.mul(&p("z0", 3)).unwrap().gcd(&c.mul(&p("z1", 3)).unwrap()).unwrap();
        assert_eq!(g, c);
        assert_eq!(HomoPoly::zero(2, 1).gcd(&HomoPoly::zero(2, 1)), Err(AlgebraError::BothZero));
        // gcd with zero is the other argument made monic
        assert_eq!(HomoPoly::zero(2, 1).gcd(&p("3*z1", 2)).unwrap(), p("z1", 2));
    }

    #[test]
    fn canonical_text() {
        let q = p("z0 - {1/2}*z1 + i*z2", 3);
        let s = q.to_string();
        assert_eq!(s, "((1/1)+(0/1)i)*z0^1*z1^0*z2^0 + ((-1/2)+(0/1)i)*z0^0*z1^1*z2^0 + ((0/1)+(1/1)i)*z0^0*z1^0*z2^1");
        assert_eq!(HomoPoly::parse(&s, 3).unwrap(), q);
        assert_eq!(HomoPoly::zero(3, 2).to_string(), "0");
        assert_eq!(HomoPoly::parse_with_degree("0", 3, 2).unwrap(), HomoPoly::zero(3, 2));
        assert_eq!(HomoPoly::parse("z0 + z1^2", 2), Err(AlgebraError::NotHomogeneous));
        assert!(HomoPoly::parse("{n}*z0", 2).is_err());
    }

    #[test]
    fn substitute_composes() {
        // z0*z1 with z0 := a+b, z1 := a-b
        let q = p("z0*z1", 2);
        let s = q.substitute(&[p("z0 + z1", 2), p("z0 - z1", 2)]).unwrap();
        assert_eq!(s, p("z0^2 - z1^2", 2));
    }

    #[test]
    fn derivative_lowers_degree() {
        let q = p("z0^3 + 2*z0*z1^2", 2);
        assert_eq!(q.derivative(1), p("4*z0*z1", 2));
        assert_eq!(q.derivative(0), p("3*z0^2 + 2*z1^2", 2));
    }
}
