//! Dense univariate polynomials over `Q(i)`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};

use super::GaussianRational as Q;

type C64 = Complex<f64>;

/// Coefficients in ascending order; trailing zeros are trimmed.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UniPoly {
    coeffs: Vec<Q>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `t`.
    pub fn x() -> Self {
        Self::new(vec![Q::zero(), Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Q> {
        self.coeffs.last()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Q::zero();
        Self::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&-Q::one()))
    }

    pub fn scale(&self, k: &Q) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Self::new(out)
    }

    /// Euclidean division; `None` when dividing by zero.
    pub fn div_rem(&self, d: &Self) -> Option<(Self, Self)> {
        let dd = d.degree()?;
        let inv = d.leading()?.inv()?;
        let mut r = self.coeffs.clone();
        let mut q = vec![Q::zero(); r.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = &r[r.len() - 1] * &inv;
            for (j, dc) in d.coeffs.iter().enumerate() {
                let t = &c * dc;
                r[k + j] -= &t;
            }
            q[k] = c;
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Some((Self::new(q), Self::new(r)))
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(c) => self.scale(&c.inv().expect("nonzero")),
            None => Self::zero(),
        }
    }

    /// Monic gcd by the Euclidean algorithm over the field `Q(i)`.
    pub fn gcd(&self, rhs: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), rhs.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * &Q::from_int(i as i64))
                .collect(),
        )
    }

    /// `p / gcd(p, p')`, the product of the distinct irreducible factors.
    pub fn squarefree(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).expect("nonzero gcd").0.monic()
    }

    pub fn eval_exact(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(Q::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * x + c.to_c64())
    }

    /// `p(a + t)` as a polynomial in `t`.
    pub fn shift(&self, a: &Q) -> Self {
        let lin = Self::new(vec![a.clone(), Q::one()]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| acc.mul(&lin).add(&Self::constant(c.clone())))
    }

    /// Complex roots with multiplicity folded out, polished by Newton steps
    /// on the square-free part.
    pub fn roots(&self) -> Vec<C64> {
        let sf = self.squarefree();
        let coeffs: Vec<C64> = sf.coeffs.iter().map(Q::to_c64).collect();
        complex_roots(&coeffs)
    }
}

/// Roots of a polynomial with complex float coefficients (ascending order).
pub fn complex_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|z| z.norm() == 0.0) {
        c.pop();
    }
    let n = match c.len() {
        0 | 1 => return Vec::new(),
        k => k - 1,
    };
    let lead = c[n];
    let mut comp = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = -c[i] / lead;
    }
    let eig = nalgebra::linalg::Schur::new(comp).eigenvalues();
    let mut roots: Vec<C64> = match eig {
        Some(v) => v.iter().copied().collect(),
        None => Vec::new(),
    };
    let eval = |x: C64| c.iter().rev().fold(C64::new(0.0, 0.0), |acc, k| acc * x + k);
    let deriv: Vec<C64> = c.iter().enumerate().skip(1).map(|(i, k)| k * i as f64).collect();
    let eval_d = |x: C64| deriv.iter().rev().fold(C64::new(0.0, 0.0), |acc, k| acc * x + k);
    for r in roots.iter_mut() {
        for _ in 0..50 {
            let d = eval_d(*r);
            if d.norm() == 0.0 {
                break;
            }
            let step = eval(*r) / d;
            let next = *r - step;
            if !next.re.is_finite() || !next.im.is_finite() {
                break;
            }
            *r = next;
            if step.norm() <= 1e-17 * (1.0 + r.norm()) {
                break;
            }
        }
    }
    roots
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{c}*t^{i}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> UniPoly {
        UniPoly::new(c.iter().map(|&k| Q::from_int(k)).collect())
    }

    #[test]
    fn division_and_gcd() {
        // (t-1)(t-2) and (t-1)(t+3)
        let a = p(&[2, -3, 1]);
        let b = p(&[-3, 2, 1]);
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
        let (q, r) = a.mul(&b).div_rem(&b).unwrap();
        assert_eq!(q, a);
        assert!(r.is_zero());
    }

    #[test]
    fn squarefree_roots() {
        // (t-1)^3 (t+2)
        let a = p(&[-1, 1]).mul(&p(&[-1, 1])).mul(&p(&[-1, 1])).mul(&p(&[2, 1]));
        let mut r = a.roots();
        r.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert_eq!(r.len(), 2);
        assert!((r[0] - C64::new(-2.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn taylor_shift() {
        let a = p(&[0, 0, 1]);
        assert_eq!(a.shift(&Q::from_int(1)), p(&[1, 2, 1]));
    }
}
