//! Sparse multivariate polynomials over `Q(i)` and their gcd.
//!
//! This is the inhomogeneous workhorse behind [`HomoPoly`](super::HomoPoly):
//! exact division, and a recursive content / primitive-part gcd whose
//! univariate step is the subresultant PRS over the coefficient ring of the
//! remaining variables.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::GaussianRational as Q;

/// Exponent vector, ordered lexicographically with `z0 > z1 > ...`.
pub(crate) type Exps = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct SparsePoly {
    pub(crate) nvars: usize,
    pub(crate) terms: BTreeMap<Exps, Q>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn from_terms(nvars: usize, terms: BTreeMap<Exps, Q>) -> Self {
        let mut p = Self { nvars, terms };
        p.terms.retain(|_, c| !c.is_zero());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn leading(&self) -> Option<(&Exps, &Q)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, e: Exps, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exps = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (de, dc) = d.leading()?;
        let dc_inv = dc.inv()?;
        if d.is_constant() {
            return Some(self.scale(&dc_inv));
        }
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars);
        while let Some((re, rc)) = rem.leading() {
            if re.iter().zip(de).any(|(a, b)| a < b) {
                return None;
            }
            let qe: Exps = re.iter().zip(de).map(|(a, b)| a - b).collect();
            let qc = rc * &dc_inv;
            for (e, c) in &d.terms {
                let te: Exps = e.iter().zip(&qe).map(|(a, b)| a + b).collect();
                rem.add_term(te, -(c * &qc));
            }
            quot.add_term(qe, qc);
        }
        Some(quot)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    pub fn contains_var(&self, v: usize) -> bool {
        self.terms.keys().any(|e| e[v] > 0)
    }

    /// Coefficients in `v`: entry `k` is the coefficient of `v^k`, free of `v`.
    pub fn coeffs_in(&self, v: usize) -> Vec<Self> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Self::zero(self.nvars); deg + 1];
        for (e, c) in &self.terms {
            let k = e[v] as usize;
            let mut e2 = e.clone();
            e2[v] = 0;
            out[k].terms.insert(e2, c.clone());
        }
        out
    }

    pub fn from_coeffs(nvars: usize, v: usize, coeffs: &[Self]) -> Self {
        let mut out = Self::zero(nvars);
        for (k, c) in coeffs.iter().enumerate() {
            for (e, x) in &c.terms {
                let mut e2 = e.clone();
                e2[v] += k as u32;
                out.add_term(e2, x.clone());
            }
        }
        out
    }

    /// Scale so the lexicographically leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some((_, c)) => self.scale(&c.inv().expect("nonzero leading coefficient")),
            None => self.clone(),
        }
    }

    fn first_var(&self) -> Option<usize> {
        (0..self.nvars).find(|&v| self.contains_var(v))
    }
}

/// Greatest common divisor, normalized to leading coefficient 1.
/// `gcd(0, 0)` is the zero polynomial.
pub(crate) fn gcd(a: &SparsePoly, b: &SparsePoly) -> SparsePoly {
    let nv = a.nvars;
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return SparsePoly::one(nv);
    }
    let v = match (a.first_var(), b.first_var()) {
        (Some(x), Some(y)) => x.min(y),
        _ => return SparsePoly::one(nv),
    };
    if !a.contains_var(v) {
        return gcd(a, &content(b, v));
    }
    if !b.contains_var(v) {
        return gcd(&content(a, v), b);
    }
    let ca = content(a, v);
    let cb = content(b, v);
    let c = gcd(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = prs_gcd(&pa, &pb, v);
    let g = primitive_part(&g, v);
    c.mul(&g).monic()
}

/// gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content(p: &SparsePoly, v: usize) -> SparsePoly {
    let mut acc = SparsePoly::zero(p.nvars);
    for c in p.coeffs_in(v).iter().rev() {
        if c.is_zero() {
            continue;
        }
        acc = gcd(&acc, c);
        if acc.is_constant() {
            return SparsePoly::one(p.nvars);
        }
    }
    acc.monic()
}

fn primitive_part(p: &SparsePoly, v: usize) -> SparsePoly {
    if p.is_zero() {
        return p.clone();
    }
    let c = content(p, v);
    p.div_exact(&c).expect("content divides")
}

type UPoly = Vec<SparsePoly>;

fn udeg(p: &UPoly) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn utrim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Pseudo-remainder `lc(b)^(da-db+1) a mod b` in `R[v]`.
fn prem(a: &UPoly, b: &UPoly) -> UPoly {
    let db = udeg(b).expect("nonzero divisor");
    let lcb = &b[db];
    let mut r = utrim(a.clone());
    let da = match udeg(&r) {
        Some(d) => d,
        None => return r,
    };
    if da < db {
        return r;
    }
    let mut e = da - db + 1;
    while let Some(dr) = udeg(&r) {
        if dr < db {
            break;
        }
        let lcr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = c.mul(lcb);
        }
        for (k, bc) in b.iter().enumerate().take(db + 1) {
            let t = lcr.mul(bc);
            r[k + shift] = r[k + shift].sub(&t);
        }
        r = utrim(r);
        e -= 1;
    }
    let factor = lcb.pow(e as u32);
    r.into_iter().map(|c| c.mul(&factor)).collect()
}

/// gcd of two primitive polynomials in `R[v]` via the subresultant PRS.
fn prs_gcd(a: &SparsePoly, b: &SparsePoly, v: usize) -> SparsePoly {
    let nv = a.nvars;
    let mut ua = a.coeffs_in(v);
    let mut ub = b.coeffs_in(v);
    if udeg(&ua) < udeg(&ub) {
        std::mem::swap(&mut ua, &mut ub);
    }
    let mut g = SparsePoly::one(nv);
    let mut h = SparsePoly::one(nv);
    loop {
        let da = udeg(&ua).unwrap_or(0);
        let db = udeg(&ub).unwrap_or(0);
        let d = (da - db) as u32;
        let r = prem(&ua, &ub);
        match udeg(&r) {
            None => return SparsePoly::from_coeffs(nv, v, &ub),
            Some(0) => return SparsePoly::one(nv),
            Some(_) => {}
        }
        let divisor = g.mul(&h.pow(d));
        let next: UPoly = r
            .iter()
            .map(|c| c.div_exact(&divisor).expect("subresultant division is exact"))
            .collect();
        ua = ub;
        ub = next;
        g = ua[udeg(&ua).expect("nonzero")].clone();
        if d > 0 {
            let num = g.pow(d);
            let den = h.pow(d - 1);
            h = num.div_exact(&den).expect("subresultant division is exact");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(nv: usize, i: usize) -> SparsePoly {
        let mut e = vec![0; nv];
        e[i] = 1;
        let mut p = SparsePoly::zero(nv);
        p.terms.insert(e, Q::one());
        p
    }

    fn c(nv: usize, k: i64) -> SparsePoly {
        SparsePoly::constant(nv, Q::from_int(k))
    }

    #[test]
    fn exact_division_roundtrip() {
        let x = var(3, 0);
        let y = var(3, 1);
        let z = var(3, 2);
        let a = x.add(&y.mul(&c(3, 3))).sub(&z);
        let b = x.mul(&z).add(&y.mul(&y));
        let p = a.mul(&b);
        assert_eq!(p.div_exact(&a).unwrap(), b);
        assert!(p.div_exact(&x.add(&c(3, 1))).is_none());
    }

    #[test]
    fn gcd_of_binomials() {
        let x = var(2, 0);
        let y = var(2, 1);
        let p = x.mul(&x).sub(&y.mul(&y));
        let q = x.sub(&y);
        assert_eq!(gcd(&p, &q), q);
    }

    #[test]
    fn gcd_recovers_multivariate_factor() {
        let x = var(3, 0);
        let y = var(3, 1);
        let z = var(3, 2);
        let common = x.mul(&y).add(&z.mul(&z)).add(&x.mul(&z).scale(&Q::i()));
        let a = common.mul(&x.add(&y).pow(2));
        let b = common.mul(&y.sub(&z.scale(&Q::from_int(5))));
        assert_eq!(gcd(&a, &b), common.monic());
    }

    #[test]
    fn coprime_is_one() {
        let x = var(3, 0);
        let y = var(3, 1);
        let z = var(3, 2);
        let a = x.mul(&y).add(&z.mul(&z));
        let b = x.add(&y).add(&z);
        assert!(gcd(&a, &b).is_constant());
    }
}
