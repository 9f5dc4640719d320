//! Indexed families `n -> f_n` and their limits.
//!
//! A family is either symbolic (components whose coefficients are
//! expressions in `n`) or the iterates of a fixed self-map. Both kinds can
//! report a *lift limit*: the coefficientwise limit of suitably rescaled
//! homogeneous lifts, possibly depending on `n` modulo a small period.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{MapError, RationalMap, Source, DEFAULT_BIT_BUDGET};
use crate::exactalg::{parse_terms, CoeffExpr, GaussianRational as Q, HomoPoly, Monomial};

/// A map into a product of projective spaces, one [`RationalMap`] per
/// factor, all on the same source. Most maps have a single factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductMap {
    factors: Vec<RationalMap>,
}

impl ProductMap {
    pub fn new(factors: Vec<RationalMap>) -> Result<Self, MapError> {
        let first = factors.first().ok_or(MapError::AllZero)?;
        for f in &factors[1..] {
            if f.source() != first.source() {
                return Err(MapError::DimensionMismatch { expected: first.nvars(), found: f.nvars() });
            }
        }
        Ok(Self { factors })
    }

    pub fn single(f: RationalMap) -> Self {
        Self { factors: vec![f] }
    }

    pub fn factors(&self) -> &[RationalMap] {
        &self.factors
    }

    pub fn source(&self) -> Source {
        self.factors[0].source()
    }

    /// The map itself when there is exactly one factor.
    pub fn as_single(&self) -> Option<&RationalMap> {
        match self.factors.as_slice() {
            [f] => Some(f),
            _ => None,
        }
    }

    pub fn target_dims(&self) -> Vec<usize> {
        self.factors.iter().map(RationalMap::target_dim).collect()
    }
}

impl std::fmt::Display for ProductMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// One member of a family.
#[derive(Clone, Debug)]
pub enum MapInstance {
    Exact(ProductMap),
    /// `steps`-fold iterate of `base`, evaluated pointwise because the exact
    /// iterate outgrew the coefficient budget.
    Orbit { base: RationalMap, steps: usize },
}

impl MapInstance {
    pub fn exact(&self) -> Option<&ProductMap> {
        match self {
            MapInstance::Exact(p) => Some(p),
            MapInstance::Orbit { .. } => None,
        }
    }

    pub fn source(&self) -> Source {
        match self {
            MapInstance::Exact(p) => p.source(),
            MapInstance::Orbit { base, .. } => base.source(),
        }
    }
}

/// Limit of the rescaled lifts along residue classes of `n` mod `period`.
#[derive(Clone, Debug)]
pub struct LiftLimit {
    pub period: usize,
    pub classes: Vec<ProductMap>,
}

impl LiftLimit {
    pub fn class(&self, n: usize) -> &ProductMap {
        &self.classes[n % self.period]
    }
}

#[derive(Clone, Debug, PartialEq)]
struct FamilyPoly {
    degree: u32,
    terms: Vec<(CoeffExpr, Vec<u32>)>,
}

#[derive(Clone, Debug)]
enum Kind {
    Symbolic(Vec<Vec<FamilyPoly>>),
    Iterates(RationalMap),
}

#[derive(Clone, Debug)]
pub struct MapFamily {
    source: Source,
    kind: Kind,
    budget: u64,
}

impl MapFamily {
    /// Single-factor family from component texts with `{...}` coefficients.
    pub fn parse(source: Source, components: &[&str]) -> Result<Self, MapError> {
        let owned: Vec<String> = components.iter().map(|s| s.to_string()).collect();
        Self::parse_factors(source, &[owned])
    }

    pub fn parse_factors(source: Source, factors: &[Vec<String>]) -> Result<Self, MapError> {
        let nv = source.nvars();
        let mut parsed = Vec::with_capacity(factors.len());
        for comps in factors {
            let mut polys: Vec<FamilyPoly> = Vec::with_capacity(comps.len());
            for text in comps {
                let terms: Vec<_> = parse_terms(text, nv)?
                    .into_iter()
                    .filter(|(c, _)| !matches!(c, CoeffExpr::Const(k) if k.is_zero()))
                    .collect();
                let degree = terms.first().map(|(_, e)| e.iter().sum::<u32>());
                if terms.iter().any(|(_, e)| Some(e.iter().sum::<u32>()) != degree) {
                    return Err(crate::exactalg::AlgebraError::NotHomogeneous.into());
                }
                polys.push(FamilyPoly { degree: degree.unwrap_or(u32::MAX), terms });
            }
            let d = polys.iter().map(|p| p.degree).find(|&d| d != u32::MAX).ok_or(MapError::AllZero)?;
            for p in polys.iter_mut() {
                if p.degree == u32::MAX {
                    p.degree = d;
                } else if p.degree != d {
                    return Err(MapError::DegreeMismatch(d, p.degree));
                }
            }
            if polys.len() < 2 {
                return Err(MapError::DimensionMismatch { expected: 2, found: polys.len() });
            }
            parsed.push(polys);
        }
        if parsed.is_empty() {
            return Err(MapError::AllZero);
        }
        Ok(Self { source, kind: Kind::Symbolic(parsed), budget: DEFAULT_BIT_BUDGET })
    }

    /// The family of iterates `f^n`.
    pub fn iterates_of(base: RationalMap) -> Result<Self, MapError> {
        if !base.is_self_map() {
            return Err(MapError::NotASelfMap);
        }
        Ok(Self { source: base.source(), kind: Kind::Iterates(base), budget: DEFAULT_BIT_BUDGET })
    }

    /// The constant family `f_n = f`.
    pub fn constant(f: &RationalMap) -> Self {
        let polys = f
            .components()
            .iter()
            .map(|c| FamilyPoly {
                degree: c.degree(),
                terms: c.terms().map(|(e, k)| (CoeffExpr::Const(k.clone()), e.to_vec())).collect(),
            })
            .collect();
        Self { source: f.source(), kind: Kind::Symbolic(vec![polys]), budget: DEFAULT_BIT_BUDGET }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// Base map for a family of iterates.
    pub fn base(&self) -> Option<&RationalMap> {
        match &self.kind {
            Kind::Iterates(f) => Some(f),
            Kind::Symbolic(_) => None,
        }
    }

    pub fn instantiate(&self, n: i64) -> Result<MapInstance, MapError> {
        if n < 1 {
            return Err(MapError::ExpressionDomainError { n });
        }
        match &self.kind {
            Kind::Symbolic(factors) => {
                let maps = factors
                    .iter()
                    .map(|comps| instantiate_factor(self.source, comps, n))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(MapInstance::Exact(ProductMap::new(maps)?))
            }
            Kind::Iterates(_) => Ok(self.instantiate_schedule(&[n as usize])?.remove(0).1),
        }
    }

    /// Single-factor exact member, the common case.
    pub fn instantiate_map(&self, n: i64) -> Result<RationalMap, MapError> {
        match self.instantiate(n)? {
            MapInstance::Exact(p) if p.factors.len() == 1 => Ok(p.factors.into_iter().next().expect("one")),
            MapInstance::Exact(_) => Err(MapError::UnsupportedFamily("family has several target factors".into())),
            MapInstance::Orbit { steps, .. } => Err(MapError::BudgetExceeded { step: steps, bits: 0, budget: self.budget }),
        }
    }

    /// Members for an increasing schedule. Iterates are built
    /// incrementally; once the bit budget is exceeded the remaining members
    /// fall back to pointwise orbits.
    pub fn instantiate_schedule(&self, schedule: &[usize]) -> Result<Vec<(usize, MapInstance)>, MapError> {
        match &self.kind {
            Kind::Symbolic(_) => schedule.iter().map(|&n| Ok((n, self.instantiate(n as i64)?))).collect(),
            Kind::Iterates(f) => {
                let mut out = Vec::with_capacity(schedule.len());
                let mut cur = f.clone();
                let mut at = 1usize;
                let mut exact = true;
                for &n in schedule {
                    if n == 0 {
                        return Err(MapError::ZeroIterate);
                    }
                    while exact && at < n {
                        cur = RationalMap::compose(f, &cur)?;
                        at += 1;
                        if cur.bit_size() > self.budget {
                            exact = false;
                        }
                    }
                    if exact && at == n {
                        out.push((n, MapInstance::Exact(ProductMap::single(cur.clone()))));
                    } else {
                        out.push((n, MapInstance::Orbit { base: f.clone(), steps: n }));
                    }
                }
                Ok(out)
            }
        }
    }

    /// Coefficientwise limit of rescaled lifts, if one can be identified.
    pub fn lift_limit(&self) -> Option<LiftLimit> {
        match &self.kind {
            Kind::Symbolic(factors) => symbolic_limit(self.source, factors),
            Kind::Iterates(f) => iterate_limit(f),
        }
    }
}

fn instantiate_factor(source: Source, comps: &[FamilyPoly], n: i64) -> Result<RationalMap, MapError> {
    let nv = source.nvars();
    let polys = comps
        .iter()
        .map(|p| {
            let terms = p
                .terms
                .iter()
                .map(|(c, e)| Ok((Monomial::new(e.clone()), c.eval(Some(n)).ok_or(MapError::ExpressionDomainError { n })?)))
                .collect::<Result<Vec<_>, MapError>>()?;
            Ok(HomoPoly::from_terms(nv, Some(p.degree), terms)?)
        })
        .collect::<Result<Vec<_>, MapError>>()?;
    RationalMap::normalize(source, polys)
}

// ---------------------------------------------------------------------------
// Asymptotics of coefficient expressions.
//
// With the parity of n fixed, every expression is a quotient of sums of
// terms c * n^k * b^n with b > 0. The leading term of such a sum is the one
// with the largest (b, k).

type Key = (BigRational, i64);

#[derive(Clone, Debug)]
struct ExpPoly(BTreeMap<Key, Q>);

impl ExpPoly {
    fn constant(c: Q) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert((BigRational::one(), 0), c);
        }
        Self(m)
    }

    fn term(base: BigRational, k: i64, c: Q) -> Self {
        let mut m = BTreeMap::new();
        m.insert((base, k), c);
        Self(m)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, rhs: &Self) -> Self {
        let mut m = self.0.clone();
        for (k, c) in &rhs.0 {
            let e = m.entry(k.clone()).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                m.remove(k);
            }
        }
        Self(m)
    }

    fn neg(&self) -> Self {
        Self(self.0.iter().map(|(k, c)| (k.clone(), -c)).collect())
    }

    fn mul(&self, rhs: &Self) -> Self {
        let mut acc = Self(BTreeMap::new());
        for ((b1, k1), c1) in &self.0 {
            for ((b2, k2), c2) in &rhs.0 {
                acc = acc.add(&Self::term(b1 * b2, k1 + k2, c1 * c2));
            }
        }
        acc
    }

    fn leading(&self) -> Option<(&Key, &Q)> {
        self.0.iter().next_back()
    }
}

#[derive(Clone, Debug)]
struct Frac {
    num: ExpPoly,
    den: ExpPoly,
}

impl Frac {
    fn from(num: ExpPoly) -> Self {
        Self { num, den: ExpPoly::constant(Q::one()) }
    }

    fn inv(&self) -> Option<Self> {
        (!self.num.is_zero()).then(|| Self { num: self.den.clone(), den: self.num.clone() })
    }

    /// Leading behaviour `c * n^k * b^n`, `None` for the zero expression.
    fn leading(&self) -> Option<(Q, BigRational, i64)> {
        let ((bn, kn), cn) = self.num.leading()?;
        let ((bd, kd), cd) = self.den.leading()?;
        Some((cn.checked_div(cd)?, bn / bd, kn - kd))
    }
}

fn asymptotic(e: &CoeffExpr, parity: i64) -> Option<Frac> {
    Some(match e {
        CoeffExpr::Const(c) => Frac::from(ExpPoly::constant(c.clone())),
        CoeffExpr::N => Frac::from(ExpPoly::term(BigRational::one(), 1, Q::one())),
        CoeffExpr::ExpN(b) => {
            let sign = if b.is_negative() && parity == 1 { -1 } else { 1 };
            Frac::from(ExpPoly::term(b.abs(), 0, Q::from_int(sign)))
        }
        CoeffExpr::Neg(a) => {
            let a = asymptotic(a, parity)?;
            Frac { num: a.num.neg(), den: a.den }
        }
        CoeffExpr::Add(a, b) | CoeffExpr::Sub(a, b) => {
            let (a, mut b) = (asymptotic(a, parity)?, asymptotic(b, parity)?);
            if matches!(e, CoeffExpr::Sub(..)) {
                b.num = b.num.neg();
            }
            Frac { num: a.num.mul(&b.den).add(&b.num.mul(&a.den)), den: a.den.mul(&b.den) }
        }
        CoeffExpr::Mul(a, b) => {
            let (a, b) = (asymptotic(a, parity)?, asymptotic(b, parity)?);
            Frac { num: a.num.mul(&b.num), den: a.den.mul(&b.den) }
        }
        CoeffExpr::Div(a, b) => {
            let (a, b) = (asymptotic(a, parity)?, asymptotic(b, parity)?.inv()?);
            Frac { num: a.num.mul(&b.num), den: a.den.mul(&b.den) }
        }
        CoeffExpr::Pow(a, k) => {
            let mut base = asymptotic(a, parity)?;
            if *k < 0 {
                base = base.inv()?;
            }
            let mut acc = Frac::from(ExpPoly::constant(Q::one()));
            for _ in 0..k.unsigned_abs() {
                acc = Frac { num: acc.num.mul(&base.num), den: acc.den.mul(&base.den) };
            }
            acc
        }
    })
}

fn uses_sign(e: &CoeffExpr) -> bool {
    match e {
        CoeffExpr::ExpN(b) => b.is_negative(),
        CoeffExpr::Const(_) | CoeffExpr::N => false,
        CoeffExpr::Neg(a) | CoeffExpr::Pow(a, _) => uses_sign(a),
        CoeffExpr::Add(a, b) | CoeffExpr::Sub(a, b) | CoeffExpr::Mul(a, b) | CoeffExpr::Div(a, b) => {
            uses_sign(a) || uses_sign(b)
        }
    }
}

fn symbolic_limit(source: Source, factors: &[Vec<FamilyPoly>]) -> Option<LiftLimit> {
    let signed = factors.iter().flatten().flat_map(|p| &p.terms).any(|(c, _)| uses_sign(c));
    let period = if signed { 2 } else { 1 };
    let mut classes = Vec::with_capacity(period);
    for parity in 0..period as i64 {
        let maps = factors
            .iter()
            .map(|comps| factor_limit(source, comps, parity))
            .collect::<Option<Vec<_>>>()?;
        classes.push(ProductMap::new(maps).ok()?);
    }
    Some(LiftLimit { period, classes })
}

fn factor_limit(source: Source, comps: &[FamilyPoly], parity: i64) -> Option<RationalMap> {
    let mut lead: Vec<Vec<Option<(Q, BigRational, i64)>>> = Vec::new();
    for p in comps {
        let mut row = Vec::new();
        for (c, _) in &p.terms {
            row.push(asymptotic(c, parity)?.leading());
        }
        lead.push(row);
    }
    let top = lead.iter().flatten().flatten().map(|(_, b, k)| (b.clone(), *k)).max()?;
    let nv = source.nvars();
    let polys = comps
        .iter()
        .zip(&lead)
        .map(|(p, row)| {
            let terms = p.terms.iter().zip(row).filter_map(|((_, e), l)| match l {
                Some((c, b, k)) if (b.clone(), *k) == top => Some((Monomial::new(e.clone()), c.clone())),
                _ => None,
            });
            HomoPoly::from_terms(nv, Some(p.degree), terms).ok()
        })
        .collect::<Option<Vec<_>>>()?;
    RationalMap::normalize(source, polys).ok()
}

// ---------------------------------------------------------------------------
// Limits of iterates.

const ITERATE_LIMIT_DEPTH: usize = 16;
const ITERATE_LIMIT_MAX_DEGREE: u32 = 24;
const ITERATE_LIMIT_BUDGET: u64 = 200_000;

fn iterate_limit(f: &RationalMap) -> Option<LiftLimit> {
    let mut its = vec![f.clone()];
    while its.len() < ITERATE_LIMIT_DEPTH {
        let next = RationalMap::compose(f, its.last().expect("nonempty")).ok()?;
        if next.degree() > ITERATE_LIMIT_MAX_DEGREE || next.bit_size() > ITERATE_LIMIT_BUDGET {
            return None;
        }
        its.push(next);
    }
    // its[j] is f^(j+1)
    'period: for period in 1..=4 {
        let mut classes: Vec<Option<ProductMap>> = vec![None; period];
        for r in 0..period {
            let members: Vec<&RationalMap> = (1..=its.len()).filter(|n| n % period == r).map(|n| &its[n - 1]).collect();
            if members.len() < 4 {
                continue 'period;
            }
            match class_limit(f.source(), &members[members.len() - 4..]) {
                Some(m) => classes[r] = Some(ProductMap::single(m)),
                None => continue 'period,
            }
        }
        return Some(LiftLimit { period, classes: classes.into_iter().collect::<Option<Vec<_>>>()? });
    }
    None
}

type Slot = (usize, Vec<u32>);

/// Limit of four consecutive members of one residue class, by exact Aitken
/// extrapolation on each coefficient after fixing the scale at one slot.
fn class_limit(source: Source, members: &[&RationalMap]) -> Option<RationalMap> {
    let last = members.last()?;
    if members.iter().any(|m| m.degree() != last.degree()) {
        return None;
    }
    let mut slots: Vec<Slot> = Vec::new();
    for m in members {
        for (i, c) in m.components().iter().enumerate() {
            for (e, _) in c.terms() {
                let s = (i, e.to_vec());
                if !slots.contains(&s) {
                    slots.push(s);
                }
            }
        }
    }
    let coeff = |m: &RationalMap, s: &Slot| m.components()[s.0].coeff(&s.1);
    let reference = slots
        .iter()
        .max_by(|a, b| coeff(last, a).norm_sqr().cmp(&coeff(last, b).norm_sqr()))?
        .clone();
    let seqs: Vec<Vec<Q>> = slots
        .iter()
        .map(|s| {
            members
                .iter()
                .map(|m| coeff(m, s).checked_div(&coeff(m, &reference)))
                .collect::<Option<Vec<Q>>>()
        })
        .collect::<Option<_>>()?;
    let mut limits = Vec::with_capacity(slots.len());
    for x in &seqs {
        let a = aitken(&x[0], &x[1], &x[2])?;
        let b = aitken(&x[1], &x[2], &x[3])?;
        if a != b {
            return None;
        }
        // reject extrapolations the sequence is not actually approaching
        let gaps: Vec<_> = x.iter().map(|v| (v - &a).norm_sqr()).collect();
        if gaps.windows(2).any(|w| w[1] > w[0]) || (!gaps[3].is_zero() && gaps[3] >= gaps[2]) {
            return None;
        }
        limits.push(a);
    }
    let nv = source.nvars();
    let mut comps: Vec<Vec<(Monomial, Q)>> = vec![Vec::new(); last.components().len()];
    for (s, c) in slots.iter().zip(limits) {
        comps[s.0].push((Monomial::new(s.1.clone()), c));
    }
    let polys = comps
        .into_iter()
        .map(|t| HomoPoly::from_terms(nv, Some(last.degree()), t).ok())
        .collect::<Option<Vec<_>>>()?;
    RationalMap::normalize(source, polys).ok()
}

fn aitken(x0: &Q, x1: &Q, x2: &Q) -> Option<Q> {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let dd = &d2 - &d1;
    if dd.is_zero() {
        return d2.is_zero().then(|| x2.clone());
    }
    Some(x2 - &(&d2 * &d2).checked_div(&dd)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instantiation() {
        let fam = MapFamily::parse(Source::Affine(2), &["z1 - {1/n}*z0", "z2"]).unwrap();
        let f2 = fam.instantiate_map(2).unwrap();
        let want = RationalMap::parse(Source::Affine(2), &["z1 - (1/2)*z0", "z2"]).unwrap();
        assert_eq!(f2, want);

        let fam = MapFamily::parse(Source::Projective(2), &["z0", "{2^n}*z1", "{2^n}*z2"]).unwrap();
        let want = RationalMap::parse(Source::Projective(2), &["z0", "8*z1", "8*z2"]).unwrap();
        assert_eq!(fam.instantiate_map(3).unwrap(), want);

        let c = MapFamily::constant(&RationalMap::cremona());
        assert_eq!(c.instantiate_map(7).unwrap(), RationalMap::cremona());
    }

    #[test]
    fn domain_errors() {
        let fam = MapFamily::parse(Source::Affine(1), &["z0", "{1/(n-2)}*z1"]).unwrap();
        assert_eq!(fam.instantiate(2).unwrap_err(), MapError::ExpressionDomainError { n: 2 });
        assert!(fam.instantiate(3).is_ok());
    }

    #[test]
    fn symbolic_limits() {
        let fam = MapFamily::parse(Source::Affine(2), &["z1 - {1/n}*z0", "z2"]).unwrap();
        let l = fam.lift_limit().unwrap();
        assert_eq!(l.period, 1);
        assert_eq!(l.classes[0].as_single().unwrap(), &RationalMap::parse(Source::Affine(2), &["z1", "z2"]).unwrap());

        let fam = MapFamily::parse(Source::Projective(2), &["z0", "{2^n}*z1", "{2^n}*z2"]).unwrap();
        let l = fam.lift_limit().unwrap();
        let want = RationalMap::parse(Source::Projective(2), &["0", "z1", "z2"]).unwrap();
        assert_eq!(l.classes[0].as_single().unwrap(), &want);

        let fam = MapFamily::parse(Source::Affine(1), &["z0", "{(-1)^n}*z1 + {1/n}*z0"]).unwrap();
        let l = fam.lift_limit().unwrap();
        assert_eq!(l.period, 2);
        assert_ne!(l.classes[0], l.classes[1]);

        let fam = MapFamily::parse(Source::Affine(1), &["{n^2+1}*z0", "{3*n^2}*z1 + {n}*z0"]).unwrap();
        let want = RationalMap::parse(Source::Affine(1), &["z0", "3*z1"]).unwrap();
        assert_eq!(fam.lift_limit().unwrap().classes[0].as_single().unwrap(), &want);
    }

    #[test]
    fn iterate_limits() {
        let fam = MapFamily::iterates_of(RationalMap::cremona()).unwrap();
        let l = fam.lift_limit().unwrap();
        assert_eq!(l.period, 2);
        assert_eq!(l.class(1).as_single().unwrap(), &RationalMap::cremona());
        assert_eq!(l.class(2).as_single().unwrap(), &RationalMap::identity(2));

        let f = RationalMap::parse(Source::Projective(2), &["z0", "2*z1", "2*z2"]).unwrap();
        let l = MapFamily::iterates_of(f).unwrap().lift_limit().unwrap();
        assert_eq!(l.period, 1);
        let want = RationalMap::parse(Source::Projective(2), &["0", "z1", "z2"]).unwrap();
        assert_eq!(l.classes[0].as_single().unwrap(), &want);
    }

    #[test]
    fn schedules_share_work() {
        let fam = MapFamily::iterates_of(RationalMap::cremona()).unwrap();
        let s = fam.instantiate_schedule(&[1, 2, 5]).unwrap();
        assert_eq!(s[1].1.exact().unwrap().as_single().unwrap(), &RationalMap::identity(2));
        assert_eq!(s[2].1.exact().unwrap().as_single().unwrap(), &RationalMap::cremona());

        let tiny = MapFamily::iterates_of(RationalMap::parse(Source::Projective(1), &["z0^2 + z1^2", "3*z1^2"]).unwrap())
            .unwrap()
            .with_budget(64);
        let s = tiny.instantiate_schedule(&[1, 8]).unwrap();
        assert!(matches!(s[1].1, MapInstance::Orbit { steps: 8, .. }));
    }
}
