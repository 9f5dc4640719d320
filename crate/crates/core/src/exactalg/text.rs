//! Text form of polynomials and coefficient expressions.
//!
//! Canonical (printer) form, one term per monomial in descending lex order:
//!
//! ```text
//! ((1/1)+(0/1)i)*z0^1*z1^0 + ((-1/2)+(3/1)i)*z0^0*z1^1
//! ```
//!
//! The parser also accepts a relaxed form for hand-written scenario files:
//! integer or `(a/b)` coefficients, bare `i`, omitted `^1`, implicit unit
//! coefficients, `-` between terms, and `{...}` coefficient expressions in
//! the family index `n` (`{1/n}`, `{2^n}`, `{(n+1)/(2*n)}`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{AlgebraError, GaussianRational};

/// Coefficient expression over `Q(i)` in an optional integer index `n`.
#[derive(Clone, Debug, PartialEq)]
pub enum CoeffExpr {
    Const(GaussianRational),
    /// The family index.
    N,
    Add(Box<CoeffExpr>, Box<CoeffExpr>),
    Sub(Box<CoeffExpr>, Box<CoeffExpr>),
    Mul(Box<CoeffExpr>, Box<CoeffExpr>),
    Div(Box<CoeffExpr>, Box<CoeffExpr>),
    Neg(Box<CoeffExpr>),
    /// Integer power, possibly negative.
    Pow(Box<CoeffExpr>, i64),
    /// `b^n` for a constant nonzero rational base.
    ExpN(BigRational),
}

impl CoeffExpr {
    pub fn uses_index(&self) -> bool {
        match self {
            CoeffExpr::Const(_) => false,
            CoeffExpr::N | CoeffExpr::ExpN(_) => true,
            CoeffExpr::Neg(a) | CoeffExpr::Pow(a, _) => a.uses_index(),
            CoeffExpr::Add(a, b) | CoeffExpr::Sub(a, b) | CoeffExpr::Mul(a, b) | CoeffExpr::Div(a, b) => {
                a.uses_index() || b.uses_index()
            }
        }
    }

    /// Exact value at index `n`; `None` when the expression uses `n` but no
    /// index was supplied, or on division by zero.
    pub fn eval(&self, n: Option<i64>) -> Option<GaussianRational> {
        Some(match self {
            CoeffExpr::Const(c) => c.clone(),
            CoeffExpr::N => GaussianRational::from_int(n?),
            CoeffExpr::Add(a, b) => &a.eval(n)? + &b.eval(n)?,
            CoeffExpr::Sub(a, b) => &a.eval(n)? - &b.eval(n)?,
            CoeffExpr::Mul(a, b) => &a.eval(n)? * &b.eval(n)?,
            CoeffExpr::Div(a, b) => a.eval(n)?.checked_div(&b.eval(n)?)?,
            CoeffExpr::Neg(a) => -a.eval(n)?,
            CoeffExpr::Pow(a, k) => a.eval(n)?.pow(*k)?,
            CoeffExpr::ExpN(b) => GaussianRational::from_rational(b.clone()).pow(n?)?,
        })
    }
}

/// One parsed term: coefficient expression times monomial.
pub type ParsedTerm = (CoeffExpr, Vec<u32>);

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Self { src: s.as_bytes(), pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> AlgebraError {
        AlgebraError::Parse { column: self.pos + 1, message: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    /// Peek without skipping whitespace.
    fn peek_raw(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), AlgebraError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn digits(&mut self) -> Result<BigInt, AlgebraError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digit string parses"))
    }

    fn small_uint(&mut self) -> Result<u32, AlgebraError> {
        let d = self.digits()?;
        u32::try_from(d).map_err(|_| self.err("exponent too large"))
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// Parse a polynomial over `nvars` variables `z0..z{nvars-1}` into raw terms.
pub fn parse_terms(text: &str, nvars: usize) -> Result<Vec<ParsedTerm>, AlgebraError> {
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    if cur.at_end() {
        return Err(cur.err("empty polynomial"));
    }
    let mut negate = if cur.eat(b'-') {
        true
    } else {
        cur.eat(b'+');
        false
    };
    loop {
        let (mut coeff, exps) = parse_term(&mut cur, nvars)?;
        if negate {
            coeff = CoeffExpr::Neg(Box::new(coeff));
        }
        out.push((coeff, exps));
        if cur.at_end() {
            break;
        }
        negate = if cur.eat(b'-') {
            true
        } else if cur.eat(b'+') {
            false
        } else {
            return Err(cur.err("expected '+' or '-' between terms"));
        };
    }
    Ok(out)
}

fn parse_term(cur: &mut Cursor<'_>, nvars: usize) -> Result<ParsedTerm, AlgebraError> {
    let mut coeff: Option<CoeffExpr> = None;
    let mut exps = vec![0u32; nvars];
    loop {
        match cur.peek() {
            Some(b'z') => {
                cur.pos += 1;
                let idx = cur.digits()?;
                let idx = usize::try_from(idx).map_err(|_| cur.err("variable index too large"))?;
                if idx >= nvars {
                    return Err(cur.err(format!("variable z{idx} out of range for {nvars} variables")));
                }
                let e = if cur.eat(b'^') { cur.small_uint()? } else { 1 };
                exps[idx] += e;
            }
            Some(_) => {
                let c = parse_coeff(cur)?;
                coeff = Some(match coeff {
                    None => c,
                    Some(prev) => CoeffExpr::Mul(Box::new(prev), Box::new(c)),
                });
            }
            None => return Err(cur.err("expected a term")),
        }
        if !cur.eat(b'*') {
            break;
        }
    }
    Ok((coeff.unwrap_or(CoeffExpr::Const(GaussianRational::one())), exps))
}

fn parse_rat(cur: &mut Cursor<'_>) -> Result<BigRational, AlgebraError> {
    let neg = cur.eat(b'-');
    let num = cur.digits()?;
    let den = if cur.eat(b'/') { cur.digits()? } else { BigInt::one() };
    if den.is_zero() {
        return Err(cur.err("zero denominator"));
    }
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

fn parse_coeff(cur: &mut Cursor<'_>) -> Result<CoeffExpr, AlgebraError> {
    match cur.peek() {
        Some(b'{') => {
            cur.pos += 1;
            let e = parse_expr(cur)?;
            cur.expect(b'}')?;
            Ok(e)
        }
        Some(b'(') => {
            cur.pos += 1;
            if cur.peek() == Some(b'(') {
                // ((a/b)+(c/d)i)
                cur.pos += 1;
                let re = parse_rat(cur)?;
                cur.expect(b')')?;
                cur.expect(b'+')?;
                cur.expect(b'(')?;
                let im = parse_rat(cur)?;
                cur.expect(b')')?;
                cur.expect(b'i')?;
                cur.expect(b')')?;
                Ok(CoeffExpr::Const(GaussianRational::new(re, im)))
            } else {
                let r = parse_rat(cur)?;
                cur.expect(b')')?;
                Ok(CoeffExpr::Const(GaussianRational::from_rational(r)))
            }
        }
        Some(b'i') => {
            cur.pos += 1;
            Ok(CoeffExpr::Const(GaussianRational::i()))
        }
        Some(c) if c.is_ascii_digit() => {
            let num = cur.digits()?;
            // A bare `a/b` is accepted as a rational literal.
            let den = if cur.peek_raw() == Some(b'/') {
                cur.pos += 1;
                cur.digits()?
            } else {
                BigInt::one()
            };
            if den.is_zero() {
                return Err(cur.err("zero denominator"));
            }
            Ok(CoeffExpr::Const(GaussianRational::from_rational(BigRational::new(num, den))))
        }
        _ => Err(cur.err("expected a coefficient or variable")),
    }
}

/// Parse a standalone coefficient expression (the contents of `{...}`).
pub fn parse_coeff_expr(text: &str) -> Result<CoeffExpr, AlgebraError> {
    let mut cur = Cursor::new(text);
    let e = parse_expr(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.err("trailing input"));
    }
    Ok(e)
}

fn parse_expr(cur: &mut Cursor<'_>) -> Result<CoeffExpr, AlgebraError> {
    let mut lhs = parse_product(cur)?;
    loop {
        if cur.eat(b'+') {
            lhs = CoeffExpr::Add(Box::new(lhs), Box::new(parse_product(cur)?));
        } else if cur.eat(b'-') {
            lhs = CoeffExpr::Sub(Box::new(lhs), Box::new(parse_product(cur)?));
        } else {
            return Ok(lhs);
        }
    }
}

fn parse_product(cur: &mut Cursor<'_>) -> Result<CoeffExpr, AlgebraError> {
    let mut lhs = parse_unary(cur)?;
    loop {
        if cur.eat(b'*') {
            lhs = CoeffExpr::Mul(Box::new(lhs), Box::new(parse_unary(cur)?));
        } else if cur.eat(b'/') {
            lhs = CoeffExpr::Div(Box::new(lhs), Box::new(parse_unary(cur)?));
        } else {
            return Ok(lhs);
        }
    }
}

fn parse_unary(cur: &mut Cursor<'_>) -> Result<CoeffExpr, AlgebraError> {
    if cur.eat(b'-') {
        return Ok(CoeffExpr::Neg(Box::new(parse_unary(cur)?)));
    }
    let base = parse_atom(cur)?;
    if !cur.eat(b'^') {
        return Ok(base);
    }
    if cur.eat(b'n') {
        if base.uses_index() {
            return Err(cur.err("the base of b^n must not depend on n"));
        }
        let b = base.eval(None).ok_or_else(|| cur.err("invalid base"))?;
        if !b.is_real() || b.is_zero() {
            return Err(cur.err("the base of b^n must be a nonzero rational"));
        }
        return Ok(CoeffExpr::ExpN(b.re().clone()));
    }
    let neg = cur.eat(b'-');
    let k = i64::from(cur.small_uint()?);
    Ok(CoeffExpr::Pow(Box::new(base), if neg { -k } else { k }))
}

fn parse_atom(cur: &mut Cursor<'_>) -> Result<CoeffExpr, AlgebraError> {
    match cur.peek() {
        Some(b'(') => {
            cur.pos += 1;
            let e = parse_expr(cur)?;
            cur.expect(b')')?;
            Ok(e)
        }
        Some(b'n') => {
            cur.pos += 1;
            Ok(CoeffExpr::N)
        }
        Some(b'i') => {
            cur.pos += 1;
            Ok(CoeffExpr::Const(GaussianRational::i()))
        }
        Some(c) if c.is_ascii_digit() => {
            let d = cur.digits()?;
            Ok(CoeffExpr::Const(GaussianRational::from_rational(BigRational::from_integer(d))))
        }
        _ => Err(cur.err("expected a number, 'n', 'i' or '('")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relaxed_terms() {
        let t = parse_terms("z1 - {1/n}*z0", 3).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].1, vec![0, 1, 0]);
        assert_eq!(t[1].0.eval(Some(4)).unwrap(), GaussianRational::from_ratio(-1, 4));
        assert!(t[1].0.eval(None).is_none());
    }

    #[test]
    fn canonical_coefficient() {
        let t = parse_terms("((-1/2)+(3/4)i)*z0^2*z1^0", 2).unwrap();
        let c = t[0].0.eval(None).unwrap();
        assert_eq!(c.canonical(), "((-1/2)+(3/4)i)");
        assert_eq!(t[0].1, vec![2, 0]);
    }

    #[test]
    fn exponential_index() {
        let e = parse_coeff_expr("2^n").unwrap();
        assert_eq!(e.eval(Some(10)).unwrap(), GaussianRational::from_int(1024));
        let e = parse_coeff_expr("(n+1)/(2*n) - i").unwrap();
        assert_eq!(e.eval(Some(3)).unwrap(), &GaussianRational::from_ratio(2, 3) - &GaussianRational::i());
    }

    #[test]
    fn errors_carry_columns() {
        match parse_terms("z0 + z7", 3) {
            Err(AlgebraError::Parse { column, .. }) => assert_eq!(column, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_coeff_expr("n^n").is_err());
        assert!(parse_terms("z0 z1", 2).is_err());
        assert!(parse_coeff_expr("1/0").unwrap().eval(None).is_none());
    }
}
