//! Coprimality certificates by reduction modulo a Gaussian prime.
//!
//! Restrict forms `F_i` to an affine line `a t + b` and reduce modulo a
//! prime `p = 1 (mod 4)`, sending `i` to a square root of `-1`. If some
//! `F_i(a)` is a unit mod `p`, any common factor `g` keeps its full degree
//! on the line after reduction (Gauss's lemma over the localization at the
//! prime), so a constant gcd mod `p` proves the forms coprime.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{GaussianRational, HomoPoly};

const P: u64 = 998_244_353;
const DIRECTIONS: [[u64; 4]; 3] = [[1, 2, 3, 5], [3, 7, 4, 2], [2, 5, 11, 7]];
const OFFSETS: [u64; 4] = [P - 1, 2, 5, P - 3];

fn mul(a: u64, b: u64) -> u64 {
    a * b % P
}

fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

fn inv(a: u64) -> Option<u64> {
    (a != 0).then(|| pow(a, P - 2))
}

/// Square root of -1 mod P, from the primitive root 3.
fn imag_unit() -> u64 {
    pow(3, (P - 1) / 4)
}

fn reduce_int(n: &BigInt) -> u64 {
    let r = (n % BigInt::from(P)).to_i64().expect("residue fits");
    r.rem_euclid(P as i64) as u64
}

fn reduce(c: &GaussianRational, iota: u64) -> Option<u64> {
    let re = mul(reduce_int(c.re().numer()), inv(reduce_int(c.re().denom()))?);
    let im = mul(reduce_int(c.im().numer()), inv(reduce_int(c.im().denom()))?);
    Some((re + mul(iota, im)) % P)
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul(x, y)) % P;
        }
    }
    out
}

fn poly_rem(mut a: Vec<u64>, b: &[u64]) -> Vec<u64> {
    let db = b.len() - 1;
    let lead_inv = inv(b[db]).expect("trimmed divisor");
    while a.len() > db {
        let k = a.len() - 1 - db;
        let c = mul(a[a.len() - 1], lead_inv);
        for (j, &y) in b.iter().enumerate() {
            a[k + j] = (a[k + j] + P - mul(c, y)) % P;
        }
        a = trim(a);
    }
    a
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>) -> Vec<u64> {
    while !b.is_empty() {
        let r = poly_rem(a, &b);
        a = b;
        b = r;
    }
    a
}

struct Reduced {
    terms: Vec<(u64, Vec<u32>)>,
}

impl Reduced {
    fn new(p: &HomoPoly, iota: u64) -> Option<Self> {
        let terms = p.terms().map(|(e, c)| Some((reduce(c, iota)?, e.to_vec()))).collect::<Option<Vec<_>>>()?;
        Some(Self { terms })
    }

    fn eval(&self, x: &[u64]) -> u64 {
        self.terms.iter().fold(0, |acc, (c, e)| {
            let t = e.iter().zip(x).fold(*c, |t, (&k, &xi)| mul(t, pow(xi, k as u64)));
            (acc + t) % P
        })
    }

    fn on_line(&self, powers: &[Vec<Vec<u64>>]) -> Vec<u64> {
        let mut acc: Vec<u64> = Vec::new();
        for (c, e) in &self.terms {
            let mut t = vec![*c];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = poly_mul(&t, &powers[i][k as usize]);
                }
            }
            if acc.len() < t.len() {
                acc.resize(t.len(), 0);
            }
            for (j, y) in t.into_iter().enumerate() {
                acc[j] = (acc[j] + y) % P;
            }
        }
        trim(acc)
    }
}

/// `true` only if the forms provably have no common factor of positive
/// degree. `false` means "not certified", not "shared factor".
pub(crate) fn certify_coprime(forms: &[&HomoPoly]) -> bool {
    let forms: Vec<&HomoPoly> = forms.iter().copied().filter(|f| !f.is_zero()).collect();
    let (nv, d) = match forms.first() {
        Some(f) if f.degree() > 0 && f.nvars() <= 4 => (f.nvars(), f.degree() as usize),
        _ => return false,
    };
    let iota = imag_unit();
    let reduced = match forms.iter().map(|f| Reduced::new(f, iota)).collect::<Option<Vec<_>>>() {
        Some(r) => r,
        None => return false,
    };
    for dir in DIRECTIONS {
        let a = &dir[..nv];
        if reduced.iter().all(|r| r.eval(a).is_zero()) {
            continue;
        }
        let powers: Vec<Vec<Vec<u64>>> = (0..nv)
            .map(|i| {
                let lin = vec![OFFSETS[i], a[i]];
                let mut v = vec![vec![1u64]];
                for k in 1..=d {
                    let next = poly_mul(&v[k - 1], &lin);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut h = reduced[0].on_line(&powers);
        for r in &reduced[1..] {
            if h.len() <= 1 {
                break;
            }
            h = poly_gcd(h, r.on_line(&powers));
        }
        return h.len() == 1;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(s: &str) -> HomoPoly {
        HomoPoly::parse(s, 3).unwrap()
    }

    #[test]
    fn unit_squares_to_minus_one() {
        let i = imag_unit();
        assert_eq!(mul(i, i), P - 1);
    }

    #[test]
    fn certifies_only_coprime_forms() {
        assert!(certify_coprime(&[&hp("z0^2"), &hp("z1^2 + 3*z0*z2"), &hp("z2^2 - z0*z1")]));
        assert!(certify_coprime(&[&hp("z1*z2"), &hp("z0*z2"), &hp("z0*z1")]));
        assert!(!certify_coprime(&[&hp("z0*z1 + i*z0*z2"), &hp("z1^2 + i*z1*z2")]));
        assert!(!certify_coprime(&[&hp("z0^2 - z1^2"), &hp("z0^2 - 2*z0*z1 + z1^2")]));
    }
}
