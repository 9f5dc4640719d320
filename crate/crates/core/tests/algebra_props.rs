use meromap::exactalg::{GaussianRational, HomoPoly, Monomial};
use num_complex::Complex;
use num_traits::{One, Zero};
use proptest::prelude::*;

const NV: usize = 3;

fn coeff() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -3i64..=3, 1i64..=3).prop_map(|(a, b, c, d)| {
        &GaussianRational::from_ratio(a, b) + &(&GaussianRational::from_ratio(c, d) * &GaussianRational::i())
    })
}

fn monomials(nv: usize, d: u32) -> Vec<Vec<u32>> {
    if nv == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for k in 0..=d {
        for mut rest in monomials(nv - 1, d - k) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

/// Random homogeneous polynomial of degree `d` with a handful of terms.
fn homo(d: u32) -> impl Strategy<Value = HomoPoly> {
    let mons = monomials(NV, d);
    let n = mons.len();
    proptest::collection::vec((0..n, coeff()), 1..=4).prop_map(move |picks| {
        let terms = picks.into_iter().map(|(i, c)| (Monomial::new(mons[i].clone()), c));
        HomoPoly::from_terms(NV, Some(d), terms).unwrap()
    })
    .prop_filter("nonzero", |p| !p.is_zero())
}

fn point() -> impl Strategy<Value = Vec<GaussianRational>> {
    proptest::collection::vec(coeff(), NV)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_axioms(a in homo(2), b in homo(2), c in homo(1)) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&c).unwrap(), c.mul(&a).unwrap());
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let lhs = a.add(&b).unwrap().mul(&c).unwrap();
        let rhs = a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn homogeneity_exact(p in homo(3), x in point(), lam in coeff()) {
        let scaled: Vec<_> = x.iter().map(|v| &lam * v).collect();
        let lhs = p.eval_exact(&scaled).unwrap();
        let rhs = &lam.pow(3).unwrap() * &p.eval_exact(&x).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn float_matches_exact(p in homo(4), q in homo(4), x in point()) {
        let p = p.mul(&q).unwrap();
        let exact = p.eval_exact(&x).unwrap().to_c64();
        let xf: Vec<Complex<f64>> = x.iter().map(|v| v.to_c64()).collect();
        let approx = p.eval_float(&xf);
        let scale: f64 = p.terms().map(|(e, c)| {
            let mut m = c.to_c64().norm();
            for (v, &k) in e.iter().enumerate() {
                m *= xf[v].norm().powi(k as i32);
            }
            m
        }).sum();
        prop_assert!((exact - approx).norm() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn text_round_trip(p in homo(3)) {
        let s = p.to_string();
        prop_assert_eq!(HomoPoly::parse_with_degree(&s, NV, p.degree()).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gcd_divides_both(
        g in homo(1),
        a in homo(1),
        b in homo(2),
        extra in homo(1),
    ) {
        // products of random low-degree factors sharing g (sometimes twice)
        let p = g.mul(&a).unwrap().mul(&extra).unwrap();
        let q = g.mul(&b).unwrap();
        let d = p.gcd(&q).unwrap();
        prop_assert!(p.div_exact(&d).is_some());
        prop_assert!(q.div_exact(&d).is_some());
        prop_assert!(d.div_exact(&g).is_some(), "gcd {} misses factor {}", d, g);
        let (_, lc) = d.leading().unwrap();
        prop_assert!(lc.is_one());
        prop_assert!(!d.is_zero() && !GaussianRational::zero().is_one());
    }
}
