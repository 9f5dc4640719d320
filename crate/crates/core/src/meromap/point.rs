use num_complex::Complex;
use num_traits::{One, Zero};

use crate::exactalg::GaussianRational;
use crate::graphgeom::fs_distance;
use crate::scalar::{norm_sqr, Real};

/// A point of `CP^m` in homogeneous coordinates.
///
/// Float coordinates are scaled so the largest-modulus entry is exactly 1.
/// When exact coordinates are present they are scaled so the first nonzero
/// entry is 1, and the float coordinates are derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint<T: Real = f64> {
    coords: Vec<Complex<T>>,
    exact: Option<Vec<GaussianRational>>,
}

impl<T: Real> ProjectivePoint<T> {
    /// `None` if every coordinate is zero or any is non-finite.
    pub fn new(coords: Vec<Complex<T>>) -> Option<Self> {
        let coords = canonical_float(coords)?;
        Some(Self { coords, exact: None })
    }

    pub fn from_exact(coords: Vec<GaussianRational>) -> Option<Self> {
        let pivot = coords.iter().find(|c| !c.is_zero())?.inv()?;
        let exact: Vec<GaussianRational> = coords.iter().map(|c| c * &pivot).collect();
        let float = canonical_float(exact.iter().map(|c| c.to_complex::<T>()).collect())?;
        Some(Self { coords: float, exact: Some(exact) })
    }

    /// The `i`-th coordinate point `[0:..:1:..:0]` of `CP^m`.
    pub fn coordinate(m: usize, i: usize) -> Self {
        let mut e = vec![GaussianRational::zero(); m + 1];
        e[i] = GaussianRational::one();
        Self::from_exact(e).expect("nonzero")
    }

    /// The affine point `x` in the chart `z_chart = 1`.
    pub fn from_affine(x: &[Complex<T>], chart: usize) -> Self {
        let mut h = x.to_vec();
        h.insert(chart, Complex::new(T::one(), T::zero()));
        Self::new(h).expect("chart point is nonzero")
    }

    pub fn coords(&self) -> &[Complex<T>] {
        &self.coords
    }

    pub fn exact(&self) -> Option<&[GaussianRational]> {
        self.exact.as_deref()
    }

    /// Dimension `m` of the ambient `CP^m`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Index of the largest-modulus coordinate (the natural chart).
    pub fn chart(&self) -> usize {
        largest(&self.coords)
    }

    /// Affine coordinates in the chart `z_chart = 1`; `None` on the
    /// hyperplane at infinity of that chart.
    pub fn affine(&self, chart: usize) -> Option<Vec<Complex<T>>> {
        let d = self.coords[chart];
        if norm_sqr(d) == T::zero() {
            return None;
        }
        Some(
            self.coords
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != chart)
                .map(|(_, &c)| c / d)
                .collect(),
        )
    }

    pub fn distance(&self, other: &Self) -> T {
        fs_distance(&self.coords, &other.coords)
    }

    pub fn cast<U: Real>(&self) -> ProjectivePoint<U> {
        ProjectivePoint {
            coords: self
                .coords
                .iter()
                .map(|c| Complex::new(U::lit(c.re.to_f64().unwrap_or(0.0)), U::lit(c.im.to_f64().unwrap_or(0.0))))
                .collect(),
            exact: self.exact.clone(),
        }
    }
}

fn largest<T: Real>(v: &[Complex<T>]) -> usize {
    let mut best = 0;
    let mut bm = T::neg_infinity();
    for (i, c) in v.iter().enumerate() {
        let m = norm_sqr(*c);
        if m > bm {
            bm = m;
            best = i;
        }
    }
    best
}

fn canonical_float<T: Real>(mut coords: Vec<Complex<T>>) -> Option<Vec<Complex<T>>> {
    if coords.is_empty() || coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return None;
    }
    let k = largest(&coords);
    let pivot = coords[k];
    if norm_sqr(pivot) == T::zero() {
        return None;
    }
    for c in coords.iter_mut() {
        *c = *c / pivot;
    }
    coords[k] = Complex::new(T::one(), T::zero());
    Some(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let p = ProjectivePoint::new(vec![Complex::new(2.0, 0.0), Complex::new(0.0, 4.0)]).unwrap();
        assert_eq!(p.coords()[1], Complex::new(1.0, 0.0));
        assert!((p.coords()[0] - Complex::new(0.0, -0.5)).norm() < 1e-15);
        assert!(ProjectivePoint::<f64>::new(vec![Complex::new(0.0, 0.0); 3]).is_none());

        let e = ProjectivePoint::<f64>::from_exact(vec![
            GaussianRational::zero(),
            GaussianRational::from_int(3),
            GaussianRational::from_int(6),
        ])
        .unwrap();
        assert_eq!(e.exact().unwrap()[1], GaussianRational::one());
        assert_eq!(e.exact().unwrap()[2], GaussianRational::from_int(2));
        assert_eq!(e.chart(), 2);
    }

    #[test]
    fn chart_round_trip() {
        let x = [Complex::new(0.25, -1.0), Complex::new(3.0, 0.5)];
        let p = ProjectivePoint::from_affine(&x, 1);
        let back = p.affine(1).unwrap();
        assert!((back[0] - x[0]).norm() < 1e-15 && (back[1] - x[1]).norm() < 1e-15);
    }
}
