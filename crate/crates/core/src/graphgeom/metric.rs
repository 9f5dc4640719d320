use num_complex::Complex;

use crate::scalar::{norm_sqr, Real};

/// Chordal Fubini-Study distance `|a ^ b| / (|a| |b|)`, in `[0, 1]`.
///
/// The wedge norm is summed over coordinate pairs rather than obtained from
/// `|a|^2 |b|^2 - |<a, b>|^2`, which would cancel catastrophically for
/// nearby points.
pub fn fs_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let na: T = a.iter().map(|z| norm_sqr(*z)).sum();
    let nb: T = b.iter().map(|z| norm_sqr(*z)).sum();
    let mut w = T::zero();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            w = w + norm_sqr(a[i] * b[j] - a[j] * b[i]);
        }
    }
    let d = (w / (na * nb)).sqrt();
    if d > T::one() {
        T::one()
    } else {
        d
    }
}

/// Product metric on `chart x target`: Euclidean distance of affine source
/// coordinates plus `target_scale` times the chordal distance on each
/// target factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSpec {
    pub target_scale: f64,
}

impl Default for MetricSpec {
    fn default() -> Self {
        Self { target_scale: 1.0 }
    }
}

impl MetricSpec {
    pub fn scaled(target_scale: f64) -> Self {
        Self { target_scale }
    }

    pub fn source_distance<T: Real>(&self, x: &[Complex<T>], y: &[Complex<T>]) -> T {
        x.iter().zip(y).map(|(a, b)| norm_sqr(*a - *b)).sum::<T>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn hand_values() {
        assert_eq!(fs_distance(&[c(1.0), c(0.0)], &[c(0.0), c(1.0)]), 1.0);
        assert_eq!(fs_distance(&[c(1.0), c(2.0)], &[c(1.0), c(2.0)]), 0.0);
        let d = fs_distance(&[c(1.0), c(1.0)], &[c(1.0), c(0.0)]);
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn scale_invariance() {
        let a = [C::new(0.3, 1.0), C::new(-2.0, 0.5), C::new(0.0, 0.1)];
        let b = [C::new(1.0, 0.0), C::new(0.2, 0.2), C::new(-1.0, 3.0)];
        let lam = C::new(-3.5, 7.25);
        let scaled: Vec<C> = a.iter().map(|z| z * lam).collect();
        assert!((fs_distance(&a, &b) - fs_distance(&scaled, &b)).abs() < 1e-15);
    }
}
