use num_complex::Complex;
use num_traits::Zero;

use super::{MapError, ProjectivePoint, RationalMap, Source};
use crate::exactalg::{GaussianRational, HomoPoly};

type C64 = Complex<f64>;

/// Values of `f` at `a`.
///
/// Off the indeterminacy set this is the single point `f(a)`. At an
/// indeterminacy point, `f` is evaluated at distance `radius` from `a` along
/// `directions` quasi-uniform complex directions in the chart where `a` is
/// largest; the returned points sample the cluster set `f[a]`.
pub fn point_image(f: &RationalMap, a: &ProjectivePoint, directions: usize, radius: f64) -> Vec<ProjectivePoint> {
    let defined = match a.exact() {
        Some(e) => !f.annihilates(e),
        None => f.residual(a.coords()) > 1e-10,
    };
    if defined {
        return f.eval_point(a.coords(), 0.0).into_iter().collect();
    }
    let chart = a.chart();
    let base = a.affine(chart).expect("chart coordinate is 1");
    let dirs = sphere_directions(base.len(), directions);
    dirs.iter()
        .filter_map(|u| {
            let x: Vec<C64> = base.iter().zip(u).map(|(b, d)| b + d * radius).collect();
            let z = ProjectivePoint::from_affine(&x, chart);
            f.eval_point(z.coords(), 0.0)
        })
        .collect()
}

/// `count` unit vectors in `C^k` (`k` = 1 or 2) spread over the sphere.
///
/// For `k = 2` the squared modulus of the first coordinate runs uniformly
/// through `(0, 1)` and both phases follow golden-ratio rotations.
pub fn sphere_directions(k: usize, count: usize) -> Vec<Vec<C64>> {
    let tau = std::f64::consts::TAU;
    let g1 = 0.618_033_988_749_894_8_f64;
    let g2 = 0.754_877_666_246_692_7_f64;
    (0..count)
        .map(|j| {
            let jf = j as f64;
            match k {
                1 => vec![C64::from_polar(1.0, tau * jf / count as f64)],
                2 => {
                    let s = (jf + 0.5) / count as f64;
                    let t1 = tau * (jf * g1).fract();
                    let t2 = tau * (jf * g2).fract();
                    vec![C64::from_polar(s.sqrt(), t1), C64::from_polar((1.0 - s).sqrt(), t2)]
                }
                _ => {
                    // generic fallback: cycle through coordinate axes
                    let mut v = vec![C64::zero(); k];
                    v[j % k] = C64::from_polar(1.0, tau * jf / count as f64);
                    v
                }
            }
        })
        .collect()
}

/// The projective line through two distinct points, parametrized as
/// `[s : t] -> s * p + t * q`.
#[derive(Clone, Debug)]
pub struct ProjectiveLine {
    pub p: Vec<GaussianRational>,
    pub q: Vec<GaussianRational>,
}

impl ProjectiveLine {
    pub fn new(p: Vec<GaussianRational>, q: Vec<GaussianRational>) -> Self {
        assert_eq!(p.len(), q.len(), "line endpoints live in the same space");
        Self { p, q }
    }
}

/// `f` pulled back to a line, reduced to a map `CP^1 -> CP^m`.
pub fn restrict_to_line(f: &RationalMap, line: &ProjectiveLine) -> Result<RationalMap, MapError> {
    let nv = f.nvars();
    if line.p.len() != nv {
        return Err(MapError::DimensionMismatch { expected: nv, found: line.p.len() });
    }
    let s = HomoPoly::var(2, 0);
    let t = HomoPoly::var(2, 1);
    let subs: Vec<HomoPoly> = line
        .p
        .iter()
        .zip(&line.q)
        .map(|(a, b)| s.scale(a).add(&t.scale(b)).expect("same shape"))
        .collect();
    let pulled = f
        .components()
        .iter()
        .map(|c| c.substitute(&subs))
        .collect::<Result<Vec<_>, _>>()?;
    RationalMap::normalize(Source::Projective(1), pulled).map_err(|e| match e {
        MapError::AllZero => MapError::LineInsideIndeterminacy,
        e => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meromap::indeterminacy_points;
    use num_traits::One;

    fn q(k: i64) -> GaussianRational {
        GaussianRational::from_int(k)
    }

    #[test]
    fn ratio_at_origin_covers_the_sphere() {
        let f = RationalMap::parse(Source::Affine(2), &["z2", "z1"]).unwrap();
        let a = ProjectivePoint::coordinate(2, 0);
        let img = point_image(&f, &a, 64, 1e-8);
        assert_eq!(img.len(), 64);
        let spread = img
            .iter()
            .flat_map(|x| img.iter().map(move |y| x.distance(y)))
            .fold(0.0, f64::max);
        assert!(spread > 0.9, "spread {spread}");
    }

    #[test]
    fn cremona_blows_point_to_line() {
        let img = point_image(&RationalMap::cremona(), &ProjectivePoint::coordinate(2, 0), 32, 1e-8);
        assert_eq!(img.len(), 32);
        assert!(img.iter().all(|p| p.coords()[0].norm() < 1e-6));
    }

    #[test]
    fn regular_point_gives_value() {
        let f = RationalMap::cremona();
        let a = ProjectivePoint::new(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(4.0, 0.0)]).unwrap();
        let img = point_image(&f, &a, 16, 1e-8);
        assert_eq!(img.len(), 1);
        let direct = f.eval_point(a.coords(), 0.0).unwrap();
        assert!(img[0].distance(&direct) < 1e-10);
    }

    #[test]
    fn restrictions() {
        // [z1 : z0] on {z1 = 3 z0} is the constant [3 : 1]
        let f = RationalMap::parse(Source::Projective(2), &["z1", "z0"]).unwrap();
        let line = ProjectiveLine::new(vec![q(1), q(3), q(0)], vec![q(0), q(0), q(1)]);
        let r = restrict_to_line(&f, &line).unwrap();
        assert_eq!(r.degree(), 0);
        assert_eq!(r.components()[0].coeff(&[0, 0]), q(3));

        // Cremona on {z2 = z0}: [z1 z0 : z0^2 : z0 z1] -> [z1 : z0 : z1]
        let line = ProjectiveLine::new(vec![q(1), q(0), q(1)], vec![q(0), q(1), q(0)]);
        let r = restrict_to_line(&RationalMap::cremona(), &line).unwrap();
        assert_eq!(r.degree(), 1);
        let expect = RationalMap::parse(Source::Projective(1), &["z1", "z0", "z1"]).unwrap();
        assert!(r.projectively_equal(&expect));
        assert!(indeterminacy_points(&r).unwrap().is_empty());

        let id = restrict_to_line(&RationalMap::identity(2), &line).unwrap();
        assert_eq!(id.degree(), 1);
        assert_eq!(id.components()[1].coeff(&[0, 1]), GaussianRational::one());
    }
}
