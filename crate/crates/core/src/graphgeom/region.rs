use num_complex::Complex;

type C64 = Complex<f64>;

/// Base shape of a compact region in an affine chart `C^q`.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// `|z_i - c_i| <= r_i` for every coordinate.
    Polydisc { center: Vec<C64>, radii: Vec<f64> },
    /// `inner_i <= |z_i - c_i| <= outer_i` for every coordinate.
    PolyAnnulus { center: Vec<C64>, inner: Vec<f64>, outer: Vec<f64> },
    /// Euclidean ball.
    Ball { center: Vec<C64>, radius: f64 },
    /// The Hartogs figure `{|z1| < r, |z2| < 1} u {|z1| < 1, 1 - r < |z2| < 1}`
    /// in `C^2`.
    Hartogs { r: f64 },
}

/// An open ball removed from a region.
#[derive(Clone, Debug, PartialEq)]
pub struct Excision {
    pub center: Vec<C64>,
    pub radius: f64,
}

/// A compact region `K` of an affine chart, minus finitely many open balls.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactRegion {
    /// Homogenizing coordinate of the chart (0 for affine sources).
    pub chart: usize,
    pub shape: Shape,
    pub exclusions: Vec<Excision>,
}

pub(crate) fn dist(x: &[C64], y: &[C64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

impl CompactRegion {
    pub fn new(chart: usize, shape: Shape) -> Self {
        Self { chart, shape, exclusions: Vec::new() }
    }

    /// The closed unit polydisc of `C^q` in the chart `z0 = 1`.
    pub fn unit_polydisc(q: usize) -> Self {
        Self::polydisc(vec![C64::new(0.0, 0.0); q], vec![1.0; q])
    }

    pub fn polydisc(center: Vec<C64>, radii: Vec<f64>) -> Self {
        Self::new(0, Shape::Polydisc { center, radii })
    }

    pub fn ball(center: Vec<C64>, radius: f64) -> Self {
        Self::new(0, Shape::Ball { center, radius })
    }

    pub fn hartogs(r: f64) -> Self {
        Self::new(0, Shape::Hartogs { r })
    }

    pub fn with_chart(mut self, chart: usize) -> Self {
        self.chart = chart;
        self
    }

    pub fn excluding(mut self, center: Vec<C64>, radius: f64) -> Self {
        self.exclusions.push(Excision { center, radius });
        self
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Polydisc { center, .. } | Shape::PolyAnnulus { center, .. } | Shape::Ball { center, .. } => {
                center.len()
            }
            Shape::Hartogs { .. } => 2,
        }
    }

    /// Characteristic size: the largest radius of the base shape.
    pub fn scale(&self) -> f64 {
        match &self.shape {
            Shape::Polydisc { radii, .. } => radii.iter().copied().fold(0.0, f64::max),
            Shape::PolyAnnulus { outer, .. } => outer.iter().copied().fold(0.0, f64::max),
            Shape::Ball { radius, .. } => *radius,
            Shape::Hartogs { .. } => 1.0,
        }
    }

    pub fn in_shape(&self, x: &[C64]) -> bool {
        match &self.shape {
            Shape::Polydisc { center, radii } => {
                x.iter().zip(center).zip(radii).all(|((z, c), r)| (z - c).norm() <= *r)
            }
            Shape::PolyAnnulus { center, inner, outer } => x
                .iter()
                .zip(center)
                .zip(inner.iter().zip(outer))
                .all(|((z, c), (lo, hi))| (*lo..=*hi).contains(&(z - c).norm())),
            Shape::Ball { center, radius } => dist(x, center) <= *radius,
            Shape::Hartogs { r } => {
                let (a, b) = (x[0].norm(), x[1].norm());
                (a < *r && b < 1.0) || (a < 1.0 && b > 1.0 - r && b < 1.0)
            }
        }
    }

    pub fn contains(&self, x: &[C64]) -> bool {
        self.in_shape(x) && self.exclusions.iter().all(|e| dist(x, &e.center) >= e.radius)
    }

    /// The region shrunk by `margin` (a compact subset well inside it).
    pub fn shrink(&self, margin: f64) -> Self {
        let shape = match &self.shape {
            Shape::Polydisc { center, radii } => {
                Shape::Polydisc { center: center.clone(), radii: radii.iter().map(|r| (r - margin).max(0.0)).collect() }
            }
            Shape::PolyAnnulus { center, inner, outer } => Shape::PolyAnnulus {
                center: center.clone(),
                inner: inner.iter().map(|r| if *r > 0.0 { r + margin } else { 0.0 }).collect(),
                outer: outer.iter().map(|r| (r - margin).max(0.0)).collect(),
            },
            Shape::Ball { center, radius } => Shape::Ball { center: center.clone(), radius: (radius - margin).max(0.0) },
            Shape::Hartogs { r } => Shape::Hartogs { r: (r - margin).max(0.0) },
        };
        let exclusions =
            self.exclusions.iter().map(|e| Excision { center: e.center.clone(), radius: e.radius + margin }).collect();
        Self { chart: self.chart, shape, exclusions }
    }

    /// Lebesgue measure of the base shape's sampling domain (the bidisc for
    /// a Hartogs figure).
    pub fn base_measure(&self) -> f64 {
        use std::f64::consts::PI;
        match &self.shape {
            Shape::Polydisc { radii, .. } => radii.iter().map(|r| PI * r * r).product(),
            Shape::PolyAnnulus { inner, outer, .. } => {
                inner.iter().zip(outer).map(|(a, b)| PI * (b * b - a * a)).product()
            }
            Shape::Ball { radius, center } => {
                let q = center.len() as i32;
                let fact: f64 = (1..=q).map(f64::from).product();
                PI.powi(q) * radius.powi(2 * q) / fact
            }
            Shape::Hartogs { .. } => PI * PI,
        }
    }

    /// Map a point of the unit cube `[0,1)^(2q)` to the sampling domain,
    /// uniformly with respect to Lebesgue measure.
    pub fn base_point(&self, u: &[f64]) -> Vec<C64> {
        let tau = std::f64::consts::TAU;
        let annulus = |c: C64, lo: f64, hi: f64, a: f64, b: f64| {
            let r = (lo * lo + a * (hi * hi - lo * lo)).sqrt();
            c + C64::from_polar(r, tau * b)
        };
        match &self.shape {
            Shape::Polydisc { center, radii } => {
                center.iter().zip(radii).enumerate().map(|(i, (c, r))| annulus(*c, 0.0, *r, u[2 * i], u[2 * i + 1])).collect()
            }
            Shape::PolyAnnulus { center, inner, outer } => center
                .iter()
                .enumerate()
                .map(|(i, c)| annulus(*c, inner[i], outer[i], u[2 * i], u[2 * i + 1]))
                .collect(),
            Shape::Hartogs { .. } => (0..2).map(|i| annulus(C64::new(0.0, 0.0), 0.0, 1.0, u[2 * i], u[2 * i + 1])).collect(),
            Shape::Ball { center, radius } => {
                let q = center.len();
                let r = radius * u[0].powf(1.0 / (2 * q) as f64);
                let dir = match q {
                    1 => vec![C64::from_polar(1.0, tau * u[1])],
                    _ => {
                        let s = u[1];
                        vec![C64::from_polar(s.sqrt(), tau * u[2]), C64::from_polar((1.0 - s).sqrt(), tau * u[3])]
                    }
                };
                center.iter().zip(dir).map(|(c, d)| c + d * r).collect()
            }
        }
    }
}
