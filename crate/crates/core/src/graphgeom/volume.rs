use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::region::dist;
use super::{CompactRegion, GeomError, LowDiscrepancy};
use crate::meromap::{CompiledMap, LiftJet};
use crate::scalar::{inner, Real};

type C64 = Complex<f64>;

#[derive(Clone, Debug)]
pub struct VolumeOptions {
    /// Within `clearance` of an indeterminacy point, integrand values above
    /// this are truncated; the excess is reported as `capped_mass`.
    pub density_cap: f64,
    pub indeterminacy: Vec<Vec<C64>>,
    pub clearance: f64,
    /// Points where the density may blow up (indeterminacy points of the map,
    /// in chart coordinates). Half of the samples are drawn log-radially
    /// around them.
    pub focus: Vec<Vec<C64>>,
    /// Smallest radius of the log-radial component.
    pub focus_min_radius: f64,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        Self { density_cap: 1e8, indeterminacy: Vec::new(), clearance: 1e-4, focus: Vec::new(), focus_min_radius: 1e-12 }
    }
}

/// Terms of `det(I + h) = 1 + tr h + det h` integrated separately. For a
/// one-dimensional source `mixed` is zero and `pure` is the pullback area.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Breakdown {
    pub base: f64,
    pub mixed: f64,
    pub pure: f64,
}

/// Graph volume `(1/q!) int_K (omega_K + f^* omega_FS)^q`.
///
/// `raw_value` drops the `1/q!`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Standard error of the terms involving `f^* omega_FS` alone.
    pub pullback_stderr: f64,
    pub samples: usize,
    pub raw_value: f64,
    pub breakdown: Breakdown,
    pub capped_mass: f64,
    pub dim: usize,
}

impl VolumeEstimate {
    /// The terms involving `f^* omega_FS`, i.e. the value minus the volume of `K`.
    pub fn pullback(&self) -> f64 {
        self.breakdown.mixed + self.breakdown.pure
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    pub fn to_csv(&self) -> String {
        let b = &self.breakdown;
        format!(
            "term,value\nbase,{:.12e}\nmixed,{:.12e}\npure,{:.12e}\ntotal,{:.12e}\nraw,{:.12e}\nstderr,{:.12e}\npullback_stderr,{:.12e}\ncapped_mass,{:.12e}\n",
            b.base,
            b.mixed,
            b.pure,
            self.value,
            self.raw_value,
            self.stderr,
            self.pullback_stderr,
            self.capped_mass
        )
    }
}

fn to64<T: Real>(z: Complex<T>) -> C64 {
    C64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

/// The pullback of the Fubini-Study form as a Hermitian matrix in the
/// source coordinates, summed over target factors.
fn pullback<T: Real>(jet: &LiftJet<T>, q: usize) -> Option<Vec<Vec<C64>>> {
    let mut h = vec![vec![C64::new(0.0, 0.0); q]; q];
    for (f, df) in jet {
        let f: Vec<C64> = f.iter().map(|z| to64(*z)).collect();
        let cols: Vec<Vec<C64>> = (0..q).map(|a| df.iter().map(|row| to64(row[a])).collect()).collect();
        let n2 = inner(&f, &f).re;
        if !(n2 > 0.0) {
            return None;
        }
        let af: Vec<C64> = cols.iter().map(|c| inner(c, &f)).collect();
        for a in 0..q {
            for b in 0..q {
                h[a][b] += (n2 * inner(&cols[a], &cols[b]) - af[a] * af[b].conj()) / (n2 * n2);
            }
        }
    }
    Some(h)
}

/// `(mixed, pure)` densities at a point, or `None` where the jet vanishes.
fn density<T: Real>(f: &CompiledMap<T>, x: &[C64]) -> Option<(f64, f64)> {
    let xt: Vec<Complex<T>> = x.iter().map(|c| Complex::new(T::lit(c.re), T::lit(c.im))).collect();
    let h = pullback(&f.jet(&xt), x.len())?;
    let out = match x.len() {
        1 => (0.0, h[0][0].re),
        _ => (h[0][0].re + h[1][1].re, (h[0][0] * h[1][1] - h[0][1] * h[1][0]).re),
    };
    (out.0.is_finite() && out.1.is_finite()).then_some(out)
}

fn sphere_volume(q: usize) -> f64 {
    if q == 1 {
        2.0 * PI
    } else {
        2.0 * PI * PI
    }
}

/// Sampling plan: uniform over the base domain, mixed with log-radial
/// shells around focus points.
struct Plan<'a> {
    region: &'a CompactRegion,
    focus: &'a [Vec<C64>],
    rmin: f64,
    rmax: f64,
}

impl Plan<'_> {
    fn point(&self, k: usize, u: &[f64]) -> Vec<C64> {
        if self.focus.is_empty() || k % 2 == 0 {
            return self.region.base_point(u);
        }
        let p = &self.focus[(k / 2) % self.focus.len()];
        let r = self.rmin * (self.rmax / self.rmin).powf(u[0]);
        let tau = std::f64::consts::TAU;
        let dir = match p.len() {
            1 => vec![C64::from_polar(1.0, tau * u[1])],
            _ => vec![C64::from_polar(u[1].sqrt(), tau * u[2]), C64::from_polar((1.0 - u[1]).sqrt(), tau * u[3])],
        };
        p.iter().zip(dir).map(|(c, d)| c + d * r).collect()
    }

    /// Sampling density at `x` (Lebesgue, real dimension `2q`).
    fn pdf(&self, x: &[C64]) -> f64 {
        let uniform = 1.0 / self.region.base_measure();
        if self.focus.is_empty() {
            return uniform;
        }
        let q = x.len();
        let l = (self.rmax / self.rmin).ln();
        let radial: f64 = self
            .focus
            .iter()
            .map(|p| {
                let r = dist(x, p);
                if r >= self.rmin && r <= self.rmax {
                    1.0 / (sphere_volume(q) * r.powi(2 * q as i32) * l)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            / self.focus.len() as f64;
        0.5 * uniform + 0.5 * radial
    }
}

/// Monte-Carlo graph volume over `region` with `n` samples.
pub fn volume<T: Real>(
    f: &CompiledMap<T>,
    region: &CompactRegion,
    n: usize,
    seed: u64,
    opts: &VolumeOptions,
) -> Result<VolumeEstimate, GeomError> {
    let q = region.dim();
    if !(1..=2).contains(&q) || f.source_dim() != q {
        return Err(GeomError::UnsupportedDimension(q));
    }
    if n == 0 {
        return Err(GeomError::RegionEmpty);
    }
    let seq = LowDiscrepancy::new(2 * q, seed);
    let plan = Plan { region, focus: &opts.focus, rmin: opts.focus_min_radius, rmax: 2.0 * region.scale() };
    // per sample: weighted (base, mixed, pure, capped)
    let rows: Vec<[f64; 4]> = (0..n)
        .into_par_iter()
        .map(|k| {
            let x = plan.point(k, &seq.point(k as u64));
            if !region.contains(&x) {
                return [0.0; 4];
            }
            let w = 1.0 / plan.pdf(&x);
            let near = opts.indeterminacy.iter().any(|a| dist(&x, a) < opts.clearance);
            let cap = if near { opts.density_cap } else { f64::INFINITY };
            let (mixed, pure, capped) = match density(f, &x) {
                Some((m, p)) => {
                    let (m, p) = (m.max(0.0), p.max(0.0));
                    let total = m + p;
                    if total > cap {
                        let s = cap / total;
                        (m * s, p * s, total - cap)
                    } else {
                        (m, p, 0.0)
                    }
                }
                None => (opts.density_cap, 0.0, 0.0),
            };
            [w, mixed * w, pure * w, capped * w]
        })
        .collect();
    let nf = n as f64;
    let mut sums = [0.0; 4];
    let (mut sq, mut sq_pull) = (0.0, 0.0);
    for r in &rows {
        for (s, v) in sums.iter_mut().zip(r) {
            *s += v;
        }
        let t = r[0] + r[1] + r[2];
        sq += t * t;
        sq_pull += (r[1] + r[2]) * (r[1] + r[2]);
    }
    let breakdown = Breakdown { base: sums[0] / nf, mixed: sums[1] / nf, pure: sums[2] / nf };
    let value = breakdown.base + breakdown.mixed + breakdown.pure;
    let var = |sq: f64, mean: f64| (sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
    let pullback = breakdown.mixed + breakdown.pure;
    let fact = if q == 2 { 2.0 } else { 1.0 };
    Ok(VolumeEstimate {
        value,
        stderr: (var(sq, value) / nf).sqrt(),
        pullback_stderr: (var(sq_pull, pullback) / nf).sqrt(),
        samples: n,
        raw_value: fact * value,
        breakdown,
        capped_mass: sums[3] / nf,
        dim: q,
    })
}

/// Fiber masses `mu(z1) = int_{|z2| < r2} h_22 dA(z2)` of the pullback form
/// over a bidisc chart, for each `z1` in the grid.
pub fn marginal_mass<T: Real>(
    f: &CompiledMap<T>,
    region: &CompactRegion,
    z1_grid: &[C64],
    fiber_samples: usize,
    seed: u64,
) -> Result<Vec<(C64, f64)>, GeomError> {
    let super::Shape::Polydisc { center, radii } = &region.shape else {
        return Err(GeomError::UnsupportedDimension(region.dim()));
    };
    if center.len() != 2 || f.source_dim() != 2 {
        return Err(GeomError::UnsupportedDimension(region.dim()));
    }
    let seq = LowDiscrepancy::new(2, seed);
    let r2 = radii[1];
    let fiber: Vec<C64> = (0..fiber_samples as u64)
        .map(|k| {
            let u = seq.point(k);
            center[1] + C64::from_polar(r2 * u[0].sqrt(), std::f64::consts::TAU * u[1])
        })
        .collect();
    let out = z1_grid
        .par_iter()
        .map(|&z1| {
            let vals: Vec<f64> = fiber
                .iter()
                .map(|&z2| {
                    let xt = [Complex::new(T::lit(z1.re), T::lit(z1.im)), Complex::new(T::lit(z2.re), T::lit(z2.im))];
                    pullback(&f.jet(&xt), 2).map_or(0.0, |h| h[1][1].re.max(0.0))
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
            (z1, PI * r2 * r2 * mean)
        })
        .collect();
    Ok(out)
}

pub fn marginal_mass_csv(rows: &[(C64, f64)]) -> String {
    let mut s = String::from("z1_re,z1_im,mu\n");
    for (z, m) in rows {
        let _ = writeln!(s, "{:.12e},{:.12e},{:.12e}", z.re, z.im, m);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meromap::{RationalMap, Source};

    fn map(src: Source, comps: &[&str]) -> CompiledMap<f64> {
        CompiledMap::from_map(&RationalMap::parse(src, comps).unwrap(), 0)
    }

    #[test]
    fn identity_pullback_area() {
        let f = map(Source::Affine(1), &["z0", "z1"]);
        let v = volume(&f, &CompactRegion::unit_polydisc(1), 20000, 3, &VolumeOptions::default()).unwrap();
        assert!((v.breakdown.pure - PI / 2.0).abs() < 3.0 * v.stderr + 1e-3, "{v:?}");
        assert!((v.breakdown.base - PI).abs() < 1e-2);
    }

    #[test]
    fn scaled_linear_map_matches_closed_form() {
        // [1 : l z1 : l z2] on the unit ball, l = 2^10
        let l: f64 = 1024.0;
        let f = map(Source::Affine(2), &["z0", "1024*z1", "1024*z2"]);
        let ball = CompactRegion::ball(vec![C64::new(0.0, 0.0); 2], 1.0);
        let opts = VolumeOptions { focus: vec![vec![C64::new(0.0, 0.0); 2]], ..Default::default() };
        let v = volume(&f, &ball, 40000, 5, &opts).unwrap();
        let s = l * l;
        let pi2 = PI * PI;
        let exact = pi2 / 2.0 + pi2 * (1.0 - 1.0 / s + 1.0 / (s * (1.0 + s))) + pi2 / 2.0 * (s / (1.0 + s)).powi(2);
        assert!((v.value - exact).abs() < 4.0 * v.stderr + 0.02 * exact, "{} vs {exact} ({})", v.value, v.stderr);
    }

    #[test]
    fn fiber_mass() {
        let region = CompactRegion::unit_polydisc(2);
        let grid = [C64::new(0.0, 0.0), C64::new(0.5, 0.2)];
        let proj2 = map(Source::Affine(2), &["z0", "z2"]);
        for (_, m) in marginal_mass(&proj2, &region, &grid, 4096, 1).unwrap() {
            assert!((m - PI / 2.0).abs() < 1e-2, "{m}");
        }
        let proj1 = map(Source::Affine(2), &["z0", "z1"]);
        for (_, m) in marginal_mass(&proj1, &region, &grid, 256, 1).unwrap() {
            assert!(m.abs() < 1e-12);
        }
    }
}
