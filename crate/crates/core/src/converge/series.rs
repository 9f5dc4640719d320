//! The classical one-variable notions: convergence of principal parts
//! plus holomorphic remainders, and spherical (local `f` or `1/f`)
//! convergence.

use std::f64::consts::TAU;

use num_complex::Complex;

use super::{judge, ConvergeError, ConvergeOptions, ConvergenceReport, Notion, Verdict};
use crate::exactalg::UniPoly;
use crate::meromap::{MapFamily, RationalMap};

type C64 = Complex<f64>;

const POLE_TOL: f64 = 1e-9;

/// A rational function `num / den` of one variable.
#[derive(Clone, Debug, PartialEq)]
pub struct RatFun {
    pub num: UniPoly,
    pub den: UniPoly,
}

impl RatFun {
    pub fn new(num: UniPoly, den: UniPoly) -> Self {
        Self { num, den }
    }

    /// `[F0 : F1]` on a one-dimensional source read as `F0 / F1` in the
    /// chart `z0 = 1`.
    pub fn from_map(f: &RationalMap) -> Option<Self> {
        if f.source().dim() != 1 || f.target_dim() != 1 {
            return None;
        }
        let c = f.components();
        Some(Self { num: c[0].to_univariate(0), den: c[1].to_univariate(0) })
    }

    /// Members of a one-variable family at the schedule entries.
    pub fn sequence(fam: &MapFamily, schedule: &[usize]) -> Result<Vec<(usize, RatFun)>, ConvergeError> {
        super::check_schedule(schedule)?;
        schedule
            .iter()
            .map(|&n| {
                let m = fam.instantiate_map(n as i64)?;
                Ok((n, RatFun::from_map(&m).ok_or(ConvergeError::NonRationalTerm(n))?))
            })
            .collect()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.num.eval(z) / self.den.eval(z)
    }

    fn reciprocal(&self) -> Self {
        Self { num: self.den.clone(), den: self.num.clone() }
    }

    pub fn poles(&self) -> Vec<(C64, usize)> {
        with_orders(&self.den)
    }

    pub fn zeros(&self) -> Vec<(C64, usize)> {
        with_orders(&self.num)
    }
}

/// Roots with multiplicities, found as the first nonvanishing derivative.
fn with_orders(p: &UniPoly) -> Vec<(C64, usize)> {
    let mut derivs = vec![p.clone()];
    while derivs.last().is_some_and(|d| d.degree().unwrap_or(0) > 0) {
        let d = derivs.last().expect("nonempty").derivative();
        derivs.push(d);
    }
    p.roots()
        .into_iter()
        .map(|r| {
            let scale = 1.0 + r.norm();
            let order = derivs
                .iter()
                .position(|d| {
                    let size: f64 = d.coeffs().iter().map(|c| c.to_c64().norm()).sum::<f64>().max(1e-300);
                    d.eval(r).norm() > 1e-7 * size * scale.powi(d.degree().unwrap_or(0) as i32)
                })
                .unwrap_or(1)
                .max(1);
            (r, order)
        })
        .collect()
}

fn in_disc(p: C64, center: C64, radius: f64) -> bool {
    (p - center).norm() <= radius + POLE_TOL
}

fn same_poles(a: &[(C64, usize)], b: &[(C64, usize)]) -> bool {
    a.len() == b.len() && a.iter().all(|(p, k)| b.iter().any(|(q, m)| k == m && (p - q).norm() <= POLE_TOL))
}

fn circle(center: C64, radius: f64, m: usize) -> impl Iterator<Item = C64> {
    (0..m).map(move |j| center + C64::from_polar(radius, TAU * j as f64 / m as f64))
}

/// Principal part coefficients `a_{-1}, ..., a_{-order}` at `p` by the
/// trapezoid rule on a circle avoiding other poles.
fn principal_part(f: &RatFun, p: C64, order: usize, all: &[(C64, usize)]) -> Vec<C64> {
    let gap = all.iter().map(|(q, _)| (q - p).norm()).filter(|d| *d > POLE_TOL).fold(f64::INFINITY, f64::min);
    let rho = (0.5 * gap).min(0.25);
    let m = 256;
    (1..=order)
        .map(|k| circle(C64::new(0.0, 0.0), rho, m).map(|w| f.eval(p + w) * w.powi(k as i32)).sum::<C64>() / m as f64)
        .collect()
}

fn eval_principal(parts: &[(C64, Vec<C64>)], z: C64) -> C64 {
    parts
        .iter()
        .map(|(p, a)| a.iter().enumerate().map(|(k, c)| c / (z - p).powi(k as i32 + 1)).sum::<C64>())
        .sum()
}

/// Convergence in the sense of principal parts: on the disc `K` the poles
/// must eventually stay put (with orders), their principal parts converge,
/// and the holomorphic remainders converge uniformly.
pub fn series_convergence_def1(
    seq: &[(usize, RatFun)],
    center: C64,
    radius: f64,
    opts: &ConvergeOptions,
) -> ConvergenceReport {
    let mut report = ConvergenceReport::new(Notion::Def1Series);
    if seq.is_empty() {
        return report;
    }
    let poles: Vec<Vec<(C64, usize)>> = seq
        .iter()
        .map(|(_, f)| f.poles().into_iter().filter(|(p, _)| in_disc(*p, center, radius)).collect())
        .collect();
    let start = seq.len().saturating_sub(opts.tail);
    let last = poles.last().expect("nonempty");
    let stable = poles[start..].iter().all(|p| same_poles(p, last));
    report.diagnostics.insert("poles_in_region".into(), last.len() as f64);
    report.diagnostics.insert("poles_stable".into(), if stable { 1.0 } else { 0.0 });
    if !stable {
        let moving = poles[start..].windows(2).all(|w| !same_poles(&w[0], &w[1]));
        report.verdict = if moving { Verdict::Diverges } else { Verdict::Undecided };
        report.notes.push("poles in the region do not stabilize".into());
        return report;
    }
    let boundary: Vec<C64> = circle(center, radius, 256).collect();
    let remainders: Vec<(Vec<(C64, Vec<C64>)>, Vec<C64>)> = seq
        .iter()
        .zip(&poles)
        .map(|((_, f), ps)| {
            let all = f.poles();
            let parts: Vec<(C64, Vec<C64>)> = ps.iter().map(|(p, k)| (*p, principal_part(f, *p, *k, &all))).collect();
            let rem = boundary.iter().map(|&z| f.eval(z) - eval_principal(&parts, z)).collect();
            (parts, rem)
        })
        .collect();
    for i in start.max(1)..seq.len() {
        let (pa, ra) = &remainders[i];
        let (pb, rb) = &remainders[i - 1];
        let mut d = ra.iter().zip(rb).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if same_poles(&poles[i], &poles[i - 1]) {
            for (p, a) in pa {
                if let Some((_, b)) = pb.iter().find(|(q, _)| (p - q).norm() <= POLE_TOL) {
                    d = d.max(a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
                }
            }
        } else {
            d = f64::INFINITY;
        }
        report.distance_trace.push((seq[i].0, d));
    }
    let trace: Vec<f64> = report.distance_trace.iter().map(|t| t.1).collect();
    report.verdict = judge(&trace, opts.tol, opts.tail);
    report
}

fn rank(v: Verdict) -> u8 {
    match v {
        Verdict::Converges => 0,
        Verdict::Undecided => 1,
        Verdict::Diverges => 2,
    }
}

/// Spherical convergence: `K` is covered by small discs, and on each disc
/// eventually every `f_n` is pole-free and `f_n` converges uniformly, or
/// every `f_n` is zero-free and `1/f_n` does. Disc radii `R/2`, `R/4`
/// and `R/8` are tried in turn.
pub fn spherical_convergence_def2(
    seq: &[(usize, RatFun)],
    center: C64,
    radius: f64,
    opts: &ConvergeOptions,
) -> ConvergenceReport {
    let mut report = ConvergenceReport::new(Notion::Def2Spherical);
    if seq.len() < 2 {
        return report;
    }
    let window = &seq[seq.len().saturating_sub(opts.tail + 1)..];
    let roots: Vec<(Vec<(C64, usize)>, Vec<(C64, usize)>)> = window.iter().map(|(_, f)| (f.poles(), f.zeros())).collect();
    let mut any_diverges = false;
    for eps in [radius / 2.0, radius / 4.0, radius / 8.0] {
        let steps = ((radius + eps) / eps).ceil() as i64;
        let mut worst = vec![0.0f64; window.len() - 1];
        let mut ok = true;
        for i in -steps..=steps {
            for j in -steps..=steps {
                let c = center + C64::new(i as f64 * eps, j as f64 * eps);
                if (c - center).norm() >= radius + eps {
                    continue;
                }
                let hits = |rs: &[(C64, usize)]| rs.iter().any(|(p, _)| (p - c).norm() <= eps + POLE_TOL);
                let use_f = roots.iter().all(|(p, _)| !hits(p));
                let use_inv = roots.iter().all(|(_, z)| !hits(z));
                if !use_f && !use_inv {
                    ok = false;
                    continue;
                }
                let pts: Vec<C64> = circle(c, eps, 128).collect();
                let mut best: Option<(Verdict, Vec<f64>)> = None;
                for (usable, invert) in [(use_f, false), (use_inv, true)] {
                    if !usable {
                        continue;
                    }
                    let vals: Vec<Vec<C64>> = window
                        .iter()
                        .map(|(_, f)| {
                            let g = if invert { f.reciprocal() } else { f.clone() };
                            pts.iter().map(|&z| g.eval(z)).collect()
                        })
                        .collect();
                    let trace: Vec<f64> = vals
                        .windows(2)
                        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
                        .collect();
                    let v = judge(&trace, opts.tol, opts.tail);
                    let better = match &best {
                        None => true,
                        Some((b, _)) => rank(v) < rank(*b),
                    };
                    if better {
                        best = Some((v, trace));
                    }
                }
                let (v, trace) = best.expect("at least one candidate");
                for (w, d) in worst.iter_mut().zip(&trace) {
                    *w = w.max(*d);
                }
                match v {
                    Verdict::Converges => {}
                    Verdict::Diverges => {
                        any_diverges = true;
                        ok = false;
                    }
                    Verdict::Undecided => ok = false,
                }
            }
        }
        report.distance_trace = window[1..].iter().map(|(n, _)| *n).zip(worst).collect();
        report.diagnostics.insert("disc_radius".into(), eps);
        if ok {
            report.verdict = Verdict::Converges;
            return report;
        }
    }
    report.verdict = if any_diverges { Verdict::Diverges } else { Verdict::Undecided };
    report
}

#[cfg(test)]
mod tests {
    use num_traits::One;

    use super::*;
    use crate::meromap::Source;

    fn one_over_z_minus(schedule: &[usize]) -> Vec<(usize, RatFun)> {
        let fam = MapFamily::parse(Source::Affine(1), &["z0", "z1 - {1/n}*z0"]).unwrap();
        RatFun::sequence(&fam, schedule).unwrap()
    }

    #[test]
    fn moving_pole() {
        let seq = one_over_z_minus(&[10, 20, 40, 80, 120, 160, 200]);
        let o = ConvergeOptions::default();
        let z = C64::new(0.0, 0.0);
        assert_eq!(series_convergence_def1(&seq, z, 0.5, &o).verdict, Verdict::Diverges);
        assert_eq!(spherical_convergence_def2(&seq, z, 1.0, &o).verdict, Verdict::Converges);
        // away from 0 both notions see a holomorphic sequence
        assert_eq!(series_convergence_def1(&seq, C64::new(0.6, 0.0), 0.2, &o).verdict, Verdict::Converges);
    }

    #[test]
    fn geometric_partial_sums() {
        let seq: Vec<(usize, RatFun)> = (4..12)
            .map(|m| {
                let coeffs = vec![crate::exactalg::GaussianRational::one(); m + 1];
                (m, RatFun::new(UniPoly::new(coeffs), UniPoly::constant(crate::exactalg::GaussianRational::one())))
            })
            .collect();
        let r = series_convergence_def1(&seq, C64::new(0.0, 0.0), 0.5, &ConvergeOptions::default());
        assert_eq!(r.verdict, Verdict::Converges);
        let (_, last) = r.distance_trace.last().unwrap();
        assert!((last - 0.5f64.powi(11)).abs() < 1e-12, "{last}");
    }

    #[test]
    fn fixed_poles_with_vanishing_parts() {
        // f_n = 1/(n (z - 1/4)^2) + z
        let seq: Vec<(usize, RatFun)> = (1..=8usize)
            .map(|k| {
                let n = 1usize << k;
                let fam = MapFamily::parse(
                    Source::Affine(1),
                    &[&format!("(1/{n})*z0^3 + z1^3 - (1/2)*z1^2*z0 + (1/16)*z1*z0^2"), "z1^2*z0 - (1/2)*z1*z0^2 + (1/16)*z0^3"],
                )
                .unwrap();
                (n, RatFun::from_map(&fam.instantiate_map(1).unwrap()).unwrap())
            })
            .collect();
        let r = series_convergence_def1(&seq, C64::new(0.0, 0.0), 0.5, &ConvergeOptions::default());
        assert_eq!(r.verdict, Verdict::Converges, "{:?}", r.distance_trace);
        assert_eq!(r.diagnostics["poles_in_region"], 1.0);
    }
}
