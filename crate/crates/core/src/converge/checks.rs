use num_complex::Complex;
use serde::Serialize;

use super::engine::{any_orbit, dist, exceptional_candidates, members, Reference, Sampler};
use super::notions::{s_converge, w_converge};
use super::{judge, ConvergeError, ConvergeOptions, ConvergenceReport, ExceptionalPoint, Notion, Verdict};
use crate::graphgeom::{sample_sources, CompactRegion, SampleOptions};
use crate::meromap::{MapFamily, MapInstance, ProductMap};

type C64 = Complex<f64>;

#[derive(Clone, Debug, Serialize)]
pub struct RoucheReport {
    pub strong: Verdict,
    /// `false` when the family was not found to converge strongly, in which
    /// case nothing was checked.
    pub applicable: bool,
    pub limit_holomorphic_inside: bool,
    pub members_holomorphic: bool,
    pub checked: Vec<usize>,
}

/// Both directions of the Rouche principle for a strongly convergent
/// family, on `k` shrunk by 0.05 and the last three schedule entries:
/// a limit without indeterminacy there forces members without it, and
/// members without indeterminacy force the same of the limit.
pub fn rouche_check(
    fam: &MapFamily,
    k: &CompactRegion,
    schedule: &[usize],
    limit: Option<&ProductMap>,
    opts: &ConvergeOptions,
) -> Result<RoucheReport, ConvergeError> {
    let s = s_converge(fam, k, schedule, limit, opts)?;
    let mut report = RoucheReport {
        strong: s.verdict,
        applicable: s.verdict == Verdict::Converges,
        limit_holomorphic_inside: false,
        members_holomorphic: false,
        checked: Vec::new(),
    };
    if !report.applicable {
        return Ok(report);
    }
    let k1 = k.shrink(0.05);
    let reference = Reference::build(fam, limit, k.chart)?;
    let limit_in_k1: Vec<Vec<C64>> = reference.indet().into_iter().filter(|x| k1.contains(x)).collect();
    let all = members(fam, schedule, k.chart)?;
    let tail = &all[all.len().saturating_sub(3)..];
    report.checked = tail.iter().map(|m| m.n).collect();
    report.limit_holomorphic_inside = limit_in_k1.is_empty();
    report.members_holomorphic = tail.iter().all(|m| m.target.indet.iter().all(|x| !k.contains(x)));
    if report.limit_holomorphic_inside {
        for m in tail {
            if let Some(x) = m.target.indet.iter().find(|x| k1.contains(x)) {
                return Err(ConvergeError::RoucheViolation(format!(
                    "limit is holomorphic on the shrunken region but member n = {} has an indeterminacy point at {x:?}",
                    m.n
                )));
            }
        }
    }
    if report.members_holomorphic && !limit_in_k1.is_empty() {
        return Err(ConvergeError::RoucheViolation(format!(
            "members are holomorphic but the limit has indeterminacy points {limit_in_k1:?}"
        )));
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftReport {
    /// Uniform convergence of the normalized component tuples.
    pub verdict: Verdict,
    pub weak: Verdict,
    /// Whether the two verdicts agree on convergence.
    pub consistent: bool,
    pub distance_trace: Vec<(usize, f64)>,
    pub notes: Vec<String>,
}

/// Normalized lift values: each factor's tuple divided by its sup norm over
/// the sample points, with the phase fixed at the reference slot.
fn normalized(p: &ProductMap, zs: &[Vec<C64>], slots: &[(usize, usize)]) -> Vec<Vec<Vec<C64>>> {
    p.factors()
        .iter()
        .zip(slots)
        .map(|(f, &(xi, ci))| {
            let vals: Vec<Vec<C64>> = zs.iter().map(|z| f.eval_lift(z)).collect();
            let sup = vals.iter().map(|v| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max);
            let pivot = vals[xi][ci];
            let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
            let s = if sup > 0.0 { phase / sup } else { phase };
            vals.into_iter().map(|v| v.into_iter().map(|c| c * s).collect()).collect()
        })
        .collect()
}

/// Uniform convergence on `k` of the component tuples, each normalized to
/// sup norm 1, compared with the weak verdict on the same data.
pub fn lift_convergence_check(
    fam: &MapFamily,
    k: &CompactRegion,
    schedule: &[usize],
    opts: &ConvergeOptions,
) -> Result<LiftReport, ConvergeError> {
    let all = members(fam, schedule, k.chart)?;
    let weak = w_converge(fam, k, schedule, opts)?.verdict;
    let mut report = LiftReport { verdict: Verdict::Undecided, weak, consistent: false, distance_trace: Vec::new(), notes: Vec::new() };
    if any_orbit(&all) {
        report.notes.push("float orbits carry no global lift; lift test skipped".into());
        report.consistent = weak != Verdict::Converges;
        return Ok(report);
    }
    let n_pts = opts.samples.min(2000);
    let xs = sample_sources(k, n_pts, opts.seed, &SampleOptions::default())?;
    let zs: Vec<Vec<C64>> = xs
        .iter()
        .map(|x| {
            let mut z = x.clone();
            z.insert(k.chart, C64::new(1.0, 0.0));
            z
        })
        .collect();
    let exact: Vec<(usize, ProductMap)> = fam
        .instantiate_schedule(schedule)?
        .into_iter()
        .filter_map(|(n, m)| match m {
            MapInstance::Exact(p) => Some((n, p)),
            MapInstance::Orbit { .. } => None,
        })
        .collect();
    // the reference slot is where the last member's lift is largest
    let (_, last) = exact.last().expect("schedule is nonempty");
    let slots: Vec<(usize, usize)> = last
        .factors()
        .iter()
        .map(|f| {
            let mut best = (0, 0, -1.0);
            for (xi, z) in zs.iter().enumerate() {
                for (ci, c) in f.eval_lift(z).iter().enumerate() {
                    if c.norm() > best.2 {
                        best = (xi, ci, c.norm());
                    }
                }
            }
            (best.0, best.1)
        })
        .collect();
    let period = fam.lift_limit().map_or(1, |l| l.period);
    let tuples: Vec<(usize, Vec<Vec<Vec<C64>>>)> = exact.iter().map(|(n, p)| (*n, normalized(p, &zs, &slots))).collect();
    for (i, (n, g)) in tuples.iter().enumerate() {
        let Some((_, h)) = tuples[..i].iter().rev().find(|(m, _)| (n - m) % period == 0) else { continue };
        let mut sup = 0.0f64;
        for (fa, fb) in g.iter().zip(h) {
            for (va, vb) in fa.iter().zip(fb) {
                for (a, b) in va.iter().zip(vb) {
                    sup = sup.max((a - b).norm());
                }
            }
        }
        report.distance_trace.push((*n, sup));
    }
    let trace: Vec<f64> = report.distance_trace.iter().map(|t| t.1).collect();
    report.verdict = judge(&trace, opts.tol, opts.tail);
    report.consistent = (report.verdict == Verdict::Converges) == (weak == Verdict::Converges);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct HartogsReport {
    pub verdict: Verdict,
    /// Strong convergence on the Hartogs figure.
    pub hartogs: ConvergenceReport,
    /// Convergence on the bidisc off the exceptional points.
    pub bidisc: ConvergenceReport,
}

/// Propagation of strong convergence from the Hartogs figure `H^2(r)` to
/// the unit bidisc minus the limit's indeterminacy points.
pub fn hartogs_propagation(
    fam: &MapFamily,
    r: f64,
    schedule: &[usize],
    opts: &ConvergeOptions,
) -> Result<HartogsReport, ConvergeError> {
    let h = CompactRegion::hartogs(r);
    let hartogs = s_converge(fam, &h, schedule, None, opts)?;
    let mut bidisc = ConvergenceReport::new(Notion::Weak);
    if hartogs.verdict != Verdict::Converges {
        bidisc.notes.push("no strong convergence on the Hartogs figure; nothing propagated".into());
        return Ok(HartogsReport { verdict: Verdict::Undecided, hartogs, bidisc });
    }
    let disc = CompactRegion::unit_polydisc(2);
    let all = members(fam, schedule, disc.chart)?;
    let reference = Reference::build(fam, None, disc.chart)?;
    let a: Vec<Vec<C64>> = reference.indet().into_iter().filter(|x| disc.in_shape(x)).collect();
    let sampler = Sampler::new(&disc, opts);
    let (full, last) = sampler.trace(&all, &reference, &[])?;
    let link = opts.cluster_factor * disc.scale();
    if let Some(c) = &last {
        let observed = exceptional_candidates(&c.failing_sources(opts.tol), &a, link, link, opts.max_points)?;
        if let Some(p) = observed.iter().find(|p| !a.iter().any(|q| dist(p, q) <= link)) {
            return Err(ConvergeError::PropagationViolation(format!(
                "convergence fails near {p:?}, away from the limit's indeterminacy"
            )));
        }
    }
    bidisc.diagnostics.insert("full_bidisc_exit_code".into(), judge(&full.iter().map(|t| t.1).collect::<Vec<_>>(), opts.tol, opts.tail).exit_code() as f64);
    let radii: Vec<f64> = opts.excision_radii.iter().map(|f| f * disc.scale()).collect();
    let mut verdicts = Vec::new();
    for &rad in &radii {
        let region = a.iter().fold(disc.clone(), |reg, p| reg.excluding(p.clone(), rad));
        let (trace, _) = sampler.with_region(region).trace(&all, &reference, &a)?;
        verdicts.push(judge(&trace.iter().map(|t| t.1).collect::<Vec<_>>(), opts.tol, opts.tail));
        bidisc.distance_trace = trace;
    }
    bidisc.verdict = if verdicts.iter().all(|v| *v == Verdict::Converges) {
        Verdict::Converges
    } else if verdicts.contains(&Verdict::Diverges) {
        Verdict::Diverges
    } else {
        Verdict::Undecided
    };
    bidisc.exceptional_points = a.into_iter().map(|point| ExceptionalPoint { point, radii: radii.clone() }).collect();
    Ok(HartogsReport { verdict: bidisc.verdict, hartogs, bidisc })
}
