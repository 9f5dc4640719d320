use super::engine::{any_orbit, dist, exceptional_candidates, members, Member, Reference, Sampler};
use super::{judge, ConvergeError, ConvergeOptions, ConvergenceReport, Decomposition, ExceptionalPoint, Notion, Verdict, VerticalPart};
use crate::graphgeom::{volume, CompactRegion, VolumeOptions};
use crate::meromap::{MapFamily, ProductMap, ProjectivePoint};

use num_complex::Complex;

type C64 = Complex<f64>;

fn values(trace: &[(usize, f64)]) -> Vec<f64> {
    trace.iter().map(|t| t.1).collect()
}

fn orbit_note(report: &mut ConvergenceReport, m: &[Member]) {
    if any_orbit(m) {
        report.notes.push("some members exceeded the coefficient budget and were evaluated as float orbits".into());
    }
}

/// Strong convergence on `k`: Hausdorff distance of the graphs over `k`
/// to the limit's graph. Without `limit` the family's lift limit is used,
/// class by class, and failing that consecutive members are compared.
pub fn s_converge(
    fam: &MapFamily,
    k: &CompactRegion,
    schedule: &[usize],
    limit: Option<&ProductMap>,
    opts: &ConvergeOptions,
) -> Result<ConvergenceReport, ConvergeError> {
    let members = members(fam, schedule, k.chart)?;
    let reference = Reference::build(fam, limit, k.chart)?;
    let mut report = ConvergenceReport::new(Notion::Strong);
    orbit_note(&mut report, &members);
    match (&reference, limit) {
        (Reference::Cauchy(_), _) => report.notes.push("no limit known: consecutive members compared".into()),
        (Reference::Classes(c), None) if c.len() > 1 => {
            report.notes.push(format!("lift limit has period {}: members compared with their class", c.len()))
        }
        _ => {}
    }
    let sampler = Sampler::new(k, opts);
    let (trace, last) = sampler.trace(&members, &reference, &[])?;
    report.verdict = judge(&values(&trace), opts.tol, opts.tail);
    report.distance_trace = trace;
    if let (Reference::Classes(_), Some(c)) = (&reference, last) {
        report.limit_cloud = Some(c.b);
    }
    Ok(report)
}

fn weak_reference(fam: &MapFamily, members: &mut Vec<Member>, chart: usize, report: &mut ConvergenceReport) -> Result<Reference, ConvergeError> {
    let r = Reference::build(fam, None, chart)?;
    if let Reference::Cauchy(_) = r {
        if members.len() >= 2 {
            let last = members.pop().expect("nonempty");
            report.notes.push(format!("no limit known: member n = {} used as reference", last.n));
            return Ok(Reference::Classes(vec![last.target]));
        }
    }
    Ok(r)
}

/// Weak convergence on `d`: strong convergence off a finite set.
///
/// Samples that stay far from the limit graph at the last schedule entry
/// are clustered into candidate exceptional points (snapped to the limit's
/// indeterminacy points when close); convergence is then tested on `d`
/// minus balls of each radius in `opts.excision_radii` around them.
pub fn w_converge(
    fam: &MapFamily,
    d: &CompactRegion,
    schedule: &[usize],
    opts: &ConvergeOptions,
) -> Result<ConvergenceReport, ConvergeError> {
    let mut report = ConvergenceReport::new(Notion::Weak);
    let mut members = members(fam, schedule, d.chart)?;
    orbit_note(&mut report, &members);
    let reference = weak_reference(fam, &mut members, d.chart, &mut report)?;
    let sampler = Sampler::new(d, opts);
    let (full, last) = sampler.trace(&members, &reference, &[])?;
    let strong = judge(&values(&full), opts.tol, opts.tail);
    report.diagnostics.insert("strong_exit_code".into(), strong.exit_code() as f64);
    if strong == Verdict::Converges {
        report.verdict = Verdict::Converges;
        report.distance_trace = full;
        report.limit_cloud = last.map(|c| c.b);
        return Ok(report);
    }
    let Some(last) = last else {
        report.distance_trace = full;
        return Ok(report);
    };
    let scale = d.scale();
    let mut anchors = reference.indet();
    if let Some(m) = members.last() {
        anchors.extend(m.target.indet.iter().cloned());
    }
    let failing = last.failing_sources(opts.tol);
    report.diagnostics.insert("failing_samples".into(), failing.len() as f64);
    let link = opts.cluster_factor * scale;
    let candidates = exceptional_candidates(&failing, &anchors, link, link, opts.max_points)?;
    if candidates.is_empty() {
        report.verdict = strong;
        report.distance_trace = full;
        return Ok(report);
    }
    let radii: Vec<f64> = opts.excision_radii.iter().map(|r| r * scale).collect();
    let mut verdicts = Vec::new();
    for &r in &radii {
        let region = candidates.iter().fold(d.clone(), |reg, c| reg.excluding(c.clone(), r));
        let (trace, last) = sampler.with_region(region).trace(&members, &reference, &candidates)?;
        verdicts.push(judge(&values(&trace), opts.tol, opts.tail));
        report.distance_trace = trace;
        report.limit_cloud = last.map(|c| c.b);
    }
    report.verdict = if verdicts.iter().all(|v| *v == Verdict::Converges) {
        Verdict::Converges
    } else if verdicts.contains(&Verdict::Diverges) {
        Verdict::Diverges
    } else {
        Verdict::Undecided
    };
    report.exceptional_points =
        candidates.into_iter().map(|point| ExceptionalPoint { point, radii: radii.clone() }).collect();
    Ok(report)
}

fn diameter(points: &[&crate::meromap::TargetPoint]) -> f64 {
    // a deterministic subsample keeps this quadratic loop cheap
    let step = (points.len() / 400).max(1);
    let sub: Vec<_> = points.iter().step_by(step).collect();
    let mut best = 0.0f64;
    for i in 0..sub.len() {
        for j in i + 1..sub.len() {
            best = best.max(sub[i].distance(sub[j]));
        }
    }
    best
}

/// Convergence of the graphs over all of `d` (no exclusions), tested as a
/// Cauchy criterion within residue classes of the lift limit's period.
///
/// On convergence the last graph is split into the part near the limit
/// map's graph and vertical parts over the limit's indeterminacy points.
pub fn gamma_converge(
    fam: &MapFamily,
    d: &CompactRegion,
    schedule: &[usize],
    opts: &ConvergeOptions,
) -> Result<ConvergenceReport, ConvergeError> {
    let mut report = ConvergenceReport::new(Notion::Gamma);
    let members = members(fam, schedule, d.chart)?;
    orbit_note(&mut report, &members);
    let reference = Reference::build(fam, None, d.chart)?;
    let specials: Vec<Vec<C64>> = reference.indet().into_iter().filter(|x| d.in_shape(x)).collect();
    let sampler = Sampler::new(d, opts);
    let (trace, _) = sampler.trace(&members, &Reference::Cauchy(reference.period()), &specials)?;
    report.verdict = judge(&values(&trace), opts.tol, opts.tail);
    report.distance_trace = trace;
    if report.verdict != Verdict::Converges {
        return Ok(report);
    }
    let (Some(m), Some(l)) = (members.last(), reference.class(members.last().map_or(0, |m| m.n))) else {
        report.notes.push("no limit map known: graph is not decomposed".into());
        return Ok(report);
    };
    let c = sampler.compare(&m.target, l, &specials)?;
    let delta = opts.cluster_factor * d.scale();
    let mut vertical = Vec::new();
    for s in &specials {
        let fiber: Vec<_> = c
            .a
            .points
            .iter()
            .zip(&c.dist.forward)
            .filter(|(p, &e)| e > opts.tol && dist(&p.source, s) <= delta)
            .map(|(p, _)| &p.target)
            .collect();
        let diam = diameter(&fiber);
        if diam > opts.fiber_diam_tol {
            vertical.push(VerticalPart { point: s.clone(), fiber_diameter: diam, samples: fiber.len() });
        }
    }
    let graph_samples = c.dist.forward.iter().filter(|&&e| e <= opts.tol).count();
    report.exceptional_points =
        vertical.iter().map(|v| ExceptionalPoint { point: v.point.clone(), radii: vec![delta] }).collect();
    let vol_opts = |own: &[Vec<C64>]| VolumeOptions {
        focus: specials.iter().chain(own).cloned().collect(),
        indeterminacy: own.to_vec(),
        ..VolumeOptions::default()
    };
    if d.dim() <= 2 {
        let vn = volume(&m.target.map, d, opts.samples, opts.seed, &vol_opts(&m.target.indet))?;
        let vl = volume(&l.map, d, opts.samples, opts.seed, &vol_opts(&l.indet))?;
        report.diagnostics.insert("volume_last".into(), vn.value);
        report.diagnostics.insert("volume_limit_map".into(), vl.value);
        report.diagnostics.insert("volume_excess".into(), vn.value - vl.value);
        if let Some(nu) = opts.nu {
            report.diagnostics.insert("vertical_volume_lower_bound".into(), nu * vertical.len() as f64);
        }
    }
    report.decomposition = Some(Decomposition { graph_samples, vertical });
    report.limit_cloud = Some(c.b);
    Ok(report)
}

fn same_points(a: &[Vec<C64>], b: &[Vec<C64>], chart: usize) -> bool {
    let proj = |x: &Vec<C64>| ProjectivePoint::from_affine(x, chart);
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| proj(x).distance(&proj(y)) <= 1e-6))
}

/// Strong convergence plus stabilization of the indeterminacy sets in `d`
/// over the tail of the schedule.
///
/// Stabilization of the point sets stands in for the existence of a common
/// proper modification resolving all members; the report says so.
pub fn stabilization_test(
    fam: &MapFamily,
    d: &CompactRegion,
    schedule: &[usize],
    opts: &ConvergeOptions,
) -> Result<ConvergenceReport, ConvergeError> {
    let strong = s_converge(fam, d, schedule, None, opts)?;
    let members = members(fam, schedule, d.chart)?;
    let sets: Vec<Vec<Vec<C64>>> = members
        .iter()
        .map(|m| m.target.indet.iter().filter(|x| d.contains(x)).cloned().collect())
        .collect();
    let tail = &sets[sets.len().saturating_sub(opts.tail)..];
    let last = tail.last().expect("schedule is nonempty");
    let stable = tail.iter().all(|s| same_points(s, last, d.chart));
    let mut report = ConvergenceReport::new(Notion::Stabilized);
    report.notes.push("proxy: stabilization of indeterminacy sets in place of a common proper modification".into());
    report.notes.extend(strong.notes.iter().cloned());
    report.diagnostics.insert("strong_exit_code".into(), strong.verdict.exit_code() as f64);
    report.diagnostics.insert("indeterminacy_stable".into(), if stable { 1.0 } else { 0.0 });
    report.verdict = match (strong.verdict, stable) {
        (Verdict::Converges, true) => Verdict::Converges,
        (Verdict::Converges, false) => Verdict::Diverges,
        (v, _) => v,
    };
    report.distance_trace = strong.distance_trace;
    report.limit_cloud = strong.limit_cloud;
    Ok(report)
}
