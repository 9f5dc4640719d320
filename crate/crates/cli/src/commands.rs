//! Subcommand drivers. Each returns an [`Outcome`]; writing is left to the
//! caller so that output happens on one thread.

use anyhow::{bail, Result};
use meromap::converge::{
    gamma_converge, s_converge, series_convergence_def1, spherical_convergence_def2, stabilization_test, w_converge,
    ConvergenceReport, Notion, RatFun,
};
use meromap::dynamics::{classify_dichotomy, fatou_scan, DichotomyOptions, FatouOptions, GridSpec};
use meromap::graphgeom::{
    graph_distance, hausdorff, sample_graph, volume, CompactRegion, ProjectionOptions, SampleOptions, Shape, VolumeEstimate, VolumeOptions,
};
use meromap::meromap::{indeterminacy_locus, indeterminacy_points, ProductMap, RationalMap, DEFAULT_BIT_BUDGET};
use meromap::Compiled;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::scenario::{MapSpec, RunConfig, Scenario, VolumeNormalization};

/// Exit code for unreadable or invalid input.
pub const EXIT_USAGE: i32 = 64;

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    /// Main report, printed when no output directory is given.
    pub stdout: String,
    /// Files to write into the output directory, in order.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, files: Vec::new() }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

/// Indeterminacy points of every factor, in affine coordinates of `chart`.
fn affine_indeterminacy(p: &ProductMap, chart: usize) -> Result<Vec<Vec<C64>>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for f in p.factors() {
        if f.source().dim() != 2 {
            continue;
        }
        for q in indeterminacy_points(f)?.points {
            if let Some(x) = q.affine(chart) {
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// Center and radius of a one-dimensional disc region.
fn disc(region: &CompactRegion) -> Result<(C64, f64)> {
    match &region.shape {
        Shape::Polydisc { center, radii } if radii.len() == 1 => Ok((center[0], radii[0])),
        Shape::Ball { center, radius } if center.len() == 1 => Ok((center[0], *radius)),
        _ => bail!("series notions need a one-dimensional disc region"),
    }
}

pub fn run_notion(s: &Scenario, path: &str, notion: Notion, run: &RunConfig) -> Result<ConvergenceReport> {
    let fam = s.family(path)?;
    let region = s.region(path)?;
    let schedule = s.schedule();
    let opts = s.options(run);
    let limit = s.limit(path)?;
    Ok(match notion {
        Notion::Strong => s_converge(&fam, &region, &schedule, limit.as_ref(), &opts)?,
        Notion::Weak => w_converge(&fam, &region, &schedule, &opts)?,
        Notion::Gamma => gamma_converge(&fam, &region, &schedule, &opts)?,
        Notion::Stabilized => stabilization_test(&fam, &region, &schedule, &opts)?,
        Notion::Def1Series | Notion::Def2Spherical => {
            let (c, r) = disc(&region)?;
            let seq = RatFun::sequence(&fam, &schedule)?;
            if notion == Notion::Def1Series {
                series_convergence_def1(&seq, c, r, &opts)
            } else {
                spherical_convergence_def2(&seq, c, r, &opts)
            }
        }
    })
}

pub fn notion_tag(n: Notion) -> &'static str {
    match n {
        Notion::Strong => "strong",
        Notion::Weak => "weak",
        Notion::Gamma => "gamma",
        Notion::Stabilized => "stabilized",
        Notion::Def1Series => "def1",
        Notion::Def2Spherical => "def2",
    }
}

/// `converge`: run one notion on a scenario; the exit code is the verdict.
pub fn converge(s: &Scenario, path: &str, notion: Notion, run: &RunConfig) -> Result<Outcome> {
    let report = run_notion(s, path, notion, run)?;
    let tag = notion_tag(notion);
    let body = report.to_json();
    Ok(Outcome {
        code: report.verdict.exit_code(),
        files: vec![
            (format!("{}.{tag}.json", s.name), body.clone()),
            (format!("{}.{tag}.trace.csv", s.name), report.trace_csv()),
        ],
        stdout: body,
    })
}

/// `volume`: graph volume of a map over its region.
pub fn volume_cmd(m: &MapSpec, path: &str, run: &RunConfig) -> Result<Outcome> {
    let p = m.product(path)?;
    let region = m.region(path)?;
    let indet = affine_indeterminacy(&p, region.chart)?;
    let opts = VolumeOptions { focus: indet.clone(), indeterminacy: indet, ..VolumeOptions::default() };
    let f: Compiled = Compiled::new(&p, region.chart);
    let v = volume(&f, &region, run.samples.unwrap_or(100_000), run.seed.unwrap_or(0), &opts)?;
    let (value, stderr) = match run.volume_normalization {
        VolumeNormalization::Pullback => (v.pullback(), v.pullback_stderr),
        VolumeNormalization::Graph => (v.value, v.stderr),
    };
    let body = json(&VolumeReport { schema: 1, map: p.to_string(), normalization: run.volume_normalization, value, stderr, estimate: &v });
    Ok(Outcome { code: 0, files: vec![(format!("{}.volume.json", m.name), body.clone()), (format!("{}.volume.csv", m.name), v.to_csv())], stdout: body })
}

#[derive(Serialize)]
struct VolumeReport<'a> {
    schema: u32,
    map: String,
    normalization: VolumeNormalization,
    value: f64,
    stderr: f64,
    estimate: &'a VolumeEstimate,
}

#[derive(Serialize)]
struct HausdorffReport {
    schema: u32,
    first: String,
    second: String,
    samples: usize,
    /// Graph distance with projection refinement.
    value: f64,
    /// Plain Hausdorff distance of the two clouds.
    cloud_value: f64,
}

/// `hausdorff`: distance between the graphs of two maps over the first
/// map's region.
pub fn hausdorff_cmd(a: &MapSpec, pa: &str, b: &MapSpec, pb: &str, run: &RunConfig) -> Result<Outcome> {
    let (ma, mb) = (a.product(pa)?, b.product(pb)?);
    let region = a.region(pa)?;
    let (ia, ib) = (affine_indeterminacy(&ma, region.chart)?, affine_indeterminacy(&mb, region.chart)?);
    let samples = run.samples.unwrap_or(10_000);
    let seed = run.seed.unwrap_or(0);
    let cloud = |f: &Compiled, own: &[Vec<C64>], other: &[Vec<C64>]| {
        let opts = SampleOptions { own_indeterminacy: own.to_vec(), special_points: other.to_vec(), ..SampleOptions::default() };
        sample_graph(f, &region, samples, seed, &opts)
    };
    let (fa, fb): (Compiled, Compiled) = (Compiled::new(&ma, region.chart), Compiled::new(&mb, region.chart));
    let ca = cloud(&fa, &ia, &ib)?;
    let cb = cloud(&fb, &ib, &ia)?;
    let tol = run.tol.unwrap_or(2e-2);
    let d = graph_distance(&ca, Some(&fa), &cb, Some(&fb), tol, &ProjectionOptions::default())?;
    let r = HausdorffReport {
        schema: 1,
        first: a.name.clone(),
        second: b.name.clone(),
        samples,
        value: d.value,
        cloud_value: hausdorff(&ca, &cb)?,
    };
    Ok(Outcome::ok(json(&r)))
}

#[derive(Serialize)]
struct IndetPoint {
    coords: Vec<[f64; 2]>,
    /// Exact coordinates in the polynomial text grammar, when certified.
    exact: Option<Vec<String>>,
    residual: f64,
}

#[derive(Serialize)]
struct IndetReport {
    schema: u32,
    map: String,
    exact: bool,
    points: Vec<IndetPoint>,
}

/// `indet`: the indeterminacy set of a map on a surface.
pub fn indet(m: &MapSpec, path: &str) -> Result<Outcome> {
    let f = m.map(path)?;
    let set = indeterminacy_locus(&f)?;
    let points = set
        .points
        .iter()
        .map(|p| IndetPoint {
            coords: p.coords().iter().map(|c| [c.re, c.im]).collect(),
            exact: p.exact().map(|e| e.iter().map(|c| c.canonical()).collect()),
            residual: f.residual(p.coords()),
        })
        .collect();
    Ok(Outcome::ok(json(&IndetReport { schema: 1, map: f.to_string(), exact: set.exact, points })))
}

#[derive(Serialize)]
struct IterateReport {
    schema: u32,
    k: usize,
    map: String,
    components: Vec<String>,
    degree_trace: Vec<u32>,
    is_identity: bool,
}

/// `iterate`: the reduced `k`-th iterate and its degree trace.
pub fn iterate(m: &MapSpec, path: &str, k: usize) -> Result<Outcome> {
    let f = m.map(path)?;
    let it = f.iterate(k, DEFAULT_BIT_BUDGET)?;
    let is_identity = it.map.is_self_map() && it.map.projectively_equal(&RationalMap::identity(f.source().dim()));
    Ok(Outcome::ok(json(&IterateReport {
        schema: 1,
        k,
        map: it.map.to_string(),
        components: it.map.components().iter().map(|c| c.pretty()).collect(),
        degree_trace: it.degree_trace,
        is_identity,
    })))
}

#[derive(Serialize)]
struct FatouSummary {
    schema: u32,
    map: String,
    cells: usize,
    in_phi_s: usize,
    in_phi_w_only: usize,
    undecided: usize,
    degree_trace: Vec<u32>,
    exclude_indeterminacy: bool,
    orbit_fallback: bool,
}

/// `fatou`: Fatou grid of a self-map of `CP^2` on the standard chart grid,
/// with the dichotomy report when weak-only cells appear.
pub fn fatou(m: &MapSpec, path: &str, schedule: Option<Vec<usize>>, run: &RunConfig) -> Result<Outcome> {
    let f = m.map(path)?;
    let schedule = schedule.unwrap_or_else(|| (1..=10).map(|k| 2 * k).collect());
    let opts = FatouOptions {
        seed: run.seed.unwrap_or(0),
        tol: run.tol.unwrap_or(2e-2),
        exclude_indeterminacy: run.exclude_indeterminacy,
        ..FatouOptions::default()
    };
    let grid = fatou_scan(&f, &GridSpec::standard(), &schedule, &opts)?;
    use meromap::dynamics::CellVerdict::*;
    let summary = FatouSummary {
        schema: 1,
        map: f.to_string(),
        cells: grid.cells.len(),
        in_phi_s: grid.count(InPhiS),
        in_phi_w_only: grid.count(InPhiWOnly),
        undecided: grid.count(Undecided),
        degree_trace: grid.degree_trace.clone(),
        exclude_indeterminacy: grid.exclude_indeterminacy,
        orbit_fallback: grid.orbit_fallback,
    };
    let mut files = vec![
        (format!("{}.fatou.json", m.name), grid.to_json()),
        (format!("{}.fatou.csv", m.name), grid.to_csv()),
        (format!("{}.fatou.pgm", m.name), grid.to_pgm()),
    ];
    if summary.in_phi_w_only > 0 {
        let dopts = DichotomyOptions { seed: opts.seed, ..DichotomyOptions::default() };
        let d = classify_dichotomy(&f, &grid, &schedule, &dopts)?;
        files.push((format!("{}.dichotomy.json", m.name), d.to_json()));
    }
    Ok(Outcome { code: 0, stdout: json(&summary), files })
}
