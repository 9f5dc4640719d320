//! The catalogue of scripted examples. Each entry runs end to end and
//! checks its expected outcome; the bundle passes when every check does.

use anyhow::Result;
use meromap::converge::{hartogs_propagation, rouche_check, ConvergenceReport, Notion, Verdict};
use meromap::dynamics::{
    classify_dichotomy, fatou_scan, lemma_251_check, CellVerdict, DichotomyOptions, DynamicsError, FatouOptions, GridSpec,
};
use meromap::graphgeom::{
    marginal_mass, marginal_mass_csv, sample_graph, volume, CompactRegion, SampleOptions, Shape, VolumeOptions,
};
use meromap::meromap::{indeterminacy_locus, point_image, ProjectivePoint, RationalMap, Source, DEFAULT_BIT_BUDGET};
use meromap::{Compiled, Point};
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::commands::{notion_tag, run_notion};
use crate::scenario::{RunConfig, Scenario};

#[derive(Debug, Error)]
#[error("unknown example `{0}`; see list-examples")]
pub struct UnknownExample(pub String);

pub const CATALOGUE: &[(&str, &str)] = &[
    ("example1", "z2/z1 on C^2: the value set at the origin is all of CP^1"),
    ("example2", "the graph of z2/z1 is C^2 blown up at the origin"),
    ("example4", "translates lifted to CP^3 blown up at a point: strong on a bidisc avoiding a, weak on one containing it"),
    ("cremona", "the quadratic involution: iterates {f, id}, degree trace 2,1,2,1, full strong Fatou grid"),
    ("nonstabilizing", "(z1 - 1/n)/z2: strong convergence without stabilization; Rouche on |z2| >= 1/2"),
    ("theorem3", "[z0 : 2z1 : 2z2]: weak Fatou set full, strong misses [1:0:0], limit collapses onto {z0 = 0}"),
    ("hartogs", "(z1 - 1/n)/z2: convergence on the Hartogs figure H^2(1/4) propagates to the bidisc off (0,0)"),
    ("volume_bound", "[z1 - 1/2 : z2 - 1/n]: equicontinuous on H^2(1/4), graph volumes uniformly bounded"),
];

macro_rules! embedded {
    ($name:literal) => {
        ($name, include_str!(concat!("../../../scenarios/", $name, ".json")))
    };
}

/// The scenario files shipped with the crate.
pub const SCENARIOS: &[(&str, &str)] = &[
    embedded!("one_over_z_minus"),
    embedded!("nonstabilizing"),
    embedded!("cremona_iterates"),
    embedded!("scaling_iterates"),
    embedded!("blown_up_translates"),
    embedded!("separated_pole"),
];

pub fn scenario(name: &str) -> Scenario {
    let (_, text) = SCENARIOS.iter().find(|(n, _)| *n == name).expect("embedded scenario");
    Scenario::parse(text, name).expect("embedded scenarios are valid")
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Bundle {
    pub schema: u32,
    pub id: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub files: Vec<(String, String)>,
}

impl Bundle {
    fn new(id: &str) -> Self {
        Self { schema: 1, id: id.into(), passed: true, checks: Vec::new(), files: Vec::new() }
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.passed &= pass;
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    fn report(&mut self, name: &str, r: &ConvergenceReport) {
        self.files.push((format!("{}.{name}.json", self.id), r.to_json()));
        self.files.push((format!("{}.{name}.trace.csv", self.id), r.trace_csv()));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn last(r: &ConvergenceReport) -> f64 {
    r.distance_trace.last().map_or(f64::NAN, |t| t.1)
}

fn spread(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max(p.distance(q));
        }
    }
    best
}

/// Largest distance from a point of a 24-point net of `CP^1` to `points`.
fn covering_radius(points: &[Point]) -> f64 {
    let net: Vec<Point> = (0..24)
        .map(|k| {
            // Fibonacci net on the sphere, as [cos(t/2) : sin(t/2) e^{i phi}]
            let u = (k as f64 + 0.5) / 24.0;
            let t = (1.0 - 2.0 * u).acos();
            let phi = std::f64::consts::TAU * (k as f64 * 0.618_033_988_749_894_8).fract();
            Point::new(vec![c((t / 2.0).cos(), 0.0), C64::from_polar((t / 2.0).sin(), phi)]).expect("nonzero")
        })
        .collect();
    net.iter().map(|n| points.iter().map(|p| p.distance(n)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

fn show(points: &[&Vec<C64>]) -> String {
    let pts: Vec<String> = points
        .iter()
        .map(|p| format!("({})", p.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("exceptional points [{}]", pts.join(", "))
}

fn verdict_check(b: &mut Bundle, name: &str, r: &ConvergenceReport, want: Verdict) {
    b.check(name, r.verdict == want, format!("{} (want {}), last distance {:.3e}", r.verdict, want, last(r)));
}

/// The four graph notions on a scenario, with the implication chain
/// stabilized => strong => weak => gamma checked.
fn chain(b: &mut Bundle, s: &Scenario, run: &RunConfig) -> Result<()> {
    let notions = [Notion::Stabilized, Notion::Strong, Notion::Weak, Notion::Gamma];
    let mut verdicts = Vec::new();
    for n in notions {
        let r = run_notion(s, &s.name, n, run)?;
        let tag = format!("{}.{}", s.name, notion_tag(n));
        if let Some(want) = s.expected(n) {
            verdict_check(b, &tag, &r, want);
        }
        b.report(&tag, &r);
        verdicts.push(r.verdict);
    }
    let inverted = verdicts.windows(2).any(|w| w[0] == Verdict::Converges && w[1] != Verdict::Converges);
    let shown: Vec<&str> = verdicts.iter().map(|v| v.as_str()).collect();
    b.check(&format!("{}.implication_chain", s.name), !inverted, format!("stabilized/strong/weak/gamma = {}", shown.join("/")));
    Ok(())
}

pub fn reproduce(id: &str, run: &RunConfig) -> Result<Bundle> {
    let mut b = Bundle::new(id);
    match id {
        "example1" => example1(&mut b)?,
        "example2" => example2(&mut b, run)?,
        "example4" => example4(&mut b, run)?,
        "cremona" => cremona(&mut b, run)?,
        "nonstabilizing" => nonstabilizing(&mut b, run)?,
        "theorem3" => theorem3(&mut b, run)?,
        "hartogs" => hartogs(&mut b, run)?,
        "volume_bound" => volume_bound(&mut b, run)?,
        other => return Err(UnknownExample(other.into()).into()),
    }
    Ok(b)
}

fn ratio() -> RationalMap {
    RationalMap::parse(Source::Affine(2), &["z2", "z1"]).expect("valid literal")
}

fn example1(b: &mut Bundle) -> Result<()> {
    let f = ratio();
    let set = indeterminacy_locus(&f)?;
    let origin = ProjectivePoint::coordinate(2, 0);
    b.check("indeterminacy", set.exact && set.len() == 1 && set.contains(&origin, 0.0), format!("{} point(s), exact = {}", set.len(), set.exact));
    let img = point_image(&f, &origin, 256, 1e-3);
    let (s, r) = (spread(&img), covering_radius(&img));
    b.check("value_set_is_cp1", s > 0.99 && r < 0.25, format!("{} samples, spread {s:.4}, covering radius {r:.4}", img.len()));
    let regular = Point::from_affine(&[c(0.5, 0.0), c(1.0 / 3.0, 0.0)], 0);
    let single = point_image(&f, &regular, 256, 1e-3);
    b.check("regular_value_is_a_point", single.len() == 1, format!("{} value(s) at (1/2, 1/3)", single.len()));
    Ok(())
}

fn example2(b: &mut Bundle, run: &RunConfig) -> Result<()> {
    let f = ratio();
    let disc = CompactRegion::unit_polydisc(2);
    let g: Compiled = Compiled::from_map(&f, 0);
    let origin = vec![c(0.0, 0.0); 2];
    let opts = SampleOptions { own_indeterminacy: vec![origin.clone()], ..SampleOptions::default() };
    let cloud = sample_graph(&g, &disc, run.samples.unwrap_or(10_000), run.seed.unwrap_or(0), &opts)?;
    // (z, [w0 : w1]) lies on the graph iff z1 w0 - z2 w1 = 0
    let residual = cloud
        .points
        .iter()
        .map(|p| {
            let w = p.target.factors[0].coords();
            let z = &p.source;
            (z[0] * w[0] - z[1] * w[1]).norm() / (z[0].norm() + z[1].norm()) / (w[0].norm() + w[1].norm())
        })
        .fold(0.0, f64::max);
    b.check("incidence_relation", residual < 1e-12, format!("max residual {residual:.3e} over {} samples", cloud.points.len()));
    let fiber = point_image(&f, &ProjectivePoint::coordinate(2, 0), 256, 1e-3);
    let r = covering_radius(&fiber);
    b.check("exceptional_fiber_is_cp1", r < 0.25, format!("covering radius {r:.4} of the fiber over 0"));
    let vo = VolumeOptions { focus: vec![origin.clone()], indeterminacy: vec![origin], ..VolumeOptions::default() };
    let v = volume(&g, &disc, run.samples.unwrap_or(100_000), run.seed.unwrap_or(0), &vo)?;
    b.check("graph_volume_finite", v.value.is_finite() && v.stderr < 0.05 * v.value, format!("{:.4} +- {:.4}", v.value, v.stderr));
    b.files.push(("example2.volume.json".into(), v.to_json()));
    Ok(())
}

fn example4(b: &mut Bundle, run: &RunConfig) -> Result<()> {
    let mut s = scenario("blown_up_translates");
    let a = [c(0.25, 0.0), c(0.25, 0.0)];
    let off = run_notion(&Scenario { region: None, ..s.clone() }, &s.name, Notion::Weak, run)?;
    b.report("bidisc.weak", &off);
    b.check("weak_on_bidisc", off.verdict == Verdict::Converges, format!("{}", off.verdict));
    let found: Vec<&Vec<C64>> = off.exceptional_points.iter().map(|p| &p.point).collect();
    let near_a = found.len() == 1 && found[0].iter().zip(&a).all(|(x, y)| (x - y).norm() < 1e-3);
    b.check("exceptional_point_is_a", near_a, show(&found));
    let strong_code = off.diagnostics.get("strong_exit_code").copied().unwrap_or(-1.0);
    b.check("strong_fails_at_a", strong_code == 2.0, format!("strong exit code {strong_code}"));
    let gamma = run_notion(&s, &s.name, Notion::Gamma, run)?;
    b.report("bidisc.gamma", &gamma);
    let vertical = gamma.decomposition.as_ref().map_or(0, |d| d.vertical.len());
    b.check("vertical_component_over_a", gamma.verdict == Verdict::Converges && vertical == 1, format!("{}, {vertical} vertical part(s)", gamma.verdict));
    s.region = Some(crate::scenario::RegionSpec {
        shape: crate::scenario::ShapeSpec::Polydisc { center: None, radii: vec![0.125, 0.125] },
        chart: 0,
        exclude: Vec::new(),
    });
    let d = run_notion(&s, &s.name, Notion::Strong, run)?;
    b.report("small_bidisc.strong", &d);
    verdict_check(b, "strong_on_bidisc_avoiding_a", &d, Verdict::Converges);
    Ok(())
}

fn cremona(b: &mut Bundle, run: &RunConfig) -> Result<()> {
    let f = RationalMap::cremona();
    let two = f.iterate(2, DEFAULT_BIT_BUDGET)?;
    b.check("square_is_identity", two.map.projectively_equal(&RationalMap::identity(2)), format!("f^2 = {}", two.map));
    let eight = f.iterate(8, DEFAULT_BIT_BUDGET)?;
    b.check("degree_trace", eight.degree_trace == [2, 1, 2, 1, 2, 1, 2, 1], format!("{:?}", eight.degree_trace));
    let set = indeterminacy_locus(&f)?;
    let coords: Vec<ProjectivePoint> = (0..3).map(|i| ProjectivePoint::coordinate(2, i)).collect();
    let all = set.len() == 3 && set.exact && coords.iter().all(|p| set.contains(p, 0.0));
    b.check("indeterminacy_exact", all, format!("{} point(s), exact = {}", set.len(), set.exact));
    let worst = coords.iter().map(|p| f.residual(p.cast::<f64>().coords())).fold(0.0, f64::max);
    b.check("indeterminacy_numeric", worst < 1e-8, format!("max residual {worst:.3e}"));

    let s = scenario("cremona_iterates");
    let strong = run_notion(&s, &s.name, Notion::Strong, run)?;
    b.report("strong", &strong);
    verdict_check(b, "iterates_strong", &strong, Verdict::Converges);

    let schedule: Vec<usize> = (1..=10).map(|k| 2 * k).collect();
    let opts = FatouOptions { seed: run.seed.unwrap_or(0), ..FatouOptions::default() };
    let grid = fatou_scan(&f, &GridSpec::standard(), &schedule, &opts)?;
    b.check("fatou_full_strong", grid.strong_fraction() == 1.0, format!("{} of {} cells strongly Fatou", grid.count(CellVerdict::InPhiS), grid.cells.len()));
    let equi = fatou_scan(&f, &GridSpec::standard(), &schedule, &FatouOptions { exclude_indeterminacy: true, ..opts })?;
    let changed_off_axes = grid
        .cells
        .iter()
        .zip(&equi.cells)
        .filter(|(x, y)| x.verdict != y.verdict && x.center.iter().all(|z| z.norm() > x.ball_radius))
        .count();
    b.check(
        "convention_changes_only_axis_cells",
        changed_off_axes == 0 && equi.count(CellVerdict::Undecided) > 0,
        format!("{} cells excluded, {changed_off_axes} changed off the axes", equi.count(CellVerdict::Undecided)),
    );
    b.files.push(("cremona.fatou.pgm".into(), grid.to_pgm()));
    b.files.push(("cremona.fatou_excluding.pgm".into(), equi.to_pgm()));
    Ok(())
}

fn nonstabilizing(b: &mut Bundle, run: &RunConfig) -> Result<()> {
    let s = scenario("nonstabilizing");
    chain(b, &s, run)?;
    let region = CompactRegion::new(0, Shape::PolyAnnulus { center: vec![c(0.0, 0.0); 2], inner: vec![0.0, 0.5], outer: vec![1.0, 1.0] });
    let r = rouche_check(&s.family(&s.name)?, &region, &s.schedule(), None, &s.options(run))?;
    b.check("rouche", r.applicable && r.limit_holomorphic_inside && r.members_holomorphic, format!("strong {} on |z2| >= 1/2, members checked {:?}", r.strong, r.checked));
    Ok(())
}

fn theorem3(b: &mut Bundle, run: &RunConfig) -> Result<()> {
    let f = RationalMap::parse(Source::Projective(2), &["z0", "2*z1", "2*z2"])?;
    let schedule: Vec<usize> = (1..=10).map(|k| 2 * k).collect();
    let opts = FatouOptions { seed: run.seed.unwrap_or(0), ..FatouOptions::default() };
    let grid = fatou_scan(&f, &GridSpec::standard(), &schedule, &opts)?;
    b.check("weak_fatou_full", grid.weak_fraction() == 1.0, format!("{} of {} cells weakly Fatou", grid.cells.iter().filter(|c| c.verdict.in_weak()).count(), grid.cells.len()));
    let p = Point::coordinate(2, 0);
    let missing: Vec<&meromap::dynamics::FatouCell> = grid.cells.iter().filter(|c| c.verdict != CellVerdict::InPhiS).collect();
    let near_p = |cell: &&meromap::dynamics::FatouCell| cell.center.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() <= cell.ball_radius;
    b.check("strong_misses_only_p", !missing.is_empty() && missing.iter().all(near_p), format!("cells not strongly Fatou: {:?}", missing.iter().map(|c| c.index).collect::<Vec<_>>()));
    b.check("degree_trace", grid.degree_trace.iter().all(|&d| d == 1), format!("{:?}", grid.degree_trace));
    let dopts = DichotomyOptions { seed: run.seed.unwrap_or(0), ..DichotomyOptions::default() };
    let d = classify_dichotomy(&f, &grid, &schedule, &dopts)?;
    b.check("exceptional_point", d.point().distance(&p) < 1e-6, format!("chordal distance {:.3e} to [1:0:0]", d.point().distance(&p)));
    let target = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    let err = d.curve.coefficients.iter().zip(&target).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    b.check("curve_is_z0", d.curve.degree == 1 && err < 1e-6, format!("degree {}, coefficient error {err:.3e}, residual {:.3e}", d.curve.degree, d.curve.residual));
    b.check("limit_collapses_p_onto_curve", d.fiber_spread > 0.5, format!("spread {:.4} of limit values around p", d.fiber_spread));
    let ratio = d.volume_ratio();
    b.check("volume_trace_bounded", ratio < 2.0, format!("max/min {ratio:.4}"));
    let z = Point::from_affine(&[c(0.3, 0.0), c(-0.2, 0.0)], 0);
    match lemma_251_check(&f, 1, &z, &grid, &opts) {
        Ok(prop) => b.check("forward_propagation", !prop.vacuous, format!("{} image(s) checked, {} skipped", prop.images.len(), prop.skipped)),
        Err(DynamicsError::PropagationViolation(why)) => b.check("forward_propagation", false, why),
        Err(e) => return Err(e.into()),
    }
    b.files.push(("theorem3.fatou.csv".into(), grid.to_csv()));
    b.files.push(("theorem3.fatou.pgm".into(), grid.to_pgm()));
    b.files.push(("theorem3.dichotomy.json".into(), d.to_json()));
    Ok(())
}

fn hartogs(b: &mut Bundle, run: &RunConfig) -> Result<()> {
    let s = scenario("nonstabilizing");
    let r = hartogs_propagation(&s.family(&s.name)?, 0.25, &s.schedule(), &s.options(run))?;
    b.report("figure.strong", &r.hartogs);
    b.report("bidisc.weak", &r.bidisc);
    verdict_check(b, "strong_on_figure", &r.hartogs, Verdict::Converges);
    verdict_check(b, "propagated_to_bidisc", &r.bidisc, Verdict::Converges);
    let pts: Vec<&Vec<C64>> = r.bidisc.exceptional_points.iter().map(|p| &p.point).collect();
    let ok = pts.len() == 1 && pts[0].iter().all(|z| z.norm() < 1e-3);
    b.check("one_exceptional_point_at_origin", ok, show(&pts));
    Ok(())
}

fn volume_bound(b: &mut Bundle, run: &RunConfig) -> Result<()> {
    let s = scenario("separated_pole");
    let strong = run_notion(&s, &s.name, Notion::Strong, run)?;
    b.report("figure.strong", &strong);
    verdict_check(b, "equicontinuous_on_figure", &strong, Verdict::Converges);
    let fam = s.family(&s.name)?;
    let rho = CompactRegion::polydisc(vec![c(0.0, 0.0); 2], vec![0.9, 0.9]);
    let mut values = Vec::new();
    let mut csv = String::from("n,volume,stderr\n");
    for &n in &s.schedule() {
        let m = fam.instantiate_map(n as i64)?;
        let pole = vec![c(0.5, 0.0), c(1.0 / n as f64, 0.0)];
        let vo = VolumeOptions { focus: vec![pole.clone()], indeterminacy: vec![pole], ..VolumeOptions::default() };
        let v = volume(&Compiled::from_map(&m, 0), &rho, run.samples.unwrap_or(20_000), run.seed.unwrap_or(0), &vo)?;
        csv.push_str(&format!("{n},{:.12e},{:.12e}\n", v.value, v.stderr));
        values.push(v.value);
    }
    let (lo, hi) = (values.iter().copied().fold(f64::INFINITY, f64::min), values.iter().copied().fold(0.0, f64::max));
    b.check("volumes_uniformly_bounded", hi.is_finite() && hi / lo < 2.0, format!("volumes in [{lo:.4}, {hi:.4}] on the bidisc of radius 0.9"));
    let last = fam.instantiate_map(*s.schedule().last().expect("nonempty") as i64)?;
    let grid: Vec<C64> = (0..9).map(|k| c(-0.8 + 0.2 * k as f64, 0.0)).collect();
    let mu = marginal_mass(&Compiled::from_map(&last, 0), &rho, &grid, 4000, run.seed.unwrap_or(0))?;
    let in_range = mu.iter().all(|(_, m)| *m > 0.0 && *m <= std::f64::consts::PI * (1.0 + 1e-2));
    b.check("fiber_mass_within_cp1_area", in_range, format!("{} fibers, max {:.4}", mu.len(), mu.iter().map(|t| t.1).fold(0.0, f64::max)));
    b.files.push(("volume_bound.volumes.csv".into(), csv));
    b.files.push(("volume_bound.marginal.csv".into(), marginal_mass_csv(&mu)));
    Ok(())
}
