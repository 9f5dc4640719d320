//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Tolerances and time budgets are fixed here rather than taken from the
//! library defaults, so that a change of default cannot quietly loosen a
//! criterion.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{anyhow, ensure, Result};
use meromap::converge::{
    rouche_check, series_convergence_def1, spherical_convergence_def2, ConvergenceReport, Notion, RatFun, Verdict,
};
use meromap::exactalg::{GaussianRational, HomoPoly, Monomial};
use meromap::graphgeom::{
    fs_distance, hausdorff, hausdorff_brute, volume, CompactRegion, GraphCloud, GraphPoint, MetricSpec, VolumeOptions,
};
use meromap::meromap::{
    indeterminacy_locus, indeterminacy_numeric, IndetConfig, ProjectivePoint, RationalMap, Source, TargetPoint,
    DEFAULT_BIT_BUDGET,
};
use meromap::parallel::with_workers;
use meromap::Compiled;
use meromap_cli::commands::{notion_tag, run_notion};
use meromap_cli::reproduce::{reproduce, scenario, Bundle, CATALOGUE, SCENARIOS};
use meromap_cli::scenario::{RegionSpec, RunConfig, Scenario, ShapeSpec};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const HAUSDORFF_TOL: f64 = 2e-2;
const RESIDUAL_TOL: f64 = 1e-8;
const HARTOGS_POINT_TOL: f64 = 1e-3;
const CURVE_TOL: f64 = 1e-6;
const VOLUME_SIGMAS: f64 = 3.0;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn last_below(r: &ConvergenceReport, n: usize, tol: f64) -> bool {
    r.distance_trace.iter().any(|&(m, d)| m <= n && d < tol)
}

fn c1_cremona_involution() -> Result<String> {
    let f = RationalMap::cremona();
    let two = f.iterate(2, DEFAULT_BIT_BUDGET)?;
    ensure!(two.map == RationalMap::identity(2), "f^2 = {}", two.map);
    ensure!(two.degree_trace == [2, 1], "degree trace {:?}", two.degree_trace);
    Ok(format!("f^2 = {}, degree trace {:?}", two.map, two.degree_trace))
}

fn c2_cremona_indeterminacy() -> Result<String> {
    let f = RationalMap::cremona();
    let want: Vec<ProjectivePoint> = (0..3).map(|i| ProjectivePoint::coordinate(2, i)).collect();
    let exact = indeterminacy_locus(&f)?;
    ensure!(exact.exact && exact.len() == 3, "exact path: {} points, exact = {}", exact.len(), exact.exact);
    ensure!(want.iter().all(|p| exact.contains(p, 0.0)), "exact path misses a coordinate point");
    let numeric = indeterminacy_numeric(&f, &IndetConfig::default())?;
    ensure!(numeric.len() == 3, "numeric path found {} points", numeric.len());
    let worst_residual = numeric.points.iter().map(|p| f.residual(p.coords())).fold(0.0, f64::max);
    let worst_distance = want
        .iter()
        .map(|p| numeric.points.iter().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    ensure!(worst_residual < RESIDUAL_TOL && worst_distance < RESIDUAL_TOL, "residual {worst_residual:.2e}, distance {worst_distance:.2e}");
    Ok(format!("exact {{[1:0:0],[0:1:0],[0:0:1]}}, numeric residual {worst_residual:.1e}"))
}

fn c3_volume_oracles() -> Result<String> {
    let id = RationalMap::parse(Source::Affine(1), &["z1", "z0"])?;
    let v = volume(&Compiled::from_map(&id, 0), &CompactRegion::unit_polydisc(1), 100_000, 0, &VolumeOptions::default())?;
    let pull = v.breakdown.pure;
    ensure!((pull - PI / 2.0).abs() < VOLUME_SIGMAS * v.pullback_stderr, "identity pullback {pull} +- {}", v.pullback_stderr);
    let constant = RationalMap::parse(Source::Affine(2), &["z0", "2*z0"])?;
    let w = volume(&Compiled::from_map(&constant, 0), &CompactRegion::unit_polydisc(2), 100_000, 0, &VolumeOptions::default())?;
    ensure!(w.pullback() == 0.0, "constant map has pullback {}", w.pullback());
    ensure!((w.value - PI * PI).abs() < VOLUME_SIGMAS * w.stderr + 1e-9, "constant map volume {} +- {}", w.value, w.stderr);
    Ok(format!("pi/2 vs {pull:.5} +- {:.5}; pi^2 vs {:.9}", v.pullback_stderr, w.value))
}

fn c4_taxonomy(run: &RunConfig) -> Result<String> {
    let s = scenario("one_over_z_minus");
    let fam = s.family(&s.name)?;
    let opts = s.options(run);
    let seq = RatFun::sequence(&fam, &s.schedule())?;
    for (center, radius) in [(0.0, 1.0), (0.0, 0.1), (0.05, 0.1), (-0.3, 0.5)] {
        let r = series_convergence_def1(&seq, c(center), radius, &opts);
        ensure!(r.verdict == Verdict::Diverges, "def1 on D({center}, {radius}) is {}", r.verdict);
    }
    let def2 = spherical_convergence_def2(&seq, c(0.0), 1.0, &opts);
    ensure!(def2.verdict == Verdict::Converges, "def2 is {}", def2.verdict);
    ensure!(last_below(&def2, 200, HAUSDORFF_TOL), "def2 trace {:?}", def2.distance_trace);
    let strong = run_notion(&s, &s.name, Notion::Strong, run)?;
    ensure!(strong.verdict == Verdict::Converges, "strong is {}", strong.verdict);
    ensure!(last_below(&strong, 200, HAUSDORFF_TOL), "strong trace {:?}", strong.distance_trace);
    Ok(format!("def1 diverges on 4 discs around 0, def2 and strong converge, strong trace {:?}", strong.distance_trace.last()))
}

fn c5_strong_without_stabilization(run: &RunConfig) -> Result<String> {
    let s = scenario("nonstabilizing");
    let strong = run_notion(&s, &s.name, Notion::Strong, run)?;
    let stab = run_notion(&s, &s.name, Notion::Stabilized, run)?;
    ensure!(strong.verdict == Verdict::Converges && stab.verdict == Verdict::Diverges, "strong {}, stabilized {}", strong.verdict, stab.verdict);
    Ok("strong converges, stabilized diverges".into())
}

fn c6_rouche(run: &RunConfig) -> Result<String> {
    let mut cases: Vec<(String, Scenario)> = Vec::new();
    for (name, _) in SCENARIOS {
        let s = scenario(name);
        if s.expected(Notion::Strong) == Some(Verdict::Converges) {
            cases.push((name.to_string(), s));
        }
    }
    let mut annulus = scenario("nonstabilizing");
    annulus.region = Some(RegionSpec {
        shape: ShapeSpec::Annulus { center: vec![[0.0, 0.0]; 2], inner: vec![0.0, 0.5], outer: vec![1.0, 1.0] },
        chart: 0,
        exclude: Vec::new(),
    });
    cases.push(("nonstabilizing on |z2| >= 1/2".into(), annulus));
    let mut small = scenario("blown_up_translates");
    small.region = Some(RegionSpec {
        shape: ShapeSpec::Polydisc { center: None, radii: vec![0.125, 0.125] },
        chart: 0,
        exclude: Vec::new(),
    });
    cases.push(("blown_up_translates on the bidisc of radius 1/8".into(), small));
    let mut names = Vec::new();
    for (name, s) in &cases {
        let r = rouche_check(&s.family(&s.name)?, &s.region(&s.name)?, &s.schedule(), s.limit(&s.name)?.as_ref(), &s.options(run))
            .map_err(|e| anyhow!("{name}: {e}"))?;
        ensure!(r.applicable, "{name}: not strongly convergent ({})", r.strong);
        names.push(name.as_str());
    }
    let annulus = cases.iter().find(|(n, _)| n.contains("|z2|")).map(|(_, s)| s).expect("listed");
    let r = rouche_check(&annulus.family(&annulus.name)?, &annulus.region(&annulus.name)?, &annulus.schedule(), None, &annulus.options(run))?;
    ensure!(r.limit_holomorphic_inside && r.members_holomorphic, "annulus: limit {} members {}", r.limit_holomorphic_inside, r.members_holomorphic);
    Ok(format!("no violation on {} regions: {}", names.len(), names.join(", ")))
}

fn c7_hartogs(run: &RunConfig) -> Result<String> {
    let b = reproduce("hartogs", run)?;
    ensure!(b.passed, "{}", failures(&b));
    let (_, report) = b.files.iter().find(|(n, _)| n.ends_with("bidisc.weak.json")).ok_or_else(|| anyhow!("no bidisc report"))?;
    let report: serde_json::Value = serde_json::from_str(report)?;
    let points = report["exceptional_points"].as_array().ok_or_else(|| anyhow!("no exceptional points"))?;
    ensure!(points.len() == 1, "{} exceptional points", points.len());
    let coords = points[0]["point"].as_array().ok_or_else(|| anyhow!("malformed point"))?;
    let dist = coords.iter().map(|z| z[0].as_f64().unwrap_or(f64::NAN).hypot(z[1].as_f64().unwrap_or(f64::NAN)).powi(2)).sum::<f64>().sqrt();
    ensure!(dist < HARTOGS_POINT_TOL, "exceptional point at distance {dist} from (0,0)");
    Ok(format!("one exceptional point, {dist:.1e} from (0,0)"))
}

fn c8_theorem3(run: &RunConfig) -> Result<String> {
    let b = reproduce("theorem3", run)?;
    ensure!(b.passed, "{}", failures(&b));
    let detail = |n: &str| b.checks.iter().find(|c| c.name == n).map(|c| c.detail.clone()).unwrap_or_default();
    let coeffs = detail("curve_is_z0");
    let (_, report) = b.files.iter().find(|(n, _)| n.ends_with("dichotomy.json")).ok_or_else(|| anyhow!("no dichotomy report"))?;
    let report: serde_json::Value = serde_json::from_str(report)?;
    let curve = &report["curve"];
    ensure!(curve["degree"] == 1, "curve degree {}", curve["degree"]);
    let monomials = curve["monomials"].as_array().ok_or_else(|| anyhow!("no monomials"))?;
    for (m, k) in monomials.iter().zip(curve["coefficients"].as_array().ok_or_else(|| anyhow!("no coefficients"))?) {
        let want = if m == &serde_json::json!([1, 0, 0]) { 1.0 } else { 0.0 };
        let (re, im) = (k[0].as_f64().unwrap_or(f64::NAN), k[1].as_f64().unwrap_or(f64::NAN));
        ensure!((re - want).hypot(im) < CURVE_TOL, "coefficient of {m} is {re}+{im}i");
    }
    Ok(format!("{}; {}; {}; volume {}", detail("weak_fatou_full"), detail("strong_misses_only_p"), coeffs, detail("volume_trace_bounded")))
}

fn failures(b: &Bundle) -> String {
    b.checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ")
}

fn c9_implication_chain(run: &RunConfig) -> Result<String> {
    let order = [Notion::Stabilized, Notion::Strong, Notion::Weak, Notion::Gamma];
    let mut rows = Vec::new();
    for (name, _) in SCENARIOS {
        let s = scenario(name);
        let mut verdicts = Vec::new();
        for n in order {
            let r = run_notion(&s, &s.name, n, run)?;
            if let Some(want) = s.expected(n) {
                ensure!(r.verdict == want, "{name} {}: {} (expected {want})", notion_tag(n), r.verdict);
            }
            verdicts.push(r.verdict);
        }
        for w in verdicts.windows(2) {
            ensure!(!(w[0] == Verdict::Converges && w[1] != Verdict::Converges), "{name}: inversion in {verdicts:?}");
        }
        let tags: Vec<&str> = verdicts.iter().map(|v| &v.as_str()[..1]).collect();
        rows.push(format!("{name} {}", tags.join("")));
    }
    Ok(format!("stabilized/strong/weak/gamma: {}", rows.join(", ")))
}

fn coeff() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -3i64..=3, 1i64..=3).prop_map(|(a, b, c, d)| {
        &GaussianRational::from_ratio(a, b) + &(&GaussianRational::from_ratio(c, d) * &GaussianRational::i())
    })
}

fn homo(d: u32) -> impl Strategy<Value = HomoPoly> {
    let mons: Vec<Vec<u32>> = (0..=d).flat_map(|i| (0..=d - i).map(move |j| vec![i, j, d - i - j])).collect();
    let n = mons.len();
    proptest::collection::vec((0..n, coeff()), 1..=4)
        .prop_map(move |picks| HomoPoly::from_terms(3, Some(d), picks.into_iter().map(|(i, c)| (Monomial::new(mons[i].clone()), c))).unwrap())
        .prop_filter("nonzero", |p| !p.is_zero())
}

fn proj(n: usize) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b)), n)
        .prop_filter("nonzero", |v| v.iter().any(|z| z.norm() > 1e-3))
}

fn cloud() -> impl Strategy<Value = GraphCloud> {
    let point = (proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2), proj(2)).prop_map(|(s, t)| GraphPoint {
        source: s.into_iter().map(|(a, b)| C64::new(a, b)).collect(),
        target: TargetPoint::single(ProjectivePoint::new(t).unwrap()),
    });
    proptest::collection::vec(point, 1..40).prop_map(|points| GraphCloud {
        points,
        region: CompactRegion::unit_polydisc(2),
        metric: MetricSpec::default(),
        map_id: "random".into(),
        seed: 0,
    })
}

fn runner(cases: u32) -> TestRunner {
    let cfg = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn c10_property_suites() -> Result<String> {
    runner(10_000)
        .run(&(proj(3), proj(3), proj(3)), |(a, b, c)| {
            let (ab, bc, ac) = (fs_distance(&a, &b), fs_distance(&b, &c), fs_distance(&a, &c));
            prop_assert!((0.0..=1.0).contains(&ab) && ab == fs_distance(&b, &a) && fs_distance(&a, &a) < 1e-15);
            prop_assert!(ac <= ab + bc + 1e-12);
            Ok(())
        })
        .map_err(|e| anyhow!("FS metric: {e}"))?;
    runner(1000)
        .run(&(homo(2), homo(2), homo(1)), |(a, b, c)| {
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().mul(&c).unwrap(), a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap());
            prop_assert!(a.sub(&a).unwrap().is_zero());
            Ok(())
        })
        .map_err(|e| anyhow!("ring axioms: {e}"))?;
    runner(1000)
        .run(&(homo(1), homo(1), homo(2)), |(g, a, b)| {
            let (p, q) = (g.mul(&a).unwrap(), g.mul(&b).unwrap());
            let d = p.gcd(&q).unwrap();
            prop_assert!(p.div_exact(&d).is_some() && q.div_exact(&d).is_some() && d.div_exact(&g).is_some());
            Ok(())
        })
        .map_err(|e| anyhow!("gcd: {e}"))?;
    runner(200)
        .run(&(cloud(), cloud(), cloud()), |(a, b, c)| {
            let ab = hausdorff(&a, &b).unwrap();
            prop_assert_eq!(ab, hausdorff_brute(&a, &b).unwrap());
            prop_assert_eq!(ab, hausdorff(&b, &a).unwrap());
            prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
            prop_assert!(ab <= hausdorff(&a, &c).unwrap() + hausdorff(&c, &b).unwrap() + 1e-9);
            Ok(())
        })
        .map_err(|e| anyhow!("Hausdorff: {e}"))?;
    Ok("10^4 FS triples, 10^3 ring and 10^3 gcd cases, 200 cloud triples".into())
}

fn bundle_files(b: &Bundle) -> Vec<(String, String)> {
    let mut files = vec![(format!("{}.bundle.json", b.id), b.to_json())];
    files.extend(b.files.iter().cloned());
    files
}

fn c11_reproducibility(run: &RunConfig) -> Result<String> {
    let dir = tempfile::tempdir()?;
    let mut compared = 0;
    for (id, _) in CATALOGUE {
        let one = with_workers(Some(1), || reproduce(id, run))?;
        let three = with_workers(Some(3), || reproduce(id, run))?;
        let (a, b) = (bundle_files(&one), bundle_files(&three));
        ensure!(a == b, "{id}: reports differ between 1 and 3 workers");
        let status = Command::new(env!("CARGO_BIN_EXE_meromap"))
            .args(["reproduce", id, "--out"])
            .arg(dir.path())
            .env("MEROMAP_WORKERS", "2")
            .output()?;
        ensure!(status.status.success(), "{id}: separate run exited {:?}", status.status.code());
        for (name, body) in &a {
            let written = std::fs::read_to_string(dir.path().join(name))?;
            ensure!(&written == body, "{id}: {name} differs in a separate run");
            compared += 1;
        }
    }
    Ok(format!("{compared} files identical across 1, 2 and 3 workers and separate processes"))
}

type Criterion<'a> = (u32, &'a str, Duration, Box<dyn Fn() -> Result<String> + 'a>);

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let run = RunConfig::default();
    let run = &run;
    let criteria: Vec<Criterion> = vec![
        (1, "Cremona involution", secs(1), Box::new(c1_cremona_involution)),
        (2, "Cremona indeterminacy", secs(1), Box::new(c2_cremona_indeterminacy)),
        (3, "volume oracles", secs(20), Box::new(c3_volume_oracles)),
        (4, "convergence taxonomy on 1/(z - 1/n)", secs(30), Box::new(move || c4_taxonomy(run))),
        (5, "strong without stabilization", secs(30), Box::new(move || c5_strong_without_stabilization(run))),
        (6, "Rouche principle", secs(30), Box::new(move || c6_rouche(run))),
        (7, "Hartogs propagation", secs(60), Box::new(move || c7_hartogs(run))),
        (8, "[z0 : 2z1 : 2z2] dichotomy", secs(120), Box::new(move || c8_theorem3(run))),
        (9, "implication chain", secs(600), Box::new(move || c9_implication_chain(run))),
        (10, "property suites", secs(60), Box::new(c10_property_suites)),
        (11, "reproducibility", secs(900), Box::new(move || c11_reproducibility(run))),
    ];
    let mut failed = 0;
    for (n, what, budget, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("over the {}s budget; {d}", budget.as_secs())),
            Err(e) => (false, format!("{e:#}")),
        };
        failed += usize::from(!ok);
        println!("criterion {n:>2} {} {what} ({:.1}s): {detail}", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    }
    println!("acceptance: {} of 11 criteria pass", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
