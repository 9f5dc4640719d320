use std::time::Instant;

use meromap::converge::{
    gamma_converge, hartogs_propagation, rouche_check, s_converge, stabilization_test, w_converge, ConvergeOptions,
    Verdict,
};
use meromap::graphgeom::{CompactRegion, Shape};
use meromap::meromap::{MapFamily, RationalMap, Source};
use num_complex::Complex64 as C;

fn moving_pole() -> MapFamily {
    MapFamily::parse(Source::Affine(1), &["z0", "z1 - {1/n}*z0"]).unwrap()
}

fn nonstabilizing() -> MapFamily {
    MapFamily::parse(Source::Affine(2), &["z1 - {1/n}*z0", "z2"]).unwrap()
}

const SCHEDULE: [usize; 7] = [10, 20, 40, 80, 120, 160, 200];

#[test]
fn moving_pole_converges_as_graphs() {
    let t = Instant::now();
    let r = s_converge(&moving_pole(), &CompactRegion::unit_polydisc(1), &SCHEDULE, None, &ConvergeOptions::default())
        .unwrap();
    eprintln!("moving pole {:?} {:?}", r.distance_trace, t.elapsed());
    assert_eq!(r.verdict, Verdict::Converges);
    assert!(r.distance_trace.last().unwrap().1 < 2e-2);
}

#[test]
fn strong_without_stabilization() {
    let t = Instant::now();
    let o = ConvergeOptions::default();
    let disc = CompactRegion::unit_polydisc(2);
    let s = s_converge(&nonstabilizing(), &disc, &SCHEDULE, None, &o).unwrap();
    eprintln!("strong {:?} {:?}", s.distance_trace, t.elapsed());
    assert_eq!(s.verdict, Verdict::Converges);
    let st = stabilization_test(&nonstabilizing(), &disc, &SCHEDULE, &o).unwrap();
    assert_eq!(st.verdict, Verdict::Diverges);
    eprintln!("total {:?}", t.elapsed());
}

#[test]
fn rouche_on_holomorphic_part() {
    let t = Instant::now();
    let region = CompactRegion::new(
        0,
        Shape::PolyAnnulus { center: vec![C::new(0.0, 0.0); 2], inner: vec![0.0, 0.5], outer: vec![1.0, 1.0] },
    );
    let r = rouche_check(&nonstabilizing(), &region, &SCHEDULE, None, &ConvergeOptions::default()).unwrap();
    eprintln!("rouche {:?} {:?}", r, t.elapsed());
    assert!(r.applicable && r.limit_holomorphic_inside && r.members_holomorphic);
}

#[test]
fn constant_family_has_zero_trace() {
    let f = RationalMap::parse(Source::Affine(2), &["z0 + z1", "z2"]).unwrap();
    let o = ConvergeOptions { samples: 2000, ..Default::default() };
    let r = s_converge(&MapFamily::constant(&f), &CompactRegion::unit_polydisc(2), &[1, 2, 3, 4, 5], None, &o).unwrap();
    assert_eq!(r.verdict, Verdict::Converges);
    assert!(r.distance_trace.iter().all(|(_, d)| *d == 0.0));
}

#[test]
fn scaling_iterates_converge_weakly() {
    let t = Instant::now();
    let f = RationalMap::parse(Source::Projective(2), &["z0", "2*z1", "2*z2"]).unwrap();
    let fam = MapFamily::iterates_of(f).unwrap();
    let schedule: Vec<usize> = (1..=10).map(|k| 2 * k).collect();
    let o = ConvergeOptions::default();
    let disc = CompactRegion::unit_polydisc(2);
    let w = w_converge(&fam, &disc, &schedule, &o).unwrap();
    eprintln!("weak {:?} {:?} {:?}", w.verdict, w.exceptional_points, t.elapsed());
    assert_eq!(w.verdict, Verdict::Converges);
    assert_eq!(w.exceptional_points.len(), 1);
    assert!(w.exceptional_points[0].point.iter().all(|c| c.norm() < 1e-3));
    assert_eq!(w.diagnostics["strong_exit_code"], 2.0);
    let g = gamma_converge(&fam, &disc, &schedule, &o).unwrap();
    eprintln!("gamma {:?} {:?} {:?} {:?}", g.verdict, g.distance_trace, g.decomposition, t.elapsed());
    assert_eq!(g.verdict, Verdict::Converges);
    assert_eq!(g.decomposition.unwrap().vertical.len(), 1);
}

/// `z -> (z1 - 1/4, z2 - 1/4, 1/n)` lifted to the blow-up of `CP^3` at the
/// origin, seen inside `CP^3 x CP^2`.
fn blown_up_translates() -> MapFamily {
    let s = |v: &[&str]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();
    MapFamily::parse_factors(
        Source::Affine(2),
        &[
            s(&["z0", "z1 - {1/4}*z0", "z2 - {1/4}*z0", "{1/n}*z0"]),
            s(&["z1 - {1/4}*z0", "z2 - {1/4}*z0", "{1/n}*z0"]),
        ],
    )
    .unwrap()
}

#[test]
fn blown_up_family_converges_weakly_off_its_center() {
    let t = Instant::now();
    let fam = blown_up_translates();
    let schedule = [400, 500, 600, 700, 800, 900, 1000];
    let disc = CompactRegion::unit_polydisc(2);
    let o = ConvergeOptions::default();
    let w = w_converge(&fam, &disc, &schedule, &o).unwrap();
    eprintln!("blow-up weak {:?} {:?} {:?}", w.verdict, w.exceptional_points, t.elapsed());
    assert_eq!(w.verdict, Verdict::Converges);
    assert_eq!(w.diagnostics["strong_exit_code"], 2.0);
    assert_eq!(w.exceptional_points.len(), 1);
    let a = &w.exceptional_points[0].point;
    assert!(a.iter().all(|c| (c - C::new(0.25, 0.0)).norm() < 1e-3));
    let g = gamma_converge(&fam, &disc, &schedule, &o).unwrap();
    eprintln!("blow-up gamma {:?} {:?} {:?} {:?}", g.verdict, g.distance_trace, g.decomposition, t.elapsed());
    let vertical = g.decomposition.unwrap().vertical;
    assert_eq!(vertical.len(), 1);
    assert!(vertical[0].fiber_diameter > o.fiber_diam_tol);
}

#[test]
fn convergence_propagates_from_the_hartogs_figure() {
    let t = Instant::now();
    let r = hartogs_propagation(&nonstabilizing(), 0.25, &SCHEDULE, &ConvergeOptions::default()).unwrap();
    eprintln!("hartogs {:?} {:?} {:?}", r.verdict, r.bidisc.exceptional_points, t.elapsed());
    assert_eq!(r.hartogs.verdict, Verdict::Converges);
    assert_eq!(r.verdict, Verdict::Converges);
    assert_eq!(r.bidisc.exceptional_points.len(), 1);
    assert!(r.bidisc.exceptional_points[0].point.iter().all(|c| c.norm() < 1e-3));
}
