use meromap::graphgeom::{fs_distance, hausdorff, hausdorff_brute, CompactRegion, GraphCloud, GraphPoint, MetricSpec};
use meromap::meromap::{ProjectivePoint, TargetPoint};
use num_complex::Complex;
use proptest::prelude::*;

type C = Complex<f64>;

fn c() -> impl Strategy<Value = C> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C::new(a, b))
}

fn proj(n: usize) -> impl Strategy<Value = Vec<C>> {
    proptest::collection::vec(c(), n).prop_filter("nonzero", |v| v.iter().any(|z| z.norm() > 1e-3))
}

/// Points of `CP^n` including ones lying near each other, where the
/// chordal formula is most likely to lose precision.
fn triple(n: usize) -> impl Strategy<Value = (Vec<C>, Vec<C>, Vec<C>)> {
    (proj(n), proj(n), proj(n), 0u8..3, -1e-6..1e-6f64).prop_map(|(a, b, c, mode, eps)| match mode {
        0 => (a, b, c),
        1 => {
            let near: Vec<C> = a.iter().map(|z| z + eps).collect();
            (a, near, c)
        }
        _ => {
            let lam = C::new(0.7, -1.3);
            let same: Vec<C> = a.iter().map(|z| z * lam).collect();
            (a, same, c)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn fs_distance_is_a_metric_on_projective_space((a, b, c) in triple(3)) {
        let (ab, ba, bc, ac) = (fs_distance(&a, &b), fs_distance(&b, &a), fs_distance(&b, &c), fs_distance(&a, &c));
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, ba);
        prop_assert!(fs_distance(&a, &a) < 1e-15);
        prop_assert!(ac <= ab + bc + 1e-12, "{} > {} + {}", ac, ab, bc);
        let lam = C::new(-0.4, 2.5);
        let scaled: Vec<C> = a.iter().map(|z| z * lam).collect();
        prop_assert!((fs_distance(&scaled, &c) - ac).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn single_precision_agrees_with_double((a, b, _) in triple(2)) {
        let lo = |v: &[C]| v.iter().map(|z| Complex::new(z.re as f32, z.im as f32)).collect::<Vec<_>>();
        let d32 = fs_distance(&lo(&a), &lo(&b));
        prop_assert!((0.0..=1.0).contains(&d32));
        prop_assert!((d32 as f64 - fs_distance(&a, &b)).abs() < 1e-3);
    }
}

fn graph_point() -> impl Strategy<Value = GraphPoint> {
    (proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2), proj(2), proj(3)).prop_map(|(src, t1, t2)| GraphPoint {
        source: src.into_iter().map(|(a, b)| C::new(a, b)).collect(),
        target: TargetPoint { factors: vec![ProjectivePoint::new(t1).unwrap(), ProjectivePoint::new(t2).unwrap()] },
    })
}

fn cloud(scale: f64) -> impl Strategy<Value = GraphCloud> {
    proptest::collection::vec(graph_point(), 1..60).prop_map(move |points| GraphCloud {
        points,
        region: CompactRegion::unit_polydisc(2),
        metric: MetricSpec::scaled(scale),
        map_id: "random".into(),
        seed: 0,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn hausdorff_is_a_metric_on_clouds(a in cloud(1.0), b in cloud(1.0), c in cloud(1.0)) {
        let ab = hausdorff(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff(&b, &a).unwrap());
        prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        let (ac, cb) = (hausdorff(&a, &c).unwrap(), hausdorff(&c, &b).unwrap());
        prop_assert!(ab <= ac + cb + 1e-9, "{} > {} + {}", ab, ac, cb);
    }

    #[test]
    fn pruned_search_matches_brute_force(a in cloud(0.5), b in cloud(0.5), scale in 0.1..4.0f64) {
        let rescale = |x: &GraphCloud| GraphCloud { metric: MetricSpec::scaled(scale), ..x.clone() };
        let (a, b) = (rescale(&a), rescale(&b));
        prop_assert_eq!(hausdorff(&a, &b).unwrap(), hausdorff_brute(&a, &b).unwrap());
    }

    #[test]
    fn subcloud_distance_is_the_directed_gap(a in cloud(1.0), extra in proptest::collection::vec(graph_point(), 1..10)) {
        // A is inside A + E, so the distance is how far E strays from A.
        let mut bigger = a.clone();
        bigger.points.extend(extra.iter().cloned());
        let gap = extra
            .iter()
            .map(|e| a.points.iter().map(|p| p.distance(e, &a.metric)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        prop_assert_eq!(hausdorff(&a, &bigger).unwrap(), gap);
    }
}

#[test]
fn clouds_under_different_metrics_are_rejected() {
    let p = GraphPoint {
        source: vec![C::new(0.0, 0.0)],
        target: TargetPoint::single(ProjectivePoint::new(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]).unwrap()),
    };
    let a = GraphCloud { points: vec![p], region: CompactRegion::unit_polydisc(1), metric: MetricSpec::default(), map_id: "a".into(), seed: 0 };
    let b = GraphCloud { metric: MetricSpec::scaled(2.0), ..a.clone() };
    assert!(hausdorff(&a, &b).is_err());
}
