use std::f64::consts::TAU;
use std::sync::Arc;

use natcalib::group::{arc_difference, compose, evaluate_curve, identity, inverse, GaugeGroupSpec, GroupCurve, GroupElement};
use natcalib::metrics::{distance_k, natural_distance, norm_k, DistanceForm, MetricSpec, WeightVector};
use natcalib::plan::random_spot_plan;
use natcalib::{apply, ActionBinding, DetectorGeometry, Image};
use proptest::prelude::*;

fn linac() -> Arc<GaugeGroupSpec> {
    Arc::new(GaugeGroupSpec::linac())
}

fn element() -> impl Strategy<Value = GroupElement> {
    prop::array::uniform4(-10.0f64..10.0).prop_map(|c| GroupElement::new(linac(), c.to_vec()).unwrap())
}

fn close(a: &GroupElement, b: &GroupElement, tol: f64) -> bool {
    let (x, y) = (a.coords(), b.coords());
    arc_difference(x[0], y[0]).abs() <= tol && x[1..].iter().zip(&y[1..]).all(|(p, q)| (p - q).abs() <= tol)
}

fn image(geo: DetectorGeometry) -> impl Strategy<Value = Image> {
    let n = geo.pixel_count();
    prop::collection::vec(0.0f64..5.0, n).prop_map(move |v| Image::new(geo.clone(), v).unwrap())
}

fn metric() -> impl Strategy<Value = MetricSpec> {
    prop_oneof![(1.0f64..8.0).prop_map(|k| MetricSpec::new(k).unwrap()), Just(MetricSpec::max())]
}

proptest! {
    #[test]
    fn composition_is_abelian_and_associative(a in element(), b in element(), c in element()) {
        prop_assert_eq!(compose(&a, &b).unwrap(), compose(&b, &a).unwrap());
        let l = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let r = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        prop_assert!(close(&l, &r, 1e-12));
    }

    #[test]
    fn inverse_cancels(a in element()) {
        let e = identity(&linac());
        prop_assert!(close(&compose(&a, &inverse(&a).unwrap()).unwrap(), &e, 1e-12));
        prop_assert!(close(&inverse(&inverse(&a).unwrap()).unwrap(), &a, 1e-12));
    }

    #[test]
    fn curves_hit_their_knots(a in element(), b in element(), t in 0.0f64..1.0) {
        let curve = GroupCurve::new(vec![(0.0, a.clone()), (1.0, b.clone())]).unwrap();
        prop_assert!(close(&evaluate_curve(&curve, 0.0).unwrap(), &a, 1e-12));
        prop_assert!(close(&evaluate_curve(&curve, 1.0).unwrap(), &b, 1e-12));
        // the circle factor never travels more than half a turn
        let mid = evaluate_curve(&curve, t).unwrap();
        prop_assert!(arc_difference(a.coords()[0], mid.coords()[0]).abs() <= TAU / 2.0 + 1e-12);
    }

    #[test]
    fn metric_triangle_and_homogeneity(
        a in image(DetectorGeometry::cylinder(6, 5, 1.0)),
        b in image(DetectorGeometry::cylinder(6, 5, 1.0)),
        c in image(DetectorGeometry::cylinder(6, 5, 1.0)),
        m in metric(),
        lambda in 0.0f64..10.0,
    ) {
        let ab = distance_k(&a, &b, m).unwrap();
        let bc = distance_k(&b, &c, m).unwrap();
        let ac = distance_k(&a, &c, m).unwrap();
        prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12));
        prop_assert_eq!(ab, distance_k(&b, &a, m).unwrap());
        let scaled = Image::new(a.geometry().clone(), a.values().iter().map(|v| lambda * v).collect()).unwrap();
        let na = norm_k(&a, m).unwrap();
        prop_assert!((norm_k(&scaled, m).unwrap() - lambda * na).abs() <= 1e-12 * (lambda * na).max(1e-300));
    }

    #[test]
    fn nonnegative_distance_forms(y in prop::collection::vec(-4.0f64..4.0, 1..6), k in 1.0f64..6.0) {
        let w = WeightVector::uniform(y.len());
        prop_assert!(natural_distance(&y, &w, DistanceForm::Quadratic).unwrap() >= 0.0);
        let m = MetricSpec::new(k).unwrap();
        let form = DistanceForm::GeneralNorm { metric: m };
        prop_assert!(natural_distance(&y, &w, form).unwrap() >= 0.0);
        prop_assert_eq!(natural_distance(&vec![0.0; y.len()], &w, DistanceForm::Quadratic).unwrap(), 0.0);
    }

    #[test]
    fn integer_phi_shifts_permute_rows(k in 0usize..32, seed in 0u64..50) {
        let geo = DetectorGeometry::cylinder(32, 16, 1.0);
        let img = random_spot_plan(&geo, seed, 3).unwrap();
        let g = GroupElement::new(linac(), vec![TAU * k as f64 / 32.0, 0.0, 0.0, 0.0]).unwrap();
        let out = apply(&g, &img, &ActionBinding::linac()).unwrap();
        for r in 0..32 {
            for c in 0..16 {
                prop_assert_eq!(out.get((r + k) % 32, c), img.get(r, c));
            }
        }
    }

    #[test]
    fn action_preserves_nonnegativity(g in element(), seed in 0u64..50) {
        let geo = DetectorGeometry::cylinder(16, 16, 1.0);
        let img = random_spot_plan(&geo, seed, 3).unwrap();
        let g = GroupElement::new(linac(), vec![g.coords()[0], g.coords()[1] * 0.01, g.coords()[2] * 0.01, g.coords()[3] * 0.1]).unwrap();
        let out = apply(&g, &img, &ActionBinding::linac()).unwrap();
        prop_assert!(out.values().iter().all(|v| *v >= 0.0 && v.is_finite()));
    }
}
