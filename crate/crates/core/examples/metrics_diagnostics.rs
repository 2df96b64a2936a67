//! Pixel k-norms, natural distances and the stabilizer diagnostic.

use std::sync::Arc;

use natcalib::metrics::DiagnosticConfig;
use natcalib::plan::random_spot_plan;
use natcalib::{
    distance_k, generate_ring_plan, natural_distance, stabilizer_diagnostic, ActionBinding, DetectorGeometry, DistanceForm,
    GaugeGroupSpec, MetricSpec, RingBand, WeightVector,
};

fn main() -> natcalib::Result<()> {
    let geo = DetectorGeometry::cylinder(64, 64, 1.0);
    let a = random_spot_plan(&geo, 1, 5)?;
    let b = random_spot_plan(&geo, 2, 5)?;
    for m in [MetricSpec::l1(), MetricSpec::l2(), MetricSpec::new(4.0)?, MetricSpec::max()] {
        println!("d_{:<4} = {:.5}", m.k(), distance_k(&a, &b, m)?);
    }

    let y = [0.2, -0.1, 0.05, 0.3];
    let w = WeightVector::new(vec![0.1, 0.2, 0.2, 0.5])?;
    for form in [
        DistanceForm::Quadratic,
        DistanceForm::GeneralNorm { metric: MetricSpec::l2() },
        DistanceForm::LinearExample,
    ] {
        println!("{form:?}: {:.4}", natural_distance(&y, &w, form)?);
    }

    let spec = Arc::new(GaugeGroupSpec::linac());
    let ring = generate_ring_plan(&geo, &[RingBand { z: 0.5, amplitude: 1.0, width: 0.08 }])?;
    for (label, img) in [("spots", &a), ("ring", &ring)] {
        let report = stabilizer_diagnostic(img, &spec, &ActionBinding::linac(), MetricSpec::l2(), DiagnosticConfig::default())?;
        println!("{label:<6} degenerate {:?}, rank {}", report.degenerate_factors(), report.rank);
    }
    Ok(())
}
