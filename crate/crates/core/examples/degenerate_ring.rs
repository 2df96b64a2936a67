//! A rotationally symmetric plan cannot pin down phi: F has a line of minima.

use std::sync::Arc;

use natcalib::alignment::FULL_CIRCLE;
use natcalib::{
    apply, calibrate, generate_ring_plan, ActionBinding, DetectorGeometry, DistanceForm, GaugeGroupSpec, GroupElement, MetricSpec,
    ObjectiveSpec, OptimizerConfig, RingBand, WeightVector,
};

fn main() -> natcalib::Result<()> {
    let geo = DetectorGeometry::cylinder(64, 64, 1.0);
    let ring = generate_ring_plan(
        &geo,
        &[RingBand { z: 0.4, amplitude: 1.0, width: 0.06 }, RingBand { z: 0.62, amplitude: 0.6, width: 0.09 }],
    )?;
    let spec = Arc::new(GaugeGroupSpec::linac());
    let binding = ActionBinding::linac();
    let g = GroupElement::new(Arc::clone(&spec), vec![1.1, 0.04, 0.0, 0.08])?;
    let obj = ObjectiveSpec::new(
        ring.clone(),
        apply(&g, &ring, &binding)?,
        spec,
        binding,
        MetricSpec::l2(),
        vec![FULL_CIRCLE, [-0.15, 0.15], [-0.08, 0.08], [-0.3, 0.3]],
    )?;
    let r = calibrate(&obj, &OptimizerConfig::default(), &WeightVector::uniform(4), DistanceForm::Quadratic)?;
    println!("degenerate directions {:?}", r.degenerate_directions);
    for m in &r.minima_set {
        println!("  minimum at phi {:+.3}  F = {:.6}", m.coords[0], m.residual);
    }
    println!("representative: {}", r.chosen_representative_rule);
    println!("natural coords {:?}", r.natural_coords);
    Ok(())
}
