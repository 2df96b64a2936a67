//! Inject a misalignment, calibrate, and compare against the exact inverse.

use std::sync::Arc;

use natcalib::alignment::FULL_CIRCLE;
use natcalib::plan::random_spot_plan;
use natcalib::{
    apply, brute_force_oracle, calibrate, inverse, ActionBinding, DetectorGeometry, DistanceForm, GaugeGroupSpec, GroupElement,
    MetricSpec, ObjectiveSpec, OptimizerConfig, WeightVector,
};

fn main() -> natcalib::Result<()> {
    let geo = DetectorGeometry::cylinder(64, 64, 1.0);
    let plan = random_spot_plan(&geo, 42, 8)?;
    let spec = Arc::new(GaugeGroupSpec::linac());
    let binding = ActionBinding::linac();

    let g = GroupElement::new(Arc::clone(&spec), vec![-1.3, 0.04, 0.02, -0.15])?;
    let measured = apply(&g, &plan, &binding)?;
    let bounds = vec![FULL_CIRCLE, [-0.15, 0.15], [-0.08, 0.08], [-0.3, 0.3]];
    let obj = ObjectiveSpec::new(plan.clone(), measured.clone(), Arc::clone(&spec), binding.clone(), MetricSpec::l2(), bounds)?;

    let r = calibrate(&obj, &OptimizerConfig::default(), &WeightVector::uniform(4), DistanceForm::Quadratic)?;
    println!("expected correction  {:?}", inverse(&g)?.signed_coords());
    println!("recovered            {:?}", r.natural_coords);
    println!("residual {:.4} (identity {:.2}), d_nat {:.5}, converged {}", r.residual, r.identity_residual, r.d_nat, r.converged);
    if let Some(ms) = r.elapsed_ms {
        println!("took {ms:.0} ms");
    }

    // two-factor slice against exhaustive search
    let sub = Arc::new(spec.restrict(&["phi", "z"])?);
    let g2 = GroupElement::new(Arc::clone(&sub), vec![0.6, -0.05])?;
    let obj2 = ObjectiveSpec::new(plan.clone(), apply(&g2, &plan, &binding)?, sub, binding, MetricSpec::l2(), vec![FULL_CIRCLE, [-0.15, 0.15]])?;
    let fast = calibrate(&obj2, &OptimizerConfig::default(), &WeightVector::uniform(2), DistanceForm::Quadratic)?;
    let (y, f) = brute_force_oracle(&obj2, 101)?;
    println!("phi/z slice: calibrate {:?} F={:.2e}; oracle {:?} F={:.2e}", fast.natural_coords, fast.residual, y, f);
    Ok(())
}
