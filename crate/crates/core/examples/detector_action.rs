//! How gauge elements move a plan on each detector geometry.

use std::f64::consts::TAU;
use std::sync::Arc;

use natcalib::{action_defect, apply, generate_gaussian_plan, ActionBinding, DetectorGeometry, GaugeGroupSpec, GaussianSpot, GroupElement};

fn main() -> natcalib::Result<()> {
    let spec = Arc::new(GaugeGroupSpec::linac());
    let binding = ActionBinding::linac();
    let spots = [
        GaussianSpot { phi: 1.0, z: 0.45, amplitude: 1.0, width: 0.08 },
        GaussianSpot { phi: 4.0, z: 0.6, amplitude: 0.5, width: 0.1 },
        GaussianSpot { phi: 0.1, z: 0.5, amplitude: 0.8, width: 0.06 },
    ];
    let g = GroupElement::new(Arc::clone(&spec), vec![0.2, 0.05, 0.02, 0.1])?;

    for geo in [
        DetectorGeometry::cylinder(64, 64, 1.0),
        DetectorGeometry::Plane { n_x: 64, n_y: 64, width: 1.0, height: 1.0 },
        DetectorGeometry::line(64, 1.0),
        DetectorGeometry::Point,
    ] {
        let plan = generate_gaussian_plan(&geo, &spots)?;
        let moved = apply(&g, &plan, &binding)?;
        let total = |v: &[f64]| v.iter().sum::<f64>();
        println!(
            "{:<60} dose {:>10.4} -> {:>10.4}",
            format!("{geo:?}"),
            total(plan.values()),
            total(moved.values())
        );
    }

    // the pixel action is a homomorphism up to interpolation error
    let geo = DetectorGeometry::cylinder(64, 64, 1.0);
    let plan = generate_gaussian_plan(&geo, &spots)?;
    let h = GroupElement::new(Arc::clone(&spec), vec![0.3, -0.02, -0.01, 0.0])?;
    println!("composition defect      {:.2e}", action_defect(&g, &h, &plan, &binding)?);
    let k = GroupElement::new(Arc::clone(&spec), vec![TAU * 5.0 / 64.0, 0.0, 0.0, 0.3])?;
    println!("integer-shift defect    {:.2e}", action_defect(&k, &k, &plan, &binding)?);
    Ok(())
}
