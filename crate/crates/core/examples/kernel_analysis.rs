//! Which linac gauges each detector can see, and the catalog of detector types.

use std::sync::Arc;

use natcalib::kernel::{compute_kernel_analytic, compute_kernel_default};
use natcalib::{enumerate_detector_types, ActionBinding, DetectorGeometry, GaugeGroupSpec};

fn main() -> natcalib::Result<()> {
    let spec = Arc::new(GaugeGroupSpec::linac());
    let binding = ActionBinding::linac();
    for geo in [DetectorGeometry::cylinder(64, 64, 1.0), DetectorGeometry::line(64, 1.0), DetectorGeometry::Point] {
        let numeric = compute_kernel_default(&spec, &binding, &geo)?;
        let analytic = compute_kernel_analytic(&spec, &binding, &geo)?;
        println!(
            "{:<10} kernel {:?} rank {} indistinguishable {:?} (analytic agrees: {})",
            format!("{geo:?}").split_whitespace().next().unwrap_or(""),
            numeric.kernel_factors,
            numeric.rank,
            numeric.indistinguishable_groups,
            analytic.kernel_factors == numeric.kernel_factors
        );
    }

    println!();
    for t in enumerate_detector_types(&spec)?.entries {
        println!("kernel {:<22} sees {:?}", format!("{:?}", t.normal_subgroup), t.visible_quotient);
    }
    Ok(())
}
