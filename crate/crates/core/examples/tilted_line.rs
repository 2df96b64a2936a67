//! A line detector tilted on the cylinder sees one mixed rotation/translation
//! direction; the fitted slope recovers the tilt.

use std::sync::Arc;

use natcalib::{misaligned_line_kernel_demo, ActionBinding, DetectorGeometry, GaugeGroupSpec};

fn main() -> natcalib::Result<()> {
    let spec = Arc::new(GaugeGroupSpec::linac());
    let line = DetectorGeometry::line(64, 1.0);
    for tilt in [0.0, 0.05, 0.1, 0.3] {
        let r = misaligned_line_kernel_demo(tilt, &spec, &line, &ActionBinding::linac(), None)?;
        println!(
            "tilt {tilt:<5} kernel {:?} rank {} groups {:?}  {}",
            r.kernel.kernel_factors, r.kernel.rank, r.kernel.indistinguishable_groups, r.relation
        );
    }
    Ok(())
}
