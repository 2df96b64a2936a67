//! Composing, inverting and interpolating linac gauge elements.

use std::sync::Arc;

use natcalib::{compose, evaluate_curve, identity, inverse, GaugeGroupSpec, GroupCurve, GroupElement};

fn main() -> natcalib::Result<()> {
    let spec = Arc::new(GaugeGroupSpec::linac());
    let g = GroupElement::new(Arc::clone(&spec), vec![3.0, 0.02, 0.01, 0.1])?;
    let h = GroupElement::new(Arc::clone(&spec), vec![3.5, -0.01, 0.0, -0.05])?;

    let gh = compose(&g, &h)?;
    println!("factors      {:?}", spec.names());
    println!("g            {:?}", g.coords());
    println!("h            {:?}", h.coords());
    println!("gh           {:?}  (phi wrapped into [0, 2pi))", gh.coords());
    println!("gh == hg     {}", gh == compose(&h, &g)?);
    println!("g g^-1 == e  {}", compose(&g, &inverse(&g)?)?.is_identity());

    // circle factors interpolate along the shorter arc
    let curve = GroupCurve::new(vec![(0.0, g.clone()), (1.0, h.clone())])?;
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("curve({t:.2})  {:?}", evaluate_curve(&curve, t)?.signed_coords());
    }
    println!("identity     {:?}", identity(&spec).coords());
    Ok(())
}
