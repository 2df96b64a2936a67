//! The end-to-end linac plan check, with and without detector noise.

use natcalib::scenario::build_plan;
use natcalib::{run_scenario, ScenarioConfig};

fn main() -> natcalib::Result<()> {
    let base = ScenarioConfig::default();
    let peak = build_plan(&base)?.max();
    for sigma in [0.0, 0.005 * peak, 0.01 * peak] {
        let r = run_scenario(&ScenarioConfig { noise_sigma: sigma, seed: 7, ..base.clone() })?;
        println!("noise sigma {sigma:.4}: pass {}", r.pass);
        for c in &r.checks {
            println!(
                "  {:<4} injected {:+.4}  correction {:+.4}  recovered {:+.4}  |err| {:.5} / {:.5}",
                c.factor,
                c.injected,
                c.expected_correction,
                c.recovered_correction,
                c.error.abs(),
                c.tolerance
            );
        }
        println!(
            "  d_nat quadratic {:.5}  general {:.5}  linear {:+.5} (abs {:.5})",
            r.d_nat.quadratic, r.d_nat.general_norm_k2, r.d_nat.linear_example, r.d_nat.linear_example_abs
        );
    }

    let dose_weighted = ScenarioConfig { weights: vec![0.1, 0.1, 0.1, 0.7], ..base };
    println!("intensity-weighted d_nat {:.5}", run_scenario(&dose_weighted)?.alignment.d_nat);
    Ok(())
}
