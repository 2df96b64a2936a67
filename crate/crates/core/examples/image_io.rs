//! Writing and reading detector images in both file layouts.

use natcalib::image_io::{parse_image, to_csv, to_json};
use natcalib::{generate_gaussian_plan, DetectorGeometry, GaussianSpot};

fn main() -> natcalib::Result<()> {
    let geo = DetectorGeometry::cylinder(6, 4, 1.0);
    let img = generate_gaussian_plan(&geo, &[GaussianSpot { phi: 2.0, z: 0.5, amplitude: 1.0, width: 0.2 }])?;

    let csv = to_csv(&img);
    println!("{csv}");
    let json = to_json(&img);
    println!("{json}\n");

    assert_eq!(parse_image(&csv)?, img);
    assert_eq!(parse_image(&json)?, img);
    println!("both layouts round-trip exactly");
    Ok(())
}
