// Diameter and area profile of contours placed on the analytic surface of
// a fusiform aneurysm, written as CSV.
//
// ```text
// cargo run --release --example measurement -- [profile.csv]
// ```

use std::path::Path;

use aneu::centerline::Centerline;
use aneu::contour::{ContourStack, RadialContour};
use aneu::measure::{size_profile, SizeProfile};
use aneu::phantom::PhantomSpec;

pub fn run_example(csv: &Path) -> aneu::Result<SizeProfile> {
    let spec = PhantomSpec::default();
    let length = spec.axis.length();
    let n = (length / 2.0) as usize + 1;
    let points = (0..n).map(|i| spec.axis.point(2.0 * i as f64)).collect();
    let cl = Centerline::from_points(points, 2.0)?;
    let contours = (0..n)
        .map(|i| {
            let r = spec.outer_radius.at(2.0 * i as f64);
            let f = cl.frames[i];
            RadialContour::circle(cl.points[i], f.u, f.v, 72, r)
        })
        .collect();
    let stack = ContourStack::new(contours)?;
    let profile = size_profile(&stack, &cl)?;
    let file = std::fs::File::create(csv).map_err(|e| aneu::Error::io(csv, e))?;
    profile
        .write_csv(file)
        .map_err(|e| aneu::Error::format("csv", e.to_string()))?;

    let (r, t) = spec.outer_radius.max_on(length);
    println!("analytic maximum: D = {:.2} mm at {:.1} mm", 2.0 * r, t);
    println!(
        "measured: D_max = {:.2} mm at slice {} ({:.1} mm), A_max = {:.1} mm2",
        profile.d_max_mm, profile.d_max_slice, profile.d_max_arc_length_mm, profile.a_max_mm2
    );
    Ok(profile)
}

#[allow(dead_code)]
fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "size_profile.csv".into());
    if let Err(e) = run_example(Path::new(&out)) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
