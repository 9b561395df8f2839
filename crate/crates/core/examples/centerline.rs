// Trace the centerline of a curved vessel and check it against the
// analytic axis. The phantom lumen is uniformly bright, so the minimum-cost
// path is free to cut toward the inner wall of the bend; it stays inside the
// lumen but not on its axis.
//
// ```text
// cargo run --release --example centerline
// ```

use aneu::centerline::{extract_centerline, PathCostParams};
use aneu::phantom::{generate, AxisCurve, PhantomSpec, RadiusProfile};
use aneu::Grid;

pub struct Summary {
    pub points: usize,
    pub max_axis_distance: f64,
}

pub fn run_example() -> aneu::Result<Summary> {
    // quarter arc of radius 45 mm in the xz plane, entering through z = 0
    // and leaving through x = 0
    let mut spec = PhantomSpec::straight_tube([72, 24, 72], 1.0, 5.0, 8.0);
    spec.grid = Grid::isotropic([72, 24, 72], 1.0);
    spec.axis = AxisCurve::Arc {
        center: [0.0, 11.5, 0.0],
        radius: 45.0,
        u: [1.0, 0.0, 0.0],
        v: [0.0, 0.0, 1.0],
        start_angle: -0.3,
        length: 45.0 * (std::f64::consts::FRAC_PI_2 + 0.6),
    };
    spec.lumen_radius = RadiusProfile::constant(5.0);
    spec.outer_radius = RadiusProfile::constant(8.0);
    spec.noise_sigma = 10.0;
    let (vol, _) = generate(&spec)?;

    let near = |angle: f64| {
        let p = aneu::Vec3::new(45.0 * angle.cos(), 11.5, 45.0 * angle.sin());
        vol.grid().nearest_voxel(&p).expect("seed inside the grid")
    };
    let start = near(0.08);
    let end = near(std::f64::consts::FRAC_PI_2 - 0.08);
    let cl = extract_centerline(&vol, start, end, &PathCostParams::default(), 2.0)?;

    let max_axis_distance = cl.points.iter().map(|p| spec.axis.closest(p).1).fold(0.0, f64::max);
    let length = cl.arc_lengths().last().copied().unwrap_or(0.0);
    println!("{} points over {:.1} mm", cl.len(), length);
    println!("largest distance from the analytic axis: {max_axis_distance:.2} mm");
    let f = &cl.frames[cl.len() / 2];
    println!(
        "middle frame: t = {:.3?}, u = {:.3?}, v = {:.3?}",
        cl.tangents[cl.len() / 2].as_slice(),
        f.u.as_slice(),
        f.v.as_slice()
    );
    Ok(Summary {
        points: cl.len(),
        max_axis_distance,
    })
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
