// Grow the outer (thrombus) boundary of a small fusiform aneurysm from its
// lumen contours and compare the radii with the analytic profile.
//
// ```text
// cargo run --release --example thrombus
// ```

use aneu::centerline::extract_centerline;
use aneu::config::PipelineConfig;
use aneu::lumen::segment_lumen;
use aneu::phantom::{generate, Bump, PhantomSpec, RadiusProfile};
use aneu::thrombus::segment_thrombus;

pub fn run_example() -> aneu::Result<f64> {
    let mut spec = PhantomSpec::straight_tube([64, 64, 48], 1.0, 7.0, 11.0);
    spec.outer_radius = RadiusProfile {
        base: 11.0,
        bump: Some(Bump {
            amplitude: 6.0,
            center_t: 72.0,
            half_width: 20.0,
        }),
    };
    spec.noise_sigma = 15.0;
    let (vol, _) = generate(&spec)?;
    let cfg = PipelineConfig::default();
    let cl = extract_centerline(&vol, [32, 32, 3], [32, 32, 44], &cfg.path_cost, 2.0)?;
    let (inner, _) = segment_lumen(&vol, &cl, &cfg.lumen)?;
    let (outer, report) = segment_thrombus(&inner, &vol, &cfg.thrombus)?;
    for s in &report.scales {
        println!("sigma {} mm: {} iterations, final step {:.3} mm", s.sigma, s.iterations, s.final_max_delta);
    }

    let mut worst: f64 = 0.0;
    println!("slice  analytic  mean outer radius");
    for (i, c) in outer.contours.iter().enumerate() {
        let (t, _) = spec.axis.closest(&c.center);
        let truth = spec.outer_radius.at(t);
        let mean = c.radii.iter().sum::<f64>() / c.n_rays() as f64;
        worst = worst.max((mean - truth).abs());
        if i % 4 == 0 {
            println!("{i:5}  {truth:8.2}  {mean:8.2}");
        }
    }
    println!("largest error of the mean radius: {worst:.2} mm");
    Ok(worst)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
