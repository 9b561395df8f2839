// Segment the lumen of a noisy tube with stent markers and score it
// against the analytic lumen.
//
// ```text
// cargo run --release --example lumen
// ```

use aneu::centerline::extract_centerline;
use aneu::config::PipelineConfig;
use aneu::eval::evaluate_pair;
use aneu::lumen::segment_lumen;
use aneu::phantom::{generate, PhantomSpec, StentMarker};
use aneu::pipeline::slab_mask;

pub fn run_example() -> aneu::Result<f64> {
    let mut spec = PhantomSpec::straight_tube([48, 48, 40], 1.0, 8.0, 13.0);
    spec.noise_sigma = 15.0;
    spec.stent_markers = (0..6)
        .map(|m| StentMarker {
            t: 60.0,
            angle: m as f64,
            radius: 8.0,
        })
        .collect();
    let (vol, truth) = generate(&spec)?;
    let cfg = PipelineConfig::default();
    let cl = extract_centerline(&vol, [24, 24, 3], [24, 24, 36], &cfg.path_cost, 2.0)?;
    let (stack, report) = segment_lumen(&vol, &cl, &cfg.lumen)?;
    println!("{} contours of {} rays, ACM iterations {}", stack.len(), stack.n_rays, report.iterations);

    let slab = slab_mask(vol.grid(), &cl);
    let eval = evaluate_pair(&stack, &truth.lumen_mask.and(&slab)?, vol.grid())?;
    let mean_r: f64 = stack.radii().iter().flatten().sum::<f64>() / (stack.len() * stack.n_rays) as f64;
    println!("mean radius {mean_r:.2} mm (analytic 8.00)");
    println!("DSC {:.4}, mean surface distance {:.3} mm", eval.dsc, eval.surface.mean);
    Ok(eval.dsc)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
