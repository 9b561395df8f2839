// Run every stage on the default phantom and print the scores.
//
// ```text
// cargo run --release --example full_pipeline -- [output-dir]
// ```

use aneu::config::PipelineConfig;
use aneu::pipeline::{run_pipeline, PipelineOutput, StageError};

pub fn run_example(cfg: &PipelineConfig) -> Result<PipelineOutput, StageError> {
    let out = run_pipeline(cfg)?;
    for t in &out.manifest.timings {
        println!("{:<11} {:>7.2} s", t.stage, t.seconds);
    }
    println!(
        "lumen ACM: {} iterations, converged {}",
        out.manifest.lumen_acm.iterations, out.manifest.lumen_acm.converged
    );
    for s in &out.manifest.thrombus_acm.scales {
        println!("thrombus sigma {}: {} iterations, converged {}", s.sigma, s.iterations, s.converged);
    }
    if let Some(e) = out.eval {
        println!("lumen    DSC {:.4}  mean {:.3} mm  max {:.3} mm", e.lumen.dsc, e.lumen.surface.mean, e.lumen.surface.max);
        println!(
            "aneurysm DSC {:.4}  mean {:.3} mm  max {:.3} mm",
            e.aneurysm.dsc, e.aneurysm.surface.mean, e.aneurysm.surface.max
        );
        println!("thrombus region DSC {:.4}", e.thrombus_region_dsc);
    }
    println!(
        "D_max {:.2} mm at slice {} ({:.1} mm along the centerline)",
        out.sizes.d_max_mm, out.sizes.d_max_slice, out.sizes.d_max_arc_length_mm
    );
    for c in &out.clusters {
        println!(
            "endoleak {:.1} mm3 at ({:.1}, {:.1}, {:.1}), peak {} HU",
            c.volume_mm3, c.centroid.x, c.centroid.y, c.centroid.z, c.peak_hu
        );
    }
    println!("outputs hash {}", out.manifest.outputs_hash);
    Ok(out)
}

#[allow(dead_code)]
fn main() {
    let mut cfg = PipelineConfig::default();
    if let Some(dir) = std::env::args().nth(1) {
        cfg.output_dir = dir.into();
    }
    if let Err(e) = run_example(&cfg) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
