// Detect endoleaks in a phantom with stent markers, using the analytic
// masks, and render an axial overlay through the first leak.
//
// ```text
// cargo run --release --example endoleak -- [overlay.ppm]
// ```

use std::path::Path;

use aneu::endoleak::{build_thrombus_mask, detect, render_overlay, EndoleakCluster, LeakParams, Window};
use aneu::phantom::{generate, leak_center, PhantomSpec};

pub fn run_example(overlay: &Path) -> aneu::Result<Vec<EndoleakCluster>> {
    let spec = PhantomSpec::default();
    let (vol, truth) = generate(&spec)?;
    let thrombus = build_thrombus_mask(&truth.aneurysm_mask, &truth.lumen_mask)?;
    let clusters = detect(&vol, &thrombus, &LeakParams::default())?;
    for (c, l) in clusters.iter().zip(&spec.leaks) {
        println!(
            "cluster {:.0} mm3 (sphere {:.0} mm3), centroid {:.1?}, peak {} HU",
            c.volume_mm3,
            4.0 / 3.0 * std::f64::consts::PI * l.radius.powi(3),
            c.centroid.as_slice(),
            c.peak_hu
        );
    }
    if let Some(l) = spec.leaks.first() {
        let z = leak_center(&spec, l).z.round() as usize;
        render_overlay(&vol, &clusters, 2, z, Window::default())?.write_ppm(overlay)?;
        println!("overlay of slice z = {z} written to {}", overlay.display());
    }
    Ok(clusters)
}

#[allow(dead_code)]
fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "endoleak_overlay.ppm".into());
    if let Err(e) = run_example(Path::new(&out)) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
