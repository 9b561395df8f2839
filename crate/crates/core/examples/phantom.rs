// Generate the default 128³ aneurysm phantom and write the volume, the
// ground-truth masks and a JSON summary.
//
// ```text
// cargo run --release --example phantom -- [output-dir]
// ```

use std::path::Path;

use aneu::io;
use aneu::phantom::{generate, GroundTruthManifest, PhantomSpec};

pub fn run_example(out: &Path) -> aneu::Result<GroundTruthManifest> {
    let spec = PhantomSpec::default();
    let (vol, truth) = generate(&spec)?;
    std::fs::create_dir_all(out).map_err(|e| aneu::Error::io(out, e))?;
    io::write_volume(out.join("volume.rvol"), &vol)?;
    io::write_mask(out.join("lumen_truth.rvol"), &truth.lumen_mask)?;
    io::write_mask(out.join("aneurysm_truth.rvol"), &truth.aneurysm_mask)?;
    let manifest = GroundTruthManifest::new(&spec, &truth);
    io::write_json(out.join("ground_truth.json"), &manifest)?;

    println!("grid {:?} at {:?} mm", spec.grid.dims, spec.grid.spacing);
    println!("lumen {:.0} mm3, thrombus {:.0} mm3", truth.lumen_mask.volume_mm3(), truth.thrombus_mask().volume_mm3());
    println!("analytic D_max {:.1} mm at t = {:.1} mm", manifest.d_max_mm, manifest.d_max_t);
    for l in &manifest.leaks {
        println!(
            "leak r = {} mm: analytic {:.1} mm3, voxelized {:.1} mm3",
            l.radius, l.analytic_volume_mm3, l.voxel_volume_mm3
        );
    }
    Ok(manifest)
}

#[allow(dead_code)]
fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "phantom-out".into());
    if let Err(e) = run_example(Path::new(&out)) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
