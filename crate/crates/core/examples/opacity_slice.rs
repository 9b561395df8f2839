// Write an axial CT slice of the default phantom next to its opacity
// image, both as PGM.
//
// ```text
// cargo run --release --example opacity_slice -- [output-dir]
// ```

use std::path::Path;

use aneu::config::PipelineConfig;
use aneu::endoleak::Window;
use aneu::io;
use aneu::phantom::generate;
use aneu::volume::opacity_slice;

pub fn run_example(out: &Path) -> aneu::Result<f64> {
    let cfg = PipelineConfig::default();
    let (vol, _) = generate(&cfg.phantom)?;
    let z = 64;
    let (w, h, alpha) = opacity_slice(&vol, 2, z, &cfg.thrombus.opacity)?;
    std::fs::create_dir_all(out).map_err(|e| aneu::Error::io(out, e))?;
    let scale = 255.0 / cfg.thrombus.opacity.max_opacity;
    let gray: Vec<u8> = alpha.iter().map(|a| (a * scale).round() as u8).collect();
    io::write_pgm(out.join("opacity.pgm"), w, h, &gray)?;
    let window = Window::default();
    let ct: Vec<u8> = (0..h)
        .flat_map(|j| (0..w).map(move |i| (i, j)))
        .map(|(i, j)| window.gray(vol.get(i, j, z)))
        .collect();
    io::write_pgm(out.join("ct.pgm"), w, h, &ct)?;
    let covered = alpha.iter().filter(|&&a| a > 0.1).count() as f64 / alpha.len() as f64;
    println!("slice z = {z}: {:.1}% of pixels above 0.1 opacity", 100.0 * covered);
    Ok(covered)
}

#[allow(dead_code)]
fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "opacity-out".into());
    if let Err(e) = run_example(Path::new(&out)) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
