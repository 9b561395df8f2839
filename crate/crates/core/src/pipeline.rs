//! End-to-end run: load or synthesize a volume, segment, measure, detect
//! endoleaks, evaluate, and write every artifact plus a run manifest.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::centerline::{extract_centerline, Centerline};
use crate::config::{hex, PipelineConfig};
use crate::contour::ContourStack;
use crate::endoleak::{self, EndoleakCluster};
use crate::error::{Error, Result};
use crate::eval::{dice, evaluate_mesh, EvalReport};
use crate::geometry::{triangulate, voxelize, BinaryMask};
use crate::io;
use crate::lumen::{segment_lumen, AcmReport};
use crate::measure::{size_profile, SizeProfile};
use crate::phantom::{self, GroundTruthManifest};
use crate::thrombus::{segment_thrombus, DeformReport};
use crate::volume::Volume;

/// An error tagged with the stage that produced it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub source: Error,
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        self.source.exit_code()
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

trait Stage<T> {
    fn stage(self, name: &'static str) -> std::result::Result<T, StageError>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, name: &'static str) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage: name, source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Scores of both boundaries against the reference masks, restricted to the
/// slab between the first and last contour planes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineEval {
    pub lumen: EvalReport,
    pub aneurysm: EvalReport,
    /// Overlap of the thrombus regions (aneurysm minus lumen).
    pub thrombus_region_dsc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub crate_version: String,
    pub config_hash: String,
    /// Hash over every artifact except the manifest, in name order.
    pub outputs_hash: String,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<StageTiming>,
    pub lumen_acm: AcmReport,
    pub thrombus_acm: DeformReport,
    pub lumen_outside_aneurysm_voxels: usize,
}

/// In-memory results of a run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub centerline: Centerline,
    pub lumen: ContourStack,
    pub outer: ContourStack,
    pub lumen_mask: BinaryMask,
    pub aneurysm_mask: BinaryMask,
    pub sizes: SizeProfile,
    pub clusters: Vec<EndoleakCluster>,
    pub eval: Option<PipelineEval>,
    pub manifest: Manifest,
}

struct Truth {
    lumen: BinaryMask,
    aneurysm: BinaryMask,
}

/// Voxels between the first and last contour planes, inclusive.
pub fn slab_mask(grid: &crate::Grid, centerline: &Centerline) -> BinaryMask {
    let n = centerline.len();
    let (c0, t0) = (centerline.points[0], centerline.tangents[0]);
    let (c1, t1) = (centerline.points[n - 1], centerline.tangents[n - 1]);
    BinaryMask::from_fn(*grid, |ijk| {
        let p = grid.world(ijk);
        (p - c0).dot(&t0) >= -1e-9 && (p - c1).dot(&t1) <= 1e-9
    })
}

struct Writer {
    dir: PathBuf,
    names: Vec<String>,
}

impl Writer {
    fn path(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.dir.join(name)
    }
}

pub fn run_pipeline(cfg: &PipelineConfig) -> std::result::Result<PipelineOutput, StageError> {
    run_pipeline_in(cfg, &cfg.output_dir)
}

/// Run with artifacts written under `out` instead of `cfg.output_dir`.
pub fn run_pipeline_in(cfg: &PipelineConfig, out: &Path) -> std::result::Result<PipelineOutput, StageError> {
    cfg.validate().stage("config")?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e)).stage("load")?;
    let mut w = Writer {
        dir: out.to_path_buf(),
        names: Vec::new(),
    };
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut tick = |stage: &str, timings: &mut Vec<StageTiming>| {
        timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: clock.elapsed().as_secs_f64(),
        });
        clock = Instant::now();
    };

    // load
    let (vol, truth) = match &cfg.volume {
        Some(p) => {
            let vol = io::read_volume(p).stage("load")?;
            let truth = match (&cfg.truth_lumen, &cfg.truth_aneurysm) {
                (Some(l), Some(a)) => Some(Truth {
                    lumen: io::read_mask(l).stage("load")?,
                    aneurysm: io::read_mask(a).stage("load")?,
                }),
                _ => None,
            };
            (vol, truth)
        }
        None => {
            let (vol, gt) = phantom::generate(&cfg.phantom).stage("load")?;
            io::write_volume(w.path("volume.rvol"), &vol).stage("load")?;
            io::write_json(w.path("ground_truth.json"), &GroundTruthManifest::new(&cfg.phantom, &gt)).stage("load")?;
            let truth = Truth {
                lumen: gt.lumen_mask,
                aneurysm: gt.aneurysm_mask,
            };
            (vol, Some(truth))
        }
    };
    tick("load", &mut timings);

    let centerline = extract_centerline(&vol, cfg.start, cfg.end, &cfg.path_cost, cfg.step_mm).stage("centerline")?;
    io::write_json(w.path("centerline.json"), &centerline).stage("centerline")?;
    tick("centerline", &mut timings);

    let (lumen, lumen_acm) = segment_lumen(&vol, &centerline, &cfg.lumen).stage("lumen")?;
    io::write_json(w.path("lumen_contours.json"), &lumen).stage("lumen")?;
    tick("lumen", &mut timings);

    let (outer, thrombus_acm) = segment_thrombus(&lumen, &vol, &cfg.thrombus).stage("thrombus")?;
    io::write_json(w.path("thrombus_contours.json"), &outer).stage("thrombus")?;
    tick("thrombus", &mut timings);

    let grid = *vol.grid();
    let lumen_mesh = triangulate(&lumen).stage("mesh")?;
    let outer_mesh = triangulate(&outer).stage("mesh")?;
    io::write_obj(w.path("lumen.obj"), &lumen_mesh).stage("mesh")?;
    io::write_obj(w.path("aneurysm.obj"), &outer_mesh).stage("mesh")?;
    let lumen_mask = voxelize(&lumen_mesh, &grid).stage("mesh")?;
    let aneurysm_mask = voxelize(&outer_mesh, &grid).stage("mesh")?;
    io::write_mask(w.path("lumen_mask.rvol"), &lumen_mask).stage("mesh")?;
    io::write_mask(w.path("aneurysm_mask.rvol"), &aneurysm_mask).stage("mesh")?;
    tick("mesh", &mut timings);

    let sizes = size_profile(&outer, &centerline).stage("measure")?;
    let csv_path = w.path("size_profile.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e)).stage("measure")?;
    sizes
        .write_csv(file)
        .map_err(|e| Error::format("csv", e.to_string()))
        .stage("measure")?;
    io::write_json(w.path("size_profile.json"), &sizes).stage("measure")?;
    tick("measure", &mut timings);

    let thrombus_mask = endoleak::build_thrombus_mask(&aneurysm_mask, &lumen_mask).stage("endoleak")?;
    let outside = endoleak::lumen_outside_aneurysm(&aneurysm_mask, &lumen_mask).stage("endoleak")?;
    io::write_mask(w.path("thrombus_mask.rvol"), &thrombus_mask).stage("endoleak")?;
    let clusters = endoleak::detect(&vol, &thrombus_mask, &cfg.endoleak).stage("endoleak")?;
    io::write_json(w.path("endoleaks.json"), &clusters).stage("endoleak")?;
    for &z in &cfg.overlay_slices {
        let img = endoleak::render_overlay(&vol, &clusters, 2, z, cfg.window).stage("endoleak")?;
        img.write_ppm(w.path(&format!("overlay_z{z:03}.ppm"))).stage("endoleak")?;
    }
    tick("endoleak", &mut timings);

    let eval = match (&truth, cfg.evaluate) {
        (Some(t), true) => {
            let e = evaluate_all(&centerline, &lumen_mesh, &outer_mesh, &lumen_mask, &aneurysm_mask, t)
                .stage("evaluate")?;
            io::write_json(w.path("eval.json"), &e).stage("evaluate")?;
            Some(e)
        }
        _ => None,
    };
    tick("evaluate", &mut timings);

    let mut names = w.names.clone();
    names.sort();
    let mut artifacts = Vec::new();
    let mut all = Sha256::new();
    for name in names {
        let path = out.join(&name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e)).stage("manifest")?;
        let digest = hex(&Sha256::digest(&bytes));
        all.update(name.as_bytes());
        all.update(digest.as_bytes());
        artifacts.push(Artifact {
            name,
            bytes: bytes.len() as u64,
            sha256: digest,
        });
    }
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
        outputs_hash: hex(&all.finalize()),
        artifacts,
        timings,
        lumen_acm,
        thrombus_acm,
        lumen_outside_aneurysm_voxels: outside,
    };
    io::write_json(out.join("manifest.json"), &manifest).stage("manifest")?;
    Ok(PipelineOutput {
        centerline,
        lumen,
        outer,
        lumen_mask,
        aneurysm_mask,
        sizes,
        clusters,
        eval,
        manifest,
    })
}

fn evaluate_all(
    centerline: &Centerline,
    lumen_mesh: &crate::geometry::TriMesh,
    outer_mesh: &crate::geometry::TriMesh,
    lumen_mask: &BinaryMask,
    aneurysm_mask: &BinaryMask,
    truth: &Truth,
) -> Result<PipelineEval> {
    let slab = slab_mask(lumen_mask.grid(), centerline);
    let ref_lumen = truth.lumen.and(&slab)?;
    let ref_aneurysm = truth.aneurysm.and(&slab)?;
    let lumen = evaluate_mesh(lumen_mesh, &lumen_mask.and(&slab)?, &ref_lumen)?;
    let aneurysm = evaluate_mesh(outer_mesh, &aneurysm_mask.and(&slab)?, &ref_aneurysm)?;
    let test_region = aneurysm_mask.and_not(lumen_mask)?.and(&slab)?;
    let ref_region = ref_aneurysm.and_not(&ref_lumen)?;
    Ok(PipelineEval {
        lumen,
        aneurysm,
        thrombus_region_dsc: dice(&test_region, &ref_region)?,
    })
}

/// Load a volume, mapping failures to the `load` stage.
pub fn load_volume(path: &Path) -> std::result::Result<Volume, StageError> {
    io::read_volume(path).stage("load")
}
