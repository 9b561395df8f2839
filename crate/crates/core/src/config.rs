//! Single JSON document holding every pipeline parameter.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::centerline::PathCostParams;
use crate::endoleak::{LeakParams, Window};
use crate::error::{Error, Result};
use crate::lumen::LumenParams;
use crate::phantom::PhantomSpec;
use crate::thrombus::ThrombusParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Input RVOL volume; when absent the phantom is generated instead.
    pub volume: Option<PathBuf>,
    /// Reference masks for evaluation of an input volume.
    pub truth_lumen: Option<PathBuf>,
    pub truth_aneurysm: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Centerline seed voxels.
    pub start: [usize; 3],
    pub end: [usize; 3],
    /// Centerline sample spacing (mm).
    pub step_mm: f64,
    pub path_cost: PathCostParams,
    pub lumen: LumenParams,
    pub thrombus: ThrombusParams,
    pub endoleak: LeakParams,
    pub window: Window,
    /// Axial slices rendered as endoleak overlays.
    pub overlay_slices: Vec<usize>,
    pub evaluate: bool,
    /// Phantom geometry; its `rng_seed` drives the noise.
    pub phantom: PhantomSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let mut thrombus = ThrombusParams::default();
        // midway between the phantom's thrombus and background levels; the
        // narrow transition keeps the steep lumen wall out of the opacity
        thrombus.opacity.iso_value = -5.0;
        thrombus.opacity.transition_width = 0.5;
        thrombus.init_offset = 5.0;
        PipelineConfig {
            volume: None,
            truth_lumen: None,
            truth_aneurysm: None,
            output_dir: PathBuf::from("aneu-out"),
            start: [64, 64, 4],
            end: [64, 64, 123],
            step_mm: 2.0,
            path_cost: PathCostParams::default(),
            lumen: LumenParams::default(),
            thrombus,
            endoleak: LeakParams::default(),
            window: Window::default(),
            overlay_slices: vec![54, 77],
            evaluate: true,
            phantom: PhantomSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: PipelineConfig = crate::io::read_json(path).map_err(|e| match e {
            Error::Json(j) => Error::Config(j.to_string()),
            e => e,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check every section and the constraints that span sections. The
    /// error names the violated constraint.
    pub fn validate(&self) -> Result<()> {
        let section = |name: &str, r: Result<()>| {
            r.map_err(|e| Error::Config(format!("{name}: {e}")))
        };
        section("path_cost", self.path_cost.validate())?;
        section("lumen", self.lumen.validate())?;
        section("thrombus", self.thrombus.validate())?;
        section("endoleak", self.endoleak.validate())?;
        if self.volume.is_none() {
            section("phantom", self.phantom.validate())?;
        }
        if !(self.step_mm > 0.0) {
            return Err(Error::Config("step_mm must be > 0".into()));
        }
        if self.start == self.end {
            return Err(Error::Config("start and end seeds must differ".into()));
        }
        if !(self.window.width > 0.0) {
            return Err(Error::Config("window.width must be > 0".into()));
        }
        if self.lumen.theta_s != self.endoleak.theta_s {
            return Err(Error::Config(format!(
                "lumen.theta_s ({}) must equal endoleak.theta_s ({})",
                self.lumen.theta_s, self.endoleak.theta_s
            )));
        }
        if !(self.endoleak.theta < self.lumen.theta_s) {
            return Err(Error::Config("endoleak.theta must be below theta_s".into()));
        }
        Ok(())
    }

    /// SHA-256 of the compact JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(&bytes))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
