use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aneu::centerline::{extract_centerline, Centerline};
use aneu::config::PipelineConfig;
use aneu::contour::ContourStack;
use aneu::endoleak::{self, render_overlay};
use aneu::eval::evaluate_pair;
use aneu::io;
use aneu::lumen::segment_lumen;
use aneu::measure::size_profile;
use aneu::phantom::{self, GroundTruthManifest, PhantomSpec};
use aneu::pipeline::run_pipeline;
use aneu::thrombus::segment_thrombus;
use aneu::volume::opacity_slice;
use aneu::Error;

#[derive(Parser)]
#[command(name = "aneu", version, about = "Aortic aneurysm segmentation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic volume with ground-truth masks.
    Phantom {
        /// PhantomSpec JSON; the default phantom when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "phantom")]
        out: PathBuf,
    },
    /// Trace the lumen centerline between two seed voxels.
    Centerline {
        #[arg(long)]
        volume: PathBuf,
        #[arg(long, value_parser = parse_ijk)]
        start: [usize; 3],
        #[arg(long, value_parser = parse_ijk)]
        end: [usize; 3],
        #[arg(long, default_value_t = 2.0)]
        step_mm: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cast and regularize inner contours along a centerline.
    SegmentLumen {
        #[arg(long)]
        volume: PathBuf,
        #[arg(long)]
        centerline: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grow the outer contours from the inner contours.
    SegmentThrombus {
        #[arg(long)]
        volume: PathBuf,
        #[arg(long)]
        lumen: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Write the opacity image of one slice, e.g. `z=60 opacity.pgm`.
        #[arg(long, num_args = 2, value_names = ["AXIS=INDEX", "PGM"])]
        dump_opacity: Option<Vec<String>>,
    },
    /// Per-slice diameter and area of a contour stack.
    Measure {
        #[arg(long)]
        contours: PathBuf,
        #[arg(long)]
        centerline: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Detect endoleak clusters between aneurysm and lumen masks.
    Endoleak {
        #[arg(long)]
        volume: PathBuf,
        #[arg(long)]
        aneurysm: PathBuf,
        #[arg(long)]
        lumen: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        no_rim_guard: bool,
        #[arg(long)]
        out: PathBuf,
        /// Render a slice with clusters highlighted, e.g. `z=54 leak.ppm`.
        #[arg(long, num_args = 2, value_names = ["AXIS=INDEX", "PPM"])]
        overlay: Option<Vec<String>>,
    },
    /// Compare a contour stack with a reference mask.
    Evaluate {
        #[arg(long)]
        contours: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage from one configuration.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print or write the default configuration.
    InitConfig {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_ijk(s: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected i,j,k".to_string())
}

fn parse_slice(s: &str) -> Result<(usize, usize), Error> {
    let (axis, index) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidParam(format!("slice {s:?} is not AXIS=INDEX")))?;
    let axis = match axis {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        a => return Err(Error::InvalidParam(format!("unknown axis {a:?}"))),
    };
    let index = index
        .parse()
        .map_err(|_| Error::InvalidParam(format!("bad slice index {index:?}")))?;
    Ok((axis, index))
}

fn load_config(path: &Option<PathBuf>) -> Result<PipelineConfig, Error> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

/// An error with the pipeline stage that raised it, if any.
struct Failure {
    stage: Option<&'static str>,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { stage: None, error }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<aneu::pipeline::StageError> for Failure {
    fn from(e: aneu::pipeline::StageError) -> Self {
        Failure {
            stage: Some(e.stage),
            error: e.source,
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Phantom { spec, seed, out } => {
            let mut spec: PhantomSpec = match spec {
                Some(p) => io::read_json(p)?,
                None => PhantomSpec::default(),
            };
            if let Some(s) = seed {
                spec.rng_seed = s;
            }
            let (vol, gt) = phantom::generate(&spec)?;
            std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
            io::write_volume(out.join("volume.rvol"), &vol)?;
            io::write_mask(out.join("lumen_truth.rvol"), &gt.lumen_mask)?;
            io::write_mask(out.join("aneurysm_truth.rvol"), &gt.aneurysm_mask)?;
            io::write_json(out.join("ground_truth.json"), &GroundTruthManifest::new(&spec, &gt))?;
        }
        Command::Centerline { volume, start, end, step_mm, config, out } => {
            let cfg = load_config(&config)?;
            let vol = io::read_volume(volume)?;
            let cl = extract_centerline(&vol, start, end, &cfg.path_cost, step_mm)?;
            io::write_json(out, &cl)?;
        }
        Command::SegmentLumen { volume, centerline, config, out } => {
            let cfg = load_config(&config)?;
            let vol = io::read_volume(volume)?;
            let cl: Centerline = io::read_json(centerline)?;
            let (stack, report) = segment_lumen(&vol, &cl, &cfg.lumen)?;
            io::write_json(out, &stack)?;
            eprintln!("lumen: {} iterations, converged {}", report.iterations, report.converged);
        }
        Command::SegmentThrombus { volume, lumen, config, out, dump_opacity } => {
            let cfg = load_config(&config)?;
            let vol = io::read_volume(volume)?;
            let inner: ContourStack = io::read_json(lumen)?;
            if let Some(d) = dump_opacity {
                let (axis, index) = parse_slice(&d[0])?;
                let (w, h, a) = opacity_slice(&vol, axis, index, &cfg.thrombus.opacity)?;
                let scale = 255.0 / cfg.thrombus.opacity.max_opacity;
                let gray: Vec<u8> = a.iter().map(|x| (x * scale).round().clamp(0.0, 255.0) as u8).collect();
                io::write_pgm(&d[1], w, h, &gray)?;
            }
            let (outer, report) = segment_thrombus(&inner, &vol, &cfg.thrombus)?;
            io::write_json(out, &outer)?;
            for s in &report.scales {
                eprintln!("sigma {}: {} iterations, converged {}", s.sigma, s.iterations, s.converged);
            }
        }
        Command::Measure { contours, centerline, csv, json } => {
            let stack: ContourStack = io::read_json(contours)?;
            let cl: Centerline = io::read_json(centerline)?;
            let profile = size_profile(&stack, &cl)?;
            let file = std::fs::File::create(&csv).map_err(|e| io_err(&csv, e))?;
            profile.write_csv(file).map_err(|e| Error::format("csv", e.to_string()))?;
            if let Some(j) = json {
                io::write_json(j, &profile)?;
            }
            println!(
                "D_max {:.2} mm at slice {}, A_max {:.1} mm² at slice {}",
                profile.d_max_mm, profile.d_max_slice, profile.a_max_mm2, profile.a_max_slice
            );
        }
        Command::Endoleak { volume, aneurysm, lumen, config, no_rim_guard, out, overlay } => {
            let mut cfg = load_config(&config)?;
            if no_rim_guard {
                cfg.endoleak.rim_guard = false;
            }
            let vol = io::read_volume(volume)?;
            let aneurysm = io::read_mask(aneurysm)?;
            let lumen = io::read_mask(lumen)?;
            let outside = endoleak::lumen_outside_aneurysm(&aneurysm, &lumen)?;
            if outside > 0 {
                eprintln!("warning: {outside} lumen voxels lie outside the aneurysm mask");
            }
            let thrombus = endoleak::build_thrombus_mask(&aneurysm, &lumen)?;
            let clusters = endoleak::detect(&vol, &thrombus, &cfg.endoleak)?;
            io::write_json(out, &clusters)?;
            if let Some(o) = overlay {
                let (axis, index) = parse_slice(&o[0])?;
                render_overlay(&vol, &clusters, axis, index, cfg.window)?.write_ppm(&o[1])?;
            }
            println!("{} endoleak cluster(s)", clusters.len());
        }
        Command::Evaluate { contours, truth, out } => {
            let stack: ContourStack = io::read_json(contours)?;
            let truth = io::read_mask(truth)?;
            let report = evaluate_pair(&stack, &truth, truth.grid())?;
            match out {
                Some(p) => io::write_json(p, &report)?,
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
        }
        Command::Pipeline { config, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let result = run_pipeline(&cfg)?;
            if let Some(e) = result.eval {
                println!(
                    "lumen DSC {:.4}, aneurysm DSC {:.4}, mean distance {:.3} mm",
                    e.lumen.dsc, e.aneurysm.dsc, e.aneurysm.surface.mean
                );
            }
            println!("{} endoleak cluster(s); outputs in {}", result.clusters.len(), cfg.output_dir.display());
        }
        Command::InitConfig { out } => {
            let cfg = PipelineConfig::default();
            match out {
                Some(p) => io::write_json(p, &cfg)?,
                None => println!("{}", serde_json::to_string_pretty(&cfg)?),
            }
        }
    }
    Ok(())
}

fn init_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("ANEU_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("ANEU_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().map_err(Failure::from).and_then(|_| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match f.stage {
                Some(stage) => eprintln!("error in stage {stage}: {}", f.error),
                None => eprintln!("error: {}", f.error),
            }
            ExitCode::from(f.error.exit_code() as u8)
        }
    }
}
