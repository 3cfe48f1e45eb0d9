//! Argument parsing and subcommand dispatch for the `perimkit` binary.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use perimkit::metrics::evaluate;
use perimkit::perimeter::Perimeter;
use perimkit::synthgen::{
    generate_scene, inject_floor_ceiling, inject_internal_wall, render_sequence, RenderOptions,
    ShapeClass, SynthConfig,
};
use rayon::prelude::*;

use crate::ablate::run_ablation;
use crate::config::PipelineConfig;
use crate::formats::{read_ply, write_frames, write_perimeter, write_ply};
use crate::io::{read_text, write_atomic};
use crate::pipeline::{cluster_stage, cull_stage, fit_stage, load_gt, load_input, run_pipeline, SceneRecord};
use crate::report::{csv_header, csv_row};
use crate::svg::render_svg;

/// Environment variable read for the `seed` key when no flag is given.
pub const SEED_ENV: &str = "PERIMKIT_SEED";

#[derive(Parser, Debug)]
#[command(name = "perimkit", version, about = "Room perimeters from wall point clouds")]
pub struct Cli {
    /// Flat key=value configuration file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize labelled scenes with ground-truth perimeters.
    Gen(GenArgs),
    /// Fuse and cull a cloud or frame sequence to its outer walls.
    Cull {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate normals and cluster a culled cloud into wall instances.
    Cluster {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a closed perimeter to a clustered cloud.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a perimeter against ground truth; prints CSV.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a perimeter (and optionally ground truth and points) as SVG.
    Render {
        #[arg(long)]
        perimeter: PathBuf,
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage on one or more scenes and write all artifacts.
    Pipeline(BatchArgs),
    /// Sweep stage-skip and frame-stride arms; writes one CSV.
    Ablate(AblateArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// rectangle, l, t or u; drawn at random when absent.
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long, default_value_t = 0.03)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub min_holes: usize,
    #[arg(long, default_value_t = 4)]
    pub max_holes: usize,
    #[arg(long, default_value_t = 100.0)]
    pub points_per_m2: f64,
    /// Also render a posed depth-frame sequence per scene.
    #[arg(long)]
    pub frames: bool,
    #[arg(long, default_value_t = 512)]
    pub frame_count: usize,
    /// Add a free-standing partition set back this far from a wall.
    #[arg(long)]
    pub internal_wall: Option<f64>,
    /// Add floor and ceiling points at this density (points per m²).
    #[arg(long)]
    pub floor_ceiling: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    /// PLY files or frame directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Ground truth for a single input; otherwise `<stem>.gt.txt` beside
    /// each input is used when present.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

/// The derived command plus one global `--<key>` flag per config key.
pub fn command() -> clap::Command {
    let mut cmd = Cli::command();
    for key in PipelineConfig::KEYS {
        let mut arg = Arg::new(*key)
            .long(flag_name(key))
            .global(true)
            .value_name("VALUE")
            .action(ArgAction::Set)
            .help(format!("Override config key {key}"));
        if matches!(*key, "skip_alpha" | "skip_mask" | "snap_enabled") {
            arg = arg.num_args(0..=1).default_missing_value("true");
        }
        if *key == "seed" {
            arg = arg.env(SEED_ENV);
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

/// Defaults, then the config file, then flags and the seed variable.
pub fn resolve_config(cli: &Cli, matches: &ArgMatches) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let sub = matches.subcommand().map(|(_, m)| m).unwrap_or(matches);
    for key in PipelineConfig::KEYS {
        let source = sub.value_source(key).or_else(|| matches.value_source(key));
        if matches!(source, Some(ValueSource::CommandLine | ValueSource::EnvVariable)) {
            let value = sub
                .get_one::<String>(key)
                .or_else(|| matches.get_one::<String>(key))
                .unwrap();
            cfg.apply(key, value)
                .with_context(|| format!("--{}", flag_name(key)))?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` and runs the chosen subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&matches) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(matches: &ArgMatches) -> Result<ExitCode> {
    let cli = Cli::from_arg_matches(matches)?;
    let cfg = resolve_config(&cli, matches)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            bail!("--workers must be >= 1");
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    pool.install(|| execute(&cli.command, &cfg))
}

fn execute(cmd: &Command, cfg: &PipelineConfig) -> Result<ExitCode> {
    match cmd {
        Command::Gen(a) => gen(a, cfg),
        Command::Cull { input, out } => {
            let scene = load_input(input)?;
            let (_, _, _, culled) = cull_stage(&scene, cfg)?;
            write_atomic(out, write_ply(&culled).as_bytes())?;
            eprintln!("{} points kept", culled.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Cluster { input, out } => {
            let cloud = read_cloud(input)?;
            let (with_normals, labels) = cluster_stage(&cloud, cfg)?;
            write_atomic(out, write_ply(&with_normals.with_labels(labels)?).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fit { input, out } => {
            let cloud = read_cloud(input)?;
            let labels = cloud
                .labels
                .as_deref()
                .with_context(|| format!("{} has no label property", input.display()))?;
            let (perimeter, _) = fit_stage(&cloud.xy(), labels, cfg)?;
            write_atomic(out, write_perimeter(&perimeter).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { pred, gt, out } => {
            let p = load_gt(pred)?;
            let g = load_gt(gt)?;
            let r = evaluate(&p, &g, cfg.iou_resolution, cfg.tau_match)?;
            let id = pred.file_stem().and_then(|s| s.to_str()).unwrap_or("scene");
            let csv = format!("{}\n{}\n", csv_header(), csv_row(id, &r));
            match out {
                Some(path) => write_atomic(path, csv.as_bytes())?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Render {
            perimeter,
            gt,
            points,
            out,
        } => {
            let p = load_gt(perimeter)?;
            let g = gt.as_deref().map(load_gt).transpose()?;
            let cloud = points.as_deref().map(read_cloud).transpose()?;
            let xy = cloud.as_ref().map(|c| c.xy());
            let labels = cloud.as_ref().map(|c| {
                c.labels
                    .clone()
                    .unwrap_or_else(|| vec![perimkit::NOISE; c.len()])
            });
            let pts = xy.as_deref().zip(labels.as_deref());
            write_atomic(out, render_svg(&p, g.as_ref(), pts).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Pipeline(a) => pipeline(a, cfg),
        Command::Ablate(a) => {
            let scenes = records(&a.inputs, None, Path::new("."))?;
            let csv = run_ablation(&scenes, cfg)?;
            write_atomic(&a.out, csv.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read_cloud(path: &Path) -> Result<perimkit::PointCloud> {
    read_ply(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Ground truth conventionally stored beside an input as `<stem>.gt.txt`.
pub fn sibling_gt(input: &Path) -> Option<PathBuf> {
    let stem = input.file_stem()?.to_str()?;
    let p = input.with_file_name(format!("{stem}.gt.txt"));
    p.is_file().then_some(p)
}

fn records(inputs: &[PathBuf], gt: Option<&Path>, out_root: &Path) -> Result<Vec<SceneRecord>> {
    if gt.is_some() && inputs.len() != 1 {
        bail!("--gt applies to a single input; use <stem>.gt.txt files for batches");
    }
    let mut recs = Vec::with_capacity(inputs.len());
    for input in inputs {
        if !input.exists() {
            bail!("input {} does not exist", input.display());
        }
        let g = gt.map(Path::to_path_buf).or_else(|| sibling_gt(input));
        recs.push(SceneRecord::from_input(input, g, out_root)?);
    }
    let mut ids: Vec<&str> = recs.iter().map(|r| r.scene_id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        bail!("two inputs map to scene id {:?}", w[0]);
    }
    Ok(recs)
}

fn pipeline(a: &BatchArgs, cfg: &PipelineConfig) -> Result<ExitCode> {
    let recs = records(&a.inputs, a.gt.as_deref(), &a.out)?;
    let results: Vec<Result<Option<String>>> = recs
        .par_iter()
        .map(|rec| {
            let out = run_pipeline(rec, cfg)?;
            Ok(out.report.map(|r| csv_row(&rec.scene_id, &r)))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failed = 0;
    for (rec, r) in recs.iter().zip(results) {
        match r {
            Ok(row) => rows.extend(row),
            Err(e) => {
                failed += 1;
                eprintln!("error: scene {}: {e:#}", rec.scene_id);
            }
        }
    }
    if !rows.is_empty() {
        let mut csv = format!("{}\n", csv_header());
        for r in rows {
            csv.push_str(&r);
            csv.push('\n');
        }
        write_atomic(&a.out.join("summary.csv"), csv.as_bytes())?;
    }
    eprintln!("{} of {} scenes succeeded", recs.len() - failed, recs.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn gen(a: &GenArgs, cfg: &PipelineConfig) -> Result<ExitCode> {
    let shape = a
        .shape
        .as_deref()
        .map(|s| ShapeClass::parse(s).with_context(|| format!("unknown shape {s:?} (rectangle|l|t|u)")))
        .transpose()?;
    for i in 0..a.count {
        let synth = SynthConfig {
            noise_sigma: a.noise,
            hole_count_range: (a.min_holes, a.max_holes),
            points_per_m2: a.points_per_m2,
            shape,
            seed: cfg.seed.wrapping_add(i as u64),
            ..SynthConfig::default()
        };
        synth.validate()?;
        let mut scene = generate_scene(&synth)?;
        let mut rng = synth.rng();
        if let Some(setback) = a.internal_wall {
            scene = inject_internal_wall(&scene, &synth, setback, 1.0, &mut rng)
                .with_context(|| format!("scene {i}: no wall admits a partition {setback} m in"))?;
        }
        if let Some(density) = a.floor_ceiling {
            scene = inject_floor_ceiling(&scene, &synth, density, &mut rng);
        }
        let stem = format!("scene_{i:04}");
        let gt = Perimeter::new(scene.skeleton.corners.clone())?;
        write_atomic(&a.out.join(format!("{stem}.ply")), write_ply(&scene.cloud).as_bytes())?;
        write_atomic(&a.out.join(format!("{stem}.gt.txt")), write_perimeter(&gt).as_bytes())?;
        if a.frames {
            let opts = RenderOptions {
                frame_count: a.frame_count,
                ..RenderOptions::default()
            };
            let frames = render_sequence(&scene.skeleton, &opts)?;
            write_frames(&a.out.join(format!("{stem}.frames")), &frames)?;
        }
    }
    eprintln!("wrote {} scenes to {}", a.count, a.out.display());
    Ok(ExitCode::SUCCESS)
}
