//! End-to-end scene processing and artifact output.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use perimkit::cluster::{
    estimate_normals_from, extract_labels, optimize_assignment, ransac_planes, remap_compact,
    split_components, OrientationHint,
};
use perimkit::hull::{alpha_contour, cull_to_contour, delaunay, subsample, voxel_fuse, Contour};
use perimkit::metrics::{evaluate, EvalReport};
use perimkit::perimeter::{clusters_from_labels, fit_perimeter, merged_labels, Perimeter};
use perimkit::projection::{masked_unproject_all, CameraFrame};
use perimkit::{Label, PointCloud, Vec2, NOISE};

use crate::config::{ClusterMethod, PipelineConfig};
use crate::formats::{read_frames, read_perimeter, read_ply, write_perimeter, write_ply};
use crate::io::{read_text, write_atomic};
use crate::report::{csv_header, csv_row};
use crate::svg::render_svg;

#[derive(Debug, Clone)]
pub enum SceneInput {
    Cloud(PointCloud),
    Frames(Vec<CameraFrame>),
}

/// A failed stage, named.
#[derive(Debug, thiserror::Error)]
#[error("stage {stage}: {source}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub source: perimkit::Error,
}

fn stage<T>(name: &'static str, r: perimkit::Result<T>) -> std::result::Result<T, StageError> {
    r.map_err(|source| StageError { stage: name, source })
}

/// Every intermediate product of one run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub ingested: PointCloud,
    pub fused: PointCloud,
    pub contour: Option<Contour>,
    pub culled: PointCloud,
    /// Subsample with normals and final (merged) labels.
    pub clustered: PointCloud,
    /// Labels after extraction and the connectivity split, before merging.
    pub raw_labels: Vec<Label>,
    pub perimeter: Perimeter,
    pub report: Option<EvalReport>,
}

/// Wall points of the input. With the mask on, labelled clouds keep only
/// non-noise points and frames keep only wall pixels.
pub fn ingest(input: &SceneInput, cfg: &PipelineConfig) -> perimkit::Result<PointCloud> {
    match input {
        SceneInput::Cloud(c) => {
            let kept = match (&c.labels, cfg.skip_mask) {
                (Some(l), false) => c.retain_by(|i, _| l[i] != NOISE),
                _ => c.clone(),
            };
            Ok(PointCloud::new(kept.points))
        }
        SceneInput::Frames(frames) => {
            if cfg.skip_mask {
                let bare: Vec<CameraFrame> = frames
                    .iter()
                    .map(|f| CameraFrame {
                        wall_mask: None,
                        ..f.clone()
                    })
                    .collect();
                masked_unproject_all(&bare, cfg.frame_stride)
            } else {
                masked_unproject_all(frames, cfg.frame_stride)
            }
        }
    }
}

/// Cluster labels for a cloud carrying normals.
pub fn cluster_labels(cloud: &PointCloud, cfg: &PipelineConfig) -> perimkit::Result<Vec<Label>> {
    let labels = match cfg.method {
        ClusterMethod::Optimizer => {
            let assign = optimize_assignment(cloud, &cfg.cluster_params())?;
            extract_labels(&assign, cfg.min_cluster_points)
        }
        ClusterMethod::Ransac => ransac_planes(cloud, &cfg.ransac_params()),
    };
    Ok(split_components(&cloud.xy(), &labels, cfg.split_radius, cfg.min_cluster_points))
}

/// Fused cloud, the α-contour (absent with `skip_alpha`) and the culled cloud.
pub fn cull_stage(
    input: &SceneInput,
    cfg: &PipelineConfig,
) -> std::result::Result<(PointCloud, PointCloud, Option<Contour>, PointCloud), StageError> {
    let ingested = stage("ingest", ingest(input, cfg))?;
    if ingested.is_empty() {
        return Err(StageError {
            stage: "ingest",
            source: perimkit::Error::EmptyCloud,
        });
    }
    let fused = stage("voxel", voxel_fuse(&ingested, cfg.voxel))?;
    if cfg.skip_alpha {
        let culled = fused.clone();
        return Ok((ingested, fused, None, culled));
    }
    let tri = stage("delaunay", delaunay(&fused.xy()))?;
    let contour = stage("alpha", alpha_contour(&tri, cfg.alpha))?;
    let culled = stage("cull", cull_to_contour(&fused, &contour, cfg.d_cull))?;
    Ok((ingested, fused, Some(contour), culled))
}

/// Subsample of `culled` carrying normals, and its cluster labels.
pub fn cluster_stage(
    culled: &PointCloud,
    cfg: &PipelineConfig,
) -> std::result::Result<(PointCloud, Vec<Label>), StageError> {
    let sampled = stage("subsample", subsample(culled, cfg.n_points, cfg.seed))?;
    let with_normals = stage(
        "normals",
        estimate_normals_from(culled, &sampled, cfg.k_nn, &OrientationHint::Centroid),
    )?;
    let labels = stage("cluster", cluster_labels(&with_normals, cfg))?;
    Ok((with_normals, labels))
}

/// Perimeter and merged per-point labels for a labelled 2D point set.
pub fn fit_stage(
    xy: &[Vec2],
    labels: &[Label],
    cfg: &PipelineConfig,
) -> std::result::Result<(Perimeter, Vec<Label>), StageError> {
    let params = cfg.perimeter_params();
    let clusters = stage("fit", clusters_from_labels(xy, labels))?;
    let perimeter = stage("fit", fit_perimeter(&clusters, &params))?;
    let merged = stage("fit", merged_labels(xy, labels, &params))?;
    Ok((perimeter, remap_compact(&merged)))
}

pub fn process(
    input: &SceneInput,
    gt: Option<&Perimeter>,
    cfg: &PipelineConfig,
) -> std::result::Result<PipelineOutput, StageError> {
    let (ingested, fused, contour, culled) = cull_stage(input, cfg)?;
    let (with_normals, raw_labels) = cluster_stage(&culled, cfg)?;
    let (perimeter, merged) = fit_stage(&with_normals.xy(), &raw_labels, cfg)?;
    let clustered = stage("fit", with_normals.with_labels(merged))?;
    let report = match gt {
        Some(g) => Some(stage("metrics", evaluate(&perimeter, g, cfg.iou_resolution, cfg.tau_match))?),
        None => None,
    };
    Ok(PipelineOutput {
        ingested,
        fused,
        contour,
        culled,
        clustered,
        raw_labels,
        perimeter,
        report,
    })
}

/// One scene to run: its inputs and where its artifacts go.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneRecord {
    pub scene_id: String,
    /// A PLY file or a frame directory holding `frames.cfg`.
    pub input: PathBuf,
    pub gt: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl SceneRecord {
    /// Scene id from the input's file stem, or a frame directory's full name.
    pub fn from_input(input: &Path, gt: Option<PathBuf>, out_root: &Path) -> Result<Self> {
        let name = if input.is_dir() { input.file_name() } else { input.file_stem() };
        let stem = name
            .and_then(|s| s.to_str())
            .with_context(|| format!("cannot derive a scene id from {}", input.display()))?;
        let scene_id: String = stem
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        let rec = Self {
            out_dir: out_root.join(&scene_id),
            scene_id,
            input: input.to_path_buf(),
            gt,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = !self.scene_id.is_empty()
            && self.scene_id != "."
            && self.scene_id != ".."
            && self
                .scene_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
        if !ok {
            anyhow::bail!("scene id {:?} is not filesystem-safe", self.scene_id);
        }
        Ok(())
    }
}

pub fn load_input(path: &Path) -> Result<SceneInput> {
    if path.is_dir() {
        Ok(SceneInput::Frames(read_frames(path)?))
    } else {
        let text = read_text(path)?;
        Ok(SceneInput::Cloud(
            read_ply(&text).with_context(|| format!("parsing {}", path.display()))?,
        ))
    }
}

pub fn load_gt(path: &Path) -> Result<Perimeter> {
    read_perimeter(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub const ARTIFACTS: [&str; 6] = [
    "fused.ply",
    "culled.ply",
    "clusters.ply",
    "perimeter.txt",
    "scene.svg",
    "report.csv",
];

/// Runs one scene and writes its artifacts; `report.csv` only with ground truth.
pub fn run_pipeline(rec: &SceneRecord, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    rec.validate()?;
    let input = load_input(&rec.input).with_context(|| format!("scene {}", rec.scene_id))?;
    let gt = rec.gt.as_deref().map(load_gt).transpose()?;
    let out = process(&input, gt.as_ref(), cfg).with_context(|| format!("scene {}", rec.scene_id))?;
    write_artifacts(rec, &out, gt.as_ref())?;
    Ok(out)
}

pub fn write_artifacts(rec: &SceneRecord, out: &PipelineOutput, gt: Option<&Perimeter>) -> Result<()> {
    let dir = &rec.out_dir;
    write_atomic(&dir.join("fused.ply"), write_ply(&out.fused).as_bytes())?;
    write_atomic(&dir.join("culled.ply"), write_ply(&out.culled).as_bytes())?;
    write_atomic(&dir.join("clusters.ply"), write_ply(&out.clustered).as_bytes())?;
    write_atomic(&dir.join("perimeter.txt"), write_perimeter(&out.perimeter).as_bytes())?;
    let xy = out.clustered.xy();
    let labels = out.clustered.labels.as_deref().unwrap_or(&[]);
    let svg = render_svg(&out.perimeter, gt, Some((&xy, labels)));
    write_atomic(&dir.join("scene.svg"), svg.as_bytes())?;
    if let Some(r) = &out.report {
        let csv = format!("{}\n{}\n", csv_header(), csv_row(&rec.scene_id, r));
        write_atomic(&dir.join("report.csv"), csv.as_bytes())?;
    }
    Ok(())
}
