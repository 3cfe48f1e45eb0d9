//! Flat `key=value` configuration text.

use std::fmt::Write as _;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use perimkit::cluster::{ClusterParams, RansacParams};
use perimkit::hull::{DEFAULT_ALPHA, DEFAULT_D_CULL, DEFAULT_N_POINTS, DEFAULT_VOXEL};
use perimkit::metrics::{DEFAULT_IOU_RESOLUTION, DEFAULT_TAU_MATCH};
use perimkit::perimeter::{
    PerimeterParams, TourMetric, DEFAULT_E_MERGE, DEFAULT_MIN_WALL_LENGTH, DEFAULT_THETA_MERGE_DEG,
};

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
/// Returns `(line number, key, value)` in file order.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key=value, got {raw:?}", i + 1);
        };
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("line {line}: bad value {value:?} for {key}: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterMethod {
    #[default]
    Optimizer,
    Ransac,
}

impl FromStr for ClusterMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "optimizer" => Ok(Self::Optimizer),
            "ransac" => Ok(Self::Ransac),
            _ => Err(format!("unknown cluster method {s:?} (optimizer|ransac)")),
        }
    }
}

impl std::fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Optimizer => "optimizer",
            Self::Ransac => "ransac",
        })
    }
}

fn parse_metric(s: &str) -> std::result::Result<TourMetric, String> {
    match s {
        "extent" => Ok(TourMetric::ExtentGap),
        "median" => Ok(TourMetric::Median),
        _ => Err(format!("unknown tour metric {s:?} (extent|median)")),
    }
}

fn metric_name(m: TourMetric) -> &'static str {
    match m {
        TourMetric::ExtentGap => "extent",
        TourMetric::Median => "median",
    }
}

macro_rules! pipeline_config {
    ($( $(#[$doc:meta])* $field:ident : $ty:ty = $default:expr ),* $(,)?) => {
        /// Every stage parameter of the end-to-end pipeline.
        #[derive(Debug, Clone, PartialEq)]
        pub struct PipelineConfig {
            $( $(#[$doc])* pub $field: $ty, )*
        }

        impl Default for PipelineConfig {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }

        impl PipelineConfig {
            pub const KEYS: &'static [&'static str] = &[$( stringify!($field) ),*];

            fn set(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
                match key {
                    $( stringify!($field) => self.$field = FieldText::parse_text(line, key, value)?, )*
                    _ => bail!("line {line}: unknown config key {key:?}"),
                }
                Ok(())
            }

            /// Serializes every key, one per line, in declaration order.
            pub fn to_text(&self) -> String {
                let mut s = String::new();
                $( writeln!(s, "{}={}", stringify!($field), self.$field.to_text()).unwrap(); )*
                s
            }
        }
    };
}

/// Text form of a config value.
trait FieldText: Sized {
    fn parse_text(line: usize, key: &str, value: &str) -> Result<Self>;
    fn to_text(&self) -> String;
}

macro_rules! plain_field {
    ($($t:ty),*) => {$(
        impl FieldText for $t {
            fn parse_text(line: usize, key: &str, value: &str) -> Result<Self> {
                parse_value(line, key, value)
            }
            fn to_text(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

plain_field!(f64, usize, u64, bool, ClusterMethod);

impl FieldText for TourMetric {
    fn parse_text(line: usize, key: &str, value: &str) -> Result<Self> {
        parse_metric(value).map_err(|e| anyhow::anyhow!("line {line}: {key}: {e}"))
    }
    fn to_text(&self) -> String {
        metric_name(*self).to_string()
    }
}

pipeline_config! {
    /// Voxel edge for point fusion, meters.
    voxel: f64 = DEFAULT_VOXEL,
    /// Alpha-shape parameter, 1/meters.
    alpha: f64 = DEFAULT_ALPHA,
    d_cull: f64 = DEFAULT_D_CULL,
    n_points: usize = DEFAULT_N_POINTS,
    /// Neighborhood size for normal estimation.
    k_nn: usize = 16,
    method: ClusterMethod = ClusterMethod::Optimizer,
    k: usize = 12,
    beta: f64 = 1.0,
    lr: f64 = 0.05,
    iters: usize = 400,
    min_cluster_points: usize = 20,
    /// XY linking radius when splitting clusters into connected pieces.
    split_radius: f64 = 0.3,
    ransac_tol: f64 = 0.08,
    ransac_min_inliers: usize = 40,
    ransac_iterations: usize = 500,
    theta_merge_deg: f64 = DEFAULT_THETA_MERGE_DEG,
    e_merge: f64 = DEFAULT_E_MERGE,
    /// Shortest wall extent kept after merging, meters.
    min_wall_length: f64 = DEFAULT_MIN_WALL_LENGTH,
    tour_metric: TourMetric = TourMetric::ExtentGap,
    snap_enabled: bool = true,
    tau_match: f64 = DEFAULT_TAU_MATCH,
    iou_resolution: f64 = DEFAULT_IOU_RESOLUTION,
    frame_stride: usize = 1,
    seed: u64 = 0,
    skip_alpha: bool = false,
    skip_mask: bool = false,
}

impl PipelineConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (line, key, value) in parse_pairs(text)? {
            cfg.set(line, &key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_text(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Applies `key=value` overrides, as given on the command line.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        self.set(0, key, value)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("voxel", self.voxel),
            ("alpha", self.alpha),
            ("d_cull", self.d_cull),
            ("split_radius", self.split_radius),
            ("ransac_tol", self.ransac_tol),
            ("iou_resolution", self.iou_resolution),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{k} must be positive, got {v}");
            }
        }
        if self.n_points == 0 {
            bail!("n_points must be >= 1");
        }
        if self.k_nn < 3 {
            bail!("k_nn must be >= 3");
        }
        if self.frame_stride == 0 {
            bail!("frame_stride must be >= 1");
        }
        if !(self.theta_merge_deg > 0.0 && self.theta_merge_deg <= 90.0) {
            bail!("theta_merge_deg must be in (0, 90]");
        }
        if !(self.e_merge >= 0.0) || !(self.tau_match >= 0.0) {
            bail!("e_merge and tau_match must be >= 0");
        }
        self.cluster_params().validate()?;
        Ok(())
    }

    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            k: self.k,
            beta: self.beta,
            lr: self.lr,
            iters: self.iters,
            seed: self.seed,
            min_cluster_points: self.min_cluster_points,
            ..ClusterParams::default()
        }
    }

    pub fn ransac_params(&self) -> RansacParams {
        RansacParams {
            inlier_tol: self.ransac_tol,
            min_inliers: self.ransac_min_inliers,
            max_planes: self.k,
            iterations: self.ransac_iterations,
            seed: self.seed,
        }
    }

    pub fn perimeter_params(&self) -> PerimeterParams {
        PerimeterParams {
            theta_merge_deg: self.theta_merge_deg,
            e_merge: self.e_merge,
            snap: self.snap_enabled,
            tour_metric: self.tour_metric,
            min_wall_length: self.min_wall_length,
        }
    }
}
