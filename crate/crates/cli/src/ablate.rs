//! Ablation sweep: stage-skip arms for every scene, frame-stride arms for
//! frame sequences.

use anyhow::Result;
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::pipeline::{load_gt, load_input, process, SceneInput, SceneRecord};
use crate::report::{ablation_header, ablation_row};

pub const STRIDES: [usize; 6] = [1, 2, 4, 8, 16, 32];

/// One configuration of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub name: &'static str,
    pub config: PipelineConfig,
}

pub fn arms(input: &SceneInput, base: &PipelineConfig) -> Vec<Arm> {
    let mut out = vec![
        Arm {
            name: "full",
            config: base.clone(),
        },
        Arm {
            name: "no_alpha",
            config: PipelineConfig {
                skip_alpha: true,
                ..base.clone()
            },
        },
        Arm {
            name: "no_mask",
            config: PipelineConfig {
                skip_mask: true,
                ..base.clone()
            },
        },
    ];
    if matches!(input, SceneInput::Frames(_)) {
        out.extend(STRIDES.iter().filter(|&&s| s != base.frame_stride).map(|&s| Arm {
            name: "stride",
            config: PipelineConfig {
                frame_stride: s,
                ..base.clone()
            },
        }));
    }
    out
}

/// Runs every arm of every scene (ground truth required) and returns the CSV
/// text, rows in scene then arm order. A failing arm becomes a `failed` row.
pub fn run_ablation(scenes: &[SceneRecord], base: &PipelineConfig) -> Result<String> {
    let loaded: Vec<(String, SceneInput, perimkit::perimeter::Perimeter)> = scenes
        .iter()
        .map(|rec| {
            let gt = rec
                .gt
                .as_deref()
                .ok_or_else(|| anyhow::anyhow!("scene {}: ablation needs ground truth", rec.scene_id))?;
            Ok((rec.scene_id.clone(), load_input(&rec.input)?, load_gt(gt)?))
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, Arm)> = loaded
        .iter()
        .enumerate()
        .flat_map(|(i, (_, input, _))| arms(input, base).into_iter().map(move |a| (i, a)))
        .collect();
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|(i, arm)| {
            let (id, input, gt) = &loaded[*i];
            let stride = arm.config.frame_stride;
            match process(input, Some(gt), &arm.config) {
                Ok(out) => ablation_row(id, arm.name, stride, Ok(out.report.as_ref().unwrap())),
                Err(e) => ablation_row(id, arm.name, stride, Err(e.stage)),
            }
        })
        .collect();
    let mut csv = String::from(ablation_header());
    csv.push('\n');
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use perimkit::PointCloud;

    #[test]
    fn cloud_inputs_get_only_skip_arms() {
        let base = PipelineConfig::default();
        let a = arms(&SceneInput::Cloud(PointCloud::default()), &base);
        let names: Vec<&str> = a.iter().map(|a| a.name).collect();
        assert_eq!(names, ["full", "no_alpha", "no_mask"]);
        let f = arms(&SceneInput::Frames(Vec::new()), &base);
        assert_eq!(f.len(), 3 + 5);
        let strides: Vec<usize> = f.iter().map(|a| a.config.frame_stride).collect();
        assert_eq!(strides, [1, 1, 1, 2, 4, 8, 16, 32]);
    }
}
