//! CSV rows for evaluation reports.

use perimkit::metrics::EvalReport;

pub fn csv_header() -> &'static str {
    "scene_id,iou2d,corner_error_m,spurious_fraction"
}

pub fn csv_row(scene_id: &str, r: &EvalReport) -> String {
    format!("{scene_id},{},{},{}", r.iou2d, r.corner_error, r.spurious_fraction)
}

/// Header for the ablation sweep: one row per scene, arm and stride.
pub fn ablation_header() -> &'static str {
    "scene_id,arm,frame_stride,status,iou2d,corner_error_m,spurious_fraction"
}

pub fn ablation_row(scene_id: &str, arm: &str, stride: usize, r: Result<&EvalReport, &str>) -> String {
    match r {
        Ok(r) => format!(
            "{scene_id},{arm},{stride},ok,{},{},{}",
            r.iou2d, r.corner_error, r.spurious_fraction
        ),
        Err(stage) => format!("{scene_id},{arm},{stride},failed:{stage},,,"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_layout() {
        let r = EvalReport {
            iou2d: 0.5,
            corner_error: 0.25,
            spurious_fraction: 0.0,
            matched_corners: 4,
        };
        assert_eq!(csv_row("s1", &r), "s1,0.5,0.25,0");
        assert_eq!(csv_header().split(',').count(), csv_row("s1", &r).split(',').count());
        assert_eq!(
            ablation_row("s1", "no_alpha", 1, Err("fit")),
            "s1,no_alpha,1,failed:fit,,,"
        );
        assert_eq!(ablation_header().split(',').count(), 7);
    }
}
