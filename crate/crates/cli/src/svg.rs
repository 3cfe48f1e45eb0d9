//! Plan-view SVG at 50 px per meter, +y up.

use std::fmt::Write as _;

use perimkit::perimeter::Perimeter;
use perimkit::{Label, Vec2, NOISE};

pub const PX_PER_M: f64 = 50.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

struct Frame {
    min: Vec2,
    max: Vec2,
}

impl Frame {
    fn px(&self, p: &Vec2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * PX_PER_M,
            MARGIN + (self.max.y - p.y) * PX_PER_M,
        )
    }
}

fn path(frame: &Frame, corners: &[Vec2]) -> String {
    let mut d = String::new();
    for (i, c) in corners.iter().enumerate() {
        let (x, y) = frame.px(c);
        write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" }).unwrap();
    }
    d.push('Z');
    d
}

/// Predicted perimeter, optional dashed ground truth, optional points colored
/// by label (noise in light gray).
pub fn render_svg(pred: &Perimeter, gt: Option<&Perimeter>, points: Option<(&[Vec2], &[Label])>) -> String {
    let mut all: Vec<Vec2> = pred.corners.clone();
    if let Some(g) = gt {
        all.extend(&g.corners);
    }
    if let Some((pts, _)) = points {
        all.extend(pts);
    }
    let (mut min, mut max) = (all[0], all[0]);
    for p in &all {
        min = min.inf(p);
        max = max.sup(p);
    }
    let frame = Frame { min, max };
    let w = 2.0 * MARGIN + (max.x - min.x) * PX_PER_M;
    let h = 2.0 * MARGIN + (max.y - min.y) * PX_PER_M;
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">"
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    if let Some((pts, labels)) = points {
        s.push_str("<g stroke=\"none\">\n");
        for (p, &l) in pts.iter().zip(labels) {
            let (x, y) = frame.px(p);
            let color = if l == NOISE { "#d0d0d0" } else { PALETTE[l as usize % PALETTE.len()] };
            writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.5\" fill=\"{color}\"/>").unwrap();
        }
        s.push_str("</g>\n");
    }
    if let Some(g) = gt {
        writeln!(
            s,
            "<path class=\"gt\" d=\"{}\" fill=\"none\" stroke=\"#555555\" stroke-width=\"2\" stroke-dasharray=\"8 5\"/>",
            path(&frame, &g.corners)
        )
        .unwrap();
    }
    writeln!(
        s,
        "<path class=\"pred\" d=\"{}\" fill=\"none\" stroke=\"#c00000\" stroke-width=\"2.5\"/>",
        path(&frame, &pred.corners)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}
