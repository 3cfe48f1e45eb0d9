//! Perimeter polygons as text: one `x y` corner per line, counter-clockwise.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use perimkit::perimeter::Perimeter;
use perimkit::Vec2;

pub fn write_perimeter(p: &Perimeter) -> String {
    let mut s = format!("# perimeter corners: {}\n", p.corners.len());
    for c in &p.corners {
        writeln!(s, "{} {}", c.x, c.y).unwrap();
    }
    s
}

pub fn read_perimeter(text: &str) -> Result<Perimeter> {
    let mut corners = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("line {}: bad number in {raw:?}", i + 1))?;
        if v.len() != 2 {
            bail!("line {}: expected `x y`, got {raw:?}", i + 1);
        }
        corners.push(Vec2::new(v[0], v[1]));
    }
    Ok(Perimeter::new(corners)?)
}
