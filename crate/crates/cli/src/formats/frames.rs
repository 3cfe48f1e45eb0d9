//! Posed frame sequences: a `frames.cfg` index next to per-frame PGM images,
//! DPTH depth rasters and PGM wall masks.
//!
//! ```text
//! fx=40
//! fy=40
//! cx=31.5
//! cy=23.5
//! width=64
//! height=48
//! frame.0.image=frame_0000.pgm
//! frame.0.depth=frame_0000.dpth
//! frame.0.mask=frame_0000_mask.pgm
//! frame.0.rotation=r00 r01 r02 r10 r11 r12 r20 r21 r22
//! frame.0.translation=tx ty tz
//! ```
//! Poses map world to camera.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::Matrix3;
use perimkit::projection::CameraFrame;
use perimkit::{Intrinsics, RigidPose, Vec3};

use super::raster::{read_depth, read_mask_pgm, read_pgm, write_depth, write_mask_pgm, write_pgm};
use crate::config::{parse_pairs, parse_value};
use crate::io::write_atomic;

pub const INDEX_FILE: &str = "frames.cfg";

pub fn write_frames(dir: &Path, frames: &[CameraFrame]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let Some(first) = frames.first() else {
        bail!("no frames to write");
    };
    let k = first.intrinsics;
    let mut idx = String::new();
    writeln!(idx, "fx={}\nfy={}\ncx={}\ncy={}\nwidth={}\nheight={}", k.fx, k.fy, k.cx, k.cy, k.width, k.height)
        .unwrap();
    for (i, f) in frames.iter().enumerate() {
        if f.intrinsics != k {
            bail!("frame {i}: intrinsics differ from frame 0");
        }
        let stem = format!("frame_{i:04}");
        write_atomic(&dir.join(format!("{stem}.pgm")), &write_pgm(&f.image))?;
        writeln!(idx, "frame.{i}.image={stem}.pgm").unwrap();
        if let Some(d) = &f.depth {
            write_atomic(&dir.join(format!("{stem}.dpth")), &write_depth(d))?;
            writeln!(idx, "frame.{i}.depth={stem}.dpth").unwrap();
        }
        if let Some(m) = &f.wall_mask {
            write_atomic(&dir.join(format!("{stem}_mask.pgm")), &write_mask_pgm(m))?;
            writeln!(idx, "frame.{i}.mask={stem}_mask.pgm").unwrap();
        }
        let r = f.pose.rotation();
        let t = f.pose.translation();
        let rot: Vec<String> = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .map(|(a, b)| r[(a, b)].to_string())
            .collect();
        writeln!(idx, "frame.{i}.rotation={}", rot.join(" ")).unwrap();
        writeln!(idx, "frame.{i}.translation={} {} {}", t.x, t.y, t.z).unwrap();
    }
    write_atomic(&dir.join(INDEX_FILE), idx.as_bytes())
}

#[derive(Default)]
struct FrameEntry {
    image: Option<String>,
    depth: Option<String>,
    mask: Option<String>,
    rotation: Option<Matrix3<f64>>,
    translation: Option<Vec3>,
}

fn floats(line: usize, key: &str, value: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = value
        .split_whitespace()
        .map(|t| parse_value(line, key, t))
        .collect::<Result<_>>()?;
    if v.len() != n {
        bail!("line {line}: {key} needs {n} numbers, got {}", v.len());
    }
    Ok(v)
}

pub fn read_frames(dir: &Path) -> Result<Vec<CameraFrame>> {
    let index = dir.join(INDEX_FILE);
    let text = std::fs::read_to_string(&index).with_context(|| format!("reading {}", index.display()))?;
    let (mut fx, mut fy, mut cx, mut cy) = (None, None, None, None);
    let (mut width, mut height) = (None, None);
    let mut entries: BTreeMap<usize, FrameEntry> = BTreeMap::new();
    for (line, key, value) in parse_pairs(&text)? {
        match key.as_str() {
            "fx" => fx = Some(parse_value::<f64>(line, &key, &value)?),
            "fy" => fy = Some(parse_value::<f64>(line, &key, &value)?),
            "cx" => cx = Some(parse_value::<f64>(line, &key, &value)?),
            "cy" => cy = Some(parse_value::<f64>(line, &key, &value)?),
            "width" => width = Some(parse_value::<usize>(line, &key, &value)?),
            "height" => height = Some(parse_value::<usize>(line, &key, &value)?),
            _ => {
                let parts: Vec<&str> = key.split('.').collect();
                let ["frame", id, field] = parts[..] else {
                    bail!("line {line}: unknown key {key:?}");
                };
                let id: usize = parse_value(line, &key, id)?;
                let e = entries.entry(id).or_default();
                match field {
                    "image" => e.image = Some(value),
                    "depth" => e.depth = Some(value),
                    "mask" => e.mask = Some(value),
                    "rotation" => {
                        let v = floats(line, &key, &value, 9)?;
                        e.rotation = Some(Matrix3::from_row_slice(&v));
                    }
                    "translation" => {
                        let v = floats(line, &key, &value, 3)?;
                        e.translation = Some(Vec3::new(v[0], v[1], v[2]));
                    }
                    _ => bail!("line {line}: unknown frame field {field:?}"),
                }
            }
        }
    }
    let need = |v: Option<f64>, k: &str| v.with_context(|| format!("{}: missing {k}", index.display()));
    let k = Intrinsics::new(
        need(fx, "fx")?,
        need(fy, "fy")?,
        need(cx, "cx")?,
        need(cy, "cy")?,
        width.context("missing width")?,
        height.context("missing height")?,
    )?;
    let read = |name: &str| {
        let p = dir.join(name);
        std::fs::read(&p).with_context(|| format!("reading {}", p.display()))
    };
    let mut frames = Vec::with_capacity(entries.len());
    for (i, (id, e)) in entries.into_iter().enumerate() {
        if id != i {
            bail!("frame ids must be 0..n without gaps; found {id} at position {i}");
        }
        let pose = RigidPose::new(
            e.rotation.with_context(|| format!("frame {id}: missing rotation"))?,
            e.translation.with_context(|| format!("frame {id}: missing translation"))?,
        )
        .with_context(|| format!("frame {id}"))?;
        let image = read_pgm(&read(e.image.as_deref().with_context(|| format!("frame {id}: missing image"))?)?)?;
        let mut f = CameraFrame::new(k, pose, image).with_context(|| format!("frame {id}"))?;
        if let Some(d) = &e.depth {
            f = f.with_depth(read_depth(&read(d)?)?)?;
        }
        if let Some(m) = &e.mask {
            f = f.with_mask(read_mask_pgm(&read(m)?)?)?;
        }
        frames.push(f);
    }
    Ok(frames)
}
