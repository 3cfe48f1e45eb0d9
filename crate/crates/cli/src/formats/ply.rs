//! ASCII PLY point clouds: `x y z [nx ny nz] [label]`, label −1 for noise.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use perimkit::{Label, PointCloud, UnitVec3, Vec3, NOISE};

pub fn write_ply(cloud: &PointCloud) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    writeln!(s, "element vertex {}", cloud.len()).unwrap();
    for p in ["x", "y", "z"] {
        writeln!(s, "property double {p}").unwrap();
    }
    if cloud.normals.is_some() {
        for p in ["nx", "ny", "nz"] {
            writeln!(s, "property double {p}").unwrap();
        }
    }
    if cloud.labels.is_some() {
        s.push_str("property int label\n");
    }
    s.push_str("end_header\n");
    for i in 0..cloud.len() {
        let p = cloud.points[i];
        write!(s, "{} {} {}", p.x, p.y, p.z).unwrap();
        if let Some(n) = &cloud.normals {
            write!(s, " {} {} {}", n[i].x, n[i].y, n[i].z).unwrap();
        }
        if let Some(l) = &cloud.labels {
            let v: i64 = if l[i] == NOISE { -1 } else { l[i] as i64 };
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn read_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "ply")) => {}
        _ => bail!("not a PLY file (missing magic)"),
    }
    let mut count: Option<usize> = None;
    let mut props: Vec<String> = Vec::new();
    let mut in_vertex = false;
    let mut ended = false;
    for (i, line) in lines.by_ref() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("ascii") {
                    bail!("line {}: only ascii PLY is supported", i + 1);
                }
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = tok.next().unwrap_or("");
                in_vertex = name == "vertex";
                if in_vertex {
                    let n = tok.next().context("vertex count missing")?;
                    count = Some(n.parse().with_context(|| format!("line {}: bad count", i + 1))?);
                } else if count.is_none() {
                    bail!("line {}: elements before vertex are not supported", i + 1);
                }
            }
            Some("property") if in_vertex => {
                let ty = tok.next().context("property type missing")?;
                if ty == "list" {
                    bail!("line {}: list properties are not supported on vertices", i + 1);
                }
                props.push(tok.next().context("property name missing")?.to_string());
            }
            Some("property") => {}
            Some("end_header") => {
                ended = true;
                break;
            }
            Some(other) => bail!("line {}: unexpected header keyword {other:?}", i + 1),
        }
    }
    if !ended {
        bail!("PLY header not terminated");
    }
    let n = count.context("no vertex element")?;
    let col = |name: &str| props.iter().position(|p| p == name);
    let (Some(ix), Some(iy), Some(iz)) = (col("x"), col("y"), col("z")) else {
        bail!("vertex element needs x, y and z");
    };
    let normal_cols = match (col("nx"), col("ny"), col("nz")) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        _ => None,
    };
    let label_col = col("label");
    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(if normal_cols.is_some() { n } else { 0 });
    let mut labels = Vec::with_capacity(if label_col.is_some() { n } else { 0 });
    for _ in 0..n {
        let (i, line) = lines.next().context("fewer vertices than declared")?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() < props.len() {
            bail!("line {}: expected {} values", i + 1, props.len());
        }
        let f = |c: usize| -> Result<f64> {
            vals[c].parse().with_context(|| format!("line {}: bad number {:?}", i + 1, vals[c]))
        };
        points.push(Vec3::new(f(ix)?, f(iy)?, f(iz)?));
        if let Some([a, b, c]) = normal_cols {
            let v = Vec3::new(f(a)?, f(b)?, f(c)?);
            if !(v.norm() > 0.0) {
                bail!("line {}: zero normal", i + 1);
            }
            normals.push(UnitVec3::new_normalize(v));
        }
        if let Some(c) = label_col {
            let v: i64 = vals[c]
                .parse()
                .with_context(|| format!("line {}: bad label {:?}", i + 1, vals[c]))?;
            labels.push(if v < 0 { NOISE } else { v as Label });
        }
    }
    let mut cloud = PointCloud::new(points);
    if normal_cols.is_some() {
        cloud = cloud.with_normals(normals)?;
    }
    if label_col.is_some() {
        cloud = cloud.with_labels(labels)?;
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_everything() {
        let cloud = PointCloud::new(vec![Vec3::new(0.1, -2.5, 1e-17), Vec3::new(3.0, 4.0, 5.0)])
            .with_normals(vec![Vec3::x_axis(), UnitVec3::new_normalize(Vec3::new(1.0, 1.0, 0.0))])
            .unwrap()
            .with_labels(vec![3, NOISE])
            .unwrap();
        let text = write_ply(&cloud);
        assert!(text.contains("\n0.1 -2.5 0.00000000000000001 1 0 0 3\n"));
        assert!(text.ends_with(" -1\n"));
        let back = read_ply(&text).unwrap();
        assert_eq!(back.points, cloud.points);
        assert_eq!(back.labels, cloud.labels);
        let (a, b) = (back.normals.unwrap(), cloud.normals.unwrap());
        assert!(a.iter().zip(&b).all(|(x, y)| (x.into_inner() - y.into_inner()).norm() < 1e-15));
    }

    #[test]
    fn reads_float_properties_in_any_order() {
        let text = "ply\nformat ascii 1.0\ncomment x\nelement vertex 1\nproperty float z\nproperty float y\nproperty float x\nelement face 0\nproperty list uchar int vertex_indices\nend_header\n3 2 1\n";
        let c = read_ply(text).unwrap();
        assert_eq!(c.points, vec![Vec3::new(1.0, 2.0, 3.0)]);
        assert!(c.normals.is_none() && c.labels.is_none());
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_ply("").is_err());
        assert!(read_ply("ply\nformat binary_little_endian 1.0\nend_header\n").is_err());
        assert!(read_ply("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n").is_err());
        assert!(read_ply("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n1 2\n").is_err());
    }
}
