use std::collections::HashMap;

use super::SoftAssignment;
use crate::spatial::Grid2;
use crate::types::{Label, Vec2, NOISE};

/// Argmax labels; the reject column and clusters smaller than
/// `min_cluster_points` become [`NOISE`]. Ties go to the lowest column.
pub fn extract_labels(assign: &SoftAssignment, min_cluster_points: usize) -> Vec<Label> {
    let k = assign.k();
    let p = assign.probs();
    let mut labels: Vec<Label> = p
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for a in 1..=k {
                if row[a] > row[best] {
                    best = a;
                }
            }
            if best == k {
                NOISE
            } else {
                best as Label
            }
        })
        .collect();
    drop_small(&mut labels, min_cluster_points);
    labels
}

fn drop_small(labels: &mut [Label], min_size: usize) {
    let mut counts: HashMap<Label, usize> = HashMap::new();
    for &l in labels.iter() {
        if l != NOISE {
            *counts.entry(l).or_default() += 1;
        }
    }
    for l in labels.iter_mut() {
        if *l != NOISE && counts[l] < min_size {
            *l = NOISE;
        }
    }
}

/// Splits every cluster into connected pieces in XY, linking points closer
/// than `radius`. Pieces smaller than `min_size` become [`NOISE`]. New labels
/// are numbered by first appearance.
pub fn split_components(xy: &[Vec2], labels: &[Label], radius: f64, min_size: usize) -> Vec<Label> {
    let mut by_label: HashMap<Label, Vec<usize>> = HashMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l != NOISE {
            by_label.entry(l).or_default().push(i);
        }
    }
    // Component id per point, keyed (label, component).
    let mut comp: Vec<Option<(Label, usize)>> = vec![None; labels.len()];
    let mut keys: Vec<Label> = by_label.keys().copied().collect();
    keys.sort_unstable();
    for l in keys {
        let members = &by_label[&l];
        let pts: Vec<Vec2> = members.iter().map(|&i| xy[i]).collect();
        let grid = Grid2::new(&pts, radius.max(1e-6));
        let mut seen = vec![false; pts.len()];
        let mut next = 0;
        for s in 0..pts.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                comp[members[u]] = Some((l, next));
                for w in grid.within(&pts[u], radius) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
    }
    let mut sizes: HashMap<(Label, usize), usize> = HashMap::new();
    for c in comp.iter().flatten() {
        *sizes.entry(*c).or_default() += 1;
    }
    let mut fresh: HashMap<(Label, usize), Label> = HashMap::new();
    comp.iter()
        .map(|c| match c {
            Some(key) if sizes[key] >= min_size => {
                let n = fresh.len() as Label;
                *fresh.entry(*key).or_insert(n)
            }
            _ => NOISE,
        })
        .collect()
}

/// Renumbers labels 0.. by first appearance, keeping [`NOISE`].
pub fn remap_compact(labels: &[Label]) -> Vec<Label> {
    let mut map: HashMap<Label, Label> = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            if l == NOISE {
                NOISE
            } else {
                let n = map.len() as Label;
                *map.entry(l).or_insert(n)
            }
        })
        .collect()
}
