//! Brute-force oracles, written for clarity over speed.
#![allow(dead_code)]

use std::collections::VecDeque;

use lesion_harness::lesions::Connectivity;
use lesion_harness::{GridMeta, MaskVolume, Volume};

pub fn meta(dims: [usize; 3]) -> GridMeta {
    GridMeta::new(dims, [1.0, 1.0, 1.0]).unwrap()
}

pub fn adjacent(a: [usize; 3], b: [usize; 3], conn: Connectivity) -> bool {
    let d: Vec<usize> = (0..3).map(|k| a[k].abs_diff(b[k])).collect();
    if d.iter().any(|&v| v > 1) || d.iter().all(|&v| v == 0) {
        return false;
    }
    let moved = d.iter().filter(|&&v| v == 1).count();
    match conn {
        Connectivity::Six => moved == 1,
        Connectivity::Eighteen => moved <= 2,
        Connectivity::TwentySix => true,
    }
}

/// Breadth-first flood fill over the 3x3x3 neighbourhood, filtered by
/// [`adjacent`]. Returns components sorted by their smallest voxel, voxels
/// ascending.
pub fn flood_fill(mask: &MaskVolume, conn: Connectivity) -> Vec<Vec<usize>> {
    let meta = mask.meta();
    let [nx, ny, nz] = meta.dims();
    let mut seen = vec![false; meta.len()];
    let mut out = Vec::new();
    for start in mask.foreground() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            let ca = meta.coords(a);
            for z in ca[2].saturating_sub(1)..(ca[2] + 2).min(nz) {
                for y in ca[1].saturating_sub(1)..(ca[1] + 2).min(ny) {
                    for x in ca[0].saturating_sub(1)..(ca[0] + 2).min(nx) {
                        let b = meta.index(x, y, z);
                        if mask[b] && !seen[b] && adjacent(ca, [x, y, z], conn) {
                            seen[b] = true;
                            comp.push(b);
                            queue.push_back(b);
                        }
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort();
    out
}

fn shifted(meta: &GridMeta, c: [usize; 3], o: [i32; 3]) -> Option<usize> {
    let [nx, ny, nz] = meta.dims();
    let x = c[0] as i64 + o[0] as i64;
    let y = c[1] as i64 + o[1] as i64;
    let z = c[2] as i64 + o[2] as i64;
    let inside = (0..nx as i64).contains(&x) && (0..ny as i64).contains(&y) && (0..nz as i64).contains(&z);
    inside.then(|| meta.index(x as usize, y as usize, z as usize))
}

/// Output voxel is set iff some offset lands on a foreground voxel.
pub fn brute_dilate(mask: &MaskVolume, offsets: &[[i32; 3]]) -> Vec<bool> {
    let meta = mask.meta();
    (0..meta.len())
        .map(|i| {
            let c = meta.coords(i);
            offsets
                .iter()
                .any(|&[dx, dy, dz]| shifted(meta, c, [-dx, -dy, -dz]).is_some_and(|j| mask[j]))
        })
        .collect()
}

/// Output voxel is set iff every offset lands on an in-grid foreground voxel.
pub fn brute_erode(mask: &MaskVolume, offsets: &[[i32; 3]]) -> Vec<bool> {
    let meta = mask.meta();
    (0..meta.len())
        .map(|i| {
            let c = meta.coords(i);
            offsets.iter().all(|&o| shifted(meta, c, o).is_some_and(|j| mask[j]))
        })
        .collect()
}

/// Closing on an explicitly padded copy of the grid, cropped back.
pub fn brute_close(mask: &MaskVolume, offsets: &[[i32; 3]]) -> Vec<bool> {
    let pad: Vec<usize> = (0..3)
        .map(|k| offsets.iter().map(|o| o[k].unsigned_abs() as usize).max().unwrap_or(0))
        .collect();
    let [nx, ny, nz] = mask.meta().dims();
    let big = meta([nx + 2 * pad[0], ny + 2 * pad[1], nz + 2 * pad[2]]);
    let padded = Volume::from_fn(big, |i| {
        let [x, y, z] = big.coords(i);
        let inner = |v: usize, p: usize, n: usize| v >= p && v < p + n;
        inner(x, pad[0], nx)
            && inner(y, pad[1], ny)
            && inner(z, pad[2], nz)
            && *mask.at(x - pad[0], y - pad[1], z - pad[2])
    })
    .unwrap();
    let dilated = Volume::new(big, brute_dilate(&padded, offsets)).unwrap();
    let closed = brute_erode(&dilated, offsets);
    let m = mask.meta();
    (0..m.len())
        .map(|i| {
            let [x, y, z] = m.coords(i);
            closed[big.index(x + pad[0], y + pad[1], z + pad[2])]
        })
        .collect()
}
