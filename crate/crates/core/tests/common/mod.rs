//! Proptest strategies shared by the integration tests, plus the oracles.
#![allow(dead_code)]

mod oracle;

pub use oracle::*;

use lesion_harness::{ClassId, LabelVolume, MaskVolume, Volume};
use proptest::prelude::*;

/// Random mask up to `max` voxels per axis with a random fill density.
pub fn mask_strategy(max: [usize; 3]) -> impl Strategy<Value = MaskVolume> {
    (1..=max[0], 1..=max[1], 1..=max[2], 0.05f64..0.7)
        .prop_flat_map(|(nx, ny, nz, density)| {
            proptest::collection::vec(proptest::bool::weighted(density), nx * ny * nz)
                .prop_map(move |data| Volume::new(meta([nx, ny, nz]), data).unwrap())
        })
}

pub fn label_strategy(max: [usize; 3]) -> impl Strategy<Value = LabelVolume> {
    (1..=max[0], 1..=max[1], 1..=max[2]).prop_flat_map(|(nx, ny, nz)| {
        proptest::collection::vec(0u8..3, nx * ny * nz).prop_map(move |codes| {
            let data = codes.into_iter().map(|c| ClassId::from_u8(c).unwrap()).collect();
            Volume::new(meta([nx, ny, nz]), data).unwrap()
        })
    })
}

/// Gland-like blob: an ellipsoid near the grid centre with up to three
/// smaller ellipsoidal bumps centred inside it.
pub fn blob_strategy() -> impl Strategy<Value = MaskVolume> {
    let main = (3.0f64..8.0, 3.0f64..8.0, 3.0f64..7.0, -1.5f64..1.5, -1.5f64..1.5);
    let bump = (-0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5, 0.2f64..0.5);
    (main, proptest::collection::vec(bump, 0..=3)).prop_map(|((a, b, c, ox, oy), bumps)| {
        let dims = [20, 20, 16];
        let m = meta(dims);
        let centre = [9.5 + ox, 9.5 + oy, 7.5];
        let semi = [a, b, c];
        let mut ells = vec![(centre, semi)];
        for (u, v, w, scale) in bumps {
            let at = [centre[0] + u * a, centre[1] + v * b, centre[2] + w * c];
            ells.push((at, semi.map(|s| s * scale)));
        }
        Volume::from_fn(m, |i| {
            let p = m.coords(i).map(|v| v as f64);
            ells.iter().any(|(cc, ss)| {
                (0..3).map(|k| ((p[k] - cc[k]) / ss[k]).powi(2)).sum::<f64>() <= 1.0
            })
        })
        .unwrap()
    })
}

