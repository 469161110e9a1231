use dmdsal::colorspace::{lightness_plane, Channel, ChannelPlane};
use dmdsal::luminance::{build_luminance_sequence, plane_singular_values, svd_reconstruct_range, LuminanceConfig};
use dmdsal::RgbImage;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_plane(rng: &mut ChaCha8Rng, h: usize, w: usize) -> ChannelPlane {
    ChannelPlane::new(Channel::L, DMatrix::from_fn(h, w, |_, _| rng.gen_range(0.0..100.0))).unwrap()
}

#[test]
fn eckart_young_on_random_planes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let p = random_plane(&mut rng, 8, 8);
        let s = plane_singular_values(&p).unwrap();
        for k in 1..8 {
            let approx = svd_reconstruct_range(&p, 1, k).unwrap();
            let err = (&p.values - &approx.values).norm_squared();
            let tail: f64 = s[k..].iter().map(|x| x * x).sum();
            assert!((err - tail).abs() <= 1e-9 * tail, "k = {k}: {err} vs {tail}");
        }
    }
}

proptest! {
    #[test]
    fn snapshot_steps_are_singular_values(seed in any::<u64>(), h in 6usize..14, w in 6usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_plane(&mut rng, h, w);
        let cfg = LuminanceConfig::default();
        let seq = build_luminance_sequence(&p, &cfg).unwrap();
        let s = plane_singular_values(&p).unwrap();
        prop_assert_eq!(seq.ncols(), h.min(w) - 2);
        let x = seq.data();
        prop_assert!((x.column(0).norm() - s[2]).abs() <= 1e-9 * s[0]);
        for k in 0..seq.ncols() - 1 {
            let step = (x.column(k + 1) - x.column(k)).norm();
            prop_assert!((step - s[cfg.first_index + k]).abs() <= 1e-9 * s[0]);
        }
    }
}

#[test]
fn disk_image_steps_match_singular_values() {
    let img = RgbImage::from_fn(64, 64, |x, y| {
        let (dx, dy) = (x as f64 - 31.5, y as f64 - 31.5);
        if dx * dx + dy * dy <= 100.0 { [220, 30, 30] } else { [120, 120, 120] }
    })
    .unwrap();
    let p = lightness_plane(&img);
    let s = plane_singular_values(&p).unwrap();
    let seq = build_luminance_sequence(&p, &LuminanceConfig::default()).unwrap();
    for k in 0..seq.ncols() - 1 {
        let step = (seq.data().column(k + 1) - seq.data().column(k)).norm();
        assert!((step - s[3 + k]).abs() <= 1e-9 * s[0]);
    }
}
