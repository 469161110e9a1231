use dmdsal::colorspace::{chroma_magnitude, lab_pixel, rgb_to_cielab, rgb_to_ycbcr, rgb_to_yuv, Channel};
use dmdsal::RgbImage;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.240_454_2, -1.537_138_5, -0.498_531_4],
    [-0.969_266_0, 1.876_010_8, 0.041_556_0],
    [0.055_643_4, -0.204_025_9, 1.057_225_2],
];
const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

fn lab_to_rgb([l, a, b]: [f64; 3]) -> [f64; 3] {
    let d = 6.0 / 29.0;
    let finv = |t: f64| if t > d { t * t * t } else { 3.0 * d * d * (t - 4.0 / 29.0) };
    let fy = (l + 16.0) / 116.0;
    let xyz = [
        WHITE[0] * finv(fy + a / 500.0),
        WHITE[1] * finv(fy),
        WHITE[2] * finv(fy - b / 200.0),
    ];
    let mut rgb = [0.0; 3];
    for (c, row) in rgb.iter_mut().zip(XYZ_TO_RGB) {
        let lin: f64 = row.iter().zip(xyz).map(|(m, v)| m * v).sum();
        let enc = if lin <= 0.003_130_8 {
            12.92 * lin
        } else {
            1.055 * lin.powf(1.0 / 2.4) - 0.055
        };
        *c = 255.0 * enc;
    }
    rgb
}

#[test]
fn lab_round_trip_within_one_code() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let px: [u8; 3] = [rng.gen(), rng.gen(), rng.gen()];
        let back = lab_to_rgb(lab_pixel(px));
        for c in 0..3 {
            assert!(
                (back[c] - f64::from(px[c])).abs() <= 1.0,
                "{px:?} -> {back:?}"
            );
        }
    }
}

proptest! {
    #[test]
    fn gray_pixels_are_neutral(v in any::<u8>(), w in 3usize..8, h in 3usize..8) {
        let img = RgbImage::from_fn(w, h, |_, _| [v, v, v]).unwrap();
        let (_, cb, cr) = rgb_to_ycbcr(&img);
        let (_, u, vv) = rgb_to_yuv(&img);
        let (_, a, b) = rgb_to_cielab(&img);
        for p in [&cb, &cr, &u, &vv, &a, &b] {
            let m = chroma_magnitude(p).unwrap();
            prop_assert!(m.values.iter().all(|&x| x == 0.0));
        }
        prop_assert!(cb.values.iter().all(|&x| x == 128.0));
        prop_assert!(u.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn chroma_magnitudes_stay_in_unit_interval(px in any::<[u8; 3]>()) {
        let img = RgbImage::from_fn(3, 3, |_, _| px).unwrap();
        let (_, cb, cr) = rgb_to_ycbcr(&img);
        let (_, u, v) = rgb_to_yuv(&img);
        let (_, a, b) = rgb_to_cielab(&img);
        for p in [&cb, &cr, &u, &v, &a, &b] {
            let m = chroma_magnitude(p).unwrap();
            prop_assert!(m.values.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        prop_assert_eq!(a.channel, Channel::A);
    }
}
