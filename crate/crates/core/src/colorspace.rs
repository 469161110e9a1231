//! RGB to YUV, YCbCr and CIELab conversions.
//!
//! Luma uses BT.601 weights, YCbCr is full-range JFIF, YUV uses the analog
//! scale factors and Lab is sRGB/D65. Every formula is written in terms of
//! differences from the green channel so that achromatic pixels land exactly
//! on the neutral axis (U = V = 0, Cb = Cr = 128, a = b = 0) in floating point.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{min_max_normalize, RgbImage};

/// D65 reference white.
pub const D65_WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

/// Largest attainable |chroma - neutral| over the 8-bit sRGB cube, per channel.
/// Obtained by exhaustive enumeration of all 2^24 colors.
pub const CHROMA_LIMITS: ChromaLimits = ChromaLimits {
    u: 0.492 * 0.886 * 255.0,
    v: 0.877 * 0.701 * 255.0,
    cb: 127.5,
    cr: 127.5,
    a: 98.234_311_888,
    b: 107.860_161_755,
};

#[derive(Debug, Clone, Copy)]
pub struct ChromaLimits {
    pub u: f64,
    pub v: f64,
    pub cb: f64,
    pub cr: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Y,
    U,
    V,
    Cb,
    Cr,
    L,
    A,
    B,
}

impl Channel {
    /// Neutral (achromatic) value of the channel, `None` for luminance.
    pub fn neutral(self) -> Option<f64> {
        match self {
            Channel::U | Channel::V | Channel::A | Channel::B => Some(0.0),
            Channel::Cb | Channel::Cr => Some(128.0),
            Channel::Y | Channel::L => None,
        }
    }

    fn chroma_limit(self) -> Option<f64> {
        let lim = CHROMA_LIMITS;
        match self {
            Channel::U => Some(lim.u),
            Channel::V => Some(lim.v),
            Channel::Cb => Some(lim.cb),
            Channel::Cr => Some(lim.cr),
            Channel::A => Some(lim.a),
            Channel::B => Some(lim.b),
            Channel::Y | Channel::L => None,
        }
    }
}

/// One channel of a converted image, `height x width`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlane {
    pub channel: Channel,
    pub values: DMatrix<f64>,
}

impl ChannelPlane {
    pub fn new(channel: Channel, values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { channel, values })
    }

    pub fn height(&self) -> usize {
        self.values.nrows()
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }

    /// Row-major vectorization.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        for y in 0..self.height() {
            for x in 0..self.width() {
                out.push(self.values[(y, x)]);
            }
        }
        out
    }
}

fn plane_from_fn(
    img: &RgbImage,
    channel: Channel,
    f: impl Fn([u8; 3]) -> f64,
) -> ChannelPlane {
    let values = DMatrix::from_fn(img.height(), img.width(), |y, x| f(img.pixel(x, y)));
    ChannelPlane { channel, values }
}

fn rgb_f64([r, g, b]: [u8; 3]) -> (f64, f64, f64) {
    (f64::from(r), f64::from(g), f64::from(b))
}

/// BT.601 luma, `0.299 R + 0.587 G + 0.114 B`.
pub fn luma(px: [u8; 3]) -> f64 {
    let (r, g, b) = rgb_f64(px);
    g + 0.299 * (r - g) + 0.114 * (b - g)
}

/// Full-range JFIF YCbCr of a single pixel, Cb and Cr clamped to `[0, 255]`.
pub fn ycbcr_pixel(px: [u8; 3]) -> [f64; 3] {
    let (r, g, b) = rgb_f64(px);
    let y = luma(px);
    let cb = 128.0 + 0.5 * (b - g) - 0.168_736 * (r - g);
    let cr = 128.0 + 0.5 * (r - g) - 0.081_312 * (b - g);
    [y, cb.clamp(0.0, 255.0), cr.clamp(0.0, 255.0)]
}

/// Analog YUV of a single pixel; U and V are left unclamped.
pub fn yuv_pixel(px: [u8; 3]) -> [f64; 3] {
    let (r, _, b) = rgb_f64(px);
    let y = luma(px);
    [y, 0.492 * (b - y), 0.877 * (r - y)]
}

/// sRGB transfer function inverse, 8-bit code value to linear light.
pub fn srgb_to_linear(code: u8) -> f64 {
    let c = f64::from(code) / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

const LAB_EPSILON: f64 = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        t / (3.0 * (6.0 / 29.0) * (6.0 / 29.0)) + 4.0 / 29.0
    }
}

/// CIELab (D65) of a single pixel.
pub fn lab_pixel([r, g, b]: [u8; 3]) -> [f64; 3] {
    let (rl, gl, bl) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
    let (dr, db) = (rl - gl, bl - gl);
    // sRGB -> XYZ rows divided by the white point; each row then sums to one,
    // so only the red and blue weights are needed.
    let xr = gl + (0.412_456_4 / D65_WHITE[0]) * dr + (0.180_437_5 / D65_WHITE[0]) * db;
    let yr = gl + 0.212_672_9 * dr + 0.072_175_0 * db;
    let zr = gl + (0.019_333_9 / D65_WHITE[2]) * dr + (0.950_304_1 / D65_WHITE[2]) * db;
    let (fx, fy, fz) = (lab_f(xr), lab_f(yr), lab_f(zr));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

fn split3(
    img: &RgbImage,
    ids: [Channel; 3],
    f: impl Fn([u8; 3]) -> [f64; 3],
) -> (ChannelPlane, ChannelPlane, ChannelPlane) {
    let (h, w) = (img.height(), img.width());
    let mut planes = [
        DMatrix::zeros(h, w),
        DMatrix::zeros(h, w),
        DMatrix::zeros(h, w),
    ];
    for y in 0..h {
        for x in 0..w {
            let v = f(img.pixel(x, y));
            for (plane, value) in planes.iter_mut().zip(v) {
                plane[(y, x)] = value;
            }
        }
    }
    let [p0, p1, p2] = planes;
    (
        ChannelPlane {
            channel: ids[0],
            values: p0,
        },
        ChannelPlane {
            channel: ids[1],
            values: p1,
        },
        ChannelPlane {
            channel: ids[2],
            values: p2,
        },
    )
}

pub fn rgb_to_ycbcr(img: &RgbImage) -> (ChannelPlane, ChannelPlane, ChannelPlane) {
    split3(img, [Channel::Y, Channel::Cb, Channel::Cr], ycbcr_pixel)
}

pub fn rgb_to_yuv(img: &RgbImage) -> (ChannelPlane, ChannelPlane, ChannelPlane) {
    split3(img, [Channel::Y, Channel::U, Channel::V], yuv_pixel)
}

pub fn rgb_to_cielab(img: &RgbImage) -> (ChannelPlane, ChannelPlane, ChannelPlane) {
    split3(img, [Channel::L, Channel::A, Channel::B], lab_pixel)
}

/// Just the luma plane.
pub fn luma_plane(img: &RgbImage) -> ChannelPlane {
    plane_from_fn(img, Channel::Y, luma)
}

/// Just the Lab lightness plane.
pub fn lightness_plane(img: &RgbImage) -> ChannelPlane {
    plane_from_fn(img, Channel::L, |px| lab_pixel(px)[0])
}

/// Min-max normalization to `[0, 1]`; a constant plane becomes all zeros.
pub fn normalize_channel(p: &ChannelPlane) -> ChannelPlane {
    let normalized = min_max_normalize(p.values.as_slice());
    ChannelPlane {
        channel: p.channel,
        values: DMatrix::from_vec(p.height(), p.width(), normalized),
    }
}

/// Distance of a chroma plane from its neutral value, divided by the largest
/// distance any 8-bit sRGB color can reach, giving values in `[0, 1]` with
/// achromatic pixels at exactly 0. The scale is fixed, not image-adaptive, so
/// the relative strength of the three chroma channels survives.
pub fn chroma_magnitude(p: &ChannelPlane) -> Result<ChannelPlane> {
    let (Some(neutral), Some(limit)) = (p.channel.neutral(), p.channel.chroma_limit()) else {
        return Err(Error::InvalidConfig(format!(
            "{:?} is not a chroma channel",
            p.channel
        )));
    };
    Ok(ChannelPlane {
        channel: p.channel,
        values: p.values.map(|v| ((v - neutral).abs() / limit).min(1.0)),
    })
}
