//! Image similarity metrics: PSNR and single-scale SSIM.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::warp::Image;

/// SSIM window side length.
const WINDOW: usize = 11;
/// SSIM window Gaussian sigma.
const SIGMA: f64 = 1.5;
/// SSIM stabilizers for a dynamic range of 1.0.
const K1: f64 = 0.01;
const K2: f64 = 0.03;
/// Minimum image side for SSIM.
const MIN_SIDE: u32 = 11;

/// PSNR and SSIM of one comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    /// Decibels; `f64::INFINITY` when the images are identical.
    #[serde(serialize_with = "serialize_db")]
    pub psnr_db: f64,
    pub ssim: f64,
}

/// Infinity has no JSON literal; identical images report the string "inf".
pub fn serialize_db<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn check_dims<T: Scalar>(a: &Image<T>, b: &Image<T>) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            left_width: a.width(),
            left_height: a.height(),
            right_width: b.width(),
            right_height: b.height(),
        });
    }
    if a.channels() != b.channels() {
        return Err(Error::ChannelMismatch {
            left: a.channels(),
            right: b.channels(),
        });
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB with peak 1.0, `10 log10(1 / MSE)`.
/// Identical images yield `f64::INFINITY`.
pub fn psnr<T: Scalar>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    check_dims(a, b)?;
    let mut acc = 0.0_f64;
    for (&x, &y) in a.samples().iter().zip(b.samples().iter()) {
        let d = x.to_f64_lossy() - y.to_f64_lossy();
        acc += d * d;
    }
    let mse = acc / a.samples().len() as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(-10.0 * mse.log10())
    }
}

/// Mean local SSIM over an 11x11 Gaussian window (sigma 1.5), stabilizers
/// K1 = 0.01 and K2 = 0.03 on a dynamic range of 1.0, channels averaged.
/// Both image sides must be at least 11 pixels.
pub fn ssim<T: Scalar>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    check_dims(a, b)?;
    if a.width() < MIN_SIDE || a.height() < MIN_SIDE {
        return Err(Error::TooSmall {
            width: a.width(),
            height: a.height(),
            minimum: MIN_SIDE,
        });
    }
    let kernel = gaussian_kernel();
    let c1 = (K1 * 1.0_f64).powi(2);
    let c2 = (K2 * 1.0_f64).powi(2);
    let w = a.width() as usize;
    let h = a.height() as usize;
    let mut channel_sum = 0.0;
    for c in 0..a.channels() {
        let pa = plane(a, c);
        let pb = plane(b, c);
        let mul: Vec<f64> = pa.iter().zip(pb.iter()).map(|(x, y)| x * y).collect();
        let sq_a: Vec<f64> = pa.iter().map(|x| x * x).collect();
        let sq_b: Vec<f64> = pb.iter().map(|y| y * y).collect();
        let mu_a = filter_valid(&pa, w, h, &kernel);
        let mu_b = filter_valid(&pb, w, h, &kernel);
        let e_ab = filter_valid(&mul, w, h, &kernel);
        let e_aa = filter_valid(&sq_a, w, h, &kernel);
        let e_bb = filter_valid(&sq_b, w, h, &kernel);
        let mut acc = 0.0;
        for i in 0..mu_a.len() {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        }
        channel_sum += acc / mu_a.len() as f64;
    }
    Ok(channel_sum / f64::from(a.channels()))
}

pub fn metric_report<T: Scalar>(a: &Image<T>, b: &Image<T>) -> Result<MetricReport> {
    Ok(MetricReport {
        psnr_db: psnr(a, b)?,
        ssim: ssim(a, b)?,
    })
}

fn plane<T: Scalar>(img: &Image<T>, channel: u8) -> Vec<f64> {
    let ch = img.channels() as usize;
    img.samples()
        .iter()
        .skip(channel as usize)
        .step_by(ch)
        .map(|s| s.to_f64_lossy())
        .collect()
}

fn gaussian_kernel() -> [f64; WINDOW] {
    let mut k = [0.0; WINDOW];
    let center = (WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - center;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
        sum += *v;
    }
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable valid-region filter: output is (h - 10) x (w - 10).
fn filter_valid(data: &[f64], w: usize, h: usize, kernel: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    // Horizontal pass over full rows.
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                acc += data[y * w + x + k] * kv;
            }
            horiz[y * ow + x] = acc;
        }
    }
    // Vertical pass.
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                acc += horiz[(y + k) * ow + x] * kv;
            }
            out[y * ow + x] = acc;
        }
    }
    out
}
