//! Images and backward bilinear warping.
//!
//! Two regimes are provided. [`backward_warp`] applies an accumulated flow
//! to the original image in a single interpolation pass. Calling
//! [`iterative_warp_step`] once per solved transform instead re-interpolates
//! the previous output every time, compounding resampling blur; it exists as
//! the baseline the coupled regime is judged against. A process-wide counter
//! records how many interpolation passes actually ran.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{FlowField, PixelGrid};
use crate::scalar::Scalar;
use crate::tps::TpsTransform;

static INTERPOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Number of image interpolation passes performed by this process so far.
pub fn interpolation_count() -> u64 {
    INTERPOLATIONS.load(Ordering::Relaxed)
}

/// H x W raster of intensities in [0, 1], row-major and channel-interleaved.
#[derive(Clone, Debug, PartialEq)]
pub struct Image<T> {
    width: u32,
    height: u32,
    channels: u8,
    samples: Vec<T>,
}

impl<T: Scalar> Image<T> {
    /// Validates dimensions (at least 2x2), the channel count (1 or 3), the
    /// raster length, and that every sample is a finite value in [0, 1].
    pub fn new(width: u32, height: u32, channels: u8, samples: Vec<T>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidChannels(channels));
        }
        let expected = width as usize * height as usize * channels as usize;
        if samples.len() != expected {
            return Err(Error::SampleCount {
                expected,
                actual: samples.len(),
            });
        }
        for (index, &s) in samples.iter().enumerate() {
            if !(s >= T::zero() && s <= T::one()) {
                return Err(Error::SampleRange {
                    index,
                    value: s.to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        channels: u8,
        mut f: impl FnMut(u32, u32, u8) -> T,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width as usize * height as usize * channels as usize);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    samples.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, samples)
    }

    pub fn constant(width: u32, height: u32, channels: u8, value: T) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width as usize * height as usize * channels as usize],
        )
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> u8 {
        self.channels
    }

    #[inline]
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, channel: u8) -> T {
        debug_assert!(x < self.width && y < self.height && channel < self.channels);
        let idx = (y as usize * self.width as usize + x as usize) * self.channels as usize
            + channel as usize;
        self.samples[idx]
    }

    /// Bilinear sample at a real position, one entry per channel (unused
    /// trailing entries are zero). Positions outside the closed rectangle
    /// [0, W-1] x [0, H-1] return zero in every channel.
    pub fn bilinear_sample(&self, x: T, y: T) -> [T; 3] {
        let mut out = [T::zero(); 3];
        let xm = T::of(f64::from(self.width - 1));
        let ym = T::of(f64::from(self.height - 1));
        if !(x >= T::zero() && x <= xm && y >= T::zero() && y <= ym) {
            return out;
        }
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let ix0 = x0.to_usize().unwrap_or(0);
        let iy0 = y0.to_usize().unwrap_or(0);
        let ch = self.channels as usize;
        let w = self.width as usize;
        if fx == T::zero() && fy == T::zero() {
            let base = (iy0 * w + ix0) * ch;
            out[..ch].copy_from_slice(&self.samples[base..base + ch]);
            return out;
        }
        let ix1 = (ix0 + 1).min(w - 1);
        let iy1 = (iy0 + 1).min(self.height as usize - 1);
        let one = T::one();
        let w00 = (one - fx) * (one - fy);
        let w10 = fx * (one - fy);
        let w01 = (one - fx) * fy;
        let w11 = fx * fy;
        let b00 = (iy0 * w + ix0) * ch;
        let b10 = (iy0 * w + ix1) * ch;
        let b01 = (iy1 * w + ix0) * ch;
        let b11 = (iy1 * w + ix1) * ch;
        for c in 0..ch {
            let v = self.samples[b00 + c] * w00
                + self.samples[b10 + c] * w10
                + self.samples[b01 + c] * w01
                + self.samples[b11 + c] * w11;
            // Rounding can push a blend of in-range values a few ulp past the
            // ends; pin the invariant.
            out[c] = v.max(T::zero()).min(one);
        }
        out
    }

    /// Axis-aligned crop. `x0 + width` and `y0 + height` must stay inside.
    pub fn crop(&self, x0: u32, y0: u32, width: u32, height: u32) -> Result<Image<T>> {
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::InvalidDimensions { width, height });
        }
        Image::from_fn(width, height, self.channels, |x, y, c| {
            self.get(x0 + x, y0 + y, c)
        })
    }

    /// Centered crop keeping `fraction` of each dimension.
    pub fn crop_center(&self, fraction: f64) -> Result<Image<T>> {
        let w = ((f64::from(self.width) * fraction).round() as u32).max(2);
        let h = ((f64::from(self.height) * fraction).round() as u32).max(2);
        let x0 = (self.width - w) / 2;
        let y0 = (self.height - h) / 2;
        self.crop(x0, y0, w, h)
    }

    pub fn cast<U: Scalar>(&self) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            samples: self
                .samples
                .iter()
                .map(|&s| U::of(s.to_f64_lossy()))
                .collect(),
        }
    }
}

/// Warps `img` by sampling it at x + f(x) for every output pixel x.
/// One interpolation pass, whatever went into `f`.
pub fn backward_warp<T: Scalar>(img: &Image<T>, flow: &FlowField<T>) -> Result<Image<T>> {
    if img.width != flow.width() || img.height != flow.height() {
        return Err(Error::DimensionMismatch {
            left_width: img.width,
            left_height: img.height,
            right_width: flow.width(),
            right_height: flow.height(),
        });
    }
    INTERPOLATIONS.fetch_add(1, Ordering::Relaxed);
    let ch = img.channels as usize;
    let w = img.width as usize;
    let mut samples = vec![T::zero(); img.samples.len()];
    samples
        .par_chunks_mut(w * ch)
        .enumerate()
        .for_each(|(y, row)| {
            let fy = T::of(y as f64);
            for x in 0..w {
                let d = flow.get(x as u32, y as u32);
                let sampled = img.bilinear_sample(T::of(x as f64) + d.x, fy + d.y);
                row[x * ch..(x + 1) * ch].copy_from_slice(&sampled[..ch]);
            }
        });
    Ok(Image {
        width: img.width,
        height: img.height,
        channels: img.channels,
        samples,
    })
}

/// One step of the iterative baseline: converts the backward map into its
/// flow on the image's own grid and re-interpolates the current image.
///
/// Going through the flow keeps the sampling positions identical to the ones
/// the coupled regime uses, so a single iteration of either regime produces
/// the same bits.
pub fn iterative_warp_step<T: Scalar>(img: &Image<T>, map: &TpsTransform<T>) -> Image<T> {
    let grid = PixelGrid::new(img.width, img.height).expect("image dimensions are at least 2x2");
    let delta = FlowField::from_transform(map, &grid);
    backward_warp(img, &delta).expect("flow built on the image's own grid")
}

/// Horizontal ramp image, img(x, y) = x / (width - 1); handy in tests.
#[cfg(test)]
pub(crate) fn ramp(width: u32, height: u32) -> Image<f64> {
    Image::from_fn(width, height, 1, |x, _, _| {
        f64::from(x) / f64::from(width - 1)
    })
    .unwrap()
}
