//! Dense backward warping flows and their coupling.
//!
//! A [`FlowField`] stores one displacement per pixel: the output pixel at x
//! samples the input at x + F(x). Composing a previous field with the delta
//! of a newly solved transform,
//!
//! ```text
//! F_i(x) = F_{i-1}(x + dF_i(x)) + dF_i(x),
//! ```
//!
//! folds any number of warps into a single field, so the image itself is
//! interpolated once no matter how many transforms went in.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;
use crate::tps::TpsTransform;

/// Implicit row-major lattice of integer pixel centres, 0-indexed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelGrid {
    width: u32,
    height: u32,
}

impl PixelGrid {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidDimensions { width, height });
        }
        Ok(Self { width, height })
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
    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major iterator over the lattice coordinates.
    pub fn coords(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        (0..self.height).flat_map(move |y| (0..w).map(move |x| (x, y)))
    }
}

/// H x W raster of 2-D backward displacements in pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField<T> {
    width: u32,
    height: u32,
    vectors: Vec<Vec2<T>>,
}

impl<T: Scalar> FlowField<T> {
    /// The all-zero field, the neutral element of composition.
    pub fn zeros(width: u32, height: u32) -> Result<Self> {
        let grid = PixelGrid::new(width, height)?;
        Ok(Self {
            width,
            height,
            vectors: vec![Vec2::zero(); grid.len()],
        })
    }

    pub fn from_vectors(width: u32, height: u32, vectors: Vec<Vec2<T>>) -> Result<Self> {
        let grid = PixelGrid::new(width, height)?;
        if vectors.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                actual: vectors.len(),
            });
        }
        for (index, v) in vectors.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinitePoint { index });
            }
        }
        Ok(Self {
            width,
            height,
            vectors,
        })
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> Vec2<T>,
    ) -> Result<Self> {
        let grid = PixelGrid::new(width, height)?;
        let vectors = grid.coords().map(|(x, y)| f(x, y)).collect();
        Self::from_vectors(width, height, vectors)
    }

    /// Converts a backward sampling map into its flow on `grid`:
    /// the vector at (x, y) is `map(x, y) - (x, y)`.
    pub fn from_transform(map: &TpsTransform<T>, grid: &PixelGrid) -> Self {
        let width = grid.width();
        let height = grid.height();
        let mut vectors = vec![Vec2::zero(); grid.len()];
        vectors
            .par_chunks_mut(width as usize)
            .enumerate()
            .for_each(|(y, row)| {
                let fy = T::of(y as f64);
                for (x, v) in row.iter_mut().enumerate() {
                    let p = Vec2::new(T::of(x as f64), fy);
                    *v = map.evaluate(p) - p;
                }
            });
        Self {
            width,
            height,
            vectors,
        }
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
    pub fn vectors(&self) -> &[Vec2<T>] {
        &self.vectors
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Vec2<T> {
        debug_assert!(x < self.width && y < self.height);
        self.vectors[y as usize * self.width as usize + x as usize]
    }

    /// Bilinear sample at a real position. Positions outside the lattice
    /// clamp to the nearest border pixel, so a smooth field extends by its
    /// edge values instead of collapsing to zero.
    pub fn sample(&self, x: T, y: T) -> Vec2<T> {
        let xm = T::of(f64::from(self.width - 1));
        let ym = T::of(f64::from(self.height - 1));
        let x = x.max(T::zero()).min(xm);
        let y = y.max(T::zero()).min(ym);
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let ix0 = x0.to_usize().unwrap_or(0);
        let iy0 = y0.to_usize().unwrap_or(0);
        if fx == T::zero() && fy == T::zero() {
            return self.get(ix0 as u32, iy0 as u32);
        }
        let ix1 = (ix0 + 1).min(self.width as usize - 1);
        let iy1 = (iy0 + 1).min(self.height as usize - 1);
        let w = self.width as usize;
        let v00 = self.vectors[iy0 * w + ix0];
        let v10 = self.vectors[iy0 * w + ix1];
        let v01 = self.vectors[iy1 * w + ix0];
        let v11 = self.vectors[iy1 * w + ix1];
        let one = T::one();
        v00 * ((one - fx) * (one - fy))
            + v10 * (fx * (one - fy))
            + v01 * ((one - fx) * fy)
            + v11 * (fx * fy)
    }

    /// Couples `self` (the previously accumulated field) with `delta` (the
    /// newly solved step): `out(x) = self(x + delta(x)) + delta(x)`.
    pub fn compose(&self, delta: &FlowField<T>) -> Result<FlowField<T>> {
        if self.width != delta.width || self.height != delta.height {
            return Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: delta.width,
                right_height: delta.height,
            });
        }
        let mut vectors = vec![Vec2::zero(); self.vectors.len()];
        let w = self.width as usize;
        vectors
            .par_chunks_mut(w)
            .enumerate()
            .for_each(|(y, row)| {
                let fy = T::of(y as f64);
                for (x, out) in row.iter_mut().enumerate() {
                    let d = delta.vectors[y * w + x];
                    let carried = self.sample(T::of(x as f64) + d.x, fy + d.y);
                    *out = carried + d;
                }
            });
        Ok(FlowField {
            width: self.width,
            height: self.height,
            vectors,
        })
    }

    /// Resamples onto a new lattice and rescales magnitudes: positions map
    /// by the old/new ratio per axis, u scales by new_width/width and v by
    /// new_height/height.
    pub fn resize(&self, new_width: u32, new_height: u32) -> Result<FlowField<T>> {
        let grid = PixelGrid::new(new_width, new_height)?;
        let sx = T::of(f64::from(self.width) / f64::from(new_width));
        let sy = T::of(f64::from(self.height) / f64::from(new_height));
        let mu = T::of(f64::from(new_width) / f64::from(self.width));
        let mv = T::of(f64::from(new_height) / f64::from(self.height));
        let mut vectors = vec![Vec2::zero(); grid.len()];
        vectors
            .par_chunks_mut(new_width as usize)
            .enumerate()
            .for_each(|(y, row)| {
                let src_y = T::of(y as f64) * sy;
                for (x, out) in row.iter_mut().enumerate() {
                    let v = self.sample(T::of(x as f64) * sx, src_y);
                    *out = Vec2::new(v.x * mu, v.y * mv);
                }
            });
        Ok(FlowField {
            width: new_width,
            height: new_height,
            vectors,
        })
    }

    /// Mean displacement magnitude, accumulated sequentially so the value is
    /// reproducible bit for bit.
    pub fn mean_magnitude(&self) -> T {
        let mut sum = T::zero();
        for v in &self.vectors {
            sum += v.norm();
        }
        sum / T::of(self.vectors.len() as f64)
    }

    pub fn max_magnitude(&self) -> T {
        let mut max = T::zero();
        for v in &self.vectors {
            max = max.max(v.norm());
        }
        max
    }

    pub fn cast<U: Scalar>(&self) -> FlowField<U> {
        FlowField {
            width: self.width,
            height: self.height,
            vectors: self.vectors.iter().map(|v| v.cast()).collect(),
        }
    }
}
