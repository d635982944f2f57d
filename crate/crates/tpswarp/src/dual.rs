//! Mutual warping between a paired image pair and its loss scaffolding.
//!
//! Two images of the same scene differ by a warp; each carries its own
//! predicted source points against the shared fixed layout, so the same
//! content sits at `points_a` in the first image and at `points_b` in the
//! second. Backward-mapping one image with the spline solved from the other
//! image's points to its own predicts that other image. When the
//! predictions are mutually consistent, both cross-predictions match, which
//! is what [`unlabeled_loss`] measures without any ground truth.

use crate::error::{Error, Result};
use crate::flow::{FlowField, PixelGrid};
use crate::scalar::Scalar;
use crate::tps::{ControlPointSet, TpsTransform};
use crate::warp::{backward_warp, Image};

/// An image pair with per-image predicted source points of equal count and
/// ordering.
#[derive(Clone, Debug)]
pub struct UnlabeledPair<T> {
    pub image_a: Image<T>,
    pub image_b: Image<T>,
    pub points_a: ControlPointSet<T>,
    pub points_b: ControlPointSet<T>,
}

impl<T: Scalar> UnlabeledPair<T> {
    pub fn new(
        image_a: Image<T>,
        image_b: Image<T>,
        points_a: ControlPointSet<T>,
        points_b: ControlPointSet<T>,
    ) -> Result<Self> {
        if image_a.width() != image_b.width() || image_a.height() != image_b.height() {
            return Err(Error::DimensionMismatch {
                left_width: image_a.width(),
                left_height: image_a.height(),
                right_width: image_b.width(),
                right_height: image_b.height(),
            });
        }
        if image_a.channels() != image_b.channels() {
            return Err(Error::ChannelMismatch {
                left: image_a.channels(),
                right: image_b.channels(),
            });
        }
        if points_a.len() != points_b.len() {
            return Err(Error::CountMismatch {
                left: points_a.len(),
                right: points_b.len(),
            });
        }
        Ok(Self {
            image_a,
            image_b,
            points_a,
            points_b,
        })
    }

    /// Same pair with the two sides exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            image_a: self.image_b.clone(),
            image_b: self.image_a.clone(),
            points_a: self.points_b.clone(),
            points_b: self.points_a.clone(),
        }
    }
}

/// Pluggable patch distance between same-shaped images.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    MeanAbs,
    MeanSq,
}

/// Discount and distance configuration for the losses.
#[derive(Clone, Copy, Debug)]
pub struct LossConfig {
    pub gamma: f64,
    pub iterations: usize,
    pub distance: DistanceKind,
}

impl LossConfig {
    pub fn new(gamma: f64, iterations: usize, distance: DistanceKind) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must lie in (0, 1], got {gamma}"
            )));
        }
        if iterations == 0 {
            return Err(Error::InvalidArgument(
                "iteration count must be at least 1".into(),
            ));
        }
        Ok(Self {
            gamma,
            iterations,
            distance,
        })
    }
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            iterations: 3,
            distance: DistanceKind::MeanAbs,
        }
    }
}

/// Mutual predictions: warps `image_a` toward `image_b` using the map solved
/// from `points_b` to `points_a`, and symmetrically for the second output.
/// The first output is the pair's prediction of `image_b`, the second of
/// `image_a`.
pub fn dual_warp<T: Scalar>(pair: &UnlabeledPair<T>) -> Result<(Image<T>, Image<T>)> {
    let grid = PixelGrid::new(pair.image_a.width(), pair.image_a.height())?;
    let map_toward_b = TpsTransform::solve(&pair.points_b, &pair.points_a)?;
    let map_toward_a = TpsTransform::solve(&pair.points_a, &pair.points_b)?;
    let toward_b = backward_warp(
        &pair.image_a,
        &FlowField::from_transform(&map_toward_b, &grid),
    )?;
    let toward_a = backward_warp(
        &pair.image_b,
        &FlowField::from_transform(&map_toward_a, &grid),
    )?;
    Ok((toward_b, toward_a))
}

/// Mean absolute or mean squared difference over all samples.
pub fn patch_distance<T: Scalar>(a: &Image<T>, b: &Image<T>, kind: DistanceKind) -> Result<T> {
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
    let mut acc = T::zero();
    for (&x, &y) in a.samples().iter().zip(b.samples().iter()) {
        let d = x - y;
        acc += match kind {
            DistanceKind::MeanAbs => d.abs(),
            DistanceKind::MeanSq => d * d,
        };
    }
    Ok(acc / T::of(a.samples().len() as f64))
}

/// Discounted sum `sum_t gamma^t d_t` with weight one on the first entry.
pub fn discounted_sum<T: Scalar>(distances: &[T], gamma: f64) -> T {
    let gamma = T::of(gamma);
    let mut weight = T::one();
    let mut acc = T::zero();
    for (t, &d) in distances.iter().enumerate() {
        if t > 0 {
            weight = weight * gamma;
        }
        acc += weight * d;
    }
    acc
}

/// Supervised loss: discounted per-iteration distances to the ground truth,
/// `sum_{t=0}^{T-1} gamma^t distance(outputs[t], gt)`.
pub fn labeled_loss<T: Scalar>(
    outputs: &[Image<T>],
    ground_truth: &Image<T>,
    cfg: &LossConfig,
) -> Result<T> {
    if outputs.len() != cfg.iterations {
        return Err(Error::CountMismatch {
            left: outputs.len(),
            right: cfg.iterations,
        });
    }
    let mut distances = Vec::with_capacity(outputs.len());
    for out in outputs {
        distances.push(patch_distance(out, ground_truth, cfg.distance)?);
    }
    Ok(discounted_sum(&distances, cfg.gamma))
}

/// Consistency loss of a pair: the distance of each mutual prediction to the
/// image it predicts, summed over both directions.
pub fn unlabeled_loss<T: Scalar>(pair: &UnlabeledPair<T>, cfg: &LossConfig) -> Result<T> {
    let (toward_b, toward_a) = dual_warp(pair)?;
    let term_b = patch_distance(&toward_b, &pair.image_b, cfg.distance)?;
    let term_a = patch_distance(&toward_a, &pair.image_a, cfg.distance)?;
    Ok(term_b + term_a)
}

/// Total objective: labeled plus unlabeled term.
pub fn total_loss<T: Scalar>(labeled: T, unlabeled: T) -> T {
    labeled + unlabeled
}
