//! Thin-plate-spline warping engine.
//!
//! Exact TPS solving from control-point correspondences, conversion of
//! solved transforms into dense backward flows, interpolation-free coupling
//! of several warps into one, mutual-warp consistency between paired point
//! sets, and the PSNR/SSIM metrics used to judge the results.
//!
//! The numeric core is generic over the scalar type (`f32` or `f64`) through
//! the [`Scalar`] trait; the aliases at the crate root pick a concrete width.

pub mod dual;
pub mod error;
pub mod flow;
pub mod formats;
pub mod geom;
pub mod iterate;
pub mod metrics;
pub mod scalar;
pub mod tps;
pub mod warp;

pub use error::{Error, Result};
pub use geom::{frame_center, Mat2, Vec2};
pub use scalar::Scalar;

pub use dual::{
    discounted_sum, dual_warp, labeled_loss, patch_distance, total_loss, unlabeled_loss,
    DistanceKind, LossConfig, UnlabeledPair,
};
pub use flow::{FlowField, PixelGrid};
pub use iterate::{
    compare_coupling_modes, estimate_rotation, run_coupled, ControlLayout, CouplingComparison,
    IterationEntry, IterationReport, LayoutKind, PredictorSpec,
};
pub use metrics::{metric_report, psnr, ssim, MetricReport};
pub use tps::{radial_kernel, ControlPointSet, Normalization, TpsTransform};
pub use warp::{backward_warp, interpolation_count, iterative_warp_step, Image};

/// Single-precision aliases.
pub type ControlPointSetF32 = ControlPointSet<f32>;
pub type TpsTransformF32 = TpsTransform<f32>;
pub type FlowFieldF32 = FlowField<f32>;
pub type ImageF32 = Image<f32>;

/// Double-precision aliases; the CLI and most tests use these.
pub type ControlPointSetF64 = ControlPointSet<f64>;
pub type TpsTransformF64 = TpsTransform<f64>;
pub type FlowFieldF64 = FlowField<f64>;
pub type ImageF64 = Image<f64>;
