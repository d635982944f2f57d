//! The coupled warping loop: per-iteration control-point prediction,
//! backward-map solving, and flow coupling.
//!
//! Target control points sit on a fixed layout; a predictor proposes source
//! points for the current state each iteration. Solving from the layout to
//! the predicted points directly yields the backward sampling map, whose
//! flow is coupled into the accumulated field. The image itself is warped
//! once, at the end, from the original input; the iterative baseline that
//! re-interpolates every round only exists for comparison.
//!
//! Predictors receive the current state (input image plus accumulated flow)
//! rather than a materialized intermediate image, so the coupled path keeps
//! its single-interpolation property. A predictor that wants pixels can
//! always warp the input itself.

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{FlowField, PixelGrid};
use crate::formats;
use crate::geom::{frame_center, Vec2};
use crate::metrics::{self, MetricReport};
use crate::scalar::Scalar;
use crate::tps::{ControlPointSet, TpsTransform};
use crate::warp::{backward_warp, iterative_warp_step, Image};

/// How a layout's points were generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Uniform,
    BoundaryDense,
    /// Loaded from a file; the generating lattice, if any, is unknown.
    Custom,
}

/// The fixed target control points of the warp, row-major on a frame.
#[derive(Clone, Debug)]
pub struct ControlLayout<T> {
    kind: LayoutKind,
    rows: u32,
    cols: u32,
    points: ControlPointSet<T>,
}

impl<T: Scalar> ControlLayout<T> {
    /// Evenly spaced rows x cols lattice with points on all four borders:
    /// x_j = j (width-1)/(cols-1), y_i = i (height-1)/(rows-1).
    ///
    /// The 7 x 9 preset on a 512 x 384 frame gives the default 63 points.
    pub fn uniform(rows: u32, cols: u32, width: u32, height: u32) -> Result<Self> {
        Self::lattice(LayoutKind::Uniform, rows, cols, width, height, |j, n| {
            j as f64 / (n - 1) as f64
        })
    }

    /// Chebyshev-Lobatto lattice, u_j = (1 - cos(pi j/(n-1)))/2 per axis,
    /// denser toward all four borders. Default portrait preset is 8 x 10.
    pub fn boundary_dense(rows: u32, cols: u32, width: u32, height: u32) -> Result<Self> {
        Self::lattice(
            LayoutKind::BoundaryDense,
            rows,
            cols,
            width,
            height,
            |j, n| (1.0 - (std::f64::consts::PI * j as f64 / (n - 1) as f64).cos()) / 2.0,
        )
    }

    fn lattice(
        kind: LayoutKind,
        rows: u32,
        cols: u32,
        width: u32,
        height: u32,
        spacing: impl Fn(u32, u32) -> f64,
    ) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidDimensions {
                width: cols,
                height: rows,
            });
        }
        if width < 2 || height < 2 {
            return Err(Error::InvalidDimensions { width, height });
        }
        let mut points = Vec::with_capacity(rows as usize * cols as usize);
        for i in 0..rows {
            let y = T::of(spacing(i, rows) * f64::from(height - 1));
            for j in 0..cols {
                let x = T::of(spacing(j, cols) * f64::from(width - 1));
                points.push(Vec2::new(x, y));
            }
        }
        let points = ControlPointSet::new(points, width, height)?;
        let layout = Self {
            kind,
            rows,
            cols,
            points,
        };
        layout.check_in_frame()?;
        Ok(layout)
    }

    /// Wraps an explicit point set (e.g. loaded from a file) as a layout.
    pub fn custom(points: ControlPointSet<T>) -> Result<Self> {
        let layout = Self {
            kind: LayoutKind::Custom,
            rows: 1,
            cols: points.len() as u32,
            points,
        };
        layout.check_in_frame()?;
        Ok(layout)
    }

    fn check_in_frame(&self) -> Result<()> {
        let xm = T::of(f64::from(self.points.frame_width() - 1));
        let ym = T::of(f64::from(self.points.frame_height() - 1));
        for (index, p) in self.points.points().iter().enumerate() {
            if !(p.x >= T::zero() && p.x <= xm && p.y >= T::zero() && p.y <= ym) {
                return Err(Error::OutOfFrame { index });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    #[inline]
    pub fn rows(&self) -> u32 {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> u32 {
        self.cols
    }

    #[inline]
    pub fn points(&self) -> &ControlPointSet<T> {
        &self.points
    }
}

/// Which predictor drives the loop.
#[derive(Clone, Debug, PartialEq)]
pub enum PredictorSpec {
    /// Always returns the layout itself: the loop is a fixpoint.
    Identity,
    /// Knows the content's initial tilt and corrects `gain` of the residual
    /// each iteration. Positive angles follow [`crate::geom::Mat2::rotation`].
    RotationOracle {
        initial_angle_deg: f64,
        gain: f64,
    },
    /// Replays point sets from `iter_0.json`, `iter_1.json`, ... in a
    /// directory; fails once the files run out.
    File { directory: PathBuf },
}

/// Current loop state handed to a predictor. The accumulated flow stands in
/// for the intermediate image; warping is left to predictors that need it.
pub(crate) struct StepContext<'a, T> {
    pub iteration: usize,
    pub input: &'a Image<T>,
    #[allow(dead_code)]
    pub flow: &'a FlowField<T>,
    pub layout: &'a ControlLayout<T>,
}

trait Predict<T: Scalar> {
    fn predict(&mut self, ctx: &StepContext<'_, T>) -> Result<ControlPointSet<T>>;
}

struct IdentityPredictor;

impl<T: Scalar> Predict<T> for IdentityPredictor {
    fn predict(&mut self, ctx: &StepContext<'_, T>) -> Result<ControlPointSet<T>> {
        Ok(ctx.layout.points().clone())
    }
}

struct RotationOraclePredictor {
    residual_deg: f64,
    gain: f64,
}

impl<T: Scalar> Predict<T> for RotationOraclePredictor {
    fn predict(&mut self, ctx: &StepContext<'_, T>) -> Result<ControlPointSet<T>> {
        let step = self.gain * self.residual_deg;
        self.residual_deg -= step;
        let center = frame_center(ctx.input.width(), ctx.input.height());
        ctx.layout
            .points()
            .rotated_about(center, T::of(step.to_radians()))
    }
}

struct FilePredictor {
    directory: PathBuf,
}

impl<T: Scalar> Predict<T> for FilePredictor {
    fn predict(&mut self, ctx: &StepContext<'_, T>) -> Result<ControlPointSet<T>> {
        let path = self.directory.join(format!("iter_{}.json", ctx.iteration));
        if !path.exists() {
            return Err(Error::PredictorFailure(format!(
                "no point set for iteration {} ({} missing)",
                ctx.iteration,
                path.display()
            )));
        }
        Ok(formats::read_points(&path)?.cast())
    }
}

impl PredictorSpec {
    pub fn rotation_oracle(initial_angle_deg: f64, gain: f64) -> Result<Self> {
        if !(gain > 0.0 && gain <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "oracle gain must lie in (0, 1], got {gain}"
            )));
        }
        if !initial_angle_deg.is_finite() {
            return Err(Error::InvalidArgument("oracle angle must be finite".into()));
        }
        Ok(Self::RotationOracle {
            initial_angle_deg,
            gain,
        })
    }

    fn build<T: Scalar>(&self) -> Result<Box<dyn Predict<T>>> {
        match self {
            Self::Identity => Ok(Box::new(IdentityPredictor)),
            Self::RotationOracle {
                initial_angle_deg,
                gain,
            } => {
                if !(*gain > 0.0 && *gain <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "oracle gain must lie in (0, 1], got {gain}"
                    )));
                }
                Ok(Box::new(RotationOraclePredictor {
                    residual_deg: *initial_angle_deg,
                    gain: *gain,
                }))
            }
            Self::File { directory } => Ok(Box::new(FilePredictor {
                directory: directory.clone(),
            })),
        }
    }

    /// Initial tilt the oracle starts from, when there is one.
    fn initial_angle(&self) -> Option<f64> {
        match self {
            Self::RotationOracle {
                initial_angle_deg, ..
            } => Some(*initial_angle_deg),
            _ => None,
        }
    }
}

/// Diagnostics of one executed iteration.
#[derive(Clone, Debug, Serialize)]
pub struct IterationEntry {
    pub iteration: usize,
    pub predicted_points: Vec<[f64; 2]>,
    /// Mean magnitude of the accumulated flow, in pixels.
    pub flow_mean_px: f64,
    /// Max magnitude of the accumulated flow, in pixels.
    pub flow_max_px: f64,
    /// Least-squares rigid rotation fitted to the accumulated flow.
    pub fitted_rotation_deg: f64,
    /// Tilt still uncorrected, relative to a rotation oracle's initial
    /// angle; absent for other predictors.
    pub residual_rotation_deg: Option<f64>,
    #[serde(serialize_with = "serialize_opt_db")]
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
}

fn serialize_opt_db<S: serde::Serializer>(
    v: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(db) => metrics::serialize_db(db, s),
        None => s.serialize_none(),
    }
}

/// Per-iteration diagnostics of a coupled run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IterationReport {
    pub entries: Vec<IterationEntry>,
}

/// Both regimes run on identical predictions, with metrics against the same
/// reference.
#[derive(Clone, Debug)]
pub struct CouplingComparison<T> {
    pub coupled_image: Image<T>,
    pub iterative_image: Image<T>,
    pub coupled: MetricReport,
    pub iterative: MetricReport,
    pub report: IterationReport,
}

/// Runs the coupled loop and returns the accumulated flow, the final image
/// (a single interpolation of `input`), and per-iteration diagnostics.
///
/// Each iteration solves the backward map from the layout points to the
/// predicted source points and couples its flow into the accumulated field.
/// When `reference` is given, every entry also carries PSNR/SSIM of the
/// would-be intermediate image against it (this costs one extra
/// interpolation per iteration, for measurement only).
pub fn run_coupled<T: Scalar>(
    input: &Image<T>,
    layout: &ControlLayout<T>,
    predictor: &PredictorSpec,
    iterations: usize,
    reference: Option<&Image<T>>,
) -> Result<(FlowField<T>, Image<T>, IterationReport)> {
    let mut pred = predictor.build::<T>()?;
    let (flow, image, report, _) = run_with(
        input,
        layout,
        pred.as_mut(),
        iterations,
        reference,
        predictor.initial_angle(),
    )?;
    Ok((flow, image, report))
}

/// Runs both regimes on one recorded prediction sequence and reports
/// full-frame PSNR/SSIM of each final image against `reference`.
pub fn compare_coupling_modes<T: Scalar>(
    input: &Image<T>,
    layout: &ControlLayout<T>,
    predictor: &PredictorSpec,
    iterations: usize,
    reference: &Image<T>,
) -> Result<CouplingComparison<T>> {
    let mut pred = predictor.build::<T>()?;
    let (_, coupled_image, report, recorded) = run_with(
        input,
        layout,
        pred.as_mut(),
        iterations,
        Some(reference),
        predictor.initial_angle(),
    )?;
    let mut iterative_image = input.clone();
    for sources in &recorded {
        let map = TpsTransform::solve(layout.points(), sources)?;
        iterative_image = iterative_warp_step(&iterative_image, &map);
    }
    let coupled = metrics::metric_report(&coupled_image, reference)?;
    let iterative = metrics::metric_report(&iterative_image, reference)?;
    Ok(CouplingComparison {
        coupled_image,
        iterative_image,
        coupled,
        iterative,
        report,
    })
}

fn run_with<T: Scalar>(
    input: &Image<T>,
    layout: &ControlLayout<T>,
    predictor: &mut dyn Predict<T>,
    iterations: usize,
    reference: Option<&Image<T>>,
    oracle_initial_deg: Option<f64>,
) -> Result<(
    FlowField<T>,
    Image<T>,
    IterationReport,
    Vec<ControlPointSet<T>>,
)> {
    if iterations == 0 {
        return Err(Error::InvalidArgument(
            "iteration count must be at least 1".into(),
        ));
    }
    if layout.points().frame_width() != input.width()
        || layout.points().frame_height() != input.height()
    {
        return Err(Error::DimensionMismatch {
            left_width: layout.points().frame_width(),
            left_height: layout.points().frame_height(),
            right_width: input.width(),
            right_height: input.height(),
        });
    }
    if let Some(r) = reference {
        if r.width() != input.width() || r.height() != input.height() {
            return Err(Error::DimensionMismatch {
                left_width: r.width(),
                left_height: r.height(),
                right_width: input.width(),
                right_height: input.height(),
            });
        }
    }
    let grid = PixelGrid::new(input.width(), input.height())?;
    let mut flow = FlowField::zeros(input.width(), input.height())?;
    let mut report = IterationReport::default();
    let mut recorded = Vec::with_capacity(iterations);

    for iteration in 0..iterations {
        let sources = {
            let ctx = StepContext {
                iteration,
                input,
                flow: &flow,
                layout,
            };
            predictor.predict(&ctx)?
        };
        if sources.len() != layout.points().len() {
            return Err(Error::PredictorFailure(format!(
                "iteration {iteration} predicted {} points, layout has {}",
                sources.len(),
                layout.points().len()
            )));
        }
        let map = TpsTransform::solve(layout.points(), &sources)?;
        let delta = FlowField::from_transform(&map, &grid);
        flow = flow.compose(&delta)?;

        let fitted = estimate_rotation(&flow);
        let (psnr_db, ssim) = match reference {
            Some(r) => {
                let intermediate = backward_warp(input, &flow)?;
                (
                    Some(metrics::psnr(&intermediate, r)?),
                    Some(metrics::ssim(&intermediate, r)?),
                )
            }
            None => (None, None),
        };
        report.entries.push(IterationEntry {
            iteration,
            predicted_points: sources
                .points()
                .iter()
                .map(|p| [p.x.to_f64_lossy(), p.y.to_f64_lossy()])
                .collect(),
            flow_mean_px: flow.mean_magnitude().to_f64_lossy(),
            flow_max_px: flow.max_magnitude().to_f64_lossy(),
            fitted_rotation_deg: fitted,
            residual_rotation_deg: oracle_initial_deg.map(|a| a - fitted),
            psnr_db,
            ssim,
        });
        recorded.push(sources);
    }

    let final_image = backward_warp(input, &flow)?;
    Ok((flow, final_image, report, recorded))
}

/// Least-squares rigid rotation about the frame centre best explaining the
/// flow: the angle minimizing `sum_x ||(R(theta) - I)(x - c) - f(x)||^2`,
/// in degrees. Closed form via atan2 of the cross/dot accumulations.
pub fn estimate_rotation<T: Scalar>(flow: &FlowField<T>) -> f64 {
    let center = frame_center::<f64>(flow.width(), flow.height());
    let mut cross = 0.0_f64;
    let mut dot = 0.0_f64;
    let w = flow.width();
    for (i, v) in flow.vectors().iter().enumerate() {
        let x = f64::from(i as u32 % w);
        let y = f64::from(i as u32 / w);
        let d = Vec2::new(x, y) - center;
        let f = Vec2::new(v.x.to_f64_lossy(), v.y.to_f64_lossy());
        cross += d.cross(f);
        dot += d.norm_sq() + d.dot(f);
    }
    cross.atan2(dot).to_degrees()
}
