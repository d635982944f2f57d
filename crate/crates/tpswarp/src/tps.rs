//! Thin-plate spline solving and evaluation.
//!
//! A spline is fitted from paired 2-D control points and evaluated as an
//! affine part plus a radial-kernel sum,
//!
//! ```text
//! T(p) = C + M p + sum_i w_i O(||p - p_i||),    O(r) = r^2 log r^2,
//! ```
//!
//! the unique interpolant with minimum bending energy among all maps that
//! carry every source point onto its target. The parameters come from one
//! dense (N+3)x(N+3) linear system: N data rows plus the closure constraints
//! `sum_i w_i = 0` and `sum_i p_i w_i^T = 0`, solved by LU factorization with
//! partial pivoting.
//!
//! Solving runs in isotropically normalized coordinates (translate to the
//! frame centre, scale by 2/max(width, height)). Thin-plate splines are
//! exactly equivariant under similarity transforms, so this changes nothing
//! analytically while keeping the kernel matrix well ranged. Anisotropic
//! scaling would change the solution and is never used.

use crate::error::{Error, Result};
use crate::geom::{frame_center, Mat2, Vec2};
use crate::scalar::Scalar;

/// Pivot magnitude (normalized units) below which the system is declared
/// degenerate (collinear or otherwise rank-deficient sources).
pub const PIVOT_THRESHOLD: f64 = 1e-10;

/// Source points closer than this (pixels) are rejected as duplicates.
pub const DUPLICATE_DISTANCE: f64 = 1e-9;

/// Radial kernel `O(r) = r^2 log(r^2)`, natural logarithm, with the
/// continuous-limit value 0 at r = 0.
#[inline]
pub fn radial_kernel<T: Scalar>(r: T) -> T {
    kernel_from_sq(r * r)
}

/// Kernel evaluated from the squared distance, `r^2 log(r^2)`.
///
/// Taking the squared distance avoids the square root entirely and keeps the
/// r = 0 limit explicit instead of producing `0 * -inf`.
#[inline]
pub(crate) fn kernel_from_sq<T: Scalar>(r_sq: T) -> T {
    if r_sq == T::zero() {
        T::zero()
    } else {
        r_sq * r_sq.ln()
    }
}

/// An ordered set of 2-D control points tied to a pixel frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlPointSet<T> {
    points: Vec<Vec2<T>>,
    frame_width: u32,
    frame_height: u32,
}

impl<T: Scalar> ControlPointSet<T> {
    /// Validates that every coordinate is finite and the frame is at least
    /// 2x2. Point-count requirements are enforced where a set is solved, not
    /// here, so that serialized sets of any size can be represented.
    pub fn new(points: Vec<Vec2<T>>, frame_width: u32, frame_height: u32) -> Result<Self> {
        if frame_width < 2 || frame_height < 2 {
            return Err(Error::InvalidDimensions {
                width: frame_width,
                height: frame_height,
            });
        }
        for (index, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinitePoint { index });
            }
        }
        Ok(Self {
            points,
            frame_width,
            frame_height,
        })
    }

    pub fn from_pairs(pairs: &[(f64, f64)], frame_width: u32, frame_height: u32) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(x, y)| Vec2::new(T::of(x), T::of(y)))
            .collect();
        Self::new(points, frame_width, frame_height)
    }

    #[inline]
    pub fn points(&self) -> &[Vec2<T>] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn frame_width(&self) -> u32 {
        self.frame_width
    }

    #[inline]
    pub fn frame_height(&self) -> u32 {
        self.frame_height
    }

    /// Centre of this set's frame.
    #[inline]
    pub fn center(&self) -> Vec2<T> {
        frame_center(self.frame_width, self.frame_height)
    }

    /// Applies `f` to every point, keeping the frame. Fails if `f` produces
    /// a non-finite coordinate.
    pub fn map_points(&self, mut f: impl FnMut(Vec2<T>) -> Vec2<T>) -> Result<Self> {
        let points = self.points.iter().map(|&p| f(p)).collect();
        Self::new(points, self.frame_width, self.frame_height)
    }

    /// The set rotated rigidly about `center` by `angle` radians.
    pub fn rotated_about(&self, center: Vec2<T>, angle: T) -> Result<Self> {
        let rot = Mat2::rotation(angle);
        self.map_points(|p| center + rot.mul_vec(p - center))
    }

    pub fn cast<U: Scalar>(&self) -> ControlPointSet<U> {
        ControlPointSet {
            points: self.points.iter().map(|p| p.cast()).collect(),
            frame_width: self.frame_width,
            frame_height: self.frame_height,
        }
    }
}

/// Isotropic similarity used internally to condition the solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization<T> {
    pub center: Vec2<T>,
    pub scale: T,
}

impl<T: Scalar> Normalization<T> {
    fn for_frame(width: u32, height: u32) -> Self {
        let longest = f64::from(width.max(height));
        Self {
            center: frame_center(width, height),
            scale: T::of(2.0 / longest),
        }
    }

    fn identity() -> Self {
        Self {
            center: Vec2::zero(),
            scale: T::one(),
        }
    }

    #[inline]
    fn apply(&self, p: Vec2<T>) -> Vec2<T> {
        (p - self.center) * self.scale
    }
}

/// A solved thin-plate spline transformation.
///
/// Holds the pixel-frame parameters (`affine_offset`, `affine_matrix`,
/// `kernel_weights`) plus the normalized-frame parameters actually used for
/// evaluation, together with the normalization that links the two frames.
#[derive(Clone, Debug)]
pub struct TpsTransform<T> {
    affine_offset: Vec2<T>,
    affine_matrix: Mat2<T>,
    kernel_weights: Vec<Vec2<T>>,
    kernel_centers: ControlPointSet<T>,
    normalization: Normalization<T>,
    norm_offset: Vec2<T>,
    norm_centers: Vec<Vec2<T>>,
    norm_weights: Vec<Vec2<T>>,
}

impl<T: Scalar> TpsTransform<T> {
    /// Solves for the spline that maps each of `sources` onto the paired
    /// entry of `targets`.
    ///
    /// The frame of `sources` supplies the normalization. Fails with
    /// `CountMismatch` for unequal counts, `TooFewPoints` below three pairs,
    /// `DuplicatePoints` for coincident sources, and
    /// `DegenerateConfiguration` when elimination meets a pivot below
    /// [`PIVOT_THRESHOLD`] (e.g. collinear sources).
    pub fn solve(sources: &ControlPointSet<T>, targets: &ControlPointSet<T>) -> Result<Self> {
        let n = sources.len();
        if n != targets.len() {
            return Err(Error::CountMismatch {
                left: n,
                right: targets.len(),
            });
        }
        if n < 3 {
            return Err(Error::TooFewPoints { count: n });
        }
        let dup_sq = T::of(DUPLICATE_DISTANCE * DUPLICATE_DISTANCE);
        for i in 0..n {
            for j in (i + 1)..n {
                let d_sq = (sources.points[i] - sources.points[j]).norm_sq();
                if d_sq < dup_sq {
                    return Err(Error::DuplicatePoints {
                        first: i,
                        second: j,
                        distance: d_sq.sqrt().to_f64_lossy(),
                    });
                }
            }
        }

        // Identical correspondences admit exactly one minimum-energy
        // interpolant, the identity map. Returning it directly keeps
        // fixpoint paths (identity predictors, equal point files) exact to
        // the bit instead of within solver rounding.
        if sources.points == targets.points {
            return Ok(Self::identity_for(sources));
        }

        let norm = Normalization::for_frame(sources.frame_width, sources.frame_height);
        let np: Vec<Vec2<T>> = sources.points.iter().map(|&p| norm.apply(p)).collect();
        let nq: Vec<Vec2<T>> = targets.points.iter().map(|&q| norm.apply(q)).collect();

        // Full (N+3)x(N+3) system, unknowns stacked as [C; M; W].
        let dim = n + 3;
        let mut a = vec![T::zero(); dim * dim];
        let mut bx = vec![T::zero(); dim];
        let mut by = vec![T::zero(); dim];
        for r in 0..n {
            let row = &mut a[r * dim..(r + 1) * dim];
            row[0] = T::one();
            row[1] = np[r].x;
            row[2] = np[r].y;
            for j in 0..n {
                row[3 + j] = kernel_from_sq((np[r] - np[j]).norm_sq());
            }
            bx[r] = nq[r].x;
            by[r] = nq[r].y;
        }
        for j in 0..n {
            a[n * dim + 3 + j] = T::one();
            a[(n + 1) * dim + 3 + j] = np[j].x;
            a[(n + 2) * dim + 3 + j] = np[j].y;
        }

        solve_two_rhs(&mut a, &mut bx, &mut by, dim)?;

        let norm_offset = Vec2::new(bx[0], by[0]);
        let affine_matrix = Mat2::new(bx[1], bx[2], by[1], by[2]);
        let norm_weights: Vec<Vec2<T>> = (0..n).map(|i| Vec2::new(bx[3 + i], by[3 + i])).collect();

        // Pixel-frame parameters. The affine matrix is dimensionless and
        // carries over unchanged; weights scale by s; the kernel's log(s^2)
        // term collapses to a constant by the closure constraints and lands
        // in the offset:
        //   C_px = c + C'/s - M c + s ln(s^2) * sum_i w'_i |p_i|^2.
        let s = norm.scale;
        let kernel_weights: Vec<Vec2<T>> = norm_weights.iter().map(|&w| w * s).collect();
        let mut kappa = Vec2::zero();
        for (w, p) in norm_weights.iter().zip(sources.points.iter()) {
            kappa += *w * p.norm_sq();
        }
        let affine_offset = norm.center + norm_offset * (T::one() / s)
            - affine_matrix.mul_vec(norm.center)
            + kappa * (s * (s * s).ln());

        Ok(Self {
            affine_offset,
            affine_matrix,
            kernel_weights,
            kernel_centers: sources.clone(),
            normalization: norm,
            norm_offset,
            norm_centers: np,
            norm_weights,
        })
    }

    /// The exact identity transform anchored on `sources`.
    fn identity_for(sources: &ControlPointSet<T>) -> Self {
        let n = sources.len();
        Self {
            affine_offset: Vec2::zero(),
            affine_matrix: Mat2::identity(),
            kernel_weights: vec![Vec2::zero(); n],
            kernel_centers: sources.clone(),
            normalization: Normalization::identity(),
            norm_offset: Vec2::zero(),
            norm_centers: sources.points.clone(),
            norm_weights: vec![Vec2::zero(); n],
        }
    }

    /// Evaluates the transform at one point.
    ///
    /// The point is carried into the normalized frame, evaluated there, and
    /// carried back, exactly as it was solved.
    pub fn evaluate(&self, p: Vec2<T>) -> Vec2<T> {
        let q = self.normalization.apply(p);
        let mut acc = self.norm_offset + self.affine_matrix.mul_vec(q);
        for (&center, &w) in self.norm_centers.iter().zip(self.norm_weights.iter()) {
            acc += w * kernel_from_sq((q - center).norm_sq());
        }
        self.normalization.center + acc * (T::one() / self.normalization.scale)
    }

    pub fn evaluate_many(&self, points: &[Vec2<T>]) -> Vec<Vec2<T>> {
        points.iter().map(|&p| self.evaluate(p)).collect()
    }

    /// Closed-form bending energy `sum_ij (w_i . w_j) O(||p_i - p_j||)` in
    /// normalized units. Zero exactly for affine correspondences; the value
    /// is invariant under the internal normalization because both closure
    /// sums vanish.
    pub fn bending_energy(&self) -> T {
        let n = self.norm_weights.len();
        let mut energy = T::zero();
        for i in 0..n {
            for j in 0..n {
                let k = kernel_from_sq((self.norm_centers[i] - self.norm_centers[j]).norm_sq());
                energy += self.norm_weights[i].dot(self.norm_weights[j]) * k;
            }
        }
        energy
    }

    /// Affine offset C in pixels.
    #[inline]
    pub fn affine_offset(&self) -> Vec2<T> {
        self.affine_offset
    }

    /// Affine matrix M (dimensionless).
    #[inline]
    pub fn affine_matrix(&self) -> Mat2<T> {
        self.affine_matrix
    }

    /// Kernel weights W in pixels, one per kernel centre.
    #[inline]
    pub fn kernel_weights(&self) -> &[Vec2<T>] {
        &self.kernel_weights
    }

    /// The source points whose radial terms the weights multiply.
    #[inline]
    pub fn kernel_centers(&self) -> &ControlPointSet<T> {
        &self.kernel_centers
    }

    /// The similarity used internally for conditioning.
    #[inline]
    pub fn normalization(&self) -> Normalization<T> {
        self.normalization
    }

    /// Kernel weights in the normalized frame (pixel weights divided by the
    /// normalization scale). The closure constraints hold in these units.
    #[inline]
    pub fn normalized_kernel_weights(&self) -> &[Vec2<T>] {
        &self.norm_weights
    }
}

/// Gaussian elimination with partial pivoting on a dense row-major system
/// with two right-hand sides solved in lockstep.
fn solve_two_rhs<T: Scalar>(a: &mut [T], bx: &mut [T], by: &mut [T], n: usize) -> Result<()> {
    let threshold = T::of(PIVOT_THRESHOLD);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot = a[col * n + col].abs();
        for row in (col + 1)..n {
            let v = a[row * n + col].abs();
            if v > pivot {
                pivot = v;
                pivot_row = row;
            }
        }
        if pivot < threshold {
            return Err(Error::DegenerateConfiguration {
                pivot: pivot.to_f64_lossy(),
                threshold: PIVOT_THRESHOLD,
            });
        }
        if pivot_row != col {
            for c in col..n {
                a.swap(col * n + c, pivot_row * n + c);
            }
            bx.swap(col, pivot_row);
            by.swap(col, pivot_row);
        }
        let diag = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / diag;
            if factor == T::zero() {
                continue;
            }
            for c in col..n {
                let v = a[col * n + c];
                a[row * n + c] = a[row * n + c] - factor * v;
            }
            bx[row] = bx[row] - factor * bx[col];
            by[row] = by[row] - factor * by[col];
        }
    }
    for i in (0..n).rev() {
        let mut sx = bx[i];
        let mut sy = by[i];
        for j in (i + 1)..n {
            sx = sx - a[i * n + j] * bx[j];
            sy = sy - a[i * n + j] * by[j];
        }
        let diag = a[i * n + i];
        bx[i] = sx / diag;
        by[i] = sy / diag;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn square(frame: (u32, u32)) -> ControlPointSet<f64> {
        ControlPointSet::from_pairs(
            &[(0.0, 0.0), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0)],
            frame.0,
            frame.1,
        )
        .unwrap()
    }

    #[test]
    fn kernel_known_values() {
        assert_eq!(radial_kernel(0.0_f64), 0.0);
        assert_eq!(radial_kernel(1.0_f64), 0.0);
        // O(2) = 4 ln 4
        assert_abs_diff_eq!(radial_kernel(2.0_f64), 4.0 * 4.0_f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(radial_kernel(2.0_f64), 5.545177, epsilon = 1e-6);
        // Negative inside the unit disc, positive outside.
        assert!(radial_kernel(0.5_f64) < 0.0);
        assert!(radial_kernel(1.5_f64) > 0.0);
    }

    #[test]
    fn kernel_tiny_radius_is_finite() {
        let v = radial_kernel(1e-200_f64);
        assert!(v.is_finite());
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-30);
        assert!(radial_kernel(1e-30_f32).is_finite());
    }

    #[test]
    fn identity_solve_is_exact() {
        let pts = square((512, 384));
        let t = TpsTransform::solve(&pts, &pts).unwrap();
        assert_eq!(t.affine_offset(), Vec2::zero());
        assert_eq!(t.affine_matrix(), Mat2::identity());
        for w in t.kernel_weights() {
            assert!(w.x.abs() < 1e-9 && w.y.abs() < 1e-9);
        }
        let q = t.evaluate(Vec2::new(17.5, 240.25));
        assert_eq!(q, Vec2::new(17.5, 240.25));
        assert_eq!(t.bending_energy(), 0.0);
    }

    #[test]
    fn translation_recovers_affine_parameters() {
        let src = square((512, 384));
        let dst = src.map_points(|p| p + Vec2::new(5.0, -3.0)).unwrap();
        let t = TpsTransform::solve(&src, &dst).unwrap();
        assert_abs_diff_eq!(t.affine_offset().x, 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.affine_offset().y, -3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.affine_matrix().m00, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.affine_matrix().m01, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.affine_matrix().m10, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.affine_matrix().m11, 1.0, epsilon = 1e-10);
        for w in t.kernel_weights() {
            assert!(w.x.abs() < 1e-9 && w.y.abs() < 1e-9);
        }
        let q = t.evaluate(Vec2::zero());
        assert_abs_diff_eq!(q.x, 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q.y, -3.0, epsilon = 1e-9);
        assert!(t.bending_energy().abs() < 1e-12);
    }

    /// Independent route: assemble and solve the raw pixel-frame system with
    /// nalgebra, then evaluate by direct substitution.
    fn oracle_solve_eval(
        src: &ControlPointSet<f64>,
        dst: &ControlPointSet<f64>,
        query: Vec2<f64>,
    ) -> Vec2<f64> {
        let n = src.len();
        let dim = n + 3;
        let mut a = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        let mut b = nalgebra::DMatrix::<f64>::zeros(dim, 2);
        for r in 0..n {
            a[(r, 0)] = 1.0;
            a[(r, 1)] = src.points()[r].x;
            a[(r, 2)] = src.points()[r].y;
            for c in 0..n {
                a[(r, 3 + c)] = radial_kernel((src.points()[r] - src.points()[c]).norm());
            }
            b[(r, 0)] = dst.points()[r].x;
            b[(r, 1)] = dst.points()[r].y;
        }
        for j in 0..n {
            a[(n, 3 + j)] = 1.0;
            a[(n + 1, 3 + j)] = src.points()[j].x;
            a[(n + 2, 3 + j)] = src.points()[j].y;
        }
        let sol = a.lu().solve(&b).expect("oracle system solvable");
        let mut out = Vec2::new(
            sol[(0, 0)] + sol[(1, 0)] * query.x + sol[(2, 0)] * query.y,
            sol[(0, 1)] + sol[(1, 1)] * query.x + sol[(2, 1)] * query.y,
        );
        for i in 0..n {
            let k = radial_kernel((query - src.points()[i]).norm());
            out += Vec2::new(sol[(3 + i, 0)] * k, sol[(3 + i, 1)] * k);
        }
        out
    }

    #[test]
    fn nonaffine_solve_matches_substitution_oracle() {
        let src = ControlPointSet::from_pairs(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
            2,
            2,
        )
        .unwrap();
        let dst = ControlPointSet::from_pairs(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.5, 1.5)],
            2,
            2,
        )
        .unwrap();
        let t = TpsTransform::solve(&src, &dst).unwrap();
        // Interpolation constraint by substitution.
        for (p, q) in src.points().iter().zip(dst.points().iter()) {
            let got = t.evaluate(*p);
            assert_abs_diff_eq!(got.x, q.x, epsilon = 1e-8);
            assert_abs_diff_eq!(got.y, q.y, epsilon = 1e-8);
        }
        // Off-node value against the independent dense solve.
        let query = Vec2::new(0.5, 0.5);
        let expected = oracle_solve_eval(&src, &dst, query);
        let got = t.evaluate(query);
        assert_abs_diff_eq!(got.x, expected.x, epsilon = 1e-8);
        assert_abs_diff_eq!(got.y, expected.y, epsilon = 1e-8);
    }

    #[test]
    fn nonaffine_bending_energy_matches_double_sum_oracle() {
        let src = ControlPointSet::from_pairs(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
            2,
            2,
        )
        .unwrap();
        let dst = ControlPointSet::from_pairs(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.5, 1.5)],
            2,
            2,
        )
        .unwrap();
        let t = TpsTransform::solve(&src, &dst).unwrap();

        // Oracle: pixel-frame dense solve, then the raw double sum in pixel
        // units. The energy is scale-invariant, so the two frames agree.
        let n = src.len();
        let dim = n + 3;
        let mut a = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        let mut b = nalgebra::DMatrix::<f64>::zeros(dim, 2);
        for r in 0..n {
            a[(r, 0)] = 1.0;
            a[(r, 1)] = src.points()[r].x;
            a[(r, 2)] = src.points()[r].y;
            for c in 0..n {
                a[(r, 3 + c)] = radial_kernel((src.points()[r] - src.points()[c]).norm());
            }
            b[(r, 0)] = dst.points()[r].x;
            b[(r, 1)] = dst.points()[r].y;
        }
        for j in 0..n {
            a[(n, 3 + j)] = 1.0;
            a[(n + 1, 3 + j)] = src.points()[j].x;
            a[(n + 2, 3 + j)] = src.points()[j].y;
        }
        let sol = a.lu().solve(&b).unwrap();
        let mut expected = 0.0;
        for i in 0..n {
            for j in 0..n {
                let k = radial_kernel((src.points()[i] - src.points()[j]).norm());
                expected +=
                    (sol[(3 + i, 0)] * sol[(3 + j, 0)] + sol[(3 + i, 1)] * sol[(3 + j, 1)]) * k;
            }
        }
        let got = t.bending_energy();
        assert!(got > 0.0, "nonaffine energy must be positive, got {got}");
        assert!(
            ((got - expected) / expected).abs() < 1e-8,
            "energy {got} vs oracle {expected}"
        );
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let src = square((512, 384));
        let dst = ControlPointSet::from_pairs(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)], 512, 384)
            .unwrap();
        assert!(matches!(
            TpsTransform::solve(&src, &dst),
            Err(Error::CountMismatch { left: 4, right: 3 })
        ));
    }

    #[test]
    fn too_few_points_is_rejected() {
        let src =
            ControlPointSet::<f64>::from_pairs(&[(0.0, 0.0), (10.0, 10.0)], 512, 384).unwrap();
        let dst = src.clone();
        assert!(matches!(
            TpsTransform::solve(&src, &dst),
            Err(Error::TooFewPoints { count: 2 })
        ));
    }

    #[test]
    fn duplicate_sources_are_rejected() {
        let src = ControlPointSet::from_pairs(
            &[(10.0, 10.0), (10.0, 10.0), (50.0, 60.0), (90.0, 20.0)],
            512,
            384,
        )
        .unwrap();
        let dst = src.map_points(|p| p + Vec2::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            TpsTransform::solve(&src, &dst),
            Err(Error::DuplicatePoints {
                first: 0,
                second: 1,
                ..
            })
        ));
    }

    #[test]
    fn collinear_sources_are_degenerate() {
        let src = ControlPointSet::from_pairs(
            &[(0.0, 50.0), (100.0, 50.0), (200.0, 50.0), (300.0, 50.0)],
            512,
            384,
        )
        .unwrap();
        let dst = src.map_points(|p| p + Vec2::new(0.0, 5.0)).unwrap();
        assert!(matches!(
            TpsTransform::solve(&src, &dst),
            Err(Error::DegenerateConfiguration { .. })
        ));
    }

    #[test]
    fn non_finite_points_are_rejected_at_construction() {
        let err = ControlPointSet::<f64>::from_pairs(&[(0.0, 0.0), (f64::NAN, 1.0)], 64, 64);
        assert!(matches!(err, Err(Error::NonFinitePoint { index: 1 })));
    }

    #[test]
    fn closure_constraints_hold_in_normalized_units() {
        let src = ControlPointSet::<f64>::from_pairs(
            &[
                (10.0, 20.0),
                (500.0, 30.0),
                (40.0, 370.0),
                (480.0, 350.0),
                (250.0, 190.0),
            ],
            512,
            384,
        )
        .unwrap();
        let dst = ControlPointSet::from_pairs(
            &[
                (12.0, 18.0),
                (488.0, 44.0),
                (55.0, 360.0),
                (470.0, 330.0),
                (270.0, 170.0),
            ],
            512,
            384,
        )
        .unwrap();
        let t = TpsTransform::solve(&src, &dst).unwrap();
        let norm = t.normalization();
        let mut w_sum = Vec2::zero();
        let mut pw = [[0.0_f64; 2]; 2];
        for (&w, &p) in t
            .normalized_kernel_weights()
            .iter()
            .zip(src.points().iter())
        {
            w_sum += w;
            let np = (p - norm.center) * norm.scale;
            pw[0][0] += np.x * w.x;
            pw[0][1] += np.x * w.y;
            pw[1][0] += np.y * w.x;
            pw[1][1] += np.y * w.y;
        }
        assert!(w_sum.x.abs() < 1e-8 && w_sum.y.abs() < 1e-8);
        for row in pw {
            for v in row {
                assert!(v.abs() < 1e-6, "closure sum {v}");
            }
        }
        // Interpolation exactness at the nodes.
        for (p, q) in src.points().iter().zip(dst.points().iter()) {
            let got = t.evaluate(*p);
            assert!((got.x - q.x).abs() < 1e-6 && (got.y - q.y).abs() < 1e-6);
        }
    }

    #[test]
    fn f32_solve_interpolates_within_loose_tolerance() {
        let src = ControlPointSet::<f32>::from_pairs(
            &[(0.0, 0.0), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0)],
            128,
            128,
        )
        .unwrap();
        let dst = ControlPointSet::<f32>::from_pairs(
            &[(3.0, 2.0), (104.0, 1.0), (-2.0, 97.0), (110.0, 108.0)],
            128,
            128,
        )
        .unwrap();
        let t = TpsTransform::solve(&src, &dst).unwrap();
        for (p, q) in src.points().iter().zip(dst.points().iter()) {
            let got = t.evaluate(*p);
            assert!((got.x - q.x).abs() < 1e-2 && (got.y - q.y).abs() < 1e-2);
        }
    }
}
