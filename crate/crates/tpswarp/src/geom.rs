//! Small 2-D vector/matrix types used throughout the engine.
//!
//! Coordinates are pixel coordinates with the origin at the top-left corner,
//! x growing rightward and y growing downward.

use crate::scalar::Scalar;

/// A 2-D point or displacement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product of the embedded vectors.
    #[inline]
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn cast<U: Scalar>(self) -> Vec2<U> {
        Vec2::new(U::of(self.x.to_f64_lossy()), U::of(self.y.to_f64_lossy()))
    }
}

impl<T: Scalar> std::ops::Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> std::ops::Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> std::ops::Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl<T: Scalar> std::ops::AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

/// A 2x2 matrix in row-major layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T> {
    pub m00: T,
    pub m01: T,
    pub m10: T,
    pub m11: T,
}

impl<T: Scalar> Mat2<T> {
    #[inline]
    pub fn new(m00: T, m01: T, m10: T, m11: T) -> Self {
        Self { m00, m01, m10, m11 }
    }

    #[inline]
    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    /// Rotation by `angle` radians. With the image's y-down axis the positive
    /// direction is whatever this matrix does; every consumer in the crate
    /// uses the same convention, which is all that matters.
    #[inline]
    pub fn rotation(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, -s, s, c)
    }

    #[inline]
    pub fn mul_vec(self, v: Vec2<T>) -> Vec2<T> {
        Vec2::new(
            self.m00 * v.x + self.m01 * v.y,
            self.m10 * v.x + self.m11 * v.y,
        )
    }

    #[inline]
    pub fn det(self) -> T {
        self.m00 * self.m11 - self.m01 * self.m10
    }
}

/// Centre of a width x height pixel lattice: ((w-1)/2, (h-1)/2).
///
/// This is the centroid of the integer pixel coordinates, which makes
/// translation fields orthogonal to the rotation generator about it.
#[inline]
pub fn frame_center<T: Scalar>(width: u32, height: u32) -> Vec2<T> {
    let half = T::of(0.5);
    Vec2::new(
        (T::of(f64::from(width)) - T::one()) * half,
        (T::of(f64::from(height)) - T::one()) * half,
    )
}
