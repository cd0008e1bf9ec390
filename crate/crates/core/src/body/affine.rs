use crate::error::{GeomError, Result};
use crate::linalg::{Matrix, Vector};

/// Smallest |det L| accepted for an invertible map.
pub const DET_EPS: f64 = 1e-12;

/// Invertible affine map `x ↦ L x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    linear: Matrix,
    translation: Vector,
}

impl AffineMap {
    pub fn new(linear: Matrix, translation: Vector) -> Result<Self> {
        let d = translation.len();
        if linear.nrows() != d || linear.ncols() != d {
            return Err(GeomError::DimensionMismatch { expected: d, got: linear.nrows() });
        }
        let det = linear.determinant();
        if !det.is_finite() || det.abs() <= DET_EPS {
            return Err(GeomError::SingularMap { det });
        }
        Ok(AffineMap { linear, translation })
    }

    pub fn identity(d: usize) -> Self {
        AffineMap { linear: Matrix::identity(d, d), translation: Vector::zeros(d) }
    }

    pub fn translation(b: Vector) -> Self {
        let d = b.len();
        AffineMap { linear: Matrix::identity(d, d), translation: b }
    }

    pub fn linear(l: Matrix) -> Result<Self> {
        let d = l.nrows();
        AffineMap::new(l, Vector::zeros(d))
    }

    pub fn scaling(d: usize, s: f64) -> Result<Self> {
        AffineMap::linear(Matrix::identity(d, d) * s)
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn linear_part(&self) -> &Matrix {
        &self.linear
    }

    pub fn translation_part(&self) -> &Vector {
        &self.translation
    }

    pub fn det(&self) -> f64 {
        self.linear.determinant()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.linear * x + &self.translation
    }

    pub fn apply_linear(&self, x: &Vector) -> Vector {
        &self.linear * x
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = self.linear.clone().try_inverse().expect("invertible by construction");
        let t = -(&inv * &self.translation);
        AffineMap { linear: inv, translation: t }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            linear: &self.linear * &other.linear,
            translation: &self.linear * &other.translation + &self.translation,
        }
    }

    /// Largest singular value of the linear part.
    pub fn operator_norm(&self) -> f64 {
        self.linear.clone().svd(false, false).singular_values.max()
    }

    /// Max-abs distance to another map (linear and translation parts).
    pub fn distance(&self, other: &AffineMap) -> f64 {
        let dl = (&self.linear - &other.linear).amax();
        let dt = (&self.translation - &other.translation).amax();
        dl.max(dt)
    }
}
