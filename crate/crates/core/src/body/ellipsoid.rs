use crate::error::{GeomError, Result};
use crate::linalg::{sym_inv_sqrt, sym_sqrt, symmetrize, Matrix, Vector};
use crate::sphere::ball_volume;

/// `{x : (x − c)ᵀ A (x − c) ≤ 1}` with `A` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: Vector,
    shape: Matrix,
    shape_inv: Matrix,
    /// `A^{-1/2}`: maps the unit ball onto the centred ellipsoid.
    radii_map: Matrix,
}

impl Ellipsoid {
    pub fn new(center: Vector, shape: Matrix) -> Result<Self> {
        let d = center.len();
        if shape.nrows() != d || shape.ncols() != d {
            return Err(GeomError::DimensionMismatch { expected: d, got: shape.nrows() });
        }
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-12 * shape.amax().max(1.0) {
            return Err(GeomError::InvalidBody(format!("ellipsoid shape not symmetric ({asym:e})")));
        }
        let shape = symmetrize(&shape);
        let eig = shape.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(GeomError::InvalidBody("ellipsoid shape not positive definite".into()));
        }
        let shape_inv = symmetrize(&shape.clone().try_inverse().expect("positive definite"));
        let radii_map = sym_inv_sqrt(&shape);
        Ok(Ellipsoid { center, shape, shape_inv, radii_map })
    }

    /// Euclidean ball of radius `r`.
    pub fn ball(center: Vector, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(GeomError::InvalidBody(format!("ball radius must be positive, got {r}")));
        }
        let d = center.len();
        Ellipsoid::new(center, Matrix::identity(d, d) / (r * r))
    }

    /// `{B u + c : ‖u‖ ≤ 1}` for symmetric positive definite `B`.
    pub fn from_map(b: &Matrix, center: Vector) -> Result<Self> {
        let bbt = b * b.transpose();
        let shape = bbt
            .try_inverse()
            .ok_or_else(|| GeomError::InvalidBody("singular ellipsoid map".into()))?;
        Ellipsoid::new(center, symmetrize(&shape))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn shape(&self) -> &Matrix {
        &self.shape
    }

    pub fn shape_inverse(&self) -> &Matrix {
        &self.shape_inv
    }

    /// Symmetric `B = A^{-1/2}` with `E = B·B_2^d + c`.
    pub fn radii_map(&self) -> &Matrix {
        &self.radii_map
    }

    /// `A^{1/2}`: the linear part of the map sending `E` to the unit ball.
    pub fn normalizing_map(&self) -> Matrix {
        sym_sqrt(&self.shape)
    }

    pub fn support(&self, u: &Vector) -> f64 {
        self.center.dot(u) + (u.dot(&(&self.shape_inv * u))).max(0.0).sqrt()
    }

    pub fn support_point(&self, u: &Vector) -> Vector {
        let w = &self.shape_inv * u;
        let n = u.dot(&w).max(0.0).sqrt();
        if n == 0.0 {
            return self.center.clone();
        }
        &self.center + w / n
    }

    /// `‖x − c‖_A`.
    pub fn gauge(&self, x: &Vector) -> f64 {
        let y = x - &self.center;
        y.dot(&(&self.shape * &y)).max(0.0).sqrt()
    }

    pub fn max_radius(&self) -> f64 {
        1.0 / self.shape.clone().symmetric_eigen().eigenvalues.min().sqrt()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        let q = self.gauge(x);
        q <= 1.0 || (q - 1.0) * self.max_radius() <= tol
    }

    pub fn volume(&self) -> f64 {
        ball_volume(self.dim()) / self.shape.determinant().sqrt()
    }

    pub fn log_volume(&self) -> f64 {
        ball_volume(self.dim()).ln() - 0.5 * self.shape.determinant().ln()
    }
}
