//! Run configuration shared by every solver.
//!
//! All solvers are deterministic for a fixed `seed`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Boundary tolerance in body-scale units.
    pub boundary: f64,
    /// Tolerance for support-value comparisons (containment certificates).
    pub support: f64,
    /// Stopping tolerance of the ellipsoid solvers.
    pub solver: f64,
    /// Residual allowed when accepting a symmetry.
    pub group: f64,
    /// Residual allowed when accepting an affine equivalence.
    pub equivalence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { boundary: 1e-10, support: 1e-9, solver: 1e-9, group: 1e-8, equivalence: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Samples {
    /// Monte Carlo samples for centroids of non-polytopal bodies.
    pub centroid: usize,
    /// Initial support samples for the Loewner solver.
    pub loewner: usize,
    /// Initial constraint directions for the John solver.
    pub john: usize,
    /// Sphere quadrature nodes for polar volumes of oracle bodies.
    pub polar: usize,
    /// Directions used for Hausdorff estimates and certification nets.
    pub net: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Samples { centroid: 200_000, loewner: 2000, john: 600, polar: 20_000, net: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub tol: Tolerances,
    pub samples: Samples,
    pub seed: u64,
    /// Iteration cap shared by the iterative solvers.
    pub max_iter: usize,
    /// Largest vertex count accepted by the symmetry search.
    pub symmetry_vertex_limit: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: Tolerances::default(),
            samples: Samples::default(),
            seed: 0x5eed,
            max_iter: 200_000,
            symmetry_vertex_limit: 60,
        }
    }
}

impl Config {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks that every tolerance is positive.
    pub fn validate(&self) -> Result<(), String> {
        let t = &self.tol;
        for (name, v) in [
            ("tol.boundary", t.boundary),
            ("tol.support", t.support),
            ("tol.solver", t.solver),
            ("tol.group", t.group),
            ("tol.equivalence", t.equivalence),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be a positive number, got {v}"));
            }
        }
        Ok(())
    }
}
