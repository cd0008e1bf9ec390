//! The symmetry measure `φ_{p1,p2}`, the `2/(d+1)` lower bound for the John
//! and Löwner points, zeros of `z ↦ p((C − z)°)` and the empirical distance
//! between two point maps.

use rand::Rng;

use crate::body::{chord_through, polar, translate, ConvexBody, Polytope};
use crate::config::Config;
use crate::error::{GeomError, Result};
use crate::linalg::{lstsq, Matrix, Vector};
use crate::points::PointMap;
use crate::sphere;

/// Relative merge radius for the `φ = 1` branch.
pub const MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryMeasureResult {
    pub phi: f64,
    pub delta: f64,
    /// Length of the chord through both points; zero when they coincide.
    pub chord_length: f64,
    pub p1_val: Vector,
    pub p2_val: Vector,
}

/// `φ = 1 − ‖p1 − p2‖ / vol_1(a ∩ C)` with `a` the line through both points,
/// and `φ = 1` when they coincide.
pub fn phi_measure(p1: &PointMap, p2: &PointMap, body: &ConvexBody) -> Result<SymmetryMeasureResult> {
    let a = p1.eval(body)?;
    let b = p2.eval(body)?;
    phi_from_points(body, a, b)
}

pub fn phi_from_points(body: &ConvexBody, a: Vector, b: Vector) -> Result<SymmetryMeasureResult> {
    let diam = body.diameter_bound();
    let dist = (&a - &b).norm();
    if dist <= MERGE_TOL * diam {
        return Ok(SymmetryMeasureResult { phi: 1.0, delta: 0.0, chord_length: 0.0, p1_val: a, p2_val: b });
    }
    let chord = chord_through(body, &a, &b, 1e-12 * diam)?;
    let delta = dist / chord.length;
    Ok(SymmetryMeasureResult { phi: 1.0 - delta, delta, chord_length: chord.length, p1_val: a, p2_val: b })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundCheck {
    pub phi: f64,
    pub bound: f64,
    pub ok: bool,
}

/// `φ_{j,l}(C) ≥ 2/(d+1) − slack`.
pub fn check_lower_bound_jl(body: &ConvexBody, slack: f64, cfg: &Config) -> Result<LowerBoundCheck> {
    let r = phi_measure(&PointMap::john(cfg), &PointMap::loewner(cfg), body)?;
    let bound = 2.0 / (body.dim() as f64 + 1.0);
    Ok(LowerBoundCheck { phi: r.phi, bound, ok: r.phi >= bound - slack })
}

#[derive(Debug, Clone)]
pub struct DualZeroReport {
    /// Cluster representatives `z` with `‖p((C − z)°)‖ ≤ tol`.
    pub zeros: Vec<Vector>,
    /// `‖p((C − z)°)‖` at each reported zero.
    pub residuals: Vec<f64>,
    /// Grid points per axis; zero when no grid was used.
    pub grid: usize,
    pub tol: f64,
    pub cluster_radius: f64,
}

/// Largest dimension searched on a full grid.
const GRID_MAX_DIM: usize = 3;
/// Seeds refined by local descent.
const DESCENT_SEEDS: usize = 8;

/// `z ↦ p((C − z)°)`; `None` when `z` is not interior or `p` fails.
fn dual_value(p: &PointMap, body: &ConvexBody, z: &Vector) -> Option<Vector> {
    let shifted = translate(body, &-z).ok()?;
    let pol = polar(&shifted).ok()?;
    p.eval(&pol).ok()
}

/// Points `z ∈ int C` with `p((C − z)°) = 0`: an interior grid (d ≤ 3) or
/// random interior starts, local Newton descent on `‖p((C − z)°)‖` from the
/// smallest values, then clustering at `1e-3·diam`.
pub fn dual_zero_search(p: &PointMap, body: &ConvexBody, grid_n: usize, tol: f64, cfg: &Config) -> Result<DualZeroReport> {
    let d = body.dim();
    let diam = body.diameter_bound();
    let cluster_radius = 1e-3 * diam;
    let (lo, hi) = body.bounding_box();
    let dirs = sphere::directions(d, 8 * d, cfg.seed);
    let interior = |z: &Vector| body.membership(z, 0.0) && body.interior_margin(z, &dirs) > 1e-6 * diam;

    let mut starts: Vec<Vector> = Vec::new();
    let grid = if d <= GRID_MAX_DIM && grid_n >= 2 { grid_n } else { 0 };
    if grid > 0 {
        let total = grid.pow(d as u32);
        for k in 0..total {
            let mut idx = k;
            let z = Vector::from_fn(d, |i, _| {
                let c = idx % grid;
                idx /= grid;
                // Cell centres, so no grid point lies on the bounding box.
                lo[i] + (hi[i] - lo[i]) * (c as f64 + 0.5) / grid as f64
            });
            if interior(&z) {
                starts.push(z);
            }
        }
    } else {
        let mut g = sphere::rng(cfg.seed);
        while starts.len() < 64 * d {
            let z = Vector::from_fn(d, |i, _| g.gen_range(lo[i]..=hi[i]));
            if interior(&z) {
                starts.push(z);
            }
        }
    }
    let mut scored: Vec<(f64, Vector)> =
        starts.into_iter().filter_map(|z| dual_value(p, body, &z).map(|v| (v.norm(), z))).collect();
    if scored.is_empty() {
        return Err(GeomError::NoDualZero { grid });
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Keep seeds that are at least a grid cell apart.
    let cell = (0..d).map(|i| hi[i] - lo[i]).fold(0.0, f64::max) / grid.max(8) as f64;
    let mut seeds: Vec<Vector> = Vec::new();
    for (_, z) in &scored {
        if seeds.iter().all(|s| (s - z).norm() > 2.0 * cell) {
            seeds.push(z.clone());
            if seeds.len() == DESCENT_SEEDS {
                break;
            }
        }
    }

    let mut zeros: Vec<Vector> = Vec::new();
    let mut residuals = Vec::new();
    for s in seeds {
        let Some((z, r)) = newton_zero(p, body, s, tol, diam) else { continue };
        if r > tol {
            continue;
        }
        match zeros.iter().position(|w| (w - &z).norm() <= cluster_radius) {
            Some(i) if residuals[i] <= r => {}
            Some(i) => {
                zeros[i] = z;
                residuals[i] = r;
            }
            None => {
                zeros.push(z);
                residuals.push(r);
            }
        }
    }
    if zeros.is_empty() {
        return Err(GeomError::NoDualZero { grid });
    }
    Ok(DualZeroReport { zeros, residuals, grid, tol, cluster_radius })
}

/// Damped Newton on `F(z) = p((C − z)°)` with a finite-difference Jacobian.
fn newton_zero(p: &PointMap, body: &ConvexBody, mut z: Vector, tol: f64, diam: f64) -> Option<(Vector, f64)> {
    let d = z.len();
    let mut f = dual_value(p, body, &z)?;
    let h = 1e-6 * diam;
    for _ in 0..50 {
        let r = f.norm();
        if r <= tol * 1e-3 {
            break;
        }
        let mut jac = Matrix::zeros(d, d);
        for i in 0..d {
            let mut zp = z.clone();
            zp[i] += h;
            let mut zm = z.clone();
            zm[i] -= h;
            let col = match (dual_value(p, body, &zp), dual_value(p, body, &zm)) {
                (Some(a), Some(b)) => (a - b) / (2.0 * h),
                (Some(a), None) => (a - &f) / h,
                (None, Some(b)) => (&f - b) / h,
                (None, None) => return Some((z, r)),
            };
            jac.set_column(i, &col);
        }
        let step = lstsq(&jac, &(-&f));
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-6 {
            let cand = &z + &step * alpha;
            if let Some(fc) = dual_value(p, body, &cand) {
                if fc.norm() < r {
                    z = cand;
                    f = fc;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let r = f.norm();
    Some((z, r))
}

#[derive(Debug, Clone)]
pub struct DistanceEstimate {
    /// `max ‖p(C) − q(C)‖` over the sampled bodies; a lower bound of the sup.
    pub value: f64,
    /// Index of the maximizing body in the generated sequence.
    pub argmax: usize,
    pub values: Vec<f64>,
}

/// Random polytope `C` with `B_2^d ⊆ C ⊆ dB_2^d`: a randomly rotated
/// `√d·B_1^d` (whose facets touch the unit sphere) plus random points with
/// norms in `[1, d]`.
pub fn sandwiched_polytope<R: Rng>(d: usize, extra: usize, rng: &mut R) -> Result<Polytope> {
    let mut basis: Vec<Vector> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = sphere::random_unit(rng, d);
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let n = v.norm();
        if n > 1e-6 {
            basis.push(v / n);
        }
    }
    let r = (d as f64).sqrt();
    let mut pts: Vec<Vector> = basis.iter().flat_map(|b| [b * r, b * -r]).collect();
    for _ in 0..extra {
        let u = sphere::random_unit(rng, d);
        pts.push(u * rng.gen_range(1.0..=d as f64));
    }
    Polytope::hull_of(pts)
}

/// Lower-bound estimate of `sup_{B_2 ⊆ C ⊆ dB_2} ‖p(C) − q(C)‖` from
/// `n_bodies` random sandwiched polytopes. The body sequence depends only on
/// `seed`, so the estimate is nondecreasing in `n_bodies`.
pub fn point_distance_estimate(p: &PointMap, q: &PointMap, d: usize, n_bodies: usize, seed: u64) -> Result<DistanceEstimate> {
    let mut rng = sphere::rng(seed);
    let mut values = Vec::with_capacity(n_bodies);
    for _ in 0..n_bodies {
        let extra = rng.gen_range(1..=2 * d + 2);
        let body = ConvexBody::Polytope(sandwiched_polytope(d, extra, &mut rng)?);
        values.push((p.eval(&body)? - q.eval(&body)?).norm());
    }
    let (argmax, value) =
        values.iter().copied().enumerate().fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(DistanceEstimate { value, argmax, values })
}
