//! Affine invariant points: centroid `g`, Santaló point `s`, John point `j`
//! and Löwner point `l`, plus affine combinations, equivariance checks and the
//! boundary push `g + (q − g)/Γ`.

use std::sync::Arc;

use crate::body::{affine_image, chord_through, AffineMap, ConvexBody, Polytope};
use crate::config::Config;
use crate::ellipsoids::{john_with, loewner_with, EllipsoidOptions};
use crate::error::{GeomError, Result};
use crate::linalg::{sym_sqrt, symmetrize, Matrix, Vector};
use crate::sphere;

/// A point with an error estimate (standard error, step tolerance or
/// certificate, depending on the map).
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub point: Vector,
    pub error: f64,
}

type Evaluator = dyn Fn(&ConvexBody) -> Result<PointEstimate> + Send + Sync;

/// A named map from bodies to points.
#[derive(Clone)]
pub struct PointMap {
    name: String,
    eval: Arc<Evaluator>,
    /// Claims `p(C) ∈ int C` for every body.
    proper: bool,
}

impl std::fmt::Debug for PointMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PointMap").field("name", &self.name).field("proper", &self.proper).finish()
    }
}

impl PointMap {
    pub fn new<F>(name: impl Into<String>, proper: bool, f: F) -> Self
    where
        F: Fn(&ConvexBody) -> Result<PointEstimate> + Send + Sync + 'static,
    {
        PointMap { name: name.into(), eval: Arc::new(f), proper }
    }

    /// The map `C ↦ v`; not equivariant, for tests and synthetic inputs.
    pub fn constant(name: impl Into<String>, v: Vector) -> Self {
        PointMap::new(name, false, move |_| Ok(PointEstimate { point: v.clone(), error: 0.0 }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn proper(&self) -> bool {
        self.proper
    }

    pub fn eval(&self, body: &ConvexBody) -> Result<Vector> {
        (self.eval)(body).map(|e| e.point)
    }

    pub fn estimate(&self, body: &ConvexBody) -> Result<PointEstimate> {
        (self.eval)(body)
    }

    pub fn centroid(cfg: &Config) -> Self {
        let cfg = *cfg;
        PointMap::new("g", true, move |b| {
            let c = centroid_with(b, &cfg)?;
            Ok(PointEstimate { point: c.point, error: c.stderr })
        })
    }

    pub fn santalo(cfg: &Config) -> Self {
        let cfg = *cfg;
        PointMap::new("s", true, move |b| {
            let tol = 1e3 * cfg.tol.solver * b.diameter_bound();
            Ok(PointEstimate { point: santalo_with(b, tol, &cfg)?, error: tol })
        })
    }

    pub fn john(cfg: &Config) -> Self {
        let cfg = *cfg;
        PointMap::new("j", true, move |b| {
            let r = john_with(b, &EllipsoidOptions::from_config(&cfg, cfg.samples.john))?;
            Ok(PointEstimate { point: r.ellipsoid.center().clone(), error: r.residual.max(r.certificate) })
        })
    }

    pub fn loewner(cfg: &Config) -> Self {
        let cfg = *cfg;
        PointMap::new("l", true, move |b| {
            let r = loewner_with(b, &EllipsoidOptions::from_config(&cfg, cfg.samples.loewner))?;
            Ok(PointEstimate { point: r.ellipsoid.center().clone(), error: r.residual.max(r.certificate) })
        })
    }

    /// One of `g`, `s`, `j`, `l`.
    pub fn by_name(name: &str, cfg: &Config) -> Option<Self> {
        match name {
            "g" => Some(PointMap::centroid(cfg)),
            "s" => Some(PointMap::santalo(cfg)),
            "j" => Some(PointMap::john(cfg)),
            "l" => Some(PointMap::loewner(cfg)),
            _ => None,
        }
    }
}

/// Centroid with its Monte Carlo standard error (zero when exact).
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidEstimate {
    pub point: Vector,
    pub stderr: f64,
    pub exact: bool,
    pub samples: usize,
}

impl CentroidEstimate {
    fn exact(point: Vector) -> Self {
        CentroidEstimate { point, stderr: 0.0, exact: true, samples: 0 }
    }
}

pub fn centroid(body: &ConvexBody) -> Result<Vector> {
    centroid_with(body, &Config::default()).map(|c| c.point)
}

/// Exact for polytopes with a triangulation (d ≤ 3, simplices), balls,
/// ellipsoids and affine images of those; Monte Carlo over the bounding box
/// otherwise.
pub fn centroid_with(body: &ConvexBody, cfg: &Config) -> Result<CentroidEstimate> {
    if let Some(c) = exact_centroid(body) {
        return Ok(CentroidEstimate::exact(c));
    }
    monte_carlo_centroid(body, cfg.samples.centroid, cfg.seed)
}

fn exact_centroid(body: &ConvexBody) -> Option<Vector> {
    match body {
        ConvexBody::Ball(b) => Some(b.center().clone()),
        ConvexBody::Ellipsoid(e) => Some(e.center().clone()),
        ConvexBody::Affine(a) => exact_centroid(a.body()).map(|c| a.map().apply(&c)),
        ConvexBody::Polar(p) if p.exact().is_some() => exact_centroid(p.exact().unwrap()),
        _ => body.polytope_form().and_then(|p| p.volume_centroid()).map(|(_, c)| c),
    }
}

/// Relative standard error above which a Monte Carlo centroid is rejected.
const MC_REL_STDERR: f64 = 1e-2;

pub fn monte_carlo_centroid(body: &ConvexBody, n: usize, seed: u64) -> Result<CentroidEstimate> {
    use rand::Rng;
    let d = body.dim();
    let (lo, hi) = body.bounding_box();
    let mut g = sphere::rng(seed);
    let mut sum = Vector::zeros(d);
    let mut sq = Vector::zeros(d);
    let mut hits = 0usize;
    for _ in 0..n {
        let x = Vector::from_fn(d, |i, _| g.gen_range(lo[i]..=hi[i]));
        if body.membership(&x, 0.0) {
            sq += x.component_mul(&x);
            sum += x;
            hits += 1;
        }
    }
    if hits < 2 {
        return Err(GeomError::MonteCarloVariance { stderr: f64::INFINITY, limit: 0.0 });
    }
    let k = hits as f64;
    let mean = &sum / k;
    let var = (&sq / k - mean.component_mul(&mean)).map(|v| v.max(0.0)) * (k / (k - 1.0));
    let stderr = (var.sum() / k).sqrt();
    let limit = MC_REL_STDERR * (hi - lo).norm();
    if stderr > limit {
        return Err(GeomError::MonteCarloVariance { stderr, limit });
    }
    Ok(CentroidEstimate { point: mean, stderr, exact: false, samples: n })
}

/// `vol((C − z)°)`. Exact for polytopes with facets; otherwise the sphere
/// quadrature `(1/d) ∫ h_{C−z}(u)^{−d} dσ(u)` on `n_dirs` nodes. Convex in `z`.
pub fn polar_volume(body: &ConvexBody, z: &Vector, n_dirs: usize) -> Result<f64> {
    polar_volume_seeded(body, z, n_dirs, Config::default().seed)
}

pub fn polar_volume_seeded(body: &ConvexBody, z: &Vector, n_dirs: usize, seed: u64) -> Result<f64> {
    let d = body.dim();
    if z.len() != d {
        return Err(GeomError::DimensionMismatch { expected: d, got: z.len() });
    }
    if let Some(p) = body.polytope_form() {
        if let Some(facets) = p.facets() {
            let scale = p.scale();
            let mut verts = Vec::with_capacity(facets.len());
            for f in facets {
                let gap = f.offset - f.normal.dot(z);
                if gap <= 1e-10 * scale {
                    return Err(GeomError::NotInterior);
                }
                verts.push(&f.normal / gap);
            }
            if let Some(v) = Polytope::new(verts)?.volume() {
                return Ok(v);
            }
        }
    }
    let dirs = sphere::directions(d, n_dirs.max(2 * d), seed);
    let scale = body.diameter_bound();
    let mut acc = 0.0;
    for u in &dirs {
        let h = body.support_unchecked(u) - z.dot(u);
        if h <= 1e-10 * scale {
            return Err(GeomError::NotInterior);
        }
        acc += h.powi(-(d as i32));
    }
    if !body.membership(z, 0.0) {
        return Err(GeomError::NotInterior);
    }
    Ok(sphere::sphere_area(d) * acc / (d as f64 * dirs.len() as f64))
}

pub fn santalo(body: &ConvexBody, tol: f64) -> Result<Vector> {
    santalo_with(body, tol, &Config::default())
}

/// Minimizer of `z ↦ vol((C − z)°)` by compass pattern search from the
/// centroid; stops once the step falls below `tol`.
pub fn santalo_with(body: &ConvexBody, tol: f64, cfg: &Config) -> Result<Vector> {
    let d = body.dim();
    let n = cfg.samples.polar;
    let f = |z: &Vector| polar_volume_seeded(body, z, n, cfg.seed).unwrap_or(f64::INFINITY);
    let mut z = centroid_with(body, cfg)?.point;
    let mut fz = f(&z);
    if !fz.is_finite() {
        z = body.interior_point();
        fz = f(&z);
    }
    if !fz.is_finite() {
        return Err(GeomError::NotInterior);
    }
    // Search in coordinates z = z₀ + R y with R R ᵀ the shape covariance, so
    // the compass directions follow the body under affine maps.
    let root = sym_sqrt(&shape_covariance(body, cfg.seed));
    let root_norm = root.norm();
    let axes: Vec<Vector> = sphere::axis_directions(d).iter().map(|e| &root * e).collect();
    let mut step = 0.25;
    let mut last: Option<Vector> = None;
    let mut iter = 0;
    while step * root_norm >= tol {
        iter += 1;
        if iter > cfg.max_iter {
            return Err(GeomError::NoConvergence { what: "santalo pattern search", residual: step * root_norm });
        }
        let mut best: Option<(f64, Vector)> = None;
        for u in last.iter().chain(&axes) {
            let fc = f(&(&z + u * step));
            if fc < best.as_ref().map_or(fz, |b| b.0) {
                best = Some((fc, u.clone()));
            }
        }
        match best {
            Some((fc, u)) => {
                z += &u * step;
                fz = fc;
                // Bias the next poll toward the accumulated descent direction.
                last = Some(match &last {
                    Some(l) => (l + &u) * 0.5,
                    None => u,
                });
                step *= 1.5;
            }
            None => {
                last = None;
                step *= 0.5;
            }
        }
    }
    Ok(z)
}

/// Vertex covariance for polytopes, covariance of sampled boundary points
/// otherwise.
fn shape_covariance(body: &ConvexBody, seed: u64) -> Matrix {
    let pts: Vec<Vector> = match body.polytope_form() {
        Some(p) => p.vertices().to_vec(),
        None => {
            let d = body.dim();
            sphere::directions(d, 64 * d, seed).iter().map(|u| body.support_point(u)).collect()
        }
    };
    let d = pts[0].len();
    let m = pts.iter().fold(Vector::zeros(d), |a, p| a + p) / pts.len() as f64;
    let mut cov = Matrix::zeros(d, d);
    for p in &pts {
        let c = p - &m;
        cov.ger(1.0 / pts.len() as f64, &c, &c, 1.0);
    }
    symmetrize(&cov)
}

pub fn john_point(body: &ConvexBody) -> Result<Vector> {
    PointMap::john(&Config::default()).eval(body)
}

pub fn loewner_point(body: &ConvexBody) -> Result<Vector> {
    PointMap::loewner(&Config::default()).eval(body)
}

/// `Σ w_i p_i`; the weights must sum to 1 within 1e-12.
pub fn affine_combination(maps: &[PointMap], weights: &[f64]) -> Result<PointMap> {
    if maps.len() != weights.len() || maps.is_empty() {
        return Err(GeomError::DimensionMismatch { expected: maps.len(), got: weights.len() });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(GeomError::InvalidWeights(total));
    }
    let proper = maps.iter().zip(weights).all(|(m, &w)| m.proper && w >= 0.0);
    let name = maps
        .iter()
        .zip(weights)
        .map(|(m, w)| format!("{w}·{}", m.name))
        .collect::<Vec<_>>()
        .join(" + ");
    let parts: Vec<(PointMap, f64)> = maps.iter().cloned().zip(weights.iter().copied()).collect();
    Ok(PointMap::new(name, proper, move |b| {
        let mut acc: Option<Vector> = None;
        let mut err = 0.0;
        for (m, w) in &parts {
            if *w == 0.0 {
                continue;
            }
            let e = m.estimate(b)?;
            err += w.abs() * e.error;
            acc = Some(match acc {
                Some(a) => a + e.point * *w,
                None => e.point * *w,
            });
        }
        Ok(PointEstimate { point: acc.unwrap_or_else(|| Vector::zeros(b.dim())), error: err })
    }))
}

/// `‖p(T C) − T p(C)‖`.
pub fn equivariance_check(map: &PointMap, body: &ConvexBody, t: &AffineMap) -> Result<f64> {
    let image = affine_image(t, body)?;
    let lhs = map.eval(&image)?;
    let rhs = t.apply(&map.eval(body)?);
    Ok((lhs - rhs).norm())
}

/// `γ = 1/sup{λ > 0 : g + λ(q − g) ∈ C}` and `Γ = ψ(γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeValue {
    pub gamma: f64,
    pub big_gamma: f64,
}

pub fn psi(s: f64) -> f64 {
    if s <= 0.5 {
        1.0 - s
    } else {
        s
    }
}

pub fn gauge_ratio(body: &ConvexBody, q: &Vector, g: &Vector) -> Result<GaugeValue> {
    let scale = body.diameter_bound();
    let dirs = sphere::axis_directions(body.dim());
    if !body.membership(g, 0.0) || body.interior_margin(g, &dirs) <= 1e-10 * scale {
        return Err(GeomError::NotInterior);
    }
    let dist = (q - g).norm();
    if dist <= 1e-15 * scale {
        return Ok(GaugeValue { gamma: 0.0, big_gamma: 1.0 });
    }
    let chord = chord_through(body, g, q, 1e-12 * scale.max(1.0))?;
    let gamma = dist / chord.exit;
    Ok(GaugeValue { gamma, big_gamma: psi(gamma) })
}

/// `g + (q − g)/Γ_q` with `g` the anchor point (the centroid by default).
pub fn boundary_push(map_q: &PointMap, body: &ConvexBody, anchor: Option<&PointMap>) -> Result<Vector> {
    let g = match anchor {
        Some(a) => a.eval(body)?,
        None => centroid(body)?,
    };
    let q = map_q.eval(body)?;
    let gv = gauge_ratio(body, &q, &g)?;
    if gv.gamma == 0.0 {
        return Ok(g);
    }
    Ok(&g + (q - &g) / gv.big_gamma)
}
