//! Löwner (minimum-volume enclosing) and John (maximum-volume inscribed)
//! ellipsoids, John position and contact systems.

pub mod john;
pub mod mvee;

use serde::Serialize;

pub use mvee::mvee_points;

/// Weights above this fraction of the largest one mark contact candidates.
pub const CONTACT_THRESHOLD: f64 = 1e-6;

use crate::body::{affine_image, AffineMap, ConvexBody, Ellipsoid, Polytope};
use crate::config::Config;
use crate::error::{GeomError, Result};
use crate::linalg::{nnls, sym_inv_sqrt, sym_sqrt, symmetrize, Matrix, Vector};
use crate::sphere;
use john::HalfSpaces;

/// Contact points `v_i` on the unit sphere with weights `c_i > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactSystem {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `‖Σ c_i v_i v_iᵀ − Id‖_F`.
    pub identity_residual: f64,
    /// `‖Σ c_i v_i‖`.
    pub mean_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactResiduals {
    pub identity: f64,
    pub mean: f64,
    /// Largest `|‖v_i‖ − 1|`.
    pub unit: f64,
}

impl ContactSystem {
    pub fn new(points: Vec<Vector>, weights: Vec<f64>) -> Self {
        let r = residuals(&points, &weights);
        ContactSystem {
            points: points.iter().map(|v| v.iter().copied().collect()).collect(),
            weights,
            identity_residual: r.identity,
            mean_residual: r.mean,
        }
    }

    pub fn vectors(&self) -> Vec<Vector> {
        self.points.iter().map(|p| Vector::from_column_slice(p)).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The system seen through an orthogonal change of coordinates.
    fn rotated(&self, q: &Matrix) -> Self {
        ContactSystem::new(self.vectors().iter().map(|v| q * v).collect(), self.weights.clone())
    }
}

fn residuals(points: &[Vector], weights: &[f64]) -> ContactResiduals {
    let Some(d) = points.first().map(|v| v.len()) else {
        return ContactResiduals { identity: f64::INFINITY, mean: 0.0, unit: 0.0 };
    };
    let mut m = -Matrix::identity(d, d);
    let mut s = Vector::zeros(d);
    let mut unit: f64 = 0.0;
    for (v, &c) in points.iter().zip(weights) {
        m.ger(c, v, v, 1.0);
        s += v * c;
        unit = unit.max((v.norm() - 1.0).abs());
    }
    ContactResiduals { identity: m.norm(), mean: s.norm(), unit }
}

/// Both contact identities to `tol`, unit contact points and positive weights.
pub fn verify_contact_system(sys: &ContactSystem, tol: f64) -> (bool, ContactResiduals) {
    let r = residuals(&sys.vectors(), &sys.weights);
    let ok = !sys.is_empty()
        && r.identity <= tol
        && r.mean <= tol
        && r.unit <= 1e-9
        && sys.weights.len() == sys.points.len()
        && sys.weights.iter().all(|&c| c > 0.0);
    (ok, r)
}

/// Residual above which [`solve_contact_weights`] reports infeasibility.
pub const CONTACT_FEASIBILITY: f64 = 1e-8;

/// Non-negative weights minimizing the stacked residual of both contact
/// identities. Off-diagonal entries are weighted by √2 so the residual is the
/// Frobenius norm.
pub fn solve_contact_weights(points: &[Vector]) -> Result<(Vec<f64>, f64)> {
    if points.is_empty() {
        return Err(GeomError::Infeasible("no contact points".into(), f64::INFINITY));
    }
    if let Some(v) = points.iter().find(|v| (v.norm() - 1.0).abs() > 1e-9) {
        return Err(GeomError::InvalidBody(format!("contact point of norm {} is not on the unit sphere", v.norm())));
    }
    let (x, res) = fit_weights(points);
    if res > CONTACT_FEASIBILITY {
        return Err(GeomError::Infeasible("points cannot certify John position".into(), res));
    }
    Ok((x, res))
}

fn fit_weights(points: &[Vector]) -> (Vec<f64>, f64) {
    let d = points[0].len();
    let rows = d * (d + 1) / 2 + d;
    let mut a = Matrix::zeros(rows, points.len());
    let mut b = Vector::zeros(rows);
    let mut r = 0;
    for p in 0..d {
        for q in p..d {
            let w = if p == q { 1.0 } else { std::f64::consts::SQRT_2 };
            for (k, v) in points.iter().enumerate() {
                a[(r, k)] = w * v[p] * v[q];
            }
            b[r] = if p == q { 1.0 } else { 0.0 };
            r += 1;
        }
    }
    for p in 0..d {
        for (k, v) in points.iter().enumerate() {
            a[(r, k)] = v[p];
        }
        r += 1;
    }
    let (x, res) = nnls(&a, &b);
    (x.iter().copied().collect(), res)
}

/// Contact candidates above the weight threshold, with weights refitted by
/// NNLS when that certifies better than the solver's own dual weights.
fn contact_system(points: &[Vector], weights: &[f64]) -> ContactSystem {
    let wmax = weights.iter().cloned().fold(0.0, f64::max);
    let (mut cp, mut cw) = (Vec::new(), Vec::new());
    for (v, &w) in points.iter().zip(weights) {
        if w > CONTACT_THRESHOLD * wmax {
            cp.push(v.clone());
            cw.push(w);
        }
    }
    let own = ContactSystem::new(cp.clone(), cw);
    if cp.is_empty() {
        return own;
    }
    let (fw, _) = fit_weights(&cp);
    let fmax = fw.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..cp.len()).filter(|&i| fw[i] > 1e-12 * fmax).collect();
    let refit = ContactSystem::new(keep.iter().map(|&i| cp[i].clone()).collect(), keep.iter().map(|&i| fw[i]).collect());
    let score = |c: &ContactSystem| c.identity_residual.max(c.mean_residual);
    if score(&refit) < score(&own) {
        refit
    } else {
        own
    }
}

/// Output of the ellipsoid solvers.
#[derive(Debug, Clone)]
pub struct EllipsoidResult {
    pub ellipsoid: Ellipsoid,
    /// Solver iterations (Khachiyan steps or Newton steps).
    pub iterations: usize,
    /// Solver residual: Khachiyan ε or barrier duality gap.
    pub residual: f64,
    /// Largest support-value violation on the verification net; zero on
    /// exact paths.
    pub certificate: f64,
    pub contact: Option<ContactSystem>,
    pub tol: f64,
}

impl EllipsoidResult {
    fn exact(ellipsoid: Ellipsoid, tol: f64) -> Self {
        EllipsoidResult { ellipsoid, iterations: 0, residual: 0.0, certificate: 0.0, contact: None, tol }
    }

    /// `T(E)` with the contact system carried along.
    fn mapped(&self, t: &AffineMap) -> Result<Self> {
        let img = match affine_image(t, &ConvexBody::Ellipsoid(self.ellipsoid.clone()))? {
            ConvexBody::Ellipsoid(e) => e,
            _ => unreachable!("ellipsoids map eagerly"),
        };
        // Normalized coordinates differ by Q = A'^{1/2} L A^{-1/2}, orthogonal.
        let contact = self.contact.as_ref().map(|c| {
            let q = sym_sqrt(img.shape()) * t.linear_part() * sym_inv_sqrt(self.ellipsoid.shape());
            c.rotated(&q)
        });
        Ok(EllipsoidResult { ellipsoid: img, contact, ..self.clone() })
    }
}

/// Sample counts and tolerances for the ellipsoid solvers.
#[derive(Debug, Clone)]
pub struct EllipsoidOptions {
    /// Initial support directions.
    pub samples: usize,
    /// Size of the verification net.
    pub net: usize,
    /// Solver tolerance (Khachiyan ε, barrier gap).
    pub tol: f64,
    /// Allowed support-value violation on the verification net.
    pub certify: f64,
    pub seed: u64,
    pub max_rounds: usize,
    pub max_iter: usize,
}

impl Default for EllipsoidOptions {
    fn default() -> Self {
        EllipsoidOptions::from_config(&Config::default(), 2000)
    }
}

impl EllipsoidOptions {
    pub fn from_config(cfg: &Config, samples: usize) -> Self {
        EllipsoidOptions {
            samples,
            net: cfg.samples.net,
            tol: cfg.tol.solver,
            certify: 1e-6,
            seed: cfg.seed,
            max_rounds: 60,
            max_iter: cfg.max_iter,
        }
    }

    pub fn with(samples: usize, tol: f64) -> Self {
        EllipsoidOptions { samples, tol, ..Default::default() }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    John,
    Loewner,
}

/// Closed forms: ellipsoids, `B_p` balls and affine images of those.
fn closed_form(body: &ConvexBody, kind: Kind, opts: &EllipsoidOptions) -> Option<Result<EllipsoidResult>> {
    match body {
        ConvexBody::Ellipsoid(e) => Some(Ok(EllipsoidResult::exact(e.clone(), opts.tol))),
        ConvexBody::Ball(b) if b.radius() > 0.0 => {
            let d = b.dim() as f64;
            let p = b.p();
            let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
            // Inscribed radius d^{1/2−1/p} for p ≤ 2, circumradius d^{1/2−1/p} for p ≥ 2.
            let scaled = (kind == Kind::John) == (p < 2.0);
            let r = if scaled { b.radius() * d.powf(0.5 - inv_p) } else { b.radius() };
            Some(Ellipsoid::ball(b.center().clone(), r).map(|e| EllipsoidResult::exact(e, opts.tol)))
        }
        ConvexBody::Affine(a) => Some(solve(a.body(), kind, opts).and_then(|r| r.mapped(a.map()))),
        ConvexBody::Polar(p) => p.exact().map(|e| solve(e, kind, opts)),
        _ => None,
    }
}

fn solve(body: &ConvexBody, kind: Kind, opts: &EllipsoidOptions) -> Result<EllipsoidResult> {
    if let Some(r) = closed_form(body, kind, opts) {
        return r;
    }
    if let Some(p) = body.polytope_form() {
        match kind {
            Kind::Loewner => return mvee_points(p.vertices(), opts.tol, opts.max_iter),
            Kind::John if p.facets().is_some() => return john_facets(&p, opts),
            Kind::John => {}
        }
    }
    match kind {
        Kind::Loewner => loewner_sampled(body, opts),
        Kind::John => john_sampled(body, opts),
    }
}

/// Löwner ellipsoid from `n_samples` support points plus adaptive refinement.
pub fn loewner(body: &ConvexBody, n_samples: usize, tol: f64) -> Result<EllipsoidResult> {
    loewner_with(body, &EllipsoidOptions::with(n_samples, tol))
}

pub fn loewner_with(body: &ConvexBody, opts: &EllipsoidOptions) -> Result<EllipsoidResult> {
    solve(body, Kind::Loewner, opts)
}

/// John ellipsoid from `n_dirs` support constraints plus adaptive refinement.
pub fn john(body: &ConvexBody, n_dirs: usize, tol: f64) -> Result<EllipsoidResult> {
    john_with(body, &EllipsoidOptions::with(n_dirs, tol))
}

pub fn john_with(body: &ConvexBody, opts: &EllipsoidOptions) -> Result<EllipsoidResult> {
    solve(body, Kind::John, opts)
}

/// Support-value violations on a fresh random net, most violated first, with
/// local ascent from the worst few. Returns the largest violation found and
/// the directions worth adding as constraints or sample points.
fn violations<F: Fn(&Vector) -> f64>(viol: F, d: usize, n: usize, thresh: f64, seed: u64) -> (f64, Vec<Vector>) {
    let mut g = sphere::rng(seed);
    let net: Vec<Vector> = (0..n).map(|_| sphere::random_unit(&mut g, d)).collect();
    let mut scored: Vec<(f64, &Vector)> = net.iter().map(|u| (viol(u), u)).collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut worst = scored.first().map_or(f64::NEG_INFINITY, |s| s.0);
    let step = 2.0 * (1.0 / n as f64).powf(1.0 / (d as f64 - 1.0).max(1.0));
    let mut out = Vec::new();
    for (i, (_, u)) in scored.iter().take(16).enumerate() {
        let (ur, vr, _) = sphere::hill_climb(&viol, u, step, 1e-8, seed.wrapping_add(i as u64 + 1));
        worst = worst.max(vr);
        if vr > thresh {
            out.push(ur);
        }
    }
    out.extend(scored.iter().take_while(|(v, _)| *v > thresh).take(64).map(|(_, u)| (*u).clone()));
    (worst, out)
}

fn net_seed(seed: u64, round: usize) -> u64 {
    (seed ^ 0x9e37_79b9_7f4a_7c15).wrapping_add(round as u64 * 0x1000_0001)
}

fn loewner_sampled(body: &ConvexBody, opts: &EllipsoidOptions) -> Result<EllipsoidResult> {
    let d = body.dim();
    let mut pts: Vec<Vector> =
        sphere::directions(d, opts.samples.max(2 * d), opts.seed).iter().map(|u| body.support_point(u)).collect();
    let mut total = 0;
    for round in 0..opts.max_rounds {
        let mut r = mvee_points(&pts, opts.tol, opts.max_iter)?;
        total += r.iterations;
        let e = r.ellipsoid.clone();
        let viol = |u: &Vector| body.support_unchecked(u) - e.support(u);
        let (worst, fresh) = violations(viol, d, opts.net, opts.certify, net_seed(opts.seed, round));
        if fresh.is_empty() {
            r.iterations = total;
            r.certificate = worst.max(0.0);
            return Ok(r);
        }
        pts.extend(fresh.iter().map(|u| body.support_point(u)));
    }
    Err(GeomError::NoConvergence { what: "loewner certification", residual: opts.certify })
}

fn john_facets(p: &Polytope, opts: &EllipsoidOptions) -> Result<EllipsoidResult> {
    let mut hs = HalfSpaces::default();
    for f in p.facets().expect("facets present") {
        hs.push(f.normal.clone(), f.offset);
    }
    let z = p.vertex_mean();
    let b0 = john::ball_start(&hs, &z).ok_or_else(|| GeomError::Degenerate("vertex mean not interior".into()))?;
    let sol = john::solve(&hs, (&b0, &z), opts.tol.min(1e-9), opts.max_iter)?;
    finish(sol, 0.0, opts.tol)
}

fn finish(sol: john::BarrierSolution, certificate: f64, tol: f64) -> Result<EllipsoidResult> {
    let ellipsoid = Ellipsoid::from_map(&symmetrize(&sol.map), sol.center.clone())?;
    Ok(EllipsoidResult {
        ellipsoid,
        iterations: sol.newton_steps,
        residual: sol.gap,
        certificate,
        contact: Some(contact_system(&sol.contacts, &sol.weights)),
        tol,
    })
}

fn john_sampled(body: &ConvexBody, opts: &EllipsoidOptions) -> Result<EllipsoidResult> {
    let d = body.dim();
    let mut hs = HalfSpaces::default();
    for u in sphere::directions(d, opts.samples.max(2 * d + 2), opts.seed) {
        let h = body.support_unchecked(&u);
        hs.push(u, h);
    }
    let z = body.interior_point();
    let mut start = (
        john::ball_start(&hs, &z).ok_or_else(|| GeomError::Degenerate("interior point not interior".into()))?,
        z,
    );
    let mut total = 0;
    for round in 0..opts.max_rounds {
        let sol = john::solve(&hs, (&start.0, &start.1), opts.tol.min(1e-9), opts.max_iter)?;
        total += sol.newton_steps;
        let e = Ellipsoid::from_map(&symmetrize(&sol.map), sol.center.clone())?;
        let viol = |u: &Vector| e.support(u) - body.support_unchecked(u);
        let (worst, fresh) = violations(viol, d, opts.net, opts.certify, net_seed(opts.seed, round));
        if fresh.is_empty() {
            let mut r = finish(sol, worst.max(0.0), opts.tol)?;
            r.iterations = total;
            return Ok(r);
        }
        for u in fresh {
            let h = body.support_unchecked(&u);
            hs.push(u, h);
        }
        let b = john::shrink_into(&hs, &sol.map, &sol.center)
            .ok_or_else(|| GeomError::Degenerate("john center left the body".into()))?;
        start = (b, sol.center);
    }
    Err(GeomError::NoConvergence { what: "john certification", residual: opts.certify })
}

/// `T = A^{1/2}(x − c)` from the John ellipsoid, and `T(C)` in John position.
pub fn john_position_transform(body: &ConvexBody) -> Result<(AffineMap, ConvexBody)> {
    john_position_transform_with(body, &EllipsoidOptions::from_config(&Config::default(), 600))
}

pub fn john_position_transform_with(body: &ConvexBody, opts: &EllipsoidOptions) -> Result<(AffineMap, ConvexBody)> {
    let r = john_with(body, opts)?;
    let root = r.ellipsoid.normalizing_map();
    let shift = -(&root * r.ellipsoid.center());
    let t = AffineMap::new(root, shift)?;
    let img = affine_image(&t, body)?;
    Ok((t, img))
}
