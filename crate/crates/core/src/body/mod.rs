//! Convex bodies behind support and membership oracles.
//!
//! Every variant answers `h_C(u) = sup_{x∈C} ⟨x,u⟩`, a maximizing point, a
//! tolerance-aware membership test and a certified interior point. Nothing
//! here enumerates facets above d = 3.

mod affine;
mod ellipsoid;
pub mod polytope;

use std::borrow::Cow;
use std::sync::Arc;

pub use affine::{AffineMap, DET_EPS};
pub use ellipsoid::Ellipsoid;
pub use polytope::{Facet, Polytope};

use crate::error::{GeomError, Result};
use crate::linalg::{min_norm_point, unit, MinNormOptions, Vector};
use crate::sphere;

/// Relative accuracy of gauge bisections (polar support values).
const GAUGE_TOL: f64 = 1e-13;

/// `{x : ‖x − c‖_p ≤ r}` for `p ∈ [1, ∞]`. Radius zero is a point; it is only
/// accepted as a cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    p: f64,
    radius: f64,
    center: Vector,
}

impl Ball {
    pub fn new(p: f64, radius: f64, center: Vector) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(GeomError::InvalidBody(format!("ball exponent p must lie in [1, ∞], got {p}")));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(GeomError::InvalidBody(format!("ball radius must be non-negative, got {radius}")));
        }
        if center.is_empty() {
            return Err(GeomError::InvalidBody("ball needs dimension ≥ 1".into()));
        }
        Ok(Ball { p, radius, center })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Hölder conjugate exponent.
    pub fn dual_exponent(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn is_euclidean(&self) -> bool {
        self.p == 2.0 || self.radius == 0.0
    }

    fn support(&self, u: &Vector) -> f64 {
        self.center.dot(u) + self.radius * p_norm(u, self.dual_exponent())
    }

    fn support_point(&self, u: &Vector) -> Vector {
        if self.radius == 0.0 {
            return self.center.clone();
        }
        let d = u.len();
        let dir = if self.p == 1.0 {
            let k = (0..d).max_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap()).unwrap();
            let mut v = Vector::zeros(d);
            v[k] = u[k].signum();
            v
        } else if self.p.is_infinite() {
            u.map(|c| if c == 0.0 { 0.0 } else { c.signum() })
        } else {
            let q = self.dual_exponent();
            let nq = p_norm(u, q);
            if nq == 0.0 {
                return self.center.clone();
            }
            u.map(|c| c.signum() * (c.abs() / nq).powf(q - 1.0))
        };
        &self.center + dir * self.radius
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        let y = x - &self.center;
        if self.radius == 0.0 || self.p == 2.0 {
            return y.norm() <= self.radius + tol;
        }
        p_norm(&y, self.p) <= self.radius + tol
    }
}

/// `‖x‖_p` with `p = ∞` allowed.
pub fn p_norm(x: &Vector, p: f64) -> f64 {
    if p.is_infinite() {
        x.amax()
    } else if p == 1.0 {
        x.iter().map(|c| c.abs()).sum()
    } else if p == 2.0 {
        x.norm()
    } else {
        let m = x.amax();
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|c| (c.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Hölder conjugate `q` with `1/p + 1/q = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// A section `{t} × C` of a [`CrossSectionHull`].
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub offset: f64,
    pub body: Arc<ConvexBody>,
}

/// `conv[(t₁, C₁), …, (t_k, C_k)]` in ℝ^d with sections in ℝ^{d−1}.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionHull {
    sections: Vec<Section>,
    dim: usize,
}

impl CrossSectionHull {
    pub fn new(sections: Vec<(f64, ConvexBody)>) -> Result<Self> {
        let Some(first) = sections.first() else {
            return Err(GeomError::InvalidBody("hull needs at least two sections".into()));
        };
        let sd = first.1.dim();
        if sections.iter().any(|(_, b)| b.dim() != sd) {
            return Err(GeomError::InvalidBody("hull sections differ in dimension".into()));
        }
        let t0 = first.0;
        if sections.iter().any(|(t, _)| !t.is_finite()) {
            return Err(GeomError::InvalidBody("non-finite section offset".into()));
        }
        if sections.iter().all(|(t, _)| (*t - t0).abs() <= 1e-12) {
            return Err(GeomError::InvalidBody("hull sections need at least two distinct offsets".into()));
        }
        if !sections.iter().any(|(_, b)| b.has_interior()) {
            return Err(GeomError::InvalidBody("no hull section is full-dimensional".into()));
        }
        Ok(CrossSectionHull {
            sections: sections.into_iter().map(|(offset, b)| Section { offset, body: Arc::new(b) }).collect(),
            dim: sd + 1,
        })
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    fn split(u: &Vector) -> (f64, Vector) {
        (u[0], u.rows(1, u.len() - 1).into_owned())
    }

    fn lift(t: f64, x: &Vector) -> Vector {
        let mut v = Vector::zeros(x.len() + 1);
        v[0] = t;
        v.rows_mut(1, x.len()).copy_from(x);
        v
    }

    fn support(&self, u: &Vector) -> f64 {
        let (u1, ur) = Self::split(u);
        let zero = ur.iter().all(|&c| c == 0.0);
        self.sections
            .iter()
            .map(|s| s.offset * u1 + if zero { 0.0 } else { s.body.support_unchecked(&ur) })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn support_point(&self, u: &Vector) -> Vector {
        let (u1, ur) = Self::split(u);
        let zero = ur.iter().all(|&c| c == 0.0);
        let mut best = f64::NEG_INFINITY;
        let mut idx = 0;
        for (i, s) in self.sections.iter().enumerate() {
            let v = s.offset * u1 + if zero { 0.0 } else { s.body.support_unchecked(&ur) };
            if v > best {
                best = v;
                idx = i;
            }
        }
        let s = &self.sections[idx];
        let x = if zero { s.body.interior_point() } else { s.body.support_point(&ur) };
        Self::lift(s.offset, &x)
    }

    fn contains(&self, x: &Vector, tol: f64) -> Option<bool> {
        if self.sections.len() != 2 {
            return None;
        }
        let (a, b) = (&self.sections[0], &self.sections[1]);
        let span = b.offset - a.offset;
        if span.abs() <= 1e-12 {
            return None;
        }
        let lam = (x[0] - a.offset) / span;
        let slack = tol / span.abs();
        if lam < -slack || lam > 1.0 + slack {
            return Some(false);
        }
        let lam = lam.clamp(0.0, 1.0);
        let (_, xr) = Self::split(x);
        minkowski_contains(1.0 - lam, &a.body, lam, &b.body, &xr, tol)
    }

    fn interior_point(&self) -> Vector {
        let pts: Vec<Vector> =
            self.sections.iter().map(|s| Self::lift(s.offset, &s.body.interior_point())).collect();
        polytope::mean(&pts)
    }
}

/// Membership of `x` in `α A + β B`, exact when one summand is a Euclidean ball
/// or both are balls with a common exponent. `None` means "use the generic path".
fn minkowski_contains(
    alpha: f64,
    a: &ConvexBody,
    beta: f64,
    b: &ConvexBody,
    x: &Vector,
    tol: f64,
) -> Option<bool> {
    if let (ConvexBody::Ball(ba), ConvexBody::Ball(bb)) = (a, b) {
        if ba.p == bb.p || ba.radius == 0.0 || bb.radius == 0.0 {
            let p = if ba.radius == 0.0 { bb.p } else { ba.p };
            let c = &ba.center * alpha + &bb.center * beta;
            let r = alpha * ba.radius + beta * bb.radius;
            let y = x - c;
            return Some(if r == 0.0 { y.norm() <= tol } else { p_norm(&y, p) <= r + tol });
        }
    }
    let scaled_dist = |body: &ConvexBody, s: f64, y: &Vector| -> f64 {
        if s <= 1e-15 {
            y.norm()
        } else {
            s * body.distance(&(y / s))
        }
    };
    if let ConvexBody::Ball(bb) = b {
        if bb.is_euclidean() {
            let y = x - &bb.center * beta;
            return Some(scaled_dist(a, alpha, &y) <= beta * bb.radius + tol);
        }
    }
    if let ConvexBody::Ball(ba) = a {
        if ba.is_euclidean() {
            let y = x - &ba.center * alpha;
            return Some(scaled_dist(b, beta, &y) <= alpha * ba.radius + tol);
        }
    }
    let start = a.support_point(&unit(x.len(), 0)) * alpha + b.support_point(&unit(x.len(), 0)) * beta - x;
    let oracle = |y: &Vector| {
        let m = -y;
        a.support_point(&m) * alpha + b.support_point(&m) * beta - x
    };
    Some(gjk_contains(start, oracle, tol))
}

fn gjk_contains<F: FnMut(&Vector) -> Vector>(start: Vector, oracle: F, tol: f64) -> bool {
    let opts = MinNormOptions { gap: 1e-3 * tol, max_iter: 2000, inside_below: tol, outside_above: tol };
    let r = min_norm_point(start, oracle, opts);
    r.upper() <= tol || r.lower <= tol
}

/// Lazy image `T(C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineImage {
    map: AffineMap,
    inverse: AffineMap,
    op_norm: f64,
    body: Arc<ConvexBody>,
}

impl AffineImage {
    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }
}

/// `K° = {y : ⟨x, y⟩ ≤ 1 ∀x ∈ K}` for `K` with the origin strictly inside.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarBody {
    inner: Arc<ConvexBody>,
    exact: Option<Arc<ConvexBody>>,
}

impl PolarBody {
    pub fn inner(&self) -> &ConvexBody {
        &self.inner
    }

    /// Closed-form representation of the polar, when one is available.
    pub fn exact(&self) -> Option<&ConvexBody> {
        self.exact.as_deref()
    }

    fn support(&self, u: &Vector) -> f64 {
        match &self.exact {
            Some(e) => e.support_unchecked(u),
            None => self.inner.gauge(u),
        }
    }

    fn support_point(&self, u: &Vector) -> Vector {
        if let Some(e) = &self.exact {
            return e.support_point(u);
        }
        let g = self.inner.gauge(u);
        if g <= 0.0 {
            return Vector::zeros(u.len());
        }
        // Outer normal of K at the boundary point u/g, scaled so that ⟨y, u/g⟩ = 1.
        let b = u / g;
        let probe = &b * (1.0 + 1e-7);
        let (dist, near) = self.inner.project(&probe);
        let n = if dist > 0.0 { (&probe - near) / dist } else { u / u.norm() };
        let h = self.inner.support_unchecked(&n);
        n / h
    }

    fn contains(&self, y: &Vector, tol: f64) -> bool {
        match &self.exact {
            Some(e) => e.membership(y, tol),
            None => self.inner.support_unchecked(y) <= 1.0 + tol,
        }
    }
}

/// A convex body in ℝ^d with non-empty interior.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Polytope(Polytope),
    Ball(Ball),
    Ellipsoid(Ellipsoid),
    Hull(CrossSectionHull),
    Affine(AffineImage),
    Polar(PolarBody),
    /// Convex hull of bodies sharing the ambient dimension.
    Conv(Vec<Arc<ConvexBody>>),
}

impl From<Polytope> for ConvexBody {
    fn from(p: Polytope) -> Self {
        ConvexBody::Polytope(p)
    }
}

impl From<Ellipsoid> for ConvexBody {
    fn from(e: Ellipsoid) -> Self {
        ConvexBody::Ellipsoid(e)
    }
}

impl ConvexBody {
    pub fn vpolytope(vertices: Vec<Vector>) -> Result<Self> {
        Ok(ConvexBody::Polytope(Polytope::new(vertices)?))
    }

    /// `B_p^d` of the given radius and center.
    pub fn ball(p: f64, radius: f64, center: Vector) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(GeomError::InvalidBody("ball radius must be positive".into()));
        }
        Ok(ConvexBody::Ball(Ball::new(p, radius, center)?))
    }

    /// Unit `B_p^d` centred at the origin.
    pub fn unit_ball(p: f64, d: usize) -> Self {
        ConvexBody::Ball(Ball::new(p, 1.0, Vector::zeros(d)).expect("valid unit ball"))
    }

    /// Zero-radius section used for cone apices.
    pub fn point_section(p: f64, at: Vector) -> Result<Self> {
        Ok(ConvexBody::Ball(Ball::new(p, 0.0, at)?))
    }

    pub fn hull(sections: Vec<(f64, ConvexBody)>) -> Result<Self> {
        Ok(ConvexBody::Hull(CrossSectionHull::new(sections)?))
    }

    /// `conv(C₁ ∪ … ∪ C_k)` of bodies in a common dimension.
    pub fn conv(parts: Vec<ConvexBody>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(GeomError::InvalidBody("conv needs at least one body".into()));
        };
        let d = first.dim();
        if let Some(b) = parts.iter().find(|b| b.dim() != d) {
            return Err(GeomError::DimensionMismatch { expected: d, got: b.dim() });
        }
        Ok(ConvexBody::Conv(parts.into_iter().map(Arc::new).collect()))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Conv(parts) => parts[0].dim(),
            ConvexBody::Polytope(p) => p.dim(),
            ConvexBody::Ball(b) => b.dim(),
            ConvexBody::Ellipsoid(e) => e.dim(),
            ConvexBody::Hull(h) => h.dim,
            ConvexBody::Affine(a) => a.map.dim(),
            ConvexBody::Polar(p) => p.inner.dim(),
        }
    }

    fn has_interior(&self) -> bool {
        match self {
            ConvexBody::Ball(b) => b.radius > 0.0,
            _ => true,
        }
    }

    /// The polytope behind this body when it is one exactly (including polars
    /// of facet-described polytopes).
    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            ConvexBody::Polytope(p) => Some(p),
            ConvexBody::Polar(p) => p.exact.as_deref().and_then(|e| e.as_polytope()),
            _ => None,
        }
    }

    /// Vertex description when the body is a polytope in disguise: hulls of
    /// polytope or point sections, `B_1`/`B_∞` balls up to d = 10, affine
    /// images of those, polars with a closed form.
    pub fn polytope_form(&self) -> Option<Cow<'_, Polytope>> {
        match self {
            ConvexBody::Polytope(p) => Some(Cow::Borrowed(p)),
            ConvexBody::Polar(p) => p.exact.as_deref().and_then(|e| e.polytope_form()),
            ConvexBody::Ball(b) if b.radius > 0.0 && (b.p == 1.0 || b.p.is_infinite()) && b.dim() <= 10 => {
                let d = b.dim();
                let pts: Vec<Vector> = if b.p == 1.0 {
                    sphere::axis_directions(d).into_iter().map(|e| &b.center + e * b.radius).collect()
                } else {
                    (0..1usize << d)
                        .map(|mask| {
                            let s = Vector::from_iterator(
                                d,
                                (0..d).map(|i| if mask >> i & 1 == 1 { b.radius } else { -b.radius }),
                            );
                            &b.center + s
                        })
                        .collect()
                };
                Polytope::new(pts).ok().map(Cow::Owned)
            }
            ConvexBody::Hull(h) => {
                let mut pts = Vec::new();
                for s in &h.sections {
                    match &*s.body {
                        ConvexBody::Ball(b) if b.radius == 0.0 => {
                            pts.push(CrossSectionHull::lift(s.offset, &b.center))
                        }
                        other => {
                            let p = other.polytope_form()?;
                            pts.extend(p.vertices().iter().map(|v| CrossSectionHull::lift(s.offset, v)));
                        }
                    }
                }
                Polytope::hull_of(pts).ok().map(Cow::Owned)
            }
            ConvexBody::Affine(a) => {
                let p = a.body.polytope_form()?;
                p.map_vertices(|v| a.map.apply(v)).ok().map(Cow::Owned)
            }
            ConvexBody::Conv(parts) => {
                let mut pts = Vec::new();
                for b in parts {
                    pts.extend(b.polytope_form()?.vertices().iter().cloned());
                }
                Polytope::hull_of(pts).ok().map(Cow::Owned)
            }
            _ => None,
        }
    }

    /// Checked support function `h_C(u)`.
    pub fn support(&self, u: &Vector) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(GeomError::DimensionMismatch { expected: self.dim(), got: u.len() });
        }
        if u.iter().all(|&c| c == 0.0) {
            return Err(GeomError::ZeroDirection);
        }
        Ok(self.support_unchecked(u))
    }

    pub(crate) fn support_unchecked(&self, u: &Vector) -> f64 {
        match self {
            ConvexBody::Polytope(p) => p.support(u),
            ConvexBody::Ball(b) => b.support(u),
            ConvexBody::Ellipsoid(e) => e.support(u),
            ConvexBody::Hull(h) => h.support(u),
            ConvexBody::Affine(a) => {
                let lt = a.map.linear_part().transpose() * u;
                a.body.support_unchecked(&lt) + a.map.translation_part().dot(u)
            }
            ConvexBody::Polar(p) => p.support(u),
            ConvexBody::Conv(parts) => {
                parts.iter().map(|b| b.support_unchecked(u)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// A point of the body attaining `h_C(u)`.
    pub fn support_point(&self, u: &Vector) -> Vector {
        match self {
            ConvexBody::Polytope(p) => p.support_point(u),
            ConvexBody::Ball(b) => b.support_point(u),
            ConvexBody::Ellipsoid(e) => e.support_point(u),
            ConvexBody::Hull(h) => h.support_point(u),
            ConvexBody::Affine(a) => {
                let lt = a.map.linear_part().transpose() * u;
                a.map.apply(&a.body.support_point(&lt))
            }
            ConvexBody::Polar(p) => p.support_point(u),
            ConvexBody::Conv(parts) => parts
                .iter()
                .map(|b| (b.support_unchecked(u), b))
                .fold(None::<(f64, &Arc<ConvexBody>)>, |acc, (v, b)| match acc {
                    Some((w, _)) if w >= v => acc,
                    _ => Some((v, b)),
                })
                .map(|(_, b)| b.support_point(u))
                .unwrap(),
        }
    }

    /// `x ∈ C` up to `tol`.
    pub fn membership(&self, x: &Vector, tol: f64) -> bool {
        match self {
            ConvexBody::Polytope(p) => p.contains(x, tol),
            ConvexBody::Ball(b) => b.contains(x, tol),
            ConvexBody::Ellipsoid(e) => e.contains(x, tol),
            ConvexBody::Hull(h) => h.contains(x, tol).unwrap_or_else(|| self.generic_contains(x, tol)),
            ConvexBody::Affine(a) => a.body.membership(&a.inverse.apply(x), tol / a.op_norm),
            ConvexBody::Polar(p) => p.contains(x, tol),
            ConvexBody::Conv(parts) => {
                parts.iter().any(|b| b.membership(x, tol)) || self.generic_contains(x, tol)
            }
        }
    }

    fn generic_contains(&self, x: &Vector, tol: f64) -> bool {
        let start = self.support_point(&unit(x.len(), 0)) - x;
        gjk_contains(start, |y| self.support_point(&(-y)) - x, tol)
    }

    /// Euclidean distance from `x` to the body and the nearest point found.
    pub fn project(&self, x: &Vector) -> (f64, Vector) {
        match self {
            ConvexBody::Polytope(p) => p.project(x),
            ConvexBody::Ball(b) if b.is_euclidean() => {
                let y = x - &b.center;
                let n = y.norm();
                if n <= b.radius {
                    (0.0, x.clone())
                } else {
                    (n - b.radius, &b.center + y * (b.radius / n))
                }
            }
            _ => {
                let start = self.support_point(&unit(x.len(), 0)) - x;
                let opts = MinNormOptions { gap: 1e-12, max_iter: 5000, ..Default::default() };
                let r = min_norm_point(start, |y| self.support_point(&(-y)) - x, opts);
                (r.upper(), x + &r.point)
            }
        }
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        self.project(x).0
    }

    /// A point certified to lie in the interior.
    pub fn interior_point(&self) -> Vector {
        match self {
            ConvexBody::Polytope(p) => p.vertex_mean(),
            ConvexBody::Ball(b) => b.center.clone(),
            ConvexBody::Ellipsoid(e) => e.center().clone(),
            ConvexBody::Hull(h) => h.interior_point(),
            ConvexBody::Affine(a) => a.map.apply(&a.body.interior_point()),
            ConvexBody::Polar(p) => Vector::zeros(p.inner.dim()),
            ConvexBody::Conv(parts) => {
                polytope::mean(&parts.iter().map(|b| b.interior_point()).collect::<Vec<_>>())
            }
        }
    }

    /// Minkowski gauge `inf{t > 0 : x ∈ tC}`; requires the origin inside.
    pub fn gauge(&self, x: &Vector) -> f64 {
        let xn = x.norm();
        if xn == 0.0 {
            return 0.0;
        }
        match self {
            ConvexBody::Polytope(p) if p.facets().is_some() => p
                .facets()
                .unwrap()
                .iter()
                .map(|f| f.normal.dot(x) / f.offset)
                .fold(0.0, f64::max),
            ConvexBody::Ball(b) if b.center.iter().all(|&c| c == 0.0) => p_norm(x, b.p) / b.radius,
            ConvexBody::Ellipsoid(e) if e.center().iter().all(|&c| c == 0.0) => e.gauge(x),
            ConvexBody::Polar(p) => p.inner.support_unchecked(x).max(0.0),
            _ => {
                // x/t lies on or outside C for t <= ‖x‖/h_C(x/‖x‖).
                let xhat = x / xn;
                let h = self.support_unchecked(&xhat);
                let mut lo = xn / h;
                let mut hi = lo * 2.0;
                let tol = GAUGE_TOL * (1.0 + h);
                while !self.membership(&(x / hi), tol) {
                    lo = hi;
                    hi *= 2.0;
                    if hi > 1e300 {
                        return f64::INFINITY;
                    }
                }
                while hi - lo > GAUGE_TOL * hi {
                    let mid = 0.5 * (lo + hi);
                    if self.membership(&(x / mid), tol) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }

    /// Axis-aligned bounding box from the support function.
    pub fn bounding_box(&self) -> (Vector, Vector) {
        let d = self.dim();
        let hi = Vector::from_iterator(d, (0..d).map(|i| self.support_unchecked(&unit(d, i))));
        let lo = Vector::from_iterator(d, (0..d).map(|i| -self.support_unchecked(&(-unit(d, i)))));
        (lo, hi)
    }

    /// Width-based diameter proxy: the bounding-box diagonal.
    pub fn diameter_bound(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Smallest support value of `C − z` over the directions: an upper bound
    /// on the distance from `z` to the boundary, exact for facet polytopes.
    pub fn interior_margin(&self, z: &Vector, dirs: &[Vector]) -> f64 {
        if let Some(v) = self.as_polytope().and_then(|p| p.facet_violation(z)) {
            return -v;
        }
        if let ConvexBody::Ball(b) = self {
            if b.is_euclidean() {
                return b.radius - (z - &b.center).norm();
            }
        }
        dirs.iter().map(|u| self.support_unchecked(u) - z.dot(u)).fold(f64::INFINITY, f64::min)
    }
}

/// `h_C(u)` with zero-direction and dimension checks.
pub fn support_function(body: &ConvexBody, u: &Vector) -> Result<f64> {
    body.support(u)
}

pub fn membership(body: &ConvexBody, x: &Vector, tol: f64) -> bool {
    body.membership(x, tol)
}

/// Polar body of `C`; the origin must be strictly interior.
pub fn polar(body: &ConvexBody) -> Result<ConvexBody> {
    let d = body.dim();
    let origin = Vector::zeros(d);
    let dirs = sphere::directions(d, 64 * d, 17);
    let margin = body.interior_margin(&origin, &dirs);
    let scale = body.diameter_bound().max(1e-300);
    if !(margin > 1e-9 * scale) || !body.membership(&origin, 0.0) {
        return Err(GeomError::OriginNotInterior);
    }
    let exact: Option<ConvexBody> = match body {
        ConvexBody::Ball(b) if b.center.iter().all(|&c| c == 0.0) => {
            Some(ConvexBody::Ball(Ball::new(b.dual_exponent(), 1.0 / b.radius, origin.clone())?))
        }
        ConvexBody::Ellipsoid(e) => Some(ConvexBody::Ellipsoid(polar_ellipsoid(e)?)),
        ConvexBody::Polar(p) => Some((*p.inner).clone()),
        _ => match body.polytope_form() {
            Some(p) if p.facets().is_some() => Some(ConvexBody::Polytope(Polytope::new(
                p.facets().unwrap().iter().map(|f| &f.normal / f.offset).collect(),
            )?)),
            _ => None,
        },
    };
    Ok(ConvexBody::Polar(PolarBody { inner: Arc::new(body.clone()), exact: exact.map(Arc::new) }))
}

/// Polar of `{(x − c)ᵀA(x − c) ≤ 1}` with `0` inside: `{y : h_E(y) ≤ 1}` is the
/// ellipsoid `(y − y₀)ᵀM(y − y₀) ≤ 1 + cᵀM⁻¹c` with `M = A⁻¹ − ccᵀ`, `y₀ = −M⁻¹c`.
fn polar_ellipsoid(e: &Ellipsoid) -> Result<Ellipsoid> {
    let c = e.center();
    let m = crate::linalg::symmetrize(&(e.shape_inverse() - c * c.transpose()));
    let chol = m.clone().cholesky().ok_or(GeomError::OriginNotInterior)?;
    let mc = chol.solve(c);
    let y0 = -&mc;
    let k = 1.0 + c.dot(&mc);
    Ellipsoid::new(y0, m / k)
}

/// `T(C)`: eager for polytopes and ellipsoids, lazy otherwise.
pub fn affine_image(t: &AffineMap, body: &ConvexBody) -> Result<ConvexBody> {
    if t.dim() != body.dim() {
        return Err(GeomError::DimensionMismatch { expected: body.dim(), got: t.dim() });
    }
    let det = t.det();
    if det.abs() <= DET_EPS {
        return Err(GeomError::SingularMap { det });
    }
    Ok(match body {
        ConvexBody::Polytope(p) => ConvexBody::Polytope(p.map_vertices(|v| t.apply(v))?),
        ConvexBody::Ellipsoid(e) => {
            let linv = t.inverse();
            let li = linv.linear_part();
            let shape = li.transpose() * e.shape() * li;
            ConvexBody::Ellipsoid(Ellipsoid::new(t.apply(e.center()), crate::linalg::symmetrize(&shape))?)
        }
        ConvexBody::Ball(b) if b.p == 2.0 => {
            let e = Ellipsoid::ball(b.center.clone(), b.radius)?;
            affine_image(t, &ConvexBody::Ellipsoid(e))?
        }
        ConvexBody::Affine(a) => affine_image(&t.compose(&a.map), &a.body)?,
        _ => ConvexBody::Affine(AffineImage {
            map: t.clone(),
            inverse: t.inverse(),
            op_norm: t.operator_norm(),
            body: Arc::new(body.clone()),
        }),
    })
}

/// `C + v`.
pub fn translate(body: &ConvexBody, v: &Vector) -> Result<ConvexBody> {
    affine_image(&AffineMap::translation(v.clone()), body)
}

/// Sampled Hausdorff distance, a lower bound converging from below.
#[derive(Debug, Clone)]
pub struct HausdorffEstimate {
    pub distance: f64,
    pub direction: Vector,
    /// Number of support evaluations spent.
    pub evaluations: usize,
}

/// `d_H(C₁, C₂) = sup_{‖u‖=1} |h₁(u) − h₂(u)|`, estimated over `n_dirs`
/// quasi-uniform directions followed by a local refinement of the best few.
pub fn hausdorff_distance(c1: &ConvexBody, c2: &ConvexBody, n_dirs: usize) -> Result<HausdorffEstimate> {
    let d = c1.dim();
    if c2.dim() != d {
        return Err(GeomError::DimensionMismatch { expected: d, got: c2.dim() });
    }
    let n = n_dirs.max(2 * d);
    let gap = |u: &Vector| (c1.support_unchecked(u) - c2.support_unchecked(u)).abs();
    let dirs = sphere::directions(d, n, 31);
    let mut scored: Vec<(f64, Vector)> = dirs.into_iter().map(|u| (gap(&u), u)).collect();
    let mut evals = scored.len();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    scored.truncate(5);

    let step0 = 2.0 * std::f64::consts::PI / (n as f64).powf(1.0 / (d as f64 - 1.0).max(1.0));
    let mut best = scored[0].clone();
    for (i, (_, u)) in scored.into_iter().enumerate() {
        let (u, val, e) = sphere::hill_climb(gap, &u, step0, 1e-10, 97 + i as u64);
        evals += e;
        if val > best.0 {
            best = (val, u);
        }
    }
    Ok(HausdorffEstimate { distance: best.0, direction: best.1, evaluations: evals })
}

/// Chord of a body along a line.
#[derive(Debug, Clone, PartialEq)]
pub struct Chord {
    pub base: Vector,
    /// Unit direction.
    pub direction: Vector,
    pub entry: f64,
    pub exit: f64,
    pub length: f64,
}

impl Chord {
    pub fn entry_point(&self) -> Vector {
        &self.base + &self.direction * self.entry
    }

    pub fn exit_point(&self) -> Vector {
        &self.base + &self.direction * self.exit
    }
}

/// Chord of `C` on the line through `x` and `y`; endpoints by bisection on
/// the membership oracle to `tol`.
pub fn chord_through(body: &ConvexBody, x: &Vector, y: &Vector, tol: f64) -> Result<Chord> {
    let diff = y - x;
    let len = diff.norm();
    if len == 0.0 {
        return Err(GeomError::CoincidentPoints);
    }
    let w = diff / len;
    let at = |t: f64| x + &w * t;
    let t_max = body.support_unchecked(&w) - x.dot(&w);
    let t_min = -body.support_unchecked(&(-&w)) - x.dot(&w);
    if t_max < t_min {
        return Err(GeomError::LineMissesBody);
    }
    let mut inside = [0.0, len, 0.5 * len].into_iter().find(|&t| body.membership(&at(t), tol));
    if inside.is_none() {
        inside = (0..=256)
            .map(|k| t_min + (t_max - t_min) * k as f64 / 256.0)
            .find(|&t| body.membership(&at(t), tol));
    }
    let t0 = inside.ok_or(GeomError::LineMissesBody)?;

    let bisect = |mut good: f64, mut bad: f64| {
        while (bad - good).abs() > tol {
            let mid = 0.5 * (good + bad);
            if body.membership(&at(mid), tol) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let pad = 10.0 * tol + 1e-12 * (1.0 + t_max.abs());
    let exit = bisect(t0, t_max + pad);
    let entry = bisect(t0, t_min - pad);
    Ok(Chord { base: x.clone(), direction: w, entry, exit, length: exit - entry })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn triangle() -> ConvexBody {
        ConvexBody::vpolytope(vec![vector(&[0.0, 0.0]), vector(&[1.0, 0.0]), vector(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn polar_of_shifted_ellipsoid() {
        let e = Ellipsoid::new(vector(&[0.3, -0.2]), crate::linalg::Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0])).unwrap();
        let body = ConvexBody::Ellipsoid(e.clone());
        let ConvexBody::Polar(p) = polar(&body).unwrap() else { panic!() };
        let Some(ConvexBody::Ellipsoid(q)) = p.exact() else { panic!() };
        let root = crate::linalg::sym_inv_sqrt(q.shape());
        for k in 0..32 {
            let t = k as f64 * std::f64::consts::PI / 16.0;
            let y = q.center() + &root * vector(&[t.cos(), t.sin()]);
            assert!((e.support(&y) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn support_examples() {
        let b2 = ConvexBody::unit_ball(2.0, 2);
        assert!((b2.support(&vector(&[1.0, 0.0])).unwrap() - 1.0).abs() < 1e-15);
        let b1 = ConvexBody::unit_ball(1.0, 2);
        assert!((b1.support(&vector(&[1.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
        assert!((triangle().support(&vector(&[1.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(b2.support(&vector(&[0.0, 0.0])), Err(GeomError::ZeroDirection));
    }

    #[test]
    fn membership_examples() {
        let binf = ConvexBody::unit_ball(f64::INFINITY, 2);
        assert!(binf.membership(&vector(&[0.5, -0.5]), 1e-9));
        let b2 = ConvexBody::unit_ball(2.0, 2);
        assert!(!b2.membership(&vector(&[1.1, 0.0]), 1e-9));
    }

    #[test]
    fn polar_of_balls() {
        let p = polar(&ConvexBody::unit_ball(1.0, 3)).unwrap();
        for u in sphere::directions(3, 50, 1) {
            let expect = ConvexBody::unit_ball(f64::INFINITY, 3).support_unchecked(&u);
            assert!((p.support_unchecked(&u) - expect).abs() < 1e-12);
        }
        let off = translate(&ConvexBody::unit_ball(2.0, 2), &vector(&[2.0, 0.0])).unwrap();
        assert_eq!(polar(&off), Err(GeomError::OriginNotInterior));
    }

    #[test]
    fn oracle_polar_matches_exact_polar() {
        // Force the oracle path by wrapping B_3 in an identity image.
        let b3 = ConvexBody::unit_ball(3.0, 2);
        let wrapped = ConvexBody::Affine(AffineImage {
            map: AffineMap::identity(2),
            inverse: AffineMap::identity(2),
            op_norm: 1.0,
            body: Arc::new(b3),
        });
        let p = polar(&wrapped).unwrap();
        assert!(matches!(&p, ConvexBody::Polar(pb) if pb.exact().is_none()));
        for u in sphere::directions(2, 40, 3) {
            let got = p.support_unchecked(&u);
            assert!((got - u.lp_norm(3)).abs() < 1e-10, "{u} {got}");
        }
    }

    #[test]
    fn affine_images() {
        let b = ConvexBody::unit_ball(2.0, 2);
        let img = affine_image(&AffineMap::scaling(2, 2.0).unwrap(), &b).unwrap();
        assert!((img.support_unchecked(&vector(&[0.6, 0.8])) - 2.0).abs() < 1e-12);
        let id = affine_image(&AffineMap::identity(2), &triangle()).unwrap();
        assert_eq!(id, triangle());
    }

    #[test]
    fn hausdorff_examples() {
        let b2 = ConvexBody::unit_ball(2.0, 2);
        let b2x2 = ConvexBody::ball(2.0, 2.0, Vector::zeros(2)).unwrap();
        let binf = ConvexBody::unit_ball(f64::INFINITY, 2);
        assert!(hausdorff_distance(&b2, &b2, 64).unwrap().distance < 1e-15);
        assert!((hausdorff_distance(&b2, &b2x2, 64).unwrap().distance - 1.0).abs() < 1e-12);
        let h = hausdorff_distance(&binf, &b2, 64).unwrap().distance;
        assert!((h - (2f64.sqrt() - 1.0)).abs() < 1e-12, "{h}");
    }

    #[test]
    fn chord_examples() {
        let b2 = ConvexBody::unit_ball(2.0, 2);
        let c = chord_through(&b2, &vector(&[0.0, 0.0]), &vector(&[0.5, 0.0]), 1e-10).unwrap();
        assert!((c.length - 2.0).abs() < 1e-9);
        let binf = ConvexBody::unit_ball(f64::INFINITY, 2);
        let c = chord_through(&binf, &vector(&[0.0, 0.0]), &vector(&[0.0, 0.5]), 1e-10).unwrap();
        assert!((c.length - 2.0).abs() < 1e-9);
        assert_eq!(
            chord_through(&b2, &vector(&[0.1, 0.1]), &vector(&[0.1, 0.1]), 1e-10),
            Err(GeomError::CoincidentPoints)
        );
        let far = chord_through(&b2, &vector(&[0.0, 3.0]), &vector(&[1.0, 3.0]), 1e-10);
        assert_eq!(far, Err(GeomError::LineMissesBody));
    }

    #[test]
    fn hull_rejects_equal_offsets() {
        let s = || ConvexBody::unit_ball(2.0, 2);
        assert!(ConvexBody::hull(vec![(0.5, s()), (0.5, s())]).is_err());
    }

    #[test]
    fn cone_membership_scales() {
        let cone = ConvexBody::hull(vec![
            (0.0, ConvexBody::point_section(2.0, Vector::zeros(2)).unwrap()),
            (1.0, ConvexBody::unit_ball(2.0, 2)),
        ])
        .unwrap();
        assert!(cone.membership(&vector(&[0.5, 0.49, 0.0]), 1e-12));
        assert!(!cone.membership(&vector(&[0.5, 0.51, 0.0]), 1e-12));
        assert!(!cone.membership(&vector(&[1.01, 0.0, 0.0]), 1e-12));
    }
}
