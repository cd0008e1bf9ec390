//! Explicit extremal bodies: the two-ball hull `K_d`, its simplex variant
//! `C_d`, the truncated simplex, regular simplices, cones over `B_p` balls and
//! shifted cross-polytope polars.

use serde::Serialize;

use crate::body::{polar, AffineMap, ConvexBody, Polytope};
use crate::ellipsoids::{john_position_transform, ContactSystem};
use crate::error::{GeomError, Result};
use crate::linalg::Vector;

fn check_dim(d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(GeomError::InvalidBody(format!("construction needs d ≥ {min}, got {d}")));
    }
    Ok(())
}

/// `√(1 − 1/d)`, the height of the upper section.
fn top(d: usize) -> f64 {
    (1.0 - 1.0 / d as f64).sqrt()
}

/// Coefficients of `s(d+1) ε² + m ε − s = 0`, equivalent to
/// `√(1−1/d)(1 − (d+1)ε²) = (d − 1 − 1/d) ε`.
fn quadratic(d: usize) -> (f64, f64, f64) {
    let df = d as f64;
    let s = top(d);
    (s * (df + 1.0), df - 1.0 - 1.0 / df, -s)
}

/// Positive root of the quadratic by the closed-form radical.
pub fn epsilon_d_closed(d: usize) -> Result<f64> {
    check_dim(d, 2)?;
    let (a, b, c) = quadratic(d);
    // Cancellation-free form of (−b + √(b² − 4ac)) / 2a for b > 0.
    Ok(2.0 * (-c) / (b + (b * b - 4.0 * a * c).sqrt()))
}

/// Positive root by bisection on `(0, 1/√(d+1))`, to machine precision.
pub fn epsilon_d_bisection(d: usize) -> Result<f64> {
    check_dim(d, 2)?;
    let (a, b, c) = quadratic(d);
    let f = |e: f64| (a * e + b) * e + c;
    let (mut lo, mut hi) = (0.0, 1.0 / ((d + 1) as f64).sqrt());
    // f(0) < 0 < f(1/√(d+1)) = b/√(d+1).
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ε_d`: the closed form, checked against bisection. Bisection wins if they
/// disagree beyond `1e-14`.
pub fn epsilon_d(d: usize) -> Result<f64> {
    let closed = epsilon_d_closed(d)?;
    let bis = epsilon_d_bisection(d)?;
    Ok(if (closed - bis).abs() <= 1e-14 { closed } else { bis })
}

/// `ε_d`, `ρ_d` and the contact weights `t_1`, `t_2` of `K_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyParams {
    pub d: usize,
    pub epsilon: f64,
    pub rho: f64,
    pub t1: f64,
    pub t2: f64,
}

impl FamilyParams {
    pub fn new(d: usize) -> Result<Self> {
        let epsilon = epsilon_d(d)?;
        let (t1, t2) = weights(d, epsilon);
        Ok(FamilyParams { d, epsilon, rho: rho_from(d, epsilon), t1, t2 })
    }

    /// Residuals of the three scalar equations behind `t_1 V + t_2 W = Id`
    /// and the vanishing weighted sum.
    pub fn residuals(&self) -> [f64; 3] {
        let (d, e, t1, t2) = (self.d as f64, self.epsilon, self.t1, self.t2);
        let s = top(self.d);
        [
            t1 * (1.0 - e * e) + t2 / d - 0.5,
            t1 * d * e * e + t2 * (d - 1.0) - 0.5,
            t1 * e - t2 * s,
        ]
    }
}

/// `t_1/t_2 = √(1−1/d)/ε` normalized by `t_1(1 − ε²) + t_2/d = 1/2`.
fn weights(d: usize, e: f64) -> (f64, f64) {
    let ratio = top(d) / e;
    let t2 = 0.5 / (ratio * (1.0 - e * e) + 1.0 / d as f64);
    (ratio * t2, t2)
}

/// `K_d = conv[(−ε_d, √(1−ε_d²) B_2^d), (√(1−1/d), B_2^d/√d)]` in ℝ^{d+1}.
pub fn body_k(d: usize) -> Result<ConvexBody> {
    let e = epsilon_d(d)?;
    ConvexBody::hull(vec![
        (-e, ConvexBody::ball(2.0, (1.0 - e * e).sqrt(), Vector::zeros(d))?),
        (top(d), ConvexBody::ball(2.0, 1.0 / (d as f64).sqrt(), Vector::zeros(d))?),
    ])
}

/// The `4d` touching points `v_i^±`, `w_i^±` of `K_d` and `B_2^{d+1}` with
/// weights `t_1` on the `v`'s and `t_2` on the `w`'s.
pub fn contact_system_k(d: usize) -> Result<ContactSystem> {
    let p = FamilyParams::new(d)?;
    let (e, s) = (p.epsilon, top(d));
    let r = (1.0 - e * e).sqrt();
    let inv = 1.0 / (d as f64).sqrt();
    let mut pts = Vec::with_capacity(4 * d);
    let mut w = Vec::with_capacity(4 * d);
    for i in 1..=d {
        for sign in [1.0, -1.0] {
            let mut v = Vector::zeros(d + 1);
            v[0] = -e;
            v[i] = sign * r;
            pts.push(v);
            w.push(p.t1);
        }
    }
    for i in 1..=d {
        for sign in [1.0, -1.0] {
            let mut v = Vector::zeros(d + 1);
            v[0] = s;
            v[i] = sign * inv;
            pts.push(v);
            w.push(p.t2);
        }
    }
    Ok(ContactSystem::new(pts, w))
}

/// Regular simplex with `d + 1` unit vertices, `⟨v_i, v_j⟩ = −1/d`.
pub fn regular_simplex(d: usize) -> Result<Polytope> {
    check_dim(d, 1)?;
    let n = d + 1;
    let scale = ((n as f64) / d as f64).sqrt();
    // Coordinates in the Helmert basis of {x ∈ ℝ^{d+1} : Σx = 0}.
    let verts = (0..n)
        .map(|i| {
            Vector::from_iterator(
                d,
                (1..=d).map(|k| {
                    let kf = k as f64;
                    let h = if i < k {
                        1.0
                    } else if i == k {
                        -kf
                    } else {
                        0.0
                    };
                    scale * h / (kf * (kf + 1.0)).sqrt()
                }),
            )
        })
        .collect();
    Polytope::new(verts)
}

/// `C_d = conv[(−ε_d, √(1−ε_d²) Δ_d), (√(1−1/d), B_2^d/√d)]` in ℝ^{d+1}.
pub fn body_c(d: usize) -> Result<ConvexBody> {
    check_dim(d, 2)?;
    let e = epsilon_d(d)?;
    let r = (1.0 - e * e).sqrt();
    let simplex = regular_simplex(d)?.map_vertices(|v| v * r)?;
    ConvexBody::hull(vec![
        (-e, ConvexBody::Polytope(simplex)),
        (top(d), ConvexBody::ball(2.0, 1.0 / (d as f64).sqrt(), Vector::zeros(d))?),
    ])
}

fn rho_from(d: usize, e: f64) -> f64 {
    let sd = (d as f64).sqrt();
    let r = (1.0 - e * e).sqrt();
    (e * sd + r * top(d)) / (sd - r)
}

/// Apex distance `ρ_d` of the truncated simplex.
pub fn rho_d(d: usize) -> Result<f64> {
    Ok(rho_from(d, epsilon_d(d)?))
}

/// `conv[−ρ_d e_1, (√(1−1/d), √d Δ_d)]`, the simplex whose truncation at
/// height `−ε_d` is `conv[(−ε_d, √(1−ε_d²)Δ_d), (√(1−1/d), √d Δ_d)]`.
pub fn apex_simplex(d: usize) -> Result<Polytope> {
    let rho = rho_d(d)?;
    let base = regular_simplex(d)?;
    let sd = (d as f64).sqrt();
    let mut verts = vec![{
        let mut v = Vector::zeros(d + 1);
        v[0] = -rho;
        v
    }];
    for b in base.vertices() {
        let mut v = Vector::zeros(d + 1);
        v[0] = top(d);
        v.rows_mut(1, d).copy_from(&(b * sd));
        verts.push(v);
    }
    Polytope::new(verts)
}

/// The truncated simplex `conv[(−ε_d, √(1−ε_d²)Δ_d), (√(1−1/d), √d Δ_d)]`.
pub fn frustum(d: usize) -> Result<ConvexBody> {
    check_dim(d, 2)?;
    let e = epsilon_d(d)?;
    let r = (1.0 - e * e).sqrt();
    let base = regular_simplex(d)?;
    ConvexBody::hull(vec![
        (-e, ConvexBody::Polytope(base.map_vertices(|v| v * r)?)),
        (top(d), ConvexBody::Polytope(base.map_vertices(|v| v * (d as f64).sqrt())?)),
    ])
}

/// First coordinate of the centroid of [`apex_simplex`]:
/// `−ρ_d/(d+2) + (d+1)/(d+2)·√(1−1/d)`.
pub fn frustum_centroid_coordinate(d: usize) -> Result<f64> {
    let rho = rho_d(d)?;
    let n = (d + 2) as f64;
    Ok(-rho / n + (d + 1) as f64 / n * top(d))
}

/// Closed-form value of `φ_{j,l}(C_d)` and the identifications it rests on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormPhi {
    pub d: usize,
    pub phi: f64,
    /// `‖j − l‖` under the identifications below.
    pub distance: f64,
    /// Chord length `√(1−1/d) + ε_d` along `e_1`.
    pub chord: f64,
    /// Assumes `l(C_d) = 0`.
    pub assumes_loewner_at_origin: bool,
    /// Assumes `j(C_d)` is the centroid of [`apex_simplex`].
    pub assumes_john_from_frustum: bool,
}

/// `φ_{j,l}(C_d) = 1 − c_d / (√(1−1/d) + ε_d)` with `c_d` the frustum
/// centroid coordinate.
pub fn phi_jl_cd_closed_form(d: usize) -> Result<ClosedFormPhi> {
    let e = epsilon_d(d)?;
    let distance = frustum_centroid_coordinate(d)?;
    let chord = top(d) + e;
    Ok(ClosedFormPhi {
        d,
        phi: 1.0 - distance / chord,
        distance,
        chord,
        assumes_loewner_at_origin: true,
        assumes_john_from_frustum: true,
    })
}

/// The cone `conv[{0_{d−1}} at 0, B_{k+1}^{d−1} at 1]` in ℝ^d.
pub fn cone_body(d: usize, k: usize) -> Result<ConvexBody> {
    check_dim(d, 3)?;
    if k < 1 {
        return Err(GeomError::InvalidBody("cone index k must be ≥ 1".into()));
    }
    let p = (k + 1) as f64;
    ConvexBody::hull(vec![
        (0.0, ConvexBody::point_section(p, Vector::zeros(d - 1))?),
        (1.0, ConvexBody::unit_ball(p, d - 1)),
    ])
}

/// `(B_1^d − δ e_1)°` for `|δ| < 1`.
pub fn shifted_cross_polytope_polar(d: usize, delta: f64) -> Result<ConvexBody> {
    check_dim(d, 2)?;
    if !(delta.abs() < 1.0) {
        return Err(GeomError::OriginNotInterior);
    }
    let mut shift = Vector::zeros(d);
    shift[0] = delta;
    let verts = crate::sphere::axis_directions(d).into_iter().map(|v| v - &shift).collect();
    polar(&ConvexBody::vpolytope(verts)?)
}

/// `T_δ` with `T_δ((B_1^d − δ e_1)°)` in John position and the image. No
/// closed form for the normalizing constants is used; they come from the John
/// ellipsoid solver.
pub fn shifted_cross_polytope_john_position(d: usize, delta: f64) -> Result<(AffineMap, ConvexBody)> {
    john_position_transform(&shifted_cross_polytope_polar(d, delta)?)
}
