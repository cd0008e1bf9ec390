//! Independent oracles and random inputs shared by the integration tests.
#![allow(dead_code)]

use aip_core::body::{polytope, AffineMap, ConvexBody, Polytope};
use aip_core::linalg::{Matrix, Vector};
use aip_core::sphere;
use rand::Rng;

pub fn v(c: &[f64]) -> Vector {
    Vector::from_column_slice(c)
}

pub fn random_polygon(seed: u64) -> ConvexBody {
    let n = 3 + (seed % 7) as usize;
    ConvexBody::Polytope(polytope::random_polytope(2, n, seed).unwrap())
}

pub fn random_polytope3(seed: u64) -> ConvexBody {
    let n = 4 + (seed % 9) as usize;
    ConvexBody::Polytope(polytope::random_polytope(3, n, seed).unwrap())
}

/// Random affine map with singular values in `[1, cond]`.
pub fn random_affine(d: usize, cond: f64, seed: u64) -> AffineMap {
    let mut g = sphere::rng(seed);
    let q = |g: &mut rand_chacha::ChaCha8Rng| {
        let m = Matrix::from_fn(d, d, |_, _| g.gen_range(-1.0..1.0));
        m.qr().q()
    };
    let u = q(&mut g);
    let w = q(&mut g);
    let mut s: Vec<f64> = (0..d).map(|_| g.gen_range(1.0..cond)).collect();
    s[0] = 1.0;
    s[d - 1] = cond;
    let l = &u * Matrix::from_diagonal(&Vector::from_vec(s)) * w.transpose();
    let b = Vector::from_fn(d, |_, _| g.gen_range(-2.0..2.0));
    AffineMap::new(l, b).unwrap()
}

/// Planar ellipse `{(x − c)ᵀ A (x − c) ≤ 1}`.
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub c: [f64; 2],
    pub a: [[f64; 2]; 2],
}

impl Ellipse {
    pub fn area(&self) -> f64 {
        let det = self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0];
        std::f64::consts::PI / det.sqrt()
    }

    pub fn value(&self, p: &[f64; 2]) -> f64 {
        let x = [p[0] - self.c[0], p[1] - self.c[1]];
        self.a[0][0] * x[0] * x[0] + 2.0 * self.a[0][1] * x[0] * x[1] + self.a[1][1] * x[1] * x[1]
    }
}

/// The region `q ≤ 0` of `q = a x² + b xy + c y² + d x + e y + f`, if it is a
/// nondegenerate ellipse.
fn conic_ellipse(q: &[f64; 6]) -> Option<Ellipse> {
    let mut q = *q;
    if q[0] < 0.0 {
        q.iter_mut().for_each(|x| *x = -*x);
    }
    let (a, b, c, d, e, f) = (q[0], q[1], q[2], q[3], q[4], q[5]);
    let det = a * c - b * b / 4.0;
    if !(det > 1e-14 * (a * a + c * c + b * b)) {
        return None;
    }
    // Centre solves [[a, b/2], [b/2, c]] x = −(d/2, e/2).
    let cx = (-(d / 2.0) * c + (e / 2.0) * (b / 2.0)) / det;
    let cy = (-(e / 2.0) * a + (d / 2.0) * (b / 2.0)) / det;
    let k = f + (d * cx + e * cy) / 2.0;
    if !(k < 0.0) {
        return None;
    }
    let s = -1.0 / k;
    Some(Ellipse { c: [cx, cy], a: [[a * s, b / 2.0 * s], [b / 2.0 * s, c * s]] })
}

fn conic_row(p: &[f64; 2]) -> [f64; 6] {
    [p[0] * p[0], p[0] * p[1], p[1] * p[1], p[0], p[1], 1.0]
}

/// Null vectors of the conic conditions through `pts`.
fn conic_nullspace(pts: &[[f64; 2]]) -> Vec<[f64; 6]> {
    let mut m = Matrix::zeros(6, 6);
    for (i, p) in pts.iter().enumerate() {
        for (j, x) in conic_row(p).iter().enumerate() {
            m[(i, j)] = *x;
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    (0..6)
        .filter(|&i| svd.singular_values[i] <= 1e-10 * smax)
        .map(|i| {
            let r = vt.row(i);
            [r[0], r[1], r[2], r[3], r[4], r[5]]
        })
        .collect()
}

/// Smallest-area ellipse with all of `pts` on its boundary (3, 4 or 5 points).
fn min_ellipse_through(pts: &[[f64; 2]]) -> Option<Ellipse> {
    match pts.len() {
        3 => {
            // The Steiner circumellipse: A = (1/2) Σ⁻¹ with Σ the vertex covariance.
            let c = [(pts[0][0] + pts[1][0] + pts[2][0]) / 3.0, (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0];
            let mut s = [[0.0; 2]; 2];
            for p in pts {
                let x = [p[0] - c[0], p[1] - c[1]];
                for i in 0..2 {
                    for j in 0..2 {
                        s[i][j] += x[i] * x[j] / 3.0;
                    }
                }
            }
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            if det.abs() < 1e-14 {
                return None;
            }
            let inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
            Some(Ellipse { c, a: [[inv[0][0] / 2.0, inv[0][1] / 2.0], [inv[1][0] / 2.0, inv[1][1] / 2.0]] })
        }
        4 => {
            let ns = conic_nullspace(pts);
            if ns.len() != 2 {
                return None;
            }
            let at = |t: f64| {
                let q: Vec<f64> = (0..6).map(|i| t.cos() * ns[0][i] + t.sin() * ns[1][i]).collect();
                conic_ellipse(&[q[0], q[1], q[2], q[3], q[4], q[5]])
            };
            let area = |t: f64| at(t).map_or(f64::INFINITY, |e| e.area());
            let n = 4000;
            let ts: Vec<f64> = (0..n).map(|k| std::f64::consts::PI * k as f64 / n as f64).collect();
            let vals: Vec<f64> = ts.iter().map(|&t| area(t)).collect();
            let h = std::f64::consts::PI / n as f64;
            let mut best: Option<(f64, f64)> = None;
            for k in 0..n {
                let (l, r) = (vals[(k + n - 1) % n], vals[(k + 1) % n]);
                if vals[k].is_finite() && vals[k] <= l && vals[k] <= r {
                    // Golden-section refinement on [t − h, t + h].
                    let (mut a, mut b) = (ts[k] - h, ts[k] + h);
                    let g = (5f64.sqrt() - 1.0) / 2.0;
                    for _ in 0..100 {
                        let x1 = b - g * (b - a);
                        let x2 = a + g * (b - a);
                        if area(x1) < area(x2) {
                            b = x2;
                        } else {
                            a = x1;
                        }
                    }
                    let t = 0.5 * (a + b);
                    let val = area(t);
                    if best.map_or(true, |bst| val < bst.1) {
                        best = Some((t, val));
                    }
                }
            }
            best.and_then(|(t, _)| at(t))
        }
        5 => {
            let ns = conic_nullspace(pts);
            if ns.len() != 1 {
                return None;
            }
            conic_ellipse(&ns[0])
        }
        _ => None,
    }
}

/// Minimum-area enclosing ellipse of a planar point set by enumerating the
/// 3-, 4- and 5-point subsets that can define it.
pub fn mvee_2d_oracle(points: &[[f64; 2]]) -> Ellipse {
    let n = points.len();
    let mut best: Option<Ellipse> = None;
    for k in 3..=5.min(n) {
        for subset in polytope::Combinations::new(n, k) {
            let pts: Vec<[f64; 2]> = subset.iter().map(|&i| points[i]).collect();
            let Some(e) = min_ellipse_through(&pts) else { continue };
            if points.iter().all(|p| e.value(p) <= 1.0 + 1e-9) && best.map_or(true, |b| e.area() < b.area()) {
                best = Some(e);
            }
        }
    }
    best.expect("some subset ellipse encloses the set")
}

/// Lower bound on the largest inscribed-ellipse area of a polygon given by
/// half-planes `⟨a_k, x⟩ ≤ b_k`: a grid over centre, orientation and axis
/// ratio, with the scale solved exactly for each.
pub fn inscribed_area_grid(normals: &[[f64; 2]], offsets: &[f64], lo: [f64; 2], hi: [f64; 2], n: usize) -> f64 {
    let mut best = 0.0f64;
    for ix in 0..n {
        for iy in 0..n {
            let c = [
                lo[0] + (hi[0] - lo[0]) * (ix as f64 + 0.5) / n as f64,
                lo[1] + (hi[1] - lo[1]) * (iy as f64 + 0.5) / n as f64,
            ];
            let slack: Vec<f64> = normals.iter().zip(offsets).map(|(a, b)| b - a[0] * c[0] - a[1] * c[1]).collect();
            if slack.iter().any(|&s| s <= 0.0) {
                continue;
            }
            for it in 0..n {
                let th = std::f64::consts::PI * it as f64 / n as f64;
                let (cs, sn) = (th.cos(), th.sin());
                for ir in 0..n {
                    // Axis ratio from 1/8 to 1, log-spaced.
                    let ratio = (-(ir as f64) / n as f64 * 8f64.ln()).exp();
                    // B = R diag(1, ratio) Rᵀ; the largest t with ‖t B a‖ ≤ slack.
                    let mut t = f64::INFINITY;
                    for (a, s) in normals.iter().zip(&slack) {
                        let u = cs * a[0] + sn * a[1];
                        let w = -sn * a[0] + cs * a[1];
                        let nb = (u * u + ratio * ratio * w * w).sqrt();
                        t = t.min(s / nb);
                    }
                    best = best.max(std::f64::consts::PI * t * t * ratio);
                }
            }
        }
    }
    best
}

/// Facet half-planes of a polygon.
pub fn half_planes(p: &Polytope) -> (Vec<[f64; 2]>, Vec<f64>) {
    let fs = p.facets().unwrap();
    (fs.iter().map(|f| [f.normal[0], f.normal[1]]).collect(), fs.iter().map(|f| f.offset).collect())
}

/// Brute-force polar of a polygon containing the origin: intersect the
/// half-planes `⟨v, y⟩ ≤ 1` over vertices `v` by checking every pairwise
/// line intersection.
pub fn polar_polygon_vertices(vertices: &[Vector]) -> Vec<[f64; 2]> {
    let n = vertices.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (&vertices[i], &vertices[j]);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let y = [(b[1] - a[1]) / det, (a[0] - b[0]) / det];
            if vertices.iter().all(|v| v[0] * y[0] + v[1] * y[1] <= 1.0 + 1e-12) {
                out.push(y);
            }
        }
    }
    out
}

/// Exact chord of a convex polygon (facet half-planes) along a line, by
/// clipping the parameter interval against each half-plane.
pub fn clip_chord(normals: &[[f64; 2]], offsets: &[f64], x: [f64; 2], dir: [f64; 2]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (a, b) in normals.iter().zip(offsets) {
        let ad = a[0] * dir[0] + a[1] * dir[1];
        let slack = b - (a[0] * x[0] + a[1] * x[1]);
        if ad.abs() < 1e-15 {
            continue;
        }
        let t = slack / ad;
        if ad > 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
    }
    (lo, hi)
}
