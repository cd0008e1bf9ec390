//! Minimum-volume enclosing ellipsoid of a point set (Khachiyan's barycentric
//! ascent with Todd–Yıldırım away steps).

use super::{contact_system, EllipsoidResult};
use crate::body::Ellipsoid;
use crate::error::{GeomError, Result};
use crate::linalg::{rank, sym_sqrt, symmetrize, Matrix, Vector};

/// Full recomputation of `X⁻¹` every this many rank-one updates.
const REFRESH: usize = 64;

/// MVEE of `points`. The result contains every point and its volume is
/// within a factor `(1 + tol)^d` of the optimum.
pub fn mvee_points(points: &[Vector], tol: f64, max_iter: usize) -> Result<EllipsoidResult> {
    let n = points.len();
    if n == 0 {
        return Err(GeomError::Degenerate("no points".into()));
    }
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(GeomError::DimensionMismatch { expected: d, got: p.len() });
    }
    if points.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
        return Err(GeomError::Degenerate("non-finite coordinate".into()));
    }

    // Work on centred, unit-scale copies.
    let shift = points.iter().fold(Vector::zeros(d), |a, p| a + p) / n as f64;
    let scale = points.iter().map(|p| (p - &shift).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(GeomError::Degenerate("all points coincide".into()));
    }
    let pts: Vec<Vector> = points.iter().map(|p| (p - &shift) / scale).collect();
    let spread = Matrix::from_columns(&pts);
    if rank(&spread, 1e-10) < d {
        return Err(GeomError::Degenerate("points do not affinely span the space".into()));
    }

    let q: Vec<Vector> = pts
        .iter()
        .map(|p| p.clone().insert_row(d, 1.0))
        .collect();
    let dd = (d + 1) as f64;
    let mut u = vec![1.0 / n as f64; n];
    let mut xinv = Matrix::zeros(d + 1, d + 1);
    let mut kappa = vec![0.0; n];
    let refresh = |u: &[f64], xinv: &mut Matrix, kappa: &mut [f64]| -> bool {
        let mut x = Matrix::zeros(d + 1, d + 1);
        for (qi, &ui) in q.iter().zip(u) {
            if ui > 0.0 {
                x.ger(ui, qi, qi, 1.0);
            }
        }
        match x.cholesky() {
            Some(ch) => {
                *xinv = ch.inverse();
                for (k, qi) in kappa.iter_mut().zip(&q) {
                    *k = qi.dot(&(&*xinv * qi));
                }
                true
            }
            None => false,
        }
    };
    if !refresh(&u, &mut xinv, &mut kappa) {
        return Err(GeomError::Degenerate("singular moment matrix".into()));
    }

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < max_iter {
        let (j, kmax) = kappa
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &k)| if k > acc.1 { (i, k) } else { acc });
        let (k, kmin) = kappa
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .fold((0, f64::INFINITY), |acc, (i, &k)| if k < acc.1 { (i, k) } else { acc });
        let eps_plus = kmax / dd - 1.0;
        let eps_minus = 1.0 - kmin / dd;
        residual = eps_plus.max(eps_minus);
        if residual <= tol {
            break;
        }
        iterations += 1;

        // u ← (1 − τ) u + τ e_i; forward steps have τ > 0, away steps τ < 0.
        let (i, tau) = if eps_plus >= eps_minus {
            (j, (kmax - dd) / (dd * (kmax - 1.0)))
        } else {
            let uk = u[k];
            let beta = ((dd - kmin) / (dd * (kmin - 1.0))).min(uk / (1.0 - uk));
            (k, -beta)
        };
        for w in u.iter_mut() {
            *w *= 1.0 - tau;
        }
        u[i] += tau;
        if u[i] < 1e-300 {
            u[i] = 0.0;
        }

        if iterations % REFRESH == 0 {
            if !refresh(&u, &mut xinv, &mut kappa) {
                return Err(GeomError::Degenerate("singular moment matrix".into()));
            }
            continue;
        }
        // Sherman–Morrison on X' = (1 − τ) X + τ q_i q_iᵀ.
        let w = &xinv * &q[i];
        let ki = kappa[i];
        let denom = (1.0 - tau) + tau * ki;
        let f = 1.0 / (1.0 - tau);
        for (kk, ql) in kappa.iter_mut().zip(&q) {
            let s = ql.dot(&w);
            *kk = f * (*kk - tau * s * s / denom);
        }
        xinv.ger(-tau / denom, &w, &w, 1.0);
        xinv *= f;
    }
    if residual > tol {
        return Err(GeomError::NoConvergence { what: "mvee", residual });
    }

    let c: Vector = pts.iter().zip(&u).fold(Vector::zeros(d), |a, (p, &w)| a + p * w);
    let mut cov = Matrix::zeros(d, d);
    for (p, &w) in pts.iter().zip(&u) {
        let y = p - &c;
        cov.ger(w, &y, &y, 1.0);
    }
    let cov_inv = cov
        .try_inverse()
        .ok_or_else(|| GeomError::Degenerate("singular weighted covariance".into()))?;
    let mut a = symmetrize(&(cov_inv / d as f64));
    let reach = pts.iter().map(|p| (p - &c).dot(&(&a * (p - &c)))).fold(0.0, f64::max);
    a /= reach;

    let a_orig = &a / (scale * scale);
    let c_orig = &c * scale + &shift;
    let ellipsoid = Ellipsoid::new(c_orig, symmetrize(&a_orig))?;

    let root = sym_sqrt(&a);
    let cp: Vec<Vector> = pts
        .iter()
        .map(|p| {
            let v = &root * (p - &c);
            let n = v.norm();
            if n > 0.0 { v / n } else { v }
        })
        .collect();
    let cw: Vec<f64> = u.iter().map(|w| d as f64 * w).collect();
    Ok(EllipsoidResult {
        ellipsoid,
        iterations,
        residual,
        certificate: 0.0,
        contact: Some(contact_system(&cp, &cw)),
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn cross_gives_unit_disk() {
        let pts = vec![vector(&[1.0, 0.0]), vector(&[-1.0, 0.0]), vector(&[0.0, 1.0]), vector(&[0.0, -1.0])];
        let r = mvee_points(&pts, 1e-10, 10_000).unwrap();
        assert!(r.ellipsoid.center().norm() < 1e-9);
        assert!((r.ellipsoid.shape() - Matrix::identity(2, 2)).norm() < 1e-8);
        let (ok, _) = super::super::verify_contact_system(r.contact.as_ref().unwrap(), 1e-8);
        assert!(ok);
    }

    #[test]
    fn triangle_is_steiner_ellipse() {
        let pts = vec![vector(&[0.0, 0.0]), vector(&[1.0, 0.0]), vector(&[0.0, 1.0])];
        let r = mvee_points(&pts, 1e-12, 100_000).unwrap();
        let c = r.ellipsoid.center();
        assert!((c - vector(&[1.0 / 3.0, 1.0 / 3.0])).norm() < 1e-9);
        let area = 4.0 * std::f64::consts::PI / (3.0 * 3f64.sqrt()) * 0.5;
        assert!((r.ellipsoid.volume() / area - 1.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_points_fail() {
        let pts = vec![vector(&[0.0, 0.0]), vector(&[1.0, 1.0]), vector(&[2.0, 2.0])];
        assert!(matches!(mvee_points(&pts, 1e-8, 1000), Err(GeomError::Degenerate(_))));
    }
}
