//! Small dense linear-algebra helpers: symmetric square roots, nullspaces,
//! non-negative least squares and Wolfe's minimum-norm-point iteration.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

pub fn vector(coords: &[f64]) -> Vector {
    DVector::from_column_slice(coords)
}

/// Symmetrizes in place, `(m + mᵀ)/2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply(m: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let eig = symmetrize(m).symmetric_eigen();
    let d = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| f(l)));
    &eig.eigenvectors * Matrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

pub fn sym_sqrt(m: &Matrix) -> Matrix {
    sym_apply(m, |l| l.max(0.0).sqrt())
}

pub fn sym_inv_sqrt(m: &Matrix) -> Matrix {
    sym_apply(m, |l| 1.0 / l.sqrt())
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    symmetrize(m).symmetric_eigen().eigenvalues.min()
}

/// Spectral condition number of a square matrix.
pub fn condition_number(m: &Matrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    sv.max() / sv.min()
}

/// Orthonormal basis of the numerical nullspace of `m` (singular values `<= tol·σ_max`).
pub fn nullspace(m: &Matrix, tol: f64) -> Vec<Vector> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return (0..n).map(|i| unit(n, i)).collect();
    }
    // Pad to at least n rows so the SVD exposes every right singular vector.
    let padded = if m.nrows() < n {
        let mut p = Matrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max().max(1.0);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol * smax)
        .map(|(i, _)| vt.row(i).transpose())
        .collect()
}

/// Numerical rank.
pub fn rank(m: &Matrix, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

pub fn unit(d: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(d);
    v[i] = 1.0;
    v
}

/// Least-squares solve via SVD.
pub fn lstsq(a: &Matrix, b: &Vector) -> Vector {
    let svd = a.clone().svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(1e-300);
    svd.solve(b, eps).unwrap_or_else(|_| Vector::zeros(a.ncols()))
}

/// Non-negative least squares (Lawson–Hanson active set):
/// minimizes `‖a x − b‖` subject to `x ≥ 0`. Returns `(x, residual norm)`.
pub fn nnls(a: &Matrix, b: &Vector) -> (Vector, f64) {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "nnls: shape mismatch");
    let mut x = Vector::zeros(n);
    let mut passive = vec![false; n];
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    let tol = 10.0 * f64::EPSILON * scale * (m.max(n) as f64) * b.norm().max(1.0);
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let cand = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
        let Some(j) = cand else { break };
        if w[j] <= tol {
            break;
        }
        passive[j] = true;

        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let ap = a.select_columns(idx.iter());
            let sp = lstsq(&ap, b);
            if sp.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = sp[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &i) in idx.iter().enumerate() {
                if sp[k] <= 0.0 {
                    let denom = x[i] - sp[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (sp[k] - x[i]);
            }
            let mut dropped = false;
            for &i in &idx {
                if x[i] <= tol {
                    x[i] = 0.0;
                    passive[i] = false;
                    dropped = true;
                }
            }
            if !dropped || passive.iter().all(|p| !p) {
                break;
            }
        }
    }
    let res = (a * &x - b).norm();
    (x, res)
}

/// Outcome of a minimum-norm-point search over a convex set given by a
/// linear minimization oracle.
#[derive(Debug, Clone)]
pub struct MinNorm {
    /// Minimum-norm point found (upper bound on the distance is its norm).
    pub point: Vector,
    /// Certified lower bound on the distance from the origin to the set.
    pub lower: f64,
    pub iterations: usize,
}

impl MinNorm {
    pub fn upper(&self) -> f64 {
        self.point.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MinNormOptions {
    /// Stop once `upper − lower <= gap`.
    pub gap: f64,
    pub max_iter: usize,
    /// Stop early once the upper bound drops to this value.
    pub inside_below: f64,
    /// Stop early once the lower bound exceeds this value.
    pub outside_above: f64,
}

impl Default for MinNormOptions {
    fn default() -> Self {
        MinNormOptions { gap: 1e-12, max_iter: 500, inside_below: 0.0, outside_above: f64::INFINITY }
    }
}

/// Wolfe's minimum-norm-point algorithm. `oracle(y)` must return a point of
/// the set minimizing `⟨y, ·⟩`. With a finite point set this is exact; with a
/// continuous oracle it is the Gilbert/GJK distance iteration.
pub fn min_norm_point<F>(start: Vector, mut oracle: F, opts: MinNormOptions) -> MinNorm
where
    F: FnMut(&Vector) -> Vector,
{
    let mut corral: Vec<Vector> = vec![start.clone()];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = start;
    let mut lower = 0.0f64;
    let mut it = 0;

    while it < opts.max_iter {
        it += 1;
        let xn2 = x.norm_squared();
        let xn = xn2.sqrt();
        if xn <= opts.inside_below || xn == 0.0 {
            return MinNorm { point: x, lower: 0.0, iterations: it };
        }
        let p = oracle(&x);
        let xp = x.dot(&p);
        lower = lower.max(xp / xn);
        if lower > opts.outside_above || xn - lower <= opts.gap {
            break;
        }
        if corral.iter().any(|c| (c - &p).norm() <= 1e-14 * (1.0 + p.norm())) {
            break;
        }
        corral.push(p);
        weights.push(0.0);

        // Minor cycle.
        for _ in 0..(corral.len() + 5) {
            let alpha = affine_minimizer(&corral);
            if alpha.iter().all(|&a| a > 1e-14) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a < *w && *a <= 1e-14 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = (1.0 - theta) * *w + theta * a;
            }
            let mut k = 0;
            while k < corral.len() {
                if weights[k] <= 1e-14 {
                    corral.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
            if corral.len() == 1 {
                break;
            }
        }
        let mut nx = Vector::zeros(x.len());
        for (c, w) in corral.iter().zip(&weights) {
            nx.axpy(*w, c, 1.0);
        }
        if nx.norm() >= xn * (1.0 - 1e-15) && nx.norm() > 0.0 {
            // No progress possible at machine precision.
            x = nx;
            break;
        }
        x = nx;
    }
    MinNorm { point: x, lower, iterations: it }
}

/// Minimizer of `‖Σ αᵢ sᵢ‖` over the affine hull (`Σ αᵢ = 1`).
fn affine_minimizer(points: &[Vector]) -> Vec<f64> {
    let k = points.len();
    if k == 1 {
        return vec![1.0];
    }
    let mut kkt = Matrix::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in 0..=i {
            let g = points[i].dot(&points[j]);
            kkt[(i, j)] = g;
            kkt[(j, i)] = g;
        }
        kkt[(i, k)] = 1.0;
        kkt[(k, i)] = 1.0;
    }
    let mut rhs = Vector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = lstsq(&kkt, &rhs);
    sol.rows(0, k).iter().copied().collect()
}
