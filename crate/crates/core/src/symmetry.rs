//! Affine symmetry groups of polytopes, fixed spaces, group averaging and
//! affine equivalence.
//!
//! Affine symmetries permute vertices, so they preserve the vertex mean `m`
//! and the vertex second moment `M`. In the coordinates `y = M^{-1/2}(x − m)`
//! they become orthogonal maps, which a permutation search can recover.

use crate::body::{AffineMap, Polytope};
use crate::error::{GeomError, Result};
use crate::linalg::{lstsq, nullspace, rank, sym_inv_sqrt, sym_sqrt, symmetrize, Matrix, Vector};

/// Looser tolerance used only to prune candidate images.
const PRUNE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    elements: Vec<AffineMap>,
    /// Vertex permutation of each element, when the group acts on a polytope.
    permutations: Option<Vec<Vec<usize>>>,
    dim: usize,
}

impl SymmetryGroup {
    /// A group given by its elements; checks the group axioms to `tol`.
    pub fn from_elements(elements: Vec<AffineMap>, tol: f64) -> Result<Self> {
        let dim = elements.first().map(|t| t.dim()).ok_or_else(|| GeomError::Degenerate("empty group".into()))?;
        let g = SymmetryGroup { elements, permutations: None, dim };
        g.verify(tol)?;
        Ok(g)
    }

    pub fn trivial(d: usize) -> Self {
        SymmetryGroup { elements: vec![AffineMap::identity(d)], permutations: None, dim: d }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[AffineMap] {
        &self.elements
    }

    pub fn permutations(&self) -> Option<&[Vec<usize>]> {
        self.permutations.as_deref()
    }

    fn index_of(&self, t: &AffineMap, tol: f64) -> Option<usize> {
        self.elements.iter().position(|e| e.distance(t) <= tol)
    }

    /// Identity, closure and inverses, each to `tol`.
    pub fn verify(&self, tol: f64) -> Result<()> {
        let d = self.dim;
        if self.index_of(&AffineMap::identity(d), tol).is_none() {
            return Err(GeomError::Degenerate("group lacks the identity".into()));
        }
        for a in &self.elements {
            if self.index_of(&a.inverse(), tol).is_none() {
                return Err(GeomError::Degenerate("group is not closed under inverses".into()));
            }
            for b in &self.elements {
                if self.index_of(&a.compose(b), tol).is_none() {
                    return Err(GeomError::Degenerate("group is not closed under composition".into()));
                }
            }
        }
        Ok(())
    }
}

/// Vertex set in normalized coordinates.
struct Normalized {
    mean: Vector,
    /// `M^{-1/2}` and `M^{1/2}`.
    w: Matrix,
    w_inv: Matrix,
    y: Vec<Vector>,
    profiles: Vec<Vec<f64>>,
}

impl Normalized {
    fn new(vertices: &[Vector]) -> Result<Self> {
        let n = vertices.len();
        let d = vertices[0].len();
        let mean = vertices.iter().fold(Vector::zeros(d), |a, v| a + v) / n as f64;
        let mut m = Matrix::zeros(d, d);
        for v in vertices {
            let c = v - &mean;
            m.ger(1.0 / n as f64, &c, &c, 1.0);
        }
        let m = symmetrize(&m);
        if rank(&m, 1e-12) < d {
            return Err(GeomError::Degenerate("vertices do not span the space".into()));
        }
        let w = sym_inv_sqrt(&m);
        let w_inv = sym_sqrt(&m);
        let y: Vec<Vector> = vertices.iter().map(|v| &w * (v - &mean)).collect();
        let profiles = (0..n)
            .map(|i| {
                let mut p: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| (&y[i] - &y[j]).norm()).collect();
                p.sort_by(|a, b| a.partial_cmp(b).unwrap());
                p.insert(0, y[i].norm());
                p
            })
            .collect();
        Ok(Normalized { mean, w, w_inv, y, profiles })
    }

    /// First `d` vertices, in index order, that are linearly independent.
    fn basis(&self) -> Vec<usize> {
        let d = self.mean.len();
        let mut chosen: Vec<usize> = Vec::with_capacity(d);
        for i in 0..self.y.len() {
            let mut cols: Vec<Vector> = chosen.iter().map(|&k| self.y[k].clone()).collect();
            cols.push(self.y[i].clone());
            if rank(&Matrix::from_columns(&cols), 1e-9) == cols.len() {
                chosen.push(i);
                if chosen.len() == d {
                    break;
                }
            }
        }
        chosen
    }
}

fn profiles_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= PRUNE_TOL)
}

/// Orthogonal maps `Q` with `Q y_a = y_b` up to a vertex bijection, with the
/// bijections, by depth-first search over images of a basis of `a`.
fn orthogonal_matches(a: &Normalized, b: &Normalized, tol: f64, first_only: bool) -> Vec<(Matrix, Vec<usize>)> {
    let n = a.y.len();
    let basis = a.basis();
    let candidates: Vec<Vec<usize>> = basis
        .iter()
        .map(|&i| (0..n).filter(|&j| profiles_match(&a.profiles[i], &b.profiles[j])).collect())
        .collect();
    let ya = Matrix::from_columns(&basis.iter().map(|&i| a.y[i].clone()).collect::<Vec<_>>());
    let ya_inv = match ya.try_inverse() {
        Some(m) => m,
        None => return Vec::new(),
    };
    let mut out = Vec::new();
    let mut images: Vec<usize> = Vec::with_capacity(basis.len());
    search(a, b, &basis, &candidates, &ya_inv, tol, first_only, &mut images, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &Normalized,
    b: &Normalized,
    basis: &[usize],
    candidates: &[Vec<usize>],
    ya_inv: &Matrix,
    tol: f64,
    first_only: bool,
    images: &mut Vec<usize>,
    out: &mut Vec<(Matrix, Vec<usize>)>,
) {
    if first_only && !out.is_empty() {
        return;
    }
    let k = images.len();
    if k == basis.len() {
        let yb = Matrix::from_columns(&images.iter().map(|&j| b.y[j].clone()).collect::<Vec<_>>());
        let q = yb * ya_inv;
        let d = q.nrows();
        if (q.transpose() * &q - Matrix::identity(d, d)).amax() > PRUNE_TOL {
            return;
        }
        if let Some(perm) = vertex_bijection(a, b, &q, tol) {
            out.push((q, perm));
        }
        return;
    }
    for &j in &candidates[k] {
        if images.contains(&j) {
            continue;
        }
        let consistent = (0..k).all(|l| {
            let da = (&a.y[basis[k]] - &a.y[basis[l]]).norm();
            let db = (&b.y[j] - &b.y[images[l]]).norm();
            (da - db).abs() <= PRUNE_TOL
        });
        if !consistent {
            continue;
        }
        images.push(j);
        search(a, b, basis, candidates, ya_inv, tol, first_only, images, out);
        images.pop();
    }
}

fn vertex_bijection(a: &Normalized, b: &Normalized, q: &Matrix, tol: f64) -> Option<Vec<usize>> {
    let n = a.y.len();
    let mut used = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    for ya in &a.y {
        let img = q * ya;
        let j = (0..n).find(|&j| !used[j] && (&img - &b.y[j]).norm() <= tol)?;
        used[j] = true;
        perm.push(j);
    }
    Some(perm)
}

fn check_input(poly: &Polytope, limit: usize) -> Result<()> {
    let n = poly.vertices().len();
    if n > limit {
        return Err(GeomError::LimitExceeded { what: "vertex count", size: n, limit });
    }
    poly.check_minimal()
}

pub fn symmetry_group(poly: &Polytope, tol: f64) -> Result<SymmetryGroup> {
    symmetry_group_with(poly, tol, crate::config::Config::default().symmetry_vertex_limit)
}

/// All affine maps `T` with `T(P) = P`, found as vertex permutations realized
/// by orthogonal maps of the normalized vertex set.
pub fn symmetry_group_with(poly: &Polytope, tol: f64, vertex_limit: usize) -> Result<SymmetryGroup> {
    check_input(poly, vertex_limit)?;
    let norm = Normalized::new(poly.vertices())?;
    let matches = orthogonal_matches(&norm, &norm, tol, false);
    let mut elements = Vec::with_capacity(matches.len());
    let mut permutations = Vec::with_capacity(matches.len());
    for (q, perm) in matches {
        elements.push(denormalize(&norm, &norm, &q)?);
        permutations.push(perm);
    }
    Ok(SymmetryGroup { elements, permutations: Some(permutations), dim: poly.dim() })
}

/// `x ↦ m_b + W_b^{-1} Q W_a (x − m_a)`.
fn denormalize(a: &Normalized, b: &Normalized, q: &Matrix) -> Result<AffineMap> {
    let l = &b.w_inv * q * &a.w;
    let t = &b.mean - &l * &a.mean;
    AffineMap::new(l, t)
}

/// Affine subspace `base + span(basis)` fixed by every element.
#[derive(Debug, Clone)]
pub struct FixedSpace {
    pub base: Vector,
    pub basis: Vec<Vector>,
    pub dim: usize,
    /// Largest `‖T(base) − base‖` over the group.
    pub residual: f64,
}

impl FixedSpace {
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        let mut r = x - &self.base;
        for b in &self.basis {
            r -= b * b.dot(&r);
        }
        r.norm() <= tol
    }
}

/// Solves `(L_T − Id) x = −b_T` jointly over the group.
pub fn fixed_space(group: &SymmetryGroup, tol: f64) -> Result<FixedSpace> {
    let d = group.dim;
    let k = group.order();
    let mut a = Matrix::zeros(d * k, d);
    let mut rhs = Vector::zeros(d * k);
    for (i, t) in group.elements.iter().enumerate() {
        let block = t.linear_part() - Matrix::identity(d, d);
        a.view_mut((i * d, 0), (d, d)).copy_from(&block);
        rhs.rows_mut(i * d, d).copy_from(&(-t.translation_part()));
    }
    let base = lstsq(&a, &rhs);
    let residual = group.elements.iter().map(|t| (t.apply(&base) - &base).norm()).fold(0.0, f64::max);
    if residual > tol * (1.0 + base.norm()) {
        return Err(GeomError::EmptyFixedSpace(residual));
    }
    let basis = nullspace(&a, tol);
    Ok(FixedSpace { dim: basis.len(), base, basis, residual })
}

/// `|G|^{-1} Σ_T T(x)`; the result is fixed by every element.
pub fn group_average(group: &SymmetryGroup, x: &Vector) -> Vector {
    group.elements.iter().fold(Vector::zeros(x.len()), |acc, t| acc + t.apply(x)) / group.order() as f64
}

/// Some `T` with `T(P1) = P2` to `tol`, if one exists.
pub fn affinely_equivalent(p1: &Polytope, p2: &Polytope, tol: f64) -> Result<Option<AffineMap>> {
    affinely_equivalent_with(p1, p2, tol, crate::config::Config::default().symmetry_vertex_limit)
}

pub fn affinely_equivalent_with(p1: &Polytope, p2: &Polytope, tol: f64, vertex_limit: usize) -> Result<Option<AffineMap>> {
    check_input(p1, vertex_limit)?;
    check_input(p2, vertex_limit)?;
    if p1.dim() != p2.dim() || p1.vertices().len() != p2.vertices().len() {
        return Ok(None);
    }
    let a = Normalized::new(p1.vertices())?;
    let b = Normalized::new(p2.vertices())?;
    match orthogonal_matches(&a, &b, tol, true).into_iter().next() {
        Some((q, _)) => Ok(Some(denormalize(&a, &b, &q)?)),
        None => Ok(None),
    }
}

/// Largest group order `cone_subgroup` will enumerate.
const CONE_GROUP_LIMIT: usize = 5000;

/// Signed permutations of the last `d − 1` coordinates: a finite group of
/// symmetries of every body that is invariant under them, such as the cones
/// over `B_p` balls.
pub fn cone_subgroup(d: usize) -> Result<SymmetryGroup> {
    if d < 2 {
        return Err(GeomError::Degenerate("need d ≥ 2".into()));
    }
    let m = d - 1;
    let size = (1..=m).product::<usize>().saturating_mul(1 << m.min(60));
    if size > CONE_GROUP_LIMIT {
        return Err(GeomError::LimitExceeded { what: "cone subgroup order", size, limit: CONE_GROUP_LIMIT });
    }
    let mut elements = Vec::with_capacity(size);
    for perm in permutations(m) {
        for signs in 0..(1usize << m) {
            let mut l = Matrix::zeros(d, d);
            l[(0, 0)] = 1.0;
            for (i, &pi) in perm.iter().enumerate() {
                l[(1 + pi, 1 + i)] = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            }
            elements.push(AffineMap::linear(l)?);
        }
    }
    Ok(SymmetryGroup { elements, permutations: None, dim: d })
}

/// Permutations of `0..m` in lexicographic order.
fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn square() -> Polytope {
        Polytope::new(vec![vector(&[-1.0, -1.0]), vector(&[1.0, -1.0]), vector(&[1.0, 1.0]), vector(&[-1.0, 1.0])])
            .unwrap()
    }

    #[test]
    fn square_is_dihedral() {
        let g = symmetry_group(&square(), 1e-8).unwrap();
        assert_eq!(g.order(), 8);
        g.verify(1e-8).unwrap();
        let f = fixed_space(&g, 1e-8).unwrap();
        assert_eq!(f.dim, 0);
        assert!(f.base.norm() < 1e-12);
        assert!(group_average(&g, &vector(&[0.7, 0.3])).norm() < 1e-12);
    }

    #[test]
    fn triangle_has_order_six() {
        let t = Polytope::new(vec![vector(&[0.0, 0.0]), vector(&[1.0, 0.0]), vector(&[0.0, 1.0])]).unwrap();
        let g = symmetry_group(&t, 1e-8).unwrap();
        assert_eq!(g.order(), 6);
        g.verify(1e-8).unwrap();
    }

    #[test]
    fn trivial_group_fixes_everything() {
        let g = SymmetryGroup::trivial(3);
        let f = fixed_space(&g, 1e-8).unwrap();
        assert_eq!(f.dim, 3);
        let x = vector(&[0.1, 0.2, 0.3]);
        assert_eq!(group_average(&g, &x), x);
    }

    #[test]
    fn cone_group() {
        let g = cone_subgroup(3).unwrap();
        assert_eq!(g.order(), 8);
        g.verify(1e-12).unwrap();
        let f = fixed_space(&g, 1e-8).unwrap();
        assert_eq!(f.dim, 1);
        assert!((f.basis[0][0].abs() - 1.0).abs() < 1e-12);
        let avg = group_average(&g, &vector(&[0.5, 0.2, 0.1]));
        assert!((avg - vector(&[0.5, 0.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn equivalence_examples() {
        let sq = square();
        let tri = Polytope::new(vec![vector(&[0.0, 0.0]), vector(&[1.0, 0.0]), vector(&[0.0, 1.0])]).unwrap();
        assert!(affinely_equivalent(&sq, &tri, 1e-6).unwrap().is_none());
        let para = Polytope::new(vec![vector(&[0.0, 0.0]), vector(&[2.0, 0.0]), vector(&[3.0, 1.0]), vector(&[1.0, 1.0])])
            .unwrap();
        let t = affinely_equivalent(&sq, &para, 1e-6).unwrap().unwrap();
        for v in sq.vertices() {
            let img = t.apply(v);
            assert!(para.vertices().iter().any(|w| (w - &img).norm() < 1e-9));
        }
    }

    #[test]
    fn permutation_order() {
        assert_eq!(permutations(3), vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]);
    }
}
