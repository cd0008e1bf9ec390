//! V-polytopes. Facets are enumerated exactly for d ≤ 3 and for simplices in
//! any dimension; everything else runs through the vertex oracle only.

use crate::error::{GeomError, Result};
use crate::linalg::{min_norm_point, nullspace, rank, Matrix, MinNormOptions, Vector};
use crate::sphere;

/// Largest number of d-subsets examined by the brute-force facet search.
const FACET_SUBSET_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Outer unit normal.
    pub normal: Vector,
    /// `⟨normal, x⟩ = offset` on the facet.
    pub offset: f64,
    /// Indices of the vertices lying on the facet.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vector>,
    facets: Option<Vec<Facet>>,
    scale: f64,
}

impl Polytope {
    /// Builds a polytope from its vertex list. The vertices must affinely span
    /// the ambient space; interior or repeated points are kept as given.
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        let d = check_points(&vertices)?;
        let mean = mean(&vertices);
        let scale = vertices.iter().map(|v| (v - &mean).norm()).fold(0.0, f64::max);
        let diffs = Matrix::from_fn(vertices.len(), d, |i, j| vertices[i][j] - mean[j]);
        if rank(&diffs, 1e-10) < d {
            return Err(GeomError::Degenerate("vertices do not affinely span the space".into()));
        }
        let mut p = Polytope { vertices, facets: None, scale };
        p.facets = p.enumerate_facets();
        Ok(p)
    }

    /// Convex hull of a point cloud, keeping extreme points only (d ≤ 3 or
    /// simplices; otherwise the points are kept as given).
    pub fn hull_of(points: Vec<Vector>) -> Result<Self> {
        let p = Polytope::new(points)?;
        match p.extreme_indices() {
            Some(idx) if idx.len() < p.vertices.len() => {
                Polytope::new(idx.into_iter().map(|i| p.vertices[i].clone()).collect())
            }
            _ => Ok(p),
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn facets(&self) -> Option<&[Facet]> {
        self.facets.as_deref()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn vertex_mean(&self) -> Vector {
        mean(&self.vertices)
    }

    pub fn support(&self, u: &Vector) -> f64 {
        self.vertices.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn support_point(&self, u: &Vector) -> Vector {
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let s = v.dot(u);
            if s > val {
                val = s;
                best = i;
            }
        }
        self.vertices[best].clone()
    }

    /// Largest facet violation `max ⟨n, x⟩ − offset` when facets are known.
    pub fn facet_violation(&self, x: &Vector) -> Option<f64> {
        self.facets.as_ref().map(|fs| {
            fs.iter().map(|f| f.normal.dot(x) - f.offset).fold(f64::NEG_INFINITY, f64::max)
        })
    }

    /// Euclidean distance from `x` and the nearest point.
    pub fn project(&self, x: &Vector) -> (f64, Vector) {
        if let Some(v) = self.facet_violation(x) {
            if v <= 0.0 {
                return (0.0, x.clone());
            }
        }
        let shifted: Vec<Vector> = self.vertices.iter().map(|v| v - x).collect();
        let oracle = |y: &Vector| {
            shifted
                .iter()
                .min_by(|a, b| y.dot(a).partial_cmp(&y.dot(b)).unwrap())
                .unwrap()
                .clone()
        };
        let start = shifted[0].clone();
        let opts = MinNormOptions { gap: 1e-13 * (1.0 + self.scale), max_iter: 10_000, ..Default::default() };
        let r = min_norm_point(start, oracle, opts);
        (r.upper(), x + &r.point)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self.facet_violation(x) {
            Some(v) => v <= tol,
            None => {
                let shifted: Vec<Vector> = self.vertices.iter().map(|v| v - x).collect();
                let oracle = |y: &Vector| {
                    shifted
                        .iter()
                        .min_by(|a, b| y.dot(a).partial_cmp(&y.dot(b)).unwrap())
                        .unwrap()
                        .clone()
                };
                let opts = MinNormOptions {
                    gap: 1e-3 * tol,
                    max_iter: 10_000,
                    inside_below: tol,
                    outside_above: tol,
                };
                let r = min_norm_point(shifted[0].clone(), oracle, opts);
                r.upper() <= tol || (r.lower <= tol && r.upper() - r.lower <= 1e-3 * tol)
            }
        }
    }

    pub fn map_vertices(&self, f: impl Fn(&Vector) -> Vector) -> Result<Self> {
        Polytope::new(self.vertices.iter().map(f).collect())
    }

    /// Indices of the extreme points (vertices whose incident facet normals
    /// span the space). `None` without a facet description.
    pub fn extreme_indices(&self) -> Option<Vec<usize>> {
        let facets = self.facets.as_ref()?;
        let d = self.dim();
        let mut out = Vec::new();
        for i in 0..self.vertices.len() {
            let normals: Vec<&Vector> =
                facets.iter().filter(|f| f.vertices.contains(&i)).map(|f| &f.normal).collect();
            if normals.len() < d {
                continue;
            }
            let m = Matrix::from_fn(normals.len(), d, |r, c| normals[r][c]);
            if rank(&m, 1e-9) == d {
                // Duplicated points: keep the first copy only.
                let dup = out.iter().any(|&j: &usize| {
                    (&self.vertices[j] - &self.vertices[i]).norm() <= 1e-12 * (1.0 + self.scale)
                });
                if !dup {
                    out.push(i);
                }
            }
        }
        Some(out)
    }

    /// Checks the vertex list is a minimal V-representation.
    pub fn check_minimal(&self) -> Result<()> {
        let n = self.vertices.len();
        for i in 0..n {
            for j in 0..i {
                if (&self.vertices[i] - &self.vertices[j]).norm() <= 1e-12 * (1.0 + self.scale) {
                    return Err(GeomError::NotMinimal(format!("vertices {j} and {i} coincide")));
                }
            }
        }
        match self.extreme_indices() {
            Some(idx) if idx.len() < n => {
                let bad = (0..n).find(|i| !idx.contains(i)).unwrap_or(0);
                Err(GeomError::NotMinimal(format!("vertex {bad} is not extreme")))
            }
            Some(_) => Ok(()),
            None => {
                // Fall back to the distance test against the remaining points.
                for i in 0..n {
                    let others: Vec<Vector> =
                        (0..n).filter(|&j| j != i).map(|j| self.vertices[j].clone()).collect();
                    if let Ok(rest) = Polytope::new(others) {
                        if rest.project(&self.vertices[i]).0 <= 1e-9 * (1.0 + self.scale) {
                            return Err(GeomError::NotMinimal(format!("vertex {i} is not extreme")));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn is_simplex(&self) -> bool {
        self.vertices.len() == self.dim() + 1
    }

    fn enumerate_facets(&self) -> Option<Vec<Facet>> {
        let d = self.dim();
        let n = self.vertices.len();
        if !(self.is_simplex() || d <= 3) {
            return None;
        }
        if binomial(n, d) > FACET_SUBSET_LIMIT {
            return None;
        }
        let tol = 1e-9 * (1.0 + self.scale);
        let centre = self.vertex_mean();
        let mut facets: Vec<Facet> = Vec::new();
        for subset in Combinations::new(n, d) {
            let Some(mut normal) = hyperplane_normal(&self.vertices, &subset) else { continue };
            let mut offset = normal.dot(&self.vertices[subset[0]]);
            if normal.dot(&centre) > offset {
                normal = -normal;
                offset = -offset;
            }
            if self.vertices.iter().any(|v| normal.dot(v) - offset > tol) {
                continue;
            }
            let on: Vec<usize> =
                (0..n).filter(|&i| (normal.dot(&self.vertices[i]) - offset).abs() <= tol).collect();
            if facets.iter().any(|f| f.vertices == on) {
                continue;
            }
            facets.push(Facet { normal, offset, vertices: on });
        }
        Some(facets)
    }

    /// Exact volume and centroid by coning facets over the vertex mean.
    pub fn volume_centroid(&self) -> Option<(f64, Vector)> {
        let d = self.dim();
        if self.is_simplex() {
            let vol = simplex_volume(&self.vertices);
            return Some((vol, self.vertex_mean()));
        }
        let facets = self.facets.as_ref()?;
        let apex = self.vertex_mean();
        let mut vol = 0.0;
        let mut acc = Vector::zeros(d);
        for f in facets {
            for simplex in self.triangulate_facet(f)? {
                let mut pts: Vec<Vector> = simplex.iter().map(|&i| self.vertices[i].clone()).collect();
                pts.push(apex.clone());
                let v = simplex_volume(&pts);
                acc += mean(&pts) * v;
                vol += v;
            }
        }
        Some((vol, acc / vol))
    }

    pub fn volume(&self) -> Option<f64> {
        self.volume_centroid().map(|(v, _)| v)
    }

    /// Splits a facet into (d−1)-simplices (index lists), d ≤ 3.
    fn triangulate_facet(&self, f: &Facet) -> Option<Vec<Vec<usize>>> {
        let d = self.dim();
        let pts = &f.vertices;
        match d {
            1 => Some(vec![pts.clone()]),
            2 => {
                let dir = Vector::from_column_slice(&[-f.normal[1], f.normal[0]]);
                let mut order = pts.clone();
                order.sort_by(|&a, &b| {
                    dir.dot(&self.vertices[a]).partial_cmp(&dir.dot(&self.vertices[b])).unwrap()
                });
                Some(order.windows(2).map(|w| w.to_vec()).collect())
            }
            3 => {
                if pts.len() < 3 {
                    return None;
                }
                let c = mean(&pts.iter().map(|&i| self.vertices[i].clone()).collect::<Vec<_>>());
                let e1 = {
                    let v = &self.vertices[pts[0]] - &c;
                    v.clone() / v.norm()
                };
                let e2 = f.normal.cross(&e1);
                let mut order = pts.clone();
                let angle = |i: usize| {
                    let v = &self.vertices[i] - &c;
                    v.dot(&e2).atan2(v.dot(&e1))
                };
                order.sort_by(|&a, &b| angle(a).partial_cmp(&angle(b)).unwrap());
                Some((1..order.len() - 1).map(|k| vec![order[0], order[k], order[k + 1]]).collect())
            }
            _ => None,
        }
    }
}

fn check_points(points: &[Vector]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(GeomError::InvalidBody("empty vertex list".into()));
    };
    let d = first.len();
    if d == 0 {
        return Err(GeomError::InvalidBody("zero-dimensional vertices".into()));
    }
    for p in points {
        if p.len() != d {
            return Err(GeomError::DimensionMismatch { expected: d, got: p.len() });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::InvalidBody("non-finite coordinate".into()));
        }
    }
    if points.len() < d + 1 {
        return Err(GeomError::Degenerate(format!("{} points cannot span ℝ^{d}", points.len())));
    }
    Ok(d)
}

pub fn mean(points: &[Vector]) -> Vector {
    let mut acc = Vector::zeros(points[0].len());
    for p in points {
        acc += p;
    }
    acc / points.len() as f64
}

/// Volume of the simplex spanned by d+1 points in ℝ^d.
pub fn simplex_volume(points: &[Vector]) -> f64 {
    let d = points[0].len();
    let m = Matrix::from_fn(d, d, |i, j| points[j + 1][i] - points[0][i]);
    m.determinant().abs() / factorial(d)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r.min(usize::MAX as u128) as usize
}

/// Unit normal of the hyperplane through the given d points, if they are
/// affinely independent.
fn hyperplane_normal(vertices: &[Vector], subset: &[usize]) -> Option<Vector> {
    let d = vertices[0].len();
    let base = &vertices[subset[0]];
    let n = match d {
        2 => {
            let e = &vertices[subset[1]] - base;
            Vector::from_column_slice(&[-e[1], e[0]])
        }
        3 => {
            let a = &vertices[subset[1]] - base;
            let b = &vertices[subset[2]] - base;
            let c = a.cross(&b);
            if c.norm() <= 1e-12 * a.norm() * b.norm() {
                return None;
            }
            c
        }
        _ => {
            let m = Matrix::from_fn(d - 1, d, |i, j| vertices[subset[i + 1]][j] - base[j]);
            let ns = nullspace(&m, 1e-10);
            if ns.len() != 1 {
                return None;
            }
            ns[0].clone()
        }
    };
    let norm = n.norm();
    if norm <= 1e-300 {
        None
    } else {
        Some(n / norm)
    }
}

/// Lexicographic k-subsets of 0..n.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations { n, idx: (0..k).collect(), done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Regular polygon with `n` vertices on the circle of radius `r`.
pub fn regular_polygon(n: usize, r: f64) -> Vec<Vector> {
    (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            Vector::from_column_slice(&[r * a.cos(), r * a.sin()])
        })
        .collect()
}

/// Random polytope: convex hull of `n` points drawn uniformly from the unit
/// sphere (d ≤ 3 keeps extreme points only).
pub fn random_polytope(d: usize, n: usize, seed: u64) -> Result<Polytope> {
    let mut g = sphere::rng(seed);
    loop {
        let pts: Vec<Vector> = (0..n).map(|_| sphere::random_unit(&mut g, d)).collect();
        match Polytope::hull_of(pts) {
            Ok(p) => return Ok(p),
            Err(GeomError::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn square() -> Polytope {
        Polytope::new(vec![
            vector(&[-1.0, -1.0]),
            vector(&[1.0, -1.0]),
            vector(&[1.0, 1.0]),
            vector(&[-1.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn square_facets_and_volume() {
        let s = square();
        assert_eq!(s.facets().unwrap().len(), 4);
        let (v, c) = s.volume_centroid().unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        assert!(c.norm() < 1e-12);
    }

    #[test]
    fn cube_volume() {
        let mut pts = Vec::new();
        for a in [0.0, 1.0] {
            for b in [0.0, 2.0] {
                for c in [0.0, 3.0] {
                    pts.push(vector(&[a, b, c]));
                }
            }
        }
        let p = Polytope::new(pts).unwrap();
        assert_eq!(p.facets().unwrap().len(), 6);
        let (v, c) = p.volume_centroid().unwrap();
        assert!((v - 6.0).abs() < 1e-10);
        assert!((c - vector(&[0.5, 1.0, 1.5])).norm() < 1e-12);
    }

    #[test]
    fn hull_drops_interior_points() {
        let mut pts = square().vertices().to_vec();
        pts.push(vector(&[0.2, 0.1]));
        pts.push(vector(&[1.0, 0.0]));
        let h = Polytope::hull_of(pts.clone()).unwrap();
        assert_eq!(h.vertices().len(), 4);
        assert!(Polytope::new(pts).unwrap().check_minimal().is_err());
    }

    #[test]
    fn projection_onto_triangle() {
        let t = Polytope::new(vec![vector(&[0.0, 0.0]), vector(&[1.0, 0.0]), vector(&[0.0, 1.0])]).unwrap();
        let (d, p) = t.project(&vector(&[1.0, 1.0]));
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((p - vector(&[0.5, 0.5])).norm() < 1e-12);
    }

    #[test]
    fn combinations_count() {
        assert_eq!(Combinations::new(6, 3).count(), 20);
        assert_eq!(binomial(60, 3), 34220);
    }
}
