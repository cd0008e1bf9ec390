//! Maximum-volume inscribed ellipsoid `{B u + c : ‖u‖ ≤ 1}` of a half-space
//! system `⟨x, a_k⟩ ≤ b_k`, by a log-barrier path-following Newton method.

use crate::error::{GeomError, Result};
use crate::linalg::{Matrix, Vector};

/// Half-spaces `⟨x, a_k⟩ ≤ b_k` with unit normals.
#[derive(Debug, Clone, Default)]
pub struct HalfSpaces {
    pub normals: Vec<Vector>,
    pub offsets: Vec<f64>,
}

impl HalfSpaces {
    pub fn push(&mut self, a: Vector, b: f64) {
        let n = a.norm();
        self.normals.push(a / n);
        self.offsets.push(b / n);
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct BarrierSolution {
    pub map: Matrix,
    pub center: Vector,
    /// Dual weights `w_k`; `Σ w_k v_k v_kᵀ = Id`, `Σ w_k v_k = 0` at optimality.
    pub weights: Vec<f64>,
    /// Unit vectors `B a_k / ‖B a_k‖`: touching points in normalized coordinates.
    pub contacts: Vec<Vector>,
    /// Duality-gap bound on `log det B`.
    pub gap: f64,
    pub newton_steps: usize,
}

struct Layout {
    d: usize,
    pairs: Vec<(usize, usize)>,
}

impl Layout {
    fn new(d: usize) -> Self {
        let mut pairs = Vec::with_capacity(d * (d + 1) / 2);
        for p in 0..d {
            for q in p..d {
                pairs.push((p, q));
            }
        }
        Layout { d, pairs }
    }

    fn m(&self) -> usize {
        self.pairs.len()
    }

    fn n(&self) -> usize {
        self.m() + self.d
    }

    fn unpack(&self, theta: &Vector) -> (Matrix, Vector) {
        let mut b = Matrix::zeros(self.d, self.d);
        for (k, &(p, q)) in self.pairs.iter().enumerate() {
            b[(p, q)] = theta[k];
            b[(q, p)] = theta[k];
        }
        (b, theta.rows(self.m(), self.d).into_owned())
    }

    fn pack(&self, b: &Matrix, c: &Vector) -> Vector {
        let mut theta = Vector::zeros(self.n());
        for (k, &(p, q)) in self.pairs.iter().enumerate() {
            theta[k] = 0.5 * (b[(p, q)] + b[(q, p)]);
        }
        theta.rows_mut(self.m(), self.d).copy_from(c);
        theta
    }

    /// Columns `E_pq a` of the map `θ_B ↦ dB a`.
    fn jac(&self, a: &Vector) -> Matrix {
        let mut j = Matrix::zeros(self.d, self.m());
        for (k, &(p, q)) in self.pairs.iter().enumerate() {
            j[(p, k)] += a[q];
            if p != q {
                j[(q, k)] += a[p];
            }
        }
        j
    }
}

struct Eval {
    f: f64,
    grad: Vector,
    hess: Matrix,
}

fn evaluate(lay: &Layout, hs: &HalfSpaces, theta: &Vector, t: f64, derivs: bool) -> Option<Eval> {
    let (b, c) = lay.unpack(theta);
    let chol = b.clone().cholesky()?;
    let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let mut f = -t * logdet;
    let mut slacks = Vec::with_capacity(hs.len());
    for (a, &off) in hs.normals.iter().zip(&hs.offsets) {
        let s = off - (&b * a).norm() - c.dot(a);
        if !(s > 0.0) {
            return None;
        }
        f -= s.ln();
        slacks.push(s);
    }
    let n = lay.n();
    let m = lay.m();
    let mut grad = Vector::zeros(n);
    let mut hess = Matrix::zeros(n, n);
    if !derivs {
        return Some(Eval { f, grad, hess });
    }

    let w = chol.inverse();
    let terms = |&(p, q): &(usize, usize)| -> Vec<(usize, usize)> {
        if p == q {
            vec![(p, p)]
        } else {
            vec![(p, q), (q, p)]
        }
    };
    for (ka, pa) in lay.pairs.iter().enumerate() {
        let (p, q) = *pa;
        grad[ka] = -t * if p == q { w[(p, p)] } else { 2.0 * w[(p, q)] };
        let ta = terms(pa);
        for (kb, pb) in lay.pairs.iter().enumerate().skip(ka) {
            let mut tr = 0.0;
            for &(x, y) in &ta {
                for &(z, u) in &terms(pb) {
                    tr += w[(y, z)] * w[(u, x)];
                }
            }
            hess[(ka, kb)] = t * tr;
            hess[(kb, ka)] = t * tr;
        }
    }

    let mut gs = Vector::zeros(n);
    for (a, &s) in hs.normals.iter().zip(&slacks) {
        let r = &b * a;
        let nr = r.norm();
        let rh = &r / nr;
        let jm = lay.jac(a);
        let jr = jm.transpose() * &rh;
        gs.rows_mut(0, m).copy_from(&(-&jr));
        gs.rows_mut(m, lay.d).copy_from(&(-a));
        grad -= &gs / s;
        hess.ger(1.0 / (s * s), &gs, &gs, 1.0);
        // Curvature of ‖B a‖: Jᵀ (I − r̂r̂ᵀ) J / ‖B a‖.
        let jtj = jm.transpose() * &jm;
        let mut blk = hess.view_mut((0, 0), (m, m));
        blk += (jtj - &jr * jr.transpose()) / (nr * s);
    }
    Some(Eval { f, grad, hess })
}

fn newton_direction(e: &Eval) -> Vector {
    let n = e.grad.len();
    let mut reg = 0.0;
    loop {
        let mut h = e.hess.clone();
        if reg > 0.0 {
            for i in 0..n {
                h[(i, i)] += reg;
            }
        }
        if let Some(ch) = h.cholesky() {
            return -ch.solve(&e.grad);
        }
        reg = if reg == 0.0 { 1e-12 * e.hess.diagonal().amax().max(1e-300) } else { reg * 100.0 };
    }
}

/// Maximize `log det B` over `‖B a_k‖ + ⟨c, a_k⟩ ≤ b_k` from a strictly
/// feasible start, until the duality gap drops below `gap_tol`.
pub fn solve(hs: &HalfSpaces, start: (&Matrix, &Vector), gap_tol: f64, max_newton: usize) -> Result<BarrierSolution> {
    let d = start.1.len();
    let lay = Layout::new(d);
    let mut theta = lay.pack(start.0, start.1);
    let k = hs.len() as f64;
    let mut t = 1.0;
    if evaluate(&lay, hs, &theta, t, false).is_none() {
        return Err(GeomError::Infeasible("barrier start is not strictly feasible".into(), 0.0));
    }
    let mut steps = 0;
    loop {
        for _ in 0..100 {
            let e = evaluate(&lay, hs, &theta, t, true).expect("iterate stays feasible");
            let dir = newton_direction(&e);
            let slope = e.grad.dot(&dir);
            if -slope / 2.0 <= 1e-13 {
                break;
            }
            steps += 1;
            if steps > max_newton {
                return Err(GeomError::NoConvergence { what: "john barrier", residual: k / t });
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-14 {
                let cand = &theta + &dir * alpha;
                if let Some(ec) = evaluate(&lay, hs, &cand, t, false) {
                    // The last term absorbs rounding once f is large.
                    if ec.f <= e.f + 1e-4 * alpha * slope + 1e-14 * e.f.abs() {
                        theta = cand;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if k / t <= gap_tol {
            break;
        }
        t *= 8.0;
    }

    let (b, c) = lay.unpack(&theta);
    let mut weights = Vec::with_capacity(hs.len());
    let mut contacts = Vec::with_capacity(hs.len());
    for (a, &off) in hs.normals.iter().zip(&hs.offsets) {
        let r = &b * a;
        let nr = r.norm();
        let s = off - nr - c.dot(a);
        weights.push(nr / (t * s));
        contacts.push(r / nr);
    }
    Ok(BarrierSolution { map: b, center: c, weights, contacts, gap: k / t, newton_steps: steps })
}

/// Largest `B = r·Id` ball around `z` that is strictly inside the half-spaces,
/// shrunk by half.
pub fn ball_start(hs: &HalfSpaces, z: &Vector) -> Option<Matrix> {
    let r = hs.normals.iter().zip(&hs.offsets).map(|(a, &b)| b - a.dot(z)).fold(f64::INFINITY, f64::min);
    (r > 0.0).then(|| Matrix::identity(z.len(), z.len()) * (0.5 * r))
}

/// Shrink `B` about `c` until it is strictly inside every half-space.
pub fn shrink_into(hs: &HalfSpaces, b: &Matrix, c: &Vector) -> Option<Matrix> {
    let mut f: f64 = 0.99;
    for (a, &off) in hs.normals.iter().zip(&hs.offsets) {
        let room = off - c.dot(a);
        if room <= 0.0 {
            return None;
        }
        f = f.min(0.9 * room / (b * a).norm());
    }
    Some(b * f)
}
