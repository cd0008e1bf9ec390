//! Deterministic direction samplers on the unit sphere.

use crate::linalg::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed random unit vector.
pub fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vector {
    loop {
        let v = Vector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// `n` quasi-uniform directions on `S^{d-1}`: an equiangular grid for d = 2,
/// a Fibonacci lattice for d = 3 and seeded Gaussian samples above. The ±eᵢ
/// axis directions are always included for d ≥ 3.
pub fn directions(d: usize, n: usize, seed: u64) -> Vec<Vector> {
    match d {
        0 => Vec::new(),
        1 => vec![Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)],
        2 => (0..n.max(4))
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k as f64) / (n.max(4) as f64);
                Vector::from_column_slice(&[a.cos(), a.sin()])
            })
            .collect(),
        _ => {
            let mut out = axis_directions(d);
            if d == 3 {
                let m = n.saturating_sub(out.len()).max(1);
                let golden = (1.0 + 5f64.sqrt()) / 2.0;
                // Rotate the lattice by a seed-dependent offset.
                let offset = (seed % 1000) as f64 / 1000.0;
                for k in 0..m {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * ((k as f64) / golden + offset).fract();
                    out.push(Vector::from_column_slice(&[r * phi.cos(), r * phi.sin(), z]));
                }
            } else {
                let mut g = rng(seed);
                while out.len() < n {
                    out.push(random_unit(&mut g, d));
                }
            }
            out
        }
    }
}

/// Local maximization of `f` over the unit sphere by random perturbations
/// with a shrinking step, starting at `u0`. Returns the best direction, its
/// value and the number of evaluations.
pub fn hill_climb<F: FnMut(&Vector) -> f64>(
    mut f: F,
    u0: &Vector,
    step0: f64,
    min_step: f64,
    seed: u64,
) -> (Vector, f64, usize) {
    let d = u0.len();
    let mut g = rng(seed);
    let mut u = u0 / u0.norm();
    let mut val = f(&u);
    let mut evals = 1;
    let mut step = step0;
    while step > min_step {
        let mut improved = false;
        for _ in 0..(4 * d) {
            let w = random_unit(&mut g, d);
            let cand = &u + w * step;
            let cand = &cand / cand.norm();
            let v = f(&cand);
            evals += 1;
            if v > val {
                val = v;
                u = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (u, val, evals)
}

pub fn axis_directions(d: usize) -> Vec<Vector> {
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut v = Vector::zeros(d);
            v[i] = s;
            out.push(v);
        }
    }
    out
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Volume of the Euclidean unit ball in ℝ^d.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

/// Gamma function at positive integers and half-integers.
pub fn gamma(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    assert!(twice > 0 && ((2.0 * x) - twice as f64).abs() < 1e-12, "gamma: unsupported argument {x}");
    if twice % 2 == 0 {
        (1..(twice / 2)).map(|k| k as f64).product()
    } else {
        // Γ(n + 1/2) = (2n)! / (4^n n!) √π
        let mut g = std::f64::consts::PI.sqrt();
        let mut t = 0.5;
        while t < x - 1e-12 {
            g *= t;
            t += 1.0;
        }
        g
    }
}
