//! Test-side oracles built without the library's matrix or transform code.

#![allow(dead_code)]

use fermilat::{Complex64, Lattice, Potential};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn lattice(q: &[usize]) -> Lattice {
    Lattice::new(q.to_vec()).unwrap()
}

/// Row-major position of `n` (last axis fastest).
pub fn flat(q: &[usize], n: &[usize]) -> usize {
    n.iter().zip(q).fold(0, |acc, (&nj, &qj)| acc * qj + nj)
}

/// Inverse of [`flat`].
pub fn unflat(q: &[usize], mut p: usize) -> Vec<usize> {
    let mut n = vec![0; q.len()];
    for j in (0..q.len()).rev() {
        n[j] = p % q[j];
        p /= q[j];
    }
    n
}

/// Matrix of `Δ + V` on one cell with `u(n + q_j e_j) = z_j u(n)`.
pub fn naive_direct(q: &[usize], values: &[f64], z: &[Complex64]) -> DMatrix<Complex64> {
    let size: usize = q.iter().product();
    let mut m = DMatrix::<Complex64>::zeros(size, size);
    for row in 0..size {
        let n = unflat(q, row);
        m[(row, row)] += Complex64::new(values[row], 0.0);
        for j in 0..q.len() {
            let mut fwd = n.clone();
            let mut bwd = n.clone();
            let (wf, wb) = if n[j] + 1 == q[j] {
                fwd[j] = 0;
                (z[j], Complex64::new(1.0, 0.0))
            } else {
                fwd[j] += 1;
                (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
            };
            let wb = if n[j] == 0 {
                bwd[j] = q[j] - 1;
                z[j].inv()
            } else {
                bwd[j] -= 1;
                wb
            };
            m[(row, flat(q, &fwd))] += wf;
            m[(row, flat(q, &bwd))] += wb;
        }
    }
    m
}

pub fn det_shifted(mut m: DMatrix<Complex64>, lambda: Complex64) -> Complex64 {
    for i in 0..m.nrows() {
        m[(i, i)] -= lambda;
    }
    m.determinant()
}

/// Sorted eigenvalues of the Hermitian matrix at real quasi-momentum `k`.
pub fn naive_spectrum(q: &[usize], values: &[f64], k: &[f64]) -> Vec<f64> {
    let z: Vec<Complex64> = k
        .iter()
        .map(|kj| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * kj))
        .collect();
    let m = naive_direct(q, values, &z);
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn random_values(r: &mut ChaCha8Rng, len: usize, amplitude: f64) -> Vec<f64> {
    (0..len).map(|_| r.random_range(-amplitude..=amplitude)).collect()
}

pub fn random_potential(q: &[usize], seed: u64) -> Potential {
    let mut r = rng(seed);
    let len = q.iter().product();
    Potential::new(lattice(q), random_values(&mut r, len, 1.0)).unwrap()
}

/// `V(n) = Σ_b V_b(n restricted to block b)` with independent random blocks.
pub struct SeparableSample {
    pub potential: Potential,
    pub components: Vec<(Vec<usize>, Vec<f64>)>,
}

pub fn random_separable(q: &[usize], parts: &[usize], seed: u64) -> SeparableSample {
    let mut r = rng(seed);
    let mut components = Vec::new();
    let mut start = 0;
    for &len in parts {
        let bq = q[start..start + len].to_vec();
        let size = bq.iter().product();
        components.push((bq, random_values(&mut r, size, 1.0)));
        start += len;
    }
    let size: usize = q.iter().product();
    let values = (0..size)
        .map(|p| {
            let n = unflat(q, p);
            let mut start = 0;
            components
                .iter()
                .map(|(bq, vals)| {
                    let v = vals[flat(bq, &n[start..start + bq.len()])];
                    start += bq.len();
                    v
                })
                .sum()
        })
        .collect();
    SeparableSample {
        potential: Potential::new(lattice(q), values).unwrap(),
        components,
    }
}

pub fn random_torus_point(r: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    (0..d)
        .map(|_| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r.random::<f64>()))
        .collect()
}
