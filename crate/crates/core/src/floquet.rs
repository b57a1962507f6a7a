//! Floquet matrices of `Δ + V` with twisted boundary conditions
//! `u(n + q_j e_j) = z_j u(n)`, their spectra on the real torus, and
//! pointwise values of the characteristic polynomial.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{hermitian_eigenvalues, lu_determinant};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Values on the fundamental domain.
    Direct,
    /// Discrete Fourier modes; the matrix is `A + B_V` at the `q`-th roots of `z`.
    Fourier,
}

/// A `Q × Q` Floquet matrix, row-major in the canonical basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMatrix {
    pub lattice: Lattice,
    pub basis: Basis,
    pub z: Vec<Complex64>,
    pub entries: Vec<Complex64>,
}

/// Sorted eigenvalues of `D_V(k)` at a real quasi-momentum `k` (in cycles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub k: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

impl FloquetMatrix {
    pub fn size(&self) -> usize {
        self.lattice.cell_size()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.size() + col]
    }

    /// `max |M − M*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.size();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `det(M − λI)` by pivoted LU.
    pub fn char_poly_value(&self, lambda: Complex64) -> Complex64 {
        let n = self.size();
        let mut a = self.entries.clone();
        for i in 0..n {
            a[i * n + i] -= lambda;
        }
        lu_determinant(&mut a, n)
    }
}

#[derive(Debug, Clone, Copy)]
enum Hop {
    One,
    Z(usize),
    ZInv(usize),
    /// Both neighbors wrap onto the same site (period one).
    ZSum(usize),
}

/// Sparsity pattern of the direct-basis matrix, reusable across evaluation points.
#[derive(Debug, Clone)]
pub(crate) struct DirectStencil {
    size: usize,
    diagonal: Vec<f64>,
    hops: Vec<(usize, usize, Hop)>,
}

impl DirectStencil {
    pub(crate) fn new(v: &Potential) -> Self {
        let lattice = v.lattice();
        let size = lattice.cell_size();
        let mut hops = Vec::with_capacity(2 * lattice.dim() * size);
        for (p, n) in lattice.enumerate_domain().iter().enumerate() {
            for (j, &q) in lattice.periods().iter().enumerate() {
                if q == 1 {
                    hops.push((p, p, Hop::ZSum(j)));
                    continue;
                }
                let mut up = n.clone();
                up[j] += 1;
                let forward = if n[j] == q as i64 - 1 { Hop::Z(j) } else { Hop::One };
                hops.push((p, lattice.position(&up), forward));

                let mut down = n.clone();
                down[j] -= 1;
                let backward = if n[j] == 0 { Hop::ZInv(j) } else { Hop::One };
                hops.push((p, lattice.position(&down), backward));
            }
        }
        Self {
            size,
            diagonal: v.values().to_vec(),
            hops,
        }
    }

    /// Writes `D_V(z) − λI` into `buf`.
    pub(crate) fn fill(&self, z: &[Complex64], z_inv: &[Complex64], lambda: Complex64, buf: &mut Vec<Complex64>) {
        let n = self.size;
        buf.clear();
        buf.resize(n * n, Complex64::default());
        for (i, &v) in self.diagonal.iter().enumerate() {
            buf[i * n + i] = Complex64::new(v, 0.0) - lambda;
        }
        for &(r, c, hop) in &self.hops {
            buf[r * n + c] += match hop {
                Hop::One => Complex64::new(1.0, 0.0),
                Hop::Z(j) => z[j],
                Hop::ZInv(j) => z_inv[j],
                Hop::ZSum(j) => z[j] + z_inv[j],
            };
        }
    }

    pub(crate) fn size(&self) -> usize {
        self.size
    }
}

fn check_point(lattice: &Lattice, z: &[Complex64]) -> Result<Vec<Complex64>> {
    if z.len() != lattice.dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dim(),
            got: z.len(),
        });
    }
    z.iter()
        .enumerate()
        .map(|(j, zj)| {
            if *zj == Complex64::new(0.0, 0.0) {
                Err(Error::ZeroComponent(j))
            } else {
                Ok(zj.inv())
            }
        })
        .collect()
}

/// `z_j = e^{2πi k_j}`.
pub fn phases(k: &[f64]) -> Vec<Complex64> {
    k.iter().map(|&kj| Complex64::from_polar(1.0, 2.0 * PI * kj)).collect()
}

/// Floquet matrix `𝒟_V(z)` on the fundamental domain.
pub fn build_direct(v: &Potential, z: &[Complex64]) -> Result<FloquetMatrix> {
    let z_inv = check_point(v.lattice(), z)?;
    let mut entries = Vec::new();
    DirectStencil::new(v).fill(z, &z_inv, Complex64::default(), &mut entries);
    Ok(FloquetMatrix {
        lattice: v.lattice().clone(),
        basis: Basis::Direct,
        z: z.to_vec(),
        entries,
    })
}

/// `A + B_V`, unitarily equivalent to `𝒟_V(z_1^{q_1}, …, z_d^{q_d})`.
pub fn build_fourier(v: &Potential, z: &[Complex64]) -> Result<FloquetMatrix> {
    let lattice = v.lattice();
    check_point(lattice, z)?;
    let size = lattice.cell_size();
    let coeffs = v.dft();
    let mut entries = vec![Complex64::default(); size * size];
    for row in 0..size {
        for col in 0..size {
            entries[row * size + col] = coeffs.coeffs()[lattice.add_positions(row, col, -1)];
        }
    }
    for (p, n) in lattice.enumerate_domain().iter().enumerate() {
        let diag: Complex64 = n
            .iter()
            .zip(lattice.periods())
            .zip(z)
            .map(|((&nj, &q), &zj)| {
                let w = Complex64::from_polar(1.0, 2.0 * PI * nj as f64 / q as f64) * zj;
                w + w.inv()
            })
            .sum();
        entries[p * size + p] += diag;
    }
    Ok(FloquetMatrix {
        lattice: lattice.clone(),
        basis: Basis::Fourier,
        z: z.to_vec(),
        entries,
    })
}

/// `det(𝒟_V(z) − λI)`.
pub fn char_poly_value(v: &Potential, z: &[Complex64], lambda: Complex64) -> Result<Complex64> {
    let z_inv = check_point(v.lattice(), z)?;
    let stencil = DirectStencil::new(v);
    let mut buf = Vec::new();
    stencil.fill(z, &z_inv, lambda, &mut buf);
    Ok(lu_determinant(&mut buf, stencil.size()))
}

pub fn spectrum_at(v: &Potential, k: &[f64]) -> Result<SpectrumSample> {
    spectrum_with(&DirectStencil::new(v), v.lattice(), k)
}

fn spectrum_with(stencil: &DirectStencil, lattice: &Lattice, k: &[f64]) -> Result<SpectrumSample> {
    let z = phases(k);
    let z_inv = check_point(lattice, &z)?;
    let mut buf = Vec::new();
    stencil.fill(&z, &z_inv, Complex64::default(), &mut buf);
    let eigenvalues =
        hermitian_eigenvalues(&buf, stencil.size()).ok_or_else(|| Error::EigensolverFailure(k.to_vec()))?;
    Ok(SpectrumSample {
        k: k.to_vec(),
        eigenvalues,
    })
}

/// [`spectrum_at`] along a path, in path order.
pub fn band_structure(v: &Potential, kpath: &[Vec<f64>]) -> Result<Vec<SpectrumSample>> {
    let stencil = DirectStencil::new(v);
    kpath
        .par_iter()
        .map(|k| spectrum_with(&stencil, v.lattice(), k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(q: &[usize]) -> Lattice {
        Lattice::new(q.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn three_site_ring_determinant() {
        // det(M − λ) = −λ³ + 3λ + z + 1/z
        let v = Potential::zeros(lat(&[3]));
        for (z, lambda) in [(c(2.0, 0.5), c(0.3, -0.1)), (c(-0.7, 1.1), c(1.5, 0.0)), (c(1.0, 0.0), c(0.0, 0.0))] {
            let want = -lambda.powu(3) + 3.0 * lambda + z + z.inv();
            let got = char_poly_value(&v, &[z], lambda).unwrap();
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
        assert!((char_poly_value(&v, &[c(1.0, 0.0)], c(0.0, 0.0)).unwrap() - 2.0).norm() < 1e-14);
    }

    #[test]
    fn single_site_cell() {
        let v = Potential::constant(lat(&[1, 1, 1]), 0.4);
        let z = [c(2.0, 0.0), c(0.0, 1.0), c(-1.0, 1.0)];
        let m = build_direct(&v, &z).unwrap();
        let want: Complex64 = c(0.4, 0.0) + z.iter().map(|zj| zj + zj.inv()).sum::<Complex64>();
        assert!((m.get(0, 0) - want).norm() < 1e-15);

        let zero = Potential::zeros(lat(&[1, 1, 1]));
        let ones = [c(1.0, 0.0); 3];
        assert!(char_poly_value(&zero, &ones, c(6.0, 0.0)).unwrap().norm() < 1e-14);

        let s = spectrum_at(&v, &[0.1, 0.25, 0.7]).unwrap();
        let want = 0.4 + 2.0 * ((0.2 * PI).cos() + (0.5 * PI).cos() + (1.4 * PI).cos());
        assert!((s.eigenvalues[0] - want).abs() < 1e-14);
    }

    #[test]
    fn constant_shift_is_diagonal() {
        let z = [c(0.3, 0.8), c(1.2, -0.4)];
        let a = build_direct(&Potential::zeros(lat(&[2, 3])), &z).unwrap();
        let b = build_direct(&Potential::constant(lat(&[2, 3]), 1.75), &z).unwrap();
        for r in 0..6 {
            for col in 0..6 {
                let d = b.get(r, col) - a.get(r, col);
                let want = if r == col { 1.75 } else { 0.0 };
                assert_eq!(d, c(want, 0.0));
            }
        }
    }

    #[test]
    fn rejects_zero_component() {
        let v = Potential::zeros(lat(&[2, 3]));
        assert_eq!(build_direct(&v, &[c(1.0, 0.0), c(0.0, 0.0)]), Err(Error::ZeroComponent(1)));
        assert_eq!(build_fourier(&v, &[c(0.0, 0.0), c(1.0, 0.0)]), Err(Error::ZeroComponent(0)));
        assert!(matches!(
            char_poly_value(&v, &[c(1.0, 0.0)], c(0.0, 0.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn two_site_fourier_matrix() {
        let (v0, v1) = (0.9, -0.4);
        let v = Potential::new(lat(&[2]), vec![v0, v1]).unwrap();
        let z = c(0.6, 0.9);
        let m = build_fourier(&v, &[z]).unwrap();
        let mean = (v0 + v1) / 2.0;
        let off = (v0 - v1) / 2.0;
        let s = z + z.inv();
        assert!((m.get(0, 0) - (s + mean)).norm() < 1e-15);
        assert!((m.get(1, 1) - (-s + mean)).norm() < 1e-15);
        assert!((m.get(0, 1) - off).norm() < 1e-15 && (m.get(1, 0) - off).norm() < 1e-15);

        let lambda = c(0.2, 0.3);
        let want = -s * s + (mean - lambda) * (mean - lambda) - off * off;
        assert!((m.char_poly_value(lambda) - want).norm() < 1e-13);
        let direct = char_poly_value(&v, &[z * z], lambda).unwrap();
        assert!((direct - want).norm() < 1e-13);
    }

    #[test]
    fn zero_potential_fourier_is_diagonal() {
        let v = Potential::zeros(lat(&[2, 3]));
        let z = [c(0.4, 0.2), c(-1.0, 0.5)];
        let m = build_fourier(&v, &z).unwrap();
        for (p, n) in v.lattice().enumerate_domain().iter().enumerate() {
            for col in 0..6 {
                if col != p {
                    assert_eq!(m.get(p, col), c(0.0, 0.0));
                }
            }
            let w1 = Complex64::from_polar(1.0, PI * n[0] as f64) * z[0];
            let w2 = Complex64::from_polar(1.0, 2.0 * PI * n[1] as f64 / 3.0) * z[1];
            assert!((m.get(p, p) - (w1 + w1.inv() + w2 + w2.inv())).norm() < 1e-14);
        }
    }

    #[test]
    fn free_spectrum_at_origin() {
        let s = spectrum_at(&Potential::zeros(lat(&[2, 3])), &[0.0, 0.0]).unwrap();
        let want = [-3.0, -3.0, 0.0, 1.0, 1.0, 4.0];
        for (a, b) in s.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{:?}", s.eigenvalues);
        }
        let shifted = spectrum_at(&Potential::constant(lat(&[2, 3]), 0.5), &[0.0, 0.0]).unwrap();
        for (a, b) in shifted.eigenvalues.iter().zip(&s.eigenvalues) {
            assert!((a - b - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn band_structure_shapes() {
        let v = Potential::zeros(lat(&[2, 3]));
        assert!(band_structure(&v, &[]).unwrap().is_empty());
        let one = band_structure(&v, &[vec![0.1, 0.2]]).unwrap();
        assert_eq!(one[0], spectrum_at(&v, &[0.1, 0.2]).unwrap());
        let path: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 / 8.0, 0.0]).collect();
        let bands = band_structure(&v, &path).unwrap();
        assert_eq!(bands.len(), 5);
        assert!(bands.iter().all(|s| s.eigenvalues.len() == 6));
        assert_eq!(bands[3].k, path[3]);
    }
}
