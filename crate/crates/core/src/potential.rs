//! Periodic potentials on the fundamental domain, their discrete Fourier
//! coefficients, and separable decompositions.

use std::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft::fft_nd;
use crate::lattice::{Lattice, MultiIndex};

/// Default imaginary-residue tolerance accepted by [`FourierCoeffs::idft`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// A real `Γ`-periodic potential, stored as its values on the fundamental
/// domain in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    lattice: Lattice,
    values: Vec<f64>,
}

/// Discrete Fourier coefficients `V^(l)`, `l ∈ W`, with the `1/Q` normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    lattice: Lattice,
    coeffs: Vec<Complex64>,
}

/// A split `d = d_1 + … + d_r` of the coordinates into consecutive blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    parts: Vec<usize>,
}

/// Outcome of a separability test.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityCheck {
    pub separable: bool,
    /// Mixed frequencies whose coefficient exceeds the tolerance, with magnitudes.
    pub violators: Vec<(MultiIndex, f64)>,
}

impl Potential {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.cell_size() {
            return Err(Error::LengthMismatch {
                expected: lattice.cell_size(),
                got: values.len(),
            });
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(p));
        }
        Ok(Self { lattice, values })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self::constant(lattice, 0.0)
    }

    pub fn constant(lattice: Lattice, c: f64) -> Self {
        let values = vec![c; lattice.cell_size()];
        Self { lattice, values }
    }

    /// `height` at the origin, zero elsewhere.
    pub fn delta(lattice: Lattice, height: f64) -> Self {
        let mut v = Self::zeros(lattice);
        v.values[0] = height;
        v
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(&[i64]) -> f64) -> Result<Self> {
        let values = lattice.enumerate_domain().iter().map(|n| f(n)).collect();
        Self::new(lattice, values)
    }

    /// Entries drawn uniformly from `[−amplitude, amplitude]`.
    pub fn random(lattice: Lattice, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..lattice.cell_size())
            .map(|_| rng.random_range(-amplitude..=amplitude))
            .collect();
        Self { lattice, values }
    }

    /// Random `p`-separable potential: independent random components on each
    /// block, combined.
    pub fn random_separable(lattice: Lattice, p: &Partition, amplitude: f64, seed: u64) -> Result<Self> {
        p.check_dim(lattice.dim())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let components = p
            .blocks()
            .map(|r| {
                let sub = lattice.block(r)?;
                Ok(Self::random(sub, amplitude, rng.random()))
            })
            .collect::<Result<Vec<_>>>()?;
        combine_separable(&components, &lattice)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `V(n)` with periodic extension.
    pub fn value(&self, n: &[i64]) -> f64 {
        self.values[self.lattice.position(n)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `[V] = (1/Q) Σ_{n∈W} V(n)`.
    pub fn average(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.lattice.cell_size() as f64
    }

    pub fn dft(&self) -> FourierCoeffs {
        let q = self.lattice.cell_size() as f64;
        let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, self.lattice.periods(), FftDirection::Forward);
        for c in &mut buf {
            *c /= q;
        }
        FourierCoeffs {
            lattice: self.lattice.clone(),
            coeffs: buf,
        }
    }

    /// `n ↦ V(n + m)`.
    pub fn translate(&self, m: &[i64]) -> Self {
        let lattice = &self.lattice;
        let shift = lattice.position(m);
        let values = (0..lattice.cell_size())
            .map(|p| self.values[lattice.add_positions(p, shift, 1)])
            .collect();
        Self {
            lattice: lattice.clone(),
            values,
        }
    }

    /// `n ↦ V(−n)`.
    pub fn reflect(&self) -> Self {
        let lattice = &self.lattice;
        let values = (0..lattice.cell_size())
            .map(|p| self.values[lattice.add_positions(0, p, -1)])
            .collect();
        Self {
            lattice: lattice.clone(),
            values,
        }
    }

    /// `V + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            lattice: self.lattice.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// `s · V`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            lattice: self.lattice.clone(),
            values: self.values.iter().map(|v| s * v + 0.0).collect(),
        }
    }

    pub fn is_separable(&self, p: &Partition, tol: f64) -> Result<SeparabilityCheck> {
        self.dft().separability(p, tol)
    }

    /// Lower-dimensional components `V_j` with `⊕_j V_j = V`, each with mean `[V]/r`.
    pub fn separate(&self, p: &Partition, tol: f64) -> Result<Vec<Potential>> {
        let coeffs = self.dft();
        let check = coeffs.separability(p, tol)?;
        if let Some((index, magnitude)) = check
            .violators
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .cloned()
        {
            return Err(Error::NotSeparable {
                index,
                magnitude,
                tol,
            });
        }

        let lattice = &self.lattice;
        let mean_share = Complex64::new(self.average() / p.len() as f64, 0.0);
        p.blocks()
            .map(|range| {
                let sub = lattice.block(range.clone())?;
                let mut full = vec![0i64; lattice.dim()];
                let block_coeffs = sub
                    .enumerate_domain()
                    .iter()
                    .map(|lt| {
                        if lt.iter().all(|&x| x == 0) {
                            return mean_share;
                        }
                        full[range.clone()].copy_from_slice(lt);
                        coeffs.get(&full)
                    })
                    .collect();
                FourierCoeffs::new(sub, block_coeffs)?.idft(HERMITIAN_TOL.max(tol))
            })
            .collect()
    }
}

/// `V(n) = Σ_j V_j(ñ_j)` where `ñ_j` are consecutive coordinate blocks.
pub fn combine_separable(components: &[Potential], lattice: &Lattice) -> Result<Potential> {
    let concatenated: Vec<usize> = components
        .iter()
        .flat_map(|c| c.lattice.periods().iter().copied())
        .collect();
    if concatenated != lattice.periods() {
        return Err(Error::ShapeMismatch(format!(
            "component periods {concatenated:?} do not concatenate to {:?}",
            lattice.periods()
        )));
    }
    let mut offsets = Vec::with_capacity(components.len());
    let mut start = 0;
    for c in components {
        offsets.push(start..start + c.lattice.dim());
        start += c.lattice.dim();
    }
    Potential::from_fn(lattice.clone(), |n| {
        components
            .iter()
            .zip(&offsets)
            .map(|(c, r)| c.value(&n[r.clone()]))
            .sum()
    })
}

impl FourierCoeffs {
    pub fn new(lattice: Lattice, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.cell_size() {
            return Err(Error::LengthMismatch {
                expected: lattice.cell_size(),
                got: coeffs.len(),
            });
        }
        Ok(Self { lattice, coeffs })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `V^(l)` with periodic extension in `l`.
    pub fn get(&self, l: &[i64]) -> Complex64 {
        self.coeffs[self.lattice.position(l)]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|V^(−l) − conj V^(l)|`; zero for coefficients of a real potential.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|p| {
                let mirror = self.lattice.add_positions(0, p, -1);
                (self.coeffs[mirror] - self.coeffs[p].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Inverse transform `V(n) = Σ_l V^(l) e^{2πi Σ l_j n_j / q_j}`.
    pub fn idft(&self, tau_herm: f64) -> Result<Potential> {
        let mut buf = self.coeffs.clone();
        fft_nd(&mut buf, self.lattice.periods(), FftDirection::Inverse);
        let residue = buf.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        if residue > tau_herm {
            return Err(Error::HermitianSymmetryViolation {
                residue,
                tol: tau_herm,
            });
        }
        Potential::new(self.lattice.clone(), buf.iter().map(|c| c.re).collect())
    }

    /// Default separability tolerance `1e-9 · (1 + max |V^|)`.
    pub fn default_tol(&self) -> f64 {
        1e-9 * (1.0 + self.max_abs())
    }

    pub fn separability(&self, p: &Partition, tol: f64) -> Result<SeparabilityCheck> {
        p.check_dim(self.lattice.dim())?;
        let blocks: Vec<Range<usize>> = p.blocks().collect();
        let violators: Vec<(MultiIndex, f64)> = self
            .lattice
            .enumerate_domain()
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(l, _)| {
                blocks
                    .iter()
                    .filter(|r| l[(*r).clone()].iter().any(|&x| x != 0))
                    .count()
                    >= 2
            })
            .map(|(l, c)| (l, c.norm()))
            .filter(|(_, m)| *m > tol)
            .collect();
        Ok(SeparabilityCheck {
            separable: violators.is_empty(),
            violators,
        })
    }

    /// Largest `|V^(l)|` over frequencies with a nonzero component at an axis `≥ prefix`.
    pub fn mass_outside_prefix(&self, prefix: usize) -> f64 {
        self.lattice
            .enumerate_domain()
            .iter()
            .zip(&self.coeffs)
            .filter(|(l, _)| l[prefix..].iter().any(|&x| x != 0))
            .fold(0.0, |m, (_, c)| m.max(c.norm()))
    }
}

impl Partition {
    pub fn new(parts: Vec<usize>, dim: usize) -> Result<Self> {
        let p = Self { parts };
        p.check_dim(dim)?;
        Ok(p)
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of blocks `r`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Axis ranges of the blocks, in order.
    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.parts.iter().scan(0, |start, &d| {
            let r = *start..*start + d;
            *start += d;
            Some(r)
        })
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        let ok = self.parts.len() >= 2
            && self.parts.iter().all(|&d| d >= 1)
            && self.parts.iter().sum::<usize>() == dim;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPartition {
                parts: self.parts.clone(),
                dim,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lat(q: &[usize]) -> Lattice {
        Lattice::new(q.to_vec()).unwrap()
    }

    /// Direct O(Q²) evaluation of the transform.
    fn naive_dft(v: &Potential) -> Vec<Complex64> {
        let l = v.lattice();
        let dom = l.enumerate_domain();
        dom.iter()
            .map(|k| {
                dom.iter()
                    .map(|n| {
                        let phase: f64 = (0..l.dim())
                            .map(|j| (k[j] * n[j]) as f64 / l.periods()[j] as f64)
                            .sum();
                        v.value(n) * Complex64::from_polar(1.0, -2.0 * PI * phase)
                    })
                    .sum::<Complex64>()
                    / l.cell_size() as f64
            })
            .collect()
    }

    #[test]
    fn dft_examples() {
        let q = lat(&[2, 3]);
        let c = Potential::constant(q.clone(), 2.5).dft();
        assert!((c.get(&[0, 0]) - 2.5).norm() < 1e-15);
        assert!(c.coeffs()[1..].iter().all(|x| x.norm() < 1e-15));

        let d = Potential::delta(q.clone(), 1.0).dft();
        assert!(d.coeffs().iter().all(|x| (x - 1.0 / 6.0).norm() < 1e-15));

        let alt = Potential::from_fn(q.clone(), |n| if n[0] % 2 == 0 { 1.0 } else { -1.0 }).unwrap();
        let f = alt.dft();
        for (l, c) in q.enumerate_domain().iter().zip(f.coeffs()) {
            let want = if l == &vec![1, 0] { 1.0 } else { 0.0 };
            assert!((c - want).norm() < 1e-15, "{l:?}: {c}");
        }
    }

    #[test]
    fn dft_matches_direct_sum() {
        let v = Potential::random(lat(&[2, 3, 5]), 1.0, 11);
        for (a, b) in v.dft().coeffs().iter().zip(naive_dft(&v)) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn idft_examples_and_errors() {
        let q = lat(&[2, 3]);
        let zero = FourierCoeffs::new(q.clone(), vec![Complex64::default(); 6]).unwrap();
        assert_eq!(zero.idft(HERMITIAN_TOL).unwrap(), Potential::zeros(q.clone()));

        let mut c = vec![Complex64::default(); 6];
        c[0] = Complex64::new(4.0, 0.0);
        let v = FourierCoeffs::new(q.clone(), c.clone()).unwrap().idft(HERMITIAN_TOL).unwrap();
        assert!(v.values().iter().all(|x| (x - 4.0).abs() < 1e-15));

        c[1] = Complex64::new(0.0, 1.0);
        let bad = FourierCoeffs::new(q, c).unwrap();
        assert!(bad.hermitian_defect() > 0.5);
        assert!(matches!(bad.idft(HERMITIAN_TOL), Err(Error::HermitianSymmetryViolation { .. })));
    }

    #[test]
    fn round_trip_random() {
        for seed in 0..100 {
            let v = Potential::random(lat(&[2, 3, 5]), 1.0, seed);
            let back = v.dft().idft(HERMITIAN_TOL).unwrap();
            for (a, b) in v.values().iter().zip(back.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn averages() {
        let q = lat(&[2, 3]);
        assert_eq!(Potential::constant(q.clone(), 3.0).average(), 3.0);
        assert!((Potential::delta(q.clone(), 1.0).average() - 1.0 / 6.0).abs() < 1e-16);
        let alt = Potential::from_fn(q, |n| if n[0] == 0 { 1.0 } else { -1.0 }).unwrap();
        assert_eq!(alt.average(), 0.0);
    }

    #[test]
    fn separability_detection() {
        let q = lat(&[2, 3, 5]);
        let p = Partition::new(vec![1, 2], 3).unwrap();
        let sep = Potential::from_fn(q.clone(), |n| {
            [0.3, -1.2][n[0] as usize] + (n[1] as f64 * 0.7).sin() * (n[2] as f64).cos()
        })
        .unwrap();
        let check = sep.is_separable(&p, 1e-12).unwrap();
        assert!(check.separable && check.violators.is_empty());

        let prod = Potential::from_fn(q.clone(), |n| {
            let s = if n[0] == 0 { 1.0 } else { -1.0 };
            s * (2.0 * PI * n[1] as f64 / 3.0).cos()
        })
        .unwrap();
        let check = prod.is_separable(&p, 1e-12).unwrap();
        assert!(!check.separable);
        let idx: Vec<&MultiIndex> = check.violators.iter().map(|(l, _)| l).collect();
        assert!(idx.contains(&&vec![1, 1, 0]) && idx.contains(&&vec![1, 2, 0]));

        let zero = Potential::zeros(q);
        assert!(zero.is_separable(&p, 1e-12).unwrap().violators.is_empty());
    }

    #[test]
    fn separate_examples() {
        let q = lat(&[2, 3]);
        let p = Partition::new(vec![1, 1], 2).unwrap();
        let a = [1.0, 3.0];
        let b = [0.5, -2.0, 4.0];
        let v = Potential::from_fn(q.clone(), |n| a[n[0] as usize] + b[n[1] as usize]).unwrap();
        let parts = v.separate(&p, 1e-12).unwrap();
        assert_eq!(parts.len(), 2);
        for part in &parts {
            assert!((part.average() - v.average() / 2.0).abs() < 1e-14);
        }
        let back = combine_separable(&parts, &q).unwrap();
        for (x, y) in back.values().iter().zip(v.values()) {
            assert!((x - y).abs() < 1e-14);
        }
        // Components differ from a, b only by the mean split.
        let shift = parts[0].value(&[0]) - a[0];
        assert!((parts[0].value(&[1]) - a[1] - shift).abs() < 1e-14);

        let zero = Potential::zeros(q).separate(&p, 1e-12).unwrap();
        assert!(zero.iter().all(|z| z.values().iter().all(|x| x.abs() < 1e-15)));

        let six = Potential::constant(lat(&[2, 3, 5]), 6.0);
        let parts = six.separate(&Partition::new(vec![1, 2], 3).unwrap(), 1e-12).unwrap();
        assert_eq!(parts[0].lattice().periods(), &[2]);
        assert_eq!(parts[1].lattice().periods(), &[3, 5]);
        for part in parts {
            assert!(part.values().iter().all(|x| (x - 3.0).abs() < 1e-14));
        }
    }

    #[test]
    fn separate_rejects_mixed() {
        let q = lat(&[2, 3]);
        let v = Potential::delta(q, 1.0);
        let p = Partition::new(vec![1, 1], 2).unwrap();
        assert!(matches!(v.separate(&p, 1e-12), Err(Error::NotSeparable { .. })));
    }

    #[test]
    fn combine_examples() {
        let a = Potential::new(lat(&[2]), vec![0.0, 2.0]).unwrap();
        let b = Potential::new(lat(&[3]), vec![0.0, 0.0, 3.0]).unwrap();
        let v = combine_separable(&[a.clone(), b.clone()], &lat(&[2, 3])).unwrap();
        assert_eq!(v.values(), &[0.0, 0.0, 3.0, 2.0, 2.0, 5.0]);
        let z = combine_separable(
            &[Potential::zeros(lat(&[2])), Potential::zeros(lat(&[3]))],
            &lat(&[2, 3]),
        )
        .unwrap();
        assert_eq!(z, Potential::zeros(lat(&[2, 3])));
        assert!(matches!(
            combine_separable(&[b, a], &lat(&[2, 3])),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn partitions_validate() {
        assert!(Partition::new(vec![3], 3).is_err());
        assert!(Partition::new(vec![1, 1], 3).is_err());
        assert!(Partition::new(vec![0, 3], 3).is_err());
        let p = Partition::new(vec![1, 2], 3).unwrap();
        assert_eq!(p.blocks().collect::<Vec<_>>(), vec![0..1, 1..3]);
    }

    #[test]
    fn congruences() {
        let q = lat(&[3]);
        let v = Potential::new(q.clone(), vec![1.0, 2.0, 5.0]).unwrap();
        assert_eq!(v.translate(&[1]).values(), &[2.0, 5.0, 1.0]);
        assert_eq!(v.translate(&[0]), v);
        assert_eq!(v.reflect().values(), &[1.0, 5.0, 2.0]);
        assert_eq!(v.reflect().reflect(), v);
    }
}
