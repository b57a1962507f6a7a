//! Sparse multivariate Laurent polynomials and recovery of the Fermi
//! polynomial `z ↦ det(𝒟_V(z) − λ₀I)` by evaluation on roots-of-unity grids
//! followed by an inverse multidimensional DFT.
//!
//! The determinant is a Laurent polynomial whose degree in `z_j` is at most
//! `b_j = Q/q_j`: each of the `Q/q_j` rows on the face `n_j = q_j − 1`
//! carries one factor `z_j`, and each row on `n_j = 0` one factor `z_j^{−1}`.
//! Sampling on `2b_j + 1` roots of unity per axis is therefore alias-free.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft::fft_nd;
use crate::floquet::{char_poly_value, DirectStencil};
use crate::lattice::{Lattice, MultiIndex};
use crate::linalg::{lu_determinant, Tridiagonal};
use crate::potential::Potential;

/// Relative pruning level: coefficients below `PRUNE_REL · (1 + max |grid value|)` are dropped.
pub const PRUNE_REL: f64 = 1e-9;

/// Sparse Laurent polynomial in `d` variables with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    dims: usize,
    bounds: Vec<i64>,
    terms: BTreeMap<MultiIndex, Complex64>,
    threshold: f64,
    pruned_mass: f64,
}

impl LaurentPoly {
    /// Empty polynomial with per-variable exponent bounds.
    pub fn zero(bounds: Vec<i64>) -> Self {
        Self {
            dims: bounds.len(),
            bounds,
            terms: BTreeMap::new(),
            threshold: 0.0,
            pruned_mass: 0.0,
        }
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed and exact zeros dropped.
    pub fn from_terms(bounds: Vec<i64>, terms: impl IntoIterator<Item = (MultiIndex, Complex64)>) -> Result<Self> {
        let mut p = Self::zero(bounds);
        for (exp, c) in terms {
            if exp.len() != p.dims {
                return Err(Error::DimensionMismatch {
                    expected: p.dims,
                    got: exp.len(),
                });
            }
            if let Some(j) = exp.iter().zip(&p.bounds).position(|(a, b)| a.abs() > *b) {
                return Err(Error::ShapeMismatch(format!(
                    "exponent {exp:?} exceeds bound {} on axis {j}",
                    p.bounds[j]
                )));
            }
            *p.terms.entry(exp).or_default() += c;
        }
        p.terms.retain(|_, c| *c != Complex64::default());
        Ok(p)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn bounds(&self) -> &[i64] {
        &self.bounds
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[i64]) -> Complex64 {
        self.terms.get(exp).copied().unwrap_or_default()
    }

    /// Magnitude below which coefficients were pruned (zero if never pruned).
    pub fn prune_threshold(&self) -> f64 {
        self.threshold
    }

    /// Sum of the magnitudes of the pruned coefficients, which bounds the
    /// change pruning makes to values on the unit torus.
    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest imaginary part of any coefficient. For real potentials and
    /// real energies the exact coefficients are real, so this is a round-off
    /// estimate.
    pub fn max_imag(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                got: z.len(),
            });
        }
        if let Some(j) = z.iter().position(|zj| *zj == Complex64::default()) {
            return Err(Error::ZeroComponent(j));
        }
        Ok(self
            .terms
            .iter()
            .map(|(exp, c)| {
                exp.iter()
                    .zip(z)
                    .fold(*c, |acc, (&a, zj)| acc * zj.powi(a as i32))
            })
            .sum())
    }

    /// Coefficients of the pure powers `z_j^{+b_j}` and `z_j^{−b_j}` for every axis.
    pub fn leading_terms(&self) -> Result<Vec<(Complex64, Complex64)>> {
        (0..self.dims)
            .map(|axis| {
                let fetch = |sign: i64| {
                    let mut exp = vec![0i64; self.dims];
                    exp[axis] = sign * self.bounds[axis];
                    self.terms.get(&exp).copied().ok_or(Error::MissingLeadingTerm {
                        axis: axis + 1,
                        exponent: exp[axis],
                    })
                };
                Ok((fetch(1)?, fetch(-1)?))
            })
            .collect()
    }
}

/// Result of comparing two polynomials coefficientwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyComparison {
    pub equal: bool,
    /// `max |a_e − b_e| / (1 + max coefficient magnitude of either)`.
    pub max_deviation: f64,
    /// Largest absolute coefficient difference.
    pub max_abs_difference: f64,
    pub worst_exponent: Option<MultiIndex>,
    /// Up to `limit` largest discrepancies `(exponent, lhs, rhs)`, worst first.
    pub worst: Vec<(MultiIndex, Complex64, Complex64)>,
}

pub fn poly_equal(p: &LaurentPoly, q: &LaurentPoly, tol: f64) -> Result<PolyComparison> {
    if p.dims != q.dims {
        return Err(Error::DimensionMismatch {
            expected: p.dims,
            got: q.dims,
        });
    }
    let scale = 1.0 + p.max_abs_coeff().max(q.max_abs_coeff());
    let mut diffs: Vec<(MultiIndex, Complex64, Complex64, f64)> = p
        .terms
        .keys()
        .chain(q.terms.keys().filter(|e| !p.terms.contains_key(*e)))
        .map(|e| {
            let (a, b) = (p.coeff(e), q.coeff(e));
            (e.clone(), a, b, (a - b).norm())
        })
        .filter(|d| d.3 > 0.0)
        .collect();
    diffs.sort_by(|x, y| y.3.total_cmp(&x.3).then_with(|| x.0.cmp(&y.0)));
    let max_abs = diffs.first().map_or(0.0, |d| d.3);
    let max_deviation = max_abs / scale;
    Ok(PolyComparison {
        equal: max_deviation <= tol,
        max_deviation,
        max_abs_difference: max_abs,
        worst_exponent: diffs.first().map(|d| d.0.clone()),
        worst: diffs.into_iter().take(10).map(|(e, a, b, _)| (e, a, b)).collect(),
    })
}

/// Grid of `2b_j + 1 + extra` roots of unity per axis.
#[derive(Debug, Clone)]
pub struct UnityGrid {
    bounds: Vec<i64>,
    shape: Vec<usize>,
}

impl UnityGrid {
    pub fn new(bounds: Vec<i64>, oversample: usize) -> Self {
        let shape = bounds.iter().map(|&b| 2 * b as usize + 1 + oversample).collect();
        Self { bounds, shape }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point at row-major position `p`.
    pub fn point(&self, p: usize) -> Vec<Complex64> {
        let mut rest = p;
        let mut z = vec![Complex64::default(); self.shape.len()];
        for j in (0..self.shape.len()).rev() {
            let m = rest % self.shape[j];
            rest /= self.shape[j];
            z[j] = Complex64::from_polar(1.0, 2.0 * PI * m as f64 / self.shape[j] as f64);
        }
        z
    }

    /// Position of the conjugate point `−m`.
    fn mirror(&self, p: usize) -> usize {
        let mut rest = p;
        let mut out = 0;
        let mut stride = 1;
        for &n in self.shape.iter().rev() {
            let m = rest % n;
            rest /= n;
            out += ((n - m) % n) * stride;
            stride *= n;
        }
        out
    }

    /// Converts grid values into coefficients, pruning below `threshold`.
    ///
    /// Returns the polynomial and the largest coefficient magnitude that fell
    /// outside the exponent window (nonzero only when oversampling).
    pub fn interpolate(&self, mut values: Vec<Complex64>, threshold: f64) -> (LaurentPoly, f64) {
        assert_eq!(values.len(), self.len());
        fft_nd(&mut values, &self.shape, FftDirection::Forward);
        let norm = self.len() as f64;
        let mut poly = LaurentPoly::zero(self.bounds.clone());
        poly.threshold = threshold;
        let mut alias = 0.0f64;
        for (p, v) in values.into_iter().enumerate() {
            let c = v / norm;
            let mut rest = p;
            let mut exp = vec![0i64; self.shape.len()];
            let mut inside = true;
            for j in (0..self.shape.len()).rev() {
                let n = self.shape[j];
                let k = (rest % n) as i64;
                rest /= n;
                exp[j] = if k <= n as i64 / 2 { k } else { k - n as i64 };
                inside &= exp[j].abs() <= self.bounds[j];
            }
            if !inside {
                alias = alias.max(c.norm());
            } else if c.norm() >= threshold && c.norm() > 0.0 {
                poly.terms.insert(exp, c);
            } else {
                poly.pruned_mass += c.norm();
            }
        }
        (poly, alias)
    }
}

/// Knobs for [`fermi_poly_with`].
#[derive(Debug, Clone)]
pub struct FermiPolyOptions {
    /// Extra grid points per axis beyond the minimal `2b_j + 1`.
    pub oversample: usize,
    pub prune_rel: f64,
    /// Random unit-modulus points at which the result is checked against direct determinants.
    pub validation_points: usize,
    /// Accepted `(|eval − det| − pruned mass) / (1 + max |grid value|)` at validation points.
    pub validation_tol: f64,
    /// Accepted `|c − κ_j|` for the extremal coefficients.
    pub leading_tol: f64,
    pub seed: u64,
}

impl Default for FermiPolyOptions {
    fn default() -> Self {
        Self {
            oversample: 0,
            prune_rel: PRUNE_REL,
            validation_points: 4,
            validation_tol: 1e-8,
            leading_tol: 1e-6,
            seed: 0x5EED_F3E1,
        }
    }
}

/// Per-axis exponent bounds `b_j = Q/q_j`.
pub fn fermi_bounds(lattice: &Lattice) -> Vec<i64> {
    lattice
        .periods()
        .iter()
        .map(|&q| (lattice.cell_size() / q) as i64)
        .collect()
}

/// `κ_j = (−1)^{(q_j − 1) Q / q_j}`, the coefficient of `z_j^{±Q/q_j}`.
pub fn kappa(lattice: &Lattice) -> Vec<f64> {
    lattice
        .periods()
        .iter()
        .map(|&q| {
            let e = (q - 1) * (lattice.cell_size() / q);
            if e.is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// Coefficients of `𝒫_V(·, λ₀)` with default options.
pub fn fermi_poly(v: &Potential, lambda0: Complex64) -> Result<LaurentPoly> {
    fermi_poly_with(v, lambda0, &FermiPolyOptions::default())
}

pub fn fermi_poly_with(v: &Potential, lambda0: Complex64, opts: &FermiPolyOptions) -> Result<LaurentPoly> {
    let lattice = v.lattice();
    let grid = UnityGrid::new(fermi_bounds(lattice), opts.oversample);
    let stencil = DirectStencil::new(v);
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(buf, zinv), p| {
                let z = grid.point(p);
                zinv.clear();
                zinv.extend(z.iter().map(|zj| zj.inv()));
                stencil.fill(&z, zinv, lambda0, buf);
                lu_determinant(buf, stencil.size())
            },
        )
        .collect();
    let poly = finish(v, lambda0, &grid, values, opts)?;
    Ok(poly)
}

fn finish(
    v: &Potential,
    lambda0: Complex64,
    grid: &UnityGrid,
    values: Vec<Complex64>,
    opts: &FermiPolyOptions,
) -> Result<LaurentPoly> {
    let grid_max = values.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let threshold = opts.prune_rel * (1.0 + grid_max);
    let (poly, alias) = grid.interpolate(values, threshold);
    if alias > threshold {
        return Err(Error::InterpolationInconsistency(format!(
            "coefficient of magnitude {alias:e} outside the exponent window"
        )));
    }
    validate(v, lambda0, &poly, grid_max, opts)?;
    Ok(poly)
}

fn validate(v: &Potential, lambda0: Complex64, poly: &LaurentPoly, grid_max: f64, opts: &FermiPolyOptions) -> Result<()> {
    // When the pruning threshold exceeds the unit-size extremal coefficients they
    // cannot be resolved in double precision; the check then only bounds them.
    let tol = opts.leading_tol.max(poly.threshold);
    for (axis, k) in kappa(v.lattice()).into_iter().enumerate() {
        for sign in [1, -1] {
            let mut exp = vec![0i64; poly.dims];
            exp[axis] = sign * poly.bounds[axis];
            let c = poly.coeff(&exp);
            if (c - k).norm() > tol {
                return Err(Error::InterpolationInconsistency(format!(
                    "coefficient of z_{}^{} is {c}, expected {k}",
                    axis + 1,
                    exp[axis]
                )));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.validation_points {
        let z: Vec<Complex64> = (0..v.lattice().dim())
            .map(|_| Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>()))
            .collect();
        let direct = char_poly_value(v, &z, lambda0)?;
        let interp = poly.eval(&z)?;
        let dev = ((direct - interp).norm() - poly.pruned_mass).max(0.0) / (1.0 + grid_max);
        if dev > opts.validation_tol {
            return Err(Error::InterpolationInconsistency(format!(
                "interpolant deviates from the determinant by {dev:e} (relative) at z = {z:?}"
            )));
        }
    }
    Ok(())
}

/// Tridiagonal forms of `𝒟_V(z)` at every point of the minimal unity grid.
///
/// Grid points lie on the unit torus, where the Floquet matrix is Hermitian
/// and unitarily similar to a real tridiagonal matrix `T(z)`. One reduction
/// per point then yields `det(𝒟_V(z) − λI) = det(T(z) − λI)` for any number of
/// energies `λ`. For real `V` the matrices at `z` and `z̄` are conjugate and
/// share `T`, so only half the grid is reduced.
#[derive(Debug, Clone)]
pub struct CharPolyGrid {
    potential: Potential,
    grid: UnityGrid,
    forms: Vec<Tridiagonal>,
}

impl CharPolyGrid {
    pub fn new(v: &Potential) -> Self {
        let grid = UnityGrid::new(fermi_bounds(v.lattice()), 0);
        let stencil = DirectStencil::new(v);
        let reps: Vec<usize> = (0..grid.len()).filter(|&p| grid.mirror(p) >= p).collect();
        let reduced: Vec<(usize, Tridiagonal)> = reps
            .par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(buf, zinv), &p| {
                    let z = grid.point(p);
                    zinv.clear();
                    zinv.extend(z.iter().map(|zj| zj.inv()));
                    stencil.fill(&z, zinv, Complex64::default(), buf);
                    (p, Tridiagonal::from_hermitian(buf, stencil.size()))
                },
            )
            .collect();
        let mut forms = vec![None; grid.len()];
        for (p, t) in reduced {
            let m = grid.mirror(p);
            if m != p {
                forms[m] = Some(t.clone());
            }
            forms[p] = Some(t);
        }
        Self {
            potential: v.clone(),
            grid,
            forms: forms.into_iter().map(|t| t.expect("every grid point reduced")).collect(),
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// `𝒫_V(·, λ)` from the cached reductions, validated like [`fermi_poly`].
    pub fn fermi_poly(&self, lambda: Complex64, opts: &FermiPolyOptions) -> Result<LaurentPoly> {
        let values = self.forms.iter().map(|t| t.char_poly_value(lambda)).collect();
        finish(&self.potential, lambda, &self.grid, values, opts)
    }
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

    fn assert_coeffs(p: &LaurentPoly, want: &[(&[i64], f64)]) {
        assert_eq!(p.len(), want.len(), "{:?}", p.terms());
        for (e, w) in want {
            assert!((p.coeff(e) - w).norm() < 1e-10, "{e:?}: {} vs {w}", p.coeff(e));
        }
    }

    #[test]
    fn eval_examples() {
        let p = LaurentPoly::from_terms(vec![1], [(vec![1], c(1.0, 0.0)), (vec![-1], c(1.0, 0.0))]).unwrap();
        assert!((p.eval(&[c(2.0, 0.0)]).unwrap() - 2.5).norm() < 1e-15);
        assert_eq!(LaurentPoly::zero(vec![2, 2]).eval(&[c(3.0, 0.0), c(1.0, 1.0)]).unwrap(), c(0.0, 0.0));
        assert_eq!(p.eval(&[c(0.0, 0.0)]), Err(Error::ZeroComponent(0)));
        assert!(LaurentPoly::from_terms(vec![1], [(vec![2], c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn three_site_ring_poly() {
        let p = fermi_poly(&Potential::zeros(lat(&[3])), c(0.0, 0.0)).unwrap();
        assert_coeffs(&p, &[(&[-1], 1.0), (&[1], 1.0)]);
        assert!((p.eval(&[c(1.0, 0.0)]).unwrap() - 2.0).norm() < 1e-12);
        assert_eq!(p.leading_terms().unwrap().len(), 1);
        let (plus, minus) = p.leading_terms().unwrap()[0];
        assert!((plus - 1.0).norm() < 1e-12 && (minus - 1.0).norm() < 1e-12);
    }

    #[test]
    fn two_site_poly() {
        let v = Potential::new(lat(&[2]), vec![1.0, -1.0]).unwrap();
        let p = fermi_poly(&v, c(0.0, 0.0)).unwrap();
        assert_coeffs(&p, &[(&[-1], -1.0), (&[0], -3.0), (&[1], -1.0)]);
        let (plus, minus) = p.leading_terms().unwrap()[0];
        assert!((plus + 1.0).norm() < 1e-12 && (minus + 1.0).norm() < 1e-12);
    }

    #[test]
    fn single_site_poly() {
        let lambda = c(0.8, -0.3);
        let p = fermi_poly(&Potential::zeros(lat(&[1, 1, 1])), lambda).unwrap();
        let mut want: Vec<(Vec<i64>, Complex64)> = vec![(vec![0, 0, 0], -lambda)];
        for j in 0..3 {
            for s in [-1, 1] {
                let mut e = vec![0; 3];
                e[j] = s;
                want.push((e, c(1.0, 0.0)));
            }
        }
        assert_eq!(p.len(), 7);
        for (e, w) in want {
            assert!((p.coeff(&e) - w).norm() < 1e-12);
        }
        for (plus, minus) in p.leading_terms().unwrap() {
            assert!((plus - 1.0).norm() < 1e-12 && (minus - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn kappa_signs() {
        assert_eq!(kappa(&lat(&[2, 3, 5])), vec![-1.0, 1.0, 1.0]);
        assert_eq!(fermi_bounds(&lat(&[2, 3, 5])), vec![15, 10, 6]);
        assert_eq!(kappa(&lat(&[3])), vec![1.0]);
        assert_eq!(kappa(&lat(&[2])), vec![-1.0]);
    }

    #[test]
    fn missing_leading_term_is_reported() {
        let p = LaurentPoly::from_terms(vec![1, 1], [(vec![1, 0], c(1.0, 0.0)), (vec![-1, 0], c(1.0, 0.0))]).unwrap();
        assert_eq!(
            p.leading_terms(),
            Err(Error::MissingLeadingTerm { axis: 2, exponent: 1 })
        );
    }

    #[test]
    fn comparisons() {
        let p = LaurentPoly::from_terms(
            vec![1, 1],
            [(vec![0, 0], c(2.0, 0.0)), (vec![0, 1], c(-1.0, 0.5))],
        )
        .unwrap();
        let same = poly_equal(&p, &p, 0.0).unwrap();
        assert!(same.equal && same.max_deviation == 0.0 && same.worst_exponent.is_none());

        let mut terms: Vec<_> = p.terms().iter().map(|(e, c)| (e.clone(), *c)).collect();
        terms.push((vec![1, 0], c(1e-3, 0.0)));
        let bumped = LaurentPoly::from_terms(vec![1, 1], terms).unwrap();
        let cmp = poly_equal(&p, &bumped, 1e-6).unwrap();
        assert!(!cmp.equal);
        assert_eq!(cmp.worst_exponent, Some(vec![1, 0]));

        let other = LaurentPoly::zero(vec![1]);
        assert!(matches!(poly_equal(&p, &other, 1e-6), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn tridiagonal_grid_matches_lu_route() {
        let v = Potential::random(lat(&[2, 3]), 1.0, 5);
        let grid = CharPolyGrid::new(&v);
        for lambda in [c(0.3, 0.0), c(-1.0, 0.4)] {
            let a = fermi_poly(&v, lambda).unwrap();
            let b = grid.fermi_poly(lambda, &FermiPolyOptions::default()).unwrap();
            assert!(poly_equal(&a, &b, 1e-11).unwrap().equal);
        }
    }

    #[test]
    fn oversampled_grid_has_no_alias() {
        let v = Potential::random(lat(&[2, 3]), 1.0, 9);
        let opts = FermiPolyOptions {
            oversample: 3,
            ..Default::default()
        };
        let a = fermi_poly_with(&v, c(0.5, 0.0), &opts).unwrap();
        let b = fermi_poly(&v, c(0.5, 0.0)).unwrap();
        assert!(poly_equal(&a, &b, 1e-11).unwrap().equal);
    }
}
