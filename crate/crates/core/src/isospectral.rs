//! Floquet and Fermi isospectrality decisions, and numerical checks of the
//! identities that Fermi isospectral potentials must satisfy.
//!
//! Two potentials are Fermi isospectral at `λ₀` iff their Fermi polynomials
//! `𝒫(·, λ₀)` coincide, and Floquet isospectral iff `𝒫(·, λ)` coincide for
//! every `λ`. Since `𝒫` has degree exactly `Q` in `λ`, agreement at `Q + 1`
//! distinct energies suffices for the latter.
//!
//! For a Fermi isospectral pair `(V, Y)` the checks here verify:
//! - equal cell averages;
//! - the rational identity in `z` weighting `|V^(n − n′)|²` by
//!   `1 / ((Σ_j ρ_{n_j} z_j)(Σ_j ρ_{n′_j} z_j))`;
//! - equal Fourier-shell sums of `|V^|²` (zero-prefix and pair shells).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{band_structure, spectrum_at};
use crate::lattice::{pairwise_coprime, Lattice, MultiIndex};
use crate::laurent::{fermi_poly, poly_equal, CharPolyGrid, FermiPolyOptions, LaurentPoly};
use crate::potential::{FourierCoeffs, Partition, Potential};

/// Maximum number of witnesses kept in a report.
pub const MAX_WITNESSES: usize = 10;

/// Denominators `|Σ_j ρ_{n_j} z_j|` below this are treated as poles.
pub const POLE_EPS: f64 = 1e-6;

/// Resampling budget per requested sample when avoiding poles.
pub const RESAMPLE_FACTOR: usize = 1000;

/// Real quasi-momenta at which Floquet spectra are spot-checked.
pub const SPECTRUM_SPOT_CHECKS: usize = 10;

/// Imaginary offset added to the energies `t / (Q + 1)` used by the Floquet test.
pub const FLOQUET_LAMBDA_OFFSET: Complex64 = Complex64::new(0.0, 0.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    PolyCompare,
    EigCompare,
    IdentitySample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<f64> for ComplexValue {
    fn from(x: f64) -> Self {
        Self { re: x, im: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub location: String,
    pub lhs: ComplexValue,
    pub rhs: ComplexValue,
    pub deviation: f64,
}

/// Verdict of an isospectrality or identity check.
///
/// `verdict` is true iff `max_deviation ≤ tolerance`; when false the
/// witnesses hold the worst discrepancies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsospectralityReport {
    pub verdict: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub method: Method,
    pub witnesses: Vec<Witness>,
    /// Named auxiliary numbers (distances, thresholds, sample counts).
    pub metrics: BTreeMap<String, f64>,
}

impl IsospectralityReport {
    fn from_witnesses(method: Method, tolerance: f64, mut witnesses: Vec<Witness>) -> Self {
        witnesses.sort_by(|a, b| b.deviation.total_cmp(&a.deviation));
        witnesses.truncate(MAX_WITNESSES);
        let max_deviation = witnesses.first().map_or(0.0, |w| w.deviation);
        Self {
            verdict: max_deviation <= tolerance,
            max_deviation,
            tolerance,
            method,
            witnesses,
            metrics: BTreeMap::new(),
        }
    }

    fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }
}

fn same_lattice(v: &Potential, y: &Potential) -> Result<()> {
    if v.lattice() != y.lattice() {
        return Err(Error::LatticeMismatch(
            v.lattice().periods().to_vec(),
            y.lattice().periods().to_vec(),
        ));
    }
    Ok(())
}

fn require_dim(lattice: &Lattice, required: usize) -> Result<()> {
    if lattice.dim() < required {
        return Err(Error::DimensionTooSmall {
            required,
            got: lattice.dim(),
        });
    }
    Ok(())
}

fn poly_witnesses(cmp: &crate::laurent::PolyComparison, scale: f64, prefix: &str) -> Vec<Witness> {
    cmp.worst
        .iter()
        .map(|(e, a, b)| Witness {
            location: format!("{prefix}exp={e:?}"),
            lhs: (*a).into(),
            rhs: (*b).into(),
            deviation: (a - b).norm() / scale,
        })
        .collect()
}

/// Compares `𝒫_V(·, λ₀)` and `𝒫_Y(·, λ₀)` coefficientwise.
pub fn fermi_isospectral(v: &Potential, y: &Potential, lambda0: Complex64, tol: f64) -> Result<IsospectralityReport> {
    same_lattice(v, y)?;
    let pv = fermi_poly(v, lambda0)?;
    let py = fermi_poly(y, lambda0)?;
    fermi_report(&pv, &py, tol)
}

fn fermi_report(pv: &LaurentPoly, py: &LaurentPoly, tol: f64) -> Result<IsospectralityReport> {
    let cmp = poly_equal(pv, py, tol)?;
    let scale = 1.0 + pv.max_abs_coeff().max(py.max_abs_coeff());
    Ok(
        IsospectralityReport::from_witnesses(Method::PolyCompare, tol, poly_witnesses(&cmp, scale, ""))
            .metric("distance", cmp.max_abs_difference)
            .metric("prune_threshold", pv.prune_threshold().max(py.prune_threshold()))
            .metric("terms_lhs", pv.len() as f64)
            .metric("terms_rhs", py.len() as f64),
    )
}

/// The `Q + 1` energies `λ_t = t/(Q+1) + FLOQUET_LAMBDA_OFFSET`, `t = 0..Q`.
pub fn floquet_energies(lattice: &Lattice) -> Vec<Complex64> {
    let q = lattice.cell_size();
    (0..=q)
        .map(|t| Complex64::new(t as f64 / (q + 1) as f64, 0.0) + FLOQUET_LAMBDA_OFFSET)
        .collect()
}

/// Fermi polynomials of one potential at every energy of [`floquet_energies`].
///
/// Computing these once lets a potential be compared against many partners.
#[derive(Debug, Clone)]
pub struct BlochData {
    potential: Potential,
    energies: Vec<Complex64>,
    polys: Vec<LaurentPoly>,
}

impl BlochData {
    pub fn new(v: &Potential) -> Result<Self> {
        let grid = CharPolyGrid::new(v);
        let energies = floquet_energies(v.lattice());
        let opts = FermiPolyOptions::default();
        let polys = energies
            .iter()
            .map(|&l| grid.fermi_poly(l, &opts))
            .collect::<Result<_>>()?;
        Ok(Self {
            potential: v.clone(),
            energies,
            polys,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn polys(&self) -> &[LaurentPoly] {
        &self.polys
    }
}

/// Floquet isospectrality with the default seed for the spectral spot checks.
pub fn floquet_isospectral(v: &Potential, y: &Potential, tol: f64) -> Result<IsospectralityReport> {
    floquet_isospectral_seeded(v, y, tol, crate::DEFAULT_SEED)
}

pub fn floquet_isospectral_seeded(v: &Potential, y: &Potential, tol: f64, seed: u64) -> Result<IsospectralityReport> {
    same_lattice(v, y)?;
    compare_bloch(&BlochData::new(v)?, &BlochData::new(y)?, tol, seed)
}

/// Floquet comparison from precomputed [`BlochData`].
pub fn compare_bloch(a: &BlochData, b: &BlochData, tol: f64, seed: u64) -> Result<IsospectralityReport> {
    same_lattice(&a.potential, &b.potential)?;
    let mut witnesses = Vec::new();
    let mut poly_dev = 0.0f64;
    for ((lambda, pa), pb) in a.energies.iter().zip(&a.polys).zip(&b.polys) {
        let cmp = poly_equal(pa, pb, tol)?;
        poly_dev = poly_dev.max(cmp.max_deviation);
        let scale = 1.0 + pa.max_abs_coeff().max(pb.max_abs_coeff());
        witnesses.extend(poly_witnesses(&cmp, scale, &format!("lambda={lambda}, ")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = a.potential.lattice().dim();
    let path: Vec<Vec<f64>> = (0..SPECTRUM_SPOT_CHECKS)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let sa = band_structure(&a.potential, &path)?;
    let sb = band_structure(&b.potential, &path)?;
    let mut eig_dev = 0.0f64;
    for (x, y) in sa.iter().zip(&sb) {
        let scale = 1.0 + x.eigenvalues.iter().chain(&y.eigenvalues).fold(0.0f64, |m, e| m.max(e.abs()));
        for (m, (ex, ey)) in x.eigenvalues.iter().zip(&y.eigenvalues).enumerate() {
            let dev = (ex - ey).abs() / scale;
            eig_dev = eig_dev.max(dev);
            if dev > 0.0 {
                witnesses.push(Witness {
                    location: format!("k={:?}, band {}", x.k, m + 1),
                    lhs: (*ex).into(),
                    rhs: (*ey).into(),
                    deviation: dev,
                });
            }
        }
    }
    Ok(IsospectralityReport::from_witnesses(Method::PolyCompare, tol, witnesses)
        .metric("energies", a.energies.len() as f64)
        .metric("poly_deviation", poly_dev)
        .metric("spectrum_deviation", eig_dev))
}

/// Checks `[V] = [Y]`.
pub fn verify_mean_identity(v: &Potential, y: &Potential, tol: f64) -> Result<IsospectralityReport> {
    same_lattice(v, y)?;
    let (a, b) = (v.average(), y.average());
    let w = Witness {
        location: "mean".into(),
        lhs: a.into(),
        rhs: b.into(),
        deviation: (a - b).abs(),
    };
    Ok(IsospectralityReport::from_witnesses(Method::IdentitySample, tol, vec![w]))
}

/// `Σ_{n,n′∈W} |V^(n − n′)|² / ((Σ_j ρ_{n_j} z_j)(Σ_j ρ_{n′_j} z_j))` given the
/// reciprocal denominators `inv[n] = 1 / Σ_j ρ_{n_j} z_j`.
fn pair_sum(coeffs: &FourierCoeffs, inv: &[Complex64]) -> Complex64 {
    let lattice = coeffs.lattice();
    let weights: Vec<f64> = coeffs.coeffs().iter().map(|c| c.norm_sqr()).collect();
    let mut total = Complex64::default();
    for (n, wn) in inv.iter().enumerate() {
        let mut row = Complex64::default();
        for (m, wm) in inv.iter().enumerate() {
            row += weights[lattice.add_positions(n, m, -1)] * wm;
        }
        total += row * wn;
    }
    total
}

/// Denominators `Σ_j ρ^j_{n_j} z_j` for every `n ∈ W`.
fn shell_denominators(lattice: &Lattice, z: &[Complex64]) -> Vec<Complex64> {
    lattice
        .enumerate_domain()
        .iter()
        .map(|n| {
            n.iter()
                .zip(lattice.periods())
                .zip(z)
                .map(|((&nj, &q), zj)| Complex64::from_polar(1.0, 2.0 * PI * nj as f64 / q as f64) * zj)
                .sum()
        })
        .collect()
}

/// Samples the rational identity at `samples` random points of the unit torus
/// away from its poles.
pub fn verify_g55(v: &Potential, y: &Potential, samples: usize, seed: u64, tol: f64) -> Result<IsospectralityReport> {
    same_lattice(v, y)?;
    let lattice = v.lattice();
    let (cv, cy) = (v.dft(), y.dft());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = RESAMPLE_FACTOR * samples.max(1);
    let mut attempts = 0usize;
    let mut witnesses = Vec::with_capacity(samples);
    for s in 0..samples {
        let (z, denominators) = loop {
            if attempts >= budget {
                return Err(Error::SamplingExhausted { attempts });
            }
            attempts += 1;
            let z: Vec<Complex64> = (0..lattice.dim())
                .map(|_| Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>()))
                .collect();
            let den = shell_denominators(lattice, &z);
            if den.iter().all(|d| d.norm() >= POLE_EPS) {
                break (z, den);
            }
        };
        let inv: Vec<Complex64> = denominators.iter().map(|d| d.inv()).collect();
        let (lhs, rhs) = (pair_sum(&cv, &inv), pair_sum(&cy, &inv));
        let deviation = (lhs - rhs).norm() / (1.0 + lhs.norm().max(rhs.norm()));
        witnesses.push(Witness {
            location: format!("sample {s}, z={z:?}"),
            lhs: lhs.into(),
            rhs: rhs.into(),
            deviation,
        });
    }
    Ok(
        IsospectralityReport::from_witnesses(Method::IdentitySample, tol, witnesses)
            .metric("samples", samples as f64)
            .metric("attempts", attempts as f64)
            .metric("pole_eps", POLE_EPS),
    )
}

/// Which Fourier indices a shell sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShellSpec {
    /// `l′` with `l′_m = 0` for the first `d₁` axes.
    ZeroPrefix(usize),
    /// `l′` with `l′_a ∈ {l_a, q_a − l_a}` and `l′_b ∈ {l_b, q_b − l_b}` (0-based axes).
    PairShell { axes: (usize, usize), l: (usize, usize) },
}

impl ShellSpec {
    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        let q = lattice.periods();
        match *self {
            ShellSpec::ZeroPrefix(d1) if d1 < 2 || d1 > q.len() => Err(Error::InvalidShell(format!(
                "zero prefix {d1} outside 2..={}",
                q.len()
            ))),
            ShellSpec::PairShell { axes: (a, b), l: (la, lb) } => {
                if a == b || a >= q.len() || b >= q.len() {
                    return Err(Error::InvalidShell(format!("axes ({a}, {b}) invalid for dimension {}", q.len())));
                }
                if la == 0 || la >= q[a] || lb == 0 || lb >= q[b] {
                    return Err(Error::InvalidShell(format!(
                        "shell indices ({la}, {lb}) must lie in 1..q on axes ({a}, {b})"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn contains(&self, l: &[i64], q: &[usize]) -> bool {
        match *self {
            ShellSpec::ZeroPrefix(d1) => l[..d1].iter().all(|&x| x == 0),
            ShellSpec::PairShell { axes: (a, b), l: (la, lb) } => {
                let hit = |axis: usize, target: usize| {
                    let x = l[axis] as usize;
                    x == target || x == q[axis] - target
                };
                hit(a, la) && hit(b, lb)
            }
        }
    }
}

/// `Σ |V^(l′)|²` over the shell.
pub fn fourier_shell_sum(v: &Potential, spec: ShellSpec) -> Result<f64> {
    spec.validate(v.lattice())?;
    Ok(shell_sum(&v.dft(), spec))
}

fn shell_sum(coeffs: &FourierCoeffs, spec: ShellSpec) -> f64 {
    let q = coeffs.lattice().periods();
    coeffs
        .lattice()
        .enumerate_domain()
        .iter()
        .zip(coeffs.coeffs())
        .filter(|(l, _)| spec.contains(l, q))
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

/// Every shell checked by [`verify_shell_identities`]: all zero prefixes
/// `2 ≤ d₁ ≤ d` and every pair shell on every pair of axes.
pub fn all_shells(lattice: &Lattice) -> Vec<ShellSpec> {
    let q = lattice.periods();
    let mut shells: Vec<ShellSpec> = (2..=q.len()).map(ShellSpec::ZeroPrefix).collect();
    for a in 0..q.len() {
        for b in a + 1..q.len() {
            for la in 1..q[a] {
                for lb in 1..q[b] {
                    shells.push(ShellSpec::PairShell { axes: (a, b), l: (la, lb) });
                }
            }
        }
    }
    shells
}

/// Compares every shell sum of `V` and `Y`; needs `d ≥ 3` and pairwise coprime periods.
pub fn verify_shell_identities(v: &Potential, y: &Potential, tol: f64) -> Result<IsospectralityReport> {
    same_lattice(v, y)?;
    let lattice = v.lattice();
    require_dim(lattice, 3)?;
    lattice.require_pairwise_coprime()?;
    let (cv, cy) = (v.dft(), y.dft());
    let shells = all_shells(lattice);
    let witnesses = shells
        .iter()
        .map(|&spec| {
            let (a, b) = (shell_sum(&cv, spec), shell_sum(&cy, spec));
            Witness {
                location: format!("{spec:?}"),
                lhs: a.into(),
                rhs: b.into(),
                deviation: (a - b).abs() / (1.0 + a.max(b)),
            }
        })
        .collect();
    Ok(IsospectralityReport::from_witnesses(Method::IdentitySample, tol, witnesses).metric("shells", shells.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CounterexampleKind {
    /// Vanishing determinant outside the six listed cases.
    UnlistedZero,
    /// Listed case with a non-vanishing determinant.
    ListedNonzero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub l: [usize; 3],
    pub l_prime: [usize; 3],
    pub det_abs: f64,
    pub kind: CounterexampleKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnityClassification {
    pub periods: [usize; 3],
    pub tuples: usize,
    pub zero_count: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl UnityClassification {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn listed_case(l: [usize; 3], lp: [usize; 3]) -> bool {
    let zero_pair = |i: usize, j: usize| l[i] == 0 && lp[i] == 0 && l[j] == 0 && lp[j] == 0;
    l == [0; 3] || lp == [0; 3] || l == lp || zero_pair(0, 1) || zero_pair(0, 2) || zero_pair(1, 2)
}

/// Brute-force check of when `det[[1,1,1],[ρ¹_{l₁},ρ²_{l₂},ρ³_{l₃}],[ρ¹_{l′₁},ρ²_{l′₂},ρ³_{l′₃}]]`
/// vanishes, against the six listed cases, over all `(l, l′)`.
pub fn classify_unity_determinants(q1: usize, q2: usize, q3: usize, tol: f64) -> Result<UnityClassification> {
    let q = [q1, q2, q3];
    if q.contains(&0) {
        return Err(Error::InvalidLattice(format!("periods {q:?} must be positive")));
    }
    if !pairwise_coprime(&q) {
        return Err(Error::NotCoprime(q.to_vec()));
    }
    let rho = |j: usize, l: usize| Complex64::from_polar(1.0, 2.0 * PI * l as f64 / q[j] as f64);
    let cells: Vec<[usize; 3]> = (0..q1)
        .flat_map(|a| (0..q2).flat_map(move |b| (0..q3).map(move |c| [a, b, c])))
        .collect();
    let mut zero_count = 0;
    let mut counterexamples = Vec::new();
    for &l in &cells {
        let r = [rho(0, l[0]), rho(1, l[1]), rho(2, l[2])];
        for &lp in &cells {
            let s = [rho(0, lp[0]), rho(1, lp[1]), rho(2, lp[2])];
            // Expansion along the first row of ones.
            let det = (r[1] * s[2] - r[2] * s[1]) - (r[0] * s[2] - r[2] * s[0]) + (r[0] * s[1] - r[1] * s[0]);
            let det_abs = det.norm();
            let vanishes = det_abs < tol;
            zero_count += vanishes as usize;
            let listed = listed_case(l, lp);
            if vanishes != listed {
                counterexamples.push(Counterexample {
                    l,
                    l_prime: lp,
                    det_abs,
                    kind: if vanishes {
                        CounterexampleKind::UnlistedZero
                    } else {
                        CounterexampleKind::ListedNonzero
                    },
                });
            }
        }
    }
    Ok(UnityClassification {
        periods: q,
        tuples: cells.len() * cells.len(),
        zero_count,
        counterexamples,
    })
}

/// Distance between `𝒫_V(·, λ₀)` and the free polynomial `𝒫_0(·, λ₀)`.
///
/// Metrics: `distance` (largest absolute coefficient difference),
/// `prune_threshold`, and `max_abs_potential` so that vanishing of `V` can be
/// compared with the verdict.
pub fn ambarzumian_check(v: &Potential, lambda0: Complex64, tol: f64) -> Result<IsospectralityReport> {
    let lattice = v.lattice();
    require_dim(lattice, 3)?;
    lattice.require_pairwise_coprime()?;
    let pv = fermi_poly(v, lambda0)?;
    let p0 = fermi_poly(&Potential::zeros(lattice.clone()), lambda0)?;
    Ok(fermi_report(&pv, &p0, tol)?
        .metric("max_abs_potential", v.max_abs())
        .metric("mean", v.average()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Transform {
    Translate(MultiIndex),
    Reflect,
}

impl Transform {
    pub fn apply(&self, v: &Potential) -> Potential {
        match self {
            Transform::Translate(m) => v.translate(m),
            Transform::Reflect => v.reflect(),
        }
    }
}

/// One named assertion of [`rigidity_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityStep {
    pub name: String,
    pub report: IsospectralityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub passed: bool,
    pub steps: Vec<RigidityStep>,
}

/// Smallest `d̃ < d` such that the coefficients vanish (within `tol`) outside the first `d̃` axes.
fn prefix_dependence(coeffs: &FourierCoeffs, tol: f64) -> Option<usize> {
    (0..coeffs.lattice().dim()).find(|&p| coeffs.mass_outside_prefix(p) <= tol)
}

/// Builds `V = transform(Y)` and checks in order:
/// 1. `V` and `Y` are Fermi isospectral at `λ₀`;
/// 2. `V` is separable for `p`;
/// 3. after separating both, each `V_j + c_j` is Floquet isospectral to `Y_j`,
///    with `c_j = [Y_j] − [V_j]`;
/// 4. if `Y` depends only on its first `d̃ < d` coordinates, so does `V`.
pub fn rigidity_suite(
    y: &Potential,
    p: &Partition,
    transform: &Transform,
    lambda0: Complex64,
    tol: f64,
) -> Result<RigidityReport> {
    let lattice = y.lattice();
    require_dim(lattice, 3)?;
    lattice.require_pairwise_coprime()?;
    let cy = y.dft();
    let sep_tol = tol * (1.0 + cy.max_abs());
    if !cy.separability(p, sep_tol)?.separable {
        return Err(Error::PreconditionFailed(format!(
            "Y is not {:?} separable",
            p.parts()
        )));
    }
    let v = transform.apply(y);
    let cv = v.dft();
    let mut steps = Vec::new();

    steps.push(RigidityStep {
        name: "fermi_isospectral".into(),
        report: fermi_isospectral(&v, y, lambda0, tol)?,
    });

    let check = cv.separability(p, sep_tol)?;
    let sep_witnesses = check
        .violators
        .iter()
        .map(|(l, m)| Witness {
            location: format!("l={l:?}"),
            lhs: (*m).into(),
            rhs: 0.0.into(),
            deviation: *m,
        })
        .collect();
    let separable = IsospectralityReport::from_witnesses(Method::IdentitySample, sep_tol, sep_witnesses);
    let is_sep = separable.verdict;
    steps.push(RigidityStep {
        name: "separable".into(),
        report: separable,
    });

    if is_sep {
        let vs = v.separate(p, sep_tol)?;
        let ys = y.separate(p, sep_tol)?;
        for (j, (vj, yj)) in vs.iter().zip(&ys).enumerate() {
            let c = yj.average() - vj.average();
            let report = floquet_isospectral(&vj.shifted(c), yj, tol)?.metric("mean_shift", c);
            steps.push(RigidityStep {
                name: format!("component_{}_floquet_isospectral", j + 1),
                report,
            });
        }
    }

    let dependence = match prefix_dependence(&cy, sep_tol) {
        Some(prefix) => {
            let outside = cv.mass_outside_prefix(prefix);
            let w = Witness {
                location: format!("coefficients outside the first {prefix} axes"),
                lhs: outside.into(),
                rhs: 0.0.into(),
                deviation: outside,
            };
            IsospectralityReport::from_witnesses(Method::IdentitySample, sep_tol, vec![w]).metric("prefix", prefix as f64)
        }
        None => IsospectralityReport::from_witnesses(Method::IdentitySample, sep_tol, vec![]).metric("prefix", lattice.dim() as f64),
    };
    steps.push(RigidityStep {
        name: "prefix_dependence".into(),
        report: dependence,
    });

    Ok(RigidityReport {
        passed: steps.iter().all(|s| s.report.verdict),
        steps,
    })
}

/// Sorted sum-set `{α_i + β_j}` of two spectra.
pub fn kronecker_sum_spectrum(alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = alpha.iter().flat_map(|a| beta.iter().map(move |b| a + b)).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Compares `spectrum_at(V₁ ⊕ V₂, k)` with the sum-set of the component spectra
/// at the matching block quasi-momenta.
pub fn verify_kronecker_sum(parts: &[Potential; 2], k: &[f64], tol: f64) -> Result<IsospectralityReport> {
    let periods: Vec<usize> = parts.iter().flat_map(|p| p.lattice().periods().to_vec()).collect();
    let lattice = Lattice::new(periods)?;
    let combined = crate::potential::combine_separable(parts, &lattice)?;
    let d1 = parts[0].lattice().dim();
    let whole = spectrum_at(&combined, k)?;
    let a = spectrum_at(&parts[0], &k[..d1])?;
    let b = spectrum_at(&parts[1], &k[d1..])?;
    let sums = kronecker_sum_spectrum(&a.eigenvalues, &b.eigenvalues);
    let witnesses = whole
        .eigenvalues
        .iter()
        .zip(&sums)
        .enumerate()
        .map(|(m, (x, s))| Witness {
            location: format!("k={k:?}, band {}", m + 1),
            lhs: (*x).into(),
            rhs: (*s).into(),
            deviation: (x - s).abs(),
        })
        .collect();
    Ok(IsospectralityReport::from_witnesses(Method::EigCompare, tol, witnesses))
}
