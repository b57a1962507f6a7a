//! The period lattice `q_1 Z ⊕ … ⊕ q_d Z` and its fundamental domain.
//!
//! Every vector of values or matrix in this crate is indexed by the
//! fundamental domain `W = {0 ≤ n_j ≤ q_j − 1}` in row-major order (last
//! axis fastest). [`Lattice::position`] and [`Lattice::index_at`] convert
//! between a reduced multi-index and its position in that order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multi-index on `Z^d`. A reduced multi-index lies in the fundamental domain.
pub type MultiIndex = Vec<i64>;

/// Diagonal period lattice with periods `q_1, …, q_d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Lattice {
    periods: Vec<usize>,
    cell_size: usize,
    strides: Vec<usize>,
    pairwise_coprime: bool,
}

impl Lattice {
    pub fn new(periods: Vec<usize>) -> Result<Self> {
        if periods.is_empty() {
            return Err(Error::InvalidLattice("dimension must be at least 1".into()));
        }
        if let Some(j) = periods.iter().position(|&q| q == 0) {
            return Err(Error::InvalidLattice(format!("period on axis {j} is zero")));
        }
        let cell_size = periods
            .iter()
            .try_fold(1usize, |acc, &q| acc.checked_mul(q))
            .ok_or_else(|| Error::InvalidLattice("cell size overflows".into()))?;

        let mut strides = vec![1usize; periods.len()];
        for j in (0..periods.len() - 1).rev() {
            strides[j] = strides[j + 1] * periods[j + 1];
        }
        let pairwise_coprime = pairwise_coprime(&periods);
        Ok(Self {
            periods,
            cell_size,
            strides,
            pairwise_coprime,
        })
    }

    pub fn periods(&self) -> &[usize] {
        &self.periods
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    /// `Q = q_1 ⋯ q_d`.
    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    pub fn is_pairwise_coprime(&self) -> bool {
        self.pairwise_coprime
    }

    /// All `Q` reduced multi-indices in canonical (row-major) order.
    pub fn enumerate_domain(&self) -> Vec<MultiIndex> {
        (0..self.cell_size).map(|p| self.index_at(p)).collect()
    }

    /// Componentwise `l_j mod q_j` mapped into `[0, q_j − 1]`.
    pub fn reduce_mod(&self, l: &[i64]) -> MultiIndex {
        debug_assert_eq!(l.len(), self.dim());
        l.iter()
            .zip(&self.periods)
            .map(|(&x, &q)| x.rem_euclid(q as i64))
            .collect()
    }

    /// Position of `l` (reduced first) in the canonical order.
    pub fn position(&self, l: &[i64]) -> usize {
        l.iter()
            .zip(&self.periods)
            .zip(&self.strides)
            .map(|((&x, &q), &s)| x.rem_euclid(q as i64) as usize * s)
            .sum()
    }

    /// Reduced multi-index at canonical position `p`.
    pub fn index_at(&self, p: usize) -> MultiIndex {
        debug_assert!(p < self.cell_size);
        self.periods
            .iter()
            .zip(&self.strides)
            .map(|(&q, &s)| ((p / s) % q) as i64)
            .collect()
    }

    /// Canonical position of `index_at(a) + index_at(b)` reduced mod the lattice.
    pub(crate) fn add_positions(&self, a: usize, b: usize, sign: i64) -> usize {
        let mut out = 0;
        for (&q, &s) in self.periods.iter().zip(&self.strides) {
            let x = ((a / s) % q) as i64 + sign * ((b / s) % q) as i64;
            out += x.rem_euclid(q as i64) as usize * s;
        }
        out
    }

    /// Sub-lattice formed by the axes `range`.
    pub fn block(&self, range: std::ops::Range<usize>) -> Result<Self> {
        Self::new(self.periods[range].to_vec())
    }

    pub fn require_pairwise_coprime(&self) -> Result<()> {
        if self.pairwise_coprime {
            Ok(())
        } else {
            Err(Error::NotCoprime(self.periods.clone()))
        }
    }
}

impl TryFrom<Vec<usize>> for Lattice {
    type Error = Error;

    fn try_from(periods: Vec<usize>) -> Result<Self> {
        Lattice::new(periods)
    }
}

impl From<Lattice> for Vec<usize> {
    fn from(l: Lattice) -> Self {
        l.periods
    }
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// True iff `gcd(q_i, q_j) = 1` for every `i < j`.
pub fn pairwise_coprime(periods: &[usize]) -> bool {
    periods
        .iter()
        .enumerate()
        .all(|(i, &a)| periods[i + 1..].iter().all(|&b| gcd(a, b) == 1))
}
