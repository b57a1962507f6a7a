//! Unnormalized multidimensional DFT on row-major arrays, one axis at a time.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// In-place DFT of `data` laid out row-major with the given `shape`.
///
/// Forward computes `Σ_n x(n) e^{−2πi Σ k_j n_j / N_j}`; inverse uses `+`.
/// No normalization is applied in either direction.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "buffer does not match shape");
    if total == 0 {
        return;
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = total;
    let mut line = Vec::new();
    for &len in shape {
        stride /= len;
        if len == 1 {
            continue;
        }
        let fft = planner.plan_fft(len, direction);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        line.resize(len, Complex64::default());
        // Each line along this axis starts at `outer * len * stride + inner`.
        for outer in 0..total / (len * stride) {
            for inner in 0..stride {
                let base = outer * len * stride + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive(data: &[Complex64], shape: &[usize], sign: f64) -> Vec<Complex64> {
        let total: usize = shape.iter().product();
        let unravel = |mut p: usize| {
            let mut idx = vec![0usize; shape.len()];
            for j in (0..shape.len()).rev() {
                idx[j] = p % shape[j];
                p /= shape[j];
            }
            idx
        };
        (0..total)
            .map(|k| {
                let kk = unravel(k);
                (0..total)
                    .map(|n| {
                        let nn = unravel(n);
                        let phase: f64 = (0..shape.len())
                            .map(|j| (kk[j] * nn[j]) as f64 / shape[j] as f64)
                            .sum();
                        data[n] * Complex64::from_polar(1.0, sign * 2.0 * PI * phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_sum() {
        let shape = [3, 1, 4, 5];
        let total = 60;
        let data: Vec<Complex64> = (0..total)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        for (dir, sign) in [(FftDirection::Forward, -1.0), (FftDirection::Inverse, 1.0)] {
            let mut got = data.clone();
            fft_nd(&mut got, &shape, dir);
            let want = naive(&data, &shape, sign);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12, "{a} vs {b}");
            }
        }
    }
}
