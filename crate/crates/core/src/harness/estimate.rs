//! Plug-in mutual-information estimates from outcome counts.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Counts over a `rows × cols` grid: rows index one party's outcome, columns
/// everything the other side sees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl CountTable {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            counts: vec![0; rows * cols],
        }
    }

    pub fn from_counts(rows: usize, cols: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: counts.len(),
            });
        }
        Ok(Self { rows, cols, counts })
    }

    pub fn add(&mut self, row: usize, col: usize) {
        self.counts[row * self.cols + col] += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &CountTable) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                expected: self.counts.len(),
                actual: other.counts.len(),
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// Plug-in mutual information in bits between rows and columns.
    pub fn plug_in_mi(&self) -> Result<f64> {
        let total = self.total();
        if total == 0 {
            return Err(Error::EmptyCounts);
        }
        Ok(plug_in(self.rows, self.cols, &self.counts, total))
    }
}

fn plug_in(rows: usize, cols: usize, counts: &[u64], total: u64) -> f64 {
    let n = total as f64;
    let mut row_sum = vec![0u64; rows];
    let mut col_sum = vec![0u64; cols];
    for r in 0..rows {
        for c in 0..cols {
            let k = counts[r * cols + c];
            row_sum[r] += k;
            col_sum[c] += k;
        }
    }
    let mut info = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let k = counts[r * cols + c];
            if k > 0 {
                let k = k as f64;
                info += k * (k * n / (row_sum[r] as f64 * col_sum[c] as f64)).log2();
            }
        }
    }
    (info / n).max(0.0)
}

/// Draws a multinomial resample of `total` counts with cell probabilities
/// proportional to `counts`, by sequential binomials.
fn resample<R: Rng + ?Sized>(counts: &[u64], total: u64, rng: &mut R, out: &mut [u64]) {
    let mut left_n = total;
    let mut left_w = total;
    for (slot, &k) in out.iter_mut().zip(counts) {
        if left_n == 0 || k == 0 {
            *slot = 0;
        } else if k == left_w {
            *slot = left_n;
        } else {
            let p = k as f64 / left_w as f64;
            *slot = Binomial::new(left_n, p)
                .expect("probability lies in [0, 1]")
                .sample(rng);
        }
        left_n -= *slot;
        left_w -= k;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub bits: f64,
    /// Bootstrap standard deviation; zero when `resamples < 2`.
    pub stderr: f64,
    /// Leading-order positive bias of the plug-in estimate,
    /// `(rows − 1)(cols − 1)/(2N ln 2)`.
    pub bias: f64,
    pub samples: u64,
}

/// Plug-in MI of `counts` with a nonparametric bootstrap error.
pub fn empirical_mi<R: Rng + ?Sized>(
    counts: &CountTable,
    resamples: usize,
    rng: &mut R,
) -> Result<MiEstimate> {
    let bits = counts.plug_in_mi()?;
    let total = counts.total();
    let mut stderr = 0.0;
    if resamples >= 2 {
        let mut buf = vec![0u64; counts.counts.len()];
        let draws: Vec<f64> = (0..resamples)
            .map(|_| {
                resample(&counts.counts, total, rng, &mut buf);
                plug_in(counts.rows, counts.cols, &buf, total)
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / resamples as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
        stderr = var.sqrt();
    }
    let bias = ((counts.rows - 1) * (counts.cols - 1)) as f64
        / (2.0 * total as f64 * std::f64::consts::LN_2);
    Ok(MiEstimate {
        bits,
        stderr,
        bias,
        samples: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::derive_rng;

    #[test]
    fn perfectly_correlated_bits() {
        let t = CountTable::from_counts(2, 2, vec![500, 0, 0, 500]).unwrap();
        let est = empirical_mi(&t, 50, &mut derive_rng(0, 0)).unwrap();
        assert!((est.bits - 1.0).abs() < 1e-15);
    }

    #[test]
    fn independent_counts() {
        let t = CountTable::from_counts(2, 3, vec![100, 200, 300, 100, 200, 300]).unwrap();
        assert!(t.plug_in_mi().unwrap().abs() < 1e-15);
    }

    #[test]
    fn empty_counts_rejected() {
        let t = CountTable::zeros(2, 2);
        assert_eq!(
            empirical_mi(&t, 10, &mut derive_rng(0, 0)).unwrap_err(),
            Error::EmptyCounts
        );
        assert!(CountTable::from_counts(2, 2, vec![1]).is_err());
    }

    #[test]
    fn resample_preserves_total() {
        let counts = [5u64, 0, 17, 3, 75];
        let mut out = [0u64; 5];
        let mut rng = derive_rng(4, 0);
        for _ in 0..100 {
            resample(&counts, 100, &mut rng, &mut out);
            assert_eq!(out.iter().sum::<u64>(), 100);
            assert_eq!(out[1], 0);
        }
    }

    #[test]
    fn merge_adds_counts() {
        let mut a = CountTable::from_counts(1, 2, vec![1, 2]).unwrap();
        a.merge(&CountTable::from_counts(1, 2, vec![3, 4]).unwrap())
            .unwrap();
        assert_eq!(a.counts(), &[4, 6]);
        assert!(a.merge(&CountTable::zeros(2, 1)).is_err());
    }
}
