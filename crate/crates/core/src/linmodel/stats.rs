//! Sufficient statistics of a regression block.
//!
//! Ridge fits and Pearson scores of linear predictions depend on the data only
//! through `X'X`, `X'Y`, column sums and the first two moments of `Y`, so
//! blocks (trials, folds) can be summarised once and combined by addition.

use std::ops::{AddAssign, SubAssign};

use nalgebra::{DMatrix, DVector};

use super::Direction;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    /// `X'X`.
    pub gram: DMatrix<f64>,
    /// `X'Y`.
    pub xty: DMatrix<f64>,
    /// Column sums of `X`.
    pub x_sum: DVector<f64>,
    /// Column sums of `Y`.
    pub y_sum: DVector<f64>,
    /// Column sums of `Y` squared.
    pub y_sq: DVector<f64>,
    pub n: usize,
}

impl BlockStats {
    pub fn zeros(n_features: usize, n_outputs: usize) -> Self {
        Self {
            gram: DMatrix::zeros(n_features, n_features),
            xty: DMatrix::zeros(n_features, n_outputs),
            x_sum: DVector::zeros(n_features),
            y_sum: DVector::zeros(n_outputs),
            y_sq: DVector::zeros(n_outputs),
            n: 0,
        }
    }

    pub fn n_features(&self) -> usize {
        self.gram.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.xty.ncols()
    }

    /// Statistics of an explicit design `x` and targets `y`.
    pub fn from_design(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Self {
        let ones = DVector::from_element(x.nrows(), 1.0);
        Self {
            gram: x.tr_mul(x),
            xty: x.tr_mul(y),
            x_sum: x.tr_mul(&ones),
            y_sum: y.tr_mul(&ones),
            y_sq: DVector::from_iterator(y.ncols(), y.column_iter().map(|c| c.norm_squared())),
            n: x.nrows(),
        }
    }

    /// Statistics of the lag matrix of `inputs` against `targets` without
    /// materialising the matrix.
    ///
    /// The Gram entries are obtained from full-overlap cross-correlations
    /// with the zero-padded edge terms removed, which costs
    /// `O(N^2 * L * T)` instead of `O(N^2 * L^2 * T)`.
    pub fn from_lagged(
        inputs: &[&[f64]],
        tau_min: isize,
        tau_max: isize,
        direction: Direction,
        targets: &[&[f64]],
    ) -> Self {
        let n_in = inputs.len();
        let n_lags = (tau_max - tau_min + 1) as usize;
        let t = inputs.first().map_or(0, |c| c.len()) as isize;
        let p = n_in * n_lags;
        let mut out = Self::zeros(p, targets.len());
        out.n = t as usize;
        if t == 0 {
            return out;
        }
        let shifts: Vec<isize> = (tau_min..=tau_max).map(|tau| direction.shift(tau)).collect();
        let max_d = (tau_max - tau_min) as isize;

        let dot_range = |a: &[f64], b: &[f64], d: isize, lo: isize, hi: isize| -> f64 {
            // sum over u in [lo, hi] of a[u] * b[u + d]
            (lo..=hi).map(|u| a[u as usize] * b[(u + d) as usize]).sum()
        };

        for i in 0..n_in {
            for j in i..n_in {
                let (xi, xj) = (inputs[i], inputs[j]);
                // full[d + max_d] = sum_u xi(u) xj(u + d) over the full overlap
                let full: Vec<f64> = (-max_d..=max_d)
                    .map(|d| {
                        let lo = (-d).max(0);
                        let hi = (t - 1).min(t - 1 - d);
                        if lo > hi {
                            0.0
                        } else {
                            dot_range(xi, xj, d, lo, hi)
                        }
                    })
                    .collect();
                for (a, &sa) in shifts.iter().enumerate() {
                    for (b, &sb) in shifts.iter().enumerate() {
                        let d = sb - sa;
                        let lo0 = (-d).max(0);
                        let hi0 = (t - 1).min(t - 1 - d);
                        let lo = lo0.max(sa);
                        let hi = hi0.min(t - 1 + sa);
                        let v = if lo > hi || lo0 > hi0 {
                            0.0
                        } else {
                            let mut v = full[(d + max_d) as usize];
                            if lo > lo0 {
                                v -= dot_range(xi, xj, d, lo0, lo - 1);
                            }
                            if hi < hi0 {
                                v -= dot_range(xi, xj, d, hi + 1, hi0);
                            }
                            v
                        };
                        let (r, c) = (i * n_lags + a, j * n_lags + b);
                        out.gram[(r, c)] = v;
                        out.gram[(c, r)] = v;
                    }
                }
            }
        }

        for (i, x) in inputs.iter().enumerate() {
            let mut prefix = Vec::with_capacity(x.len() + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for v in x.iter() {
                acc += v;
                prefix.push(acc);
            }
            for (a, &s) in shifts.iter().enumerate() {
                // rows t with 0 <= t + s < T
                let lo = (-s).max(0);
                let hi = (t - s).min(t);
                let col = i * n_lags + a;
                if lo < hi {
                    out.x_sum[col] = prefix[(hi + s) as usize] - prefix[(lo + s) as usize];
                    for (m, y) in targets.iter().enumerate() {
                        out.xty[(col, m)] = (lo..hi)
                            .map(|row| x[(row + s) as usize] * y[row as usize])
                            .sum();
                    }
                }
            }
        }

        for (m, y) in targets.iter().enumerate() {
            out.y_sum[m] = y.iter().sum();
            out.y_sq[m] = y.iter().map(|v| v * v).sum();
        }
        out
    }

    /// Pearson correlation of each output with its prediction `X * weights`.
    /// Undefined correlations (constant prediction or target) are NaN.
    pub fn prediction_correlations(&self, weights: &DMatrix<f64>) -> Vec<f64> {
        let n = self.n as f64;
        let gw = &self.gram * weights;
        (0..self.n_outputs())
            .map(|m| {
                let w = weights.column(m);
                let sp = self.x_sum.dot(&w);
                let spp = w.dot(&gw.column(m));
                let spy = w.dot(&self.xty.column(m));
                let (sy, syy) = (self.y_sum[m], self.y_sq[m]);
                let cov = n * spy - sp * sy;
                let vp = n * spp - sp * sp;
                let vy = n * syy - sy * sy;
                if vp <= 1e-14 * (n * spp).abs().max(f64::MIN_POSITIVE)
                    || vy <= 1e-14 * (n * syy).abs().max(f64::MIN_POSITIVE)
                {
                    f64::NAN
                } else {
                    (cov / (vp * vy).sqrt()).clamp(-1.0, 1.0)
                }
            })
            .collect()
    }
}

impl AddAssign<&BlockStats> for BlockStats {
    fn add_assign(&mut self, rhs: &BlockStats) {
        self.gram += &rhs.gram;
        self.xty += &rhs.xty;
        self.x_sum += &rhs.x_sum;
        self.y_sum += &rhs.y_sum;
        self.y_sq += &rhs.y_sq;
        self.n += rhs.n;
    }
}

impl SubAssign<&BlockStats> for BlockStats {
    fn sub_assign(&mut self, rhs: &BlockStats) {
        self.gram -= &rhs.gram;
        self.xty -= &rhs.xty;
        self.x_sum -= &rhs.x_sum;
        self.y_sum -= &rhs.y_sum;
        self.y_sq -= &rhs.y_sq;
        self.n -= rhs.n;
    }
}
