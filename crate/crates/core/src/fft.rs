//! Tensor-product FFTs on level-1-fastest arrays.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::stride;

const LINE_BATCH: usize = 16;

#[derive(Clone)]
pub(crate) struct NdFft {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("shape", &self.shape).finish()
    }
}

impl NdFft {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        NdFft {
            shape: shape.to_vec(),
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    /// Unnormalized forward transform, `X_k = Σ_j x_j e^{-2πi j·k/n}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward, Prune::None);
    }

    /// Forward transform of data that vanishes outside the leading
    /// `support[l]` indices of every level.
    pub fn forward_supported(&self, data: &mut [Complex64], support: &[usize]) {
        self.run(data, &self.forward, Prune::Input(support));
    }

    /// Inverse transform including the `1/N` scaling.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse, Prune::None);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    /// Inverse transform that is only correct on the leading `support[l]`
    /// indices of every level; other entries are left unspecified.
    pub fn inverse_supported(&self, data: &mut [Complex64], support: &[usize]) {
        self.run(data, &self.inverse, Prune::Output(support));
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>], prune: Prune) {
        assert_eq!(data.len(), self.len());
        let total = data.len();
        let k = self.shape.len();
        for (axis, plan) in plans.iter().enumerate() {
            let n = self.shape[axis];
            if n == 1 {
                continue;
            }
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            let s = stride(&self.shape, axis);
            let block = s * n;
            // lines still zero (input pruning) depend on the untransformed
            // higher levels; lines never read (output pruning) on the lower ones
            let block_live = |b: usize| -> bool {
                let Prune::Input(sup) = prune else {
                    return true;
                };
                let mut rem = b;
                (axis + 1..k).all(|l| {
                    let idx = rem % self.shape[l];
                    rem /= self.shape[l];
                    idx < sup[l]
                })
            };
            let inners: Vec<usize> = match prune {
                Prune::Output(sup) => (0..s)
                    .filter(|&inner| {
                        let mut rem = inner;
                        (0..axis).all(|l| {
                            let idx = rem % self.shape[l];
                            rem /= self.shape[l];
                            idx < sup[l]
                        })
                    })
                    .collect(),
                _ => (0..s).collect(),
            };
            if s == 1 {
                for (b, start) in (0..total).step_by(n).enumerate() {
                    if block_live(b) {
                        plan.process_with_scratch(&mut data[start..start + n], &mut scratch);
                    }
                }
                continue;
            }
            // gather a few lines of the strided axis at a time so that
            // reads and writes stay within short contiguous runs
            let mut lines = vec![Complex64::default(); n * LINE_BATCH];
            for (b, start) in (0..total).step_by(block).enumerate() {
                if !block_live(b) {
                    continue;
                }
                let chunk = &mut data[start..start + block];
                for batch in inners.chunks(LINE_BATCH) {
                    let w = batch.len();
                    for i in 0..n {
                        let row = &chunk[i * s..(i + 1) * s];
                        for (kk, &inner) in batch.iter().enumerate() {
                            lines[kk * n + i] = row[inner];
                        }
                    }
                    plan.process_with_scratch(&mut lines[..w * n], &mut scratch);
                    for i in 0..n {
                        let row = &mut chunk[i * s..(i + 1) * s];
                        for (kk, &inner) in batch.iter().enumerate() {
                            row[inner] = lines[kk * n + i];
                        }
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Prune<'a> {
    None,
    Input(&'a [usize]),
    Output(&'a [usize]),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(x: &[Complex64], n1: usize, n2: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); n1 * n2];
        for k2 in 0..n2 {
            for k1 in 0..n1 {
                let mut acc = Complex64::default();
                for j2 in 0..n2 {
                    for j1 in 0..n1 {
                        let ang = -2.0
                            * std::f64::consts::PI
                            * ((j1 * k1) as f64 / n1 as f64 + (j2 * k2) as f64 / n2 as f64);
                        acc += x[j2 * n1 + j1] * Complex64::from_polar(1.0, ang);
                    }
                }
                out[k2 * n1 + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_2d_dft_and_inverts() {
        let (n1, n2) = (6, 5);
        let x: Vec<Complex64> = (0..n1 * n2)
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let plan = NdFft::new(&[n1, n2]);
        let mut y = x.clone();
        plan.forward(&mut y);
        let want = naive_dft_2d(&x, n1, n2);
        for (a, b) in y.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
        plan.inverse(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn pruned_transforms_agree_with_full() {
        let shape = [8, 6, 4];
        let support = [5, 3, 2];
        let plan = NdFft::new(&shape);
        let mut x = vec![Complex64::default(); 8 * 6 * 4];
        for i3 in 0..support[2] {
            for i2 in 0..support[1] {
                for i1 in 0..support[0] {
                    let off = i1 + 8 * (i2 + 6 * i3);
                    x[off] = Complex64::new((off as f64).sin(), (off as f64 * 0.5).cos());
                }
            }
        }
        let mut full = x.clone();
        plan.forward(&mut full);
        let mut pruned = x.clone();
        plan.forward_supported(&mut pruned, &support);
        for (a, b) in full.iter().zip(&pruned) {
            assert!((a - b).norm() < 1e-12);
        }
        plan.inverse_supported(&mut pruned, &support);
        for i3 in 0..support[2] {
            for i2 in 0..support[1] {
                for i1 in 0..support[0] {
                    let off = i1 + 8 * (i2 + 6 * i3);
                    assert!((pruned[off] - x[off]).norm() < 1e-13);
                }
            }
        }
    }
}
