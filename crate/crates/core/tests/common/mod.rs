#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tauprec::spectra::{sym_function, DenseMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Grünwald weights straight from `(-1)^k binom(α, k)`, with the binomial
/// built as the running product `Π (α - i)/(i + 1)`.
pub fn binomial_weights(alpha: f64, count: usize) -> Vec<f64> {
    let mut binom = 1.0;
    (0..count)
        .map(|k| {
            if k > 0 {
                binom *= (alpha - (k - 1) as f64) / k as f64;
            }
            if k % 2 == 0 {
                binom
            } else {
                -binom
            }
        })
        .collect()
}

/// Lower Hessenberg Grünwald matrix `L[i][j] = ω_{i-j+1}`.
pub fn grunwald_matrix(weights: &[f64], n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, |i, j| {
        let k = i as isize - j as isize + 1;
        if k >= 0 {
            weights[k as usize]
        } else {
            0.0
        }
    })
    .unwrap()
}

pub fn tridiag(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, |i, j| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    })
    .unwrap()
}

/// Symmetric Toeplitz matrix with first column `t`.
pub fn sym_toeplitz(t: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(t.len(), |i, j| t[i.abs_diff(j)]).unwrap()
}

/// Hankel correction with antidiagonals `t_2, .., t_{n-1}, 0, 0, 0, t_{n-1}, .., t_2`.
pub fn hankel_correction(t: &[f64]) -> DenseMatrix {
    let n = t.len();
    let at = |k: usize| t.get(k + 2).copied().unwrap_or(0.0);
    DenseMatrix::from_fn(n, |r, s| at(r + s) + at(2 * (n - 1) - r - s)).unwrap()
}

/// Natural τ matrix `T - H` of a symmetric Toeplitz matrix with first column `t`.
pub fn dense_tau(t: &[f64]) -> DenseMatrix {
    sym_toeplitz(t)
        .add_scaled(&hankel_correction(t), -1.0)
        .unwrap()
}

/// Natural bilevel τ matrix of a level-wise even 2-level Toeplitz matrix,
/// from the 1-level rule applied to every elementary term
/// `S₂(j₂) ⊗ S₁(j₁)`. `coef(j1, j2)` returns the coefficient for `j ≥ 0`.
pub fn dense_bilevel_tau(n1: usize, n2: usize, coef: impl Fn(usize, usize) -> f64) -> DenseMatrix {
    let unit = |n: usize, j: usize| -> DenseMatrix {
        let mut t = vec![0.0; n];
        t[j] = 1.0;
        dense_tau(&t)
    };
    let mut acc = DenseMatrix::zeros(n1 * n2).unwrap();
    for j2 in 0..n2 {
        let s2 = unit(n2, j2);
        for j1 in 0..n1 {
            let c = coef(j1, j2);
            if c == 0.0 {
                continue;
            }
            let term = DenseMatrix::kron(&s2, &unit(n1, j1)).unwrap();
            acc = acc.add_scaled(&term, c).unwrap();
        }
    }
    acc
}

pub fn sqrtm(a: &DenseMatrix) -> DenseMatrix {
    sym_function(a, |l| l.max(0.0).sqrt()).unwrap()
}

pub fn powm(a: &DenseMatrix, p: f64) -> DenseMatrix {
    sym_function(a, |l| l.max(0.0).powf(p)).unwrap()
}
