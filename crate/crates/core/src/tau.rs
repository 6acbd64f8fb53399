//! Multilevel τ algebra: matrices `Q diag(λ) Q` with `Q` the orthonormal
//! DST-I, `Q[i, j] = √(2/(n+1)) sin(π i j / (n+1))`, tensorized over levels.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{stride, Dims};
use crate::toeplitz::ToeplitzOperator;
use crate::{Error, Result};

/// Negative eigenvalues within this fraction of the largest magnitude are
/// treated as rounding noise by [`tau_pow`].
pub const CLAMP_BAND: f64 = 1e-12;

/// Orthonormal multilevel DST-I. The transform is symmetric and orthogonal,
/// hence an involution.
#[derive(Clone)]
pub struct SineTransformPlan {
    dims: Dims,
    ffts: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for SineTransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransformPlan")
            .field("dims", &self.dims)
            .finish()
    }
}

impl SineTransformPlan {
    pub fn new(dims: &[usize]) -> Result<Self> {
        let dims = Dims::new(dims)?;
        let mut planner = FftPlanner::new();
        let ffts = dims
            .as_slice()
            .iter()
            .map(|&n| planner.plan_fft_forward(2 * (n + 1)))
            .collect();
        Ok(SineTransformPlan { dims, ffts })
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    /// `y = Q x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.dims.check_len(x.len())?;
        let mut y = x.to_vec();
        for axis in 0..self.dims.levels() {
            self.apply_axis(&mut y, axis);
        }
        Ok(y)
    }

    fn apply_axis(&self, data: &mut [f64], axis: usize) {
        let shape = self.dims.as_slice();
        let n = shape[axis];
        let s = stride(shape, axis);
        let m = 2 * (n + 1);
        let fft = &self.ffts[axis];
        let norm = (2.0 / (n as f64 + 1.0)).sqrt();
        let mut buf = vec![Complex64::default(); m];
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

        let lines: Vec<usize> = (0..data.len())
            .step_by(s * n)
            .flat_map(|block| (0..s).map(move |inner| block + inner))
            .collect();
        // two real lines per complex FFT: the odd extension of a real sequence
        // has a purely imaginary spectrum, Z = -2i S_a + 2 S_b
        for pair in lines.chunks(2) {
            let a = pair[0];
            let b = pair.get(1).copied();
            buf.iter_mut().for_each(|z| *z = Complex64::default());
            for j in 0..n {
                let va = data[a + j * s];
                let vb = b.map_or(0.0, |b| data[b + j * s]);
                buf[j + 1] = Complex64::new(va, vb);
                buf[m - 1 - j] = Complex64::new(-va, -vb);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..n {
                let z = buf[k + 1];
                data[a + k * s] = -0.5 * z.im * norm;
                if let Some(b) = b {
                    data[b + k * s] = 0.5 * z.re * norm;
                }
            }
        }
    }
}

/// `y = Q x` for the plan's dims.
pub fn dst1_apply(plan: &SineTransformPlan, x: &[f64]) -> Result<Vec<f64>> {
    plan.apply(x)
}

/// A τ matrix stored by its eigenvalues in the multilevel sine basis.
#[derive(Debug, Clone)]
pub struct TauOperator {
    eigs: Vec<f64>,
    plan: SineTransformPlan,
}

impl TauOperator {
    pub fn from_eigs(dims: &[usize], eigs: Vec<f64>) -> Result<Self> {
        let plan = SineTransformPlan::new(dims)?;
        plan.dims().check_len(eigs.len())?;
        Ok(TauOperator { eigs, plan })
    }

    /// The constant operator `c I`.
    pub fn scalar(dims: &[usize], c: f64) -> Result<Self> {
        let total = Dims::new(dims)?.total();
        Self::from_eigs(dims, vec![c; total])
    }

    /// `T_n(2 - 2cos θ)`, with eigenvalues `2 - 2cos(jπ/(n+1))`.
    pub fn laplacian(n: usize) -> Result<Self> {
        Self::from_eigs(&[n], sine_grid(n).map(|t| 2.0 - 2.0 * t.cos()).collect())
    }

    pub fn dims(&self) -> &Dims {
        self.plan.dims()
    }

    pub fn eigs(&self) -> &[f64] {
        &self.eigs
    }

    pub fn plan(&self) -> &SineTransformPlan {
        &self.plan
    }

    /// Applies `f` to every eigenvalue.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> TauOperator {
        TauOperator {
            eigs: self.eigs.iter().map(|&l| f(l)).collect(),
            plan: self.plan.clone(),
        }
    }

    /// `y = Q diag(λ) Q x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.plan.apply(x)?;
        y.iter_mut().zip(&self.eigs).for_each(|(v, l)| *v *= l);
        self.plan.apply(&y)
    }

    pub fn min_abs_eig(&self) -> f64 {
        self.eigs
            .iter()
            .map(|l| l.abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_eig(&self) -> f64 {
        self.eigs.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }
}

/// `θ_j = jπ/(n+1)`, `j = 1..n`.
pub fn sine_grid(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |j| j as f64 * PI / (n as f64 + 1.0))
}

/// Eigenvalues of the τ matrix with first column `col`, computed entrywise as
/// `(Q col) / (Q e₁)`; `(Q e₁)_j = √(2/(n+1)) sin(θ_j)` never vanishes.
fn eigs_from_first_column(plan: &SineTransformPlan, col: &[f64]) -> Result<Vec<f64>> {
    let qc = plan.apply(col)?;
    let dims = plan.dims();
    let first: Vec<Vec<f64>> = dims
        .as_slice()
        .iter()
        .map(|&n| {
            let norm = (2.0 / (n as f64 + 1.0)).sqrt();
            sine_grid(n).map(|t| norm * t.sin()).collect()
        })
        .collect();
    Ok(qc
        .iter()
        .enumerate()
        .map(|(off, &v)| {
            let idx = dims.unravel(off);
            let denom: f64 = idx.iter().zip(&first).map(|(&i, f)| f[i]).product();
            v / denom
        })
        .collect())
}

/// Natural τ projection `τ(T) = T - H(T)` of a symmetric 1-level Toeplitz
/// matrix, where `H(T)` is the Hankel matrix with antidiagonals
/// `t_2, .., t_{n-1}, 0, 0, 0, t_{n-1}, .., t_2`.
pub fn tau_project(t: &ToeplitzOperator) -> Result<TauOperator> {
    if t.dims().levels() != 1 {
        return Err(Error::Unsupported(
            "tau_project takes a 1-level operator; use tau_project_multilevel".into(),
        ));
    }
    tau_project_multilevel(t)
}

/// Level-wise natural τ projection of a multilevel Toeplitz matrix whose
/// coefficients are even in every index separately. On each level the first
/// column of the projection is `c_r = t_r - t_{r+2}` (`t_k = 0` for `k ≥ n`).
pub fn tau_project_multilevel(t: &ToeplitzOperator) -> Result<TauOperator> {
    let coeffs = t.coeffs();
    let dims = t.dims().clone();
    let k = dims.levels();
    let scale = coeffs.max_abs().max(f64::MIN_POSITIVE);
    // evenness per level: t(j) == t(j with j_l negated)
    for off in 0..coeffs.entries().len() {
        let j = coeff_index(&dims, off);
        for l in 0..k {
            let mut jr = j.clone();
            jr[l] = -jr[l];
            if (coeffs.get_re(&j) - coeffs.get_re(&jr)).abs() > 1e-12 * scale {
                return Err(Error::NotSymmetric(format!(
                    "coefficient {:?} differs from its reflection at level {}",
                    j,
                    l + 1
                )));
            }
        }
    }
    let col: Vec<f64> = (0..dims.total())
        .map(|off| {
            let r = dims.unravel(off);
            // Π_l (δ_{s_l,0} - δ_{s_l,2}) applied to t at r + s
            let mut acc = 0.0;
            for mask in 0..(1usize << k) {
                let mut j = Vec::with_capacity(k);
                let mut sign = 1.0;
                for (l, &rl) in r.iter().enumerate() {
                    if mask >> l & 1 == 1 {
                        j.push(rl as isize + 2);
                        sign = -sign;
                    } else {
                        j.push(rl as isize);
                    }
                }
                acc += sign * coeffs.get_re(&j);
            }
            acc
        })
        .collect();
    let plan = SineTransformPlan::new(dims.as_slice())?;
    let eigs = eigs_from_first_column(&plan, &col)?;
    Ok(TauOperator { eigs, plan })
}

fn coeff_index(dims: &Dims, mut off: usize) -> Vec<isize> {
    dims.as_slice()
        .iter()
        .map(|&n| {
            let ext = 2 * n - 1;
            let i = off % ext;
            off /= ext;
            i as isize - (n as isize - 1)
        })
        .collect()
}

/// Eigenvalue-wise power `λ^p`. Negative eigenvalues within
/// [`CLAMP_BAND`]`·max|λ|` are clamped to zero first.
pub fn tau_pow(op: &TauOperator, exponent: f64) -> Result<TauOperator> {
    if exponent.fract() == 0.0 {
        return Ok(op.map(|l| l.powi(exponent as i32)));
    }
    let band = CLAMP_BAND * op.max_abs_eig();
    if let Some((index, &value)) = op.eigs.iter().enumerate().find(|(_, &l)| l < -band) {
        return Err(Error::NegativeEigenvalue {
            index,
            value,
            exponent,
        });
    }
    Ok(op.map(|l| l.max(0.0).powf(exponent)))
}

/// `Σ c_i A_i` for τ operators of equal dims.
pub fn tau_combine(terms: &[(f64, &TauOperator)]) -> Result<TauOperator> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| Error::InvalidDims("empty combination".into()))?;
    let mut eigs = vec![0.0; first.eigs.len()];
    for (c, op) in terms {
        if op.dims() != first.dims() {
            return Err(Error::InvalidDims(format!(
                "τ operators differ in dims: {:?} vs {:?}",
                first.dims(),
                op.dims()
            )));
        }
        eigs.iter_mut().zip(&op.eigs).for_each(|(e, l)| *e += c * l);
    }
    Ok(TauOperator {
        eigs,
        plan: first.plan.clone(),
    })
}

/// `I ⊗ .. ⊗ A ⊗ .. ⊗ I` with the 1-level `A` at the 0-based `position`.
pub fn tau_kron_embed(op1d: &TauOperator, position: usize, dims: &[usize]) -> Result<TauOperator> {
    let d = Dims::new(dims)?;
    if op1d.dims().levels() != 1
        || position >= d.levels()
        || d.level(position) != op1d.dims().level(0)
    {
        return Err(Error::InvalidDims(
            "embedding position or size mismatch".into(),
        ));
    }
    let eigs = (0..d.total())
        .map(|off| op1d.eigs[d.unravel(off)[position]])
        .collect();
    TauOperator::from_eigs(dims, eigs)
}

/// `z = A⁻¹ r`.
pub fn tau_solve(op: &TauOperator, r: &[f64]) -> Result<Vec<f64>> {
    if let Some(index) = op.eigs.iter().position(|&l| l == 0.0) {
        return Err(Error::Singular(format!("τ eigenvalue {index} is zero")));
    }
    let mut y = op.plan.apply(r)?;
    y.iter_mut().zip(&op.eigs).for_each(|(v, l)| *v /= l);
    op.plan.apply(&y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{fourier_coeffs_closed, SymbolKind};
    use crate::toeplitz::build_toeplitz;

    #[test]
    fn dst_is_an_involution() {
        for dims in [vec![1], vec![5], vec![8], vec![7, 4], vec![3, 2, 5]] {
            let plan = SineTransformPlan::new(&dims).unwrap();
            let len = plan.dims().total();
            let x: Vec<f64> = (0..len).map(|i| ((i * 7 + 3) as f64).sin()).collect();
            let y = plan.apply(&plan.apply(&x).unwrap()).unwrap();
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-13, "{dims:?}");
            }
        }
    }

    #[test]
    fn dst_of_first_unit_vector() {
        let plan = SineTransformPlan::new(&[5]).unwrap();
        let y = plan.apply(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        for (j, v) in y.iter().enumerate() {
            let want = (1.0f64 / 3.0).sqrt() * (PI * (j + 1) as f64 / 6.0).sin();
            assert!((v - want).abs() < 1e-15);
        }
    }

    #[test]
    fn laplacian_projection_is_exact() {
        for n in [1, 2, 3, 10, 31] {
            let t = build_toeplitz(fourier_coeffs_closed(&SymbolKind::Laplacian, &[n]).unwrap())
                .unwrap();
            let tau = tau_project(&t).unwrap();
            for (l, th) in tau.eigs().iter().zip(sine_grid(n)) {
                assert!((l - (2.0 - 2.0 * th.cos())).abs() < 1e-13, "n={n}");
            }
        }
    }

    #[test]
    fn project_rejects_nonsymmetric() {
        let t = build_toeplitz(
            fourier_coeffs_closed(&SymbolKind::VAlpha { alpha: 1.5 }, &[6]).unwrap(),
        )
        .unwrap();
        assert!(matches!(tau_project(&t), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn pow_sqrt_round_trip_and_negative_error() {
        let op = TauOperator::laplacian(9).unwrap();
        let back = tau_pow(&tau_pow(&op, 0.5).unwrap(), 2.0).unwrap();
        for (a, b) in back.eigs().iter().zip(op.eigs()) {
            assert!((a - b).abs() < 1e-12);
        }
        let same = tau_pow(&op, 1.0).unwrap();
        assert_eq!(same.eigs(), op.eigs());
        let neg = TauOperator::from_eigs(&[3], vec![1.0, -0.5, 2.0]).unwrap();
        assert!(matches!(
            tau_pow(&neg, 0.5),
            Err(Error::NegativeEigenvalue { index: 1, .. })
        ));
        let tiny = TauOperator::from_eigs(&[3], vec![1.0, -1e-14, 2.0]).unwrap();
        assert_eq!(tau_pow(&tiny, 0.5).unwrap().eigs()[1], 0.0);
    }

    #[test]
    fn combine_and_embed() {
        let a = TauOperator::laplacian(4).unwrap();
        let b = TauOperator::scalar(&[4], 3.0).unwrap();
        assert_eq!(
            tau_combine(&[(1.0, &a), (0.0, &b)]).unwrap().eigs(),
            a.eigs()
        );
        let twice = tau_combine(&[(1.0, &a), (1.0, &a)]).unwrap();
        for (x, y) in twice.eigs().iter().zip(a.eigs()) {
            assert_eq!(*x, 2.0 * y);
        }
        let c = TauOperator::scalar(&[5], 1.0).unwrap();
        assert!(tau_combine(&[(1.0, &a), (1.0, &c)]).is_err());

        let e = tau_kron_embed(&a, 0, &[4, 2]).unwrap();
        assert_eq!(&e.eigs()[..4], a.eigs());
        assert_eq!(&e.eigs()[4..], a.eigs());
        assert_eq!(tau_kron_embed(&a, 0, &[4]).unwrap().eigs(), a.eigs());
    }

    #[test]
    fn solve_inverts_apply_and_detects_singular() {
        let op = TauOperator::from_eigs(&[6, 3], (0..18).map(|i| 1.0 + i as f64 * 0.3).collect())
            .unwrap();
        let r: Vec<f64> = (0..18).map(|i| (i as f64).cos()).collect();
        let z = tau_solve(&op, &r).unwrap();
        let back = op.apply(&z).unwrap();
        for (a, b) in r.iter().zip(&back) {
            assert!((a - b).abs() < 1e-11);
        }
        let id = TauOperator::scalar(&[6, 3], 1.0).unwrap();
        let z = tau_solve(&id, &r).unwrap();
        for (a, b) in r.iter().zip(&z) {
            assert!((a - b).abs() < 1e-13);
        }
        let sing = TauOperator::from_eigs(&[2], vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            tau_solve(&sing, &[1.0, 1.0]),
            Err(Error::Singular(_))
        ));
    }
}
