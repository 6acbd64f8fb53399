//! Preconditioner construction: the symbol-matching τ preconditioners for the
//! fractional diffusion systems, `τ(R_n)` for the symmetric ill-conditioned
//! case, and the natural-τ and circulant baselines.

use num_complex::Complex64;

use crate::fft::NdFft;
use crate::grid::Dims;
use crate::symbols::{fourier_coeffs_closed, SpaceScheme, SymbolKind};
use crate::tau::{
    tau_combine, tau_kron_embed, tau_pow, tau_project, tau_project_multilevel, tau_solve,
    TauOperator,
};
use crate::toeplitz::{build_toeplitz, ToeplitzOperator};
use crate::{Error, Result};

pub use crate::symbols::{FdeParams1D, FdeParams2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    Identity,
    /// τ matrix matching `|g|` (or `|f|` for the Toeplitz test problem).
    SymbolTau,
    /// `τ(R_n)` for the symmetric ill-conditioned systems.
    TauR,
    /// Natural τ projection of the coefficient matrix.
    NaturalTau,
    /// `|C_n|` built from the optimal (T. Chan) circulant.
    AbsCirculant,
    /// Absolute value of the Strang circulant.
    StrangCirculant,
}

#[derive(Debug, Clone)]
struct CirculantSpectrum {
    eigs: Vec<f64>,
    fft: NdFft,
}

#[derive(Debug, Clone)]
enum Backend {
    Identity,
    Tau(TauOperator),
    Circulant(CirculantSpectrum),
}

/// A symmetric positive definite preconditioner `M`, applied as `M⁻¹`.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    kind: PrecondKind,
    dims: Dims,
    backend: Backend,
    floored: usize,
}

impl Preconditioner {
    pub fn identity(dims: &[usize]) -> Result<Self> {
        Ok(Preconditioner {
            kind: PrecondKind::Identity,
            dims: Dims::new(dims)?,
            backend: Backend::Identity,
            floored: 0,
        })
    }

    /// Wraps a τ operator, requiring strictly positive eigenvalues.
    pub fn from_tau(kind: PrecondKind, tau: TauOperator) -> Result<Self> {
        if let Some((i, &l)) = tau.eigs().iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
            return Err(Error::NotPositiveDefinite(format!(
                "τ eigenvalue {i} is {l:e}"
            )));
        }
        Ok(Preconditioner {
            kind,
            dims: tau.dims().clone(),
            backend: Backend::Tau(tau),
            floored: 0,
        })
    }

    pub fn kind(&self) -> PrecondKind {
        self.kind
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    /// Number of circulant eigenvalues raised to the regularization floor.
    pub fn floored_eigs(&self) -> usize {
        self.floored
    }

    pub fn tau(&self) -> Option<&TauOperator> {
        match &self.backend {
            Backend::Tau(t) => Some(t),
            _ => None,
        }
    }

    /// Stored eigenvalues (τ or circulant basis); `None` for the identity.
    pub fn eigs(&self) -> Option<&[f64]> {
        match &self.backend {
            Backend::Identity => None,
            Backend::Tau(t) => Some(t.eigs()),
            Backend::Circulant(c) => Some(&c.eigs),
        }
    }

    /// `z = M⁻¹ r`.
    pub fn apply_inverse(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.dims.check_len(r.len())?;
        match &self.backend {
            Backend::Identity => Ok(r.to_vec()),
            Backend::Tau(t) => tau_solve(t, r),
            Backend::Circulant(c) => Ok(c.apply(r, |z, l| z / l)),
        }
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.dims.check_len(x.len())?;
        match &self.backend {
            Backend::Identity => Ok(x.to_vec()),
            Backend::Tau(t) => t.apply(x),
            Backend::Circulant(c) => Ok(c.apply(x, |z, l| z * l)),
        }
    }
}

impl CirculantSpectrum {
    fn apply(&self, x: &[f64], op: impl Fn(Complex64, f64) -> Complex64) -> Vec<f64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        buf.iter_mut()
            .zip(&self.eigs)
            .for_each(|(z, &l)| *z = op(*z, l));
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }
}

/// τ eigenvalues of `T(v) + T(v)ᵀ` for the scheme's `v`.
pub fn symmetric_part_eigs(scheme: SpaceScheme, alpha: f64, n: usize) -> Result<TauOperator> {
    let kind = match scheme {
        SpaceScheme::ShiftedGrunwald => SymbolKind::VAlpha { alpha },
        SpaceScheme::WeightedShifted => SymbolKind::VAlphaWsgd { alpha },
    };
    let v = fourier_coeffs_closed(&kind, &[n])?;
    let mut sym = v.reflect();
    sym.add_assign_scaled(&v, 1.0)?;
    tau_project(&build_toeplitz(sym)?)
}

/// τ eigenvalues matching `|v|²`: `(2-2cos θ)^α` for the shifted Grünwald
/// scheme, times `1 - α(2-α)(2-2cos θ)/4` for the weighted-shifted one.
pub fn modulus_sq_eigs(scheme: SpaceScheme, alpha: f64, n: usize) -> Result<TauOperator> {
    let lap = TauOperator::laplacian(n)?;
    let pow = tau_pow(&lap, alpha)?;
    Ok(match scheme {
        SpaceScheme::ShiftedGrunwald => pow,
        SpaceScheme::WeightedShifted => {
            let c = alpha * (2.0 - alpha) / 4.0;
            let weight = lap.map(|s| 1.0 - c * s);
            TauOperator::from_eigs(
                &[n],
                pow.eigs()
                    .iter()
                    .zip(weight.eigs())
                    .map(|(a, b)| a * b)
                    .collect(),
            )?
        }
    })
}

/// 1-level preconditioner
/// `P = [ν² I + ν(d₊+d₋) τ(T(v)+T(v)ᵀ) + (d₊-d₋)² T(2-2cos θ)^α + d₊d₋ τ(T(v)+T(v)ᵀ)²]^{1/2}`.
/// All four terms share the sine eigenbasis, so the square root is taken
/// eigenvalue-wise.
pub fn build_p_1d(p: &FdeParams1D) -> Result<Preconditioner> {
    p.validate()?;
    let mu = symmetric_part_eigs(p.scheme, p.alpha, p.n)?;
    let modsq = modulus_sq_eigs(p.scheme, p.alpha, p.n)?;
    let (nu, dp, dm) = (p.nu, p.d_plus, p.d_minus);
    let eigs = mu
        .eigs()
        .iter()
        .zip(modsq.eigs())
        .enumerate()
        .map(|(j, (&m, &s))| {
            let sq = nu * nu + nu * (dp + dm) * m + (dp - dm).powi(2) * s + dp * dm * m * m;
            if sq < 0.0 {
                return Err(Error::NotPositiveDefinite(format!(
                    "negative radicand {sq:e} at eigenvalue {j}"
                )));
            }
            Ok(sq.sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    Preconditioner::from_tau(
        PrecondKind::SymbolTau,
        TauOperator::from_eigs(&[p.n], eigs)?,
    )
}

/// `R_i = c_i [(d₊-d₋)² T(2-2cos θ)^α + d₊d₋ τ(T(v)+T(v)ᵀ)²]^{1/2}`, the τ
/// matrix matching `|w_i|`.
pub fn build_r_level(p: &FdeParams2D, level: usize) -> Result<TauOperator> {
    let n = p.n[level];
    let alpha = p.alpha[level];
    let (dp, dm) = (p.d_plus[level], p.d_minus[level]);
    let mu = symmetric_part_eigs(p.scheme, alpha, n)?;
    let modsq = modulus_sq_eigs(p.scheme, alpha, n)?;
    let c = p.scale(level);
    let eigs = mu
        .eigs()
        .iter()
        .zip(modsq.eigs())
        .map(|(&m, &s)| c * ((dp - dm).powi(2) * s + dp * dm * m * m).max(0.0).sqrt())
        .collect();
    TauOperator::from_eigs(&[n], eigs)
}

/// 2-level preconditioner `P = I + I ⊗ R₁ + R₂ ⊗ I`.
pub fn build_p_2d(p: &FdeParams2D) -> Result<Preconditioner> {
    p.validate()?;
    let dims = [p.n[0], p.n[1]];
    let r1 = tau_kron_embed(&build_r_level(p, 0)?, 0, &dims)?;
    let r2 = tau_kron_embed(&build_r_level(p, 1)?, 1, &dims)?;
    let id = TauOperator::scalar(&dims, 1.0)?;
    let sum = tau_combine(&[(1.0, &id), (1.0, &r1), (1.0, &r2)])?;
    Preconditioner::from_tau(PrecondKind::SymbolTau, sum)
}

/// `τ(R_n)` with `R_n = Σ_i I ⊗ l_i T(r_{α_i}) ⊗ I`, `r_α = (2-2cos θ)^{α/2}`.
pub fn build_tau_r(dims: &[usize], alphas: &[f64], weights: &[f64]) -> Result<Preconditioner> {
    if alphas.len() != dims.len() || weights.len() != dims.len() {
        return Err(Error::InvalidDims(
            "one order and weight per level required".into(),
        ));
    }
    if weights.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Domain("weights must be positive".into()));
    }
    let mut parts = Vec::with_capacity(dims.len());
    for (level, (&alpha, &n)) in alphas.iter().zip(dims).enumerate() {
        let r = build_toeplitz(fourier_coeffs_closed(&SymbolKind::RAlpha { alpha }, &[n])?)?;
        parts.push(tau_kron_embed(&tau_project(&r)?, level, dims)?);
    }
    let terms: Vec<(f64, &TauOperator)> = weights.iter().copied().zip(parts.iter()).collect();
    Preconditioner::from_tau(PrecondKind::TauR, tau_combine(&terms)?)
}

/// Preconditioner for the Toeplitz matrix generated by `(2-2cos θ)(1+iθ)`:
/// `P = [T(2-2cos θ)² + T(2-2cos θ)³]^{1/2}`, a τ matrix following
/// `√((2-2cos θ)² + (2-2cos θ)³) ≈ |f|`.
pub fn build_example1_p(n: usize) -> Result<Preconditioner> {
    let lap = TauOperator::laplacian(n)?;
    Preconditioner::from_tau(
        PrecondKind::SymbolTau,
        lap.map(|s| (s * s + s * s * s).sqrt()),
    )
}

/// Natural τ projection of a symmetric (level-wise even) Toeplitz matrix.
pub fn build_natural_tau(t: &ToeplitzOperator) -> Result<Preconditioner> {
    Preconditioner::from_tau(PrecondKind::NaturalTau, tau_project_multilevel(t)?)
}

/// Folds the Toeplitz coefficients into a circulant first column. For each
/// level, `choose(j, n)` returns the weights of `t_j` and `t_{j-n}`.
fn circulant_column(t: &ToeplitzOperator, choose: impl Fn(usize, usize) -> (f64, f64)) -> Vec<f64> {
    let dims = t.dims();
    let k = dims.levels();
    let coeffs = t.coeffs();
    (0..dims.total())
        .map(|off| {
            let j = dims.unravel(off);
            let mut acc = 0.0;
            for mask in 0..(1usize << k) {
                let mut w = 1.0;
                let mut idx = Vec::with_capacity(k);
                for (l, &jl) in j.iter().enumerate() {
                    let n = dims.level(l);
                    let (w_pos, w_neg) = choose(jl, n);
                    if mask >> l & 1 == 0 {
                        w *= w_pos;
                        idx.push(jl as isize);
                    } else {
                        w *= w_neg;
                        idx.push(jl as isize - n as isize);
                    }
                }
                if w != 0.0 {
                    acc += w * coeffs.get_re(&idx);
                }
            }
            acc
        })
        .collect()
}

/// Optimal (Frobenius-nearest) circulant first column,
/// `c_j = ((n-j) t_j + j t_{j-n}) / n` per level.
pub fn optimal_circulant_column(t: &ToeplitzOperator) -> Vec<f64> {
    circulant_column(t, |j, n| ((n - j) as f64 / n as f64, j as f64 / n as f64))
}

/// Strang circulant first column: `t_j` for `j ≤ n/2`, `t_{j-n}` otherwise.
pub fn strang_circulant_column(t: &ToeplitzOperator) -> Vec<f64> {
    circulant_column(t, |j, n| if 2 * j <= n { (1.0, 0.0) } else { (0.0, 1.0) })
}

fn abs_circulant(kind: PrecondKind, dims: &Dims, column: Vec<f64>) -> Result<Preconditioner> {
    let fft = NdFft::new(dims.as_slice());
    let mut spec: Vec<Complex64> = column.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut spec);
    let mut eigs: Vec<f64> = spec.iter().map(|z| z.norm()).collect();
    let max = eigs.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::Singular("circulant is zero".into()));
    }
    let floor = 1e-14 * max;
    let mut floored = 0;
    for l in eigs.iter_mut() {
        if *l < floor {
            *l = floor;
            floored += 1;
        }
    }
    Ok(Preconditioner {
        kind,
        dims: dims.clone(),
        backend: Backend::Circulant(CirculantSpectrum { eigs, fft }),
        floored,
    })
}

/// `|C_n| = (C_nᵀ C_n)^{1/2}` for the optimal circulant `C_n` of `T`.
/// Eigenvalues below `1e-14·max|λ|` are raised to that floor (see
/// [`Preconditioner::floored_eigs`]).
pub fn build_abs_circulant(t: &ToeplitzOperator) -> Result<Preconditioner> {
    abs_circulant(
        PrecondKind::AbsCirculant,
        t.dims(),
        optimal_circulant_column(t),
    )
}

/// Absolute value of the Strang circulant of `T`, floored like
/// [`build_abs_circulant`].
pub fn build_strang_circulant(t: &ToeplitzOperator) -> Result<Preconditioner> {
    abs_circulant(
        PrecondKind::StrangCirculant,
        t.dims(),
        strang_circulant_column(t),
    )
}

/// `z = M⁻¹ r`.
pub fn apply_inverse(m: &Preconditioner, r: &[f64]) -> Result<Vec<f64>> {
    m.apply_inverse(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::CoeffTensor;

    fn params_1d(n: usize, alpha: f64, dp: f64, dm: f64, nu: f64) -> FdeParams1D {
        FdeParams1D {
            n,
            alpha,
            d_plus: dp,
            d_minus: dm,
            nu,
            h: 1.0 / (n as f64 + 1.0),
            tau_time: 1.0,
            scheme: SpaceScheme::ShiftedGrunwald,
        }
    }

    #[test]
    fn p1d_without_diffusion_is_scaled_identity() {
        let p = build_p_1d(&params_1d(12, 1.5, 0.0, 0.0, 0.37)).unwrap();
        assert!(p.eigs().unwrap().iter().all(|&l| (l - 0.37).abs() < 1e-15));
    }

    #[test]
    fn p1d_laplacian_limit_is_perfect_square() {
        let (n, d, nu) = (15, 0.8, 0.4);
        let p = build_p_1d(&params_1d(n, 2.0, d, d, nu)).unwrap();
        let lap = TauOperator::laplacian(n).unwrap();
        for (l, s) in p.eigs().unwrap().iter().zip(lap.eigs()) {
            assert!((l - (nu + 2.0 * d * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn p1d_eigenvalues_bounded_below_by_nu() {
        for &alpha in &[1.1, 1.5, 1.9] {
            let p = build_p_1d(&params_1d(40, alpha, 1.0, 0.2, 0.3)).unwrap();
            assert!(p.eigs().unwrap().iter().all(|&l| l >= 0.3 * (1.0 - 1e-12)));
        }
    }

    #[test]
    fn p2d_without_diffusion_is_identity() {
        let p = FdeParams2D {
            n: [5, 4],
            alpha: [1.5, 1.2],
            d_plus: [0.0; 2],
            d_minus: [0.0; 2],
            h: [0.1, 0.1],
            tau_time: 0.1,
            time_weight: 1.0,
            scheme: SpaceScheme::ShiftedGrunwald,
        };
        let m = build_p_2d(&p).unwrap();
        assert!(m.eigs().unwrap().iter().all(|&l| l == 1.0));
    }

    #[test]
    fn r_level_with_equal_diffusion_keeps_only_squared_term() {
        let p = FdeParams2D {
            n: [9, 7],
            alpha: [1.4, 1.7],
            d_plus: [2.0, 0.5],
            d_minus: [2.0, 0.5],
            h: [0.1, 0.125],
            tau_time: 0.01,
            time_weight: 1.0,
            scheme: SpaceScheme::ShiftedGrunwald,
        };
        for level in 0..2 {
            let r = build_r_level(&p, level).unwrap();
            let mu = symmetric_part_eigs(p.scheme, p.alpha[level], p.n[level]).unwrap();
            for (a, m) in r.eigs().iter().zip(mu.eigs()) {
                assert!((a - p.scale(level) * p.d_plus[level] * m.abs()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tau_r_alpha_two_is_2d_laplacian() {
        let m = build_tau_r(&[6, 5], &[2.0, 2.0], &[1.0, 1.0]).unwrap();
        let l1 = TauOperator::laplacian(6).unwrap();
        let l2 = TauOperator::laplacian(5).unwrap();
        let dims = Dims::new(&[6, 5]).unwrap();
        for (off, &l) in m.eigs().unwrap().iter().enumerate() {
            let j = dims.unravel(off);
            assert!((l - (l1.eigs()[j[0]] + l2.eigs()[j[1]])).abs() < 1e-13);
        }
        assert!(build_tau_r(&[6, 5], &[2.0, 2.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn natural_tau_of_tridiagonal_is_itself() {
        let t =
            build_toeplitz(fourier_coeffs_closed(&SymbolKind::Laplacian, &[8]).unwrap()).unwrap();
        let m = build_natural_tau(&t).unwrap();
        let lap = TauOperator::laplacian(8).unwrap();
        for (a, b) in m.eigs().unwrap().iter().zip(lap.eigs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn abs_circulant_of_spd_circulant_is_itself() {
        // symmetric Toeplitz whose coefficients satisfy t_j = t_{j-n}: a circulant
        let n = 8;
        let base = [4.0, -1.0, 0.3, 0.1, 0.05, 0.1, 0.3, -1.0];
        let dims = Dims::new(&[n]).unwrap();
        let c = CoeffTensor::from_real_fn(&dims, |j| base[j[0].rem_euclid(n as isize) as usize]);
        let t = build_toeplitz(c).unwrap();
        let col = optimal_circulant_column(&t);
        for (a, b) in col.iter().zip(base) {
            assert!((a - b).abs() < 1e-14);
        }
        let m = build_abs_circulant(&t).unwrap();
        assert_eq!(m.floored_eigs(), 0);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.9).sin()).collect();
        let mx = m.apply(&x).unwrap();
        let tx = t.matvec(&x).unwrap();
        for (a, b) in mx.iter().zip(&tx) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(m.eigs().unwrap().iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn apply_inverse_round_trips() {
        let p = build_p_1d(&params_1d(10, 1.5, 1.0, 0.2, 0.5)).unwrap();
        let r: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5).ln()).collect();
        let z = apply_inverse(&p, &r).unwrap();
        let back = p.apply(&z).unwrap();
        for (a, b) in r.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        let id = Preconditioner::identity(&[10]).unwrap();
        assert_eq!(id.apply_inverse(&r).unwrap(), r);
        assert!(id.apply_inverse(&r[..9]).is_err());
    }
}
