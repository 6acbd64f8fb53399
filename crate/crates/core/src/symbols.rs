//! Generating functions (symbols) and their Fourier coefficients.
//!
//! The Toeplitz matrix generated by `f` has entries `T_n(f)[r, s] = f̂_{r-s}`
//! with `f̂_j = (2π)^{-k} ∫ f(θ) e^{-i j·θ} dθ` over `[-π, π]^k`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::coefficients::{frac_centered_coeffs, grunwald_coeffs};
use crate::fde::wsgd_coeffs;
use crate::fft::NdFft;
use crate::grid::Dims;
use crate::{Error, Result};

/// Spatial discretization of the fractional derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpaceScheme {
    /// First-order shifted Grünwald–Letnikov formula.
    #[default]
    ShiftedGrunwald,
    /// Second-order weighted and shifted Grünwald formula, `(p, q) = (1, 0)`.
    WeightedShifted,
}

/// One-dimensional fractional diffusion parameters. The system matrix is
/// `ν I + d₊ T(v) + d₋ T(v)ᵀ` with `ν = h^α / (w τ)`, where `w` is the time
/// weight of the stepper (1 for backward Euler, 1/2 for Crank–Nicolson).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdeParams1D {
    pub n: usize,
    pub alpha: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub nu: f64,
    pub h: f64,
    pub tau_time: f64,
    pub scheme: SpaceScheme,
}

impl FdeParams1D {
    /// Backward-Euler parameters on `(a, b)` with `n` interior nodes.
    pub fn new(
        n: usize,
        alpha: f64,
        d_plus: f64,
        d_minus: f64,
        interval: (f64, f64),
        tau_time: f64,
    ) -> Result<Self> {
        let h = (interval.1 - interval.0) / (n as f64 + 1.0);
        let p = FdeParams1D {
            n,
            alpha,
            d_plus,
            d_minus,
            nu: h.powf(alpha) / tau_time,
            h,
            tau_time,
            scheme: SpaceScheme::ShiftedGrunwald,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidDims("n must be positive".into()));
        }
        check_order(self.alpha)?;
        check_diffusion(self.d_plus, self.d_minus)?;
        if !(self.nu > 0.0) || !(self.h > 0.0) || !(self.tau_time > 0.0) {
            return Err(Error::Domain("ν, h and τ must be positive".into()));
        }
        Ok(())
    }
}

/// Two-dimensional fractional diffusion parameters. The system matrix is
/// `I + I ⊗ A₁ + A₂ ⊗ I` with `A_i = c_i [d_{i,+} T(v) + d_{i,-} T(v)ᵀ]` and
/// `c_i = w τ / h_i^{α_i}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdeParams2D {
    pub n: [usize; 2],
    pub alpha: [f64; 2],
    pub d_plus: [f64; 2],
    pub d_minus: [f64; 2],
    pub h: [f64; 2],
    pub tau_time: f64,
    /// 1 for backward Euler, 1/2 for Crank–Nicolson.
    pub time_weight: f64,
    pub scheme: SpaceScheme,
}

impl FdeParams2D {
    pub fn scale(&self, level: usize) -> f64 {
        self.time_weight * self.tau_time / self.h[level].powf(self.alpha[level])
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..2 {
            if self.n[i] == 0 {
                return Err(Error::InvalidDims("n must be positive".into()));
            }
            check_order(self.alpha[i])?;
            check_diffusion(self.d_plus[i], self.d_minus[i])?;
            if !(self.h[i] > 0.0) {
                return Err(Error::Domain("space steps must be positive".into()));
            }
        }
        if !(self.tau_time > 0.0) || !(self.time_weight > 0.0) {
            return Err(Error::Domain("time step must be positive".into()));
        }
        Ok(())
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!(
            "fractional order must lie in (1, 2], got {alpha}"
        )));
    }
    Ok(())
}

fn check_diffusion(dp: f64, dm: f64) -> Result<()> {
    if !(dp >= 0.0 && dm >= 0.0) {
        return Err(Error::Domain(format!(
            "diffusion constants must be nonnegative, got ({dp}, {dm})"
        )));
    }
    Ok(())
}

/// Fourier coefficients of a `k`-level symbol, indexed by
/// `j_i ∈ [-(n_i - 1), n_i - 1]` per level (level 1 fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    dims: Dims,
    data: Vec<Complex64>,
}

impl CoeffTensor {
    pub fn zeros(dims: &Dims) -> Self {
        let len = dims.as_slice().iter().map(|&n| 2 * n - 1).product();
        CoeffTensor {
            dims: dims.clone(),
            data: vec![Complex64::default(); len],
        }
    }

    pub fn from_fn(dims: &Dims, mut f: impl FnMut(&[isize]) -> Complex64) -> Self {
        let mut t = Self::zeros(dims);
        let shape = t.shape();
        let mut idx = vec![0isize; dims.levels()];
        for (off, slot) in t.data.iter_mut().enumerate() {
            let mut rem = off;
            for (l, &ext) in shape.iter().enumerate() {
                idx[l] = (rem % ext) as isize - (dims.level(l) as isize - 1);
                rem /= ext;
            }
            *slot = f(&idx);
        }
        t
    }

    pub fn from_real_fn(dims: &Dims, mut f: impl FnMut(&[isize]) -> f64) -> Self {
        Self::from_fn(dims, |j| Complex64::new(f(j), 0.0))
    }

    /// One-level tensor from entries at `j = -(n-1) ..= n-1`.
    pub fn from_vec_1d(values: Vec<Complex64>) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(Error::InvalidDims(
                "1-level coefficient vector must have odd length".into(),
            ));
        }
        let n = values.len().div_ceil(2);
        Ok(CoeffTensor {
            dims: Dims::new(&[n])?,
            data: values,
        })
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    /// Per-level extents `2 n_i - 1`.
    pub fn shape(&self) -> Vec<usize> {
        self.dims.as_slice().iter().map(|&n| 2 * n - 1).collect()
    }

    fn position(&self, j: &[isize]) -> Option<usize> {
        let mut off = 0usize;
        for l in (0..self.dims.levels()).rev() {
            let n = self.dims.level(l) as isize;
            if j[l] <= -n || j[l] >= n {
                return None;
            }
            off = off * (2 * n as usize - 1) + (j[l] + n - 1) as usize;
        }
        Some(off)
    }

    /// Coefficient at multi-index `j`; zero outside the stored range.
    pub fn get(&self, j: &[isize]) -> Complex64 {
        self.position(j)
            .map_or(Complex64::default(), |p| self.data[p])
    }

    pub fn set(&mut self, j: &[isize], value: Complex64) {
        let p = self.position(j).expect("coefficient index out of range");
        self.data[p] = value;
    }

    pub fn get_re(&self, j: &[isize]) -> f64 {
        self.get(j).re
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part relative to the largest entry.
    pub fn imag_ratio(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale
    }

    /// Drops imaginary parts, failing if any exceeds `tol` times the entry scale.
    pub fn into_real(mut self, tol: f64) -> Result<Self> {
        let ratio = self.imag_ratio();
        if ratio > tol {
            return Err(Error::Unsupported(format!(
                "coefficients are not real (imag/max = {ratio:e})"
            )));
        }
        self.data.iter_mut().for_each(|z| z.im = 0.0);
        Ok(self)
    }

    /// Coefficients of `f(-θ)`, i.e. `j ↦ -j` on every level.
    pub fn reflect(&self) -> Self {
        let len = self.data.len();
        CoeffTensor {
            dims: self.dims.clone(),
            data: (0..len).map(|p| self.data[len - 1 - p]).collect(),
        }
    }

    /// True when the entry at `j` equals the entry at `-j` within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let r = self.reflect();
        self.data
            .iter()
            .zip(&r.data)
            .all(|(a, b)| (a - b).norm() <= tol * scale)
    }

    pub fn scaled(&self, c: f64) -> Self {
        CoeffTensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &CoeffTensor, c: f64) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::InvalidDims(
                "coefficient tensors differ in dims".into(),
            ));
        }
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += b * c);
        Ok(())
    }

    /// Tensor product of one-level coefficient vectors, level 1 first.
    pub fn outer(factors: &[CoeffTensor]) -> Result<Self> {
        if factors.iter().any(|f| f.dims.levels() != 1) {
            return Err(Error::InvalidDims(
                "outer product takes 1-level factors".into(),
            ));
        }
        let dims = Dims::new(&factors.iter().map(|f| f.dims.level(0)).collect::<Vec<_>>())?;
        Ok(Self::from_fn(&dims, |j| {
            factors.iter().zip(j).map(|(f, &jl)| f.get(&[jl])).product()
        }))
    }

    /// Embeds a 1-level tensor at `position` (0-based) of a multilevel tensor,
    /// the coefficient structure of `I ⊗ .. ⊗ T ⊗ .. ⊗ I`.
    pub fn embed_level(one: &CoeffTensor, position: usize, dims: &Dims) -> Result<Self> {
        if one.dims.levels() != 1
            || position >= dims.levels()
            || dims.level(position) != one.dims.level(0)
        {
            return Err(Error::InvalidDims(
                "embedding position or size mismatch".into(),
            ));
        }
        Ok(Self::from_fn(dims, |j| {
            if j.iter()
                .enumerate()
                .all(|(l, &jl)| l == position || jl == 0)
            {
                one.get(&[j[position]])
            } else {
                Complex64::default()
            }
        }))
    }
}

type Evaluator = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A product of 1-level symbols, one per level, with a scalar weight.
#[derive(Clone)]
pub struct ProductTerm {
    pub weight: f64,
    pub factors: Vec<Symbol>,
}

/// Known symbol families, used for closed-form coefficient assembly.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind {
    /// `2 - 2 cos θ`.
    Laplacian,
    /// `v_α(θ) = -e^{-iθ} (1 - e^{iθ})^α`.
    VAlpha { alpha: f64 },
    /// `-[(α/2) e^{-iθ} + (2-α)/2] (1 - e^{iθ})^α`, the weighted-shifted analogue of `v_α`.
    VAlphaWsgd { alpha: f64 },
    /// `ν + d₊ v + d₋ conj(v)`.
    G1d(FdeParams1D),
    /// `1 + w₁(θ₁) + w₂(θ₂)`.
    G2d(FdeParams2D),
    /// `(2 - 2 cos θ)^{α/2}`.
    RAlpha { alpha: f64 },
    /// `(2 - 2 cos θ)(1 + iθ)`.
    Example1,
    /// `p_{α₁}(θ₁) + p_{α₂}(θ₂) - p₁(θ₁) p₁(θ₂)`.
    Example4 { alpha1: f64, alpha2: f64 },
    /// `Σ l_i |θ_i|^{α_i}`.
    QAlpha { alphas: Vec<f64>, weights: Vec<f64> },
    /// `|θ|^a`.
    AbsPower { exponent: f64 },
}

/// A generating function on `[-π, π]^k`.
#[derive(Clone)]
pub struct Symbol {
    levels: usize,
    real_coeffs: bool,
    even: bool,
    eval: Arc<Evaluator>,
    kind: Option<SymbolKind>,
    separable: Option<Vec<ProductTerm>>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("levels", &self.levels)
            .field("real_coeffs", &self.real_coeffs)
            .field("even", &self.even)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Symbol {
    pub fn new(
        levels: usize,
        real_coeffs: bool,
        even: bool,
        eval: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Symbol {
            levels,
            real_coeffs,
            even,
            eval: Arc::new(eval),
            kind: None,
            separable: None,
        }
    }

    pub fn real_1d(even: bool, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Symbol::new(1, true, even, move |t| Complex64::new(f(t[0]), 0.0))
    }

    /// Sum of products of 1-level symbols. The coefficients of such a symbol
    /// are combinations of 1-level coefficient vectors.
    pub fn separable(terms: Vec<ProductTerm>) -> Result<Self> {
        let levels = terms.first().map_or(0, |t| t.factors.len());
        if levels == 0
            || terms
                .iter()
                .any(|t| t.factors.len() != levels || t.factors.iter().any(|f| f.levels != 1))
        {
            return Err(Error::InvalidDims(
                "separable terms need one 1-level factor per level".into(),
            ));
        }
        let real_coeffs = terms
            .iter()
            .all(|t| t.factors.iter().all(|f| f.real_coeffs));
        let even = terms.iter().all(|t| t.factors.iter().all(|f| f.even));
        let captured = terms.clone();
        let mut s = Symbol::new(levels, real_coeffs, even, move |theta| {
            captured
                .iter()
                .map(|t| {
                    t.factors
                        .iter()
                        .zip(theta)
                        .map(|(f, &th)| f.eval(&[th]))
                        .product::<Complex64>()
                        * t.weight
                })
                .sum()
        });
        s.separable = Some(terms);
        Ok(s)
    }

    pub fn from_kind(kind: SymbolKind) -> Result<Self> {
        let mut s = match kind.clone() {
            SymbolKind::Laplacian => Symbol::real_1d(true, |t| 2.0 - 2.0 * t.cos()),
            SymbolKind::VAlpha { alpha } => {
                check_order(alpha)?;
                Symbol::new(1, true, false, move |t| eval_v_alpha(alpha, t[0]))
            }
            SymbolKind::VAlphaWsgd { alpha } => {
                check_order(alpha)?;
                Symbol::new(1, true, false, move |t| eval_v_alpha_wsgd(alpha, t[0]))
            }
            SymbolKind::G1d(p) => {
                p.validate()?;
                let even = p.d_plus == p.d_minus;
                Symbol::new(1, true, even, move |t| eval_g_1d_params(&p, t[0]))
            }
            SymbolKind::G2d(p) => {
                p.validate()?;
                Symbol::new(2, true, false, move |t| eval_g_2d(&p, [t[0], t[1]]))
            }
            SymbolKind::RAlpha { alpha } => {
                check_order(alpha)?;
                Symbol::real_1d(true, move |t| (2.0 - 2.0 * t.cos()).powf(alpha / 2.0))
            }
            SymbolKind::Example1 => Symbol::new(1, true, false, |t| {
                let th = t[0];
                Complex64::new(1.0, th) * (2.0 - 2.0 * th.cos())
            }),
            SymbolKind::AbsPower { exponent } => {
                Symbol::real_1d(true, move |t| t.abs().powf(exponent))
            }
            SymbolKind::Example4 { alpha1, alpha2 } => {
                let p = |a: f64| Symbol::real_1d(true, move |t| plateau_power(a, t));
                let one = || Symbol::real_1d(true, |_| 1.0);
                Symbol::separable(vec![
                    ProductTerm {
                        weight: 1.0,
                        factors: vec![p(alpha1), one()],
                    },
                    ProductTerm {
                        weight: 1.0,
                        factors: vec![one(), p(alpha2)],
                    },
                    ProductTerm {
                        weight: -1.0,
                        factors: vec![p(1.0), p(1.0)],
                    },
                ])?
            }
            SymbolKind::QAlpha { alphas, weights } => {
                if alphas.len() != weights.len() || alphas.is_empty() {
                    return Err(Error::InvalidDims("q_α needs one weight per level".into()));
                }
                if weights.iter().any(|&l| !(l > 0.0)) {
                    return Err(Error::Domain("q_α weights must be positive".into()));
                }
                let k = alphas.len();
                let terms = (0..k)
                    .map(|i| ProductTerm {
                        weight: weights[i],
                        factors: (0..k)
                            .map(|l| {
                                if l == i {
                                    let a = alphas[i];
                                    Symbol::real_1d(true, move |t| t.abs().powf(a))
                                } else {
                                    Symbol::real_1d(true, |_| 1.0)
                                }
                            })
                            .collect(),
                    })
                    .collect();
                Symbol::separable(terms)?
            }
        };
        s.kind = Some(kind);
        Ok(s)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn real_coeffs(&self) -> bool {
        self.real_coeffs
    }

    pub fn even(&self) -> bool {
        self.even
    }

    pub fn kind(&self) -> Option<&SymbolKind> {
        self.kind.as_ref()
    }

    pub fn eval(&self, theta: &[f64]) -> Complex64 {
        debug_assert_eq!(theta.len(), self.levels);
        (self.eval)(theta)
    }
}

/// `v_α(θ) = -e^{-iθ} (1 - e^{iθ})^α` on the principal branch, with `v_α(0) = 0`.
pub fn eval_v_alpha(alpha: f64, theta: f64) -> Complex64 {
    if theta == 0.0 {
        return Complex64::default();
    }
    let z = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, theta);
    -Complex64::from_polar(1.0, -theta) * (z.ln() * alpha).exp()
}

/// Weighted-shifted analogue of [`eval_v_alpha`].
pub fn eval_v_alpha_wsgd(alpha: f64, theta: f64) -> Complex64 {
    if theta == 0.0 {
        return Complex64::default();
    }
    let z = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, theta);
    let weight = Complex64::from_polar(alpha / 2.0, -theta) + (2.0 - alpha) / 2.0;
    -weight * (z.ln() * alpha).exp()
}

fn eval_v(scheme: SpaceScheme, alpha: f64, theta: f64) -> Complex64 {
    match scheme {
        SpaceScheme::ShiftedGrunwald => eval_v_alpha(alpha, theta),
        SpaceScheme::WeightedShifted => eval_v_alpha_wsgd(alpha, theta),
    }
}

/// `g(θ) = ν + d₊ v_α(θ) + d₋ conj(v_α(θ))`.
pub fn eval_g_1d(nu: f64, d_plus: f64, d_minus: f64, alpha: f64, theta: f64) -> Complex64 {
    let v = eval_v_alpha(alpha, theta);
    nu + v * d_plus + v.conj() * d_minus
}

fn eval_g_1d_params(p: &FdeParams1D, theta: f64) -> Complex64 {
    let v = eval_v(p.scheme, p.alpha, theta);
    p.nu + v * p.d_plus + v.conj() * p.d_minus
}

/// `|g(θ)|` through the expansion
/// `ν² + ν(d₊+d₋)(v+v̄) + (d₊-d₋)²(2-2cos θ)^α + d₊d₋(v+v̄)²`.
pub fn eval_abs_g_1d(nu: f64, d_plus: f64, d_minus: f64, alpha: f64, theta: f64) -> f64 {
    let two_re_v = 2.0 * eval_v_alpha(alpha, theta).re;
    let s = (2.0 - 2.0 * theta.cos()).max(0.0);
    let sq = nu * nu
        + nu * (d_plus + d_minus) * two_re_v
        + (d_plus - d_minus).powi(2) * s.powf(alpha)
        + d_plus * d_minus * two_re_v * two_re_v;
    sq.max(0.0).sqrt()
}

/// `w_i(θ) = c_i [d_{i,+} v(θ) + d_{i,-} conj(v(θ))]`.
pub fn eval_w(p: &FdeParams2D, level: usize, theta: f64) -> Complex64 {
    let v = eval_v(p.scheme, p.alpha[level], theta);
    (v * p.d_plus[level] + v.conj() * p.d_minus[level]) * p.scale(level)
}

/// `g(θ) = 1 + w₁(θ₁) + w₂(θ₂)`.
pub fn eval_g_2d(p: &FdeParams2D, theta: [f64; 2]) -> Complex64 {
    1.0 + eval_w(p, 0, theta[0]) + eval_w(p, 1, theta[1])
}

/// `p_a(t) = |t|^a` for `|t| < π/2`, and 1 otherwise.
pub fn plateau_power(a: f64, t: f64) -> f64 {
    if t.abs() < PI / 2.0 {
        t.abs().powf(a)
    } else {
        1.0
    }
}

pub fn eval_example4_symbol(alpha1: f64, alpha2: f64, theta: [f64; 2]) -> f64 {
    plateau_power(alpha1, theta[0]) + plateau_power(alpha2, theta[1])
        - plateau_power(1.0, theta[0]) * plateau_power(1.0, theta[1])
}

/// `q_α(θ) = Σ l_i |θ_i|^{α_i}`.
pub fn eval_q_alpha(alphas: &[f64], weights: &[f64], theta: &[f64]) -> f64 {
    alphas
        .iter()
        .zip(weights)
        .zip(theta)
        .map(|((a, l), t)| l * t.abs().powf(*a))
        .sum()
}

/// Coefficients of `v` at `j = -(n-1) ..= n-1`: `-w_{j+1}` for `j ≥ -1`, else 0,
/// where `w` is the Grünwald or weighted-shifted weight sequence.
fn v_coeffs_1d(scheme: SpaceScheme, alpha: f64, n: usize) -> Result<Vec<f64>> {
    let weights = match scheme {
        SpaceScheme::ShiftedGrunwald => grunwald_coeffs(alpha, n + 1)?.values,
        SpaceScheme::WeightedShifted => wsgd_coeffs(alpha, n + 1)?,
    };
    let ni = n as isize;
    Ok((-(ni - 1)..ni)
        .map(|j| {
            if j >= -1 {
                -weights[(j + 1) as usize]
            } else {
                0.0
            }
        })
        .collect())
}

fn real_1d_tensor(values: Vec<f64>) -> Result<CoeffTensor> {
    CoeffTensor::from_vec_1d(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
}

/// `c (d₊ v_j + d₋ v_{-j})` as a 1-level tensor.
fn w_coeffs_1d(
    scheme: SpaceScheme,
    alpha: f64,
    d_plus: f64,
    d_minus: f64,
    c: f64,
    n: usize,
) -> Result<CoeffTensor> {
    let v = v_coeffs_1d(scheme, alpha, n)?;
    let len = v.len();
    real_1d_tensor(
        (0..len)
            .map(|p| c * (d_plus * v[p] + d_minus * v[len - 1 - p]))
            .collect(),
    )
}

/// Exact coefficient tensor of a known symbol family, without quadrature.
pub fn fourier_coeffs_closed(kind: &SymbolKind, dims: &[usize]) -> Result<CoeffTensor> {
    let dims = Dims::new(dims)?;
    let need_levels = |k: usize| -> Result<()> {
        if dims.levels() != k {
            return Err(Error::InvalidDims(format!(
                "symbol has {k} level(s), dims have {}",
                dims.levels()
            )));
        }
        Ok(())
    };
    match kind {
        SymbolKind::Laplacian => {
            need_levels(1)?;
            Ok(CoeffTensor::from_real_fn(&dims, |j| match j[0].abs() {
                0 => 2.0,
                1 => -1.0,
                _ => 0.0,
            }))
        }
        SymbolKind::VAlpha { alpha } => {
            need_levels(1)?;
            check_order(*alpha)?;
            real_1d_tensor(v_coeffs_1d(
                SpaceScheme::ShiftedGrunwald,
                *alpha,
                dims.level(0),
            )?)
        }
        SymbolKind::VAlphaWsgd { alpha } => {
            need_levels(1)?;
            check_order(*alpha)?;
            real_1d_tensor(v_coeffs_1d(
                SpaceScheme::WeightedShifted,
                *alpha,
                dims.level(0),
            )?)
        }
        SymbolKind::G1d(p) => {
            need_levels(1)?;
            p.validate()?;
            let mut t = w_coeffs_1d(p.scheme, p.alpha, p.d_plus, p.d_minus, 1.0, dims.level(0))?;
            t.set(&[0], t.get(&[0]) + p.nu);
            Ok(t)
        }
        SymbolKind::G2d(p) => {
            need_levels(2)?;
            p.validate()?;
            let mut t = CoeffTensor::zeros(&dims);
            t.set(&[0, 0], Complex64::new(1.0, 0.0));
            for level in 0..2 {
                let w = w_coeffs_1d(
                    p.scheme,
                    p.alpha[level],
                    p.d_plus[level],
                    p.d_minus[level],
                    p.scale(level),
                    dims.level(level),
                )?;
                t.add_assign_scaled(&CoeffTensor::embed_level(&w, level, &dims)?, 1.0)?;
            }
            Ok(t)
        }
        SymbolKind::RAlpha { alpha } => {
            need_levels(1)?;
            let rho = frac_centered_coeffs(*alpha, dims.level(0))?.values;
            Ok(CoeffTensor::from_real_fn(&dims, |j| {
                rho[j[0].unsigned_abs()]
            }))
        }
        SymbolKind::Example1 => {
            need_levels(1)?;
            // iθ has coefficients -(-1)^j / j (j ≠ 0); multiplying by 2 - 2cos θ
            // convolves them with the stencil (-1, 2, -1).
            let b = |j: isize| -> f64 {
                if j == 0 {
                    0.0
                } else {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    -sign / j as f64
                }
            };
            Ok(CoeffTensor::from_real_fn(&dims, |j| {
                let j = j[0];
                let lap = match j.abs() {
                    0 => 2.0,
                    1 => -1.0,
                    _ => 0.0,
                };
                lap + 2.0 * b(j) - b(j - 1) - b(j + 1)
            }))
        }
        other => Err(Error::Unsupported(format!(
            "no closed-form coefficients for {other:?}"
        ))),
    }
}

/// Default quadrature grid: `oversample · 2 · max n_i` points per level,
/// rounded up to a power of two, at least `2^14` for 1-level symbols.
pub fn quadrature_points(n: usize, oversample: usize, one_level: bool) -> usize {
    let base = (oversample * 2 * n).next_power_of_two();
    if one_level {
        base.max(1 << 14)
    } else {
        base
    }
}

/// Default oversampling factor for [`fourier_coeffs_numeric`].
pub const DEFAULT_OVERSAMPLE: usize = 16;

/// Fourier coefficients by midpoint quadrature of symbol samples, evaluated
/// with one FFT per level. Separable symbols are reduced to 1-level
/// quadratures.
pub fn fourier_coeffs_numeric(
    symbol: &Symbol,
    dims: &[usize],
    oversample: usize,
) -> Result<CoeffTensor> {
    let dims = Dims::new(dims)?;
    if dims.levels() != symbol.levels {
        return Err(Error::InvalidDims(
            "symbol and dims disagree on levels".into(),
        ));
    }
    if oversample < 8 {
        return Err(Error::Domain(format!(
            "oversample must be at least 8, got {oversample}"
        )));
    }
    if let Some(terms) = &symbol.separable {
        let mut total = CoeffTensor::zeros(&dims);
        for term in terms {
            let factors = term
                .factors
                .iter()
                .zip(dims.as_slice())
                .map(|(f, &n)| fourier_coeffs_numeric(f, &[n], oversample))
                .collect::<Result<Vec<_>>>()?;
            total.add_assign_scaled(&CoeffTensor::outer(&factors)?, term.weight)?;
        }
        return Ok(total);
    }
    let one_level = dims.levels() == 1;
    let grid: Vec<usize> = dims
        .as_slice()
        .iter()
        .map(|&n| quadrature_points(n, oversample, one_level))
        .collect();
    let total: usize = grid.iter().product();
    let mut samples = vec![Complex64::default(); total];
    let mut theta = vec![0.0; grid.len()];
    for (off, slot) in samples.iter_mut().enumerate() {
        let mut rem = off;
        for (l, &m) in grid.iter().enumerate() {
            let i = rem % m;
            rem /= m;
            theta[l] = -PI + (i as f64 + 0.5) * 2.0 * PI / m as f64;
        }
        *slot = symbol.eval(&theta);
    }
    NdFft::new(&grid).forward(&mut samples);
    let scale = 1.0 / total as f64;
    let coeffs = CoeffTensor::from_fn(&dims, |j| {
        // f̂_j ≈ (1/M) Σ_m f(θ_m) e^{-i j θ_m},  θ_m = -π + (m + 1/2) 2π/M
        let mut off = 0usize;
        let mut phase = 0.0;
        for l in (0..grid.len()).rev() {
            let m = grid[l] as isize;
            off = off * grid[l] + j[l].rem_euclid(m) as usize;
            phase += j[l] as f64 * (PI - PI / m as f64);
        }
        samples[off] * Complex64::from_polar(scale, phase)
    });
    if symbol.real_coeffs {
        return coeffs.into_real(1e-10);
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v_alpha_special_values() {
        for i in 0..1000 {
            let t = -PI + 2.0 * PI * i as f64 / 999.0;
            let v = eval_v_alpha(2.0, t);
            assert!((v - Complex64::new(2.0 - 2.0 * t.cos(), 0.0)).norm() < 1e-13);
        }
        assert_eq!(eval_v_alpha(1.5, 0.0), Complex64::default());
        let v = eval_v_alpha(1.5, PI);
        assert!((v - Complex64::new(2f64.powf(1.5), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn g_1d_properties() {
        assert!((eval_g_1d(0.7, 1.0, 0.3, 1.4, 0.0) - 0.7).norm() < 1e-15);
        for i in 0..50 {
            let t = -3.0 + 0.12 * i as f64;
            assert!(eval_g_1d(0.2, 0.8, 0.8, 1.6, t).im.abs() < 1e-14);
            let g = eval_g_1d(0.4, 1.0, 0.2, 1.5, t);
            let a = eval_abs_g_1d(0.4, 1.0, 0.2, 1.5, t);
            assert!((g.norm() - a).abs() <= 1e-12 * a.max(1e-300));
        }
        assert!((eval_abs_g_1d(0.9, 2.0, 1.0, 1.3, 0.0) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn g_2d_at_origin_and_laplacian_limit() {
        let p = FdeParams2D {
            n: [8, 8],
            alpha: [2.0, 2.0],
            d_plus: [1.0, 0.5],
            d_minus: [1.0, 0.5],
            h: [0.1, 0.2],
            tau_time: 0.01,
            time_weight: 1.0,
            scheme: SpaceScheme::ShiftedGrunwald,
        };
        assert!((eval_g_2d(&p, [0.0, 0.0]) - 1.0).norm() < 1e-15);
        let (t1, t2) = (0.7, -2.1);
        let c1 = p.scale(0) * 2.0;
        let c2 = p.scale(1) * 1.0;
        let want = 1.0 + c1 * (2.0 - 2.0 * f64::cos(t1)) + c2 * (2.0 - 2.0 * f64::cos(t2));
        assert!((eval_g_2d(&p, [t1, t2]) - want).norm() < 1e-12);
    }

    #[test]
    fn example4_symbol_values() {
        assert_eq!(eval_example4_symbol(1.3, 1.7, [0.0, 0.0]), 0.0);
        assert_eq!(eval_example4_symbol(1.3, 1.7, [PI, PI]), 1.0);
        // boundary |θ| = π/2 takes the plateau branch
        assert_eq!(plateau_power(1.5, PI / 2.0), 1.0);
    }

    #[test]
    fn closed_laplacian_and_r_alpha() {
        let t = fourier_coeffs_closed(&SymbolKind::Laplacian, &[4]).unwrap();
        for j in -3..=3isize {
            let want = match j.abs() {
                0 => 2.0,
                1 => -1.0,
                _ => 0.0,
            };
            assert_eq!(t.get_re(&[j]), want);
        }
        let r = fourier_coeffs_closed(&SymbolKind::RAlpha { alpha: 1.5 }, &[6]).unwrap();
        let rho = frac_centered_coeffs(1.5, 6).unwrap().values;
        for j in -5..=5isize {
            assert_eq!(r.get_re(&[j]), rho[j.unsigned_abs()]);
        }
    }

    #[test]
    fn closed_v_alpha_layout() {
        let n = 7;
        let t = fourier_coeffs_closed(&SymbolKind::VAlpha { alpha: 1.5 }, &[n]).unwrap();
        let w = grunwald_coeffs(1.5, n + 1).unwrap().values;
        for j in -(n as isize - 1)..n as isize {
            let want = if j >= -1 { -w[(j + 1) as usize] } else { 0.0 };
            assert_eq!(t.get_re(&[j]), want);
        }
        assert!(fourier_coeffs_closed(&SymbolKind::AbsPower { exponent: 1.5 }, &[4]).is_err());
    }

    #[test]
    fn numeric_matches_band_limited_closed_form() {
        let s = Symbol::from_kind(SymbolKind::Laplacian).unwrap();
        let num = fourier_coeffs_numeric(&s, &[8], 16).unwrap();
        let closed = fourier_coeffs_closed(&SymbolKind::Laplacian, &[8]).unwrap();
        for (a, b) in num.entries().iter().zip(closed.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn numeric_power_integrals() {
        let sq = Symbol::from_kind(SymbolKind::AbsPower { exponent: 2.0 }).unwrap();
        let c = fourier_coeffs_numeric(&sq, &[4], 16).unwrap();
        assert!((c.get_re(&[0]) - PI * PI / 3.0).abs() < 1e-7);
        let a = 1.5;
        let p = Symbol::from_kind(SymbolKind::AbsPower { exponent: a }).unwrap();
        let c = fourier_coeffs_numeric(&p, &[4], 16).unwrap();
        let want = PI.powf(a) / (a + 1.0);
        assert!((c.get_re(&[0]) - want).abs() / want < 1e-7);
    }

    #[test]
    fn numeric_quadrature_converges_under_doubling() {
        let p = Symbol::from_kind(SymbolKind::AbsPower { exponent: 1.3 }).unwrap();
        let a = fourier_coeffs_numeric(&p, &[64], 16).unwrap().get_re(&[0]);
        let b = fourier_coeffs_numeric(&p, &[64], 32).unwrap().get_re(&[0]);
        assert!((a - b).abs() / b.abs() < 1e-6);
    }

    #[test]
    fn example1_closed_matches_quadrature() {
        let s = Symbol::from_kind(SymbolKind::Example1).unwrap();
        let num = fourier_coeffs_numeric(&s, &[16], 64).unwrap();
        let closed = fourier_coeffs_closed(&SymbolKind::Example1, &[16]).unwrap();
        for (a, b) in num.entries().iter().zip(closed.entries()) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn real_coefficient_flags_hold_numerically() {
        let g = Symbol::from_kind(SymbolKind::G1d(FdeParams1D {
            n: 16,
            alpha: 1.5,
            d_plus: 1.0,
            d_minus: 0.2,
            nu: 0.5,
            h: 0.1,
            tau_time: 0.1,
            scheme: SpaceScheme::ShiftedGrunwald,
        }))
        .unwrap();
        let c = fourier_coeffs_numeric(&g, &[16], 16).unwrap();
        assert!(c.imag_ratio() < 1e-10);
        let e4 = Symbol::from_kind(SymbolKind::Example4 {
            alpha1: 1.2,
            alpha2: 1.8,
        })
        .unwrap();
        let c = fourier_coeffs_numeric(&e4, &[8, 8], 16).unwrap();
        assert!(c.imag_ratio() < 1e-10);
        assert!(c.is_symmetric(1e-12));
    }

    #[test]
    fn real_coeff_symbols_are_conjugate_symmetric() {
        let syms = [
            Symbol::from_kind(SymbolKind::VAlpha { alpha: 1.3 }).unwrap(),
            Symbol::from_kind(SymbolKind::VAlphaWsgd { alpha: 1.7 }).unwrap(),
            Symbol::from_kind(SymbolKind::Example1).unwrap(),
        ];
        for s in &syms {
            for i in 1..40 {
                let t = 0.075 * i as f64;
                assert!((s.eval(&[-t]) - s.eval(&[t]).conj()).norm() < 1e-12);
            }
        }
    }
}
