//! Discrete fractional diffusion systems: assembly of the constant
//! coefficient Toeplitz operator, right-hand sides and time marching.

use std::sync::Arc;

use crate::coefficients::{gamma, grunwald_coeffs};
use crate::grid::Dims;
use crate::krylov::{solve_symmetrized, SolveReport};
use crate::precond::Preconditioner;
use crate::symbols::{fourier_coeffs_closed, FdeParams1D, FdeParams2D, SpaceScheme, SymbolKind};
use crate::toeplitz::{build_toeplitz, ToeplitzOperator};
use crate::{Error, Result};

/// Weighted and shifted Grünwald weights with `(p, q) = (1, 0)`:
/// `w_0 = (α/2) ω_0`, `w_k = (α/2) ω_k + ((2-α)/2) ω_{k-1}`.
pub fn wsgd_coeffs(alpha: f64, count: usize) -> Result<Vec<f64>> {
    let omega = grunwald_coeffs(alpha, count)?.values;
    let (a, b) = (alpha / 2.0, (2.0 - alpha) / 2.0);
    Ok((0..count)
        .map(|k| a * omega[k] + if k > 0 { b * omega[k - 1] } else { 0.0 })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stepper {
    #[default]
    BackwardEuler,
    CrankNicolson,
}

impl Stepper {
    /// Weight of the implicit spatial term.
    pub fn weight(self) -> f64 {
        match self {
            Stepper::BackwardEuler => 1.0,
            Stepper::CrankNicolson => 0.5,
        }
    }
}

pub type SourceFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `∂u/∂t = Σ_i (d_{i,+} ∂₊^{α_i} + d_{i,-} ∂₋^{α_i}) u + f` on a box with
/// homogeneous Dirichlet data.
#[derive(Clone)]
pub struct FdeProblem {
    pub domain: Vec<(f64, f64)>,
    pub t_final: f64,
    pub alpha: Vec<f64>,
    pub d_plus: Vec<f64>,
    pub d_minus: Vec<f64>,
    pub source: SourceFn,
    pub initial: FieldFn,
    /// Exact solution `u(x, t)` when known.
    pub exact: Option<SourceFn>,
    pub scheme: SpaceScheme,
    pub stepper: Stepper,
}

impl std::fmt::Debug for FdeProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FdeProblem")
            .field("domain", &self.domain)
            .field("t_final", &self.t_final)
            .field("alpha", &self.alpha)
            .field("d_plus", &self.d_plus)
            .field("d_minus", &self.d_minus)
            .field("scheme", &self.scheme)
            .field("stepper", &self.stepper)
            .finish_non_exhaustive()
    }
}

impl FdeProblem {
    pub fn levels(&self) -> usize {
        self.domain.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.levels();
        if k == 0 || self.alpha.len() != k || self.d_plus.len() != k || self.d_minus.len() != k {
            return Err(Error::InvalidDims(
                "one order and diffusion pair per dimension".into(),
            ));
        }
        for i in 0..k {
            if !(self.alpha[i] > 1.0 && self.alpha[i] <= 2.0) {
                return Err(Error::Domain(format!(
                    "order {} outside (1, 2]",
                    self.alpha[i]
                )));
            }
            if !(self.d_plus[i] >= 0.0 && self.d_minus[i] >= 0.0) {
                return Err(Error::Domain(
                    "diffusion constants must be nonnegative".into(),
                ));
            }
            if !(self.domain[i].1 > self.domain[i].0) {
                return Err(Error::Domain("empty domain".into()));
            }
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Domain("final time must be positive".into()));
        }
        Ok(())
    }

    /// Two-dimensional benchmark on the unit square, shifted Grünwald and
    /// backward Euler, `d = (50, 10, 20, 30)`, zero initial data.
    pub fn example2(alpha1: f64, alpha2: f64) -> Self {
        FdeProblem {
            domain: vec![(0.0, 1.0); 2],
            t_final: 1.0,
            alpha: vec![alpha1, alpha2],
            d_plus: vec![50.0, 20.0],
            d_minus: vec![10.0, 30.0],
            source: Arc::new(example2_source),
            initial: Arc::new(|_| 0.0),
            exact: None,
            scheme: SpaceScheme::ShiftedGrunwald,
            stepper: Stepper::BackwardEuler,
        }
    }

    /// Two-dimensional benchmark on `(0, 2)²` with exact solution
    /// `e^t x₁²(2-x₁)² x₂²(2-x₂)²`, weighted-shifted Grünwald and
    /// Crank–Nicolson, `d = (2, 35, 1, 20)`.
    pub fn example3(alpha1: f64, alpha2: f64) -> Self {
        let alpha = [alpha1, alpha2];
        FdeProblem {
            domain: vec![(0.0, 2.0); 2],
            t_final: 1.0,
            alpha: alpha.to_vec(),
            d_plus: EXAMPLE3_D_PLUS.to_vec(),
            d_minus: EXAMPLE3_D_MINUS.to_vec(),
            source: Arc::new(move |x, t| example3_source(alpha, x, t)),
            initial: Arc::new(|x| example3_exact(x, 0.0)),
            exact: Some(Arc::new(example3_exact)),
            scheme: SpaceScheme::WeightedShifted,
            stepper: Stepper::CrankNicolson,
        }
    }
}

const EXAMPLE3_D_PLUS: [f64; 2] = [2.0, 1.0];
const EXAMPLE3_D_MINUS: [f64; 2] = [35.0, 20.0];

pub fn example2_source(x: &[f64], t: f64) -> f64 {
    100.0 * (10.0 * x[0]).sin() * x[1].cos() + (10.0 * t).sin() * x[0] * x[1]
}

fn bump(x: f64) -> f64 {
    x * x * (2.0 - x) * (2.0 - x)
}

pub fn example3_exact(x: &[f64], t: f64) -> f64 {
    t.exp() * bump(x[0]) * bump(x[1])
}

/// `d₊ ∂₊^α + d₋ ∂₋^α` applied to `x²(2-x)² = 4x² - 4x³ + x⁴` on `(0, 2)`,
/// using `∂₊^α x^i = i!/Γ(i+1-α) x^{i-α}` and the mirror image for `∂₋`.
fn example3_frac_term(alpha: f64, d_plus: f64, d_minus: f64, x: f64) -> f64 {
    const POLY: [(i32, f64); 3] = [(2, 4.0), (3, -4.0), (4, 1.0)];
    POLY.iter()
        .map(|&(i, c)| {
            let fact = (1..=i).product::<i32>() as f64;
            let g = gamma(i as f64 + 1.0 - alpha).expect("argument exceeds 1");
            let e = i as f64 - alpha;
            c * fact / g * (d_plus * x.powf(e) + d_minus * (2.0 - x).powf(e))
        })
        .sum()
}

pub fn example3_source(alpha: [f64; 2], x: &[f64], t: f64) -> f64 {
    let (b0, b1) = (bump(x[0]), bump(x[1]));
    let e = t.exp();
    e * b0 * b1
        - e * b1 * example3_frac_term(alpha[0], EXAMPLE3_D_PLUS[0], EXAMPLE3_D_MINUS[0], x[0])
        - e * b0 * example3_frac_term(alpha[1], EXAMPLE3_D_PLUS[1], EXAMPLE3_D_MINUS[1], x[1])
}

/// Interior nodes `a + i h`, `i = 1..=n`.
pub fn interior_nodes(interval: (f64, f64), n: usize) -> Vec<f64> {
    let h = (interval.1 - interval.0) / (n as f64 + 1.0);
    (1..=n).map(|i| interval.0 + i as f64 * h).collect()
}

/// Samples `f` at the interior nodes of a tensor grid (level 1 fastest).
pub fn sample_grid(nodes: &[Vec<f64>], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let shape: Vec<usize> = nodes.iter().map(Vec::len).collect();
    let dims = Dims::new(&shape).expect("nonempty grid");
    let mut x = vec![0.0; nodes.len()];
    (0..dims.total())
        .map(|off| {
            for (l, i) in dims.unravel(off).into_iter().enumerate() {
                x[l] = nodes[l][i];
            }
            f(&x)
        })
        .collect()
}

/// Source of Example 2 or 3 sampled at the interior nodes of an
/// `n₁ × n₂` grid at time `t`.
pub fn example_rhs(example: u8, alpha: [f64; 2], dims: [usize; 2], t: f64) -> Result<Vec<f64>> {
    let problem = match example {
        2 => FdeProblem::example2(alpha[0], alpha[1]),
        3 => FdeProblem::example3(alpha[0], alpha[1]),
        other => return Err(Error::Config(format!("no source for example {other}"))),
    };
    let nodes: Vec<Vec<f64>> = (0..2)
        .map(|l| interior_nodes(problem.domain[l], dims[l]))
        .collect();
    Ok(sample_grid(&nodes, |x| (problem.source)(x, t)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemParams {
    OneD(FdeParams1D),
    TwoD(FdeParams2D),
}

/// One implicit time step `T uˡ = rhs(uˡ⁻¹)`. The coefficient operator is
/// `mass·I + (spatial terms)` and is the same at every step.
#[derive(Debug, Clone)]
pub struct TimeStepSystem {
    pub operator: ToeplitzOperator,
    pub params: SystemParams,
    /// `ν` in 1D, 1 in 2D.
    pub mass: f64,
    /// Factor multiplying the source: `mass · τ`.
    pub source_scale: f64,
    pub tau_time: f64,
    pub stepper: Stepper,
    pub nodes: Vec<Vec<f64>>,
}

impl TimeStepSystem {
    pub fn dims(&self) -> &Dims {
        self.operator.dims()
    }

    /// Right-hand side for the step ending at `t`. Backward Euler gives
    /// `mass·u + s f(t)`; Crank–Nicolson gives
    /// `2 mass·u - T u + s (f(t) + f(t-τ))/2`.
    pub fn rhs(&self, problem: &FdeProblem, u_prev: &[f64], t: f64) -> Result<Vec<f64>> {
        let f_now = sample_grid(&self.nodes, |x| (problem.source)(x, t));
        match self.stepper {
            Stepper::BackwardEuler => Ok(u_prev
                .iter()
                .zip(&f_now)
                .map(|(u, f)| self.mass * u + self.source_scale * f)
                .collect()),
            Stepper::CrankNicolson => {
                let f_prev = sample_grid(&self.nodes, |x| (problem.source)(x, t - self.tau_time));
                let tu = self.operator.matvec(u_prev)?;
                Ok((0..u_prev.len())
                    .map(|i| {
                        2.0 * self.mass * u_prev[i] - tu[i]
                            + self.source_scale * 0.5 * (f_now[i] + f_prev[i])
                    })
                    .collect())
            }
        }
    }

    /// Initial field sampled at the interior nodes.
    pub fn initial(&self, problem: &FdeProblem) -> Vec<f64> {
        sample_grid(&self.nodes, |x| (problem.initial)(x))
    }
}

/// `[ν I + d₊ T(v) + d₋ T(v)ᵀ] uˡ = ν uˡ⁻¹ + hᵅ fˡ` for backward Euler, with
/// `ν = hᵅ/(w τ)` in general.
pub fn assemble_1d(problem: &FdeProblem, n: usize, tau_time: f64) -> Result<TimeStepSystem> {
    problem.validate()?;
    if problem.levels() != 1 {
        return Err(Error::InvalidDims("assemble_1d needs a 1D problem".into()));
    }
    let (a, b) = problem.domain[0];
    let h = (b - a) / (n as f64 + 1.0);
    let alpha = problem.alpha[0];
    let w = problem.stepper.weight();
    let p = FdeParams1D {
        n,
        alpha,
        d_plus: problem.d_plus[0],
        d_minus: problem.d_minus[0],
        nu: h.powf(alpha) / (w * tau_time),
        h,
        tau_time,
        scheme: problem.scheme,
    };
    p.validate()?;
    let operator = build_toeplitz(fourier_coeffs_closed(&SymbolKind::G1d(p), &[n])?)?;
    Ok(TimeStepSystem {
        operator,
        params: SystemParams::OneD(p),
        mass: p.nu,
        source_scale: p.nu * tau_time,
        tau_time,
        stepper: problem.stepper,
        nodes: vec![interior_nodes((a, b), n)],
    })
}

/// `[I + I ⊗ A₁ + A₂ ⊗ I] uˡ = uˡ⁻¹ + τ fˡ` for backward Euler, with
/// `A_i = (w τ / h_i^{α_i}) [d_{i,+} T(v) + d_{i,-} T(v)ᵀ]`.
pub fn assemble_2d(
    problem: &FdeProblem,
    n1: usize,
    n2: usize,
    tau_time: f64,
) -> Result<TimeStepSystem> {
    problem.validate()?;
    if problem.levels() != 2 {
        return Err(Error::InvalidDims("assemble_2d needs a 2D problem".into()));
    }
    let n = [n1, n2];
    let h = [0, 1].map(|i| (problem.domain[i].1 - problem.domain[i].0) / (n[i] as f64 + 1.0));
    let p = FdeParams2D {
        n,
        alpha: [problem.alpha[0], problem.alpha[1]],
        d_plus: [problem.d_plus[0], problem.d_plus[1]],
        d_minus: [problem.d_minus[0], problem.d_minus[1]],
        h,
        tau_time,
        time_weight: problem.stepper.weight(),
        scheme: problem.scheme,
    };
    p.validate()?;
    let operator = build_toeplitz(fourier_coeffs_closed(&SymbolKind::G2d(p), &n)?)?;
    Ok(TimeStepSystem {
        operator,
        params: SystemParams::TwoD(p),
        mass: 1.0,
        source_scale: tau_time,
        tau_time,
        stepper: problem.stepper,
        nodes: (0..2)
            .map(|i| interior_nodes(problem.domain[i], n[i]))
            .collect(),
    })
}

#[derive(Debug, Clone)]
pub struct MarchResult {
    pub solution: Vec<f64>,
    pub reports: Vec<SolveReport>,
    /// `‖u - ũ‖_∞` at the final time, when the exact solution is known.
    pub err_inf: Option<f64>,
    /// False if a step failed to converge; marching stops at that step.
    pub completed: bool,
}

/// Advances `steps` time steps from the initial condition, solving each
/// step with preconditioned MINRES on the flipped system.
pub fn march(
    system: &TimeStepSystem,
    problem: &FdeProblem,
    precond: &Preconditioner,
    steps: usize,
    tol: f64,
    maxit: usize,
) -> Result<MarchResult> {
    let mut u = system.initial(problem);
    let mut reports = Vec::with_capacity(steps);
    let mut completed = true;
    for l in 1..=steps {
        let t = l as f64 * system.tau_time;
        let b = system.rhs(problem, &u, t)?;
        let report = solve_symmetrized(&system.operator, precond, &b, None, tol, maxit)?;
        let ok = report.converged;
        u.clone_from(&report.solution);
        reports.push(report);
        if !ok {
            completed = false;
            break;
        }
    }
    let t_end = reports.len() as f64 * system.tau_time;
    let err_inf = match (&problem.exact, completed) {
        (Some(exact), true) => {
            let ue = sample_grid(&system.nodes, |x| exact(x, t_end));
            Some(
                ue.iter()
                    .zip(&u)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            )
        }
        _ => None,
    };
    Ok(MarchResult {
        solution: u,
        reports,
        err_inf,
        completed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wsgd_first_weight_and_sum() {
        for &alpha in &[1.1, 1.5, 1.9] {
            let w = wsgd_coeffs(alpha, 4000).unwrap();
            assert_eq!(w[0], alpha / 2.0);
            let s: f64 = w.iter().sum();
            assert!(s.abs() < 0.02, "alpha={alpha} sum={s}");
        }
        let w2 = wsgd_coeffs(2.0, 5).unwrap();
        assert_eq!(w2, vec![1.0, -2.0, 1.0, 0.0, 0.0]);
        let w = wsgd_coeffs(1.5, 2).unwrap();
        assert!((w[1] + 0.875).abs() < 1e-15);
    }

    #[test]
    fn example3_source_and_exact_vanish_on_boundary() {
        for &x0 in &[0.0, 2.0] {
            assert_eq!(example3_exact(&[x0, 0.7], 0.3), 0.0);
        }
        let f = example3_source([1.5, 1.5], &[1.0, 1.0], 0.0);
        assert!(f.is_finite());
    }

    #[test]
    fn example2_source_at_zero_time() {
        let x = [0.3, 0.8];
        let f = example2_source(&x, 0.0);
        assert!((f - 100.0 * 3.0f64.sin() * 0.8f64.cos()).abs() < 1e-12);
        let v = example_rhs(2, [1.5, 1.5], [3, 2], 0.0).unwrap();
        assert_eq!(v.len(), 6);
        assert!(example_rhs(5, [1.5, 1.5], [3, 2], 0.0).is_err());
    }

    #[test]
    fn interior_nodes_exclude_boundary() {
        let x = interior_nodes((0.0, 2.0), 3);
        assert_eq!(x, vec![0.5, 1.0, 1.5]);
    }

    #[test]
    fn sample_grid_is_level_one_fastest() {
        let v = sample_grid(&[vec![1.0, 2.0], vec![10.0, 20.0, 30.0]], |x| x[0] + x[1]);
        assert_eq!(v, vec![11.0, 12.0, 21.0, 22.0, 31.0, 32.0]);
    }
}
