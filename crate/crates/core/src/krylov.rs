//! Preconditioned MINRES and CG.
//!
//! Both solvers stop on the true relative residual `‖b - A x‖ / ‖b‖`,
//! recomputed with one extra operator application per iteration.

use std::time::Instant;

use crate::grid::{dot, flip, norm2};
use crate::precond::Preconditioner;
use crate::toeplitz::ToeplitzOperator;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAXIT: usize = 1000;

/// A square linear map on `R^dim`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl LinearOperator for ToeplitzOperator {
    fn dim(&self) -> usize {
        self.dims().total()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.matvec(x)
    }
}

/// `x ↦ Y T x`, with `Y` the anti-identity.
pub struct Flipped<'a>(pub &'a ToeplitzOperator);

impl LinearOperator for Flipped<'_> {
    fn dim(&self) -> usize {
        self.0.dims().total()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(flip(&self.0.matvec(x)?))
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((self.f)(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// True relative residuals, starting with the initial guess.
    pub residual_history: Vec<f64>,
    /// Preconditioned residual norms `‖r‖_{M⁻¹}` from the recurrences.
    pub precond_residual_history: Vec<f64>,
    pub converged: bool,
    /// Set when the Lanczos process terminated on an invariant subspace
    /// without meeting the tolerance.
    pub breakdown: bool,
    pub wall_seconds: f64,
    pub solution: Vec<f64>,
}

impl SolveReport {
    pub fn final_relres(&self) -> f64 {
        *self
            .residual_history
            .last()
            .expect("history is never empty")
    }
}

fn check_inputs(
    a: &dyn LinearOperator,
    m: &Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
) -> Result<()> {
    let n = a.dim();
    for len in [b.len(), m.dims().total()]
        .into_iter()
        .chain(x0.map(<[f64]>::len))
    {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    Ok(())
}

fn residual(a: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let ax = a.apply(x)?;
    Ok(b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect())
}

fn zero_rhs_report(n: usize, start: Instant) -> SolveReport {
    SolveReport {
        iterations: 0,
        residual_history: vec![0.0],
        precond_residual_history: vec![0.0],
        converged: true,
        breakdown: false,
        wall_seconds: start.elapsed().as_secs_f64(),
        solution: vec![0.0; n],
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Preconditioned MINRES for symmetric (possibly indefinite) `A` and
/// symmetric positive definite `M`.
pub fn minres(
    a: &dyn LinearOperator,
    m: &Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxit: usize,
) -> Result<SolveReport> {
    check_inputs(a, m, b, x0, tol)?;
    let start = Instant::now();
    let n = a.dim();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(zero_rhs_report(n, start));
    }
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r1 = residual(a, b, &x)?;
    let mut relres = norm2(&r1) / bnorm;
    let mut history = vec![relres];
    let mut y = m.apply_inverse(&r1)?;
    let ry = dot(&r1, &y);
    if ry < 0.0 {
        return Err(Error::NotPositiveDefinite(
            "preconditioner gave rᵀM⁻¹r < 0".into(),
        ));
    }
    let beta1 = ry.sqrt();
    let mut phibar = beta1;
    let mut phi_history = vec![phibar];
    let mut iterations = 0;
    let mut breakdown = false;
    if relres > tol && beta1 > 0.0 {
        let mut r2 = r1.clone();
        let (mut oldb, mut beta) = (0.0, beta1);
        let (mut dbar, mut epsln) = (0.0, 0.0);
        let (mut cs, mut sn) = (-1.0, 0.0);
        let mut w = vec![0.0; n];
        let mut w2 = vec![0.0; n];
        while iterations < maxit {
            iterations += 1;
            let v: Vec<f64> = y.iter().map(|yi| yi / beta).collect();
            y = a.apply(&v)?;
            if iterations >= 2 {
                axpy(&mut y, -beta / oldb, &r1);
            }
            let alfa = dot(&v, &y);
            axpy(&mut y, -alfa / beta, &r2);
            r1 = std::mem::replace(&mut r2, y);
            y = m.apply_inverse(&r2)?;
            oldb = beta;
            let ry = dot(&r2, &y);
            if ry < 0.0 {
                return Err(Error::NotPositiveDefinite(
                    "preconditioner gave rᵀM⁻¹r < 0".into(),
                ));
            }
            beta = ry.sqrt();

            let oldeps = epsln;
            let delta = cs * dbar + sn * alfa;
            let gbar = sn * dbar - cs * alfa;
            epsln = sn * beta;
            dbar = -cs * beta;
            let gamma = gbar.hypot(beta).max(f64::EPSILON);
            cs = gbar / gamma;
            sn = beta / gamma;
            let phi = cs * phibar;
            phibar *= sn;

            let w1 = std::mem::replace(&mut w2, std::mem::take(&mut w));
            w = (0..n)
                .map(|i| (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma)
                .collect();
            axpy(&mut x, phi, &w);

            relres = norm2(&residual(a, b, &x)?) / bnorm;
            history.push(relres);
            phi_history.push(phibar);
            if relres <= tol {
                break;
            }
            if beta <= f64::EPSILON * beta1 {
                breakdown = true;
                break;
            }
        }
    }
    debug_assert!(phi_history.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12)));
    Ok(SolveReport {
        iterations,
        converged: relres <= tol,
        residual_history: history,
        precond_residual_history: phi_history,
        breakdown,
        wall_seconds: start.elapsed().as_secs_f64(),
        solution: x,
    })
}

/// Preconditioned conjugate gradients for symmetric positive definite `A`
/// and `M`. Fails with [`Error::NotPositiveDefinite`] on `pᵀAp ≤ 0`.
pub fn pcg(
    a: &dyn LinearOperator,
    m: &Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxit: usize,
) -> Result<SolveReport> {
    check_inputs(a, m, b, x0, tol)?;
    let start = Instant::now();
    let n = a.dim();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(zero_rhs_report(n, start));
    }
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = residual(a, b, &x)?;
    let mut relres = norm2(&r) / bnorm;
    let mut history = vec![relres];
    let mut z = m.apply_inverse(&r)?;
    let mut rz = dot(&r, &z);
    let mut prec_history = vec![rz.max(0.0).sqrt()];
    let mut p = z.clone();
    let mut iterations = 0;
    while relres > tol && iterations < maxit {
        iterations += 1;
        let q = a.apply(&p)?;
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "pᵀAp = {pq:e} at iteration {iterations}"
            )));
        }
        let step = rz / pq;
        axpy(&mut x, step, &p);
        axpy(&mut r, -step, &q);
        relres = norm2(&residual(a, b, &x)?) / bnorm;
        history.push(relres);
        z = m.apply_inverse(&r)?;
        let rz_new = dot(&r, &z);
        prec_history.push(rz_new.max(0.0).sqrt());
        if relres <= tol {
            break;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Ok(SolveReport {
        iterations,
        converged: relres <= tol,
        residual_history: history,
        precond_residual_history: prec_history,
        breakdown: false,
        wall_seconds: start.elapsed().as_secs_f64(),
        solution: x,
    })
}

/// Solves `T u = b` by MINRES on the symmetric system `Y T u = Y b`.
/// Residuals are unchanged by the flip, so the report refers to the
/// original system.
pub fn solve_symmetrized(
    t: &ToeplitzOperator,
    m: &Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxit: usize,
) -> Result<SolveReport> {
    t.dims().check_len(b.len())?;
    minres(&Flipped(t), m, &flip(b), x0, tol, maxit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_op(d: Vec<f64>) -> FnOperator<impl Fn(&[f64]) -> Vec<f64>> {
        FnOperator {
            dim: d.len(),
            f: move |x: &[f64]| x.iter().zip(&d).map(|(a, b)| a * b).collect(),
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let n = 7;
        let id = Preconditioner::identity(&[n]).unwrap();
        let b: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let a = diag_op(vec![1.0; n]);
        for r in [
            minres(&a, &id, &b, None, 1e-10, 10).unwrap(),
            pcg(&a, &id, &b, None, 1e-10, 10).unwrap(),
        ] {
            assert!(r.converged);
            assert_eq!(r.iterations, 1);
            assert_eq!(r.residual_history.len(), 2);
        }
    }

    #[test]
    fn two_clusters_need_two_steps() {
        let d: Vec<f64> = (0..10)
            .map(|i| if i % 3 == 0 { -1.0 } else { 1.0 })
            .collect();
        let id = Preconditioner::identity(&[10]).unwrap();
        let b = vec![1.0; 10];
        let r = minres(&diag_op(d), &id, &b, None, 1e-10, 10).unwrap();
        assert!(r.converged && r.iterations <= 2);
        let d: Vec<f64> = (0..10)
            .map(|i| if i % 2 == 0 { 3.0 } else { 1.0 })
            .collect();
        let r = pcg(&diag_op(d), &id, &b, None, 1e-10, 10).unwrap();
        assert!(r.converged && r.iterations <= 2);
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let id = Preconditioner::identity(&[4]).unwrap();
        let r = minres(&diag_op(vec![2.0; 4]), &id, &[0.0; 4], None, 1e-8, 10).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
        assert_eq!(r.solution, vec![0.0; 4]);
    }

    #[test]
    fn pcg_rejects_indefinite() {
        let id = Preconditioner::identity(&[3]).unwrap();
        let r = pcg(
            &diag_op(vec![1.0, -1.0, 2.0]),
            &id,
            &[1.0, 1.0, 1.0],
            None,
            1e-10,
            10,
        );
        assert!(matches!(r, Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn maxit_reports_failure() {
        let id = Preconditioner::identity(&[6]).unwrap();
        let d: Vec<f64> = (1..=6).map(|i| i as f64).collect();
        let r = pcg(&diag_op(d), &id, &[1.0; 6], None, 1e-12, 2).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
        assert_eq!(r.residual_history.len(), 3);
    }

    #[test]
    fn rejects_bad_lengths_and_tolerance() {
        let id = Preconditioner::identity(&[3]).unwrap();
        let a = diag_op(vec![1.0; 3]);
        assert!(minres(&a, &id, &[1.0; 2], None, 1e-8, 5).is_err());
        assert!(minres(&a, &id, &[1.0; 3], None, 1.5, 5).is_err());
        assert!(pcg(&a, &id, &[1.0; 3], Some(&[0.0; 4]), 1e-8, 5).is_err());
    }
}
