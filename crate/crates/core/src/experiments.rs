//! Experiment driver behind the `tauprec` binary: configuration, the four
//! benchmark problems, CSV output and dense spectrum runs.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::fde::{assemble_2d, march, FdeProblem, SystemParams};
use crate::krylov::{minres, pcg, solve_symmetrized, SolveReport, DEFAULT_MAXIT, DEFAULT_TOL};
use crate::precond::{
    build_abs_circulant, build_example1_p, build_natural_tau, build_p_1d, build_p_2d,
    build_strang_circulant, build_tau_r, Preconditioner,
};
use crate::spectra::{
    dense_from_toeplitz, pencil_eigs, spectrum_report, DenseMatrix, SpectrumReport,
};
use crate::symbols::{
    fourier_coeffs_closed, fourier_coeffs_numeric, FdeParams1D, Symbol, SymbolKind,
    DEFAULT_OVERSAMPLE,
};
use crate::toeplitz::{build_toeplitz, ToeplitzOperator};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 20240101;
pub const CSV_HEADER: [&str; 11] = [
    "example", "n1", "n2", "alpha1", "alpha2", "precond", "solver", "iters", "seconds", "relres",
    "err_inf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    /// Toeplitz system generated by `(2-2cos θ)(1+iθ)`.
    One,
    /// 2D first-order fractional diffusion, first time step.
    Two,
    /// 2D second-order fractional diffusion with known solution, full march.
    Three,
    /// Symmetric 2-level Toeplitz system generated by `p_α`.
    Four,
    /// 1D first-order fractional diffusion with `d₊ = 1`, `d₋ = 0.2`, `ν = 1`.
    Custom,
}

impl Example {
    pub fn levels(self) -> usize {
        match self {
            Example::One | Example::Custom => 1,
            _ => 2,
        }
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Example::One),
            "2" => Ok(Example::Two),
            "3" => Ok(Example::Three),
            "4" => Ok(Example::Four),
            "custom" => Ok(Example::Custom),
            other => Err(Error::Config(format!(
                "unknown example '{other}' (expected 1, 2, 3, 4 or custom)"
            ))),
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example::One => "1",
            Example::Two => "2",
            Example::Three => "3",
            Example::Four => "4",
            Example::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondChoice {
    /// The proposed preconditioner: `P_n` for examples 1–3 and the custom
    /// problem, `τ(R_n)` for example 4.
    SymbolTau,
    NaturalTau,
    AbsCirculant,
    Strang,
    None,
}

impl FromStr for PrecondChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "symbol_tau" | "tau_r" | "p" => Ok(PrecondChoice::SymbolTau),
            "natural_tau" => Ok(PrecondChoice::NaturalTau),
            "abs_circulant" => Ok(PrecondChoice::AbsCirculant),
            "strang" => Ok(PrecondChoice::Strang),
            "none" => Ok(PrecondChoice::None),
            other => Err(Error::Config(format!(
                "unknown preconditioner '{other}' (expected symbol_tau, natural_tau, abs_circulant, strang or none)"
            ))),
        }
    }
}

impl fmt::Display for PrecondChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecondChoice::SymbolTau => "symbol_tau",
            PrecondChoice::NaturalTau => "natural_tau",
            PrecondChoice::AbsCirculant => "abs_circulant",
            PrecondChoice::Strang => "strang",
            PrecondChoice::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Minres,
    Pcg,
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "minres" => Ok(SolverChoice::Minres),
            "pcg" => Ok(SolverChoice::Pcg),
            other => Err(Error::Config(format!(
                "unknown solver '{other}' (expected minres or pcg)"
            ))),
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::Minres => "minres",
            SolverChoice::Pcg => "pcg",
        })
    }
}

/// Sizes in a config file: one integer or a list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SizeList {
    One(usize),
    Many(Vec<usize>),
}

/// Flat key-value settings from a config file or the command line. Every
/// key is optional; [`PartialConfig::merge`] lets later sources override.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub example: Option<String>,
    pub n: Option<SizeList>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub precond: Option<String>,
    pub solver: Option<String>,
    pub tol: Option<f64>,
    pub maxit: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub eps: Option<f64>,
}

impl PartialConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Keys set in `over` replace those in `self`.
    pub fn merge(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            example: over.example.or(self.example),
            n: over.n.or(self.n),
            alpha1: over.alpha1.or(self.alpha1),
            alpha2: over.alpha2.or(self.alpha2),
            precond: over.precond.or(self.precond),
            solver: over.solver.or(self.solver),
            tol: over.tol.or(self.tol),
            maxit: over.maxit.or(self.maxit),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            eps: over.eps.or(self.eps),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let example: Example = self
            .example
            .as_deref()
            .ok_or_else(|| Error::Config("missing 'example'".into()))?
            .parse()?;
        let sizes = match self.n {
            Some(SizeList::One(n)) => vec![n],
            Some(SizeList::Many(v)) => v,
            None => return Err(Error::Config("missing 'n'".into())),
        };
        let alpha1 = self.alpha1.unwrap_or(1.5);
        let config = RunConfig {
            example,
            sizes,
            alpha1,
            alpha2: self.alpha2.unwrap_or(alpha1),
            precond: self
                .precond
                .as_deref()
                .map_or(Ok(PrecondChoice::SymbolTau), str::parse)?,
            solver: match self.solver.as_deref() {
                Some(s) => s.parse()?,
                None if example == Example::Four => SolverChoice::Pcg,
                None => SolverChoice::Minres,
            },
            tol: self.tol.unwrap_or(DEFAULT_TOL),
            maxit: self.maxit.unwrap_or(DEFAULT_MAXIT),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            out: self.out,
            eps: self.eps.unwrap_or(0.1),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub example: Example,
    /// Per-level size `n` (`n₁ = n₂ = n` for 2D problems).
    pub sizes: Vec<usize>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub precond: PrecondChoice,
    pub solver: SolverChoice,
    pub tol: f64,
    pub maxit: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Cluster radius for spectrum runs.
    pub eps: f64,
}

impl RunConfig {
    pub fn new(example: Example, sizes: Vec<usize>, alpha1: f64, alpha2: f64) -> Self {
        RunConfig {
            example,
            sizes,
            alpha1,
            alpha2,
            precond: PrecondChoice::SymbolTau,
            solver: if example == Example::Four {
                SolverChoice::Pcg
            } else {
                SolverChoice::Minres
            },
            tol: DEFAULT_TOL,
            maxit: DEFAULT_MAXIT,
            seed: DEFAULT_SEED,
            out: None,
            eps: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::Config("sizes must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!(
                "tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if self.maxit == 0 {
            return Err(Error::Config("maxit must be positive".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config("eps must be positive".into()));
        }
        let alphas_used = match self.example {
            Example::One => 0,
            Example::Custom => 1,
            _ => 2,
        };
        for &a in [self.alpha1, self.alpha2].iter().take(alphas_used) {
            if !(a > 1.0 && a <= 2.0) {
                return Err(Error::Config(format!("orders must lie in (1, 2], got {a}")));
            }
        }
        let symmetric = self.example == Example::Four;
        if self.solver == SolverChoice::Pcg && !symmetric {
            return Err(Error::Config(format!(
                "pcg needs a symmetric system; example {} is not",
                self.example
            )));
        }
        if self.precond == PrecondChoice::NaturalTau && !symmetric {
            return Err(Error::Config(
                "natural_tau needs a symmetric coefficient matrix (example 4)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub example: Example,
    pub n1: usize,
    pub n2: Option<usize>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub precond: PrecondChoice,
    pub solver: SolverChoice,
    /// Iterations of the first (or only) solve.
    pub iters: usize,
    /// Largest iteration count over all time steps.
    pub max_iters: usize,
    /// Wall time of the solves, excluding assembly.
    pub seconds: f64,
    pub relres: f64,
    pub err_inf: Option<f64>,
    pub converged: bool,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResultRow {
    fn record(&self) -> [String; 11] {
        [
            self.example.to_string(),
            self.n1.to_string(),
            opt(self.n2),
            opt(self.alpha1),
            opt(self.alpha2),
            self.precond.to_string(),
            self.solver.to_string(),
            self.iters.to_string(),
            self.seconds.to_string(),
            self.relres.to_string(),
            opt(self.err_inf),
        ]
    }
}

/// Writes rows as CSV (header first, LF line endings).
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_csv(rows, std::fs::File::create(path)?)
}

/// Human-readable table of result rows.
pub fn format_table(rows: &[ResultRow]) -> String {
    let mut s = format!(
        "{:>7} {:>12} {:>12} {:>13} {:>7} {:>6} {:>6} {:>10} {:>10} {:>10}\n",
        "example",
        "N",
        "alphas",
        "precond",
        "solver",
        "iters",
        "max",
        "seconds",
        "relres",
        "err_inf"
    );
    for r in rows {
        let total = r.n1 * r.n2.unwrap_or(1);
        let alphas = match (r.alpha1, r.alpha2) {
            (Some(a), Some(b)) => format!("({a},{b})"),
            (Some(a), None) => format!("{a}"),
            _ => "-".into(),
        };
        s += &format!(
            "{:>7} {:>12} {:>12} {:>13} {:>7} {:>6} {:>6} {:>10.3e} {:>10.3e} {:>10}{}\n",
            r.example.to_string(),
            total,
            alphas,
            r.precond.to_string(),
            r.solver.to_string(),
            r.iters,
            r.max_iters,
            r.seconds,
            r.relres,
            r.err_inf.map_or("-".into(), |e| format!("{e:.2e}")),
            if r.converged { "" } else { "  (not converged)" }
        );
    }
    s
}

/// Standard normal vector from a ChaCha8 stream seeded with `seed`.
pub fn gaussian_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Coefficient matrix of Example 1.
pub fn example1_operator(n: usize) -> Result<ToeplitzOperator> {
    build_toeplitz(fourier_coeffs_closed(&SymbolKind::Example1, &[n])?)
}

/// Coefficient matrix of Example 4, coefficients of `p_α` by quadrature.
pub fn example4_operator(n: usize, alpha1: f64, alpha2: f64) -> Result<ToeplitzOperator> {
    let symbol = Symbol::from_kind(SymbolKind::Example4 { alpha1, alpha2 })?;
    build_toeplitz(fourier_coeffs_numeric(
        &symbol,
        &[n, n],
        DEFAULT_OVERSAMPLE,
    )?)
}

/// Parameters of the custom 1D problem: `d₊ = 1`, `d₋ = 0.2`, unit
/// interval and `τ = hᵅ` so that `ν = 1`.
pub fn custom_params(n: usize, alpha: f64) -> Result<FdeParams1D> {
    let h = 1.0 / (n as f64 + 1.0);
    FdeParams1D::new(n, alpha, 1.0, 0.2, (0.0, 1.0), h.powf(alpha))
}

/// Time step of Example 2: `1/⌈n^{α₁}⌉`.
pub fn example2_tau(n: usize, alpha1: f64) -> f64 {
    1.0 / (n as f64).powf(alpha1).ceil()
}

fn baseline(choice: PrecondChoice, t: &ToeplitzOperator) -> Result<Preconditioner> {
    match choice {
        PrecondChoice::NaturalTau => build_natural_tau(t),
        PrecondChoice::AbsCirculant => build_abs_circulant(t),
        PrecondChoice::Strang => build_strang_circulant(t),
        PrecondChoice::None => Preconditioner::identity(t.dims().as_slice()),
        PrecondChoice::SymbolTau => unreachable!("handled per example"),
    }
}

/// Coefficient operator and preconditioner of one benchmark system.
pub struct Setup {
    pub operator: ToeplitzOperator,
    pub precond: Preconditioner,
}

/// Builds the operator and preconditioner for one size. For examples 2 and
/// 3 the operator is that of the time-stepping system.
pub fn setup(config: &RunConfig, n: usize) -> Result<Setup> {
    let (operator, proposed) = match config.example {
        Example::One => {
            let t = example1_operator(n)?;
            (t, build_example1_p(n))
        }
        Example::Custom => {
            let p = custom_params(n, config.alpha1)?;
            let t = build_toeplitz(fourier_coeffs_closed(&SymbolKind::G1d(p), &[n])?)?;
            (t, build_p_1d(&p))
        }
        Example::Two | Example::Three => {
            let (problem, tau) = fde_problem(config, n);
            let sys = assemble_2d(&problem, n, n, tau)?;
            let SystemParams::TwoD(p) = sys.params else {
                unreachable!("2D assembly")
            };
            (sys.operator, build_p_2d(&p))
        }
        Example::Four => {
            let t = example4_operator(n, config.alpha1, config.alpha2)?;
            (
                t,
                build_tau_r(&[n, n], &[config.alpha1, config.alpha2], &[1.0, 1.0]),
            )
        }
    };
    let precond = match config.precond {
        PrecondChoice::SymbolTau => proposed?,
        other => baseline(other, &operator)?,
    };
    Ok(Setup { operator, precond })
}

fn fde_problem(config: &RunConfig, n: usize) -> (FdeProblem, f64) {
    match config.example {
        Example::Two => (
            FdeProblem::example2(config.alpha1, config.alpha2),
            example2_tau(n, config.alpha1),
        ),
        _ => (
            FdeProblem::example3(config.alpha1, config.alpha2),
            1.0 / (n as f64 + 1.0),
        ),
    }
}

fn solve(config: &RunConfig, s: &Setup, b: &[f64], x0: Option<&[f64]>) -> Result<SolveReport> {
    match (config.solver, config.example) {
        (SolverChoice::Pcg, _) => pcg(&s.operator, &s.precond, b, x0, config.tol, config.maxit),
        (SolverChoice::Minres, Example::Four) => {
            minres(&s.operator, &s.precond, b, x0, config.tol, config.maxit)
        }
        (SolverChoice::Minres, _) => {
            solve_symmetrized(&s.operator, &s.precond, b, x0, config.tol, config.maxit)
        }
    }
}

/// Runs one size of the configured example.
pub fn run_size(config: &RunConfig, n: usize) -> Result<ResultRow> {
    config.validate()?;
    let s = setup(config, n)?;
    let total = s.operator.dims().total();
    let two_level = config.example.levels() == 2;
    let mut row = ResultRow {
        example: config.example,
        n1: n,
        n2: two_level.then_some(n),
        alpha1: (config.example != Example::One).then_some(config.alpha1),
        alpha2: two_level.then_some(config.alpha2),
        precond: config.precond,
        solver: config.solver,
        iters: 0,
        max_iters: 0,
        seconds: 0.0,
        relres: 0.0,
        err_inf: None,
        converged: true,
    };
    let report = match config.example {
        Example::One => {
            let b = gaussian_vector(total, config.seed);
            let x0 = vec![1.0 / (total as f64).sqrt(); total];
            solve(config, &s, &b, Some(&x0))?
        }
        Example::Four | Example::Custom => {
            solve(config, &s, &gaussian_vector(total, config.seed), None)?
        }
        Example::Two => {
            let (problem, tau) = fde_problem(config, n);
            let sys = assemble_2d(&problem, n, n, tau)?;
            let b = sys.rhs(&problem, &sys.initial(&problem), tau)?;
            solve(config, &s, &b, None)?
        }
        Example::Three => {
            let (problem, tau) = fde_problem(config, n);
            let sys = assemble_2d(&problem, n, n, tau)?;
            let result = march(&sys, &problem, &s.precond, n + 1, config.tol, config.maxit)?;
            row.iters = result.reports[0].iterations;
            row.max_iters = result
                .reports
                .iter()
                .map(|r| r.iterations)
                .max()
                .unwrap_or(0);
            row.seconds = result.reports.iter().map(|r| r.wall_seconds).sum();
            row.relres = result.reports.last().map_or(0.0, SolveReport::final_relres);
            row.err_inf = result.err_inf;
            row.converged = result.completed;
            return Ok(row);
        }
    };
    row.iters = report.iterations;
    row.max_iters = report.iterations;
    row.seconds = report.wall_seconds;
    row.relres = report.final_relres();
    row.converged = report.converged;
    Ok(row)
}

/// Runs every configured size.
pub fn run_example(config: &RunConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    config.sizes.iter().map(|&n| run_size(config, n)).collect()
}

/// Spectrum of the preconditioned matrix `M⁻¹A` for one size, where `A` is
/// the symmetrized `Y T` for examples 1–3 and the custom problem and `T`
/// itself for example 4.
pub fn preconditioned_spectrum(
    config: &RunConfig,
    n: usize,
    queries: &[(Vec<f64>, f64)],
) -> Result<SpectrumReport> {
    config.validate()?;
    let s = setup(config, n)?;
    let dense = dense_from_toeplitz(&s.operator)?;
    let a = if config.example == Example::Four {
        dense
    } else {
        dense.flip_rows()
    };
    let m = DenseMatrix::from_columns(s.operator.dims().total(), |x| s.precond.apply(x))?;
    Ok(spectrum_report(
        pencil_eigs(&a.symmetrize(), &m.symmetrize())?,
        queries,
    ))
}

/// Default cluster centers: `±1` for symmetrized systems, `1` otherwise.
pub fn default_centers(example: Example) -> Vec<f64> {
    if example == Example::Four {
        vec![1.0]
    } else {
        vec![-1.0, 1.0]
    }
}

/// Spectrum run for every configured size, with the cluster query
/// `(default centers, eps)`.
pub fn run_spectrum(config: &RunConfig) -> Result<Vec<(usize, SpectrumReport)>> {
    let queries = [(default_centers(config.example), config.eps)];
    config
        .sizes
        .iter()
        .map(|&n| Ok((n, preconditioned_spectrum(config, n, &queries)?)))
        .collect()
}

/// Writes `n,index,eigenvalue` rows for every report.
pub fn write_spectrum_csv<W: Write>(reports: &[(usize, SpectrumReport)], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["n", "index", "eigenvalue"])?;
    for (n, r) in reports {
        for (i, v) in r.values.iter().enumerate() {
            w.write_record([n.to_string(), i.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_choices() {
        assert_eq!("3".parse::<Example>().unwrap(), Example::Three);
        assert!("5".parse::<Example>().is_err());
        assert_eq!(
            "tau_r".parse::<PrecondChoice>().unwrap(),
            PrecondChoice::SymbolTau
        );
        assert!("gmres".parse::<SolverChoice>().is_err());
    }

    #[test]
    fn toml_merge_flags_override_file() {
        let file = PartialConfig::from_toml_str(
            "example = \"2\"\nn = [31, 63]\nalpha1 = 1.5\ntol = 1e-6\n",
        )
        .unwrap();
        let flags = PartialConfig {
            tol: Some(1e-9),
            ..Default::default()
        };
        let c = file.merge(flags).resolve().unwrap();
        assert_eq!(c.example, Example::Two);
        assert_eq!(c.sizes, vec![31, 63]);
        assert_eq!(c.tol, 1e-9);
        assert_eq!(c.alpha2, 1.5);
        assert_eq!(c.solver, SolverChoice::Minres);
        assert!(PartialConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(Example::Two, vec![15], 1.5, 1.5);
        assert!(c.validate().is_ok());
        c.solver = SolverChoice::Pcg;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(Example::Four, vec![15], 1.5, 2.5);
        assert!(c.validate().is_err());
        c.alpha2 = 1.5;
        c.tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn example2_time_step() {
        assert_eq!(example2_tau(127, 1.5), 1.0 / 1432.0);
        assert_eq!(example2_tau(127, 1.01), 1.0 / 134.0);
    }

    #[test]
    fn gaussian_is_deterministic() {
        assert_eq!(gaussian_vector(5, 7), gaussian_vector(5, 7));
        assert_ne!(gaussian_vector(5, 7), gaussian_vector(5, 8));
    }
}
