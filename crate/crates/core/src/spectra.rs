//! Dense oracles and spectral diagnostics.

use crate::grid::Dims;
use crate::krylov::LinearOperator;
use crate::symbols::Symbol;
use crate::toeplitz::ToeplitzOperator;
use crate::{Error, Result};

/// Largest dense dimension accepted.
pub const DENSE_LIMIT: usize = 4096;

/// Square row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

fn guard(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        guard(n)?;
        Ok(DenseMatrix {
            n,
            data: vec![0.0; n * n],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        guard(n)?;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDims("rows must form a square matrix".into()));
        }
        Self::from_fn(n, |i, j| rows[i][j])
    }

    /// Matrix of a linear map, column by column from unit vectors.
    pub fn from_operator(op: &dyn LinearOperator) -> Result<Self> {
        Self::from_columns(op.dim(), |x| op.apply(x))
    }

    pub fn from_columns(n: usize, mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = f(&e)?;
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: col.len(),
                });
            }
            for (i, v) in col.into_iter().enumerate() {
                m.data[i * n + j] = v;
            }
            e[j] = 0.0;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        DenseMatrix {
            n,
            data: (0..n * n).map(|k| self.data[(k % n) * n + k / n]).collect(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(DenseMatrix { n, data: out })
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &DenseMatrix, c: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(DenseMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        DenseMatrix {
            n: self.n,
            data: self.data.iter().map(|a| c * a).collect(),
        }
    }

    /// `Y A Y`.
    pub fn flip_both(&self) -> Self {
        let n = self.n;
        DenseMatrix {
            n,
            data: (0..n * n).rev().map(|k| self.data[k]).collect(),
        }
    }

    /// `Y A`.
    pub fn flip_rows(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in (0..n).rev() {
            data.extend_from_slice(&self.data[i * n..(i + 1) * n]);
        }
        DenseMatrix { n, data }
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self
            .data
            .iter()
            .fold(0.0f64, |m, a| m.max(a.abs()))
            .max(1.0);
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol * scale))
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetrize(&self) -> Self {
        let t = self.transpose();
        DenseMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&t.data)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        }
    }

    /// Standard Kronecker product `A ⊗ B`, row index `i_A · n_B + i_B`.
    pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<Self> {
        let (na, nb) = (a.n, b.n);
        Self::from_fn(na * nb, |r, c| {
            a.get(r / nb, c / nb) * b.get(r % nb, c % nb)
        })
    }

    /// Solves `A x = b` by LU with partial pivoting.
    pub fn lu_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .expect("nonempty range");
            if a[p * n + k].abs() <= f64::EPSILON * scale * n as f64 {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / piv;
                if l == 0.0 {
                    continue;
                }
                for j in k..n {
                    a[i * n + j] -= l * a[k * n + j];
                }
                x[i] -= l * x[k];
            }
        }
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k * n + j] * x[j]).sum();
            x[k] = (x[k] - s) / a[k * n + k];
        }
        Ok(x)
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix.
    pub fn cholesky(&self) -> Result<DenseMatrix> {
        let n = self.n;
        let mut l = DenseMatrix::zeros(n)?;
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite(format!("pivot {j} is {d:e}")));
            }
            let d = d.sqrt();
            l.set(j, j, d);
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / d);
            }
        }
        Ok(l)
    }

    /// Solves `A x = b` for symmetric positive definite `A`.
    pub fn cholesky_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let l = self.cholesky()?;
        let y = l.forward_subst(b);
        Ok(l.backward_subst_transposed(&y))
    }

    /// `L⁻¹ b` for lower triangular `L = self`.
    fn forward_subst(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for i in 0..self.n {
            let s: f64 = (0..i).map(|k| self.get(i, k) * y[k]).sum();
            y[i] = (y[i] - s) / self.get(i, i);
        }
        y
    }

    /// `L⁻ᵀ y` for lower triangular `L = self`.
    fn backward_subst_transposed(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.get(k, i) * x[k]).sum();
            x[i] = (x[i] - s) / self.get(i, i);
        }
        x
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.matvec(x))
    }
}

/// Dense matrix of a multilevel Toeplitz operator, read from its coefficients.
pub fn dense_from_toeplitz(op: &ToeplitzOperator) -> Result<DenseMatrix> {
    let dims: &Dims = op.dims();
    let n = dims.total();
    guard(n)?;
    let idx: Vec<Vec<usize>> = (0..n).map(|o| dims.unravel(o)).collect();
    let coeffs = op.coeffs();
    let mut diff = vec![0isize; dims.levels()];
    DenseMatrix::from_fn(n, |r, c| {
        for (d, (a, b)) in diff.iter_mut().zip(idx[r].iter().zip(&idx[c])) {
            *d = *a as isize - *b as isize;
        }
        coeffs.get_re(&diff)
    })
}

/// Householder reduction to tridiagonal form. On return `v` holds the
/// orthogonal transformation when `vectors` is set, `d` the diagonal and
/// `e[1..]` the subdiagonal.
fn tred2(v: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], vectors: bool) {
    let at = |i: usize, j: usize| i * n + j;
    d.copy_from_slice(&v[at(n - 1, 0)..at(n - 1, 0) + n]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    if vectors {
        for i in 0..n - 1 {
            v[at(n - 1, i)] = v[at(i, i)];
            v[at(i, i)] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v[at(k, i + 1)] / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v[at(k, i + 1)] * v[at(k, j)];
                    }
                    for k in 0..=i {
                        v[at(k, j)] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v[at(k, i + 1)] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v[at(n - 1, j)];
            v[at(n - 1, j)] = 0.0;
        }
        v[at(n - 1, n - 1)] = 1.0;
    } else {
        for (j, dj) in d.iter_mut().enumerate() {
            // the diagonal of the reduced matrix sits on the diagonal of v
            *dj = v[at(j, j)];
        }
    }
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal `(d, e)`, accumulating rotations
/// into `v` when `vectors` is set.
fn tql2(v: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], vectors: bool) -> Result<()> {
    let at = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NotConverged {
                        iterations: iter,
                        relres: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        for k in 0..n {
                            let hk = v[at(k, i + 1)];
                            v[at(k, i + 1)] = s * v[at(k, i)] + c * hk;
                            v[at(k, i)] = c * v[at(k, i)] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn eigen_impl(a: &DenseMatrix, vectors: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    if !a.is_symmetric(1e-10) {
        return Err(Error::NotSymmetric(
            "dense eigensolver needs a symmetric matrix".into(),
        ));
    }
    let n = a.n;
    if n == 0 {
        return Ok((vec![], vec![]));
    }
    let mut v = a.symmetrize().data;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, n, &mut d, &mut e, vectors);
    tql2(&mut v, n, &mut d, &mut e, vectors)?;
    Ok((d, v))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigs(a: &DenseMatrix) -> Result<Vec<f64>> {
    let (mut d, _) = eigen_impl(a, false)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors, stored as
/// the columns of the returned matrix.
pub fn sym_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.n;
    let (d, v) = eigen_impl(a, true)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let vecs = DenseMatrix::from_fn(n, |r, c| v[r * n + order[c]])?;
    Ok((vals, vecs))
}

/// `V diag(f(λ)) Vᵀ` for symmetric `A = V diag(λ) Vᵀ`.
pub fn sym_function(a: &DenseMatrix, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
    let (vals, v) = sym_eigen(a)?;
    let fl: Vec<f64> = vals.iter().map(|&l| f(l)).collect();
    let n = a.n;
    DenseMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| v.get(i, k) * fl[k] * v.get(j, k)).sum()
    })
}

/// Singular values, ascending, from the eigenvalues of `AᵀA`.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let ata = a.transpose().matmul(a)?.symmetrize();
    Ok(sym_eigs(&ata)?
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect())
}

/// Number of eigenvalues farther than `eps` from every center.
pub fn cluster_count(eigs: &[f64], centers: &[f64], eps: f64) -> usize {
    eigs.iter()
        .filter(|&&l| centers.iter().all(|c| (l - c).abs() > eps))
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierCount {
    pub centers: Vec<f64>,
    pub eps: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Ascending.
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub outliers: Vec<OutlierCount>,
}

/// Sorts `values` and counts outliers for each `(centers, eps)` query.
pub fn spectrum_report(mut values: Vec<f64>, queries: &[(Vec<f64>, f64)]) -> SpectrumReport {
    values.sort_by(f64::total_cmp);
    let outliers = queries
        .iter()
        .map(|(c, eps)| OutlierCount {
            centers: c.clone(),
            eps: *eps,
            count: cluster_count(&values, c, *eps),
        })
        .collect();
    SpectrumReport {
        min: values.first().copied().unwrap_or(f64::NAN),
        max: values.last().copied().unwrap_or(f64::NAN),
        values,
        outliers,
    }
}

/// Samples of `φ_{|f|}` matched to `N = Π n_i` eigenvalues: `|f|` on a
/// midpoint tensor grid with `n_i` points per level, the negated copy
/// appended, and every second order statistic kept.
pub fn symbol_samples(symbol: &Symbol, dims: &[usize]) -> Result<Vec<f64>> {
    let dims = Dims::new(dims)?;
    if dims.levels() != symbol.levels() {
        return Err(Error::InvalidDims(
            "symbol and dims disagree on levels".into(),
        ));
    }
    let n = dims.total();
    let mut theta = vec![0.0; dims.levels()];
    let mut all = Vec::with_capacity(2 * n);
    for off in 0..n {
        for (l, j) in dims.unravel(off).into_iter().enumerate() {
            let m = dims.level(l) as f64;
            theta[l] = -std::f64::consts::PI + (j as f64 + 0.5) * 2.0 * std::f64::consts::PI / m;
        }
        let a = symbol.eval(&theta).norm();
        all.push(a);
        all.push(-a);
    }
    all.sort_by(f64::total_cmp);
    Ok((0..n).map(|m| all[2 * m + 1]).collect())
}

/// Largest gap between sorted eigenvalues and sorted samples of `φ_{|f|}`.
pub fn distribution_distance(eigs: &[f64], symbol: &Symbol, dims: &[usize]) -> Result<f64> {
    let samples = symbol_samples(symbol, dims)?;
    if samples.len() != eigs.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            got: eigs.len(),
        });
    }
    let mut sorted = eigs.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted
        .iter()
        .zip(&samples)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Smallest and largest eigenvalue of `M⁻¹B` for symmetric `B` and
/// symmetric positive definite `M`, through `L⁻¹ B L⁻ᵀ` with `M = L Lᵀ`.
pub fn check_rayleigh_bounds(b: &DenseMatrix, m: &DenseMatrix) -> Result<(f64, f64)> {
    let e = pencil_eigs(b, m)?;
    Ok((e[0], e[e.len() - 1]))
}

/// All eigenvalues of `M⁻¹B`, ascending.
pub fn pencil_eigs(b: &DenseMatrix, m: &DenseMatrix) -> Result<Vec<f64>> {
    if b.n != m.n {
        return Err(Error::DimensionMismatch {
            expected: m.n,
            got: b.n,
        });
    }
    if b.n == 0 {
        return Err(Error::InvalidDims("empty pencil".into()));
    }
    let l = m.cholesky()?;
    let n = b.n;
    // columns of L⁻¹ B
    let mut x = DenseMatrix::zeros(n)?;
    let bt = b.transpose();
    for j in 0..n {
        let col = l.forward_subst(&bt.data[j * n..(j + 1) * n]);
        for i in 0..n {
            x.set(i, j, col[i]);
        }
    }
    // L⁻¹ (L⁻¹ B)ᵀ = L⁻¹ B L⁻ᵀ
    let mut c = DenseMatrix::zeros(n)?;
    for j in 0..n {
        let row: Vec<f64> = (0..n).map(|k| x.get(j, k)).collect();
        let col = l.forward_subst(&row);
        for i in 0..n {
            c.set(i, j, col[i]);
        }
    }
    sym_eigs(&c.symmetrize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_eigs_sorted() {
        let a = DenseMatrix::from_fn(4, |i, j| {
            if i == j {
                [3.0, -1.0, 2.0, 0.5][i]
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(sym_eigs(&a).unwrap(), vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn tridiagonal_closed_form() {
        let n = 10;
        let a = DenseMatrix::from_fn(n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        })
        .unwrap();
        let e = sym_eigs(&a).unwrap();
        for (j, l) in e.iter().enumerate() {
            let want = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((l - want).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_satisfy_equation() {
        let n = 9;
        let a = DenseMatrix::from_fn(n, |i, j| {
            1.0 / (1.0 + i as f64 + j as f64) + if i == j { i as f64 } else { 0.0 }
        })
        .unwrap();
        let (vals, v) = sym_eigen(&a).unwrap();
        let vtv = v.transpose().matmul(&v).unwrap();
        assert!(vtv.max_abs_diff(&DenseMatrix::identity(n).unwrap()) < 1e-13);
        for k in 0..n {
            let col: Vec<f64> = (0..n).map(|i| v.get(i, k)).collect();
            let av = a.matvec(&col);
            for i in 0..n {
                assert!((av[i] - vals[k] * col[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_nonsymmetric() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eigs(&a), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn cluster_count_examples() {
        assert_eq!(cluster_count(&[1.0; 5], &[1.0], 0.1), 0);
        assert_eq!(cluster_count(&[-1.0, -1.0, 1.0, 3.0], &[-1.0, 1.0], 0.5), 1);
    }

    #[test]
    fn pencil_scaling() {
        let m = DenseMatrix::from_fn(3, |i, j| if i == j { 2.0 + i as f64 } else { 0.3 }).unwrap();
        let (lo, hi) = check_rayleigh_bounds(&m, &m).unwrap();
        assert!((lo - 1.0).abs() < 1e-13 && (hi - 1.0).abs() < 1e-13);
        let (lo, hi) = check_rayleigh_bounds(&m.scaled(2.0), &m).unwrap();
        assert!((lo - 2.0).abs() < 1e-13 && (hi - 2.0).abs() < 1e-13);
        let bad = DenseMatrix::from_fn(3, |i, j| if i == j { -1.0 } else { 0.0 }).unwrap();
        assert!(check_rayleigh_bounds(&m, &bad).is_err());
    }

    #[test]
    fn lu_and_cholesky_solve() {
        let a = DenseMatrix::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap();
        let x = [1.0, -2.0, 0.5];
        let b = a.matvec(&x);
        for sol in [a.lu_solve(&b).unwrap(), a.cholesky_solve(&b).unwrap()] {
            for (s, t) in sol.iter().zip(x) {
                assert!((s - t).abs() < 1e-14);
            }
        }
        let sing = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(sing.lu_solve(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            DenseMatrix::zeros(DENSE_LIMIT + 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn identity_symbol_samples_match_flip() {
        let one = Symbol::real_1d(true, |_| 1.0);
        for n in [6usize, 7] {
            let y = DenseMatrix::identity(n).unwrap().flip_rows();
            let e = sym_eigs(&y).unwrap();
            assert!(distribution_distance(&e, &one, &[n]).unwrap() < 1e-14);
        }
    }
}
