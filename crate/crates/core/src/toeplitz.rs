//! Multilevel Toeplitz operators with FFT matvec.
//!
//! Each level of size `n_i` is embedded in a circulant of size
//! `L_i ≥ 2 n_i - 1`, a power of two (coefficients `t_0 .. t_{n-1}`, zero
//! padding, then `t_{-(n-1)} .. t_{-1}`), so `T x` is read off the first
//! `n_i` entries per level of a multilevel circular convolution.

use num_complex::Complex64;

use crate::fft::NdFft;
use crate::grid::Dims;
use crate::symbols::CoeffTensor;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    dims: Dims,
    coeffs: CoeffTensor,
    embed_shape: Vec<usize>,
    spectrum: Vec<Complex64>,
    fft: NdFft,
    symmetric: bool,
}

/// Builds the operator and precomputes the spectrum of its circulant embedding.
pub fn build_toeplitz(coeffs: CoeffTensor) -> Result<ToeplitzOperator> {
    let coeffs = coeffs.into_real(1e-10)?;
    let dims = coeffs.dims().clone();
    let embed_shape: Vec<usize> = dims
        .as_slice()
        .iter()
        .map(|&n| (2 * n - 1).next_power_of_two())
        .collect();
    let embed = Dims::new(&embed_shape)?;
    let mut spectrum = vec![Complex64::default(); embed.total()];
    let coeff_shape = coeffs.shape();
    let mut pos = vec![0usize; dims.levels()];
    for (off, &c) in coeffs.entries().iter().enumerate() {
        if c == Complex64::default() {
            continue;
        }
        let mut rem = off;
        for (l, &ext) in coeff_shape.iter().enumerate() {
            let j = (rem % ext) as isize - (dims.level(l) as isize - 1);
            rem /= ext;
            pos[l] = j.rem_euclid(embed_shape[l] as isize) as usize;
        }
        spectrum[embed.offset(&pos)] = c;
    }
    let fft = NdFft::new(&embed_shape);
    fft.forward(&mut spectrum);
    let symmetric = coeffs.is_symmetric(0.0);
    Ok(ToeplitzOperator {
        dims,
        coeffs,
        embed_shape,
        spectrum,
        fft,
        symmetric,
    })
}

impl ToeplitzOperator {
    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn coeffs(&self) -> &CoeffTensor {
        &self.coeffs
    }

    /// True when the coefficient at `j` equals the one at `-j` exactly.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `y = T x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.dims.check_len(x.len())?;
        let embed = Dims::new(&self.embed_shape)?;
        let mut buf = vec![Complex64::default(); embed.total()];
        let n0 = self.dims.level(0);
        // level-1 lines are contiguous in both layouts
        for (line, chunk) in x.chunks(n0).enumerate() {
            let start = self.embedded_line_start(line);
            for (dst, &v) in buf[start..start + n0].iter_mut().zip(chunk) {
                *dst = Complex64::new(v, 0.0);
            }
        }
        let support = self.dims.as_slice();
        self.fft.forward_supported(&mut buf, support);
        buf.iter_mut()
            .zip(&self.spectrum)
            .for_each(|(b, s)| *b *= s);
        self.fft.inverse_supported(&mut buf, support);
        let mut y = vec![0.0; x.len()];
        for (line, chunk) in y.chunks_mut(n0).enumerate() {
            let start = self.embedded_line_start(line);
            for (dst, src) in chunk.iter_mut().zip(&buf[start..start + n0]) {
                *dst = src.re;
            }
        }
        Ok(y)
    }

    /// Offset in the embedding grid of the start of level-1 line `line`.
    fn embedded_line_start(&self, line: usize) -> usize {
        let mut rem = line;
        let mut off = 0;
        let mut stride = self.embed_shape[0];
        for l in 1..self.dims.levels() {
            let n = self.dims.level(l);
            off += (rem % n) * stride;
            rem /= n;
            stride *= self.embed_shape[l];
        }
        off
    }

    /// `Tᵀ`, generated by `f(-θ)`.
    pub fn transpose(&self) -> Result<ToeplitzOperator> {
        if self.symmetric {
            return Ok(self.clone());
        }
        build_toeplitz(self.coeffs.reflect())
    }

    /// Linear combination `Σ c_i T_i` of operators with equal dims.
    pub fn combine(terms: &[(f64, &ToeplitzOperator)]) -> Result<ToeplitzOperator> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidDims("empty combination".into()))?;
        let mut acc = CoeffTensor::zeros(first.1.dims());
        for (c, op) in terms {
            acc.add_assign_scaled(op.coeffs(), *c)?;
        }
        build_toeplitz(acc)
    }
}

/// `I ⊗ .. ⊗ T ⊗ .. ⊗ I` with `T` at the 0-based level `position`.
pub fn kron_identity_embed(
    op1d: &ToeplitzOperator,
    position: usize,
    dims: &[usize],
) -> Result<ToeplitzOperator> {
    let dims = Dims::new(dims)?;
    if dims.levels() == 1 && position == 0 {
        if dims.level(0) != op1d.dims.level(0) {
            return Err(Error::InvalidDims("size mismatch".into()));
        }
        return Ok(op1d.clone());
    }
    build_toeplitz(CoeffTensor::embed_level(op1d.coeffs(), position, &dims)?)
}
