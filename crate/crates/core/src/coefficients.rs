//! Gamma function and fractional finite-difference coefficient sequences.

use std::f64::consts::PI;

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation, reflection below 1/2).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx), with sin(πx) > 0 on (0, 1/2)
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma(x).map(f64::exp)
}

/// Grünwald–Letnikov weights `ω_k = (-1)^k binom(α, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrunwaldSeq {
    pub alpha: f64,
    pub values: Vec<f64>,
}

/// Fractional centered-difference weights `ρ_j`, the Fourier coefficients of
/// `|2 sin(θ/2)|^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracCenteredSeq {
    pub alpha: f64,
    pub values: Vec<f64>,
}

/// First `count` Grünwald weights, from `ω_k = ω_{k-1} (1 - (α+1)/k)`.
pub fn grunwald_coeffs(alpha: f64, count: usize) -> Result<GrunwaldSeq> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!(
            "Grünwald order must lie in (0, 2], got {alpha}"
        )));
    }
    if count == 0 {
        return Err(Error::Domain("coefficient count must be positive".into()));
    }
    let mut values = Vec::with_capacity(count);
    let mut w = 1.0;
    values.push(w);
    for k in 1..count {
        w *= 1.0 - (alpha + 1.0) / k as f64;
        values.push(w);
    }
    Ok(GrunwaldSeq { alpha, values })
}

/// First `count` fractional centered weights, from
/// `ρ_0 = Γ(α+1)/Γ(α/2+1)^2` and `ρ_{j+1} = ρ_j (j - α/2)/(j + 1 + α/2)`.
pub fn frac_centered_coeffs(alpha: f64, count: usize) -> Result<FracCenteredSeq> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!(
            "fractional centered order must lie in (1, 2], got {alpha}"
        )));
    }
    if count == 0 {
        return Err(Error::Domain("coefficient count must be positive".into()));
    }
    let half = alpha / 2.0;
    let mut values = Vec::with_capacity(count);
    let mut rho = (ln_gamma_pos(alpha + 1.0) - 2.0 * ln_gamma_pos(half + 1.0)).exp();
    values.push(rho);
    for j in 0..count.saturating_sub(1) {
        let j = j as f64;
        rho *= (j - half) / (j + 1.0 + half);
        values.push(rho);
    }
    Ok(FracCenteredSeq { alpha, values })
}
