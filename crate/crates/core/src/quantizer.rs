//! One-bit complex quantizer and its Bussgang second-order statistics.
//!
//! For a zero-mean circularly-symmetric Gaussian input `x` with covariance
//! `C_xx`, the quantizer output decomposes as `y = A x + q` where
//! `A = sqrt(2/π) diag(C_xx)^{-1/2}` and `q` is uncorrelated with `x`. The
//! output covariance follows from the arcsine law, which gives the exact
//! quantization-noise covariance `C_qq = C_yy - A C_xx Aᴴ`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};

/// Correlations may overshoot ±1 by this much from rounding before we call it an error.
pub const ARCSIN_CLAMP_TOLERANCE: f64 = 1e-9;

/// Linearized model of the one-bit quantizer for a given input covariance.
#[derive(Clone, Debug)]
pub struct BussgangModel {
    /// Diagonal of the Bussgang gain matrix `A`.
    pub alpha: Vec<f64>,
    /// Output covariance `C_yy` (arcsine law).
    pub c_yy: ComplexMatrix,
    /// Quantization-noise covariance `C_qq`, Hermitian PSD.
    pub c_qq: ComplexMatrix,
}

/// Quantizes one complex sample to `(±1 ± j)/√2`. Zero maps to `+`.
#[inline]
pub fn quantize_sample(z: C64) -> C64 {
    let sign = |v: f64| if v >= 0.0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    C64::new(sign(z.re), sign(z.im))
}

/// Entrywise one-bit quantization; every output entry has unit modulus.
pub fn one_bit_quantize(x: &ComplexMatrix) -> ComplexMatrix {
    x.map(quantize_sample)
}

/// Bussgang gains `sqrt(2/π) / sqrt(c)` for each input variance `c`.
pub fn bussgang_gain(cxx_diag: &[f64]) -> Result<Vec<f64>> {
    cxx_diag
        .iter()
        .map(|&c| {
            if c > 0.0 && c.is_finite() {
                Ok((FRAC_2_PI / c).sqrt())
            } else {
                Err(Error::Domain(format!(
                    "quantizer gain undefined for input variance {c}"
                )))
            }
        })
        .collect()
}

fn positive_diagonal(cxx: &ComplexMatrix) -> Result<Vec<f64>> {
    if cxx.rows() != cxx.cols() {
        return Err(Error::Dimension(format!(
            "covariance must be square, got {}x{}",
            cxx.rows(),
            cxx.cols()
        )));
    }
    let diag: Vec<f64> = cxx.diag().iter().map(|z| z.re).collect();
    if let Some(bad) = diag.iter().find(|&&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::Domain(format!(
            "covariance diagonal must be positive, found {bad}"
        )));
    }
    Ok(diag)
}

fn clamped_arcsin(v: f64) -> Result<f64> {
    if v.abs() > 1.0 + ARCSIN_CLAMP_TOLERANCE || v.is_nan() {
        return Err(Error::Domain(format!("normalized correlation {v} outside [-1, 1]")));
    }
    Ok(v.clamp(-1.0, 1.0).asin())
}

/// Output covariance of [`one_bit_quantize`] applied to `x ~ CN(0, cxx)`:
/// `(2/π) [asin(Re Σ) + j asin(Im Σ)]` with `Σ` the normalized correlation.
pub fn arcsine_covariance(cxx: &ComplexMatrix) -> Result<ComplexMatrix> {
    let diag = positive_diagonal(cxx)?;
    let n = diag.len();
    let tol = ARCSIN_CLAMP_TOLERANCE * diag.iter().cloned().fold(0.0, f64::max);

    let mut out = ComplexMatrix::identity(n);
    for m in 0..n {
        for k in (m + 1)..n {
            let upper = cxx[(m, k)];
            if (upper - cxx[(k, m)].conj()).norm() > tol {
                return Err(Error::Domain(format!("covariance is not Hermitian at ({m}, {k})")));
            }
            // one square root of the product keeps ρ = 1 exact for identical diagonals
            let rho = upper / (diag[m] * diag[k]).sqrt();
            let v = C64::new(clamped_arcsin(rho.re)?, clamped_arcsin(rho.im)?) * FRAC_2_PI;
            out[(m, k)] = v;
            out[(k, m)] = v.conj();
        }
    }
    Ok(out)
}

/// Bussgang gain and exact quantization-noise covariance for input covariance `cxx`.
pub fn quantization_noise_covariance(cxx: &ComplexMatrix) -> Result<BussgangModel> {
    let diag = positive_diagonal(cxx)?;
    let alpha = bussgang_gain(&diag)?;
    let c_yy = arcsine_covariance(cxx)?;
    let n = alpha.len();
    let mut c_qq = c_yy.clone();
    for m in 0..n {
        for k in 0..n {
            c_qq[(m, k)] -= cxx[(m, k)] * (alpha[m] * alpha[k]);
        }
        // a_m² c_mm = 2/π exactly; keep the diagonal real
        c_qq[(m, m)] = C64::new(1.0 - FRAC_2_PI, 0.0);
    }
    Ok(BussgangModel { alpha, c_yy, c_qq })
}
