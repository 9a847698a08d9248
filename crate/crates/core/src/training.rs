//! Uplink training through one-bit ADCs and the LMMSE channel estimate.
//!
//! Users send orthogonal pilots `Φ` (τ × K, `ΦᴴΦ = τI`). The base station
//! sees `Y_p = √ρ_p H Φᵀ + N_p`, quantizes it to `R_p = Q(Y_p)` and forms
//! `ĥ = Φ̃ᴴ vec(R_p)` with `Φ̃ = α_p (Φ ⊗ √ρ_p I_M)`. The Kronecker form is
//! available through [`training_operator`]; the estimator itself uses the
//! equivalent `Ĥ = α_p √ρ_p R_p conj(Φ)`.

use std::f64::consts::{FRAC_2_PI, PI};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::numerics::{kron, sample_cn, ComplexMatrix, RandomStream, C64};
use crate::quantizer::one_bit_quantize;

/// How a channel estimate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimateMode {
    /// Pilots, AWGN and one-bit ADCs simulated explicitly.
    Simulated,
    /// Jointly Gaussian `(h, ĥ)` pairs with the LMMSE second moments.
    GaussianApprox,
}

impl EstimateMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateMode::Simulated => "simulated",
            EstimateMode::GaussianApprox => "gaussian",
        }
    }
}

impl std::str::FromStr for EstimateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulated" => Ok(EstimateMode::Simulated),
            "gaussian" | "gaussian_approx" => Ok(EstimateMode::GaussianApprox),
            other => Err(Error::InvalidArgument(format!("unknown estimate mode '{other}'"))),
        }
    }
}

/// Channel estimate `Ĥ` (M × K) with its per-entry model variance η².
#[derive(Clone, Debug)]
pub struct ChannelEstimate {
    pub h_hat: ComplexMatrix,
    pub eta_sq: f64,
    pub mode: EstimateMode,
}

/// Unit-modulus DFT pilots, `Φ[t, k] = exp(-2πj·t·k/K)`.
pub fn generate_pilots(k: usize, tau: usize) -> Result<ComplexMatrix> {
    if tau != k {
        return Err(Error::Unsupported(format!(
            "pilot length {tau} must equal user count {k}"
        )));
    }
    Ok(ComplexMatrix::from_fn(tau, k, |t, u| {
        // reduce the exponent first so large K keeps full phase accuracy
        let phase = -2.0 * PI * ((t * u) % k) as f64 / k as f64;
        C64::from_polar(1.0, phase)
    }))
}

/// Bussgang gain of the training quantizer, `sqrt(2 / (π (Kρ_p + 1)))`.
pub fn alpha_p(cfg: &SystemConfig) -> f64 {
    (FRAC_2_PI / (cfg.k() as f64 * cfg.rho_p() + 1.0)).sqrt()
}

/// Per-entry variance of the estimate, `2Kρ_p / (π (1 + Kρ_p))`.
pub fn eta_squared(cfg: &SystemConfig) -> f64 {
    let krho = cfg.k() as f64 * cfg.rho_p();
    FRAC_2_PI * krho / (1.0 + krho)
}

/// Explicit `Φ ⊗ √ρ_p I_M` (Mτ × MK). Quadratic in M·K; meant for small checks.
pub fn training_operator(cfg: &SystemConfig) -> Result<ComplexMatrix> {
    let pilots = generate_pilots(cfg.k(), cfg.tau())?;
    Ok(kron(
        &pilots,
        &ComplexMatrix::identity(cfg.m()).scale(cfg.rho_p().sqrt()),
    ))
}

fn check_channel_shape(h: &ComplexMatrix, cfg: &SystemConfig) -> Result<()> {
    if h.shape() != (cfg.m(), cfg.k()) {
        return Err(Error::Dimension(format!(
            "channel is {}x{}, config expects {}x{}",
            h.rows(),
            h.cols(),
            cfg.m(),
            cfg.k()
        )));
    }
    Ok(())
}

/// Unquantized received training block `Y_p = √ρ_p H Φᵀ + N_p` (M × τ).
pub fn training_signal(h: &ComplexMatrix, noise: &ComplexMatrix, cfg: &SystemConfig) -> Result<ComplexMatrix> {
    check_channel_shape(h, cfg)?;
    if noise.shape() != (cfg.m(), cfg.tau()) {
        return Err(Error::Dimension(format!(
            "training noise is {}x{}, expected {}x{}",
            noise.rows(),
            noise.cols(),
            cfg.m(),
            cfg.tau()
        )));
    }
    let pilots = generate_pilots(cfg.k(), cfg.tau())?;
    h.matmul(&pilots.transpose())?.scale(cfg.rho_p().sqrt()).add(noise)
}

/// LMMSE estimate from the quantized training block `R_p` (M × τ).
///
/// Linear in `R_p`: `Ĥ = α_p √ρ_p R_p conj(Φ)`, i.e. `vec(Ĥ) = Φ̃ᴴ vec(R_p)`.
pub fn lmmse_estimate(r_p: &ComplexMatrix, cfg: &SystemConfig) -> Result<ComplexMatrix> {
    if r_p.shape() != (cfg.m(), cfg.tau()) {
        return Err(Error::Dimension(format!(
            "quantized training block is {}x{}, expected {}x{}",
            r_p.rows(),
            r_p.cols(),
            cfg.m(),
            cfg.tau()
        )));
    }
    let pilots = generate_pilots(cfg.k(), cfg.tau())?;
    Ok(r_p.matmul(&pilots.conj())?.scale(alpha_p(cfg) * cfg.rho_p().sqrt()))
}

/// Runs one training round over channel `h` with CN(0, 1) receiver noise from `stream`.
pub fn train_and_estimate(h: &ComplexMatrix, cfg: &SystemConfig, stream: RandomStream) -> Result<ChannelEstimate> {
    check_channel_shape(h, cfg)?;
    let noise = sample_cn(cfg.m(), cfg.tau(), 1.0, stream);
    let r_p = one_bit_quantize(&training_signal(h, &noise, cfg)?);
    Ok(ChannelEstimate {
        h_hat: lmmse_estimate(&r_p, cfg)?,
        eta_sq: eta_squared(cfg),
        mode: EstimateMode::Simulated,
    })
}

/// Draws `(H, Ĥ)` with `h ~ CN(0,1)` and `ĥ = η² h + sqrt(η² − η⁴) e`, entrywise.
///
/// This gives `E|ĥ|² = η²` and `E{ĥ h*} = η²`. `eta_sq` must lie in `[0, 1]`.
pub fn sample_joint_gaussian(
    m: usize,
    k: usize,
    eta_sq: f64,
    stream: RandomStream,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !(0.0..=1.0).contains(&eta_sq) {
        return Err(Error::Domain(format!("estimate variance {eta_sq} outside [0, 1]")));
    }
    let h = sample_cn(m, k, 1.0, stream.substream(0));
    let e = sample_cn(m, k, 1.0, stream.substream(1));
    let spread = (eta_sq - eta_sq * eta_sq).sqrt();
    let h_hat = ComplexMatrix::new(
        m,
        k,
        h.as_slice()
            .iter()
            .zip(e.as_slice())
            .map(|(&hv, &ev)| hv * eta_sq + ev * spread)
            .collect(),
    )?;
    Ok((h, h_hat))
}

/// Gaussian-approximation counterpart of [`train_and_estimate`].
pub fn sample_estimate_gaussian_approx(
    cfg: &SystemConfig,
    stream: RandomStream,
) -> Result<(ComplexMatrix, ChannelEstimate)> {
    let eta_sq = eta_squared(cfg);
    let (h, h_hat) = sample_joint_gaussian(cfg.m(), cfg.k(), eta_sq, stream)?;
    Ok((
        h,
        ChannelEstimate {
            h_hat,
            eta_sq,
            mode: EstimateMode::GaussianApprox,
        },
    ))
}

/// Channel and estimate for one Monte-Carlo trial. Substream 0 holds the
/// channel draw in both modes.
pub fn draw_channel_pair(
    cfg: &SystemConfig,
    mode: EstimateMode,
    stream: RandomStream,
) -> Result<(ComplexMatrix, ChannelEstimate)> {
    match mode {
        EstimateMode::Simulated => {
            let h = sample_cn(cfg.m(), cfg.k(), 1.0, stream.substream(0));
            let est = train_and_estimate(&h, cfg, stream.substream(1))?;
            Ok((h, est))
        }
        EstimateMode::GaussianApprox => sample_estimate_gaussian_approx(cfg, stream),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{unvec, vec};
    use crate::quantizer::one_bit_quantize;

    fn cfg(m: usize, k: usize, rho_p: f64) -> SystemConfig {
        SystemConfig::new(m, k, rho_p, 10.0).unwrap()
    }

    #[test]
    fn scalar_pilot() {
        let p = generate_pilots(1, 1).unwrap();
        assert_eq!(p.as_slice(), &[C64::new(1.0, 0.0)]);
    }

    #[test]
    fn pilots_are_orthogonal_and_unit_modulus() {
        for k in [1, 2, 3, 4, 7, 10, 16, 33] {
            let p = generate_pilots(k, k).unwrap();
            let gram = p.adjoint().matmul(&p).unwrap();
            let target = ComplexMatrix::identity(k).scale(k as f64);
            assert!(gram.max_abs_diff(&target) < 1e-12, "K={k}");
            assert!(p.as_slice().iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn four_user_pilots_are_dft() {
        let p = generate_pilots(4, 4).unwrap();
        // row 1 of the 4-point DFT: 1, -j, -1, j
        let expected = [
            C64::new(1.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 1.0),
        ];
        for (got, want) in p.row(1).iter().zip(expected) {
            assert!((got - want).norm() < 1e-15);
        }
    }

    #[test]
    fn pilot_length_must_match_users() {
        assert!(matches!(generate_pilots(4, 5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn alpha_and_eta_values() {
        assert!((alpha_p(&cfg(64, 10, 10.0)) - 0.079_392_481).abs() < 1e-9);
        assert!((alpha_p(&cfg(4, 1, 1.0)) - (1.0 / PI).sqrt()).abs() < 1e-15);
        assert!((eta_squared(&cfg(64, 10, 10.0)) - 0.630_316_606).abs() < 1e-9);
        assert!(alpha_p(&cfg(4, 10, 1e12)) < 1e-6);
        assert!((eta_squared(&cfg(4, 10, 1e12)) - FRAC_2_PI).abs() < 1e-12);
        assert!(eta_squared(&cfg(4, 10, 1e-12)) < 1e-11);
    }

    #[test]
    fn eta_is_monotone_and_bounded() {
        let mut last = 0.0;
        for i in -40..60 {
            let rho = 10f64.powf(i as f64 / 10.0);
            let e = eta_squared(&cfg(8, 10, rho));
            assert!(e > last && e < FRAC_2_PI);
            last = e;
        }
    }

    #[test]
    fn fast_training_matches_kronecker_form() {
        let c = cfg(5, 3, 2.5);
        let s = RandomStream::new(17, 0);
        let h = sample_cn(5, 3, 1.0, s.substream(0));
        let noise = sample_cn(5, 3, 1.0, s.substream(1));

        let y_kron = training_operator(&c)
            .unwrap()
            .matmul(&vec(&h))
            .unwrap()
            .add(&vec(&noise))
            .unwrap();
        let y_fast = training_signal(&h, &noise, &c).unwrap();
        assert!(vec(&y_fast).max_abs_diff(&y_kron) < 1e-12);

        // ĥ = Φ̃ᴴ r_p with Φ̃ = α_p (Φ ⊗ √ρ I)
        let r_p = one_bit_quantize(&y_kron);
        let phi_tilde = training_operator(&c).unwrap().scale(alpha_p(&c));
        let h_hat_kron = unvec(&phi_tilde.adjoint().matmul(&r_p).unwrap(), 5, 3).unwrap();
        let h_hat_fast = lmmse_estimate(&unvec(&r_p, 5, 3).unwrap(), &c).unwrap();
        assert!(h_hat_fast.max_abs_diff(&h_hat_kron) < 1e-12);
    }

    #[test]
    fn estimator_is_linear_in_quantized_block() {
        let c = cfg(6, 4, 1.0);
        let s = RandomStream::new(3, 9);
        let r1 = one_bit_quantize(&sample_cn(6, 4, 1.0, s.substream(0)));
        let r2 = one_bit_quantize(&sample_cn(6, 4, 1.0, s.substream(1)));
        let a = C64::new(0.3, -1.2);
        let combo = r1.scale_complex(a).add(&r2).unwrap();
        let lhs = lmmse_estimate(&combo, &c).unwrap();
        let rhs = lmmse_estimate(&r1, &c)
            .unwrap()
            .scale_complex(a)
            .add(&lmmse_estimate(&r2, &c).unwrap())
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let c = cfg(4, 2, 1.0);
        let h = ComplexMatrix::zeros(3, 2);
        assert!(matches!(
            train_and_estimate(&h, &c, RandomStream::new(0, 0)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            lmmse_estimate(&ComplexMatrix::zeros(4, 3), &c),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn estimate_reports_model_variance() {
        let c = cfg(8, 4, 3.0);
        let (h, est) = draw_channel_pair(&c, EstimateMode::Simulated, RandomStream::new(1, 1)).unwrap();
        assert_eq!(h.shape(), (8, 4));
        assert_eq!(est.h_hat.shape(), (8, 4));
        assert_eq!(est.mode, EstimateMode::Simulated);
        assert!((est.eta_sq - 24.0 / (13.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn zero_variance_estimate_is_zero() {
        let (h, h_hat) = sample_joint_gaussian(5, 3, 0.0, RandomStream::new(4, 4)).unwrap();
        assert_eq!(h_hat, ComplexMatrix::zeros(5, 3));
        assert!(h.norm_sqr() > 0.0);
        assert!(sample_joint_gaussian(5, 3, 1.5, RandomStream::new(4, 4)).is_err());
    }

    #[test]
    fn simulated_row_energy_is_deterministic() {
        // unit-modulus R_p and DFT pilots give Σ_k |ĥ_mk|² = K η² for every antenna
        let c = cfg(16, 10, 10.0);
        let (_, est) = draw_channel_pair(&c, EstimateMode::Simulated, RandomStream::new(2, 2)).unwrap();
        for m in 0..16 {
            let e: f64 = est.h_hat.row(m).iter().map(|z| z.norm_sqr()).sum();
            assert!((e - 10.0 * est.eta_sq).abs() < 1e-12);
        }
    }
}
