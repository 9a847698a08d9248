//! Matched-filter downlink through one-bit DACs and its achievable rates.
//!
//! Four rate evaluations are provided:
//!
//! * [`monte_carlo_rate`]: ergodic bound averaged over channel/estimate
//!   draws, with the quantization noise treated as Gaussian with its exact
//!   conditional covariance (arcsine law on `Ĥ*Ĥᵀ`).
//! * [`use_and_forget_rate`]: the known-mean-gain bound built term by term
//!   from the closed-form second moments of the LMMSE estimate.
//! * [`closed_form_rate`]: the simplified expression
//!   `log2(1 + 4Mρ_pP_t / (π²(1+Kρ_p)(1+P_t)))`.
//! * [`conventional_rate`]: the same MF downlink with ideal converters.
//!
//! [`empirical_mse_bound`] simulates the whole chain and measures the
//! symbol-estimation MSE that the use-and-forget bound is built on.

use std::f64::consts::{FRAC_2_PI, LN_2, PI};

use rayon::prelude::*;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::numerics::{sample_cn, ComplexMatrix, RandomStream, C64};
use crate::quantizer::{one_bit_quantize, quantization_noise_covariance};
use crate::stats::{CompensatedSum, MeanEstimate};
use crate::training::{draw_channel_pair, eta_squared, ChannelEstimate, EstimateMode};

/// Power terms of one user's SINR. `awgn` is 1 under the unit-noise normalization.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SinrComponents {
    pub desired: f64,
    pub gain_var: f64,
    pub interference: f64,
    pub quant_noise: f64,
    pub awgn: f64,
}

impl SinrComponents {
    pub fn sinr(&self) -> f64 {
        self.desired / (self.gain_var + self.interference + self.quant_noise + self.awgn)
    }

    /// `log2(1 + SINR)` in bits/s/Hz.
    pub fn rate(&self) -> f64 {
        self.sinr().ln_1p() / LN_2
    }

    fn accumulate(items: &[SinrComponents]) -> SinrComponents {
        let n = items.len() as f64;
        let mean = |f: fn(&SinrComponents) -> f64| items.iter().map(f).collect::<CompensatedSum>().value() / n;
        SinrComponents {
            desired: mean(|c| c.desired),
            gain_var: mean(|c| c.gain_var),
            interference: mean(|c| c.interference),
            quant_noise: mean(|c| c.quant_noise),
            awgn: mean(|c| c.awgn),
        }
    }
}

/// Which evaluation produced a [`RateReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RateMethod {
    MonteCarlo,
    ClosedForm,
    UseAndForget,
    Conventional,
}

impl RateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateMethod::MonteCarlo => "monte_carlo",
            RateMethod::ClosedForm => "closed_form",
            RateMethod::UseAndForget => "use_and_forget",
            RateMethod::Conventional => "conventional",
        }
    }
}

/// Per-user and sum rates in bits/s/Hz.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub per_user_rate: Vec<f64>,
    /// Standard error of each per-user rate; zeros for analytic methods.
    pub per_user_stderr: Vec<f64>,
    pub sum_rate: f64,
    /// Standard error of the sum rate; zero for analytic methods.
    pub sum_rate_stderr: f64,
    /// Per-user power terms. Monte-Carlo reports trial averages.
    pub components: Vec<SinrComponents>,
    pub method: RateMethod,
    /// Monte-Carlo trial count, 0 for analytic methods.
    pub trials: usize,
}

impl RateReport {
    fn analytic(method: RateMethod, per_user_rate: Vec<f64>, components: Vec<SinrComponents>) -> Self {
        let sum_rate = per_user_rate.iter().copied().collect::<CompensatedSum>().value();
        Self {
            per_user_stderr: vec![0.0; per_user_rate.len()],
            per_user_rate,
            sum_rate,
            sum_rate_stderr: 0.0,
            components,
            method,
            trials: 0,
        }
    }
}

/// Transmit scaling `sqrt(P_t / M)` that meets the total power constraint.
pub fn gamma(cfg: &SystemConfig) -> f64 {
    (cfg.p_t() / cfg.m() as f64).sqrt()
}

/// Matched-filter precoder `W = Ĥ*`.
pub fn mf_precode(estimate: &ChannelEstimate) -> ComplexMatrix {
    estimate.h_hat.conj()
}

/// One-bit transmit vector `Q(W s)` for a K × 1 symbol vector.
pub fn transmit(w: &ComplexMatrix, s: &ComplexMatrix) -> Result<ComplexMatrix> {
    if s.cols() != 1 || w.cols() != s.rows() {
        return Err(Error::Dimension(format!(
            "precoder is {}x{}, symbols are {}x{}",
            w.rows(),
            w.cols(),
            s.rows(),
            s.cols()
        )));
    }
    Ok(one_bit_quantize(&w.matmul(s)?))
}

fn check_pair(h: &ComplexMatrix, h_hat: &ComplexMatrix, cfg: &SystemConfig) -> Result<()> {
    let want = (cfg.m(), cfg.k());
    if h.shape() != want || h_hat.shape() != want {
        return Err(Error::Dimension(format!(
            "channel {:?} and estimate {:?} must both be {want:?}",
            h.shape(),
            h_hat.shape()
        )));
    }
    Ok(())
}

/// SINR terms for every user, conditioned on one channel/estimate realization.
///
/// The Bussgang gains and the quantization-noise covariance come from the
/// conditional precoded covariance `C_xx = Ĥ*Ĥᵀ`. `gain_var` is zero since
/// the effective gain is known given the realization.
pub fn sinr_terms_conditional(
    h: &ComplexMatrix,
    estimate: &ChannelEstimate,
    cfg: &SystemConfig,
) -> Result<Vec<SinrComponents>> {
    check_pair(h, &estimate.h_hat, cfg)?;
    let (m, k) = (cfg.m(), cfg.k());
    let g2 = cfg.p_t() / m as f64;

    let w = mf_precode(estimate);
    let cxx = w.matmul(&w.adjoint())?;
    let model = quantization_noise_covariance(&cxx)?;

    // gains[u][i] = h_uᵀ A ĥ_i*
    let mut gains = ComplexMatrix::zeros(k, k);
    for ant in 0..m {
        let a = model.alpha[ant];
        for u in 0..k {
            let hu = h[(ant, u)] * a;
            for i in 0..k {
                gains[(u, i)] += hu * w[(ant, i)];
            }
        }
    }

    let mut out = Vec::with_capacity(k);
    for u in 0..k {
        let hu = h.column(u);
        let mut quad = CompensatedSum::new();
        for (r, &hr) in hu.iter().enumerate() {
            let row = model.c_qq.row(r);
            let inner: C64 = row.iter().zip(&hu).map(|(&c, &hc)| c * hc.conj()).sum();
            quad.add((hr * inner).re);
        }
        let desired = gains[(u, u)].norm_sqr();
        let interference: f64 = (0..k).filter(|&i| i != u).map(|i| gains[(u, i)].norm_sqr()).sum();
        out.push(SinrComponents {
            desired: g2 * desired,
            gain_var: 0.0,
            interference: g2 * interference,
            quant_noise: g2 * quad.value().max(0.0),
            awgn: 1.0,
        });
    }
    Ok(out)
}

/// Ergodic rate bound averaged over `trials` independent channel/estimate
/// draws. Trial `t` uses `stream.substream(t)`, so the result does not
/// depend on the rayon thread count.
pub fn monte_carlo_rate(
    cfg: &SystemConfig,
    trials: usize,
    stream: RandomStream,
    mode: EstimateMode,
) -> Result<RateReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("Monte-Carlo needs at least one trial".into()));
    }
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (h, est) = draw_channel_pair(cfg, mode, stream.substream(t as u64))?;
            sinr_terms_conditional(&h, &est, cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let k = cfg.k();
    let mut per_user_rate = Vec::with_capacity(k);
    let mut per_user_stderr = Vec::with_capacity(k);
    let mut components = Vec::with_capacity(k);
    for u in 0..k {
        let rates: Vec<f64> = per_trial.iter().map(|c| c[u].rate()).collect();
        let est = MeanEstimate::from_samples(&rates);
        per_user_rate.push(est.mean);
        per_user_stderr.push(est.stderr);
        let terms: Vec<SinrComponents> = per_trial.iter().map(|c| c[u]).collect();
        components.push(SinrComponents::accumulate(&terms));
    }
    let sums: Vec<f64> = per_trial
        .iter()
        .map(|c| c.iter().map(SinrComponents::rate).collect::<CompensatedSum>().value())
        .collect();
    let sum = MeanEstimate::from_samples(&sums);

    Ok(RateReport {
        per_user_rate,
        per_user_stderr,
        sum_rate: sum.mean,
        sum_rate_stderr: sum.stderr,
        components,
        method: RateMethod::MonteCarlo,
        trials,
    })
}

/// Downlink Bussgang gain `sqrt(2 / (π K η²))` under the LMMSE estimate.
pub fn alpha_d(cfg: &SystemConfig) -> f64 {
    (FRAC_2_PI / (cfg.k() as f64 * eta_squared(cfg))).sqrt()
}

/// Power terms of the use-and-forget bound from the estimate's second moments:
/// `E{ĥ_kᵀh_k*} = Mη²`, `Var{ĥ_kᵀh_k*} = Mη²`, `E|ĥ_kᵀh_i*|² = Mη²` (i ≠ k)
/// and `E‖h_k‖² = M`.
pub fn moment_components(cfg: &SystemConfig) -> SinrComponents {
    let m = cfg.m() as f64;
    let k = cfg.k() as f64;
    let eta_sq = eta_squared(cfg);
    let g2 = cfg.p_t() / m;
    let scale = alpha_d(cfg).powi(2) * g2;
    SinrComponents {
        desired: scale * (m * eta_sq).powi(2),
        gain_var: scale * m * eta_sq,
        interference: scale * m * (k - 1.0) * eta_sq,
        quant_noise: g2 * (1.0 - FRAC_2_PI) * m,
        awgn: 1.0,
    }
}

/// Use-and-forget bound evaluated from [`moment_components`].
pub fn use_and_forget_rate(cfg: &SystemConfig) -> RateReport {
    let c = moment_components(cfg);
    RateReport::analytic(RateMethod::UseAndForget, vec![c.rate(); cfg.k()], vec![c; cfg.k()])
}

/// Per-user closed-form rate of the one-bit MF downlink.
pub fn closed_form_per_user(m: f64, k: f64, rho_p: f64, p_t: f64) -> f64 {
    let sinr = 4.0 * m * rho_p * p_t / (PI * PI * (1.0 + k * rho_p) * (1.0 + p_t));
    sinr.ln_1p() / LN_2
}

/// Closed-form rate of the one-bit MF downlink, same for every user.
pub fn closed_form_rate(cfg: &SystemConfig) -> RateReport {
    let r = closed_form_per_user(cfg.m() as f64, cfg.k() as f64, cfg.rho_p(), cfg.p_t());
    RateReport::analytic(
        RateMethod::ClosedForm,
        vec![r; cfg.k()],
        vec![moment_components(cfg); cfg.k()],
    )
}

/// Per-user rate of the MF downlink with ideal converters.
pub fn conventional_per_user(m: f64, k: f64, rho_p: f64, p_t: f64) -> f64 {
    let sinr = m * rho_p * p_t / ((1.0 + p_t) * (1.0 + k * rho_p));
    sinr.ln_1p() / LN_2
}

/// Power terms of the ideal-converter MF downlink. With estimate variance
/// `η_c² = Kρ_p/(1+Kρ_p)` and `γ_c² = P_t/(MKη_c²)`, gain variance and
/// interference add up to `P_t` and there is no quantization noise.
pub fn conventional_components(cfg: &SystemConfig) -> SinrComponents {
    let m = cfg.m() as f64;
    let k = cfg.k() as f64;
    let krho = k * cfg.rho_p();
    let eta_c = krho / (1.0 + krho);
    let g2 = cfg.p_t() / (m * k * eta_c);
    SinrComponents {
        desired: g2 * (m * eta_c).powi(2),
        gain_var: g2 * m * eta_c,
        interference: g2 * m * (k - 1.0) * eta_c,
        quant_noise: 0.0,
        awgn: 1.0,
    }
}

/// Rate of the ideal-converter MF downlink.
pub fn conventional_rate(cfg: &SystemConfig) -> RateReport {
    let r = conventional_per_user(cfg.m() as f64, cfg.k() as f64, cfg.rho_p(), cfg.p_t());
    RateReport::analytic(
        RateMethod::Conventional,
        vec![r; cfg.k()],
        vec![conventional_components(cfg); cfg.k()],
    )
}

/// Per-user large-M limit with fixed training power and `P_t = E_t / M`.
pub fn case1_limit(rho_p: f64, e_t: f64, k: usize) -> f64 {
    (4.0 * rho_p * e_t / (PI * PI * (1.0 + k as f64 * rho_p))).ln_1p() / LN_2
}

/// Per-user large-M limit with `ρ_p = E_u/√M` and `P_t = E_t/√M`.
pub fn case2_limit(e_u: f64, e_t: f64) -> f64 {
    (4.0 * e_u * e_t / (PI * PI)).ln_1p() / LN_2
}

/// Converter type at the base station.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArraySystem {
    OneBit,
    Conventional,
}

impl ArraySystem {
    pub fn per_user_rate(&self, m: usize, k: usize, rho_p: f64, p_t: f64) -> f64 {
        match self {
            ArraySystem::OneBit => closed_form_per_user(m as f64, k as f64, rho_p, p_t),
            ArraySystem::Conventional => conventional_per_user(m as f64, k as f64, rho_p, p_t),
        }
    }
}

/// Smallest antenna count whose closed-form per-user rate reaches `target`.
/// `cfg.m()` is ignored.
pub fn required_antennas(target_rate_per_user: f64, cfg: &SystemConfig, system: ArraySystem) -> Result<usize> {
    if !(target_rate_per_user >= 0.0 && target_rate_per_user.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target rate must be finite and nonnegative, got {target_rate_per_user}"
        )));
    }
    let (k, rho_p, p_t) = (cfg.k(), cfg.rho_p(), cfg.p_t());
    let rate = |m: usize| system.per_user_rate(m, k, rho_p, p_t);
    if rate(1) >= target_rate_per_user {
        return Ok(1);
    }
    // the SINR is linear in M: slope * M
    let slope = match system {
        ArraySystem::OneBit => 4.0 * rho_p * p_t / (PI * PI * (1.0 + k as f64 * rho_p) * (1.0 + p_t)),
        ArraySystem::Conventional => rho_p * p_t / ((1.0 + p_t) * (1.0 + k as f64 * rho_p)),
    };
    if slope <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "a per-user rate of {target_rate_per_user} is unreachable at zero transmit power"
        )));
    }
    let estimate = (target_rate_per_user.exp2() - 1.0) / slope;
    if estimate > usize::MAX as f64 / 2.0 {
        return Err(Error::InvalidArgument(format!(
            "target {target_rate_per_user} needs an absurd array"
        )));
    }
    let mut m = (estimate.ceil() as usize).max(1);
    while rate(m) < target_rate_per_user {
        m += 1;
    }
    while m > 1 && rate(m - 1) >= target_rate_per_user {
        m -= 1;
    }
    Ok(m)
}

/// Where the base station's channel knowledge comes from in [`empirical_mse_bound_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsiSource {
    Trained(EstimateMode),
    /// `Ĥ = H`.
    Perfect,
}

/// Result of the simulated symbol-estimation chain.
#[derive(Clone, Debug)]
pub struct MseBound {
    /// `log2(1 / MSE_k)` per user.
    pub per_user_rate: Vec<f64>,
    pub per_user_stderr: Vec<f64>,
    pub mse: Vec<f64>,
    /// Deterministic gain multiplying `s_k` in the received signal model.
    pub mean_gain: f64,
    pub trials: usize,
}

/// Known mean of the effective gain `γ h_kᵀ A_d ĥ_k*`.
fn known_mean_gain(cfg: &SystemConfig, csi: CsiSource) -> f64 {
    let m = cfg.m() as f64;
    match csi {
        CsiSource::Trained(_) => gamma(cfg) * alpha_d(cfg) * m * eta_squared(cfg),
        CsiSource::Perfect => {
            // γ sqrt(2/π) M E{|h_mk|² / ‖h_m‖}; ‖h_m‖² ~ Gamma(K, 1) gives
            // E{|h_mk|²/‖h_m‖} = Γ(K + 1/2) / (K Γ(K))
            let mut ratio = PI.sqrt() / 2.0;
            for j in 1..cfg.k() {
                ratio *= (j as f64 + 0.5) / j as f64;
            }
            gamma(cfg) * FRAC_2_PI.sqrt() * m * ratio / cfg.k() as f64
        }
    }
}

/// Simulates symbols → MF precoding → one-bit DACs → channel → AWGN with
/// LMMSE-trained CSI and measures `log2(1/MSE)` of the scalar LMMSE symbol estimate.
pub fn empirical_mse_bound(cfg: &SystemConfig, trials: usize, stream: RandomStream) -> Result<MseBound> {
    empirical_mse_bound_with(cfg, trials, stream, CsiSource::Trained(EstimateMode::Simulated))
}

/// [`empirical_mse_bound`] with a selectable CSI source.
///
/// Each user's received sample is modeled as `ŝ_k = g s_k + ñ_k` with the
/// known mean gain `g`; the estimate is `s̃_k = g / (g² + E|ñ_k|²) ŝ_k`
/// with `E|ñ_k|²` measured over the trials.
pub fn empirical_mse_bound_with(
    cfg: &SystemConfig,
    trials: usize,
    stream: RandomStream,
    csi: CsiSource,
) -> Result<MseBound> {
    if trials == 0 {
        return Err(Error::InvalidArgument("MSE bound needs at least one trial".into()));
    }
    let (m, k) = (cfg.m(), cfg.k());
    let g = gamma(cfg);

    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial = stream.substream(t as u64);
            let (h, h_hat) = match csi {
                CsiSource::Trained(mode) => {
                    let (h, est) = draw_channel_pair(cfg, mode, trial.substream(0))?;
                    (h, est.h_hat)
                }
                CsiSource::Perfect => {
                    let h = sample_cn(m, k, 1.0, trial.substream(0).substream(0));
                    (h.clone(), h)
                }
            };
            let s = sample_cn(k, 1, 1.0, trial.substream(1));
            let noise = sample_cn(k, 1, 1.0, trial.substream(2));
            let y = transmit(&h_hat.conj(), &s)?;
            let r = h.transpose().matmul(&y)?.scale(g).add(&noise)?;
            Ok((r.into_vec(), s.into_vec()))
        })
        .collect::<Result<Vec<_>>>()?;

    let gain = known_mean_gain(cfg, csi);
    let mut per_user_rate = Vec::with_capacity(k);
    let mut per_user_stderr = Vec::with_capacity(k);
    let mut mse = Vec::with_capacity(k);
    for u in 0..k {
        let noise_power = samples
            .iter()
            .map(|(r, s)| (r[u] - s[u] * gain).norm_sqr())
            .collect::<CompensatedSum>()
            .value()
            / trials as f64;
        let coef = gain / (gain * gain + noise_power);
        let errors: Vec<f64> = samples.iter().map(|(r, s)| (s[u] - r[u] * coef).norm_sqr()).collect();
        let est = MeanEstimate::from_samples(&errors);
        per_user_rate.push(-est.mean.log2());
        per_user_stderr.push(est.stderr / (est.mean * LN_2));
        mse.push(est.mean);
    }
    Ok(MseBound {
        per_user_rate,
        per_user_stderr,
        mse,
        mean_gain: gain,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sample_cn;
    use crate::training::train_and_estimate;

    fn cfg(m: usize, k: usize, rho_p: f64, p_t: f64) -> SystemConfig {
        SystemConfig::new(m, k, rho_p, p_t).unwrap()
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(&cfg(64, 10, 10.0, 64.0)) - 1.0).abs() < 1e-15);
        assert!((gamma(&cfg(64, 10, 10.0, 10.0)) - 0.39528).abs() < 5e-6);
    }

    #[test]
    fn transmit_power_is_exact() {
        let c = cfg(32, 4, 10.0, 7.5);
        let w = sample_cn(32, 4, 1.0, RandomStream::new(1, 0));
        let s = sample_cn(4, 1, 1.0, RandomStream::new(1, 1));
        let y = transmit(&w, &s).unwrap();
        assert!((y.scale(gamma(&c)).norm_sqr() - 7.5).abs() < 1e-12);
        assert!(y.as_slice().iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn transmit_zero_symbols_uses_tie_break() {
        let w = sample_cn(5, 2, 1.0, RandomStream::new(2, 0));
        let y = transmit(&w, &ComplexMatrix::zeros(2, 1)).unwrap();
        let plus = C64::new(1.0, 1.0) * std::f64::consts::FRAC_1_SQRT_2;
        assert!(y.as_slice().iter().all(|&z| z == plus));
    }

    #[test]
    fn transmit_dimension_mismatch() {
        let w = ComplexMatrix::zeros(5, 2);
        assert!(transmit(&w, &ComplexMatrix::zeros(3, 1)).is_err());
        assert!(transmit(&w, &ComplexMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn mf_precoder_conjugates() {
        let real = ComplexMatrix::from_real(2, 2, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        let est = ChannelEstimate {
            h_hat: real.clone(),
            eta_sq: 0.5,
            mode: EstimateMode::GaussianApprox,
        };
        assert_eq!(mf_precode(&est), real);
        let z = sample_cn(6, 3, 1.0, RandomStream::new(5, 5));
        let est = ChannelEstimate {
            h_hat: z.clone(),
            eta_sq: 0.5,
            mode: EstimateMode::Simulated,
        };
        let w = mf_precode(&est);
        assert_eq!(w.shape(), (6, 3));
        assert_eq!(w.conj(), z);
    }

    #[test]
    fn single_antenna_single_user_perfect_csi() {
        let c = cfg(1, 1, 10.0, 4.0);
        let h = ComplexMatrix::new(1, 1, vec![C64::new(0.6, -1.3)]).unwrap();
        let est = ChannelEstimate {
            h_hat: h.clone(),
            eta_sq: 1.0,
            mode: EstimateMode::GaussianApprox,
        };
        let comps = sinr_terms_conditional(&h, &est, &c).unwrap();
        let h2 = h[(0, 0)].norm_sqr();
        let alpha_sq = FRAC_2_PI / h2;
        assert!((comps[0].desired - 4.0 * alpha_sq * h2 * h2).abs() < 1e-12);
        assert_eq!(comps[0].interference, 0.0);
        assert!((comps[0].quant_noise - 4.0 * (1.0 - FRAC_2_PI) * h2).abs() < 1e-12);
        assert_eq!(comps[0].awgn, 1.0);
    }

    #[test]
    fn conditional_components_are_nonnegative() {
        for t in 0..1000u64 {
            let stream = RandomStream::new(77, t);
            let m = 2 + (t as usize % 9);
            let k = 1 + (t as usize % 4);
            let c = cfg(m, k, 0.5 + (t % 7) as f64, 0.1 + (t % 5) as f64);
            let h = sample_cn(m, k, 1.0, stream.substream(0));
            let est = train_and_estimate(&h, &c, stream.substream(1)).unwrap();
            for comp in sinr_terms_conditional(&h, &est, &c).unwrap() {
                assert!(comp.desired >= 0.0 && comp.interference >= 0.0 && comp.quant_noise >= 0.0);
                assert!(comp.rate().is_finite() && comp.rate() >= 0.0);
            }
        }
    }

    #[test]
    fn closed_form_anchor_m128() {
        let r = closed_form_rate(&SystemConfig::from_db(128, 10, 10.0, 10.0).unwrap());
        assert!((r.per_user_rate[0] - 2.503).abs() < 5e-4);
        assert!((r.sum_rate - 25.03).abs() < 5e-3);
        assert_eq!(r.trials, 0);
        assert_eq!(r.sum_rate_stderr, 0.0);
    }

    #[test]
    fn zero_power_gives_zero_rate() {
        let c = cfg(64, 10, 10.0, 0.0);
        assert_eq!(closed_form_rate(&c).sum_rate, 0.0);
        assert_eq!(use_and_forget_rate(&c).sum_rate, 0.0);
        assert_eq!(conventional_rate(&c).sum_rate, 0.0);
    }

    #[test]
    fn denominator_collapses_to_one_plus_power() {
        let c = cfg(64, 10, 10.0, 10.0);
        let comp = moment_components(&c);
        let p_t = 10.0;
        assert!((comp.gain_var + comp.interference - 2.0 * p_t / PI).abs() < 1e-12);
        assert!((comp.quant_noise - (1.0 - FRAC_2_PI) * p_t).abs() < 1e-12);
        let denom = comp.gain_var + comp.interference + comp.quant_noise + comp.awgn;
        assert!((denom - (1.0 + p_t)).abs() < 1e-12);
    }

    #[test]
    fn smallest_instance_identity() {
        let c = cfg(1, 1, 2.0, 3.0);
        let uf = use_and_forget_rate(&c).per_user_rate[0];
        let expected = (1.0 + 4.0 * 2.0 * 3.0 / (PI * PI * 3.0 * 4.0)).log2();
        assert!((uf - expected).abs() < 1e-14);
    }

    #[test]
    fn interference_needs_squared_gamma() {
        // with γ instead of γ² in the interference term the bound no longer
        // collapses to the closed form
        let c = cfg(64, 10, 10.0, 10.0);
        let mut comp = moment_components(&c);
        let m = 64.0;
        comp.interference = alpha_d(&c).powi(2) * gamma(&c) * m * 9.0 * eta_squared(&c);
        let cf = closed_form_rate(&c).per_user_rate[0];
        assert!((comp.rate() - cf).abs() > 1e-3);
    }

    #[test]
    fn conventional_components_match_formula() {
        for (m, k, rho, p) in [(114, 10, 10.0, 10.0), (8, 3, 0.4, 2.0), (1, 1, 1.0, 1.0)] {
            let c = cfg(m, k, rho, p);
            let from_terms = conventional_components(&c).rate();
            assert!((from_terms - conventional_rate(&c).per_user_rate[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn limits() {
        assert!((case1_limit(10.0, 10.0, 10) - 0.486_737_038).abs() < 1e-9);
        assert!((case2_limit(10.0, 10.0) - 5.376_028_936).abs() < 1e-9);
    }

    #[test]
    fn case1_limit_is_approached() {
        let e_t = 10.0;
        let m = 1_000_000usize;
        let r = closed_form_rate(&cfg(m, 10, 10.0, e_t / m as f64)).per_user_rate[0];
        assert!((r - case1_limit(10.0, e_t, 10)).abs() < 1e-4);
    }

    #[test]
    fn required_antenna_examples() {
        let c = SystemConfig::from_db(1, 10, 10.0, 10.0).unwrap();
        assert_eq!(required_antennas(3.50, &c, ArraySystem::OneBit).unwrap(), 283);
        assert_eq!(required_antennas(3.49, &c, ArraySystem::Conventional).unwrap(), 114);
        assert_eq!(required_antennas(0.0, &c, ArraySystem::OneBit).unwrap(), 1);
        assert!(required_antennas(-1.0, &c, ArraySystem::OneBit).is_err());
        let silent = cfg(1, 10, 10.0, 0.0);
        assert!(required_antennas(1.0, &silent, ArraySystem::Conventional).is_err());
    }

    #[test]
    fn required_antennas_is_minimal() {
        let c = SystemConfig::from_db(1, 10, 10.0, 10.0).unwrap();
        for target in [0.1, 0.5, 1.0, 2.0, 2.75, 3.0, 4.0, 5.0] {
            for system in [ArraySystem::OneBit, ArraySystem::Conventional] {
                let m = required_antennas(target, &c, system).unwrap();
                assert!(system.per_user_rate(m, 10, c.rho_p(), c.p_t()) >= target);
                if m > 1 {
                    assert!(system.per_user_rate(m - 1, 10, c.rho_p(), c.p_t()) < target);
                }
            }
        }
    }

    #[test]
    fn argument_errors() {
        let c = cfg(4, 2, 1.0, 1.0);
        assert!(matches!(
            monte_carlo_rate(&c, 0, RandomStream::new(0, 0), EstimateMode::Simulated),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            empirical_mse_bound(&c, 0, RandomStream::new(0, 0)),
            Err(Error::InvalidArgument(_))
        ));
        let bad = ComplexMatrix::zeros(3, 2);
        let est = ChannelEstimate {
            h_hat: ComplexMatrix::zeros(4, 2),
            eta_sq: 0.1,
            mode: EstimateMode::Simulated,
        };
        assert!(matches!(
            sinr_terms_conditional(&bad, &est, &c),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn perfect_csi_mean_gain_single_user() {
        // K = 1: E|h| = √π/2, so the gain is γ M / √2
        let c = cfg(3, 1, 1.0, 2.0);
        let g = known_mean_gain(&c, CsiSource::Perfect);
        assert!((g - gamma(&c) * 3.0 / 2f64.sqrt()).abs() < 1e-14);
    }
}
