//! Downlink: zero-forcing precoding behind ideal or 1-bit DACs, with
//! non-radiating dithering.
//!
//! The transmit vector is `z = F x + U v_d / ‖U‖_F`, where `U` projects onto
//! the approximate null space of the coupling matrix so the dither mostly
//! stays in the reactive near field. After 1-bit quantization the output is
//! rescaled by `α` so that the radiated power matches the ideal system.
//!
//! The downlink channel matrix `H` is `K × M` (one row per user).

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use crate::array::{gamma_constant, null_space_leakage, null_space_projector, ArrayGeometry, CouplingMatrix};
use crate::linalg::{hermitian_inverse, real_diagonal, trace_product_re, trace_re};
use crate::quantization::arcsine_covariance;
use crate::uplink::QuantizerModel;
use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkConfig {
    /// Total available transmit power `ε`.
    pub total_power: f64,
    pub noise_density: f64,
    pub noise_figure: f64,
    /// Dither variance `σ_d²`.
    pub dither_power: f64,
    /// Eigenvalue threshold `δ` of the null-space projector.
    pub delta: f64,
}

impl DownlinkConfig {
    /// Configuration from the normalized power `ε / (N0 N_F)`, no dither,
    /// `δ = 0.01`.
    pub fn from_snr(snr: f64, noise_figure: f64) -> Result<Self> {
        let cfg = Self {
            total_power: snr * noise_figure,
            noise_density: 1.0,
            noise_figure,
            dither_power: 0.0,
            delta: 0.01,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_dither(mut self, dither_power: f64) -> Self {
        self.dither_power = dither_power;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.total_power) {
            return Err(Error::InvalidParameter(format!(
                "total power must be positive, got {}",
                self.total_power
            )));
        }
        if !positive(self.noise_density) {
            return Err(Error::InvalidParameter("noise density must be positive".into()));
        }
        if !(self.noise_figure >= 1.0 && self.noise_figure.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise figure must be at least 1, got {}",
                self.noise_figure
            )));
        }
        if !(self.dither_power >= 0.0 && self.dither_power.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dither power must be non-negative, got {}",
                self.dither_power
            )));
        }
        if !positive(self.delta) {
            return Err(Error::InvalidParameter(format!(
                "δ must be positive, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// `N0 N_F`
    pub fn noise_floor(&self) -> f64 {
        self.noise_density * self.noise_figure
    }
}

/// Zero-forcing precoder `F = √(ε / tr((HHᴴ)⁻¹)) Hᴴ (HHᴴ)⁻¹`.
#[derive(Debug, Clone)]
pub struct PrecoderState {
    /// `M × K`
    pub precoder: CMatrix,
    /// `tr((HHᴴ)⁻¹)`
    pub zf_trace: f64,
    /// `√(ε / tr((HHᴴ)⁻¹))`, so that `H F = gain · I`.
    pub gain: f64,
}

pub fn zf_precoder(h: &CMatrix, total_power: f64) -> Result<PrecoderState> {
    if h.nrows() > h.ncols() {
        return Err(Error::RankDeficient(format!(
            "{} users exceed {} antennas",
            h.nrows(),
            h.ncols()
        )));
    }
    let gram = h * h.adjoint();
    let inv = hermitian_inverse(&gram).ok_or_else(|| Error::RankDeficient("HHᴴ is singular".into()))?;
    let zf_trace = trace_re(&inv);
    let gain = (total_power / zf_trace).sqrt();
    let precoder = h.adjoint() * inv * C64::new(gain, 0.0);
    Ok(PrecoderState {
        precoder,
        zf_trace,
        gain,
    })
}

/// Radiated power `tr(C_z B)` of an excitation with covariance `C_z`.
pub fn radiated_power(c_z: &CMatrix, b: &CouplingMatrix) -> f64 {
    trace_product_re(c_z, b.entries())
}

/// Radiated power of the ideal precoded signal, `tr(F Fᴴ B)`.
pub fn precoder_radiated_power(f: &CMatrix, b: &CouplingMatrix) -> f64 {
    trace_re(&(f.adjoint() * b.entries() * f))
}

/// `log₂(1 + (ε / (N0 N_F)) / tr((HHᴴ)⁻¹))`, the same for every user.
pub fn downlink_ideal_rate(h: &CMatrix, cfg: &DownlinkConfig) -> Result<f64> {
    cfg.validate()?;
    let state = zf_precoder(h, cfg.total_power)?;
    Ok(ideal_rate_from_trace(state.zf_trace, cfg))
}

fn ideal_rate_from_trace(zf_trace: f64, cfg: &DownlinkConfig) -> f64 {
    (1.0 + cfg.total_power / cfg.noise_floor() / zf_trace).log2()
}

/// Covariance of the dithered excitation and its diagonal.
#[derive(Debug, Clone)]
pub struct TransmitCovariance {
    /// `F Fᴴ + (σ_d² / ‖U‖_F²) U Uᴴ`
    pub c_z: CMatrix,
    /// `Diag(C_z)`, the quantizer scaling.
    pub d: Vec<f64>,
}

pub fn dithered_transmit_covariance(f: &CMatrix, u: &CMatrix, dither_power: f64) -> Result<TransmitCovariance> {
    let mut c_z = f * f.adjoint();
    if dither_power > 0.0 {
        c_z += dither_shape(u)? * C64::new(dither_power, 0.0);
    }
    let d = real_diagonal(&c_z);
    Ok(TransmitCovariance { c_z, d })
}

/// `U Uᴴ / ‖U‖_F²`, the unit-power dither covariance.
fn dither_shape(u: &CMatrix) -> Result<CMatrix> {
    let norm2 = u.norm_squared();
    if norm2 <= 1e-20 {
        return Err(Error::NoNullSpace);
    }
    Ok(u * u.adjoint() / C64::new(norm2, 0.0))
}

/// Large-population approximation of the quantizer scaling,
/// `D ≈ (ε + σ_d²)/M · I`.
pub fn large_user_scaling(total_power: f64, dither_power: f64, elements: usize) -> f64 {
    (total_power + dither_power) / elements as f64
}

/// Inputs for the radiated-power equalizer `α`.
#[derive(Debug, Clone, Copy)]
pub enum AlphaModel<'a> {
    /// `α = P_R / tr(C_zQ B)` with the arcsine-law output covariance.
    Exact {
        c_z: &'a CMatrix,
        d: &'a [f64],
        coupling: &'a CouplingMatrix,
    },
    /// `α = P_R / ((2/π) P_R + (1 − 2/π)(a/λ)² (ε + σ_d²) γ)`.
    Uqn {
        spacing_over_lambda: f64,
        total_power: f64,
        dither_power: f64,
        gamma: f64,
    },
}

/// Rescaling of the 1-bit output that makes its radiated power equal `P_R`.
pub fn alpha_power_equalizer(radiated: f64, model: AlphaModel<'_>) -> Result<f64> {
    if !(radiated > 0.0 && radiated.is_finite()) {
        return Err(Error::DegenerateRadiation(format!("ideal radiated power {radiated}")));
    }
    let denom = match model {
        AlphaModel::Exact { c_z, d, coupling } => {
            let c_zq = arcsine_covariance(c_z, d)?;
            radiated_power(&c_zq, coupling)
        }
        AlphaModel::Uqn {
            spacing_over_lambda,
            total_power,
            dither_power,
            gamma,
        } => {
            FRAC_2_PI * radiated
                + (1.0 - FRAC_2_PI) * spacing_over_lambda.powi(2) * (total_power + dither_power) * gamma
        }
    };
    if !(denom > 0.0 && denom.is_finite()) {
        return Err(Error::DegenerateRadiation(format!("1-bit radiated power {denom}")));
    }
    Ok(radiated / denom)
}

/// SNR loss factor of 1-bit DACs in the dense-array limit at equal radiated
/// power: the loss vanishes.
pub fn downlink_asymptotic_loss() -> f64 {
    1.0
}

/// Radiated power as a fraction of the excitation power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRatios {
    /// `P_R / ε`
    pub ideal: f64,
    /// `P_R / (α (ε + σ_d²))`
    pub one_bit: f64,
}

pub fn power_ratio_diagnostic(radiated: f64, alpha: f64, total_power: f64, dither_power: f64) -> PowerRatios {
    PowerRatios {
        ideal: radiated / total_power,
        one_bit: radiated / (alpha * (total_power + dither_power)),
    }
}

/// Per-user 1-bit rates together with the equalizer that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBitOutcome {
    pub rates: Vec<f64>,
    pub alpha: f64,
    pub dither_power: f64,
}

impl OneBitOutcome {
    pub fn mean_rate(&self) -> f64 {
        self.rates.iter().sum::<f64>() / self.rates.len() as f64
    }
}

/// Everything the sweep reports for one downlink realization.
#[derive(Debug, Clone)]
pub struct DownlinkEvaluation {
    pub ideal_rate: f64,
    pub zf_trace: f64,
    /// Ideal radiated power `P_R`.
    pub radiated: f64,
    /// Arcsine-law bound with dither; the user noise includes the dither
    /// that leaks through the channel.
    pub exact: OneBitOutcome,
    /// As `exact` but counting only quantization distortion as noise.
    pub exact_no_leak: OneBitOutcome,
    pub uqn: OneBitOutcome,
    /// Arcsine-law bound without dither.
    pub no_dither: OneBitOutcome,
    /// `max_i |D_i − d̄| / d̄` with `d̄ = (ε + σ_d²)/M`: how far the dithered
    /// quantizer scaling is from its large-population approximation.
    pub scaling_spread: f64,
}

/// Downlink evaluator for one array. The null-space projector and the
/// normalized dither covariance are computed once and shared by every
/// channel realization.
#[derive(Debug, Clone)]
pub struct DownlinkEvaluator<'a> {
    coupling: &'a CouplingMatrix,
    cfg: DownlinkConfig,
    spacing_over_lambda: f64,
    gamma: f64,
    projector: CMatrix,
    dither_shape: Option<CMatrix>,
    leakage: Option<f64>,
}

impl<'a> DownlinkEvaluator<'a> {
    pub fn new(coupling: &'a CouplingMatrix, geom: &ArrayGeometry, cfg: &DownlinkConfig) -> Result<Self> {
        cfg.validate()?;
        if geom.elements() != coupling.dim() {
            return Err(Error::DimensionMismatch(format!(
                "geometry has {} elements, coupling matrix is {}×{}",
                geom.elements(),
                coupling.dim(),
                coupling.dim()
            )));
        }
        let projector = null_space_projector(coupling, cfg.delta)?;
        let (dither_shape, leakage) = match dither_shape(&projector) {
            Ok(shape) => (Some(shape), Some(null_space_leakage(coupling, &projector)?)),
            Err(Error::NoNullSpace) if cfg.dither_power == 0.0 => (None, None),
            Err(e) => return Err(e),
        };
        Ok(Self {
            coupling,
            cfg: cfg.clone(),
            spacing_over_lambda: geom.spacing_over_lambda(),
            gamma: gamma_constant(geom.pattern()).gamma,
            projector,
            dither_shape,
            leakage,
        })
    }

    pub fn projector(&self) -> &CMatrix {
        &self.projector
    }

    /// `tr(Uᴴ B U) / tr(Uᴴ U)`, `None` when `U = 0`.
    pub fn leakage(&self) -> Option<f64> {
        self.leakage
    }

    pub fn config(&self) -> &DownlinkConfig {
        &self.cfg
    }

    fn transmit_covariance(&self, ffh: &CMatrix, dither_power: f64) -> Result<TransmitCovariance> {
        let mut c_z = ffh.clone();
        if dither_power > 0.0 {
            let shape = self.dither_shape.as_ref().ok_or(Error::NoNullSpace)?;
            c_z += shape * C64::new(dither_power, 0.0);
        }
        let d = real_diagonal(&c_z);
        Ok(TransmitCovariance { c_z, d })
    }

    /// Exact 1-bit bound. Returns the outcome with and without the residual
    /// dither counted as user noise.
    fn exact_outcomes(
        &self,
        h: &CMatrix,
        state: &PrecoderState,
        ffh: &CMatrix,
        radiated: f64,
        dither_power: f64,
    ) -> Result<(OneBitOutcome, OneBitOutcome, f64)> {
        let tx = self.transmit_covariance(ffh, dither_power)?;
        let d_bar = large_user_scaling(self.cfg.total_power, dither_power, tx.d.len());
        let spread = tx.d.iter().map(|&d| (d - d_bar).abs() / d_bar).fold(0.0, f64::max);
        let c_zq = arcsine_covariance(&tx.c_z, &tx.d)?;
        let out_radiated = radiated_power(&c_zq, self.coupling);
        if out_radiated.is_nan() || out_radiated <= 0.0 {
            return Err(Error::DegenerateRadiation(format!(
                "1-bit radiated power {out_radiated}"
            )));
        }
        let alpha = radiated / out_radiated;
        let signal = FRAC_2_PI * alpha * self.cfg.total_power / state.zf_trace;
        let floor = self.cfg.noise_floor();
        let rates_for = |noise_cov: &CMatrix| -> Vec<f64> {
            let hn = h * noise_cov;
            (0..h.nrows())
                .map(|k| {
                    let leak: f64 = (0..h.ncols()).map(|i| (hn[(k, i)] * h[(k, i)].conj()).re).sum();
                    (1.0 + signal / (floor + alpha * leak.max(0.0))).log2()
                })
                .collect()
        };
        let with_leak = rates_for(&(&c_zq - ffh * C64::new(FRAC_2_PI, 0.0)));
        let without_leak = rates_for(&(&c_zq - &tx.c_z * C64::new(FRAC_2_PI, 0.0)));
        Ok((
            OneBitOutcome {
                rates: with_leak,
                alpha,
                dither_power,
            },
            OneBitOutcome {
                rates: without_leak,
                alpha,
                dither_power,
            },
            spread,
        ))
    }

    fn uqn_outcome(&self, users: usize, state: &PrecoderState, radiated: f64) -> Result<OneBitOutcome> {
        let cfg = &self.cfg;
        let alpha = alpha_power_equalizer(
            radiated,
            AlphaModel::Uqn {
                spacing_over_lambda: self.spacing_over_lambda,
                total_power: cfg.total_power,
                dither_power: cfg.dither_power,
                gamma: self.gamma,
            },
        )?;
        let signal = FRAC_2_PI * alpha * cfg.total_power / state.zf_trace;
        let distortion = alpha
            * (1.0 - FRAC_2_PI)
            * self.spacing_over_lambda.powi(2)
            * (cfg.total_power + cfg.dither_power)
            * self.gamma;
        let rate = (1.0 + signal / (cfg.noise_floor() + distortion)).log2();
        Ok(OneBitOutcome {
            rates: vec![rate; users],
            alpha,
            dither_power: cfg.dither_power,
        })
    }

    pub fn evaluate(&self, h: &CMatrix) -> Result<DownlinkEvaluation> {
        if h.ncols() != self.coupling.dim() {
            return Err(Error::DimensionMismatch(format!(
                "downlink channel has {} columns, expected {}",
                h.ncols(),
                self.coupling.dim()
            )));
        }
        let state = zf_precoder(h, self.cfg.total_power)?;
        let ffh = &state.precoder * state.precoder.adjoint();
        let radiated = radiated_power(&ffh, self.coupling);
        let (exact, exact_no_leak, scaling_spread) =
            self.exact_outcomes(h, &state, &ffh, radiated, self.cfg.dither_power)?;
        let (no_dither, _, _) = self.exact_outcomes(h, &state, &ffh, radiated, 0.0)?;
        let uqn = self.uqn_outcome(h.nrows(), &state, radiated)?;
        Ok(DownlinkEvaluation {
            ideal_rate: ideal_rate_from_trace(state.zf_trace, &self.cfg),
            zf_trace: state.zf_trace,
            radiated,
            exact,
            exact_no_leak,
            uqn,
            no_dither,
            scaling_spread,
        })
    }

    /// Per-user 1-bit rates under the configured dither.
    pub fn one_bit_rates(&self, h: &CMatrix, model: QuantizerModel) -> Result<Vec<f64>> {
        let eval = self.evaluate(h)?;
        Ok(match model {
            QuantizerModel::Exact => eval.exact.rates,
            QuantizerModel::Uqn => eval.uqn.rates,
        })
    }
}

pub fn downlink_one_bit_rate(
    h: &CMatrix,
    b: &CouplingMatrix,
    geom: &ArrayGeometry,
    cfg: &DownlinkConfig,
    model: QuantizerModel,
) -> Result<Vec<f64>> {
    DownlinkEvaluator::new(b, geom, cfg)?.one_bit_rates(h, model)
}

/// Closed form of the UQN downlink bound:
/// `log₂(1 + (ε/tr/(N0N_F)) / (1 + (1/P_R + 1/(N0N_F))(π/2 − 1)(a/λ)²(ε + σ_d²)γ))`.
pub fn downlink_uqn_closed_form(
    zf_trace: f64,
    radiated: f64,
    spacing_over_lambda: f64,
    gamma: f64,
    cfg: &DownlinkConfig,
) -> f64 {
    let floor = cfg.noise_floor();
    let snr = cfg.total_power / zf_trace / floor;
    let spread = (FRAC_PI_2 - 1.0) * spacing_over_lambda.powi(2) * (cfg.total_power + cfg.dither_power) * gamma;
    (1.0 + snr / (1.0 + (1.0 / radiated + 1.0 / floor) * spread)).log2()
}
