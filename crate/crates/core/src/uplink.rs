//! Uplink: zero-forcing detection behind ideal or 1-bit ADCs.
//!
//! Received signal `y = H x + n` with `n ~ CN(0, C_n)`,
//! `C_n = N0 B + (N_F − 1) N0 I`. The 1-bit rates are lower bounds obtained
//! from the Bussgang decomposition by treating distortion as Gaussian noise.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use crate::array::CouplingMatrix;
use crate::linalg::{hermitian_inverse, real_diagonal, HermitianCholesky};
use crate::quantization::arcsine_covariance;
use crate::{CMatrix, Error, Result, C64};

/// Distortion model used by the 1-bit bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerModel {
    /// Full arcsine-law distortion covariance.
    Exact,
    /// Uncorrelated quantization noise: diagonal distortion `(1 − 2/π) D`.
    Uqn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UplinkConfig {
    /// Per-user transmit powers `ε_k`.
    pub user_powers: Vec<f64>,
    /// `N0`; defaults to 1 so that powers read as `ε_k / N0`.
    pub noise_density: f64,
    /// Receiver noise figure `N_F ≥ 1`.
    pub noise_figure: f64,
}

impl UplinkConfig {
    pub fn new(user_powers: Vec<f64>, noise_figure: f64) -> Result<Self> {
        let cfg = Self {
            user_powers,
            noise_density: 1.0,
            noise_figure,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `users` users at the same power.
    pub fn symmetric(users: usize, power: f64, noise_figure: f64) -> Result<Self> {
        Self::new(vec![power; users], noise_figure)
    }

    pub fn validate(&self) -> Result<()> {
        if self.user_powers.is_empty() {
            return Err(Error::InvalidParameter("at least one user power is required".into()));
        }
        if let Some(p) = self.user_powers.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter(format!("user power must be positive, got {p}")));
        }
        if !(self.noise_density > 0.0 && self.noise_density.is_finite()) {
            return Err(Error::InvalidParameter("noise density must be positive".into()));
        }
        if !(self.noise_figure >= 1.0 && self.noise_figure.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise figure must be at least 1, got {}",
                self.noise_figure
            )));
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        self.user_powers.len()
    }
}

/// Per-user rates in bits/s/Hz for every model variant.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub elements: usize,
    pub ideal: Vec<f64>,
    pub one_bit_exact: Vec<f64>,
    pub one_bit_uqn: Vec<f64>,
}

/// `N0 B + (N_F − 1) N0 I`.
pub fn total_noise_covariance(b: &CouplingMatrix, cfg: &UplinkConfig) -> CMatrix {
    let m = b.dim();
    let n0 = cfg.noise_density;
    b.entries() * C64::new(n0, 0.0) + CMatrix::identity(m, m) * C64::new((cfg.noise_figure - 1.0) * n0, 0.0)
}

/// Per-user SNR loss factor of 1-bit ADCs in the dense-array limit,
/// `N_F / (1 + (π/2)(N_F − 1))`. An infinite noise figure gives `2/π`.
pub fn uplink_asymptotic_loss(noise_figure: f64) -> f64 {
    if noise_figure.is_infinite() {
        return FRAC_2_PI;
    }
    noise_figure / (1.0 + FRAC_PI_2 * (noise_figure - 1.0))
}

/// Uplink rate evaluator for one array and configuration. The total noise
/// covariance and its factorization are shared by all channel realizations.
#[derive(Debug, Clone)]
pub struct UplinkEvaluator<'a> {
    coupling: &'a CouplingMatrix,
    cfg: UplinkConfig,
    noise: CMatrix,
    noise_chol: HermitianCholesky,
}

impl<'a> UplinkEvaluator<'a> {
    pub fn new(coupling: &'a CouplingMatrix, cfg: &UplinkConfig) -> Result<Self> {
        cfg.validate()?;
        let noise = total_noise_covariance(coupling, cfg);
        let noise_chol = HermitianCholesky::new(&noise).ok_or_else(|| {
            Error::DegenerateCovariance("total noise covariance is singular (N_F = 1 with rank-deficient B)".into())
        })?;
        Ok(Self {
            coupling,
            cfg: cfg.clone(),
            noise,
            noise_chol,
        })
    }

    pub fn noise_covariance(&self) -> &CMatrix {
        &self.noise
    }

    fn check_channel(&self, h: &CMatrix) -> Result<()> {
        if h.nrows() != self.coupling.dim() || h.ncols() != self.cfg.users() {
            return Err(Error::DimensionMismatch(format!(
                "channel is {}×{}, expected {}×{}",
                h.nrows(),
                h.ncols(),
                self.coupling.dim(),
                self.cfg.users()
            )));
        }
        if h.ncols() > h.nrows() {
            return Err(Error::RankDeficient(format!(
                "{} users exceed {} antennas",
                h.ncols(),
                h.nrows()
            )));
        }
        Ok(())
    }

    /// `R_k = log₂(1 + ε_k / [(Hᴴ C_n⁻¹ H)⁻¹]_kk)`.
    pub fn ideal_rates(&self, h: &CMatrix) -> Result<Vec<f64>> {
        self.check_channel(h)?;
        let gram = h.adjoint() * self.noise_chol.solve(h);
        self.rates_from_gram(&gram, "HᴴC⁻¹H")
    }

    /// 1-bit lower bound
    /// `R_k = log₂(1 + ε_k / [((2/π) Hᴴ C'⁻¹ H)⁻¹]_kk)`,
    /// where `C'` is the Bussgang effective noise (exact) or
    /// `(2/π)(C_n + (π/2 − 1) D)` (UQN).
    pub fn one_bit_rates(&self, h: &CMatrix, model: QuantizerModel) -> Result<Vec<f64>> {
        self.check_channel(h)?;
        let signal = self.signal_covariance(h);
        let c_y = &signal + &self.noise;
        let d = real_diagonal(&c_y);
        match model {
            QuantizerModel::Exact => {
                let c_yq = arcsine_covariance(&c_y, &d)?;
                let effective = c_yq - signal * C64::new(FRAC_2_PI, 0.0);
                let chol = HermitianCholesky::new(&effective).ok_or_else(|| {
                    Error::DegenerateCovariance("Bussgang effective noise covariance is not positive definite".into())
                })?;
                let gram = h.adjoint() * chol.solve(h) * C64::new(FRAC_2_PI, 0.0);
                self.rates_from_gram(&gram, "(2/π)HᴴC'⁻¹H")
            }
            QuantizerModel::Uqn => self.uqn_rates_with_scaling(h, &d),
        }
    }

    /// UQN bound with an explicit quantizer scaling diagonal.
    fn uqn_rates_with_scaling(&self, h: &CMatrix, d: &[f64]) -> Result<Vec<f64>> {
        let mut effective = self.noise.clone();
        for (i, &di) in d.iter().enumerate() {
            effective[(i, i)] += C64::new((FRAC_PI_2 - 1.0) * di, 0.0);
        }
        let chol = HermitianCholesky::new(&effective)
            .ok_or_else(|| Error::DegenerateCovariance("UQN effective noise covariance is singular".into()))?;
        let gram = h.adjoint() * chol.solve(h);
        self.rates_from_gram(&gram, "UQN HᴴC'⁻¹H")
    }

    /// All three variants for one realization.
    pub fn evaluate(&self, h: &CMatrix) -> Result<RateReport> {
        Ok(RateReport {
            elements: h.nrows(),
            ideal: self.ideal_rates(h)?,
            one_bit_exact: self.one_bit_rates(h, QuantizerModel::Exact)?,
            one_bit_uqn: self.one_bit_rates(h, QuantizerModel::Uqn)?,
        })
    }

    /// `H P Hᴴ`
    fn signal_covariance(&self, h: &CMatrix) -> CMatrix {
        let mut hp = h.clone();
        for (k, &p) in self.cfg.user_powers.iter().enumerate() {
            hp.column_mut(k).scale_mut(p);
        }
        hp * h.adjoint()
    }

    fn rates_from_gram(&self, gram: &CMatrix, what: &str) -> Result<Vec<f64>> {
        let inv = hermitian_inverse(gram).ok_or_else(|| Error::RankDeficient(format!("{what} is singular")))?;
        Ok(self
            .cfg
            .user_powers
            .iter()
            .enumerate()
            .map(|(k, &p)| (1.0 + p / inv[(k, k)].re).log2())
            .collect())
    }
}

pub fn uplink_ideal_rates(h: &CMatrix, b: &CouplingMatrix, cfg: &UplinkConfig) -> Result<Vec<f64>> {
    UplinkEvaluator::new(b, cfg)?.ideal_rates(h)
}

pub fn uplink_one_bit_rates(
    h: &CMatrix,
    b: &CouplingMatrix,
    cfg: &UplinkConfig,
    model: QuantizerModel,
) -> Result<Vec<f64>> {
    UplinkEvaluator::new(b, cfg)?.one_bit_rates(h, model)
}

/// UQN rate with the large-isotropic-population approximation of the
/// quantizer scaling, `D ≈ ((N0 + Σε)(a/λ)² γ + N0 (N_F − 1)) I`, written in
/// terms of the IID generator `S` (`H = B^{1/2} S`):
/// `log₂(1 + (ε_k/N0) / [(Sᴴ (I + c B⁻¹)⁻¹ S)⁻¹]_kk)` with
/// `c = (π/2)(N_F − 1) + (π/2 − 1)(a/λ)² γ (1 + Σ ε/N0)`.
///
/// `(I + c B⁻¹)⁻¹ = B (B + c I)⁻¹` is applied spectrally, so a singular `B`
/// is fine.
pub fn uplink_isotropic_uqn_rates(
    s: &CMatrix,
    b: &CouplingMatrix,
    cfg: &UplinkConfig,
    spacing_over_lambda: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n0 = cfg.noise_density;
    let total: f64 = cfg.user_powers.iter().sum::<f64>() / n0;
    let c =
        FRAC_PI_2 * (cfg.noise_figure - 1.0) + (FRAC_PI_2 - 1.0) * spacing_over_lambda.powi(2) * gamma * (1.0 + total);
    let kernel = b.spectral_map(|mu| mu / (mu + c));
    let gram = s.adjoint() * kernel * s;
    let inv = hermitian_inverse(&gram).ok_or_else(|| Error::RankDeficient("SᴴB(B+cI)⁻¹S is singular".into()))?;
    Ok(cfg
        .user_powers
        .iter()
        .enumerate()
        .map(|(k, &p)| (1.0 + (p / n0) / inv[(k, k)].re).log2())
        .collect())
}
