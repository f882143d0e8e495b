use std::path::PathBuf;

use crate::array::perfect_square_root;
use crate::{Error, Result};

/// Sweep parameters shared by the uplink and downlink drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Side length of the square aperture in wavelengths.
    pub aperture_lambda: f64,
    pub element_counts: Vec<usize>,
    pub users: usize,
    /// `ε_k / N0` on the uplink, `ε / (N0 N_F)` on the downlink.
    pub snr: f64,
    pub noise_figure: f64,
    pub realizations: usize,
    pub seed: u64,
    pub delta: f64,
    /// `σ_d² / ε` in units of `λ/a`.
    pub dither_ratio: f64,
    pub dither: bool,
    /// θ nodes of the coupling-matrix quadrature oracle (φ uses twice as many).
    pub quad_points: usize,
    pub workers: usize,
    pub output_path: Option<PathBuf>,
}

/// Largest spacing for which the cosine element pattern is passive: its
/// coupling diagonal `π(a/λ)²` reaches 1 at `a/λ = 1/√π`.
pub const MAX_SPACING_OVER_LAMBDA: f64 = 0.564_189_583_547_756_3;

pub const DEFAULT_ELEMENT_COUNTS: [usize; 5] = [25, 49, 100, 196, 400];

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            aperture_lambda: 2.5,
            element_counts: DEFAULT_ELEMENT_COUNTS.to_vec(),
            users: 2,
            snr: 2.0,
            noise_figure: 2.0,
            realizations: 100,
            seed: 1,
            delta: 0.01,
            dither_ratio: 1.0 / 3.0,
            dither: true,
            quad_points: 512,
            workers: 1,
            output_path: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.aperture_lambda > 0.0 && self.aperture_lambda.is_finite()) {
            return fail(format!(
                "--aperture must be a positive number of wavelengths, got {}",
                self.aperture_lambda
            ));
        }
        if self.element_counts.is_empty() {
            return fail("--elements needs at least one element count".into());
        }
        for &m in &self.element_counts {
            if m == 0 || perfect_square_root(m).is_none() {
                return fail(format!(
                    "element count {m} is not a perfect square; the array is square (try {})",
                    nearest_square(m)
                ));
            }
            let spacing = self.aperture_lambda / (m as f64).sqrt();
            if spacing > MAX_SPACING_OVER_LAMBDA {
                return fail(format!(
                    "{m} elements on a {}λ aperture give spacing a/λ = {spacing:.4}; the cosine-pattern model is only \
                     passive up to 1/√π ≈ {MAX_SPACING_OVER_LAMBDA:.4} (use more elements or a smaller --aperture)",
                    self.aperture_lambda
                ));
            }
            if self.users > m {
                return fail(format!(
                    "{} users exceed {m} antennas; lower --users or raise --elements",
                    self.users
                ));
            }
        }
        if self.users == 0 {
            return fail("--users must be at least 1".into());
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return fail(format!("--snr must be positive (linear), got {}", self.snr));
        }
        if !(self.noise_figure >= 1.0 && self.noise_figure.is_finite()) {
            return fail(format!(
                "--noise-figure is linear and must be at least 1, got {}",
                self.noise_figure
            ));
        }
        if self.realizations == 0 {
            return fail("--realizations must be at least 1".into());
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return fail(format!("--delta must be positive, got {}", self.delta));
        }
        if !(self.dither_ratio >= 0.0 && self.dither_ratio.is_finite()) {
            return fail(format!(
                "--dither-ratio must be non-negative, got {}",
                self.dither_ratio
            ));
        }
        if self.quad_points < 2 {
            return fail(format!("--quad-points must be at least 2, got {}", self.quad_points));
        }
        if self.workers == 0 {
            return fail("worker count must be at least 1".into());
        }
        Ok(())
    }

    /// Downlink transmit power `ε`, with `N0 = 1`.
    pub fn downlink_power(&self) -> f64 {
        self.snr * self.noise_figure
    }

    /// Dither variance `σ_d²` for spacing `a/λ`, zero when dithering is off.
    pub fn dither_power(&self, spacing_over_lambda: f64) -> f64 {
        if self.dither {
            self.dither_ratio * self.downlink_power() / spacing_over_lambda
        } else {
            0.0
        }
    }
}

fn nearest_square(m: usize) -> usize {
    let r = (m as f64).sqrt().round().max(1.0) as usize;
    r * r
}

/// Parses a comma-separated list of element counts such as `25,49,100`.
pub fn parse_element_list(s: &str) -> Result<Vec<usize>> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().all(|i| i.is_empty()) {
        return Err(Error::Config("element list is empty".into()));
    }
    items
        .into_iter()
        .map(|item| {
            let m: usize = item
                .parse()
                .map_err(|_| Error::Config(format!("`{item}` is not an element count")))?;
            if m == 0 || perfect_square_root(m).is_none() {
                return Err(Error::Config(format!("element count {m} is not a perfect square")));
            }
            Ok(m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SweepConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.downlink_power(), 4.0);
        assert!((cfg.dither_power(0.125) - 4.0 * 8.0 / 3.0).abs() < 1e-12);
        let off = SweepConfig { dither: false, ..cfg };
        assert_eq!(off.dither_power(0.125), 0.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |f: fn(&mut SweepConfig)| {
            let mut c = SweepConfig::default();
            f(&mut c);
            matches!(c.validate(), Err(Error::Config(_)))
        };
        assert!(bad(|c| c.element_counts = vec![24]));
        assert!(bad(|c| c.element_counts = vec![]));
        assert!(bad(|c| c.users = 30));
        assert!(bad(|c| c.element_counts = vec![1]));
        assert!(bad(|c| c.users = 0));
        assert!(bad(|c| c.noise_figure = 0.5));
        assert!(bad(|c| c.delta = 0.0));
        assert!(bad(|c| c.delta = -1.0));
        assert!(bad(|c| c.snr = f64::NAN));
        assert!(bad(|c| c.realizations = 0));
        assert!(bad(|c| c.aperture_lambda = 0.0));
        assert!(bad(|c| c.dither_ratio = -0.1));
        assert!(bad(|c| c.workers = 0));
        assert!(bad(|c| c.element_counts = vec![16]));
    }

    #[test]
    fn message_suggests_a_square() {
        let cfg = SweepConfig {
            element_counts: vec![26],
            ..SweepConfig::default()
        };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("26") && msg.contains("25"), "{msg}");
    }

    #[test]
    fn spacing_limit() {
        assert!((MAX_SPACING_OVER_LAMBDA - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-16);
        let ok = SweepConfig {
            element_counts: vec![25],
            ..SweepConfig::default()
        };
        ok.validate().unwrap();
        let msg = SweepConfig {
            aperture_lambda: 3.0,
            ..ok
        }
        .validate()
        .unwrap_err()
        .to_string();
        assert!(msg.contains("0.6000") && msg.contains("1/√π"), "{msg}");
    }

    #[test]
    fn element_lists() {
        assert_eq!(parse_element_list("25,49, 100").unwrap(), vec![25, 49, 100]);
        assert_eq!(parse_element_list("1").unwrap(), vec![1]);
        assert!(parse_element_list("").is_err());
        assert!(parse_element_list("25,,49").is_err());
        assert!(parse_element_list("25,48").is_err());
        assert!(parse_element_list("0").is_err());
        assert!(parse_element_list("-4").is_err());
        assert!(parse_element_list("x").is_err());
    }
}
