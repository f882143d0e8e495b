use rayon::prelude::*;

use super::config::SweepConfig;
use crate::array::{ArrayGeometry, CouplingMatrix};
use crate::channel::{rayleigh_channels, StreamId};
use crate::downlink::{power_ratio_diagnostic, DownlinkConfig, DownlinkEvaluation, DownlinkEvaluator};
use crate::uplink::{UplinkConfig, UplinkEvaluator};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Uplink,
    Downlink,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Uplink => "uplink",
            Scenario::Downlink => "downlink",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Ideal,
    OneBitExact,
    /// Downlink exact bound with only quantization distortion as user noise.
    OneBitExactNoLeak,
    OneBitUqn,
    OneBitNoDither,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Ideal => "ideal",
            Variant::OneBitExact => "onebit_exact",
            Variant::OneBitExactNoLeak => "onebit_exact_noleak",
            Variant::OneBitUqn => "onebit_uqn",
            Variant::OneBitNoDither => "onebit_nodither",
        }
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: Scenario,
    pub variant: Variant,
    pub elements: usize,
    pub a_over_lambda: f64,
    pub mean_rate: f64,
    pub stderr: f64,
    pub alpha: Option<f64>,
    pub sigma_d2: Option<f64>,
    pub p_r_ratio: Option<f64>,
    pub leakage: Option<f64>,
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Summary { mean, stderr: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Summary {
        mean,
        stderr: (var / n as f64).sqrt(),
    }
}

fn user_mean(rates: &[f64]) -> f64 {
    rates.iter().sum::<f64>() / rates.len() as f64
}

/// RNG substream for realization `realization` of the sweep point with `elements`
/// antennas; `attempt` counts resamples after numerical failures.
pub fn realization_stream(seed: u64, elements: usize, realization: usize, attempt: usize) -> StreamId {
    assert!(elements < 1 << 24 && realization < 1 << 24 && attempt < 1 << 16);
    StreamId::new(
        seed,
        ((elements as u64) << 40) | ((realization as u64) << 16) | attempt as u64,
    )
}

/// Resamples failed draws are allowed up to this many per sweep point.
pub fn failure_budget(realizations: usize) -> usize {
    realizations / 100
}

fn is_recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::RankDeficient(_) | Error::DegenerateCovariance(_) | Error::DegenerateRadiation(_)
    )
}

struct Attempted<T> {
    value: T,
    failures: usize,
}

/// Runs `eval` for every realization on the worker pool, resampling recoverable
/// failures with fresh substreams. Results come back in realization order.
fn run_realizations<T, F>(cfg: &SweepConfig, elements: usize, eval: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(StreamId) -> Result<T> + Sync,
{
    let budget = failure_budget(cfg.realizations);
    let one = |r: usize| -> Result<Attempted<T>> {
        let mut failures = 0;
        loop {
            match eval(realization_stream(cfg.seed, elements, r, failures)) {
                Ok(value) => return Ok(Attempted { value, failures }),
                Err(e) if is_recoverable(&e) && failures < budget => failures += 1,
                Err(e) if is_recoverable(&e) => {
                    return Err(Error::TooManyFailures {
                        elements,
                        failures: failures + 1,
                        realizations: cfg.realizations,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<Attempted<T>>> = pool.install(|| (0..cfg.realizations).into_par_iter().map(one).collect());
    let mut failures = 0;
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        let a = r?;
        failures += a.failures;
        out.push(a.value);
    }
    if failures > budget {
        return Err(Error::TooManyFailures {
            elements,
            failures,
            realizations: cfg.realizations,
        });
    }
    Ok(out)
}

/// Per-realization user-averaged uplink results for one element count.
#[derive(Debug, Clone)]
pub struct UplinkPoint {
    pub elements: usize,
    pub spacing_over_lambda: f64,
    pub ideal: Vec<f64>,
    pub exact: Vec<f64>,
    pub uqn: Vec<f64>,
    /// User mean of `(2^{R_uqn} − 1) / (2^{R_ideal} − 1)`.
    pub uqn_snr_ratio: Vec<f64>,
}

pub fn uplink_point(cfg: &SweepConfig, elements: usize) -> Result<UplinkPoint> {
    let geom = ArrayGeometry::fixed_aperture(cfg.aperture_lambda, elements)?;
    let b = CouplingMatrix::closed_form(&geom)?;
    let ucfg = UplinkConfig::symmetric(cfg.users, cfg.snr, cfg.noise_figure)?;
    let eval = UplinkEvaluator::new(&b, &ucfg)?;
    let per = run_realizations(cfg, elements, |stream| {
        let ch = rayleigh_channels(&b, cfg.users, stream)?;
        let rep = eval.evaluate(&ch.h)?;
        let ratio: Vec<f64> = rep
            .one_bit_uqn
            .iter()
            .zip(&rep.ideal)
            .map(|(u, i)| (u.exp2() - 1.0) / (i.exp2() - 1.0))
            .collect();
        let means = [
            user_mean(&rep.ideal),
            user_mean(&rep.one_bit_exact),
            user_mean(&rep.one_bit_uqn),
            user_mean(&ratio),
        ];
        if means.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateCovariance(format!(
                "non-finite rate at M = {elements}"
            )));
        }
        Ok(means)
    })?;
    let col = |i: usize| per.iter().map(|m| m[i]).collect::<Vec<_>>();
    Ok(UplinkPoint {
        elements,
        spacing_over_lambda: geom.spacing_over_lambda(),
        ideal: col(0),
        exact: col(1),
        uqn: col(2),
        uqn_snr_ratio: col(3),
    })
}

pub fn run_uplink_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &m in &cfg.element_counts {
        let p = uplink_point(cfg, m)?;
        for (variant, values) in [
            (Variant::Ideal, &p.ideal),
            (Variant::OneBitExact, &p.exact),
            (Variant::OneBitUqn, &p.uqn),
        ] {
            let s = summarize(values);
            rows.push(SweepRow {
                scenario: Scenario::Uplink,
                variant,
                elements: m,
                a_over_lambda: p.spacing_over_lambda,
                mean_rate: s.mean,
                stderr: s.stderr,
                alpha: None,
                sigma_d2: None,
                p_r_ratio: None,
                leakage: None,
            });
        }
    }
    Ok(rows)
}

/// Per-realization downlink quantities, user-averaged where per user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownlinkSample {
    pub ideal: f64,
    pub exact: f64,
    pub exact_no_leak: f64,
    pub uqn: f64,
    pub no_dither: f64,
    pub alpha_exact: f64,
    pub alpha_uqn: f64,
    pub alpha_no_dither: f64,
    /// `P_R / ε`
    pub ideal_power_ratio: f64,
    /// `P_R / (α (ε + σ_d²))` for the exact, UQN and undithered equalizers.
    pub exact_power_ratio: f64,
    pub uqn_power_ratio: f64,
    pub no_dither_power_ratio: f64,
    /// Largest relative deviation of `Diag(C_z)` from `(ε + σ_d²)/M`.
    pub scaling_spread: f64,
}

impl DownlinkSample {
    fn from_evaluation(e: &DownlinkEvaluation, eps: f64, sigma: f64) -> Self {
        let ratio = |alpha: f64, s: f64| power_ratio_diagnostic(e.radiated, alpha, eps, s);
        Self {
            ideal: e.ideal_rate,
            exact: e.exact.mean_rate(),
            exact_no_leak: e.exact_no_leak.mean_rate(),
            uqn: e.uqn.mean_rate(),
            no_dither: e.no_dither.mean_rate(),
            alpha_exact: e.exact.alpha,
            alpha_uqn: e.uqn.alpha,
            alpha_no_dither: e.no_dither.alpha,
            ideal_power_ratio: ratio(1.0, 0.0).ideal,
            exact_power_ratio: ratio(e.exact.alpha, sigma).one_bit,
            uqn_power_ratio: ratio(e.uqn.alpha, sigma).one_bit,
            no_dither_power_ratio: ratio(e.no_dither.alpha, 0.0).one_bit,
            scaling_spread: e.scaling_spread,
        }
    }

    fn values(&self) -> [f64; 13] {
        [
            self.ideal,
            self.exact,
            self.exact_no_leak,
            self.uqn,
            self.no_dither,
            self.alpha_exact,
            self.alpha_uqn,
            self.alpha_no_dither,
            self.ideal_power_ratio,
            self.exact_power_ratio,
            self.uqn_power_ratio,
            self.no_dither_power_ratio,
            self.scaling_spread,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct DownlinkPoint {
    pub elements: usize,
    pub spacing_over_lambda: f64,
    pub dither_power: f64,
    /// Null-space leakage of the dither projector, when it is nonzero.
    pub leakage: Option<f64>,
    pub samples: Vec<DownlinkSample>,
}

impl DownlinkPoint {
    pub fn column(&self, f: impl Fn(&DownlinkSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }
}

pub fn downlink_config(cfg: &SweepConfig, spacing_over_lambda: f64) -> Result<DownlinkConfig> {
    Ok(DownlinkConfig::from_snr(cfg.snr, cfg.noise_figure)?
        .with_dither(cfg.dither_power(spacing_over_lambda))
        .with_delta(cfg.delta))
}

pub fn downlink_point(cfg: &SweepConfig, elements: usize) -> Result<DownlinkPoint> {
    let geom = ArrayGeometry::fixed_aperture(cfg.aperture_lambda, elements)?;
    let b = CouplingMatrix::closed_form(&geom)?;
    let dcfg = downlink_config(cfg, geom.spacing_over_lambda())?;
    let eval = DownlinkEvaluator::new(&b, &geom, &dcfg)?;
    let samples = run_realizations(cfg, elements, |stream| {
        let h = rayleigh_channels(&b, cfg.users, stream)?.downlink();
        let e = eval.evaluate(&h)?;
        let s = DownlinkSample::from_evaluation(&e, dcfg.total_power, dcfg.dither_power);
        if s.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateRadiation(format!(
                "non-finite result at M = {elements}"
            )));
        }
        Ok(s)
    })?;
    Ok(DownlinkPoint {
        elements,
        spacing_over_lambda: geom.spacing_over_lambda(),
        dither_power: dcfg.dither_power,
        leakage: eval.leakage(),
        samples,
    })
}

pub fn run_downlink_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &m in &cfg.element_counts {
        let p = downlink_point(cfg, m)?;
        let mean = |f: fn(&DownlinkSample) -> f64| summarize(&p.column(f)).mean;
        let dithered = (p.dither_power > 0.0).then_some(p.leakage).flatten();
        let mut push = |variant, rate: fn(&DownlinkSample) -> f64, alpha, p_r_ratio, sigma_d2, leakage| {
            let s = summarize(&p.column(rate));
            rows.push(SweepRow {
                scenario: Scenario::Downlink,
                variant,
                elements: m,
                a_over_lambda: p.spacing_over_lambda,
                mean_rate: s.mean,
                stderr: s.stderr,
                alpha,
                sigma_d2,
                p_r_ratio: Some(p_r_ratio),
                leakage,
            });
        };
        let alpha_exact = Some(mean(|s| s.alpha_exact));
        let sigma = Some(p.dither_power);
        push(
            Variant::Ideal,
            |s| s.ideal,
            None,
            mean(|s| s.ideal_power_ratio),
            None,
            None,
        );
        push(
            Variant::OneBitExact,
            |s| s.exact,
            alpha_exact,
            mean(|s| s.exact_power_ratio),
            sigma,
            dithered,
        );
        push(
            Variant::OneBitExactNoLeak,
            |s| s.exact_no_leak,
            alpha_exact,
            mean(|s| s.exact_power_ratio),
            sigma,
            dithered,
        );
        push(
            Variant::OneBitUqn,
            |s| s.uqn,
            Some(mean(|s| s.alpha_uqn)),
            mean(|s| s.uqn_power_ratio),
            sigma,
            dithered,
        );
        push(
            Variant::OneBitNoDither,
            |s| s.no_dither,
            Some(mean(|s| s.alpha_no_dither)),
            mean(|s| s.no_dither_power_ratio),
            Some(0.0),
            None,
        );
    }
    Ok(rows)
}
