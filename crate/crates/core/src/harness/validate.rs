use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;

use rand::Rng;

use super::config::SweepConfig;
use super::sweep::realization_stream;
use crate::array::{
    closed_form_entries, integral_oracle_entries, ArrayGeometry, CouplingMatrix, QuadratureGrid, TOL_EIG,
};
use crate::bessel::j1;
use crate::channel::{complex_normal, complex_normal_matrix, rayleigh_channels, StreamId};
use crate::downlink::{dithered_transmit_covariance, radiated_power, zf_precoder, DownlinkConfig, DownlinkEvaluator};
use crate::linalg::{real_diagonal, HermitianEigen};
use crate::quadrature::Rule;
use crate::quantization::{arcsine_covariance, bussgang_gain, uqn_frobenius_gap, MonteCarloQuantizer};
use crate::uplink::{uplink_asymptotic_loss, UplinkConfig, UplinkEvaluator};
use crate::{CMatrix, CVector, Result, C64};

/// Deliberate corruption of the model, used to check that the suite notices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultInjection {
    /// Multiplies every coupling-matrix entry before the passivity checks.
    pub coupling_scale: f64,
}

impl Default for FaultInjection {
    fn default() -> Self {
        Self { coupling_scale: 1.0 }
    }
}

/// Oracle-equivalence tolerance for `quad_points` θ nodes: `1e-6` at 512 or
/// more, growing as `(512/n)²` below that.
pub fn oracle_tolerance(quad_points: usize) -> f64 {
    let ratio = 512.0 / quad_points as f64;
    1e-6 * ratio.powi(2).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub expected: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {}: observed {:.10e}, expected {}",
            self.name, self.observed, self.expected
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn at_most(&mut self, name: impl Into<String>, observed: f64, bound: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: observed <= bound,
            observed,
            expected: format!("≤ {bound:.10e}"),
        });
    }

    fn near(&mut self, name: impl Into<String>, observed: f64, target: f64, tol: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: (observed - target).abs() <= tol,
            observed,
            expected: format!("{target:.9} ± {tol:.1e}"),
        });
    }

    fn broken(&mut self, name: impl Into<String>, err: impl fmt::Display) {
        self.checks.push(Check {
            name: format!("{} ({err})", name.into()),
            passed: false,
            observed: f64::NAN,
            expected: "no error".into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Runs the model property suite at reduced sizes.
pub fn validate_model(cfg: &SweepConfig, fault: FaultInjection) -> Result<ValidationReport> {
    cfg.validate()?;
    let mut rep = ValidationReport::default();
    check_bessel(&mut rep);
    check_oracle(&mut rep, cfg.quad_points);
    check_passivity(&mut rep, cfg, fault);
    check_impedance(&mut rep, cfg.seed);
    check_quantizer(&mut rep, cfg.seed);
    check_uplink(&mut rep, cfg);
    check_downlink(&mut rep, cfg);
    Ok(rep)
}

fn check_bessel(rep: &mut ValidationReport) {
    let rule = Rule::gauss_legendre(96, 0.0, PI);
    let err = [0.5, 3.0, 7.5, 12.5, 30.0]
        .iter()
        .map(|&x| (j1(x) - rule.integrate(|t| (t - x * t.sin()).cos()) / PI).abs())
        .fold(0.0, f64::max);
    rep.at_most("bessel J1 vs integral representation", err, 1e-12);
}

fn check_oracle(rep: &mut ValidationReport, quad_points: usize) {
    let grid = QuadratureGrid::new(quad_points, 2 * quad_points);
    let tol = oracle_tolerance(quad_points);
    for side in [1, 2, 3] {
        for a in [0.125, 0.25, 0.5] {
            let geom = match ArrayGeometry::new(a, side) {
                Ok(g) => g,
                Err(e) => return rep.broken("oracle geometry", e),
            };
            let closed = match closed_form_entries(&geom) {
                Ok(c) => c,
                Err(e) => return rep.broken("closed-form coupling", e),
            };
            let oracle = integral_oracle_entries(&geom, &grid);
            rep.at_most(
                format!("coupling closed form vs {quad_points}-point oracle, side {side}, a/λ {a}"),
                max_abs(&(&closed - oracle)),
                tol,
            );
            let diag = (0..closed.nrows())
                .map(|i| (closed[(i, i)] - C64::new(PI * a * a, 0.0)).norm())
                .fold(0.0, f64::max);
            rep.at_most(format!("coupling diagonal π(a/λ)², side {side}, a/λ {a}"), diag, 1e-15);
        }
    }
}

fn check_passivity(rep: &mut ValidationReport, cfg: &SweepConfig, fault: FaultInjection) {
    let mut rng = StreamId::new(cfg.seed, u64::MAX - 1).rng();
    for &m in &cfg.element_counts {
        let entries = match ArrayGeometry::fixed_aperture(cfg.aperture_lambda, m).and_then(|g| closed_form_entries(&g))
        {
            Ok(e) => e * C64::new(fault.coupling_scale, 0.0),
            Err(e) => return rep.broken(format!("passivity M={m}"), e),
        };
        let eig = HermitianEigen::new(&entries);
        rep.at_most(
            format!("passivity max eigenvalue of B, M={m}"),
            eig.max(),
            1.0 + TOL_EIG,
        );
        let worst = (0..200)
            .map(|_| {
                let f = CVector::from_fn(m, |_, _| complex_normal(&mut rng));
                let q = (f.adjoint() * &entries * &f)[(0, 0)].re;
                q / f.norm_squared()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        rep.at_most(
            format!("Parseval fᴴBf/‖f‖² over 200 draws, M={m}"),
            worst,
            1.0 + TOL_EIG,
        );
    }
}

fn check_impedance(rep: &mut ValidationReport, seed: u64) {
    let mut rng = StreamId::new(seed, u64::MAX - 2).rng();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let n = rng.random_range(1..=6);
        let a = complex_normal_matrix(&mut rng, n, n);
        let w = complex_normal_matrix(&mut rng, n, n);
        let z = &a * a.adjoint() + (&w - w.adjoint());
        match CouplingMatrix::from_impedance(&z, rng.random_range(0.1..10.0)) {
            Ok(b) => worst = worst.max(b.max_eigenvalue()),
            Err(e) => return rep.broken("impedance-derived coupling", e),
        }
    }
    rep.at_most(
        "impedance-derived B max eigenvalue over 20 passive Z",
        worst,
        1.0 + TOL_EIG,
    );
    let r0 = 50.0;
    match CouplingMatrix::from_impedance(&(CMatrix::identity(4, 4) * C64::new(r0, 0.0)), r0) {
        Ok(b) => rep.at_most(
            "matched impedance Z = R0·I gives B = I",
            max_abs(&(b.entries() - CMatrix::identity(4, 4))),
            1e-12,
        ),
        Err(e) => rep.broken("matched impedance", e),
    }
}

fn check_quantizer(rep: &mut ValidationReport, seed: u64) {
    let mut rng = StreamId::new(seed, u64::MAX - 3).rng();
    let a = complex_normal_matrix(&mut rng, 4, 4);
    let c = &a * a.adjoint() + CMatrix::identity(4, 4) * C64::new(0.1, 0.0);
    let d = real_diagonal(&c);
    let reference = match arcsine_covariance(&c, &d) {
        Ok(r) => r,
        Err(e) => return rep.broken("arcsine covariance", e),
    };
    let diag = (0..4)
        .map(|i| (reference[(i, i)].re - d[i]).abs() / d[i])
        .fold(0.0, f64::max);
    rep.at_most("arcsine law preserves the diagonal", diag, 1e-12);
    match uqn_frobenius_gap(&c, &d) {
        Ok(gap) => rep.checks.push(Check {
            name: "UQN distortion gap ‖R − R_uqn‖_F/‖R‖_F, correlated 4×4 input".into(),
            passed: gap > 0.0 && gap < 1.0,
            observed: gap,
            expected: "in (0, 1)".into(),
        }),
        Err(e) => rep.broken("UQN distortion gap", e),
    }
    match MonteCarloQuantizer::run(&c, 200_000, &mut rng) {
        Ok(mc) => {
            rep.at_most(
                "1-bit output covariance vs arcsine law (max |z|, 2e5 draws)",
                mc.out_z_score(&reference),
                4.5,
            );
            let cross = &c * C64::new(bussgang_gain(), 0.0);
            rep.at_most(
                "1-bit cross-covariance vs √(2/π)·C (max |z|, 2e5 draws)",
                mc.cross_z_score(&cross),
                4.5,
            );
        }
        Err(e) => rep.broken("Monte Carlo quantizer", e),
    }
}

fn check_uplink(rep: &mut ValidationReport, cfg: &SweepConfig) {
    rep.near("uplink loss factor, N_F = 1", uplink_asymptotic_loss(1.0), 1.0, 1e-12);
    rep.near(
        "uplink loss factor, N_F = 2",
        uplink_asymptotic_loss(2.0),
        2.0 / (1.0 + PI / 2.0),
        1e-12,
    );
    rep.near(
        "uplink loss factor, N_F → ∞",
        uplink_asymptotic_loss(f64::INFINITY),
        FRAC_2_PI,
        1e-12,
    );
    let run = || -> Result<f64> {
        let geom = ArrayGeometry::fixed_aperture(1.5, 36)?;
        let b = CouplingMatrix::closed_form(&geom)?;
        let ucfg = UplinkConfig::symmetric(cfg.users.min(36), cfg.snr, cfg.noise_figure)?;
        let eval = UplinkEvaluator::new(&b, &ucfg)?;
        let mut worst = f64::NEG_INFINITY;
        for r in 0..5 {
            let ch = rayleigh_channels(&b, ucfg.users(), realization_stream(cfg.seed, 36, r, 0))?;
            let rep = eval.evaluate(&ch.h)?;
            for k in 0..ucfg.users() {
                worst = worst.max(rep.one_bit_exact[k] - rep.ideal[k]);
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => rep.at_most("uplink 1-bit exact rate minus ideal rate, M=36", w, 1e-9),
        Err(e) => rep.broken("uplink rates", e),
    }
}

fn check_downlink(rep: &mut ValidationReport, cfg: &SweepConfig) {
    let run = || -> Result<[f64; 4]> {
        let geom = ArrayGeometry::fixed_aperture(1.5, 36)?;
        let b = CouplingMatrix::closed_form(&geom)?;
        let dcfg = DownlinkConfig::from_snr(cfg.snr, cfg.noise_figure)?
            .with_dither(cfg.dither_power(geom.spacing_over_lambda()))
            .with_delta(cfg.delta);
        let eval = DownlinkEvaluator::new(&b, &geom, &dcfg)?;
        let users = cfg.users.min(36);
        let mut worst = [f64::NEG_INFINITY; 4];
        for r in 0..5 {
            let h = rayleigh_channels(&b, users, realization_stream(cfg.seed, 36, r, 0))?.downlink();
            let st = zf_precoder(&h, dcfg.total_power)?;
            let hf = &h * &st.precoder;
            let off = (0..users)
                .flat_map(|i| (0..users).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| hf[(i, j)].norm())
                .fold(0.0, f64::max);
            let out = eval.evaluate(&h)?;
            let tx = dithered_transmit_covariance(&st.precoder, eval.projector(), dcfg.dither_power)?;
            let czq = arcsine_covariance(&tx.c_z, &tx.d)?;
            let residual = (out.exact.alpha * radiated_power(&czq, &b) - out.radiated).abs() / out.radiated;
            let excess = out
                .exact
                .rates
                .iter()
                .map(|r| r - out.ideal_rate)
                .fold(f64::NEG_INFINITY, f64::max);
            worst[0] = worst[0].max(off);
            worst[1] = worst[1].max(residual);
            worst[2] = worst[2].max(out.radiated / dcfg.total_power);
            worst[3] = worst[3].max(excess);
        }
        Ok(worst)
    };
    match run() {
        Ok([off, residual, ratio, excess]) => {
            rep.at_most("ZF off-diagonal |HF|, M=36", off, 1e-9);
            rep.at_most(
                "equal radiated power α·tr(C_zQ B) vs P_R (relative), M=36",
                residual,
                1e-9,
            );
            rep.at_most("ideal P_R/ε, M=36", ratio, 1.0 + 1e-9);
            rep.at_most("downlink 1-bit exact rate minus ideal rate, M=36", excess, 1e-9);
        }
        Err(e) => rep.broken("downlink checks", e),
    }
}
