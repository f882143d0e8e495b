//! Acceptance gate. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dense_mimo::array::{
    closed_form_entries, gamma_constant, integral_oracle_entries, ArrayGeometry, CouplingMatrix, ElementPattern,
    QuadratureGrid, TOL_EIG,
};
use dense_mimo::channel::{complex_normal, complex_normal_matrix, rayleigh_channels, StreamId};
use dense_mimo::downlink::{
    alpha_power_equalizer, dithered_transmit_covariance, radiated_power, zf_precoder, AlphaModel, DownlinkEvaluator,
};
use dense_mimo::harness::{
    downlink_config, downlink_point, realization_stream, run_downlink_sweep, run_uplink_sweep, summarize, to_csv_bytes,
    uplink_point, DownlinkPoint, SweepConfig, SweepRow, Variant,
};
use dense_mimo::linalg::real_diagonal;
use dense_mimo::quantization::{arcsine_covariance, bussgang_gain, MonteCarloQuantizer};
use dense_mimo::uplink::uplink_asymptotic_loss;
use dense_mimo::{CMatrix, CVector, C64};
use rand::Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

/// Results shared between criteria so each sweep runs once.
struct Shared {
    cfg: SweepConfig,
    uplink_rows: Vec<SweepRow>,
    downlink_rows: Vec<SweepRow>,
    downlink_points: Vec<DownlinkPoint>,
}

impl Shared {
    fn new() -> Self {
        let cfg = SweepConfig::default();
        let uplink_rows = run_uplink_sweep(&cfg).expect("uplink sweep");
        let downlink_rows = run_downlink_sweep(&cfg).expect("downlink sweep");
        let downlink_points = cfg
            .element_counts
            .iter()
            .map(|&m| downlink_point(&cfg, m).expect("downlink point"))
            .collect();
        Self {
            cfg,
            uplink_rows,
            downlink_rows,
            downlink_points,
        }
    }

    fn rate(rows: &[SweepRow], variant: Variant, m: usize) -> &SweepRow {
        rows.iter()
            .find(|r| r.variant == variant && r.elements == m)
            .expect("row present")
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn coupling_oracle() -> Verdict {
    let grid = QuadratureGrid::new(512, 1024);
    let mut worst = 0.0f64;
    let mut worst_diag = 0.0f64;
    for side in [1, 2, 3, 5] {
        for a in [0.125, 0.25, 0.5] {
            let geom = ArrayGeometry::new(a, side).unwrap();
            let closed = closed_form_entries(&geom).unwrap();
            let oracle = integral_oracle_entries(&geom, &grid);
            worst = worst.max(max_abs(&(&closed - &oracle)));
            for i in 0..closed.nrows() {
                worst_diag = worst_diag.max((closed[(i, i)] - C64::new(PI * a * a, 0.0)).norm());
            }
        }
    }
    verdict(
        worst <= 1e-6 && worst_diag == 0.0,
        format!("max |B_closed − B_oracle| = {worst:.2e} (≤ 1e-6), diagonal deviation from π(a/λ)² = {worst_diag:.1e}"),
    )
}

fn passivity() -> Verdict {
    let cfg = SweepConfig::default();
    let mut rng = StreamId::new(2, 0).rng();
    let mut max_eig = f64::NEG_INFINITY;
    let mut max_parseval = f64::NEG_INFINITY;
    let mut geoms = 0;
    for &m in &cfg.element_counts {
        let geom = ArrayGeometry::fixed_aperture(cfg.aperture_lambda, m).unwrap();
        let b = match CouplingMatrix::closed_form(&geom) {
            Ok(b) => b,
            Err(e) => return verdict(false, format!("M={m}: {e}")),
        };
        geoms += 1;
        max_eig = max_eig.max(b.max_eigenvalue());
        for _ in 0..1000 {
            let f = CVector::from_fn(m, |_, _| complex_normal(&mut rng));
            max_parseval = max_parseval.max(b.quadratic_form(&f) / f.norm_squared());
        }
    }
    verdict(
        max_eig <= 1.0 + TOL_EIG && max_parseval <= 1.0 + TOL_EIG,
        format!(
            "{geoms} sweep geometries: max eigenvalue {max_eig:.12}, max fᵀBf*/‖f‖² over 1000 draws each {max_parseval:.12} (≤ 1 + 1e-9)"
        ),
    )
}

fn impedance() -> Verdict {
    let mut rng = StreamId::new(3, 0).rng();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let n = rng.random_range(1..=16);
        let rank = rng.random_range(0..=n);
        let a = complex_normal_matrix(&mut rng, n, rank);
        let w = complex_normal_matrix(&mut rng, n, n);
        let resistance = &a * a.adjoint() * C64::new(rng.random_range(0.1..100.0), 0.0);
        let reactance = (&w + w.adjoint()) * C64::new(0.0, rng.random_range(0.0..100.0));
        match CouplingMatrix::from_impedance(&(resistance + reactance), rng.random_range(1.0..100.0)) {
            Ok(b) => worst = worst.max(b.max_eigenvalue()),
            Err(e) => return verdict(false, format!("impedance {i} (n={n}): {e}")),
        }
    }
    let r0 = 50.0;
    let b = CouplingMatrix::from_impedance(&(CMatrix::identity(8, 8) * C64::new(r0, 0.0)), r0).unwrap();
    let matched = max_abs(&(b.entries() - CMatrix::identity(8, 8)));
    verdict(
        worst <= 1.0 + TOL_EIG && matched <= 1e-12,
        format!(
            "100 passive Z: max eigenvalue {worst:.12} (≤ 1 + 1e-9); Z = R0·I: max |B − I| = {matched:.1e} (≤ 1e-12)"
        ),
    )
}

fn arcsine_oracle() -> Verdict {
    let mut rng = StreamId::new(1, 4).rng();
    let (mut worst_out, mut worst_cross) = (0.0f64, 0.0f64);
    let (mut part_exceed, mut parts) = (0usize, 0usize);
    let mut entries = 0usize;
    for _ in 0..5 {
        let a = complex_normal_matrix(&mut rng, 8, 8);
        let c = &a * a.adjoint();
        let d = real_diagonal(&c);
        let reference = arcsine_covariance(&c, &d).unwrap();
        let cross_ref = &c * C64::new(bussgang_gain(), 0.0);
        let mc = MonteCarloQuantizer::run(&c, 1_000_000, &mut rng).unwrap();
        let out = mc.out_complex_z_scores(&reference);
        let cross = mc.cross_complex_z_scores(&cross_ref);
        entries += out.len() + cross.len();
        worst_out = out.into_iter().fold(worst_out, f64::max);
        worst_cross = cross.into_iter().fold(worst_cross, f64::max);
        let mut z = mc.out_z_scores(&reference);
        z.extend(mc.cross_z_scores(&cross_ref));
        let random: Vec<f64> = z.into_iter().filter(|&v| v > 0.0).collect();
        parts += random.len();
        part_exceed += random.iter().filter(|&&v| v > 3.0).count();
    }
    verdict(
        worst_out <= 3.0 && worst_cross <= 3.0,
        format!(
            "{entries} complex entries, max |Ĉ − C|/se: output {worst_out:.2}, cross {worst_cross:.2} (≤ 3); \
             per real/imag part {part_exceed} of {parts} exceed 3 (chance expectation {:.1})",
            parts as f64 * 0.0027
        ),
    )
}

fn uplink_loss() -> Verdict {
    const SPEC_TARGET: f64 = 0.77847;
    let exact = uplink_asymptotic_loss(2.0);
    let formula_err = [
        (uplink_asymptotic_loss(1.0), 1.0),
        (exact, 2.0 / (1.0 + FRAC_PI_2)),
        (uplink_asymptotic_loss(f64::INFINITY), FRAC_2_PI),
        (uplink_asymptotic_loss(1e12), FRAC_2_PI),
    ]
    .iter()
    .map(|(got, want)| (got - want).abs())
    .fold(0.0, f64::max);
    let cfg = SweepConfig::default();
    let ratios: Vec<(f64, f64)> = [25, 100, 400]
        .iter()
        .map(|&m| {
            let p = uplink_point(&cfg, m).unwrap();
            (p.spacing_over_lambda, summarize(&p.uqn_snr_ratio).mean)
        })
        .collect();
    let monotone = |target: f64| {
        ratios
            .windows(2)
            .all(|w| (w[1].1 - target).abs() < (w[0].1 - target).abs())
    };
    let last = ratios[2].1;
    let rel = |target: f64| (last - target).abs() / target;
    verdict(
        formula_err <= 1e-9 && monotone(exact) && monotone(SPEC_TARGET) && rel(exact) <= 0.15 && rel(SPEC_TARGET) <= 0.15,
        format!(
            "loss formula at N_F ∈ {{1, 2, ∞}} off by {formula_err:.1e}; N_F = 2 gives {exact:.9} (stated 0.77847); \
             mean SNR ratio {:.4} / {:.4} / {:.4} at a/λ = 1/2, 1/4, 1/8; at λ/8 {:.1}% from {exact:.6}, {:.1}% from 0.77847",
            ratios[0].1,
            ratios[1].1,
            ratios[2].1,
            100.0 * rel(exact),
            100.0 * rel(SPEC_TARGET)
        ),
    )
}

fn uplink_trends(s: &Shared) -> Verdict {
    let rows = &s.uplink_rows;
    let ideal: Vec<f64> = s
        .cfg
        .element_counts
        .iter()
        .map(|&m| Shared::rate(rows, Variant::Ideal, m).mean_rate)
        .collect();
    let mean = ideal.iter().sum::<f64>() / ideal.len() as f64;
    let spread = (ideal.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ideal.iter().cloned().fold(f64::INFINITY, f64::min))
        / mean;
    let exact = |m| Shared::rate(rows, Variant::OneBitExact, m).mean_rate;
    let uqn = |m| Shared::rate(rows, Variant::OneBitUqn, m).mean_rate;
    let gain = exact(100) / exact(25) - 1.0;
    let (gap25, gap400) = ((uqn(25) - exact(25)).abs(), (uqn(400) - exact(400)).abs());
    verdict(
        spread < 0.10 && gain > 0.15 && gap400 < gap25,
        format!(
            "ideal spread {:.2}% of mean (< 10%); 1-bit exact gain M=25→100 {:.1}% (> 15%); |UQN − exact| {gap25:.3} at M=25, {gap400:.3} at M=400",
            100.0 * spread,
            100.0 * gain
        ),
    )
}

fn downlink_trends(s: &Shared) -> Verdict {
    let rows = &s.downlink_rows;
    let ms = &s.cfg.element_counts;
    let rate = |v, m| Shared::rate(rows, v, m).mean_rate;
    let (first, last) = (ms[0], *ms.last().unwrap());
    let shortfall = 1.0 - rate(Variant::OneBitExact, last) / rate(Variant::Ideal, last);
    let dithered_gain = rate(Variant::OneBitExact, last) / rate(Variant::OneBitExact, first) - 1.0;
    let plain_gain = rate(Variant::OneBitNoDither, last) / rate(Variant::OneBitNoDither, first) - 1.0;
    let ratios: Vec<f64> = ms
        .iter()
        .map(|&m| Shared::rate(rows, Variant::OneBitExact, m).p_r_ratio.unwrap())
        .collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let max_ideal_ratio = s
        .downlink_points
        .iter()
        .flat_map(|p| p.samples.iter().map(|x| x.ideal_power_ratio))
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        shortfall <= 0.15 && plain_gain < dithered_gain && decreasing && max_ideal_ratio <= 1.0,
        format!(
            "dithered exact at M={last} {:.1}% below ideal (≤ 15%); gain M={first}→{last}: no dither {:.1}% < dithered {:.1}%; \
             one-bit P_R/(α(ε+σ_d²)) {} (strictly decreasing); max ideal P_R/ε over all realizations {max_ideal_ratio:.4} (≤ 1)",
            100.0 * shortfall,
            100.0 * plain_gain,
            100.0 * dithered_gain,
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(" → ")
        ),
    )
}

fn power_equalization(s: &Shared) -> Verdict {
    let cfg = &s.cfg;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for &m in &cfg.element_counts {
        let geom = ArrayGeometry::fixed_aperture(cfg.aperture_lambda, m).unwrap();
        let b = CouplingMatrix::closed_form(&geom).unwrap();
        let dcfg = downlink_config(cfg, geom.spacing_over_lambda()).unwrap();
        let eval = DownlinkEvaluator::new(&b, &geom, &dcfg).unwrap();
        for r in 0..cfg.realizations {
            let h = rayleigh_channels(&b, cfg.users, realization_stream(cfg.seed, m, r, 0))
                .unwrap()
                .downlink();
            let out = eval.evaluate(&h).unwrap();
            let state = zf_precoder(&h, dcfg.total_power).unwrap();
            let tx = dithered_transmit_covariance(&state.precoder, eval.projector(), dcfg.dither_power).unwrap();
            let c_zq = arcsine_covariance(&tx.c_z, &tx.d).unwrap();
            let p_r = radiated_power(&(&state.precoder * state.precoder.adjoint()), &b);
            worst = worst.max((out.exact.alpha * radiated_power(&c_zq, &b) - p_r).abs() / p_r);
            checked += 1;
        }
    }
    let a = 1e-3;
    let eps = cfg.downlink_power();
    let alpha = alpha_power_equalizer(
        1.0,
        AlphaModel::Uqn {
            spacing_over_lambda: a,
            total_power: eps,
            dither_power: cfg.dither_ratio * eps / a,
            gamma: gamma_constant(ElementPattern::Cosine).gamma,
        },
    )
    .unwrap();
    let off = (alpha - FRAC_PI_2).abs() / FRAC_PI_2;
    verdict(
        worst <= 1e-9 && off <= 0.01,
        format!(
            "{checked} realizations: max |α·tr(C_zQ B) − P_R|/P_R = {worst:.1e} (≤ 1e-9); UQN α at a/λ = 1e-3, P_R = 1: {alpha:.6} vs π/2, {:.2}% off (≤ 1%)",
            100.0 * off
        ),
    )
}

fn determinism(s: &Shared) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut same = true;
    let mut notes = Vec::new();
    for (name, first, run) in [
        (
            "uplink",
            &s.uplink_rows,
            run_uplink_sweep as fn(&SweepConfig) -> dense_mimo::Result<Vec<SweepRow>>,
        ),
        (
            "downlink",
            &s.downlink_rows,
            run_downlink_sweep as fn(&SweepConfig) -> dense_mimo::Result<Vec<SweepRow>>,
        ),
    ] {
        let a = to_csv_bytes(first).unwrap();
        let again = to_csv_bytes(&run(&s.cfg).unwrap()).unwrap();
        let parallel = to_csv_bytes(
            &run(&SweepConfig {
                workers: 4,
                ..s.cfg.clone()
            })
            .unwrap(),
        )
        .unwrap();
        let (pa, pb) = (
            dir.path().join(format!("{name}-a.csv")),
            dir.path().join(format!("{name}-b.csv")),
        );
        dense_mimo::harness::emit_csv(first, &pa).unwrap();
        std::fs::write(&pb, &again).unwrap();
        let files = std::fs::read(&pa).unwrap() == std::fs::read(&pb).unwrap();
        same &= a == again && a == parallel && files;
        notes.push(format!(
            "{name} {} bytes: rerun {}, 4 workers {}",
            a.len(),
            if a == again && files { "identical" } else { "DIFFERENT" },
            if a == parallel { "identical" } else { "DIFFERENT" }
        ));
    }
    verdict(same, notes.join("; "))
}

fn main() -> ExitCode {
    let shared_started = Instant::now();
    let shared = catch_unwind(Shared::new);
    let shared_time = shared_started.elapsed();

    type Criterion<'a> = (&'a str, Duration, Box<dyn Fn() -> Verdict + 'a>);
    let s = shared.as_ref().ok();
    let needs = |f: fn(&Shared) -> Verdict| -> Box<dyn Fn() -> Verdict + '_> {
        Box::new(move || match s {
            Some(s) => f(s),
            None => verdict(false, "default sweeps failed to run".into()),
        })
    };
    let criteria: Vec<Criterion> = vec![
        (
            "coupling matrix vs spherical-integral oracle",
            Duration::from_secs(120),
            Box::new(coupling_oracle),
        ),
        (
            "passivity and Parseval bound",
            Duration::from_secs(60),
            Box::new(passivity),
        ),
        ("impedance relation", Duration::from_secs(60), Box::new(impedance)),
        (
            "arcsine law and Bussgang gain vs Monte Carlo",
            Duration::from_secs(180),
            Box::new(arcsine_oracle),
        ),
        (
            "uplink asymptotic loss",
            Duration::from_secs(600),
            Box::new(uplink_loss),
        ),
        ("uplink trends", Duration::from_secs(900), needs(uplink_trends)),
        ("downlink trends", Duration::from_secs(900), needs(downlink_trends)),
        (
            "power-equalization contract",
            Duration::from_secs(600),
            needs(power_equalization),
        ),
        ("determinism", Duration::from_secs(600), needs(determinism)),
    ];

    println!(
        "acceptance: default sweeps computed in {:.1} s",
        shared_time.as_secs_f64()
    );
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| verdict(false, "panicked".into()));
        let elapsed = started.elapsed();
        let passed = v.passed && elapsed <= *budget;
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {name}: {} ({:.1} s of {} s)",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
