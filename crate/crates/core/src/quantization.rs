//! One-bit quantization of complex Gaussian vectors.
//!
//! Each element is quantized to `√(D_i/2)(sign Re + j sign Im)`, where `D`
//! holds the input variances, so the output power of every element equals its
//! input power. For zero-mean Gaussian inputs the output covariance follows
//! the arcsine law and the Bussgang decomposition splits the output into
//! `√(2/π)` times the input plus distortion uncorrelated with the input.

use std::f64::consts::{FRAC_2_PI, PI};

use rand::Rng;

use crate::channel::complex_normal;
use crate::linalg::{real_diagonal, HermitianEigen};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Correlations exceeding one by at most this much are clamped to `±1`.
pub const CLAMP_TOL: f64 = 1e-12;

/// Linear Bussgang gain of the rescaled sign quantizer, `√(2/π)`.
pub fn bussgang_gain() -> f64 {
    FRAC_2_PI.sqrt()
}

/// `sign` with `sign(0) = +1`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Rescaled quantizer output; `|y_i|² = D_i` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerOutput(pub CVector);

impl QuantizerOutput {
    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }
}

/// Element-wise `√(D_i/2) (sign Re x_i + j sign Im x_i)`.
pub fn one_bit_quantize(x: &CVector, d: &[f64]) -> Result<QuantizerOutput> {
    check_scaling(d, x.len())?;
    let scale: Vec<f64> = d.iter().map(|&di| (0.5 * di).sqrt()).collect();
    Ok(QuantizerOutput(quantize_with_scale(x, &scale)))
}

fn quantize_with_scale(x: &CVector, scale: &[f64]) -> CVector {
    CVector::from_iterator(
        x.len(),
        x.iter()
            .zip(scale)
            .map(|(z, &s)| C64::new(s * sign(z.re), s * sign(z.im))),
    )
}

fn check_scaling(d: &[f64], n: usize) -> Result<()> {
    if d.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "scaling diagonal has {} entries, expected {n}",
            d.len()
        )));
    }
    if let Some(bad) = d.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "quantizer scaling D[{bad}] = {} must be positive",
            d[bad]
        )));
    }
    Ok(())
}

fn clamped_arcsin(v: f64, row: usize, col: usize) -> Result<f64> {
    if v.is_nan() || v.abs() > 1.0 + CLAMP_TOL {
        return Err(Error::InvalidCovariance { row, col, value: v });
    }
    Ok(v.clamp(-1.0, 1.0).asin())
}

/// Arcsine law:
/// `C_out = (2/π) D^{1/2} [asin(D^{-1/2} Re C D^{-1/2}) + j asin(D^{-1/2} Im C D^{-1/2})] D^{1/2}`.
///
/// Real and imaginary correlations are mapped separately; no circular
/// symmetry is assumed.
pub fn arcsine_covariance(c_in: &CMatrix, d: &[f64]) -> Result<CMatrix> {
    if !c_in.is_square() {
        return Err(Error::DimensionMismatch("covariance must be square".into()));
    }
    let n = c_in.nrows();
    check_scaling(d, n)?;
    let root: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = C64::new(d[i], 0.0);
        for j in (i + 1)..n {
            let norm = root[i] * root[j];
            let c = c_in[(i, j)] / norm;
            let re = clamped_arcsin(c.re, i, j)?;
            let im = clamped_arcsin(c.im, i, j)?;
            let v = C64::new(re, im) * (FRAC_2_PI * norm);
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    Ok(out)
}

/// Bussgang decomposition of the quantizer output covariance.
#[derive(Debug, Clone)]
pub struct BussgangSplit {
    /// `(2/π) C_in`
    pub signal: CMatrix,
    /// `C_out − (2/π) C_in`, diagonal `(1 − 2/π) D`.
    pub distortion: CMatrix,
}

pub fn bussgang_split(c_in: &CMatrix, d: &[f64]) -> Result<BussgangSplit> {
    let out = arcsine_covariance(c_in, d)?;
    let signal = c_in * C64::new(FRAC_2_PI, 0.0);
    let mut distortion = out - &signal;
    // diagonal is (1 − 2/π) D by construction; pin it exactly
    for (i, &di) in d.iter().enumerate() {
        distortion[(i, i)] = C64::new((1.0 - FRAC_2_PI) * di, 0.0);
    }
    Ok(BussgangSplit { signal, distortion })
}

/// Uncorrelated-quantization-noise approximation of the distortion:
/// `(1 − 2/π) D` on the diagonal only.
pub fn uqn_distortion(d: &[f64]) -> CMatrix {
    let n = d.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new((1.0 - FRAC_2_PI) * d[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `‖R_exact − R_uqn‖_F / ‖R_exact‖_F`: how much distortion correlation the
/// UQN approximation discards. Zero for diagonal `C_in`.
pub fn uqn_frobenius_gap(c_in: &CMatrix, d: &[f64]) -> Result<f64> {
    let exact = bussgang_split(c_in, d)?.distortion;
    Ok((&exact - uqn_distortion(d)).norm() / exact.norm())
}

/// Second-order statistics of a 1-bit quantized Gaussian link.
#[derive(Debug, Clone)]
pub struct QuantizedLinkStats {
    pub c_in: CMatrix,
    pub d: Vec<f64>,
    pub c_out: CMatrix,
    /// `E[y_Q yᴴ] = √(2/π) C_in`
    pub c_cross: CMatrix,
    pub bussgang_gain: f64,
}

impl QuantizedLinkStats {
    pub fn new(c_in: &CMatrix) -> Result<Self> {
        let d = real_diagonal(c_in);
        let c_out = arcsine_covariance(c_in, &d)?;
        let gain = bussgang_gain();
        Ok(Self {
            c_in: c_in.clone(),
            c_cross: c_in * C64::new(gain, 0.0),
            d,
            c_out,
            bussgang_gain: gain,
        })
    }

    pub fn distortion(&self) -> CMatrix {
        &self.c_out - &self.c_in * C64::new(FRAC_2_PI, 0.0)
    }
}

/// Monte Carlo estimate of quantizer statistics, used as an oracle for the
/// arcsine law and the Bussgang gain.
#[derive(Debug, Clone)]
pub struct MonteCarloQuantizer {
    pub draws: usize,
    /// Sample `E[y_Q y_Qᴴ]`.
    pub out_cov: CMatrix,
    /// Sample `E[y_Q yᴴ]`.
    pub cross_cov: CMatrix,
    /// Standard errors of the real/imaginary parts of `out_cov`.
    pub out_stderr: (nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>),
    /// Standard errors of the real/imaginary parts of `cross_cov`.
    pub cross_stderr: (nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>),
}

impl MonteCarloQuantizer {
    /// Draw `draws` samples of `y ~ CN(0, C)`, quantize with `D = Diag(C)`
    /// and accumulate first and second moments of the products.
    pub fn run<R: Rng + ?Sized>(c: &CMatrix, draws: usize, rng: &mut R) -> Result<Self> {
        let n = c.nrows();
        let d = real_diagonal(c);
        check_scaling(&d, n)?;
        if draws < 2 {
            return Err(Error::InvalidParameter("need at least two Monte Carlo draws".into()));
        }
        let root = HermitianEigen::new(c).map(|mu| mu.max(0.0).sqrt());
        let scale: Vec<f64> = d.iter().map(|&v| (0.5 * v).sqrt()).collect();
        let mut acc = Moments::new(n);
        let mut w = CVector::zeros(n);
        for _ in 0..draws {
            for wi in w.iter_mut() {
                *wi = complex_normal(rng);
            }
            let y = &root * &w;
            let q = quantize_with_scale(&y, &scale);
            acc.push(&q, &y);
        }
        Ok(acc.finish(draws))
    }

    /// Largest `|estimate − reference| / stderr` over entries and real and
    /// imaginary parts of `out_cov`. Entries with zero standard error (the
    /// diagonal, where `|y_i|² = D_i` on every draw) must agree to summation
    /// round-off and otherwise count as infinite.
    pub fn out_z_score(&self, reference: &CMatrix) -> f64 {
        max_z(&self.out_cov, reference, &self.out_stderr)
    }

    pub fn cross_z_score(&self, reference: &CMatrix) -> f64 {
        max_z(&self.cross_cov, reference, &self.cross_stderr)
    }

    /// `|z|` of the real and imaginary parts of every distinct `out_cov`
    /// entry (upper triangle including the diagonal).
    pub fn out_z_scores(&self, reference: &CMatrix) -> Vec<f64> {
        z_scores(&self.out_cov, reference, &self.out_stderr, true, false)
    }

    /// `|z|` of the real and imaginary parts of every `cross_cov` entry.
    pub fn cross_z_scores(&self, reference: &CMatrix) -> Vec<f64> {
        z_scores(&self.cross_cov, reference, &self.cross_stderr, false, false)
    }

    /// `|Ĉ − C| / √(se_re² + se_im²)` for every distinct `out_cov` entry, the
    /// complex standard error being the root mean squared error of the entry.
    pub fn out_complex_z_scores(&self, reference: &CMatrix) -> Vec<f64> {
        z_scores(&self.out_cov, reference, &self.out_stderr, true, true)
    }

    pub fn cross_complex_z_scores(&self, reference: &CMatrix) -> Vec<f64> {
        z_scores(&self.cross_cov, reference, &self.cross_stderr, false, true)
    }
}

fn max_z(est: &CMatrix, reference: &CMatrix, stderr: &(nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>)) -> f64 {
    z_scores(est, reference, stderr, false, false)
        .into_iter()
        .fold(0.0, f64::max)
}

fn z_scores(
    est: &CMatrix,
    reference: &CMatrix,
    stderr: &(nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>),
    upper_only: bool,
    complex: bool,
) -> Vec<f64> {
    let z = |delta: f64, se: f64, reference: C64| {
        if se > 0.0 {
            delta / se
        } else if delta <= 1e-9 * reference.norm().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let mut out = Vec::new();
    for i in 0..est.nrows() {
        for j in 0..est.ncols() {
            if upper_only && j < i {
                continue;
            }
            let r = reference[(i, j)];
            let diff = est[(i, j)] - r;
            let (se_re, se_im) = (stderr.0[(i, j)], stderr.1[(i, j)]);
            if complex {
                out.push(z(diff.norm(), se_re.hypot(se_im), r));
            } else {
                out.push(z(diff.re.abs(), se_re, r));
                out.push(z(diff.im.abs(), se_im, r));
            }
        }
    }
    out
}

struct Moments {
    n: usize,
    out_sum: CMatrix,
    cross_sum: CMatrix,
    out_sq: (Vec<f64>, Vec<f64>),
    cross_sq: (Vec<f64>, Vec<f64>),
}

impl Moments {
    fn new(n: usize) -> Self {
        Self {
            n,
            out_sum: CMatrix::zeros(n, n),
            cross_sum: CMatrix::zeros(n, n),
            out_sq: (vec![0.0; n * n], vec![0.0; n * n]),
            cross_sq: (vec![0.0; n * n], vec![0.0; n * n]),
        }
    }

    fn push(&mut self, q: &CVector, y: &CVector) {
        let n = self.n;
        for j in 0..n {
            let qj = q[j].conj();
            let yj = y[j].conj();
            for i in 0..n {
                let o = q[i] * qj;
                let c = q[i] * yj;
                self.out_sum[(i, j)] += o;
                self.cross_sum[(i, j)] += c;
                let k = j * n + i;
                self.out_sq.0[k] += o.re * o.re;
                self.out_sq.1[k] += o.im * o.im;
                self.cross_sq.0[k] += c.re * c.re;
                self.cross_sq.1[k] += c.im * c.im;
            }
        }
    }

    fn finish(self, draws: usize) -> MonteCarloQuantizer {
        let n = self.n;
        let t = draws as f64;
        let out_cov = self.out_sum / C64::new(t, 0.0);
        let cross_cov = self.cross_sum / C64::new(t, 0.0);
        let se = |sq: &[f64], mean: &CMatrix, imag: bool| {
            nalgebra::DMatrix::from_fn(n, n, |i, j| {
                let m = if imag { mean[(i, j)].im } else { mean[(i, j)].re };
                let var = (sq[j * n + i] / t - m * m).max(0.0) * t / (t - 1.0);
                (var / t).sqrt()
            })
        };
        MonteCarloQuantizer {
            draws,
            out_stderr: (se(&self.out_sq.0, &out_cov, false), se(&self.out_sq.1, &out_cov, true)),
            cross_stderr: (
                se(&self.cross_sq.0, &cross_cov, false),
                se(&self.cross_sq.1, &cross_cov, true),
            ),
            out_cov,
            cross_cov,
        }
    }
}

/// Distortion power fraction `1 − 2/π` of the rescaled sign quantizer.
pub fn distortion_fraction() -> f64 {
    1.0 - 2.0 / PI
}
