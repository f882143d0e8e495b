use std::f64::consts::{FRAC_PI_2, PI};

use crate::bessel::j1;
use crate::linalg::{self, HermitianEigen};
use crate::quadrature::Rule;
use crate::{CMatrix, CVector, Error, Result, C64};

use super::{element_effective_area, steering_vector, ArrayGeometry, Direction, ElementPattern};

/// Eigenvalue tolerance for the passivity (`B ⪯ I`) and PSD checks.
pub const TOL_EIG: f64 = 1e-9;

/// Quadrature rule along the elevation axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaRule {
    #[default]
    GaussLegendre,
    Midpoint,
}

/// Tensor grid over `θ ∈ [0, π/2] × φ ∈ [−π, π]`. The azimuth integrand is
/// periodic, so it always uses the rectangle (midpoint) rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureGrid {
    pub theta: usize,
    pub phi: usize,
    pub theta_rule: ThetaRule,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            theta: 512,
            phi: 1024,
            theta_rule: ThetaRule::GaussLegendre,
        }
    }
}

impl QuadratureGrid {
    pub fn new(theta: usize, phi: usize) -> Self {
        Self {
            theta,
            phi,
            theta_rule: ThetaRule::GaussLegendre,
        }
    }

    pub(crate) fn theta_rule(&self) -> Rule {
        match self.theta_rule {
            ThetaRule::GaussLegendre => Rule::gauss_legendre(self.theta, 0.0, FRAC_PI_2),
            ThetaRule::Midpoint => Rule::midpoint(self.theta, 0.0, FRAC_PI_2),
        }
    }
}

/// The coupling matrix `B`: normalized extrinsic-noise covariance, isotropic
/// channel covariance and radiated-power kernel of the array.
///
/// Construction validates `0 ⪯ B ⪯ I` within [`TOL_EIG`] and caches the
/// eigendecomposition together with the PSD square root, so values are
/// immutable and cheap to share.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    entries: CMatrix,
    eigen: HermitianEigen,
    sqrt: CMatrix,
}

impl CouplingMatrix {
    /// Validate and wrap a Hermitian matrix.
    pub fn new(mut entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "coupling matrix must be square and non-empty, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if linalg::hermitian_defect(&entries) > 1e-10 * scale {
            let eig = HermitianEigen::new(&linalg::hermitian_part(&entries));
            return Err(Error::ModelInconsistency {
                reason: "not Hermitian",
                min_eigenvalue: eig.min(),
                max_eigenvalue: eig.max(),
            });
        }
        linalg::symmetrize(&mut entries);
        let eigen = HermitianEigen::new(&entries);
        let (lo, hi) = (eigen.min(), eigen.max());
        if hi > 1.0 + TOL_EIG {
            return Err(Error::ModelInconsistency {
                reason: "passivity B ⪯ I violated",
                min_eigenvalue: lo,
                max_eigenvalue: hi,
            });
        }
        if lo < -TOL_EIG {
            return Err(Error::ModelInconsistency {
                reason: "not positive semidefinite",
                min_eigenvalue: lo,
                max_eigenvalue: hi,
            });
        }
        let sqrt = eigen.map(|mu| mu.max(0.0).sqrt());
        Ok(Self { entries, eigen, sqrt })
    }

    /// Closed-form coupling matrix of the cosine pattern:
    /// `π(a/λ)²` on the diagonal, `(a/λ) J₁(2π(a/λ)d)/d` at grid distance `d`.
    pub fn closed_form(geom: &ArrayGeometry) -> Result<Self> {
        Self::new(closed_form_entries(geom)?)
    }

    /// Spherical-integral oracle:
    /// `B = ∫∫ (a/λ)² cos θ · a(θ,φ) a(θ,φ)ᴴ sin θ dφ dθ`.
    pub fn integral_oracle(geom: &ArrayGeometry, grid: &QuadratureGrid) -> Result<Self> {
        Self::new(integral_oracle_entries(geom, grid))
    }

    /// Coupling matrix of an `M`-port antenna network with impedance matrix
    /// `Z` loaded by resistors `R0`:
    /// `(R0 I + Z)⁻¹ · 4 R0 Re{Z} · (R0 I + Z)⁻ᴴ`.
    ///
    /// `Re{Z}` is the Hermitian part `(Z + Zᴴ)/2`, which coincides with the
    /// entrywise real part for reciprocal (symmetric) networks. For a passive
    /// `Z` every eigenvalue of `R0 I + Z` has real part at least `R0`, so the
    /// singular-network error only fires on numerically broken input.
    pub fn from_impedance(z: &CMatrix, r0: f64) -> Result<Self> {
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "load resistance must be positive, got {r0}"
            )));
        }
        if !z.is_square() {
            return Err(Error::DimensionMismatch("impedance matrix must be square".into()));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "impedance matrix has non-finite entries".into(),
            ));
        }
        let m = z.nrows();
        let resistive = linalg::hermitian_part(z);
        let r_eig = HermitianEigen::new(&resistive);
        let scale = resistive.iter().map(|v| v.norm()).fold(f64::MIN_POSITIVE, f64::max);
        if r_eig.min() < -1e-12 * scale {
            return Err(Error::NonPassiveImpedance {
                min_eigenvalue: r_eig.min(),
            });
        }
        let loaded = z + CMatrix::identity(m, m) * C64::new(r0, 0.0);
        let inv = loaded.try_inverse().ok_or(Error::SingularNetwork)?;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularNetwork);
        }
        let entries = &inv * (resistive * C64::new(4.0 * r0, 0.0)) * inv.adjoint();
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &nalgebra::DVector<f64> {
        &self.eigen.values
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigen.vectors
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen.max()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen.min()
    }

    /// `B^{1/2}` with eigenvalues clamped at zero.
    pub fn sqrt(&self) -> &CMatrix {
        &self.sqrt
    }

    /// `V f(μ) Vᴴ` over the (clamped) eigenvalues.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        self.eigen.map(|mu| f(mu.max(0.0)))
    }

    /// Radiated power `fᵀ B f*` of a deterministic excitation `f`.
    pub fn quadratic_form(&self, f: &CVector) -> f64 {
        let conj = f.map(|z| z.conj());
        (f.transpose() * &self.entries * conj)[(0, 0)].re
    }

    /// Number of eigenvalues above `rel · max eigenvalue`.
    pub fn effective_rank(&self, rel: f64) -> usize {
        let cut = rel * self.max_eigenvalue();
        self.eigen.values.iter().filter(|&&mu| mu > cut).count()
    }
}

/// Closed-form entries without the passivity validation, for callers that
/// need the raw matrix (fault injection, scaling studies).
pub fn closed_form_entries(geom: &ArrayGeometry) -> Result<CMatrix> {
    match geom.pattern() {
        ElementPattern::Cosine => {}
    }
    let m = geom.elements();
    let r = geom.spacing_over_lambda();
    let diag = PI * r * r;
    let mut entries = CMatrix::zeros(m, m);
    for i in 0..m {
        let (k, l) = geom.position(i);
        entries[(i, i)] = C64::new(diag, 0.0);
        for j in (i + 1)..m {
            let (mm, n) = geom.position(j);
            let dx = k as f64 - mm as f64;
            let dy = l as f64 - n as f64;
            let d = dx.hypot(dy);
            let v = C64::new(r * j1(2.0 * PI * r * d) / d, 0.0);
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(entries)
}

/// Raw quadrature of the coupling integral. Coarse grids can overshoot
/// `B ⪯ I` slightly, so no validation happens here.
pub fn integral_oracle_entries(geom: &ArrayGeometry, grid: &QuadratureGrid) -> CMatrix {
    let m = geom.elements();
    let scale = geom.spacing_over_lambda().powi(2);
    let thetas = grid.theta_rule();
    let phis = Rule::midpoint(grid.phi, -PI, PI);
    let mut acc = vec![C64::new(0.0, 0.0); m * (m + 1) / 2];
    for (&t, &wt) in thetas.nodes.iter().zip(&thetas.weights) {
        for (&p, &wp) in phis.nodes.iter().zip(&phis.weights) {
            let dir = Direction { theta: t, phi: p };
            let w = wt * wp * scale * element_effective_area(geom.pattern(), dir) * t.sin();
            let a = steering_vector(geom, dir);
            let mut slot = 0;
            for i in 0..m {
                let ai = a[i] * w;
                for j in i..m {
                    acc[slot] += ai * a[j].conj();
                    slot += 1;
                }
            }
        }
    }
    let mut entries = CMatrix::zeros(m, m);
    let mut slot = 0;
    for i in 0..m {
        for j in i..m {
            entries[(i, j)] = acc[slot];
            entries[(j, i)] = acc[slot].conj();
            slot += 1;
        }
    }
    entries
}
