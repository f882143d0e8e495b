//! Square planar array geometry, element patterns and the coupling matrix.
//!
//! Elements sit on a `side × side` grid with spacing `a`. Element `(k, ℓ)`
//! (`k` along the `cos φ` axis, `ℓ` along the `sin φ` axis, both zero-based)
//! has linear index `k + side·ℓ`. With this convention the steering vector is
//! the Kronecker product `a_sin ⊗ a_cos` and the closed-form coupling entries
//! are indexed consistently.

mod coupling;
mod projector;

pub use coupling::{closed_form_entries, integral_oracle_entries, CouplingMatrix, QuadratureGrid, ThetaRule, TOL_EIG};
pub use projector::{null_space_leakage, null_space_projector};

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::quadrature::Rule;
use crate::{CVector, Error, Result, C64};

/// Embedded element pattern. Only the cosine pattern `A_e = a² cos θ` is
/// physically admissible among the simple closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElementPattern {
    #[default]
    Cosine,
}

impl FromStr for ElementPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cosine" | "cos" => Ok(Self::Cosine),
            other => Err(Error::UnsupportedPattern(other.to_string())),
        }
    }
}

impl fmt::Display for ElementPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cosine => f.write_str("cosine"),
        }
    }
}

/// Square planar array. The element count is always `side²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    spacing_over_lambda: f64,
    side: usize,
    pattern: ElementPattern,
}

impl ArrayGeometry {
    pub fn new(spacing_over_lambda: f64, side: usize) -> Result<Self> {
        if !(spacing_over_lambda.is_finite() && spacing_over_lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "element spacing a/λ must be positive, got {spacing_over_lambda}"
            )));
        }
        if side == 0 {
            return Err(Error::InvalidParameter("array side must be at least 1".into()));
        }
        Ok(Self {
            spacing_over_lambda,
            side,
            pattern: ElementPattern::Cosine,
        })
    }

    /// Geometry with `elements` antennas filling a square aperture of side
    /// `aperture_lambda` wavelengths, i.e. `a/λ = aperture / √M`.
    pub fn fixed_aperture(aperture_lambda: f64, elements: usize) -> Result<Self> {
        let side = perfect_square_root(elements)
            .ok_or_else(|| Error::InvalidParameter(format!("element count {elements} is not a perfect square")))?;
        Self::new(aperture_lambda / side as f64, side)
    }

    pub fn with_pattern(mut self, pattern: ElementPattern) -> Self {
        self.pattern = pattern;
        self
    }

    pub fn spacing_over_lambda(&self) -> f64 {
        self.spacing_over_lambda
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn elements(&self) -> usize {
        self.side * self.side
    }

    pub fn pattern(&self) -> ElementPattern {
        self.pattern
    }

    /// Grid position `(k, ℓ)` of a linear element index.
    pub fn position(&self, index: usize) -> (usize, usize) {
        (index % self.side, index / self.side)
    }
}

pub(crate) fn perfect_square_root(n: usize) -> Option<usize> {
    if n == 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Far-field direction: elevation `theta ∈ [0, π/2]` from broadside and
/// azimuth `phi ∈ [−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        // a couple of ulps of slack so that π/2 and ±π computed in floating point pass
        let slack = 4.0 * f64::EPSILON;
        if !(theta >= -slack && theta <= FRAC_PI_2 + slack) {
            return Err(Error::InvalidParameter(format!("elevation {theta} outside [0, π/2]")));
        }
        if !(phi >= -PI - slack && phi <= PI + slack) {
            return Err(Error::InvalidParameter(format!("azimuth {phi} outside [−π, π]")));
        }
        Ok(Self { theta, phi })
    }

    pub fn broadside() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Array response `a(θ, φ)`: the Kronecker product of the `sin φ` and
/// `cos φ` linear-array phase progressions. Every entry has unit modulus.
pub fn steering_vector(geom: &ArrayGeometry, dir: Direction) -> CVector {
    let side = geom.side();
    let base = -2.0 * PI * geom.spacing_over_lambda() * dir.theta.sin();
    let (sin_phi, cos_phi) = dir.phi.sin_cos();
    let along_y: Vec<C64> = (0..side)
        .map(|n| C64::from_polar(1.0, base * n as f64 * sin_phi))
        .collect();
    let along_x: Vec<C64> = (0..side)
        .map(|n| C64::from_polar(1.0, base * n as f64 * cos_phi))
        .collect();
    CVector::from_iterator(
        side * side,
        along_y.iter().flat_map(|&y| along_x.iter().map(move |&x| y * x)),
    )
}

/// Element effective area `A_e(θ, φ)` in units of `a²`.
pub fn element_effective_area(pattern: ElementPattern, dir: Direction) -> f64 {
    match pattern {
        ElementPattern::Cosine => dir.theta.cos().max(0.0),
    }
}

/// `γ = ∫∫ A_e/a² sin θ dφ dθ` over the upper hemisphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternConstant {
    pub gamma: f64,
}

pub fn gamma_constant(pattern: ElementPattern) -> PatternConstant {
    match pattern {
        ElementPattern::Cosine => PatternConstant { gamma: PI },
    }
}

/// `γ` by quadrature on the hemisphere; cross-check for [`gamma_constant`].
pub fn gamma_by_quadrature(pattern: ElementPattern, grid: &QuadratureGrid) -> f64 {
    let thetas = grid.theta_rule();
    let phis = Rule::midpoint(grid.phi, -PI, PI);
    let mut total = 0.0;
    for (&t, &wt) in thetas.nodes.iter().zip(&thetas.weights) {
        for (&p, &wp) in phis.nodes.iter().zip(&phis.weights) {
            let dir = Direction { theta: t, phi: p };
            total += wt * wp * element_effective_area(pattern, dir) * t.sin();
        }
    }
    total
}
