//! User channels consistent with the coupling model.
//!
//! Under isotropic (rich) scattering the channel covariance equals the
//! coupling matrix, so a user channel can be drawn as `h = B^{1/2} s` with
//! `s ~ CN(0, I)`. Finite multipath channels are the explicit sum over paths.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::array::{element_effective_area, steering_vector, ArrayGeometry, CouplingMatrix, Direction};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Identifies an independent random substream: a base seed plus a stream
/// index. Distinct indices give non-overlapping ChaCha streams, which lets
/// realizations be generated in any order or in parallel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub seed: u64,
    pub stream: u64,
}

impl StreamId {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One draw of `CN(0, 1)`: real and imaginary parts each `N(0, 1/2)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// `rows × cols` matrix of IID `CN(0, 1)` entries, filled column by column.
pub fn complex_normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_normal(rng);
        }
    }
    m
}

/// `K` user channels for one realization.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// `M × K` channel matrix, column `k` is user `k`.
    pub h: CMatrix,
    /// `M × K` IID generator with `H = B^{1/2} S`.
    pub s: CMatrix,
    pub stream: StreamId,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.h.ncols()
    }

    pub fn elements(&self) -> usize {
        self.h.nrows()
    }

    /// Downlink (`K × M`) channel: the transpose of the uplink matrix,
    /// i.e. `Sᵀ B^{1/2}` for a real symmetric `B`.
    pub fn downlink(&self) -> CMatrix {
        self.h.transpose()
    }
}

/// Isotropic Rayleigh channels `H = B^{1/2} S`, deterministic in `stream`.
pub fn rayleigh_channels(b: &CouplingMatrix, users: usize, stream: StreamId) -> Result<ChannelSet> {
    if users == 0 {
        return Err(Error::InvalidParameter("at least one user is required".into()));
    }
    let mut rng = stream.rng();
    let s = complex_normal_matrix(&mut rng, b.dim(), users);
    let h = b.sqrt() * &s;
    Ok(ChannelSet { h, s, stream })
}

/// One far-field propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: C64,
    pub direction: Direction,
}

/// Superposition of `Q ≥ 1` paths.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathSpec {
    paths: Vec<PathComponent>,
}

impl MultipathSpec {
    pub fn new(paths: Vec<PathComponent>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidParameter(
                "multipath channel needs at least one path".into(),
            ));
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[PathComponent] {
        &self.paths
    }
}

/// `h = Σ_ℓ s'_ℓ (1/λ) √A_e(θ_ℓ, φ_ℓ) a(θ_ℓ, φ_ℓ)`, with `(1/λ)√A_e`
/// reduced to `(a/λ) √(A_e/a²)`.
pub fn multipath_channel(geom: &ArrayGeometry, spec: &MultipathSpec) -> CVector {
    let r = geom.spacing_over_lambda();
    let mut h = CVector::zeros(geom.elements());
    for path in &spec.paths {
        let amp = r * element_effective_area(geom.pattern(), path.direction).sqrt();
        h.axpy(
            path.gain * amp,
            &steering_vector(geom, path.direction),
            C64::new(1.0, 0.0),
        );
    }
    h
}
