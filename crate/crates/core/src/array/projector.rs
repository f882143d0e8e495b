use crate::linalg::{trace_product_re, trace_re};
use crate::{CMatrix, Error, Result};

use super::CouplingMatrix;

/// Below this `‖U‖_F²` the projector is treated as zero.
const ZERO_PROJECTOR: f64 = 1e-20;

/// Approximate null-space projector
/// `U = I − (1+δ) B^{1/2} (B + δI)⁻¹ B^{1/2}`.
///
/// Evaluated spectrally: an eigenvalue `μ` of `B` maps to
/// `1 − (1+δ) μ / (μ + δ)`, which is ≈ 1 for `μ ≪ δ`, exactly 0 for `μ = 1`
/// and lies in `(−δ/(1+δ)·…, 1]` in general.
pub fn null_space_projector(b: &CouplingMatrix, delta: f64) -> Result<CMatrix> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "null-space threshold δ must be positive, got {delta}"
        )));
    }
    Ok(b.spectral_map(|mu| 1.0 - (1.0 + delta) * mu / (mu + delta)))
}

/// Fraction of dither power that radiates, `tr(Uᴴ B U) / tr(Uᴴ U)`.
pub fn null_space_leakage(b: &CouplingMatrix, u: &CMatrix) -> Result<f64> {
    let uu = u * u.adjoint();
    let denom = trace_re(&uu);
    if denom <= ZERO_PROJECTOR {
        return Err(Error::NoNullSpace);
    }
    Ok(trace_product_re(b.entries(), &uu).max(0.0) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayGeometry;
    use crate::C64;

    #[test]
    fn identity_coupling_has_no_null_space() {
        let b = CouplingMatrix::new(CMatrix::identity(4, 4)).unwrap();
        let u = null_space_projector(&b, 0.01).unwrap();
        assert!(u.iter().all(|z| z.norm() < 1e-15));
        assert!(matches!(null_space_leakage(&b, &u), Err(Error::NoNullSpace)));
    }

    #[test]
    fn zero_coupling_is_all_null_space() {
        let b = CouplingMatrix::new(CMatrix::zeros(3, 3)).unwrap();
        let u = null_space_projector(&b, 0.01).unwrap();
        assert!((u - CMatrix::identity(3, 3)).norm() < 1e-15);
        let u = null_space_projector(&b, 0.01).unwrap();
        assert_eq!(null_space_leakage(&b, &u).unwrap(), 0.0);
    }

    #[test]
    fn rejects_nonpositive_delta() {
        let b = CouplingMatrix::new(CMatrix::zeros(2, 2)).unwrap();
        assert!(null_space_projector(&b, 0.0).is_err());
        assert!(null_space_projector(&b, -1.0).is_err());
    }

    #[test]
    fn projector_eigenvalue_map() {
        let g = ArrayGeometry::new(0.25, 4).unwrap();
        let b = CouplingMatrix::closed_form(&g).unwrap();
        let delta = 0.01;
        let u = null_space_projector(&b, delta).unwrap();
        // U commutes with B and shares its eigenvectors
        let v = b.eigenvectors();
        let d = v.adjoint() * &u * v;
        for (i, &mu) in b.eigenvalues().iter().enumerate() {
            let mu = mu.max(0.0);
            let want = 1.0 - (1.0 + delta) * mu / (mu + delta);
            assert!((d[(i, i)] - C64::new(want, 0.0)).norm() < 1e-12);
            assert!(want > -1.0 && want <= 1.0);
        }
    }

    #[test]
    fn dense_array_leakage_is_small() {
        let g = ArrayGeometry::new(0.125, 20).unwrap();
        let b = CouplingMatrix::closed_form(&g).unwrap();
        let u = null_space_projector(&b, 0.01).unwrap();
        let leak = null_space_leakage(&b, &u).unwrap();
        assert!(leak < 0.02, "{leak}");
    }
}
