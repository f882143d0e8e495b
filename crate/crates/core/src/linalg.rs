//! Small dense linear-algebra helpers over [`CMatrix`].

use nalgebra::DVector;

use crate::{CMatrix, C64};

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors, column `i` belongs to `values[i]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        let eig = m.clone().symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `V f(Λ) Vᴴ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let w = f(self.values[j]);
            scaled.column_mut(j).scale_mut(w);
        }
        let mut out = &scaled * self.vectors.adjoint();
        symmetrize(&mut out);
        out
    }
}

/// Replace `m` by `(m + mᴴ)/2` in place.
pub fn symmetrize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// `(m + mᴴ)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    symmetrize(&mut out);
    out
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `Re tr(A B)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Cholesky factorization `A = L Lᴴ` of a Hermitian positive-definite matrix.
///
/// Only the lower triangle of the input is read. Factorization fails when a
/// pivot is not strictly positive, which is how singular or indefinite
/// covariances are detected.
#[derive(Debug, Clone)]
pub struct HermitianCholesky {
    n: usize,
    /// Column-major lower factor.
    l: Vec<C64>,
}

impl HermitianCholesky {
    pub fn new(a: &CMatrix) -> Option<Self> {
        assert!(a.is_square());
        let n = a.nrows();
        let mut l: Vec<C64> = a.as_slice().to_vec();
        for j in 0..n {
            // left-looking: column j -= Σ_{k<j} conj(L[j,k]) · column k
            let (done, rest) = l.split_at_mut(j * n);
            let col_j = &mut rest[..n];
            for k in 0..j {
                let col_k = &done[k * n..(k + 1) * n];
                let c = col_k[j].conj();
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for (dst, src) in col_j[j..].iter_mut().zip(&col_k[j..]) {
                    *dst -= c * src;
                }
            }
            let pivot = col_j[j].re;
            if pivot.is_nan() || pivot <= 0.0 || pivot.is_infinite() {
                return None;
            }
            let d = pivot.sqrt();
            col_j[j] = C64::new(d, 0.0);
            let inv = 1.0 / d;
            for v in &mut col_j[j + 1..] {
                *v *= inv;
            }
            for v in &mut col_j[..j] {
                *v = C64::new(0.0, 0.0);
            }
        }
        Some(Self { n, l })
    }

    fn at(&self, i: usize, j: usize) -> C64 {
        self.l[j * self.n + i]
    }

    /// Solve `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        assert_eq!(b.nrows(), self.n);
        let n = self.n;
        let mut x = b.clone();
        for c in 0..b.ncols() {
            let mut col: Vec<C64> = x.column(c).iter().copied().collect();
            // L y = b
            for j in 0..n {
                let yj = col[j] / self.at(j, j).re;
                col[j] = yj;
                let lcol = &self.l[j * n..(j + 1) * n];
                for i in (j + 1)..n {
                    col[i] -= lcol[i] * yj;
                }
            }
            // Lᴴ x = y
            for i in (0..n).rev() {
                let lcol = &self.l[i * n..(i + 1) * n];
                let mut acc = col[i];
                for k in (i + 1)..n {
                    acc -= lcol[k].conj() * col[k];
                }
                col[i] = acc / self.at(i, i).re;
            }
            for (dst, v) in x.column_mut(c).iter_mut().zip(col) {
                *dst = v;
            }
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let mut inv = self.solve(&CMatrix::identity(self.n, self.n));
        symmetrize(&mut inv);
        inv
    }
}

/// Cholesky factor of a Hermitian positive-definite matrix, `None` otherwise.
pub fn cholesky(m: &CMatrix) -> Option<HermitianCholesky> {
    HermitianCholesky::new(m)
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn hermitian_inverse(m: &CMatrix) -> Option<CMatrix> {
    Some(cholesky(m)?.inverse())
}

/// Real diagonal of a matrix.
pub fn real_diagonal(m: &CMatrix) -> Vec<f64> {
    m.diagonal().iter().map(|z| z.re).collect()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}
