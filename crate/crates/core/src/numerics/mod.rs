//! Dense complex linear algebra sized for small receive arrays and a few
//! hundred RIS elements, plus the diagonal-constrained semidefinite solver
//! used by the phase-shift update.

mod sdp;

pub use sdp::{
    sdp_solve_diag1, sdp_solve_diag1_warm, SdpNonConvergence, SdpSettings, SdpSolution,
};

use crate::{CMatrix, CVector, Scalar};
use nalgebra::DVector;
use num_complex::Complex;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("singular covariance: matrix is not positive definite")]
    SingularCovariance,
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds 1e-12 relative)")]
    NotHermitian { asymmetry: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// Hermitian matrix wrapper. Construction enforces `A = A^H` to 1e-12
/// relative accuracy; the symmetrizing constructor is for matrices that are
/// Hermitian by algebra and only carry floating-point noise.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Scalar> {
    m: CMatrix<T>,
}

impl<T: Scalar> HermitianMatrix<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self, NumericsError> {
        if m.nrows() != m.ncols() {
            return Err(NumericsError::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        let scale = m.norm().max(T::one());
        let asymmetry = (&m - m.adjoint()).norm() / scale;
        if asymmetry > T::lit(1e-12) {
            return Err(NumericsError::NotHermitian {
                asymmetry: asymmetry.to_f64(),
            });
        }
        Ok(Self::from_symmetrized(m))
    }

    /// Builds from `(M + M^H) / 2`, discarding floating-point asymmetry.
    pub fn from_symmetrized(m: CMatrix<T>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "Hermitian matrix must be square");
        let sym = (&m + m.adjoint()).scale(T::lit(0.5));
        Self { m: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    /// Eigenvalues ascending with matching eigenvector columns.
    pub fn eigen(&self) -> (DVector<T>, CMatrix<T>) {
        T::hermitian_eigen(&self.m)
    }
}

/// Solves `A x = b` for positive-definite Hermitian `A` via Cholesky.
pub fn hermitian_solve<T: Scalar>(
    a: &HermitianMatrix<T>,
    b: &CVector<T>,
) -> Result<CVector<T>, NumericsError> {
    if b.len() != a.dim() {
        return Err(NumericsError::DimensionMismatch {
            expected: a.dim(),
            actual: b.len(),
        });
    }
    let chol = a
        .m
        .clone()
        .cholesky()
        .ok_or(NumericsError::SingularCovariance)?;
    // nalgebra accepts some indefinite inputs, taking complex square roots of
    // negative pivots; a valid factor has real, strictly positive pivots.
    let l = chol.l_dirty();
    for j in 0..a.dim() {
        let pivot = l[(j, j)];
        let ok = pivot.re.is_finite()
            && pivot.re > T::zero()
            && pivot.im.abs() <= T::lit(1e-10) * (T::one() + pivot.re);
        if !ok {
            return Err(NumericsError::SingularCovariance);
        }
    }
    Ok(chol.solve(b))
}

/// Largest eigenvalue and a unit-norm eigenvector (defined up to a global
/// phase).
pub fn top_eigenpair<T: Scalar>(a: &HermitianMatrix<T>) -> (T, CVector<T>) {
    let (vals, vecs) = a.eigen();
    let last = a.dim() - 1;
    (vals[last], vecs.column(last).into_owned())
}

/// Clips negative eigenvalues to zero inside an eigendecomposition of `w`;
/// reconstruction runs on whichever side of the spectrum is smaller.
pub(crate) fn psd_project_raw<T: Scalar>(w: &CMatrix<T>) -> CMatrix<T> {
    let n = w.nrows();
    let (vals, vecs) = T::hermitian_eigen(w);
    let neg: Vec<usize> = (0..n).filter(|&i| vals[i] < T::zero()).collect();
    if neg.is_empty() {
        return w.clone();
    }
    let pos: Vec<usize> = (0..n).filter(|&i| vals[i] > T::zero()).collect();
    let projected = if neg.len() <= pos.len() {
        let mut sub = CMatrix::<T>::zeros(n, neg.len());
        for (k, &i) in neg.iter().enumerate() {
            sub.set_column(k, &vecs.column(i).scale(vals[i]));
        }
        let basis = CMatrix::<T>::from_fn(n, neg.len(), |r, k| vecs[(r, neg[k])]);
        w - sub * basis.adjoint()
    } else {
        let mut sub = CMatrix::<T>::zeros(n, pos.len());
        for (k, &i) in pos.iter().enumerate() {
            sub.set_column(k, &vecs.column(i).scale(vals[i]));
        }
        let basis = CMatrix::<T>::from_fn(n, pos.len(), |r, k| vecs[(r, pos[k])]);
        sub * basis.adjoint()
    };
    (&projected + projected.adjoint()).scale(T::lit(0.5))
}

/// Nearest (Frobenius) positive-semidefinite matrix.
pub fn psd_projection<T: Scalar>(a: &HermitianMatrix<T>) -> HermitianMatrix<T> {
    HermitianMatrix {
        m: psd_project_raw(&a.m),
    }
}

/// Square-root factor of a PSD covariance, reusable across draws.
pub struct GaussianFactor<T: Scalar> {
    factor: Option<CMatrix<T>>,
    dim: usize,
}

impl<T: Scalar> GaussianFactor<T> {
    /// Factors `covariance = F F^H` through its eigendecomposition; tiny
    /// negative eigenvalues from roundoff are clipped.
    pub fn new(covariance: &HermitianMatrix<T>) -> Self {
        let dim = covariance.dim();
        if covariance.m.norm() == T::zero() {
            return Self { factor: None, dim };
        }
        let (vals, vecs) = covariance.eigen();
        let mut factor = vecs;
        for k in 0..dim {
            let s = vals[k].max(T::zero()).sqrt();
            factor.column_mut(k).scale_mut(s);
        }
        Self {
            factor: Some(factor),
            dim,
        }
    }

    /// Circularly-symmetric draw `mean + F g`, `g ~ CN(0, I)`.
    pub fn sample<R: Rng + ?Sized>(&self, mean: &CVector<T>, rng: &mut R) -> CVector<T> {
        assert_eq!(mean.len(), self.dim, "mean length must match covariance");
        match &self.factor {
            None => mean.clone(),
            Some(f) => {
                let half = T::lit(0.5).sqrt();
                let g = CVector::<T>::from_fn(self.dim, |_, _| {
                    Complex::new(
                        T::standard_normal(rng) * half,
                        T::standard_normal(rng) * half,
                    )
                });
                mean + f * g
            }
        }
    }
}

/// One circularly-symmetric complex Gaussian draw with the given mean and PSD
/// covariance. Zero covariance returns the mean exactly without consuming
/// randomness.
pub fn sample_complex_gaussian<T: Scalar, R: Rng + ?Sized>(
    mean: &CVector<T>,
    covariance: &HermitianMatrix<T>,
    rng: &mut R,
) -> CVector<T> {
    GaussianFactor::new(covariance).sample(mean, rng)
}
