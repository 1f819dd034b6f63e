//! Scalar abstraction: the whole engine is generic over the real scalar type.
//!
//! [`Scalar`] extends `nalgebra`'s `RealField` (which supplies the
//! transcendental functions on both `T` and `Complex<T>`) with the handful of
//! operations that need a concrete type underneath: literal conversion,
//! distribution sampling and the dense Hermitian eigendecomposition, which is
//! routed through `faer` for speed.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, NumAssignOps};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal, Uniform};
use std::sync::Once;

/// Dense complex matrix over a [`Scalar`].
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex vector over a [`Scalar`].
pub type CVector<T> = DVector<Complex<T>>;

/// `r e^{jθ}` without the `num_traits::Float` bound.
#[inline]
pub fn cpolar<T: Scalar>(radius: T, angle: T) -> Complex<T> {
    Complex::new(radius * angle.cos(), radius * angle.sin())
}

/// Real scaling of a complex value without the `num_traits::Float` bound.
#[inline]
pub fn cscale<T: Scalar>(z: Complex<T>, s: T) -> Complex<T> {
    Complex::new(z.re * s, z.im * s)
}

/// Real scalar type the engine is generic over. Implemented for `f32` and
/// `f64`; all shipped tolerances assume `f64`.
pub trait Scalar: RealField + FromPrimitive + NumAssignOps + Copy + Default {
    /// Infallible literal conversion; panics only if the literal is not
    /// representable, which never happens for the constants used here.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("representable literal")
    }

    fn to_f64(self) -> f64;

    /// One standard normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform draw on `[low, high)`; returns `low` when the interval is
    /// empty.
    fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, low: Self, high: Self) -> Self;

    /// One Poisson draw; `mean <= 0` yields 0.
    fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: Self) -> u64;

    /// Full eigendecomposition of a Hermitian matrix. Returns eigenvalues in
    /// ascending order with matching eigenvector columns (unit norm).
    fn hermitian_eigen(matrix: &CMatrix<Self>) -> (DVector<Self>, CMatrix<Self>);
}

// The block loop is parallelized at the simulator level; faer must not spawn
// its own workers or results could depend on the worker count.
fn faer_sequential() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

fn sort_eigenpairs<T: Scalar>(
    vals: Vec<T>,
    vecs: CMatrix<T>,
) -> (DVector<T>, CMatrix<T>) {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite eigenvalues"));
    let sorted_vals = DVector::from_iterator(n, order.iter().map(|&i| vals[i]));
    let mut sorted_vecs = CMatrix::<T>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vecs.set_column(dst, &vecs.column(src));
    }
    (sorted_vals, sorted_vecs)
}

macro_rules! impl_scalar {
    ($t:ty, $c:ty) => {
        impl Scalar for $t {
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            #[inline]
            fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, low: Self, high: Self) -> Self {
                if high > low {
                    Uniform::new(low, high).sample(rng)
                } else {
                    low
                }
            }

            fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: Self) -> u64 {
                if mean > 0.0 {
                    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
                } else {
                    0
                }
            }

            fn hermitian_eigen(matrix: &CMatrix<Self>) -> (DVector<Self>, CMatrix<Self>) {
                faer_sequential();
                let n = matrix.nrows();
                assert_eq!(n, matrix.ncols(), "hermitian_eigen needs a square matrix");
                let m = faer::Mat::<$c>::from_fn(n, n, |i, j| {
                    let z = matrix[(i, j)];
                    <$c>::new(z.re, z.im)
                });
                let eig = m
                    .self_adjoint_eigen(faer::Side::Lower)
                    .expect("eigendecomposition of a finite Hermitian matrix");
                let u = eig.U();
                let s = eig.S().column_vector();
                let vals: Vec<$t> = (0..n).map(|i| s[i].re).collect();
                let vecs = CMatrix::<Self>::from_fn(n, n, |i, j| {
                    let z = u[(i, j)];
                    Complex::new(z.re, z.im)
                });
                sort_eigenpairs(vals, vecs)
            }
        }
    };
}

impl_scalar!(f64, faer::c64);
impl_scalar!(f32, faer::c32);
