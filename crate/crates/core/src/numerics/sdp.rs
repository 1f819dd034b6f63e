//! Diagonal-constrained semidefinite solver:
//!
//! maximize `tr(C V)` subject to `V ⪰ 0`, `V_kk = 1`.
//!
//! Solved by operator splitting (ADMM) alternating a projection onto the
//! unit-diagonal affine set with a projection onto the PSD cone, with
//! over-relaxation and residual-balancing step-size adaptation. The returned
//! matrix is exactly feasible (congruence-rescaled to unit diagonal), and the
//! reported objective is a certified upper bound on the optimum obtained from
//! the dual slack estimate, so relaxation-bound comparisons are safe even at
//! finite accuracy.

use super::{psd_project_raw, HermitianMatrix};
use crate::{CMatrix, Scalar};
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct SdpSettings<T: Scalar> {
    pub max_iterations: usize,
    /// Relative tolerance on the primal and dual residuals.
    pub tolerance: T,
    pub over_relaxation: T,
    /// Initial penalty; `None` picks `1/dim` for the normalized cost.
    pub rho_init: Option<T>,
    /// Residual-balancing cadence in iterations.
    pub adapt_period: usize,
    /// Imbalance ratio that triggers a penalty change.
    pub adapt_threshold: T,
    /// Multiplicative penalty step.
    pub adapt_factor: T,
}

impl<T: Scalar> Default for SdpSettings<T> {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: T::lit(1e-5),
            over_relaxation: T::lit(1.6),
            rho_init: None,
            adapt_period: 50,
            adapt_threshold: T::lit(10.0),
            adapt_factor: T::lit(2.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution<T: Scalar> {
    /// Feasible primal point: PSD with exactly unit diagonal.
    pub matrix: HermitianMatrix<T>,
    /// Certified upper bound on the optimal value (dual feasible point).
    pub objective: T,
    /// `tr(C · matrix)` at the returned feasible point.
    pub primal_value: T,
    pub iterations: usize,
    pub primal_residual: T,
    pub dual_residual: T,
    warm_z: CMatrix<T>,
    warm_slack: CMatrix<T>,
    warm_rho: T,
}

#[derive(Debug, Error)]
#[error("sdp did not converge within {iterations} iterations (primal residual {primal_residual:.3e})")]
pub struct SdpNonConvergence<T: Scalar> {
    pub iterations: usize,
    pub primal_residual: f64,
    /// Best iterate reached before hitting the cap; feasible and usable.
    pub best: SdpSolution<T>,
}

fn real_inner<T: Scalar>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.re * y.re + x.im * y.im;
    }
    acc
}

/// Rescales a PSD iterate to exact unit diagonal; a congruence transform, so
/// positive semidefiniteness is preserved.
fn feasible_point<T: Scalar>(z: &CMatrix<T>) -> CMatrix<T> {
    let d = z.nrows();
    let tiny = T::lit(1e-30);
    let scales: Vec<T> = (0..d)
        .map(|i| {
            let zii = z[(i, i)].re;
            if zii > tiny {
                T::one() / zii.sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    let mut v = CMatrix::<T>::from_fn(d, d, |i, j| z[(i, j)].scale(scales[i] * scales[j]));
    for i in 0..d {
        v[(i, i)] = Complex::new(T::one(), T::zero());
    }
    v
}

fn extract<T: Scalar>(
    c: &CMatrix<T>,
    c_scaled: &CMatrix<T>,
    scale: T,
    z: &CMatrix<T>,
    u: &CMatrix<T>,
    rho: T,
    iterations: usize,
    primal_residual: T,
    dual_residual: T,
) -> SdpSolution<T> {
    let d = c.nrows();
    let v = feasible_point(z);
    let primal_value = real_inner(c, &v);

    // Dual bound: at optimality the dual slack S = -rho*U satisfies
    // S = diag(y) - C with S PSD; shifting y by the most negative eigenvalue
    // of diag(y) - C certifies an upper bound at any accuracy.
    let slack_scaled = u.scale(-rho);
    let mut y_sum = T::zero();
    let mut m = -c_scaled.clone();
    for i in 0..d {
        let y_i = slack_scaled[(i, i)].re + c_scaled[(i, i)].re;
        y_sum += y_i;
        m[(i, i)] += Complex::new(y_i, T::zero());
    }
    let herm_m = (&m + m.adjoint()).scale(T::lit(0.5));
    let (vals, _) = T::hermitian_eigen(&herm_m);
    let shortfall = (-vals[0]).max(T::zero());
    let objective = scale * (y_sum + T::lit(d as f64) * shortfall);

    SdpSolution {
        matrix: HermitianMatrix::from_symmetrized(v),
        objective,
        primal_value,
        iterations,
        primal_residual,
        dual_residual,
        warm_z: z.clone(),
        warm_slack: slack_scaled.scale(scale),
        warm_rho: rho,
    }
}

/// Solves the unit-diagonal max-trace SDP from a cold start.
pub fn sdp_solve_diag1<T: Scalar>(
    c: &HermitianMatrix<T>,
    settings: &SdpSettings<T>,
) -> Result<SdpSolution<T>, SdpNonConvergence<T>> {
    sdp_solve_diag1_warm(c, settings, None)
}

/// Same solver with an optional warm start from a previous solution; the
/// phase-shift update reuses the iterate across outer iterations.
pub fn sdp_solve_diag1_warm<T: Scalar>(
    c: &HermitianMatrix<T>,
    settings: &SdpSettings<T>,
    warm: Option<&SdpSolution<T>>,
) -> Result<SdpSolution<T>, SdpNonConvergence<T>> {
    let d = c.dim();
    let cm = c.matrix();
    let scale = cm.norm();

    if scale == T::zero() || d == 1 {
        let mut v = CMatrix::<T>::identity(d, d);
        if d == 1 {
            v[(0, 0)] = Complex::new(T::one(), T::zero());
        }
        let primal = real_inner(cm, &v);
        return Ok(SdpSolution {
            matrix: HermitianMatrix::from_symmetrized(v.clone()),
            objective: primal,
            primal_value: primal,
            iterations: 0,
            primal_residual: T::zero(),
            dual_residual: T::zero(),
            warm_z: v,
            warm_slack: CMatrix::zeros(d, d),
            warm_rho: T::one(),
        });
    }

    let c_scaled = cm.unscale(scale);
    let gamma = settings.over_relaxation;
    let tol = settings.tolerance;

    // The iterate lives on the unit-diagonal set (Frobenius scale ~ d for a
    // low-rank optimum) while the normalized cost has unit norm, so the
    // penalty starts at 1/d and residual balancing refines it from there.
    let warm_ok = matches!(warm, Some(w) if w.warm_z.nrows() == d);
    let mut rho = match warm {
        Some(w) if warm_ok => w.warm_rho,
        _ => settings
            .rho_init
            .unwrap_or_else(|| T::one() / T::lit(d as f64)),
    };
    let mut z = match warm {
        Some(w) if warm_ok => w.warm_z.clone(),
        _ => CMatrix::<T>::identity(d, d),
    };
    let mut u = match warm {
        Some(w) if warm_ok => w.warm_slack.unscale(-(scale * rho)),
        _ => CMatrix::<T>::zeros(d, d),
    };

    let mut c_over_rho = c_scaled.unscale(rho);
    let mut primal_residual = T::lit(f64::INFINITY);
    let mut dual_residual = T::lit(f64::INFINITY);

    for iter in 1..=settings.max_iterations {
        // affine step: unconstrained minimizer with the diagonal pinned to one
        let mut x = &z - &u + &c_over_rho;
        for i in 0..d {
            x[(i, i)] = Complex::new(T::one(), T::zero());
        }

        let x_relaxed = x.scale(gamma) + z.scale(T::one() - gamma);
        let z_next = psd_project_raw(&(&x_relaxed + &u));
        u += &x_relaxed - &z_next;

        primal_residual = (&x - &z_next).norm();
        dual_residual = (&z_next - &z).norm() * rho;
        z = z_next;

        let primal_scale = T::one().max(x.norm()).max(z.norm());
        let dual_scale = T::one().max(u.norm() * rho);
        if primal_residual <= tol * primal_scale && dual_residual <= tol * dual_scale {
            return Ok(extract(
                cm,
                &c_scaled,
                scale,
                &z,
                &u,
                rho,
                iter,
                primal_residual,
                dual_residual,
            ));
        }

        // residual balancing
        if iter % settings.adapt_period == 0 {
            let thresh = settings.adapt_threshold;
            let factor = settings.adapt_factor;
            if primal_residual > thresh * dual_residual {
                rho *= factor;
                u = u.unscale(factor);
                c_over_rho = c_scaled.unscale(rho);
            } else if dual_residual > thresh * primal_residual {
                rho /= factor;
                u = u.scale(factor);
                c_over_rho = c_scaled.unscale(rho);
            }
        }
    }

    let best = extract(
        cm,
        &c_scaled,
        scale,
        &z,
        &u,
        rho,
        settings.max_iterations,
        primal_residual,
        dual_residual,
    );
    Err(SdpNonConvergence {
        iterations: settings.max_iterations,
        primal_residual: primal_residual.to_f64(),
        best,
    })
}
