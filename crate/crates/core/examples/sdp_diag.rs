use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rismp_core::numerics::{sdp_solve_diag1_warm, HermitianMatrix, SdpSettings};
use rismp_core::Scalar;

fn dense(d: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix<f64> {
    let a = DMatrix::<Complex<f64>>::from_fn(d, d, |_, _| {
        Complex::new(f64::standard_normal(rng), f64::standard_normal(rng))
    });
    HermitianMatrix::from_symmetrized(a)
}

fn low_rank(d: usize, terms: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix<f64> {
    let mut m = DMatrix::<Complex<f64>>::zeros(d, d);
    for t in 0..terms {
        let v = DVector::<Complex<f64>>::from_fn(d, |_, _| {
            Complex::new(f64::standard_normal(rng), f64::standard_normal(rng))
        });
        let w = if t % 3 == 2 { -0.3 } else { 1.0 };
        m += (&v * v.adjoint()).scale(w);
    }
    HermitianMatrix::from_symmetrized(m)
}

fn run(tag: &str, c: &HermitianMatrix<f64>, s: &SdpSettings<f64>) {
    let t0 = std::time::Instant::now();
    match sdp_solve_diag1_warm(c, s, None) {
        Ok(sol) => println!(
            "{tag}: iters={:5} gap={:.2e} {:.2}s",
            sol.iterations,
            (sol.objective - sol.primal_value) / sol.objective.abs().max(1.0),
            t0.elapsed().as_secs_f64()
        ),
        Err(e) => println!(
            "{tag}: NONCONV r={:.2e} gap={:.2e} {:.2}s",
            e.primal_residual,
            (e.best.objective - e.best.primal_value) / e.best.objective.abs().max(1.0),
            t0.elapsed().as_secs_f64()
        ),
    }
}

fn main() {
    let combos: Vec<(f64, usize, f64, f64, Option<f64>)> = vec![
        // gamma, period, threshold, factor, rho0 (None -> 1/d)
        (1.6, 25, 10.0, 2.0, None),
        (1.6, 50, 10.0, 2.0, None),
        (1.0, 25, 10.0, 2.0, None),
        (1.6, 25, 5.0, 1.5, None),
        (1.6, 50, 5.0, 2.0, None),
        (1.8, 50, 10.0, 2.0, None),
        (1.6, 25, 10.0, 2.0, Some(0.3)),
        (1.6, 25, 10.0, 2.0, Some(0.05)),
    ];
    for (gamma, period, thresh, factor, rho0) in combos {
        println!("== gamma={gamma} period={period} thresh={thresh} factor={factor} rho0={rho0:?}");
        let s = SdpSettings {
            over_relaxation: gamma,
            adapt_period: period,
            adapt_threshold: thresh,
            adapt_factor: factor,
            rho_init: rho0,
            ..SdpSettings::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [17usize, 64, 101] {
            let c = dense(d, &mut rng);
            run(&format!("  dense   d={d:3}"), &c, &s);
        }
        for trial in 0..2 {
            let c = low_rank(101, 27, &mut rng);
            run(&format!("  lowrank t{trial}   "), &c, &s);
        }
    }
}
