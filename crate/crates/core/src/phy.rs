//! Receive combining, SINR and achievable rate for every (UE, BS) pair of a
//! block, given effective channels and a power allocation.

use crate::numerics::{hermitian_solve, HermitianMatrix};
use crate::{channel::ChannelSet, CMatrix, CVector, Scalar};
use num_complex::Complex;

/// Effective channels of one block at a fixed phase vector, `n * n_bss + m`.
#[derive(Debug, Clone)]
pub struct EffectiveChannels<T: Scalar> {
    pub n_ues: usize,
    pub n_bss: usize,
    pub h: Vec<CVector<T>>,
}

impl<T: Scalar> EffectiveChannels<T> {
    pub fn compute(ch: &ChannelSet<T>, phi: &CVector<T>) -> Self {
        let mut h = Vec::with_capacity(ch.n_ues * ch.n_bss);
        for n in 0..ch.n_ues {
            for m in 0..ch.n_bss {
                h.push(ch.effective(phi, n, m));
            }
        }
        Self {
            n_ues: ch.n_ues,
            n_bss: ch.n_bss,
            h,
        }
    }

    pub fn get(&self, n: usize, m: usize) -> &CVector<T> {
        &self.h[n * self.n_bss + m]
    }
}

/// Receive combiners, `w_{m,n}` stored as `m * n_ues + n`. Norms never
/// exceed one.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerSet<T: Scalar> {
    pub n_ues: usize,
    pub n_bss: usize,
    pub w: Vec<CVector<T>>,
}

impl<T: Scalar> CombinerSet<T> {
    pub fn get(&self, m: usize, n: usize) -> &CVector<T> {
        &self.w[m * self.n_ues + n]
    }

    pub fn max_norm(&self) -> T {
        self.w
            .iter()
            .map(|w| w.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Per-link transmit powers `p_{n,m}` (watts), `n * n_bss + m`, plus the
/// per-UE budget they must sum to.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation<T: Scalar> {
    pub n_ues: usize,
    pub n_bss: usize,
    pub p: Vec<T>,
    pub total: Vec<T>,
}

impl<T: Scalar> PowerAllocation<T> {
    pub fn uniform(n_ues: usize, n_bss: usize, total_per_ue: T) -> Self {
        let share = total_per_ue / T::lit(n_bss as f64);
        Self {
            n_ues,
            n_bss,
            p: vec![share; n_ues * n_bss],
            total: vec![total_per_ue; n_ues],
        }
    }

    pub fn get(&self, n: usize, m: usize) -> T {
        self.p[n * self.n_bss + m]
    }

    pub fn set(&mut self, n: usize, m: usize, value: T) {
        self.p[n * self.n_bss + m] = value;
    }

    /// Checks the box and sum constraints to `tol`.
    pub fn is_feasible(&self, tol: T) -> bool {
        for n in 0..self.n_ues {
            let mut sum = T::zero();
            for m in 0..self.n_bss {
                let p = self.get(n, m);
                if p < -tol || p > self.total[n] + tol {
                    return false;
                }
                sum += p;
            }
            if (sum - self.total[n]).abs() > tol {
                return false;
            }
        }
        true
    }
}

/// SINR and rate of every link, `n * n_bss + m`.
#[derive(Debug, Clone)]
pub struct RateTable<T: Scalar> {
    pub n_ues: usize,
    pub n_bss: usize,
    pub sinr: Vec<T>,
    pub rate: Vec<T>,
    /// Per-BS uplink bandwidth, Hz.
    pub bandwidth: T,
    /// Noise power over that bandwidth, watts.
    pub noise_power: T,
}

impl<T: Scalar> RateTable<T> {
    pub fn sinr(&self, n: usize, m: usize) -> T {
        self.sinr[n * self.n_bss + m]
    }

    pub fn rate(&self, n: usize, m: usize) -> T {
        self.rate[n * self.n_bss + m]
    }
}

/// MMSE receive combiner for the stream of UE `n` at BS `m`, normalized to
/// unit norm: the direction `(Σ_j p_j h_j h_j^H + σ² I)^{-1} h_n` maximizes
/// the SINR, and the SINR is invariant to the scale.
pub fn mmse_combiner<T: Scalar>(
    eff: &EffectiveChannels<T>,
    powers: &PowerAllocation<T>,
    noise_power: T,
    m: usize,
    n: usize,
) -> CVector<T> {
    let l = eff.get(n, m).len();
    let h_n = eff.get(n, m);
    if h_n.norm() == T::zero() {
        let mut w = CVector::<T>::zeros(l);
        w[0] = Complex::new(T::one(), T::zero());
        return w;
    }
    let mut cov = CMatrix::<T>::identity(l, l).scale(noise_power);
    for j in 0..eff.n_ues {
        let h_j = eff.get(j, m);
        let p = powers.get(j, m);
        if p > T::zero() {
            cov += (h_j * h_j.adjoint()).scale(p);
        }
    }
    let cov = HermitianMatrix::from_symmetrized(cov);
    let w = hermitian_solve(&cov, h_n).expect("noise keeps the covariance positive definite");
    let norm = w.norm();
    if norm > T::zero() {
        w.scale(T::one() / norm)
    } else {
        let mut e = CVector::<T>::zeros(l);
        e[0] = Complex::new(T::one(), T::zero());
        e
    }
}

/// Post-combining SINR of link `(n, m)`:
/// `p |w^H h_n|² / (Σ_{j≠n} p_j |w^H h_j|² + σ² ‖w‖²)`.
pub fn sinr<T: Scalar>(
    combiner: &CVector<T>,
    eff: &EffectiveChannels<T>,
    powers: &PowerAllocation<T>,
    noise_power: T,
    m: usize,
    n: usize,
) -> T {
    let cross = |j: usize| {
        let dot = combiner.dotc(eff.get(j, m));
        dot.norm_sqr()
    };
    let signal = powers.get(n, m) * cross(n);
    let mut denom = noise_power * combiner.norm_squared();
    for j in 0..eff.n_ues {
        if j != n {
            denom += powers.get(j, m) * cross(j);
        }
    }
    signal / denom
}

/// Achievable rate `B log2(1 + γ)` in bits/second.
pub fn rate<T: Scalar>(gamma: T, bandwidth: T) -> T {
    bandwidth * (T::one() + gamma).log2()
}

/// MMSE combiners for all pairs.
pub fn mmse_combiner_set<T: Scalar>(
    eff: &EffectiveChannels<T>,
    powers: &PowerAllocation<T>,
    noise_power: T,
) -> CombinerSet<T> {
    let mut w = Vec::with_capacity(eff.n_ues * eff.n_bss);
    for m in 0..eff.n_bss {
        for n in 0..eff.n_ues {
            w.push(mmse_combiner(eff, powers, noise_power, m, n));
        }
    }
    CombinerSet {
        n_ues: eff.n_ues,
        n_bss: eff.n_bss,
        w,
    }
}

/// SINR and rate of every link at the given combiners.
pub fn compute_rate_table<T: Scalar>(
    eff: &EffectiveChannels<T>,
    combiners: &CombinerSet<T>,
    powers: &PowerAllocation<T>,
    noise_power: T,
    bandwidth: T,
) -> RateTable<T> {
    let mut sinr_v = Vec::with_capacity(eff.n_ues * eff.n_bss);
    let mut rate_v = Vec::with_capacity(eff.n_ues * eff.n_bss);
    for n in 0..eff.n_ues {
        for m in 0..eff.n_bss {
            let g = sinr(combiners.get(m, n), eff, powers, noise_power, m, n);
            sinr_v.push(g);
            rate_v.push(rate(g, bandwidth));
        }
    }
    RateTable {
        n_ues: eff.n_ues,
        n_bss: eff.n_bss,
        sinr: sinr_v,
        rate: rate_v,
        bandwidth,
        noise_power,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_channels(
        n_ues: usize,
        n_bss: usize,
        l: usize,
        rng: &mut ChaCha8Rng,
    ) -> EffectiveChannels<f64> {
        let h = (0..n_ues * n_bss)
            .map(|_| {
                CVector::<f64>::from_fn(l, |_, _| {
                    Complex::new(f64::standard_normal(rng), f64::standard_normal(rng))
                })
            })
            .collect();
        EffectiveChannels { n_ues, n_bss, h }
    }

    #[test]
    fn single_ue_mmse_is_matched_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let eff = random_channels(1, 1, 4, &mut rng);
        let powers = PowerAllocation::uniform(1, 1, 0.2);
        let sigma2 = 1e-3;
        let w = mmse_combiner(&eff, &powers, sigma2, 0, 0);
        let h = eff.get(0, 0);
        // collinear with h up to scale
        let alignment = w.dotc(h).norm() / (w.norm() * h.norm());
        assert_relative_eq!(alignment, 1.0, epsilon = 1e-12);
        let g = sinr(&w, &eff, &powers, sigma2, 0, 0);
        assert_relative_eq!(g, 0.2 * h.norm_squared() / sigma2, max_relative = 1e-12);
    }

    #[test]
    fn orthogonal_interferer_costs_nothing() {
        let l = 4;
        let mut h_des = CVector::<f64>::zeros(l);
        h_des[0] = Complex::new(1.0, 0.0);
        h_des[1] = Complex::new(0.5, 0.5);
        let mut h_int = CVector::<f64>::zeros(l);
        h_int[2] = Complex::new(0.8, -0.1);
        h_int[3] = Complex::new(0.0, 1.0);
        let eff = EffectiveChannels {
            n_ues: 2,
            n_bss: 1,
            h: vec![h_des.clone(), h_int],
        };
        let eff_free = EffectiveChannels {
            n_ues: 2,
            n_bss: 1,
            h: vec![h_des, CVector::<f64>::zeros(l)],
        };
        let powers = PowerAllocation::uniform(2, 1, 0.1);
        let sigma2 = 1e-2;
        let w = mmse_combiner(&eff, &powers, sigma2, 0, 0);
        let w_free = mmse_combiner(&eff_free, &powers, sigma2, 0, 0);
        let g = sinr(&w, &eff, &powers, sigma2, 0, 0);
        let g_free = sinr(&w_free, &eff_free, &powers, sigma2, 0, 0);
        assert!((g - g_free).abs() <= 1e-9 * g_free.max(1.0));
    }

    #[test]
    fn mmse_matches_generalized_eigenvalue_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let eff = random_channels(3, 1, 4, &mut rng);
            let mut powers = PowerAllocation::uniform(3, 1, 0.3);
            for n in 0..3 {
                powers.set(n, 0, 0.05 + 0.1 * (n as f64 + 1.0));
                powers.total[n] = powers.get(n, 0);
            }
            let sigma2 = 0.02;
            let n = 1;
            let w = mmse_combiner(&eff, &powers, sigma2, 0, n);
            let g = sinr(&w, &eff, &powers, sigma2, 0, n);

            // oracle: top eigenvalue of Q^{-1/2} (p h h^H) Q^{-1/2}
            let l = 4;
            let mut q = CMatrix::<f64>::identity(l, l).scale(sigma2);
            for j in 0..3 {
                if j != n {
                    let h = eff.get(j, 0);
                    q += (h * h.adjoint()).scale(powers.get(j, 0));
                }
            }
            let (vals, vecs) = f64::hermitian_eigen(&q);
            let mut q_inv_half = vecs.clone();
            for k in 0..l {
                q_inv_half.column_mut(k).scale_mut(1.0 / vals[k].sqrt());
            }
            let q_inv_half = &q_inv_half * vecs.adjoint();
            let h_n = eff.get(n, 0);
            let b = (&q_inv_half * h_n * h_n.adjoint() * &q_inv_half).scale(powers.get(n, 0));
            let (bvals, _) = f64::hermitian_eigen(&((&b + b.adjoint()).scale(0.5)));
            let oracle = bvals[l - 1];
            assert!(
                (g - oracle).abs() <= 1e-8 * oracle,
                "sinr {g} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn mmse_dominates_random_combiners() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let eff = random_channels(3, 1, 4, &mut rng);
            let powers = PowerAllocation::uniform(3, 1, 0.2);
            let sigma2 = 0.01;
            let w = mmse_combiner(&eff, &powers, sigma2, 0, 0);
            let g = sinr(&w, &eff, &powers, sigma2, 0, 0);
            for _ in 0..100 {
                let cand = CVector::<f64>::from_fn(4, |_, _| {
                    Complex::new(f64::standard_normal(&mut rng), f64::standard_normal(&mut rng))
                })
                .normalize();
                let gc = sinr(&cand, &eff, &powers, sigma2, 0, 0);
                assert!(gc <= g + 1e-9 * g);
            }
        }
    }

    #[test]
    fn sinr_zero_power_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let eff = random_channels(2, 1, 3, &mut rng);
        let mut powers = PowerAllocation::uniform(2, 1, 0.2);
        powers.set(0, 0, 0.0);
        let w = mmse_combiner(&eff, &powers, 1e-3, 0, 0);
        assert_eq!(sinr(&w, &eff, &powers, 1e-3, 0, 0), 0.0);
    }

    #[test]
    fn sinr_scale_invariant_in_combiner() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let eff = random_channels(3, 2, 4, &mut rng);
        let powers = PowerAllocation::uniform(3, 2, 0.2);
        let sigma2 = 5e-3;
        let w = mmse_combiner(&eff, &powers, sigma2, 1, 2);
        let g = sinr(&w, &eff, &powers, sigma2, 1, 2);
        for c in [0.1, 2.0, -3.5] {
            let scaled = w.map(|z| z * Complex::new(c, 0.5 * c));
            let gs = sinr(&scaled, &eff, &powers, sigma2, 1, 2);
            assert!((gs - g).abs() <= 1e-12 * g.max(1.0));
        }
    }

    #[test]
    fn rate_values() {
        assert_eq!(rate(0.0f64, 5e6), 0.0);
        assert_relative_eq!(rate(1.0f64, 1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(rate(3.0f64, 100e6 / 3.0), 100e6 / 3.0 * 2.0, epsilon = 1e-6);
    }

    #[test]
    fn rate_monotone_and_linear_in_bandwidth() {
        let mut prev = -1.0;
        for i in 0..50 {
            let g = i as f64 * 0.3;
            let r = rate(g, 2e6);
            assert!(r > prev);
            prev = r;
        }
        assert_relative_eq!(rate(2.5f64, 4e6), 2.0 * rate(2.5f64, 2e6), epsilon = 1e-9);
    }

    #[test]
    fn combiner_norms_within_unit_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eff = random_channels(3, 3, 4, &mut rng);
        let powers = PowerAllocation::uniform(3, 3, 0.2);
        let set = mmse_combiner_set(&eff, &powers, 1e-3);
        assert!(set.max_norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn rate_ranking_stable_under_combiner_rescale() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let eff = random_channels(2, 3, 4, &mut rng);
        let powers = PowerAllocation::uniform(2, 3, 0.2);
        let sigma2 = 1e-3;
        let set = mmse_combiner_set(&eff, &powers, sigma2);
        let table = compute_rate_table(&eff, &set, &powers, sigma2, 1e6);
        let mut scaled = set.clone();
        for w in &mut scaled.w {
            *w = w.map(|z| z * Complex::new(0.25, 0.0));
        }
        let table2 = compute_rate_table(&eff, &scaled, &powers, sigma2, 1e6);
        for n in 0..2 {
            let best1 = (0..3).max_by(|&a, &b| table.rate(n, a).total_cmp(&table.rate(n, b)));
            let best2 = (0..3).max_by(|&a, &b| table2.rate(n, a).total_cmp(&table2.rate(n, b)));
            assert_eq!(best1, best2);
        }
    }

    #[test]
    fn power_allocation_feasibility() {
        let mut p = PowerAllocation::uniform(2, 3, 0.3);
        assert!(p.is_feasible(1e-9));
        p.set(0, 0, 0.5);
        assert!(!p.is_feasible(1e-9));
    }
}
