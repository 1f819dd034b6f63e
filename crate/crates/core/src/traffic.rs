//! Traffic arrivals, queue backlog and backhaul capacity sampling, plus the
//! per-path latency model: radio latency, backhaul latency, their sum, and
//! the per-block objective (sum over flows of the worst path).

use crate::Scalar;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("no usable path for ue {ue} traffic {traffic}: all path costs are infinite")]
    NoUsablePath { ue: usize, traffic: usize },
}

/// Static description of one traffic type.
#[derive(Debug, Clone)]
pub struct TrafficType<T: Scalar> {
    /// Fixed packet size, bits.
    pub packet_bits: u64,
    /// Mean packet arrivals per block.
    pub arrival_mean_per_block: T,
    /// Mean queued packets at the start of a block.
    pub queue_mean: T,
    /// End-to-end latency budget, seconds.
    pub latency_budget: T,
    /// Backhaul capacity range per path, bits/second (low, high).
    pub backhaul_bps: Vec<(T, T)>,
}

/// Traffic splitting ratios `α_{n,m,q}`, each flow summing to one over the
/// paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRatios<T: Scalar> {
    pub n_ues: usize,
    pub n_bss: usize,
    pub n_types: usize,
    alpha: Vec<T>,
}

impl<T: Scalar> SplitRatios<T> {
    pub fn uniform(n_ues: usize, n_bss: usize, n_types: usize) -> Self {
        let share = T::one() / T::lit(n_bss as f64);
        Self {
            n_ues,
            n_bss,
            n_types,
            alpha: vec![share; n_ues * n_bss * n_types],
        }
    }

    #[inline]
    fn idx(&self, n: usize, m: usize, q: usize) -> usize {
        (n * self.n_bss + m) * self.n_types + q
    }

    pub fn get(&self, n: usize, m: usize, q: usize) -> T {
        self.alpha[self.idx(n, m, q)]
    }

    pub fn set(&mut self, n: usize, m: usize, q: usize, value: T) {
        let i = self.idx(n, m, q);
        self.alpha[i] = value;
    }

    /// Routes the whole flow `(n, q)` to path `m`.
    pub fn set_one_hot(&mut self, n: usize, q: usize, m: usize) {
        for path in 0..self.n_bss {
            let v = if path == m { T::one() } else { T::zero() };
            self.set(n, path, q, v);
        }
    }

    /// Box and sum-to-one constraints to `tol`.
    pub fn is_feasible(&self, tol: T) -> bool {
        for n in 0..self.n_ues {
            for q in 0..self.n_types {
                let mut sum = T::zero();
                for m in 0..self.n_bss {
                    let a = self.get(n, m, q);
                    if a < -tol || a > T::one() + tol {
                        return false;
                    }
                    sum += a;
                }
                if (sum - T::one()).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// One block's sampled traffic state.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTraffic<T: Scalar> {
    pub n_ues: usize,
    pub n_bss: usize,
    pub n_types: usize,
    /// Arrived packets per `(n, q)`, `n * n_types + q`.
    pub arrivals: Vec<u64>,
    /// Queued packets per `(n, q)`.
    pub queue: Vec<u64>,
    /// Backhaul capacity per `(n, m, q)`, bits/second.
    pub backhaul: Vec<T>,
}

impl<T: Scalar> BlockTraffic<T> {
    pub fn load_packets(&self, n: usize, q: usize) -> u64 {
        let i = n * self.n_types + q;
        self.arrivals[i] + self.queue[i]
    }

    pub fn backhaul(&self, n: usize, m: usize, q: usize) -> T {
        self.backhaul[(n * self.n_bss + m) * self.n_types + q]
    }

    /// Total outstanding bits of flow `(n, q)`.
    pub fn load_bits(&self, n: usize, q: usize, types: &[TrafficType<T>]) -> T {
        T::lit((self.load_packets(n, q) * types[q].packet_bits) as f64)
    }
}

/// Samples arrivals, queue backlog and backhaul capacities for one block.
pub fn sample_block_traffic<T: Scalar, R: Rng + ?Sized>(
    types: &[TrafficType<T>],
    n_ues: usize,
    n_bss: usize,
    rng: &mut R,
) -> BlockTraffic<T> {
    let n_types = types.len();
    let mut arrivals = Vec::with_capacity(n_ues * n_types);
    let mut queue = Vec::with_capacity(n_ues * n_types);
    for _ in 0..n_ues {
        for ty in types {
            arrivals.push(T::sample_poisson(rng, ty.arrival_mean_per_block));
            queue.push(T::sample_poisson(rng, ty.queue_mean));
        }
    }
    let mut backhaul = Vec::with_capacity(n_ues * n_bss * n_types);
    for _ in 0..n_ues {
        for m in 0..n_bss {
            for ty in types {
                let (low, high) = ty.backhaul_bps[m];
                backhaul.push(T::sample_uniform(rng, low, high));
            }
        }
    }
    BlockTraffic {
        n_ues,
        n_bss,
        n_types,
        arrivals,
        queue,
        backhaul,
    }
}

/// Radio-link latency `α (λ + n) M_q / R`. A loaded path with zero rate is
/// unusable and reports infinity; zero traffic share costs nothing
/// regardless of the rate.
pub fn radio_latency<T: Scalar>(alpha: T, packets: u64, packet_bits: u64, rate: T) -> T {
    if alpha == T::zero() || packets == 0 {
        return T::zero();
    }
    let bits = alpha * T::lit((packets * packet_bits) as f64);
    if rate <= T::zero() {
        T::lit(f64::INFINITY)
    } else {
        bits / rate
    }
}

/// Backhaul latency `α (λ + n) M_q / c`.
pub fn backhaul_latency<T: Scalar>(alpha: T, packets: u64, packet_bits: u64, capacity: T) -> T {
    if alpha == T::zero() || packets == 0 {
        return T::zero();
    }
    alpha * T::lit((packets * packet_bits) as f64) / capacity
}

/// End-to-end path latency: radio plus backhaul.
pub fn path_latency<T: Scalar>(radio: T, backhaul: T) -> T {
    radio + backhaul
}

/// Per-path latencies `u_{n,m,q}` of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLatencies<T: Scalar> {
    pub n_ues: usize,
    pub n_bss: usize,
    pub n_types: usize,
    u: Vec<T>,
}

impl<T: Scalar> PathLatencies<T> {
    pub fn new(n_ues: usize, n_bss: usize, n_types: usize) -> Self {
        Self {
            n_ues,
            n_bss,
            n_types,
            u: vec![T::zero(); n_ues * n_bss * n_types],
        }
    }

    pub fn get(&self, n: usize, m: usize, q: usize) -> T {
        self.u[(n * self.n_bss + m) * self.n_types + q]
    }

    pub fn set(&mut self, n: usize, m: usize, q: usize, value: T) {
        self.u[(n * self.n_bss + m) * self.n_types + q] = value;
    }

    /// Instant latency of flow `(n, q)`: the worst path.
    pub fn instant(&self, n: usize, q: usize) -> T {
        (0..self.n_bss)
            .map(|m| self.get(n, m, q))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Block objective: sum over flows of the per-flow worst-path latency.
pub fn block_objective<T: Scalar>(u: &PathLatencies<T>) -> T {
    let mut f = T::zero();
    for n in 0..u.n_ues {
        for q in 0..u.n_types {
            f += u.instant(n, q);
        }
    }
    f
}
