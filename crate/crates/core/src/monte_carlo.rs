//! Monte Carlo SOP estimation over Rayleigh-faded channel draws.
//!
//! The sample budget is split into `partition_count` shards. Shard `i` draws
//! from a ChaCha8 stream keyed by `(seed, i)`, so the merged outage counts
//! depend only on `(seed, partition_count, sample_count)` and not on how the
//! shards are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimate::SopEstimate;
use crate::exec::Execution;
use crate::model::{
    check_alpha, secrecy_rates, sinr_set_unchecked, ChannelRealization, DecodingOrder, SecrecyTargets,
    SystemParams, User,
};

pub const DEFAULT_SEED: u64 = 20_210_601;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_PARTITIONS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub sample_count: u64,
    pub seed: u64,
    pub partition_count: u32,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            sample_count: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            partition_count: DEFAULT_PARTITIONS,
        }
    }
}

impl SimulationConfig {
    pub fn new(sample_count: u64, seed: u64) -> Self {
        Self {
            sample_count,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        if self.partition_count == 0 {
            return Err(Error::invalid("partition count must be at least 1"));
        }
        Ok(())
    }

    /// Samples assigned to shard `index`; the remainder goes to the first shards.
    fn shard_len(&self, index: u32) -> u64 {
        let parts = u64::from(self.partition_count);
        let base = self.sample_count / parts;
        base + u64::from(u64::from(index) < self.sample_count % parts)
    }
}

/// RNG for one shard.
pub fn shard_rng(seed: u64, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(index));
    rng
}

/// Inverse-CDF exponential draw `-mean * ln(u)` with `u` uniform on (0, 1].
pub fn sample_exponential<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    -mean * u.ln()
}

/// Independent exponential power gains with means `lambda_1`, `lambda_2`.
/// The draw is not reordered.
pub fn sample_channels<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ChannelRealization {
    let gain_near = sample_exponential(params.mean_gain_near(), rng);
    let gain_far = sample_exponential(params.mean_gain_far(), rng);
    ChannelRealization { gain_near, gain_far }
}

fn count_shard(
    queries: &[(DecodingOrder, User)],
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
    cfg: &SimulationConfig,
    index: u32,
) -> Vec<u64> {
    let mut rng = shard_rng(cfg.seed, index);
    let mut outages = vec![0u64; queries.len()];
    let mut orders: Vec<DecodingOrder> = queries.iter().map(|q| q.0).collect();
    orders.sort();
    orders.dedup();
    let mut rates = Vec::with_capacity(orders.len());
    for _ in 0..cfg.shard_len(index) {
        let ch = sample_channels(params, &mut rng);
        rates.clear();
        rates.extend(
            orders
                .iter()
                .map(|&o| secrecy_rates(&sinr_set_unchecked(o, &ch, alpha, params))),
        );
        for (slot, (order, user)) in outages.iter_mut().zip(queries) {
            let k = orders.binary_search(order).expect("order cached");
            if rates[k].rate(*user) < targets.threshold(*user) {
                *slot += 1;
            }
        }
    }
    outages
}

/// Estimates several SOPs from one shared set of channel draws.
pub fn estimate_many(
    queries: &[(DecodingOrder, User)],
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
    cfg: &SimulationConfig,
    exec: Execution,
) -> Result<Vec<SopEstimate>> {
    check_alpha(alpha)?;
    cfg.validate()?;
    let shards: Vec<u32> = (0..cfg.partition_count).collect();
    let counts = exec.map(&shards, |&i| count_shard(queries, targets, alpha, params, cfg, i));
    let mut totals = vec![0u64; queries.len()];
    for shard in counts {
        for (t, c) in totals.iter_mut().zip(shard) {
            *t += c;
        }
    }
    Ok(totals
        .into_iter()
        .map(|outages| SopEstimate::from_counts(outages, cfg.sample_count))
        .collect())
}

/// Fraction of draws whose secrecy rate for `user` falls below its threshold.
pub fn estimate_sop(
    order: DecodingOrder,
    user: User,
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
    cfg: &SimulationConfig,
) -> Result<SopEstimate> {
    estimate_sop_with(Execution::default(), order, user, targets, alpha, params, cfg)
}

pub fn estimate_sop_with(
    exec: Execution,
    order: DecodingOrder,
    user: User,
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
    cfg: &SimulationConfig,
) -> Result<SopEstimate> {
    Ok(estimate_many(&[(order, user)], targets, alpha, params, cfg, exec)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::from_received_snr_db(1.0, 3.0, 50.0, 100.0, 10.0, 0.1).unwrap()
    }

    #[test]
    fn shards_cover_every_sample() {
        let cfg = SimulationConfig {
            sample_count: 1003,
            seed: 1,
            partition_count: 10,
        };
        let total: u64 = (0..10).map(|i| cfg.shard_len(i)).sum();
        assert_eq!(total, 1003);
        assert_eq!(cfg.shard_len(0), 101);
        assert_eq!(cfg.shard_len(9), 100);
    }

    #[test]
    fn fixed_seed_fixed_stream() {
        let p = params();
        let a: Vec<_> = {
            let mut rng = shard_rng(7, 3);
            (0..100).map(|_| sample_channels(&p, &mut rng)).collect()
        };
        let b: Vec<_> = {
            let mut rng = shard_rng(7, 3);
            (0..100).map(|_| sample_channels(&p, &mut rng)).collect()
        };
        assert_eq!(a, b);
        let mut other = shard_rng(7, 4);
        assert_ne!(a[0], sample_channels(&p, &mut other));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let p = params();
        let t = SecrecyTargets::new(0.5, 0.1).unwrap();
        let cfg = SimulationConfig {
            sample_count: 20_000,
            seed: 11,
            partition_count: 7,
        };
        let queries = [(DecodingOrder::D2, User::Near), (DecodingOrder::D3, User::Far)];
        let s = estimate_many(&queries, &t, 0.4, &p, &cfg, Execution::Sequential).unwrap();
        let q = estimate_many(&queries, &t, 0.4, &p, &cfg, Execution::Parallel).unwrap();
        assert_eq!(s, q);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params();
        let t = SecrecyTargets::new(0.5, 0.1).unwrap();
        let cfg = SimulationConfig::new(10, 0);
        assert!(estimate_sop(DecodingOrder::D2, User::Near, &t, 1.0, &p, &cfg).is_err());
        let empty = SimulationConfig::new(0, 0);
        assert!(estimate_sop(DecodingOrder::D2, User::Near, &t, 0.5, &p, &empty).is_err());
    }
}
