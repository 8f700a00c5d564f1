//! Monte-Carlo replay of the arrival and purchase process.
//!
//! Trials are split into fixed-size shards. Shard `s` draws from a ChaCha8
//! generator seeded with the user seed on stream `s`, and shard statistics are
//! merged in shard order, so a report depends only on `(seed, trials)` and not
//! on how many worker threads ran.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, check_positive, check_probability, invalid, Error, Result};
use crate::pricing::{build_pricing, price_closed_form, PriceSchedule};
use crate::valuations::ValuationModel;

/// Generator recorded in every report.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Trials per shard.
pub const SHARD_SIZE: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub mean_profit: f64,
    /// Sample standard deviation over `√trials`.
    pub std_error: f64,
    /// `served_histogram[i]` trials sold exactly `i` units.
    pub served_histogram: Vec<u64>,
    pub seed: u64,
    pub rng: String,
}

/// Fixed price against the optimal schedule on common random numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub optimal: SimulationReport,
    pub fixed: SimulationReport,
    /// Mean of per-trial `optimal − fixed`.
    pub mean_difference: f64,
    pub paired_std_error: f64,
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.mean += delta * other.count as f64 / total as f64;
        self.count = total;
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64).sqrt() / (self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
struct Tally {
    profit: Moments,
    histogram: Vec<u64>,
}

impl Tally {
    fn new(capacity: usize) -> Self {
        Self {
            profit: Moments::default(),
            histogram: vec![0; capacity + 1],
        }
    }

    fn push(&mut self, profit: f64, served: usize) {
        self.profit.push(profit);
        self.histogram[served] += 1;
    }

    fn merge(&mut self, other: &Tally) {
        self.profit.merge(&other.profit);
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
    }

    fn report(self, seed: u64) -> SimulationReport {
        SimulationReport {
            trials: self.profit.count,
            mean_profit: self.profit.mean,
            std_error: self.profit.std_error(),
            served_histogram: self.histogram,
            seed,
            rng: RNG_ALGORITHM.to_string(),
        }
    }
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Runs `trials` independent trials, `S` tallies per trial, sharded and merged
/// deterministically.
fn run_sharded<const S: usize, F>(trials: u64, seed: u64, capacity: usize, trial: F) -> [Tally; S]
where
    F: Fn(&mut ChaCha8Rng, &mut [Tally; S]) + Sync,
{
    let shards = trials.div_ceil(SHARD_SIZE);
    let parts: Vec<[Tally; S]> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(seed, shard);
            let mut tallies: [Tally; S] = std::array::from_fn(|_| Tally::new(capacity));
            let len = SHARD_SIZE.min(trials - shard * SHARD_SIZE);
            for _ in 0..len {
                trial(&mut rng, &mut tallies);
            }
            tallies
        })
        .collect();
    let mut total: [Tally; S] = std::array::from_fn(|_| Tally::new(capacity));
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    Ok(())
}

/// One slot draw: whether a user arrives and the uniform behind their valuation.
/// Both are drawn every slot so paired policies see identical users.
fn slot_draw(rng: &mut ChaCha8Rng, alpha: f64) -> (bool, f64) {
    let arrives = rng.gen::<f64>() < alpha;
    (arrives, rng.gen::<f64>())
}

/// Sells to `v` at the schedule's price in state `(units, t)`.
fn offer(schedule: &PriceSchedule, model: &ValuationModel, units: &mut usize, t: usize, u: f64) -> f64 {
    if *units == 0 {
        return 0.0;
    }
    let price = schedule.effective_price(*units, t).expect("t ≥ 1 and units ≥ 1 always price");
    if model.sample(u) >= price {
        *units -= 1;
        price
    } else {
        0.0
    }
}

/// Replays a discrete-slot schedule: each slot a user arrives with
/// probability `alpha` and buys iff their valuation reaches the posted price.
pub fn simulate_discrete(
    model: &ValuationModel,
    alpha: f64,
    schedule: &PriceSchedule,
    capacity: usize,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_probability("alpha", alpha)?;
    check_trials(trials)?;
    if schedule.capacity() != capacity || schedule.horizon() != horizon {
        return Err(Error::ScheduleMismatch {
            schedule_capacity: schedule.capacity(),
            schedule_horizon: schedule.horizon(),
            capacity,
            horizon,
        });
    }
    let [tally] = run_sharded::<1, _>(trials, seed, capacity, |rng, tallies| {
        let mut units = capacity;
        let mut profit = 0.0;
        for t in (1..=horizon).rev() {
            let (arrives, u) = slot_draw(rng, alpha);
            if arrives {
                profit += offer(schedule, model, &mut units, t, u);
            }
        }
        tallies[0].push(profit, capacity - units);
    });
    Ok(tally.report(seed))
}

/// Replays continuous-time closed-form pricing: Poisson arrivals at rate
/// `arrival_rate`, exponential valuations with rate `lambda`, each arrival
/// quoted `p_j(t)` for its remaining time `t`. An arrival landing exactly on
/// the deadline is discarded.
pub fn simulate_continuous(
    lambda: f64,
    arrival_rate: f64,
    capacity: usize,
    horizon: f64,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_positive("lambda", lambda)?;
    check_nonnegative("arrival_rate", arrival_rate)?;
    check_nonnegative("horizon", horizon)?;
    check_trials(trials)?;
    let [tally] = run_sharded::<1, _>(trials, seed, capacity, |rng, tallies| {
        let mut units = capacity;
        let mut profit = 0.0;
        let mut time_left = horizon;
        if arrival_rate > 0.0 {
            while units > 0 {
                time_left -= -(1.0 - rng.gen::<f64>()).ln() / arrival_rate;
                if time_left <= 0.0 {
                    break;
                }
                let price = price_closed_form(lambda, arrival_rate, units, time_left);
                let valuation = -(1.0 - rng.gen::<f64>()).ln() / lambda;
                if valuation >= price {
                    profit += price;
                    units -= 1;
                }
            }
        }
        tallies[0].push(profit, capacity - units);
    });
    Ok(tally.report(seed))
}

/// Optimal schedule versus a constant price on common random numbers.
pub fn simulate_policy_regret(
    model: &ValuationModel,
    alpha: f64,
    capacity: usize,
    horizon: usize,
    trials: u64,
    seed: u64,
    fixed_price: f64,
) -> Result<RegretReport> {
    check_trials(trials)?;
    check_nonnegative("fixed_price", fixed_price)?;
    let (optimal, _) = build_pricing(model, alpha, capacity, horizon)?;
    let fixed = PriceSchedule::constant(capacity, horizon, fixed_price);
    let [opt, fix, diff] = run_sharded::<3, _>(trials, seed, capacity, |rng, tallies| {
        let (mut units_opt, mut units_fix) = (capacity, capacity);
        let (mut profit_opt, mut profit_fix) = (0.0, 0.0);
        for t in (1..=horizon).rev() {
            let (arrives, u) = slot_draw(rng, alpha);
            if arrives {
                profit_opt += offer(&optimal, model, &mut units_opt, t, u);
                profit_fix += offer(&fixed, model, &mut units_fix, t, u);
            }
        }
        tallies[0].push(profit_opt, capacity - units_opt);
        tallies[1].push(profit_fix, capacity - units_fix);
        tallies[2].push(profit_opt - profit_fix, 0);
    });
    Ok(RegretReport {
        mean_difference: diff.profit.mean,
        paired_std_error: diff.profit.std_error(),
        optimal: opt.report(seed),
        fixed: fix.report(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(rate: f64) -> ValuationModel {
        ValuationModel::exponential(rate).unwrap()
    }

    #[test]
    fn merged_moments_match_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = Moments::default();
        let mut right = Moments::default();
        xs[..333].iter().for_each(|&x| left.push(x));
        xs[333..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert!((left.mean - whole.mean).abs() < 1e-12);
        assert!((left.m2 - whole.m2).abs() < 1e-8 * whole.m2);
    }

    #[test]
    fn no_demand_is_zero() {
        let (schedule, _) = build_pricing(&exp(1.0), 0.0, 2, 5).unwrap();
        let report = simulate_discrete(&exp(1.0), 0.0, &schedule, 2, 5, 1000, 7).unwrap();
        assert_eq!((report.mean_profit, report.std_error), (0.0, 0.0));
        assert_eq!(report.served_histogram, vec![1000, 0, 0]);
        let report = simulate_continuous(1.0, 1.0, 2, 0.0, 1000, 7).unwrap();
        assert_eq!(report.mean_profit, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (schedule, _) = build_pricing(&exp(1.0), 0.5, 2, 5).unwrap();
        assert!(matches!(
            simulate_discrete(&exp(1.0), 0.5, &schedule, 3, 5, 10, 1),
            Err(Error::ScheduleMismatch { .. })
        ));
        assert!(simulate_discrete(&exp(1.0), 0.5, &schedule, 2, 5, 0, 1).is_err());
        assert!(simulate_continuous(0.0, 1.0, 1, 1.0, 10, 1).is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let (schedule, _) = build_pricing(&exp(1.0), 0.8, 3, 10).unwrap();
        let a = simulate_discrete(&exp(1.0), 0.8, &schedule, 3, 10, 10_000, 42).unwrap();
        let b = simulate_discrete(&exp(1.0), 0.8, &schedule, 3, 10, 10_000, 42).unwrap();
        let c = simulate_discrete(&exp(1.0), 0.8, &schedule, 3, 10, 10_000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mean_profit, c.mean_profit);
        assert_eq!(a.served_histogram.iter().sum::<u64>(), 10_000);
        assert_eq!(a.rng, RNG_ALGORITHM);
    }

    #[test]
    fn small_discrete_case_matches_table() {
        let (schedule, table) = build_pricing(&exp(1.0), 0.5, 1, 2).unwrap();
        let report = simulate_discrete(&exp(1.0), 0.5, &schedule, 1, 2, 200_000, 3).unwrap();
        assert!((report.mean_profit - table.get(1, 2)).abs() < 3.0 * report.std_error);
    }

    #[test]
    fn identical_policies_have_no_regret() {
        // with k = 1 and T = 1 the optimal schedule is a single price
        let (schedule, _) = build_pricing(&exp(1.0), 0.7, 1, 1).unwrap();
        let price = schedule.get(1, 1).unwrap();
        let report = simulate_policy_regret(&exp(1.0), 0.7, 1, 1, 5_000, 9, price).unwrap();
        assert_eq!(report.optimal.mean_profit, report.fixed.mean_profit);
        assert_eq!(report.mean_difference, 0.0);
    }
}
