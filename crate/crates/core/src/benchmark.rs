//! Complete-information benchmark.
//!
//! Here the seller sees each arriving user's valuation and accepts iff it
//! beats the option value of the unit, `θ = R̂[j][t−1] − R̂[j−1][t−1]`:
//!
//! ```text
//! R̂[j][t] = R̂[j][t−1] + α E[(v − θ)⁺]
//! ```

use crate::error::{check_probability, invalid, Result};
use crate::pricing::build_pricing;
use crate::valuations::ValuationModel;

/// `R̂[j][t]` with the same shape as a [`crate::pricing::ProfitTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkTable {
    capacity: usize,
    horizon: usize,
    values: Vec<f64>,
}

impl BenchmarkTable {
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, j: usize, t: usize) -> f64 {
        assert!(j <= self.capacity && t <= self.horizon, "cell ({j}, {t}) out of range");
        self.values[j * (self.horizon + 1) + t]
    }

    /// Acceptance threshold with `j` units and `t` slots left.
    pub fn threshold(&self, j: usize, t: usize) -> f64 {
        self.get(j, t - 1) - self.get(j - 1, t - 1)
    }

    pub fn total(&self) -> f64 {
        self.get(self.capacity, self.horizon)
    }
}

pub fn complete_info_profit(
    model: &ValuationModel,
    alpha: f64,
    capacity: usize,
    horizon: usize,
) -> Result<BenchmarkTable> {
    check_probability("alpha", alpha)?;
    if capacity == 0 {
        return Err(invalid("capacity", "must be at least 1"));
    }
    let width = horizon + 1;
    let mut values = vec![0.0; (capacity + 1) * width];
    for j in 1..=capacity {
        for t in 1..=horizon {
            let keep = values[j * width + t - 1];
            let theta = keep - values[(j - 1) * width + t - 1];
            values[j * width + t] = keep + alpha * model.expected_excess(theta);
        }
    }
    Ok(BenchmarkTable {
        capacity,
        horizon,
        values,
    })
}

/// `(T, R_k(T) / R̂_k(T))` for each horizon; a zero benchmark reports ratio 1.
pub fn profit_ratio_curve(
    model: &ValuationModel,
    alpha: f64,
    capacity: usize,
    horizons: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if horizons.is_empty() {
        return Err(invalid("horizons", "must not be empty"));
    }
    if let Some(&short) = horizons.iter().find(|&&t| t < capacity) {
        return Err(invalid(
            "horizons",
            format!("horizon {short} is shorter than capacity {capacity}"),
        ));
    }
    let longest = *horizons.iter().max().expect("nonempty");
    let (_, incomplete) = build_pricing(model, alpha, capacity, longest)?;
    let complete = complete_info_profit(model, alpha, capacity, longest)?;
    Ok(horizons
        .iter()
        .map(|&t| {
            let denominator = complete.get(capacity, t);
            let ratio = if denominator > 0.0 {
                incomplete.get(capacity, t) / denominator
            } else {
                1.0
            };
            (t, ratio)
        })
        .collect())
}

/// One row of a fixed-mean variance sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePoint {
    pub variance: f64,
    pub incomplete: f64,
    pub complete: f64,
}

/// Profits under both information regimes for uniform valuations with a
/// fixed mean and each requested variance.
pub fn variance_sweep(
    mean: f64,
    variances: &[f64],
    alpha: f64,
    capacity: usize,
    horizon: usize,
) -> Result<Vec<VariancePoint>> {
    if variances.is_empty() {
        return Err(invalid("variances", "must not be empty"));
    }
    variances
        .iter()
        .map(|&variance| {
            let model = ValuationModel::uniform_with_moments(mean, variance)?;
            let (_, incomplete) = build_pricing(&model, alpha, capacity, horizon)?;
            let complete = complete_info_profit(&model, alpha, capacity, horizon)?;
            Ok(VariancePoint {
                variance,
                incomplete: incomplete.total(),
                complete: complete.total(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(rate: f64) -> ValuationModel {
        ValuationModel::exponential(rate).unwrap()
    }

    #[test]
    fn no_demand_is_zero() {
        let table = complete_info_profit(&exp(1.0), 0.0, 3, 6).unwrap();
        for j in 0..=3 {
            for t in 0..=6 {
                assert_eq!(table.get(j, t), 0.0);
            }
        }
        let ratios = profit_ratio_curve(&exp(1.0), 0.0, 2, &[2, 5]).unwrap();
        assert!(ratios.iter().all(|&(_, r)| r == 1.0));
    }

    #[test]
    fn hand_steps() {
        let table = complete_info_profit(&exp(1.0), 0.5, 1, 2).unwrap();
        assert!((table.get(1, 1) - 0.5).abs() < 1e-15);
        let expected = 0.5 + 0.5 * (-0.5f64).exp();
        assert!((table.get(1, 2) - expected).abs() < 1e-15);
        assert!((expected - 0.803265).abs() < 1e-6);
    }

    #[test]
    fn ratio_curve_rejects_bad_horizons() {
        assert!(profit_ratio_curve(&exp(1.0), 0.5, 3, &[]).is_err());
        assert!(profit_ratio_curve(&exp(1.0), 0.5, 3, &[2, 10]).is_err());
    }

    #[test]
    fn ratio_increases_with_horizon() {
        let curve = profit_ratio_curve(&exp(1.0), 0.5, 1, &[5, 10, 20, 50]).unwrap();
        for pair in curve.windows(2) {
            assert!(pair[1].1 > pair[0].1, "{curve:?}");
        }
        assert!(curve.iter().all(|&(_, r)| r > 0.0 && r <= 1.0));
    }

    #[test]
    fn variance_sweep_validates() {
        assert!(variance_sweep(10.0, &[], 0.8, 1, 3).is_err());
        assert!(variance_sweep(10.0, &[40.0], 0.8, 1, 3).is_err());
        let point = variance_sweep(10.0, &[0.0], 0.8, 1, 1).unwrap()[0];
        // deterministic valuation 10: both regimes sell at 10 with probability α
        assert!((point.incomplete - 8.0).abs() < 1e-5);
        assert!((point.complete - 8.0).abs() < 1e-5);
    }
}
