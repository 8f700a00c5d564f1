//! Optimal dynamic pricing under incomplete information.
//!
//! The discrete model fills `R[j][t]`, the expected profit with `j` units of
//! service capacity and `t` slots left, by backward induction:
//!
//! ```text
//! R[j][t] = α (p + R[j−1][t−1]) (1 − F(p)) + R[j][t−1] (1 − α (1 − F(p)))
//! φ(p)    = R[j][t−1] − R[j−1][t−1]
//! ```
//!
//! The continuous model (Poisson arrivals at rate `α′`) has closed forms for
//! exponential valuations and an ODE oracle for any regular distribution.

use crate::error::{check_nonnegative, check_positive, check_probability, invalid, Error, Result};
use crate::series::ln_truncated_exp;
use crate::valuations::{ValuationDistribution, ValuationModel};

/// Expected-profit table `R[j][t]` for `j ∈ 0..=capacity`, `t ∈ 0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfitTable {
    alpha: f64,
    capacity: usize,
    horizon: usize,
    values: Vec<f64>,
}

impl ProfitTable {
    fn zeros(alpha: f64, capacity: usize, horizon: usize) -> Self {
        Self {
            alpha,
            capacity,
            horizon,
            values: vec![0.0; (capacity + 1) * (horizon + 1)],
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `R[j][t]`. Panics when out of range.
    pub fn get(&self, j: usize, t: usize) -> f64 {
        assert!(j <= self.capacity && t <= self.horizon, "cell ({j}, {t}) out of range");
        self.values[j * (self.horizon + 1) + t]
    }

    fn set(&mut self, j: usize, t: usize, value: f64) {
        self.values[j * (self.horizon + 1) + t] = value;
    }

    /// `R[capacity][horizon]`.
    pub fn total(&self) -> f64 {
        self.get(self.capacity, self.horizon)
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let width = self.horizon + 1;
        &self.values[j * width..(j + 1) * width]
    }
}

/// Price table `p[j][t]`, defined for `1 ≤ j ≤ capacity` and `j ≤ t ≤ horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSchedule {
    capacity: usize,
    horizon: usize,
    prices: Vec<Option<f64>>,
}

impl PriceSchedule {
    fn empty(capacity: usize, horizon: usize) -> Self {
        Self {
            capacity,
            horizon,
            prices: vec![None; (capacity + 1) * (horizon + 1)],
        }
    }

    /// Same price in every defined cell.
    pub fn constant(capacity: usize, horizon: usize, price: f64) -> Self {
        let mut schedule = Self::empty(capacity, horizon);
        for j in 1..=capacity {
            for t in j..=horizon {
                schedule.set(j, t, price);
            }
        }
        schedule
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `p[j][t]`, or `None` where no price exists (`j = 0` or `t < j`).
    pub fn get(&self, j: usize, t: usize) -> Option<f64> {
        if j > self.capacity || t > self.horizon {
            return None;
        }
        self.prices[j * (self.horizon + 1) + t]
    }

    pub fn set(&mut self, j: usize, t: usize, price: f64) {
        assert!(
            j >= 1 && j <= self.capacity && t >= j && t <= self.horizon,
            "price cell ({j}, {t}) is not defined"
        );
        self.prices[j * (self.horizon + 1) + t] = Some(price);
    }

    /// Price quoted with `j` units left and `t` slots left.
    ///
    /// Capacity beyond the remaining slots can never be sold, so a state with
    /// `j > t` prices as `(t, t)`.
    pub fn effective_price(&self, j: usize, t: usize) -> Option<f64> {
        self.get(j.min(t), t)
    }
}

/// Solves `φ(p) = delta` for the stage price.
///
/// This maximizes `(p − delta)(1 − F(p))`, the single-slot trade-off between
/// selling now and keeping the unit worth `delta` in continuation value.
pub fn solve_stage_price(model: &ValuationModel, delta: f64) -> f64 {
    model.inverse_virtual_value(delta)
}

/// One application of the profit recursion.
///
/// `r_same` is `R[j][t−1]`, `r_less` is `R[j−1][t−1]`.
pub fn profit_step(model: &ValuationModel, alpha: f64, price: f64, r_same: f64, r_less: f64) -> f64 {
    let sale = alpha * model.survival(price);
    if sale == 0.0 {
        // includes the uniform top-of-support clamp
        return r_same;
    }
    sale * (price + r_less) + r_same * (1.0 - sale)
}

fn validate_discrete(alpha: f64, capacity: usize) -> Result<()> {
    check_probability("alpha", alpha)?;
    if capacity == 0 {
        return Err(invalid("capacity", "must be at least 1"));
    }
    Ok(())
}

/// Optimal price schedule and profit table for the discrete-slot model.
///
/// `O(capacity · horizon)` stage-price solves.
pub fn build_pricing(
    model: &ValuationModel,
    alpha: f64,
    capacity: usize,
    horizon: usize,
) -> Result<(PriceSchedule, ProfitTable)> {
    validate_discrete(alpha, capacity)?;
    let mut profits = ProfitTable::zeros(alpha, capacity, horizon);
    let mut prices = PriceSchedule::empty(capacity, horizon);
    for j in 1..=capacity {
        for t in 1..=horizon {
            if t < j {
                let copied = profits.get(t, t);
                profits.set(j, t, copied);
                continue;
            }
            let r_same = profits.get(j, t - 1);
            let r_less = profits.get(j - 1, t - 1);
            let price = solve_stage_price(model, r_same - r_less);
            prices.set(j, t, price);
            profits.set(j, t, profit_step(model, alpha, price, r_same, r_less));
        }
    }
    Ok((prices, profits))
}

/// Expected profit of following `schedule` (not necessarily optimal).
pub fn evaluate_schedule(model: &ValuationModel, alpha: f64, schedule: &PriceSchedule) -> Result<ProfitTable> {
    validate_discrete(alpha, schedule.capacity)?;
    let mut profits = ProfitTable::zeros(alpha, schedule.capacity, schedule.horizon);
    for j in 1..=schedule.capacity {
        for t in 1..=schedule.horizon {
            let value = match schedule.get(j, t) {
                Some(price) if t >= j => {
                    profit_step(model, alpha, price, profits.get(j, t - 1), profits.get(j - 1, t - 1))
                }
                _ => profits.get(t.min(j), t),
            };
            profits.set(j, t, value);
        }
    }
    Ok(profits)
}

/// Expected profit `R_k(T)` with Poisson arrivals and exponential valuations:
/// `(1/λ) ln Σ_{i=0}^{k} (α′T/e)ⁱ / i!`.
pub fn expected_profit_closed_form(lambda: f64, arrival_rate: f64, capacity: usize, horizon: f64) -> f64 {
    debug_assert!(lambda > 0.0 && arrival_rate >= 0.0 && horizon >= 0.0);
    ln_truncated_exp(arrival_rate * horizon / std::f64::consts::E, capacity) / lambda
}

/// Optimal continuous-time price with `capacity` units and `time_left` remaining,
/// `1/λ + R_k(t) − R_{k−1}(t)`.
pub fn price_closed_form(lambda: f64, arrival_rate: f64, capacity: usize, time_left: f64) -> f64 {
    debug_assert!(capacity >= 1);
    let x = arrival_rate * time_left / std::f64::consts::E;
    (1.0 + ln_truncated_exp(x, capacity) - ln_truncated_exp(x, capacity - 1)) / lambda
}

/// Maximum number of step halvings attempted by [`continuous_profit_numeric`].
const MAX_HALVINGS: usize = 16;

/// Richardson tolerance between consecutive step sizes.
pub const ODE_TOLERANCE: f64 = 1e-6;

/// Continuous-time expected profit for any supported valuation model,
/// integrating `dR_j/dt = α′ (p_j − Δ_j)(1 − F(p_j))` with `φ(p_j) = Δ_j = R_j − R_{j−1}`
/// by fixed-step RK4 from `R(0) = 0`.
///
/// The step is halved until two consecutive solutions differ by less than
/// [`ODE_TOLERANCE`]; the finer solution is returned.
pub fn continuous_profit_numeric(
    model: &ValuationModel,
    arrival_rate: f64,
    capacity: usize,
    horizon: f64,
    step: f64,
) -> Result<f64> {
    check_positive("arrival_rate", arrival_rate)?;
    check_nonnegative("horizon", horizon)?;
    check_positive("step", step)?;
    if capacity == 0 {
        return Err(invalid("capacity", "must be at least 1"));
    }
    if horizon == 0.0 {
        return Ok(0.0);
    }
    let mut coarse = integrate_rk4(model, arrival_rate, capacity, horizon, step);
    let mut step = step;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        step *= 0.5;
        let fine = integrate_rk4(model, arrival_rate, capacity, horizon, step);
        change = (fine - coarse).abs();
        if change < ODE_TOLERANCE {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::NotConverged { change })
}

fn integrate_rk4(model: &ValuationModel, arrival_rate: f64, capacity: usize, horizon: f64, step: f64) -> f64 {
    let steps = (horizon / step).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    let rhs = |state: &[f64], out: &mut [f64]| {
        let mut below = 0.0;
        for (j, slot) in out.iter_mut().enumerate() {
            let delta = state[j] - below;
            let price = solve_stage_price(model, delta);
            *slot = arrival_rate * (price - delta) * model.survival(price);
            below = state[j];
        }
    };
    let mut state = vec![0.0; capacity];
    let mut k1 = vec![0.0; capacity];
    let mut k2 = vec![0.0; capacity];
    let mut k3 = vec![0.0; capacity];
    let mut k4 = vec![0.0; capacity];
    let mut probe = vec![0.0; capacity];
    for _ in 0..steps {
        rhs(&state, &mut k1);
        for i in 0..capacity {
            probe[i] = state[i] + 0.5 * h * k1[i];
        }
        rhs(&probe, &mut k2);
        for i in 0..capacity {
            probe[i] = state[i] + 0.5 * h * k2[i];
        }
        rhs(&probe, &mut k3);
        for i in 0..capacity {
            probe[i] = state[i] + h * k3[i];
        }
        rhs(&probe, &mut k4);
        for i in 0..capacity {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    state[capacity - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn exp(rate: f64) -> ValuationModel {
        ValuationModel::exponential(rate).unwrap()
    }

    fn uni(a: f64, b: f64) -> ValuationModel {
        ValuationModel::uniform(a, b).unwrap()
    }

    /// Grid search for argmax of (p − delta)(1 − F(p)).
    fn grid_stage_price(model: &ValuationModel, delta: f64, hi: f64, step: f64) -> f64 {
        let n = (hi / step) as usize;
        (0..=n)
            .map(|i| i as f64 * step)
            .max_by(|a, b| {
                let fa = (a - delta) * model.survival(*a);
                let fb = (b - delta) * model.survival(*b);
                fa.total_cmp(&fb)
            })
            .unwrap()
    }

    #[test]
    fn stage_price_examples() {
        assert_eq!(solve_stage_price(&exp(1.0), 0.0), 1.0);
        assert_eq!(solve_stage_price(&uni(5.0, 15.0), 0.0), 7.5);
        assert!((solve_stage_price(&exp(1.0), 0.3) - 1.3).abs() < 1e-12);
        let grid = grid_stage_price(&exp(1.0), 0.3, 20.0, 1e-4);
        assert!((grid - 1.3).abs() < 2e-4, "{grid}");
    }

    #[test]
    fn stage_price_clamps_into_uniform_support() {
        let m = uni(5.0, 15.0);
        assert_eq!(solve_stage_price(&m, 40.0), 15.0);
        assert_eq!(solve_stage_price(&uni(8.0, 10.0), 0.0), 8.0);
        assert_eq!(grid_stage_price(&uni(8.0, 10.0), 0.0, 12.0, 1e-3), 8.0);
    }

    #[test]
    fn profit_step_examples() {
        assert_eq!(profit_step(&exp(1.0), 0.0, 1.3, 0.7, 0.2), 0.7);
        let v = profit_step(&exp(1.0), 0.5, 1.0, 0.0, 0.0);
        assert!((v - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.183940).abs() < 1e-6);
        let v = profit_step(&uni(5.0, 15.0), 0.8, 7.5, 0.0, 0.0);
        assert!((v - 4.5).abs() < 1e-12);
        // clamped price at the top of the support never sells
        assert_eq!(profit_step(&uni(5.0, 15.0), 0.9, 15.0, 3.0, 1.0), 3.0);
    }

    #[test]
    fn build_rejects_bad_inputs() {
        assert!(build_pricing(&exp(1.0), 1.5, 2, 3).is_err());
        assert!(build_pricing(&exp(1.0), -0.1, 2, 3).is_err());
        assert!(build_pricing(&exp(1.0), 0.5, 0, 3).is_err());
        assert!(build_pricing(&exp(1.0), 0.5, 2, 0).is_ok());
    }

    #[test]
    fn no_demand_yields_zero_profit() {
        for model in [exp(1.0), uni(5.0, 15.0)] {
            let (prices, profits) = build_pricing(&model, 0.0, 4, 7).unwrap();
            let base = solve_stage_price(&model, 0.0);
            for j in 0..=4 {
                for t in 0..=7 {
                    assert_eq!(profits.get(j, t), 0.0);
                    if j >= 1 && t >= j {
                        assert_eq!(prices.get(j, t), Some(base));
                    } else {
                        assert_eq!(prices.get(j, t), None);
                    }
                }
            }
        }
    }

    #[test]
    fn hand_recursion_for_two_slots() {
        let (prices, profits) = build_pricing(&exp(1.0), 0.5, 1, 2).unwrap();
        let r11 = 0.5 * (-1.0f64).exp();
        let p12 = 1.0 + r11;
        let r12 = 0.5 * p12 * (-p12).exp() + r11 * (1.0 - 0.5 * (-p12).exp());
        assert_eq!(prices.get(1, 1), Some(1.0));
        assert!((profits.get(1, 1) - r11).abs() < 1e-15);
        assert!((prices.get(1, 2).unwrap() - p12).abs() < 1e-15);
        assert!((profits.get(1, 2) - r12).abs() < 1e-15);
        assert!((r11 - 0.183940).abs() < 1e-6);
        assert!((p12 - 1.183940).abs() < 1e-6);
        assert!((r12 - 0.336975).abs() < 1e-6, "{r12}");
    }

    #[test]
    fn figure_three_price_shape() {
        let (prices, _) = build_pricing(&exp(1.0), 0.8, 10, 10).unwrap();
        for t in 1..=10 {
            for j in 2..=t {
                assert!(prices.get(j, t).unwrap() <= prices.get(j - 1, t).unwrap() + 1e-12);
            }
        }
        for j in 1..=10 {
            for t in (j + 1)..=10 {
                assert!(prices.get(j, t).unwrap() >= prices.get(j, t - 1).unwrap() - 1e-12);
            }
        }
    }

    #[test]
    fn evaluating_the_optimal_schedule_reproduces_its_table() {
        for model in [exp(1.0), uni(5.0, 15.0)] {
            let (prices, profits) = build_pricing(&model, 0.6, 4, 12).unwrap();
            let evaluated = evaluate_schedule(&model, 0.6, &prices).unwrap();
            for j in 0..=4 {
                for t in 0..=12 {
                    assert!((evaluated.get(j, t) - profits.get(j, t)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn effective_price_folds_excess_capacity() {
        let (prices, _) = build_pricing(&exp(1.0), 0.5, 4, 6).unwrap();
        assert_eq!(prices.get(4, 2), None);
        assert_eq!(prices.effective_price(4, 2), prices.get(2, 2));
        assert_eq!(prices.effective_price(3, 6), prices.get(3, 6));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(expected_profit_closed_form(1.0, 1.0, 3, 0.0), 0.0);
        assert_eq!(expected_profit_closed_form(0.3, 2.0, 1, 0.0), 0.0);
        assert!((expected_profit_closed_form(1.0, 1.0, 1, E) - 2f64.ln()).abs() < 1e-12);
        assert!((expected_profit_closed_form(1.0, 1.0, 2, E) - 2.5f64.ln()).abs() < 1e-12);
        assert!((2.5f64.ln() - 0.916291).abs() < 1e-6);
    }

    #[test]
    fn closed_form_price_examples() {
        for k in 1..5 {
            assert_eq!(price_closed_form(2.0, 1.0, k, 0.0), 0.5);
        }
        let p1 = price_closed_form(1.0, 1.0, 1, E);
        assert!((p1 - (1.0 + 2f64.ln())).abs() < 1e-12);
        assert!((p1 - 1.693147).abs() < 1e-6);
        let p2 = price_closed_form(1.0, 1.0, 2, E);
        let p3 = price_closed_form(1.0, 1.0, 3, E);
        assert!(p1 > p2 && p2 > p3);
        assert!(2.0 * p2 <= p1 + p3);
        // price identity 1/λ + R_k − R_{k−1}
        for k in 1..6 {
            for &t in &[0.5, 1.0, 3.0] {
                let lhs = price_closed_form(0.7, 1.3, k, t);
                let rhs = 1.0 / 0.7 + expected_profit_closed_form(0.7, 1.3, k, t)
                    - expected_profit_closed_form(0.7, 1.3, k - 1, t);
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ode_oracle_matches_closed_form() {
        assert_eq!(continuous_profit_numeric(&exp(1.0), 1.0, 2, 0.0, 1e-3).unwrap(), 0.0);
        let v = continuous_profit_numeric(&exp(1.0), 1.0, 1, E, 1e-4).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-5, "{v}");
        let v = continuous_profit_numeric(&exp(1.0), 1.0, 3, E, 1e-4).unwrap();
        assert!((v - expected_profit_closed_form(1.0, 1.0, 3, E)).abs() < 1e-5);
    }

    #[test]
    fn ode_handles_bounded_support() {
        // k = 1 with uniform valuations: p = (R + b)/2 ⇒ dR/dt = α′ (b − R)² / (4(b − a)) while p ≥ a.
        // Solution from R(0) = 0: R(t) = b − 1 / (1/b + α′ t / (4(b − a))).
        let (a, b, rate, t) = (0.0, 10.0, 1.5, 2.0);
        let exact = b - 1.0 / (1.0 / b + rate * t / (4.0 * (b - a)));
        let v = continuous_profit_numeric(&uni(a, b), rate, 1, t, 1e-2).unwrap();
        assert!((v - exact).abs() < 1e-6, "{v} vs {exact}");
    }

    #[test]
    fn ode_rejects_bad_inputs() {
        assert!(continuous_profit_numeric(&exp(1.0), 0.0, 1, 1.0, 1e-3).is_err());
        assert!(continuous_profit_numeric(&exp(1.0), 1.0, 0, 1.0, 1e-3).is_err());
        assert!(continuous_profit_numeric(&exp(1.0), 1.0, 1, -1.0, 1e-3).is_err());
        assert!(continuous_profit_numeric(&exp(1.0), 1.0, 1, 1.0, 0.0).is_err());
    }
}
