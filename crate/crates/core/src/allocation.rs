//! Splitting an on-site energy budget between hovering time and service
//! capacity.
//!
//! Serving a user costs `c` energy and hovering one slot costs one unit, so a
//! capacity of `k` leaves `T = B − ck` for hovering.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_probability, invalid, Result};
use crate::pricing::{build_pricing, expected_profit_closed_form, ProfitTable};
use crate::series::ln_truncated_exp;
use crate::valuations::ValuationModel;

/// Guards `⌊B / c⌋`-style floors against representation error (`0.3 / 0.1`).
const FLOOR_SLACK: f64 = 1e-9;

/// Profits within this relative margin are treated as tied (smallest `k` wins).
const TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn floor_slack(x: f64) -> f64 {
    (x + FLOOR_SLACK).floor()
}

/// Continuous-policy regime by arrival rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Low,
    Medium,
    High,
    NotApplicable,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Low => "low",
            Self::Medium => "medium",
            Self::High => "high",
            Self::NotApplicable => "not_applicable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationDecision {
    pub k_star: usize,
    pub t_star: f64,
    pub profit: f64,
    pub regime: Regime,
}

/// Index of the first maximum; later candidates must beat it by more than a
/// relative `TIE_TOLERANCE`.
pub(crate) fn first_argmax<I: IntoIterator<Item = f64>>(values: I) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b + TIE_TOLERANCE * b.abs().max(1.0) => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// Largest feasible capacity in the discrete model, `⌊B / (1 + c)⌋`.
pub fn discrete_capacity_bound(budget: f64, service_cost: f64) -> usize {
    floor_slack(budget / (1.0 + service_cost)).max(0.0) as usize
}

/// Hovering slots left after reserving capacity `k`, `⌊B − ck⌋`.
pub fn discrete_hover_slots(budget: f64, service_cost: f64, capacity: usize) -> usize {
    floor_slack(budget - service_cost * capacity as f64).max(0.0) as usize
}

fn validate_budget(budget: f64, service_cost: f64) -> Result<()> {
    check_positive("service_cost", service_cost)?;
    check_positive("budget", budget)
}

/// `(k, T, R_k(T))` for every feasible discrete capacity.
pub fn discrete_candidates(
    model: &ValuationModel,
    alpha: f64,
    budget: f64,
    service_cost: f64,
) -> Result<Vec<(usize, usize, f64)>> {
    check_probability("alpha", alpha)?;
    validate_budget(budget, service_cost)?;
    let bound = discrete_capacity_bound(budget, service_cost);
    if bound == 0 {
        return Err(invalid(
            "budget",
            format!("budget {budget} cannot cover one slot plus one user at cost {service_cost}"),
        ));
    }
    let (_, table) = build_pricing(model, alpha, bound, discrete_hover_slots(budget, service_cost, 1))?;
    Ok(candidates_from_table(&table, budget, service_cost, bound))
}

pub(crate) fn candidates_from_table(
    table: &ProfitTable,
    budget: f64,
    service_cost: f64,
    bound: usize,
) -> Vec<(usize, usize, f64)> {
    (1..=bound)
        .map(|k| {
            let t = discrete_hover_slots(budget, service_cost, k);
            (k, t, table.get(k, t))
        })
        .collect()
}

/// Best capacity for the discrete-slot model, searching `k ∈ 1..=⌊B/(1+c)⌋`.
pub fn allocate_discrete(
    model: &ValuationModel,
    alpha: f64,
    budget: f64,
    service_cost: f64,
) -> Result<AllocationDecision> {
    let candidates = discrete_candidates(model, alpha, budget, service_cost)?;
    Ok(best_discrete(&candidates))
}

pub(crate) fn best_discrete(candidates: &[(usize, usize, f64)]) -> AllocationDecision {
    let (index, profit) = first_argmax(candidates.iter().map(|c| c.2)).expect("at least one candidate");
    let (k, t, _) = candidates[index];
    AllocationDecision {
        k_star: k,
        t_star: t as f64,
        profit,
        regime: Regime::NotApplicable,
    }
}

/// Largest capacity in the continuous model, `⌊B / c⌋`.
pub fn continuous_capacity_bound(budget: f64, service_cost: f64) -> usize {
    floor_slack(budget / service_cost).max(0.0) as usize
}

fn hover_time(budget: f64, service_cost: f64, capacity: usize) -> f64 {
    (budget - service_cost * capacity as f64).max(0.0)
}

/// `ln Σ_{i=0}^{k} (α′(B − ck)/e)ⁱ / i!` for each `k ∈ 1..=⌊B/c⌋`.
pub fn continuous_objective(arrival_rate: f64, budget: f64, service_cost: f64) -> Vec<f64> {
    (1..=continuous_capacity_bound(budget, service_cost))
        .map(|k| ln_truncated_exp(arrival_rate * hover_time(budget, service_cost, k) / E, k))
        .collect()
}

/// Brute-force argmax of the closed-form profit over all feasible capacities.
pub fn continuous_argmax(arrival_rate: f64, budget: f64, service_cost: f64) -> usize {
    first_argmax(continuous_objective(arrival_rate, budget, service_cost))
        .map(|(i, _)| i + 1)
        .unwrap_or(0)
}

/// Arrival rate at or below which a single user is optimal, `2ce / (B − 2c)²`.
///
/// Undefined (returns `None`) when `B ≤ 2c`.
pub fn low_regime_threshold(budget: f64, service_cost: f64) -> Option<f64> {
    let gap = budget - 2.0 * service_cost;
    (gap > 0.0).then(|| 2.0 * service_cost * E / (gap * gap))
}

/// Left-hand side of the equation whose root is the high-regime threshold,
/// with `K = ⌊B/c⌋`:
///
/// ```text
/// α′/(e K!) (B − cK)^K − Σ_{i=1}^{K−1} (e/α′)^{K−i−1} / i! ((B − c(K−1))^i − (B − cK)^i)
/// ```
///
/// It is zero exactly where `R_K(B − cK) = R_{K−1}(B − c(K−1))`.
pub fn high_regime_residual(arrival_rate: f64, budget: f64, service_cost: f64) -> f64 {
    let top = continuous_capacity_bound(budget, service_cost);
    let full = hover_time(budget, service_cost, top);
    let spare = hover_time(budget, service_cost, top - 1);
    let mut factorial = 1.0;
    let mut sum = 0.0;
    for i in 1..top {
        factorial *= i as f64;
        let weight = (E / arrival_rate).powi((top - i - 1) as i32) / factorial;
        sum += weight * (spare.powi(i as i32) - full.powi(i as i32));
    }
    let lead = arrival_rate / (E * factorial * top as f64) * full.powi(top as i32);
    lead - sum
}

const ROOT_LOWER: f64 = 1e-9;
const ROOT_UPPER: f64 = 1e6;
const ROOT_TOL: f64 = 1e-10;

/// Arrival rate `ᾱ′` at or above which the maximum capacity `⌊B/c⌋` is optimal.
///
/// Infinite when `B/c` is an integer (no hovering time would remain), zero
/// when `⌊B/c⌋ = 1`.
pub fn high_regime_threshold(budget: f64, service_cost: f64) -> Result<f64> {
    validate_budget(budget, service_cost)?;
    if budget <= service_cost {
        return Err(invalid("budget", format!("{budget} must exceed service cost {service_cost}")));
    }
    let top = continuous_capacity_bound(budget, service_cost);
    if top <= 1 {
        return Ok(0.0);
    }
    if hover_time(budget, service_cost, top) <= FLOOR_SLACK * budget {
        return Ok(f64::INFINITY);
    }
    let residual = |a: f64| high_regime_residual(a, budget, service_cost);
    let mut lo = ROOT_LOWER;
    if residual(lo) >= 0.0 {
        return Ok(lo);
    }
    let mut hi = ROOT_UPPER;
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 10.0;
        if !hi.is_finite() {
            return Ok(f64::INFINITY);
        }
    }
    // bisect until the bracket stops shrinking, well past ROOT_TOL
    while hi - lo > ROOT_TOL || residual(lo).abs() > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Regime label for `(α′, B, c)`.
///
/// With `B ≤ 2c` the low threshold is undefined and only `Low`/`High` apply.
pub fn classify_regime(arrival_rate: f64, budget: f64, service_cost: f64) -> Result<Regime> {
    let high = high_regime_threshold(budget, service_cost)?;
    if let Some(low) = low_regime_threshold(budget, service_cost) {
        if arrival_rate <= low {
            return Ok(Regime::Low);
        }
        if arrival_rate >= high {
            return Ok(Regime::High);
        }
        return Ok(Regime::Medium);
    }
    Ok(if arrival_rate >= high { Regime::High } else { Regime::Low })
}

/// Capacity prescribed by a regime label: 1 when low, `⌊B/c⌋` when high,
/// and the argmax over `2..⌊B/c⌋` when medium.
pub fn regime_capacity(regime: Regime, arrival_rate: f64, budget: f64, service_cost: f64) -> usize {
    let top = continuous_capacity_bound(budget, service_cost);
    match regime {
        Regime::Low => 1,
        Regime::High => top,
        Regime::Medium => {
            let objective = continuous_objective(arrival_rate, budget, service_cost);
            let interior = objective.get(1..top.saturating_sub(1)).unwrap_or(&[]);
            first_argmax(interior.iter().copied()).map(|(i, _)| i + 2).unwrap_or(0)
        }
        Regime::NotApplicable => continuous_argmax(arrival_rate, budget, service_cost),
    }
}

/// Optimal capacity under Poisson arrivals and exponential valuations.
///
/// `k_star` is the brute-force argmax over every feasible capacity; `regime`
/// is the threshold classification. The two agree wherever the threshold
/// formulas' preconditions hold; see [`regime_capacity`].
pub fn allocate_continuous(
    lambda: f64,
    arrival_rate: f64,
    budget: f64,
    service_cost: f64,
) -> Result<AllocationDecision> {
    check_positive("lambda", lambda)?;
    check_positive("arrival_rate", arrival_rate)?;
    validate_budget(budget, service_cost)?;
    if budget <= service_cost {
        return Err(invalid("budget", format!("{budget} must exceed service cost {service_cost}")));
    }
    let regime = classify_regime(arrival_rate, budget, service_cost)?;
    let k_star = continuous_argmax(arrival_rate, budget, service_cost);
    let t_star = hover_time(budget, service_cost, k_star);
    Ok(AllocationDecision {
        k_star,
        t_star,
        profit: expected_profit_closed_form(lambda, arrival_rate, k_star, t_star),
        regime,
    })
}
