//! Assigning a fleet of UAVs to hotspots.
//!
//! `n` UAVs pooled at one hotspot share the service load, so capacity `k`
//! costs each of them `ck/n` energy and they all hover for
//! `T = ⌊B0 − D − ck/n⌋` slots. A deployment profile is a vector of UAV counts
//! per hotspot; its value is the sum of each pooled group's best profit.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::allocation::{
    candidates_from_table, continuous_argmax, discrete_capacity_bound, discrete_hover_slots, first_argmax,
    floor_slack, AllocationDecision, Regime,
};
use crate::error::{check_nonnegative, check_positive, check_probability, invalid, Error, Result};
use crate::pricing::{build_pricing, expected_profit_closed_form, ProfitTable};
use crate::series::{ln_truncated_exp, truncated_exp_tail};
use crate::valuations::ValuationModel;

/// Largest hotspot count accepted by [`route_oracle`].
pub const MAX_ROUTE_HOTSPOTS: usize = 3;

/// Whether hotspot rates are per-slot probabilities or Poisson rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hotspot {
    /// Per-slot occurrence probability (discrete) or arrival rate (continuous).
    pub alpha: f64,
    /// Flying distance from the station, in energy units.
    pub distance: f64,
}

impl Hotspot {
    pub fn new(alpha: f64, distance: f64) -> Self {
        Self { alpha, distance }
    }

    pub fn validate(&self, mode: Mode) -> Result<()> {
        check_nonnegative("distance", self.distance)?;
        match mode {
            Mode::Discrete => check_probability("alpha", self.alpha),
            Mode::Continuous => check_positive("alpha", self.alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetConfig {
    pub count: usize,
    pub budget: f64,
    pub service_cost: f64,
    pub valuation: ValuationModel,
}

impl FleetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(invalid("count", "fleet needs at least one UAV"));
        }
        check_positive("budget", self.budget)?;
        check_positive("service_cost", self.service_cost)
    }

    fn residual(&self, hotspot: &Hotspot) -> f64 {
        self.budget - hotspot.distance
    }

    fn reachable(&self, hotspot: &Hotspot) -> bool {
        self.residual(hotspot) > 0.0
    }

    fn exponential_rate(&self) -> Result<f64> {
        match self.valuation {
            ValuationModel::Exponential { rate } => Ok(rate),
            _ => Err(invalid("valuation", "continuous mode needs exponential valuations")),
        }
    }
}

/// UAV counts per hotspot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeploymentProfile {
    pub counts: Vec<usize>,
}

impl DeploymentProfile {
    pub fn served_hotspots(&self) -> usize {
        self.counts.iter().filter(|&&n| n > 0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub profile: DeploymentProfile,
    /// `None` where no UAV is assigned.
    pub per_hotspot: Vec<Option<AllocationDecision>>,
    pub total_profit: f64,
    /// Number of feasible profiles compared.
    pub profiles_evaluated: usize,
}

fn unreachable(index: usize, hotspot: &Hotspot, fleet: &FleetConfig) -> Error {
    Error::Unreachable {
        index,
        distance: hotspot.distance,
        budget: fleet.budget,
    }
}

/// Profit table of one hotspot, sized for pooling up to `max_uavs` UAVs.
struct PooledHotspot {
    residual: f64,
    service_cost: f64,
    table: Option<ProfitTable>,
}

impl PooledHotspot {
    fn new(hotspot: &Hotspot, fleet: &FleetConfig, max_uavs: usize) -> Result<Self> {
        let residual = fleet.residual(hotspot);
        let pooled_cost = fleet.service_cost / max_uavs as f64;
        let bound = discrete_capacity_bound(residual, pooled_cost);
        let table = if bound == 0 {
            None
        } else {
            let horizon = discrete_hover_slots(residual, pooled_cost, 1);
            Some(build_pricing(&fleet.valuation, hotspot.alpha, bound, horizon)?.1)
        };
        Ok(Self {
            residual,
            service_cost: fleet.service_cost,
            table,
        })
    }

    fn decision(&self, uavs: usize) -> AllocationDecision {
        let pooled_cost = self.service_cost / uavs as f64;
        let bound = discrete_capacity_bound(self.residual, pooled_cost);
        match &self.table {
            Some(table) if bound > 0 => {
                let candidates = candidates_from_table(table, self.residual, pooled_cost, bound);
                crate::allocation::best_discrete(&candidates)
            }
            _ => AllocationDecision {
                k_star: 0,
                t_star: floor_slack(self.residual).max(0.0),
                profit: 0.0,
                regime: Regime::NotApplicable,
            },
        }
    }
}

/// Best `(k, T)` for `uav_count` UAVs pooled at one hotspot (discrete model).
///
/// Searches `k ∈ 1..=⌊(B0 − D)/(1 + c/n)⌋` with `T = ⌊B0 − D − ck/n⌋`. An empty
/// range yields `k = 0` and zero profit.
pub fn hotspot_profit(hotspot: &Hotspot, uav_count: usize, fleet: &FleetConfig) -> Result<AllocationDecision> {
    fleet.validate()?;
    hotspot.validate(Mode::Discrete)?;
    if uav_count == 0 {
        return Err(invalid("uav_count", "at least one UAV must be assigned"));
    }
    if !fleet.reachable(hotspot) {
        return Err(unreachable(0, hotspot, fleet));
    }
    Ok(PooledHotspot::new(hotspot, fleet, uav_count)?.decision(uav_count))
}

/// Continuous-time analogue of [`hotspot_profit`]: `k ∈ 1..=⌊n(B0 − D)/c⌋`,
/// `T = B0 − D − ck/n`, closed-form profit.
pub fn hotspot_profit_continuous(
    hotspot: &Hotspot,
    uav_count: usize,
    fleet: &FleetConfig,
) -> Result<AllocationDecision> {
    fleet.validate()?;
    hotspot.validate(Mode::Continuous)?;
    let lambda = fleet.exponential_rate()?;
    if uav_count == 0 {
        return Err(invalid("uav_count", "at least one UAV must be assigned"));
    }
    if !fleet.reachable(hotspot) {
        return Err(unreachable(0, hotspot, fleet));
    }
    let residual = fleet.residual(hotspot);
    let pooled_cost = fleet.service_cost / uav_count as f64;
    let k = continuous_argmax(hotspot.alpha, residual, pooled_cost);
    let t = (residual - pooled_cost * k as f64).max(0.0);
    Ok(AllocationDecision {
        k_star: k,
        t_star: t,
        profit: if k == 0 {
            0.0
        } else {
            expected_profit_closed_form(lambda, hotspot.alpha, k, t)
        },
        regime: Regime::NotApplicable,
    })
}

/// Compositions of `total` into `parts` nonnegative parts, in descending
/// lexicographic order (`[total, 0, …]` first).
pub fn compositions(total: usize, parts: usize) -> Compositions {
    let current = (parts > 0).then(|| {
        let mut first = vec![0; parts];
        first[0] = total;
        first
    });
    Compositions { current }
}

pub struct Compositions {
    current: Option<Vec<usize>>,
}

impl Iterator for Compositions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let last = out.len() - 1;
        if let Some(i) = (0..last).rev().find(|&i| out[i] > 0) {
            let mut next = out.clone();
            let moved: usize = next[i + 1..].iter().sum::<usize>() + 1;
            next[i] -= 1;
            next[i + 1..].iter_mut().for_each(|c| *c = 0);
            next[i + 1] = moved;
            self.current = Some(next);
        }
        Some(out)
    }
}

fn validate_instance(hotspots: &[Hotspot], fleet: &FleetConfig, mode: Mode) -> Result<Vec<bool>> {
    fleet.validate()?;
    if hotspots.is_empty() {
        return Err(invalid("hotspots", "at least one hotspot is required"));
    }
    for h in hotspots {
        h.validate(mode)?;
    }
    let reachable: Vec<bool> = hotspots.iter().map(|h| fleet.reachable(h)).collect();
    if !reachable.iter().any(|&r| r) {
        return Err(Error::NoReachableHotspot { budget: fleet.budget });
    }
    Ok(reachable)
}

/// Searches every profile given a memo `memo[m][n − 1]` of pooled decisions.
/// Ties keep the earliest profile in descending lexicographic order, i.e. UAVs
/// prefer lower-index hotspots.
fn search_profiles(count: usize, reachable: &[bool], memo: &[Vec<AllocationDecision>]) -> DeploymentPlan {
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut evaluated = 0;
    for counts in compositions(count, reachable.len()) {
        if counts.iter().zip(reachable).any(|(&n, &r)| n > 0 && !r) {
            continue;
        }
        evaluated += 1;
        let total: f64 = counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(m, &n)| memo[m][n - 1].profit)
            .sum();
        let better = match &best {
            None => true,
            Some((_, b)) => first_argmax([*b, total]).map(|(i, _)| i) == Some(1),
        };
        if better {
            best = Some((counts, total));
        }
    }
    let (counts, total_profit) = best.expect("a reachable hotspot admits at least one profile");
    let per_hotspot = counts
        .iter()
        .enumerate()
        .map(|(m, &n)| (n > 0).then(|| memo[m][n - 1]))
        .collect();
    DeploymentPlan {
        profile: DeploymentProfile { counts },
        per_hotspot,
        total_profit,
        profiles_evaluated: evaluated,
    }
}

/// Profit-maximizing deployment of `fleet.count` UAVs (discrete model).
///
/// Every composition is visited; hotspot profits are memoized per
/// `(hotspot, uav count)` so only `M · N` pooled searches run.
pub fn optimal_deployment(hotspots: &[Hotspot], fleet: &FleetConfig) -> Result<DeploymentPlan> {
    let reachable = validate_instance(hotspots, fleet, Mode::Discrete)?;
    let memo = hotspots
        .iter()
        .zip(&reachable)
        .map(|(h, &r)| {
            if !r {
                return Ok(Vec::new());
            }
            let pooled = PooledHotspot::new(h, fleet, fleet.count)?;
            Ok((1..=fleet.count).map(|n| pooled.decision(n)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(search_profiles(fleet.count, &reachable, &memo))
}

/// Continuous-time closed-form analogue of [`optimal_deployment`].
pub fn optimal_deployment_continuous(hotspots: &[Hotspot], fleet: &FleetConfig) -> Result<DeploymentPlan> {
    let reachable = validate_instance(hotspots, fleet, Mode::Continuous)?;
    fleet.exponential_rate()?;
    let memo = hotspots
        .iter()
        .zip(&reachable)
        .map(|(h, &r)| {
            if !r {
                return Ok(Vec::new());
            }
            (1..=fleet.count).map(|n| hotspot_profit_continuous(h, n, fleet)).collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(search_profiles(fleet.count, &reachable, &memo))
}

/// Direct evaluation of one profile, without memoization (discrete model).
pub fn evaluate_profile(hotspots: &[Hotspot], fleet: &FleetConfig, counts: &[usize]) -> Result<DeploymentPlan> {
    validate_instance(hotspots, fleet, Mode::Discrete)?;
    if counts.len() != hotspots.len() || counts.iter().sum::<usize>() != fleet.count {
        return Err(invalid("counts", "profile must cover every hotspot and sum to the fleet size"));
    }
    let mut per_hotspot = Vec::with_capacity(counts.len());
    for (m, (h, &n)) in hotspots.iter().zip(counts).enumerate() {
        if n == 0 {
            per_hotspot.push(None);
            continue;
        }
        if !fleet.reachable(h) {
            return Err(unreachable(m, h, fleet));
        }
        per_hotspot.push(Some(hotspot_profit(h, n, fleet)?));
    }
    let total_profit = per_hotspot.iter().flatten().map(|d| d.profit).sum();
    Ok(DeploymentPlan {
        profile: DeploymentProfile { counts: counts.to_vec() },
        per_hotspot,
        total_profit,
        profiles_evaluated: 1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleHotspotChoice {
    pub index: usize,
    pub decision: AllocationDecision,
    /// Hotspot indices by single-UAV profit, best first (stable on ties).
    pub ranking: Vec<usize>,
    pub profits: Vec<f64>,
}

fn rank(profits: Vec<f64>, decisions: Vec<AllocationDecision>) -> SingleHotspotChoice {
    let (index, _) = first_argmax(profits.iter().copied()).expect("nonempty");
    let mut ranking: Vec<usize> = (0..profits.len()).collect();
    ranking.sort_by(|&a, &b| profits[b].total_cmp(&profits[a]));
    SingleHotspotChoice {
        index,
        decision: decisions[index],
        ranking,
        profits,
    }
}

fn idle(residual: f64) -> AllocationDecision {
    AllocationDecision {
        k_star: 0,
        t_star: residual.max(0.0),
        profit: 0.0,
        regime: Regime::NotApplicable,
    }
}

/// The hotspot a lone UAV should serve (discrete model), with the full
/// single-UAV ranking.
pub fn best_single_hotspot(hotspots: &[Hotspot], fleet: &FleetConfig) -> Result<SingleHotspotChoice> {
    validate_instance(hotspots, fleet, Mode::Discrete)?;
    let decisions = hotspots
        .iter()
        .map(|h| {
            if fleet.reachable(h) {
                hotspot_profit(h, 1, fleet)
            } else {
                Ok(idle(0.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let profits = decisions.iter().map(|d| d.profit).collect();
    Ok(rank(profits, decisions))
}

/// Continuous-time analogue of [`best_single_hotspot`].
pub fn best_single_hotspot_continuous(hotspots: &[Hotspot], fleet: &FleetConfig) -> Result<SingleHotspotChoice> {
    validate_instance(hotspots, fleet, Mode::Continuous)?;
    fleet.exponential_rate()?;
    let decisions = hotspots
        .iter()
        .map(|h| {
            if fleet.reachable(h) {
                hotspot_profit_continuous(h, 1, fleet)
            } else {
                Ok(idle(0.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let profits = decisions.iter().map(|d| d.profit).collect();
    Ok(rank(profits, decisions))
}

/// Hotspots plus symmetric inter-hotspot distances for single-UAV routing.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteInstance {
    hotspots: Vec<Hotspot>,
    pairwise: Vec<Vec<f64>>,
}

impl RouteInstance {
    pub fn new(hotspots: Vec<Hotspot>, pairwise: Vec<Vec<f64>>) -> Result<Self> {
        let m = hotspots.len();
        if m == 0 {
            return Err(invalid("hotspots", "at least one hotspot is required"));
        }
        if pairwise.len() != m || pairwise.iter().any(|row| row.len() != m) {
            return Err(invalid("pairwise", format!("must be a {m}×{m} matrix")));
        }
        for i in 0..m {
            if pairwise[i][i] != 0.0 {
                return Err(invalid("pairwise", "diagonal must be zero"));
            }
            for j in 0..m {
                check_nonnegative("pairwise", pairwise[i][j])?;
                if pairwise[i][j] != pairwise[j][i] {
                    return Err(invalid("pairwise", "matrix must be symmetric"));
                }
            }
        }
        Ok(Self { hotspots, pairwise })
    }

    /// Instance from planar coordinates, station at the origin.
    pub fn from_points(alphas: &[f64], points: &[(f64, f64)]) -> Result<Self> {
        if alphas.len() != points.len() {
            return Err(invalid("points", "one point per hotspot"));
        }
        let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
        let hotspots = alphas
            .iter()
            .zip(points)
            .map(|(&alpha, &p)| Hotspot::new(alpha, dist(p, (0.0, 0.0))))
            .collect();
        let pairwise = points
            .iter()
            .map(|&a| points.iter().map(|&b| dist(a, b)).collect())
            .collect();
        Self::new(hotspots, pairwise)
    }

    pub fn hotspots(&self) -> &[Hotspot] {
        &self.hotspots
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.pairwise[i][j]
    }

    /// Station to the first hotspot, then hop by hop.
    pub fn route_distance(&self, route: &[usize]) -> f64 {
        let Some(&first) = route.first() else {
            return 0.0;
        };
        self.hotspots[first].distance + route.windows(2).map(|w| self.pairwise[w[0]][w[1]]).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    /// Hotspot indices in visiting order.
    pub route: Vec<usize>,
    /// Energy left for service at each visited hotspot.
    pub energy: Vec<f64>,
    pub profit: f64,
}

/// All ordered subsets of `0..m`, shortest first.
fn ordered_subsets(m: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, m: usize, len: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for i in 0..m {
            if !prefix.contains(&i) {
                prefix.push(i);
                extend(prefix, m, len, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    for len in 1..=m {
        extend(&mut Vec::new(), m, len, &mut out);
    }
    out
}

/// Energy partitions of `total` over `parts` hotspots: every part except the
/// last is a multiple of `step`, the last takes the remainder.
fn energy_partitions(total: f64, parts: usize, step: f64) -> Vec<Vec<f64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let units = floor_slack(total / step) as usize;
    let mut out = Vec::new();
    for counts in (0..=units).flat_map(|used| compositions(used, parts - 1).map(move |c| (used, c))) {
        let (used, free) = counts;
        let mut energy: Vec<f64> = free.iter().map(|&u| u as f64 * step).collect();
        energy.push((total - used as f64 * step).max(0.0));
        out.push(energy);
    }
    out
}

fn search_routes<F>(instance: &RouteInstance, budget: f64, step: f64, value: F) -> Result<RoutePlan>
where
    F: Fn(usize, f64) -> f64,
{
    let mut best: Option<RoutePlan> = None;
    for route in ordered_subsets(instance.hotspots.len()) {
        let residual = budget - instance.route_distance(&route);
        if residual < 0.0 {
            continue;
        }
        for energy in energy_partitions(residual, route.len(), step) {
            let profit: f64 = route.iter().zip(&energy).map(|(&m, &b)| value(m, b)).sum();
            let better = match &best {
                None => true,
                Some(b) => first_argmax([b.profit, profit]).map(|(i, _)| i) == Some(1),
            };
            if better {
                best = Some(RoutePlan {
                    route: route.clone(),
                    energy,
                    profit,
                });
            }
        }
    }
    best.ok_or(Error::NoReachableHotspot { budget })
}

fn validate_route(instance: &RouteInstance, fleet: &FleetConfig, step: f64, mode: Mode) -> Result<()> {
    fleet.validate()?;
    check_positive("energy_step", step)?;
    if instance.hotspots.len() > MAX_ROUTE_HOTSPOTS {
        return Err(invalid(
            "hotspots",
            format!("route enumeration supports at most {MAX_ROUTE_HOTSPOTS} hotspots"),
        ));
    }
    instance.hotspots.iter().try_for_each(|h| h.validate(mode))
}

/// Best single-UAV route over every ordered hotspot subset and every energy
/// partition on a `step` grid (discrete model).
pub fn route_oracle(instance: &RouteInstance, fleet: &FleetConfig, step: f64) -> Result<RoutePlan> {
    validate_route(instance, fleet, step, Mode::Discrete)?;
    let bound = discrete_capacity_bound(fleet.budget, fleet.service_cost);
    let tables = instance
        .hotspots
        .iter()
        .map(|h| {
            if bound == 0 {
                return Ok(None);
            }
            let horizon = discrete_hover_slots(fleet.budget, fleet.service_cost, 1);
            Ok(Some(build_pricing(&fleet.valuation, h.alpha, bound, horizon)?.1))
        })
        .collect::<Result<Vec<_>>>()?;
    let c = fleet.service_cost;
    search_routes(instance, fleet.budget, step, |m, energy| {
        let k_max = discrete_capacity_bound(energy, c);
        match &tables[m] {
            Some(table) if k_max > 0 => candidates_from_table(table, energy, c, k_max)
                .into_iter()
                .map(|(_, _, p)| p)
                .fold(0.0, f64::max),
            _ => 0.0,
        }
    })
}

/// Continuous-time analogue of [`route_oracle`] using closed-form profits.
pub fn route_oracle_continuous(instance: &RouteInstance, fleet: &FleetConfig, step: f64) -> Result<RoutePlan> {
    validate_route(instance, fleet, step, Mode::Continuous)?;
    let lambda = fleet.exponential_rate()?;
    let c = fleet.service_cost;
    search_routes(instance, fleet.budget, step, |m, energy| {
        continuous_energy_value(lambda, instance.hotspots[m].alpha, energy, c)
    })
}

fn continuous_energy_value(lambda: f64, rate: f64, energy: f64, service_cost: f64) -> f64 {
    let k = continuous_argmax(rate, energy, service_cost);
    if k == 0 {
        return 0.0;
    }
    expected_profit_closed_form(lambda, rate, k, (energy - service_cost * k as f64).max(0.0))
}

/// Checks the monotone structure single-UAV routing relies on, on an energy
/// grid up to the fleet budget: optimal hovering time `B − ck*(B)` never
/// shrinks as `B` grows, and `k*` never shrinks as the arrival rate grows.
pub fn routing_assumption_holds(hotspots: &[Hotspot], fleet: &FleetConfig, step: f64) -> Result<bool> {
    fleet.validate()?;
    check_positive("energy_step", step)?;
    let c = fleet.service_cost;
    let mut rates: Vec<f64> = hotspots.iter().map(|h| h.alpha).collect();
    rates.sort_by(f64::total_cmp);
    let points = floor_slack(fleet.budget / step) as usize;
    let capacity = |rate: f64, energy: f64| continuous_argmax(rate, energy, c);
    for &rate in &rates {
        let mut last_hover = f64::NEG_INFINITY;
        for i in 1..=points {
            let energy = i as f64 * step;
            let k = capacity(rate, energy);
            if k == 0 {
                continue;
            }
            let hover = energy - c * k as f64;
            if hover < last_hover - 1e-9 {
                return Ok(false);
            }
            last_hover = hover;
        }
    }
    for i in 1..=points {
        let energy = i as f64 * step;
        let ks: Vec<usize> = rates.iter().map(|&r| capacity(r, energy)).collect();
        if ks.windows(2).any(|w| w[1] < w[0]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of the sufficient forking test for two hotspots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForkingCheck {
    pub holds: bool,
    pub phi: f64,
    /// `max(φ^{1/k₂*}, φ)`.
    pub threshold: f64,
    /// `α′₂ / α′₁`.
    pub ratio: f64,
    pub k2_star: usize,
}

/// `ln max_k Σ_{i=0}^{k} (α′(B0 − D − ck/n)/e)ⁱ / i!` over `k ∈ 1..=⌊n(B0 − D)/c⌋`
/// (zero when no capacity fits).
fn ln_pooled_series(rate: f64, residual: f64, service_cost: f64, uavs: usize) -> f64 {
    let pooled_cost = service_cost / uavs as f64;
    let bound = floor_slack(residual / pooled_cost).max(0.0) as usize;
    (1..=bound)
        .map(|k| ln_truncated_exp(rate * (residual - pooled_cost * k as f64).max(0.0) / E, k))
        .fold(0.0, f64::max)
}

/// Sufficient condition for the fleet to split between the first-best
/// hotspot 1 and hotspot 2 (continuous model, exponential valuations).
///
/// Moving one of `N` pooled UAVs from hotspot 1 to hotspot 2 pays off when
/// `A_N / A_{N−1} < Σ_{i=0}^{k₂*} (α′₂ y)ⁱ / i!`, with `A_n` the pooled series
/// at hotspot 1 and `y = (B0 − D₂ − ck₂*)/e`. Bounding the right side by
/// `1 + β^{k₂*} S` (for `β = α′₂/α′₁ ≤ 1`) or `1 + β S` (for `β > 1`), where
/// `S = Σ_{i=1}^{k₂*} (α′₁ y)ⁱ / i!`, gives `β > max(φ^{1/k₂*}, φ)` with
///
/// ```text
/// φ = (A_N − A_{N−1}) / (A_{N−1} · S)
/// ```
///
/// `S` is evaluated at hotspot 1's rate, exactly as the bound requires.
pub fn forking_condition(hotspot1: &Hotspot, hotspot2: &Hotspot, fleet: &FleetConfig) -> Result<ForkingCheck> {
    fleet.validate()?;
    fleet.exponential_rate()?;
    hotspot1.validate(Mode::Continuous)?;
    hotspot2.validate(Mode::Continuous)?;
    if fleet.count < 2 {
        return Err(invalid("count", "forking needs at least two UAVs"));
    }
    for (index, h) in [hotspot1, hotspot2].into_iter().enumerate() {
        if !fleet.reachable(h) {
            return Err(unreachable(index, h, fleet));
        }
    }
    let single1 = hotspot_profit_continuous(hotspot1, 1, fleet)?.profit;
    let single2 = hotspot_profit_continuous(hotspot2, 1, fleet)?.profit;
    if single2 > single1 {
        return Err(invalid("hotspot1", "hotspot 1 must be the first-best hotspot for a single UAV"));
    }
    let c = fleet.service_cost;
    let residual1 = fleet.residual(hotspot1);
    let residual2 = fleet.residual(hotspot2);
    let ratio = hotspot2.alpha / hotspot1.alpha;
    let k2_star = continuous_argmax(hotspot2.alpha, residual2, c);
    let tail = if k2_star == 0 {
        0.0
    } else {
        truncated_exp_tail(hotspot1.alpha * (residual2 - c * k2_star as f64).max(0.0) / E, k2_star)
    };
    let ln_all = ln_pooled_series(hotspot1.alpha, residual1, c, fleet.count);
    let ln_rest = ln_pooled_series(hotspot1.alpha, residual1, c, fleet.count - 1);
    // (A_N − A_{N−1}) / A_{N−1}
    let gain = (ln_all - ln_rest).exp_m1();
    let phi = if tail > 0.0 { gain / tail } else { f64::INFINITY };
    let threshold = if k2_star == 0 {
        f64::INFINITY
    } else {
        phi.powf(1.0 / k2_star as f64).max(phi)
    };
    Ok(ForkingCheck {
        holds: ratio > threshold,
        phi,
        threshold,
        ratio,
        k2_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fleet(count: usize, budget: f64, c: f64) -> FleetConfig {
        FleetConfig {
            count,
            budget,
            service_cost: c,
            valuation: ValuationModel::exponential(1.0).unwrap(),
        }
    }

    #[test]
    fn compositions_are_complete_and_ordered() {
        let all: Vec<Vec<usize>> = compositions(2, 3).collect();
        assert_eq!(
            all,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
        assert_eq!(compositions(5, 1).collect::<Vec<_>>(), vec![vec![5]]);
        assert_eq!(compositions(0, 3).count(), 1);
        assert_eq!(compositions(6, 4).count(), 84);
    }

    #[test]
    fn unreachable_hotspot_is_rejected() {
        let f = fleet(1, 20.0, 2.0);
        assert!(matches!(
            hotspot_profit(&Hotspot::new(0.5, 20.0), 1, &f),
            Err(Error::Unreachable { .. })
        ));
        assert!(matches!(
            optimal_deployment(&[Hotspot::new(0.5, 25.0)], &f),
            Err(Error::NoReachableHotspot { .. })
        ));
    }

    #[test]
    fn single_uav_matches_discrete_allocation() {
        let f = fleet(1, 20.0, 2.0);
        for (alpha, d) in [(0.3, 5.0), (0.8, 2.5), (0.6, 11.0)] {
            let h = Hotspot::new(alpha, d);
            let pooled = hotspot_profit(&h, 1, &f).unwrap();
            let direct = crate::allocation::allocate_discrete(&f.valuation, alpha, 20.0 - d, 2.0).unwrap();
            assert_eq!(pooled, direct);
        }
    }

    #[test]
    fn pooled_search_is_exhaustive() {
        let f = fleet(2, 20.0, 2.0);
        let h = Hotspot::new(0.6, 5.0);
        let decision = hotspot_profit(&h, 2, &f).unwrap();
        let (_, table) = build_pricing(&f.valuation, 0.6, 7, 15).unwrap();
        let mut best = (0, f64::NEG_INFINITY);
        for k in 1..=7 {
            let t = (15.0 - 2.0 * k as f64 / 2.0).floor() as usize;
            let v = table.get(k, t);
            if v > best.1 {
                best = (k, v);
            }
        }
        assert_eq!(decision.k_star, best.0);
        assert!((decision.profit - best.1).abs() < 1e-12);
        assert_eq!(decision.t_star, (15.0 - decision.k_star as f64).floor());
    }

    #[test]
    fn empty_capacity_range_gives_zero() {
        let f = fleet(1, 10.0, 5.0);
        let d = hotspot_profit(&Hotspot::new(0.5, 5.0), 1, &f).unwrap();
        assert_eq!((d.k_star, d.profit), (0, 0.0));
    }

    #[test]
    fn small_deployments() {
        let f = fleet(1, 20.0, 2.0);
        let plan = optimal_deployment(&[Hotspot::new(0.5, 5.0)], &f).unwrap();
        assert_eq!(plan.profile.counts, vec![1]);
        let twins = [Hotspot::new(0.5, 5.0), Hotspot::new(0.5, 5.0)];
        let plan = optimal_deployment(&twins, &f).unwrap();
        assert_eq!(plan.profile.counts, vec![1, 0]);
        assert!(plan.per_hotspot[1].is_none());
    }

    #[test]
    fn unreachable_hotspots_are_pruned_from_enumeration() {
        let f = fleet(3, 20.0, 2.0);
        let hotspots = [Hotspot::new(0.5, 5.0), Hotspot::new(0.9, 30.0), Hotspot::new(0.4, 8.0)];
        let plan = optimal_deployment(&hotspots, &f).unwrap();
        assert_eq!(plan.profile.counts[1], 0);
        // C(3 + 2 − 1, 2 − 1) profiles over the two reachable hotspots
        assert_eq!(plan.profiles_evaluated, 4);
    }

    #[test]
    fn best_single_prefers_closer_twin() {
        let f = fleet(1, 20.0, 2.0);
        let choice = best_single_hotspot(&[Hotspot::new(0.5, 9.0), Hotspot::new(0.5, 4.0)], &f).unwrap();
        assert_eq!(choice.index, 1);
        assert_eq!(choice.ranking, vec![1, 0]);
        let choice = best_single_hotspot(&[Hotspot::new(0.5, 9.0)], &f).unwrap();
        assert_eq!(choice.index, 0);
    }

    #[test]
    fn route_instance_validation() {
        let h = vec![Hotspot::new(0.5, 3.0), Hotspot::new(0.5, 4.0)];
        assert!(RouteInstance::new(h.clone(), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(RouteInstance::new(h.clone(), vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(RouteInstance::new(h, vec![vec![0.0, 5.0], vec![5.0, 0.0]]).is_ok());
        let four = RouteInstance::from_points(&[0.5; 4], &[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]).unwrap();
        assert!(route_oracle(&four, &fleet(1, 20.0, 2.0), 1.0).is_err());
    }

    #[test]
    fn single_hotspot_route_uses_all_residual_energy() {
        let instance = RouteInstance::from_points(&[0.6], &[(3.0, 4.0)]).unwrap();
        let plan = route_oracle(&instance, &fleet(1, 20.0, 2.0), 1.0).unwrap();
        assert_eq!(plan.route, vec![0]);
        assert_eq!(plan.energy, vec![15.0]);
    }

    #[test]
    fn partitions_cover_the_grid() {
        let parts = energy_partitions(3.5, 2, 1.0);
        assert_eq!(parts.len(), 4);
        assert!(parts.iter().all(|p| (p.iter().sum::<f64>() - 3.5).abs() < 1e-12));
        assert_eq!(ordered_subsets(3).len(), 3 + 6 + 6);
    }

    #[test]
    fn forking_rejects_bad_inputs() {
        let h1 = Hotspot::new(1.0, 5.0);
        let h2 = Hotspot::new(0.5, 6.0);
        assert!(forking_condition(&h1, &h2, &fleet(1, 20.0, 2.0)).is_err());
        assert!(forking_condition(&h2, &h1, &fleet(3, 20.0, 2.0)).is_err());
        let mut uniform = fleet(3, 20.0, 2.0);
        uniform.valuation = ValuationModel::uniform(5.0, 15.0).unwrap();
        assert!(forking_condition(&h1, &h2, &uniform).is_err());
    }

    #[test]
    fn forking_on_twins() {
        let f = fleet(2, 20.0, 2.0);
        let h = Hotspot::new(0.8, 5.0);
        let check = forking_condition(&h, &h, &f).unwrap();
        assert!(check.phi < 1.0, "{check:?}");
        assert!(check.holds);
        let plan = optimal_deployment_continuous(&[h, h], &f).unwrap();
        assert_eq!(plan.profile.counts, vec![1, 1]);
    }

    #[test]
    fn forking_fails_without_demand() {
        let f = fleet(3, 20.0, 2.0);
        let check = forking_condition(&Hotspot::new(1.0, 5.0), &Hotspot::new(1e-9, 5.0), &f).unwrap();
        assert!(!check.holds);
    }
}
