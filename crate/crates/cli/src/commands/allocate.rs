use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use uav_pricing::allocation::{allocate_continuous, allocate_discrete, discrete_candidates, continuous_capacity_bound};
use uav_pricing::pricing::expected_profit_closed_form;

use crate::config::{self, Mode, ModelKind};
use crate::failure::{Failure, Outcome};
use crate::output::{num, show, write_csv};

/// Split an on-site energy budget between hovering time and service capacity.
#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AllocateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Occurrence probabilities as start:stop:step or a comma list.
    #[arg(long)]
    pub alpha_sweep: Option<String>,
    #[arg(long)]
    pub arrival_rate: Option<f64>,
    #[arg(long)]
    pub arrival_rate_sweep: Option<String>,
    /// Energy budget on site.
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub budget: Option<f64>,
    /// Energy per served user.
    #[arg(long = "c")]
    #[serde(rename = "c")]
    pub cost: Option<f64>,
    /// CSV destination for every candidate capacity.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn rates(single: Option<f64>, sweep: &Option<String>, flag: &str) -> Outcome<Vec<f64>> {
    match (single, sweep) {
        (Some(_), Some(_)) => Err(Failure::config(format!("give either --{flag} or --{flag}-sweep"))),
        (Some(v), None) => Ok(vec![v]),
        (None, Some(s)) => config::parse_sweep(s, &format!("{flag}-sweep")),
        (None, None) => Err(Failure::config(format!("missing required parameter --{flag}"))),
    }
}

pub fn run(flags: AllocateArgs) -> Outcome {
    let args = config::resolve(&flags, flags.config.as_deref())?;
    let budget = config::required(args.budget, "B")?;
    let cost = config::required(args.cost, "c")?;
    let mode = args.mode.unwrap_or_default();
    let mut rows = Vec::new();
    let header: &[&str];
    match mode {
        Mode::Discrete => {
            header = &["alpha", "k", "T", "profit", "optimal"];
            let model = config::valuation(args.model, args.lambda, args.a, args.b)?;
            let alphas = rates(args.alpha, &args.alpha_sweep, "alpha")?;
            for &alpha in &alphas {
                let decision = allocate_discrete(&model, alpha, budget, cost)?;
                if alphas.len() == 1 {
                    report(decision.k_star, decision.t_star, decision.profit, None);
                } else {
                    println!("alpha {}: k* = {}, T* = {}", num(alpha), decision.k_star, num(decision.t_star));
                }
                for (k, t, profit) in discrete_candidates(&model, alpha, budget, cost)? {
                    let optimal = u8::from(k == decision.k_star);
                    rows.push(vec![num(alpha), k.to_string(), t.to_string(), num(profit), optimal.to_string()]);
                }
            }
        }
        Mode::Continuous => {
            header = &["arrival_rate", "k", "T", "profit", "optimal", "regime"];
            let lambda = config::exponential_rate(args.model, args.lambda)?;
            let arrival_rates = rates(args.arrival_rate, &args.arrival_rate_sweep, "arrival-rate")?;
            for &rate in &arrival_rates {
                let decision = allocate_continuous(lambda, rate, budget, cost)?;
                if arrival_rates.len() == 1 {
                    report(decision.k_star, decision.t_star, decision.profit, Some(decision.regime.as_str()));
                } else {
                    println!(
                        "arrival rate {}: k* = {}, T* = {}, regime {}",
                        num(rate),
                        decision.k_star,
                        show(decision.t_star),
                        decision.regime.as_str()
                    );
                }
                for k in 1..=continuous_capacity_bound(budget, cost) {
                    let t = (budget - cost * k as f64).max(0.0);
                    rows.push(vec![
                        num(rate),
                        k.to_string(),
                        num(t),
                        num(expected_profit_closed_form(lambda, rate, k, t)),
                        u8::from(k == decision.k_star).to_string(),
                        decision.regime.as_str().to_string(),
                    ]);
                }
            }
        }
    }
    if let Some(path) = &args.out {
        write_csv(path, "allocate", &config::parameter_lines(&args), header, rows)?;
    }
    Ok(())
}

fn report(k: usize, t: f64, profit: f64, regime: Option<&str>) {
    println!("k* = {k}");
    println!("T* = {}", show(t));
    println!("profit = {}", show(profit));
    if let Some(regime) = regime {
        println!("regime = {regime}");
    }
}
