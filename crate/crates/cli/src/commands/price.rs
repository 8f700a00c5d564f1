use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use uav_pricing::pricing::{build_pricing, expected_profit_closed_form, price_closed_form};

use crate::config::{self, Mode, ModelKind};
use crate::failure::{Failure, Outcome};
use crate::output::{num, show, write_csv};

/// Optimal dynamic prices and expected profits for one hovering period.
#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PriceArgs {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Exponential valuation rate.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Uniform valuation lower bound.
    #[arg(long)]
    pub a: Option<f64>,
    /// Uniform valuation upper bound.
    #[arg(long)]
    pub b: Option<f64>,
    /// Per-slot occurrence probability (discrete).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Poisson arrival rate (continuous).
    #[arg(long)]
    pub arrival_rate: Option<f64>,
    /// Service capacity.
    #[arg(long)]
    pub k: Option<usize>,
    /// Hovering time.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: Option<f64>,
    /// Time points written in continuous mode.
    #[arg(long)]
    pub points: Option<usize>,
    /// CSV destination for `j,t,price,profit`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(flags: PriceArgs) -> Outcome {
    let args = config::resolve(&flags, flags.config.as_deref())?;
    let k = config::required(args.k, "k")?;
    let horizon = config::required(args.t, "T")?;
    if k == 0 {
        return Err(Failure::config("--k must be at least 1"));
    }
    let mut rows = Vec::new();
    let total = match args.mode.unwrap_or_default() {
        Mode::Discrete => {
            let model = config::valuation(args.model, args.lambda, args.a, args.b)?;
            let alpha = config::required(args.alpha, "alpha")?;
            let slots = config::whole(horizon, "T")?;
            let (schedule, table) = build_pricing(&model, alpha, k, slots)?;
            for j in 1..=k {
                for t in 0..=slots {
                    let price = schedule.get(j, t).map(num).unwrap_or_default();
                    rows.push(vec![j.to_string(), t.to_string(), price, num(table.get(j, t))]);
                }
            }
            table.total()
        }
        Mode::Continuous => {
            let lambda = config::exponential_rate(args.model, args.lambda)?;
            let rate = config::required(args.arrival_rate, "arrival-rate")?;
            if !(lambda > 0.0) || !(rate >= 0.0) || !(horizon >= 0.0) {
                return Err(Failure::config("--lambda must be positive, --arrival-rate and --T nonnegative"));
            }
            let points = args.points.unwrap_or(101).max(2);
            for j in 1..=k {
                for i in 0..points {
                    let t = horizon * i as f64 / (points - 1) as f64;
                    rows.push(vec![
                        j.to_string(),
                        num(t),
                        num(price_closed_form(lambda, rate, j, t)),
                        num(expected_profit_closed_form(lambda, rate, j, t)),
                    ]);
                }
            }
            expected_profit_closed_form(lambda, rate, k, horizon)
        }
    };
    println!("expected profit R_{k}({}) = {}", num(horizon), show(total));
    if let Some(path) = &args.out {
        write_csv(path, "price", &config::parameter_lines(&args), &["j", "t", "price", "profit"], rows)?;
    }
    Ok(())
}
