use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use uav_pricing::pricing::build_pricing;
use uav_pricing::simulator::{simulate_continuous, simulate_discrete, simulate_policy_regret, SimulationReport};

use crate::config::{self, Mode, ModelKind};
use crate::failure::{Failure, Outcome};
use crate::output::{num, show, write_csv};

const DEFAULT_TRIALS: u64 = 100_000;

/// Monte-Carlo replay of the optimal prices.
#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateArgs {
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
    #[arg(long)]
    pub arrival_rate: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also replay this constant price on the same random draws (discrete).
    #[arg(long)]
    pub fixed_price: Option<f64>,
    /// CSV destination for `trials,mean,std_error,seed`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn row(report: &SimulationReport) -> Vec<String> {
    vec![
        report.trials.to_string(),
        num(report.mean_profit),
        num(report.std_error),
        report.seed.to_string(),
    ]
}

pub fn run(flags: SimulateArgs) -> Outcome {
    let mut args = config::resolve(&flags, flags.config.as_deref())?;
    args.trials = Some(args.trials.unwrap_or(DEFAULT_TRIALS));
    args.seed = Some(args.seed.unwrap_or(0));
    let (trials, seed) = (args.trials.unwrap_or_default(), args.seed.unwrap_or_default());
    let k = config::required(args.k, "k")?;
    let horizon = config::required(args.t, "T")?;
    if k == 0 {
        return Err(Failure::config("--k must be at least 1"));
    }
    let mode = args.mode.unwrap_or_default();
    if args.fixed_price.is_some() && mode == Mode::Continuous {
        return Err(Failure::config("--fixed-price applies to discrete mode only"));
    }
    let parameters = config::parameter_lines(&args);

    if let Some(price) = args.fixed_price {
        let model = config::valuation(args.model, args.lambda, args.a, args.b)?;
        let alpha = config::required(args.alpha, "alpha")?;
        let slots = config::whole(horizon, "T")?;
        let report = simulate_policy_regret(&model, alpha, k, slots, trials, seed, price)?;
        println!("optimal mean = {} (se {})", show(report.optimal.mean_profit), show(report.optimal.std_error));
        println!("fixed mean = {} (se {})", show(report.fixed.mean_profit), show(report.fixed.std_error));
        println!(
            "difference = {} (paired se {})",
            show(report.mean_difference),
            show(report.paired_std_error)
        );
        if let Some(path) = &args.out {
            let rows = [("optimal", &report.optimal), ("fixed", &report.fixed)].map(|(name, r)| {
                let mut cells = vec![name.to_string()];
                cells.extend(row(r));
                cells
            });
            write_csv(path, "simulate", &parameters, &["policy", "trials", "mean", "std_error", "seed"], rows)?;
        }
        return Ok(());
    }

    let report = match mode {
        Mode::Discrete => {
            let model = config::valuation(args.model, args.lambda, args.a, args.b)?;
            let alpha = config::required(args.alpha, "alpha")?;
            let slots = config::whole(horizon, "T")?;
            let (schedule, _) = build_pricing(&model, alpha, k, slots)?;
            simulate_discrete(&model, alpha, &schedule, k, slots, trials, seed)?
        }
        Mode::Continuous => {
            let lambda = config::exponential_rate(args.model, args.lambda)?;
            let rate = config::required(args.arrival_rate, "arrival-rate")?;
            simulate_continuous(lambda, rate, k, horizon, trials, seed)?
        }
    };
    println!("mean profit = {}", show(report.mean_profit));
    println!("std error = {}", show(report.std_error));
    let served: Vec<String> = report.served_histogram.iter().map(u64::to_string).collect();
    println!("served histogram = [{}]", served.join(", "));
    println!("rng = {}, seed = {}", report.rng, report.seed);
    if let Some(path) = &args.out {
        write_csv(path, "simulate", &parameters, &["trials", "mean", "std_error", "seed"], [row(&report)])?;
    }
    Ok(())
}
