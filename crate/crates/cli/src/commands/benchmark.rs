use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use uav_pricing::benchmark::{profit_ratio_curve, variance_sweep};

use crate::config::{self, ModelKind};
use crate::failure::{Failure, Outcome};
use crate::output::{num, show, write_csv};

/// Compare against the complete-information benchmark.
#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BenchmarkArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Profit ratio versus hovering time, one column per capacity.
    #[arg(long, conflicts_with = "variance")]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ratio: bool,
    /// Profits versus valuation variance at a fixed uniform mean.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub variance: bool,
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
    /// Capacities, comma-separated.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long = "T-max")]
    #[serde(rename = "T-max")]
    pub t_max: Option<usize>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: Option<usize>,
    /// Uniform valuation mean for the variance sweep.
    #[arg(long)]
    pub mean: Option<f64>,
    /// Variances as start:stop:step or a comma list.
    #[arg(long)]
    pub variances: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const DEFAULT_VARIANCE_ALPHA: f64 = 0.8;

pub fn run(flags: BenchmarkArgs) -> Outcome {
    let mut args = config::resolve(&flags, flags.config.as_deref())?;
    match (args.ratio, args.variance) {
        (true, false) => ratio(args),
        (false, true) => {
            args.alpha = Some(args.alpha.unwrap_or(DEFAULT_VARIANCE_ALPHA));
            args.k = Some(args.k.unwrap_or_else(|| "1".to_string()));
            variance(args)
        }
        _ => Err(Failure::config("choose exactly one of --ratio or --variance")),
    }
}

fn ratio(args: BenchmarkArgs) -> Outcome {
    let model = config::valuation(args.model, args.lambda, args.a, args.b)?;
    let alpha = config::required(args.alpha, "alpha")?;
    let capacities = config::parse_counts(config::required_ref(&args.k, "k")?, "k")?;
    let t_max = config::required(args.t_max, "T-max")?;
    let t_min = *capacities.iter().max().expect("nonempty");
    if t_max < t_min {
        return Err(Failure::config(format!("--T-max must be at least the largest capacity {t_min}")));
    }
    let horizons: Vec<usize> = (t_min..=t_max).collect();
    let curves = capacities
        .iter()
        .map(|&k| profit_ratio_curve(&model, alpha, k, &horizons))
        .collect::<Result<Vec<_>, _>>()?;
    for (k, curve) in capacities.iter().zip(&curves) {
        let (t, r) = curve.last().expect("nonempty");
        println!("k = {k}: ratio at T = {t} is {}", show(*r));
    }
    if let Some(path) = &args.out {
        let mut header = vec!["T".to_string()];
        header.extend(capacities.iter().map(|k| format!("ratio_k{k}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = horizons.iter().enumerate().map(|(i, t)| {
            let mut row = vec![t.to_string()];
            row.extend(curves.iter().map(|c| num(c[i].1)));
            row
        });
        write_csv(path, "benchmark", &config::parameter_lines(&args), &header, rows)?;
    }
    Ok(())
}

fn variance(args: BenchmarkArgs) -> Outcome {
    let mean = config::required(args.mean, "mean")?;
    let horizon = config::required(args.t, "T")?;
    let variances = config::parse_sweep(config::required_ref(&args.variances, "variances")?, "variances")?;
    let alpha = config::required(args.alpha, "alpha")?;
    let capacities = config::parse_counts(config::required_ref(&args.k, "k")?, "k")?;
    if capacities.len() != 1 {
        return Err(Failure::config("the variance sweep takes a single --k"));
    }
    let points = variance_sweep(mean, &variances, alpha, capacities[0], horizon)?;
    for p in &points {
        println!(
            "variance {}: incomplete {}, complete {}",
            num(p.variance),
            show(p.incomplete),
            show(p.complete)
        );
    }
    if let Some(path) = &args.out {
        let rows = points
            .iter()
            .map(|p| vec![num(p.variance), num(p.incomplete), num(p.complete)]);
        write_csv(
            path,
            "benchmark",
            &config::parameter_lines(&args),
            &["variance", "incomplete", "complete"],
            rows,
        )?;
    }
    Ok(())
}
