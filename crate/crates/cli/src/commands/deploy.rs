use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use uav_pricing::allocation::AllocationDecision;
use uav_pricing::deployment::{
    forking_condition, optimal_deployment, optimal_deployment_continuous, DeploymentPlan, FleetConfig, Hotspot,
};
use uav_pricing::ValuationModel;

use crate::config::{self, Mode, ModelKind};
use crate::failure::{Failure, Outcome};
use crate::output::{num, show, write_csv};

/// Assign a UAV fleet to hotspots.
#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DeployArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// JSON array of {"alpha", "distance"} objects.
    #[arg(long)]
    pub hotspots: Option<PathBuf>,
    /// JSON fleet object {"count", "budget", "service_cost", "valuation"}.
    #[arg(long)]
    pub fleet: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Number of UAVs.
    #[arg(long)]
    pub count: Option<usize>,
    /// Full-charge energy of each UAV.
    #[arg(long, alias = "B0")]
    pub budget: Option<f64>,
    #[arg(long = "c")]
    #[serde(rename = "c")]
    pub cost: Option<f64>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Evaluate the sufficient forking test on a two-hotspot instance.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub check_forking: bool,
    /// CSV destination for `hotspot,n,k,T,profit`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON destination for the plan.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn fleet(args: &DeployArgs) -> Outcome<FleetConfig> {
    let base: Option<FleetConfig> = args.fleet.as_deref().map(read_json).transpose()?;
    let valuation = match (args.model, &base) {
        (Some(_), _) | (None, None) => config::valuation(args.model, args.lambda, args.a, args.b)?,
        (None, Some(f)) => f.valuation,
    };
    let pick = |flag: Option<f64>, file: Option<f64>, name: &str| config::required(flag.or(file), name);
    Ok(FleetConfig {
        count: config::required(args.count.or(base.map(|f| f.count)), "count")?,
        budget: pick(args.budget, base.map(|f| f.budget), "budget")?,
        service_cost: pick(args.cost, base.map(|f| f.service_cost), "c")?,
        valuation,
    })
}

#[derive(Serialize)]
struct PlanEntry {
    k: usize,
    #[serde(rename = "T")]
    t: f64,
    profit: f64,
}

#[derive(Serialize)]
struct PlanExport<'a> {
    profile: &'a [usize],
    per_hotspot: Vec<Option<PlanEntry>>,
    total: f64,
}

fn export(plan: &DeploymentPlan) -> PlanExport<'_> {
    PlanExport {
        profile: &plan.profile.counts,
        per_hotspot: plan
            .per_hotspot
            .iter()
            .map(|d| {
                d.map(|d: AllocationDecision| PlanEntry {
                    k: d.k_star,
                    t: d.t_star,
                    profit: d.profit,
                })
            })
            .collect(),
        total: plan.total_profit,
    }
}

pub fn run(flags: DeployArgs) -> Outcome {
    let args = config::resolve(&flags, flags.config.as_deref())?;
    let hotspots: Vec<Hotspot> = read_json(config::required_ref(&args.hotspots, "hotspots")?)?;
    let fleet = fleet(&args)?;
    let mode = args.mode.unwrap_or_default();

    if args.check_forking {
        if mode != Mode::Continuous || hotspots.len() != 2 {
            return Err(Failure::config("--check-forking needs --mode continuous and exactly two hotspots"));
        }
        if !matches!(fleet.valuation, ValuationModel::Exponential { .. }) {
            return Err(Failure::config("--check-forking needs exponential valuations"));
        }
        let check = forking_condition(&hotspots[0], &hotspots[1], &fleet)?;
        println!("phi = {}", show(check.phi));
        println!("threshold = {}", show(check.threshold));
        println!("rate ratio = {}", show(check.ratio));
        println!("k2* = {}", check.k2_star);
        println!("forking condition {}", if check.holds { "holds" } else { "fails" });
        return Ok(());
    }

    let plan = match mode {
        Mode::Discrete => optimal_deployment(&hotspots, &fleet)?,
        Mode::Continuous => optimal_deployment_continuous(&hotspots, &fleet)?,
    };
    let profile: Vec<String> = plan.profile.counts.iter().map(usize::to_string).collect();
    println!("profile = {{{}}}", profile.join(","));
    for (m, decision) in plan.per_hotspot.iter().enumerate() {
        if let Some(d) = decision {
            println!(
                "hotspot {m}: n = {}, k = {}, T = {}, profit = {}",
                plan.profile.counts[m],
                d.k_star,
                show(d.t_star),
                show(d.profit)
            );
        }
    }
    println!("total profit = {}", show(plan.total_profit));
    println!("profiles evaluated = {}", plan.profiles_evaluated);

    if let Some(path) = &args.out {
        let rows = plan.per_hotspot.iter().enumerate().map(|(m, d)| {
            let n = plan.profile.counts[m].to_string();
            match d {
                Some(d) => vec![m.to_string(), n, d.k_star.to_string(), num(d.t_star), num(d.profit)],
                None => vec![m.to_string(), n, String::new(), String::new(), String::new()],
            }
        });
        write_csv(path, "deploy", &config::parameter_lines(&args), &["hotspot", "n", "k", "T", "profit"], rows)?;
    }
    if let Some(path) = &args.json_out {
        let text = serde_json::to_string_pretty(&export(&plan)).map_err(|e| Failure::Runtime(e.into()))?;
        std::fs::write(path, text + "\n")?;
    }
    Ok(())
}
