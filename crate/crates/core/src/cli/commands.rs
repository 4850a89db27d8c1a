use std::path::PathBuf;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::config::RunConfig;
use super::output::{write_json, CsvSink};
use super::CliError;
use crate::engine::{
    Limits, PruneConfig, RngContract, Runner, Simulator, TrialRecord,
};
use crate::lab::{
    ez_series, m_tail, max_profile, z_tail, zlogz_trend, Experiment,
};
use crate::model::{classify, cumulant, OffspringLaw, StepLaw};
use crate::pathlaw::{
    ballot_asymptotic, path_probability, path_probability_exact, stay_nonnegative_masses,
    BallotKind, BarrierProfile, PathQuery, TerminalCondition, DEFAULT_BALLOT_RANGE,
};

/// Paths written by a command, for the sidecar and the failure marker.
pub struct Outputs {
    pub primary: Option<PathBuf>,
    pub extra: Vec<PathBuf>,
}

pub fn outputs(cfg: &RunConfig) -> Outputs {
    let mut extra = Vec::new();
    if let Some(p) = cfg.path("emit") {
        extra.push(p);
    }
    Outputs {
        primary: cfg.path("out"),
        extra,
    }
}

fn step_law(cfg: &RunConfig) -> Result<StepLaw, CliError> {
    Ok(cfg.require("step")?.parse::<StepLaw>()?)
}

fn offspring_law(cfg: &RunConfig) -> Result<OffspringLaw, CliError> {
    Ok(cfg.require("offspring")?.parse::<OffspringLaw>()?)
}

fn limits(cfg: &RunConfig) -> Result<Limits, CliError> {
    Ok(Limits {
        max_nodes: cfg.uint("max-nodes")?,
        max_depth: u32::try_from(cfg.uint("max-depth")?)
            .map_err(|_| CliError::Semantic("--max-depth exceeds 2^32 - 1".into()))?,
    })
}

fn support(step: &StepLaw) -> Vec<(i64, f64)> {
    step.support().to_vec()
}

pub fn run(cfg: &RunConfig, threads: usize) -> Result<(), CliError> {
    match cfg.command() {
        super::config::Command::Analyze => analyze(cfg),
        super::config::Command::Ballot => ballot(cfg),
        super::config::Command::Simulate => simulate(cfg, Runner::new(threads)?),
        super::config::Command::Series => series(cfg),
        super::config::Command::Tails => tails(cfg, Runner::new(threads)?),
    }
}

fn analyze(cfg: &RunConfig) -> Result<(), CliError> {
    let offspring = offspring_law(cfg)?;
    let step = if cfg.flag("calibrate") {
        if let Some(spec) = cfg.get("step") {
            let given: StepLaw = spec.parse()?;
            let xs: Vec<i64> = given.support().iter().map(|&(x, _)| x).collect();
            if xs != [-1, 1] {
                return Err(CliError::Semantic(
                    "--calibrate applies to laws on {-1, +1} only".into(),
                ));
            }
        }
        StepLaw::critical_plus_minus_one(offspring.mean())?
    } else {
        step_law(cfg)?
    };
    let report = classify(&step, &offspring)?;
    let at_star = cumulant(&step, report.lambda_star)?;
    #[derive(Serialize)]
    struct Analysis {
        step: Vec<(i64, f64)>,
        calibrated_p: Option<f64>,
        verdict: String,
        lambda_star: f64,
        f_star: f64,
        log_mean_offspring: f64,
        gap: f64,
        cumulant_at_star: f64,
        slope_at_star: f64,
        curvature_at_star: f64,
        report: crate::model::CriticalityReport,
    }
    let analysis = Analysis {
        calibrated_p: cfg.flag("calibrate").then(|| step.prob(1)),
        step: support(&step),
        verdict: report.verdict.to_string(),
        lambda_star: report.lambda_star,
        f_star: report.f_star,
        log_mean_offspring: report.log_mean_offspring,
        gap: report.gap(),
        cumulant_at_star: at_star.value,
        slope_at_star: at_star.slope,
        curvature_at_star: at_star.curvature,
        report,
    };
    write_json(cfg.path("out").as_deref(), cfg, analysis)
}

fn pair(text: &str, what: &str) -> Result<(i64, i64), CliError> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("{what}: expected two comma-separated integers")))?;
    Ok((int(a, what)?, int(b, what)?))
}

fn int(text: &str, what: &str) -> Result<i64, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{what}: bad integer {text:?}")))
}

fn nonneg(v: i64, what: &str) -> Result<usize, CliError> {
    usize::try_from(v).map_err(|_| CliError::Semantic(format!("{what} must be nonnegative")))
}

/// Builds the profile and the matching ballot formula, if there is one.
fn ballot_profile(
    spec: &str,
    n: usize,
    terminal: &TerminalCondition,
) -> Result<(BarrierProfile, Option<(BallotKind, i64, i64)>), CliError> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("profile: expected kind:args, got {spec:?}")))?;
    let target = match terminal {
        TerminalCondition::Equals(k) => Some(*k),
        _ => None,
    };
    Ok(match kind {
        "one_sided" => {
            let m = int(args, "one_sided")?;
            (BarrierProfile::one_sided(n, m), target.map(|k| (BallotKind::Mean0, k, m)))
        }
        "corridor" => {
            let (m, top) = pair(args, "corridor")?;
            (BarrierProfile::corridor(n, m, top), None)
        }
        "fnk" => {
            let k = int(args, "fnk")?;
            (BarrierProfile::below_target(n, k), Some((BallotKind::Fnk, k, 0)))
        }
        "useful" => {
            let (k, m0) = pair(args, "useful")?;
            let m0 = nonneg(m0, "m0")?;
            (BarrierProfile::useful(n, k, m0), Some((BallotKind::Gnk, k, 0)))
        }
        "pin" => {
            // S_i = j, with the walk kept in [0, k] for the terminal target k
            let (i, j) = pair(args, "pin")?;
            let k = target.ok_or_else(|| {
                CliError::Semantic("pin profiles need an eq:K terminal".into())
            })?;
            let i = nonneg(i, "pin index")?;
            if i > n {
                return Err(CliError::Semantic(format!("pin index {i} exceeds n = {n}")));
            }
            let profile = BarrierProfile::unconstrained(n)
                .with_interior(Some(0), Some(k))
                .with_pin(i, j);
            (profile, Some((BallotKind::Pinned { j }, k, i as i64)))
        }
        other => return Err(CliError::Usage(format!("unknown profile kind {other:?}"))),
    })
}

fn ballot(cfg: &RunConfig) -> Result<(), CliError> {
    let step = step_law(cfg)?;
    let n = cfg.uint("n")? as usize;
    let terminal_spec = cfg.require("terminal")?;
    let terminal = match terminal_spec.split_once(':') {
        Some(("eq", k)) => TerminalCondition::Equals(int(k, "terminal")?),
        Some(("ge", k)) => TerminalCondition::AtLeast(int(k, "terminal")?),
        _ => {
            return Err(CliError::Usage(format!(
                "terminal: expected eq:K or ge:K, got {terminal_spec:?}"
            )))
        }
    };
    let (profile, formula) = ballot_profile(cfg.require("profile")?, n, &terminal)?;
    let query = PathQuery::new(step, profile, terminal).with_state_cap(cfg.uint("state-cap")? as usize);

    #[derive(Serialize)]
    struct Ballot {
        probability: f64,
        exact: Option<String>,
        asymptotic: Option<f64>,
        asymptotic_note: Option<String>,
        ratio: Option<f64>,
        underflow_count: u64,
        peak_states: usize,
    }
    let (probability, exact, underflow_count, peak_states) = if cfg.flag("exact") {
        let r = path_probability_exact(&query)?;
        (r.to_f64().unwrap_or(f64::NAN), Some(r.to_string()), 0, 0)
    } else {
        let r = path_probability(&query)?;
        (r.value(), None, r.underflow_count, r.peak_states)
    };
    let (asymptotic, asymptotic_note) = match formula {
        None => (None, Some("no ballot formula for this profile".to_string())),
        Some((kind, k, m)) => match ballot_asymptotic(kind, n, k, m, DEFAULT_BALLOT_RANGE) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    write_json(
        cfg.path("out").as_deref(),
        cfg,
        Ballot {
            probability,
            exact,
            ratio: asymptotic.map(|a| probability / a),
            asymptotic,
            asymptotic_note,
            underflow_count: underflow_count as u64,
            peak_states,
        },
    )
}

/// Running mean and standard error.
#[derive(Debug, Default, Clone, Copy, Serialize)]
struct Moments {
    count: u64,
    mean: f64,
    standard_error: f64,
    #[serde(skip)]
    m2: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
        self.standard_error = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
        } else {
            0.0
        };
    }
}

#[derive(Serialize)]
struct TrialRow {
    trial: u64,
    z: u64,
    m_living: i64,
    m_all: Option<i64>,
    depth: u32,
    truncated: bool,
    bias_bound: Option<f64>,
}

const TRIAL_HEADER: [&str; 7] = ["trial", "z", "m_living", "m_all", "depth", "truncated", "bias_bound"];

#[derive(Serialize)]
struct SpineRow {
    trial: u64,
    spine_alive: bool,
    final_position: i64,
    min_position: i64,
    offspring_total: u64,
    off_spine_max: Option<i64>,
}

const SPINE_HEADER: [&str; 6] = [
    "trial",
    "spine_alive",
    "final_position",
    "min_position",
    "offspring_total",
    "off_spine_max",
];

fn simulate(cfg: &RunConfig, runner: Runner) -> Result<(), CliError> {
    let step = step_law(cfg)?;
    let offspring = offspring_law(cfg)?;
    let trials = cfg.uint("trials")?;
    let seed = cfg.uint("seed")?;
    let sim = Simulator::new(step.clone(), offspring.clone(), limits(cfg)?)?;
    let mode = cfg.require("mode")?;
    if mode == "spine" {
        return simulate_spine(cfg, &runner, &sim, &step, &offspring, trials, seed);
    }
    let maxbar = mode == "maxbar";
    let prune = PruneConfig {
        eps: cfg.float("prune-eps")?,
        frontier_budget: cfg.uint("frontier-budget")? as usize,
    };
    if maxbar && sim.lambda_star().is_none() {
        return Err(CliError::Semantic("maxbar mode needs a well-controlled step law".into()));
    }
    let mut sink = match cfg.path("emit") {
        Some(p) => Some(CsvSink::create(Some(&p), cfg, &TRIAL_HEADER)?),
        None => None,
    };

    #[derive(Serialize, Default)]
    struct Aggregate {
        trials: u64,
        truncated: u64,
        censoring_fraction: f64,
        z: Moments,
        m_living: Moments,
        m_all: Option<Moments>,
        max_z: u64,
        budget_exceeded: u64,
        bias_bound_total: Option<f64>,
        bias_bound_max: Option<f64>,
    }
    let mut agg = Aggregate {
        trials,
        ..Aggregate::default()
    };
    let mut m_all = Moments::default();
    let (mut bias_total, mut bias_max, mut certified) = (0.0f64, 0.0f64, true);
    let mut failure = None;
    runner.for_each_chunk(
        0..trials,
        |range| {
            range
                .map(|i| {
                    let mut rng = RngContract::new(seed, i).generator();
                    if maxbar {
                        sim.simulate_maxbar(i, &mut rng, prune)
                    } else {
                        sim.simulate_killed_tree(i, &mut rng)
                    }
                })
                .collect::<Vec<TrialRecord>>()
        },
        |records| {
            for r in records {
                agg.truncated += r.truncated as u64;
                agg.z.add(r.z as f64);
                agg.m_living.add(r.m_living as f64);
                agg.max_z = agg.max_z.max(r.z);
                agg.budget_exceeded += r.budget_exceeded as u64;
                if maxbar {
                    m_all.add(r.m_all as f64);
                    match r.prune_bias_bound {
                        Some(b) => {
                            bias_total += b;
                            bias_max = bias_max.max(b);
                        }
                        None => certified = false,
                    }
                }
                if let (Some(s), None) = (sink.as_mut(), &failure) {
                    let row = TrialRow {
                        trial: r.trial,
                        z: r.z,
                        m_living: r.m_living,
                        m_all: maxbar.then_some(r.m_all),
                        depth: r.depth,
                        truncated: r.truncated,
                        bias_bound: r.prune_bias_bound,
                    };
                    if let Err(e) = s.row(row) {
                        failure = Some(e);
                    }
                }
            }
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if let Some(s) = sink {
        s.finish()?;
    }
    agg.censoring_fraction = if trials == 0 { 0.0 } else { agg.truncated as f64 / trials as f64 };
    if maxbar {
        agg.m_all = Some(m_all);
        if certified {
            agg.bias_bound_total = Some(bias_total);
            agg.bias_bound_max = Some(bias_max);
        }
    }
    write_json(cfg.path("out").as_deref(), cfg, agg)
}

fn simulate_spine(
    cfg: &RunConfig,
    runner: &Runner,
    sim: &Simulator,
    step: &StepLaw,
    offspring: &OffspringLaw,
    trials: u64,
    seed: u64,
) -> Result<(), CliError> {
    let n = cfg.uint("spine-n")? as usize;
    let budget = cfg.get("offspine-budget").map(|_| cfg.uint("offspine-budget")).transpose()?;
    let mut sink = match cfg.path("emit") {
        Some(p) => Some(CsvSink::create(Some(&p), cfg, &SPINE_HEADER)?),
        None => None,
    };
    let mut alive = 0u64;
    let mut failure: Option<CliError> = None;
    runner.for_each_chunk(
        0..trials,
        |range| {
            range
                .map(|i| (i, sim.simulate_spine(&mut RngContract::new(seed, i).generator(), n, budget)))
                .collect::<Vec<_>>()
        },
        |results| {
            for (trial, r) in results {
                if failure.is_some() {
                    return;
                }
                let s = match r {
                    Ok(s) => s,
                    Err(e) => {
                        failure = Some(e.into());
                        return;
                    }
                };
                alive += s.spine_alive as u64;
                if let Some(sink) = sink.as_mut() {
                    let row = SpineRow {
                        trial,
                        spine_alive: s.spine_alive,
                        final_position: *s.spine_positions.last().expect("root"),
                        min_position: *s.spine_positions.iter().min().expect("root"),
                        offspring_total: s.offspring_counts.iter().map(|&c| c as u64).sum(),
                        off_spine_max: s
                            .off_spine_max
                            .as_ref()
                            .and_then(|v| v.iter().flatten().copied().max()),
                    };
                    if let Err(e) = sink.row(row) {
                        failure = Some(e);
                    }
                }
            }
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if let Some(s) = sink {
        s.finish()?;
    }
    let stay = stay_nonnegative_masses(step, n, crate::pathlaw::DEFAULT_STATE_CAP)
        .ok()
        .map(|m| m[n].value());
    #[derive(Serialize)]
    struct SpineAggregate {
        trials: u64,
        spine_n: usize,
        alive: u64,
        alive_fraction: f64,
        standard_error: f64,
        stay_nonnegative_exact: Option<f64>,
        level_mean_exact: Option<f64>,
    }
    let frac = if trials == 0 { 0.0 } else { alive as f64 / trials as f64 };
    write_json(
        cfg.path("out").as_deref(),
        cfg,
        SpineAggregate {
            trials,
            spine_n: n,
            alive,
            alive_fraction: frac,
            standard_error: crate::lab::stats::binomial_se(alive, trials),
            stay_nonnegative_exact: stay,
            level_mean_exact: stay.map(|p| p * offspring.mean().powi(n as i32)),
        },
    )
}

fn series(cfg: &RunConfig) -> Result<(), CliError> {
    let report = ez_series(&step_law(cfg)?, &offspring_law(cfg)?, cfg.uint("N")? as usize)?;
    write_json(cfg.path("out").as_deref(), cfg, report)
}

fn experiment(cfg: &RunConfig, runner: Runner) -> Result<Experiment, CliError> {
    let sim = Simulator::new(step_law(cfg)?, offspring_law(cfg)?, limits(cfg)?)?;
    Ok(Experiment::new(sim, runner, cfg.uint("seed")?))
}

const TAIL_HEADER: [&str; 12] = [
    "threshold",
    "hits",
    "estimate",
    "standard_error",
    "wilson_low",
    "wilson_high",
    "censored_fraction",
    "compensator",
    "point_hits",
    "point_estimate",
    "point_wilson_low",
    "point_compensator",
];

fn tails(cfg: &RunConfig, runner: Runner) -> Result<(), CliError> {
    let target = cfg.require("target")?;
    let trials = cfg.uint("trials")?;
    let out = cfg.path("out");
    let json = cfg.get("format") == Some("json");
    let exp = experiment(cfg, runner)?;
    match target {
        "z" | "m" => {
            let thresholds = cfg.list("thresholds")?;
            let table = if target == "z" {
                z_tail(&exp, trials, &thresholds)?
            } else {
                let k_max = *thresholds.iter().max().expect("non-empty list");
                m_tail(&exp, trials, k_max)?
            };
            if json {
                return write_json(out.as_deref(), cfg, table);
            }
            let mut sink = CsvSink::create(out.as_deref(), cfg, &TAIL_HEADER)?;
            for row in &table.rows {
                sink.row(row)?;
            }
            sink.finish()
        }
        "zlogz" => {
            let schedule = cfg.list("thresholds")?;
            if schedule.iter().any(|&s| s > trials) {
                return Err(CliError::Semantic(format!(
                    "zlogz sample sizes must not exceed --trials {trials}"
                )));
            }
            let rows = zlogz_trend(&exp, &schedule)?;
            if json {
                return write_json(out.as_deref(), cfg, rows);
            }
            let mut sink = CsvSink::create(out.as_deref(), cfg, &["trials", "mean", "truncated"])?;
            for row in &rows {
                sink.row(row)?;
            }
            sink.finish()
        }
        _ => {
            let profile = max_profile(&exp, trials);
            if json {
                return write_json(out.as_deref(), cfg, profile);
            }
            let mut sink =
                CsvSink::create(out.as_deref(), cfg, &["m", "generation", "isolated", "count"])?;
            for cell in &profile.cells {
                sink.row(cell)?;
            }
            sink.finish()
        }
    }
}
