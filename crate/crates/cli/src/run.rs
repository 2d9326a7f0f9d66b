//! Executes an [`ExperimentConfig`] and renders its result as JSON.

use learnlab::complexity::{
    rademacher_fixed_sample, rademacher_worst_case, seq_rademacher_fixed_tree, seq_rademacher_loss_class,
    seq_rademacher_sup, Estimation, DEFAULT_STATE_BUDGET,
};
use learnlab::dims::{dimension, DimensionKind};
use learnlab::learners::{empirical_losses, run_prequential, BatchRule};
use learnlab::processes::{conditional_average, write_path_csv, PointMass};
use learnlab::regret::{
    adversarial_erm_risk, decomposition_report, gen_value_estimate, iid_value_estimate,
    martingale_deviation, mixture_argmin_fraction, online_worst_case, preq_value_estimate,
    random_level_estimate, regression_erm_risk, replicate_path, stationary_gap, ulln_deviation,
    WorstCaseMode,
};
use learnlab::seed::derive_seed;
use learnlab::{Distribution, FunctionClass, Outcome};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    ComplexityKind, DistSpec, EstimationMode, Estimator, ExperimentConfig, FiniteProcess, ProcessSpec,
    RegretOptions, RuleSpec, SamplePoint, Task,
};
use crate::error::{CliError, CliResult};
use crate::{with_kernel, with_online};

/// Default Monte-Carlo replicates when a config leaves `reps` out.
pub const DEFAULT_REPS: usize = 2_000;

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v)?)
}

/// Result document `{"config": ..., "result": ...}`.
pub fn run(config: &ExperimentConfig) -> CliResult<Value> {
    let result = match &config.task {
        Task::Dims { kind, gamma, witness } => run_dims(config, kind, *gamma, *witness)?,
        Task::Complexity {
            kind,
            sample,
            tree,
            mode,
            state_budget,
        } => run_complexity(config, *kind, sample.as_deref(), tree.as_ref(), *mode, *state_budget)?,
        Task::Simulate => simulate(config)?.0,
        Task::Learn { sample } => run_learn(config, sample)?,
        Task::Regret { estimator, options } => run_regret(config, *estimator, options)?,
    };
    Ok(json!({ "config": config, "result": result }))
}

pub fn to_pretty(doc: &Value) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    Ok(text)
}

fn run_dims(config: &ExperimentConfig, kind: &str, gamma: Option<f64>, witness: bool) -> CliResult<Value> {
    let class = config.class()?;
    let kind = DimensionKind::parse(kind)?;
    to_value(&dimension(&class, kind, gamma, witness)?)
}

fn estimation(config: &ExperimentConfig, mode: EstimationMode) -> Estimation {
    let reps = config.reps.unwrap_or(DEFAULT_REPS);
    match mode {
        EstimationMode::Auto => Estimation::Auto {
            reps,
            seed: config.seed,
        },
        EstimationMode::Exact => Estimation::Exact,
        EstimationMode::Mc => Estimation::MonteCarlo {
            reps,
            seed: config.seed,
        },
    }
}

fn run_complexity(
    config: &ExperimentConfig,
    kind: ComplexityKind,
    sample: Option<&[usize]>,
    tree: Option<&std::collections::BTreeMap<String, usize>>,
    mode: EstimationMode,
    state_budget: Option<usize>,
) -> CliResult<Value> {
    let class = config.class()?;
    let est = estimation(config, mode);
    let budget = state_budget.unwrap_or(DEFAULT_STATE_BUDGET);
    let value = match (kind, sample, tree) {
        (ComplexityKind::Rad, Some(sample), _) => rademacher_fixed_sample(&class, sample, est)?,
        (ComplexityKind::Rad, None, _) => rademacher_worst_case(&class, config.n()?, est)?,
        (ComplexityKind::Seqrad, _, Some(tree)) => {
            let tree = learnlab::SignTree::from_path_map(tree.iter())?;
            seq_rademacher_fixed_tree(&class, &tree, est)?
        }
        (ComplexityKind::Seqrad, _, None) => seq_rademacher_sup(&class, config.n()?, budget)?,
        (ComplexityKind::SeqradLoss, _, _) => seq_rademacher_loss_class(&class, config.loss()?, config.n()?, budget)?,
    };
    to_value(&value)
}

fn finite_process(config: &ExperimentConfig, class: &FunctionClass) -> CliResult<FiniteProcess> {
    config.process()?.build_finite(class.outcome_space(), config.n)
}

fn outcome_pairs(outcomes: &[Outcome]) -> Vec<[usize; 2]> {
    outcomes.iter().map(|z| [z.x, z.y]).collect()
}

/// Samples replicate 0 of the configured process. Returns the JSON result
/// and, for finite processes, the path as CSV.
pub fn simulate(config: &ExperimentConfig) -> CliResult<(Value, String)> {
    let class = config.class()?;
    let process = config.process()?;
    if let ProcessSpec::RandomLevel { .. } = process {
        let kernel = process.build_random_level(&class, config.n)?;
        let path = kernel.sample(derive_seed(config.seed, 0));
        let mut csv = String::from("t,x,y\n");
        for (t, (x, y)) in path.xs.iter().zip(&path.ys).enumerate() {
            csv.push_str(&format!("{},{},{}\n", t + 1, x, y));
        }
        let value = json!({
            "process": process.name(),
            "seed": derive_seed(config.seed, 0),
            "xs": path.xs,
            "ys": path.ys,
            "level": path.xi0(),
        });
        return Ok((value, csv));
    }
    let space = class.outcome_space();
    let kernel = finite_process(config, &class)?;
    with_kernel!(&kernel, k => {
        let path = replicate_path(k, config.seed, 0);
        let average = conditional_average(&path, space)?;
        let mut csv = Vec::new();
        write_path_csv(&path, &mut csv).map_err(|e| CliError::usage(e.to_string()))?;
        let value = json!({
            "process": process.name(),
            "seed": path.seed(),
            "outcomes": outcome_pairs(path.outcomes()),
            "conditional_average": average.masses(),
        });
        Ok((value, String::from_utf8(csv).expect("csv is utf-8")))
    })
}

fn point_index(class: &FunctionClass, x: &Value) -> CliResult<usize> {
    let name = match x {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(CliError::usage(format!("sample point must be a name, got {other}"))),
    };
    class
        .domain()
        .index_of(&name)
        .ok_or_else(|| CliError::usage(format!("point {name:?} is not in the domain")))
}

fn sample_outcomes(class: &FunctionClass, sample: &[SamplePoint]) -> CliResult<Vec<Outcome>> {
    sample
        .iter()
        .map(|p| {
            let x = point_index(class, &p.x)?;
            let y = class
                .labels()
                .index_of(p.y)
                .ok_or_else(|| CliError::usage(format!("label {} is not in the label space", p.y)))?;
            Ok(Outcome::new(x, y))
        })
        .collect()
}

fn member_name(class: &FunctionClass, f: usize) -> Value {
    class
        .names()
        .map_or(Value::Null, |names| Value::String(names[f].clone()))
}

fn run_learn(config: &ExperimentConfig, sample: &[SamplePoint]) -> CliResult<Value> {
    let class = config.class()?;
    let loss = config.loss()?;
    let outcomes = sample_outcomes(&class, sample)?;
    match config.rule()? {
        RuleSpec::Erm { .. } => {
            let rule = config.rule()?.batch()?;
            let f = rule.fit(&class, loss, &outcomes, derive_seed(config.seed, u64::MAX))?;
            let losses = empirical_losses(&class, loss, &outcomes)?;
            Ok(json!({
                "index": f,
                "name": member_name(&class, f),
                "empirical_loss": losses[f],
                "row": class.row(f),
            }))
        }
        RuleSpec::OffsetErm => Err(CliError::usage("offset-erm runs through the random-level estimator")),
        spec => {
            let online = spec.online(&class, loss)?;
            let kernel = PointMass::new(class.outcome_space(), outcomes)?;
            with_online!(&online, r => to_value(&run_prequential(r, &class, loss, &kernel, config.seed)?))
        }
    }
}

fn stationary_target(kernel: &FiniteProcess) -> CliResult<&Distribution> {
    match kernel {
        FiniteProcess::Product(k) => Ok(k.distribution()),
        FiniteProcess::Drifting(k) => Ok(k.end()),
        _ => Err(CliError::usage("stationary-gap needs a product or drifting process")),
    }
}

fn run_regret(config: &ExperimentConfig, estimator: Estimator, options: &RegretOptions) -> CliResult<Value> {
    let reps = config.reps.unwrap_or(DEFAULT_REPS);
    if reps == 0 {
        return Err(CliError::usage("reps must be >= 1"));
    }
    let seed = config.seed;
    let keep = |e: learnlab::RegretEstimate| if options.keep_values { e } else { e.without_values() };
    match estimator {
        Estimator::AdversarialRisk => {
            let tie_break = config.rule()?.batch()?.tie_break;
            let mut profile = adversarial_erm_risk(config.n()?, tie_break, reps, seed)?;
            profile.average = keep(profile.average);
            return to_value(&profile);
        }
        Estimator::RegressionRisk => {
            let tie_break = config.rule()?.batch()?.tie_break;
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::usage(format!("regression-risk needs {name}")));
            let mut profile = regression_erm_risk(
                config.n()?,
                need(options.high, "high")?,
                need(options.low, "low")?,
                need(options.gamma, "gamma")?,
                tie_break,
                reps,
                seed,
            )?;
            profile.average = keep(profile.average);
            return to_value(&profile);
        }
        _ => {}
    }
    let class = config.class()?;
    match estimator {
        Estimator::RandomLevel => {
            let kernel = config.process()?.build_random_level(&class, config.n)?;
            let mut report = random_level_estimate(&kernel, reps, seed)?;
            report.risk = keep(report.risk);
            report.level_error = keep(report.level_error);
            return to_value(&report);
        }
        Estimator::Iid => {
            let (dist, n) = match config.process()? {
                ProcessSpec::Product { dist, n } => (dist, n.or(config.n)),
                _ => return Err(CliError::usage("iid needs a product process")),
            };
            let n = n.ok_or_else(|| CliError::usage("iid needs n"))?;
            let dist = dist.build(class.outcome_space())?;
            let rule = config.rule()?.batch()?;
            return to_value(&keep(iid_value_estimate(&rule, &class, config.loss()?, &dist, n, reps, seed)?));
        }
        Estimator::Umlln if matches!(config.process()?, ProcessSpec::Product { .. }) => {
            let ProcessSpec::Product { dist, n } = config.process()? else { unreachable!() };
            let n = n.or(config.n).ok_or_else(|| CliError::usage("umlln needs n"))?;
            let dist: &DistSpec = dist;
            let dist = dist.build(class.outcome_space())?;
            return to_value(&keep(ulln_deviation(&class, &dist, n, reps, seed)?));
        }
        Estimator::Online => {
            let loss = config.loss()?;
            let online = config.rule()?.online(&class, loss)?;
            let mode = match options.mode.as_deref().unwrap_or("exact") {
                "exact" => WorstCaseMode::Exact,
                "search" => WorstCaseMode::Search {
                    restarts: options.restarts.unwrap_or(64),
                },
                other => return Err(CliError::usage(format!("unknown online mode {other:?}"))),
            };
            let n = config.n()?;
            return with_online!(&online, r => to_value(&online_worst_case(r, &class, loss, n, mode, seed)?));
        }
        _ => {}
    }
    let kernel = finite_process(config, &class)?;
    match estimator {
        Estimator::Gen => {
            let rule = config.rule()?.batch()?;
            let loss = config.loss()?;
            with_kernel!(&kernel, k => to_value(&keep(gen_value_estimate(&rule, &class, loss, k, reps, seed)?)))
        }
        Estimator::Preq => {
            let loss = config.loss()?;
            let online = config.rule()?.online(&class, loss)?;
            with_kernel!(&kernel, k => with_online!(&online, r =>
                to_value(&keep(preq_value_estimate(r, &class, loss, k, reps, seed)?))))
        }
        Estimator::Decomp => {
            let loss = config.loss()?;
            let online = config.rule()?.online(&class, loss)?;
            with_kernel!(&kernel, k => with_online!(&online, r => {
                let mut report = decomposition_report(r, &class, loss, k, reps, seed)?;
                report.term_i = keep(report.term_i);
                report.term_ii = keep(report.term_ii);
                report.term_iii = keep(report.term_iii);
                report.total = keep(report.total);
                to_value(&report)
            }))
        }
        Estimator::Umlln => with_kernel!(&kernel, k => to_value(&keep(martingale_deviation(k, &class, reps, seed)?))),
        Estimator::StationaryGap => {
            let loss = config.loss()?;
            let target = stationary_target(&kernel)?;
            let gaps: Vec<learnlab::regret::StationaryGap> = with_kernel!(&kernel, k => {
                (0..reps as u64)
                    .map(|i| stationary_gap(&class, loss, &replicate_path(k, seed, i), target))
                    .collect::<learnlab::Result<Vec<_>>>()?
            });
            let worst = gaps.iter().map(|g| g.gap - g.bound).fold(f64::NEG_INFINITY, f64::max);
            Ok(json!({
                "reps": reps,
                "seed": seed,
                "mean_gap": gaps.iter().map(|g| g.gap).sum::<f64>() / reps as f64,
                "mean_bound": gaps.iter().map(|g| g.bound).sum::<f64>() / reps as f64,
                "max_excess": worst,
                "within_bound": gaps.iter().all(|g| g.within_bound()),
            }))
        }
        Estimator::MixtureArgmin => match &kernel {
            FiniteProcess::Mixture(m) => {
                to_value(&keep(mixture_argmin_fraction(&class, config.loss()?, m, reps, seed)?))
            }
            _ => Err(CliError::usage("mixture-argmin needs a mixture process")),
        },
        Estimator::Iid
        | Estimator::Online
        | Estimator::AdversarialRisk
        | Estimator::RegressionRisk
        | Estimator::RandomLevel => unreachable!("handled above"),
    }
}
