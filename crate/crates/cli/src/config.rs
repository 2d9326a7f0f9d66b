//! Experiment configuration: what to compute, on which class, process and
//! rule. Configs are echoed into every result file so a run can be replayed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use learnlab::classes::ClassSpec;
use learnlab::learners::{Erm, FollowTheLeader, Hedge, LearningRate, TieBreak};
use learnlab::processes::{
    AdversarialFinite, DriftSchedule, Drifting, Mixture, PointMass, ProductIid, RandomLevel,
};
use learnlab::{Distribution, FunctionClass, Loss, OffsetClass, Outcome, OutcomeSpace};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<Loss>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Series name used by plot-data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum Task {
    Dims {
        kind: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        #[serde(default)]
        witness: bool,
    },
    Complexity {
        kind: ComplexityKind,
        /// Fixed sample of domain indices for `rad`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sample: Option<Vec<usize>>,
        /// Tree for `seqrad` as a map from sign-path strings to domain indices.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tree: Option<BTreeMap<String, usize>>,
        #[serde(default)]
        mode: EstimationMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state_budget: Option<usize>,
    },
    Simulate,
    Learn {
        sample: Vec<SamplePoint>,
    },
    Regret {
        estimator: Estimator,
        #[serde(default, flatten)]
        options: RegretOptions,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexityKind {
    Rad,
    Seqrad,
    SeqradLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMode {
    #[default]
    Auto,
    Exact,
    Mc,
}

/// Sample point given by a domain point name and a label value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub x: Value,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Gen,
    Iid,
    Preq,
    Online,
    Umlln,
    Decomp,
    StationaryGap,
    MixtureArgmin,
    AdversarialRisk,
    RegressionRisk,
    RandomLevel,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretOptions {
    /// `online`: "exact" or "search".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// `regression-risk` levels and margin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Keep per-replicate values in the result.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub keep_values: bool,
}

/// Finite distribution over `(x, y)` index pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSpec {
    /// `"uniform"`.
    Named(String),
    /// `[[x, y, mass], ...]`.
    Pairs(Vec<(usize, usize, f64)>),
}

impl DistSpec {
    pub fn build(&self, space: OutcomeSpace) -> CliResult<Distribution> {
        match self {
            DistSpec::Named(name) if name == "uniform" => Ok(Distribution::uniform(space)),
            DistSpec::Named(name) => Err(CliError::usage(format!("unknown distribution {name:?}"))),
            DistSpec::Pairs(pairs) => {
                let pairs: Vec<(Outcome, f64)> = pairs.iter().map(|&(x, y, m)| (Outcome::new(x, y), m)).collect();
                if let Some((z, _)) = pairs.iter().find(|(z, _)| !space.contains(*z)) {
                    return Err(CliError::usage(format!("outcome ({}, {}) outside the outcome space", z.x, z.y)));
                }
                Ok(Distribution::from_pairs(space, &pairs)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "kebab-case")]
pub enum ProcessSpec {
    Product {
        dist: DistSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Mixture {
        lambda: f64,
        p: DistSpec,
        q: DistSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Drifting {
        start: DistSpec,
        end: DistSpec,
        /// Polynomial rate; `w_t = t/n` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    PointMass {
        /// `[[x, y], ...]` index pairs.
        sequence: Vec<(usize, usize)>,
    },
    AdversarialThreshold {
        n: usize,
    },
    RandomLevel {
        theta_star: usize,
        p_x: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
}

impl ProcessSpec {
    /// Horizon from the spec, falling back to the config-level `n`.
    pub fn horizon(&self, fallback: Option<usize>) -> CliResult<usize> {
        let n = match self {
            ProcessSpec::Product { n, .. }
            | ProcessSpec::Mixture { n, .. }
            | ProcessSpec::Drifting { n, .. }
            | ProcessSpec::RandomLevel { n, .. } => n.or(fallback),
            ProcessSpec::PointMass { sequence } => Some(sequence.len()),
            ProcessSpec::AdversarialThreshold { n } => Some(*n),
        };
        match n {
            Some(n) if n >= 1 => Ok(n),
            _ => Err(CliError::usage("process horizon n missing or zero")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::Product { .. } => "product",
            ProcessSpec::Mixture { .. } => "mixture",
            ProcessSpec::Drifting { .. } => "drifting",
            ProcessSpec::PointMass { .. } => "point-mass",
            ProcessSpec::AdversarialThreshold { .. } => "adversarial-threshold",
            ProcessSpec::RandomLevel { .. } => "random-level",
        }
    }

    /// Finite kernel over `space`.
    pub fn build_finite(&self, space: OutcomeSpace, fallback_n: Option<usize>) -> CliResult<FiniteProcess> {
        let n = self.horizon(fallback_n)?;
        Ok(match self {
            ProcessSpec::Product { dist, .. } => FiniteProcess::Product(ProductIid::new(dist.build(space)?, n)),
            ProcessSpec::Mixture { lambda, p, q, .. } => {
                FiniteProcess::Mixture(Mixture::new(*lambda, p.build(space)?, q.build(space)?, n)?)
            }
            ProcessSpec::Drifting { start, end, rate, .. } => {
                let schedule = match rate {
                    None => DriftSchedule::Linear,
                    Some(rate) => DriftSchedule::Polynomial { rate: *rate },
                };
                FiniteProcess::Drifting(Drifting::new(start.build(space)?, end.build(space)?, n, schedule)?)
            }
            ProcessSpec::PointMass { sequence } => FiniteProcess::PointMass(PointMass::new(
                space,
                sequence.iter().map(|&(x, y)| Outcome::new(x, y)).collect(),
            )?),
            ProcessSpec::AdversarialThreshold { n } => {
                let kernel = AdversarialFinite::new(*n)?;
                if learnlab::processes::FiniteKernel::space(&kernel) != space {
                    return Err(CliError::usage(
                        "adversarial-threshold needs the class {\"builder\": \"adversarial-threshold\"} with the same n",
                    ));
                }
                FiniteProcess::Adversarial(kernel)
            }
            ProcessSpec::RandomLevel { .. } => {
                return Err(CliError::usage("random-level has continuous labels; use the random-level estimator"))
            }
        })
    }

    pub fn build_random_level(&self, class: &FunctionClass, fallback_n: Option<usize>) -> CliResult<RandomLevel> {
        match self {
            ProcessSpec::RandomLevel { theta_star, p_x, .. } => Ok(RandomLevel::new(
                OffsetClass::new(class.clone())?,
                *theta_star,
                p_x.clone(),
                self.horizon(fallback_n)?,
            )?),
            _ => Err(CliError::usage("expected a random-level process")),
        }
    }
}

/// Finite-outcome kernels selectable from a config.
pub enum FiniteProcess {
    Product(ProductIid),
    Mixture(Mixture),
    Drifting(Drifting),
    PointMass(PointMass),
    Adversarial(AdversarialFinite),
}

/// Runs `$body` with `$k` bound to the concrete kernel inside a [`FiniteProcess`].
#[macro_export]
macro_rules! with_kernel {
    ($process:expr, $k:ident => $body:expr) => {
        match $process {
            $crate::config::FiniteProcess::Product($k) => $body,
            $crate::config::FiniteProcess::Mixture($k) => $body,
            $crate::config::FiniteProcess::Drifting($k) => $body,
            $crate::config::FiniteProcess::PointMass($k) => $body,
            $crate::config::FiniteProcess::Adversarial($k) => $body,
        }
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum RuleSpec {
    Erm {
        #[serde(default)]
        tie_break: TieBreak,
    },
    Hedge {
        /// Fixed learning rate; the anytime schedule when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    FollowTheLeader,
    OffsetErm,
}

impl RuleSpec {
    /// Parses a bare rule name or a JSON object.
    pub fn parse(text: &str) -> CliResult<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return Ok(serde_json::from_str(text)?);
        }
        Ok(match text {
            "erm" => RuleSpec::Erm {
                tie_break: TieBreak::LowestIndex,
            },
            "hedge" => RuleSpec::Hedge { eta: None },
            "ftl" | "follow-the-leader" => RuleSpec::FollowTheLeader,
            "offset-erm" => RuleSpec::OffsetErm,
            other => return Err(CliError::usage(format!("unknown rule {other:?}"))),
        })
    }

    pub fn batch(&self) -> CliResult<Erm> {
        match self {
            RuleSpec::Erm { tie_break } => Ok(Erm::new(*tie_break)),
            _ => Err(CliError::usage("this estimator needs a batch rule (erm)")),
        }
    }

    pub fn online(&self, class: &FunctionClass, loss: Loss) -> CliResult<OnlineChoice> {
        match self {
            RuleSpec::Hedge { eta } => Ok(OnlineChoice::Hedge(Hedge::new(
                class,
                loss,
                eta.map_or(LearningRate::Anytime, LearningRate::Fixed),
            )?)),
            RuleSpec::FollowTheLeader => Ok(OnlineChoice::Ftl(FollowTheLeader::new(class, loss)?)),
            _ => Err(CliError::usage("this estimator needs an online rule (hedge or follow-the-leader)")),
        }
    }
}

pub enum OnlineChoice {
    Hedge(Hedge),
    Ftl(FollowTheLeader),
}

#[macro_export]
macro_rules! with_online {
    ($choice:expr, $r:ident => $body:expr) => {
        match $choice {
            $crate::config::OnlineChoice::Hedge($r) => $body,
            $crate::config::OnlineChoice::Ftl($r) => $body,
        }
    };
}

/// Reads JSON either inline (text starting with `{` or `[`) or from a file.
pub fn read_json_arg<T: serde::de::DeserializeOwned>(arg: &str) -> CliResult<T> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    let text = read_file(Path::new(arg))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{arg}: {e}")))
}

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl ExperimentConfig {
    pub fn new(task: Task, seed: u64) -> Self {
        ExperimentConfig {
            task,
            class: None,
            process: None,
            rule: None,
            loss: None,
            n: None,
            reps: None,
            seed,
            tolerance: None,
            output: None,
            label: None,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    pub fn class(&self) -> CliResult<FunctionClass> {
        let spec = self.class.as_ref().ok_or_else(|| CliError::usage("config needs a class"))?;
        Ok(spec.build::<f64>()?)
    }

    pub fn process(&self) -> CliResult<&ProcessSpec> {
        self.process.as_ref().ok_or_else(|| CliError::usage("config needs a process"))
    }

    pub fn rule(&self) -> CliResult<&RuleSpec> {
        self.rule.as_ref().ok_or_else(|| CliError::usage("config needs a rule"))
    }

    pub fn loss(&self) -> CliResult<Loss> {
        self.loss.ok_or_else(|| CliError::usage("config needs a loss"))
    }

    pub fn n(&self) -> CliResult<usize> {
        self.n.ok_or_else(|| CliError::usage("config needs n"))
    }

    pub fn reps(&self) -> CliResult<usize> {
        match self.reps {
            Some(0) => Err(CliError::usage("reps must be >= 1")),
            Some(r) => Ok(r),
            None => Err(CliError::usage("config needs reps")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let text = r#"{
            "task": "regret", "estimator": "gen",
            "class": {"builder": "threshold", "k": 3},
            "process": {"process": "product", "dist": "uniform", "n": 8},
            "rule": {"rule": "erm", "tie_break": "highest-index"},
            "loss": "zero-one", "reps": 100, "seed": 7
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.rule().unwrap().batch().unwrap().tie_break, TieBreak::HighestIndex);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn seed_is_mandatory() {
        let text = r#"{"task": "dims", "kind": "vc", "class": {"builder": "threshold", "k": 3}}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn distribution_specs() {
        let space = OutcomeSpace::new(2, 2);
        let d = DistSpec::Pairs(vec![(0, 1, 0.5), (1, 0, 0.5)]).build(space).unwrap();
        assert_eq!(d.mass(Outcome::new(0, 1)), 0.5);
        assert!(DistSpec::Pairs(vec![(2, 0, 1.0)]).build(space).is_err());
        assert!(DistSpec::Named("gaussian".into()).build(space).is_err());
    }

    #[test]
    fn rule_names() {
        assert_eq!(RuleSpec::parse("hedge").unwrap(), RuleSpec::Hedge { eta: None });
        assert_eq!(
            RuleSpec::parse(r#"{"rule": "erm", "tie_break": "seeded-random"}"#).unwrap(),
            RuleSpec::Erm {
                tie_break: TieBreak::SeededRandom
            }
        );
        assert!(RuleSpec::parse("boosting").is_err());
    }
}
