//! Regret functionals and Monte-Carlo estimators of the minimax values.
//!
//! Every estimator samples replicate `i` from the seed `derive_seed(seed, i)`
//! and reduces in replicate order, so results do not depend on scheduling.
//! Averages over time use [`stable_mean`], which is exact on constant
//! sequences; this is what makes the product and point-mass reductions hold
//! with zero tolerance.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{expected_loss, Distribution, FiniteFunctionClass, Loss, Outcome};
use crate::complexity::mean_stderr;
use crate::learners::{
    argmin_set, path_losses, replay, stable_mean, BatchRule, OddThresholds, OnlineRule, TieBreak,
};
use crate::processes::{
    conditional_average, sample_path, AdversarialThreshold, Conditional, FiniteKernel, Kernel, Labeled,
    Mixture, MixtureComponent, Path, RandomLevel, RegressionTransform,
};
use crate::seed::{derive_seed, replicate, rng_from_seed};
use crate::{Error, Result};

/// Mean and standard error of per-replicate values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl RegretEstimate {
    pub fn from_values(values: Vec<f64>, seed: u64) -> Self {
        let (mean, stderr) = mean_stderr(&values);
        RegretEstimate {
            mean,
            stderr,
            reps: values.len(),
            seed,
            values: Some(values),
        }
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn without_values(mut self) -> Self {
        self.values = None;
        self
    }

    /// `mean <= bound + k * stderr`.
    pub fn below(&self, bound: f64, k: f64) -> bool {
        self.mean <= bound + k * self.stderr
    }

    /// `mean >= bound - k * stderr`.
    pub fn above(&self, bound: f64, k: f64) -> bool {
        self.mean >= bound - k * self.stderr
    }
}

fn collect<T>(values: Vec<Result<T>>) -> Result<Vec<T>> {
    values.into_iter().collect()
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    Ok(())
}

fn check_kernel<K: FiniteKernel>(class: &FiniteFunctionClass<f64>, kernel: &K) -> Result<()> {
    if kernel.space() != class.outcome_space() {
        return Err(Error::invalid("kernel and class have different outcome spaces"));
    }
    Ok(())
}

/// Seed handed to a rule fitted on replicate `rep_seed`.
fn rule_seed(rep_seed: u64) -> u64 {
    derive_seed(rep_seed, u64::MAX)
}

/// `l(P, f) - min_g l(P, g)`.
pub fn p_regret(class: &FiniteFunctionClass<f64>, loss: Loss, dist: &Distribution<f64>, f: usize) -> Result<f64> {
    let risks = (0..class.size())
        .map(|g| expected_loss(class, loss, dist, g))
        .collect::<Result<Vec<_>>>()?;
    let min = risks.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(risks[f] - min)
}

/// `R_n(Z, f)` for every member: the average of the `P_t`-regrets along `path`.
pub fn process_regrets<H>(class: &FiniteFunctionClass<f64>, loss: Loss, path: &Path<Outcome, H>) -> Result<Vec<f64>> {
    loss.check_compatible(class.labels())?;
    let (_, cond) = path_losses(class, loss, path);
    let per_step: Vec<Vec<f64>> = cond
        .iter()
        .map(|risks| {
            let min = risks.iter().cloned().fold(f64::INFINITY, f64::min);
            risks.iter().map(|r| r - min).collect()
        })
        .collect();
    Ok((0..class.size())
        .map(|f| stable_mean(&per_step.iter().map(|r| r[f]).collect::<Vec<_>>()))
        .collect())
}

pub fn process_regret<H>(
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    path: &Path<Outcome, H>,
    f: usize,
) -> Result<f64> {
    if f >= class.size() {
        return Err(Error::invalid(format!("member {f} outside the class")));
    }
    Ok(process_regrets(class, loss, path)?[f])
}

/// Estimator of the generalization regret `R_n(Z, f_hat) - min_f R_n(Z, f)`
/// of a batch rule under `kernel`.
pub fn gen_value_estimate<B: BatchRule, K: FiniteKernel>(
    rule: &B,
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    kernel: &K,
    reps: usize,
    seed: u64,
) -> Result<RegretEstimate> {
    check_reps(reps)?;
    check_kernel(class, kernel)?;
    let values = replicate(reps, seed, |s| {
        let path = sample_path(kernel, s);
        let f_hat = rule.fit(class, loss, path.outcomes(), rule_seed(s))?;
        let r = process_regrets(class, loss, &path)?;
        let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(r[f_hat] - min)
    });
    Ok(RegretEstimate::from_values(collect(values)?, seed))
}

/// Iid estimator `E[l(P, f_hat) - min_f l(P, f)]` with samples drawn directly
/// from `dist`, using the same per-replicate random streams as
/// [`gen_value_estimate`] on a product kernel.
pub fn iid_value_estimate<B: BatchRule>(
    rule: &B,
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    dist: &Distribution<f64>,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<RegretEstimate> {
    check_reps(reps)?;
    let cond = Conditional::from_distribution(dist);
    let values = replicate(reps, seed, |s| {
        let mut rng = rng_from_seed(s);
        let sample: Vec<Outcome> = (0..n).map(|_| cond.sample(&mut rng)).collect();
        let f_hat = rule.fit(class, loss, &sample, rule_seed(s))?;
        p_regret(class, loss, dist, f_hat)
    });
    Ok(RegretEstimate::from_values(collect(values)?, seed))
}

/// Quantities of one prequential run used by several estimators.
struct PreqRun {
    /// `(1/n) sum_t E_{f~p_t} l(P_t, f)`
    conditional: f64,
    /// `(1/n) sum_t E_{f~p_t} l(z_t, f)`
    realized: f64,
    /// `min_f (1/n) sum_t l(z_t, f)`
    empirical_min: f64,
    /// `min_f (1/n) sum_t l(P_t, f)`
    conditional_min: f64,
}

fn preq_run<R: OnlineRule, H>(
    rule: &R,
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    path: &Path<Outcome, H>,
) -> Result<PreqRun> {
    let tr = replay(rule, class, loss, path)?;
    let (realized, cond) = path_losses(class, loss, path);
    let column_min = |table: &[Vec<f64>]| {
        (0..class.size())
            .map(|f| stable_mean(&table.iter().map(|r| r[f]).collect::<Vec<_>>()))
            .fold(f64::INFINITY, f64::min)
    };
    Ok(PreqRun {
        conditional: stable_mean(&tr.steps.iter().map(|s| s.conditional_risk).collect::<Vec<_>>()),
        realized: stable_mean(&tr.steps.iter().map(|s| s.loss).collect::<Vec<_>>()),
        empirical_min: column_min(&realized),
        conditional_min: column_min(&cond),
    })
}

/// Estimator of the prequential regret
/// `(1/n) sum_t E_{p_t} l(P_t, .) - min_f (1/n) sum_t l(P_t, f)`.
pub fn preq_value_estimate<R: OnlineRule, K: FiniteKernel>(
    rule: &R,
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    kernel: &K,
    reps: usize,
    seed: u64,
) -> Result<RegretEstimate> {
    check_reps(reps)?;
    check_kernel(class, kernel)?;
    let values = replicate(reps, seed, |s| {
        let run = preq_run(rule, class, loss, &sample_path(kernel, s))?;
        Ok(run.conditional - run.conditional_min)
    });
    Ok(RegretEstimate::from_values(collect(values)?, seed))
}

/// `(1/n) sum_t E_{p_t} l(z_t, .) - min_f (1/n) sum_t l(z_t, f)` on a fixed sequence.
pub fn individual_sequence_regret<R: OnlineRule>(
    rule: &R,
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    sequence: &[Outcome],
) -> Result<f64> {
    loss.check_compatible(class.labels())?;
    let space = class.outcome_space();
    if let Some(z) = sequence.iter().find(|z| !space.contains(**z)) {
        return Err(Error::invalid(format!("outcome {z:?} outside the outcome space")));
    }
    let mut rule = rule.clone();
    let mut incurred = Vec::with_capacity(sequence.len());
    for &z in sequence {
        let p = rule.predict();
        incurred.push(p.iter().enumerate().map(|(f, w)| w * class.loss(loss, z, f)).sum::<f64>());
        rule.update(z);
    }
    let best = (0..class.size())
        .map(|f| stable_mean(&sequence.iter().map(|&z| class.loss(loss, z, f)).collect::<Vec<_>>()))
        .fold(f64::INFINITY, f64::min);
    Ok(stable_mean(&incurred) - best)
}

pub const MAX_EXACT_SEQUENCES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorstCaseMode {
    Exact,
    Search { restarts: usize },
}

/// Largest individual-sequence regret found and a sequence attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub value: f64,
    pub sequence: Vec<Outcome>,
    /// Set when the value comes from a search rather than full enumeration.
    pub lower_estimate: bool,
    pub evaluated: usize,
}

/// Worst-case individual-sequence regret of `rule` over `Z^n`.
pub fn online_worst_case<R: OnlineRule>(
    rule: &R,
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    n: usize,
    mode: WorstCaseMode,
    seed: u64,
) -> Result<WorstCase> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let space = class.outcome_space();
    let k = space.size();
    let decode = |mut i: usize| -> Vec<Outcome> {
        (0..n)
            .map(|_| {
                let z = space.outcome(i % k);
                i /= k;
                z
            })
            .collect()
    };
    match mode {
        WorstCaseMode::Exact => {
            let total = k
                .checked_pow(n as u32)
                .filter(|&t| t <= MAX_EXACT_SEQUENCES)
                .ok_or(Error::Budget {
                    what: "sequences in exact worst-case enumeration".into(),
                    budget: MAX_EXACT_SEQUENCES,
                })?;
            let values = (0..total)
                .into_par_iter()
                .map(|i| individual_sequence_regret(rule, class, loss, &decode(i)))
                .collect::<Result<Vec<_>>>()?;
            let (best, value) = values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            Ok(WorstCase {
                value,
                sequence: decode(best),
                lower_estimate: false,
                evaluated: total,
            })
        }
        WorstCaseMode::Search { restarts } => {
            if restarts == 0 {
                return Err(Error::invalid("search needs at least one restart"));
            }
            let runs = replicate(restarts, seed, |s| -> Result<(f64, Vec<Outcome>, usize)> {
                use rand::Rng;
                let mut rng = rng_from_seed(s);
                let mut seq: Vec<Outcome> = (0..n).map(|_| space.outcome(rng.random_range(0..k))).collect();
                let mut value = individual_sequence_regret(rule, class, loss, &seq)?;
                let mut evaluated = 1;
                loop {
                    let mut improved = false;
                    for t in 0..n {
                        for j in 0..k {
                            let z = space.outcome(j);
                            if seq[t] == z {
                                continue;
                            }
                            let old = std::mem::replace(&mut seq[t], z);
                            let v = individual_sequence_regret(rule, class, loss, &seq)?;
                            evaluated += 1;
                            if v > value + 1e-15 {
                                value = v;
                                improved = true;
                            } else {
                                seq[t] = old;
                            }
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                Ok((value, seq, evaluated))
            });
            let runs = collect(runs)?;
            let evaluated = runs.iter().map(|r| r.2).sum();
            let (value, sequence, _) = runs
                .into_iter()
                .fold(None::<(f64, Vec<Outcome>, usize)>, |acc, r| match acc {
                    Some(a) if a.0 >= r.0 => Some(a),
                    _ => Some(r),
                })
                .expect("at least one restart");
            Ok(WorstCase {
                value,
                sequence,
                lower_estimate: true,
                evaluated,
            })
        }
    }
}

/// `sup_f |(1/n) sum_t (f(X_t) - E[f(X_t) | Z_{1:t-1}])|` under the natural
/// filtration, with conditional means taken exactly from the kernel. `class`
/// is a class over the kernel's input domain.
pub fn martingale_deviation<K: FiniteKernel>(
    kernel: &K,
    class: &FiniteFunctionClass<f64>,
    reps: usize,
    seed: u64,
) -> Result<RegretEstimate> {
    check_reps(reps)?;
    if class.n_points() != kernel.space().n_points() {
        return Err(Error::invalid("class domain differs from the kernel inputs"));
    }
    let values = replicate(reps, seed, |s| {
        let path = sample_path(kernel, s);
        (0..class.size())
            .map(|f| {
                let observed: Vec<f64> = path.outcomes().iter().map(|z| class.value(f, z.x)).collect();
                let predicted: Vec<f64> = path
                    .conditionals()
                    .iter()
                    .map(|c| c.expect(|z| class.value(f, z.x)))
                    .collect();
                (stable_mean(&observed) - stable_mean(&predicted)).abs()
            })
            .fold(0.0, f64::max)
    });
    Ok(RegretEstimate::from_values(values, seed))
}

/// `sup_f |(1/n) sum_t f(X_t) - E_P f(X)|` for iid samples from `dist`, drawn
/// with the same random streams as [`martingale_deviation`] on a product kernel.
pub fn ulln_deviation(
    class: &FiniteFunctionClass<f64>,
    dist: &Distribution<f64>,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<RegretEstimate> {
    check_reps(reps)?;
    if class.n_points() != dist.space().n_points() {
        return Err(Error::invalid("class domain differs from the distribution inputs"));
    }
    let cond = Conditional::from_distribution(dist);
    let means: Vec<f64> = (0..class.size()).map(|f| cond.expect(|z| class.value(f, z.x))).collect();
    let values = replicate(reps, seed, |s| {
        let mut rng = rng_from_seed(s);
        let xs: Vec<usize> = (0..n).map(|_| cond.sample(&mut rng).x).collect();
        (0..class.size())
            .map(|f| (stable_mean(&xs.iter().map(|&x| class.value(f, x)).collect::<Vec<_>>()) - means[f]).abs())
            .fold(0.0, f64::max)
    });
    Ok(RegretEstimate::from_values(values, seed))
}

/// Three-term split of the prequential regret:
/// (I) conditional minus realized loss of the predictions,
/// (II) individual-sequence regret,
/// (III) best empirical minus best conditional average loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub term_i: RegretEstimate,
    pub term_ii: RegretEstimate,
    pub term_iii: RegretEstimate,
    pub total: RegretEstimate,
    /// Largest `|I + II + III - total|` over replicates.
    pub max_residual: f64,
}

pub fn decomposition_report<R: OnlineRule, K: FiniteKernel>(
    rule: &R,
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    kernel: &K,
    reps: usize,
    seed: u64,
) -> Result<DecompositionReport> {
    check_reps(reps)?;
    check_kernel(class, kernel)?;
    let runs = collect(replicate(reps, seed, |s| preq_run(rule, class, loss, &sample_path(kernel, s))))?;
    let mut terms: [Vec<f64>; 4] = Default::default();
    let mut max_residual: f64 = 0.0;
    for r in &runs {
        let i = r.conditional - r.realized;
        let ii = r.realized - r.empirical_min;
        let iii = r.empirical_min - r.conditional_min;
        let total = r.conditional - r.conditional_min;
        max_residual = max_residual.max((i + ii + iii - total).abs());
        for (v, t) in [i, ii, iii, total].into_iter().zip(terms.iter_mut()) {
            t.push(v);
        }
    }
    let [i, ii, iii, total] = terms;
    Ok(DecompositionReport {
        term_i: RegretEstimate::from_values(i, seed),
        term_ii: RegretEstimate::from_values(ii, seed),
        term_iii: RegretEstimate::from_values(iii, seed),
        total: RegretEstimate::from_values(total, seed),
        max_residual,
    })
}

/// Distance between the average conditional `P_bar` of a path and a target `P*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryGap {
    /// `sup_f |l(P*, f) - l(P_bar, f)|`
    pub gap: f64,
    pub total_variation: f64,
    /// `B * TV(P*, P_bar)` for a loss bounded by `B`.
    pub bound: f64,
}

impl StationaryGap {
    pub fn within_bound(&self) -> bool {
        self.gap <= self.bound + 1e-12
    }
}

pub fn stationary_gap<H>(
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    path: &Path<Outcome, H>,
    p_star: &Distribution<f64>,
) -> Result<StationaryGap> {
    let p_bar = conditional_average(path, class.outcome_space())?;
    let mut gap: f64 = 0.0;
    for f in 0..class.size() {
        gap = gap.max((expected_loss(class, loss, p_star, f)? - expected_loss(class, loss, &p_bar, f)?).abs());
    }
    let tv = p_star.total_variation(&p_bar);
    Ok(StationaryGap {
        gap,
        total_variation: tv,
        bound: loss.bound(class.labels()) * tv,
    })
}

/// Fraction of paths on which the exact minimizer of `R_n` is `f*_P`.
pub fn mixture_argmin_fraction(
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    mixture: &Mixture,
    reps: usize,
    seed: u64,
) -> Result<RegretEstimate> {
    check_reps(reps)?;
    check_kernel(class, mixture)?;
    let risks_p = (0..class.size())
        .map(|f| expected_loss(class, loss, mixture.p(), f))
        .collect::<Result<Vec<_>>>()?;
    let f_star_p = argmin_set(&risks_p)[0];
    let values = replicate(reps, seed, |s| {
        let path = sample_path(mixture, s);
        let r = process_regrets(class, loss, &path)?;
        Ok(if argmin_set(&r)[0] == f_star_p { 1.0 } else { 0.0 })
    });
    Ok(RegretEstimate::from_values(collect(values)?, seed))
}

/// Fraction of mixture paths drawn from the `P` component, read off the path.
pub fn mixture_component_fraction(mixture: &Mixture, reps: usize, seed: u64) -> Result<RegretEstimate> {
    check_reps(reps)?;
    let values = replicate(reps, seed, |s| {
        let path = sample_path(mixture, s);
        f64::from(u8::from(mixture.component(&path) == Some(MixtureComponent::P)))
    });
    Ok(RegretEstimate::from_values(values, seed))
}

/// Average conditional risk `(1/n) sum_t l(P_t, f_hat)` of a batch rule,
/// overall and per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    pub average: RegretEstimate,
    /// Mean of `l(P_t, f_hat)` over replicates, for `t = 1..=n`.
    pub per_step: Vec<f64>,
}

fn profile(rows: Vec<Vec<f64>>, seed: u64) -> RiskProfile {
    let n = rows.first().map_or(0, Vec::len);
    let per_step = (0..n)
        .map(|t| rows.iter().map(|r| r[t]).sum::<f64>() / rows.len() as f64)
        .collect();
    let average = rows.iter().map(|r| stable_mean(r)).collect();
    RiskProfile {
        average: RegretEstimate::from_values(average, seed),
        per_step,
    }
}

/// Zero-one risk of threshold ERM on the adversarial process. The process is
/// realizable, so this equals the generalization regret.
pub fn adversarial_erm_risk(n: usize, tie_break: TieBreak, reps: usize, seed: u64) -> Result<RiskProfile> {
    check_reps(reps)?;
    let kernel = AdversarialThreshold::new(n)?;
    let class = OddThresholds::new(kernel.input_bits())?;
    let rows = replicate(reps, seed, |s| {
        let path = sample_path(&kernel, s);
        let sample: Vec<(BigUint, bool)> = path.outcomes().iter().map(|z| (z.x.clone(), z.y)).collect();
        let zero_one = |p: bool, y: &bool| f64::from(u8::from(p != *y));
        let theta = class.erm(&sample, zero_one, tie_break, &mut rng_from_seed(rule_seed(s)));
        path.conditionals()
            .iter()
            .map(|c| c.expect(|z| zero_one(OddThresholds::predict(&theta, &z.x), &z.y)))
            .collect()
    });
    Ok(profile(rows, seed))
}

/// Absolute-loss risk of threshold ERM on the adversarial process with labels
/// mapped to the levels `high` and `low`. The fitted thresholds take the two
/// levels, so the process stays realizable.
pub fn regression_erm_risk(
    n: usize,
    high: f64,
    low: f64,
    gamma: f64,
    tie_break: TieBreak,
    reps: usize,
    seed: u64,
) -> Result<RiskProfile> {
    check_reps(reps)?;
    let kernel = RegressionTransform::new(AdversarialThreshold::new(n)?, high, low, gamma)?;
    let class = OddThresholds::new(kernel.inner().input_bits())?;
    let rows = replicate(reps, seed, |s| {
        let path = sample_path(&kernel, s);
        let sample: Vec<(BigUint, f64)> = path.outcomes().iter().map(|z| (z.x.clone(), z.y)).collect();
        let absolute = |p: bool, y: &f64| (kernel.level(p) - y).abs();
        let theta = class.erm(&sample, absolute, tie_break, &mut rng_from_seed(rule_seed(s)));
        path.conditionals()
            .iter()
            .map(|c| c.expect(|z: &Labeled<BigUint, f64>| absolute(OddThresholds::predict(&theta, &z.x), &z.y)))
            .collect()
    });
    Ok(profile(rows, seed))
}

/// Offset-ERM risk on the random-level process and the error of the level
/// estimate `U_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomLevelReport {
    /// `(1/n) sum_t l(P_t, f_hat)`
    pub risk: RegretEstimate,
    /// `|U_n - xi_0|`
    pub level_error: RegretEstimate,
}

pub fn random_level_estimate(kernel: &RandomLevel, reps: usize, seed: u64) -> Result<RandomLevelReport> {
    check_reps(reps)?;
    let n = kernel.horizon();
    let runs = collect(replicate(reps, seed, |s| {
        let path = kernel.sample(s);
        let (theta, c) = crate::learners::erm_offset(kernel.base(), &path.xs, &path.ys)?;
        Ok((
            kernel.average_risk(&path, theta, c),
            (kernel.posterior_mean(&path, n) - path.xi0()).abs(),
        ))
    }))?;
    Ok(RandomLevelReport {
        risk: RegretEstimate::from_values(runs.iter().map(|r| r.0).collect(), seed),
        level_error: RegretEstimate::from_values(runs.iter().map(|r| r.1).collect(), seed),
    })
}

/// Realized outcomes and hidden value of replicate `index`, for inspection.
pub fn replicate_path<K: Kernel>(kernel: &K, seed: u64, index: u64) -> Path<K::Outcome, K::Hidden> {
    sample_path(kernel, derive_seed(seed, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{make_threshold_class, Domain, LabelSpace, OutcomeSpace};
    use crate::learners::{Erm, FollowTheLeader, Hedge, LearningRate};
    use crate::processes::{adversarial_threshold_class, AdversarialFinite, PointMass, ProductIid};

    fn pm(x: usize, positive: bool) -> Outcome {
        Outcome::new(x, usize::from(positive))
    }

    fn pair_class() -> FiniteFunctionClass<f64> {
        FiniteFunctionClass::new(
            Domain::integers(1).unwrap(),
            LabelSpace::binary(),
            vec![vec![1.0], vec![-1.0]],
            None,
        )
        .unwrap()
    }

    fn skewed(space: OutcomeSpace, seed: u64) -> Distribution<f64> {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let w: Vec<f64> = (0..space.size()).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        Distribution::new(space, w.iter().map(|v| v / s).collect()).unwrap()
    }

    #[test]
    fn p_regret_examples() {
        let class = make_threshold_class(3).unwrap();
        let space = class.outcome_space();
        let p = skewed(space, 1);
        let risks: Vec<f64> = (0..4).map(|f| expected_loss(&class, Loss::ZeroOne, &p, f).unwrap()).collect();
        let best = argmin_set(&risks)[0];
        assert_eq!(p_regret(&class, Loss::ZeroOne, &p, best).unwrap(), 0.0);
        let z = pm(1, true);
        let point = Distribution::point_mass(space, z);
        for f in 0..4 {
            let want = class.loss(Loss::ZeroOne, z, f)
                - (0..4).map(|g| class.loss(Loss::ZeroOne, z, g)).fold(f64::INFINITY, f64::min);
            assert_eq!(p_regret(&class, Loss::ZeroOne, &point, f).unwrap(), want);
        }
        let uniform = Distribution::uniform(space);
        for f in 0..4 {
            assert_eq!(p_regret(&class, Loss::ZeroOne, &uniform, f).unwrap(), 0.0);
        }
    }

    #[test]
    fn process_regret_on_product_and_point_mass() {
        let class = make_threshold_class(3).unwrap();
        let p = skewed(class.outcome_space(), 4);
        let kernel = ProductIid::new(p.clone(), 7);
        for s in 0..10 {
            let path = sample_path(&kernel, s);
            for f in 0..4 {
                assert_eq!(
                    process_regret(&class, Loss::ZeroOne, &path, f).unwrap(),
                    p_regret(&class, Loss::ZeroOne, &p, f).unwrap()
                );
            }
        }
        let seq = vec![pm(0, true), pm(2, false), pm(1, true)];
        let path = sample_path(&PointMass::new(class.outcome_space(), seq.clone()).unwrap(), 0);
        for f in 0..4 {
            let per_step: Vec<f64> = seq
                .iter()
                .map(|&z| {
                    class.loss(Loss::ZeroOne, z, f)
                        - (0..4).map(|g| class.loss(Loss::ZeroOne, z, g)).fold(f64::INFINITY, f64::min)
                })
                .collect();
            let want = per_step.iter().sum::<f64>() / 3.0;
            assert!((process_regret(&class, Loss::ZeroOne, &path, f).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn adversarial_truth_has_zero_process_regret() {
        let class = adversarial_threshold_class::<f64>(2).unwrap();
        let kernel = AdversarialFinite::new(2).unwrap();
        for s in 0..30 {
            let path = sample_path(&kernel, s);
            let f = kernel.truth_row(path.hidden());
            assert_eq!(process_regret(&class, Loss::ZeroOne, &path, f).unwrap(), 0.0);
            let (_, cond) = path_losses(&class, Loss::ZeroOne, &path);
            assert!(cond.iter().all(|r| r[f] == 0.0));
        }
    }

    #[test]
    fn gen_matches_iid_on_product() {
        let class = make_threshold_class(3).unwrap();
        let p = skewed(class.outcome_space(), 9);
        let kernel = ProductIid::new(p.clone(), 5);
        for tb in TieBreak::ALL {
            let a = gen_value_estimate(&Erm::new(tb), &class, Loss::ZeroOne, &kernel, 300, 17).unwrap();
            let b = iid_value_estimate(&Erm::new(tb), &class, Loss::ZeroOne, &p, 5, 300, 17).unwrap();
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn preq_matches_individual_sequence_on_point_mass() {
        let class = make_threshold_class(3).unwrap();
        let seq = vec![pm(0, true), pm(2, false), pm(2, true), pm(1, false), pm(0, false)];
        let kernel = PointMass::new(class.outcome_space(), seq.clone()).unwrap();
        let rule = Hedge::new(&class, Loss::ZeroOne, LearningRate::Anytime).unwrap();
        let est = preq_value_estimate(&rule, &class, Loss::ZeroOne, &kernel, 5, 3).unwrap();
        let direct = individual_sequence_regret(&rule, &class, Loss::ZeroOne, &seq).unwrap();
        assert!(est.values().unwrap().iter().all(|&v| v == direct));
        let single = class.select(&[1]).unwrap();
        let rule = Hedge::new(&single, Loss::ZeroOne, LearningRate::Anytime).unwrap();
        let p = skewed(single.outcome_space(), 2);
        let est = preq_value_estimate(&rule, &single, Loss::ZeroOne, &ProductIid::new(p, 6), 20, 3).unwrap();
        assert!(est.values().unwrap().iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn hedge_worst_case_two_experts() {
        let class = pair_class();
        let rule = Hedge::new(&class, Loss::ZeroOne, LearningRate::Anytime).unwrap();
        let wc = online_worst_case(&rule, &class, Loss::ZeroOne, 4, WorstCaseMode::Exact, 0).unwrap();
        assert_eq!(wc.evaluated, 16);
        // brute force over all label sequences
        let mut best = f64::NEG_INFINITY;
        for mask in 0..16usize {
            let seq: Vec<Outcome> = (0..4).map(|t| pm(0, mask >> t & 1 == 1)).collect();
            best = best.max(individual_sequence_regret(&rule, &class, Loss::ZeroOne, &seq).unwrap());
        }
        assert_eq!(wc.value, best);
        assert!(wc.value <= (4.0 * 2f64.ln() / 2.0).sqrt() / 4.0);
        let single = class.select(&[0]).unwrap();
        let rule = Hedge::new(&single, Loss::ZeroOne, LearningRate::Anytime).unwrap();
        let wc = online_worst_case(&rule, &single, Loss::ZeroOne, 3, WorstCaseMode::Exact, 0).unwrap();
        assert_eq!(wc.value, 0.0);
    }

    #[test]
    fn ftl_worst_case_positive_and_search_is_lower() {
        let class = make_threshold_class(2).unwrap();
        let rule = FollowTheLeader::new(&class, Loss::ZeroOne).unwrap();
        let exact = online_worst_case(&rule, &class, Loss::ZeroOne, 4, WorstCaseMode::Exact, 0).unwrap();
        assert!(exact.value > 0.0);
        let search =
            online_worst_case(&rule, &class, Loss::ZeroOne, 4, WorstCaseMode::Search { restarts: 8 }, 1).unwrap();
        assert!(search.lower_estimate && search.value <= exact.value);
        assert!(online_worst_case(&rule, &class, Loss::ZeroOne, 10, WorstCaseMode::Exact, 0)
            .unwrap_err()
            .is_budget());
    }

    #[test]
    fn martingale_deviation_cases() {
        let class = crate::classes::full_binary_class(2).unwrap();
        let space = OutcomeSpace::new(2, 2);
        let seq = vec![pm(0, true), pm(1, false), pm(1, true)];
        let dev = martingale_deviation(&PointMass::new(space, seq).unwrap(), &class, 10, 0).unwrap();
        assert!(dev.values().unwrap().iter().all(|&v| v == 0.0));
        let p = skewed(space, 6);
        let m = martingale_deviation(&ProductIid::new(p.clone(), 12), &class, 200, 5).unwrap();
        let u = ulln_deviation(&class, &p, 12, 200, 5).unwrap();
        assert_eq!(m.values, u.values);
    }

    #[test]
    fn decomposition_sums_and_point_mass_terms() {
        let class = make_threshold_class(2).unwrap();
        let rule = Hedge::new(&class, Loss::ZeroOne, LearningRate::Anytime).unwrap();
        let p = skewed(class.outcome_space(), 3);
        let r = decomposition_report(&rule, &class, Loss::ZeroOne, &ProductIid::new(p, 16), 200, 2).unwrap();
        assert!(r.max_residual <= 1e-12);
        let seq = vec![pm(0, true), pm(1, false), pm(1, true), pm(0, false)];
        let kernel = PointMass::new(class.outcome_space(), seq).unwrap();
        let r = decomposition_report(&rule, &class, Loss::ZeroOne, &kernel, 3, 2).unwrap();
        assert!(r.term_i.values().unwrap().iter().all(|&v| v == 0.0));
        assert!(r.term_iii.values().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stationary_gap_product_and_drift() {
        use crate::processes::{DriftSchedule, Drifting};
        let class = make_threshold_class(2).unwrap();
        let space = class.outcome_space();
        let p = skewed(space, 1);
        let path = sample_path(&ProductIid::new(p.clone(), 5), 0);
        let g = stationary_gap(&class, Loss::ZeroOne, &path, &p).unwrap();
        assert!(g.gap < 1e-15 && g.total_variation < 1e-15);
        let q = skewed(space, 2);
        let mut last = f64::INFINITY;
        for n in [4usize, 16, 64, 256] {
            let kernel = Drifting::new(q.clone(), p.clone(), n, DriftSchedule::Polynomial { rate: 1.0 }).unwrap();
            let g = stationary_gap(&class, Loss::ZeroOne, &sample_path(&kernel, 0), &p).unwrap();
            assert!(g.within_bound());
            assert!(g.gap < last);
            last = g.gap;
        }
    }

    #[test]
    fn mixture_fraction_tracks_component() {
        let class = pair_class();
        let space = class.outcome_space();
        let p = Distribution::point_mass(space, pm(0, true));
        let q = Distribution::point_mass(space, pm(0, false));
        let mix = Mixture::new(0.3, p, q, 6).unwrap();
        let a = mixture_argmin_fraction(&class, Loss::ZeroOne, &mix, 2000, 1).unwrap();
        let b = mixture_component_fraction(&mix, 2000, 1).unwrap();
        assert_eq!(a.values, b.values);
        assert!((a.mean - 0.3).abs() <= 3.0 * a.stderr);
    }

    #[test]
    fn adversarial_risk_small_run() {
        for tb in TieBreak::ALL {
            let r = adversarial_erm_risk(4, tb, 2000, 3).unwrap();
            assert_eq!(r.per_step.len(), 4);
            assert!(r.average.above(0.125, 3.0), "{tb:?}: {:?}", r.average.mean);
        }
        let r = regression_erm_risk(4, 0.6, 0.5, 0.5, TieBreak::LowestIndex, 2000, 3).unwrap();
        assert!(r.average.above(0.5 / 80.0, 3.0));
    }

    #[test]
    fn regression_risk_is_scaled_zero_one_risk() {
        let a = adversarial_erm_risk(3, TieBreak::LowestIndex, 200, 8).unwrap();
        let b = regression_erm_risk(3, 0.7, 0.4, 0.5, TieBreak::LowestIndex, 200, 8).unwrap();
        for (x, y) in a.average.values().unwrap().iter().zip(b.average.values().unwrap()) {
            assert!((x * 0.3 - y).abs() < 1e-12);
        }
    }
}
