//! Batch and online learning rules over finite classes.
//!
//! Batch rules map a whole sample to a class member. Online rules expose a
//! distribution over class members computed from past outcomes only, and are
//! driven step by step by [`run_prequential`].

use std::io::Write;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classes::{FiniteFunctionClass, Loss, OffsetClass, Outcome, OutcomeSpace};
use crate::processes::{random_bits, sample_path, FiniteKernel, Path};
use crate::seed::rng_from_seed;
use crate::{Error, Result};

/// Empirical losses closer than this are treated as tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
    SeededRandom,
}

impl TieBreak {
    pub const ALL: [TieBreak; 3] = [TieBreak::LowestIndex, TieBreak::HighestIndex, TieBreak::SeededRandom];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lowest-index" | "lowest" => Ok(TieBreak::LowestIndex),
            "highest-index" | "highest" => Ok(TieBreak::HighestIndex),
            "seeded-random" | "random" => Ok(TieBreak::SeededRandom),
            _ => Err(Error::invalid(format!("unknown tie-break `{s}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TieBreak::LowestIndex => "lowest-index",
            TieBreak::HighestIndex => "highest-index",
            TieBreak::SeededRandom => "seeded-random",
        }
    }

    fn pick(self, candidates: &[usize], seed: u64) -> usize {
        match self {
            TieBreak::LowestIndex => candidates[0],
            TieBreak::HighestIndex => candidates[candidates.len() - 1],
            TieBreak::SeededRandom => candidates[rng_from_seed(seed).random_range(0..candidates.len())],
        }
    }
}

/// Indices whose value is within [`TIE_TOL`] of the minimum, in increasing order.
pub(crate) fn argmin_set(values: &[f64]) -> Vec<usize> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (0..values.len())
        .filter(|&i| values[i] <= min + TIE_TOL)
        .collect()
}

/// `(1/m) sum_t l(z_t, f)` for every member `f`.
pub fn empirical_losses(class: &FiniteFunctionClass<f64>, loss: Loss, sample: &[Outcome]) -> Result<Vec<f64>> {
    loss.check_compatible(class.labels())?;
    let space = class.outcome_space();
    if let Some(z) = sample.iter().find(|z| !space.contains(**z)) {
        return Err(Error::invalid(format!("outcome {z:?} outside the outcome space")));
    }
    Ok((0..class.size())
        .map(|f| {
            let mut acc = Vec::with_capacity(sample.len());
            acc.extend(sample.iter().map(|&z| class.loss(loss, z, f)));
            stable_mean(&acc)
        })
        .collect())
}

/// Mean that is exact for constant inputs: equal values are grouped and each
/// group contributes `value * count / n`.
pub fn stable_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        total += sorted[i] * ((j - i) as f64 / n);
        i = j;
    }
    total
}

/// Empirical risk minimizer. An empty sample ties every member.
pub fn erm(
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    sample: &[Outcome],
    tie_break: TieBreak,
    seed: u64,
) -> Result<usize> {
    let losses = empirical_losses(class, loss, sample)?;
    Ok(tie_break.pick(&argmin_set(&losses), seed))
}

pub trait BatchRule: Sync {
    /// Member chosen from `sample`; `seed` feeds any internal randomness.
    fn fit(&self, class: &FiniteFunctionClass<f64>, loss: Loss, sample: &[Outcome], seed: u64) -> Result<usize>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Erm {
    pub tie_break: TieBreak,
}

impl Erm {
    pub fn new(tie_break: TieBreak) -> Self {
        Erm { tie_break }
    }
}

impl BatchRule for Erm {
    fn fit(&self, class: &FiniteFunctionClass<f64>, loss: Loss, sample: &[Outcome], seed: u64) -> Result<usize> {
        erm(class, loss, sample, self.tie_break, seed)
    }
}

/// Squared-loss ERM over `f_theta + c`: for each `theta` the best offset is
/// the mean residual, and the smallest residual sum of squares wins (lowest
/// `theta` on ties).
pub fn erm_offset(class: &OffsetClass<f64>, xs: &[usize], ys: &[f64]) -> Result<(usize, f64)> {
    if xs.is_empty() {
        return Err(Error::invalid("offset ERM needs a nonempty sample"));
    }
    if xs.len() != ys.len() {
        return Err(Error::invalid("inputs and labels differ in length"));
    }
    let base = class.base();
    if let Some(&x) = xs.iter().find(|&&x| x >= base.n_points()) {
        return Err(Error::invalid(format!("point index {x} outside the domain")));
    }
    let m = xs.len() as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    for theta in 0..base.size() {
        let c = xs.iter().zip(ys).map(|(&x, y)| y - base.value(theta, x)).sum::<f64>() / m;
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(&x, y)| (y - base.value(theta, x) - c).powi(2))
            .sum();
        if best.is_none_or(|(_, _, r)| rss < r - TIE_TOL) {
            best = Some((theta, c, rss));
        }
    }
    let (theta, c, _) = best.expect("class is nonempty");
    Ok((theta, c))
}

/// Thresholds `x -> 1{x <= theta}` over integers below `2^bits`, with `theta`
/// ranging over the odd integers. This is the class the adversarial process
/// is realizable by, handled without materializing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OddThresholds {
    bits: usize,
}

impl OddThresholds {
    pub fn new(bits: usize) -> Result<Self> {
        if bits == 0 {
            return Err(Error::invalid("thresholds need at least one bit"));
        }
        Ok(OddThresholds { bits })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn predict(theta: &BigUint, x: &BigUint) -> bool {
        x <= theta
    }

    /// Empirical risk minimizer for a per-outcome loss `loss(prediction, label)`.
    /// All `theta` between two consecutive sample inputs predict identically,
    /// so the search runs over these regions; `SeededRandom` draws uniformly
    /// among all minimizing `theta`, not among regions.
    pub fn erm<L, R: Rng + ?Sized>(
        &self,
        sample: &[(BigUint, L)],
        loss: impl Fn(bool, &L) -> f64,
        tie_break: TieBreak,
        rng: &mut R,
    ) -> BigUint {
        let top = (BigUint::one() << self.bits) - 1u32;
        let mut order: Vec<usize> = (0..sample.len()).collect();
        order.sort_by(|&a, &b| sample[a].0.cmp(&sample[b].0));

        // region k: exactly the k smallest distinct inputs are predicted high
        let mut regions: Vec<(BigUint, BigUint, f64)> = Vec::new();
        let mut risk: f64 = sample.iter().map(|(_, y)| loss(false, y)).sum();
        let mut lo = BigUint::zero();
        let mut i = 0;
        loop {
            let next = order.get(i).map(|&j| &sample[j].0);
            let hi = match next {
                Some(x) if x.is_zero() => None,
                Some(x) => Some(x - 1u32),
                None => Some(top.clone()),
            };
            if let Some(hi) = hi {
                if let Some((a, b)) = odd_range(&lo, &hi) {
                    regions.push((a, b, risk));
                }
            }
            let Some(x) = next.cloned() else { break };
            while i < order.len() && sample[order[i]].0 == x {
                let y = &sample[order[i]].1;
                risk += loss(true, y) - loss(false, y);
                i += 1;
            }
            lo = x;
        }
        let risks: Vec<f64> = regions.iter().map(|r| r.2).collect();
        let best = argmin_set(&risks);
        match tie_break {
            TieBreak::LowestIndex => regions[best[0]].0.clone(),
            TieBreak::HighestIndex => regions[best[best.len() - 1]].1.clone(),
            TieBreak::SeededRandom => {
                let counts: Vec<BigUint> = best
                    .iter()
                    .map(|&k| ((&regions[k].1 - &regions[k].0) >> 1usize) + 1u32)
                    .collect();
                let total: BigUint = counts.iter().sum();
                let mut r = random_below(&total, rng);
                for (&k, c) in best.iter().zip(&counts) {
                    if &r < c {
                        return &regions[k].0 + (r << 1usize);
                    }
                    r -= c;
                }
                unreachable!("draw below the total count")
            }
        }
    }
}

/// Smallest and largest odd integers in `[lo, hi]`, if any.
fn odd_range(lo: &BigUint, hi: &BigUint) -> Option<(BigUint, BigUint)> {
    let a = lo | BigUint::one();
    let b = if hi.bit(0) {
        hi.clone()
    } else if hi.is_zero() {
        return None;
    } else {
        hi - 1u32
    };
    (a <= b).then_some((a, b))
}

fn random_below<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    let bits = bound.bits() as usize;
    loop {
        let r = random_bits(bits, rng);
        if &r < bound {
            return r;
        }
    }
}

/// Online rule predicting a distribution over class members.
pub trait OnlineRule: Clone + Send + Sync {
    /// Distribution over members for the next round, from past outcomes only.
    fn predict(&self) -> Vec<f64>;
    fn update(&mut self, z: Outcome);
}

/// Per-member loss on every outcome, indexed `[f][space index]`.
#[derive(Debug, Clone, PartialEq)]
struct LossTable {
    space: OutcomeSpace,
    table: Vec<Vec<f64>>,
}

impl LossTable {
    fn new(class: &FiniteFunctionClass<f64>, loss: Loss) -> Result<Self> {
        loss.check_compatible(class.labels())?;
        let space = class.outcome_space();
        let table = (0..class.size())
            .map(|f| space.iter().map(|z| class.loss(loss, z, f)).collect())
            .collect();
        Ok(LossTable { space, table })
    }

    fn get(&self, f: usize, z: Outcome) -> f64 {
        self.table[f][self.space.index(z)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearningRate {
    /// `eta_t = sqrt(8 ln|F| / t) / B` at round `t`.
    Anytime,
    Fixed(f64),
}

/// Exponential weights over the members of a finite class.
#[derive(Debug, Clone, PartialEq)]
pub struct Hedge {
    losses: LossTable,
    cumulative: Vec<f64>,
    rounds: usize,
    bound: f64,
    rate: LearningRate,
}

impl Hedge {
    pub fn new(class: &FiniteFunctionClass<f64>, loss: Loss, rate: LearningRate) -> Result<Self> {
        if let LearningRate::Fixed(eta) = rate {
            if !(eta >= 0.0) {
                return Err(Error::invalid("learning rate must be nonnegative"));
            }
        }
        let bound = loss.bound(class.labels());
        Ok(Hedge {
            losses: LossTable::new(class, loss)?,
            cumulative: vec![0.0; class.size()],
            rounds: 0,
            bound: if bound > 0.0 { bound } else { 1.0 },
            rate,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn eta(&self) -> f64 {
        match self.rate {
            LearningRate::Fixed(eta) => eta,
            LearningRate::Anytime => {
                let t = (self.rounds + 1) as f64;
                (8.0 * (self.cumulative.len() as f64).ln() / t).sqrt() / self.bound
            }
        }
    }
}

impl OnlineRule for Hedge {
    fn predict(&self) -> Vec<f64> {
        let eta = self.eta();
        let min = self.cumulative.iter().cloned().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = self.cumulative.iter().map(|l| (-eta * (l - min)).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    }

    fn update(&mut self, z: Outcome) {
        for (f, l) in self.cumulative.iter_mut().enumerate() {
            *l += self.losses.get(f, z);
        }
        self.rounds += 1;
    }
}

/// Plays the lowest-index member with the smallest cumulative loss.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowTheLeader {
    losses: LossTable,
    cumulative: Vec<f64>,
}

impl FollowTheLeader {
    pub fn new(class: &FiniteFunctionClass<f64>, loss: Loss) -> Result<Self> {
        Ok(FollowTheLeader {
            losses: LossTable::new(class, loss)?,
            cumulative: vec![0.0; class.size()],
        })
    }
}

impl OnlineRule for FollowTheLeader {
    fn predict(&self) -> Vec<f64> {
        let leader = argmin_set(&self.cumulative)[0];
        let mut p = vec![0.0; self.cumulative.len()];
        p[leader] = 1.0;
        p
    }

    fn update(&mut self, z: Outcome) {
        for (f, l) in self.cumulative.iter_mut().enumerate() {
            *l += self.losses.get(f, z);
        }
    }
}

/// `sum_f p(f) v(f)`.
pub(crate) fn weighted(p: &[f64], v: &[f64]) -> f64 {
    p.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub t: usize,
    /// Prediction used at step `t`, computed from `z_{1:t-1}`.
    pub prediction: Vec<f64>,
    pub outcome: Outcome,
    /// Expected loss on the realized outcome under the prediction.
    pub loss: f64,
    /// Expected conditional risk `l(P_t, .)` under the prediction.
    pub conditional_risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,prediction,x,y,loss,conditional_risk")?;
        for s in &self.steps {
            let p: Vec<String> = s.prediction.iter().map(|v| v.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.t,
                p.join(";"),
                s.outcome.x,
                s.outcome.y,
                s.loss,
                s.conditional_risk
            )?;
        }
        Ok(())
    }
}

/// Per-member losses on the realized outcomes and conditional risks
/// `l(P_t, f)` along a path, both indexed `[t][f]`.
pub(crate) fn path_losses<H>(
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    path: &Path<Outcome, H>,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let realized = path
        .outcomes()
        .iter()
        .map(|&z| (0..class.size()).map(|f| class.loss(loss, z, f)).collect())
        .collect();
    let conditional = path
        .conditionals()
        .iter()
        .map(|c| (0..class.size()).map(|f| c.expect(|&z| class.loss(loss, z, f))).collect())
        .collect();
    (realized, conditional)
}

/// Replays `path` through `rule`, recording each prediction before the
/// corresponding outcome is revealed.
pub fn replay<R: OnlineRule, H>(
    rule: &R,
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    path: &Path<Outcome, H>,
) -> Result<Trajectory> {
    loss.check_compatible(class.labels())?;
    let (realized, conditional) = path_losses(class, loss, path);
    let mut rule = rule.clone();
    let mut steps = Vec::with_capacity(path.len());
    for (t, &z) in path.outcomes().iter().enumerate() {
        let prediction = rule.predict();
        if prediction.len() != class.size() {
            return Err(Error::invalid("rule predicts over a different class"));
        }
        steps.push(Step {
            t: t + 1,
            loss: weighted(&prediction, &realized[t]),
            conditional_risk: weighted(&prediction, &conditional[t]),
            prediction,
            outcome: z,
        });
        rule.update(z);
    }
    Ok(Trajectory {
        seed: path.seed(),
        steps,
    })
}

/// Samples a path from `kernel` and runs `rule` on it prequentially.
pub fn run_prequential<R: OnlineRule, K: FiniteKernel>(
    rule: &R,
    class: &FiniteFunctionClass<f64>,
    loss: Loss,
    kernel: &K,
    seed: u64,
) -> Result<Trajectory> {
    if kernel.space() != class.outcome_space() {
        return Err(Error::invalid("kernel and class have different outcome spaces"));
    }
    replay(rule, class, loss, &sample_path(kernel, seed))
}
