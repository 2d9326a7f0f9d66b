//! Stochastic processes given by explicit conditional distributions
//! `P_t(. | z_{1:t-1})`.
//!
//! A [`Kernel`] maps a realized prefix (and, for constructions indexed by a
//! latent object, a hidden value) to a finite distribution over the next
//! outcome. Paths are sampled from the conditionals only. Learners are only
//! ever handed [`Path::outcomes`]; the hidden value and cached conditionals
//! are for evaluators.

mod adversarial;
mod finite;
mod random_level;

use std::fmt::Debug;
use std::io::Write;

use rand::Rng;

use crate::classes::{Distribution, Outcome, OutcomeSpace};
use crate::seed::rng_from_seed;
use crate::{Error, Result};

pub use adversarial::{
    adversarial_threshold_class, AdversarialFinite, AdversarialThreshold, BitOutcome,
    RegressionTransform,
};
pub(crate) use adversarial::random_bits;
pub use finite::{DriftSchedule, Drifting, Mixture, MixtureComponent, PointMass, ProductIid};
pub use random_level::{random_level_conditional_risk, RandomLevel, RandomLevelPath};

/// Outcome with an arbitrary input and label type.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeled<X, Y> {
    pub x: X,
    pub y: Y,
}

const NORMALIZATION_TOL: f64 = 1e-12;

/// Finite-support conditional distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional<Z> {
    support: Vec<(Z, f64)>,
}

impl<Z: Clone> Conditional<Z> {
    pub fn new(support: Vec<(Z, f64)>) -> Result<Self> {
        if support.iter().any(|(_, m)| !(*m >= 0.0)) {
            return Err(Error::invalid("conditional masses must be nonnegative"));
        }
        let total: f64 = support.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Conditional { support })
    }

    pub fn point_mass(z: Z) -> Self {
        Conditional {
            support: vec![(z, 1.0)],
        }
    }

    pub fn support(&self) -> &[(Z, f64)] {
        &self.support
    }

    pub fn total_mass(&self) -> f64 {
        self.support.iter().map(|(_, m)| m).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Z {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (z, m) in &self.support {
            acc += m;
            if u < acc {
                return z.clone();
            }
        }
        self.support
            .iter()
            .rev()
            .find(|(_, m)| *m > 0.0)
            .expect("normalized support has positive mass")
            .0
            .clone()
    }

    /// Expectation of `g` under the conditional.
    pub fn expect(&self, mut g: impl FnMut(&Z) -> f64) -> f64 {
        self.support.iter().map(|(z, m)| m * g(z)).sum()
    }

    pub fn probability(&self, z: &Z) -> f64
    where
        Z: PartialEq,
    {
        self.support.iter().filter(|(w, _)| w == z).map(|(_, m)| m).sum()
    }
}

impl Conditional<Outcome> {
    pub fn from_distribution(dist: &Distribution<f64>) -> Self {
        Conditional {
            support: dist.support().collect(),
        }
    }

    pub fn to_distribution(&self, space: OutcomeSpace) -> Result<Distribution<f64>> {
        Distribution::from_pairs(space, &self.support)
    }
}

pub trait Kernel: Sync {
    type Outcome: Clone + PartialEq + Debug + Send + Sync;
    /// Latent value fixed for a whole path, never shown to learners.
    type Hidden: Clone + Debug + Send + Sync;

    fn horizon(&self) -> usize;

    fn draw_hidden<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Hidden;

    /// `P_t(. | prefix)` with `t = prefix.len() + 1`.
    fn conditional(&self, hidden: &Self::Hidden, prefix: &[Self::Outcome]) -> Conditional<Self::Outcome>;
}

/// Kernel over the outcome space of a finite class.
pub trait FiniteKernel: Kernel<Outcome = Outcome> {
    fn space(&self) -> OutcomeSpace;
}

/// Realized path together with the conditionals met along it.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<Z, H> {
    outcomes: Vec<Z>,
    conditionals: Vec<Conditional<Z>>,
    hidden: H,
    seed: u64,
}

impl<Z: Clone, H> Path<Z, H> {
    pub fn outcomes(&self) -> &[Z] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Evaluator-side: `P_t` for `t = 1..=n`.
    pub fn conditionals(&self) -> &[Conditional<Z>] {
        &self.conditionals
    }

    /// Evaluator-side: the latent value the path was generated with.
    pub fn hidden(&self) -> &H {
        &self.hidden
    }
}

/// Samples a path using only the kernel's conditionals.
pub fn sample_path<K: Kernel>(kernel: &K, seed: u64) -> Path<K::Outcome, K::Hidden> {
    let mut rng = rng_from_seed(seed);
    let hidden = kernel.draw_hidden(&mut rng);
    sample_path_with_hidden(kernel, hidden, &mut rng, seed)
}

pub fn sample_path_with_hidden<K: Kernel, R: Rng + ?Sized>(
    kernel: &K,
    hidden: K::Hidden,
    rng: &mut R,
    seed: u64,
) -> Path<K::Outcome, K::Hidden> {
    let n = kernel.horizon();
    let mut outcomes = Vec::with_capacity(n);
    let mut conditionals = Vec::with_capacity(n);
    for _ in 0..n {
        let cond = kernel.conditional(&hidden, &outcomes);
        let z = cond.sample(rng);
        outcomes.push(z);
        conditionals.push(cond);
    }
    Path {
        outcomes,
        conditionals,
        hidden,
        seed,
    }
}

/// `P_bar = (1/n) sum_t P_t` along the realized path.
pub fn conditional_average<H>(path: &Path<Outcome, H>, space: OutcomeSpace) -> Result<Distribution<f64>> {
    let dists = path
        .conditionals()
        .iter()
        .map(|c| c.to_distribution(space))
        .collect::<Result<Vec<_>>>()?;
    Distribution::average(&dists)
}

/// Writes `t,x,y,p_t` rows; `p_t` lists `x:y:mass` entries separated by `;`.
pub fn write_path_csv<H, W: Write>(path: &Path<Outcome, H>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,x,y,p_t")?;
    for (t, (z, cond)) in path.outcomes().iter().zip(path.conditionals()).enumerate() {
        let p: Vec<String> = cond
            .support()
            .iter()
            .map(|(w, m)| format!("{}:{}:{}", w.x, w.y, m))
            .collect();
        writeln!(out, "{},{},{},{}", t + 1, z.x, z.y, p.join(";"))?;
    }
    Ok(())
}

/// Checks normalization of every conditional reachable within the horizon.
/// Enumerates all prefixes when there are at most `limit` of them.
pub fn check_normalization<K: FiniteKernel>(kernel: &K, hidden: &K::Hidden, limit: usize) -> Result<usize> {
    fn walk<K: FiniteKernel>(
        kernel: &K,
        hidden: &K::Hidden,
        prefix: &mut Vec<Outcome>,
        checked: &mut usize,
        limit: usize,
    ) -> Result<()> {
        if prefix.len() == kernel.horizon() {
            return Ok(());
        }
        let cond = kernel.conditional(hidden, prefix);
        let total = cond.total_mass();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
        *checked += 1;
        if *checked > limit {
            return Err(Error::Budget {
                what: "reachable prefixes".into(),
                budget: limit,
            });
        }
        for (z, m) in cond.support().to_vec() {
            if m > 0.0 {
                prefix.push(z);
                walk(kernel, hidden, prefix, checked, limit)?;
                prefix.pop();
            }
        }
        Ok(())
    }
    let mut checked = 0;
    walk(kernel, hidden, &mut Vec::new(), &mut checked, limit)?;
    Ok(checked)
}
