//! Rademacher and sequential Rademacher complexities of finite classes.
//!
//! Fixed-sample and fixed-tree values are exact averages over all `2^n`
//! sign vectors up to depth [`MAX_EXACT_DEPTH`] and Monte-Carlo beyond. The
//! supremum over trees is computed exactly by backward induction, see
//! [`seq_rademacher_sup`].

mod dp;
mod tree;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classes::{loss_class, FiniteFunctionClass, Loss};
use crate::seed::rng_from_seed;
use crate::{Error, Result, Scalar};

pub use dp::{optimal_tree, seq_rademacher_sup, DEFAULT_STATE_BUDGET};
pub use tree::{Sign, SignTree};

/// Largest depth for which all sign vectors are enumerated.
pub const MAX_EXACT_DEPTH: usize = 20;

/// Sample counts `|X|^n` up to this size are searched exhaustively.
pub const MAX_EXACT_SAMPLES: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexityMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityValue<T> {
    pub value: T,
    pub mode: ComplexityMode,
    pub stderr: T,
    pub n: usize,
    /// Set when the value comes from a heuristic search over samples and is
    /// only a lower estimate of the maximum.
    pub lower_estimate: bool,
}

impl<T: Scalar> ComplexityValue<T> {
    pub fn exact(value: T, n: usize) -> Self {
        ComplexityValue {
            value,
            mode: ComplexityMode::Exact,
            stderr: T::zero(),
            n,
            lower_estimate: false,
        }
    }
}

/// How sign expectations are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimation {
    /// Exact up to [`MAX_EXACT_DEPTH`], Monte-Carlo beyond.
    Auto { reps: usize, seed: u64 },
    Exact,
    MonteCarlo { reps: usize, seed: u64 },
}

impl Default for Estimation {
    fn default() -> Self {
        Estimation::Auto {
            reps: 10_000,
            seed: 0,
        }
    }
}

impl Estimation {
    fn resolve(self, n: usize) -> Result<Option<(usize, u64)>> {
        match self {
            Estimation::Exact if n > MAX_EXACT_DEPTH => Err(Error::Budget {
                what: format!("exact enumeration of 2^{n} sign vectors"),
                budget: 1 << MAX_EXACT_DEPTH,
            }),
            Estimation::Exact => Ok(None),
            Estimation::Auto { .. } if n <= MAX_EXACT_DEPTH => Ok(None),
            Estimation::Auto { reps, seed } | Estimation::MonteCarlo { reps, seed } => {
                if reps == 0 {
                    return Err(Error::invalid("Monte-Carlo needs at least one replicate"));
                }
                Ok(Some((reps, seed)))
            }
        }
    }
}

/// Averages `sup(path)` over sign paths, exactly or by sampling.
fn sign_average<T, F>(n: usize, est: Estimation, sup: F) -> Result<ComplexityValue<T>>
where
    T: Scalar,
    F: Fn(&[Sign]) -> T + Sync,
{
    let nt = T::from_usize(n).expect("n fits");
    match est.resolve(n)? {
        None => {
            let total: T = (0..1u64 << n)
                .into_par_iter()
                .map(|mask| sup(&Sign::path_from_mask(mask, n)))
                .collect::<Vec<T>>()
                .into_iter()
                .sum();
            let paths = T::from_u64(1 << n).expect("fits");
            Ok(ComplexityValue::exact(total / paths / nt, n))
        }
        Some((reps, seed)) => {
            let mut rng = rng_from_seed(seed);
            let draws: Vec<f64> = (0..reps)
                .map(|_| {
                    let path: Vec<Sign> = (0..n).map(|_| Sign::from_bit(rng.random::<u64>())).collect();
                    (sup(&path) / nt).to_f64_lossy()
                })
                .collect();
            let (mean, se) = mean_stderr(&draws);
            Ok(ComplexityValue {
                value: T::from_f64_lossy(mean),
                mode: ComplexityMode::MonteCarlo,
                stderr: T::from_f64_lossy(se),
                n,
                lower_estimate: false,
            })
        }
    }
}

pub(crate) fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn check_points<T: Scalar>(class: &FiniteFunctionClass<T>, points: &[usize]) -> Result<()> {
    if let Some(&x) = points.iter().find(|&&x| x >= class.n_points()) {
        return Err(Error::invalid(format!("point index {x} outside the domain")));
    }
    Ok(())
}

/// `E_eps sup_f (1/n) sum_t eps_t f(x_t)` for a fixed sample.
pub fn rademacher_fixed_sample<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    sample: &[usize],
    est: Estimation,
) -> Result<ComplexityValue<T>> {
    if sample.is_empty() {
        return Err(Error::invalid("sample must be nonempty"));
    }
    check_points(class, sample)?;
    let table: Vec<Vec<T>> = (0..class.size())
        .map(|f| sample.iter().map(|&x| class.value(f, x)).collect())
        .collect();
    sign_average(sample.len(), est, |eps| {
        table
            .iter()
            .map(|row| signed_sum(row.iter().copied(), eps))
            .fold(T::neg_infinity(), T::max)
    })
}

fn signed_sum<T: Scalar>(values: impl Iterator<Item = T>, eps: &[Sign]) -> T {
    values
        .zip(eps)
        .map(|(v, s)| if *s == Sign::Plus { v } else { -v })
        .sum()
}

/// Next multiset of size `idx.len()` from `0..m`, as a nondecreasing sequence.
fn next_multiset(idx: &mut [usize], m: usize) -> bool {
    let mut i = idx.len();
    while i > 0 {
        i -= 1;
        if idx[i] + 1 < m {
            let v = idx[i] + 1;
            for j in &mut idx[i..] {
                *j = v;
            }
            return true;
        }
    }
    false
}

/// Maximum of [`rademacher_fixed_sample`] over samples `x_{1:n}` drawn from
/// the domain with repetition.
///
/// This deterministic-sample maximum upper-bounds the worst case over input
/// distributions. Samples are enumerated as multisets (the value is
/// permutation invariant) when `|X|^n <= 10^6`; otherwise a random-restart
/// hill search is used and the result is flagged as a lower estimate.
pub fn rademacher_worst_case<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    n: usize,
    est: Estimation,
) -> Result<ComplexityValue<T>> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let m = class.n_points();
    let exhaustive = (m as u128).checked_pow(n as u32).is_some_and(|c| c <= MAX_EXACT_SAMPLES);
    if exhaustive {
        let mut idx = vec![0; n];
        let mut best: Option<ComplexityValue<T>> = None;
        loop {
            let v = rademacher_fixed_sample(class, &idx, est)?;
            if best.as_ref().is_none_or(|b| v.value > b.value) {
                best = Some(v);
            }
            if !next_multiset(&mut idx, m) {
                break;
            }
        }
        return Ok(best.expect("at least one sample"));
    }

    let seed = match est {
        Estimation::Auto { seed, .. } | Estimation::MonteCarlo { seed, .. } => seed,
        Estimation::Exact => 0,
    };
    let mut rng = rng_from_seed(seed ^ 0x5EED_0F5E_A2C4);
    let mut best: Option<ComplexityValue<T>> = None;
    for _ in 0..8 {
        let mut sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
        let mut current = rademacher_fixed_sample(class, &sample, est)?;
        let mut improved = true;
        while improved {
            improved = false;
            for t in 0..n {
                for x in 0..m {
                    if x == sample[t] {
                        continue;
                    }
                    let old = sample[t];
                    sample[t] = x;
                    let v = rademacher_fixed_sample(class, &sample, est)?;
                    if v.value > current.value + T::tolerance() {
                        current = v;
                        improved = true;
                    } else {
                        sample[t] = old;
                    }
                }
            }
        }
        if best.as_ref().is_none_or(|b| current.value > b.value) {
            best = Some(current);
        }
    }
    let mut best = best.expect("restarts ran");
    best.lower_estimate = true;
    Ok(best)
}

/// `E_eps sup_f (1/n) sum_t eps_t f(x_t(eps_{1:t-1}))` for a fixed tree.
pub fn seq_rademacher_fixed_tree<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    tree: &SignTree<usize>,
    est: Estimation,
) -> Result<ComplexityValue<T>> {
    check_points(class, tree.nodes())?;
    sign_average(tree.depth(), est, |eps| {
        (0..class.size())
            .map(|f| signed_sum(tree.along(eps).map(|&x| class.value(f, x)), eps))
            .fold(T::neg_infinity(), T::max)
    })
}

/// Supremum over outcome-labelled trees of the sequential Rademacher
/// complexity of the loss class.
pub fn seq_rademacher_loss_class<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    loss: Loss,
    n: usize,
    state_budget: usize,
) -> Result<ComplexityValue<T>> {
    seq_rademacher_sup(&loss_class(class, loss)?, n, state_budget)
}

/// Checks that `eps -> (eps_t * s_t(eps_{1:t-1}))_t` permutes `{-1, +1}^n`.
pub fn sign_bijection_check(witness: &SignTree<Sign>) -> Result<bool> {
    let n = witness.depth();
    if n > MAX_EXACT_DEPTH {
        return Err(Error::invalid("sign bijection check supports depth <= 20"));
    }
    let mut hit = vec![false; 1 << n];
    for mask in 0..1u64 << n {
        let eps = Sign::path_from_mask(mask, n);
        let image: Vec<Sign> = witness.along(&eps).zip(&eps).map(|(&s, &e)| e.times(s)).collect();
        let j = Sign::path_to_mask(&image) as usize;
        if hit[j] {
            return Ok(false);
        }
        hit[j] = true;
    }
    Ok(true)
}
