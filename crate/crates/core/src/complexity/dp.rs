//! Exact supremum of the sequential Rademacher complexity over trees.
//!
//! With `s: F -> Z` the vector of signed partial sums, the value satisfies
//!
//! ```text
//! V_n(s) = max_f s(f)
//! V_t(s) = max_x (V_{t+1}(s + col(x)) + V_{t+1}(s - col(x))) / 2
//! ```
//!
//! and the complexity is `V_0(0) / n`. Class values are scaled to integers
//! so states are exact integer vectors. `V_t(s + k) = V_t(s) + k` for a
//! constant shift `k`, so states are stored with their minimum subtracted
//! and columns are deduplicated up to shift and sign.

use std::collections::HashMap;

use super::{ComplexityValue, Sign, SignTree};
use crate::classes::FiniteFunctionClass;
use crate::{Error, Result, Scalar};

pub const DEFAULT_STATE_BUDGET: usize = 5_000_000;

/// Integer scale `q` with every value times `q` integral, if a small one exists.
fn integer_scale(values: &[f64]) -> (f64, bool) {
    let fits = |q: f64| {
        values
            .iter()
            .all(|v| ((v * q) - (v * q).round()).abs() <= 1e-9 * q.max(1.0))
    };
    for q in 1..=10_000u32 {
        if fits(q as f64) {
            return (q as f64, true);
        }
    }
    for e in 5..=9 {
        let q = 10f64.powi(e);
        if fits(q) {
            return (q, true);
        }
    }
    (1e9, false)
}

struct SupDp {
    columns: Vec<Vec<i64>>,
    memo: Vec<HashMap<Vec<i64>, f64>>,
    states: usize,
    budget: usize,
}

impl SupDp {
    fn new<T: Scalar>(class: &FiniteFunctionClass<T>, n: usize, budget: usize) -> (Self, f64) {
        let flat: Vec<f64> = (0..class.size())
            .flat_map(|f| (0..class.n_points()).map(move |x| class.value(f, x).to_f64_lossy()))
            .collect();
        let (scale, _exact) = integer_scale(&flat);
        let mut columns: Vec<Vec<i64>> = Vec::new();
        for x in 0..class.n_points() {
            let col: Vec<i64> = (0..class.size())
                .map(|f| (class.value(f, x).to_f64_lossy() * scale).round() as i64)
                .collect();
            let canonical = canonical_column(&col);
            if !columns.contains(&canonical) {
                columns.push(canonical);
            }
        }
        let dp = SupDp {
            columns,
            memo: vec![HashMap::new(); n + 1],
            states: 0,
            budget,
        };
        (dp, scale)
    }

    /// `V` with `remaining` rounds left at state `state`.
    fn value(&mut self, remaining: usize, state: &[i64]) -> Result<f64> {
        let shift = *state.iter().min().expect("nonempty class");
        if remaining == 0 {
            return Ok(*state.iter().max().expect("nonempty class") as f64);
        }
        let key: Vec<i64> = state.iter().map(|v| v - shift).collect();
        if let Some(&v) = self.memo[remaining].get(&key) {
            return Ok(v + shift as f64);
        }
        let mut best = f64::NEG_INFINITY;
        let mut up = vec![0i64; key.len()];
        let mut down = vec![0i64; key.len()];
        for c in 0..self.columns.len() {
            for i in 0..key.len() {
                up[i] = key[i] + self.columns[c][i];
                down[i] = key[i] - self.columns[c][i];
            }
            let v = 0.5 * (self.value(remaining - 1, &up)? + self.value(remaining - 1, &down)?);
            best = best.max(v);
        }
        self.states += 1;
        if self.states > self.budget {
            return Err(Error::Budget {
                what: "sequential Rademacher DP states".into(),
                budget: self.budget,
            });
        }
        self.memo[remaining].insert(key, best);
        Ok(best + shift as f64)
    }

    fn best_column(&mut self, remaining: usize, state: &[i64]) -> Result<usize> {
        let mut best = (f64::NEG_INFINITY, 0);
        for c in 0..self.columns.len() {
            let up: Vec<i64> = state.iter().zip(&self.columns[c]).map(|(s, v)| s + v).collect();
            let down: Vec<i64> = state.iter().zip(&self.columns[c]).map(|(s, v)| s - v).collect();
            let v = 0.5 * (self.value(remaining - 1, &up)? + self.value(remaining - 1, &down)?);
            if v > best.0 {
                best = (v, c);
            }
        }
        Ok(best.1)
    }
}

/// Column shifted to minimum zero, choosing the smaller of `c` and `-c`.
fn canonical_column(col: &[i64]) -> Vec<i64> {
    let lo = *col.iter().min().expect("nonempty");
    let hi = *col.iter().max().expect("nonempty");
    let a: Vec<i64> = col.iter().map(|v| v - lo).collect();
    let b: Vec<i64> = col.iter().map(|v| hi - v).collect();
    a.min(b)
}

/// `sup` over all point-labelled trees of depth `n` of the sequential
/// Rademacher complexity, by exact backward induction.
pub fn seq_rademacher_sup<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    n: usize,
    state_budget: usize,
) -> Result<ComplexityValue<T>> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let (mut dp, scale) = SupDp::new(class, n, state_budget);
    let root = dp.value(n, &vec![0; class.size()])?;
    Ok(ComplexityValue::exact(
        T::from_f64_lossy(root / (n as f64 * scale)),
        n,
    ))
}

/// A tree attaining [`seq_rademacher_sup`], read off the induction.
pub fn optimal_tree<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    n: usize,
    state_budget: usize,
) -> Result<SignTree<usize>> {
    if n == 0 || n > super::MAX_EXACT_DEPTH {
        return Err(Error::invalid("optimal tree extraction supports 1 <= n <= 20"));
    }
    let (mut dp, scale) = SupDp::new(class, n, state_budget);
    // map canonical columns back to a representative point
    let mut point_of = Vec::with_capacity(dp.columns.len());
    for canonical in &dp.columns {
        let x = (0..class.n_points())
            .find(|&x| {
                let col: Vec<i64> = (0..class.size())
                    .map(|f| (class.value(f, x).to_f64_lossy() * scale).round() as i64)
                    .collect();
                &canonical_column(&col) == canonical
            })
            .expect("every canonical column comes from a point");
        point_of.push(x);
    }
    let mut nodes = vec![0usize; (1 << n) - 1];
    let mut stack = vec![(0usize, 0usize, vec![0i64; class.size()])];
    while let Some((index, level, state)) = stack.pop() {
        let c = dp.best_column(n - level, &state)?;
        let x = point_of[c];
        nodes[index] = x;
        if level + 1 < n {
            // follow the actual column, not the canonical one
            let col: Vec<i64> = (0..class.size())
                .map(|f| (class.value(f, x).to_f64_lossy() * scale).round() as i64)
                .collect();
            for sign in [Sign::Minus, Sign::Plus] {
                let next: Vec<i64> = state
                    .iter()
                    .zip(&col)
                    .map(|(s, v)| if sign == Sign::Plus { s + v } else { s - v })
                    .collect();
                let child = 2 * index + 1 + usize::from(sign == Sign::Plus);
                stack.push((child, level + 1, next));
            }
        }
    }
    SignTree::from_nodes(n, nodes)
}
