//! Exact combinatorial dimensions of finite classes.
//!
//! VC and fat-shattering dimensions search point subsets of increasing size.
//! Littlestone and sequential fat-shattering dimensions use the split
//! recursion on subclasses, memoized on the set of surviving rows:
//!
//! ```text
//! ldim(F) = max_x 1 + min(ldim(F[x -> +1]), ldim(F[x -> -1]))
//! sfat(F) = max_(x,s) 1 + min(sfat({f(x) >= s + g}), sfat({f(x) <= s - g}))
//! ```
//!
//! Witness values `s` range over midpoints of pairs of values the (sub)class
//! achieves at `x`; only the above/below partition matters, and every
//! feasible partition is dominated by one produced by such a midpoint.

use std::collections::HashMap;

use serde::Serialize;

use crate::classes::FiniteFunctionClass;
use crate::complexity::{Sign, SignTree};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DimensionKind {
    Vc,
    Littlestone,
    Fat,
    Sfat,
}

impl DimensionKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vc" => Ok(DimensionKind::Vc),
            "ldim" | "littlestone" => Ok(DimensionKind::Littlestone),
            "fat" => Ok(DimensionKind::Fat),
            "sfat" => Ok(DimensionKind::Sfat),
            other => Err(Error::invalid(format!("unknown dimension kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness<T> {
    /// Shattered point sequence.
    Points(Vec<usize>),
    /// Gamma-shattered points with their witness values.
    ScaledPoints(Vec<(usize, T)>),
    /// Shattered tree of points.
    Tree(SignTree<usize>),
    /// Gamma-shattered tree of `(point, witness value)`.
    ScaledTree(SignTree<(usize, T)>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport<T> {
    pub kind: DimensionKind,
    pub scale: Option<T>,
    pub value: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness<T>>,
}

/// Fixed-width bit set of class rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct RowSet(Vec<u64>);

impl RowSet {
    fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        if !n.is_multiple_of(64) {
            *words.last_mut().expect("n > 0") = (1u64 << (n % 64)) - 1;
        }
        RowSet(words)
    }

    fn empty_like(&self) -> Self {
        RowSet(vec![0; self.0.len()])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b)
        })
    }

    fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let mut out = self.empty_like();
        for i in self.iter() {
            if keep(i) {
                out.insert(i);
            }
        }
        out
    }
}

fn floor_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - 1 - n.leading_zeros()) as usize
    }
}

fn require_binary<T: Scalar>(class: &FiniteFunctionClass<T>) -> Result<()> {
    if class.labels().is_binary() {
        Ok(())
    } else {
        Err(Error::invalid("this dimension is defined for binary classes"))
    }
}

fn require_scale<T: Scalar>(gamma: T) -> Result<()> {
    if gamma > T::zero() && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("scale gamma must be positive"))
    }
}

const PLUS: u32 = 1;

/// Next k-combination of `0..m` in lexicographic order.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// True when every sign pattern on `points` is realized.
pub fn is_shattered_set<T: Scalar>(class: &FiniteFunctionClass<T>, points: &[usize]) -> bool {
    let k = points.len();
    if k > 24 || (k < usize::BITS as usize && class.size() < 1 << k) {
        return false;
    }
    let mut seen = vec![false; 1 << k];
    for f in 0..class.size() {
        let mask = points
            .iter()
            .enumerate()
            .map(|(t, &x)| usize::from(class.code(f, x) as u32 == PLUS) << t)
            .sum::<usize>();
        seen[mask] = true;
    }
    seen.into_iter().all(|b| b)
}

pub fn vc_dimension<T: Scalar>(class: &FiniteFunctionClass<T>) -> Result<DimensionReport<T>> {
    require_binary(class)?;
    let m = class.n_points();
    let cap = m.min(floor_log2(class.size()));
    let mut best: Vec<usize> = Vec::new();
    'sizes: for k in 1..=cap {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if is_shattered_set(class, &idx) {
                best = idx;
                continue 'sizes;
            }
            if !next_combination(&mut idx, m) {
                break 'sizes;
            }
        }
    }
    Ok(DimensionReport {
        kind: DimensionKind::Vc,
        scale: None,
        value: best.len(),
        witness: Some(Witness::Points(best)),
    })
}

struct Littlestone<'a, T> {
    class: &'a FiniteFunctionClass<T>,
    memo: HashMap<RowSet, usize>,
}

impl<T: Scalar> Littlestone<'_, T> {
    fn split(&self, set: &RowSet, x: usize) -> (RowSet, RowSet) {
        let plus = set.filter(|f| self.class.code(f, x) as u32 == PLUS);
        let minus = set.filter(|f| self.class.code(f, x) as u32 != PLUS);
        (plus, minus)
    }

    fn dim(&mut self, set: &RowSet) -> usize {
        let size = set.len();
        if size <= 1 {
            return 0;
        }
        if let Some(&d) = self.memo.get(set) {
            return d;
        }
        let cap = floor_log2(size);
        let mut best = 0;
        for x in 0..self.class.n_points() {
            let (plus, minus) = self.split(set, x);
            if plus.is_empty() || minus.is_empty() {
                continue;
            }
            let (small, large) = if plus.len() <= minus.len() {
                (plus, minus)
            } else {
                (minus, plus)
            };
            let a = self.dim(&small);
            if a < best {
                continue;
            }
            let b = self.dim(&large);
            best = best.max(1 + a.min(b));
            if best == cap {
                break;
            }
        }
        self.memo.insert(set.clone(), best);
        best
    }

    /// Fills heap-ordered nodes of a depth-`depth` shattered tree rooted at `index`.
    fn fill(&mut self, set: &RowSet, depth: usize, index: usize, nodes: &mut [Option<usize>]) {
        if depth == 0 {
            return;
        }
        for x in 0..self.class.n_points() {
            let (plus, minus) = self.split(set, x);
            if plus.is_empty() || minus.is_empty() {
                continue;
            }
            if self.dim(&plus) + 1 >= depth && self.dim(&minus) + 1 >= depth {
                nodes[index] = Some(x);
                self.fill(&minus, depth - 1, 2 * index + 1, nodes);
                self.fill(&plus, depth - 1, 2 * index + 2, nodes);
                return;
            }
        }
        unreachable!("subclass dimension guarantees a splitting point");
    }
}

pub fn littlestone_dimension<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    with_witness: bool,
) -> Result<DimensionReport<T>> {
    require_binary(class)?;
    let mut solver = Littlestone {
        class,
        memo: HashMap::new(),
    };
    let full = RowSet::full(class.size());
    let value = solver.dim(&full);
    let witness = if with_witness && value > 0 {
        let mut nodes = vec![None; (1 << value) - 1];
        solver.fill(&full, value, 0, &mut nodes);
        let nodes = nodes.into_iter().map(|n| n.expect("filled")).collect();
        Some(Witness::Tree(SignTree::from_nodes(value, nodes)?))
    } else {
        None
    };
    Ok(DimensionReport {
        kind: DimensionKind::Littlestone,
        scale: None,
        value,
        witness,
    })
}

/// True when every sign path of `tree` is realized by some function.
pub fn is_shattered_tree<T: Scalar>(class: &FiniteFunctionClass<T>, tree: &SignTree<usize>) -> bool {
    (0..1u64 << tree.depth()).all(|mask| {
        let path = Sign::path_from_mask(mask, tree.depth());
        (0..class.size()).any(|f| {
            tree.along(&path).zip(&path).all(|(&x, &s)| {
                (class.code(f, x) as u32 == PLUS) == (s == Sign::Plus)
            })
        })
    })
}

/// Which side of the witness `s` the value `v` falls on at margin `gamma`.
fn side<T: Scalar>(v: T, s: T, gamma: T) -> Option<Sign> {
    let tol = T::tolerance();
    if v - s >= gamma - tol {
        Some(Sign::Plus)
    } else if s - v >= gamma - tol {
        Some(Sign::Minus)
    } else {
        None
    }
}

/// Witness candidates at `x` for the rows in `rows` that split them into a
/// nonempty above part and a nonempty below part.
fn witness_candidates<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    rows: impl Iterator<Item = usize>,
    x: usize,
    gamma: T,
) -> Vec<T> {
    let mut codes: Vec<u32> = rows.map(|f| class.code(f, x) as u32).collect();
    codes.sort_unstable();
    codes.dedup();
    let vals: Vec<T> = codes.iter().map(|&c| class.labels().value(c as usize)).collect();
    let mut out = Vec::new();
    for i in 0..vals.len() {
        for j in i..vals.len() {
            let s = (vals[i] + vals[j]) * T::half();
            let below = vals.iter().any(|&v| side(v, s, gamma) == Some(Sign::Minus));
            let above = vals.iter().any(|&v| side(v, s, gamma) == Some(Sign::Plus));
            if below && above && !out.iter().any(|&w: &T| (w - s).abs() <= T::tolerance()) {
                out.push(s);
            }
        }
    }
    out
}

/// True when `points` with witnesses are gamma-shattered.
pub fn is_fat_shattered<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    points: &[(usize, T)],
    gamma: T,
) -> bool {
    let k = points.len();
    if k > 24 {
        return false;
    }
    let mut seen = vec![false; 1 << k];
    for f in 0..class.size() {
        let mut mask = 0usize;
        let mut ok = true;
        for (t, &(x, s)) in points.iter().enumerate() {
            match side(class.value(f, x), s, gamma) {
                Some(Sign::Plus) => mask |= 1 << t,
                Some(Sign::Minus) => {}
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            seen[mask] = true;
        }
    }
    seen.into_iter().all(|b| b)
}

struct FatSearch<'a, T> {
    class: &'a FiniteFunctionClass<T>,
    gamma: T,
    candidates: Vec<Vec<T>>,
}

impl<T: Scalar> FatSearch<'_, T> {
    /// Depth-first search for `target` gamma-shattered points extending `chosen`.
    /// `patterns[f]` is the sign pattern of `f` on `chosen`, `None` if it sits
    /// inside some margin.
    fn extend(
        &self,
        chosen: &mut Vec<(usize, T)>,
        patterns: &[Option<u64>],
        target: usize,
    ) -> bool {
        if chosen.len() == target {
            return true;
        }
        let start = chosen.last().map_or(0, |&(x, _)| x + 1);
        let t = chosen.len();
        for x in start..self.class.n_points() {
            for &s in &self.candidates[x] {
                let next: Vec<Option<u64>> = patterns
                    .iter()
                    .enumerate()
                    .map(|(f, p)| {
                        let p = (*p)?;
                        match side(self.class.value(f, x), s, self.gamma)? {
                            Sign::Plus => Some(p | 1 << t),
                            Sign::Minus => Some(p),
                        }
                    })
                    .collect();
                let mut realized: Vec<u64> = next.iter().flatten().copied().collect();
                realized.sort_unstable();
                realized.dedup();
                if realized.len() < 1 << (t + 1) {
                    continue;
                }
                chosen.push((x, s));
                if self.extend(chosen, &next, target) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
}

pub fn fat_shattering<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    gamma: T,
) -> Result<DimensionReport<T>> {
    require_scale(gamma)?;
    let search = FatSearch {
        class,
        gamma,
        candidates: (0..class.n_points())
            .map(|x| witness_candidates(class, 0..class.size(), x, gamma))
            .collect(),
    };
    let cap = class.n_points().min(floor_log2(class.size()));
    let mut best = Vec::new();
    for k in 1..=cap {
        let mut chosen = Vec::new();
        if search.extend(&mut chosen, &vec![Some(0); class.size()], k) {
            best = chosen;
        } else {
            break;
        }
    }
    Ok(DimensionReport {
        kind: DimensionKind::Fat,
        scale: Some(gamma),
        value: best.len(),
        witness: Some(Witness::ScaledPoints(best)),
    })
}

struct SeqFat<'a, T> {
    class: &'a FiniteFunctionClass<T>,
    gamma: T,
    memo: HashMap<RowSet, usize>,
}

impl<T: Scalar> SeqFat<'_, T> {
    fn splits(&self, set: &RowSet) -> Vec<(usize, T, RowSet, RowSet)> {
        let mut out = Vec::new();
        for x in 0..self.class.n_points() {
            for s in witness_candidates(self.class, set.iter(), x, self.gamma) {
                let above = set.filter(|f| side(self.class.value(f, x), s, self.gamma) == Some(Sign::Plus));
                let below = set.filter(|f| side(self.class.value(f, x), s, self.gamma) == Some(Sign::Minus));
                out.push((x, s, above, below));
            }
        }
        out
    }

    fn dim(&mut self, set: &RowSet) -> usize {
        let size = set.len();
        if size <= 1 {
            return 0;
        }
        if let Some(&d) = self.memo.get(set) {
            return d;
        }
        let cap = floor_log2(size);
        let mut best = 0;
        for (_, _, above, below) in self.splits(set) {
            let (small, large) = if above.len() <= below.len() {
                (above, below)
            } else {
                (below, above)
            };
            let a = self.dim(&small);
            if a < best {
                continue;
            }
            let b = self.dim(&large);
            best = best.max(1 + a.min(b));
            if best == cap {
                break;
            }
        }
        self.memo.insert(set.clone(), best);
        best
    }

    fn fill(&mut self, set: &RowSet, depth: usize, index: usize, nodes: &mut [Option<(usize, T)>]) {
        if depth == 0 {
            return;
        }
        for (x, s, above, below) in self.splits(set) {
            if self.dim(&above) + 1 >= depth && self.dim(&below) + 1 >= depth {
                nodes[index] = Some((x, s));
                self.fill(&below, depth - 1, 2 * index + 1, nodes);
                self.fill(&above, depth - 1, 2 * index + 2, nodes);
                return;
            }
        }
        unreachable!("subclass dimension guarantees a split");
    }
}

pub fn seq_fat_shattering<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    gamma: T,
    with_witness: bool,
) -> Result<DimensionReport<T>> {
    require_scale(gamma)?;
    let mut solver = SeqFat {
        class,
        gamma,
        memo: HashMap::new(),
    };
    let full = RowSet::full(class.size());
    let value = solver.dim(&full);
    let witness = if with_witness && value > 0 {
        let mut nodes = vec![None; (1 << value) - 1];
        solver.fill(&full, value, 0, &mut nodes);
        let nodes = nodes.into_iter().map(|n| n.expect("filled")).collect();
        Some(Witness::ScaledTree(SignTree::from_nodes(value, nodes)?))
    } else {
        None
    };
    Ok(DimensionReport {
        kind: DimensionKind::Sfat,
        scale: Some(gamma),
        value,
        witness,
    })
}

/// True when every sign path of the witness tree is realized with margin `gamma`.
pub fn is_seq_fat_shattered<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    tree: &SignTree<(usize, T)>,
    gamma: T,
) -> bool {
    (0..1u64 << tree.depth()).all(|mask| {
        let path = Sign::path_from_mask(mask, tree.depth());
        (0..class.size()).any(|f| {
            tree.along(&path)
                .zip(&path)
                .all(|(&(x, s), &sign)| side(class.value(f, x), s, gamma) == Some(sign))
        })
    })
}

/// Dispatches on `kind`; `gamma` is required for the scale-sensitive kinds.
pub fn dimension<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    kind: DimensionKind,
    gamma: Option<T>,
    with_witness: bool,
) -> Result<DimensionReport<T>> {
    let need_gamma = || gamma.ok_or_else(|| Error::invalid("this dimension needs --gamma"));
    let mut report = match kind {
        DimensionKind::Vc => vc_dimension(class)?,
        DimensionKind::Littlestone => littlestone_dimension(class, with_witness)?,
        DimensionKind::Fat => fat_shattering(class, need_gamma()?)?,
        DimensionKind::Sfat => seq_fat_shattering(class, need_gamma()?, with_witness)?,
    };
    if !with_witness {
        report.witness = None;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{full_binary_class, make_threshold_class, Domain, LabelSpace};

    fn grid_class(values: Vec<Vec<f64>>, grid: Vec<f64>) -> FiniteFunctionClass<f64> {
        let m = values[0].len();
        FiniteFunctionClass::new(Domain::integers(m).unwrap(), LabelSpace::grid(grid).unwrap(), values, None)
            .unwrap()
    }

    #[test]
    fn vc_examples() {
        let full = full_binary_class::<f64>(3).unwrap();
        assert_eq!(vc_dimension(&full).unwrap().value, 3);
        assert_eq!(vc_dimension(&full.select(&[2]).unwrap()).unwrap().value, 0);
        let th = make_threshold_class::<f64>(5).unwrap();
        let r = vc_dimension(&th).unwrap();
        assert_eq!(r.value, 1);
        match r.witness {
            Some(Witness::Points(p)) => assert!(is_shattered_set(&th, &p)),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn non_binary_rejected() {
        let c = grid_class(vec![vec![0.0], vec![0.5]], vec![0.0, 0.5]);
        assert!(vc_dimension(&c).is_err());
        assert!(littlestone_dimension(&c, false).is_err());
        assert!(fat_shattering(&c, 0.0).is_err());
        assert!(seq_fat_shattering(&c, -1.0, false).is_err());
    }

    #[test]
    fn littlestone_examples() {
        let full = full_binary_class::<f64>(3).unwrap();
        assert_eq!(littlestone_dimension(&full, false).unwrap().value, 3);
        let th = make_threshold_class::<f64>(3).unwrap();
        let r = littlestone_dimension(&th, true).unwrap();
        assert_eq!(r.value, 2);
        match r.witness {
            Some(Witness::Tree(t)) => {
                assert_eq!(t.depth(), 2);
                assert!(is_shattered_tree(&th, &t));
            }
            other => panic!("unexpected witness {other:?}"),
        }
        let single = th.select(&[0]).unwrap();
        assert_eq!(littlestone_dimension(&single, true).unwrap().value, 0);
    }

    #[test]
    fn fat_examples() {
        // constants {-1, 0, 1}: one point splits, two points never do
        let consts = grid_class(
            vec![vec![-1.0, -1.0], vec![0.0, 0.0], vec![1.0, 1.0]],
            vec![-1.0, 0.0, 1.0],
        );
        assert_eq!(fat_shattering(&consts, 0.5).unwrap().value, 1);
        assert_eq!(fat_shattering(&consts, 1.5).unwrap().value, 0);
        assert_eq!(seq_fat_shattering(&consts, 1.5, false).unwrap().value, 0);
    }

    #[test]
    fn non_consecutive_midpoints_are_needed() {
        // values {0, 0.5, 1} at one point, gamma = 0.45: only s = 0.5 (an
        // achieved value, between 0 and 1) separates {0} from {1}
        let c = grid_class(vec![vec![0.0], vec![0.5], vec![1.0]], vec![0.0, 0.5, 1.0]);
        assert_eq!(fat_shattering(&c, 0.45).unwrap().value, 1);
        // values {0, 0.2, 1}, gamma = 0.45: separating s lies in [0.45, 0.55];
        // no achieved value or consecutive midpoint (0.1, 0.6) qualifies
        let c = grid_class(vec![vec![0.0], vec![0.2], vec![1.0]], vec![0.0, 0.2, 1.0]);
        assert_eq!(fat_shattering(&c, 0.45).unwrap().value, 1);
        assert_eq!(seq_fat_shattering(&c, 0.45, false).unwrap().value, 1);
    }

    #[test]
    fn seq_fat_witness_is_valid() {
        let grid = LabelSpace::grid(vec![-1.0, -0.5, 0.0, 0.5, 1.0]).unwrap();
        let c = crate::classes::make_bounded_variation_class(3, 1.0, &grid).unwrap();
        let r = seq_fat_shattering(&c, 0.25, true).unwrap();
        assert!(r.value >= 1);
        match r.witness {
            Some(Witness::ScaledTree(t)) => assert!(is_seq_fat_shattered(&c, &t, 0.25)),
            other => panic!("unexpected witness {other:?}"),
        }
        let f = fat_shattering(&c, 0.25).unwrap();
        match f.witness {
            Some(Witness::ScaledPoints(p)) => {
                assert_eq!(p.len(), f.value);
                assert!(is_fat_shattered(&c, &p, 0.25));
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn dispatch_requires_gamma() {
        let th = make_threshold_class::<f64>(2).unwrap();
        assert!(dimension(&th, DimensionKind::Fat, None, false).is_err());
        let r = dimension(&th, DimensionKind::Vc, None, false).unwrap();
        assert!(r.witness.is_none());
    }
}
