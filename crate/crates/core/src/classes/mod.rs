//! Finite function classes, label spaces, losses and outcome distributions.

mod builders;
mod spec;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

pub use builders::{
    full_binary_class, make_bounded_variation_class, make_threshold_class, total_variation,
};
pub use spec::{ClassSpec, LabelSpec};

/// Ordered, nonempty set of named points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    points: Vec<String>,
}

impl Domain {
    pub fn new(points: Vec<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("domain must be nonempty"));
        }
        let mut seen = HashSet::new();
        for p in &points {
            if !seen.insert(p.as_str()) {
                return Err(Error::invalid(format!("duplicate domain point {p:?}")));
            }
        }
        Ok(Domain { points })
    }

    /// Points named `1..=k`.
    pub fn integers(k: usize) -> Result<Self> {
        Domain::new((1..=k).map(|i| i.to_string()).collect())
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelKind {
    Binary,
    RealGrid,
}

impl LabelKind {
    fn name(self) -> &'static str {
        match self {
            LabelKind::Binary => "binary",
            LabelKind::RealGrid => "real-grid",
        }
    }
}

/// Finite output space: `{-1, +1}` or an increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSpace<T> {
    kind: LabelKind,
    values: Vec<T>,
}

impl<T: Scalar> LabelSpace<T> {
    pub fn binary() -> Self {
        LabelSpace {
            kind: LabelKind::Binary,
            values: vec![-T::one(), T::one()],
        }
    }

    /// Strictly increasing grid inside `[-1, 1]`.
    pub fn grid(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("label grid must be nonempty"));
        }
        let tol = T::tolerance();
        if values.iter().any(|&v| !v.is_finite() || v < -T::one() - tol || v > T::one() + tol) {
            return Err(Error::invalid("label grid values must lie in [-1, 1]"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("label grid must be strictly increasing"));
        }
        Ok(LabelSpace {
            kind: LabelKind::RealGrid,
            values,
        })
    }

    /// Grid of derived values (loss values), not restricted to `[-1, 1]`.
    pub(crate) fn derived_grid(mut values: Vec<T>) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        values.dedup_by(|a, b| (*a - *b).abs() <= T::tolerance());
        LabelSpace {
            kind: LabelKind::RealGrid,
            values,
        }
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn is_binary(&self) -> bool {
        self.kind == LabelKind::Binary
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: usize) -> T {
        self.values[index]
    }

    /// Index of `v` up to the scalar tolerance.
    pub fn index_of(&self, v: T) -> Option<usize> {
        let tol = T::tolerance();
        self.values.iter().position(|&w| (w - v).abs() <= tol)
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn spread(&self) -> T {
        self.max() - self.min()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    ZeroOne,
    Absolute,
    Squared,
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::ZeroOne => "zero-one",
            Loss::Absolute => "absolute",
            Loss::Squared => "squared",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "zero-one" | "01" | "zero_one" => Ok(Loss::ZeroOne),
            "absolute" | "abs" => Ok(Loss::Absolute),
            "squared" | "sq" => Ok(Loss::Squared),
            other => Err(Error::invalid(format!("unknown loss {other:?}"))),
        }
    }

    pub fn check_compatible<T: Scalar>(self, labels: &LabelSpace<T>) -> Result<()> {
        if self == Loss::ZeroOne && !labels.is_binary() {
            return Err(Error::IncompatibleLoss {
                loss: self.name(),
                labels: labels.kind().name(),
            });
        }
        Ok(())
    }

    /// Loss of predicting `prediction` when the label is `label`.
    pub fn eval<T: Scalar>(self, label: T, prediction: T) -> T {
        match self {
            Loss::ZeroOne => {
                if (label - prediction).abs() <= T::tolerance() {
                    T::zero()
                } else {
                    T::one()
                }
            }
            Loss::Absolute => (label - prediction).abs(),
            Loss::Squared => (label - prediction).powi(2),
        }
    }

    /// Upper bound B on the loss over `labels`.
    pub fn bound<T: Scalar>(self, labels: &LabelSpace<T>) -> T {
        match self {
            Loss::ZeroOne => T::one(),
            Loss::Absolute => labels.spread(),
            Loss::Squared => labels.spread().powi(2),
        }
    }
}

/// An `(x, y)` pair given by a domain index and a label index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Outcome {
    pub x: usize,
    pub y: usize,
}

impl Outcome {
    pub fn new(x: usize, y: usize) -> Self {
        Outcome { x, y }
    }
}

/// All pairs of a domain and a label space, ordered by `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSpace {
    n_points: usize,
    n_labels: usize,
}

impl OutcomeSpace {
    pub fn new(n_points: usize, n_labels: usize) -> Self {
        OutcomeSpace { n_points, n_labels }
    }

    pub fn of<T: Scalar>(class: &FiniteFunctionClass<T>) -> Self {
        OutcomeSpace::new(class.n_points(), class.labels().len())
    }

    pub fn size(&self) -> usize {
        self.n_points * self.n_labels
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn index(&self, z: Outcome) -> usize {
        debug_assert!(self.contains(z));
        z.x * self.n_labels + z.y
    }

    pub fn outcome(&self, index: usize) -> Outcome {
        Outcome::new(index / self.n_labels, index % self.n_labels)
    }

    pub fn contains(&self, z: Outcome) -> bool {
        z.x < self.n_points && z.y < self.n_labels
    }

    pub fn iter(&self) -> impl Iterator<Item = Outcome> + '_ {
        (0..self.size()).map(move |i| self.outcome(i))
    }
}

const NORMALIZATION_TOL: f64 = 1e-12;

/// Finite distribution over an [`OutcomeSpace`], stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    space: OutcomeSpace,
    masses: Vec<T>,
}

impl<T: Scalar> Distribution<T> {
    pub fn new(space: OutcomeSpace, masses: Vec<T>) -> Result<Self> {
        if masses.len() != space.size() {
            return Err(Error::invalid(format!(
                "expected {} masses, got {}",
                space.size(),
                masses.len()
            )));
        }
        if masses.iter().any(|&m| !(m >= T::zero())) {
            return Err(Error::invalid("masses must be nonnegative"));
        }
        let total = masses.iter().copied().sum::<T>().to_f64_lossy();
        let tol = NORMALIZATION_TOL.max(T::epsilon().to_f64_lossy() * 8.0);
        if (total - 1.0).abs() > tol {
            return Err(Error::NotNormalized(total));
        }
        Ok(Distribution { space, masses })
    }

    /// Builds a distribution from `(outcome, mass)` pairs; repeated outcomes add up.
    pub fn from_pairs(space: OutcomeSpace, pairs: &[(Outcome, T)]) -> Result<Self> {
        let mut masses = vec![T::zero(); space.size()];
        for &(z, m) in pairs {
            if !space.contains(z) {
                return Err(Error::invalid(format!("outcome {z:?} outside the outcome space")));
            }
            let i = space.index(z);
            masses[i] = masses[i] + m;
        }
        Distribution::new(space, masses)
    }

    pub fn point_mass(space: OutcomeSpace, z: Outcome) -> Self {
        let mut masses = vec![T::zero(); space.size()];
        masses[space.index(z)] = T::one();
        Distribution { space, masses }
    }

    pub fn uniform(space: OutcomeSpace) -> Self {
        let m = T::one() / T::from_usize(space.size()).expect("size fits");
        Distribution {
            space,
            masses: vec![m; space.size()],
        }
    }

    pub fn space(&self) -> OutcomeSpace {
        self.space
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn mass(&self, z: Outcome) -> T {
        self.masses[self.space.index(z)]
    }

    pub fn support(&self) -> impl Iterator<Item = (Outcome, T)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > T::zero())
            .map(|(i, &m)| (self.space.outcome(i), m))
    }

    /// `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, alpha: T, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::invalid("mixing distributions over different spaces"));
        }
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::invalid("mixture weight must lie in [0, 1]"));
        }
        let masses = self
            .masses
            .iter()
            .zip(&other.masses)
            .map(|(&p, &q)| alpha * p + (T::one() - alpha) * q)
            .collect();
        Ok(Distribution {
            space: self.space,
            masses,
        })
    }

    /// Uniform average of several distributions over the same space.
    pub fn average(dists: &[Self]) -> Result<Self> {
        let first = dists
            .first()
            .ok_or_else(|| Error::invalid("cannot average zero distributions"))?;
        let k = T::from_usize(dists.len()).expect("count fits");
        let mut masses = vec![T::zero(); first.space.size()];
        for d in dists {
            if d.space != first.space {
                return Err(Error::invalid("averaging distributions over different spaces"));
            }
            for (m, &p) in masses.iter_mut().zip(&d.masses) {
                *m = *m + p;
            }
        }
        for m in &mut masses {
            *m = *m / k;
        }
        Ok(Distribution {
            space: first.space,
            masses,
        })
    }

    /// Total variation distance `sup_A |P(A) - Q(A)|`.
    pub fn total_variation(&self, other: &Self) -> T {
        self.masses
            .iter()
            .zip(&other.masses)
            .map(|(&p, &q)| (p - q).abs())
            .sum::<T>()
            * T::half()
    }

    /// Mass placed on the `x` coordinate, marginalising out labels.
    pub fn x_marginal(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.space.n_points()];
        for (i, &m) in self.masses.iter().enumerate() {
            out[self.space.outcome(i).x] = out[self.space.outcome(i).x] + m;
        }
        out
    }

    pub fn support_set(&self) -> Vec<usize> {
        (0..self.masses.len())
            .filter(|&i| self.masses[i] > T::zero())
            .collect()
    }
}

/// Finite class stored as label codes: entry `(f, x)` indexes into the label space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFunctionClass<T> {
    domain: Domain,
    labels: LabelSpace<T>,
    codes: Vec<u32>,
    names: Option<Vec<String>>,
    derived: bool,
}

impl<T: Scalar> FiniteFunctionClass<T> {
    /// Builds a class from a `|F| x |X|` value matrix. Every value must be a
    /// label (up to tolerance) and rows must be distinct.
    pub fn new(
        domain: Domain,
        labels: LabelSpace<T>,
        values: Vec<Vec<T>>,
        names: Option<Vec<String>>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("a function class needs at least one function"));
        }
        let m = domain.size();
        let mut codes = Vec::with_capacity(values.len() * m);
        for (j, row) in values.iter().enumerate() {
            if row.len() != m {
                return Err(Error::invalid(format!(
                    "row {j} has {} entries, domain has {m}",
                    row.len()
                )));
            }
            for &v in row {
                let code = labels.index_of(v).ok_or_else(|| {
                    Error::invalid(format!("value {v} in row {j} is not a label"))
                })?;
                codes.push(code as u32);
            }
        }
        Self::from_codes(domain, labels, codes, names, false)
    }

    pub(crate) fn from_codes(
        domain: Domain,
        labels: LabelSpace<T>,
        codes: Vec<u32>,
        names: Option<Vec<String>>,
        derived: bool,
    ) -> Result<Self> {
        let m = domain.size();
        debug_assert_eq!(codes.len() % m, 0);
        let size = codes.len() / m;
        if size == 0 {
            return Err(Error::invalid("a function class needs at least one function"));
        }
        if let Some(names) = &names {
            if names.len() != size {
                return Err(Error::invalid(format!(
                    "{} names given for {size} functions",
                    names.len()
                )));
            }
        }
        if !derived {
            let mut seen = HashSet::new();
            for (j, row) in codes.chunks(m).enumerate() {
                if !seen.insert(row) {
                    return Err(Error::invalid(format!("row {j} duplicates an earlier row")));
                }
            }
        }
        Ok(FiniteFunctionClass {
            domain,
            labels,
            codes,
            names,
            derived,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn labels(&self) -> &LabelSpace<T> {
        &self.labels
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Derived classes (loss classes) may contain duplicate rows.
    pub fn is_derived(&self) -> bool {
        self.derived
    }

    pub fn size(&self) -> usize {
        self.codes.len() / self.domain.size()
    }

    pub fn n_points(&self) -> usize {
        self.domain.size()
    }

    pub fn code(&self, f: usize, x: usize) -> usize {
        self.codes[f * self.n_points() + x] as usize
    }

    pub fn value(&self, f: usize, x: usize) -> T {
        self.labels.value(self.code(f, x))
    }

    pub fn row_codes(&self, f: usize) -> &[u32] {
        let m = self.n_points();
        &self.codes[f * m..(f + 1) * m]
    }

    pub fn row(&self, f: usize) -> Vec<T> {
        self.row_codes(f)
            .iter()
            .map(|&c| self.labels.value(c as usize))
            .collect()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.size()).map(|f| self.row(f)).collect()
    }

    pub fn column(&self, x: usize) -> Vec<T> {
        (0..self.size()).map(|f| self.value(f, x)).collect()
    }

    pub fn outcome_space(&self) -> OutcomeSpace {
        OutcomeSpace::of(self)
    }

    /// Loss of function `f` on outcome `z`.
    pub fn loss(&self, loss: Loss, z: Outcome, f: usize) -> T {
        loss.eval(self.labels.value(z.y), self.value(f, z.x))
    }

    /// Subclass made of the listed rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut codes = Vec::with_capacity(rows.len() * self.n_points());
        for &f in rows {
            if f >= self.size() {
                return Err(Error::invalid(format!("row {f} out of range")));
            }
            codes.extend_from_slice(self.row_codes(f));
        }
        let names = self
            .names
            .as_ref()
            .map(|n| rows.iter().map(|&f| n[f].clone()).collect());
        Self::from_codes(self.domain.clone(), self.labels.clone(), codes, names, self.derived)
    }

    /// `{f : f(x) = label}`; `None` when no function qualifies.
    pub fn restrict(&self, x: usize, label: T) -> Option<Self> {
        let code = self.labels.index_of(label)? as u32;
        let rows: Vec<usize> = (0..self.size())
            .filter(|&f| self.codes[f * self.n_points() + x] == code)
            .collect();
        if rows.is_empty() {
            None
        } else {
            Some(self.select(&rows).expect("rows are in range"))
        }
    }

    /// Same functions with domain points reordered by `perm` (new point `i` is old point `perm[i]`).
    pub fn permute_points(&self, perm: &[usize]) -> Result<Self> {
        let m = self.n_points();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..m).collect::<Vec<_>>() {
            return Err(Error::invalid("not a permutation of the domain"));
        }
        let points = perm.iter().map(|&i| self.domain.points[i].clone()).collect();
        let codes = (0..self.size())
            .flat_map(|f| perm.iter().map(move |&i| self.codes[f * m + i]))
            .collect();
        Self::from_codes(Domain::new(points)?, self.labels.clone(), codes, self.names.clone(), self.derived)
    }
}

/// Expected loss `sum_z P(z) l(z, f)`.
pub fn expected_loss<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    loss: Loss,
    dist: &Distribution<T>,
    f: usize,
) -> Result<T> {
    loss.check_compatible(class.labels())?;
    if dist.space() != class.outcome_space() {
        return Err(Error::invalid("distribution is over a different outcome space"));
    }
    Ok(dist
        .support()
        .map(|(z, m)| m * class.loss(loss, z, f))
        .sum())
}

/// Loss class over the outcome space: row `j`, column `(x, y)` holds `l((x, y), f_j)`.
/// Duplicate rows are kept so that row `j` still corresponds to `f_j`.
pub fn loss_class<T: Scalar>(
    class: &FiniteFunctionClass<T>,
    loss: Loss,
) -> Result<FiniteFunctionClass<T>> {
    loss.check_compatible(class.labels())?;
    let space = class.outcome_space();
    let table: Vec<T> = (0..class.size())
        .flat_map(|f| space.iter().map(move |z| class.loss(loss, z, f)))
        .collect();
    let labels = LabelSpace::derived_grid(table.clone());
    let codes = table
        .iter()
        .map(|&v| labels.index_of(v).expect("value is on its own grid") as u32)
        .collect();
    let points = space
        .iter()
        .map(|z| {
            format!(
                "({},{})",
                class.domain().points()[z.x],
                class.labels().value(z.y)
            )
        })
        .collect();
    FiniteFunctionClass::from_codes(
        Domain::new(points)?,
        labels,
        codes,
        class.names().map(|n| n.to_vec()),
        true,
    )
}

/// Base class closed under adding a free constant: members are `f_theta + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetClass<T> {
    base: FiniteFunctionClass<T>,
}

impl<T: Scalar> OffsetClass<T> {
    pub fn new(base: FiniteFunctionClass<T>) -> Result<Self> {
        if base.labels().is_binary() {
            return Err(Error::invalid("offset classes need a real-grid base class"));
        }
        Ok(OffsetClass { base })
    }

    pub fn base(&self) -> &FiniteFunctionClass<T> {
        &self.base
    }

    pub fn eval(&self, theta: usize, offset: T, x: usize) -> T {
        self.base.value(theta, x) + offset
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_point(values: &[Vec<f64>]) -> FiniteFunctionClass<f64> {
        let m = values[0].len();
        FiniteFunctionClass::new(Domain::integers(m).unwrap(), LabelSpace::binary(), values.to_vec(), None)
            .unwrap()
    }

    #[test]
    fn domain_rejects_duplicates_and_empty() {
        assert!(Domain::new(vec![]).is_err());
        assert!(Domain::new(vec!["a".into(), "a".into()]).is_err());
        assert_eq!(Domain::integers(3).unwrap().size(), 3);
    }

    #[test]
    fn label_grid_validation() {
        assert!(LabelSpace::<f64>::grid(vec![-1.0, 0.0, 1.0]).is_ok());
        assert!(LabelSpace::<f64>::grid(vec![0.0, 0.0]).is_err());
        assert!(LabelSpace::<f64>::grid(vec![0.5, 0.0]).is_err());
        assert!(LabelSpace::<f64>::grid(vec![0.0, 1.5]).is_err());
        assert_eq!(LabelSpace::<f64>::binary().values(), &[-1.0, 1.0]);
    }

    #[test]
    fn class_rejects_duplicates_and_foreign_values() {
        let d = Domain::integers(2).unwrap();
        let dup = vec![vec![1.0, -1.0], vec![1.0, -1.0]];
        assert!(FiniteFunctionClass::new(d.clone(), LabelSpace::binary(), dup, None).is_err());
        let bad = vec![vec![1.0, 0.0]];
        assert!(FiniteFunctionClass::new(d.clone(), LabelSpace::binary(), bad, None).is_err());
        let empty: Vec<Vec<f64>> = vec![];
        assert!(FiniteFunctionClass::new(d, LabelSpace::binary(), empty, None).is_err());
    }

    #[test]
    fn loss_eval_examples() {
        assert_eq!(Loss::ZeroOne.eval(1.0, 1.0), 0.0);
        assert_eq!(Loss::ZeroOne.eval(1.0, -1.0), 1.0);
        assert_eq!(Loss::Absolute.eval(1.0, -1.0), 2.0);
        assert_eq!(Loss::Squared.eval(0.5, 0.0), 0.25);
    }

    #[test]
    fn zero_one_rejects_real_labels() {
        let c = FiniteFunctionClass::new(
            Domain::integers(1).unwrap(),
            LabelSpace::grid(vec![0.0, 0.5]).unwrap(),
            vec![vec![0.5]],
            None,
        )
        .unwrap();
        assert!(loss_class(&c, Loss::ZeroOne).is_err());
        let p = Distribution::uniform(c.outcome_space());
        assert!(expected_loss(&c, Loss::ZeroOne, &p, 0).is_err());
        assert!(expected_loss(&c, Loss::Squared, &p, 0).is_ok());
    }

    #[test]
    fn expected_loss_examples() {
        let c = binary_point(&[vec![1.0], vec![-1.0]]);
        let space = c.outcome_space();
        let pm = Distribution::point_mass(space, Outcome::new(0, 1));
        assert_eq!(expected_loss(&c, Loss::ZeroOne, &pm, 0).unwrap(), 0.0);
        assert_eq!(expected_loss(&c, Loss::ZeroOne, &pm, 1).unwrap(), 1.0);
        let u = Distribution::uniform(space);
        for f in 0..2 {
            assert_eq!(expected_loss(&c, Loss::ZeroOne, &u, f).unwrap(), 0.5);
        }
    }

    #[test]
    fn expected_loss_weighted_sum() {
        // grid class on two points, squared loss, P on three outcomes
        let labels = LabelSpace::grid(vec![-1.0, 0.0, 1.0]).unwrap();
        let c = FiniteFunctionClass::new(Domain::integers(2).unwrap(), labels, vec![vec![0.0, 1.0]], None)
            .unwrap();
        let space = c.outcome_space();
        let p = Distribution::from_pairs(
            space,
            &[
                (Outcome::new(0, 2), 0.5),  // y = 1 at x1, f = 0: loss 1
                (Outcome::new(1, 0), 0.25), // y = -1 at x2, f = 1: loss 4
                (Outcome::new(1, 1), 0.25), // y = 0 at x2, f = 1: loss 1
            ],
        )
        .unwrap();
        let direct = 0.5 * 1.0 + 0.25 * 4.0 + 0.25 * 1.0;
        assert_eq!(expected_loss(&c, Loss::Squared, &p, 0).unwrap(), direct);
    }

    #[test]
    fn non_normalized_distribution_rejected() {
        let space = OutcomeSpace::new(1, 2);
        assert!(matches!(
            Distribution::new(space, vec![0.5, 0.4]),
            Err(Error::NotNormalized(_))
        ));
        assert!(Distribution::new(space, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn loss_class_of_thresholds() {
        let c = make_threshold_class::<f64>(2).unwrap();
        let lc = loss_class(&c, Loss::ZeroOne).unwrap();
        assert_eq!(lc.size(), 3);
        assert_eq!(lc.n_points(), 4);
        assert!(lc.is_derived());
        // direct evaluation oracle
        for f in 0..3 {
            for x in 0..2 {
                for (yi, y) in [-1.0, 1.0].into_iter().enumerate() {
                    let expect = if c.value(f, x) == y { 0.0 } else { 1.0 };
                    assert_eq!(lc.value(f, x * 2 + yi), expect);
                }
            }
        }
    }

    #[test]
    fn loss_class_keeps_duplicate_rows() {
        // two functions that only differ where the loss does not see it
        let labels = LabelSpace::grid(vec![-1.0, 1.0]).unwrap();
        let c = FiniteFunctionClass::new(
            Domain::integers(1).unwrap(),
            labels,
            vec![vec![-1.0], vec![1.0]],
            None,
        )
        .unwrap();
        let lc = loss_class(&c, Loss::Absolute).unwrap();
        assert_eq!(lc.size(), 2);
        let single = c.select(&[0]).unwrap();
        assert_eq!(loss_class(&single, Loss::Absolute).unwrap().size(), 1);
    }

    #[test]
    fn restrict_examples() {
        let full = full_binary_class::<f64>(2).unwrap();
        assert_eq!(full.restrict(0, 1.0).unwrap().size(), 2);
        let single = full.select(&[1]).unwrap();
        let v = single.value(0, 0);
        assert_eq!(single.restrict(0, v).unwrap(), single);
        assert!(single.restrict(0, -v).is_none());
        let th = make_threshold_class::<f64>(3).unwrap();
        let r = th.restrict(1, 1.0).unwrap();
        assert_eq!(r.size(), 2);
        assert_eq!(r.rows(), vec![th.row(0), th.row(1)]);
    }

    #[test]
    fn distribution_mix_and_tv() {
        let space = OutcomeSpace::new(2, 2);
        let p: Distribution<f64> = Distribution::point_mass(space, Outcome::new(0, 0));
        let q = Distribution::point_mass(space, Outcome::new(1, 1));
        assert_eq!(p.total_variation(&q), 1.0);
        let m = p.mix(0.3, &q).unwrap();
        assert!((m.mass(Outcome::new(0, 0)) - 0.3).abs() < 1e-15);
        assert!((p.total_variation(&m) - 0.7).abs() < 1e-15);
        assert_eq!(m.x_marginal(), vec![0.3, 0.7]);
    }
}
