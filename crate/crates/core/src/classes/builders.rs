use super::{Domain, FiniteFunctionClass, LabelKind, LabelSpace};
use crate::{Error, Result, Scalar};

/// Thresholds `f_theta(x) = +1 iff x > theta` on `{1..k}`, `theta = 0..k`.
pub fn make_threshold_class<T: Scalar>(k: usize) -> Result<FiniteFunctionClass<T>> {
    if k == 0 {
        return Err(Error::invalid("threshold class needs k >= 1"));
    }
    let rows = (0..=k)
        .map(|theta| {
            (1..=k)
                .map(|x| if x > theta { T::one() } else { -T::one() })
                .collect()
        })
        .collect();
    let names = (0..=k).map(|theta| format!("theta={theta}")).collect();
    FiniteFunctionClass::new(Domain::integers(k)?, LabelSpace::binary(), rows, Some(names))
}

/// All `2^m` sign patterns on `m` points.
pub fn full_binary_class<T: Scalar>(m: usize) -> Result<FiniteFunctionClass<T>> {
    if m == 0 || m > 20 {
        return Err(Error::invalid("full binary class needs 1 <= m <= 20"));
    }
    let rows = (0..1usize << m)
        .map(|mask| {
            (0..m)
                .map(|i| if mask >> i & 1 == 1 { T::one() } else { -T::one() })
                .collect()
        })
        .collect();
    FiniteFunctionClass::new(Domain::integers(m)?, LabelSpace::binary(), rows, None)
}

pub fn total_variation<T: Scalar>(values: &[T]) -> T {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Every function on `{1..grid_size}` with values in `value_grid` and total
/// variation at most `variation`.
pub fn make_bounded_variation_class<T: Scalar>(
    grid_size: usize,
    variation: T,
    value_grid: &LabelSpace<T>,
) -> Result<FiniteFunctionClass<T>> {
    if grid_size == 0 {
        return Err(Error::invalid("grid_size must be >= 1"));
    }
    if !(variation >= T::zero()) {
        return Err(Error::invalid("variation budget must be nonnegative"));
    }
    if value_grid.kind() != LabelKind::RealGrid {
        return Err(Error::invalid("bounded-variation classes use a real-grid label space"));
    }
    let vals = value_grid.values();
    let budget = variation + T::tolerance();
    let mut rows = Vec::new();
    let mut current = Vec::with_capacity(grid_size);

    fn extend<T: Scalar>(
        vals: &[T],
        n: usize,
        remaining: T,
        current: &mut Vec<T>,
        rows: &mut Vec<Vec<T>>,
    ) {
        if current.len() == n {
            rows.push(current.clone());
            return;
        }
        for &v in vals {
            let step = match current.last() {
                Some(&prev) => (v - prev).abs(),
                None => T::zero(),
            };
            if step <= remaining {
                current.push(v);
                extend(vals, n, remaining - step, current, rows);
                current.pop();
            }
        }
    }

    extend(vals, grid_size, budget, &mut current, &mut rows);
    FiniteFunctionClass::new(Domain::integers(grid_size)?, value_grid.clone(), rows, None)
}
