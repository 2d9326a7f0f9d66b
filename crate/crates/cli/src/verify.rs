//! Built-in verification suites. Each suite measures quantities through the
//! library and compares them with the bound they are supposed to satisfy.

use learnlab::classes::{full_binary_class, make_threshold_class, Distribution, LabelSpace};
use learnlab::complexity::{
    seq_rademacher_loss_class, seq_rademacher_sup, sign_bijection_check, DEFAULT_STATE_BUDGET,
};
use learnlab::dims::{fat_shattering, littlestone_dimension, seq_fat_shattering, vc_dimension};
use learnlab::learners::{Erm, Hedge, LearningRate, TieBreak};
use learnlab::processes::{
    adversarial_threshold_class, AdversarialFinite, DriftSchedule, Drifting, Mixture, PointMass, ProductIid,
    RandomLevel,
};
use learnlab::regret::{
    adversarial_erm_risk, decomposition_report, gen_value_estimate, iid_value_estimate, individual_sequence_regret,
    martingale_deviation, mixture_argmin_fraction, preq_value_estimate, random_level_estimate, regression_erm_risk,
    ulln_deviation,
};
use learnlab::seed::rng_from_seed;
use learnlab::{Domain, FunctionClass, Loss, OffsetClass, Outcome, OutcomeSpace, Sign, SignTree};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const SUITES: [&str; 12] = [
    "halving",
    "dp-brute-force",
    "lower-1/8",
    "erm-upper",
    "reductions",
    "preq-decomp",
    "bijection",
    "dims-order",
    "random-level",
    "mixture",
    "regression-lower",
    "umlln",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// What is being compared, in words.
    pub statement: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Replicate budget; `scale` multiplies the default counts.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20_240_601,
            scale: 1.0,
        }
    }
}

impl VerifyOptions {
    fn reps(&self, base: usize) -> usize {
        ((base as f64 * self.scale).round() as usize).max(2)
    }
}

fn check(name: impl Into<String>, statement: impl Into<String>, measured: f64, threshold: f64, pass: bool) -> Check {
    Check {
        name: name.into(),
        statement: statement.into(),
        measured,
        threshold,
        pass,
    }
}

/// `measured <= threshold`.
fn at_most(name: impl Into<String>, statement: impl Into<String>, measured: f64, threshold: f64) -> Check {
    check(name, statement, measured, threshold, measured <= threshold)
}

/// `measured >= threshold`.
fn at_least(name: impl Into<String>, statement: impl Into<String>, measured: f64, threshold: f64) -> Check {
    check(name, statement, measured, threshold, measured >= threshold)
}

pub fn run_suite(name: &str, opts: VerifyOptions) -> CliResult<Vec<VerifyReport>> {
    if name == "all" {
        return SUITES.iter().map(|s| single(s, opts)).collect();
    }
    Ok(vec![single(name, opts)?])
}

fn single(name: &str, opts: VerifyOptions) -> CliResult<VerifyReport> {
    let checks = match name {
        "halving" => halving(opts)?,
        "dp-brute-force" => dp_consistency(opts)?,
        "lower-1/8" => lower_eighth(opts)?,
        "erm-upper" => erm_upper(opts)?,
        "reductions" => reductions(opts)?,
        "preq-decomp" => preq_decomp(opts)?,
        "bijection" => bijection(opts)?,
        "dims-order" => dims_order(opts)?,
        "random-level" => random_level(opts)?,
        "mixture" => mixture(opts)?,
        "regression-lower" => regression_lower(opts)?,
        "umlln" => umlln(opts)?,
        other => {
            return Err(CliError::usage(format!(
                "unknown suite {other:?}; expected one of {} or all",
                SUITES.join(", ")
            )))
        }
    };
    Ok(VerifyReport {
        suite: name.to_string(),
        seed: opts.seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

fn class_from(rows: Vec<Vec<f64>>, labels: LabelSpace<f64>) -> CliResult<FunctionClass> {
    let m = rows[0].len();
    Ok(FunctionClass::new(Domain::integers(m)?, labels, rows, None)?)
}

fn random_binary<R: Rng>(rng: &mut R, max_f: usize, max_x: usize) -> CliResult<FunctionClass> {
    let m = rng.random_range(1..=max_x);
    let mut masks: Vec<usize> = (0..1usize << m).collect();
    masks.shuffle(rng);
    let k = rng.random_range(1..=max_f.min(1 << m));
    let rows = masks[..k]
        .iter()
        .map(|mask| (0..m).map(|x| if mask >> x & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect();
    class_from(rows, LabelSpace::binary())
}

fn random_grid<R: Rng>(rng: &mut R, grid: &[f64], max_f: usize, max_x: usize) -> CliResult<FunctionClass> {
    let m = rng.random_range(1..=max_x);
    let k = rng.random_range(1..=max_f);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    while rows.len() < k {
        let r: Vec<f64> = (0..m).map(|_| grid[rng.random_range(0..grid.len())]).collect();
        if !rows.contains(&r) {
            rows.push(r);
        }
    }
    class_from(rows, LabelSpace::grid(grid.to_vec())?)
}

fn halving(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let mut rng = rng_from_seed(opts.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..opts.reps(40) {
        let class = random_binary(&mut rng, 5, 3)?;
        for n in 1..=4 {
            let full = seq_rademacher_sup(&class, n, DEFAULT_STATE_BUDGET)?.value;
            let lossy = seq_rademacher_loss_class(&class, Loss::ZeroOne, n, DEFAULT_STATE_BUDGET)?.value;
            worst = worst.max((lossy - 0.5 * full).abs());
        }
    }
    Ok(vec![at_most(
        "zero-one loss class halves",
        "max |SeqRad(zero-one loss class) - SeqRad(class)/2| over random binary classes",
        worst,
        1e-9,
    )])
}

/// Brute force over every point-labelled tree.
fn brute_force_seq_rad(class: &FunctionClass, n: usize) -> f64 {
    let m = class.n_points();
    let nodes = (1usize << n) - 1;
    let mut labels = vec![0usize; nodes];
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut total = 0.0;
        for mask in 0..1u64 << n {
            let eps = Sign::path_from_mask(mask, n);
            let tree = SignTree::from_nodes(n, labels.clone()).expect("full tree");
            let sup = (0..class.size())
                .map(|f| tree.along(&eps).zip(&eps).map(|(&x, e)| f64::from(e.value()) * class.value(f, x)).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            total += sup;
        }
        best = best.max(total / (1u64 << n) as f64 / n as f64);
        let mut i = 0;
        while i < nodes {
            labels[i] += 1;
            if labels[i] < m {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == nodes {
            return best;
        }
    }
}

fn dp_consistency(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let mut rng = rng_from_seed(opts.seed.wrapping_add(1));
    let mut worst: f64 = 0.0;
    for i in 0..opts.reps(20) {
        let class = if i % 2 == 0 {
            random_binary(&mut rng, 5, 3)?
        } else {
            random_grid(&mut rng, &[-1.0, -0.5, 0.0, 0.5, 1.0], 5, 3)?
        };
        for n in 1..=3 {
            let dp = seq_rademacher_sup(&class, n, DEFAULT_STATE_BUDGET)?.value;
            worst = worst.max((dp - brute_force_seq_rad(&class, n)).abs());
        }
    }
    Ok(vec![at_most(
        "induction equals tree enumeration",
        "max |backward induction - enumeration over all trees|, depth 1..3",
        worst,
        1e-12,
    )])
}

fn lower_eighth(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let reps = opts.reps(10_000);
    TieBreak::ALL
        .iter()
        .map(|&tb| {
            let r = adversarial_erm_risk(8, tb, reps, opts.seed)?.average;
            Ok(at_least(
                format!("adversarial ERM risk, {}", tb.name()),
                "mean zero-one risk + 3 stderr of threshold ERM on the adversarial process vs 1/8",
                r.mean + 3.0 * r.stderr,
                0.125,
            ))
        })
        .collect()
}

fn erm_upper(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let class = make_threshold_class::<f64>(3)?;
    let space = class.outcome_space();
    let loss = Loss::ZeroOne;
    let n = 8;
    let reps = opts.reps(2_000);
    let p = Distribution::from_pairs(
        space,
        &[
            (Outcome::new(0, 0), 0.3),
            (Outcome::new(1, 1), 0.2),
            (Outcome::new(1, 0), 0.1),
            (Outcome::new(2, 1), 0.4),
        ],
    )?;
    let q = Distribution::from_pairs(space, &[(Outcome::new(2, 0), 0.5), (Outcome::new(0, 1), 0.5)])?;
    let rule = Erm::new(TieBreak::LowestIndex);
    let bound = 4.0 * seq_rademacher_loss_class(&class, loss, n, DEFAULT_STATE_BUDGET)?.value;
    let statement = "mean gen value - 3 stderr vs 4 SeqRad of the loss class";
    let record = |name: &str, est: learnlab::RegretEstimate, bound: f64| {
        at_most(name, statement, est.mean - 3.0 * est.stderr, bound)
    };
    let seq: Vec<Outcome> = (0..n).map(|t| Outcome::new(t % 3, (t / 2) % 2)).collect();
    let adv_class = adversarial_threshold_class::<f64>(1)?;
    let adv_bound = 4.0 * seq_rademacher_loss_class(&adv_class, loss, 1, DEFAULT_STATE_BUDGET)?.value;
    Ok(vec![
        record("product", gen_value_estimate(&rule, &class, loss, &ProductIid::new(p.clone(), n), reps, opts.seed)?, bound),
        record(
            "mixture",
            gen_value_estimate(&rule, &class, loss, &Mixture::new(0.4, p.clone(), q.clone(), n)?, reps, opts.seed)?,
            bound,
        ),
        record(
            "drifting",
            gen_value_estimate(
                &rule,
                &class,
                loss,
                &Drifting::new(q, p, n, DriftSchedule::Linear)?,
                reps,
                opts.seed,
            )?,
            bound,
        ),
        record("point-mass", gen_value_estimate(&rule, &class, loss, &PointMass::new(space, seq)?, reps, opts.seed)?, bound),
        record(
            "adversarial",
            gen_value_estimate(&rule, &adv_class, loss, &AdversarialFinite::new(1)?, reps, opts.seed)?,
            adv_bound,
        ),
    ])
}

fn reductions(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let class = make_threshold_class::<f64>(4)?;
    let space = class.outcome_space();
    let mut rng = rng_from_seed(opts.seed.wrapping_add(5));
    let masses: Vec<f64> = (0..space.size()).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = masses.iter().sum();
    let p = Distribution::new(space, masses.iter().map(|m| m / total).collect())?;
    let reps = opts.reps(300);
    let mut product_mismatch = 0usize;
    for tb in TieBreak::ALL {
        let rule = Erm::new(tb);
        for n in [1, 4, 9] {
            let a = gen_value_estimate(&rule, &class, Loss::ZeroOne, &ProductIid::new(p.clone(), n), reps, opts.seed)?;
            let b = iid_value_estimate(&rule, &class, Loss::ZeroOne, &p, n, reps, opts.seed)?;
            product_mismatch += a.values().into_iter().flatten().zip(b.values().into_iter().flatten()).filter(|(x, y)| x != y).count();
        }
    }
    let hedge = Hedge::new(&class, Loss::ZeroOne, LearningRate::Anytime)?;
    let mut point_mismatch = 0usize;
    for _ in 0..20 {
        let n = rng.random_range(1..12);
        let seq: Vec<Outcome> = (0..n).map(|_| space.outcome(rng.random_range(0..space.size()))).collect();
        let direct = individual_sequence_regret(&hedge, &class, Loss::ZeroOne, &seq)?;
        let est = preq_value_estimate(&hedge, &class, Loss::ZeroOne, &PointMass::new(space, seq)?, 10, opts.seed)?;
        point_mismatch += est.values().into_iter().flatten().filter(|&&v| v != direct).count();
    }
    Ok(vec![
        at_most(
            "product process equals iid",
            "replicates where the product-process gen value differs from the iid value",
            product_mismatch as f64,
            0.0,
        ),
        at_most(
            "point mass equals individual sequence",
            "replicates where the point-mass prequential value differs from the individual-sequence regret",
            point_mismatch as f64,
            0.0,
        ),
    ])
}

fn preq_decomp(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let class = make_threshold_class::<f64>(2)?;
    let space = class.outcome_space();
    let loss = Loss::ZeroOne;
    let n = 32;
    let reps = opts.reps(2_000);
    let rule = Hedge::new(&class, loss, LearningRate::Anytime)?;
    let seq_rad = seq_rademacher_loss_class(&class, loss, n, DEFAULT_STATE_BUDGET)?.value;
    let p = Distribution::from_pairs(
        space,
        &[
            (Outcome::new(0, 0), 0.25),
            (Outcome::new(1, 1), 0.35),
            (Outcome::new(1, 0), 0.15),
            (Outcome::new(0, 1), 0.25),
        ],
    )?;
    let p_part = Distribution::from_pairs(space, &[(Outcome::new(0, 1), 0.6), (Outcome::new(1, 0), 0.4)])?;
    let q_part = Distribution::from_pairs(space, &[(Outcome::new(0, 0), 0.5), (Outcome::new(1, 1), 0.5)])?;
    let reports = [
        ("product", decomposition_report(&rule, &class, loss, &ProductIid::new(p, n), reps, opts.seed)?),
        ("mixture", decomposition_report(&rule, &class, loss, &Mixture::new(0.3, p_part, q_part, n)?, reps, opts.seed)?),
    ];
    let mut checks = Vec::new();
    for (name, r) in reports {
        checks.push(at_most(
            format!("{name}: term I centered"),
            "|mean of term I| - 3 stderr",
            r.term_i.mean.abs() - 3.0 * r.term_i.stderr,
            0.0,
        ));
        checks.push(at_most(
            format!("{name}: term III bounded"),
            "mean of term III - 3 stderr vs 2 SeqRad of the loss class",
            r.term_iii.mean - 3.0 * r.term_iii.stderr,
            2.0 * seq_rad,
        ));
        checks.push(at_most(
            format!("{name}: terms add up"),
            "max |I + II + III - total| over replicates",
            r.max_residual,
            1e-9,
        ));
    }
    Ok(checks)
}

fn bijection(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let mut rng = rng_from_seed(opts.seed.wrapping_add(7));
    let trees = opts.reps(100);
    let mut good = 0usize;
    for _ in 0..trees {
        let tree = SignTree::from_fn(10, |_| Sign::from_bit(rng.random_range(0..2)))?;
        good += usize::from(sign_bijection_check(&tree)?);
    }
    Ok(vec![at_least(
        "sign flips are bijective",
        "fraction of random depth-10 witness trees whose sign map is a bijection",
        good as f64 / trees as f64,
        1.0,
    )])
}

fn dims_order(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let mut rng = rng_from_seed(opts.seed.wrapping_add(8));
    let mut vc_over = 0usize;
    for _ in 0..opts.reps(200) {
        let class = random_binary(&mut rng, 6, 4)?;
        vc_over += usize::from(vc_dimension(&class)?.value > littlestone_dimension(&class, false)?.value);
    }
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut fat_over = 0usize;
    for _ in 0..opts.reps(100) {
        let class = random_grid(&mut rng, &grid, 5, 4)?;
        for gamma in [0.25, 0.5, 1.0] {
            fat_over += usize::from(fat_shattering(&class, gamma)?.value > seq_fat_shattering(&class, gamma, false)?.value);
        }
    }
    let mut formula_misses = 0usize;
    for k in 1..=7usize {
        let class = make_threshold_class::<f64>(k)?;
        formula_misses += usize::from(littlestone_dimension(&class, false)?.value != (k + 1).ilog2() as usize);
        formula_misses += usize::from(vc_dimension(&class)?.value != 1);
    }
    Ok(vec![
        at_most("vc <= ldim", "random binary classes with vc > ldim", vc_over as f64, 0.0),
        at_most("fat <= sfat", "random grid classes and scales with fat > sfat", fat_over as f64, 0.0),
        at_most(
            "threshold formulas",
            "thresholds k <= 7 where vc != 1 or ldim != floor(log2(k + 1))",
            formula_misses as f64,
            0.0,
        ),
    ])
}

fn random_level(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let labels = LabelSpace::grid(vec![-1.0, 0.0, 1.0])?;
    let base = class_from(vec![vec![0.0, 0.0, 0.0], vec![-1.0, 0.0, 1.0], vec![1.0, 0.0, -1.0]], labels)?;
    let offset = OffsetClass::new(base)?;
    let reps = opts.reps(1_000);
    let mut checks = Vec::new();
    let mut risks = Vec::new();
    let mut errors = Vec::new();
    for n in [50usize, 200] {
        let kernel = RandomLevel::new(offset.clone(), 1, vec![0.3, 0.3, 0.4], n)?;
        let r = random_level_estimate(&kernel, reps, opts.seed)?;
        checks.push(at_least(format!("n={n}: risk at least 1"), "mean risk of offset ERM vs 1", r.risk.mean, 1.0));
        checks.push(at_most(
            format!("n={n}: risk at most 1 + 10/n"),
            "mean risk of offset ERM vs 1 + 10/n",
            r.risk.mean,
            1.0 + 10.0 / n as f64,
        ));
        risks.push(r.risk.mean);
        errors.push(r.level_error.mean);
    }
    checks.push(check(
        "risk decreases in n",
        "mean risk at n=200 vs n=50",
        risks[1],
        risks[0],
        risks[1] < risks[0],
    ));
    checks.push(check(
        "level error decreases in n",
        "mean |U_n - xi_0| at n=200 vs n=50",
        errors[1],
        errors[0],
        errors[1] < errors[0],
    ));
    Ok(checks)
}

fn mixture(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let class = class_from(vec![vec![1.0, 1.0], vec![-1.0, -1.0]], LabelSpace::binary())?;
    let space = OutcomeSpace::of(&class);
    let p = Distribution::from_pairs(space, &[(Outcome::new(0, 1), 0.5), (Outcome::new(1, 1), 0.5)])?;
    let q = Distribution::from_pairs(space, &[(Outcome::new(0, 0), 0.7), (Outcome::new(1, 0), 0.3)])?;
    let r = mixture_argmin_fraction(&class, Loss::ZeroOne, &Mixture::new(0.3, p, q, 10)?, opts.reps(10_000), opts.seed)?;
    Ok(vec![at_most(
        "argmin follows the drawn component",
        "|fraction with argmin R_n = f*_P - lambda| - 3 stderr",
        (r.mean - 0.3).abs() - 3.0 * r.stderr,
        0.0,
    )])
}

fn regression_lower(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let gamma = 0.5;
    let reps = opts.reps(10_000);
    TieBreak::ALL
        .iter()
        .map(|&tb| {
            let r = regression_erm_risk(8, 0.55, 0.45, gamma, tb, reps, opts.seed)?.average;
            Ok(at_least(
                format!("regression ERM risk, {}", tb.name()),
                "mean absolute-loss risk + 3 stderr vs gamma/80",
                r.mean + 3.0 * r.stderr,
                gamma / 80.0,
            ))
        })
        .collect()
}

fn umlln(opts: VerifyOptions) -> CliResult<Vec<Check>> {
    let class = full_binary_class::<f64>(2)?;
    let space = OutcomeSpace::new(2, 2);
    let p = Distribution::from_pairs(
        space,
        &[
            (Outcome::new(0, 0), 0.2),
            (Outcome::new(0, 1), 0.2),
            (Outcome::new(1, 0), 0.5),
            (Outcome::new(1, 1), 0.1),
        ],
    )?;
    let reps = opts.reps(5_000);
    let mut means = Vec::new();
    let mut mismatched = 0usize;
    for n in [8usize, 16, 32] {
        let m = martingale_deviation(&ProductIid::new(p.clone(), n), &class, reps, opts.seed)?;
        let u = ulln_deviation(&class, &p, n, reps, opts.seed)?;
        mismatched += usize::from(m.values != u.values);
        means.push(m.mean);
    }
    Ok(vec![
        check("deviation decreases 8 -> 16", "mean sup deviation at n=16 vs n=8", means[1], means[0], means[1] < means[0]),
        check("deviation decreases 16 -> 32", "mean sup deviation at n=32 vs n=16", means[2], means[1], means[2] < means[1]),
        at_most(
            "matches the iid deviation",
            "horizons where martingale and iid deviations differ replicate-wise",
            mismatched as f64,
            0.0,
        ),
    ])
}
