//! Threshold process on which every batch rule has per-step risk at least 1/8.
//!
//! The process is indexed by a uniformly random bit vector `b` of length
//! `2^n`. Inputs are bit vectors of length `2^n + 1` read as integers (most
//! significant bit first), labels are `1{X <= b1}` where `b1` appends a one to
//! `b`. Starting from `l_0 = 0`, step `t` flips a fair sign; on `+1` the
//! resolution grows to `l_t = l_{t-1} + 2^(n-t)`, otherwise `l_t = l_{t-1}`.
//! The emitted input keeps the first `l_t` bits of `b`, sets bit `l_t + 1`
//! and pads with zeros, so inputs are even and the true threshold is odd.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;

use super::{Conditional, FiniteKernel, Kernel, Labeled};
use crate::classes::{Domain, FiniteFunctionClass, LabelSpace, Outcome, OutcomeSpace};
use crate::{Error, Result, Scalar};

/// Input bit vector (as an integer) with its binary label.
pub type BitOutcome = Labeled<BigUint, bool>;

/// Uniform integer with `bits` random bits.
pub(crate) fn random_bits<R: Rng + ?Sized>(bits: usize, rng: &mut R) -> BigUint {
    let mut words = vec![0u32; bits.div_ceil(32)];
    for w in &mut words {
        *w = rng.random();
    }
    if !bits.is_multiple_of(32) {
        *words.last_mut().expect("bits > 0") &= (1u32 << (bits % 32)) - 1;
    }
    BigUint::from_slice(&words)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdversarialThreshold {
    n: usize,
}

impl AdversarialThreshold {
    pub const MAX_HORIZON: usize = 24;

    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > Self::MAX_HORIZON {
            return Err(Error::invalid(format!(
                "adversarial threshold horizon must lie in 1..={}",
                Self::MAX_HORIZON
            )));
        }
        Ok(AdversarialThreshold { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Length `2^n` of the hidden bit vector.
    pub fn hidden_bits(&self) -> usize {
        1 << self.n
    }

    /// Length `2^n + 1` of the emitted inputs.
    pub fn input_bits(&self) -> usize {
        self.hidden_bits() + 1
    }

    /// Bit `l` (1-based, most significant first) of the hidden vector.
    pub fn bit(&self, b: &BigUint, l: usize) -> bool {
        debug_assert!((1..=self.hidden_bits()).contains(&l));
        b.bit((self.hidden_bits() - l) as u64)
    }

    /// Input carrying the first `l` bits of `b`, then a one, then zeros.
    pub fn encode(&self, b: &BigUint, l: usize) -> BigUint {
        let m = self.hidden_bits();
        debug_assert!(l < m);
        ((b >> (m - l)) << (m + 1 - l)) | (BigUint::one() << (m - l))
    }

    /// Resolution `l` encoded by an emitted input.
    pub fn level(&self, x: &BigUint) -> usize {
        let tz = x.trailing_zeros().expect("emitted inputs are nonzero") as usize;
        self.hidden_bits() - tz
    }

    /// The realizable truth `b1 = 2b + 1`.
    pub fn truth(&self, b: &BigUint) -> BigUint {
        (b << 1usize) | BigUint::one()
    }

    pub fn label(&self, b: &BigUint, x: &BigUint) -> bool {
        x <= &self.truth(b)
    }

    /// Resolutions `(l_{t-1}, l_{t-1} + 2^(n-t))` of the low and high
    /// outcomes at step `t` after `prefix`.
    pub fn levels(&self, prefix: &[BitOutcome]) -> (usize, usize) {
        let t = prefix.len() + 1;
        assert!(t <= self.n, "step beyond the horizon");
        let prev = prefix.last().map_or(0, |z| self.level(&z.x));
        (prev, prev + (1 << (self.n - t)))
    }

    /// The low- and high-resolution outcomes `(b_t^-, b_t^+)` with their labels.
    pub fn step_outcomes(&self, b: &BigUint, prefix: &[BitOutcome]) -> (BitOutcome, BitOutcome) {
        let (lo, hi) = self.levels(prefix);
        let make = |l: usize| Labeled {
            x: self.encode(b, l),
            y: self.bit(b, l + 1),
        };
        (make(lo), make(hi))
    }
}

impl Kernel for AdversarialThreshold {
    type Outcome = BitOutcome;
    type Hidden = BigUint;

    fn horizon(&self) -> usize {
        self.n
    }

    fn draw_hidden<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        random_bits(self.hidden_bits(), rng)
    }

    fn conditional(&self, b: &BigUint, prefix: &[BitOutcome]) -> Conditional<BitOutcome> {
        let (low, high) = self.step_outcomes(b, prefix);
        Conditional {
            support: vec![(low, 0.5), (high, 0.5)],
        }
    }
}

/// The adversarial process over a finite domain `{0, ..., 2^(2^n + 1) - 1}`
/// with binary labels (index 0 is -1, index 1 is +1); small `n` only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdversarialFinite {
    inner: AdversarialThreshold,
}

impl AdversarialFinite {
    pub const MAX_HORIZON: usize = 3;

    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > Self::MAX_HORIZON {
            return Err(Error::invalid(format!(
                "finite adversarial process supports 1 <= n <= {}",
                Self::MAX_HORIZON
            )));
        }
        Ok(AdversarialFinite {
            inner: AdversarialThreshold::new(n)?,
        })
    }

    pub fn inner(&self) -> &AdversarialThreshold {
        &self.inner
    }

    fn lift(z: &Outcome) -> BitOutcome {
        Labeled {
            x: BigUint::from(z.x),
            y: z.y == 1,
        }
    }

    fn lower(z: &BitOutcome) -> Outcome {
        Outcome::new(z.x.to_usize().expect("small horizon"), usize::from(z.y))
    }

    /// Index of the class row equal to the realizable truth for hidden `b`.
    pub fn truth_row(&self, b: &BigUint) -> usize {
        b.to_usize().expect("small horizon")
    }
}

impl Kernel for AdversarialFinite {
    type Outcome = Outcome;
    type Hidden = BigUint;

    fn horizon(&self) -> usize {
        self.inner.n
    }

    fn draw_hidden<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        self.inner.draw_hidden(rng)
    }

    fn conditional(&self, b: &BigUint, prefix: &[Outcome]) -> Conditional<Outcome> {
        let lifted: Vec<BitOutcome> = prefix.iter().map(Self::lift).collect();
        let cond = self.inner.conditional(b, &lifted);
        Conditional {
            support: cond.support.iter().map(|(z, m)| (Self::lower(z), *m)).collect(),
        }
    }
}

impl FiniteKernel for AdversarialFinite {
    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::new(1 << self.inner.input_bits(), 2)
    }
}

/// Thresholds `x -> +1 iff x <= 2b + 1` over the inputs of
/// [`AdversarialFinite`], one row per hidden vector `b`.
pub fn adversarial_threshold_class<T: Scalar>(n: usize) -> Result<FiniteFunctionClass<T>> {
    let k = AdversarialFinite::new(n)?;
    let points = 1usize << k.inner.input_bits();
    let rows = (0..1usize << k.inner.hidden_bits())
        .map(|b| {
            (0..points)
                .map(|x| if x <= 2 * b + 1 { T::one() } else { -T::one() })
                .collect()
        })
        .collect();
    let width = k.inner.input_bits();
    let domain = Domain::new((0..points).map(|x| format!("{x:0width$b}")).collect())?;
    let names = (0..1usize << k.inner.hidden_bits())
        .map(|b| format!("b={b:0w$b}", w = k.inner.hidden_bits()))
        .collect();
    FiniteFunctionClass::new(domain, LabelSpace::binary(), rows, Some(names))
}

/// Maps binary labels of an inner process to real levels `u` (label 1) and
/// `u'` (label 0) with `u - u' >= gamma / 5`.
#[derive(Debug, Clone)]
pub struct RegressionTransform<K> {
    inner: K,
    high: f64,
    low: f64,
    gamma: f64,
}

impl<K> RegressionTransform<K> {
    pub fn new(inner: K, high: f64, low: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::invalid("margin gamma must be positive"));
        }
        if !(high > low) {
            return Err(Error::invalid("need u > u'"));
        }
        if high - low < gamma / 5.0 - 1e-12 {
            return Err(Error::invalid(format!(
                "levels {high} and {low} are closer than gamma/5 = {}",
                gamma / 5.0
            )));
        }
        Ok(RegressionTransform {
            inner,
            high,
            low,
            gamma,
        })
    }

    pub fn inner(&self) -> &K {
        &self.inner
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn level(&self, label: bool) -> f64 {
        if label {
            self.high
        } else {
            self.low
        }
    }

    /// Binary classifier read off a real prediction: 1 above the midpoint.
    pub fn classify(&self, prediction: f64) -> bool {
        prediction > (self.high + self.low) / 2.0
    }
}

impl<X, K> Kernel for RegressionTransform<K>
where
    X: Clone + PartialEq + std::fmt::Debug + Send + Sync,
    K: Kernel<Outcome = Labeled<X, bool>>,
{
    type Outcome = Labeled<X, f64>;
    type Hidden = K::Hidden;

    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn draw_hidden<R: Rng + ?Sized>(&self, rng: &mut R) -> K::Hidden {
        self.inner.draw_hidden(rng)
    }

    fn conditional(&self, hidden: &K::Hidden, prefix: &[Labeled<X, f64>]) -> Conditional<Labeled<X, f64>> {
        let inner_prefix: Vec<Labeled<X, bool>> = prefix
            .iter()
            .map(|z| Labeled {
                x: z.x.clone(),
                y: z.y > (self.high + self.low) / 2.0,
            })
            .collect();
        let cond = self.inner.conditional(hidden, &inner_prefix);
        Conditional {
            support: cond
                .support
                .into_iter()
                .map(|(z, m)| {
                    (
                        Labeled {
                            y: self.level(z.y),
                            x: z.x,
                        },
                        m,
                    )
                })
                .collect(),
        }
    }
}
