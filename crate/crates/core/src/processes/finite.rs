use rand::Rng;

use super::{Conditional, FiniteKernel, Kernel, Path};
use crate::classes::{Distribution, Outcome, OutcomeSpace};
use crate::{Error, Result};

/// `P_t = P` for every prefix.
#[derive(Debug, Clone)]
pub struct ProductIid {
    dist: Distribution<f64>,
    cond: Conditional<Outcome>,
    n: usize,
}

impl ProductIid {
    pub fn new(dist: Distribution<f64>, n: usize) -> Self {
        let cond = Conditional::from_distribution(&dist);
        ProductIid { dist, cond, n }
    }

    pub fn distribution(&self) -> &Distribution<f64> {
        &self.dist
    }
}

impl Kernel for ProductIid {
    type Outcome = Outcome;
    type Hidden = ();

    fn horizon(&self) -> usize {
        self.n
    }

    fn draw_hidden<R: Rng + ?Sized>(&self, _rng: &mut R) {}

    fn conditional(&self, _: &(), _: &[Outcome]) -> Conditional<Outcome> {
        self.cond.clone()
    }
}

impl FiniteKernel for ProductIid {
    fn space(&self) -> OutcomeSpace {
        self.dist.space()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixtureComponent {
    P,
    Q,
}

/// With probability `lambda` the whole path is iid from `P`, otherwise from
/// `Q`; `P` and `Q` have disjoint supports, so the first outcome reveals the
/// component.
#[derive(Debug, Clone)]
pub struct Mixture {
    lambda: f64,
    p: Distribution<f64>,
    q: Distribution<f64>,
    first: Conditional<Outcome>,
    n: usize,
}

impl Mixture {
    pub fn new(lambda: f64, p: Distribution<f64>, q: Distribution<f64>, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid("mixture weight must lie in [0, 1]"));
        }
        if p.space() != q.space() {
            return Err(Error::invalid("mixture components over different spaces"));
        }
        let ps = p.support_set();
        if q.support_set().iter().any(|i| ps.contains(i)) {
            return Err(Error::invalid("mixture components must have disjoint supports"));
        }
        let first = Conditional::from_distribution(&p.mix(lambda, &q)?);
        Ok(Mixture {
            lambda,
            p,
            q,
            first,
            n,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> &Distribution<f64> {
        &self.p
    }

    pub fn q(&self) -> &Distribution<f64> {
        &self.q
    }

    fn component_of(&self, z: Outcome) -> MixtureComponent {
        if self.p.mass(z) > 0.0 {
            MixtureComponent::P
        } else {
            MixtureComponent::Q
        }
    }

    /// Evaluator-side: the component that generated `path`.
    pub fn component<H>(&self, path: &Path<Outcome, H>) -> Option<MixtureComponent> {
        path.outcomes().first().map(|&z| self.component_of(z))
    }
}

impl Kernel for Mixture {
    type Outcome = Outcome;
    type Hidden = ();

    fn horizon(&self) -> usize {
        self.n
    }

    fn draw_hidden<R: Rng + ?Sized>(&self, _rng: &mut R) {}

    fn conditional(&self, _: &(), prefix: &[Outcome]) -> Conditional<Outcome> {
        match prefix.first() {
            None => self.first.clone(),
            Some(&z) => match self.component_of(z) {
                MixtureComponent::P => Conditional::from_distribution(&self.p),
                MixtureComponent::Q => Conditional::from_distribution(&self.q),
            },
        }
    }
}

impl FiniteKernel for Mixture {
    fn space(&self) -> OutcomeSpace {
        self.p.space()
    }
}

/// Weight `w_t` on the end distribution at step `t` (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftSchedule {
    /// `w_t = t / n`.
    Linear,
    /// `w_t = 1 - (1 + t)^(-rate)`; an infinite rate gives `w_t = 1`.
    Polynomial { rate: f64 },
}

/// `P_t = (1 - w_t) P_start + w_t P_end`, independent of the prefix.
#[derive(Debug, Clone)]
pub struct Drifting {
    start: Distribution<f64>,
    end: Distribution<f64>,
    n: usize,
    schedule: DriftSchedule,
}

impl Drifting {
    pub fn new(
        start: Distribution<f64>,
        end: Distribution<f64>,
        n: usize,
        schedule: DriftSchedule,
    ) -> Result<Self> {
        if start.space() != end.space() {
            return Err(Error::invalid("drift endpoints over different spaces"));
        }
        if let DriftSchedule::Polynomial { rate } = schedule {
            if !(rate > 0.0) {
                return Err(Error::invalid("drift rate must be positive"));
            }
        }
        Ok(Drifting {
            start,
            end,
            n,
            schedule,
        })
    }

    pub fn weight(&self, t: usize) -> f64 {
        match self.schedule {
            DriftSchedule::Linear => t as f64 / self.n as f64,
            DriftSchedule::Polynomial { rate } => 1.0 - (1.0 + t as f64).powf(-rate),
        }
    }

    pub fn end(&self) -> &Distribution<f64> {
        &self.end
    }

    pub fn start(&self) -> &Distribution<f64> {
        &self.start
    }

    pub fn at(&self, t: usize) -> Distribution<f64> {
        self.end
            .mix(self.weight(t), &self.start)
            .expect("weights lie in [0, 1] and spaces match")
    }
}

impl Kernel for Drifting {
    type Outcome = Outcome;
    type Hidden = ();

    fn horizon(&self) -> usize {
        self.n
    }

    fn draw_hidden<R: Rng + ?Sized>(&self, _rng: &mut R) {}

    fn conditional(&self, _: &(), prefix: &[Outcome]) -> Conditional<Outcome> {
        Conditional::from_distribution(&self.at(prefix.len() + 1))
    }
}

impl FiniteKernel for Drifting {
    fn space(&self) -> OutcomeSpace {
        self.start.space()
    }
}

/// `P_t` is the point mass at `z_t` whatever the prefix.
#[derive(Debug, Clone)]
pub struct PointMass {
    space: OutcomeSpace,
    sequence: Vec<Outcome>,
}

impl PointMass {
    pub fn new(space: OutcomeSpace, sequence: Vec<Outcome>) -> Result<Self> {
        if let Some(z) = sequence.iter().find(|z| !space.contains(**z)) {
            return Err(Error::invalid(format!("outcome {z:?} outside the outcome space")));
        }
        Ok(PointMass { space, sequence })
    }

    pub fn sequence(&self) -> &[Outcome] {
        &self.sequence
    }
}

impl Kernel for PointMass {
    type Outcome = Outcome;
    type Hidden = ();

    fn horizon(&self) -> usize {
        self.sequence.len()
    }

    fn draw_hidden<R: Rng + ?Sized>(&self, _rng: &mut R) {}

    fn conditional(&self, _: &(), prefix: &[Outcome]) -> Conditional<Outcome> {
        Conditional::point_mass(self.sequence[prefix.len()])
    }
}

impl FiniteKernel for PointMass {
    fn space(&self) -> OutcomeSpace {
        self.space
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{check_normalization, conditional_average, sample_path};

    fn space() -> OutcomeSpace {
        OutcomeSpace::new(2, 2)
    }

    fn p() -> Distribution<f64> {
        Distribution::from_pairs(space(), &[(Outcome::new(0, 1), 0.6), (Outcome::new(0, 0), 0.4)]).unwrap()
    }

    fn q() -> Distribution<f64> {
        Distribution::from_pairs(space(), &[(Outcome::new(1, 0), 1.0)]).unwrap()
    }

    #[test]
    fn product_is_prefix_free_and_reproducible() {
        let k = ProductIid::new(p(), 3);
        let a = sample_path(&k, 11);
        let b = sample_path(&k, 11);
        assert_eq!(a, b);
        for c in a.conditionals() {
            assert_eq!(c.to_distribution(space()).unwrap(), p());
        }
        assert!(conditional_average(&a, space()).unwrap().total_variation(&p()) < 1e-12);
        assert_eq!(check_normalization(&k, &(), 100_000).unwrap(), 1 + 2 + 4);
    }

    #[test]
    fn mixture_components() {
        assert!(Mixture::new(0.5, p(), p(), 3).is_err());
        assert!(Mixture::new(1.5, p(), q(), 3).is_err());

        let all_p = Mixture::new(1.0, p(), q(), 4).unwrap();
        let path = sample_path(&all_p, 5);
        for c in path.conditionals() {
            assert_eq!(c.to_distribution(space()).unwrap(), p());
        }
        let all_q = Mixture::new(0.0, p(), q(), 4).unwrap();
        let path = sample_path(&all_q, 5);
        assert_eq!(all_q.component(&path), Some(MixtureComponent::Q));

        let k = Mixture::new(0.3, p(), q(), 4).unwrap();
        let second = k.conditional(&(), &[Outcome::new(0, 1)]);
        assert_eq!(second.to_distribution(space()).unwrap(), p());
        for seed in 0..20 {
            let path = sample_path(&k, seed);
            let later: Vec<_> = path.conditionals()[1..].to_vec();
            assert!(later.windows(2).all(|w| w[0] == w[1]));
            if k.component(&path) == Some(MixtureComponent::P) {
                // direct averaging of (lambda P + (1 - lambda) Q) and three copies of P
                let avg = conditional_average(&path, space()).unwrap();
                let first = p().mix(0.3, &q()).unwrap();
                for z in space().iter() {
                    let expect = (first.mass(z) + 3.0 * p().mass(z)) / 4.0;
                    assert!((avg.mass(z) - expect).abs() < 1e-15);
                }
            }
        }
        check_normalization(&k, &(), 100_000).unwrap();
    }

    #[test]
    fn drifting_schedules() {
        let full = Drifting::new(p(), q(), 5, DriftSchedule::Polynomial { rate: f64::INFINITY }).unwrap();
        for t in 1..=5 {
            assert_eq!(full.at(t), q());
        }
        let lin = Drifting::new(p(), q(), 4, DriftSchedule::Linear).unwrap();
        assert_eq!(lin.weight(4), 1.0);
        assert_eq!(lin.weight(2), 0.5);
        assert!(Drifting::new(p(), q(), 4, DriftSchedule::Polynomial { rate: 0.0 }).is_err());
    }

    #[test]
    fn drifting_average_closed_form() {
        // w_t = t/n gives P_bar = ((n-1)/(2n)) P_start + ((n+1)/(2n)) P_end,
        // so TV(P_bar, P_end) = TV(P_start, P_end) (n-1)/(2n)
        for n in [1usize, 2, 5, 16] {
            let k = Drifting::new(p(), q(), n, DriftSchedule::Linear).unwrap();
            let path = sample_path(&k, 3);
            let avg = conditional_average(&path, space()).unwrap();
            let tv = avg.total_variation(&q());
            let expect = p().total_variation(&q()) * (n as f64 - 1.0) / (2.0 * n as f64);
            assert!((tv - expect).abs() < 1e-12, "n={n}: {tv} vs {expect}");
        }
    }

    #[test]
    fn drifting_tv_decreases_with_polynomial_schedule() {
        let mut last = f64::INFINITY;
        for n in [4usize, 8, 16, 32, 64] {
            let k = Drifting::new(p(), q(), n, DriftSchedule::Polynomial { rate: 1.0 }).unwrap();
            let avg = conditional_average(&sample_path(&k, 0), space()).unwrap();
            let tv = avg.total_variation(&q());
            assert!(tv < last);
            last = tv;
        }
    }

    #[test]
    fn point_mass_is_deterministic() {
        let seq = vec![Outcome::new(0, 0), Outcome::new(1, 1), Outcome::new(0, 1)];
        let k = PointMass::new(space(), seq.clone()).unwrap();
        assert_eq!(sample_path(&k, 1).outcomes(), &seq[..]);
        assert_eq!(sample_path(&k, 2).outcomes(), &seq[..]);
        let avg = conditional_average(&sample_path(&k, 0), space()).unwrap();
        assert!((avg.mass(Outcome::new(0, 0)) - 1.0 / 3.0).abs() < 1e-15);
        assert!(PointMass::new(space(), vec![Outcome::new(2, 0)]).is_err());
    }
}
