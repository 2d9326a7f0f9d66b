//! Long-range dependent regression process `Y_t = f*(X_t) + xi_t + xi_0`.
//!
//! Outcomes are continuous, so instead of finite conditionals the kernel
//! exposes the closed-form squared-loss conditional risk. Given `Z_{1:t-1}`,
//! `xi_0` is normal with mean `U_{t-1} = sum_{i<t} (Y_i - f*(X_i)) / t` and
//! variance `1/t`, hence
//!
//! ```text
//! l(P_t, f) = 1 + 1/t + sum_x P_X(x) (f*(x) - f(x) + U_{t-1})^2
//! ```

use rand::Rng;
use rand_distr::StandardNormal;

use crate::classes::OffsetClass;
use crate::seed::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct RandomLevel {
    base: OffsetClass<f64>,
    theta_star: usize,
    p_x: Vec<f64>,
    n: usize,
}

/// A sampled path; `xi0` is the hidden level.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomLevelPath {
    pub xs: Vec<usize>,
    pub ys: Vec<f64>,
    xi0: f64,
}

impl RandomLevelPath {
    /// Evaluator-side hidden level `xi_0`.
    pub fn xi0(&self) -> f64 {
        self.xi0
    }
}

impl RandomLevel {
    pub fn new(base: OffsetClass<f64>, theta_star: usize, p_x: Vec<f64>, n: usize) -> Result<Self> {
        if theta_star >= base.base().size() {
            return Err(Error::invalid("theta* is not a base function"));
        }
        if p_x.len() != base.base().n_points() {
            return Err(Error::invalid("P_X must cover the domain"));
        }
        if p_x.iter().any(|&p| !(p >= 0.0)) || (p_x.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(p_x.iter().sum()));
        }
        if n == 0 {
            return Err(Error::invalid("horizon must be >= 1"));
        }
        Ok(RandomLevel {
            base,
            theta_star,
            p_x,
            n,
        })
    }

    pub fn horizon(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &OffsetClass<f64> {
        &self.base
    }

    pub fn theta_star(&self) -> usize {
        self.theta_star
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn f_star(&self, x: usize) -> f64 {
        self.base.base().value(self.theta_star, x)
    }

    fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, p) in self.p_x.iter().enumerate() {
            acc += p;
            if u < acc {
                return x;
            }
        }
        self.p_x.iter().rposition(|&p| p > 0.0).expect("normalized")
    }

    pub fn sample(&self, seed: u64) -> RandomLevelPath {
        let mut rng = rng_from_seed(seed);
        let xi0: f64 = rng.sample(StandardNormal);
        let mut xs = Vec::with_capacity(self.n);
        let mut ys = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let x = self.sample_x(&mut rng);
            let xi: f64 = rng.sample(StandardNormal);
            xs.push(x);
            ys.push(self.f_star(x) + xi + xi0);
        }
        RandomLevelPath { xs, ys, xi0 }
    }

    /// Path with prescribed inputs and noise, for tests.
    pub fn with_noise(&self, xs: Vec<usize>, xi0: f64, noise: &[f64]) -> Result<RandomLevelPath> {
        if xs.len() != self.n || noise.len() != self.n {
            return Err(Error::invalid("inputs and noise must match the horizon"));
        }
        let ys = xs.iter().zip(noise).map(|(&x, e)| self.f_star(x) + e + xi0).collect();
        Ok(RandomLevelPath { xs, ys, xi0 })
    }

    /// `U_t = sum_{i<=t} (Y_i - f*(X_i)) / (t + 1)`, the posterior mean of
    /// `xi_0` after `t` observations (`U_0 = 0`).
    pub fn posterior_mean(&self, path: &RandomLevelPath, t: usize) -> f64 {
        let s: f64 = (0..t).map(|i| path.ys[i] - self.f_star(path.xs[i])).sum();
        s / (t as f64 + 1.0)
    }

    /// `l(P_t, f_theta + c)` along `path`.
    pub fn conditional_risk(&self, path: &RandomLevelPath, theta: usize, offset: f64, t: usize) -> f64 {
        let f: Vec<f64> = (0..self.base.base().n_points())
            .map(|x| self.base.eval(theta, offset, x))
            .collect();
        let f_star: Vec<f64> = (0..self.base.base().n_points()).map(|x| self.f_star(x)).collect();
        random_level_conditional_risk(&f, t, self.posterior_mean(path, t - 1), &self.p_x, &f_star)
    }

    /// `(1/n) sum_t l(P_t, f_theta + c)`.
    pub fn average_risk(&self, path: &RandomLevelPath, theta: usize, offset: f64) -> f64 {
        (1..=self.n)
            .map(|t| self.conditional_risk(path, theta, offset, t))
            .sum::<f64>()
            / self.n as f64
    }
}

/// `1 + 1/t + sum_x P_X(x) (f*(x) - f(x) + u_prev)^2` for `t >= 1`.
pub fn random_level_conditional_risk(f: &[f64], t: usize, u_prev: f64, p_x: &[f64], f_star: &[f64]) -> f64 {
    assert!(t >= 1, "steps are 1-based");
    let spread: f64 = p_x
        .iter()
        .zip(f.iter().zip(f_star))
        .map(|(p, (fx, sx))| p * (sx - fx + u_prev).powi(2))
        .sum();
    1.0 + 1.0 / t as f64 + spread
}
