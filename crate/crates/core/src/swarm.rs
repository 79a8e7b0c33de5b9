//! Seeded global-best particle swarm maximiser for low-dimensional boxes.
//!
//! Random numbers come from `ChaCha8Rng` seeded with [`SwarmConfig::seed`],
//! so a run is reproducible bit for bit on any IEEE-754 platform. Particles
//! move synchronously: all positions are updated in particle order, then
//! evaluated in the same order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 1729;

/// Improvements of the global best at or below this count as stagnation.
pub const STAGNATION_TOL: f64 = 1e-12;
/// Iterations without improvement before the run stops.
pub const STAGNATION_WINDOW: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    /// Per-coordinate `(lo, hi)`.
    pub bounds: Vec<(f64, f64)>,
    /// Require strictly increasing coordinates; violators score `-inf`.
    pub ordering_constraint: bool,
}

impl SwarmConfig {
    /// Constriction-coefficient defaults on the given box.
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Self {
            particles: 40,
            iterations: 500,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            seed: DEFAULT_SEED,
            bounds,
            ordering_constraint: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn ordered(mut self) -> Self {
        self.ordering_constraint = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(Error::InvalidConfig(format!(
                "{} particles (need ≥ 2)",
                self.particles
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("zero iterations".into()));
        }
        if !(self.inertia > 0.0 && self.inertia < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "inertia {} outside (0, 1)",
                self.inertia
            )));
        }
        if !(self.cognitive >= 0.0 && self.social >= 0.0) {
            return Err(Error::InvalidConfig(
                "negative acceleration coefficient".into(),
            ));
        }
        if self.bounds.is_empty() {
            return Err(Error::InvalidConfig("no search dimensions".into()));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "bounds[{i}] = ({lo}, {hi}) degenerate"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwarmOutcome {
    pub best: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// The run stopped because the best value did not move for
    /// [`STAGNATION_WINDOW`] iterations.
    pub stagnated: bool,
    /// Best-so-far value after initialisation and after every iteration.
    pub history: Vec<f64>,
}

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_value: f64,
}

fn score<F: FnMut(&[f64]) -> f64>(objective: &mut F, x: &[f64], ordered: bool) -> f64 {
    if ordered && x.windows(2).any(|w| !(w[0] < w[1])) {
        return f64::NEG_INFINITY;
    }
    let v = objective(x);
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximises `objective` over the configured box.
pub fn maximize<F>(mut objective: F, config: &SwarmConfig) -> Result<SwarmOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    let dim = config.bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut swarm = Vec::with_capacity(config.particles);
    for _ in 0..config.particles {
        let mut position: Vec<f64> = config
            .bounds
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect();
        if config.ordering_constraint {
            position.sort_by(f64::total_cmp);
            for (x, &(lo, hi)) in position.iter_mut().zip(&config.bounds) {
                *x = x.clamp(lo, hi);
            }
        }
        let velocity = config
            .bounds
            .iter()
            .zip(&position)
            .map(|(&(lo, hi), &x)| 0.5 * (rng.random_range(lo..=hi) - x))
            .collect();
        swarm.push(Particle {
            best_position: position.clone(),
            position,
            velocity,
            best_value: f64::NEG_INFINITY,
        });
    }

    let mut evaluations = 0;
    let mut best = swarm[0].position.clone();
    let mut best_value = f64::NEG_INFINITY;
    for p in &mut swarm {
        let v = score(&mut objective, &p.position, config.ordering_constraint);
        evaluations += 1;
        p.best_value = v;
        if v > best_value {
            best_value = v;
            best.clone_from(&p.position);
        }
    }

    let mut history = vec![best_value];
    let mut last_improvement = 0;
    let mut iterations = 0;
    let mut stagnated = false;
    for iter in 1..=config.iterations {
        iterations = iter;
        for p in &mut swarm {
            #[allow(clippy::needless_range_loop)]
            for d in 0..dim {
                let (lo, hi) = config.bounds[d];
                let vmax = hi - lo;
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = config.inertia * p.velocity[d]
                    + config.cognitive * r1 * (p.best_position[d] - p.position[d])
                    + config.social * r2 * (best[d] - p.position[d]);
                let mut v = v.clamp(-vmax, vmax);
                let mut x = p.position[d] + v;
                if x < lo {
                    x = lo;
                    v = 0.0;
                } else if x > hi {
                    x = hi;
                    v = 0.0;
                }
                p.position[d] = x;
                p.velocity[d] = v;
            }
        }
        let previous = best_value;
        for p in &mut swarm {
            let v = score(&mut objective, &p.position, config.ordering_constraint);
            evaluations += 1;
            if v > p.best_value {
                p.best_value = v;
                p.best_position.clone_from(&p.position);
            }
            if v > best_value {
                best_value = v;
                best.clone_from(&p.position);
            }
        }
        history.push(best_value);
        let improved = if previous.is_finite() {
            best_value - previous > STAGNATION_TOL
        } else {
            best_value > previous
        };
        if improved {
            last_improvement = iter;
        } else if iter - last_improvement >= STAGNATION_WINDOW {
            stagnated = true;
            break;
        }
    }

    Ok(SwarmOutcome {
        best,
        value: best_value,
        iterations,
        evaluations,
        stagnated,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_one_dimensional() {
        let cfg = SwarmConfig::new(vec![(0.0, 10.0)]);
        let out = maximize(|x| -(x[0] - 2.0).powi(2), &cfg).unwrap();
        assert!((out.best[0] - 2.0).abs() < 1e-6, "{:?}", out.best);
    }

    #[test]
    fn boundary_optimum_is_reached() {
        let cfg = SwarmConfig::new(vec![(0.0, 1.0), (0.0, 1.0)]);
        let out = maximize(|x| x[0] - (x[1] - 0.3).powi(2), &cfg).unwrap();
        assert_eq!(out.best[0], 1.0);
        assert!((out.best[1] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn reproducible_given_seed() {
        let cfg = SwarmConfig::new(vec![(-3.0, 3.0), (-3.0, 3.0)]).with_seed(99);
        let f = |x: &[f64]| -(x[0] * x[0] + 3.0 * (x[1] - 1.0).powi(2)) + (5.0 * x[0]).sin();
        let a = maximize(f, &cfg).unwrap();
        let b = maximize(f, &cfg).unwrap();
        assert_eq!(a, b);
        let c = maximize(f, &cfg.clone().with_seed(100)).unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn history_is_monotone() {
        let cfg = SwarmConfig::new(vec![(-5.0, 5.0); 2]);
        let out = maximize(|x| -(x[0].powi(2) + x[1].powi(2)).sqrt().sin().abs(), &cfg).unwrap();
        assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn ordering_constraint_enforced() {
        // unconstrained maximum (2, 1) violates x0 < x1
        let cfg = SwarmConfig::new(vec![(0.0, 3.0), (0.0, 3.0)]).ordered();
        let out = maximize(|x| -(x[0] - 2.0).powi(2) - (x[1] - 1.0).powi(2), &cfg).unwrap();
        assert!(out.best[0] < out.best[1]);
        // supremum -0.5 on the diagonal, never attained
        assert!(out.value < -0.5 && out.value > -0.51, "{}", out.value);
        let out = maximize(|x| -(x[0] - 1.0).powi(2) - (x[1] - 2.0).powi(2), &cfg).unwrap();
        assert!((out.best[0] - 1.0).abs() < 1e-6 && (out.best[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn stagnation_flagged_not_failed() {
        let cfg = SwarmConfig::new(vec![(0.0, 1.0)]);
        let out = maximize(|_| 1.0, &cfg).unwrap();
        assert!(out.stagnated);
        assert_eq!(out.value, 1.0);
        assert_eq!(out.iterations, STAGNATION_WINDOW);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SwarmConfig::new(vec![(0.0, 1.0)]);
        cfg.particles = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = SwarmConfig::new(vec![(1.0, 1.0)]);
        assert!(cfg.validate().is_err());
        cfg.bounds = vec![(0.0, 1.0)];
        cfg.inertia = 1.0;
        assert!(cfg.validate().is_err());
    }
}
