//! Seeded random instances for property and oracle tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Builder, DrMdp};
use crate::rational::{int, ratio, Q};

#[derive(Clone, Copy, Debug)]
pub struct RandomConfig {
    pub max_states: usize,
    pub max_thetas: usize,
    pub max_actions: usize,
    pub deterministic: bool,
    pub single_theta: bool,
    /// Rewards are integers in [-reward_bound, reward_bound].
    pub reward_bound: i64,
    /// Largest support of a stochastic row.
    pub max_support: usize,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            max_states: 3,
            max_thetas: 3,
            max_actions: 3,
            deterministic: false,
            single_theta: false,
            reward_bound: 5,
            max_support: 2,
        }
    }
}

fn attempt(rng: &mut ChaCha8Rng, cfg: &RandomConfig) -> DrMdp {
    let ns = rng.random_range(1..=cfg.max_states.max(1));
    let nt = if cfg.single_theta {
        1
    } else {
        rng.random_range(1..=cfg.max_thetas.max(1))
    };
    let na = rng.random_range(1..=cfg.max_actions.max(1));
    let states: Vec<String> = (0..ns).map(|i| format!("s{i}")).collect();
    let thetas: Vec<String> = (0..nt).map(|i| format!("t{i}")).collect();
    let actions: Vec<String> = (0..na)
        .map(|i| {
            if i == 0 {
                "noop".into()
            } else {
                format!("a{i}")
            }
        })
        .collect();
    let mut b = Builder::new()
        .states(states.clone())
        .thetas(thetas.clone())
        .actions(actions.clone())
        .noop("noop")
        .initial(&states[0], &thetas[0]);
    for s in &states {
        for t in &thetas {
            for a in &actions {
                let support = if cfg.deterministic {
                    1
                } else {
                    rng.random_range(1..=cfg.max_support.max(1))
                };
                let mut targets: Vec<(usize, usize)> = Vec::new();
                while targets.len() < support.min(ns * nt) {
                    let p = (rng.random_range(0..ns), rng.random_range(0..nt));
                    if !targets.contains(&p) {
                        targets.push(p);
                    }
                }
                let weights: Vec<i64> = targets.iter().map(|_| rng.random_range(1..=3)).collect();
                let total: i64 = weights.iter().sum();
                let to: Vec<(&str, &str, Q)> = targets
                    .iter()
                    .zip(&weights)
                    .map(|((s2, t2), w)| {
                        (states[*s2].as_str(), thetas[*t2].as_str(), ratio(*w, total))
                    })
                    .collect();
                b = b.transition(s, t, a, to);
            }
        }
    }
    let bound = cfg.reward_bound;
    for t in &thetas {
        for s in &states {
            for a in &actions {
                if rng.random_bool(0.5) {
                    b = b.reward(t, s, a, int(rng.random_range(-bound..=bound)));
                } else {
                    for s2 in &states {
                        b = b.reward_to(t, s, a, s2, int(rng.random_range(-bound..=bound)));
                    }
                }
            }
        }
    }
    b.build().expect("generated tables are well formed")
}

/// A valid instance; draws again until every θ is reachable.
pub fn random_instance(rng: &mut ChaCha8Rng, cfg: &RandomConfig) -> DrMdp {
    loop {
        let m = attempt(rng, cfg);
        if m.validate().is_empty() {
            return m;
        }
    }
}

pub fn random_instance_seeded(seed: u64, cfg: &RandomConfig) -> DrMdp {
    random_instance(&mut ChaCha8Rng::seed_from_u64(seed), cfg)
}
