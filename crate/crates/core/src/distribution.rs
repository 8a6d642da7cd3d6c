//! Exact trajectory distributions induced by a policy, and their marginals.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{DrMdp, Limits, Pair, Policy, ThetaIx, Trajectory};
use crate::rational::Q;

/// Which θ coordinates make up a reward-function trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ThetaWindow {
    /// (θ₀, …, θ_{H−1})
    #[default]
    Exclusive,
    /// (θ₀, …, θ_H)
    Inclusive,
}

impl ThetaWindow {
    pub fn inclusive(self) -> bool {
        self == ThetaWindow::Inclusive
    }
}

/// Probability of each reward-function trajectory.
pub type RewardTrajectoryDistribution = BTreeMap<Vec<ThetaIx>, Q>;

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryDistribution {
    pub horizon: usize,
    /// Canonically ordered support.
    pub support: Vec<(Trajectory, Q)>,
}

impl TrajectoryDistribution {
    pub fn total(&self) -> Q {
        self.support.iter().map(|(_, p)| p.clone()).sum()
    }

    pub fn reward_trajectories(&self, window: ThetaWindow) -> RewardTrajectoryDistribution {
        let mut out = RewardTrajectoryDistribution::new();
        for (traj, p) in &self.support {
            *out.entry(traj.thetas(window.inclusive()))
                .or_insert_with(Q::zero) += p;
        }
        out
    }

    /// Row t is the distribution of θ_t, for t = 0..=H.
    pub fn theta_marginals(&self, n_thetas: usize) -> Vec<Vec<Q>> {
        let mut out = vec![vec![Q::zero(); n_thetas]; self.horizon + 1];
        for (traj, p) in &self.support {
            for (t, row) in out.iter_mut().enumerate() {
                row[traj.pair(t).1] += p;
            }
        }
        out
    }
}

/// Exhaustive forward enumeration of the trajectories `policy` induces from
/// the instance's initial pair.
pub fn trajectory_distribution(
    m: &DrMdp,
    policy: &Policy,
    horizon: usize,
    limits: &Limits,
) -> Result<TrajectoryDistribution> {
    let mut frontier: Vec<(Trajectory, Q)> = vec![(
        Trajectory {
            steps: Vec::new(),
            terminal: m.initial(),
        },
        Q::one(),
    )];
    for t in 0..horizon {
        let mut next = Vec::with_capacity(frontier.len());
        for (traj, p) in frontier {
            let pair = traj.terminal;
            let a = policy.action(t, pair).ok_or_else(|| {
                Error::PolicyIncomplete(format!("t={t} at {}", m.pair_name(pair)))
            })?;
            let row = m.row(pair, a).ok_or_else(|| {
                Error::spec(
                    "transitions",
                    format!("no row for {} under {}", m.pair_name(pair), m.actions()[a]),
                )
            })?;
            for (succ, q) in row {
                if !q.is_positive() {
                    continue;
                }
                let mut steps = traj.steps.clone();
                steps.push((pair, a));
                next.push((
                    Trajectory {
                        steps,
                        terminal: *succ,
                    },
                    &p * q,
                ));
                if next.len() > limits.max_trajectories {
                    return Err(Error::TrajectoryCap {
                        cap: limits.max_trajectories,
                    });
                }
            }
        }
        frontier = next;
    }
    frontier.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(TrajectoryDistribution {
        horizon,
        support: frontier,
    })
}

pub fn reward_trajectory_marginal(
    m: &DrMdp,
    policy: &Policy,
    horizon: usize,
    window: ThetaWindow,
    limits: &Limits,
) -> Result<RewardTrajectoryDistribution> {
    Ok(trajectory_distribution(m, policy, horizon, limits)?.reward_trajectories(window))
}

/// P(θ_t = θ | policy) for t = 0..=H; the last row is the post-episode θ_H.
pub fn theta_marginals(
    m: &DrMdp,
    policy: &Policy,
    horizon: usize,
    limits: &Limits,
) -> Result<Vec<Vec<Q>>> {
    Ok(trajectory_distribution(m, policy, horizon, limits)?.theta_marginals(m.n_thetas()))
}

/// θ marginals of the inaction policy from `start`, by forward propagation of
/// the pair distribution rather than trajectory enumeration. Rows t = 0..=H.
pub fn noop_theta_marginals(m: &DrMdp, start: Pair, horizon: usize) -> Vec<Vec<Q>> {
    let mut dist: BTreeMap<Pair, Q> = BTreeMap::from([(start, Q::one())]);
    let mut out = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let mut row = vec![Q::zero(); m.n_thetas()];
        for (pair, p) in &dist {
            row[pair.1] += p;
        }
        out.push(row);
        if t == horizon {
            break;
        }
        let mut next: BTreeMap<Pair, Q> = BTreeMap::new();
        for (pair, p) in &dist {
            for (succ, q) in m.successors(*pair, m.noop()) {
                *next.entry(*succ).or_insert_with(Q::zero) += p * q;
            }
        }
        dist = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Builder;
    use crate::rational::{int, ratio};

    fn coin() -> DrMdp {
        let mut b = Builder::new()
            .states(["a", "b"])
            .thetas(["x", "y"])
            .actions(["noop", "flip"])
            .noop("noop")
            .initial("a", "x");
        for s in ["a", "b"] {
            for t in ["x", "y"] {
                b = b.go(s, t, "noop", s, t).transition(
                    s,
                    t,
                    "flip",
                    [("a", "x", ratio(1, 2)), ("b", "y", ratio(1, 2))],
                );
                for a in ["noop", "flip"] {
                    b = b.reward(t, s, a, int(1));
                }
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn coin_flip_splits_mass() {
        let m = coin();
        let d = trajectory_distribution(&m, &Policy::Constant(1), 1, &Limits::default()).unwrap();
        assert_eq!(d.support.len(), 2);
        assert!(d.support.iter().all(|(_, p)| *p == ratio(1, 2)));
        assert!(d.total().is_one());
    }

    #[test]
    fn marginals_agree_two_ways() {
        let m = coin();
        for h in 1..=4 {
            let d =
                trajectory_distribution(&m, &Policy::Constant(1), h, &Limits::default()).unwrap();
            let direct = d.theta_marginals(2);
            let xi = d.reward_trajectories(ThetaWindow::Inclusive);
            for (t, row) in direct.iter().enumerate() {
                for (th, p) in row.iter().enumerate() {
                    let via: Q = xi
                        .iter()
                        .filter(|(k, _)| k[t] == th)
                        .map(|(_, q)| q.clone())
                        .sum();
                    assert_eq!(&via, p);
                }
            }
        }
    }

    #[test]
    fn trajectory_cap_is_enforced() {
        let m = coin();
        let limits = Limits {
            max_trajectories: 3,
            ..Limits::default()
        };
        let err = trajectory_distribution(&m, &Policy::Constant(1), 2, &limits).unwrap_err();
        assert!(err.is_guard());
    }

    #[test]
    fn noop_marginals_match_enumeration() {
        let m = coin();
        let d = theta_marginals(&m, &Policy::Constant(0), 3, &Limits::default()).unwrap();
        assert_eq!(d, noop_theta_marginals(&m, m.initial(), 3));
    }
}
