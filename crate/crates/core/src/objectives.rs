//! The eight alignment objectives and their trajectory utilities.

use std::fmt;

use num_traits::Zero;

use crate::distribution::{noop_theta_marginals, trajectory_distribution};
use crate::error::{Error, Result};
use crate::model::{DrMdp, Limits, Policy, ThetaIx, Trajectory};
use crate::rational::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Objective {
    RealTime,
    FinalReward,
    InitialReward,
    NaturalShifts,
    ConstrainedRT,
    Myopic,
    Privileged(ThetaIx),
    ParetoUD,
}

/// How the optimization horizon is read: as the episode length (possibly
/// non-stationary optimum) or as the lookahead depth of a replanning agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Interpretation {
    #[default]
    EpisodeLength,
    PlanningDepth,
}

impl Objective {
    /// All eight objectives, with one privileged entry per θ.
    pub fn all(m: &DrMdp) -> Vec<Objective> {
        let mut out: Vec<Objective> = (0..m.n_thetas()).map(Objective::Privileged).collect();
        out.extend([
            Objective::RealTime,
            Objective::FinalReward,
            Objective::InitialReward,
            Objective::NaturalShifts,
            Objective::ConstrainedRT,
            Objective::Myopic,
            Objective::ParetoUD,
        ]);
        out
    }

    /// Objectives with a utility U(ξ) and an expected-utility argmax.
    pub fn is_trajectory_functional(self) -> bool {
        !matches!(
            self,
            Objective::ConstrainedRT | Objective::Myopic | Objective::ParetoUD
        )
    }

    /// Objectives whose utility is a sum of per-step rewards with weights that
    /// depend only on (t, current pair), which makes them solvable node-wise.
    pub fn is_additive(self) -> bool {
        matches!(
            self,
            Objective::RealTime
                | Objective::InitialReward
                | Objective::NaturalShifts
                | Objective::Privileged(_)
        )
    }

    /// Parses the CLI names `rt`, `final`, `initial`, `natural`, `crt`,
    /// `myopic`, `privileged:<theta>` and `pareto-ud`.
    pub fn parse(name: &str, m: &DrMdp) -> Result<Objective> {
        Ok(match name {
            "rt" => Objective::RealTime,
            "final" => Objective::FinalReward,
            "initial" => Objective::InitialReward,
            "natural" => Objective::NaturalShifts,
            "crt" => Objective::ConstrainedRT,
            "myopic" => Objective::Myopic,
            "pareto-ud" => Objective::ParetoUD,
            _ => match name.strip_prefix("privileged:") {
                Some(theta) => Objective::Privileged(m.theta(theta)?),
                None => {
                    return Err(Error::Unknown {
                        kind: "objective",
                        name: name.to_string(),
                    })
                }
            },
        })
    }

    pub fn key(self, m: &DrMdp) -> String {
        match self {
            Objective::RealTime => "rt".into(),
            Objective::FinalReward => "final".into(),
            Objective::InitialReward => "initial".into(),
            Objective::NaturalShifts => "natural".into(),
            Objective::ConstrainedRT => "crt".into(),
            Objective::Myopic => "myopic".into(),
            Objective::ParetoUD => "pareto-ud".into(),
            Objective::Privileged(t) => format!("privileged:{}", m.thetas()[t]),
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Objective::RealTime => "Real-time reward",
            Objective::FinalReward => "Final reward",
            Objective::InitialReward => "Initial reward",
            Objective::NaturalShifts => "Natural shifts reward",
            Objective::ConstrainedRT => "Constrained real-time reward",
            Objective::Myopic => "Myopic reward",
            Objective::Privileged(_) => "Privileged reward",
            Objective::ParetoUD => "ParetoUD",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

/// Utility of a trajectory under RealTime, FinalReward, InitialReward or
/// Privileged. InitialReward scores by the trajectory's own θ₀.
pub fn evaluate_trajectory(m: &DrMdp, objective: Objective, traj: &Trajectory) -> Result<Q> {
    let fixed = |theta: ThetaIx| -> Q {
        traj.transitions()
            .map(|(s, a, s2)| m.reward(theta, s, a, s2).clone())
            .sum()
    };
    Ok(match objective {
        Objective::RealTime => traj
            .transitions()
            .enumerate()
            .map(|(t, (s, a, s2))| m.reward(traj.pair(t).1, s, a, s2).clone())
            .sum(),
        Objective::FinalReward => fixed(traj.terminal.1),
        Objective::InitialReward => fixed(traj.pair(0).1),
        Objective::Privileged(theta) => fixed(theta),
        other => {
            return Err(Error::Unsupported(format!(
                "{other} is not scored on single trajectories"
            )))
        }
    })
}

/// Σ_t Σ_θ P(θ_t = θ | π_noop) R_θ(s_t, a_t, s_{t+1}).
pub fn evaluate_natural_shifts(
    m: &DrMdp,
    traj: &Trajectory,
    noop_marginals: &[Vec<Q>],
) -> Result<Q> {
    let h = traj.horizon();
    if noop_marginals.len() < h {
        return Err(Error::Unsupported(format!(
            "natural-shift marginals cover {} steps but the trajectory has {h}",
            noop_marginals.len()
        )));
    }
    let mut acc = Q::zero();
    for (t, (s, a, s2)) in traj.transitions().enumerate() {
        for (theta, w) in noop_marginals[t].iter().enumerate() {
            if !w.is_zero() {
                acc += w * m.reward(theta, s, a, s2);
            }
        }
    }
    Ok(acc)
}

/// Expected utility of `policy` over the horizon-H episode from the
/// instance's initial pair.
pub fn expected_utility(
    m: &DrMdp,
    policy: &Policy,
    horizon: usize,
    objective: Objective,
    limits: &Limits,
) -> Result<Q> {
    if !objective.is_trajectory_functional() {
        return Err(Error::Unsupported(format!(
            "{objective} has no expected utility"
        )));
    }
    let dist = trajectory_distribution(m, policy, horizon, limits)?;
    let marg = match objective {
        Objective::NaturalShifts => Some(noop_theta_marginals(m, m.initial(), horizon)),
        _ => None,
    };
    let mut acc = Q::zero();
    for (traj, p) in &dist.support {
        let u = match &marg {
            Some(w) => evaluate_natural_shifts(m, traj, w)?,
            None => evaluate_trajectory(m, objective, traj)?,
        };
        acc += p * u;
    }
    Ok(acc)
}

/// EU_θ(π): expected cumulative reward under the fixed R_θ.
pub fn per_theta_expected_utility(
    m: &DrMdp,
    policy: &Policy,
    horizon: usize,
    theta: ThetaIx,
    limits: &Limits,
) -> Result<Q> {
    if theta >= m.n_thetas() {
        return Err(Error::Unknown {
            kind: "theta",
            name: theta.to_string(),
        });
    }
    expected_utility(m, policy, horizon, Objective::Privileged(theta), limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::catalog;
    use crate::rational::int;

    #[test]
    fn conspiracy_always_influence_is_worth_100() {
        let m = catalog::conspiracy();
        let infl = m.action("influence").unwrap();
        let eu = expected_utility(
            &m,
            &Policy::Constant(infl),
            3,
            Objective::RealTime,
            &Limits::default(),
        )
        .unwrap();
        assert_eq!(eu, int(100));
    }

    #[test]
    fn disagreement_values() {
        let m = catalog::disagreement();
        let l = Limits::default();
        let noop = Policy::noop(&m);
        assert_eq!(
            expected_utility(&m, &noop, 2, Objective::RealTime, &l).unwrap(),
            int(10)
        );
        let delta = Policy::Constant(m.action("a_delta").unwrap());
        let td = m.theta("theta_delta").unwrap();
        assert_eq!(
            per_theta_expected_utility(&m, &delta, 2, td, &l).unwrap(),
            int(40)
        );
    }

    #[test]
    fn natural_shifts_with_static_noop_is_initial_reward() {
        let m = catalog::writers_curse();
        let l = Limits::default();
        for a in 0..m.n_actions() {
            let p = Policy::Constant(a);
            for h in 1..=3 {
                assert_eq!(
                    expected_utility(&m, &p, h, Objective::NaturalShifts, &l).unwrap(),
                    expected_utility(&m, &p, h, Objective::InitialReward, &l).unwrap()
                );
            }
        }
    }

    #[test]
    fn writers_curse_post_influence_steps_cost_ten() {
        let m = catalog::writers_curse();
        let infl = m.action("influence").unwrap();
        let d =
            trajectory_distribution(&m, &Policy::Constant(infl), 3, &Limits::default()).unwrap();
        let (traj, _) = &d.support[0];
        let unhappy = m.theta("unhappy").unwrap();
        for (t, (s, a, s2)) in traj.transitions().enumerate().skip(1) {
            assert_eq!(traj.pair(t).1, unhappy);
            assert_eq!(m.reward(unhappy, s, a, s2), &int(-10));
        }
    }

    #[test]
    fn parse_round_trips_keys() {
        let m = catalog::conspiracy();
        for o in Objective::all(&m) {
            assert_eq!(Objective::parse(&o.key(&m), &m).unwrap(), o);
        }
        assert!(Objective::parse("bogus", &m).is_err());
    }
}
