//! Natural reward evolution, influence, and influence incentives.

use std::collections::BTreeSet;

use num_traits::Signed;

use crate::distribution::{trajectory_distribution, RewardTrajectoryDistribution, ThetaWindow};
use crate::error::Result;
use crate::model::{DrMdp, Pair, Policy, ThetaIx};
use crate::objectives::{Interpretation, Objective};
use crate::rational::Q;
use crate::solvers::{
    backward_induction, episode_optimal, for_each_class, myopic_policies, replanning_policy,
    SolveOptions, StepReward,
};

#[derive(Clone, Debug, Default)]
pub struct InfluenceOptions {
    pub solve: SolveOptions,
    /// Window of the reward-function trajectory compared against π_noop.
    pub window: ThetaWindow,
    pub interpretation: Interpretation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceVerdict {
    /// Every optimal policy influences.
    pub incentive: bool,
    /// At least one optimal policy influences.
    pub some_influence: bool,
    /// Number of optimal policies examined; `None` when the optimal set was
    /// characterized node-wise without listing its members.
    pub optimal_count: Option<usize>,
    pub natural: RewardTrajectoryDistribution,
    /// Distinct reward-trajectory distributions among the optimal policies,
    /// when the members were listed.
    pub optimal_marginals: Vec<RewardTrajectoryDistribution>,
}

pub fn natural_reward_evolution(
    m: &DrMdp,
    horizon: usize,
    window: ThetaWindow,
) -> RewardTrajectoryDistribution {
    natural_reward_evolution_from(m, m.initial(), horizon, window)
}

/// Reward-trajectory distribution of π_noop from `start`. Computed by
/// propagating (pair, θ-sequence) mass, so it has no trajectory guard.
pub fn natural_reward_evolution_from(
    m: &DrMdp,
    start: Pair,
    horizon: usize,
    window: ThetaWindow,
) -> RewardTrajectoryDistribution {
    use std::collections::BTreeMap;
    let mut cur: BTreeMap<(Pair, Vec<ThetaIx>), Q> =
        BTreeMap::from([((start, vec![start.1]), num_traits::One::one())]);
    for _ in 0..horizon {
        let mut next: BTreeMap<(Pair, Vec<ThetaIx>), Q> = BTreeMap::new();
        for ((pair, seq), p) in cur {
            for (succ, q) in m.successors(pair, m.noop()) {
                if q.is_positive() {
                    let mut s2 = seq.clone();
                    s2.push(succ.1);
                    *next
                        .entry((*succ, s2))
                        .or_insert_with(num_traits::Zero::zero) += &p * q;
                }
            }
        }
        cur = next;
    }
    let mut out = RewardTrajectoryDistribution::new();
    for ((_, mut seq), p) in cur {
        if !window.inclusive() {
            seq.pop();
        }
        *out.entry(seq).or_insert_with(num_traits::Zero::zero) += p;
    }
    out
}

fn marginal_from(
    m: &DrMdp,
    policy: &Policy,
    start: Pair,
    horizon: usize,
    window: ThetaWindow,
    opts: &SolveOptions,
) -> Result<RewardTrajectoryDistribution> {
    let inst = m.with_initial(start);
    Ok(trajectory_distribution(&inst, policy, horizon, &opts.limits)?.reward_trajectories(window))
}

/// Whether `policy` induces a different reward evolution than π_noop.
pub fn influences(
    m: &DrMdp,
    policy: &Policy,
    horizon: usize,
    window: ThetaWindow,
    opts: &SolveOptions,
) -> Result<bool> {
    let start = opts.start(m);
    Ok(marginal_from(m, policy, start, horizon, window, opts)?
        != natural_reward_evolution_from(m, start, horizon, window))
}

/// The policies an objective deems optimal, as concrete policies.
fn optimal_policies(
    m: &DrMdp,
    horizon: usize,
    objective: Objective,
    opts: &InfluenceOptions,
) -> Result<Vec<Policy>> {
    let s = &opts.solve;
    Ok(match (opts.interpretation, objective) {
        (Interpretation::EpisodeLength, Objective::Myopic) => myopic_policies(m).selections(),
        (Interpretation::EpisodeLength, _) => episode_optimal(m, horizon, objective, s)?
            .members
            .iter()
            .map(|c| c.to_policy())
            .collect(),
        (Interpretation::PlanningDepth, _) => {
            replanning_policy(m, horizon, objective, s)?.selections()
        }
    })
}

/// Incentive test: does every optimal policy influence?
pub fn influence_incentive(
    m: &DrMdp,
    horizon: usize,
    objective: Objective,
    opts: &InfluenceOptions,
) -> Result<InfluenceVerdict> {
    let start = opts.solve.start(m);
    let natural = natural_reward_evolution_from(m, start, horizon, opts.window);
    if opts.interpretation == Interpretation::EpisodeLength
        && objective.is_additive()
        && m.is_deterministic()
    {
        return node_wise_incentive(m, start, horizon, objective, natural);
    }
    let mut optimal_marginals: Vec<RewardTrajectoryDistribution> = Vec::new();
    let policies = optimal_policies(m, horizon, objective, opts)?;
    let (mut all, mut some) = (true, false);
    for p in &policies {
        let xi = marginal_from(m, p, start, horizon, opts.window, &opts.solve)?;
        let infl = xi != natural;
        all &= infl;
        some |= infl;
        if !optimal_marginals.contains(&xi) {
            optimal_marginals.push(xi);
        }
    }
    optimal_marginals.sort();
    Ok(InfluenceVerdict {
        incentive: all && !policies.is_empty(),
        some_influence: some,
        optimal_count: Some(policies.len()),
        natural,
        optimal_marginals,
    })
}

/// Deterministic additive case: each optimal class is one path through the
/// optimal-action graph, so it suffices to ask whether some optimal path
/// follows the natural θ-sequence and whether some does not.
fn node_wise_incentive(
    m: &DrMdp,
    start: Pair,
    horizon: usize,
    objective: Objective,
    natural: RewardTrajectoryDistribution,
) -> Result<InfluenceVerdict> {
    let step = StepReward::for_objective(m, objective, start, horizon)?;
    let sol = backward_induction(m, start, horizon, &step)?;
    let noop_seq = natural
        .keys()
        .next()
        .expect("deterministic natural evolution")
        .clone();
    let len = noop_seq.len();
    // (pair, still following the natural sequence)
    let mut frontier: BTreeSet<(Pair, bool)> = BTreeSet::from([(start, true)]);
    for t in 0..horizon {
        let mut next = BTreeSet::new();
        for &(pair, same) in &frontier {
            for &a in &sol.optimal[t][&pair] {
                for (succ, q) in m.successors(pair, a) {
                    if q.is_positive() {
                        let same2 = same && (t + 1 >= len || noop_seq[t + 1] == succ.1);
                        next.insert((*succ, same2));
                    }
                }
            }
        }
        frontier = next;
    }
    let any_same = frontier.iter().any(|(_, s)| *s);
    let any_diff = frontier.iter().any(|(_, s)| !*s);
    Ok(InfluenceVerdict {
        incentive: !any_same,
        some_influence: any_diff,
        optimal_count: None,
        natural,
        optimal_marginals: Vec::new(),
    })
}

/// True iff no policy class changes the reward evolution.
pub fn uninfluenceable(
    m: &DrMdp,
    horizon: usize,
    window: ThetaWindow,
    opts: &SolveOptions,
) -> Result<bool> {
    let start = opts.start(m);
    let natural = natural_reward_evolution_from(m, start, horizon, window);
    let mut all_same = true;
    for_each_class(m, start, horizon, &opts.limits, |c| {
        all_same &= c.xi(window) == natural;
        Ok(())
    })?;
    Ok(all_same)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowardsVerdict {
    pub holds: bool,
    /// P(θ_H = ·) under π_noop.
    pub natural_final: Vec<Q>,
    /// Distinct P(θ_H = ·) among optimal policies.
    pub optimal_final: Vec<Vec<Q>>,
}

fn in_argmax(dist: &[Q], theta: ThetaIx) -> bool {
    dist.iter().all(|p| p <= &dist[theta])
}

/// θ is a most likely θ_H under every optimal policy but not under π_noop.
/// Ties count as membership.
pub fn influence_towards(
    m: &DrMdp,
    horizon: usize,
    objective: Objective,
    theta: ThetaIx,
    opts: &InfluenceOptions,
) -> Result<TowardsVerdict> {
    let start = opts.solve.start(m);
    let inst = m.with_initial(start);
    let final_of = |p: &Policy| -> Result<Vec<Q>> {
        let d = trajectory_distribution(&inst, p, horizon, &opts.solve.limits)?;
        Ok(d.theta_marginals(m.n_thetas()).pop().expect("row H"))
    };
    let natural_final = final_of(&Policy::noop(m))?;
    let mut optimal_final: Vec<Vec<Q>> = Vec::new();
    for p in optimal_policies(m, horizon, objective, opts)? {
        let f = final_of(&p)?;
        if !optimal_final.contains(&f) {
            optimal_final.push(f);
        }
    }
    optimal_final.sort();
    let holds =
        !in_argmax(&natural_final, theta) && optimal_final.iter().all(|f| in_argmax(f, theta));
    Ok(TowardsVerdict {
        holds,
        natural_final,
        optimal_final,
    })
}
