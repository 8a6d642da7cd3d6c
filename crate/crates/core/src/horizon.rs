//! Horizon effects: optimality regimes of an influence pattern, their
//! progression as H grows, average reward and the 2-reward sufficient
//! condition for long-horizon influence incentives.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::distribution::{trajectory_distribution, ThetaWindow};
use crate::error::{Error, Result};
use crate::influence::{influence_incentive, InfluenceOptions};
use crate::model::{ActionIx, DrMdp, Pair, Policy, StateIx, ThetaIx};
use crate::objectives::{Interpretation, Objective};
use crate::rational::{int, Q};
use crate::solvers::enumerate::layers;
use crate::solvers::{
    backward_induction, episode_optimal, myopic_policies, replanning_policy, SolveOptions,
    StationarySet, StepReward,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// The influence cannot happen within the horizon.
    Incapable = 1,
    /// It can happen, but no optimal policy brings it about.
    CapableSuboptimal = 2,
    /// Some optimal policy brings it about.
    Optimal = 3,
}

impl Regime {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Regime::Incapable => "①",
            Regime::CapableSuboptimal => "②",
            Regime::Optimal => "③",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// The influence pattern "θ_X is realized at some t ≤ H".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InfluenceType {
    pub target: ThetaIx,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Progression {
    /// Regime at H = 1, 2, ….
    pub regimes: Vec<Regime>,
    /// Regimes with consecutive repeats removed.
    pub sequence: Vec<Regime>,
    /// Horizons at which the regime changes.
    pub boundaries: Vec<usize>,
}

impl Progression {
    pub fn from_regimes(regimes: Vec<Regime>) -> Progression {
        let mut sequence = Vec::new();
        let mut boundaries = Vec::new();
        for (i, r) in regimes.iter().enumerate() {
            if sequence.last() != Some(r) {
                if !sequence.is_empty() {
                    boundaries.push(i + 1);
                }
                sequence.push(*r);
            }
        }
        Progression {
            regimes,
            sequence,
            boundaries,
        }
    }

    pub fn render(&self) -> String {
        self.sequence
            .iter()
            .map(|r| r.symbol())
            .collect::<Vec<_>>()
            .join("→")
    }
}

#[derive(Clone, Debug, Default)]
pub struct HorizonOptions {
    pub solve: SolveOptions,
    pub interpretation: Interpretation,
}

fn closure(m: &DrMdp, start: Pair, allowed: impl Fn(Pair) -> Vec<ActionIx>) -> BTreeSet<Pair> {
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        for a in allowed(p) {
            for (succ, q) in m.successors(p, a) {
                if q.is_positive() && seen.insert(*succ) {
                    queue.push_back(*succ);
                }
            }
        }
    }
    seen
}

fn realized_by_policy(
    m: &DrMdp,
    policy: &Policy,
    start: Pair,
    horizon: usize,
    target: ThetaIx,
    opts: &SolveOptions,
) -> Result<bool> {
    let d = trajectory_distribution(&m.with_initial(start), policy, horizon, &opts.limits)?;
    Ok(d.reward_trajectories(ThetaWindow::Inclusive)
        .keys()
        .any(|seq| seq.contains(&target)))
}

fn selection_realizes(m: &DrMdp, set: &StationarySet, start: Pair, target: ThetaIx) -> bool {
    closure(m, start, |p| {
        set.allowed.get(&p).cloned().unwrap_or_default()
    })
    .iter()
    .any(|p| p.1 == target)
}

/// Regime of the influence pattern at horizon H.
///
/// Episode length: ③ iff some optimal policy realizes θ_X with positive
/// probability by θ_H. Planning depth: ③ iff following some replanning
/// selection from the start ever realizes θ_X.
pub fn classify_regime(
    m: &DrMdp,
    itype: InfluenceType,
    objective: Objective,
    horizon: usize,
    opts: &HorizonOptions,
) -> Result<Regime> {
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    let start = opts.solve.start(m);
    let target = itype.target;
    let natural =
        crate::influence::natural_reward_evolution_from(m, start, horizon, ThetaWindow::Inclusive);
    if natural.keys().any(|seq| seq.contains(&target)) {
        return Err(Error::Unsupported(format!(
            "theta {} already occurs under the inaction policy",
            m.thetas()[target]
        )));
    }
    let capable = layers(m, start, horizon)
        .iter()
        .any(|l| l.iter().any(|p| p.1 == target));
    if !capable {
        return Ok(Regime::Incapable);
    }
    let optimal = match opts.interpretation {
        Interpretation::PlanningDepth => {
            let set = replanning_policy(m, horizon, objective, &opts.solve)?;
            selection_realizes(m, &set, start, target)
        }
        Interpretation::EpisodeLength => {
            if objective.is_additive() {
                let step = StepReward::for_objective(m, objective, start, horizon)?;
                let sol = backward_induction(m, start, horizon, &step)?;
                sol.optimal_reach(m)
                    .iter()
                    .any(|l| l.iter().any(|p| p.1 == target))
            } else if objective == Objective::Myopic {
                let mut any = false;
                for p in myopic_policies(m).selections() {
                    any |= realized_by_policy(m, &p, start, horizon, target, &opts.solve)?;
                }
                any
            } else {
                let set = episode_optimal(m, horizon, objective, &opts.solve)?;
                let mut any = false;
                for c in &set.members {
                    any |=
                        realized_by_policy(m, &c.to_policy(), start, horizon, target, &opts.solve)?;
                }
                any
            }
        }
    };
    Ok(if optimal {
        Regime::Optimal
    } else {
        Regime::CapableSuboptimal
    })
}

pub fn optimality_progression(
    m: &DrMdp,
    itype: InfluenceType,
    objective: Objective,
    h_max: usize,
    opts: &HorizonOptions,
) -> Result<Progression> {
    let regimes = (1..=h_max)
        .map(|h| classify_regime(m, itype, objective, h, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(Progression::from_regimes(regimes))
}

fn stationary_action(policy: &Policy, pair: Pair) -> Result<ActionIx> {
    if !policy.is_stationary() {
        return Err(Error::Unsupported(
            "average reward needs a stationary policy".into(),
        ));
    }
    policy
        .action(0, pair)
        .ok_or_else(|| Error::PolicyIncomplete(format!("{pair:?}")))
}

/// Limiting mean real-time reward of a stationary policy on a deterministic
/// instance: the mean reward of the cycle the run falls into.
pub fn average_reward(m: &DrMdp, policy: &Policy, start: Pair) -> Result<Q> {
    if !m.is_deterministic() {
        return Err(Error::NonDeterministic);
    }
    let mut seen: BTreeMap<Pair, usize> = BTreeMap::new();
    let mut rewards: Vec<Q> = Vec::new();
    let mut pair = start;
    loop {
        if let Some(&i) = seen.get(&pair) {
            let cycle = &rewards[i..];
            let sum: Q = cycle.iter().cloned().sum();
            return Ok(sum / int(cycle.len() as i64));
        }
        seen.insert(pair, rewards.len());
        let a = stationary_action(policy, pair)?;
        let (succ, _) = m.successors(pair, a).first().cloned().ok_or_else(|| {
            Error::spec("transitions", format!("no row at {}", m.pair_name(pair)))
        })?;
        rewards.push(m.reward(pair.1, pair.0, a, succ.0).clone());
        pair = succ;
    }
}

/// Witness of the 2-reward structure: the single influence transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoReward {
    pub theta_not_delta: ThetaIx,
    pub theta_delta: ThetaIx,
    pub s_delta: StateIx,
    pub a_delta: ActionIx,
    pub s_delta_next: StateIx,
}

/// Checks |Θ| = 2, deterministic dynamics, a unique influence transition at a
/// reachable pair, and that θ_Δ is absorbing.
pub fn two_reward_structure(m: &DrMdp) -> std::result::Result<TwoReward, String> {
    if m.n_thetas() != 2 {
        return Err(format!("it has {} reward parameterizations", m.n_thetas()));
    }
    if !m.is_deterministic() {
        return Err("its dynamics are stochastic".into());
    }
    let not_delta = m.initial().1;
    let delta = 1 - not_delta;
    let mut influence = Vec::new();
    for pair in m.reachable_pairs() {
        for a in 0..m.n_actions() {
            let succ = m.successors(pair, a)[0].0;
            if pair.1 == not_delta && succ.1 == delta {
                influence.push((pair.0, a, succ.0));
            }
            if pair.1 == delta && succ.1 == not_delta {
                return Err(format!(
                    "{} returns to {} from {}",
                    m.actions()[a],
                    m.thetas()[not_delta],
                    m.pair_name(pair)
                ));
            }
        }
    }
    match influence[..] {
        [(s_delta, a_delta, s_delta_next)] => Ok(TwoReward {
            theta_not_delta: not_delta,
            theta_delta: delta,
            s_delta,
            a_delta,
            s_delta_next,
        }),
        [] => Err("no transition reaches the second parameterization".into()),
        _ => Err(format!(
            "{} distinct influence transitions",
            influence.len()
        )),
    }
}

pub fn is_two_reward(m: &DrMdp) -> bool {
    two_reward_structure(m).is_ok()
}

/// A cycle of the deterministic (s, θ) graph with its mean real-time reward.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanCycle {
    pub mean: Q,
    /// (pair, action) along the cycle.
    pub cycle: Vec<(Pair, ActionIx)>,
}

/// Maximum mean-reward cycle reachable from `root` using the edges `keep`
/// admits (Karp's algorithm, exact). `None` if no such cycle exists.
pub fn max_mean_cycle(
    m: &DrMdp,
    root: Pair,
    keep: impl Fn(Pair, ActionIx, Pair) -> bool,
) -> Option<MeanCycle> {
    let mut edges: Vec<(Pair, ActionIx, Pair, Q)> = Vec::new();
    let nodes = closure(m, root, |p| {
        (0..m.n_actions())
            .filter(|&a| m.row(p, a).is_some_and(|r| keep(p, a, r[0].0)))
            .collect()
    });
    for &p in &nodes {
        for a in 0..m.n_actions() {
            if let Some(row) = m.row(p, a) {
                let succ = row[0].0;
                if keep(p, a, succ) {
                    edges.push((p, a, succ, m.reward(p.1, p.0, a, succ.0).clone()));
                }
            }
        }
    }
    let idx: BTreeMap<Pair, usize> = nodes.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let list: Vec<Pair> = nodes.iter().copied().collect();
    let n = list.len();
    // d[k][v]: best weight of a k-edge walk from root to v; pred for recovery.
    let mut d: Vec<Vec<Option<Q>>> = vec![vec![None; n]; n + 1];
    let mut pred: Vec<Vec<Option<(usize, ActionIx)>>> = vec![vec![None; n]; n + 1];
    d[0][idx[&root]] = Some(Q::zero());
    for k in 1..=n {
        for (u, a, v, w) in &edges {
            let (ui, vi) = (idx[u], idx[v]);
            if let Some(du) = &d[k - 1][ui] {
                let cand = du + w;
                if d[k][vi].as_ref().is_none_or(|cur| &cand > cur) {
                    d[k][vi] = Some(cand);
                    pred[k][vi] = Some((ui, *a));
                }
            }
        }
    }
    let mut best: Option<(Q, usize)> = None;
    for v in 0..n {
        let Some(dn) = &d[n][v] else { continue };
        let worst = (0..n)
            .filter_map(|k| d[k][v].as_ref().map(|dk| (dn - dk) / int((n - k) as i64)))
            .min();
        if let Some(w) = worst {
            if best.as_ref().is_none_or(|(b, _)| &w > b) {
                best = Some((w, v));
            }
        }
    }
    let (mean, v) = best?;
    // Recover the n-edge walk to v and pick a cycle on it with the optimal mean.
    let mut walk = vec![(v, None)];
    let mut cur = v;
    for k in (1..=n).rev() {
        let (u, a) = pred[k][cur].expect("walk predecessor");
        walk.push((u, Some(a)));
        cur = u;
    }
    walk.reverse(); // walk[i] = (node, action taken from it towards walk[i + 1])
    let mut first_seen: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, (node, _)) in walk.iter().enumerate() {
        if let Some(&j) = first_seen.get(node) {
            let cyc: Vec<(Pair, ActionIx)> = (j..i)
                .map(|k| (list[walk[k].0], walk[k].1.expect("action")))
                .collect();
            let sum: Q = cyc
                .iter()
                .map(|(p, a)| {
                    let s2 = m.successors(*p, *a)[0].0;
                    m.reward(p.1, p.0, *a, s2.0).clone()
                })
                .sum();
            if sum / int(cyc.len() as i64) == mean {
                return Some(MeanCycle { mean, cycle: cyc });
            }
        }
        first_seen.insert(*node, i);
    }
    Some(MeanCycle {
        mean,
        cycle: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LongHorizonReport {
    pub structure: TwoReward,
    /// Best average reward after influence, from (s'_Δ, θ_Δ).
    pub best_after_influence: MeanCycle,
    /// Best average reward of a never-influencing policy from the start.
    pub best_without_influence: Option<MeanCycle>,
    pub gap: Q,
    pub epsilon: Option<Q>,
    pub premise_holds: bool,
    /// First H with a real-time influence incentive (only when the premise holds).
    pub first_incentive: Option<usize>,
    /// Smallest H such that the incentive holds on every horizon in [H, H_max].
    pub h_star: Option<usize>,
    /// Whether such an H exists, i.e. the incentive holds at H_max.
    pub persists: bool,
    pub verified_through: usize,
}

/// Evaluates the average-reward premise exactly and, when it holds, sweeps
/// the horizon for the real-time influence incentive up to `h_max`.
///
/// The premise maximizes over stationary deterministic policies; on a
/// deterministic graph that maximum is the best mean cycle reachable from the
/// start pair, which avoids enumerating |A|^|pairs| policies.
pub fn long_horizon_condition(
    m: &DrMdp,
    epsilon: Option<Q>,
    h_max: usize,
    opts: &SolveOptions,
) -> Result<LongHorizonReport> {
    let tw = two_reward_structure(m).map_err(Error::NotTwoReward)?;
    let delta_start = (tw.s_delta_next, tw.theta_delta);
    let after = max_mean_cycle(m, delta_start, |_, _, _| true)
        .expect("θ_Δ is absorbing, so a cycle exists");
    let without = max_mean_cycle(m, m.initial(), |_, _, succ| succ.1 != tw.theta_delta);
    let gap = match &without {
        Some(w) => &after.mean - &w.mean,
        None => after.mean.clone(),
    };
    let premise_holds = match &epsilon {
        Some(e) => &gap > e,
        None => gap.is_positive(),
    };
    let mut h_star = None;
    let mut first_incentive = None;
    let mut persists = false;
    if premise_holds {
        let io = InfluenceOptions {
            solve: opts.clone(),
            ..InfluenceOptions::default()
        };
        let flags = (1..=h_max)
            .map(|h| influence_incentive(m, h, Objective::RealTime, &io).map(|v| v.incentive))
            .collect::<Result<Vec<bool>>>()?;
        first_incentive = flags.iter().position(|f| *f).map(|i| i + 1);
        // Start of the final run of horizons with an incentive.
        let tail = flags.iter().rev().take_while(|f| **f).count();
        if tail > 0 {
            h_star = Some(h_max - tail + 1);
        }
        persists = tail > 0;
    }
    Ok(LongHorizonReport {
        structure: tw,
        best_after_influence: after,
        best_without_influence: without,
        gap,
        epsilon,
        premise_holds,
        first_incentive,
        h_star,
        persists,
        verified_through: h_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::catalog;
    use crate::rational::ratio;

    fn reg(n: &[u8]) -> Vec<Regime> {
        n.iter()
            .map(|x| match x {
                1 => Regime::Incapable,
                2 => Regime::CapableSuboptimal,
                _ => Regime::Optimal,
            })
            .collect()
    }

    #[test]
    fn progression_compression() {
        let p = Progression::from_regimes(reg(&[1, 2, 2, 3, 3, 2]));
        assert_eq!(p.sequence, reg(&[1, 2, 3, 2]));
        assert_eq!(p.boundaries, vec![2, 4, 6]);
        assert_eq!(p.render(), "①→②→③→②");
    }

    #[test]
    fn average_reward_examples() {
        let m = catalog::infinite_flipping(ratio(1, 2));
        assert_eq!(
            average_reward(&m, &Policy::noop(&m), m.initial()).unwrap(),
            int(1)
        );
        let d = catalog::disagreement();
        let ad = Policy::Constant(d.action("a_delta").unwrap());
        assert_eq!(average_reward(&d, &ad, d.initial()).unwrap(), int(20));
    }

    #[test]
    fn two_reward_recognition() {
        assert!(is_two_reward(&catalog::flexible(8).unwrap()));
        assert!(is_two_reward(&catalog::infinite_flipping(ratio(1, 2))));
        assert!(!is_two_reward(&catalog::conspiracy()));
        assert!(!is_two_reward(&catalog::dehydration()));
    }

    #[test]
    fn karp_matches_stationary_enumeration() {
        for m in [
            catalog::disagreement(),
            catalog::infinite_flipping(ratio(1, 2)),
            catalog::conspiracy(),
            catalog::clickbait(),
        ] {
            let pairs = m.reachable_pairs();
            let set = StationarySet {
                allowed: pairs
                    .iter()
                    .map(|p| (*p, (0..m.n_actions()).collect()))
                    .collect(),
            };
            let best = set
                .selections()
                .iter()
                .map(|p| average_reward(&m, p, m.initial()).unwrap())
                .max()
                .unwrap();
            let k = max_mean_cycle(&m, m.initial(), |_, _, _| true).unwrap();
            assert_eq!(k.mean, best);
            assert!(!k.cycle.is_empty());
        }
    }

    #[test]
    fn sufficient_condition_on_flexible_setups() {
        let opts = SolveOptions::default();
        let r8 = long_horizon_condition(&catalog::flexible(8).unwrap(), None, 25, &opts).unwrap();
        assert!(!r8.premise_holds);
        let r3 = long_horizon_condition(&catalog::flexible(3).unwrap(), None, 25, &opts).unwrap();
        assert!(r3.premise_holds && r3.persists);
        assert_eq!(r3.h_star, Some(3));
    }
}
