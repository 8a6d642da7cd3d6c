//! Optimal-policy sets for every objective.

pub mod backward;
pub mod enumerate;
pub mod reduce;
pub mod replan;
pub mod retrain;

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::distribution::ThetaWindow;
use crate::error::{Error, Result};
use crate::model::{ActionIx, DrMdp, Limits, Pair, Policy, PolicyClass};
use crate::objectives::Objective;
use crate::rational::Q;

pub use backward::{backward_induction, NodeSolution, StepReward};
pub use enumerate::{all_classes, for_each_class, ClassStats};
pub use reduce::{history_optimum, reduce_and_solve};
pub use replan::replanning_policy;
pub use retrain::{iterative_retraining, RetrainResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Enumerate,
    Reduce,
    Replan,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub limits: Limits,
    /// Overrides the instance's initial pair.
    pub start: Option<Pair>,
    /// θ window used by the constrained real-time objective.
    pub crt_window: ThetaWindow,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            limits: Limits::default(),
            start: None,
            crt_window: ThetaWindow::Inclusive,
        }
    }
}

impl SolveOptions {
    pub fn start(&self, m: &DrMdp) -> Pair {
        self.start.unwrap_or(m.initial())
    }

    pub fn from(&self, start: Pair) -> SolveOptions {
        SolveOptions {
            start: Some(start),
            ..self.clone()
        }
    }
}

/// The full argmax set of an episode objective, up to on-path equivalence.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalSet {
    pub objective: Objective,
    pub horizon: usize,
    pub start: Pair,
    /// Canonically sorted.
    pub members: Vec<PolicyClass>,
    /// Absent for ParetoUD.
    pub value: Option<Q>,
}

impl OptimalSet {
    pub fn contains(&self, class: &PolicyClass) -> bool {
        self.members.binary_search(class).is_ok()
    }

    /// Actions optimal sets take at the start pair.
    pub fn first_actions(&self) -> Vec<ActionIx> {
        let mut v: Vec<ActionIx> = self
            .members
            .iter()
            .filter_map(|c| c.action(0, self.start))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Argmax over policy classes of a trajectory-functional objective.
pub fn enumerate_optimal(
    m: &DrMdp,
    horizon: usize,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<OptimalSet> {
    if !objective.is_trajectory_functional() {
        return Err(Error::Unsupported(format!(
            "{objective} is not a trajectory functional"
        )));
    }
    let start = opts.start(m);
    let mut best: Option<Q> = None;
    let mut members = Vec::new();
    for_each_class(m, start, horizon, &opts.limits, |c| {
        let v = c.value(objective).expect("trajectory functional");
        match &best {
            Some(b) if v < b => {}
            Some(b) if v == b => members.push(c.class),
            _ => {
                best = Some(v.clone());
                members = vec![c.class];
            }
        }
        Ok(())
    })?;
    members.sort();
    Ok(OptimalSet {
        objective,
        horizon,
        start,
        members,
        value: best,
    })
}

/// Real-time argmax among classes whose reward-trajectory distribution equals
/// that of the inaction policy.
pub fn constrained_rt_optimal(
    m: &DrMdp,
    horizon: usize,
    opts: &SolveOptions,
) -> Result<OptimalSet> {
    let start = opts.start(m);
    let noop_xi =
        crate::influence::natural_reward_evolution_from(m, start, horizon, opts.crt_window);
    let mut best: Option<Q> = None;
    let mut members = Vec::new();
    for_each_class(m, start, horizon, &opts.limits, |c| {
        if c.xi(opts.crt_window) != noop_xi {
            return Ok(());
        }
        let v = &c.real_time;
        match &best {
            Some(b) if v < b => {}
            Some(b) if v == b => members.push(c.class),
            _ => {
                best = Some(v.clone());
                members = vec![c.class];
            }
        }
        Ok(())
    })?;
    assert!(
        !members.is_empty(),
        "the inaction class always satisfies the constraint"
    );
    members.sort();
    Ok(OptimalSet {
        objective: Objective::ConstrainedRT,
        horizon,
        start,
        members,
        value: best,
    })
}

/// Episode-length optimal set for any objective except Myopic, which is a
/// stationary construction (see [`myopic_policies`]).
pub fn episode_optimal(
    m: &DrMdp,
    horizon: usize,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<OptimalSet> {
    match objective {
        Objective::ConstrainedRT => constrained_rt_optimal(m, horizon, opts),
        Objective::ParetoUD => crate::pareto::pareto_ud_optimal(m, horizon, opts),
        Objective::Myopic => Err(Error::Unsupported(
            "the myopic objective is a greedy stationary construction; use myopic_policies".into(),
        )),
        _ => enumerate_optimal(m, horizon, objective, opts),
    }
}

pub fn solve(
    m: &DrMdp,
    horizon: usize,
    objective: Objective,
    method: Method,
    opts: &SolveOptions,
) -> Result<OptimalSet> {
    match method {
        Method::Enumerate => episode_optimal(m, horizon, objective, opts),
        Method::Reduce => reduce_and_solve(m, horizon, objective, opts),
        Method::Replan => Err(Error::Unsupported(
            "replanning yields stationary selections; use replanning_policy".into(),
        )),
    }
}

/// A set of stationary policies given as per-pair allowed actions; the
/// policies are all selections from the cross product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StationarySet {
    pub allowed: BTreeMap<Pair, Vec<ActionIx>>,
}

impl StationarySet {
    pub fn count(&self) -> u128 {
        self.allowed.values().map(|v| v.len() as u128).product()
    }

    pub fn allows(&self, pair: Pair, a: ActionIx) -> bool {
        self.allowed.get(&pair).is_some_and(|v| v.contains(&a))
    }

    /// Every selection, in lexicographic order. Callers bound the count.
    pub fn selections(&self) -> Vec<Policy> {
        let mut out = vec![BTreeMap::new()];
        for (pair, acts) in &self.allowed {
            let mut next = Vec::with_capacity(out.len() * acts.len());
            for partial in &out {
                for a in acts {
                    let mut p = partial.clone();
                    p.insert(*pair, *a);
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter().map(Policy::Stationary).collect()
    }
}

/// Greedy one-step argmax of the current reward function at each pair
/// reachable from the initial pair.
pub fn myopic_policies(m: &DrMdp) -> StationarySet {
    let mut allowed = BTreeMap::new();
    for pair in m.reachable_pairs() {
        let vals: Vec<Q> = (0..m.n_actions())
            .map(|a| m.expected_reward(pair.1, pair, a))
            .collect();
        let best = vals.iter().max().cloned().unwrap_or_else(Q::zero);
        allowed.insert(
            pair,
            (0..m.n_actions()).filter(|&a| vals[a] == best).collect(),
        );
    }
    StationarySet { allowed }
}

/// On-path class of an arbitrary policy from `start`.
pub fn class_of(m: &DrMdp, policy: &Policy, start: Pair, horizon: usize) -> Result<PolicyClass> {
    class_of_fn(m, start, horizon, |t, p| policy.action(t, p))
}

pub fn class_of_fn(
    m: &DrMdp,
    start: Pair,
    horizon: usize,
    choose: impl Fn(usize, Pair) -> Option<ActionIx>,
) -> Result<PolicyClass> {
    use num_traits::Signed;
    use std::collections::BTreeSet;
    let mut table = BTreeMap::new();
    let mut frontier = BTreeSet::from([start]);
    for t in 0..horizon {
        let mut next = BTreeSet::new();
        for &pair in &frontier {
            let a = choose(t, pair).ok_or_else(|| {
                Error::PolicyIncomplete(format!("t={t} at {}", m.pair_name(pair)))
            })?;
            table.insert((t, pair), a);
            for (succ, q) in m.successors(pair, a) {
                if q.is_positive() {
                    next.insert(*succ);
                }
            }
        }
        frontier = next;
    }
    Ok(PolicyClass { table })
}

/// Renders a class compactly, e.g. `t0 (s0,natural)=noop; t1 ...`.
pub fn render_class(m: &DrMdp, class: &PolicyClass) -> String {
    class
        .table
        .iter()
        .map(|((t, (s, th)), a)| {
            format!(
                "t{t} ({},{})={}",
                m.states()[*s],
                m.thetas()[*th],
                m.actions()[*a]
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::catalog;
    use crate::rational::int;

    #[test]
    fn conspiracy_rt_is_always_influence() {
        let m = catalog::conspiracy();
        let set = enumerate_optimal(&m, 3, Objective::RealTime, &SolveOptions::default()).unwrap();
        let infl = m.action("influence").unwrap();
        assert_eq!(set.members.len(), 1);
        assert!(set.members[0].is_constant(infl));
        assert_eq!(set.value, Some(int(100)));
    }

    #[test]
    fn disagreement_rt_influences_until_last_step() {
        let m = catalog::disagreement();
        let ad = m.action("a_delta").unwrap();
        for h in 2..=5 {
            let set =
                enumerate_optimal(&m, h, Objective::RealTime, &SolveOptions::default()).unwrap();
            assert_eq!(set.members.len(), 1);
            for ((t, _), a) in &set.members[0].table {
                assert_eq!(*a == ad, *t < h - 1, "h={h} t={t}");
            }
        }
    }

    #[test]
    fn zero_rewards_make_every_class_optimal() {
        let m = catalog::conspiracy().scale_rewards(&Q::zero());
        let opts = SolveOptions::default();
        let all = all_classes(&m, m.initial(), 3, &opts.limits).unwrap();
        let set = enumerate_optimal(&m, 3, Objective::RealTime, &opts).unwrap();
        assert_eq!(set.members.len(), all.len());
        assert_eq!(set.value, Some(Q::zero()));
    }

    #[test]
    fn constrained_rt_examples() {
        let opts = SolveOptions::default();
        let m = catalog::conspiracy();
        let set = constrained_rt_optimal(&m, 3, &opts).unwrap();
        assert_eq!(set.members.len(), 1);
        assert!(set.members[0].is_constant(m.noop()));
        let c = catalog::clickbait();
        let set = constrained_rt_optimal(&c, 2, &opts).unwrap();
        assert!(set.members.iter().all(|k| k.is_constant(c.noop())));
    }

    #[test]
    fn myopic_examples() {
        let m = catalog::conspiracy();
        let my = myopic_policies(&m);
        let (nat, inf) = (m.theta("natural").unwrap(), m.theta("influenced").unwrap());
        let infl = m.action("influence").unwrap();
        assert_eq!(my.allowed[&(0, nat)], vec![m.noop()]);
        assert_eq!(my.allowed[&(0, inf)], vec![infl]);
        let c = catalog::clickbait();
        let my = myopic_policies(&c);
        let cb = c.action("clickbait").unwrap();
        assert_eq!(my.allowed[&(0, c.theta("normal").unwrap())], vec![cb]);
        assert_eq!(
            my.allowed[&(0, c.theta("disillusioned").unwrap())],
            vec![c.noop()]
        );
    }

    #[test]
    fn policy_cap_refuses_large_enumerations() {
        let m = catalog::dehydration();
        let opts = SolveOptions {
            limits: Limits {
                max_policies: 10,
                ..Limits::default()
            },
            ..SolveOptions::default()
        };
        let err = enumerate_optimal(&m, 3, Objective::RealTime, &opts).unwrap_err();
        assert!(matches!(err, Error::PolicyCap { .. }));
    }
}
