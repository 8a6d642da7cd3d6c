//! Brute-force enumeration of policy classes.
//!
//! Layer by layer, every assignment of actions to the distinct pairs the
//! policy reaches at time t is tried. Each leaf is one on-path equivalence
//! class. Partial trajectories that agree on (pair, θ-sequence) are merged,
//! carrying probability-weighted reward accumulators, so every objective can
//! be read off the leaf without revisiting the support.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};

use crate::distribution::{noop_theta_marginals, RewardTrajectoryDistribution, ThetaWindow};
use crate::error::{Error, Result};
use crate::model::{ActionIx, DrMdp, Limits, Pair, PolicyClass, ThetaIx};
use crate::objectives::Objective;
use crate::rational::Q;

/// Everything the objectives need to know about one policy class.
#[derive(Clone, Debug)]
pub struct ClassStats {
    pub class: PolicyClass,
    pub real_time: Q,
    pub final_reward: Q,
    pub natural_shifts: Q,
    /// EU_θ for every θ.
    pub per_theta: Vec<Q>,
    /// Distribution of (θ₀, …, θ_H).
    pub xi_inclusive: RewardTrajectoryDistribution,
    /// Distribution of θ_H.
    pub final_theta: Vec<Q>,
    start_theta: ThetaIx,
}

impl ClassStats {
    pub fn value(&self, objective: Objective) -> Option<&Q> {
        Some(match objective {
            Objective::RealTime => &self.real_time,
            Objective::FinalReward => &self.final_reward,
            Objective::InitialReward => &self.per_theta[self.start_theta],
            Objective::NaturalShifts => &self.natural_shifts,
            Objective::Privileged(t) => &self.per_theta[t],
            _ => return None,
        })
    }

    pub fn xi(&self, window: ThetaWindow) -> RewardTrajectoryDistribution {
        match window {
            ThetaWindow::Inclusive => self.xi_inclusive.clone(),
            ThetaWindow::Exclusive => {
                let mut out = RewardTrajectoryDistribution::new();
                for (seq, p) in &self.xi_inclusive {
                    *out.entry(seq[..seq.len() - 1].to_vec())
                        .or_insert_with(Q::zero) += p;
                }
                out
            }
        }
    }

    /// Whether θ is realized at some t ≤ H with positive probability.
    pub fn realizes(&self, theta: ThetaIx) -> bool {
        self.xi_inclusive.keys().any(|seq| seq.contains(&theta))
    }
}

/// Pairs reachable at exactly step t, for t = 0..=H, under any actions.
pub fn layers(m: &DrMdp, start: Pair, horizon: usize) -> Vec<BTreeSet<Pair>> {
    let mut out = vec![BTreeSet::from([start])];
    for t in 0..horizon {
        let mut next = BTreeSet::new();
        for &pair in &out[t] {
            for a in 0..m.n_actions() {
                for (succ, q) in m.successors(pair, a) {
                    if q.is_positive() {
                        next.insert(*succ);
                    }
                }
            }
        }
        out.push(next);
    }
    out
}

/// Upper bound on the number of non-stationary policies over time-reachable
/// nodes: Π_t |A|^{|R_t|}.
pub fn policy_count_bound(m: &DrMdp, start: Pair, horizon: usize) -> BigUint {
    let exponent: usize = layers(m, start, horizon)[..horizon]
        .iter()
        .map(|l| l.len())
        .sum();
    BigUint::from(m.n_actions()).pow(exponent as u32)
}

pub fn check_policy_cap(m: &DrMdp, start: Pair, horizon: usize, limits: &Limits) -> Result<()> {
    let needed = policy_count_bound(m, start, horizon);
    if needed > BigUint::from(limits.max_policies) {
        return Err(Error::PolicyCap {
            needed: needed.to_string(),
            cap: limits.max_policies,
        });
    }
    Ok(())
}

#[derive(Clone)]
struct Path {
    prob: Q,
    // Probability-weighted accumulators.
    real_time: Q,
    natural_shifts: Q,
    per_theta: Vec<Q>,
}

struct Edge {
    succ: Pair,
    prob: Q,
    /// R_θ(s, a, s') for every θ.
    rewards: Vec<Q>,
}

struct Engine<'a> {
    m: &'a DrMdp,
    horizon: usize,
    ns_weights: Vec<Vec<Q>>,
    edges: BTreeMap<(Pair, ActionIx), Vec<Edge>>,
    start_theta: ThetaIx,
    max_paths: usize,
}

type Frontier = BTreeMap<(Pair, Vec<ThetaIx>), Path>;

/// Calls `visit` once per on-path policy class of the horizon-H episode
/// started at `start`, in a deterministic order.
pub fn for_each_class(
    m: &DrMdp,
    start: Pair,
    horizon: usize,
    limits: &Limits,
    mut visit: impl FnMut(ClassStats) -> Result<()>,
) -> Result<()> {
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    check_policy_cap(m, start, horizon, limits)?;
    let mut edges = BTreeMap::new();
    for layer in layers(m, start, horizon) {
        for pair in layer {
            for a in 0..m.n_actions() {
                if edges.contains_key(&(pair, a)) {
                    continue;
                }
                let row = m.row(pair, a).ok_or_else(|| {
                    Error::spec(
                        "transitions",
                        format!("no row for {} under {}", m.pair_name(pair), m.actions()[a]),
                    )
                })?;
                let list = row
                    .iter()
                    .filter(|(_, q)| q.is_positive())
                    .map(|(succ, q)| Edge {
                        succ: *succ,
                        prob: q.clone(),
                        rewards: (0..m.n_thetas())
                            .map(|th| m.reward(th, pair.0, a, succ.0).clone())
                            .collect(),
                    })
                    .collect();
                edges.insert((pair, a), list);
            }
        }
    }
    let engine = Engine {
        m,
        horizon,
        ns_weights: noop_theta_marginals(m, start, horizon),
        edges,
        start_theta: start.1,
        max_paths: limits.max_trajectories,
    };
    let zero_path = Path {
        prob: Q::one(),
        real_time: Q::zero(),
        natural_shifts: Q::zero(),
        per_theta: vec![Q::zero(); m.n_thetas()],
    };
    let frontier: Frontier = BTreeMap::from([((start, vec![start.1]), zero_path)]);
    let mut table = Vec::new();
    engine.layer(0, &frontier, &mut table, &mut visit)
}

impl Engine<'_> {
    fn layer(
        &self,
        t: usize,
        frontier: &Frontier,
        table: &mut Vec<((usize, Pair), ActionIx)>,
        visit: &mut dyn FnMut(ClassStats) -> Result<()>,
    ) -> Result<()> {
        if t == self.horizon {
            return visit(self.leaf(frontier, table));
        }
        let nodes: Vec<Pair> = frontier
            .keys()
            .map(|(p, _)| *p)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let na = self.m.n_actions();
        let mut choice = vec![0usize; nodes.len()];
        loop {
            let assign: BTreeMap<Pair, ActionIx> =
                nodes.iter().copied().zip(choice.iter().copied()).collect();
            let next = self.step(t, frontier, &assign)?;
            let mark = table.len();
            table.extend(assign.iter().map(|(p, a)| ((t, *p), *a)));
            self.layer(t + 1, &next, table, visit)?;
            table.truncate(mark);
            // Odometer over per-node actions, last node fastest.
            let mut i = nodes.len();
            loop {
                if i == 0 {
                    return Ok(());
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < na {
                    break;
                }
                choice[i] = 0;
            }
        }
    }

    fn step(
        &self,
        t: usize,
        frontier: &Frontier,
        assign: &BTreeMap<Pair, ActionIx>,
    ) -> Result<Frontier> {
        let mut next: Frontier = BTreeMap::new();
        let w = &self.ns_weights[t];
        for ((pair, seq), path) in frontier {
            let a = assign[pair];
            for e in &self.edges[&(*pair, a)] {
                let pq = &path.prob * &e.prob;
                let mut ns_r = Q::zero();
                for (th, wt) in w.iter().enumerate() {
                    if !wt.is_zero() {
                        ns_r += wt * &e.rewards[th];
                    }
                }
                let mut seq2 = seq.clone();
                seq2.push(e.succ.1);
                let add = Path {
                    real_time: &path.real_time * &e.prob + &pq * &e.rewards[pair.1],
                    natural_shifts: &path.natural_shifts * &e.prob + &pq * ns_r,
                    per_theta: path
                        .per_theta
                        .iter()
                        .zip(&e.rewards)
                        .map(|(acc, r)| acc * &e.prob + &pq * r)
                        .collect(),
                    prob: pq,
                };
                match next.entry((e.succ, seq2)) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(add);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        let cur = o.get_mut();
                        cur.prob += add.prob;
                        cur.real_time += add.real_time;
                        cur.natural_shifts += add.natural_shifts;
                        for (x, y) in cur.per_theta.iter_mut().zip(add.per_theta) {
                            *x += y;
                        }
                    }
                }
            }
        }
        if next.len() > self.max_paths {
            return Err(Error::TrajectoryCap {
                cap: self.max_paths,
            });
        }
        Ok(next)
    }

    fn leaf(&self, frontier: &Frontier, table: &[((usize, Pair), ActionIx)]) -> ClassStats {
        let nt = self.m.n_thetas();
        let mut real_time = Q::zero();
        let mut natural_shifts = Q::zero();
        let mut final_reward = Q::zero();
        let mut per_theta = vec![Q::zero(); nt];
        let mut final_theta = vec![Q::zero(); nt];
        let mut xi_inclusive = RewardTrajectoryDistribution::new();
        for ((pair, seq), path) in frontier {
            real_time += &path.real_time;
            natural_shifts += &path.natural_shifts;
            final_reward += &path.per_theta[pair.1];
            for (acc, x) in per_theta.iter_mut().zip(&path.per_theta) {
                *acc += x;
            }
            final_theta[pair.1] += &path.prob;
            *xi_inclusive.entry(seq.clone()).or_insert_with(Q::zero) += &path.prob;
        }
        ClassStats {
            class: PolicyClass {
                table: table.iter().cloned().collect(),
            },
            real_time,
            final_reward,
            natural_shifts,
            per_theta,
            xi_inclusive,
            final_theta,
            start_theta: self.start_theta,
        }
    }
}

/// Collects every class. Intended for small instances and tests.
pub fn all_classes(
    m: &DrMdp,
    start: Pair,
    horizon: usize,
    limits: &Limits,
) -> Result<Vec<ClassStats>> {
    let mut out = Vec::new();
    for_each_class(m, start, horizon, limits, |c| {
        out.push(c);
        Ok(())
    })?;
    Ok(out)
}
