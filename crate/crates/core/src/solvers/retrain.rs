//! Iterative retraining of a myopic learner on a long-horizon metric.
//!
//! Each round deploys the greedy policy of the current value estimate, then
//! re-estimates action values by exact evaluation of the deployed policy.
//! This is policy iteration on the time-indexed problem, so the deployed
//! value never decreases and the fixed point is real-time optimal.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{ActionIx, DrMdp, Pair, Policy};
use crate::rational::Q;

use super::backward::{backward_induction, StepReward};
use super::enumerate::layers;

/// Action-value estimates per step: `table[t][(pair, a)]`.
pub type QTable = Vec<BTreeMap<(Pair, ActionIx), Q>>;

#[derive(Clone, Debug)]
pub struct RetrainResult {
    pub policy: Policy,
    /// Number of deployed policies before the greedy policy stopped changing.
    pub iterations: usize,
    /// Real-time value of each deployed policy from the start pair.
    pub values: Vec<Q>,
    pub q: QTable,
}

/// Q₀(t, pair, a) = expected immediate reward under the current θ.
pub fn immediate_reward_table(m: &DrMdp, start: Pair, horizon: usize) -> QTable {
    layers(m, start, horizon)[..horizon]
        .iter()
        .map(|layer| {
            layer
                .iter()
                .flat_map(|&pair| {
                    (0..m.n_actions()).map(move |a| ((pair, a), m.expected_reward(pair.1, pair, a)))
                })
                .collect()
        })
        .collect()
}

/// The optimal real-time action values, for checking the fixed point.
pub fn optimal_table(m: &DrMdp, start: Pair, horizon: usize) -> Result<QTable> {
    let sol = backward_induction(m, start, horizon, &StepReward::Current)?;
    let ls = layers(m, start, horizon);
    let mut out = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let mut row = BTreeMap::new();
        for &pair in &ls[t] {
            for a in 0..m.n_actions() {
                let mut q = Q::zero();
                for (succ, p) in m.successors(pair, a) {
                    if p.is_positive() {
                        q += p * (m.reward(pair.1, pair.0, a, succ.0) + &sol.values[t + 1][succ]);
                    }
                }
                row.insert((pair, a), q);
            }
        }
        out.push(row);
    }
    Ok(out)
}

fn greedy(
    q: &QTable,
    prev: Option<&BTreeMap<(usize, Pair), ActionIx>>,
) -> BTreeMap<(usize, Pair), ActionIx> {
    let mut out = BTreeMap::new();
    for (t, row) in q.iter().enumerate() {
        let mut by_pair: BTreeMap<Pair, Vec<(ActionIx, &Q)>> = BTreeMap::new();
        for ((pair, a), v) in row {
            by_pair.entry(*pair).or_default().push((*a, v));
        }
        for (pair, vals) in by_pair {
            let best = vals.iter().map(|(_, v)| *v).max().expect("non-empty");
            let keep = prev
                .and_then(|p| p.get(&(t, pair)))
                .filter(|a| vals.iter().any(|(b, v)| b == *a && *v == best));
            let a = match keep {
                Some(a) => *a,
                None => vals
                    .iter()
                    .find(|(_, v)| *v == best)
                    .map(|(a, _)| *a)
                    .expect("argmax"),
            };
            out.insert((t, pair), a);
        }
    }
    out
}

fn evaluate(
    m: &DrMdp,
    start: Pair,
    horizon: usize,
    policy: &BTreeMap<(usize, Pair), ActionIx>,
) -> (QTable, Q) {
    let ls = layers(m, start, horizon);
    let mut v_next: BTreeMap<Pair, Q> = ls[horizon].iter().map(|p| (*p, Q::zero())).collect();
    let mut table: QTable = vec![BTreeMap::new(); horizon];
    for t in (0..horizon).rev() {
        let mut v = BTreeMap::new();
        for &pair in &ls[t] {
            for a in 0..m.n_actions() {
                let mut q = Q::zero();
                for (succ, p) in m.successors(pair, a) {
                    if p.is_positive() {
                        q += p * (m.reward(pair.1, pair.0, a, succ.0) + &v_next[succ]);
                    }
                }
                table[t].insert((pair, a), q);
            }
            v.insert(pair, table[t][&(pair, policy[&(t, pair)])].clone());
        }
        v_next = v;
    }
    let value = v_next[&start].clone();
    (table, value)
}

/// Runs greedy extraction and exact evaluation until the greedy policy is
/// stable. `q0` must cover every (t, pair, a) reachable from `start`.
pub fn iterative_retraining(
    m: &DrMdp,
    start: Pair,
    horizon: usize,
    q0: QTable,
) -> Result<RetrainResult> {
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    if q0.len() != horizon {
        return Err(Error::Unsupported(format!(
            "initial table has {} steps, expected {horizon}",
            q0.len()
        )));
    }
    let bound = horizon * m.n_states() * m.n_thetas() * m.n_actions() + 2;
    let mut q = q0;
    let mut deployed: Option<BTreeMap<(usize, Pair), ActionIx>> = None;
    let mut values: Vec<Q> = Vec::new();
    loop {
        let pi = greedy(&q, deployed.as_ref());
        if deployed.as_ref() == Some(&pi) {
            break;
        }
        assert!(values.len() <= bound, "policy iteration failed to converge");
        let (table, value) = evaluate(m, start, horizon, &pi);
        if let Some(last) = values.last() {
            assert!(&value >= last, "policy iteration value decreased");
        }
        values.push(value);
        q = table;
        deployed = Some(pi);
    }
    Ok(RetrainResult {
        policy: Policy::NonStationary(deployed.expect("at least one round")),
        iterations: values.len(),
        values,
        q,
    })
}
