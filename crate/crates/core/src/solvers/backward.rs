//! Node-wise backward induction over (t, s, θ) for additive objectives.
//!
//! Objectives whose per-step weight on each R_θ depends only on t and the
//! current pair have Markov optimal substructure, so horizons far beyond the
//! enumeration guard are solvable exactly.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::distribution::noop_theta_marginals;
use crate::error::{Error, Result};
use crate::model::{ActionIx, DrMdp, Pair, ThetaIx};
use crate::objectives::Objective;
use crate::rational::Q;

use super::enumerate::layers;

/// Which reward function scores the step taken at time t from a pair.
#[derive(Clone, Debug, PartialEq)]
pub enum StepReward {
    /// R_{θ_t}: the current parameterization.
    Current,
    /// A fixed R_θ.
    Fixed(ThetaIx),
    /// Σ_θ w_t(θ) R_θ with one weight row per step.
    Mixture(Vec<Vec<Q>>),
}

impl StepReward {
    /// Step reward for an additive objective on the episode started at `start`.
    pub fn for_objective(
        m: &DrMdp,
        objective: Objective,
        start: Pair,
        horizon: usize,
    ) -> Result<StepReward> {
        Ok(match objective {
            Objective::RealTime => StepReward::Current,
            Objective::InitialReward => StepReward::Fixed(start.1),
            Objective::Privileged(t) => StepReward::Fixed(t),
            Objective::NaturalShifts => {
                StepReward::Mixture(noop_theta_marginals(m, start, horizon))
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "{other} is not additive over steps"
                )))
            }
        })
    }

    fn value(&self, m: &DrMdp, t: usize, pair: Pair, a: ActionIx, s2: usize) -> Q {
        match self {
            StepReward::Current => m.reward(pair.1, pair.0, a, s2).clone(),
            StepReward::Fixed(th) => m.reward(*th, pair.0, a, s2).clone(),
            StepReward::Mixture(w) => {
                let mut acc = Q::zero();
                for (th, wt) in w[t].iter().enumerate() {
                    if !wt.is_zero() {
                        acc += wt * m.reward(th, pair.0, a, s2);
                    }
                }
                acc
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeSolution {
    pub horizon: usize,
    pub start: Pair,
    /// V(t, pair) for t = 0..=H over pairs reachable at exactly t.
    pub values: Vec<BTreeMap<Pair, Q>>,
    /// Argmax actions at (t, pair) for t < H.
    pub optimal: Vec<BTreeMap<Pair, Vec<ActionIx>>>,
}

pub fn backward_induction(
    m: &DrMdp,
    start: Pair,
    horizon: usize,
    reward: &StepReward,
) -> Result<NodeSolution> {
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    let layers = layers(m, start, horizon);
    let mut values: Vec<BTreeMap<Pair, Q>> = vec![BTreeMap::new(); horizon + 1];
    let mut optimal: Vec<BTreeMap<Pair, Vec<ActionIx>>> = vec![BTreeMap::new(); horizon];
    values[horizon] = layers[horizon].iter().map(|p| (*p, Q::zero())).collect();
    for t in (0..horizon).rev() {
        for &pair in &layers[t] {
            let mut best: Option<Q> = None;
            let mut arg = Vec::new();
            for a in 0..m.n_actions() {
                let row = m.row(pair, a).ok_or_else(|| {
                    Error::spec(
                        "transitions",
                        format!("no row for {} under {}", m.pair_name(pair), m.actions()[a]),
                    )
                })?;
                let mut q = Q::zero();
                for (succ, p) in row {
                    if p.is_positive() {
                        q += p * (reward.value(m, t, pair, a, succ.0) + &values[t + 1][succ]);
                    }
                }
                match &best {
                    Some(b) if &q < b => {}
                    Some(b) if &q == b => arg.push(a),
                    _ => {
                        best = Some(q);
                        arg = vec![a];
                    }
                }
            }
            values[t].insert(pair, best.expect("at least one action"));
            optimal[t].insert(pair, arg);
        }
    }
    Ok(NodeSolution {
        horizon,
        start,
        values,
        optimal,
    })
}

impl NodeSolution {
    pub fn value(&self) -> &Q {
        &self.values[0][&self.start]
    }

    pub fn first_actions(&self) -> &[ActionIx] {
        &self.optimal[0][&self.start]
    }

    /// Pairs reachable at each t = 0..=H when only optimal actions are taken.
    pub fn optimal_reach(&self, m: &DrMdp) -> Vec<BTreeSet<Pair>> {
        let mut out = vec![BTreeSet::from([self.start])];
        for t in 0..self.horizon {
            let mut next = BTreeSet::new();
            for pair in &out[t] {
                for &a in &self.optimal[t][pair] {
                    for (succ, q) in m.successors(*pair, a) {
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

    /// Whether some optimal policy's trajectory follows `thetas[t]` at every
    /// t with positive probability. Only meaningful for deterministic
    /// instances, where each optimal class is a single path.
    pub fn has_optimal_path_with_thetas(&self, m: &DrMdp, thetas: &[ThetaIx]) -> bool {
        if thetas.first() != Some(&self.start.1) {
            return false;
        }
        let mut frontier = BTreeSet::from([self.start]);
        for t in 0..self.horizon {
            let mut next = BTreeSet::new();
            for pair in &frontier {
                for &a in &self.optimal[t][pair] {
                    for (succ, q) in m.successors(*pair, a) {
                        if q.is_positive() && thetas.get(t + 1).map_or(true, |th| *th == succ.1) {
                            next.insert(*succ);
                        }
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            frontier = next;
        }
        true
    }
}
