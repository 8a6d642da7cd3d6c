//! Recovering the reward family and the dynamics from population data.
//!
//! Rewards are the exact mean of the values stated by humans sharing a θ;
//! the kernel is the exact empirical frequency of observed successors.
//! Gaps are reported, never imputed.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{DrMdp, Pair};
use crate::rational::{self, Q};
use crate::spec::{Number, PairDoc};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Feedback {
    pub state: String,
    pub action: String,
    pub next_state: String,
    pub value: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Human {
    pub theta: String,
    pub feedback: Vec<Feedback>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub state: String,
    pub theta: String,
    pub action: String,
    pub next_state: String,
    pub next_theta: String,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationDataset {
    pub humans: Vec<Human>,
    pub trajectories: Vec<StepRecord>,
}

/// The declared sets the data is interpreted against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Declared {
    pub states: Vec<String>,
    pub thetas: Vec<String>,
    pub actions: Vec<String>,
    pub noop: String,
    pub initial: PairDoc,
}

impl Declared {
    pub fn of(m: &DrMdp) -> Declared {
        Declared {
            states: m.states().to_vec(),
            thetas: m.thetas().to_vec(),
            actions: m.actions().to_vec(),
            noop: m.actions()[m.noop()].clone(),
            initial: PairDoc {
                state: m.states()[m.initial().0].clone(),
                theta: m.thetas()[m.initial().1].clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct Coverage {
    /// Declared θ with no human.
    pub thetas_without_humans: Vec<String>,
    /// (s, θ, a) with no observed step, at pairs that occur in the data or are initial.
    pub unobserved_transitions: Vec<(String, String, String)>,
    /// (θ, s, a, s') needed by an observed step but never rated by a human with that θ.
    pub missing_rewards: Vec<(String, String, String, String)>,
    /// Reward cells on which humans sharing a θ stated different values.
    pub disagreements: Vec<(String, String, String, String)>,
    /// Records naming undeclared labels or carrying unparsable values.
    pub rejected_records: Vec<String>,
}

impl Coverage {
    pub fn is_complete(&self) -> bool {
        self.thetas_without_humans.is_empty()
            && self.unobserved_transitions.is_empty()
            && self.missing_rewards.is_empty()
            && self.rejected_records.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Learned {
    /// May fail validation when coverage is incomplete.
    pub instance: DrMdp,
    pub coverage: Coverage,
}

fn index(names: &[String]) -> BTreeMap<&str, usize> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect()
}

pub fn learn_from_population(data: &PopulationDataset, declared: &Declared) -> Result<Learned> {
    let (si, ti, ai) = (
        index(&declared.states),
        index(&declared.thetas),
        index(&declared.actions),
    );
    let (ns, nt, na) = (
        declared.states.len(),
        declared.thetas.len(),
        declared.actions.len(),
    );
    let mut cov = Coverage::default();

    let mut stated: BTreeMap<(usize, usize, usize, usize), Vec<Q>> = BTreeMap::new();
    let mut has_human = vec![false; nt];
    for (h, human) in data.humans.iter().enumerate() {
        let Some(&t) = ti.get(human.theta.as_str()) else {
            cov.rejected_records
                .push(format!("humans[{h}]: unknown theta `{}`", human.theta));
            continue;
        };
        has_human[t] = true;
        for (k, f) in human.feedback.iter().enumerate() {
            let parsed = match &f.value {
                Number::Int(n) => Some(rational::int(*n)),
                Number::Text(s) => rational::parse(s),
            };
            match (
                si.get(f.state.as_str()),
                ai.get(f.action.as_str()),
                si.get(f.next_state.as_str()),
                parsed,
            ) {
                (Some(&s), Some(&a), Some(&s2), Some(v)) => {
                    stated.entry((t, s, a, s2)).or_default().push(v)
                }
                _ => cov
                    .rejected_records
                    .push(format!("humans[{h}].feedback[{k}]")),
            }
        }
    }
    cov.thetas_without_humans = (0..nt)
        .filter(|t| !has_human[*t])
        .map(|t| declared.thetas[t].clone())
        .collect();

    let mut counts: BTreeMap<(usize, usize, usize), BTreeMap<Pair, u64>> = BTreeMap::new();
    let mut seen_pairs: BTreeSet<Pair> = BTreeSet::new();
    for (k, r) in data.trajectories.iter().enumerate() {
        let ids = (
            si.get(r.state.as_str()),
            ti.get(r.theta.as_str()),
            ai.get(r.action.as_str()),
            si.get(r.next_state.as_str()),
            ti.get(r.next_theta.as_str()),
        );
        let (Some(&s), Some(&t), Some(&a), Some(&s2), Some(&t2)) = ids else {
            cov.rejected_records.push(format!("trajectories[{k}]"));
            continue;
        };
        *counts
            .entry((s, t, a))
            .or_default()
            .entry((s2, t2))
            .or_insert(0) += 1;
        seen_pairs.insert((s, t));
        seen_pairs.insert((s2, t2));
    }

    let initial = match (
        si.get(declared.initial.state.as_str()),
        ti.get(declared.initial.theta.as_str()),
    ) {
        (Some(&s), Some(&t)) => (s, t),
        _ => {
            return Err(crate::error::Error::spec(
                "initial",
                "undeclared initial pair",
            ))
        }
    };
    seen_pairs.insert(initial);
    let noop = *ai
        .get(declared.noop.as_str())
        .ok_or_else(|| crate::error::Error::spec("noop", "undeclared inaction action"))?;

    let mut rows: Vec<Option<Vec<(Pair, Q)>>> = vec![None; ns * nt * na];
    let mut needed: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    for (&(s, t, a), succ) in &counts {
        let total: u64 = succ.values().sum();
        rows[(s * nt + t) * na + a] = Some(
            succ.iter()
                .map(|(p, n)| (*p, rational::ratio(*n as i64, total as i64)))
                .collect(),
        );
        for (s2, _) in succ.keys() {
            needed.insert((s, a, *s2));
        }
    }
    for &(s, t) in &seen_pairs {
        for a in 0..na {
            if !counts.contains_key(&(s, t, a)) {
                cov.unobserved_transitions.push((
                    declared.states[s].clone(),
                    declared.thetas[t].clone(),
                    declared.actions[a].clone(),
                ));
            }
        }
    }

    let mut rewards: Vec<Option<Q>> = vec![None; nt * ns * na * ns];
    let name4 = |t: usize, s: usize, a: usize, s2: usize| {
        (
            declared.thetas[t].clone(),
            declared.states[s].clone(),
            declared.actions[a].clone(),
            declared.states[s2].clone(),
        )
    };
    for (&(t, s, a, s2), vals) in &stated {
        let sum: Q = vals.iter().cloned().sum();
        rewards[((t * ns + s) * na + a) * ns + s2] = Some(sum / rational::int(vals.len() as i64));
        if vals.iter().any(|v| v != &vals[0]) {
            cov.disagreements.push(name4(t, s, a, s2));
        }
    }
    for &(s, a, s2) in &needed {
        for t in 0..nt {
            if !stated.contains_key(&(t, s, a, s2)) {
                cov.missing_rewards.push(name4(t, s, a, s2));
            }
        }
    }

    let instance = DrMdp::from_tables(
        declared.states.clone(),
        declared.thetas.clone(),
        declared.actions.clone(),
        noop,
        initial,
        rows,
        rewards,
    )?
    .with_description("learned from population data");
    Ok(Learned {
        instance,
        coverage: cov,
    })
}

fn lcm_of_denominators(row: &[(Pair, Q)]) -> u64 {
    let mut l = num_bigint::BigInt::one();
    for (_, p) in row {
        l = l.lcm(p.denom());
    }
    u64::try_from(l).expect("denominators fit in u64")
}

/// Noiseless data with full coverage: one human per θ stating every reward
/// cell, and each transition row replayed with exact multiplicities.
pub fn generate_dataset(m: &DrMdp) -> PopulationDataset {
    let mut humans = Vec::new();
    for t in 0..m.n_thetas() {
        let mut feedback = Vec::new();
        for s in 0..m.n_states() {
            for a in 0..m.n_actions() {
                for s2 in 0..m.n_states() {
                    if let Some(v) = m.try_reward(t, s, a, s2) {
                        feedback.push(Feedback {
                            state: m.states()[s].clone(),
                            action: m.actions()[a].clone(),
                            next_state: m.states()[s2].clone(),
                            value: Number::of(v),
                        });
                    }
                }
            }
        }
        humans.push(Human {
            theta: m.thetas()[t].clone(),
            feedback,
        });
    }
    let mut trajectories = Vec::new();
    for s in 0..m.n_states() {
        for t in 0..m.n_thetas() {
            for a in 0..m.n_actions() {
                let Some(row) = m.row((s, t), a) else {
                    continue;
                };
                let l = lcm_of_denominators(row);
                for ((s2, t2), p) in row {
                    if p.is_zero() {
                        continue;
                    }
                    let n = (p * Q::from_integer(l.into())).to_integer();
                    let n = u64::try_from(n).expect("count fits in u64");
                    for _ in 0..n {
                        trajectories.push(StepRecord {
                            state: m.states()[s].clone(),
                            theta: m.thetas()[t].clone(),
                            action: m.actions()[a].clone(),
                            next_state: m.states()[*s2].clone(),
                            next_theta: m.thetas()[*t2].clone(),
                        });
                    }
                }
            }
        }
    }
    PopulationDataset {
        humans,
        trajectories,
    }
}
