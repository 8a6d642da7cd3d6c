//! JSON specification files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Builder, DrMdp};
use crate::rational::{self, Q};

/// A rational written as `"p/q"`, `"p"` or an integer literal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    pub fn of(q: &Q) -> Number {
        Number::Text(rational::format(q))
    }

    fn value(&self, locus: &str) -> Result<Q> {
        match self {
            Number::Int(n) => Ok(rational::int(*n)),
            Number::Text(t) => rational::parse(t)
                .ok_or_else(|| Error::spec(locus, format!("`{t}` is not a rational"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDoc {
    pub state: String,
    pub theta: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeDoc {
    pub state: String,
    pub theta: String,
    pub prob: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: PairDoc,
    pub action: String,
    pub to: Vec<OutcomeDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardDoc {
    pub theta: String,
    pub state: String,
    pub action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_state: Option<String>,
    pub value: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub states: Vec<String>,
    pub thetas: Vec<String>,
    pub actions: Vec<String>,
    pub noop: String,
    pub initial: PairDoc,
    pub transitions: Vec<TransitionDoc>,
    pub rewards: Vec<RewardDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_horizon_hint: Option<usize>,
}

impl SpecDoc {
    pub fn to_instance(&self) -> Result<DrMdp> {
        let mut b = Builder::new()
            .states(self.states.clone())
            .thetas(self.thetas.clone())
            .actions(self.actions.clone())
            .noop(self.noop.clone())
            .initial(self.initial.state.clone(), self.initial.theta.clone());
        if let Some(d) = &self.description {
            b = b.description(d.clone());
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let mut to = Vec::with_capacity(t.to.len());
            for (j, o) in t.to.iter().enumerate() {
                to.push((
                    o.state.as_str(),
                    o.theta.as_str(),
                    o.prob.value(&format!("transitions[{i}].to[{j}].prob"))?,
                ));
            }
            b = b.transition(&t.from.state, &t.from.theta, &t.action, to);
        }
        for (i, r) in self.rewards.iter().enumerate() {
            let v = r.value.value(&format!("rewards[{i}].value"))?;
            b = match &r.next_state {
                Some(n) => b.reward_to(&r.theta, &r.state, &r.action, n, v),
                None => b.reward(&r.theta, &r.state, &r.action, v),
            };
        }
        if let Some(0) = self.max_horizon_hint {
            return Err(Error::spec("max_horizon_hint", "must be positive"));
        }
        Ok(b.build()?.with_max_horizon_hint(self.max_horizon_hint))
    }

    /// Rewards that do not depend on the successor state are written once
    /// without `next_state`.
    pub fn from_instance(m: &DrMdp) -> SpecDoc {
        let pair = |p: (usize, usize)| PairDoc {
            state: m.states()[p.0].clone(),
            theta: m.thetas()[p.1].clone(),
        };
        let mut transitions = Vec::new();
        for s in 0..m.n_states() {
            for t in 0..m.n_thetas() {
                for a in 0..m.n_actions() {
                    if let Some(row) = m.row((s, t), a) {
                        transitions.push(TransitionDoc {
                            from: pair((s, t)),
                            action: m.actions()[a].clone(),
                            to: row
                                .iter()
                                .map(|(p, q)| OutcomeDoc {
                                    state: m.states()[p.0].clone(),
                                    theta: m.thetas()[p.1].clone(),
                                    prob: Number::of(q),
                                })
                                .collect(),
                        });
                    }
                }
            }
        }
        let mut rewards = Vec::new();
        for t in 0..m.n_thetas() {
            for s in 0..m.n_states() {
                for a in 0..m.n_actions() {
                    let cells: Vec<Option<&Q>> = (0..m.n_states())
                        .map(|s2| m.try_reward(t, s, a, s2))
                        .collect();
                    let doc = |next: Option<usize>, v: &Q| RewardDoc {
                        theta: m.thetas()[t].clone(),
                        state: m.states()[s].clone(),
                        action: m.actions()[a].clone(),
                        next_state: next.map(|n| m.states()[n].clone()),
                        value: Number::of(v),
                    };
                    let uniform = cells.iter().all(|c| c.is_some() && *c == cells[0]);
                    if uniform {
                        rewards.push(doc(None, cells[0].expect("uniform")));
                    } else {
                        for (s2, c) in cells.iter().enumerate() {
                            if let Some(v) = c {
                                rewards.push(doc(Some(s2), v));
                            }
                        }
                    }
                }
            }
        }
        SpecDoc {
            description: m.description().map(str::to_string),
            states: m.states().to_vec(),
            thetas: m.thetas().to_vec(),
            actions: m.actions().to_vec(),
            noop: m.actions()[m.noop()].clone(),
            initial: pair(m.initial()),
            transitions,
            rewards,
            max_horizon_hint: m.max_horizon_hint(),
        }
    }
}

pub fn load_spec(text: &str) -> Result<DrMdp> {
    if text.trim().is_empty() {
        return Err(Error::spec("line 1, column 1", "empty document"));
    }
    let doc: SpecDoc = serde_json::from_str(text).map_err(|e| {
        Error::spec(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    doc.to_instance()
}

pub fn save_spec(m: &DrMdp) -> String {
    let mut s =
        serde_json::to_string_pretty(&SpecDoc::from_instance(m)).expect("spec documents serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::catalog;

    #[test]
    fn builtins_round_trip() {
        for name in catalog::NAMES {
            let m = catalog::build(name).unwrap();
            let text = save_spec(&m);
            let back = load_spec(&text).unwrap();
            assert_eq!(back, m, "{name}");
            assert_eq!(save_spec(&back), text);
        }
    }

    #[test]
    fn clickbait_noop_is_news() {
        let m = load_spec(&save_spec(&catalog::clickbait())).unwrap();
        assert_eq!(m.actions()[m.noop()], "news");
    }

    #[test]
    fn errors_carry_a_locus() {
        assert!(matches!(load_spec(""), Err(Error::Spec { .. })));
        assert!(matches!(load_spec("  \n"), Err(Error::Spec { .. })));
        match load_spec("{\"states\": [}") {
            Err(Error::Spec { locus, .. }) => assert!(locus.starts_with("line 1")),
            other => panic!("{other:?}"),
        }
        let mut doc = SpecDoc::from_instance(&catalog::conspiracy());
        doc.rewards[0].value = Number::Text("x/2".into());
        match doc.to_instance() {
            Err(Error::Spec { locus, .. }) => assert_eq!(locus, "rewards[0].value"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integer_literals_are_accepted() {
        let text = r#"{"states":["s"],"thetas":["t"],"actions":["n"],"noop":"n",
            "initial":{"state":"s","theta":"t"},
            "transitions":[{"from":{"state":"s","theta":"t"},"action":"n","to":[{"state":"s","theta":"t","prob":1}]}],
            "rewards":[{"theta":"t","state":"s","action":"n","value":-3}]}"#;
        let m = load_spec(text).unwrap();
        assert!(m.validate().is_empty());
        assert_eq!(m.reward(0, 0, 0, 0), &rational::int(-3));
    }
}
