//! The DR-MDP instance, policies, trajectories and instance validation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

pub type StateIx = usize;
pub type ThetaIx = usize;
pub type ActionIx = usize;
/// A (state, reward parameterization) pair: the node of the product chain.
pub type Pair = (StateIx, ThetaIx);

/// A finite dynamic-reward MDP with exact rational data.
///
/// Transition rows are optional per (s, θ, a): rows are only required for
/// pairs reachable from the initial pair. Reward cells are stored densely
/// over (θ, s, a, s').
#[derive(Clone, Debug, PartialEq)]
pub struct DrMdp {
    states: Vec<String>,
    thetas: Vec<String>,
    actions: Vec<String>,
    noop: ActionIx,
    initial: Pair,
    rows: Vec<Option<Vec<(Pair, Q)>>>,
    rewards: Vec<Option<Q>>,
    description: Option<String>,
    max_horizon_hint: Option<usize>,
}

/// Resource guards shared by all solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_policies: u64,
    pub max_trajectories: usize,
    pub max_history: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_policies: 10_000_000,
            max_trajectories: 1_000_000,
            max_history: 10_000_000,
        }
    }
}

impl DrMdp {
    /// Assembles an instance from index-level tables. `rows` is indexed by
    /// [`DrMdp::row_index`], `rewards` by [`DrMdp::reward_index`].
    #[allow(clippy::too_many_arguments)]
    pub fn from_tables(
        states: Vec<String>,
        thetas: Vec<String>,
        actions: Vec<String>,
        noop: ActionIx,
        initial: Pair,
        rows: Vec<Option<Vec<(Pair, Q)>>>,
        rewards: Vec<Option<Q>>,
    ) -> Result<DrMdp> {
        let (ns, nt, na) = (states.len(), thetas.len(), actions.len());
        if ns == 0 || nt == 0 || na == 0 {
            return Err(Error::spec(
                "instance",
                "states, thetas and actions must be non-empty",
            ));
        }
        for (kind, names) in [("state", &states), ("theta", &thetas), ("action", &actions)] {
            let mut seen = BTreeSet::new();
            for n in names {
                if !seen.insert(n) {
                    return Err(Error::spec(kind, format!("duplicate {kind} `{n}`")));
                }
            }
        }
        if noop >= na || initial.0 >= ns || initial.1 >= nt {
            return Err(Error::spec("instance", "noop or initial pair out of range"));
        }
        if rows.len() != ns * nt * na || rewards.len() != nt * ns * na * ns {
            return Err(Error::spec(
                "instance",
                "table sizes do not match the declared sets",
            ));
        }
        for row in rows.iter().flatten() {
            for &((s, t), _) in row {
                if s >= ns || t >= nt {
                    return Err(Error::spec("transitions", "successor out of range"));
                }
            }
        }
        Ok(DrMdp {
            states,
            thetas,
            actions,
            noop,
            initial,
            rows,
            rewards,
            description: None,
            max_horizon_hint: None,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }
    pub fn thetas(&self) -> &[String] {
        &self.thetas
    }
    pub fn actions(&self) -> &[String] {
        &self.actions
    }
    pub fn n_states(&self) -> usize {
        self.states.len()
    }
    pub fn n_thetas(&self) -> usize {
        self.thetas.len()
    }
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }
    pub fn noop(&self) -> ActionIx {
        self.noop
    }
    pub fn initial(&self) -> Pair {
        self.initial
    }
    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }
    pub fn max_horizon_hint(&self) -> Option<usize> {
        self.max_horizon_hint
    }

    pub fn with_description(mut self, text: impl Into<String>) -> Self {
        self.description = Some(text.into());
        self
    }

    pub fn with_max_horizon_hint(mut self, h: Option<usize>) -> Self {
        self.max_horizon_hint = h;
        self
    }

    /// The same instance started from a different pair.
    pub fn with_initial(&self, initial: Pair) -> DrMdp {
        let mut m = self.clone();
        m.initial = initial;
        m
    }

    pub fn state(&self, name: &str) -> Result<StateIx> {
        lookup(&self.states, "state", name)
    }
    pub fn theta(&self, name: &str) -> Result<ThetaIx> {
        lookup(&self.thetas, "theta", name)
    }
    pub fn action(&self, name: &str) -> Result<ActionIx> {
        lookup(&self.actions, "action", name)
    }

    pub fn row_index(&self, s: StateIx, theta: ThetaIx, a: ActionIx) -> usize {
        (s * self.thetas.len() + theta) * self.actions.len() + a
    }

    pub fn reward_index(&self, theta: ThetaIx, s: StateIx, a: ActionIx, s2: StateIx) -> usize {
        ((theta * self.states.len() + s) * self.actions.len() + a) * self.states.len() + s2
    }

    pub fn row(&self, pair: Pair, a: ActionIx) -> Option<&[(Pair, Q)]> {
        self.rows[self.row_index(pair.0, pair.1, a)].as_deref()
    }

    /// Successor distribution; empty when the row is absent.
    pub fn successors(&self, pair: Pair, a: ActionIx) -> &[(Pair, Q)] {
        self.row(pair, a).unwrap_or(&[])
    }

    pub fn try_reward(&self, theta: ThetaIx, s: StateIx, a: ActionIx, s2: StateIx) -> Option<&Q> {
        self.rewards[self.reward_index(theta, s, a, s2)].as_ref()
    }

    /// Reward cell; panics on a missing cell, which validation rules out for
    /// every transition with positive probability.
    pub fn reward(&self, theta: ThetaIx, s: StateIx, a: ActionIx, s2: StateIx) -> &Q {
        self.try_reward(theta, s, a, s2).unwrap_or_else(|| {
            panic!(
                "missing reward cell R_{}({}, {}, {})",
                self.thetas[theta], self.states[s], self.actions[a], self.states[s2]
            )
        })
    }

    /// Expected one-step reward of `a` at `pair` evaluated by `theta`.
    pub fn expected_reward(&self, theta: ThetaIx, pair: Pair, a: ActionIx) -> Q {
        let mut acc = Q::zero();
        for ((s2, _), p) in self.successors(pair, a) {
            acc += p * self.reward(theta, pair.0, a, *s2);
        }
        acc
    }

    pub fn rows_raw(&self) -> &[Option<Vec<(Pair, Q)>>] {
        &self.rows
    }
    pub fn rewards_raw(&self) -> &[Option<Q>] {
        &self.rewards
    }

    pub fn is_deterministic(&self) -> bool {
        self.rows
            .iter()
            .flatten()
            .all(|row| row.len() == 1 && row[0].1.is_one())
    }

    /// Copy with every reward multiplied by `factor`.
    pub fn scale_rewards(&self, factor: &Q) -> DrMdp {
        let mut m = self.clone();
        for r in m.rewards.iter_mut().flatten() {
            *r = &*r * factor;
        }
        m
    }

    /// Pairs reachable from the initial pair under any action sequence.
    pub fn reachable_pairs(&self) -> Vec<Pair> {
        self.reachable_from(self.initial)
    }

    pub fn reachable_from(&self, start: Pair) -> Vec<Pair> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(pair) = queue.pop_front() {
            for a in 0..self.actions.len() {
                for (next, p) in self.successors(pair, a) {
                    if p.is_positive() && seen.insert(*next) {
                        queue.push_back(*next);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn validate(&self) -> Vec<Violation> {
        self.validate_with(true)
    }

    /// Checks the instance invariants. Reachability of every θ can be waived.
    pub fn validate_with(&self, check_reachability: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        let (ns, nt, na) = (self.n_states(), self.n_thetas(), self.n_actions());
        for s in 0..ns {
            for t in 0..nt {
                for a in 0..na {
                    let Some(row) = self.row((s, t), a) else {
                        continue;
                    };
                    let names = (
                        self.states[s].clone(),
                        self.thetas[t].clone(),
                        self.actions[a].clone(),
                    );
                    if row.iter().any(|(_, p)| p.is_negative()) {
                        out.push(Violation::NegativeProbability {
                            state: names.0.clone(),
                            theta: names.1.clone(),
                            action: names.2.clone(),
                        });
                    }
                    let sum: Q = row.iter().map(|(_, p)| p.clone()).sum();
                    if !sum.is_one() {
                        out.push(Violation::RowSum {
                            state: names.0.clone(),
                            theta: names.1.clone(),
                            action: names.2.clone(),
                            sum: rational::format(&sum),
                        });
                    }
                    for ((s2, _), p) in row {
                        if !p.is_positive() {
                            continue;
                        }
                        for th in 0..nt {
                            if self.try_reward(th, s, a, *s2).is_none() {
                                let v = Violation::MissingReward {
                                    theta: self.thetas[th].clone(),
                                    state: names.0.clone(),
                                    action: names.2.clone(),
                                    next_state: self.states[*s2].clone(),
                                };
                                if !out.contains(&v) {
                                    out.push(v);
                                }
                            }
                        }
                    }
                }
            }
        }
        let reachable = self.reachable_pairs();
        for &(s, t) in &reachable {
            for a in 0..na {
                if self.row((s, t), a).is_none() {
                    out.push(Violation::MissingRow {
                        state: self.states[s].clone(),
                        theta: self.thetas[t].clone(),
                        action: self.actions[a].clone(),
                    });
                }
            }
        }
        if check_reachability {
            let seen: BTreeSet<ThetaIx> = reachable.iter().map(|p| p.1).collect();
            for t in 0..nt {
                if !seen.contains(&t) {
                    out.push(Violation::UnreachableTheta {
                        theta: self.thetas[t].clone(),
                    });
                }
            }
        }
        out
    }

    /// Fails with [`Error::Invalid`] when [`DrMdp::validate`] reports anything.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    pub fn pair_name(&self, pair: Pair) -> String {
        format!("({}, {})", self.states[pair.0], self.thetas[pair.1])
    }
}

fn lookup(names: &[String], kind: &'static str, name: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::Unknown {
            kind,
            name: name.to_string(),
        })
}

/// One violated instance invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    RowSum {
        state: String,
        theta: String,
        action: String,
        sum: String,
    },
    NegativeProbability {
        state: String,
        theta: String,
        action: String,
    },
    MissingRow {
        state: String,
        theta: String,
        action: String,
    },
    MissingReward {
        theta: String,
        state: String,
        action: String,
        next_state: String,
    },
    UnreachableTheta {
        theta: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum {
                state,
                theta,
                action,
                sum,
            } => {
                write!(
                    f,
                    "transition row ({state}, {theta}, {action}) sums to {sum}, not 1"
                )
            }
            Violation::NegativeProbability {
                state,
                theta,
                action,
            } => {
                write!(
                    f,
                    "transition row ({state}, {theta}, {action}) has a negative probability"
                )
            }
            Violation::MissingRow {
                state,
                theta,
                action,
            } => {
                write!(
                    f,
                    "reachable pair ({state}, {theta}) has no transition row for action {action}"
                )
            }
            Violation::MissingReward {
                theta,
                state,
                action,
                next_state,
            } => {
                write!(
                    f,
                    "reward R_{theta}({state}, {action}, {next_state}) is not defined"
                )
            }
            Violation::UnreachableTheta { theta } => {
                write!(f, "theta {theta} is unreachable from the initial pair; every reward parameterization must be realizable")
            }
        }
    }
}

/// Name-based construction used by the catalog and the spec loader.
#[derive(Clone, Debug, Default)]
pub struct Builder {
    states: Vec<String>,
    thetas: Vec<String>,
    actions: Vec<String>,
    noop: Option<String>,
    initial: Option<(String, String)>,
    transitions: Vec<(String, String, String, Vec<(String, String, Q)>)>,
    rewards: Vec<(String, String, String, Option<String>, Q)>,
    description: Option<String>,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn states<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn thetas<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.thetas = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn actions<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.actions = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn noop(mut self, name: impl Into<String>) -> Self {
        self.noop = Some(name.into());
        self
    }

    pub fn initial(mut self, state: impl Into<String>, theta: impl Into<String>) -> Self {
        self.initial = Some((state.into(), theta.into()));
        self
    }

    pub fn description(mut self, text: impl Into<String>) -> Self {
        self.description = Some(text.into());
        self
    }

    pub fn transition<'a>(
        mut self,
        state: &str,
        theta: &str,
        action: &str,
        to: impl IntoIterator<Item = (&'a str, &'a str, Q)>,
    ) -> Self {
        let to = to
            .into_iter()
            .map(|(s, t, p)| (s.to_string(), t.to_string(), p))
            .collect();
        self.transitions
            .push((state.into(), theta.into(), action.into(), to));
        self
    }

    /// Deterministic transition shorthand.
    pub fn go(
        self,
        state: &str,
        theta: &str,
        action: &str,
        to_state: &str,
        to_theta: &str,
    ) -> Self {
        self.transition(
            state,
            theta,
            action,
            [(to_state, to_theta, rational::one())],
        )
    }

    /// Reward for every successor state.
    pub fn reward(mut self, theta: &str, state: &str, action: &str, value: Q) -> Self {
        self.rewards
            .push((theta.into(), state.into(), action.into(), None, value));
        self
    }

    pub fn reward_to(
        mut self,
        theta: &str,
        state: &str,
        action: &str,
        next: &str,
        value: Q,
    ) -> Self {
        self.rewards.push((
            theta.into(),
            state.into(),
            action.into(),
            Some(next.into()),
            value,
        ));
        self
    }

    pub fn build(self) -> Result<DrMdp> {
        let find = |names: &[String], kind: &'static str, name: &str, locus: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::spec(locus.to_string(), format!("unknown {kind} `{name}`")))
        };
        let noop_name = self
            .noop
            .as_deref()
            .ok_or_else(|| Error::spec("noop", "missing"))?;
        let noop = find(&self.actions, "action", noop_name, "noop")?;
        let (s0, t0) = self
            .initial
            .as_ref()
            .ok_or_else(|| Error::spec("initial", "missing"))?;
        let initial = (
            find(&self.states, "state", s0, "initial.state")?,
            find(&self.thetas, "theta", t0, "initial.theta")?,
        );
        let (ns, nt, na) = (self.states.len(), self.thetas.len(), self.actions.len());
        let mut rows: Vec<Option<Vec<(Pair, Q)>>> = vec![None; ns * nt * na];
        for (i, (s, t, a, to)) in self.transitions.iter().enumerate() {
            let locus = format!("transitions[{i}]");
            let s = find(&self.states, "state", s, &locus)?;
            let t = find(&self.thetas, "theta", t, &locus)?;
            let a = find(&self.actions, "action", a, &locus)?;
            let idx = (s * nt + t) * na + a;
            if rows[idx].is_some() {
                return Err(Error::spec(locus, "duplicate transition row"));
            }
            let mut merged: BTreeMap<Pair, Q> = BTreeMap::new();
            for (s2, t2, p) in to {
                let key = (
                    find(&self.states, "state", s2, &locus)?,
                    find(&self.thetas, "theta", t2, &locus)?,
                );
                *merged.entry(key).or_insert_with(Q::zero) += p;
            }
            rows[idx] = Some(merged.into_iter().collect());
        }
        let mut rewards: Vec<Option<Q>> = vec![None; nt * ns * na * ns];
        for (i, (t, s, a, s2, v)) in self.rewards.iter().enumerate() {
            let locus = format!("rewards[{i}]");
            let t = find(&self.thetas, "theta", t, &locus)?;
            let s = find(&self.states, "state", s, &locus)?;
            let a = find(&self.actions, "action", a, &locus)?;
            let targets: Vec<usize> = match s2 {
                Some(n) => vec![find(&self.states, "state", n, &locus)?],
                None => (0..ns).collect(),
            };
            for s2 in targets {
                let idx = ((t * ns + s) * na + a) * ns + s2;
                if rewards[idx].is_some() {
                    return Err(Error::spec(locus, "reward cell defined twice"));
                }
                rewards[idx] = Some(v.clone());
            }
        }
        let m = DrMdp::from_tables(
            self.states,
            self.thetas,
            self.actions,
            noop,
            initial,
            rows,
            rewards,
        )?;
        Ok(match self.description {
            Some(d) => m.with_description(d),
            None => m,
        })
    }
}

/// A deterministic policy. Non-stationary tables are keyed by (t, pair).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    Constant(ActionIx),
    Stationary(BTreeMap<Pair, ActionIx>),
    NonStationary(BTreeMap<(usize, Pair), ActionIx>),
}

impl Policy {
    pub fn noop(m: &DrMdp) -> Policy {
        Policy::Constant(m.noop())
    }

    pub fn action(&self, t: usize, pair: Pair) -> Option<ActionIx> {
        match self {
            Policy::Constant(a) => Some(*a),
            Policy::Stationary(map) => map.get(&pair).copied(),
            Policy::NonStationary(map) => map.get(&(t, pair)).copied(),
        }
    }

    pub fn is_stationary(&self) -> bool {
        !matches!(self, Policy::NonStationary(_))
    }
}

/// Behavior of a policy on the nodes it reaches with positive probability.
/// Two policies with the same on-path table induce the same trajectory
/// distribution, so this is the canonical member of an equivalence class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolicyClass {
    pub table: BTreeMap<(usize, Pair), ActionIx>,
}

impl PolicyClass {
    pub fn to_policy(&self) -> Policy {
        Policy::NonStationary(self.table.clone())
    }

    pub fn action(&self, t: usize, pair: Pair) -> Option<ActionIx> {
        self.table.get(&(t, pair)).copied()
    }

    pub fn is_constant(&self, a: ActionIx) -> bool {
        self.table.values().all(|&x| x == a)
    }

    pub fn describe(&self, m: &DrMdp) -> String {
        self.table
            .iter()
            .map(|((t, p), a)| format!("t={t} {} -> {}", m.pair_name(*p), m.actions()[*a]))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// A length-H trajectory: (s_t, θ_t, a_t) for t < H and the terminal pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trajectory {
    pub steps: Vec<(Pair, ActionIx)>,
    pub terminal: Pair,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn pair(&self, t: usize) -> Pair {
        if t < self.steps.len() {
            self.steps[t].0
        } else {
            self.terminal
        }
    }

    /// (θ₀, …, θ_{H−1}) or, inclusive, (θ₀, …, θ_H).
    pub fn thetas(&self, inclusive: bool) -> Vec<ThetaIx> {
        let mut v: Vec<ThetaIx> = self.steps.iter().map(|(p, _)| p.1).collect();
        if inclusive {
            v.push(self.terminal.1);
        }
        v
    }

    /// (s_t, a_t, s_{t+1}) for each step.
    pub fn transitions(&self) -> impl Iterator<Item = (StateIx, ActionIx, StateIx)> + '_ {
        (0..self.steps.len())
            .map(move |t| (self.steps[t].0 .0, self.steps[t].1, self.pair(t + 1).0))
    }
}

/// Index lookup tables for naming pairs in reports.
pub fn pair_index(pairs: &[Pair]) -> HashMap<Pair, usize> {
    pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect()
}
