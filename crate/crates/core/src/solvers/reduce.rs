//! Reduction to an MDP over histories, solved by backward induction.
//!
//! Each augmented state is a full history prefix; reward is zero except at
//! terminal histories, which carry the trajectory's utility. Optimal Markov
//! classes are then read off the history tree: a class is optimal iff it
//! picks an optimal history action at every history it reaches.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::distribution::noop_theta_marginals;
use crate::error::{Error, Result};
use crate::model::{ActionIx, DrMdp, Pair, PolicyClass, Trajectory};
use crate::objectives::{evaluate_natural_shifts, evaluate_trajectory, Objective};
use crate::rational::Q;

use super::{OptimalSet, SolveOptions};

struct Node {
    pair: Pair,
    parent: Option<(usize, ActionIx)>,
    /// Per action: (child node, probability).
    children: Vec<Vec<(usize, Q)>>,
    value: Q,
    optimal: Vec<ActionIx>,
}

pub struct HistoryTree {
    nodes: Vec<Node>,
    /// Node indices per depth.
    depth: Vec<Vec<usize>>,
}

impl HistoryTree {
    pub fn build(m: &DrMdp, start: Pair, horizon: usize, max_nodes: usize) -> Result<HistoryTree> {
        let mut nodes = vec![Node {
            pair: start,
            parent: None,
            children: Vec::new(),
            value: Q::zero(),
            optimal: Vec::new(),
        }];
        let mut depth = vec![vec![0]];
        for t in 0..horizon {
            let mut next = Vec::new();
            for &i in &depth[t] {
                let pair = nodes[i].pair;
                let mut per_action = Vec::with_capacity(m.n_actions());
                for a in 0..m.n_actions() {
                    let row = m.row(pair, a).ok_or_else(|| {
                        Error::spec(
                            "transitions",
                            format!("no row for {} under {}", m.pair_name(pair), m.actions()[a]),
                        )
                    })?;
                    let mut kids = Vec::new();
                    for (succ, q) in row {
                        if !q.is_positive() {
                            continue;
                        }
                        if nodes.len() >= max_nodes {
                            return Err(Error::HistoryCap { cap: max_nodes });
                        }
                        nodes.push(Node {
                            pair: *succ,
                            parent: Some((i, a)),
                            children: Vec::new(),
                            value: Q::zero(),
                            optimal: Vec::new(),
                        });
                        kids.push((nodes.len() - 1, q.clone()));
                        next.push(nodes.len() - 1);
                    }
                    per_action.push(kids);
                }
                nodes[i].children = per_action;
            }
            depth.push(next);
        }
        Ok(HistoryTree { nodes, depth })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn trajectory(&self, leaf: usize) -> Trajectory {
        let mut steps = Vec::new();
        let mut cur = leaf;
        while let Some((parent, a)) = self.nodes[cur].parent {
            steps.push((self.nodes[parent].pair, a));
            cur = parent;
        }
        steps.reverse();
        Trajectory {
            steps,
            terminal: self.nodes[leaf].pair,
        }
    }

    /// Scores leaves with `utility` and backs values up to the root.
    pub fn solve(&mut self, utility: impl Fn(&Trajectory) -> Result<Q>) -> Result<()> {
        let h = self.depth.len() - 1;
        for idx in 0..self.depth[h].len() {
            let leaf = self.depth[h][idx];
            self.nodes[leaf].value = utility(&self.trajectory(leaf))?;
        }
        for t in (0..h).rev() {
            for idx in 0..self.depth[t].len() {
                let i = self.depth[t][idx];
                let mut best: Option<Q> = None;
                let mut arg = Vec::new();
                for (a, kids) in self.nodes[i].children.iter().enumerate() {
                    let mut q = Q::zero();
                    for (k, p) in kids {
                        q += p * &self.nodes[*k].value;
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
                self.nodes[i].value = best.expect("at least one action");
                self.nodes[i].optimal = arg;
            }
        }
        Ok(())
    }

    pub fn root_value(&self) -> &Q {
        &self.nodes[0].value
    }

    pub fn root_actions(&self) -> &[ActionIx] {
        &self.nodes[0].optimal
    }

    /// Markov classes that take an optimal action at every history they reach.
    pub fn markov_classes(&self) -> Vec<PolicyClass> {
        let mut out = Vec::new();
        let mut table = Vec::new();
        self.extract(0, &[0], &mut table, &mut out);
        out
    }

    fn extract(
        &self,
        t: usize,
        frontier: &[usize],
        table: &mut Vec<((usize, Pair), ActionIx)>,
        out: &mut Vec<PolicyClass>,
    ) {
        if t + 1 == self.depth.len() {
            out.push(PolicyClass {
                table: table.iter().cloned().collect(),
            });
            return;
        }
        let mut groups: BTreeMap<Pair, Vec<usize>> = BTreeMap::new();
        for &i in frontier {
            groups.entry(self.nodes[i].pair).or_default().push(i);
        }
        let mut allowed: Vec<(Pair, Vec<ActionIx>)> = Vec::new();
        for (pair, members) in &groups {
            let mut acts = self.nodes[members[0]].optimal.clone();
            for &i in &members[1..] {
                acts.retain(|a| self.nodes[i].optimal.contains(a));
            }
            if acts.is_empty() {
                return;
            }
            allowed.push((*pair, acts));
        }
        let mut choice = vec![0usize; allowed.len()];
        loop {
            let mark = table.len();
            let mut next = Vec::new();
            for (g, (pair, acts)) in allowed.iter().enumerate() {
                let a = acts[choice[g]];
                table.push(((t, *pair), a));
                for &i in &groups[pair] {
                    next.extend(self.nodes[i].children[a].iter().map(|(k, _)| *k));
                }
            }
            self.extract(t + 1, &next, table, out);
            table.truncate(mark);
            let mut g = allowed.len();
            loop {
                if g == 0 {
                    return;
                }
                g -= 1;
                choice[g] += 1;
                if choice[g] < allowed[g].1.len() {
                    break;
                }
                choice[g] = 0;
            }
        }
    }
}

fn solved_tree(
    m: &DrMdp,
    horizon: usize,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<HistoryTree> {
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    if !objective.is_trajectory_functional() {
        return Err(Error::Unsupported(format!(
            "{objective} is not a trajectory functional"
        )));
    }
    let start = opts.start(m);
    let mut tree = HistoryTree::build(m, start, horizon, opts.limits.max_history)?;
    let marg = noop_theta_marginals(m, start, horizon);
    tree.solve(|traj| match objective {
        Objective::NaturalShifts => evaluate_natural_shifts(m, traj, &marg),
        _ => evaluate_trajectory(m, objective, traj),
    })?;
    Ok(tree)
}

/// Best value over history-dependent policies. It exceeds the Markov optimum
/// only for non-additive objectives on stochastic instances.
pub fn history_optimum(
    m: &DrMdp,
    horizon: usize,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<Q> {
    Ok(solved_tree(m, horizon, objective, opts)?
        .root_value()
        .clone())
}

/// Solves a trajectory-functional objective on the history-augmented MDP.
/// Fails with [`Error::NotMarkovAttainable`] when no Markov class reaches the
/// history-dependent optimum.
pub fn reduce_and_solve(
    m: &DrMdp,
    horizon: usize,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<OptimalSet> {
    let tree = solved_tree(m, horizon, objective, opts)?;
    let mut members = tree.markov_classes();
    if members.is_empty() {
        return Err(Error::NotMarkovAttainable);
    }
    members.sort();
    Ok(OptimalSet {
        objective,
        horizon,
        start: opts.start(m),
        members,
        value: Some(tree.root_value().clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::catalog;
    use crate::solvers::enumerate_optimal;

    #[test]
    fn agrees_with_enumeration_on_small_examples() {
        let opts = SolveOptions::default();
        for m in [
            catalog::conspiracy(),
            catalog::writers_curse(),
            catalog::clickbait(),
            catalog::career_choice(),
        ] {
            for obj in Objective::all(&m)
                .into_iter()
                .filter(|o| o.is_trajectory_functional())
            {
                for h in 1..=3 {
                    let e = enumerate_optimal(&m, h, obj, &opts).unwrap();
                    let r = reduce_and_solve(&m, h, obj, &opts).unwrap();
                    assert_eq!(e, r, "{} h={h}", obj.key(&m));
                }
            }
        }
    }

    #[test]
    fn history_cap_is_enforced() {
        let m = catalog::dehydration();
        let opts = SolveOptions {
            limits: crate::model::Limits {
                max_history: 20,
                ..Default::default()
            },
            ..SolveOptions::default()
        };
        assert!(matches!(
            reduce_and_solve(&m, 3, Objective::RealTime, &opts),
            Err(Error::HistoryCap { .. })
        ));
    }
}
