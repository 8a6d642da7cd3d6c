//! Unambiguous desirability and Pareto efficiency over reward functions.

use crate::error::Result;
use crate::model::{DrMdp, Policy, PolicyClass};
use crate::objectives::{per_theta_expected_utility, Objective};
use crate::rational::Q;
use crate::solvers::{for_each_class, OptimalSet, SolveOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct UdReport {
    pub class: Option<PolicyClass>,
    /// (EU_θ(π), EU_θ(π_noop)) per θ.
    pub per_theta: Vec<(Q, Q)>,
    pub ud: bool,
    /// Set only for members of a ParetoUD computation.
    pub pareto_efficient: Option<bool>,
}

impl UdReport {
    pub fn eu(&self) -> Vec<Q> {
        self.per_theta.iter().map(|(a, _)| a.clone()).collect()
    }
}

/// `a` weakly dominates `b` in every coordinate and strictly in one.
pub fn dominates(a: &[Q], b: &[Q]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y)
}

pub fn is_ud(m: &DrMdp, policy: &Policy, horizon: usize, opts: &SolveOptions) -> Result<UdReport> {
    let inst = m.with_initial(opts.start(m));
    let noop = Policy::noop(m);
    let mut per_theta = Vec::with_capacity(m.n_thetas());
    for th in 0..m.n_thetas() {
        per_theta.push((
            per_theta_expected_utility(&inst, policy, horizon, th, &opts.limits)?,
            per_theta_expected_utility(&inst, &noop, horizon, th, &opts.limits)?,
        ));
    }
    let ud = per_theta.iter().all(|(a, b)| a >= b);
    Ok(UdReport {
        class: None,
        per_theta,
        ud,
        pareto_efficient: None,
    })
}

/// UD classes that no other UD class dominates, with their EU tables.
pub fn pareto_ud_set(m: &DrMdp, horizon: usize, opts: &SolveOptions) -> Result<Vec<UdReport>> {
    let start = opts.start(m);
    let mut all: Vec<(PolicyClass, Vec<Q>)> = Vec::new();
    let mut noop_eu: Option<Vec<Q>> = None;
    for_each_class(m, start, horizon, &opts.limits, |c| {
        if c.class.is_constant(m.noop()) {
            noop_eu = Some(c.per_theta.clone());
        }
        all.push((c.class, c.per_theta));
        Ok(())
    })?;
    let base = noop_eu.expect("the inaction class is always enumerated");
    let ud: Vec<(PolicyClass, Vec<Q>)> = all
        .into_iter()
        .filter(|(_, eu)| eu.iter().zip(&base).all(|(x, y)| x >= y))
        .collect();
    let mut out: Vec<UdReport> = ud
        .iter()
        .filter(|(_, eu)| !ud.iter().any(|(_, other)| dominates(other, eu)))
        .map(|(class, eu)| UdReport {
            class: Some(class.clone()),
            per_theta: eu.iter().cloned().zip(base.iter().cloned()).collect(),
            ud: true,
            pareto_efficient: Some(true),
        })
        .collect();
    out.sort_by(|a, b| a.class.cmp(&b.class));
    Ok(out)
}

pub fn pareto_ud_optimal(m: &DrMdp, horizon: usize, opts: &SolveOptions) -> Result<OptimalSet> {
    let members = pareto_ud_set(m, horizon, opts)?
        .into_iter()
        .map(|r| r.class.expect("class"))
        .collect();
    Ok(OptimalSet {
        objective: Objective::ParetoUD,
        horizon,
        start: opts.start(m),
        members,
        value: None,
    })
}
