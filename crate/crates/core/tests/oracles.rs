//! Hand-derived values for the built-in examples.

use drmdp::distribution::trajectory_distribution;
use drmdp::examples::catalog;
use drmdp::horizon::{average_reward, classify_regime, HorizonOptions, InfluenceType, Regime};
use drmdp::influence::{influence_incentive, InfluenceOptions};
use drmdp::model::Limits;
use drmdp::objectives::expected_utility;
use drmdp::pareto::pareto_ud_set;
use drmdp::rational::{int, ratio};
use drmdp::solvers::{
    constrained_rt_optimal, enumerate_optimal, myopic_policies, reduce_and_solve,
};
use drmdp::{Objective, Policy, SolveOptions};

fn eu(m: &drmdp::DrMdp, p: &Policy, h: usize, obj: Objective) -> drmdp::Q {
    expected_utility(m, p, h, obj, &Limits::default()).unwrap()
}

#[test]
fn conspiracy_always_influence_real_time_value() {
    let m = catalog::conspiracy();
    let infl = Policy::Constant(m.action("influence").unwrap());
    assert_eq!(eu(&m, &infl, 3, Objective::RealTime), int(100));
}

#[test]
fn conspiracy_real_time_optimum_always_influences() {
    let m = catalog::conspiracy();
    let s = enumerate_optimal(&m, 3, Objective::RealTime, &SolveOptions::default()).unwrap();
    assert_eq!(s.members.len(), 1);
    assert!(s.members[0].is_constant(m.action("influence").unwrap()));
    assert!(
        influence_incentive(&m, 3, Objective::RealTime, &InfluenceOptions::default())
            .unwrap()
            .incentive
    );
}

#[test]
fn conspiracy_constrained_and_pareto_choose_inaction() {
    let m = catalog::conspiracy();
    let c = constrained_rt_optimal(&m, 3, &SolveOptions::default()).unwrap();
    assert!(c.members.iter().all(|k| k.is_constant(m.noop())));
    let p = pareto_ud_set(&m, 3, &SolveOptions::default()).unwrap();
    assert!(p
        .iter()
        .all(|r| r.class.as_ref().unwrap().is_constant(m.noop())));
}

#[test]
fn myopic_policies_split_by_theta() {
    let m = catalog::clickbait();
    let my = myopic_policies(&m);
    let normal = (m.state("s0").unwrap(), m.theta("normal").unwrap());
    let dis = (m.state("s0").unwrap(), m.theta("disillusioned").unwrap());
    assert_eq!(my.allowed[&normal], vec![m.action("clickbait").unwrap()]);
    assert_eq!(my.allowed[&dis], vec![m.action("news").unwrap()]);
    assert_eq!(m.noop(), m.action("news").unwrap());
}

#[test]
fn disagreement_values() {
    let m = catalog::disagreement();
    let noop = Policy::noop(&m);
    assert_eq!(eu(&m, &noop, 2, Objective::RealTime), int(10));
    let a = Policy::Constant(m.action("a_delta").unwrap());
    assert_eq!(average_reward(&m, &a, m.initial()).unwrap(), int(20));
    let s = enumerate_optimal(&m, 3, Objective::RealTime, &SolveOptions::default()).unwrap();
    assert!(s.members.iter().all(|k| k
        .table
        .iter()
        .filter(|((t, _), _)| *t < 2)
        .all(|(_, x)| *x == m.action("a_delta").unwrap())));
}

#[test]
fn infinite_flipping_trajectory_and_average() {
    let m = catalog::infinite_flipping(ratio(1, 2));
    let a2 = Policy::Constant(m.action("a2").unwrap());
    let d = trajectory_distribution(&m, &a2, 2, &Limits::default()).unwrap();
    assert_eq!(d.support.len(), 1);
    let (traj, p) = &d.support[0];
    assert_eq!(*p, int(1));
    let td = m.theta("theta_delta").unwrap();
    let s2 = m.state("s2").unwrap();
    assert_eq!(traj.steps[1].0, (s2, td));
    assert_eq!(traj.terminal, (s2, td));
    assert_eq!(
        average_reward(&m, &Policy::noop(&m), m.initial()).unwrap(),
        int(1)
    );
}

#[test]
fn flexible_setup_eight_regimes_and_switch() {
    let m = catalog::flexible(8).unwrap();
    let itype = InfluenceType {
        target: m.theta("theta_delta").unwrap(),
    };
    let o = HorizonOptions::default();
    let regime = |h| classify_regime(&m, itype, Objective::RealTime, h, &o).unwrap();
    assert_eq!(regime(1), Regime::Incapable);
    assert_eq!(regime(2), Regime::CapableSuboptimal);
    assert_eq!(regime(6), Regime::Optimal);
    let a_delta = m.action("a_delta").unwrap();
    for h in 4..=7 {
        let s = reduce_and_solve(&m, h, Objective::RealTime, &SolveOptions::default()).unwrap();
        assert_eq!(s.first_actions() == vec![a_delta], h >= 6, "H={h}");
    }
}

#[test]
fn clickbait_influence_is_optimal_at_one_step() {
    let m = catalog::clickbait();
    let itype = InfluenceType {
        target: m.theta("disillusioned").unwrap(),
    };
    let r = classify_regime(
        &m,
        itype,
        Objective::RealTime,
        1,
        &HorizonOptions::default(),
    )
    .unwrap();
    assert_eq!(r, Regime::Optimal);
}

#[test]
fn career_choice_pareto_pair() {
    let m = catalog::career_choice();
    let p = pareto_ud_set(&m, 1, &SolveOptions::default()).unwrap();
    assert_eq!(p.len(), 2);
    assert!(p.iter().all(|r| r.ud));
}
