//! Machine-checkable facts each built-in must satisfy.

use std::ops::RangeInclusive;

use crate::error::Result;
use crate::horizon::{
    classify_regime, optimality_progression, HorizonOptions, InfluenceType, Regime,
};
use crate::influence::{influence_incentive, InfluenceOptions};
use crate::model::DrMdp;
use crate::objectives::{expected_utility, Interpretation, Objective};
use crate::pareto::{is_ud, pareto_ud_set};
use crate::rational::{int, Q};
use crate::solvers::{class_of_fn, episode_optimal, SolveOptions};

use super::catalog;
use super::tables::{
    act, by_step, by_theta, check_episode_case, check_replanning_case, episode_table,
    replanning_table, Case, Pattern,
};

#[derive(Clone, Debug, PartialEq)]
pub enum Assertion {
    /// The pattern is optimal (or, with `exactly`, the unique optimum) at each horizon.
    Optimal {
        case: Case,
        horizons: RangeInclusive<usize>,
        interpretation: Interpretation,
        exactly: bool,
    },
    /// The pattern is not optimal at any of the horizons.
    NotOptimal {
        case: Case,
        horizons: RangeInclusive<usize>,
    },
    Reward {
        theta: String,
        state: String,
        action: String,
        value: Q,
    },
    /// Expected utility of a pattern under an objective.
    Value {
        objective: String,
        pattern: Pattern,
        horizon: usize,
        value: Q,
    },
    /// Optimal value of an objective.
    OptimalValue {
        objective: String,
        horizon: usize,
        value: Q,
    },
    Progression {
        target: String,
        objective: String,
        interpretation: Interpretation,
        h_max: usize,
        sequence: Vec<u8>,
        boundaries: Option<Vec<usize>>,
    },
    /// Regime at H = 1, 2, … in order.
    Regimes {
        target: String,
        objective: String,
        regimes: Vec<u8>,
    },
    ParetoSet {
        horizon: usize,
        patterns: Vec<Pattern>,
    },
    Ud {
        pattern: Pattern,
        horizon: usize,
        expected: bool,
    },
    Incentive {
        objective: String,
        horizons: RangeInclusive<usize>,
        expected: bool,
    },
    /// Same transition and reward tables as another built-in.
    SameTablesAs(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub assertion: Assertion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintResult {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

fn c(label: &str, assertion: Assertion) -> Constraint {
    Constraint {
        label: label.to_string(),
        assertion,
    }
}

fn optimal(objective: &str, p: Pattern, horizons: RangeInclusive<usize>) -> Assertion {
    Assertion::Optimal {
        case: Case::new(objective, p),
        horizons,
        interpretation: Interpretation::EpisodeLength,
        exactly: false,
    }
}

fn only_optimal(objective: &str, p: Pattern, horizons: RangeInclusive<usize>) -> Assertion {
    Assertion::Optimal {
        case: Case::new(objective, p),
        horizons,
        interpretation: Interpretation::EpisodeLength,
        exactly: true,
    }
}

fn table_constraints(name: &str) -> Vec<Constraint> {
    let mut out = Vec::new();
    for (interp, cols) in [
        (Interpretation::EpisodeLength, episode_table()),
        (Interpretation::PlanningDepth, replanning_table()),
    ] {
        let kind = match interp {
            Interpretation::EpisodeLength => "episode table",
            Interpretation::PlanningDepth => "replanning table",
        };
        for col in cols.iter().filter(|c| c.example == name) {
            for cell in &col.cells {
                for case in &cell.cases {
                    out.push(c(
                        &format!(
                            "{kind}: {} {} = {}",
                            cell.row.title(),
                            case.label(),
                            case.pattern
                        ),
                        Assertion::Optimal {
                            case: case.clone(),
                            horizons: col.horizons.clone(),
                            interpretation: interp,
                            exactly: false,
                        },
                    ));
                }
            }
        }
    }
    out
}

fn flexible_progression(setup: u8) -> (Vec<u8>, Option<Vec<usize>>) {
    match setup {
        1 => (vec![1, 2], None),
        2 => (vec![1, 3], None),
        3 => (vec![2, 3], None),
        4 => (vec![3, 2], None),
        5 => (vec![1, 2, 3], None),
        6 => (vec![2, 3, 2], None),
        7 => (vec![1, 3, 2], None),
        8 => (vec![1, 2, 3, 2], Some(vec![2, 6, 16])),
        _ => (vec![1, 3, 2, 3], None),
    }
}

/// The constraint set of a built-in example.
pub fn constraints_for(name: &str) -> Vec<Constraint> {
    let mut out = table_constraints(name);
    match name {
        "conspiracy" => out.extend([
            c(
                "real-time optimum always influences for H > 2",
                only_optimal("rt", act("influence"), 3..=6),
            ),
            c(
                "inaction is real-time optimal for H ≤ 2",
                optimal("rt", act("noop"), 1..=2),
            ),
            c(
                "influencing a natural user scores -100",
                Assertion::Reward {
                    theta: "natural".into(),
                    state: "s0".into(),
                    action: "influence".into(),
                    value: int(-100),
                },
            ),
            c(
                "constrained real-time optimum is inaction",
                only_optimal("crt", act("noop"), 1..=5),
            ),
            c(
                "ParetoUD set is inaction only",
                only_optimal("pareto-ud", act("noop"), 1..=5),
            ),
            c(
                "final reward influences even at H = 1",
                only_optimal("final", act("influence"), 1..=1),
            ),
        ]),
        "ai-trainer" => out.push(c(
            "same tables as conspiracy",
            Assertion::SameTablesAs("conspiracy"),
        )),
        "writers-curse" => out.extend([
            c(
                "post-influence poetry scores -10 under the realized reward",
                Assertion::Reward {
                    theta: "unhappy".into(),
                    state: "poetry".into(),
                    action: "noop".into(),
                    value: int(-10),
                },
            ),
            // Influencing at the last step ties with inaction: R_ambitious cannot both
            // favour it (privileged row) and disfavour it (real-time row) strictly.
            c(
                "never influencing is real-time optimal",
                optimal("rt", act("noop"), 1..=4),
            ),
            c(
                "constrained real-time optimum is inaction",
                only_optimal("crt", act("noop"), 1..=4),
            ),
        ]),
        "clickbait" => out.extend([
            c(
                "myopic choice at normal is clickbait",
                optimal(
                    "myopic",
                    by_theta(&[("normal", act("clickbait")), ("disillusioned", act("news"))]),
                    1..=1,
                ),
            ),
            c(
                "real-time optimum at H = 2 defers clickbait to the last step",
                only_optimal(
                    "rt",
                    by_theta(&[
                        ("normal", by_step(act("clickbait"), act("news"))),
                        ("disillusioned", act("news")),
                    ]),
                    2..=2,
                ),
            ),
            c(
                "clickbait influence goes from optimal to suboptimal under replanning",
                Assertion::Progression {
                    target: "disillusioned".into(),
                    objective: "rt".into(),
                    interpretation: Interpretation::PlanningDepth,
                    h_max: 6,
                    sequence: vec![3, 2],
                    boundaries: Some(vec![2]),
                },
            ),
        ]),
        "dehydration" => {
            for (th, s, v) in [("2", "1", -1), ("2", "2", 0), ("3", "2", -5)] {
                out.push(c(
                    &format!("R at θ={th}, s={s} is {v}"),
                    Assertion::Reward {
                        theta: th.into(),
                        state: s.into(),
                        action: "noop".into(),
                        value: int(v),
                    },
                ));
            }
        }
        "career-choice" => {
            let (cook, teacher) = (act("encourage_cook"), act("encourage_teacher"));
            out.extend([
                c(
                    "stuck self is indifferent between the two careers",
                    optimal("privileged:stuck", cook.clone(), 1..=1),
                ),
                c(
                    "stuck self is indifferent between the two careers",
                    optimal("privileged:stuck", teacher.clone(), 1..=1),
                ),
                c(
                    "cook self prefers cooking only",
                    only_optimal("privileged:cook", cook.clone(), 1..=1),
                ),
                c(
                    "teacher self prefers teaching only",
                    only_optimal("privileged:teacher", teacher.clone(), 1..=1),
                ),
                c(
                    "staying stuck is worst for every self",
                    Assertion::NotOptimal {
                        case: Case::new("privileged:stuck", act("noop")),
                        horizons: 1..=1,
                    },
                ),
                c(
                    "ParetoUD set is both encouragements",
                    Assertion::ParetoSet {
                        horizon: 1,
                        patterns: vec![cook.clone(), teacher.clone()],
                    },
                ),
                c(
                    "inaction is unambiguously desirable",
                    Assertion::Ud {
                        pattern: act("noop"),
                        horizon: 1,
                        expected: true,
                    },
                ),
                c(
                    "encouraging cooking is unambiguously desirable",
                    Assertion::Ud {
                        pattern: cook,
                        horizon: 1,
                        expected: true,
                    },
                ),
                c(
                    "encouraging teaching is unambiguously desirable",
                    Assertion::Ud {
                        pattern: teacher,
                        horizon: 1,
                        expected: true,
                    },
                ),
            ]);
        }
        "disagreement" => out.extend([
            c(
                "θ0 prefers inaction",
                only_optimal("privileged:theta_0", act("noop"), 1..=4),
            ),
            c(
                "θΔ prefers inaction",
                only_optimal("privileged:theta_delta", act("noop"), 1..=4),
            ),
            c(
                "real-time optimum influences at every non-terminal step",
                only_optimal("rt", by_step(act("noop"), act("a_delta")), 1..=4),
            ),
            c(
                "real-time reward has an influence incentive",
                Assertion::Incentive {
                    objective: "rt".into(),
                    horizons: 2..=4,
                    expected: true,
                },
            ),
        ]),
        "infinite-flipping" => out.push(c(
            "influence regime alternates between odd and even horizons",
            Assertion::Regimes {
                target: "theta_delta".into(),
                objective: "rt".into(),
                regimes: (1..=50).map(|h| if h % 2 == 1 { 3 } else { 2 }).collect(),
            },
        )),
        _ => {
            if let Some(k) = name
                .strip_prefix("flexible:")
                .and_then(|k| k.parse::<u8>().ok())
            {
                let (sequence, boundaries) = flexible_progression(k);
                out.push(c(
                    &format!("setup {k} progression"),
                    Assertion::Progression {
                        target: "theta_delta".into(),
                        objective: "rt".into(),
                        interpretation: Interpretation::EpisodeLength,
                        h_max: 20,
                        sequence,
                        boundaries,
                    },
                ));
                if k == 8 {
                    for (h, v) in [(2, -20), (3, -11), (4, -3)] {
                        out.push(c(
                            &format!("always influencing scores {v} at H = {h}"),
                            Assertion::Value {
                                objective: "rt".into(),
                                pattern: act("a_delta"),
                                horizon: h,
                                value: int(v),
                            },
                        ));
                    }
                    out.push(c(
                        "real-time optimum at H = 6 is 10",
                        Assertion::OptimalValue {
                            objective: "rt".into(),
                            horizon: 6,
                            value: int(10),
                        },
                    ));
                }
            }
        }
    }
    out
}

fn to_regimes(v: &[u8]) -> Vec<Regime> {
    v.iter()
        .map(|x| match x {
            1 => Regime::Incapable,
            2 => Regime::CapableSuboptimal,
            _ => Regime::Optimal,
        })
        .collect()
}

fn render_regimes(v: &[Regime]) -> String {
    v.iter().map(|r| r.symbol()).collect()
}

fn run(m: &DrMdp, a: &Assertion, opts: &SolveOptions) -> Result<(bool, String)> {
    Ok(match a {
        Assertion::Optimal {
            case,
            horizons,
            interpretation,
            exactly,
        } => {
            let mut fails = Vec::new();
            for h in horizons.clone() {
                let o = match interpretation {
                    Interpretation::EpisodeLength => check_episode_case(m, case, h, opts)?,
                    Interpretation::PlanningDepth => check_replanning_case(m, case, h, opts)?,
                };
                if !o.passed {
                    fails.push(format!("H={h}: {}", o.detail));
                } else if *exactly && o.optimal_count != Some(1) {
                    fails.push(format!(
                        "H={h}: {} optimal classes",
                        o.optimal_count.unwrap_or(0)
                    ));
                }
            }
            (fails.is_empty(), fails.join("; "))
        }
        Assertion::NotOptimal { case, horizons } => {
            let mut fails = Vec::new();
            for h in horizons.clone() {
                if check_episode_case(m, case, h, opts)?.passed {
                    fails.push(format!("H={h}: optimal"));
                }
            }
            (fails.is_empty(), fails.join("; "))
        }
        Assertion::Reward {
            theta,
            state,
            action,
            value,
        } => {
            let (th, s, a) = (m.theta(theta)?, m.state(state)?, m.action(action)?);
            let Some(cell) = (0..m.n_states()).find_map(|s2| m.try_reward(th, s, a, s2).cloned())
            else {
                return Ok((false, "no reward cell".into()));
            };
            (
                &cell == value,
                format!("found {}", crate::rational::format(&cell)),
            )
        }
        Assertion::Value {
            objective,
            pattern,
            horizon,
            value,
        } => {
            let obj = Objective::parse(objective, m)?;
            let class = class_of_fn(m, m.initial(), *horizon, |t, p| {
                pattern.resolve(m, t, *horizon, p).ok()
            })?;
            let got = expected_utility(m, &class.to_policy(), *horizon, obj, &opts.limits)?;
            (
                &got == value,
                format!("found {}", crate::rational::format(&got)),
            )
        }
        Assertion::OptimalValue {
            objective,
            horizon,
            value,
        } => {
            let obj = Objective::parse(objective, m)?;
            let set = episode_optimal(m, *horizon, obj, opts)?;
            let got = set.value.unwrap_or_default();
            (
                &got == value,
                format!("found {}", crate::rational::format(&got)),
            )
        }
        Assertion::Progression {
            target,
            objective,
            interpretation,
            h_max,
            sequence,
            boundaries,
        } => {
            let ho = HorizonOptions {
                solve: opts.clone(),
                interpretation: *interpretation,
            };
            let itype = InfluenceType {
                target: m.theta(target)?,
            };
            let p = optimality_progression(m, itype, Objective::parse(objective, m)?, *h_max, &ho)?;
            let ok = p.sequence == to_regimes(sequence)
                && boundaries.as_ref().map_or(true, |b| &p.boundaries == b);
            (
                ok,
                format!("found {} with boundaries {:?}", p.render(), p.boundaries),
            )
        }
        Assertion::Regimes {
            target,
            objective,
            regimes,
        } => {
            let ho = HorizonOptions {
                solve: opts.clone(),
                interpretation: Interpretation::EpisodeLength,
            };
            let itype = InfluenceType {
                target: m.theta(target)?,
            };
            let obj = Objective::parse(objective, m)?;
            let got = (1..=regimes.len())
                .map(|h| classify_regime(m, itype, obj, h, &ho))
                .collect::<Result<Vec<_>>>()?;
            (
                got == to_regimes(regimes),
                format!("found {}", render_regimes(&got)),
            )
        }
        Assertion::ParetoSet { horizon, patterns } => {
            let set = pareto_ud_set(m, *horizon, opts)?;
            let mut want = Vec::new();
            for p in patterns {
                want.push(class_of_fn(m, m.initial(), *horizon, |t, q| {
                    p.resolve(m, t, *horizon, q).ok()
                })?);
            }
            want.sort();
            let got: Vec<_> = set.iter().filter_map(|r| r.class.clone()).collect();
            let shown: Vec<String> = got.iter().map(|c| c.describe(m)).collect();
            (got == want, format!("found {}", shown.join(" | ")))
        }
        Assertion::Ud {
            pattern,
            horizon,
            expected,
        } => {
            let class = class_of_fn(m, m.initial(), *horizon, |t, q| {
                pattern.resolve(m, t, *horizon, q).ok()
            })?;
            let r = is_ud(m, &class.to_policy(), *horizon, opts)?;
            (r.ud == *expected, format!("UD = {}", r.ud))
        }
        Assertion::Incentive {
            objective,
            horizons,
            expected,
        } => {
            let io = InfluenceOptions {
                solve: opts.clone(),
                ..InfluenceOptions::default()
            };
            let obj = Objective::parse(objective, m)?;
            let mut fails = Vec::new();
            for h in horizons.clone() {
                let v = influence_incentive(m, h, obj, &io)?;
                if v.incentive != *expected {
                    fails.push(format!("H={h}: incentive = {}", v.incentive));
                }
            }
            (fails.is_empty(), fails.join("; "))
        }
        Assertion::SameTablesAs(other) => {
            let o = catalog::build(other)?;
            let ok = o.rows_raw() == m.rows_raw()
                && o.rewards_raw() == m.rewards_raw()
                && o.initial() == m.initial()
                && o.noop() == m.noop();
            (
                ok,
                if ok {
                    String::new()
                } else {
                    format!("tables differ from {other}")
                },
            )
        }
    })
}

/// Runs every constraint; solver errors count as failures.
pub fn constraint_check(
    m: &DrMdp,
    constraints: &[Constraint],
    opts: &SolveOptions,
) -> Vec<ConstraintResult> {
    constraints
        .iter()
        .map(|k| {
            let (passed, detail) = match run(m, &k.assertion, opts) {
                Ok((p, d)) => (p, if p { String::new() } else { d }),
                Err(e) => (false, format!("error: {e}")),
            };
            ConstraintResult {
                label: k.label.clone(),
                passed,
                detail,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn failures(name: &str, m: &DrMdp) -> Vec<ConstraintResult> {
        constraint_check(m, &constraints_for(name), &SolveOptions::default())
            .into_iter()
            .filter(|r| !r.passed)
            .collect()
    }

    #[test]
    fn conspiracy_passes_and_perturbation_fails() {
        assert!(failures("conspiracy", &catalog::conspiracy()).is_empty());
        let bad = failures("conspiracy", &catalog::conspiracy_with(int(-1)));
        assert!(
            bad.iter()
                .any(|r| r.label == "inaction is real-time optimal for H ≤ 2"),
            "{bad:?}"
        );
    }

    #[test]
    fn small_examples_pass() {
        for name in ["ai-trainer", "career-choice", "disagreement", "dehydration"] {
            let m = catalog::build(name).unwrap();
            assert!(
                failures(name, &m).is_empty(),
                "{name}: {:?}",
                failures(name, &m)
            );
        }
    }
}
