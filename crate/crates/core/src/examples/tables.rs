//! Expected optimal-policy tables, as action patterns per cell, and the
//! checks that compare them against the solvers.

use std::fmt;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::model::{ActionIx, DrMdp, Pair};
use crate::objectives::{Interpretation, Objective};
use crate::solvers::{
    class_of_fn, episode_optimal, myopic_policies, replanning_policy, SolveOptions,
};

use super::catalog;

/// A deterministic decision rule described by action and θ names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Act(String),
    /// Case split on the current θ.
    ByTheta(Vec<(String, Pattern)>),
    /// One rule at the last step t = H−1, another before it.
    ByStep {
        last: Box<Pattern>,
        earlier: Box<Pattern>,
    },
    /// Split on the horizon: `short` when H ≤ `upto`.
    ByHorizon {
        upto: usize,
        short: Box<Pattern>,
        long: Box<Pattern>,
    },
}

pub fn act(name: &str) -> Pattern {
    Pattern::Act(name.to_string())
}

pub fn by_theta(cases: &[(&str, Pattern)]) -> Pattern {
    Pattern::ByTheta(
        cases
            .iter()
            .map(|(t, p)| (t.to_string(), p.clone()))
            .collect(),
    )
}

pub fn by_step(last: Pattern, earlier: Pattern) -> Pattern {
    Pattern::ByStep {
        last: Box::new(last),
        earlier: Box::new(earlier),
    }
}

pub fn by_horizon(upto: usize, short: Pattern, long: Pattern) -> Pattern {
    Pattern::ByHorizon {
        upto,
        short: Box::new(short),
        long: Box::new(long),
    }
}

impl Pattern {
    pub fn resolve(&self, m: &DrMdp, t: usize, horizon: usize, pair: Pair) -> Result<ActionIx> {
        match self {
            Pattern::Act(a) => m.action(a),
            Pattern::ByTheta(cases) => {
                let name = &m.thetas()[pair.1];
                let p = cases
                    .iter()
                    .find(|(th, _)| th == name)
                    .map(|(_, p)| p)
                    .ok_or_else(|| Error::PolicyIncomplete(format!("no case for θ = {name}")))?;
                p.resolve(m, t, horizon, pair)
            }
            Pattern::ByStep { last, earlier } => {
                if t + 1 == horizon {
                    last.resolve(m, t, horizon, pair)
                } else {
                    earlier.resolve(m, t, horizon, pair)
                }
            }
            Pattern::ByHorizon { upto, short, long } => {
                if horizon <= *upto {
                    short.resolve(m, t, horizon, pair)
                } else {
                    long.resolve(m, t, horizon, pair)
                }
            }
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Act(a) => write!(f, "{a}"),
            Pattern::ByTheta(cases) => {
                let parts: Vec<String> = cases.iter().map(|(t, p)| format!("θ={t}: {p}")).collect();
                write!(f, "[{}]", parts.join("; "))
            }
            Pattern::ByStep { last, earlier } => write!(f, "[t=H-1: {last}; t<H-1: {earlier}]"),
            Pattern::ByHorizon { upto, short, long } => {
                write!(f, "[H≤{upto}: {short}; H>{upto}: {long}]")
            }
        }
    }
}

/// Table rows, one per objective family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Row {
    Privileged,
    RealTime,
    Final,
    Initial,
    NaturalShifts,
    ConstrainedRT,
    Myopic,
    ParetoUD,
}

impl Row {
    pub const ALL: [Row; 8] = [
        Row::Privileged,
        Row::RealTime,
        Row::Final,
        Row::Initial,
        Row::NaturalShifts,
        Row::ConstrainedRT,
        Row::Myopic,
        Row::ParetoUD,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Row::Privileged => "Privileged reward",
            Row::RealTime => "Real-time reward",
            Row::Final => "Final reward",
            Row::Initial => "Initial reward",
            Row::NaturalShifts => "Natural shifts reward",
            Row::ConstrainedRT => "Constrained real-time reward",
            Row::Myopic => "Myopic reward",
            Row::ParetoUD => "ParetoUD",
        }
    }
}

/// One expected pattern. `objective` is an objective key such as `rt` or
/// `privileged:natural`; `start_theta` overrides θ₀ for the check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub objective: String,
    pub start_theta: Option<String>,
    pub pattern: Pattern,
}

impl Case {
    pub fn new(objective: &str, pattern: Pattern) -> Case {
        Case {
            objective: objective.into(),
            start_theta: None,
            pattern,
        }
    }

    pub fn from_theta(objective: &str, theta: &str, pattern: Pattern) -> Case {
        Case {
            objective: objective.into(),
            start_theta: Some(theta.into()),
            pattern,
        }
    }

    pub fn label(&self) -> String {
        let mut s = self.objective.clone();
        if let Some(t) = &self.start_theta {
            s.push_str(&format!(" θ0={t}"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub row: Row,
    pub cases: Vec<Case>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub example: &'static str,
    pub title: &'static str,
    pub horizons: RangeInclusive<usize>,
    pub cells: Vec<Cell>,
}

impl Column {
    pub fn cell(&self, row: Row) -> Option<&Cell> {
        self.cells.iter().find(|c| c.row == row)
    }
}

fn one(row: Row, objective: &str, p: Pattern) -> Cell {
    Cell {
        row,
        cases: vec![Case::new(objective, p)],
    }
}

fn privileged(pairs: &[(&str, &str)]) -> Cell {
    Cell {
        row: Row::Privileged,
        cases: pairs
            .iter()
            .map(|(t, a)| Case::new(&format!("privileged:{t}"), act(a)))
            .collect(),
    }
}

fn switch_episode(
    example: &'static str,
    title: &'static str,
    t: [&str; 2],
    a: [&str; 2],
) -> Column {
    let split = by_theta(&[(t[0], act(a[0])), (t[1], act(a[1]))]);
    Column {
        example,
        title,
        horizons: 3..=5,
        cells: vec![
            privileged(&[(t[0], a[0]), (t[1], a[1])]),
            one(Row::RealTime, "rt", act(a[1])),
            one(Row::Final, "final", act(a[1])),
            Cell {
                row: Row::Initial,
                cases: vec![
                    Case::from_theta("initial", t[0], act(a[0])),
                    Case::from_theta("initial", t[1], act(a[1])),
                ],
            },
            one(Row::NaturalShifts, "natural", act(a[0])),
            one(Row::ConstrainedRT, "crt", act(a[0])),
            one(Row::Myopic, "myopic", split),
            one(Row::ParetoUD, "pareto-ud", act(a[0])),
        ],
    }
}

/// Expected cells of the episode-length table.
pub fn episode_table() -> Vec<Column> {
    let writers = Column {
        example: "writers-curse",
        title: "Writer's Curse",
        horizons: 1..=4,
        cells: vec![
            privileged(&[("ambitious", "influence"), ("unhappy", "noop")]),
            one(Row::RealTime, "rt", act("noop")),
            one(Row::Final, "final", by_step(act("noop"), act("influence"))),
            one(Row::Initial, "initial", act("influence")),
            one(Row::NaturalShifts, "natural", act("influence")),
            one(Row::ConstrainedRT, "crt", act("noop")),
            one(Row::Myopic, "myopic", act("influence")),
            one(Row::ParetoUD, "pareto-ud", act("noop")),
        ],
    };
    let clickbait = Column {
        example: "clickbait",
        title: "Clickbait (H<3)",
        horizons: 1..=2,
        cells: vec![
            privileged(&[("normal", "clickbait"), ("disillusioned", "news")]),
            one(
                Row::RealTime,
                "rt",
                by_theta(&[
                    ("normal", by_step(act("clickbait"), act("news"))),
                    ("disillusioned", act("news")),
                ]),
            ),
            one(Row::Final, "final", act("news")),
            one(Row::Initial, "initial", act("clickbait")),
            one(Row::NaturalShifts, "natural", act("clickbait")),
            one(Row::ConstrainedRT, "crt", act("news")),
            one(
                Row::Myopic,
                "myopic",
                by_theta(&[("normal", act("clickbait")), ("disillusioned", act("news"))]),
            ),
            one(Row::ParetoUD, "pareto-ud", act("news")),
        ],
    };
    let dehydration = Column {
        example: "dehydration",
        title: "Dehydration (H≥2)",
        horizons: 2..=4,
        cells: vec![
            privileged(&[("2", "a3"), ("3", "a4"), ("4", "a4")]),
            one(Row::RealTime, "rt", act("noop")),
            one(Row::Final, "final", act("noop")),
            one(Row::Initial, "initial", act("a3")),
            one(Row::NaturalShifts, "natural", act("a3")),
            one(Row::ConstrainedRT, "crt", act("noop")),
            one(Row::Myopic, "myopic", act("a4")),
            one(Row::ParetoUD, "pareto-ud", act("a3")),
        ],
    };
    vec![
        switch_episode(
            "conspiracy",
            "Conspiracy",
            ["natural", "influenced"],
            ["noop", "influence"],
        ),
        writers,
        clickbait,
        switch_episode(
            "ai-trainer",
            "AI Trainer",
            ["tired", "energized"],
            ["noop", "nudge"],
        ),
        dehydration,
    ]
}

fn switch_replanning(
    example: &'static str,
    title: &'static str,
    t: [&str; 2],
    a: [&str; 2],
    rt_upto: usize,
) -> Column {
    let split = by_theta(&[(t[0], act(a[0])), (t[1], act(a[1]))]);
    Column {
        example,
        title,
        horizons: 1..=4,
        cells: vec![
            privileged(&[(t[0], a[0]), (t[1], a[1])]),
            one(
                Row::RealTime,
                "rt",
                by_horizon(rt_upto, split.clone(), act(a[1])),
            ),
            one(Row::Final, "final", act(a[1])),
            one(Row::Initial, "initial", split.clone()),
            one(Row::NaturalShifts, "natural", split.clone()),
            one(Row::ConstrainedRT, "crt", act(a[0])),
            one(Row::Myopic, "myopic", split),
            one(Row::ParetoUD, "pareto-ud", act(a[0])),
        ],
    }
}

/// Expected cells of the planning-depth table.
pub fn replanning_table() -> Vec<Column> {
    let wc_split = by_theta(&[("ambitious", act("influence")), ("unhappy", act("noop"))]);
    let writers = Column {
        example: "writers-curse",
        title: "Writer's Curse",
        horizons: 1..=4,
        cells: vec![
            privileged(&[("ambitious", "influence"), ("unhappy", "noop")]),
            one(
                Row::RealTime,
                "rt",
                by_horizon(1, act("influence"), act("noop")),
            ),
            one(
                Row::Final,
                "final",
                by_horizon(1, act("noop"), act("influence")),
            ),
            one(Row::Initial, "initial", wc_split.clone()),
            one(
                Row::NaturalShifts,
                "natural",
                by_horizon(1, wc_split, act("influence")),
            ),
            one(Row::ConstrainedRT, "crt", act("noop")),
            one(Row::Myopic, "myopic", act("influence")),
            one(Row::ParetoUD, "pareto-ud", act("noop")),
        ],
    };
    let cb_split = by_theta(&[("normal", act("clickbait")), ("disillusioned", act("news"))]);
    let clickbait = Column {
        example: "clickbait",
        title: "Clickbait",
        horizons: 1..=4,
        cells: vec![
            privileged(&[("normal", "clickbait"), ("disillusioned", "news")]),
            one(
                Row::RealTime,
                "rt",
                by_horizon(1, cb_split.clone(), act("news")),
            ),
            one(Row::Final, "final", act("news")),
            one(Row::Initial, "initial", cb_split.clone()),
            one(
                Row::NaturalShifts,
                "natural",
                by_horizon(1, cb_split.clone(), act("clickbait")),
            ),
            one(Row::ConstrainedRT, "crt", act("news")),
            one(Row::Myopic, "myopic", cb_split),
            one(Row::ParetoUD, "pareto-ud", act("news")),
        ],
    };
    vec![
        switch_replanning(
            "conspiracy",
            "Conspiracy",
            ["natural", "influenced"],
            ["noop", "influence"],
            1,
        ),
        writers,
        clickbait,
        switch_replanning(
            "ai-trainer",
            "AI Trainer",
            ["tired", "energized"],
            ["noop", "nudge"],
            2,
        ),
    ]
}

/// Outcome of checking one case at one horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    pub horizon: usize,
    pub case: String,
    pub passed: bool,
    /// Size of the optimal set or of the stationary selection space.
    pub optimal_count: Option<u128>,
    pub value: Option<crate::rational::Q>,
    pub detail: String,
}

fn case_start(m: &DrMdp, case: &Case) -> Result<Pair> {
    Ok(match &case.start_theta {
        Some(t) => (m.initial().0, m.theta(t)?),
        None => m.initial(),
    })
}

/// Episode length: the pattern's on-path class is in the optimal set
/// (myopic: the pattern picks an argmax action at every reachable pair).
pub fn check_episode_case(
    m: &DrMdp,
    case: &Case,
    horizon: usize,
    opts: &SolveOptions,
) -> Result<CaseOutcome> {
    let objective = Objective::parse(&case.objective, m)?;
    let start = case_start(m, case)?;
    let base = CaseOutcome {
        horizon,
        case: case.label(),
        passed: false,
        optimal_count: None,
        value: None,
        detail: String::new(),
    };
    if objective == Objective::Myopic {
        let set = myopic_policies(&m.with_initial(start));
        let mut bad = Vec::new();
        for (pair, acts) in &set.allowed {
            let a = case.pattern.resolve(m, 0, horizon, *pair)?;
            if !acts.contains(&a) {
                bad.push(m.pair_name(*pair));
            }
        }
        return Ok(CaseOutcome {
            passed: bad.is_empty(),
            optimal_count: Some(set.count()),
            detail: if bad.is_empty() {
                String::new()
            } else {
                format!("not greedy at {}", bad.join(", "))
            },
            ..base
        });
    }
    let set = episode_optimal(m, horizon, objective, &opts.from(start))?;
    let class = class_of_fn(m, start, horizon, |t, p| {
        case.pattern.resolve(m, t, horizon, p).ok()
    })?;
    let passed = set.contains(&class);
    Ok(CaseOutcome {
        passed,
        optimal_count: Some(set.members.len() as u128),
        value: set.value.clone(),
        detail: if passed {
            String::new()
        } else {
            format!(
                "optimal set: {}",
                set.members
                    .iter()
                    .map(|c| c.describe(m))
                    .collect::<Vec<_>>()
                    .join(" | ")
            )
        },
        ..base
    })
}

/// Planning depth: at every pair reachable from the start, the pattern's
/// action is one of the replanning-optimal first actions.
pub fn check_replanning_case(
    m: &DrMdp,
    case: &Case,
    depth: usize,
    opts: &SolveOptions,
) -> Result<CaseOutcome> {
    let objective = Objective::parse(&case.objective, m)?;
    let start = case_start(m, case)?;
    let set = replanning_policy(m, depth, objective, &opts.from(start))?;
    let mut bad = Vec::new();
    for (pair, acts) in &set.allowed {
        let a = case.pattern.resolve(m, 0, depth, *pair)?;
        if !acts.contains(&a) {
            let names: Vec<&str> = acts.iter().map(|a| m.actions()[*a].as_str()).collect();
            bad.push(format!(
                "{} allows {{{}}}",
                m.pair_name(*pair),
                names.join(", ")
            ));
        }
    }
    Ok(CaseOutcome {
        horizon: depth,
        case: case.label(),
        passed: bad.is_empty(),
        optimal_count: Some(set.count()),
        value: None,
        detail: bad.join("; "),
    })
}

/// Every case of a cell at every horizon of the column.
pub fn check_cell(
    m: &DrMdp,
    cell: &Cell,
    horizons: RangeInclusive<usize>,
    interpretation: Interpretation,
    opts: &SolveOptions,
) -> Result<Vec<CaseOutcome>> {
    let mut out = Vec::new();
    for h in horizons {
        for case in &cell.cases {
            out.push(match interpretation {
                Interpretation::EpisodeLength => check_episode_case(m, case, h, opts)?,
                Interpretation::PlanningDepth => check_replanning_case(m, case, h, opts)?,
            });
        }
    }
    Ok(out)
}

/// Checked results of a whole table, in column then row order.
pub fn check_table(
    columns: &[Column],
    interpretation: Interpretation,
    opts: &SolveOptions,
) -> Result<Vec<(&'static str, Row, Vec<CaseOutcome>)>> {
    let mut out = Vec::new();
    for col in columns {
        let m = catalog::build(col.example)?;
        for cell in &col.cells {
            out.push((
                col.example,
                cell.row,
                check_cell(&m, cell, col.horizons.clone(), interpretation, opts)?,
            ));
        }
    }
    Ok(out)
}
