use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use drmdp::examples::{catalog, CanonicalExample};
use drmdp::horizon::{
    long_horizon_condition, optimality_progression, HorizonOptions, InfluenceType,
};
use drmdp::influence::{influence_incentive, influence_towards, InfluenceOptions};
use drmdp::learn::{generate_dataset, learn_from_population, Declared, PopulationDataset};
use drmdp::model::Limits;
use drmdp::pareto::pareto_ud_set;
use drmdp::rational::{self, Q};
use drmdp::report::table_report;
use drmdp::solvers::{
    myopic_policies, render_class, replanning_policy, solve, Method, StationarySet,
};
use drmdp::{
    load_spec, save_spec, DrMdp, Error, Interpretation, Objective, SolveOptions, ThetaWindow,
};

#[derive(Parser)]
#[command(
    name = "drmdp",
    version,
    about = "Exact analysis of finite dynamic-reward MDPs"
)]
struct Cli {
    /// Refuse policy enumeration above this many policies.
    #[arg(long, global = true, value_name = "N")]
    cap_policies: Option<u64>,
    /// Refuse trajectory distributions with more support points than this.
    #[arg(long, global = true, value_name = "N")]
    cap_trajectories: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Include θ_H in the reward-function trajectory used by influence tests.
    #[arg(long = "include-theta-H", global = true)]
    include_theta_h: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Reading {
    /// The horizon is the episode length.
    Episode,
    /// The horizon is the lookahead of an agent that replans every step.
    Depth,
}

impl From<Reading> for Interpretation {
    fn from(r: Reading) -> Self {
        match r {
            Reading::Episode => Interpretation::EpisodeLength,
            Reading::Depth => Interpretation::PlanningDepth,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Enumerate,
    Reduce,
    Replan,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an instance file.
    Validate { file: PathBuf },
    /// Print the full optimal policy set for one objective and horizon.
    Solve {
        file: PathBuf,
        #[arg(long)]
        objective: String,
        #[arg(long)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Enumerate)]
        method: MethodArg,
        /// Start pair as STATE:THETA instead of the instance's initial pair.
        #[arg(long)]
        start: Option<String>,
    },
    /// Test for an incentive to influence the reward function.
    Influence {
        file: PathBuf,
        #[arg(long)]
        objective: String,
        #[arg(long)]
        horizon: usize,
        /// Test influence towards this θ instead of any influence.
        #[arg(long)]
        towards: Option<String>,
        #[arg(long, value_enum, default_value_t = Reading::Episode)]
        interpretation: Reading,
        #[arg(long)]
        start: Option<String>,
    },
    /// Classify the influence regime for every horizon up to a bound.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        objective: String,
        #[arg(long)]
        towards: String,
        #[arg(long)]
        h_max: usize,
        #[arg(long, value_enum, default_value_t = Reading::Episode)]
        interpretation: Reading,
        /// Also evaluate the long-horizon average-reward condition (2-reward instances).
        #[arg(long)]
        premise: bool,
        /// Margin for the average-reward condition, e.g. 1/2.
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// List the Pareto-efficient unambiguously desirable policies.
    Pareto {
        file: PathBuf,
        #[arg(long)]
        horizon: usize,
    },
    /// Built-in example instances.
    Examples {
        #[command(subcommand)]
        action: ExamplesCommand,
    },
    /// Learn an instance from population feedback and trajectories.
    Learn {
        dataset: PathBuf,
        /// JSON file declaring the states, thetas, actions, noop and initial pair.
        #[arg(long)]
        thetas: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check the expected optimal-policy tables against the solvers.
    Report {
        /// An example name, or `all`.
        #[arg(default_value = "all")]
        scope: String,
        /// Which table to build; both by default.
        #[arg(long, value_enum)]
        interpretation: Option<Reading>,
    },
}

#[derive(Subcommand)]
enum ExamplesCommand {
    List,
    /// Write a built-in instance as a spec file.
    Emit {
        name: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Write a fully covering population dataset generated from a built-in.
    Dataset {
        name: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write the declared label sets needed by `learn`.
        #[arg(long)]
        declared: Option<PathBuf>,
    },
    /// Run the constraint sets of one or all built-ins.
    Check {
        name: Option<String>,
    },
}

enum Failure {
    Input(String),
    Guard(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            e if e.is_guard() => Failure::Guard(e.to_string()),
            Error::Constraint { .. } => Failure::Internal(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

/// One command's output in the three formats.
struct Output {
    text: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    json: Value,
}

impl Output {
    fn empty() -> Output {
        Output {
            text: String::new(),
            header: Vec::new(),
            rows: Vec::new(),
            json: Value::Null,
        }
    }

    fn render(&self, format: Format) -> CliResult<String> {
        Ok(match format {
            Format::Table => self.text.clone(),
            Format::Json => {
                serde_json::to_string_pretty(&self.json)
                    .map_err(|e| Failure::Internal(e.to_string()))?
                    + "\n"
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Failure::Internal(e.to_string());
                w.write_record(&self.header).map_err(io)?;
                for r in &self.rows {
                    w.write_record(r).map_err(io)?;
                }
                String::from_utf8(
                    w.into_inner()
                        .map_err(|e| Failure::Internal(e.to_string()))?,
                )
                .map_err(|e| Failure::Internal(e.to_string()))?
            }
        })
    }
}

fn q(v: &Q) -> String {
    rational::format(v)
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> CliResult<DrMdp> {
    let m =
        load_spec(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(m)
}

fn write_or_print(text: &str, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_start(m: &DrMdp, start: Option<&str>) -> CliResult<Option<(usize, usize)>> {
    let Some(text) = start else {
        return Ok(None);
    };
    let (s, t) = text
        .split_once(':')
        .ok_or_else(|| Failure::Input(format!("start `{text}` is not STATE:THETA")))?;
    Ok(Some((m.state(s)?, m.theta(t)?)))
}

struct Context {
    limits: Limits,
    window: ThetaWindow,
}

impl Context {
    fn solve_options(&self, start: Option<(usize, usize)>) -> SolveOptions {
        SolveOptions {
            limits: self.limits,
            start,
            ..SolveOptions::default()
        }
    }
}

fn stationary_output(m: &DrMdp, set: &StationarySet, title: &str) -> Output {
    let mut text = format!("{title}\nselections: {}\n", set.count());
    let mut rows = Vec::new();
    let mut allowed = serde_json::Map::new();
    for (pair, acts) in &set.allowed {
        let names: Vec<String> = acts.iter().map(|a| m.actions()[*a].clone()).collect();
        text.push_str(&format!(
            "  {} -> {}\n",
            m.pair_name(*pair),
            names.join(" | ")
        ));
        rows.push(vec![
            m.states()[pair.0].clone(),
            m.thetas()[pair.1].clone(),
            names.join("|"),
        ]);
        allowed.insert(m.pair_name(*pair), json!(names));
    }
    Output {
        text,
        header: vec!["state".into(), "theta".into(), "actions".into()],
        rows,
        json: json!({ "kind": "stationary", "selections": set.count().to_string(), "allowed": allowed }),
    }
}

fn cmd_validate(file: &Path) -> CliResult<Output> {
    let m =
        load_spec(&read(file)?).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
    let violations = m.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(Failure::Input(format!(
            "{} is invalid:\n{}",
            file.display(),
            list.join("\n")
        )));
    }
    let line = format!(
        "{}: valid; {} states, {} thetas, {} actions, {} reachable pairs, {}",
        file.display(),
        m.n_states(),
        m.n_thetas(),
        m.n_actions(),
        m.reachable_pairs().len(),
        if m.is_deterministic() {
            "deterministic"
        } else {
            "stochastic"
        }
    );
    Ok(Output {
        text: line + "\n",
        header: vec![
            "valid".into(),
            "states".into(),
            "thetas".into(),
            "actions".into(),
            "deterministic".into(),
        ],
        rows: vec![vec![
            "true".into(),
            m.n_states().to_string(),
            m.n_thetas().to_string(),
            m.n_actions().to_string(),
            m.is_deterministic().to_string(),
        ]],
        json: json!({
            "valid": true,
            "states": m.n_states(),
            "thetas": m.n_thetas(),
            "actions": m.n_actions(),
            "reachable_pairs": m.reachable_pairs().len(),
            "deterministic": m.is_deterministic(),
        }),
    })
}

fn cmd_solve(
    ctx: &Context,
    file: &Path,
    objective: &str,
    horizon: usize,
    method: MethodArg,
    start: Option<&str>,
) -> CliResult<Output> {
    let m = load(file)?;
    let obj = Objective::parse(objective, &m)?;
    let opts = ctx.solve_options(parse_start(&m, start)?);
    if obj == Objective::Myopic {
        return Ok(stationary_output(
            &m,
            &myopic_policies(&m),
            "Myopic reward: greedy stationary policies",
        ));
    }
    if method == MethodArg::Replan {
        let set = replanning_policy(&m, horizon, obj, &opts)?;
        return Ok(stationary_output(
            &m,
            &set,
            &format!("{obj}, replanning at depth {horizon}"),
        ));
    }
    let method = if method == MethodArg::Reduce {
        Method::Reduce
    } else {
        Method::Enumerate
    };
    let set = solve(&m, horizon, obj, method, &opts)?;
    let value = set.value.as_ref().map(q);
    let mut text = format!(
        "{obj}, H = {horizon}, from {}\nvalue: {}\noptimal classes: {}\n",
        m.pair_name(set.start),
        value.clone().unwrap_or_else(|| "-".into()),
        set.members.len()
    );
    let mut rows = Vec::new();
    for (i, c) in set.members.iter().enumerate() {
        let r = render_class(&m, c);
        text.push_str(&format!("  [{i}] {r}\n"));
        rows.push(vec![i.to_string(), value.clone().unwrap_or_default(), r]);
    }
    Ok(Output {
        text,
        header: vec!["class".into(), "value".into(), "policy".into()],
        rows,
        json: json!({
            "objective": obj.key(&m),
            "horizon": horizon,
            "start": m.pair_name(set.start),
            "value": value,
            "members": set.members.iter().map(|c| render_class(&m, c)).collect::<Vec<_>>(),
        }),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_influence(
    ctx: &Context,
    file: &Path,
    objective: &str,
    horizon: usize,
    towards: Option<&str>,
    interpretation: Reading,
    start: Option<&str>,
) -> CliResult<Output> {
    let m = load(file)?;
    let obj = Objective::parse(objective, &m)?;
    let opts = InfluenceOptions {
        solve: ctx.solve_options(parse_start(&m, start)?),
        window: ctx.window,
        interpretation: interpretation.into(),
    };
    if let Some(name) = towards {
        let theta = m.theta(name)?;
        let v = influence_towards(&m, horizon, obj, theta, &opts)?;
        let fmt = |d: &[Q]| d.iter().map(q).collect::<Vec<_>>().join(", ");
        let mut text = format!(
            "{obj}, H = {horizon}: incentive towards {name}: {}\nP(θ_H) under inaction: [{}]\n",
            v.holds,
            fmt(&v.natural_final)
        );
        for d in &v.optimal_final {
            text.push_str(&format!("P(θ_H) under an optimal policy: [{}]\n", fmt(d)));
        }
        return Ok(Output {
            text,
            header: vec![
                "objective".into(),
                "horizon".into(),
                "towards".into(),
                "incentive".into(),
            ],
            rows: vec![vec![
                obj.key(&m),
                horizon.to_string(),
                name.into(),
                v.holds.to_string(),
            ]],
            json: json!({
                "objective": obj.key(&m),
                "horizon": horizon,
                "towards": name,
                "incentive": v.holds,
                "natural_final": v.natural_final.iter().map(q).collect::<Vec<_>>(),
                "optimal_final": v.optimal_final.iter().map(|d| d.iter().map(q).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
        });
    }
    let v = influence_incentive(&m, horizon, obj, &opts)?;
    let text = format!(
        "{obj}, H = {horizon}: incentive for influence: {}\nsome optimal policy influences: {}\noptimal policies examined: {}\n",
        v.incentive,
        v.some_influence,
        v.optimal_count.map_or("node-wise".into(), |n| n.to_string())
    );
    Ok(Output {
        text,
        header: vec![
            "objective".into(),
            "horizon".into(),
            "incentive".into(),
            "some_influence".into(),
        ],
        rows: vec![vec![
            obj.key(&m),
            horizon.to_string(),
            v.incentive.to_string(),
            v.some_influence.to_string(),
        ]],
        json: json!({
            "objective": obj.key(&m),
            "horizon": horizon,
            "incentive": v.incentive,
            "some_influence": v.some_influence,
            "optimal_count": v.optimal_count,
        }),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    ctx: &Context,
    file: &Path,
    objective: &str,
    towards: &str,
    h_max: usize,
    interpretation: Reading,
    premise: bool,
    epsilon: Option<&str>,
) -> CliResult<Output> {
    let m = load(file)?;
    let obj = Objective::parse(objective, &m)?;
    let itype = InfluenceType {
        target: m.theta(towards)?,
    };
    let opts = HorizonOptions {
        solve: ctx.solve_options(None),
        interpretation: interpretation.into(),
    };
    let p = optimality_progression(&m, itype, obj, h_max, &opts)?;
    let boundaries: Vec<String> = p.boundaries.iter().map(|b| b.to_string()).collect();
    let mut text = format!(
        "{obj}, influence towards {towards}, H = 1..{h_max}\nprogression: {}\nboundaries: {}\n",
        p.render(),
        if boundaries.is_empty() {
            "none".into()
        } else {
            boundaries.join(", ")
        }
    );
    let rows: Vec<Vec<String>> = p
        .regimes
        .iter()
        .enumerate()
        .map(|(i, r)| vec![(i + 1).to_string(), r.number().to_string()])
        .collect();
    for (i, r) in p.regimes.iter().enumerate() {
        text.push_str(&format!("  H={:<3} {r}\n", i + 1));
    }
    let mut doc = json!({
        "objective": obj.key(&m),
        "towards": towards,
        "h_max": h_max,
        "progression": p.render(),
        "regimes": p.regimes.iter().map(|r| r.number()).collect::<Vec<_>>(),
        "boundaries": p.boundaries,
    });
    if premise {
        let eps = match epsilon {
            Some(e) => Some(
                rational::parse(e)
                    .ok_or_else(|| Failure::Input(format!("epsilon `{e}` is not a rational")))?,
            ),
            None => None,
        };
        let r = long_horizon_condition(&m, eps, h_max, &opts.solve)?;
        let without = r.best_without_influence.as_ref().map(|c| q(&c.mean));
        text.push_str(&format!(
            "average reward after influence: {}\nbest average reward without influence: {}\ngap: {}\ncondition holds: {}\n",
            q(&r.best_after_influence.mean),
            without.clone().unwrap_or_else(|| "none".into()),
            q(&r.gap),
            r.premise_holds
        ));
        if r.premise_holds {
            text.push_str(&format!(
                "incentive from H = {} through {}: {}\n",
                r.h_star.map_or("-".into(), |h| h.to_string()),
                r.verified_through,
                r.persists
            ));
        }
        doc["premise"] = json!({
            "after_influence": q(&r.best_after_influence.mean),
            "without_influence": without,
            "gap": q(&r.gap),
            "holds": r.premise_holds,
            "h_star": r.h_star,
            "persists": r.persists,
        });
    }
    Ok(Output {
        text,
        header: vec!["horizon".into(), "regime".into()],
        rows,
        json: doc,
    })
}

fn cmd_pareto(ctx: &Context, file: &Path, horizon: usize) -> CliResult<Output> {
    let m = load(file)?;
    let set = pareto_ud_set(&m, horizon, &ctx.solve_options(None))?;
    let mut text = format!("ParetoUD, H = {horizon}: {} classes\n", set.len());
    let mut rows = Vec::new();
    let mut members = Vec::new();
    for (i, r) in set.iter().enumerate() {
        let class = r
            .class
            .as_ref()
            .map(|c| render_class(&m, c))
            .unwrap_or_default();
        let eus: Vec<String> = r
            .per_theta
            .iter()
            .enumerate()
            .map(|(t, (eu, base))| format!("{}: {} (inaction {})", m.thetas()[t], q(eu), q(base)))
            .collect();
        text.push_str(&format!("  [{i}] {class}\n      {}\n", eus.join("; ")));
        let mut row = vec![i.to_string(), class.clone()];
        row.extend(r.per_theta.iter().map(|(eu, _)| q(eu)));
        rows.push(row);
        members.push(json!({
            "policy": class,
            "expected_utility": m.thetas().iter().zip(&r.per_theta).map(|(t, (eu, _))| (t.clone(), q(eu))).collect::<std::collections::BTreeMap<_, _>>(),
        }));
    }
    let mut header = vec!["class".to_string(), "policy".to_string()];
    header.extend(m.thetas().iter().map(|t| format!("eu_{t}")));
    Ok(Output {
        text,
        header,
        rows,
        json: json!({ "horizon": horizon, "members": members }),
    })
}

fn cmd_examples(ctx: &Context, action: &ExamplesCommand) -> CliResult<(Output, bool)> {
    match action {
        ExamplesCommand::List => {
            let mut text = String::new();
            let mut rows = Vec::new();
            for name in catalog::NAMES {
                let m = catalog::build(name)?;
                let rec = catalog::is_reconstructed(name);
                text.push_str(&format!(
                    "{name:<20} {}\n",
                    if rec { "reconstructed" } else { "as stated" }
                ));
                rows.push(vec![
                    name.to_string(),
                    rec.to_string(),
                    m.description().unwrap_or("").to_string(),
                ]);
            }
            Ok((
                Output {
                    text,
                    header: vec!["name".into(), "reconstructed".into(), "description".into()],
                    json: json!(rows
                        .iter()
                        .map(|r| json!({"name": r[0], "reconstructed": r[1] == "true"}))
                        .collect::<Vec<_>>()),
                    rows,
                },
                true,
            ))
        }
        ExamplesCommand::Emit { name, output } => {
            let m = catalog::build(name)?;
            write_or_print(&save_spec(&m), output.as_deref())?;
            Ok((Output::empty(), true))
        }
        ExamplesCommand::Dataset {
            name,
            output,
            declared,
        } => {
            let m = catalog::build(name)?;
            let internal = |e: serde_json::Error| Failure::Internal(e.to_string());
            let data = serde_json::to_string_pretty(&generate_dataset(&m)).map_err(internal)?;
            write_or_print(&(data + "\n"), output.as_deref())?;
            if let Some(p) = declared {
                let decl = serde_json::to_string_pretty(&Declared::of(&m)).map_err(internal)?;
                write_or_print(&(decl + "\n"), Some(p))?;
            }
            Ok((Output::empty(), true))
        }
        ExamplesCommand::Check { name } => {
            let names: Vec<&str> = match name {
                Some(n) => vec![n.as_str()],
                None => catalog::NAMES.to_vec(),
            };
            let opts = ctx.solve_options(None);
            let mut text = String::new();
            let mut rows = Vec::new();
            let mut all = true;
            for n in names {
                let ex = CanonicalExample::load(n)?;
                for r in ex.check(&opts) {
                    all &= r.passed;
                    text.push_str(&format!(
                        "{} {n}: {}",
                        if r.passed { "ok  " } else { "FAIL" },
                        r.label
                    ));
                    if !r.passed {
                        text.push_str(&format!(" ({})", r.detail));
                    }
                    text.push('\n');
                    rows.push(vec![n.to_string(), r.label, r.passed.to_string(), r.detail]);
                }
            }
            Ok((
                Output {
                    text,
                    header: vec!["example".into(), "constraint".into(), "passed".into(), "detail".into()],
                    json: json!(rows
                        .iter()
                        .map(|r| json!({"example": r[0], "constraint": r[1], "passed": r[2] == "true", "detail": r[3]}))
                        .collect::<Vec<_>>()),
                    rows,
                },
                all,
            ))
        }
    }
}

fn cmd_learn(dataset: &Path, declared: &Path, output: Option<&Path>) -> CliResult<bool> {
    let data: PopulationDataset = serde_json::from_str(&read(dataset)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", dataset.display())))?;
    let decl: Declared = serde_json::from_str(&read(declared)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", declared.display())))?;
    let learned = learn_from_population(&data, &decl)?;
    let c = &learned.coverage;
    for t in &c.thetas_without_humans {
        eprintln!("no human with theta {t}");
    }
    for (s, t, a) in &c.unobserved_transitions {
        eprintln!("no observed step from ({s}, {t}) under {a}");
    }
    for (t, s, a, s2) in &c.missing_rewards {
        eprintln!("no rating of {s} --{a}--> {s2} under theta {t}");
    }
    for (t, s, a, s2) in &c.disagreements {
        eprintln!("ratings of {s} --{a}--> {s2} under theta {t} disagree; using their mean");
    }
    for r in &c.rejected_records {
        eprintln!("rejected record: {r}");
    }
    write_or_print(&save_spec(&learned.instance), output)?;
    Ok(c.is_complete())
}

fn cmd_report(
    ctx: &Context,
    scope: &str,
    interpretation: Option<Reading>,
    format: Format,
) -> CliResult<(String, bool)> {
    let scope = if scope == "all" { None } else { Some(scope) };
    if let Some(s) = scope {
        catalog::build(s)?;
    }
    let readings = match interpretation {
        Some(r) => vec![r],
        None => vec![Reading::Episode, Reading::Depth],
    };
    let opts = ctx.solve_options(None);
    let mut parts = Vec::new();
    let mut all = true;
    for r in readings {
        let rep = table_report(r.into(), scope, &opts)?;
        all &= rep.all_passed();
        parts.push(match format {
            Format::Table => rep.markdown(),
            // One CSV document: the interpretation is a column, so keep one header.
            Format::Csv if !parts.is_empty() => rep
                .csv()
                .split_once('\n')
                .map(|(_, body)| body.to_string())
                .unwrap_or_default(),
            Format::Csv => rep.csv(),
            Format::Json => rep.json(),
        });
    }
    let text = match format {
        Format::Csv => parts.concat(),
        Format::Json if parts.len() > 1 => format!(
            "[\n{}\n]\n",
            parts
                .iter()
                .map(|p| p.trim_end())
                .collect::<Vec<_>>()
                .join(",\n")
        ),
        _ => parts.join("\n"),
    };
    Ok((text, all))
}

fn run(cli: &Cli) -> CliResult<ExitCode> {
    let mut limits = Limits::default();
    if let Some(n) = cli.cap_policies {
        limits.max_policies = n;
    }
    if let Some(n) = cli.cap_trajectories {
        limits.max_trajectories = n;
    }
    let ctx = Context {
        limits,
        window: if cli.include_theta_h {
            ThetaWindow::Inclusive
        } else {
            ThetaWindow::Exclusive
        },
    };
    let emit = |o: Output| -> CliResult<ExitCode> {
        print!("{}", o.render(cli.format)?);
        Ok(ExitCode::SUCCESS)
    };
    match &cli.command {
        Command::Validate { file } => emit(cmd_validate(file)?),
        Command::Solve {
            file,
            objective,
            horizon,
            method,
            start,
        } => emit(cmd_solve(
            &ctx,
            file,
            objective,
            *horizon,
            *method,
            start.as_deref(),
        )?),
        Command::Influence {
            file,
            objective,
            horizon,
            towards,
            interpretation,
            start,
        } => emit(cmd_influence(
            &ctx,
            file,
            objective,
            *horizon,
            towards.as_deref(),
            *interpretation,
            start.as_deref(),
        )?),
        Command::Sweep {
            file,
            objective,
            towards,
            h_max,
            interpretation,
            premise,
            epsilon,
        } => emit(cmd_sweep(
            &ctx,
            file,
            objective,
            towards,
            *h_max,
            *interpretation,
            *premise,
            epsilon.as_deref(),
        )?),
        Command::Pareto { file, horizon } => emit(cmd_pareto(&ctx, file, *horizon)?),
        Command::Examples { action } => {
            let (o, ok) = cmd_examples(&ctx, action)?;
            if matches!(
                action,
                ExamplesCommand::List | ExamplesCommand::Check { .. }
            ) {
                print!("{}", o.render(cli.format)?);
            }
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Command::Learn {
            dataset,
            thetas,
            output,
        } => {
            let complete = cmd_learn(dataset, thetas, output.as_deref())?;
            Ok(if complete {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Report {
            scope,
            interpretation,
        } => {
            let (text, ok) = cmd_report(&ctx, scope, *interpretation, cli.format)?;
            print!("{text}");
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Guard(msg)) => {
            eprintln!("refused: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
