//! Built-in instances. Figure-only examples use reconstructed reward values
//! that satisfy every constraint in `constraints`.

use crate::error::{Error, Result};
use crate::model::{Builder, DrMdp};
use crate::rational::{int, Q};

pub const NAMES: &[&str] = &[
    "conspiracy",
    "writers-curse",
    "clickbait",
    "ai-trainer",
    "dehydration",
    "career-choice",
    "disagreement",
    "flexible:1",
    "flexible:2",
    "flexible:3",
    "flexible:4",
    "flexible:5",
    "flexible:6",
    "flexible:7",
    "flexible:8",
    "flexible:9",
    "infinite-flipping",
];

/// Names whose reward values are reconstructions rather than stated numbers.
pub fn is_reconstructed(name: &str) -> bool {
    matches!(
        name,
        "conspiracy"
            | "writers-curse"
            | "clickbait"
            | "ai-trainer"
            | "dehydration"
            | "career-choice"
    )
}

const RECONSTRUCTED: &str = "reconstructed reward values, pinned by the example's constraint set";

fn must(b: Builder) -> DrMdp {
    b.build().expect("built-in instance is well formed")
}

/// Single-state, two-θ instance where one action moves θ to the second
/// parameterization and the inaction action moves it back.
fn two_theta_switch(
    thetas: [&str; 2],
    actions: [&str; 2],
    rewards: [[i64; 2]; 2],
    description: &str,
) -> DrMdp {
    let mut b = Builder::new()
        .states(["s0"])
        .thetas(thetas)
        .actions(actions)
        .noop(actions[0])
        .initial("s0", thetas[0])
        .description(description);
    for th in thetas {
        b = b
            .go("s0", th, actions[0], "s0", thetas[0])
            .go("s0", th, actions[1], "s0", thetas[1]);
    }
    for (i, th) in thetas.iter().enumerate() {
        for (j, a) in actions.iter().enumerate() {
            b = b.reward(th, "s0", a, int(rewards[i][j]));
        }
    }
    must(b)
}

pub fn conspiracy() -> DrMdp {
    conspiracy_with(int(-100))
}

/// Conspiracy with a different penalty for influencing a natural user.
pub fn conspiracy_with(first_influence: Q) -> DrMdp {
    let mut b = Builder::new()
        .states(["s0"])
        .thetas(["natural", "influenced"])
        .actions(["noop", "influence"])
        .noop("noop")
        .initial("s0", "natural")
        .description(format!("Conspiracy influence; {RECONSTRUCTED}"));
    for th in ["natural", "influenced"] {
        b = b
            .go("s0", th, "noop", "s0", "natural")
            .go("s0", th, "influence", "s0", "influenced");
    }
    must(
        b.reward("natural", "s0", "noop", int(0))
            .reward("natural", "s0", "influence", first_influence)
            .reward("influenced", "s0", "noop", int(0))
            .reward("influenced", "s0", "influence", int(100)),
    )
}

/// Conspiracy relabeled; the two instances cannot be told apart from data.
pub fn ai_trainer() -> DrMdp {
    two_theta_switch(
        ["tired", "energized"],
        ["noop", "nudge"],
        [[0, -100], [0, 100]],
        &format!("AI personal trainer; {RECONSTRUCTED}"),
    )
}

pub fn writers_curse() -> DrMdp {
    let states = ["no-poetry", "poetry"];
    let thetas = ["ambitious", "unhappy"];
    let mut b = Builder::new()
        .states(states)
        .thetas(thetas)
        .actions(["noop", "influence"])
        .noop("noop")
        .initial("no-poetry", "ambitious")
        .description(format!("Writer's curse; {RECONSTRUCTED}"));
    for s in states {
        for th in thetas {
            b = b.go(s, th, "noop", "no-poetry", "ambitious").go(
                s,
                th,
                "influence",
                "poetry",
                "unhappy",
            );
        }
    }
    for a in ["noop", "influence"] {
        b = b
            .reward("ambitious", "no-poetry", a, int(0))
            .reward("ambitious", "poetry", a, int(10))
            .reward("unhappy", "poetry", a, int(-10));
    }
    must(b.reward("unhappy", "no-poetry", "noop", int(0)).reward(
        "unhappy",
        "no-poetry",
        "influence",
        int(-10),
    ))
}

pub fn clickbait() -> DrMdp {
    let b = Builder::new()
        .states(["s0"])
        .thetas(["normal", "disillusioned"])
        .actions(["news", "clickbait"])
        .noop("news")
        .initial("s0", "normal")
        .description(format!("Clickbait; {RECONSTRUCTED}"))
        .go("s0", "normal", "news", "s0", "normal")
        .go("s0", "disillusioned", "news", "s0", "disillusioned")
        .go("s0", "normal", "clickbait", "s0", "disillusioned")
        .go("s0", "disillusioned", "clickbait", "s0", "disillusioned")
        .reward("normal", "s0", "clickbait", int(2))
        .reward("normal", "s0", "news", int(1))
        .reward("disillusioned", "s0", "news", int(0))
        .reward("disillusioned", "s0", "clickbait", int(-1));
    must(b)
}

/// θ is the water target, the state is one unit below the target reached.
pub fn dehydration() -> DrMdp {
    let mut b = Builder::new()
        .states(["1", "2", "3"])
        .thetas(["2", "3", "4"])
        .actions(["noop", "a3", "a4"])
        .noop("noop")
        .initial("1", "2")
        .description(format!("Dehydration; {RECONSTRUCTED}"));
    for s in 1..=3i64 {
        for th in 2..=4i64 {
            for (a, target) in [("noop", th), ("a3", 3), ("a4", 4)] {
                let (ss, ts) = (s.to_string(), th.to_string());
                b = b
                    .go(&ss, &ts, a, &(target - 1).to_string(), &target.to_string())
                    .reward(&ts, &ss, a, int(-(th - s).abs() - 4 * (th - 2)));
            }
        }
    }
    must(b)
}

pub fn career_choice() -> DrMdp {
    let states = ["undecided", "cook", "teacher"];
    let thetas = ["stuck", "cook", "teacher"];
    let actions = ["noop", "encourage_cook", "encourage_teacher"];
    let mut b = Builder::new()
        .states(states)
        .thetas(thetas)
        .actions(actions)
        .noop("noop")
        .initial("undecided", "stuck")
        .description(format!("Career choice; {RECONSTRUCTED}"));
    for s in states {
        for th in thetas {
            b = b
                .go(s, th, "noop", s, th)
                .go(s, th, "encourage_cook", "cook", "cook")
                .go(s, th, "encourage_teacher", "teacher", "teacher");
        }
    }
    let value = |th: &str, next: &str| match (th, next) {
        (_, "undecided") => 0,
        ("stuck", _) => 1,
        (a, b) if a == b => 2,
        _ => 1,
    };
    for th in thetas {
        for s in states {
            for a in actions {
                for next in states {
                    b = b.reward_to(th, s, a, next, int(value(th, next)));
                }
            }
        }
    }
    must(b)
}

pub fn disagreement() -> DrMdp {
    two_theta_switch(
        ["theta_0", "theta_delta"],
        ["noop", "a_delta"],
        [[5, 0], [25, 20]],
        "Two reward functions that disagree about influence",
    )
}

pub const FLEXIBLE_CAP: i64 = 30;

/// The flexible 2-reward family. `setup` selects the influence target of the
/// first step and the post-influence reward schedule.
pub fn flexible(setup: u8) -> Result<DrMdp> {
    let (dagger_is_delta, f): (bool, fn(i64) -> i64) = match setup {
        1 => (false, |s| 5 - s),
        2 => (false, |_| 13),
        3 => (true, |_| 10),
        4 => (true, |s| if s <= 1 { 10 } else { 10 - s }),
        5 => (false, |_| 10),
        6 => (true, |s| 10 - s),
        7 => (false, |s| if s <= 1 { 13 } else { 10 - s }),
        8 => (false, |s| 10 - s),
        9 => (false, |s| match s {
            ..=1 => 13,
            2 => -3,
            _ => 2,
        }),
        _ => {
            return Err(Error::Unknown {
                kind: "flexible setup",
                name: setup.to_string(),
            })
        }
    };
    let (nd, d) = ("theta_not_delta", "theta_delta");
    let mut states: Vec<String> = (0..=FLEXIBLE_CAP).map(|k| k.to_string()).collect();
    states.push("idle".into());
    let mut b = Builder::new()
        .states(states.clone())
        .thetas([nd, d])
        .actions(["noop", "a_delta"])
        .noop("noop")
        .initial("0", nd)
        .description(format!("Flexible 2-reward example, setup {setup}"))
        .go("0", nd, "noop", "idle", nd)
        .go(
            "0",
            nd,
            "a_delta",
            "1",
            if dagger_is_delta { d } else { nd },
        )
        .go("idle", nd, "noop", "idle", nd)
        .go("idle", nd, "a_delta", "idle", nd);
    let first_delta = if dagger_is_delta {
        1
    } else {
        b = b
            .go("1", nd, "a_delta", "2", d)
            .go("1", nd, "noop", "idle", nd);
        2
    };
    for k in first_delta..=FLEXIBLE_CAP {
        let next = (k + 1).min(FLEXIBLE_CAP).to_string();
        let ks = k.to_string();
        b = b
            .go(&ks, d, "noop", &next, d)
            .go(&ks, d, "a_delta", &next, d);
    }
    for s in &states {
        let index = s.parse::<i64>().unwrap_or(1);
        b = b
            .reward(nd, s, "noop", int(1))
            .reward(nd, s, "a_delta", int(-10))
            .reward(d, s, "noop", int(-10))
            .reward(d, s, "a_delta", int(f((index - 1).max(0))));
    }
    Ok(must(b))
}

/// Regime alternates between odd and even horizons; `epsilon` ∈ (0, 1).
pub fn infinite_flipping(epsilon: Q) -> DrMdp {
    let (t0, td) = ("theta_0", "theta_delta");
    let mut b = Builder::new()
        .states(["s0", "s1", "s2", "s3"])
        .thetas([t0, td])
        .actions(["noop", "a2"])
        .noop("noop")
        .initial("s0", t0)
        .description("Infinitely flipping optimality progression")
        .go("s0", t0, "noop", "s1", t0)
        .go("s0", t0, "a2", "s2", td);
    for a in ["noop", "a2"] {
        b = b
            .go("s2", td, a, "s2", td)
            .go("s1", t0, a, "s3", t0)
            .go("s3", t0, a, "s1", t0);
    }
    b = b
        .reward(t0, "s0", "noop", epsilon)
        .reward(t0, "s0", "a2", int(1));
    for a in ["noop", "a2"] {
        b = b
            .reward(t0, "s1", a, int(2))
            .reward(t0, "s3", a, int(0))
            .reward(t0, "s2", a, int(1))
            .reward(td, "s2", a, int(1));
        for s in ["s0", "s1", "s3"] {
            b = b.reward(td, s, a, int(0));
        }
    }
    must(b)
}

pub fn build(name: &str) -> Result<DrMdp> {
    let unknown = || Error::Unknown {
        kind: "example",
        name: name.to_string(),
    };
    Ok(match name {
        "conspiracy" => conspiracy(),
        "writers-curse" => writers_curse(),
        "clickbait" => clickbait(),
        "ai-trainer" => ai_trainer(),
        "dehydration" => dehydration(),
        "career-choice" => career_choice(),
        "disagreement" => disagreement(),
        "infinite-flipping" => infinite_flipping(crate::rational::ratio(1, 2)),
        _ => match name.strip_prefix("flexible:") {
            Some(k) => flexible(k.parse().map_err(|_| unknown())?)?,
            None => return Err(unknown()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn every_builtin_is_valid() {
        for name in NAMES {
            let m = build(name).unwrap();
            assert!(m.validate().is_empty(), "{name}: {:?}", m.validate());
        }
        assert!(build("flexible:10").is_err());
        assert!(build("nope").is_err());
    }

    #[test]
    fn stated_values() {
        let d = dehydration();
        let r = |th: &str, s: &str| {
            d.reward(d.theta(th).unwrap(), d.state(s).unwrap(), 0, 0)
                .clone()
        };
        assert_eq!(r("2", "1"), int(-1));
        assert_eq!(r("2", "2"), int(0));
        assert_eq!(r("3", "2"), int(-5));
        let w = writers_curse();
        let unhappy = w.theta("unhappy").unwrap();
        let poetry = w.state("poetry").unwrap();
        assert_eq!(w.reward(unhappy, poetry, 0, poetry), &int(-10));
        let f = flexible(8).unwrap();
        let d_ = f.theta("theta_delta").unwrap();
        assert_eq!(f.reward(d_, f.state("2").unwrap(), 1, 0), &int(9));
    }

    #[test]
    fn flipping_reachable_pairs() {
        let m = infinite_flipping(ratio(1, 2));
        let names: Vec<String> = m
            .reachable_pairs()
            .into_iter()
            .map(|p| m.pair_name(p))
            .collect();
        assert_eq!(names.len(), 4);
    }
}
