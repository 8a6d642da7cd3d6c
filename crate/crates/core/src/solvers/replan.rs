//! Planning-depth interpretation: at every pair, act as if starting a fresh
//! depth-H episode there and take one of its optimal first actions.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::model::DrMdp;
use crate::objectives::Objective;

use super::backward::{backward_induction, StepReward};
use super::{episode_optimal, myopic_policies, SolveOptions, StationarySet};

/// Stationary replanning selections over the pairs reachable from the
/// instance's initial pair. InitialReward replans with θ₀ set to the current
/// θ; NaturalShifts uses the inaction marginals from the current pair.
pub fn replanning_policy(
    m: &DrMdp,
    depth: usize,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<StationarySet> {
    if objective == Objective::Myopic {
        return Ok(myopic_policies(m));
    }
    let mut allowed = BTreeMap::new();
    for pair in m.reachable_from(opts.start(m)) {
        let acts = if objective.is_additive() {
            let step = StepReward::for_objective(m, objective, pair, depth)?;
            backward_induction(m, pair, depth, &step)?
                .first_actions()
                .to_vec()
        } else {
            episode_optimal(m, depth, objective, &opts.from(pair))?.first_actions()
        };
        allowed.insert(pair, acts);
    }
    Ok(StationarySet { allowed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::catalog;

    #[test]
    fn depth_one_real_time_is_myopic() {
        for m in [
            catalog::conspiracy(),
            catalog::writers_curse(),
            catalog::clickbait(),
            catalog::dehydration(),
        ] {
            let r =
                replanning_policy(&m, 1, Objective::RealTime, &SolveOptions::default()).unwrap();
            assert_eq!(r, myopic_policies(&m));
        }
    }

    #[test]
    fn clickbait_real_time_beyond_one_is_news() {
        let m = catalog::clickbait();
        for h in 2..=4 {
            let r =
                replanning_policy(&m, h, Objective::RealTime, &SolveOptions::default()).unwrap();
            assert!(r.allowed.values().all(|v| v == &vec![m.noop()]));
        }
    }

    #[test]
    fn trainer_real_time_waits_while_tired_for_short_depths() {
        let m = catalog::ai_trainer();
        let tired = (0, m.theta("tired").unwrap());
        let nudge = m.action("nudge").unwrap();
        for h in 1..=4 {
            let r =
                replanning_policy(&m, h, Objective::RealTime, &SolveOptions::default()).unwrap();
            assert_eq!(r.allows(tired, m.noop()), h <= 2, "h={h}");
            assert_eq!(r.allows(tired, nudge), h >= 2, "h={h}");
        }
    }
}
