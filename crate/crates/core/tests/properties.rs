use drmdp::learn::{generate_dataset, learn_from_population, Declared};
use drmdp::objectives::expected_utility;
use drmdp::random::{random_instance_seeded, RandomConfig};
use drmdp::rational::ratio;
use drmdp::solvers::replan::replanning_policy;
use drmdp::solvers::{
    backward_induction, constrained_rt_optimal, enumerate_optimal, myopic_policies, StepReward,
};
use drmdp::{load_spec, save_spec, Error, Objective, Policy, SolveOptions};
use proptest::prelude::*;

fn small() -> RandomConfig {
    RandomConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spec_round_trip(seed in any::<u64>()) {
        let m = random_instance_seeded(seed, &small());
        let back = load_spec(&save_spec(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn learning_recovers_tables(seed in any::<u64>()) {
        let m = random_instance_seeded(seed, &small());
        let learned = learn_from_population(&generate_dataset(&m), &Declared::of(&m)).unwrap();
        prop_assert!(learned.coverage.is_complete());
        prop_assert_eq!(learned.instance.rows_raw(), m.rows_raw());
        prop_assert_eq!(learned.instance.rewards_raw(), m.rewards_raw());
    }

    #[test]
    fn backward_induction_matches_enumeration(seed in any::<u64>(), h in 1usize..=3) {
        let m = random_instance_seeded(seed, &small());
        let opts = SolveOptions::default();
        match enumerate_optimal(&m, h, Objective::RealTime, &opts) {
            Ok(e) => {
                let bi = backward_induction(&m, m.initial(), h, &StepReward::Current).unwrap();
                prop_assert_eq!(e.value.as_ref(), Some(bi.value()));
                prop_assert_eq!(e.first_actions(), bi.first_actions().to_vec());
            }
            Err(e) => prop_assert!(e.is_guard()),
        }
    }

    #[test]
    fn depth_one_replanning_is_myopic(seed in any::<u64>()) {
        let m = random_instance_seeded(seed, &small());
        let r = replanning_policy(&m, 1, Objective::RealTime, &SolveOptions::default()).unwrap();
        let my = myopic_policies(&m);
        for (pair, acts) in &r.allowed {
            prop_assert_eq!(Some(acts), my.allowed.get(pair));
        }
    }

    #[test]
    fn constrained_optimum_is_at_least_inaction(seed in any::<u64>(), h in 1usize..=3) {
        let m = random_instance_seeded(seed, &small());
        let opts = SolveOptions::default();
        let noop = expected_utility(&m, &Policy::noop(&m), h, Objective::RealTime, &opts.limits).unwrap();
        match constrained_rt_optimal(&m, h, &opts) {
            Ok(s) => prop_assert!(s.value.unwrap() >= noop),
            Err(Error::PolicyCap { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn positive_scaling_preserves_argmax(seed in any::<u64>(), num in 1i64..9, den in 1i64..9) {
        let m = random_instance_seeded(seed, &small());
        let c = ratio(num, den);
        let s = m.scale_rewards(&c);
        let opts = SolveOptions::default();
        for obj in [Objective::RealTime, Objective::FinalReward, Objective::InitialReward] {
            if let (Ok(a), Ok(b)) = (enumerate_optimal(&m, 2, obj, &opts), enumerate_optimal(&s, 2, obj, &opts)) {
                prop_assert_eq!(&a.members, &b.members);
                prop_assert_eq!(a.value.map(|v| v * &c), b.value);
            }
        }
    }
}
