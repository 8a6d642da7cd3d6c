//! Fixtures shared by the solver benchmarks.

use drmdp::examples::catalog;
use drmdp::random::{random_instance_seeded, RandomConfig};
use drmdp::DrMdp;

/// Built-in instances with the horizon each benchmark uses.
pub fn builtin_cases() -> Vec<(&'static str, DrMdp, usize)> {
    vec![
        ("conspiracy", catalog::conspiracy(), 5),
        ("writers-curse", catalog::writers_curse(), 4),
        ("clickbait", catalog::clickbait(), 4),
        ("dehydration", catalog::dehydration(), 4),
        (
            "flexible:8",
            catalog::flexible(8).expect("setup 8 exists"),
            4,
        ),
    ]
}

/// Stochastic random instances of the largest oracle size.
pub fn random_cases(n: u64) -> Vec<DrMdp> {
    (0..n)
        .map(|seed| random_instance_seeded(seed, &RandomConfig::default()))
        .collect()
}
