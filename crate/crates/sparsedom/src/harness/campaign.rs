//! Seeded families of random scenarios.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harness::scenario::{Check, Generator, OperatorSpec, Route, Scenario, SpaceSpec, WeightSpec};

fn base(id: &str, space: SpaceSpec) -> Scenario {
    Scenario {
        id: id.into(),
        space,
        weight: WeightSpec::Identity,
        operator: OperatorSpec::Petermichl,
        p: 2.0,
        q: 1.0,
        r: 1.0,
        s: None,
        alpha: None,
        delta: 0.5,
        dim: 1,
        seed: 0,
        campaign: 1,
        checks: Vec::new(),
        route: Route::Measured,
        decompose: false,
        ladder: Vec::new(),
        input: None,
    }
}

/// `size` random instances for one check, all with id `<check>-campaign`
/// and seeds `seed, seed + 1, …`: random trees with 16 to 128 leaves,
/// `n ≤ 3`, random, power or near-degenerate weights, Petermichl or random
/// Haar multipliers, `p ∈ {1.5, 2, 3}`.
pub fn campaign_scenarios(check: Check, size: usize, seed: u64) -> Vec<Scenario> {
    let id = format!("{check:?}-campaign").to_lowercase();
    (0..size)
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0xca3b_a160);
            let leaves = rng.gen_range(16..=128);
            let max_arity = rng.gen_range(2..=3);
            let mut sc = base(&id, SpaceSpec::Generated { generate: Generator::RandomTree { leaves, max_arity, random_mass: true, seed: None } });
            sc.seed = s;
            sc.dim = rng.gen_range(1..=3);
            sc.p = *[1.5, 2.0, 3.0].choose(&mut rng).expect("nonempty");
            sc.weight = match rng.gen_range(0..4) {
                0 | 1 => WeightSpec::Random { spread: rng.gen_range(0.1..1.0) },
                2 => WeightSpec::Power { exponents: (0..sc.dim).map(|_| rng.gen_range(-0.9..0.9)).collect() },
                _ => WeightSpec::Degenerate { condition: 10f64.powf(rng.gen_range(1.0..6.0)), angle: rng.gen_range(0.0..3.0) },
            };
            sc.operator = if max_arity == 2 && rng.gen_bool(0.5) { OperatorSpec::Petermichl } else { OperatorSpec::Haar { amplitude: 1.0 } };
            sc.checks = vec![check];
            sc
        })
        .collect()
}

/// The Petermichl operator on a 64-leaf binary tree: a 2-dimensional
/// instance with the decomposition and the three bounds, and a scalar power
/// ladder for the A₂ growth.
pub fn demo_scenario() -> Vec<Scenario> {
    let tree = || SpaceSpec::Generated { generate: Generator::UniformTree { arity: 2, depth: 6 } };
    let mut main = base("demo-petermichl", tree());
    main.dim = 2;
    main.weight = WeightSpec::Random { spread: 0.5 };
    main.decompose = true;
    main.checks = vec![Check::Maximal, Check::Cz, Check::Endpoint];
    let mut ladder = base("demo-a2", tree());
    ladder.checks = vec![Check::A2];
    ladder.ladder = vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    vec![main, ladder]
}
