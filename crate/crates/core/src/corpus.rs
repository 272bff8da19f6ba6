//! Seeded random models for property checks and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{arithmetic_genus, validate, ComponentId, DualGraphModel};
use crate::reduction::{is_minimal, minimal_snc_model};

#[derive(Clone, Copy, Debug)]
pub struct CorpusSpec {
    pub max_m: u32,
    pub max_components: usize,
    pub max_genus: i64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec { max_m: 5, max_components: 12, max_genus: 6 }
    }
}

/// A random semistable model (not necessarily valid or minimal).
pub fn random_semistable(rng: &mut impl Rng, spec: &CorpusSpec) -> DualGraphModel {
    let m = rng.random_range(2..=spec.max_m.max(2));
    let n = rng.random_range(1..=spec.max_components.max(1));
    let mut model = DualGraphModel::new(m);
    let mut budget = spec.max_genus;
    let ids: Vec<ComponentId> = (0..n)
        .map(|i| {
            let g = if budget > 0 && rng.random_bool(0.35) { rng.random_range(1..=budget.min(3)) } else { 0 };
            budget -= g;
            model.add_component(format!("V{i}"), g as u32, 1)
        })
        .collect();
    for i in 1..n {
        let j = rng.random_range(0..i);
        model.add_edge(None, ids[j], ids[i]).expect("components exist");
    }
    if n > 1 {
        let extra = rng.random_range(0..=budget.min(3));
        for _ in 0..extra {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            model.add_edge(None, ids[a], ids[b]).expect("components exist");
        }
    }
    let marks = rng.random_range(0..=n + 2);
    for k in 0..marks {
        let host = ids[rng.random_range(0..n)];
        let coeff = rng.random_range(1..m);
        model.add_mark(format!("P{k}"), host, coeff).expect("host exists");
    }
    model
}

/// A random valid minimal model within the bounds of `spec`.
pub fn random_minimal(rng: &mut impl Rng, spec: &CorpusSpec) -> DualGraphModel {
    loop {
        let candidate = random_semistable(rng, spec);
        if validate(&candidate).has_errors() {
            continue;
        }
        let Ok((minimal, _)) = minimal_snc_model(&candidate) else {
            continue;
        };
        let genus_ok = arithmetic_genus(&minimal).is_ok_and(|g| g <= spec.max_genus);
        if genus_ok && is_minimal(&minimal) {
            return minimal;
        }
    }
}

/// `count` models drawn from a generator seeded by `seed`.
pub fn minimal_corpus(seed: u64, count: usize, spec: &CorpusSpec) -> Vec<DualGraphModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_minimal(&mut rng, spec)).collect()
}
