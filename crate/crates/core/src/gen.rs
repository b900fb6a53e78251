//! Seeded random instance generators for the randomized verification
//! suites: propositional theories with designated parity-definite open
//! sets, labeled example batches, random CNFs, and quasi-propositional
//! ground-fact first-order theories.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eval::classify;
use crate::firstorder::{
    compute_parity_fo, FoAtom, FoExample, FoLabeledExample, FoLiteral, FoPatchableTheory,
    FoTerm, FoTheory,
};
use crate::parity::compute_parity;
use crate::reductions::{Cnf, CnfLit};
use crate::theory::{
    BodyLiteral, ComponentId, Example, LabeledExample, PatchableTheory, Policy, Sign,
    Theory,
};

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct TheoryGenConfig {
    pub max_defined_props: usize,
    pub max_primitives: usize,
    pub max_clauses: usize,
    pub max_body: usize,
    pub allow_negation: bool,
}

impl Default for TheoryGenConfig {
    fn default() -> Self {
        TheoryGenConfig {
            max_defined_props: 4,
            max_primitives: 4,
            max_clauses: 10,
            max_body: 3,
            allow_negation: true,
        }
    }
}

/// A random acyclic theory: clause bodies only reference strictly
/// lower-ranked propositions or primitives, the root always heads the
/// first clause.
pub fn random_theory(rng: &mut ChaCha8Rng, cfg: &TheoryGenConfig) -> Theory {
    let n_props = rng.random_range(1..=cfg.max_defined_props);
    let n_prims = rng.random_range(1..=cfg.max_primitives);
    let props: Vec<String> = (0..n_props).map(|i| format!("p{i}")).collect();
    let prims: Vec<String> = (0..n_prims).map(|i| format!("x{i}")).collect();

    let n_clauses = rng.random_range(1..=cfg.max_clauses);
    let mut clauses: Vec<(String, Vec<BodyLiteral>)> = Vec::new();
    for ci in 0..n_clauses {
        let head_idx = if ci == 0 { 0 } else { rng.random_range(0..n_props) };
        let body_len = rng.random_range(0..=cfg.max_body);
        let mut body = Vec::new();
        for _ in 0..body_len {
            // Lower-ranked propositions keep the dependency graph acyclic.
            let deeper = n_props - head_idx - 1;
            let pick = rng.random_range(0..deeper + n_prims);
            let prop = if pick < deeper {
                props[head_idx + 1 + pick].clone()
            } else {
                prims[pick - deeper].clone()
            };
            let sign = if cfg.allow_negation && rng.random_bool(0.3) {
                Sign::Neg
            } else {
                Sign::Pos
            };
            body.push(BodyLiteral::new(sign, prop));
        }
        clauses.push((props[head_idx].clone(), body));
    }
    Theory::new("p0", prims, clauses).expect("generated theory must validate")
}

/// A random patchable theory whose open components all have defined parity.
pub fn random_parity_definite_pt(
    rng: &mut ChaCha8Rng,
    cfg: &TheoryGenConfig,
    max_open: usize,
    policy: Policy,
) -> PatchableTheory {
    let theory = random_theory(rng, cfg);
    let parity = compute_parity(&theory);
    let mut candidates: Vec<ComponentId> = theory
        .enumerate_components()
        .into_iter()
        .filter(|id| parity.get(id).is_defined())
        .collect();
    let target = rng.random_range(0..=max_open.min(candidates.len()));
    let mut open = Vec::new();
    for _ in 0..target {
        let i = rng.random_range(0..candidates.len());
        open.push(candidates.swap_remove(i));
    }
    PatchableTheory::new(theory, open, policy).expect("open ids resolve by construction")
}

/// Random examples over the theory's primitives. Half the labels follow
/// the theory's own classification, the rest are coin flips, so batches mix
/// satisfied, repairable, and unrepairable demands.
pub fn random_examples(
    rng: &mut ChaCha8Rng,
    theory: &Theory,
    count: usize,
) -> Vec<LabeledExample> {
    let prims: Vec<&String> = theory.primitives().iter().collect();
    (0..count)
        .map(|_| {
            let truths: Vec<String> = prims
                .iter()
                .filter(|_| rng.random_bool(0.5))
                .map(|s| s.to_string())
                .collect();
            let example = Example::new(truths);
            let label = if rng.random_bool(0.5) {
                classify(theory, &example)
            } else {
                rng.random_bool(0.5)
            };
            LabeledExample::new(example, label)
        })
        .collect()
}

/// A random CNF with the given variable and clause bounds; clauses have one
/// to four literals.
pub fn random_cnf(rng: &mut ChaCha8Rng, max_vars: usize, max_clauses: usize) -> Cnf {
    let n = rng.random_range(1..=max_vars);
    let variables: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let n_clauses = rng.random_range(1..=max_clauses);
    let clauses: Vec<Vec<CnfLit>> = (0..n_clauses)
        .map(|_| {
            let len = rng.random_range(1..=4usize.min(n));
            (0..len)
                .map(|_| CnfLit {
                    var: rng.random_range(0..n),
                    positive: rng.random_bool(0.5),
                })
                .collect()
        })
        .collect();
    Cnf::new(variables, clauses).expect("literals index generated variables")
}

#[derive(Debug, Clone)]
pub struct FoGenConfig {
    pub max_defined_preds: usize,
    pub max_fact_preds: usize,
    pub max_rules: usize,
    pub max_body: usize,
    pub arity: usize,
    pub constants: Vec<String>,
    pub allow_negation: bool,
}

impl Default for FoGenConfig {
    fn default() -> Self {
        FoGenConfig {
            max_defined_preds: 3,
            max_fact_preds: 3,
            max_rules: 6,
            max_body: 2,
            arity: 2,
            constants: vec!["0".into(), "1".into()],
            allow_negation: true,
        }
    }
}

/// A random quasi-propositional ground-fact first-order theory: every atom
/// carries the root's variable vector, and each fact predicate holds a
/// random set of ground tuples over the constant pool.
pub fn random_qp_fo(rng: &mut ChaCha8Rng, cfg: &FoGenConfig) -> FoTheory {
    let n_preds = rng.random_range(1..=cfg.max_defined_preds);
    let n_facts = rng.random_range(1..=cfg.max_fact_preds);
    let preds: Vec<String> = (0..n_preds).map(|i| format!("p{i}")).collect();
    let fact_preds: Vec<String> = (0..n_facts).map(|i| format!("f{i}")).collect();
    let vector: Vec<FoTerm> =
        (1..=cfg.arity).map(|i| FoTerm::Var(format!("X{i}"))).collect();

    let n_rules = rng.random_range(1..=cfg.max_rules);
    let mut rules: Vec<(FoAtom, Vec<FoLiteral>)> = Vec::new();
    for ri in 0..n_rules {
        let head_idx = if ri == 0 { 0 } else { rng.random_range(0..n_preds) };
        let body_len = rng.random_range(0..=cfg.max_body);
        let mut body = Vec::new();
        for _ in 0..body_len {
            let deeper = n_preds - head_idx - 1;
            let pick = rng.random_range(0..deeper + n_facts);
            let pred = if pick < deeper {
                preds[head_idx + 1 + pick].clone()
            } else {
                fact_preds[pick - deeper].clone()
            };
            let sign = if cfg.allow_negation && rng.random_bool(0.3) {
                Sign::Neg
            } else {
                Sign::Pos
            };
            body.push(FoLiteral::new(sign, FoAtom::new(pred, vector.clone())));
        }
        rules.push((FoAtom::new(preds[head_idx].clone(), vector.clone()), body));
    }

    let mut tuples: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..cfg.arity {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                cfg.constants.iter().map(move |c| {
                    let mut t = t.clone();
                    t.push(c.clone());
                    t
                })
            })
            .collect();
    }
    let mut facts = Vec::new();
    for f in &fact_preds {
        for t in &tuples {
            if rng.random_bool(0.4) {
                facts.push(FoAtom::new(
                    f.clone(),
                    t.iter().map(|c| FoTerm::Const(c.clone())).collect(),
                ));
            }
        }
    }
    FoTheory::new(("p0", cfg.arity), rules, facts).expect("generated theory must validate")
}

/// A random parity-definite patchable wrapper around [`random_qp_fo`].
pub fn random_qp_fo_pt(
    rng: &mut ChaCha8Rng,
    cfg: &FoGenConfig,
    max_open: usize,
) -> FoPatchableTheory {
    let theory = random_qp_fo(rng, cfg);
    let parity = compute_parity_fo(&theory);
    let mut candidates: Vec<ComponentId> = theory
        .enumerate_components()
        .into_iter()
        .filter(|id| parity.get(id).is_defined())
        .collect();
    let target = rng.random_range(0..=max_open.min(candidates.len()));
    let mut open = Vec::new();
    for _ in 0..target {
        let i = rng.random_range(0..candidates.len());
        open.push(candidates.swap_remove(i));
    }
    FoPatchableTheory::new(theory, open, Policy::Unrestricted)
        .expect("open ids resolve by construction")
}

/// Random first-order examples over the constant pool, labels mixed
/// between the theory's own classification and coin flips.
pub fn random_fo_examples(
    rng: &mut ChaCha8Rng,
    theory: &FoTheory,
    constants: &[String],
    count: usize,
) -> Vec<FoLabeledExample> {
    let arity = theory.root().1;
    (0..count)
        .map(|_| {
            let args: Vec<String> = (0..arity)
                .map(|_| constants[rng.random_range(0..constants.len())].clone())
                .collect();
            let example = FoExample::new(args);
            let label = if rng.random_bool(0.5) {
                crate::firstorder::classify_fo(theory, &example).unwrap()
            } else {
                rng.random_bool(0.5)
            };
            FoLabeledExample::new(example, label)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firstorder::validate_fo;
    use crate::parity::is_parity_definite;

    #[test]
    fn generated_theories_are_valid_and_seed_deterministic() {
        let cfg = TheoryGenConfig::default();
        for seed in 0..50 {
            let t1 = random_theory(&mut rng_for(seed), &cfg);
            let t2 = random_theory(&mut rng_for(seed), &cfg);
            assert_eq!(t1, t2);
        }
    }

    #[test]
    fn generated_patchable_theories_are_parity_definite() {
        let cfg = TheoryGenConfig::default();
        for seed in 0..100 {
            let pt = random_parity_definite_pt(
                &mut rng_for(seed),
                &cfg,
                6,
                Policy::Unrestricted,
            );
            assert!(is_parity_definite(&pt).0, "seed {seed}");
        }
    }

    #[test]
    fn generated_fo_theories_are_quasi_propositional() {
        let cfg = FoGenConfig::default();
        for seed in 0..50 {
            let t = random_qp_fo(&mut rng_for(seed), &cfg);
            let report = validate_fo(&t);
            assert!(report.quasi_propositional, "seed {seed}");
            assert!(report.ground_facts_only, "seed {seed}");
        }
    }
}
