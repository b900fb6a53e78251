//! Per-example stability: is an example classified the same way by every
//! theory obtainable through revisions of the open components?
//!
//! For parity-definite patchable theories this reduces to two
//! classifications: `gamma_gen` deletes every open even component (maximal
//! generalization) and `gamma_spec` deletes every open odd component
//! (maximal specialization). An example is stably covered iff `gamma_spec`
//! covers it and stably uncovered iff `gamma_gen` does not. An exhaustive
//! oracle over per-example disabling choices is provided for cross-checks
//! on small instances.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::eval::{classify, classify_disabled, DisablingMap, DisablingSet};
use crate::parity::{compute_parity_reachable, is_parity_definite, Parity};
use crate::theory::{ComponentId, Example, PatchableTheory, Theory};

pub const DEFAULT_STABLE_BUDGET: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    /// Covered by every obtainable theory.
    StablyCovered,
    /// Uncovered by every obtainable theory.
    StablyUncovered,
    Unstable,
}

impl StabilityVerdict {
    /// The verdict matching a plain classification.
    pub fn of(covered: bool) -> Self {
        if covered {
            StabilityVerdict::StablyCovered
        } else {
            StabilityVerdict::StablyUncovered
        }
    }

    /// True when the verdict pins the example to the given classification.
    pub fn is_stably(self, covered: bool) -> bool {
        self == StabilityVerdict::of(covered)
    }
}

impl fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityVerdict::StablyCovered => write!(f, "T"),
            StabilityVerdict::StablyUncovered => write!(f, "F"),
            StabilityVerdict::Unstable => write!(f, "U"),
        }
    }
}

/// Non-primitive propositions reachable from the root through live clauses.
pub(crate) fn reachable_props(theory: &Theory) -> BTreeSet<String> {
    let mut reach = BTreeSet::new();
    let mut stack = vec![theory.root().to_string()];
    while let Some(prop) = stack.pop() {
        if theory.is_primitive(&prop) || !reach.insert(prop.clone()) {
            continue;
        }
        for clause in theory.clauses_for(&prop) {
            for (_, lit) in clause.live_body() {
                stack.push(lit.prop.clone());
            }
        }
    }
    reach
}

/// The two extreme theories and the stability verdict they induce, skipping
/// open components that provably cannot affect any classification (ones
/// addressing tombstoned structure or propositions unreachable from the
/// root). Patching internals call this on intermediate theories whose
/// deletions may have orphaned other open components; the public entry
/// points gate on full parity-definiteness first.
pub(crate) fn extremes(
    theory: &Theory,
    open: &BTreeSet<ComponentId>,
) -> Result<(Theory, Theory)> {
    let reach = reachable_props(theory);
    let parity = compute_parity_reachable(theory, &reach);
    let mut gen = theory.clone();
    let mut spec = theory.clone();
    for id in open {
        let relevant = match id {
            ComponentId::Prop(p) => reach.contains(p),
            ComponentId::Clause(h, _) => reach.contains(h) && theory.resolve(id).is_ok(),
            ComponentId::Lit(h, k, _) => {
                reach.contains(h)
                    && theory.resolve(id).is_ok()
                    && theory.resolve(&ComponentId::clause(h.clone(), *k)).is_ok()
            }
        };
        if !relevant {
            continue;
        }
        match parity.get(id) {
            Parity::Even => gen = gen.delete_component(id)?,
            Parity::Odd => spec = spec.delete_component(id)?,
            Parity::Undefined => {
                return Err(Error::NotParityDefinite(vec![id.clone()]))
            }
        }
    }
    Ok((gen, spec))
}

pub(crate) fn pstable_core(
    theory: &Theory,
    open: &BTreeSet<ComponentId>,
    example: &Example,
) -> Result<StabilityVerdict> {
    let (gen, spec) = extremes(theory, open)?;
    let in_gen = classify(&gen, example);
    let in_spec = classify(&spec, example);
    Ok(match (in_gen, in_spec) {
        (true, true) => StabilityVerdict::StablyCovered,
        (false, false) => StabilityVerdict::StablyUncovered,
        _ => StabilityVerdict::Unstable,
    })
}

fn require_parity_definite(pt: &PatchableTheory) -> Result<()> {
    let (ok, witness) = is_parity_definite(pt);
    if ok {
        Ok(())
    } else {
        Err(Error::NotParityDefinite(witness))
    }
}

/// The maximal generalization: every open even component deleted.
pub fn gamma_gen(pt: &PatchableTheory) -> Result<Theory> {
    require_parity_definite(pt)?;
    Ok(extremes(&pt.theory, &pt.open)?.0)
}

/// The maximal specialization: every open odd component deleted.
pub fn gamma_spec(pt: &PatchableTheory) -> Result<Theory> {
    require_parity_definite(pt)?;
    Ok(extremes(&pt.theory, &pt.open)?.1)
}

/// Linear-time stability for parity-definite patchable theories.
pub fn pstable(pt: &PatchableTheory, example: &Example) -> Result<StabilityVerdict> {
    require_parity_definite(pt)?;
    pstable_core(&pt.theory, &pt.open, example)
}

/// Exhaustive stability oracle: enumerates every per-example disabling
/// choice over the open components (clauses and propositions disabled or
/// not for this example; literals deleted or kept) and classifies under
/// each. Valid for any patchable theory within the budget, parity-definite
/// or not.
pub fn oracle_stable(pt: &PatchableTheory, example: &Example) -> Result<StabilityVerdict> {
    oracle_stable_with_budget(pt, example, DEFAULT_STABLE_BUDGET)
}

pub fn oracle_stable_with_budget(
    pt: &PatchableTheory,
    example: &Example,
    budget: usize,
) -> Result<StabilityVerdict> {
    let open: Vec<&ComponentId> = pt.open.iter().collect();
    if open.len() > budget {
        return Err(Error::BudgetExceeded { needed: open.len(), budget });
    }
    let mut any_covered = false;
    let mut any_uncovered = false;
    for mask in 0u64..(1u64 << open.len()) {
        let mut map = DisablingMap::new();
        for (i, id) in open.iter().enumerate() {
            let set = if mask & (1 << i) != 0 {
                DisablingSet::All
            } else {
                DisablingSet::None
            };
            map.insert((*id).clone(), set);
        }
        let covered = classify_disabled(&pt.theory, &pt.open, example, 0, &map)?;
        if covered {
            any_covered = true;
        } else {
            any_uncovered = true;
        }
        if any_covered && any_uncovered {
            return Ok(StabilityVerdict::Unstable);
        }
    }
    Ok(if any_covered {
        StabilityVerdict::StablyCovered
    } else {
        StabilityVerdict::StablyUncovered
    })
}
