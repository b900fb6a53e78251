//! Benign-revision construction, the greedy patching loop, syntactic
//! revision synthesis, the soundness verifier, and a brute-force
//! repairability oracle.
//!
//! A revision to an open component is characterized by its disabling set:
//! the training examples for which the component stops contributing.
//! Patching walks the open components, finds a benign revision for each
//! (one that keeps the theory repairable once the component is closed),
//! applies it syntactically, and closes the component.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::eval::{classify, classify_disabled, DisablingMap, DisablingSet};
use crate::parity::is_parity_definite;
use crate::stability::pstable_core;
use crate::theory::{
    BodyLiteral, ComponentId, LabeledExample, PatchableTheory, Policy, Sign, Theory,
};

pub const DEFAULT_ORACLE_OPEN_BUDGET: usize = 8;
pub const DEFAULT_ORACLE_EXAMPLE_BUDGET: usize = 12;
pub const DEFAULT_ORACLE_DELETION_BUDGET: usize = 20;

/// The reserved namespace for synthesized auxiliary propositions.
pub const AUX_PREFIX: &str = "aux_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevisionKind {
    /// Disable for every example (literals, clauses, propositions).
    Delete,
    /// Disable for no example.
    Null,
    /// Disable for a chosen set of examples (clauses and propositions only).
    Disable,
}

impl fmt::Display for RevisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RevisionKind::Delete => write!(f, "delete"),
            RevisionKind::Null => write!(f, "null"),
            RevisionKind::Disable => write!(f, "disable"),
        }
    }
}

/// The syntactic form of an applied revision.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Synthesis {
    /// Fresh auxiliary proposition, if the revision needed one.
    pub aux_prop: Option<String>,
    /// Id of the negative literal appended by a clause revision.
    pub added_literal: Option<ComponentId>,
    /// Serialized text of every added clause, in order.
    pub added_clauses: Vec<String>,
}

/// One revision to one open component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Revision {
    pub target: ComponentId,
    pub kind: RevisionKind,
    /// Example indices disabled by a `Disable` revision.
    pub disabling: BTreeSet<usize>,
    pub synthesized: Option<Synthesis>,
}

impl Revision {
    pub fn new(target: ComponentId, kind: RevisionKind) -> Self {
        Revision { target, kind, disabling: BTreeSet::new(), synthesized: None }
    }

    pub fn disable(target: ComponentId, disabling: BTreeSet<usize>) -> Self {
        Revision { target, kind: RevisionKind::Disable, disabling, synthesized: None }
    }

    /// The example indices this revision disables its component for.
    pub fn disabling_indices(&self, example_count: usize) -> BTreeSet<usize> {
        match self.kind {
            RevisionKind::Delete => (0..example_count).collect(),
            RevisionKind::Null => BTreeSet::new(),
            RevisionKind::Disable => self.disabling.clone(),
        }
    }
}

/// The examples forcing a component to be disabled (obstructive) and the
/// ones forcing it to stay enabled (protected).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionReport {
    pub obstructive: BTreeSet<usize>,
    pub protected: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnrepairableWitness {
    /// Obstructive and protected demands clash at one component.
    Conflict {
        component: ComponentId,
        obstructive: Vec<usize>,
        protected: Vec<usize>,
    },
    /// Examples misclassified under every admissible revision choice.
    Exhausted { misclassified: Vec<usize> },
}

impl fmt::Display for UnrepairableWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(xs: &[usize]) -> String {
            xs.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        }
        match self {
            UnrepairableWitness::Conflict { component, obstructive, protected } => write!(
                f,
                "conflict {component} obstructive={} protected={}",
                list(obstructive),
                list(protected)
            ),
            UnrepairableWitness::Exhausted { misclassified } => {
                write!(f, "exhausted misclassified={}", list(misclassified))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PbenignOutcome {
    Benign(Revision),
    Unrepairable(UnrepairableWitness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatchOutcome {
    Repaired { revisions: Vec<Revision>, theory: Theory },
    Unrepairable(UnrepairableWitness),
}

impl PatchOutcome {
    pub fn is_repaired(&self) -> bool {
        matches!(self, PatchOutcome::Repaired { .. })
    }
}

fn require_parity_definite(pt: &PatchableTheory) -> Result<()> {
    let (ok, witness) = is_parity_definite(pt);
    if ok {
        Ok(())
    } else {
        Err(Error::NotParityDefinite(witness))
    }
}

/// Obstructive and protected example sets for component `c`: an example is
/// obstructive when leaving `c` in place stably misclassifies it, and
/// protected when deleting `c` stably misclassifies it.
pub fn compute_obstruction(
    theory: &Theory,
    open: &BTreeSet<ComponentId>,
    c: &ComponentId,
    es: &[LabeledExample],
) -> Result<ObstructionReport> {
    let mut rest = open.clone();
    rest.remove(c);
    let deleted = theory.delete_component(c)?;
    let mut obstructive = BTreeSet::new();
    let mut protected = BTreeSet::new();
    for (i, le) in es.iter().enumerate() {
        if pstable_core(theory, &rest, &le.example)?.is_stably(!le.label) {
            obstructive.insert(i);
        }
        if pstable_core(&deleted, &rest, &le.example)?.is_stably(!le.label) {
            protected.insert(i);
        }
    }
    Ok(ObstructionReport { obstructive, protected })
}

fn pbenign_core(
    theory: &Theory,
    open: &BTreeSet<ComponentId>,
    c: &ComponentId,
    es: &[LabeledExample],
) -> Result<PbenignOutcome> {
    if !open.contains(c) {
        return Err(Error::ClosedComponent(c.clone()));
    }
    let report = compute_obstruction(theory, open, c, es)?;
    let conflict = || {
        PbenignOutcome::Unrepairable(UnrepairableWitness::Conflict {
            component: c.clone(),
            obstructive: report.obstructive.iter().copied().collect(),
            protected: report.protected.iter().copied().collect(),
        })
    };
    if !report.obstructive.is_disjoint(&report.protected) {
        return Ok(conflict());
    }
    if c.is_lit() {
        // A literal admits only deletion or the null revision.
        if report.obstructive.is_empty() {
            return Ok(PbenignOutcome::Benign(Revision::new(c.clone(), RevisionKind::Null)));
        }
        if report.protected.is_empty() {
            return Ok(PbenignOutcome::Benign(Revision::new(c.clone(), RevisionKind::Delete)));
        }
        return Ok(conflict());
    }
    // Minimal disabling set: exactly the obstructive examples.
    Ok(PbenignOutcome::Benign(Revision::disable(c.clone(), report.obstructive)))
}

/// Finds a benign revision for open component `c`, or reports that none
/// exists (which makes the whole patchable theory unrepairable).
pub fn pbenign(
    pt: &PatchableTheory,
    c: &ComponentId,
    es: &[LabeledExample],
) -> Result<PbenignOutcome> {
    require_parity_definite(pt)?;
    pbenign_core(&pt.theory, &pt.open, c, es)
}

fn aux_base_name(target: &ComponentId) -> String {
    match target {
        ComponentId::Prop(p) => format!("{AUX_PREFIX}p_{p}"),
        ComponentId::Clause(h, k) => format!("{AUX_PREFIX}c_{h}_{k}"),
        ComponentId::Lit(h, k, j) => format!("{AUX_PREFIX}l_{h}_{k}_{j}"),
    }
}

fn clause_text(head: &str, body: &[BodyLiteral]) -> String {
    if body.is_empty() {
        return format!("{head}.");
    }
    let parts: Vec<String> = body
        .iter()
        .map(|l| match l.sign {
            Sign::Pos => l.prop.clone(),
            Sign::Neg => format!("not {}", l.prop),
        })
        .collect();
    format!("{head} :- {}.", parts.join(", "))
}

/// Applies one revision syntactically.
///
/// `Delete` removes the component, `Null` leaves the theory untouched, and
/// `Disable` adds a fresh auxiliary proposition whose simple defining
/// clauses are satisfied exactly on the disabled examples: a clause
/// revision appends `not aux` to the clause body, a proposition revision
/// appends `p :- aux`. Each disabled example contributes one clause whose
/// body is the full conjunction of that example's primitive literals.
pub fn synthesize(
    theory: &Theory,
    revision: &Revision,
    es: &[LabeledExample],
) -> Result<(Theory, Synthesis)> {
    match revision.kind {
        RevisionKind::Null => {
            theory.resolve(&revision.target)?;
            Ok((theory.clone(), Synthesis::default()))
        }
        RevisionKind::Delete => {
            let next = theory.delete_component(&revision.target)?;
            Ok((next, Synthesis::default()))
        }
        RevisionKind::Disable => {
            if revision.target.is_lit() {
                return Err(Error::LitDisablingSet(revision.target.clone()));
            }
            theory.resolve(&revision.target)?;
            if let Some(&i) = revision.disabling.iter().find(|&&i| i >= es.len()) {
                return Err(Error::ExampleIndexOutOfRange(i));
            }
            let aux = aux_base_name(&revision.target);
            if theory.has_name(&aux) {
                return Err(Error::FreshNameCollision(aux));
            }
            let mut next = theory.clone();
            let mut synthesis = Synthesis { aux_prop: Some(aux.clone()), ..Default::default() };
            match &revision.target {
                ComponentId::Clause(h, k) => {
                    let lit_id =
                        next.append_literal(h, *k, BodyLiteral::negative(aux.clone()))?;
                    synthesis.added_literal = Some(lit_id);
                }
                ComponentId::Prop(p) => {
                    next.register_prop(aux.clone());
                    let body = vec![BodyLiteral::positive(aux.clone())];
                    synthesis.added_clauses.push(clause_text(p, &body));
                    next.append_clause(p.clone(), body);
                }
                ComponentId::Lit(..) => unreachable!(),
            }
            let primitives: Vec<String> = theory.primitives().iter().cloned().collect();
            for &i in &revision.disabling {
                let body: Vec<BodyLiteral> = primitives
                    .iter()
                    .map(|p| {
                        if es[i].example.true_primitives.contains(p) {
                            BodyLiteral::positive(p.clone())
                        } else {
                            BodyLiteral::negative(p.clone())
                        }
                    })
                    .collect();
                synthesis.added_clauses.push(clause_text(&aux, &body));
                next.append_clause(aux.clone(), body);
            }
            Ok((next, synthesis))
        }
    }
}

/// Greedy patching: performs a benign revision on each open component in
/// deterministic order (literals, then clauses, then propositions), closing
/// each as it goes. Requires the unrestricted policy and a parity-definite
/// open set.
pub fn ppatch(pt: &PatchableTheory, es: &[LabeledExample]) -> Result<PatchOutcome> {
    ppatch_with_order(pt, es, &pt.ordered_open())
}

/// [`ppatch`] with an explicit processing order over the open components;
/// `order` must enumerate each open component exactly once.
pub fn ppatch_with_order(
    pt: &PatchableTheory,
    es: &[LabeledExample],
    order: &[ComponentId],
) -> Result<PatchOutcome> {
    if pt.policy != Policy::Unrestricted {
        return Err(Error::WrongPolicy { required: "unrestricted" });
    }
    for le in es {
        le.example.validate(&pt.theory)?;
    }
    require_parity_definite(pt)?;
    let as_set: BTreeSet<&ComponentId> = order.iter().collect();
    if as_set.len() != order.len() || order.len() != pt.open.len() {
        if let Some(id) = order.iter().find(|id| !pt.open.contains(id)) {
            return Err(Error::ClosedComponent((*id).clone()));
        }
        if let Some(id) = pt.open.iter().find(|id| !as_set.contains(id)) {
            return Err(Error::ClosedComponent(id.clone()));
        }
    }

    let mut theory = pt.theory.clone();
    let mut open = pt.open.clone();
    let mut revisions = Vec::new();
    for c in order.iter().cloned() {
        match pbenign_core(&theory, &open, &c, es)? {
            PbenignOutcome::Unrepairable(w) => return Ok(PatchOutcome::Unrepairable(w)),
            PbenignOutcome::Benign(mut revision) => {
                let (next, synthesis) = synthesize(&theory, &revision, es)?;
                revision.synthesized = Some(synthesis);
                theory = next;
                open.remove(&c);
                revisions.push(revision);
            }
        }
    }

    // With no open components left, classification is stability; any
    // remaining misclassification means the input was unrepairable.
    let misclassified: Vec<usize> = es
        .iter()
        .enumerate()
        .filter(|(_, le)| classify(&theory, &le.example) != le.label)
        .map(|(i, _)| i)
        .collect();
    if !misclassified.is_empty() {
        return Ok(PatchOutcome::Unrepairable(UnrepairableWitness::Exhausted {
            misclassified,
        }));
    }
    Ok(PatchOutcome::Repaired { revisions, theory })
}

/// Per-component verification record for one revision sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentCheck {
    pub component: ComponentId,
    pub obstructive: BTreeSet<usize>,
    pub protected: BTreeSet<usize>,
    pub disabling: BTreeSet<usize>,
    /// Obstructive set contained in the disabling set.
    pub containment_pass: bool,
    /// Protected set disjoint from the disabling set.
    pub disjoint_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchReport {
    pub components: Vec<ComponentCheck>,
    /// Per-example classification agreement on the final theory.
    pub classification: Vec<bool>,
    pub final_theory: Theory,
    pub pass: bool,
}

/// Checks a revision sequence against the soundness conditions: the final
/// theory must classify every example correctly, and the last revision to
/// each component must disable it for every obstructive example and for no
/// protected example, with both sets recomputed at the pre-revision state.
pub fn verify_patch(
    pt: &PatchableTheory,
    revisions: &[Revision],
    es: &[LabeledExample],
) -> Result<PatchReport> {
    for r in revisions {
        if !pt.open.contains(&r.target) {
            return Err(Error::ClosedComponent(r.target.clone()));
        }
    }
    let mut last: BTreeMap<&ComponentId, usize> = BTreeMap::new();
    for (i, r) in revisions.iter().enumerate() {
        last.insert(&r.target, i);
    }

    let mut theory = pt.theory.clone();
    let mut open = pt.open.clone();
    let mut components = Vec::new();
    for (i, r) in revisions.iter().enumerate() {
        let is_last = last.get(&r.target) == Some(&i);
        if is_last {
            let report = compute_obstruction(&theory, &open, &r.target, es)?;
            let disabling = r.disabling_indices(es.len());
            components.push(ComponentCheck {
                component: r.target.clone(),
                containment_pass: report.obstructive.is_subset(&disabling),
                disjoint_pass: report.protected.is_disjoint(&disabling),
                obstructive: report.obstructive,
                protected: report.protected,
                disabling,
            });
        }
        let (next, _) = synthesize(&theory, r, es)?;
        theory = next;
        if is_last {
            open.remove(&r.target);
        }
    }

    let classification: Vec<bool> = es
        .iter()
        .map(|le| classify(&theory, &le.example) == le.label)
        .collect();
    let pass = classification.iter().all(|&b| b)
        && components.iter().all(|c| c.containment_pass && c.disjoint_pass);
    Ok(PatchReport { components, classification, final_theory: theory, pass })
}

/// Example indices grouped by identical primitive assignment. Revisions can
/// only key on assignments, so index-distinct duplicates share every
/// disabling choice.
fn assignment_groups(es: &[LabeledExample]) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<&BTreeSet<String>, Vec<usize>> = BTreeMap::new();
    for (i, le) in es.iter().enumerate() {
        groups.entry(&le.example.true_primitives).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Exhaustive repairability oracle.
///
/// Under the unrestricted policy, clauses and propositions range over all
/// disabling subsets of the examples and literals over delete/keep; per
/// assignment the choices are independent, so the search is per-group with
/// literal choices shared globally. Under deletion-only, every open
/// component ranges over delete/keep.
pub fn oracle_patch(pt: &PatchableTheory, es: &[LabeledExample]) -> Result<PatchOutcome> {
    match pt.policy {
        Policy::Unrestricted => oracle_patch_with_budget(
            pt,
            es,
            DEFAULT_ORACLE_OPEN_BUDGET,
            DEFAULT_ORACLE_EXAMPLE_BUDGET,
        ),
        Policy::DeletionOnly => {
            oracle_patch_with_budget(pt, es, DEFAULT_ORACLE_DELETION_BUDGET, usize::MAX)
        }
    }
}

pub fn oracle_patch_with_budget(
    pt: &PatchableTheory,
    es: &[LabeledExample],
    open_budget: usize,
    example_budget: usize,
) -> Result<PatchOutcome> {
    if pt.open.len() > open_budget {
        return Err(Error::BudgetExceeded { needed: pt.open.len(), budget: open_budget });
    }
    if pt.policy == Policy::Unrestricted && es.len() > example_budget {
        return Err(Error::BudgetExceeded { needed: es.len(), budget: example_budget });
    }
    for le in es {
        le.example.validate(&pt.theory)?;
    }

    let groups = assignment_groups(es);
    if let Some(g) = groups
        .iter()
        .find(|g| g.iter().any(|&i| es[i].label) && g.iter().any(|&i| !es[i].label))
    {
        // The same assignment labeled both ways can never be satisfied.
        return Ok(PatchOutcome::Unrepairable(UnrepairableWitness::Exhausted {
            misclassified: g.clone(),
        }));
    }

    let outcome = match pt.policy {
        Policy::DeletionOnly => oracle_deletion_only(pt, es, &groups)?,
        Policy::Unrestricted => oracle_unrestricted(pt, es, &groups)?,
    };
    if let PatchOutcome::Repaired { theory, .. } = &outcome {
        for le in es {
            assert_eq!(
                classify(theory, &le.example),
                le.label,
                "oracle synthesis must reproduce the disabling pattern"
            );
        }
    }
    Ok(outcome)
}

fn map_for_mask(ids: &[ComponentId], mask: u64) -> DisablingMap {
    let mut map = DisablingMap::new();
    for (b, id) in ids.iter().enumerate() {
        let set = if mask & (1 << b) != 0 { DisablingSet::All } else { DisablingSet::None };
        map.insert(id.clone(), set);
    }
    map
}

fn stably_misclassified_groups(
    pt: &PatchableTheory,
    es: &[LabeledExample],
    groups: &[Vec<usize>],
) -> Result<Vec<usize>> {
    let ids: Vec<ComponentId> = pt.open.iter().cloned().collect();
    let mut out = Vec::new();
    for group in groups {
        let rep = group[0];
        let mut fixable = false;
        for mask in 0u64..(1u64 << ids.len()) {
            let map = map_for_mask(&ids, mask);
            let covered =
                classify_disabled(&pt.theory, &pt.open, &es[rep].example, rep, &map)?;
            if covered == es[rep].label {
                fixable = true;
                break;
            }
        }
        if !fixable {
            out.extend(group.iter().copied());
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn ordered_revision_targets(pt: &PatchableTheory) -> Vec<ComponentId> {
    pt.ordered_open()
}

fn oracle_deletion_only(
    pt: &PatchableTheory,
    es: &[LabeledExample],
    groups: &[Vec<usize>],
) -> Result<PatchOutcome> {
    let ids: Vec<ComponentId> = pt.open.iter().cloned().collect();
    for mask in 0u64..(1u64 << ids.len()) {
        let map = map_for_mask(&ids, mask);
        let mut all_ok = true;
        for group in groups {
            let rep = group[0];
            let covered =
                classify_disabled(&pt.theory, &pt.open, &es[rep].example, rep, &map)?;
            if covered != es[rep].label {
                all_ok = false;
                break;
            }
        }
        if !all_ok {
            continue;
        }
        let deleted: BTreeSet<&ComponentId> = ids
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << *b) != 0)
            .map(|(_, id)| id)
            .collect();
        let mut revisions = Vec::new();
        let mut theory = pt.theory.clone();
        for target in ordered_revision_targets(pt) {
            let kind = if deleted.contains(&target) {
                RevisionKind::Delete
            } else {
                RevisionKind::Null
            };
            let mut revision = Revision::new(target, kind);
            let (next, synthesis) = synthesize(&theory, &revision, es)?;
            revision.synthesized = Some(synthesis);
            theory = next;
            revisions.push(revision);
        }
        return Ok(PatchOutcome::Repaired { revisions, theory });
    }
    Ok(PatchOutcome::Unrepairable(UnrepairableWitness::Exhausted {
        misclassified: stably_misclassified_groups(pt, es, groups)?,
    }))
}

fn oracle_unrestricted(
    pt: &PatchableTheory,
    es: &[LabeledExample],
    groups: &[Vec<usize>],
) -> Result<PatchOutcome> {
    let lits: Vec<ComponentId> =
        pt.open.iter().filter(|id| id.is_lit()).cloned().collect();
    let cps: Vec<ComponentId> =
        pt.open.iter().filter(|id| !id.is_lit()).cloned().collect();

    for lit_mask in 0u64..(1u64 << lits.len()) {
        let mut group_choice: Vec<u64> = Vec::with_capacity(groups.len());
        let mut feasible = true;
        for group in groups {
            let rep = group[0];
            let mut found = None;
            for cp_mask in 0u64..(1u64 << cps.len()) {
                let mut map = map_for_mask(&lits, lit_mask);
                for (b, id) in cps.iter().enumerate() {
                    let set = if cp_mask & (1 << b) != 0 {
                        DisablingSet::All
                    } else {
                        DisablingSet::None
                    };
                    map.insert(id.clone(), set);
                }
                let covered =
                    classify_disabled(&pt.theory, &pt.open, &es[rep].example, rep, &map)?;
                if covered == es[rep].label {
                    found = Some(cp_mask);
                    break;
                }
            }
            match found {
                Some(m) => group_choice.push(m),
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if !feasible {
            continue;
        }

        let lit_deleted: BTreeSet<&ComponentId> = lits
            .iter()
            .enumerate()
            .filter(|(b, _)| lit_mask & (1 << *b) != 0)
            .map(|(_, id)| id)
            .collect();
        let mut disabling: BTreeMap<&ComponentId, BTreeSet<usize>> = BTreeMap::new();
        for (gi, group) in groups.iter().enumerate() {
            for (b, id) in cps.iter().enumerate() {
                if group_choice[gi] & (1 << b) != 0 {
                    disabling.entry(id).or_default().extend(group.iter().copied());
                }
            }
        }

        let mut revisions = Vec::new();
        let mut theory = pt.theory.clone();
        for target in ordered_revision_targets(pt) {
            let mut revision = if target.is_lit() {
                let kind = if lit_deleted.contains(&target) {
                    RevisionKind::Delete
                } else {
                    RevisionKind::Null
                };
                Revision::new(target, kind)
            } else {
                Revision::disable(
                    target.clone(),
                    disabling.get(&target).cloned().unwrap_or_default(),
                )
            };
            let (next, synthesis) = synthesize(&theory, &revision, es)?;
            revision.synthesized = Some(synthesis);
            theory = next;
            revisions.push(revision);
        }
        return Ok(PatchOutcome::Repaired { revisions, theory });
    }
    Ok(PatchOutcome::Unrepairable(UnrepairableWitness::Exhausted {
        misclassified: stably_misclassified_groups(pt, es, groups)?,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_examples, parse_open, parse_theory};
    use crate::theory::Example;

    const CUP: &str = include_str!("../tests/fixtures/cup.theory");
    const CUP_OPEN: &str = include_str!("../tests/fixtures/cup.open");
    const CUP_EXAMPLES: &str = include_str!("../tests/fixtures/cup_patch.examples");

    fn cup_pt() -> PatchableTheory {
        let theory = parse_theory(CUP).unwrap();
        let open = parse_open(CUP_OPEN).unwrap();
        PatchableTheory::new(theory, open, Policy::Unrestricted).unwrap()
    }

    fn cup_examples() -> Vec<LabeledExample> {
        parse_examples(CUP_EXAMPLES).unwrap()
    }

    fn e5() -> Vec<LabeledExample> {
        parse_examples("+ has_bottom light_weight has_concavity upward_concavity\n").unwrap()
    }

    fn ceramic_lit() -> ComponentId {
        ComponentId::lit("graspable", 1, 1)
    }

    fn first_graspable_clause() -> ComponentId {
        ComponentId::clause("graspable", 0)
    }

    #[test]
    fn pbenign_deletes_the_open_literal() {
        let pt = cup_pt();
        let out = pbenign(&pt, &ceramic_lit(), &cup_examples()).unwrap();
        match out {
            PbenignOutcome::Benign(r) => {
                assert_eq!(r.kind, RevisionKind::Delete);
                assert_eq!(r.target, ceramic_lit());
            }
            other => panic!("expected benign deletion, got {other:?}"),
        }
    }

    #[test]
    fn pbenign_disables_the_open_clause_for_the_negative_example() {
        let pt = cup_pt();
        let es = cup_examples();
        let report =
            compute_obstruction(&pt.theory, &pt.open, &first_graspable_clause(), &es).unwrap();
        assert_eq!(report.obstructive, [1].into_iter().collect());
        assert_eq!(report.protected, [2, 3].into_iter().collect());
        let out = pbenign(&pt, &first_graspable_clause(), &es).unwrap();
        match out {
            PbenignOutcome::Benign(r) => {
                assert_eq!(r.kind, RevisionKind::Disable);
                assert_eq!(r.disabling, [1].into_iter().collect());
            }
            other => panic!("expected benign disable, got {other:?}"),
        }
    }

    #[test]
    fn pbenign_fails_on_the_stably_misclassified_example() {
        let pt = cup_pt();
        for c in [ceramic_lit(), first_graspable_clause()] {
            let out = pbenign(&pt, &c, &e5()).unwrap();
            assert!(
                matches!(out, PbenignOutcome::Unrepairable(_)),
                "component {c} should admit no benign revision for the stable example"
            );
        }
    }

    #[test]
    fn ppatch_repairs_the_fixture() {
        let pt = cup_pt();
        let es = cup_examples();
        let out = ppatch(&pt, &es).unwrap();
        let (revisions, theory) = match out {
            PatchOutcome::Repaired { revisions, theory } => (revisions, theory),
            other => panic!("expected repair, got {other:?}"),
        };
        assert_eq!(revisions.len(), 2);
        assert_eq!(revisions[0].target, ceramic_lit());
        assert_eq!(revisions[0].kind, RevisionKind::Delete);
        assert_eq!(revisions[1].target, first_graspable_clause());
        assert_eq!(revisions[1].kind, RevisionKind::Disable);
        assert_eq!(revisions[1].disabling, [1].into_iter().collect());
        for le in &es {
            assert_eq!(classify(&theory, &le.example), le.label);
        }
    }

    #[test]
    fn ppatch_fails_on_the_stable_example() {
        let pt = cup_pt();
        let out = ppatch(&pt, &e5()).unwrap();
        assert!(matches!(out, PatchOutcome::Unrepairable(_)));
    }

    #[test]
    fn ppatch_with_no_open_components() {
        let theory = parse_theory(CUP).unwrap();
        let pt = PatchableTheory::new(theory, [], Policy::Unrestricted).unwrap();
        // Labels matching the theory's own classification: trivially repaired.
        let consistent = parse_examples(
            "- has_bottom light_weight has_concavity upward_concavity small dry\n\
             + has_bottom light_weight has_straw has_handle has_concavity small\n",
        )
        .unwrap();
        match ppatch(&pt, &consistent).unwrap() {
            PatchOutcome::Repaired { revisions, .. } => assert!(revisions.is_empty()),
            other => panic!("expected repair, got {other:?}"),
        }
        // A wrong label with nothing open is unrepairable.
        match ppatch(&pt, &e5()).unwrap() {
            PatchOutcome::Unrepairable(UnrepairableWitness::Exhausted { misclassified }) => {
                assert_eq!(misclassified, vec![0]);
            }
            other => panic!("expected exhausted witness, got {other:?}"),
        }
    }

    #[test]
    fn verify_accepts_ppatch_output() {
        let pt = cup_pt();
        let es = cup_examples();
        let out = ppatch(&pt, &es).unwrap();
        let revisions = match out {
            PatchOutcome::Repaired { revisions, .. } => revisions,
            other => panic!("expected repair, got {other:?}"),
        };
        let report = verify_patch(&pt, &revisions, &es).unwrap();
        assert!(report.pass, "report: {report:?}");
    }

    #[test]
    fn verify_rejects_the_bare_clause_deletion() {
        let pt = cup_pt();
        let es = parse_examples(
            "- has_bottom light_weight has_straw has_handle has_concavity upward_concavity small ceramic\n\
             + has_bottom light_weight has_straw has_handle has_concavity small\n\
             + has_bottom light_weight has_straw has_handle has_concavity upward_concavity small\n",
        )
        .unwrap();
        let revisions = vec![Revision::new(first_graspable_clause(), RevisionKind::Delete)];
        let report = verify_patch(&pt, &revisions, &es).unwrap();
        assert!(!report.pass);
        assert!(!report.classification[1]);
        assert!(!report.classification[2]);
        let check = &report.components[0];
        assert!(check.containment_pass);
        assert!(!check.disjoint_pass);
        assert_eq!(check.protected, [1, 2].into_iter().collect());
    }

    #[test]
    fn verify_empty_revision_list_on_consistent_examples() {
        let pt = cup_pt();
        let consistent = parse_examples(
            "+ has_bottom light_weight has_straw has_handle has_concavity small\n",
        )
        .unwrap();
        let report = verify_patch(&pt, &[], &consistent).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn verify_rejects_closed_targets() {
        let pt = cup_pt();
        let revisions = vec![Revision::new(ComponentId::clause("open", 0), RevisionKind::Delete)];
        let err = verify_patch(&pt, &revisions, &cup_examples()).unwrap_err();
        assert!(matches!(err, Error::ClosedComponent(_)));
    }

    #[test]
    fn oracle_agrees_on_the_fixture() {
        let pt = cup_pt();
        assert!(oracle_patch(&pt, &cup_examples()).unwrap().is_repaired());
        assert!(!oracle_patch(&pt, &e5()).unwrap().is_repaired());
    }

    #[test]
    fn deletion_only_literal_conflict_is_unrepairable() {
        let theory = parse_theory("root r.\nr :- s.\ns :- a, b.\n").unwrap();
        let pt = PatchableTheory::new(
            theory,
            [ComponentId::lit("s", 0, 0), ComponentId::lit("s", 0, 1)],
            Policy::DeletionOnly,
        )
        .unwrap();
        let es = parse_examples("- a\n- b\n+\n").unwrap();
        assert!(!oracle_patch(&pt, &es).unwrap().is_repaired());
    }

    #[test]
    fn synthesize_disable_matches_abstract_semantics() {
        let pt = cup_pt();
        let es = cup_examples();
        let revision = Revision::disable(first_graspable_clause(), [1].into_iter().collect());
        let (revised, synthesis) = synthesize(&pt.theory, &revision, &es).unwrap();
        assert_eq!(synthesis.aux_prop.as_deref(), Some("aux_c_graspable_0"));
        assert_eq!(synthesis.added_clauses.len(), 1);
        let mut map = DisablingMap::new();
        map.insert(
            first_graspable_clause(),
            DisablingSet::Examples([1].into_iter().collect()),
        );
        for (i, le) in es.iter().enumerate() {
            let abstract_result =
                classify_disabled(&pt.theory, &pt.open, &le.example, i, &map).unwrap();
            assert_eq!(classify(&revised, &le.example), abstract_result, "example {i}");
        }
    }

    #[test]
    fn disable_for_all_examples_acts_like_deletion() {
        let pt = cup_pt();
        let es = cup_examples();
        let all: BTreeSet<usize> = (0..es.len()).collect();
        let (disabled, _) =
            synthesize(&pt.theory, &Revision::disable(first_graspable_clause(), all), &es)
                .unwrap();
        let deleted = pt.theory.delete_component(&first_graspable_clause()).unwrap();
        for le in &es {
            assert_eq!(classify(&disabled, &le.example), classify(&deleted, &le.example));
        }
    }

    #[test]
    fn disable_for_no_examples_acts_like_null() {
        let pt = cup_pt();
        let es = cup_examples();
        let (disabled, _) = synthesize(
            &pt.theory,
            &Revision::disable(first_graspable_clause(), BTreeSet::new()),
            &es,
        )
        .unwrap();
        for le in &es {
            assert_eq!(classify(&disabled, &le.example), classify(&pt.theory, &le.example));
        }
    }

    #[test]
    fn fresh_name_collision_is_reported() {
        let theory =
            parse_theory("root r.\nr :- s.\ns :- x.\naux_c_s_0 :- x.\n").unwrap();
        let revision = Revision::disable(ComponentId::clause("s", 0), BTreeSet::new());
        let err = synthesize(&theory, &revision, &[]).unwrap_err();
        assert_eq!(err, Error::FreshNameCollision("aux_c_s_0".to_string()));
    }

    #[test]
    fn conflicting_duplicate_assignments_are_unrepairable() {
        let theory = parse_theory("root r.\nr :- a.\n").unwrap();
        let pt = PatchableTheory::new(
            theory,
            [ComponentId::clause("r", 0)],
            Policy::Unrestricted,
        )
        .unwrap();
        let es = vec![
            LabeledExample::new(Example::new(["a".to_string()]), true),
            LabeledExample::new(Example::new(["a".to_string()]), false),
        ];
        assert!(!oracle_patch(&pt, &es).unwrap().is_repaired());
        assert!(!ppatch(&pt, &es).unwrap().is_repaired());
    }

    #[test]
    fn ppatch_requires_unrestricted_policy() {
        let mut pt = cup_pt();
        pt.policy = Policy::DeletionOnly;
        let err = ppatch(&pt, &cup_examples()).unwrap_err();
        assert!(matches!(err, Error::WrongPolicy { .. }));
    }
}
