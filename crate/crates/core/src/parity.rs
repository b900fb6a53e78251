//! Even/odd/undefined parity of theory components.
//!
//! The root proposition is even. A clause flips its head's parity, a body
//! literal flips its clause's parity, and a non-primitive proposition is
//! even (odd) when every positive occurrence is even (odd) and every
//! negative occurrence is odd (even); anything else, including components
//! the recursion from the root never reaches, is undefined.
//!
//! Even components only restrict proofs of the root, so disabling one
//! generalizes the theory; odd components only enable proofs, so disabling
//! one specializes it.

use std::collections::{BTreeMap, BTreeSet};

use crate::theory::{ComponentId, PatchableTheory, Sign, Theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Undefined,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::Undefined => Parity::Undefined,
        }
    }

    pub fn is_defined(self) -> bool {
        self != Parity::Undefined
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
            Parity::Undefined => write!(f, "undefined"),
        }
    }
}

/// Parity of every live component. Primitive propositions are excluded,
/// though literal occurrences of primitives are included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityMap {
    map: BTreeMap<ComponentId, Parity>,
}

impl ParityMap {
    pub fn get(&self, id: &ComponentId) -> Parity {
        self.map.get(id).copied().unwrap_or(Parity::Undefined)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ComponentId, Parity)> {
        self.map.iter().map(|(id, p)| (id, *p))
    }
}

/// Structural view shared by propositional theories and the predicate
/// skeleton of first-order theories: named defined symbols, an ordered
/// clause list, and signed references.
pub(crate) struct SkeletonClause {
    pub head: String,
    pub ordinal: usize,
    /// (body position, sign, referenced symbol)
    pub body: Vec<(usize, Sign, String)>,
}

pub(crate) struct Skeleton {
    pub root: String,
    /// Non-primitive symbols; these receive `Prop` parity entries.
    pub props: Vec<String>,
    pub clauses: Vec<SkeletonClause>,
}

impl Skeleton {
    fn of_theory(theory: &Theory, head_filter: Option<&BTreeSet<String>>) -> Self {
        let allowed = |h: &str| head_filter.map(|f| f.contains(h)).unwrap_or(true);
        let clauses = theory
            .live_clauses()
            .filter(|c| allowed(&c.head))
            .map(|c| SkeletonClause {
                head: c.head.clone(),
                ordinal: c.ordinal(),
                body: c
                    .live_body()
                    .map(|(j, lit)| (j, lit.sign, lit.prop.clone()))
                    .collect(),
            })
            .collect();
        Skeleton {
            root: theory.root().to_string(),
            props: theory.propositions().to_vec(),
            clauses,
        }
    }
}

/// Topological order of the defined symbols: heads before the symbols
/// occurring in their clause bodies.
fn topo_props(skel: &Skeleton) -> Vec<String> {
    let prop_set: BTreeSet<&String> = skel.props.iter().collect();
    let mut by_head: BTreeMap<&str, Vec<&SkeletonClause>> = BTreeMap::new();
    for clause in &skel.clauses {
        by_head.entry(&clause.head).or_default().push(clause);
    }
    fn visit<'a>(
        prop: &'a String,
        by_head: &BTreeMap<&str, Vec<&'a SkeletonClause>>,
        prop_set: &BTreeSet<&'a String>,
        done: &mut Vec<String>,
        seen: &mut BTreeSet<&'a String>,
    ) {
        if !seen.insert(prop) {
            return;
        }
        for clause in by_head.get(prop.as_str()).into_iter().flatten() {
            for (_, _, referenced) in &clause.body {
                if prop_set.contains(referenced) {
                    visit(referenced, by_head, prop_set, done, seen);
                }
            }
        }
        done.push(prop.clone());
    }
    let mut done = Vec::new();
    let mut seen = BTreeSet::new();
    for prop in &skel.props {
        visit(prop, &by_head, &prop_set, &mut done, &mut seen);
    }
    done.reverse(); // post-order reversed: parents first
    done
}

pub(crate) fn compute_parity_skeleton(skel: &Skeleton) -> ParityMap {
    let mut prop_parity: BTreeMap<String, Parity> = BTreeMap::new();

    // Occurrences of each symbol as (containing head, sign); a literal's
    // parity equals its clause head's parity (two flips), so candidates can
    // be read off head parities directly.
    let mut occurrences: BTreeMap<&String, Vec<(&String, Sign)>> = BTreeMap::new();
    for clause in &skel.clauses {
        for (_, sign, referenced) in &clause.body {
            occurrences.entry(referenced).or_default().push((&clause.head, *sign));
        }
    }

    for prop in topo_props(skel) {
        let parity = if prop == skel.root {
            Parity::Even
        } else {
            let mut candidate: Option<Parity> = None;
            let mut conflict = false;
            let occs = occurrences.get(&prop).map(Vec::as_slice).unwrap_or(&[]);
            if occs.is_empty() {
                conflict = true; // unreachable from the root
            }
            for (head, sign) in occs {
                let head_parity =
                    prop_parity.get(*head).copied().unwrap_or(Parity::Undefined);
                let c = match sign {
                    Sign::Pos => head_parity,
                    Sign::Neg => head_parity.flip(),
                };
                if !c.is_defined() {
                    conflict = true;
                    break;
                }
                match candidate {
                    None => candidate = Some(c),
                    Some(prev) if prev == c => {}
                    Some(_) => {
                        conflict = true;
                        break;
                    }
                }
            }
            if conflict {
                Parity::Undefined
            } else {
                candidate.unwrap_or(Parity::Undefined)
            }
        };
        prop_parity.insert(prop, parity);
    }

    let mut map = BTreeMap::new();
    for prop in &skel.props {
        map.insert(
            ComponentId::prop(prop),
            prop_parity.get(prop).copied().unwrap_or(Parity::Undefined),
        );
    }
    for clause in &skel.clauses {
        let head_parity = prop_parity
            .get(&clause.head)
            .copied()
            .unwrap_or(Parity::Undefined);
        let clause_parity = head_parity.flip();
        map.insert(ComponentId::clause(&clause.head, clause.ordinal), clause_parity);
        for (j, _, _) in &clause.body {
            map.insert(
                ComponentId::lit(&clause.head, clause.ordinal, *j),
                clause_parity.flip(),
            );
        }
    }
    ParityMap { map }
}

/// Computes the least fixpoint of the parity recursion from the root.
pub fn compute_parity(theory: &Theory) -> ParityMap {
    compute_parity_skeleton(&Skeleton::of_theory(theory, None))
}

/// Parity computed over the reachable subtheory only: occurrences inside
/// clauses of unreachable propositions are ignored instead of poisoning
/// otherwise-defined propositions. Used by patching internals, where
/// deletions may strand structure that provably cannot affect any
/// classification.
pub(crate) fn compute_parity_reachable(
    theory: &Theory,
    reachable: &BTreeSet<String>,
) -> ParityMap {
    compute_parity_skeleton(&Skeleton::of_theory(theory, Some(reachable)))
}

/// True iff every open component has a defined parity; otherwise returns
/// the offending ids.
pub fn is_parity_definite(pt: &PatchableTheory) -> (bool, Vec<ComponentId>) {
    let parity = compute_parity(&pt.theory);
    let undefined: Vec<ComponentId> = pt
        .open
        .iter()
        .filter(|id| !parity.get(id).is_defined())
        .cloned()
        .collect();
    (undefined.is_empty(), undefined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_theory;
    use crate::theory::Policy;

    #[test]
    fn negation_free_chain_alternates() {
        let t = parse_theory("root r.\nr :- s.\ns :- x.\n").unwrap();
        let p = compute_parity(&t);
        assert_eq!(p.get(&ComponentId::prop("r")), Parity::Even);
        assert_eq!(p.get(&ComponentId::clause("r", 0)), Parity::Odd);
        assert_eq!(p.get(&ComponentId::lit("r", 0, 0)), Parity::Even);
        assert_eq!(p.get(&ComponentId::prop("s")), Parity::Even);
        assert_eq!(p.get(&ComponentId::clause("s", 0)), Parity::Odd);
        assert_eq!(p.get(&ComponentId::lit("s", 0, 0)), Parity::Even);
    }

    #[test]
    fn negative_occurrence_flips_prop_parity() {
        let t = parse_theory("root r.\nr :- not s.\ns :- x.\n").unwrap();
        let p = compute_parity(&t);
        // literal `not s` is even; s must be odd for it.
        assert_eq!(p.get(&ComponentId::lit("r", 0, 0)), Parity::Even);
        assert_eq!(p.get(&ComponentId::prop("s")), Parity::Odd);
        assert_eq!(p.get(&ComponentId::clause("s", 0)), Parity::Even);
        assert_eq!(p.get(&ComponentId::lit("s", 0, 0)), Parity::Odd);
    }

    #[test]
    fn mixed_polarity_is_undefined() {
        let t = parse_theory("root r.\nr :- s, not s.\ns :- x.\n").unwrap();
        let p = compute_parity(&t);
        assert_eq!(p.get(&ComponentId::prop("s")), Parity::Undefined);
        assert_eq!(p.get(&ComponentId::clause("s", 0)), Parity::Undefined);
    }

    #[test]
    fn unreachable_prop_is_undefined() {
        let t = parse_theory("root r.\nr :- x.\ns :- x.\n").unwrap();
        let p = compute_parity(&t);
        assert_eq!(p.get(&ComponentId::prop("s")), Parity::Undefined);
        assert_eq!(p.get(&ComponentId::clause("s", 0)), Parity::Undefined);
        let pt = PatchableTheory::new(
            t.clone(),
            [ComponentId::clause("s", 0)],
            Policy::Unrestricted,
        )
        .unwrap();
        let (ok, witness) = is_parity_definite(&pt);
        assert!(!ok);
        assert_eq!(witness, vec![ComponentId::clause("s", 0)]);
    }

    #[test]
    fn empty_open_set_is_parity_definite() {
        let t = parse_theory("root r.\nr :- s, not s.\ns :- x.\n").unwrap();
        let pt = PatchableTheory::new(t, [], Policy::Unrestricted).unwrap();
        assert!(is_parity_definite(&pt).0);
    }
}
