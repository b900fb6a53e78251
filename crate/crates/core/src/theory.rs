//! Propositional definite-clause theories with negation as failure.
//!
//! A theory is an ordered list of clauses over named propositions, with a
//! distinguished root and a declared set of primitive propositions
//! (observables that never head a clause). Components — propositions,
//! clauses, and individual antecedent-literal occurrences — are addressed
//! by [`ComponentId`]. Deleting a clause or literal tombstones it in place,
//! so ids minted before an edit keep resolving to the same components
//! afterwards; deleting a proposition appends a fact clause that renders it
//! always true.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Polarity of a body literal. `Neg` is negation as failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

/// One antecedent-literal occurrence in a clause body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BodyLiteral {
    pub sign: Sign,
    pub prop: String,
    alive: bool,
}

impl BodyLiteral {
    pub fn new(sign: Sign, prop: impl Into<String>) -> Self {
        BodyLiteral { sign, prop: prop.into(), alive: true }
    }

    pub fn positive(prop: impl Into<String>) -> Self {
        Self::new(Sign::Pos, prop)
    }

    pub fn negative(prop: impl Into<String>) -> Self {
        Self::new(Sign::Neg, prop)
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }
}

/// A definite clause `head :- body`. An empty body is a fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub head: String,
    /// Per-head ordinal assigned at creation; never renumbered.
    ordinal: usize,
    body: Vec<BodyLiteral>,
    alive: bool,
}

impl Clause {
    pub fn ordinal(&self) -> usize {
        self.ordinal
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    /// Live body literals with their structural positions.
    pub fn live_body(&self) -> impl Iterator<Item = (usize, &BodyLiteral)> {
        self.body.iter().enumerate().filter(|(_, l)| l.alive)
    }

    pub fn body_raw(&self) -> &[BodyLiteral] {
        &self.body
    }
}

/// Address of a proposition, clause, or antecedent-literal occurrence.
///
/// Clause ordinals count clauses of the same head in file order; literal
/// positions are 0-based within the clause body. Separate occurrences of
/// the same literal are distinct components.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentId {
    Prop(String),
    Clause(String, usize),
    Lit(String, usize, usize),
}

impl ComponentId {
    pub fn prop(name: impl Into<String>) -> Self {
        ComponentId::Prop(name.into())
    }

    pub fn clause(head: impl Into<String>, k: usize) -> Self {
        ComponentId::Clause(head.into(), k)
    }

    pub fn lit(head: impl Into<String>, k: usize, j: usize) -> Self {
        ComponentId::Lit(head.into(), k, j)
    }

    pub fn is_lit(&self) -> bool {
        matches!(self, ComponentId::Lit(..))
    }

    pub fn is_clause(&self) -> bool {
        matches!(self, ComponentId::Clause(..))
    }

    pub fn is_prop(&self) -> bool {
        matches!(self, ComponentId::Prop(..))
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentId::Prop(p) => write!(f, "p:{p}"),
            ComponentId::Clause(h, k) => write!(f, "c:{h}/{k}"),
            ComponentId::Lit(h, k, j) => write!(f, "l:{h}/{k}/{j}"),
        }
    }
}

impl FromStr for ComponentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Syntax {
            line: 1,
            col: 1,
            msg: format!("malformed component id `{s}`"),
        };
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split('/').collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match (kind, parts.as_slice()) {
            ("p", [name]) if is_identifier(name) => Ok(ComponentId::prop(*name)),
            ("c", [name, k]) if is_identifier(name) => {
                Ok(ComponentId::clause(*name, num(k)?))
            }
            ("l", [name, k, j]) if is_identifier(name) => {
                Ok(ComponentId::lit(*name, num(k)?, num(j)?))
            }
            _ => Err(bad()),
        }
    }
}

/// Identifier grammar for proposition names: `[a-z][a-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// An acyclic propositional definite-clause theory with a single root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    root: String,
    primitives: BTreeSet<String>,
    clauses: Vec<Clause>,
    /// Non-primitive propositions in order of first occurrence.
    prop_order: Vec<String>,
    /// Clause count per head, for ordinal assignment.
    head_counts: BTreeMap<String, usize>,
}

impl Theory {
    /// Builds a theory from parts, checking all structural invariants:
    /// identifiers are well-formed, primitives never head clauses, the root
    /// is a non-primitive proposition, and the head → body dependency graph
    /// is acyclic.
    pub fn new(
        root: impl Into<String>,
        primitives: impl IntoIterator<Item = String>,
        clauses: impl IntoIterator<Item = (String, Vec<BodyLiteral>)>,
    ) -> Result<Self> {
        Self::new_impl(root.into(), primitives.into_iter().collect(), clauses, &[])
    }

    /// Like [`Theory::new`], but names in `nonprimitives` stay defined
    /// propositions even when they head no clause, instead of defaulting to
    /// primitive. Used when the proposition set comes from elsewhere, as in
    /// propositionalization.
    pub(crate) fn new_with_nonprimitives(
        root: impl Into<String>,
        primitives: impl IntoIterator<Item = String>,
        nonprimitives: &[String],
        clauses: impl IntoIterator<Item = (String, Vec<BodyLiteral>)>,
    ) -> Result<Self> {
        Self::new_impl(root.into(), primitives.into_iter().collect(), clauses, nonprimitives)
    }

    fn new_impl(
        root: String,
        declared: BTreeSet<String>,
        clauses: impl IntoIterator<Item = (String, Vec<BodyLiteral>)>,
        nonprimitives: &[String],
    ) -> Result<Self> {
        let clause_list: Vec<(String, Vec<BodyLiteral>)> = clauses.into_iter().collect();

        for name in std::iter::once(&root)
            .chain(declared.iter())
            .chain(clause_list.iter().map(|(h, _)| h))
            .chain(clause_list.iter().flat_map(|(_, b)| b.iter().map(|l| &l.prop)))
        {
            if !is_identifier(name) {
                return Err(Error::InvalidIdentifier(name.clone()));
            }
        }

        if declared.contains(&root) {
            return Err(Error::PrimitiveRoot(root));
        }

        let heads: BTreeSet<&String> = clause_list.iter().map(|(h, _)| h).collect();
        if let Some(p) = declared.iter().find(|p| heads.contains(p)) {
            return Err(Error::PrimitiveHead(p.clone()));
        }

        // Undeclared propositions that never head a clause default to primitive.
        let mut primitives = declared;
        for (_, body) in &clause_list {
            for lit in body {
                if !heads.contains(&lit.prop)
                    && lit.prop != root
                    && !nonprimitives.contains(&lit.prop)
                {
                    primitives.insert(lit.prop.clone());
                }
            }
        }

        let mut prop_order = Vec::new();
        let mut seen = BTreeSet::new();
        let note = |name: &String, seen: &mut BTreeSet<String>, order: &mut Vec<String>| {
            if !primitives.contains(name) && seen.insert(name.clone()) {
                order.push(name.clone());
            }
        };
        note(&root, &mut seen, &mut prop_order);
        for (head, body) in &clause_list {
            note(head, &mut seen, &mut prop_order);
            for lit in body {
                note(&lit.prop, &mut seen, &mut prop_order);
            }
        }
        for name in nonprimitives {
            note(name, &mut seen, &mut prop_order);
        }

        let mut head_counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut built = Vec::with_capacity(clause_list.len());
        for (head, body) in clause_list {
            let n = head_counts.entry(head.clone()).or_insert(0);
            let ordinal = *n;
            *n += 1;
            built.push(Clause { head, ordinal, body, alive: true });
        }

        let theory = Theory { root, primitives, clauses: built, prop_order, head_counts };
        theory.check_acyclic()?;
        Ok(theory)
    }

    fn check_acyclic(&self) -> Result<()> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            InProgress,
            Done,
        }
        fn visit(
            theory: &Theory,
            prop: &str,
            marks: &mut BTreeMap<String, Mark>,
        ) -> Result<()> {
            match marks.get(prop) {
                Some(Mark::Done) => return Ok(()),
                Some(Mark::InProgress) => {
                    return Err(Error::CyclicDependency(prop.to_string()))
                }
                None => {}
            }
            marks.insert(prop.to_string(), Mark::InProgress);
            for clause in theory.clauses.iter().filter(|c| c.head == prop) {
                for lit in &clause.body {
                    if !theory.primitives.contains(&lit.prop) {
                        visit(theory, &lit.prop, marks)?;
                    }
                }
            }
            marks.insert(prop.to_string(), Mark::Done);
            Ok(())
        }
        let mut marks = BTreeMap::new();
        for prop in &self.prop_order {
            visit(self, prop, &mut marks)?;
        }
        Ok(())
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn primitives(&self) -> &BTreeSet<String> {
        &self.primitives
    }

    pub fn is_primitive(&self, name: &str) -> bool {
        self.primitives.contains(name)
    }

    /// Non-primitive propositions in first-occurrence order.
    pub fn propositions(&self) -> &[String] {
        &self.prop_order
    }

    /// All clauses, including tombstoned ones.
    pub fn clauses_raw(&self) -> &[Clause] {
        &self.clauses
    }

    /// Live clauses in file order.
    pub fn live_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.alive)
    }

    /// Live clauses whose head is `prop`.
    pub fn clauses_for<'a>(&'a self, prop: &'a str) -> impl Iterator<Item = &'a Clause> {
        self.clauses.iter().filter(move |c| c.alive && c.head == prop)
    }

    fn find_clause(&self, head: &str, ordinal: usize) -> Option<usize> {
        self.clauses
            .iter()
            .position(|c| c.head == head && c.ordinal == ordinal)
    }

    /// Every live component: non-primitive propositions in first-occurrence
    /// order, then clauses in file order, then body literals in file and
    /// position order.
    pub fn enumerate_components(&self) -> Vec<ComponentId> {
        let mut out: Vec<ComponentId> =
            self.prop_order.iter().map(ComponentId::prop).collect();
        for clause in self.live_clauses() {
            out.push(ComponentId::clause(&clause.head, clause.ordinal));
        }
        for clause in self.live_clauses() {
            for (j, _) in clause.live_body() {
                out.push(ComponentId::lit(&clause.head, clause.ordinal, j));
            }
        }
        out
    }

    /// Checks that `id` addresses a live component of this theory.
    pub fn resolve(&self, id: &ComponentId) -> Result<()> {
        let ok = match id {
            ComponentId::Prop(p) => {
                if self.primitives.contains(p) {
                    return Err(Error::PrimitiveComponent(id.clone()));
                }
                self.prop_order.iter().any(|q| q == p)
            }
            ComponentId::Clause(h, k) => self
                .find_clause(h, *k)
                .map(|i| self.clauses[i].alive)
                .unwrap_or(false),
            ComponentId::Lit(h, k, j) => self
                .find_clause(h, *k)
                .and_then(|i| self.clauses[i].body.get(*j))
                .map(|l| l.alive)
                .unwrap_or(false),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Unresolvable(id.clone()))
        }
    }

    /// Deletes one component, returning the edited theory.
    ///
    /// Literals and clauses are tombstoned in place, so every other
    /// component keeps its id. Deleting a proposition appends a fact clause
    /// for it, which renders it always true.
    pub fn delete_component(&self, id: &ComponentId) -> Result<Theory> {
        self.resolve(id)?;
        let mut next = self.clone();
        match id {
            ComponentId::Prop(p) => {
                next.append_clause(p.clone(), Vec::new());
            }
            ComponentId::Clause(h, k) => {
                let i = next.find_clause(h, *k).unwrap();
                next.clauses[i].alive = false;
            }
            ComponentId::Lit(h, k, j) => {
                let i = next.find_clause(h, *k).unwrap();
                next.clauses[i].body[*j].alive = false;
            }
        }
        Ok(next)
    }

    /// Appends a clause, assigning the next per-head ordinal. The head must
    /// be an existing non-primitive proposition or a fresh name; body
    /// propositions unknown to the theory become primitives.
    pub(crate) fn append_clause(&mut self, head: String, body: Vec<BodyLiteral>) -> ComponentId {
        debug_assert!(!self.primitives.contains(&head));
        if !self.prop_order.contains(&head) {
            self.prop_order.push(head.clone());
        }
        for lit in &body {
            let known = self.prop_order.contains(&lit.prop)
                || self.primitives.contains(&lit.prop);
            if !known {
                self.primitives.insert(lit.prop.clone());
            }
        }
        let n = self.head_counts.entry(head.clone()).or_insert(0);
        let ordinal = *n;
        *n += 1;
        self.clauses.push(Clause { head: head.clone(), ordinal, body, alive: true });
        ComponentId::clause(head, ordinal)
    }

    /// Appends `lit` to the body of clause `(head, ordinal)`, returning the
    /// new literal's id. Ids of existing literals are unaffected.
    pub(crate) fn append_literal(
        &mut self,
        head: &str,
        ordinal: usize,
        lit: BodyLiteral,
    ) -> Result<ComponentId> {
        let id = ComponentId::clause(head, ordinal);
        self.resolve(&id)?;
        let known = self.prop_order.contains(&lit.prop)
            || self.primitives.contains(&lit.prop);
        if !known {
            // A fresh proposition referenced only here; heads no clause yet.
            self.prop_order.push(lit.prop.clone());
        }
        let i = self.find_clause(head, ordinal).unwrap();
        let j = self.clauses[i].body.len();
        self.clauses[i].body.push(lit);
        Ok(ComponentId::lit(head, ordinal, j))
    }

    /// Registers a fresh non-primitive proposition name.
    pub(crate) fn register_prop(&mut self, name: String) {
        if !self.prop_order.contains(&name) && !self.primitives.contains(&name) {
            self.prop_order.push(name);
        }
    }

    pub fn has_name(&self, name: &str) -> bool {
        self.primitives.contains(name) || self.prop_order.iter().any(|p| p == name)
    }
}

/// Revision policy for a patchable theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Arbitrary disabling sets on open clauses and propositions; literals
    /// admit deletion or the null revision.
    Unrestricted,
    /// Every open component may only be deleted or left alone.
    DeletionOnly,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Unrestricted => write!(f, "unrestricted"),
            Policy::DeletionOnly => write!(f, "deletion-only"),
        }
    }
}

/// A theory together with its open (revisable) components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchableTheory {
    pub theory: Theory,
    pub open: BTreeSet<ComponentId>,
    pub policy: Policy,
}

impl PatchableTheory {
    pub fn new(
        theory: Theory,
        open: impl IntoIterator<Item = ComponentId>,
        policy: Policy,
    ) -> Result<Self> {
        let open: BTreeSet<ComponentId> = open.into_iter().collect();
        for id in &open {
            theory.resolve(id)?;
        }
        Ok(PatchableTheory { theory, open, policy })
    }

    /// Open components ordered for patching: literals first, then clauses,
    /// then propositions, each group in enumeration order.
    pub fn ordered_open(&self) -> Vec<ComponentId> {
        let all = self.theory.enumerate_components();
        let mut lits = Vec::new();
        let mut clauses = Vec::new();
        let mut props = Vec::new();
        for id in all {
            if !self.open.contains(&id) {
                continue;
            }
            match id {
                ComponentId::Lit(..) => lits.push(id),
                ComponentId::Clause(..) => clauses.push(id),
                ComponentId::Prop(..) => props.push(id),
            }
        }
        lits.extend(clauses);
        lits.extend(props);
        lits
    }
}

/// A truth assignment to the primitive propositions, listed closed-world:
/// unlisted primitives are false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub true_primitives: BTreeSet<String>,
}

impl Example {
    pub fn new(true_primitives: impl IntoIterator<Item = String>) -> Self {
        Example { true_primitives: true_primitives.into_iter().collect() }
    }

    pub fn empty() -> Self {
        Example { true_primitives: BTreeSet::new() }
    }

    /// Checks that every listed name is a declared primitive of `theory`.
    pub fn validate(&self, theory: &Theory) -> Result<()> {
        for name in &self.true_primitives {
            if !theory.is_primitive(name) {
                return Err(Error::UnknownPrimitive(name.clone()));
            }
        }
        Ok(())
    }
}

/// An example with its intended classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub example: Example,
    pub label: bool,
}

impl LabeledExample {
    pub fn new(example: Example, label: bool) -> Self {
        LabeledExample { example, label }
    }
}
