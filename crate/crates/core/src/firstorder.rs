//! Non-recursive, function-free first-order definite-clause theories with
//! negation as failure, and the reduction of quasi-propositional
//! ground-fact theories to the propositional patching pipeline.
//!
//! Fact predicates play the role of primitives: a theory carries a list of
//! fact patterns (possibly with variables), and an example instantiates the
//! root predicate's parameters. Quasi-propositional theories — every
//! literal carrying the root's variable vector — with ground facts only
//! propositionalize literal-for-proposition, preserving classification,
//! parity, and patchability.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::parity::{compute_parity_skeleton, ParityMap, Skeleton, SkeletonClause};
use crate::patch::{ppatch, PatchOutcome, Revision, RevisionKind, UnrepairableWitness};
use crate::theory::{
    is_identifier, BodyLiteral, ComponentId, Example, LabeledExample, PatchableTheory,
    Policy, Sign, Theory,
};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FoTerm {
    Var(String),
    Const(String),
}

impl FoTerm {
    pub fn is_var(&self) -> bool {
        matches!(self, FoTerm::Var(_))
    }
}

impl fmt::Display for FoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoTerm::Var(v) => write!(f, "{v}"),
            FoTerm::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoAtom {
    pub pred: String,
    pub args: Vec<FoTerm>,
}

impl FoAtom {
    pub fn new(pred: impl Into<String>, args: Vec<FoTerm>) -> Self {
        FoAtom { pred: pred.into(), args }
    }
}

impl fmt::Display for FoAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return write!(f, "{}", self.pred);
        }
        let args: Vec<String> = self.args.iter().map(|t| t.to_string()).collect();
        write!(f, "{}({})", self.pred, args.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoLiteral {
    pub sign: Sign,
    pub atom: FoAtom,
    alive: bool,
}

impl FoLiteral {
    pub fn new(sign: Sign, atom: FoAtom) -> Self {
        FoLiteral { sign, atom, alive: true }
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }
}

impl fmt::Display for FoLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Pos => write!(f, "{}", self.atom),
            Sign::Neg => write!(f, "not {}", self.atom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoClause {
    pub head: FoAtom,
    ordinal: usize,
    body: Vec<FoLiteral>,
    alive: bool,
}

impl FoClause {
    pub fn ordinal(&self) -> usize {
        self.ordinal
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    pub fn live_body(&self) -> impl Iterator<Item = (usize, &FoLiteral)> {
        self.body.iter().enumerate().filter(|(_, l)| l.alive)
    }
}

/// A first-order domain theory: rules, a root predicate, and fact patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoTheory {
    root: String,
    root_arity: usize,
    clauses: Vec<FoClause>,
    facts: Vec<FoAtom>,
    fact_preds: BTreeSet<String>,
    arities: BTreeMap<String, usize>,
    /// Non-fact predicates in first-occurrence order.
    pred_order: Vec<String>,
}

fn is_constant(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
        _ => return false,
    }
    s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn is_variable(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FoTheory {
    /// Builds and validates a theory: consistent arities, fact predicates
    /// never heading rules, and a non-recursive predicate dependency graph.
    /// Predicates appearing only in rule bodies, with no rules and no
    /// facts, default to fact predicates with an empty fact table.
    pub fn new(
        root: (impl Into<String>, usize),
        clauses: impl IntoIterator<Item = (FoAtom, Vec<FoLiteral>)>,
        facts: impl IntoIterator<Item = FoAtom>,
    ) -> Result<Self> {
        let root_name: String = root.0.into();
        let root_arity = root.1;
        let clause_list: Vec<(FoAtom, Vec<FoLiteral>)> = clauses.into_iter().collect();
        let facts: Vec<FoAtom> = facts.into_iter().collect();

        if !is_identifier(&root_name) {
            return Err(Error::InvalidIdentifier(root_name));
        }
        let mut arities: BTreeMap<String, usize> = BTreeMap::new();
        arities.insert(root_name.clone(), root_arity);
        {
            let mut check_atom = |atom: &FoAtom| -> Result<()> {
                if !is_identifier(&atom.pred) {
                    return Err(Error::InvalidIdentifier(atom.pred.clone()));
                }
                for t in &atom.args {
                    let ok = match t {
                        FoTerm::Var(v) => is_variable(v),
                        FoTerm::Const(c) => is_constant(c),
                    };
                    if !ok {
                        return Err(Error::InvalidIdentifier(t.to_string()));
                    }
                }
                match arities.get(&atom.pred) {
                    Some(&a) if a != atom.args.len() => Err(Error::ArityMismatch {
                        name: atom.pred.clone(),
                        first: a,
                        second: atom.args.len(),
                    }),
                    Some(_) => Ok(()),
                    None => {
                        arities.insert(atom.pred.clone(), atom.args.len());
                        Ok(())
                    }
                }
            };
            for (head, body) in &clause_list {
                check_atom(head)?;
                for lit in body {
                    check_atom(&lit.atom)?;
                }
            }
            for fact in &facts {
                check_atom(fact)?;
            }
        }

        let rule_heads: BTreeSet<String> =
            clause_list.iter().map(|(h, _)| h.pred.clone()).collect();
        let mut fact_preds: BTreeSet<String> =
            facts.iter().map(|f| f.pred.clone()).collect();
        if let Some(p) = fact_preds.iter().find(|p| rule_heads.contains(*p)) {
            return Err(Error::FactPredicateHead(p.clone()));
        }
        if fact_preds.contains(&root_name) {
            return Err(Error::PrimitiveRoot(root_name));
        }
        // Body-only predicates with no rules and no facts become fact
        // predicates with an empty table.
        for (_, body) in &clause_list {
            for lit in body {
                let p = &lit.atom.pred;
                if !rule_heads.contains(p) && *p != root_name && !fact_preds.contains(p) {
                    fact_preds.insert(p.clone());
                }
            }
        }

        let mut pred_order = Vec::new();
        {
            let mut seen = BTreeSet::new();
            let mut note = |name: &String| {
                if !fact_preds.contains(name) && seen.insert(name.clone()) {
                    pred_order.push(name.clone());
                }
            };
            note(&root_name);
            for (head, body) in &clause_list {
                note(&head.pred);
                for lit in body {
                    note(&lit.atom.pred);
                }
            }
        }

        let mut head_counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut built = Vec::with_capacity(clause_list.len());
        for (head, body) in clause_list {
            let n = head_counts.entry(head.pred.clone()).or_insert(0);
            let ordinal = *n;
            *n += 1;
            built.push(FoClause { head, ordinal, body, alive: true });
        }

        let theory = FoTheory {
            root: root_name,
            root_arity,
            clauses: built,
            facts,
            fact_preds,
            arities,
            pred_order,
        };
        theory.check_nonrecursive()?;
        Ok(theory)
    }

    fn check_nonrecursive(&self) -> Result<()> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            InProgress,
            Done,
        }
        fn visit(t: &FoTheory, pred: &str, marks: &mut BTreeMap<String, Mark>) -> Result<()> {
            match marks.get(pred) {
                Some(Mark::Done) => return Ok(()),
                Some(Mark::InProgress) => {
                    return Err(Error::CyclicDependency(pred.to_string()))
                }
                None => {}
            }
            marks.insert(pred.to_string(), Mark::InProgress);
            for clause in t.clauses.iter().filter(|c| c.head.pred == pred) {
                for lit in &clause.body {
                    if !t.fact_preds.contains(&lit.atom.pred) {
                        visit(t, &lit.atom.pred, marks)?;
                    }
                }
            }
            marks.insert(pred.to_string(), Mark::Done);
            Ok(())
        }
        let mut marks = BTreeMap::new();
        for pred in &self.pred_order {
            visit(self, pred, &mut marks)?;
        }
        Ok(())
    }

    pub fn root(&self) -> (&str, usize) {
        (&self.root, self.root_arity)
    }

    pub fn facts(&self) -> &[FoAtom] {
        &self.facts
    }

    pub fn fact_preds(&self) -> &BTreeSet<String> {
        &self.fact_preds
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        self.arities.get(pred).copied()
    }

    pub fn predicates(&self) -> &[String] {
        &self.pred_order
    }

    pub fn live_clauses(&self) -> impl Iterator<Item = &FoClause> {
        self.clauses.iter().filter(|c| c.alive)
    }

    pub fn clauses_for<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a FoClause> {
        self.clauses.iter().filter(move |c| c.alive && c.head.pred == pred)
    }

    fn find_clause(&self, pred: &str, ordinal: usize) -> Option<usize> {
        self.clauses
            .iter()
            .position(|c| c.head.pred == pred && c.ordinal == ordinal)
    }

    /// Every live component: non-fact predicates, then rules, then body
    /// literals, mirroring the propositional enumeration.
    pub fn enumerate_components(&self) -> Vec<ComponentId> {
        let mut out: Vec<ComponentId> =
            self.pred_order.iter().map(ComponentId::prop).collect();
        for clause in self.live_clauses() {
            out.push(ComponentId::clause(&clause.head.pred, clause.ordinal));
        }
        for clause in self.live_clauses() {
            for (j, _) in clause.live_body() {
                out.push(ComponentId::lit(&clause.head.pred, clause.ordinal, j));
            }
        }
        out
    }

    pub fn resolve(&self, id: &ComponentId) -> Result<()> {
        let ok = match id {
            ComponentId::Prop(p) => {
                if self.fact_preds.contains(p) {
                    return Err(Error::PrimitiveComponent(id.clone()));
                }
                self.pred_order.iter().any(|q| q == p)
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

    /// Deletes a rule or an antecedent literal by tombstoning it in place.
    pub fn delete_component(&self, id: &ComponentId) -> Result<FoTheory> {
        self.resolve(id)?;
        let mut next = self.clone();
        match id {
            ComponentId::Clause(h, k) => {
                let i = next.find_clause(h, *k).unwrap();
                next.clauses[i].alive = false;
            }
            ComponentId::Lit(h, k, j) => {
                let i = next.find_clause(h, *k).unwrap();
                next.clauses[i].body[*j].alive = false;
            }
            ComponentId::Prop(_) => {
                return Err(Error::Unresolvable(id.clone()));
            }
        }
        Ok(next)
    }

    fn skeleton(&self) -> Skeleton {
        Skeleton {
            root: self.root.clone(),
            props: self.pred_order.clone(),
            clauses: self
                .live_clauses()
                .map(|c| SkeletonClause {
                    head: c.head.pred.clone(),
                    ordinal: c.ordinal,
                    body: c
                        .live_body()
                        .map(|(j, lit)| (j, lit.sign, lit.atom.pred.clone()))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Longest rule chain from the root down to facts.
    pub fn depth(&self) -> usize {
        fn depth_of(t: &FoTheory, pred: &str, memo: &mut BTreeMap<String, usize>) -> usize {
            if t.fact_preds.contains(pred) {
                return 0;
            }
            if let Some(&d) = memo.get(pred) {
                return d;
            }
            let d = t
                .clauses_for(pred)
                .map(|c| {
                    1 + c
                        .live_body()
                        .map(|(_, lit)| depth_of(t, &lit.atom.pred, memo))
                        .max()
                        .unwrap_or(0)
                })
                .max()
                .unwrap_or(0);
            memo.insert(pred.to_string(), d);
            d
        }
        let mut memo = BTreeMap::new();
        depth_of(self, &self.root.clone(), &mut memo)
    }

    pub fn is_negation_free(&self) -> bool {
        self.live_clauses()
            .all(|c| c.live_body().all(|(_, lit)| lit.sign == Sign::Pos))
    }
}

/// Parity of first-order components under the same recursion as the
/// propositional case, over the predicate skeleton.
pub fn compute_parity_fo(theory: &FoTheory) -> ParityMap {
    compute_parity_skeleton(&theory.skeleton())
}

/// An assignment of constants to the root predicate's parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FoExample {
    pub args: Vec<String>,
}

impl FoExample {
    pub fn new(args: Vec<String>) -> Self {
        FoExample { args }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoLabeledExample {
    pub example: FoExample,
    pub label: bool,
}

impl FoLabeledExample {
    pub fn new(example: FoExample, label: bool) -> Self {
        FoLabeledExample { example, label }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoPatchableTheory {
    pub theory: FoTheory,
    pub open: BTreeSet<ComponentId>,
    pub policy: Policy,
}

impl FoPatchableTheory {
    pub fn new(
        theory: FoTheory,
        open: impl IntoIterator<Item = ComponentId>,
        policy: Policy,
    ) -> Result<Self> {
        let open: BTreeSet<ComponentId> = open.into_iter().collect();
        for id in &open {
            theory.resolve(id)?;
        }
        Ok(FoPatchableTheory { theory, open, policy })
    }
}

fn constant_universe(theory: &FoTheory, extra: &[String]) -> BTreeSet<String> {
    let mut universe: BTreeSet<String> = extra.iter().cloned().collect();
    for fact in &theory.facts {
        for t in &fact.args {
            if let FoTerm::Const(c) = t {
                universe.insert(c.clone());
            }
        }
    }
    for clause in theory.live_clauses() {
        for t in clause
            .head
            .args
            .iter()
            .chain(clause.live_body().flat_map(|(_, l)| l.atom.args.iter()))
        {
            if let FoTerm::Const(c) = t {
                universe.insert(c.clone());
            }
        }
    }
    universe
}

/// Matches a fact pattern against ground arguments; pattern variables bind
/// consistently.
fn fact_matches(pattern: &FoAtom, args: &[String]) -> bool {
    if pattern.args.len() != args.len() {
        return false;
    }
    let mut binding: BTreeMap<&str, &str> = BTreeMap::new();
    for (t, a) in pattern.args.iter().zip(args) {
        match t {
            FoTerm::Const(c) => {
                if c != a {
                    return false;
                }
            }
            FoTerm::Var(v) => match binding.get(v.as_str()) {
                Some(&bound) if bound != a.as_str() => return false,
                Some(_) => {}
                None => {
                    binding.insert(v, a);
                }
            },
        }
    }
    true
}

struct FoEvaluator<'a> {
    theory: &'a FoTheory,
    universe: Vec<String>,
    memo: HashMap<(String, Vec<String>), bool>,
}

impl FoEvaluator<'_> {
    fn prove(&mut self, pred: &str, args: &[String]) -> bool {
        if self.theory.fact_preds.contains(pred) {
            return self
                .theory
                .facts
                .iter()
                .filter(|f| f.pred == pred)
                .any(|f| fact_matches(f, args));
        }
        let key = (pred.to_string(), args.to_vec());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut value = false;
        let clauses: Vec<FoClause> = self.theory.clauses_for(pred).cloned().collect();
        'clauses: for clause in &clauses {
            let mut binding: BTreeMap<String, String> = BTreeMap::new();
            let mut head_ok = true;
            for (t, a) in clause.head.args.iter().zip(args) {
                match t {
                    FoTerm::Const(c) => {
                        if c != a {
                            head_ok = false;
                            break;
                        }
                    }
                    FoTerm::Var(v) => match binding.get(v) {
                        Some(bound) if bound != a => {
                            head_ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            binding.insert(v.clone(), a.clone());
                        }
                    },
                }
            }
            if !head_ok {
                continue;
            }
            // Body variables not bound by the head range over the universe.
            let mut free: Vec<String> = Vec::new();
            for (_, lit) in clause.live_body() {
                for t in &lit.atom.args {
                    if let FoTerm::Var(v) = t {
                        if !binding.contains_key(v) && !free.contains(v) {
                            free.push(v.clone());
                        }
                    }
                }
            }
            if !free.is_empty() && self.universe.is_empty() {
                continue;
            }
            let body: Vec<(Sign, FoAtom)> = clause
                .live_body()
                .map(|(_, lit)| (lit.sign, lit.atom.clone()))
                .collect();
            let mut assignment = vec![0usize; free.len()];
            loop {
                let mut full = binding.clone();
                for (v, &u) in free.iter().zip(&assignment) {
                    full.insert(v.clone(), self.universe[u].clone());
                }
                let satisfied = body.iter().all(|(sign, atom)| {
                    let ground: Vec<String> = atom
                        .args
                        .iter()
                        .map(|t| match t {
                            FoTerm::Const(c) => c.clone(),
                            FoTerm::Var(v) => full[v].clone(),
                        })
                        .collect();
                    let proved = self.prove(&atom.pred, &ground);
                    match sign {
                        Sign::Pos => proved,
                        Sign::Neg => !proved,
                    }
                });
                if satisfied {
                    value = true;
                    break 'clauses;
                }
                if free.is_empty() {
                    break;
                }
                // advance the assignment odometer
                let mut i = 0;
                while i < free.len() {
                    assignment[i] += 1;
                    if assignment[i] < self.universe.len() {
                        break;
                    }
                    assignment[i] = 0;
                    i += 1;
                }
                if i == free.len() {
                    break;
                }
            }
        }
        self.memo.insert(key, value);
        value
    }
}

/// True iff the instantiated root is provable by top-down resolution with
/// negation as failure over ground instantiations.
pub fn classify_fo(theory: &FoTheory, example: &FoExample) -> Result<bool> {
    if example.args.len() != theory.root_arity {
        return Err(Error::ExampleArity {
            expected: theory.root_arity,
            got: example.args.len(),
        });
    }
    let universe: Vec<String> =
        constant_universe(theory, &example.args).into_iter().collect();
    let root = theory.root.clone();
    let mut eval = FoEvaluator { theory, universe, memo: HashMap::new() };
    Ok(eval.prove(&root, &example.args))
}

/// Results of the structural checks that gate propositionalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoValidation {
    pub completely_bound: bool,
    pub quasi_propositional: bool,
    pub ground_facts_only: bool,
    /// Literals whose variables escape their clause head.
    pub unbound_literals: Vec<String>,
    /// Literals (including heads) whose variable vector differs from the
    /// root's.
    pub non_qp_literals: Vec<String>,
    pub non_ground_facts: Vec<String>,
}

/// Checks complete boundness, quasi-propositionality, and groundness of
/// facts.
pub fn validate_fo(theory: &FoTheory) -> FoValidation {
    let mut unbound = Vec::new();
    let mut non_qp = Vec::new();
    for clause in theory.live_clauses() {
        let head_vars: Vec<&str> = clause
            .head
            .args
            .iter()
            .filter_map(|t| match t {
                FoTerm::Var(v) => Some(v.as_str()),
                FoTerm::Const(_) => None,
            })
            .collect();
        let distinct: BTreeSet<&str> = head_vars.iter().copied().collect();
        let head_qp = clause.head.args.len() == theory.root_arity
            && clause.head.args.iter().all(|t| t.is_var())
            && distinct.len() == head_vars.len();
        if !head_qp {
            non_qp.push(clause.head.to_string());
        }
        for (_, lit) in clause.live_body() {
            if lit
                .atom
                .args
                .iter()
                .any(|t| matches!(t, FoTerm::Var(v) if !head_vars.contains(&v.as_str())))
            {
                unbound.push(lit.to_string());
            }
            let lit_vars: Vec<&str> = lit
                .atom
                .args
                .iter()
                .filter_map(|t| match t {
                    FoTerm::Var(v) => Some(v.as_str()),
                    FoTerm::Const(_) => None,
                })
                .collect();
            let qp = lit.atom.args.iter().all(|t| t.is_var()) && lit_vars == head_vars;
            if !qp {
                non_qp.push(lit.to_string());
            }
        }
    }
    let non_ground_facts: Vec<String> = theory
        .facts
        .iter()
        .filter(|f| f.args.iter().any(|t| t.is_var()))
        .map(|f| f.to_string())
        .collect();
    let completely_bound = unbound.is_empty();
    FoValidation {
        completely_bound,
        quasi_propositional: completely_bound && non_qp.is_empty(),
        ground_facts_only: non_ground_facts.is_empty(),
        unbound_literals: unbound,
        non_qp_literals: non_qp,
        non_ground_facts,
    }
}

/// The propositional image of a quasi-propositional ground-fact theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropositionalizedBundle {
    pub theory_hat: Theory,
    pub open_hat: BTreeSet<ComponentId>,
    /// First-order component ↔ propositional component, over the open set.
    pub component_map: Vec<(ComponentId, ComponentId)>,
    /// Atom pattern ↔ proposition name, for every predicate.
    pub predicate_map: Vec<(String, String)>,
}

fn canonical_pattern(pred: &str, arity: usize) -> String {
    if arity == 0 {
        return pred.to_string();
    }
    let args: Vec<String> = (1..=arity).map(|i| format!("X{i}")).collect();
    format!("{}({})", pred, args.join(", "))
}

/// Replaces each literal by a proposition named after its predicate. Fact
/// predicates become primitives; the example image sets a primitive true
/// iff the corresponding ground fact is present for the example's root
/// instantiation.
pub fn propositionalize(
    pt: &FoPatchableTheory,
    es: &[FoLabeledExample],
) -> Result<(PropositionalizedBundle, Vec<LabeledExample>)> {
    let theory = &pt.theory;
    let validation = validate_fo(theory);
    if !validation.quasi_propositional {
        let mut offenders = validation.unbound_literals.clone();
        offenders.extend(validation.non_qp_literals.clone());
        return Err(Error::NotQuasiPropositional(offenders));
    }
    if !validation.ground_facts_only {
        return Err(Error::NonGroundFacts(validation.non_ground_facts));
    }
    let parity = compute_parity_fo(theory);
    let undefined: Vec<ComponentId> = pt
        .open
        .iter()
        .filter(|id| !parity.get(id).is_defined())
        .cloned()
        .collect();
    if !undefined.is_empty() {
        return Err(Error::NotParityDefinite(undefined));
    }

    let clauses: Vec<(String, Vec<BodyLiteral>)> = theory
        .live_clauses()
        .map(|c| {
            let body: Vec<BodyLiteral> = c
                .live_body()
                .map(|(_, lit)| BodyLiteral::new(lit.sign, lit.atom.pred.clone()))
                .collect();
            (c.head.pred.clone(), body)
        })
        .collect();
    let theory_hat = Theory::new_with_nonprimitives(
        theory.root.clone(),
        theory.fact_preds.iter().cloned(),
        theory.predicates(),
        clauses,
    )?;

    let open_hat: BTreeSet<ComponentId> = pt.open.clone();
    for id in &open_hat {
        theory_hat.resolve(id)?;
    }
    let component_map: Vec<(ComponentId, ComponentId)> =
        pt.open.iter().map(|id| (id.clone(), id.clone())).collect();
    let predicate_map: Vec<(String, String)> = theory
        .arities
        .iter()
        .map(|(pred, &arity)| (canonical_pattern(pred, arity), pred.clone()))
        .collect();

    let mut hat_examples = Vec::with_capacity(es.len());
    for le in es {
        if le.example.args.len() != theory.root_arity {
            return Err(Error::ExampleArity {
                expected: theory.root_arity,
                got: le.example.args.len(),
            });
        }
        let mut true_primitives = BTreeSet::new();
        for pred in theory.fact_preds.iter() {
            if theory.arities.get(pred) == Some(&theory.root_arity)
                && theory
                    .facts
                    .iter()
                    .filter(|f| &f.pred == pred)
                    .any(|f| fact_matches(f, &le.example.args))
            {
                true_primitives.insert(pred.clone());
            }
        }
        hat_examples.push(LabeledExample::new(Example { true_primitives }, le.label));
    }

    Ok((
        PropositionalizedBundle { theory_hat, open_hat, component_map, predicate_map },
        hat_examples,
    ))
}

/// A revision mapped back to the first-order theory: the disabling set
/// carries root-vector instantiations instead of example indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoRevision {
    pub target: ComponentId,
    pub kind: RevisionKind,
    pub disabling: Vec<Vec<String>>,
    /// Serialized text of added rules and facts.
    pub synthesized: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoPatchOutcome {
    Repaired { revisions: Vec<FoRevision>, theory: FoTheory },
    Unrepairable(UnrepairableWitness),
}

impl FoPatchOutcome {
    pub fn is_repaired(&self) -> bool {
        matches!(self, FoPatchOutcome::Repaired { .. })
    }
}

fn fo_aux_name(target: &ComponentId) -> String {
    match target {
        ComponentId::Prop(p) => format!("aux_p_{p}"),
        ComponentId::Clause(h, k) => format!("aux_c_{h}_{k}"),
        ComponentId::Lit(h, k, j) => format!("aux_l_{h}_{k}_{j}"),
    }
}

/// Applies one back-mapped revision: deletion removes the component; a
/// disable adds a fresh fact predicate whose ground facts are exactly the
/// disabling instantiations, wired in with a negative body literal (clause
/// revision) or an extra rule (predicate revision).
fn fo_apply_revision(theory: &FoTheory, revision: &FoRevision) -> Result<FoTheory> {
    match revision.kind {
        RevisionKind::Null => {
            theory.resolve(&revision.target)?;
            Ok(theory.clone())
        }
        RevisionKind::Delete => theory.delete_component(&revision.target),
        RevisionKind::Disable => {
            theory.resolve(&revision.target)?;
            let aux = fo_aux_name(&revision.target);
            if theory.arities.contains_key(&aux) {
                return Err(Error::FreshNameCollision(aux));
            }
            let mut next = theory.clone();
            let arity = next.root_arity;
            match &revision.target {
                ComponentId::Clause(h, k) => {
                    let i = next.find_clause(h, *k).unwrap();
                    let vector: Vec<FoTerm> = next.clauses[i].head.args.clone();
                    next.clauses[i]
                        .body
                        .push(FoLiteral::new(Sign::Neg, FoAtom::new(aux.clone(), vector)));
                }
                ComponentId::Prop(p) => {
                    let vector: Vec<FoTerm> =
                        (1..=arity).map(|i| FoTerm::Var(format!("X{i}"))).collect();
                    let head = FoAtom::new(p.clone(), vector.clone());
                    let body =
                        vec![FoLiteral::new(Sign::Pos, FoAtom::new(aux.clone(), vector))];
                    let n = next.clauses.iter().filter(|c| c.head.pred == *p).count();
                    next.clauses.push(FoClause { head, ordinal: n, body, alive: true });
                }
                ComponentId::Lit(..) => {
                    return Err(Error::LitDisablingSet(revision.target.clone()))
                }
            }
            next.fact_preds.insert(aux.clone());
            next.arities.insert(aux.clone(), arity);
            for tuple in &revision.disabling {
                next.facts.push(FoAtom::new(
                    aux.clone(),
                    tuple.iter().map(|c| FoTerm::Const(c.clone())).collect(),
                ));
            }
            Ok(next)
        }
    }
}

fn back_map_revision(revision: &Revision, es: &[FoLabeledExample]) -> FoRevision {
    let mut disabling: Vec<Vec<String>> = Vec::new();
    for &i in &revision.disabling {
        let tuple = es[i].example.args.clone();
        if !disabling.contains(&tuple) {
            disabling.push(tuple);
        }
    }
    disabling.sort();
    FoRevision {
        target: revision.target.clone(),
        kind: revision.kind,
        disabling,
        synthesized: Vec::new(),
    }
}

/// First-order patching via propositionalization: reduce, run the
/// propositional patcher, and map each revision back, synthesizing fresh
/// fact predicates that list the disabling instantiations.
pub fn fpatch(pt: &FoPatchableTheory, es: &[FoLabeledExample]) -> Result<FoPatchOutcome> {
    if pt.policy != Policy::Unrestricted {
        return Err(Error::WrongPolicy { required: "unrestricted" });
    }
    let (bundle, hat_examples) = propositionalize(pt, es)?;
    let hat_pt =
        PatchableTheory::new(bundle.theory_hat, bundle.open_hat, Policy::Unrestricted)?;
    match ppatch(&hat_pt, &hat_examples)? {
        PatchOutcome::Unrepairable(w) => Ok(FoPatchOutcome::Unrepairable(w)),
        PatchOutcome::Repaired { revisions, .. } => {
            let mut theory = pt.theory.clone();
            let mut out = Vec::with_capacity(revisions.len());
            for revision in &revisions {
                let mut fo_revision = back_map_revision(revision, es);
                let before_clauses = theory.clauses.len();
                let before_facts = theory.facts.len();
                theory = fo_apply_revision(&theory, &fo_revision)?;
                for c in &theory.clauses[before_clauses..] {
                    fo_revision.synthesized.push(clause_line(c));
                }
                for f in &theory.facts[before_facts..] {
                    fo_revision.synthesized.push(format!("{f}."));
                }
                out.push(fo_revision);
            }
            for le in es {
                assert_eq!(
                    classify_fo(&theory, &le.example)?,
                    le.label,
                    "back-mapped theory must satisfy every label"
                );
            }
            Ok(FoPatchOutcome::Repaired { revisions: out, theory })
        }
    }
}

fn clause_line(clause: &FoClause) -> String {
    let body: Vec<String> = clause.live_body().map(|(_, l)| l.to_string()).collect();
    if body.is_empty() {
        format!("{}.", clause.head)
    } else {
        format!("{} :- {}.", clause.head, body.join(", "))
    }
}

/// Canonical serialization: root header, live rules in order, then facts.
pub fn serialize_fo(theory: &FoTheory) -> String {
    let mut out = String::new();
    out.push_str(&format!("root {}/{}.\n", theory.root, theory.root_arity));
    for clause in theory.live_clauses() {
        out.push_str(&clause_line(clause));
        out.push('\n');
    }
    for fact in &theory.facts {
        out.push_str(&format!("{fact}.\n"));
    }
    out
}

fn fo_syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col: 1, msg: msg.into() }
}

fn parse_atom(line_no: usize, s: &str) -> Result<FoAtom> {
    let s = s.trim();
    let (pred, rest) = match s.find('(') {
        None => (s, None),
        Some(i) => {
            if !s.ends_with(')') {
                return Err(fo_syntax(line_no, format!("malformed atom `{s}`")));
            }
            (&s[..i], Some(&s[i + 1..s.len() - 1]))
        }
    };
    let pred = pred.trim();
    if !is_identifier(pred) {
        return Err(fo_syntax(line_no, format!("invalid predicate name `{pred}`")));
    }
    let mut args = Vec::new();
    if let Some(rest) = rest {
        for tok in rest.split(',') {
            let tok = tok.trim();
            if is_variable(tok) {
                args.push(FoTerm::Var(tok.to_string()));
            } else if is_constant(tok) {
                args.push(FoTerm::Const(tok.to_string()));
            } else {
                return Err(fo_syntax(line_no, format!("invalid term `{tok}`")));
            }
        }
    }
    Ok(FoAtom::new(pred, args))
}

/// Splits a body on top-level commas (commas inside parentheses separate
/// atom arguments).
fn split_body(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => {
                parts.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        parts.push(current.trim().to_string());
    }
    parts
}

/// Parses a first-order theory file: a `root r/3.` header, rule lines with
/// `:-`, and fact lines. Capitalized tokens are variables.
pub fn parse_fo(text: &str) -> Result<FoTheory> {
    let mut root: Option<(String, usize)> = None;
    let mut clauses: Vec<(FoAtom, Vec<FoLiteral>)> = Vec::new();
    let mut facts: Vec<FoAtom> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let stmt = line
            .strip_suffix('.')
            .ok_or_else(|| fo_syntax(line_no, "statement must end with `.`"))?
            .trim();
        if let Some(decl) = stmt.strip_prefix("root ") {
            if root.is_some() {
                return Err(Error::DuplicateRoot);
            }
            let (name, arity) = decl
                .split_once('/')
                .ok_or_else(|| fo_syntax(line_no, "root header must be `root name/arity`"))?;
            let name = name.trim();
            if !is_identifier(name) {
                return Err(fo_syntax(line_no, format!("invalid root name `{name}`")));
            }
            let arity: usize = arity
                .trim()
                .parse()
                .map_err(|_| fo_syntax(line_no, "invalid root arity"))?;
            root = Some((name.to_string(), arity));
            continue;
        }
        match stmt.split_once(":-") {
            Some((head, body)) => {
                let head = parse_atom(line_no, head)?;
                let mut lits = Vec::new();
                for part in split_body(body) {
                    let (sign, atom_text) = match part.strip_prefix("not ") {
                        Some(rest) => (Sign::Neg, rest.to_string()),
                        None => (Sign::Pos, part),
                    };
                    lits.push(FoLiteral::new(sign, parse_atom(line_no, &atom_text)?));
                }
                clauses.push((head, lits));
            }
            None => {
                facts.push(parse_atom(line_no, stmt)?);
            }
        }
    }
    let root = root.ok_or(Error::MissingRoot)?;
    FoTheory::new(root, clauses, facts)
}

/// Parses first-order example lines: `+` or `-`, then the root arguments in
/// order.
pub fn parse_fo_examples(text: &str) -> Result<Vec<FoLabeledExample>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = match tokens.next() {
            Some("+") => true,
            Some("-") => false,
            _ => return Err(fo_syntax(line_no, "example must start with `+` or `-`")),
        };
        let mut args = Vec::new();
        for tok in tokens {
            if !is_constant(tok) {
                return Err(fo_syntax(line_no, format!("invalid constant `{tok}`")));
            }
            args.push(tok.to_string());
        }
        out.push(FoLabeledExample::new(FoExample::new(args), label));
    }
    Ok(out)
}

pub fn serialize_fo_examples(es: &[FoLabeledExample]) -> String {
    let mut out = String::new();
    for le in es {
        out.push(if le.label { '+' } else { '-' });
        for arg in &le.example.args {
            out.push(' ');
            out.push_str(arg);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> FoTerm {
        FoTerm::Var(s.to_string())
    }

    fn c(s: &str) -> FoTerm {
        FoTerm::Const(s.to_string())
    }

    #[test]
    fn parse_and_round_trip() {
        let src = "root r/2.\nr(X, Y) :- q(X, Y), not s(X, Y).\nq(X, Y) :- t(X, Y).\nt(a, b).\ns(a, X2).\n";
        let t = parse_fo(src).unwrap();
        assert_eq!(t.root(), ("r", 2));
        assert!(t.fact_preds().contains("t"));
        assert!(t.fact_preds().contains("s"));
        let printed = serialize_fo(&t);
        let t2 = parse_fo(&printed).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn ground_and_pattern_facts_match() {
        let src = "root r/1.\nr(X) :- f(X).\nf(a).\n";
        let t = parse_fo(src).unwrap();
        assert!(classify_fo(&t, &FoExample::new(vec!["a".into()])).unwrap());
        assert!(!classify_fo(&t, &FoExample::new(vec!["b".into()])).unwrap());

        // Non-ground fact matches any first argument.
        let src = "root r/2.\nr(X, Y) :- f(X, Y).\nf(X, 1).\n";
        let t = parse_fo(src).unwrap();
        assert!(classify_fo(&t, &FoExample::new(vec!["a".into(), "1".into()])).unwrap());
        assert!(!classify_fo(&t, &FoExample::new(vec!["a".into(), "0".into()])).unwrap());
    }

    #[test]
    fn repeated_pattern_variables_bind_consistently() {
        let src = "root r/2.\nr(X, Y) :- f(X, Y).\nf(Z, Z).\n";
        let t = parse_fo(src).unwrap();
        assert!(classify_fo(&t, &FoExample::new(vec!["a".into(), "a".into()])).unwrap());
        assert!(!classify_fo(&t, &FoExample::new(vec!["a".into(), "b".into()])).unwrap());
    }

    #[test]
    fn free_body_variables_are_existential() {
        // y is free in the body: r(x) holds if f(x, y) for some y.
        let t = FoTheory::new(
            ("r", 1),
            [(
                FoAtom::new("r", vec![v("X")]),
                vec![FoLiteral::new(Sign::Pos, FoAtom::new("f", vec![v("X"), v("Y")]))],
            )],
            [FoAtom::new("f", vec![c("a"), c("b")])],
        )
        .unwrap();
        assert!(classify_fo(&t, &FoExample::new(vec!["a".into()])).unwrap());
        assert!(!classify_fo(&t, &FoExample::new(vec!["b".into()])).unwrap());
    }

    #[test]
    fn recursion_is_rejected() {
        let src = "root r/1.\nr(X) :- q(X).\nq(X) :- r(X).\n";
        assert!(matches!(parse_fo(src), Err(Error::CyclicDependency(_))));
    }

    #[test]
    fn fact_predicate_heading_a_rule_is_rejected() {
        let src = "root r/1.\nr(X) :- f(X).\nf(X) :- g(X).\nf(a).\n";
        assert!(matches!(parse_fo(src), Err(Error::FactPredicateHead(_))));
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let src = "root r/1.\nr(X) :- f(X).\nf(a, b).\n";
        assert!(matches!(parse_fo(src), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn validation_of_the_three_display_theories() {
        // Completely bound but not quasi-propositional.
        let cb = "root r/3.\n\
                  r(X, Y, Z) :- q(X, Y), s(Y, Z).\n\
                  q(X, Y) :- t(X).\n\
                  q(X, Y) :- t(Y), s(Y, X).\n";
        let rep = validate_fo(&parse_fo(cb).unwrap());
        assert!(rep.completely_bound);
        assert!(!rep.quasi_propositional);

        // Quasi-propositional.
        let qp = "root r/3.\n\
                  r(X, Y, Z) :- q(X, Y, Z), s(X, Y, Z).\n\
                  q(X, Y, Z) :- t(X, Y, Z).\n\
                  q(X, Y, Z) :- t(X, Y, Z), s(X, Y, Z).\n";
        let rep = validate_fo(&parse_fo(qp).unwrap());
        assert!(rep.completely_bound);
        assert!(rep.quasi_propositional);

        // Parameter order changes: not quasi-propositional.
        let reordered = "root r/3.\n\
                         r(X, Y, Z) :- q(X, Y, Z), s(X, Y, Z).\n\
                         q(X, Y, Z) :- t(Y, X, Z).\n\
                         q(X, Y, Z) :- t(X, Y, Z), s(Z, Y, X).\n";
        let rep = validate_fo(&parse_fo(reordered).unwrap());
        assert!(rep.completely_bound);
        assert!(!rep.quasi_propositional);
        assert!(rep.non_qp_literals.contains(&"t(Y, X, Z)".to_string()));
    }

    #[test]
    fn propositionalization_preserves_classification() {
        let src = "root r/1.\n\
                   r(X) :- q(X), not s(X).\n\
                   q(X) :- f(X).\n\
                   s(X) :- g(X).\n\
                   f(a).\nf(b).\ng(b).\n";
        let t = parse_fo(src).unwrap();
        let pt = FoPatchableTheory::new(t.clone(), [], Policy::Unrestricted).unwrap();
        let es: Vec<FoLabeledExample> = ["a", "b", "c"]
            .iter()
            .map(|x| FoLabeledExample::new(FoExample::new(vec![x.to_string()]), true))
            .collect();
        let (bundle, hat_es) = propositionalize(&pt, &es).unwrap();
        for (le, hat) in es.iter().zip(&hat_es) {
            let fo = classify_fo(&t, &le.example).unwrap();
            let prop = crate::eval::classify(&bundle.theory_hat, &hat.example);
            assert_eq!(fo, prop, "example {:?}", le.example.args);
        }
    }

    #[test]
    fn propositionalization_requires_quasi_propositional() {
        let src = "root r/2.\nr(X, Y) :- q(X).\nq(X) :- f(X).\nf(a).\n";
        let t = parse_fo(src).unwrap();
        let pt = FoPatchableTheory::new(t, [], Policy::Unrestricted).unwrap();
        let err = propositionalize(&pt, &[]).unwrap_err();
        assert!(matches!(err, Error::NotQuasiPropositional(_)));
    }

    #[test]
    fn propositionalization_requires_ground_facts() {
        let src = "root r/1.\nr(X) :- f(X).\nf(X).\n";
        let t = parse_fo(src).unwrap();
        let pt = FoPatchableTheory::new(t, [], Policy::Unrestricted).unwrap();
        let err = propositionalize(&pt, &[]).unwrap_err();
        assert!(matches!(err, Error::NonGroundFacts(_)));
    }

    #[test]
    fn fpatch_repairs_a_small_instance() {
        // r(X) :- q(X), s(X): q's literal in r's clause is wrongly
        // restrictive for example a; open it.
        let src = "root r/1.\n\
                   r(X) :- q(X), s(X).\n\
                   q(X) :- f(X).\n\
                   s(X) :- g(X).\n\
                   g(a).\ng(b).\nf(b).\n";
        let t = parse_fo(src).unwrap();
        let pt = FoPatchableTheory::new(
            t.clone(),
            [ComponentId::lit("r", 0, 0)],
            Policy::Unrestricted,
        )
        .unwrap();
        let es = vec![
            FoLabeledExample::new(FoExample::new(vec!["a".into()]), true),
            FoLabeledExample::new(FoExample::new(vec!["b".into()]), true),
        ];
        let out = fpatch(&pt, &es).unwrap();
        match out {
            FoPatchOutcome::Repaired { revisions, theory } => {
                assert_eq!(revisions.len(), 1);
                assert_eq!(revisions[0].kind, RevisionKind::Delete);
                for le in &es {
                    assert_eq!(classify_fo(&theory, &le.example).unwrap(), le.label);
                }
            }
            other => panic!("expected repair, got {other:?}"),
        }
    }

    #[test]
    fn fpatch_disable_keys_on_instantiations() {
        // The r clause must be disabled for example a but kept for b; the
        // two examples carry distinct fact profiles.
        let src = "root r/1.\n\
                   r(X) :- q(X).\n\
                   q(X) :- f(X).\n\
                   q(X) :- g(X).\n\
                   f(a).\nf(b).\ng(b).\n";
        let t = parse_fo(src).unwrap();
        let pt = FoPatchableTheory::new(
            t.clone(),
            [ComponentId::clause("r", 0)],
            Policy::Unrestricted,
        )
        .unwrap();
        let es = vec![
            FoLabeledExample::new(FoExample::new(vec!["a".into()]), false),
            FoLabeledExample::new(FoExample::new(vec!["b".into()]), true),
        ];
        let out = fpatch(&pt, &es).unwrap();
        match out {
            FoPatchOutcome::Repaired { revisions, theory } => {
                assert_eq!(revisions[0].kind, RevisionKind::Disable);
                assert_eq!(revisions[0].disabling, vec![vec!["a".to_string()]]);
                assert!(!classify_fo(&theory, &es[0].example).unwrap());
                assert!(classify_fo(&theory, &es[1].example).unwrap());
                // The synthesized theory stays parseable.
                let reparsed = parse_fo(&serialize_fo(&theory)).unwrap();
                assert!(!classify_fo(&reparsed, &es[0].example).unwrap());
            }
            other => panic!("expected repair, got {other:?}"),
        }
    }

    #[test]
    fn examples_sharing_a_fact_profile_are_identified_by_the_reduction() {
        // Examples a and b satisfy exactly the same fact predicates, so the
        // propositional image cannot tell them apart; conflicting labels
        // make the reduced instance unrepairable.
        let src = "root r/1.\n\
                   r(X) :- q(X).\n\
                   q(X) :- f(X).\n\
                   f(a).\nf(b).\n";
        let t = parse_fo(src).unwrap();
        let pt = FoPatchableTheory::new(
            t,
            [ComponentId::clause("r", 0)],
            Policy::Unrestricted,
        )
        .unwrap();
        let es = vec![
            FoLabeledExample::new(FoExample::new(vec!["a".into()]), false),
            FoLabeledExample::new(FoExample::new(vec!["b".into()]), true),
        ];
        assert!(!fpatch(&pt, &es).unwrap().is_repaired());
    }

    #[test]
    fn fpatch_unrepairable() {
        let src = "root r/1.\nr(X) :- q(X).\nq(X) :- f(X).\nf(a).\n";
        let t = parse_fo(src).unwrap();
        // Nothing open: a wrong label cannot be repaired.
        let pt = FoPatchableTheory::new(t, [], Policy::Unrestricted).unwrap();
        let es = vec![FoLabeledExample::new(FoExample::new(vec!["b".into()]), true)];
        assert!(!fpatch(&pt, &es).unwrap().is_repaired());
    }

    #[test]
    fn depth_and_negation_freedom() {
        let src = "root r/1.\nr(X) :- q(X).\nq(X) :- f(X).\nf(a).\n";
        let t = parse_fo(src).unwrap();
        assert_eq!(t.depth(), 2);
        assert!(t.is_negation_free());
        let src = "root r/1.\nr(X) :- not q(X).\nq(X) :- f(X).\nf(a).\n";
        assert!(!parse_fo(src).unwrap().is_negation_free());
    }
}
