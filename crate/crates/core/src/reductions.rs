//! Hardness-construction generators: SAT as a propositional patching
//! instance over deletion-only literal revisions, and MONOTONE-SAT as
//! first-order patching instances in ground-fact and quasi-propositional
//! form. A tiny exhaustive CNF enumerator serves as the independent test
//! oracle.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::firstorder::{FoAtom, FoLiteral, FoPatchableTheory, FoTerm, FoTheory};
use crate::theory::{
    BodyLiteral, ComponentId, Example, LabeledExample, PatchableTheory, Policy, Sign,
    Theory,
};
use crate::firstorder::{FoExample, FoLabeledExample};

/// A signed reference to a CNF variable by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnfLit {
    pub var: usize,
    pub positive: bool,
}

impl CnfLit {
    pub fn pos(var: usize) -> Self {
        CnfLit { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        CnfLit { var, positive: false }
    }
}

/// A CNF formula over named variables. Duplicate literals inside a clause
/// are collapsed at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub variables: Vec<String>,
    pub clauses: Vec<Vec<CnfLit>>,
}

impl Cnf {
    pub fn new(
        variables: Vec<String>,
        clauses: impl IntoIterator<Item = Vec<CnfLit>>,
    ) -> Result<Self> {
        let mut out = Vec::new();
        for clause in clauses {
            let mut deduped: Vec<CnfLit> = Vec::new();
            for lit in clause {
                if lit.var >= variables.len() {
                    return Err(Error::CnfVariableOutOfRange(lit.var));
                }
                if !deduped.contains(&lit) {
                    deduped.push(lit);
                }
            }
            out.push(deduped);
        }
        Ok(Cnf { variables, clauses: out })
    }

    /// Every clause all-positive or all-negative.
    pub fn is_monotone(&self) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().all(|l| l.positive) || c.iter().all(|l| !l.positive)
        })
    }

    pub fn satisfied_by(&self, assignment: &Assignment) -> bool {
        self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|lit| assignment.values[lit.var] == lit.positive)
        })
    }
}

/// A total truth assignment to a CNF's variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub values: Vec<bool>,
}

/// Exhaustive satisfiability check, returning the first satisfying
/// assignment in lexicographic order (variable 0 most significant, false
/// before true), or `None` for unsatisfiable input.
pub fn cnf_sat_oracle(cnf: &Cnf) -> Result<Option<Assignment>> {
    cnf_sat_oracle_with_budget(cnf, 20)
}

pub fn cnf_sat_oracle_with_budget(cnf: &Cnf, budget: usize) -> Result<Option<Assignment>> {
    let n = cnf.variables.len();
    if n > budget {
        return Err(Error::BudgetExceeded { needed: n, budget });
    }
    for mask in 0u64..(1u64 << n) {
        let values: Vec<bool> = (0..n).map(|i| mask & (1 << (n - 1 - i)) != 0).collect();
        let assignment = Assignment { values };
        if cnf.satisfied_by(&assignment) {
            return Ok(Some(assignment));
        }
    }
    Ok(None)
}

/// Parses DIMACS CNF: a `p cnf V C` header, then clauses as signed integers
/// terminated by `0`. Variable `i` is named `x<i>`.
pub fn parse_dimacs(text: &str) -> Result<Cnf> {
    let mut var_count: Option<usize> = None;
    let mut clauses: Vec<Vec<CnfLit>> = Vec::new();
    let mut current: Vec<CnfLit> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let mut parts = rest.split_whitespace();
            if parts.next() != Some("cnf") {
                return Err(Error::Syntax {
                    line: line_no,
                    col: 1,
                    msg: "expected `p cnf V C` header".into(),
                });
            }
            let v: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or(Error::Syntax {
                    line: line_no,
                    col: 1,
                    msg: "invalid variable count".into(),
                })?;
            var_count = Some(v);
            continue;
        }
        let n = var_count.ok_or(Error::Syntax {
            line: line_no,
            col: 1,
            msg: "clause before `p cnf` header".into(),
        })?;
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| Error::Syntax {
                line: line_no,
                col: 1,
                msg: format!("invalid literal `{tok}`"),
            })?;
            if v == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                let var = v.unsigned_abs() as usize - 1;
                if var >= n {
                    return Err(Error::CnfVariableOutOfRange(var));
                }
                current.push(if v > 0 { CnfLit::pos(var) } else { CnfLit::neg(var) });
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let n = var_count.ok_or(Error::MissingRoot)?;
    let variables: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    Cnf::new(variables, clauses)
}

/// Builds the deletion-only patching instance for a CNF formula.
///
/// The theory has root `r` over one conjunct proposition `d<i>` per clause,
/// one proposition per variable defined by a single guarded clause
/// `v :- v_guard`, and the guards as primitives. The open components are
/// the guard literals; the single positive example assigns every primitive
/// false. Deleting a guard literal makes its variable true, so deletion
/// sets correspond exactly to satisfying assignments.
pub fn sat_to_ppatch(cnf: &Cnf) -> Result<(PatchableTheory, LabeledExample)> {
    let mut clauses: Vec<(String, Vec<BodyLiteral>)> = Vec::new();
    let root_body: Vec<BodyLiteral> = (1..=cnf.clauses.len())
        .map(|i| BodyLiteral::positive(format!("d{i}")))
        .collect();
    clauses.push(("r".to_string(), root_body));
    for (i, clause) in cnf.clauses.iter().enumerate() {
        for lit in clause {
            let sign = if lit.positive { Sign::Pos } else { Sign::Neg };
            clauses.push((
                format!("d{}", i + 1),
                vec![BodyLiteral::new(sign, cnf.variables[lit.var].clone())],
            ));
        }
    }
    for var in &cnf.variables {
        clauses.push((var.clone(), vec![BodyLiteral::positive(format!("{var}_guard"))]));
    }
    let primitives: Vec<String> =
        cnf.variables.iter().map(|v| format!("{v}_guard")).collect();
    let theory = Theory::new("r", primitives, clauses)?;
    let open: Vec<ComponentId> = cnf
        .variables
        .iter()
        .map(|v| ComponentId::lit(v.clone(), 0, 0))
        .collect();
    let pt = PatchableTheory::new(theory, open, Policy::DeletionOnly)?;
    let example = LabeledExample::new(Example::empty(), true);
    Ok((pt, example))
}

/// Assignment → deletion set for a generated instance: a variable is true
/// iff its guard literal is deleted.
pub fn assignment_to_deletions(cnf: &Cnf, assignment: &Assignment) -> BTreeSet<ComponentId> {
    cnf.variables
        .iter()
        .zip(&assignment.values)
        .filter(|(_, &v)| v)
        .map(|(name, _)| ComponentId::lit(name.clone(), 0, 0))
        .collect()
}

/// Deletion set → assignment, the inverse direction.
pub fn deletions_to_assignment(cnf: &Cnf, deletions: &BTreeSet<ComponentId>) -> Assignment {
    let values: Vec<bool> = cnf
        .variables
        .iter()
        .map(|name| deletions.contains(&ComponentId::lit(name.clone(), 0, 0)))
        .collect();
    Assignment { values }
}

fn require_monotone(cnf: &Cnf) -> Result<()> {
    match cnf
        .clauses
        .iter()
        .position(|c| c.iter().any(|l| l.positive) && c.iter().any(|l| !l.positive))
    {
        Some(i) => Err(Error::NonMonotoneCnf(i)),
        None => Ok(()),
    }
}

fn monotone_examples(cnf: &Cnf) -> Vec<FoLabeledExample> {
    let n = cnf.variables.len();
    let mut out = Vec::new();
    for clause in &cnf.clauses {
        let positive_conjunct = clause.iter().all(|l| l.positive) && !clause.is_empty();
        let members: BTreeSet<usize> = clause.iter().map(|l| l.var).collect();
        let mut args: Vec<String> = (0..n)
            .map(|i| if members.contains(&i) { "0" } else { "1" })
            .map(str::to_string)
            .collect();
        if positive_conjunct {
            // Negative example: clause variables and w at 0.
            args.push("0".to_string());
            out.push(FoLabeledExample::new(FoExample::new(args), false));
        } else {
            // Negative conjunct: positive example, w at 1.
            args.push("1".to_string());
            out.push(FoLabeledExample::new(FoExample::new(args), true));
        }
    }
    out
}

fn full_vector(n: usize) -> Vec<FoTerm> {
    let mut v: Vec<FoTerm> = (1..=n).map(|i| FoTerm::Var(format!("X{i}"))).collect();
    v.push(FoTerm::Var("W".to_string()));
    v
}

/// The ground-fact MONOTONE-SAT construction: depth-3, negation-free,
/// completely bound, with only the `one` literals of the per-variable
/// rules open. Not quasi-propositional — the `q<i>` literals carry a single
/// parameter.
pub fn monotone_sat_to_fpatch_ground(
    cnf: &Cnf,
) -> Result<(FoPatchableTheory, Vec<FoLabeledExample>)> {
    require_monotone(cnf)?;
    let n = cnf.variables.len();
    let vec_full = full_vector(n);
    let mut clauses: Vec<(FoAtom, Vec<FoLiteral>)> = Vec::new();
    let pos = |atom: FoAtom| FoLiteral::new(Sign::Pos, atom);

    clauses.push((
        FoAtom::new("r", vec_full.clone()),
        vec![
            pos(FoAtom::new("s", vec_full.clone())),
            pos(FoAtom::new("t", vec_full.clone())),
        ],
    ));
    clauses.push((
        FoAtom::new("s", vec_full.clone()),
        vec![pos(FoAtom::new("zero", vec![FoTerm::Var("W".into())]))],
    ));
    for i in 1..=n {
        let xi = FoTerm::Var(format!("X{i}"));
        clauses.push((
            FoAtom::new("s", vec_full.clone()),
            vec![
                pos(FoAtom::new(format!("q{i}"), vec![xi.clone()])),
                pos(FoAtom::new("zero", vec![xi])),
            ],
        ));
    }
    clauses.push((
        FoAtom::new("t", vec_full.clone()),
        vec![pos(FoAtom::new("one", vec![FoTerm::Var("W".into())]))],
    ));
    clauses.push((
        FoAtom::new("t", vec_full.clone()),
        (1..=n)
            .map(|i| pos(FoAtom::new(format!("q{i}"), vec![FoTerm::Var(format!("X{i}"))])))
            .collect(),
    ));
    for i in 1..=n {
        clauses.push((
            FoAtom::new(format!("q{i}"), vec![FoTerm::Var("X".into())]),
            vec![pos(FoAtom::new("one", vec![FoTerm::Var("X".into())]))],
        ));
    }
    let facts = vec![
        FoAtom::new("zero", vec![FoTerm::Const("0".into())]),
        FoAtom::new("one", vec![FoTerm::Const("1".into())]),
    ];
    let theory = FoTheory::new(("r", n + 1), clauses, facts)?;
    let open: Vec<ComponentId> = (1..=n)
        .map(|i| ComponentId::lit(format!("q{i}"), 0, 0))
        .collect();
    let pt = FoPatchableTheory::new(theory, open, Policy::DeletionOnly)?;
    Ok((pt, monotone_examples(cnf)))
}

/// The quasi-propositional MONOTONE-SAT construction: every literal carries
/// the root's full vector and the `zero<i>`/`one<i>` fact patterns are
/// non-ground, pinning only their own position.
pub fn monotone_sat_to_fpatch_qp(
    cnf: &Cnf,
) -> Result<(FoPatchableTheory, Vec<FoLabeledExample>)> {
    require_monotone(cnf)?;
    let n = cnf.variables.len();
    let vec_full = full_vector(n);
    let mut clauses: Vec<(FoAtom, Vec<FoLiteral>)> = Vec::new();
    let pos = |atom: FoAtom| FoLiteral::new(Sign::Pos, atom);

    clauses.push((
        FoAtom::new("r", vec_full.clone()),
        vec![
            pos(FoAtom::new("s", vec_full.clone())),
            pos(FoAtom::new("t", vec_full.clone())),
        ],
    ));
    clauses.push((
        FoAtom::new("s", vec_full.clone()),
        vec![pos(FoAtom::new("zero_w", vec_full.clone()))],
    ));
    for i in 1..=n {
        clauses.push((
            FoAtom::new("s", vec_full.clone()),
            vec![
                pos(FoAtom::new(format!("q{i}"), vec_full.clone())),
                pos(FoAtom::new(format!("zero{i}"), vec_full.clone())),
            ],
        ));
    }
    clauses.push((
        FoAtom::new("t", vec_full.clone()),
        vec![pos(FoAtom::new("one_w", vec_full.clone()))],
    ));
    clauses.push((
        FoAtom::new("t", vec_full.clone()),
        (1..=n)
            .map(|i| pos(FoAtom::new(format!("q{i}"), vec_full.clone())))
            .collect(),
    ));
    for i in 1..=n {
        clauses.push((
            FoAtom::new(format!("q{i}"), vec_full.clone()),
            vec![pos(FoAtom::new(format!("one{i}"), vec_full.clone()))],
        ));
    }

    // Fact patterns pin one position and leave the rest free.
    let mut facts = Vec::new();
    let pattern = |fixed: usize, value: &str, n: usize| -> Vec<FoTerm> {
        let mut v: Vec<FoTerm> = (1..=n)
            .map(|i| {
                if i == fixed {
                    FoTerm::Const(value.to_string())
                } else {
                    FoTerm::Var(format!("X{i}"))
                }
            })
            .collect();
        v.push(if fixed == n + 1 {
            FoTerm::Const(value.to_string())
        } else {
            FoTerm::Var("W".to_string())
        });
        v
    };
    for i in 1..=n {
        facts.push(FoAtom::new(format!("zero{i}"), pattern(i, "0", n)));
        facts.push(FoAtom::new(format!("one{i}"), pattern(i, "1", n)));
    }
    facts.push(FoAtom::new("zero_w", pattern(n + 1, "0", n)));
    facts.push(FoAtom::new("one_w", pattern(n + 1, "1", n)));

    let theory = FoTheory::new(("r", n + 1), clauses, facts)?;
    let open: Vec<ComponentId> = (1..=n)
        .map(|i| ComponentId::lit(format!("q{i}"), 0, 0))
        .collect();
    let pt = FoPatchableTheory::new(theory, open, Policy::DeletionOnly)?;
    Ok((pt, monotone_examples(cnf)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::classify;
    use crate::firstorder::{classify_fo, validate_fo};
    use crate::patch::oracle_patch;
    use crate::text::serialize_theory;

    fn figure_cnf() -> Cnf {
        // (a ∨ b) ∧ (¬a ∨ c) ∧ (¬b)
        Cnf::new(
            vec!["a".into(), "b".into(), "c".into()],
            [
                vec![CnfLit::pos(0), CnfLit::pos(1)],
                vec![CnfLit::neg(0), CnfLit::pos(2)],
                vec![CnfLit::neg(1)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn sat_oracle_finds_the_expected_assignment() {
        let cnf = figure_cnf();
        let a = cnf_sat_oracle(&cnf).unwrap().unwrap();
        assert_eq!(a.values, vec![true, false, true]);
    }

    #[test]
    fn sat_oracle_reports_unsat() {
        let cnf = Cnf::new(
            vec!["a".into()],
            [vec![CnfLit::pos(0)], vec![CnfLit::neg(0)]],
        )
        .unwrap();
        assert!(cnf_sat_oracle(&cnf).unwrap().is_none());
    }

    #[test]
    fn empty_clause_list_is_satisfiable_by_all_false() {
        let cnf = Cnf::new(vec!["a".into()], []).unwrap();
        let a = cnf_sat_oracle(&cnf).unwrap().unwrap();
        assert_eq!(a.values, vec![false]);
    }

    #[test]
    fn generated_theory_matches_the_documented_shape() {
        let (pt, example) = sat_to_ppatch(&figure_cnf()).unwrap();
        let expected = "\
root r.
primitive a_guard.
primitive b_guard.
primitive c_guard.
r :- d1, d2, d3.
d1 :- a.
d1 :- b.
d2 :- not a.
d2 :- c.
d3 :- not b.
a :- a_guard.
b :- b_guard.
c :- c_guard.
";
        assert_eq!(serialize_theory(&pt.theory), expected);
        assert_eq!(pt.policy, Policy::DeletionOnly);
        assert!(example.label);
        assert!(example.example.true_primitives.is_empty());
    }

    #[test]
    fn satisfying_deletions_cover_the_example() {
        let cnf = figure_cnf();
        let (pt, example) = sat_to_ppatch(&cnf).unwrap();
        let assignment = Assignment { values: vec![true, false, true] };
        let deletions = assignment_to_deletions(&cnf, &assignment);
        let mut theory = pt.theory.clone();
        for id in &deletions {
            theory = theory.delete_component(id).unwrap();
        }
        assert!(classify(&theory, &example.example));
        assert_eq!(deletions_to_assignment(&cnf, &deletions), assignment);
    }

    #[test]
    fn single_clause_instance_repairs_by_one_deletion() {
        let cnf = Cnf::new(vec!["a".into()], [vec![CnfLit::pos(0)]]).unwrap();
        let (pt, example) = sat_to_ppatch(&cnf).unwrap();
        assert!(!classify(&pt.theory, &example.example));
        let deleted = pt
            .theory
            .delete_component(&ComponentId::lit("a", 0, 0))
            .unwrap();
        assert!(classify(&deleted, &example.example));
        assert!(oracle_patch(&pt, &[example]).unwrap().is_repaired());
    }

    #[test]
    fn negated_unit_clause_needs_no_deletion() {
        let cnf = Cnf::new(vec!["a".into()], [vec![CnfLit::neg(0)]]).unwrap();
        let (pt, example) = sat_to_ppatch(&cnf).unwrap();
        assert!(classify(&pt.theory, &example.example));
    }

    #[test]
    fn dimacs_parsing() {
        let cnf = parse_dimacs("c comment\np cnf 3 2\n1 -2 0\n3 0\n").unwrap();
        assert_eq!(cnf.variables, vec!["x1", "x2", "x3"]);
        assert_eq!(cnf.clauses.len(), 2);
        assert_eq!(cnf.clauses[0], vec![CnfLit::pos(0), CnfLit::neg(1)]);
    }

    #[test]
    fn ground_construction_validates_as_stated() {
        let cnf = Cnf::new(
            vec!["a".into(), "b".into()],
            [vec![CnfLit::pos(0), CnfLit::pos(1)], vec![CnfLit::neg(1)]],
        )
        .unwrap();
        let (pt, es) = monotone_sat_to_fpatch_ground(&cnf).unwrap();
        let report = validate_fo(&pt.theory);
        assert!(!report.quasi_propositional);
        assert!(report.completely_bound);
        assert!(report.ground_facts_only);
        assert!(pt.theory.is_negation_free());
        assert_eq!(pt.theory.depth(), 3);
        assert_eq!(es.len(), 2);
        assert!(!es[0].label);
        assert!(es[1].label);
        // Positive conjunct (a ∨ b): both variables and w at 0.
        assert_eq!(es[0].example.args, vec!["0", "0", "0"]);
        // Negative conjunct (¬b): b at 0, others and w at 1.
        assert_eq!(es[1].example.args, vec!["1", "0", "1"]);
    }

    #[test]
    fn qp_construction_validates_as_stated() {
        let cnf = Cnf::new(
            vec!["a".into(), "b".into()],
            [vec![CnfLit::pos(0), CnfLit::pos(1)], vec![CnfLit::neg(1)]],
        )
        .unwrap();
        let (pt, _) = monotone_sat_to_fpatch_qp(&cnf).unwrap();
        let report = validate_fo(&pt.theory);
        assert!(report.quasi_propositional);
        assert!(!report.ground_facts_only);
        assert!(pt.theory.is_negation_free());
        assert_eq!(pt.theory.depth(), 3);
    }

    #[test]
    fn non_monotone_input_is_rejected() {
        let cnf = Cnf::new(
            vec!["a".into(), "b".into()],
            [vec![CnfLit::pos(0), CnfLit::neg(1)]],
        )
        .unwrap();
        assert!(matches!(
            monotone_sat_to_fpatch_ground(&cnf),
            Err(Error::NonMonotoneCnf(0))
        ));
        assert!(matches!(
            monotone_sat_to_fpatch_qp(&cnf),
            Err(Error::NonMonotoneCnf(0))
        ));
    }

    #[test]
    fn unrevised_ground_instance_classification() {
        // Single positive conjunct (a): its negative example is uncovered
        // while every guard literal is kept.
        let cnf = Cnf::new(vec!["a".into()], [vec![CnfLit::pos(0)]]).unwrap();
        let (pt, es) = monotone_sat_to_fpatch_ground(&cnf).unwrap();
        assert_eq!(classify_fo(&pt.theory, &es[0].example).unwrap(), false);
    }

    /// Keeping a guard literal corresponds to assigning its variable true
    /// in both first-order constructions.
    fn deletion_assignment_equivalence(
        build: impl Fn(&Cnf) -> Result<(FoPatchableTheory, Vec<FoLabeledExample>)>,
    ) {
        let cnf = Cnf::new(
            vec!["a".into(), "b".into()],
            [vec![CnfLit::pos(0), CnfLit::pos(1)], vec![CnfLit::neg(0)]],
        )
        .unwrap();
        let (pt, es) = build(&cnf).unwrap();
        let open: Vec<ComponentId> = pt.open.iter().cloned().collect();
        for mask in 0u32..(1 << open.len()) {
            let mut theory = pt.theory.clone();
            let mut values = vec![true; cnf.variables.len()];
            for (b, id) in open.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    theory = theory.delete_component(id).unwrap();
                    values[b] = false; // deleted guard ⇒ variable false
                }
            }
            let repaired = es
                .iter()
                .all(|le| classify_fo(&theory, &le.example).unwrap() == le.label);
            let satisfies = cnf.satisfied_by(&Assignment { values });
            assert_eq!(repaired, satisfies, "mask {mask:b}");
        }
    }

    #[test]
    fn ground_deletions_match_assignments() {
        deletion_assignment_equivalence(monotone_sat_to_fpatch_ground);
    }

    #[test]
    fn qp_deletions_match_assignments() {
        deletion_assignment_equivalence(monotone_sat_to_fpatch_qp);
    }
}
