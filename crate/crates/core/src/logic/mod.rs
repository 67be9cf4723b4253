//! Abstract and concrete syntax of relational first-order logic with equality.
//!
//! Signatures carry relation symbols (with arity) and constant symbols; there
//! are no function symbols. Counting quantifiers (`exists>=N x. f`) are
//! parse-time sugar and are expanded into primitive syntax immediately.

mod parser;
mod render;

pub use parser::{parse_formula, parse_formula_with_params, parse_signature, ParseError};
pub use render::render_formula;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol `{0}` declared more than once")]
    DuplicateSymbol(String),
    #[error("relation `{0}` must have arity >= 1")]
    ZeroArity(String),
}

/// A relational signature: relation symbols with arities plus constant symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Signature {
    pub name: String,
    relations: BTreeMap<String, usize>,
    constants: BTreeSet<String>,
}

impl Signature {
    pub fn new(
        name: impl Into<String>,
        relations: impl IntoIterator<Item = (String, usize)>,
        constants: impl IntoIterator<Item = String>,
    ) -> Result<Self, SignatureError> {
        let mut rels = BTreeMap::new();
        for (r, k) in relations {
            if k == 0 {
                return Err(SignatureError::ZeroArity(r));
            }
            if rels.insert(r.clone(), k).is_some() {
                return Err(SignatureError::DuplicateSymbol(r));
            }
        }
        let mut consts = BTreeSet::new();
        for c in constants {
            if rels.contains_key(&c) || !consts.insert(c.clone()) {
                return Err(SignatureError::DuplicateSymbol(c));
            }
        }
        Ok(Signature {
            name: name.into(),
            relations: rels,
            constants: consts,
        })
    }

    /// The empty signature (no relations, no constants).
    pub fn empty(name: impl Into<String>) -> Self {
        Signature {
            name: name.into(),
            relations: BTreeMap::new(),
            constants: BTreeSet::new(),
        }
    }

    pub fn relations(&self) -> &BTreeMap<String, usize> {
        &self.relations
    }

    pub fn constants(&self) -> &BTreeSet<String> {
        &self.constants
    }

    pub fn arity(&self, relation: &str) -> Option<usize> {
        self.relations.get(relation).copied()
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.contains(name)
    }

    /// Signature equality that ignores the display name.
    pub fn same_symbols(&self, other: &Signature) -> bool {
        self.relations == other.relations && self.constants == other.constants
    }
}

/// A term is a variable or a constant symbol of the ambient signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// First-order formulas over a relational signature, with equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Equal(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Formula {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn iff(self, other: Formula) -> Formula {
        Formula::Iff(Box::new(self), Box::new(other))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::ForAll(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn equal(l: Term, r: Term) -> Formula {
        Formula::Equal(l, r)
    }

    /// Conjunction of a sequence, right-folded; `true` for the empty sequence.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut parts: Vec<_> = parts.into_iter().collect();
        match parts.pop() {
            None => Formula::True,
            Some(last) => parts.into_iter().rev().fold(last, |acc, f| f.and(acc)),
        }
    }

    /// Disjunction of a sequence, right-folded; `false` for the empty sequence.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut parts: Vec<_> = parts.into_iter().collect();
        match parts.pop() {
            None => Formula::False,
            Some(last) => parts.into_iter().rev().fold(last, |acc, f| f.or(acc)),
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let mut visit_term = |t: &Term, bound: &[String], out: &mut Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Equal(l, r) => {
                visit_term(l, bound, out);
                visit_term(r, bound, out);
            }
            Formula::Rel(_, args) => {
                for t in args {
                    visit_term(t, bound, out);
                }
            }
            Formula::Not(g) => g.collect_free(bound, out),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Formula::ForAll(v, g) | Formula::Exists(v, g) => {
                bound.push(v.clone());
                g.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// All variable names occurring anywhere (free or bound).
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut BTreeSet<String>) {
        let mut visit_term = |t: &Term, out: &mut BTreeSet<String>| {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Equal(l, r) => {
                visit_term(l, out);
                visit_term(r, out);
            }
            Formula::Rel(_, args) => {
                for t in args {
                    visit_term(t, out);
                }
            }
            Formula::Not(g) => g.collect_all_vars(out),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => {
                l.collect_all_vars(out);
                r.collect_all_vars(out);
            }
            Formula::ForAll(v, g) | Formula::Exists(v, g) => {
                out.insert(v.clone());
                g.collect_all_vars(out);
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Constant symbols occurring in the formula.
    pub fn constants_used(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants(&self, out: &mut BTreeSet<String>) {
        let mut visit_term = |t: &Term, out: &mut BTreeSet<String>| {
            if let Term::Const(c) = t {
                out.insert(c.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Equal(l, r) => {
                visit_term(l, out);
                visit_term(r, out);
            }
            Formula::Rel(_, args) => {
                for t in args {
                    visit_term(t, out);
                }
            }
            Formula::Not(g) => g.collect_constants(out),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => {
                l.collect_constants(out);
                r.collect_constants(out);
            }
            Formula::ForAll(_, g) | Formula::Exists(_, g) => g.collect_constants(out),
        }
    }

    /// Checks relation arities and constant symbols against `sig`.
    pub fn well_formed_over(&self, sig: &Signature) -> Result<(), String> {
        let check_term = |t: &Term| -> Result<(), String> {
            if let Term::Const(c) = t {
                if !sig.has_constant(c) {
                    return Err(format!("unknown constant `{c}`"));
                }
            }
            Ok(())
        };
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Equal(l, r) => {
                check_term(l)?;
                check_term(r)
            }
            Formula::Rel(name, args) => {
                let arity = sig
                    .arity(name)
                    .ok_or_else(|| format!("unknown relation `{name}`"))?;
                if arity != args.len() {
                    return Err(format!(
                        "relation `{name}` has arity {arity}, applied to {} arguments",
                        args.len()
                    ));
                }
                args.iter().try_for_each(check_term)
            }
            Formula::Not(g) => g.well_formed_over(sig),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => {
                l.well_formed_over(sig)?;
                r.well_formed_over(sig)
            }
            Formula::ForAll(_, g) | Formula::Exists(_, g) => g.well_formed_over(sig),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_formula(self))
    }
}

/// Picks a name based on `base` that avoids every name in `avoid`, by
/// appending primes.
pub fn fresh_var(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut candidate = base.to_string();
    while avoid.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

/// Capture-avoiding simultaneous substitution of terms for free variables.
pub fn substitute(f: &Formula, map: &BTreeMap<String, Term>) -> Formula {
    if map.is_empty() {
        return f.clone();
    }
    let sub_term = |t: &Term| -> Term {
        match t {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
        }
    };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Equal(l, r) => Formula::Equal(sub_term(l), sub_term(r)),
        Formula::Rel(name, args) => {
            Formula::Rel(name.clone(), args.iter().map(sub_term).collect())
        }
        Formula::Not(g) => Formula::not(substitute(g, map)),
        Formula::And(l, r) => substitute(l, map).and(substitute(r, map)),
        Formula::Or(l, r) => substitute(l, map).or(substitute(r, map)),
        Formula::Implies(l, r) => substitute(l, map).implies(substitute(r, map)),
        Formula::Iff(l, r) => substitute(l, map).iff(substitute(r, map)),
        Formula::ForAll(v, g) => {
            let (v, g) = substitute_under_binder(v, g, map);
            Formula::ForAll(v, Box::new(g))
        }
        Formula::Exists(v, g) => {
            let (v, g) = substitute_under_binder(v, g, map);
            Formula::Exists(v, Box::new(g))
        }
    }
}

fn substitute_under_binder(
    var: &str,
    body: &Formula,
    map: &BTreeMap<String, Term>,
) -> (String, Formula) {
    // Drop any binding for the bound variable itself.
    let mut inner: BTreeMap<String, Term> = map
        .iter()
        .filter(|(k, _)| k.as_str() != var)
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    // Only substitutions that can actually fire matter for capture.
    let body_free = body.free_vars();
    inner.retain(|k, _| body_free.iter().any(|v| v == k));
    if inner.is_empty() {
        return (var.to_string(), body.clone());
    }
    let captures = inner
        .values()
        .any(|t| matches!(t, Term::Var(v) if v == var));
    if !captures {
        return (var.to_string(), substitute(body, &inner));
    }
    // Rename the binder away from everything in sight.
    let mut avoid: BTreeSet<String> = body.all_vars();
    for t in inner.values() {
        if let Term::Var(v) = t {
            avoid.insert(v.clone());
        }
    }
    avoid.extend(inner.keys().cloned());
    let renamed = fresh_var(var, &avoid);
    inner.insert(var.to_string(), Term::var(renamed.clone()));
    (renamed, substitute(body, &inner))
}

/// Expands the counting quantifier `exists>=n v. body` into primitive syntax:
/// n fresh witnesses, pairwise distinct, each satisfying the body. Returns
/// `true` for n = 0.
pub fn expand_counting(n: usize, var: &str, body: &Formula) -> Formula {
    if n == 0 {
        return Formula::True;
    }
    let mut avoid: BTreeSet<String> = body.all_vars();
    avoid.remove(var);
    let mut names = Vec::with_capacity(n);
    for i in 1..=n {
        let name = fresh_var(&format!("{var}{i}"), &avoid);
        avoid.insert(name.clone());
        names.push(name);
    }
    let mut parts = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            parts.push(Formula::not(Formula::Equal(
                Term::var(names[i].clone()),
                Term::var(names[j].clone()),
            )));
        }
    }
    for name in &names {
        let mut map = BTreeMap::new();
        map.insert(var.to_string(), Term::var(name.clone()));
        parts.push(substitute(body, &map));
    }
    let mut out = Formula::conj(parts);
    for name in names.into_iter().rev() {
        out = Formula::exists(name, out);
    }
    out
}

/// A rule mapping a natural-number parameter to a sentence.
#[derive(Clone)]
pub struct AxiomSchema {
    pub name: String,
    gen: Arc<dyn Fn(usize) -> Formula + Send + Sync>,
}

impl AxiomSchema {
    pub fn new(
        name: impl Into<String>,
        gen: impl Fn(usize) -> Formula + Send + Sync + 'static,
    ) -> Self {
        AxiomSchema {
            name: name.into(),
            gen: Arc::new(gen),
        }
    }

    pub fn instance(&self, n: usize) -> Formula {
        (self.gen)(n)
    }
}

impl fmt::Debug for AxiomSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AxiomSchema({})", self.name)
    }
}

/// A theory given by plain axioms plus parameterized axiom schemas.
#[derive(Debug, Clone)]
pub struct SchemaTheory {
    pub name: String,
    pub signature: Signature,
    pub axioms: Vec<Formula>,
    pub schemas: Vec<AxiomSchema>,
}

impl SchemaTheory {
    /// Plain axioms plus all schema instances with parameter <= `bound`.
    /// Every returned sentence is checked closed and well-formed.
    pub fn axiom_base(&self, bound: usize) -> Result<Vec<Formula>, String> {
        let mut out = Vec::new();
        for ax in &self.axioms {
            self.check_sentence(ax)?;
            out.push(ax.clone());
        }
        for schema in &self.schemas {
            for n in 0..=bound {
                let inst = schema.instance(n);
                self.check_sentence(&inst)?;
                out.push(inst);
            }
        }
        Ok(out)
    }

    fn check_sentence(&self, f: &Formula) -> Result<(), String> {
        f.well_formed_over(&self.signature)?;
        if !f.is_sentence() {
            return Err(format!("axiom `{f}` of theory {} is not closed", self.name));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(s: &str) -> Term {
        Term::var(s)
    }

    #[test]
    fn substitute_replaces_free_variable() {
        let f = Formula::Equal(var("x"), var("y"));
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), Term::constant("c"));
        assert_eq!(
            substitute(&f, &m),
            Formula::Equal(Term::constant("c"), var("y"))
        );
    }

    #[test]
    fn substitute_avoids_capture() {
        // (exists y. x = y)[x -> y]  ==>  exists y'. y = y'
        let f = Formula::exists("y", Formula::Equal(var("x"), var("y")));
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), var("y"));
        let got = substitute(&f, &m);
        assert_eq!(
            got,
            Formula::exists("y'", Formula::Equal(var("y"), var("y'")))
        );
    }

    #[test]
    fn substitute_is_identity_on_untouched_formula() {
        let f = Formula::Equal(var("x"), var("x"));
        let mut m = BTreeMap::new();
        m.insert("z".to_string(), Term::constant("c"));
        assert_eq!(substitute(&f, &m), f);
    }

    #[test]
    fn counting_zero_is_true() {
        let body = Formula::Equal(var("x"), var("x"));
        assert_eq!(expand_counting(0, "x", &body), Formula::True);
    }

    #[test]
    fn counting_two_shape() {
        let body = Formula::Equal(var("x"), var("x"));
        let got = expand_counting(2, "x", &body);
        let expected = Formula::exists(
            "x1",
            Formula::exists(
                "x2",
                Formula::conj(vec![
                    Formula::not(Formula::Equal(var("x1"), var("x2"))),
                    Formula::Equal(var("x1"), var("x1")),
                    Formula::Equal(var("x2"), var("x2")),
                ]),
            ),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn counting_block_counts() {
        // n top-level existentials, n(n-1)/2 disequalities
        for n in 0..6 {
            let body = Formula::Equal(var("x"), var("x"));
            let mut f = expand_counting(n, "x", &body);
            let mut quantifiers = 0;
            while let Formula::Exists(_, inner) = f {
                quantifiers += 1;
                f = *inner;
            }
            assert_eq!(quantifiers, n);
            let mut disequalities = 0;
            let mut stack = vec![f];
            while let Some(g) = stack.pop() {
                match g {
                    Formula::And(l, r) => {
                        stack.push(*l);
                        stack.push(*r);
                    }
                    Formula::Not(inner) => {
                        if matches!(*inner, Formula::Equal(_, _)) {
                            disequalities += 1;
                        }
                    }
                    _ => {}
                }
            }
            assert_eq!(disequalities, n * n.saturating_sub(1) / 2);
        }
    }

    #[test]
    fn counting_freshness_dodges_collisions() {
        // body already mentions x1 free: witnesses must not collide with it
        let body = Formula::Equal(var("x"), var("x1"));
        let f = expand_counting(1, "x", &body);
        assert_eq!(
            f,
            Formula::exists("x1'", Formula::Equal(var("x1'"), var("x1")))
        );
    }

    #[test]
    fn free_vars_in_order() {
        let f = Formula::Equal(var("y"), var("x")).and(Formula::exists(
            "z",
            Formula::Equal(var("z"), var("w")),
        ));
        assert_eq!(f.free_vars(), vec!["y", "x", "w"]);
    }

    #[test]
    fn signature_rejects_duplicates_and_zero_arity() {
        assert!(Signature::new("s", vec![("R".into(), 0)], vec![]).is_err());
        assert!(Signature::new("s", vec![("R".into(), 1)], vec!["R".into()]).is_err());
        assert!(Signature::new("s", vec![], vec!["c".into(), "c".into()]).is_err());
    }

    #[test]
    fn substitution_composes_on_disjoint_ranges() {
        let f = Formula::exists(
            "u",
            Formula::Equal(var("x"), var("u")).and(Formula::Equal(var("y"), var("z"))),
        );
        let mut m1 = BTreeMap::new();
        m1.insert("x".to_string(), var("a"));
        let mut m2 = BTreeMap::new();
        m2.insert("y".to_string(), var("b"));
        let mut composed = m1.clone();
        composed.extend(m2.clone());
        assert_eq!(
            substitute(&substitute(&f, &m1), &m2),
            substitute(&f, &composed)
        );
    }
}
