//! Finite first-order structures and brute-force satisfaction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::logic::{Formula, Signature, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("relation `{relation}` tuple {tuple:?} has wrong arity (expected {arity})")]
    BadArity {
        relation: String,
        tuple: Vec<usize>,
        arity: usize,
    },
    #[error("relation `{relation}` tuple {tuple:?} is outside the domain 0..{size}")]
    TupleOutOfDomain {
        relation: String,
        tuple: Vec<usize>,
        size: usize,
    },
    #[error("relation `{0}` is not in the signature")]
    UnknownRelation(String),
    #[error("constant `{0}` is not in the signature")]
    UnknownConstant(String),
    #[error("constant `{constant}` interpreted as {value}, outside the domain 0..{size}")]
    ConstantOutOfDomain {
        constant: String,
        value: usize,
        size: usize,
    },
    #[error("constant `{0}` has no interpretation")]
    UninterpretedConstant(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound free variable `{0}`")]
    UnboundVariable(String),
    #[error("formula is not well-formed over the structure's signature: {0}")]
    IllFormed(String),
}

/// A map from variable names to domain elements.
pub type Assignment = BTreeMap<String, usize>;

/// A finite structure: domain `{0, .., size-1}`, relation tables, constant
/// denotations. Every constant of the signature must be interpreted (which
/// forces `size >= 1` when constants exist).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FiniteStructure {
    sig: Signature,
    size: usize,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    constants: BTreeMap<String, usize>,
}

impl FiniteStructure {
    pub fn new(
        sig: Signature,
        size: usize,
        relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
        constants: BTreeMap<String, usize>,
    ) -> Result<Self, StructureError> {
        for (r, tuples) in &relations {
            let arity = sig
                .arity(r)
                .ok_or_else(|| StructureError::UnknownRelation(r.clone()))?;
            for t in tuples {
                if t.len() != arity {
                    return Err(StructureError::BadArity {
                        relation: r.clone(),
                        tuple: t.clone(),
                        arity,
                    });
                }
                if t.iter().any(|&e| e >= size) {
                    return Err(StructureError::TupleOutOfDomain {
                        relation: r.clone(),
                        tuple: t.clone(),
                        size,
                    });
                }
            }
        }
        for (c, &v) in &constants {
            if !sig.has_constant(c) {
                return Err(StructureError::UnknownConstant(c.clone()));
            }
            if v >= size {
                return Err(StructureError::ConstantOutOfDomain {
                    constant: c.clone(),
                    value: v,
                    size,
                });
            }
        }
        for c in sig.constants() {
            if !constants.contains_key(c) {
                return Err(StructureError::UninterpretedConstant(c.clone()));
            }
        }
        let mut relations = relations;
        for r in sig.relations().keys() {
            relations.entry(r.clone()).or_default();
        }
        Ok(FiniteStructure {
            sig,
            size,
            relations,
            constants,
        })
    }

    /// A structure over the empty signature with `size` elements.
    pub fn anonymous(size: usize) -> Self {
        FiniteStructure {
            sig: Signature::empty("empty"),
            size,
            relations: BTreeMap::new(),
            constants: BTreeMap::new(),
        }
    }

    /// A structure over a single-constant signature.
    pub fn pointed(size: usize, constant: &str, value: usize) -> Result<Self, StructureError> {
        let sig = Signature::new("pointed", vec![], vec![constant.to_string()])
            .expect("single constant");
        let mut constants = BTreeMap::new();
        constants.insert(constant.to_string(), value);
        FiniteStructure::new(sig, size, BTreeMap::new(), constants)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> {
        0..self.size
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> &BTreeMap<String, BTreeSet<Vec<usize>>> {
        &self.relations
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    pub fn constants(&self) -> &BTreeMap<String, usize> {
        &self.constants
    }

    fn term_value(&self, t: &Term, env: &Assignment) -> Result<usize, EvalError> {
        match t {
            Term::Var(v) => env
                .get(v)
                .copied()
                .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Term::Const(c) => self
                .constants
                .get(c)
                .copied()
                .ok_or_else(|| EvalError::IllFormed(format!("unknown constant `{c}`"))),
        }
    }

    /// Tarski satisfaction: `self |= f [env]`.
    pub fn eval(&self, f: &Formula, env: &Assignment) -> Result<bool, EvalError> {
        let mut env = env.clone();
        self.eval_mut(f, &mut env)
    }

    fn eval_mut(&self, f: &Formula, env: &mut Assignment) -> Result<bool, EvalError> {
        match f {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Equal(l, r) => Ok(self.term_value(l, env)? == self.term_value(r, env)?),
            Formula::Rel(name, args) => {
                let table = self
                    .relations
                    .get(name)
                    .ok_or_else(|| EvalError::IllFormed(format!("unknown relation `{name}`")))?;
                let tuple: Vec<usize> = args
                    .iter()
                    .map(|t| self.term_value(t, env))
                    .collect::<Result<_, _>>()?;
                if tuple.len() != self.sig.arity(name).unwrap_or(tuple.len()) {
                    return Err(EvalError::IllFormed(format!(
                        "arity mismatch for `{name}`"
                    )));
                }
                Ok(table.contains(&tuple))
            }
            Formula::Not(g) => Ok(!self.eval_mut(g, env)?),
            Formula::And(l, r) => Ok(self.eval_mut(l, env)? && self.eval_mut(r, env)?),
            Formula::Or(l, r) => Ok(self.eval_mut(l, env)? || self.eval_mut(r, env)?),
            Formula::Implies(l, r) => Ok(!self.eval_mut(l, env)? || self.eval_mut(r, env)?),
            Formula::Iff(l, r) => Ok(self.eval_mut(l, env)? == self.eval_mut(r, env)?),
            Formula::ForAll(v, g) => {
                let saved = env.get(v).copied();
                for e in 0..self.size {
                    env.insert(v.clone(), e);
                    if !self.eval_mut(g, env)? {
                        restore(env, v, saved);
                        return Ok(false);
                    }
                }
                restore(env, v, saved);
                Ok(true)
            }
            Formula::Exists(v, g) => {
                let saved = env.get(v).copied();
                for e in 0..self.size {
                    env.insert(v.clone(), e);
                    if self.eval_mut(g, env)? {
                        restore(env, v, saved);
                        return Ok(true);
                    }
                }
                restore(env, v, saved);
                Ok(false)
            }
        }
    }

    /// Satisfaction of a sentence under the empty assignment.
    pub fn models(&self, f: &Formula) -> Result<bool, EvalError> {
        let mut env = Assignment::new();
        self.eval_mut(f, &mut env)
    }

    /// The set `{ a-bar in domain^k : self |= f [vars := a-bar] }`.
    ///
    /// Free variables of `f` must be among `vars`.
    pub fn definable_set(
        &self,
        f: &Formula,
        vars: &[String],
    ) -> Result<BTreeSet<Vec<usize>>, EvalError> {
        for v in f.free_vars() {
            if !vars.contains(&v) {
                return Err(EvalError::UnboundVariable(v));
            }
        }
        let mut out = BTreeSet::new();
        let mut env = Assignment::new();
        for tuple in tuples(self.size, vars.len()) {
            for (v, &e) in vars.iter().zip(tuple.iter()) {
                env.insert(v.clone(), e);
            }
            if self.eval_mut(f, &mut env)? {
                out.insert(tuple);
            }
        }
        Ok(out)
    }
}

fn restore(env: &mut Assignment, var: &str, saved: Option<usize>) {
    match saved {
        Some(v) => {
            env.insert(var.to_string(), v);
        }
        None => {
            env.remove(var);
        }
    }
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "size {}", self.size)?;
        for (c, v) in &self.constants {
            write!(f, "; {c} = {v}")?;
        }
        for (r, tuples) in &self.relations {
            let rows: Vec<String> = tuples
                .iter()
                .map(|t| {
                    format!(
                        "({})",
                        t.iter()
                            .map(|e| e.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    )
                })
                .collect();
            write!(f, "; {r} = {{{}}}", rows.join(" "))?;
        }
        Ok(())
    }
}

/// All tuples over `0..size` of the given arity, in lexicographic order.
pub fn tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * size);
        for prefix in &out {
            for e in 0..size {
                let mut t = prefix.clone();
                t.push(e);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{expand_counting, parse_formula};

    #[test]
    fn counting_formula_thresholds() {
        let body = Formula::Equal(Term::var("x"), Term::var("x"));
        let two = expand_counting(2, "x", &body);
        assert!(FiniteStructure::anonymous(2).models(&two).unwrap());
        assert!(!FiniteStructure::anonymous(1).models(&two).unwrap());
    }

    #[test]
    fn counting_three_over_sizes_one_to_five() {
        let body = Formula::Equal(Term::var("x"), Term::var("x"));
        let three = expand_counting(3, "x", &body);
        let got: Vec<bool> = (1..=5)
            .map(|n| FiniteStructure::anonymous(n).models(&three).unwrap())
            .collect();
        assert_eq!(got, vec![false, false, true, true, true]);
    }

    #[test]
    fn constant_equation_pointwise() {
        let a = FiniteStructure::pointed(3, "c", 2).unwrap();
        let f = parse_formula("x = c", a.signature()).unwrap();
        let mut env = Assignment::new();
        env.insert("x".into(), 2);
        assert!(a.eval(&f, &env).unwrap());
        env.insert("x".into(), 0);
        assert!(!a.eval(&f, &env).unwrap());
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let a = FiniteStructure::anonymous(2);
        let f = Formula::Equal(Term::var("x"), Term::var("x"));
        assert_eq!(
            a.eval(&f, &Assignment::new()),
            Err(EvalError::UnboundVariable("x".into()))
        );
    }

    #[test]
    fn definable_set_examples() {
        let a = FiniteStructure::pointed(3, "c", 2).unwrap();
        let f = parse_formula("!(x = c)", a.signature()).unwrap();
        let got = a.definable_set(&f, &["x".to_string()]).unwrap();
        let want: BTreeSet<Vec<usize>> = [vec![0], vec![1]].into_iter().collect();
        assert_eq!(got, want);

        let full = parse_formula("x = x", a.signature()).unwrap();
        assert_eq!(
            a.definable_set(&full, &["x".to_string()]).unwrap().len(),
            3
        );

        let b = FiniteStructure::anonymous(3);
        let g = parse_formula("exists y. !(x = y)", b.signature()).unwrap();
        assert_eq!(b.definable_set(&g, &["x".to_string()]).unwrap().len(), 3);
    }

    #[test]
    fn quantifiers_over_empty_domain() {
        let a = FiniteStructure::anonymous(0);
        let all = Formula::forall("x", Formula::False);
        let some = Formula::exists("x", Formula::True);
        assert!(a.models(&all).unwrap());
        assert!(!a.models(&some).unwrap());
    }

    #[test]
    fn structure_validation() {
        let sig = Signature::new("s", vec![("R".to_string(), 2)], vec!["c".to_string()]).unwrap();
        let mut rels = BTreeMap::new();
        rels.insert("R".to_string(), [vec![0, 5]].into_iter().collect());
        let mut consts = BTreeMap::new();
        consts.insert("c".to_string(), 0);
        assert!(matches!(
            FiniteStructure::new(sig.clone(), 2, rels, consts.clone()),
            Err(StructureError::TupleOutOfDomain { .. })
        ));
        assert!(matches!(
            FiniteStructure::new(sig, 2, BTreeMap::new(), BTreeMap::new()),
            Err(StructureError::UninterpretedConstant(_))
        ));
    }
}
