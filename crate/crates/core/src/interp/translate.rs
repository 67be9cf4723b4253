//! Syntax-directed formula translation.
//!
//! Each source variable becomes a block of `dim` target variables. Equality
//! maps to the identity formula, relation atoms to their defining formulas,
//! and quantifiers relativize to the domain formula. Atoms mentioning
//! constants are first paraphrased at source level so that the only constant
//! atoms left are `variable = constant`, which become "some tuple in the
//! constant's class is identified with the block".

use std::collections::{BTreeMap, BTreeSet};

use crate::logic::{fresh_var, substitute, Formula, Term};

use super::{arg_var, SchemeError, TranslationScheme};

struct VarAlloc {
    used: BTreeSet<String>,
    dim: usize,
}

impl VarAlloc {
    fn new(f: &Formula, dim: usize) -> Self {
        VarAlloc {
            used: f.all_vars(),
            dim,
        }
    }

    /// Component names for a source variable. One-dimensional schemes keep
    /// the source name; otherwise `v_1..v_d`, bumped with primes on collision.
    fn block(&mut self, v: &str) -> Vec<String> {
        if self.dim == 1 {
            self.used.insert(v.to_string());
            return vec![v.to_string()];
        }
        let mut out = Vec::with_capacity(self.dim);
        for j in 1..=self.dim {
            let name = fresh_var(&format!("{v}_{j}"), &self.used);
            self.used.insert(name.clone());
            out.push(name);
        }
        out
    }

    /// A fresh source-level variable name (used by constant paraphrases).
    fn source_var(&mut self, base: &str) -> String {
        let name = fresh_var(base, &self.used);
        self.used.insert(name.clone());
        name
    }
}

impl TranslationScheme {
    /// Translates a formula over the source signature into one over the
    /// target signature. Also returns the block of target variables standing
    /// for each free source variable.
    pub fn translate_formula_with_vars(
        &self,
        f: &Formula,
    ) -> Result<(Formula, BTreeMap<String, Vec<String>>), SchemeError> {
        f.well_formed_over(self.source())
            .map_err(SchemeError::BadSourceFormula)?;
        let mut alloc = VarAlloc::new(f, self.dim());
        let mut env: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for v in f.free_vars() {
            let block = alloc.block(&v);
            env.insert(v, block);
        }
        let free_blocks = env.clone();
        let translated = self.tr(f, &mut env, &mut alloc)?;
        Ok((translated, free_blocks))
    }

    /// Translates a formula over the source signature into one over the
    /// target signature. Free source variables keep their names when the
    /// scheme is one-dimensional, and become `v_1..v_d` blocks otherwise.
    pub fn translate_formula(&self, f: &Formula) -> Result<Formula, SchemeError> {
        Ok(self.translate_formula_with_vars(f)?.0)
    }

    fn tr(
        &self,
        f: &Formula,
        env: &mut BTreeMap<String, Vec<String>>,
        alloc: &mut VarAlloc,
    ) -> Result<Formula, SchemeError> {
        match f {
            Formula::True => Ok(Formula::True),
            Formula::False => Ok(Formula::False),
            Formula::Equal(l, r) => match (l, r) {
                (Term::Var(x), Term::Var(y)) => {
                    let bx = env[x].clone();
                    let by = env[y].clone();
                    Ok(self.epsilon_at(&bx, &by))
                }
                (Term::Var(x), Term::Const(c)) | (Term::Const(c), Term::Var(x)) => {
                    let bx = env[x].clone();
                    Ok(self.constant_atom(&bx, c, alloc))
                }
                (Term::Const(c1), Term::Const(c2)) => {
                    // paraphrase: exists z (z = c1 & z = c2)
                    let z = alloc.source_var("z");
                    let inner = Formula::Equal(Term::var(z.clone()), Term::constant(c1.clone()))
                        .and(Formula::Equal(Term::var(z.clone()), Term::constant(c2.clone())));
                    self.tr(&Formula::exists(z, inner), env, alloc)
                }
            },
            Formula::Rel(name, args) => {
                if args.iter().all(|t| matches!(t, Term::Var(_))) {
                    let def = &self.rel_defs()[name];
                    let mut map = BTreeMap::new();
                    for (i, t) in args.iter().enumerate() {
                        let Term::Var(v) = t else { unreachable!() };
                        for (j, component) in env[v].iter().enumerate() {
                            map.insert(arg_var(i + 1, j + 1), Term::var(component.clone()));
                        }
                    }
                    Ok(substitute(def, &map))
                } else {
                    // paraphrase constant arguments away, innermost first
                    let mut rewritten = Vec::with_capacity(args.len());
                    let mut binders: Vec<(String, String)> = Vec::new();
                    for t in args {
                        match t {
                            Term::Var(_) => rewritten.push(t.clone()),
                            Term::Const(c) => {
                                let z = alloc.source_var("z");
                                binders.push((z.clone(), c.clone()));
                                rewritten.push(Term::var(z));
                            }
                        }
                    }
                    let mut body = Formula::Rel(name.clone(), rewritten);
                    for (z, c) in binders.into_iter().rev() {
                        body = Formula::exists(
                            z.clone(),
                            Formula::Equal(Term::var(z), Term::constant(c)).and(body),
                        );
                    }
                    self.tr(&body, env, alloc)
                }
            }
            Formula::Not(g) => Ok(Formula::not(self.tr(g, env, alloc)?)),
            Formula::And(l, r) => Ok(self.tr(l, env, alloc)?.and(self.tr(r, env, alloc)?)),
            Formula::Or(l, r) => Ok(self.tr(l, env, alloc)?.or(self.tr(r, env, alloc)?)),
            Formula::Implies(l, r) => {
                Ok(self.tr(l, env, alloc)?.implies(self.tr(r, env, alloc)?))
            }
            Formula::Iff(l, r) => Ok(self.tr(l, env, alloc)?.iff(self.tr(r, env, alloc)?)),
            Formula::ForAll(v, g) => {
                let block = alloc.block(v);
                let saved = env.insert(v.clone(), block.clone());
                let inner = self.tr(g, env, alloc)?;
                restore_env(env, v, saved);
                let body = if *self.delta() == Formula::True {
                    inner
                } else {
                    self.delta_at(&block).implies(inner)
                };
                Ok(block
                    .into_iter()
                    .rev()
                    .fold(body, |acc, name| Formula::forall(name, acc)))
            }
            Formula::Exists(v, g) => {
                let block = alloc.block(v);
                let saved = env.insert(v.clone(), block.clone());
                let inner = self.tr(g, env, alloc)?;
                restore_env(env, v, saved);
                let body = if *self.delta() == Formula::True {
                    inner
                } else {
                    self.delta_at(&block).and(inner)
                };
                Ok(block
                    .into_iter()
                    .rev()
                    .fold(body, |acc, name| Formula::exists(name, acc)))
            }
        }
    }

    /// `x = c` becomes: some tuple satisfying the domain formula and the
    /// constant's defining formula is identified with the block of `x`.
    fn constant_atom(&self, block: &[String], c: &str, alloc: &mut VarAlloc) -> Formula {
        let witness: Vec<String> = (0..self.dim())
            .map(|_| alloc.source_var("z"))
            .collect();
        let mut parts = Vec::new();
        if *self.delta() != Formula::True {
            parts.push(self.delta_at(&witness));
        }
        parts.push(
            self.const_def_at(c, &witness)
                .expect("constructor guarantees a defining formula per source constant"),
        );
        parts.push(self.epsilon_at(block, &witness));
        let body = Formula::conj(parts);
        witness
            .into_iter()
            .rev()
            .fold(body, |acc, name| Formula::exists(name, acc))
    }
}

fn restore_env(
    env: &mut BTreeMap<String, Vec<String>>,
    var: &str,
    saved: Option<Vec<String>>,
) {
    match saved {
        Some(block) => {
            env.insert(var.to_string(), block);
        }
        None => {
            env.remove(var);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Signature};
    use crate::interp::{Epsilon, TranslationScheme};

    fn pointed_sig() -> Signature {
        Signature::new("pointed", vec![], vec!["c".to_string()]).unwrap()
    }

    /// Three-dimensional quotient that adds a point denotable by the constant.
    fn add_point() -> TranslationScheme {
        let source = pointed_sig();
        let target = Signature::empty("empty");
        let eps = parse_formula(
            "(x2 = x3 & y2 = y3 & x1 = y1) | (!(x2 = x3) & !(y2 = y3))",
            &target,
        )
        .unwrap();
        let mut const_defs = BTreeMap::new();
        const_defs.insert("c".to_string(), parse_formula("!(x2 = x3)", &target).unwrap());
        TranslationScheme::new(
            "add-point",
            source,
            target,
            3,
            Formula::True,
            Epsilon::Defined(eps),
            BTreeMap::new(),
            const_defs,
        )
        .unwrap()
    }

    #[test]
    fn equality_translates_to_the_identity_formula() {
        let t = add_point();
        let f = parse_formula("x = y", t.source()).unwrap();
        let (got, vars) = t.translate_formula_with_vars(&f).unwrap();
        assert_eq!(vars["x"], vec!["x_1", "x_2", "x_3"]);
        assert_eq!(vars["y"], vec!["y_1", "y_2", "y_3"]);
        let expected = parse_formula(
            "(x_2 = x_3 & y_2 = y_3 & x_1 = y_1) | (!(x_2 = x_3) & !(y_2 = y_3))",
            t.target(),
        )
        .unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn constant_atom_translates_to_a_witnessed_class() {
        let t = add_point();
        let f = parse_formula("x = c", t.source()).unwrap();
        let got = t.translate_formula(&f).unwrap();
        // exists z. exists z'. exists z''. !(z' = z'') & ((x_2 = x_3 & ...) | ...)
        // semantically equivalent to "the second and third components differ"
        let target_claim = parse_formula("!(x_2 = x_3)", t.target()).unwrap();
        for n in 1..=3usize {
            let a = crate::structures::FiniteStructure::anonymous(n);
            let vars = vec!["x_1".to_string(), "x_2".to_string(), "x_3".to_string()];
            assert_eq!(
                a.definable_set(&got, &vars).unwrap(),
                a.definable_set(&target_claim, &vars).unwrap(),
                "size {n}"
            );
        }
    }

    #[test]
    fn identity_scheme_translates_to_itself() {
        let sig = Signature::new("s", vec![("R".to_string(), 2)], vec!["c".to_string()]).unwrap();
        let id = TranslationScheme::identity(&sig);
        for text in [
            "forall x. exists y. R(x, y)",
            "x = y & R(y, x)",
            "exists x. x = x",
        ] {
            let f = parse_formula(text, &sig).unwrap();
            assert_eq!(id.translate_formula(&f).unwrap(), f);
        }
        // constant atoms pick up the witness paraphrase but stay equivalent
        let f = parse_formula("x = c", &sig).unwrap();
        let got = id.translate_formula(&f).unwrap();
        let expected = parse_formula("exists z. z = c & x = z", &sig).unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn quantifiers_relativize_to_the_domain_formula() {
        let source = Signature::empty("empty");
        let target = pointed_sig();
        let drop_point = TranslationScheme::new(
            "drop-point",
            source,
            target.clone(),
            1,
            parse_formula("!(x1 = c)", &target).unwrap(),
            Epsilon::Componentwise,
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let f = parse_formula("forall x. exists y. !(x = y)", drop_point.source()).unwrap();
        let got = drop_point.translate_formula(&f).unwrap();
        let expected = parse_formula(
            "forall x. !(x = c) -> (exists y. !(y = c) & !(x = y))",
            &target,
        )
        .unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn shadowed_variables_translate_scoped() {
        let t = add_point();
        // x free and rebound inside
        let f = parse_formula("x = x & exists x. x = x", t.source()).unwrap();
        let (got, vars) = t.translate_formula_with_vars(&f).unwrap();
        assert_eq!(vars["x"], vec!["x_1", "x_2", "x_3"]);
        // the inner binder must not reuse the free block
        let mut count_binders = 0;
        let mut stack = vec![&got];
        while let Some(g) = stack.pop() {
            match g {
                Formula::Exists(v, inner) => {
                    assert!(!vars["x"].contains(v));
                    count_binders += 1;
                    stack.push(inner);
                }
                Formula::And(l, r) | Formula::Or(l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
                _ => {}
            }
        }
        assert_eq!(count_binders, 3);
    }
}
