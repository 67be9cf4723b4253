//! Applying a scheme to a finite structure over its target signature:
//! quotient construction, validation of the implicit side conditions, and the
//! induced structure over the source signature.

use std::collections::{BTreeMap, BTreeSet};

use crate::logic::Signature;
use crate::report::Report;
use crate::structures::{tuples, Assignment, EvalError, FiniteStructure};

use super::{arg_var, tuple_vars, Epsilon, SchemeError, TranslationScheme};

/// The result of applying a scheme to a structure.
///
/// Elements of `result` are indices into `classes`, the equivalence classes
/// of the identity formula on the domain-formula tuples, ordered by least
/// member. A constant whose defining formula holds of no class still has to
/// denote, so it receives a fresh memberless class at the end (`reps` entry
/// `None`, listed in `synthetic`); relation rows involving such classes are
/// left empty.
#[derive(Debug, Clone)]
pub struct InterpretedStructure {
    pub result: FiniteStructure,
    /// Member tuples per class, each sorted lexicographically.
    pub classes: Vec<Vec<Vec<usize>>>,
    /// Lexicographically least member per class; `None` for synthesized
    /// constant classes.
    pub reps: Vec<Option<Vec<usize>>>,
    /// Constants that received a synthesized class, with its index.
    pub synthetic: BTreeMap<String, usize>,
    /// The validation report that admitted this application.
    pub validation: Report,
}

impl InterpretedStructure {
    /// The class index of a domain-formula tuple, if any.
    pub fn class_of(&self, tuple: &[usize]) -> Option<usize> {
        self.classes
            .iter()
            .position(|members| members.iter().any(|m| m == tuple))
    }

    pub fn has_witnessless_classes(&self) -> bool {
        !self.synthetic.is_empty()
    }
}

struct SchemeEval<'a> {
    scheme: &'a TranslationScheme,
    structure: &'a FiniteStructure,
    xs: Vec<String>,
    ys: Vec<String>,
}

impl<'a> SchemeEval<'a> {
    fn new(scheme: &'a TranslationScheme, structure: &'a FiniteStructure) -> Self {
        SchemeEval {
            scheme,
            structure,
            xs: tuple_vars("x", scheme.dim()),
            ys: tuple_vars("y", scheme.dim()),
        }
    }

    fn bind(&self, env: &mut Assignment, vars: &[String], tuple: &[usize]) {
        for (v, &e) in vars.iter().zip(tuple.iter()) {
            env.insert(v.clone(), e);
        }
    }

    fn delta_holds(&self, t: &[usize]) -> Result<bool, EvalError> {
        let mut env = Assignment::new();
        self.bind(&mut env, &self.xs, t);
        self.structure.eval(self.scheme.delta(), &env)
    }

    fn eps_holds(&self, t: &[usize], u: &[usize]) -> Result<bool, EvalError> {
        match self.scheme.epsilon() {
            Epsilon::Componentwise => Ok(t == u),
            Epsilon::Defined(e) => {
                let mut env = Assignment::new();
                self.bind(&mut env, &self.xs, t);
                self.bind(&mut env, &self.ys, u);
                self.structure.eval(e, &env)
            }
        }
    }

    fn const_holds(&self, def: &crate::logic::Formula, t: &[usize]) -> Result<bool, EvalError> {
        let mut env = Assignment::new();
        self.bind(&mut env, &self.xs, t);
        self.structure.eval(def, &env)
    }

    fn rel_holds(
        &self,
        def: &crate::logic::Formula,
        args: &[&Vec<usize>],
    ) -> Result<bool, EvalError> {
        let mut env = Assignment::new();
        for (i, tuple) in args.iter().enumerate() {
            for (j, &e) in tuple.iter().enumerate() {
                env.insert(arg_var(i + 1, j + 1), e);
            }
        }
        self.structure.eval(def, &env)
    }
}

struct Analysis {
    report: Report,
    delta: Vec<Vec<usize>>,
    /// eps[i][j] over delta indices; only meaningful when the report passed.
    eps: Vec<Vec<bool>>,
    /// class membership by delta index; parallel `class_members` hold indices.
    class_members: Vec<Vec<usize>>,
}

fn analyze(
    scheme: &TranslationScheme,
    a: &FiniteStructure,
) -> Result<Analysis, SchemeError> {
    let mut report = Report::new(format!(
        "validate scheme `{}` on structure over `{}`",
        scheme.name,
        a.signature().name
    ));
    if !a.signature().same_symbols(scheme.target()) {
        report.fail(
            "signature",
            format!(
                "structure signature `{}` does not match the scheme target `{}`",
                a.signature().name,
                scheme.target().name
            ),
        );
        return Ok(Analysis {
            report,
            delta: Vec::new(),
            eps: Vec::new(),
            class_members: Vec::new(),
        });
    }

    let ev = SchemeEval::new(scheme, a);
    let mut delta = Vec::new();
    for t in tuples(a.size(), scheme.dim()) {
        if ev.delta_holds(&t)? {
            delta.push(t);
        }
    }
    let m = delta.len();
    let mut eps = vec![vec![false; m]; m];
    for i in 0..m {
        for j in 0..m {
            eps[i][j] = ev.eps_holds(&delta[i], &delta[j])?;
        }
    }

    let mut equivalence_ok = true;
    'reflexive: {
        for i in 0..m {
            if !eps[i][i] {
                report.fail(
                    "equivalence-reflexive",
                    format!("identity formula fails at {:?}", delta[i]),
                );
                equivalence_ok = false;
                break 'reflexive;
            }
        }
        report.pass("equivalence-reflexive", format!("{m} domain tuples"));
    }
    'symmetric: {
        for i in 0..m {
            for j in 0..m {
                if eps[i][j] != eps[j][i] {
                    report.fail(
                        "equivalence-symmetric",
                        format!("asymmetric at {:?}, {:?}", delta[i], delta[j]),
                    );
                    equivalence_ok = false;
                    break 'symmetric;
                }
            }
        }
        report.pass("equivalence-symmetric", "all pairs agree".to_string());
    }
    'transitive: {
        for i in 0..m {
            for j in 0..m {
                if !eps[i][j] {
                    continue;
                }
                for k in 0..m {
                    if eps[j][k] && !eps[i][k] {
                        report.fail(
                            "equivalence-transitive",
                            format!(
                                "breaks at {:?} ~ {:?} ~ {:?}",
                                delta[i], delta[j], delta[k]
                            ),
                        );
                        equivalence_ok = false;
                        break 'transitive;
                    }
                }
            }
        }
        report.pass("equivalence-transitive", "all triples agree".to_string());
    }

    if !equivalence_ok {
        return Ok(Analysis {
            report,
            delta,
            eps,
            class_members: Vec::new(),
        });
    }

    // classes by representative scan; iteration is lexicographic, so the
    // first member seen is the least member of its class
    let mut class_members: Vec<Vec<usize>> = Vec::new();
    let mut class_of: Vec<usize> = vec![0; m];
    for i in 0..m {
        let mut found = None;
        for (k, members) in class_members.iter().enumerate() {
            if eps[i][members[0]] {
                found = Some(k);
                break;
            }
        }
        match found {
            Some(k) => {
                class_members[k].push(i);
                class_of[i] = k;
            }
            None => {
                class_of[i] = class_members.len();
                class_members.push(vec![i]);
            }
        }
    }

    for (r, def) in scheme.rel_defs() {
        let arity = scheme.source().arity(r).expect("validated at construction");
        let mut ok = true;
        let mut detail = format!("{arity}-ary over {} classes", class_members.len());
        // the defining formula must be constant on each tuple of classes
        let mut index_tuples = vec![vec![]];
        for _ in 0..arity {
            let mut next = Vec::new();
            for prefix in &index_tuples {
                for i in 0..m {
                    let mut t: Vec<usize> = prefix.clone();
                    t.push(i);
                    next.push(t);
                }
            }
            index_tuples = next;
        }
        let mut per_class: BTreeMap<Vec<usize>, bool> = BTreeMap::new();
        'rel: for idx in &index_tuples {
            let args: Vec<&Vec<usize>> = idx.iter().map(|&i| &delta[i]).collect();
            let val = ev.rel_holds(def, &args)?;
            let key: Vec<usize> = idx.iter().map(|&i| class_of[i]).collect();
            match per_class.get(&key) {
                None => {
                    per_class.insert(key, val);
                }
                Some(&prev) if prev != val => {
                    ok = false;
                    detail = format!(
                        "not invariant under the identity formula at arguments {:?}",
                        args
                    );
                    break 'rel;
                }
                _ => {}
            }
        }
        report.record(format!("congruence[{r}]"), ok, detail);
    }

    for (c, def) in scheme.const_defs() {
        let mut holds: Vec<bool> = Vec::with_capacity(m);
        for t in &delta {
            holds.push(ev.const_holds(def, t)?);
        }
        // must be a union of classes
        let mut invariant = true;
        let mut hit_classes: BTreeSet<usize> = BTreeSet::new();
        for (k, members) in class_members.iter().enumerate() {
            let vals: BTreeSet<bool> = members.iter().map(|&i| holds[i]).collect();
            if vals.len() > 1 {
                invariant = false;
            }
            if vals.contains(&true) {
                hit_classes.insert(k);
            }
        }
        if !invariant {
            report.fail(
                format!("constant[{c}]"),
                "defining formula is not invariant under the identity formula".to_string(),
            );
        } else {
            match hit_classes.len() {
                0 => report.note(
                    format!("constant[{c}]"),
                    "defining formula holds of no class; a witnessless class will be synthesized"
                        .to_string(),
                ),
                1 => report.pass(format!("constant[{c}]"), "defines exactly one class".to_string()),
                n => report.fail(
                    format!("constant[{c}]"),
                    format!("defining formula spans {n} classes"),
                ),
            }
        }
    }

    Ok(Analysis {
        report,
        delta,
        eps,
        class_members,
    })
}

/// Runs the side-condition checks of a quotient scheme against a structure:
/// the identity formula is an equivalence on the domain set, every relation
/// definition respects it, and every constant definition picks out at most
/// one class. Failures are report entries, not errors.
pub fn validate_scheme_on(
    scheme: &TranslationScheme,
    a: &FiniteStructure,
) -> Result<Report, SchemeError> {
    Ok(analyze(scheme, a)?.report)
}

/// Applies the scheme's model functor to a structure over its target
/// signature. Errors if validation fails outright; a constant whose defining
/// formula picks no class is tolerated and receives a synthesized class.
pub fn apply_scheme(
    scheme: &TranslationScheme,
    a: &FiniteStructure,
) -> Result<InterpretedStructure, SchemeError> {
    let analysis = analyze(scheme, a)?;
    if !analysis.report.passed() {
        return Err(SchemeError::ValidationFailed(analysis.report));
    }
    let ev = SchemeEval::new(scheme, a);
    let delta = &analysis.delta;

    let mut classes: Vec<Vec<Vec<usize>>> = analysis
        .class_members
        .iter()
        .map(|members| members.iter().map(|&i| delta[i].clone()).collect())
        .collect();
    let mut reps: Vec<Option<Vec<usize>>> = classes
        .iter()
        .map(|members| Some(members[0].clone()))
        .collect();

    let class_of_delta_index = {
        let mut v = vec![0usize; delta.len()];
        for (k, members) in analysis.class_members.iter().enumerate() {
            for &i in members {
                v[i] = k;
            }
        }
        v
    };

    let mut constants = BTreeMap::new();
    let mut synthetic = BTreeMap::new();
    for (c, def) in scheme.const_defs() {
        let mut hit = None;
        for (i, t) in delta.iter().enumerate() {
            if ev.const_holds(def, t)? {
                hit = Some(class_of_delta_index[i]);
                break;
            }
        }
        let k = match hit {
            Some(k) => k,
            None => {
                let k = classes.len();
                classes.push(Vec::new());
                reps.push(None);
                synthetic.insert(c.clone(), k);
                k
            }
        };
        constants.insert(c.clone(), k);
    }

    let n_classes = classes.len();
    let mut relations: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for (r, def) in scheme.rel_defs() {
        let arity = scheme.source().arity(r).expect("validated at construction");
        let mut table = BTreeSet::new();
        for idx in tuples(n_classes, arity) {
            let Some(rep_args) = idx
                .iter()
                .map(|&k| reps[k].as_ref())
                .collect::<Option<Vec<_>>>()
            else {
                continue; // rows at witnessless classes stay empty
            };
            if ev.rel_holds(def, &rep_args)? {
                table.insert(idx);
            }
        }
        relations.insert(r.clone(), table);
    }

    let result_sig = Signature::new(
        format!("{}({})", scheme.name, a.signature().name),
        scheme
            .source()
            .relations()
            .iter()
            .map(|(r, &k)| (r.clone(), k)),
        scheme.source().constants().iter().cloned(),
    )
    .expect("source signature is valid");
    let result = FiniteStructure::new(result_sig, n_classes, relations, constants)
        .map_err(|e| SchemeError::IllFormed(format!("induced structure: {e}")))?;

    Ok(InterpretedStructure {
        result,
        classes,
        reps,
        synthetic,
        validation: analysis.report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Formula};

    fn pointed_sig() -> Signature {
        Signature::new("pointed", vec![], vec!["c".to_string()]).unwrap()
    }

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
            super::super::Epsilon::Defined(eps),
            BTreeMap::new(),
            const_defs,
        )
        .unwrap()
    }

    fn drop_point() -> TranslationScheme {
        let source = Signature::empty("empty");
        let target = pointed_sig();
        TranslationScheme::new(
            "drop-point",
            source,
            target.clone(),
            1,
            parse_formula("!(x1 = c)", &target).unwrap(),
            super::super::Epsilon::Componentwise,
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn add_point_on_two_elements() {
        let t = add_point();
        let a = FiniteStructure::anonymous(2);
        let interp = apply_scheme(&t, &a).unwrap();
        assert_eq!(interp.result.size(), 3);
        // classes ordered by least member: diagonal-at-0, off-diagonal, diagonal-at-1
        assert_eq!(interp.classes[0], vec![vec![0, 0, 0], vec![0, 1, 1]]);
        assert_eq!(
            interp.classes[1],
            vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 1], vec![1, 1, 0]]
        );
        assert_eq!(interp.classes[2], vec![vec![1, 0, 0], vec![1, 1, 1]]);
        assert_eq!(interp.reps[1], Some(vec![0, 0, 1]));
        assert_eq!(interp.result.constant("c"), Some(1));
        assert!(interp.synthetic.is_empty());
    }

    #[test]
    fn add_point_sizes_grow_by_one() {
        let t = add_point();
        for n in 1..=5 {
            let interp = apply_scheme(&t, &FiniteStructure::anonymous(n)).unwrap();
            assert_eq!(interp.result.size(), n + 1, "size {n}");
        }
    }

    #[test]
    fn add_point_on_one_element_synthesizes_the_constant_class() {
        let t = add_point();
        let interp = apply_scheme(&t, &FiniteStructure::anonymous(1)).unwrap();
        assert_eq!(interp.result.size(), 2);
        assert_eq!(interp.synthetic.get("c"), Some(&1));
        assert_eq!(interp.reps[1], None);
        assert!(interp.validation.has_notes());
    }

    #[test]
    fn drop_point_shrinks_by_one() {
        let s = drop_point();
        let b = FiniteStructure::pointed(3, "c", 2).unwrap();
        let interp = apply_scheme(&s, &b).unwrap();
        assert_eq!(interp.result.size(), 2);
        assert_eq!(interp.result.signature().constants().len(), 0);
    }

    #[test]
    fn drop_point_on_singleton_gives_the_empty_structure() {
        let s = drop_point();
        let b = FiniteStructure::pointed(1, "c", 0).unwrap();
        let interp = apply_scheme(&s, &b).unwrap();
        assert_eq!(interp.result.size(), 0);
    }

    #[test]
    fn identity_application_is_the_structure_itself() {
        let sig = pointed_sig();
        let id = TranslationScheme::identity(&sig);
        let b = FiniteStructure::pointed(3, "c", 1).unwrap();
        let interp = apply_scheme(&id, &b).unwrap();
        assert_eq!(interp.result.size(), 3);
        assert_eq!(interp.result.constant("c"), Some(1));
        let report = validate_scheme_on(&id, &b).unwrap();
        assert!(report.passed() && !report.has_notes());
    }

    #[test]
    fn total_identity_formula_conflicts_with_a_proper_constant() {
        // identity formula relating everything: one big class; a constant
        // definition picking a proper subset is then not invariant
        let source = pointed_sig();
        let target = pointed_sig();
        let mut const_defs = BTreeMap::new();
        const_defs.insert("c".to_string(), parse_formula("x1 = c", &target).unwrap());
        let sch = TranslationScheme::new(
            "collapse",
            source,
            target,
            1,
            Formula::True,
            super::super::Epsilon::Defined(parse_formula("x1 = x1", &target).unwrap()),
            BTreeMap::new(),
            const_defs,
        )
        .unwrap();
        let b = FiniteStructure::pointed(2, "c", 0).unwrap();
        let report = validate_scheme_on(&sch, &b).unwrap();
        assert!(!report.passed());
        let failing: Vec<_> = report.failures().map(|e| e.check.clone()).collect();
        assert_eq!(failing, vec!["constant[c]"]);
        assert!(matches!(
            apply_scheme(&sch, &b),
            Err(SchemeError::ValidationFailed(_))
        ));
    }
}
