//! Translation schemes between relational signatures: multi-dimensional,
//! relativized, quotient. A scheme maps formulas of its source signature to
//! formulas of its target signature, and dually turns finite structures over
//! the target into finite structures over the source.

mod apply;
mod checks;
mod translate;

pub use apply::{apply_scheme, validate_scheme_on, InterpretedStructure};
pub use checks::{check_commutation, check_defined_isomorphism};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::logic::{substitute, Formula, Signature, Term};
use crate::report::Report;
use crate::structures::EvalError;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("ill-formed scheme: {0}")]
    IllFormed(String),
    #[error("formula is not well-formed over the scheme's source signature: {0}")]
    BadSourceFormula(String),
    #[error("scheme fails validation on the structure:\n{0}")]
    ValidationFailed(Report),
    #[error("scheme only validates with witnessless constant classes on this structure; the check requires full validity:\n{0}")]
    WitnesslessClasses(Report),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The identity formula of a scheme: either literal componentwise equality of
/// tuples, or an explicitly defined formula (a quotient). The marker form is
/// what makes identity preservation syntactically decidable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Epsilon {
    Componentwise,
    Defined(Formula),
}

/// Taxonomy flags of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeFlags {
    pub one_dimensional: bool,
    pub identity_preserving: bool,
    pub unrelativized: bool,
    pub direct: bool,
}

/// Canonical variable names `x1..xd` (or `y1..yd`).
pub fn tuple_vars(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("{prefix}{j}")).collect()
}

/// Canonical argument-block variable `xi_j` for argument `i`, component `j`
/// (both 1-based).
pub fn arg_var(i: usize, j: usize) -> String {
    format!("x{i}_{j}")
}

/// A translation scheme from `source` into `target`:
///
/// * `dim`: each source element is represented by a `dim`-tuple of target
///   elements;
/// * `delta`: the domain formula, over `x1..xd`;
/// * `epsilon`: the identity formula, over `x1..xd, y1..yd`;
/// * one defining formula per source relation (argument blocks `xi_j`) and
///   per source constant (`x1..xd`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationScheme {
    pub name: String,
    source: Signature,
    target: Signature,
    dim: usize,
    delta: Formula,
    epsilon: Epsilon,
    rel_defs: BTreeMap<String, Formula>,
    const_defs: BTreeMap<String, Formula>,
}

impl TranslationScheme {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        source: Signature,
        target: Signature,
        dim: usize,
        delta: Formula,
        epsilon: Epsilon,
        rel_defs: BTreeMap<String, Formula>,
        const_defs: BTreeMap<String, Formula>,
    ) -> Result<Self, SchemeError> {
        if dim == 0 {
            return Err(SchemeError::IllFormed("dimension must be >= 1".into()));
        }
        let xs = tuple_vars("x", dim);
        let ys = tuple_vars("y", dim);
        check_def(&delta, &target, &xs, "delta")?;
        if let Epsilon::Defined(e) = &epsilon {
            let mut allowed = xs.clone();
            allowed.extend(ys.clone());
            check_def(e, &target, &allowed, "epsilon")?;
        }
        for (r, arity) in source.relations() {
            let def = rel_defs.get(r).ok_or_else(|| {
                SchemeError::IllFormed(format!("missing defining formula for relation `{r}`"))
            })?;
            let mut allowed = Vec::new();
            for i in 1..=*arity {
                for j in 1..=dim {
                    allowed.push(arg_var(i, j));
                }
            }
            check_def(def, &target, &allowed, &format!("relation `{r}`"))?;
        }
        for extra in rel_defs.keys() {
            if source.arity(extra).is_none() {
                return Err(SchemeError::IllFormed(format!(
                    "defining formula for `{extra}`, which is not a source relation"
                )));
            }
        }
        for c in source.constants() {
            let def = const_defs.get(c).ok_or_else(|| {
                SchemeError::IllFormed(format!("missing defining formula for constant `{c}`"))
            })?;
            check_def(def, &target, &xs, &format!("constant `{c}`"))?;
        }
        for extra in const_defs.keys() {
            if !source.has_constant(extra) {
                return Err(SchemeError::IllFormed(format!(
                    "defining formula for `{extra}`, which is not a source constant"
                )));
            }
        }
        Ok(TranslationScheme {
            name: name.into(),
            source,
            target,
            dim,
            delta,
            epsilon,
            rel_defs,
            const_defs,
        })
    }

    /// The identity scheme on a signature.
    pub fn identity(sig: &Signature) -> Self {
        let mut rel_defs = BTreeMap::new();
        for (r, arity) in sig.relations() {
            let args = (1..=*arity).map(|i| Term::var(arg_var(i, 1))).collect();
            rel_defs.insert(r.clone(), Formula::Rel(r.clone(), args));
        }
        let mut const_defs = BTreeMap::new();
        for c in sig.constants() {
            const_defs.insert(
                c.clone(),
                Formula::Equal(Term::var("x1"), Term::constant(c.clone())),
            );
        }
        TranslationScheme::new(
            format!("identity-{}", sig.name),
            sig.clone(),
            sig.clone(),
            1,
            Formula::True,
            Epsilon::Componentwise,
            rel_defs,
            const_defs,
        )
        .expect("identity scheme is well-formed")
    }

    pub fn source(&self) -> &Signature {
        &self.source
    }

    pub fn target(&self) -> &Signature {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> &Formula {
        &self.delta
    }

    pub fn epsilon(&self) -> &Epsilon {
        &self.epsilon
    }

    pub fn rel_defs(&self) -> &BTreeMap<String, Formula> {
        &self.rel_defs
    }

    pub fn const_defs(&self) -> &BTreeMap<String, Formula> {
        &self.const_defs
    }

    /// Taxonomy flags. All three component flags are syntactic, so `direct`
    /// is decidable by inspection.
    pub fn classify(&self) -> SchemeFlags {
        let one_dimensional = self.dim == 1;
        let unrelativized = self.delta == Formula::True;
        let identity_preserving = self.dim == 1 && matches!(self.epsilon, Epsilon::Componentwise);
        SchemeFlags {
            one_dimensional,
            identity_preserving,
            unrelativized,
            direct: one_dimensional && identity_preserving && unrelativized,
        }
    }

    /// The identity formula as a concrete formula over `x1..xd, y1..yd`.
    pub fn epsilon_formula(&self) -> Formula {
        match &self.epsilon {
            Epsilon::Defined(e) => e.clone(),
            Epsilon::Componentwise => Formula::conj((1..=self.dim).map(|j| {
                Formula::Equal(Term::var(format!("x{j}")), Term::var(format!("y{j}")))
            })),
        }
    }

    /// `delta` instantiated at the tuple named by `vars`.
    pub fn delta_at(&self, vars: &[String]) -> Formula {
        instantiate(&self.delta, &tuple_vars("x", self.dim), vars)
    }

    /// `epsilon` instantiated at two named tuples.
    pub fn epsilon_at(&self, left: &[String], right: &[String]) -> Formula {
        match &self.epsilon {
            Epsilon::Componentwise => Formula::conj(
                left.iter()
                    .zip(right.iter())
                    .map(|(l, r)| Formula::Equal(Term::var(l.clone()), Term::var(r.clone()))),
            ),
            Epsilon::Defined(e) => {
                let mut from = tuple_vars("x", self.dim);
                from.extend(tuple_vars("y", self.dim));
                let mut to = left.to_vec();
                to.extend(right.to_vec());
                instantiate(e, &from, &to)
            }
        }
    }

    /// The defining formula of constant `c` instantiated at a named tuple.
    pub fn const_def_at(&self, c: &str, vars: &[String]) -> Option<Formula> {
        let def = self.const_defs.get(c)?;
        Some(instantiate(def, &tuple_vars("x", self.dim), vars))
    }
}

fn check_def(
    f: &Formula,
    target: &Signature,
    allowed: &[String],
    what: &str,
) -> Result<(), SchemeError> {
    f.well_formed_over(target)
        .map_err(|e| SchemeError::IllFormed(format!("{what}: {e}")))?;
    for v in f.free_vars() {
        if !allowed.iter().any(|a| a == &v) {
            return Err(SchemeError::IllFormed(format!(
                "{what}: unexpected free variable `{v}` (allowed: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn instantiate(f: &Formula, from: &[String], to: &[String]) -> Formula {
    debug_assert_eq!(from.len(), to.len());
    let map: BTreeMap<String, Term> = from
        .iter()
        .zip(to.iter())
        .filter(|(a, b)| a != b)
        .map(|(a, b)| (a.clone(), Term::var(b.clone())))
        .collect();
    substitute(f, &map)
}

/// Composes two schemes syntactically: the result translates a source formula
/// by first applying `inner`, then `outer`. Its dimension is the product, and
/// on structures its model functor is the composition `inner after outer` of
/// the two functors.
pub fn compose(
    outer: &TranslationScheme,
    inner: &TranslationScheme,
) -> Result<TranslationScheme, SchemeError> {
    if !inner.target.same_symbols(&outer.source) {
        return Err(SchemeError::SignatureMismatch(format!(
            "inner scheme targets `{}` but outer scheme interprets `{}`",
            inner.target.name, outer.source.name
        )));
    }
    let d_in = inner.dim;
    let d_out = outer.dim;
    let dim = d_in * d_out;

    // Composite position of component l of block i (all 1-based).
    let pos = |i: usize, l: usize| (i - 1) * d_out + l;

    // Domain: every block satisfies the outer delta, and the whole tuple
    // satisfies the outer translation of the inner delta.
    let mut delta_parts = Vec::new();
    if outer.delta != Formula::True {
        for i in 1..=d_in {
            let block: Vec<String> = (1..=d_out).map(|l| format!("x{}", pos(i, l))).collect();
            delta_parts.push(outer.delta_at(&block));
        }
    }
    if inner.delta != Formula::True {
        let (translated, vars) = outer.translate_formula_with_vars(&inner.delta)?;
        delta_parts.push(rename_blocks(&translated, &vars, d_out, "x", &pos));
    }
    let delta = Formula::conj(delta_parts);

    let epsilon = if matches!(inner.epsilon, Epsilon::Componentwise)
        && matches!(outer.epsilon, Epsilon::Componentwise)
    {
        Epsilon::Componentwise
    } else {
        let inner_eps = inner.epsilon_formula();
        let (translated, vars) = outer.translate_formula_with_vars(&inner_eps)?;
        Epsilon::Defined(rename_blocks_xy(&translated, &vars, d_out, &pos))
    };

    let mut rel_defs = BTreeMap::new();
    for (r, arity) in inner.source.relations() {
        let def = &inner.rel_defs[r];
        let (translated, vars) = outer.translate_formula_with_vars(def)?;
        // block (i, j) of the inner def occupies composite argument block i,
        // components (j-1)*d_out+1 ..= j*d_out
        let mut map = BTreeMap::new();
        for i in 1..=*arity {
            for j in 1..=d_in {
                if let Some(components) = vars.get(&arg_var(i, j)) {
                    for (l, name) in components.iter().enumerate() {
                        map.insert(
                            name.clone(),
                            Term::var(arg_var(i, (j - 1) * d_out + l + 1)),
                        );
                    }
                }
            }
        }
        rel_defs.insert(r.clone(), substitute(&translated, &map));
    }

    let mut const_defs = BTreeMap::new();
    for c in inner.source.constants() {
        let def = &inner.const_defs[c];
        let (translated, vars) = outer.translate_formula_with_vars(def)?;
        const_defs.insert(c.clone(), rename_blocks(&translated, &vars, d_out, "x", &pos));
    }

    TranslationScheme::new(
        format!("{}*{}", outer.name, inner.name),
        inner.source.clone(),
        outer.target.clone(),
        dim,
        delta,
        epsilon,
        rel_defs,
        const_defs,
    )
}

/// Renames the translation components of canonical variables `x1..` (or
/// `y1..`) to their composite positions.
fn rename_blocks(
    f: &Formula,
    vars: &BTreeMap<String, Vec<String>>,
    d_out: usize,
    prefix: &str,
    pos: &dyn Fn(usize, usize) -> usize,
) -> Formula {
    let mut map = BTreeMap::new();
    for (src, components) in vars {
        if let Some(i) = src
            .strip_prefix(prefix)
            .and_then(|s| s.parse::<usize>().ok())
        {
            debug_assert_eq!(components.len(), d_out);
            for (l, name) in components.iter().enumerate() {
                map.insert(name.clone(), Term::var(format!("{prefix}{}", pos(i, l + 1))));
            }
        }
    }
    substitute(f, &map)
}

fn rename_blocks_xy(
    f: &Formula,
    vars: &BTreeMap<String, Vec<String>>,
    d_out: usize,
    pos: &dyn Fn(usize, usize) -> usize,
) -> Formula {
    let renamed = rename_blocks(f, vars, d_out, "x", pos);
    rename_blocks(&renamed, vars, d_out, "y", pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn pointed_sig() -> Signature {
        Signature::new("pointed", vec![], vec!["c".to_string()]).unwrap()
    }

    #[test]
    fn identity_scheme_is_direct() {
        let sig = Signature::new("s", vec![("R".to_string(), 2)], vec!["c".to_string()]).unwrap();
        let id = TranslationScheme::identity(&sig);
        let flags = id.classify();
        assert!(flags.one_dimensional);
        assert!(flags.identity_preserving);
        assert!(flags.unrelativized);
        assert!(flags.direct);
    }

    #[test]
    fn constructor_rejects_stray_free_variables() {
        let sig = pointed_sig();
        let empty = Signature::empty("empty");
        let delta = parse_formula("!(z = c)", &sig).unwrap();
        let err = TranslationScheme::new(
            "bad",
            empty,
            sig,
            1,
            delta,
            Epsilon::Componentwise,
            BTreeMap::new(),
            BTreeMap::new(),
        );
        assert!(matches!(err, Err(SchemeError::IllFormed(_))));
    }

    #[test]
    fn constructor_requires_all_definitions() {
        let sig = pointed_sig();
        let empty = Signature::empty("empty");
        let err = TranslationScheme::new(
            "bad",
            sig,
            empty,
            1,
            Formula::True,
            Epsilon::Componentwise,
            BTreeMap::new(),
            BTreeMap::new(),
        );
        assert!(matches!(err, Err(SchemeError::IllFormed(_))));
    }

    #[test]
    fn componentwise_with_higher_dimension_is_not_identity_preserving() {
        let empty = Signature::empty("empty");
        let sch = TranslationScheme::new(
            "square",
            empty.clone(),
            empty,
            2,
            Formula::True,
            Epsilon::Componentwise,
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let flags = sch.classify();
        assert!(!flags.one_dimensional);
        assert!(!flags.identity_preserving);
        assert!(flags.unrelativized);
        assert!(!flags.direct);
    }

    #[test]
    fn compose_of_identities_is_direct() {
        let sig = pointed_sig();
        let id = TranslationScheme::identity(&sig);
        let comp = compose(&id, &id).unwrap();
        assert!(comp.classify().direct);
        assert_eq!(comp.dim(), 1);
    }

    #[test]
    fn compose_checks_signatures() {
        let id1 = TranslationScheme::identity(&pointed_sig());
        let id2 = TranslationScheme::identity(&Signature::empty("empty"));
        assert!(matches!(
            compose(&id1, &id2),
            Err(SchemeError::SignatureMismatch(_))
        ));
    }
}
