//! Built-in demonstration pair: the theory of unboundedly many things over the
//! empty language, and the same theory over a language with one constant that
//! the axioms never mention.
//!
//! The two are linked by a three-dimensional quotient scheme that adds a
//! denotable point (triples with distinct second and third components form the
//! new point's class) and a one-dimensional relativized scheme that drops the
//! point. Roundtripping either way lands in a structure isomorphic to the
//! original via an explicitly definable map, yet neither roundtrip is the
//! literal identity: the point's class is a genuine quotient on one side and
//! the domain shrinks on the other.

use std::collections::BTreeMap;

use crate::interp::{
    check_defined_isomorphism, compose, Epsilon, SchemeError, TranslationScheme,
};
use crate::logic::{expand_counting, parse_formula, AxiomSchema, Formula, SchemaTheory, Signature, Term};
use crate::orbits::{definable_singletons, OrbitError};
use crate::report::Report;
use crate::structures::FiniteStructure;

/// Default size cap for the roundtrip checks.
pub const ROUNDTRIP_CAP: usize = 8;

/// The name of the distinguished constant.
pub const POINT: &str = "c";

pub fn empty_signature() -> Signature {
    Signature::empty("empty")
}

pub fn pointed_signature() -> Signature {
    Signature::new("pointed", vec![], vec![POINT.to_string()]).expect("one constant")
}

fn size_schema() -> AxiomSchema {
    AxiomSchema::new("at-least-n-elements", |n| {
        expand_counting(n, "x", &Formula::Equal(Term::var("x"), Term::var("x")))
    })
}

/// The theory over the empty language whose axioms assert, for every n, that
/// at least n elements exist.
pub fn plain_theory() -> SchemaTheory {
    SchemaTheory {
        name: "T".to_string(),
        signature: empty_signature(),
        axioms: Vec::new(),
        schemas: vec![size_schema()],
    }
}

/// The same axioms over the language with one constant; the theory says
/// nothing about the constant.
pub fn pointed_theory() -> SchemaTheory {
    SchemaTheory {
        name: "S".to_string(),
        signature: pointed_signature(),
        axioms: Vec::new(),
        schemas: vec![size_schema()],
    }
}

/// The three-dimensional quotient scheme from the pointed language into the
/// empty language: triples with equal second and third components represent
/// their first component, all remaining triples collapse into a single new
/// point denoted by the constant.
pub fn add_point_scheme() -> TranslationScheme {
    let target = empty_signature();
    let eps = parse_formula(
        "(x2 = x3 & y2 = y3 & x1 = y1) | (!(x2 = x3) & !(y2 = y3))",
        &target,
    )
    .expect("well-formed identity formula");
    let mut const_defs = BTreeMap::new();
    const_defs.insert(
        POINT.to_string(),
        parse_formula("!(x2 = x3)", &target).expect("well-formed constant formula"),
    );
    TranslationScheme::new(
        "add-point",
        pointed_signature(),
        target,
        3,
        Formula::True,
        Epsilon::Defined(eps),
        BTreeMap::new(),
        const_defs,
    )
    .expect("scheme is well-formed")
}

/// The one-dimensional relativized scheme from the empty language into the
/// pointed language: keep everything except the constant's denotation.
pub fn drop_point_scheme() -> TranslationScheme {
    let target = pointed_signature();
    TranslationScheme::new(
        "drop-point",
        empty_signature(),
        target.clone(),
        1,
        parse_formula("!(x1 = c)", &target).expect("well-formed domain formula"),
        Epsilon::Componentwise,
        BTreeMap::new(),
        BTreeMap::new(),
    )
    .expect("scheme is well-formed")
}

/// `x = y1 = y2 = y3`: the isomorphism from a plain structure onto its
/// roundtrip image (drop the point after adding it).
pub fn plain_iso_formula() -> Formula {
    parse_formula("x = y1 & x = y2 & x = y3", &empty_signature())
        .expect("well-formed isomorphism formula")
}

/// The isomorphism from a pointed structure onto its roundtrip image: ordinary
/// elements go to their diagonal class, the constant's denotation goes to the
/// class of triples with distinct second and third components.
pub fn pointed_iso_formula() -> Formula {
    parse_formula(
        "(!(x = c) & x = y1 & x = y2 & x = y3) | (x = c & !(y2 = y3))",
        &pointed_signature(),
    )
    .expect("well-formed isomorphism formula")
}

/// Everything bundled: both theories, both schemes, both isomorphism formulas.
#[derive(Debug, Clone)]
pub struct DemoBundle {
    pub plain_theory: SchemaTheory,
    pub pointed_theory: SchemaTheory,
    pub add_point: TranslationScheme,
    pub drop_point: TranslationScheme,
    pub plain_iso: Formula,
    pub pointed_iso: Formula,
}

pub fn demo_bundle() -> DemoBundle {
    DemoBundle {
        plain_theory: plain_theory(),
        pointed_theory: pointed_theory(),
        add_point: add_point_scheme(),
        drop_point: drop_point_scheme(),
        plain_iso: plain_iso_formula(),
        pointed_iso: pointed_iso_formula(),
    }
}

impl DemoBundle {
    /// Roundtrip on the plain side: add the point, then drop it.
    pub fn plain_roundtrip(&self) -> Result<TranslationScheme, SchemeError> {
        compose(&self.add_point, &self.drop_point)
    }

    /// Roundtrip on the pointed side: drop the point, then add one back.
    pub fn pointed_roundtrip(&self) -> Result<TranslationScheme, SchemeError> {
        compose(&self.drop_point, &self.add_point)
    }
}

/// Checks both defined isomorphisms at size `n`: the plain structure against
/// its roundtrip image, and every pointed structure (each constant placement)
/// against its own.
pub fn roundtrip_check(n: usize) -> Result<Report, SchemeError> {
    roundtrip_check_capped(n, ROUNDTRIP_CAP)
}

pub fn roundtrip_check_capped(n: usize, cap: usize) -> Result<Report, SchemeError> {
    if n == 0 || n > cap {
        return Err(SchemeError::IllFormed(format!(
            "roundtrip size must be within 1..={cap}, got {n}"
        )));
    }
    let bundle = demo_bundle();
    let plain = bundle.plain_roundtrip()?;
    let pointed = bundle.pointed_roundtrip()?;
    let mut report = Report::new(format!("roundtrip isomorphisms at size {n}"));

    let a = FiniteStructure::anonymous(n);
    let sub = check_defined_isomorphism(&a, &plain, &bundle.plain_iso)?;
    report.record(
        "plain-side",
        sub.passed(),
        format!("size {n}: {}", outcome(&sub)),
    );

    for k in 0..n {
        let b = FiniteStructure::pointed(n, POINT, k).expect("valid placement");
        let sub = check_defined_isomorphism(&b, &pointed, &bundle.pointed_iso)?;
        report.record(
            format!("pointed-side[c={k}]"),
            sub.passed(),
            outcome(&sub).to_string(),
        );
    }
    Ok(report)
}

fn outcome(r: &Report) -> &'static str {
    if r.passed() {
        "isomorphism confirmed"
    } else {
        "check failed"
    }
}

/// The automorphism obstruction at size `n`: without the constant no element
/// is definable, with the constant its denotation is. At size 2 the
/// complement of the denotation is a second fixed point (the one finite-size
/// artifact), so there the definable set is the whole two-element domain.
pub fn nondefinability_check(n: usize, cap: usize) -> Result<Report, OrbitError> {
    if n < 2 || n > cap {
        return Err(OrbitError::SizeExceedsCap { size: n, cap });
    }
    let mut report = Report::new(format!("definable singletons at size {n}"));
    let plain = definable_singletons(&FiniteStructure::anonymous(n), cap)?;
    report.record(
        "plain",
        plain.is_empty(),
        format!("definable singletons: {plain:?} (expected none)"),
    );
    for k in 0..n {
        let b = FiniteStructure::pointed(n, POINT, k).expect("valid placement");
        let got = definable_singletons(&b, cap)?;
        if n == 2 {
            let expected: std::collections::BTreeSet<usize> = [0, 1].into_iter().collect();
            report.record(
                format!("pointed[c={k}]"),
                got == expected,
                format!("definable singletons: {got:?} (the other point is the complement of the constant)"),
            );
        } else {
            let expected: std::collections::BTreeSet<usize> = [k].into_iter().collect();
            report.record(
                format!("pointed[c={k}]"),
                got == expected,
                format!("definable singletons: {got:?} (expected exactly the constant)"),
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::apply_scheme;

    #[test]
    fn theory_instances_are_closed_sentences() {
        let t = plain_theory();
        let s = pointed_theory();
        assert!(t.axiom_base(10).is_ok());
        assert!(s.axiom_base(10).is_ok());
        // both generate syntactically identical axioms
        assert_eq!(t.axiom_base(6).unwrap(), s.axiom_base(6).unwrap());
    }

    #[test]
    fn theory_instances_have_the_right_thresholds() {
        let t = plain_theory();
        let two = t.schemas[0].instance(2);
        let three = t.schemas[0].instance(3);
        let a2 = FiniteStructure::anonymous(2);
        assert!(a2.models(&two).unwrap());
        assert!(!a2.models(&three).unwrap());
        let b3 = FiniteStructure::pointed(3, POINT, 0).unwrap();
        for n in 0..=3 {
            assert!(b3.models(&pointed_theory().schemas[0].instance(n)).unwrap());
        }
    }

    #[test]
    fn scheme_flags_match_the_construction() {
        let t = add_point_scheme();
        let flags = t.classify();
        assert!(!flags.one_dimensional);
        assert!(!flags.identity_preserving);
        assert!(flags.unrelativized);
        assert!(!flags.direct);
        assert_eq!(t.dim(), 3);

        let s = drop_point_scheme();
        let flags = s.classify();
        assert!(flags.one_dimensional);
        assert!(flags.identity_preserving);
        assert!(!flags.unrelativized);
        assert!(!flags.direct);
        assert_eq!(s.dim(), 1);
    }

    #[test]
    fn roundtrip_dimensions_are_three() {
        let bundle = demo_bundle();
        assert_eq!(bundle.plain_roundtrip().unwrap().dim(), 3);
        assert_eq!(bundle.pointed_roundtrip().unwrap().dim(), 3);
    }

    #[test]
    fn sizes_shift_by_one_under_the_schemes() {
        let bundle = demo_bundle();
        for n in 1..=6 {
            let up = apply_scheme(&bundle.add_point, &FiniteStructure::anonymous(n)).unwrap();
            assert_eq!(up.result.size(), n + 1);
            let down = apply_scheme(
                &bundle.drop_point,
                &FiniteStructure::pointed(n, POINT, 0).unwrap(),
            )
            .unwrap();
            assert_eq!(down.result.size(), n - 1);
        }
    }

    #[test]
    fn roundtrips_pass_small_sizes() {
        for n in 1..=4 {
            let report = roundtrip_check(n).unwrap();
            assert!(report.passed(), "size {n}:\n{report}");
        }
    }

    #[test]
    fn bad_iso_formula_fails_the_check() {
        let bundle = demo_bundle();
        let plain = bundle.plain_roundtrip().unwrap();
        let a = FiniteStructure::anonymous(3);
        let bogus = parse_formula("y1 = y2", &empty_signature()).unwrap();
        let report = check_defined_isomorphism(&a, &plain, &bogus).unwrap();
        assert!(!report.passed());
        let first_fail = report.failures().next().unwrap().check.clone();
        assert!(
            first_fail == "functional" || first_fail == "well-defined",
            "unexpected first failure {first_fail}"
        );
    }

    #[test]
    fn nondefinability_small_sizes() {
        for n in 2..=5 {
            let report = nondefinability_check(n, 8).unwrap();
            assert!(report.passed(), "size {n}:\n{report}");
        }
    }

    #[test]
    fn roundtrip_size_bounds_are_enforced() {
        assert!(roundtrip_check(0).is_err());
        assert!(roundtrip_check_capped(9, 8).is_err());
        assert!(nondefinability_check(1, 8).is_err());
    }
}
