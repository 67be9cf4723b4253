//! Semantic checks tying the two directions of a scheme together: satisfaction
//! of a translated formula in the base structure against satisfaction of the
//! original in the induced structure, and verification that a formula defines
//! an isomorphism onto a roundtrip image.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::Formula;
use crate::report::Report;
use crate::structures::{tuples, Assignment, FiniteStructure};

use super::{apply_scheme, SchemeError, TranslationScheme};

/// Checks that for assignments of class representatives, the induced
/// structure satisfies `f` exactly when the base structure satisfies the
/// translation of `f`. Exhaustive when the assignment space is at most
/// `trials`, otherwise `trials` seeded random samples.
///
/// Requires the scheme to validate on `a` without witnessless classes: a
/// class with no member tuple has no representative to test.
pub fn check_commutation(
    scheme: &TranslationScheme,
    a: &FiniteStructure,
    f: &Formula,
    trials: usize,
    seed: u64,
) -> Result<Report, SchemeError> {
    let interp = apply_scheme(scheme, a)?;
    if interp.has_witnessless_classes() {
        return Err(SchemeError::WitnesslessClasses(interp.validation));
    }
    let (translated, blocks) = scheme.translate_formula_with_vars(f)?;

    let mut report = Report::new(format!(
        "commutation of `{f}` under scheme `{}`",
        scheme.name
    ));
    let free: Vec<String> = f.free_vars();
    let n_classes = interp.result.size();
    if n_classes == 0 && !free.is_empty() {
        report.note(
            "assignments",
            "induced structure is empty; nothing to check for an open formula".to_string(),
        );
        return Ok(report);
    }

    let total = n_classes.checked_pow(free.len() as u32).unwrap_or(usize::MAX);
    let assignments: Vec<Vec<usize>> = if free.is_empty() {
        vec![vec![]]
    } else if total <= trials {
        tuples(n_classes, free.len())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials)
            .map(|_| (0..free.len()).map(|_| rng.gen_range(0..n_classes)).collect())
            .collect()
    };
    let exhaustive = free.is_empty() || total <= trials;

    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for assignment in &assignments {
        let mut lhs_env = Assignment::new();
        let mut rhs_env = Assignment::new();
        for (v, &class) in free.iter().zip(assignment.iter()) {
            lhs_env.insert(v.clone(), class);
            let rep = interp.reps[class]
                .as_ref()
                .expect("witnessless classes rejected above");
            for (component, &e) in blocks[v].iter().zip(rep.iter()) {
                rhs_env.insert(component.clone(), e);
            }
        }
        let lhs = interp.result.eval(f, &lhs_env)?;
        let rhs = a.eval(&translated, &rhs_env)?;
        checked += 1;
        if lhs != rhs {
            mismatches += 1;
            if mismatches <= 5 {
                report.fail(
                    "counterexample",
                    format!(
                        "assignment {assignment:?}: induced structure says {lhs}, base says {rhs}"
                    ),
                );
            }
        }
    }
    if mismatches == 0 {
        report.pass(
            "commutation",
            format!(
                "{checked} assignment(s) agree ({})",
                if exhaustive { "exhaustive" } else { "sampled" }
            ),
        );
    } else {
        report.fail(
            "commutation",
            format!("{mismatches} of {checked} assignment(s) disagree"),
        );
    }
    Ok(report)
}

/// Checks that `iso` (free variables `x, y1..yd`) defines an isomorphism from
/// `a` onto `apply_scheme(scheme, a)`.
///
/// The defined relation sends an element to the class of any witnessing
/// tuple. For a synthesized constant class, tuples satisfying the constant's
/// defining formula anywhere in the base structure count as witnesses; if
/// even those are absent, the pairing of the constant's denotations is forced
/// and recorded as a note.
pub fn check_defined_isomorphism(
    a: &FiniteStructure,
    scheme: &TranslationScheme,
    iso: &Formula,
) -> Result<Report, SchemeError> {
    if !scheme.source().same_symbols(scheme.target()) {
        return Err(SchemeError::SignatureMismatch(
            "roundtrip scheme must have equal source and target signatures".into(),
        ));
    }
    if !a.signature().same_symbols(scheme.source()) {
        return Err(SchemeError::SignatureMismatch(
            "structure signature must match the roundtrip scheme".into(),
        ));
    }
    let d = scheme.dim();
    let mut allowed: Vec<String> = vec!["x".to_string()];
    allowed.extend(super::tuple_vars("y", d));
    for v in iso.free_vars() {
        if !allowed.contains(&v) {
            return Err(SchemeError::BadSourceFormula(format!(
                "isomorphism formula may only use {}; found `{v}`",
                allowed.join(", ")
            )));
        }
    }
    iso.well_formed_over(a.signature())
        .map_err(SchemeError::BadSourceFormula)?;

    let interp = apply_scheme(scheme, a)?;
    let mut report = Report::new(format!(
        "defined isomorphism under scheme `{}` on {}",
        scheme.name, a
    ));

    let holds = |element: usize, tuple: &[usize]| -> Result<bool, SchemeError> {
        let mut env = Assignment::new();
        env.insert("x".to_string(), element);
        for (j, &e) in tuple.iter().enumerate() {
            env.insert(format!("y{}", j + 1), e);
        }
        Ok(a.eval(iso, &env)?)
    };

    // extended witnesses for synthesized classes: tuples satisfying the
    // constant's defining formula over the full domain
    let mut extended: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for (c, &k) in &interp.synthetic {
        let def = scheme.const_defs().get(c).expect("synthetic implies a definition");
        let mut witnesses = Vec::new();
        for t in tuples(a.size(), d) {
            let mut env = Assignment::new();
            for (j, &e) in t.iter().enumerate() {
                env.insert(format!("x{}", j + 1), e);
            }
            if a.eval(def, &env)? {
                witnesses.push(t);
            }
        }
        if !witnesses.is_empty() {
            report.note(
                "witnesses",
                format!(
                    "class {k} (constant `{c}`) uses {} defining-formula witnesses outside the domain set",
                    witnesses.len()
                ),
            );
        }
        extended.insert(k, witnesses);
    }

    // well-definedness: within a class the formula must not distinguish tuples
    let mut well_defined = true;
    'wd: for element in a.domain() {
        for members in &interp.classes {
            if members.len() < 2 {
                continue;
            }
            let mut vals = BTreeSet::new();
            for t in members {
                vals.insert(holds(element, t)?);
            }
            if vals.len() > 1 {
                report.fail(
                    "well-defined",
                    format!(
                        "element {element} is related to part of the class of {:?}",
                        members[0]
                    ),
                );
                well_defined = false;
                break 'wd;
            }
        }
    }
    if well_defined {
        report.pass("well-defined", "formula respects the identity classes".to_string());
    }

    // image sets
    let mut images: Vec<BTreeSet<usize>> = Vec::new();
    for element in a.domain() {
        let mut image = BTreeSet::new();
        for (k, members) in interp.classes.iter().enumerate() {
            let witnesses: &[Vec<usize>] = if members.is_empty() {
                extended.get(&k).map(|w| w.as_slice()).unwrap_or(&[])
            } else {
                members.as_slice()
            };
            for t in witnesses {
                if holds(element, t)? {
                    image.insert(k);
                    break;
                }
            }
        }
        images.push(image);
    }

    // forced pairing for constants whose class has no witnesses at all
    for (c, &k) in &interp.synthetic {
        if extended.get(&k).map(|w| w.is_empty()).unwrap_or(true) {
            let denotation = a.constant(c).expect("structure interprets its constants");
            if images[denotation].is_empty() {
                images[denotation].insert(k);
                report.note(
                    "constant-pairing",
                    format!(
                        "constant `{c}`: denotation {denotation} paired with its witnessless class {k}"
                    ),
                );
            }
        }
    }

    let total = images.iter().all(|s| !s.is_empty());
    report.record(
        "total",
        total,
        match images.iter().position(|s| s.is_empty()) {
            Some(e) => format!("element {e} has no image"),
            None => "every element has an image".to_string(),
        },
    );
    let functional = images.iter().all(|s| s.len() <= 1);
    report.record(
        "functional",
        functional,
        match images.iter().position(|s| s.len() > 1) {
            Some(e) => format!("element {e} has {} images", images[e].len()),
            None => "every element has at most one image".to_string(),
        },
    );

    if !(total && functional) {
        report.note("structure", "map checks skipped: not a function".to_string());
        return Ok(report);
    }

    let map: Vec<usize> = images
        .iter()
        .map(|s| *s.iter().next().expect("total"))
        .collect();
    let image_set: BTreeSet<usize> = map.iter().copied().collect();
    let injective = image_set.len() == map.len();
    report.record(
        "injective",
        injective,
        if injective {
            "distinct elements map to distinct classes".to_string()
        } else {
            "two elements share a class".to_string()
        },
    );
    let surjective = image_set.len() == interp.result.size();
    report.record(
        "surjective",
        surjective,
        format!(
            "{} of {} classes are hit",
            image_set.len(),
            interp.result.size()
        ),
    );
    if !(injective && surjective) {
        report.note("structure", "map checks skipped: not a bijection".to_string());
        return Ok(report);
    }

    let mut preserves = true;
    for (r, table) in a.relations() {
        let arity = a.signature().arity(r).expect("structure is well-formed");
        for t in tuples(a.size(), arity) {
            let image: Vec<usize> = t.iter().map(|&e| map[e]).collect();
            let lhs = table.contains(&t);
            let rhs = interp
                .result
                .relation(r)
                .map(|tbl| tbl.contains(&image))
                .unwrap_or(false);
            if lhs != rhs {
                report.fail(
                    format!("preserves[{r}]"),
                    format!("tuple {t:?} maps to {image:?}: {lhs} vs {rhs}"),
                );
                preserves = false;
            }
        }
    }
    for (c, &v) in a.constants() {
        let rhs = interp.result.constant(c).expect("induced structure interprets constants");
        if map[v] != rhs {
            report.fail(
                format!("preserves[{c}]"),
                format!("constant maps to class {} but denotes {rhs}", map[v]),
            );
            preserves = false;
        }
    }
    if preserves {
        report.pass(
            "structure-preserving",
            "relations and constants carry over".to_string(),
        );
    }
    Ok(report)
}
