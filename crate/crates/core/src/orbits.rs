//! Automorphisms, orbits, and orbit-based definability oracles.
//!
//! On a finite structure, a set is definable without parameters exactly when
//! it is invariant under every automorphism, so orbit computations decide
//! definability questions outright. This equivalence is specific to finite
//! structures and is unsound for infinite ones.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use thiserror::Error;

use crate::structures::{tuples, FiniteStructure};

/// Default cap on the domain size for brute-force permutation search.
pub const DEFAULT_AUTOMORPHISM_CAP: usize = 8;

/// Cap on how many orbit unions the invariant-relation scan may enumerate.
pub const ORBIT_UNION_CAP: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbitError {
    #[error("structure size {size} exceeds the automorphism bound {cap}")]
    SizeExceedsCap { size: usize, cap: usize },
    #[error("{count} binary orbits: the 2^{count} candidate unions exceed the 2^{cap} scan cap")]
    TooManyOrbitUnions { count: usize, cap: u32 },
}

/// A permutation of the domain, as the image vector `p[i]`.
pub type Perm = Vec<usize>;

fn preserves(a: &FiniteStructure, p: &Perm) -> bool {
    for (_, &v) in a.constants() {
        if p[v] != v {
            return false;
        }
    }
    for (_, table) in a.relations() {
        for t in table {
            let image: Vec<usize> = t.iter().map(|&e| p[e]).collect();
            if !table.contains(&image) {
                return false;
            }
        }
        // bijectivity makes the forward check sufficient on finite tables
    }
    true
}

/// All automorphisms of `a`, by filtering the n! permutations of the domain.
/// Errors when the size exceeds `cap`.
pub fn automorphisms(a: &FiniteStructure, cap: usize) -> Result<Vec<Perm>, OrbitError> {
    let n = a.size();
    if n > cap {
        return Err(OrbitError::SizeExceedsCap { size: n, cap });
    }
    let perms: Vec<Perm> = if n == 0 {
        vec![vec![]]
    } else {
        (0..n).permutations(n).collect()
    };
    Ok(perms.into_iter().filter(|p| preserves(a, p)).collect())
}

/// Partition of `domain^arity` into orbits under the diagonal action of the
/// automorphism group. Orbits are sorted by their least tuple.
pub fn orbits(
    a: &FiniteStructure,
    arity: usize,
    cap: usize,
) -> Result<Vec<BTreeSet<Vec<usize>>>, OrbitError> {
    let autos = automorphisms(a, cap)?;
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for t in tuples(a.size(), arity) {
        if seen.contains(&t) {
            continue;
        }
        let orbit: BTreeSet<Vec<usize>> = autos
            .iter()
            .map(|p| t.iter().map(|&e| p[e]).collect::<Vec<usize>>())
            .collect();
        seen.extend(orbit.iter().cloned());
        out.push(orbit);
    }
    Ok(out)
}

/// Elements whose 1-orbit is a singleton; on a finite structure these are
/// exactly the elements definable without parameters.
pub fn definable_singletons(a: &FiniteStructure, cap: usize) -> Result<BTreeSet<usize>, OrbitError> {
    let orbits = orbits(a, 1, cap)?;
    Ok(orbits
        .into_iter()
        .filter(|o| o.len() == 1)
        .map(|o| o.into_iter().next().unwrap()[0])
        .collect())
}

/// Searches the unions of binary orbits for an automorphism-invariant relation
/// that is connected (any two distinct elements are related one way or the
/// other) and asymmetric (never both ways). Returns the first union found in
/// subset order, or `None` when no invariant relation qualifies.
pub fn exists_connected_asymmetric_invariant(
    a: &FiniteStructure,
    cap: usize,
) -> Result<Option<BTreeSet<Vec<usize>>>, OrbitError> {
    let orbs = orbits(a, 2, cap)?;
    if orbs.len() > ORBIT_UNION_CAP as usize {
        return Err(OrbitError::TooManyOrbitUnions {
            count: orbs.len(),
            cap: ORBIT_UNION_CAP,
        });
    }
    let n = a.size();
    for mask in 0u64..(1u64 << orbs.len()) {
        let mut rel: BTreeSet<Vec<usize>> = BTreeSet::new();
        for (i, o) in orbs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                rel.extend(o.iter().cloned());
            }
        }
        if is_connected_asymmetric(&rel, n) {
            return Ok(Some(rel));
        }
    }
    Ok(None)
}

fn is_connected_asymmetric(rel: &BTreeSet<Vec<usize>>, n: usize) -> bool {
    for x in 0..n {
        for y in 0..n {
            let xy = rel.contains(&vec![x, y]);
            let yx = rel.contains(&vec![y, x]);
            if xy && yx {
                return false; // asymmetry (covers irreflexivity at x == y)
            }
            if x != y && !xy && !yx {
                return false; // connectedness
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Signature;
    use std::collections::BTreeMap;

    fn strict_order_3() -> FiniteStructure {
        let sig = Signature::new("ord", vec![("R".to_string(), 2)], vec![]).unwrap();
        let mut rels = BTreeMap::new();
        rels.insert(
            "R".to_string(),
            [vec![0, 1], vec![0, 2], vec![1, 2]].into_iter().collect(),
        );
        FiniteStructure::new(sig, 3, rels, BTreeMap::new()).unwrap()
    }

    #[test]
    fn full_symmetry_without_structure() {
        for n in 0..5 {
            let a = FiniteStructure::anonymous(n);
            let count = automorphisms(&a, 8).unwrap().len();
            let fact: usize = (1..=n).product::<usize>().max(1);
            assert_eq!(count, fact);
        }
    }

    #[test]
    fn constants_pin_down_points() {
        let a = FiniteStructure::pointed(3, "c", 2).unwrap();
        let autos = automorphisms(&a, 8).unwrap();
        assert_eq!(autos.len(), 2);
        assert!(autos.iter().all(|p| p[2] == 2));
    }

    #[test]
    fn rigid_linear_order() {
        let a = strict_order_3();
        assert_eq!(automorphisms(&a, 8).unwrap().len(), 1);
    }

    #[test]
    fn automorphisms_form_a_group() {
        // identity, closure under composition and inverse; sizes <= 5 exhaustive
        let cases: Vec<FiniteStructure> = (0..=5)
            .map(FiniteStructure::anonymous)
            .chain((1..=4).map(|n| FiniteStructure::pointed(n, "c", 0).unwrap()))
            .chain(std::iter::once(strict_order_3()))
            .collect();
        for a in cases {
            let autos = automorphisms(&a, 8).unwrap();
            let set: BTreeSet<Perm> = autos.iter().cloned().collect();
            let id: Perm = (0..a.size()).collect();
            assert!(set.contains(&id));
            for p in &autos {
                let mut inv = vec![0; p.len()];
                for (i, &pi) in p.iter().enumerate() {
                    inv[pi] = i;
                }
                assert!(set.contains(&inv));
                for q in &autos {
                    let comp: Perm = (0..p.len()).map(|i| q[p[i]]).collect();
                    assert!(set.contains(&comp));
                }
            }
        }
    }

    #[test]
    fn orbit_examples() {
        let a = FiniteStructure::anonymous(3);
        let o1 = orbits(&a, 1, 8).unwrap();
        assert_eq!(o1.len(), 1);
        assert_eq!(o1[0].len(), 3);

        let b = FiniteStructure::anonymous(2);
        let o2 = orbits(&b, 2, 8).unwrap();
        let diag: BTreeSet<Vec<usize>> = [vec![0, 0], vec![1, 1]].into_iter().collect();
        let off: BTreeSet<Vec<usize>> = [vec![0, 1], vec![1, 0]].into_iter().collect();
        assert_eq!(o2, vec![diag, off]);

        let c = FiniteStructure::pointed(3, "c", 2).unwrap();
        let oc = orbits(&c, 1, 8).unwrap();
        let expected: Vec<BTreeSet<Vec<usize>>> = vec![
            [vec![0], vec![1]].into_iter().collect(),
            [vec![2]].into_iter().collect(),
        ];
        assert_eq!(oc, expected);
    }

    #[test]
    fn singleton_orbits() {
        for n in 2..=6 {
            assert!(definable_singletons(&FiniteStructure::anonymous(n), 8)
                .unwrap()
                .is_empty());
        }
        assert_eq!(
            definable_singletons(&FiniteStructure::anonymous(1), 8).unwrap(),
            [0].into_iter().collect()
        );
        assert_eq!(
            definable_singletons(&FiniteStructure::pointed(3, "c", 2).unwrap(), 8).unwrap(),
            [2].into_iter().collect()
        );
    }

    #[test]
    fn no_invariant_tournament_on_symmetric_domains() {
        for n in 2..=5 {
            let a = FiniteStructure::anonymous(n);
            assert_eq!(exists_connected_asymmetric_invariant(&a, 8).unwrap(), None);
        }
    }

    #[test]
    fn rigid_order_admits_an_invariant_tournament() {
        let a = strict_order_3();
        let got = exists_connected_asymmetric_invariant(&a, 8)
            .unwrap()
            .expect("a rigid order carries its own tournament");
        assert!(is_connected_asymmetric(&got, 3));
    }

    #[test]
    fn cap_is_enforced() {
        let a = FiniteStructure::anonymous(9);
        assert!(matches!(
            automorphisms(&a, 8),
            Err(OrbitError::SizeExceedsCap { .. })
        ));
    }
}
