//! Exhaustive checks of the closure lemmas and of the ideal / Φ(m)-subgroup
//! correspondence over the catalog algebras.

use expgroup::algebra::{build_family, catalog, CayleyAlgebra, Family};
use expgroup::truth::{
    additive_generating_set, all_subgroups, ideal_correspondence, is_ideal, structural_lemmas, subgroup_closure,
    ElementSet,
};

fn algebras(max_size: usize) -> Vec<(&'static str, CayleyAlgebra)> {
    catalog()
        .into_iter()
        .map(|(name, f)| (name, build_family(&f).unwrap()))
        .filter(|(_, a)| a.size() <= max_size)
        .collect()
}

#[test]
fn closure_lemmas_hold_on_every_subset() {
    let algs = algebras(16);
    assert!(algs.len() >= 12);
    for (name, alg) in algs {
        let check = structural_lemmas(&alg).unwrap();
        assert_eq!(check.cases, 1 << alg.size());
        assert!(check.violations.is_empty(), "{name}: {:?}", check.violations);
    }
}

#[test]
fn ideals_are_exactly_phi_subgroups() {
    for (name, alg) in algebras(64) {
        let g = additive_generating_set(&alg);
        let check = ideal_correspondence(&alg, &g, 10_000).unwrap();
        assert!(check.cases >= 1);
        assert!(check.violations.is_empty(), "{name}: {:?}", check.violations);
        // an oversized generating tuple: every element, in order
        if alg.size() <= 16 {
            let all: Vec<usize> = alg.elements().collect();
            let check = ideal_correspondence(&alg, &all, 10_000).unwrap();
            assert!(check.violations.is_empty(), "{name}/all: {:?}", check.violations);
        }
    }
}

#[test]
fn ideals_are_phi_subgroups_for_non_generating_tuples() {
    let mut proper = 0;
    for (name, alg) in algebras(64) {
        let g = additive_generating_set(&alg);
        for drop in 0..g.len() {
            let mut h = g.clone();
            h.remove(drop);
            let spans = subgroup_closure(&alg, &ElementSet::from_indices(alg.size(), h.iter().copied())).is_full();
            assert!(!spans, "greedy generating sets are irredundant");
            proper += 1;
            let check = ideal_correspondence(&alg, &h, 10_000).unwrap();
            assert!(
                check.violations.is_empty(),
                "{name} without g{drop}: {:?}",
                check.violations
            );
        }
    }
    assert!(proper > 0);
}

#[test]
fn converse_needs_a_generating_tuple() {
    // Φ(0) over a ring has no symbols, so every subgroup of M2(Z2) is a
    // Φ(0)-subgroup, yet the simple ring has only two ideals
    let alg = build_family(&Family::MatrixRing {
        k: 2,
        p: 2,
        unital: false,
    })
    .unwrap();
    let subs = all_subgroups(&alg, 10_000).unwrap();
    let ideals = subs.iter().filter(|s| is_ideal(&alg, s)).count();
    assert_eq!(ideals, 2);
    assert!(subs.len() > ideals);
    assert!(ideal_correspondence(&alg, &[], 10_000).unwrap().violations.is_empty());
}
