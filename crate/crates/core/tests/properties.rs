//! Randomized invariants of the black-box algorithms, judged by decoding.

use expgroup::algebra::{build_family, catalog, CayleyAlgebra};
use expgroup::blackbox::{Oracle, OracleSession};
use expgroup::generation::{random_subsum, reduce_generators, run_b_traced, BParams, CoinStream};
use expgroup::ideal::{run_c, DerivedOracle};
use expgroup::signature::Op;
use expgroup::truth::{derived_algebra, ideal_closure, sigma_closure, subgroup_closure, tau_step, ElementSet};
use expgroup::variety::enumerate_from_additive_gens;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn algebras() -> &'static [(&'static str, CayleyAlgebra)] {
    static ALGS: OnceLock<Vec<(&'static str, CayleyAlgebra)>> = OnceLock::new();
    ALGS.get_or_init(|| {
        catalog()
            .into_iter()
            .map(|(n, f)| (n, build_family(&f).unwrap()))
            .filter(|(_, a)| a.size() <= 24)
            .collect()
    })
}

fn coins(seed: u64) -> CoinStream<ChaCha8Rng> {
    CoinStream::new(ChaCha8Rng::seed_from_u64(seed))
}

fn set(alg: &CayleyAlgebra, xs: impl IntoIterator<Item = usize>) -> ElementSet {
    ElementSet::from_indices(alg.size(), xs)
}

/// An algebra, a short tuple of its elements, and a seed.
fn case() -> impl Strategy<Value = (usize, Vec<usize>, u64)> {
    let n = algebras().len();
    (0..n, prop::collection::vec(0usize..4096, 0..4), any::<u64>()).prop_map(|(i, raw, seed)| {
        let size = algebras()[i].1.size();
        (i, raw.into_iter().map(|x| x % size).collect(), seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn b_rounds_stay_inside_tau(( i, s, seed) in case(), salt in 0u32..6, dedup in any::<bool>()) {
        let alg = &algebras()[i].1;
        let mut o = OracleSession::new(alg, salt, seed).unwrap();
        let n = o.encoding_len();
        let sh = o.handles_of(&s);
        let mut params = BParams::new(2.0).unwrap();
        params.dedup = dedup;
        let trace = run_b_traced(&mut o, n, &sh, &params, &mut coins(seed)).unwrap();
        prop_assert_eq!(trace.len(), n as usize);
        let reachable = sigma_closure(alg, &set(alg, s.iter().copied())).0;
        let mut prev = set(alg, s.iter().copied());
        let kn = params.draws(n);
        for round in &trace {
            let cur = set(alg, o.decode_all(&round.output).unwrap());
            let prev_span = subgroup_closure(alg, &prev);
            // R_i lies in ⟨s_{i-1}⟩, s_i in τ(⟨s_{i-1}⟩)
            let r = set(alg, o.decode_all(&round.subsums).unwrap());
            prop_assert!(r.is_subset(&prev_span));
            prop_assert!(cur.is_subset(&tau_step(alg, &prev_span)));
            prop_assert!(cur.is_subset(&reachable));
            if dedup {
                prop_assert_eq!(cur.len(), round.output.len());
            } else {
                prop_assert_eq!(round.subsums.len(), kn);
            }
            prev = cur;
        }
    }

    #[test]
    fn b_query_budget((i, s, seed) in case()) {
        let alg = &algebras()[i].1;
        let mut o = OracleSession::new(alg, 2, seed).unwrap();
        let n = o.encoding_len();
        let sh = o.handles_of(&s);
        let params = BParams::new(2.0).unwrap();
        let trace = run_b_traced(&mut o, n, &sh, &params, &mut coins(seed)).unwrap();
        let kn = params.draws(n) as u64;
        let mut longest = s.len() as u64;
        let mut budget = 0u64;
        let arities = o.omega_arities().to_vec();
        for round in &trace {
            // kn subsums of the previous tuple, one zero query each at most,
            // then every ω on every tuple of distinct subsums
            let r = round.subsums.len() as u64;
            budget += kn * (longest + 1) + arities.iter().map(|&a| r.pow(a as u32)).sum::<u64>();
            longest = round.output.len() as u64;
        }
        prop_assert!(o.counts().total_operations() <= budget);
        let cap = n as u64 * (kn + arities.iter().map(|&a| kn.pow(a as u32)).sum::<u64>());
        prop_assert!(trace.iter().all(|r| r.output.len() as u64 <= cap));
    }

    #[test]
    fn reduced_generators_stay_in_the_subgroup((i, g, seed) in case()) {
        let alg = &algebras()[i].1;
        let mut o = OracleSession::new(alg, 3, seed).unwrap();
        let gh = o.handles_of(&g);
        let params = BParams::new(2.0).unwrap();
        let out = reduce_generators(&mut o, 8, &gh, &params, &mut coins(seed)).unwrap();
        prop_assert_eq!(out.len(), 56);
        let span = subgroup_closure(alg, &set(alg, g.iter().copied()));
        prop_assert!(set(alg, o.decode_all(&out).unwrap()).is_subset(&span));
    }

    #[test]
    fn subsums_lie_in_the_span((i, g, seed) in case()) {
        let alg = &algebras()[i].1;
        let mut o = OracleSession::new(alg, 3, seed).unwrap();
        let gh = o.handles_of(&g);
        let span = subgroup_closure(alg, &set(alg, g.iter().copied()));
        let mut c = coins(seed);
        for _ in 0..20 {
            let h = random_subsum(&mut o, &gh, &mut c).unwrap();
            prop_assert!(span.contains(o.decode_for_test(&h).unwrap()));
        }
        prop_assert_eq!(c.consumed(), 20 * g.len() as u64);
    }

    #[test]
    fn c_output_stays_in_the_ideal((i, t, seed) in case()) {
        let alg = &algebras()[i].1;
        let mut o = OracleSession::new(alg, 2, seed).unwrap();
        let n = o.encoding_len();
        let s = expgroup::truth::generating_system(alg);
        let sh = o.handles_of(&s);
        let th = o.handles_of(&t);
        let params = BParams::new(2.0).unwrap();
        let out = run_c(&mut o, alg.signature(), n, &sh, &th, &params, seed % 3 == 0, &mut coins(seed)).unwrap();
        let ideal = ideal_closure(alg, &set(alg, t.iter().copied()));
        prop_assert!(set(alg, o.decode_all(&out.output).unwrap()).is_subset(&ideal));
    }

    #[test]
    fn derived_oracle_agrees_with_derived_tables((i, g, seed) in case(), x in 0usize..4096) {
        let alg = &algebras()[i].1;
        let x = x % alg.size();
        let table = derived_algebra(alg, &g).unwrap();
        let mut base = OracleSession::new(alg, 4, seed).unwrap();
        let gh = base.handles_of(&g);
        let hx = base.handle_of(x);
        let mut d = DerivedOracle::new(&mut base, gh, alg.signature());
        let symbols = d.omega_arities().len();
        let answers: Vec<_> = (0..symbols)
            .map(|s| d.query_op(Op::Omega(s), std::slice::from_ref(&hx)).unwrap())
            .collect();
        drop(d);
        for (s, h) in answers.iter().enumerate() {
            prop_assert_eq!(base.decode_for_test(h).unwrap(), table.omega_op(s, &[x]));
        }
    }

    #[test]
    fn enumeration_is_the_subgroup_closure((i, g, seed) in case()) {
        let alg = &algebras()[i].1;
        let mut o = OracleSession::new(alg, 5, seed).unwrap();
        let gh = o.handles_of(&g);
        let en = enumerate_from_additive_gens(&mut o, &gh, 4096).unwrap();
        let got = o.decode_all(&en.elements).unwrap();
        let got_set = set(alg, got.iter().copied());
        prop_assert_eq!(got_set.len(), got.len());
        prop_assert_eq!(got_set, subgroup_closure(alg, &set(alg, g.iter().copied())));
    }
}
