//! Brute-force ground truth over explicit algebras.
//!
//! Everything here is exponential in the encoding length and exists only to
//! judge the black-box algorithms: subgroup, subalgebra, and ideal closures,
//! the `τ` step, subgroup lattices, and chain lengths.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{AlgebraError, CayleyAlgebra};
use crate::ideal::{build_phi, PhiSymbol};
use crate::signature::{Identity, Op};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TruthError {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

/// Bitset over the element indices of one algebra.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSet {
    words: Vec<u64>,
    universe: usize,
}

impl ElementSet {
    pub fn empty(universe: usize) -> Self {
        ElementSet {
            words: vec![0; universe.div_ceil(64)],
            universe,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = ElementSet::empty(universe);
        (0..universe).for_each(|i| {
            s.insert(i);
        });
        s
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = ElementSet::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// The subset whose members are the set bits of `mask` (`universe ≤ 64`).
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= 64);
        let mut s = ElementSet::empty(universe);
        if universe > 0 {
            s.words[0] = mask;
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Returns `true` when `i` was not already present.
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.universe, "index {i} outside universe {}", self.universe);
        let (w, b) = (i / 64, i % 64);
        let fresh = self.words[w] >> b & 1 == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.universe
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |&i| self.contains(i))
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        ElementSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
            universe: self.universe,
        }
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// `⟨S⟩` in the additive group: the least subset containing `S` and `0`
/// closed under `+` (and hence under `-`, the carrier being finite).
pub fn subgroup_closure(alg: &CayleyAlgebra, s: &ElementSet) -> ElementSet {
    let gens: Vec<usize> = s.iter().collect();
    let mut out = ElementSet::empty(alg.size());
    out.insert(alg.zero());
    let mut queue = vec![alg.zero()];
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        for &g in &gens {
            let y = alg.add(x, g);
            if out.insert(y) {
                queue.push(y);
            }
        }
    }
    out
}

/// `⟨S ∪ {h}⟩` for a subgroup `S`: adds `h` and closes again, reusing `S`.
fn extend_subgroup(alg: &CayleyAlgebra, sub: &ElementSet, h: usize) -> ElementSet {
    let mut out = sub.clone();
    let mut queue: Vec<usize> = sub.iter().collect();
    let gens: Vec<usize> = {
        let mut g = vec![h];
        // any generating set of `sub` works; its elements are the simplest
        g.extend(sub.iter());
        g
    };
    if out.insert(h) {
        queue.push(h);
    }
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        for &g in &gens {
            let y = alg.add(x, g);
            if out.insert(y) {
                queue.push(y);
            }
        }
    }
    out
}

/// Calls `f` on every `arity`-tuple drawn from `elems`, in lexicographic order.
pub fn for_each_tuple(elems: &[usize], arity: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; arity];
    let mut tuple = vec![0usize; arity];
    if arity > 0 && elems.is_empty() {
        return;
    }
    loop {
        for (t, &i) in tuple.iter_mut().zip(&idx) {
            *t = elems[i];
        }
        f(&tuple);
        let mut pos = arity;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `⋃_ω ω(S^{arω})`.
pub fn omega_images(alg: &CayleyAlgebra, s: &ElementSet) -> ElementSet {
    let elems: Vec<usize> = s.iter().collect();
    let mut out = ElementSet::empty(alg.size());
    for (w, sym) in alg.signature().omega().iter().enumerate() {
        for_each_tuple(&elems, sym.arity, |args| {
            out.insert(alg.omega_op(w, args));
        });
    }
    out
}

/// `τ(S) = ⟨S ∪ ⋃_ω ω(S^{arω})⟩`.
pub fn tau_step(alg: &CayleyAlgebra, s: &ElementSet) -> ElementSet {
    subgroup_closure(alg, &s.union(&omega_images(alg, s)))
}

/// Iterates `τ` to its fixpoint, which is `⟨S⟩_Σ`. Also returns the least `j`
/// with `τ^j(S) = τ^{j+1}(S)`.
pub fn sigma_closure(alg: &CayleyAlgebra, s: &ElementSet) -> (ElementSet, usize) {
    let mut cur = s.clone();
    let mut j = 0;
    loop {
        let next = tau_step(alg, &cur);
        if next == cur {
            return (cur, j);
        }
        cur = next;
        j += 1;
    }
}

/// Subalgebra closure by plain saturation: apply every symbol of `Σ` to all
/// tuples of the current set until nothing new appears.
pub fn worklist_closure(alg: &CayleyAlgebra, s: &ElementSet) -> ElementSet {
    let sig = alg.signature();
    let ops: Vec<(Op, usize)> = [(Op::Add, 2), (Op::Neg, 1), (Op::Zero, 0)]
        .into_iter()
        .chain(sig.omega().iter().enumerate().map(|(i, s)| (Op::Omega(i), s.arity)))
        .collect();
    let mut set = s.clone();
    for &(op, arity) in &ops {
        if arity == 0 {
            set.insert(alg.apply(op, &[]));
        }
    }
    loop {
        let elems: Vec<usize> = set.iter().collect();
        let mut grown = false;
        for &(op, arity) in &ops {
            if arity == 0 {
                continue;
            }
            for_each_tuple(&elems, arity, |args| {
                grown |= set.insert(alg.apply(op, args));
            });
        }
        if !grown {
            return set;
        }
    }
}

/// A Σ-generating tuple of the algebra, chosen greedily by smallest index.
pub fn generating_system(alg: &CayleyAlgebra) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = sigma_closure(alg, &ElementSet::empty(alg.size())).0;
    while let Some(next) = (0..alg.size()).find(|&i| !span.contains(i)) {
        gens.push(next);
        span = sigma_closure(alg, &ElementSet::from_indices(alg.size(), gens.iter().copied())).0;
    }
    gens
}

/// An additive generating tuple, chosen greedily by smallest index.
pub fn additive_generating_set(alg: &CayleyAlgebra) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = subgroup_closure(alg, &ElementSet::empty(alg.size()));
    while let Some(next) = (0..alg.size()).find(|&i| !span.contains(i)) {
        gens.push(next);
        span = extend_subgroup(alg, &span, next);
    }
    gens
}

pub fn is_subgroup(alg: &CayleyAlgebra, s: &ElementSet) -> bool {
    s.contains(alg.zero())
        && s.iter()
            .all(|a| s.contains(alg.neg(a)) && s.iter().all(|b| s.contains(alg.add(a, b))))
}

/// Closure of `S` under conjugation `-g + x + g` by a generating set of
/// `Add H` and under group operations: the normal closure of `S`.
pub fn normal_closure(alg: &CayleyAlgebra, s: &ElementSet) -> ElementSet {
    let gens = additive_generating_set(alg);
    let mut cur = subgroup_closure(alg, s);
    loop {
        let mut next = cur.clone();
        for x in cur.iter() {
            for &g in &gens {
                next.insert(alg.add(alg.add(alg.neg(g), x), g));
            }
        }
        let next = subgroup_closure(alg, &next);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// The ideal criterion for distributive algebras: a normal subgroup `A` with
/// `ω(H, …, A, …, H) ⊆ A` in every position of every non-nullary `ω`.
pub fn is_ideal(alg: &CayleyAlgebra, a: &ElementSet) -> bool {
    if !is_subgroup(alg, a) {
        return false;
    }
    let all: Vec<usize> = alg.elements().collect();
    for x in a.iter() {
        for g in alg.elements() {
            if !a.contains(alg.add(alg.add(alg.neg(g), x), g)) {
                return false;
            }
        }
    }
    for (w, sym) in alg.signature().omega().iter().enumerate() {
        if sym.arity == 0 {
            continue;
        }
        for pos in 0..sym.arity {
            let mut ok = true;
            for_each_tuple(&all, sym.arity - 1, |rest| {
                if !ok {
                    return;
                }
                let mut args: Vec<usize> = rest.to_vec();
                args.insert(pos, 0);
                for x in a.iter() {
                    args[pos] = x;
                    if !a.contains(alg.omega_op(w, &args)) {
                        ok = false;
                        return;
                    }
                }
            });
            if !ok {
                return false;
            }
        }
    }
    true
}

/// The ideal generated by `T`: alternate normal closure and absorption of
/// `ω(H, …, A, …, H)` until stable.
pub fn ideal_closure(alg: &CayleyAlgebra, t: &ElementSet) -> ElementSet {
    let all: Vec<usize> = alg.elements().collect();
    let mut cur = normal_closure(alg, t);
    loop {
        let mut next = cur.clone();
        for (w, sym) in alg.signature().omega().iter().enumerate() {
            if sym.arity == 0 {
                continue;
            }
            for pos in 0..sym.arity {
                for_each_tuple(&all, sym.arity - 1, |rest| {
                    let mut args: Vec<usize> = rest.to_vec();
                    args.insert(pos, 0);
                    for x in cur.iter() {
                        args[pos] = x;
                        next.insert(alg.omega_op(w, &args));
                    }
                });
            }
        }
        let next = normal_closure(alg, &next);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Every subgroup of `Add H`, found by joining single elements onto known
/// subgroups starting from `{0}`. Fails once more than `max_subgroups` exist.
pub fn all_subgroups(alg: &CayleyAlgebra, max_subgroups: usize) -> Result<Vec<ElementSet>, TruthError> {
    let trivial = subgroup_closure(alg, &ElementSet::empty(alg.size()));
    let mut seen: HashSet<ElementSet> = HashSet::from([trivial.clone()]);
    let mut list = vec![trivial];
    let mut head = 0;
    while head < list.len() {
        let sub = list[head].clone();
        head += 1;
        for h in alg.elements() {
            if sub.contains(h) {
                continue;
            }
            let bigger = extend_subgroup(alg, &sub, h);
            if seen.insert(bigger.clone()) {
                list.push(bigger);
                if list.len() > max_subgroups {
                    return Err(TruthError::BudgetExceeded(format!(
                        "more than {max_subgroups} subgroups"
                    )));
                }
            }
        }
    }
    Ok(list)
}

/// Carrier-size cap for [`max_chain_length`].
pub const CHAIN_SEARCH_CAP: usize = 256;

/// Length of the longest chain of subgroups of `Add H`.
pub fn max_chain_length(alg: &CayleyAlgebra) -> Result<usize, TruthError> {
    if alg.size() > CHAIN_SEARCH_CAP {
        return Err(TruthError::BudgetExceeded(format!(
            "chain search is capped at {CHAIN_SEARCH_CAP} elements"
        )));
    }
    let mut subs = all_subgroups(alg, 50_000)?;
    subs.sort_by_key(|s| s.len());
    let mut best: Vec<usize> = vec![0; subs.len()];
    for i in 0..subs.len() {
        for j in 0..i {
            if subs[j].len() < subs[i].len() && subs[j].is_subset(&subs[i]) {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    Ok(best.into_iter().max().unwrap_or(0))
}

/// Evaluates every identity over all assignments directly on the tables.
/// Returns the first violated identity and assignment, in row-major order.
pub fn first_violation(alg: &CayleyAlgebra, identities: &[Identity]) -> Option<(usize, Vec<usize>)> {
    let all: Vec<usize> = alg.elements().collect();
    for (k, id) in identities.iter().enumerate() {
        let mut found = None;
        for_each_tuple(&all, id.var_count() as usize, |assignment| {
            if found.is_some() {
                return;
            }
            let l = alg.eval_term(&id.lhs, assignment).expect("identity matches signature");
            let r = alg.eval_term(&id.rhs, assignment).expect("identity matches signature");
            if l != r {
                found = Some(assignment.to_vec());
            }
        });
        if let Some(a) = found {
            return Some((k, a));
        }
    }
    None
}

/// `H(g)` as an explicit algebra: the group part of `H` with the `Φ(m)`
/// symbols interpreted on the tables.
pub fn derived_algebra(alg: &CayleyAlgebra, g: &[usize]) -> Result<CayleyAlgebra, AlgebraError> {
    let phi = build_phi(alg.signature(), g.len());
    let mut full = Vec::new();
    let derived = CayleyAlgebra::from_fns(
        phi.signature().clone(),
        alg.size(),
        |a, b| alg.add(a, b),
        |a| alg.neg(a),
        alg.zero(),
        |s, args| match &phi.symbols()[s] {
            PhiSymbol::Chi(i) => alg.add(alg.add(alg.neg(g[*i]), args[0]), g[*i]),
            PhiSymbol::Psi { omega, j, d } => {
                full.clear();
                full.extend(d.iter().map(|&x| g[x]));
                full.insert(*j, args[0]);
                alg.omega_op(*omega, &full)
            }
        },
    )?;
    Ok(match alg.labels() {
        Some(l) => derived.with_labels(l.to_vec()),
        None => derived,
    })
}

/// Outcome of an exhaustive lemma check.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaCheck {
    pub cases: u64,
    pub violations: Vec<String>,
}

impl LemmaCheck {
    fn fail(&mut self, msg: String) {
        // a handful of witnesses is enough to debug with
        if self.violations.len() < 16 {
            self.violations.push(msg);
        }
    }
}

/// Carrier-size cap for [`structural_lemmas`], which visits every subset.
pub const SUBSET_SEARCH_CAP: usize = 20;

/// For every subset `S`: `τ(S) = τ(⟨S⟩)`, the `τ` fixpoint equals the
/// saturation closure, `ω(⟨S⟩^{arω}) ⊆ ⟨ω(S^{arω})⟩` for each `ω`, and the
/// fixpoint is reached within `log₂|H| + 1` steps.
pub fn structural_lemmas(alg: &CayleyAlgebra) -> Result<LemmaCheck, TruthError> {
    let size = alg.size();
    if size > SUBSET_SEARCH_CAP {
        return Err(TruthError::BudgetExceeded(format!(
            "subset search is capped at {SUBSET_SEARCH_CAP} elements"
        )));
    }
    let max_steps = (size as f64).log2().floor() as usize + 1;
    let mut out = LemmaCheck::default();
    for mask in 0..(1u64 << size) {
        out.cases += 1;
        let s = ElementSet::from_mask(size, mask);
        let sub = subgroup_closure(alg, &s);
        if tau_step(alg, &s) != tau_step(alg, &sub) {
            out.fail(format!("τ(S) ≠ τ(⟨S⟩) for S = {s:?}"));
        }
        let (closure, steps) = sigma_closure(alg, &s);
        if closure != worklist_closure(alg, &s) {
            out.fail(format!("τ fixpoint ≠ subalgebra closure for S = {s:?}"));
        }
        if steps > max_steps {
            out.fail(format!("{steps} τ steps for S = {s:?}, more than {max_steps}"));
        }
        let s_elems: Vec<usize> = s.iter().collect();
        let sub_elems: Vec<usize> = sub.iter().collect();
        for (w, sym) in alg.signature().omega().iter().enumerate() {
            let mut images = ElementSet::empty(size);
            for_each_tuple(&s_elems, sym.arity, |args| {
                images.insert(alg.omega_op(w, args));
            });
            let span = subgroup_closure(alg, &images);
            let mut ok = true;
            for_each_tuple(&sub_elems, sym.arity, |args| {
                ok &= span.contains(alg.omega_op(w, args));
            });
            if !ok {
                out.fail(format!("{}(⟨S⟩) ⊄ ⟨{}(S)⟩ for S = {s:?}", sym.name, sym.name));
            }
        }
    }
    Ok(out)
}

/// Whether `S` is closed under every unary `Ω` symbol of `alg`.
fn closed_under_unary(alg: &CayleyAlgebra, s: &ElementSet) -> bool {
    (0..alg.signature().omega_len()).all(|w| s.iter().all(|x| s.contains(alg.omega_op(w, &[x]))))
}

/// Compares the ideals of `H` with the `Φ(m)`-subgroups of `H(g)` over all
/// subgroups of `Add H`. When `g` additively generates `H` the two families
/// must coincide; otherwise every ideal must still be a `Φ(m)`-subgroup.
pub fn ideal_correspondence(alg: &CayleyAlgebra, g: &[usize], max_subgroups: usize) -> Result<LemmaCheck, TruthError> {
    let derived = derived_algebra(alg, g).map_err(|e| TruthError::BudgetExceeded(e.to_string()))?;
    let generating = subgroup_closure(alg, &ElementSet::from_indices(alg.size(), g.iter().copied())).is_full();
    let mut out = LemmaCheck::default();
    for s in all_subgroups(alg, max_subgroups)? {
        out.cases += 1;
        let ideal = is_ideal(alg, &s);
        let phi_closed = closed_under_unary(&derived, &s);
        if ideal && !phi_closed {
            out.fail(format!("ideal {s:?} is not a Φ(m)-subgroup"));
        }
        if generating && phi_closed && !ideal {
            out.fail(format!("Φ(m)-subgroup {s:?} is not an ideal"));
        }
    }
    Ok(out)
}
