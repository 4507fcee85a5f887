//! Ideals as subalgebras of a derived expanded group.
//!
//! For an additive generating tuple `g = (g1, …, gm)` of `H`, the derived
//! structure `H(g)` keeps the group part of `H` and replaces `Ω` by the unary
//! symbols of `Φ(m)`:
//!
//! * `χ_i(h) = -g_i + h + g_i`,
//! * `ψ_{ω,j,d}(h) = ω(g_{d1}, …, h, …, g_{d_{arω-1}})` with `h` in position `j`.
//!
//! The ideals of `H` are exactly the `Φ(m)`-subgroups of `H(g)`, so running
//! the additive-generator algorithm over `H(g)` from `t` yields additive
//! generators of the ideal generated by `t`.

use rand_chacha::rand_core::RngCore;

use crate::blackbox::{Handle, Oracle, OracleError, QueryCounts};
use crate::generation::{reduce_generators, run_b, BParams, CoinStream, GenSystem};
use crate::signature::{Op, OperationSymbol, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PhiSymbol {
    /// Conjugation by `g_i` (0-based).
    Chi(usize),
    /// `ω` with `h` in position `j` and `g_{d}` filling the other positions
    /// left to right; all indices 0-based.
    Psi { omega: usize, j: usize, d: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiSignature {
    m: usize,
    symbols: Vec<PhiSymbol>,
    sig: Signature,
}

impl PhiSignature {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn symbols(&self) -> &[PhiSymbol] {
        &self.symbols
    }

    /// `Γ ∪ Φ(m)` as an ordinary signature; `Op::Omega(i)` is `symbols()[i]`.
    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// `m + Σ_{ω nonnullary} arω · m^{arω-1}`.
pub fn phi_symbol_count(omega: &Signature, m: usize) -> usize {
    m + omega
        .arities()
        .iter()
        .filter(|&&a| a > 0)
        .map(|&a| a * m.pow(a as u32 - 1))
        .sum::<usize>()
}

fn symbol_name(omega: &Signature, s: &PhiSymbol) -> String {
    match s {
        PhiSymbol::Chi(i) => format!("chi_{}", i + 1),
        PhiSymbol::Psi { omega: w, j, d } => {
            let d: Vec<String> = d.iter().map(|x| (x + 1).to_string()).collect();
            format!("psi_{}_{}_{}", omega.omega()[*w].name, j + 1, d.join("-"))
        }
    }
}

/// `Φ(m)` for the `Ω` part of `omega`: `χ_1…χ_m`, then for each nonnullary
/// `ω` in signature order, each position `j`, and each `d ∈ {1…m}^{arω-1}` in
/// lexicographic order, `ψ_{ω,j,d}`.
pub fn build_phi(omega: &Signature, m: usize) -> PhiSignature {
    let mut symbols: Vec<PhiSymbol> = (0..m).map(PhiSymbol::Chi).collect();
    for (w, &arity) in omega.arities().iter().enumerate() {
        if arity == 0 {
            continue;
        }
        let rest = arity - 1;
        for j in 0..arity {
            let mut d = vec![0usize; rest];
            if m == 0 && rest > 0 {
                continue;
            }
            loop {
                symbols.push(PhiSymbol::Psi {
                    omega: w,
                    j,
                    d: d.clone(),
                });
                let mut pos = rest;
                while pos > 0 {
                    pos -= 1;
                    d[pos] += 1;
                    if d[pos] < m {
                        break;
                    }
                    d[pos] = 0;
                }
                if d.iter().all(|&x| x == 0) {
                    break;
                }
            }
        }
    }
    // psi names carry `ω`'s name; prefixes keep them apart from each other and from Γ
    let sig = Signature::new(
        symbols
            .iter()
            .map(|s| OperationSymbol::new(symbol_name(omega, s), 1))
            .collect(),
    )
    .expect("derived names are distinct");
    PhiSignature { m, symbols, sig }
}

/// The `(Γ ∪ Φ(m))`-oracle of `H(g)`, answering through a base oracle of `H`
/// over the same encoding. `−g_i` is queried once per derived session.
pub struct DerivedOracle<'o, O: Oracle + ?Sized> {
    base: &'o mut O,
    g: Vec<Handle>,
    neg_g: Vec<Option<Handle>>,
    phi: PhiSignature,
    arities: Vec<usize>,
    counts: QueryCounts,
}

impl<'o, O: Oracle + ?Sized> DerivedOracle<'o, O> {
    pub fn new(base: &'o mut O, g: Vec<Handle>, omega: &Signature) -> Self {
        assert_eq!(
            omega.arities(),
            base.omega_arities(),
            "signature must match the base oracle"
        );
        let phi = build_phi(omega, g.len());
        DerivedOracle {
            base,
            neg_g: vec![None; g.len()],
            g,
            arities: vec![1; phi.len()],
            counts: QueryCounts::new(3 + phi.len()),
            phi,
        }
    }

    pub fn phi(&self) -> &PhiSignature {
        &self.phi
    }

    pub fn base(&self) -> &O {
        self.base
    }

    fn neg_g(&mut self, i: usize) -> Result<Handle, OracleError> {
        if let Some(h) = &self.neg_g[i] {
            return Ok(h.clone());
        }
        let h = self.base.neg(&self.g[i])?;
        self.neg_g[i] = Some(h.clone());
        Ok(h)
    }
}

impl<O: Oracle + ?Sized> Oracle for DerivedOracle<'_, O> {
    fn encoding_len(&self) -> u32 {
        self.base.encoding_len()
    }

    fn omega_arities(&self) -> &[usize] {
        &self.arities
    }

    fn query_equal(&mut self, a: &Handle, b: &Handle) -> Result<bool, OracleError> {
        self.counts.equality += 1;
        self.base.query_equal(a, b)
    }

    fn query_op(&mut self, op: Op, args: &[Handle]) -> Result<Handle, OracleError> {
        let expected = self.arity(op).ok_or(OracleError::UnknownSymbol(op))?;
        if expected != args.len() {
            return Err(OracleError::ArityMismatch {
                op,
                expected,
                got: args.len(),
            });
        }
        let out = match op {
            Op::Add | Op::Neg | Op::Zero => self.base.query_op(op, args)?,
            Op::Omega(s) => match self.phi.symbols[s].clone() {
                PhiSymbol::Chi(i) => {
                    let n = self.neg_g(i)?;
                    let x = self.base.add(&n, &args[0])?;
                    self.base.add(&x, &self.g[i])?
                }
                PhiSymbol::Psi { omega, j, d } => {
                    let mut full: Vec<Handle> = d.iter().map(|&x| self.g[x].clone()).collect();
                    full.insert(j, args[0].clone());
                    self.base.query_op(Op::Omega(omega), &full)?
                }
            },
        };
        self.counts.record(op);
        Ok(out)
    }

    fn counts(&self) -> &QueryCounts {
        &self.counts
    }
}

/// Result of the ideal-generator algorithm.
#[derive(Debug, Clone)]
pub struct COutput {
    /// Length `m` of the additive generating tuple from step (a).
    pub m: usize,
    pub output: GenSystem,
}

/// Additive generators of the ideal generated by `t`: step (a) runs the
/// additive-generator algorithm on `s` to get `g`, step (b) runs it over
/// `Φ(m)` through the derived oracle from `t`. With `reduce`, the result is
/// cut down to `kn` random subsums. Fails with probability at most `2n/cⁿ`.
#[allow(clippy::too_many_arguments)]
pub fn run_c<O: Oracle + ?Sized, R: RngCore>(
    o: &mut O,
    omega: &Signature,
    n: u32,
    s: &[Handle],
    t: &[Handle],
    params: &BParams,
    reduce: bool,
    coins: &mut CoinStream<R>,
) -> Result<COutput, OracleError> {
    let g = run_b(o, n, s, params, coins)?;
    let m = g.len();
    let mut derived = DerivedOracle::new(o, g, omega);
    let mut output = run_b(&mut derived, n, t, params, coins)?;
    if reduce {
        output = reduce_generators(o, n, &output, params, coins)?;
    }
    Ok(COutput { m, output })
}
