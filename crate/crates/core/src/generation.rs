//! Random subsums and the additive-generator algorithm.
//!
//! Given a Σ-generating tuple `s` of a black-box distributive expanded group
//! with encoding length `n`, [`run_b`] performs `n` rounds; round `i` draws
//! `kn` random subsums `R_i` of `s_{i-1}` and sets
//! `s_i = R_i ∪ ⋃_ω ω(R_i^{arω})`. The result generates the additive group
//! except with probability at most `n / cⁿ`.

use rand_chacha::rand_core::RngCore;
use thiserror::Error;

use crate::blackbox::{dedup_handles, Handle, Oracle, OracleError};
use crate::signature::Op;

pub type GenSystem = Vec<Handle>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerationError {
    #[error("the constant c must be a finite number greater than 1, got {0}")]
    BadConstant(f64),
    #[error("k = {k} is invalid for c = {c}: need k ≥ 3 and c ≤ e^((1-2/k)²k/4)")]
    BadK { c: f64, k: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `(1 - 2/k)² k / 4`, computed as `(k-2)² / (4k)`.
pub fn k_exponent(k: usize) -> f64 {
    let k = k as f64;
    (k - 2.0) * (k - 2.0) / (4.0 * k)
}

// ln c is compared against the exponent with a little slack so that c given
// as exactly e^{(1-2/k)²k/4} is not rejected over a rounding ulp.
fn k_admits(c: f64, k: usize) -> bool {
    c.ln() <= k_exponent(k) * (1.0 + 1e-12)
}

/// The least `k ≥ 3` with `c ≤ e^{(1-2/k)²k/4}`.
pub fn choose_k(c: f64) -> Result<usize, GenerationError> {
    if !c.is_finite() || c <= 1.0 {
        return Err(GenerationError::BadConstant(c));
    }
    Ok((3..).find(|&k| k_admits(c, k)).expect("exponent grows without bound"))
}

/// Upper bound on the probability that `kl` random subsums fail to generate
/// a group whose subgroup chains have length at most `l`.
pub fn subproduct_bound(k: usize, l: usize) -> f64 {
    (-k_exponent(k) * l as f64).exp()
}

/// `n / cⁿ`.
pub fn b_failure_bound(n: u32, c: f64) -> f64 {
    n as f64 / c.powi(n as i32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BParams {
    pub c: f64,
    pub k: usize,
    /// Treat `R_i` and `S_i` as sets of elements, dropping repeated elements
    /// with equality queries. When off, all `kn` draws and all images are kept.
    pub dedup: bool,
}

impl BParams {
    pub fn new(c: f64) -> Result<Self, GenerationError> {
        Ok(BParams {
            c,
            k: choose_k(c)?,
            dedup: true,
        })
    }

    /// Overrides `k`; it must still satisfy `c ≤ e^{(1-2/k)²k/4}`.
    pub fn with_k(c: f64, k: usize) -> Result<Self, GenerationError> {
        if !c.is_finite() || c <= 1.0 {
            return Err(GenerationError::BadConstant(c));
        }
        if k < 3 || !k_admits(c, k) {
            return Err(GenerationError::BadK { c, k });
        }
        Ok(BParams { c, k, dedup: true })
    }

    pub fn keep_duplicates(mut self) -> Self {
        self.dedup = false;
        self
    }

    /// Subsums drawn per round, `kn`.
    pub fn draws(&self, n: u32) -> usize {
        self.k * n as usize
    }
}

/// Uniform random bits, buffered 64 at a time and handed out one by one.
pub struct CoinStream<R> {
    rng: R,
    buf: u64,
    left: u32,
    consumed: u64,
}

impl<R: RngCore> CoinStream<R> {
    pub fn new(rng: R) -> Self {
        CoinStream {
            rng,
            buf: 0,
            left: 0,
            consumed: 0,
        }
    }

    pub fn bit(&mut self) -> bool {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        self.consumed += 1;
        b
    }

    /// Total bits handed out so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// `b1·g1 + … + bm·gm` for independent uniform bits, summed left to right
/// over the selected entries. Consumes exactly `m` bits; the empty subsum is
/// the answer to a `0` query.
pub fn random_subsum<O: Oracle + ?Sized, R: RngCore>(
    o: &mut O,
    g: &[Handle],
    coins: &mut CoinStream<R>,
) -> Result<Handle, OracleError> {
    let mut acc: Option<Handle> = None;
    for h in g {
        if coins.bit() {
            acc = Some(match acc {
                None => h.clone(),
                Some(a) => o.add(&a, h)?,
            });
        }
    }
    match acc {
        Some(a) => Ok(a),
        None => o.zero(),
    }
}

/// One round of the algorithm as observed by instrumented runs.
#[derive(Debug, Clone)]
pub struct RoundTrace {
    /// `R_i` (after element dedup when enabled).
    pub subsums: Vec<Handle>,
    /// `s_i`.
    pub output: GenSystem,
}

fn contains<O: Oracle + ?Sized>(o: &mut O, set: &[Handle], h: &Handle) -> Result<bool, OracleError> {
    for x in set {
        if o.query_equal(x, h)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `ω(R^{arω})` for every `ω` in signature order, tuples in lexicographic order.
fn omega_images<O: Oracle + ?Sized>(o: &mut O, r: &[Handle]) -> Result<Vec<Handle>, OracleError> {
    let arities = o.omega_arities().to_vec();
    let mut out = Vec::new();
    for (w, &arity) in arities.iter().enumerate() {
        if arity > 0 && r.is_empty() {
            continue;
        }
        let mut idx = vec![0usize; arity];
        let mut args: Vec<Handle> = Vec::with_capacity(arity);
        loop {
            args.clear();
            args.extend(idx.iter().map(|&i| r[i].clone()));
            out.push(o.query_op(Op::Omega(w), &args)?);
            let mut pos = arity;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < r.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(out)
}

fn round<O: Oracle + ?Sized, R: RngCore>(
    o: &mut O,
    prev: &[Handle],
    draws: usize,
    dedup: bool,
    coins: &mut CoinStream<R>,
) -> Result<RoundTrace, OracleError> {
    let mut subsums = Vec::with_capacity(draws);
    for _ in 0..draws {
        subsums.push(random_subsum(o, prev, coins)?);
    }
    if dedup {
        subsums = dedup_handles(o, subsums)?;
    }
    let images = omega_images(o, &subsums)?;
    let mut output = subsums.clone();
    if dedup {
        for h in images {
            if !contains(o, &output, &h)? {
                output.push(h);
            }
        }
    } else {
        output.extend(images);
    }
    Ok(RoundTrace { subsums, output })
}

/// Runs the additive-generator algorithm on input `(1ⁿ, s)`, recording each round.
pub fn run_b_traced<O: Oracle + ?Sized, R: RngCore>(
    o: &mut O,
    n: u32,
    s: &[Handle],
    params: &BParams,
    coins: &mut CoinStream<R>,
) -> Result<Vec<RoundTrace>, OracleError> {
    let mut rounds: Vec<RoundTrace> = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let prev = rounds.last().map_or(s, |r| r.output.as_slice());
        let next = round(o, prev, params.draws(n), params.dedup, coins)?;
        rounds.push(next);
    }
    Ok(rounds)
}

/// Runs the additive-generator algorithm on input `(1ⁿ, s)` and returns `s_n`.
pub fn run_b<O: Oracle + ?Sized, R: RngCore>(
    o: &mut O,
    n: u32,
    s: &[Handle],
    params: &BParams,
    coins: &mut CoinStream<R>,
) -> Result<GenSystem, OracleError> {
    let mut cur: GenSystem = s.to_vec();
    for _ in 0..n {
        cur = round(o, &cur, params.draws(n), params.dedup, coins)?.output;
    }
    Ok(cur)
}

/// Runs [`run_b`] `repeats` times and concatenates the outputs; the failure
/// probability becomes at most `(n / cⁿ)^repeats`.
pub fn run_b_repeated<O: Oracle + ?Sized, R: RngCore>(
    o: &mut O,
    n: u32,
    s: &[Handle],
    params: &BParams,
    repeats: usize,
    coins: &mut CoinStream<R>,
) -> Result<GenSystem, OracleError> {
    let mut out = Vec::new();
    for _ in 0..repeats {
        out.extend(run_b(o, n, s, params, coins)?);
    }
    Ok(out)
}

/// `kn` independent random subsums of `g`. They generate the same subgroup as
/// `g` except with probability at most `e^{-(1-2/k)²kn/4} ≤ c⁻ⁿ`.
pub fn reduce_generators<O: Oracle + ?Sized, R: RngCore>(
    o: &mut O,
    n: u32,
    g: &[Handle],
    params: &BParams,
    coins: &mut CoinStream<R>,
) -> Result<GenSystem, OracleError> {
    (0..params.draws(n)).map(|_| random_subsum(o, g, coins)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_family, CayleyAlgebra, Family};
    use crate::blackbox::OracleSession;
    use crate::truth::{subgroup_closure, ElementSet};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coins(seed: u64) -> CoinStream<ChaCha8Rng> {
        CoinStream::new(ChaCha8Rng::seed_from_u64(seed))
    }

    fn alg(f: Family) -> CayleyAlgebra {
        build_family(&f).unwrap()
    }

    /// The defining inequality evaluated straight from the formula.
    fn admits_direct(c: f64, k: usize) -> bool {
        let k = k as f64;
        c <= ((1.0 - 2.0 / k).powi(2) * k / 4.0).exp() * (1.0 + 1e-12)
    }

    #[test]
    fn choose_k_examples() {
        assert_eq!(choose_k((1.0f64 / 12.0).exp()).unwrap(), 3);
        assert_eq!(choose_k(2.0).unwrap(), 7);
        assert_eq!(choose_k(1.0001).unwrap(), 3);
        assert!(matches!(choose_k(1.0), Err(GenerationError::BadConstant(_))));
        assert!(matches!(choose_k(f64::NAN), Err(GenerationError::BadConstant(_))));
        // k = 6 falls short of 2, k = 7 clears it
        assert!(!admits_direct(2.0, 6));
        assert!(admits_direct(2.0, 7));
    }

    #[test]
    fn choose_k_is_least_admissible() {
        for c in [1.01, 1.1, 1.5, 2.0, 3.0, 10.0, 100.0] {
            let k = choose_k(c).unwrap();
            assert!(admits_direct(c, k));
            assert!((3..k).all(|j| !admits_direct(c, j)), "c = {c}");
        }
    }

    #[test]
    fn k_override() {
        assert!(BParams::with_k(2.0, 9).is_ok());
        assert!(matches!(BParams::with_k(2.0, 5), Err(GenerationError::BadK { .. })));
        assert!(matches!(BParams::with_k(1.05, 2), Err(GenerationError::BadK { .. })));
    }

    #[test]
    fn bound_values() {
        // Z8 with k = 7: e^{-(5/7)²·21/4}
        let b = subproduct_bound(7, 3);
        assert!((b - (-(25.0 / 49.0) * 21.0 / 4.0f64).exp()).abs() < 1e-15);
        assert!((b - 0.068_63).abs() < 1e-4);
        assert_eq!(b_failure_bound(8, 2.0), 8.0 / 256.0);
    }

    #[test]
    fn empty_subsum_is_zero() {
        let z6 = alg(Family::RingModN { n: 6, unital: false });
        let mut o = OracleSession::new(&z6, 3, 1).unwrap();
        let mut c = coins(0);
        let h = random_subsum(&mut o, &[], &mut c).unwrap();
        assert_eq!(o.decode_for_test(&h).unwrap(), 0);
        assert_eq!(c.consumed(), 0);
    }

    #[test]
    fn subsum_consumes_one_bit_per_entry() {
        let z6 = alg(Family::RingModN { n: 6, unital: false });
        let mut o = OracleSession::new(&z6, 3, 1).unwrap();
        let g = o.handles_of(&[1, 2, 3, 4, 5]);
        let mut c = coins(3);
        for _ in 0..7 {
            random_subsum(&mut o, &g, &mut c).unwrap();
        }
        assert_eq!(c.consumed(), 35);
    }

    #[test]
    fn subsum_frequencies() {
        let z2 = alg(Family::Cyclic { n: 2 });
        let mut o = OracleSession::new(&z2, 4, 2).unwrap();
        let g = o.handles_of(&[1]);
        let mut c = coins(11);
        let trials = 20_000;
        let ones = (0..trials)
            .filter(|_| {
                let h = random_subsum(&mut o, &g, &mut c).unwrap();
                o.decode_for_test(&h).unwrap() == 1
            })
            .count();
        assert!((ones as f64 / trials as f64 - 0.5).abs() < 0.02);

        // (a, a): 0, a, 2a with probabilities 1/4, 1/2, 1/4
        let z5 = alg(Family::Cyclic { n: 5 });
        let mut o = OracleSession::new(&z5, 4, 2).unwrap();
        let g = o.handles_of(&[2, 2]);
        let mut hist = [0usize; 5];
        for _ in 0..trials {
            let h = random_subsum(&mut o, &g, &mut c).unwrap();
            hist[o.decode_for_test(&h).unwrap()] += 1;
        }
        let f = |i: usize| hist[i] as f64 / trials as f64;
        assert!((f(0) - 0.25).abs() < 0.02);
        assert!((f(2) - 0.5).abs() < 0.02);
        assert!((f(4) - 0.25).abs() < 0.02);
        assert_eq!(hist[1] + hist[3], 0);
    }

    fn additively_generates(o: &OracleSession, out: &[Handle]) -> bool {
        let alg = o.algebra();
        let idx = o.decode_all(out).unwrap();
        subgroup_closure(alg, &ElementSet::from_indices(alg.size(), idx)).is_full()
    }

    #[test]
    fn b_on_z6_ring() {
        let z6 = alg(Family::RingModN { n: 6, unital: false });
        let mut failures = 0;
        for seed in 0..200 {
            let mut o = OracleSession::new(&z6, 5, seed).unwrap();
            let s = o.handles_of(&[1]);
            let params = BParams::new(2.0).unwrap();
            let out = run_b(&mut o, 8, &s, &params, &mut coins(seed)).unwrap();
            if !additively_generates(&o, &out) {
                failures += 1;
            }
        }
        assert!(failures <= 2, "{failures} failures");
    }

    #[test]
    fn b_on_trivial_algebra() {
        let one = alg(Family::RingModN { n: 1, unital: false });
        let mut o = OracleSession::new(&one, 0, 0).unwrap();
        assert_eq!(o.encoding_len(), 1);
        let params = BParams::new(2.0).unwrap();
        let out = run_b(&mut o, 1, &[], &params, &mut coins(0)).unwrap();
        assert!(additively_generates(&o, &out));
    }

    #[test]
    fn b_with_zero_rounds_returns_input() {
        let z6 = alg(Family::RingModN { n: 6, unital: false });
        let mut o = OracleSession::new(&z6, 0, 0).unwrap();
        let s = o.handles_of(&[2, 3]);
        let out = run_b(&mut o, 0, &s, &BParams::new(2.0).unwrap(), &mut coins(0)).unwrap();
        assert_eq!(o.decode_all(&out).unwrap(), vec![2, 3]);
        assert_eq!(o.counts().total_operations(), 0);
    }

    #[test]
    fn nullary_symbols_enter_in_round_one() {
        let z6u = alg(Family::RingModN { n: 6, unital: true });
        let mut o = OracleSession::new(&z6u, 0, 0).unwrap();
        let trace = run_b_traced(&mut o, 3, &[], &BParams::new(2.0).unwrap(), &mut coins(5)).unwrap();
        let first = o.decode_all(&trace[0].output).unwrap();
        assert!(first.contains(&1));
        assert!(additively_generates(&o, &trace[2].output));
    }

    #[test]
    fn output_length_bounds() {
        let m2 = alg(Family::MatrixRing {
            k: 2,
            p: 2,
            unital: false,
        });
        let e11 = m2.element_by_label("1 0;0 0").unwrap();
        let swap = m2.element_by_label("0 1;1 0").unwrap();
        for params in [BParams::new(2.0).unwrap(), BParams::new(2.0).unwrap().keep_duplicates()] {
            let mut o = OracleSession::new(&m2, 4, 1).unwrap();
            let s = o.handles_of(&[e11, swap]);
            let n = 8;
            let kn = params.draws(n);
            let out = run_b(&mut o, n, &s, &params, &mut coins(1)).unwrap();
            assert!(out.len() <= kn + kn * kn);
            if params.dedup {
                assert!(out.len() <= 16);
            } else {
                assert_eq!(out.len(), kn + kn * kn);
            }
            assert!(additively_generates(&o, &out));
        }
    }

    #[test]
    fn reduce_generators_examples() {
        let z6 = alg(Family::Cyclic { n: 6 });
        let params = BParams::new(2.0).unwrap();
        let mut o = OracleSession::new(&z6, 5, 0).unwrap();
        let idx: Vec<usize> = (0..500).map(|i| (i * 7 + 3) % 6).collect();
        let g = o.handles_of(&idx);
        let out = reduce_generators(&mut o, 8, &g, &params, &mut coins(2)).unwrap();
        assert_eq!(out.len(), 56);
        assert!(additively_generates(&o, &out));

        let empty = reduce_generators(&mut o, 8, &[], &params, &mut coins(2)).unwrap();
        assert_eq!(empty.len(), 56);
        assert!(o.decode_all(&empty).unwrap().iter().all(|&x| x == 0));
    }

    #[test]
    fn repeated_runs_concatenate() {
        let z6 = alg(Family::RingModN { n: 6, unital: false });
        let mut o = OracleSession::new(&z6, 2, 0).unwrap();
        let s = o.handles_of(&[1]);
        let params = BParams::new(2.0).unwrap();
        let single = run_b(&mut o, 5, &s, &params, &mut coins(4)).unwrap();
        let triple = run_b_repeated(&mut o, 5, &s, &params, 3, &mut coins(4)).unwrap();
        assert_eq!(
            o.decode_all(&triple[..single.len()]).unwrap(),
            o.decode_all(&single).unwrap()
        );
        assert!(triple.len() >= single.len());
    }
}
