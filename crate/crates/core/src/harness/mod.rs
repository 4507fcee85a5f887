//! Seeded Monte Carlo experiments comparing empirical failure rates with the
//! proven bounds, plus the input file formats they read.
//!
//! Trial `i` of a run with seed `s` draws oracle salts from stream `2i` and
//! algorithm coins from stream `2i + 1` of a ChaCha8 generator seeded with
//! `s`, so the salt width never changes which coins an algorithm sees.

pub mod sexpr;
pub mod spec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::blackbox::{Oracle, OracleError, OracleSession};
use crate::generation::{
    b_failure_bound, k_exponent, random_subsum, run_b, subproduct_bound, BParams, CoinStream, GenerationError,
};
use crate::ideal::run_c;
use crate::truth::{
    additive_generating_set, first_violation, ideal_closure, max_chain_length, sigma_closure, subgroup_closure,
    ElementSet, TruthError,
};
use crate::variety::{run_d, IdentityBasis, VarietyError};

pub use sexpr::{parse_term, TermParseError};
pub use spec::{load_algebra, load_basis, AlgebraSpec, BasisSpec, ElementRef, LoadedAlgebra, SpecError};

/// Salt bits used when neither the command line nor the spec sets them.
pub const DEFAULT_SALT_BITS: u32 = 4;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error(transparent)]
    Truth(#[from] TruthError),
}

impl HarnessError {
    /// Whether the error is the caller's fault (bad flags, files, or basis).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            HarnessError::Spec(_)
                | HarnessError::Usage(_)
                | HarnessError::Generation(GenerationError::BadConstant(_) | GenerationError::BadK { .. })
                | HarnessError::Variety(VarietyError::NonNilpotentBasis(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub c: f64,
    pub k: Option<usize>,
    /// Overrides the spec's `saltBits`.
    pub salt_bits: Option<u32>,
    pub trials: u64,
    pub seed: u64,
    /// Post-reduce ideal generators to `kn` random subsums.
    pub reduce: bool,
    /// Keep repeated elements in `R_i` and `S_i`.
    pub keep_duplicates: bool,
    /// Rounds parameter; at least the encoding length. Defaults to it.
    pub n: Option<u32>,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            c: 2.0,
            k: None,
            salt_bits: None,
            trials: 1000,
            seed: 0,
            reduce: false,
            keep_duplicates: false,
            n: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct QueryStats {
    pub equality_mean: f64,
    pub equality_max: u64,
    pub operation_mean: f64,
    pub operation_max: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentReport {
    pub command: String,
    pub algebra: String,
    pub size: usize,
    pub seed: u64,
    pub trials: u64,
    pub salt_bits: u32,
    pub n: u32,
    pub c: f64,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduce: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub member_answers: Option<u64>,
    pub successes: u64,
    pub failures: u64,
    pub empirical_failure_rate: f64,
    pub bound_formula: String,
    pub paper_bound: f64,
    /// `paperBound + 3σ` with `σ` the binomial deviation at the bound.
    pub threshold: f64,
    pub bound_satisfied: bool,
    pub membership_violations: u64,
    pub queries: QueryStats,
    /// One character per trial: `1` success, `0` failure.
    pub trial_outcomes: String,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// One-sided acceptance threshold `p + 3·sqrt(p(1-p)/trials)`, with `p` clamped to `[0, 1]`.
pub fn three_sigma_threshold(bound: f64, trials: u64) -> f64 {
    let p = bound.clamp(0.0, 1.0);
    if trials == 0 {
        return p;
    }
    p + 3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Salt and coin generators for one trial.
pub fn trial_streams(seed: u64, trial: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut salts = ChaCha8Rng::seed_from_u64(seed);
    salts.set_stream(2 * trial);
    let mut coins = ChaCha8Rng::seed_from_u64(seed);
    coins.set_stream(2 * trial + 1);
    (salts, coins)
}

#[derive(Debug, Clone, Default)]
struct TrialResult {
    success: bool,
    escaped: bool,
    equality: u64,
    operations: u64,
    m: usize,
    answer: bool,
}

fn run_trials<F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<TrialResult>, HarnessError>
where
    F: Fn(u64) -> Result<TrialResult, HarnessError> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let go = || (0..cfg.trials).into_par_iter().map(&f).collect::<Result<Vec<_>, _>>();
        match cfg.threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| HarnessError::Usage(format!("cannot start {t} threads: {e}")))?
                .install(go),
            None => go(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..cfg.trials).map(f).collect()
    }
}

struct Setup {
    salt_bits: u32,
    n: u32,
    params: BParams,
}

fn setup(alg: &LoadedAlgebra, cfg: &ExperimentConfig) -> Result<Setup, HarnessError> {
    let salt_bits = cfg.salt_bits.or(alg.salt_bits).unwrap_or(DEFAULT_SALT_BITS);
    let len = OracleSession::new(&alg.alg, salt_bits, 0)?.encoding_len();
    let n = cfg.n.unwrap_or(len);
    if n < len {
        return Err(HarnessError::Usage(format!(
            "--n {n} is below the encoding length {len}"
        )));
    }
    let mut params = match cfg.k {
        Some(k) => BParams::with_k(cfg.c, k)?,
        None => BParams::new(cfg.c)?,
    };
    params.dedup = !cfg.keep_duplicates;
    Ok(Setup { salt_bits, n, params })
}

struct Summary {
    successes: u64,
    failures: u64,
    membership_violations: u64,
    member_answers: u64,
    m: usize,
    queries: QueryStats,
    outcomes: String,
}

fn summarize(results: &[TrialResult]) -> Summary {
    let trials = results.len().max(1) as f64;
    let successes = results.iter().filter(|r| r.success).count() as u64;
    Summary {
        successes,
        failures: results.len() as u64 - successes,
        membership_violations: results.iter().filter(|r| r.escaped).count() as u64,
        member_answers: results.iter().filter(|r| r.answer).count() as u64,
        m: results.iter().map(|r| r.m).max().unwrap_or(0),
        queries: QueryStats {
            equality_mean: results.iter().map(|r| r.equality as f64).sum::<f64>() / trials,
            equality_max: results.iter().map(|r| r.equality).max().unwrap_or(0),
            operation_mean: results.iter().map(|r| r.operations as f64).sum::<f64>() / trials,
            operation_max: results.iter().map(|r| r.operations).max().unwrap_or(0),
        },
        outcomes: results.iter().map(|r| if r.success { '1' } else { '0' }).collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn report(
    command: &str,
    alg: &LoadedAlgebra,
    cfg: &ExperimentConfig,
    salt_bits: u32,
    n: u32,
    k: usize,
    formula: &str,
    bound: f64,
    s: Summary,
) -> ExperimentReport {
    let rate = if cfg.trials == 0 {
        0.0
    } else {
        s.failures as f64 / cfg.trials as f64
    };
    let threshold = three_sigma_threshold(bound, cfg.trials);
    ExperimentReport {
        command: command.into(),
        algebra: alg.name.clone(),
        size: alg.alg.size(),
        seed: cfg.seed,
        trials: cfg.trials,
        salt_bits,
        n,
        c: cfg.c,
        k,
        m: None,
        l: None,
        reduce: None,
        basis: None,
        ground_truth: None,
        member_answers: None,
        successes: s.successes,
        failures: s.failures,
        empirical_failure_rate: rate,
        bound_formula: formula.into(),
        paper_bound: bound,
        threshold,
        bound_satisfied: rate <= threshold && s.membership_violations == 0,
        membership_violations: s.membership_violations,
        queries: s.queries,
        trial_outcomes: s.outcomes,
    }
}

fn session_for<'a>(
    alg: &'a LoadedAlgebra,
    salt_bits: u32,
    seed: u64,
    trial: u64,
) -> Result<(OracleSession<'a>, CoinStream<ChaCha8Rng>), HarnessError> {
    let (salts, coins) = trial_streams(seed, trial);
    Ok((
        OracleSession::with_rng(&alg.alg, salt_bits, salts)?,
        CoinStream::new(coins),
    ))
}

fn tally(o: &OracleSession<'_>, mut r: TrialResult) -> TrialResult {
    r.equality = o.counts().equality;
    r.operations = o.counts().total_operations();
    r
}

/// Runs the additive-generator algorithm from the spec's generators and
/// checks each output against the additive closure.
pub fn cmd_gen_additive(alg: &LoadedAlgebra, cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let Setup { salt_bits, n, params } = setup(alg, cfg)?;
    let h = &alg.alg;
    let reachable = sigma_closure(h, &ElementSet::from_indices(h.size(), alg.generators.iter().copied())).0;
    let results = run_trials(cfg, |trial| {
        let (mut o, mut coins) = session_for(alg, salt_bits, cfg.seed, trial)?;
        let s = o.handles_of(&alg.generators);
        let out = run_b(&mut o, n, &s, &params, &mut coins)?;
        let idx = o.decode_all(&out)?;
        let r = TrialResult {
            escaped: idx.iter().any(|&x| !reachable.contains(x)),
            success: subgroup_closure(h, &ElementSet::from_indices(h.size(), idx)).is_full(),
            m: out.len(),
            ..Default::default()
        };
        Ok(tally(&o, r))
    })?;
    let s = summarize(&results);
    let mut rep = report(
        "gen-additive",
        alg,
        cfg,
        salt_bits,
        n,
        params.k,
        "n/c^n",
        b_failure_bound(n, cfg.c),
        s,
    );
    rep.m = Some(results.iter().map(|r| r.m).max().unwrap_or(0));
    Ok(rep)
}

/// Runs the ideal-generator algorithm for `t` and checks each output against
/// the brute-force ideal closure.
pub fn cmd_gen_ideal(
    alg: &LoadedAlgebra,
    t: &[usize],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, HarnessError> {
    let Setup { salt_bits, n, params } = setup(alg, cfg)?;
    let h = &alg.alg;
    let target = ideal_closure(h, &ElementSet::from_indices(h.size(), t.iter().copied()));
    let results = run_trials(cfg, |trial| {
        let (mut o, mut coins) = session_for(alg, salt_bits, cfg.seed, trial)?;
        let s = o.handles_of(&alg.generators);
        let th = o.handles_of(t);
        let out = run_c(&mut o, h.signature(), n, &s, &th, &params, cfg.reduce, &mut coins)?;
        let idx = o.decode_all(&out.output)?;
        let r = TrialResult {
            escaped: idx.iter().any(|&x| !target.contains(x)),
            success: subgroup_closure(h, &ElementSet::from_indices(h.size(), idx)) == target,
            m: out.m,
            ..Default::default()
        };
        Ok(tally(&o, r))
    })?;
    let s = summarize(&results);
    let m = s.m;
    let mut rep = report(
        "gen-ideal",
        alg,
        cfg,
        salt_bits,
        n,
        params.k,
        "2n/c^n",
        2.0 * b_failure_bound(n, cfg.c),
        s,
    );
    rep.m = Some(m);
    rep.reduce = Some(cfg.reduce);
    Ok(rep)
}

/// Runs the membership algorithm and compares each answer with direct
/// evaluation of the basis on the tables.
pub fn cmd_decide_variety(
    alg: &LoadedAlgebra,
    basis: &IdentityBasis,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, HarnessError> {
    if !basis.requires_nilpotent_additive {
        return Err(VarietyError::NonNilpotentBasis(basis.name.clone()).into());
    }
    let Setup { salt_bits, n, params } = setup(alg, cfg)?;
    let h = &alg.alg;
    let truth = first_violation(h, &basis.identities).is_none();
    let results = run_trials(cfg, |trial| {
        let (mut o, mut coins) = session_for(alg, salt_bits, cfg.seed, trial)?;
        let s = o.handles_of(&alg.generators);
        let out = run_d(&mut o, n, &s, basis, &params, &mut coins)?;
        let r = TrialResult {
            success: out.member == truth,
            answer: out.member,
            m: out.enumerated,
            ..Default::default()
        };
        Ok(tally(&o, r))
    })?;
    let s = summarize(&results);
    let answers = s.member_answers;
    let mut rep = report(
        "decide-variety",
        alg,
        cfg,
        salt_bits,
        n,
        params.k,
        "n/c^n",
        b_failure_bound(n, cfg.c),
        s,
    );
    rep.basis = Some(basis.name.clone());
    rep.ground_truth = Some(truth);
    rep.member_answers = Some(answers);
    Ok(rep)
}

/// Draws `kl` random subsums of an additive generating set of `H` per trial,
/// `l` the longest subgroup chain, and counts the draws that fail to generate.
/// Only `k ≥ 3` is required here; `c` plays no role.
pub fn cmd_subproduct_bound(alg: &LoadedAlgebra, cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let h = &alg.alg;
    let k = match cfg.k {
        Some(k) if k >= 3 => k,
        Some(k) => return Err(HarnessError::Usage(format!("k must be at least 3, got {k}"))),
        None => BParams::new(cfg.c)?.k,
    };
    let salt_bits = cfg.salt_bits.or(alg.salt_bits).unwrap_or(DEFAULT_SALT_BITS);
    let l = max_chain_length(h)?;
    let spans = subgroup_closure(h, &ElementSet::from_indices(h.size(), alg.generators.iter().copied())).is_full();
    let gens = if spans {
        alg.generators.clone()
    } else {
        additive_generating_set(h)
    };
    let results = run_trials(cfg, |trial| {
        let (mut o, mut coins) = session_for(alg, salt_bits, cfg.seed, trial)?;
        let g = o.handles_of(&gens);
        let mut idx = Vec::with_capacity(k * l);
        for _ in 0..k * l {
            let hsum = random_subsum(&mut o, &g, &mut coins)?;
            idx.push(o.decode_for_test(&hsum)?);
        }
        let r = TrialResult {
            success: subgroup_closure(h, &ElementSet::from_indices(h.size(), idx)).is_full(),
            m: gens.len(),
            ..Default::default()
        };
        Ok(tally(&o, r))
    })?;
    let s = summarize(&results);
    let n = OracleSession::new(h, salt_bits, 0)?.encoding_len();
    let mut rep = report(
        "subproduct-bound",
        alg,
        cfg,
        salt_bits,
        n,
        k,
        "exp(-(1-2/k)^2*k*l/4)",
        subproduct_bound(k, l),
        s,
    );
    rep.m = Some(gens.len());
    rep.l = Some(l);
    Ok(rep)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct ChooseKReport {
    pub c: f64,
    pub k: usize,
    /// `(1-2/k)²k/4`; `c ≤ e^exponent`.
    pub exponent: f64,
    pub exp_bound: f64,
}

impl ChooseKReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

pub fn cmd_choose_k(c: f64) -> Result<ChooseKReport, HarnessError> {
    let k = crate::generation::choose_k(c)?;
    Ok(ChooseKReport {
        c,
        k,
        exponent: k_exponent(k),
        exp_bound: k_exponent(k).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn algebra(text: &str) -> LoadedAlgebra {
        load_algebra(text).unwrap()
    }

    fn cfg(trials: u64) -> ExperimentConfig {
        ExperimentConfig {
            trials,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn threshold_formula() {
        let p = 8.0 / 256.0;
        let t = three_sigma_threshold(p, 10_000);
        assert!((t - (p + 3.0 * (p * (1.0 - p) / 1e4).sqrt())).abs() < 1e-15);
        assert_eq!(three_sigma_threshold(2.0, 10), 1.0);
        assert_eq!(three_sigma_threshold(0.0, 10), 0.0);
    }

    #[test]
    fn additive_report() {
        let a = algebra(r#"{"family": {"name": "ring_mod_n", "n": 6}, "saltBits": 5, "generators": [1]}"#);
        let r = cmd_gen_additive(&a, &cfg(200)).unwrap();
        assert_eq!(r.n, 8);
        assert_eq!(r.k, 7);
        assert_eq!(r.paper_bound, 8.0 / 256.0);
        assert_eq!(r.trial_outcomes.len(), 200);
        assert_eq!(r.successes + r.failures, 200);
        assert_eq!(r.membership_violations, 0);
        assert!(r.bound_satisfied);
        assert!(r.queries.operation_max > 0);
    }

    #[test]
    fn reports_are_reproducible() {
        let a = algebra(r#"{"family": {"name": "dihedral", "n": 4}, "saltBits": 5}"#);
        let one = cmd_gen_additive(&a, &cfg(50)).unwrap().to_json();
        let two = cmd_gen_additive(&a, &cfg(50)).unwrap().to_json();
        assert_eq!(one, two);
        let mut other = cfg(50);
        other.threads = Some(1);
        assert_eq!(one, cmd_gen_additive(&a, &other).unwrap().to_json());
    }

    #[test]
    fn trivial_algebra_never_fails() {
        let a = algebra(r#"{"family": {"name": "cyclic", "n": 1}}"#);
        assert_eq!(cmd_gen_additive(&a, &cfg(50)).unwrap().failures, 0);
        assert_eq!(cmd_subproduct_bound(&a, &cfg(50)).unwrap().failures, 0);
        assert_eq!(cmd_gen_ideal(&a, &[], &cfg(20)).unwrap().failures, 0);
    }

    #[test]
    fn ideal_and_variety_reports() {
        let ut = algebra(r#"{"family": {"name": "upper_triangular", "k": 2, "p": 2}, "idealGenerators": ["0 1;0 0"]}"#);
        let t = ut.ideal_generators.clone().unwrap();
        let r = cmd_gen_ideal(&ut, &t, &cfg(50)).unwrap();
        assert_eq!(r.membership_violations, 0);
        assert!(r.bound_satisfied);
        assert_eq!(r.paper_bound, 2.0 * 7.0 / 128.0);

        let z6 = algebra(r#"{"family": {"name": "ring_mod_n", "n": 6}}"#);
        let basis = load_basis(r#"{"builtin": "commutative-rings"}"#, &z6).unwrap();
        let r = cmd_decide_variety(&z6, &basis, &cfg(30)).unwrap();
        assert_eq!(r.ground_truth, Some(true));
        assert_eq!(r.member_answers, Some(30));
        let mut bad = basis.clone();
        bad.requires_nilpotent_additive = false;
        let e = cmd_decide_variety(&z6, &bad, &cfg(30)).unwrap_err();
        assert!(e.is_usage());
    }

    #[test]
    fn subproduct_report() {
        let z8 = algebra(r#"{"family": {"name": "cyclic", "n": 8}}"#);
        let mut c = cfg(2000);
        c.k = Some(7);
        let r = cmd_subproduct_bound(&z8, &c).unwrap();
        assert_eq!(r.l, Some(3));
        assert!((r.paper_bound - (-(25.0f64 / 49.0) * 21.0 / 4.0).exp()).abs() < 1e-15);
        assert!(r.bound_satisfied);
        c.k = Some(2);
        assert!(cmd_subproduct_bound(&z8, &c).unwrap_err().is_usage());
    }

    #[test]
    fn n_below_encoding_length_is_rejected() {
        let a = algebra(r#"{"family": {"name": "cyclic", "n": 6}}"#);
        let mut c = cfg(1);
        c.n = Some(3);
        assert!(cmd_gen_additive(&a, &c).unwrap_err().is_usage());
    }
}
