//! Variety membership for black-box algebras.
//!
//! [`run_d`] obtains additive generators with the additive-generator
//! algorithm, enumerates the whole algebra from them, and evaluates every
//! identity of a finite basis on every assignment through oracle queries.
//! The enumeration stands in for a polynomial-time membership test: it is
//! exponential in `n` but polynomial in `|H|`, and keeps the same one-sided
//! error structure (a wrong answer needs the generator step to fail).

use rand_chacha::rand_core::RngCore;
use thiserror::Error;

use crate::algebra::{module_basis_identities, IntPoly};
use crate::blackbox::{Handle, Oracle, OracleError};
use crate::generation::{run_b, BParams, CoinStream};
use crate::signature::{Identity, Op, Term, TermError};

/// Default bound on enumerated elements.
pub const DEFAULT_ELEMENT_CAP: usize = 4096;
/// Default bound on assignments examined per identity.
pub const DEFAULT_ASSIGNMENT_CAP: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VarietyError {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("basis `{0}` is not marked as defining a variety with nilpotent additive groups")]
    NonNilpotentBasis(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityBasis {
    pub name: String,
    pub identities: Vec<Identity>,
    /// Asserted, not verified: every additive group in the variety is nilpotent.
    pub requires_nilpotent_additive: bool,
}

fn x(i: u32) -> Term {
    Term::var(i)
}

/// `a + b - a - b`, left-associated.
fn commutator(a: Term, b: Term) -> Term {
    Term::sum([a.clone(), b.clone(), Term::neg(a), Term::neg(b)])
}

fn abelian_law() -> Identity {
    Identity::new(Term::add(x(1), x(2)), Term::add(x(2), x(1)))
}

impl IdentityBasis {
    /// Abelian groups: `x1 + x2 = x2 + x1`.
    pub fn abelian() -> Self {
        IdentityBasis {
            name: "abelian".into(),
            identities: vec![abelian_law()],
            requires_nilpotent_additive: true,
        }
    }

    /// Nilpotent of class at most 2: `[[x1, x2], x3] = 0`.
    pub fn nilpotent_class_2() -> Self {
        let law = commutator(commutator(x(1), x(2)), x(3));
        IdentityBasis {
            name: "nilpotent-class-2".into(),
            identities: vec![Identity::new(law, Term::zero())],
            requires_nilpotent_additive: true,
        }
    }

    /// Commutative rings (not necessarily unital) for the binary symbol `mul`.
    pub fn commutative_rings(mul: Op) -> Self {
        let m = |a: Term, b: Term| Term::App(mul, vec![a, b]);
        IdentityBasis {
            name: "commutative-rings".into(),
            identities: vec![
                abelian_law(),
                Identity::new(m(m(x(1), x(2)), x(3)), m(x(1), m(x(2), x(3)))),
                Identity::new(m(x(1), x(2)), m(x(2), x(1))),
            ],
            requires_nilpotent_additive: true,
        }
    }

    /// Anticommutative: abelian addition and `x1·x2 + x2·x1 = 0`.
    pub fn anticommutative(mul: Op) -> Self {
        let m = |a: Term, b: Term| Term::App(mul, vec![a, b]);
        IdentityBasis {
            name: "anticommutative".into(),
            identities: vec![
                abelian_law(),
                Identity::new(Term::add(m(x(1), x(2)), m(x(2), x(1))), Term::zero()),
            ],
            requires_nilpotent_additive: true,
        }
    }

    /// Modules over `Z[y1, …, ym]/(relations)` with `wi` acting as `yi`.
    pub fn modules(m: usize, relations: &[IntPoly]) -> Self {
        IdentityBasis {
            name: "modules".into(),
            identities: module_basis_identities(m, relations),
            requires_nilpotent_additive: true,
        }
    }
}

/// Every element of the subgroup generated by some handles, each once.
#[derive(Debug, Clone)]
pub struct EnumeratedAlgebra {
    pub elements: Vec<Handle>,
}

impl EnumeratedAlgebra {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn position<O: Oracle + ?Sized>(o: &mut O, set: &[Handle], h: &Handle) -> Result<Option<usize>, OracleError> {
    for (i, x) in set.iter().enumerate() {
        if o.query_equal(x, h)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Breadth-first closure of `{0} ∪ g` under `+` (right multiplication by the
/// generators) and `−`, deduplicated with equality queries. Returns `⟨g⟩`,
/// which is all of `H` exactly when `g` additively generates it.
pub fn enumerate_from_additive_gens<O: Oracle + ?Sized>(
    o: &mut O,
    g: &[Handle],
    cap: usize,
) -> Result<EnumeratedAlgebra, VarietyError> {
    let mut elements = vec![o.zero()?];
    let mut gens: Vec<Handle> = Vec::new();
    for h in g {
        if position(o, &elements, h)?.is_none() {
            elements.push(h.clone());
            gens.push(h.clone());
        }
    }
    let mut next = 0;
    while next < elements.len() {
        let cur = elements[next].clone();
        next += 1;
        let mut candidates = Vec::with_capacity(gens.len() + 1);
        for h in &gens {
            candidates.push(o.add(&cur, h)?);
        }
        candidates.push(o.neg(&cur)?);
        for c in candidates {
            if position(o, &elements, &c)?.is_none() {
                if elements.len() == cap {
                    return Err(VarietyError::BudgetExceeded(format!(
                        "more than {cap} elements enumerated"
                    )));
                }
                elements.push(c);
            }
        }
    }
    Ok(EnumeratedAlgebra { elements })
}

/// The first failing identity and assignment found.
#[derive(Debug, Clone)]
pub struct Counterexample {
    /// Index of the identity within the basis.
    pub identity: usize,
    /// Positions in the enumeration assigned to `x1, x2, …`.
    pub assignment: Vec<usize>,
}

fn eval<O: Oracle + ?Sized>(o: &mut O, t: &Term, assignment: &[Handle]) -> Result<Handle, VarietyError> {
    t.eval_with(assignment, &mut |op, args: &[Handle]| -> Result<Handle, VarietyError> {
        Ok(o.query_op(op, args)?)
    })
}

/// Checks every identity on every assignment of enumerated elements, in
/// row-major order (last variable fastest). `Ok(None)` means all hold.
pub fn check_identities<O: Oracle + ?Sized>(
    o: &mut O,
    en: &EnumeratedAlgebra,
    basis: &IdentityBasis,
    assignment_cap: u64,
) -> Result<Option<Counterexample>, VarietyError> {
    let size = en.len();
    for (k, id) in basis.identities.iter().enumerate() {
        let vars = id.var_count();
        let total = (size as u64)
            .checked_pow(vars)
            .filter(|&t| t <= assignment_cap)
            .ok_or_else(|| VarietyError::BudgetExceeded(format!("{size}^{vars} assignments for identity {}", k + 1)))?;
        let mut idx = vec![0usize; vars as usize];
        let mut values: Vec<Handle> = Vec::with_capacity(idx.len());
        for _ in 0..total {
            values.clear();
            values.extend(idx.iter().map(|&i| en.elements[i].clone()));
            let l = eval(o, &id.lhs, &values)?;
            let r = eval(o, &id.rhs, &values)?;
            if !o.query_equal(&l, &r)? {
                return Ok(Some(Counterexample {
                    identity: k,
                    assignment: idx,
                }));
            }
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < size {
                    break;
                }
                *slot = 0;
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub struct DOutcome {
    pub member: bool,
    /// Elements enumerated from the generator step's output.
    pub enumerated: usize,
    pub counterexample: Option<Counterexample>,
}

/// Decides whether the black-box algebra generated by `s` satisfies `basis`;
/// wrong with probability at most `n/cⁿ`.
pub fn run_d<O: Oracle + ?Sized, R: RngCore>(
    o: &mut O,
    n: u32,
    s: &[Handle],
    basis: &IdentityBasis,
    params: &BParams,
    coins: &mut CoinStream<R>,
) -> Result<DOutcome, VarietyError> {
    if !basis.requires_nilpotent_additive {
        return Err(VarietyError::NonNilpotentBasis(basis.name.clone()));
    }
    let g = run_b(o, n, s, params, coins)?;
    let en = enumerate_from_additive_gens(o, &g, DEFAULT_ELEMENT_CAP)?;
    let counterexample = check_identities(o, &en, basis, DEFAULT_ASSIGNMENT_CAP)?;
    Ok(DOutcome {
        member: counterexample.is_none(),
        enumerated: en.len(),
        counterexample,
    })
}
