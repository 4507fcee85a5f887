//! Operation symbols, signatures, terms over indexed variables, and identities.
//!
//! A signature is always `Γ ∪ Ω`: the fixed group symbols `+` (binary), `-`
//! (unary) and `0` (nullary), plus a finite list of extra symbols `Ω`. Inside
//! terms a symbol is referenced by [`Op`], which for `Ω` symbols is the
//! position in the signature's `omega` list.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Names reserved by the group part of every signature (including the aliases
/// the textual term format accepts).
pub const GAMMA_NAMES: [&str; 6] = ["+", "-", "0", "−", "neg", "zero"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperationSymbol {
    pub name: String,
    pub arity: usize,
}

impl OperationSymbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        OperationSymbol {
            name: name.into(),
            arity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("operation symbol with empty name")]
    EmptyName,
    #[error("duplicate operation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("operation symbol `{0}` collides with a group symbol")]
    GammaCollision(String),
}

/// Reference to a fundamental operation of a signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    Neg,
    Zero,
    /// Index into the signature's `Ω` list.
    Omega(usize),
}

impl Op {
    /// Dense slot used by query counters: `+`, `-`, `0`, then `Ω` in order.
    pub fn slot(self) -> usize {
        match self {
            Op::Add => 0,
            Op::Neg => 1,
            Op::Zero => 2,
            Op::Omega(i) => 3 + i,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<OperationSymbol>", into = "Vec<OperationSymbol>")]
pub struct Signature {
    omega: Vec<OperationSymbol>,
}

impl TryFrom<Vec<OperationSymbol>> for Signature {
    type Error = SignatureError;

    fn try_from(omega: Vec<OperationSymbol>) -> Result<Self, Self::Error> {
        Signature::new(omega)
    }
}

impl From<Signature> for Vec<OperationSymbol> {
    fn from(sig: Signature) -> Self {
        sig.omega
    }
}

/// Checks that `omega` has nonempty unique names disjoint from the group symbols.
pub fn validate_signature(omega: &[OperationSymbol]) -> Result<(), SignatureError> {
    let mut seen = HashSet::new();
    for sym in omega {
        if sym.name.is_empty() {
            return Err(SignatureError::EmptyName);
        }
        if GAMMA_NAMES.contains(&sym.name.as_str()) {
            return Err(SignatureError::GammaCollision(sym.name.clone()));
        }
        if !seen.insert(sym.name.as_str()) {
            return Err(SignatureError::DuplicateSymbol(sym.name.clone()));
        }
    }
    Ok(())
}

impl Signature {
    pub fn new(omega: Vec<OperationSymbol>) -> Result<Self, SignatureError> {
        validate_signature(&omega)?;
        Ok(Signature { omega })
    }

    /// Plain groups: `Ω = ∅`.
    pub fn groups() -> Self {
        Signature { omega: Vec::new() }
    }

    pub fn omega(&self) -> &[OperationSymbol] {
        &self.omega
    }

    pub fn omega_len(&self) -> usize {
        self.omega.len()
    }

    pub fn arities(&self) -> Vec<usize> {
        self.omega.iter().map(|s| s.arity).collect()
    }

    pub fn arity(&self, op: Op) -> Option<usize> {
        match op {
            Op::Add => Some(2),
            Op::Neg => Some(1),
            Op::Zero => Some(0),
            Op::Omega(i) => self.omega.get(i).map(|s| s.arity),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Op> {
        match name {
            "+" => Some(Op::Add),
            "-" | "−" | "neg" => Some(Op::Neg),
            "0" | "zero" => Some(Op::Zero),
            _ => self.omega.iter().position(|s| s.name == name).map(Op::Omega),
        }
    }

    pub fn name(&self, op: Op) -> &str {
        match op {
            Op::Add => "+",
            Op::Neg => "neg",
            Op::Zero => "zero",
            Op::Omega(i) => &self.omega[i].name,
        }
    }

    /// The nullary part `Ω₀`.
    pub fn nullary(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.omega.len()).filter(|&i| self.omega[i].arity == 0)
    }

    /// Number of counter slots an oracle for this signature needs.
    pub fn slot_count(&self) -> usize {
        3 + self.omega.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("variable x{0} is not bound by the assignment")]
    UnboundVariable(u32),
    #[error("term does not match the signature: {0}")]
    SignatureMismatch(String),
}

/// A Σ-term over the variables `x1, x2, …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// Variable `x_i`, with `i ≥ 1`.
    Var(u32),
    App(Op, Vec<Term>),
}

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn var(i: u32) -> Term {
        assert!(i >= 1, "variables are indexed from 1");
        Term::Var(i)
    }

    pub fn zero() -> Term {
        Term::App(Op::Zero, Vec::new())
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::App(Op::Add, vec![a, b])
    }

    pub fn neg(a: Term) -> Term {
        Term::App(Op::Neg, vec![a])
    }

    /// `a - b`, i.e. `a + (-b)`.
    pub fn sub(a: Term, b: Term) -> Term {
        Term::add(a, Term::neg(b))
    }

    pub fn omega(i: usize, args: Vec<Term>) -> Term {
        Term::App(Op::Omega(i), args)
    }

    /// Left-associated sum `((t1 + t2) + …) + tk`; `0` when empty.
    pub fn sum(terms: impl IntoIterator<Item = Term>) -> Term {
        terms.into_iter().reduce(Term::add).unwrap_or_else(Term::zero)
    }

    pub fn variables(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        match self {
            Term::Var(i) => {
                out.insert(*i);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn max_var(&self) -> u32 {
        self.variables().last().copied().unwrap_or(0)
    }

    /// Verifies every node against `sig`: known symbol, correct child count.
    pub fn check(&self, sig: &Signature) -> Result<(), TermError> {
        match self {
            Term::Var(0) => Err(TermError::SignatureMismatch("variable x0".into())),
            Term::Var(_) => Ok(()),
            Term::App(op, args) => {
                let arity = sig
                    .arity(*op)
                    .ok_or_else(|| TermError::SignatureMismatch(format!("unknown symbol {op:?}")))?;
                if arity != args.len() {
                    return Err(TermError::SignatureMismatch(format!(
                        "`{}` has arity {arity} but was given {} arguments",
                        sig.name(*op),
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| a.check(sig))
            }
        }
    }

    /// Bottom-up evaluation with a caller-supplied interpretation of the symbols.
    ///
    /// `assignment[i - 1]` is the value of `x_i`.
    pub fn eval_with<V, E, F>(&self, assignment: &[V], apply: &mut F) -> Result<V, E>
    where
        V: Clone,
        E: From<TermError>,
        F: FnMut(Op, &[V]) -> Result<V, E>,
    {
        match self {
            Term::Var(i) => assignment
                .get((*i as usize).wrapping_sub(1))
                .cloned()
                .ok_or_else(|| TermError::UnboundVariable(*i).into()),
            Term::App(op, args) => {
                let vals = args
                    .iter()
                    .map(|a| a.eval_with(assignment, apply))
                    .collect::<Result<Vec<_>, E>>()?;
                apply(*op, &vals)
            }
        }
    }

    /// Prefix s-expression rendering, e.g. `(+ (op mul x1 x2) (neg x3))`.
    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(i) => write!(f, "x{i}"),
            Term::App(Op::Zero, _) => f.write_str("zero"),
            Term::App(op, args) => {
                match op {
                    Op::Add => f.write_str("(+")?,
                    Op::Neg => f.write_str("(neg")?,
                    Op::Omega(_) => write!(f, "(op {}", self.sig.name(*op))?,
                    Op::Zero => unreachable!(),
                }
                for a in args {
                    write!(f, " {}", a.display(self.sig))?;
                }
                f.write_str(")")
            }
        }
    }
}

/// The closed formula `∀x1 … x_m (lhs = rhs)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
    var_count: u32,
}

impl Identity {
    /// `var_count` is the largest variable index occurring on either side.
    pub fn new(lhs: Term, rhs: Term) -> Self {
        let var_count = lhs.max_var().max(rhs.max_var());
        Identity { lhs, rhs, var_count }
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn check(&self, sig: &Signature) -> Result<(), TermError> {
        self.lhs.check(sig)?;
        self.rhs.check(sig)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Signature {
        Signature::new(vec![OperationSymbol::new("mul", 2)]).unwrap()
    }

    #[test]
    fn ring_signature_is_well_formed() {
        assert!(validate_signature(ring().omega()).is_ok());
    }

    #[test]
    fn gamma_names_are_rejected() {
        for name in ["+", "-", "0", "neg", "zero"] {
            assert_eq!(
                Signature::new(vec![OperationSymbol::new(name, 2)]),
                Err(SignatureError::GammaCollision(name.into()))
            );
        }
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let err = Signature::new(vec![OperationSymbol::new("a", 0), OperationSymbol::new("a", 1)]);
        assert_eq!(err, Err(SignatureError::DuplicateSymbol("a".into())));
        assert_eq!(
            Signature::new(vec![OperationSymbol::new("", 1)]),
            Err(SignatureError::EmptyName)
        );
    }

    #[test]
    fn term_variables() {
        assert!(Term::zero().variables().is_empty());
        let t = Term::add(Term::var(1), Term::var(3));
        assert_eq!(t.variables().into_iter().collect::<Vec<_>>(), vec![1, 3]);
        let t = Term::omega(0, vec![Term::var(2), Term::omega(0, vec![Term::var(2), Term::var(5)])]);
        assert_eq!(t.variables().into_iter().collect::<Vec<_>>(), vec![2, 5]);
    }

    #[test]
    fn check_rejects_wrong_child_count() {
        let sig = ring();
        let bad = Term::omega(0, vec![Term::var(1)]);
        assert!(matches!(bad.check(&sig), Err(TermError::SignatureMismatch(_))));
        let unknown = Term::omega(3, vec![]);
        assert!(unknown.check(&sig).is_err());
        assert!(Term::omega(0, vec![Term::var(1), Term::var(2)]).check(&sig).is_ok());
    }

    #[test]
    fn identity_var_count_is_max_index() {
        let id = Identity::new(Term::var(4), Term::add(Term::var(1), Term::zero()));
        assert_eq!(id.var_count(), 4);
    }

    #[test]
    fn display_round_trips_shape() {
        let sig = ring();
        let t = Term::sub(Term::omega(0, vec![Term::var(1), Term::var(2)]), Term::zero());
        assert_eq!(t.display(&sig).to_string(), "(+ (op mul x1 x2) (neg zero))");
    }

    #[test]
    fn eval_reports_unbound_variable() {
        let t = Term::add(Term::var(1), Term::var(2));
        let r: Result<i64, TermError> = t.eval_with(&[5], &mut |_, v: &[i64]| Ok(v.iter().sum()));
        assert_eq!(r, Err(TermError::UnboundVariable(2)));
    }
}
