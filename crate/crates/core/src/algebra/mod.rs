//! Explicit finite distributive Ω-expanded groups stored as dense Cayley tables.

mod families;
mod poly;
mod rmodule;

pub use families::{build_family, catalog, ring_signature, sqrt2_mod4, Family, FamilyError};
pub use poly::{encode_polynomial_term, IntPoly, PolyParseError};
pub use rmodule::{build_r_module, module_basis_identities, RModuleError, RModulePresentation};

use thiserror::Error;

use crate::signature::{Op, Signature, Term, TermError};

/// Largest carrier accepted when every symbol has arity at most 2.
pub const MAX_SIZE: usize = 4096;
/// Largest carrier accepted when some symbol has arity 3 or more.
pub const MAX_SIZE_HIGH_ARITY: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("carrier must be nonempty")]
    EmptyCarrier,
    #[error("carrier of {size} elements exceeds the cap of {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("table for `{symbol}` is malformed: {reason}")]
    MalformedTable { symbol: String, reason: String },
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("`{symbol}` is not distributive in position {position}: {witness}")]
    NotDistributive {
        symbol: String,
        position: usize,
        witness: String,
    },
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyAlgebra {
    sig: Signature,
    size: usize,
    zero: u32,
    add: Vec<u32>,
    neg: Vec<u32>,
    omega: Vec<Vec<u32>>,
    labels: Option<Vec<String>>,
}

fn table_len(size: usize, arity: usize) -> usize {
    size.pow(arity as u32)
}

impl CayleyAlgebra {
    /// Builds an algebra from raw tables, checking only shapes and ranges.
    ///
    /// An `arity`-ary table is indexed row-major: `(a1, …, ak)` sits at
    /// `a1·size^(k-1) + … + ak`.
    pub fn from_tables(
        sig: Signature,
        size: usize,
        add: Vec<u32>,
        neg: Vec<u32>,
        zero: u32,
        omega: Vec<Vec<u32>>,
    ) -> Result<Self, AlgebraError> {
        if size == 0 {
            return Err(AlgebraError::EmptyCarrier);
        }
        let cap = if sig.omega().iter().any(|s| s.arity >= 3) {
            MAX_SIZE_HIGH_ARITY
        } else {
            MAX_SIZE
        };
        if size > cap {
            return Err(AlgebraError::TooLarge { size, cap });
        }
        if omega.len() != sig.omega_len() {
            return Err(AlgebraError::MalformedTable {
                symbol: "Ω".into(),
                reason: format!("{} tables for {} symbols", omega.len(), sig.omega_len()),
            });
        }
        let check = |name: &str, table: &[u32], arity: usize| {
            if table.len() != table_len(size, arity) {
                return Err(AlgebraError::MalformedTable {
                    symbol: name.into(),
                    reason: format!("expected {} entries, found {}", table_len(size, arity), table.len()),
                });
            }
            if let Some(pos) = table.iter().position(|&v| v as usize >= size) {
                return Err(AlgebraError::MalformedTable {
                    symbol: name.into(),
                    reason: format!("entry {pos} is {} but size is {size}", table[pos]),
                });
            }
            Ok(())
        };
        check("+", &add, 2)?;
        check("neg", &neg, 1)?;
        check("zero", &[zero], 0)?;
        for (sym, table) in sig.omega().iter().zip(&omega) {
            check(&sym.name, table, sym.arity)?;
        }
        Ok(CayleyAlgebra {
            sig,
            size,
            zero,
            add,
            neg,
            omega,
            labels: None,
        })
    }

    /// Builds the tables by evaluating closures on every tuple.
    pub fn from_fns(
        sig: Signature,
        size: usize,
        add: impl Fn(usize, usize) -> usize,
        neg: impl Fn(usize) -> usize,
        zero: usize,
        mut omega: impl FnMut(usize, &[usize]) -> usize,
    ) -> Result<Self, AlgebraError> {
        let add_t = (0..size * size).map(|i| add(i / size, i % size) as u32).collect();
        let neg_t = (0..size).map(|a| neg(a) as u32).collect();
        let omega_t = sig
            .omega()
            .iter()
            .enumerate()
            .map(|(w, sym)| {
                let mut args = vec![0; sym.arity];
                (0..table_len(size, sym.arity))
                    .map(|mut i| {
                        for slot in args.iter_mut().rev() {
                            *slot = i % size;
                            i /= size;
                        }
                        omega(w, &args) as u32
                    })
                    .collect()
            })
            .collect();
        CayleyAlgebra::from_tables(sig, size, add_t, neg_t, zero as u32, omega_t)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.size);
        self.labels = Some(labels);
        self
    }

    /// Runs both structural checks.
    pub fn validated(self) -> Result<Self, AlgebraError> {
        self.check_expanded_group()?;
        self.check_distributive()?;
        Ok(self)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn zero(&self) -> usize {
        self.zero as usize
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    pub fn label(&self, a: usize) -> String {
        match &self.labels {
            Some(l) => l[a].clone(),
            None => a.to_string(),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn element_by_label(&self, label: &str) -> Option<usize> {
        self.labels.as_ref()?.iter().position(|l| l == label)
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.size + b] as usize
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn omega_op(&self, w: usize, args: &[usize]) -> usize {
        let idx = args.iter().fold(0usize, |acc, &a| acc * self.size + a);
        self.omega[w][idx] as usize
    }

    /// Applies any fundamental operation. Panics on arity mismatch.
    pub fn apply(&self, op: Op, args: &[usize]) -> usize {
        match op {
            Op::Add => self.add(args[0], args[1]),
            Op::Neg => self.neg(args[0]),
            Op::Zero => self.zero(),
            Op::Omega(w) => {
                assert_eq!(args.len(), self.sig.omega()[w].arity);
                self.omega_op(w, args)
            }
        }
    }

    /// Value of `t` with `x_i ↦ assignment[i-1]`.
    pub fn eval_term(&self, t: &Term, assignment: &[usize]) -> Result<usize, AlgebraError> {
        t.check(&self.sig)?;
        t.eval_with(assignment, &mut |op, args: &[usize]| {
            if let Some(&bad) = args.iter().find(|&&a| a >= self.size) {
                return Err(AlgebraError::MalformedTable {
                    symbol: "assignment".into(),
                    reason: format!("element {bad} out of range"),
                });
            }
            Ok(self.apply(op, args))
        })
    }

    /// Sums of `gens` (left-multiplied words), starting from the generators
    /// themselves; used for Light-style reductions of the axiom checks.
    fn additive_span(&self, gens: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.size];
        let mut queue: Vec<usize> = Vec::new();
        for &g in gens {
            if !seen[g] {
                seen[g] = true;
                queue.push(g);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for &g in gens {
                let y = self.add(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push(y);
                }
            }
        }
        seen
    }

    /// A set whose sums cover the whole carrier, chosen greedily.
    fn spanning_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut covered = vec![false; self.size];
        while let Some(next) = covered.iter().position(|&c| !c) {
            gens.push(next);
            covered = self.additive_span(&gens);
        }
        gens
    }

    /// Succeeds iff `(carrier, +, -, 0)` is a group.
    ///
    /// Associativity is checked with Light's test against a spanning set,
    /// which is exhaustive for the operation but costs `size²·|gens|`.
    pub fn check_expanded_group(&self) -> Result<(), AlgebraError> {
        let z = self.zero();
        for a in self.elements() {
            if self.add(z, a) != a || self.add(a, z) != a {
                return Err(AlgebraError::NotAGroup(format!(
                    "{} is not a two-sided identity for {}",
                    self.label(z),
                    self.label(a)
                )));
            }
            let n = self.neg(a);
            if self.add(a, n) != z || self.add(n, a) != z {
                return Err(AlgebraError::NotAGroup(format!(
                    "{} is not an inverse of {}",
                    self.label(n),
                    self.label(a)
                )));
            }
        }
        let gens = self.spanning_set();
        for &g in &gens {
            for x in self.elements() {
                let xg = self.add(x, g);
                for y in self.elements() {
                    if self.add(xg, y) != self.add(x, self.add(g, y)) {
                        return Err(AlgebraError::NotAGroup(format!(
                            "({0} + {1}) + {2} ≠ {0} + ({1} + {2})",
                            self.label(x),
                            self.label(g),
                            self.label(y)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Succeeds iff every non-nullary `ω` distributes over `+` in every
    /// position. Assumes the group axioms hold; it is enough to check the
    /// varying argument against a spanning set of the additive group.
    pub fn check_distributive(&self) -> Result<(), AlgebraError> {
        let gens = self.spanning_set();
        let size = self.size;
        for (w, sym) in self.sig.omega().iter().enumerate() {
            let arity = sym.arity;
            if arity == 0 {
                continue;
            }
            let mut args = vec![0usize; arity];
            for pos in 0..arity {
                // all tuples with position `pos` left free
                for mut rest in 0..table_len(size, arity - 1) {
                    for (i, slot) in args.iter_mut().enumerate().rev() {
                        if i == pos {
                            continue;
                        }
                        *slot = rest % size;
                        rest /= size;
                    }
                    for a in self.elements() {
                        for &b in &gens {
                            args[pos] = self.add(a, b);
                            let lhs = self.omega_op(w, &args);
                            args[pos] = a;
                            let wa = self.omega_op(w, &args);
                            args[pos] = b;
                            let wb = self.omega_op(w, &args);
                            if lhs != self.add(wa, wb) {
                                let mut shown: Vec<String> = args.iter().map(|&x| self.label(x)).collect();
                                shown[pos] = format!("{} + {}", self.label(a), self.label(b));
                                return Err(AlgebraError::NotDistributive {
                                    symbol: sym.name.clone(),
                                    position: pos + 1,
                                    witness: format!("{}({})", sym.name, shown.join(", ")),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Direct product with another algebra of the same signature; the pair
    /// `(a, b)` gets index `a·other.size + b`.
    pub fn product(&self, other: &CayleyAlgebra) -> Result<CayleyAlgebra, AlgebraError> {
        if self.sig != other.sig {
            return Err(AlgebraError::MalformedTable {
                symbol: "product".into(),
                reason: "factors have different signatures".into(),
            });
        }
        let m = other.size;
        let size = self.size * m;
        if size > MAX_SIZE {
            return Err(AlgebraError::TooLarge { size, cap: MAX_SIZE });
        }
        let split = |x: usize| (x / m, x % m);
        let prod = CayleyAlgebra::from_fns(
            self.sig.clone(),
            size,
            |x, y| {
                let ((a, b), (c, d)) = (split(x), split(y));
                self.add(a, c) * m + other.add(b, d)
            },
            |x| {
                let (a, b) = split(x);
                self.neg(a) * m + other.neg(b)
            },
            self.zero() * m + other.zero(),
            |w, args| {
                let left: Vec<usize> = args.iter().map(|&x| x / m).collect();
                let right: Vec<usize> = args.iter().map(|&x| x % m).collect();
                self.omega_op(w, &left) * m + other.omega_op(w, &right)
            },
        )?;
        let labels = (0..size)
            .map(|x| format!("({},{})", self.label(x / m), other.label(x % m)))
            .collect();
        Ok(prod.with_labels(labels))
    }
}
