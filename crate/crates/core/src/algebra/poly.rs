use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signature::Term;

/// Integer polynomial in commuting variables `y1, …, ym`.
///
/// Monomials are keyed by exponent vectors of length `m`; zero coefficients
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IntPoly {
    vars: usize,
    terms: BTreeMap<Vec<u32>, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse polynomial `{input}` at byte {pos}: {reason}")]
pub struct PolyParseError {
    pub input: String,
    pub pos: usize,
    pub reason: String,
}

impl IntPoly {
    pub fn zero(vars: usize) -> Self {
        IntPoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: i64) -> Self {
        let mut p = IntPoly::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// The variable `y_i` (1-based).
    pub fn var(vars: usize, i: usize) -> Self {
        assert!((1..=vars).contains(&i));
        let mut e = vec![0; vars];
        e[i - 1] = 1;
        let mut p = IntPoly::zero(vars);
        p.add_term(e, 1);
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], i64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn add_term(&mut self, exps: Vec<u32>, coef: i64) {
        assert_eq!(exps.len(), self.vars);
        let entry = self.terms.entry(exps).or_insert(0);
        *entry += coef;
        if *entry == 0 {
            self.terms.retain(|_, c| *c != 0);
        }
    }

    /// Pads with unused trailing variables so that `self` lives in `vars` variables.
    pub fn widen(&self, vars: usize) -> IntPoly {
        assert!(vars >= self.vars);
        let mut p = IntPoly::zero(vars);
        for (e, c) in self.terms() {
            let mut e = e.to_vec();
            e.resize(vars, 0);
            p.add_term(e, c);
        }
        p
    }

    pub fn sum(&self, other: &IntPoly) -> IntPoly {
        assert_eq!(self.vars, other.vars);
        let mut p = self.clone();
        for (e, c) in other.terms() {
            p.add_term(e.to_vec(), c);
        }
        p
    }

    pub fn product(&self, other: &IntPoly) -> IntPoly {
        assert_eq!(self.vars, other.vars);
        let mut p = IntPoly::zero(self.vars);
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    /// Value on an abelian group given commuting endomorphisms: `p(φ1, …, φm)(b)`.
    pub fn apply<G>(&self, b: G, endos: &[&dyn Fn(G) -> G], add: &dyn Fn(G, G) -> G, neg: &dyn Fn(G) -> G, zero: G) -> G
    where
        G: Copy,
    {
        assert_eq!(endos.len(), self.vars);
        let mut acc = zero;
        for (e, c) in self.terms() {
            let mut x = b;
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    x = endos[i](x);
                }
            }
            let x = if c < 0 { neg(x) } else { x };
            for _ in 0..c.unsigned_abs() {
                acc = add(acc, x);
            }
        }
        acc
    }
}

/// Index tuple `(i1 ≤ … ≤ id)` of a monomial, 1-based.
fn index_tuple(exps: &[u32]) -> Vec<usize> {
    exps.iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i + 1, k as usize))
        .collect()
}

/// `ω_j(v) = ω_{i_d}(…ω_{i_1}(v)…)` where `ω_i` is `Ω` symbol `i - 1`.
fn apply_chain(j: &[usize], v: &Term) -> Term {
    j.iter().fold(v.clone(), |t, &i| Term::omega(i - 1, vec![t]))
}

/// `ω_J(v)`: left-associated sum over the multiset `J`, which must already
/// be sorted in the chosen order.
fn chain_sum(multiset: &[Vec<usize>], v: &Term) -> Term {
    Term::sum(multiset.iter().map(|j| apply_chain(j, v)))
}

/// The Σ-term `p(ω1, …, ωm)(v)`, where `ω_i` is the `i`-th symbol of `Ω`.
///
/// Monomials are split into the positive and negative multisets `J+`, `J-`
/// of index tuples, each sorted by length and then lexicographically.
pub fn encode_polynomial_term(p: &IntPoly, v: &Term) -> Term {
    let mut plus: Vec<Vec<usize>> = Vec::new();
    let mut minus: Vec<Vec<usize>> = Vec::new();
    for (e, c) in p.terms() {
        let j = index_tuple(e);
        let side = if c > 0 { &mut plus } else { &mut minus };
        side.extend(std::iter::repeat_n(j, c.unsigned_abs() as usize));
    }
    let order = |a: &Vec<usize>, b: &Vec<usize>| a.len().cmp(&b.len()).then_with(|| a.cmp(b));
    plus.sort_by(order);
    minus.sort_by(order);
    match (plus.is_empty(), minus.is_empty()) {
        (false, false) => Term::sub(chain_sum(&plus, v), chain_sum(&minus, v)),
        (false, true) => chain_sum(&plus, v),
        (true, false) => Term::neg(chain_sum(&minus, v)),
        (true, true) => Term::zero(),
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // highest total degree first reads naturally
        let mut terms: Vec<_> = self.terms().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (n, (e, c)) in terms.into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("y{}", i + 1)
                    } else {
                        format!("y{}^{k}", i + 1)
                    }
                })
                .collect();
            let sign = if c < 0 { "-" } else { "+" };
            if n == 0 {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let abs = c.unsigned_abs();
            match (mono.is_empty(), abs) {
                (true, _) => write!(f, "{abs}")?,
                (false, 1) => f.write_str(&mono.join("*"))?,
                (false, _) => write!(f, "{abs}*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

impl From<IntPoly> for String {
    fn from(p: IntPoly) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for IntPoly {
    type Error = PolyParseError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for IntPoly {
    type Err = PolyParseError;

    /// Parses sums of monomials such as `y1^2*y2 - 3*y1 + 4`. The variable
    /// count is the largest index mentioned.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let err = |pos: usize, reason: &str| PolyParseError {
            input: input.to_string(),
            pos,
            reason: reason.to_string(),
        };
        let bytes = input.as_bytes();
        let mut pos = 0;
        let skip_ws = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };
        let number = |pos: &mut usize| -> Option<u64> {
            let start = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            input[start..*pos].parse().ok()
        };
        let mut raw: Vec<(BTreeMap<usize, u32>, i64)> = Vec::new();
        let mut first = true;
        loop {
            skip_ws(&mut pos);
            if pos >= bytes.len() {
                if first {
                    return Err(err(pos, "empty polynomial"));
                }
                break;
            }
            let mut sign = 1i64;
            match bytes[pos] {
                b'+' => pos += 1,
                b'-' => {
                    sign = -1;
                    pos += 1
                }
                _ if !first => return Err(err(pos, "expected `+` or `-`")),
                _ => {}
            }
            first = false;
            skip_ws(&mut pos);
            let mut coef: Option<u64> = None;
            if pos < bytes.len() && bytes[pos].is_ascii_digit() {
                coef = Some(number(&mut pos).ok_or_else(|| err(pos, "coefficient overflow"))?);
            }
            let mut exps: BTreeMap<usize, u32> = BTreeMap::new();
            loop {
                skip_ws(&mut pos);
                if pos < bytes.len() && bytes[pos] == b'*' {
                    if coef.is_none() && exps.is_empty() {
                        return Err(err(pos, "unexpected `*`"));
                    }
                    pos += 1;
                    skip_ws(&mut pos);
                } else if !(pos < bytes.len() && bytes[pos] == b'y') {
                    break;
                }
                if pos >= bytes.len() || bytes[pos] != b'y' {
                    return Err(err(pos, "expected a variable `y<i>`"));
                }
                pos += 1;
                let idx = number(&mut pos)
                    .filter(|&i| (1..=64).contains(&i))
                    .ok_or_else(|| err(pos, "variable index must be in 1..=64"))?;
                let mut k = 1u32;
                skip_ws(&mut pos);
                if pos < bytes.len() && bytes[pos] == b'^' {
                    pos += 1;
                    skip_ws(&mut pos);
                    k = number(&mut pos)
                        .and_then(|k| u32::try_from(k).ok())
                        .ok_or_else(|| err(pos, "bad exponent"))?;
                }
                *exps.entry(idx as usize).or_insert(0) += k;
            }
            if coef.is_none() && exps.is_empty() {
                return Err(err(pos, "expected a monomial"));
            }
            let c = i64::try_from(coef.unwrap_or(1)).map_err(|_| err(pos, "coefficient overflow"))?;
            raw.push((exps, sign * c));
        }
        let vars = raw
            .iter()
            .filter_map(|(e, _)| e.keys().last().copied())
            .max()
            .unwrap_or(0);
        let mut p = IntPoly::zero(vars);
        for (e, c) in raw {
            let mut v = vec![0; vars];
            for (i, k) in e {
                v[i - 1] += k;
            }
            p.add_term(v, c);
        }
        Ok(p)
    }
}
