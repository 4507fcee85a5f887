use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rmodule::{build_r_module, RModuleError, RModulePresentation};
use super::{AlgebraError, CayleyAlgebra, MAX_SIZE};
use crate::signature::{OperationSymbol, Signature};

/// Standard algebras, each constructed from first principles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `Z_n` as a plain group.
    Cyclic { n: usize },
    /// The symmetry group of the regular `n`-gon, of order `2n`.
    Dihedral { n: usize },
    /// `S_n`, `n ≤ 5`.
    Symmetric { n: usize },
    /// The ring `Z_n` with `Ω = {mul}` or `{mul, one}`.
    RingModN {
        n: usize,
        #[serde(default)]
        unital: bool,
    },
    /// `M_k(Z_p)`.
    MatrixRing {
        k: usize,
        p: usize,
        #[serde(default)]
        unital: bool,
    },
    /// Upper-triangular `k×k` matrices over `Z_p`.
    UpperTriangular {
        k: usize,
        p: usize,
        #[serde(default)]
        unital: bool,
    },
    /// Direct product; all factors must share a signature.
    Product { factors: Vec<Family> },
    /// A module over a finitely generated commutative ring.
    RModule(RModulePresentation),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    RModule(#[from] RModuleError),
}

pub fn ring_signature(unital: bool) -> Signature {
    let mut omega = vec![OperationSymbol::new("mul", 2)];
    if unital {
        omega.push(OperationSymbol::new("one", 0));
    }
    Signature::new(omega).expect("ring signature is well formed")
}

fn out_of_range(msg: impl Into<String>) -> FamilyError {
    FamilyError::ParamOutOfRange(msg.into())
}

fn check_size(size: Option<usize>, what: &str) -> Result<usize, FamilyError> {
    match size {
        Some(s) if s <= MAX_SIZE => Ok(s),
        _ => Err(out_of_range(format!("{what} exceeds {MAX_SIZE} elements"))),
    }
}

/// Builds and validates a family member.
pub fn build_family(family: &Family) -> Result<CayleyAlgebra, FamilyError> {
    let alg = match family {
        Family::Cyclic { n } => cyclic(*n)?,
        Family::Dihedral { n } => dihedral(*n)?,
        Family::Symmetric { n } => symmetric(*n)?,
        Family::RingModN { n, unital } => ring_mod_n(*n, *unital)?,
        Family::MatrixRing { k, p, unital } => matrix_ring(*k, *p, *unital, false)?,
        Family::UpperTriangular { k, p, unital } => matrix_ring(*k, *p, *unital, true)?,
        Family::Product { factors } => {
            let mut it = factors.iter();
            let first = it
                .next()
                .ok_or_else(|| out_of_range("product needs at least one factor"))?;
            let mut acc = build_family(first)?;
            for f in it {
                let next = build_family(f)?;
                check_size(acc.size().checked_mul(next.size()), "product")?;
                acc = acc.product(&next)?;
            }
            acc
        }
        Family::RModule(pres) => return Ok(build_r_module(pres)?),
    };
    Ok(alg.validated()?)
}

impl Family {
    /// Resolves a family from its textual name and `key=value` parameters.
    pub fn from_name(name: &str, params: &HashMap<String, usize>) -> Result<Family, FamilyError> {
        let get = |k: &str| {
            params
                .get(k)
                .copied()
                .ok_or_else(|| out_of_range(format!("missing parameter `{k}`")))
        };
        let unital = params.get("unital").copied().unwrap_or(0) != 0;
        Ok(match name {
            "cyclic" => Family::Cyclic { n: get("n")? },
            "dihedral" => Family::Dihedral { n: get("n")? },
            "symmetric" => Family::Symmetric { n: get("n")? },
            "ring_mod_n" => Family::RingModN { n: get("n")?, unital },
            "matrix_ring" => Family::MatrixRing {
                k: get("k")?,
                p: get("p")?,
                unital,
            },
            "upper_triangular" => Family::UpperTriangular {
                k: get("k")?,
                p: get("p")?,
                unital,
            },
            other => return Err(FamilyError::UnknownFamily(other.into())),
        })
    }
}

fn cyclic(n: usize) -> Result<CayleyAlgebra, FamilyError> {
    if n == 0 {
        return Err(out_of_range("cyclic group needs n ≥ 1"));
    }
    check_size(Some(n), "cyclic group")?;
    Ok(CayleyAlgebra::from_fns(
        Signature::groups(),
        n,
        |a, b| (a + b) % n,
        |a| (n - a) % n,
        0,
        |_, _| unreachable!(),
    )?)
}

fn ring_mod_n(n: usize, unital: bool) -> Result<CayleyAlgebra, FamilyError> {
    if n == 0 {
        return Err(out_of_range("ring Z_n needs n ≥ 1"));
    }
    check_size(Some(n), "ring Z_n")?;
    Ok(CayleyAlgebra::from_fns(
        ring_signature(unital),
        n,
        |a, b| (a + b) % n,
        |a| (n - a) % n,
        0,
        |w, args| match w {
            0 => args[0] * args[1] % n,
            _ => 1 % n,
        },
    )?)
}

/// Permutation group from an explicit element list; `x + y` is `x ∘ y`
/// (apply `y` first). The identity must come first.
fn permutation_group(perms: Vec<Vec<usize>>, labels: Vec<String>) -> Result<CayleyAlgebra, FamilyError> {
    let index: HashMap<&[usize], usize> = perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let points = perms[0].len();
    debug_assert!(perms[0].iter().enumerate().all(|(i, &p)| i == p));
    let lookup = |p: Vec<usize>| index[p.as_slice()];
    let compose = |x: usize, y: usize| lookup((0..points).map(|i| perms[x][perms[y][i]]).collect());
    let inverse = |x: usize| {
        let mut inv = vec![0; points];
        for (i, &p) in perms[x].iter().enumerate() {
            inv[p] = i;
        }
        lookup(inv)
    };
    Ok(CayleyAlgebra::from_fns(
        Signature::groups(),
        perms.len(),
        compose,
        inverse,
        0,
        |_, _| unreachable!(),
    )?
    .with_labels(labels))
}

fn dihedral(n: usize) -> Result<CayleyAlgebra, FamilyError> {
    if n == 0 || 2 * n > MAX_SIZE {
        return Err(out_of_range(format!("dihedral group needs 1 ≤ n ≤ {}", MAX_SIZE / 2)));
    }
    let mut perms = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for b in 0..2 {
        for a in 0..n {
            // r^a ∘ f^b with r(i) = i + 1 and f(i) = -i
            perms.push(
                (0..n)
                    .map(|i| {
                        let j = if b == 1 { (n - i) % n } else { i };
                        (j + a) % n
                    })
                    .collect(),
            );
            let rot = match a {
                0 => String::new(),
                1 => "r".to_string(),
                _ => format!("r{a}"),
            };
            labels.push(match (rot.is_empty(), b) {
                (true, 0) => "0".to_string(),
                (_, 0) => rot,
                (_, _) => format!("{rot}f"),
            });
        }
    }
    permutation_group(perms, labels)
}

fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut j = p[start];
        while j != start {
            seen[j] = true;
            cycle.push(j);
            j = p[j];
        }
        let body: Vec<String> = cycle.iter().map(|c| (c + 1).to_string()).collect();
        out.push_str(&format!("({})", body.join(" ")));
    }
    if out.is_empty() {
        "()".into()
    } else {
        out
    }
}

fn symmetric(n: usize) -> Result<CayleyAlgebra, FamilyError> {
    if !(1..=5).contains(&n) {
        return Err(out_of_range("symmetric group needs 1 ≤ n ≤ 5"));
    }
    // lexicographic order, identity first
    let mut perms = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        perms.push(cur.clone());
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    let labels = perms.iter().map(|p| cycle_notation(p)).collect();
    permutation_group(perms, labels)
}

/// `M_k(Z_p)` or its upper-triangular subring. Entries are stored as base-`p`
/// digits of the element index, free positions in row-major order with the
/// first position most significant.
fn matrix_ring(k: usize, p: usize, unital: bool, upper: bool) -> Result<CayleyAlgebra, FamilyError> {
    if k == 0 || p < 2 {
        return Err(out_of_range("matrix ring needs k ≥ 1 and p ≥ 2"));
    }
    let positions: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|&(i, j)| !upper || i <= j)
        .collect();
    let size = check_size(
        u32::try_from(positions.len()).ok().and_then(|e| p.checked_pow(e)),
        "matrix ring",
    )?;
    let decode = |mut x: usize| {
        let mut m = vec![vec![0usize; k]; k];
        for &(i, j) in positions.iter().rev() {
            m[i][j] = x % p;
            x /= p;
        }
        m
    };
    let encode = |m: &[Vec<usize>]| positions.iter().fold(0, |acc, &(i, j)| acc * p + m[i][j] % p);
    let mats: Vec<Vec<Vec<usize>>> = (0..size).map(decode).collect();
    let zip = |x: usize, y: usize, f: &dyn Fn(usize, usize) -> usize| {
        let m: Vec<Vec<usize>> = (0..k)
            .map(|i| (0..k).map(|j| f(mats[x][i][j], mats[y][i][j])).collect())
            .collect();
        encode(&m)
    };
    let identity: Vec<Vec<usize>> = (0..k).map(|i| (0..k).map(|j| usize::from(i == j)).collect()).collect();
    let alg = CayleyAlgebra::from_fns(
        ring_signature(unital),
        size,
        |x, y| zip(x, y, &|a, b| (a + b) % p),
        |x| zip(x, x, &|a, _| (p - a) % p),
        0,
        |w, args| match w {
            0 => {
                let (a, b) = (&mats[args[0]], &mats[args[1]]);
                let m: Vec<Vec<usize>> = (0..k)
                    .map(|i| {
                        (0..k)
                            .map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum::<usize>() % p)
                            .collect()
                    })
                    .collect();
                encode(&m)
            }
            _ => encode(&identity),
        },
    )?;
    let labels = mats
        .iter()
        .map(|m| {
            m.iter()
                .map(|row| row.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
                .join(";")
        })
        .collect();
    Ok(alg.with_labels(labels))
}

/// `Z4[y]/(y² - 2)` as a module over itself on the basis `(1, y)`, where `y`
/// acts by `(a, b) ↦ (2b, a)`.
pub fn sqrt2_mod4() -> RModulePresentation {
    RModulePresentation {
        moduli: vec![4, 4],
        actions: vec![vec![vec![0, 2], vec![1, 0]]],
        relations: vec!["y1^2 - 2".parse().expect("valid"), "4".parse().expect("valid")],
    }
}

/// Named algebras used throughout the tests, the acceptance suite and the demo.
pub fn catalog() -> Vec<(&'static str, Family)> {
    let ring = |n| Family::RingModN { n, unital: false };
    let z2 = || Family::Cyclic { n: 2 };
    vec![
        ("trivial", Family::Cyclic { n: 1 }),
        ("z8", Family::Cyclic { n: 8 }),
        (
            "z2^3",
            Family::Product {
                factors: vec![z2(), z2(), z2()],
            },
        ),
        ("z6_ring", ring(6)),
        ("z6_ring_unital", Family::RingModN { n: 6, unital: true }),
        ("z4_ring_unital", Family::RingModN { n: 4, unital: true }),
        (
            "z2xz3_ring",
            Family::Product {
                factors: vec![ring(2), ring(3)],
            },
        ),
        ("s3", Family::Symmetric { n: 3 }),
        ("d4", Family::Dihedral { n: 4 }),
        (
            "ut2_z2",
            Family::UpperTriangular {
                k: 2,
                p: 2,
                unital: false,
            },
        ),
        (
            "ut2_z2_unital",
            Family::UpperTriangular {
                k: 2,
                p: 2,
                unital: true,
            },
        ),
        (
            "m2_z2",
            Family::MatrixRing {
                k: 2,
                p: 2,
                unital: false,
            },
        ),
        (
            "m2_z2_unital",
            Family::MatrixRing {
                k: 2,
                p: 2,
                unital: true,
            },
        ),
        ("sqrt2_mod4", Family::RModule(sqrt2_mod4())),
        ("z12_ring", ring(12)),
        ("d8", Family::Dihedral { n: 8 }),
        ("s4", Family::Symmetric { n: 4 }),
        (
            "ut3_z2",
            Family::UpperTriangular {
                k: 3,
                p: 2,
                unital: false,
            },
        ),
    ]
}
