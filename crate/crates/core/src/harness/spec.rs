//! JSON algebra and identity-basis files.

use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;

use super::sexpr::parse_term;
use crate::algebra::{build_family, CayleyAlgebra, Family};
use crate::signature::{Identity, Op, OperationSymbol, Signature};
use crate::truth::generating_system;
use crate::variety::IdentityBasis;

/// A malformed input file, with the path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub path: String,
    pub message: String,
}

impl SpecError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        SpecError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for SpecError {}

fn from_json<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, SpecError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SpecError::new(path, e.into_inner())
    })
}

/// An element given by index or by label.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Index(usize),
    Label(String),
}

impl ElementRef {
    pub fn resolve(&self, alg: &CayleyAlgebra) -> Option<usize> {
        match self {
            ElementRef::Index(i) => (*i < alg.size()).then_some(*i),
            ElementRef::Label(l) => alg
                .element_by_label(l)
                .or_else(|| l.parse::<usize>().ok().filter(|&i| i < alg.size())),
        }
    }
}

/// An algebra written out as tables. `add` is given as rows; each `Ω` table is
/// flat and row-major over its argument tuples.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct InlineAlgebra {
    #[serde(default)]
    pub signature: Vec<OperationSymbol>,
    pub size: usize,
    #[serde(default)]
    pub zero: usize,
    pub add: Vec<Vec<usize>>,
    pub neg: Vec<usize>,
    #[serde(default)]
    pub tables: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AlgebraSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub inline: Option<InlineAlgebra>,
    #[serde(default)]
    pub salt_bits: Option<u32>,
    /// A Σ-generating system; computed when absent.
    #[serde(default)]
    pub generators: Option<Vec<ElementRef>>,
    /// Default `t` for ideal experiments.
    #[serde(default)]
    pub ideal_generators: Option<Vec<ElementRef>>,
}

/// A spec resolved into an algebra and element indices.
#[derive(Debug, Clone)]
pub struct LoadedAlgebra {
    pub name: String,
    pub family: Option<Family>,
    pub alg: CayleyAlgebra,
    pub salt_bits: Option<u32>,
    pub generators: Vec<usize>,
    pub ideal_generators: Option<Vec<usize>>,
}

fn family_name(f: &Family) -> String {
    let v = serde_json::to_value(f).expect("families serialize");
    match v.get("name").and_then(|n| n.as_str()) {
        Some(n) => n.to_string(),
        None => "family".into(),
    }
}

fn inline_algebra(spec: &InlineAlgebra) -> Result<CayleyAlgebra, SpecError> {
    let sig = Signature::new(spec.signature.clone()).map_err(|e| SpecError::new("inline.signature", e))?;
    let size = spec.size;
    if spec.add.len() != size {
        return Err(SpecError::new(
            "inline.add",
            format!("expected {size} rows, found {}", spec.add.len()),
        ));
    }
    let mut add = Vec::with_capacity(size * size);
    for (i, row) in spec.add.iter().enumerate() {
        if row.len() != size {
            return Err(SpecError::new(
                format!("inline.add[{i}]"),
                format!("expected {size} entries, found {}", row.len()),
            ));
        }
        add.extend(row.iter().map(|&v| v as u32));
    }
    for name in spec.tables.keys() {
        if sig.lookup(name).is_none_or(|op| !matches!(op, Op::Omega(_))) {
            return Err(SpecError::new(
                format!("inline.tables.{name}"),
                "no such symbol in the signature",
            ));
        }
    }
    let mut omega = Vec::new();
    for sym in sig.omega() {
        let t = spec
            .tables
            .get(&sym.name)
            .ok_or_else(|| SpecError::new("inline.tables", format!("missing table for `{}`", sym.name)))?;
        omega.push(t.iter().map(|&v| v as u32).collect());
    }
    let neg = spec.neg.iter().map(|&v| v as u32).collect();
    let alg = CayleyAlgebra::from_tables(sig, size, add, neg, spec.zero as u32, omega)
        .and_then(|a| a.validated())
        .map_err(|e| SpecError::new("inline", e))?;
    Ok(match &spec.labels {
        Some(l) if l.len() == size => alg.with_labels(l.clone()),
        Some(l) => {
            return Err(SpecError::new(
                "inline.labels",
                format!("expected {size} labels, found {}", l.len()),
            ))
        }
        None => alg,
    })
}

fn resolve_all(alg: &CayleyAlgebra, refs: &[ElementRef], field: &str) -> Result<Vec<usize>, SpecError> {
    refs.iter()
        .enumerate()
        .map(|(i, r)| {
            r.resolve(alg)
                .ok_or_else(|| SpecError::new(format!("{field}[{i}]"), format!("no element {r:?}")))
        })
        .collect()
}

impl AlgebraSpec {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        from_json(text)
    }

    pub fn load(&self) -> Result<LoadedAlgebra, SpecError> {
        let (alg, default_name) = match (&self.family, &self.inline) {
            (Some(f), None) => (
                build_family(f).map_err(|e| SpecError::new("family", e))?,
                family_name(f),
            ),
            (None, Some(i)) => (inline_algebra(i)?, "inline".to_string()),
            _ => return Err(SpecError::new(".", "exactly one of `family` and `inline` is required")),
        };
        let generators = match &self.generators {
            Some(g) => resolve_all(&alg, g, "generators")?,
            None => generating_system(&alg),
        };
        let ideal_generators = self
            .ideal_generators
            .as_ref()
            .map(|t| resolve_all(&alg, t, "idealGenerators"))
            .transpose()?;
        Ok(LoadedAlgebra {
            name: self.name.clone().unwrap_or(default_name),
            family: self.family.clone(),
            alg,
            salt_bits: self.salt_bits,
            generators,
            ideal_generators,
        })
    }
}

impl LoadedAlgebra {
    pub fn resolve(&self, refs: &[ElementRef], field: &str) -> Result<Vec<usize>, SpecError> {
        resolve_all(&self.alg, refs, field)
    }
}

/// Parses and loads an algebra spec file's contents.
pub fn load_algebra(text: &str) -> Result<LoadedAlgebra, SpecError> {
    AlgebraSpec::parse(text)?.load()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySpec {
    pub lhs: String,
    pub rhs: String,
}

/// Either explicit identities or one of the shipped bases.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BasisSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub builtin: Option<String>,
    /// Binary symbol used by the ring bases.
    #[serde(default)]
    pub mul: Option<String>,
    #[serde(default)]
    pub identities: Vec<IdentitySpec>,
    #[serde(default)]
    pub requires_nilpotent_additive: Option<bool>,
}

pub const BUILTIN_BASES: [&str; 5] = [
    "abelian",
    "nilpotent-class-2",
    "commutative-rings",
    "anticommutative",
    "modules",
];

impl BasisSpec {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        from_json(text)
    }

    /// Resolves symbols against the algebra's signature.
    pub fn load(&self, algebra: &LoadedAlgebra) -> Result<IdentityBasis, SpecError> {
        let sig = algebra.alg.signature();
        let mut basis = match &self.builtin {
            None => IdentityBasis {
                name: self.name.clone().unwrap_or_else(|| "custom".into()),
                identities: Vec::new(),
                requires_nilpotent_additive: false,
            },
            Some(b) => {
                let mul = || {
                    let name = self.mul.as_deref().unwrap_or("mul");
                    match sig.lookup(name) {
                        Some(op @ Op::Omega(_)) if sig.arity(op) == Some(2) => Ok(op),
                        _ => Err(SpecError::new("mul", format!("algebra has no binary symbol `{name}`"))),
                    }
                };
                match b.as_str() {
                    "abelian" => IdentityBasis::abelian(),
                    "nilpotent-class-2" => IdentityBasis::nilpotent_class_2(),
                    "commutative-rings" => IdentityBasis::commutative_rings(mul()?),
                    "anticommutative" => IdentityBasis::anticommutative(mul()?),
                    "modules" => match &algebra.family {
                        Some(Family::RModule(p)) => IdentityBasis::modules(p.generators(), &p.relations),
                        _ => return Err(SpecError::new("builtin", "`modules` needs an r_module family algebra")),
                    },
                    other => {
                        return Err(SpecError::new(
                            "builtin",
                            format!("unknown basis `{other}`; expected one of {}", BUILTIN_BASES.join(", ")),
                        ))
                    }
                }
            }
        };
        if let Some(n) = &self.name {
            basis.name = n.clone();
        }
        for (i, id) in self.identities.iter().enumerate() {
            let lhs = parse_term(&id.lhs, sig).map_err(|e| SpecError::new(format!("identities[{i}].lhs"), e))?;
            let rhs = parse_term(&id.rhs, sig).map_err(|e| SpecError::new(format!("identities[{i}].rhs"), e))?;
            basis.identities.push(Identity::new(lhs, rhs));
        }
        if let Some(flag) = self.requires_nilpotent_additive {
            basis.requires_nilpotent_additive = flag;
        }
        if basis.identities.is_empty() {
            return Err(SpecError::new("identities", "a basis needs at least one identity"));
        }
        Ok(basis)
    }
}

pub fn load_basis(text: &str, algebra: &LoadedAlgebra) -> Result<IdentityBasis, SpecError> {
    BasisSpec::parse(text)?.load(algebra)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_spec() {
        let a =
            load_algebra(r#"{"family": {"name": "ring_mod_n", "n": 6}, "saltBits": 5, "generators": [1]}"#).unwrap();
        assert_eq!(a.name, "ring_mod_n");
        assert_eq!(a.alg.size(), 6);
        assert_eq!(a.salt_bits, Some(5));
        assert_eq!(a.generators, vec![1]);

        let d4 = load_algebra(
            r#"{"family": {"name": "dihedral", "n": 4}, "generators": ["r", "f"], "idealGenerators": ["r2"]}"#,
        )
        .unwrap();
        assert_eq!(d4.generators.len(), 2);
        assert_eq!(d4.ideal_generators.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn generators_default_to_a_generating_system() {
        let a = load_algebra(r#"{"family": {"name": "symmetric", "n": 3}}"#).unwrap();
        assert!(!a.generators.is_empty());
    }

    #[test]
    fn inline_spec() {
        let text = r#"{
            "name": "z3",
            "inline": {
                "signature": [{"name": "mul", "arity": 2}],
                "size": 3,
                "add": [[0,1,2],[1,2,0],[2,0,1]],
                "neg": [0,2,1],
                "tables": {"mul": [0,0,0, 0,1,2, 0,2,1]}
            },
            "generators": [1]
        }"#;
        let a = load_algebra(text).unwrap();
        assert_eq!(a.alg.omega_op(0, &[2, 2]), 1);
        assert_eq!(a.name, "z3");
    }

    #[test]
    fn errors_carry_field_paths() {
        let cases = [
            (r#"{"family": {"name": "ring_mod_n", "n": "six"}}"#, "family"),
            (r#"{"family": {"name": "cyclic", "n": 4}, "saltBits": -1}"#, "saltBits"),
            (
                r#"{"family": {"name": "cyclic", "n": 4}, "generators": [9]}"#,
                "generators[0]",
            ),
            (r#"{"family": {"name": "cyclic", "n": 4}, "colour": 1}"#, "colour"),
            (r#"{}"#, "."),
            (
                r#"{"inline": {"size": 2, "add": [[0,1],[1]], "neg": [0,1]}}"#,
                "inline.add[1]",
            ),
            (
                r#"{"inline": {"size": 2, "add": [[0,1],[1,0]], "neg": [0,1], "tables": {"mul": [0]}}}"#,
                "inline.tables.mul",
            ),
            (
                r#"{"inline": {"size": 3, "add": [[0,1,2],[1,2,0],[2,0,0]], "neg": [0,2,1]}}"#,
                "inline",
            ),
        ];
        for (text, path) in cases {
            let e = load_algebra(text).unwrap_err();
            assert_eq!(e.path, path, "{text}: {e}");
        }
    }

    #[test]
    fn basis_files() {
        let z6 = load_algebra(r#"{"family": {"name": "ring_mod_n", "n": 6}}"#).unwrap();
        let b = load_basis(
            r#"{"name": "comm", "identities": [{"lhs": "(op mul x1 x2)", "rhs": "(op mul x2 x1)"}], "requiresNilpotentAdditive": true}"#,
            &z6,
        )
        .unwrap();
        assert_eq!(b.identities.len(), 1);
        assert!(b.requires_nilpotent_additive);

        let b = load_basis(r#"{"builtin": "commutative-rings"}"#, &z6).unwrap();
        assert_eq!(b.identities.len(), 3);

        let e = load_basis(r#"{"identities": [{"lhs": "(op mul x1)", "rhs": "x1"}]}"#, &z6).unwrap_err();
        assert_eq!(e.path, "identities[0].lhs");
        let e = load_basis(r#"{"builtin": "modules"}"#, &z6).unwrap_err();
        assert_eq!(e.path, "builtin");
        let e = load_basis(r#"{"identities": [{"lhs": "x1"}]}"#, &z6).unwrap_err();
        assert_eq!(e.path, "identities[0]");
    }
}
