//! Modules over a finitely generated commutative ring `R = Z[y]/Q`, presented
//! as distributive expanded groups with one unary symbol per ring generator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::poly::{encode_polynomial_term, IntPoly};
use super::{AlgebraError, CayleyAlgebra, MAX_SIZE};
use crate::signature::{Identity, OperationSymbol, Signature, Term};

/// The carrier is `Z_{n1} × … × Z_{nr}`; generator `i` acts by the integer
/// matrix `actions[i]` on coordinate column vectors; `relations` is the finite
/// set `T` generating the relation ideal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RModulePresentation {
    pub moduli: Vec<usize>,
    #[serde(default)]
    pub actions: Vec<Vec<Vec<i64>>>,
    #[serde(default)]
    pub relations: Vec<IntPoly>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RModuleError {
    #[error("invalid presentation: {0}")]
    Invalid(String),
    #[error("action of y{generator} is not additive: {witness}")]
    NonAdditiveAction { generator: usize, witness: String },
    #[error("actions of y{0} and y{1} do not commute at {2}")]
    NonCommutingActions(usize, usize, String),
    #[error("relation `{relation}` does not annihilate {witness}")]
    RelationViolated { relation: String, witness: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl RModulePresentation {
    pub fn generators(&self) -> usize {
        self.actions.len()
    }

    /// Signature `{w1, …, wm}`, all unary.
    pub fn signature(&self) -> Signature {
        Signature::new(
            (1..=self.generators())
                .map(|i| OperationSymbol::new(format!("w{i}"), 1))
                .collect(),
        )
        .expect("w-names are distinct")
    }

    fn carrier_size(&self) -> Result<usize, RModuleError> {
        if self.moduli.contains(&0) {
            return Err(RModuleError::Invalid("moduli must be positive".into()));
        }
        self.moduli
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&s| s <= MAX_SIZE)
            .ok_or_else(|| RModuleError::Invalid(format!("carrier exceeds {MAX_SIZE} elements")))
    }

    fn coords(&self, mut x: usize) -> Vec<usize> {
        let mut v = vec![0; self.moduli.len()];
        for (slot, &n) in v.iter_mut().zip(&self.moduli).rev() {
            *slot = x % n;
            x /= n;
        }
        v
    }

    fn index(&self, v: &[i64]) -> usize {
        v.iter()
            .zip(&self.moduli)
            .fold(0, |acc, (&a, &n)| acc * n + a.rem_euclid(n as i64) as usize)
    }
}

/// Builds the expanded group with `w_i(b) = y_i · b` after checking that the
/// actions are additive, pairwise commuting, and annihilated by every relation.
pub fn build_r_module(pres: &RModulePresentation) -> Result<CayleyAlgebra, RModuleError> {
    let size = pres.carrier_size()?;
    let r = pres.moduli.len();
    let m = pres.generators();
    for (i, mat) in pres.actions.iter().enumerate() {
        if mat.len() != r || mat.iter().any(|row| row.len() != r) {
            return Err(RModuleError::Invalid(format!(
                "action of y{} must be a {r}×{r} matrix",
                i + 1
            )));
        }
    }
    let coords: Vec<Vec<usize>> = (0..size).map(|x| pres.coords(x)).collect();
    let add = |a: usize, b: usize| {
        let v: Vec<i64> = coords[a]
            .iter()
            .zip(&coords[b])
            .map(|(&x, &y)| (x + y) as i64)
            .collect();
        pres.index(&v)
    };
    let neg = |a: usize| {
        let v: Vec<i64> = coords[a].iter().map(|&x| -(x as i64)).collect();
        pres.index(&v)
    };
    let label = |a: usize| {
        let parts: Vec<String> = coords[a].iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(","))
    };
    let actions: Vec<Vec<usize>> = pres
        .actions
        .iter()
        .map(|mat| {
            (0..size)
                .map(|x| {
                    let v: Vec<i64> = (0..r)
                        .map(|i| (0..r).map(|j| mat[i][j] * coords[x][j] as i64).sum())
                        .collect();
                    pres.index(&v)
                })
                .collect()
        })
        .collect();

    for (i, act) in actions.iter().enumerate() {
        for a in 0..size {
            for b in 0..size {
                if act[add(a, b)] != add(act[a], act[b]) {
                    return Err(RModuleError::NonAdditiveAction {
                        generator: i + 1,
                        witness: format!("{} + {}", label(a), label(b)),
                    });
                }
            }
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            if let Some(x) = (0..size).find(|&x| actions[i][actions[j][x]] != actions[j][actions[i][x]]) {
                return Err(RModuleError::NonCommutingActions(i + 1, j + 1, label(x)));
            }
        }
    }
    for rel in &pres.relations {
        if rel.vars() > m {
            return Err(RModuleError::Invalid(format!(
                "relation `{rel}` mentions more than {m} variables"
            )));
        }
        let rel_m = rel.widen(m);
        let endos: Vec<Box<dyn Fn(usize) -> usize + '_>> = actions
            .iter()
            .map(|act| Box::new(move |x: usize| act[x]) as Box<dyn Fn(usize) -> usize>)
            .collect();
        let endo_refs: Vec<&dyn Fn(usize) -> usize> = endos.iter().map(|b| b.as_ref()).collect();
        let zero = pres.index(&vec![0; r]);
        if let Some(b) = (0..size).find(|&b| rel_m.apply(b, &endo_refs, &add, &neg, zero) != zero) {
            return Err(RModuleError::RelationViolated {
                relation: rel.to_string(),
                witness: label(b),
            });
        }
    }

    let alg = CayleyAlgebra::from_fns(pres.signature(), size, add, neg, pres.index(&vec![0; r]), |w, args| {
        actions[w][args[0]]
    })?
    .with_labels((0..size).map(label).collect());
    Ok(alg.validated()?)
}

/// The identity basis presenting `R`-modules: abelian group laws, additivity
/// of each `w_i`, pairwise commutation, and `t(w1, …, wm)(x1) = 0` for `t ∈ T`.
pub fn module_basis_identities(m: usize, relations: &[IntPoly]) -> Vec<Identity> {
    let (x1, x2, x3) = (Term::var(1), Term::var(2), Term::var(3));
    let mut ids = vec![
        Identity::new(
            Term::add(Term::add(x1.clone(), x2.clone()), x3.clone()),
            Term::add(x1.clone(), Term::add(x2.clone(), x3)),
        ),
        Identity::new(Term::add(x1.clone(), x2.clone()), Term::add(x2.clone(), x1.clone())),
        Identity::new(Term::add(x1.clone(), Term::zero()), x1.clone()),
        Identity::new(Term::sub(x1.clone(), x1.clone()), Term::zero()),
    ];
    let w = |i: usize, t: Term| Term::omega(i, vec![t]);
    for i in 0..m {
        ids.push(Identity::new(
            w(i, Term::add(x1.clone(), x2.clone())),
            Term::add(w(i, x1.clone()), w(i, x2.clone())),
        ));
    }
    for i in 0..m {
        for j in i + 1..m {
            ids.push(Identity::new(w(j, w(i, x1.clone())), w(i, w(j, x1.clone()))));
        }
    }
    for t in relations {
        ids.push(Identity::new(
            encode_polynomial_term(&t.widen(m.max(t.vars())), &x1),
            Term::zero(),
        ));
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    use super::super::sqrt2_mod4;

    fn holds(alg: &CayleyAlgebra, id: &Identity) -> bool {
        let k = id.var_count() as usize;
        let mut assignment = vec![0; k];
        let total = alg.size().pow(k as u32);
        (0..total).all(|mut code| {
            for slot in assignment.iter_mut().rev() {
                *slot = code % alg.size();
                code /= alg.size();
            }
            alg.eval_term(&id.lhs, &assignment).unwrap() == alg.eval_term(&id.rhs, &assignment).unwrap()
        })
    }

    #[test]
    fn sqrt2_instance_satisfies_module_identities() {
        let pres = sqrt2_mod4();
        let alg = build_r_module(&pres).unwrap();
        assert_eq!(alg.size(), 16);
        // direct check of the relation by brute force: w(w(b)) = 2b
        for b in alg.elements() {
            let ww = alg.omega_op(0, &[alg.omega_op(0, &[b])]);
            assert_eq!(ww, alg.add(b, b));
        }
        for id in module_basis_identities(1, &pres.relations) {
            assert!(holds(&alg, &id), "{}", id.lhs.display(alg.signature()));
        }
    }

    #[test]
    fn plain_abelian_group_when_no_generators() {
        let pres = RModulePresentation {
            moduli: vec![5],
            actions: vec![],
            relations: vec![],
        };
        let alg = build_r_module(&pres).unwrap();
        assert_eq!(alg.size(), 5);
        assert_eq!(alg.signature().omega_len(), 0);
    }

    #[test]
    fn identity_action() {
        let pres = RModulePresentation {
            moduli: vec![6],
            actions: vec![vec![vec![1]]],
            relations: vec!["y1 - 1".parse().unwrap()],
        };
        let alg = build_r_module(&pres).unwrap();
        assert!(alg.elements().all(|b| alg.omega_op(0, &[b]) == b));
    }

    #[test]
    fn violated_relation_is_reported() {
        let mut pres = sqrt2_mod4();
        pres.relations.push("y1 - 1".parse().unwrap());
        assert!(matches!(
            build_r_module(&pres),
            Err(RModuleError::RelationViolated { .. })
        ));
    }

    #[test]
    fn non_commuting_actions_are_rejected() {
        let pres = RModulePresentation {
            moduli: vec![2, 2],
            actions: vec![vec![vec![1, 1], vec![0, 1]], vec![vec![1, 0], vec![1, 1]]],
            relations: vec![],
        };
        assert!(matches!(
            build_r_module(&pres),
            Err(RModuleError::NonCommutingActions(1, 2, _))
        ));
    }

    #[test]
    fn ill_defined_action_is_not_additive() {
        // multiplication by 1/2-ish: Z_2 -> Z_4 coordinate mixing that is not well defined
        let pres = RModulePresentation {
            moduli: vec![2, 4],
            actions: vec![vec![vec![0, 0], vec![1, 0]]],
            relations: vec![],
        };
        assert!(matches!(
            build_r_module(&pres),
            Err(RModuleError::NonAdditiveAction { .. })
        ));
    }

    #[test]
    fn encoded_term_matches_endomorphism_arithmetic() {
        let alg = build_r_module(&sqrt2_mod4()).unwrap();
        let act = |x: usize| alg.omega_op(0, &[x]);
        let add = |a: usize, b: usize| alg.add(a, b);
        let neg = |a: usize| alg.neg(a);
        for text in ["y1^3 - y1 + 3", "-2*y1^2", "y1 - 1", "5"] {
            let p = text.parse::<IntPoly>().unwrap().widen(1);
            let t = encode_polynomial_term(&p, &Term::var(1));
            for b in alg.elements() {
                assert_eq!(
                    alg.eval_term(&t, &[b]).unwrap(),
                    p.apply(b, &[&act], &add, &neg, alg.zero()),
                    "{text} at {b}"
                );
            }
        }
    }
}
