//! Hand-made and seeded instances used by tests, benches and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::{Assignment, CspError, Lin2Equation, Lin2System, OneInThreeInstance, Role};

/// A named direct-build instance small enough for the exact oracles.
#[derive(Clone, Debug)]
pub struct MicroInstance {
    pub name: &'static str,
    pub inst: OneInThreeInstance,
}

/// Size-2 clauses over fresh variables named by the letters used in
/// `clauses`; the first letter of each clause is a main variable and the
/// rest are checkers unless they already exist.
fn pairs(vars: &[(&str, Role)], clauses: &[(&str, &str)]) -> OneInThreeInstance {
    let mut inst = OneInThreeInstance::new();
    for &(name, role) in vars {
        inst.add_var(name, role, 0);
    }
    for &(x, y) in clauses {
        let (x, y) = (inst.var_index(x).unwrap(), inst.var_index(y).unwrap());
        inst.add_pair_clause(x, y);
    }
    inst
}

const M: Role = Role::Main;
const C: Role = Role::Checker;

/// `(x ∨ y)`.
pub fn single_pair() -> OneInThreeInstance {
    pairs(&[("x", M), ("y", C)], &[("x", "y")])
}

/// `(x ∨ y) ∧ (x ∨ z)`, the two-gadget example with a shared variable.
pub fn figure_one() -> OneInThreeInstance {
    pairs(&[("x", M), ("y", C), ("z", C)], &[("x", "y"), ("x", "z")])
}

/// One cluster over three fresh main variables; `negated` for right-hand
/// side 0.
pub fn single_cluster(negated: bool) -> OneInThreeInstance {
    let mut inst = OneInThreeInstance::new();
    let m = [0, 1, 2].map(|i| inst.add_var(format!("x({},1)", i + 1), Role::Main, i));
    inst.add_cluster(m, negated);
    inst
}

pub fn micro_corpus() -> Vec<MicroInstance> {
    let xy = [("x", M), ("y", C)];
    vec![
        MicroInstance { name: "empty", inst: OneInThreeInstance::new() },
        MicroInstance { name: "pair", inst: single_pair() },
        MicroInstance { name: "figure-one", inst: figure_one() },
        MicroInstance {
            name: "shared-checker",
            inst: pairs(&[("x", M), ("y", C), ("z", M)], &[("x", "y"), ("z", "y")]),
        },
        MicroInstance { name: "pair-x2", inst: pairs(&xy, &[("x", "y"); 2]) },
        MicroInstance { name: "pair-x3", inst: pairs(&xy, &[("x", "y"); 3]) },
        MicroInstance { name: "pair-x4", inst: pairs(&xy, &[("x", "y"); 4]) },
        MicroInstance {
            name: "disjoint-pairs",
            inst: pairs(&[("x", M), ("y", C), ("z", M), ("w", C)], &[("x", "y"), ("z", "w")]),
        },
        MicroInstance {
            name: "double-and-branch",
            inst: pairs(&[("x", M), ("y", C), ("z", C)], &[("x", "y"), ("x", "y"), ("x", "z")]),
        },
        MicroInstance {
            name: "isolated-variable",
            inst: pairs(&[("x", M), ("y", M), ("z", C)], &[("y", "z")]),
        },
        MicroInstance {
            name: "odd-cycle",
            inst: pairs(&[("x", M), ("y", C), ("z", M)], &[("x", "y"), ("y", "z"), ("x", "z")]),
        },
        MicroInstance { name: "cluster-rhs1", inst: single_cluster(false) },
        MicroInstance { name: "cluster-rhs0", inst: single_cluster(true) },
    ]
}

/// A random E3-LIN2 system on `n ≥ 3` variables with `m` equations, each
/// over three distinct variables. With `planted`, the right-hand sides are
/// chosen so a random hidden assignment satisfies every equation, and that
/// assignment is returned.
pub fn random_lin2(
    n: usize,
    m: usize,
    seed: u64,
    planted: bool,
) -> Result<(Lin2System, Option<Assignment>), CspError> {
    if n < 3 {
        return Err(CspError::Malformed(format!("need at least 3 variables, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let mut eqs = Vec::with_capacity(m);
    for _ in 0..m {
        let vars = rand::seq::index::sample(&mut rng, n, 3).into_vec();
        let rhs = if planted { hidden[vars[0]] ^ hidden[vars[1]] ^ hidden[vars[2]] } else { rng.gen() };
        eqs.push(Lin2Equation::new(vars[0], vars[1], vars[2], rhs));
    }
    let sys = Lin2System::new(n, eqs)?;
    Ok((sys, planted.then(|| Assignment::from_bits(hidden))))
}

/// `x1 + x2 + x3 = 1`, which pads to the m = 5 toy pipeline.
pub fn planted_single_equation() -> Lin2System {
    Lin2System::new(3, vec![Lin2Equation::new(0, 1, 2, true)]).expect("valid")
}

/// Small original systems for end-to-end transport checks, each on at most
/// six variables.
pub fn transport_toys() -> Vec<(&'static str, Lin2System)> {
    let sys = |n, eqs: &[(usize, usize, usize, bool)]| {
        Lin2System::new(n, eqs.iter().map(|&(a, b, c, r)| Lin2Equation::new(a, b, c, r)).collect())
            .expect("valid")
    };
    vec![
        ("single-rhs1", sys(3, &[(0, 1, 2, true)])),
        ("single-rhs0", sys(3, &[(0, 1, 2, false)])),
        ("contradiction", sys(3, &[(0, 1, 2, true), (0, 1, 2, false)])),
        ("disjoint", sys(6, &[(0, 1, 2, true), (3, 4, 5, false)])),
        ("overlap", sys(5, &[(0, 1, 2, true), (2, 3, 4, true)])),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_valid() {
        for m in micro_corpus() {
            m.inst.validate().unwrap_or_else(|e| panic!("{}: {e}", m.name));
        }
    }

    #[test]
    fn planted_is_satisfied() {
        for seed in 0..20 {
            let (sys, a) = random_lin2(6, 8, seed, true).unwrap();
            assert_eq!(sys.count_unsat(&a.unwrap()).unwrap(), 0);
        }
        assert_eq!(random_lin2(5, 4, 3, false).unwrap().0, random_lin2(5, 4, 3, false).unwrap().0);
        assert!(random_lin2(2, 1, 0, false).is_err());
    }
}
