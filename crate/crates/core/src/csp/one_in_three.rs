use serde::{Deserialize, Serialize};

use super::{Assignment, CspError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Copies `x(i,j)` of an original variable.
    Main,
    /// Checkers `y(i,k)`.
    Checker,
    /// Cluster auxiliaries `a(k,t)`.
    Aux,
}

impl Role {
    pub fn letter(self) -> char {
        match self {
            Role::Main => 'M',
            Role::Checker => 'C',
            Role::Aux => 'A',
        }
    }

    pub fn from_letter(c: &str) -> Option<Role> {
        match c {
            "M" => Some(Role::Main),
            "C" => Some(Role::Checker),
            "A" => Some(Role::Aux),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub role: Role,
    /// Cloud (0-based source variable) for M/C, cluster index for A.
    pub owner: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }

    pub fn value(&self, bits: &[bool]) -> bool {
        bits[self.var] == self.positive
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub literals: Vec<Literal>,
    /// `(cluster, slot)` for size-3 clauses.
    pub cluster: Option<(usize, usize)>,
}

impl Clause {
    pub fn true_count(&self, bits: &[bool]) -> usize {
        self.literals.iter().filter(|l| l.value(bits)).count()
    }

    pub fn is_satisfied(&self, bits: &[bool]) -> bool {
        self.true_count(bits) == 1
    }
}

/// Auxiliary pair used by each clause slot of a cluster:
/// `(m1 ∨ a1 ∨ a2)`, `(m2 ∨ a2 ∨ a3)`, `(m3 ∨ a1 ∨ a3)`.
pub const CLUSTER_AUX_PAIRS: [[usize; 2]; 3] = [[0, 1], [1, 2], [0, 2]];

/// The three clauses encoding one size-3 equation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub clauses: [usize; 3],
    pub mains: [usize; 3],
    pub aux: [usize; 3],
    /// The first clause carries the negated main literal (equation rhs 0).
    pub negated: bool,
}

impl Cluster {
    /// Parity the mains must reach for the cluster to be fully satisfiable.
    pub fn rhs(&self) -> bool {
        !self.negated
    }

    pub fn equation_satisfied(&self, bits: &[bool]) -> bool {
        (bits[self.mains[0]] ^ bits[self.mains[1]] ^ bits[self.mains[2]]) == self.rhs()
    }
}

/// 1-in-3-SAT instance with the main/checker/auxiliary structure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneInThreeInstance {
    variables: Vec<Variable>,
    clauses: Vec<Clause>,
    clusters: Vec<Cluster>,
}

/// True-literal counts of a cluster's clauses under some assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterOutcome {
    pub true_counts: [usize; 3],
}

impl ClusterOutcome {
    pub fn unsat(&self) -> usize {
        self.true_counts.iter().filter(|&&t| t != 1).count()
    }

    /// Sum of `|t - 1|`: the tour surcharge the cluster's gadgets incur.
    pub fn excess(&self) -> usize {
        self.true_counts.iter().map(|&t| t.abs_diff(1)).sum()
    }

    pub fn unsat_slots(self) -> impl Iterator<Item = usize> {
        (0..3).filter(move |&s| self.true_counts[s] != 1)
    }
}

pub fn cluster_outcome(inst: &OneInThreeInstance, cluster: usize, bits: &[bool]) -> ClusterOutcome {
    let cl = &inst.clusters[cluster];
    let mut true_counts = [0; 3];
    for (slot, &c) in cl.clauses.iter().enumerate() {
        true_counts[slot] = inst.clauses[c].true_count(bits);
    }
    ClusterOutcome { true_counts }
}

impl OneInThreeInstance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, role: Role, owner: usize) -> usize {
        self.variables.push(Variable { name: name.into(), role, owner });
        self.variables.len() - 1
    }

    /// Adds the clause `(x ∨ y)` with both literals positive.
    pub fn add_pair_clause(&mut self, x: usize, y: usize) -> usize {
        self.clauses.push(Clause { literals: vec![Literal::pos(x), Literal::pos(y)], cluster: None });
        self.clauses.len() - 1
    }

    /// Adds a cluster over `mains` together with three fresh auxiliaries
    /// `a(k,1..3)`. Returns the cluster index.
    pub fn add_cluster(&mut self, mains: [usize; 3], negated: bool) -> usize {
        let k = self.clusters.len();
        let aux = [1, 2, 3].map(|t| self.add_var(format!("a({},{t})", k + 1), Role::Aux, k));
        let mut clauses = [0; 3];
        for slot in 0..3 {
            let main =
                if slot == 0 && negated { Literal::neg(mains[slot]) } else { Literal::pos(mains[slot]) };
            let [p, q] = CLUSTER_AUX_PAIRS[slot];
            self.clauses.push(Clause {
                literals: vec![main, Literal::pos(aux[p]), Literal::pos(aux[q])],
                cluster: Some((k, slot)),
            });
            clauses[slot] = self.clauses.len() - 1;
        }
        self.clusters.push(Cluster { clauses, mains, aux, negated });
        k
    }

    /// Assembles an instance from parsed parts; clusters are recovered from
    /// the clause annotations and then checked with [`Self::validate`].
    pub fn from_parts(variables: Vec<Variable>, clauses: Vec<Clause>) -> Result<Self, CspError> {
        let mut slots: Vec<[Option<usize>; 3]> = Vec::new();
        for (c, clause) in clauses.iter().enumerate() {
            for l in &clause.literals {
                if l.var >= variables.len() {
                    return Err(CspError::VariableOutOfRange { var: l.var, num_vars: variables.len() });
                }
            }
            if let Some((k, slot)) = clause.cluster {
                if slot > 2 || clause.literals.len() != 3 {
                    return Err(CspError::Malformed(format!("clause {c} has a bad cluster slot")));
                }
                if slots.len() <= k {
                    slots.resize(k + 1, [None; 3]);
                }
                if slots[k][slot].replace(c).is_some() {
                    return Err(CspError::Malformed(format!("cluster {} slot {} twice", k + 1, slot + 1)));
                }
            } else if clause.literals.len() != 2 {
                return Err(CspError::Malformed(format!("clause {c} of size 3 outside a cluster")));
            }
        }
        let mut clusters = Vec::with_capacity(slots.len());
        for (k, s) in slots.iter().enumerate() {
            let [Some(c0), Some(c1), Some(c2)] = *s else {
                return Err(CspError::Malformed(format!("cluster {} is incomplete", k + 1)));
            };
            let lits = [c0, c1, c2].map(|c| &clauses[c].literals);
            let mains = [lits[0][0].var, lits[1][0].var, lits[2][0].var];
            let aux = [lits[0][1].var, lits[0][2].var, lits[1][2].var];
            clusters.push(Cluster { clauses: [c0, c1, c2], mains, aux, negated: !lits[0][0].positive });
        }
        let inst = OneInThreeInstance { variables, clauses, clusters };
        inst.validate()?;
        Ok(inst)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Clause indices containing each variable, in clause order.
    pub fn occurrence_lists(&self) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); self.variables.len()];
        for (c, clause) in self.clauses.iter().enumerate() {
            for l in &clause.literals {
                occ[l.var].push(c);
            }
        }
        occ
    }

    /// Structural checks required by the TSP construction: size-2 clauses
    /// are two positive M/C literals, size-3 clauses form complete clusters
    /// with three distinct M mains and private auxiliaries, M/C variables
    /// occur at most 5 times and A variables exactly twice.
    pub fn validate(&self) -> Result<(), CspError> {
        let bad = |msg: String| Err(CspError::Malformed(msg));
        for (c, clause) in self.clauses.iter().enumerate() {
            let vars: Vec<usize> = clause.literals.iter().map(|l| l.var).collect();
            if (1..vars.len()).any(|i| vars[..i].contains(&vars[i])) {
                return bad(format!("clause {c} repeats a variable"));
            }
            match (clause.literals.len(), clause.cluster) {
                (2, None) => {
                    for l in &clause.literals {
                        if !l.positive || self.variables[l.var].role == Role::Aux {
                            return bad(format!("clause {c} must hold two positive M/C literals"));
                        }
                    }
                }
                (3, Some((k, slot))) => {
                    let Some(cl) = self.clusters.get(k) else {
                        return bad(format!("clause {c} names missing cluster {k}"));
                    };
                    if cl.clauses[slot] != c {
                        return bad(format!("clause {c} is not slot {slot} of cluster {k}"));
                    }
                }
                _ => return bad(format!("clause {c} has the wrong shape")),
            }
        }
        for (k, cl) in self.clusters.iter().enumerate() {
            let [m0, m1, m2] = cl.mains;
            if m0 == m1 || m1 == m2 || m0 == m2 {
                return bad(format!("cluster {k} repeats a main variable"));
            }
            for (slot, &[p, q]) in CLUSTER_AUX_PAIRS.iter().enumerate() {
                let lits = &self.clauses[cl.clauses[slot]].literals;
                let main_ok = lits[0].var == cl.mains[slot]
                    && lits[0].positive == !(slot == 0 && cl.negated)
                    && self.variables[cl.mains[slot]].role == Role::Main;
                let aux_ok = lits[1] == Literal::pos(cl.aux[p]) && lits[2] == Literal::pos(cl.aux[q]);
                if !main_ok || !aux_ok {
                    return bad(format!("cluster {k} slot {slot} has the wrong layout"));
                }
            }
            for &a in &cl.aux {
                let v = &self.variables[a];
                if v.role != Role::Aux || v.owner != k {
                    return bad(format!("{} is not an auxiliary of cluster {k}", v.name));
                }
            }
        }
        for (v, occ) in self.occurrence_lists().iter().enumerate() {
            let var = &self.variables[v];
            let ok = match var.role {
                Role::Main | Role::Checker => occ.len() <= 5,
                Role::Aux => occ.len() == 2,
            };
            if !ok {
                return bad(format!("{} occurs {} times", var.name, occ.len()));
            }
        }
        Ok(())
    }

    /// Additional invariants of pipeline output: every size-2 clause joins an
    /// M and a C variable of the same cloud, M variables occur 4+1 times, C
    /// variables 5 times, and the totals are 15m clauses over 8.4m variables.
    pub fn validate_pipeline(&self) -> Result<(), CspError> {
        self.validate()?;
        let bad = |msg: String| Err(CspError::Malformed(msg));
        let mut occ2 = vec![0usize; self.variables.len()];
        let mut occ3 = vec![0usize; self.variables.len()];
        for clause in &self.clauses {
            if clause.cluster.is_none() {
                let (x, y) =
                    (&self.variables[clause.literals[0].var], &self.variables[clause.literals[1].var]);
                if x.role != Role::Main || y.role != Role::Checker || x.owner != y.owner {
                    return bad(format!("size-2 clause ({} ∨ {}) is not M–C within a cloud", x.name, y.name));
                }
            }
            for l in &clause.literals {
                if clause.cluster.is_some() {
                    occ3[l.var] += 1;
                } else {
                    occ2[l.var] += 1;
                }
            }
        }
        for (v, var) in self.variables.iter().enumerate() {
            let ok = match var.role {
                Role::Main => occ2[v] == 4 && occ3[v] == 1,
                Role::Checker => occ2[v] == 5 && occ3[v] == 0,
                Role::Aux => true,
            };
            if !ok {
                return bad(format!("{} has occurrence pattern {}+{}", var.name, occ2[v], occ3[v]));
            }
        }
        let m = self.clusters.len();
        if 5 * self.variables.len() != 42 * m || self.clauses.len() != 15 * m {
            return bad(format!(
                "{} variables and {} clauses for m = {m}",
                self.variables.len(),
                self.clauses.len()
            ));
        }
        Ok(())
    }

    pub fn count_unsat(&self, a: &Assignment) -> Result<usize, CspError> {
        a.check_len(self.variables.len())?;
        Ok(self.clauses.iter().filter(|c| !c.is_satisfied(a.bits())).count())
    }
}

/// Best auxiliary bits for one cluster under the ordering
/// (unsatisfied clauses, sacrificed slot differs from `prefer`, excess).
fn best_aux(inst: &OneInThreeInstance, k: usize, bits: &mut [bool], prefer: Option<usize>) {
    let aux = inst.clusters[k].aux;
    let mut best: Option<((usize, usize, usize), u8)> = None;
    for combo in 0u8..8 {
        for (t, &a) in aux.iter().enumerate() {
            bits[a] = combo >> t & 1 == 1;
        }
        let out = cluster_outcome(inst, k, bits);
        let unsat = out.unsat();
        let off_pref = match prefer {
            Some(s) if unsat > 0 => usize::from(!(unsat == 1 && out.true_counts[s] != 1)),
            _ => 0,
        };
        let key = (unsat, off_pref, out.excess());
        if best.is_none_or(|(b, _)| key < b) {
            best = Some((key, combo));
        }
    }
    let (_, combo) = best.expect("eight candidates");
    for (t, &a) in aux.iter().enumerate() {
        bits[a] = combo >> t & 1 == 1;
    }
}

/// Chooses every cluster's auxiliaries to minimise its unsatisfied clauses
/// given the M/C bits of `a` (aux bits of `a` are ignored).
///
/// When the originating equation is violated one clause must be given up;
/// `prefer(k)` names the slot of cluster `k` to sacrifice, if any.
pub fn extend_aux_with(
    inst: &OneInThreeInstance,
    a: &Assignment,
    prefer: impl Fn(usize) -> Option<usize>,
) -> Result<Assignment, CspError> {
    a.check_len(inst.num_vars())?;
    let mut bits = a.bits().to_vec();
    for k in 0..inst.clusters.len() {
        best_aux(inst, k, &mut bits, prefer(k));
    }
    Ok(Assignment::from_bits(bits))
}

/// [`extend_aux_with`] sacrificing the lowest clause index of each violated
/// cluster.
pub fn extend_aux_optimal(inst: &OneInThreeInstance, a: &Assignment) -> Result<Assignment, CspError> {
    extend_aux_with(inst, a, |_| Some(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cluster_instance(negated: bool) -> OneInThreeInstance {
        let mut inst = OneInThreeInstance::new();
        let m = [0, 1, 2].map(|i| inst.add_var(format!("x({},1)", i + 1), Role::Main, i));
        inst.add_cluster(m, negated);
        inst
    }

    #[test]
    fn pair_clause_is_exclusive_or() {
        let mut inst = OneInThreeInstance::new();
        let x = inst.add_var("x", Role::Main, 0);
        let y = inst.add_var("y", Role::Checker, 0);
        inst.add_pair_clause(x, y);
        assert_eq!(inst.count_unsat(&Assignment::from_bits(vec![true, false])).unwrap(), 0);
        assert_eq!(inst.count_unsat(&Assignment::from_bits(vec![true, true])).unwrap(), 1);
        assert_eq!(inst.count_unsat(&Assignment::from_bits(vec![false, false])).unwrap(), 1);
        inst.validate().unwrap();
    }

    #[test]
    fn cluster_gadget_tracks_equation_for_every_main_pattern() {
        for negated in [false, true] {
            let inst = cluster_instance(negated);
            inst.validate().unwrap();
            let cl = &inst.clusters()[0];
            for mains in 0u64..8 {
                let a = Assignment::from_mask(mains, 6);
                let sat = cl.equation_satisfied(a.bits());
                // enumerate all aux choices directly
                let best = (0u64..8)
                    .map(|aux| inst.count_unsat(&Assignment::from_mask(mains | aux << 3, 6)).unwrap())
                    .min()
                    .unwrap();
                assert_eq!(best, usize::from(!sat), "negated={negated} mains={mains:03b}");
                let ext = extend_aux_optimal(&inst, &a).unwrap();
                assert_eq!(inst.count_unsat(&ext).unwrap(), best);
                // some optimal choice leaves every clause with one or two true literals
                let repairable = (0u64..8).any(|aux| {
                    let bits = Assignment::from_mask(mains | aux << 3, 6);
                    let out = cluster_outcome(&inst, 0, bits.bits());
                    out.unsat() == best && out.true_counts.iter().all(|&t| t == 1 || t == 2)
                });
                assert!(repairable, "negated={negated} mains={mains:03b}");
                if !sat {
                    let mut sacrificed: Vec<usize> = (0..3)
                        .map(|s| {
                            let e = extend_aux_with(&inst, &a, |_| Some(s)).unwrap();
                            let o = cluster_outcome(&inst, 0, e.bits());
                            assert_eq!(o.unsat(), 1);
                            o.unsat_slots().next().unwrap()
                        })
                        .collect();
                    sacrificed.sort();
                    assert_eq!(sacrificed, vec![0, 1, 2]);
                }
            }
        }
    }

    #[test]
    fn empty_cluster_list_passes_through() {
        let mut inst = OneInThreeInstance::new();
        let x = inst.add_var("x", Role::Main, 0);
        let y = inst.add_var("y", Role::Checker, 0);
        inst.add_pair_clause(x, y);
        let a = Assignment::from_bits(vec![true, true]);
        assert_eq!(extend_aux_optimal(&inst, &a).unwrap(), a);
    }

    #[test]
    fn from_parts_recovers_clusters() {
        let inst = cluster_instance(true);
        let again =
            OneInThreeInstance::from_parts(inst.variables().to_vec(), inst.clauses().to_vec()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn validate_rejects_overused_main() {
        let mut inst = OneInThreeInstance::new();
        let x = inst.add_var("x", Role::Main, 0);
        for i in 0..6 {
            let y = inst.add_var(format!("y{i}"), Role::Checker, 0);
            inst.add_pair_clause(x, y);
        }
        assert!(inst.validate().is_err());
    }
}
