use super::{QuasiTour, TourError};
use crate::csp::{cluster_outcome, Assignment, OneInThreeInstance};
use crate::tsp::TspInstance;

pub(crate) fn check_pair(g: &TspInstance, inst: &OneInThreeInstance) -> Result<(), TourError> {
    if g.variables().len() != inst.num_vars() || g.gadgets().len() != inst.clauses().len() {
        return Err(TourError::Mismatch(format!(
            "graph has {} variables and {} gadgets, instance {} and {}",
            g.variables().len(),
            g.gadgets().len(),
            inst.num_vars(),
            inst.clauses().len()
        )));
    }
    Ok(())
}

/// Re-chooses the auxiliaries of every cluster that has an all-false or
/// all-true clause or fewer satisfied clauses than possible. The result
/// leaves at most one clause per cluster unsatisfied, never more than `a`
/// does, and where the mains allow it every cluster clause has one or two
/// true literals.
pub fn repair_assignment(inst: &OneInThreeInstance, a: &Assignment) -> Result<Assignment, TourError> {
    if a.len() != inst.num_vars() {
        return Err(TourError::Csp(crate::csp::CspError::AssignmentSize {
            expected: inst.num_vars(),
            found: a.len(),
        }));
    }
    let mut bits = a.bits().to_vec();
    for (k, cl) in inst.clusters().iter().enumerate() {
        let key = |bits: &[bool]| {
            let o = cluster_outcome(inst, k, bits);
            let empty = o.true_counts.iter().filter(|&&t| t == 0).count();
            let full = o.true_counts.iter().filter(|&&t| t == 3).count();
            (o.unsat(), full, empty)
        };
        let current = key(&bits);
        let saved = cl.aux.map(|x| bits[x]);
        let mut best = (current, None);
        for combo in 0u8..8 {
            for (t, &x) in cl.aux.iter().enumerate() {
                bits[x] = combo >> t & 1 == 1;
            }
            let k2 = key(&bits);
            if k2 < best.0 {
                best = (k2, Some(combo));
            }
        }
        for (t, &x) in cl.aux.iter().enumerate() {
            bits[x] = match best.1 {
                Some(combo) => combo >> t & 1 == 1,
                None => saved[t],
            };
        }
    }
    Ok(Assignment::from_bits(bits))
}

/// The tour that uses every forced edge once and, for every variable, the
/// whole path matching its (repaired) value. Returns the tour and the
/// repaired assignment it encodes.
pub fn assignment_to_tour(
    g: &TspInstance,
    inst: &OneInThreeInstance,
    a: &Assignment,
) -> Result<(QuasiTour, Assignment), TourError> {
    check_pair(g, inst)?;
    let a = repair_assignment(inst, a)?;
    let mut t = QuasiTour::empty(g.num_edges());
    for e in g.forced_edges() {
        t.set(e, 1);
    }
    for (x, var) in g.variables().iter().enumerate() {
        for &e in var.path(a.get(x)) {
            t.set(e, 1);
        }
    }
    Ok((t, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{micro_corpus, single_cluster};
    use crate::quarters::Quarters;
    use crate::tours::{components, tour_cost, validate_quasi_tour};
    use crate::tsp::{build_tsp, ledger, BuildMode};

    #[test]
    fn every_assignment_gives_a_valid_tour_of_cost_l_plus_k() {
        for m in micro_corpus() {
            let g = build_tsp(&m.inst, BuildMode::Direct).unwrap();
            let l = ledger(&g).total();
            let n = m.inst.num_vars();
            for mask in 0u64..1 << n {
                let a = Assignment::from_mask(mask, n);
                let (t, r) = assignment_to_tour(&g, &m.inst, &a).unwrap();
                validate_quasi_tour(&g, &t).unwrap();
                let k = m.inst.count_unsat(&r).unwrap();
                assert!(k <= m.inst.count_unsat(&a).unwrap());
                let cost = tour_cost(&g, &t).unwrap();
                let excess: usize = m.inst.clauses().iter().map(|c| c.true_count(r.bits()).abs_diff(1)).sum();
                assert_eq!(cost, l + Quarters::whole(excess as i64), "{} {mask:b}", m.name);
                assert_eq!(excess, k, "{} {mask:b}", m.name);
                let empty = m.inst.clauses().iter().filter(|c| c.true_count(r.bits()) == 0).count();
                assert_eq!(components(&g, &t), 1 + empty);
            }
        }
    }

    #[test]
    fn cluster_repairs() {
        let inst = single_cluster(false);
        let g = build_tsp(&inst, BuildMode::Direct).unwrap();
        let l = ledger(&g).total();
        // mains 1,0,0 satisfy the equation; all aux true makes everything wrong
        let mut bits = vec![true, false, false, true, true, true];
        let (t, r) = assignment_to_tour(&g, &inst, &Assignment::from_bits(bits.clone())).unwrap();
        assert_eq!(inst.count_unsat(&r).unwrap(), 0);
        assert_eq!(tour_cost(&g, &t).unwrap(), l);
        // mains all false violate it: one clause lost, cost L + 1
        bits[0] = false;
        let (t, r) = assignment_to_tour(&g, &inst, &Assignment::from_bits(bits)).unwrap();
        assert_eq!(inst.count_unsat(&r).unwrap(), 1);
        assert_eq!(tour_cost(&g, &t).unwrap(), l + Quarters::ONE);
        for c in inst.clauses() {
            assert!((1..=2).contains(&c.true_count(r.bits())));
        }
        assert_eq!(components(&g, &t), 1);
    }
}
