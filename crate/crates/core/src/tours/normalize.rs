use serde::{Deserialize, Serialize};

use super::{raw_cost, validate_quasi_tour, QuasiTour, TourError};
use crate::quarters::Quarters;
use crate::tsp::TspInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// A unit edge used twice loses both copies.
    DoubledUnit,
    /// Both forced edges of a size-2 gadget doubled: one copy of each dropped.
    GadgetPair,
    /// Two or three doubled edges in a size-3 gadget.
    GadgetTriangle,
    /// Both links of a variable doubled: one copy of each replaced by the
    /// shorter of its two unit paths.
    TerminalLinks,
    /// Doubled aux–aux edge with a selected unit edge from a terminal to one
    /// of its endpoints.
    AuxAdjacent,
    /// Doubled aux–aux edge with both nearby links doubled.
    AuxLinks,
    /// Doubled aux–aux edge otherwise: the False edge is swapped into the
    /// True path so that [`Rule::AuxAdjacent`] applies.
    AuxToggle,
    /// An edge pushed to three copies drops two of them.
    Clamp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationStep {
    pub rule: Rule,
    /// The edge that triggered the rule.
    pub site: usize,
    /// One entry per copy removed or added.
    pub removed: Vec<usize>,
    pub added: Vec<usize>,
    /// Tour cost after the step.
    pub cost: Quarters,
}

/// One endpoint of an aux–aux edge seen from its own variable's True path
/// `near – vertex – partner – far`.
#[derive(Clone, Copy, Debug)]
struct AuxSide {
    near: usize,
    near_link: usize,
    near_unit: usize,
    far_unit: usize,
    middle: usize,
    false_edge: usize,
}

fn aux_side(g: &TspInstance, u: usize) -> Result<AuxSide, TourError> {
    let x = g.owner(u).ok_or_else(|| TourError::Mismatch(format!("vertex {u} has no owner")))?;
    let var = &g.variables()[x];
    if var.true_stops.len() != 2 || var.false_path.len() != 1 {
        return Err(TourError::Mismatch(format!("variable {x} does not have the auxiliary shape")));
    }
    let p = &var.true_path;
    Ok(if var.true_stops[0] == u {
        AuxSide {
            near: var.left,
            near_link: var.link_left,
            near_unit: p[0],
            far_unit: p[2],
            middle: p[1],
            false_edge: var.false_path[0],
        }
    } else {
        AuxSide {
            near: var.right,
            near_link: var.link_right,
            near_unit: p[2],
            far_unit: p[0],
            middle: p[1],
            false_edge: var.false_path[0],
        }
    })
}

struct Normalizer<'a> {
    g: &'a TspInstance,
    t: QuasiTour,
    steps: Vec<NormalizationStep>,
}

impl Normalizer<'_> {
    fn apply(&mut self, rule: Rule, site: usize, removed: Vec<usize>, added: Vec<usize>) {
        for &e in &removed {
            self.t.remove(e);
        }
        for &e in &added {
            self.t.add(e);
        }
        let cost = self.cost();
        let touched: Vec<usize> = added.clone();
        self.steps.push(NormalizationStep { rule, site, removed, added, cost });
        for e in touched {
            if self.t.get(e) == 3 {
                self.t.set(e, 1);
                let cost = self.cost();
                self.steps.push(NormalizationStep {
                    rule: Rule::Clamp,
                    site: e,
                    removed: vec![e, e],
                    added: Vec::new(),
                    cost,
                });
            }
        }
    }

    fn cost(&self) -> Quarters {
        raw_cost(self.g, &self.t)
    }

    fn doubled_unit(&mut self) -> bool {
        let Some(e) = self.g.unit_edges().find(|&e| self.t.get(e) == 2) else {
            return false;
        };
        self.apply(Rule::DoubledUnit, e, vec![e, e], Vec::new());
        true
    }

    fn gadget(&mut self) -> bool {
        for gd in self.g.gadgets() {
            let doubled: Vec<usize> = gd.forced.iter().copied().filter(|&e| self.t.get(e) == 2).collect();
            match (gd.size(), doubled.len()) {
                (2, 2) => self.apply(Rule::GadgetPair, doubled[0], doubled, Vec::new()),
                (3, 2) => {
                    let third = *gd.forced.iter().find(|e| !doubled.contains(e)).expect("three edges");
                    self.apply(Rule::GadgetTriangle, doubled[0], doubled, vec![third]);
                }
                (3, 3) => self.apply(Rule::GadgetTriangle, doubled[0], doubled, Vec::new()),
                _ => continue,
            }
            return true;
        }
        false
    }

    fn terminal_links(&mut self) -> bool {
        for var in self.g.variables() {
            if self.t.get(var.link_left) == 2 && self.t.get(var.link_right) == 2 {
                let path =
                    if var.true_path.len() < var.false_path.len() { &var.true_path } else { &var.false_path };
                self.apply(Rule::TerminalLinks, var.link_left, var.links().to_vec(), path.clone());
                return true;
            }
        }
        false
    }

    fn aux_aux(&mut self) -> Result<bool, TourError> {
        let g = self.g;
        let Some(e) = g.gadgets().iter().filter_map(|gd| gd.aux_aux()).find(|&e| self.t.get(e) == 2) else {
            return Ok(false);
        };
        let ed = g.edges()[e];
        let mut sides = [aux_side(g, ed.u)?, aux_side(g, ed.v)?];
        sides.sort_by_key(|s| s.near);
        let selected = |s: &AuxSide| self.t.get(s.near_unit) > 0;
        if let Some(i) = (0..2).find(|&i| selected(&sides[i])) {
            self.adjacent(e, sides[i], sides[1 - i]);
        } else if sides.iter().all(|s| self.t.get(s.near_link) == 2) {
            let [a, b] = sides;
            self.apply(Rule::AuxLinks, e, vec![a.near_link, b.near_link, e], vec![a.near_unit, b.near_unit]);
        } else {
            let i = (0..2).find(|&i| self.t.get(sides[i].near_link) == 1).expect("links are 1 or 2");
            let s = sides[i];
            if self.t.get(s.false_edge) != 1 || self.t.get(s.middle) != 1 {
                return Err(TourError::Mismatch(format!(
                    "aux–aux edge {e} doubled with an unexpected neighbourhood"
                )));
            }
            self.apply(Rule::AuxToggle, e, vec![s.false_edge, s.middle], vec![s.near_unit, s.far_unit]);
            self.adjacent(e, sides[i], sides[1 - i]);
        }
        Ok(true)
    }

    /// `−(t(u),u) −e +(t(v),v) +link(t(v)) +link(t(u))`.
    fn adjacent(&mut self, e: usize, u: AuxSide, v: AuxSide) {
        self.apply(Rule::AuxAdjacent, e, vec![u.near_unit, e], vec![v.near_unit, v.near_link, u.near_link]);
    }
}

/// Rewrites a valid quasi-tour until no rule applies, trying the rules in
/// the order of [`Rule`] and restarting from the first after every change.
///
/// Every step keeps the tour valid and none increases the cost; each one
/// strictly decreases `(cost, doubled aux–aux edges, doubled forced edges,
/// doubled unit edges)` lexicographically, so the loop terminates.
pub fn normalize_tour(
    g: &TspInstance,
    t: &QuasiTour,
) -> Result<(QuasiTour, Vec<NormalizationStep>), TourError> {
    validate_quasi_tour(g, t)?;
    let mut n = Normalizer { g, t: t.clone(), steps: Vec::new() };
    loop {
        if n.doubled_unit() || n.gadget() || n.terminal_links() || n.aux_aux()? {
            continue;
        }
        break;
    }
    Ok((n.t, n.steps))
}

/// The normal-form conditions `t` fails, as readable messages.
pub fn normalization_violations(g: &TspInstance, t: &QuasiTour) -> Vec<String> {
    let mut out = Vec::new();
    for e in g.unit_edges().filter(|&e| t.get(e) > 1) {
        out.push(format!("unit edge {e} used twice"));
    }
    for (k, gd) in g.gadgets().iter().enumerate() {
        let doubled = gd.forced.iter().filter(|&&e| t.get(e) > 1).count();
        if doubled > 1 {
            out.push(format!("gadget {k} has {doubled} doubled forced edges"));
        }
        if let Some(e) = gd.aux_aux().filter(|&e| t.get(e) > 1) {
            out.push(format!("aux–aux edge {e} used twice"));
        }
    }
    for (x, var) in g.variables().iter().enumerate() {
        if var.links().iter().all(|&e| t.get(e) > 1) {
            out.push(format!("variable {x} has both links doubled"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{single_cluster, single_pair};
    use crate::csp::Assignment;
    use crate::tours::{assignment_to_tour, perturb_tour, tour_cost};
    use crate::tsp::{build_tsp, BuildMode};

    fn base(inst: &crate::csp::OneInThreeInstance, bits: Vec<bool>) -> (TspInstance, QuasiTour) {
        let g = build_tsp(inst, BuildMode::Direct).unwrap();
        let (t, _) = assignment_to_tour(&g, inst, &Assignment::from_bits(bits)).unwrap();
        (g, t)
    }

    fn check(g: &TspInstance, before: &QuasiTour) -> (QuasiTour, Vec<NormalizationStep>) {
        let (t, steps) = normalize_tour(g, before).unwrap();
        validate_quasi_tour(g, &t).unwrap();
        assert!(normalization_violations(g, &t).is_empty());
        assert!(tour_cost(g, &t).unwrap() <= tour_cost(g, before).unwrap());
        (t, steps)
    }

    #[test]
    fn normal_tour_is_fixpoint() {
        let (g, t) = base(&single_pair(), vec![true, false]);
        let (n, steps) = check(&g, &t);
        assert_eq!(n, t);
        assert!(steps.is_empty());
    }

    #[test]
    fn doubled_unit_edge_removed() {
        let (g, t) = base(&single_pair(), vec![true, false]);
        let mut d = t.clone();
        d.set(g.variables()[0].false_path[0], 2);
        let (n, steps) = check(&g, &d);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].rule, Rule::DoubledUnit);
        assert_eq!(n, t);
    }

    #[test]
    fn gadget_rules_are_strict() {
        let (g, t) = base(&single_pair(), vec![true, false]);
        let mut d = t.clone();
        for &e in &g.gadgets()[0].forced {
            d.set(e, 2);
        }
        let (n, steps) = check(&g, &d);
        assert_eq!(steps[0].rule, Rule::GadgetPair);
        assert!(steps[0].cost < tour_cost(&g, &d).unwrap());
        assert_eq!(n, t);

        let (g, t) = base(&single_cluster(false), vec![true, false, false, false, false, false]);
        let mut d = t.clone();
        for &e in &g.gadgets()[1].forced {
            d.set(e, 2);
        }
        let (n, steps) = check(&g, &d);
        assert_eq!(steps[0].rule, Rule::GadgetTriangle);
        assert!(steps[0].added.is_empty());
        assert_eq!(n, t);
    }

    #[test]
    fn doubled_links_replaced_by_path() {
        let inst = single_cluster(false);
        let (g, t) = base(&inst, vec![true, false, false, false, false, false]);
        for var in g.variables() {
            let on_true = var.true_path.iter().all(|&e| t.get(e) == 1);
            let selected = var.path(on_true);
            let mut d = t.clone();
            for &e in selected {
                d.remove(e);
            }
            d.add(var.link_left);
            d.add(var.link_right);
            let (n, steps) = check(&g, &d);
            assert_eq!(steps[0].rule, Rule::TerminalLinks);
            if selected == var.path(var.true_path.len() < var.false_path.len()) {
                assert_eq!(n, t);
            }
        }
    }

    #[test]
    fn every_rule_fires_under_perturbation() {
        use rand::SeedableRng;
        use std::collections::HashSet;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut fired = HashSet::new();
        for inst in [single_cluster(false), single_cluster(true), single_pair()] {
            let g = build_tsp(&inst, BuildMode::Direct).unwrap();
            for mask in 0u64..1 << inst.num_vars() {
                let (t, _) =
                    assignment_to_tour(&g, &inst, &Assignment::from_mask(mask, inst.num_vars())).unwrap();
                for _ in 0..100 {
                    let mut p = perturb_tour(&g, &t, &mut rng);
                    for _ in 0..3 {
                        p = perturb_tour(&g, &p, &mut rng);
                    }
                    let (_, steps) = check(&g, &p);
                    fired.extend(steps.iter().map(|s| s.rule));
                }
            }
        }
        for rule in [
            Rule::DoubledUnit,
            Rule::GadgetPair,
            Rule::GadgetTriangle,
            Rule::TerminalLinks,
            Rule::AuxAdjacent,
            Rule::AuxLinks,
            Rule::AuxToggle,
            Rule::Clamp,
        ] {
            assert!(fired.contains(&rule), "{rule:?} never fired: {fired:?}");
        }
    }

    /// Forced edges once plus each variable's path for `bits`, unrepaired.
    fn raw_tour(g: &TspInstance, bits: &[bool]) -> QuasiTour {
        let mut t = QuasiTour::empty(g.num_edges());
        for e in g.forced_edges() {
            t.set(e, 1);
        }
        for (x, var) in g.variables().iter().enumerate() {
            for &e in var.path(bits[x]) {
                t.set(e, 1);
            }
        }
        t
    }

    #[test]
    fn aux_aux_with_both_links_doubled() {
        let inst = single_cluster(false);
        let g = build_tsp(&inst, BuildMode::Direct).unwrap();
        let t = raw_tour(&g, &[false, false, false, true, true, true]);
        validate_quasi_tour(&g, &t).unwrap();
        for gd in g.gadgets() {
            let e = gd.aux_aux().unwrap();
            let ed = g.edges()[e];
            let sides = [aux_side(&g, ed.u).unwrap(), aux_side(&g, ed.v).unwrap()];
            let mut d = t.clone();
            d.add(e);
            for s in &sides {
                d.remove(s.near_unit);
                d.add(s.near_link);
            }
            assert_eq!(tour_cost(&g, &d).unwrap(), tour_cost(&g, &t).unwrap());
            let (n, steps) = check(&g, &d);
            assert_eq!(steps[0].rule, Rule::AuxLinks);
            assert_eq!(n, t);
        }
    }

    fn first_aux_aux(g: &TspInstance) -> (usize, AuxSide, AuxSide, [usize; 2]) {
        let e = g.gadgets()[0].aux_aux().unwrap();
        let ed = g.edges()[e];
        let owners = [g.owner(ed.u).unwrap(), g.owner(ed.v).unwrap()];
        (e, aux_side(g, ed.u).unwrap(), aux_side(g, ed.v).unwrap(), owners)
    }

    #[test]
    fn aux_aux_adjacent() {
        let g = build_tsp(&single_cluster(false), BuildMode::Direct).unwrap();
        let (e, su, sv, [pu, _]) = first_aux_aux(&g);
        let mut bits = vec![false; 6];
        bits[pu] = true;
        let t = raw_tour(&g, &bits);
        let mut d = t.clone();
        d.add(e);
        d.add(sv.near_unit);
        d.add(sv.near_link);
        d.remove(su.near_unit);
        d.add(su.near_link);
        let (n, steps) = check(&g, &d);
        assert_eq!(steps[0].rule, Rule::AuxAdjacent);
        assert_eq!(steps[0].cost, tour_cost(&g, &d).unwrap());
        assert!(steps.iter().filter(|s| s.rule == Rule::Clamp).count() == 2);
        assert_eq!(n, t);
    }

    #[test]
    fn aux_aux_toggle() {
        let g = build_tsp(&single_cluster(false), BuildMode::Direct).unwrap();
        let (e, su, sv, _) = first_aux_aux(&g);
        let t = raw_tour(&g, &[false; 6]);
        let mut d = t.clone();
        d.add(e);
        d.add(su.middle);
        d.add(su.far_unit);
        d.remove(su.false_edge);
        d.add(su.near_link);
        d.add(sv.middle);
        d.add(sv.far_unit);
        // the link at v's far terminal
        let far_link = {
            let var = &g.variables()[g.owner(g.edges()[sv.far_unit].u).unwrap()];
            if sv.near_link == var.link_left {
                var.link_right
            } else {
                var.link_left
            }
        };
        d.add(far_link);
        validate_quasi_tour(&g, &d).unwrap();
        let (_, steps) = check(&g, &d);
        assert_eq!(steps[0].rule, Rule::AuxToggle);
        assert_eq!(steps[1].rule, Rule::AuxAdjacent);
    }
}
