use std::fmt;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::construct::check_pair;
use super::{components, normalization_violations, tour_cost, validate_quasi_tour, QuasiTour, TourError};
use crate::csp::{cluster_outcome, Assignment, OneInThreeInstance, Role};
use crate::quarters::Quarters;
use crate::tsp::{ledger, EdgeTag, TspInstance};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableHonesty {
    /// Forced edges involving the variable that the tour uses twice.
    pub doubled: Vec<usize>,
    pub honest: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HonestyReport {
    pub variables: Vec<VariableHonesty>,
    /// Doubled forced gadget edges.
    pub gadget_doubled: Vec<usize>,
    /// Doubled terminal links.
    pub link_doubled: Vec<usize>,
}

impl HonestyReport {
    pub fn is_honest(&self, x: usize) -> bool {
        self.variables[x].honest
    }

    pub fn all_honest(&self) -> bool {
        self.variables.iter().all(|v| v.honest)
    }
}

/// Per-variable doubled forced edges of a normalized tour. Every count must
/// be even.
pub fn honesty(g: &TspInstance, t: &QuasiTour) -> Result<HonestyReport, TourError> {
    validate_quasi_tour(g, t)?;
    if let Some(v) = normalization_violations(g, t).into_iter().next() {
        return Err(TourError::NotNormalized(v));
    }
    let mut variables = vec![VariableHonesty { doubled: Vec::new(), honest: true }; g.variables().len()];
    let (mut gadget_doubled, mut link_doubled) = (Vec::new(), Vec::new());
    for e in g.forced_edges().filter(|&e| t.get(e) == 2) {
        let ed = g.edges()[e];
        if ed.tag == EdgeTag::TerminalLink {
            link_doubled.push(e);
        } else {
            gadget_doubled.push(e);
        }
        let mut owners: Vec<usize> = [ed.u, ed.v].iter().filter_map(|&v| g.owner(v)).collect();
        owners.dedup();
        for x in owners {
            variables[x].doubled.push(e);
            variables[x].honest = false;
        }
    }
    for (var, v) in variables.iter().enumerate() {
        if v.doubled.len() % 2 == 1 {
            return Err(TourError::OddParity { var, count: v.doubled.len() });
        }
    }
    Ok(HonestyReport { variables, gadget_doubled, link_doubled })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractionMode {
    /// Independent ChaCha bits per cloud from the seed.
    Randomized(u64),
    /// Cloud bits fixed one at a time in ascending cloud order by exact
    /// conditional expectation; ties go to 0.
    Derandomized,
}

impl fmt::Display for ExtractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractionMode::Randomized(seed) => write!(f, "randomized({seed})"),
            ExtractionMode::Derandomized => write!(f, "derandomized"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreditLedger {
    pub mode: ExtractionMode,
    /// Credit per I₃ variable; zero for honest and auxiliary variables.
    pub credits: Vec<Quarters>,
    /// `Σ_{E_G} w + Σ_{E_S} (w − 1/2)`.
    pub bound: Quarters,
    /// Expected number of unsatisfied clauses with a dishonest variable,
    /// over uniform cloud bits.
    pub expected_dishonest_unsat: Ratio<i64>,
    /// The bit chosen for each cloud that has a dishonest variable.
    pub cloud_bits: Vec<(usize, bool)>,
}

impl CreditLedger {
    pub fn total(&self) -> Quarters {
        self.credits.iter().copied().sum()
    }
}

struct Extractor<'a> {
    inst: &'a OneInThreeInstance,
    /// Values read from the tour (meaningful for honest variables).
    read: Vec<bool>,
    dishonest: Vec<bool>,
}

enum Unit {
    Pair(usize),
    Cluster(usize),
}

impl Extractor<'_> {
    fn clauses_of(&self, u: &Unit) -> Vec<usize> {
        match *u {
            Unit::Pair(c) => vec![c],
            Unit::Cluster(k) => self.inst.clusters()[k].clauses.to_vec(),
        }
    }

    fn clouds_of(&self, u: &Unit) -> Vec<usize> {
        let vars = self.inst.variables();
        let mut out: Vec<usize> = self
            .clauses_of(u)
            .iter()
            .flat_map(|&c| self.inst.clauses()[c].literals.iter().map(|l| l.var))
            .filter(|&x| self.dishonest[x] && vars[x].role != Role::Aux)
            .map(|x| vars[x].owner)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn set_mc(&self, bits: &mut [bool], x: usize, cloud_bit: impl Fn(usize) -> bool) {
        let var = &self.inst.variables()[x];
        bits[x] = if !self.dishonest[x] {
            self.read[x]
        } else {
            match var.role {
                Role::Main => cloud_bit(var.owner),
                Role::Checker => !cloud_bit(var.owner),
                Role::Aux => unreachable!("aux handled per cluster"),
            }
        };
    }

    /// Satisfy the cluster if the mains allow it, otherwise give up the clause
    /// of the lowest-id dishonest main, otherwise keep the tour's auxiliaries.
    fn set_aux(&self, k: usize, bits: &mut [bool]) {
        let cl = &self.inst.clusters()[k];
        let sacrifice = if cl.equation_satisfied(bits) {
            None
        } else {
            match (0..3).filter(|&s| self.dishonest[cl.mains[s]]).min_by_key(|&s| cl.mains[s]) {
                Some(s) => Some(s),
                None => {
                    for &a in &cl.aux {
                        bits[a] = self.read[a];
                    }
                    return;
                }
            }
        };
        let mut best: Option<((usize, usize), u8)> = None;
        for combo in 0u8..8 {
            for (i, &a) in cl.aux.iter().enumerate() {
                bits[a] = combo >> i & 1 == 1;
            }
            let o = cluster_outcome(self.inst, k, bits);
            let off = match sacrifice {
                Some(s) => usize::from(o.true_counts[s] == 1),
                None => 0,
            };
            let key = (o.unsat(), off);
            if best.is_none_or(|(b, _)| key < b) {
                best = Some((key, combo));
            }
        }
        let (_, combo) = best.expect("eight candidates");
        for (i, &a) in cl.aux.iter().enumerate() {
            bits[a] = combo >> i & 1 == 1;
        }
    }

    /// Unsatisfied clauses of `u` (only those with a dishonest variable when
    /// `dishonest_only`) under the given cloud bits.
    fn unit_unsat(
        &self,
        u: &Unit,
        bits: &mut [bool],
        cloud_bit: &dyn Fn(usize) -> bool,
        dishonest_only: bool,
    ) -> usize {
        let clauses = self.clauses_of(u);
        for &c in &clauses {
            for l in &self.inst.clauses()[c].literals {
                if self.inst.variables()[l.var].role != Role::Aux {
                    self.set_mc(bits, l.var, cloud_bit);
                }
            }
        }
        if let Unit::Cluster(k) = *u {
            self.set_aux(k, bits);
        }
        clauses
            .iter()
            .filter(|&&c| {
                let cl = &self.inst.clauses()[c];
                !cl.is_satisfied(bits)
                    && (!dishonest_only || cl.literals.iter().any(|l| self.dishonest[l.var]))
            })
            .count()
    }

    /// Exact expectation of [`Self::unit_unsat`] with `fixed` clouds set and
    /// every other cloud uniform.
    fn expected(
        &self,
        u: &Unit,
        fixed: &[Option<bool>],
        bits: &mut [bool],
        dishonest_only: bool,
    ) -> Ratio<i64> {
        let free: Vec<usize> = self.clouds_of(u).into_iter().filter(|&c| fixed[c].is_none()).collect();
        let mut total = 0i64;
        for mask in 0u32..1 << free.len() {
            let bit = |c: usize| match fixed[c] {
                Some(b) => b,
                None => mask >> free.iter().position(|&f| f == c).expect("free cloud") & 1 == 1,
            };
            total += self.unit_unsat(u, bits, &bit, dishonest_only) as i64;
        }
        Ratio::new(total, 1 << free.len())
    }
}

/// Reads an assignment off a normalized tour: honest variables take the
/// value of the path leaving their left terminal, dishonest main and checker
/// variables follow one bit per cloud, and each cluster's auxiliaries are
/// chosen from its mains.
pub fn extract_assignment(
    g: &TspInstance,
    inst: &OneInThreeInstance,
    t: &QuasiTour,
    mode: ExtractionMode,
) -> Result<(Assignment, CreditLedger), TourError> {
    check_pair(g, inst)?;
    let report = honesty(g, t)?;
    let n = inst.num_vars();
    let read: Vec<bool> = g.variables().iter().map(|v| t.get(v.true_path[0]) > 0).collect();
    let dishonest: Vec<bool> = report.variables.iter().map(|v| !v.honest).collect();
    let ex = Extractor { inst, read, dishonest };

    let units: Vec<Unit> = inst
        .clauses()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.cluster.is_none())
        .map(|(c, _)| Unit::Pair(c))
        .chain((0..inst.clusters().len()).map(Unit::Cluster))
        .collect();
    let num_clouds = inst.variables().iter().map(|v| v.owner + 1).max().unwrap_or(0);
    let mut clouds: Vec<usize> = (0..n)
        .filter(|&x| ex.dishonest[x] && inst.variables()[x].role != Role::Aux)
        .map(|x| inst.variables()[x].owner)
        .collect();
    clouds.sort_unstable();
    clouds.dedup();

    let mut scratch = vec![false; n];
    let unfixed = vec![None; num_clouds];
    let expected_dishonest_unsat: Ratio<i64> =
        units.iter().map(|u| ex.expected(u, &unfixed, &mut scratch, true)).sum();

    let mut fixed: Vec<Option<bool>> = unfixed.clone();
    match mode {
        ExtractionMode::Randomized(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for &c in &clouds {
                fixed[c] = Some(rng.gen());
            }
        }
        ExtractionMode::Derandomized => {
            for &c in &clouds {
                let touching: Vec<&Unit> = units.iter().filter(|u| ex.clouds_of(u).contains(&c)).collect();
                let mut score = |b: bool| -> Ratio<i64> {
                    fixed[c] = Some(b);
                    touching.iter().map(|u| ex.expected(u, &fixed, &mut scratch, false)).sum()
                };
                let (zero, one) = (score(false), score(true));
                fixed[c] = Some(one < zero);
            }
        }
    }

    let mut bits = vec![false; n];
    let bit = |c: usize| fixed[c].unwrap_or(false);
    for x in 0..n {
        if inst.variables()[x].role != Role::Aux {
            ex.set_mc(&mut bits, x, bit);
        } else {
            bits[x] = ex.read[x];
        }
    }
    for k in 0..inst.clusters().len() {
        ex.set_aux(k, &mut bits);
    }

    let mut credits = vec![Quarters::ZERO; n];
    for &e in &report.link_doubled {
        let ed = g.edges()[e];
        let x = g.owner(ed.other(g.hub())).expect("terminal owner");
        credits[x] += ed.weight - Quarters::HALF;
    }
    for &e in &report.gadget_doubled {
        let ed = g.edges()[e];
        let (ou, ov) = (g.owner(ed.u).expect("owned"), g.owner(ed.v).expect("owned"));
        match ed.tag {
            EdgeTag::Gadget2 => {
                credits[ou] += Quarters(ed.weight.raw() / 2);
                credits[ov] += Quarters(ed.weight.raw() / 2);
            }
            EdgeTag::Gadget3MainAux => {
                let main = if inst.variables()[ou].role == Role::Aux { ov } else { ou };
                credits[main] += ed.weight;
            }
            _ => {}
        }
    }
    let bound = report.gadget_doubled.iter().map(|&e| g.edges()[e].weight).sum::<Quarters>()
        + report.link_doubled.iter().map(|&e| g.edges()[e].weight - Quarters::HALF).sum::<Quarters>();
    let cloud_bits = clouds.iter().map(|&c| (c, bit(c))).collect();
    Ok((
        Assignment::from_bits(bits),
        CreditLedger { mode, credits, bound, expected_dishonest_unsat, cloud_bits },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateLine {
    pub label: String,
    pub lhs: Ratio<i64>,
    pub relation: Relation,
    pub rhs: Ratio<i64>,
    /// Lines that only hold in expectation are informational in randomized
    /// mode.
    pub required: bool,
}

impl CertificateLine {
    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::Eq => self.lhs == self.rhs,
            Relation::Le => self.lhs <= self.rhs,
            Relation::Ge => self.lhs >= self.rhs,
        }
    }
}

/// Every term of the extraction argument for one tour and assignment; all
/// quantities are in whole units.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub terms: Vec<(String, Ratio<i64>)>,
    pub lines: Vec<CertificateLine>,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.lines.iter().all(|l| !l.required || l.holds())
    }

    pub fn failures(&self) -> Vec<&CertificateLine> {
        self.lines.iter().filter(|l| l.required && !l.holds()).collect()
    }

    pub fn term(&self, name: &str) -> Option<Ratio<i64>> {
        self.terms.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

/// Recomputes the decomposition of the tour cost and checks each inequality
/// from the forced/unit split down to `unsat(a) ≤ T − L`.
pub fn verify_extraction_bound(
    g: &TspInstance,
    inst: &OneInThreeInstance,
    t: &QuasiTour,
    a: &Assignment,
    credits: &CreditLedger,
) -> Result<Certificate, TourError> {
    check_pair(g, inst)?;
    let report = honesty(g, t)?;
    let cost = tour_cost(g, t)?;
    let lg = ledger(g);
    let w = |es: &[usize]| es.iter().map(|&e| g.edges()[e].weight).sum::<Quarters>();
    let e_g = w(&report.gadget_doubled);
    let e_s = w(&report.link_doubled);
    let e_s_half = e_s - Quarters::HALF * report.link_doubled.len() as i64;
    let e1 = g.unit_edges().filter(|&e| t.get(e) > 0).count() as i64;
    let c = components(g, t) as i64;
    let (mut visited_twice, mut unvisited) = (0i64, 0i64);
    for gd in g.gadgets() {
        let incident: usize = gd
            .vertices
            .iter()
            .flat_map(|&v| g.incident(v).iter())
            .filter(|&&e| !g.edges()[e].forced)
            .map(|&e| usize::from(t.get(e)))
            .sum();
        if incident >= 4 {
            visited_twice += 1;
        } else if incident == 0 {
            unvisited += 1;
        }
    }
    let unsat_clauses: Vec<bool> = inst.clauses().iter().map(|cl| !cl.is_satisfied(a.bits())).collect();
    let touches_dishonest =
        |cl: &crate::csp::Clause| cl.literals.iter().any(|l| !report.variables[l.var].honest);
    let u1 = inst.clauses().iter().zip(&unsat_clauses).filter(|(cl, &u)| u && !touches_dishonest(cl)).count()
        as i64;
    let u2 = inst.clauses().iter().zip(&unsat_clauses).filter(|(cl, &u)| u && touches_dishonest(cl)).count()
        as i64;
    let unsat = u1 + u2;
    let k = cost - lg.total();
    let (n, m) = (lg.variables as i64, lg.clauses as i64);
    let q = |x: Quarters| x.to_ratio();
    let r = |x: i64| Ratio::from_integer(x);
    let cr = credits.total();
    let derandomized = credits.mode == ExtractionMode::Derandomized;

    let terms = vec![
        ("T".to_string(), q(cost)),
        ("L".to_string(), q(lg.total())),
        ("F".to_string(), q(lg.forced)),
        ("N".to_string(), r(n)),
        ("M".to_string(), r(m)),
        ("k".to_string(), q(k)),
        ("|E1|".to_string(), r(e1)),
        ("w(E_G)".to_string(), q(e_g)),
        ("w(E_S)".to_string(), q(e_s)),
        ("|E_S|".to_string(), r(report.link_doubled.len() as i64)),
        ("c".to_string(), r(c)),
        ("|U1'|".to_string(), r(visited_twice)),
        ("|U1''|".to_string(), r(unvisited)),
        ("|U1|".to_string(), r(u1)),
        ("|U2|".to_string(), r(u2)),
        ("E|U2|".to_string(), credits.expected_dishonest_unsat),
        ("sum cr".to_string(), q(cr)),
        ("bound".to_string(), q(credits.bound)),
        ("unsat".to_string(), r(unsat)),
    ];
    let line = |label: &str, lhs, relation, rhs, required| CertificateLine {
        label: label.to_string(),
        lhs,
        relation,
        rhs,
        required,
    };
    let lines = vec![
        line(
            "T = F + |E1| + w(E_G) + w(E_S) + 2(c-1)",
            q(cost),
            Relation::Eq,
            q(lg.forced + Quarters::whole(e1) + e_g + e_s + Quarters::whole(2 * (c - 1))),
            true,
        ),
        line(
            "2|E1| >= 2N - |E_S| + 2M + 2|U1'| - 2|U1''|",
            r(2 * e1),
            Relation::Ge,
            r(2 * n - report.link_doubled.len() as i64 + 2 * m + 2 * visited_twice - 2 * unvisited),
            true,
        ),
        line("|U1''| <= c - 1", r(unvisited), Relation::Le, r(c - 1), true),
        line(
            "k >= w(E_G) + w(E_S) - |E_S|/2 + |U1'| + |U1''|",
            q(k),
            Relation::Ge,
            q(e_g + e_s_half + Quarters::whole(visited_twice + unvisited)),
            true,
        ),
        line("|U1| <= |U1'| + |U1''|", r(u1), Relation::Le, r(visited_twice + unvisited), true),
        line("sum cr <= w(E_G) + w(E_S) - |E_S|/2", q(cr), Relation::Le, q(e_g + e_s_half), true),
        line("E|U2| <= sum cr", credits.expected_dishonest_unsat, Relation::Le, q(cr), true),
        line("|U2| <= sum cr", r(u2), Relation::Le, q(cr), derandomized),
        line("unsat(a) <= k", r(unsat), Relation::Le, q(k), derandomized),
    ];
    Ok(Certificate { terms, lines })
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, v) in &self.terms {
            writeln!(f, "term {name} {v}")?;
        }
        for l in &self.lines {
            let status = match (l.holds(), l.required) {
                (true, _) => "ok",
                (false, true) => "FAIL",
                (false, false) => "n/a",
            };
            writeln!(f, "check {status} {} | {} {} {}", l.label, l.lhs, l.relation, l.rhs)?;
        }
        Ok(())
    }
}
