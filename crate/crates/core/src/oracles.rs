//! Exhaustive ground truth for small instances: the cheapest quasi-tour by
//! two independent searches, exact TSP on forced-edge subdivisions, and the
//! gap between tour cost and unsatisfied clauses.

use num_rational::Ratio;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csp::{brute_force_min_unsat, CspError, OneInThreeInstance, DEFAULT_BRUTE_FORCE_VARS};
use crate::quarters::Quarters;
use crate::tours::{tour_cost, validate_quasi_tour, QuasiTour};
use crate::tsp::{ledger, SubdividedGraph, TspInstance, UNIT};

/// Subsets examined by [`exact_min_quasi_tour`] unless told otherwise.
pub const DEFAULT_ORACLE_BUDGET: u64 = 1 << 22;
pub const HELD_KARP_MAX_VERTICES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error("search needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("{vertices} vertices, at most {limit} supported")]
    TooLarge { vertices: usize, limit: usize },
    #[error("no feasible solution")]
    Infeasible,
}

fn check_budget(needed: u128, budget: u64) -> Result<(), OracleError> {
    if needed > u128::from(budget) {
        Err(OracleError::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

/// Cheapest set of doubled edges fixing the parity of one component of the
/// forced graph, per odd-vertex pattern.
enum Join {
    /// Small component: table indexed by the odd mask over `vertices`.
    Table { vertices: Vec<usize>, best: Vec<Option<(Quarters, Vec<usize>)>> },
    /// Tree component: the unique join, found by peeling leaves.
    Tree { vertices: Vec<usize>, edges: Vec<usize> },
}

impl Join {
    fn new(g: &TspInstance, vertices: Vec<usize>, edges: Vec<usize>) -> Join {
        if vertices.len() <= 12 && edges.len() <= 12 {
            let pos = |v: usize| vertices.iter().position(|&x| x == v).expect("component vertex");
            let mut best: Vec<Option<(Quarters, Vec<usize>)>> = vec![None; 1 << vertices.len()];
            for sub in 0u32..1 << edges.len() {
                let (mut mask, mut w, mut chosen) = (0usize, Quarters::ZERO, Vec::new());
                for (i, &e) in edges.iter().enumerate() {
                    if sub >> i & 1 == 1 {
                        let ed = g.edges()[e];
                        mask ^= 1 << pos(ed.u);
                        mask ^= 1 << pos(ed.v);
                        w += ed.weight;
                        chosen.push(e);
                    }
                }
                if best[mask].as_ref().is_none_or(|(b, _)| w < *b) {
                    best[mask] = Some((w, chosen));
                }
            }
            Join::Table { vertices, best }
        } else {
            Join::Tree { vertices, edges }
        }
    }

    fn solve(&self, g: &TspInstance, odd: &[bool]) -> Option<(Quarters, Vec<usize>)> {
        match self {
            Join::Table { vertices, best } => {
                let mask =
                    vertices.iter().enumerate().filter(|(_, &v)| odd[v]).fold(0, |m, (i, _)| m | 1 << i);
                best[mask].clone()
            }
            Join::Tree { vertices, edges } => {
                let mut odd: Vec<bool> = odd.to_vec();
                let mut left: Vec<usize> = edges.clone();
                let mut degree = vec![0usize; g.num_vertices()];
                for &e in edges {
                    degree[g.edges()[e].u] += 1;
                    degree[g.edges()[e].v] += 1;
                }
                let (mut w, mut chosen) = (Quarters::ZERO, Vec::new());
                while let Some(i) = left.iter().position(|&e| {
                    let ed = g.edges()[e];
                    degree[ed.u] == 1 || degree[ed.v] == 1
                }) {
                    let e = left.swap_remove(i);
                    let ed = g.edges()[e];
                    let (leaf, other) = if degree[ed.u] == 1 { (ed.u, ed.v) } else { (ed.v, ed.u) };
                    degree[leaf] -= 1;
                    degree[other] -= 1;
                    if odd[leaf] {
                        odd[leaf] = false;
                        odd[other] = !odd[other];
                        w += ed.weight;
                        chosen.push(e);
                    }
                }
                if vertices.iter().any(|&v| odd[v]) {
                    None
                } else {
                    Some((w, chosen))
                }
            }
        }
    }
}

/// The cheapest quasi-tour, searching unit edges over {0, 1} and completing
/// each choice with the cheapest parity repair of the forced edges.
///
/// Restricting unit edges is exact: two copies of a unit edge can always be
/// dropped at no extra cost.
pub fn exact_min_quasi_tour(g: &TspInstance, budget: u64) -> Result<(Quarters, QuasiTour), OracleError> {
    let units: Vec<usize> = g.unit_edges().collect();
    check_budget(1u128 << units.len().min(127), budget)?;
    let n = g.num_vertices();

    let mut uf = UnionFind::new(n);
    for e in g.forced_edges() {
        uf.union(g.edges()[e].u, g.edges()[e].v);
    }
    let labels = uf.into_labeling();
    let mut comp_vertices: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for (v, &label) in labels.iter().enumerate() {
        comp_vertices.entry(label).or_default().0.push(v);
    }
    for e in g.forced_edges() {
        comp_vertices.get_mut(&labels[g.edges()[e].u]).expect("component").1.push(e);
    }
    let joins: Vec<Join> = comp_vertices.into_values().map(|(vs, es)| Join::new(g, vs, es)).collect();

    let mut base_odd = vec![false; n];
    let mut forced_weight = Quarters::ZERO;
    for e in g.forced_edges() {
        let ed = g.edges()[e];
        base_odd[ed.u] = !base_odd[ed.u];
        base_odd[ed.v] = !base_odd[ed.v];
        forced_weight += ed.weight;
    }

    let mut best: Option<(Quarters, u64, Vec<usize>)> = None;
    let mut odd = base_odd;
    let mut subset = 0u64;
    for step in 0u64..1 << units.len() {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            subset ^= 1 << bit;
            let ed = g.edges()[units[bit]];
            odd[ed.u] = !odd[ed.u];
            odd[ed.v] = !odd[ed.v];
        }
        let mut cost = forced_weight + UNIT * i64::from(subset.count_ones() as i32);
        let mut doubled = Vec::new();
        let mut feasible = true;
        for j in &joins {
            match j.solve(g, &odd) {
                Some((w, es)) => {
                    cost += w;
                    doubled.extend(es);
                }
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if !feasible || best.as_ref().is_some_and(|(b, _, _)| cost >= *b) {
            continue;
        }
        let mut uf = UnionFind::new(n);
        let mut c = n;
        for e in g.forced_edges() {
            c -= usize::from(uf.union(g.edges()[e].u, g.edges()[e].v));
        }
        for (i, &e) in units.iter().enumerate() {
            if subset >> i & 1 == 1 {
                c -= usize::from(uf.union(g.edges()[e].u, g.edges()[e].v));
            }
        }
        cost += Quarters::whole(2 * (c as i64 - 1));
        if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
            best = Some((cost, subset, doubled));
        }
    }
    let (cost, subset, doubled) = best.ok_or(OracleError::Infeasible)?;
    let mut t = QuasiTour::empty(g.num_edges());
    for e in g.forced_edges() {
        t.set(e, 1);
    }
    for e in doubled {
        t.set(e, 2);
    }
    for (i, &e) in units.iter().enumerate() {
        if subset >> i & 1 == 1 {
            t.set(e, 1);
        }
    }
    debug_assert_eq!(tour_cost(g, &t).ok(), Some(cost));
    Ok((cost, t))
}

/// The cheapest quasi-tour by plain enumeration: every edge takes every
/// multiplicity in {0, 1, 2} (forced edges {1, 2}).
pub fn enumerate_min_quasi_tour(g: &TspInstance, budget: u64) -> Result<(Quarters, QuasiTour), OracleError> {
    let radix: Vec<u8> = g.edges().iter().map(|e| if e.forced { 2 } else { 3 }).collect();
    let needed = radix.iter().try_fold(1u128, |acc, &r| acc.checked_mul(u128::from(r))).unwrap_or(u128::MAX);
    check_budget(needed, budget)?;
    let low = |e: usize| u8::from(g.edges()[e].forced);
    let mut t = QuasiTour::from_multiplicities((0..g.num_edges()).map(low).collect());
    let mut best: Option<(Quarters, QuasiTour)> = None;
    loop {
        if validate_quasi_tour(g, &t).is_ok() {
            let cost = tour_cost(g, &t).expect("validated");
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, t.clone()));
            }
        }
        let mut i = 0;
        loop {
            if i == g.num_edges() {
                return best.ok_or(OracleError::Infeasible);
            }
            if t.get(i) + 1 - low(i) < radix[i] {
                t.set(i, t.get(i) + 1);
                break;
            }
            t.set(i, low(i));
            i += 1;
        }
    }
}

/// Exact shortest Hamiltonian cycle over a symmetric distance matrix by
/// dynamic programming over subsets. Returns the cost and the vertex order
/// starting at 0.
pub fn held_karp(dist: &[Vec<i64>]) -> Result<(i64, Vec<usize>), OracleError> {
    let n = dist.len();
    if n > HELD_KARP_MAX_VERTICES {
        return Err(OracleError::TooLarge { vertices: n, limit: HELD_KARP_MAX_VERTICES });
    }
    match n {
        0 => return Ok((0, Vec::new())),
        1 => return Ok((0, vec![0])),
        2 => return Ok((dist[0][1] + dist[1][0], vec![0, 1])),
        _ => {}
    }
    // subsets of the vertices 1..n, end vertex j in 1..n
    let m = n - 1;
    let full = 1usize << m;
    let inf = i64::MAX / 4;
    let mut dp = vec![inf; full * m];
    let mut parent = vec![u8::MAX; full * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = dist[0][j + 1];
    }
    for mask in 1..full {
        for j in 0..m {
            let cur = dp[mask * m + j];
            if mask >> j & 1 == 0 || cur >= inf {
                continue;
            }
            for k in 0..m {
                if mask >> k & 1 == 1 {
                    continue;
                }
                let next = mask | 1 << k;
                let cand = cur + dist[j + 1][k + 1];
                if cand < dp[next * m + k] {
                    dp[next * m + k] = cand;
                    parent[next * m + k] = j as u8;
                }
            }
        }
    }
    let (mut best, mut end) = (inf, 0);
    for j in 0..m {
        let cand = dp[(full - 1) * m + j] + dist[j + 1][0];
        if cand < best {
            best = cand;
            end = j;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = full - 1;
    let mut j = end;
    loop {
        order.push(j + 1);
        let p = parent[mask * m + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = usize::from(p);
    }
    order.push(0);
    order.reverse();
    Ok((best, order))
}

/// How one contracted chain is used by a tour of the subdivided graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainUse {
    Absent,
    Once,
    Twice,
    /// Every segment twice but one, which is skipped: the chain's inner
    /// vertices hang off its two ends without joining them.
    Split,
}

/// Exact TSP cost of a subdivided graph, in whole units.
///
/// Each subdivided chain is contracted back to its original edge and searched
/// over the only ways a connected even-degree multigraph can use a path of
/// degree-2 vertices; unit edges take multiplicity 0, 1 or 2. This is the
/// Eulerian form of the tour problem on the metric closure, so it matches
/// [`held_karp`] on the closure wherever both run.
pub fn held_karp_subdivided(
    sg: &SubdividedGraph,
    budget: u64,
) -> Result<(Ratio<i64>, Vec<ChainUse>), OracleError> {
    let edges = sg.contract();
    let needed = 3u128.checked_pow(edges.len() as u32).unwrap_or(u128::MAX);
    check_budget(needed, budget)?;
    let n = sg.original_vertices;
    let p = sg.p as i64;
    let options = |forced: bool| -> &'static [ChainUse] {
        if forced {
            &[ChainUse::Once, ChainUse::Twice, ChainUse::Split]
        } else {
            &[ChainUse::Absent, ChainUse::Once, ChainUse::Twice]
        }
    };
    let mut choice = vec![0usize; edges.len()];
    let mut best: Option<(i64, Vec<ChainUse>)> = None;
    loop {
        let uses: Vec<ChainUse> = edges.iter().zip(&choice).map(|(e, &c)| options(e.3)[c]).collect();
        let mut odd = vec![false; n];
        let mut uf = UnionFind::new(n);
        let mut c = n;
        let mut cost = 0i64;
        for (&(u, v, w, _), &use_) in edges.iter().zip(&uses) {
            let full = w.raw() * p;
            match use_ {
                ChainUse::Absent => {}
                ChainUse::Once => {
                    odd[u] = !odd[u];
                    odd[v] = !odd[v];
                    cost += full;
                }
                ChainUse::Twice => cost += 2 * full,
                ChainUse::Split => cost += 2 * (full - w.raw()),
            }
            if matches!(use_, ChainUse::Once | ChainUse::Twice) {
                c -= usize::from(uf.union(u, v));
            }
        }
        if c == 1 && !odd.contains(&true) && best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, uses));
        }
        let mut i = 0;
        loop {
            if i == edges.len() {
                let (cost, uses) = best.ok_or(OracleError::Infeasible)?;
                return Ok((Ratio::new(cost, 4 * p), uses));
            }
            choice[i] += 1;
            if choice[i] < 3 {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Both sides of `min tour cost = L + min unsat`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub l: Quarters,
    pub min_tour: Quarters,
    pub min_unsat: usize,
}

impl GapReport {
    pub fn holds(&self) -> bool {
        self.min_tour == self.l + Quarters::whole(self.min_unsat as i64)
    }
}

pub fn gap_check(g: &TspInstance, inst: &OneInThreeInstance, budget: u64) -> Result<GapReport, OracleError> {
    let (min_tour, _) = exact_min_quasi_tour(g, budget)?;
    let (min_unsat, _) = brute_force_min_unsat(inst, DEFAULT_BRUTE_FORCE_VARS)?;
    Ok(GapReport { l: ledger(g).total(), min_tour, min_unsat })
}
