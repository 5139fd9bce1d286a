//! Structurally different 1-in-3 inputs give non-isomorphic TSP graphs, and
//! equivalent ones give isomorphic graphs. Two inputs are equivalent when
//! they agree up to renaming variables and flipping a variable's polarity
//! everywhere, since the graph does not tell the True path from the False
//! path.

use std::collections::BTreeMap;

use forge_core::corpus::micro_corpus;
use forge_core::csp::{OneInThreeInstance, Role};
use forge_core::tsp::{build_tsp, BuildMode, TspInstance};
use petgraph::algo::is_isomorphic_matching;
use petgraph::graph::UnGraph;

type Canon = (Vec<bool>, Vec<Vec<(usize, bool)>>);

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn canonical(inst: &OneInThreeInstance) -> Canon {
    let n = inst.num_vars();
    let mut best: Option<Canon> = None;
    for perm in permutations(n) {
        for flips in 0u32..1 << n {
            let mut aux = vec![false; n];
            for (v, var) in inst.variables().iter().enumerate() {
                aux[perm[v]] = var.role == Role::Aux;
            }
            let mut clauses: Vec<Vec<(usize, bool)>> = inst
                .clauses()
                .iter()
                .map(|c| {
                    let mut lits: Vec<_> = c
                        .literals
                        .iter()
                        .map(|l| (perm[l.var], l.positive ^ (flips >> l.var & 1 == 1)))
                        .collect();
                    lits.sort();
                    lits
                })
                .collect();
            clauses.sort();
            let cand = (aux, clauses);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}

/// Simple-graph view: parallel edges merge into one edge labelled by the
/// sorted list of their `(weight, forced)` pairs.
fn simple(g: &TspInstance) -> UnGraph<(), Vec<(i64, bool)>> {
    let mut labels: BTreeMap<(usize, usize), Vec<(i64, bool)>> = BTreeMap::new();
    for e in g.edges() {
        labels.entry((e.u.min(e.v), e.u.max(e.v))).or_default().push((e.weight.raw(), e.forced));
    }
    let mut out = UnGraph::with_capacity(g.num_vertices(), labels.len());
    let nodes: Vec<_> = (0..g.num_vertices()).map(|_| out.add_node(())).collect();
    for ((u, v), mut l) in labels {
        l.sort();
        out.add_edge(nodes[u], nodes[v], l);
    }
    out
}

fn pairs(vars: &[Role], clauses: &[(usize, usize)]) -> OneInThreeInstance {
    let mut inst = OneInThreeInstance::new();
    for (i, &r) in vars.iter().enumerate() {
        inst.add_var(format!("v{i}"), r, 0);
    }
    for &(a, b) in clauses {
        inst.add_pair_clause(a, b);
    }
    inst
}

#[test]
fn build_is_injective_up_to_isomorphism() {
    use Role::{Checker as C, Main as M};
    let mut cases: Vec<(String, OneInThreeInstance)> =
        micro_corpus().into_iter().map(|mi| (mi.name.to_string(), mi.inst)).collect();
    cases.push(("path".into(), pairs(&[M, C, M, C], &[(0, 1), (2, 1), (2, 3)])));
    cases.push(("star".into(), pairs(&[M, C, C, C], &[(0, 1), (0, 2), (0, 3)])));
    cases.push(("pair-and-isolated".into(), pairs(&[M, C, C], &[(0, 1)])));
    cases.push(("relabelled-figure-one".into(), pairs(&[C, C, M], &[(2, 0), (2, 1)])));

    let built: Vec<_> = cases
        .iter()
        .map(|(_, inst)| (canonical(inst), simple(&build_tsp(inst, BuildMode::Direct).unwrap())))
        .collect();
    let mut equivalent_pairs = 0;
    for i in 0..cases.len() {
        for j in i + 1..cases.len() {
            let same_input = built[i].0 == built[j].0;
            let same_graph = is_isomorphic_matching(&built[i].1, &built[j].1, |_, _| true, |a, b| a == b);
            assert_eq!(same_input, same_graph, "{} vs {}", cases[i].0, cases[j].0);
            equivalent_pairs += usize::from(same_input);
        }
    }
    // figure-one, shared-checker and the relabelled copy; the two clusters;
    // pair-and-isolated and isolated-variable.
    assert_eq!(equivalent_pairs, 5);
}
