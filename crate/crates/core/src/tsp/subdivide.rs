use serde::{Deserialize, Serialize};

use super::{TspError, TspInstance};
use crate::quarters::Quarters;

/// One edge of the subdivided graph, weight in units of `1/(4p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdividedEdge {
    pub u: usize,
    pub v: usize,
    pub weight: i64,
    /// Edge of the original instance this piece comes from.
    pub origin: usize,
    pub segment: usize,
}

/// A simple graph in which every forced edge of weight `w` became a path of
/// `p` segments of weight `w/p`. Original vertices keep their ids; the
/// inner path vertices are numbered after them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdividedGraph {
    pub p: usize,
    pub original_vertices: usize,
    pub num_vertices: usize,
    pub edges: Vec<SubdividedEdge>,
}

pub fn subdivide_forced(g: &TspInstance, p: usize) -> Result<SubdividedGraph, TspError> {
    if p < 2 {
        return Err(TspError::BadSegments(p));
    }
    let mut seen = std::collections::HashMap::new();
    for e in g.unit_edges() {
        let ed = g.edges()[e];
        if let Some(prev) = seen.insert((ed.u.min(ed.v), ed.u.max(ed.v)), e) {
            return Err(TspError::ParallelUnitEdges(prev, e));
        }
    }
    let mut next = g.num_vertices();
    let mut edges = Vec::new();
    for (id, e) in g.edges().iter().enumerate() {
        if !e.forced {
            edges.push(SubdividedEdge {
                u: e.u,
                v: e.v,
                weight: e.weight.raw() * p as i64,
                origin: id,
                segment: 0,
            });
            continue;
        }
        let mut at = e.u;
        for s in 0..p {
            let to = if s + 1 == p {
                e.v
            } else {
                next += 1;
                next - 1
            };
            edges.push(SubdividedEdge { u: at, v: to, weight: e.weight.raw(), origin: id, segment: s });
            at = to;
        }
    }
    Ok(SubdividedGraph { p, original_vertices: g.num_vertices(), num_vertices: next, edges })
}

impl SubdividedGraph {
    /// Collapses every chain back to one edge: `(u, v, weight, forced)` per
    /// original edge id.
    pub fn contract(&self) -> Vec<(usize, usize, Quarters, bool)> {
        let count = self.edges.iter().map(|e| e.origin + 1).max().unwrap_or(0);
        let mut out: Vec<Option<(usize, usize, i64, usize)>> = vec![None; count];
        for e in &self.edges {
            let slot = out[e.origin].get_or_insert((e.u, e.v, 0, 0));
            if e.segment == 0 {
                slot.0 = e.u;
            }
            slot.1 = e.v;
            slot.2 += e.weight;
            slot.3 += 1;
        }
        out.into_iter()
            .map(|s| {
                let (u, v, w, pieces) = s.expect("every original edge has pieces");
                (u, v, Quarters(w / self.p as i64), pieces > 1)
            })
            .collect()
    }

    /// All-pairs shortest path lengths, in units of `1/(4p)`.
    pub fn metric_closure(&self) -> Vec<Vec<i64>> {
        let n = self.num_vertices;
        let inf = i64::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for e in &self.edges {
            let w = e.weight.min(d[e.u][e.v]);
            d[e.u][e.v] = w;
            d[e.v][e.u] = w;
        }
        for k in 0..n {
            let through = d[k].clone();
            for row in d.iter_mut() {
                let dik = row[k];
                if dik == inf {
                    continue;
                }
                for (dij, &dkj) in row.iter_mut().zip(&through) {
                    let via = dik + dkj;
                    if via < *dij {
                        *dij = via;
                    }
                }
            }
        }
        d
    }
}
