//! The weighted TSP instance built from a 1-in-3-SAT instance: a hub, two
//! terminals per variable, a gadget per clause, and True/False paths that
//! thread each variable's terminals through the gadgets of its occurrences.

mod build;
mod ratio;
mod subdivide;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csp::CspError;
use crate::quarters::Quarters;

pub use build::{build_tsp, ledger, BuildMode, CostLedger};
pub use ratio::{hardness_ratio, RatioReport, HEADLINE_RATIO};
pub use subdivide::{subdivide_forced, SubdividedEdge, SubdividedGraph};

/// Link weight for main and checker terminals.
pub const LINK_MC: Quarters = Quarters(7);
/// Link weight for auxiliary terminals.
pub const LINK_AUX: Quarters = Quarters(2);
pub const UNIT: Quarters = Quarters(4);
pub const GADGET2: Quarters = Quarters(6);
pub const MAIN_AUX: Quarters = Quarters(5);
pub const AUX_AUX: Quarters = Quarters(4);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TspError {
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error("variable {var} occurs {count} times, at most {limit} allowed")]
    OccurrenceOverflow { var: String, count: usize, limit: usize },
    #[error("malformed TSP instance: {0}")]
    Malformed(String),
    #[error("subdivision needs at least 2 segments, got {0}")]
    BadSegments(usize),
    #[error("non-forced edges {0} and {1} are parallel")]
    ParallelUnitEdges(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexRole {
    Hub,
    TerminalL,
    TerminalR,
    /// The gadget vertex of the `k`-th clause (1-based) containing the owner.
    Occurrence(usize),
    /// An auxiliary variable's gadget vertex, `k ∈ {1, 2}`.
    AuxOccurrence(usize),
}

impl fmt::Display for VertexRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexRole::Hub => write!(f, "hub_s"),
            VertexRole::TerminalL => write!(f, "terminal_L"),
            VertexRole::TerminalR => write!(f, "terminal_R"),
            VertexRole::Occurrence(k) => write!(f, "occurrence:{k}"),
            VertexRole::AuxOccurrence(k) => write!(f, "aux_occurrence:{k}"),
        }
    }
}

impl std::str::FromStr for VertexRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let index = |t: &str| t.parse::<usize>().map_err(|_| format!("bad vertex role {s:?}"));
        match s.split_once(':') {
            None => match s {
                "hub_s" => Ok(VertexRole::Hub),
                "terminal_L" => Ok(VertexRole::TerminalL),
                "terminal_R" => Ok(VertexRole::TerminalR),
                _ => Err(format!("bad vertex role {s:?}")),
            },
            Some(("occurrence", k)) => Ok(VertexRole::Occurrence(index(k)?)),
            Some(("aux_occurrence", k)) => Ok(VertexRole::AuxOccurrence(index(k)?)),
            _ => Err(format!("bad vertex role {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeTag {
    TerminalLink,
    TruePath,
    FalsePath,
    Gadget2,
    Gadget3MainAux,
    Gadget3AuxAux,
}

impl EdgeTag {
    pub const ALL: [EdgeTag; 6] = [
        EdgeTag::TerminalLink,
        EdgeTag::TruePath,
        EdgeTag::FalsePath,
        EdgeTag::Gadget2,
        EdgeTag::Gadget3MainAux,
        EdgeTag::Gadget3AuxAux,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EdgeTag::TerminalLink => "terminal_link",
            EdgeTag::TruePath => "true_path",
            EdgeTag::FalsePath => "false_path",
            EdgeTag::Gadget2 => "gadget2",
            EdgeTag::Gadget3MainAux => "gadget3_main_aux",
            EdgeTag::Gadget3AuxAux => "gadget3_aux_aux",
        }
    }

    pub fn from_name(s: &str) -> Option<EdgeTag> {
        EdgeTag::ALL.into_iter().find(|t| t.name() == s)
    }

    pub fn is_forced(self) -> bool {
        !matches!(self, EdgeTag::TruePath | EdgeTag::FalsePath)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub role: VertexRole,
    /// Owning I₃ variable; `None` only for the hub.
    pub owner: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: Quarters,
    pub forced: bool,
    pub tag: EdgeTag,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Terminals, links and the two unit paths of one variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableGadget {
    pub left: usize,
    pub right: usize,
    pub link_left: usize,
    pub link_right: usize,
    /// Edge ids from the left terminal to the right one.
    pub true_path: Vec<usize>,
    pub false_path: Vec<usize>,
    /// Gadget vertices visited by each path, in path order.
    pub true_stops: Vec<usize>,
    pub false_stops: Vec<usize>,
}

impl VariableGadget {
    pub fn links(&self) -> [usize; 2] {
        [self.link_left, self.link_right]
    }

    pub fn path(&self, value: bool) -> &[usize] {
        if value {
            &self.true_path
        } else {
            &self.false_path
        }
    }
}

/// The forced part of one clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseGadget {
    /// One vertex per literal for size 2; `[main, aux, aux]` for size 3.
    pub vertices: Vec<usize>,
    /// Size 2: the two parallel edges. Size 3: `[main–aux, main–aux, aux–aux]`.
    pub forced: Vec<usize>,
}

impl ClauseGadget {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    /// The aux–aux edge of a size-3 gadget.
    pub fn aux_aux(&self) -> Option<usize> {
        (self.size() == 3).then(|| self.forced[2])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TspInstance {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    hub: usize,
    /// Indexed by I₃ variable.
    variables: Vec<VariableGadget>,
    /// Indexed by I₃ clause.
    gadgets: Vec<ClauseGadget>,
    incidence: Vec<Vec<usize>>,
    /// Gadget index of every gadget vertex.
    gadget_of: Vec<Option<usize>>,
    /// Number of size-3 equations when built from a pipeline instance.
    pipeline_m: Option<usize>,
}

impl TspInstance {
    /// Validates a raw vertex/edge list and recovers the variable and gadget
    /// structure from roles, owners and tags. Gadgets are ordered by their
    /// smallest vertex id, which is clause order for built instances.
    pub fn from_parts(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, TspError> {
        let bad = |msg: String| Err(TspError::Malformed(msg));
        let n = vertices.len();
        let mut incidence = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n || e.u == e.v {
                return bad(format!("edge {id} has bad endpoints"));
            }
            if e.forced != e.tag.is_forced() {
                return bad(format!("edge {id} forced flag disagrees with its tag"));
            }
            let allowed: &[Quarters] = match e.tag {
                EdgeTag::TerminalLink => &[LINK_MC, LINK_AUX],
                EdgeTag::TruePath | EdgeTag::FalsePath => &[UNIT],
                EdgeTag::Gadget2 => &[GADGET2],
                EdgeTag::Gadget3MainAux => &[MAIN_AUX],
                EdgeTag::Gadget3AuxAux => &[AUX_AUX],
            };
            if !allowed.contains(&e.weight) {
                return bad(format!("edge {id} has weight {} for tag {}", e.weight, e.tag.name()));
            }
            incidence[e.u].push(id);
            incidence[e.v].push(id);
        }
        let hubs: Vec<usize> = (0..n).filter(|&v| vertices[v].role == VertexRole::Hub).collect();
        let [hub] = hubs[..] else {
            return bad(format!("expected one hub, found {}", hubs.len()));
        };
        let num_vars = vertices.iter().filter_map(|v| v.owner).max().map_or(0, |m| m + 1);
        let mut left = vec![None; num_vars];
        let mut right = vec![None; num_vars];
        for (id, v) in vertices.iter().enumerate() {
            match (v.role, v.owner) {
                (VertexRole::Hub, None) => {}
                (VertexRole::Hub, Some(_)) | (_, None) => return bad(format!("vertex {id} has a bad owner")),
                (VertexRole::TerminalL, Some(x)) if left[x].replace(id).is_some() => {
                    return bad(format!("variable {x} has two left terminals"));
                }
                (VertexRole::TerminalR, Some(x)) if right[x].replace(id).is_some() => {
                    return bad(format!("variable {x} has two right terminals"));
                }
                _ => {}
            }
        }
        let link_of = |t: usize| -> Result<usize, TspError> {
            let links: Vec<usize> =
                incidence[t].iter().copied().filter(|&e| edges[e].tag == EdgeTag::TerminalLink).collect();
            match links[..] {
                [e] if edges[e].other(t) == hub => Ok(e),
                _ => Err(TspError::Malformed(format!("terminal {t} needs exactly one link to the hub"))),
            }
        };
        let mut variables = Vec::with_capacity(num_vars);
        for x in 0..num_vars {
            let (Some(l), Some(r)) = (left[x], right[x]) else {
                return bad(format!("variable {x} lacks a terminal"));
            };
            let (link_left, link_right) = (link_of(l)?, link_of(r)?);
            if edges[link_left].weight != edges[link_right].weight {
                return bad(format!("variable {x} has links of different weights"));
            }
            let walk = |tag: EdgeTag| -> Result<(Vec<usize>, Vec<usize>), TspError> {
                let (mut path, mut stops) = (Vec::new(), Vec::new());
                let (mut at, mut prev) = (l, usize::MAX);
                while at != r {
                    let next: Vec<usize> =
                        incidence[at].iter().copied().filter(|&e| edges[e].tag == tag && e != prev).collect();
                    let [e] = next[..] else {
                        return Err(TspError::Malformed(format!(
                            "{} of variable {x} is not a simple path",
                            tag.name()
                        )));
                    };
                    path.push(e);
                    prev = e;
                    at = edges[e].other(at);
                    if at != r {
                        if vertices[at].owner != Some(x) || stops.contains(&at) || path.len() > n {
                            return Err(TspError::Malformed(format!(
                                "{} of variable {x} strays",
                                tag.name()
                            )));
                        }
                        stops.push(at);
                    }
                }
                Ok((path, stops))
            };
            let (true_path, true_stops) = walk(EdgeTag::TruePath)?;
            let (false_path, false_stops) = walk(EdgeTag::FalsePath)?;
            variables.push(VariableGadget {
                left: l,
                right: r,
                link_left,
                link_right,
                true_path,
                false_path,
                true_stops,
                false_stops,
            });
        }
        // gadgets: components of the non-link forced edges
        let mut gadget_of = vec![None; n];
        let mut gadgets: Vec<ClauseGadget> = Vec::new();
        for start in 0..n {
            let is_gadget_vertex =
                matches!(vertices[start].role, VertexRole::Occurrence(_) | VertexRole::AuxOccurrence(_));
            if !is_gadget_vertex || gadget_of[start].is_some() {
                continue;
            }
            let g = gadgets.len();
            let mut verts = vec![start];
            gadget_of[start] = Some(g);
            let mut i = 0;
            while i < verts.len() {
                let v = verts[i];
                for &e in &incidence[v] {
                    if edges[e].forced && edges[e].tag != EdgeTag::TerminalLink {
                        let w = edges[e].other(v);
                        if gadget_of[w].is_none() {
                            gadget_of[w] = Some(g);
                            verts.push(w);
                        }
                    }
                }
                i += 1;
            }
            verts.sort_unstable();
            let mut forced: Vec<usize> = verts
                .iter()
                .flat_map(|&v| incidence[v].iter().copied())
                .filter(|&e| edges[e].forced)
                .collect();
            forced.sort_unstable();
            forced.dedup();
            let gadget = match verts.len() {
                2 => {
                    let ok = forced.len() == 2 && forced.iter().all(|&e| edges[e].tag == EdgeTag::Gadget2);
                    if !ok {
                        return bad(format!("size-2 gadget at vertex {start} is malformed"));
                    }
                    ClauseGadget { vertices: verts, forced }
                }
                3 => {
                    let mains: Vec<usize> = verts
                        .iter()
                        .copied()
                        .filter(|&v| matches!(vertices[v].role, VertexRole::Occurrence(_)))
                        .collect();
                    let [main] = mains[..] else {
                        return bad(format!("size-3 gadget at vertex {start} needs one main vertex"));
                    };
                    let aux: Vec<usize> = verts.iter().copied().filter(|&v| v != main).collect();
                    let find = |a: usize, b: usize, tag: EdgeTag| {
                        forced.iter().copied().find(|&e| {
                            let ed = &edges[e];
                            ed.tag == tag && ((ed.u, ed.v) == (a, b) || (ed.u, ed.v) == (b, a))
                        })
                    };
                    let (Some(e0), Some(e1), Some(e2)) = (
                        find(main, aux[0], EdgeTag::Gadget3MainAux),
                        find(main, aux[1], EdgeTag::Gadget3MainAux),
                        find(aux[0], aux[1], EdgeTag::Gadget3AuxAux),
                    ) else {
                        return bad(format!("size-3 gadget at vertex {start} is not a triangle"));
                    };
                    if forced.len() != 3 {
                        return bad(format!("size-3 gadget at vertex {start} has extra forced edges"));
                    }
                    ClauseGadget { vertices: vec![main, aux[0], aux[1]], forced: vec![e0, e1, e2] }
                }
                k => return bad(format!("gadget at vertex {start} has {k} vertices")),
            };
            for &v in &gadget.vertices {
                let unit = incidence[v].iter().filter(|&&e| !edges[e].forced).count();
                if unit != 2 {
                    return bad(format!("gadget vertex {v} has {unit} path edges"));
                }
            }
            gadgets.push(gadget);
        }
        Ok(TspInstance { vertices, edges, hub, variables, gadgets, incidence, gadget_of, pipeline_m: None })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn hub(&self) -> usize {
        self.hub
    }

    pub fn variables(&self) -> &[VariableGadget] {
        &self.variables
    }

    pub fn gadgets(&self) -> &[ClauseGadget] {
        &self.gadgets
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn gadget_of(&self, v: usize) -> Option<usize> {
        self.gadget_of[v]
    }

    pub fn pipeline_m(&self) -> Option<usize> {
        self.pipeline_m
    }

    pub fn set_pipeline_m(&mut self, m: Option<usize>) {
        self.pipeline_m = m;
    }

    pub fn forced_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].forced)
    }

    pub fn unit_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| !self.edges[e].forced)
    }

    /// Non-forced edges incident to a gadget's vertices.
    pub fn gadget_path_edges(&self, g: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.gadgets[g]
            .vertices
            .iter()
            .flat_map(|&v| self.incidence[v].iter().copied())
            .filter(|&e| !self.edges[e].forced)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn owner(&self, v: usize) -> Option<usize> {
        self.vertices[v].owner
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_names_round_trip() {
        for r in [
            VertexRole::Hub,
            VertexRole::TerminalL,
            VertexRole::TerminalR,
            VertexRole::Occurrence(4),
            VertexRole::AuxOccurrence(2),
        ] {
            assert_eq!(r.to_string().parse::<VertexRole>(), Ok(r));
        }
        for t in EdgeTag::ALL {
            assert_eq!(EdgeTag::from_name(t.name()), Some(t));
        }
        assert!("occurrence:x".parse::<VertexRole>().is_err());
    }
}
