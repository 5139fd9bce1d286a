use serde::{Deserialize, Serialize};

use super::{
    Edge, EdgeTag, TspError, TspInstance, Vertex, VertexRole, AUX_AUX, GADGET2, LINK_AUX, LINK_MC, MAIN_AUX,
    UNIT,
};
use crate::csp::{OneInThreeInstance, Role};
use crate::quarters::Quarters;
use crate::reductions::CountCheck;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BuildMode {
    /// Pipeline output: the full structural check runs and the ledger
    /// identities are enforced.
    Pipeline,
    /// Any structurally valid instance, for hand-made toys.
    Direct,
}

/// Builds the TSP instance of `inst`.
///
/// Vertex ids: the hub is 0 and variable `x` has terminals `1 + 2x`
/// (left) and `2 + 2x` (right); gadget vertices follow in clause order, one
/// per literal. Each variable's True path visits its positive occurrences
/// and its False path the negated ones, both spliced in at the left end so
/// they read `x^L`, last occurrence, ..., first occurrence, `x^R`.
pub fn build_tsp(inst: &OneInThreeInstance, mode: BuildMode) -> Result<TspInstance, TspError> {
    let occ = inst.occurrence_lists();
    for (x, var) in inst.variables().iter().enumerate() {
        let limit = if var.role == Role::Aux { 2 } else { 5 };
        if occ[x].len() > limit {
            return Err(TspError::OccurrenceOverflow { var: var.name.clone(), count: occ[x].len(), limit });
        }
    }
    match mode {
        BuildMode::Pipeline => inst.validate_pipeline()?,
        BuildMode::Direct => inst.validate()?,
    }
    let n = inst.num_vars();
    let mut vertices = vec![Vertex { role: VertexRole::Hub, owner: None }];
    for x in 0..n {
        vertices.push(Vertex { role: VertexRole::TerminalL, owner: Some(x) });
        vertices.push(Vertex { role: VertexRole::TerminalR, owner: Some(x) });
    }
    let mut seen = vec![0usize; n];
    let mut stops: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; n];
    let mut gadget_vertices = Vec::with_capacity(inst.clauses().len());
    for clause in inst.clauses() {
        let mut vs = Vec::with_capacity(clause.literals.len());
        for l in &clause.literals {
            seen[l.var] += 1;
            let role = if inst.variables()[l.var].role == Role::Aux {
                VertexRole::AuxOccurrence(seen[l.var])
            } else {
                VertexRole::Occurrence(seen[l.var])
            };
            let v = vertices.len();
            vertices.push(Vertex { role, owner: Some(l.var) });
            stops[l.var][usize::from(l.positive)].push(v);
            vs.push(v);
        }
        gadget_vertices.push(vs);
    }
    let mut edges = Vec::new();
    let mut add = |u: usize, v: usize, weight: Quarters, tag: EdgeTag| {
        edges.push(Edge { u, v, weight, forced: tag.is_forced(), tag });
    };
    for (x, var) in inst.variables().iter().enumerate() {
        let (l, r) = (1 + 2 * x, 2 + 2 * x);
        let link = if var.role == Role::Aux { LINK_AUX } else { LINK_MC };
        add(0, l, link, EdgeTag::TerminalLink);
        add(0, r, link, EdgeTag::TerminalLink);
        for (value, tag) in [(true, EdgeTag::TruePath), (false, EdgeTag::FalsePath)] {
            let mut walk = vec![l];
            walk.extend(stops[x][usize::from(value)].iter().rev());
            walk.push(r);
            for w in walk.windows(2) {
                add(w[0], w[1], UNIT, tag);
            }
        }
    }
    for vs in &gadget_vertices {
        match vs[..] {
            [a, b] => {
                add(a, b, GADGET2, EdgeTag::Gadget2);
                add(a, b, GADGET2, EdgeTag::Gadget2);
            }
            [m, p, q] => {
                add(m, p, MAIN_AUX, EdgeTag::Gadget3MainAux);
                add(m, q, MAIN_AUX, EdgeTag::Gadget3MainAux);
                add(p, q, AUX_AUX, EdgeTag::Gadget3AuxAux);
            }
            _ => unreachable!("validated clause sizes"),
        }
    }
    let mut g = TspInstance::from_parts(vertices, edges)?;
    if mode == BuildMode::Pipeline {
        g.set_pipeline_m(Some(inst.clusters().len()));
    }
    Ok(g)
}

/// `L = F + N + M` and its parts, all exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    /// Total forced weight `F`.
    pub forced: Quarters,
    pub gadget2: Quarters,
    pub gadget3: Quarters,
    pub links_mc: Quarters,
    pub links_aux: Quarters,
    /// `N`
    pub variables: usize,
    /// `M`
    pub clauses: usize,
    pub pipeline_m: Option<usize>,
}

impl CostLedger {
    /// `L = F + N + M`.
    pub fn total(&self) -> Quarters {
        self.forced + Quarters::whole((self.variables + self.clauses) as i64)
    }

    /// The pipeline identities, stated in twentieths of a unit so every
    /// coefficient is an integer multiple of `m`.
    pub fn identities(&self) -> Vec<CountCheck> {
        let Some(m) = self.pipeline_m else {
            return Vec::new();
        };
        let m = m as i64;
        let twentieths = |q: Quarters| 5 * q.raw();
        vec![
            CountCheck::new("20·F = 1368m (F = 68.4m)", 1368 * m, twentieths(self.forced)),
            CountCheck::new("20·size-2 gadgets = 720m", 720 * m, twentieths(self.gadget2)),
            CountCheck::new("20·size-3 gadgets = 210m", 210 * m, twentieths(self.gadget3)),
            CountCheck::new("20·M/C links = 378m", 378 * m, twentieths(self.links_mc)),
            CountCheck::new("20·A links = 60m", 60 * m, twentieths(self.links_aux)),
            CountCheck::new("10·N = 84m (N = 8.4m)", 84 * m, 10 * self.variables as i64),
            CountCheck::new("M = 15m", 15 * m, self.clauses as i64),
            CountCheck::new("20·L = 1836m (L = 91.8m)", 1836 * m, twentieths(self.total())),
        ]
    }

    pub fn identities_hold(&self) -> bool {
        self.identities().iter().all(CountCheck::holds)
    }
}

pub fn ledger(g: &TspInstance) -> CostLedger {
    let sum = |pred: &dyn Fn(&Edge) -> bool| g.edges().iter().filter(|e| pred(e)).map(|e| e.weight).sum();
    CostLedger {
        forced: sum(&|e| e.forced),
        gadget2: sum(&|e| e.tag == EdgeTag::Gadget2),
        gadget3: sum(&|e| matches!(e.tag, EdgeTag::Gadget3MainAux | EdgeTag::Gadget3AuxAux)),
        links_mc: sum(&|e| e.tag == EdgeTag::TerminalLink && e.weight == LINK_MC),
        links_aux: sum(&|e| e.tag == EdgeTag::TerminalLink && e.weight == LINK_AUX),
        variables: g.variables().len(),
        clauses: g.gadgets().len(),
        pipeline_m: g.pipeline_m(),
    }
}
