//! Quasi-tours on a [`TspInstance`]: cost, validity, the tour built from an
//! assignment, normalization, honesty and assignment extraction.

mod construct;
mod extract;
mod normalize;
mod perturb;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csp::CspError;
use crate::quarters::Quarters;
use crate::tsp::TspInstance;

pub use construct::{assignment_to_tour, repair_assignment};
pub use extract::{
    extract_assignment, honesty, verify_extraction_bound, Certificate, CertificateLine, CreditLedger,
    ExtractionMode, HonestyReport, VariableHonesty,
};
pub use normalize::{normalization_violations, normalize_tour, NormalizationStep, Rule};
pub use perturb::perturb_tour;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TourError {
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error("tour has {found} multiplicities for {expected} edges")]
    Length { expected: usize, found: usize },
    #[error("edge {edge} has multiplicity {mult}, at most 2 allowed")]
    Multiplicity { edge: usize, mult: u8 },
    #[error("invalid quasi-tour: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("variable {var} has {count} doubled forced edges, an odd number")]
    OddParity { var: usize, count: usize },
    #[error("tour is not normalized: {0}")]
    NotNormalized(String),
    #[error("instance mismatch: {0}")]
    Mismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    OddDegree { vertex: usize, degree: usize },
    ForcedUnused { edge: usize },
    TooManyCopies { edge: usize, mult: u8 },
}

/// Edge multiplicities, indexed by edge id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuasiTour {
    mult: Vec<u8>,
}

impl QuasiTour {
    pub fn empty(num_edges: usize) -> Self {
        QuasiTour { mult: vec![0; num_edges] }
    }

    pub fn from_multiplicities(mult: Vec<u8>) -> Self {
        QuasiTour { mult }
    }

    pub fn get(&self, e: usize) -> u8 {
        self.mult[e]
    }

    pub fn set(&mut self, e: usize, m: u8) {
        self.mult[e] = m;
    }

    pub fn add(&mut self, e: usize) {
        self.mult[e] += 1;
    }

    pub fn remove(&mut self, e: usize) {
        self.mult[e] -= 1;
    }

    pub fn multiplicities(&self) -> &[u8] {
        &self.mult
    }

    pub fn len(&self) -> usize {
        self.mult.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    fn check(&self, g: &TspInstance) -> Result<(), TourError> {
        if self.mult.len() != g.num_edges() {
            return Err(TourError::Length { expected: g.num_edges(), found: self.mult.len() });
        }
        match self.mult.iter().position(|&m| m > 2) {
            Some(edge) => Err(TourError::Multiplicity { edge, mult: self.mult[edge] }),
            None => Ok(()),
        }
    }
}

/// Connected components of the selected multigraph over all vertices.
pub fn components(g: &TspInstance, t: &QuasiTour) -> usize {
    let mut uf = UnionFind::new(g.num_vertices());
    let mut count = g.num_vertices();
    for (e, ed) in g.edges().iter().enumerate() {
        if t.mult[e] > 0 && uf.union(ed.u, ed.v) {
            count -= 1;
        }
    }
    count
}

/// `Σ w·mult + 2(c − 1)`.
pub fn tour_cost(g: &TspInstance, t: &QuasiTour) -> Result<Quarters, TourError> {
    t.check(g)?;
    Ok(raw_cost(g, t))
}

/// [`tour_cost`] without the multiplicity bound, for intermediate states.
pub(crate) fn raw_cost(g: &TspInstance, t: &QuasiTour) -> Quarters {
    let weight: Quarters = g.edges().iter().zip(&t.mult).map(|(e, &m)| e.weight * i64::from(m)).sum();
    weight + Quarters::whole(2 * (components(g, t) as i64 - 1))
}

pub fn validate_quasi_tour(g: &TspInstance, t: &QuasiTour) -> Result<(), TourError> {
    if t.mult.len() != g.num_edges() {
        return Err(TourError::Length { expected: g.num_edges(), found: t.mult.len() });
    }
    let mut violations = Vec::new();
    let mut degree = vec![0usize; g.num_vertices()];
    for (e, ed) in g.edges().iter().enumerate() {
        let m = t.mult[e];
        if m > 2 {
            violations.push(Violation::TooManyCopies { edge: e, mult: m });
        }
        if ed.forced && m == 0 {
            violations.push(Violation::ForcedUnused { edge: e });
        }
        degree[ed.u] += usize::from(m);
        degree[ed.v] += usize::from(m);
    }
    for (vertex, &d) in degree.iter().enumerate() {
        if d % 2 == 1 {
            violations.push(Violation::OddDegree { vertex, degree: d });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(TourError::Invalid(violations))
    }
}
