//! Random 4/5-regular bipartite amplifiers and their exhaustive certification.
//!
//! An amplifier on `B` left vertices (degree 4) and `4B/5` right vertices
//! (degree 5) is *certified* when every `S ⊆ L ∪ R` with `|S ∩ L| <= B/2` has
//! at least `|S ∩ L|` edges leaving it. Parallel edges from the stub sampler
//! are kept and counted with multiplicity.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Left-subset evaluations allowed per certification by default.
pub const DEFAULT_CERT_BUDGET: u64 = 1 << 18;

pub const LEFT_DEGREE: usize = 4;
pub const RIGHT_DEGREE: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmplifierError {
    #[error("amplifier size {0} must be a positive multiple of 5")]
    InvalidSize(usize),
    #[error("certification needs {needed} subset evaluations, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("no certified amplifier of size {size} in {attempts} attempts")]
    Exhausted { size: usize, attempts: u64 },
    #[error("malformed amplifier: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteAmplifier {
    size: usize,
    /// `(left, right)` pairs, 0-based; a multiset.
    edges: Vec<(usize, usize)>,
}

impl BipartiteAmplifier {
    pub fn new(size: usize, edges: Vec<(usize, usize)>) -> Result<Self, AmplifierError> {
        if size == 0 || !size.is_multiple_of(5) {
            return Err(AmplifierError::InvalidSize(size));
        }
        let right = size * 4 / 5;
        let mut ldeg = vec![0; size];
        let mut rdeg = vec![0; right];
        for &(l, r) in &edges {
            if l >= size || r >= right {
                return Err(AmplifierError::Malformed(format!("edge ({l},{r}) out of range")));
            }
            ldeg[l] += 1;
            rdeg[r] += 1;
        }
        if ldeg.iter().any(|&d| d != LEFT_DEGREE) || rdeg.iter().any(|&d| d != RIGHT_DEGREE) {
            return Err(AmplifierError::Malformed("degree constraints violated".into()));
        }
        Ok(BipartiteAmplifier { size, edges })
    }

    /// `|L| = B`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn right_count(&self) -> usize {
        self.size * 4 / 5
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_parallel_edges(&self) -> bool {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e.windows(2).any(|w| w[0] == w[1])
    }

    /// Edge multiplicities, `mult[r][l]`.
    fn right_adjacency(&self) -> Vec<Vec<u32>> {
        let mut mult = vec![vec![0u32; self.size]; self.right_count()];
        for &(l, r) in &self.edges {
            mult[r][l] += 1;
        }
        mult
    }

    pub fn is_connected(&self) -> bool {
        let n = self.size + self.right_count();
        let mut adj = vec![Vec::new(); n];
        for &(l, r) in &self.edges {
            adj[l].push(self.size + r);
            adj[self.size + r].push(l);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Number of edges with exactly one endpoint in `S`.
    pub fn cut(&self, left: &[usize], right: &[usize]) -> usize {
        self.edges.iter().filter(|&&(l, r)| left.contains(&l) != right.contains(&r)).count()
    }
}

/// Samples a degree-exact bipartite multigraph by matching the `4B` left
/// stubs against a shuffled list of the `4B` right stubs.
pub fn sample_amplifier(size: usize, seed: u64) -> Result<BipartiteAmplifier, AmplifierError> {
    if size < 5 || !size.is_multiple_of(5) {
        return Err(AmplifierError::InvalidSize(size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut right: Vec<usize> =
        (0..size * 4 / 5).flat_map(|r| std::iter::repeat_n(r, RIGHT_DEGREE)).collect();
    right.shuffle(&mut rng);
    let edges = right.into_iter().enumerate().map(|(i, r)| (i / LEFT_DEGREE, r)).collect();
    BipartiteAmplifier::new(size, edges)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certification {
    Certified,
    Counterexample { left: Vec<usize>, right: Vec<usize>, cut: usize },
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified)
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of left subsets the certifier visits for size `B`.
pub fn certification_cost(size: usize) -> u64 {
    (0..=size as u64 / 2).map(|k| binomial(size as u64, k)).sum()
}

/// Exhaustive check of the cut property.
///
/// Left subsets are visited by increasing size up to `B/2`. For a fixed left
/// part the right part that minimises the cut is found vertex by vertex: a
/// right vertex with `e` edges into `S ∩ L` contributes `e` when left out of
/// `S` and `5 - e` when put in, independently of the others.
pub fn certify_amplifier(g: &BipartiteAmplifier, budget: u64) -> Result<Certification, AmplifierError> {
    let needed = certification_cost(g.size);
    if needed > budget {
        return Err(AmplifierError::BudgetExceeded { needed, budget });
    }
    let b = g.size;
    let mult = g.right_adjacency();
    for k in 1..=b / 2 {
        // Gosper's hack over k-subsets of L
        let mut set: u64 = (1 << k) - 1;
        while set < 1 << b {
            let mut cut = 0usize;
            for row in &mult {
                let into: u32 = (0..b).filter(|&l| set >> l & 1 == 1).map(|l| row[l]).sum();
                cut += into.min(RIGHT_DEGREE as u32 - into) as usize;
            }
            if cut < k {
                let left: Vec<usize> = (0..b).filter(|&l| set >> l & 1 == 1).collect();
                let right: Vec<usize> = (0..mult.len())
                    .filter(|&r| {
                        let into: u32 = left.iter().map(|&l| mult[r][l]).sum();
                        RIGHT_DEGREE as u32 - into < into
                    })
                    .collect();
                return Ok(Certification::Counterexample { left, right, cut });
            }
            let c = set & set.wrapping_neg();
            let r = set + c;
            set = (((r ^ set) >> 2) / c) | r;
        }
    }
    Ok(Certification::Certified)
}

/// A certified amplifier together with the sampler seed that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoundAmplifier {
    pub graph: BipartiteAmplifier,
    pub seed: u64,
    pub attempt: u64,
}

/// Samples until a graph certifies. Sampler seeds are drawn from a ChaCha
/// stream keyed by `seed`, so the result is a pure function of the inputs.
pub fn find_certified_amplifier(
    size: usize,
    seed: u64,
    attempts: u64,
    budget: u64,
) -> Result<FoundAmplifier, AmplifierError> {
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..attempts {
        let sub = seeds.gen::<u64>();
        let graph = sample_amplifier(size, sub)?;
        if certify_amplifier(&graph, budget)?.is_certified() {
            // a component holding at most half of L would have an empty cut
            assert!(graph.is_connected(), "certified amplifier is disconnected");
            return Ok(FoundAmplifier { graph, seed: sub, attempt });
        }
    }
    Err(AmplifierError::Exhausted { size, attempts })
}
