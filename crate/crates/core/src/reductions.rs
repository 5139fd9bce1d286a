//! The CSP compiler: occurrence padding, the amplifier-based clouded system,
//! the 1-in-3-SAT cluster encoding, and assignment transport between them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplifier::{
    find_certified_amplifier, AmplifierError, BipartiteAmplifier, FoundAmplifier, DEFAULT_CERT_BUDGET,
};
use crate::csp::{
    extend_aux_optimal, Assignment, CloudVarKind, CloudedSystem, CspError, Lin2Equation, Lin2System,
    OneInThreeInstance, Role,
};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error(transparent)]
    Amplifier(#[from] AmplifierError),
    #[error("no amplifier for cloud degree {0}")]
    MissingAmplifier(usize),
    #[error("minimum occurrence {0} is not a multiple of 5")]
    InvalidMinOcc(usize),
    #[error("counting identity violated: {0}")]
    Identity(String),
}

/// One provenance link: constraint or variable `from` of stage `stage - 1`
/// gives rise to `to` in `stage`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub stage: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub records: Vec<TraceRecord>,
}

impl ReductionTrace {
    fn push(&mut self, stage: &str, from: String, to: String) {
        self.records.push(TraceRecord { stage: stage.into(), from, to });
    }

    pub fn extend(&mut self, other: ReductionTrace) {
        self.records.extend(other.records);
    }

    /// Every `from` recorded for `to` in `stage`.
    pub fn origins(&self, stage: &str, to: &str) -> Vec<&str> {
        self.records.iter().filter(|r| r.stage == stage && r.to == to).map(|r| r.from.as_str()).collect()
    }
}

/// Repeats the whole system `r` times for the smallest `r` making every
/// occurring variable's count a multiple of 5 and at least `min_occ`.
/// Returns the padded system and `r`.
pub fn pad_occurrences(sys: &Lin2System, min_occ: usize) -> Result<(Lin2System, usize), ReductionError> {
    if !min_occ.is_multiple_of(5) {
        return Err(ReductionError::InvalidMinOcc(min_occ));
    }
    let occ: Vec<usize> = sys.occurrences().into_iter().filter(|&o| o > 0).collect();
    let r = (1..)
        .find(|&r| occ.iter().all(|&o| (r * o) % 5 == 0 && r * o >= min_occ))
        .expect("r = 5 * min_occ always works");
    let eqs = (0..r).flat_map(|_| sys.equations().iter().copied()).collect();
    Ok((Lin2System::new(sys.num_vars(), eqs)?, r))
}

/// Certified amplifiers keyed by cloud degree, one per distinct degree.
#[derive(Clone, Debug, Default)]
pub struct AmplifierBank {
    graphs: BTreeMap<usize, FoundAmplifier>,
}

impl AmplifierBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, degree: usize, amp: FoundAmplifier) {
        self.graphs.insert(degree, amp);
    }

    pub fn get(&self, degree: usize) -> Option<&BipartiteAmplifier> {
        self.graphs.get(&degree).map(|f| &f.graph)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &FoundAmplifier)> {
        self.graphs.iter().map(|(&d, f)| (d, f))
    }

    /// Searches a certified amplifier for every distinct occurrence count of
    /// `sys`, all from the same master seed.
    pub fn certified_for(
        sys: &Lin2System,
        seed: u64,
        attempts: u64,
        budget: u64,
    ) -> Result<Self, ReductionError> {
        let mut bank = Self::new();
        for d in sys.occurrences() {
            if d > 0 && bank.get(d).is_none() {
                bank.insert(d, find_certified_amplifier(d, seed, attempts, budget)?);
            }
        }
        Ok(bank)
    }
}

/// Replaces every occurring variable by a cloud wired along its amplifier
/// and rewrites the `j`-th appearance of variable `i` (in equation order) to
/// the copy `x(i,j)`.
pub fn lin2_to_clouded(
    sys: &Lin2System,
    bank: &AmplifierBank,
) -> Result<(CloudedSystem, ReductionTrace), ReductionError> {
    let occ = sys.occurrences();
    let degrees: Vec<(usize, usize)> =
        occ.iter().enumerate().filter(|&(_, &d)| d > 0).map(|(i, &d)| (i, d)).collect();
    let mut out = CloudedSystem::with_clouds(&degrees)?;
    let mut trace = ReductionTrace::default();
    let mut cloud_of = vec![usize::MAX; sys.num_vars()];
    for (c, &(i, d)) in degrees.iter().enumerate() {
        cloud_of[i] = c;
        let amp = bank.get(d).ok_or(ReductionError::MissingAmplifier(d))?;
        let cloud = out.clouds()[c].clone();
        for &(l, r) in amp.edges() {
            let k = out.push_eq2(cloud.copies[l], cloud.checkers[r]);
            trace.push("clouded", format!("amp {} {} {}", i + 1, l + 1, r + 1), format!("e2 {}", k + 1));
        }
    }
    let mut seen = vec![0usize; sys.num_vars()];
    for (e, eq) in sys.equations().iter().enumerate() {
        let vars = eq.vars.map(|v| {
            let copy = out.clouds()[cloud_of[v]].copies[seen[v]];
            seen[v] += 1;
            trace.push("clouded", format!("var {} occ {}", v + 1, seen[v]), out.vars()[copy].name.clone());
            copy
        });
        let k = out.push_eq3(Lin2Equation { vars, rhs: eq.rhs });
        trace.push("clouded", format!("eq {}", e + 1), format!("e3 {}", k + 1));
    }
    out.validate()?;
    Ok((out, trace))
}

/// Copies become main variables and checkers become checker variables, with
/// the same ids and names. Each size-2 equation `x + y = 1` becomes `(x ∨ y)`
/// and each size-3 equation becomes a cluster; the clauses of size-2
/// equations come first, in equation order.
pub fn clouded_to_1in3(sys: &CloudedSystem) -> Result<(OneInThreeInstance, ReductionTrace), ReductionError> {
    sys.validate()?;
    let mut out = OneInThreeInstance::new();
    for v in sys.vars() {
        let role = match v.kind {
            CloudVarKind::Copy => Role::Main,
            CloudVarKind::Checker => Role::Checker,
        };
        out.add_var(v.name.clone(), role, v.cloud);
    }
    let mut trace = ReductionTrace::default();
    for (k, &[x, y]) in sys.eq2().iter().enumerate() {
        let c = out.add_pair_clause(x, y);
        trace.push("o3", format!("e2 {}", k + 1), format!("c {}", c + 1));
    }
    for (k, eq) in sys.eq3().iter().enumerate() {
        let cl = out.add_cluster(eq.vars, !eq.rhs);
        for c in out.clusters()[cl].clauses {
            trace.push("o3", format!("e3 {}", k + 1), format!("c {}", c + 1));
        }
    }
    out.validate_pipeline()?;
    Ok((out, trace))
}

/// Consistent clouds from `a1`, then the optimal auxiliary extension.
pub fn transport_assignment_down(
    clouded: &CloudedSystem,
    o3: &OneInThreeInstance,
    a1: &Assignment,
) -> Result<Assignment, ReductionError> {
    let a2 = clouded.consistent_assignment(a1.bits());
    let mut bits = a2.into_bits();
    bits.resize(o3.num_vars(), false);
    Ok(extend_aux_optimal(o3, &Assignment::from_bits(bits))?)
}

/// Per-cloud majority of the copies, ties toward 0.
pub fn transport_assignment_up(clouded: &CloudedSystem, num_sources: usize, a3: &Assignment) -> Assignment {
    Assignment::from_bits(clouded.majority_values(a3, num_sources))
}

/// An expected/actual pair printed and checked by the pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountCheck {
    pub label: String,
    pub expected: i64,
    pub actual: i64,
}

impl CountCheck {
    pub fn new(label: impl Into<String>, expected: i64, actual: i64) -> Self {
        CountCheck { label: label.into(), expected, actual }
    }

    pub fn holds(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub min_occ: usize,
    pub amp_seed: u64,
    pub amp_attempts: u64,
    pub amp_budget: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { min_occ: 5, amp_seed: 0, amp_attempts: 10_000, amp_budget: DEFAULT_CERT_BUDGET }
    }
}

/// All CSP stages of one run, from the original system to the 1-in-3-SAT
/// instance.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub original: Lin2System,
    pub padded: Lin2System,
    pub repetitions: usize,
    pub amplifiers: AmplifierBank,
    pub clouded: CloudedSystem,
    pub o3: OneInThreeInstance,
    pub trace: ReductionTrace,
}

impl Pipeline {
    pub fn run(sys: &Lin2System, cfg: &PipelineConfig) -> Result<Self, ReductionError> {
        let (padded, repetitions) = pad_occurrences(sys, cfg.min_occ)?;
        let amplifiers =
            AmplifierBank::certified_for(&padded, cfg.amp_seed, cfg.amp_attempts, cfg.amp_budget)?;
        Self::with_amplifiers(sys, padded, repetitions, amplifiers)
    }

    pub fn with_amplifiers(
        sys: &Lin2System,
        padded: Lin2System,
        repetitions: usize,
        amplifiers: AmplifierBank,
    ) -> Result<Self, ReductionError> {
        let mut trace = ReductionTrace::default();
        let m = sys.num_equations();
        for rep in 0..repetitions {
            for e in 0..m {
                trace.push("pad", format!("eq {}", e + 1), format!("eq {}", rep * m + e + 1));
            }
        }
        let (clouded, t2) = lin2_to_clouded(&padded, &amplifiers)?;
        let (o3, t3) = clouded_to_1in3(&clouded)?;
        trace.extend(t2);
        trace.extend(t3);
        let p = Pipeline { original: sys.clone(), padded, repetitions, amplifiers, clouded, o3, trace };
        if let Some(bad) = p.identities().into_iter().find(|c| !c.holds()) {
            return Err(ReductionError::Identity(format!(
                "{}: expected {}, found {}",
                bad.label, bad.expected, bad.actual
            )));
        }
        Ok(p)
    }

    /// Number of size-3 equations of the padded system.
    pub fn m(&self) -> usize {
        self.padded.num_equations()
    }

    /// The counting identities every pipeline output satisfies, in tenths
    /// where the factor is fractional.
    pub fn identities(&self) -> Vec<CountCheck> {
        let m = self.m() as i64;
        let c = &self.clouded;
        vec![
            CountCheck::new("size-2 equations = 12m", 12 * m, c.eq2().len() as i64),
            CountCheck::new("I2 equations = 13m", 13 * m, (c.eq2().len() + c.eq3().len()) as i64),
            CountCheck::new("clauses = 15m", 15 * m, self.o3.clauses().len() as i64),
            CountCheck::new("10·variables = 84m", 84 * m, 10 * self.o3.num_vars() as i64),
        ]
    }

    pub fn transport_down(&self, a1: &Assignment) -> Result<Assignment, ReductionError> {
        a1.check_len(self.original.num_vars())?;
        transport_assignment_down(&self.clouded, &self.o3, a1)
    }

    pub fn transport_up(&self, a3: &Assignment) -> Result<Assignment, ReductionError> {
        a3.check_len(self.o3.num_vars())?;
        Ok(transport_assignment_up(&self.clouded, self.original.num_vars(), a3))
    }
}
