//! Line-oriented text formats for every stage, plus TSPLIB export.
//!
//! `#` starts a comment everywhere. Variable, equation and amplifier indices
//! are 1-based; vertex and edge ids of `.tspg` and `.tour` are 0-based.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::amplifier::{AmplifierError, BipartiteAmplifier};
use crate::csp::{
    Assignment, Clause, CloudedSystem, CspError, Lin2Equation, Lin2System, Literal, OneInThreeInstance, Role,
    Variable,
};
use crate::quarters::Quarters;
use crate::reductions::{ReductionTrace, TraceRecord};
use crate::tours::QuasiTour;
use crate::tsp::{Edge, EdgeTag, TspError, TspInstance, Vertex, VertexRole};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error(transparent)]
    Amplifier(#[from] AmplifierError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

struct Line<'a> {
    no: usize,
    tokens: Vec<&'a str>,
    comment: Option<&'a str>,
}

impl Line<'_> {
    fn err(&self, msg: impl Into<String>) -> FormatError {
        FormatError::Parse { line: self.no, msg: msg.into() }
    }

    fn get<T: FromStr>(&self, i: usize, what: &str) -> Result<T, FormatError> {
        self.tokens
            .get(i)
            .ok_or_else(|| self.err(format!("missing {what}")))?
            .parse()
            .map_err(|_| self.err(format!("bad {what} {:?}", self.tokens[i])))
    }

    /// A 1-based index converted to 0-based.
    fn index(&self, i: usize, what: &str) -> Result<usize, FormatError> {
        match self.get::<usize>(i, what)? {
            0 => Err(self.err(format!("{what} must be at least 1"))),
            k => Ok(k - 1),
        }
    }

    fn arity(&self, n: usize) -> Result<(), FormatError> {
        if self.tokens.len() == n {
            Ok(())
        } else {
            Err(self.err(format!("expected {n} fields, found {}", self.tokens.len())))
        }
    }
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c.trim())),
            None => (raw, None),
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty() || comment.is_some()).then_some(Line { no: i + 1, tokens, comment })
    })
}

fn content(text: &str) -> impl Iterator<Item = Line<'_>> {
    lines(text).filter(|l| !l.tokens.is_empty())
}

/// Splits off the `p <kind> ...` header line.
fn header<'a>(it: &mut impl Iterator<Item = Line<'a>>, kind: &'static str) -> Result<Line<'a>, FormatError> {
    match it.next() {
        Some(l) if l.tokens.first() == Some(&"p") && l.tokens.get(1) == Some(&kind) => Ok(l),
        _ => Err(FormatError::MissingHeader(kind)),
    }
}

fn count_check(l: &Line<'_>, what: &str, expected: usize, found: usize) -> Result<(), FormatError> {
    if expected == found {
        Ok(())
    } else {
        Err(l.err(format!("header declares {expected} {what}, found {found}")))
    }
}

pub fn write_lin2(sys: &Lin2System) -> String {
    let mut s = format!("p lin2 {} {}\n", sys.num_vars(), sys.num_equations());
    for eq in sys.equations() {
        let [a, b, c] = eq.vars;
        writeln!(s, "{} {} {} {}", a + 1, b + 1, c + 1, u8::from(eq.rhs)).expect("string write");
    }
    s
}

pub fn parse_lin2(text: &str) -> Result<Lin2System, FormatError> {
    let mut it = content(text);
    let h = header(&mut it, "lin2")?;
    h.arity(4)?;
    let (n, m): (usize, usize) = (h.get(2, "variable count")?, h.get(3, "equation count")?);
    let mut eqs = Vec::with_capacity(m);
    for l in it {
        l.arity(4)?;
        let rhs = match l.get::<u8>(3, "right-hand side")? {
            0 => false,
            1 => true,
            _ => return Err(l.err("right-hand side must be 0 or 1")),
        };
        eqs.push(Lin2Equation::new(
            l.index(0, "variable")?,
            l.index(1, "variable")?,
            l.index(2, "variable")?,
            rhs,
        ));
    }
    count_check(&h, "equations", m, eqs.len())?;
    Ok(Lin2System::new(n, eqs)?)
}

pub fn write_asn(a: &Assignment) -> String {
    let mut s = String::new();
    for (i, &b) in a.bits().iter().enumerate() {
        writeln!(s, "{} {}", i + 1, u8::from(b)).expect("string write");
    }
    s
}

/// Every id from 1 to the largest one must appear exactly once.
pub fn parse_asn(text: &str) -> Result<Assignment, FormatError> {
    let mut values: Vec<Option<bool>> = Vec::new();
    for l in content(text) {
        l.arity(2)?;
        let id = l.index(0, "variable")?;
        let v = match l.get::<u8>(1, "value")? {
            0 => false,
            1 => true,
            _ => return Err(l.err("value must be 0 or 1")),
        };
        if values.len() <= id {
            values.resize(id + 1, None);
        }
        if values[id].replace(v).is_some() {
            return Err(l.err(format!("variable {} assigned twice", id + 1)));
        }
    }
    let bits = values
        .iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(FormatError::Parse { line: 0, msg: format!("variable {} unassigned", i + 1) }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Assignment::from_bits(bits))
}

fn literal(l: &Literal) -> String {
    format!("{}{}", if l.positive { "" } else { "-" }, l.var + 1)
}

pub fn write_o3(inst: &OneInThreeInstance) -> String {
    let mut s = format!("p o3 {} {}\n", inst.num_vars(), inst.clauses().len());
    for (i, v) in inst.variables().iter().enumerate() {
        writeln!(s, "v {} {} {} # {}", i + 1, v.role.letter(), v.owner + 1, v.name).expect("string write");
    }
    for c in inst.clauses() {
        s.push('c');
        for l in &c.literals {
            s.push(' ');
            s.push_str(&literal(l));
        }
        if let Some((k, slot)) = c.cluster {
            write!(s, " cluster {} slot {}", k + 1, slot + 1).expect("string write");
        }
        s.push('\n');
    }
    s
}

pub fn parse_o3(text: &str) -> Result<OneInThreeInstance, FormatError> {
    let mut it = content(text);
    let h = header(&mut it, "o3")?;
    h.arity(4)?;
    let (n, m): (usize, usize) = (h.get(2, "variable count")?, h.get(3, "clause count")?);
    let mut variables = Vec::with_capacity(n);
    let mut clauses = Vec::with_capacity(m);
    for l in it {
        match l.tokens[0] {
            "v" => {
                l.arity(4)?;
                let id = l.index(1, "variable id")?;
                if id != variables.len() {
                    return Err(l.err(format!(
                        "expected variable {}, found {}",
                        variables.len() + 1,
                        id + 1
                    )));
                }
                let role = Role::from_letter(l.tokens[2]).ok_or_else(|| l.err("role must be M, C or A"))?;
                let name =
                    l.comment.filter(|c| !c.is_empty()).map_or_else(|| (id + 1).to_string(), str::to_string);
                variables.push(Variable { name, role, owner: l.index(3, "owner")? });
            }
            "c" => {
                let (lits, rest) = match l.tokens.iter().position(|&t| t == "cluster") {
                    Some(i) => (&l.tokens[1..i], &l.tokens[i..]),
                    None => (&l.tokens[1..], &l.tokens[l.tokens.len()..]),
                };
                let mut literals = Vec::with_capacity(lits.len());
                for t in lits {
                    let (positive, digits) = match t.strip_prefix('-') {
                        Some(d) => (false, d),
                        None => (true, t.strip_prefix('+').unwrap_or(t)),
                    };
                    let var: usize = digits.parse().map_err(|_| l.err(format!("bad literal {t:?}")))?;
                    if var == 0 {
                        return Err(l.err("literal ids start at 1"));
                    }
                    literals.push(Literal { var: var - 1, positive });
                }
                let cluster = match rest {
                    [] => None,
                    ["cluster", k, "slot", s] => {
                        let k: usize = k.parse().map_err(|_| l.err("bad cluster index"))?;
                        let s: usize = s.parse().map_err(|_| l.err("bad slot"))?;
                        if k == 0 || !(1..=3).contains(&s) {
                            return Err(l.err("cluster index from 1, slot in 1..=3"));
                        }
                        Some((k - 1, s - 1))
                    }
                    _ => return Err(l.err("expected `cluster <k> slot <s>`")),
                };
                clauses.push(Clause { literals, cluster });
            }
            other => return Err(l.err(format!("unknown line type {other:?}"))),
        }
    }
    count_check(&h, "variables", n, variables.len())?;
    count_check(&h, "clauses", m, clauses.len())?;
    Ok(OneInThreeInstance::from_parts(variables, clauses)?)
}

/// Clouds in order, each introducing its copies then its checkers with
/// consecutive ids.
pub fn write_clouded(sys: &CloudedSystem) -> String {
    let mut s = String::from("p clouded\n");
    for c in sys.clouds() {
        writeln!(s, "cl {} {}", c.source + 1, c.degree()).expect("string write");
    }
    for &[x, y] in sys.eq2() {
        writeln!(s, "e2 {} {}", x + 1, y + 1).expect("string write");
    }
    for eq in sys.eq3() {
        let [a, b, c] = eq.vars;
        writeln!(s, "e3 {} {} {} {}", a + 1, b + 1, c + 1, u8::from(eq.rhs)).expect("string write");
    }
    s
}

pub fn parse_clouded(text: &str) -> Result<CloudedSystem, FormatError> {
    let mut it = content(text).peekable();
    header(&mut it, "clouded")?;
    let mut degrees = Vec::new();
    while let Some(l) = it.next_if(|l| l.tokens[0] == "cl") {
        l.arity(3)?;
        degrees.push((l.index(1, "source variable")?, l.get(2, "degree")?));
    }
    let mut sys = CloudedSystem::with_clouds(&degrees)?;
    let n = sys.num_vars();
    let var = |l: &Line<'_>, i: usize| -> Result<usize, FormatError> {
        let v = l.index(i, "variable")?;
        if v < n {
            Ok(v)
        } else {
            Err(l.err(format!("variable {} out of range", v + 1)))
        }
    };
    for l in it {
        match l.tokens[0] {
            "e2" => {
                l.arity(3)?;
                sys.push_eq2(var(&l, 1)?, var(&l, 2)?);
            }
            "e3" => {
                l.arity(5)?;
                let rhs = l.get::<u8>(4, "right-hand side")? == 1;
                sys.push_eq3(Lin2Equation::new(var(&l, 1)?, var(&l, 2)?, var(&l, 3)?, rhs));
            }
            "cl" => return Err(l.err("cloud lines must come first")),
            other => return Err(l.err(format!("unknown line type {other:?}"))),
        }
    }
    Ok(sys)
}

/// Certification outcome recorded alongside an amplifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmplifierNote {
    Certified {
        seed: u64,
    },
    /// 0-based left and right vertices of a violating set.
    Counterexample {
        left: Vec<usize>,
        right: Vec<usize>,
    },
}

pub fn write_amp(g: &BipartiteAmplifier, note: Option<&AmplifierNote>) -> String {
    let mut s = format!("p amp {}\n", g.size());
    for &(l, r) in g.edges() {
        writeln!(s, "{} {}", l + 1, r + 1).expect("string write");
    }
    match note {
        Some(AmplifierNote::Certified { seed }) => writeln!(s, "# certified seed={seed}"),
        Some(AmplifierNote::Counterexample { left, right }) => {
            let vs: Vec<String> = left
                .iter()
                .map(|v| format!("L{}", v + 1))
                .chain(right.iter().map(|v| format!("R{}", v + 1)))
                .collect();
            writeln!(s, "# counterexample {}", vs.join(" "))
        }
        None => Ok(()),
    }
    .expect("string write");
    s
}

pub fn parse_amp(text: &str) -> Result<(BipartiteAmplifier, Option<AmplifierNote>), FormatError> {
    let mut note = None;
    let mut size = None;
    let mut edges = Vec::new();
    for l in lines(text) {
        if let Some(c) = l.comment {
            if let Some(seed) = c.strip_prefix("certified seed=") {
                let seed = seed.trim().parse().map_err(|_| l.err("bad seed"))?;
                note = Some(AmplifierNote::Certified { seed });
            } else if let Some(list) = c.strip_prefix("counterexample") {
                let (mut left, mut right) = (Vec::new(), Vec::new());
                for t in list.split_whitespace() {
                    let (side, id) = t.split_at(1);
                    let id: usize = id.parse().map_err(|_| l.err(format!("bad vertex {t:?}")))?;
                    match (side, id) {
                        (_, 0) => return Err(l.err("vertex ids start at 1")),
                        ("L", _) => left.push(id - 1),
                        ("R", _) => right.push(id - 1),
                        _ => return Err(l.err(format!("bad vertex {t:?}"))),
                    }
                }
                note = Some(AmplifierNote::Counterexample { left, right });
            }
        }
        if l.tokens.is_empty() {
            continue;
        }
        if size.is_none() {
            if l.tokens.first() != Some(&"p") || l.tokens.get(1) != Some(&"amp") {
                return Err(FormatError::MissingHeader("amp"));
            }
            l.arity(3)?;
            size = Some(l.get::<usize>(2, "size")?);
            continue;
        }
        l.arity(2)?;
        edges.push((l.index(0, "left vertex")?, l.index(1, "right vertex")?));
    }
    let size = size.ok_or(FormatError::MissingHeader("amp"))?;
    Ok((BipartiteAmplifier::new(size, edges)?, note))
}

pub fn write_tspg(g: &TspInstance) -> String {
    let mut s = format!("p tspg {} {}\n", g.num_vertices(), g.num_edges());
    if let Some(m) = g.pipeline_m() {
        writeln!(s, "pipeline {m}").expect("string write");
    }
    for (i, v) in g.vertices().iter().enumerate() {
        let owner = v.owner.map_or_else(|| "-".to_string(), |o| (o + 1).to_string());
        writeln!(s, "v {i} {} {owner}", v.role).expect("string write");
    }
    for (i, e) in g.edges().iter().enumerate() {
        writeln!(s, "e {i} {} {} {} {} {}", e.u, e.v, e.weight.raw(), u8::from(e.forced), e.tag.name())
            .expect("string write");
    }
    s
}

pub fn parse_tspg(text: &str) -> Result<TspInstance, FormatError> {
    let mut it = content(text);
    let h = header(&mut it, "tspg")?;
    h.arity(4)?;
    let (nv, ne): (usize, usize) = (h.get(2, "vertex count")?, h.get(3, "edge count")?);
    let (mut vertices, mut edges, mut pipeline) = (Vec::with_capacity(nv), Vec::with_capacity(ne), None);
    for l in it {
        match l.tokens[0] {
            "pipeline" => {
                l.arity(2)?;
                pipeline = Some(l.get(1, "pipeline size")?);
            }
            "v" => {
                l.arity(4)?;
                if l.get::<usize>(1, "vertex id")? != vertices.len() {
                    return Err(l.err(format!("expected vertex {}", vertices.len())));
                }
                let role: VertexRole = l.tokens[2].parse().map_err(|e: String| l.err(e))?;
                let owner = match l.tokens[3] {
                    "-" => None,
                    _ => Some(l.index(3, "owner")?),
                };
                vertices.push(Vertex { role, owner });
            }
            "e" => {
                l.arity(7)?;
                if l.get::<usize>(1, "edge id")? != edges.len() {
                    return Err(l.err(format!("expected edge {}", edges.len())));
                }
                let forced = match l.get::<u8>(5, "forced flag")? {
                    0 => false,
                    1 => true,
                    _ => return Err(l.err("forced flag must be 0 or 1")),
                };
                let tag = EdgeTag::from_name(l.tokens[6]).ok_or_else(|| l.err("unknown edge tag"))?;
                edges.push(Edge {
                    u: l.get(2, "endpoint")?,
                    v: l.get(3, "endpoint")?,
                    weight: Quarters(l.get(4, "weight")?),
                    forced,
                    tag,
                });
            }
            other => return Err(l.err(format!("unknown line type {other:?}"))),
        }
    }
    count_check(&h, "vertices", nv, vertices.len())?;
    count_check(&h, "edges", ne, edges.len())?;
    let mut g = TspInstance::from_parts(vertices, edges)?;
    g.set_pipeline_m(pipeline);
    Ok(g)
}

pub fn write_tour(t: &QuasiTour) -> String {
    let mut s = String::new();
    for (e, &m) in t.multiplicities().iter().enumerate().filter(|(_, &m)| m > 0) {
        writeln!(s, "t {e} {m}").expect("string write");
    }
    s
}

pub fn parse_tour(text: &str, num_edges: usize) -> Result<QuasiTour, FormatError> {
    let mut t = QuasiTour::empty(num_edges);
    for l in content(text) {
        l.arity(3)?;
        if l.tokens[0] != "t" {
            return Err(l.err("expected `t <edge> <multiplicity>`"));
        }
        let e: usize = l.get(1, "edge id")?;
        if e >= num_edges {
            return Err(l.err(format!("edge {e} out of range")));
        }
        let m: u8 = l.get(2, "multiplicity")?;
        if !(1..=2).contains(&m) {
            return Err(l.err("multiplicity must be 1 or 2"));
        }
        if t.get(e) != 0 {
            return Err(l.err(format!("edge {e} listed twice")));
        }
        t.set(e, m);
    }
    Ok(t)
}

pub fn write_trace(trace: &ReductionTrace) -> Result<String, FormatError> {
    let mut s = String::new();
    for r in &trace.records {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    Ok(s)
}

pub fn parse_trace(text: &str) -> Result<ReductionTrace, FormatError> {
    let records = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str::<TraceRecord>)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReductionTrace { records })
}

/// TSPLIB `EXPLICIT` / `FULL_MATRIX` problem for a symmetric matrix.
pub fn write_tsplib(name: &str, dist: &[Vec<i64>]) -> String {
    let mut s = format!(
        "NAME: {name}\nTYPE: TSP\nDIMENSION: {}\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n",
        dist.len()
    );
    for row in dist {
        let cells: Vec<String> = row.iter().map(i64::to_string).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s.push_str("EOF\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplifier::sample_amplifier;
    use crate::corpus::{micro_corpus, planted_single_equation};
    use crate::reductions::{Pipeline, PipelineConfig};
    use crate::tsp::{build_tsp, BuildMode};

    #[test]
    fn micro_round_trips() {
        for mi in micro_corpus() {
            let text = write_o3(&mi.inst);
            assert_eq!(parse_o3(&text).unwrap(), mi.inst, "{}", mi.name);
            let g = build_tsp(&mi.inst, BuildMode::Direct).unwrap();
            assert_eq!(parse_tspg(&write_tspg(&g)).unwrap(), g, "{}", mi.name);
        }
    }

    #[test]
    fn pipeline_round_trips() {
        let p = Pipeline::run(&planted_single_equation(), &PipelineConfig::default()).unwrap();
        assert_eq!(parse_lin2(&write_lin2(&p.padded)).unwrap(), p.padded);
        assert_eq!(parse_clouded(&write_clouded(&p.clouded)).unwrap(), p.clouded);
        assert_eq!(parse_o3(&write_o3(&p.o3)).unwrap(), p.o3);
        assert_eq!(parse_trace(&write_trace(&p.trace).unwrap()).unwrap(), p.trace);
        let g = build_tsp(&p.o3, BuildMode::Pipeline).unwrap();
        let back = parse_tspg(&write_tspg(&g)).unwrap();
        assert_eq!(back.pipeline_m(), Some(5));
        assert_eq!(back, g);
    }

    #[test]
    fn amplifier_notes() {
        let g = sample_amplifier(10, 3).unwrap();
        for note in [
            None,
            Some(AmplifierNote::Certified { seed: 3 }),
            Some(AmplifierNote::Counterexample { left: vec![0, 4], right: vec![2] }),
        ] {
            let (h, n) = parse_amp(&write_amp(&g, note.as_ref())).unwrap();
            assert_eq!(h, g);
            assert_eq!(n, note);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_lin2("1 2 3 1\n"), Err(FormatError::MissingHeader("lin2"))));
        assert!(parse_lin2("p lin2 3 2\n1 2 3 1\n").is_err());
        assert!(parse_lin2("p lin2 3 1\n1 2 4 1\n").is_err());
        assert!(parse_lin2("p lin2 3 1\n1 2 3 2\n").is_err());
        assert!(parse_asn("1 0\n3 1\n").is_err());
        assert!(parse_tour("t 0 3\n", 4).is_err());
        assert!(parse_tour("t 9 1\n", 4).is_err());
    }

    #[test]
    fn lin2_comments_and_tsplib() {
        let sys = parse_lin2("# toy\np lin2 3 1\n1 2 3 1 # the only equation\n").unwrap();
        assert_eq!(sys.num_equations(), 1);
        let t = write_tsplib("tri", &[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        assert!(t.contains("DIMENSION: 3\n") && t.contains("0 1 1\n") && t.ends_with("EOF\n"));
    }
}
