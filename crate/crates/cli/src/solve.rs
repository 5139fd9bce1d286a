use std::fmt::Write as _;

use forge_core::csp::{brute_force_min_unsat, min_unsat_eliminating, DEFAULT_BRUTE_FORCE_VARS};
use forge_core::formats::{write_asn, write_tour, write_tsplib};
use forge_core::oracles::{exact_min_quasi_tour, held_karp, held_karp_subdivided, HELD_KARP_MAX_VERTICES};
use forge_core::tsp::{ledger, subdivide_forced};
use num_rational::Ratio;
use serde_json::json;

use crate::config::FileConfig;
use crate::report::Reporter;
use crate::stages::{self, Stage};
use crate::{Emit, SolveCommand};

pub fn run(cmd: &SolveCommand, cfg: &FileConfig, rep: &mut Reporter) -> anyhow::Result<()> {
    match cmd {
        SolveCommand::Oracle { input, budget, out } => {
            let (g, inst) = stages::load_tsp(input)?;
            let (cost, tour) = exact_min_quasi_tour(&g, cfg.oracle_budget(*budget))?;
            let l = ledger(&g).total();
            rep.record(
                format!("minimum quasi-tour {cost} (L = {l}, excess {})", cost - l),
                json!({ "event": "oracle", "cost": cost.to_string(), "L": l.to_string() }),
            )?;
            if let Some(inst) = inst {
                let (k, _) = brute_force_min_unsat(&inst, DEFAULT_BRUTE_FORCE_VARS)?;
                rep.check(
                    "gap",
                    cost == l + forge_core::Quarters::whole(k as i64),
                    format!("min unsat {k}"),
                )?;
            }
            if let Some(out) = out {
                stages::write(out, &write_tour(&tour))?;
                rep.record(format!("wrote {}", out.display()), json!({ "event": "write", "out": out }))?;
            }
        }
        SolveCommand::Heldkarp { input, p, budget, out, emit } => {
            let (g, _) = stages::load_tsp(input)?;
            let p = cfg.subdivision_p(*p);
            let sg = subdivide_forced(&g, p)?;
            let (cost, uses) = held_karp_subdivided(&sg, cfg.oracle_budget(*budget))?;
            rep.record(
                format!("p = {p}: {} vertices, tour cost {cost} ≈ {:.6}", sg.num_vertices, approx(cost)),
                json!({ "event": "heldkarp", "p": p, "vertices": sg.num_vertices, "cost": cost }),
            )?;
            let closure =
                (sg.num_vertices <= HELD_KARP_MAX_VERTICES || emit.is_some()).then(|| sg.metric_closure());
            if let Some(dist) = closure.as_ref().filter(|_| sg.num_vertices <= HELD_KARP_MAX_VERTICES) {
                let (direct, _) = held_karp(dist)?;
                let direct = Ratio::new(direct, 4 * p as i64);
                rep.check(
                    "closure",
                    direct == cost,
                    format!("bitmask search on the metric closure gives {direct}"),
                )?;
            }
            if let Some(out) = out {
                let mut s = String::new();
                for (e, ((u, v, _, forced), use_)) in sg.contract().into_iter().zip(&uses).enumerate() {
                    writeln!(s, "c {e} {u} {v} {} {use_:?}", if forced { "forced" } else { "unit" })?;
                }
                stages::write(out, &s)?;
                rep.record(format!("wrote {}", out.display()), json!({ "event": "write", "out": out }))?;
                if let (Some(Emit::Tsplib), Some(dist)) = (emit, closure) {
                    let path = stages::sidecar(out, "tsp");
                    let name = input.file_stem().and_then(|s| s.to_str()).unwrap_or("forge");
                    stages::write(&path, &write_tsplib(name, &dist))?;
                    rep.record(
                        format!("wrote {}", path.display()),
                        json!({ "event": "write", "out": path }),
                    )?;
                }
            }
        }
        SolveCommand::Csp { input, budget, out } => {
            let limit = budget.unwrap_or(DEFAULT_BRUTE_FORCE_VARS);
            let (k, a) = match stages::load(input)? {
                Stage::Lin2(sys) => brute_force_min_unsat(&sys, limit)?,
                Stage::Clouded(sys) => brute_force_min_unsat(&sys, limit)?,
                Stage::O3(inst) if inst.num_vars() <= limit => brute_force_min_unsat(&inst, limit)?,
                Stage::O3(inst) => min_unsat_eliminating(&inst, limit)?,
                Stage::Tsp(_) => return stages::usage("solve csp needs a .lin2, .clouded or .o3 file"),
            };
            rep.record(format!("minimum unsatisfied {k}"), json!({ "event": "csp", "min_unsat": k }))?;
            if let Some(out) = out {
                stages::write(out, &write_asn(&a))?;
                rep.record(format!("wrote {}", out.display()), json!({ "event": "write", "out": out }))?;
            }
        }
    }
    Ok(())
}

fn approx(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
