use std::path::PathBuf;

use forge_core::corpus::random_lin2;
use forge_core::csp::{CloudedSystem, OneInThreeInstance};
use forge_core::formats::{
    write_amp, write_asn, write_clouded, write_lin2, write_o3, write_trace, write_tspg, AmplifierNote,
};
use forge_core::reductions::{clouded_to_1in3, CountCheck, Pipeline, PipelineConfig, ReductionTrace};
use forge_core::tsp::{ledger, BuildMode, RatioReport};
use serde_json::json;

use crate::config::FileConfig;
use crate::report::Reporter;
use crate::stages::{self, usage, Stage};
use crate::{GenArgs, PipelineArgs, ReduceArgs, Target};

pub fn gen_lin2(args: &GenArgs, rep: &mut Reporter) -> anyhow::Result<()> {
    if args.n < 3 || args.m < 1 {
        return usage(format!("need n >= 3 and m >= 1, got n={} m={}", args.n, args.m));
    }
    let (sys, hidden) = random_lin2(args.n, args.m, args.seed, args.planted)?;
    stages::write(&args.out, &write_lin2(&sys))?;
    rep.record(
        format!(
            "wrote {} ({} variables, {} equations)",
            args.out.display(),
            sys.num_vars(),
            sys.num_equations()
        ),
        json!({ "event": "gen-lin2", "out": args.out, "n": sys.num_vars(), "m": sys.num_equations() }),
    )?;
    if let Some(a) = hidden {
        let unsat = sys.count_unsat(&a)?;
        rep.check("planted", unsat == 0, format!("{unsat} equations violated by the planted assignment"))?;
        let path = stages::sidecar(&args.out, "asn");
        stages::write(&path, &write_asn(&a))?;
        rep.record(format!("wrote {}", path.display()), json!({ "event": "write", "out": path }))?;
    }
    Ok(())
}

pub fn pipeline_config(args: &PipelineArgs, cfg: &FileConfig) -> PipelineConfig {
    PipelineConfig {
        min_occ: cfg.min_occ(args.min_occ),
        amp_seed: cfg.amp_seed(args.amp_seed),
        amp_attempts: cfg.amp_attempts(args.amp_attempts),
        amp_budget: cfg.amp_budget(args.amp_budget),
    }
}

pub fn record_counts(rep: &mut Reporter, checks: &[CountCheck]) -> anyhow::Result<()> {
    for c in checks {
        rep.check(&c.label, c.holds(), format!("expected {} found {}", c.expected, c.actual))?;
    }
    Ok(())
}

enum Reached {
    Clouded(CloudedSystem),
    O3(OneInThreeInstance),
}

fn extension(to: Target) -> &'static str {
    match to {
        Target::Clouded => "clouded",
        Target::O3 => "o3",
        Target::Tsp => "tspg",
    }
}

pub fn reduce(args: &ReduceArgs, cfg: &FileConfig, rep: &mut Reporter) -> anyhow::Result<()> {
    let out: PathBuf = args.out.clone().unwrap_or_else(|| args.input.with_extension(extension(args.to)));
    if out == args.input {
        return usage("output would overwrite the input");
    }
    let mut trace = ReductionTrace::default();
    let reached = match stages::load(&args.input)? {
        Stage::Lin2(sys) => {
            let pc = pipeline_config(&args.pipeline, cfg);
            let p = Pipeline::run(&sys, &pc)?;
            rep.record(
                format!("padded by {} repetitions to m = {}", p.repetitions, p.m()),
                json!({ "event": "pad", "repetitions": p.repetitions, "m": p.m() }),
            )?;
            record_counts(rep, &p.identities())?;
            for (d, found) in p.amplifiers.entries() {
                let path = out.with_extension(format!("d{d}.amp"));
                stages::write(
                    &path,
                    &write_amp(&found.graph, Some(&AmplifierNote::Certified { seed: found.seed })),
                )?;
                rep.record(
                    format!("amplifier B={d} certified at attempt {} (seed {}): {}", found.attempt, found.seed, path.display()),
                    json!({ "event": "amplifier", "degree": d, "attempt": found.attempt, "seed": found.seed, "out": path }),
                )?;
            }
            trace = p.trace;
            match args.to {
                Target::Clouded => Reached::Clouded(p.clouded),
                _ => Reached::O3(p.o3),
            }
        }
        Stage::Clouded(sys) if args.to != Target::Clouded => {
            sys.validate()?;
            let (o3, t) = clouded_to_1in3(&sys)?;
            trace = t;
            Reached::O3(o3)
        }
        Stage::O3(inst) if args.to == Target::Tsp => Reached::O3(inst),
        other => return usage(format!("cannot reduce .{} to .{}", other.kind(), extension(args.to))),
    };
    let text = match reached {
        Reached::Clouded(sys) => write_clouded(&sys),
        Reached::O3(inst) if args.to == Target::O3 => {
            rep.record(
                format!("1-in-3 instance: {} variables, {} clauses", inst.num_vars(), inst.clauses().len()),
                json!({ "event": "o3", "vars": inst.num_vars(), "clauses": inst.clauses().len() }),
            )?;
            write_o3(&inst)
        }
        Reached::O3(inst) => {
            let (g, mode) = stages::build_auto(&inst)?;
            let lg = ledger(&g);
            rep.record(
                format!(
                    "TSP ({mode:?}): {} vertices, {} edges, L = {} (F = {}, N = {}, M = {})",
                    g.num_vertices(),
                    g.num_edges(),
                    lg.total(),
                    lg.forced,
                    lg.variables,
                    lg.clauses
                ),
                json!({ "event": "tsp", "mode": mode, "ledger": lg, "L": lg.total().to_string() }),
            )?;
            if mode == BuildMode::Pipeline {
                record_counts(rep, &lg.identities())?;
                if let Some(r) = RatioReport::from_ledger(&lg) {
                    let r = r?;
                    for line in r.lines() {
                        rep.record(line, json!({ "event": "ratio", "report": r }))?;
                    }
                }
            }
            write_tspg(&g)
        }
    };
    stages::write(&out, &text)?;
    rep.record(format!("wrote {}", out.display()), json!({ "event": "write", "out": out }))?;
    let trace_path = stages::appended(&out, "trace");
    stages::write(&trace_path, &write_trace(&trace)?)?;
    rep.record(
        format!("wrote {} ({} records)", trace_path.display(), trace.records.len()),
        json!({ "event": "write", "out": trace_path, "records": trace.records.len() }),
    )?;
    Ok(())
}
