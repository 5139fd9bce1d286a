use std::collections::BTreeMap;

use forge_core::amplifier::{certify_amplifier, find_certified_amplifier, Certification};
use forge_core::corpus::{micro_corpus, planted_single_equation, transport_toys};
use forge_core::csp::{Assignment, Lin2System, OneInThreeInstance};
use forge_core::formats::{
    parse_amp, parse_clouded, parse_lin2, parse_o3, parse_trace, parse_tspg, write_amp, write_clouded,
    write_lin2, write_o3, write_trace, write_tspg, AmplifierNote,
};
use forge_core::oracles::gap_check;
use forge_core::reductions::Pipeline;
use forge_core::tours::{
    assignment_to_tour, extract_assignment, honesty, normalize_tour, perturb_tour, tour_cost,
    verify_extraction_bound, ExtractionMode, TourError,
};
use forge_core::tsp::{build_tsp, ledger, BuildMode, TspInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::FileConfig;
use crate::reduce::{pipeline_config, record_counts};
use crate::report::Reporter;
use crate::stages::{self, usage, Stage};
use crate::{PipelineArgs, TourArgs, VerifyCommand};

pub fn run(cmd: &VerifyCommand, cfg: &FileConfig, rep: &mut Reporter) -> anyhow::Result<()> {
    match cmd {
        VerifyCommand::Amplifier { input, size, seed, attempts, budget, out } => amplifier(
            input.as_deref(),
            *size,
            cfg.amp_seed(*seed),
            cfg.amp_attempts(*attempts),
            cfg.amp_budget(*budget),
            out.as_deref(),
            rep,
        ),
        VerifyCommand::Roundtrip { input, pipeline } => roundtrip(input.as_deref(), pipeline, cfg, rep),
        VerifyCommand::Gap { input, budget } => gap(input.as_deref(), cfg.oracle_budget(*budget), rep),
        VerifyCommand::Parity(args) => tours(args, cfg, rep, false),
        VerifyCommand::Credits(args) => tours(args, cfg, rep, true),
    }
}

fn amplifier(
    input: Option<&std::path::Path>,
    size: Option<usize>,
    seed: u64,
    attempts: u64,
    budget: u64,
    out: Option<&std::path::Path>,
    rep: &mut Reporter,
) -> anyhow::Result<()> {
    let (graph, note) = match input {
        Some(path) => {
            let (graph, claimed) = parse_amp(&stages::read(path)?)
                .map_err(|e| anyhow::Error::new(e).context(format!("parsing {}", path.display())))?;
            let result = certify_amplifier(&graph, budget)?;
            let name = format!("amplifier {}", path.display());
            match &result {
                Certification::Certified => {
                    rep.check(&name, true, format!("B={} certified", graph.size()))?
                }
                Certification::Counterexample { left, right, cut } => rep.check(
                    &name,
                    false,
                    format!(
                        "B={} violated by |S∩L|={} |S∩R|={} with cut {cut}",
                        graph.size(),
                        left.len(),
                        right.len()
                    ),
                )?,
            }
            if let Some(AmplifierNote::Certified { .. }) = claimed {
                rep.check("note agrees", result.is_certified(), "file claims certification")?;
            }
            let note = match result {
                Certification::Certified => claimed.filter(|n| matches!(n, AmplifierNote::Certified { .. })),
                Certification::Counterexample { left, right, .. } => {
                    Some(AmplifierNote::Counterexample { left, right })
                }
            };
            (graph, note)
        }
        None => {
            let size = size.unwrap_or(5);
            let found = find_certified_amplifier(size, seed, attempts, budget)?;
            rep.record(
                format!(
                    "B={size}: certified graph at attempt {} (sampler seed {})",
                    found.attempt, found.seed
                ),
                json!({ "event": "amplifier", "size": size, "attempt": found.attempt, "seed": found.seed }),
            )?;
            (found.graph, Some(AmplifierNote::Certified { seed: found.seed }))
        }
    };
    if let Some(out) = out {
        stages::write(out, &write_amp(&graph, note.as_ref()))?;
        rep.record(format!("wrote {}", out.display()), json!({ "event": "write", "out": out }))?;
    }
    Ok(())
}

fn roundtrip(
    input: Option<&std::path::Path>,
    args: &PipelineArgs,
    cfg: &FileConfig,
    rep: &mut Reporter,
) -> anyhow::Result<()> {
    let systems: Vec<(String, Lin2System)> = match input {
        Some(path) => match stages::load(path)? {
            Stage::Lin2(sys) => vec![(path.display().to_string(), sys)],
            other => return usage(format!("roundtrip needs a .lin2 file, got .{}", other.kind())),
        },
        None => std::iter::once(("planted-single".to_string(), planted_single_equation()))
            .chain(transport_toys().into_iter().map(|(n, s)| (n.to_string(), s)))
            .collect(),
    };
    let pc = pipeline_config(args, cfg);
    for (name, sys) in systems {
        let p = Pipeline::run(&sys, &pc)?;
        record_counts(rep, &p.identities())?;
        let g = build_tsp(&p.o3, BuildMode::Pipeline)?;
        record_counts(rep, &ledger(&g).identities())?;

        let fmt = [
            ("lin2", parse_lin2(&write_lin2(&p.padded)).ok() == Some(p.padded.clone())),
            ("clouded", parse_clouded(&write_clouded(&p.clouded)).ok() == Some(p.clouded.clone())),
            ("o3", parse_o3(&write_o3(&p.o3)).ok() == Some(p.o3.clone())),
            ("tspg", parse_tspg(&write_tspg(&g)).ok() == Some(g.clone())),
            ("trace", parse_trace(&write_trace(&p.trace)?).ok() == Some(p.trace.clone())),
        ];
        for (ext, ok) in fmt {
            rep.check(&format!("{name} .{ext} round trip"), ok, "")?;
        }
        for (d, found) in p.amplifiers.entries() {
            let back = parse_amp(&write_amp(&found.graph, None)).ok().map(|(a, _)| a);
            rep.check(
                &format!("{name} .amp round trip"),
                back.as_ref() == Some(&found.graph),
                format!("B={d}"),
            )?;
        }

        let n = sys.num_vars();
        let samples: Vec<Assignment> = if n <= 10 {
            (0..1u64 << n).map(|m| Assignment::from_mask(m, n)).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            (0..256).map(|_| Assignment::from_bits((0..n).map(|_| rng.gen()).collect())).collect()
        };
        let mut bad = 0;
        for a1 in &samples {
            let a3 = p.transport_down(a1)?;
            let same_unsat = p.o3.count_unsat(&a3)? == p.padded.count_unsat(a1)?;
            if !same_unsat || &p.transport_up(&a3)? != a1 {
                bad += 1;
            }
        }
        rep.check(
            &format!("{name} transport"),
            bad == 0,
            format!(
                "{} of {} assignments keep their unsatisfied count and decode back",
                samples.len() - bad,
                samples.len()
            ),
        )?;
    }
    Ok(())
}

/// `.o3` from the command line or the micro corpus, each with its TSP
/// instance.
fn instances(
    input: Option<&std::path::Path>,
) -> anyhow::Result<Vec<(String, OneInThreeInstance, TspInstance)>> {
    match input {
        Some(path) => {
            let inst = stages::load_o3(path)?;
            let (g, _) = stages::build_auto(&inst)?;
            Ok(vec![(path.display().to_string(), inst, g)])
        }
        None => micro_corpus()
            .into_iter()
            .map(|mi| {
                let g = build_tsp(&mi.inst, BuildMode::Direct)?;
                Ok((mi.name.to_string(), mi.inst, g))
            })
            .collect(),
    }
}

fn gap(input: Option<&std::path::Path>, budget: u64, rep: &mut Reporter) -> anyhow::Result<()> {
    for (name, inst, g) in instances(input)? {
        let r = gap_check(&g, &inst, budget)?;
        rep.check(
            &format!("gap {name}"),
            r.holds(),
            format!("min tour {} = L {} + min unsat {}", r.min_tour, r.l, r.min_unsat),
        )?;
    }
    Ok(())
}

fn tours(args: &TourArgs, cfg: &FileConfig, rep: &mut Reporter, credits: bool) -> anyhow::Result<()> {
    let count = cfg.tours(args.tours);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed(args.seed));
    let what = if credits { "credits" } else { "parity" };
    for (name, inst, g) in instances(args.input.as_deref())? {
        let n = inst.num_vars();
        let mut rules: BTreeMap<String, usize> = BTreeMap::new();
        let (mut failures, mut dishonest, mut cost_up) = (0usize, 0usize, 0usize);
        for i in 0..count {
            let a = Assignment::from_bits((0..n).map(|_| rng.gen()).collect());
            let (t, _) = assignment_to_tour(&g, &inst, &a)?;
            let perturbed = perturb_tour(&g, &t, &mut rng);
            let (normal, steps) = normalize_tour(&g, &perturbed)?;
            for s in &steps {
                *rules.entry(format!("{:?}", s.rule)).or_default() += 1;
            }
            if tour_cost(&g, &normal)? > tour_cost(&g, &perturbed)? {
                cost_up += 1;
            }
            let report = match honesty(&g, &normal) {
                Ok(r) => r,
                Err(e @ TourError::OddParity { .. }) => {
                    failures += 1;
                    rep.check(&format!("{what} {name} tour {i}"), false, e.to_string())?;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            if !report.all_honest() {
                dishonest += 1;
            }
            if credits {
                let (b, ledger) = extract_assignment(&g, &inst, &normal, ExtractionMode::Derandomized)?;
                let cert = verify_extraction_bound(&g, &inst, &normal, &b, &ledger)?;
                if !cert.holds() || ledger.total() > ledger.bound {
                    failures += 1;
                    rep.check(&format!("{what} {name} tour {i}"), false, cert.to_string())?;
                }
            }
        }
        rep.check(
            &format!("{what} {name}"),
            failures == 0 && cost_up == 0,
            format!("{count} tours, {dishonest} with dishonest variables, {failures} failures, {cost_up} cost increases"),
        )?;
        rep.record(
            format!("  rules fired: {rules:?}"),
            json!({ "event": "rules", "instance": name, "rules": rules }),
        )?;
    }
    Ok(())
}
