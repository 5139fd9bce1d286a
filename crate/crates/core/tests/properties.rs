use forge_core::amplifier::{certify_amplifier, sample_amplifier, DEFAULT_CERT_BUDGET};
use forge_core::corpus::{micro_corpus, random_lin2};
use forge_core::csp::{
    cluster_outcome, extend_aux_optimal, make_cloud_consistent, Assignment, Lin2System, Role,
};
use forge_core::formats::{
    parse_asn, parse_clouded, parse_lin2, parse_o3, parse_tour, parse_trace, parse_tspg, write_asn,
    write_clouded, write_lin2, write_o3, write_tour, write_trace, write_tspg,
};
use forge_core::tours::{
    assignment_to_tour, extract_assignment, honesty, normalization_violations, normalize_tour, perturb_tour,
    repair_assignment, tour_cost, validate_quasi_tour, verify_extraction_bound, ExtractionMode,
};
use forge_core::tsp::{build_tsp, hardness_ratio, ledger, BuildMode};
use forge_core::{Pipeline, PipelineConfig, Quarters};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn bits(len: usize, seed: u64) -> Assignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Assignment::from_bits((0..len).map(|_| rng.gen()).collect())
}

/// Small systems whose padded clouds stay within the default certification
/// budget.
fn small_system() -> impl Strategy<Value = Lin2System> {
    (4usize..8, 1usize..4, any::<u64>())
        .prop_map(|(n, m, seed)| random_lin2(n, m, seed, false).unwrap().0)
        .prop_filter("occurrences at most 3", |s| s.occurrences().iter().all(|&o| o <= 3))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn lin2_and_asn_round_trip(n in 3usize..12, m in 0usize..20, seed: u64, planted: bool) {
        let (sys, _) = random_lin2(n, m, seed, planted).unwrap();
        prop_assert_eq!(parse_lin2(&write_lin2(&sys)).unwrap(), sys);
        let a = bits(n, seed);
        prop_assert_eq!(parse_asn(&write_asn(&a)).unwrap(), a);
    }

    #[test]
    fn amplifier_sampling_is_pure(size in prop::sample::select(vec![5usize, 10]), seed: u64) {
        let g = sample_amplifier(size, seed).unwrap();
        prop_assert_eq!(&g, &sample_amplifier(size, seed).unwrap());
        let c = certify_amplifier(&g, DEFAULT_CERT_BUDGET).unwrap();
        prop_assert_eq!(&c, &certify_amplifier(&g, DEFAULT_CERT_BUDGET).unwrap());
        if c.is_certified() {
            prop_assert!(g.is_connected());
        }
    }

    #[test]
    fn ratio_grows_with_the_upper_threshold(l in 1i64..1000, k1 in 0i64..50, d in 0i64..50) {
        let r = |k2| hardness_ratio(Ratio::from_integer(l), Ratio::from_integer(k1), Ratio::from_integer(k2)).unwrap();
        prop_assert!(r(k1 + d) <= r(k1 + d + 1));
        prop_assert_eq!(r(k1), Ratio::from_integer(1));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn pipeline_invariants(sys in small_system(), seed: u64) {
        let p = Pipeline::run(&sys, &PipelineConfig::default()).unwrap();
        prop_assert!(p.identities().iter().all(|c| c.holds()));
        let vars = p.o3.variables();
        let mut occ = vec![0usize; vars.len()];
        for c in p.o3.clauses() {
            for l in &c.literals {
                occ[l.var] += 1;
            }
            if c.cluster.is_none() {
                let (x, y) = (c.literals[0], c.literals[1]);
                prop_assert!(x.positive && y.positive);
                prop_assert_eq!((vars[x.var].role, vars[y.var].role), (Role::Main, Role::Checker));
                prop_assert_eq!(vars[x.var].owner, vars[y.var].owner);
            }
        }
        for (v, var) in vars.iter().enumerate() {
            prop_assert_eq!(occ[v], if var.role == Role::Aux { 2 } else { 5 });
        }

        prop_assert_eq!(parse_clouded(&write_clouded(&p.clouded)).unwrap(), p.clouded.clone());
        prop_assert_eq!(parse_o3(&write_o3(&p.o3)).unwrap(), p.o3.clone());
        prop_assert_eq!(parse_trace(&write_trace(&p.trace).unwrap()).unwrap(), p.trace.clone());
        let g = build_tsp(&p.o3, BuildMode::Pipeline).unwrap();
        prop_assert!(ledger(&g).identities_hold());
        prop_assert_eq!(parse_tspg(&write_tspg(&g)).unwrap(), g);

        let a2 = bits(p.clouded.num_vars(), seed);
        let fixed = make_cloud_consistent(&p.clouded, &a2).unwrap();
        prop_assert!(p.clouded.count_unsat(&fixed).unwrap() <= p.clouded.count_unsat(&a2).unwrap());

        let a3 = extend_aux_optimal(&p.o3, &bits(p.o3.num_vars(), seed ^ 1)).unwrap();
        for k in 0..p.o3.clusters().len() {
            prop_assert!(cluster_outcome(&p.o3, k, a3.bits()).unsat() <= 1);
        }

        let a1 = bits(sys.num_vars(), seed ^ 2);
        let down = p.transport_down(&a1).unwrap();
        prop_assert_eq!(p.o3.count_unsat(&down).unwrap(), p.padded.count_unsat(&a1).unwrap());
        // Variables without occurrences have no cloud and decode to 0.
        let up = p.transport_up(&down).unwrap();
        for (v, &o) in sys.occurrences().iter().enumerate() {
            prop_assert_eq!(up.get(v), o > 0 && a1.get(v));
        }
    }

    #[test]
    fn pipeline_graph_structure(sys in small_system()) {
        let p = Pipeline::run(&sys, &PipelineConfig::default()).unwrap();
        let g = &build_tsp(&p.o3, BuildMode::Pipeline).unwrap();
        let degrees = |v: usize| {
            let forced = g.incident(v).iter().filter(|&&e| g.edges()[e].forced).count();
            (forced, g.incident(v).len() - forced)
        };
        for gd in g.gadgets() {
            for &v in &gd.vertices {
                prop_assert_eq!(degrees(v), (2, 2));
            }
        }
        for (x, var) in g.variables().iter().enumerate() {
            for t in [var.left, var.right] {
                let (f, u) = degrees(t);
                prop_assert!(f == 1 && u >= 1);
            }
            for value in [true, false] {
                let stops: Vec<usize> = p.o3.clauses().iter().enumerate().flat_map(|(c, cl)| {
                    cl.literals.iter().enumerate()
                        .filter(move |(_, l)| l.var == x && l.positive == value)
                        .map(move |(j, _)| g.gadgets()[c].vertices[j])
                }).collect();
                let path = var.path(value);
                let mut at = var.left;
                let mut visited = Vec::new();
                for &e in path {
                    at = g.edges()[e].other(at);
                    visited.push(at);
                }
                prop_assert_eq!(visited.pop(), Some(var.right));
                visited.reverse();
                prop_assert_eq!(visited, stops);
            }
        }
    }

    #[test]
    fn tours_of_micro_instances(idx in 0usize..13, seed: u64) {
        let mi = &micro_corpus()[idx];
        let g = build_tsp(&mi.inst, BuildMode::Direct).unwrap();
        let l = ledger(&g).total();
        let a = bits(mi.inst.num_vars(), seed);
        let repaired = repair_assignment(&mi.inst, &a).unwrap();
        prop_assert!(mi.inst.count_unsat(&repaired).unwrap() <= mi.inst.count_unsat(&a).unwrap());
        let (t, b) = assignment_to_tour(&g, &mi.inst, &a).unwrap();
        prop_assert_eq!(&b, &repaired);
        validate_quasi_tour(&g, &t).unwrap();
        prop_assert_eq!(tour_cost(&g, &t).unwrap(), l + Quarters::whole(mi.inst.count_unsat(&b).unwrap() as i64));
        prop_assert_eq!(parse_tour(&write_tour(&t), g.num_edges()).unwrap(), t.clone());

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = perturb_tour(&g, &t, &mut rng);
        validate_quasi_tour(&g, &p).unwrap();
        let (n, _) = normalize_tour(&g, &p).unwrap();
        prop_assert!(tour_cost(&g, &n).unwrap() <= tour_cost(&g, &p).unwrap());
        prop_assert!(normalization_violations(&g, &n).is_empty());
        let (again, steps) = normalize_tour(&g, &n).unwrap();
        prop_assert!(steps.is_empty());
        prop_assert_eq!(&again, &n);
        honesty(&g, &n).unwrap();

        for mode in [ExtractionMode::Derandomized, ExtractionMode::Randomized(seed)] {
            let (x, credits) = extract_assignment(&g, &mi.inst, &n, mode).unwrap();
            prop_assert!(credits.total() <= credits.bound);
            let cert = verify_extraction_bound(&g, &mi.inst, &n, &x, &credits).unwrap();
            prop_assert!(cert.holds(), "{}", cert);
        }
    }
}
