use forge_core::corpus::transport_toys;
use forge_core::csp::{brute_force_min_unsat, min_unsat_eliminating, DEFAULT_BRUTE_FORCE_VARS};
use forge_core::reductions::{Pipeline, PipelineConfig};

#[test]
fn min_unsat_survives_the_pipeline() {
    for (name, sys) in transport_toys() {
        let t = std::time::Instant::now();
        let p = Pipeline::run(&sys, &PipelineConfig::default()).unwrap();
        let (k1, _) = brute_force_min_unsat(&p.padded, DEFAULT_BRUTE_FORCE_VARS).unwrap();
        let (k3, a3) = min_unsat_eliminating(&p.o3, 40).unwrap();
        assert_eq!(k1, k3, "{name}");
        assert_eq!(p.o3.count_unsat(&a3).unwrap(), k3);
        eprintln!("{name}: m={} k={k1} mains={} {:?}", p.m(), p.o3.clusters().len() * 3, t.elapsed());
    }
}
