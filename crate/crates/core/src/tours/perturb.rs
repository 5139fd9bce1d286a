use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use super::QuasiTour;
use crate::tsp::TspInstance;

/// A path of edge ids from `from` to `to` avoiding `skip`, found by
/// breadth-first search over shuffled incidence lists.
fn random_path<R: Rng + ?Sized>(
    g: &TspInstance,
    from: usize,
    to: usize,
    skip: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let mut parent: Vec<Option<usize>> = vec![None; g.num_vertices()];
    let mut seen = vec![false; g.num_vertices()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        let mut inc = g.incident(x).to_vec();
        inc.shuffle(rng);
        for e in inc.into_iter().filter(|&e| e != skip) {
            let y = g.edges()[e].other(x);
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(e);
                queue.push_back(y);
            }
        }
    }
    if !seen[to] {
        return None;
    }
    let mut path = Vec::new();
    let mut x = to;
    while x != from {
        let e = parent[x].expect("reached vertex has a parent");
        path.push(e);
        x = g.edges()[e].other(x);
    }
    Some(path)
}

/// A random walk of edge ids from `from` that stops on reaching `to`, not
/// leaving its first step along `skip`; `None` past `cap` steps.
fn random_walk<R: Rng + ?Sized>(
    g: &TspInstance,
    from: usize,
    to: usize,
    skip: usize,
    cap: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let mut walk = Vec::new();
    let mut x = from;
    while x != to {
        if walk.len() == cap {
            return None;
        }
        let inc: Vec<usize> =
            g.incident(x).iter().copied().filter(|&e| !walk.is_empty() || e != skip).collect();
        let e = *inc.choose(rng)?;
        walk.push(e);
        x = g.edges()[e].other(x);
    }
    Some(walk)
}

/// Applies one to four random moves that keep every degree even and every
/// multiplicity in range: shifting a random closed walk by ±1 per step, or
/// adding or removing two copies of a unit edge. Valid input gives a valid
/// output.
pub fn perturb_tour<R: Rng + ?Sized>(g: &TspInstance, t: &QuasiTour, rng: &mut R) -> QuasiTour {
    let mut t = t.clone();
    if g.num_edges() == 0 {
        return t;
    }
    for _ in 0..rng.gen_range(1..=4) {
        let e = rng.gen_range(0..g.num_edges());
        let ed = g.edges()[e];
        if !ed.forced && rng.gen_bool(0.25) {
            match t.get(e) {
                0 => t.set(e, 2),
                2 => t.set(e, 0),
                _ => {}
            }
            continue;
        }
        let back = if rng.gen_bool(0.5) {
            random_path(g, ed.v, ed.u, e, rng)
        } else {
            random_walk(g, ed.v, ed.u, e, 4 * g.num_vertices(), rng)
        };
        let Some(mut cycle) = back else {
            continue;
        };
        cycle.push(e);
        for f in cycle {
            let m = t.get(f);
            let next = match (g.edges()[f].forced, m) {
                (true, 1) => 2,
                (true, _) => 1,
                (false, 1) => {
                    if rng.gen_bool(0.5) {
                        0
                    } else {
                        2
                    }
                }
                (false, _) => 1,
            };
            t.set(f, next);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::micro_corpus;
    use crate::csp::Assignment;
    use crate::tours::{assignment_to_tour, validate_quasi_tour};
    use crate::tsp::{build_tsp, BuildMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perturbations_stay_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for mi in micro_corpus() {
            let g = build_tsp(&mi.inst, BuildMode::Direct).unwrap();
            let (t, _) = assignment_to_tour(&g, &mi.inst, &Assignment::zeros(mi.inst.num_vars())).unwrap();
            let mut changed = 0;
            for _ in 0..200 {
                let p = perturb_tour(&g, &t, &mut rng);
                validate_quasi_tour(&g, &p).unwrap_or_else(|e| panic!("{}: {e}", mi.name));
                changed += usize::from(p != t);
            }
            assert!(g.num_edges() == 0 || changed > 100, "{}", mi.name);
        }
    }
}
