use super::{extend_aux_optimal, Assignment, CloudedSystem, CspError, Lin2System, OneInThreeInstance, Role};

pub const DEFAULT_BRUTE_FORCE_VARS: usize = 24;

/// A finite set of constraints over boolean variables, each an all-or-nothing
/// predicate on a small scope.
pub trait ConstraintSystem {
    fn num_vars(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn scope(&self, c: usize) -> Vec<usize>;
    fn violated(&self, c: usize, bits: &[bool]) -> bool;
}

impl ConstraintSystem for Lin2System {
    fn num_vars(&self) -> usize {
        Lin2System::num_vars(self)
    }
    fn num_constraints(&self) -> usize {
        self.num_equations()
    }
    fn scope(&self, c: usize) -> Vec<usize> {
        self.equations()[c].vars.to_vec()
    }
    fn violated(&self, c: usize, bits: &[bool]) -> bool {
        !self.equations()[c].is_satisfied(bits)
    }
}

impl ConstraintSystem for CloudedSystem {
    fn num_vars(&self) -> usize {
        CloudedSystem::num_vars(self)
    }
    fn num_constraints(&self) -> usize {
        self.eq2().len() + self.eq3().len()
    }
    fn scope(&self, c: usize) -> Vec<usize> {
        match self.eq2().get(c) {
            Some(pair) => pair.to_vec(),
            None => self.eq3()[c - self.eq2().len()].vars.to_vec(),
        }
    }
    fn violated(&self, c: usize, bits: &[bool]) -> bool {
        match self.eq2().get(c) {
            Some(&[x, y]) => bits[x] == bits[y],
            None => !self.eq3()[c - self.eq2().len()].is_satisfied(bits),
        }
    }
}

impl ConstraintSystem for OneInThreeInstance {
    fn num_vars(&self) -> usize {
        OneInThreeInstance::num_vars(self)
    }
    fn num_constraints(&self) -> usize {
        self.clauses().len()
    }
    fn scope(&self, c: usize) -> Vec<usize> {
        self.clauses()[c].literals.iter().map(|l| l.var).collect()
    }
    fn violated(&self, c: usize, bits: &[bool]) -> bool {
        !self.clauses()[c].is_satisfied(bits)
    }
}

/// Exact minimum number of violated constraints with a witness, by walking all
/// assignments in Gray-code order and re-evaluating only the constraints that
/// touch the flipped variable. The first minimum met in that order wins.
pub fn brute_force_min_unsat<S: ConstraintSystem + ?Sized>(
    sys: &S,
    max_vars: usize,
) -> Result<(usize, Assignment), CspError> {
    let n = sys.num_vars();
    if n > max_vars || n >= 64 {
        return Err(CspError::TooLarge { vars: n, limit: max_vars.min(63) });
    }
    let mut touching = vec![Vec::new(); n];
    for c in 0..sys.num_constraints() {
        let mut scope = sys.scope(c);
        scope.sort_unstable();
        scope.dedup();
        for v in scope {
            touching[v].push(c);
        }
    }
    let mut bits = vec![false; n];
    let mut violated: Vec<bool> = (0..sys.num_constraints()).map(|c| sys.violated(c, &bits)).collect();
    let mut count = violated.iter().filter(|&&v| v).count();
    let mut best = (count, 0u64);
    let mut mask = 0u64;
    for step in 1u64..1 << n {
        let v = step.trailing_zeros() as usize;
        bits[v] = !bits[v];
        mask ^= 1 << v;
        for &c in &touching[v] {
            let now = sys.violated(c, &bits);
            if now != violated[c] {
                violated[c] = now;
                if now {
                    count += 1;
                } else {
                    count -= 1;
                }
            }
        }
        if count < best.0 {
            best = (count, mask);
            if count == 0 {
                break;
            }
        }
    }
    Ok((best.0, Assignment::from_mask(best.1, n)))
}

enum Touch {
    /// Checker neighbour, with the edge multiplicity.
    Checker(usize, u8),
    Cluster(usize, u8),
    Pair(usize),
}

/// Exact minimum for structured 1-in-3 instances too large for plain brute
/// force: main variables are enumerated in Gray-code order while every
/// checker and every cluster's auxiliaries are minimised out exactly.
///
/// This is sound because a checker only occurs in size-2 clauses whose other
/// literal is a main variable, and auxiliaries are private to their cluster.
pub fn min_unsat_eliminating(
    inst: &OneInThreeInstance,
    max_mains: usize,
) -> Result<(usize, Assignment), CspError> {
    inst.validate()?;
    let vars = inst.variables();
    let mains: Vec<usize> = (0..vars.len()).filter(|&v| vars[v].role == Role::Main).collect();
    if mains.len() > max_mains || mains.len() >= 64 {
        return Err(CspError::TooLarge { vars: mains.len(), limit: max_mains.min(63) });
    }
    let mut main_pos = vec![usize::MAX; vars.len()];
    for (i, &m) in mains.iter().enumerate() {
        main_pos[m] = i;
    }

    // checker -> neighbouring mains; pair clauses between two mains kept apart
    let mut checker_deg = vec![0u32; vars.len()];
    let mut touches: Vec<Vec<Touch>> = (0..mains.len()).map(|_| Vec::new()).collect();
    let mut main_pairs: Vec<[usize; 2]> = Vec::new();
    for clause in inst.clauses().iter().filter(|c| c.cluster.is_none()) {
        let [p, q] = [clause.literals[0].var, clause.literals[1].var];
        match (vars[p].role, vars[q].role) {
            (Role::Main, Role::Main) => {
                let id = main_pairs.len();
                main_pairs.push([main_pos[p], main_pos[q]]);
                touches[main_pos[p]].push(Touch::Pair(id));
                touches[main_pos[q]].push(Touch::Pair(id));
            }
            (Role::Main, Role::Checker) | (Role::Checker, Role::Main) => {
                let (m, y) = if vars[p].role == Role::Main { (p, q) } else { (q, p) };
                checker_deg[y] += 1;
                let list = &mut touches[main_pos[m]];
                match list.iter_mut().find(|t| matches!(t, Touch::Checker(c, _) if *c == y)) {
                    Some(Touch::Checker(_, mult)) => *mult += 1,
                    _ => list.push(Touch::Checker(y, 1)),
                }
            }
            _ => return Err(CspError::Malformed("checker-checker clause cannot be eliminated".into())),
        }
    }

    // cluster tables: minimum unsat over aux for each main pattern
    let mut tables = Vec::with_capacity(inst.clusters().len());
    for (k, cl) in inst.clusters().iter().enumerate() {
        let mut bits = vec![false; vars.len()];
        let mut table = [0u8; 8];
        for (pattern, entry) in table.iter_mut().enumerate() {
            for (t, &m) in cl.mains.iter().enumerate() {
                bits[m] = pattern >> t & 1 == 1;
            }
            let mut best = usize::MAX;
            for aux in 0..8 {
                for (t, &a) in cl.aux.iter().enumerate() {
                    bits[a] = aux >> t & 1 == 1;
                }
                best = best.min(super::cluster_outcome(inst, k, &bits).unsat());
            }
            *entry = best as u8;
        }
        tables.push(table);
        for (t, &m) in cl.mains.iter().enumerate() {
            touches[main_pos[m]].push(Touch::Cluster(k, t as u8));
        }
    }

    let checker_cost = |ones: u32, deg: u32| ones.min(deg - ones);
    let mut ones = vec![0u32; vars.len()];
    let mut pattern = vec![0u8; tables.len()];
    let mut main_bits = vec![false; mains.len()];
    // all mains false: checker y costs min(0, deg) = 0, pairs all violated
    let mut count: i64 = tables.iter().map(|t| i64::from(t[0])).sum::<i64>() + main_pairs.len() as i64;
    let mut best = (count, 0u64);
    let mut mask = 0u64;
    for step in 1u64..1 << mains.len() {
        let i = step.trailing_zeros() as usize;
        let now = !main_bits[i];
        main_bits[i] = now;
        mask ^= 1 << i;
        for touch in &touches[i] {
            match *touch {
                Touch::Checker(y, mult) => {
                    let deg = checker_deg[y];
                    let before = checker_cost(ones[y], deg);
                    if now {
                        ones[y] += u32::from(mult);
                    } else {
                        ones[y] -= u32::from(mult);
                    }
                    count += i64::from(checker_cost(ones[y], deg)) - i64::from(before);
                }
                Touch::Cluster(k, t) => {
                    let before = tables[k][pattern[k] as usize];
                    pattern[k] ^= 1 << t;
                    count += i64::from(tables[k][pattern[k] as usize]) - i64::from(before);
                }
                Touch::Pair(id) => {
                    let [p, q] = main_pairs[id];
                    // the pair just changed status
                    if main_bits[p] == main_bits[q] {
                        count += 1;
                    } else {
                        count -= 1;
                    }
                }
            }
        }
        if count < best.0 {
            best = (count, mask);
            if count == 0 {
                break;
            }
        }
    }

    let mut a = Assignment::zeros(vars.len());
    for (i, &m) in mains.iter().enumerate() {
        a.set(m, best.1 >> i & 1 == 1);
    }
    // checkers: pick the cheaper side, ties toward 0
    let occ = inst.occurrence_lists();
    for y in (0..vars.len()).filter(|&v| vars[v].role == Role::Checker) {
        let ones = occ[y]
            .iter()
            .filter(|&&c| inst.clauses()[c].literals.iter().any(|l| l.var != y && a.get(l.var)))
            .count();
        let zeros = occ[y].len() - ones;
        a.set(y, ones < zeros);
    }
    let a = extend_aux_optimal(inst, &a)?;
    let check = inst.count_unsat(&a)?;
    debug_assert_eq!(check as i64, best.0);
    Ok((check, a))
}
