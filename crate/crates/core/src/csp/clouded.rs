use serde::{Deserialize, Serialize};

use super::{Assignment, CspError, Lin2Equation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CloudVarKind {
    /// `x(i,j)`, one per appearance of the original variable.
    Copy,
    /// `y(i,k)`, the right side of the cloud's amplifier.
    Checker,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudVar {
    pub name: String,
    pub cloud: usize,
    pub kind: CloudVarKind,
    /// 1-based position inside the cloud.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cloud {
    /// 0-based index of the original variable.
    pub source: usize,
    pub copies: Vec<usize>,
    pub checkers: Vec<usize>,
}

impl Cloud {
    pub fn degree(&self) -> usize {
        self.copies.len()
    }
}

/// The bounded-occurrence system: clouds of copies and checkers, size-2
/// equations `x + y = 1` and size-3 equations over copies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudedSystem {
    vars: Vec<CloudVar>,
    clouds: Vec<Cloud>,
    eq2: Vec<[usize; 2]>,
    eq3: Vec<Lin2Equation>,
}

pub(crate) fn copy_name(source: usize, j: usize) -> String {
    format!("x({},{})", source + 1, j)
}

pub(crate) fn checker_name(source: usize, k: usize) -> String {
    format!("y({},{})", source + 1, k)
}

impl CloudedSystem {
    /// Creates empty clouds. `degrees[c] = (source, d)`; a cloud of degree `d`
    /// holds `d` copies and `4d/5` checkers.
    pub fn with_clouds(degrees: &[(usize, usize)]) -> Result<Self, CspError> {
        let mut vars = Vec::new();
        let mut clouds = Vec::new();
        for (c, &(source, d)) in degrees.iter().enumerate() {
            if d == 0 || d % 5 != 0 {
                return Err(CspError::Malformed(format!(
                    "cloud of variable {} has degree {d}, expected a positive multiple of 5",
                    source + 1
                )));
            }
            let mut cloud = Cloud { source, copies: Vec::with_capacity(d), checkers: Vec::new() };
            for j in 1..=d {
                cloud.copies.push(vars.len());
                vars.push(CloudVar {
                    name: copy_name(source, j),
                    cloud: c,
                    kind: CloudVarKind::Copy,
                    index: j,
                });
            }
            for k in 1..=d * 4 / 5 {
                cloud.checkers.push(vars.len());
                vars.push(CloudVar {
                    name: checker_name(source, k),
                    cloud: c,
                    kind: CloudVarKind::Checker,
                    index: k,
                });
            }
            clouds.push(cloud);
        }
        Ok(CloudedSystem { vars, clouds, eq2: Vec::new(), eq3: Vec::new() })
    }

    pub fn push_eq2(&mut self, copy: usize, checker: usize) -> usize {
        self.eq2.push([copy, checker]);
        self.eq2.len() - 1
    }

    pub fn push_eq3(&mut self, eq: Lin2Equation) -> usize {
        self.eq3.push(eq);
        self.eq3.len() - 1
    }

    pub fn vars(&self) -> &[CloudVar] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn clouds(&self) -> &[Cloud] {
        &self.clouds
    }

    pub fn eq2(&self) -> &[[usize; 2]] {
        &self.eq2
    }

    pub fn eq3(&self) -> &[Lin2Equation] {
        &self.eq3
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Checks the occurrence pattern: each copy in 4 size-2 and 1 size-3
    /// equations, each checker in 5 size-2 equations, and |eq2| = 12|eq3|.
    pub fn validate(&self) -> Result<(), CspError> {
        let mut occ2 = vec![0usize; self.vars.len()];
        let mut occ3 = vec![0usize; self.vars.len()];
        for (k, &[x, y]) in self.eq2.iter().enumerate() {
            let (vx, vy) = (&self.vars[x], &self.vars[y]);
            if vx.kind != CloudVarKind::Copy || vy.kind != CloudVarKind::Checker || vx.cloud != vy.cloud {
                return Err(CspError::Malformed(format!(
                    "size-2 equation {k} must join a copy and a checker of one cloud"
                )));
            }
            occ2[x] += 1;
            occ2[y] += 1;
        }
        for (k, eq) in self.eq3.iter().enumerate() {
            for &v in &eq.vars {
                if self.vars[v].kind != CloudVarKind::Copy {
                    return Err(CspError::Malformed(format!(
                        "size-3 equation {k} uses checker {}",
                        self.vars[v].name
                    )));
                }
                occ3[v] += 1;
            }
        }
        for (v, var) in self.vars.iter().enumerate() {
            let ok = match var.kind {
                CloudVarKind::Copy => occ2[v] == 4 && occ3[v] == 1,
                CloudVarKind::Checker => occ2[v] == 5 && occ3[v] == 0,
            };
            if !ok {
                return Err(CspError::Malformed(format!(
                    "{} occurs {} + {} times",
                    var.name, occ2[v], occ3[v]
                )));
            }
        }
        if self.eq2.len() != 12 * self.eq3.len() {
            return Err(CspError::Malformed(format!(
                "{} size-2 equations for {} size-3 equations",
                self.eq2.len(),
                self.eq3.len()
            )));
        }
        Ok(())
    }

    pub fn count_unsat(&self, a: &Assignment) -> Result<usize, CspError> {
        a.check_len(self.vars.len())?;
        Ok(self.count_unsat_eq2(a) + self.count_unsat_eq3(a))
    }

    pub fn count_unsat_eq2(&self, a: &Assignment) -> usize {
        self.eq2.iter().filter(|&&[x, y]| a.get(x) == a.get(y)).count()
    }

    pub fn count_unsat_eq3(&self, a: &Assignment) -> usize {
        self.eq3.iter().filter(|eq| !eq.is_satisfied(a.bits())).count()
    }

    /// The consistent assignment setting every copy of cloud `c` to
    /// `values[source]` and every checker to its complement.
    pub fn consistent_assignment(&self, values: &[bool]) -> Assignment {
        let mut a = Assignment::zeros(self.vars.len());
        for cloud in &self.clouds {
            let b = values[cloud.source];
            for &x in &cloud.copies {
                a.set(x, b);
            }
            for &y in &cloud.checkers {
                a.set(y, !b);
            }
        }
        a
    }

    pub fn is_consistent(&self, a: &Assignment) -> bool {
        self.clouds.iter().all(|cloud| {
            let b = a.get(cloud.copies[0]);
            cloud.copies.iter().all(|&x| a.get(x) == b) && cloud.checkers.iter().all(|&y| a.get(y) != b)
        })
    }

    /// Majority bit of each cloud's copies, indexed by source variable; ties
    /// and variables without a cloud decode to 0.
    pub fn majority_values(&self, a: &Assignment, num_sources: usize) -> Vec<bool> {
        let mut values = vec![false; num_sources];
        for cloud in &self.clouds {
            let ones = cloud.copies.iter().filter(|&&x| a.get(x)).count();
            values[cloud.source] = 2 * ones > cloud.degree();
        }
        values
    }
}

/// Rewrites every cloud to the consistent assignment given by the majority
/// bit of its copies (ties toward 0).
///
/// With a certified amplifier behind each cloud the flipped minority set `S`
/// has `|S ∩ L| <= |L|/2`, so the size-2 gains (the cut) pay for any size-3
/// losses and the unsatisfied count never increases.
pub fn make_cloud_consistent(sys: &CloudedSystem, a: &Assignment) -> Result<Assignment, CspError> {
    a.check_len(sys.num_vars())?;
    let mut out = a.clone();
    for cloud in &sys.clouds {
        let ones = cloud.copies.iter().filter(|&&x| a.get(x)).count();
        let b = 2 * ones > cloud.degree();
        for &x in &cloud.copies {
            out.set(x, b);
        }
        for &y in &cloud.checkers {
            out.set(y, !b);
        }
    }
    Ok(out)
}
