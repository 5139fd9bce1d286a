use serde::{Deserialize, Serialize};

use super::{Assignment, CspError};

/// `x[vars[0]] + x[vars[1]] + x[vars[2]] = rhs (mod 2)`, 0-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lin2Equation {
    pub vars: [usize; 3],
    pub rhs: bool,
}

impl Lin2Equation {
    pub fn new(a: usize, b: usize, c: usize, rhs: bool) -> Self {
        Lin2Equation { vars: [a, b, c], rhs }
    }

    pub fn is_satisfied(&self, bits: &[bool]) -> bool {
        (bits[self.vars[0]] ^ bits[self.vars[1]] ^ bits[self.vars[2]]) == self.rhs
    }
}

/// A MAX-E3-LIN2 instance. Duplicate equations are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lin2System {
    num_vars: usize,
    equations: Vec<Lin2Equation>,
}

impl Lin2System {
    pub fn new(num_vars: usize, equations: Vec<Lin2Equation>) -> Result<Self, CspError> {
        for (k, eq) in equations.iter().enumerate() {
            for &v in &eq.vars {
                if v >= num_vars {
                    return Err(CspError::VariableOutOfRange { var: v, num_vars });
                }
            }
            let [a, b, c] = eq.vars;
            if a == b || b == c || a == c {
                return Err(CspError::RepeatedVariable { equation: k });
            }
        }
        Ok(Lin2System { num_vars, equations })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn equations(&self) -> &[Lin2Equation] {
        &self.equations
    }

    pub fn num_equations(&self) -> usize {
        self.equations.len()
    }

    /// Number of appearances of each variable.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.num_vars];
        for eq in &self.equations {
            for &v in &eq.vars {
                occ[v] += 1;
            }
        }
        occ
    }

    pub fn count_unsat(&self, a: &Assignment) -> Result<usize, CspError> {
        a.check_len(self.num_vars)?;
        Ok(self.equations.iter().filter(|eq| !eq.is_satisfied(a.bits())).count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(rhs: bool) -> Lin2System {
        Lin2System::new(3, vec![Lin2Equation::new(0, 1, 2, rhs)]).unwrap()
    }

    #[test]
    fn parity_check() {
        let sys = single(true);
        let a = Assignment::from_bits(vec![true, false, false]);
        assert_eq!(sys.count_unsat(&a).unwrap(), 0);
        assert_eq!(sys.count_unsat(&Assignment::zeros(3)).unwrap(), 1);
    }

    #[test]
    fn repetition_scales_count() {
        let sys = Lin2System::new(3, vec![Lin2Equation::new(0, 1, 2, false); 5]).unwrap();
        let a = Assignment::from_bits(vec![true, false, false]);
        assert_eq!(sys.count_unsat(&a).unwrap(), 5);
    }

    #[test]
    fn rejects_bad_indices_and_short_assignments() {
        assert_eq!(
            Lin2System::new(2, vec![Lin2Equation::new(0, 1, 2, true)]),
            Err(CspError::VariableOutOfRange { var: 2, num_vars: 2 })
        );
        assert_eq!(
            Lin2System::new(3, vec![Lin2Equation::new(0, 0, 2, true)]),
            Err(CspError::RepeatedVariable { equation: 0 })
        );
        assert_eq!(
            single(true).count_unsat(&Assignment::zeros(2)),
            Err(CspError::AssignmentSize { expected: 3, found: 2 })
        );
    }
}
