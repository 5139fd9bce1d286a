use serde::{Deserialize, Serialize};

/// A total 0/1 assignment, indexed by the owning instance's variable order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn zeros(len: usize) -> Self {
        Assignment { bits: vec![false; len] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    /// Low `len` bits of `mask`, variable `i` at bit `i`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        Assignment { bits: (0..len).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, var: usize) -> bool {
        self.bits[var]
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.bits[var] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<(), super::CspError> {
        if self.bits.len() == expected {
            Ok(())
        } else {
            Err(super::CspError::AssignmentSize { expected, found: self.bits.len() })
        }
    }
}
