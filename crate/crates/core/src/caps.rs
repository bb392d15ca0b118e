//! Resource caps. Every dense computation checks its size against these
//! before allocating anything.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_FIBER_DIM: usize = 4096;
pub const DEFAULT_TENSOR_DIM: usize = 65536;
pub const DEFAULT_NAIVE_DEGREE: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Caps {
    /// Largest allowed fiber dimension `r * p^n`.
    pub fiber_dim: usize,
    /// Largest allowed tensor space dimension `n^l`.
    pub tensor_dim: usize,
    /// Largest tensor degree for the literal sum over all permutations.
    pub naive_degree: usize,
    /// Left-degree truncation for bimodule computations; `None` means `2pn`.
    pub truncation: Option<usize>,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            fiber_dim: DEFAULT_FIBER_DIM,
            tensor_dim: DEFAULT_TENSOR_DIM,
            naive_degree: DEFAULT_NAIVE_DEGREE,
            truncation: None,
        }
    }
}

impl Caps {
    pub fn unlimited() -> Self {
        Caps {
            fiber_dim: usize::MAX,
            tensor_dim: usize::MAX,
            naive_degree: usize::MAX,
            truncation: None,
        }
    }

    pub fn truncation_for(&self, p: u32, n: usize) -> usize {
        self.truncation.unwrap_or(2 * p as usize * n)
    }

    pub fn check_fiber(&self, r: usize, p: u32, n: usize) -> Result<usize> {
        let required = checked_power(p as u128, n).and_then(|x| x.checked_mul(r as u128));
        check("fiber dimension r*p^n", required, self.fiber_dim)
    }

    pub fn check_tensor(&self, n: usize, degree: usize) -> Result<usize> {
        check("tensor dimension n^l", checked_power(n as u128, degree), self.tensor_dim)
    }

    pub fn check_naive(&self, degree: usize) -> Result<()> {
        if degree > self.naive_degree {
            return Err(Error::CapExceeded {
                what: "literal permutation sum degree",
                required: degree as u128,
                cap: self.naive_degree as u128,
            });
        }
        Ok(())
    }
}

fn checked_power(base: u128, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

fn check(what: &'static str, required: Option<u128>, cap: usize) -> Result<usize> {
    match required {
        Some(r) if r <= cap as u128 => Ok(r as usize),
        Some(r) => Err(Error::CapExceeded {
            what,
            required: r,
            cap: cap as u128,
        }),
        None => Err(Error::CapExceeded {
            what,
            required: u128::MAX,
            cap: cap as u128,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let caps = Caps::default();
        assert_eq!(caps.check_fiber(1, 2, 12).unwrap(), 4096);
        assert!(caps.check_fiber(2, 2, 12).unwrap_err().is_resource());
        assert_eq!(caps.check_tensor(2, 16).unwrap(), 65536);
        // 3^18 for p = 7, n = 3 at top degree.
        assert!(caps.check_tensor(3, 18).is_err());
        assert!(caps.check_naive(7).is_ok());
        assert!(caps.check_naive(8).is_err());
        assert_eq!(caps.truncation_for(3, 2), 12);
        assert!(caps.check_tensor(10, 100).is_err());
    }
}
