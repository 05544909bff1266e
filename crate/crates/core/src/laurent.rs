//! Laurent monomials in the curve-class variables `Q_1, ..., Q_r`.
//!
//! A monomial is just its integer exponent vector; inverses show up once the
//! flop chain rewrites factors in a fixed basis.

use std::fmt;

use crate::error::{Error, Result};
use crate::strip::EdgePath;

/// Exponent vector of a Laurent monomial `Q_1^{e_1} ... Q_r^{e_r}`.
///
/// Ordering is lexicographic on the vector, which is also the canonical
/// serialization order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LaurentMonomial {
    exponents: Vec<i64>,
}

impl LaurentMonomial {
    /// The unit monomial (all exponents zero) in `num_vars` variables.
    pub fn unit(num_vars: usize) -> Self {
        LaurentMonomial {
            exponents: vec![0; num_vars],
        }
    }

    /// The single variable `Q_k` (1-based).
    pub fn variable(num_vars: usize, k: u32) -> Result<Self> {
        if k == 0 || k as usize > num_vars {
            return Err(Error::InvalidRange(format!(
                "variable index {k} out of range 1..={num_vars}"
            )));
        }
        let mut exponents = vec![0; num_vars];
        exponents[(k - 1) as usize] = 1;
        Ok(LaurentMonomial { exponents })
    }

    /// `Q_i Q_{i+1} ... Q_j` for an edge path.
    pub fn from_path(num_vars: usize, path: &EdgePath) -> Result<Self> {
        if path.end() as usize > num_vars {
            return Err(Error::InvalidRange(format!(
                "path {path} does not fit in {num_vars} variables"
            )));
        }
        let mut exponents = vec![0; num_vars];
        for k in path.start()..=path.end() {
            exponents[(k - 1) as usize] = 1;
        }
        Ok(LaurentMonomial { exponents })
    }

    pub fn from_exponents(exponents: Vec<i64>) -> Self {
        LaurentMonomial { exponents }
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn num_vars(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_unit(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// Componentwise sum of exponents (the product of the monomials).
    pub fn mul(&self, other: &LaurentMonomial) -> LaurentMonomial {
        debug_assert_eq!(self.num_vars(), other.num_vars());
        LaurentMonomial {
            exponents: self
                .exponents
                .iter()
                .zip(&other.exponents)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// The reciprocal monomial.
    pub fn inverse(&self) -> LaurentMonomial {
        LaurentMonomial {
            exponents: self.exponents.iter().map(|e| -e).collect(),
        }
    }

    /// Scalar power of the monomial.
    pub fn pow(&self, e: i64) -> LaurentMonomial {
        LaurentMonomial {
            exponents: self.exponents.iter().map(|x| x * e).collect(),
        }
    }

    /// Render in the `Q_1Q_2^-1...` notation; the unit renders as `1`.
    pub fn render(&self) -> String {
        if self.is_unit() {
            return "1".to_string();
        }
        let mut out = String::new();
        for (idx, &e) in self.exponents.iter().enumerate() {
            if e == 0 {
                continue;
            }
            out.push('Q');
            out.push_str(&(idx + 1).to_string());
            if e != 1 {
                out.push('^');
                out.push_str(&e.to_string());
            }
        }
        out
    }
}

impl fmt::Display for LaurentMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
