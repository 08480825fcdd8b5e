//! Terminating generalized hypergeometric series `pFq(upper; lower; 1)`.

use crate::error::{Error, Result};
use crate::exact::ExactRational;

/// Parameters of a `pFq` evaluated at argument 1. At least one upper
/// parameter must be a non-positive integer so the series terminates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypergeometricSpec {
    pub upper: Vec<ExactRational>,
    pub lower: Vec<ExactRational>,
}

impl HypergeometricSpec {
    pub fn new(upper: Vec<ExactRational>, lower: Vec<ExactRational>) -> Self {
        Self { upper, lower }
    }

    /// Index of the last nonzero term: `min{-u : u upper, u ∈ {0, -1, -2, …}}`.
    pub fn termination_index(&self) -> Option<usize> {
        self.upper
            .iter()
            .filter(|u| u.is_integer() && !u.is_positive())
            .filter_map(|u| (-u).numer().to_usize())
            .min()
    }

    /// Fails if some lower parameter vanishes at an index whose term would
    /// still be nonzero.
    fn check_lower(&self, terms: usize) -> Result<()> {
        for l in &self.lower {
            if l.is_integer() && !l.is_positive() {
                let zero_at = (-l).numer().to_usize().unwrap_or(usize::MAX);
                if zero_at < terms {
                    return Err(Error::VanishingDenominator {
                        parameter: l.to_string(),
                        index: zero_at + 1,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Exact value of `Σ_{k=0}^{t} Π (u_i)_k / Π (l_j)_k / k!`.
pub fn eval_terminating_pfq(spec: &HypergeometricSpec) -> Result<ExactRational> {
    let t = spec.termination_index().ok_or(Error::NonTerminating)?;
    // Terms 1..=t divide by (l + k) for k < t.
    spec.check_lower(t)?;

    // Nested form 1 + r_0 (1 + r_1 (1 + … r_{t-1})), with r_k the ratio of
    // term k+1 to term k; avoids big-denominator additions.
    let one = ExactRational::one();
    let mut acc = ExactRational::one();
    for k in (0..t).rev() {
        let shift = ExactRational::from_integer(k as i64);
        let mut ratio = ExactRational::one();
        for u in &spec.upper {
            ratio *= u + &shift;
        }
        let mut den = ExactRational::from_integer(k as i64 + 1);
        for l in &spec.lower {
            den *= l + &shift;
        }
        ratio = ratio.checked_div(&den)?;
        acc = &one + &(ratio * acc);
    }
    Ok(acc)
}
