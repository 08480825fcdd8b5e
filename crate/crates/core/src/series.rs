//! Separability probability as the exact series `P(α) = Σ_{i≥0} f(α+i)`,
//! where `f(α) = P(α) - P(α+1)` is a gamma-function ratio times a quintic.

use crate::error::{Error, Result};
use crate::exact::{gamma_ratio, ExactRational, HalfIntegerAlpha};

/// Hard cap on the number of summed terms.
pub const MAX_TERMS: usize = 10_000;

/// Ratio threshold below which the geometric tail bound is applied.
fn ratio_threshold() -> ExactRational {
    ExactRational::frac(1, 2)
}

/// Partial sum of the series together with a bound on the neglected tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesState {
    pub alpha: HalfIntegerAlpha,
    pub terms_used: usize,
    pub partial_sum: ExactRational,
    pub last_term: ExactRational,
    pub tail_bound: ExactRational,
}

/// `q(α) = α(5α(25α(2α(740α + 3119) + 10313) + 208403) + 410694) + 63000`.
pub fn q_poly(alpha: &ExactRational) -> ExactRational {
    let c = |n: i64| ExactRational::from_integer(n);
    let inner = alpha * &c(740) + c(3119);
    let inner = alpha * &(inner * c(2)) + c(10313);
    let inner = alpha * &(inner * c(25)) + c(208403);
    let inner = alpha * &(inner * c(5)) + c(410694);
    alpha * &inner + c(63000)
}

/// `f(α) = q(α) 2^(-4α-6) Γ(3α+5/2) Γ(5α+2) / (3 Γ(α+1) Γ(2α+3) Γ(5α+13/2))`.
pub fn f_term(alpha: HalfIntegerAlpha) -> Result<ExactRational> {
    let t = alpha.two_alpha();
    let ratio = gamma_ratio(&[3 * t + 5, 5 * t + 4], &[t + 2, 2 * t + 6, 5 * t + 13])?;
    let two_pow = ExactRational::from_integer(2).pow(-(2 * t as i32) - 6)?;
    Ok(q_poly(&alpha.value()) * two_pow * ratio * ExactRational::frac(1, 3))
}

/// Sums `f(α+i)` until the certified tail bound drops below `epsilon`.
///
/// Once `f(α+i+1)/f(α+i) < 1/2` is verified at the current term, the
/// remainder is bounded by `f(α+i) · (1/2)/(1 - 1/2)`. All comparisons are
/// exact.
pub fn separability_probability(
    alpha: HalfIntegerAlpha,
    epsilon: &ExactRational,
) -> Result<SeriesState> {
    if !epsilon.is_positive() {
        return Err(Error::NonPositiveEpsilon);
    }
    let r_star = ratio_threshold();
    let tail_factor = &r_star / &(ExactRational::one() - &r_star);
    let one = ExactRational::one();

    let mut partial = ExactRational::zero();
    let mut term = f_term(alpha)?;
    for i in 0..MAX_TERMS {
        partial += &term;
        let next = f_term(alpha.shifted(i as u32 + 1))?;
        let ratio = next.checked_div(&term)?;
        if ratio < r_star {
            let tail_bound = &term * &tail_factor;
            if tail_bound < *epsilon {
                return Ok(SeriesState {
                    alpha,
                    terms_used: i + 1,
                    partial_sum: partial,
                    last_term: term,
                    tail_bound,
                });
            }
        } else if i >= 2 && ratio >= one {
            return Err(Error::SeriesNoDecay {
                index: i,
                ratio: ratio.to_decimal(10),
            });
        }
        term = next;
    }
    Err(Error::SeriesTermCap(MAX_TERMS))
}
