//! Exact Hilbert-Schmidt determinantal moments of 4×4 density matrices.
//!
//! Three families are provided:
//!
//! * [`MomentFamily::Balanced`]: `⟨(|ρ| |ρ^PT|)^n⟩`, support `[-2^-12·3^-3, 2^-16]`;
//! * [`MomentFamily::Unbalanced`]: `⟨|ρ^PT|^n⟩`, support `[-2^-4, 2^-8]`;
//! * [`MomentFamily::RhoDet`]: `⟨|ρ|^k⟩` for two rebits (α = 1/2 only), support `[0, 2^-8]`.
//!
//! All values are exact rationals. [`affine_transform_moments`] maps a moment
//! sequence to the moments of an affinely transformed variable.

use std::fmt;
use std::str::FromStr;
use std::time::SystemTime;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, gamma_ratio, pochhammer, ExactRational, HalfIntegerAlpha};
use crate::pfq::{eval_terminating_pfq, HypergeometricSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentFamily {
    Balanced,
    Unbalanced,
    RhoDet,
}

impl MomentFamily {
    pub const ALL: [MomentFamily; 3] = [Self::Balanced, Self::Unbalanced, Self::RhoDet];

    pub fn name(self) -> &'static str {
        match self {
            Self::Balanced => "balanced",
            Self::Unbalanced => "unbalanced",
            Self::RhoDet => "rhodet",
        }
    }

    /// Natural support of the underlying random variable.
    pub fn support(self) -> Support {
        let (a, b) = match self {
            Self::Balanced => (
                ExactRational::frac(-1, 4096 * 27),
                ExactRational::frac(1, 65536),
            ),
            Self::Unbalanced => (ExactRational::frac(-1, 16), ExactRational::frac(1, 256)),
            Self::RhoDet => (ExactRational::zero(), ExactRational::frac(1, 256)),
        };
        Support::new(a, b).expect("family supports are proper intervals")
    }

    pub fn check_alpha(self, alpha: HalfIntegerAlpha) -> Result<()> {
        if self == Self::RhoDet && alpha != HalfIntegerAlpha::REBIT {
            return Err(Error::FamilyAlpha {
                family: self.name(),
                alpha: alpha.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for MomentFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MomentFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "balanced" => Ok(Self::Balanced),
            "unbalanced" => Ok(Self::Unbalanced),
            "rhodet" | "rho-det" | "rho_det" => Ok(Self::RhoDet),
            _ => Err(Error::Parse {
                what: "moment family",
                input: s.to_string(),
            }),
        }
    }
}

/// Closed interval `[lower, upper]` with `lower < upper`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[ExactRational; 2]", into = "[ExactRational; 2]")]
pub struct Support {
    lower: ExactRational,
    upper: ExactRational,
}

impl Support {
    pub fn new(lower: ExactRational, upper: ExactRational) -> Result<Self> {
        if lower >= upper {
            return Err(Error::BadInterval {
                a: lower.to_string(),
                b: upper.to_string(),
            });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &ExactRational {
        &self.lower
    }

    pub fn upper(&self) -> &ExactRational {
        &self.upper
    }

    pub fn width(&self) -> ExactRational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &ExactRational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    /// `max(|a|, |b|)`.
    pub fn radius(&self) -> ExactRational {
        std::cmp::max(self.lower.abs(), self.upper.abs())
    }
}

impl TryFrom<[ExactRational; 2]> for Support {
    type Error = Error;
    fn try_from([a, b]: [ExactRational; 2]) -> Result<Self> {
        Self::new(a, b)
    }
}

impl From<Support> for [ExactRational; 2] {
    fn from(s: Support) -> Self {
        [s.lower, s.upper]
    }
}

/// Exact moments `values[n] = E[X^n]`, `n = 0..=N`, of a variable supported on `support`.
#[derive(Clone, Debug)]
pub struct MomentSequence {
    pub family: MomentFamily,
    pub alpha: HalfIntegerAlpha,
    pub support: Support,
    pub values: Vec<ExactRational>,
    pub generated_at: SystemTime,
}

impl MomentSequence {
    pub fn new(
        family: MomentFamily,
        alpha: HalfIntegerAlpha,
        support: Support,
        values: Vec<ExactRational>,
    ) -> Self {
        Self {
            family,
            alpha,
            support,
            values,
            generated_at: SystemTime::now(),
        }
    }

    /// Highest available moment order.
    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// First index `n` with `|values[n]| > max(|a|,|b|)^n`, if any.
    pub fn support_bound_violation(&self) -> Option<usize> {
        let radius = self.support.radius();
        let mut bound = ExactRational::one();
        for (n, v) in self.values.iter().enumerate() {
            if v.abs() > bound {
                return Some(n);
            }
            bound *= &radius;
        }
        None
    }

    pub fn truncated(&self, n_max: usize) -> Result<Self> {
        if n_max >= self.values.len() {
            return Err(Error::InsufficientMoments {
                needed: n_max + 1,
                available: self.values.len(),
            });
        }
        let mut out = self.clone();
        out.values.truncate(n_max + 1);
        Ok(out)
    }
}

fn half() -> ExactRational {
    ExactRational::frac(1, 2)
}

fn int(n: i64) -> ExactRational {
    ExactRational::from_integer(n)
}

fn pow2(exp: u32) -> ExactRational {
    ExactRational::from_integer(Integer::from(Integer::u_pow_u(2, exp)))
}

/// `⟨(|ρ| |ρ^PT|)^n⟩` for Dyson-index parameter `alpha`.
pub fn balanced_moment(alpha: HalfIntegerAlpha, n: u32) -> Result<ExactRational> {
    let a = alpha.value();
    let n_i = n as i64;
    let two_n = 2 * n;

    let numerator = ExactRational::from_integer(factorial(two_n))
        * pochhammer(&(int(1) + &a), two_n)
        * pochhammer(&(int(1) + &a * int(2)), two_n);
    let denominator = pow2(12 * n)
        * pochhammer(&(&a * int(3) + ExactRational::frac(3, 2)), two_n)
        * pochhammer(&(&a * int(6) + ExactRational::frac(5, 2)), 4 * n);
    let prefactor = numerator.checked_div(&denominator)?;

    let spec = HypergeometricSpec::new(
        vec![
            int(-n_i),
            a.clone(),
            &a + &half(),
            int(-4 * n_i - 1) - &a * int(5),
        ],
        vec![
            int(-2 * n_i) - &a,
            int(-2 * n_i) - &a * int(2),
            half() - int(n_i),
        ],
    );
    Ok(prefactor * eval_terminating_pfq(&spec)?)
}

/// `⟨|ρ^PT|^n⟩` for Dyson-index parameter `alpha`.
///
/// The `5F4` factor is replaced by 1 for `n = 1`, where its lower parameter
/// `1 - n` vanishes. At `n = 0` the two-term form would give 2; the
/// normalization `⟨|ρ^PT|^0⟩ = 1` is returned instead.
pub fn unbalanced_moment(alpha: HalfIntegerAlpha, n: u32) -> Result<ExactRational> {
    if n == 0 {
        return Ok(ExactRational::one());
    }
    let a = alpha.value();
    let n_i = n as i64;

    let common_den = pochhammer(&(&a * int(3) + ExactRational::frac(3, 2)), n)
        * pochhammer(&(&a * int(6) + ExactRational::frac(5, 2)), 2 * n);

    let first = (ExactRational::from_integer(factorial(n))
        * pochhammer(&(&a + &int(1)), n)
        * pochhammer(&(&a * int(2) + int(1)), n))
    .checked_div(&(pow2(6 * n) * &common_den))?;

    let second_prefactor = (pochhammer(&(int(-2 * n_i - 1) - &a * int(5)), n)
        * pochhammer(&a, n)
        * pochhammer(&(&a + &half()), n))
    .checked_div(&(pow2(4 * n) * &common_den))?;

    let hyper = if n <= 1 {
        ExactRational::one()
    } else {
        let spec = HypergeometricSpec::new(
            vec![
                ExactRational::frac(-(n_i - 2), 2),
                ExactRational::frac(-(n_i - 1), 2),
                int(-n_i),
                &a + &int(1),
                &a * int(2) + int(1),
            ],
            vec![
                int(1 - n_i),
                int(n_i + 2) + &a * int(5),
                int(1 - n_i) - &a,
                half() - int(n_i) - &a,
            ],
        );
        eval_terminating_pfq(&spec)?
    };
    Ok(first + second_prefactor * hyper)
}

/// `⟨|ρ|^k⟩` for two rebits: `945 · 4^(3-2k) Γ(2k+2) Γ(2k+4) / Γ(4k+10)`.
pub fn rho_det_moment(k: u32) -> ExactRational {
    let ratio = gamma_ratio(&[4 * k + 4, 4 * k + 8], &[8 * k + 20])
        .expect("integer gamma arguments carry no sqrt(pi)");
    let four_pow = ExactRational::from_integer(4)
        .pow(3 - 2 * k as i32)
        .expect("nonzero base");
    int(945) * four_pow * ratio
}

/// Single moment of `family` at order `n`.
pub fn moment(family: MomentFamily, alpha: HalfIntegerAlpha, n: u32) -> Result<ExactRational> {
    family.check_alpha(alpha)?;
    match family {
        MomentFamily::Balanced => balanced_moment(alpha, n),
        MomentFamily::Unbalanced => unbalanced_moment(alpha, n),
        MomentFamily::RhoDet => Ok(rho_det_moment(n)),
    }
}

/// Moments `0..=n_max` of `family`, evaluated in parallel.
pub fn moment_table(
    family: MomentFamily,
    alpha: HalfIntegerAlpha,
    n_max: u32,
) -> Result<MomentSequence> {
    family.check_alpha(alpha)?;
    let values = (0..=n_max)
        .into_par_iter()
        .map(|n| moment(family, alpha, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::new(family, alpha, family.support(), values))
}

/// Moments of `Y = scale·X + shift`, represented as `ν_m = numerators[m] / (common · base^m)`
/// with integer `numerators`, `common`, `base`.
#[derive(Clone, Debug)]
pub(crate) struct ScaledMoments {
    pub numerators: Vec<Integer>,
    pub common: Integer,
    pub base: Integer,
}

impl ScaledMoments {
    pub fn value(&self, m: usize) -> ExactRational {
        let den = &self.common * Integer::from((&self.base).pow(m as u32));
        ExactRational::new(self.numerators[m].clone(), den).expect("nonzero denominators")
    }
}

/// Binomial expansion `E[Y^m] = Σ_i C(m,i) scale^i shift^(m-i) E[X^i]`, done
/// in integers over common denominators.
pub(crate) fn scaled_moments(
    values: &[ExactRational],
    scale: &ExactRational,
    shift: &ExactRational,
) -> ScaledMoments {
    let base = Integer::from(scale.denom().lcm_ref(shift.denom()));
    let s = scale.numer() * Integer::from(&base / scale.denom());
    let c = shift.numer() * Integer::from(&base / shift.denom());

    let common = values.iter().fold(Integer::from(1), |acc, v| {
        Integer::from(acc.lcm_ref(v.denom()))
    });
    let mut s_pow = Integer::from(1);
    let scaled: Vec<Integer> = values
        .iter()
        .map(|v| {
            let m_i = v.numer() * Integer::from(&common / v.denom());
            let out = Integer::from(&m_i * &s_pow);
            s_pow *= &s;
            out
        })
        .collect();
    let mut c_pow = Vec::with_capacity(values.len());
    let mut acc = Integer::from(1);
    for _ in 0..values.len() {
        c_pow.push(acc.clone());
        acc *= &c;
    }

    let numerators = (0..values.len())
        .into_par_iter()
        .map(|m| {
            let mut sum = Integer::new();
            for i in 0..=m {
                if scaled[i].is_zero() || c_pow[m - i].is_zero() {
                    continue;
                }
                let term = Integer::from(&scaled[i] * &c_pow[m - i]);
                sum += term * binomial(m as u32, i as u32);
            }
            sum
        })
        .collect();
    ScaledMoments {
        numerators,
        common,
        base,
    }
}

/// Moments of `Y = a' + (b'-a')(X-a)/(b-a)`, the affine image of `moments`
/// on `new_support`.
pub fn affine_transform_moments(moments: &MomentSequence, new_support: Support) -> MomentSequence {
    let old = &moments.support;
    let scale = new_support.width() / old.width();
    let shift = new_support.lower() - &(&scale * old.lower());
    let scaled = scaled_moments(&moments.values, &scale, &shift);
    let values = (0..moments.values.len()).map(|m| scaled.value(m)).collect();
    MomentSequence {
        family: moments.family,
        alpha: moments.alpha,
        support: new_support,
        values,
        generated_at: SystemTime::now(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::frac(n, d)
    }

    fn alpha(two: u32) -> HalfIntegerAlpha {
        HalfIntegerAlpha::new(two).unwrap()
    }

    #[test]
    fn supports() {
        let b = MomentFamily::Balanced.support();
        assert_eq!(b.lower(), &q(-1, 110592));
        assert_eq!(b.upper(), &q(1, 65536));
        let u = MomentFamily::Unbalanced.support();
        assert_eq!((u.lower(), u.upper()), (&q(-1, 16), &q(1, 256)));
        assert_eq!(u.radius(), q(1, 16));
    }

    #[test]
    fn balanced_examples() {
        assert_eq!(balanced_moment(alpha(2), 0).unwrap(), ExactRational::one());
        // prefactor 144 / (2^12 · (99/4) · (156009/16)) = 1/6864396 times 4F3 = -3/2
        let prefactor = q(144, 1) / (q(4096, 1) * q(99, 4) * q(156009, 16));
        assert_eq!(prefactor, q(1, 6864396));
        assert_eq!(balanced_moment(alpha(2), 1).unwrap(), prefactor * q(-3, 2));
        assert_eq!(balanced_moment(alpha(2), 1).unwrap(), q(-1, 4576264));
    }

    #[test]
    fn unbalanced_examples() {
        assert_eq!(
            unbalanced_moment(alpha(2), 0).unwrap(),
            ExactRational::one()
        );
        // 1/3876 - 8/3876
        assert_eq!(q(6, 23256) + q(-12, 5814), q(-7, 3876));
        assert_eq!(unbalanced_moment(alpha(2), 1).unwrap(), q(-7, 3876));
        let v2 = unbalanced_moment(alpha(2), 2).unwrap();
        assert!(v2.abs() <= q(1, 256));
    }

    #[test]
    fn rho_det_examples() {
        assert_eq!(rho_det_moment(0), ExactRational::one());
        // 945 · 4 · 3! · 5! / 13!
        let direct = q(945 * 4 * 6 * 120, 1) / ExactRational::from_integer(factorial(13));
        assert_eq!(direct, q(1, 2288));
        assert_eq!(rho_det_moment(1), q(1, 2288));
        let m2 = rho_det_moment(2);
        assert!(m2.is_positive() && m2 <= q(1, 65536));
    }

    #[test]
    fn tables() {
        let t = moment_table(MomentFamily::Unbalanced, alpha(2), 2).unwrap();
        assert_eq!(t.values.len(), 3);
        assert_eq!(t.values[1], q(-7, 3876));
        assert_eq!(t.values[2], unbalanced_moment(alpha(2), 2).unwrap());
        assert!(matches!(
            moment_table(MomentFamily::RhoDet, alpha(2), 1),
            Err(Error::FamilyAlpha { .. })
        ));
        let t = moment_table(MomentFamily::Balanced, alpha(1), 0).unwrap();
        assert_eq!(t.values, vec![ExactRational::one()]);
    }

    #[test]
    fn normalization_all_families_all_alphas() {
        for a in HalfIntegerAlpha::sweep() {
            assert_eq!(balanced_moment(a, 0).unwrap(), ExactRational::one());
            assert_eq!(unbalanced_moment(a, 0).unwrap(), ExactRational::one());
        }
        assert_eq!(rho_det_moment(0), ExactRational::one());
    }

    #[test]
    fn support_bound_holds() {
        for family in MomentFamily::ALL {
            for two in [1, 2, 4, 9, 70] {
                let a = alpha(two);
                if family.check_alpha(a).is_err() {
                    continue;
                }
                let t = moment_table(family, a, 40).unwrap();
                assert_eq!(t.support_bound_violation(), None, "{family} 2α={two}");
            }
        }
    }

    #[test]
    fn unbalanced_hypergeometric_never_divides_by_zero() {
        for two in 1..=70 {
            let a = alpha(two);
            for n in 2..=200 {
                unbalanced_moment(a, n).unwrap_or_else(|e| panic!("2α={two} n={n}: {e}"));
            }
        }
    }

    #[test]
    fn rho_det_affine_example() {
        let t = moment_table(MomentFamily::RhoDet, HalfIntegerAlpha::REBIT, 3).unwrap();
        let target = Support::new(q(-1, 16), q(1, 256)).unwrap();
        let y = affine_transform_moments(&t, target);
        assert_eq!(y.values[0], ExactRational::one());
        assert_eq!(q(17, 2288) - q(1, 16), q(-63, 1144));
        assert_eq!(y.values[1], q(-63, 1144));
    }

    #[test]
    fn affine_identity_and_inverse() {
        let t = moment_table(MomentFamily::Balanced, alpha(2), 25).unwrap();
        let same = affine_transform_moments(&t, t.support.clone());
        assert_eq!(same.values, t.values);
        let unit = Support::new(ExactRational::zero(), ExactRational::one()).unwrap();
        let there = affine_transform_moments(&t, unit);
        assert_eq!(there.values[0], ExactRational::one());
        let back = affine_transform_moments(&there, t.support.clone());
        assert_eq!(back.values, t.values);
    }

    #[test]
    fn family_parsing() {
        assert_eq!(
            "Unbalanced".parse::<MomentFamily>().unwrap(),
            MomentFamily::Unbalanced
        );
        assert_eq!(
            "rho-det".parse::<MomentFamily>().unwrap(),
            MomentFamily::RhoDet
        );
        assert!("other".parse::<MomentFamily>().is_err());
    }
}
