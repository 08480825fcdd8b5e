//! Density reconstruction on a finite interval from raw moments by a
//! truncated shifted-Legendre expansion.
//!
//! With `u(x) = (2x - a - b)/(b - a)` mapping `[a, b]` onto `[-1, 1]`, the
//! degree-`N` approximant is
//!
//! ```text
//! f_N(x) = Σ_{j=0}^{N} λ_j P_j(u(x)),   λ_j = (2j+1)/(b-a) · E[P_j(u(X))]
//! ```
//!
//! `E[P_j(u(X))]` is a fixed linear combination of the raw moments, so the
//! coefficients are computed exactly whenever the moments are exact. The
//! approximant is the orthogonal projection of the true density onto
//! polynomials of degree `N`: it integrates to one and reproduces every
//! input moment up to order `N`.

use log::warn;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::bigreal::bits_for_digits;
use crate::error::{Error, Result};
use crate::exact::{binomial, ExactRational, HalfIntegerAlpha};
use crate::moments::{moment_table, scaled_moments, MomentFamily, MomentSequence, Support};

/// Largest degree for which coefficients are computed in exact arithmetic by
/// [`legendre_coefficients`].
pub const EXACT_DEGREE_LIMIT: usize = 600;

/// Default evaluation precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 300;

/// Reconstructions of at least this degree warn when they dip below
/// [`NEGATIVITY_WARNING`].
pub const NEGATIVITY_WARNING_DEGREE: usize = 500;
pub const NEGATIVITY_WARNING: f64 = -1e-2;

#[derive(Clone, Debug)]
pub enum Coefficients {
    Exact(Vec<ExactRational>),
    Float(Vec<Float>),
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Self::Exact(v) => v.len(),
            Self::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Coefficients `λ_0..λ_N` of a Legendre density approximant on `support`.
#[derive(Clone, Debug)]
pub struct LegendreExpansion {
    pub support: Support,
    pub coefficients: Coefficients,
}

impl LegendreExpansion {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn exact(&self) -> Option<&[ExactRational]> {
        match &self.coefficients {
            Coefficients::Exact(v) => Some(v),
            Coefficients::Float(_) => None,
        }
    }

    /// `∫_a^b f_N`; only the `P_0` term contributes, so this is `λ_0 (b - a)`.
    pub fn total_mass_exact(&self) -> Option<ExactRational> {
        self.exact().map(|l| &l[0] * &self.support.width())
    }
}

fn check_available(moments: &MomentSequence, degree: usize) -> Result<()> {
    if moments.values.len() < degree + 1 {
        return Err(Error::InsufficientMoments {
            needed: degree + 1,
            available: moments.values.len(),
        });
    }
    Ok(())
}

/// `u = scale·x + shift` maps the support onto `[-1, 1]`.
fn unit_map(support: &Support) -> (ExactRational, ExactRational) {
    let width = support.width();
    let scale = ExactRational::from_integer(2) / width.clone();
    let shift = -(support.lower() + support.upper()) / width;
    (scale, shift)
}

/// Integer coefficients of `2^j P_j(u) = Σ_k (-1)^k C(j,k) C(2j-2k, j) u^(j-2k)`,
/// indexed by `k`.
fn legendre_power_coefficients(j: u32) -> Vec<Integer> {
    (0..=j / 2)
        .map(|k| {
            let c = binomial(j, k) * binomial(2 * j - 2 * k, j);
            if k % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .collect()
}

/// Degree-`degree` expansion: exact up to [`EXACT_DEGREE_LIMIT`], otherwise
/// floating point at [`DEFAULT_DIGITS`].
pub fn legendre_coefficients(moments: &MomentSequence, degree: usize) -> Result<LegendreExpansion> {
    if degree <= EXACT_DEGREE_LIMIT {
        legendre_coefficients_exact(moments, degree)
    } else {
        legendre_coefficients_float(moments, degree, DEFAULT_DIGITS)
    }
}

/// Exact rational `λ_0..λ_degree`.
pub fn legendre_coefficients_exact(
    moments: &MomentSequence,
    degree: usize,
) -> Result<LegendreExpansion> {
    check_available(moments, degree)?;
    let support = moments.support.clone();
    let (scale, shift) = unit_map(&support);
    // E[U^m] = X_m / (L W^m)
    let unit = scaled_moments(&moments.values[..=degree], &scale, &shift);
    let w = &unit.base;
    let w_sq = Integer::from(w * w);
    let mut w_even = Vec::with_capacity(degree / 2 + 1);
    let mut acc = Integer::from(1);
    for _ in 0..=degree / 2 {
        w_even.push(acc.clone());
        acc *= &w_sq;
    }
    let width = support.width();

    let lambdas = (0..=degree)
        .into_par_iter()
        .map(|j| {
            // E[P_j(U)] = Σ_k c_k X_{j-2k} W^{2k} / (2^j L W^j)
            let mut num = Integer::new();
            for (k, c) in legendre_power_coefficients(j as u32).iter().enumerate() {
                let x = &unit.numerators[j - 2 * k];
                if x.is_zero() {
                    continue;
                }
                num += Integer::from(c * x) * &w_even[k];
            }
            let den = Integer::from(Integer::u_pow_u(2, j as u32))
                * &unit.common
                * Integer::from(w.pow(j as u32));
            let expectation = ExactRational::new(num, den).expect("nonzero denominator");
            expectation * ExactRational::from_integer(2 * j as i64 + 1) / width.clone()
        })
        .collect();
    Ok(LegendreExpansion {
        support,
        coefficients: Coefficients::Exact(lambdas),
    })
}

/// Working precision for the floating-point coefficient path. The binomial
/// shift to `[-1, 1]` and the Legendre power sums cancel roughly
/// `degree · log2((|scale|·R + |shift|)(1 + √2))` bits.
fn float_working_bits(support: &Support, degree: usize, digits: u32) -> u32 {
    let (scale, shift) = unit_map(support);
    let growth = scale.abs().to_f64() * support.radius().to_f64() + shift.abs().to_f64();
    let per_degree = (growth.max(1.0) * (1.0 + std::f64::consts::SQRT_2)).log2();
    bits_for_digits(digits) + (degree as f64 * per_degree).ceil() as u32 + 64
}

/// Floating-point `λ_0..λ_degree`, accurate to about `digits` decimal digits.
pub fn legendre_coefficients_float(
    moments: &MomentSequence,
    degree: usize,
    digits: u32,
) -> Result<LegendreExpansion> {
    check_available(moments, degree)?;
    let support = moments.support.clone();
    let prec = float_working_bits(&support, degree, digits);
    let (scale, shift) = unit_map(&support);
    let s = scale.to_float(prec);
    let c = shift.to_float(prec);

    let mut s_pow = Float::with_val(prec, 1);
    let scaled: Vec<Float> = moments.values[..=degree]
        .iter()
        .map(|v| {
            let out = Float::with_val(prec, &s_pow * &v.to_float(prec));
            s_pow *= &s;
            out
        })
        .collect();
    let mut c_pow = Vec::with_capacity(degree + 1);
    let mut acc = Float::with_val(prec, 1);
    for _ in 0..=degree {
        c_pow.push(acc.clone());
        acc *= &c;
    }
    let unit: Vec<Float> = (0..=degree)
        .into_par_iter()
        .map(|m| {
            let mut sum = Float::new(prec);
            for i in 0..=m {
                let term = Float::with_val(prec, &scaled[i] * &c_pow[m - i]);
                sum += term * binomial(m as u32, i as u32);
            }
            sum
        })
        .collect();

    let out_prec = bits_for_digits(digits);
    let width = support.width().to_float(prec);
    let lambdas = (0..=degree)
        .into_par_iter()
        .map(|j| {
            let mut sum = Float::new(prec);
            for (k, coeff) in legendre_power_coefficients(j as u32).iter().enumerate() {
                sum += Float::with_val(prec, &unit[j - 2 * k] * coeff);
            }
            sum >>= j as u32;
            sum *= 2 * j as u32 + 1;
            sum /= &width;
            Float::with_val(out_prec, sum)
        })
        .collect();
    Ok(LegendreExpansion {
        support,
        coefficients: Coefficients::Float(lambdas),
    })
}

/// `Σ c_k P_k(u)` by Clenshaw's recurrence on
/// `P_{k+1} = ((2k+1) u P_k - k P_{k-1}) / (k+1)`.
pub fn legendre_series(coeffs: &[Float], u: &Float) -> Float {
    let prec = u.prec();
    let mut b1 = Float::new(prec);
    let mut b2 = Float::new(prec);
    for k in (1..coeffs.len()).rev() {
        let kf = k as u32;
        // b_k = c_k + (2k+1)/(k+1) u b_{k+1} - (k+1)/(k+2) b_{k+2}
        let mut bk = Float::with_val(prec, u * &b1);
        bk *= 2 * kf + 1;
        bk /= kf + 1;
        let mut tail = b2 * (kf + 1);
        tail /= kf + 2;
        bk -= tail;
        bk += &coeffs[k];
        b2 = std::mem::replace(&mut b1, bk);
    }
    let mut out = Float::with_val(prec, u * &b1);
    out -= b2 / 2u32;
    match coeffs.first() {
        Some(c0) => out + c0,
        None => out,
    }
}

/// A Legendre expansion prepared for evaluation at a fixed precision.
#[derive(Clone, Debug)]
pub struct DensityEstimate {
    expansion: LegendreExpansion,
    digits: u32,
    prec: u32,
    lambdas: Vec<Float>,
    /// Legendre coefficients of the CDF, including the `(b-a)/2` Jacobian.
    cdf_coeffs: Vec<Float>,
    scale: Float,
    shift: Float,
}

impl DensityEstimate {
    pub fn new(expansion: LegendreExpansion, digits: u32) -> Self {
        let prec = bits_for_digits(digits);
        let lambdas: Vec<Float> = match &expansion.coefficients {
            Coefficients::Exact(v) => v.iter().map(|l| l.to_float(prec)).collect(),
            Coefficients::Float(v) => v.iter().map(|l| Float::with_val(prec, l)).collect(),
        };
        let cdf_coeffs = Self::integrated(&lambdas, &expansion.support, prec);
        let (scale, shift) = unit_map(&expansion.support);
        Self {
            digits,
            prec,
            lambdas,
            cdf_coeffs,
            scale: scale.to_float(prec),
            shift: shift.to_float(prec),
            expansion,
        }
    }

    /// With `∫_{-1}^{u} P_j = (P_{j+1}(u) - P_{j-1}(u)) / (2j+1)` for `j ≥ 1`
    /// and `∫_{-1}^{u} P_0 = P_0 + P_1`, the CDF is again a Legendre series
    /// with `γ_0 = λ_0 - λ_1/3` and `γ_k = λ_{k-1}/(2k-1) - λ_{k+1}/(2k+3)`.
    fn integrated(lambdas: &[Float], support: &Support, prec: u32) -> Vec<Float> {
        let n = lambdas.len();
        let zero = Float::new(prec);
        let lam = |j: usize| lambdas.get(j).unwrap_or(&zero);
        let half_width = support.width().to_float(prec) / 2u32;
        (0..=n)
            .map(|k| {
                let mut g = if k == 0 {
                    Float::with_val(prec, lam(0))
                } else {
                    Float::with_val(prec, lam(k - 1)) / (2 * k as u32 - 1)
                };
                g -= Float::with_val(prec, lam(k + 1)) / (2 * k as u32 + 3);
                g * &half_width
            })
            .collect()
    }

    pub fn expansion(&self) -> &LegendreExpansion {
        &self.expansion
    }

    pub fn support(&self) -> &Support {
        &self.expansion.support
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn precision_bits(&self) -> u32 {
        self.prec
    }

    pub fn degree(&self) -> usize {
        self.expansion.degree()
    }

    pub fn coefficients(&self) -> &[Float] {
        &self.lambdas
    }

    fn check_support(&self, x: &Float) -> Result<()> {
        let s = self.support();
        // endpoints rounded to the working precision still count as inside
        let slack = s.width().to_float(self.prec) >> (self.prec - 8);
        let lo = s.lower().to_float(self.prec) - &slack;
        let hi = s.upper().to_float(self.prec) + &slack;
        if x.is_nan() || *x < lo || *x > hi {
            return Err(Error::OutsideSupport {
                x: x.to_string_radix(10, Some(20)),
                a: s.lower().to_string(),
                b: s.upper().to_string(),
            });
        }
        Ok(())
    }

    fn to_unit(&self, x: &Float) -> Float {
        let mut u = Float::with_val(self.prec, x * &self.scale);
        u += &self.shift;
        u.clamp(&-1, &1)
    }

    /// `f_N(x)`.
    pub fn density(&self, x: &Float) -> Result<Float> {
        self.check_support(x)?;
        Ok(legendre_series(&self.lambdas, &self.to_unit(x)))
    }

    /// `∫_a^x f_N`; exactly 0 at or below `a` and 1 at or above `b`.
    pub fn cdf(&self, x: &Float) -> Result<Float> {
        self.check_support(x)?;
        let s = self.support();
        if *x <= *s.lower().as_rational() {
            return Ok(Float::new(self.prec));
        }
        if *x >= *s.upper().as_rational() {
            return Ok(Float::with_val(self.prec, 1));
        }
        Ok(legendre_series(&self.cdf_coeffs, &self.to_unit(x)))
    }

    /// Density at `x = 0`, the separability boundary.
    pub fn y_intercept(&self) -> Result<Float> {
        if !self.support().contains(&ExactRational::zero()) {
            return Err(Error::OutsideSupport {
                x: "0".into(),
                a: self.support().lower().to_string(),
                b: self.support().upper().to_string(),
            });
        }
        self.density(&Float::new(self.prec))
    }

    /// Root of `cdf(x) = 1/2` by bisection to `10^-(digits/2)` in `x`.
    pub fn median(&self) -> Result<Float> {
        self.quantile(&Float::with_val(self.prec, 0.5))
    }

    pub fn quantile(&self, target: &Float) -> Result<Float> {
        let s = self.support();
        let mut lo = s.lower().to_float(self.prec);
        let mut hi = s.upper().to_float(self.prec);
        let below = |x: &Float| -> Result<bool> { Ok(self.cdf(x)? < *target) };
        if !below(&lo)? || below(&hi)? {
            return Err(Error::NotBracketed {
                target: target.to_string_radix(10, Some(10)),
            });
        }
        let tol = Float::with_val(self.prec, Float::u_exp(1, 0))
            / Float::with_val(self.prec, Float::u_pow_u(10, self.digits / 2));
        while Float::with_val(self.prec, &hi - &lo) > tol {
            let mid = Float::with_val(self.prec, &lo + &hi) / 2u32;
            if below(&mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Float::with_val(self.prec, &lo + &hi) / 2u32)
    }

    /// Reconstructed probability of the nonnegative part `[0, b]`.
    pub fn separability_probability(&self) -> Result<Float> {
        let zero = Float::new(self.prec);
        let b = self.support().upper().to_float(self.prec);
        Ok(self.cdf(&b)? - self.cdf(&zero)?)
    }

    /// `points` equally spaced abscissae covering `[a, b]` inclusive.
    pub fn grid(&self, points: usize) -> Vec<Float> {
        let s = self.support();
        let a = s.lower().to_float(self.prec);
        let b = s.upper().to_float(self.prec);
        match points {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..points)
                .map(|i| {
                    if i + 1 == points {
                        return b.clone();
                    }
                    let t = Float::with_val(self.prec, i) / (points as u32 - 1);
                    Float::with_val(self.prec, &b - &a) * t + &a
                })
                .collect(),
        }
    }

    /// Smallest density value on a grid, with its abscissa. Logs a warning
    /// when a high-degree reconstruction dips below [`NEGATIVITY_WARNING`].
    pub fn negativity_check(&self, points: usize) -> Option<(Float, Float)> {
        let (x, v) = self
            .grid(points)
            .into_iter()
            .filter_map(|x| self.density(&x).ok().map(|v| (x, v)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))?;
        if self.degree() >= NEGATIVITY_WARNING_DEGREE && v.to_f64() < NEGATIVITY_WARNING {
            warn!(
                "degree-{} reconstruction reaches {} at x = {}",
                self.degree(),
                v.to_string_radix(10, Some(6)),
                x.to_string_radix(10, Some(6))
            );
        }
        Some((x, v))
    }
}

/// One row of an intercept sweep; failures are kept per entry.
#[derive(Debug)]
pub struct SweepRow {
    pub alpha: HalfIntegerAlpha,
    pub intercept: Result<Float>,
}

/// Degree-`degree` y-intercepts for each `alpha`, with moments supplied by `moments_for`.
pub fn intercept_sweep_with<F>(
    alphas: &[HalfIntegerAlpha],
    degree: usize,
    digits: u32,
    moments_for: F,
) -> Vec<SweepRow>
where
    F: Fn(HalfIntegerAlpha) -> Result<MomentSequence> + Sync,
{
    alphas
        .par_iter()
        .map(|&alpha| {
            let intercept = moments_for(alpha)
                .and_then(|m| legendre_coefficients(&m, degree))
                .and_then(|e| DensityEstimate::new(e, digits).y_intercept());
            SweepRow { alpha, intercept }
        })
        .collect()
}

/// Degree-`degree` y-intercepts of `family` for each `alpha`.
pub fn intercept_sweep(
    family: MomentFamily,
    alphas: &[HalfIntegerAlpha],
    degree: usize,
    digits: u32,
) -> Vec<SweepRow> {
    intercept_sweep_with(alphas, degree, digits, |alpha| {
        moment_table(family, alpha, degree as u32)
    })
}

/// Builds the degree-`degree` density estimate of `family` at `alpha`.
pub fn reconstruct(
    family: MomentFamily,
    alpha: HalfIntegerAlpha,
    degree: usize,
    digits: u32,
) -> Result<DensityEstimate> {
    let moments = moment_table(family, alpha, degree as u32)?;
    Ok(DensityEstimate::new(
        legendre_coefficients(&moments, degree)?,
        digits,
    ))
}
