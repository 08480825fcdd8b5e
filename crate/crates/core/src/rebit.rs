//! Closed-form density of `det ρ^PT` for Hilbert-Schmidt random two-rebit
//! states, supported on `[-1/16, 1/256]`.

use rug::ops::Pow;
use rug::{Float, Rational};

use crate::bigreal::bits_for_digits;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, GaussLegendre};

const GUARD_BITS: u32 = 64;
const QUADRATURE_ORDER: usize = 24;
const MAX_PANELS: usize = 20_000;
/// Width of the dedicated refinement band at the left endpoint.
const LEFT_BAND: f64 = 1e-4;

pub fn support() -> (Rational, Rational) {
    (Rational::from((-1, 16)), Rational::from((1, 256)))
}

fn check_support(y: &Float) -> Result<()> {
    let (a, b) = support();
    let inside = y.is_finite() && *y >= a && *y <= b;
    if !inside {
        return Err(Error::OutsideSupport {
            x: y.to_string_radix(10, Some(20)),
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    Ok(())
}

fn nonnegative(x: Float, name: &str, prec: u32) -> Result<Float> {
    if x.is_sign_negative() && !x.is_zero() {
        // rounding slack: a few ulps of the working precision
        let slack = Float::with_val(prec, Float::u_exp(1, 8 - prec as i32));
        if -x.clone() > slack {
            return Err(Error::NegativeRadicand(name.to_string()));
        }
        return Ok(Float::new(prec));
    }
    Ok(x)
}

/// `f(y)` evaluated with `digits` significant digits.
///
/// The radicands `17 - 4√(272y+17)` and `1 - 4√(16y+1)/√17` cancel
/// catastrophically near `y = 1/256`; both are evaluated through the
/// equivalent forms `17(1-256y)/(17+4√(272y+17))` and
/// `(1-256y)/(17+4√17 √(16y+1))`. At `y = -1/16` the arctanh term is a
/// `0·∞` form whose limit is 0, so it is dropped there.
pub fn rebit_density(y: &Float, digits: u32) -> Result<Float> {
    check_support(y)?;
    let out_prec = bits_for_digits(digits);
    let prec = out_prec + GUARD_BITS;
    let y = Float::with_val(prec, y);
    macro_rules! f {
        ($v:expr) => {
            Float::with_val(prec, $v)
        };
    }

    // 16y and 256y are exact scalings, so t and d are exact-sign.
    let t = nonnegative(f!(&y * 16u32) + 1u32, "16y+1", prec)?;
    let d = nonnegative(f!(1u32) - f!(&y * 256u32), "1-256y", prec)?;
    let sqrt17 = f!(17u32).sqrt();
    let sqrt_t = f!(t.sqrt_ref());
    // √(272y+17) = √17 √(16y+1)
    let r = f!(&sqrt17 * &sqrt_t);
    let denom = f!(&r * 4u32) + 17u32;
    let a_sq = nonnegative(f!(&d * 17u32) / &denom, "17-4√(272y+17)", prec)?;
    let a = a_sq.sqrt();
    let w = nonnegative(f!(&d / &denom), "1-4√(16y+1)/√17", prec)?;
    let z = f!(w.sqrt_ref());

    let c289 = |n: u32| Float::with_val(prec, n) / 289u32;
    let term1 = -(c289(4_128_768) * &a * &y / &sqrt17);
    let term2 = -(c289(72_576) * &sqrt_t * &a);
    let term3 = -(c289(189_504) * &a / &sqrt17);
    let prefactor = c289(7_741_440) * &y + c289(483_840);
    let term45 = if t.is_zero() {
        f!(0u32)
    } else {
        prefactor * atanh_sqrt(&z, &sqrt_t, &sqrt17)
    };
    let value = term1 + term2 + term3 + term45;
    Ok(Float::with_val(out_prec, value))
}

/// `arctanh(z)` for `z = √w ∈ [0, 1)`. Near 1 uses
/// `ln(1+z) - ½ ln(1-w)` with `1 - w = 4√(16y+1)/√17` exact in its inputs.
fn atanh_sqrt(z: &Float, sqrt_t: &Float, sqrt17: &Float) -> Float {
    let prec = z.prec();
    if *z < 0.5 {
        return Float::with_val(prec, z.atanh_ref());
    }
    let one_m_w = Float::with_val(prec, sqrt_t * 4u32) / sqrt17;
    let ln1pz = Float::with_val(prec, z.ln_1p_ref());
    ln1pz - one_m_w.ln() / 2u32
}

/// `∫ y^k f(y) dy` over the support by adaptive Gauss-Legendre quadrature.
pub fn rebit_density_moment(k: u32, digits: u32) -> Result<Float> {
    let prec = bits_for_digits(digits) + GUARD_BITS;
    let (a, b) = support();
    let a = Float::with_val(prec, &a);
    let b = Float::with_val(prec, &b);
    let band = Float::with_val(prec, &a + LEFT_BAND);
    let tolerance = Float::with_val(prec, Float::i_pow_u(10, digits / 2)).recip();
    let rule = GaussLegendre::new(QUADRATURE_ORDER, prec);
    let integrand = |y: &Float| -> Result<Float> {
        let fy = Float::with_val(prec, rebit_density(y, digits + 10)?);
        Ok(fy * Float::with_val(prec, y.pow(k)))
    };
    let result = adaptive(&integrand, &[a, band, b], &tolerance, &rule, MAX_PANELS)?;
    Ok(Float::with_val(bits_for_digits(digits), result.value))
}

/// `points` equally spaced `(y, f(y))` pairs covering the closed support.
pub fn rebit_density_grid(points: usize, digits: u32) -> Result<Vec<(Float, Float)>> {
    if points < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least 2 points".into(),
        ));
    }
    let prec = bits_for_digits(digits) + GUARD_BITS;
    let (a, b) = support();
    let width = Rational::from(&b - &a);
    (0..points)
        .map(|i| {
            let offset = Rational::from(&width * i as u64) / (points as u64 - 1);
            let y = Float::with_val(prec, &a + offset);
            let v = rebit_density(&y, digits)?;
            Ok((y, v))
        })
        .collect()
}
