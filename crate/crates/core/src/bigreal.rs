//! Configurable-precision reals. `BigReal` is MPFR's `Float`; precision is
//! specified in decimal digits at the API boundary and converted to bits here.

use rug::Float;

pub type BigReal = Float;

/// Mantissa bits needed for `digits` decimal digits, plus a small guard.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

/// Scientific notation with `digits` significant digits, `.` as the decimal
/// separator: `-1.80598555211558307533539731682e-3`.
pub fn format_sig(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

pub fn from_f64(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_conversion() {
        assert!(bits_for_digits(300) >= 997);
        assert!(bits_for_digits(30) >= 100);
    }

    #[test]
    fn formatting() {
        let x = Float::with_val(200, -7) / 3876;
        let s = format_sig(&x, 30);
        assert!(s.starts_with("-1.80598555211558307533539731682"), "{s}");
        assert!(s.ends_with("e-3"), "{s}");
        assert_eq!(format_sig(&Float::new(53), 30), "0");
    }
}
