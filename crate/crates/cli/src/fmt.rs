//! Deterministic text forms for numeric output.
//!
//! Every floating value is printed in scientific notation at a fixed
//! number of significant digits chosen per field from that field's error
//! guarantee, so identical inputs always produce identical bytes and a
//! reader never sees digits beyond what the computation certifies.

use heegner_core::elliptic_curve::weierstrass::QuadElem;
use rug::Float;

/// A high-precision value at `digits` significant digits.
pub fn sig(x: &Float, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

/// A machine float at `digits` significant digits.
pub fn sigf(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

/// An element of Q or Q(sqrt(m)) as text, comma-free so it can sit in a
/// CSV cell: `a` when rational, `a + b*sqrt(m)` otherwise.
pub fn coord(q: &QuadElem) -> String {
    if q.is_rational() {
        q.a.to_string()
    } else {
        format!("{} + {}*sqrt({})", q.a, q.b, q.m)
    }
}

/// Free-text note sanitized for a CSV cell: commas become semicolons,
/// newlines become spaces.
pub fn csv_note(msg: &str) -> String {
    msg.replace(',', ";").replace(['\n', '\r'], " ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_forms_are_fixed_width() {
        let x = Float::with_val(128, 1) / 3u32;
        assert_eq!(sig(&x, 12), "3.33333333333e-1");
        assert_eq!(sigf(0.25, 6), "2.50000e-1");
        assert_eq!(sigf(-1234.5, 3), "-1.23e3");
    }

    #[test]
    fn coordinates_stay_comma_free() {
        let q = QuadElem::new(
            rug::Rational::from((-5, 9)),
            rug::Rational::from((1, 2)),
            -7,
        );
        assert_eq!(coord(&q), "-5/9 + 1/2*sqrt(-7)");
        let r = QuadElem::from_i64(4, 0);
        assert_eq!(coord(&r), "4");
    }

    #[test]
    fn notes_cannot_break_csv_rows() {
        assert_eq!(csv_note("a, b\nc"), "a; b c");
    }
}
