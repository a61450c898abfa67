//! Recognition of exact algebraic numbers from floating-point values.
//!
//! Rational recognition runs the continued-fraction expansion and keeps
//! the last convergent whose denominator stays within the prescribed
//! bound; the candidate is accepted only when it matches the input to the
//! requested number of bits. An element of an imaginary quadratic field
//! Q(sqrt(m)) is a pair of rationals (a, b) with z = a + b sqrt(m), so
//! recognizing Re z and Im z / sqrt(|m|) separately recovers it; no
//! integer-relation machinery is needed because the field has a
//! distinguished real basis.
//!
//! A recognized point is never returned on faith: the pair must satisfy
//! the Weierstrass equation exactly, in the field arithmetic, before it
//! leaves this module. A float that happens to round to a plausible
//! rational therefore cannot masquerade as a curve point.

use rug::{Complex, Float, Integer, Rational};

use super::weierstrass::{on_curve, ExactPoint, QuadElem};
use super::CurveModel;

/// Best rational p/q with q bounded, provided it matches v to tol_bits.
pub fn recognize_rational(v: &Float, max_den: u64, tol_bits: u32) -> Option<Rational> {
    if !v.is_finite() || max_den == 0 {
        return None;
    }
    let prec = v.prec();
    let mut x = Float::with_val(prec, v);
    // Convergent recurrences with h_{-1} = 1, h_{-2} = 0 and k_{-1} = 0,
    // k_{-2} = 1.
    let (mut h2, mut h1) = (Integer::new(), Integer::from(1));
    let (mut k2, mut k1) = (Integer::from(1), Integer::new());
    let mut best: Option<(Integer, Integer)> = None;
    let exact_gate = Float::with_val(prec, 1u32) >> prec.saturating_sub(6);
    for _ in 0..10_000 {
        let af = x.clone().floor();
        let a = af.to_integer()?;
        let h = Integer::from(&a * &h1) + &h2;
        let k = Integer::from(&a * &k1) + &k2;
        if k > max_den {
            break;
        }
        best = Some((h.clone(), k.clone()));
        h2 = std::mem::replace(&mut h1, h);
        k2 = std::mem::replace(&mut k1, k);
        let frac = x - af;
        if frac < exact_gate {
            break;
        }
        x = Float::with_val(prec, frac.recip_ref());
    }
    let (p, q) = best?;
    if q <= 0 {
        return None;
    }
    let cand = Rational::from((p, q));
    let diff = Float::with_val(prec, v - Float::with_val(prec, &cand)).abs();
    if diff < Float::with_val(prec, 1u32) >> tol_bits {
        Some(cand)
    } else {
        None
    }
}

/// Squarefree kernel m of a fundamental discriminant d < 0, so that the
/// field of discriminant d is Q(sqrt(m)).
pub fn field_kernel(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        d / 4
    }
}

/// Recognize z as a + b sqrt(m) with bounded rational a, b (m < 0), or as
/// a plain rational when m = 0.
pub fn recognize_quadratic(
    z: &Complex,
    m: i64,
    max_den: u64,
    tol_bits: u32,
) -> Option<QuadElem> {
    let wp = z.prec().0;
    if m == 0 {
        let gate = Float::with_val(wp, 1u32) >> tol_bits;
        if Float::with_val(wp, z.imag()).abs() >= gate {
            return None;
        }
        let a = recognize_rational(z.real(), max_den, tol_bits)?;
        return Some(QuadElem::from_rational(a, 0));
    }
    if m >= 0 {
        return None;
    }
    let root = Float::with_val(wp, -m).sqrt();
    let bf = Float::with_val(wp, z.imag() / &root);
    let a = recognize_rational(z.real(), max_den, tol_bits)?;
    let b = recognize_rational(&bf, max_den, tol_bits)?;
    Some(QuadElem::new(a, b, m))
}

/// Recognize a complex pair as an exact affine point and verify the
/// Weierstrass equation exactly; None when no bounded candidate passes.
pub fn recognize_point(
    e: &CurveModel,
    x: &Complex,
    y: &Complex,
    m: i64,
    max_den: u64,
    tol_bits: u32,
) -> Option<ExactPoint> {
    let xe = recognize_quadratic(x, m, max_den, tol_bits)?;
    let ye = recognize_quadratic(y, m, max_den, tol_bits)?;
    let p = ExactPoint::Affine(xe, ye);
    if on_curve(e, &p) {
        Some(p)
    } else {
        None
    }
}
