//! Exact group law on a Weierstrass model, over Q or over a quadratic
//! field Q(sqrt(m)), with all arithmetic in exact rationals.
//!
//! Points are affine pairs or the point at infinity. The chord-tangent
//! formulas for y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6 are used
//! verbatim: a line y = t x + v through the two addends meets the cubic
//! in a third point, which is then reflected by y -> -y - a1 x - a3.

use rug::Rational;

use super::CurveModel;
use crate::error::{Error, Result};

/// Element a + b sqrt(m) of Q(sqrt(m)), with m squarefree and nonsquare
/// (m = 0 degenerates to Q itself, with b pinned to zero).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadElem {
    pub a: Rational,
    pub b: Rational,
    pub m: i64,
}

impl QuadElem {
    pub fn new(a: Rational, b: Rational, m: i64) -> QuadElem {
        debug_assert!(m != 0 || b == 0);
        QuadElem { a, b, m }
    }

    /// The rational r viewed inside Q(sqrt(m)).
    pub fn from_rational(r: Rational, m: i64) -> QuadElem {
        QuadElem::new(r, Rational::new(), m)
    }

    pub fn from_i64(v: i64, m: i64) -> QuadElem {
        QuadElem::from_rational(Rational::from(v), m)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn is_rational(&self) -> bool {
        self.b == 0
    }

    /// Galois conjugate a - b sqrt(m).
    pub fn conj(&self) -> QuadElem {
        QuadElem::new(self.a.clone(), -self.b.clone(), self.m)
    }

    /// Field norm a^2 - m b^2, a rational.
    pub fn norm(&self) -> Rational {
        let aa = Rational::from(&self.a * &self.a);
        let bb = Rational::from(&self.b * &self.b);
        aa - bb * Rational::from(self.m)
    }

    /// Trace 2a, a rational.
    pub fn trace(&self) -> Rational {
        Rational::from(&self.a * 2u32)
    }

    pub fn add(&self, o: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.m, o.m);
        QuadElem::new(
            Rational::from(&self.a + &o.a),
            Rational::from(&self.b + &o.b),
            self.m,
        )
    }

    pub fn sub(&self, o: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.m, o.m);
        QuadElem::new(
            Rational::from(&self.a - &o.a),
            Rational::from(&self.b - &o.b),
            self.m,
        )
    }

    pub fn neg(&self) -> QuadElem {
        QuadElem::new(-self.a.clone(), -self.b.clone(), self.m)
    }

    pub fn mul(&self, o: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.m, o.m);
        let aa = Rational::from(&self.a * &o.a);
        let bb = Rational::from(&self.b * &o.b);
        let ab = Rational::from(&self.a * &o.b);
        let ba = Rational::from(&self.b * &o.a);
        QuadElem::new(aa + bb * Rational::from(self.m), ab + ba, self.m)
    }

    pub fn div(&self, o: &QuadElem) -> Result<QuadElem> {
        debug_assert_eq!(self.m, o.m);
        let n = o.norm();
        if n == 0 {
            return Err(Error::Domain("division by zero field element".into()));
        }
        let num = self.mul(&o.conj());
        Ok(QuadElem::new(num.a / n.clone(), num.b / n, self.m))
    }
}

/// Exact point: affine coordinates in Q(sqrt(m)) or the identity.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactPoint {
    Infinity,
    Affine(QuadElem, QuadElem),
}

impl ExactPoint {
    pub fn rational(x: (i64, i64), y: (i64, i64)) -> ExactPoint {
        ExactPoint::Affine(
            QuadElem::from_rational(Rational::from(x), 0),
            QuadElem::from_rational(Rational::from(y), 0),
        )
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ExactPoint::Infinity)
    }
}

fn coeffs(e: &CurveModel, m: i64) -> [QuadElem; 5] {
    [
        QuadElem::from_i64(e.a1, m),
        QuadElem::from_i64(e.a2, m),
        QuadElem::from_i64(e.a3, m),
        QuadElem::from_i64(e.a4, m),
        QuadElem::from_i64(e.a6, m),
    ]
}

/// Exact test of the Weierstrass equation.
pub fn on_curve(e: &CurveModel, p: &ExactPoint) -> bool {
    match p {
        ExactPoint::Infinity => true,
        ExactPoint::Affine(x, y) => {
            let [a1, a2, a3, a4, a6] = coeffs(e, x.m);
            let lhs = y.mul(y).add(&a1.mul(x).mul(y)).add(&a3.mul(y));
            let rhs = x
                .mul(x)
                .mul(x)
                .add(&a2.mul(x).mul(x))
                .add(&a4.mul(x))
                .add(&a6);
            lhs == rhs
        }
    }
}

/// -P = (x, -y - a1 x - a3).
pub fn neg_point(e: &CurveModel, p: &ExactPoint) -> ExactPoint {
    match p {
        ExactPoint::Infinity => ExactPoint::Infinity,
        ExactPoint::Affine(x, y) => {
            let [a1, _, a3, _, _] = coeffs(e, x.m);
            let ny = y.neg().sub(&a1.mul(x)).sub(&a3);
            ExactPoint::Affine(x.clone(), ny)
        }
    }
}

/// Chord-tangent addition. Errors only on internal degeneracy (points not
/// on the same field, division by zero off the curve).
pub fn add_points(e: &CurveModel, p: &ExactPoint, q: &ExactPoint) -> Result<ExactPoint> {
    let (x1, y1, x2, y2) = match (p, q) {
        (ExactPoint::Infinity, _) => return Ok(q.clone()),
        (_, ExactPoint::Infinity) => return Ok(p.clone()),
        (ExactPoint::Affine(x1, y1), ExactPoint::Affine(x2, y2)) => (x1, y1, x2, y2),
    };
    if x1.m != x2.m {
        return Err(Error::Domain("points live in different fields".into()));
    }
    let [a1, a2, a3, a4, _] = coeffs(e, x1.m);
    let lambda = if x1 == x2 {
        let minus_y1 = y1.neg().sub(&a1.mul(x1)).sub(&a3);
        if *y2 == minus_y1 {
            return Ok(ExactPoint::Infinity);
        }
        // Tangent slope: (3x^2 + 2 a2 x + a4 - a1 y) / (2y + a1 x + a3).
        let three = QuadElem::from_i64(3, x1.m);
        let two = QuadElem::from_i64(2, x1.m);
        let num = three
            .mul(x1)
            .mul(x1)
            .add(&two.mul(&a2).mul(x1))
            .add(&a4)
            .sub(&a1.mul(y1));
        let den = two.mul(y1).add(&a1.mul(x1)).add(&a3);
        num.div(&den)?
    } else {
        y2.sub(y1).div(&x2.sub(x1))?
    };
    let nu = y1.sub(&lambda.mul(x1));
    let x3 = lambda
        .mul(&lambda)
        .add(&a1.mul(&lambda))
        .sub(&a2)
        .sub(x1)
        .sub(x2);
    let y3 = lambda
        .add(&a1)
        .mul(&x3)
        .neg()
        .sub(&nu)
        .sub(&a3);
    Ok(ExactPoint::Affine(x3, y3))
}

/// k P by double-and-add; negative k through the group inverse.
pub fn mul_point(e: &CurveModel, k: i64, p: &ExactPoint) -> Result<ExactPoint> {
    if k == 0 {
        return Ok(ExactPoint::Infinity);
    }
    let base = if k < 0 { neg_point(e, p) } else { p.clone() };
    let mut k = k.unsigned_abs();
    let mut acc = ExactPoint::Infinity;
    let mut pow = base;
    loop {
        if k & 1 == 1 {
            acc = add_points(e, &acc, &pow)?;
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        pow = add_points(e, &pow, &pow)?;
    }
    Ok(acc)
}

/// Order of P if it is torsion: over Q the order divides 12 or is 10
/// (Mazur), over quadratic fields it is at most 18; scanning k <= 18
/// covers both. None for points of infinite order.
pub fn torsion_order(e: &CurveModel, p: &ExactPoint) -> Result<Option<u32>> {
    if p.is_infinity() {
        return Ok(Some(1));
    }
    let mut acc = p.clone();
    for k in 2..=18u32 {
        acc = add_points(e, &acc, p)?;
        if acc.is_infinity() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
