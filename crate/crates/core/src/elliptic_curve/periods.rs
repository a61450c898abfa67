//! Period lattice by arithmetic-geometric means, and the uniformization
//! C/Lambda = E(C) through the Weierstrass functions.
//!
//! Completing the square turns the curve into v^2 = 4x^3 + b2 x^2 +
//! 2 b4 x + b6, whose cubic has roots e1, e2, e3; the Neron differential
//! dx / (2y + a1 x + a3) then has the classical AGM periods. With three
//! real roots e1 > e2 > e3 (positive discriminant):
//!
//!   omega1 = pi / AGM(sqrt(e1 - e3), sqrt(e1 - e2)),
//!   omega2 = i pi / AGM(sqrt(e1 - e3), sqrt(e2 - e3)).
//!
//! With one real root e1 and a conjugate pair m +- in (negative
//! discriminant), the Gauss transformation reduces both integrals to real
//! means again: with q = e1 - m and A = sqrt(q^2 + n^2),
//!
//!   omega1 = 2 pi / AGM(2 sqrt(A), sqrt(2A + 2q)),
//!   omega2 = omega1/2 + i pi / AGM(2 sqrt(A), sqrt(2A - 2q)).
//!
//! The basis is never trusted blind: it is reduced so tau = omega2/omega1
//! lands in the usual fundamental domain, and the weight-4 and weight-6
//! Eisenstein series must then reproduce the exact integer invariants
//! through c4 = (2 pi / w1)^4 E4(tau) and c6 = (2 pi / w1)^6 E6(tau),
//! where (w1, w2) is the reduced basis of the same lattice. Construction
//! fails if the oracle disagrees, so a lattice that leaves this module is
//! correct to the stated precision.
//!
//! Points pass between C/Lambda and the curve through the q-product
//! expansions of the Weierstrass functions: with u = e^(2 pi i z/w1) and
//! q = e^(2 pi i tau),
//!
//!   (w1/(2 pi i))^2 P(z)  = 1/12 + u/(1-u)^2
//!                         + sum_{n>=1} [ q^n u/(1-q^n u)^2
//!                                      + q^n/u / (1-q^n/u)^2 - 2 q^n/(1-q^n)^2 ],
//!   (w1/(2 pi i))^3 P'(z) = u(1+u)/(1-u)^3
//!                         + sum_{n>=1} ( q^n u (1+q^n u)/(1-q^n u)^3
//!                                      - (q^n/u)(1+q^n/u)/(1-q^n/u)^3 ),
//!
//! and the model coordinates are x = P - b2/12, y = (P' - a1 x - a3)/2.
//! The inverse map runs a coarse grid over the fundamental parallelogram
//! followed by Newton iteration on P, with the sign of P' fixing the
//! choice between z and -z.

use rug::ops::Pow;
use rug::{Complex, Float, Integer};

use super::CurveModel;
use crate::error::{Error, Result};
use crate::numeric::{pi, GUARD};

/// Validated period lattice. `omega1`, `omega2` are the AGM pair
/// (omega1 real); `basis1`, `basis2` generate the same lattice with
/// `tau = basis2/basis1` in the fundamental domain.
#[derive(Debug, Clone)]
pub struct PeriodLattice {
    pub omega1: Float,
    pub omega2: Complex,
    pub basis1: Complex,
    pub basis2: Complex,
    pub tau: Complex,
    pub precision_bits: u32,
}

/// A point of E(C): affine complex coordinates or the identity.
#[derive(Debug, Clone)]
pub enum ComplexPoint {
    Infinity,
    Affine(Complex, Complex),
}

fn real_agm(mut a: Float, mut b: Float, wp: u32) -> Float {
    for _ in 0..64 {
        let diff = Float::with_val(wp, &a - &b).abs();
        let gate = Float::with_val(wp, &a) >> (wp - 6);
        if diff <= gate.abs() {
            break;
        }
        let am = (Float::with_val(wp, &a + &b)) >> 1u32;
        let gm = (a * &b).sqrt();
        a = am;
        b = gm;
    }
    (a + b) >> 1u32
}

/// Roots of t^3 + p t + q = 0 given exact rational p = -c4/48,
/// q = -c6/864; Newton-polished at working precision.
fn depressed_roots(
    p: &Float,
    q: &Float,
    positive_disc: bool,
    wp: u32,
) -> Result<(Float, Option<(Float, Float)>)> {
    let polish = |t0: Float| -> Float {
        let mut t = t0;
        for _ in 0..3 {
            let f = Float::with_val(wp, t.square_ref()) * &t + Float::with_val(wp, p * &t) + q;
            let fp = Float::with_val(wp, t.square_ref()) * 3u32 + p;
            if !fp.is_normal() {
                break;
            }
            t -= f / fp;
        }
        t
    };
    if positive_disc {
        // Three real roots; p < 0 here.
        let mp3 = (Float::with_val(wp, -p) / 3u32).sqrt();
        let mr = Float::with_val(wp, &mp3) * 2u32;
        let mut arg = Float::with_val(wp, p * &mr);
        arg = Float::with_val(wp, q * 3u32) / arg;
        if arg > 1u32 {
            arg = Float::with_val(wp, 1u32);
        }
        if arg < -1i32 {
            arg = Float::with_val(wp, -1i32);
        }
        let phi = arg.acos();
        let third = Float::with_val(wp, pi(wp)) * 2u32 / 3u32;
        let mut roots: Vec<Float> = (0..3)
            .map(|k| {
                let ang = Float::with_val(wp, &phi) / 3u32 - Float::with_val(wp, &third) * k as u32;
                polish(Float::with_val(wp, &mr) * ang.cos())
            })
            .collect();
        roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let e3 = roots.pop().unwrap();
        let e2 = roots.pop().unwrap();
        let e1 = roots.pop().unwrap();
        Ok((e1, Some((e2, e3))))
    } else {
        // One real root by the stable Cardano branch.
        let s2 = Float::with_val(wp, q.square_ref()) / 4u32
            + Float::with_val(wp, p.square_ref()) * p / 27u32;
        if !s2.is_sign_positive() {
            return Err(Error::Precision("cubic discriminant sign is ambiguous".into()));
        }
        let s = s2.sqrt();
        let u = if q.is_sign_positive() {
            Float::with_val(wp, q) / -2i32 - &s
        } else {
            Float::with_val(wp, q) / -2i32 + &s
        };
        let a = u.cbrt();
        let t = if a.is_normal() {
            let corr = Float::with_val(wp, p) / (Float::with_val(wp, &a) * 3u32);
            polish(a - corr)
        } else {
            polish(Float::with_val(wp, 0u32))
        };
        Ok((t, None))
    }
}

fn sigma_pow(n: u64, k: u32) -> Integer {
    let mut s = Integer::new();
    for d in 1..=n {
        if n % d == 0 {
            s += Integer::from(d).pow(k);
        }
    }
    s
}

/// E4(tau) and E6(tau) by q-series; tau must have Im tau >= 1/2 or so.
fn eisenstein(tau: &Complex, wp: u32) -> Result<(Complex, Complex)> {
    let two_pi = Float::with_val(wp, pi(wp)) * 2u32;
    let q = Complex::with_val(wp, tau.mul_i_ref(false)).exp_mul(&two_pi);
    let qabs = Float::with_val(wp, q.norm_ref()).sqrt().to_f64();
    if !(qabs < 0.5) {
        return Err(Error::Precision("tau too close to the real axis".into()));
    }
    let mut e4 = Complex::with_val(wp, 1u32);
    let mut e6 = Complex::with_val(wp, 1u32);
    let mut qn = Complex::with_val(wp, &q);
    let gate = Float::with_val(wp, 1u32) >> (wp + 8);
    for n in 1..=10_000u64 {
        let s3 = Float::with_val(wp, sigma_pow(n, 3));
        let s5 = Float::with_val(wp, sigma_pow(n, 5));
        let term_mag = Float::with_val(wp, qn.norm_ref()).sqrt();
        e4 += Complex::with_val(wp, &qn) * &s3 * 240u32;
        e6 -= Complex::with_val(wp, &qn) * &s5 * 504u32;
        if Float::with_val(wp, &term_mag * &s5) * 2000u32 < gate {
            return Ok((e4, e6));
        }
        qn *= &q;
    }
    Err(Error::Precision("Eisenstein series did not converge".into()))
}

/// Multiply a complex by e^x for real x (scalar exp times value).
trait ExpMul {
    fn exp_mul(self, _: &Float) -> Complex;
}

impl ExpMul for Complex {
    fn exp_mul(self, s: &Float) -> Complex {
        let wp = self.prec().0;
        let mut z = self;
        z *= Complex::with_val(wp, (s, Float::new(wp)));
        z.exp()
    }
}

/// Reduce the basis so tau = w2/w1 has |Re tau| <= 1/2 and |tau| >= 1.
fn reduce_basis(mut w1: Complex, mut w2: Complex, wp: u32) -> Result<(Complex, Complex, Complex)> {
    // Orient: Im(w2/w1) > 0.
    let tau0 = Complex::with_val(wp, &w2 / &w1);
    if tau0.imag().is_sign_negative() {
        w2 = -w2;
    }
    for _ in 0..256 {
        let tau = Complex::with_val(wp, &w2 / &w1);
        let re = Float::with_val(wp, tau.real());
        let shift = re.round();
        if let Some(n) = shift.to_integer() {
            if n != 0 {
                let step = Complex::with_val(wp, &w1) * &n;
                w2 -= step;
            }
        }
        let tau = Complex::with_val(wp, &w2 / &w1);
        let norm = Float::with_val(wp, tau.norm_ref());
        let one_minus = Float::with_val(wp, 1u32) - (Float::with_val(wp, 1u32) >> (wp / 2));
        if norm < one_minus {
            let old_w1 = w1;
            w1 = w2;
            w2 = -old_w1;
        } else {
            let tau = Complex::with_val(wp, &w2 / &w1);
            return Ok((w1, w2, tau));
        }
    }
    Err(Error::Precision("lattice basis reduction did not terminate".into()))
}

/// Period lattice of the curve, validated against the exact invariants.
pub fn period_lattice(e: &CurveModel, prec: u32) -> Result<PeriodLattice> {
    if prec < 32 || prec > (1 << 20) {
        return Err(Error::Domain("precision must lie in [32, 2^20]".into()));
    }
    let wp = prec + 2 * GUARD;
    let disc = e.disc();
    let pf = Float::with_val(wp, rug::Rational::from((
        Integer::from(-e.c4()),
        Integer::from(48),
    )));
    let qf = Float::with_val(wp, rug::Rational::from((
        Integer::from(-e.c6()),
        Integer::from(864),
    )));
    let shift = Float::with_val(wp, rug::Rational::from((Integer::from(e.b2()), Integer::from(12))));
    let pival = pi(wp);
    let (omega1, omega2) = if disc > 0 {
        let (t1, pair) = depressed_roots(&pf, &qf, true, wp)?;
        let (t2, t3) = pair.unwrap();
        let e1 = Float::with_val(wp, &t1 - &shift);
        let e2 = Float::with_val(wp, &t2 - &shift);
        let e3 = Float::with_val(wp, &t3 - &shift);
        let a = Float::with_val(wp, &e1 - &e3).sqrt();
        let b = Float::with_val(wp, &e1 - &e2).sqrt();
        let c = Float::with_val(wp, &e2 - &e3).sqrt();
        let om1 = Float::with_val(wp, &pival) / real_agm(a.clone(), b, wp);
        let om2_im = Float::with_val(wp, &pival) / real_agm(a, c, wp);
        (
            om1,
            Complex::with_val(wp, (Float::new(wp), om2_im)),
        )
    } else {
        let (t1, _) = depressed_roots(&pf, &qf, false, wp)?;
        let e1 = Float::with_val(wp, &t1 - &shift);
        // e2 + e3 = -b2/4 - e1 and e2 e3 = b4/2 - e1 (e2 + e3).
        let b2f = Float::with_val(wp, Integer::from(e.b2()));
        let b4f = Float::with_val(wp, Integer::from(e.b4()));
        let sum23 = -(Float::with_val(wp, &b2f) / 4u32) - &e1;
        let prod23 = Float::with_val(wp, &b4f) / 2u32 - Float::with_val(wp, &e1 * &sum23);
        let m = Float::with_val(wp, &sum23) >> 1u32;
        let n2 = prod23 - Float::with_val(wp, m.square_ref());
        if !n2.is_sign_positive() {
            return Err(Error::Precision("complex root pair degenerated".into()));
        }
        let qc = Float::with_val(wp, &e1 - &m);
        let aa = (Float::with_val(wp, qc.square_ref()) + &n2).sqrt();
        let s1 = Float::with_val(wp, aa.clone().sqrt()) * 2u32;
        let plus = (Float::with_val(wp, &aa) * 2u32 + Float::with_val(wp, &qc) * 2u32).sqrt();
        let minus = (Float::with_val(wp, &aa) * 2u32 - Float::with_val(wp, &qc) * 2u32).sqrt();
        let om1 = Float::with_val(wp, &pival) * 2u32 / real_agm(s1.clone(), plus, wp);
        let im2 = Float::with_val(wp, &pival) / real_agm(s1, minus, wp);
        let om2 = Complex::with_val(wp, (Float::with_val(wp, &om1) >> 1u32, im2));
        (om1, om2)
    };
    let w1 = Complex::with_val(wp, (Float::with_val(wp, &omega1), Float::new(wp)));
    let w2 = Complex::with_val(wp, &omega2);
    let (b1, b2, tau) = reduce_basis(w1, w2, wp)?;
    // Oracle: the reduced basis must reproduce c4 and c6 exactly.
    let (e4, e6) = eisenstein(&tau, wp)?;
    let lead = Complex::with_val(wp, &b1).recip() * &pival * 2u32;
    let lead2 = Complex::with_val(wp, lead.square_ref());
    let lead4 = Complex::with_val(wp, lead2.square_ref());
    let lead6 = Complex::with_val(wp, &lead4 * &lead2);
    let c4_hat = lead4 * &e4;
    let c6_hat = lead6 * &e6;
    let check = |hat: &Complex, exact: i128, what: &str| -> Result<()> {
        let target = Float::with_val(wp, Integer::from(exact));
        let scale = Float::with_val(wp, target.clone().abs()).max(&Float::with_val(wp, 1u32));
        let re_err = Float::with_val(wp, hat.real() - &target).abs();
        let im_err = Float::with_val(wp, hat.imag()).abs();
        let tol = scale * (Float::with_val(wp, 1u32) >> (prec.saturating_sub(12)));
        if re_err > tol || im_err > tol {
            return Err(Error::Inconsistent(format!(
                "period lattice of {} fails the {what} oracle: residual {re_err:.3e}",
                e.label
            )));
        }
        Ok(())
    };
    check(&c4_hat, e.c4(), "c4")?;
    check(&c6_hat, e.c6(), "c6")?;
    Ok(PeriodLattice {
        omega1,
        omega2,
        basis1: b1,
        basis2: b2,
        tau,
        precision_bits: prec,
    })
}

/// Coordinates (s, t) of w in the reduced basis: w = s b1 + t b2.
pub fn lattice_coords(lat: &PeriodLattice, w: &Complex, wp: u32) -> (Float, Float) {
    let ratio = Complex::with_val(wp, w / &lat.basis1);
    let tau_im = Float::with_val(wp, lat.tau.imag());
    let t = Float::with_val(wp, ratio.imag()) / &tau_im;
    let s = Float::with_val(wp, ratio.real())
        - Float::with_val(wp, &t * Float::with_val(wp, lat.tau.real()));
    (s, t)
}

fn frac_part(v: &Float, wp: u32) -> Float {
    let r = Float::with_val(wp, v);
    let n = r.clone().round();
    r - n
}

/// Evaluate the Weierstrass pair at w and return the model point.
pub fn complex_to_point(
    e: &CurveModel,
    lat: &PeriodLattice,
    w: &Complex,
    prec: u32,
) -> Result<ComplexPoint> {
    let wp = prec + GUARD;
    let (s_raw, t_raw) = lattice_coords(lat, w, wp);
    let s = frac_part(&s_raw, wp);
    let t = frac_part(&t_raw, wp);
    let cutoff = Float::with_val(wp, 1u32) >> (prec / 2);
    if s.clone().abs() < cutoff && t.clone().abs() < cutoff {
        return Ok(ComplexPoint::Infinity);
    }
    let two_pi = Float::with_val(wp, pi(wp)) * 2u32;
    let zred = Complex::with_val(wp, &lat.tau) * &t + &s;
    let u = Complex::with_val(wp, zred.mul_i_ref(false)).exp_mul(&two_pi);
    let q = Complex::with_val(wp, lat.tau.mul_i_ref(false)).exp_mul(&two_pi);

    let one = Complex::with_val(wp, 1u32);
    let d0 = Complex::with_val(wp, &one - &u);
    if !Float::with_val(wp, d0.norm_ref()).is_normal() {
        return Ok(ComplexPoint::Infinity);
    }
    let d0sq = Complex::with_val(wp, d0.square_ref());
    let mut psum = Complex::with_val(wp, &u / &d0sq);
    psum += Complex::with_val(wp, rug::Rational::from((1, 12)));
    let mut ppsum = Complex::with_val(wp, &u * (Complex::with_val(wp, &one + &u)))
        / (Complex::with_val(wp, &d0sq * &d0));

    let gate = Float::with_val(wp, 1u32) >> (wp + 8);
    let uinv = Complex::with_val(wp, u.clone().recip());
    let mut qn = Complex::with_val(wp, &q);
    for _ in 1..=100_000u32 {
        let a = Complex::with_val(wp, &qn * &u);
        let b = Complex::with_val(wp, &qn * &uinv);
        let da = Complex::with_val(wp, &one - &a);
        let db = Complex::with_val(wp, &one - &b);
        let dq = Complex::with_val(wp, &one - &qn);
        let da2 = Complex::with_val(wp, da.square_ref());
        let db2 = Complex::with_val(wp, db.square_ref());
        let dq2 = Complex::with_val(wp, dq.square_ref());
        psum += Complex::with_val(wp, &a / &da2);
        psum += Complex::with_val(wp, &b / &db2);
        psum -= Complex::with_val(wp, &qn / &dq2) * 2u32;
        let pa = Complex::with_val(wp, &a * (Complex::with_val(wp, &one + &a)))
            / (Complex::with_val(wp, &da2 * &da));
        let pb = Complex::with_val(wp, &b * (Complex::with_val(wp, &one + &b)))
            / (Complex::with_val(wp, &db2 * &db));
        ppsum += pa;
        ppsum -= pb;
        let mag = Float::with_val(wp, qn.norm_ref()).sqrt();
        if mag * 64u32 < gate {
            break;
        }
        qn *= &q;
    }
    // The series gives (omega1 / 2 pi i)^2 P and (omega1 / 2 pi i)^3 P',
    // so the prefactors are (2 pi i / w1)^2 = -(2 pi / w1)^2 and
    // (2 pi i / w1)^3 = -i (2 pi / w1)^3.
    let lead = Complex::with_val(wp, &lat.basis1).recip() * &two_pi;
    let lead2 = Complex::with_val(wp, lead.square_ref());
    let lead3 = Complex::with_val(wp, &lead2 * &lead);
    let b2_over_12 = Complex::with_val(wp, rug::Rational::from((Integer::from(e.b2()), Integer::from(12))));
    let x = -(Complex::with_val(wp, &lead2 * &psum)) - b2_over_12;
    let big_y = Complex::with_val(wp, &lead3 * &ppsum).mul_i(true);
    // y = (Y - a1 x - a3) / 2.
    let mut y = big_y;
    y -= Complex::with_val(wp, &x) * e.a1;
    y -= e.a3;
    y >>= 1u32;
    Ok(ComplexPoint::Affine(x, y))
}

/// Elliptic logarithm: the w with complex_to_point(w) = (x, y), found by a
/// coarse grid over the fundamental parallelogram and Newton refinement.
pub fn point_to_complex(
    e: &CurveModel,
    lat: &PeriodLattice,
    x: &Complex,
    y: &Complex,
    prec: u32,
) -> Result<Complex> {
    let wp = prec + GUARD;
    let coarse = 96.min(wp);
    let mut best: Option<(f64, Complex)> = None;
    for i in -6i32..=6 {
        for j in -6i32..=6 {
            if i == 0 && j == 0 {
                continue;
            }
            let s = Float::with_val(coarse, i) / 13u32;
            let t = Float::with_val(coarse, j) / 13u32;
            let wc = Complex::with_val(coarse, &lat.basis2) * &t
                + Complex::with_val(coarse, &lat.basis1) * &s;
            if let Ok(ComplexPoint::Affine(xc, _)) = complex_to_point(e, lat, &wc, coarse - GUARD) {
                let d = Complex::with_val(coarse, &xc - x);
                let dist = Float::with_val(coarse, d.norm_ref()).to_f64();
                if best.as_ref().map_or(true, |(b, _)| dist < *b) {
                    best = Some((dist, Complex::with_val(wp, &wc)));
                }
            }
        }
    }
    let (_, mut w) = best.ok_or_else(|| Error::Precision("no grid start for elliptic log".into()))?;
    // Newton on P(w) = x: dP/dw is the big-Y coordinate.
    let mut converged = false;
    for _ in 0..200 {
        let pt = complex_to_point(e, lat, &w, prec)?;
        let (xc, yc) = match pt {
            ComplexPoint::Infinity => {
                // Nudge away from the lattice.
                w += Complex::with_val(wp, &lat.basis1) >> 4u32;
                continue;
            }
            ComplexPoint::Affine(xc, yc) => (xc, yc),
        };
        let big_y = Complex::with_val(wp, &yc) * 2u32
            + Complex::with_val(wp, &xc) * e.a1
            + e.a3;
        if !Float::with_val(wp, big_y.norm_ref()).is_normal() {
            w += Complex::with_val(wp, &lat.basis1) >> 5u32;
            continue;
        }
        let diff = Complex::with_val(wp, &xc - x);
        let step = Complex::with_val(wp, &diff / &big_y);
        let step_mag = Float::with_val(wp, step.norm_ref());
        w -= step;
        let gate = Float::with_val(wp, lat.basis1.norm_ref()) >> (2 * prec.min(wp - 8));
        if step_mag < gate {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Precision("elliptic log Newton did not converge".into()));
    }
    // Resolve the sign: P(w) = P(-w), so compare y.
    let check = |w: &Complex| -> Result<Float> {
        match complex_to_point(e, lat, w, prec)? {
            ComplexPoint::Infinity => Ok(Float::with_val(wp, 1u32) << 60u32),
            ComplexPoint::Affine(xc, yc) => {
                let dx = Complex::with_val(wp, &xc - x);
                let dy = Complex::with_val(wp, &yc - y);
                Ok(Float::with_val(wp, dx.norm_ref()) + Float::with_val(wp, dy.norm_ref()))
            }
        }
    };
    let neg = -(w.clone());
    let (rp, rn) = (check(&w)?, check(&neg)?);
    let (w, resid) = if rn < rp { (neg, rn) } else { (w, rp) };
    let scale = Float::with_val(wp, x.norm_ref()).max(&Float::with_val(wp, 1u32));
    if resid > scale * (Float::with_val(wp, 1u32) >> prec.min(wp - 16)) {
        return Err(Error::Precision("elliptic log residual too large".into()));
    }
    // Return the representative inside the fundamental parallelogram.
    let (s_raw, t_raw) = lattice_coords(lat, &w, wp);
    let s = frac_part(&s_raw, wp);
    let t = frac_part(&t_raw, wp);
    Ok(Complex::with_val(wp, &lat.basis2) * &t + Complex::with_val(wp, &lat.basis1) * &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic_curve::{builtin_curve, builtin_curves};

    #[test]
    fn lattices_validate_for_all_fixtures() {
        for e in builtin_curves() {
            let lat = period_lattice(&e, 128).unwrap();
            assert!(lat.omega1.is_sign_positive(), "{}", e.label);
            let ratio = Complex::with_val(160, &lat.omega2)
                / Complex::with_val(160, (Float::with_val(160, &lat.omega1), Float::new(160)));
            if e.disc() > 0 {
                assert!(
                    Float::with_val(160, ratio.real()).abs().to_f64() < 1e-30,
                    "{} should be rectangular",
                    e.label
                );
            } else {
                assert!(
                    (Float::with_val(160, ratio.real()).to_f64() - 0.5).abs() < 1e-30,
                    "{} second period has half-integral real part",
                    e.label
                );
            }
        }
    }

    #[test]
    fn doubling_precision_is_consistent() {
        let e = builtin_curve("37a1").unwrap();
        let lo = period_lattice(&e, 64).unwrap();
        let hi = period_lattice(&e, 192).unwrap();
        let diff = Float::with_val(200, &lo.omega1) - Float::with_val(200, &hi.omega1);
        assert!(diff.abs() < Float::with_val(64, 1u32) >> 60);
    }

    #[test]
    fn square_lattice_when_c6_vanishes() {
        // y^2 = x^3 - x has c6 = 0 and CM by i: tau = i.
        let e = super::super::CurveModel::new("sq", [0, 0, 0, -1, 0], 32, None).unwrap();
        let lat = period_lattice(&e, 96).unwrap();
        let dre = Float::with_val(128, lat.tau.real()).abs().to_f64();
        let dim = (Float::with_val(128, lat.tau.imag()) - 1u32).abs().to_f64();
        assert!(dre < 1e-25 && dim < 1e-25, "tau = {:?}", lat.tau);
    }

    #[test]
    fn weierstrass_differential_equation_holds() {
        for label in ["37a1", "11a1"] {
            let e = builtin_curve(label).unwrap();
            let prec = 128;
            let lat = period_lattice(&e, prec).unwrap();
            let wp = prec + GUARD;
            for k in 1..=8u32 {
                let s = Float::with_val(wp, 3u32 * k + 1) / 40u32;
                let t = Float::with_val(wp, 2u32 * k + 5) / 45u32;
                let w = Complex::with_val(wp, &lat.basis2) * &t
                    + Complex::with_val(wp, &lat.basis1) * &s;
                let pt = complex_to_point(&e, &lat, &w, prec).unwrap();
                let (x, y) = match pt {
                    ComplexPoint::Affine(x, y) => (x, y),
                    ComplexPoint::Infinity => panic!("interior point"),
                };
                // Check the affine model equation directly.
                let lhs = Complex::with_val(wp, y.square_ref())
                    + Complex::with_val(wp, &x * &y) * e.a1
                    + Complex::with_val(wp, &y) * e.a3;
                let x2 = Complex::with_val(wp, x.square_ref());
                let rhs = Complex::with_val(wp, &x2 * &x)
                    + Complex::with_val(wp, &x2) * e.a2
                    + Complex::with_val(wp, &x) * e.a4
                    + e.a6;
                let resid = Complex::with_val(wp, &lhs - &rhs);
                let scale = Float::with_val(wp, lhs.norm_ref())
                    .max(&Float::with_val(wp, 1u32));
                let ok = Float::with_val(wp, resid.norm_ref())
                    < scale * (Float::with_val(wp, 1u32) >> (2 * (prec - 24)));
                assert!(ok, "{label} k={k}");
            }
        }
    }

    #[test]
    fn zero_maps_to_infinity_and_round_trips_hold() {
        let e = builtin_curve("37a1").unwrap();
        let prec = 128;
        let lat = period_lattice(&e, prec).unwrap();
        let wp = prec + GUARD;
        let zero = Complex::new(wp);
        assert!(matches!(
            complex_to_point(&e, &lat, &zero, prec).unwrap(),
            ComplexPoint::Infinity
        ));
        for k in 1..=10u32 {
            let s = Float::with_val(wp, 2u32 * k + 3) / 31u32;
            let t = Float::with_val(wp, k) / 17u32;
            let w = Complex::with_val(wp, &lat.basis2) * &t
                + Complex::with_val(wp, &lat.basis1) * &s;
            let (x, y) = match complex_to_point(&e, &lat, &w, prec).unwrap() {
                ComplexPoint::Affine(x, y) => (x, y),
                ComplexPoint::Infinity => panic!("nonzero w"),
            };
            let back = point_to_complex(&e, &lat, &x, &y, prec).unwrap();
            let (sb, tb) = lattice_coords(&lat, &back, wp);
            let ds = frac_part(&Float::with_val(wp, &sb - &s), wp).abs();
            let dt = frac_part(&Float::with_val(wp, &tb - &t), wp).abs();
            assert!(
                ds.to_f64() < 1e-28 && dt.to_f64() < 1e-28,
                "k={k} ds={ds} dt={dt}"
            );
        }
    }

    #[test]
    fn rational_points_map_through_the_lattice() {
        let e = builtin_curve("37a1").unwrap();
        let prec = 128;
        let lat = period_lattice(&e, prec).unwrap();
        let wp = prec + GUARD;
        let x0 = Complex::new(wp);
        let y0 = Complex::new(wp);
        let w0 = point_to_complex(&e, &lat, &x0, &y0, prec).unwrap();
        // 2 (0,0) = (1, 0) and 3 (0,0) = (-1, -1) exactly.
        let w2 = Complex::with_val(wp, &w0) * 2u32;
        match complex_to_point(&e, &lat, &w2, prec).unwrap() {
            ComplexPoint::Affine(x, y) => {
                assert!(Float::with_val(wp, (Complex::with_val(wp, &x) - 1u32).norm_ref()).to_f64() < 1e-30);
                assert!(Float::with_val(wp, y.norm_ref()).to_f64() < 1e-30);
            }
            ComplexPoint::Infinity => panic!("2P is affine"),
        }
        let w3 = Complex::with_val(wp, &w0) * 3u32;
        match complex_to_point(&e, &lat, &w3, prec).unwrap() {
            ComplexPoint::Affine(x, y) => {
                assert!(Float::with_val(wp, (Complex::with_val(wp, &x) + 1u32).norm_ref()).to_f64() < 1e-30);
                assert!(Float::with_val(wp, (Complex::with_val(wp, &y) + 1u32).norm_ref()).to_f64() < 1e-30);
            }
            ComplexPoint::Infinity => panic!("3P is affine"),
        }
    }

    #[test]
    fn torsion_point_has_rational_lattice_coordinates() {
        let e = builtin_curve("11a1").unwrap();
        let prec = 96;
        let lat = period_lattice(&e, prec).unwrap();
        let wp = prec + GUARD;
        let x = Complex::with_val(wp, 5u32);
        let y = Complex::with_val(wp, 5u32);
        let w = point_to_complex(&e, &lat, &x, &y, prec).unwrap();
        let five = Complex::with_val(wp, &w) * 5u32;
        let (s, t) = lattice_coords(&lat, &five, wp);
        let ds = frac_part(&s, wp).abs().to_f64();
        let dt = frac_part(&t, wp).abs().to_f64();
        assert!(ds < 1e-20 && dt < 1e-20, "5w is a lattice point: {ds} {dt}");
    }
}
