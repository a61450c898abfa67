//! The analytic parametrization of a rational elliptic curve by the
//! modular curve of its conductor.
//!
//! The curve's newform f = sum a_n q^n (weight 2, level N = conductor)
//! integrates to w(z) = sum (a_n / n) e^(2 pi i n z), a map from the
//! upper half plane to C that is invariant under the level group up to
//! lattice periods. Composing with the Weierstrass chart gives the
//! parametrization phi from the modular curve to the elliptic curve,
//! with the cusp at infinity mapping to the origin. The scaling of f
//! against the Neron differential is taken to be 1; the choice is
//! validated whenever a complex image is recognized as an exact point
//! satisfying the curve equation, since any other scaling would move
//! images off the curve.
//!
//! Summing phi over a full class-group orbit of Heegner points yields a
//! trace fixed by complex conjugation and by the Galois action, so the
//! trace is (numerically) a rational point. The module recognizes it
//! exactly when the denominator stays within a configured bound, checks
//! the curve equation exactly, and computes the canonical height of the
//! result. The archimedean proxy (1/h) sum log+ ||(x, y)|| over the
//! orbit is the computable lower-bound surrogate for that height, and
//! 24 deg(phi) / [index] * script-L(D) is the predicted growth rate.
//!
//! Coefficient bounds: |a_n| <= d(n) sqrt(n) and d(n) <= 2 sqrt(n), so
//! |a_n / n| <= 2 and the series tail beyond M is at most
//! 2 |q|^(M+1) / (1 - |q|). Truncation orders are chosen from that
//! bound, so every reported value carries its full target precision.

use rug::ops::Pow;
use rug::{Complex, Float, Rational};

use crate::dirichlet_l::l_report;
use crate::elliptic_curve::heights::canonical_height;
use crate::elliptic_curve::periods::{
    complex_to_point, lattice_coords, period_lattice, ComplexPoint, PeriodLattice,
};
use crate::elliptic_curve::recognition::{recognize_point, recognize_rational};
use crate::elliptic_curve::weierstrass::{torsion_order, ExactPoint};
use crate::elliptic_curve::CurveModel;
use crate::heegner_points::{enumerate_heegner, gamma0_reduce, heegner_condition, ht_n};
use crate::numeric::{abs_c, gamma0_index, pi, GUARD};
use crate::root_number::global_sign;
use crate::{Error, Result};

/// Fourier coefficients a_1..a_M of the newform attached to a curve.
/// `an[0]` is unused padding so that `an[n]` is a_n.
#[derive(Debug, Clone)]
pub struct QExpansion {
    pub level: u64,
    pub an: Vec<i64>,
}

impl QExpansion {
    /// Highest index M carried by the expansion.
    pub fn order(&self) -> usize {
        self.an.len() - 1
    }

    /// Rigorous bound on |sum_{n > M} (a_n / n) q^n| from |a_n / n| <= 2:
    /// the tail is at most 2 |q|^(M+1) / (1 - |q|).
    pub fn tail_bound(&self, abs_q: &Float) -> Float {
        let wp = abs_q.prec();
        let m = self.an.len() as u32;
        let one = Float::with_val(wp, 1u32);
        let num = Float::with_val(wp, abs_q.pow(m)) * 2u32;
        num / (one - abs_q)
    }
}

/// Coefficients of the newform via point counts at primes, the standard
/// recursion at prime powers, and multiplicativity elsewhere.
pub fn an_coeffs(e: &CurveModel, m: usize) -> Result<QExpansion> {
    if m < 1 || m > 10_000_000 {
        return Err(Error::Domain(
            "coefficient order must be in 1..=10000000".into(),
        ));
    }
    // Smallest-prime-factor sieve; spf[n] = 0 marks n < 2.
    let mut spf = vec![0u32; m + 1];
    for i in 2..=m {
        if spf[i] == 0 {
            let mut j = i;
            while j <= m {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    let mut an = vec![0i64; m + 1];
    an[1] = 1;
    for n in 2..=m {
        let p = spf[n] as usize;
        let mut pk = p;
        let mut rest = n / p;
        while rest % p == 0 {
            pk *= p;
            rest /= p;
        }
        an[n] = if rest > 1 {
            // gcd(pk, rest) = 1 and both factors are already filled.
            an[pk] * an[rest]
        } else if pk == p {
            e.ap(p as u64)?
        } else if e.conductor % (p as u64) == 0 {
            // Primes of the level: a_{p^k} = (a_p)^k.
            an[p] * an[pk / p]
        } else {
            // Good primes: a_{p^(k+1)} = a_p a_{p^k} - p a_{p^(k-1)}.
            an[p] * an[pk / p] - (p as i64) * an[pk / (p * p)]
        };
    }
    Ok(QExpansion {
        level: e.conductor,
        an,
    })
}

/// Smallest truncation order whose tail bound at |q| sits below
/// 2^-(prec + 8). Errors out when the reduced point is so low that the
/// order would exceed the desk-scale cap.
fn truncation_order(abs_q: &Float, prec: u32) -> Result<usize> {
    let wp = abs_q.prec();
    if !abs_q.is_finite() || *abs_q <= 0u32 {
        return Err(Error::Precision("series argument has no magnitude".into()));
    }
    let one = Float::with_val(wp, 1u32);
    let gap = Float::with_val(wp, &one - abs_q);
    if gap <= 0u32 {
        return Err(Error::Precision(
            "series argument is not inside the unit disc".into(),
        ));
    }
    let ln2 = Float::with_val(wp, 2u32).ln();
    let need = Float::with_val(wp, prec + 8) * ln2 + (Float::with_val(wp, 2u32) / &gap).ln();
    let denom = -Float::with_val(wp, abs_q.ln_ref());
    let m = Float::with_val(wp, &need / &denom).ceil().to_f64();
    if !m.is_finite() || m > 2.0e6 {
        return Err(Error::Precision(format!(
            "series truncation would need about {m:.0} terms; the point sits too close to the real axis for this precision"
        )));
    }
    Ok((m.max(0.0) as usize).max(16))
}

/// e^(2 pi i z).
fn q_at(z: &Complex, wp: u32) -> Complex {
    let two_pi = Float::with_val(wp, pi(wp)) * 2u32;
    let mut zz = Complex::with_val(wp, z.mul_i_ref(false));
    zz *= &two_pi;
    zz.exp()
}

fn frac_near(v: &Float, wp: u32) -> Float {
    let r = Float::with_val(wp, v);
    let n = r.clone().round();
    r - n
}

/// Translate w by lattice vectors into the parallelogram centered at 0.
fn reduce_mod_lattice(lat: &PeriodLattice, w: &Complex, wp: u32) -> Complex {
    let (s, t) = lattice_coords(lat, w, wp);
    let sf = frac_near(&s, wp);
    let tf = frac_near(&t, wp);
    let mut r = Complex::with_val(wp, &lat.basis2) * &tf;
    r += Complex::with_val(wp, &lat.basis1) * &sf;
    r
}

/// Distance between w1 and w2 in the lattice-coordinate metric: the
/// largest coordinate-wise distance of w1 - w2 to the lattice.
#[cfg(test)]
fn lattice_gap(lat: &PeriodLattice, a: &Complex, b: &Complex, wp: u32) -> Float {
    let d = Complex::with_val(wp, a - b);
    let (s, t) = lattice_coords(lat, &d, wp);
    let fs = frac_near(&s, wp).abs();
    let ft = frac_near(&t, wp).abs();
    fs.max(&ft)
}

/// Value of the parametrization at one point: the elliptic logarithm w
/// reduced into the fundamental parallelogram, and the curve point.
#[derive(Debug, Clone)]
pub struct PhiValue {
    pub w: Complex,
    pub point: ComplexPoint,
}

/// Evaluate the parametrization at z in the upper half plane. The point
/// is first moved by the level group to maximize its imaginary part, so
/// the q-series converges geometrically; the truncation order is chosen
/// so the tail sits below the target precision.
pub fn phi_eval(e: &CurveModel, z: &Complex, prec: u32) -> Result<PhiValue> {
    if !(16..=4096).contains(&prec) {
        return Err(Error::Domain("precision must be in 16..=4096 bits".into()));
    }
    if z.imag().is_sign_negative() || z.imag().is_zero() {
        return Err(Error::Domain(
            "the parametrization needs a point of the upper half plane".into(),
        ));
    }
    let wp = prec + 2 * GUARD;
    let (zr, _) = gamma0_reduce(z, e.conductor, wp)?;
    let q = q_at(&zr, wp);
    let abs_q = abs_c(&q, wp);
    let m_ord = truncation_order(&abs_q, prec)?;
    let qe = an_coeffs(e, m_ord)?;
    let mut acc = Complex::new(wp);
    for n in (1..=m_ord).rev() {
        acc *= &q;
        acc += Float::with_val(wp, Rational::from((qe.an[n], n as i64)));
    }
    acc *= &q;
    let lat = period_lattice(e, wp)?;
    let w = reduce_mod_lattice(&lat, &acc, wp);
    let point = complex_to_point(e, &lat, &w, prec)?;
    Ok(PhiValue { w, point })
}

/// A full orbit evaluation: per-class values, the class-group trace,
/// and whatever exact structure the trace reveals.
#[derive(Debug, Clone)]
pub struct HeegnerTrace {
    pub d: i64,
    pub class_number: usize,
    /// Level height of each orbit representative.
    pub orbit_ht: Vec<Float>,
    /// Reduced elliptic logarithm of each orbit image.
    pub orbit_w: Vec<Complex>,
    /// Complex image of each orbit point.
    pub orbit_points: Vec<ComplexPoint>,
    /// Sum of the orbit logarithms, reduced mod the lattice.
    pub trace_w: Complex,
    pub trace_point: ComplexPoint,
    /// The trace as an exact point, when recognition succeeds.
    pub recognized: Option<ExactPoint>,
    /// Whether the recognized trace has infinite order; None while the
    /// trace is unrecognized.
    pub non_torsion: Option<bool>,
    /// Canonical height of the recognized trace (0 for torsion).
    pub height: Option<Float>,
    pub height_error: Option<Float>,
    /// For class number 2: the recognized elementary symmetric
    /// functions (sum, product) of the two orbit x-coordinates.
    pub symmetric_x: Option<(Rational, Rational)>,
}

/// For a two-element orbit the x-coordinates are exchanged by Galois and
/// fixed as a pair by conjugation, so their sum and product are rational.
/// Recognize both and verify that the original complex values are roots
/// of t^2 - s t + p before reporting.
fn recognize_symmetric(
    pts: &[ComplexPoint],
    denom_bound: u64,
    tol_bits: u32,
    wp: u32,
) -> Option<(Rational, Rational)> {
    let (x1, x2) = match (&pts[0], &pts[1]) {
        (ComplexPoint::Affine(x1, _), ComplexPoint::Affine(x2, _)) => (x1, x2),
        _ => return None,
    };
    let s = Complex::with_val(wp, x1 + x2);
    let p = Complex::with_val(wp, x1 * x2);
    for v in [&s, &p] {
        let scale = Float::with_val(wp, 1u32) + abs_c(v, wp);
        let imag = Float::with_val(wp, v.imag()).abs();
        if imag > scale >> tol_bits {
            return None;
        }
    }
    let sr = recognize_rational(s.real(), denom_bound, tol_bits)?;
    let pr = recognize_rational(p.real(), denom_bound, tol_bits)?;
    let sf = Float::with_val(wp, &sr);
    let pf = Float::with_val(wp, &pr);
    for x in [x1, x2] {
        let mut res = Complex::with_val(wp, x.square_ref());
        res -= Complex::with_val(wp, x) * &sf;
        res += &pf;
        let scale = Float::with_val(wp, 1u32) + abs_c(x, wp).square();
        if abs_c(&res, wp) > scale >> (tol_bits / 2) {
            return None;
        }
    }
    Some((sr, pr))
}

/// Run the full Heegner pipeline for one discriminant: enumerate the
/// orbit, push every point through the parametrization, take the trace
/// in C mod the lattice, and try to recognize it as an exact point.
/// Refuses discriminants whose functional-equation sign is +1 and
/// discriminants failing the splitting condition, since the trace
/// carries no height information there.
pub fn heegner_point(
    e: &CurveModel,
    d: i64,
    prec: u32,
    denom_bound: u64,
) -> Result<HeegnerTrace> {
    if let Ok(1) = global_sign(e, d) {
        return Err(Error::Domain(format!(
            "the functional equation of ({}, {d}) has sign +1; the trace degenerates",
            e.label
        )));
    }
    if !heegner_condition(e.conductor, d)? {
        return Err(Error::Domain(format!(
            "{d} fails the splitting condition at level {}",
            e.conductor
        )));
    }
    let wp = prec + 2 * GUARD;
    let orbit = enumerate_heegner(e.conductor, d, wp)?;
    let lat = period_lattice(e, wp)?;
    let mut orbit_ht = Vec::with_capacity(orbit.len());
    let mut orbit_w = Vec::with_capacity(orbit.len());
    let mut orbit_points = Vec::with_capacity(orbit.len());
    let mut sum = Complex::new(wp);
    for hp in &orbit {
        let pv = phi_eval(e, &hp.root, prec)?;
        orbit_ht.push(ht_n(&hp.root, e.conductor, wp)?);
        sum += &pv.w;
        orbit_w.push(pv.w);
        orbit_points.push(pv.point);
    }
    let trace_w = reduce_mod_lattice(&lat, &sum, wp);
    let trace_point = complex_to_point(e, &lat, &trace_w, prec)?;
    let tol_bits = prec / 2;
    let zero = || Float::with_val(prec, 0u32);
    let (recognized, non_torsion, height, height_error) = match &trace_point {
        ComplexPoint::Infinity => (
            Some(ExactPoint::Infinity),
            Some(false),
            Some(zero()),
            Some(zero()),
        ),
        ComplexPoint::Affine(x, y) => {
            match recognize_point(e, x, y, d, denom_bound, tol_bits) {
                Some(p) => {
                    if torsion_order(e, &p)?.is_some() {
                        (Some(p), Some(false), Some(zero()), Some(zero()))
                    } else {
                        let (hv, he) = canonical_height(e, &p, prec)?;
                        (Some(p), Some(true), Some(hv), Some(he))
                    }
                }
                None => (None, None, None, None),
            }
        }
    };
    let symmetric_x = if orbit.len() == 2 {
        recognize_symmetric(&orbit_points, denom_bound, tol_bits, wp)
    } else {
        None
    };
    Ok(HeegnerTrace {
        d,
        class_number: orbit.len(),
        orbit_ht,
        orbit_w,
        orbit_points,
        trace_w,
        trace_point,
        recognized,
        non_torsion,
        height,
        height_error,
        symmetric_x,
    })
}

/// log+ of the euclidean norm of the affine image of z, with the origin
/// contributing exactly 0. Images within 2^-(prec/2) of the origin are
/// recomputed at doubled precision first, because the affine chart blows
/// up there and would otherwise dominate the sum with junk digits.
fn log_plus_norm(e: &CurveModel, lat: &PeriodLattice, z: &Complex, prec: u32) -> Result<Float> {
    let wp = prec + GUARD;
    let pv = phi_eval(e, z, prec)?;
    let scale = abs_c(&Complex::with_val(wp, &lat.basis1), wp);
    let pv = if abs_c(&pv.w, wp) < scale >> (prec / 2) {
        phi_eval(e, z, prec * 2)?
    } else {
        pv
    };
    match &pv.point {
        ComplexPoint::Infinity => Ok(Float::with_val(prec, 0u32)),
        ComplexPoint::Affine(x, y) => {
            let wpt = x.real().prec();
            let r2 = Float::with_val(wpt, x.norm_ref()) + Float::with_val(wpt, y.norm_ref());
            if r2 <= 1u32 {
                Ok(Float::with_val(prec, 0u32))
            } else {
                Ok(Float::with_val(prec, r2.ln() / 2u32))
            }
        }
    }
}

/// Orbit average of log+ ||(x, y)|| over the Heegner points of d: the
/// archimedean surrogate for the canonical height of the trace. Needs
/// only complex arithmetic, so it works for every class number.
pub fn archimedean_height_proxy(e: &CurveModel, d: i64, prec: u32) -> Result<Float> {
    if !heegner_condition(e.conductor, d)? {
        return Err(Error::Domain(format!(
            "{d} fails the splitting condition at level {}",
            e.conductor
        )));
    }
    let wp = prec + GUARD;
    let orbit = enumerate_heegner(e.conductor, d, wp)?;
    let lat = period_lattice(e, wp)?;
    let mut total = Float::with_val(wp, 0u32);
    for hp in &orbit {
        total += log_plus_norm(e, &lat, &hp.root, prec)?;
    }
    Ok(Float::with_val(prec, total / orbit.len() as u32))
}

/// Predicted growth rate of the Heegner height:
/// 24 deg(phi) / [index of the level group] * script-L(D), with
/// script-L from the L-data module. Unavailable without a recorded
/// modular degree.
pub fn predicted_asymptotic(e: &CurveModel, d: i64, prec: u32) -> Result<Float> {
    let deg = e.deg_phi.ok_or_else(|| {
        Error::Unavailable(format!("the modular degree of {} is not recorded", e.label))
    })?;
    let rep = l_report(d, prec)?;
    let wp = prec + GUARD;
    let mut v = Float::with_val(wp, 24 * deg);
    v /= Float::with_val(wp, gamma0_index(e.conductor));
    v *= &rep.script_ld;
    Ok(Float::with_val(prec, v))
}
