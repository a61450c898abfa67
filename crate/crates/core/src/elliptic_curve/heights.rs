//! Naive and canonical heights of algebraic points.
//!
//! The naive height of an affine point is the logarithmic Weil height of
//! the projective triple [x : y : 1]: over Q, clear denominators to
//! coprime integers and take log of the largest absolute value; over an
//! imaginary quadratic field, take log of the largest complex modulus and
//! subtract half the log of the norm of the content ideal (the index in
//! the ring of integers of the module spanned by the coordinates and
//! their omega-multiples, computed as a gcd of 2x2 minors).
//!
//! The canonical height is normalized so that for non-torsion P
//!
//!   h(P) = (3/2) lim 4^(-n) h_x(x(2^n P)),
//!
//! where h_x is the absolute Weil height of the x-coordinate; it
//! satisfies h(kP) = k^2 h(P), the parallelogram law, and vanishes
//! exactly on torsion. The limit is driven by the duplication formula
//!
//!   x(2P) = F(x) / G(x),
//!   F = x^4 - b4 x^2 - 2 b6 x - b8,   G = 4 x^3 + b2 x^2 + 2 b4 x + b6.
//!
//! Over Q the iteration never recomputes exact coordinates, whose size
//! doubles its number of digits every step. Instead it tracks the
//! numerator/denominator pair three ways at once: as floating-point
//! magnitudes with a shared power-of-two scale (so the height is always
//! readable), and as exact residues modulo p^W for every prime p dividing
//! R = Res(F, G) (so the gcd introduced by each duplication step can be
//! removed exactly). Any common factor of the homogenized F and G divides
//! R, because Bezout cofactors give U F + V G = R d^7 and a matching
//! identity with a^7, while gcd(a, d) = 1 is preserved; so the residue
//! width W = (n_max + 2)(v_p(R) + 1) never erodes below what one more
//! valuation measurement needs. The reported error term is an estimate
//! from the largest observed duplication defect, not a proven bound.
//!
//! Over an imaginary quadratic field the same limit is computed from a
//! few exact duplications, with h_x read off the Mahler measure of the
//! minimal polynomial: for irrational x with conjugate modulus |x|,
//! h_x = (1/2) log A + log max(1, |x|) with A the primitive leading
//! coefficient.

use rug::ops::{Pow, RemRounding};
use rug::{Float, Integer, Rational};

use super::weierstrass::{on_curve, torsion_order, ExactPoint, QuadElem};
use super::CurveModel;
use crate::error::{Error, Result};
use crate::numeric::{primes_up_to, GUARD};

/// Naive height of the projective triple [x : y : 1] (zero at infinity).
pub fn naive_height(p: &ExactPoint, prec: u32) -> Result<Float> {
    let wp = prec + GUARD;
    match p {
        ExactPoint::Infinity => Ok(Float::new(wp)),
        ExactPoint::Affine(x, y) => {
            if x.is_rational() && y.is_rational() {
                naive_rational(&x.a, &y.a, wp)
            } else {
                let m = if !x.is_rational() { x.m } else { y.m };
                if !x.is_rational() && !y.is_rational() && x.m != y.m {
                    return Err(Error::Domain("coordinates live in different fields".into()));
                }
                if m >= 0 {
                    return Err(Error::Domain(
                        "heights are implemented over Q and imaginary quadratic fields only".into(),
                    ));
                }
                naive_quadratic(x, y, m, wp)
            }
        }
    }
}

fn naive_rational(x: &Rational, y: &Rational, wp: u32) -> Result<Float> {
    let l = Integer::from(x.denom().lcm_ref(y.denom()));
    let xi = Integer::from(x.numer() * &l).div_exact(x.denom());
    let yi = Integer::from(y.numer() * &l).div_exact(y.denom());
    let mut g = Integer::from(xi.gcd_ref(&yi));
    g.gcd_mut(&l);
    let mx = xi.clone().abs().max(yi.clone().abs()).max(l.clone());
    Ok(Float::with_val(wp, mx.div_exact(&g)).ln())
}

/// omega-basis data of Q(sqrt(m)), m < 0 squarefree: omega^2 = t omega - n.
fn omega_data(m: i64) -> (i64, i64) {
    if m.rem_euclid(4) == 1 {
        (1, (1 - m) / 4)
    } else {
        (0, -m)
    }
}

fn naive_quadratic(x: &QuadElem, y: &QuadElem, m: i64, wp: u32) -> Result<Float> {
    let (t_om, n_om) = omega_data(m);
    // Coordinates of a + b sqrt(m) in the basis {1, omega}.
    let to_coords = |q: &QuadElem| -> (Rational, Rational) {
        if m.rem_euclid(4) == 1 {
            (Rational::from(&q.a - &q.b), Rational::from(&q.b * 2u32))
        } else {
            (q.a.clone(), q.b.clone())
        }
    };
    let coords = [
        to_coords(x),
        to_coords(y),
        (Rational::from(1), Rational::new()),
    ];
    let mut t_den = Integer::from(1);
    for (u, v) in &coords {
        t_den.lcm_mut(u.denom());
        t_den.lcm_mut(v.denom());
    }
    // Scaled integer coordinates and the 2 x 6 module matrix: each xi
    // contributes the columns xi and xi omega = (-n v, u + t v).
    let mut cols: Vec<(Integer, Integer)> = Vec::with_capacity(6);
    let mut norms: Vec<Integer> = Vec::with_capacity(3);
    for (u, v) in &coords {
        let ui = Integer::from(u.numer() * &t_den).div_exact(u.denom());
        let vi = Integer::from(v.numer() * &t_den).div_exact(v.denom());
        // |u + v omega|^2 = u^2 + t u v + n v^2 for an imaginary field.
        let norm = Integer::from(ui.square_ref())
            + Integer::from(&ui * &vi) * t_om
            + Integer::from(vi.square_ref()) * n_om;
        norms.push(norm);
        let c2 = (Integer::from(&ui) + Integer::from(&vi) * t_om, vi.clone());
        cols.push((ui, c2.1.clone()));
        cols.push((Integer::from(-&c2.1) * n_om, c2.0));
    }
    let mut content = Integer::new();
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            let minor =
                Integer::from(&cols[i].0 * &cols[j].1) - Integer::from(&cols[j].0 * &cols[i].1);
            content.gcd_mut(&minor);
        }
    }
    if content == 0 {
        return Err(Error::Inconsistent("content ideal of a projective triple is zero".into()));
    }
    let maxnorm = norms.iter().max().cloned().unwrap();
    let h = Float::with_val(wp, maxnorm).ln() - Float::with_val(wp, content).ln();
    Ok(h >> 1u32)
}

/// Absolute Weil height of one element of an imaginary quadratic field.
fn quad_x_height(x: &QuadElem, wp: u32) -> Float {
    if x.b == 0 {
        let n = Float::with_val(wp, x.a.numer()).abs();
        let d = Float::with_val(wp, x.a.denom());
        return n.max(&d).ln();
    }
    let tr = x.trace();
    let nm = x.norm();
    let l = Integer::from(tr.denom().lcm_ref(nm.denom()));
    let b = Integer::from(tr.numer() * &l).div_exact(tr.denom());
    let c = Integer::from(nm.numer() * &l).div_exact(nm.denom());
    let mut g = Integer::from(l.gcd_ref(&b));
    g.gcd_mut(&c);
    let lead = Float::with_val(wp, l.div_exact(&g)).ln();
    let modulus = if nm > 1 {
        Float::with_val(wp, &nm).ln()
    } else {
        Float::new(wp)
    };
    (lead + modulus) >> 1u32
}

/// Bareiss fraction-free determinant of a small integer matrix.
fn bareiss_det(mut m: Vec<Vec<Integer>>) -> Integer {
    let n = m.len();
    let mut sign = 1i32;
    let mut denom = Integer::from(1);
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(pr) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Integer::new();
            };
            m.swap(k, pr);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = Integer::from(&m[k][k] * &m[i][j]) - Integer::from(&m[i][k] * &m[k][j]);
                m[i][j] = t.div_exact(&denom);
            }
            m[i][k] = Integer::new();
        }
        denom = m[k][k].clone();
    }
    let mut d = m[n - 1][n - 1].clone();
    if sign < 0 {
        d = -d;
    }
    d
}

/// Resultant of the duplication pair (F, G), a 7 x 7 Sylvester
/// determinant over the exact integer invariants.
fn duplication_resultant(e: &CurveModel) -> Integer {
    let f = [
        Integer::from(1),
        Integer::new(),
        Integer::from(-e.b4()),
        Integer::from(-2 * e.b6()),
        Integer::from(-e.b8()),
    ];
    let g = [
        Integer::from(4),
        Integer::from(e.b2()),
        Integer::from(2 * e.b4()),
        Integer::from(e.b6()),
    ];
    let mut m: Vec<Vec<Integer>> = vec![vec![Integer::new(); 7]; 7];
    for r in 0..3 {
        for (j, c) in f.iter().enumerate() {
            m[r][r + j] = c.clone();
        }
    }
    for r in 0..4 {
        for (j, c) in g.iter().enumerate() {
            m[3 + r][r + j] = c.clone();
        }
    }
    bareiss_det(m)
}

fn factor_integer(n: &Integer) -> Result<Vec<(Integer, u32)>> {
    let mut out = Vec::new();
    let mut rem = n.clone().abs();
    if rem <= 1 {
        return Ok(out);
    }
    for p in primes_up_to(1_000_000) {
        if rem == 1 {
            break;
        }
        let pi = Integer::from(p);
        let mut v = 0u32;
        while rem.is_divisible(&pi) {
            rem.div_exact_mut(&pi);
            v += 1;
        }
        if v > 0 {
            out.push((pi, v));
        }
    }
    if rem != 1 {
        if rem.is_probably_prime(40) == rug::integer::IsPrime::No {
            return Err(Error::Domain(
                "resultant of the duplication pair has a large composite factor".into(),
            ));
        }
        out.push((rem, 1));
    }
    Ok(out)
}

fn val_capped(x: &Integer, p: &Integer, cap: u32) -> u32 {
    if x.is_zero() {
        return cap;
    }
    let mut v = 0u32;
    let mut t = x.clone();
    while v < cap && t.is_divisible(p) {
        t.div_exact_mut(p);
        v += 1;
    }
    v
}

struct Track {
    p: Integer,
    vr: u32,
    modulus: Integer,
    ra: Integer,
    rd: Integer,
}

fn eval_pair_mod(
    ra: &Integer,
    rd: &Integer,
    b: &[Integer; 4],
    modulus: &Integer,
) -> (Integer, Integer) {
    let a2 = Integer::from(ra * ra).rem_euc(modulus);
    let d2 = Integer::from(rd * rd).rem_euc(modulus);
    let ad = Integer::from(ra * rd).rem_euc(modulus);
    let a4 = Integer::from(&a2 * &a2);
    let a2d2 = Integer::from(&a2 * &d2);
    let ad3 = Integer::from(&ad * &d2);
    let d4 = Integer::from(&d2 * &d2);
    let f = a4
        - Integer::from(&b[1] * &a2d2)
        - Integer::from(&b[2] * &ad3) * 2u32
        - Integer::from(&b[3] * &d4);
    let g = Integer::from(&a2 * &ad) * 4u32
        + Integer::from(&b[0] * &a2d2)
        + Integer::from(&b[1] * &ad3) * 2u32
        + Integer::from(&b[2] * &d4);
    (f.rem_euc(modulus), g.rem_euc(modulus))
}

fn eval_pair_float(fa: &Float, fd: &Float, b: &[Float; 4], wp: u32) -> (Float, Float) {
    let a2 = Float::with_val(wp, fa.square_ref());
    let d2 = Float::with_val(wp, fd.square_ref());
    let ad = Float::with_val(wp, fa * fd);
    let a4 = Float::with_val(wp, a2.square_ref());
    let a2d2 = Float::with_val(wp, &a2 * &d2);
    let ad3 = Float::with_val(wp, &ad * &d2);
    let d4 = Float::with_val(wp, d2.square_ref());
    let f = a4
        - Float::with_val(wp, &b[1] * &a2d2)
        - Float::with_val(wp, &b[2] * &ad3) * 2u32
        - Float::with_val(wp, &b[3] * &d4);
    let g = Float::with_val(wp, &a2 * &ad) * 4u32
        + Float::with_val(wp, &b[0] * &a2d2)
        + Float::with_val(wp, &b[1] * &ad3) * 2u32
        + Float::with_val(wp, &b[2] * &d4);
    (f, g)
}

fn scaled_log_max(fa: &Float, fd: &Float, s: &Integer, ln2: &Float, wp: u32) -> Float {
    let ma = Float::with_val(wp, fa.abs_ref());
    let md = Float::with_val(wp, fd.abs_ref());
    let mx = ma.max(&md);
    mx.ln() + Float::with_val(wp, s) * ln2
}

/// Canonical height over Q by the float-plus-residue duplication.
fn q_route(e: &CurveModel, x: &Rational, prec: u32) -> Result<(Float, Float)> {
    let wp = prec + 2 * GUARD;
    let n_max = (prec.min(120) / 2 + 8) as usize;
    let r = duplication_resultant(e);
    if r == 0 {
        return Err(Error::Inconsistent(format!(
            "duplication resultant of {} vanishes",
            e.label
        )));
    }
    let bf = [
        Float::with_val(wp, Integer::from(e.b2())),
        Float::with_val(wp, Integer::from(e.b4())),
        Float::with_val(wp, Integer::from(e.b6())),
        Float::with_val(wp, Integer::from(e.b8())),
    ];
    let bi = [
        Integer::from(e.b2()),
        Integer::from(e.b4()),
        Integer::from(e.b6()),
        Integer::from(e.b8()),
    ];
    let mut tracks: Vec<Track> = Vec::new();
    for (p, vr) in factor_integer(&r)? {
        let width = (n_max as u32 + 2) * (vr + 1);
        let modulus = Integer::from((&p).pow(width));
        let ra = x.numer().clone().rem_euc(&modulus);
        let rd = x.denom().clone().rem_euc(&modulus);
        tracks.push(Track { p, vr, modulus, ra, rd });
    }
    let mut fa = Float::with_val(wp, x.numer());
    let mut fd = Float::with_val(wp, x.denom());
    let mut s_acc = Integer::new();
    renorm(&mut fa, &mut fd, &mut s_acc)?;
    let ln2 = Float::with_val(wp, 2u32).ln();
    let mut h_prev = scaled_log_max(&fa, &fd, &s_acc, &ln2, wp);
    let mut c_est = 0f64;
    for _ in 1..=n_max {
        let (nfa, nfd) = eval_pair_float(&fa, &fd, &bf, wp);
        fa = nfa;
        fd = nfd;
        // F and G are homogeneous of degree 4, so the true pair is
        // 2^(4S) (F, G): the shared scale quadruples before picking up
        // this step's renormalization shift.
        s_acc *= 4;
        // Inputs are renormalized near exponent zero, so a severe drop in
        // both exponents means catastrophic cancellation near
        // two-torsion.
        let worst = -(wp as i32) / 2;
        if fa.get_exp().unwrap_or(worst).max(fd.get_exp().unwrap_or(worst)) < worst {
            return Err(Error::Precision(
                "duplication passed too close to two-torsion; raise the precision".into(),
            ));
        }
        // Residue step: measure the common p-power introduced by this
        // duplication, then strip it from every representation.
        let mut staged: Vec<(Integer, Integer, u32)> = Vec::with_capacity(tracks.len());
        let mut gnum = Integer::from(1);
        for tr in &tracks {
            let (na, nd) = eval_pair_mod(&tr.ra, &tr.rd, &bi, &tr.modulus);
            let cap = tr.vr + 1;
            let ep = val_capped(&na, &tr.p, cap).min(val_capped(&nd, &tr.p, cap));
            if ep > tr.vr {
                return Err(Error::Inconsistent(
                    "duplication cancellation exceeds the resultant budget".into(),
                ));
            }
            gnum *= Integer::from((&tr.p).pow(ep));
            staged.push((na, nd, ep));
        }
        for (tr, (na, nd, ep)) in tracks.iter_mut().zip(staged) {
            let pe = Integer::from((&tr.p).pow(ep));
            let newmod = Integer::from(tr.modulus.div_exact_ref(&pe));
            let other = Integer::from(gnum.div_exact_ref(&pe)).rem_euc(&newmod);
            let inv = other
                .invert(&newmod)
                .map_err(|_| Error::Inconsistent("residue modulus lost invertibility".into()))?;
            tr.ra = (Integer::from(na.div_exact_ref(&pe)) * &inv).rem_euc(&newmod);
            tr.rd = (Integer::from(nd.div_exact_ref(&pe)) * &inv).rem_euc(&newmod);
            tr.modulus = newmod;
        }
        if gnum != 1 {
            fa = fa / &gnum;
            fd = fd / &gnum;
        }
        renorm(&mut fa, &mut fd, &mut s_acc)?;
        let h_new = scaled_log_max(&fa, &fd, &s_acc, &ln2, wp);
        let defect = Float::with_val(wp, &h_new - &(Float::with_val(wp, &h_prev) * 4u32));
        c_est = c_est.max(defect.to_f64().abs());
        h_prev = h_new;
    }
    finish_limit(h_prev, c_est, n_max as u32, prec, wp)
}

fn renorm(fa: &mut Float, fd: &mut Float, s: &mut Integer) -> Result<()> {
    let e = match (fa.get_exp(), fd.get_exp()) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(Error::Precision("both duplication coordinates vanished".into()))
        }
    };
    if e != 0 {
        *fa >>= e;
        *fd >>= e;
        *s += e;
    }
    Ok(())
}

fn finish_limit(h_n: Float, c_est: f64, n: u32, prec: u32, wp: u32) -> Result<(Float, Float)> {
    let t = h_n >> (2 * n);
    let val = Float::with_val(wp, &t * 3u32) / 2u32;
    let mut err = Float::with_val(wp, c_est + 1.0) >> (2 * n);
    err *= 3u32;
    err /= 2u32;
    err += Float::with_val(wp, 1u32) >> (prec.saturating_sub(8));
    Ok((val, err))
}

/// Canonical height over an imaginary quadratic field by exact
/// duplication and Mahler-measure heights.
fn k_route(e: &CurveModel, x0: &QuadElem, prec: u32) -> Result<(Float, Float)> {
    let wp = prec + 2 * GUARD;
    let m = x0.m;
    let q = |v: i128| QuadElem::from_rational(Rational::from(Integer::from(v)), m);
    let (b2, b4, b6, b8) = (q(e.b2()), q(e.b4()), q(e.b6()), q(e.b8()));
    let two = q(2);
    let four = q(4);
    let bits = |r: &Rational| r.numer().significant_bits().max(r.denom().significant_bits());
    let d0 = bits(&x0.a).max(bits(&x0.b)).max(8);
    let mut n_k = 9u32;
    while n_k > 4 && (d0 as u64) << (2 * n_k) > 6_000_000 {
        n_k -= 1;
    }
    let mut x = x0.clone();
    let mut h_prev = quad_x_height(&x, wp);
    let mut c_est = 0f64;
    for _ in 1..=n_k {
        let x2 = x.mul(&x);
        let x3 = x2.mul(&x);
        let x4 = x2.mul(&x2);
        let f = x4
            .sub(&b4.mul(&x2))
            .sub(&two.mul(&b6).mul(&x))
            .sub(&b8);
        let g = four
            .mul(&x3)
            .add(&b2.mul(&x2))
            .add(&two.mul(&b4).mul(&x))
            .add(&b6);
        x = f.div(&g).map_err(|_| {
            Error::Inconsistent("duplication hit two-torsion on a non-torsion point".into())
        })?;
        let h_new = quad_x_height(&x, wp);
        let defect = Float::with_val(wp, &h_new - &(Float::with_val(wp, &h_prev) * 4u32));
        c_est = c_est.max(defect.to_f64().abs());
        h_prev = h_new;
    }
    finish_limit(h_prev, c_est, n_k, prec, wp)
}

/// Canonical height of an exact point, with an error estimate. Exact zero
/// on torsion.
pub fn canonical_height(e: &CurveModel, p: &ExactPoint, prec: u32) -> Result<(Float, Float)> {
    if prec < 32 {
        return Err(Error::Domain("precision must be at least 32 bits".into()));
    }
    if !on_curve(e, p) {
        return Err(Error::Domain(format!("point is not on {}", e.label)));
    }
    if torsion_order(e, p)?.is_some() {
        return Ok((Float::new(prec), Float::new(prec)));
    }
    let x = match p {
        ExactPoint::Infinity => unreachable!("infinity is torsion"),
        ExactPoint::Affine(x, _) => x,
    };
    // The height depends on x alone, so a point with rational x takes the
    // rational route even when y generates the quadratic field.
    if x.b == 0 {
        q_route(e, &x.a, prec)
    } else if x.m < 0 {
        k_route(e, x, prec)
    } else {
        Err(Error::Domain(
            "heights are implemented over Q and imaginary quadratic fields only".into(),
        ))
    }
}
