//! Elliptic curves over Q at desk scale: Weierstrass invariants, point
//! counts a_p by direct enumeration, reduction data at bad primes, period
//! lattices with complex uniformization, an exact group law, naive and
//! canonical heights, and recognition of algebraic points from complex
//! approximations.
//!
//! A curve is ingested as integer coefficients (a1, a2, a3, a4, a6) of
//! y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6, together with its
//! conductor and, optionally, the degree of its modular parametrization;
//! the conductor is validated at multiplicative primes (p || N forces
//! v_p(disc) > 0 and v_p(c4) = 0) rather than recomputed, since running
//! the full local algorithm at additive primes is out of scope here.
//!
//! Point counts: for odd p the substitution 2y + a1 x + a3 collapses the
//! curve mod p to v^2 = 4x^3 + b2 x^2 + 2 b4 x + b6, so #E(F_p) is
//! p + 1 + sum of quadratic-character values of the cubic; p = 2 is
//! enumerated directly. At a multiplicative prime the trace is +1 for a
//! split node and -1 for a nonsplit one, decided for p >= 3 by whether
//! -c6 is a square mod p and, at every bad prime, cross-checked against
//! the count of nonsingular points, which must equal p - a_p.

pub mod heights;
pub mod periods;
pub mod recognition;
pub mod weierstrass;

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::numeric::factor;

/// Coefficient cap: keeps every invariant within i128 with exact
/// arithmetic.
pub const MAX_COEFF: i64 = 1 << 16;

/// Behaviour of the reduction at a prime dividing the conductor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionType {
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

/// Integral Weierstrass model with ingested conductor and optional
/// modular degree. The a_p cache fills on demand, one write per prime.
#[derive(Debug)]
pub struct CurveModel {
    pub label: String,
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub a4: i64,
    pub a6: i64,
    pub conductor: u64,
    pub deg_phi: Option<u64>,
    ap_cache: Mutex<HashMap<u64, i64>>,
}

impl Clone for CurveModel {
    fn clone(&self) -> Self {
        CurveModel {
            label: self.label.clone(),
            a1: self.a1,
            a2: self.a2,
            a3: self.a3,
            a4: self.a4,
            a6: self.a6,
            conductor: self.conductor,
            deg_phi: self.deg_phi,
            ap_cache: Mutex::new(self.ap_cache.lock().unwrap().clone()),
        }
    }
}

fn vp_i128(mut n: i128, p: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

impl CurveModel {
    /// Validated model: nonzero discriminant, coefficients within desk
    /// scale, and the conductor consistent at multiplicative primes.
    pub fn new(
        label: &str,
        a: [i64; 5],
        conductor: u64,
        deg_phi: Option<u64>,
    ) -> Result<CurveModel> {
        let [a1, a2, a3, a4, a6] = a;
        if a.iter().any(|&v| v.abs() >= MAX_COEFF) {
            return Err(Error::Domain(format!(
                "curve {label}: coefficients must stay below 2^16"
            )));
        }
        if conductor == 0 {
            return Err(Error::Domain(format!("curve {label}: conductor must be positive")));
        }
        let e = CurveModel {
            label: label.to_string(),
            a1,
            a2,
            a3,
            a4,
            a6,
            conductor,
            deg_phi,
            ap_cache: Mutex::new(HashMap::new()),
        };
        let disc = e.disc();
        if disc == 0 {
            return Err(Error::Domain(format!("curve {label} is singular")));
        }
        for (p, v) in factor(conductor) {
            if disc % p as i128 != 0 {
                return Err(Error::Domain(format!(
                    "curve {label}: conductor prime {p} does not divide the discriminant"
                )));
            }
            if v == 1 && vp_i128(e.c4(), p) != 0 {
                return Err(Error::Domain(format!(
                    "curve {label}: reduction at {p} is not multiplicative, yet {p} || conductor"
                )));
            }
        }
        Ok(e)
    }

    pub fn b2(&self) -> i128 {
        let (a1, a2) = (self.a1 as i128, self.a2 as i128);
        a1 * a1 + 4 * a2
    }

    pub fn b4(&self) -> i128 {
        let (a1, a3, a4) = (self.a1 as i128, self.a3 as i128, self.a4 as i128);
        2 * a4 + a1 * a3
    }

    pub fn b6(&self) -> i128 {
        let (a3, a6) = (self.a3 as i128, self.a6 as i128);
        a3 * a3 + 4 * a6
    }

    pub fn b8(&self) -> i128 {
        let (a1, a2, a3, a4, a6) = (
            self.a1 as i128,
            self.a2 as i128,
            self.a3 as i128,
            self.a4 as i128,
            self.a6 as i128,
        );
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }

    pub fn c4(&self) -> i128 {
        self.b2() * self.b2() - 24 * self.b4()
    }

    pub fn c6(&self) -> i128 {
        let b2 = self.b2();
        -b2 * b2 * b2 + 36 * b2 * self.b4() - 216 * self.b6()
    }

    pub fn disc(&self) -> i128 {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    /// j-invariant c4^3 / disc as an exact rational.
    pub fn j(&self) -> rug::Rational {
        let c4 = rug::Integer::from(self.c4());
        let num = c4.clone() * &c4 * &c4;
        rug::Rational::from((num, rug::Integer::from(self.disc())))
    }

    /// (disc, c4, c6, j).
    pub fn invariants(&self) -> (i128, i128, i128, rug::Rational) {
        (self.disc(), self.c4(), self.c6(), self.j())
    }

    /// Trace of Frobenius at any prime below 10^6: counted directly at
    /// good primes, read off the reduction type at bad ones. Cached.
    pub fn ap(&self, p: u64) -> Result<i64> {
        if let Some(&v) = self.ap_cache.lock().unwrap().get(&p) {
            return Ok(v);
        }
        let v = if self.conductor % p == 0 {
            reduction_type(self, p)?.1
        } else {
            ap_good(self, p)?
        };
        self.ap_cache.lock().unwrap().insert(p, v);
        Ok(v)
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Quadratic-character table mod an odd prime: table[r] is +1 for a
/// nonzero square, -1 for a nonsquare, 0 at r = 0.
fn chi_mod_p(p: u64) -> Vec<i8> {
    let mut table = vec![-1i8; p as usize];
    table[0] = 0;
    let mut i = 1u64;
    while i <= p / 2 {
        table[((i * i) % p) as usize] = 1;
        i += 1;
    }
    table
}

/// a_p = p + 1 - #E(F_p) at a prime of good reduction, by enumeration.
pub fn ap_good(e: &CurveModel, p: u64) -> Result<i64> {
    if !is_prime_u64(p) || p >= 1_000_000 {
        return Err(Error::Domain(format!("{p} is not a prime below 10^6")));
    }
    if e.conductor % p == 0 {
        return Err(Error::Domain(format!(
            "{p} divides the conductor; use the reduction-type path"
        )));
    }
    let ap = if p == 2 {
        let m = |v: i64| v.rem_euclid(2);
        let mut count = 1i64; // infinity
        for x in 0..2i64 {
            for y in 0..2i64 {
                let lhs = y * y + e.a1 * x * y + e.a3 * y;
                let rhs = x * x * x + e.a2 * x * x + e.a4 * x + e.a6;
                if m(lhs - rhs) == 0 {
                    count += 1;
                }
            }
        }
        2 + 1 - count
    } else {
        let chi = chi_mod_p(p);
        let pp = p as i128;
        let (b2, b4, b6) = (
            (e.b2().rem_euclid(pp)) as u64,
            (e.b4().rem_euclid(pp)) as u64,
            (e.b6().rem_euclid(pp)) as u64,
        );
        let mut sum = 0i64;
        for x in 0..p {
            // 4x^3 + b2 x^2 + 2 b4 x + b6 mod p, by Horner.
            let mut f = (4 * x + b2) % p;
            f = (f * x + 2 * b4 % p) % p;
            f = (f * x + b6) % p;
            sum += chi[f as usize] as i64;
        }
        -sum
    };
    let hasse = 4 * p as i128;
    if (ap as i128) * (ap as i128) > hasse {
        return Err(Error::Inconsistent(format!(
            "a_{p} = {ap} violates the Hasse bound on {}",
            e.label
        )));
    }
    Ok(ap)
}

/// Count the nonsingular affine points of the reduction mod p and add one
/// for infinity.
fn count_nonsingular(e: &CurveModel, p: u64) -> u64 {
    if p == 2 {
        let m = |v: i64| v.rem_euclid(2);
        let mut count = 1u64;
        for x in 0..2i64 {
            for y in 0..2i64 {
                let lhs = y * y + e.a1 * x * y + e.a3 * y;
                let rhs = x * x * x + e.a2 * x * x + e.a4 * x + e.a6;
                if m(lhs - rhs) != 0 {
                    continue;
                }
                // Partial derivatives of the defining polynomial.
                let fy = 2 * y + e.a1 * x + e.a3;
                let fx = e.a1 * y - (3 * x * x + 2 * e.a2 * x + e.a4);
                if m(fy) == 0 && m(fx) == 0 {
                    continue;
                }
                count += 1;
            }
        }
        return count;
    }
    let chi = chi_mod_p(p);
    let pp = p as i128;
    let (b2, b4, b6) = (
        (e.b2().rem_euclid(pp)) as u64,
        (e.b4().rem_euclid(pp)) as u64,
        (e.b6().rem_euclid(pp)) as u64,
    );
    // In the completed-square model v^2 = f(x), a point is singular
    // exactly when f(x) = f'(x) = 0 (a repeated root of the cubic).
    let mut count = 1u64;
    for x in 0..p {
        let mut f = (4 * x + b2) % p;
        f = (f * x + 2 * b4 % p) % p;
        f = (f * x + b6) % p;
        let mut fp = (12 * x + 2 * b2) % p;
        fp = (fp * x + 2 * b4 % p) % p;
        if f == 0 && fp == 0 {
            continue; // the node or cusp itself
        }
        count += (1 + chi[f as usize] as i64) as u64;
    }
    count
}

/// Reduction type and a_p at a prime dividing the conductor: +1 split,
/// -1 nonsplit, 0 additive. For p >= 3 the split test is whether -c6 is
/// a square mod p; every answer is cross-checked against the count of
/// nonsingular points, which must equal p - a_p.
pub fn reduction_type(e: &CurveModel, p: u64) -> Result<(ReductionType, i64)> {
    if !is_prime_u64(p) || p >= 1_000_000 {
        return Err(Error::Domain(format!("{p} is not a prime below 10^6")));
    }
    if e.conductor % p != 0 {
        return Err(Error::Domain(format!(
            "{p} does not divide the conductor of {}",
            e.label
        )));
    }
    let multiplicative = vp_i128(e.disc(), p) > 0 && vp_i128(e.c4(), p) == 0;
    // The nonsingular locus has p - 1, p + 1, or p points (split,
    // nonsplit, additive), always counting infinity, and a_p = p - #E_ns.
    let counted = p as i64 - count_nonsingular(e, p) as i64;
    let (kind, ap) = if multiplicative {
        let split = if p == 2 {
            // The quadratic-residue test needs p odd; fall back on the
            // count, which is +1 or -1 here.
            counted == 1
        } else {
            let chi = chi_mod_p(p);
            let r = (-e.c6()).rem_euclid(p as i128) as usize;
            if chi[r] == 0 {
                return Err(Error::Inconsistent(format!(
                    "multiplicative prime {p} divides c6 on {}",
                    e.label
                )));
            }
            chi[r] == 1
        };
        if split {
            (ReductionType::SplitMultiplicative, 1)
        } else {
            (ReductionType::NonsplitMultiplicative, -1)
        }
    } else {
        (ReductionType::Additive, 0)
    };
    if counted != ap {
        return Err(Error::Inconsistent(format!(
            "reduction at {p} on {}: criterion gives a_p = {ap}, the nonsingular count gives {counted}",
            e.label
        )));
    }
    Ok((kind, ap))
}

/// Built-in curve records, one per line:
/// `label a1 a2 a3 a4 a6 conductor [degphi]`, with `-` for an unknown
/// modular degree.
pub const BUILTIN_CURVE_TABLE: &str = "\
37a1 0 0 1 -1 0 37 2
11a1 0 -1 1 -10 -20 11 1
14a1 1 0 1 4 -6 14 1
15a1 1 1 1 -10 -10 15 1
";

/// Parse one curve-table record.
pub fn parse_curve_line(line: &str) -> Result<CurveModel> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 7 && fields.len() != 8 {
        return Err(Error::Domain(format!(
            "curve record needs 7 or 8 fields, got {}: {line:?}",
            fields.len()
        )));
    }
    let num = |s: &str| -> Result<i64> {
        s.parse()
            .map_err(|_| Error::Domain(format!("bad integer {s:?} in curve record")))
    };
    let a = [
        num(fields[1])?,
        num(fields[2])?,
        num(fields[3])?,
        num(fields[4])?,
        num(fields[5])?,
    ];
    let conductor = num(fields[6])?;
    if conductor <= 0 {
        return Err(Error::Domain("conductor must be positive".into()));
    }
    let deg_phi = match fields.get(7) {
        None | Some(&"-") => None,
        Some(s) => {
            let v = num(s)?;
            if v <= 0 {
                return Err(Error::Domain("modular degree must be positive".into()));
            }
            Some(v as u64)
        }
    };
    CurveModel::new(fields[0], a, conductor as u64, deg_phi)
}

/// Parse a whole table; blank lines and lines starting with '#' are
/// skipped.
pub fn parse_curve_table(text: &str) -> Result<Vec<CurveModel>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_curve_line(line)?);
    }
    Ok(out)
}

/// The built-in curves.
pub fn builtin_curves() -> Vec<CurveModel> {
    parse_curve_table(BUILTIN_CURVE_TABLE).expect("built-in table parses")
}

/// Look a curve up by label in the built-in table.
pub fn builtin_curve(label: &str) -> Result<CurveModel> {
    builtin_curves()
        .into_iter()
        .find(|c| c.label == label)
        .ok_or_else(|| Error::Domain(format!("no built-in curve labeled {label}")))
}
