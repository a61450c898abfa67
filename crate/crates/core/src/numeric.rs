//! Shared numeric plumbing: cached transcendental constants, integer
//! helpers, a complex AGM, and working-precision conventions.
//!
//! Every public function in this crate that returns a `Float` or `Complex`
//! takes a `prec` argument meaning the precision of the *result* in bits.
//! Internally computations run at `prec` plus a guard margin so that the
//! final rounding error stays below `2^-prec` times the natural scale of
//! the quantity; the per-module documentation states the margin when it is
//! not the default [`GUARD`].

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use rug::ops::CompleteRound;
use rug::{Complex, Float, Integer};

use crate::error::{Error, Result};

/// Default guard bits added to working precision.
pub const GUARD: u32 = 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum ConstKey {
    Pi,
    Euler,
}

static CONST_CACHE: OnceLock<Mutex<HashMap<(ConstKey, u32), Float>>> = OnceLock::new();

fn cached_const(key: ConstKey, prec: u32) -> Float {
    let cache = CONST_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("constant cache poisoned");
    map.entry((key, prec))
        .or_insert_with(|| match key {
            ConstKey::Pi => Float::with_val(prec, rug::float::Constant::Pi),
            ConstKey::Euler => Float::with_val(prec, rug::float::Constant::Euler),
        })
        .clone()
}

/// pi at `prec` bits, cached per precision.
pub fn pi(prec: u32) -> Float {
    cached_const(ConstKey::Pi, prec)
}

/// The Euler-Mascheroni constant gamma at `prec` bits, cached per precision.
pub fn euler_gamma(prec: u32) -> Float {
    cached_const(ConstKey::Euler, prec)
}

/// Kronecker symbol (a/n), defined for all integers, zero when gcd > 1.
pub fn kronecker(a: i64, n: i64) -> i32 {
    Integer::from(a).kronecker(&Integer::from(n))
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    assert!(n != 0 && p >= 2);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Floor of the square root of a nonnegative i64, exact.
pub fn isqrt(n: i64) -> i64 {
    assert!(n >= 0);
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r > 0 && r.checked_mul(r).map_or(true, |rr| rr > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |rr| rr <= n) {
        r += 1;
    }
    r
}

/// Trial-division factorization, smallest prime first.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut v = 0;
            while n % p == 0 {
                n /= p;
                v += 1;
            }
            out.push((p, v));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Distinct prime divisors of n >= 1.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

/// Simple sieve of Eratosthenes, primes <= n ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut is_p = vec![true; n + 1];
    is_p[0] = false;
    is_p[1] = false;
    let mut p = 2;
    while p * p <= n {
        if is_p[p] {
            let mut m = p * p;
            while m <= n {
                is_p[m] = false;
                m += p;
            }
        }
        p += 1;
    }
    (2..=n).filter(|&i| is_p[i]).map(|i| i as u64).collect()
}

/// Index of Gamma_0(N) in SL_2(Z): N times the product of (1 + 1/p) over
/// primes p | N, always an integer.
pub fn gamma0_index(n: u64) -> u64 {
    assert!(n >= 1);
    let mut idx = n;
    for p in prime_divisors(n) {
        idx = idx / p * (p + 1);
    }
    idx
}

/// Complex arithmetic-geometric mean with the optimal branch choice:
/// at each step the square root sign is fixed by |a - g| <= |a + g|.
/// Both inputs must be nonzero. The iteration converges quadratically;
/// failure to converge within the iteration budget is a precision error.
pub fn complex_agm(a0: &Complex, b0: &Complex, prec: u32) -> Result<Complex> {
    let wp = prec + GUARD;
    let mut a = Complex::with_val(wp, a0);
    let mut b = Complex::with_val(wp, b0);
    if is_zero_c(&a) || is_zero_c(&b) {
        return Err(Error::Domain("complex_agm: zero argument".into()));
    }
    let budget = 12 + 2 * (32 - (wp.leading_zeros().min(31))) as usize;
    for _ in 0..budget {
        let diff = (&a - &b).complete((wp, wp));
        let scale = abs_c(&a, wp);
        if abs_c(&diff, wp) <= scale >> (prec + GUARD / 2) {
            return Ok(Complex::with_val(prec, &a));
        }
        let am = (&a + &b).complete((wp, wp)) >> 1u32;
        let mut gm = (&a * &b).complete((wp, wp)).sqrt();
        let plus = (&am + &gm).complete((wp, wp));
        let minus = (&am - &gm).complete((wp, wp));
        if abs_c(&minus, wp) > abs_c(&plus, wp) {
            gm = -gm;
        }
        a = am;
        b = gm;
    }
    Err(Error::Precision("complex_agm did not converge".into()))
}

/// |z| as a real Float at `prec` bits.
pub fn abs_c(z: &Complex, prec: u32) -> Float {
    let mut re = Float::with_val(prec, z.real());
    let im = Float::with_val(prec, z.imag());
    re.square_mut();
    re += im.square();
    re.sqrt()
}

fn is_zero_c(z: &Complex) -> bool {
    z.real().is_zero() && z.imag().is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isqrt_exact_on_squares_and_neighbors() {
        for n in 0..2000i64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "n={n}");
        }
        assert_eq!(isqrt(i64::MAX), 3037000499);
    }

    #[test]
    fn factor_roundtrip() {
        for n in 1..2000u64 {
            let f = factor(n);
            let back: u64 = f.iter().map(|&(p, v)| p.pow(v)).product();
            assert_eq!(back, n);
            for w in f.windows(2) {
                assert!(w[0].0 < w[1].0);
            }
        }
    }

    #[test]
    fn gamma0_index_small_levels() {
        assert_eq!(gamma0_index(1), 1);
        assert_eq!(gamma0_index(2), 3);
        assert_eq!(gamma0_index(4), 6);
        assert_eq!(gamma0_index(37), 38);
        assert_eq!(gamma0_index(14), 24);
        assert_eq!(gamma0_index(15), 24);
    }

    #[test]
    fn kronecker_matches_legendre_for_odd_primes() {
        // Oracle: Legendre symbol by explicit squaring over F_p.
        for &p in &[3i64, 5, 7, 11, 13, 37] {
            let mut squares = vec![false; p as usize];
            for x in 0..p {
                squares[((x * x) % p) as usize] = true;
            }
            for a in -2 * p..2 * p {
                let r = a.rem_euclid(p);
                let expect = if r == 0 {
                    0
                } else if squares[r as usize] {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(a, p), expect, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn real_agm_matches_float_agm() {
        let prec = 128;
        let a = Complex::with_val(prec, (6, 0));
        let b = Complex::with_val(prec, (1.5f64, 0));
        let m = complex_agm(&a, &b, prec).unwrap();
        let fa = Float::with_val(prec, 6);
        let fb = Float::with_val(prec, 1.5f64);
        let fm = fa.agm(&fb);
        let diff = (Float::with_val(prec, m.real()) - &fm).abs();
        assert!(diff < Float::with_val(prec, 1e-30), "diff={diff}");
        assert!(Float::with_val(prec, m.imag()).is_zero());
    }

    #[test]
    fn lemniscatic_agm_value() {
        // AGM(sqrt(2), 1) relates to the lemniscate period:
        // pi / AGM(sqrt(2), 1) = 2.62205755429211981...
        let prec = 192;
        let a = Complex::with_val(prec, Float::with_val(prec, 2).sqrt());
        let b = Complex::with_val(prec, 1);
        let m = complex_agm(&a, &b, prec).unwrap();
        let val = pi(prec) / Float::with_val(prec, m.real());
        let expect = Float::parse("2.6220575542921198104648395898911194136827549514316")
            .unwrap()
            .complete(prec);
        let diff = (val - expect).abs();
        assert!(diff < Float::with_val(prec, 1e-45), "diff={diff}");
    }
}
