//! Dedekind eta and the first Kronecker limit formula.
//!
//! eta(z) = q^(1/24) prod (1 - q^n), q = exp(2 pi i z), computed through
//! the pentagonal number series
//!
//!     prod (1 - q^n) = sum_k (-1)^k q^(k(3k-1)/2),  k over all integers,
//!
//! after reducing z to the standard fundamental domain with the exact
//! transformation behavior eta(z + 1) = exp(i pi / 12) eta(z) and
//! eta(-1/z) = sqrt(-i z) eta(z). The quantity Im(z) |eta(z)|^4 is
//! invariant under all of SL_2(Z), which the tests verify directly.
//!
//! The limit formula ties the eta values at the CM points of discriminant
//! D to the L-data: averaging over the reduced forms A of discriminant D,
//!
//!     -(1/h) sum_A log( Im(z_A) |eta(z_A)|^4 ) = script_L_D + log 2 - gamma,
//!
//! with script_L_D = (1/2) log|D| + L'(1, chi_D)/L(1, chi_D) as computed by
//! the dirichlet_l module. Both sides are produced by entirely disjoint
//! code paths (theta-completed L-sums on one side, eta products at CM
//! points on the other), so the residual is a sharp end-to-end check.

use rug::ops::Pow;
use rug::{Complex, Float};

use crate::dirichlet_l::l_report;
use crate::error::{Error, Result};
use crate::numeric::{euler_gamma, pi, GUARD};
use crate::quadclass::reduced_forms;

/// Both sides of the limit formula for one discriminant.
#[derive(Debug, Clone)]
pub struct KroneckerLimitReport {
    pub d: i64,
    pub precision_bits: u32,
    /// -(1/h) sum_A log(Im z_A |eta(z_A)|^4), the eta side.
    pub lhs: Float,
    /// script L_D + log 2 - gamma, the L-function side.
    pub rhs: Float,
    /// |lhs - rhs|.
    pub residual: Float,
    /// Rigorous allowance: the L-side error bound plus eta-side roundoff.
    pub bound: Float,
}

fn require_upper_half(z: &Complex) -> Result<()> {
    if z.imag().is_sign_positive() && !z.imag().is_zero() && z.imag().is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("z = {z} is not in the upper half plane")))
    }
}

/// eta(z) by the pentagonal series without any modular reduction.
/// Practical when Im(z) is not small; the term count grows like
/// sqrt(prec / Im z).
pub fn eta_series(z: &Complex, prec: u32) -> Result<Complex> {
    require_upper_half(z)?;
    let wp = prec + GUARD;
    let y = z.imag().to_f64();
    let need = (prec as f64 + 16.0) * std::f64::consts::LN_2;
    // Pentagonal exponents reach k(3k-1)/2; demand 2 pi y * (3k^2/2) >= need.
    let kmax = (need / (3.0 * std::f64::consts::PI * y)).sqrt().ceil() as i64 + 2;
    if kmax > 1_000_000 {
        return Err(Error::Precision(format!(
            "eta series needs {kmax} terms at Im z = {y}; reduce first"
        )));
    }
    let zw = Complex::with_val(wp, z);
    let two_pi_i_z = Complex::with_val(wp, (0, 1)) * &zw * pi(wp) * 2u32;
    let q = two_pi_i_z.clone().exp();
    let mut sum = Complex::with_val(wp, 1);
    for k in 1..=kmax {
        // Exponents k(3k-1)/2 for k and k(3k+1)/2 for -k share the sign (-1)^k.
        let e1 = (k * (3 * k - 1) / 2) as u32;
        let e2 = (k * (3 * k + 1) / 2) as u32;
        let term = q.clone().pow(e1) + q.clone().pow(e2);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
    }
    // q^(1/24) = exp(2 pi i z / 24), defined by z itself, not a root of q.
    let lead = (two_pi_i_z / 24u32).exp();
    Ok(Complex::with_val(prec + GUARD / 2, lead * sum))
}

/// eta(z) for any z in the upper half plane: reduce to the fundamental
/// domain with exact multiplier tracking, then sum the series there.
pub fn eta(z: &Complex, prec: u32) -> Result<Complex> {
    require_upper_half(z)?;
    let wp = prec + GUARD + 16;
    let mut w = Complex::with_val(wp, z);
    let mut mult = Complex::with_val(wp, 1);
    // Phase from the T-steps, tracked exactly as a multiple of i pi / 12.
    let mut phase = 0i64;
    let mut steps = 0u32;
    loop {
        steps += 1;
        if steps > 10_000 {
            return Err(Error::Inconsistent(format!(
                "modular reduction of {z} did not terminate"
            )));
        }
        let re = w.real().clone();
        let n = re.clone().round().to_integer().ok_or_else(|| {
            Error::Domain(format!("Re z = {re} too large to reduce"))
        })?;
        if n != 0 {
            // eta(w) = exp(i pi n / 12) eta(w - n).
            let nf = Float::with_val(wp, &n);
            w -= nf;
            let nm: i64 = (n % 24u32).to_i64().expect("reduced mod 24 fits");
            phase = (phase + nm).rem_euclid(24);
        }
        let norm = w.clone().norm();
        if norm.real() < &Float::with_val(wp, 0.99609375) {
            // |w| < 1 - 2^-8: invert. eta(w) = sqrt(-i w') eta(w'),
            // w' = -1/w.
            let wn = -w.clone().recip();
            mult *= wn.clone().mul_i(true).sqrt();
            w = wn;
            continue;
        }
        let re_ok = w.real().clone().abs() <= Float::with_val(wp, 0.5000001);
        if re_ok {
            break;
        }
    }
    // Apply the accumulated T phase: exp(i pi phase / 12).
    if phase != 0 {
        let ang = pi(wp) * Float::with_val(wp, phase) / 12u32;
        let (s, c) = ang.sin_cos(Float::new(wp));
        mult *= Complex::with_val(wp, (c, s));
    }
    let ser = eta_series(&w, prec + GUARD)?;
    Ok(Complex::with_val(prec + GUARD / 2, mult * ser))
}

/// log(Im z |eta(z)|^4), the SL_2(Z)-invariant logarithm.
pub fn log_eta_invariant(z: &Complex, prec: u32) -> Result<Float> {
    let e = eta(z, prec + 16)?;
    let wp = prec + GUARD;
    let n2 = Float::with_val(wp, e.norm_ref()); // |eta|^2
    if !n2.is_normal() {
        return Err(Error::Precision(format!("eta underflow at z = {z}")));
    }
    let y = Float::with_val(wp, z.imag());
    Ok(Float::with_val(prec, y.ln() + n2.ln() * 2u32))
}

/// Evaluate both sides of the limit formula at discriminant d.
pub fn kronecker_limit_check(d: i64, prec: u32) -> Result<KroneckerLimitReport> {
    let rep = l_report(d, prec)?;
    let wp = prec + GUARD;
    let forms = reduced_forms(d)?;
    let h = forms.len() as u32;
    let mut sum = Float::new(wp);
    for f in &forms {
        let z = f.root(wp);
        sum += log_eta_invariant(&z, prec + 16)?;
    }
    let lhs = -(sum / Float::with_val(wp, h));
    let ln2 = Float::with_val(wp, rug::float::Constant::Log2);
    let rhs = Float::with_val(wp, &rep.script_ld) + ln2 - euler_gamma(wp);
    let residual = (lhs.clone() - &rhs).abs();
    let bound = Float::with_val(wp, &rep.script_ld_err) + (Float::with_val(wp, h + 4) >> (prec - 4));
    Ok(KroneckerLimitReport {
        d,
        precision_bits: prec,
        lhs: Float::with_val(prec, lhs),
        rhs: Float::with_val(prec, rhs),
        residual: Float::with_val(prec, residual),
        bound: Float::with_val(prec, bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::abs_c;

    fn c(prec: u32, re: f64, im: f64) -> Complex {
        Complex::with_val(prec, (re, im))
    }

    #[test]
    fn eta_at_i_closed_form() {
        // eta(i) = Gamma(1/4) / (2 pi^(3/4)).
        let prec = 192;
        let z = c(prec, 0.0, 1.0);
        let via_series = eta_series(&z, prec).unwrap();
        let via_reduced = eta(&z, prec).unwrap();
        let wp = prec + 32;
        let expect = Float::with_val(wp, 0.25f64).gamma()
            / (pi(wp).ln() * Float::with_val(wp, 0.75f64)).exp()
            / 2u32;
        let tol = Float::with_val(64, 1) >> (prec - 16);
        let d1 = (Float::with_val(wp, via_series.real()) - &expect).abs();
        let d2 = (Float::with_val(wp, via_reduced.real()) - &expect).abs();
        assert!(d1 < tol, "series: {d1}");
        assert!(d2 < tol, "reduced: {d2}");
        assert!(via_series.imag().clone().abs() < tol);
        assert!(via_reduced.imag().clone().abs() < tol);
    }

    #[test]
    fn eta_inversion_identity() {
        // eta(-1/z) = sqrt(-i z) eta(z) at z = 1/4 + i/3, both sides via
        // the raw series only.
        let prec = 160;
        let wp = prec + 32;
        let z = Complex::with_val(wp, (Float::with_val(wp, 0.25), Float::with_val(wp, 1) / 3u32));
        let minus_inv = -z.clone().recip();
        let left = eta_series(&minus_inv, prec).unwrap();
        let right = z.clone().mul_i(true).sqrt() * eta_series(&z, prec).unwrap();
        let diff = abs_c(&(left - right), wp);
        assert!(diff < Float::with_val(64, 1) >> (prec - 16), "diff = {diff}");
    }

    #[test]
    fn eta_reduction_matches_series_at_low_imag() {
        // Points with small Im z, where eta() must reduce internally;
        // the raw series still converges there, just slowly.
        let prec = 128;
        let wp = prec + 64;
        let pts = [
            (0.9375f64, 0.0859375f64),
            (-2.71875, 0.1328125),
            (0.4609375, 0.23046875),
            (5.0390625, 0.26171875),
            (-0.015625, 0.075),
        ];
        for (x, y) in pts {
            let z = c(wp, x, y);
            let fast = eta(&z, prec).unwrap();
            let slow = eta_series(&z, prec + 32).unwrap();
            let diff = abs_c(&(fast - slow), wp);
            let tol = Float::with_val(64, 1) >> (prec - 12);
            assert!(diff < tol, "z = {x} + {y}i: diff = {diff}");
        }
    }

    #[test]
    fn eta_invariant_under_random_words() {
        // Im z |eta|^4 is SL_2(Z)-invariant. Apply pseudo-random T/S words.
        let prec = 128;
        let wp = prec + 32;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for trial in 0..24 {
            let x0 = (rng() % 2000) as f64 / 1000.0 - 1.0;
            let y0 = 0.3 + (rng() % 1500) as f64 / 1000.0;
            let z0 = c(wp, x0, y0);
            let base = log_eta_invariant(&z0, prec).unwrap();
            let mut z = z0.clone();
            for _ in 0..(rng() % 6 + 2) {
                if rng() % 2 == 0 {
                    let shift = (rng() % 9) as i64 - 4;
                    z += Float::with_val(wp, shift);
                } else {
                    z = -z.recip();
                }
            }
            let moved = log_eta_invariant(&z, prec).unwrap();
            let diff = (base - moved).abs();
            let tol = Float::with_val(64, 1) >> (prec - 20);
            assert!(diff < tol, "trial {trial}: diff = {diff}");
        }
    }

    #[test]
    fn limit_formula_exact_anchor_d_minus_4() {
        // h(-4) = 1, z = i, so the eta side is -log|eta(i)|^4
        // = log(16 pi^3) - 4 log Gamma(1/4), and the identity against the
        // L-side is the Chowla-Selberg evaluation; both sides computed.
        let prec = 160;
        let rep = kronecker_limit_check(-4, prec).unwrap();
        assert!(rep.residual < rep.bound, "residual {} vs bound {}", rep.residual, rep.bound);
        assert!(rep.residual < Float::with_val(64, 1) >> (prec - 24));
        let wp = prec + 32;
        let closed = (pi(wp).square() * pi(wp) * 16u32).ln()
            - Float::with_val(wp, 0.25f64).gamma().ln() * 4u32;
        let d = (Float::with_val(wp, &rep.lhs) - closed).abs();
        assert!(d < Float::with_val(64, 1) >> (prec - 24), "lhs vs closed form: {d}");
    }

    #[test]
    fn limit_formula_across_class_numbers() {
        // h = 1 (D = -163), h = 3 (D = -23), h = 1 (D = -7), h = 4 (D = -84),
        // h = 5 (D = -47): residual below 1e-25 at 128 bits.
        let prec = 128;
        for d in [-7i64, -23, -47, -84, -163] {
            let rep = kronecker_limit_check(d, prec).unwrap();
            assert!(
                rep.residual < rep.bound,
                "D = {d}: residual {} exceeds bound {}",
                rep.residual,
                rep.bound
            );
            assert!(
                rep.residual < Float::with_val(64, 1e-25),
                "D = {d}: residual {}",
                rep.residual
            );
        }
    }

    #[test]
    fn class_roots_live_in_fundamental_domain() {
        // Reduced form roots have Im >= sqrt(3)/2, so the series at the
        // reduced points needs only a handful of terms.
        for d in [-23i64, -84, -47] {
            for f in reduced_forms(d).unwrap() {
                let z = f.root(96);
                let y2 = z.imag().clone().square();
                assert!(y2.to_f64() >= 0.7499, "D = {d}");
            }
        }
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(eta(&c(64, 0.3, -1.0), 64).is_err());
        assert!(eta_series(&c(64, 0.3, 0.0), 64).is_err());
    }
}
