//! Local root numbers, the global sign of the twisted functional
//! equation, and the combinatorial level data attached to a curve and an
//! imaginary quadratic field.
//!
//! For a curve of conductor N and a fundamental discriminant D < 0, the
//! base change of the curve's L-function to Q(sqrt(D)), twisted by a ring
//! class character, has a functional equation whose sign factors over
//! places of Q. The archimedean factor is -1, and the factor at a prime
//! not dividing N D is +1, so the sign is a finite product.
//!
//! The finite factors computed here, for a prime p:
//!
//! - p not dividing N D: +1.
//! - p | N, p not dividing D: chi_D(p)^(v_p(N)), the unramified quadratic
//!   character of the field through the p-part of the level.
//! - p | D, p not dividing N: +1.
//! - p | D and p exactly dividing N: -a_p, which is -1 for split and +1
//!   for nonsplit multiplicative reduction.
//! - p | D and p^2 | N: outside this table; reported as unavailable, and
//!   every consumer propagates that honestly instead of guessing.
//!
//! Three identities tie the module together and are enforced by tests:
//! the product of local factors equals the closed form
//! -chi_D(N') * prod(-a_p) over primes of joint ramification (N' the
//! prime-to-D part of N); the split condition (every p | N split in the
//! field) forces sign -1; and the level datum built from the same local
//! analysis satisfies its parity condition exactly when the sign is -1.
//!
//! The level datum (N1, N2, (K_p)) records, for each prime of the level,
//! which side of a quaternionic dichotomy the prime falls on and the
//! isomorphism class of the local quadratic algebra K_p = K (x) Q_p. The
//! ramified side N2 collects the primes where the local factor, corrected
//! by the unit character value chi_{D,p}(-1), is -1: inert primes with
//! odd exponent, and joint primes with split multiplicative reduction.

use std::collections::BTreeMap;

use crate::dirichlet_l::chi;
use crate::elliptic_curve::CurveModel;
use crate::numeric::{factor, prime_divisors, valuation};
use crate::quadclass::is_fundamental;
use crate::{Error, Result};

/// A place of the rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Infinite,
    Finite(u64),
}

/// How a local factor was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonSource {
    /// The archimedean factor, always -1.
    Archimedean,
    /// A prime away from both the level and the discriminant, always +1.
    Unramified,
    /// The finite table of low-ramification cases.
    Table,
    /// Joint high ramification (p | D with p^2 | N), outside the table.
    Unavailable,
}

/// One local factor of the global sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalEpsilon {
    pub place: Place,
    /// +1 or -1; None exactly when the source is `Unavailable`.
    pub value: Option<i8>,
    pub source: EpsilonSource,
}

/// The isomorphism class of a quadratic etale algebra over Q_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalExt {
    /// Q_p + Q_p.
    Split,
    /// The unramified quadratic field extension.
    Unramified,
    /// A ramified quadratic extension, tagged by square class: 0..=1 at
    /// odd p, 0..=5 at p = 2 (see `ramified_tag`).
    Ramified(u8),
}

/// Level datum: two coprime level parts and the local quadratic algebra
/// at every prime of the level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShimuraDatum {
    pub n1: u64,
    pub n2: u64,
    pub local_ext: BTreeMap<u64, LocalExt>,
}

/// A single failed requirement of a level datum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatumViolation {
    /// The two level parts share a prime factor.
    SharedFactor,
    /// No local algebra recorded at a prime of the level.
    MissingExtension(u64),
    /// A local algebra recorded at a prime outside the level.
    ExtraExtension(u64),
    /// A split algebra under the ramified part, which must be a field.
    SplitInRamifiedPart(u64),
    /// The ramified part has an odd number of prime factors.
    OddRamifiedSupport,
    /// An unramified field under the ramified part with even exponent.
    UnramifiedEvenInRamifiedPart(u64),
    /// An unramified field under the split part with odd exponent.
    UnramifiedOddInSplitPart(u64),
}

impl std::fmt::Display for DatumViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatumViolation::SharedFactor => {
                write!(f, "the two level parts share a prime factor")
            }
            DatumViolation::MissingExtension(p) => {
                write!(f, "no local algebra recorded at {p}")
            }
            DatumViolation::ExtraExtension(p) => {
                write!(f, "local algebra recorded at {p}, which is not in the level")
            }
            DatumViolation::SplitInRamifiedPart(p) => {
                write!(f, "the algebra at {p} must be a field on the ramified side")
            }
            DatumViolation::OddRamifiedSupport => {
                write!(f, "the ramified part must have an even number of prime factors")
            }
            DatumViolation::UnramifiedEvenInRamifiedPart(p) => {
                write!(f, "unramified {p} on the ramified side needs odd multiplicity")
            }
            DatumViolation::UnramifiedOddInSplitPart(p) => {
                write!(f, "unramified {p} on the split side needs even multiplicity")
            }
        }
    }
}

/// Outcome of validating a level datum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatumCheck {
    pub violations: Vec<DatumViolation>,
}

impl DatumCheck {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn validate_disc(d: i64) -> Result<()> {
    if d >= 0 || !is_fundamental(d) {
        return Err(Error::Domain(format!(
            "{d} is not a negative fundamental discriminant"
        )));
    }
    Ok(())
}

fn is_prime(p: u64) -> bool {
    p >= 2 && factor(p) == vec![(p, 1)]
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// The multiplicative a_p of a curve at a prime exactly dividing its
/// conductor, checked to be +1 or -1.
fn multiplicative_ap(e: &CurveModel, p: u64) -> Result<i64> {
    let ap = e.ap(p)?;
    if ap != 1 && ap != -1 {
        return Err(Error::Inconsistent(format!(
            "curve {} must have multiplicative reduction at {p}, got a_p = {ap}",
            e.label
        )));
    }
    Ok(ap)
}

/// The local quadratic character of Q(sqrt(d)) evaluated at -1. It is +1
/// away from the discriminant. At an odd prime p | d it is the residue
/// symbol of -1, so the sign of p mod 4; at p = 2 | d it reads off the
/// odd part of d mod 4.
pub fn chi_local_minus_one(d: i64, p: u64) -> i32 {
    if p == 2 {
        if d % 2 != 0 {
            return 1;
        }
        let u = d >> d.trailing_zeros();
        if u.rem_euclid(4) == 1 {
            1
        } else {
            -1
        }
    } else if d.rem_euclid(p as i64) != 0 {
        1
    } else if p % 4 == 1 {
        1
    } else {
        -1
    }
}

/// The local factor of the sign at one place, per the table in the
/// module documentation.
pub fn local_epsilon(e: &CurveModel, d: i64, place: Place) -> Result<LocalEpsilon> {
    validate_disc(d)?;
    let p = match place {
        Place::Infinite => {
            return Ok(LocalEpsilon {
                place,
                value: Some(-1),
                source: EpsilonSource::Archimedean,
            });
        }
        Place::Finite(p) => p,
    };
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let vn = valuation(e.conductor, p);
    let divides_d = d.rem_euclid(p as i64) == 0;
    let (value, source) = if vn == 0 && !divides_d {
        (Some(1), EpsilonSource::Unramified)
    } else if !divides_d {
        // The field is unramified at p, so the factor only sees the
        // p-part of the level, one unramified character value per
        // exponent.
        let v = if vn % 2 == 0 {
            1
        } else {
            chi(d, p as i64) as i8
        };
        (Some(v), EpsilonSource::Table)
    } else if vn == 0 {
        (Some(1), EpsilonSource::Table)
    } else if vn == 1 {
        (Some(-multiplicative_ap(e, p)? as i8), EpsilonSource::Table)
    } else {
        (None, EpsilonSource::Unavailable)
    };
    Ok(LocalEpsilon {
        place,
        value,
        source,
    })
}

/// The global sign by the closed form -chi_D(N') * prod(-a_p), where N'
/// is the prime-to-D part of the conductor and the product runs over
/// primes dividing both the conductor and the discriminant. Requires the
/// square part of the conductor to be coprime to the discriminant.
pub fn global_sign(e: &CurveModel, d: i64) -> Result<i8> {
    validate_disc(d)?;
    let mut sign = -1i64;
    let mut n_coprime = e.conductor;
    for (p, v) in factor(e.conductor) {
        if d.rem_euclid(p as i64) == 0 {
            if v > 1 {
                return Err(Error::Unavailable(format!(
                    "sign of ({}, {d}): the square part of the level meets the discriminant at {p}",
                    e.label
                )));
            }
            sign *= -multiplicative_ap(e, p)?;
            n_coprime /= p;
        }
    }
    sign *= chi(d, n_coprime as i64) as i64;
    Ok(sign as i8)
}

/// The global sign as the product of all local factors. An independent
/// route to `global_sign`; the two must agree wherever both are defined.
pub fn sign_from_local_product(e: &CurveModel, d: i64) -> Result<i8> {
    validate_disc(d)?;
    let mut sign = -1i64;
    let mut primes = prime_divisors(e.conductor);
    for p in prime_divisors(d.unsigned_abs()) {
        if !primes.contains(&p) {
            primes.push(p);
        }
    }
    for p in primes {
        let eps = local_epsilon(e, d, Place::Finite(p))?;
        match eps.value {
            Some(v) => sign *= v as i64,
            None => {
                return Err(Error::Unavailable(format!(
                    "local factor of ({}, {d}) at {p} is outside the table",
                    e.label
                )));
            }
        }
    }
    Ok(sign as i8)
}

/// The square-class tag of the ramified quadratic algebra K (x) Q_p for
/// p | d. At odd p the class is decided by whether the prime-to-p part
/// of d is a residue mod p (tag 0) or not (tag 1). At p = 2 the six
/// ramified classes are keyed by d/4: odd parts 3 and 7 mod 8 give tags
/// 0 and 1, even parts give 2..=5 by their odd part mod 8.
fn ramified_tag(d: i64, p: u64) -> Result<u8> {
    if p == 2 {
        let m = d.div_euclid(4);
        let tag = if m % 2 != 0 {
            match m.rem_euclid(8) {
                3 => 0,
                7 => 1,
                _ => {
                    return Err(Error::Inconsistent(format!(
                        "{d} is not ramified at 2 in the expected way"
                    )));
                }
            }
        } else {
            match (m / 2).rem_euclid(8) {
                1 => 2,
                3 => 3,
                5 => 4,
                7 => 5,
                _ => {
                    return Err(Error::Inconsistent(format!(
                        "{d} is not ramified at 2 in the expected way"
                    )));
                }
            }
        };
        Ok(tag)
    } else {
        let u = d / p as i64;
        Ok(if chi(u.rem_euclid(p as i64), p as i64) == 1 {
            0
        } else {
            1
        })
    }
}

/// Build the level datum of (curve, discriminant): each prime power of
/// the conductor lands on the split side N1 or the ramified side N2 by
/// the local dichotomy, and carries the class of K (x) Q_p.
pub fn construct_datum(e: &CurveModel, d: i64) -> Result<ShimuraDatum> {
    validate_disc(d)?;
    let mut n1 = 1u64;
    let mut n2 = 1u64;
    let mut local_ext = BTreeMap::new();
    for (p, v) in factor(e.conductor) {
        let pv = p.pow(v);
        if d.rem_euclid(p as i64) == 0 {
            if v > 1 {
                return Err(Error::Unavailable(format!(
                    "datum of ({}, {d}): joint ramification at {p} is too deep",
                    e.label
                )));
            }
            local_ext.insert(p, LocalExt::Ramified(ramified_tag(d, p)?));
            if multiplicative_ap(e, p)? == 1 {
                n2 *= pv;
            } else {
                n1 *= pv;
            }
        } else if chi(d, p as i64) == 1 {
            local_ext.insert(p, LocalExt::Split);
            n1 *= pv;
        } else {
            local_ext.insert(p, LocalExt::Unramified);
            if v % 2 == 1 {
                n2 *= pv;
            } else {
                n1 *= pv;
            }
        }
    }
    Ok(ShimuraDatum { n1, n2, local_ext })
}

/// Check every requirement of a level datum and report what fails.
pub fn validate_datum(datum: &ShimuraDatum) -> DatumCheck {
    let mut violations = Vec::new();
    if datum.n1 == 0 || datum.n2 == 0 {
        return DatumCheck {
            violations: vec![DatumViolation::SharedFactor],
        };
    }
    if gcd_u64(datum.n1, datum.n2) != 1 {
        violations.push(DatumViolation::SharedFactor);
    }
    let level = datum.n1.saturating_mul(datum.n2);
    let level_primes = prime_divisors(level);
    for &p in &level_primes {
        if !datum.local_ext.contains_key(&p) {
            violations.push(DatumViolation::MissingExtension(p));
        }
    }
    for (&p, ext) in &datum.local_ext {
        if level % p != 0 {
            violations.push(DatumViolation::ExtraExtension(p));
            continue;
        }
        if datum.n2 % p == 0 {
            match ext {
                LocalExt::Split => violations.push(DatumViolation::SplitInRamifiedPart(p)),
                LocalExt::Unramified => {
                    if valuation(datum.n2, p) % 2 == 0 {
                        violations.push(DatumViolation::UnramifiedEvenInRamifiedPart(p));
                    }
                }
                LocalExt::Ramified(_) => {}
            }
        } else if *ext == LocalExt::Unramified && valuation(datum.n1, p) % 2 == 1 {
            violations.push(DatumViolation::UnramifiedOddInSplitPart(p));
        }
    }
    if prime_divisors(datum.n2).len() % 2 == 1 {
        violations.push(DatumViolation::OddRamifiedSupport);
    }
    DatumCheck { violations }
}

/// Count all valid level data of level n: every split of each prime
/// power onto the two sides, with every admissible local algebra class.
/// The count is at most 15 * 7^(number of prime factors).
pub fn count_data(n: u64) -> Result<u64> {
    if n == 0 || n > 10_000 {
        return Err(Error::Domain(
            "datum counting is supported for levels 1..=10000".into(),
        ));
    }
    // Per prime power: choices on the split side are one split class,
    // the unramified class when the exponent is even, and all ramified
    // classes; on the ramified side the unramified class when the
    // exponent is odd, and all ramified classes. The parity condition
    // keeps assignments with evenly many primes on the ramified side.
    let mut even = 1u64;
    let mut odd = 0u64;
    for (p, v) in factor(n) {
        let ram = if p == 2 { 6 } else { 2 };
        let s1 = 1 + u64::from(v % 2 == 0) + ram;
        let s2 = u64::from(v % 2 == 1) + ram;
        let next_even = even * s1 + odd * s2;
        let next_odd = even * s2 + odd * s1;
        even = next_even;
        odd = next_odd;
    }
    Ok(even)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic_curve::builtin_curve;
    use crate::quadclass::fundamental_discs;

    #[test]
    fn archimedean_and_faraway_factors() {
        let e = builtin_curve("37a1").unwrap();
        let inf = local_epsilon(&e, -7, Place::Infinite).unwrap();
        assert_eq!(inf.value, Some(-1));
        assert_eq!(inf.source, EpsilonSource::Archimedean);
        for p in [3, 5, 11, 101] {
            let eps = local_epsilon(&e, -7, Place::Finite(p)).unwrap();
            assert_eq!(eps.value, Some(1));
            assert_eq!(eps.source, EpsilonSource::Unramified);
        }
        assert!(local_epsilon(&e, -7, Place::Finite(6)).is_err());
        assert!(local_epsilon(&e, -5, Place::Infinite).is_err());
        assert!(local_epsilon(&e, 5, Place::Infinite).is_err());
    }

    #[test]
    fn table_factors_match_hand_values() {
        // At the level prime away from the discriminant the factor is
        // the residue symbol: chi_{-7}(37) = +1 and chi_{-23}(11) = -1.
        let e37 = builtin_curve("37a1").unwrap();
        let eps = local_epsilon(&e37, -7, Place::Finite(37)).unwrap();
        assert_eq!(eps.value, Some(1));
        assert_eq!(eps.source, EpsilonSource::Table);
        let e11 = builtin_curve("11a1").unwrap();
        let eps = local_epsilon(&e11, -23, Place::Finite(11)).unwrap();
        assert_eq!(eps.value, Some(-1));
        // At a discriminant prime away from the level the factor is +1.
        let eps = local_epsilon(&e37, -7, Place::Finite(7)).unwrap();
        assert_eq!(eps.value, Some(1));
        assert_eq!(eps.source, EpsilonSource::Table);
        // Joint multiplicative ramification picks up -a_p.
        let e14 = builtin_curve("14a1").unwrap();
        let a7 = e14.ap(7).unwrap();
        assert!(a7 == 1 || a7 == -1);
        let eps = local_epsilon(&e14, -7, Place::Finite(7)).unwrap();
        assert_eq!(eps.value, Some(-a7 as i8));
    }

    #[test]
    fn unit_character_values_at_minus_one() {
        // Away from the discriminant the unit value is +1; at odd p | d
        // it is the quadratic residue symbol of -1.
        assert_eq!(chi_local_minus_one(-7, 3), 1);
        assert_eq!(chi_local_minus_one(-7, 7), -1);
        assert_eq!(chi_local_minus_one(-15, 5), 1);
        assert_eq!(chi_local_minus_one(-15, 3), -1);
        // d = -4: odd part -1 is 3 mod 4; d = -8: odd part -1 again.
        assert_eq!(chi_local_minus_one(-4, 2), -1);
        assert_eq!(chi_local_minus_one(-8, 2), -1);
        assert_eq!(chi_local_minus_one(-7, 2), 1);
        // Product over ramified primes of chi_{D,p}(-1) is -1 for every
        // negative fundamental discriminant: the archimedean value is -1
        // and the full product over all places is +1.
        for d in fundamental_discs(-400, -3) {
            let mut prod = 1i64;
            for p in prime_divisors(d.unsigned_abs()) {
                prod *= chi_local_minus_one(d, p) as i64;
            }
            assert_eq!(prod, -1, "unit character product at d = {d}");
        }
    }

    #[test]
    fn local_product_agrees_with_the_closed_form() {
        // Two independent routes to the sign: the product of the local
        // table over all places, and the closed form through the
        // residue symbol of the prime-to-d part of the conductor.
        for label in ["37a1", "11a1", "14a1", "15a1"] {
            let e = builtin_curve(label).unwrap();
            for d in fundamental_discs(-300, -3) {
                let a = global_sign(&e, d).unwrap();
                let b = sign_from_local_product(&e, d).unwrap();
                assert_eq!(a, b, "sign routes disagree for {label}, d = {d}");
                assert!(a == 1 || a == -1);
            }
        }
    }

    #[test]
    fn split_condition_forces_sign_minus_one() {
        use crate::heegner_points::heegner_condition;
        let mut seen = 0;
        for label in ["37a1", "11a1", "14a1", "15a1"] {
            let e = builtin_curve(label).unwrap();
            for d in fundamental_discs(-400, -3) {
                if heegner_condition(e.conductor, d).unwrap() {
                    assert_eq!(global_sign(&e, d).unwrap(), -1, "{label}, d = {d}");
                    seen += 1;
                }
            }
        }
        assert!(seen > 50, "the sweep should hit many split discriminants");
    }

    #[test]
    fn coprime_case_reduces_to_the_residue_symbol() {
        let e = builtin_curve("37a1").unwrap();
        for d in fundamental_discs(-200, -3) {
            if d.rem_euclid(37) != 0 {
                assert_eq!(global_sign(&e, d).unwrap() as i32, -chi(d, 37));
            }
        }
        // chi_{-3}(37) = +1 since 37 is 1 mod 3, so the sign is -1.
        assert_eq!(global_sign(&e, -3).unwrap(), -1);
        // chi_{-23}(11) = -1, an example of the +1 branch.
        let e11 = builtin_curve("11a1").unwrap();
        assert_eq!(global_sign(&e11, -23).unwrap(), 1);
    }

    #[test]
    fn split_discriminants_build_the_level_one_sided_datum() {
        let e = builtin_curve("37a1").unwrap();
        let datum = construct_datum(&e, -7).unwrap();
        assert_eq!(datum.n1, 37);
        assert_eq!(datum.n2, 1);
        assert_eq!(datum.local_ext.get(&37), Some(&LocalExt::Split));
        assert!(validate_datum(&datum).valid());
        // -31 is 1 mod 8 and a residue mod 7, so both primes of 14 split.
        let e14 = builtin_curve("14a1").unwrap();
        let datum = construct_datum(&e14, -31).unwrap();
        assert_eq!((datum.n1, datum.n2), (14, 1));
        assert!(validate_datum(&datum).valid());
    }

    #[test]
    fn inert_prime_lands_on_the_ramified_side() {
        // chi_{-23}(11) = -1: the lone level prime is inert, the datum
        // puts it on the ramified side with odd exponent, and the parity
        // requirement fails exactly because the sign is +1.
        let e = builtin_curve("11a1").unwrap();
        let datum = construct_datum(&e, -23).unwrap();
        assert_eq!((datum.n1, datum.n2), (1, 11));
        assert_eq!(datum.local_ext.get(&11), Some(&LocalExt::Unramified));
        let check = validate_datum(&datum);
        assert_eq!(check.violations, vec![DatumViolation::OddRamifiedSupport]);
    }

    #[test]
    fn datum_parity_is_equivalent_to_sign_minus_one() {
        // The central cross-check: over every fixture and discriminant,
        // the constructed datum satisfies all structural requirements,
        // and its parity requirement holds exactly when the sign is -1.
        for label in ["37a1", "11a1", "14a1", "15a1"] {
            let e = builtin_curve(label).unwrap();
            for d in fundamental_discs(-300, -3) {
                let datum = construct_datum(&e, d).unwrap();
                assert_eq!(datum.n1 * datum.n2, e.conductor);
                let check = validate_datum(&datum);
                let sign = global_sign(&e, d).unwrap();
                let structural: Vec<_> = check
                    .violations
                    .iter()
                    .filter(|v| **v != DatumViolation::OddRamifiedSupport)
                    .collect();
                assert!(
                    structural.is_empty(),
                    "structural violation for {label}, d = {d}: {structural:?}"
                );
                assert_eq!(
                    check.valid(),
                    sign == -1,
                    "parity mismatch for {label}, d = {d}"
                );
            }
        }
    }

    #[test]
    fn joint_deep_ramification_is_unavailable() {
        // Conductor 49 with d = -7: the prime divides the discriminant
        // and its square divides the level, which is outside the table.
        let e = CurveModel::new("49a1", [1, -1, 0, -2, -1], 49, None).unwrap();
        let eps = local_epsilon(&e, -7, Place::Finite(7)).unwrap();
        assert_eq!(eps.value, None);
        assert_eq!(eps.source, EpsilonSource::Unavailable);
        assert!(matches!(global_sign(&e, -7), Err(Error::Unavailable(_))));
        assert!(matches!(
            sign_from_local_product(&e, -7),
            Err(Error::Unavailable(_))
        ));
        assert!(matches!(construct_datum(&e, -7), Err(Error::Unavailable(_))));
        // The same curve with a discriminant away from 7 works fine.
        assert!(global_sign(&e, -3).is_ok());
    }

    #[test]
    fn datum_validation_reports_each_requirement() {
        let mut ext = BTreeMap::new();
        ext.insert(11, LocalExt::Split);
        let datum = ShimuraDatum {
            n1: 1,
            n2: 11,
            local_ext: ext.clone(),
        };
        let check = validate_datum(&datum);
        assert!(check.violations.contains(&DatumViolation::SplitInRamifiedPart(11)));
        assert!(check.violations.contains(&DatumViolation::OddRamifiedSupport));
        ext.insert(11, LocalExt::Unramified);
        let datum = ShimuraDatum {
            n1: 11,
            n2: 1,
            local_ext: ext,
        };
        let check = validate_datum(&datum);
        assert_eq!(
            check.violations,
            vec![DatumViolation::UnramifiedOddInSplitPart(11)]
        );
        let datum = ShimuraDatum {
            n1: 6,
            n2: 2,
            local_ext: BTreeMap::new(),
        };
        let check = validate_datum(&datum);
        assert!(check.violations.contains(&DatumViolation::SharedFactor));
        assert!(check.violations.contains(&DatumViolation::MissingExtension(2)));
        let mut ext = BTreeMap::new();
        ext.insert(5, LocalExt::Split);
        let datum = ShimuraDatum {
            n1: 3,
            n2: 1,
            local_ext: ext,
        };
        let check = validate_datum(&datum);
        assert!(check.violations.contains(&DatumViolation::ExtraExtension(5)));
        assert!(check.violations.contains(&DatumViolation::MissingExtension(3)));
    }

    /// Brute-force datum count: every assignment of side and local
    /// class, checked through `validate_datum` one by one.
    fn count_by_enumeration(n: u64) -> u64 {
        let pows = factor(n);
        let mut count = 0u64;
        // Each prime gets an option index: side 1 or 2 crossed with the
        // local classes Split, Unramified, Ramified(0..ram).
        let options: Vec<Vec<(bool, LocalExt)>> = pows
            .iter()
            .map(|&(p, _)| {
                let ram = if p == 2 { 6 } else { 2 };
                let mut opts = Vec::new();
                for side2 in [false, true] {
                    opts.push((side2, LocalExt::Split));
                    opts.push((side2, LocalExt::Unramified));
                    for t in 0..ram {
                        opts.push((side2, LocalExt::Ramified(t)));
                    }
                }
                opts
            })
            .collect();
        let mut idx = vec![0usize; pows.len()];
        loop {
            let mut n1 = 1u64;
            let mut n2 = 1u64;
            let mut ext = BTreeMap::new();
            for (k, &(p, v)) in pows.iter().enumerate() {
                let (side2, class) = options[k][idx[k]];
                if side2 {
                    n2 *= p.pow(v);
                } else {
                    n1 *= p.pow(v);
                }
                ext.insert(p, class);
            }
            let datum = ShimuraDatum {
                n1,
                n2,
                local_ext: ext,
            };
            if validate_datum(&datum).valid() {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return count;
                }
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn datum_count_matches_exhaustive_enumeration() {
        for n in 1..=60 {
            assert_eq!(
                count_data(n).unwrap(),
                count_by_enumeration(n),
                "count mismatch at level {n}"
            );
        }
    }

    #[test]
    fn datum_count_respects_the_stated_bound() {
        assert_eq!(count_data(1).unwrap(), 1);
        for n in 1..=500u64 {
            let omega = prime_divisors(n).len() as u32;
            assert!(
                count_data(n).unwrap() <= 15 * 7u64.pow(omega),
                "bound violated at level {n}"
            );
        }
        assert!(count_data(0).is_err());
        assert!(count_data(10_001).is_err());
    }
}
