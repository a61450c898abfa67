//! Heegner points of level N on the modular curve X_0(N).
//!
//! Fix a fundamental discriminant D < 0 such that every prime dividing N
//! splits in K = Q(sqrt(D)), and fix the smallest beta >= 0 with
//! beta^2 = D (mod 4N). Each ideal class of K then owns one point of
//! X_0(N): choose a form (a, b, c) in the class with gcd(a, N) = 1, merge
//! the congruences B = b (mod 2a) and B = beta (mod 2N), and take the root
//! of the level form (aN, B, (B^2 - D)/(4aN)) in the upper half plane.
//! Reducing the level forms mod SL_2(Z) hits every reduced form of
//! discriminant D exactly once, because passing from (a, b, c) to the
//! level form multiplies the underlying class by the fixed class of a form
//! (N, beta, *); so the orbit is in bijection with the class group, and
//! composition of forms realizes the Galois action on it.
//!
//! The level height ht_N(z) is the largest imaginary part in the
//! Gamma_0(N)-orbit of z, equal to Im z / min |cz + d|^2 over bottom rows
//! (c, d) of Gamma_0(N). The search is finite and complete: a row beating
//! the identity needs |cz + d| <= 1, hence |c| <= 1 / Im z (we scan to
//! 2 / Im z for margin), and for fixed c the quantity |cz + d| grows with
//! the distance from d to -c Re z, so only the first integer coprime to c
//! on each side of that center can attain the minimum.
//!
//! Orbit statistics: the mean of ht_N over the orbit tracks
//! (3/pi) L_D / index(N), where L_D = (1/2) log|D| + L'/L(1, chi_D) and
//! index(N) = [SL_2(Z) : Gamma_0(N)], with a bounded remainder. The orbit,
//! projected to the level-one surface, equidistributes for the normalized
//! hyperbolic measure (3/pi) dx dy / y^2 as |D| grows; the discrepancy
//! statistic quantifies this against a fixed 65-cell family described at
//! `equidistribution_stats`.

use rug::{Complex, Float};

use crate::dirichlet_l::l_report;
use crate::error::{Error, Result};
use crate::numeric::{gamma0_index, kronecker, pi, prime_divisors, GUARD};
use crate::quadclass::{
    ext_gcd, gcd, is_fundamental, reduced_forms, translate_coprime_to, QuadForm,
};

/// One point of the Heegner orbit: a level form (a, b, c) with N | a and
/// b^2 = D (mod 4N), together with its root z = (-b + i sqrt(|D|)) / (2a).
#[derive(Debug, Clone)]
pub struct HeegnerPoint {
    /// Level.
    pub n: u64,
    /// The level form; the point is its root in the upper half plane.
    pub form: QuadForm,
    /// Index into `reduced_forms(D)` of the class this point was built from.
    pub class_index: usize,
    /// Root of the level form, at the precision given to `enumerate_heegner`.
    pub root: Complex,
}

/// Orbit-level summary: per-class level heights, their mean against the
/// predicted (3/pi) L_D / index(N) law, and the discrepancy of the orbit
/// against the hyperbolic measure.
#[derive(Debug, Clone)]
pub struct OrbitStatistics {
    pub d: i64,
    pub n: u64,
    pub class_number: u64,
    /// ht_N of each orbit point, ordered by class index.
    pub heights: Vec<Float>,
    pub mean_height: Float,
    /// (3/pi) L_D / index(N).
    pub predicted_mean: Float,
    /// mean_height - predicted_mean.
    pub residual: Float,
    pub discrepancy: f64,
}

fn validate_pair(n: u64, d: i64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("level must be positive".into()));
    }
    if !is_fundamental(d) {
        return Err(Error::Domain(format!(
            "{d} is not a fundamental discriminant"
        )));
    }
    Ok(())
}

/// True when every prime dividing n splits in Q(sqrt(d)), that is,
/// chi_d(p) = +1 for every p | n. Vacuously true at n = 1.
pub fn heegner_condition(n: u64, d: i64) -> Result<bool> {
    validate_pair(n, d)?;
    Ok(prime_divisors(n)
        .into_iter()
        .all(|p| kronecker(d, p as i64) == 1))
}

/// Smallest beta >= 0 with beta^2 = d (mod 4n). The split condition
/// guarantees one exists, and solutions are stable under beta -> beta + 2n,
/// so scanning [0, 2n) is exhaustive.
pub fn heegner_beta(n: u64, d: i64) -> Result<i64> {
    validate_pair(n, d)?;
    let m = 4i128 * n as i128;
    for beta in 0..2 * n as i128 {
        if (beta * beta - d as i128).rem_euclid(m) == 0 {
            return Ok(beta as i64);
        }
    }
    Err(Error::Domain(format!(
        "{d} has no square root modulo 4*{n}; no point of this discriminant exists at this level"
    )))
}

/// The level form of the class of f: translate f so its leading
/// coefficient a is coprime to n, solve B = b (mod 2a), B = beta (mod 2n)
/// with B in (-an, an], and return (an, B, (B^2 - d) / (4an)).
fn level_form(f: &QuadForm, n: u64, beta: i64, d: i64) -> Result<QuadForm> {
    let g = translate_coprime_to(f, n as i64)?;
    let (a, b) = (g.a as i128, g.b as i128);
    let nn = n as i128;
    // With B = b + 2at the pair of congruences collapses to
    // a t = (beta - b) / 2 (mod n); beta - b is even since both beta and b
    // share the parity of d.
    let rhs = (beta as i128 - b).div_euclid(2).rem_euclid(nn);
    let (g0, s, _) = ext_gcd((a.rem_euclid(nn)) as i64, n as i64);
    if g0 != 1 {
        return Err(Error::Inconsistent(
            "translated leading coefficient is not coprime to the level".into(),
        ));
    }
    let t = (s as i128).rem_euclid(nn) * rhs % nn;
    let an = a * nn;
    let mut bb = (b + 2 * a * t).rem_euclid(2 * an);
    if bb > an {
        bb -= 2 * an;
    }
    debug_assert_eq!((bb * bb - d as i128).rem_euclid(4 * an), 0);
    let cc = (bb * bb - d as i128) / (4 * an);
    let conv = |v: i128| {
        i64::try_from(v).map_err(|_| Error::Domain("level form coefficient exceeds i64".into()))
    };
    QuadForm::new(conv(an)?, conv(bb)?, conv(cc)?)
}

/// The Heegner orbit at level n and discriminant d: exactly h(d) points,
/// one per ideal class, built deterministically from the reduced forms and
/// the smallest square root of d mod 4n. Roots carry `prec` significand
/// bits. Errors when the split condition fails.
pub fn enumerate_heegner(n: u64, d: i64, prec: u32) -> Result<Vec<HeegnerPoint>> {
    if !heegner_condition(n, d)? {
        return Err(Error::Domain(format!(
            "discriminant {d} fails the split condition at level {n}"
        )));
    }
    let beta = heegner_beta(n, d)?;
    let classes = reduced_forms(d)?;
    let mut points = Vec::with_capacity(classes.len());
    for (class_index, f) in classes.iter().enumerate() {
        let form = level_form(f, n, beta, d)?;
        points.push(HeegnerPoint {
            n,
            form,
            class_index,
            root: form.root(prec),
        });
    }
    Ok(points)
}

/// Galois action on the orbit, realized as composition of classes: the
/// class of sigma moves the point built from class A to the point built
/// from [sigma] * A, for the same level and the same square root beta
/// (recovered from the point's middle coefficient). The principal class
/// acts as the identity and the action is simply transitive.
pub fn galois_act(sigma: &QuadForm, p: &HeegnerPoint, prec: u32) -> Result<HeegnerPoint> {
    let d = p.form.disc();
    if sigma.disc() != d {
        return Err(Error::Domain(
            "acting class and point have different discriminants".into(),
        ));
    }
    let classes = reduced_forms(d)?;
    let base = classes
        .get(p.class_index)
        .ok_or_else(|| Error::Domain("point class index out of range".into()))?;
    let moved = crate::quadclass::compose(sigma, base)?;
    let class_index = classes.iter().position(|f| *f == moved).ok_or_else(|| {
        Error::Inconsistent("composed class is missing from the reduced enumeration".into())
    })?;
    let beta = p.form.b.rem_euclid(2 * p.n as i64);
    let form = level_form(&moved, p.n, beta, d)?;
    Ok(HeegnerPoint {
        n: p.n,
        form,
        class_index,
        root: form.root(prec),
    })
}

/// Apply the Moebius transformation of m = [p, q, r, s] to z:
/// (p z + q) / (r z + s).
pub fn moebius(m: [i64; 4], z: &Complex, prec: u32) -> Complex {
    let wp = prec + GUARD;
    let [p, q, r, s] = m;
    let num = Complex::with_val(wp, z) * p + q;
    let den = Complex::with_val(wp, z) * r + s;
    num / den
}

/// Largest imaginary part in the Gamma_0(n)-orbit of z, together with a
/// matrix attaining it. See the module notes for why the search over
/// bottom rows (c, d), c = 0 mod n, |c| <= 2 / Im z, nearest coprime d on
/// each side of -c Re z, is provably complete.
pub fn ht_n_with_matrix(z: &Complex, n: u64, prec: u32) -> Result<(Float, [i64; 4])> {
    if n == 0 {
        return Err(Error::Domain("level must be positive".into()));
    }
    let wp = prec + GUARD;
    let y = Float::with_val(wp, z.imag());
    if !y.is_normal() || y.is_sign_negative() {
        return Err(Error::Domain("height needs Im z > 0".into()));
    }
    let x = Float::with_val(wp, z.real());
    let cmax = 2.0 / y.to_f64();
    if !cmax.is_finite() || cmax > 1e7 {
        return Err(Error::Precision(
            "height search radius exceeds 10^7; imaginary part is too small".into(),
        ));
    }
    let cmax = cmax.ceil() as i64;
    let mut best = Float::with_val(wp, 1u32);
    let mut mat = [1i64, 0, 0, 1];
    let mut c = n as i64;
    while c <= cmax {
        let center = -Float::with_val(wp, &x * c);
        let c0 = center.to_f64();
        if c0.abs() > 1e15 {
            return Err(Error::Precision("height search center exceeds 2^50".into()));
        }
        let c0 = c0.floor() as i64;
        // First d coprime to c at or below the center, then above it.
        for (start, step) in [(c0, -1i64), (c0 + 1, 1i64)] {
            let mut d = start;
            let mut tries = 0u32;
            while gcd(c.unsigned_abs(), d.unsigned_abs()) != 1 {
                d += step;
                tries += 1;
                if tries > 2000 {
                    return Err(Error::Inconsistent(
                        "no coprime denominator near the search center".into(),
                    ));
                }
            }
            let mut u = Float::with_val(wp, &x * c);
            u += d;
            let v = Float::with_val(wp, &y * c);
            let m = u.square() + v.square();
            if m < best {
                best = m;
                let (g0, p0, q0) = ext_gcd(c, d);
                debug_assert_eq!(g0, 1);
                // p0 c + q0 d = 1, so [q0, -p0, c, d] has determinant one.
                mat = [q0, -p0, c, d];
            }
        }
        c += n as i64;
    }
    Ok((y / best, mat))
}

/// Largest imaginary part in the Gamma_0(n)-orbit of z.
pub fn ht_n(z: &Complex, n: u64, prec: u32) -> Result<Float> {
    Ok(ht_n_with_matrix(z, n, prec)?.0)
}

/// Move z to the representative of its Gamma_0(n)-orbit with maximal
/// imaginary part, returning the image and the matrix used.
pub fn gamma0_reduce(z: &Complex, n: u64, prec: u32) -> Result<(Complex, [i64; 4])> {
    let (_, m) = ht_n_with_matrix(z, n, prec)?;
    Ok((moebius(m, z, prec), m))
}

/// Discrepancy of the orbit against the hyperbolic measure.
///
/// The orbit is projected to the level-one surface (by reducing the level
/// forms, which enumerates the reduced forms of discriminant d exactly
/// once, independent of the level), and each point lands in coordinates
/// (x, v) = (Re z, 1 / Im z), where the hyperbolic measure dx dy / y^2 is
/// plain Lebesgue dx dv. The cell family is fixed: an 8 x 8 grid of
/// dyadic steps over [-1/2, 1/2) x (0, 1], each of normalized mass
/// 3 / (64 pi), plus one cell for the Im z < 1 strip of the fundamental
/// domain, of mass 1 - 3/pi. The statistic is the largest deviation
/// |empirical fraction - mass| over the 65 cells.
pub fn equidistribution_stats(d: i64, n: u64) -> Result<f64> {
    if !heegner_condition(n, d)? {
        return Err(Error::Domain(format!(
            "discriminant {d} fails the split condition at level {n}"
        )));
    }
    let forms = reduced_forms(d)?;
    let h = forms.len() as f64;
    let sq = (-(d as f64)).sqrt();
    let mut counts = [0u64; 65];
    for f in &forms {
        let x = -(f.b as f64) / (2.0 * f.a as f64);
        let v = 2.0 * f.a as f64 / sq;
        let cell = if v > 1.0 {
            64
        } else {
            let col = (((x + 0.5) * 8.0).floor() as i64).clamp(0, 7) as usize;
            let row = ((v * 8.0).floor() as i64).clamp(0, 7) as usize;
            8 * row + col
        };
        counts[cell] += 1;
    }
    let cell_mass = 3.0 / (64.0 * std::f64::consts::PI);
    let outer_mass = 1.0 - 3.0 / std::f64::consts::PI;
    let mut disc = 0f64;
    for (i, &cnt) in counts.iter().enumerate() {
        let mass = if i == 64 { outer_mass } else { cell_mass };
        disc = disc.max((cnt as f64 / h - mass).abs());
    }
    Ok(disc)
}

/// Heights of the full orbit, their mean against the predicted
/// (3/pi) L_D / index(n) value, and the equidistribution discrepancy.
pub fn average_height_report(d: i64, n: u64, prec: u32) -> Result<OrbitStatistics> {
    let wp = prec + GUARD;
    let points = enumerate_heegner(n, d, wp)?;
    let mut heights = Vec::with_capacity(points.len());
    let mut mean = Float::new(wp);
    for p in &points {
        let (ht, _) = ht_n_with_matrix(&p.root, n, wp)?;
        mean += &ht;
        heights.push(ht);
    }
    mean /= points.len() as u32;
    let report = l_report(d, prec)?;
    let predicted = Float::with_val(wp, &report.script_ld) * 3u32
        / pi(wp)
        / Float::with_val(wp, gamma0_index(n));
    let residual = mean.clone() - &predicted;
    let discrepancy = equidistribution_stats(d, n)?;
    Ok(OrbitStatistics {
        d,
        n,
        class_number: points.len() as u64,
        heights,
        mean_height: mean,
        predicted_mean: predicted,
        residual,
        discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::factor;
    use crate::quadclass::{class_number, compose, fundamental_discs, identity_form, reduce};

    fn close(a: &Float, b: &Float, bits: u32) -> bool {
        let diff = Float::with_val(a.prec(), a - b).abs();
        let mut scale = Float::with_val(a.prec(), b).abs();
        if scale < 1u32 {
            scale = Float::with_val(a.prec(), 1u32);
        }
        diff < scale >> bits
    }

    /// Exhaustive oracle for ht_n: scan every bottom row (c, d) with
    /// n | c, 0 <= c <= 2/Im z, and |d + c Re z| small, with no coprimality
    /// shortcuts beyond gcd(c, d) = 1 itself.
    fn ht_brute(z: &Complex, n: u64, prec: u32) -> Float {
        let wp = prec + GUARD;
        let y = Float::with_val(wp, z.imag());
        let x = Float::with_val(wp, z.real());
        let cmax = (2.0 / y.to_f64()).ceil() as i64 + 1;
        let mut best = Float::with_val(wp, 1u32);
        let mut k = 1i64;
        while k * n as i64 <= cmax {
            let c = k * n as i64;
            let span = (c as f64 * (x.to_f64().abs() + 2.0)).ceil() as i64 + 4;
            let center = (-c as f64 * x.to_f64()).round() as i64;
            for d in center - span..=center + span {
                if gcd(c.unsigned_abs(), d.unsigned_abs()) != 1 {
                    continue;
                }
                let mut u = Float::with_val(wp, &x * c);
                u += d;
                let v = Float::with_val(wp, &y * c);
                let m = u.square() + v.square();
                if m < best {
                    best = m;
                }
            }
            k += 1;
        }
        y / best
    }

    #[test]
    fn condition_agrees_with_prime_splitting() {
        for d in fundamental_discs(-400, -3) {
            assert!(heegner_condition(1, d).unwrap());
            for n in [2u64, 3, 5, 6, 10, 37, 49, 50] {
                let expect = factor(n)
                    .into_iter()
                    .all(|(p, _)| kronecker(d, p as i64) == 1);
                assert_eq!(heegner_condition(n, d).unwrap(), expect, "n={n} d={d}");
            }
        }
        assert!(heegner_condition(37, -7).unwrap());
        assert!(!heegner_condition(3, -7).unwrap());
    }

    #[test]
    fn beta_is_the_smallest_square_root() {
        for d in fundamental_discs(-300, -3) {
            for n in [1u64, 2, 5, 12, 37, 50] {
                if !heegner_condition(n, d).unwrap() {
                    continue;
                }
                let beta = heegner_beta(n, d).unwrap();
                assert!(0 <= beta && beta < 2 * n as i64);
                let m = 4 * n as i128;
                assert_eq!(
                    (beta as i128 * beta as i128 - d as i128).rem_euclid(m),
                    0,
                    "n={n} d={d}"
                );
                for smaller in 0..beta {
                    assert_ne!(
                        (smaller as i128 * smaller as i128 - d as i128).rem_euclid(m),
                        0
                    );
                }
            }
        }
    }

    #[test]
    fn orbit_is_in_bijection_with_the_class_group() {
        for n in [1u64, 2, 3, 5, 37, 50] {
            for d in fundamental_discs(-2000, -3) {
                if !heegner_condition(n, d).unwrap() {
                    continue;
                }
                let beta = heegner_beta(n, d).unwrap();
                let points = enumerate_heegner(n, d, 64).unwrap();
                assert_eq!(points.len() as u64, class_number(d).unwrap());
                let mut images = Vec::new();
                for (i, p) in points.iter().enumerate() {
                    assert_eq!(p.class_index, i);
                    assert_eq!(p.form.disc(), d);
                    assert_eq!(p.form.a.rem_euclid(n as i64), 0, "level divides a");
                    assert_eq!(p.form.b.rem_euclid(2 * n as i64), beta);
                    let bb = p.form.b as i128;
                    assert_eq!((bb * bb - d as i128).rem_euclid(4 * n as i128), 0);
                    assert!(p.form.is_primitive());
                    let re = p.root.real().to_f64();
                    assert!(p.root.imag().is_sign_positive());
                    assert!((-0.5 - 1e-12..0.5).contains(&re), "re={re}");
                    images.push(reduce(&p.form).unwrap());
                }
                images.sort();
                let mut expect = reduced_forms(d).unwrap();
                expect.sort();
                assert_eq!(images, expect, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn single_point_at_level_37_discriminant_minus_7() {
        let points = enumerate_heegner(37, -7, 96).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].form.a.rem_euclid(37), 0);
        assert_eq!(points[0].form.disc(), -7);
    }

    #[test]
    fn height_matches_exhaustive_search() {
        let prec = 96u32;
        let cases: [(f64, f64); 5] = [
            (0.0, 2.0),
            (0.0, 0.5),
            (0.3, 0.17),
            (-0.45, 0.08),
            (0.25, 1.3),
        ];
        for (re, im) in cases {
            let z = Complex::with_val(prec + GUARD, (re, im));
            for n in [1u64, 2, 5, 37] {
                let (ht, m) = ht_n_with_matrix(&z, n, prec).unwrap();
                let oracle = ht_brute(&z, n, prec);
                assert!(close(&ht, &oracle, prec - 8), "n={n} z={re}+{im}i");
                assert!(ht >= Float::with_val(prec, im) - Float::with_val(prec, 1e-20));
                // The matrix is in Gamma_0(n) and attains the height.
                assert_eq!(m[2].rem_euclid(n as i64), 0);
                assert_eq!(
                    (m[0] as i128) * (m[3] as i128) - (m[1] as i128) * (m[2] as i128),
                    1
                );
                let w = moebius(m, &z, prec);
                let im_w = Float::with_val(prec + GUARD, w.imag());
                assert!(close(&im_w, &ht, prec - 8));
            }
        }
        let two = ht_n(&Complex::with_val(128, (0.0, 2.0)), 1, 96).unwrap();
        assert!(close(&two, &Float::with_val(128, 2u32), 90));
        let half = ht_n(&Complex::with_val(128, (0.0, 0.5)), 1, 96).unwrap();
        assert!(close(&half, &Float::with_val(128, 2u32), 90), "i/2 -> 2");
    }

    #[test]
    fn level_one_height_is_the_reduced_imaginary_part() {
        let words: [[i64; 4]; 4] = [
            [1, 1, 0, 1],
            [0, -1, 1, 0],
            [2, 1, 1, 1],
            [5, -2, -2, 1],
        ];
        for d in [-7i64, -23, -47, -163] {
            for f in reduced_forms(d).unwrap() {
                for w in words {
                    let g = f.apply(w).unwrap();
                    let z = g.root(96);
                    let ht = ht_n(&z, 1, 96).unwrap();
                    let expect =
                        Float::with_val(128, -d).sqrt() / Float::with_val(128, 2 * reduce(&g).unwrap().a);
                    assert!(close(&ht, &expect, 80), "d={d}");
                }
            }
        }
    }

    #[test]
    fn height_is_invariant_under_the_group() {
        let prec = 128u32;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for n in [2u64, 37] {
            let z = Complex::with_val(prec + GUARD, (0.25f64, 0.625f64));
            let ht = ht_n(&z, n, prec).unwrap();
            for _ in 0..12 {
                let mut g = [1i64, 0, 0, 1];
                for _ in 0..6 {
                    let t = match rand() % 4 {
                        0 => [1, 1, 0, 1],
                        1 => [1, -1, 0, 1],
                        2 => [1, 0, n as i64, 1],
                        _ => [1, 0, -(n as i64), 1],
                    };
                    g = [
                        g[0] * t[0] + g[1] * t[2],
                        g[0] * t[1] + g[1] * t[3],
                        g[2] * t[0] + g[3] * t[2],
                        g[2] * t[1] + g[3] * t[3],
                    ];
                }
                let w = moebius(g, &z, prec);
                if w.imag().to_f64() < 2e-6 {
                    // Outside the bounded search radius of ht_n; the word
                    // pushed the point too close to the real line.
                    continue;
                }
                let ht_w = ht_n(&w, n, prec).unwrap();
                assert!(close(&ht, &ht_w, prec - 20), "n={n} g={g:?}");
            }
        }
    }

    #[test]
    fn galois_action_is_simply_transitive() {
        // h(-23) = 3 at level 1; h(-47) = 5 at level 2 (both split at 2).
        for (n, d) in [(1u64, -23i64), (2, -47)] {
            let points = enumerate_heegner(n, d, 64).unwrap();
            let classes = reduced_forms(d).unwrap();
            let id = identity_form(d).unwrap();
            for p in &points {
                let fixed = galois_act(&id, p, 64).unwrap();
                assert_eq!(fixed.form, p.form);
                assert_eq!(fixed.class_index, p.class_index);
            }
            // Acting on the first point by every class hits every point once.
            let mut seen: Vec<QuadForm> = classes
                .iter()
                .map(|s| galois_act(s, &points[0], 64).unwrap().form)
                .collect();
            seen.sort();
            let mut all: Vec<QuadForm> = points.iter().map(|p| p.form).collect();
            all.sort();
            assert_eq!(seen, all, "n={n} d={d}");
            // Composition law on a few pairs.
            for s in &classes {
                for t in &classes {
                    let st = compose(s, t).unwrap();
                    let one = galois_act(&st, &points[0], 64).unwrap();
                    let two = galois_act(s, &galois_act(t, &points[0], 64).unwrap(), 64).unwrap();
                    assert_eq!(one.form, two.form);
                }
            }
        }
    }

    #[test]
    fn orbit_of_a_cubic_generator_cycles() {
        let points = enumerate_heegner(1, -23, 64).unwrap();
        let gen = reduced_forms(-23)
            .unwrap()
            .into_iter()
            .find(|f| *f != identity_form(-23).unwrap())
            .unwrap();
        let p1 = galois_act(&gen, &points[0], 64).unwrap();
        let p2 = galois_act(&gen, &p1, 64).unwrap();
        let p3 = galois_act(&gen, &p2, 64).unwrap();
        let indices = [points[0].class_index, p1.class_index, p2.class_index];
        assert_eq!(p3.class_index, points[0].class_index);
        let mut sorted = indices;
        sorted.sort();
        assert_eq!(sorted, [0, 1, 2], "the orbit visits all three classes");
    }

    #[test]
    fn average_height_tracks_the_l_derivative_law() {
        let stats = average_height_report(-23, 1, 96).unwrap();
        assert_eq!(stats.class_number, 3);
        assert_eq!(stats.heights.len(), 3);
        let resid = stats.residual.to_f64().abs();
        assert!(resid <= 2.0, "residual {resid}");
        let check = stats.mean_height.clone() - &stats.predicted_mean;
        assert!(close(&check, &stats.residual, 60));
        // At level one every height is at least sqrt(3)/2.
        for d in [-7i64, -23, -47, -163, -1003] {
            let stats = average_height_report(d, 1, 64).unwrap();
            let floor = 0.8660254;
            for ht in &stats.heights {
                assert!(ht.to_f64() >= floor - 1e-9, "d={d}");
            }
            assert!(stats.mean_height.to_f64() >= floor - 1e-9);
        }
    }

    #[test]
    fn level_37_report_is_consistent() {
        let stats = average_height_report(-7, 37, 96).unwrap();
        assert_eq!(stats.class_number, 1);
        let brute = ht_brute(&enumerate_heegner(37, -7, 128).unwrap()[0].root, 37, 96);
        assert!(close(&stats.heights[0], &brute, 80));
        // index(37) = 38, so the predicted mean is (3/pi) L_D / 38.
        let alone = average_height_report(-7, 1, 96).unwrap();
        let ratio = alone.predicted_mean.to_f64() / stats.predicted_mean.to_f64();
        assert!((ratio - 38.0).abs() < 1e-9);
    }

    #[test]
    fn single_class_discrepancy_is_one_minus_one_cell() {
        let disc = equidistribution_stats(-163, 1).unwrap();
        let cell = 3.0 / (64.0 * std::f64::consts::PI);
        assert!((disc - (1.0 - cell)).abs() < 1e-12);
    }

    #[test]
    fn discrepancy_shrinks_toward_larger_discriminants() {
        let mean_over = |lo: i64, hi: i64| {
            let ds = fundamental_discs(lo, hi);
            let mut acc = 0.0;
            for &d in &ds {
                acc += equidistribution_stats(d, 1).unwrap();
            }
            acc / ds.len() as f64
        };
        let small = mean_over(-500, -3);
        let large = mean_over(-4000, -3500);
        assert!(large < small, "large {large} small {small}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(heegner_condition(0, -7).is_err());
        assert!(heegner_condition(5, -8).is_ok());
        assert!(heegner_condition(5, 5).is_err());
        assert!(enumerate_heegner(3, -7, 64).is_err());
        let below = Complex::with_val(64, (0.3f64, -1.0f64));
        assert!(ht_n(&below, 1, 32).is_err());
    }
}
