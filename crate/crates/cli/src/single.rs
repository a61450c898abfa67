//! The single-query commands, each emitting one JSON document on stdout.
//!
//! Every document carries the code version and a Unix timestamp, and
//! every floating value is a decimal string at a fixed number of
//! significant digits (see `fmt`) so precision survives JSON readers
//! that only know machine floats. A query the mathematics refuses —
//! a non-fundamental discriminant, a vanishing-trace sign, a local
//! factor outside the implemented table — is itself an answer: the
//! command prints `{"refused": reason}` and exits 0. Only an internal
//! cross-check failure is a process failure (exit 2).

use std::time::{SystemTime, UNIX_EPOCH};

use heegner_core::dirichlet_l::l_report;
use heegner_core::elliptic_curve::periods::ComplexPoint;
use heegner_core::elliptic_curve::weierstrass::ExactPoint;
use heegner_core::elliptic_curve::CurveModel;
use heegner_core::eta_kronecker::kronecker_limit_check;
use heegner_core::heegner_points::{average_height_report, heegner_condition};
use heegner_core::modular_param::{archimedean_height_proxy, heegner_point};
use heegner_core::numeric::{gamma0_index, pi, prime_divisors};
use heegner_core::quadclass::{class_group, is_fundamental};
use heegner_core::root_number::{
    construct_datum, global_sign, local_epsilon, sign_from_local_product, validate_datum,
    EpsilonSource, LocalExt, Place,
};
use heegner_core::{Error, Result};
use rug::Float;
use serde_json::{json, Value};

use crate::fmt::{coord, sig, sigf};

fn emit(doc: &Value) {
    println!("{}", serde_json::to_string_pretty(doc).expect("serializable"));
}

fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Unwrap a library result, turning a mathematical refusal into a
/// `{"refused": ...}` document (exit 0 upstream). Internal consistency
/// failures pass through and become exit code 2.
fn refusable<T>(r: Result<T>) -> Result<std::result::Result<T, i32>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(Error::Inconsistent(m)) => Err(Error::Inconsistent(m)),
        Err(e) => {
            emit(&json!({ "refused": e.to_string() }));
            Ok(Err(0))
        }
    }
}

/// Shorthand: bind or return the refusal exit code.
macro_rules! try_refusable {
    ($e:expr) => {
        match refusable($e)? {
            Ok(v) => v,
            Err(code) => return Ok(code),
        }
    };
}

/// `classgroup`: the resolved group structure, cross-checked against the
/// class-number formula when the discriminant is fundamental. A decided
/// formula value that disagrees with the enumeration is an internal
/// consistency failure.
pub fn classgroup(d: i64, prec: u32) -> Result<i32> {
    let g = try_refusable!(class_group(d));
    let h = g.h();
    let mut h_analytic = Value::Null;
    let mut l1 = Value::Null;
    let mut note = Value::Null;
    if is_fundamental(d) {
        let rep = try_refusable!(l_report(d, prec));
        let wp = prec + 32;
        let w = match d {
            -3 => 6u32,
            -4 => 4,
            _ => 2,
        };
        let scale = Float::with_val(wp, -d).sqrt() * w / (Float::with_val(wp, pi(wp)) * 2u32);
        let raw = Float::with_val(wp, &scale * &rep.l1);
        let err = Float::with_val(wp, &scale * &rep.l1_err);
        let rounded = raw.to_f64().round() as i64;
        let slack = Float::with_val(wp, &raw - rounded).abs() + err;
        if slack < 0.5 {
            if rounded < 0 || rounded as u64 != h {
                return Err(Error::Inconsistent(format!(
                    "class group of {d}: enumeration gives h = {h}, the \
                     class-number formula gives {rounded}"
                )));
            }
            h_analytic = json!(rounded);
        } else {
            note = json!("class-number formula undecided at this precision");
        }
        l1 = json!(sig(&rep.l1, 18));
    } else {
        note = json!("non-fundamental discriminant: no analytic cross-check");
    }
    emit(&json!({
        "D": d,
        "h": h,
        "invariant_factors": g.invariant_factors,
        "generators": g.generators,
        "forms": g.forms,
        "h_analytic": h_analytic,
        "l1": l1,
        "note": note,
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": unix_time(),
    }));
    Ok(0)
}

/// `ldata`: L(1), L'(1), and the combined logarithmic datum, each with
/// its rigorous error bound.
pub fn ldata(d: i64, prec: u32) -> Result<i32> {
    let rep = try_refusable!(l_report(d, prec));
    emit(&json!({
        "D": rep.d,
        "precision_bits": rep.precision_bits,
        "l1": sig(&rep.l1, 30),
        "l1_err": sig(&rep.l1_err, 3),
        "lprime1": sig(&rep.lprime1, 30),
        "lprime1_err": sig(&rep.lprime1_err, 3),
        "script_ld": sig(&rep.script_ld, 30),
        "script_ld_err": sig(&rep.script_ld_err, 3),
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": unix_time(),
    }));
    Ok(0)
}

/// `etacheck`: both sides of the limit identity with the residual and
/// its rigorous allowance.
pub fn etacheck(d: i64, prec: u32) -> Result<i32> {
    let rep = try_refusable!(kronecker_limit_check(d, prec));
    let pass = rep.residual <= rep.bound;
    emit(&json!({
        "D": rep.d,
        "lhs": sig(&rep.lhs, 30),
        "rhs": sig(&rep.rhs, 30),
        "residual": sig(&rep.residual, 3),
        "bound": sig(&rep.bound, 3),
        "pass": pass,
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": unix_time(),
    }));
    Ok(0)
}

/// `heegner`: the full orbit height list with its mean, the predicted
/// mean, the residual, and the box discrepancy.
pub fn heegner(d: i64, n: u64, prec: u32) -> Result<i32> {
    let stats = try_refusable!(average_height_report(d, n, prec));
    let heights: Vec<String> = stats.heights.iter().map(|h| sig(h, 15)).collect();
    emit(&json!({
        "D": stats.d,
        "N": stats.n,
        "class_number": stats.class_number,
        "heights": heights,
        "mean_height": sig(&stats.mean_height, 15),
        "predicted_mean": sig(&stats.predicted_mean, 15),
        "residual": sig(&stats.residual, 15),
        "discrepancy": sigf(stats.discrepancy, 6),
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": unix_time(),
    }));
    Ok(0)
}

fn place_value(p: Place) -> Value {
    match p {
        Place::Infinite => json!("infinity"),
        Place::Finite(p) => json!(p),
    }
}

fn source_name(s: EpsilonSource) -> &'static str {
    match s {
        EpsilonSource::Archimedean => "archimedean",
        EpsilonSource::Unramified => "unramified",
        EpsilonSource::Table => "table",
        EpsilonSource::Unavailable => "unavailable",
    }
}

fn ext_name(e: LocalExt) -> String {
    match e {
        LocalExt::Split => "split".into(),
        LocalExt::Unramified => "unramified".into(),
        LocalExt::Ramified(t) => format!("ramified:{t}"),
    }
}

/// `sign`: the functional-equation sign by the closed form, every local
/// factor, the level datum with its validation, and the splitting
/// condition. The closed form and the local product must agree wherever
/// both are defined.
pub fn sign(e: &CurveModel, d: i64) -> Result<i32> {
    if d >= 0 || !is_fundamental(d) {
        emit(&json!({
            "refused": format!("{d} is not a negative fundamental discriminant")
        }));
        return Ok(0);
    }
    let closed = global_sign(e, d);
    let product = sign_from_local_product(e, d);
    if let (Ok(a), Ok(b)) = (&closed, &product) {
        if a != b {
            return Err(Error::Inconsistent(format!(
                "sign of ({}, {d}): closed form gives {a}, local product gives {b}",
                e.label
            )));
        }
    }
    let sign_value = match closed {
        Ok(s) => json!(s),
        Err(Error::Unavailable(_)) => json!("unavailable"),
        Err(err) => return Err(err),
    };
    let mut primes = prime_divisors(e.conductor);
    for p in prime_divisors(d.unsigned_abs()) {
        if !primes.contains(&p) {
            primes.push(p);
        }
    }
    primes.sort_unstable();
    let mut local_factors = vec![];
    for place in std::iter::once(Place::Infinite)
        .chain(primes.iter().map(|&p| Place::Finite(p)))
    {
        let eps = local_epsilon(e, d, place)?;
        local_factors.push(json!({
            "place": place_value(eps.place),
            "value": eps.value,
            "source": source_name(eps.source),
        }));
    }
    let (datum, datum_valid, violations) = match construct_datum(e, d) {
        Ok(dat) => {
            let check = validate_datum(&dat);
            let exts: serde_json::Map<String, Value> = dat
                .local_ext
                .iter()
                .map(|(p, ext)| (p.to_string(), json!(ext_name(*ext))))
                .collect();
            (
                json!({ "n1": dat.n1, "n2": dat.n2, "local_ext": exts }),
                json!(check.valid()),
                json!(check
                    .violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()),
            )
        }
        Err(Error::Inconsistent(m)) => return Err(Error::Inconsistent(m)),
        Err(err) => (Value::Null, Value::Null, json!([err.to_string()])),
    };
    emit(&json!({
        "curve": e.label,
        "conductor": e.conductor,
        "D": d,
        "sign": sign_value,
        "local_factors": local_factors,
        "datum": datum,
        "datum_valid": datum_valid,
        "violations": violations,
        "heegner_condition": heegner_condition(e.conductor, d)?,
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": unix_time(),
    }));
    Ok(0)
}

/// `point`: the orbit through the parametrization, the trace with its
/// recognition, the canonical height when recognized, and the
/// archimedean proxy against the scaled logarithmic datum.
pub fn point(e: &CurveModel, d: i64, prec: u32, denom_bound: u64) -> Result<i32> {
    let trace = try_refusable!(heegner_point(e, d, prec, denom_bound));
    let proxy = try_refusable!(archimedean_height_proxy(e, d, prec));
    let rep = try_refusable!(l_report(d, prec));
    let wp = prec + 32;
    let predicted = Float::with_val(wp, &rep.script_ld) * 6u32
        / Float::with_val(wp, gamma0_index(e.conductor));
    let orbit_ht: Vec<String> = trace.orbit_ht.iter().map(|h| sig(h, 15)).collect();
    let trace_complex = match &trace.trace_point {
        ComplexPoint::Infinity => json!("infinity"),
        ComplexPoint::Affine(x, y) => json!({
            "x": { "re": sig(x.real(), 15), "im": sig(x.imag(), 15) },
            "y": { "re": sig(y.real(), 15), "im": sig(y.imag(), 15) },
        }),
    };
    let recognized = match &trace.recognized {
        None => Value::Null,
        Some(ExactPoint::Infinity) => json!("infinity"),
        Some(ExactPoint::Affine(x, y)) => json!({ "x": coord(x), "y": coord(y) }),
    };
    let symmetric_x = trace
        .symmetric_x
        .as_ref()
        .map(|(s, p)| json!({ "sum": s.to_string(), "product": p.to_string() }))
        .unwrap_or(Value::Null);
    emit(&json!({
        "curve": e.label,
        "D": trace.d,
        "class_number": trace.class_number,
        "orbit_ht": orbit_ht,
        "proxy": sig(&proxy, 15),
        "predicted": sig(&predicted, 15),
        "trace_complex": trace_complex,
        "recognized": recognized,
        "non_torsion": trace.non_torsion,
        "hhat": trace.height.as_ref().map(|h| sig(h, 15)),
        "hhat_err": trace.height_error.as_ref().map(|h| sig(h, 3)),
        "symmetric_x": symmetric_x,
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": unix_time(),
    }));
    Ok(0)
}
