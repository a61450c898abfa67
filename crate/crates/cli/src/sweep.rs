//! Range sweeps: one CSV file per task, written in a canonical row order
//! so that a finished file is byte-identical no matter how many workers
//! ran or how often the sweep was interrupted and resumed.
//!
//! Each file starts with two `#` header lines recording the code version
//! and the full configuration, then a column-name line, then one row per
//! fundamental discriminant of the range in descending order (closest to
//! zero first — the order `fundamental_discs` produces). Workers compute
//! rows concurrently; a single ordered writer appends them strictly in
//! canonical order, so the rows on disk always form a prefix of the
//! finished file. Resuming re-reads that prefix, verifies it against the
//! configuration, discards a torn final line if the previous run was
//! interrupted mid-write, and continues where the file stops.
//!
//! A row that fails mathematically is still a row: its numeric cells are
//! left empty and the `note` cell records the reason, and the sweep
//! continues. If any recorded failure was an internal consistency error,
//! the sweep exits 2 after finishing.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Seek, SeekFrom, Write as IoWrite};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};

use heegner_core::dirichlet_l::l_report;
use heegner_core::elliptic_curve::weierstrass::ExactPoint;
use heegner_core::elliptic_curve::CurveModel;
use heegner_core::eta_kronecker::kronecker_limit_check;
use heegner_core::heegner_points::{
    average_height_report, equidistribution_stats, heegner_condition,
};
use heegner_core::modular_param::{archimedean_height_proxy, heegner_point};
use heegner_core::numeric::gamma0_index;
use heegner_core::quadclass::{class_number, fundamental_discs};
use heegner_core::root_number::{
    construct_datum, global_sign, sign_from_local_product, validate_datum,
};
use heegner_core::{Error, Result};
use rug::Float;

use crate::fmt::{coord, csv_note, sig, sigf};

/// One sweep task; each writes its own CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Signs,
    Heights,
    Eta,
    Equidist,
    Minoration,
    Points,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::Signs,
        Task::Heights,
        Task::Eta,
        Task::Equidist,
        Task::Minoration,
        Task::Points,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Signs => "signs",
            Task::Heights => "heights",
            Task::Eta => "eta",
            Task::Equidist => "equidist",
            Task::Minoration => "minoration",
            Task::Points => "points",
        }
    }

    /// The column-name line.
    fn columns(self) -> &'static str {
        match self {
            Task::Signs => "D,sign,heegner,datum_valid,note",
            Task::Heights => "D,h,mean_ht,predicted,residual,discrepancy,note",
            Task::Eta => "D,lhs,rhs,residual,bound,note",
            Task::Equidist => "D,h,discrepancy,note",
            Task::Minoration => "D,script_ld,err,floor,margin,pass,note",
            Task::Points => "D,h,proxy,predicted,hhat,recognized,non_torsion,note",
        }
    }

    /// Cells between `D` and `note`.
    fn data_cells(self) -> usize {
        self.columns().matches(',').count() - 1
    }

    fn needs_curve(self) -> bool {
        matches!(self, Task::Signs | Task::Points)
    }
}

/// A validated sweep invocation.
pub struct SweepConfig {
    pub tasks: Vec<Task>,
    pub dmin: i64,
    pub dmax: i64,
    pub curve: Option<CurveModel>,
    pub level: u64,
    pub prec: u32,
    pub out: PathBuf,
    pub jobs: usize,
    pub denom_bound: u64,
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::Parse(
                "no sweep task selected; pass at least one of --signs --heights \
                 --eta --equidist --minoration --points"
                    .into(),
            ));
        }
        if !(self.dmin <= self.dmax && self.dmax < 0) {
            return Err(Error::Parse(format!(
                "sweep range must satisfy dmin <= dmax < 0, got [{}, {}]",
                self.dmin, self.dmax
            )));
        }
        if self.prec < 64 {
            return Err(Error::Parse(format!(
                "--prec {} is below the sweep minimum of 64 bits",
                self.prec
            )));
        }
        if self.jobs == 0 {
            return Err(Error::Parse("--jobs must be at least 1".into()));
        }
        if self.level == 0 {
            return Err(Error::Parse("-N must be at least 1".into()));
        }
        if self.curve.is_none() {
            if let Some(t) = self.tasks.iter().find(|t| t.needs_curve()) {
                return Err(Error::Parse(format!(
                    "--{} needs --curve",
                    t.name()
                )));
            }
        }
        Ok(())
    }

    fn header(&self, task: Task) -> String {
        format!(
            "# heegner sweep version={}\n\
             # task={} curve={} level={} prec={} dmin={} dmax={} denom={}\n\
             {}\n",
            env!("CARGO_PKG_VERSION"),
            task.name(),
            self.curve.as_ref().map(|c| c.label.as_str()).unwrap_or("-"),
            self.level,
            self.prec,
            self.dmin,
            self.dmax,
            self.denom_bound,
            task.columns(),
        )
    }
}

struct TaskOutcome {
    reused: usize,
    computed: usize,
    inconsistent: bool,
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> Error {
    Error::Parse(format!("sweep file {}: {e}", path.display()))
}

/// Open the task's output file positioned for appending: create it with
/// the header when missing, otherwise verify the header and the existing
/// row prefix against this configuration, dropping a torn final line.
/// Returns the file and the number of rows already present.
fn prepare_file(
    path: &std::path::Path,
    header: &str,
    discs: &[i64],
) -> Result<(fs::File, usize)> {
    let bytes = match fs::read(path) {
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
            f.write_all(header.as_bytes()).map_err(|e| io_err(path, e))?;
            return Ok((f, 0));
        }
        Err(e) => return Err(io_err(path, e)),
        Ok(b) => b,
    };
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Parse(format!("sweep file {} is not UTF-8", path.display())))?;
    if !text.starts_with(header) {
        return Err(Error::Parse(format!(
            "{} was written with a different configuration or version; \
             use a fresh --out directory",
            path.display()
        )));
    }
    let body = &text[header.len()..];
    // Keep only whole lines; an interrupt can leave a torn final line.
    let complete_end = body.rfind('\n').map_or(0, |i| i + 1);
    let mut k = 0usize;
    for row in body[..complete_end].lines() {
        let d: i64 = row
            .split(',')
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                Error::Parse(format!(
                    "{} row {} does not start with a discriminant",
                    path.display(),
                    k + 1
                ))
            })?;
        if k >= discs.len() || discs[k] != d {
            return Err(Error::Parse(format!(
                "{} rows do not match this range; use a fresh --out directory",
                path.display()
            )));
        }
        k += 1;
    }
    let keep = (header.len() + complete_end) as u64;
    let mut f = fs::OpenOptions::new()
        .write(true)
        .open(path)
        .map_err(|e| io_err(path, e))?;
    f.set_len(keep).map_err(|e| io_err(path, e))?;
    f.seek(SeekFrom::End(0)).map_err(|e| io_err(path, e))?;
    Ok((f, k))
}

/// `D` + empty data cells + the failure note.
fn error_row(d: i64, task: Task, e: &Error) -> String {
    format!(
        "{d}{}{}",
        ",".repeat(task.data_cells() + 1),
        csv_note(&e.to_string())
    )
}

fn signs_row(e: &CurveModel, d: i64) -> Result<String> {
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
    let heeg = u8::from(heegner_condition(e.conductor, d)?);
    let datum_valid = match construct_datum(e, d) {
        Ok(dat) => u8::from(validate_datum(&dat).valid()).to_string(),
        Err(_) => String::new(),
    };
    let sign = match closed {
        Ok(s) => s.to_string(),
        Err(Error::Unavailable(_)) => "unavailable".into(),
        Err(err) => return Err(err),
    };
    Ok(format!("{d},{sign},{heeg},{datum_valid},"))
}

fn heights_row(d: i64, level: u64, prec: u32) -> Result<String> {
    let stats = average_height_report(d, level, prec)?;
    Ok(format!(
        "{d},{},{},{},{},{},",
        stats.class_number,
        sig(&stats.mean_height, 15),
        sig(&stats.predicted_mean, 15),
        sig(&stats.residual, 15),
        sigf(stats.discrepancy, 6),
    ))
}

fn eta_row(d: i64, prec: u32) -> Result<String> {
    let rep = kronecker_limit_check(d, prec)?;
    Ok(format!(
        "{d},{},{},{},{},",
        sig(&rep.lhs, 24),
        sig(&rep.rhs, 24),
        sig(&rep.residual, 3),
        sig(&rep.bound, 3),
    ))
}

fn equidist_row(d: i64, level: u64) -> Result<String> {
    let disc = equidistribution_stats(d, level)?;
    Ok(format!("{d},{},{},", class_number(d)?, sigf(disc, 6)))
}

fn minoration_row(d: i64, prec: u32) -> Result<String> {
    let rep = l_report(d, prec)?;
    let wp = prec + 32;
    let floor = Float::with_val(wp, -d).ln() / 3u32;
    let margin = Float::with_val(wp, &rep.script_ld - &floor).to_f64();
    let lo = Float::with_val(wp, &rep.script_ld) - &rep.script_ld_err;
    let hi = Float::with_val(wp, &rep.script_ld) + &rep.script_ld_err;
    let (pass, note) = if lo > floor {
        ("1", "")
    } else if hi < floor {
        ("0", "")
    } else {
        ("", "undecided at this precision; raise --prec")
    };
    Ok(format!(
        "{d},{},{},{},{},{pass},{note}",
        sig(&rep.script_ld, 18),
        sig(&rep.script_ld_err, 3),
        sig(&floor, 18),
        sigf(margin, 6),
    ))
}

fn points_row(e: &CurveModel, d: i64, prec: u32, denom_bound: u64) -> Result<String> {
    let trace = heegner_point(e, d, prec, denom_bound)?;
    let proxy = archimedean_height_proxy(e, d, prec)?;
    let rep = l_report(d, prec)?;
    let wp = prec + 32;
    let predicted = Float::with_val(wp, &rep.script_ld) * 6u32
        / Float::with_val(wp, gamma0_index(e.conductor));
    let hhat = trace.height.as_ref().map(|h| sig(h, 15)).unwrap_or_default();
    let recognized = match &trace.recognized {
        None => String::new(),
        Some(ExactPoint::Infinity) => "infinity".into(),
        Some(ExactPoint::Affine(x, y)) => format!("({};{})", coord(x), coord(y)),
    };
    let non_torsion = trace
        .non_torsion
        .map(|b| u8::from(b).to_string())
        .unwrap_or_default();
    Ok(format!(
        "{d},{},{},{},{hhat},{recognized},{non_torsion},",
        trace.class_number,
        sig(&proxy, 15),
        sig(&predicted, 15),
    ))
}

fn compute_row(cfg: &SweepConfig, task: Task, d: i64) -> Result<String> {
    match task {
        Task::Signs => signs_row(cfg.curve.as_ref().expect("validated"), d),
        Task::Heights => heights_row(d, cfg.level, cfg.prec),
        Task::Eta => eta_row(d, cfg.prec),
        Task::Equidist => equidist_row(d, cfg.level),
        Task::Minoration => minoration_row(d, cfg.prec),
        Task::Points => points_row(
            cfg.curve.as_ref().expect("validated"),
            d,
            cfg.prec,
            cfg.denom_bound,
        ),
    }
}

fn run_task(cfg: &SweepConfig, task: Task, discs: &[i64]) -> Result<TaskOutcome> {
    let path = cfg.out.join(format!("{}.csv", task.name()));
    let header = cfg.header(task);
    let (file, reused) = prepare_file(&path, &header, discs)?;
    let missing = &discs[reused..];
    let mut writer = std::io::BufWriter::new(file);
    let inconsistent = AtomicBool::new(false);
    if missing.is_empty() {
        return Ok(TaskOutcome {
            reused,
            computed: 0,
            inconsistent: false,
        });
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<BTreeMap<usize, String>> = Mutex::new(BTreeMap::new());
    let ready = Condvar::new();
    let workers = cfg.jobs.min(missing.len());
    std::thread::scope(|s| -> Result<()> {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= missing.len() {
                    break;
                }
                let d = missing[i];
                let row = compute_row(cfg, task, d).unwrap_or_else(|e| {
                    if matches!(e, Error::Inconsistent(_)) {
                        inconsistent.store(true, Ordering::SeqCst);
                    }
                    error_row(d, task, &e)
                });
                slots.lock().unwrap().insert(i, row);
                ready.notify_all();
            });
        }
        // Single ordered writer: rows reach the file strictly in
        // canonical order, so the file is always a clean prefix.
        let mut want = 0usize;
        let mut guard = slots.lock().unwrap();
        while want < missing.len() {
            match guard.remove(&want) {
                Some(row) => {
                    drop(guard);
                    writeln!(writer, "{row}").map_err(|e| io_err(&path, e))?;
                    writer.flush().map_err(|e| io_err(&path, e))?;
                    want += 1;
                    guard = slots.lock().unwrap();
                }
                None => guard = ready.wait(guard).unwrap(),
            }
        }
        Ok(())
    })?;
    Ok(TaskOutcome {
        reused,
        computed: missing.len(),
        inconsistent: inconsistent.load(Ordering::SeqCst),
    })
}

/// Run every selected task over the range. Exit code 0, or 2 when any
/// recorded per-row failure was an internal consistency error.
pub fn run_sweep(cfg: &SweepConfig) -> Result<i32> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    let discs = fundamental_discs(cfg.dmin, cfg.dmax);
    let mut any_inconsistent = false;
    for task in Task::ALL.into_iter().filter(|t| cfg.tasks.contains(t)) {
        let outcome = run_task(cfg, task, &discs)?;
        eprintln!(
            "{}: {} rows ({} reused, {} computed) -> {}",
            task.name(),
            discs.len(),
            outcome.reused,
            outcome.computed,
            cfg.out.join(format!("{}.csv", task.name())).display(),
        );
        any_inconsistent |= outcome.inconsistent;
    }
    Ok(if any_inconsistent { 2 } else { 0 })
}
