//! C ABI over the `autotherm` crate.
//!
//! Every call returns an [`AtStatus`]. On anything other than `AT_OK` the
//! message is kept per thread and can be copied out with [`at_last_error`].
//! Scenarios live behind an opaque [`AtScenario`] handle that owns the
//! prepared evolution; free it with [`at_scenario_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use autotherm::catalysis;
use autotherm::dynamics::Evolution;
use autotherm::hamiltonian::{builtin_scenario, Builtin, BuiltinOptions, Scenario};
use autotherm::oracles::{self, EllipticArgs};
use autotherm::quadrature::QuadratureConfig;
use autotherm::speed_limits;
use autotherm::thermo;
use autotherm::Error;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtStatus {
    AtOk = 0,
    /// A numerical contract or a quadrature failed.
    AtNumerical = 1,
    /// Malformed scenario, bad parameter, unknown label.
    AtInvalidInput = 2,
    AtNullPointer = 3,
    /// The caller's buffer is too small; the required size was still written.
    AtBufferTooSmall = 4,
    AtIo = 5,
    /// A panic was caught at the boundary.
    AtInternal = 6,
}

/// Built-in example families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtFamily {
    /// One angle.
    AtCmaybe = 0,
    /// Mixing weight and angle.
    AtWernerZx = 1,
    AtWernerXx = 2,
}

/// Opaque scenario handle.
pub struct AtScenario {
    evolution: Evolution,
}

/// One catalysis check.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AtCheck {
    /// NUL-terminated, truncated to fit.
    pub name: [c_char; 32],
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Heat, work and entropy balance at one time. Undefined entries are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AtLedger {
    pub tau: f64,
    pub heat: f64,
    pub work: f64,
    pub energy_change: f64,
    pub entropy_change_system: f64,
    pub entropy_change_memory: f64,
    pub entropy_change_work: f64,
    pub delta_rel: f64,
    pub effective_heat: f64,
    pub landauer_gap: f64,
    pub landauer_margin: f64,
    pub mutual_information: f64,
    pub first_law_residual: f64,
    pub second_law_residual: f64,
    pub memory_energy_residual: f64,
    pub energy_conservation_residual: f64,
}

/// Speed-limit quantities and bound margins at one time. Undefined times are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AtQtsl {
    pub p: f64,
    pub tau: f64,
    pub dist_s: f64,
    pub dist_m: f64,
    pub lambda_s: f64,
    pub lambda_m: f64,
    pub t_s: f64,
    pub t_m: f64,
    pub lambda_star: f64,
    pub t_star: f64,
    pub b_star: f64,
    pub quadrature_error_estimate: f64,
    pub fannes_margin: f64,
    pub dynamical_landauer_margin: f64,
    pub stein_exponent: f64,
    pub hypothesis_bound: f64,
    pub hypothesis_margin: f64,
}

/// Closed-form values for a built-in family; `qtsl` is NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AtClosedForms {
    pub dist_s: f64,
    pub dist_m: f64,
    pub lambda_s: f64,
    pub lambda_m: f64,
    pub scaled_distance: f64,
    pub scaled_norm: f64,
    pub qtsl: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> AtStatus {
    match err {
        Error::Contract { .. } | Error::Quadrature { .. } => AtStatus::AtNumerical,
        Error::Io(_) => AtStatus::AtIo,
        _ => AtStatus::AtInvalidInput,
    }
}

enum Failure {
    Core(Error),
    Status(AtStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(AtStatus::AtNullPointer, format!("{what} is null"))
}

/// Runs `body`, catching panics and recording errors.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> AtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            AtStatus::AtOk
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            AtStatus::AtInternal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(AtStatus::AtInvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(sc: *const AtScenario) -> Result<&'a AtScenario, Failure> {
    sc.as_ref().ok_or_else(|| null("scenario"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn emit(scenario: Scenario, out: *mut *mut AtScenario) -> Result<(), Failure> {
    let slot = out_ref(out, "out")?;
    let evolution = Evolution::new(&scenario)?;
    *slot = Box::into_raw(Box::new(AtScenario { evolution }));
    Ok(())
}

fn builtin(family: AtFamily, first: f64, second: f64) -> Builtin {
    match family {
        AtFamily::AtCmaybe => Builtin::Cmaybe { theta: first },
        AtFamily::AtWernerZx => Builtin::WernerZx { lambda: first, phi: second },
        AtFamily::AtWernerXx => Builtin::WernerXx { lambda: first, phi: second },
    }
}

fn quad_config(tol: f64) -> QuadratureConfig {
    let mut q = QuadratureConfig::default();
    if tol > 0.0 {
        q.tol = tol;
    }
    q
}

fn or_nan(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full length including the NUL, so a call
/// with `len = 0` sizes the buffer.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn at_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn at_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a scenario TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_scenario_from_file(path: *const c_char, out: *mut *mut AtScenario) -> AtStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        emit(Scenario::from_path(Path::new(path))?, out)
    })
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_scenario_from_toml(text: *const c_char, out: *mut *mut AtScenario) -> AtStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        emit(Scenario::from_toml_str(text)?, out)
    })
}

/// Builds a built-in family member. `first` is the angle for the C-maybe
/// family and the mixing weight otherwise; `second` is the Werner angle and
/// ignored for C-maybe.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_scenario_builtin(
    family: AtFamily,
    first: f64,
    second: f64,
    bath_coupling: bool,
    out: *mut *mut AtScenario,
) -> AtStatus {
    guard(|| {
        let options = BuiltinOptions {
            system_bath_coupling: bath_coupling,
        };
        emit(builtin_scenario(builtin(family, first, second), options)?, out)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sc` must come from one of the constructors and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn at_scenario_free(sc: *mut AtScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Dimension of the subsystem `label` (`bath`, `system`, `memory`, `work`).
///
/// # Safety
/// Pointers must be valid; `label` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn at_scenario_dim(sc: *const AtScenario, label: *const c_char, out: *mut usize) -> AtStatus {
    guard(|| {
        let sc = handle(sc)?;
        let label = str_arg(label, "label")?;
        *out_ref(out, "out")? = sc.evolution.scenario().dim(label)?;
        Ok(())
    })
}

/// Runs every catalysis check at `tau`. Records go to `records` (up to
/// `capacity`); `count` receives the number of checks and `all_pass` whether
/// all of them passed. Returns `AT_BUFFER_TOO_SMALL` when `capacity < count`.
///
/// # Safety
/// `records` must be valid for `capacity` entries (or null with capacity 0);
/// `count` and `all_pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_verify(
    sc: *const AtScenario,
    tau: f64,
    n_max: usize,
    records: *mut AtCheck,
    capacity: usize,
    count: *mut usize,
    all_pass: *mut bool,
) -> AtStatus {
    guard(|| {
        let sc = handle(sc)?;
        let count = out_ref(count, "count")?;
        let all_pass = out_ref(all_pass, "all_pass")?;
        let report = catalysis::verify(sc.evolution.scenario(), tau, n_max)?;
        let rows = report.records();
        *count = rows.len();
        *all_pass = rows.iter().all(|r| r.pass);
        if capacity < rows.len() {
            return Err(Failure::Status(
                AtStatus::AtBufferTooSmall,
                format!("{} records, room for {capacity}", rows.len()),
            ));
        }
        if records.is_null() {
            return Err(null("records"));
        }
        for (i, r) in rows.iter().enumerate() {
            let mut name = [0 as c_char; 32];
            for (dst, &b) in name.iter_mut().zip(r.name.as_bytes().iter().take(31)) {
                *dst = b as c_char;
            }
            *records.add(i) = AtCheck {
                name,
                residual: r.residual,
                threshold: r.threshold,
                pass: r.pass,
            };
        }
        Ok(())
    })
}

/// Thermodynamic ledger at `tau`.
///
/// # Safety
/// `sc` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn at_ledger(sc: *const AtScenario, tau: f64, out: *mut AtLedger) -> AtStatus {
    guard(|| {
        let sc = handle(sc)?;
        let out = out_ref(out, "out")?;
        let l = thermo::ledger(&sc.evolution, tau)?;
        *out = AtLedger {
            tau: l.tau,
            heat: l.heat,
            work: l.work,
            energy_change: l.energy_change,
            entropy_change_system: l.entropy_change_system,
            entropy_change_memory: l.entropy_change_memory,
            entropy_change_work: l.entropy_change_work,
            delta_rel: or_nan(l.delta_rel),
            effective_heat: l.effective_heat,
            landauer_gap: l.landauer_gap,
            landauer_margin: l.landauer_margin,
            mutual_information: l.mutual_information,
            first_law_residual: l.first_law_residual,
            second_law_residual: l.second_law_residual,
            memory_energy_residual: l.memory_energy_residual,
            energy_conservation_residual: l.energy_conservation_residual,
        };
        Ok(())
    })
}

/// Speed limit of Schatten order `p` (use `INFINITY` for the operator norm)
/// at `tau`, with the Fannes, Landauer and hypothesis-testing margins.
/// `quad_tol <= 0` keeps the default quadrature tolerance.
///
/// # Safety
/// `sc` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn at_qtsl(sc: *const AtScenario, p: f64, tau: f64, quad_tol: f64, out: *mut AtQtsl) -> AtStatus {
    guard(|| {
        let sc = handle(sc)?;
        let out = out_ref(out, "out")?;
        let r = speed_limits::qtsl_report(&sc.evolution, p, tau, &quad_config(quad_tol))?;
        let q = &r.qtsl;
        *out = AtQtsl {
            p: q.p,
            tau: q.tau,
            dist_s: q.dist_s,
            dist_m: q.dist_m,
            lambda_s: q.lambda_s,
            lambda_m: q.lambda_m,
            t_s: or_nan(q.t_s),
            t_m: or_nan(q.t_m),
            lambda_star: q.lambda_star,
            t_star: or_nan(q.t_star),
            b_star: q.b_star,
            quadrature_error_estimate: q.quadrature_error_estimate,
            fannes_margin: r.fannes_margin,
            dynamical_landauer_margin: r.dynamical_landauer_margin,
            stein_exponent: r.hypothesis.stein_exponent,
            hypothesis_bound: r.hypothesis.upper_bound,
            hypothesis_margin: r.hypothesis.margin,
        };
        Ok(())
    })
}

/// Reduced state of subsystem `label` at time `t`, written row-major as
/// interleaved (re, im) pairs. `capacity` counts doubles and must be at least
/// 2·d²; `dim` receives d either way.
///
/// # Safety
/// `data` must be valid for `capacity` doubles; `dim` writable.
#[no_mangle]
pub unsafe extern "C" fn at_reduced_state(
    sc: *const AtScenario,
    t: f64,
    label: *const c_char,
    data: *mut f64,
    capacity: usize,
    dim: *mut usize,
) -> AtStatus {
    guard(|| {
        let sc = handle(sc)?;
        let label = str_arg(label, "label")?;
        let dim = out_ref(dim, "dim")?;
        let rho = sc.evolution.reduced_state(t, label)?;
        let m = rho.matrix();
        let d = m.nrows();
        *dim = d;
        if capacity < 2 * d * d {
            return Err(Failure::Status(
                AtStatus::AtBufferTooSmall,
                format!("need {} doubles, got {capacity}", 2 * d * d),
            ));
        }
        if data.is_null() {
            return Err(null("data"));
        }
        for i in 0..d {
            for j in 0..d {
                let z = m[(i, j)];
                *data.add(2 * (i * d + j)) = z.re;
                *data.add(2 * (i * d + j) + 1) = z.im;
            }
        }
        Ok(())
    })
}

/// Incomplete elliptic integral of the second kind, ∫₀^φ √(1 − m sin²x) dx.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_ellipe(phi: f64, m: f64, out: *mut f64) -> AtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = oracles::ellipe_incomplete(EllipticArgs::new(phi, m))?;
        Ok(())
    })
}

/// ∫₀^τ |cos 2t| dt.
#[no_mangle]
pub extern "C" fn at_abs_cos_integral(tau: f64) -> f64 {
    oracles::abs_cos_integral(tau)
}

/// ∫₀^τ |sin 2t| dt.
#[no_mangle]
pub extern "C" fn at_abs_sin_integral(tau: f64) -> f64 {
    oracles::abs_sin_integral(tau)
}

/// Closed-form distances, time-averaged trace norms and speed-limit ratio
/// of a built-in family at `tau > 0` (parameters as in [`at_scenario_builtin`]).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_closed_forms(
    family: AtFamily,
    first: f64,
    second: f64,
    tau: f64,
    out: *mut AtClosedForms,
) -> AtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let f = oracles::family_closed_forms(&builtin(family, first, second), tau)?;
        *out = AtClosedForms {
            dist_s: f.dist_s,
            dist_m: f.dist_m,
            lambda_s: f.lambda_s,
            lambda_m: f.lambda_m,
            scaled_distance: f.scaled_distance,
            scaled_norm: f.scaled_norm,
            qtsl: or_nan(f.qtsl),
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_message_is_sized_and_truncated() {
        let mut h = ptr::null_mut();
        let st = unsafe { at_scenario_from_toml(c"not = [valid".as_ptr(), &mut h) };
        assert_eq!(st, AtStatus::AtInvalidInput);
        assert!(h.is_null());
        let need = unsafe { at_last_error(ptr::null_mut(), 0) };
        assert!(need > 1);
        let mut small = [1 as c_char; 4];
        unsafe { at_last_error(small.as_mut_ptr(), small.len()) };
        assert_eq!(small[3], 0);
    }

    #[test]
    fn panics_do_not_cross() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, AtStatus::AtInternal);
        let mut buf = [0 as c_char; 64];
        unsafe { at_last_error(buf.as_mut_ptr(), buf.len()) };
        let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }
}
