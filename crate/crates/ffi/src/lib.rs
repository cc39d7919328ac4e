//! C ABI for the bosegas simulator.
//!
//! Every entry point returns a [`BgStatus`]. On failure a description is kept
//! per thread and can be copied out with [`bg_last_error_message`]. Panics
//! never cross the boundary; they are reported as [`BgStatus::Internal`].

use bosegas::config::{Config, QuadratureSpec};
use bosegas::dispersion::sphere_kernel;
use bosegas::dynamics::{SimConfig, Simulation};
use bosegas::error::{Error, ErrorFamily};
use bosegas::friction::{coupling_force_scalar, friction_limit_scalar, RadialQuadrature};
use bosegas::potential::RadialPotential;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of a call. Values match the command-line exit codes where both exist.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgStatus {
    Ok = 0,
    Io = 1,
    Config = 2,
    Numerical = 3,
    Monitor = 4,
    /// A required pointer was null or a string was not UTF-8.
    InvalidArgument = 5,
    /// An output buffer was too small.
    BufferTooSmall = 6,
    /// A panic was caught inside the library.
    Internal = 7,
}

impl From<&Error> for BgStatus {
    fn from(e: &Error) -> Self {
        match e.family() {
            ErrorFamily::Config => BgStatus::Config,
            ErrorFamily::Numerical => BgStatus::Numerical,
            ErrorFamily::Monitor => BgStatus::Monitor,
            ErrorFamily::Io => BgStatus::Io,
        }
    }
}

/// Opaque simulation handle.
pub struct BgSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: BgStatus, msg: impl Into<String>) -> BgStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> BgStatus {
    fail(BgStatus::from(&e), e.to_string())
}

/// Run `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), BgStatus>) -> BgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BgStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into());
            fail(BgStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

fn check<T>(r: bosegas::error::Result<T>) -> Result<T, BgStatus> {
    r.map_err(from_error)
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), BgStatus> {
    if p.is_null() {
        Err(fail(BgStatus::InvalidArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn radial(n: f64, width: f64, rho0: f64) -> Result<RadialPotential, BgStatus> {
    check(RadialPotential::new(n, width, rho0))
}

/// Copy the last error message of this thread, NUL-terminated, into `buf`.
/// Returns the message length in bytes without the terminator; if this is
/// not less than `len` the message is truncated. `buf` may be null when
/// `len` is 0, to query the length.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Build a simulation from a TOML configuration with `grid`, `potential`,
/// `initial` and `time` tables. On success `*out` owns a handle that must be
/// released with [`bg_simulation_free`].
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_simulation_new(config_toml: *const c_char, out: *mut *mut BgSimulation) -> BgStatus {
    guard(|| {
        non_null(config_toml, "config_toml")?;
        non_null(out, "out")?;
        *out = std::ptr::null_mut();
        let text = CStr::from_ptr(config_toml).to_str().map_err(|_| fail(BgStatus::InvalidArgument, "config_toml is not UTF-8"))?;
        let cfg = check(Config::parse(text))?;
        let sc = check(SimConfig::from_config(&cfg))?;
        let inner = check(Simulation::from_config(&sc))?;
        *out = Box::into_raw(Box::new(BgSimulation { inner }));
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from [`bg_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bg_simulation_free(sim: *mut BgSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advance by `steps` time steps. Fails with `Monitor` if the state stops
/// being finite; the handle then holds the last state reached.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bg_simulation_step(sim: *mut BgSimulation, steps: u64) -> BgStatus {
    guard(|| {
        non_null(sim, "sim")?;
        let s = &mut (*sim).inner;
        for _ in 0..steps {
            s.step();
            if !s.particle.x.iter().chain(&s.particle.p).all(|v| v.is_finite()) {
                return Err(from_error(Error::NonFinite(format!("particle state at t = {}", s.particle.t))));
            }
        }
        Ok(())
    })
}

/// Spatial dimension of the simulation, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bg_simulation_dim(sim: *const BgSimulation) -> usize {
    if sim.is_null() {
        0
    } else {
        (*sim).inner.particle.p.len()
    }
}

/// Current time, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bg_simulation_time(sim: *const BgSimulation) -> f64 {
    if sim.is_null() {
        f64::NAN
    } else {
        (*sim).inner.particle.t
    }
}

unsafe fn copy_vector(v: &[f64], out: *mut f64, len: usize) -> Result<(), BgStatus> {
    non_null(out, "out")?;
    if len < v.len() {
        return Err(fail(BgStatus::BufferTooSmall, format!("need {} values, got room for {len}", v.len())));
    }
    std::ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
    Ok(())
}

/// Copy the particle position into `out[0..dim]`.
///
/// # Safety
/// `sim` must be a live handle and `out` point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn bg_simulation_position(sim: *const BgSimulation, out: *mut f64, len: usize) -> BgStatus {
    guard(|| {
        non_null(sim, "sim")?;
        copy_vector(&(*sim).inner.particle.x, out, len)
    })
}

/// Copy the particle momentum into `out[0..dim]`.
///
/// # Safety
/// `sim` must be a live handle and `out` point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn bg_simulation_momentum(sim: *const BgSimulation, out: *mut f64, len: usize) -> BgStatus {
    guard(|| {
        non_null(sim, "sim")?;
        copy_vector(&(*sim).inner.particle.p, out, len)
    })
}

/// Total energy of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_simulation_hamiltonian(sim: *const BgSimulation, out: *mut f64) -> BgStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        *out = (*sim).inner.hamiltonian();
        Ok(())
    })
}

/// Friction at speed `speed` in the limit of vanishing regularization, for
/// the Gaussian family with exponent `n`, width `width` and density `rho0`
/// in dimension `dim`. Zero below the sound speed; `Config` at it.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_friction_limit(n: f64, width: f64, rho0: f64, dim: usize, speed: f64, out: *mut f64) -> BgStatus {
    guard(|| {
        non_null(out, "out")?;
        let pot = radial(n, width, rho0)?;
        *out = check(friction_limit_scalar(speed, &pot, dim))?;
        Ok(())
    })
}

/// Regularized coupling force at speed `speed` and regularization `eps`,
/// with the default quadrature in dimension `dim`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_coupling_force(n: f64, width: f64, rho0: f64, dim: usize, speed: f64, eps: f64, out: *mut f64) -> BgStatus {
    guard(|| {
        non_null(out, "out")?;
        let pot = radial(n, width, rho0)?;
        let quad = check(RadialQuadrature::new(&QuadratureSpec { dim, ..QuadratureSpec::default() }, &pot))?;
        *out = check(coupling_force_scalar(speed, &pot, eps, &quad))?;
        Ok(())
    })
}

/// Fourier transform of the surface measure of the unit sphere in
/// dimension `dim`, evaluated at radius `r`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_sphere_kernel(dim: usize, r: f64, out: *mut f64) -> BgStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = check(sphere_kernel(dim, r))?;
        Ok(())
    })
}
