//! C ABI for the reaching environment, saved networks, shaping helpers and
//! the experiment runner.
//!
//! Conventions:
//! * Every fallible function returns an [`ApfStatus`]; `APF_STATUS_OK` is 0.
//!   On failure a message is available from [`apf_last_error`] on the same
//!   thread.
//! * Objects are opaque handles created by `*_new`/`*_load` and released by
//!   the matching `*_free`.
//! * States are 6 doubles `(x, y, z, j1, j2, j4)`, actions 3 doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use apf_ddpg::apf::{self, ShapingForm};
use apf_ddpg::env::{self, Action, ArmEnv, EnvState, Terminal};
use apf_ddpg::harness::{run_experiment, ExperimentConfig};
use apf_ddpg::nn::DenseNet;
use apf_ddpg::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    NonFinite = 5,
    EpisodeOver = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfTerminal {
    None = 0,
    Goal = 1,
    Collision = 2,
    Timeout = 3,
}

impl From<Terminal> for ApfTerminal {
    fn from(t: Terminal) -> Self {
        match t {
            Terminal::None => ApfTerminal::None,
            Terminal::Goal => ApfTerminal::Goal,
            Terminal::Collision => ApfTerminal::Collision,
            Terminal::Timeout => ApfTerminal::Timeout,
        }
    }
}

/// Opaque reaching environment.
pub struct ApfEnv {
    inner: ArmEnv,
}

/// Opaque dense network (an actor, critic or potential network).
pub struct ApfNet {
    inner: DenseNet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> ApfStatus {
    match e {
        Error::Io { .. } => ApfStatus::Io,
        Error::Parse(_) | Error::Csv(_) => ApfStatus::Parse,
        Error::NonFinite(_) => ApfStatus::NonFinite,
        Error::EpisodeOver(_) => ApfStatus::EpisodeOver,
        _ => ApfStatus::InvalidArgument,
    }
}

fn fail(status: ApfStatus, msg: impl Into<String>) -> ApfStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), ApfStatus>) -> ApfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ApfStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(ApfStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, ApfStatus>;
}

impl<T> OrStatus<T> for apf_ddpg::Result<T> {
    fn or_status(self) -> Result<T, ApfStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), ApfStatus> {
    if p.is_null() {
        Err(fail(ApfStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, ApfStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ApfStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn config_from(json: *const c_char) -> Result<ExperimentConfig, ApfStatus> {
    if json.is_null() {
        return Ok(ExperimentConfig::default());
    }
    ExperimentConfig::from_json(read_str(json, "config")?).or_status()
}

unsafe fn write_state(out: *mut f64, s: &EnvState) {
    ptr::copy_nonoverlapping(s.to_array().as_ptr(), out, EnvState::DIM);
}

unsafe fn read_state(p: *const f64) -> EnvState {
    let mut v = [0.0; 6];
    ptr::copy_nonoverlapping(p, v.as_mut_ptr(), 6);
    EnvState::from_array(v)
}

/// Message describing the last failure on this thread, or NULL.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn apf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates an environment from a JSON experiment config (NULL for defaults).
///
/// # Safety
/// `config_json` must be NULL or a NUL-terminated string; `out` must be a
/// valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn apf_env_new(config_json: *const c_char, out: *mut *mut ApfEnv) -> ApfStatus {
    guard(|| {
        non_null(out, "out")?;
        let config = config_from(config_json)?;
        let inner = ArmEnv::new(config.env_config()).or_status()?;
        *out = Box::into_raw(Box::new(ApfEnv { inner }));
        Ok(())
    })
}

/// # Safety
/// `env` must be NULL or a handle from [`apf_env_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn apf_env_free(env: *mut ApfEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Resets to the fixed start pose and writes the 6-double state.
///
/// # Safety
/// `env` must be a live handle; `out_state` must point to 6 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn apf_env_reset(env: *mut ApfEnv, out_state: *mut f64) -> ApfStatus {
    guard(|| {
        non_null(env, "env")?;
        non_null(out_state, "out_state")?;
        let s = (*env).inner.reset();
        write_state(out_state, &s);
        Ok(())
    })
}

/// Applies one action (3 doubles, clamped to ±pi/16) and reports the next
/// state, the environment reward and the terminal tag.
///
/// # Safety
/// `env` must be a live handle; `action` must point to 3 readable doubles;
/// `out_state` to 6 writable doubles; `out_reward` and `out_terminal` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn apf_env_step(
    env: *mut ApfEnv,
    action: *const f64,
    out_state: *mut f64,
    out_reward: *mut f64,
    out_terminal: *mut ApfTerminal,
) -> ApfStatus {
    guard(|| {
        non_null(env, "env")?;
        non_null(action, "action")?;
        non_null(out_state, "out_state")?;
        non_null(out_reward, "out_reward")?;
        non_null(out_terminal, "out_terminal")?;
        let mut deltas = [0.0; 3];
        ptr::copy_nonoverlapping(action, deltas.as_mut_ptr(), 3);
        let outcome = (*env).inner.step(&Action::new(deltas)).or_status()?;
        write_state(out_state, &outcome.next_state);
        *out_reward = outcome.reward;
        *out_terminal = outcome.terminal.into();
        Ok(())
    })
}

/// Banded reward for a tip-to-goal distance; a collision costs `max_steps`.
#[no_mangle]
pub extern "C" fn apf_env_reward(distance: f64, collided: bool, max_steps: usize) -> f64 {
    env::env_reward(distance, collided, max_steps)
}

/// Writes the integer grid cell of a tip position (3 doubles).
///
/// # Safety
/// `tip` must point to 3 readable doubles and `out_cell` to 3 writable ints.
#[no_mangle]
pub unsafe extern "C" fn apf_map_state(tip: *const f64, cell_size: f64, out_cell: *mut i32) -> ApfStatus {
    guard(|| {
        non_null(tip, "tip")?;
        non_null(out_cell, "out_cell")?;
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(fail(ApfStatus::InvalidArgument, "cell_size must be positive"));
        }
        let mut t = [0.0; 3];
        ptr::copy_nonoverlapping(tip, t.as_mut_ptr(), 3);
        if t.iter().any(|c| !c.is_finite()) {
            return Err(fail(ApfStatus::NonFinite, "tip position"));
        }
        let cell = apf::map_state(&EnvState { tip: t, joints: [0.0; 3] }, cell_size);
        ptr::copy_nonoverlapping([cell.cx, cell.cy, cell.cz].as_ptr(), out_cell, 3);
        Ok(())
    })
}

/// `(n_good - n_bad) / (n_good + n_bad)`; fails when both are zero.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apf_target(n_good: u32, n_bad: u32, out: *mut f64) -> ApfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = apf::apf_target(n_good, n_bad).or_status()?;
        Ok(())
    })
}

/// Loads a network saved by the trainer.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apf_net_load(path: *const c_char, out: *mut *mut ApfNet) -> ApfStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = read_str(path, "path")?;
        let inner = DenseNet::load(path).or_status()?;
        *out = Box::into_raw(Box::new(ApfNet { inner }));
        Ok(())
    })
}

/// # Safety
/// `net` must be NULL or a handle from [`apf_net_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn apf_net_free(net: *mut ApfNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn apf_net_input_size(net: *const ApfNet) -> usize {
    if net.is_null() {
        return 0;
    }
    (*net).inner.input_size()
}

/// # Safety
/// `net` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn apf_net_output_size(net: *const ApfNet) -> usize {
    if net.is_null() {
        return 0;
    }
    (*net).inner.output_size()
}

/// Evaluates the network on one input vector.
///
/// # Safety
/// `input` must point to `input_len` readable doubles and `output` to
/// `output_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn apf_net_forward(
    net: *const ApfNet,
    input: *const f64,
    input_len: usize,
    output: *mut f64,
    output_len: usize,
) -> ApfStatus {
    guard(|| {
        non_null(net, "net")?;
        non_null(input, "input")?;
        non_null(output, "output")?;
        let net = &(*net).inner;
        if output_len != net.output_size() {
            return Err(fail(
                ApfStatus::InvalidArgument,
                format!("output_len {output_len}, network produces {}", net.output_size()),
            ));
        }
        let x = std::slice::from_raw_parts(input, input_len);
        let y = net.forward(x).or_status()?;
        ptr::copy_nonoverlapping(y.as_ptr(), output, y.len());
        Ok(())
    })
}

/// Shaping reward `gamma * phi(Z(s')) - phi(Z(s))` from a potential network
/// (`discounted = false` drops the `gamma`).
///
/// # Safety
/// `net` must be a live handle with 3 inputs and 1 output; `state` and
/// `next_state` must point to 6 readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apf_shaping_reward(
    net: *const ApfNet,
    state: *const f64,
    next_state: *const f64,
    gamma: f64,
    discounted: bool,
    cell_size: f64,
    out: *mut f64,
) -> ApfStatus {
    guard(|| {
        non_null(net, "net")?;
        non_null(state, "state")?;
        non_null(next_state, "next_state")?;
        non_null(out, "out")?;
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(fail(ApfStatus::InvalidArgument, "cell_size must be positive"));
        }
        let net = &(*net).inner;
        if net.input_size() != 3 || net.output_size() != 1 {
            return Err(fail(ApfStatus::InvalidArgument, "potential network must map 3 -> 1"));
        }
        let form = if discounted {
            ShapingForm::Discounted
        } else {
            ShapingForm::Undiscounted
        };
        let (s, s2) = (read_state(state), read_state(next_state));
        *out = apf::shaping_reward(net, &s, &s2, gamma, form, cell_size).or_status()?;
        Ok(())
    })
}

/// Runs a full experiment described by a JSON config (NULL for defaults).
/// If `out_dir` is non-NULL it overrides the config's output directory.
/// The episode CSV and saved networks are written there.
///
/// # Safety
/// `config_json` and `out_dir` must each be NULL or NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn apf_run_experiment(config_json: *const c_char, out_dir: *const c_char) -> ApfStatus {
    guard(|| {
        let mut config = config_from(config_json)?;
        if !out_dir.is_null() {
            config.out_dir = PathBuf::from(read_str(out_dir, "out_dir")?);
        }
        run_experiment(&config).or_status()?;
        Ok(())
    })
}
