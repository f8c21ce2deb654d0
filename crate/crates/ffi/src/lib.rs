//! C ABI for netforge.
//!
//! Every fallible function returns an [`NfStatus`]. On failure a message is
//! available from [`nf_last_error_message`] on the same thread until the
//! next call into the library. Networks are opaque [`NfNetwork`] handles
//! owned by the caller and released with [`nf_network_free`]. Array
//! arguments are `(pointer, length)` pairs; conductivity and flux arrays
//! follow the edge order of the network, which is the order the edges were
//! given in.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use netforge::io::network_from_json;
use netforge::optimizer::{evaluate, OptimConfig};
use netforge::spectral::{laplacian, spectral_decompose};
use netforge::{energy, optimize, solve_kirchhoff, Conductivities, ModelParams, NetError, Network, Termination};

/// Result codes. `NF_STATUS_OK` is zero.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidNetwork = 3,
    Parse = 4,
    Unsolvable = 5,
    IllConditioned = 6,
    DisconnectedSupport = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

/// How an optimization run ended.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NfTermination {
    Completed = 0,
    Restarted = 1,
    Diverged = 2,
    RestartsExhausted = 3,
}

/// Opaque network handle.
pub struct NfNetwork {
    inner: Network,
}

/// Optimizer settings. Start from [`nf_optim_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NfOptimConfig {
    pub tau0: f64,
    pub iters: u64,
    pub seed: u64,
    pub trace_stride: u64,
    pub restart_shrink: f64,
    pub max_restarts: u32,
    pub divergence_factor: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NfOptimResult {
    pub best_f: f64,
    /// Iteration of the best iterate, 0 for the initial guess.
    pub best_k: u64,
    pub restarts: u32,
    pub termination: NfTermination,
    /// Iteration at which the run stopped early, 0 if it completed.
    pub stopped_at: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &NetError) -> NfStatus {
    match err {
        NetError::Parse(_) => NfStatus::Parse,
        NetError::Unsolvable => NfStatus::Unsolvable,
        NetError::IllConditioned { .. } => NfStatus::IllConditioned,
        NetError::DisconnectedSupport => NfStatus::DisconnectedSupport,
        NetError::EmptyNetwork
        | NetError::VertexOutOfRange { .. }
        | NetError::SelfLoop(_)
        | NetError::DuplicateEdge(..)
        | NetError::NonpositiveLength { .. }
        | NetError::DisconnectedGraph { .. }
        | NetError::UnbalancedSources { .. } => NfStatus::InvalidNetwork,
        _ => NfStatus::InvalidArgument,
    }
}

struct Failure(NfStatus, String);

impl From<NetError> for Failure {
    fn from(e: NetError) -> Failure {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records any error, and turns panics into `NfStatus::Internal`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error".into());
            NfStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(NfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn network<'a>(net: *const NfNetwork) -> Result<&'a Network, Failure> {
    net.as_ref().map(|n| &n.inner).ok_or_else(|| null("network"))
}

unsafe fn conductivities(net: &Network, c: *const f64, len: usize) -> Result<Conductivities, Failure> {
    if len != net.edge_count() {
        return Err(Failure(
            NfStatus::InvalidArgument,
            format!("expected {} conductivities, got {len}", net.edge_count()),
        ));
    }
    Ok(Conductivities::new(input(c, len, "conductivities")?.to_vec())?)
}

fn check_len(what: &str, expected: usize, actual: usize) -> Result<(), Failure> {
    if expected == actual {
        Ok(())
    } else {
        Err(Failure(
            NfStatus::InvalidArgument,
            format!("{what}: expected length {expected}, got {actual}"),
        ))
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn nf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn nf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a network from `m` edges `(edge_u[i], edge_v[i])` with lengths
/// `lengths[i]` and `n` vertex sources. `lengths` may be null for unit
/// lengths. On success `*out` receives a handle to free with
/// [`nf_network_free`].
///
/// # Safety
/// Non-null pointers must reference arrays of the stated lengths, and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn nf_network_new(
    n: usize,
    edge_u: *const usize,
    edge_v: *const usize,
    lengths: *const f64,
    m: usize,
    sources: *const f64,
    out: *mut *mut NfNetwork,
) -> NfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let us = input(edge_u, m, "edge_u")?;
        let vs = input(edge_v, m, "edge_v")?;
        let ls = if lengths.is_null() {
            None
        } else {
            Some(input(lengths, m, "lengths")?)
        };
        let edges = (0..m).map(|i| (us[i], vs[i], ls.map_or(1.0, |l| l[i]))).collect();
        let sources = input(sources, n, "sources")?.to_vec();
        let inner = Network::new(n, edges, sources, None)?;
        *out = Box::into_raw(Box::new(NfNetwork { inner }));
        Ok(())
    })
}

/// Parses a graph spec JSON document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_network_from_json(json: *const c_char, out: *mut *mut NfNetwork) -> NfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure(NfStatus::Parse, "json is not valid UTF-8".into()))?;
        let inner = network_from_json(text)?;
        *out = Box::into_raw(Box::new(NfNetwork { inner }));
        Ok(())
    })
}

/// Releases a network. Null is ignored.
///
/// # Safety
/// `net` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn nf_network_free(net: *mut NfNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of vertices, 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nf_network_vertex_count(net: *const NfNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.vertex_count())
}

/// Number of edges, 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nf_network_edge_count(net: *const NfNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.edge_count())
}

/// Solves the Kirchhoff system for conductivities `c` (length = edge count).
/// `*solvable` is set to 0 when the sources cannot be routed through the
/// support of `c`; pressures and fluxes are then left untouched. Otherwise
/// pressures (length = vertex count, zero mean per component) and fluxes
/// (length = edge count, positive from `u` to `v`) are written.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn nf_solve(
    net: *const NfNetwork,
    c: *const f64,
    c_len: usize,
    pressures: *mut f64,
    pressures_len: usize,
    fluxes: *mut f64,
    fluxes_len: usize,
    solvable: *mut bool,
) -> NfStatus {
    guard(|| {
        let net = network(net)?;
        let c = conductivities(net, c, c_len)?;
        check_len("pressures", net.vertex_count(), pressures_len)?;
        check_len("fluxes", net.edge_count(), fluxes_len)?;
        if solvable.is_null() {
            return Err(null("solvable"));
        }
        let p_out = output(pressures, pressures_len, "pressures")?;
        let q_out = output(fluxes, fluxes_len, "fluxes")?;
        let flow = solve_kirchhoff(net, &c)?;
        *solvable = flow.solvable;
        if flow.solvable {
            p_out.copy_from_slice(&flow.pressures);
            q_out.copy_from_slice(&flow.fluxes);
        }
        Ok(())
    })
}

/// Energy `E = Σ Q²L/C + (ν/γ) Σ C^γ L`, or `+inf` when unsolvable.
///
/// # Safety
/// `c` must reference `c_len` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn nf_energy(
    net: *const NfNetwork,
    c: *const f64,
    c_len: usize,
    gamma: f64,
    nu: f64,
    out: *mut f64,
) -> NfStatus {
    guard(|| {
        let net = network(net)?;
        let c = conductivities(net, c, c_len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModelParams::new(gamma, nu, 0.0)?;
        *out = energy(net, &c, &params)?.total().to_f64();
        Ok(())
    })
}

/// Fiedler number of the conductivity Laplacian and its multiplicity.
/// `multiplicity` may be null.
///
/// # Safety
/// `c` must reference `c_len` values; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nf_fiedler(
    net: *const NfNetwork,
    c: *const f64,
    c_len: usize,
    value: *mut f64,
    multiplicity: *mut usize,
) -> NfStatus {
    guard(|| {
        let net = network(net)?;
        let c = conductivities(net, c, c_len)?;
        if value.is_null() {
            return Err(null("value"));
        }
        let spec = spectral_decompose(&laplacian(net, &c, false)?)?;
        *value = spec.fiedler;
        if !multiplicity.is_null() {
            *multiplicity = spec.multiplicity;
        }
        Ok(())
    })
}

/// Modified energy `F = E − μ ℓ (|V|−1)/2 · f[C]` with `γ = 1`, where `ℓ`
/// is the shortest edge length. `+inf` when unsolvable.
///
/// # Safety
/// `c` must reference `c_len` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn nf_modified_energy(
    net: *const NfNetwork,
    c: *const f64,
    c_len: usize,
    nu: f64,
    mu: f64,
    out: *mut f64,
) -> NfStatus {
    guard(|| {
        let net = network(net)?;
        let c = conductivities(net, c, c_len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModelParams::new(1.0, nu, mu)?;
        *out = evaluate(net, &c, &params, Default::default())?.f.to_f64();
        Ok(())
    })
}

/// Default optimizer settings.
#[no_mangle]
pub extern "C" fn nf_optim_config_default() -> NfOptimConfig {
    let d = OptimConfig::default();
    NfOptimConfig {
        tau0: d.tau0,
        iters: d.iters,
        seed: d.seed,
        trace_stride: d.trace_stride,
        restart_shrink: d.restart_shrink,
        max_restarts: d.max_restarts,
        divergence_factor: d.divergence_factor,
    }
}

/// Minimizes `F` with `γ = 1` from a seeded random start. The best
/// conductivities go to `best_c` (length = edge count) and the run summary
/// to `result`. A divergent run still returns `NF_STATUS_OK`; check
/// `result->termination`.
///
/// # Safety
/// `config` and `result` must be valid pointers; `best_c` must reference
/// `best_c_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn nf_optimize(
    net: *const NfNetwork,
    nu: f64,
    mu: f64,
    config: *const NfOptimConfig,
    best_c: *mut f64,
    best_c_len: usize,
    result: *mut NfOptimResult,
) -> NfStatus {
    guard(|| {
        let net = network(net)?;
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        if result.is_null() {
            return Err(null("result"));
        }
        check_len("best_c", net.edge_count(), best_c_len)?;
        let out = output(best_c, best_c_len, "best_c")?;
        let config = OptimConfig {
            tau0: cfg.tau0,
            iters: cfg.iters,
            seed: cfg.seed,
            trace_stride: cfg.trace_stride,
            restart_shrink: cfg.restart_shrink,
            max_restarts: cfg.max_restarts,
            divergence_factor: cfg.divergence_factor,
            ..OptimConfig::default()
        };
        let params = ModelParams::new(1.0, nu, mu)?;
        let run = optimize(net, &params, &config)?;
        out.copy_from_slice(run.best_c.as_slice());
        let (termination, stopped_at) = match run.termination {
            Termination::Completed => (NfTermination::Completed, 0),
            Termination::Restarted { .. } => (NfTermination::Restarted, 0),
            Termination::Diverged { at } => (NfTermination::Diverged, at),
            Termination::RestartsExhausted { at } => (NfTermination::RestartsExhausted, at),
        };
        *result = NfOptimResult {
            best_f: run.best_f,
            best_k: run.best_k,
            restarts: run.restarts,
            termination,
            stopped_at,
        };
        Ok(())
    })
}
