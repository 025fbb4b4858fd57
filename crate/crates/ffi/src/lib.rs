//! C ABI over `ddla`.
//!
//! Clusters are opaque heap handles created by `ddla_cluster_*` constructors
//! and released with `ddla_cluster_free`. Every fallible call returns a
//! `DdlaStatus`; on failure a message is kept per thread and can be read
//! with `ddla_last_error`. Sites cross the boundary as interleaved `a, b`
//! pairs of `int64_t`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ddla::activity::activity_distribution;
use ddla::dynamics::{run_continuous, run_dfpp, run_discrete, Acceptance, ContinuousMode, Sampler};
use ddla::io::{Meta, Snapshot};
use ddla::{Cluster, Error, HarrisSystem, Site};
use rand_chacha::rand_core::SeedableRng;

/// Result of a call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdlaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    EmptyCluster = 3,
    FrozenCluster = 4,
    RejectionOverflow = 5,
    WindowBreach = 6,
    Parse = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdlaSampler {
    Line = 0,
    Edge = 1,
    Exact = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdlaContinuousMode {
    /// Event-driven, walk acceptance.
    Gillespie = 0,
    /// Event-driven, exact escape-probability acceptance.
    GillespieExact = 1,
    /// Replay of the Harris system keyed by the seed.
    Harris = 2,
}

/// Opaque cluster handle.
pub struct DdlaCluster {
    inner: Cluster,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> DdlaStatus {
    match e {
        Error::FrozenCluster => DdlaStatus::FrozenCluster,
        Error::RejectionOverflow { .. } => DdlaStatus::RejectionOverflow,
        Error::EmptyCluster => DdlaStatus::EmptyCluster,
        Error::WindowBreach { .. } => DdlaStatus::WindowBreach,
        Error::Parse { .. } => DdlaStatus::Parse,
        Error::Io { .. } => DdlaStatus::Io,
        Error::LineNotAbove { .. } | Error::TooFewPoints { .. } | Error::InvalidParameter(_) => {
            DdlaStatus::InvalidParameter
        }
    }
}

fn fail(status: DdlaStatus, msg: impl Into<String>) -> DdlaStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), DdlaStatus>) -> DdlaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DdlaStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(DdlaStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> DdlaStatus {
    fail(status_of(&e), e.to_string())
}

fn null(what: &str) -> DdlaStatus {
    fail(DdlaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn cluster_ref<'a>(c: *const DdlaCluster) -> Result<&'a Cluster, DdlaStatus> {
    c.as_ref().map(|c| &c.inner).ok_or_else(|| null("cluster"))
}

unsafe fn cluster_mut<'a>(c: *mut DdlaCluster) -> Result<&'a mut Cluster, DdlaStatus> {
    c.as_mut().map(|c| &mut c.inner).ok_or_else(|| null("cluster"))
}

fn boxed(c: Cluster) -> *mut DdlaCluster {
    Box::into_raw(Box::new(DdlaCluster { inner: c }))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, DdlaStatus> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(DdlaStatus::InvalidParameter, "path is not UTF-8"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ddla_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains a nul byte"),
    };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ddla_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// The one-site cluster at the origin.
#[no_mangle]
pub extern "C" fn ddla_cluster_new_origin() -> *mut DdlaCluster {
    boxed(Cluster::origin())
}

/// A cluster from `n` interleaved `a, b` pairs. Duplicates are merged.
///
/// # Safety
/// `pairs` must point to `2 * n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddla_cluster_from_sites(pairs: *const i64, n: usize, out: *mut *mut DdlaCluster) -> DdlaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if pairs.is_null() && n > 0 {
            return Err(null("pairs"));
        }
        let flat = if n == 0 { &[][..] } else { std::slice::from_raw_parts(pairs, 2 * n) };
        let sites = flat.chunks_exact(2).map(|p| Site::new(p[0], p[1]));
        *out = boxed(Cluster::from_sites(sites));
        Ok(())
    })
}

/// Releases a cluster. NULL is ignored.
///
/// # Safety
/// `c` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ddla_cluster_free(c: *mut DdlaCluster) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of sites; 0 for NULL.
///
/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddla_cluster_len(c: *const DdlaCluster) -> usize {
    c.as_ref().map_or(0, |c| c.inner.len())
}

/// Largest `a + b` over the cluster.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddla_cluster_height(c: *const DdlaCluster, out: *mut i64) -> DdlaStatus {
    guard(|| {
        let c = cluster_ref(c)?;
        if c.is_empty() {
            return Err(lib(Error::EmptyCluster));
        }
        *out.as_mut().ok_or_else(|| null("out"))? = c.height();
        Ok(())
    })
}

/// 1 if the site is in the cluster, 0 otherwise (and for NULL).
///
/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddla_cluster_contains(c: *const DdlaCluster, a: i64, b: i64) -> i32 {
    c.as_ref().is_some_and(|c| c.inner.contains(Site::new(a, b))) as i32
}

/// Writes the sites in lexicographic order as `a, b` pairs. `*written` is
/// always set to the number of sites; if `capacity` (in pairs) is smaller,
/// nothing is copied and `BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `out` must have room for `2 * capacity` values; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddla_cluster_sites(
    c: *const DdlaCluster,
    out: *mut i64,
    capacity: usize,
    written: *mut usize,
) -> DdlaStatus {
    guard(|| {
        let c = cluster_ref(c)?;
        let written = written.as_mut().ok_or_else(|| null("written"))?;
        let sites = c.sorted_sites();
        *written = sites.len();
        if capacity < sites.len() {
            return Err(fail(DdlaStatus::BufferTooSmall, format!("need room for {} sites", sites.len())));
        }
        if out.is_null() && !sites.is_empty() {
            return Err(null("out"));
        }
        for (i, p) in sites.iter().enumerate() {
            *out.add(2 * i) = p.a;
            *out.add(2 * i + 1) = p.b;
        }
        Ok(())
    })
}

/// Adds `n` sites by the discrete dynamics, seeded by `seed`.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddla_grow(c: *mut DdlaCluster, n: u64, sampler: DdlaSampler, seed: u64) -> DdlaStatus {
    guard(|| {
        let c = cluster_mut(c)?;
        let sampler = match sampler {
            DdlaSampler::Line => Sampler::Line,
            DdlaSampler::Edge => Sampler::Edge,
            DdlaSampler::Exact => Sampler::Exact,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        run_discrete(c, n, sampler, &mut rng).map(drop).map_err(lib)
    })
}

/// Runs the continuous-time dynamics to `horizon` in place. `additions`, if
/// not NULL, receives the number of sites added.
///
/// # Safety
/// `c` must be a live handle; `additions` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ddla_grow_continuous(
    c: *mut DdlaCluster,
    horizon: f64,
    mode: DdlaContinuousMode,
    seed: u64,
    additions: *mut u64,
) -> DdlaStatus {
    guard(|| {
        let c = cluster_mut(c)?;
        let mode = match mode {
            DdlaContinuousMode::Gillespie => ContinuousMode::Gillespie(Acceptance::Walk),
            DdlaContinuousMode::GillespieExact => ContinuousMode::Gillespie(Acceptance::ExactProbability),
            DdlaContinuousMode::Harris => ContinuousMode::Harris,
        };
        let trace = run_continuous(c, horizon, mode, seed).map_err(lib)?;
        if let Some(k) = additions.as_mut() {
            *k = trace.len() as u64;
        }
        *c = trace.final_cluster();
        Ok(())
    })
}

/// First-passage growth from `start` to `horizon` under the Harris system
/// keyed by `seed`; the result is a new handle.
///
/// # Safety
/// `start` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddla_dfpp(
    start: *const DdlaCluster,
    horizon: f64,
    seed: u64,
    out: *mut *mut DdlaCluster,
) -> DdlaStatus {
    guard(|| {
        let c = cluster_ref(start)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let trace = run_dfpp(c, horizon, &HarrisSystem::new(seed)).map_err(lib)?;
        *out = boxed(trace.final_cluster());
        Ok(())
    })
}

/// Total activity (sum over growth edges of the escape probability of the
/// upper end) in floating point.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddla_activity_total(c: *const DdlaCluster, out: *mut f64) -> DdlaStatus {
    guard(|| {
        let c = cluster_ref(c)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = activity_distribution::<f64>(c).map_err(lib)?.total;
        Ok(())
    })
}

/// Next-site law: growth sites as `a, b` pairs in `sites` and their
/// probabilities in `probs`, sorted by site. Sizing follows
/// `ddla_cluster_sites`.
///
/// # Safety
/// `sites` must have room for `2 * capacity` values and `probs` for
/// `capacity`; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddla_next_site_law(
    c: *const DdlaCluster,
    sites: *mut i64,
    probs: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> DdlaStatus {
    guard(|| {
        let c = cluster_ref(c)?;
        let written = written.as_mut().ok_or_else(|| null("written"))?;
        let law = activity_distribution::<f64>(c).map_err(lib)?.law_f64();
        *written = law.len();
        if capacity < law.len() {
            return Err(fail(DdlaStatus::BufferTooSmall, format!("need room for {} sites", law.len())));
        }
        if (sites.is_null() || probs.is_null()) && !law.is_empty() {
            return Err(null("output buffer"));
        }
        for (i, (p, q)) in law.iter().enumerate() {
            *sites.add(2 * i) = p.a;
            *sites.add(2 * i + 1) = p.b;
            *probs.add(i) = *q;
        }
        Ok(())
    })
}

/// Writes the cluster as a snapshot file.
///
/// # Safety
/// `c` must be a live handle; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn ddla_snapshot_save(c: *const DdlaCluster, path: *const c_char) -> DdlaStatus {
    guard(|| {
        let c = cluster_ref(c)?;
        let path = path_arg(path)?;
        let meta = Meta::new().with("version", env!("CARGO_PKG_VERSION")).with("source", "ffi");
        Snapshot::new(meta, c.sorted_sites()).save(path).map_err(lib)
    })
}

/// Reads a snapshot file into a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddla_snapshot_load(path: *const c_char, out: *mut *mut DdlaCluster) -> DdlaStatus {
    guard(|| {
        let path = path_arg(path)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = Snapshot::load(path).map_err(lib)?;
        *out = boxed(Cluster::from_sites(s.sites));
        Ok(())
    })
}
