//! C interface to `sparsetopic`.
//!
//! Models are opaque handles created by [`sparsetopic_model_load`] and
//! released with [`sparsetopic_model_free`]. Every fallible call returns a
//! [`SparsetopicStatus`]; on failure the message is available from
//! [`sparsetopic_last_error`] on the same thread. Output buffers are owned
//! by the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sparsetopic::gaussian::{rw_divergence, DiagGaussian};
use sparsetopic::{checkpoint, BowDocument, Error, TopicModel};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsetopicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    BadCheckpoint = 4,
    UnsupportedVersion = 5,
    Numeric = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A loaded model.
pub struct SparsetopicModel {
    inner: TopicModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn fail(status: SparsetopicStatus, msg: impl AsRef<str>) -> SparsetopicStatus {
    set_error(msg.as_ref());
    status
}

fn status_of(e: &Error) -> SparsetopicStatus {
    match e {
        Error::Io(_) => SparsetopicStatus::Io,
        Error::Checkpoint(_) | Error::Parse { .. } => SparsetopicStatus::BadCheckpoint,
        Error::Version { .. } => SparsetopicStatus::UnsupportedVersion,
        Error::NumericInput { .. }
        | Error::NumericOverflow { .. }
        | Error::NonFiniteGradient { .. }
        | Error::NonFiniteLoss { .. } => SparsetopicStatus::Numeric,
        _ => SparsetopicStatus::InvalidArgument,
    }
}

/// Runs `f`, converting library errors and panics into status codes.
fn guard<F>(f: F) -> SparsetopicStatus
where
    F: FnOnce() -> Result<(), (SparsetopicStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SparsetopicStatus::Ok,
        Ok(Err((status, msg))) => fail(status, msg),
        Err(_) => fail(SparsetopicStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> (SparsetopicStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SparsetopicStatus, String) {
    (SparsetopicStatus::NullPointer, format!("`{what}` is null"))
}

/// # Safety
/// `p` must be null or point to `n` readable values.
unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], (SparsetopicStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// # Safety
/// `p` must be null or point to `n` writable values.
unsafe fn slice_mut<'a, T>(p: *mut T, n: usize, what: &str) -> Result<&'a mut [T], (SparsetopicStatus, String)> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

/// # Safety
/// `model` must be null or a handle from [`sparsetopic_model_load`].
unsafe fn model_ref<'a>(model: *const SparsetopicModel) -> Result<&'a TopicModel, (SparsetopicStatus, String)> {
    model.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

/// Loads a checkpoint. On success `*out` receives a handle that must be
/// released with [`sparsetopic_model_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_model_load(
    path: *const c_char,
    out: *mut *mut SparsetopicModel,
) -> SparsetopicStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (SparsetopicStatus::InvalidArgument, "path is not valid UTF-8".to_string()))?;
        let model = checkpoint::load(Path::new(path)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SparsetopicModel { inner: model }));
        Ok(())
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_model_free(model: *mut SparsetopicModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_model_num_topics(
    model: *const SparsetopicModel,
    out: *mut usize,
) -> SparsetopicStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = m.num_topics();
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_model_vocab_size(
    model: *const SparsetopicModel,
    out: *mut usize,
) -> SparsetopicStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = m.vocab().len();
        Ok(())
    })
}

/// Looks up the id of `term`. Unknown terms give `InvalidArgument`.
///
/// # Safety
/// `model` must be a live handle, `term` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_model_term_id(
    model: *const SparsetopicModel,
    term: *const c_char,
    out: *mut usize,
) -> SparsetopicStatus {
    guard(|| {
        let m = model_ref(model)?;
        if term.is_null() {
            return Err(null("term"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let term = CStr::from_ptr(term).to_string_lossy();
        *out = m
            .vocab()
            .id(&term)
            .ok_or_else(|| (SparsetopicStatus::InvalidArgument, format!("unknown term `{term}`")))?;
        Ok(())
    })
}

/// Copies term `id` into `buf` as a NUL-terminated string. `*len` receives
/// the term's byte length without the terminator; if `buf_len` is too small
/// nothing is copied and `BufferTooSmall` is returned.
///
/// # Safety
/// `model` must be a live handle, `buf` writable for `buf_len` bytes and
/// `len` writable.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_model_term(
    model: *const SparsetopicModel,
    id: usize,
    buf: *mut c_char,
    buf_len: usize,
    len: *mut usize,
) -> SparsetopicStatus {
    guard(|| {
        let m = model_ref(model)?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        let term = m
            .vocab()
            .term(id)
            .ok_or_else(|| (SparsetopicStatus::InvalidArgument, format!("term id {id} is outside the vocabulary")))?;
        *len = term.len();
        if buf_len < term.len() + 1 {
            return Err((SparsetopicStatus::BufferTooSmall, format!("term needs {} bytes", term.len() + 1)));
        }
        let dst = slice_mut(buf.cast::<u8>(), buf_len, "buf")?;
        dst[..term.len()].copy_from_slice(term.as_bytes());
        dst[term.len()] = 0;
        Ok(())
    })
}

/// Infers topic proportions of the document given by parallel arrays of
/// term ids and counts. `theta` must hold `num_topics` values; inactive
/// topics receive exactly 0.
///
/// # Safety
/// `term_ids` and `counts` must be readable for `n` values, `theta`
/// writable for `theta_len`.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_model_infer_theta(
    model: *const SparsetopicModel,
    term_ids: *const u32,
    counts: *const u32,
    n: usize,
    theta: *mut f64,
    theta_len: usize,
) -> SparsetopicStatus {
    guard(|| {
        let m = model_ref(model)?;
        let ids = slice(term_ids, n, "term_ids")?;
        let counts = slice(counts, n, "counts")?;
        if theta_len != m.num_topics() {
            return Err((
                SparsetopicStatus::BufferTooSmall,
                format!("theta holds {theta_len} values, model has {} topics", m.num_topics()),
            ));
        }
        let out = slice_mut(theta, theta_len, "theta")?;
        let v = m.vocab().len();
        if let Some(&bad) = ids.iter().find(|&&t| t as usize >= v) {
            return Err(lib_err(Error::TermOutOfRange(bad as usize)));
        }
        let doc =
            BowDocument::from_counts(ids.iter().map(|&t| t as usize).zip(counts.iter().copied())).map_err(lib_err)?;
        let post = m.infer_theta(&doc).map_err(lib_err)?;
        out.copy_from_slice(post.theta.values());
        Ok(())
    })
}

/// Writes the `n` highest-weighted term ids of `topic` and their weights.
/// `n` larger than the vocabulary is an error.
///
/// # Safety
/// `ids` and `weights` must be writable for `n` values.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_model_top_words(
    model: *const SparsetopicModel,
    topic: usize,
    n: usize,
    ids: *mut usize,
    weights: *mut f64,
) -> SparsetopicStatus {
    guard(|| {
        let m = model_ref(model)?;
        if n == 0 || n > m.vocab().len() {
            return Err((SparsetopicStatus::InvalidArgument, format!("n must lie in 1..={}", m.vocab().len())));
        }
        let ids = slice_mut(ids, n, "ids")?;
        let weights = slice_mut(weights, n, "weights")?;
        let top = m.top_words(topic, n).map_err(lib_err)?;
        for (i, (term, w)) in top.into_iter().enumerate() {
            ids[i] = m.vocab().id(&term).expect("term from the model vocabulary");
            weights[i] = w;
        }
        Ok(())
    })
}

/// Euclidean projection of `x` onto the probability simplex.
///
/// # Safety
/// `x` must be readable and `out` writable for `n` values.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_sparsemax(x: *const f64, n: usize, out: *mut f64) -> SparsetopicStatus {
    guard(|| {
        if n == 0 {
            return Err((SparsetopicStatus::InvalidArgument, "empty input".into()));
        }
        let x = slice(x, n, "x")?;
        let out = slice_mut(out, n, "out")?;
        let p = sparsetopic::sparsemax(x).map_err(lib_err)?;
        out.copy_from_slice(p.values());
        Ok(())
    })
}

/// Closed-form quadratic divergence `‖μ_p − μ_q‖² + ‖σ_p − σ_q‖²` between
/// two diagonal Gaussians of dimension `d`.
///
/// # Safety
/// The four input arrays must be readable for `d` values and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_rw_divergence(
    mean_p: *const f64,
    std_p: *const f64,
    mean_q: *const f64,
    std_q: *const f64,
    d: usize,
    out: *mut f64,
) -> SparsetopicStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let gauss = |m: *const f64, s: *const f64| -> Result<DiagGaussian, (SparsetopicStatus, String)> {
            let m = slice(m, d, "mean")?.to_vec();
            let s = slice(s, d, "std")?.to_vec();
            DiagGaussian::new(m, s).map_err(lib_err)
        };
        let p = gauss(mean_p, std_p)?;
        let q = gauss(mean_q, std_q)?;
        *out = rw_divergence(&p, &q).map_err(lib_err)?;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `buf_len > 0`) and returns its full length in
/// bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or writable for `buf_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sparsetopic_last_error(buf: *mut c_char, buf_len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && buf_len > 0 {
            let n = e.len().min(buf_len - 1);
            let dst = std::slice::from_raw_parts_mut(buf.cast::<u8>(), buf_len);
            dst[..n].copy_from_slice(&e[..n]);
            dst[n] = 0;
        }
        e.len()
    })
}
