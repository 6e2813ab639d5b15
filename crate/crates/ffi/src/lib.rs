//! C interface to the storyloop metrics, sentence truncation, packing
//! solver and agreement statistics.
//!
//! Every fallible function returns an [`SlStatus`]. On failure the message is
//! kept per thread and can be read with [`sl_last_error`]. Handles are opaque
//! and must be released with their matching `_free` function. Strings
//! returned to the caller are released with [`sl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use storyloop::metrics::{self, MetricConfig, MetricError, RatingsMatrix, ScoreSummary};
use storyloop::packing::{solve, PackError, Policy, SegmentVocabulary};
use storyloop::text::{truncate_sentences, StopwordList};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    EmptyInput = 3,
    InvalidArgument = 4,
    ParseError = 5,
    Infeasible = 6,
    Panic = 7,
}

/// Stopword list handle.
pub struct SlStopwords(StopwordList);

/// Parsed packing policy handle.
pub struct SlPolicy(Policy);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlPairScores {
    pub user: SlScore,
    pub rouge_l: SlScore,
    pub rouge_w: SlScore,
    pub matched_tokens: usize,
}

impl From<ScoreSummary> for SlScore {
    fn from(s: ScoreSummary) -> Self {
        Self {
            precision: s.precision,
            recall: s.recall,
            f1: s.f1,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let mut msg = msg.into();
    msg.retain(|c| c != '\0');
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SlStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Self(SlStatus::NullArgument, format!("`{what}` is null"))
    }
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        let status = match e {
            MetricError::EmptyInput(_) => SlStatus::EmptyInput,
            _ => SlStatus::InvalidArgument,
        };
        Self(status, e.to_string())
    }
}

impl From<PackError> for Failure {
    fn from(e: PackError) -> Self {
        let status = match e {
            PackError::Infeasible => SlStatus::Infeasible,
            PackError::Policy { .. } => SlStatus::ParseError,
            _ => SlStatus::InvalidArgument,
        };
        Self(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SlStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    unsafe { p.as_mut() }.ok_or_else(|| Failure::null(what))
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The bundled English stopword list.
#[no_mangle]
pub extern "C" fn sl_stopwords_english() -> *mut SlStopwords {
    Box::into_raw(Box::new(SlStopwords(StopwordList::english())))
}

/// Parses a stopword list: a `# version: <id>` line, then one word per
/// line.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_stopwords_parse(text: *const c_char, out: *mut *mut SlStopwords) -> SlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let list = StopwordList::parse(str_arg(text, "text")?)
            .map_err(|e| Failure(SlStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(SlStopwords(list)));
        Ok(())
    })
}

/// # Safety
/// `list` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_stopwords_free(list: *mut SlStopwords) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// USER, ROUGE-L and ROUGE-W for one generated/published pair.
///
/// `stopwords` may be null for the English list. `alpha` is the ROUGE-W
/// exponent; `rouge_remove_stopwords` drops stopwords before ROUGE.
///
/// # Safety
/// String arguments must be NUL-terminated; `stopwords` null or a live
/// handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_score_pair(
    generated: *const c_char,
    published: *const c_char,
    stopwords: *const SlStopwords,
    alpha: f64,
    rouge_remove_stopwords: bool,
    out: *mut SlPairScores,
) -> SlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = str_arg(generated, "generated")?;
        let p = str_arg(published, "published")?;
        let english;
        let list = match stopwords.as_ref() {
            Some(s) => &s.0,
            None => {
                english = StopwordList::english();
                &english
            }
        };
        let config = MetricConfig {
            alpha,
            rouge_remove_stopwords,
            ..MetricConfig::default()
        };
        let s = metrics::score_pair(g, p, &config, list)?;
        *out = SlPairScores {
            user: s.user.into(),
            rouge_l: s.rouge_l.into(),
            rouge_w: s.rouge_w.into(),
            matched_tokens: s.matched_tokens,
        };
        Ok(())
    })
}

/// Copies the longest prefix of `text` holding at most `max_sentences`
/// sentences into a new string.
///
/// # Safety
/// `text` must be NUL-terminated; `out` writable. Free the result with
/// [`sl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sl_truncate_sentences(
    text: *const c_char,
    max_sentences: usize,
    out: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let kept = truncate_sentences(str_arg(text, "text")?, max_sentences);
        // The input had no interior NUL, so neither does its prefix.
        *out = CString::new(kept).expect("prefix of a C string").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a packing policy document.
///
/// # Safety
/// `text` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_policy_parse(text: *const c_char, out: *mut *mut SlPolicy) -> SlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let policy = Policy::parse(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(SlPolicy(policy)));
        Ok(())
    })
}

/// The bundled generation policy.
#[no_mangle]
pub extern "C" fn sl_policy_default() -> *mut SlPolicy {
    Box::into_raw(Box::new(SlPolicy(Policy::default_generation())))
}

/// Context budget declared by the policy.
///
/// # Safety
/// `policy` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_policy_budget(policy: *const SlPolicy) -> u32 {
    policy.as_ref().map_or(0, |p| p.0.context_budget())
}

/// # Safety
/// `policy` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_policy_free(policy: *mut SlPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Allocates `budget` tokens across `count` named segments with the given
/// available lengths. `out_lengths[i]` receives the length for `names[i]`.
///
/// # Safety
/// `names` and `available` must hold `count` elements, `out_lengths` must
/// have room for `count`.
#[no_mangle]
pub unsafe extern "C" fn sl_policy_solve(
    policy: *const SlPolicy,
    names: *const *const c_char,
    available: *const u32,
    count: usize,
    budget: u32,
    out_lengths: *mut u32,
) -> SlStatus {
    guard(|| {
        let policy = &policy.as_ref().ok_or_else(|| Failure::null("policy"))?.0;
        let names = slice_arg(names, count, "names")?;
        let available = slice_arg(available, count, "available")?;
        if count > 0 && out_lengths.is_null() {
            return Err(Failure::null("out_lengths"));
        }
        let lengths = names
            .iter()
            .zip(available)
            .map(|(&n, &a)| Ok((str_arg(n, "names[i]")?.to_string(), a)))
            .collect::<Result<Vec<_>, Failure>>()?;
        let mut vocab = SegmentVocabulary::standard();
        let specs = policy.specs_for_lengths(&lengths, &mut vocab)?;
        let constraints = policy.constraints_for(&specs)?;
        let allocation = solve(&specs, &constraints, budget)?;
        for (i, (name, _)) in lengths.iter().enumerate() {
            *out_lengths.add(i) = allocation.get(name).unwrap_or(0);
        }
        Ok(())
    })
}

/// Sample Pearson correlation of two series of length `n`.
///
/// # Safety
/// `a` and `b` must hold `n` values; `out_r` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_pearson(a: *const f64, b: *const f64, n: usize, out_r: *mut f64) -> SlStatus {
    guard(|| {
        let out = out_arg(out_r, "out_r")?;
        let c = metrics::pearson_r(slice_arg(a, n, "a")?, slice_arg(b, n, "b")?)?;
        *out = c.r;
        Ok(())
    })
}

/// Fleiss' kappa of a row-major `items` × `categories` count table.
///
/// # Safety
/// `counts` must hold `items * categories` values; `out_kappa` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_fleiss_kappa(
    counts: *const u64,
    items: usize,
    categories: usize,
    out_kappa: *mut f64,
) -> SlStatus {
    guard(|| {
        let out = out_arg(out_kappa, "out_kappa")?;
        let total = items
            .checked_mul(categories)
            .ok_or_else(|| Failure(SlStatus::InvalidArgument, "table too large".into()))?;
        if categories == 0 && items > 0 {
            return Err(Failure(SlStatus::InvalidArgument, "no categories".into()));
        }
        let flat = slice_arg(counts, total, "counts")?;
        let rows = flat.chunks(categories.max(1)).map(<[u64]>::to_vec).collect();
        *out = metrics::fleiss_kappa(&RatingsMatrix::new(rows)?);
        Ok(())
    })
}
