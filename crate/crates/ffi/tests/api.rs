use std::ffi::{CStr, CString};
use std::ptr;

use storyloop::metrics::{fleiss_kappa, pearson_r, score_pair, MetricConfig, RatingsMatrix};
use storyloop::text::StopwordList;
use storyloop_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = sl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn score_pair_matches_library() {
    let (g, p) = ("Mara slips between the crates.", "Mara hides between two crates, quietly.");
    let mut out = SlPairScores::default();
    let status = unsafe { sl_score_pair(c(g).as_ptr(), c(p).as_ptr(), ptr::null(), 1.5, true, &mut out) };
    assert_eq!(status, SlStatus::Ok);
    assert!(sl_last_error().is_null());
    let config = MetricConfig {
        alpha: 1.5,
        rouge_remove_stopwords: true,
        ..MetricConfig::default()
    };
    let lib = score_pair(g, p, &config, &StopwordList::english()).unwrap();
    assert_eq!(out.user.precision, lib.user.precision);
    assert_eq!(out.rouge_l.f1, lib.rouge_l.f1);
    assert_eq!(out.rouge_w.recall, lib.rouge_w.recall);
    assert_eq!(out.matched_tokens, lib.matched_tokens);
}

#[test]
fn custom_stopwords_change_counting() {
    let mut list = ptr::null_mut();
    let status = unsafe { sl_stopwords_parse(c("# version: tiny\nzebra\n").as_ptr(), &mut list) };
    assert_eq!(status, SlStatus::Ok);
    let mut out = SlPairScores::default();
    // "the" is a stopword in the English list but not in this one.
    let status = unsafe { sl_score_pair(c("the dog").as_ptr(), c("the cat").as_ptr(), list, 1.2, false, &mut out) };
    assert_eq!(status, SlStatus::Ok);
    assert_eq!(out.matched_tokens, 1);
    unsafe { sl_score_pair(c("the dog").as_ptr(), c("the cat").as_ptr(), ptr::null(), 1.2, false, &mut out) };
    assert_eq!(out.matched_tokens, 0);
    unsafe { sl_stopwords_free(list) };

    let english = sl_stopwords_english();
    unsafe { sl_stopwords_free(english) };
}

#[test]
fn error_codes_and_messages() {
    let mut out = SlPairScores::default();
    let empty = c("");
    let s = unsafe { sl_score_pair(empty.as_ptr(), c("x").as_ptr(), ptr::null(), 1.2, false, &mut out) };
    assert_eq!(s, SlStatus::EmptyInput);
    assert!(last_error().contains("generated"));

    let s = unsafe { sl_score_pair(c("a").as_ptr(), c("a").as_ptr(), ptr::null(), 1.0, false, &mut out) };
    assert_eq!(s, SlStatus::InvalidArgument);

    let s = unsafe { sl_score_pair(ptr::null(), c("a").as_ptr(), ptr::null(), 1.2, false, &mut out) };
    assert_eq!(s, SlStatus::NullArgument);
    assert!(last_error().contains("generated"));

    let bad = [0xffu8, 0xfe, 0];
    let s = unsafe { sl_score_pair(bad.as_ptr().cast(), c("a").as_ptr(), ptr::null(), 1.2, false, &mut out) };
    assert_eq!(s, SlStatus::InvalidUtf8);

    let s = unsafe { sl_score_pair(c("a").as_ptr(), c("a").as_ptr(), ptr::null(), 1.2, false, ptr::null_mut()) };
    assert_eq!(s, SlStatus::NullArgument);
}

#[test]
fn errors_are_per_thread() {
    let mut out = SlPairScores::default();
    unsafe { sl_score_pair(c("").as_ptr(), c("x").as_ptr(), ptr::null(), 1.2, false, &mut out) };
    std::thread::spawn(|| assert!(sl_last_error().is_null())).join().unwrap();
    assert!(!sl_last_error().is_null());
}

#[test]
fn truncation_round_trip() {
    let mut out = ptr::null_mut();
    let s = unsafe { sl_truncate_sentences(c("Fog rolls in. Ships wait! The bell rings?").as_ptr(), 2, &mut out) };
    assert_eq!(s, SlStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(out) }.to_str().unwrap(), "Fog rolls in. Ships wait!");
    unsafe { sl_string_free(out) };
    unsafe { sl_string_free(ptr::null_mut()) };
}

#[test]
fn policy_solve_example() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/policies/example.pol")).unwrap();
    let mut policy = ptr::null_mut();
    assert_eq!(unsafe { sl_policy_parse(c(&text).as_ptr(), &mut policy) }, SlStatus::Ok);
    let names = [c("a"), c("b")];
    let ptrs: Vec<_> = names.iter().map(|n| n.as_ptr()).collect();
    let mut got = [0u32; 2];
    let s = unsafe { sl_policy_solve(policy, ptrs.as_ptr(), [8, 8].as_ptr(), 2, 10, got.as_mut_ptr()) };
    assert_eq!(s, SlStatus::Ok);
    assert_eq!(got, [6, 4]);
    unsafe { sl_policy_free(policy) };

    let mut policy = ptr::null_mut();
    let s = unsafe { sl_policy_parse(c("segment a b c d\nnonsense here").as_ptr(), &mut policy) };
    assert_eq!(s, SlStatus::ParseError);
    assert!(policy.is_null());
    assert!(last_error().starts_with("policy line"));
}

#[test]
fn policy_default_budget() {
    let policy = sl_policy_default();
    let budget = unsafe { sl_policy_budget(policy) };
    assert!(budget > 0);
    let names = [c("intro"), c("char_entry"), c("prev_entry")];
    let ptrs: Vec<_> = names.iter().map(|n| n.as_ptr()).collect();
    let mut got = [0u32; 3];
    let s = unsafe { sl_policy_solve(policy, ptrs.as_ptr(), [40, 900, 400].as_ptr(), 3, budget, got.as_mut_ptr()) };
    assert_eq!(s, SlStatus::Ok);
    assert!(got.iter().sum::<u32>() <= budget);
    assert!(got[0] <= 40 && got[1] <= 900 && got[2] <= 400);

    let unknown = [c("no_such_segment")];
    let ptrs: Vec<_> = unknown.iter().map(|n| n.as_ptr()).collect();
    let s = unsafe { sl_policy_solve(policy, ptrs.as_ptr(), [5].as_ptr(), 1, budget, got.as_mut_ptr()) };
    assert_eq!(s, SlStatus::InvalidArgument);
    unsafe { sl_policy_free(policy) };
}

#[test]
fn agreement_statistics_match_library() {
    let a = [1.0, 2.0, 3.0, 5.0, 4.0];
    let b = [2.0, 1.0, 4.0, 5.0, 5.0];
    let mut r = 0.0;
    assert_eq!(unsafe { sl_pearson(a.as_ptr(), b.as_ptr(), 5, &mut r) }, SlStatus::Ok);
    assert_eq!(r, pearson_r(&a, &b).unwrap().r);
    let flat = [0.0; 3];
    assert_eq!(unsafe { sl_pearson(flat.as_ptr(), b.as_ptr(), 3, &mut r) }, SlStatus::InvalidArgument);

    let counts: [u64; 6] = [3, 0, 1, 2, 0, 3];
    let mut kappa = 0.0;
    assert_eq!(unsafe { sl_fleiss_kappa(counts.as_ptr(), 3, 2, &mut kappa) }, SlStatus::Ok);
    let rows = counts.chunks(2).map(<[u64]>::to_vec).collect();
    assert_eq!(kappa, fleiss_kappa(&RatingsMatrix::new(rows).unwrap()));
    let ragged: [u64; 4] = [3, 0, 1, 1];
    assert_eq!(unsafe { sl_fleiss_kappa(ragged.as_ptr(), 2, 2, &mut kappa) }, SlStatus::InvalidArgument);
}
