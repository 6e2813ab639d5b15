//! Tokenization, stopwords and sentence segmentation.
//!
//! Two tokenizers live here. [`TokenizerMode::Metric`] mirrors the usual
//! ROUGE preprocessing: lowercase, keep maximal alphanumeric runs, drop
//! everything else. [`TokenizerMode::Stats`] is the counting tokenizer used
//! for corpus statistics and context budgets: every maximal run of
//! alphanumeric or of non-alphanumeric, non-whitespace characters is a token
//! and case is preserved.
//!
//! "Alphanumeric" means Unicode general category `L*` or `Nd`.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Deref, Range};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../resources/stopwords_en.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizerMode {
    Metric,
    Stats,
}

/// An ordered list of tokens produced by one of the tokenizers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<String>,
    mode: TokenizerMode,
}

impl TokenSequence {
    /// Wraps pre-tokenized input. No normalization is applied.
    pub fn from_tokens<I, S>(tokens: I, mode: TokenizerMode) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            tokens: tokens.into_iter().map(Into::into).collect(),
            mode,
        }
    }

    pub fn mode(&self) -> TokenizerMode {
        self.mode
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.tokens
    }
}

/// A token together with the byte range it was read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpannedToken {
    pub text: String,
    pub range: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Word,
    Space,
    Other,
}

pub(crate) fn is_word_char(c: char) -> bool {
    // L* and Nd only. `char::is_alphanumeric` also admits Nl/No.
    static WORD: OnceLock<regex::Regex> = OnceLock::new();
    if c.is_ascii() {
        return c.is_ascii_alphanumeric();
    }
    let re = WORD.get_or_init(|| regex::Regex::new(r"^[\p{L}\p{Nd}]$").expect("static regex"));
    let mut buf = [0u8; 4];
    re.is_match(c.encode_utf8(&mut buf))
}

fn classify(c: char) -> CharClass {
    if is_word_char(c) {
        CharClass::Word
    } else if c.is_whitespace() {
        CharClass::Space
    } else {
        CharClass::Other
    }
}

/// Maximal same-class runs, whitespace runs excluded.
fn runs(text: &str) -> Vec<(CharClass, Range<usize>)> {
    let mut out = Vec::new();
    let mut current: Option<(CharClass, usize)> = None;
    for (i, c) in text.char_indices() {
        let class = classify(c);
        match current {
            Some((cls, _)) if cls == class => {}
            Some((cls, start)) => {
                if cls != CharClass::Space {
                    out.push((cls, start..i));
                }
                current = Some((class, i));
            }
            None => current = Some((class, i)),
        }
    }
    if let Some((cls, start)) = current {
        if cls != CharClass::Space {
            out.push((cls, start..text.len()));
        }
    }
    out
}

fn normalize_metric(raw: &str) -> String {
    // Lowercasing can introduce combining marks (e.g. U+0130); strip them so
    // metric tokens stay purely alphanumeric.
    raw.to_lowercase().chars().filter(|&c| is_word_char(c)).collect()
}

/// Tokenizes `text` and keeps the source byte range of every token.
pub fn tokenize_spanned(text: &str, mode: TokenizerMode) -> Vec<SpannedToken> {
    runs(text)
        .into_iter()
        .filter_map(|(class, range)| match (mode, class) {
            (TokenizerMode::Metric, CharClass::Word) => {
                let text = normalize_metric(&text[range.clone()]);
                (!text.is_empty()).then_some(SpannedToken { text, range })
            }
            (TokenizerMode::Metric, _) => None,
            (TokenizerMode::Stats, _) => Some(SpannedToken {
                text: text[range.clone()].to_string(),
                range,
            }),
        })
        .collect()
}

pub fn tokenize(text: &str, mode: TokenizerMode) -> TokenSequence {
    TokenSequence {
        tokens: tokenize_spanned(text, mode)
            .into_iter()
            .map(|t| t.text)
            .collect(),
        mode,
    }
}

/// Number of STATS tokens in `text`, without allocating them.
pub fn stats_token_count(text: &str) -> usize {
    runs(text).len()
}

/// Preprocessing applied before metric computation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocessing {
    /// Apply the Snowball English stemmer to every metric token.
    #[serde(default)]
    pub stem: bool,
}

impl Preprocessing {
    pub fn apply(&self, text: &str) -> TokenSequence {
        TokenSequence::from_tokens(
            self.apply_spanned(text).into_iter().map(|t| t.text),
            TokenizerMode::Metric,
        )
    }

    pub fn apply_spanned(&self, text: &str) -> Vec<SpannedToken> {
        let mut toks = tokenize_spanned(text, TokenizerMode::Metric);
        if self.stem {
            let stemmer = rust_stemmers::Stemmer::create(rust_stemmers::Algorithm::English);
            for t in &mut toks {
                t.text = stemmer.stem(&t.text).into_owned();
            }
        }
        toks
    }
}

/// A versioned, lowercase stopword set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    words: HashSet<String>,
    version: String,
}

impl StopwordList {
    pub fn new<I, S>(words: I, version: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
            version: version.into(),
        }
    }

    /// The shipped 179-word English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS).expect("bundled stopword list is well formed")
    }

    /// Parses the resource format: a `# version: <id>` header line, then one
    /// word per line. Blank lines and further `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let version = lines
            .by_ref()
            .map(str::trim)
            .find(|l| !l.is_empty())
            .and_then(|l| l.strip_prefix('#'))
            .and_then(|l| l.trim().strip_prefix("version:"))
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .ok_or_else(|| Error::Parse("stopword list must start with `# version: <id>`".into()))?;
        let words = lines
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Ok(Self::new(words, version))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn empty() -> Self {
        Self {
            words: HashSet::new(),
            version: "empty".into(),
        }
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        if token.is_empty() {
            return false;
        }
        if token.chars().any(char::is_uppercase) {
            self.words.contains(&token.to_lowercase())
        } else {
            self.words.contains(token)
        }
    }
}

impl Default for StopwordList {
    fn default() -> Self {
        Self::english()
    }
}

impl fmt::Display for StopwordList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stopwords({}, {} words)", self.version, self.words.len())
    }
}

pub fn is_stopword(token: &str, list: &StopwordList) -> bool {
    list.contains(token)
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201D}' | '\u{2019}')
}

/// Byte offsets just past each sentence terminator run.
///
/// A sentence ends after a run of `.`, `!` or `?` (plus any closing quotes or
/// brackets) that is followed by whitespace or the end of the text.
/// Abbreviations such as "Mr." are not special-cased.
fn sentence_ends(text: &str) -> Vec<usize> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut ends = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !is_terminator(chars[i].1) {
            i += 1;
            continue;
        }
        while i < chars.len() && is_terminator(chars[i].1) {
            i += 1;
        }
        while i < chars.len() && is_closer(chars[i].1) {
            i += 1;
        }
        let end = chars.get(i).map_or(text.len(), |&(b, _)| b);
        if i == chars.len() || chars[i].1.is_whitespace() {
            ends.push(end);
        }
    }
    ends
}

/// Number of sentences in `text` under the segmentation rule.
pub fn count_sentences(text: &str) -> usize {
    let ends = sentence_ends(text);
    let tail_has_content = !text[ends.last().copied().unwrap_or(0)..].trim().is_empty();
    ends.len() + usize::from(tail_has_content)
}

/// Returns the longest prefix of `text` with at most `max_sentences`
/// sentences. Text that already fits is returned unchanged.
pub fn truncate_sentences(text: &str, max_sentences: usize) -> &str {
    let max_sentences = max_sentences.max(1);
    let ends = sentence_ends(text);
    match ends.get(max_sentences - 1) {
        Some(&end) if !text[end..].trim().is_empty() => &text[..end],
        _ => text,
    }
}
