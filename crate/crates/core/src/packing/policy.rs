//! Packing policy files.
//!
//! ```text
//! # comment
//! budget 1024
//! reserve 0
//! segment intro ids=intro trim=head
//! segment card.* ids=card trim=head
//! entry_min: prev_entry ge 250 @ 5
//! card_min: card.* ge 24 @ 3
//! pair: a + 2*b le 1/2 @ required
//! ```
//!
//! A segment pattern ending in `*` matches every segment name with that
//! prefix. A constraint that mentions a pattern is instantiated once per
//! matching segment.

use std::path::Path;

use num_rational::Rational64;
use num_traits::Zero;

use super::{Constraint, PackError, Priority, Relation, SegmentSpec, Trim};
use super::compose::SegmentVocabulary;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentDecl {
    pub pattern: String,
    pub ids: Vec<String>,
    pub trim: Option<Trim>,
}

impl SegmentDecl {
    pub fn matches(&self, name: &str) -> bool {
        pattern_matches(&self.pattern, name)
    }

    fn is_pattern(&self) -> bool {
        self.pattern.ends_with('*')
    }
}

fn pattern_matches(pattern: &str, name: &str) -> bool {
    match pattern.strip_suffix('*') {
        Some(prefix) => name.starts_with(prefix),
        None => pattern == name,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PolicyConstraint {
    label: String,
    terms: Vec<(String, Rational64)>,
    relation: Relation,
    bound: Rational64,
    priority: Priority,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub budget: u32,
    /// Tokens held back from the context window (e.g. for the continuation).
    pub reserve: u32,
    pub segments: Vec<SegmentDecl>,
    constraints: Vec<PolicyConstraint>,
}

const DEFAULT_POLICY: &str = include_str!("../../policies/default.pol");

fn err(line: usize, message: impl Into<String>) -> PackError {
    PackError::Policy {
        line,
        message: message.into(),
    }
}

fn parse_number(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        return (d != 0).then(|| Rational64::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 12 {
            return None;
        }
        let negative = int.starts_with('-');
        let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let scale = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().ok()?;
        let magnitude = whole.abs().checked_mul(scale)?.checked_add(f)?;
        return Some(Rational64::new(if negative { -magnitude } else { magnitude }, scale));
    }
    s.parse::<i64>().ok().map(Rational64::from_integer)
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '*'))
        && s.find('*').is_none_or(|i| i == s.len() - 1 && s[..i].ends_with('.'))
}

/// Parses `a + 2*b - 1/2*c` into coefficient terms.
pub fn parse_expression(expr: &str) -> Result<Vec<(String, Rational64)>, String> {
    let expr = expr.trim();
    if expr.is_empty() {
        return Err("empty expression".into());
    }
    let mut terms = Vec::new();
    let mut rest = expr;
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'+' => (1, &rest[1..]),
            b'-' => (-1, &rest[1..]),
            _ if terms.is_empty() => (1, rest),
            _ => return Err(format!("expected `+` or `-` before `{rest}`")),
        };
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let term = body[..end].trim();
        rest = body[end..].trim_start();
        let (coef, name) = match term.split_once('*') {
            Some((c, n)) if !n.trim().is_empty() && parse_number(c.trim()).is_some() => {
                (parse_number(c.trim()).expect("checked"), n.trim())
            }
            _ => (Rational64::from_integer(1), term),
        };
        if !is_name(name) {
            return Err(format!("bad term `{term}`"));
        }
        terms.push((name.to_string(), coef * Rational64::from_integer(sign)));
    }
    Ok(terms)
}

fn parse_relation(s: &str) -> Option<Relation> {
    match s {
        "le" | "<=" => Some(Relation::Le),
        "ge" | ">=" => Some(Relation::Ge),
        "eq" | "=" | "==" => Some(Relation::Eq),
        _ => None,
    }
}

fn parse_constraint(line_no: usize, line: &str) -> Result<PolicyConstraint, PackError> {
    let (label, rest) = line.split_once(':').expect("caller checked");
    let (lhs, pri) = rest
        .rsplit_once('@')
        .ok_or_else(|| err(line_no, "constraint needs `@ <priority|required>`"))?;
    let priority = match pri.trim() {
        "required" => Priority::Required,
        p => match p.parse::<u32>() {
            Ok(s) if s >= 1 => Priority::Strength(s),
            _ => return Err(err(line_no, format!("bad priority `{p}`"))),
        },
    };
    let words: Vec<&str> = lhs.split_whitespace().collect();
    let rel_at = words
        .iter()
        .position(|w| parse_relation(w).is_some())
        .ok_or_else(|| err(line_no, "missing relation (le, ge, eq)"))?;
    let relation = parse_relation(words[rel_at]).expect("found above");
    let terms = parse_expression(&words[..rel_at].join(" ")).map_err(|m| err(line_no, m))?;
    let bound_text = words[rel_at + 1..].join("");
    let bound = parse_number(&bound_text)
        .ok_or_else(|| err(line_no, format!("bad bound `{bound_text}`")))?;
    let wildcards: std::collections::BTreeSet<&str> = terms
        .iter()
        .map(|(n, _)| n.as_str())
        .filter(|n| n.ends_with('*'))
        .collect();
    if wildcards.len() > 1 {
        return Err(err(line_no, "at most one segment pattern per constraint"));
    }
    Ok(PolicyConstraint {
        label: label.trim().to_string(),
        terms,
        relation,
        bound,
        priority,
    })
}

impl Policy {
    pub fn parse(text: &str) -> Result<Self, PackError> {
        let mut policy = Policy {
            budget: 1024,
            reserve: 0,
            segments: Vec::new(),
            constraints: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let head = words.next().expect("nonempty");
            match head {
                "budget" | "reserve" => {
                    let v: u32 = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| err(line_no, format!("`{head}` needs a token count")))?;
                    if head == "budget" {
                        policy.budget = v;
                    } else {
                        policy.reserve = v;
                    }
                }
                "segment" => {
                    let pattern = words
                        .next()
                        .filter(|p| is_name(p))
                        .ok_or_else(|| err(line_no, "`segment` needs a name"))?
                        .to_string();
                    let mut decl = SegmentDecl {
                        ids: vec![pattern.trim_end_matches(['*', '.']).to_string()],
                        pattern,
                        trim: None,
                    };
                    for w in words {
                        match w.split_once('=') {
                            Some(("ids", v)) => {
                                decl.ids = v.split(',').filter(|s| !s.is_empty()).map(String::from).collect();
                            }
                            Some(("trim", "head")) => decl.trim = Some(Trim::Head),
                            Some(("trim", "tail")) => decl.trim = Some(Trim::Tail),
                            _ => return Err(err(line_no, format!("unknown segment option `{w}`"))),
                        }
                    }
                    if decl.ids.is_empty() {
                        return Err(err(line_no, "segment needs at least one id"));
                    }
                    if policy.segments.iter().any(|s| s.pattern == decl.pattern) {
                        return Err(err(line_no, format!("segment `{}` declared twice", decl.pattern)));
                    }
                    policy.segments.push(decl);
                }
                _ if line.contains(':') => policy.constraints.push(parse_constraint(line_no, line)?),
                _ => return Err(err(line_no, format!("unrecognized line `{line}`"))),
            }
        }
        Ok(policy)
    }

    pub fn load(path: &Path) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| crate::Error::Io(format!("{}: {e}", path.display())))?;
        Ok(Self::parse(&text)?)
    }

    /// The shipped generation-context policy.
    pub fn default_generation() -> Self {
        Self::parse(DEFAULT_POLICY).expect("bundled policy parses")
    }

    /// Budget left for context after the reserve.
    pub fn context_budget(&self) -> u32 {
        self.budget.saturating_sub(self.reserve)
    }

    pub fn constraint_labels(&self) -> Vec<&str> {
        self.constraints.iter().map(|c| c.label.as_str()).collect()
    }

    /// Segment specs for explicit lengths, as used by the `pack` command.
    ///
    /// Exactly-named declarations come first in declaration order (a missing
    /// length means 0 available). Other names must match a declared pattern
    /// and follow in input order. With no declarations at all, input order is
    /// used.
    pub fn specs_for_lengths(
        &self,
        lengths: &[(String, u32)],
        vocab: &mut SegmentVocabulary,
    ) -> Result<Vec<SegmentSpec>, PackError> {
        let mut specs = Vec::new();
        let mut push = |name: &str, available: u32, decl: Option<&SegmentDecl>, specs: &mut Vec<SegmentSpec>| {
            let labels = decl.map_or_else(|| vec![name.to_string()], |d| d.ids.clone());
            specs.push(SegmentSpec {
                name: name.to_string(),
                segment_ids: labels.iter().map(|l| vocab.intern(l)).collect(),
                available,
                trim: decl.and_then(|d| d.trim).unwrap_or_default(),
                declared_index: specs.len() as u32,
            });
        };
        for (name, _) in lengths {
            if lengths.iter().filter(|(n, _)| n == name).count() > 1 {
                return Err(PackError::InvalidSpec(format!("length for `{name}` given twice")));
            }
        }
        if self.segments.is_empty() {
            for (name, len) in lengths {
                push(name, *len, None, &mut specs);
            }
            return Ok(specs);
        }
        for decl in self.segments.iter().filter(|d| !d.is_pattern()) {
            let len = lengths
                .iter()
                .find(|(n, _)| *n == decl.pattern)
                .map_or(0, |&(_, l)| l);
            push(&decl.pattern, len, Some(decl), &mut specs);
        }
        for (name, len) in lengths {
            if self.segments.iter().any(|d| !d.is_pattern() && d.pattern == *name) {
                continue;
            }
            let decl = self
                .segments
                .iter()
                .find(|d| d.matches(name))
                .ok_or_else(|| PackError::UnknownSegment(name.clone()))?;
            push(name, *len, Some(decl), &mut specs);
        }
        Ok(specs)
    }

    /// Applies declared trim sides to externally built specs.
    pub fn apply_trim(&self, specs: &mut [SegmentSpec]) {
        for spec in specs {
            if let Some(t) = self
                .segments
                .iter()
                .find(|d| d.matches(&spec.name))
                .and_then(|d| d.trim)
            {
                spec.trim = t;
            }
        }
    }

    /// Instantiates the policy's constraints against concrete segments.
    ///
    /// Pattern constraints expand once per matching segment (none when no
    /// segment matches). Constraints naming a segment that is absent from
    /// `specs` are an error.
    pub fn constraints_for(&self, specs: &[SegmentSpec]) -> Result<Vec<Constraint>, PackError> {
        let mut ordered: Vec<&SegmentSpec> = specs.iter().collect();
        ordered.sort_by_key(|s| s.declared_index);
        let mut out = Vec::new();
        for c in &self.constraints {
            let pattern = c.terms.iter().map(|(n, _)| n).find(|n| n.ends_with('*'));
            let bindings: Vec<Option<&str>> = match pattern {
                None => vec![None],
                Some(p) => ordered
                    .iter()
                    .filter(|s| pattern_matches(p, &s.name))
                    .map(|s| Some(s.name.as_str()))
                    .collect(),
            };
            for bound_name in bindings {
                let mut terms: Vec<(String, Rational64)> = Vec::new();
                for (name, coef) in &c.terms {
                    let concrete = match (name.ends_with('*'), bound_name) {
                        (true, Some(b)) => b.to_string(),
                        _ => name.clone(),
                    };
                    if !ordered.iter().any(|s| s.name == concrete) {
                        return Err(PackError::UnknownSegment(concrete));
                    }
                    match terms.iter_mut().find(|(n, _)| *n == concrete) {
                        Some((_, existing)) => *existing += coef,
                        None => terms.push((concrete, *coef)),
                    }
                }
                terms.retain(|(_, c)| !c.is_zero());
                if terms.is_empty() {
                    continue;
                }
                out.push(Constraint::new(terms, c.relation, c.bound, c.priority));
            }
        }
        Ok(out)
    }
}
