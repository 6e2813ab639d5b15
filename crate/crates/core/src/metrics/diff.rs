use serde::{Deserialize, Serialize};

use super::user_matches;
use crate::text::{Preprocessing, StopwordList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffClass {
    Matched,
    Added,
    Deleted,
}

/// One rendered run of a generated/edited comparison.
///
/// Concatenating `text` of matched and deleted spans gives the generated
/// text back; concatenating matched (`edited_text` when present, else
/// `text`) and added spans gives the edited text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSpan {
    pub class: DiffClass,
    pub text: String,
    /// Edited-side text of a matched span when it differs from `text` in
    /// case or punctuation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edited_text: Option<String>,
}

impl DiffSpan {
    fn edited(&self) -> &str {
        self.edited_text.as_deref().unwrap_or(&self.text)
    }
}

fn push(out: &mut Vec<DiffSpan>, class: DiffClass, text: &str, edited: &str) {
    if text.is_empty() && edited.is_empty() {
        return;
    }
    if let Some(last) = out.last_mut().filter(|l| l.class == class) {
        if class == DiffClass::Matched {
            let merged_edited = format!("{}{}", last.edited(), edited);
            last.text.push_str(text);
            last.edited_text = (merged_edited != last.text).then_some(merged_edited);
        } else {
            last.text.push_str(text);
        }
        return;
    }
    out.push(DiffSpan {
        class,
        text: text.to_string(),
        edited_text: (class == DiffClass::Matched && text != edited).then(|| edited.to_string()),
    });
}

fn push_gap(out: &mut Vec<DiffSpan>, generated: &str, edited: &str) {
    if generated == edited {
        push(out, DiffClass::Matched, generated, edited);
    } else {
        push(out, DiffClass::Deleted, generated, "");
        push(out, DiffClass::Added, edited, "");
    }
}

/// Match/add/delete runs over the original texts, driven by the counted
/// USER matches.
pub fn diff_view(
    generated: &str,
    edited: &str,
    stopwords: &StopwordList,
    preprocessing: &Preprocessing,
) -> Vec<DiffSpan> {
    let gen_toks = preprocessing.apply_spanned(generated);
    let ed_toks = preprocessing.apply_spanned(edited);
    let gx: Vec<&str> = gen_toks.iter().map(|t| t.text.as_str()).collect();
    let ey: Vec<&str> = ed_toks.iter().map(|t| t.text.as_str()).collect();

    let mut out = Vec::new();
    let (mut gc, mut ec) = (0usize, 0usize);
    for span in user_matches(&gx, &ey, stopwords).into_iter().filter(|s| s.counted) {
        let g = gen_toks[span.start_x].range.start..gen_toks[span.start_x + span.length - 1].range.end;
        let e = ed_toks[span.start_y].range.start..ed_toks[span.start_y + span.length - 1].range.end;
        push_gap(&mut out, &generated[gc..g.start], &edited[ec..e.start]);
        push(&mut out, DiffClass::Matched, &generated[g.clone()], &edited[e.clone()]);
        gc = g.end;
        ec = e.end;
    }
    push_gap(&mut out, &generated[gc..], &edited[ec..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rebuild(spans: &[DiffSpan]) -> (String, String) {
        let mut g = String::new();
        let mut e = String::new();
        for s in spans {
            match s.class {
                DiffClass::Matched => {
                    g.push_str(&s.text);
                    e.push_str(s.edited());
                }
                DiffClass::Deleted => g.push_str(&s.text),
                DiffClass::Added => e.push_str(&s.text),
            }
        }
        (g, e)
    }

    fn view(g: &str, e: &str) -> Vec<DiffSpan> {
        diff_view(g, e, &StopwordList::english(), &Preprocessing::default())
    }

    #[test]
    fn identical_text_is_one_match() {
        let spans = view("The cat sat.", "The cat sat.");
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].class, DiffClass::Matched);
        assert_eq!(spans[0].text, "The cat sat.");
    }

    #[test]
    fn empty_edit_is_all_deleted() {
        let spans = view("The cat sat.", "");
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].class, DiffClass::Deleted);
    }

    #[test]
    fn cat_and_dog_reconstructs() {
        let g = "the cat sat on the mat";
        let e = "the dog sat on a mat";
        let spans = view(g, e);
        let matched: Vec<&str> = spans
            .iter()
            .filter(|s| s.class == DiffClass::Matched)
            .map(|s| s.text.trim())
            .filter(|t| !t.is_empty())
            .collect();
        assert_eq!(matched, ["sat on", "mat"]);
        assert_eq!(rebuild(&spans), (g.to_string(), e.to_string()));
    }

    #[test]
    fn case_differences_keep_both_sides() {
        let g = "Swords, drawn! They charge.";
        let e = "swords drawn, they charge";
        let spans = view(g, e);
        assert_eq!(rebuild(&spans), (g.to_string(), e.to_string()));
        assert!(spans.iter().any(|s| s.edited_text.is_some()));
    }
}
