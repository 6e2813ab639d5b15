use std::collections::HashMap;

use super::{CardKind, DatasetError, Entry, Story};
use crate::packing::{BundleSegment, SegmentSpec, SegmentVocabulary, Trim};
use crate::text::{tokenize, TokenizerMode};

/// A generation context for one character entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationExample {
    pub bundle: Vec<BundleSegment<String>>,
    /// The entry the model should produce.
    pub target: String,
    pub character_id: String,
}

impl GenerationExample {
    pub fn segment(&self, name: &str) -> Option<&BundleSegment<String>> {
        self.bundle.iter().find(|s| s.spec.name == name)
    }
}

/// Separator tokens for the segment types a generation bundle can contain.
pub fn generation_separators() -> HashMap<String, String> {
    ["intro", "challenge", "card", "biography", "prev_entry", "char_entry"]
        .into_iter()
        .map(|t| (t.to_string(), format!("<|{t}|>")))
        .collect()
}

fn segment(
    vocab: &mut SegmentVocabulary,
    name: String,
    labels: &[&str],
    text: &str,
    trim: Trim,
    index: usize,
) -> BundleSegment<String> {
    let tokens = tokenize(text, TokenizerMode::Stats).into_tokens();
    BundleSegment {
        spec: SegmentSpec {
            name,
            segment_ids: labels.iter().map(|l| vocab.intern(l)).collect(),
            available: tokens.len() as u32,
            trim,
            declared_index: index as u32,
        },
        tokens,
    }
}

/// Assembles the context for entry `entry_index` of scene `scene_index`.
///
/// Segments, in order: `intro`, `challenge`, one `card.N` per played
/// non-location card, `biography`, `prev_entry` and `char_entry`. Segments
/// without source text are kept with zero available tokens so that policy
/// constraints naming them still apply. `char_entry` is the character's
/// most recent earlier entry and is only filled when the preceding entry
/// was written by someone else. Entry segments keep their tail when cut;
/// everything else keeps its head.
pub fn build_generation_example(
    story: &Story,
    scene_index: usize,
    entry_index: usize,
    vocab: &mut SegmentVocabulary,
) -> Result<GenerationExample, DatasetError> {
    let scene = story.scenes.get(scene_index).ok_or(DatasetError::IndexOutOfRange {
        what: "scene",
        index: scene_index,
        len: story.scenes.len(),
    })?;
    let target = scene.entries.get(entry_index).ok_or(DatasetError::IndexOutOfRange {
        what: "entry",
        index: entry_index,
        len: scene.entries.len(),
    })?;
    let character_id = target
        .author_role
        .character()
        .ok_or_else(|| DatasetError::NarratorTarget(target.id.clone()))?
        .to_string();

    // Entries strictly before the target, in story order.
    let earlier: Vec<&Entry> = story
        .scenes
        .iter()
        .take(scene_index)
        .flat_map(|s| s.entries.iter())
        .chain(scene.entries.iter().take(entry_index))
        .collect();

    let challenge = target
        .challenge_id
        .as_deref()
        .or_else(|| {
            scene.entries[..entry_index]
                .iter()
                .rev()
                .find_map(|e| e.challenge_id.as_deref())
        })
        .and_then(|id| story.card(id));

    let mut bundle = Vec::new();
    let mut push = |bundle: &mut Vec<BundleSegment<String>>, name: String, labels: &[&str], text: &str, trim| {
        let idx = bundle.len();
        bundle.push(segment(vocab, name, labels, text, trim, idx));
    };

    push(&mut bundle, "intro".into(), &["intro"], &scene.intro, Trim::Head);
    push(
        &mut bundle,
        "challenge".into(),
        &["card", "challenge"],
        &challenge.map(|c| c.text()).unwrap_or_default(),
        Trim::Head,
    );
    let played = target
        .cards_played
        .iter()
        .filter_map(|id| story.card(id))
        .filter(|c| c.kind != CardKind::Location);
    for (n, card) in played.enumerate() {
        let mut labels = vec!["card", card.kind.label()];
        if card.is_wild {
            labels.push("wild");
        }
        push(&mut bundle, format!("card.{n}"), &labels, &card.text(), Trim::Head);
    }
    let bio = story
        .character(&character_id)
        .map(|c| c.description.as_str())
        .unwrap_or_default();
    push(&mut bundle, "biography".into(), &["character", "biography"], bio, Trim::Head);

    let previous = earlier.last().copied();
    push(
        &mut bundle,
        "prev_entry".into(),
        &["entry", "prev_entry"],
        previous.map_or("", |e| e.text.as_str()),
        Trim::Tail,
    );
    let own_last = match previous {
        Some(p) if p.author_role.character() != Some(character_id.as_str()) => earlier
            .iter()
            .rev()
            .find(|e| e.author_role.character() == Some(character_id.as_str()))
            .map(|e| e.text.as_str()),
        _ => None,
    };
    push(
        &mut bundle,
        "char_entry".into(),
        &["entry", "char_entry"],
        own_last.unwrap_or_default(),
        Trim::Tail,
    );

    Ok(GenerationExample {
        bundle,
        target: target.text.clone(),
        character_id,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{Card, CardKind};
    use super::*;
    use crate::packing::{pack, Policy};
    use crate::text::stats_token_count;

    fn names(ex: &GenerationExample) -> Vec<&str> {
        ex.bundle.iter().map(|s| s.spec.name.as_str()).collect()
    }

    fn available(ex: &GenerationExample, name: &str) -> u32 {
        ex.segment(name).unwrap().spec.available
    }

    #[test]
    fn story_start_has_empty_entry_segments() {
        let s = story("a", vec![vec![entry("e0", Some("c1"), "I row.", 0)]]);
        let mut v = SegmentVocabulary::standard();
        let ex = build_generation_example(&s, 0, 0, &mut v).unwrap();
        assert_eq!(names(&ex), ["intro", "challenge", "biography", "prev_entry", "char_entry"]);
        assert_eq!(available(&ex, "prev_entry"), 0);
        assert_eq!(available(&ex, "char_entry"), 0);
        assert_eq!(ex.target, "I row.");
        assert_eq!(ex.character_id, "c1");
    }

    #[test]
    fn same_author_preceding_entry() {
        let s = story(
            "a",
            vec![vec![entry("e0", Some("c1"), "First words.", 0), entry("e1", Some("c1"), "Next.", 1)]],
        );
        let ex = build_generation_example(&s, 0, 1, &mut SegmentVocabulary::standard()).unwrap();
        assert_eq!(ex.segment("prev_entry").unwrap().tokens, ["First", "words", "."]);
        assert_eq!(available(&ex, "char_entry"), 0);
    }

    #[test]
    fn different_author_adds_own_last_entry() {
        let s = story(
            "a",
            vec![
                vec![entry("e0", Some("c1"), "Mine earlier.", 0)],
                vec![entry("e1", Some("c2"), "Theirs.", 0), entry("e2", Some("c1"), "Now.", 1)],
            ],
        );
        let ex = build_generation_example(&s, 1, 1, &mut SegmentVocabulary::standard()).unwrap();
        assert_eq!(ex.segment("prev_entry").unwrap().tokens, ["Theirs", "."]);
        assert_eq!(ex.segment("char_entry").unwrap().tokens, ["Mine", "earlier", "."]);
        assert_eq!(ex.segment("prev_entry").unwrap().spec.trim, Trim::Tail);
    }

    #[test]
    fn cards_and_challenge() {
        let mut s = story(
            "a",
            vec![vec![entry("e0", None, "The storm hits.", 0), entry("e1", Some("c1"), "I hold on.", 1)]],
        );
        s.cards = vec![
            card("ch", CardKind::Challenge, "Storm", "Survive the storm."),
            card("k1", CardKind::Strength, "Deadly aim", "Never misses."),
            card("loc", CardKind::Location, "Harbor", "Busy docks."),
            Card {
                is_wild: true,
                ..card("w", CardKind::Goal, "", "Get home.")
            },
        ];
        s.scenes[0].entries[0].challenge_id = Some("ch".into());
        s.scenes[0].entries[1].cards_played = vec!["k1".into(), "loc".into(), "w".into()];
        let mut v = SegmentVocabulary::standard();
        let ex = build_generation_example(&s, 0, 1, &mut v).unwrap();
        assert_eq!(
            names(&ex),
            ["intro", "challenge", "card.0", "card.1", "biography", "prev_entry", "char_entry"]
        );
        assert_eq!(ex.segment("challenge").unwrap().tokens[0], "Storm");
        let ids = &ex.segment("card.0").unwrap().spec.segment_ids;
        assert_eq!(ids, &vec![v.get("card").unwrap(), v.get("strength").unwrap()]);
        let ids = &ex.segment("card.1").unwrap().spec.segment_ids;
        assert_eq!(ids.last(), v.get("wild").as_ref());
        for (i, seg) in ex.bundle.iter().enumerate() {
            assert_eq!(seg.spec.declared_index as usize, i);
        }
    }

    #[test]
    fn available_matches_stats_tokens() {
        let s = story(
            "a",
            vec![vec![entry("e0", Some("c2"), "Well, well... who's there?", 0), entry("e1", Some("c1"), "Me!", 1)]],
        );
        let ex = build_generation_example(&s, 0, 1, &mut SegmentVocabulary::standard()).unwrap();
        assert_eq!(available(&ex, "prev_entry") as usize, stats_token_count("Well, well... who's there?"));
        assert_eq!(available(&ex, "intro") as usize, stats_token_count("Scene 0 begins."));
    }

    #[test]
    fn errors() {
        let s = story("a", vec![vec![entry("e0", None, "Narration.", 0)]]);
        let mut v = SegmentVocabulary::standard();
        assert_eq!(
            build_generation_example(&s, 0, 0, &mut v).unwrap_err(),
            DatasetError::NarratorTarget("e0".into())
        );
        assert!(matches!(
            build_generation_example(&s, 1, 0, &mut v),
            Err(DatasetError::IndexOutOfRange { what: "scene", .. })
        ));
        assert!(matches!(
            build_generation_example(&s, 0, 3, &mut v),
            Err(DatasetError::IndexOutOfRange { what: "entry", .. })
        ));
    }

    #[test]
    fn packs_under_default_policy() {
        let long = "word ".repeat(2000);
        let s = story(
            "a",
            vec![vec![entry("e0", Some("c2"), &long, 0), entry("e1", Some("c1"), "Go.", 1)]],
        );
        let ex = build_generation_example(&s, 0, 1, &mut SegmentVocabulary::standard()).unwrap();
        let policy = Policy::default_generation();
        let specs: Vec<_> = ex.bundle.iter().map(|b| b.spec.clone()).collect();
        let constraints = policy.constraints_for(&specs).unwrap();
        let packed = pack(&ex.bundle, &constraints, policy.context_budget(), &generation_separators()).unwrap();
        assert!(packed.context.len() <= 1024);
        assert_eq!(packed.context.len(), 1024);
    }
}
