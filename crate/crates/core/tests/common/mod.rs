#![allow(dead_code)]

use storyloop::dataset::{load_story, AuthorRole, Card, CardKind, Character, Entry, Scene, Story};

pub fn entry(id: &str, author: Option<&str>, text: &str, ordinal: u32) -> Entry {
    Entry {
        id: id.into(),
        author_role: match author {
            Some(c) => AuthorRole::Character(c.into()),
            None => AuthorRole::Narrator,
        },
        text: text.into(),
        cards_played: vec![],
        challenge_id: None,
        ordinal,
    }
}

/// A story with characters `c1` and `c2` and one scene per entry list.
pub fn story(id: &str, scenes: Vec<Vec<Entry>>) -> Story {
    let mut s = load_story(&serde_json::json!({ "id": id, "scenes": [] }).to_string()).expect("minimal story");
    s.characters = ["c1", "c2"]
        .iter()
        .map(|c| Character {
            id: (*c).into(),
            name: format!("Name of {c}"),
            description: format!("Biography of {c}."),
            player_id: None,
        })
        .collect();
    s.scenes = scenes
        .into_iter()
        .enumerate()
        .map(|(i, entries)| Scene {
            id: format!("s{i}"),
            intro: format!("Scene {i} begins."),
            entries,
        })
        .collect();
    s
}

pub fn card(id: &str, kind: CardKind, title: &str, description: &str) -> Card {
    Card {
        id: id.into(),
        kind,
        is_wild: false,
        title: title.into(),
        description: description.into(),
    }
}

/// A story whose single entry has `tokens` words.
pub fn sized(id: &str, tokens: usize) -> Story {
    story(id, vec![vec![entry("e0", None, &"word ".repeat(tokens), 0)]])
}

/// Harbor story used by service tests: a challenge card and four entries.
pub fn harbor() -> Story {
    let mut s = story(
        "harbor",
        vec![vec![
            entry("e0", Some("c1"), "Mara slips between the crates with the ledger under her coat.", 0),
            entry("e1", Some("c2"), "Ott raises his lantern and calls out across the water.", 1),
            entry("e2", Some("c1"), "Mara freezes behind a stack of nets.", 2),
            entry("e3", Some("c2"), "The lantern swings toward the nets.", 3),
        ]],
    );
    s.world = Some("sea".into());
    s.cards = vec![card("k0", CardKind::Challenge, "Caught", "Someone sees you.")];
    s.scenes[0].entries[1].cards_played = vec!["k0".into()];
    s.scenes[0].entries[1].challenge_id = Some("k0".into());
    s
}
