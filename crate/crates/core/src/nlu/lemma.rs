//! Rule-based English noun lemmatizer.
//!
//! Lookup table for irregular and `-ie` plurals first, then suffix rules.
//! Phrases only have their head noun (the last token) reduced, so
//! `"swimming pools"` becomes `"swimming pool"`.

use super::tokens::{fold, tokenize};

const IRREGULAR: &[(&str, &str)] = &[
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("people", "person"),
    ("mice", "mouse"),
    ("geese", "goose"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("oxen", "ox"),
    ("wives", "wife"),
    ("knives", "knife"),
    ("lives", "life"),
    ("leaves", "leaf"),
    ("loaves", "loaf"),
    ("wolves", "wolf"),
    ("halves", "half"),
    ("shelves", "shelf"),
    ("selves", "self"),
    ("thieves", "thief"),
    ("calves", "calf"),
    ("movies", "movie"),
    ("cookies", "cookie"),
    ("pies", "pie"),
    ("ties", "tie"),
    ("lies", "lie"),
    ("zombies", "zombie"),
    ("brownies", "brownie"),
    ("calories", "calorie"),
    ("rookies", "rookie"),
    ("hippies", "hippie"),
    ("selfies", "selfie"),
    ("smoothies", "smoothie"),
    ("hoodies", "hoodie"),
    ("aunties", "auntie"),
    ("goalies", "goalie"),
    ("prairies", "prairie"),
    ("shoes", "shoe"),
    ("toes", "toe"),
    ("canoes", "canoe"),
    ("buses", "bus"),
    ("gases", "gas"),
    ("photos", "photo"),
    ("pianos", "piano"),
    ("data", "datum"),
    ("criteria", "criterion"),
    ("phenomena", "phenomenon"),
];

/// Words whose plural and singular coincide, or that only look plural.
const INVARIANT: &[&str] = &[
    "news", "series", "species", "sheep", "fish", "deer", "means", "physics", "mathematics",
    "maths", "politics", "economics", "athletics", "gymnastics", "clothes", "scissors",
    "trousers", "jeans", "glasses", "always", "perhaps", "towards", "afterwards", "sometimes",
    "whereas", "yes", "thus", "plus", "chaos", "bias", "lens", "atlas", "canvas", "christmas",
];

fn has_consonant_before(word: &str, suffix_len: usize) -> bool {
    word[..word.len() - suffix_len]
        .chars()
        .last()
        .is_some_and(|c| c.is_ascii_alphabetic() && !"aeiou".contains(c))
}

fn irregular(word: &str) -> Option<&'static str> {
    IRREGULAR.iter().find(|(plural, _)| *plural == word).map(|(_, lemma)| *lemma)
}

/// Lemma of a single lowercase word.
pub fn lemmatize_word(word: &str) -> String {
    let word = fold(word);
    if let Some(lemma) = irregular(&word) {
        return lemma.to_string();
    }
    let reduced = reduce_suffix(&word);
    match irregular(&reduced) {
        Some(lemma) => lemma.to_string(),
        None => reduced,
    }
}

fn reduce_suffix(word: &str) -> String {
    let word = word.to_string();
    if INVARIANT.contains(&word.as_str()) || word.len() <= 3 || !word.is_ascii() {
        return word;
    }
    if word.ends_with("ies") && word.len() > 4 && has_consonant_before(&word, 3) {
        return format!("{}y", &word[..word.len() - 3]);
    }
    for suffix in ["sses", "shes", "ches", "xes", "oes"] {
        if word.ends_with(suffix) {
            return word[..word.len() - 2].to_string();
        }
    }
    if word.ends_with('s')
        && !word.ends_with("ss")
        && !word.ends_with("us")
        && !word.ends_with("is")
        && !word.ends_with("'s")
    {
        return word[..word.len() - 1].to_string();
    }
    word
}

/// Lemma of a phrase: lowercased, whitespace-normalised, head noun reduced.
pub fn lemmatize(phrase: &str) -> String {
    let mut words: Vec<String> = tokenize(phrase).iter().map(|t| fold(t.text)).collect();
    if let Some(head) = words.last_mut() {
        *head = lemmatize_word(head);
    }
    words.join(" ")
}

/// Every token reduced, used for keyword and template matching.
pub fn lemma_tokens(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| lemmatize_word(t.text)).collect()
}

/// Normalised comparison key for concept and class names.
///
/// CamelCase and snake_case identifiers are split into words, so
/// `GreenTea`, `green_tea` and `green teas` share the key `green tea`.
pub fn concept_key(name: &str) -> String {
    let mut spaced = String::with_capacity(name.len() + 4);
    let mut prev: Option<char> = None;
    for c in name.chars() {
        if c == '_' || c == '-' {
            spaced.push(' ');
        } else {
            if c.is_uppercase() && prev.is_some_and(|p| p.is_lowercase() || p.is_ascii_digit()) {
                spaced.push(' ');
            }
            spaced.push(c);
        }
        prev = Some(c);
    }
    lemmatize(&spaced)
}
