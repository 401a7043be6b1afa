//! Gazetteer-first named entity recognition with lexical fallbacks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lemma::lemmatize_word;
use super::tokens::{fold, tokenize, Token};
use super::{NluError, Span};

/// Entity categories, declared in extraction priority order: when two
/// mentions overlap a slot, the later variant wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityType {
    Person,
    Location,
    Organization,
    Event,
    WorkOfArt,
    ConsumerGood,
    FoodAndBeverages,
    Other,
}

impl EntityType {
    pub const ALL: [EntityType; 8] = [
        EntityType::Person,
        EntityType::Location,
        EntityType::Organization,
        EntityType::Event,
        EntityType::WorkOfArt,
        EntityType::ConsumerGood,
        EntityType::FoodAndBeverages,
        EntityType::Other,
    ];

    pub fn priority(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Person => "PERSON",
            EntityType::Location => "LOCATION",
            EntityType::Organization => "ORGANIZATION",
            EntityType::Event => "EVENT",
            EntityType::WorkOfArt => "WORK_OF_ART",
            EntityType::ConsumerGood => "CONSUMER_GOOD",
            EntityType::FoodAndBeverages => "FOOD_AND_BEVERAGES",
            EntityType::Other => "OTHER",
        }
    }

    /// Canonical tag form: `"Food & Beverages"` and `"food-and-beverages"`
    /// both become `FOOD_AND_BEVERAGES`.
    pub fn normalize_tag(tag: &str) -> String {
        let upper = tag.trim().replace('&', " and ").to_uppercase();
        upper
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|p| !p.is_empty())
            .collect::<Vec<_>>()
            .join("_")
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = NluError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = EntityType::normalize_tag(s);
        EntityType::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| NluError::UnknownEntityType(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub text: String,
    pub span: Span,
    pub entity_type: EntityType,
}

/// Multiword gazetteer keyed by folded phrase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityLexicon {
    entries: BTreeMap<String, EntityType>,
    #[serde(skip)]
    max_len: usize,
}

impl EntityLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `{"phrase": "TYPE", ...}`.
    pub fn from_json(text: &str) -> Result<Self, NluError> {
        let raw: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| NluError::Resource(e.to_string()))?;
        let mut lex = EntityLexicon::new();
        for (phrase, tag) in raw {
            lex.insert(&phrase, tag.parse()?);
        }
        Ok(lex)
    }

    pub fn insert(&mut self, phrase: &str, entity_type: EntityType) {
        let key = lexicon_key(&tokenize(phrase));
        if key.is_empty() {
            return;
        }
        self.max_len = self.max_len.max(key.split(' ').count());
        self.entries.insert(key, entity_type);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn lookup(&self, tokens: &[Token<'_>]) -> Option<EntityType> {
        if let Some(t) = self.entries.get(&lexicon_key(tokens)) {
            return Some(*t);
        }
        // plural heads still hit the singular entry
        let mut words: Vec<String> = tokens.iter().map(|t| fold(t.text)).collect();
        let head = words.last_mut()?;
        *head = lemmatize_word(head);
        self.entries.get(&words.join(" ")).copied()
    }

    fn max_len(&self) -> usize {
        if self.max_len == 0 && !self.entries.is_empty() {
            return self.entries.keys().map(|k| k.split(' ').count()).max().unwrap_or(0);
        }
        self.max_len
    }

    /// Mentions in text order, pairwise disjoint.
    pub fn recognize(&self, text: &str) -> Vec<EntityMention> {
        let tokens = tokenize(text);
        let max_len = self.max_len();
        let mut out: Vec<EntityMention> = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let longest = (1..=max_len.min(tokens.len() - i))
                .rev()
                .find_map(|len| self.lookup(&tokens[i..i + len]).map(|t| (len, t)));
            if let Some((len, entity_type)) = longest {
                let span = Span::new(tokens[i].start, tokens[i + len - 1].end);
                out.push(EntityMention {
                    text: text[span.range()].to_string(),
                    span,
                    entity_type,
                });
                i += len;
                continue;
            }
            let Some(kind) = fallback_type(text, &tokens, i) else {
                i += 1;
                continue;
            };
            // run of same-kind tokens, stopping before any gazetteer hit
            let mut j = i + 1;
            while j < tokens.len()
                && self.lookup(&tokens[j..j + 1]).is_none()
                && fallback_type(text, &tokens, j).map(Fallback::merge_key) == Some(kind.merge_key())
            {
                j += 1;
            }
            let entity_type = match kind {
                Fallback::Proper => proper_type(&tokens[i..j]),
                Fallback::Noun => EntityType::Other,
            };
            let span = Span::new(tokens[i].start, tokens[j - 1].end);
            out.push(EntityMention {
                text: text[span.range()].to_string(),
                span,
                entity_type,
            });
            i = j;
        }
        out
    }
}

fn lexicon_key(tokens: &[Token<'_>]) -> String {
    tokens.iter().map(|t| fold(t.text)).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fallback {
    Proper,
    Noun,
}

impl Fallback {
    fn merge_key(self) -> u8 {
        self as u8
    }
}

const LOCATION_SUFFIXES: &[&str] = &[
    "land", "ia", "stan", "burg", "bourg", "ville", "ton", "shire", "ford", "field", "polis",
    "port", "holm", "grad", "istan", "mouth",
];

fn proper_type(tokens: &[Token<'_>]) -> EntityType {
    let last = fold(tokens[tokens.len() - 1].text);
    if tokens.len() == 1 && LOCATION_SUFFIXES.iter().any(|s| last.ends_with(s) && last.len() > s.len() + 1) {
        EntityType::Location
    } else {
        EntityType::Person
    }
}

fn sentence_initial(text: &str, tokens: &[Token<'_>], i: usize) -> bool {
    if i == 0 {
        return true;
    }
    let between = &text[tokens[i - 1].end..tokens[i].start];
    between.contains(['.', '!', '?', ':', '"'])
}

fn fallback_type(text: &str, tokens: &[Token<'_>], i: usize) -> Option<Fallback> {
    let tok = tokens[i];
    let word = fold(tok.text);
    if CLOSED_CLASS.contains(&word.as_str()) || !tok.text.chars().all(char::is_alphabetic) {
        return None;
    }
    let capitalised = tok.text.chars().next().is_some_and(char::is_uppercase);
    if capitalised && !sentence_initial(text, tokens, i) {
        return Some(Fallback::Proper);
    }
    noun_like(&word).then_some(Fallback::Noun)
}

const NOUN_EXCEPTIONS: &[&str] = &[
    "morning", "evening", "wedding", "building", "meeting", "painting", "clothing", "thing",
    "spring", "string", "ceiling", "pudding", "sibling", "king", "ring", "wing", "ping", "ding",
    "family", "jelly", "belly", "lily", "holly", "ally", "rally", "bully", "supply", "assembly",
    "italy", "july", "fly", "butterfly", "reply", "table", "vegetable", "cable", "fable", "bible",
    "stable", "seed", "speed", "breed", "weed", "bed", "shed", "sled",
    "hundred", "bread", "head", "thread", "bird", "word", "sword", "card", "yard", "guard",
];

fn noun_like(word: &str) -> bool {
    let lemma = lemmatize_word(word);
    if NOUN_EXCEPTIONS.contains(&lemma.as_str()) {
        return true;
    }
    if lemma.chars().count() < 3 || ADJECTIVES.contains(&lemma.as_str()) {
        return false;
    }
    const NON_NOUN: &[&str] = &["ly", "ful", "ous", "able", "ible", "ing", "ed", "ish", "less"];
    !NON_NOUN.iter().any(|s| lemma.ends_with(s))
}

/// Function words, frequent verbs and adverbs that never start a mention.
const CLOSED_CLASS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our",
    "their", "i", "me", "you", "he", "she", "it", "we", "they", "them", "him", "us", "myself",
    "yourself", "mine", "yours", "what", "which", "who", "whom", "whose", "where", "when", "why",
    "how", "and", "or", "but", "nor", "so", "yet", "if", "then", "than", "because", "while",
    "though", "although", "of", "in", "on", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "out", "off", "over", "under", "again", "further", "once", "here", "there",
    "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "not",
    "only", "own", "same", "too", "very", "can", "will", "just", "should", "would", "could",
    "might", "must", "shall", "may", "is", "am", "are", "was", "were", "be", "been", "being",
    "have", "has", "had", "having", "do", "does", "did", "doing", "done", "get", "got", "gets",
    "go", "goes", "went", "gone", "come", "came", "make", "made", "take", "took", "give", "gave",
    "say", "said", "see", "saw", "know", "knew", "think", "thought", "want", "like", "likes",
    "love", "loves", "hate", "enjoy", "prefer", "grew", "grow", "live", "lived", "believe",
    "feel", "felt", "try", "tried", "use", "used", "eat", "ate", "drink", "drank", "play",
    "played", "let", "put", "keep", "kept", "tell", "told", "ask", "asked", "work", "worked",
    "also", "always", "never", "often", "sometimes", "usually", "really", "still", "even",
    "ever", "maybe", "perhaps", "well", "yes", "yeah", "oh", "ok", "okay", "man", "lot", "lots",
    "kind", "sort", "type", "way", "time", "times", "one", "two", "three", "four", "five",
    "six", "seven", "eight", "nine", "ten", "first", "second", "third", "last", "next", "much",
    "many", "every", "another", "something", "anything", "nothing", "everything", "someone",
    "anyone", "everyone", "nobody", "i'm", "it's", "don't", "didn't", "can't", "i've", "i'd",
    "i'll", "that's", "there's", "is", "being", "become", "became", "stay", "spent", "spend",
    "born", "called", "named", "near", "far", "back", "away", "now", "today", "yesterday",
    "tomorrow", "tonight", "ago", "since", "until", "till", "upon", "within", "without", "around",
    "met", "meet", "saw", "ran", "run", "swim", "swam", "read", "wrote", "write", "sing", "sang",
    "bought", "buy", "brought", "bring", "found", "find", "left", "leave", "lost", "lose", "move",
    "watch", "listen", "learn", "taught", "teach", "remember", "miss", "visit", "cook", "need",
    "wish", "hope", "mean", "seem", "look", "help", "start", "begin", "began", "became", "call",
];

const ADJECTIVES: &[&str] = &[
    "good", "great", "bad", "big", "small", "little", "old", "new", "young", "happy", "sad",
    "nice", "best", "better", "worse", "worst", "hot", "cold", "warm", "cool", "red", "blue",
    "green", "black", "white", "long", "short", "high", "low", "large", "huge", "tiny", "fine",
    "real", "true", "false", "whole", "full", "empty", "free", "easy", "hard", "difficult",
    "important", "favourite", "favorite", "older", "oldest", "younger", "youngest", "bigger",
    "biggest", "smaller", "smallest", "different", "same", "public", "private", "local", "dear",
    "sweet", "fresh", "strong", "weak", "deep", "early", "late", "whole", "single", "married",
    "own", "entire", "special", "certain", "main", "simple", "rich", "poor", "wild", "deadly",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon() -> EntityLexicon {
        let mut lex = EntityLexicon::new();
        lex.insert("orange juice", EntityType::FoodAndBeverages);
        lex.insert("juice", EntityType::FoodAndBeverages);
        lex.insert("Italy", EntityType::Location);
        lex.insert("sister", EntityType::Person);
        lex
    }

    fn mentions(text: &str) -> Vec<(String, EntityType)> {
        lexicon()
            .recognize(text)
            .into_iter()
            .map(|m| (text[m.span.range()].to_string(), m.entity_type))
            .collect()
    }

    #[test]
    fn tag_normalisation() {
        assert_eq!("Food & Beverages".parse::<EntityType>().unwrap(), EntityType::FoodAndBeverages);
        assert_eq!("work-of-art".parse::<EntityType>().unwrap(), EntityType::WorkOfArt);
        assert!("MOOD".parse::<EntityType>().is_err());
    }

    #[test]
    fn priority_follows_declaration() {
        assert!(EntityType::Person.priority() < EntityType::Location.priority());
        assert!(EntityType::FoodAndBeverages.priority() < EntityType::Other.priority());
    }

    #[test]
    fn longest_gazetteer_match_wins() {
        assert_eq!(
            mentions("I love to drink orange juice in the morning"),
            [
                ("orange juice".to_string(), EntityType::FoodAndBeverages),
                ("morning".to_string(), EntityType::Other),
            ]
        );
    }

    #[test]
    fn plural_heads_hit_singular_entries() {
        assert_eq!(mentions("my sisters")[0].1, EntityType::Person);
    }

    #[test]
    fn capitalised_words_are_names_or_places() {
        assert_eq!(
            mentions("I met Tom Hanks in Boston"),
            [
                ("Tom Hanks".to_string(), EntityType::Person),
                ("Boston".to_string(), EntityType::Location),
            ]
        );
    }

    #[test]
    fn adjectives_and_adverbs_are_not_mentions() {
        assert!(mentions("I grew up happy").is_empty());
        assert!(mentions("it was really wonderful").is_empty());
    }

    #[test]
    fn mentions_are_disjoint_and_ordered() {
        let m = lexicon().recognize("soccer balls and tennis rackets in Italy");
        for w in m.windows(2) {
            assert!(w[0].span.end <= w[1].span.start);
        }
    }
}
