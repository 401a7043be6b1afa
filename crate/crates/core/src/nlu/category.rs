//! Keyword rules mapping text to content category paths.

use serde::{Deserialize, Serialize};

use super::lemma::lemma_tokens;
use super::NluError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentCategory {
    /// Slash separated path, most general first: `"Food & Drink/Beverages"`.
    pub path: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRule {
    pub category: String,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRules {
    pub rules: Vec<CategoryRule>,
}

fn contains_seq(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

impl CategoryRules {
    /// Parses a JSON array of `{"category", "keywords"}` objects.
    pub fn from_json(text: &str) -> Result<Self, NluError> {
        let rules: Vec<CategoryRule> =
            serde_json::from_str(text).map_err(|e| NluError::Resource(e.to_string()))?;
        for r in &rules {
            if r.category.trim().is_empty() || r.keywords.is_empty() {
                return Err(NluError::Resource(format!("bad category rule {:?}", r.category)));
            }
        }
        Ok(CategoryRules { rules })
    }

    /// Categories whose keywords occur in `text`. Confidence is the share of
    /// a rule's keywords present; results are sorted by confidence, then path.
    pub fn classify(&self, text: &str) -> Vec<ContentCategory> {
        let lemmas = lemma_tokens(text);
        let mut out: Vec<ContentCategory> = Vec::new();
        for rule in &self.rules {
            let hits = rule
                .keywords
                .iter()
                .filter(|k| contains_seq(&lemmas, &lemma_tokens(k)))
                .count();
            if hits == 0 {
                continue;
            }
            let confidence = hits as f64 / rule.keywords.len() as f64;
            match out.iter_mut().find(|c| c.path == rule.category) {
                Some(c) => c.confidence = c.confidence.max(confidence),
                None => out.push(ContentCategory {
                    path: rule.category.clone(),
                    confidence,
                }),
            }
        }
        out.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then_with(|| a.path.cmp(&b.path)));
        out
    }
}
