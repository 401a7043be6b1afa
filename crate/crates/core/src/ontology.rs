//! Three-layer knowledge base: the class taxonomy, culture-specific and
//! person-specific instances, and the dictionaries used to place new
//! concepts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nlu::lemma::{concept_key, lemmatize};
use crate::nlu::EntityType;

pub const HAS_NAME: &str = "$hasName";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Likeliness {
    VeryLow,
    Low,
    #[default]
    Medium,
    High,
    VeryHigh,
}

impl Likeliness {
    pub const ALL: [Likeliness; 5] = [
        Likeliness::VeryLow,
        Likeliness::Low,
        Likeliness::Medium,
        Likeliness::High,
        Likeliness::VeryHigh,
    ];

    /// Numerator over ten: 1, 3, 5, 7, 9.
    pub fn tenths(self) -> u8 {
        2 * self as u8 + 1
    }

    pub fn numeric(self) -> f64 {
        f64::from(self.tenths()) / 10.0
    }

    pub fn from_numeric(value: f64) -> Option<Self> {
        Likeliness::ALL.into_iter().find(|l| (l.numeric() - value).abs() < 1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    /// Culture-specific knowledge.
    CS,
    /// Person-specific knowledge.
    PS,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SentenceKind {
    PositiveAssertion,
    NegativeAssertion,
    Question,
}

impl SentenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SentenceKind::PositiveAssertion => "positive-assertion",
            SentenceKind::NegativeAssertion => "negative-assertion",
            SentenceKind::Question => "question",
        }
    }

    /// Kind assumed for a free sentence stored on an instance.
    pub fn of_sentence(sentence: &str) -> Self {
        if sentence.trim_end().ends_with('?') {
            SentenceKind::Question
        } else {
            SentenceKind::PositiveAssertion
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceTemplate {
    pub id: String,
    pub kind: SentenceKind,
    pub text: String,
}

impl SentenceTemplate {
    pub fn instantiate(&self, name: &str) -> String {
        self.text.replace(HAS_NAME, name)
    }

    fn check(&self) -> Result<(), String> {
        if self.text.trim().is_empty() {
            return Err(format!("template {:?} has empty text", self.id));
        }
        let mut rest = self.text.as_str();
        while let Some(at) = rest.find('$') {
            let tail = &rest[at..];
            if !tail.starts_with(HAS_NAME) {
                return Err(format!("template {:?} uses an unsupported variable", self.id));
            }
            rest = &tail[HAS_NAME.len()..];
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologyClass {
    pub name: String,
    pub display_name: String,
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_type: Option<String>,
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub templates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub id: String,
    #[serde(rename = "class")]
    pub class_name: String,
    pub layer: Layer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub culture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<String>,
    #[serde(default)]
    pub sentences: Vec<String>,
    #[serde(default)]
    pub likeliness: Likeliness,
    #[serde(default)]
    pub topic_links: Vec<String>,
}

impl Instance {
    /// Culture tag for CS instances, user tag for PS instances.
    pub fn owner(&self) -> Option<&str> {
        match self.layer {
            Layer::CS => self.culture.as_deref(),
            Layer::PS => self.user.as_deref(),
        }
    }
}

/// Word to synonyms, closed under symmetry at load time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymDictionary {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl SynonymDictionary {
    pub fn from_raw(raw: &BTreeMap<String, Vec<String>>) -> Self {
        let mut dict = SynonymDictionary::default();
        for (word, syns) in raw {
            for syn in syns {
                dict.add_pair(word, syn);
            }
        }
        dict
    }

    pub fn add_pair(&mut self, a: &str, b: &str) {
        let (a, b) = (lemmatize(a), lemmatize(b));
        if a.is_empty() || b.is_empty() || a == b {
            return;
        }
        self.entries.entry(a.clone()).or_default().insert(b.clone());
        self.entries.entry(b).or_default().insert(a);
    }

    pub fn lookup(&self, word: &str) -> Vec<String> {
        let key = lemmatize(word);
        self.entries
            .get(&key)
            .map(|s| s.iter().filter(|w| **w != key).cloned().collect())
            .unwrap_or_default()
    }

    pub fn to_raw(&self) -> BTreeMap<String, Vec<String>> {
        self.entries
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OntologyError {
    #[error("malformed ontology document: {0}")]
    Parse(String),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("{name:?} is already known as class {existing:?}")]
    DuplicateConcept { name: String, existing: String },
    #[error("unknown parent class {0:?}")]
    UnknownParent(String),
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("sentence is empty")]
    EmptySentence,
    #[error("missing owner tag for a {0:?} instance")]
    MissingOwner(Layer),
}

/// The on-disk form. Field order is the file's key order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologyDocument {
    pub classes: Vec<OntologyClass>,
    #[serde(default)]
    pub instances: Vec<Instance>,
    #[serde(default)]
    pub synonyms: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub entity_type_map: BTreeMap<String, String>,
    #[serde(default)]
    pub category_map: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub templates: Vec<SentenceTemplate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    classes: IndexMap<String, OntologyClass>,
    instances: IndexMap<String, Instance>,
    synonyms: SynonymDictionary,
    entity_type_map: BTreeMap<String, String>,
    category_map: BTreeMap<String, String>,
    templates: IndexMap<String, SentenceTemplate>,
    root: String,
    revision: u64,
}

fn normalize_category(path: &str) -> String {
    path.trim().trim_matches('/').to_string()
}

pub fn load_ontology(document: &str) -> Result<Ontology, OntologyError> {
    let doc: OntologyDocument =
        serde_json::from_str(document).map_err(|e| OntologyError::Parse(e.to_string()))?;
    Ontology::from_document(doc)
}

impl Ontology {
    pub fn from_document(doc: OntologyDocument) -> Result<Self, OntologyError> {
        let integrity = |msg: String| OntologyError::Integrity(msg);
        let mut classes = IndexMap::new();
        for c in doc.classes {
            if classes.contains_key(&c.name) {
                return Err(integrity(format!("duplicate class name {:?}", c.name)));
            }
            classes.insert(c.name.clone(), c);
        }
        let mut instances = IndexMap::new();
        for i in doc.instances {
            if instances.contains_key(&i.id) {
                return Err(integrity(format!("duplicate instance id {:?}", i.id)));
            }
            instances.insert(i.id.clone(), i);
        }
        let mut templates = IndexMap::new();
        for t in doc.templates {
            if templates.contains_key(&t.id) {
                return Err(integrity(format!("duplicate template id {:?}", t.id)));
            }
            templates.insert(t.id.clone(), t);
        }
        let roots: Vec<&String> =
            classes.values().filter(|c| c.parent.is_none()).map(|c| &c.name).collect();
        let root = match roots.as_slice() {
            [one] => (*one).clone(),
            [] if classes.is_empty() => return Err(integrity("no classes".into())),
            [] => String::new(), // every class has a parent: the cycle check reports it
            many => return Err(integrity(format!("more than one root: {many:?}"))),
        };
        let onto = Ontology {
            classes,
            instances,
            synonyms: SynonymDictionary::from_raw(&doc.synonyms),
            entity_type_map: doc
                .entity_type_map
                .into_iter()
                .map(|(k, v)| (EntityType::normalize_tag(&k), v))
                .collect(),
            category_map: doc
                .category_map
                .into_iter()
                .map(|(k, v)| (normalize_category(&k), v))
                .collect(),
            templates,
            root,
            revision: 0,
        };
        onto.check_integrity()?;
        Ok(onto)
    }

    pub fn to_document(&self) -> OntologyDocument {
        OntologyDocument {
            classes: self.classes.values().cloned().collect(),
            instances: self.instances.values().cloned().collect(),
            synonyms: self.synonyms.to_raw(),
            entity_type_map: self.entity_type_map.clone(),
            category_map: self.category_map.clone(),
            templates: self.templates.values().cloned().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("ontology serializes")
    }

    /// Full referential check. Runs after load and is cheap enough to call
    /// after any mutation.
    pub fn check_integrity(&self) -> Result<(), OntologyError> {
        let bad = |msg: String| Err(OntologyError::Integrity(msg));
        let mut keys: BTreeMap<String, &str> = BTreeMap::new();
        for c in self.classes.values() {
            if let Some(p) = &c.parent {
                if !self.classes.contains_key(p) {
                    return bad(format!("class {:?} has unknown parent {p:?}", c.name));
                }
            }
            // walk up; more steps than classes means a cycle
            let mut cur = c;
            let mut seen = vec![c.name.as_str()];
            while let Some(p) = &cur.parent {
                if seen.contains(&p.as_str()) {
                    seen.push(p);
                    return bad(format!("cycle through classes {}", seen.join(" -> ")));
                }
                seen.push(p);
                cur = &self.classes[p];
            }
            for key in [concept_key(&c.name), concept_key(&c.display_name)] {
                if let Some(other) = keys.get(&key) {
                    if *other != c.name {
                        return bad(format!("classes {other:?} and {:?} share the name {key:?}", c.name));
                    }
                }
                keys.insert(key, &c.name);
            }
            if let Some(tag) = &c.entity_type {
                tag.parse::<EntityType>()
                    .map_err(|_| OntologyError::Integrity(format!("class {:?}: bad entity type {tag:?}", c.name)))?;
            }
            for t in &c.templates {
                if !self.templates.contains_key(t) {
                    return bad(format!("class {:?} references unknown template {t:?}", c.name));
                }
            }
        }
        if !self.classes.contains_key(&self.root) {
            return bad("no root class".into());
        }
        for t in self.templates.values() {
            t.check().map_err(OntologyError::Integrity)?;
        }
        for i in self.instances.values() {
            if !self.classes.contains_key(&i.class_name) {
                return bad(format!("instance {:?} has unknown class {:?}", i.id, i.class_name));
            }
            let consistent = match i.layer {
                Layer::CS => i.culture.is_some() && i.user.is_none(),
                Layer::PS => i.user.is_some() && i.culture.is_none(),
            };
            if !consistent {
                return bad(format!("instance {:?}: layer and culture/user tags disagree", i.id));
            }
            for link in &i.topic_links {
                if !self.instances.contains_key(link) {
                    return bad(format!("instance {:?} links unknown instance {link:?}", i.id));
                }
            }
        }
        for (tag, class) in &self.entity_type_map {
            tag.parse::<EntityType>()
                .map_err(|_| OntologyError::Integrity(format!("bad entity type tag {tag:?}")))?;
            self.check_map_target("entity_type_map", tag, class)?;
        }
        for (path, class) in &self.category_map {
            self.check_map_target("category_map", path, class)?;
        }
        Ok(())
    }

    fn check_map_target(&self, map: &str, key: &str, class: &str) -> Result<(), OntologyError> {
        if !self.classes.contains_key(class) {
            return Err(OntologyError::Integrity(format!("{map}[{key:?}] names unknown class {class:?}")));
        }
        if class == self.root {
            return Err(OntologyError::Integrity(format!("{map}[{key:?}] may not target the root")));
        }
        Ok(())
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn root(&self) -> &OntologyClass {
        &self.classes[&self.root]
    }

    pub fn root_name(&self) -> &str {
        &self.root
    }

    pub fn class(&self, name: &str) -> Option<&OntologyClass> {
        self.classes.get(name)
    }

    pub fn has_class(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    /// Classes in declaration order.
    pub fn classes(&self) -> impl Iterator<Item = &OntologyClass> {
        self.classes.values()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances.get(id)
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.instances.values()
    }

    pub fn instances_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a Instance> + 'a {
        self.instances.values().filter(move |i| i.class_name == class)
    }

    pub fn template(&self, id: &str) -> Option<&SentenceTemplate> {
        self.templates.get(id)
    }

    pub fn synonyms(&self) -> &SynonymDictionary {
        &self.synonyms
    }

    /// Direct subclasses in declaration order.
    pub fn children(&self, name: &str) -> Vec<&OntologyClass> {
        self.classes
            .values()
            .filter(|c| c.parent.as_deref() == Some(name))
            .collect()
    }

    /// `name` first, root last. Empty for unknown classes.
    pub fn ancestors(&self, name: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = self.classes.get(name);
        while let Some(c) = cur {
            out.push(c.name.as_str());
            cur = c.parent.as_ref().and_then(|p| self.classes.get(p));
        }
        out
    }

    pub fn is_ancestor_or_self(&self, ancestor: &str, of: &str) -> bool {
        self.ancestors(of).contains(&ancestor)
    }

    /// Root depth is zero.
    pub fn depth(&self, name: &str) -> usize {
        self.ancestors(name).len().saturating_sub(1)
    }

    /// Templates of a class followed by those inherited from its ancestors,
    /// nearest first, without repeats.
    pub fn effective_templates(&self, name: &str) -> Vec<&SentenceTemplate> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for class in self.ancestors(name) {
            for id in &self.classes[class].templates {
                if seen.insert(id.as_str()) {
                    out.push(&self.templates[id]);
                }
            }
        }
        out
    }

    pub fn lookup_synonyms(&self, word: &str) -> Vec<String> {
        self.synonyms.lookup(word)
    }

    /// The class a phrase already denotes, by normalised name or through one
    /// of its synonyms.
    pub fn find_concept(&self, phrase: &str) -> Option<&str> {
        let key = concept_key(phrase);
        if key.is_empty() {
            return None;
        }
        let by_key = |k: &str| {
            self.classes
                .values()
                .find(|c| concept_key(&c.name) == k || concept_key(&c.display_name) == k)
                .map(|c| c.name.as_str())
        };
        by_key(&key).or_else(|| {
            self.synonyms
                .lookup(&key)
                .iter()
                .find_map(|s| by_key(&concept_key(s)))
        })
    }

    pub fn map_entity_type(&self, tag: &str) -> Option<&str> {
        let norm = EntityType::normalize_tag(tag);
        if norm == EntityType::Other.as_str() {
            return None;
        }
        if let Some(class) = self.entity_type_map.get(&norm) {
            return Some(class);
        }
        self.classes
            .values()
            .find(|c| {
                c.parent.is_some()
                    && c.entity_type.as_deref().map(EntityType::normalize_tag).as_deref() == Some(&norm)
            })
            .map(|c| c.name.as_str())
    }

    /// A class's own categories plus every category path mapped onto it.
    pub fn class_categories(&self, name: &str) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .classes
            .get(name)
            .map(|c| c.categories.iter().map(|p| normalize_category(p)).collect())
            .unwrap_or_default();
        out.extend(
            self.category_map
                .iter()
                .filter(|(_, class)| *class == name)
                .map(|(path, _)| path.clone()),
        );
        out
    }

    /// Classes sharing a category with `categories`, most shared first, then
    /// shallowest, then by name.
    pub fn classes_for_categories(&self, categories: &[String]) -> Vec<String> {
        let wanted: BTreeSet<String> = categories.iter().map(|p| normalize_category(p)).collect();
        let mut scored: Vec<(usize, usize, &str)> = self
            .classes
            .values()
            .filter(|c| c.name != self.root)
            .filter_map(|c| {
                let shared = self.class_categories(&c.name).intersection(&wanted).count();
                (shared > 0).then(|| (shared, self.depth(&c.name), c.name.as_str()))
            })
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)));
        scored.into_iter().map(|(_, _, n)| n.to_string()).collect()
    }

    pub fn insert_class(&mut self, name: &str, parent: &str) -> Result<(), OntologyError> {
        let name = name.trim();
        if !self.classes.contains_key(parent) {
            return Err(OntologyError::UnknownParent(parent.to_string()));
        }
        if let Some(existing) = self.find_concept(name) {
            return Err(OntologyError::DuplicateConcept {
                name: name.to_string(),
                existing: existing.to_string(),
            });
        }
        if name.is_empty() || self.classes.contains_key(name) {
            return Err(OntologyError::DuplicateConcept {
                name: name.to_string(),
                existing: name.to_string(),
            });
        }
        self.classes.insert(
            name.to_string(),
            OntologyClass {
                name: name.to_string(),
                display_name: name.to_string(),
                parent: Some(parent.to_string()),
                keywords: Vec::new(),
                entity_type: None,
                categories: Vec::new(),
                templates: Vec::new(),
            },
        );
        self.revision += 1;
        Ok(())
    }

    /// Appends a sentence to the instance of `class_name` owned by `owner`
    /// in `layer`, creating the instance if needed. Returns its id.
    pub fn attach_sentence(
        &mut self,
        class_name: &str,
        sentence: &str,
        layer: Layer,
        owner: &str,
    ) -> Result<String, OntologyError> {
        if !self.classes.contains_key(class_name) {
            return Err(OntologyError::UnknownClass(class_name.to_string()));
        }
        let sentence = sentence.trim();
        if sentence.is_empty() {
            return Err(OntologyError::EmptySentence);
        }
        if owner.trim().is_empty() {
            return Err(OntologyError::MissingOwner(layer));
        }
        let existing = self
            .instances
            .values()
            .find(|i| i.class_name == class_name && i.layer == layer && i.owner() == Some(owner))
            .map(|i| i.id.clone());
        let id = match existing {
            Some(id) => id,
            None => {
                let id = self.fresh_instance_id(owner, class_name);
                let (culture, user) = match layer {
                    Layer::CS => (Some(owner.to_string()), None),
                    Layer::PS => (None, Some(owner.to_string())),
                };
                self.instances.insert(
                    id.clone(),
                    Instance {
                        id: id.clone(),
                        class_name: class_name.to_string(),
                        layer,
                        culture,
                        user,
                        sentences: Vec::new(),
                        likeliness: Likeliness::Medium,
                        topic_links: Vec::new(),
                    },
                );
                id
            }
        };
        self.instances[&id].sentences.push(sentence.to_string());
        self.revision += 1;
        Ok(id)
    }

    fn fresh_instance_id(&self, owner: &str, class_name: &str) -> String {
        let ident = |s: &str| -> String {
            s.chars()
                .map(|c| if c.is_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
                .collect()
        };
        let base = format!("{}_{}", ident(owner), ident(class_name));
        let mut id = base.clone();
        let mut n = 2;
        while self.instances.contains_key(&id) {
            id = format!("{base}_{n}");
            n += 1;
        }
        id
    }
}

impl fmt::Display for Ontology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn walk(o: &Ontology, name: &str, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            writeln!(f, "{}{}", "  ".repeat(depth), name)?;
            for c in o.children(name) {
                walk(o, &c.name, depth + 1, f)?;
            }
            Ok(())
        }
        walk(self, &self.root, 0, f)
    }
}
