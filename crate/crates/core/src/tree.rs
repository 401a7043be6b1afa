//! The Dialogue Tree: conversation topics generated from the ontology.
//!
//! Every class becomes a node under its parent class. An instance that lists
//! another instance in `topic_links` (within the same layer and owner) adds
//! a composite topic, named after the filler followed by the linking class,
//! as a *sibling* of the linking class: `EN_TEA -> EN_MILK` puts `MilkTea`
//! next to `Tea`.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nlu::lemma::{concept_key, lemma_tokens, lemmatize};
use crate::ontology::{Layer, Likeliness, Ontology, SentenceKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikelinessEntry {
    pub layer: Layer,
    pub owner: String,
    pub value: Likeliness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicNode {
    pub topic: String,
    pub display_name: String,
    /// The class the node stands for; for composite topics, the linking class.
    pub class_name: String,
    pub parent: Option<String>,
    pub children: Vec<String>,
    pub sentences: BTreeMap<SentenceKind, Vec<String>>,
    pub keywords: Vec<String>,
    pub likeliness: Vec<LikelinessEntry>,
    pub depth: usize,
    pub composite: bool,
}

impl TopicNode {
    /// Likeliness for `user`: their own value if any, else the first
    /// culture-level value, else medium.
    pub fn likeliness_for(&self, user: &str) -> Likeliness {
        let ps = self.likeliness.iter().find(|e| e.layer == Layer::PS && e.owner == user);
        let cs = self.likeliness.iter().find(|e| e.layer == Layer::CS);
        ps.or(cs).map_or(Likeliness::Medium, |e| e.value)
    }

    pub fn all_sentences(&self) -> impl Iterator<Item = &str> {
        self.sentences.values().flatten().map(String::as_str)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree built from revision {tree} cannot be patched to revision {ontology}")]
    StaleRevision { tree: u64, ontology: u64 },
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueTree {
    root: String,
    nodes: IndexMap<String, TopicNode>,
    source_revision: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDump {
    pub topic: String,
    pub display_name: String,
    pub parent: Option<String>,
    pub children: Vec<String>,
    pub sentences: BTreeMap<SentenceKind, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDump {
    pub source_revision: u64,
    /// Pre-order, children in tree order.
    pub nodes: Vec<NodeDump>,
}

struct Composite {
    id: String,
    display_name: String,
    filler: String,
    linker: String,
    parent: String,
    likeliness: Vec<LikelinessEntry>,
}

/// Composite topics in discovery order, merged by id.
fn composites(onto: &Ontology, taken: &dyn Fn(&str) -> bool) -> Vec<Composite> {
    let mut out: Vec<Composite> = Vec::new();
    for linker in onto.instances() {
        for link in &linker.topic_links {
            let Some(filler) = onto.instance(link) else { continue };
            if filler.layer != linker.layer || filler.owner() != linker.owner() {
                continue;
            }
            let linker_class = onto.class(&linker.class_name).expect("integrity");
            let Some(parent) = linker_class.parent.clone() else { continue };
            let filler_class = onto.class(&filler.class_name).expect("integrity");
            let entry = LikelinessEntry {
                layer: filler.layer,
                owner: filler.owner().unwrap_or_default().to_string(),
                value: filler.likeliness,
            };
            if let Some(c) = out
                .iter_mut()
                .find(|c| c.linker == linker_class.name && c.filler == filler_class.name)
            {
                if !c.likeliness.contains(&entry) {
                    c.likeliness.push(entry);
                }
                continue;
            }
            let base = format!("{}{}", filler_class.name, linker_class.name);
            let mut id = base.clone();
            let mut n = 2;
            while taken(&id) || out.iter().any(|c| c.id == id) {
                id = format!("{base}{n}");
                n += 1;
            }
            out.push(Composite {
                id,
                display_name: format!(
                    "{} {}",
                    filler_class.display_name,
                    linker_class.display_name.to_lowercase()
                ),
                filler: filler_class.name.clone(),
                linker: linker_class.name.clone(),
                parent,
                likeliness: vec![entry],
            });
        }
    }
    out
}

fn keyword_set(extra: &[String], display_name: &str, name: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let candidates = extra
        .iter()
        .map(|k| lemmatize(k))
        .chain([concept_key(display_name), concept_key(name)]);
    for k in candidates {
        if !k.is_empty() && !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

/// Trigger keywords of a class: its authored keywords plus its names, all
/// lemmatized.
pub fn class_keywords(onto: &Ontology, class: &str) -> Vec<String> {
    onto.class(class)
        .map(|c| keyword_set(&c.keywords, &c.display_name, &c.name))
        .unwrap_or_default()
}

/// True when the keyword's lemmas occur contiguously in `words`, which
/// should come from [`lemma_tokens`].
pub fn mentions_keyword(words: &[String], keyword: &str) -> bool {
    let kw = lemma_tokens(keyword);
    !kw.is_empty() && words.windows(kw.len()).any(|w| w == kw.as_slice())
}

fn template_sentences(onto: &Ontology, class: &str, name: &str) -> BTreeMap<SentenceKind, Vec<String>> {
    let mut out: BTreeMap<SentenceKind, Vec<String>> = BTreeMap::new();
    for t in onto.effective_templates(class) {
        out.entry(t.kind).or_default().push(t.instantiate(name));
    }
    out
}

fn class_node(onto: &Ontology, class: &str, composites: &[Composite]) -> TopicNode {
    let c = onto.class(class).expect("known class");
    let mut sentences = template_sentences(onto, class, &c.display_name);
    let mut likeliness = Vec::new();
    for inst in onto.instances_of(class) {
        for s in &inst.sentences {
            sentences.entry(SentenceKind::of_sentence(s)).or_default().push(s.clone());
        }
        likeliness.push(LikelinessEntry {
            layer: inst.layer,
            owner: inst.owner().unwrap_or_default().to_string(),
            value: inst.likeliness,
        });
    }
    let mut children: Vec<String> = onto.children(class).iter().map(|k| k.name.clone()).collect();
    children.extend(composites.iter().filter(|k| k.parent == class).map(|k| k.id.clone()));
    TopicNode {
        topic: c.name.clone(),
        display_name: c.display_name.clone(),
        class_name: c.name.clone(),
        parent: c.parent.clone(),
        children,
        sentences,
        keywords: class_keywords(onto, class),
        likeliness,
        depth: onto.depth(class),
        composite: false,
    }
}

fn composite_node(onto: &Ontology, k: &Composite) -> TopicNode {
    TopicNode {
        topic: k.id.clone(),
        display_name: k.display_name.clone(),
        class_name: k.linker.clone(),
        parent: Some(k.parent.clone()),
        children: Vec::new(),
        sentences: template_sentences(onto, &k.linker, &k.display_name),
        keywords: keyword_set(&[], &k.display_name, &k.display_name),
        likeliness: k.likeliness.clone(),
        depth: onto.depth(&k.parent) + 1,
        composite: true,
    }
}

pub fn build_tree(onto: &Ontology) -> DialogueTree {
    let comps = composites(onto, &|id| onto.has_class(id));
    let mut nodes = IndexMap::new();
    for c in onto.classes() {
        nodes.insert(c.name.clone(), class_node(onto, &c.name, &comps));
    }
    for k in &comps {
        nodes.insert(k.id.clone(), composite_node(onto, k));
    }
    DialogueTree {
        root: onto.root_name().to_string(),
        nodes,
        source_revision: onto.revision(),
    }
}

/// Brings `tree` up to date after a single `insert_class` or
/// `attach_sentence` touching `changed_class`.
pub fn patch_tree(tree: &DialogueTree, onto: &Ontology, changed_class: &str) -> Result<DialogueTree, TreeError> {
    if tree.source_revision + 1 != onto.revision() {
        return Err(TreeError::StaleRevision {
            tree: tree.source_revision,
            ontology: onto.revision(),
        });
    }
    let class = onto
        .class(changed_class)
        .ok_or_else(|| TreeError::UnknownTopic(changed_class.to_string()))?;
    if tree.node(changed_class).is_some_and(|n| n.composite) {
        // the new class takes a composite's id, so composites get renumbered
        return Ok(build_tree(onto));
    }
    let comps = composites(onto, &|id| onto.has_class(id));
    let mut out = tree.clone();
    out.nodes.insert(changed_class.to_string(), class_node(onto, changed_class, &comps));
    if let Some(parent) = &class.parent {
        out.nodes.insert(parent.clone(), class_node(onto, parent, &comps));
    }
    out.source_revision = onto.revision();
    Ok(out)
}

impl DialogueTree {
    pub fn source_revision(&self) -> u64 {
        self.source_revision
    }

    pub fn root(&self) -> &TopicNode {
        &self.nodes[&self.root]
    }

    pub fn node(&self, topic: &str) -> Option<&TopicNode> {
        self.nodes.get(topic)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, topic: &str) -> Vec<&TopicNode> {
        self.nodes
            .get(topic)
            .map(|n| n.children.iter().map(|c| &self.nodes[c]).collect())
            .unwrap_or_default()
    }

    /// Nodes in pre-order.
    pub fn preorder(&self) -> Vec<&TopicNode> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root.as_str()];
        while let Some(t) = stack.pop() {
            let n = &self.nodes[t];
            out.push(n);
            stack.extend(n.children.iter().rev().map(String::as_str));
        }
        out
    }

    pub fn dump(&self) -> TreeDump {
        TreeDump {
            source_revision: self.source_revision,
            nodes: self
                .preorder()
                .into_iter()
                .map(|n| NodeDump {
                    topic: n.topic.clone(),
                    display_name: n.display_name.clone(),
                    parent: n.parent.clone(),
                    children: n.children.clone(),
                    sentences: n.sentences.clone(),
                })
                .collect(),
        }
    }

    pub fn dump_json(&self) -> String {
        serde_json::to_string_pretty(&self.dump()).expect("tree dump serializes")
    }

    /// The topic whose keyword occurs in `sentence` with the most words.
    /// Ties go to the deeper node, then to the smaller topic id. The root is
    /// never triggered.
    pub fn trigger_topic(&self, sentence: &str) -> Option<&TopicNode> {
        let words = lemma_tokens(sentence);
        let mut best: Option<((usize, usize, usize), &TopicNode)> = None;
        for node in self.nodes.values() {
            if node.topic == self.root {
                continue;
            }
            for kw in &node.keywords {
                if !mentions_keyword(&words, kw) {
                    continue;
                }
                let score = (lemma_tokens(kw).len(), kw.len(), node.depth);
                let wins = match &best {
                    None => true,
                    Some((s, n)) => score > *s || (score == *s && node.topic < n.topic),
                };
                if wins {
                    best = Some((score, node));
                }
            }
        }
        best.map(|(_, n)| n)
    }

    /// Next topic after `current`: the most likely unvisited child, else the
    /// first unvisited sibling, else the parent. `visited` is the caller's
    /// per-session memory and is updated.
    pub fn next_topic(
        &self,
        current: &str,
        user: &str,
        visited: &mut BTreeSet<String>,
    ) -> Result<&TopicNode, TreeError> {
        let node = self
            .nodes
            .get(current)
            .ok_or_else(|| TreeError::UnknownTopic(current.to_string()))?;
        visited.insert(node.topic.clone());
        let mut best: Option<&TopicNode> = None;
        for child in self.children(current) {
            if visited.contains(&child.topic) {
                continue;
            }
            if best.is_none_or(|b| child.likeliness_for(user) > b.likeliness_for(user)) {
                best = Some(child);
            }
        }
        let sibling = || {
            let parent = node.parent.as_deref()?;
            self.children(parent)
                .into_iter()
                .find(|s| s.topic != node.topic && !visited.contains(&s.topic))
        };
        let chosen = best
            .or_else(sibling)
            .or_else(|| node.parent.as_deref().map(|p| &self.nodes[p]))
            .unwrap_or(node);
        visited.insert(chosen.topic.clone());
        Ok(chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::load_ontology;

    fn beverages() -> Ontology {
        load_ontology(
            r#"{
              "classes": [
                {"name":"Topic","display_name":"Topic"},
                {"name":"Beverage","display_name":"Beverage","parent":"Topic"},
                {"name":"Coffee","display_name":"Coffee","parent":"Beverage","templates":["like"]},
                {"name":"Espresso","display_name":"Espresso","parent":"Coffee"},
                {"name":"Milk","display_name":"Milk","parent":"Beverage"},
                {"name":"Tea","display_name":"Tea","parent":"Beverage","keywords":["teas"]},
                {"name":"GreenTea","display_name":"Green tea","parent":"Tea"}
              ],
              "instances": [
                {"id":"EN_COFFEE","class":"Coffee","layer":"CS","culture":"EN","likeliness":"Medium"},
                {"id":"EN_TEA","class":"Tea","layer":"CS","culture":"EN","likeliness":"High",
                 "topic_links":["EN_MILK"]},
                {"id":"EN_MILK","class":"Milk","layer":"CS","culture":"EN","likeliness":"Low"},
                {"id":"U1_COFFEE","class":"Coffee","layer":"PS","user":"U1","likeliness":"VeryHigh"}
              ],
              "templates": [{"id":"like","kind":"question","text":"Do you like $hasName?"}]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn composite_is_a_sibling() {
        let t = build_tree(&beverages());
        assert_eq!(t.node("Tea").unwrap().children, ["GreenTea"]);
        assert_eq!(t.node("MilkTea").unwrap().parent.as_deref(), Some("Beverage"));
        assert_eq!(t.node("Beverage").unwrap().children, ["Coffee", "Milk", "Tea", "MilkTea"]);
        assert_eq!(t.len(), 8);
    }

    #[test]
    fn templates_are_inherited_and_instantiated() {
        let t = build_tree(&beverages());
        let q = &t.node("Espresso").unwrap().sentences[&SentenceKind::Question];
        assert_eq!(q, &["Do you like Espresso?"]);
        assert!(t.node("Tea").unwrap().sentences.is_empty());
    }

    #[test]
    fn root_only_tree() {
        let o = load_ontology(r#"{"classes":[{"name":"Topic","display_name":"Topic"}]}"#).unwrap();
        assert_eq!(build_tree(&o).len(), 1);
    }

    #[test]
    fn stale_patch_is_refused() {
        let o = beverages();
        let t = build_tree(&o);
        assert!(matches!(patch_tree(&t, &o, "Tea"), Err(TreeError::StaleRevision { .. })));
    }

    #[test]
    fn patch_equals_rebuild() {
        let mut o = beverages();
        let t = build_tree(&o);
        o.insert_class("orange juice", "Beverage").unwrap();
        let patched = patch_tree(&t, &o, "orange juice").unwrap();
        assert_eq!(patched, build_tree(&o));
        o.attach_sentence("orange juice", "An orange a day keeps the doctor away!", Layer::PS, "U1")
            .unwrap();
        let patched = patch_tree(&patched, &o, "orange juice").unwrap();
        assert_eq!(patched, build_tree(&o));
        assert_eq!(patched.dump_json(), build_tree(&o).dump_json());
    }

    #[test]
    fn longest_keyword_wins() {
        let t = build_tree(&beverages());
        assert_eq!(t.trigger_topic("I drink green tea").unwrap().topic, "GreenTea");
        assert_eq!(t.trigger_topic("lots of teas").unwrap().topic, "Tea");
        assert!(t.trigger_topic("nothing here").is_none());
    }

    #[test]
    fn next_topic_policy() {
        let t = build_tree(&beverages());
        let mut seen = BTreeSet::new();
        assert_eq!(t.next_topic("Beverage", "U9", &mut seen).unwrap().topic, "Tea");
        // a person-specific value overrides the culture
        let mut seen = BTreeSet::new();
        assert_eq!(t.next_topic("Beverage", "U1", &mut seen).unwrap().topic, "Coffee");
        // leaf with visited siblings falls back to the parent
        let mut seen: BTreeSet<String> = ["Coffee", "Milk", "Tea", "MilkTea"].map(String::from).into();
        assert_eq!(t.next_topic("Espresso", "U9", &mut seen).unwrap().topic, "Coffee");
        let mut seen: BTreeSet<String> = ["GreenTea"].map(String::from).into();
        assert_eq!(t.next_topic("GreenTea", "U9", &mut seen).unwrap().topic, "Tea");
    }

    #[test]
    fn dump_is_preorder() {
        let t = build_tree(&beverages());
        let order: Vec<_> = t.dump().nodes.into_iter().map(|n| n.topic).collect();
        assert_eq!(
            order,
            ["Topic", "Beverage", "Coffee", "Espresso", "Milk", "Tea", "GreenTea", "MilkTea"]
        );
    }
}
