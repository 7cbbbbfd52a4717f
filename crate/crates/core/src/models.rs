//! The three selectional-preference models: word-to-class, sense-to-class
//! and class-to-class.
//!
//! All three share one shape. A conditioner (verb lemma, verb sense or verb
//! class) yields a weight `a(cn)` on every noun class, and the score of a
//! noun concept `cn_i` sums `P(cn_i | cn) * a(cn)` over the classes `cn`
//! subsuming it, where `P(cn_i | cn) = f̂r(cn_i) / f̂r(cn)`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Rel;
use crate::error::{Error, Result};
use crate::estimator::{Estimator, Mass};
use crate::number::sig17;
use crate::taxonomy::{ConceptIx, Pos, Taxonomy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "word2class")]
    WordToClass,
    #[serde(rename = "sense2class")]
    SenseToClass,
    #[serde(rename = "class2class")]
    ClassToClass,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::WordToClass,
        ModelKind::SenseToClass,
        ModelKind::ClassToClass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::WordToClass => "word2class",
            ModelKind::SenseToClass => "sense2class",
            ModelKind::ClassToClass => "class2class",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown model `{s}` (word2class, sense2class, class2class)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Conditioner {
    VerbWord(String),
    VerbSense(ConceptIx),
    VerbClass(ConceptIx),
}

impl Conditioner {
    pub fn kind_str(&self) -> &'static str {
        match self {
            Conditioner::VerbWord(_) => "verb_word",
            Conditioner::VerbSense(_) => "verb_sense",
            Conditioner::VerbClass(_) => "verb_class",
        }
    }

    pub fn key(&self, t: &Taxonomy) -> String {
        match self {
            Conditioner::VerbWord(v) => v.clone(),
            Conditioner::VerbSense(c) | Conditioner::VerbClass(c) => t.id(*c).to_string(),
        }
    }
}

/// Scores of noun concepts for one conditioner and relation. Only nonzero
/// scores are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceTable {
    pub rel: Rel,
    pub conditioner: Conditioner,
    pub provenance: String,
    trained: bool,
    scores: BTreeMap<ConceptIx, f64>,
}

impl PreferenceTable {
    /// A table for a conditioner without training mass. Distinct from a
    /// trained table that happens to have no nonzero scores.
    pub fn untrained(rel: Rel, conditioner: Conditioner) -> Self {
        PreferenceTable {
            rel,
            conditioner,
            provenance: String::new(),
            trained: false,
            scores: BTreeMap::new(),
        }
    }

    pub fn from_scores(
        rel: Rel,
        conditioner: Conditioner,
        scores: impl IntoIterator<Item = (ConceptIx, f64)>,
    ) -> Self {
        PreferenceTable {
            rel,
            conditioner,
            provenance: String::new(),
            trained: true,
            scores: scores.into_iter().filter(|&(_, s)| s > 0.0).collect(),
        }
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn score(&self, cn: ConceptIx) -> f64 {
        self.scores.get(&cn).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ConceptIx, f64)> + '_ {
        self.scores.iter().map(|(&c, &s)| (c, s))
    }

    pub fn total(&self) -> f64 {
        self.scores.values().sum()
    }

    /// Entries by descending score, ties by ascending concept id.
    pub fn ranked(&self) -> Vec<(ConceptIx, f64)> {
        let mut v: Vec<(ConceptIx, f64)> = self.iter().collect();
        sort_ranked(&mut v);
        v
    }

    /// Writes `rel TAB kind TAB key TAB noun_concept TAB score`, one row per
    /// nonzero entry in ranked order. Untrained tables write a comment line.
    pub fn dump<W: Write>(&self, t: &Taxonomy, mut sink: W) -> Result<usize> {
        let kind = self.conditioner.kind_str();
        let key = self.conditioner.key(t);
        if !self.trained {
            writeln!(sink, "# {}\t{}\t{}\tuntrained", self.rel, kind, key)?;
            return Ok(0);
        }
        let rows = self.ranked();
        for (c, s) in &rows {
            writeln!(sink, "{}\t{}\t{}\t{}\t{}", self.rel, kind, key, t.id(*c), sig17(*s))?;
        }
        Ok(rows.len())
    }
}

pub(crate) fn sort_ranked(v: &mut [(ConceptIx, f64)]) {
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

type DumpRows = (Rel, Conditioner, Vec<(ConceptIx, f64)>);

/// Reads preference-table dump rows back, one table per distinct
/// `(rel, kind, key)` in order of first appearance.
pub fn read_table_dump<R: BufRead>(source: R, t: &Taxonomy) -> Result<Vec<PreferenceTable>> {
    let mut tables: Vec<DumpRows> = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |reason: String| Error::Syntax {
            line: lineno,
            reason,
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(syntax(format!("expected 5 fields, found {}", f.len())));
        }
        let rel: Rel = f[0].parse().map_err(|token| Error::BadRel {
            line: lineno,
            token,
        })?;
        let concept = |id: &str, pos: Pos| -> Result<ConceptIx> {
            let c = t.lookup(id).map_err(|_| Error::UnknownConceptAt {
                line: lineno,
                id: id.to_string(),
            })?;
            if t.pos(c) != pos {
                return Err(Error::WrongPos {
                    line: lineno,
                    id: id.to_string(),
                    expected: pos.to_string(),
                });
            }
            Ok(c)
        };
        let conditioner = match f[1] {
            "verb_word" => Conditioner::VerbWord(f[2].to_string()),
            "verb_sense" => Conditioner::VerbSense(concept(f[2], Pos::Verb)?),
            "verb_class" => Conditioner::VerbClass(concept(f[2], Pos::Verb)?),
            other => return Err(syntax(format!("unknown conditioner kind `{other}`"))),
        };
        let noun = concept(f[3], Pos::Noun)?;
        let score: f64 = f[4]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite() && *s >= 0.0)
            .ok_or_else(|| syntax(format!("bad score `{}`", f[4])))?;
        match tables
            .iter_mut()
            .find(|(r, c, _)| *r == rel && *c == conditioner)
        {
            Some((_, _, rows)) => rows.push((noun, score)),
            None => tables.push((rel, conditioner, vec![(noun, score)])),
        }
    }
    Ok(tables
        .into_iter()
        .map(|(rel, c, rows)| PreferenceTable::from_scores(rel, c, rows))
        .collect())
}

/// Score of every noun concept given class weights `a(cn)`:
/// `score(cn_i) = Σ_{cn ⊒ cn_i} f̂r(cn_i) / f̂r(cn) * a(cn)`, skipping
/// classes with zero propagated frequency.
fn scores_from_class_weights(est: &Estimator<'_>, weights: &Mass) -> BTreeMap<ConceptIx, f64> {
    let t = est.taxonomy();
    let mut scores = BTreeMap::new();
    if weights.is_empty() {
        return scores;
    }
    for &cn_i in est.noun_support() {
        let fr_i = est.class_freq(cn_i);
        let mut s = 0.0;
        for cn in t.ancestors(cn_i) {
            if let Some(&w) = weights.get(cn) {
                let fr = est.class_freq(*cn);
                if fr > 0.0 {
                    s += fr_i / fr * w;
                }
            }
        }
        if s > 0.0 {
            scores.insert(cn_i, s);
        }
    }
    scores
}

fn normalized(mass: Mass, total: f64) -> Mass {
    mass.into_iter().map(|(c, m)| (c, m / total)).collect()
}

/// `P(cn_i | rel v)` for every noun concept.
pub fn word_to_class(est: &Estimator<'_>, verb: &str, rel: Rel) -> PreferenceTable {
    let cond = Conditioner::VerbWord(verb.to_string());
    let total = est.counts().rel_verb(rel, verb) as f64;
    if total == 0.0 {
        return PreferenceTable::untrained(rel, cond);
    }
    let weights = normalized(est.rel_verb_mass(rel, verb), total);
    PreferenceTable::from_scores(rel, cond, scores_from_class_weights(est, &weights))
}

/// `P(cn_i | rel cv_j)` from the triples tagged with verb sense `cv_j` only.
pub fn sense_to_class(est: &Estimator<'_>, cv_j: ConceptIx, rel: Rel) -> PreferenceTable {
    let cond = Conditioner::VerbSense(cv_j);
    let total = est.counts().rel_vsense(rel, cv_j) as f64;
    if total == 0.0 {
        return PreferenceTable::untrained(rel, cond);
    }
    let weights = normalized(est.rel_vsense_mass(rel, cv_j), total);
    PreferenceTable::from_scores(rel, cond, scores_from_class_weights(est, &weights))
}

/// `P(cn_i | rel cv_j)` summed over every verb class `cv ⊒ cv_j` and noun
/// class `cn ⊒ cn_i`.
///
/// The verb factor `P(cv_j | cv)` is `f̂r(cv_j) / f̂r(cv)`. When `cv_j` itself
/// was never observed that ratio is 0 for every ancestor, so the verb factor
/// is taken as 1 instead and `cv_j` inherits its ancestors' preferences.
/// Scores are a ranking and are not renormalized.
pub fn class_to_class(est: &Estimator<'_>, cv_j: ConceptIx, rel: Rel) -> PreferenceTable {
    let cond = Conditioner::VerbClass(cv_j);
    let weights = class_weights(est, cv_j, rel);
    if weights.is_empty() {
        return PreferenceTable::untrained(rel, cond);
    }
    PreferenceTable::from_scores(rel, cond, scores_from_class_weights(est, &weights))
}

/// `a(cn) = Σ_{cv ⊒ cv_j} P(cv_j | cv) * f̂r(cn rel cv) / fr(rel cv)`.
fn class_weights(est: &Estimator<'_>, cv_j: ConceptIx, rel: Rel) -> Mass {
    let t = est.taxonomy();
    let target = est.class_freq(cv_j);
    let mut weights = Mass::new();
    for &cv in t.ancestors(cv_j) {
        let total = est.rel_vclass_total(rel, cv);
        if total == 0.0 {
            continue;
        }
        let verb_factor = if target > 0.0 {
            let fr = est.class_freq(cv);
            if fr == 0.0 {
                continue;
            }
            target / fr
        } else {
            1.0
        };
        for (&cn, &m) in est.rel_class_mass(rel, cv).iter() {
            *weights.entry(cn).or_insert(0.0) += verb_factor * (m / total);
        }
    }
    weights
}

/// Computes the table of `kind` for one conditioner. `key` is a verb lemma
/// for word-to-class and a verb concept id otherwise.
pub fn train_table(est: &Estimator<'_>, kind: ModelKind, key: &str, rel: Rel) -> Result<PreferenceTable> {
    let verb_concept = || -> Result<ConceptIx> {
        let t = est.taxonomy();
        let c = t.lookup(key)?;
        if t.pos(c) != Pos::Verb {
            return Err(Error::UnknownConcept(format!("{key} (not a verb concept)")));
        }
        Ok(c)
    };
    Ok(match kind {
        ModelKind::WordToClass => word_to_class(est, key, rel),
        ModelKind::SenseToClass => sense_to_class(est, verb_concept()?, rel),
        ModelKind::ClassToClass => class_to_class(est, verb_concept()?, rel),
    })
}
