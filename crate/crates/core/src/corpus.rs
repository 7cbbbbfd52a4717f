//! Sense-tagged dependency triples and their raw frequency tables.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{ConceptIx, Pos, Taxonomy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rel {
    Subj,
    Obj,
}

impl Rel {
    pub const ALL: [Rel; 2] = [Rel::Subj, Rel::Obj];

    pub fn as_str(self) -> &'static str {
        match self {
            Rel::Subj => "subj",
            Rel::Obj => "obj",
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "subj" => Ok(Rel::Subj),
            "obj" => Ok(Rel::Obj),
            other => Err(other.to_string()),
        }
    }
}

/// One extracted `(verb, rel, noun)` relation with its sense tags.
///
/// The same shape doubles as a WSD instance, where `noun_concept` is the
/// gold sense.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TripleRecord {
    pub verb_lemma: String,
    pub verb_concept: Option<ConceptIx>,
    pub rel: Rel,
    pub noun_lemma: String,
    pub noun_concept: ConceptIx,
}

/// Reads a triples file: `verb_lemma TAB verb_concept|- TAB rel TAB
/// noun_lemma TAB noun_concept`, validating every concept against `t`.
pub fn load_triples<R: BufRead>(source: R, t: &Taxonomy) -> Result<Vec<TripleRecord>> {
    let mut out = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_triple_line(&line, lineno, t)?);
    }
    Ok(out)
}

pub fn parse_triples(text: &str, t: &Taxonomy) -> Result<Vec<TripleRecord>> {
    load_triples(text.as_bytes(), t)
}

fn parse_triple_line(line: &str, lineno: usize, t: &Taxonomy) -> Result<TripleRecord> {
    let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(Error::Syntax {
            line: lineno,
            reason: format!("expected 5 tab-separated fields, found {}", fields.len()),
        });
    }
    let [verb_lemma, verb_concept, rel, noun_lemma, noun_concept] =
        [fields[0], fields[1], fields[2], fields[3], fields[4]];
    if verb_lemma.is_empty() || noun_lemma.is_empty() {
        return Err(Error::Syntax {
            line: lineno,
            reason: "empty lemma".into(),
        });
    }
    let rel: Rel = rel.parse().map_err(|token| Error::BadRel {
        line: lineno,
        token,
    })?;
    let verb_concept = match verb_concept {
        "-" | "" => None,
        id => Some(resolve_sense(t, lineno, verb_lemma, id, Pos::Verb)?),
    };
    let noun_concept = resolve_sense(t, lineno, noun_lemma, noun_concept, Pos::Noun)?;
    Ok(TripleRecord {
        verb_lemma: verb_lemma.to_string(),
        verb_concept,
        rel,
        noun_lemma: noun_lemma.to_string(),
        noun_concept,
    })
}

fn resolve_sense(t: &Taxonomy, line: usize, lemma: &str, id: &str, pos: Pos) -> Result<ConceptIx> {
    let c = t.lookup(id).map_err(|_| Error::UnknownConceptAt {
        line,
        id: id.to_string(),
    })?;
    if t.pos(c) != pos {
        return Err(Error::WrongPos {
            line,
            id: id.to_string(),
            expected: pos.to_string(),
        });
    }
    if !t.senses_of(lemma, pos).iter().any(|&(_, s)| s == c) {
        return Err(Error::LemmaMismatch {
            line,
            lemma: lemma.to_string(),
            concept: id.to_string(),
        });
    }
    Ok(c)
}

pub fn write_triples<W: Write>(records: &[TripleRecord], t: &Taxonomy, mut sink: W) -> Result<()> {
    for r in records {
        let verb = r.verb_concept.map(|c| t.id(c).as_str()).unwrap_or("-");
        writeln!(
            sink,
            "{}\t{}\t{}\t{}\t{}",
            r.verb_lemma,
            verb,
            r.rel,
            r.noun_lemma,
            t.id(r.noun_concept)
        )?;
    }
    Ok(())
}

/// Raw corpus frequencies.
///
/// Relation-keyed tables are grouped by their conditioner so that one
/// verb's (or verb sense's) counts can be read without a scan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountTable {
    noun: BTreeMap<ConceptIx, u64>,
    verb_sense: BTreeMap<ConceptIx, u64>,
    noun_rel_verb: BTreeMap<(Rel, String), BTreeMap<ConceptIx, u64>>,
    noun_rel_vsense: BTreeMap<(Rel, ConceptIx), BTreeMap<ConceptIx, u64>>,
    rel_verb: BTreeMap<(Rel, String), u64>,
    rel_vsense: BTreeMap<(Rel, ConceptIx), u64>,
    records: u64,
}

/// Counts every record; identical lines count once each.
pub fn tally(records: &[TripleRecord]) -> CountTable {
    let mut table = CountTable::default();
    for r in records {
        table.add(r);
    }
    table
}

impl CountTable {
    fn add(&mut self, r: &TripleRecord) {
        self.records += 1;
        *self.noun.entry(r.noun_concept).or_default() += 1;
        let key = (r.rel, r.verb_lemma.clone());
        *self
            .noun_rel_verb
            .entry(key.clone())
            .or_default()
            .entry(r.noun_concept)
            .or_default() += 1;
        *self.rel_verb.entry(key).or_default() += 1;
        if let Some(cv) = r.verb_concept {
            *self.verb_sense.entry(cv).or_default() += 1;
            *self
                .noun_rel_vsense
                .entry((r.rel, cv))
                .or_default()
                .entry(r.noun_concept)
                .or_default() += 1;
            *self.rel_vsense.entry((r.rel, cv)).or_default() += 1;
        }
    }

    /// Pointwise sum of two tables.
    pub fn merge(&mut self, other: &CountTable) {
        fn add_all<K: Ord + Clone>(into: &mut BTreeMap<K, u64>, from: &BTreeMap<K, u64>) {
            for (k, v) in from {
                *into.entry(k.clone()).or_default() += v;
            }
        }
        self.records += other.records;
        add_all(&mut self.noun, &other.noun);
        add_all(&mut self.verb_sense, &other.verb_sense);
        add_all(&mut self.rel_verb, &other.rel_verb);
        add_all(&mut self.rel_vsense, &other.rel_vsense);
        for (k, m) in &other.noun_rel_verb {
            add_all(self.noun_rel_verb.entry(k.clone()).or_default(), m);
        }
        for (k, m) in &other.noun_rel_vsense {
            add_all(self.noun_rel_vsense.entry(*k).or_default(), m);
        }
    }

    pub fn record_count(&self) -> u64 {
        self.records
    }

    /// `fr(cn)`: occurrences of a noun concept.
    pub fn noun(&self, cn: ConceptIx) -> u64 {
        self.noun.get(&cn).copied().unwrap_or(0)
    }

    /// `fr(cv)`: occurrences of a verb sense concept.
    pub fn verb_sense(&self, cv: ConceptIx) -> u64 {
        self.verb_sense.get(&cv).copied().unwrap_or(0)
    }

    /// `fr(cn, rel v)`.
    pub fn noun_rel_verb(&self, cn: ConceptIx, rel: Rel, verb: &str) -> u64 {
        self.noun_rel_verb
            .get(&(rel, verb.to_string()))
            .and_then(|m| m.get(&cn))
            .copied()
            .unwrap_or(0)
    }

    /// `fr(cn rel cv)` for a verb sense concept.
    pub fn noun_rel_vsense(&self, cn: ConceptIx, rel: Rel, cv: ConceptIx) -> u64 {
        self.noun_rel_vsense
            .get(&(rel, cv))
            .and_then(|m| m.get(&cn))
            .copied()
            .unwrap_or(0)
    }

    /// `fr(rel v)`.
    pub fn rel_verb(&self, rel: Rel, verb: &str) -> u64 {
        self.rel_verb
            .get(&(rel, verb.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// `fr(rel cv)` counted on triples tagged with exactly `cv`.
    pub fn rel_vsense(&self, rel: Rel, cv: ConceptIx) -> u64 {
        self.rel_vsense.get(&(rel, cv)).copied().unwrap_or(0)
    }

    pub fn nouns(&self) -> impl Iterator<Item = (ConceptIx, u64)> + '_ {
        self.noun.iter().map(|(&c, &n)| (c, n))
    }

    pub fn verb_senses(&self) -> impl Iterator<Item = (ConceptIx, u64)> + '_ {
        self.verb_sense.iter().map(|(&c, &n)| (c, n))
    }

    /// Noun-concept counts observed with verb lemma `verb` in relation `rel`.
    pub fn objects_of_verb(&self, rel: Rel, verb: &str) -> impl Iterator<Item = (ConceptIx, u64)> + '_ {
        self.noun_rel_verb
            .get(&(rel, verb.to_string()))
            .into_iter()
            .flatten()
            .map(|(&c, &n)| (c, n))
    }

    /// Noun-concept counts observed with verb sense `cv` in relation `rel`.
    pub fn objects_of_vsense(&self, rel: Rel, cv: ConceptIx) -> impl Iterator<Item = (ConceptIx, u64)> + '_ {
        self.noun_rel_vsense
            .get(&(rel, cv))
            .into_iter()
            .flatten()
            .map(|(&c, &n)| (c, n))
    }

    /// Verb sense concepts with at least one `rel` triple, ascending.
    pub fn vsenses_with(&self, rel: Rel) -> impl Iterator<Item = ConceptIx> + '_ {
        self.rel_vsense
            .keys()
            .filter(move |(r, _)| *r == rel)
            .map(|&(_, c)| c)
    }

    pub fn verbs_with(&self, rel: Rel) -> impl Iterator<Item = &str> + '_ {
        self.rel_verb
            .keys()
            .filter(move |(r, _)| *r == rel)
            .map(|(_, v)| v.as_str())
    }

    pub fn rel_total(&self, rel: Rel) -> u64 {
        self.rel_verb
            .iter()
            .filter(|((r, _), _)| *r == rel)
            .map(|(_, &n)| n)
            .sum()
    }
}
