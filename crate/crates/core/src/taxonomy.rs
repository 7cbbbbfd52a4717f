//! Concept hierarchy: a DAG of noun and verb concepts with lemma–sense
//! attachments.
//!
//! Concepts are addressed by [`ConceptIx`], a dense index assigned in
//! ascending [`ConceptId`] order, so comparing two indices compares their ids.
//! Subsumption is reflexive: every concept is its own ancestor and its own
//! descendant. Both closures are computed eagerly at load, which makes a
//! loaded [`Taxonomy`] immutable and freely shareable between threads.

use std::borrow::Borrow;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Self {
        ConceptId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for ConceptId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Dense handle of a concept inside one [`Taxonomy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptIx(u32);

impl ConceptIx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "noun" => Ok(Pos::Noun),
            "verb" => Ok(Pos::Verb),
            other => Err(format!("unknown part of speech `{other}`")),
        }
    }
}

/// A word sense attached to a concept, e.g. `chicken#3`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Attachment {
    pub lemma: String,
    pub sense: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Taxonomy {
    ids: Vec<ConceptId>,
    by_id: HashMap<ConceptId, ConceptIx>,
    pos: Vec<Pos>,
    parents: Vec<Vec<ConceptIx>>,
    children: Vec<Vec<ConceptIx>>,
    attachments: Vec<Vec<Attachment>>,
    senses: HashMap<(String, Pos), Vec<(u32, ConceptIx)>>,
    // Reflexive closures, sorted ascending.
    ancestors: Vec<Vec<ConceptIx>>,
    descendants: Vec<Vec<ConceptIx>>,
}

struct RawConcept {
    line: usize,
    id: String,
    pos: Pos,
    parents: Vec<String>,
    attachments: Vec<Attachment>,
}

/// Parses and validates a taxonomy file.
///
/// Lines are `concept_id TAB pos TAB parents TAB attachments`, with parents
/// and attachments comma-separated (either may be empty, trailing empty
/// fields may be omitted). Blank lines and `#` comments are skipped.
pub fn load_taxonomy<R: BufRead>(source: R) -> Result<Taxonomy> {
    let mut raw = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        raw.push(parse_concept_line(&line, lineno)?);
    }
    Taxonomy::build(raw)
}

fn parse_concept_line(line: &str, lineno: usize) -> Result<RawConcept> {
    let syntax = |reason: String| Error::Syntax {
        line: lineno,
        reason,
    };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 2 || fields.len() > 4 {
        return Err(syntax(format!(
            "expected 2 to 4 tab-separated fields, found {}",
            fields.len()
        )));
    }
    let id = fields[0].trim();
    if id.is_empty() || id.contains(char::is_whitespace) || id.contains(',') {
        return Err(syntax(format!("invalid concept id `{}`", fields[0])));
    }
    let pos = fields[1].trim().parse::<Pos>().map_err(syntax)?;
    let parents = split_list(fields.get(2).copied().unwrap_or(""))
        .map(str::to_string)
        .collect();
    let mut attachments = Vec::new();
    for item in split_list(fields.get(3).copied().unwrap_or("")) {
        let (lemma, sense) = item
            .rsplit_once('#')
            .ok_or_else(|| syntax(format!("attachment `{item}` is not lemma#sense")))?;
        let sense: u32 = sense
            .parse()
            .ok()
            .filter(|&s| s > 0)
            .ok_or_else(|| syntax(format!("attachment `{item}` has a bad sense number")))?;
        if lemma.is_empty() {
            return Err(syntax(format!("attachment `{item}` has an empty lemma")));
        }
        attachments.push(Attachment {
            lemma: lemma.to_string(),
            sense,
        });
    }
    Ok(RawConcept {
        line: lineno,
        id: id.to_string(),
        pos,
        parents,
        attachments,
    })
}

fn split_list(field: &str) -> impl Iterator<Item = &str> {
    field.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl Taxonomy {
    fn build(mut raw: Vec<RawConcept>) -> Result<Taxonomy> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for c in &raw {
            if seen.insert(c.id.as_str(), c.line).is_some() {
                return Err(Error::DuplicateConcept {
                    line: c.line,
                    id: c.id.clone(),
                });
            }
        }
        drop(seen);
        raw.sort_by(|a, b| a.id.cmp(&b.id));

        let ids: Vec<ConceptId> = raw.iter().map(|c| ConceptId::new(c.id.clone())).collect();
        let by_id: HashMap<ConceptId, ConceptIx> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), ConceptIx(i as u32)))
            .collect();
        let pos: Vec<Pos> = raw.iter().map(|c| c.pos).collect();

        let mut parents = Vec::with_capacity(raw.len());
        for c in &raw {
            let mut ps = Vec::with_capacity(c.parents.len());
            for p in &c.parents {
                let &pix = by_id.get(p.as_str()).ok_or_else(|| Error::UnknownParent {
                    line: c.line,
                    concept: c.id.clone(),
                    parent: p.clone(),
                })?;
                if pos[pix.index()] != c.pos {
                    return Err(Error::MixedPos {
                        line: c.line,
                        concept: c.id.clone(),
                        pos: c.pos.to_string(),
                        parent: p.clone(),
                    });
                }
                if !ps.contains(&pix) {
                    ps.push(pix);
                }
            }
            parents.push(ps);
        }

        let mut children = vec![Vec::new(); raw.len()];
        for (i, ps) in parents.iter().enumerate() {
            for p in ps {
                children[p.index()].push(ConceptIx(i as u32));
            }
        }

        let order = topological_order(&parents, &ids)?;

        let mut senses: HashMap<(String, Pos), Vec<(u32, ConceptIx)>> = HashMap::new();
        let mut owner: HashMap<(&str, Pos, u32), usize> = HashMap::new();
        let mut by_line: Vec<usize> = (0..raw.len()).collect();
        by_line.sort_by_key(|&i| raw[i].line);
        for i in by_line {
            let c = &raw[i];
            for a in &c.attachments {
                if let Some(&first) = owner.get(&(a.lemma.as_str(), c.pos, a.sense)) {
                    if first == i {
                        continue;
                    }
                    return Err(Error::DuplicateAttachment {
                        line: c.line,
                        lemma: a.lemma.clone(),
                        pos: c.pos.to_string(),
                        sense: a.sense,
                        first: raw[first].id.clone(),
                        second: c.id.clone(),
                    });
                }
                owner.insert((a.lemma.as_str(), c.pos, a.sense), i);
                senses
                    .entry((a.lemma.clone(), c.pos))
                    .or_default()
                    .push((a.sense, ConceptIx(i as u32)));
            }
        }
        for list in senses.values_mut() {
            list.sort_unstable();
        }

        // Parents precede children in `order`, so each closure only reads
        // finished entries.
        let mut ancestors: Vec<Vec<ConceptIx>> = vec![Vec::new(); raw.len()];
        for &c in &order {
            let mut set: HashSet<ConceptIx> = HashSet::new();
            set.insert(c);
            for p in &parents[c.index()] {
                set.extend(ancestors[p.index()].iter().copied());
            }
            let mut anc: Vec<ConceptIx> = set.into_iter().collect();
            anc.sort_unstable();
            ancestors[c.index()] = anc;
        }
        let mut descendants: Vec<Vec<ConceptIx>> = vec![Vec::new(); raw.len()];
        for (i, anc) in ancestors.iter().enumerate() {
            for a in anc {
                descendants[a.index()].push(ConceptIx(i as u32));
            }
        }

        let attachments = raw.into_iter().map(|c| c.attachments).collect();
        Ok(Taxonomy {
            ids,
            by_id,
            pos,
            parents,
            children,
            attachments,
            senses,
            ancestors,
            descendants,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// All concepts in ascending id order.
    pub fn concepts(&self) -> impl Iterator<Item = ConceptIx> + '_ {
        (0..self.ids.len() as u32).map(ConceptIx)
    }

    pub fn concepts_of(&self, pos: Pos) -> impl Iterator<Item = ConceptIx> + '_ {
        self.concepts().filter(move |&c| self.pos(c) == pos)
    }

    pub fn lookup(&self, id: &str) -> Result<ConceptIx> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }

    pub fn id(&self, c: ConceptIx) -> &ConceptId {
        &self.ids[c.index()]
    }

    pub fn pos(&self, c: ConceptIx) -> Pos {
        self.pos[c.index()]
    }

    pub fn parents(&self, c: ConceptIx) -> &[ConceptIx] {
        &self.parents[c.index()]
    }

    pub fn children(&self, c: ConceptIx) -> &[ConceptIx] {
        &self.children[c.index()]
    }

    pub fn attachments(&self, c: ConceptIx) -> &[Attachment] {
        &self.attachments[c.index()]
    }

    pub fn roots(&self, pos: Pos) -> Vec<ConceptIx> {
        self.concepts_of(pos)
            .filter(|&c| self.parents(c).is_empty())
            .collect()
    }

    /// Reflexive ancestors of `c`, ascending.
    pub fn ancestors(&self, c: ConceptIx) -> &[ConceptIx] {
        &self.ancestors[c.index()]
    }

    /// Reflexive descendants of `c`, ascending.
    pub fn descendants(&self, c: ConceptIx) -> &[ConceptIx] {
        &self.descendants[c.index()]
    }

    /// True iff `lower` ⊑ `upper`.
    pub fn subsumes(&self, upper: ConceptIx, lower: ConceptIx) -> bool {
        self.ancestors(lower).binary_search(&upper).is_ok()
    }

    pub fn comparable(&self, a: ConceptIx, b: ConceptIx) -> bool {
        self.subsumes(a, b) || self.subsumes(b, a)
    }

    /// Number of classes the concept belongs to, itself included.
    pub fn classes_count(&self, c: ConceptIx) -> usize {
        self.ancestors(c).len()
    }

    /// Senses of `lemma` ordered by sense number; empty for unknown lemmas.
    pub fn senses_of(&self, lemma: &str, pos: Pos) -> &[(u32, ConceptIx)] {
        // Allocation-free lookup would need a borrowed tuple key; lemma
        // lookups are not on any hot path.
        self.senses
            .get(&(lemma.to_string(), pos))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn lemmas(&self, pos: Pos) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .senses
            .keys()
            .filter(|(_, p)| *p == pos)
            .map(|(l, _)| l.as_str())
            .collect();
        out.sort_unstable();
        out
    }

    /// Writes the taxonomy back in the file format, one concept per line in
    /// id order.
    pub fn write<W: Write>(&self, mut sink: W) -> Result<()> {
        for c in self.concepts() {
            let parents: Vec<&str> = self.parents(c).iter().map(|&p| self.id(p).as_str()).collect();
            let atts: Vec<String> = self
                .attachments(c)
                .iter()
                .map(|a| format!("{}#{}", a.lemma, a.sense))
                .collect();
            writeln!(
                sink,
                "{}\t{}\t{}\t{}",
                self.id(c),
                self.pos(c),
                parents.join(","),
                atts.join(",")
            )?;
        }
        Ok(())
    }
}

impl FromStr for Taxonomy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        load_taxonomy(s.as_bytes())
    }
}

fn topological_order(parents: &[Vec<ConceptIx>], ids: &[ConceptId]) -> Result<Vec<ConceptIx>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = parents.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    // Iterative DFS along parent edges; post-order puts parents first.
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        mark[start] = Mark::Active;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&p) = parents[node].get(*next) {
                *next += 1;
                let p = p.index();
                match mark[p] {
                    Mark::New => {
                        mark[p] = Mark::Active;
                        stack.push((p, 0));
                    }
                    Mark::Active => {
                        let from = stack.iter().position(|&(s, _)| s == p).unwrap_or(0);
                        let mut cycle: Vec<String> = stack[from..]
                            .iter()
                            .map(|&(s, _)| ids[s].to_string())
                            .collect();
                        cycle.push(ids[p].to_string());
                        return Err(Error::Cycle(cycle));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                order.push(ConceptIx(node as u32));
                stack.pop();
            }
        }
    }
    Ok(order)
}
