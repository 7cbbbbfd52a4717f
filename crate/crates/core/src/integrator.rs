//! Class-to-class preferences as relation edges between verb classes and
//! noun classes, kept in an overlay file next to the taxonomy.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::corpus::Rel;
use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::models::class_to_class;
use crate::number::sig17;
use crate::pruner::{prune_classes, prune_pairs, ScoredPair};
use crate::taxonomy::{ConceptId, ConceptIx, Pos, Taxonomy};

#[derive(Clone, Debug, PartialEq)]
pub struct RelationEdge {
    pub verb_class: ConceptId,
    pub rel: Rel,
    pub noun_class: ConceptId,
    pub score: f64,
}

/// Links every verb class in `verb_classes` to each noun class with a
/// nonzero class-to-class score. With `prune`, each verb class keeps only
/// its antichain and the union is then pair-pruned.
pub fn build_edges(
    est: &Estimator<'_>,
    rel: Rel,
    verb_classes: &[ConceptIx],
    prune: bool,
) -> Vec<RelationEdge> {
    let t = est.taxonomy();
    let per_class: Vec<Vec<ScoredPair>> = verb_classes
        .par_iter()
        .map(|&cv| {
            let table = class_to_class(est, cv, rel);
            let rows: Vec<(ConceptIx, f64)> = if prune {
                prune_classes(t, &table).kept
            } else {
                table.iter().collect()
            };
            rows.into_iter()
                .map(|(cn, score)| ScoredPair {
                    verb: cv,
                    noun: cn,
                    score,
                })
                .collect()
        })
        .collect();
    let mut pairs: Vec<ScoredPair> = per_class.into_iter().flatten().collect();
    if prune {
        pairs = prune_pairs(t, rel, pairs).kept_pairs;
    }
    let mut edges: Vec<RelationEdge> = pairs
        .into_iter()
        .map(|p| RelationEdge {
            verb_class: t.id(p.verb).clone(),
            rel,
            noun_class: t.id(p.noun).clone(),
            score: p.score,
        })
        .collect();
    sort_edges(&mut edges);
    edges
}

/// Canonical order: verb class, relation, descending score, noun class.
pub fn sort_edges(edges: &mut [RelationEdge]) {
    edges.sort_by(|a, b| {
        a.verb_class
            .cmp(&b.verb_class)
            .then(a.rel.cmp(&b.rel))
            .then(b.score.total_cmp(&a.score))
            .then(a.noun_class.cmp(&b.noun_class))
    });
}

/// Writes `verb_class TAB rel TAB noun_class TAB score` lines in canonical
/// order and returns the number of lines.
pub fn export_edges<W: Write>(edges: &[RelationEdge], mut sink: W) -> Result<usize> {
    let mut sorted = edges.to_vec();
    sort_edges(&mut sorted);
    for e in &sorted {
        writeln!(
            sink,
            "{}\t{}\t{}\t{}",
            e.verb_class,
            e.rel,
            e.noun_class,
            sig17(e.score)
        )?;
    }
    sink.flush()?;
    Ok(sorted.len())
}

pub fn read_edges<R: BufRead>(source: R) -> Result<Vec<RelationEdge>> {
    let mut edges = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 || f[0].is_empty() || f[2].is_empty() {
            return Err(Error::Syntax {
                line: lineno,
                reason: "expected verb_class, rel, noun_class, score".into(),
            });
        }
        let rel = f[1].parse().map_err(|token| Error::BadRel {
            line: lineno,
            token,
        })?;
        let score = f[3]
            .parse::<f64>()
            .ok()
            .filter(|s| s.is_finite() && *s > 0.0)
            .ok_or_else(|| Error::Syntax {
                line: lineno,
                reason: format!("bad score `{}`", f[3]),
            })?;
        edges.push(RelationEdge {
            verb_class: ConceptId::new(f[0]),
            rel,
            noun_class: ConceptId::new(f[2]),
            score,
        });
    }
    Ok(edges)
}

/// A taxonomy together with an edge overlay, indexed both ways.
pub struct PreferenceOverlay<'t> {
    taxonomy: &'t Taxonomy,
    edges: Vec<(ConceptIx, Rel, ConceptIx, f64)>,
    by_verb: HashMap<ConceptIx, Vec<usize>>,
    by_noun: HashMap<ConceptIx, Vec<usize>>,
}

impl<'t> PreferenceOverlay<'t> {
    /// Resolves every edge against `taxonomy`, rejecting unknown ids and
    /// edges whose endpoints have the wrong part of speech.
    pub fn new(taxonomy: &'t Taxonomy, edges: &[RelationEdge]) -> Result<Self> {
        let resolve = |i: usize, id: &ConceptId, pos: Pos| -> Result<ConceptIx> {
            let c = taxonomy.lookup(id.as_str()).map_err(|_| Error::UnknownConceptAt {
                line: i + 1,
                id: id.to_string(),
            })?;
            if taxonomy.pos(c) != pos {
                return Err(Error::WrongPos {
                    line: i + 1,
                    id: id.to_string(),
                    expected: pos.to_string(),
                });
            }
            Ok(c)
        };
        let mut resolved = Vec::with_capacity(edges.len());
        let mut by_verb: HashMap<ConceptIx, Vec<usize>> = HashMap::new();
        let mut by_noun: HashMap<ConceptIx, Vec<usize>> = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            let v = resolve(i, &e.verb_class, Pos::Verb)?;
            let n = resolve(i, &e.noun_class, Pos::Noun)?;
            by_verb.entry(v).or_default().push(i);
            by_noun.entry(n).or_default().push(i);
            resolved.push((v, e.rel, n, e.score));
        }
        Ok(PreferenceOverlay {
            taxonomy,
            edges: resolved,
            by_verb,
            by_noun,
        })
    }

    pub fn taxonomy(&self) -> &'t Taxonomy {
        self.taxonomy
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges leaving verb class `cv` with relation `rel`: `(noun, score)`.
    pub fn preferences_of(&self, cv: ConceptIx, rel: Rel) -> Vec<(ConceptIx, f64)> {
        self.select(&self.by_verb, cv, rel, |e| (e.2, e.3))
    }

    /// Edges reaching noun class `cn` with relation `rel`: `(verb, score)`.
    pub fn selected_by(&self, cn: ConceptIx, rel: Rel) -> Vec<(ConceptIx, f64)> {
        self.select(&self.by_noun, cn, rel, |e| (e.0, e.3))
    }

    fn select(
        &self,
        index: &HashMap<ConceptIx, Vec<usize>>,
        c: ConceptIx,
        rel: Rel,
        pick: impl Fn(&(ConceptIx, Rel, ConceptIx, f64)) -> (ConceptIx, f64),
    ) -> Vec<(ConceptIx, f64)> {
        index
            .get(&c)
            .into_iter()
            .flatten()
            .map(|&i| &self.edges[i])
            .filter(|e| e.1 == rel)
            .map(pick)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tally;
    use crate::test_fixtures::{toy_corpus, toy_taxonomy};

    #[test]
    fn toy_edges() {
        let t = toy_taxonomy();
        let counts = tally(&toy_corpus(&t));
        let e = Estimator::new(&t, &counts);
        let eat = t.lookup("v_eat").unwrap();

        let edges = build_edges(&e, Rel::Obj, &[eat], false);
        let apple = edges
            .iter()
            .find(|e| e.noun_class.as_str() == "n_apple")
            .unwrap();
        assert_eq!(apple.verb_class.as_str(), "v_eat");
        assert!((apple.score - 1.13).abs() < 1e-9);
        assert_eq!(edges.len(), 4);

        let pruned = build_edges(&e, Rel::Obj, &[eat], true);
        for a in &pruned {
            for b in &pruned {
                if a != b {
                    let (x, y) = (
                        t.lookup(a.noun_class.as_str()).unwrap(),
                        t.lookup(b.noun_class.as_str()).unwrap(),
                    );
                    assert!(!t.comparable(x, y));
                }
            }
        }
        assert!(build_edges(&e, Rel::Obj, &[], true).is_empty());
    }

    #[test]
    fn export_and_reimport() {
        let t = toy_taxonomy();
        let counts = tally(&toy_corpus(&t));
        let e = Estimator::new(&t, &counts);
        let all: Vec<_> = t.concepts_of(Pos::Verb).collect();
        let edges = build_edges(&e, Rel::Obj, &all, false);
        let mut first = Vec::new();
        let n = export_edges(&edges, &mut first).unwrap();
        assert_eq!(n, edges.len());
        assert_eq!(String::from_utf8_lossy(&first).lines().count(), n);
        let mut second = Vec::new();
        export_edges(&edges, &mut second).unwrap();
        assert_eq!(first, second);
        assert_eq!(read_edges(first.as_slice()).unwrap(), edges);
        assert_eq!(export_edges(&[], &mut Vec::new()).unwrap(), 0);
    }

    #[test]
    fn overlay_queries() {
        let t = toy_taxonomy();
        let counts = tally(&toy_corpus(&t));
        let e = Estimator::new(&t, &counts);
        let eat = t.lookup("v_eat").unwrap();
        let edges = build_edges(&e, Rel::Obj, &[eat], false);
        let overlay = PreferenceOverlay::new(&t, &edges).unwrap();
        assert_eq!(overlay.preferences_of(eat, Rel::Obj).len(), 4);
        assert!(overlay.preferences_of(eat, Rel::Subj).is_empty());
        let apple = t.lookup("n_apple").unwrap();
        assert_eq!(overlay.selected_by(apple, Rel::Obj).len(), 1);

        let bad = vec![RelationEdge {
            verb_class: ConceptId::new("n_food"),
            rel: Rel::Obj,
            noun_class: ConceptId::new("n_apple"),
            score: 0.5,
        }];
        assert!(matches!(
            PreferenceOverlay::new(&t, &bad),
            Err(Error::WrongPos { .. })
        ));
    }

    #[test]
    fn read_errors() {
        assert!(read_edges("v\tobj\tn\n".as_bytes()).is_err());
        assert!(read_edges("v\tiobj\tn\t0.5\n".as_bytes()).is_err());
        assert!(read_edges("v\tobj\tn\t0\n".as_bytes()).is_err());
    }
}
