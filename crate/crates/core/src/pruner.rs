//! Greedy antichain pruning of scored classes and of scored
//! (verb class, noun class) pairs.

use std::collections::HashSet;

use crate::corpus::Rel;
use crate::models::{sort_ranked, Conditioner, PreferenceTable};
use crate::taxonomy::{ConceptIx, Taxonomy};

/// The most informative classes of a table: one per branch of the hierarchy.
#[derive(Clone, Debug, PartialEq)]
pub struct PrunedTable {
    pub rel: Rel,
    pub conditioner: Conditioner,
    /// Descending score, ties by ascending concept id.
    pub kept: Vec<(ConceptIx, f64)>,
}

impl PrunedTable {
    pub fn to_table(&self) -> PreferenceTable {
        PreferenceTable::from_scores(self.rel, self.conditioner.clone(), self.kept.iter().copied())
    }
}

pub fn prune_classes(t: &Taxonomy, table: &PreferenceTable) -> PrunedTable {
    PrunedTable {
        rel: table.rel,
        conditioner: table.conditioner.clone(),
        kept: prune_antichain(t, table.iter().collect()),
    }
}

/// Sorts `entries` by descending score (ties by ascending id) and keeps an
/// entry iff no already kept concept is its ancestor or descendant.
/// Zero-score entries are dropped first.
pub fn prune_antichain(t: &Taxonomy, mut entries: Vec<(ConceptIx, f64)>) -> Vec<(ConceptIx, f64)> {
    entries.retain(|&(_, s)| s > 0.0);
    sort_ranked(&mut entries);
    let mut kept = Vec::new();
    let mut kept_set: HashSet<ConceptIx> = HashSet::new();
    // Union of the ancestors of every kept concept: `c` in here means some
    // kept concept lies below `c`.
    let mut above_kept: HashSet<ConceptIx> = HashSet::new();
    for (c, s) in entries {
        if above_kept.contains(&c) || t.ancestors(c).iter().any(|a| kept_set.contains(a)) {
            continue;
        }
        kept_set.insert(c);
        above_kept.extend(t.ancestors(c).iter().copied());
        kept.push((c, s));
    }
    kept
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredPair {
    pub verb: ConceptIx,
    pub noun: ConceptIx,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrunedPairSet {
    pub rel: Rel,
    pub kept_pairs: Vec<ScoredPair>,
}

/// Pair version of [`prune_antichain`]: a pair is dropped when an earlier
/// kept pair subsumes it on both coordinates or is subsumed by it on both.
/// Ordering is descending score, then ascending verb id, then noun id.
pub fn prune_pairs(t: &Taxonomy, rel: Rel, mut pairs: Vec<ScoredPair>) -> PrunedPairSet {
    pairs.retain(|p| p.score > 0.0);
    pairs.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.verb.cmp(&b.verb))
            .then(a.noun.cmp(&b.noun))
    });
    let mut kept: Vec<ScoredPair> = Vec::new();
    for p in pairs {
        let dominated = kept.iter().any(|k| {
            (t.subsumes(k.verb, p.verb) && t.subsumes(k.noun, p.noun))
                || (t.subsumes(p.verb, k.verb) && t.subsumes(p.noun, k.noun))
        });
        if !dominated {
            kept.push(p);
        }
    }
    PrunedPairSet {
        rel,
        kept_pairs: kept,
    }
}
