//! Propagated class frequencies.
//!
//! Every raw count observed at a concept is split evenly over the classes
//! that concept belongs to (itself and all its ancestors) and each class
//! accumulates the shares of everything below it. Splitting by the number
//! of classes makes the propagated relation counts sum back to the raw
//! relation total, so `P(cn | rel v)` normalizes over all noun concepts.
//!
//! Propagation runs bottom-up from observed concepts only, so cost scales
//! with the number of observed concepts times hierarchy depth rather than
//! with taxonomy size.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::corpus::{CountTable, Rel};
use crate::taxonomy::{ConceptIx, Taxonomy};

/// Sparse concept → propagated frequency map; absent concepts are 0.
pub type Mass = BTreeMap<ConceptIx, f64>;

pub struct Estimator<'a> {
    tax: &'a Taxonomy,
    counts: &'a CountTable,
    class_freq: Vec<f64>,
    noun_support: Vec<ConceptIx>,
    rel_class_memo: Mutex<HashMap<(Rel, ConceptIx), Arc<Mass>>>,
}

impl<'a> Estimator<'a> {
    pub fn new(tax: &'a Taxonomy, counts: &'a CountTable) -> Self {
        let mut class_freq = vec![0.0; tax.len()];
        // Noun and verb concepts are disjoint, so one vector serves both.
        for (c, n) in counts.nouns().chain(counts.verb_senses()) {
            let share = n as f64 / tax.classes_count(c) as f64;
            for &a in tax.ancestors(c) {
                class_freq[a.index()] += share;
            }
        }
        let noun_support = tax
            .concepts_of(crate::taxonomy::Pos::Noun)
            .filter(|c| class_freq[c.index()] > 0.0)
            .collect();
        Estimator {
            tax,
            counts,
            class_freq,
            noun_support,
            rel_class_memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn taxonomy(&self) -> &'a Taxonomy {
        self.tax
    }

    pub fn counts(&self) -> &'a CountTable {
        self.counts
    }

    /// `f̂r(c)`: propagated occurrence frequency. Noun concepts read noun
    /// counts, verb concepts read verb-sense counts.
    pub fn class_freq(&self, c: ConceptIx) -> f64 {
        self.class_freq[c.index()]
    }

    /// `f̂r(ci, c)`: `f̂r(ci)` when `ci ⊑ c`, otherwise 0.
    pub fn cond_freq(&self, ci: ConceptIx, c: ConceptIx) -> f64 {
        if self.tax.subsumes(c, ci) {
            self.class_freq(ci)
        } else {
            0.0
        }
    }

    /// Noun concepts with nonzero propagated frequency, ascending.
    pub fn noun_support(&self) -> &[ConceptIx] {
        &self.noun_support
    }

    /// `f̂r(cn rel v)` for every noun class with nonzero value.
    pub fn rel_verb_mass(&self, rel: Rel, verb: &str) -> Mass {
        self.propagate(self.counts.objects_of_verb(rel, verb), 1.0)
    }

    /// Like [`rel_verb_mass`](Self::rel_verb_mass) but restricted to triples
    /// tagged with exactly the verb sense `cv`.
    pub fn rel_vsense_mass(&self, rel: Rel, cv: ConceptIx) -> Mass {
        self.propagate(self.counts.objects_of_vsense(rel, cv), 1.0)
    }

    /// `f̂r(cn rel cv)` for every noun class with nonzero value; memoized per
    /// `(rel, cv)`.
    pub fn rel_class_mass(&self, rel: Rel, cv: ConceptIx) -> Arc<Mass> {
        if let Some(m) = self.rel_class_memo.lock().unwrap().get(&(rel, cv)) {
            return Arc::clone(m);
        }
        // Computed outside the lock; a racing thread computes the identical
        // value, so whichever insert lands first is kept.
        let mut mass = Mass::new();
        for cv_i in self.counts.vsenses_with(rel) {
            if !self.tax.subsumes(cv, cv_i) {
                continue;
            }
            let verb_share = 1.0 / self.tax.classes_count(cv_i) as f64;
            self.propagate_into(&mut mass, self.counts.objects_of_vsense(rel, cv_i), verb_share);
        }
        let mass = Arc::new(mass);
        Arc::clone(
            self.rel_class_memo
                .lock()
                .unwrap()
                .entry((rel, cv))
                .or_insert(mass),
        )
    }

    /// `f̂r(cn rel v)` for a single class.
    pub fn class_rel_verb(&self, cn: ConceptIx, rel: Rel, verb: &str) -> f64 {
        self.rel_verb_mass(rel, verb).get(&cn).copied().unwrap_or(0.0)
    }

    /// `f̂r(cn rel cv)` for a single pair of classes.
    pub fn class_rel_class(&self, cn: ConceptIx, rel: Rel, cv: ConceptIx) -> f64 {
        self.rel_class_mass(rel, cv).get(&cn).copied().unwrap_or(0.0)
    }

    /// `fr(rel cv)` for a verb class: the raw `rel` totals of the verb senses
    /// below `cv`, each split over its classes.
    pub fn rel_vclass_total(&self, rel: Rel, cv: ConceptIx) -> f64 {
        self.counts
            .vsenses_with(rel)
            .filter(|&cv_i| self.tax.subsumes(cv, cv_i))
            .map(|cv_i| {
                self.counts.rel_vsense(rel, cv_i) as f64 / self.tax.classes_count(cv_i) as f64
            })
            .sum()
    }

    fn propagate(&self, observed: impl Iterator<Item = (ConceptIx, u64)>, scale: f64) -> Mass {
        let mut mass = Mass::new();
        self.propagate_into(&mut mass, observed, scale);
        mass
    }

    fn propagate_into(
        &self,
        mass: &mut Mass,
        observed: impl Iterator<Item = (ConceptIx, u64)>,
        scale: f64,
    ) {
        for (c, n) in observed {
            let share = scale * n as f64 / self.tax.classes_count(c) as f64;
            for &a in self.tax.ancestors(c) {
                *mass.entry(a).or_insert(0.0) += share;
            }
        }
    }
}
