//! Noun sense disambiguation with preference tables, and its evaluation.
//!
//! A decision picks the strongest class in the verb's table that lies above
//! at least one candidate sense of the noun and selects every candidate
//! below it, each with equal weight. Evaluation reports precision over
//! decided instances, coverage and recall, next to the random and
//! most-frequent-sense baselines.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{tally, CountTable, Rel, TripleRecord};
use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::models::{class_to_class, sense_to_class, word_to_class, Conditioner, ModelKind, PreferenceTable};
use crate::pruner::prune_classes;
use crate::taxonomy::{ConceptIx, Pos, Taxonomy};

/// A WSD test item. Same fields as a training triple; `noun_concept` holds
/// the gold sense.
pub type WsdInstance = TripleRecord;

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    /// Selected noun senses, ascending; empty when abstaining.
    pub selected: Vec<ConceptIx>,
    pub deciding_class: Option<ConceptIx>,
}

impl Decision {
    pub fn abstain() -> Self {
        Decision {
            selected: Vec::new(),
            deciding_class: None,
        }
    }

    pub fn is_decided(&self) -> bool {
        !self.selected.is_empty()
    }

    pub fn weight(&self) -> f64 {
        if self.selected.is_empty() {
            0.0
        } else {
            1.0 / self.selected.len() as f64
        }
    }

    /// Partial credit: `1/|selected|` when the gold sense is selected.
    pub fn credit(&self, gold: ConceptIx) -> f64 {
        if self.selected.contains(&gold) {
            self.weight()
        } else {
            0.0
        }
    }
}

/// Candidate noun senses of an instance, in sense-number order.
pub fn candidates(t: &Taxonomy, noun_lemma: &str) -> Vec<ConceptIx> {
    t.senses_of(noun_lemma, Pos::Noun)
        .iter()
        .map(|&(_, c)| c)
        .collect()
}

/// Scans the union of `tables` by descending score (ties by ascending id)
/// and decides on the first class subsuming any candidate.
pub fn decide(t: &Taxonomy, candidates: &[ConceptIx], tables: &[&PreferenceTable]) -> Decision {
    // The first subsuming entry of the scan is the best-ranked entry among
    // the ancestors of the candidates, so only those need looking at.
    let mut best: Option<(f64, ConceptIx)> = None;
    for table in tables {
        for &s in candidates {
            for &a in t.ancestors(s) {
                let score = table.score(a);
                if score <= 0.0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bs, bc)) => score > bs || (score == bs && a < bc),
                };
                if better {
                    best = Some((score, a));
                }
            }
        }
    }
    match best {
        None => Decision::abstain(),
        Some((_, class)) => {
            let mut selected: Vec<ConceptIx> = candidates
                .iter()
                .copied()
                .filter(|&s| t.subsumes(class, s))
                .collect();
            selected.sort_unstable();
            selected.dedup();
            Decision {
                selected,
                deciding_class: Some(class),
            }
        }
    }
}

/// A trained model: count tables plus a lazily filled table cache.
pub struct Model<'a> {
    est: Estimator<'a>,
    kind: ModelKind,
    prune: bool,
    cache: Mutex<HashMap<(Rel, Conditioner), Arc<PreferenceTable>>>,
}

impl<'a> Model<'a> {
    pub fn new(t: &'a Taxonomy, counts: &'a CountTable, kind: ModelKind) -> Self {
        Model {
            est: Estimator::new(t, counts),
            kind,
            prune: false,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Decide on pruned tables instead of full ones.
    pub fn with_pruning(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn estimator(&self) -> &Estimator<'a> {
        &self.est
    }

    pub fn table(&self, rel: Rel, conditioner: Conditioner) -> Arc<PreferenceTable> {
        let key = (rel, conditioner);
        if let Some(t) = self.cache.lock().unwrap().get(&key) {
            return Arc::clone(t);
        }
        let table = match &key.1 {
            Conditioner::VerbWord(v) => word_to_class(&self.est, v, rel),
            Conditioner::VerbSense(cv) => sense_to_class(&self.est, *cv, rel),
            Conditioner::VerbClass(cv) => class_to_class(&self.est, *cv, rel),
        };
        let table = if self.prune && table.is_trained() {
            prune_classes(self.est.taxonomy(), &table).to_table()
        } else {
            table
        };
        let table = Arc::new(table);
        Arc::clone(self.cache.lock().unwrap().entry(key).or_insert(table))
    }

    /// The tables consulted for `instance`: the verb lemma's table, the gold
    /// verb sense's table, or the class tables of every sense of the verb.
    pub fn tables_for(&self, instance: &WsdInstance) -> Vec<Arc<PreferenceTable>> {
        let rel = instance.rel;
        match self.kind {
            ModelKind::WordToClass => {
                vec![self.table(rel, Conditioner::VerbWord(instance.verb_lemma.clone()))]
            }
            ModelKind::SenseToClass => instance
                .verb_concept
                .map(|cv| self.table(rel, Conditioner::VerbSense(cv)))
                .into_iter()
                .collect(),
            ModelKind::ClassToClass => self
                .est
                .taxonomy()
                .senses_of(&instance.verb_lemma, Pos::Verb)
                .iter()
                .map(|&(_, cv)| self.table(rel, Conditioner::VerbClass(cv)))
                .collect(),
        }
    }
}

pub fn disambiguate(t: &Taxonomy, instance: &WsdInstance, model: &Model<'_>) -> Decision {
    let tables = model.tables_for(instance);
    let trained: Vec<&PreferenceTable> = tables
        .iter()
        .map(Arc::as_ref)
        .filter(|t| t.is_trained())
        .collect();
    if trained.is_empty() {
        return Decision::abstain();
    }
    decide(t, &candidates(t, &instance.noun_lemma), &trained)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_decided: usize,
    pub credit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NounReport {
    pub noun: String,
    pub precision: f64,
    pub coverage: f64,
    pub recall: f64,
    pub n_total: usize,
    pub n_decided: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WsdReport {
    pub model: String,
    pub precision: f64,
    pub coverage: f64,
    pub recall: f64,
    pub n_total: usize,
    pub n_decided: usize,
    pub credit: f64,
    /// Set when nothing was decided; precision is then reported as 0.
    pub zero_decided: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<FoldReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_noun: Vec<NounReport>,
}

fn ratios(n_total: usize, n_decided: usize, credit: f64) -> (f64, f64, f64) {
    let precision = if n_decided == 0 { 0.0 } else { credit / n_decided as f64 };
    let coverage = if n_total == 0 { 0.0 } else { n_decided as f64 / n_total as f64 };
    let recall = if n_total == 0 { 0.0 } else { credit / n_total as f64 };
    (precision, coverage, recall)
}

impl WsdReport {
    pub fn from_totals(model: impl Into<String>, n_total: usize, n_decided: usize, credit: f64) -> Self {
        let (precision, coverage, recall) = ratios(n_total, n_decided, credit);
        WsdReport {
            model: model.into(),
            precision,
            coverage,
            recall,
            n_total,
            n_decided,
            credit,
            zero_decided: n_decided == 0,
            folds: Vec::new(),
            per_noun: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Grouping {
    /// Folds drawn from all instances at once.
    #[default]
    Pooled,
    /// Folds stratified by noun lemma, so each noun is spread evenly over
    /// folds; the report adds a per-noun breakdown.
    PerNoun,
}

#[derive(Clone, Copy, Debug)]
pub enum Protocol<'a> {
    KFold { k: usize, seed: u64, grouping: Grouping },
    /// Train on `train`, test on every instance.
    Split { train: &'a [TripleRecord] },
}

#[derive(Clone, Copy, Debug)]
pub struct EvalConfig<'a> {
    pub kind: ModelKind,
    pub protocol: Protocol<'a>,
    pub prune: bool,
}

impl<'a> EvalConfig<'a> {
    pub fn kfold(kind: ModelKind, k: usize, seed: u64) -> Self {
        EvalConfig {
            kind,
            protocol: Protocol::KFold {
                k,
                seed,
                grouping: Grouping::Pooled,
            },
            prune: false,
        }
    }

    pub fn split(kind: ModelKind, train: &'a [TripleRecord]) -> Self {
        EvalConfig {
            kind,
            protocol: Protocol::Split { train },
            prune: false,
        }
    }
}

/// Partitions `0..n` into `k` folds by a seeded shuffle. Fold sizes differ by
/// at most one; each fold is sorted.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidFolds { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(deal(&order, k))
}

fn deal(order: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); k];
    for (pos, &i) in order.iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

fn stratified_split(instances: &[WsdInstance], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = instances.len();
    if k < 2 || k > n {
        return Err(Error::InvalidFolds { k, n });
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        groups.entry(inst.noun_lemma.as_str()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(n);
    for (_, mut idx) in groups {
        idx.shuffle(&mut rng);
        order.extend(idx);
    }
    Ok(deal(&order, k))
}

/// Instances outside `fold`, as training triples.
pub fn training_set(instances: &[WsdInstance], fold: &[usize]) -> Vec<TripleRecord> {
    let mut held_out = vec![false; instances.len()];
    for &i in fold {
        held_out[i] = true;
    }
    instances
        .iter()
        .zip(held_out)
        .filter(|(_, out)| !out)
        .map(|(r, _)| r.clone())
        .collect()
}

struct Outcome {
    decided: bool,
    credit: f64,
}

fn run_fold(
    t: &Taxonomy,
    train: &[TripleRecord],
    test: &[&WsdInstance],
    kind: ModelKind,
    prune: bool,
) -> Vec<Outcome> {
    let counts = tally(train);
    let model = Model::new(t, &counts, kind).with_pruning(prune);
    test.iter()
        .map(|inst| {
            let d = disambiguate(t, inst, &model);
            Outcome {
                decided: d.is_decided(),
                credit: d.credit(inst.noun_concept),
            }
        })
        .collect()
}

/// Cross-validated (or explicitly split) evaluation of one model kind.
pub fn evaluate(t: &Taxonomy, instances: &[WsdInstance], config: &EvalConfig<'_>) -> Result<WsdReport> {
    let (folds, grouping) = match config.protocol {
        Protocol::KFold { k, seed, grouping } => {
            let folds = match grouping {
                Grouping::Pooled => kfold_split(instances.len(), k, seed)?,
                Grouping::PerNoun => stratified_split(instances, k, seed)?,
            };
            (folds, grouping)
        }
        Protocol::Split { .. } => (vec![(0..instances.len()).collect()], Grouping::Pooled),
    };

    let per_fold: Vec<(usize, Vec<Outcome>)> = folds
        .par_iter()
        .map(|fold| {
            let test: Vec<&WsdInstance> = fold.iter().map(|&i| &instances[i]).collect();
            match config.protocol {
                Protocol::KFold { .. } => {
                    let train = training_set(instances, fold);
                    (train.len(), run_fold(t, &train, &test, config.kind, config.prune))
                }
                Protocol::Split { train } => {
                    (train.len(), run_fold(t, train, &test, config.kind, config.prune))
                }
            }
        })
        .collect();

    let mut outcome_of: Vec<Option<&Outcome>> = vec![None; instances.len()];
    let mut fold_reports = Vec::with_capacity(folds.len());
    for (f, (fold, (n_train, outcomes))) in folds.iter().zip(&per_fold).enumerate() {
        let mut n_decided = 0;
        let mut credit = 0.0;
        for (&i, o) in fold.iter().zip(outcomes) {
            outcome_of[i] = Some(o);
            n_decided += o.decided as usize;
            credit += o.credit;
        }
        fold_reports.push(FoldReport {
            fold: f,
            n_train: *n_train,
            n_test: fold.len(),
            n_decided,
            credit,
        });
    }

    let n_decided = fold_reports.iter().map(|f| f.n_decided).sum();
    let credit = fold_reports.iter().map(|f| f.credit).sum();
    let mut report = WsdReport::from_totals(config.kind.name(), instances.len(), n_decided, credit);
    report.folds = fold_reports;
    if grouping == Grouping::PerNoun {
        report.per_noun = per_noun(instances, |i| {
            let o = outcome_of[i].expect("every instance is in exactly one fold");
            (o.decided, o.credit)
        });
    }
    Ok(report)
}

fn per_noun(instances: &[WsdInstance], outcome: impl Fn(usize) -> (bool, f64)) -> Vec<NounReport> {
    let mut acc: BTreeMap<&str, (usize, usize, f64)> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        let (decided, credit) = outcome(i);
        let e = acc.entry(inst.noun_lemma.as_str()).or_default();
        e.0 += 1;
        e.1 += decided as usize;
        e.2 += credit;
    }
    acc.into_iter()
        .map(|(noun, (n_total, n_decided, credit))| {
            let (precision, coverage, recall) = ratios(n_total, n_decided, credit);
            NounReport {
                noun: noun.to_string(),
                precision,
                coverage,
                recall,
                n_total,
                n_decided,
            }
        })
        .collect()
}

/// Expected score of picking a sense uniformly at random.
pub fn baseline_random(t: &Taxonomy, instances: &[WsdInstance]) -> WsdReport {
    let mut n_decided = 0;
    let mut credit = 0.0;
    for inst in instances {
        let senses = t.senses_of(&inst.noun_lemma, Pos::Noun);
        if !senses.is_empty() {
            n_decided += 1;
            credit += 1.0 / senses.len() as f64;
        }
    }
    WsdReport::from_totals("random", instances.len(), n_decided, credit)
}

/// Always picks the lowest-numbered sense.
pub fn baseline_mfs(t: &Taxonomy, instances: &[WsdInstance]) -> WsdReport {
    let mut n_decided = 0;
    let mut credit = 0.0;
    for inst in instances {
        if let Some(&(_, first)) = t.senses_of(&inst.noun_lemma, Pos::Noun).first() {
            n_decided += 1;
            if first == inst.noun_concept {
                credit += 1.0;
            }
        }
    }
    WsdReport::from_totals("MFS", instances.len(), n_decided, credit)
}
