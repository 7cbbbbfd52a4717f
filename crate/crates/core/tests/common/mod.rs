//! Test support: seeded random fixtures, a planted-preference corpus and a
//! naive enumeration oracle that shares no code with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selpref::corpus::parse_triples;
use selpref::{Taxonomy, TripleRecord};

pub const TOY_TAXONOMY: &str = "\
n_entity\tnoun\t\t
n_food\tnoun\tn_entity\t
n_person\tnoun\tn_entity\t
n_apple\tnoun\tn_food\tapple#1
n_chicken_food\tnoun\tn_food\tchicken#1
n_wimp\tnoun\tn_person\tchicken#3,wimp#1
v_consume\tverb\t\tconsume#1
v_eat\tverb\tv_consume\teat#1
v_devour\tverb\tv_consume\tdevour#1
";

pub const TOY_CORPUS: &str = "\
eat\tv_eat\tobj\tapple\tn_apple
eat\tv_eat\tobj\tapple\tn_apple
eat\tv_eat\tobj\tapple\tn_apple
eat\tv_eat\tobj\tchicken\tn_chicken_food
devour\tv_devour\tobj\tchicken\tn_chicken_food
";

/// Five concepts under a root: `a` below `b`, `c` below `a`, `e` below `c`,
/// `d` on its own branch.
pub const FIVE_CONCEPTS: &str = "t\tnoun\t\nb\tnoun\tt\na\tnoun\tb\nc\tnoun\ta\ne\tnoun\tc\nd\tnoun\tt\n";

#[derive(Clone, Debug)]
pub struct Fixture {
    pub seed: u64,
    pub taxonomy: String,
    pub triples: String,
}

impl Fixture {
    pub fn load(&self) -> (Taxonomy, Vec<TripleRecord>) {
        let t: Taxonomy = self
            .taxonomy
            .parse()
            .unwrap_or_else(|e| panic!("fixture {}: {e}", self.seed));
        let records = parse_triples(&self.triples, &t).unwrap_or_else(|e| panic!("fixture {}: {e}", self.seed));
        (t, records)
    }

    pub fn oracle(&self) -> Oracle {
        Oracle::new(&self.taxonomy, &self.triples)
    }
}

pub fn toy() -> Fixture {
    Fixture {
        seed: u64::MAX,
        taxonomy: TOY_TAXONOMY.to_string(),
        triples: TOY_CORPUS.to_string(),
    }
}

struct Side {
    ids: Vec<String>,
    lemmas: Vec<Vec<String>>,
}

fn random_side(
    rng: &mut ChaCha8Rng,
    prefix: &str,
    pos: &str,
    n: usize,
    pool: usize,
    lines: &mut Vec<String>,
) -> Side {
    let ids: Vec<String> = (0..n).map(|i| format!("{prefix}{i:02}")).collect();
    let mut next_sense: HashMap<String, u32> = HashMap::new();
    let mut lemmas = Vec::with_capacity(n);
    for i in 0..n {
        let mut parents = BTreeSet::new();
        if i > 0 && !rng.gen_bool(0.15) {
            parents.insert(rng.gen_range(0..i));
            if i > 1 && rng.gen_bool(0.25) {
                parents.insert(rng.gen_range(0..i));
            }
        }
        let mut own: Vec<String> = Vec::new();
        let m = if i + 1 == n { 1 } else { rng.gen_range(0..=2) };
        for _ in 0..m {
            let l = format!("{prefix}l{}", rng.gen_range(0..pool));
            if !own.contains(&l) {
                own.push(l);
            }
        }
        let atts: Vec<String> = own
            .iter()
            .map(|l| {
                let k = next_sense.entry(l.clone()).or_insert(0);
                *k += 1;
                format!("{l}#{k}")
            })
            .collect();
        let parents: Vec<&str> = parents.iter().map(|&p| ids[p].as_str()).collect();
        lines.push(format!("{}\t{pos}\t{}\t{}", ids[i], parents.join(","), atts.join(",")));
        lemmas.push(own);
    }
    Side { ids, lemmas }
}

/// A random noun/verb DAG pair with at most 50 concepts and at most 200
/// triples. Lines are shuffled so parents may appear after children.
pub fn random_fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_nouns = rng.gen_range(3..=32);
    let n_verbs = rng.gen_range(2..=(50 - n_nouns).min(18));
    let mut lines = Vec::new();
    let nouns = random_side(&mut rng, "n", "noun", n_nouns, 8, &mut lines);
    let verbs = random_side(&mut rng, "v", "verb", n_verbs, 6, &mut lines);
    lines.shuffle(&mut rng);
    let taxonomy = lines.join("\n") + "\n";

    let tagged = |s: &Side| -> Vec<usize> { (0..s.ids.len()).filter(|&i| !s.lemmas[i].is_empty()).collect() };
    let noun_pool = tagged(&nouns);
    let verb_pool = tagged(&verbs);
    let n_triples = rng.gen_range(1..=200);
    let mut triples = String::new();
    for _ in 0..n_triples {
        let ni = *noun_pool.choose(&mut rng).unwrap();
        let vi = *verb_pool.choose(&mut rng).unwrap();
        let noun_lemma = nouns.lemmas[ni].choose(&mut rng).unwrap();
        let verb_lemma = verbs.lemmas[vi].choose(&mut rng).unwrap();
        let vsense = if rng.gen_bool(0.1) { "-" } else { verbs.ids[vi].as_str() };
        let rel = if rng.gen_bool(0.7) { "obj" } else { "subj" };
        triples.push_str(&format!(
            "{verb_lemma}\t{vsense}\t{rel}\t{noun_lemma}\t{}\n",
            nouns.ids[ni]
        ));
    }
    Fixture {
        seed,
        taxonomy,
        triples,
    }
}

pub struct Planted {
    pub taxonomy: String,
    pub train: String,
    pub test: String,
}

/// Nouns: 2 top classes, 2 middle classes under each, 3 leaves under each
/// middle class. Verbs: a root, one class per middle noun class, 3 leaf verbs
/// per verb class. Verb class `i` takes objects from middle noun class `i`.
/// Leaf verbs 0 and 1 of each class appear in training; leaf verb 2 only in
/// the test set. Ambiguous noun lemmas have one sense under each top class.
pub fn planted_corpus(seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tax = String::new();
    let leaves_per_mid = 3;
    // Leaf (mid, j) carries the sense of lemma `w{j}_{mid % 2}` in the top
    // class that owns `mid`; the lemma's other sense lives in the other top.
    for top in 0..2 {
        tax.push_str(&format!("n_top{top}\tnoun\t\t\n"));
    }
    for mid in 0..4 {
        tax.push_str(&format!("n_mid{mid}\tnoun\tn_top{}\t\n", mid / 2));
    }
    let mut senses: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for mid in 0..4 {
        for j in 0..leaves_per_mid {
            let lemma = format!("w{j}_{}", mid % 2);
            let list = senses.entry(lemma.clone()).or_default();
            list.push(format!("n_leaf{mid}_{j}"));
            let k = list.len();
            tax.push_str(&format!("n_leaf{mid}_{j}\tnoun\tn_mid{mid}\t{lemma}#{k}\n"));
        }
    }
    tax.push_str("v_root\tverb\t\t\n");
    for c in 0..4 {
        tax.push_str(&format!("v_class{c}\tverb\tv_root\t\n"));
        for j in 0..3 {
            tax.push_str(&format!("v_{c}_{j}\tverb\tv_class{c}\tverb{c}_{j}#1\n"));
        }
    }
    let line = |rng: &mut ChaCha8Rng, c: usize, j: usize| {
        let leaf = rng.gen_range(0..leaves_per_mid);
        format!(
            "verb{c}_{j}\tv_{c}_{j}\tobj\tw{leaf}_{}\tn_leaf{c}_{leaf}\n",
            c % 2
        )
    };
    let mut train = String::new();
    let mut test = String::new();
    for c in 0..4 {
        for j in 0..2 {
            for _ in 0..20 {
                train.push_str(&line(&mut rng, c, j));
            }
        }
        for _ in 0..25 {
            test.push_str(&line(&mut rng, c, 2));
        }
    }
    Planted {
        taxonomy: tax,
        train,
        test,
    }
}

#[derive(Clone, Debug)]
pub struct Rec {
    pub verb: String,
    pub vsense: Option<String>,
    pub rel: String,
    pub noun: String,
}

/// Direct transcription of the estimation formulas: every quantity is a sum
/// over raw records, with subsumption found by walking parent links.
pub struct Oracle {
    parents: HashMap<String, Vec<String>>,
    pos: BTreeMap<String, String>,
    pub records: Vec<Rec>,
    anc: HashMap<String, BTreeSet<String>>,
    est: HashMap<String, f64>,
}

impl Oracle {
    pub fn new(taxonomy: &str, triples: &str) -> Self {
        let mut parents = HashMap::new();
        let mut pos = BTreeMap::new();
        for line in taxonomy.lines().filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            let ps = f
                .get(2)
                .map(|s| s.split(',').filter(|p| !p.is_empty()).map(String::from).collect())
                .unwrap_or_default();
            parents.insert(f[0].to_string(), ps);
            pos.insert(f[0].to_string(), f[1].to_string());
        }
        let records = triples
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let f: Vec<&str> = line.split('\t').collect();
                Rec {
                    verb: f[0].to_string(),
                    vsense: (f[1] != "-").then(|| f[1].to_string()),
                    rel: f[2].to_string(),
                    noun: f[4].to_string(),
                }
            })
            .collect();
        let mut o = Oracle {
            parents,
            pos,
            records,
            anc: HashMap::new(),
            est: HashMap::new(),
        };
        let anc: HashMap<String, BTreeSet<String>> = o
            .concepts()
            .map(|c| (c.clone(), o.walk_up(c)))
            .collect();
        o.anc = anc;
        let est: HashMap<String, f64> = o
            .concepts()
            .map(|c| (c.clone(), o.naive_class_freq(c)))
            .collect();
        o.est = est;
        o
    }

    pub fn concepts(&self) -> impl Iterator<Item = &String> {
        self.pos.keys()
    }

    pub fn nouns(&self) -> Vec<String> {
        self.pos
            .iter()
            .filter(|(_, p)| p.as_str() == "noun")
            .map(|(c, _)| c.clone())
            .collect()
    }

    pub fn verb_concepts(&self) -> Vec<String> {
        self.pos
            .iter()
            .filter(|(_, p)| p.as_str() == "verb")
            .map(|(c, _)| c.clone())
            .collect()
    }

    pub fn verb_lemmas(&self) -> BTreeSet<String> {
        self.records.iter().map(|r| r.verb.clone()).collect()
    }

    pub fn ancestors(&self, c: &str) -> &BTreeSet<String> {
        &self.anc[c]
    }

    fn walk_up(&self, c: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![c.to_string()];
        while let Some(x) = stack.pop() {
            if seen.insert(x.clone()) {
                stack.extend(self.parents[&x].iter().cloned());
            }
        }
        seen
    }

    pub fn is_below(&self, lower: &str, upper: &str) -> bool {
        self.ancestors(lower).contains(upper)
    }

    pub fn classes(&self, c: &str) -> f64 {
        self.ancestors(c).len() as f64
    }

    fn fr(&self, c: &str) -> f64 {
        self.records
            .iter()
            .filter(|r| r.noun == c || r.vsense.as_deref() == Some(c))
            .count() as f64
    }

    fn naive_class_freq(&self, c: &str) -> f64 {
        self.concepts()
            .filter(|d| self.is_below(d, c))
            .map(|d| self.fr(d) / self.classes(d))
            .sum()
    }

    pub fn class_freq(&self, c: &str) -> f64 {
        self.est[c]
    }

    fn rel_records<'s>(&'s self, rel: &'s str) -> impl Iterator<Item = &'s Rec> + 's {
        self.records.iter().filter(move |r| r.rel == rel)
    }

    pub fn rel_verb_count(&self, rel: &str, verb: &str) -> f64 {
        self.rel_records(rel).filter(|r| r.verb == verb).count() as f64
    }

    pub fn rel_vsense_count(&self, rel: &str, cv: &str) -> f64 {
        self.rel_records(rel)
            .filter(|r| r.vsense.as_deref() == Some(cv))
            .count() as f64
    }

    pub fn class_rel_verb(&self, cn: &str, rel: &str, verb: &str) -> f64 {
        self.rel_records(rel)
            .filter(|r| r.verb == verb && self.is_below(&r.noun, cn))
            .map(|r| 1.0 / self.classes(&r.noun))
            .sum()
    }

    pub fn class_rel_vsense(&self, cn: &str, rel: &str, cv: &str) -> f64 {
        self.rel_records(rel)
            .filter(|r| r.vsense.as_deref() == Some(cv) && self.is_below(&r.noun, cn))
            .map(|r| 1.0 / self.classes(&r.noun))
            .sum()
    }

    pub fn class_rel_class(&self, cn: &str, rel: &str, cv: &str) -> f64 {
        self.rel_records(rel)
            .filter_map(|r| r.vsense.as_ref().map(|v| (r, v)))
            .filter(|(r, v)| self.is_below(v, cv) && self.is_below(&r.noun, cn))
            .map(|(r, v)| 1.0 / (self.classes(&r.noun) * self.classes(v)))
            .sum()
    }

    pub fn rel_vclass_total(&self, rel: &str, cv: &str) -> f64 {
        self.rel_records(rel)
            .filter_map(|r| r.vsense.as_ref())
            .filter(|v| self.is_below(v, cv))
            .map(|v| 1.0 / self.classes(v))
            .sum()
    }

    fn scores(&self, a: impl Fn(&str) -> f64) -> BTreeMap<String, f64> {
        let nouns = self.nouns();
        let weight: HashMap<&String, f64> = nouns.iter().map(|cn| (cn, a(cn))).collect();
        let mut out = BTreeMap::new();
        for ci in &nouns {
            let fi = self.class_freq(ci);
            let s: f64 = self
                .ancestors(ci)
                .iter()
                .filter(|cn| self.class_freq(cn) > 0.0)
                .map(|cn| fi / self.class_freq(cn) * weight[cn])
                .sum();
            if s > 0.0 {
                out.insert(ci.clone(), s);
            }
        }
        out
    }

    /// `None` when the conditioner has no training data.
    pub fn word_to_class(&self, rel: &str, verb: &str) -> Option<BTreeMap<String, f64>> {
        let n = self.rel_verb_count(rel, verb);
        (n > 0.0).then(|| self.scores(|cn| self.class_rel_verb(cn, rel, verb) / n))
    }

    pub fn sense_to_class(&self, rel: &str, cv: &str) -> Option<BTreeMap<String, f64>> {
        let n = self.rel_vsense_count(rel, cv);
        (n > 0.0).then(|| self.scores(|cn| self.class_rel_vsense(cn, rel, cv) / n))
    }

    /// Verb factor `f̂r(cv_j)/f̂r(cv)`, or 1 when `cv_j` was never seen.
    pub fn class_to_class(&self, rel: &str, cv_j: &str) -> Option<BTreeMap<String, f64>> {
        let fj = self.class_freq(cv_j);
        let levels: Vec<(f64, String, f64)> = self
            .ancestors(cv_j)
            .iter()
            .cloned()
            .map(|cv| {
                let factor = if fj > 0.0 { fj / self.class_freq(&cv) } else { 1.0 };
                let total = self.rel_vclass_total(rel, &cv);
                (factor, cv, total)
            })
            .filter(|l| l.2 > 0.0)
            .collect();
        if levels.is_empty() {
            return None;
        }
        Some(self.scores(|cn| {
            levels
                .iter()
                .map(|(f, cv, total)| f * self.class_rel_class(cn, rel, cv) / total)
                .sum()
        }))
    }
}

pub fn max_abs_diff(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// A library table keyed by concept id.
pub fn by_id(t: &Taxonomy, table: &selpref::PreferenceTable) -> BTreeMap<String, f64> {
    table.iter().map(|(c, s)| (t.id(c).to_string(), s)).collect()
}
