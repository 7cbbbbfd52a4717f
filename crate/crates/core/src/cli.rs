//! Command-line front end. Every subcommand loads and validates all of its
//! inputs and renders its complete output in memory before anything is
//! written, so a failing run leaves no partial files behind.

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{load_triples, tally, Rel, TripleRecord};
use crate::estimator::Estimator;
use crate::integrator::{build_edges, export_edges};
use crate::models::{read_table_dump, train_table, ModelKind};
use crate::number::{fixed4, sig17};
use crate::pruner::prune_classes;
use crate::taxonomy::{load_taxonomy, ConceptIx, Pos, Taxonomy};
use crate::wsd::{baseline_mfs, baseline_random, evaluate, EvalConfig, Grouping, Protocol, WsdReport};

#[derive(Debug, Parser)]
#[command(name = "selpref", version, about = "Selectional preferences over a concept taxonomy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one preference table and print its dump.
    Train(TrainArgs),
    /// Prune every table of a dump file to its antichain.
    Prune(PruneArgs),
    /// Build verb-class → noun-class relation edges and write the edge file.
    Export(ExportArgs),
    /// Print the score of one noun concept for one conditioner.
    Query(QueryArgs),
    /// Cross-validated WSD evaluation with baselines.
    Wsd(WsdArgs),
    /// Check a taxonomy (and optionally triples) and print a summary.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RelArg {
    Subj,
    Obj,
    Both,
}

impl RelArg {
    fn rels(self) -> Vec<Rel> {
        match self {
            RelArg::Subj => vec![Rel::Subj],
            RelArg::Obj => vec![Rel::Obj],
            RelArg::Both => vec![Rel::Obj, Rel::Subj],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ModelArg {
    #[value(name = "word2class")]
    #[serde(rename = "word2class")]
    Word2Class,
    #[value(name = "sense2class")]
    #[serde(rename = "sense2class")]
    Sense2Class,
    #[value(name = "class2class")]
    #[serde(rename = "class2class")]
    Class2Class,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Word2Class => ModelKind::WordToClass,
            ModelArg::Sense2Class => ModelKind::SenseToClass,
            ModelArg::Class2Class => ModelKind::ClassToClass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupingArg {
    Pooled,
    PerNoun,
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub triples: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, value_enum)]
    pub rel: SingleRel,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Verb lemma (word2class) or verb concept id (sense2class, class2class).
    #[arg(long)]
    pub verb: String,
    #[arg(long)]
    pub prune: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the propagated frequency estimates behind the table.
    #[arg(long, value_name = "PATH")]
    pub dump_intermediate: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SingleRel {
    Subj,
    Obj,
}

impl From<SingleRel> for Rel {
    fn from(r: SingleRel) -> Self {
        match r {
            SingleRel::Subj => Rel::Subj,
            SingleRel::Obj => Rel::Obj,
        }
    }
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Preference-table dump to prune.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, value_enum)]
    pub rel: SingleRel,
    #[arg(long)]
    pub prune: bool,
    /// Comma-separated verb concept ids; defaults to every verb concept.
    #[arg(long, value_delimiter = ',')]
    pub verb_classes: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, value_enum)]
    pub rel: SingleRel,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub verb: String,
    /// Noun concept id.
    #[arg(long)]
    pub noun: String,
}

#[derive(Debug, Args)]
pub struct WsdArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Evaluation instances (triples format, gold noun sense last).
    #[arg(long)]
    pub instances: PathBuf,
    /// Explicit training triples; switches from k-fold to a train/test split.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub rel: RelArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "word2class,sense2class,class2class")]
    pub models: Vec<ModelArg>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "pooled")]
    pub grouping: GroupingArg,
    /// Decide on pruned tables.
    #[arg(long)]
    pub prune: bool,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat TSV with one row per model and precision/coverage/recall per relation.
    #[arg(long)]
    pub tsv: Option<PathBuf>,
    /// Print a 4-decimal summary table to stdout.
    #[arg(long)]
    pub human: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub triples: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the subcommand. Usage
/// errors print help and exit with status 2 via clap.
pub fn run<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    execute(cli.command)
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Prune(a) => prune(a),
        Command::Export(a) => export(a),
        Command::Query(a) => query(a),
        Command::Wsd(a) => wsd(a),
        Command::Validate(a) => validate(a),
    }
}

fn read_taxonomy(path: &Path) -> Result<Taxonomy> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    load_taxonomy(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

fn read_triples(path: &Path, t: &Taxonomy) -> Result<Vec<TripleRecord>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    load_triples(BufReader::new(file), t).with_context(|| format!("{}", path.display()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn train(a: TrainArgs) -> Result<()> {
    let t = read_taxonomy(&a.inputs.taxonomy)?;
    let records = read_triples(&a.inputs.triples, &t)?;
    let counts = tally(&records);
    let est = Estimator::new(&t, &counts);
    let rel = Rel::from(a.rel);
    let mut table = train_table(&est, a.model.into(), &a.verb, rel)?
        .with_provenance(a.inputs.triples.display().to_string());
    if a.prune && table.is_trained() {
        table = prune_classes(&t, &table).to_table();
    }
    let mut buf = Vec::new();
    table.dump(&t, &mut buf)?;
    let intermediate = a
        .dump_intermediate
        .as_ref()
        .map(|_| intermediate_estimates(&est, a.model.into(), &a.verb, rel))
        .transpose()?;
    emit(a.out.as_deref(), &buf)?;
    if let (Some(path), Some(text)) = (&a.dump_intermediate, intermediate) {
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// TSV of the frequency estimates a table is built from:
/// `quantity TAB noun_or_verb_concept TAB conditioner TAB value`.
fn intermediate_estimates(est: &Estimator<'_>, kind: ModelKind, key: &str, rel: Rel) -> Result<String> {
    let t = est.taxonomy();
    let mut out = String::new();
    let mut line = |q: &str, c: &str, cond: &str, v: f64| {
        out.push_str(&format!("{q}\t{c}\t{cond}\t{}\n", sig17(v)));
    };
    for c in t.concepts() {
        let f = est.class_freq(c);
        if f > 0.0 {
            line("class_freq", t.id(c).as_str(), "-", f);
        }
    }
    match kind {
        ModelKind::WordToClass => {
            line("rel_total", "-", key, est.counts().rel_verb(rel, key) as f64);
            for (c, m) in est.rel_verb_mass(rel, key) {
                line("class_rel_verb", t.id(c).as_str(), key, m);
            }
        }
        ModelKind::SenseToClass => {
            let cv = t.lookup(key)?;
            line("rel_total", "-", key, est.counts().rel_vsense(rel, cv) as f64);
            for (c, m) in est.rel_vsense_mass(rel, cv) {
                line("class_rel_vsense", t.id(c).as_str(), key, m);
            }
        }
        ModelKind::ClassToClass => {
            let cv_j = t.lookup(key)?;
            for &cv in t.ancestors(cv_j) {
                let cv_id = t.id(cv).as_str();
                line("rel_vclass_total", "-", cv_id, est.rel_vclass_total(rel, cv));
                for (&c, &m) in est.rel_class_mass(rel, cv).iter() {
                    line("class_rel_class", t.id(c).as_str(), cv_id, m);
                }
            }
        }
    }
    Ok(out)
}

fn prune(a: PruneArgs) -> Result<()> {
    let t = read_taxonomy(&a.taxonomy)?;
    let file = File::open(&a.table).with_context(|| format!("cannot open {}", a.table.display()))?;
    let tables = read_table_dump(BufReader::new(file), &t)
        .with_context(|| format!("{}", a.table.display()))?;
    let mut buf = Vec::new();
    for table in &tables {
        prune_classes(&t, table).to_table().dump(&t, &mut buf)?;
    }
    emit(a.out.as_deref(), &buf)
}

fn export(a: ExportArgs) -> Result<()> {
    let t = read_taxonomy(&a.inputs.taxonomy)?;
    let records = read_triples(&a.inputs.triples, &t)?;
    let verb_classes: Vec<ConceptIx> = match &a.verb_classes {
        Some(ids) => ids
            .iter()
            .map(|id| {
                let c = t.lookup(id)?;
                if t.pos(c) != Pos::Verb {
                    bail!("`{id}` is not a verb concept");
                }
                Ok(c)
            })
            .collect::<Result<_>>()?,
        None => t.concepts_of(Pos::Verb).collect(),
    };
    let counts = tally(&records);
    let est = Estimator::new(&t, &counts);
    let edges = build_edges(&est, a.rel.into(), &verb_classes, a.prune);
    let mut buf = Vec::new();
    export_edges(&edges, &mut buf)?;
    emit(a.out.as_deref(), &buf)
}

fn query(a: QueryArgs) -> Result<()> {
    let t = read_taxonomy(&a.inputs.taxonomy)?;
    let records = read_triples(&a.inputs.triples, &t)?;
    let noun = t.lookup(&a.noun)?;
    if t.pos(noun) != Pos::Noun {
        bail!("`{}` is not a noun concept", a.noun);
    }
    let counts = tally(&records);
    let est = Estimator::new(&t, &counts);
    let table = train_table(&est, a.model.into(), &a.verb, a.rel.into())?;
    let mut text = sig17(table.score(noun));
    if !table.is_trained() {
        text.push_str("\tuntrained");
    }
    text.push('\n');
    emit(None, text.as_bytes())
}

/// Echo of the options that determine a WSD report.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub taxonomy_path: String,
    pub triples_path: String,
    pub train_path: Option<String>,
    pub rel: RelArg,
    pub models: Vec<ModelArg>,
    pub prune: bool,
    pub folds: usize,
    pub seed: u64,
    pub grouping: GroupingArg,
}

#[derive(Debug, Serialize)]
pub struct RelationResults {
    pub rel: Rel,
    pub n_instances: usize,
    pub baselines: Vec<WsdReport>,
    pub models: Vec<WsdReport>,
}

#[derive(Debug, Serialize)]
pub struct EvaluationDocument {
    pub config: RunConfig,
    pub relations: Vec<RelationResults>,
}

fn wsd(a: WsdArgs) -> Result<()> {
    let t = read_taxonomy(&a.taxonomy)?;
    let instances = read_triples(&a.instances, &t)?;
    let train = a.train.as_deref().map(|p| read_triples(p, &t)).transpose()?;
    let grouping = match a.grouping {
        GroupingArg::Pooled => Grouping::Pooled,
        GroupingArg::PerNoun => Grouping::PerNoun,
    };

    let mut relations = Vec::new();
    for rel in a.rel.rels() {
        let test: Vec<TripleRecord> = instances.iter().filter(|r| r.rel == rel).cloned().collect();
        let train_rel: Option<Vec<TripleRecord>> = train
            .as_ref()
            .map(|tr| tr.iter().filter(|r| r.rel == rel).cloned().collect());
        let mut models = Vec::new();
        for &m in &a.models {
            let protocol = match &train_rel {
                Some(tr) => Protocol::Split { train: tr },
                None => Protocol::KFold {
                    k: a.folds,
                    seed: a.seed,
                    grouping,
                },
            };
            let config = EvalConfig {
                kind: m.into(),
                protocol,
                prune: a.prune,
            };
            let report = if test.is_empty() {
                WsdReport::from_totals(ModelKind::from(m).name(), 0, 0, 0.0)
            } else {
                evaluate(&t, &test, &config)
                    .with_context(|| format!("{} evaluation of {}", rel, ModelKind::from(m)))?
            };
            models.push(report);
        }
        relations.push(RelationResults {
            rel,
            n_instances: test.len(),
            baselines: vec![baseline_random(&t, &test), baseline_mfs(&t, &test)],
            models,
        });
    }

    let doc = EvaluationDocument {
        config: RunConfig {
            taxonomy_path: a.taxonomy.display().to_string(),
            triples_path: a.instances.display().to_string(),
            train_path: a.train.as_ref().map(|p| p.display().to_string()),
            rel: a.rel,
            models: a.models.clone(),
            prune: a.prune,
            folds: if a.train.is_some() { 0 } else { a.folds },
            seed: a.seed,
            grouping: a.grouping,
        },
        relations,
    };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    let tsv = a.tsv.as_ref().map(|_| flat_table(&doc.relations, sig17));
    let human = a.human.then(|| flat_table(&doc.relations, fixed4));

    match (&a.out, human) {
        (Some(p), human) => {
            emit(Some(p), json.as_bytes())?;
            if let Some(h) = human {
                emit(None, h.as_bytes())?;
            }
        }
        (None, Some(h)) => emit(None, h.as_bytes())?,
        (None, None) => emit(None, json.as_bytes())?,
    }
    if let (Some(p), Some(text)) = (&a.tsv, tsv) {
        emit(Some(p), text.as_bytes())?;
    }
    Ok(())
}

/// One row per baseline and model; precision, coverage and recall for each
/// evaluated relation.
pub fn flat_table(relations: &[RelationResults], fmt: fn(f64) -> String) -> String {
    let mut out = String::from("model");
    for r in relations {
        for col in ["precision", "coverage", "recall"] {
            out.push_str(&format!("\t{}_{}", r.rel, col));
        }
    }
    out.push('\n');
    let Some(first) = relations.first() else {
        return out;
    };
    let names: Vec<&str> = first
        .baselines
        .iter()
        .chain(&first.models)
        .map(|r| r.model.as_str())
        .collect();
    for (i, name) in names.iter().enumerate() {
        out.push_str(name);
        for r in relations {
            let rep = r.baselines.iter().chain(&r.models).nth(i).expect("same rows per relation");
            for v in [rep.precision, rep.coverage, rep.recall] {
                out.push('\t');
                out.push_str(&fmt(v));
            }
        }
        out.push('\n');
    }
    out
}

fn validate(a: ValidateArgs) -> Result<()> {
    let t = read_taxonomy(&a.taxonomy)?;
    let mut out = String::new();
    for pos in [Pos::Noun, Pos::Verb] {
        out.push_str(&format!(
            "{pos}_concepts\t{}\n{pos}_roots\t{}\n{pos}_lemmas\t{}\n",
            t.concepts_of(pos).count(),
            t.roots(pos).len(),
            t.lemmas(pos).len()
        ));
    }
    if let Some(path) = &a.triples {
        let records = read_triples(path, &t)?;
        let counts = tally(&records);
        out.push_str(&format!("records\t{}\n", records.len()));
        out.push_str(&format!(
            "records_with_verb_sense\t{}\n",
            records.iter().filter(|r| r.verb_concept.is_some()).count()
        ));
        for rel in Rel::ALL {
            out.push_str(&format!("{rel}_records\t{}\n", counts.rel_total(rel)));
            out.push_str(&format!("{rel}_verbs\t{}\n", counts.verbs_with(rel).count()));
        }
    }
    emit(None, out.as_bytes())
}
