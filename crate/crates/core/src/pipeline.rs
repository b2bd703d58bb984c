//! Runs every stage in order, writing each artifact under a name derived
//! from the hash of everything it depends on.
//!
//! Hashes chain: a stage's hash covers its own config section, the content
//! of its input files and the hash of the stage before it. Changing a
//! setting therefore renames the artifacts of that stage and every later
//! one while earlier artifacts stay valid. Word vectors and trained models
//! are reused from disk when an artifact with the right hash exists.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::classifier::{Checkpoint, NativeModel, TrainingExample};
use crate::config::{ConfigError, PipelineConfig};
use crate::corpus::{
    parse_corpus, parse_labeled, split_corpus, stopwords, LabeledSet, LexiconTagger, SeedLexicon, TaggedSentence,
    TaggerBackend, TaggerRegistry,
};
use crate::embedding::{train_cbow, EmbeddingTable};
use crate::eval::{evaluate, MetricReport, RunMetrics};
use crate::hashing::{digest_hex, short_hash};
use crate::pseudolabel::{dump, filter_uncertain, AspectLexicon, LabelingConfig, NounFrequency, PseudoLabeledSentence, PseudoLabeler};
use crate::retrieval::{AugmentOptions, AugmentedSet, Augmenter, PrecomputedEncoder, SentenceEncoder, WordSumEncoder};
use crate::sec::enhance_seed_words;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{stage}: bad input: {message}")]
    Data { stage: &'static str, message: String },
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    /// 1 config error, 2 data error, 3 stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Data { .. } => 2,
            PipelineError::Stage { .. } => 3,
        }
    }
}

fn data_err(stage: &'static str) -> impl Fn(String) -> PipelineError {
    move |message| PipelineError::Data { stage, message }
}

fn stage_err<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        message: e.to_string(),
    }
}

/// Stages in execution order; a run can stop after any of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Embeddings,
    PseudoLabel,
    EnhanceSeeds,
    Retrieve,
    Train,
    Evaluate,
}

/// Everything a run produced, up to the stage it stopped at.
#[derive(Debug, Default)]
pub struct PipelineOutput {
    pub stage_hashes: BTreeMap<String, String>,
    pub artifacts: Vec<PathBuf>,
    pub added_seeds: BTreeMap<String, String>,
    pub report: Option<MetricReport>,
}

struct Inputs {
    tagger: LexiconTagger,
    in_domain: Vec<TaggedSentence>,
    dev: Vec<TaggedSentence>,
    bank: Vec<TaggedSentence>,
    bank_digest: String,
    seeds: SeedLexicon,
    seeds_digest: String,
    hash: String,
}

fn read(stage: &'static str, path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| PipelineError::Data {
        stage,
        message: format!("{}: {e}", path.display()),
    })
}

fn digest_file(stage: &'static str, path: Option<&Path>) -> Result<String, PipelineError> {
    match path {
        Some(p) => Ok(digest_hex([read(stage, p)?])),
        None => Ok(String::new()),
    }
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, stage: &'static str, name: String, text: &str) -> Result<PathBuf, PipelineError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| PipelineError::Stage {
            stage,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
        self.written.push(path.clone());
        Ok(path)
    }
}

fn load_inputs(cfg: &PipelineConfig) -> Result<Inputs, PipelineError> {
    const STAGE: &str = "inputs";
    let mut tagger = LexiconTagger::bundled();
    let lexicon_digest = match &cfg.paths.pos_lexicon {
        Some(p) => {
            let text = read(STAGE, p)?;
            tagger.extend(LexiconTagger::from_tsv(&text).map_err(|e| data_err(STAGE)(e.to_string()))?);
            digest_hex([text])
        }
        None => String::new(),
    };
    let mut registry = TaggerRegistry::empty();
    registry.register(Box::new(tagger.clone()));
    registry
        .get(&cfg.corpus.tagger)
        .map_err(|e| PipelineError::Config(ConfigError::Invalid {
            key: "corpus.tagger".into(),
            message: e.to_string(),
        }))?;

    let corpus_text = read(STAGE, &cfg.paths.corpus)?;
    let all = parse_corpus(&corpus_text, &tagger);
    if all.is_empty() {
        return Err(data_err(STAGE)(format!("{} has no sentences", cfg.paths.corpus.display())));
    }
    let (in_domain, dev) = if cfg.corpus.split_ratio >= 1.0 {
        (all, Vec::new())
    } else {
        split_corpus(&all, cfg.corpus.split_ratio, cfg.corpus.split_seed).map_err(|e| data_err(STAGE)(e.to_string()))?
    };

    let (bank, bank_digest) = match &cfg.paths.bank {
        Some(p) => {
            let text = read(STAGE, p)?;
            (parse_corpus(&text, &tagger), digest_hex([&text]))
        }
        None => (Vec::new(), String::new()),
    };

    let seeds_text = read(STAGE, &cfg.paths.seeds)?;
    let seeds = SeedLexicon::parse(&seeds_text).map_err(|e| data_err(STAGE)(e.to_string()))?;

    let hash = short_hash([
        "inputs".to_string(),
        digest_hex([&corpus_text]),
        lexicon_digest,
        PipelineConfig::section_text(&cfg.corpus),
    ]);
    Ok(Inputs {
        tagger,
        in_domain,
        dev,
        bank,
        bank_digest,
        seeds_digest: digest_hex([&seeds_text]),
        seeds,
        hash,
    })
}

fn embeddings(cfg: &PipelineConfig, inputs: &Inputs, out: &mut Writer) -> Result<(EmbeddingTable, String), PipelineError> {
    const STAGE: &str = "embeddings";
    if let Some(p) = &cfg.paths.embeddings {
        let hash = short_hash(["embeddings-pretrained".to_string(), digest_file(STAGE, Some(p))?]);
        let table = EmbeddingTable::load(p).map_err(|e| data_err(STAGE)(e.to_string()))?;
        return Ok((table, hash));
    }
    let hash = short_hash([
        "embeddings".to_string(),
        inputs.hash.clone(),
        if cfg.corpus.embed_bank { inputs.bank_digest.clone() } else { String::new() },
        PipelineConfig::section_text(&cfg.embedding),
    ]);
    let path = out.dir.join(format!("embeddings-{hash}.txt"));
    let vocab = out.dir.join(format!("vocab-{hash}.txt"));
    if path.exists() && vocab.exists() {
        log::info!("reusing {}", path.display());
        let mut table = EmbeddingTable::load(&path).map_err(stage_err(STAGE))?;
        table
            .load_vocab_counts(&read(STAGE, &vocab)?)
            .map_err(stage_err(STAGE))?;
        return Ok((table, hash));
    }
    let mut corpus = inputs.in_domain.clone();
    if cfg.corpus.embed_bank {
        corpus.extend(inputs.bank.iter().cloned());
    }
    log::info!("training word vectors on {} sentences", corpus.len());
    let table = train_cbow(&corpus, &cfg.embedding).map_err(stage_err(STAGE))?;
    out.put(STAGE, format!("embeddings-{hash}.txt"), &table.to_text())?;
    out.put(STAGE, format!("vocab-{hash}.txt"), &table.vocab_text())?;
    Ok((table, hash))
}

#[derive(Serialize)]
struct SecArtifact<'a> {
    boundary: BTreeSet<String>,
    uncertain_sentences: Vec<usize>,
    uncertain_keywords: BTreeSet<String>,
    intersection: BTreeSet<String>,
    mapped: &'a BTreeMap<String, String>,
}

fn examples(labeled: &[PseudoLabeledSentence]) -> Vec<TrainingExample> {
    labeled.iter().map(TrainingExample::from_pseudo).collect()
}

fn read_test(cfg: &PipelineConfig, tagger: &dyn TaggerBackend) -> Result<(LabeledSet, String), PipelineError> {
    const STAGE: &str = "evaluate";
    let text = read(STAGE, &cfg.paths.test)?;
    let set = parse_labeled(&text, tagger).map_err(|e| data_err(STAGE)(e.to_string()))?;
    if set.items.is_empty() {
        return Err(data_err(STAGE)(format!("{} has no usable sentences", cfg.paths.test.display())));
    }
    Ok((set, digest_hex([text])))
}

/// Runs the stages up to and including `until`.
pub fn run_until(cfg: &PipelineConfig, until: Stage) -> Result<PipelineOutput, PipelineError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.paths.output).map_err(|e| PipelineError::Stage {
        stage: "setup",
        message: format!("cannot create {}: {e}", cfg.paths.output.display()),
    })?;
    let mut out = Writer {
        dir: cfg.paths.output.clone(),
        written: Vec::new(),
    };
    let mut result = PipelineOutput::default();
    let mut stats: BTreeMap<String, usize> = BTreeMap::new();

    let inputs = load_inputs(cfg)?;
    result.stage_hashes.insert("inputs".into(), inputs.hash.clone());
    stats.insert("in_domain_sentences".into(), inputs.in_domain.len());
    stats.insert("dev_sentences".into(), inputs.dev.len());
    stats.insert("bank_sentences".into(), inputs.bank.len());
    out.put("inputs", format!("dev-{}.txt", inputs.hash), &inputs.dev.iter().map(|s| s.text() + "\n").collect::<String>())?;

    let (table, emb_hash) = embeddings(cfg, &inputs, &mut out)?;
    result.stage_hashes.insert("embeddings".into(), emb_hash.clone());
    stats.insert("vocabulary".into(), table.len());
    if until == Stage::Embeddings {
        result.artifacts = out.written;
        return Ok(result);
    }

    const LABEL: &str = "pseudo-label";
    let lexicon = AspectLexicon::from_seed_lexicon(&inputs.seeds).map_err(|e| data_err(LABEL)(e.to_string()))?;
    let names = lexicon.names();
    let nouns = NounFrequency::from_corpus(&inputs.in_domain);
    let labeling: LabelingConfig = cfg.labeling;
    let label_hash = short_hash([
        "labels".to_string(),
        emb_hash,
        inputs.seeds_digest.clone(),
        PipelineConfig::section_text(&cfg.labeling),
    ]);
    result.stage_hashes.insert("pseudo-label".into(), label_hash.clone());
    let initial = PseudoLabeler::new(&lexicon.initial_only(), &table, &nouns, labeling).label_all(&inputs.in_domain);
    out.put(LABEL, format!("labels-initial-{label_hash}.tsv"), &dump(&initial, &names))?;
    if until == Stage::PseudoLabel {
        result.artifacts = out.written;
        return Ok(result);
    }

    const SEC: &str = "enhance-seeds";
    let gamma = cfg.filter.gamma;
    let sec_hash = short_hash([
        "sec".to_string(),
        label_hash,
        PipelineConfig::section_text(&cfg.filter),
        PipelineConfig::section_text(&cfg.sec),
    ]);
    result.stage_hashes.insert("enhance-seeds".into(), sec_hash.clone());
    let mapped = if cfg.sec.enabled {
        let trace = enhance_seed_words(&inputs.in_domain, &lexicon, gamma, &table, &stopwords()).map_err(stage_err(SEC))?;
        let named: BTreeMap<String, String> = trace.mapped.iter().map(|(w, &a)| (w.clone(), names[a].clone())).collect();
        let artifact = SecArtifact {
            boundary: trace.boundary.word_set(),
            uncertain_sentences: trace.uncertain_ids(&inputs.in_domain),
            uncertain_keywords: trace.uncertain_keywords.word_set(),
            intersection: trace.intersection.word_set(),
            mapped: &named,
        };
        let json = serde_json::to_string_pretty(&artifact).map_err(stage_err(SEC))? + "\n";
        out.put(SEC, format!("sec-trace-{sec_hash}.json"), &json)?;
        result.added_seeds = named;
        trace.mapped
    } else {
        BTreeMap::new()
    };
    stats.insert("seed_words_added".into(), mapped.len());
    let enhanced = lexicon.with_additional(&mapped).map_err(stage_err(SEC))?;
    out.put(SEC, format!("seeds-{sec_hash}.toml"), &enhanced.to_seed_lexicon().to_toml())?;

    let labeler = PseudoLabeler::new(&enhanced, &table, &nouns, labeling);
    let (certain, uncertain) = filter_uncertain(labeler.label_all(&inputs.in_domain), gamma);
    stats.insert("certain_sentences".into(), certain.len());
    stats.insert("uncertain_sentences".into(), uncertain.len());
    out.put(SEC, format!("labels-{sec_hash}.tsv"), &dump(&certain, &names))?;
    if until == Stage::EnhanceSeeds {
        result.artifacts = out.written;
        return Ok(result);
    }

    const RETRIEVE: &str = "retrieve";
    let aug_hash = short_hash([
        "augment".to_string(),
        sec_hash,
        if cfg.retrieval.k > 0 { inputs.bank_digest.clone() } else { String::new() },
        PipelineConfig::section_text(&cfg.retrieval),
        digest_file(RETRIEVE, cfg.paths.sentence_vectors.as_deref())?,
    ]);
    result.stage_hashes.insert("retrieve".into(), aug_hash.clone());
    let augmented = if cfg.retrieval.k == 0 {
        log::info!("k = 0: training on in-domain sentences only");
        AugmentedSet::default()
    } else {
        let precomputed;
        let word_sum;
        let encoder: &dyn SentenceEncoder = if cfg.retrieval.encoder == PrecomputedEncoder::ID {
            let p = cfg.paths.sentence_vectors.as_deref().expect("validated");
            precomputed = PrecomputedEncoder::load(p).map_err(|e| data_err(RETRIEVE)(e.to_string()))?;
            &precomputed
        } else {
            word_sum = WordSumEncoder::new(&table);
            &word_sum
        };
        let augmenter = Augmenter {
            encoder,
            k: cfg.retrieval.k,
            options: AugmentOptions {
                gamma,
                filter_uncertain: cfg.retrieval.filter_uncertain,
            },
        };
        let certain_sentences: Vec<TaggedSentence> = certain.iter().map(|p| p.sentence.clone()).collect();
        let (queries, candidates, augmented) = augmenter
            .run(&enhanced, &certain_sentences, &inputs.in_domain, &inputs.bank, &labeler)
            .map_err(stage_err(RETRIEVE))?;
        stats.insert("task_queries".into(), queries.len());
        stats.insert("retrieved_candidates".into(), candidates.len());
        stats.insert("dropped_uncertain_candidates".into(), augmented.dropped_uncertain);
        stats.insert("dropped_in_domain_duplicates".into(), augmented.dropped_in_domain);
        augmented
    };
    stats.insert("augmented_sentences".into(), augmented.len());
    let aug_labeled: Vec<PseudoLabeledSentence> = augmented.items.iter().map(|a| a.labeled.clone()).collect();
    out.put(RETRIEVE, format!("augmented-{aug_hash}.tsv"), &dump(&aug_labeled, &names))?;

    let mut training = examples(&certain);
    training.extend(examples(&aug_labeled));
    stats.insert("training_examples".into(), training.len());
    out.put(
        RETRIEVE,
        format!("training-{aug_hash}.tsv"),
        &crate::classifier::training_export(&training, &names),
    )?;
    if until == Stage::Retrieve {
        result.artifacts = out.written;
        return Ok(result);
    }

    const TRAIN: &str = "train";
    if training.is_empty() {
        return Err(PipelineError::Stage {
            stage: TRAIN,
            message: "no certain or augmented sentences to train on; lower filter.gamma or add seeds".into(),
        });
    }
    let mut models = Vec::new();
    for &seed in &cfg.run.seeds {
        let mut mcfg = cfg.classifier.clone();
        mcfg.rng_seed = seed;
        let model_hash = short_hash([
            "model".to_string(),
            aug_hash.clone(),
            PipelineConfig::section_text(&mcfg),
        ]);
        result.stage_hashes.insert(format!("train-{seed}"), model_hash.clone());
        let path = out.dir.join(format!("model-{model_hash}.json"));
        let model = if path.exists() {
            log::info!("reusing {}", path.display());
            Checkpoint::from_json(&read(TRAIN, &path)?)
                .and_then(Checkpoint::into_model)
                .map_err(stage_err(TRAIN))?
        } else {
            let mut model = NativeModel::new(table.clone(), names.clone(), &mcfg).map_err(stage_err(TRAIN))?;
            let report = model.train(&training, &mcfg).map_err(stage_err(TRAIN))?;
            log::info!(
                "seed {seed}: loss {:.4} -> {:.4}",
                report.initial_loss,
                report.final_loss
            );
            out.put(TRAIN, format!("model-{model_hash}.json"), &model.to_checkpoint(&mcfg).to_json())?;
            model
        };
        models.push((seed, model_hash, model));
    }
    if until == Stage::Train {
        result.artifacts = out.written;
        return Ok(result);
    }

    const EVAL: &str = "evaluate";
    let (test, test_digest) = read_test(cfg, &inputs.tagger)?;
    let mut runs: Vec<RunMetrics> = Vec::new();
    for (seed, _, model) in &models {
        let predictions = test
            .items
            .iter()
            .map(|item| model.predict(&item.sentence.surfaces().map(str::to_string).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(stage_err(EVAL))?;
        let mut run = evaluate(&test.items, &predictions, &names, *seed).map_err(|e| data_err(EVAL)(e.to_string()))?;
        run.stats = stats.clone();
        runs.push(run);
    }
    let mut parts = vec!["report".to_string(), test_digest];
    parts.extend(models.iter().map(|(_, h, _)| h.clone()));
    let report_hash = short_hash(parts);
    result.stage_hashes.insert("evaluate".into(), report_hash.clone());
    let report = MetricReport::new(report_hash.clone(), names, test.items.len(), test.dropped_multi_aspect, runs);
    out.put(EVAL, format!("report-{report_hash}.json"), &report.to_json())?;
    out.put(EVAL, format!("report-{report_hash}.txt"), &report.to_table())?;
    out.put(EVAL, "report.json".to_string(), &report.to_json())?;
    result.report = Some(report);
    result.artifacts = out.written;
    Ok(result)
}

/// Full run: embeddings through evaluation.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    run_until(cfg, Stage::Evaluate)
}
