use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use hprr_core::analyze::{
    normalized_profile, read_scored, reward_histogram, summarize, write_histogram_csv, write_profile_csv,
    write_summary_csv,
};
use hprr_core::aspects::{ingest_sentence_labels, LabelStore};
use hprr_core::corpus::{self, CorpusLoad, CorpusRecord};
use hprr_core::prefit::{fit as fit_estimator, read_preferences, CrmOptions, CvOptions, FitOptions, FitResult, PreferenceMatch};
use hprr_core::reward::compute_metric_vector;
use hprr_core::{align, meteor_score, tokenize, AspectScorer, EstimatorId, LexiconScorer, MeteorStats, ScoredReview, WeightVector};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{check_input, check_output, header, read_text, write_atomic, write_json, write_jsonl};
use crate::{AnalyzeArgs, CurateArgs, ExportArgs, Failure, FitArgs, MeteorArgs, ScoreArgs, ScorerArgs, ScorerKind};

enum Scorer {
    Lexicon(LexiconScorer),
    Ingest(LabelStore),
}

impl Scorer {
    fn build(args: &ScorerArgs) -> Result<Self> {
        match args.scorer {
            ScorerKind::Lexicon => match &args.lexicon {
                Some(path) => {
                    check_input(path)?;
                    Ok(Scorer::Lexicon(LexiconScorer::load(path).with_context(|| format!("lexicon {}", path.display()))?))
                }
                None => Ok(Scorer::Lexicon(LexiconScorer::default())),
            },
            ScorerKind::Ingest => {
                let path = args.labels.as_ref().ok_or_else(|| anyhow!("--scorer ingest needs --labels"))?;
                check_input(path)?;
                let store = ingest_sentence_labels(BufReader::new(File::open(path)?))
                    .with_context(|| format!("labels {}", path.display()))?;
                Ok(Scorer::Ingest(store))
            }
        }
    }

    fn as_dyn(&self) -> &dyn AspectScorer<f64> {
        match self {
            Scorer::Lexicon(s) => s,
            Scorer::Ingest(s) => s,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Scorer::Lexicon(_) => "lexicon",
            Scorer::Ingest(_) => "ingest",
        }
    }

    fn missing_labels(&self, id: &str) -> bool {
        matches!(self, Scorer::Ingest(store) if !store.contains(id))
    }
}

fn load_corpus(path: &Path) -> Result<CorpusLoad<f64>> {
    let load = corpus::load_corpus::<f64>(path).with_context(|| format!("corpus {}", path.display()))?;
    for m in &load.malformed {
        log::warn!("{}:{}: skipped malformed line: {}", path.display(), m.line, m.message);
    }
    Ok(load)
}

/// Preset name or a weight file. A fit output contributes the smoothed
/// weights of `estimator`.
fn load_weights(choice: &str, estimator: EstimatorId) -> Result<WeightVector<f64>> {
    match choice {
        "uniform" => return Ok(WeightVector::uniform()),
        "human" => return Ok(WeightVector::human_aligned()),
        _ => {}
    }
    let path = Path::new(choice);
    check_input(path).context("--weights is neither a preset nor a readable file")?;
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("weights {choice}"))?;
    match value.get("results") {
        Some(results) => {
            let entry = results
                .get(estimator.name())
                .ok_or_else(|| anyhow!("{choice} has no result for estimator {}", estimator.name()))?;
            let fit: FitResult<f64> = serde_json::from_value(entry.clone())?;
            Ok(WeightVector::custom(fit.smoothed_weights)?)
        }
        None => Ok(WeightVector::from_config_json(&text).with_context(|| format!("weights {choice}"))?),
    }
}

pub fn score(args: &ScoreArgs, seed: u64) -> Result<Vec<Failure>> {
    check_input(&args.input)?;
    check_output(&args.output)?;
    let weights = load_weights(&args.weights, args.estimator)?;
    let scorer = Scorer::build(&args.scorer)?;
    let load = load_corpus(&args.input)?;
    let custom = (weights.tag() == hprr_core::WeightTag::Custom).then_some(&weights);

    let results: Vec<std::result::Result<ScoredReview<f64>, Failure>> = load
        .records
        .par_iter()
        .map(|r| {
            let v = compute_metric_vector(&r.id, &r.review_text, &r.paper_text, scorer.as_dyn())
                .map_err(|e| Failure::new(format!("record {}", r.id), e))?;
            let system = r.system.clone().unwrap_or_else(|| args.system.clone());
            let scored = ScoredReview::new(r.id.clone(), system, v);
            Ok(match custom {
                Some(w) => scored.with_custom(w),
                None => scored,
            })
        })
        .collect();

    let mut scored = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => scored.push(s),
            Err(f) => failures.push(f),
        }
    }
    if !failures.is_empty() {
        return Ok(failures);
    }

    let mut warnings = 0;
    for r in &load.records {
        if r.paper_text.trim().is_empty() {
            log::warn!("record {}: empty manuscript, relevance is 0", r.id);
            warnings += 1;
        }
        if scorer.missing_labels(&r.id) {
            log::warn!("record {}: no sentence labels, aspects are 0", r.id);
            warnings += 1;
        }
    }
    let mut extra = json!({
        "input": args.input.display().to_string(),
        "records": scored.len(),
        "malformed": load.malformed.len(),
        "warnings": warnings,
        "scorer": scorer.name(),
        "weights": weights.tag(),
    });
    if let Some(w) = custom {
        extra["custom_weights"] = serde_json::from_str(&w.to_config_json())?;
    }
    let head = header("score", seed, extra);
    write_atomic(&args.output, |w| write_jsonl(w, &head, &scored))?;
    Ok(Vec::new())
}

pub fn fit(args: &FitArgs, seed: u64) -> Result<Vec<Failure>> {
    check_input(&args.input)?;
    check_output(&args.output)?;
    let matches: Vec<PreferenceMatch<f64>> = read_preferences(BufReader::new(File::open(&args.input)?))
        .with_context(|| format!("preferences {}", args.input.display()))?;

    let opts = FitOptions {
        crm: CrmOptions { epsilon: args.crm_epsilon, l1_lambda: args.crm_lambda, mode: args.crm_mode, ..CrmOptions::default() },
        alpha: args.alpha,
        cv: (!args.no_cv).then(|| CvOptions { folds: args.folds, seed, ..CvOptions::default() }),
        ..FitOptions::default()
    };
    let mut estimators = args.estimators.clone();
    estimators.sort_unstable_by_key(|e| e.name());
    estimators.dedup();

    let outcomes: Vec<_> = estimators.par_iter().map(|&e| (e, fit_estimator(e, &matches, &opts))).collect();
    let mut results = BTreeMap::new();
    let mut errors = BTreeMap::new();
    let mut failures = Vec::new();
    for (e, outcome) in outcomes {
        match outcome {
            Ok(r) => {
                results.insert(e.name(), r);
            }
            Err(err) => {
                log::error!("{}: {err}", e.name());
                errors.insert(e.name(), err.to_string());
                failures.push(Failure::new(format!("estimator {}", e.name()), err));
            }
        }
    }
    let head = header(
        "fit",
        seed,
        json!({
            "input": args.input.display().to_string(),
            "matches": matches.len(),
            "folds": (!args.no_cv).then_some(args.folds),
            "crm_mode": args.crm_mode,
            "crm_epsilon": args.crm_epsilon,
            "crm_lambda": args.crm_lambda,
            "alpha": args.alpha,
        }),
    );
    let doc = json!({ "header": head["header"], "results": results, "errors": errors });
    write_json(&args.output, &doc)?;
    Ok(failures)
}

pub fn curate(args: &CurateArgs, seed: u64) -> Result<Vec<Failure>> {
    check_input(&args.input)?;
    check_output(&args.output)?;
    if let Some(r) = &args.report {
        check_output(r)?;
    }
    let scorer = Scorer::build(&args.scorer)?;
    let load = load_corpus(&args.input)?;
    let rewards = corpus::uniform_rewards(&load.records, scorer.as_dyn())?;
    let report = corpus::curate_by_reward(&load.records, &rewards, args.group_by.as_deref())?;
    let kept: Vec<CorpusRecord<f64>> = report.kept_indices.iter().map(|&i| load.records[i].clone()).collect();

    let head = header(
        "curate",
        seed,
        json!({
            "input": args.input.display().to_string(),
            "records": load.records.len(),
            "malformed": load.malformed.len(),
            "kept": kept.len(),
            "scorer": scorer.name(),
        }),
    );
    write_atomic(&args.output, |w| {
        serde_json::to_writer(&mut *w, &head)?;
        w.write_all(b"\n")?;
        corpus::write_corpus(w, &kept)?;
        Ok(())
    })?;

    let doc = json!({ "header": head["header"], "report": report, "malformed": load.malformed });
    match &args.report {
        Some(path) => write_json(path, &doc)?,
        None => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    Ok(Vec::new())
}

pub fn export_sft(args: &ExportArgs) -> Result<Vec<Failure>> {
    check_input(&args.input)?;
    check_output(&args.output)?;
    let load = load_corpus(&args.input)?;
    let mut report = None;
    write_atomic(&args.output, |w| {
        report = Some(corpus::export_sft(&load.records, w)?);
        Ok(())
    })?;
    let report = report.expect("export ran");
    println!("{}", json!({ "written": report.written, "skipped_ids": report.skipped_ids, "malformed": load.malformed.len() }));
    Ok(Vec::new())
}

pub fn analyze(args: &AnalyzeArgs, seed: u64) -> Result<Vec<Failure>> {
    check_input(&args.input)?;
    check_output(&args.output)?;
    for p in args.profile.iter().chain(&args.histogram) {
        check_output(p)?;
    }
    let range = match args.range.as_deref() {
        Some(&[lo, hi]) => Some((lo, hi)),
        Some(_) => bail!("--range takes LOW,HIGH"),
        None => None,
    };
    let scored: Vec<ScoredReview<f64>> = read_scored(BufReader::new(File::open(&args.input)?))
        .with_context(|| format!("scored reviews {}", args.input.display()))?;
    let summaries = summarize(&scored)?;
    let comment = format!("# hprr analyze seed={seed}\n");

    write_atomic(&args.output, |w| {
        w.write_all(comment.as_bytes())?;
        write_summary_csv(w, &summaries)?;
        Ok(())
    })?;

    let mut failures = Vec::new();
    if let Some(path) = &args.profile {
        match normalized_profile(&summaries) {
            Ok(report) => {
                for m in &report.dropped {
                    log::warn!("profile: metric {m} is constant across systems, dropped");
                }
                write_atomic(path, |w| {
                    w.write_all(comment.as_bytes())?;
                    write_profile_csv(w, &report)?;
                    Ok(())
                })?;
            }
            Err(e) => failures.push(Failure::new("profile", e)),
        }
    }
    if let Some(path) = &args.histogram {
        let system = match &args.histogram_system {
            Some(s) => s.clone(),
            None => summaries.first().map(|s| s.system.clone()).ok_or_else(|| anyhow!("no systems in input"))?,
        };
        if !summaries.iter().any(|s| s.system == system) {
            failures.push(Failure::new("histogram", format!("system {system:?} not in input")));
        } else {
            match reward_histogram(&scored, &system, args.bins, range) {
                Ok(bins) => write_atomic(path, |w| {
                    w.write_all(comment.as_bytes())?;
                    writeln!(w, "# system={system}")?;
                    write_histogram_csv(w, &bins)?;
                    Ok(())
                })?,
                Err(e) => failures.push(Failure::new("histogram", e)),
            }
        }
    }
    Ok(failures)
}

pub fn meteor(args: &MeteorArgs) -> Result<Vec<Failure>> {
    let text = |inline: &Option<String>, file: &Option<std::path::PathBuf>| -> Result<String> {
        match (inline, file) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(p)) => read_text(p),
            (None, None) => bail!("missing text"),
        }
    };
    let review = tokenize(&text(&args.review, &args.review_file)?);
    let manuscript = tokenize(&text(&args.manuscript, &args.manuscript_file)?);
    let alignment = align(&review, &manuscript);
    let stats: MeteorStats<f64> = meteor_score(&review, &manuscript);
    let pairs: Vec<Value> = alignment
        .pairs
        .iter()
        .map(|p| {
            json!({
                "review": review.tokens()[p.candidate],
                "manuscript": manuscript.tokens()[p.reference],
                "review_index": p.candidate,
                "manuscript_index": p.reference,
                "stage": p.stage,
            })
        })
        .collect();
    let doc = json!({
        "review_tokens": review.len(),
        "manuscript_tokens": manuscript.len(),
        "stats": stats,
        "exact_alignment": alignment.exact,
        "pairs": pairs,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(Vec::new())
}
