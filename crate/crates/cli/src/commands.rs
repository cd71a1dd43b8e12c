use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::json;

use signphon::coarticulation::{scan, DetectorThresholds};
use signphon::corpus::parse_corpus;
use signphon::disambiguator::interpret_utterance;
use signphon::lexicon::validate_entry;
use signphon::reranker::{evaluate as score, read_dataset, synth_generate, write_dataset, Metrics, NoiseModel};
use signphon::transitions::{SmoothingConfig, TransitionTable};
use signphon::{data, Corpus, ExclusionPolicy, Inventory, Lexicon};

use crate::config::{OutputFormat, RunConfig};
use crate::{CliError, Outcome};

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Attach the file name to load errors.
fn in_file<T>(path: &Path, r: signphon::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn inventory(cfg: &RunConfig) -> Result<Inventory, CliError> {
    match &cfg.inventory_path {
        Some(p) => in_file(p, Inventory::load(open(p)?)),
        None => Ok(Inventory::default_asl()),
    }
}

fn lexicon(cfg: &RunConfig, inv: &Inventory) -> Result<Lexicon, CliError> {
    match &cfg.lexicon_path {
        Some(p) => in_file(p, Lexicon::parse(open(p)?, inv)),
        None => Ok(data::default_lexicon(inv)),
    }
}

fn stats(cfg: &RunConfig, inv: &Inventory) -> Result<TransitionTable, CliError> {
    match &cfg.stats_path {
        Some(p) => in_file(p, TransitionTable::load(open(p)?, inv)),
        None => Ok(data::start_end_stats(inv)),
    }
}

fn corpus(cfg: &RunConfig, inv: &Inventory, required: bool) -> Result<Corpus, CliError> {
    if required && cfg.corpus_paths.is_empty() {
        return Err(CliError::Input("no corpus given (use --corpus)".into()));
    }
    let mut all = Corpus::default();
    for p in &cfg.corpus_paths {
        all.extend(in_file(p, parse_corpus(open(p)?, inv))?);
    }
    Ok(all)
}

fn emit_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

pub fn validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let inv = inventory(cfg)?;
    let lex = lexicon(cfg, &inv)?;
    let corpus = corpus(cfg, &inv, false)?;
    let bad: Vec<(String, Vec<String>)> = lex
        .iter()
        .filter_map(|e| {
            let problems = validate_entry(e, &inv).problems();
            (!problems.is_empty()).then(|| (e.gloss.clone(), problems))
        })
        .collect();
    match cfg.output_format {
        OutputFormat::Json => emit_json(
            out,
            &json!({
                "entries": lex.len(),
                "utterances": corpus.utterances.len(),
                "violations": bad.iter().map(|(g, p)| json!({"gloss": g, "problems": p})).collect::<Vec<_>>(),
            }),
        )?,
        OutputFormat::Text => {
            for (gloss, problems) in &bad {
                for p in problems {
                    writeln!(out, "{gloss}: {p}")?;
                }
            }
            writeln!(
                out,
                "{} entries checked, {} ill-formed; {} utterances parsed",
                lex.len(),
                bad.len(),
                corpus.utterances.len()
            )?;
        }
    }
    Ok(if bad.is_empty() { Outcome::Clean } else { Outcome::Findings })
}

pub fn fit(cfg: &RunConfig, path: Option<&Path>, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let inv = inventory(cfg)?;
    let corpus = corpus(cfg, &inv, true)?;
    let fit = TransitionTable::fit(corpus.refs().map(|r| corpus.get(r)), &inv);
    let rows = inv.ids().filter(|&s| fit.table.start_total(s) > 0).count();
    let summary = json!({"rows": rows, "total": fit.table.total(), "skipped": fit.skipped});
    let summary_to = |out: &mut dyn Write| -> Result<(), CliError> {
        match cfg.output_format {
            OutputFormat::Json => emit_json(out, &summary),
            OutputFormat::Text => Ok(writeln!(
                out,
                "{rows} start handshapes, {} tokens counted, {} skipped",
                fit.table.total(),
                fit.skipped
            )?),
        }
    };
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            fit.table.save(&inv, &mut w)?;
            w.flush()?;
            summary_to(out)?;
        }
        None => {
            fit.table.save(&inv, &mut *out)?;
            summary_to(&mut std::io::stderr())?;
        }
    }
    if fit.skipped > 0 {
        eprintln!("signphon: {} tokens lacked start or end handshapes", fit.skipped);
    }
    Ok(if fit.table.is_empty() { Outcome::Findings } else { Outcome::Clean })
}

pub fn report(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let inv = inventory(cfg)?;
    let table = stats(cfg, &inv)?;
    let chart = table.report(&inv, SmoothingConfig::new(cfg.alpha)?);
    match cfg.output_format {
        OutputFormat::Json => emit_json(out, &chart.to_json(&inv))?,
        OutputFormat::Text => write!(out, "{}", chart.render_text(&inv))?,
    }
    Ok(Outcome::Clean)
}

pub fn coartic(cfg: &RunConfig, records: bool, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let inv = inventory(cfg)?;
    let lex = lexicon(cfg, &inv)?;
    let corpus = corpus(cfg, &inv, true)?;
    let th = DetectorThresholds {
        tau_subtle: cfg.tau_subtle,
        tau_major: DetectorThresholds::default().tau_major.max(cfg.tau_subtle),
        ..Default::default()
    };
    let report = scan(&corpus, &lex, &inv, &ExclusionPolicy::default(), &th)?;
    match cfg.output_format {
        OutputFormat::Json => {
            let mut v = serde_json::to_value(&report).map_err(|e| CliError::Io(e.into()))?;
            if records {
                v["records"] = report.records.iter().map(|r| r.to_json(&inv, Some(&corpus))).collect();
            }
            emit_json(out, &v)?;
        }
        OutputFormat::Text => {
            write!(out, "{}", report.render_text())?;
            if records {
                for r in &report.records {
                    let utt = r.token.map(|t| corpus.utterances[t.utterance].id.as_str()).unwrap_or("-");
                    writeln!(out, "{utt}\t{}\t{:?}\t{:?}\t{:?}", r.gloss, r.direction, r.hands, r.severity)?;
                }
            }
        }
    }
    if report.skipped.unknown_gloss > 0 {
        eprintln!("signphon: {} tokens with glosses missing from the lexicon", report.skipped.unknown_gloss);
    }
    Ok(Outcome::Clean)
}

pub fn disambiguate(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let inv = inventory(cfg)?;
    let lex = lexicon(cfg, &inv)?;
    let corpus = corpus(cfg, &inv, true)?;
    for utt in &corpus.utterances {
        let segs = interpret_utterance(utt, &lex, &inv)?;
        for (i, s) in segs.iter().enumerate() {
            match cfg.output_format {
                OutputFormat::Json => writeln!(out, "{}", s.to_json(utt, i))?,
                OutputFormat::Text => {
                    let gloss = |t: Option<usize>| t.map_or("-", |t| utt.token(t).gloss.as_str());
                    let interp = &s.interpretation;
                    let rules: Vec<String> = interp.fired_rules.iter().map(|r| r.to_string()).collect();
                    writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}\t{:.1}\t{}",
                        utt.id,
                        i,
                        gloss(s.segment.dom_token),
                        gloss(s.segment.ndh_token),
                        interp.verdict,
                        interp.confidence,
                        rules.join(",")
                    )?;
                }
            }
        }
    }
    Ok(Outcome::Clean)
}

fn metrics_text(out: &mut dyn Write, lambda: f64, m: &Metrics) -> Result<(), CliError> {
    writeln!(
        out,
        "lambda {lambda:.2}: rank-1 accuracy {:.4}, MRR {:.4} over {} samples",
        m.rank1_accuracy, m.mean_reciprocal_rank, m.samples
    )?;
    Ok(())
}

pub fn rerank_sim(cfg: &RunConfig, n: usize, dataset_out: Option<&Path>, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let inv = inventory(cfg)?;
    let prior = stats(cfg, &inv)?.joint_prior(SmoothingConfig::new(cfg.alpha)?)?;
    let noise = NoiseModel::new(cfg.kappa, cfg.seed)?;
    let set = synth_generate(&prior, &noise, n, &inv)?;
    if let Some(p) = dataset_out {
        let file = File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        let mut w = BufWriter::new(file);
        write_dataset(&set, &inv, &mut w)?;
        w.flush()?;
    }
    let base = score(&set, &prior, 0.0, &inv)?;
    let with = score(&set, &prior, cfg.lambda, &inv)?;
    match cfg.output_format {
        OutputFormat::Json => emit_json(
            out,
            &json!({
                "kappa": cfg.kappa,
                "seed": cfg.seed,
                "samples": n,
                "baseline": base,
                "lambda": cfg.lambda,
                "with_prior": with,
                "gain": with.rank1_accuracy - base.rank1_accuracy,
            }),
        )?,
        OutputFormat::Text => {
            writeln!(out, "kappa {:.2}, seed {}", cfg.kappa, cfg.seed)?;
            metrics_text(out, 0.0, &base)?;
            metrics_text(out, cfg.lambda, &with)?;
            writeln!(out, "gain: {:+.2} pp", (with.rank1_accuracy - base.rank1_accuracy) * 100.0)?;
        }
    }
    Ok(Outcome::Clean)
}

pub fn evaluate(cfg: &RunConfig, dataset: &Path, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let inv = inventory(cfg)?;
    let prior = stats(cfg, &inv)?.joint_prior(SmoothingConfig::new(cfg.alpha)?)?;
    let set = in_file(dataset, read_dataset(open(dataset)?, &inv))?;
    let m = score(&set, &prior, cfg.lambda, &inv)?;
    match cfg.output_format {
        OutputFormat::Json => emit_json(out, &json!({"lambda": cfg.lambda, "metrics": m}))?,
        OutputFormat::Text => metrics_text(out, cfg.lambda, &m)?,
    }
    Ok(Outcome::Clean)
}
