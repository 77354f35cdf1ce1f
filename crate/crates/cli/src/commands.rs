use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use termkit::consistency::{apply_both, apply_corpus_consistency, apply_dc, ConsistencyConfig};
use termkit::corpus::{
    load_documents, load_iob, load_predictions, load_spans, load_term_list,
    write_predictions_jsonl, Corpus, DocumentFormat, GoldAnnotation, MatchConfig, OverlapPolicy,
    PredictionSet, TermOccurrence,
};
use termkit::distill::{
    build_dataset as build, load_ner, render_fewshot_prompt, select_fewshot_examples,
    write_conversations_jsonl, EndpointConfig, FewshotExample, LabelTable,
};
use termkit::metrics::{
    corpus_level_scores, document_level_scores, term_statistics, DocMode, KappaInput, PrfReport,
};
use termkit::overlap::{
    directional_overlap, load_embeddings, matrix_tsv, symmetrized_overlap, unique_term_overlap,
};

use crate::manifest::{self, RunManifest, SCHEMA_VERSION};
use crate::{
    BuildDatasetArgs, ConsistencyArgs, EvalArgs, FewshotArgs, GlobalOpts, GranularityArg,
    KappaArgs, MatchOpts, ModeArg, OverlapArgs, OverlapPolicyArg, PromptFormat, ReportFormat,
    StatsArgs, UnitArg, VerifyArgs,
};

/// Report body with the common header fields.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    #[serde(flatten)]
    body: T,
}

fn report_json<T: Serialize>(kind: &str, body: T) -> Result<String> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        kind,
        body,
    };
    Ok(serde_json::to_string_pretty(&env)? + "\n")
}

/// Collects the outputs of one run; nothing touches the disk until `finish`.
struct Run<'a> {
    subcommand: &'static str,
    config: Value,
    global: &'a GlobalOpts,
    inputs: Vec<PathBuf>,
    files: Vec<(PathBuf, String)>,
    stdout: Option<String>,
    stderr: Vec<String>,
}

impl<'a> Run<'a> {
    fn new<A: Serialize>(
        subcommand: &'static str,
        args: &A,
        global: &'a GlobalOpts,
    ) -> Result<Self> {
        let mut config = serde_json::to_value(args)?;
        if let Value::Object(map) = &mut config {
            map.insert("threads".into(), json!(rayon::current_num_threads()));
            map.insert("seed".into(), json!(global.seed));
            map.insert("quiet".into(), json!(global.quiet));
        }
        Ok(Run {
            subcommand,
            config,
            global,
            inputs: Vec::new(),
            files: Vec::new(),
            stdout: None,
            stderr: Vec::new(),
        })
    }

    fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    fn set_config(&mut self, key: &str, value: Value) {
        if let Value::Object(map) = &mut self.config {
            map.insert(key.into(), value);
        }
    }

    /// The main product: `--out` when given, otherwise stdout.
    fn primary(&mut self, out: Option<&Path>, content: String) {
        match out {
            Some(path) => self.files.push((path.to_path_buf(), content)),
            None => self.stdout = Some(content),
        }
    }

    /// A secondary report: its own path, else next to `out`, else stderr.
    fn side_report(&mut self, path: Option<&Path>, out: Option<&Path>, content: String) {
        let target = path.map(Path::to_path_buf).or_else(|| {
            out.map(|o| {
                let mut name = o.as_os_str().to_owned();
                name.push(".report.json");
                PathBuf::from(name)
            })
        });
        match target {
            Some(p) => self.files.push((p, content)),
            None => self.stderr.push(content),
        }
    }

    fn file(&mut self, path: &Path, content: String) {
        self.files.push((path.to_path_buf(), content));
    }

    fn finish(self) -> Result<u8> {
        let inputs: Vec<PathBuf> = self
            .inputs
            .iter()
            .filter_map(|p| fs::canonicalize(p).ok())
            .collect();
        let mut seen = BTreeSet::new();
        for (path, _) in &self.files {
            if let Ok(canon) = fs::canonicalize(path) {
                if inputs.contains(&canon) {
                    bail!("output {} would overwrite an input", path.display());
                }
            }
            if !seen.insert(path.clone()) {
                bail!("output {} is named twice", path.display());
            }
        }

        for (path, content) in &self.files {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .with_context(|| format!("cannot create {}", parent.display()))?;
            }
            fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?;
        }
        let outputs: Vec<PathBuf> = self.files.iter().map(|(p, _)| p.clone()).collect();
        let manifest = RunManifest::new(self.subcommand, self.config, &self.inputs, &outputs)?;
        let manifest_text = serde_json::to_string_pretty(&manifest)? + "\n";

        if let Some(first) = outputs.first() {
            let path = RunManifest::path_for(first);
            fs::write(&path, &manifest_text)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        if let Some(text) = &self.stdout {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
        if !self.global.quiet {
            let mut stderr = std::io::stderr().lock();
            for text in &self.stderr {
                stderr.write_all(text.as_bytes())?;
            }
            if outputs.is_empty() {
                stderr.write_all(manifest_text.as_bytes())?;
            }
        }
        Ok(0)
    }
}

fn match_config(opts: &MatchOpts, policy: OverlapPolicy) -> MatchConfig {
    MatchConfig {
        case_fold: !opts.case_sensitive,
        require_word_boundary: !opts.no_word_boundary,
        overlap_policy: policy,
    }
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    let format = if path.is_dir() {
        DocumentFormat::PlainDir
    } else {
        DocumentFormat::Jsonl
    };
    Ok(load_documents(path, format)?)
}

fn iob_predictions(path: &Path, cfg: &MatchConfig) -> Result<(PredictionSet, Corpus)> {
    let decoded = load_iob(path)?;
    let mut preds = PredictionSet::new();
    for doc in &decoded.documents {
        let surfaces: Vec<&str> = doc.occurrences.iter().map(|o| o.surface.as_str()).collect();
        preds.add_terms(&doc.id, surfaces, cfg);
        preds.add_occurrences(&doc.id, doc.occurrences.clone());
    }
    log_diagnostics(path, &decoded.diagnostics);
    let corpus = Corpus::new(
        stem(path),
        decoded.documents.iter().map(|d| d.to_document()).collect(),
    )?;
    Ok((preds, corpus))
}

fn iob_spans(path: &Path) -> Result<(BTreeMap<String, Vec<TermOccurrence>>, Corpus)> {
    let decoded = load_iob(path)?;
    log_diagnostics(path, &decoded.diagnostics);
    let spans = decoded
        .documents
        .iter()
        .map(|d| (d.id.clone(), d.occurrences.clone()))
        .collect();
    let corpus = Corpus::new(
        stem(path),
        decoded.documents.iter().map(|d| d.to_document()).collect(),
    )?;
    Ok((spans, corpus))
}

fn log_diagnostics(path: &Path, diagnostics: &[termkit::corpus::IobDiagnostic]) {
    for d in diagnostics {
        log::warn!("{}: row {}: {}", path.display(), d.row, d.message);
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn prf_tsv(report: &PrfReport) -> String {
    let mut out = format!("# schema_version: {SCHEMA_VERSION}\n");
    out.push_str("scope\tprecision\trecall\tf1\tmatched\tpredicted\tgold\n");
    for d in report.per_doc.iter().flatten() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            d.doc_id,
            d.precision,
            d.recall,
            d.f1,
            d.counts.matched,
            d.counts.predicted,
            d.counts.gold
        ));
    }
    let (m, p, g) = match report.counts {
        Some(c) => (
            c.matched.to_string(),
            c.predicted.to_string(),
            c.gold.to_string(),
        ),
        None => Default::default(),
    };
    out.push_str(&format!(
        "ALL\t{}\t{}\t{}\t{m}\t{p}\t{g}\n",
        report.precision, report.recall, report.f1
    ));
    out
}

pub fn eval(args: &EvalArgs, g: &GlobalOpts) -> Result<u8> {
    let mut run = Run::new("eval", args, g)?;
    let cfg = match_config(&args.matching, OverlapPolicy::default());

    let mut corpus = None;
    let spans = match (&args.gold, &args.gold_iob) {
        (Some(path), _) => {
            run.input(path);
            load_spans(path)?
        }
        (None, Some(path)) => {
            run.input(path);
            let (spans, c) = iob_spans(path)?;
            corpus = Some(c);
            spans
        }
        (None, None) if args.gold_terms.is_some() => BTreeMap::new(),
        (None, None) => bail!("no gold given; pass --gold, --gold-iob or --gold-terms"),
    };
    let gold = match &args.gold_terms {
        Some(path) => {
            run.input(path);
            GoldAnnotation::with_term_list(load_term_list(path)?, spans, &cfg)?
        }
        None => GoldAnnotation::from_spans(spans, &cfg),
    };

    let preds = match (&args.pred, &args.pred_iob) {
        (Some(path), _) => {
            run.input(path);
            load_predictions(path, &cfg)?
        }
        (None, Some(path)) => {
            run.input(path);
            let (preds, c) = iob_predictions(path, &cfg)?;
            corpus.get_or_insert(c);
            preds
        }
        (None, None) => bail!("no predictions given; pass --pred or --pred-iob"),
    };

    if let Some(path) = &args.docs {
        run.input(path);
        corpus = Some(load_corpus(path)?);
    }
    let doc_ids: Option<Vec<String>> = match &corpus {
        Some(c) => {
            gold.validate_against(c)?;
            preds.validate_against(c)?;
            args.docs
                .as_ref()
                .map(|_| c.ids().map(str::to_string).collect())
        }
        None => None,
    };

    let report = match args.granularity {
        GranularityArg::Corpus => corpus_level_scores(&gold, &preds, &cfg),
        GranularityArg::Doc => {
            let mode = match args.mode {
                ModeArg::Type => DocMode::Type,
                ModeArg::Occurrence => DocMode::Occurrence,
            };
            document_level_scores(&gold.per_doc, &preds, mode, &cfg, doc_ids.as_deref())?
        }
    };
    for flag in &report.flags {
        log::warn!("{flag}");
    }
    let content = match args.report {
        ReportFormat::Json => report_json("eval", &report)?,
        ReportFormat::Tsv => prf_tsv(&report),
    };
    run.primary(args.out.as_deref(), content);
    run.finish()
}

pub fn consistency(args: &ConsistencyArgs, g: &GlobalOpts) -> Result<u8> {
    if !args.dc && !args.cc {
        bail!("nothing to do; pass --dc and/or --cc");
    }
    let mut run = Run::new("consistency", args, g)?;
    let policy = match args.overlap {
        OverlapPolicyArg::Greedy => OverlapPolicy::GreedyLongestFirst,
        OverlapPolicyArg::Allow => OverlapPolicy::AllowOverlaps,
    };
    let cfg = ConsistencyConfig::new(args.threshold, match_config(&args.matching, policy))?;
    run.input(&args.docs);
    run.input(&args.pred);
    let corpus = load_corpus(&args.docs)?;
    let preds = load_predictions(&args.pred, &cfg.matching)?;

    let (out, report) = match (args.dc, args.cc) {
        (true, true) => apply_both(&corpus, &preds, &cfg)?,
        (true, false) => apply_dc(&corpus, &preds, &cfg)?,
        _ => apply_corpus_consistency(&corpus, &preds, &cfg)?,
    };

    let mut buf = Vec::new();
    let order: Vec<&str> = corpus.ids().collect();
    write_predictions_jsonl(&out, &order, &mut buf)?;
    run.primary(args.out.as_deref(), String::from_utf8(buf)?);
    run.side_report(
        args.report.as_deref(),
        args.out.as_deref(),
        report_json("consistency", &report)?,
    );
    run.finish()
}

fn parse_named_path(spec: &str) -> Result<(String, PathBuf)> {
    let (name, path) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("--terms expects NAME=PATH, got `{spec}`"))?;
    if name.is_empty() || path.is_empty() {
        bail!("--terms expects NAME=PATH, got `{spec}`");
    }
    Ok((name.to_string(), PathBuf::from(path)))
}

pub fn overlap(args: &OverlapArgs, g: &GlobalOpts) -> Result<u8> {
    let mut run = Run::new("overlap", args, g)?;
    let cfg = MatchConfig::default();
    let mut body = serde_json::Map::new();
    let mut tsv = format!("# schema_version: {SCHEMA_VERSION}\n");

    if let Some(path) = &args.embeddings {
        run.input(path);
        let points = load_embeddings(path)?;
        let m = directional_overlap(&points, args.k)?;
        tsv.push_str(&format!("# directional overlap, k = {}\n", m.k));
        tsv.push_str(&matrix_tsv(&m.datasets, &m.values, true));
        if args.symmetrize {
            let sym = symmetrized_overlap(&m)?;
            tsv.push_str("# symmetrized\n");
            tsv.push_str(&matrix_tsv(&m.datasets, &sym, true));
            body.insert("symmetrized".into(), json!(sym));
        }
        body.insert("directional".into(), serde_json::to_value(&m)?);
    }

    if !args.terms.is_empty() {
        let mut sets = Vec::new();
        for spec in &args.terms {
            let (name, path) = parse_named_path(spec)?;
            run.input(&path);
            let set: BTreeSet<String> = load_term_list(&path)?
                .iter()
                .map(|t| cfg.normalize(t))
                .filter(|t| !t.is_empty())
                .collect();
            sets.push((name, set));
        }
        let counts = unique_term_overlap(&sets);
        let values: Vec<Vec<f64>> = counts
            .counts
            .iter()
            .map(|row| row.iter().map(|&c| c as f64).collect())
            .collect();
        tsv.push_str("# unique terms (diagonal) and shared terms\n");
        tsv.push_str(&matrix_tsv(&counts.datasets, &values, false));
        body.insert("terms".into(), serde_json::to_value(&counts)?);
    }

    let content = match args.format {
        ReportFormat::Json => report_json("overlap", Value::Object(body))?,
        ReportFormat::Tsv => tsv,
    };
    run.primary(args.out.as_deref(), content);
    run.finish()
}

pub fn stats(args: &StatsArgs, g: &GlobalOpts) -> Result<u8> {
    let mut run = Run::new("stats", args, g)?;
    let cfg = match_config(&args.matching, OverlapPolicy::default());

    let mut corpus_ids: Vec<String> = Vec::new();
    let surfaces: BTreeMap<String, Vec<String>> = if let Some(path) = &args.gold {
        run.input(path);
        occurrence_surfaces(&load_spans(path)?)
    } else if let Some(path) = &args.iob {
        run.input(path);
        let (spans, corpus) = iob_spans(path)?;
        corpus_ids = corpus.ids().map(str::to_string).collect();
        occurrence_surfaces(&spans)
    } else if let Some(path) = &args.pred {
        run.input(path);
        let preds = load_predictions(path, &cfg)?;
        match args.unit {
            UnitArg::Types => preds.per_doc_terms.clone(),
            UnitArg::Occurrences => match &preds.per_doc_occurrences {
                Some(occ) => occurrence_surfaces(occ),
                None => return Err(termkit::Error::MissingSpans.into()),
            },
        }
    } else {
        bail!("no annotations given; pass --gold, --pred or --iob");
    };

    if let Some(path) = &args.docs {
        run.input(path);
        corpus_ids = load_corpus(path)?.ids().map(str::to_string).collect();
    }

    let per_doc: BTreeMap<String, Vec<String>> = match args.unit {
        UnitArg::Occurrences => surfaces,
        UnitArg::Types => surfaces
            .into_iter()
            .map(|(id, terms)| {
                let distinct: BTreeSet<String> = terms
                    .iter()
                    .map(|t| cfg.normalize(t))
                    .filter(|t| !t.is_empty())
                    .collect();
                (id, distinct.into_iter().collect())
            })
            .collect(),
    };
    let stats = term_statistics(&per_doc, &corpus_ids)?;
    run.primary(args.out.as_deref(), report_json("stats", &stats)?);
    run.finish()
}

fn occurrence_surfaces(
    spans: &BTreeMap<String, Vec<TermOccurrence>>,
) -> BTreeMap<String, Vec<String>> {
    spans
        .iter()
        .map(|(id, occ)| (id.clone(), occ.iter().map(|o| o.surface.clone()).collect()))
        .collect()
}

fn read_labels(path: &Path) -> Result<Vec<String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

pub fn kappa(args: &KappaArgs, g: &GlobalOpts) -> Result<u8> {
    let mut run = Run::new("kappa", args, g)?;
    let (a, b) = match (&args.a, &args.b, &args.pairs) {
        (Some(a), Some(b), _) => {
            run.input(a);
            run.input(b);
            (read_labels(a)?, read_labels(b)?)
        }
        (_, _, Some(pairs)) => {
            run.input(pairs);
            let mut a = Vec::new();
            let mut b = Vec::new();
            for (i, line) in read_labels(pairs)?.iter().enumerate() {
                if line.starts_with('#') {
                    continue;
                }
                let mut cols = line.split('\t').map(str::trim);
                match (cols.next(), cols.next()) {
                    (Some(x), Some(y)) if !x.is_empty() && !y.is_empty() => {
                        a.push(x.to_string());
                        b.push(y.to_string());
                    }
                    _ => bail!(
                        "{}: line {}: expected two tab-separated labels",
                        pairs.display(),
                        i + 1
                    ),
                }
            }
            (a, b)
        }
        _ => bail!("pass --a and --b, or --pairs"),
    };
    let result = KappaInput::new(a, b)?.kappa();
    #[derive(Serialize)]
    struct Body {
        #[serde(flatten)]
        result: termkit::metrics::KappaResult,
        interpretation: &'static str,
    }
    let body = Body {
        interpretation: result.interpretation(),
        result,
    };
    run.primary(args.out.as_deref(), report_json("kappa", &body)?);
    run.finish()
}

pub fn build_dataset(args: &BuildDatasetArgs, g: &GlobalOpts) -> Result<u8> {
    let mut run = Run::new("build-dataset", args, g)?;
    let endpoint = EndpointConfig::resolve(
        args.endpoint.as_deref(),
        args.endpoint_config.as_deref(),
        g.seed,
    )?;
    run.set_config("endpoint", serde_json::to_value(&endpoint)?);
    let client = endpoint.connect()?;

    let ner = match &args.ner {
        Some(path) => {
            run.input(path);
            load_ner(path)?
        }
        None => Vec::new(),
    };
    let mut table = match &args.labels {
        Some(path) => {
            run.input(path);
            Some(LabelTable::load(path)?)
        }
        None => None,
    };
    let abstracts = match &args.abstracts {
        Some(path) => {
            run.input(path);
            load_documents(path, DocumentFormat::Jsonl)?
                .documents()
                .to_vec()
        }
        None => Vec::new(),
    };

    let dataset = build(
        &ner,
        table.as_mut(),
        &abstracts,
        client.as_ref(),
        args.max_inflight,
    )?;
    if let Some(cov) = &dataset.report.coverage {
        if !cov.classification_failures.is_empty() {
            log::warn!(
                "{} entity type(s) could not be classified: {}",
                cov.classification_failures.len(),
                cov.classification_failures.join(", ")
            );
        }
    }
    run.primary(
        args.out.as_deref(),
        write_conversations_jsonl(&dataset.conversations),
    );
    run.side_report(
        args.report.as_deref(),
        args.out.as_deref(),
        report_json("build-dataset", &dataset.report)?,
    );
    if let (Some(path), Some(table)) = (&args.labels_out, &table) {
        run.file(path, table.to_tsv());
    }
    run.finish()
}

#[derive(Deserialize)]
struct ExampleRecord {
    #[serde(flatten)]
    example: FewshotExample,
    #[serde(default)]
    vector: Vec<f64>,
}

pub fn fewshot(args: &FewshotArgs, g: &GlobalOpts) -> Result<u8> {
    let mut run = Run::new("fewshot", args, g)?;
    run.input(&args.examples);
    let text = fs::read_to_string(&args.examples)
        .with_context(|| format!("cannot read {}", args.examples.display()))?;
    let mut candidates = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ExampleRecord = serde_json::from_str(line)
            .with_context(|| format!("{}: line {}", args.examples.display(), i + 1))?;
        candidates.push((rec.example, rec.vector));
    }

    let target = match (&args.target, &args.target_file) {
        (Some(t), _) => t.clone(),
        (None, Some(path)) => {
            run.input(path);
            fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?
                .trim()
                .to_string()
        }
        (None, None) => bail!("pass --target or --target-file"),
    };

    let selected: Vec<&FewshotExample> = match &args.target_vector {
        Some(raw) => {
            let vector: Vec<f64> = serde_json::from_str(raw)
                .context("--target-vector must be a JSON array of numbers")?;
            select_fewshot_examples(&vector, &candidates, args.n)?
        }
        None => {
            if args.n > candidates.len() {
                bail!(
                    "requested {} examples from {} candidates",
                    args.n,
                    candidates.len()
                );
            }
            candidates.iter().take(args.n).map(|(e, _)| e).collect()
        }
    };
    let transcript = render_fewshot_prompt(&selected, &target, args.ce, args.arg)?;
    let content = match args.format {
        PromptFormat::Json => report_json(
            "fewshot",
            json!({
                "examples": selected.iter().map(|e| e.id.as_str()).collect::<Vec<_>>(),
                "turns": transcript.turns,
            }),
        )?,
        PromptFormat::Text => transcript.to_text(),
    };
    run.primary(args.out.as_deref(), content);
    run.finish()
}

pub fn verify(args: &VerifyArgs, g: &GlobalOpts) -> Result<u8> {
    let text = fs::read_to_string(&args.manifest)
        .with_context(|| format!("cannot read {}", args.manifest.display()))?;
    let m: RunManifest = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a run manifest", args.manifest.display()))?;
    let mismatches = manifest::verify(&m);
    let ok = mismatches.is_empty();
    let report = report_json(
        "verify",
        json!({ "ok": ok, "checked": m.inputs.len() + m.outputs.len(), "mismatches": mismatches }),
    )?;
    print!("{report}");
    if !ok && !g.quiet {
        for mm in &mismatches {
            eprintln!("digest mismatch: {}", mm.path.display());
        }
    }
    Ok(if ok { 0 } else { 1 })
}
