use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use apt_core::composition::write_apt_text;
use apt_core::evaluation::{report_scores, score_records, RelationLabels};
use apt_core::lexicon::TEXT_MAGIC;
use apt_core::{
    build_from_files, configure_threads, load_dataset, open_corpus, parse_conll, read_text_file, vectorize, Composer,
    DependencyTree, EvalConfig, EvalProtocol, Execution, IngestionConfig, Lexicon, MergeKind, MultiRootPolicy,
    NeighborIndex, OovPolicy, Schema, WeightingConfig,
};

use crate::config::{pick, pick_bool, ConfigFile};
use crate::spec::parse_spec;
use crate::{
    BuildArgs, Classify, Cli, Command, ComposeArgs, EvalArgs, Failure, Format, InspectArgs, LexiconArg, ModelArgs,
    NeighborsArgs,
};

type Outcome = Result<(), Failure>;

struct Env {
    file: ConfigFile,
    format: Format,
    exec: Execution,
}

pub fn run(cli: Cli) -> Outcome {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path).or_usage()?,
        None => ConfigFile::default(),
    };
    let format = pick(cli.format, &file, "format", Format::Tsv).or_usage()?;
    if let Some(threads) = cli
        .threads
        .map(Some)
        .unwrap_or(file.get::<usize>("threads").or_usage()?)
    {
        if threads == 0 {
            return Err(anyhow!("--threads must be at least 1")).or_usage();
        }
        configure_threads(threads).map_err(|e| anyhow!(e)).or_invariant()?;
    }
    let env = Env {
        file,
        format,
        exec: Execution::default(),
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Build(args) => build(&env, args, &mut out),
        Command::Neighbors(args) => neighbors(&env, args, &mut out),
        Command::Compose(args) => compose(&env, args, &mut out),
        Command::Eval(args) => eval(&env, args, &mut out),
        Command::Inspect(args) => inspect(&env, args, &mut out),
    }?;
    out.flush().or_data()
}

fn write_summary(out: &mut impl Write, format: Format, rows: &[(&str, String)]) -> io::Result<()> {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (key, value) in rows {
        match format {
            Format::Tsv => writeln!(out, "{key}\t{value}")?,
            Format::Table => writeln!(out, "{key:<width$}  {value}")?,
        }
    }
    Ok(())
}

fn ingestion_config(env: &Env, args: &BuildArgs) -> Result<IngestionConfig, Failure> {
    let f = &env.file;
    let d = IngestionConfig::default();
    let pos_map = match args.pos_map.clone().or_else(|| f.get_list("pos_map")) {
        None => d.pos_map.clone(),
        Some(pairs) => pairs
            .iter()
            .map(|p| {
                p.split_once('=')
                    .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                    .ok_or_else(|| anyhow!("pos map entry {p:?} must be FROM=TO"))
            })
            .collect::<anyhow::Result<BTreeMap<_, _>>>()
            .or_usage()?,
    };
    let excluded_labels = match args.exclude_labels.clone().or_else(|| f.get_list("exclude_labels")) {
        None => d.excluded_labels.clone(),
        Some(labels) => labels.into_iter().filter(|l| !l.is_empty()).collect::<BTreeSet<_>>(),
    };
    Ok(IngestionConfig {
        order_cap: pick(args.order_cap, f, "order_cap", d.order_cap).or_usage()?,
        use_lemma: pick_bool(args.lemma, f, "lemma", d.use_lemma).or_usage()?,
        lowercase: pick_bool(args.lowercase, f, "lowercase", d.lowercase).or_usage()?,
        pos_map,
        excluded_labels,
        multi_root: pick::<MultiRootPolicy>(args.multi_root, f, "multi_root", d.multi_root).or_usage()?,
        strict: pick_bool(args.strict_input, f, "strict_input", d.strict).or_usage()?,
        feature_threshold: pick(args.threshold, f, "threshold", d.feature_threshold).or_usage()?,
    })
}

fn build(env: &Env, args: BuildArgs, out: &mut impl Write) -> Outcome {
    let cfg = ingestion_config(env, &args)?;
    for path in &args.corpus {
        if !path.is_file() {
            return Err(anyhow!("cannot read corpus {}", path.display())).or_data();
        }
    }
    let (full, report) = build_from_files(&args.corpus, &cfg, env.exec).or_data()?;
    full.check_consistency().map_err(|e| anyhow!(e)).or_invariant()?;
    let lexicon = if cfg.feature_threshold > 0 {
        full.filter_features(cfg.feature_threshold)
    } else {
        full.clone()
    };
    if args.text {
        let mut w = BufWriter::new(
            File::create(&args.output)
                .with_context(|| args.output.display().to_string())
                .or_data()?,
        );
        lexicon.write_text(&mut w, true).and_then(|_| w.flush()).or_data()?;
    } else {
        lexicon.save(&args.output).or_data()?;
    }
    log::info!("wrote {}", args.output.display());
    write_summary(
        out,
        env.format,
        &[
            ("files", report.files.to_string()),
            ("trees", full.trees().to_string()),
            ("tokens", full.total_tokens().to_string()),
            ("skipped_sentences", report.skipped_sentences.to_string()),
            ("lexemes", full.len().to_string()),
            ("entries_before_threshold", full.entry_count().to_string()),
            ("entries_after_threshold", lexicon.entry_count().to_string()),
            ("features_before_threshold", full.feature_count().to_string()),
            ("features_after_threshold", lexicon.stored_feature_count().to_string()),
            ("threshold", cfg.feature_threshold.to_string()),
            ("order_cap", cfg.order_cap.to_string()),
        ],
    )
    .or_data()
}

fn load_lexicon(env: &Env, arg: &LexiconArg) -> Result<Lexicon, Failure> {
    let path: PathBuf = match &arg.lexicon {
        Some(p) => p.clone(),
        None => env
            .file
            .raw("lexicon")
            .map(PathBuf::from)
            .ok_or_else(|| anyhow!("no lexicon given (use --lexicon or APT_LEXICON)"))
            .or_usage()?,
    };
    let is_text = {
        let mut head = vec![0u8; TEXT_MAGIC.len()];
        let mut f = File::open(&path)
            .with_context(|| format!("opening {}", path.display()))
            .or_data()?;
        f.read_exact(&mut head).is_ok() && head == TEXT_MAGIC.as_bytes()
    };
    let lexicon = if is_text {
        read_text_file(&path)
    } else {
        Lexicon::load(&path)
    };
    lexicon.with_context(|| format!("loading {}", path.display())).or_data()
}

struct Model {
    lexicon: Lexicon,
    weighting: WeightingConfig,
    merge: MergeKind,
    oov: OovPolicy,
}

impl Model {
    fn composer(&self) -> Composer<'_> {
        Composer::new(&self.lexicon, self.merge, self.weighting).with_oov(self.oov)
    }

    /// Normalise the words of a user-supplied tree like the corpus was.
    fn normalize(&self, tree: &DependencyTree) -> Result<DependencyTree, Failure> {
        let cfg = self.lexicon.config();
        let words = tree.lexemes().iter().map(|w| cfg.normalize(w)).collect();
        DependencyTree::new(words, tree.edges()).or_usage()
    }
}

fn model(env: &Env, args: &ModelArgs) -> Result<Model, Failure> {
    let f = &env.file;
    let d = WeightingConfig::default();
    let weighting = WeightingConfig {
        scheme: pick(args.scheme, f, "scheme", d.scheme).or_usage()?,
        cds_alpha: pick(args.cds_alpha, f, "cds_alpha", d.cds_alpha).or_usage()?,
        shift_k: pick(args.shift, f, "shift", d.shift_k).or_usage()?,
        pipeline: pick(args.pipeline, f, "pipeline", d.pipeline).or_usage()?,
        path_weighting: pick(args.path_weighting, f, "path_weighting", d.path_weighting).or_usage()?,
    };
    weighting.validate().or_usage()?;
    let merge = pick(args.merge, f, "merge", MergeKind::Sum).or_usage()?;
    let oov = match (args.lenient, f.raw("oov")) {
        (true, _) | (false, Some("lenient")) => OovPolicy::Lenient,
        (false, None | Some("strict")) => OovPolicy::Strict,
        (false, Some(other)) => return Err(anyhow!("oov must be strict or lenient, got {other:?}")).or_usage(),
    };
    let lexicon = load_lexicon(env, &args.lexicon)?;
    Ok(Model {
        lexicon,
        weighting,
        merge,
        oov,
    })
}

fn warn_oov(model: &Model, tree: &DependencyTree, oov: &[usize]) {
    for &i in oov {
        log::warn!("{} is not in the lexicon and contributes nothing", tree.lexeme(i));
    }
    if !oov.is_empty() && model.merge.is_intersective() {
        log::warn!(
            "{} merge with an unknown word yields an empty representation",
            model.merge
        );
    }
}

fn neighbors(env: &Env, args: NeighborsArgs, out: &mut impl Write) -> Outcome {
    let top = pick(args.top, &env.file, "top", 10usize).or_usage()?;
    let tree = parse_spec(&args.query).or_usage()?;
    let model = model(env, &args.model)?;
    let tree = model.normalize(&tree)?;
    let node = args.node.unwrap_or(tree.root());
    if node >= tree.len() {
        return Err(anyhow!("--node {node} is outside a phrase of {} words", tree.len())).or_usage();
    }
    let composed = model.composer().compose(&tree).or_data()?;
    warn_oov(&model, &tree, &composed.oov);
    let apt = composed.contextualize(node).or_data()?;
    let l = &model.lexicon;
    let query = vectorize(&apt, l, &model.weighting, l.id(tree.lexeme(node))).or_data()?;
    let index = NeighborIndex::build(l, &model.weighting, env.exec).or_data()?;
    let mut descriptor = args.query.split_whitespace().collect::<Vec<_>>().join(" ");
    if args.node.is_some() {
        descriptor.push_str(&format!(" @{node}"));
    }
    let list = index.neighbors(&query, &descriptor, top, args.pos.as_deref());
    match env.format {
        Format::Tsv => list.write_tsv(out),
        Format::Table => list.write_table(out),
    }
    .or_data()
}

fn read_conll(path: &Path, cfg: &IngestionConfig) -> Result<Vec<DependencyTree>, Failure> {
    let reader = open_corpus(path)
        .with_context(|| format!("opening {}", path.display()))
        .or_data()?;
    parse_conll(reader, cfg)
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| path.display().to_string())
        .or_data()
}

fn compose(env: &Env, args: ComposeArgs, out: &mut impl Write) -> Outcome {
    let spec_tree = args.spec.as_deref().map(parse_spec).transpose().or_usage()?;
    let model = model(env, &args.model)?;
    let trees = match (spec_tree, &args.conll) {
        (Some(tree), _) => vec![model.normalize(&tree)?],
        (None, Some(path)) => read_conll(path, model.lexicon.config())?,
        (None, None) => return Err(anyhow!("give a phrase spec or --conll")).or_usage(),
    };
    let composer = model.composer();
    for (n, tree) in trees.iter().enumerate() {
        if n > 0 {
            writeln!(out).or_data()?;
        }
        let composed = composer.compose(tree).or_data()?;
        warn_oov(&model, tree, &composed.oov);
        match args.node {
            None => composed.write_text(out, &model.lexicon).or_data()?,
            Some(i) if i < tree.len() => {
                let apt = composed.contextualize(i).or_data()?;
                writeln!(
                    out,
                    "# contextualized node={i} lexeme={} merge={} weights={}",
                    tree.lexeme(i),
                    model.merge,
                    apt.kind()
                )
                .or_data()?;
                write_apt_text(out, &apt, &model.lexicon).or_data()?;
            }
            Some(i) => return Err(anyhow!("--node {i} is outside a tree of {} words", tree.len())).or_usage(),
        }
    }
    Ok(())
}

fn eval(env: &Env, args: EvalArgs, out: &mut impl Write) -> Outcome {
    let f = &env.file;
    let schema = pick(args.schema, f, "schema", Schema::Ml2010).or_usage()?;
    let protocols = match args.protocol.clone() {
        Some(p) => p,
        None => match f.get_list("protocol") {
            Some(names) => names
                .iter()
                .map(|n| n.parse::<EvalProtocol>().map_err(|e| anyhow!(e)))
                .collect::<anyhow::Result<Vec<_>>>()
                .or_usage()?,
            None => vec![EvalProtocol::MlIndividual],
        },
    };
    let cfg = EvalConfig {
        labels: RelationLabels::default(),
        landmark: pick(args.landmark, f, "landmark", Default::default()).or_usage()?,
    };
    let model = model(env, &args.model)?;
    let records = load_dataset(&args.dataset, schema).or_data()?;
    let composer = model.composer();
    let scores = score_records(&records, &composer, &cfg, env.exec).or_data()?;
    let mut degenerate = None;
    for (i, &protocol) in protocols.iter().enumerate() {
        if i > 0 {
            writeln!(out).or_data()?;
        }
        let report = report_scores(&records, &scores, protocol).or_data()?;
        match env.format {
            Format::Tsv => report.write_tsv(out),
            Format::Table => report.write_table(out),
        }
        .or_data()?;
        if let Err(e) = report.check_degenerate() {
            degenerate.get_or_insert(e);
        }
    }
    match degenerate {
        Some(e) => {
            out.flush().or_data()?;
            Err(e).or_data()
        }
        None => Ok(()),
    }
}

fn inspect(env: &Env, args: InspectArgs, out: &mut impl Write) -> Outcome {
    let l = load_lexicon(env, &args.lexicon)?;
    if args.check {
        l.check_consistency().map_err(|e| anyhow!(e)).or_invariant()?;
    }
    if args.dump {
        return l.write_text(out, args.marginals).or_data();
    }
    if args.lexemes.is_empty() {
        let cfg = l.config();
        let rows = [
            ("lexemes", l.len().to_string()),
            ("trees", l.trees().to_string()),
            ("tokens", l.total_tokens().to_string()),
            ("entries", l.entry_count().to_string()),
            ("features", l.feature_count().to_string()),
            ("stored_features", l.stored_feature_count().to_string()),
            ("types", l.type_totals().len().to_string()),
            ("order_cap", cfg.order_cap.to_string()),
            ("filtered_at", l.filtered_at().map_or("none".into(), |t| t.to_string())),
            ("use_lemma", cfg.use_lemma.to_string()),
            ("lowercase", cfg.lowercase.to_string()),
            ("consistent", if args.check { "yes".into() } else { "unchecked".into() }),
        ];
        return write_summary(out, env.format, &rows).or_data();
    }
    for (n, word) in args.lexemes.iter().enumerate() {
        let lexeme = word.parse().with_context(|| format!("lexeme {word:?}")).or_usage()?;
        let lexeme = l.config().normalize(&lexeme);
        let Some(id) = l.id(&lexeme) else {
            return Err(anyhow!("{lexeme} is not in the lexicon")).or_data();
        };
        let apt = match args.order {
            Some(k) => l.apt(id).restrict_order(k),
            None => l.apt(id).clone(),
        };
        if n > 0 {
            writeln!(out).or_data()?;
        }
        writeln!(
            out,
            "# lexeme {lexeme} tokens={} total={}",
            l.token_count(id),
            l.grand_total(id)
        )
        .or_data()?;
        write_apt_text(out, &apt, &l).or_data()?;
    }
    Ok(())
}
