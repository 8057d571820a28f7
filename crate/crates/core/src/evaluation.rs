//! Phrase similarity benchmarks scored with Spearman's ρ.
//!
//! Two whitespace-separated schemas are read, with an optional header line
//! and `#` comments:
//!
//! ```text
//! ML2010: participant  word1  word2  word3  word4  relation  rating
//! ML2008: participant  subject  verb  landmark  rating
//! ```
//!
//! In ML2010 rows the first phrase is `word1 word2` and the second
//! `word3 word4`, both in surface order: adjective noun (AN), modifier head
//! (NN) or verb object (VO). Words are `form/POS` or bare forms, which get
//! the relation's default tags.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::apt::LexemeId;
use crate::composition::{ComposedTree, Composer, CompositionError};
use crate::corpus::{DependencyTree, Lexeme};
use crate::exec::Execution;
use crate::path::DependencyLabel;
use crate::similarity::{cosine, vectorize};
use crate::weighting::{keyword_enum, WeightingError};

pub const RATING_MIN: f64 = 1.0;
pub const RATING_MAX: f64 = 7.0;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    SchemaViolation { line: usize, reason: String },
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooShort(usize),
    #[error("a series is constant, so its ranks carry no order")]
    DegenerateInput,
    #[error("every category is degenerate: {0}")]
    DegenerateCategory(String),
    #[error("category {0} has fewer than 2 records")]
    InsufficientData(String),
    #[error(transparent)]
    Composition(#[from] CompositionError),
    #[error(transparent)]
    Weighting(#[from] WeightingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Schema {
    Ml2010,
    Ml2008,
}

keyword_enum!(Schema { "ml2010" => Ml2010, "ml2008" => Ml2008 });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    AdjectiveNoun,
    NounNoun,
    VerbObject,
    /// Intransitive verb with subject, compared against a landmark verb.
    SubjectVerb,
}

impl Relation {
    fn parse(s: &str) -> Option<Relation> {
        match s.to_ascii_lowercase().as_str() {
            "an" | "adjectivenouns" => Some(Relation::AdjectiveNoun),
            "nn" | "compoundnouns" => Some(Relation::NounNoun),
            "vo" | "verbobjects" => Some(Relation::VerbObject),
            "sv" => Some(Relation::SubjectVerb),
            _ => None,
        }
    }

    /// Tags for bare forms, in surface order.
    fn default_pos(self) -> [&'static str; 2] {
        match self {
            Relation::AdjectiveNoun => ["JJ", "NN"],
            Relation::NounNoun => ["NN", "NN"],
            Relation::VerbObject => ["VB", "NN"],
            Relation::SubjectVerb => ["NN", "VB"],
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::AdjectiveNoun => "AN",
            Relation::NounNoun => "NN",
            Relation::VerbObject => "VO",
            Relation::SubjectVerb => "SV",
        })
    }
}

/// One human rating of one phrase pair.
#[derive(Clone, Debug, PartialEq)]
pub struct JudgmentRecord {
    pub line: usize,
    pub participant: String,
    pub item: String,
    pub relation: Relation,
    /// Surface order. For ML2008 rows: `[subject, verb]`.
    pub phrase1: [Lexeme; 2],
    /// Surface order. For ML2008 rows: `[subject, landmark]`.
    pub phrase2: [Lexeme; 2],
    pub rating: f64,
}

fn parse_word(s: &str, default_pos: &str, line: usize) -> Result<Lexeme, EvalError> {
    let violation = |reason: String| EvalError::SchemaViolation { line, reason };
    let lexeme = match s.rsplit_once('/') {
        Some((form, pos)) if !form.is_empty() && !pos.is_empty() => Lexeme::new(form, pos),
        _ => Lexeme::new(s, default_pos),
    };
    lexeme.map_err(|e| violation(e.to_string()))
}

fn parse_rating(s: &str, line: usize) -> Result<f64, EvalError> {
    let rating: f64 = s.parse().map_err(|_| EvalError::SchemaViolation {
        line,
        reason: format!("rating {s:?} is not a number"),
    })?;
    if !(RATING_MIN..=RATING_MAX).contains(&rating) {
        return Err(EvalError::SchemaViolation {
            line,
            reason: format!("rating {rating} outside [{RATING_MIN}, {RATING_MAX}]"),
        });
    }
    Ok(rating)
}

/// Parse a dataset from any reader.
pub fn parse_dataset<R: BufRead>(input: R, schema: Schema) -> Result<Vec<JudgmentRecord>, EvalError> {
    let expected = match schema {
        Schema::Ml2010 => 7,
        Schema::Ml2008 => 5,
    };
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if records.is_empty() && fields.first().is_some_and(|f| f.eq_ignore_ascii_case("participant")) {
            continue;
        }
        if fields.len() != expected {
            return Err(EvalError::SchemaViolation {
                line: line_no,
                reason: format!("expected {expected} fields for {schema}, found {}", fields.len()),
            });
        }
        let record = match schema {
            Schema::Ml2010 => {
                let relation = Relation::parse(fields[5])
                    .filter(|r| *r != Relation::SubjectVerb)
                    .ok_or_else(|| EvalError::SchemaViolation {
                        line: line_no,
                        reason: format!("unknown relation {:?}", fields[5]),
                    })?;
                let [p1, p2] = relation.default_pos();
                let phrase1 = [parse_word(fields[1], p1, line_no)?, parse_word(fields[2], p2, line_no)?];
                let phrase2 = [parse_word(fields[3], p1, line_no)?, parse_word(fields[4], p2, line_no)?];
                JudgmentRecord {
                    line: line_no,
                    participant: fields[0].to_string(),
                    item: format!("{relation}:{} {}|{} {}", phrase1[0], phrase1[1], phrase2[0], phrase2[1]),
                    relation,
                    phrase1,
                    phrase2,
                    rating: parse_rating(fields[6], line_no)?,
                }
            }
            Schema::Ml2008 => {
                let [ps, pv] = Relation::SubjectVerb.default_pos();
                let subject = parse_word(fields[1], ps, line_no)?;
                let verb = parse_word(fields[2], pv, line_no)?;
                let landmark = parse_word(fields[3], pv, line_no)?;
                JudgmentRecord {
                    line: line_no,
                    participant: fields[0].to_string(),
                    item: format!("SV:{subject} {verb}|{landmark}"),
                    relation: Relation::SubjectVerb,
                    phrase1: [subject.clone(), verb],
                    phrase2: [subject, landmark],
                    rating: parse_rating(fields[4], line_no)?,
                }
            }
        };
        records.push(record);
    }
    Ok(records)
}

pub fn load_dataset(path: &Path, schema: Schema) -> Result<Vec<JudgmentRecord>, EvalError> {
    parse_dataset(BufReader::new(File::open(path)?), schema)
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        // Positions i..j share the mean of ranks i+1..=j.
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Spearman's ρ with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(EvalError::TooShort(xs.len()));
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::DegenerateInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvalProtocol {
    /// Pool every (item, annotator) point.
    MlIndividual,
    /// One ρ per annotator, then the mean.
    TurneyAveraged,
    /// Correlate against the per-item mean rating.
    Aggregated,
}

keyword_enum!(EvalProtocol {
    "ml_individual" => MlIndividual,
    "turney_averaged" => TurneyAveraged,
    "aggregated" => Aggregated,
});

/// How the landmark of an ML2008 record is represented.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum LandmarkMode {
    /// Landmark composed with the record's subject.
    #[default]
    Composed,
    /// The landmark's elementary APT.
    Elementary,
}

keyword_enum!(LandmarkMode { "composed" => Composed, "elementary" => Elementary });

/// Dependency labels used to build the phrase trees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationLabels {
    pub amod: String,
    pub nn: String,
    pub dobj: String,
    pub nsubj: String,
}

impl Default for RelationLabels {
    fn default() -> Self {
        RelationLabels {
            amod: "amod".into(),
            nn: "nn".into(),
            dobj: "dobj".into(),
            nsubj: "nsubj".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalConfig {
    pub labels: RelationLabels,
    pub landmark: LandmarkMode,
}

/// The two-node tree of a phrase given in surface order.
pub fn phrase_tree(
    relation: Relation,
    words: &[Lexeme; 2],
    labels: &RelationLabels,
) -> Result<DependencyTree, EvalError> {
    // (head, dependent, label) as node indices in surface order.
    let (head, dep, label) = match relation {
        Relation::AdjectiveNoun => (1, 0, &labels.amod),
        Relation::NounNoun => (1, 0, &labels.nn),
        Relation::VerbObject => (0, 1, &labels.dobj),
        Relation::SubjectVerb => (1, 0, &labels.nsubj),
    };
    let label = DependencyLabel::new(label).map_err(|e| EvalError::SchemaViolation {
        line: 0,
        reason: format!("relation label: {e}"),
    })?;
    DependencyTree::new(words.to_vec(), [(head, dep, label)]).map_err(|e| EvalError::SchemaViolation {
        line: 0,
        reason: e.to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairScore {
    pub score: f64,
    /// The two representations share no dimension.
    pub zero_intersection: bool,
}

fn similarity_of(composer: &Composer, a: &ComposedTree, b: &ComposedTree) -> Result<PairScore, EvalError> {
    let l = composer.lexicon();
    let cfg = composer.weighting();
    let head = |c: &ComposedTree| l.id(c.head_lexeme());
    let u = vectorize(&a.apt, l, cfg, head(a))?;
    let v = vectorize(&b.apt, l, cfg, head(b))?;
    let shared = u.dims().iter().any(|(k, _)| v.get(&k.0, k.1) != 0.0);
    Ok(PairScore {
        score: if shared { cosine(&u, &v) } else { 0.0 },
        zero_intersection: !shared,
    })
}

/// Cosine between the two phrases of a record.
pub fn score_phrase_pair(r: &JudgmentRecord, composer: &Composer, cfg: &EvalConfig) -> Result<PairScore, EvalError> {
    let norm = |p: &[Lexeme; 2]| p.clone().map(|w| composer.lexicon().config().normalize(&w));
    let (phrase1, phrase2) = (norm(&r.phrase1), norm(&r.phrase2));
    let left = composer.compose(&phrase_tree(r.relation, &phrase1, &cfg.labels)?)?;
    let right = match (r.relation, cfg.landmark) {
        (Relation::SubjectVerb, LandmarkMode::Elementary) => {
            let landmark = phrase2[1].clone();
            let tree =
                DependencyTree::new(vec![landmark], std::iter::empty()).map_err(|e| EvalError::SchemaViolation {
                    line: r.line,
                    reason: e.to_string(),
                })?;
            composer.compose(&tree)?
        }
        _ => composer.compose(&phrase_tree(r.relation, &phrase2, &cfg.labels)?)?,
    };
    similarity_of(composer, &left, &right)
}

/// ρ for one relation category.
#[derive(Clone, Debug, PartialEq)]
pub struct CategoryResult {
    pub relation: Relation,
    /// `None` when the category is degenerate.
    pub rho: Option<f64>,
    pub records: usize,
    /// Points the statistic was computed over.
    pub points: usize,
    pub zero_intersections: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub protocol: EvalProtocol,
    pub categories: Vec<CategoryResult>,
}

impl EvalReport {
    /// Mean ρ over categories, a degenerate category counting as 0.
    pub fn average(&self) -> f64 {
        if self.categories.is_empty() {
            return 0.0;
        }
        self.categories.iter().map(|c| c.rho.unwrap_or(0.0)).sum::<f64>() / self.categories.len() as f64
    }

    pub fn category(&self, relation: Relation) -> Option<&CategoryResult> {
        self.categories.iter().find(|c| c.relation == relation)
    }

    pub fn write_tsv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# protocol\t{}", self.protocol)?;
        writeln!(out, "category\trho\trecords\tpoints\tzero_intersections\tstatus")?;
        for c in &self.categories {
            let rho = c.rho.map_or("NaN".to_string(), |r| format!("{r:.6}"));
            let status = c.note.as_deref().unwrap_or("ok");
            writeln!(
                out,
                "{}\t{rho}\t{}\t{}\t{}\t{status}",
                c.relation, c.records, c.points, c.zero_intersections
            )?;
        }
        writeln!(out, "average\t{:.6}\t\t\t\t", self.average())
    }

    pub fn write_table<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "Spearman rho ({})", self.protocol)?;
        writeln!(
            out,
            "{:<8} {:>8} {:>8} {:>8}  note",
            "category", "rho", "points", "zero"
        )?;
        for c in &self.categories {
            let rho = c.rho.map_or("NaN".to_string(), |r| format!("{r:.4}"));
            writeln!(
                out,
                "{:<8} {:>8} {:>8} {:>8}  {}",
                c.relation.to_string(),
                rho,
                c.points,
                c.zero_intersections,
                c.note.as_deref().unwrap_or("")
            )?;
        }
        writeln!(out, "{:<8} {:>8.4}", "average", self.average())
    }
}

fn category_rho(
    records: &[&JudgmentRecord],
    scores: &HashMap<&str, f64>,
    protocol: EvalProtocol,
) -> (Result<f64, EvalError>, usize) {
    match protocol {
        EvalProtocol::MlIndividual => {
            let xs: Vec<f64> = records.iter().map(|r| scores[r.item.as_str()]).collect();
            let ys: Vec<f64> = records.iter().map(|r| r.rating).collect();
            (spearman(&xs, &ys), xs.len())
        }
        EvalProtocol::Aggregated => {
            let mut by_item: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
            for r in records {
                let e = by_item.entry(r.item.as_str()).or_insert((0.0, 0));
                e.0 += r.rating;
                e.1 += 1;
            }
            let xs: Vec<f64> = by_item.keys().map(|item| scores[item]).collect();
            let ys: Vec<f64> = by_item.values().map(|&(s, n)| s / n as f64).collect();
            (spearman(&xs, &ys), xs.len())
        }
        EvalProtocol::TurneyAveraged => {
            let mut by_participant: BTreeMap<&str, Vec<&JudgmentRecord>> = BTreeMap::new();
            for r in records {
                by_participant.entry(r.participant.as_str()).or_default().push(r);
            }
            let mut rhos = Vec::new();
            let mut last_err = EvalError::DegenerateInput;
            for group in by_participant.values() {
                let xs: Vec<f64> = group.iter().map(|r| scores[r.item.as_str()]).collect();
                let ys: Vec<f64> = group.iter().map(|r| r.rating).collect();
                match spearman(&xs, &ys) {
                    Ok(rho) => rhos.push(rho),
                    Err(e) => last_err = e,
                }
            }
            let n = rhos.len();
            if rhos.is_empty() {
                (Err(last_err), 0)
            } else {
                (Ok(rhos.iter().sum::<f64>() / n as f64), n)
            }
        }
    }
}

/// Score every unique item once, in parallel.
pub fn score_records(
    records: &[JudgmentRecord],
    composer: &Composer,
    cfg: &EvalConfig,
    exec: Execution,
) -> Result<HashMap<String, PairScore>, EvalError> {
    let mut unique: Vec<&JudgmentRecord> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for r in records {
        if seen.insert(r.item.as_str()) {
            unique.push(r);
        }
    }
    let scored = exec.map(&unique, |r| score_phrase_pair(r, composer, cfg));
    unique
        .iter()
        .zip(scored)
        .map(|(r, s)| Ok((r.item.clone(), s?)))
        .collect()
}

/// ρ per relation category from precomputed item scores. Degenerate
/// categories are kept in the report with no ρ.
pub fn report_scores(
    records: &[JudgmentRecord],
    scores: &HashMap<String, PairScore>,
    protocol: EvalProtocol,
) -> Result<EvalReport, EvalError> {
    let mut by_relation: BTreeMap<Relation, Vec<&JudgmentRecord>> = BTreeMap::new();
    for r in records {
        by_relation.entry(r.relation).or_default().push(r);
    }
    let plain: HashMap<&str, f64> = scores.iter().map(|(k, v)| (k.as_str(), v.score)).collect();
    let mut categories = Vec::new();
    for (relation, group) in by_relation {
        if group.len() < 2 {
            return Err(EvalError::InsufficientData(relation.to_string()));
        }
        let mut items: Vec<&str> = group.iter().map(|r| r.item.as_str()).collect();
        items.sort_unstable();
        items.dedup();
        let zero_intersections = items.iter().filter(|i| scores[**i].zero_intersection).count();
        let (rho, points) = category_rho(&group, &plain, protocol);
        let (rho, note) = match rho {
            Ok(rho) => (Some(rho), None),
            Err(EvalError::DegenerateInput) if zero_intersections == items.len() => {
                (None, Some("degenerate: every intersection is zero".to_string()))
            }
            Err(EvalError::DegenerateInput) => (None, Some("degenerate: constant scores".to_string())),
            Err(e) => (None, Some(format!("degenerate: {e}"))),
        };
        categories.push(CategoryResult {
            relation,
            rho,
            records: group.len(),
            points,
            zero_intersections,
            note,
        });
    }
    Ok(EvalReport { protocol, categories })
}

impl EvalReport {
    /// Fails when no category produced a ρ.
    pub fn check_degenerate(&self) -> Result<(), EvalError> {
        let categories = &self.categories;
        if !categories.iter().all(|c| c.rho.is_none()) {
            return Ok(());
        }
        let detail = categories
            .iter()
            .map(|c| format!("{} ({})", c.relation, c.note.as_deref().unwrap_or("")))
            .collect::<Vec<_>>()
            .join(", ");
        Err(EvalError::DegenerateCategory(if detail.is_empty() {
            "no records".to_string()
        } else {
            detail
        }))
    }
}

/// Like [`report_scores`], but an entirely degenerate report is an error.
pub fn evaluate_scores(
    records: &[JudgmentRecord],
    scores: &HashMap<String, PairScore>,
    protocol: EvalProtocol,
) -> Result<EvalReport, EvalError> {
    let report = report_scores(records, scores, protocol)?;
    report.check_degenerate()?;
    Ok(report)
}

/// Compose, score and correlate a whole dataset.
pub fn evaluate(
    records: &[JudgmentRecord],
    composer: &Composer,
    cfg: &EvalConfig,
    protocol: EvalProtocol,
    exec: Execution,
) -> Result<EvalReport, EvalError> {
    let scores = score_records(records, composer, cfg, exec)?;
    evaluate_scores(records, &scores, protocol)
}

/// Lexicon ids of a record's words, for coverage checks.
pub fn record_ids(r: &JudgmentRecord, composer: &Composer) -> Vec<Option<LexemeId>> {
    let l = composer.lexicon();
    r.phrase1.iter().chain(&r.phrase2).map(|w| l.id(w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn spearman_cases() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!((spearman(&a, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(spearman(&a, &[1.0; 4]), Err(EvalError::DegenerateInput)));
        assert!(matches!(spearman(&a[..1], &a[..1]), Err(EvalError::TooShort(1))));
        assert!(matches!(spearman(&a, &a[..2]), Err(EvalError::LengthMismatch(4, 2))));
    }

    #[test]
    fn parses_both_schemas() {
        let ml2010 = "participant\tw1\tw2\tw3\tw4\trelation\trating\n\
                      p1 dry/JJ wine/NN wet clothes AN 5\n\
                      p1 use knowledge exercise influence verbobjects 3\n";
        let records = parse_dataset(ml2010.as_bytes(), Schema::Ml2010).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].phrase2[1], Lexeme::new("clothes", "NN").unwrap());
        assert_eq!(records[1].relation, Relation::VerbObject);
        assert_eq!(records[1].phrase1[0].pos, "VB");
        let ml2008 = "p9 man/NN hung/VBD folded/VBD 7\n";
        let records = parse_dataset(ml2008.as_bytes(), Schema::Ml2008).unwrap();
        assert_eq!(records[0].phrase2[0].form, "man");
    }

    #[test]
    fn schema_violations_carry_lines() {
        let bad = "p1 a b c d AN 9\n";
        assert!(matches!(
            parse_dataset(bad.as_bytes(), Schema::Ml2010),
            Err(EvalError::SchemaViolation { line: 1, .. })
        ));
        let short = "# comment\np1 a b 4\n";
        assert!(matches!(
            parse_dataset(short.as_bytes(), Schema::Ml2008),
            Err(EvalError::SchemaViolation { line: 2, .. })
        ));
        let rel = "p1 a b c d XY 4\n";
        assert!(parse_dataset(rel.as_bytes(), Schema::Ml2010).is_err());
    }
}
