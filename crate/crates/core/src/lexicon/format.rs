//! Lexicon persistence.
//!
//! Binary container, all integers little-endian or LEB128:
//!
//! ```text
//! magic    8 bytes  "APTLEX\0\x01"
//! version  u32
//! length   u64      payload byte count
//! crc32    u32      checksum of the payload
//! payload:
//!   config, tree count
//!   label table, path table (sorted; a path is label ids with a direction bit)
//!   vocabulary (sorted form/POS pairs)
//!   per lexeme: token count, #(w,*,*), #(w,*,τ) rows, then the APT as
//!     nodes of (path id delta, member count, (coterm id delta, count)*)
//!   #(*,w′,τ) rows and #(*,*,τ) rows, delta-encoded the same way
//! ```
//!
//! The text debug format has one `lexeme TAB path TAB coterm TAB count` row
//! per entry, with the empty path written `:`. Marginal rows use `*` in the
//! summed-out columns, mirroring the `#(w,*,τ)` notation, and `#` lines carry
//! the configuration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{IngestionConfig, Lexicon, MultiRootPolicy};
use crate::apt::{Apt, AptNode, LexemeId, WeightKind};
use crate::corpus::Lexeme;
use crate::path::{CooccurrenceType, DependencyLabel, Direction, PathElement};

const MAGIC: &[u8; 8] = b"APTLEX\0\x01";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 4;

/// First line of the text format.
pub const TEXT_MAGIC: &str = "# apt-lexicon text 1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a lexicon file")]
    NotALexicon,
    #[error("format version {found} is not supported (expected {expected})")]
    FormatVersionMismatch { found: u32, expected: u32 },
    #[error("checksum failure: {0}")]
    ChecksumFailure(String),
    #[error("corrupt lexicon: {0}")]
    Corrupt(String),
    #[error("line {line}: {reason}")]
    Text { line: usize, reason: String },
}

fn corrupt(reason: impl Into<String>) -> FormatError {
    FormatError::Corrupt(reason.into())
}

struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    fn uint(&mut self, v: u64) {
        leb128::write::unsigned(&mut self.buf, v).expect("writing to a Vec");
    }

    fn flag(&mut self, b: bool) {
        self.buf.push(b as u8);
    }

    fn str(&mut self, s: &str) {
        self.uint(s.len() as u64);
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn count(&mut self, v: f64) {
        debug_assert!(v >= 0.0 && v.fract() == 0.0, "counts are non-negative integers");
        self.uint(v as u64);
    }
}

struct Decoder<'a> {
    rest: &'a [u8],
}

impl<'a> Decoder<'a> {
    fn uint(&mut self) -> Result<u64, FormatError> {
        leb128::read::unsigned(&mut self.rest).map_err(|e| corrupt(e.to_string()))
    }

    fn len(&mut self) -> Result<usize, FormatError> {
        let n = self.uint()?;
        if n > self.rest.len() as u64 * 8 + 64 {
            return Err(corrupt("length field exceeds payload"));
        }
        Ok(n as usize)
    }

    fn flag(&mut self) -> Result<bool, FormatError> {
        let (&b, rest) = self.rest.split_first().ok_or_else(|| corrupt("unexpected end"))?;
        self.rest = rest;
        Ok(b != 0)
    }

    fn str(&mut self) -> Result<String, FormatError> {
        let n = self.len()?;
        if n > self.rest.len() {
            return Err(corrupt("string runs past payload"));
        }
        let (bytes, rest) = self.rest.split_at(n);
        self.rest = rest;
        String::from_utf8(bytes.to_vec()).map_err(|e| corrupt(e.to_string()))
    }

    fn count(&mut self) -> Result<f64, FormatError> {
        Ok(self.uint()? as f64)
    }
}

fn encode_config(enc: &mut Encoder, cfg: &IngestionConfig, filtered_at: Option<u64>) {
    enc.uint(cfg.order_cap as u64);
    enc.flag(cfg.use_lemma);
    enc.flag(cfg.lowercase);
    enc.flag(cfg.multi_root == MultiRootPolicy::Split);
    enc.flag(cfg.strict);
    enc.uint(cfg.feature_threshold);
    enc.flag(filtered_at.is_some());
    enc.uint(filtered_at.unwrap_or(0));
    enc.uint(cfg.pos_map.len() as u64);
    for (from, to) in &cfg.pos_map {
        enc.str(from);
        enc.str(to);
    }
    enc.uint(cfg.excluded_labels.len() as u64);
    for label in &cfg.excluded_labels {
        enc.str(label);
    }
}

fn decode_config(dec: &mut Decoder) -> Result<(IngestionConfig, Option<u64>), FormatError> {
    let order_cap = dec.uint()? as usize;
    let use_lemma = dec.flag()?;
    let lowercase = dec.flag()?;
    let multi_root = if dec.flag()? {
        MultiRootPolicy::Split
    } else {
        MultiRootPolicy::Reject
    };
    let strict = dec.flag()?;
    let feature_threshold = dec.uint()?;
    let filtered = dec.flag()?;
    let filtered_value = dec.uint()?;
    let mut pos_map = BTreeMap::new();
    for _ in 0..dec.len()? {
        let from = dec.str()?;
        pos_map.insert(from, dec.str()?);
    }
    let mut excluded_labels = BTreeSet::new();
    for _ in 0..dec.len()? {
        excluded_labels.insert(dec.str()?);
    }
    Ok((
        IngestionConfig {
            order_cap,
            use_lemma,
            lowercase,
            pos_map,
            excluded_labels,
            multi_root,
            strict,
            feature_threshold,
        },
        filtered.then_some(filtered_value),
    ))
}

impl Lexicon {
    /// All types mentioned anywhere, sorted; their positions are path ids.
    fn path_table(&self) -> Vec<CooccurrenceType> {
        let mut set: BTreeSet<&CooccurrenceType> = self.type_totals.keys().collect();
        for apt in &self.apts {
            set.extend(apt.nodes().iter().map(|n| &n.ty));
        }
        set.into_iter().cloned().collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder { buf: Vec::new() };
        encode_config(&mut enc, &self.config, self.filtered_at);
        enc.uint(self.trees);

        let paths = self.path_table();
        let labels: BTreeSet<DependencyLabel> = paths
            .iter()
            .flat_map(|p| p.elements().iter().map(|e| e.label))
            .collect();
        let label_ids: HashMap<DependencyLabel, u64> = labels.iter().enumerate().map(|(i, &l)| (l, i as u64)).collect();
        enc.uint(labels.len() as u64);
        for label in &labels {
            enc.str(label.as_str());
        }
        enc.uint(paths.len() as u64);
        for path in &paths {
            enc.uint(path.order() as u64);
            for e in path.elements() {
                enc.uint(label_ids[&e.label] << 1 | (e.direction == Direction::Forward) as u64);
            }
        }
        let path_ids: HashMap<&CooccurrenceType, u64> = paths.iter().enumerate().map(|(i, p)| (p, i as u64)).collect();

        enc.uint(self.vocab.len() as u64);
        for lexeme in &self.vocab {
            enc.str(&lexeme.form);
            enc.str(&lexeme.pos);
        }
        for w in self.ids() {
            enc.uint(self.token_count(w));
            enc.count(self.grand_total(w));
            let rows = self.path_totals(w);
            enc.uint(rows.len() as u64);
            let mut prev = 0;
            for (ty, v) in rows {
                let id = path_ids[ty];
                enc.uint(id - prev);
                prev = id;
                enc.count(*v);
            }
            let apt = self.apt(w);
            enc.uint(apt.nodes().len() as u64);
            let mut prev = 0;
            for node in apt.nodes() {
                let id = path_ids[&node.ty];
                enc.uint(id - prev);
                prev = id;
                enc.uint(node.members.len() as u64);
                let mut prev_coterm = 0;
                for &(coterm, n) in &node.members {
                    enc.uint((coterm.0 - prev_coterm) as u64);
                    prev_coterm = coterm.0;
                    enc.count(n);
                }
            }
        }
        let mut features: Vec<(u64, u32, f64)> = self
            .feature_totals
            .iter()
            .map(|((ty, w), &v)| (path_ids[ty], w.0, v))
            .collect();
        features.sort_by_key(|&(p, w, _)| (p, w));
        enc.uint(features.len() as u64);
        let (mut prev_path, mut prev_coterm) = (0u64, 0u32);
        for (path, coterm, v) in features {
            if path != prev_path {
                prev_coterm = 0;
            }
            enc.uint(path - prev_path);
            enc.uint((coterm - prev_coterm) as u64);
            enc.count(v);
            prev_path = path;
            prev_coterm = coterm;
        }
        enc.uint(self.type_totals.len() as u64);
        let mut prev = 0;
        for (ty, v) in &self.type_totals {
            let id = path_ids[ty];
            enc.uint(id - prev);
            prev = id;
            enc.count(*v);
        }

        let payload = enc.buf;
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Lexicon, FormatError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            if bytes.len() < MAGIC.len() && MAGIC.starts_with(bytes) && !bytes.is_empty() {
                return Err(FormatError::ChecksumFailure("file truncated inside header".into()));
            }
            return Err(FormatError::NotALexicon);
        }
        if bytes.len() < HEADER_LEN {
            return Err(FormatError::ChecksumFailure("file truncated inside header".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(FormatError::FormatVersionMismatch {
                found: version,
                expected: VERSION,
            });
        }
        let length = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let checksum = u32::from_le_bytes(bytes[20..24].try_into().unwrap());
        let payload = &bytes[HEADER_LEN..];
        if payload.len() as u64 != length {
            return Err(FormatError::ChecksumFailure(format!(
                "payload is {} bytes, header declares {length}",
                payload.len()
            )));
        }
        if crc32fast::hash(payload) != checksum {
            return Err(FormatError::ChecksumFailure("crc32 mismatch".into()));
        }
        decode_payload(payload)
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&self.to_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Lexicon, FormatError> {
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        Lexicon::from_bytes(&bytes)
    }

    /// Write the text debug format. Marginal rows are included when asked.
    pub fn write_text<W: Write>(&self, out: &mut W, marginals: bool) -> io::Result<()> {
        let cfg = &self.config;
        writeln!(out, "{TEXT_MAGIC}")?;
        writeln!(out, "# order_cap={}", cfg.order_cap)?;
        writeln!(out, "# use_lemma={}", cfg.use_lemma)?;
        writeln!(out, "# lowercase={}", cfg.lowercase)?;
        writeln!(out, "# split_multi_root={}", cfg.multi_root == MultiRootPolicy::Split)?;
        writeln!(out, "# strict={}", cfg.strict)?;
        writeln!(out, "# feature_threshold={}", cfg.feature_threshold)?;
        if let Some(t) = self.filtered_at {
            writeln!(out, "# filtered_at={t}")?;
        }
        for (from, to) in &cfg.pos_map {
            writeln!(out, "# pos_map={from}\t{to}")?;
        }
        for label in &cfg.excluded_labels {
            writeln!(out, "# excluded_label={label}")?;
        }
        writeln!(out, "# trees={}", self.trees)?;
        for w in self.ids() {
            writeln!(out, "# tokens={}\t{}", self.lexeme(w), self.token_count(w))?;
        }
        for w in self.ids() {
            let lexeme = self.lexeme(w);
            for (ty, coterm, n) in self.apt(w).entries() {
                writeln!(out, "{lexeme}\t{}\t{}\t{n}", ty.to_column(), self.lexeme(coterm))?;
            }
        }
        if marginals || self.filtered_at.is_some() {
            for w in self.ids() {
                let lexeme = self.lexeme(w);
                for (ty, n) in self.path_totals(w) {
                    writeln!(out, "{lexeme}\t{}\t*\t{n}", ty.to_column())?;
                }
                writeln!(out, "{lexeme}\t*\t*\t{}", self.grand_total(w))?;
            }
            let mut features: Vec<_> = self.feature_totals.iter().collect();
            features.sort_by(|a, b| a.0.cmp(b.0));
            for ((ty, coterm), n) in features {
                writeln!(out, "*\t{}\t{}\t{n}", ty.to_column(), self.lexeme(*coterm))?;
            }
            for (ty, n) in &self.type_totals {
                writeln!(out, "*\t{}\t*\t{n}", ty.to_column())?;
            }
        }
        Ok(())
    }

    /// Read the text debug format. Without marginal rows the marginals are
    /// recomputed from the entries, which is exact for unfiltered lexicons.
    pub fn read_text<R: BufRead>(input: R) -> Result<Lexicon, FormatError> {
        let mut cfg = IngestionConfig {
            pos_map: BTreeMap::new(),
            excluded_labels: BTreeSet::new(),
            ..IngestionConfig::default()
        };
        let mut filtered_at = None;
        let mut trees = 0;
        let mut tokens: BTreeMap<Lexeme, u64> = BTreeMap::new();
        let mut entries: Vec<(Lexeme, CooccurrenceType, Lexeme, f64)> = Vec::new();
        let mut marginal_rows = Vec::new();
        let mut saw_magic = false;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = i + 1;
            let err = |reason: String| FormatError::Text { line: line_no, reason };
            if i == 0 {
                if line != TEXT_MAGIC {
                    return Err(err("missing text format header".into()));
                }
                saw_magic = true;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix("# ") {
                let (key, value) = meta
                    .split_once('=')
                    .ok_or_else(|| err(format!("bad header line {line:?}")))?;
                let parse_bool = |v: &str| v.parse::<bool>().map_err(|e| err(e.to_string()));
                let parse_u64 = |v: &str| v.parse::<u64>().map_err(|e| err(e.to_string()));
                match key {
                    "order_cap" => cfg.order_cap = parse_u64(value)? as usize,
                    "use_lemma" => cfg.use_lemma = parse_bool(value)?,
                    "lowercase" => cfg.lowercase = parse_bool(value)?,
                    "split_multi_root" => {
                        cfg.multi_root = if parse_bool(value)? {
                            MultiRootPolicy::Split
                        } else {
                            MultiRootPolicy::Reject
                        }
                    }
                    "strict" => cfg.strict = parse_bool(value)?,
                    "feature_threshold" => cfg.feature_threshold = parse_u64(value)?,
                    "filtered_at" => filtered_at = Some(parse_u64(value)?),
                    "pos_map" => {
                        let (from, to) = value
                            .split_once('\t')
                            .ok_or_else(|| err("pos_map needs two fields".into()))?;
                        cfg.pos_map.insert(from.to_string(), to.to_string());
                    }
                    "excluded_label" => {
                        cfg.excluded_labels.insert(value.to_string());
                    }
                    "trees" => trees = parse_u64(value)?,
                    "tokens" => {
                        let (lex, n) = value
                            .split_once('\t')
                            .ok_or_else(|| err("tokens needs two fields".into()))?;
                        let lex: Lexeme = lex.parse().map_err(|e: crate::CorpusError| err(e.to_string()))?;
                        tokens.insert(lex, parse_u64(n)?);
                    }
                    other => return Err(err(format!("unknown header key {other:?}"))),
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let n: f64 = fields[3]
                .parse()
                .map_err(|_| err(format!("bad count {:?}", fields[3])))?;
            if fields[0] == "*" || fields[1] == "*" || fields[2] == "*" {
                marginal_rows.push((
                    line_no,
                    fields[0].to_string(),
                    fields[1].to_string(),
                    fields[2].to_string(),
                    n,
                ));
                continue;
            }
            let lexeme: Lexeme = fields[0].parse().map_err(|e: crate::CorpusError| err(e.to_string()))?;
            let ty: CooccurrenceType = fields[1].parse().map_err(|e: crate::PathError| err(e.to_string()))?;
            let coterm: Lexeme = fields[2].parse().map_err(|e: crate::CorpusError| err(e.to_string()))?;
            entries.push((lexeme, ty, coterm, n));
        }
        if !saw_magic {
            return Err(FormatError::Text {
                line: 1,
                reason: "empty input".into(),
            });
        }

        let mut vocab: BTreeSet<Lexeme> = tokens.keys().cloned().collect();
        for (w, _, c, _) in &entries {
            vocab.insert(w.clone());
            vocab.insert(c.clone());
        }
        let vocab: Vec<Lexeme> = vocab.into_iter().collect();
        let index: HashMap<&Lexeme, LexemeId> =
            vocab.iter().enumerate().map(|(i, l)| (l, LexemeId(i as u32))).collect();
        let mut nodes: Vec<BTreeMap<CooccurrenceType, BTreeMap<LexemeId, f64>>> = vec![BTreeMap::new(); vocab.len()];
        for (w, ty, c, n) in &entries {
            *nodes[index[w].index()]
                .entry(ty.clone())
                .or_default()
                .entry(index[c])
                .or_insert(0.0) += n;
        }
        let apts = nodes
            .into_iter()
            .map(|nodes| {
                Apt::from_sorted_nodes(
                    WeightKind::Count,
                    nodes
                        .into_iter()
                        .map(|(ty, m)| AptNode {
                            ty,
                            members: m.into_iter().collect(),
                        })
                        .collect(),
                )
            })
            .collect();
        let token_counts = vocab.iter().map(|l| tokens.get(l).copied().unwrap_or(0)).collect();
        let mut lexicon = Lexicon::from_parts(cfg, vocab, apts, token_counts, trees);
        lexicon.filtered_at = filtered_at;
        if !marginal_rows.is_empty() {
            lexicon.replace_marginals(&marginal_rows)?;
        } else if filtered_at.is_some() {
            return Err(FormatError::Text {
                line: 1,
                reason: "filtered lexicon without marginal rows".into(),
            });
        }
        Ok(lexicon)
    }

    fn replace_marginals(&mut self, rows: &[(usize, String, String, String, f64)]) -> Result<(), FormatError> {
        let mut path_totals = vec![Vec::new(); self.vocab.len()];
        let mut grand_totals = vec![0.0; self.vocab.len()];
        let mut feature_totals = HashMap::new();
        let mut type_totals = BTreeMap::new();
        for (line, w, ty, c, n) in rows {
            let err = |reason: String| FormatError::Text { line: *line, reason };
            let lookup = |s: &str| -> Result<LexemeId, FormatError> {
                let lex: Lexeme = s.parse().map_err(|e: crate::CorpusError| err(e.to_string()))?;
                self.id(&lex).ok_or_else(|| err(format!("unknown lexeme {s}")))
            };
            let parse_ty = |s: &str| -> Result<CooccurrenceType, FormatError> {
                s.parse().map_err(|e: crate::PathError| err(e.to_string()))
            };
            match (w.as_str(), ty.as_str(), c.as_str()) {
                ("*", "*", _) => return Err(err("row sums out both lexeme and path".into())),
                ("*", ty, "*") => {
                    type_totals.insert(parse_ty(ty)?, *n);
                }
                ("*", ty, c) => {
                    feature_totals.insert((parse_ty(ty)?, lookup(c)?), *n);
                }
                (w, "*", "*") => grand_totals[lookup(w)?.index()] = *n,
                (w, ty, "*") => path_totals[lookup(w)?.index()].push((parse_ty(ty)?, *n)),
                _ => return Err(err("unrecognised marginal row".into())),
            }
        }
        for rows in &mut path_totals {
            rows.sort_by(|a, b| a.0.cmp(&b.0));
        }
        self.path_totals = path_totals;
        self.grand_totals = grand_totals;
        self.feature_totals = feature_totals;
        self.type_totals = type_totals;
        Ok(())
    }
}

fn decode_payload(payload: &[u8]) -> Result<Lexicon, FormatError> {
    let mut dec = Decoder { rest: payload };
    let (config, filtered_at) = decode_config(&mut dec)?;
    let trees = dec.uint()?;
    let mut labels = Vec::new();
    for _ in 0..dec.len()? {
        labels.push(DependencyLabel::new(&dec.str()?).map_err(|e| corrupt(e.to_string()))?);
    }
    let path_count = dec.len()?;
    let mut paths = Vec::with_capacity(path_count.min(payload.len()));
    for _ in 0..path_count {
        let order = dec.len()?;
        let mut elements = Vec::with_capacity(order.min(64));
        for _ in 0..order {
            let code = dec.uint()?;
            let label = *labels
                .get((code >> 1) as usize)
                .ok_or_else(|| corrupt("label id out of range"))?;
            elements.push(if code & 1 == 1 {
                PathElement::forward(label)
            } else {
                PathElement::inverse(label)
            });
        }
        paths.push(CooccurrenceType::reduce(elements));
    }
    let path_at = |id: u64| -> Result<&CooccurrenceType, FormatError> {
        paths.get(id as usize).ok_or_else(|| corrupt("path id out of range"))
    };
    let vocab_len = dec.len()?;
    let mut vocab = Vec::with_capacity(vocab_len.min(payload.len()));
    for _ in 0..vocab_len {
        let form = dec.str()?;
        let pos = dec.str()?;
        vocab.push(Lexeme::new(form, pos).map_err(|e| corrupt(e.to_string()))?);
    }
    let lexeme_at = |id: u64| -> Result<LexemeId, FormatError> {
        if (id as usize) < vocab_len {
            Ok(LexemeId(id as u32))
        } else {
            Err(corrupt("lexeme id out of range"))
        }
    };
    let mut tokens = Vec::with_capacity(vocab_len);
    let mut grand_totals = Vec::with_capacity(vocab_len);
    let mut path_totals = Vec::with_capacity(vocab_len);
    let mut apts = Vec::with_capacity(vocab_len);
    for _ in 0..vocab_len {
        tokens.push(dec.uint()?);
        grand_totals.push(dec.count()?);
        let mut rows = Vec::new();
        let mut prev = 0;
        for _ in 0..dec.len()? {
            prev += dec.uint()?;
            rows.push((path_at(prev)?.clone(), dec.count()?));
        }
        path_totals.push(rows);
        let mut nodes = Vec::new();
        let mut prev = 0;
        for _ in 0..dec.len()? {
            prev += dec.uint()?;
            let ty = path_at(prev)?.clone();
            let mut members = Vec::new();
            let mut coterm = 0;
            for _ in 0..dec.len()? {
                coterm += dec.uint()?;
                members.push((lexeme_at(coterm)?, dec.count()?));
            }
            nodes.push(AptNode { ty, members });
        }
        apts.push(Apt::from_sorted_nodes(WeightKind::Count, nodes));
    }
    let mut feature_totals = HashMap::new();
    let (mut path, mut coterm) = (0u64, 0u64);
    for _ in 0..dec.len()? {
        let dp = dec.uint()?;
        if dp != 0 {
            coterm = 0;
        }
        path += dp;
        coterm += dec.uint()?;
        feature_totals.insert((path_at(path)?.clone(), lexeme_at(coterm)?), dec.count()?);
    }
    let mut type_totals = BTreeMap::new();
    let mut prev = 0;
    for _ in 0..dec.len()? {
        prev += dec.uint()?;
        type_totals.insert(path_at(prev)?.clone(), dec.count()?);
    }
    if !dec.rest.is_empty() {
        return Err(corrupt("trailing bytes after payload"));
    }
    let index = vocab
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), LexemeId(i as u32)))
        .collect();
    Ok(Lexicon {
        config,
        filtered_at,
        vocab,
        index,
        apts,
        path_totals,
        grand_totals,
        feature_totals,
        type_totals,
        tokens,
        trees,
    })
}

/// Open a text dump from disk.
pub fn read_text_file(path: &Path) -> Result<Lexicon, FormatError> {
    Lexicon::read_text(BufReader::new(File::open(path)?))
}
