//! CoNLL-X corpus ingestion and the dependency tree type.
//!
//! Sentences are blank-line separated; each token line has at least eight
//! tab-separated columns: ID, FORM, LEMMA, CPOS, POS, FEATS, HEAD, DEPREL.
//! Comment lines (`#`), multiword ranges (`3-4`) and empty nodes (`5.1`) are
//! skipped.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use flate2::read::MultiGzDecoder;
use thiserror::Error;

use crate::lexicon::{IngestionConfig, MultiRootPolicy};
use crate::path::{CooccurrenceType, DependencyLabel, PathElement};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed token line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("sentence starting at line {line}: not a single rooted tree: {reason}")]
    CyclicOrForestStructure { line: usize, reason: String },
    #[error("node index {index} out of range for a tree of {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid lexeme {0:?}: expected form/POS")]
    InvalidLexeme(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A word form (usually a lemma) paired with its part-of-speech tag.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lexeme {
    pub form: String,
    pub pos: String,
}

impl Lexeme {
    pub fn new(form: impl Into<String>, pos: impl Into<String>) -> Result<Self, CorpusError> {
        let form = form.into();
        let pos = pos.into();
        if form.is_empty() || pos.is_empty() || form.contains(char::is_whitespace) {
            return Err(CorpusError::InvalidLexeme(format!("{form}/{pos}")));
        }
        Ok(Lexeme { form, pos })
    }
}

impl fmt::Display for Lexeme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.form, self.pos)
    }
}

impl FromStr for Lexeme {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.rsplit_once('/') {
            Some((form, pos)) => Lexeme::new(form, pos),
            None => Err(CorpusError::InvalidLexeme(s.to_string())),
        }
    }
}

/// A rooted tree of lexemes with labelled head-to-dependent edges.
#[derive(Clone, Debug, PartialEq)]
pub struct DependencyTree {
    nodes: Vec<Lexeme>,
    heads: Vec<Option<(usize, DependencyLabel)>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    root: usize,
    /// Nodes hanging (directly or transitively) from an excluded edge.
    excluded: Vec<bool>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree has no nodes")]
    Empty,
    #[error("edge endpoint {0} out of range")]
    EndpointOutOfRange(usize),
    #[error("node {0} has more than one head")]
    MultipleHeads(usize),
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("cycle or disconnected node at {0}")]
    Cycle(usize),
}

impl DependencyTree {
    /// Build from nodes and `(head, dependent, label)` edges.
    pub fn new(
        nodes: Vec<Lexeme>,
        edges: impl IntoIterator<Item = (usize, usize, DependencyLabel)>,
    ) -> Result<Self, TreeError> {
        let n = nodes.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut heads = vec![None; n];
        for (head, dep, label) in edges {
            if head >= n {
                return Err(TreeError::EndpointOutOfRange(head));
            }
            if dep >= n {
                return Err(TreeError::EndpointOutOfRange(dep));
            }
            if heads[dep].is_some() {
                return Err(TreeError::MultipleHeads(dep));
            }
            heads[dep] = Some((head, label));
        }
        Self::from_heads(nodes, heads)
    }

    /// Build from a per-node head assignment; exactly one node has `None`.
    pub fn from_heads(nodes: Vec<Lexeme>, heads: Vec<Option<(usize, DependencyLabel)>>) -> Result<Self, TreeError> {
        let n = nodes.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        assert_eq!(n, heads.len(), "one head slot per node");
        let roots: Vec<usize> = (0..n).filter(|&i| heads[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(TreeError::RootCount(roots.len()));
        }
        let root = roots[0];
        let mut children = vec![Vec::new(); n];
        for (dep, head) in heads.iter().enumerate() {
            if let Some((h, _)) = head {
                if *h >= n {
                    return Err(TreeError::EndpointOutOfRange(*h));
                }
                if *h == dep {
                    return Err(TreeError::Cycle(dep));
                }
                children[*h].push(dep);
            }
        }
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut stack = vec![root];
        let mut seen = 1;
        while let Some(node) = stack.pop() {
            for &child in &children[node] {
                depth[child] = depth[node] + 1;
                seen += 1;
                stack.push(child);
            }
        }
        if seen != n {
            let stray = depth.iter().position(|&d| d == usize::MAX).unwrap_or(0);
            return Err(TreeError::Cycle(stray));
        }
        Ok(DependencyTree {
            nodes,
            heads,
            children,
            depth,
            root,
            excluded: vec![false; n],
        })
    }

    /// Mark every node below an edge whose label is in `labels` as excluded
    /// from co-occurrence extraction. The tree structure is unchanged.
    pub fn exclude_labels(mut self, labels: &BTreeSet<String>) -> Self {
        if labels.is_empty() {
            return self;
        }
        let mut stack = vec![(self.root, false)];
        while let Some((node, inherited)) = stack.pop() {
            let own = self.heads[node]
                .map(|(_, label)| labels.contains(label.as_str()))
                .unwrap_or(false);
            let excluded = inherited || own;
            self.excluded[node] = excluded;
            for &child in &self.children[node] {
                stack.push((child, excluded));
            }
        }
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn lexeme(&self, i: usize) -> &Lexeme {
        &self.nodes[i]
    }

    pub fn lexemes(&self) -> &[Lexeme] {
        &self.nodes
    }

    pub fn head(&self, i: usize) -> Option<(usize, DependencyLabel)> {
        self.heads[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn is_excluded(&self, i: usize) -> bool {
        self.excluded[i]
    }

    /// `(head, dependent, label)` for every edge, in dependent order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, DependencyLabel)> + '_ {
        self.heads
            .iter()
            .enumerate()
            .filter_map(|(dep, h)| h.map(|(head, label)| (head, dep, label)))
    }

    fn check(&self, i: usize) -> Result<(), CorpusError> {
        if i >= self.len() {
            Err(CorpusError::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// The reduced type of the tree path from node `i` to node `j`.
    pub fn tree_path(&self, i: usize, j: usize) -> Result<CooccurrenceType, CorpusError> {
        self.check(i)?;
        self.check(j)?;
        let (mut a, mut b) = (i, j);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while self.depth[a] > self.depth[b] {
            let (h, label) = self.heads[a].expect("non-root has a head");
            up.push(PathElement::inverse(label));
            a = h;
        }
        while self.depth[b] > self.depth[a] {
            let (h, label) = self.heads[b].expect("non-root has a head");
            down.push(PathElement::forward(label));
            b = h;
        }
        while a != b {
            let (ha, la) = self.heads[a].expect("non-root has a head");
            let (hb, lb) = self.heads[b].expect("non-root has a head");
            up.push(PathElement::inverse(la));
            down.push(PathElement::forward(lb));
            a = ha;
            b = hb;
        }
        Ok(CooccurrenceType::reduce(up.into_iter().chain(down.into_iter().rev())))
    }

    /// Write the tree as a CoNLL-X sentence (FORM and LEMMA both carry the form).
    pub fn write_conll<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (i, lexeme) in self.nodes.iter().enumerate() {
            let (head, label) = match self.heads[i] {
                Some((h, label)) => (h + 1, label.as_str()),
                None => (0, "root"),
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t_\t{}\t{}\t_\t_",
                i + 1,
                lexeme.form,
                lexeme.form,
                lexeme.pos,
                lexeme.pos,
                head,
                label
            )?;
        }
        writeln!(out)
    }
}

/// One token line, fields as read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConllToken {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub cpos: String,
    pub pos: String,
    pub feats: String,
    pub head: usize,
    pub deprel: String,
    /// Columns after DEPREL, kept verbatim.
    pub rest: Vec<String>,
}

impl fmt::Display for ConllToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.id, self.form, self.lemma, self.cpos, self.pos, self.feats, self.head, self.deprel
        )?;
        for field in &self.rest {
            write!(f, "\t{field}")?;
        }
        Ok(())
    }
}

/// A sentence as it appears in the file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConllSentence {
    /// 1-based line number of the first token.
    pub line: usize,
    pub tokens: Vec<ConllToken>,
}

impl ConllSentence {
    pub fn write<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for token in &self.tokens {
            writeln!(out, "{token}")?;
        }
        writeln!(out)
    }

    fn normalized_lexeme(token: &ConllToken, cfg: &IngestionConfig) -> Result<Lexeme, String> {
        let raw_form = if cfg.use_lemma && !token.lemma.is_empty() && token.lemma != "_" {
            &token.lemma
        } else {
            &token.form
        };
        let form = if cfg.lowercase {
            raw_form.to_lowercase()
        } else {
            raw_form.clone()
        };
        let tag = if token.pos.is_empty() || token.pos == "_" {
            &token.cpos
        } else {
            &token.pos
        };
        let pos = cfg.pos_map.get(tag).cloned().unwrap_or_else(|| tag.clone());
        Lexeme::new(form, pos).map_err(|e| e.to_string())
    }

    /// Convert to validated trees. Several trees come back only when the
    /// multi-root policy is [`MultiRootPolicy::Split`].
    pub fn to_trees(&self, cfg: &IngestionConfig) -> Result<Vec<DependencyTree>, CorpusError> {
        let n = self.tokens.len();
        let mut nodes = Vec::with_capacity(n);
        let mut heads = Vec::with_capacity(n);
        for (offset, token) in self.tokens.iter().enumerate() {
            let lexeme = Self::normalized_lexeme(token, cfg).map_err(|reason| CorpusError::MalformedLine {
                line: self.line + offset,
                reason,
            })?;
            nodes.push(lexeme);
            if token.head == 0 {
                heads.push(None);
            } else {
                if token.head > n {
                    return Err(CorpusError::CyclicOrForestStructure {
                        line: self.line,
                        reason: format!("token {} has head {} beyond sentence end", token.id, token.head),
                    });
                }
                let label = DependencyLabel::new(&token.deprel).map_err(|e| CorpusError::MalformedLine {
                    line: self.line + offset,
                    reason: e.to_string(),
                })?;
                heads.push(Some((token.head - 1, label)));
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&i| heads[i].is_none()).collect();
        let structural = |e: TreeError| CorpusError::CyclicOrForestStructure {
            line: self.line,
            reason: e.to_string(),
        };
        if roots.len() > 1 && cfg.multi_root == MultiRootPolicy::Split {
            return split_fragments(nodes, heads, &roots).map_err(structural).map(|trees| {
                trees
                    .into_iter()
                    .map(|t| t.exclude_labels(&cfg.excluded_labels))
                    .collect()
            });
        }
        let tree = DependencyTree::from_heads(nodes, heads).map_err(structural)?;
        Ok(vec![tree.exclude_labels(&cfg.excluded_labels)])
    }
}

fn split_fragments(
    nodes: Vec<Lexeme>,
    heads: Vec<Option<(usize, DependencyLabel)>>,
    roots: &[usize],
) -> Result<Vec<DependencyTree>, TreeError> {
    let n = nodes.len();
    // Assign every node to the root it hangs from; cycles never reach a root.
    let mut owner = vec![usize::MAX; n];
    for (start, slot) in owner.iter_mut().enumerate() {
        let mut node = start;
        let mut steps = 0;
        while let Some((h, _)) = heads[node] {
            node = h;
            steps += 1;
            if steps > n {
                return Err(TreeError::Cycle(start));
            }
        }
        *slot = node;
    }
    let mut trees = Vec::with_capacity(roots.len());
    for &root in roots {
        let members: Vec<usize> = (0..n).filter(|&i| owner[i] == root).collect();
        let mut remap = vec![usize::MAX; n];
        for (new, &old) in members.iter().enumerate() {
            remap[old] = new;
        }
        let sub_nodes = members.iter().map(|&i| nodes[i].clone()).collect();
        let sub_heads = members
            .iter()
            .map(|&i| heads[i].map(|(h, label)| (remap[h], label)))
            .collect();
        trees.push(DependencyTree::from_heads(sub_nodes, sub_heads)?);
    }
    Ok(trees)
}

fn parse_token(line: &str, line_no: usize) -> Result<Option<ConllToken>, CorpusError> {
    let malformed = |reason: String| CorpusError::MalformedLine { line: line_no, reason };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 8 {
        return Err(malformed(format!(
            "expected at least 8 tab-separated fields, found {}",
            fields.len()
        )));
    }
    if fields[0].contains('-') || fields[0].contains('.') {
        return Ok(None);
    }
    let id: usize = fields[0]
        .parse()
        .map_err(|_| malformed(format!("non-numeric ID {:?}", fields[0])))?;
    let head: usize = fields[6]
        .parse()
        .map_err(|_| malformed(format!("non-numeric HEAD {:?}", fields[6])))?;
    Ok(Some(ConllToken {
        id,
        form: fields[1].to_string(),
        lemma: fields[2].to_string(),
        cpos: fields[3].to_string(),
        pos: fields[4].to_string(),
        feats: fields[5].to_string(),
        head,
        deprel: fields[7].to_string(),
        rest: fields[8..].iter().map(|s| s.to_string()).collect(),
    }))
}

/// Streams raw sentences out of a CoNLL reader.
pub struct SentenceReader<R> {
    input: R,
    line_no: usize,
    buf: String,
    done: bool,
}

impl<R: BufRead> SentenceReader<R> {
    pub fn new(input: R) -> Self {
        SentenceReader {
            input,
            line_no: 0,
            buf: String::new(),
            done: false,
        }
    }

    fn next_sentence(&mut self) -> Option<Result<ConllSentence, CorpusError>> {
        let mut tokens = Vec::new();
        let mut first_line = 0;
        let mut error = None;
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    break;
                }
                Ok(_) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
            self.line_no += 1;
            let line = self.buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                if tokens.is_empty() && error.is_none() {
                    continue;
                }
                break;
            }
            if line.starts_with('#') {
                continue;
            }
            if first_line == 0 {
                first_line = self.line_no;
            }
            if error.is_some() {
                continue;
            }
            match parse_token(line, self.line_no) {
                Ok(Some(token)) => tokens.push(token),
                Ok(None) => {}
                Err(e) => error = Some(e),
            }
        }
        if let Some(e) = error {
            return Some(Err(e));
        }
        if tokens.is_empty() {
            return None;
        }
        for (i, token) in tokens.iter().enumerate() {
            if token.id != i + 1 {
                return Some(Err(CorpusError::MalformedLine {
                    line: first_line + i,
                    reason: format!("expected token ID {}, found {}", i + 1, token.id),
                }));
            }
        }
        Some(Ok(ConllSentence {
            line: first_line,
            tokens,
        }))
    }
}

impl<R: BufRead> Iterator for SentenceReader<R> {
    type Item = Result<ConllSentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        self.next_sentence()
    }
}

/// Streams validated trees. In strict mode the first error is yielded and
/// the stream ends; otherwise bad sentences are logged and skipped.
pub struct TreeReader<R> {
    sentences: SentenceReader<R>,
    cfg: IngestionConfig,
    pending: std::vec::IntoIter<DependencyTree>,
    skipped: usize,
    failed: bool,
}

impl<R: BufRead> TreeReader<R> {
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

impl<R: BufRead> Iterator for TreeReader<R> {
    type Item = Result<DependencyTree, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(tree) = self.pending.next() {
                return Some(Ok(tree));
            }
            if self.failed {
                return None;
            }
            let result = self.sentences.next()?.and_then(|sentence| sentence.to_trees(&self.cfg));
            match result {
                Ok(trees) => self.pending = trees.into_iter(),
                Err(CorpusError::Io(e)) => {
                    self.failed = true;
                    return Some(Err(CorpusError::Io(e)));
                }
                Err(e) if self.cfg.strict => {
                    self.failed = true;
                    return Some(Err(e));
                }
                Err(e) => {
                    log::warn!("skipping sentence: {e}");
                    self.skipped += 1;
                }
            }
        }
    }
}

/// Parse a CoNLL stream into trees under the given normalization settings.
pub fn parse_conll<R: BufRead>(input: R, cfg: &IngestionConfig) -> TreeReader<R> {
    TreeReader {
        sentences: SentenceReader::new(input),
        cfg: cfg.clone(),
        pending: Vec::new().into_iter(),
        skipped: 0,
        failed: false,
    }
}

/// Open a corpus file, transparently decompressing `.gz` inputs.
pub fn open_corpus(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let file = File::open(path)?;
    let gz = path.extension().map(|e| e == "gz").unwrap_or(false);
    if gz {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}
