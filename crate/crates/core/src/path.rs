//! Dependency-path algebra.
//!
//! A co-occurrence type is the sequence of dependency edges walked between
//! two tree nodes. Each edge is traversed either along its direction
//! ([`Direction::Forward`]) or against it ([`Direction::Inverse`]). Adjacent
//! complementary steps cancel, and every [`CooccurrenceType`] value is kept
//! in that fully reduced form.
//!
//! Textual encoding: elements are joined by `.`, an inverse step carries a
//! leading `_`, and the empty path is the empty string (`:` in columnar
//! files), e.g. `_amod._dobj.nsubj`.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use smallvec::SmallVec;
use thiserror::Error;

/// Rendering of the empty path in column-oriented files.
pub const EMPTY_PATH_COLUMN: &str = ":";

const SEPARATOR: char = '.';
const INVERSE_MARKER: char = '_';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("empty dependency label")]
    EmptyLabel,
    #[error("invalid dependency label {0:?}: labels may not contain '.', '_' or whitespace")]
    InvalidLabel(String),
    #[error("empty path element in {0:?}")]
    EmptyElement(String),
}

fn label_table() -> &'static Mutex<HashSet<&'static str>> {
    static TABLE: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

/// A dependency relation name such as `amod` or `nsubj`.
///
/// Labels are interned process-wide, so a label is a single pointer and
/// equality is pointer equality. Ordering is by the label text, which keeps
/// every sorted structure independent of interning order.
#[derive(Clone, Copy)]
pub struct DependencyLabel(&'static str);

impl DependencyLabel {
    pub fn new(name: &str) -> Result<Self, PathError> {
        if name.is_empty() {
            return Err(PathError::EmptyLabel);
        }
        if name
            .chars()
            .any(|c| c == SEPARATOR || c == INVERSE_MARKER || c.is_whitespace())
        {
            return Err(PathError::InvalidLabel(name.to_string()));
        }
        let mut table = label_table().lock().expect("label table poisoned");
        if let Some(&interned) = table.get(name) {
            return Ok(DependencyLabel(interned));
        }
        // The label alphabet is small and lives for the whole process.
        let interned: &'static str = Box::leak(name.to_string().into_boxed_str());
        table.insert(interned);
        Ok(DependencyLabel(interned))
    }

    pub fn as_str(&self) -> &'static str {
        self.0
    }
}

impl PartialEq for DependencyLabel {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for DependencyLabel {}

impl Hash for DependencyLabel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.0.as_ptr() as usize).hash(state)
    }
}

impl PartialOrd for DependencyLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DependencyLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            Ordering::Equal
        } else {
            self.0.cmp(other.0)
        }
    }
}

impl fmt::Debug for DependencyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for DependencyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl FromStr for DependencyLabel {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DependencyLabel::new(s)
    }
}

/// Whether an edge is walked along (head to dependent) or against its direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Inverse,
    Forward,
}

impl Direction {
    pub fn toggled(self) -> Self {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

/// One step of a dependency path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathElement {
    pub label: DependencyLabel,
    pub direction: Direction,
}

impl PathElement {
    pub fn forward(label: DependencyLabel) -> Self {
        PathElement {
            label,
            direction: Direction::Forward,
        }
    }

    pub fn inverse(label: DependencyLabel) -> Self {
        PathElement {
            label,
            direction: Direction::Inverse,
        }
    }

    pub fn toggled(self) -> Self {
        PathElement {
            label: self.label,
            direction: self.direction.toggled(),
        }
    }

    /// True when `self` followed by `other` cancels out.
    pub fn cancels(self, other: PathElement) -> bool {
        self.label == other.label && self.direction != other.direction
    }

    pub fn is_inverse(self) -> bool {
        self.direction == Direction::Inverse
    }
}

impl fmt::Display for PathElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "{INVERSE_MARKER}{}", self.label)
        } else {
            write!(f, "{}", self.label)
        }
    }
}

impl FromStr for PathElement {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix(INVERSE_MARKER) {
            Some(rest) => Ok(PathElement::inverse(rest.parse()?)),
            None => Ok(PathElement::forward(s.parse()?)),
        }
    }
}

/// Parse the textual encoding into raw, unreduced elements.
pub fn parse_elements(s: &str) -> Result<Vec<PathElement>, PathError> {
    if s.is_empty() || s == EMPTY_PATH_COLUMN {
        return Ok(Vec::new());
    }
    s.split(SEPARATOR)
        .map(|part| {
            if part.is_empty() {
                Err(PathError::EmptyElement(s.to_string()))
            } else {
                part.parse()
            }
        })
        .collect()
}

type Elements = SmallVec<[PathElement; 2]>;

/// A reduced dependency path; the key of the typed feature space.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CooccurrenceType {
    elements: Elements,
}

impl CooccurrenceType {
    /// The empty path, addressing the anchor.
    pub fn empty() -> Self {
        CooccurrenceType::default()
    }

    /// Reduce an arbitrary element sequence with a single stack pass.
    pub fn reduce<I>(raw: I) -> Self
    where
        I: IntoIterator<Item = PathElement>,
    {
        let mut out = CooccurrenceType::empty();
        for element in raw {
            out.push(element);
        }
        out
    }

    /// Append one step, cancelling it against the last step when complementary.
    pub fn push(&mut self, element: PathElement) {
        match self.elements.last() {
            Some(&top) if top.cancels(element) => {
                self.elements.pop();
            }
            _ => self.elements.push(element),
        }
    }

    /// Remove the last step. Used to backtrack incremental walks.
    pub fn pop(&mut self) -> Option<PathElement> {
        self.elements.pop()
    }

    pub fn elements(&self) -> &[PathElement] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn last(&self) -> Option<PathElement> {
        self.elements.last().copied()
    }

    /// Number of steps in the reduced path.
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Membership in inverse-steps-then-forward-steps form.
    pub fn is_canonical(&self) -> bool {
        let mut seen_forward = false;
        for element in &self.elements {
            match element.direction {
                Direction::Forward => seen_forward = true,
                Direction::Inverse if seen_forward => return false,
                Direction::Inverse => {}
            }
        }
        true
    }

    /// The same path walked backwards.
    pub fn inverse(&self) -> Self {
        CooccurrenceType {
            elements: self.elements.iter().rev().map(|e| e.toggled()).collect(),
        }
    }

    /// `reduce(self · other)`.
    pub fn concat_reduce(&self, other: &CooccurrenceType) -> Self {
        let mut out = self.clone();
        for &element in other.elements() {
            out.push(element);
        }
        out
    }

    /// Rendering for column-oriented files, where the empty path is `:`.
    pub fn to_column(&self) -> String {
        if self.is_empty() {
            EMPTY_PATH_COLUMN.to_string()
        } else {
            self.to_string()
        }
    }
}

impl fmt::Display for CooccurrenceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, element) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, "{SEPARATOR}")?;
            }
            write!(f, "{element}")?;
        }
        Ok(())
    }
}

impl FromStr for CooccurrenceType {
    type Err = PathError;

    /// Parses and reduces; `"_amod.amod"` yields the empty path.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(CooccurrenceType::reduce(parse_elements(s)?))
    }
}
