//! BIO tag sequences and exact-match span precision / recall / F1.
//!
//! Conventions: with no predicted spans P = 0, with no gold spans R = 0, and
//! F1 = 0 whenever P + R = 0. A predicted `I-X` that does not continue an
//! `X` span is promoted to `B-X` before spans are extracted.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tag {
    Outside,
    Begin(String),
    Inside(String),
}

impl Tag {
    pub fn entity_type(&self) -> Option<&str> {
        match self {
            Tag::Outside => None,
            Tag::Begin(t) | Tag::Inside(t) => Some(t),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Outside => f.write_str("O"),
            Tag::Begin(t) => write!(f, "B-{t}"),
            Tag::Inside(t) => write!(f, "I-{t}"),
        }
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" => Ok(Tag::Outside),
            _ => match s.split_once('-') {
                Some(("B", t)) if !t.is_empty() => Ok(Tag::Begin(t.to_string())),
                Some(("I", t)) if !t.is_empty() => Ok(Tag::Inside(t.to_string())),
                _ => Err(Error::Domain(format!("`{s}` is not a BIO tag"))),
            },
        }
    }
}

/// Parses whitespace-separated tags, e.g. `"B-PER I-PER O"`.
pub fn parse_tags(s: &str) -> Result<Vec<Tag>> {
    s.split_whitespace().map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagSequence {
    pub tokens: Vec<u32>,
    pub labels: Vec<Tag>,
}

impl TagSequence {
    pub fn new(tokens: Vec<u32>, labels: Vec<Tag>) -> Result<Self> {
        if tokens.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} tokens but {} labels",
                tokens.len(),
                labels.len()
            )));
        }
        Ok(TagSequence { tokens, labels })
    }

    /// Label-only sequence; tokens are filled with zeros.
    pub fn from_labels(labels: Vec<Tag>) -> Self {
        TagSequence {
            tokens: vec![0; labels.len()],
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_well_formed(&self) -> bool {
        is_well_formed(&self.labels)
    }
}

/// True when every `I-X` continues a `B-X` or `I-X`.
pub fn is_well_formed(labels: &[Tag]) -> bool {
    let mut prev: Option<&str> = None;
    for tag in labels {
        if let Tag::Inside(t) = tag {
            if prev != Some(t.as_str()) {
                return false;
            }
        }
        prev = tag.entity_type();
    }
    true
}

/// Promotes every stray `I-X` to `B-X`.
pub fn repair(labels: &[Tag]) -> Vec<Tag> {
    let mut out = Vec::with_capacity(labels.len());
    let mut prev: Option<String> = None;
    for tag in labels {
        let fixed = match tag {
            Tag::Inside(t) if prev.as_deref() != Some(t.as_str()) => Tag::Begin(t.clone()),
            other => other.clone(),
        };
        prev = fixed.entity_type().map(str::to_string);
        out.push(fixed);
    }
    out
}

/// Typed half-open token range `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub kind: String,
}

/// Spans of a (repaired) label sequence, in order.
pub fn extract_spans(labels: &[Tag]) -> Vec<Span> {
    let labels = repair(labels);
    let mut spans = Vec::new();
    let mut open: Option<Span> = None;
    for (i, tag) in labels.iter().enumerate() {
        match tag {
            Tag::Inside(_) => {
                if let Some(s) = open.as_mut() {
                    s.end = i + 1;
                }
            }
            Tag::Begin(t) => {
                spans.extend(open.take());
                open = Some(Span {
                    start: i,
                    end: i + 1,
                    kind: t.clone(),
                });
            }
            Tag::Outside => spans.extend(open.take()),
        }
    }
    spans.extend(open);
    spans
}

/// Inverse of [`extract_spans`] for non-overlapping spans.
pub fn render_spans(spans: &[Span], len: usize) -> Vec<Tag> {
    let mut tags = vec![Tag::Outside; len];
    for s in spans {
        tags[s.start] = Tag::Begin(s.kind.clone());
        for tag in &mut tags[s.start + 1..s.end] {
            *tag = Tag::Inside(s.kind.clone());
        }
    }
    tags
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpanCounts {
    pub matched: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl SpanCounts {
    pub fn prf(&self) -> Prf {
        let precision = if self.predicted == 0 {
            0.0
        } else {
            self.matched as f64 / self.predicted as f64
        };
        let recall = if self.gold == 0 {
            0.0
        } else {
            self.matched as f64 / self.gold as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}

impl std::ops::AddAssign for SpanCounts {
    fn add_assign(&mut self, o: Self) {
        self.matched += o.matched;
        self.predicted += o.predicted;
        self.gold += o.gold;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn span_counts(gold: &[Tag], pred: &[Tag]) -> Result<SpanCounts> {
    if gold.len() != pred.len() {
        return Err(Error::Shape(format!(
            "gold has {} tags but prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    if !is_well_formed(gold) {
        return Err(Error::Domain("gold labels are not well-formed BIO".into()));
    }
    let gold_spans: HashSet<Span> = extract_spans(gold).into_iter().collect();
    let pred_spans: HashSet<Span> = extract_spans(pred).into_iter().collect();
    Ok(SpanCounts {
        matched: gold_spans.intersection(&pred_spans).count(),
        predicted: pred_spans.len(),
        gold: gold_spans.len(),
    })
}

pub fn span_prf(gold: &TagSequence, pred: &TagSequence) -> Result<Prf> {
    span_counts(&gold.labels, &pred.labels).map(|c| c.prf())
}

/// Micro-averaged scores over a corpus of `(gold, pred)` pairs.
pub fn corpus_prf<'a>(pairs: impl IntoIterator<Item = (&'a [Tag], &'a [Tag])>) -> Result<Prf> {
    let mut total = SpanCounts::default();
    for (g, p) in pairs {
        total += span_counts(g, p)?;
    }
    Ok(total.prf())
}
