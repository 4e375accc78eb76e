//! Review corpora: CSV ingestion, label/dialect bookkeeping, distributions,
//! stratified splitting, shot sampling, and a synthetic-corpus generator.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod normalize;
mod split;
mod synth;

pub use normalize::{normalize_text, NormalizationOptions};
pub use split::{sample_shots, stratified_split};
pub use synth::{generate_synthetic_corpus, SyntheticSpec};

/// Sentiment label of a review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    /// All labels in canonical order.
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "positive" => Ok(Sentiment::Positive),
            "negative" => Ok(Sentiment::Negative),
            "neutral" => Ok(Sentiment::Neutral),
            other => Err(format!(
                "unknown sentiment `{other}` (expected positive, negative, or neutral)"
            )),
        }
    }
}

/// One hotel review, labeled or unlabeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub text: String,
    pub dialect: String,
    pub sentiment: Option<Sentiment>,
}

impl Review {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        dialect: impl Into<String>,
        sentiment: Option<Sentiment>,
    ) -> Self {
        Review {
            id: id.into(),
            text: text.into(),
            dialect: dialect.into(),
            sentiment,
        }
    }

    /// Sentiment of this review, or an error naming the id.
    pub fn label(&self) -> Result<Sentiment> {
        self.sentiment.ok_or_else(|| Error::Unlabeled(self.id.clone()))
    }
}

/// An ordered collection of reviews with derived label and dialect sets.
///
/// `label_set` and `dialect_set` hold the distinct values occurring in the
/// reviews, in first-occurrence order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    reviews: Vec<Review>,
    label_set: Vec<Sentiment>,
    dialect_set: Vec<String>,
}

impl Corpus {
    /// Builds a corpus, checking id uniqueness and deriving the label and
    /// dialect sets.
    pub fn new(reviews: Vec<Review>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(reviews.len());
        for r in &reviews {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        let mut label_set = Vec::new();
        let mut dialect_set: Vec<String> = Vec::new();
        for r in &reviews {
            if let Some(s) = r.sentiment {
                if !label_set.contains(&s) {
                    label_set.push(s);
                }
            }
            if !dialect_set.iter().any(|d| d == &r.dialect) {
                dialect_set.push(r.dialect.clone());
            }
        }
        Ok(Corpus {
            reviews,
            label_set,
            dialect_set,
        })
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn label_set(&self) -> &[Sentiment] {
        &self.label_set
    }

    pub fn dialect_set(&self) -> &[String] {
        &self.dialect_set
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Review> {
        self.reviews.iter()
    }

    /// Errors with the first unlabeled review's id, if any.
    pub fn require_labeled(&self) -> Result<()> {
        for r in &self.reviews {
            r.label()?;
        }
        Ok(())
    }

    /// Applies text normalization to every review, keeping ids and labels.
    pub fn normalized(&self, options: &NormalizationOptions) -> Corpus {
        let reviews = self
            .reviews
            .iter()
            .map(|r| Review {
                id: r.id.clone(),
                text: normalize_text(&r.text, options),
                dialect: r.dialect.clone(),
                sentiment: r.sentiment,
            })
            .collect();
        // ids unchanged, so reconstruction cannot fail
        Corpus::new(reviews).expect("normalization preserves ids")
    }
}

/// A per-class sample of reviews used as the few-shot training set.
#[derive(Debug, Clone)]
pub struct ShotSet {
    pub reviews: Vec<Review>,
    pub requested_per_class: usize,
    pub seed: u64,
}

impl ShotSet {
    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    /// Distinct labels present, in first-occurrence order.
    pub fn label_set(&self) -> Vec<Sentiment> {
        let mut out = Vec::new();
        for r in &self.reviews {
            if let Some(s) = r.sentiment {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }
}

const COLUMNS: [&str; 4] = ["ID", "Sentiment", "Text", "Dialect"];

/// Reads a corpus from CSV with columns ID, Sentiment, Text, Dialect.
///
/// Column names are matched case-insensitively and may appear in any order.
/// The Sentiment column is optional (prediction-only inputs); an empty
/// sentiment cell yields an unlabeled review. Sentiment values are folded to
/// lowercase before matching.
pub fn load_corpus<R: Read>(reader: R) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let id_col = find("ID").ok_or_else(|| Error::MissingColumn("ID".into()))?;
    let text_col = find("Text").ok_or_else(|| Error::MissingColumn("Text".into()))?;
    let dialect_col = find("Dialect").ok_or_else(|| Error::MissingColumn("Dialect".into()))?;
    let sentiment_col = find("Sentiment");

    let mut reviews = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1; // 1-based data row
        let record = record?;
        let id = record
            .get(id_col)
            .ok_or_else(|| Error::row(row, "missing ID field"))?
            .trim()
            .to_string();
        if id.is_empty() {
            return Err(Error::row(row, "empty ID field"));
        }
        let text = record
            .get(text_col)
            .ok_or_else(|| Error::row(row, "missing Text field"))?
            .to_string();
        let dialect = record
            .get(dialect_col)
            .ok_or_else(|| Error::row(row, "missing Dialect field"))?
            .trim()
            .to_string();
        let sentiment = match sentiment_col.and_then(|c| record.get(c)) {
            None => None,
            Some(raw) if raw.trim().is_empty() => None,
            Some(raw) => Some(
                Sentiment::from_str(raw).map_err(|message| Error::Row { row, message })?,
            ),
        };
        reviews.push(Review {
            id,
            text,
            dialect,
            sentiment,
        });
    }
    Corpus::new(reviews)
}

/// Writes a corpus back out in the canonical column order.
///
/// The Sentiment column is emitted whenever any review is labeled; unlabeled
/// rows get an empty cell.
pub fn save_corpus<W: Write>(corpus: &Corpus, writer: W) -> Result<()> {
    let labeled = corpus.iter().any(|r| r.sentiment.is_some());
    let mut w = csv::Writer::from_writer(writer);
    if labeled {
        w.write_record(COLUMNS)?;
    } else {
        w.write_record(["ID", "Text", "Dialect"])?;
    }
    for r in corpus.iter() {
        if labeled {
            let sentiment = r.sentiment.map(|s| s.as_str()).unwrap_or("");
            w.write_record([r.id.as_str(), sentiment, r.text.as_str(), r.dialect.as_str()])?;
        } else {
            w.write_record([r.id.as_str(), r.text.as_str(), r.dialect.as_str()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Count and fraction for one (sentiment, dialect) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionCell {
    pub sentiment: Sentiment,
    pub dialect: String,
    pub count: usize,
    pub fraction: f64,
}

/// Joint (sentiment, dialect) distribution of a fully labeled corpus.
#[derive(Debug, Clone, Serialize)]
pub struct ClassDistribution {
    /// Cells in label-major order over `label_set x dialect_set`.
    pub cells: Vec<DistributionCell>,
    /// Per-sentiment totals in label_set order: (label, count, fraction).
    pub by_sentiment: Vec<(Sentiment, usize, f64)>,
    pub total: usize,
}

/// Tabulates counts and fractions per (sentiment, dialect) cell.
pub fn class_distribution(corpus: &Corpus) -> Result<ClassDistribution> {
    corpus.require_labeled()?;
    let total = corpus.len();
    let mut cells = Vec::new();
    for &sentiment in corpus.label_set() {
        for dialect in corpus.dialect_set() {
            let count = corpus
                .iter()
                .filter(|r| r.sentiment == Some(sentiment) && &r.dialect == dialect)
                .count();
            cells.push(DistributionCell {
                sentiment,
                dialect: dialect.clone(),
                count,
                fraction: count as f64 / total as f64,
            });
        }
    }
    let by_sentiment = corpus
        .label_set()
        .iter()
        .map(|&s| {
            let count = corpus.iter().filter(|r| r.sentiment == Some(s)).count();
            (s, count, count as f64 / total as f64)
        })
        .collect();
    Ok(ClassDistribution {
        cells,
        by_sentiment,
        total,
    })
}
