//! Embedding tables exported by an external encoder, answering
//! encode-by-id lookups.

use std::collections::HashMap;
use std::io::Read;

use serde::Deserialize;

use crate::corpus::Review;
use crate::error::{Error, Result};

use super::{ReviewEmbedder, SentenceEmbedding};

/// A fixed id-to-vector table. Exposes no trainable parameters, so pipelines
/// using it skip the contrastive stage and train the head only.
#[derive(Debug, Clone)]
pub struct PrecomputedProvider {
    dim: usize,
    table: HashMap<String, Vec<f32>>,
}

impl PrecomputedProvider {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Stored vector for `id`, or an error naming the id.
    pub fn lookup(&self, id: &str) -> Result<&[f32]> {
        self.table
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    fn insert(&mut self, id: String, vec: Vec<f32>) -> Result<()> {
        if self.table.is_empty() {
            self.dim = vec.len();
        } else if vec.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: vec.len(),
            });
        }
        if self.table.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.table.insert(id, vec);
        Ok(())
    }
}

impl ReviewEmbedder for PrecomputedProvider {
    fn embedding_dim(&self) -> usize {
        self.dim
    }

    fn embed_review(&self, review: &Review) -> Result<SentenceEmbedding> {
        Ok(SentenceEmbedding {
            vector: self.lookup(&review.id)?.to_vec(),
            source_id: review.id.clone(),
        })
    }
}

#[derive(Deserialize)]
struct JsonRow {
    id: String,
    vec: Vec<f32>,
}

/// Loads an embedding table from CSV (`id,v1,...,vd`) or JSON-lines
/// (`{"id": ..., "vec": [...]}`), auto-detected by the first byte.
pub fn load_precomputed_provider<R: Read>(mut reader: R) -> Result<PrecomputedProvider> {
    let mut content = String::new();
    reader.read_to_string(&mut content)?;
    let first = content.trim_start().bytes().next();
    let mut provider = PrecomputedProvider {
        dim: 0,
        table: HashMap::new(),
    };
    match first {
        None => return Err(Error::Config("embedding table is empty".into())),
        Some(b'{') => {
            for (i, line) in content.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let row: JsonRow = serde_json::from_str(line)
                    .map_err(|e| Error::row(i + 1, format!("bad embedding record: {e}")))?;
                provider.insert(row.id, row.vec)?;
            }
        }
        Some(_) => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .from_reader(content.as_bytes());
            for (i, record) in rdr.records().enumerate() {
                let record = record?;
                if record.len() < 2 {
                    return Err(Error::row(i + 1, "expected id plus at least one value"));
                }
                let values: std::result::Result<Vec<f32>, _> =
                    record.iter().skip(1).map(str::parse::<f32>).collect();
                match values {
                    Ok(vec) => {
                        provider.insert(record[0].trim().to_string(), vec)?;
                    }
                    // a non-numeric first row is a header
                    Err(_) if i == 0 => continue,
                    Err(e) => {
                        return Err(Error::row(i + 1, format!("bad float: {e}")));
                    }
                }
            }
        }
    }
    if provider.is_empty() {
        return Err(Error::Config(
            "embedding table holds no rows; dimension undeterminable".into(),
        ));
    }
    Ok(provider)
}
