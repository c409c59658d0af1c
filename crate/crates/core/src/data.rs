//! Text formats: word embeddings, SemEval-style query/gold files, candidate
//! vocabularies and prediction files.
//!
//! All terms go through [`normalize_term`] at parse time, so lookups across
//! files agree on casing and on the underscore/space spelling of multi-word
//! terms.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

/// Lowercases, maps `_` to spaces and collapses runs of whitespace.
pub fn normalize_term(raw: &str) -> String {
    let lowered = raw.replace('_', " ").to_lowercase();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Pretrained word vectors keyed by normalized term, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    terms: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            terms: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Inserts a vector under the normalized term. Returns `false` and keeps
    /// the existing entry when the term is already present.
    pub fn insert(&mut self, term: &str, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "embedding vector",
                expected: self.dim,
                found: vector.len(),
            });
        }
        let term = normalize_term(term);
        if term.is_empty() {
            return Err(Error::InvalidConfig("empty embedding term".into()));
        }
        if self.index.contains_key(&term) {
            return Ok(false);
        }
        self.index.insert(term.clone(), self.terms.len());
        self.terms.push(term);
        self.vectors.push(vector);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact lookup of an already-normalized term.
    pub fn get(&self, term: &str) -> Option<&[f64]> {
        self.index.get(term).map(|&i| self.vectors[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.terms
            .iter()
            .map(String::as_str)
            .zip(self.vectors.iter().map(Vec::as_slice))
    }
}

/// Reads the whitespace-separated text format, with or without a
/// `count dim` header line.
pub fn parse_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(BufReader::new(file), path)
}

pub fn read_embeddings(reader: impl BufRead, path: &Path) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    let mut header: Option<(usize, usize)> = None;
    let mut duplicates = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if lineno == 1 && fields.len() == 2 {
            if let (Ok(count), Ok(dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                if dim == 0 {
                    return Err(Error::parse(path, lineno, "header declares dimension 0"));
                }
                header = Some((count, dim));
                table = Some(EmbeddingTable::new(dim));
                continue;
            }
        }
        if fields.len() < 2 {
            return Err(Error::parse(path, lineno, "expected a term followed by its vector"));
        }
        let values = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(path, lineno, format!("invalid float {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let table = table.get_or_insert_with(|| EmbeddingTable::new(values.len()));
        if values.len() != table.dim() {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} components, found {}", table.dim(), values.len()),
            ));
        }
        if normalize_term(fields[0]).is_empty() {
            return Err(Error::parse(path, lineno, "empty term"));
        }
        if !table.insert(fields[0], values)? {
            duplicates += 1;
            warn!(
                "{}:{lineno}: duplicate term {:?}, keeping the first",
                path.display(),
                fields[0]
            );
        }
    }

    let table = table.ok_or_else(|| Error::parse(path, 0, "no embeddings found"))?;
    if let Some((count, _)) = header {
        if count != table.len() + duplicates {
            warn!(
                "{}: header announces {count} vectors, file holds {}",
                path.display(),
                table.len() + duplicates
            );
        }
    }
    Ok(table)
}

/// Writes the table with a `count dim` header; multi-word terms get underscores.
pub fn write_embeddings(table: &EmbeddingTable, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{} {}", table.len(), table.dim())?;
    for (term, vector) in table.iter() {
        write!(out, "{}", term.replace(' ', "_"))?;
        for v in vector {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Exact lookup, then the mean of the token vectors for multi-word terms
/// whose tokens are all present.
pub fn phrase_embedding(term: &str, table: &EmbeddingTable) -> Option<Vec<f64>> {
    let term = normalize_term(term);
    if let Some(v) = table.get(&term) {
        return Some(v.to_vec());
    }
    let tokens: Vec<&str> = term.split(' ').collect();
    if tokens.len() < 2 {
        return None;
    }
    let mut sum = vec![0.0; table.dim()];
    for token in &tokens {
        for (s, x) in sum.iter_mut().zip(table.get(token)?) {
            *s += x;
        }
    }
    let n = tokens.len() as f64;
    Some(sum.into_iter().map(|s| s / n).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub term: String,
    /// Second column of the query file (`Concept`, `Entity`, ...); empty if absent.
    pub kind: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuerySet {
    pub queries: Vec<Query>,
}

impl QuerySet {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }
}

/// One deduplicated, ordered hypernym list per query line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldStandard {
    pub hypernyms: Vec<Vec<String>>,
}

impl GoldStandard {
    pub fn len(&self) -> usize {
        self.hypernyms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypernyms.is_empty()
    }

    pub fn num_pairs(&self) -> usize {
        self.hypernyms.iter().map(Vec::len).sum()
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

pub fn parse_queries(path: impl AsRef<Path>) -> Result<QuerySet> {
    let path = path.as_ref();
    let queries = read_lines(path)?
        .iter()
        .enumerate()
        .map(|(idx, line)| {
            let mut cols = line.trim().split('\t');
            let term = normalize_term(cols.next().unwrap_or_default());
            if term.is_empty() {
                return Err(Error::parse(path, idx + 1, "empty query line"));
            }
            let kind = cols.next().unwrap_or_default().trim().to_string();
            Ok(Query { term, kind })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuerySet { queries })
}

/// Splits a tab-separated line into normalized, deduplicated terms.
pub fn split_terms(line: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    line.split('\t')
        .map(normalize_term)
        .filter(|t| !t.is_empty() && seen.insert(t.clone()))
        .collect()
}

pub fn parse_gold(path: impl AsRef<Path>) -> Result<GoldStandard> {
    let hypernyms = read_lines(path.as_ref())?.iter().map(|l| split_terms(l)).collect();
    Ok(GoldStandard { hypernyms })
}

/// Prediction files share the gold layout: one tab-separated line per query.
pub fn parse_predictions(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    Ok(read_lines(path.as_ref())?.iter().map(|l| split_terms(l)).collect())
}

/// Newline-separated candidate vocabulary, deduplicated, blank lines skipped.
pub fn parse_candidates(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let mut seen = HashSet::new();
    Ok(read_lines(path.as_ref())?
        .iter()
        .map(|l| normalize_term(l))
        .filter(|t| !t.is_empty() && seen.insert(t.clone()))
        .collect())
}

/// One line per query, terms tab-separated in rank order.
pub fn write_predictions<S: AsRef<str>>(lines: &[Vec<S>], mut out: impl Write) -> std::io::Result<()> {
    for terms in lines {
        let mut first = true;
        for t in terms {
            if !first {
                out.write_all(b"\t")?;
            }
            out.write_all(t.as_ref().as_bytes())?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
