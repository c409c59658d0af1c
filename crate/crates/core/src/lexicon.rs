use std::collections::HashMap;

use crate::data::{normalize_term, phrase_embedding, EmbeddingTable};

/// Dense id of a term interned in a [`Lexicon`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Terms that resolved to an embedding, each with its vector, addressed by [`TermId`].
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    dim: usize,
    terms: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, TermId>,
}

impl Lexicon {
    pub fn new(dim: usize) -> Self {
        Lexicon {
            dim,
            ..Default::default()
        }
    }

    /// Looks the term up (phrase-averaging multi-word terms) and interns it.
    /// `None` when the term has no embedding.
    pub fn resolve(&mut self, term: &str, table: &EmbeddingTable) -> Option<TermId> {
        let term = normalize_term(term);
        if let Some(&id) = self.index.get(&term) {
            return Some(id);
        }
        let vector = phrase_embedding(&term, table)?;
        Some(self.insert_normalized(term, vector))
    }

    /// Interns a term with an explicit vector; an existing entry wins.
    pub fn insert(&mut self, term: &str, vector: Vec<f64>) -> TermId {
        assert_eq!(vector.len(), self.dim, "lexicon vector length");
        let term = normalize_term(term);
        match self.index.get(&term) {
            Some(&id) => id,
            None => self.insert_normalized(term, vector),
        }
    }

    fn insert_normalized(&mut self, term: String, vector: Vec<f64>) -> TermId {
        let id = TermId(u32::try_from(self.terms.len()).expect("lexicon exceeds u32 ids"));
        self.index.insert(term.clone(), id);
        self.terms.push(term);
        self.vectors.push(vector);
        id
    }

    pub fn get(&self, term: &str) -> Option<TermId> {
        self.index.get(&normalize_term(term)).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id.index()]
    }

    pub fn vector(&self, id: TermId) -> &[f64] {
        &self.vectors[id.index()]
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

    /// Resolves a candidate vocabulary, skipping terms without embeddings.
    /// Returns the ids and the number of skipped terms.
    pub fn resolve_all<S: AsRef<str>>(&mut self, terms: &[S], table: &EmbeddingTable) -> (Vec<TermId>, usize) {
        let mut ids = Vec::with_capacity(terms.len());
        let mut seen = std::collections::HashSet::new();
        let mut missing = 0;
        for t in terms {
            match self.resolve(t.as_ref(), table) {
                Some(id) if seen.insert(id) => ids.push(id),
                Some(_) => {}
                None => missing += 1,
            }
        }
        (ids, missing)
    }
}
