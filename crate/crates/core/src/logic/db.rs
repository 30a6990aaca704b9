use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use indexmap::IndexSet;

use crate::term::Term;

/// The fact database: a set of ground terms that remembers insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactDb {
    facts: IndexSet<Term>,
}

impl FactDb {
    pub fn new() -> FactDb {
        FactDb::default()
    }

    /// Adds a fact; returns false if it was already present.
    pub fn insert(&mut self, fact: Term) -> bool {
        self.facts.insert(fact)
    }

    /// Removes a fact, keeping the order of the rest.
    pub fn remove(&mut self, fact: &Term) -> bool {
        self.facts.shift_remove(fact)
    }

    pub fn contains(&self, fact: &Term) -> bool {
        self.facts.contains(fact)
    }

    pub(crate) fn get(&self, index: usize) -> Option<&Term> {
        self.facts.get_index(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Term> {
        self.facts.iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Order-sensitive content hash, stable within a build.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for f in &self.facts {
            f.hash(&mut h);
        }
        self.facts.len().hash(&mut h);
        h.finish()
    }
}

impl FromIterator<Term> for FactDb {
    fn from_iter<I: IntoIterator<Item = Term>>(iter: I) -> Self {
        FactDb { facts: iter.into_iter().collect() }
    }
}

impl<'a> IntoIterator for &'a FactDb {
    type Item = &'a Term;
    type IntoIter = indexmap::set::Iter<'a, Term>;

    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}
