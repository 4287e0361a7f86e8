//! Plain-text catalog of known difference sets.
//!
//! One set per line, `N K lambda : e1,e2,...,eK`; `#` starts a comment.
//! Entries are re-verified on load, so a corrupt file fails loudly.

use std::path::Path;
use std::sync::OnceLock;

use super::{DifferenceSet, DifferenceSetParams};
use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("catalog.txt");

pub type CatalogEntry = DifferenceSet;

#[derive(Clone, Debug, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

fn parse_line(line: &str, lineno: usize) -> Result<DifferenceSet> {
    let err = |message: String| Error::Catalog { line: lineno, message };
    let (head, tail) = line
        .split_once(':')
        .ok_or_else(|| err("missing ':' separator".into()))?;
    let nums: Vec<usize> = head
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(format!("bad integer {t:?}"))))
        .collect::<Result<_>>()?;
    let [n, k, lambda] = nums[..] else {
        return Err(err(format!("expected `N K lambda`, got {:?}", head.trim())));
    };
    let elements: Vec<usize> = tail
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse().map_err(|_| err(format!("bad element {t:?}")))
        })
        .collect::<Result<_>>()?;
    let params = DifferenceSetParams::new(n, k, lambda).map_err(|e| err(e.to_string()))?;
    if elements.len() != k {
        return Err(err(format!("expected {k} elements, found {}", elements.len())));
    }
    let set = DifferenceSet::new(n, &elements).map_err(|e| err(e.to_string()))?;
    if set.params() != params {
        return Err(err(format!("declared {params} but verified {}", set.params())));
    }
    Ok(set)
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            entries.push(parse_line(line, i + 1)?);
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Catalog shipped with the crate.
    pub fn builtin() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| Catalog::parse(BUILTIN).expect("builtin catalog is valid"))
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn lookup(&self, n: usize, k: usize) -> Option<&DifferenceSet> {
        self.entries.iter().find(|e| e.n() == n && e.k() == k)
    }

    pub fn insert(&mut self, set: DifferenceSet) {
        if self.lookup(set.n(), set.k()).is_none() {
            self.entries.push(set);
        }
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|e| format!("{e}\n")).collect()
    }
}

/// Builtin catalog lookup.
pub fn catalog_lookup(n: usize, k: usize) -> Option<DifferenceSet> {
    Catalog::builtin().lookup(n, k).cloned()
}
