//! Lexicographic backtracking search for cyclic difference sets.
//!
//! Translates of a difference set are difference sets, so the search fixes
//! `0` as the smallest element and grows strictly increasing candidates.
//! A partial set is pruned as soon as some difference occurs more than `λ`
//! times. The first hit in lexicographic order is returned.

use serde::Serialize;

use super::{DifferenceSet, DifferenceSetParams};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found { set: DifferenceSet, nodes: u64 },
    /// The whole tree was explored without a hit.
    ProvenNonexistent { nodes: u64 },
    NotFoundWithinBudget { nodes: u64 },
}

impl SearchOutcome {
    pub fn found(&self) -> Option<&DifferenceSet> {
        match self {
            SearchOutcome::Found { set, .. } => Some(set),
            _ => None,
        }
    }

    pub fn nodes(&self) -> u64 {
        match *self {
            SearchOutcome::Found { nodes, .. }
            | SearchOutcome::ProvenNonexistent { nodes }
            | SearchOutcome::NotFoundWithinBudget { nodes } => nodes,
        }
    }
}

struct Search {
    n: usize,
    k: usize,
    lambda: usize,
    budget: u64,
    nodes: u64,
    chosen: Vec<usize>,
    counts: Vec<usize>,
}

enum Step {
    Found,
    Exhausted,
    OutOfBudget,
}

impl Search {
    /// Adds `e` and its differences; returns false (state untouched) if
    /// some count would exceed λ.
    fn push(&mut self, e: usize) -> bool {
        let n = self.n;
        let mut i = 0;
        while i < self.chosen.len() {
            let c = self.chosen[i];
            let d1 = (e + n - c) % n;
            let d2 = n - d1;
            self.counts[d1] += 1;
            self.counts[d2] += 1;
            if self.counts[d1] > self.lambda || self.counts[d2] > self.lambda {
                self.undo(e, i + 1);
                return false;
            }
            i += 1;
        }
        self.chosen.push(e);
        true
    }

    fn undo(&mut self, e: usize, upto: usize) {
        let n = self.n;
        for &c in &self.chosen[..upto] {
            let d1 = (e + n - c) % n;
            self.counts[d1] -= 1;
            self.counts[n - d1] -= 1;
        }
    }

    fn pop(&mut self) {
        let e = self.chosen.pop().expect("pop on empty search stack");
        self.undo(e, self.chosen.len());
    }

    fn descend(&mut self) -> Step {
        if self.chosen.len() == self.k {
            return Step::Found;
        }
        let last = *self.chosen.last().expect("search starts from {0}");
        let remaining = self.k - self.chosen.len();
        // keep room for the remaining elements
        let hi = self.n - remaining + 1;
        for e in last + 1..hi {
            if self.nodes >= self.budget {
                return Step::OutOfBudget;
            }
            self.nodes += 1;
            if !self.push(e) {
                continue;
            }
            match self.descend() {
                Step::Exhausted => self.pop(),
                other => return other,
            }
        }
        Step::Exhausted
    }
}

/// Searches for a set with the given (already certified) parameters,
/// visiting at most `budget` candidate placements.
pub fn exhaustive_search(params: &DifferenceSetParams, budget: u64) -> SearchOutcome {
    let (n, k, lambda) = (params.n(), params.k(), params.lambda());
    let mut s = Search {
        n,
        k,
        lambda,
        budget,
        nodes: 0,
        chosen: vec![0],
        counts: vec![0; n],
    };
    match s.descend() {
        Step::Found => {
            let set = DifferenceSet::new(n, &s.chosen).expect("search produced an invalid set");
            SearchOutcome::Found { set, nodes: s.nodes }
        }
        Step::Exhausted => SearchOutcome::ProvenNonexistent { nodes: s.nodes },
        Step::OutOfBudget => SearchOutcome::NotFoundWithinBudget { nodes: s.nodes },
    }
}

/// Like [`exhaustive_search`] but accepts raw parameters; triples that fail
/// the counting identities are reported as nonexistent without searching.
pub fn search_parameters(n: usize, k: usize, lambda: usize, budget: u64) -> SearchOutcome {
    match DifferenceSetParams::new(n, k, lambda) {
        Ok(p) => exhaustive_search(&p, budget),
        Err(_) => SearchOutcome::ProvenNonexistent { nodes: 0 },
    }
}
