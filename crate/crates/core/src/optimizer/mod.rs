// SPDX-License-Identifier: Apache-2.0

//! Applying transformations to circuits and searching for cheaper ones.

mod matcher;
mod search;

pub use matcher::{apply, find_matches, Match};
pub use search::{optimize, OptimizeError, SearchConfig, SearchResult, SearchStats};

use crate::circuit::{Circuit, CircuitDag};
use crate::eccset::EccSet;

/// A pair of equivalent symbolic circuits, applied left to right.
#[derive(Clone, Debug)]
pub struct Transformation {
    pub target: Circuit,
    pub rewrite: Circuit,
    /// Index of the class the pair came from.
    pub ecc: usize,
    pub(crate) pattern: CircuitDag,
}

impl Transformation {
    pub fn new(target: Circuit, rewrite: Circuit, ecc: usize) -> Self {
        let pattern = CircuitDag::from_circuit(&target);
        Transformation { target, rewrite, ecc, pattern }
    }

    /// Gate-count change when applied.
    pub fn delta(&self) -> isize {
        self.rewrite.len() as isize - self.target.len() as isize
    }
}

/// Representative to every other member and back, for every class.
/// Pairs whose target is empty are skipped: an empty pattern matches
/// nowhere in particular.
pub fn extract_transformations(es: &EccSet) -> Vec<Transformation> {
    let mut out = Vec::new();
    for (k, e) in es.eccs.iter().enumerate() {
        let rep = e.representative();
        for other in &e.circuits[1..] {
            if !rep.is_empty() {
                out.push(Transformation::new(rep.clone(), other.clone(), k));
            }
            if !other.is_empty() {
                out.push(Transformation::new(other.clone(), rep.clone(), k));
            }
        }
    }
    out
}
