//! Markov chains over CAD-model sequences with START and TERMINAL states.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::ModelId;

/// Chain state: the synthetic START, a model, or the TERMINAL absorber.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum State {
    Start,
    Model(ModelId),
    Terminal,
}

/// Row-stochastic transition matrix over the chain states.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub rows: BTreeMap<State, BTreeMap<State, f64>>,
}

impl TransitionMatrix {
    pub fn prob(&self, from: &State, to: &State) -> f64 {
        self.rows
            .get(from)
            .and_then(|r| r.get(to))
            .copied()
            .unwrap_or(0.0)
    }

    /// Every row sums to 1 within `tol`.
    pub fn rows_stochastic(&self, tol: f64) -> bool {
        self.rows
            .values()
            .all(|r| (r.values().sum::<f64>() - 1.0).abs() <= tol)
    }

    /// Models appearing anywhere in the matrix, sorted.
    pub fn models(&self) -> Vec<ModelId> {
        let mut out: Vec<ModelId> = self
            .rows
            .iter()
            .flat_map(|(from, row)| std::iter::once(from).chain(row.keys()))
            .filter_map(|s| match s {
                State::Model(m) => Some(m.clone()),
                _ => None,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Walk the chain from START to TERMINAL, emitting visited models.
    /// `max_len` caps runaway self-transitions.
    pub fn walk<R: Rng + ?Sized>(&self, rng: &mut R, max_len: usize) -> Vec<ModelId> {
        let mut out = Vec::new();
        let mut state = State::Start;
        while out.len() < max_len {
            let Some(row) = self.rows.get(&state) else {
                break;
            };
            let mut u: f64 = rng.random();
            let mut next = State::Terminal;
            for (s, p) in row {
                if u < *p {
                    next = s.clone();
                    break;
                }
                u -= p;
            }
            match next {
                State::Terminal => break,
                State::Model(m) => {
                    out.push(m.clone());
                    state = State::Model(out.last().unwrap().clone());
                }
                State::Start => break,
            }
        }
        out
    }
}

/// Maximum-likelihood transition matrix from model sequences. Includes
/// START -> first and last -> TERMINAL transitions; rows never observed as
/// a source get a point mass on TERMINAL.
pub fn markov_mle(sequences: &[Vec<ModelId>]) -> TransitionMatrix {
    assert!(!sequences.is_empty(), "markov_mle requires sequences");
    let mut counts: BTreeMap<State, BTreeMap<State, u64>> = BTreeMap::new();
    let mut states: Vec<State> = vec![State::Start];
    for seq in sequences {
        let mut prev = State::Start;
        for m in seq {
            let next = State::Model(m.clone());
            *counts
                .entry(prev.clone())
                .or_default()
                .entry(next.clone())
                .or_default() += 1;
            if !states.contains(&next) {
                states.push(next.clone());
            }
            prev = next;
        }
        *counts
            .entry(prev)
            .or_default()
            .entry(State::Terminal)
            .or_default() += 1;
    }

    let mut rows = BTreeMap::new();
    for state in states {
        let row = match counts.get(&state) {
            Some(c) => {
                let total: u64 = c.values().sum();
                c.iter()
                    .map(|(s, &n)| (s.clone(), n as f64 / total as f64))
                    .collect()
            }
            None => {
                let mut terminal = BTreeMap::new();
                terminal.insert(State::Terminal, 1.0);
                terminal
            }
        };
        rows.insert(state, row);
    }
    TransitionMatrix { rows }
}
