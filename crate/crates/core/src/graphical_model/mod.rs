//! Discrete Bayesian networks with exact inference by variable elimination.

mod elimination;
mod factor;
mod network;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

pub use elimination::{elimination_order, posterior, posterior_with_order, prior_marginals};
pub use network::{BayesNet, Cpt, Variable, ROW_SUM_TOLERANCE};

/// Errors raised while validating a network.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("network has no variables")]
    Empty,
    #[error("variable with an empty name")]
    EmptyName,
    #[error("variable `{0}` has no states")]
    NoStates(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("variable `{variable}` lists state `{state}` twice")]
    DuplicateState { variable: String, state: String },
    #[error("no CPT for variable `{0}`")]
    MissingCpt(String),
    #[error("more than one CPT for variable `{0}`")]
    DuplicateCpt(String),
    #[error("CPT given for undeclared variable `{0}`")]
    CptForUnknownVariable(String),
    #[error("CPT of `{child}` names unknown parent `{parent}`")]
    UnknownParent { child: String, parent: String },
    #[error("CPT of `{child}` lists parent `{parent}` twice")]
    DuplicateParent { child: String, parent: String },
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("CPT of `{child}`: row {row:?} has {} parent states, expected {expected}", row.len())]
    RowArity {
        child: String,
        row: Vec<String>,
        expected: usize,
    },
    #[error("CPT of `{child}`: parent `{parent}` has no state `{state}`")]
    UnknownRowState {
        child: String,
        parent: String,
        state: String,
    },
    #[error("CPT of `{child}`: row {row:?} has {found} entries, expected {expected}")]
    RowWidth {
        child: String,
        row: Vec<String>,
        expected: usize,
        found: usize,
    },
    #[error("CPT of `{child}`: row {row:?} contains {value}, outside [0, 1]")]
    InvalidProbability {
        child: String,
        row: Vec<String>,
        value: f64,
    },
    #[error("CPT of `{child}`: row {row:?} sums to {sum}")]
    RowNotNormalized {
        child: String,
        row: Vec<String>,
        sum: f64,
    },
    #[error("CPT of `{child}` has no row for parent states {row:?}")]
    MissingRow { child: String, row: Vec<String> },
}

/// Errors raised by queries against a valid network.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InferenceError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },
    #[error("evidence has probability zero")]
    ImpossibleEvidence,
    #[error("elimination order is not a permutation of the hidden variables")]
    InvalidOrder,
}

/// Hard evidence: observed state label per variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Evidence {
    assignments: BTreeMap<String, String>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.insert(variable, state);
        self
    }

    /// Sets an observation, returning the state it replaced.
    pub fn insert(&mut self, variable: impl Into<String>, state: impl Into<String>) -> Option<String> {
        self.assignments.insert(variable.into(), state.into())
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.assignments.get(variable).map(String::as_str)
    }

    pub fn contains(&self, variable: &str) -> bool {
        self.assignments.contains_key(variable)
    }

    pub fn remove(&mut self, variable: &str) -> Option<String> {
        self.assignments.remove(variable)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Resolves labels to `(variable index, state index)` pairs.
    pub(crate) fn resolve(&self, net: &BayesNet) -> Result<Vec<Option<usize>>, InferenceError> {
        let mut observed = alloc::vec![None; net.len()];
        for (name, state) in self.iter() {
            let idx = net
                .index_of(name)
                .ok_or_else(|| InferenceError::UnknownVariable(name.into()))?;
            let s = net.variables()[idx]
                .state_index(state)
                .ok_or_else(|| InferenceError::UnknownState {
                    variable: name.into(),
                    state: state.into(),
                })?;
            observed[idx] = Some(s);
        }
        Ok(observed)
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Evidence {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Evidence {
            assignments: iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

/// Probability vector over one variable's states, in declared state order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    variable: String,
    states: Vec<String>,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(variable: impl Into<String>, states: Vec<String>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(states.len(), probs.len());
        Distribution {
            variable: variable.into(),
            states,
            probs,
        }
    }

    /// Point mass on `state`.
    pub(crate) fn degenerate(var: &Variable, state: usize) -> Self {
        let mut probs = alloc::vec![0.0; var.cardinality()];
        probs[state] = 1.0;
        Distribution::new(var.name(), var.states().to_vec(), probs)
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, state: &str) -> Option<f64> {
        self.states.iter().position(|s| s == state).map(|i| self.probs[i])
    }

    /// Largest entrywise difference to `other`; infinite if the two are over
    /// different variables or state lists.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        if self.variable != other.variable || self.states != other.states {
            return f64::INFINITY;
        }
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
