use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::NetworkError;

/// Tolerance on CPT row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A finite-state random variable.
///
/// For the binary fixtures the first state is the "true / present" state, so
/// a prior of `[0.7, 0.3]` reads as P(true) = 0.7.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new<N, S, I>(name: N, states: I) -> Self
    where
        N: Into<String>,
        S: Into<String>,
        I: IntoIterator<Item = S>,
    {
        Variable {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }

    /// Binary variable with states `["1", "0"]`.
    pub fn binary(name: impl Into<String>) -> Self {
        Variable::new(name, ["1", "0"])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// Conditional probability table of one child given its ordered parents.
///
/// Rows are keyed by the tuple of parent state labels, in the parents'
/// declared order. A root variable has a single row keyed by the empty tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    child: String,
    parents: Vec<String>,
    rows: BTreeMap<Vec<String>, Vec<f64>>,
}

impl Cpt {
    pub fn new<C, P, I>(child: C, parents: I) -> Self
    where
        C: Into<String>,
        P: Into<String>,
        I: IntoIterator<Item = P>,
    {
        Cpt {
            child: child.into(),
            parents: parents.into_iter().map(Into::into).collect(),
            rows: BTreeMap::new(),
        }
    }

    /// Root prior: a CPT with no parents and one row.
    pub fn prior(child: impl Into<String>, probs: &[f64]) -> Self {
        let mut cpt = Cpt::new(child, core::iter::empty::<String>());
        cpt.insert_row(Vec::new(), probs.to_vec());
        cpt
    }

    /// Adds a row; later rows for the same key replace earlier ones.
    pub fn with_row(mut self, given: &[&str], probs: &[f64]) -> Self {
        self.insert_row(given.iter().map(|s| s.to_string()).collect(), probs.to_vec());
        self
    }

    pub fn insert_row(&mut self, given: Vec<String>, probs: Vec<f64>) -> Option<Vec<f64>> {
        self.rows.insert(given, probs)
    }

    pub fn child(&self) -> &str {
        &self.child
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    /// Rows in lexicographic order of their parent-state key.
    pub fn rows(&self) -> impl Iterator<Item = (&[String], &[f64])> {
        self.rows.iter().map(|(k, v)| (k.as_slice(), v.as_slice()))
    }

    pub fn row(&self, given: &[String]) -> Option<&[f64]> {
        self.rows.get(given).map(Vec::as_slice)
    }
}

/// A validated discrete Bayesian network.
///
/// Variables are stored sorted by name; every index used by the inference
/// code refers to that order.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    index: BTreeMap<String, usize>,
    families: Vec<Family>,
}

/// Dense form of one CPT: `table[row * card + child_state]`, where `row` is
/// the mixed-radix index of the parent states in declared parent order with
/// the last parent varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Family {
    pub(crate) parents: Vec<usize>,
    pub(crate) table: Vec<f64>,
}

impl BayesNet {
    /// Validates variables and CPTs and derives the edge set.
    pub fn new(variables: Vec<Variable>, cpts: Vec<Cpt>) -> Result<Self, NetworkError> {
        if variables.is_empty() {
            return Err(NetworkError::Empty);
        }

        let mut by_name: BTreeMap<String, Variable> = BTreeMap::new();
        for var in variables {
            if var.name.is_empty() {
                return Err(NetworkError::EmptyName);
            }
            if var.states.is_empty() {
                return Err(NetworkError::NoStates(var.name));
            }
            let mut seen = BTreeSet::new();
            for s in &var.states {
                if !seen.insert(s.as_str()) {
                    return Err(NetworkError::DuplicateState {
                        variable: var.name.clone(),
                        state: s.clone(),
                    });
                }
            }
            if by_name.contains_key(&var.name) {
                return Err(NetworkError::DuplicateVariable(var.name));
            }
            by_name.insert(var.name.clone(), var);
        }

        let mut cpt_by_child: BTreeMap<String, Cpt> = BTreeMap::new();
        for cpt in cpts {
            if !by_name.contains_key(&cpt.child) {
                return Err(NetworkError::CptForUnknownVariable(cpt.child));
            }
            if cpt_by_child.contains_key(&cpt.child) {
                return Err(NetworkError::DuplicateCpt(cpt.child));
            }
            cpt_by_child.insert(cpt.child.clone(), cpt);
        }

        let variables: Vec<Variable> = by_name.into_values().collect();
        let index: BTreeMap<String, usize> = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();

        let mut ordered_cpts = Vec::with_capacity(variables.len());
        for var in &variables {
            let cpt = cpt_by_child
                .remove(&var.name)
                .ok_or_else(|| NetworkError::MissingCpt(var.name.clone()))?;
            let mut seen = BTreeSet::new();
            for p in &cpt.parents {
                if !index.contains_key(p) {
                    return Err(NetworkError::UnknownParent {
                        child: var.name.clone(),
                        parent: p.clone(),
                    });
                }
                if !seen.insert(p.as_str()) {
                    return Err(NetworkError::DuplicateParent {
                        child: var.name.clone(),
                        parent: p.clone(),
                    });
                }
            }
            ordered_cpts.push(cpt);
        }

        if let Some(cycle) = find_cycle(&variables, &ordered_cpts, &index) {
            return Err(NetworkError::CycleDetected(cycle));
        }

        let mut families = Vec::with_capacity(variables.len());
        for (var, cpt) in variables.iter().zip(&ordered_cpts) {
            families.push(densify(var, cpt, &variables, &index)?);
        }

        Ok(BayesNet {
            variables,
            cpts: ordered_cpts,
            index,
            families,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    /// CPTs, aligned with [`BayesNet::variables`].
    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.index.get(name).map(|&i| &self.variables[i])
    }

    pub fn cpt(&self, name: &str) -> Option<&Cpt> {
        self.index.get(name).map(|&i| &self.cpts[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// Directed edges `(parent, child)`, sorted.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut edges: Vec<(String, String)> = self
            .cpts
            .iter()
            .flat_map(|c| c.parents.iter().map(move |p| (p.clone(), c.child.clone())))
            .collect();
        edges.sort();
        edges
    }

    pub(crate) fn family(&self, var: usize) -> &Family {
        &self.families[var]
    }

    pub(crate) fn cardinality(&self, var: usize) -> usize {
        self.variables[var].cardinality()
    }
}

fn find_cycle(
    variables: &[Variable],
    cpts: &[Cpt],
    index: &BTreeMap<String, usize>,
) -> Option<Vec<String>> {
    // children adjacency, sorted for a deterministic report
    let n = variables.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (child, cpt) in cpts.iter().enumerate() {
        for p in &cpt.parents {
            children[index[p]].push(child);
        }
    }
    for c in &mut children {
        c.sort_unstable();
    }

    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    let mut stack: Vec<usize> = Vec::new();
    for start in 0..n {
        if color[start] != 0 {
            continue;
        }
        let mut frames: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = 1;
        stack.push(start);
        while let Some(&mut (node, ref mut next)) = frames.last_mut() {
            if *next < children[node].len() {
                let child = children[node][*next];
                *next += 1;
                match color[child] {
                    0 => {
                        color[child] = 1;
                        stack.push(child);
                        frames.push((child, 0));
                    }
                    1 => {
                        let pos = stack.iter().position(|&v| v == child).unwrap_or(0);
                        let mut cycle: Vec<String> = stack[pos..]
                            .iter()
                            .map(|&v| variables[v].name.clone())
                            .collect();
                        cycle.push(variables[child].name.clone());
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                color[node] = 2;
                stack.pop();
                frames.pop();
            }
        }
    }
    None
}

fn densify(
    var: &Variable,
    cpt: &Cpt,
    variables: &[Variable],
    index: &BTreeMap<String, usize>,
) -> Result<Family, NetworkError> {
    let parents: Vec<usize> = cpt.parents.iter().map(|p| index[p]).collect();
    let card = var.cardinality();
    let n_rows: usize = parents.iter().map(|&p| variables[p].cardinality()).product();
    let mut table = vec![0.0; n_rows * card];
    let mut filled = vec![false; n_rows];

    for (given, probs) in &cpt.rows {
        if given.len() != parents.len() {
            return Err(NetworkError::RowArity {
                child: var.name.clone(),
                row: given.clone(),
                expected: parents.len(),
            });
        }
        let mut row = 0usize;
        for (label, &p) in given.iter().zip(&parents) {
            let pv = &variables[p];
            let s = pv.state_index(label).ok_or_else(|| NetworkError::UnknownRowState {
                child: var.name.clone(),
                parent: pv.name.clone(),
                state: label.clone(),
            })?;
            row = row * pv.cardinality() + s;
        }
        if probs.len() != card {
            return Err(NetworkError::RowWidth {
                child: var.name.clone(),
                row: given.clone(),
                expected: card,
                found: probs.len(),
            });
        }
        for &p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(NetworkError::InvalidProbability {
                    child: var.name.clone(),
                    row: given.clone(),
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(NetworkError::RowNotNormalized {
                child: var.name.clone(),
                row: given.clone(),
                sum,
            });
        }
        table[row * card..(row + 1) * card].copy_from_slice(probs);
        filled[row] = true;
    }

    if let Some(missing) = filled.iter().position(|f| !f) {
        return Err(NetworkError::MissingRow {
            child: var.name.clone(),
            row: row_labels(missing, &parents, variables),
        });
    }

    Ok(Family { parents, table })
}

fn row_labels(mut row: usize, parents: &[usize], variables: &[Variable]) -> Vec<String> {
    let mut labels = vec![String::new(); parents.len()];
    for (slot, &p) in labels.iter_mut().zip(parents).rev() {
        let card = variables[p].cardinality();
        *slot = variables[p].states[row % card].clone();
        row /= card;
    }
    labels
}
