use alloc::vec;
use alloc::vec::Vec;

use super::network::BayesNet;

/// Non-negative table over a set of variables, used as the variable
/// elimination workspace.
///
/// `scope` holds network variable indices in ascending order; `values` is
/// row-major over that scope (last variable varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub(crate) fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    /// The CPT of `var` as a factor over its family, with observed variables
    /// sliced out.
    pub(crate) fn from_family(net: &BayesNet, var: usize, observed: &[Option<usize>]) -> Self {
        let fam = net.family(var);
        let card = net.cardinality(var);

        let mut scope: Vec<usize> = fam
            .parents
            .iter()
            .copied()
            .chain(core::iter::once(var))
            .filter(|&v| observed[v].is_none())
            .collect();
        scope.sort_unstable();
        let cards: Vec<usize> = scope.iter().map(|&v| net.cardinality(v)).collect();

        let mut values = Vec::with_capacity(cards.iter().product());
        let mut assignment = vec![0usize; scope.len()];
        let lookup = |assignment: &[usize]| -> usize {
            let state_of = |v: usize| -> usize {
                match observed[v] {
                    Some(s) => s,
                    None => assignment[scope.binary_search(&v).unwrap()],
                }
            };
            let mut row = 0usize;
            for &p in &fam.parents {
                row = row * net.cardinality(p) + state_of(p);
            }
            row * card + state_of(var)
        };
        loop {
            values.push(fam.table[lookup(&assignment)]);
            if !advance(&mut assignment, &cards) {
                break;
            }
        }

        Factor {
            scope,
            cards,
            values,
        }
    }

    pub(crate) fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn contains(&self, var: usize) -> bool {
        self.scope.binary_search(&var).is_ok()
    }

    pub(crate) fn product(&self, other: &Factor) -> Factor {
        let mut scope: Vec<usize> = Vec::with_capacity(self.scope.len() + other.scope.len());
        let mut cards = Vec::with_capacity(scope.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.scope.len() || j < other.scope.len() {
            let take_left = j >= other.scope.len()
                || (i < self.scope.len() && self.scope[i] <= other.scope[j]);
            if take_left {
                if j < other.scope.len() && self.scope[i] == other.scope[j] {
                    j += 1;
                }
                scope.push(self.scope[i]);
                cards.push(self.cards[i]);
                i += 1;
            } else {
                scope.push(other.scope[j]);
                cards.push(other.cards[j]);
                j += 1;
            }
        }

        let left_strides = strides_in(&scope, &self.scope, &self.cards);
        let right_strides = strides_in(&scope, &other.scope, &other.cards);

        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0usize; scope.len()];
        let (mut li, mut ri) = (0usize, 0usize);
        loop {
            values.push(self.values[li] * other.values[ri]);
            // odometer step, keeping both source offsets in sync
            let mut k = scope.len();
            let mut done = true;
            while k > 0 {
                k -= 1;
                assignment[k] += 1;
                li += left_strides[k];
                ri += right_strides[k];
                if assignment[k] < cards[k] {
                    done = false;
                    break;
                }
                li -= left_strides[k] * cards[k];
                ri -= right_strides[k] * cards[k];
                assignment[k] = 0;
            }
            if done {
                break;
            }
        }

        Factor {
            scope,
            cards,
            values,
        }
    }

    pub(crate) fn sum_out(&self, var: usize) -> Factor {
        let Ok(pos) = self.scope.binary_search(&var) else {
            return self.clone();
        };
        let card = self.cards[pos];
        let inner: usize = self.cards[pos + 1..].iter().product();
        let outer: usize = self.cards[..pos].iter().product();

        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = (o * card + s) * inner;
                for k in 0..inner {
                    values[o * inner + k] += self.values[base + k];
                }
            }
        }

        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Factor {
            scope,
            cards,
            values,
        }
    }
}

/// Stride of each variable of `target` inside a factor over `scope`; zero for
/// variables the factor does not mention.
fn strides_in(target: &[usize], scope: &[usize], cards: &[usize]) -> Vec<usize> {
    let mut own = vec![0usize; scope.len()];
    let mut acc = 1usize;
    for k in (0..scope.len()).rev() {
        own[k] = acc;
        acc *= cards[k];
    }
    target
        .iter()
        .map(|v| scope.binary_search(v).map(|k| own[k]).unwrap_or(0))
        .collect()
}

/// Mixed-radix increment, last digit fastest. Returns false on wrap-around.
pub(crate) fn advance(assignment: &mut [usize], cards: &[usize]) -> bool {
    for k in (0..assignment.len()).rev() {
        assignment[k] += 1;
        if assignment[k] < cards[k] {
            return true;
        }
        assignment[k] = 0;
    }
    false
}
