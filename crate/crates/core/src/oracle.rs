//! Brute-force references for both engines.
//!
//! [`enumerate_joint`] sums the full joint distribution read straight from
//! the CPT label rows, sharing no code with variable elimination.
//! [`min_energy_states`] searches every on/off pattern of the free units of
//! a memory network.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graphical_model::{BayesNet, Distribution, Evidence, InferenceError};
use crate::memory_network::{CamError, CamNetwork, SettleResult, UnitKind};

/// Largest joint table [`joint_table`] will build.
pub const MAX_JOINT_SIZE: usize = 1 << 22;
/// Largest number of free units [`min_energy_states`] will search.
pub const MAX_FREE_UNITS: usize = 20;
/// Relative tolerance under which two pattern energies count as tied.
pub const ENERGY_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("search space of {0} states is too large for exhaustive enumeration")]
    TooLarge(u128),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Cam(#[from] CamError),
}

/// Full joint distribution over every variable, in network (name) order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub variables: Vec<String>,
    pub cardinalities: Vec<usize>,
    /// Row-major, last variable fastest.
    pub probabilities: Vec<f64>,
}

impl JointTable {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// State indices of joint entry `k`.
    pub fn assignment(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.cardinalities.len()];
        for (slot, &c) in out.iter_mut().zip(&self.cardinalities).rev() {
            *slot = k % c;
            k /= c;
        }
        out
    }
}

pub fn joint_table(net: &BayesNet) -> Result<JointTable, OracleError> {
    let vars = net.variables();
    let cards: Vec<usize> = vars.iter().map(|v| v.cardinality()).collect();
    let size = cards.iter().try_fold(1u128, |acc, &c| {
        let next = acc * c as u128;
        (next <= MAX_JOINT_SIZE as u128).then_some(next)
    });
    let Some(size) = size else {
        let full = cards.iter().fold(1u128, |a, &c| a.saturating_mul(c as u128));
        return Err(OracleError::TooLarge(full));
    };

    // per CPT: child position and parent positions in the joint
    let families: Vec<(usize, Vec<usize>)> = net
        .cpts()
        .iter()
        .map(|cpt| {
            let child = net.index_of(cpt.child()).expect("validated network");
            let parents = cpt
                .parents()
                .iter()
                .map(|p| net.index_of(p).expect("validated network"))
                .collect();
            (child, parents)
        })
        .collect();

    let mut probabilities = Vec::with_capacity(size as usize);
    let mut given: Vec<String> = Vec::new();
    for k in 0..size as usize {
        let mut state = vec![0usize; cards.len()];
        let mut rem = k;
        for (slot, &c) in state.iter_mut().zip(&cards).rev() {
            *slot = rem % c;
            rem /= c;
        }
        let mut p = 1.0;
        for (cpt, (child, parents)) in net.cpts().iter().zip(&families) {
            given.clear();
            given.extend(parents.iter().map(|&q| vars[q].states()[state[q]].clone()));
            let row = cpt.row(&given).expect("validated network has every row");
            p *= row[state[*child]];
        }
        probabilities.push(p);
    }
    Ok(JointTable {
        variables: vars.iter().map(|v| v.name().into()).collect(),
        cardinalities: cards,
        probabilities,
    })
}

/// P(query | evidence) by summing the full joint.
pub fn enumerate_joint(
    net: &BayesNet,
    evidence: &Evidence,
    query: &str,
) -> Result<Distribution, OracleError> {
    let q = net
        .index_of(query)
        .ok_or_else(|| InferenceError::UnknownVariable(query.into()))?;
    let mut observed = vec![None; net.len()];
    for (name, state) in evidence.iter() {
        let i = net
            .index_of(name)
            .ok_or_else(|| InferenceError::UnknownVariable(name.into()))?;
        let s = net.variables()[i]
            .state_index(state)
            .ok_or_else(|| InferenceError::UnknownState {
                variable: name.into(),
                state: state.into(),
            })?;
        observed[i] = Some(s);
    }

    let joint = joint_table(net)?;
    let var = &net.variables()[q];
    let mut mass = vec![0.0; var.cardinality()];
    for (k, &p) in joint.probabilities.iter().enumerate() {
        let a = joint.assignment(k);
        if observed.iter().zip(&a).all(|(o, s)| o.is_none_or(|o| o == *s)) {
            mass[a[q]] += p;
        }
    }
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return Err(InferenceError::ImpossibleEvidence.into());
    }
    let probs = mass.iter().map(|m| m / total).collect();
    Ok(Distribution::new(var.name(), var.states().to_vec(), probs))
}

/// Discrete energy of every on/off pattern of the free units.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLandscape {
    /// Free unit names, in name order.
    pub free_units: Vec<String>,
    /// Energy per pattern; bit `k` of the index is `free_units[k]`.
    pub energies: Vec<f64>,
    pub min_energy: f64,
    /// Minimizing patterns as `on` flags over `free_units`, ordered
    /// lexicographically by their sets of active unit names.
    pub minimizers: Vec<Vec<bool>>,
}

impl EnergyLandscape {
    /// Names of the active free units in a minimizer.
    pub fn active_units(&self, pattern: &[bool]) -> Vec<&str> {
        self.free_units
            .iter()
            .zip(pattern)
            .filter(|(_, &on)| on)
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

/// Exhaustive minimum of [`CamNetwork::discrete_energy`] over the free
/// units, with clamps taken from the network.
pub fn min_energy_states(cam: &CamNetwork, theta_on: f64) -> Result<EnergyLandscape, OracleError> {
    let free: Vec<usize> = (0..cam.len()).filter(|&i| cam.units()[i].clamp.is_none()).collect();
    if free.len() > MAX_FREE_UNITS {
        return Err(OracleError::TooLarge(1u128 << free.len()));
    }
    let mut on = vec![false; cam.len()];
    let mut energies = Vec::with_capacity(1 << free.len());
    for bits in 0..1usize << free.len() {
        for (k, &i) in free.iter().enumerate() {
            on[i] = bits >> k & 1 == 1;
        }
        energies.push(cam.discrete_energy(&on, theta_on)?);
    }
    let min_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = ENERGY_TIE_TOLERANCE * min_energy.abs().max(1.0);
    let mut minimizers: Vec<Vec<bool>> = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e <= min_energy + slack)
        .map(|(bits, _)| (0..free.len()).map(|k| bits >> k & 1 == 1).collect())
        .collect();
    let free_units: Vec<String> = free.iter().map(|&i| cam.units()[i].name.clone()).collect();
    minimizers.sort_by(|a, b| {
        let names = |p: &Vec<bool>| -> Vec<&String> {
            free_units.iter().zip(p).filter(|(_, &on)| on).map(|(n, _)| n).collect()
        };
        names(a).cmp(&names(b))
    });
    Ok(EnergyLandscape {
        free_units,
        energies,
        min_energy,
        minimizers,
    })
}

/// Whether thresholding `settled` at `theta_on` gives the attribute pattern
/// of some minimizer in `landscape`. Memory units are not compared.
pub fn settled_matches_minimizer(
    cam: &CamNetwork,
    settled: &SettleResult,
    landscape: &EnergyLandscape,
    theta_on: f64,
) -> bool {
    let attribute_slots: Vec<(usize, usize)> = landscape
        .free_units
        .iter()
        .enumerate()
        .filter_map(|(k, name)| {
            let i = cam.index_of(name)?;
            (cam.units()[i].kind == UnitKind::Attribute).then_some((k, i))
        })
        .collect();
    let a = settled.activations();
    landscape
        .minimizers
        .iter()
        .any(|m| attribute_slots.iter().all(|&(k, i)| m[k] == (a[i] >= theta_on)))
}

/// Largest deviation between variable elimination and enumeration over
/// every variable of `net` under `evidence`.
pub fn max_deviation(net: &BayesNet, evidence: &Evidence) -> Result<f64, OracleError> {
    let mut worst = 0.0f64;
    for v in net.variables() {
        let fast = crate::graphical_model::posterior(net, evidence, v.name())?;
        let slow = enumerate_joint(net, evidence, v.name())?;
        worst = worst.max(fast.max_abs_diff(&slow));
    }
    Ok(worst)
}
