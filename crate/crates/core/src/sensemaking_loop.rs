//! Cue, settle, read out evidence, infer, decide; repeated until the
//! evidence read from memory stops changing.
//!
//! Each round re-settles the cued memory network from the previous round's
//! activations, thresholds the bound attribute units into hard evidence,
//! merges it with the evidence already held and queries the network. The
//! loop halts when a round extracts the same evidence as the round before
//! (the round before the first counts as extracting nothing) or after
//! `max_rounds`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graphical_model::{posterior, BayesNet, Distribution, Evidence, InferenceError};
use crate::memory_network::{CamError, CamNetwork, Cue, SettleResult, SynthesizedSign, UnitKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoopError {
    #[error("invalid loop parameters: {0}")]
    InvalidParams(&'static str),
    #[error("binding refers to unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("binding unit `{0}` is a memory, not an attribute")]
    NotAnAttribute(String),
    #[error("unit `{0}` bound twice")]
    DuplicateBinding(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },
    #[error("decision threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("conflicting evidence for `{variable}`: `{held}` versus `{new}`")]
    ConflictingEvidence {
        variable: String,
        held: String,
        new: String,
    },
    #[error("evidence in round {round} has probability zero")]
    ImpossibleEvidence { round: usize, trace: Vec<RoundTrace> },
    #[error("posterior is over `{found}`, the rule queries `{expected}`")]
    VariableMismatch { expected: String, found: String },
    #[error(transparent)]
    Cam(#[from] CamError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// Maps an attribute unit to a state of a network variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub unit: String,
    pub variable: String,
    pub state_on: String,
    pub state_off: String,
}

impl Binding {
    pub fn new(
        unit: impl Into<String>,
        variable: impl Into<String>,
        state_on: impl Into<String>,
        state_off: impl Into<String>,
    ) -> Self {
        Binding {
            unit: unit.into(),
            variable: variable.into(),
            state_on: state_on.into(),
            state_off: state_off.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    pub query: String,
    pub trigger: String,
    pub threshold: f64,
    pub action_if_high: String,
    pub action_if_low: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopParams {
    pub theta_on: f64,
    pub theta_off: f64,
    pub max_rounds: usize,
}

impl Default for LoopParams {
    fn default() -> Self {
        LoopParams {
            theta_on: 0.5,
            theta_off: 0.0,
            max_rounds: 5,
        }
    }
}

/// A validated network, memory, bindings and decision rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    net: BayesNet,
    cam: CamNetwork,
    bindings: Vec<Binding>,
    rule: DecisionRule,
    params: LoopParams,
}

impl ScenarioSpec {
    pub fn new(
        net: BayesNet,
        cam: CamNetwork,
        bindings: Vec<Binding>,
        rule: DecisionRule,
        params: LoopParams,
    ) -> Result<Self, LoopError> {
        if params.max_rounds == 0 {
            return Err(LoopError::InvalidParams("max_rounds must be at least 1"));
        }
        if params.theta_off.partial_cmp(&params.theta_on) != Some(core::cmp::Ordering::Less) {
            return Err(LoopError::InvalidParams("theta_off must be below theta_on"));
        }
        let dyn_params = cam.params();
        if !(params.theta_on > dyn_params.rest && params.theta_on <= dyn_params.max) {
            return Err(LoopError::InvalidParams("theta_on must lie in (rest, max]"));
        }
        let check_state = |variable: &str, state: &str| -> Result<(), LoopError> {
            let v = net
                .variable(variable)
                .ok_or_else(|| LoopError::UnknownVariable(variable.into()))?;
            v.state_index(state).map(|_| ()).ok_or_else(|| LoopError::UnknownState {
                variable: variable.into(),
                state: state.into(),
            })
        };
        let mut seen = BTreeMap::new();
        for b in &bindings {
            let unit = cam
                .unit(&b.unit)
                .ok_or_else(|| LoopError::UnknownUnit(b.unit.clone()))?;
            if unit.kind != UnitKind::Attribute {
                return Err(LoopError::NotAnAttribute(b.unit.clone()));
            }
            if seen.insert(b.unit.as_str(), ()).is_some() {
                return Err(LoopError::DuplicateBinding(b.unit.clone()));
            }
            check_state(&b.variable, &b.state_on)?;
            check_state(&b.variable, &b.state_off)?;
        }
        check_state(&rule.query, &rule.trigger)?;
        if !(0.0..=1.0).contains(&rule.threshold) {
            return Err(LoopError::InvalidThreshold(rule.threshold));
        }
        let mut bindings = bindings;
        bindings.sort_by(|a, b| a.unit.cmp(&b.unit));
        Ok(ScenarioSpec {
            net,
            cam,
            bindings,
            rule,
            params,
        })
    }

    pub fn net(&self) -> &BayesNet {
        &self.net
    }

    pub fn cam(&self) -> &CamNetwork {
        &self.cam
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn rule(&self) -> &DecisionRule {
        &self.rule
    }

    pub fn params(&self) -> &LoopParams {
        &self.params
    }
}

/// Thresholds settled activations of bound units into hard evidence.
/// Activations strictly between `theta_off` and `theta_on` give nothing.
pub fn extract_evidence(
    settled: &SettleResult,
    bindings: &[Binding],
    theta_on: f64,
    theta_off: f64,
) -> Result<Evidence, LoopError> {
    if theta_off.partial_cmp(&theta_on) != Some(core::cmp::Ordering::Less) {
        return Err(LoopError::InvalidParams("theta_off must be below theta_on"));
    }
    let mut evidence = Evidence::new();
    for b in bindings {
        let a = settled
            .activation(&b.unit)
            .ok_or_else(|| LoopError::UnknownUnit(b.unit.clone()))?;
        let state = if a >= theta_on {
            &b.state_on
        } else if a <= theta_off {
            &b.state_off
        } else {
            continue;
        };
        merge(&mut evidence, &b.variable, state)?;
    }
    Ok(evidence)
}

fn merge(held: &mut Evidence, variable: &str, state: &str) -> Result<(), LoopError> {
    match held.get(variable) {
        Some(prev) if prev != state => Err(LoopError::ConflictingEvidence {
            variable: variable.into(),
            held: prev.into(),
            new: state.into(),
        }),
        Some(_) => Ok(()),
        None => {
            held.insert(variable, state);
            Ok(())
        }
    }
}

/// `action_if_high` when P(query = trigger) is at least the threshold.
pub fn decide<'r>(post: &Distribution, rule: &'r DecisionRule) -> Result<&'r str, LoopError> {
    if post.variable() != rule.query {
        return Err(LoopError::VariableMismatch {
            expected: rule.query.clone(),
            found: post.variable().into(),
        });
    }
    let p = post
        .probability(&rule.trigger)
        .ok_or_else(|| LoopError::UnknownState {
            variable: rule.query.clone(),
            state: rule.trigger.clone(),
        })?;
    Ok(if p >= rule.threshold {
        &rule.action_if_high
    } else {
        &rule.action_if_low
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub round: usize,
    pub settle: SettleResult,
    pub sign: SynthesizedSign,
    /// Evidence read out in this round alone.
    pub extracted: Evidence,
    /// All evidence held after this round.
    pub evidence: Evidence,
    /// Query posterior under `evidence`; absent when the evidence was impossible.
    pub posterior: Option<Distribution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensemakingDecision {
    pub action: String,
    /// Query posterior before any memory evidence.
    pub initial_posterior: Distribution,
    pub posterior: Distribution,
    pub trace: Vec<RoundTrace>,
    pub rounds: usize,
    pub fixpoint: bool,
}

pub fn run_sensemaking(spec: &ScenarioSpec, cue: &Cue) -> Result<SensemakingDecision, LoopError> {
    let p = spec.params;
    let rule = &spec.rule;
    let initial_posterior = posterior(&spec.net, &Evidence::new(), &rule.query)?;

    let mut cam = spec.cam.clamp(cue)?;
    let mut held = Evidence::new();
    let mut previous = Evidence::new();
    let mut trace: Vec<RoundTrace> = Vec::new();
    let mut fixpoint = false;
    let mut current = initial_posterior.clone();

    for round in 1..=p.max_rounds {
        let settle = cam.settle();
        let extracted = extract_evidence(&settle, &spec.bindings, p.theta_on, p.theta_off)?;
        for (v, s) in extracted.iter() {
            merge(&mut held, v, s)?;
        }
        let sign = cam.synthesize_sign(&settle, p.theta_on)?;
        let post = match posterior(&spec.net, &held, &rule.query) {
            Ok(d) => d,
            Err(InferenceError::ImpossibleEvidence) => {
                trace.push(RoundTrace {
                    round,
                    settle,
                    sign,
                    extracted,
                    evidence: held,
                    posterior: None,
                });
                return Err(LoopError::ImpossibleEvidence { round, trace });
            }
            Err(e) => return Err(e.into()),
        };
        current = post.clone();
        let next_cam = cam.with_activations(&settle);
        let done = extracted == previous;
        trace.push(RoundTrace {
            round,
            settle,
            sign,
            extracted: extracted.clone(),
            evidence: held.clone(),
            posterior: Some(post),
        });
        if done {
            fixpoint = true;
            break;
        }
        previous = extracted;
        cam = next_cam;
    }

    let action = decide(&current, rule)?.into();
    Ok(SensemakingDecision {
        action,
        initial_posterior,
        posterior: current,
        rounds: trace.len(),
        trace,
        fixpoint,
    })
}
