//! JSON scenario files.
//!
//! A scenario bundles a network (either plain `variables` plus `cpts`, or
//! `frames` plus `relations` plus `cpts`), a memory store (`memories`,
//! `incompatible`), the `bindings` between them, a `decision` rule,
//! `params` and a default `cue`. Every section is optional, but the
//! sections that are present must agree with each other. See
//! `docs/scenario-format.md` for the full layout.

use std::collections::BTreeSet;
use std::fmt;

use sensemaking_core::frame_semantics::{compile_to_bn, CompiledFrames, Frame, FrameError, FrameGraph};
use sensemaking_core::graphical_model::{BayesNet, Cpt, NetworkError, Variable, ROW_SUM_TOLERANCE};
use sensemaking_core::memory_network::{CamError, CamNetwork, Cue, DynamicsParams, WeightConfig};
use sensemaking_core::sensemaking_loop::{Binding, DecisionRule, LoopError, LoopParams, ScenarioSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Free-form remarks, e.g. which CPT cells were fitted.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variables: Vec<VariableDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cpts: Vec<CptDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frames: Vec<FrameDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub memories: Vec<MemoryDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub incompatible: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bindings: Vec<BindingDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<DecisionDecl>,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cue: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptDecl {
    pub child: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub rows: Vec<RowDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowDecl {
    /// Parent states, in the order of `parents`.
    #[serde(default)]
    pub given: Vec<String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDecl {
    pub name: String,
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDecl {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryDecl {
    pub name: String,
    pub attributes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingDecl {
    pub unit: String,
    pub variable: String,
    pub on: String,
    pub off: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionDecl {
    pub query: String,
    pub trigger: String,
    pub threshold: f64,
    pub action_if_high: String,
    pub action_if_low: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightOverride {
    pub a: String,
    pub b: String,
    pub weight: f64,
}

/// Tuning knobs; anything left out takes the engine default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excitatory: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inhibitory: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weight_overrides: Vec<WeightOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_on: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_off: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
}

impl Params {
    fn is_empty(&self) -> bool {
        *self == Params::default()
    }

    pub fn dynamics(&self) -> DynamicsParams {
        let d = DynamicsParams::default();
        DynamicsParams {
            step: self.step.unwrap_or(d.step),
            decay: self.decay.unwrap_or(d.decay),
            max: self.a_max.unwrap_or(d.max),
            min: self.a_min.unwrap_or(d.min),
            rest: self.rest.unwrap_or(d.rest),
            tolerance: self.tol.unwrap_or(d.tolerance),
            max_sweeps: self.max_sweeps.unwrap_or(d.max_sweeps),
        }
    }

    pub fn weights(&self) -> WeightConfig {
        let d = WeightConfig::default();
        WeightConfig {
            excitatory: self.excitatory.unwrap_or(d.excitatory),
            inhibitory: self.inhibitory.unwrap_or(d.inhibitory),
            normalize: self.normalize.unwrap_or(d.normalize),
            overrides: self
                .weight_overrides
                .iter()
                .map(|o| ((o.a.clone(), o.b.clone()), o.weight))
                .collect(),
        }
    }

    pub fn loop_params(&self) -> LoopParams {
        let d = LoopParams::default();
        LoopParams {
            theta_on: self.theta_on.unwrap_or(d.theta_on),
            theta_off: self.theta_off.unwrap_or(d.theta_off),
            max_rounds: self.max_rounds.unwrap_or(d.max_rounds),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Malformed,
    SchemaViolation,
    UnknownReference,
    RowNotNormalized,
    CycleDetected,
    Invalid,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::Malformed => "Malformed",
            DiagnosticKind::SchemaViolation => "SchemaViolation",
            DiagnosticKind::UnknownReference => "UnknownReference",
            DiagnosticKind::RowNotNormalized => "RowNotNormalized",
            DiagnosticKind::CycleDetected => "CycleDetected",
            DiagnosticKind::Invalid => "Invalid",
        })
    }
}

/// Why a scenario was rejected, and where.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} at {path}: {message}")]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// Location in the document, e.g. `cpts[2].rows[1].probs`.
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, path: impl Into<String>, message: impl fmt::Display) -> Self {
        Diagnostic {
            kind,
            path: path.into(),
            message: message.to_string(),
        }
    }

    fn unknown(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Diagnostic::new(DiagnosticKind::UnknownReference, path, message)
    }

    fn schema(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Diagnostic::new(DiagnosticKind::SchemaViolation, path, message)
    }
}

/// A parsed and cross-checked scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub net: Option<BayesNet>,
    pub frames: Option<CompiledFrames>,
    pub cam: Option<CamNetwork>,
    /// Present when the file has a decision rule.
    pub spec: Option<ScenarioSpec>,
    pub dynamics: DynamicsParams,
    pub loop_params: LoopParams,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, Diagnostic> {
        Scenario::from_file(parse_file(text)?)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Scenario, Diagnostic> {
        let dynamics = file.params.dynamics();
        let loop_params = file.params.loop_params();
        check_rows(&file)?;
        let (net, frames) = build_network(&file)?;
        let cam = build_memory(&file, dynamics)?;
        let spec = build_spec(&file, net.as_ref(), cam.as_ref(), dynamics, loop_params)?;
        if !file.cue.is_empty() {
            let cam = cam
                .as_ref()
                .ok_or_else(|| Diagnostic::schema("cue", "a cue needs a memories section"))?;
            for (i, unit) in file.cue.iter().enumerate() {
                if cam.unit(unit).is_none() {
                    return Err(Diagnostic::unknown(format!("cue[{i}]"), format_args!("unknown unit `{unit}`")));
                }
            }
        }
        Ok(Scenario {
            file,
            net,
            frames,
            cam,
            spec,
            dynamics,
            loop_params,
        })
    }

    /// The file's default cue: every listed unit clamped at the upper bound.
    pub fn default_cue(&self) -> Cue {
        let mut cue = Cue::new();
        for unit in &self.file.cue {
            cue = cue.clamp(unit.clone(), self.dynamics.max);
        }
        cue
    }

    /// Canonical text of the underlying file.
    pub fn to_canonical_json(&self) -> String {
        to_canonical_json(&self.file)
    }
}

/// Parses the JSON layer only, without cross-checking sections.
pub fn parse_file(text: &str) -> Result<ScenarioFile, Diagnostic> {
    let de = &mut serde_json::Deserializer::from_str(text);
    match serde_path_to_error::deserialize::<_, ScenarioFile>(de) {
        Ok(file) => Ok(file),
        Err(err) => {
            let path = err.path().to_string();
            let inner = err.into_inner();
            let kind = match inner.classify() {
                serde_json::error::Category::Data => DiagnosticKind::SchemaViolation,
                _ => DiagnosticKind::Malformed,
            };
            let path = if path == "." { "$".into() } else { path };
            Err(Diagnostic::new(kind, path, inner))
        }
    }
}

/// Sorted keys, two-space indent, trailing newline.
pub fn to_canonical_json(file: &ScenarioFile) -> String {
    let value = serde_json::to_value(file).expect("scenario files always serialize");
    let mut text = serde_json::to_string_pretty(&value).expect("values always serialize");
    text.push('\n');
    text
}

fn check_rows(file: &ScenarioFile) -> Result<(), Diagnostic> {
    for (i, cpt) in file.cpts.iter().enumerate() {
        for (j, row) in cpt.rows.iter().enumerate() {
            let path = format!("cpts[{i}].rows[{j}].probs");
            if let Some(p) = row.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Diagnostic::new(DiagnosticKind::Invalid, path, format_args!("{p} is outside [0, 1]")));
            }
            let sum: f64 = row.probs.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Diagnostic::new(
                    DiagnosticKind::RowNotNormalized,
                    path,
                    format_args!("row {:?} of `{}` sums to {sum}", row.given, cpt.child),
                ));
            }
        }
    }
    Ok(())
}

fn to_cpt(decl: &CptDecl) -> Cpt {
    let mut cpt = Cpt::new(decl.child.clone(), decl.parents.clone());
    for row in &decl.rows {
        cpt.insert_row(row.given.clone(), row.probs.clone());
    }
    cpt
}

fn cpt_path(file: &ScenarioFile, child: &str) -> String {
    match file.cpts.iter().position(|c| c.child == child) {
        Some(i) => format!("cpts[{i}]"),
        None => "cpts".into(),
    }
}

fn network_diagnostic(file: &ScenarioFile, err: NetworkError) -> Diagnostic {
    use NetworkError as E;
    let (kind, path) = match &err {
        E::CycleDetected(_) => (DiagnosticKind::CycleDetected, "cpts".to_string()),
        E::UnknownParent { child, .. } | E::UnknownRowState { child, .. } => {
            (DiagnosticKind::UnknownReference, cpt_path(file, child))
        }
        E::CptForUnknownVariable(child) => (DiagnosticKind::UnknownReference, cpt_path(file, child)),
        E::RowNotNormalized { child, .. } => (DiagnosticKind::RowNotNormalized, cpt_path(file, child)),
        E::RowArity { child, .. }
        | E::RowWidth { child, .. }
        | E::InvalidProbability { child, .. }
        | E::MissingRow { child, .. }
        | E::DuplicateParent { child, .. } => (DiagnosticKind::SchemaViolation, cpt_path(file, child)),
        E::MissingCpt(_) | E::DuplicateCpt(_) => (DiagnosticKind::SchemaViolation, "cpts".into()),
        E::Empty | E::EmptyName | E::NoStates(_) | E::DuplicateVariable(_) | E::DuplicateState { .. } => {
            (DiagnosticKind::SchemaViolation, "variables".into())
        }
    };
    Diagnostic::new(kind, path, err)
}

fn build_network(file: &ScenarioFile) -> Result<(Option<BayesNet>, Option<CompiledFrames>), Diagnostic> {
    if !file.frames.is_empty() {
        if !file.variables.is_empty() {
            return Err(Diagnostic::schema(
                "variables",
                "frame elements are the variables; drop this section when frames are given",
            ));
        }
        let frames = file
            .frames
            .iter()
            .map(|f| Frame::new(f.name.clone(), f.elements.clone()))
            .collect();
        let relations: Vec<(String, String)> = file
            .relations
            .iter()
            .map(|r| (r.source.clone(), r.target.clone()))
            .collect();
        let relation_path = |a: &str, b: Option<&str>| {
            let i = file
                .relations
                .iter()
                .position(|r| (r.source == a || r.target == a) && b.is_none_or(|b| r.target == b));
            i.map_or("relations".into(), |i| format!("relations[{i}]"))
        };
        let graph = FrameGraph::new(frames, &relations).map_err(|e| match &e {
            FrameError::UnknownElement(x) => Diagnostic::unknown(relation_path(x, None), &e),
            FrameError::SelfRelation(x) => Diagnostic::new(DiagnosticKind::Invalid, relation_path(x, Some(x)), &e),
            FrameError::DuplicateRelation(a, b) => Diagnostic::schema(relation_path(a, Some(b)), &e),
            _ => Diagnostic::schema("frames", &e),
        })?;
        let cpts: Vec<Cpt> = file.cpts.iter().map(to_cpt).collect();
        let compiled = compile_to_bn(&graph, &cpts).map_err(|e| match e {
            FrameError::Network(n) => network_diagnostic(file, n),
            FrameError::UnknownElement(x) => Diagnostic::unknown(cpt_path(file, &x), format_args!("CPT for unknown element `{x}`")),
            FrameError::MissingCptAssignment(ref x) => Diagnostic::schema("cpts", format_args!("{e} (element `{x}`)")),
            FrameError::ParentMismatch { ref element, .. } => Diagnostic::schema(cpt_path(file, element), &e),
            other => Diagnostic::schema("cpts", other),
        })?;
        return Ok((Some(compiled.net.clone()), Some(compiled)));
    }
    if !file.relations.is_empty() {
        return Err(Diagnostic::schema("relations", "relations need a frames section"));
    }
    if file.variables.is_empty() {
        if !file.cpts.is_empty() {
            return Err(Diagnostic::schema("cpts", "CPTs need a variables or frames section"));
        }
        return Ok((None, None));
    }
    let variables = file
        .variables
        .iter()
        .map(|v| Variable::new(v.name.clone(), v.states.clone()))
        .collect();
    let cpts = file.cpts.iter().map(to_cpt).collect();
    let net = BayesNet::new(variables, cpts).map_err(|e| network_diagnostic(file, e))?;
    Ok((Some(net), None))
}

fn build_memory(file: &ScenarioFile, dynamics: DynamicsParams) -> Result<Option<CamNetwork>, Diagnostic> {
    if file.memories.is_empty() {
        if !file.incompatible.is_empty() {
            return Err(Diagnostic::schema("incompatible", "incompatible pairs need a memories section"));
        }
        return Ok(None);
    }
    let memories: Vec<(String, Vec<String>)> = file
        .memories
        .iter()
        .map(|m| (m.name.clone(), m.attributes.clone()))
        .collect();
    let incompatible: Vec<(String, String)> = file
        .incompatible
        .iter()
        .map(|[a, b]| (a.clone(), b.clone()))
        .collect();
    let pair_path = |x: &str| {
        file.incompatible
            .iter()
            .position(|[a, b]| a == x || b == x)
            .map_or("incompatible".into(), |i| format!("incompatible[{i}]"))
    };
    let memory_path = |x: &str| {
        file.memories
            .iter()
            .position(|m| m.name == x)
            .map_or("memories".into(), |i| format!("memories[{i}]"))
    };
    CamNetwork::build(&memories, &incompatible, &file.params.weights(), dynamics)
        .map(Some)
        .map_err(|e| match &e {
            CamError::UnknownUnit(x) => Diagnostic::unknown(pair_path(x), &e),
            CamError::NotAnAttribute(x) | CamError::SelfIncompatibility(x) => {
                Diagnostic::new(DiagnosticKind::Invalid, pair_path(x), &e)
            }
            CamError::DuplicateIncompatibility(x, _) => Diagnostic::schema(pair_path(x), &e),
            CamError::DuplicateMemory(x) | CamError::EmptyMemory(x) => Diagnostic::schema(memory_path(x), &e),
            CamError::DuplicateAttribute { memory, .. } => Diagnostic::schema(memory_path(memory), &e),
            CamError::NameCollision(_) => Diagnostic::schema("memories", &e),
            CamError::UnknownLink(..) => Diagnostic::unknown("params.weight_overrides", &e),
            CamError::InvalidWeight { .. } | CamError::UnstableStep { .. } => {
                Diagnostic::new(DiagnosticKind::Invalid, "params", &e)
            }
            _ => Diagnostic::new(DiagnosticKind::Invalid, "params", &e),
        })
}

fn build_spec(
    file: &ScenarioFile,
    net: Option<&BayesNet>,
    cam: Option<&CamNetwork>,
    dynamics: DynamicsParams,
    loop_params: LoopParams,
) -> Result<Option<ScenarioSpec>, Diagnostic> {
    if !file.bindings.is_empty() && (net.is_none() || cam.is_none()) {
        return Err(Diagnostic::schema("bindings", "bindings need both a network and memories"));
    }
    if let (Some(net), Some(cam)) = (net, cam) {
        let mut seen = BTreeSet::new();
        for (i, b) in file.bindings.iter().enumerate() {
            let path = format!("bindings[{i}]");
            if cam.unit(&b.unit).is_none() {
                return Err(Diagnostic::unknown(path, format_args!("unknown unit `{}`", b.unit)));
            }
            let Some(var) = net.variable(&b.variable) else {
                return Err(Diagnostic::unknown(path, format_args!("unknown variable `{}`", b.variable)));
            };
            for s in [&b.on, &b.off] {
                if var.state_index(s).is_none() {
                    return Err(Diagnostic::unknown(path, format_args!("variable `{}` has no state `{s}`", b.variable)));
                }
            }
            if !seen.insert(&b.unit) {
                return Err(Diagnostic::schema(path, format_args!("unit `{}` bound twice", b.unit)));
            }
        }
    }
    let Some(decision) = &file.decision else {
        return Ok(None);
    };
    let Some(net) = net else {
        return Err(Diagnostic::schema("decision", "a decision rule needs a network"));
    };
    match net.variable(&decision.query) {
        None => {
            return Err(Diagnostic::unknown(
                "decision.query",
                format_args!("unknown variable `{}`", decision.query),
            ))
        }
        Some(v) if v.state_index(&decision.trigger).is_none() => {
            return Err(Diagnostic::unknown(
                "decision.trigger",
                format_args!("variable `{}` has no state `{}`", decision.query, decision.trigger),
            ))
        }
        Some(_) => {}
    }
    let cam = match cam {
        Some(c) => c.clone(),
        None => CamNetwork::empty(dynamics).map_err(|e| Diagnostic::new(DiagnosticKind::Invalid, "params", e))?,
    };
    let bindings = file
        .bindings
        .iter()
        .map(|b| Binding::new(b.unit.clone(), b.variable.clone(), b.on.clone(), b.off.clone()))
        .collect();
    let rule = DecisionRule {
        query: decision.query.clone(),
        trigger: decision.trigger.clone(),
        threshold: decision.threshold,
        action_if_high: decision.action_if_high.clone(),
        action_if_low: decision.action_if_low.clone(),
    };
    ScenarioSpec::new(net.clone(), cam, bindings, rule, loop_params)
        .map(Some)
        .map_err(|e| match e {
            LoopError::InvalidThreshold(_) => Diagnostic::new(DiagnosticKind::Invalid, "decision.threshold", e),
            LoopError::NotAnAttribute(ref u) => {
                let i = file.bindings.iter().position(|b| &b.unit == u).unwrap_or(0);
                Diagnostic::new(DiagnosticKind::Invalid, format!("bindings[{i}].unit"), e)
            }
            other => Diagnostic::new(DiagnosticKind::Invalid, "params", other),
        })
}

/// Names of the fixtures embedded in the binary, with their text.
pub const FIXTURES: &[(&str, &str)] = &[
    ("appendix1", include_str!("../fixtures/appendix1.json")),
    ("explosion", include_str!("../fixtures/explosion.json")),
    ("figure2", include_str!("../fixtures/figure2.json")),
    ("figure5", include_str!("../fixtures/figure5.json")),
    ("maier", include_str!("../fixtures/maier.json")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parses and checks an embedded fixture.
pub fn load_fixture(name: &str) -> Option<Result<Scenario, Diagnostic>> {
    fixture(name).map(Scenario::parse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        for (name, _) in FIXTURES {
            load_fixture(name).unwrap().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        for (name, text) in FIXTURES {
            let once = Scenario::parse(text).unwrap().to_canonical_json();
            let twice = Scenario::parse(&once).unwrap().to_canonical_json();
            assert_eq!(once, twice, "{name}");
            assert_eq!(parse_file(&once).unwrap(), parse_file(text).unwrap(), "{name}");
        }
    }

    #[test]
    fn canonical_form_sorts_keys_and_drops_empty_sections() {
        let text = r#"{"variables":[{"states":["1","0"],"name":"A"}],
                       "cpts":[{"rows":[{"probs":[0.50,0.5]}],"child":"A"}]}"#;
        let canon = Scenario::parse(text).unwrap().to_canonical_json();
        assert_eq!(
            canon,
            "{\n  \"cpts\": [\n    {\n      \"child\": \"A\",\n      \"parents\": [],\n      \"rows\": [\n        {\n          \"given\": [],\n          \"probs\": [\n            0.5,\n            0.5\n          ]\n        }\n      ]\n    }\n  ],\n  \"variables\": [\n    {\n      \"name\": \"A\",\n      \"states\": [\n        \"1\",\n        \"0\"\n      ]\n    }\n  ]\n}\n"
        );
    }

    #[test]
    fn unnormalized_row_names_its_path() {
        let text = r#"{"variables":[{"name":"A","states":["1","0"]}],
                       "cpts":[{"child":"A","rows":[{"probs":[0.5,0.4]}]}]}"#;
        let d = Scenario::parse(text).unwrap_err();
        assert_eq!(d.kind, DiagnosticKind::RowNotNormalized);
        assert_eq!(d.path, "cpts[0].rows[0].probs");
    }

    #[test]
    fn malformed_and_schema_errors() {
        assert_eq!(Scenario::parse("{").unwrap_err().kind, DiagnosticKind::Malformed);
        let d = Scenario::parse(r#"{"variables":[{"name":"A","states":"1"}]}"#).unwrap_err();
        assert_eq!(d.kind, DiagnosticKind::SchemaViolation);
        assert_eq!(d.path, "variables[0].states");
        let d = Scenario::parse(r#"{"extra":1}"#).unwrap_err();
        assert_eq!(d.kind, DiagnosticKind::SchemaViolation);
    }

    #[test]
    fn cycles_and_dangling_references() {
        let cyclic = r#"{"variables":[{"name":"A","states":["1","0"]},{"name":"B","states":["1","0"]}],
            "cpts":[
              {"child":"A","parents":["B"],"rows":[{"given":["1"],"probs":[1,0]},{"given":["0"],"probs":[0,1]}]},
              {"child":"B","parents":["A"],"rows":[{"given":["1"],"probs":[1,0]},{"given":["0"],"probs":[0,1]}]}]}"#;
        assert_eq!(Scenario::parse(cyclic).unwrap_err().kind, DiagnosticKind::CycleDetected);

        let mut file = parse_file(fixture("appendix1").unwrap()).unwrap();
        file.bindings[0].variable = "Smoke".into();
        let d = Scenario::from_file(file).unwrap_err();
        assert_eq!(d.kind, DiagnosticKind::UnknownReference);
        assert_eq!(d.path, "bindings[0]");

        let mut file = parse_file(fixture("figure2").unwrap()).unwrap();
        file.relations[0].target = "Nowhere".into();
        let d = Scenario::from_file(file).unwrap_err();
        assert_eq!(d.kind, DiagnosticKind::UnknownReference);
        assert_eq!(d.path, "relations[0]");
    }
}
