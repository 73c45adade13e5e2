//! Content-addressable distributed memory.
//!
//! Each memory is a unit joined by excitatory links to one unit per
//! attribute. Attributes with the same name are one shared unit, so
//! activation spreads between memories through what they have in common.
//! Declared-incompatible attributes are joined by inhibitory links. The
//! network is settled by bounded, decaying relaxation (see [`dynamics`]).

pub mod dynamics;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use dynamics::SettleResult;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CamError {
    #[error("memory `{0}` declared twice")]
    DuplicateMemory(String),
    #[error("memory `{0}` has no attributes")]
    EmptyMemory(String),
    #[error("memory `{memory}` lists attribute `{attribute}` twice")]
    DuplicateAttribute { memory: String, attribute: String },
    #[error("`{0}` names both a memory and an attribute")]
    NameCollision(String),
    #[error("attribute `{0}` declared incompatible with itself")]
    SelfIncompatibility(String),
    #[error("incompatibility between `{0}` and `{1}` declared twice")]
    DuplicateIncompatibility(String, String),
    #[error("`{0}` is not an attribute unit")]
    NotAnAttribute(String),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("no link between `{0}` and `{1}`")]
    UnknownLink(String, String),
    #[error("weight {weight} for link `{a}`-`{b}` has the wrong sign")]
    InvalidWeight { a: String, b: String, weight: f64 },
    #[error("invalid dynamics parameters: {0}")]
    InvalidParams(&'static str),
    #[error("clamp value {value} for `{unit}` is outside the activation bounds")]
    ClampOutOfRange { unit: String, value: f64 },
    #[error("step size too large for these weights: stability factor {factor} exceeds 1")]
    UnstableStep { factor: f64 },
    #[error("threshold {0} must lie in (rest, max]")]
    InvalidThreshold(f64),
}

/// Relaxation parameters shared by every unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    /// Step size ε.
    pub step: f64,
    /// Decay rate δ toward rest.
    pub decay: f64,
    pub max: f64,
    pub min: f64,
    pub rest: f64,
    /// Convergence threshold on the largest per-unit change in a sweep.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            step: 0.1,
            decay: 0.1,
            max: 1.0,
            min: -0.2,
            rest: -0.1,
            tolerance: 1e-6,
            max_sweeps: 10_000,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<(), CamError> {
        let finite = [self.step, self.decay, self.max, self.min, self.rest, self.tolerance]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(CamError::InvalidParams("parameters must be finite"));
        }
        if !(self.min < self.rest && self.rest < self.max) {
            return Err(CamError::InvalidParams("need min < rest < max"));
        }
        if self.step <= 0.0 || self.decay <= 0.0 {
            return Err(CamError::InvalidParams("step and decay must be positive"));
        }
        if self.tolerance <= 0.0 {
            return Err(CamError::InvalidParams("tolerance must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(CamError::InvalidParams("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

/// How link weights are assigned.
///
/// Membership links get `excitatory`, incompatibility links `inhibitory`;
/// with `normalize` both are divided by the largest unit degree. Overrides
/// replace the final weight of individual links and must keep their sign.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightConfig {
    pub excitatory: f64,
    pub inhibitory: f64,
    pub normalize: bool,
    pub overrides: BTreeMap<(String, String), f64>,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            excitatory: 1.0,
            inhibitory: -1.0,
            normalize: true,
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnitKind {
    Memory,
    Attribute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub name: String,
    pub kind: UnitKind,
    pub activation: f64,
    pub rest: f64,
    pub external_input: f64,
    /// Hard clamp: the unit holds this activation throughout settling.
    pub clamp: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    Excitatory,
    Inhibitory,
}

/// Symmetric link between units `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub kind: LinkKind,
}

/// Input to [`CamNetwork::clamp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CueValue {
    /// Hold the unit at this activation.
    Clamp(f64),
    /// Add a constant external input to the unit's net input.
    Input(f64),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cue {
    entries: BTreeMap<String, CueValue>,
}

impl Cue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clamp(mut self, unit: impl Into<String>, value: f64) -> Self {
        self.entries.insert(unit.into(), CueValue::Clamp(value));
        self
    }

    pub fn input(mut self, unit: impl Into<String>, value: f64) -> Self {
        self.entries.insert(unit.into(), CueValue::Input(value));
        self
    }

    pub fn insert(&mut self, unit: impl Into<String>, value: CueValue) {
        self.entries.insert(unit.into(), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, CueValue)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Memory units, attribute units and their symmetric links.
///
/// Units are ordered by name; that order is also the asynchronous update
/// order used by [`CamNetwork::settle`].
#[derive(Debug, Clone, PartialEq)]
pub struct CamNetwork {
    units: Vec<Unit>,
    index: BTreeMap<String, usize>,
    links: Vec<Link>,
    neighbors: Vec<Vec<(usize, f64)>>,
    /// Membership partners: attributes of a memory, memories of an attribute.
    members: Vec<Vec<usize>>,
    params: DynamicsParams,
}

impl CamNetwork {
    /// Builds the network from `(memory, attributes)` lists and incompatible
    /// attribute pairs.
    pub fn build(
        memories: &[(String, Vec<String>)],
        incompatible: &[(String, String)],
        weights: &WeightConfig,
        params: DynamicsParams,
    ) -> Result<Self, CamError> {
        params.validate()?;

        let mut memory_names = BTreeSet::new();
        let mut attribute_names = BTreeSet::new();
        for (name, attrs) in memories {
            if !memory_names.insert(name.clone()) {
                return Err(CamError::DuplicateMemory(name.clone()));
            }
            if attrs.is_empty() {
                return Err(CamError::EmptyMemory(name.clone()));
            }
            let mut seen = BTreeSet::new();
            for a in attrs {
                if !seen.insert(a) {
                    return Err(CamError::DuplicateAttribute {
                        memory: name.clone(),
                        attribute: a.clone(),
                    });
                }
                attribute_names.insert(a.clone());
            }
        }
        if let Some(clash) = memory_names.intersection(&attribute_names).next() {
            return Err(CamError::NameCollision(clash.clone()));
        }

        let mut units: Vec<Unit> = memory_names
            .iter()
            .map(|n| (n, UnitKind::Memory))
            .chain(attribute_names.iter().map(|n| (n, UnitKind::Attribute)))
            .map(|(name, kind)| Unit {
                name: name.clone(),
                kind,
                activation: params.rest,
                rest: params.rest,
                external_input: 0.0,
                clamp: None,
            })
            .collect();
        units.sort_by(|a, b| a.name.cmp(&b.name));
        let index: BTreeMap<String, usize> = units
            .iter()
            .enumerate()
            .map(|(i, u)| (u.name.clone(), i))
            .collect();

        let mut pairs: BTreeMap<(usize, usize), LinkKind> = BTreeMap::new();
        for (name, attrs) in memories {
            let m = index[name];
            for a in attrs {
                let a = index[a];
                pairs.insert((m.min(a), m.max(a)), LinkKind::Excitatory);
            }
        }
        for (x, y) in incompatible {
            for n in [x, y] {
                match index.get(n) {
                    Some(&i) if units[i].kind == UnitKind::Attribute => {}
                    Some(_) => return Err(CamError::NotAnAttribute(n.clone())),
                    None => return Err(CamError::UnknownUnit(n.clone())),
                }
            }
            if x == y {
                return Err(CamError::SelfIncompatibility(x.clone()));
            }
            let (i, j) = (index[x], index[y]);
            if pairs.insert((i.min(j), i.max(j)), LinkKind::Inhibitory).is_some() {
                return Err(CamError::DuplicateIncompatibility(x.clone(), y.clone()));
            }
        }

        let mut degree = vec![0usize; units.len()];
        for &(a, b) in pairs.keys() {
            degree[a] += 1;
            degree[b] += 1;
        }
        let scale = match degree.iter().max() {
            Some(&d) if weights.normalize && d > 0 => 1.0 / d as f64,
            _ => 1.0,
        };

        let mut links: Vec<Link> = pairs
            .into_iter()
            .map(|((a, b), kind)| {
                let base = match kind {
                    LinkKind::Excitatory => weights.excitatory,
                    LinkKind::Inhibitory => weights.inhibitory,
                };
                Link {
                    a,
                    b,
                    weight: base * scale,
                    kind,
                }
            })
            .collect();

        for ((x, y), &w) in &weights.overrides {
            let (Some(&i), Some(&j)) = (index.get(x), index.get(y)) else {
                return Err(CamError::UnknownLink(x.clone(), y.clone()));
            };
            let (a, b) = (i.min(j), i.max(j));
            let link = links
                .iter_mut()
                .find(|l| l.a == a && l.b == b)
                .ok_or_else(|| CamError::UnknownLink(x.clone(), y.clone()))?;
            link.weight = w;
        }
        for l in &links {
            let ok = match l.kind {
                LinkKind::Excitatory => l.weight > 0.0,
                LinkKind::Inhibitory => l.weight < 0.0,
            };
            if !ok || !l.weight.is_finite() {
                return Err(CamError::InvalidWeight {
                    a: units[l.a].name.clone(),
                    b: units[l.b].name.clone(),
                    weight: l.weight,
                });
            }
        }

        let mut neighbors = vec![Vec::new(); units.len()];
        let mut members = vec![Vec::new(); units.len()];
        for l in &links {
            neighbors[l.a].push((l.b, l.weight));
            neighbors[l.b].push((l.a, l.weight));
            if l.kind == LinkKind::Excitatory {
                members[l.a].push(l.b);
                members[l.b].push(l.a);
            }
        }

        let net = CamNetwork {
            units,
            index,
            links,
            neighbors,
            members,
            params,
        };
        net.check_stability()?;
        Ok(net)
    }

    /// A network with no units.
    pub fn empty(params: DynamicsParams) -> Result<Self, CamError> {
        CamNetwork::build(&[], &[], &WeightConfig::default(), params)
    }

    /// Applies a cue: hard clamps fix a unit's activation, inputs set its
    /// external input. Units not named keep their current state.
    pub fn clamp(&self, cue: &Cue) -> Result<CamNetwork, CamError> {
        let mut next = self.clone();
        for (name, value) in cue.iter() {
            let i = self
                .index_of(name)
                .ok_or_else(|| CamError::UnknownUnit(name.into()))?;
            let unit = &mut next.units[i];
            match value {
                CueValue::Clamp(v) => {
                    if !(self.params.min..=self.params.max).contains(&v) {
                        return Err(CamError::ClampOutOfRange {
                            unit: name.into(),
                            value: v,
                        });
                    }
                    unit.clamp = Some(v);
                    unit.activation = v;
                }
                CueValue::Input(v) => {
                    if !v.is_finite() {
                        return Err(CamError::InvalidParams("external input must be finite"));
                    }
                    unit.external_input = v;
                }
            }
        }
        next.check_stability()?;
        Ok(next)
    }

    /// Copies settled activations back into the free units.
    pub fn with_activations(&self, result: &SettleResult) -> CamNetwork {
        let mut next = self.clone();
        for (unit, &a) in next.units.iter_mut().zip(result.activations()) {
            if unit.clamp.is_none() {
                unit.activation = a;
            }
        }
        next
    }

    /// Upper bound on ε·(|net input| + δ) over every reachable state. The
    /// update is a convex step toward the unit's equilibrium, and energy is
    /// guaranteed to descend, whenever this is at most 1.
    pub fn stability_factor(&self) -> f64 {
        let p = &self.params;
        let span = p.max - p.min;
        let worst_input = self
            .neighbors
            .iter()
            .zip(&self.units)
            .map(|(nb, u)| nb.iter().map(|(_, w)| w.abs()).sum::<f64>() * span + u.external_input.abs())
            .fold(0.0, f64::max);
        p.step * (worst_input + p.decay)
    }

    fn check_stability(&self) -> Result<(), CamError> {
        let factor = self.stability_factor();
        if factor > 1.0 {
            return Err(CamError::UnstableStep { factor });
        }
        Ok(())
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn params(&self) -> &DynamicsParams {
        &self.params
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn unit(&self, name: &str) -> Option<&Unit> {
        self.index_of(name).map(|i| &self.units[i])
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Attributes of a memory, or memories holding an attribute, by name.
    pub fn members_of(&self, name: &str) -> Vec<&str> {
        let Some(i) = self.index_of(name) else {
            return Vec::new();
        };
        let mut out: Vec<&str> = self.members[i].iter().map(|&j| self.units[j].name.as_str()).collect();
        out.sort_unstable();
        out
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        self.neighbors[i].iter().find(|(k, _)| *k == j).map(|(_, w)| *w)
    }

    pub fn memories(&self) -> impl Iterator<Item = &Unit> {
        self.units.iter().filter(|u| u.kind == UnitKind::Memory)
    }

    pub fn attributes(&self) -> impl Iterator<Item = &Unit> {
        self.units.iter().filter(|u| u.kind == UnitKind::Attribute)
    }

    pub fn activations(&self) -> Vec<f64> {
        self.units.iter().map(|u| u.activation).collect()
    }

    /// Recombined readout of a settled state: attribute units at or above
    /// `theta_on`, and every memory that owns one of them.
    pub fn synthesize_sign(
        &self,
        result: &SettleResult,
        theta_on: f64,
    ) -> Result<SynthesizedSign, CamError> {
        if !(theta_on > self.params.rest && theta_on <= self.params.max) {
            return Err(CamError::InvalidThreshold(theta_on));
        }
        let mut active = Vec::new();
        let mut contributing = BTreeSet::new();
        for (i, (u, &a)) in self.units.iter().zip(result.activations()).enumerate() {
            if u.kind == UnitKind::Attribute && a >= theta_on {
                active.push(u.name.clone());
                for &m in &self.members[i] {
                    contributing.insert(self.units[m].name.clone());
                }
            }
        }
        let contributing: Vec<String> = contributing.into_iter().collect();
        Ok(SynthesizedSign {
            recombined: contributing.len() >= 2,
            active_attributes: active,
            contributing_memories: contributing,
        })
    }
}

/// Attribute pattern read out after settling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesizedSign {
    pub active_attributes: Vec<String>,
    pub contributing_memories: Vec<String>,
    /// True when the pattern draws on two or more memories.
    pub recombined: bool,
}
