//! Frames, sign relations between their elements, and their compilation to
//! a Bayesian network.
//!
//! Element names are global: an element belongs to exactly one frame and
//! becomes a binary network variable of the same name with states
//! `["1", "0"]`. A relation points from the sign to what it denotes and
//! becomes a parent edge. Whether a relation stays inside one frame is
//! kept for reporting only; it never changes inference.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use crate::graphical_model::{
    posterior, BayesNet, Cpt, Distribution, Evidence, InferenceError, NetworkError, Variable,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrameError {
    #[error("frame `{0}` declared twice")]
    DuplicateFrame(String),
    #[error("frame `{0}` has no elements")]
    EmptyFrame(String),
    #[error("element `{element}` appears in both `{first}` and `{second}`")]
    DuplicateElement {
        element: String,
        first: String,
        second: String,
    },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element `{0}` related to itself")]
    SelfRelation(String),
    #[error("relation `{0}` -> `{1}` declared twice")]
    DuplicateRelation(String, String),
    #[error("no CPT for element `{0}`")]
    MissingCptAssignment(String),
    #[error("CPT parents of `{element}` are {found:?}, but its incoming relations are {expected:?}")]
    ParentMismatch {
        element: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub name: String,
    pub elements: Vec<String>,
}

impl Frame {
    pub fn new<N, E, I>(name: N, elements: I) -> Self
    where
        N: Into<String>,
        E: Into<String>,
        I: IntoIterator<Item = E>,
    {
        Frame {
            name: name.into(),
            elements: elements.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    Within,
    Across,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Within => "within",
            RelationKind::Across => "across",
        }
    }
}

/// Directed relation from a sign element to the element it denotes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignRelation {
    pub source: String,
    pub target: String,
    pub kind: RelationKind,
}

/// Frames plus classified relations, sorted by `(source, target)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameGraph {
    frames: Vec<Frame>,
    relations: Vec<SignRelation>,
    frame_of: BTreeMap<String, String>,
}

impl FrameGraph {
    pub fn new(frames: Vec<Frame>, relations: &[(String, String)]) -> Result<Self, FrameError> {
        let mut names = BTreeSet::new();
        let mut frame_of: BTreeMap<String, String> = BTreeMap::new();
        for f in &frames {
            if !names.insert(f.name.clone()) {
                return Err(FrameError::DuplicateFrame(f.name.clone()));
            }
            if f.elements.is_empty() {
                return Err(FrameError::EmptyFrame(f.name.clone()));
            }
            for e in &f.elements {
                if let Some(first) = frame_of.insert(e.clone(), f.name.clone()) {
                    return Err(FrameError::DuplicateElement {
                        element: e.clone(),
                        first,
                        second: f.name.clone(),
                    });
                }
            }
        }
        let relations = classify_relations(&frame_of, relations)?;
        Ok(FrameGraph {
            frames,
            relations,
            frame_of,
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn relations(&self) -> &[SignRelation] {
        &self.relations
    }

    pub fn frame_of(&self, element: &str) -> Option<&str> {
        self.frame_of.get(element).map(String::as_str)
    }

    /// Every element, in name order.
    pub fn elements(&self) -> impl Iterator<Item = &str> {
        self.frame_of.keys().map(String::as_str)
    }

    /// Sources of relations ending at `element`, in name order.
    pub fn incoming(&self, element: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .relations
            .iter()
            .filter(|r| r.target == element)
            .map(|r| r.source.as_str())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Labels each `(source, target)` pair as within- or across-frame, given the
/// frame of every element.
pub fn classify_relations(
    frame_of: &BTreeMap<String, String>,
    relations: &[(String, String)],
) -> Result<Vec<SignRelation>, FrameError> {
    let mut out = Vec::with_capacity(relations.len());
    let mut seen = BTreeSet::new();
    for (source, target) in relations {
        let fs = frame_of
            .get(source)
            .ok_or_else(|| FrameError::UnknownElement(source.clone()))?;
        let ft = frame_of
            .get(target)
            .ok_or_else(|| FrameError::UnknownElement(target.clone()))?;
        if source == target {
            return Err(FrameError::SelfRelation(source.clone()));
        }
        if !seen.insert((source, target)) {
            return Err(FrameError::DuplicateRelation(source.clone(), target.clone()));
        }
        out.push(SignRelation {
            source: source.clone(),
            target: target.clone(),
            kind: if fs == ft {
                RelationKind::Within
            } else {
                RelationKind::Across
            },
        });
    }
    out.sort();
    Ok(out)
}

/// A frame graph compiled to a network, keeping the relation labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledFrames {
    pub net: BayesNet,
    pub graph: FrameGraph,
}

impl CompiledFrames {
    pub fn kind(&self, source: &str, target: &str) -> Option<RelationKind> {
        self.graph
            .relations()
            .iter()
            .find(|r| r.source == source && r.target == target)
            .map(|r| r.kind)
    }
}

/// Builds one binary variable per element and one edge per relation. Each
/// element needs a CPT whose parents are exactly its incoming relations
/// (in any order).
pub fn compile_to_bn(graph: &FrameGraph, cpts: &[Cpt]) -> Result<CompiledFrames, FrameError> {
    let mut by_child: BTreeMap<&str, &Cpt> = BTreeMap::new();
    for cpt in cpts {
        if graph.frame_of(cpt.child()).is_none() {
            return Err(FrameError::UnknownElement(cpt.child().into()));
        }
        if by_child.insert(cpt.child(), cpt).is_some() {
            return Err(NetworkError::DuplicateCpt(cpt.child().into()).into());
        }
    }
    let mut variables = Vec::new();
    for element in graph.elements() {
        let cpt = by_child
            .get(element)
            .ok_or_else(|| FrameError::MissingCptAssignment(element.into()))?;
        let expected: Vec<String> = graph.incoming(element).into_iter().map(String::from).collect();
        let mut found: Vec<String> = cpt.parents().to_vec();
        found.sort_unstable();
        if found != expected {
            return Err(FrameError::ParentMismatch {
                element: element.into(),
                expected,
                found: cpt.parents().to_vec(),
            });
        }
        variables.push(Variable::binary(element));
    }
    let net = BayesNet::new(variables, cpts.to_vec())?;
    Ok(CompiledFrames {
        net,
        graph: graph.clone(),
    })
}

/// Reading of one target element under the sign evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct Denotation {
    pub element: String,
    pub posterior: Distribution,
    /// Posterior of the element's "1" (present) state.
    pub probability: f64,
    pub flagged: bool,
    /// Shortest chain of relations, followed in either direction, from an
    /// evidence element to the target. Empty without evidence or a path.
    pub chain: Vec<SignRelation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenotationReport {
    pub threshold: f64,
    pub denotations: Vec<Denotation>,
}

impl DenotationReport {
    pub fn flagged(&self) -> impl Iterator<Item = &str> {
        self.denotations.iter().filter(|d| d.flagged).map(|d| d.element.as_str())
    }
}

/// Queries each target under `evidence` and flags those whose present-state
/// probability reaches `threshold` (0.5 reads as "more likely than not").
pub fn interpret_sign(
    compiled: &CompiledFrames,
    evidence: &Evidence,
    targets: &[&str],
    threshold: f64,
) -> Result<DenotationReport, FrameError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(FrameError::InvalidThreshold(threshold));
    }
    let mut denotations = Vec::with_capacity(targets.len());
    for &target in targets {
        let post = posterior(&compiled.net, evidence, target)?;
        let p = post.probs()[0];
        denotations.push(Denotation {
            element: target.into(),
            probability: p,
            flagged: p >= threshold,
            chain: relation_chain(&compiled.graph, evidence, target),
            posterior: post,
        });
    }
    Ok(DenotationReport {
        threshold,
        denotations,
    })
}

fn relation_chain(graph: &FrameGraph, evidence: &Evidence, target: &str) -> Vec<SignRelation> {
    // breadth-first from all evidence elements at once, neighbours in relation order
    let mut came_from: BTreeMap<&str, Option<&SignRelation>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for (name, _) in evidence.iter() {
        if graph.frame_of(name).is_some() {
            came_from.insert(name, None);
            queue.push_back(name);
        }
    }
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        for r in graph.relations() {
            let next = if r.source == node {
                r.target.as_str()
            } else if r.target == node {
                r.source.as_str()
            } else {
                continue;
            };
            if !came_from.contains_key(next) {
                came_from.insert(next, Some(r));
                queue.push_back(next);
            }
        }
    }
    let mut chain = Vec::new();
    let mut node = target;
    while let Some(Some(r)) = came_from.get(node) {
        chain.push((*r).clone());
        node = if r.target == node { &r.source } else { &r.target };
    }
    chain.reverse();
    chain
}
