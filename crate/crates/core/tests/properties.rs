use std::collections::BTreeSet;

use proptest::prelude::*;
use sensemaking_core::frame_semantics::{compile_to_bn, interpret_sign, Frame, FrameGraph, RelationKind};
use sensemaking_core::graphical_model::{
    elimination_order, posterior, posterior_with_order, BayesNet, Cpt, Evidence, InferenceError, Variable,
};
use sensemaking_core::memory_network::{CamNetwork, Cue, DynamicsParams, UnitKind, WeightConfig};
use sensemaking_core::oracle::{enumerate_joint, OracleError};
use sensemaking_core::sensemaking_loop::{
    decide, run_sensemaking, Binding, DecisionRule, LoopError, LoopParams, ScenarioSpec,
};

fn name(i: usize) -> String {
    format!("V{i}")
}

/// Random DAG over `V0..Vn`: parents of `Vi` come from lower indices, at most
/// three of them. `p_true` holds one probability per CPT row, consumed in order.
#[derive(Debug, Clone)]
struct NetPlan {
    parents: Vec<Vec<usize>>,
    rows: Vec<Vec<f64>>,
}

fn net_plan(max_vars: usize, lo: f64, hi: f64) -> impl Strategy<Value = NetPlan> {
    (1..=max_vars)
        .prop_flat_map(move |n| {
            let parents = (0..n)
                .map(|i| proptest::sample::subsequence((0..i).collect::<Vec<_>>(), 0..=i.min(3)))
                .collect::<Vec<_>>();
            (Just(n), parents)
        })
        .prop_flat_map(move |(_, parents)| {
            let rows = parents
                .iter()
                .map(|p| proptest::collection::vec(lo..=hi, 1usize << p.len()))
                .collect::<Vec<_>>();
            (Just(parents), rows)
        })
        .prop_map(|(parents, rows)| NetPlan { parents, rows })
}

fn build(plan: &NetPlan) -> BayesNet {
    let n = plan.parents.len();
    let vars = (0..n).map(|i| Variable::binary(name(i))).collect();
    let cpts = (0..n)
        .map(|i| {
            let parents: Vec<String> = plan.parents[i].iter().map(|&p| name(p)).collect();
            let mut cpt = Cpt::new(name(i), parents.clone());
            for (r, &p) in plan.rows[i].iter().enumerate() {
                // row r: bit k (most significant first) picks the state of parent k
                let given: Vec<String> = (0..parents.len())
                    .map(|k| {
                        let bit = r >> (parents.len() - 1 - k) & 1;
                        if bit == 0 { "1" } else { "0" }.to_string()
                    })
                    .collect();
                cpt.insert_row(given, vec![p, 1.0 - p]);
            }
            cpt
        })
        .collect();
    BayesNet::new(vars, cpts).unwrap()
}

/// Evidence drawn from per-variable choices: 0 unobserved, 1 state "1", 2 state "0".
fn evidence_of(choices: &[u8], n: usize) -> Evidence {
    (0..n)
        .filter_map(|i| match choices[i % choices.len()] {
            1 => Some((name(i), "1")),
            2 => Some((name(i), "0")),
            _ => None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn elimination_matches_enumeration(
        plan in net_plan(10, 0.0, 1.0),
        choices in proptest::collection::vec(0u8..3, 10),
        q in 0usize..10,
    ) {
        let net = build(&plan);
        let n = net.len();
        let ev = evidence_of(&choices, n);
        let query = name(q % n);
        match (posterior(&net, &ev, &query), enumerate_joint(&net, &ev, &query)) {
            (Ok(fast), Ok(slow)) => {
                prop_assert!(fast.max_abs_diff(&slow) < 1e-9, "{fast:?} vs {slow:?}");
                let total: f64 = fast.probs().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
                prop_assert!(fast.probs().iter().all(|p| (0.0..=1.0).contains(p)));
            }
            (Err(InferenceError::ImpossibleEvidence), Err(OracleError::Inference(InferenceError::ImpossibleEvidence))) => {}
            (a, b) => prop_assert!(false, "disagreement: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn elimination_order_does_not_matter(
        plan in net_plan(8, 0.05, 0.95),
        choices in proptest::collection::vec(0u8..3, 8),
        q in 0usize..8,
    ) {
        let net = build(&plan);
        let n = net.len();
        let ev = evidence_of(&choices, n);
        let query = name(q % n);
        let min_fill = elimination_order(&net, &query, &ev).unwrap();
        let mut reversed = min_fill.clone();
        reversed.sort();
        reversed.reverse();
        let a = posterior_with_order(&net, &ev, &query, &min_fill).unwrap();
        let b = posterior_with_order(&net, &ev, &query, &reversed).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-9);
        prop_assert_eq!(elimination_order(&net, &query, &ev).unwrap(), min_fill);
    }

    #[test]
    fn observed_query_is_degenerate(plan in net_plan(6, 0.05, 0.95), q in 0usize..6, on in any::<bool>()) {
        let net = build(&plan);
        let query = name(q % net.len());
        let state = if on { "1" } else { "0" };
        let d = posterior(&net, &Evidence::new().with(query.clone(), state), &query).unwrap();
        prop_assert_eq!(d.probability(state), Some(1.0));
    }
}

type CamPlan = (Vec<(String, Vec<String>)>, Vec<(String, String)>);

/// Random memory store over a small attribute pool.
fn cam_plan() -> impl Strategy<Value = CamPlan> {
    let memory = proptest::sample::subsequence((0..8).collect::<Vec<usize>>(), 1..=4);
    (proptest::collection::vec(memory, 1..=5), proptest::collection::vec((0usize..8, 0usize..8), 0..4)).prop_map(
        |(memories, pairs)| {
            let memories: Vec<(String, Vec<String>)> = memories
                .into_iter()
                .enumerate()
                .map(|(m, attrs)| (format!("m{m}"), attrs.into_iter().map(|a| format!("a{a}")).collect()))
                .collect();
            let used: BTreeSet<&String> = memories.iter().flat_map(|(_, a)| a).collect();
            let mut seen = BTreeSet::new();
            let incompatible = pairs
                .into_iter()
                .filter(|(x, y)| x != y)
                .map(|(x, y)| (format!("a{}", x.min(y)), format!("a{}", x.max(y))))
                .filter(|(x, y)| used.contains(x) && used.contains(y))
                .filter(|p| seen.insert(p.clone()))
                .collect();
            (memories, incompatible)
        },
    )
}

fn cue_from(net: &CamNetwork, picks: &[(usize, f64)]) -> Cue {
    let mut cue = Cue::new();
    for &(i, v) in picks {
        let u = &net.units()[i % net.len()];
        cue = cue.clamp(u.name.clone(), v);
    }
    cue
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn settling_is_bounded_descending_and_deterministic(
        (memories, incompatible) in cam_plan(),
        picks in proptest::collection::vec((0usize..16, -0.2f64..=1.0), 0..4),
    ) {
        let base = CamNetwork::build(&memories, &incompatible, &WeightConfig::default(), DynamicsParams::default()).unwrap();
        let net = base.clamp(&cue_from(&base, &picks)).unwrap();
        let p = *net.params();
        let mut bounded = true;
        let r = net.settle_observed(|_, a| bounded &= a.iter().all(|&x| (p.min..=p.max).contains(&x)));
        prop_assert!(bounded);
        for w in r.energy_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-6, "energy rose: {:?}", w);
        }
        prop_assert_eq!(r.energy_trace.len(), r.sweeps + 1);
        let again = net.settle();
        prop_assert_eq!(
            r.activations().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            again.activations().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        prop_assert_eq!(r.energy_trace.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            again.energy_trace.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn excitation_reaches_whole_and_parts((memories, _) in cam_plan(), which in 0usize..5) {
        let params = DynamicsParams { max_sweeps: 5, ..DynamicsParams::default() };
        let net = CamNetwork::build(&memories, &[], &WeightConfig::default(), params).unwrap();
        let (memory, attrs) = &memories[which % memories.len()];
        let rest = params.rest;

        let mut cue = Cue::new();
        for a in attrs {
            cue = cue.clamp(a.clone(), params.max);
        }
        let r = net.clamp(&cue).unwrap().settle();
        prop_assert!(r.activation(memory).unwrap() > rest);

        let r = net.clamp(&Cue::new().clamp(memory.clone(), params.max)).unwrap().settle();
        for a in attrs {
            prop_assert!(r.activation(a).unwrap() > rest, "{a}");
        }
    }

    #[test]
    fn inhibition_pushes_rival_below_rest(
        left in 1usize..4,
        right in 1usize..4,
        clamp in 0.0f64..=1.0,
    ) {
        let memories = vec![
            ("m_left".to_string(), (0..left).map(|i| format!("l{i}")).collect()),
            ("m_right".to_string(), (0..right).map(|i| format!("r{i}")).collect()),
        ];
        let net = CamNetwork::build(
            &memories,
            &[("l0".into(), "r0".into())],
            &WeightConfig::default(),
            DynamicsParams::default(),
        )
        .unwrap();
        let r = net.clamp(&Cue::new().clamp("l0", clamp)).unwrap().settle();
        prop_assert!(r.activation("r0").unwrap() < net.params().rest);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn relations_are_within_exactly_when_frames_match(
        frame_of in proptest::collection::vec(0usize..3, 2..8),
        pairs in proptest::collection::vec((0usize..8, 0usize..8), 0..12),
        thresholds in (0.0f64..=1.0, 0.0f64..=1.0),
        p in 0.05f64..0.95,
    ) {
        let n = frame_of.len();
        let element = |i: usize| format!("e{i}");
        let mut frames = Vec::new();
        for f in 0..3 {
            let members: Vec<String> = (0..n).filter(|&i| frame_of[i] == f).map(element).collect();
            if !members.is_empty() {
                frames.push(Frame::new(format!("f{f}"), members));
            }
        }
        // edges only point upwards in index, keeping the graph acyclic
        let mut relations: Vec<(String, String)> = pairs
            .iter()
            .map(|&(a, b)| (a % n, b % n))
            .filter(|(a, b)| a < b)
            .map(|(a, b)| (element(a), element(b)))
            .collect();
        relations.sort();
        relations.dedup();
        let graph = FrameGraph::new(frames, &relations).unwrap();
        for r in graph.relations() {
            let same = graph.frame_of(&r.source) == graph.frame_of(&r.target);
            prop_assert_eq!(r.kind == RelationKind::Within, same);
        }

        let cpts: Vec<Cpt> = (0..n)
            .map(|i| {
                let parents = graph.incoming(&element(i)).into_iter().map(String::from).collect::<Vec<_>>();
                let mut cpt = Cpt::new(element(i), parents.clone());
                for r in 0..1usize << parents.len() {
                    let given = (0..parents.len())
                        .map(|k| if r >> k & 1 == 0 { "1".to_string() } else { "0".to_string() })
                        .collect();
                    let q = (p + 0.1 * r as f64).fract().clamp(0.01, 0.99);
                    cpt.insert_row(given, vec![q, 1.0 - q]);
                }
                cpt
            })
            .collect();
        let compiled = compile_to_bn(&graph, &cpts).unwrap();
        prop_assert_eq!(compiled.net.len(), n);
        prop_assert_eq!(compiled.net.edges().len(), relations.len());

        let targets: Vec<String> = (0..n).map(element).collect();
        let targets: Vec<&str> = targets.iter().map(String::as_str).collect();
        let (lo, hi) = if thresholds.0 <= thresholds.1 { thresholds } else { (thresholds.1, thresholds.0) };
        let ev = Evidence::new().with(element(0), "1");
        let low: BTreeSet<String> = interpret_sign(&compiled, &ev, &targets, lo).unwrap().flagged().map(String::from).collect();
        let high: BTreeSet<String> = interpret_sign(&compiled, &ev, &targets, hi).unwrap().flagged().map(String::from).collect();
        prop_assert!(high.is_subset(&low));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn loop_halts_within_budget_and_decides_consistently(
        plan in net_plan(4, 0.05, 0.95),
        (memories, incompatible) in cam_plan(),
        picks in proptest::collection::vec((0usize..16, 0.5f64..=1.0), 0..3),
        max_rounds in 1usize..6,
        tau in 0.0f64..=1.0,
    ) {
        let net = build(&plan);
        let cam = CamNetwork::build(&memories, &incompatible, &WeightConfig::default(), DynamicsParams::default()).unwrap();
        // one binding per variable, from the first attribute units
        let attributes: Vec<String> = cam.units().iter().filter(|u| u.kind == UnitKind::Attribute).map(|u| u.name.clone()).collect();
        let bindings = attributes
            .iter()
            .zip(0..net.len())
            .map(|(a, v)| Binding::new(a.clone(), name(v), "1", "0"))
            .collect();
        let rule = DecisionRule {
            query: name(net.len() - 1),
            trigger: "1".into(),
            threshold: tau,
            action_if_high: "high".into(),
            action_if_low: "low".into(),
        };
        let params = LoopParams { max_rounds, ..LoopParams::default() };
        let cue = cue_from(&cam, &picks);
        let spec = ScenarioSpec::new(net, cam, bindings, rule.clone(), params).unwrap();
        let d = match run_sensemaking(&spec, &cue) {
            Ok(d) => d,
            Err(LoopError::ConflictingEvidence { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        prop_assert!(d.rounds >= 1 && d.rounds <= max_rounds);
        prop_assert_eq!(d.rounds, d.trace.len());
        prop_assert_eq!(decide(&d.posterior, &rule).unwrap(), d.action.as_str());
        let extracted: Vec<&Evidence> = d.trace.iter().map(|t| &t.extracted).collect();
        if d.fixpoint {
            let before = if d.rounds >= 2 { extracted[d.rounds - 2].clone() } else { Evidence::new() };
            prop_assert_eq!(extracted[d.rounds - 1], &before);
        } else {
            prop_assert_eq!(d.rounds, max_rounds);
        }
        // no earlier pair of consecutive rounds agreed, or the loop would have stopped there
        for k in 1..d.rounds.saturating_sub(1) {
            prop_assert_ne!(extracted[k - 1], extracted[k]);
        }
    }

    #[test]
    fn empty_memory_is_plain_inference(plan in net_plan(6, 0.05, 0.95), q in 0usize..6) {
        let net = build(&plan);
        let query = name(q % net.len());
        let rule = DecisionRule {
            query: query.clone(),
            trigger: "1".into(),
            threshold: 0.5,
            action_if_high: "high".into(),
            action_if_low: "low".into(),
        };
        let plain = posterior(&net, &Evidence::new(), &query).unwrap();
        let spec = ScenarioSpec::new(
            net,
            CamNetwork::empty(DynamicsParams::default()).unwrap(),
            vec![],
            rule,
            LoopParams::default(),
        )
        .unwrap();
        let d = run_sensemaking(&spec, &Cue::new()).unwrap();
        prop_assert_eq!(d.rounds, 1);
        prop_assert!(d.fixpoint);
        prop_assert!(d.posterior.max_abs_diff(&plain) <= 1e-12);
    }
}
