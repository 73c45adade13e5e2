use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::factor::Factor;
use super::network::BayesNet;
use super::{Distribution, Evidence, InferenceError};

/// Marginal of every variable with no evidence applied.
pub fn prior_marginals(net: &BayesNet) -> BTreeMap<String, Distribution> {
    let empty = Evidence::new();
    net.variables()
        .iter()
        .map(|v| {
            // a valid network has total mass one, so this cannot fail
            let d = posterior(net, &empty, v.name()).expect("prior query on a valid network");
            (v.name().into(), d)
        })
        .collect()
}

/// Exact P(query | evidence) by variable elimination with a min-fill order.
pub fn posterior(
    net: &BayesNet,
    evidence: &Evidence,
    query: &str,
) -> Result<Distribution, InferenceError> {
    let order = elimination_order(net, query, evidence)?;
    posterior_with_order(net, evidence, query, &order)
}

/// Same as [`posterior`] but eliminating in a caller-supplied order, which
/// must be a permutation of the non-query, non-evidence variables.
pub fn posterior_with_order(
    net: &BayesNet,
    evidence: &Evidence,
    query: &str,
    order: &[String],
) -> Result<Distribution, InferenceError> {
    let q = net
        .index_of(query)
        .ok_or_else(|| InferenceError::UnknownVariable(query.into()))?;
    let observed = evidence.resolve(net)?;

    let hidden = hidden_variables(net, q, &observed);
    let mut order_idx = Vec::with_capacity(order.len());
    for name in order {
        let i = net
            .index_of(name)
            .ok_or_else(|| InferenceError::UnknownVariable(name.clone()))?;
        order_idx.push(i);
    }
    let mut sorted = order_idx.clone();
    sorted.sort_unstable();
    if sorted != hidden {
        return Err(InferenceError::InvalidOrder);
    }

    let mut factors: Vec<Factor> = (0..net.len())
        .map(|v| Factor::from_family(net, v, &observed))
        .collect();

    for &var in &order_idx {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(var));
        factors = rest;
        let joined = touching
            .iter()
            .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
        factors.push(joined.sum_out(var));
    }

    let joint = factors
        .iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(f));

    let var = &net.variables()[q];
    // The remaining scope is {q} unless q itself was observed.
    let unnormalized: Vec<f64> = match observed[q] {
        Some(s) => {
            let mut v = vec![0.0; var.cardinality()];
            v[s] = joint.values()[0];
            v
        }
        None => {
            debug_assert_eq!(joint.scope(), [q]);
            joint.values().to_vec()
        }
    };

    let mass: f64 = unnormalized.iter().sum();
    if mass <= 0.0 || !mass.is_finite() {
        return Err(InferenceError::ImpossibleEvidence);
    }
    if let Some(s) = observed[q] {
        return Ok(Distribution::degenerate(var, s));
    }
    let probs = unnormalized.iter().map(|p| p / mass).collect();
    Ok(Distribution::new(var.name(), var.states().to_vec(), probs))
}

/// Min-fill elimination order over the non-query, non-evidence variables.
///
/// The interaction graph is the moral graph with observed variables removed.
/// Ties on fill-in are broken by variable name.
pub fn elimination_order(
    net: &BayesNet,
    query: &str,
    evidence: &Evidence,
) -> Result<Vec<String>, InferenceError> {
    let q = net
        .index_of(query)
        .ok_or_else(|| InferenceError::UnknownVariable(query.into()))?;
    let observed = evidence.resolve(net)?;

    let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); net.len()];
    for child in 0..net.len() {
        let family: Vec<usize> = net
            .family(child)
            .parents
            .iter()
            .copied()
            .chain(core::iter::once(child))
            .filter(|&v| observed[v].is_none())
            .collect();
        for &a in &family {
            for &b in &family {
                if a != b {
                    adjacency[a].insert(b);
                }
            }
        }
    }

    let mut remaining: BTreeSet<usize> = hidden_variables(net, q, &observed).into_iter().collect();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        // indices follow name order, so the first minimum is the lexicographic tie-break
        let mut best: Option<(usize, usize)> = None;
        for &v in &remaining {
            let fill = fill_in(&adjacency, v);
            if best.is_none_or(|(_, f)| fill < f) {
                best = Some((v, fill));
            }
        }
        let (v, _) = best.expect("remaining is non-empty");

        let neighbors: Vec<usize> = adjacency[v].iter().copied().collect();
        for &a in &neighbors {
            adjacency[a].remove(&v);
            for &b in &neighbors {
                if a != b {
                    adjacency[a].insert(b);
                }
            }
        }
        adjacency[v].clear();
        remaining.remove(&v);
        order.push(net.variables()[v].name().into());
    }
    Ok(order)
}

fn fill_in(adjacency: &[BTreeSet<usize>], v: usize) -> usize {
    let neighbors: Vec<usize> = adjacency[v].iter().copied().collect();
    let mut fill = 0;
    for (i, &a) in neighbors.iter().enumerate() {
        for &b in &neighbors[i + 1..] {
            if !adjacency[a].contains(&b) {
                fill += 1;
            }
        }
    }
    fill
}

fn hidden_variables(net: &BayesNet, query: usize, observed: &[Option<usize>]) -> Vec<usize> {
    (0..net.len())
        .filter(|&v| v != query && observed[v].is_none())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphical_model::{Cpt, Variable};
    use alloc::string::ToString;

    fn accident_chain() -> BayesNet {
        BayesNet::new(
            vec![
                Variable::binary("Traffic_Accident"),
                Variable::binary("Explosion"),
                Variable::binary("Injury"),
            ],
            vec![
                Cpt::prior("Traffic_Accident", &[0.7, 0.3]),
                Cpt::new("Explosion", ["Traffic_Accident"])
                    .with_row(&["1"], &[0.8, 0.2])
                    .with_row(&["0"], &[0.3, 0.7]),
                Cpt::new("Injury", ["Explosion"])
                    .with_row(&["1"], &[0.9, 0.1])
                    .with_row(&["0"], &[0.4, 0.6]),
            ],
        )
        .unwrap()
    }

    fn p1(d: &Distribution) -> f64 {
        d.probability("1").unwrap()
    }

    // Expected values below are hand enumerations of the joint:
    // P(E=1) = 0.8*0.7 + 0.3*0.3, P(I=1) = 0.9*P(E=1) + 0.4*(1 - P(E=1)).
    #[test]
    fn chain_priors() {
        let m = prior_marginals(&accident_chain());
        assert!((p1(&m["Traffic_Accident"]) - 0.7).abs() < 1e-12);
        assert!((p1(&m["Explosion"]) - 0.65).abs() < 1e-12);
        assert!((p1(&m["Injury"]) - 0.725).abs() < 1e-12);
    }

    #[test]
    fn chain_posteriors() {
        let net = accident_chain();
        let ev = Evidence::new().with("Traffic_Accident", "1");
        assert!((p1(&posterior(&net, &ev, "Injury").unwrap()) - 0.8).abs() < 1e-12);
        let ev = ev.with("Explosion", "0");
        assert!((p1(&posterior(&net, &ev, "Injury").unwrap()) - 0.4).abs() < 1e-12);
        // diagnostic direction: P(TA=1 | I=1) = 0.7*0.8 / 0.725
        let ev = Evidence::new().with("Injury", "1");
        let d = posterior(&net, &ev, "Traffic_Accident").unwrap();
        assert!((p1(&d) - 0.56 / 0.725).abs() < 1e-12);
    }

    #[test]
    fn query_on_evidence_variable_is_degenerate() {
        let net = accident_chain();
        let ev = Evidence::new().with("Explosion", "0");
        let d = posterior(&net, &ev, "Explosion").unwrap();
        assert_eq!(d.probs(), [0.0, 1.0]);
    }

    #[test]
    fn impossible_evidence_is_reported() {
        let net = BayesNet::new(
            vec![Variable::binary("T"), Variable::binary("I")],
            vec![
                Cpt::prior("T", &[1.0, 0.0]),
                Cpt::new("I", ["T"]).with_row(&["1"], &[0.7, 0.3]).with_row(&["0"], &[0.5, 0.5]),
            ],
        )
        .unwrap();
        let ev = Evidence::new().with("T", "0");
        assert_eq!(posterior(&net, &ev, "I"), Err(InferenceError::ImpossibleEvidence));
        assert_eq!(posterior(&net, &ev, "T"), Err(InferenceError::ImpossibleEvidence));
    }

    #[test]
    fn unknown_names() {
        let net = accident_chain();
        assert_eq!(
            posterior(&net, &Evidence::new(), "Smoke"),
            Err(InferenceError::UnknownVariable("Smoke".into()))
        );
        let ev = Evidence::new().with("Explosion", "maybe");
        assert!(matches!(
            posterior(&net, &ev, "Injury"),
            Err(InferenceError::UnknownState { .. })
        ));
    }

    #[test]
    fn min_fill_orders() {
        let net = accident_chain();
        // TA has a single neighbour (no fill), Explosion would join TA and Injury
        let order = elimination_order(&net, "Injury", &Evidence::new()).unwrap();
        assert_eq!(order, ["Traffic_Accident", "Explosion"]);

        let ev = Evidence::new().with("Traffic_Accident", "1").with("Explosion", "1");
        assert!(elimination_order(&net, "Injury", &ev).unwrap().is_empty());
    }

    #[test]
    fn every_order_gives_the_same_posterior() {
        let net = accident_chain();
        let ev = Evidence::new();
        let base = posterior(&net, &ev, "Injury").unwrap();
        for order in [["Explosion", "Traffic_Accident"], ["Traffic_Accident", "Explosion"]] {
            let order: Vec<String> = order.iter().map(|s| s.to_string()).collect();
            let d = posterior_with_order(&net, &ev, "Injury", &order).unwrap();
            assert!(d.max_abs_diff(&base) < 1e-12);
        }
        let bad = vec!["Explosion".to_string()];
        assert_eq!(
            posterior_with_order(&net, &ev, "Injury", &bad),
            Err(InferenceError::InvalidOrder)
        );
    }

    #[test]
    fn multi_state_variable() {
        // W in {sun, rain, snow}; U depends on W
        let net = BayesNet::new(
            vec![Variable::new("W", ["sun", "rain", "snow"]), Variable::binary("U")],
            vec![
                Cpt::prior("W", &[0.5, 0.3, 0.2]),
                Cpt::new("U", ["W"])
                    .with_row(&["sun"], &[0.1, 0.9])
                    .with_row(&["rain"], &[0.8, 0.2])
                    .with_row(&["snow"], &[0.6, 0.4]),
            ],
        )
        .unwrap();
        let d = posterior(&net, &Evidence::new().with("U", "1"), "W").unwrap();
        let z = 0.05 + 0.24 + 0.12;
        assert!((d.probability("sun").unwrap() - 0.05 / z).abs() < 1e-12);
        assert!((d.probability("rain").unwrap() - 0.24 / z).abs() < 1e-12);
        assert!((d.probability("snow").unwrap() - 0.12 / z).abs() < 1e-12);
    }
}
