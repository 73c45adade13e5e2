//! Human-readable and canonical JSON renderings of engine results.
//!
//! JSON output has sorted keys and prints probabilities, activations and
//! energies with exactly nine decimals, so identical runs give identical
//! bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use sensemaking_core::graphical_model::{Distribution, Evidence};
use sensemaking_core::memory_network::{SettleResult, SynthesizedSign};
use sensemaking_core::oracle::EnergyLandscape;
use sensemaking_core::sensemaking_loop::SensemakingDecision;
use serde_json::{json, Map, Number, Value};

/// Fixed nine-decimal number; non-finite values become `null`.
pub fn fixed(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let mut s = format!("{x:.9}");
    if s == "-0.000000000" {
        s.remove(0);
    }
    Value::Number(Number::from_str(&s).expect("fixed-point decimal is valid JSON"))
}

/// Scientific notation with four significant digits, for tiny deviations.
pub fn scientific(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&format!("{x:.3e}")).expect("scientific decimal is valid JSON"))
}

pub fn fmt9(x: f64) -> String {
    let s = format!("{x:.9}");
    if s == "-0.000000000" {
        s[1..].into()
    } else {
        s
    }
}

/// Pretty-printed with a trailing newline.
pub fn canonical(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values always serialize");
    s.push('\n');
    s
}

pub fn distribution(d: &Distribution) -> Value {
    let map: Map<String, Value> = d
        .states()
        .iter()
        .zip(d.probs())
        .map(|(s, &p)| (s.clone(), fixed(p)))
        .collect();
    Value::Object(map)
}

pub fn evidence(e: &Evidence) -> Value {
    Value::Object(e.iter().map(|(k, v)| (k.to_string(), Value::from(v))).collect())
}

pub fn activations(r: &SettleResult) -> Value {
    Value::Object(r.iter().map(|(k, a)| (k.to_string(), fixed(a))).collect())
}

pub fn sign(s: &SynthesizedSign) -> Value {
    json!({
        "active_attributes": s.active_attributes,
        "contributing_memories": s.contributing_memories,
        "recombined": s.recombined,
    })
}

pub fn settle(r: &SettleResult, s: &SynthesizedSign) -> Value {
    json!({
        "activations": activations(r),
        "converged": r.converged,
        "energy": {
            "final": fixed(r.final_energy()),
            "initial": fixed(r.energy_trace[0]),
        },
        "sign": sign(s),
        "sweeps": r.sweeps,
    })
}

pub fn infer(ev: &Evidence, posteriors: &BTreeMap<String, Distribution>) -> Value {
    json!({
        "evidence": evidence(ev),
        "posteriors": Value::Object(
            posteriors.iter().map(|(k, d)| (k.clone(), distribution(d))).collect()
        ),
    })
}

pub fn decision(d: &SensemakingDecision) -> Value {
    let trace: Vec<Value> = d
        .trace
        .iter()
        .map(|t| {
            json!({
                "activations": activations(&t.settle),
                "converged": t.settle.converged,
                "evidence": evidence(&t.evidence),
                "extracted": evidence(&t.extracted),
                "posterior": t.posterior.as_ref().map_or(Value::Null, distribution),
                "round": t.round,
                "sign": sign(&t.sign),
                "sweeps": t.settle.sweeps,
            })
        })
        .collect();
    json!({
        "action": d.action,
        "fixpoint": d.fixpoint,
        "initial_posterior": distribution(&d.initial_posterior),
        "posterior": distribution(&d.posterior),
        "query": d.posterior.variable(),
        "rounds": d.rounds,
        "trace": trace,
    })
}

pub fn landscape(l: &EnergyLandscape) -> Value {
    let minimizers: Vec<Vec<&str>> = l.minimizers.iter().map(|m| l.active_units(m)).collect();
    json!({
        "free_units": l.free_units,
        "min_energy": fixed(l.min_energy),
        "minimizers": minimizers,
    })
}

pub fn distribution_text(d: &Distribution) -> String {
    let mut out = String::new();
    for (s, &p) in d.states().iter().zip(d.probs()) {
        let _ = writeln!(out, "P({}={})={}", d.variable(), s, fmt9(p));
    }
    out
}

pub fn settle_text(r: &SettleResult, s: &SynthesizedSign) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} after {} sweeps, energy {} -> {}",
        if r.converged { "converged" } else { "not converged" },
        r.sweeps,
        fmt9(r.energy_trace[0]),
        fmt9(r.final_energy()),
    );
    let width = r.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    for (name, a) in r.iter() {
        let _ = writeln!(out, "  {name:<width$}  {:>12}", fmt9(a));
    }
    out.push_str(&sign_text(s));
    out
}

pub fn sign_text(s: &SynthesizedSign) -> String {
    format!(
        "sign: [{}] from [{}]{}\n",
        s.active_attributes.join(", "),
        s.contributing_memories.join(", "),
        if s.recombined { " (recombined)" } else { "" },
    )
}

fn evidence_text(e: &Evidence) -> String {
    if e.is_empty() {
        return "none".into();
    }
    e.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

pub fn decision_text(d: &SensemakingDecision) -> String {
    let mut out = String::new();
    let q = d.posterior.variable();
    let trigger = &d.posterior.states()[0];
    let _ = writeln!(out, "initial {}", distribution_text(&d.initial_posterior).lines().next().unwrap_or(""));
    for t in &d.trace {
        let _ = writeln!(
            out,
            "round {}: {} sweeps{}, extracted {}, held {}",
            t.round,
            t.settle.sweeps,
            if t.settle.converged { "" } else { " (not converged)" },
            evidence_text(&t.extracted),
            evidence_text(&t.evidence),
        );
        let _ = write!(out, "  {}", sign_text(&t.sign));
        if let Some(p) = &t.posterior {
            let _ = writeln!(out, "  P({q}={trigger})={}", fmt9(p.probs()[0]));
        }
    }
    let _ = writeln!(
        out,
        "{} after {} round{}",
        if d.fixpoint { "fixpoint" } else { "round limit" },
        d.rounds,
        if d.rounds == 1 { "" } else { "s" },
    );
    out.push_str(&distribution_text(&d.posterior));
    let _ = writeln!(out, "action: {}", d.action);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_decimals() {
        assert_eq!(canonical(&fixed(0.8)), "0.800000000\n");
        assert_eq!(canonical(&fixed(-1e-13)), "0.000000000\n");
        assert_eq!(fixed(f64::INFINITY), Value::Null);
        assert_eq!(fmt9(0.725), "0.725000000");
    }

    #[test]
    fn keys_are_sorted() {
        let d = Distribution::new("X", vec!["b".into(), "a".into()], vec![0.25, 0.75]);
        let text = canonical(&json!({"z": 1, "a": distribution(&d)}));
        assert_eq!(text, "{\n  \"a\": {\n    \"a\": 0.750000000,\n    \"b\": 0.250000000\n  },\n  \"z\": 1\n}\n");
    }
}
