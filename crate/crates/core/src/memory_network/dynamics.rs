//! Relaxation of a [`CamNetwork`] and its energy functions.
//!
//! Each unit sees the net input
//!
//! ```text
//! h_i = sum_j w_ij (a_j - rest) + ext_i
//! ```
//!
//! and is updated in place, one unit at a time in name order:
//!
//! ```text
//! a_i += step * (h_i > 0 ? (max - a_i) h_i : (a_i - min) h_i) - step * decay * (a_i - rest)
//! ```
//!
//! followed by clipping to `[min, max]`. Inputs are taken relative to rest,
//! so a network with no cue stays at rest.

use alloc::vec::Vec;

use super::{CamError, CamNetwork, UnitKind};

/// Outcome of [`CamNetwork::settle`].
#[derive(Debug, Clone, PartialEq)]
pub struct SettleResult {
    activations: Vec<f64>,
    names: Vec<alloc::string::String>,
    /// Energy before the first sweep, then after every sweep.
    pub energy_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl SettleResult {
    /// Activations in unit name order.
    pub fn activations(&self) -> &[f64] {
        &self.activations
    }

    pub fn activation(&self, unit: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == unit)
            .map(|i| self.activations[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(|s| s.as_str()).zip(self.activations.iter().copied())
    }

    pub fn final_energy(&self) -> f64 {
        *self.energy_trace.last().expect("trace holds at least the initial energy")
    }
}

impl CamNetwork {
    /// Net input to unit `i` under activations `a`.
    pub fn net_input(&self, a: &[f64], i: usize) -> f64 {
        let rest = self.params.rest;
        self.neighbors[i]
            .iter()
            .map(|&(j, w)| w * (a[j] - rest))
            .sum::<f64>()
            + self.units[i].external_input
    }

    /// Settles from the current activations until the largest change in a
    /// sweep drops below the tolerance or the sweep budget runs out.
    pub fn settle(&self) -> SettleResult {
        self.settle_observed(|_, _| {})
    }

    /// [`settle`](Self::settle), calling `observe(sweep, activations)` after
    /// every sweep.
    pub fn settle_observed(&self, mut observe: impl FnMut(usize, &[f64])) -> SettleResult {
        let p = self.params;
        let mut a = self.activations();
        let mut trace = Vec::new();
        trace.push(self.energy(&a));
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < p.max_sweeps {
            let mut largest = 0.0f64;
            for i in 0..a.len() {
                if self.units[i].clamp.is_some() {
                    continue;
                }
                let h = self.net_input(&a, i);
                let drive = if h > 0.0 { (p.max - a[i]) * h } else { (a[i] - p.min) * h };
                let next = (a[i] + p.step * drive - p.step * p.decay * (a[i] - p.rest)).clamp(p.min, p.max);
                largest = largest.max((next - a[i]).abs());
                a[i] = next;
            }
            sweeps += 1;
            trace.push(self.energy(&a));
            observe(sweeps, &a);
            if largest < p.tolerance {
                converged = true;
                break;
            }
        }
        SettleResult {
            activations: a,
            names: self.units.iter().map(|u| u.name.clone()).collect(),
            energy_trace: trace,
            sweeps,
            converged,
        }
    }

    /// Graded energy of activations `a`. Non-increasing along
    /// [`settle`](Self::settle) when the stability factor is at most 1;
    /// infinite when a free unit sits exactly on a bound.
    pub fn energy(&self, a: &[f64]) -> f64 {
        let rest = self.params.rest;
        let mut e = 0.0;
        for l in &self.links {
            e -= l.weight * (a[l.a] - rest) * (a[l.b] - rest);
        }
        for (i, u) in self.units.iter().enumerate() {
            e -= u.external_input * (a[i] - rest);
            if u.clamp.is_none() {
                e += self.barrier(a[i]);
            }
        }
        e
    }

    /// Decay cost of holding a free unit at `a`.
    fn barrier(&self, a: f64) -> f64 {
        let p = &self.params;
        let (span, d) = if a >= p.rest {
            (p.max - p.rest, a - p.rest)
        } else {
            (p.rest - p.min, p.rest - a)
        };
        if d >= span {
            return f64::INFINITY;
        }
        p.decay * (-span * libm::log1p(-d / span) - d)
    }

    /// Energy of a binary pattern: free units are either at `max` (`on`) or
    /// at rest, clamped units keep their clamp value. Each active free unit
    /// pays a fixed cost chosen so that a lone unit driven just hard enough
    /// to settle at `theta_on` breaks even.
    pub fn discrete_energy(&self, on: &[bool], theta_on: f64) -> Result<f64, CamError> {
        let p = &self.params;
        if !(theta_on > p.rest && theta_on < p.max) {
            return Err(CamError::InvalidThreshold(theta_on));
        }
        let high = p.max - p.rest;
        let drive = p.decay * (theta_on - p.rest) / (p.max - theta_on);
        let offset: Vec<f64> = self
            .units
            .iter()
            .zip(on)
            .map(|(u, &on)| match u.clamp {
                Some(c) => c - p.rest,
                None if on => high,
                None => 0.0,
            })
            .collect();
        let mut e = 0.0;
        for l in &self.links {
            e -= l.weight * offset[l.a] * offset[l.b];
        }
        for (i, u) in self.units.iter().enumerate() {
            e -= u.external_input * offset[i];
            if u.clamp.is_none() && on[i] {
                e += high * drive;
            }
        }
        Ok(e)
    }

    /// Attribute units whose settled activation is at least `theta_on`.
    pub fn active_attributes<'a>(&'a self, result: &SettleResult, theta_on: f64) -> Vec<&'a str> {
        self.units
            .iter()
            .zip(result.activations())
            .filter(|(u, &a)| u.kind == UnitKind::Attribute && a >= theta_on)
            .map(|(u, _)| u.name.as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::memories;
    use super::super::{Cue, DynamicsParams, WeightConfig};
    use super::*;

    fn pair() -> CamNetwork {
        CamNetwork::build(
            &memories(&[("m", &["a", "b"])]),
            &[],
            &WeightConfig::default(),
            DynamicsParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let net = pair();
        let r = net.settle();
        assert!(r.converged);
        assert_eq!(r.sweeps, 1);
        assert!(r.activations().iter().all(|&a| a == -0.1));
        assert_eq!(r.energy_trace, [0.0, 0.0]);
    }

    #[test]
    fn clamped_memory_activates_its_attributes() {
        let net = pair().clamp(&Cue::new().clamp("m", 1.0)).unwrap();
        let r = net.settle();
        assert!(r.converged);
        assert_eq!(r.activation("m"), Some(1.0));
        let a = r.activation("a").unwrap();
        // lone attribute: h = 0.5 * 1.1, equilibrium (h*max + decay*rest)/(h + decay)
        let h = 0.55;
        assert!((a - (h - 0.01) / (h + 0.1)).abs() < 1e-4);
        assert_eq!(r.activation("a"), r.activation("b"));
    }

    #[test]
    fn energy_never_rises() {
        let net = CamNetwork::build(
            &memories(&[("m", &["a", "b"]), ("n", &["b", "c"])]),
            &[("a".into(), "c".into())],
            &WeightConfig::default(),
            DynamicsParams::default(),
        )
        .unwrap()
        .clamp(&Cue::new().clamp("m", 1.0).input("c", 0.2))
        .unwrap();
        let r = net.settle();
        for w in r.energy_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{w:?}");
        }
        assert!(r.energy_trace.len() == r.sweeps + 1);
    }

    #[test]
    fn inhibition_suppresses_the_rival() {
        let build = |incompatible: &[(alloc::string::String, alloc::string::String)]| {
            CamNetwork::build(
                &memories(&[("m", &["a"]), ("n", &["b"])]),
                incompatible,
                &WeightConfig::default(),
                DynamicsParams::default(),
            )
            .unwrap()
            .clamp(&Cue::new().clamp("a", 1.0).input("b", 0.1))
            .unwrap()
            .settle()
        };
        let free = build(&[]).activation("b").unwrap();
        let inhibited = build(&[("a".into(), "b".into())]).activation("b").unwrap();
        assert!(inhibited < free);
        assert!(inhibited <= -0.1);
    }

    #[test]
    fn barrier_is_zero_at_rest_and_infinite_at_bounds() {
        let net = pair();
        assert_eq!(net.barrier(-0.1), 0.0);
        assert!(net.barrier(0.5) > 0.0);
        assert!(net.barrier(-0.15) > 0.0);
        assert_eq!(net.barrier(1.0), f64::INFINITY);
        assert_eq!(net.barrier(-0.2), f64::INFINITY);
    }

    #[test]
    fn discrete_energy_of_all_off_is_zero() {
        let net = pair();
        assert_eq!(net.discrete_energy(&[false; 3], 0.5), Ok(0.0));
        assert!(net.discrete_energy(&[false; 3], 1.0).is_err());
        // everything on: 2 links of 0.5 * 1.1^2, three costs of 1.1 * 0.1 * 0.6/0.5
        let e = net.discrete_energy(&[true; 3], 0.5).unwrap();
        assert!((e - (-1.21 + 3.0 * 1.1 * 0.12)).abs() < 1e-12);
    }
}
