//! Brute-force random-walk evolution used to cross-check the linear solves.
//!
//! Mass is pushed through the transition matrix one step at a time; whatever
//! lands on an absorbing node is moved to an accumulator. Iteration stops
//! once the mass still in flight drops below a tolerance.

use crate::error::{Error, Result};
use crate::mixing::TransitionMatrix;

pub const DEFAULT_EPS: f64 = 1e-12;
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Probability vector over nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDistribution(Vec<f64>);

impl InitialDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::Contract("initial distribution has a negative or non-finite entry".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("initial distribution sums to {total}, not 1")));
        }
        Ok(InitialDistribution(probs))
    }

    pub fn point(node_count: usize, node: usize) -> Self {
        let mut p = vec![0.0; node_count];
        p[node] = 1.0;
        InitialDistribution(p)
    }

    /// Uniform over `support`.
    pub fn uniform(node_count: usize, support: &[usize]) -> Self {
        let mut p = vec![0.0; node_count];
        for &v in support {
            p[v] = 1.0 / support.len() as f64;
        }
        InitialDistribution(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    /// Mass currently on non-absorbing nodes.
    pub distribution: Vec<f64>,
    /// Mass ever absorbed, per node (non-zero only on absorbing nodes).
    pub absorbed: Vec<f64>,
    pub steps: usize,
}

impl WalkState {
    pub fn new(p: &TransitionMatrix, start: &InitialDistribution) -> Self {
        let n = p.len();
        let mut distribution = vec![0.0; n];
        let mut absorbed = vec![0.0; n];
        for (v, &m) in start.probs().iter().enumerate() {
            if p.is_absorbing(v) {
                absorbed[v] += m;
            } else {
                distribution[v] = m;
            }
        }
        WalkState {
            distribution,
            absorbed,
            steps: 0,
        }
    }

    pub fn residual(&self) -> f64 {
        self.distribution.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.residual() + self.absorbed.iter().sum::<f64>()
    }
}

pub fn step(state: &WalkState, p: &TransitionMatrix) -> WalkState {
    let mut next = vec![0.0; state.distribution.len()];
    let mut absorbed = state.absorbed.clone();
    for (u, &mass) in state.distribution.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        for &(v, prob) in p.row(u) {
            if p.is_absorbing(v) {
                absorbed[v] += mass * prob;
            } else {
                next[v] += mass * prob;
            }
        }
    }
    WalkState {
        distribution: next,
        absorbed,
        steps: state.steps + 1,
    }
}

/// Absorbed mass per node once less than `eps` is left in flight.
pub fn absorb(
    p: &TransitionMatrix,
    start: &InitialDistribution,
    eps: f64,
    max_steps: usize,
) -> Result<Vec<f64>> {
    let mut state = WalkState::new(p, start);
    while state.residual() >= eps {
        if state.steps >= max_steps {
            return Err(Error::NonConvergence {
                steps: state.steps,
                residual: state.residual(),
            });
        }
        state = step(&state, p);
    }
    Ok(state.absorbed)
}

/// Oracle estimate of one mixing-matrix row: absorbed mass at each of
/// `sinks` starting from `source`.
pub fn absorb_row(
    p: &TransitionMatrix,
    source: usize,
    sinks: &[usize],
    eps: f64,
    max_steps: usize,
) -> Result<Vec<f64>> {
    let absorbed = absorb(p, &InitialDistribution::point(p.len(), source), eps, max_steps)?;
    Ok(sinks.iter().map(|&t| absorbed[t]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DiGraph;

    fn tm(edges: &[(&str, &str)]) -> (DiGraph, TransitionMatrix) {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        let g = DiGraph::from_labeled_edges(&e).unwrap();
        let p = TransitionMatrix::from_graph(&g);
        (g, p)
    }

    #[test]
    fn chain_steps() {
        let (_, p) = tm(&[("a", "b"), ("b", "c")]);
        let s0 = WalkState::new(&p, &InitialDistribution::point(3, 0));
        let s1 = step(&s0, &p);
        assert_eq!(s1.distribution, vec![0.0, 1.0, 0.0]);
        let s2 = step(&s1, &p);
        assert_eq!(s2.absorbed[2], 1.0);
        assert_eq!(s2.residual(), 0.0);
        assert_eq!(s2.steps, 2);
    }

    #[test]
    fn two_cycle_never_absorbs() {
        let (_, p) = tm(&[("a", "b"), ("b", "a")]);
        let mut s = WalkState::new(&p, &InitialDistribution::point(2, 0));
        for t in 1..=5 {
            s = step(&s, &p);
            let expect = if t % 2 == 1 { [0.0, 1.0] } else { [1.0, 0.0] };
            assert_eq!(s.distribution, expect);
            assert_eq!(s.total_mass(), 1.0);
        }
        let err = absorb(&p, &InitialDistribution::point(2, 0), DEFAULT_EPS, 1000).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { steps: 1000, .. }));
    }

    #[test]
    fn uniform_start_on_path() {
        let (_, p) = tm(&[("s", "u"), ("u", "t")]);
        let mut s = WalkState::new(&p, &InitialDistribution::uniform(3, &[0, 1]));
        s = step(&s, &p);
        assert_eq!(s.absorbed[2], 0.5);
        s = step(&s, &p);
        assert_eq!(s.absorbed[2], 1.0);
    }

    #[test]
    fn absorb_chain_and_diamond() {
        let (_, p) = tm(&[("a", "b"), ("b", "c")]);
        assert_eq!(absorb_row(&p, 0, &[2], DEFAULT_EPS, DEFAULT_MAX_STEPS).unwrap(), vec![1.0]);

        let (g, p) = tm(&[("s", "u"), ("u", "t1"), ("s", "w"), ("w", "t2")]);
        let t = [g.index_of("t1").unwrap(), g.index_of("t2").unwrap()];
        let row = absorb_row(&p, 0, &t, DEFAULT_EPS, DEFAULT_MAX_STEPS).unwrap();
        assert!((row[0] - 0.5).abs() < 1e-12 && (row[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mass_is_conserved_on_lossy_cycles() {
        let g = DiGraph::from_labeled_edges(&[
            ("a", "b", 1.0),
            ("b", "a", 3.0),
            ("b", "c", 0.7),
            ("c", "a", 1.0),
            ("c", "d", 0.1),
        ])
        .unwrap();
        let p = TransitionMatrix::from_graph(&g);
        let mut s = WalkState::new(&p, &InitialDistribution::uniform(4, &[0, 1, 2]));
        for _ in 0..500 {
            s = step(&s, &p);
            assert!((s.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_distribution_validation() {
        assert!(InitialDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(InitialDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(InitialDistribution::new(vec![-0.5, 1.5]).is_err());
        assert_eq!(InitialDistribution::uniform(4, &[1, 3]).support(), vec![1, 3]);
    }
}
