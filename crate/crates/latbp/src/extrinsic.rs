//! Total and extrinsic APP of lattice points and coordinates after belief
//! propagation.
//!
//! The detection of a sequence of lattice points is modeled as a degenerate
//! (memoryless) Markov process: one edge per region point, the state being
//! the index of the label containing that point. Because the state
//! probability factors `A`/`B` do not depend on the state, they cancel in
//! normalization and the extrinsic outputs reduce to sums over edges
//! weighted by label probabilities and per-position priors/likelihoods.

use crate::lattice::{LabelCode, Lattice};
use crate::Label;

/// Edge set of the degenerate Markov process: one edge per region point.
#[derive(Debug, Clone)]
pub struct MarkovEdgeSet {
    /// Coordinate alphabets per position, sorted ascending.
    alphabets: Vec<Vec<f64>>,
    /// Per edge and position, the index of the coordinate in its alphabet.
    coord_idx: Vec<Vec<usize>>,
    /// Per edge, the state: index of the label containing the point (into
    /// the region label list).
    states: Vec<usize>,
    /// The region labels, in state order.
    state_labels: Vec<Label>,
}

impl MarkovEdgeSet {
    pub fn n_edges(&self) -> usize {
        self.coord_idx.len()
    }

    pub fn n_states(&self) -> usize {
        self.state_labels.len()
    }

    pub fn state_of(&self, edge: usize) -> usize {
        self.states[edge]
    }

    pub fn state_labels(&self) -> &[Label] {
        &self.state_labels
    }

    pub fn alphabets(&self) -> &[Vec<f64>] {
        &self.alphabets
    }

    /// Uniform prior tables (`1/|Kᵢ|` per position), the default for
    /// unencoded symbols.
    pub fn uniform_priors(&self) -> Vec<Vec<f64>> {
        self.alphabets.iter().map(|a| vec![1.0 / a.len() as f64; a.len()]).collect()
    }

    /// Expectation of each coordinate under per-position tables.
    pub fn expectations(&self, tables: &[Vec<f64>]) -> Vec<f64> {
        self.alphabets
            .iter()
            .zip(tables)
            .map(|(a, t)| a.iter().zip(t).map(|(&c, &p)| c * p).sum())
            .collect()
    }
}

/// Enumerate the region points and attach their label-index states.
pub fn build_edges(lat: &Lattice, code: &LabelCode) -> MarkovEdgeSet {
    let alphabets = code.coordinate_alphabets(lat);
    let coord_idx = lat
        .region()
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(i, &c)| {
                    alphabets[i]
                        .iter()
                        .position(|&a| (a - c).abs() < 1e-9)
                        .expect("region coordinate missing from alphabet")
                })
                .collect()
        })
        .collect();
    let states = (0..lat.region().len()).map(|pi| code.region_label_of_point(pi)).collect();
    MarkovEdgeSet {
        alphabets,
        coord_idx,
        states,
        state_labels: code.region_labels.clone(),
    }
}

/// Extrinsic APP of the encoded coordinate at position `j`:
/// sum over edges with that coordinate value of the label probability times
/// all uncoded priors and the likelihoods of every *other* position.
pub fn extrinsic_coordinate(
    edges: &MarkovEdgeSet,
    label_probs: &[f64],
    u_priors: &[Vec<f64>],
    c_likelihoods: &[Vec<f64>],
    j: usize,
) -> Vec<f64> {
    edge_sum(edges, label_probs, u_priors, c_likelihoods, j, Excluded::Likelihood)
}

/// Extrinsic APP of the uncoded symbol at position `j`: same sum with the
/// roles of priors and likelihoods exchanged (position `j`'s prior is
/// excluded, every likelihood included).
pub fn extrinsic_uncoded(
    edges: &MarkovEdgeSet,
    label_probs: &[f64],
    u_priors: &[Vec<f64>],
    c_likelihoods: &[Vec<f64>],
    j: usize,
) -> Vec<f64> {
    edge_sum(edges, label_probs, u_priors, c_likelihoods, j, Excluded::Prior)
}

enum Excluded {
    Likelihood,
    Prior,
}

fn edge_sum(
    edges: &MarkovEdgeSet,
    label_probs: &[f64],
    u_priors: &[Vec<f64>],
    c_likelihoods: &[Vec<f64>],
    j: usize,
    excluded: Excluded,
) -> Vec<f64> {
    let nj = edges.alphabets[j].len();
    let mut out = vec![0.0; nj];
    for (e, idx) in edges.coord_idx.iter().enumerate() {
        let mut w = label_probs[edges.states[e]];
        for (i, &ci) in idx.iter().enumerate() {
            match excluded {
                Excluded::Likelihood => {
                    w *= u_priors[i][ci];
                    if i != j {
                        w *= c_likelihoods[i][ci];
                    }
                }
                Excluded::Prior => {
                    w *= c_likelihoods[i][ci];
                    if i != j {
                        w *= u_priors[i][ci];
                    }
                }
            }
        }
        out[idx[j]] += w;
    }
    let sum: f64 = out.iter().sum();
    if sum > 0.0 {
        for p in out.iter_mut() {
            *p /= sum;
        }
    } else {
        log::warn!("zero extrinsic mass at position {j}; using uniform");
        out.fill(1.0 / nj as f64);
    }
    out
}

/// Bookkeeping bundle for the SISO ↔ BP exchange: prior and likelihood
/// inputs, extrinsic outputs.
#[derive(Debug, Clone)]
pub struct SoftIo {
    pub u_in: Vec<Vec<f64>>,
    pub c_in: Vec<Vec<f64>>,
    pub u_out: Vec<Vec<f64>>,
    pub c_out: Vec<Vec<f64>>,
}

impl SoftIo {
    /// Uniform priors, given likelihood tables from the channel.
    pub fn new(edges: &MarkovEdgeSet, c_in: Vec<Vec<f64>>) -> Self {
        let u_in = edges.uniform_priors();
        SoftIo { u_out: u_in.clone(), c_out: u_in.clone(), u_in, c_in }
    }

    /// Run `rounds` exchanges: the coordinate extrinsic output becomes the
    /// uncoded prior of the next round (rate-one SISO stage with no code
    /// constraints), then produce the uncoded extrinsic outputs.
    pub fn exchange(&mut self, edges: &MarkovEdgeSet, label_probs: &[f64], rounds: usize) {
        let m = self.c_in.len();
        for _ in 0..rounds {
            let c_out: Vec<Vec<f64>> = (0..m)
                .map(|j| extrinsic_coordinate(edges, label_probs, &self.u_in, &self.c_in, j))
                .collect();
            self.u_in = c_out.clone();
            self.c_out = c_out;
        }
        self.u_out = (0..m)
            .map(|j| extrinsic_uncoded(edges, label_probs, &self.u_in, &self.c_in, j))
            .collect();
    }
}
