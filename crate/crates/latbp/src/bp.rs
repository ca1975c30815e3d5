//! Non-binary belief propagation on the lattice Tanner graph.
//!
//! Three initialization schemes turn a soft estimate `x̂` into per-variable
//! priors `f`: the projection-domain scheme (closest coset point per label),
//! its simplified per-direction variant, and a probability-domain scheme
//! built from per-coordinate likelihoods. Message passing then follows the
//! usual check/variable exchange with a flooding schedule, after which
//! [`total_app`] yields per-variable marginals and per-label probabilities
//! (restricted to the labels the shaping region uses), and [`prune_labels`]
//! keeps the `k` most likely labels.

use nalgebra::DVector;

use crate::lattice::{closest_in_coset_idx, CoordSystem, LabelCode, Lattice};
use crate::tanner::TannerGraph;
use crate::{Error, Label, Result};

/// Per-branch noise variances `σᵢ²` attached to the soft estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    pub sigma2: Vec<f64>,
}

impl NoiseProfile {
    pub fn new(sigma2: Vec<f64>) -> Result<Self> {
        if sigma2.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::NonFinite("noise variances must be positive"));
        }
        Ok(NoiseProfile { sigma2 })
    }

    /// White profile: the same variance on all `m` branches.
    pub fn white(m: usize, sigma2: f64) -> Result<Self> {
        Self::new(vec![sigma2; m])
    }
}

/// Variances of the noise projections onto the Gram-Schmidt directions,
/// given independent per-coordinate variances.
pub fn direction_variances(coord_sigma2: &[f64], cs: &CoordSystem) -> Vec<f64> {
    let m = cs.dim();
    (0..m)
        .map(|i| {
            let wi = cs.w(i);
            let n2 = wi.norm_squared();
            (0..m).map(|l| wi[l] * wi[l] / n2 * coord_sigma2[l]).sum()
        })
        .collect()
}

/// Working state of one detection instance: priors `f` and the per-edge
/// message tables `q` (variable→check) and `r` (check→variable), indexed
/// `[check][local neighbor][value]`.
#[derive(Debug, Clone)]
pub struct BeliefState {
    f: Vec<Vec<f64>>,
    q: Vec<Vec<Vec<f64>>>,
    r: Vec<Vec<Vec<f64>>>,
    iterations: usize,
    /// Per-region-label probabilities the initialization assigned, when the
    /// state came from one of the init schemes (empty otherwise).
    label_priors: Vec<f64>,
}

impl BeliefState {
    /// Start from per-variable priors: `q` copies `f`, `r` is flat.
    pub fn from_priors(f: Vec<Vec<f64>>, graph: &TannerGraph) -> Self {
        let q = graph
            .checks()
            .iter()
            .map(|ck| ck.vars.iter().map(|&i| f[i].clone()).collect())
            .collect();
        let r = graph
            .checks()
            .iter()
            .map(|ck| {
                ck.vars
                    .iter()
                    .map(|&i| vec![1.0; graph.var_alphabets()[i] as usize])
                    .collect()
            })
            .collect();
        BeliefState { f, q, r, iterations: 0, label_priors: Vec::new() }
    }

    pub fn priors(&self) -> &[Vec<f64>] {
        &self.f
    }

    /// Label probabilities assigned at initialization (region label order).
    pub fn label_priors(&self) -> &[f64] {
        &self.label_priors
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Check the running invariants: everything non-negative, `f` and `q`
    /// normalized per variable / edge.
    pub fn is_normalized(&self, tol: f64) -> bool {
        let ok_row = |row: &Vec<f64>| {
            row.iter().all(|&p| p >= 0.0) && (row.iter().sum::<f64>() - 1.0).abs() <= tol
        };
        self.f.iter().all(ok_row)
            && self.q.iter().all(|ck| ck.iter().all(ok_row))
            && self.r.iter().all(|ck| ck.iter().all(|row| row.iter().all(|&p| p >= 0.0)))
    }
}

/// Turn per-region-label log weights into priors `f` via the label-to-
/// coordinate marginalization, then package the belief state.
fn state_from_label_logweights(
    logw: &[f64],
    code: &LabelCode,
    graph: &TannerGraph,
) -> BeliefState {
    let pr = normalize_log(logw);
    let mut f: Vec<Vec<f64>> = code
        .group_sizes
        .iter()
        .map(|&g| vec![0.0; g as usize])
        .collect();
    for (li, l) in code.region_labels.iter().enumerate() {
        for (i, &a) in l.iter().enumerate() {
            f[i][a as usize] += pr[li];
        }
    }
    for row in f.iter_mut() {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            for p in row.iter_mut() {
                *p /= s;
            }
        }
    }
    let mut state = BeliefState::from_priors(f, graph);
    state.label_priors = pr;
    state
}

/// Exponentiate log weights with max subtraction and normalize to sum one.
fn normalize_log(logw: &[f64]) -> Vec<f64> {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logw.iter().map(|&w| (w - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in out.iter_mut() {
        *p /= sum;
    }
    out
}

/// Projection-domain initialization: per region label, distance to the
/// closest coset point inside the region, weighted by the per-direction
/// noise variances. Accumulation happens in the log domain.
pub fn init_projection(
    xhat: &DVector<f64>,
    lat: &Lattice,
    cs: &CoordSystem,
    code: &LabelCode,
    graph: &TannerGraph,
    noise: &NoiseProfile,
) -> Result<BeliefState> {
    if code.region_labels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let proj_x = cs.project_all(xhat);
    let mut logw = Vec::with_capacity(code.region_labels.len());
    for l in &code.region_labels {
        let pi = closest_in_coset_idx(&proj_x, l, lat, code)?;
        let d = &proj_x - code.region_projection(pi);
        let w: f64 = d
            .iter()
            .enumerate()
            .map(|(i, &di)| -di * di / (2.0 * noise.sigma2[i]))
            .sum();
        logw.push(w);
    }
    Ok(state_from_label_logweights(&logw, code, graph))
}

/// Simplified initialization: each direction is examined in isolation, the
/// per-direction distance being the minimum over the label's region points.
pub fn init_simplified(
    xhat: &DVector<f64>,
    _lat: &Lattice,
    cs: &CoordSystem,
    code: &LabelCode,
    graph: &TannerGraph,
    noise: &NoiseProfile,
) -> Result<BeliefState> {
    if code.region_labels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let m = cs.dim();
    let proj_x = cs.project_all(xhat);
    let mut logw = Vec::with_capacity(code.region_labels.len());
    for li in 0..code.region_labels.len() {
        let mut w = 0.0;
        for i in 0..m {
            let di = code
                .region_points_with_label(li)
                .iter()
                .map(|&pi| (proj_x[i] - code.region_projection(pi)[i]).abs())
                .fold(f64::INFINITY, f64::min);
            w -= di * di / (2.0 * noise.sigma2[i]);
        }
        logw.push(w);
    }
    Ok(state_from_label_logweights(&logw, code, graph))
}

/// Probability-domain coordinate likelihoods: `P(x̂ᵢ | xᵢ = c)` normalized
/// over each coordinate alphabet.
pub fn init_probability(
    xhat: &DVector<f64>,
    alphabets: &[Vec<f64>],
    noise: &NoiseProfile,
) -> Result<Vec<Vec<f64>>> {
    if alphabets.iter().any(|a| a.is_empty()) {
        return Err(Error::EmptyRegion);
    }
    let mut tables = Vec::with_capacity(alphabets.len());
    for (i, alphabet) in alphabets.iter().enumerate() {
        let logw: Vec<f64> = alphabet
            .iter()
            .map(|&c| -(xhat[i] - c) * (xhat[i] - c) / (2.0 * noise.sigma2[i]))
            .collect();
        tables.push(normalize_log(&logw));
    }
    Ok(tables)
}

/// Probability-domain belief-state construction: label weights are sums of
/// per-point coordinate-likelihood products over each coset, then the same
/// label→coordinate marginalization as the other schemes.
///
/// `noise` carries per-coordinate variances here (the likelihoods live in
/// the coordinate domain, not the projection domain).
pub fn init_probability_beliefs(
    xhat: &DVector<f64>,
    lat: &Lattice,
    code: &LabelCode,
    graph: &TannerGraph,
    noise: &NoiseProfile,
) -> Result<BeliefState> {
    if code.region_labels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let alphabets = code.coordinate_alphabets(lat);
    let tables = init_probability(xhat, &alphabets, noise)?;
    let mut logw = Vec::with_capacity(code.region_labels.len());
    for li in 0..code.region_labels.len() {
        let mut acc = 0.0f64;
        for &pi in code.region_points_with_label(li) {
            let p = lat.region()[pi].iter().enumerate().fold(1.0, |prod, (i, &c)| {
                let ai = alphabet_index(&alphabets[i], c);
                prod * tables[i][ai]
            });
            acc += p;
        }
        logw.push(acc.max(f64::MIN_POSITIVE).ln());
    }
    Ok(state_from_label_logweights(&logw, code, graph))
}

fn alphabet_index(alphabet: &[f64], c: f64) -> usize {
    alphabet
        .iter()
        .position(|&a| (a - c).abs() < 1e-9)
        .expect("region coordinate missing from alphabet")
}

/// Domain of the check-to-variable summation.
#[derive(Debug, Clone, Copy)]
pub enum RSumMode<'a> {
    /// Sum over local configurations of the check's neighborhood (standard
    /// non-binary BP). Default.
    Local,
    /// Literal reading that sums over full label-code words satisfying the
    /// check; kept for comparison, since every codeword satisfies every
    /// check and the graph structure then degenerates.
    GlobalLabelCode(&'a [Label]),
}

/// Run `n_iters` flooding rounds: all `r` messages from the current `q`,
/// then all `q` messages from `f` and the fresh `r`.
pub fn bp_iterate(
    state: &mut BeliefState,
    graph: &TannerGraph,
    n_iters: usize,
    mode: RSumMode<'_>,
) {
    for _ in 0..n_iters {
        // r update
        for (j, ck) in graph.checks().iter().enumerate() {
            for (k, &var) in ck.vars.iter().enumerate() {
                let g = graph.var_alphabets()[var] as usize;
                let mut row = vec![0.0; g];
                for (alpha, slot) in row.iter_mut().enumerate() {
                    *slot = match mode {
                        RSumMode::Local => {
                            let mut acc = 0.0;
                            for config in graph.local_configs(j, var, alpha as u32) {
                                let mut prod = 1.0;
                                let mut ci = 0;
                                for (kk, _) in ck.vars.iter().enumerate() {
                                    if kk == k {
                                        continue;
                                    }
                                    prod *= state.q[j][kk][config[ci] as usize];
                                    ci += 1;
                                }
                                acc += prod;
                            }
                            acc
                        }
                        RSumMode::GlobalLabelCode(labels) => {
                            let mut acc = 0.0;
                            for l in labels.iter().filter(|l| l[var] == alpha as u32) {
                                let mut prod = 1.0;
                                for (kk, &vk) in ck.vars.iter().enumerate() {
                                    if kk == k {
                                        continue;
                                    }
                                    prod *= state.q[j][kk][l[vk] as usize];
                                }
                                acc += prod;
                            }
                            acc
                        }
                    };
                }
                let sum: f64 = row.iter().sum();
                if sum > 0.0 {
                    for p in row.iter_mut() {
                        *p /= sum;
                    }
                } else {
                    log::warn!("all-zero r column at check {j}, variable {var}; using uniform");
                    row.fill(1.0 / g as f64);
                }
                state.r[j][k] = row;
            }
        }
        // q update
        for i in 0..graph.num_vars() {
            let g = graph.var_alphabets()[i] as usize;
            for &(j, k) in graph.var_checks(i) {
                let mut row = vec![0.0; g];
                for (alpha, slot) in row.iter_mut().enumerate() {
                    let mut prod = state.f[i][alpha];
                    for &(jj, kk) in graph.var_checks(i) {
                        if jj == j {
                            continue;
                        }
                        prod *= state.r[jj][kk][alpha];
                    }
                    *slot = prod;
                }
                let sum: f64 = row.iter().sum();
                if sum > 0.0 {
                    for p in row.iter_mut() {
                        *p /= sum;
                    }
                } else {
                    log::warn!("all-zero q column at check {j}, variable {i}; using uniform");
                    row.fill(1.0 / g as f64);
                }
                state.q[j][k] = row;
            }
        }
        state.iterations += 1;
    }
}

/// Total APP after message passing: per-variable marginals
/// `Pr(lᵢ=α) ∝ fᵢ(α)·Π r`, and per-label probabilities formed as the
/// product of marginals, restricted to the region labels and renormalized.
pub fn total_app(
    state: &BeliefState,
    graph: &TannerGraph,
    code: &LabelCode,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut marginals = Vec::with_capacity(graph.num_vars());
    for i in 0..graph.num_vars() {
        let g = graph.var_alphabets()[i] as usize;
        let mut row = vec![0.0; g];
        for (alpha, slot) in row.iter_mut().enumerate() {
            let mut prod = state.f[i][alpha];
            for &(j, k) in graph.var_checks(i) {
                prod *= state.r[j][k][alpha];
            }
            *slot = prod;
        }
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            for p in row.iter_mut() {
                *p /= sum;
            }
        } else {
            row.fill(1.0 / g as f64);
        }
        marginals.push(row);
    }
    let mut label_probs: Vec<f64> = code
        .region_labels
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, &a)| marginals[i][a as usize]).product())
        .collect();
    let sum: f64 = label_probs.iter().sum();
    if sum > 0.0 {
        for p in label_probs.iter_mut() {
            *p /= sum;
        }
    } else {
        log::warn!("all-zero label probabilities; using uniform over region labels");
        label_probs.fill(1.0 / code.region_labels.len() as f64);
    }
    (marginals, label_probs)
}

/// Keep the `k` highest-probability labels (ties resolved toward the
/// lexicographically smaller label), zero the rest, renormalize.
pub fn prune_labels(probs: &mut [f64], labels: &[Label], k: usize) {
    if k >= probs.len() {
        return;
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| {
        probs[b]
            .partial_cmp(&probs[a])
            .unwrap()
            .then_with(|| labels[a].cmp(&labels[b]))
    });
    for &idx in order.iter().skip(k) {
        probs[idx] = 0.0;
    }
    let sum: f64 = probs.iter().sum();
    if sum > 0.0 {
        for p in probs.iter_mut() {
            *p /= sum;
        }
    }
}
