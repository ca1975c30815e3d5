//! Tanner graph of a label code, built from dual-code generator vectors.
//!
//! Each label coordinate is a variable node with alphabet `Z_{gᵢ}`; each
//! generator vector of the dual code is a check node constraining its
//! nonzero positions through the scaled residue
//! `Σ (lcm/gᵢ)·vᵢ·lᵢ ≡ 0 (mod lcm)`. The graph is generally non-binary.

use crate::lattice::{DualGenerators, LabelCode};
use crate::{Error, Label, Result};

/// One check node: the variables it touches and the scaled coefficients,
/// all arithmetic mod `modulus`.
#[derive(Debug, Clone)]
pub struct CheckNode {
    pub vars: Vec<usize>,
    pub coeffs: Vec<u32>,
    /// The dual generator vector this check came from.
    pub generator: Label,
}

/// Bipartite variable/check graph over the label coordinates.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    var_alphabets: Vec<u32>,
    modulus: u32,
    checks: Vec<CheckNode>,
    /// For each variable, the `(check, local index)` pairs touching it.
    var_checks: Vec<Vec<(usize, usize)>>,
    /// Variables with alphabet size > 1 that appear in no check.
    unconstrained: Vec<usize>,
}

impl TannerGraph {
    /// Build directly from scaled check equations. `checks` holds
    /// `(variable indices, scaled coefficients, source vector)` triples.
    pub fn from_scaled_checks(
        var_alphabets: Vec<u32>,
        modulus: u32,
        checks: Vec<(Vec<usize>, Vec<u32>, Label)>,
    ) -> Self {
        let mut nodes = Vec::new();
        for (vars, coeffs, generator) in checks {
            if vars.is_empty() {
                log::warn!("dropping check with empty neighborhood ({generator:?})");
                continue;
            }
            nodes.push(CheckNode { vars, coeffs, generator });
        }
        let mut var_checks = vec![Vec::new(); var_alphabets.len()];
        for (j, ck) in nodes.iter().enumerate() {
            for (k, &i) in ck.vars.iter().enumerate() {
                var_checks[i].push((j, k));
            }
        }
        let unconstrained = var_alphabets
            .iter()
            .enumerate()
            .filter(|&(i, &g)| g > 1 && var_checks[i].is_empty())
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        if !unconstrained.is_empty() {
            log::warn!("variables {unconstrained:?} are unconstrained; priors alone apply");
        }
        TannerGraph { var_alphabets, modulus, checks: nodes, var_checks, unconstrained }
    }

    pub fn num_vars(&self) -> usize {
        self.var_alphabets.len()
    }

    pub fn var_alphabets(&self) -> &[u32] {
        &self.var_alphabets
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn checks(&self) -> &[CheckNode] {
        &self.checks
    }

    /// `(check, local index)` pairs for the checks touching variable `i`.
    pub fn var_checks(&self, i: usize) -> &[(usize, usize)] {
        &self.var_checks[i]
    }

    pub fn unconstrained_vars(&self) -> &[usize] {
        &self.unconstrained
    }

    /// Whether check `j` is satisfied by a full label assignment.
    pub fn check_satisfied(&self, j: usize, label: &[u32]) -> bool {
        let ck = &self.checks[j];
        let mut acc: u64 = 0;
        for (k, &i) in ck.vars.iter().enumerate() {
            acc += ck.coeffs[k] as u64 * label[i] as u64;
        }
        acc % self.modulus as u64 == 0
    }

    /// All assignments over `N(j) \ {pin_var}` (in the check's variable
    /// order) that satisfy check `j` with `pin_var = pin_val`.
    pub fn local_configs(&self, j: usize, pin_var: usize, pin_val: u32) -> Vec<Vec<u32>> {
        let ck = &self.checks[j];
        let pin_pos = ck
            .vars
            .iter()
            .position(|&v| v == pin_var)
            .expect("pinned variable must neighbor the check");
        let others: Vec<usize> = (0..ck.vars.len()).filter(|&k| k != pin_pos).collect();
        let pinned = ck.coeffs[pin_pos] as u64 * pin_val as u64;
        let mut out = Vec::new();
        let mut vals = vec![0u32; others.len()];
        loop {
            let mut acc = pinned;
            for (slot, &k) in others.iter().enumerate() {
                acc += ck.coeffs[k] as u64 * vals[slot] as u64;
            }
            if acc % self.modulus as u64 == 0 {
                out.push(vals.clone());
            }
            // advance the mixed-radix counter over the other alphabets
            let mut done = true;
            for (slot, &k) in others.iter().enumerate() {
                let g = self.var_alphabets[ck.vars[k]];
                if vals[slot] + 1 < g {
                    vals[slot] += 1;
                    done = false;
                    break;
                }
                vals[slot] = 0;
            }
            if done {
                break;
            }
        }
        out
    }

    /// DOT rendering for documentation.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph tanner {\n  rankdir=LR;\n");
        for (i, &g) in self.var_alphabets.iter().enumerate() {
            s.push_str(&format!("  l{i} [shape=circle, label=\"l{} (Z{})\"];\n", i + 1, g));
        }
        for (j, ck) in self.checks.iter().enumerate() {
            let gen: Vec<String> = ck.generator.iter().map(|d| d.to_string()).collect();
            s.push_str(&format!(
                "  v{j} [shape=box, label=\"v{} = {}\"];\n",
                j + 1,
                gen.join("")
            ));
            for &i in &ck.vars {
                s.push_str(&format!("  l{i} -- v{j};\n"));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// One check node per dual generator vector, edges to the variables with a
/// nonzero coefficient. Coefficients are pre-scaled by `lcm/gᵢ`.
pub fn build_graph(gens: &DualGenerators, code: &LabelCode) -> Result<TannerGraph> {
    if gens.group_sizes != code.group_sizes {
        return Err(Error::Config("generator/label-code group sizes differ".into()));
    }
    let lcm = code.lcm;
    let mut checks = Vec::new();
    for v in &gens.generators {
        let mut vars = Vec::new();
        let mut coeffs = Vec::new();
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0 {
                vars.push(i);
                coeffs.push((lcm / code.group_sizes[i].max(1)) * vi % lcm);
            }
        }
        checks.push((vars, coeffs, v.clone()));
    }
    Ok(TannerGraph::from_scaled_checks(code.group_sizes.clone(), lcm, checks))
}
