//! Lattice representation, Gram-Schmidt coordinate system, coset labeling,
//! label code and dual label code.
//!
//! A lattice `Λ = {Bu : u ∈ Zᵐ}` is partitioned by projecting onto the
//! Gram-Schmidt directions of its basis. Direction `i` carries two 1-D
//! lattices: the projection of `Λ` (spacing `δᵢ`) and the cross-section
//! `Λ ∩ Wᵢ` (spacing `Δᵢ`); their quotient is the label group of size
//! `gᵢ = Δᵢ/δᵢ`. Every lattice point gets an m-tuple of coset indices (its
//! label), the set of labels is an Abelian block code, and the dual of that
//! code supplies parity checks for the Tanner graph in [`crate::tanner`].
//!
//! Everything here is enumeration-based and intended for desk-scale
//! lattices (explicit shaping regions of tens of points, dimension well
//! below the enumeration limit).

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Label, Result};

/// Pivot threshold below which Gram-Schmidt declares rank deficiency.
const GS_PIVOT_TOL: f64 = 1e-10;
/// Tolerance for "projection is an integer multiple of the spacing".
const MULTIPLE_TOL: f64 = 1e-6;
/// Default coefficient radius for lattice enumeration.
pub const DEFAULT_ENUM_RADIUS: i64 = 3;
/// Hard cap on enumerated points, to fail loudly instead of spinning.
const ENUM_LIMIT: usize = 2_000_000;

/// A lattice with translate and an explicit finite shaping-region point set.
#[derive(Debug, Clone)]
pub struct Lattice {
    basis: DMatrix<f64>,
    translate: DVector<f64>,
    region: Vec<DVector<f64>>,
}

impl Lattice {
    /// Build a lattice from a full-rank square `basis` (columns are basis
    /// vectors), a `translate` u₀ and the region points (elements of
    /// `Λ + u₀`). Region membership is validated to 1e-9.
    pub fn new(
        basis: DMatrix<f64>,
        translate: DVector<f64>,
        region: Vec<DVector<f64>>,
    ) -> Result<Self> {
        let m = basis.nrows();
        if basis.ncols() != m || translate.len() != m {
            return Err(Error::DimensionMismatch {
                context: "lattice basis/translate",
                expected: m,
                got: basis.ncols().max(translate.len()),
            });
        }
        let lu = basis.clone().lu();
        for (idx, p) in region.iter().enumerate() {
            if p.len() != m {
                return Err(Error::DimensionMismatch {
                    context: "region point",
                    expected: m,
                    got: p.len(),
                });
            }
            let u = lu
                .solve(&(p - &translate))
                .ok_or(Error::RankDeficient { index: 0, pivot: 0.0 })?;
            for (dir, &ui) in u.iter().enumerate() {
                if (ui - ui.round()).abs() > 1e-9 {
                    let _ = idx;
                    return Err(Error::NotALatticePoint { direction: dir, ratio: ui });
                }
            }
        }
        Ok(Lattice { basis, translate, region })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn translate(&self) -> &DVector<f64> {
        &self.translate
    }

    pub fn region(&self) -> &[DVector<f64>] {
        &self.region
    }
}

/// Generator of the 4-dimensional checkerboard lattice (integer vectors
/// with even coordinate sum), columns as basis vectors.
pub fn d4_basis() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 1.0, 1.0, 2.0, //
            1.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 1.0, 0.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
}

/// Gram-Schmidt coordinate system of a lattice basis.
///
/// `w` holds the orthogonal (unnormalized) vectors, `mu` the
/// lower-triangular coefficients with `bᵢ = wᵢ + Σ_{j<i} μᵢⱼ wⱼ`.
#[derive(Debug, Clone)]
pub struct CoordSystem {
    w: Vec<DVector<f64>>,
    mu: DMatrix<f64>,
    /// Rows are the orthonormal directions ŵᵢ; projections are one matvec.
    unit: DMatrix<f64>,
}

impl CoordSystem {
    /// Classic Gram-Schmidt on the basis columns. Rejects rank-deficient
    /// input (pivot below 1e-10).
    pub fn gram_schmidt(basis: &DMatrix<f64>) -> Result<Self> {
        let m = basis.nrows();
        if basis.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "gram_schmidt basis",
                expected: m,
                got: basis.ncols(),
            });
        }
        let mut w: Vec<DVector<f64>> = Vec::with_capacity(m);
        let mut mu = DMatrix::zeros(m, m);
        for i in 0..m {
            let mut wi: DVector<f64> = basis.column(i).into();
            for j in 0..i {
                let mij = basis.column(i).dot(&w[j]) / w[j].norm_squared();
                mu[(i, j)] = mij;
                wi -= &w[j] * mij;
            }
            if wi.norm() < GS_PIVOT_TOL {
                return Err(Error::RankDeficient { index: i, pivot: wi.norm() });
            }
            w.push(wi);
        }
        let unit = DMatrix::from_fn(m, m, |i, j| w[i][j] / w[i].norm());
        Ok(CoordSystem { w, mu, unit })
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// Signed length of `x` along direction `i`: `xᵀwᵢ/‖wᵢ‖`.
    pub fn project(&self, x: &DVector<f64>, i: usize) -> f64 {
        self.unit.row(i).dot(&x.transpose())
    }

    /// All m projections at once.
    pub fn project_all(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.unit * x
    }

    pub fn w(&self, i: usize) -> &DVector<f64> {
        &self.w[i]
    }

    pub fn mu(&self) -> &DMatrix<f64> {
        &self.mu
    }
}

/// Per-direction spacings of the projection lattice (`δᵢ`), the
/// cross-section lattice (`Δᵢ`) and the label group sizes `gᵢ = Δᵢ/δᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spacings {
    pub proj: Vec<f64>,
    pub cross: Vec<f64>,
    pub group_sizes: Vec<u32>,
}

impl Spacings {
    pub fn lcm(&self) -> u32 {
        self.group_sizes.iter().copied().fold(1u32, lcm_u32)
    }
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    a / gcd_u32(a, b) * b
}

/// Visit `B·u` for every integer coefficient vector `u` with entries in
/// `[-radius, radius]`.
fn for_each_lattice_point<F: FnMut(&DVector<f64>)>(
    basis: &DMatrix<f64>,
    radius: i64,
    mut f: F,
) -> Result<()> {
    let m = basis.ncols();
    let side = (2 * radius + 1) as usize;
    let total = side.checked_pow(m as u32).filter(|&t| t <= ENUM_LIMIT);
    let total = total.ok_or_else(|| {
        Error::Config(format!(
            "lattice enumeration over {side}^{m} points exceeds the limit; \
             lower the radius or the dimension"
        ))
    })?;
    let mut u = vec![-radius; m];
    let mut point = DVector::zeros(basis.nrows());
    for _ in 0..total {
        point.fill(0.0);
        for (j, &uj) in u.iter().enumerate() {
            if uj != 0 {
                point.axpy(uj as f64, &basis.column(j).into_owned(), 1.0);
            }
        }
        f(&point);
        // mixed-radix increment
        for digit in u.iter_mut() {
            if *digit < radius {
                *digit += 1;
                break;
            }
            *digit = -radius;
        }
    }
    Ok(())
}

/// Greatest common divisor of positive reals up to tolerance.
fn float_gcd(mut a: f64, mut b: f64) -> f64 {
    while b > 1e-9 {
        let r = a - b * (a / b).round();
        a = b;
        b = r.abs();
    }
    a
}

/// Detect `δᵢ`, `Δᵢ` and `gᵢ` for each direction by enumerating lattice
/// points with coefficients in `[-radius, radius]`.
///
/// Fails with [`Error::OrthogonalSublattice`] when no lattice point lies on
/// some direction within the radius, i.e. the orthogonal sublattice cannot
/// be obtained from this Gram-Schmidt system.
pub fn compute_spacings(lat: &Lattice, cs: &CoordSystem, radius: i64) -> Result<Spacings> {
    let m = lat.dim();
    let mut proj_vals: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut cross_min = vec![f64::INFINITY; m];
    for_each_lattice_point(lat.basis(), radius, |p| {
        let norm2 = p.norm_squared();
        if norm2 < 1e-18 {
            return;
        }
        let projections = cs.project_all(p);
        for i in 0..m {
            let pi = projections[i];
            if pi.abs() > 1e-9 {
                proj_vals[i].push(pi.abs());
                // on the line iff the residual component vanishes
                if (norm2 - pi * pi).abs() < 1e-9 * norm2.max(1.0) && pi.abs() < cross_min[i] {
                    cross_min[i] = pi.abs();
                }
            }
        }
    })?;

    let mut proj = Vec::with_capacity(m);
    let mut cross = Vec::with_capacity(m);
    let mut group_sizes = Vec::with_capacity(m);
    for i in 0..m {
        if proj_vals[i].is_empty() {
            return Err(Error::OrthogonalSublattice { direction: i });
        }
        if !cross_min[i].is_finite() {
            return Err(Error::OrthogonalSublattice { direction: i });
        }
        let mut delta = proj_vals[i].iter().copied().fold(f64::INFINITY, f64::min);
        // refine in case the box minimum is not the true spacing
        let mut changed = true;
        while changed {
            changed = false;
            for &v in &proj_vals[i] {
                let r = v - delta * (v / delta).round();
                if r.abs() > 1e-9 {
                    delta = float_gcd(delta, v);
                    changed = true;
                }
            }
            if delta < 1e-9 {
                return Err(Error::NotALatticePoint { direction: i, ratio: delta });
            }
        }
        let ratio = cross_min[i] / delta;
        let g = ratio.round();
        if (ratio - g).abs() > MULTIPLE_TOL {
            return Err(Error::NotALatticePoint { direction: i, ratio });
        }
        proj.push(delta);
        cross.push(cross_min[i]);
        group_sizes.push(g as u32);
    }
    Ok(Spacings { proj, cross, group_sizes })
}

/// Label of a lattice point `λ ∈ Λ` (subtract the translate first):
/// `lᵢ = round(projᵢ(λ)/δᵢ) mod gᵢ`.
pub fn label_of(point: &DVector<f64>, cs: &CoordSystem, sp: &Spacings) -> Result<Label> {
    let m = cs.dim();
    let projections = cs.project_all(point);
    let mut label = Vec::with_capacity(m);
    for i in 0..m {
        let t = projections[i] / sp.proj[i];
        let k = t.round();
        if (t - k).abs() > MULTIPLE_TOL {
            return Err(Error::NotALatticePoint { direction: i, ratio: t });
        }
        let g = sp.group_sizes[i] as i64;
        label.push((k as i64).rem_euclid(g) as u32);
    }
    Ok(label)
}

/// The label code of a lattice: group sizes, all labels, the labels used by
/// the shaping region, and per-label region point indices.
#[derive(Debug, Clone)]
pub struct LabelCode {
    pub group_sizes: Vec<u32>,
    /// Full label code `L(Λ)`, sorted lexicographically.
    pub labels: Vec<Label>,
    /// Labels attained by region points, sorted lexicographically.
    pub region_labels: Vec<Label>,
    /// Least common multiple of the group sizes.
    pub lcm: u32,
    /// Region point index → index into `region_labels`.
    region_label_idx: Vec<usize>,
    /// `region_labels` index → region point indices carrying that label.
    points_by_label: Vec<Vec<usize>>,
    /// Projections of each (translated) region point, for distance work.
    region_proj: Vec<DVector<f64>>,
}

impl LabelCode {
    /// Index of `label` within `region_labels`, if the region uses it.
    pub fn region_label_index(&self, label: &[u32]) -> Option<usize> {
        self.region_labels.binary_search_by(|l| l.as_slice().cmp(label)).ok()
    }

    /// Region point indices whose label is `region_labels[idx]`.
    pub fn region_points_with_label(&self, idx: usize) -> &[usize] {
        &self.points_by_label[idx]
    }

    /// Index into `region_labels` for region point `point_idx`.
    pub fn region_label_of_point(&self, point_idx: usize) -> usize {
        self.region_label_idx[point_idx]
    }

    /// Projections of the translated region point `point_idx`.
    pub fn region_projection(&self, point_idx: usize) -> &DVector<f64> {
        &self.region_proj[point_idx]
    }

    /// Distinct coordinate values appearing at each position across the
    /// region, sorted ascending. These are the coordinate alphabets `K_i`.
    pub fn coordinate_alphabets(&self, lat: &Lattice) -> Vec<Vec<f64>> {
        let m = lat.dim();
        let mut alphabets = vec![Vec::<f64>::new(); m];
        for p in lat.region() {
            for i in 0..m {
                let v = p[i];
                if !alphabets[i].iter().any(|&a| (a - v).abs() < 1e-9) {
                    alphabets[i].push(v);
                }
            }
        }
        for a in alphabets.iter_mut() {
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        }
        alphabets
    }
}

/// Enumerate the label code: all labels of `Λ` (one fundamental period of
/// the orthogonal sublattice is covered by the enumeration box) plus the
/// subset used by the region.
///
/// The result is cross-checked three ways: the label set must be closed
/// under the group operation, its size must equal `ΠΔᵢ / |det B|` (the
/// index of the orthogonal sublattice), and the closure of the region
/// labels must be contained in it.
pub fn enumerate_label_code(
    lat: &Lattice,
    cs: &CoordSystem,
    sp: &Spacings,
    radius: i64,
) -> Result<LabelCode> {
    if lat.region().is_empty() {
        return Err(Error::EmptyRegion);
    }
    let g = sp.group_sizes.clone();
    let mut labels: BTreeSet<Label> = BTreeSet::new();
    let mut err = None;
    for_each_lattice_point(lat.basis(), radius, |p| {
        if err.is_some() {
            return;
        }
        match label_of(p, cs, sp) {
            Ok(l) => {
                labels.insert(l);
            }
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let labels: Vec<Label> = labels.into_iter().collect();

    // |L(Λ)| = [Λ : ⊕Λ_{Wᵢ}] = ΠΔᵢ / |det B|
    let det = lat.basis().determinant().abs();
    let expected = sp.cross.iter().product::<f64>() / det;
    if (labels.len() as f64 - expected).abs() > 0.5 {
        return Err(Error::Config(format!(
            "label enumeration found {} labels, index computation expects {:.3}; \
             increase the enumeration radius",
            labels.len(),
            expected
        )));
    }
    for a in &labels {
        for b in &labels {
            let sum = add_labels(a, b, &g);
            if labels.binary_search(&sum).is_err() {
                return Err(Error::Config(
                    "label set is not closed under the group operation".into(),
                ));
            }
        }
    }

    // label the region points
    let mut region_set: BTreeSet<Label> = BTreeSet::new();
    let mut point_labels = Vec::with_capacity(lat.region().len());
    for p in lat.region() {
        let l = label_of(&(p - lat.translate()), cs, sp)?;
        if labels.binary_search(&l).is_err() {
            return Err(Error::Config(format!(
                "region label {:?} missing from the enumerated code",
                l
            )));
        }
        region_set.insert(l.clone());
        point_labels.push(l);
    }
    let region_labels: Vec<Label> = region_set.into_iter().collect();
    let mut region_label_idx = Vec::with_capacity(point_labels.len());
    let mut points_by_label = vec![Vec::new(); region_labels.len()];
    for (pi, l) in point_labels.iter().enumerate() {
        let li = region_labels.binary_search(l).unwrap();
        region_label_idx.push(li);
        points_by_label[li].push(pi);
    }
    let region_proj = lat.region().iter().map(|p| cs.project_all(p)).collect();

    Ok(LabelCode {
        group_sizes: g,
        labels,
        region_labels,
        lcm: sp.lcm(),
        region_label_idx,
        points_by_label,
        region_proj,
    })
}

/// Coordinate-wise sum of two labels mod the group sizes.
pub fn add_labels(a: &[u32], b: &[u32], g: &[u32]) -> Label {
    a.iter().zip(b).zip(g).map(|((&x, &y), &gi)| (x + y) % gi.max(1)).collect()
}

/// Scaled inner product `Σᵢ (lcm/gᵢ)·vᵢ·lᵢ mod lcm`. A vector `v` belongs
/// to the dual code iff this residue is zero for every label.
pub fn check_label(v: &[u32], l: &[u32], g: &[u32], lcm: u32) -> u32 {
    let mut acc: u64 = 0;
    for i in 0..v.len() {
        let weight = (lcm / g[i].max(1)) as u64;
        acc += weight * v[i] as u64 * l[i] as u64;
    }
    (acc % lcm as u64) as u32
}

/// Generator vectors for the dual label code, with the full dual kept for
/// inspection.
#[derive(Debug, Clone)]
pub struct DualGenerators {
    /// Irredundant generating subset found by greedy span growth over the
    /// lexicographically ordered dual words.
    pub generators: Vec<Label>,
    /// Every vector orthogonal (scaled product) to all labels, sorted.
    pub dual_code: Vec<Label>,
    pub lcm: u32,
    pub group_sizes: Vec<u32>,
}

impl DualGenerators {
    /// Wrap externally supplied generator vectors, verifying each against
    /// the full label code. `dual_code` becomes the span of the vectors.
    pub fn from_vectors(vectors: Vec<Label>, code: &LabelCode) -> Result<Self> {
        for v in &vectors {
            for l in &code.labels {
                if check_label(v, l, &code.group_sizes, code.lcm) != 0 {
                    return Err(Error::Config(format!(
                        "vector {:?} is not orthogonal to label {:?}",
                        v, l
                    )));
                }
            }
        }
        let dual_code = span(&vectors, &code.group_sizes);
        Ok(DualGenerators {
            generators: vectors,
            dual_code,
            lcm: code.lcm,
            group_sizes: code.group_sizes.clone(),
        })
    }
}

/// Closure of a generator set under coordinate-wise addition mod `g`.
fn span(generators: &[Label], g: &[u32]) -> Vec<Label> {
    let zero: Label = vec![0; g.len()];
    let mut set: BTreeSet<Label> = BTreeSet::new();
    set.insert(zero);
    let mut frontier: Vec<Label> = set.iter().cloned().collect();
    while let Some(x) = frontier.pop() {
        for v in generators {
            let s = add_labels(&x, v, g);
            if set.insert(s.clone()) {
                frontier.push(s);
            }
        }
    }
    set.into_iter().collect()
}

/// Exhaustively find the dual label code, then extract an irredundant
/// generating subset by greedy span growth in lexicographic order.
pub fn dual_generators(code: &LabelCode) -> Result<DualGenerators> {
    let g = &code.group_sizes;
    let m = g.len();
    let total: u64 = g.iter().map(|&x| x.max(1) as u64).product();
    if total > ENUM_LIMIT as u64 {
        return Err(Error::Config(format!(
            "dual search over {total} candidates exceeds the limit"
        )));
    }
    let mut dual_code: Vec<Label> = Vec::new();
    let mut v: Label = vec![0; m];
    for _ in 0..total {
        if code.labels.iter().all(|l| check_label(&v, l, g, code.lcm) == 0) {
            dual_code.push(v.clone());
        }
        for i in 0..m {
            if v[i] + 1 < g[i].max(1) {
                v[i] += 1;
                break;
            }
            v[i] = 0;
        }
    }
    dual_code.sort();

    let mut generators: Vec<Label> = Vec::new();
    let mut current = span(&[], g);
    for w in &dual_code {
        if w.iter().all(|&x| x == 0) {
            continue;
        }
        if current.binary_search(w).is_err() {
            generators.push(w.clone());
            current = span(&generators, g);
        }
    }
    Ok(DualGenerators {
        generators,
        dual_code,
        lcm: code.lcm,
        group_sizes: g.clone(),
    })
}

/// Closest region point carrying `label`, measured in projection
/// coordinates; ties broken by lexicographic point coordinates.
pub fn closest_in_coset(
    xhat: &DVector<f64>,
    label: &[u32],
    lat: &Lattice,
    code: &LabelCode,
    cs: &CoordSystem,
) -> Result<DVector<f64>> {
    let idx = closest_in_coset_idx(&cs.project_all(xhat), label, lat, code)?;
    Ok(lat.region()[idx].clone())
}

/// Same as [`closest_in_coset`] but taking the already-projected estimate
/// and returning the region point index.
pub fn closest_in_coset_idx(
    xhat_proj: &DVector<f64>,
    label: &[u32],
    lat: &Lattice,
    code: &LabelCode,
) -> Result<usize> {
    let li = code
        .region_label_index(label)
        .ok_or_else(|| Error::UnknownLabel(format!("{label:?}")))?;
    let mut best: Option<(f64, usize)> = None;
    for &pi in code.region_points_with_label(li) {
        let d2 = (xhat_proj - code.region_projection(pi)).norm_squared();
        let better = match best {
            None => true,
            Some((bd, bi)) => {
                d2 < bd - 1e-12
                    || ((d2 - bd).abs() <= 1e-12
                        && lex_less(&lat.region()[pi], &lat.region()[bi]))
            }
        };
        if better {
            best = Some((d2, pi));
        }
    }
    Ok(best.expect("region label with no points").1)
}

fn lex_less(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for i in 0..a.len() {
        if a[i] < b[i] - 1e-12 {
            return true;
        }
        if a[i] > b[i] + 1e-12 {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn labels_from(strs: &[&str]) -> Vec<Label> {
        let mut v: Vec<Label> = strs
            .iter()
            .map(|s| s.chars().map(|c| c.to_digit(10).unwrap()).collect())
            .collect();
        v.sort();
        v
    }

    /// All 16 points of {±1}^4 (second shell of the checkerboard lattice
    /// with unit-magnitude coordinates).
    fn pm_one_region() -> Vec<DVector<f64>> {
        (0..16u32)
            .map(|i| {
                DVector::from_fn(4, |j, _| if (i >> (3 - j)) & 1 == 1 { 1.0 } else { -1.0 })
            })
            .collect()
    }

    fn d4_fixture() -> (Lattice, CoordSystem, Spacings, LabelCode) {
        let lat = Lattice::new(d4_basis(), DVector::zeros(4), pm_one_region()).unwrap();
        let cs = CoordSystem::gram_schmidt(lat.basis()).unwrap();
        let sp = compute_spacings(&lat, &cs, DEFAULT_ENUM_RADIUS).unwrap();
        let code = enumerate_label_code(&lat, &cs, &sp, DEFAULT_ENUM_RADIUS).unwrap();
        (lat, cs, sp, code)
    }

    #[test]
    fn gram_schmidt_identity_basis() {
        let cs = CoordSystem::gram_schmidt(&DMatrix::identity(4, 4)).unwrap();
        for i in 0..4 {
            let mut e = DVector::zeros(4);
            e[i] = 1.0;
            assert_relative_eq!((cs.w(i) - e).norm(), 0.0, epsilon = 1e-12);
        }
        assert_relative_eq!(cs.mu().amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gram_schmidt_d4_matches_known_vectors() {
        let cs = CoordSystem::gram_schmidt(&d4_basis()).unwrap();
        let expect = [
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.5, -0.5, 1.0, 0.0],
            vec![-1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0],
            vec![0.5, -0.5, -0.5, 0.5],
        ];
        for (i, e) in expect.iter().enumerate() {
            let diff = cs.w(i) - DVector::from_row_slice(e);
            assert!(diff.norm() < 1e-12, "w{} = {:?}", i + 1, cs.w(i).as_slice());
        }
    }

    #[test]
    fn gram_schmidt_scaling_homogeneity() {
        let b = d4_basis();
        let cs1 = CoordSystem::gram_schmidt(&b).unwrap();
        let cs2 = CoordSystem::gram_schmidt(&(&b * 2.0)).unwrap();
        for i in 0..4 {
            assert!((cs2.w(i) - cs1.w(i) * 2.0).norm() < 1e-12);
        }
        assert!((cs2.mu() - cs1.mu()).amax() < 1e-12);
    }

    #[test]
    fn gram_schmidt_rejects_rank_deficient() {
        let mut b = DMatrix::identity(3, 3);
        b.column_mut(2).copy_from(&DVector::from_row_slice(&[1.0, 1.0, 0.0]));
        b[(0, 2)] = 1.0;
        b[(1, 2)] = 0.0;
        b[(2, 2)] = 0.0; // col2 == col0
        assert!(matches!(
            CoordSystem::gram_schmidt(&b),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn project_self_gives_norm() {
        let cs = CoordSystem::gram_schmidt(&d4_basis()).unwrap();
        let w1 = cs.w(0).clone();
        assert_relative_eq!(cs.project(&w1, 0), w1.norm(), epsilon = 1e-12);
    }

    #[test]
    fn project_d4_hand_values() {
        let cs = CoordSystem::gram_schmidt(&d4_basis()).unwrap();
        let x = DVector::from_row_slice(&[1.0, 1.0, 0.0, 0.0]);
        assert_relative_eq!(cs.project(&x, 0), 2.0_f64.sqrt(), epsilon = 1e-12);
        let x = DVector::from_row_slice(&[1.0, 0.0, 1.0, 0.0]);
        assert_relative_eq!(cs.project(&x, 2), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn spacings_d4() {
        let (_, _, sp, _) = d4_fixture();
        assert_eq!(sp.group_sizes, vec![2, 6, 6, 2]);
        assert_relative_eq!(sp.proj[0], 1.0 / 2.0_f64.sqrt(), epsilon = 1e-9);
        assert_relative_eq!(sp.cross[0], 2.0_f64.sqrt(), epsilon = 1e-9);
        assert_eq!(sp.lcm(), 6);
    }

    #[test]
    fn spacings_integer_lattice_trivial() {
        let region = vec![DVector::from_row_slice(&[0.0, 0.0, 0.0])];
        let lat = Lattice::new(DMatrix::identity(3, 3), DVector::zeros(3), region).unwrap();
        let cs = CoordSystem::gram_schmidt(lat.basis()).unwrap();
        let sp = compute_spacings(&lat, &cs, 2).unwrap();
        assert_eq!(sp.group_sizes, vec![1, 1, 1]);
        for i in 0..3 {
            assert_relative_eq!(sp.proj[i], 1.0, epsilon = 1e-9);
            assert_relative_eq!(sp.cross[i], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn label_of_d4_examples() {
        let (_, cs, sp, _) = d4_fixture();
        let cases = [
            (vec![1.0, 1.0, 0.0, 0.0], vec![0, 0, 0, 0]),
            (vec![1.0, 0.0, 1.0, 0.0], vec![1, 3, 0, 0]),
            (vec![1.0, 1.0, 1.0, -1.0], vec![0, 2, 5, 1]),
        ];
        for (x, want) in cases {
            let l = label_of(&DVector::from_row_slice(&x), &cs, &sp).unwrap();
            assert_eq!(l, want, "point {:?}", x);
        }
    }

    #[test]
    fn label_of_rejects_off_lattice() {
        let (_, cs, sp, _) = d4_fixture();
        let x = DVector::from_row_slice(&[0.5, 0.1, 0.0, 0.0]);
        assert!(label_of(&x, &cs, &sp).is_err());
    }

    #[test]
    fn label_code_d4_matches_published_tables() {
        let (_, _, _, code) = d4_fixture();
        let expect = labels_from(&[
            "0000", "0031", "0220", "0251", "1300", "1331", "1520", "1551", "1140", "1111",
            "0440", "0411",
        ]);
        assert_eq!(code.labels, expect);
        let region_expect = labels_from(&["0000", "0031", "0220", "0251", "0440", "0411"]);
        assert_eq!(code.region_labels, region_expect);
        assert_eq!(code.lcm, 6);
    }

    #[test]
    fn label_code_region_point_counts() {
        let (lat, _, _, code) = d4_fixture();
        let total: usize =
            (0..code.region_labels.len()).map(|i| code.region_points_with_label(i).len()).sum();
        assert_eq!(total, lat.region().len());
        for i in 0..code.region_labels.len() {
            assert!(!code.region_points_with_label(i).is_empty());
        }
    }

    #[test]
    fn label_code_trivial_lattice() {
        let region = vec![DVector::from_row_slice(&[1.0, 0.0])];
        let lat = Lattice::new(DMatrix::identity(2, 2), DVector::zeros(2), region).unwrap();
        let cs = CoordSystem::gram_schmidt(lat.basis()).unwrap();
        let sp = compute_spacings(&lat, &cs, 2).unwrap();
        let code = enumerate_label_code(&lat, &cs, &sp, 2).unwrap();
        assert_eq!(code.labels, vec![vec![0, 0]]);
        assert_eq!(code.region_labels, vec![vec![0, 0]]);
    }

    #[test]
    fn label_code_group_closure() {
        let (_, _, _, code) = d4_fixture();
        for a in &code.labels {
            for b in &code.labels {
                let s = add_labels(a, b, &code.group_sizes);
                assert!(code.labels.binary_search(&s).is_ok());
            }
        }
    }

    #[test]
    fn check_label_examples() {
        let g = vec![2, 6, 6, 2];
        assert_eq!(check_label(&[0, 0, 0, 0], &[1, 3, 0, 0], &g, 6), 0);
        // weights lcm/g = (3,1,1,3): 3*1 + 1*3 + 0 + 0 = 6 ≡ 0
        assert_eq!(check_label(&[1, 1, 5, 1], &[1, 3, 0, 0], &g, 6), 0);
        // 0 + 0 + 4*3 + 0 = 12 ≡ 0
        assert_eq!(check_label(&[0, 2, 4, 0], &[0, 0, 3, 1], &g, 6), 0);
        // a non-dual pair for contrast: v = 1000, l = 1300 -> 3*1 = 3
        assert_eq!(check_label(&[1, 0, 0, 0], &[1, 3, 0, 0], &g, 6), 3);
    }

    #[test]
    fn dual_code_d4_matches_published_tables() {
        let (_, _, _, code) = d4_fixture();
        let dual = dual_generators(&code).unwrap();
        let expect = labels_from(&[
            "0000", "0240", "0420", "1511", "1300", "1331", "0451", "1540", "1151", "0031",
            "1120", "0211",
        ]);
        assert_eq!(dual.dual_code, expect);
    }

    #[test]
    fn dual_generators_span_the_dual_code() {
        let (_, _, _, code) = d4_fixture();
        let dual = dual_generators(&code).unwrap();
        let spanned = span(&dual.generators, &code.group_sizes);
        assert_eq!(spanned, dual.dual_code);
        assert_eq!(dual.generators.len(), 3);
    }

    #[test]
    fn published_generator_set_is_valid() {
        let (_, _, _, code) = d4_fixture();
        let vs = labels_from(&["1151", "0240", "0031"]);
        let dual = DualGenerators::from_vectors(vs, &code).unwrap();
        let full = dual_generators(&code).unwrap();
        assert_eq!(dual.dual_code, full.dual_code); // same span
    }

    #[test]
    fn dual_of_trivial_lattice_is_zero() {
        let region = vec![DVector::from_row_slice(&[0.0, 0.0])];
        let lat = Lattice::new(DMatrix::identity(2, 2), DVector::zeros(2), region).unwrap();
        let cs = CoordSystem::gram_schmidt(lat.basis()).unwrap();
        let sp = compute_spacings(&lat, &cs, 2).unwrap();
        let code = enumerate_label_code(&lat, &cs, &sp, 2).unwrap();
        let dual = dual_generators(&code).unwrap();
        assert_eq!(dual.dual_code, vec![vec![0, 0]]);
        assert!(dual.generators.is_empty());
    }

    #[test]
    fn duality_holds_for_all_pairs() {
        let (_, _, _, code) = d4_fixture();
        let dual = dual_generators(&code).unwrap();
        let mut pairs = 0;
        for v in &dual.dual_code {
            for l in &code.labels {
                assert_eq!(check_label(v, l, &code.group_sizes, code.lcm), 0);
                pairs += 1;
            }
        }
        assert_eq!(pairs, 144);
        // |L|·|L*| = Πg
        let ambient: usize = code.group_sizes.iter().map(|&g| g as usize).product();
        assert_eq!(code.labels.len() * dual.dual_code.len(), ambient);
    }

    #[test]
    fn closest_in_coset_exact_point() {
        let (lat, cs, sp, code) = d4_fixture();
        let p = DVector::from_row_slice(&[1.0, -1.0, 1.0, 1.0]);
        let l = label_of(&p, &cs, &sp).unwrap();
        let got = closest_in_coset(&p, &l, &lat, &code, &cs).unwrap();
        assert_eq!(got, p);
    }

    #[test]
    fn closest_in_coset_d4_example() {
        let (lat, cs, _, code) = d4_fixture();
        let xhat = DVector::from_row_slice(&[0.9, 1.1, 0.8, 1.2]);
        let got = closest_in_coset(&xhat, &[0, 2, 2, 0], &lat, &code, &cs).unwrap();
        assert_eq!(got, DVector::from_row_slice(&[1.0, 1.0, 1.0, 1.0]));
    }

    #[test]
    fn closest_in_coset_tie_breaks_lexicographically() {
        let (lat, cs, _, code) = d4_fixture();
        let xhat = DVector::zeros(4);
        let got = closest_in_coset(&xhat, &[0, 0, 0, 0], &lat, &code, &cs).unwrap();
        // label 0000 covers [-1,1,1,-1] and [1,-1,-1,1]; both equidistant
        assert_eq!(got, DVector::from_row_slice(&[-1.0, 1.0, 1.0, -1.0]));
    }

    #[test]
    fn closest_in_coset_rejects_unused_label() {
        let (lat, cs, _, code) = d4_fixture();
        let xhat = DVector::zeros(4);
        // 1300 is in L(Λ) but not among the region labels
        assert!(closest_in_coset(&xhat, &[1, 3, 0, 0], &lat, &code, &cs).is_err());
    }

    #[test]
    fn labeling_invariant_to_translate() {
        let offset = DVector::from_row_slice(&[0.25, -0.5, 3.0, 0.125]);
        let region: Vec<DVector<f64>> = pm_one_region().iter().map(|p| p + &offset).collect();
        let lat = Lattice::new(d4_basis(), offset, region).unwrap();
        let cs = CoordSystem::gram_schmidt(lat.basis()).unwrap();
        let sp = compute_spacings(&lat, &cs, DEFAULT_ENUM_RADIUS).unwrap();
        let code = enumerate_label_code(&lat, &cs, &sp, DEFAULT_ENUM_RADIUS).unwrap();
        let (_, _, _, base) = d4_fixture();
        assert_eq!(code.region_labels, base.region_labels);
        for pi in 0..16 {
            assert_eq!(code.region_label_of_point(pi), base.region_label_of_point(pi));
        }
    }

    #[test]
    fn coordinate_alphabets_of_region() {
        let (lat, _, _, code) = d4_fixture();
        let alpha = code.coordinate_alphabets(&lat);
        assert_eq!(alpha, vec![vec![-1.0, 1.0]; 4]);
    }

    #[test]
    fn region_membership_validated() {
        let bad = vec![DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0])]; // odd sum
        assert!(Lattice::new(d4_basis(), DVector::zeros(4), bad).is_err());
    }
}
