//! Complex ↔ real isomorphisms and the equivalent real transmission model.
//!
//! A complex MIMO block `Y = S H̄ + N` (arrays of size `T×Nr`, channel
//! `Nt×Nr`) is mapped onto the real model `y = H x + n` where
//! `x = mat_isom(Sᵀ)`, `H` is a row permutation of the block-diagonal
//! expansion `I_T ⊗ [[Re H̄ᵀ, −Im H̄ᵀ], [Im H̄ᵀ, Re H̄ᵀ]]`, and
//! `y = mat_isom(Y)`. All functions here are pure; power scaling is applied
//! by the simulator, never baked into `H`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Stack a complex vector as `[Re(a); Im(a)]`, doubling its length.
pub fn vec_isom(a: &[Complex64]) -> Result<DVector<f64>> {
    if !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("vec_isom input"));
    }
    let n = a.len();
    let mut out = DVector::zeros(2 * n);
    for (i, z) in a.iter().enumerate() {
        out[i] = z.re;
        out[n + i] = z.im;
    }
    Ok(out)
}

/// Concatenate [`vec_isom`] of each column of `a`, in column order.
pub fn mat_isom(a: &DMatrix<Complex64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    let mut out = DVector::zeros(2 * m * n);
    for c in 0..n {
        let col: Vec<Complex64> = a.column(c).iter().copied().collect();
        let v = vec_isom(&col)?;
        out.rows_mut(c * 2 * m, 2 * m).copy_from(&v);
    }
    Ok(out)
}

/// Real block-diagonal expansion `I_T ⊗ [[Re H̄ᵀ, −Im H̄ᵀ], [Im H̄ᵀ, Re H̄ᵀ]]`
/// of a complex channel matrix `hbar` (`Nt×Nr`), sized `2NrT × 2NtT`.
pub fn real_channel(hbar: &DMatrix<Complex64>, t: usize) -> Result<DMatrix<f64>> {
    if t == 0 {
        return Err(Error::Config("real_channel requires T >= 1".into()));
    }
    if !hbar.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("real_channel input"));
    }
    let (nt, nr) = hbar.shape();
    let mut block = DMatrix::zeros(2 * nr, 2 * nt);
    for r in 0..nr {
        for c in 0..nt {
            let z = hbar[(c, r)]; // (H̄ᵀ)[r][c]
            block[(r, c)] = z.re;
            block[(r, nt + c)] = -z.im;
            block[(nr + r, c)] = z.im;
            block[(nr + r, nt + c)] = z.re;
        }
    }
    let mut h = DMatrix::zeros(2 * nr * t, 2 * nt * t);
    for b in 0..t {
        h.view_mut((b * 2 * nr, b * 2 * nt), (2 * nr, 2 * nt)).copy_from(&block);
    }
    Ok(h)
}

/// Index map `π` with `mat_isom(Y)[k] = mat_isom(Yᵀ)[π[k]]` for any `T×Nr`
/// array `Y`. Derived from the dimensions alone; values are never inspected.
pub fn output_permutation(nr: usize, t: usize) -> Vec<usize> {
    let mut perm = vec![0usize; 2 * nr * t];
    for j in 0..nr {
        for tt in 0..t {
            perm[j * 2 * t + tt] = tt * 2 * nr + j;
            perm[j * 2 * t + t + tt] = tt * 2 * nr + nr + j;
        }
    }
    perm
}

/// Apply `π` to a transpose-ordered real vector, yielding `y = mat_isom(Y)`.
pub fn permute_to_y(yc: &DVector<f64>, nr: usize, t: usize) -> Result<DVector<f64>> {
    let n = 2 * nr * t;
    if yc.len() != n {
        return Err(Error::DimensionMismatch {
            context: "permute_to_y",
            expected: n,
            got: yc.len(),
        });
    }
    let perm = output_permutation(nr, t);
    Ok(DVector::from_fn(n, |k, _| yc[perm[k]]))
}

/// Equivalent real transmission model `y = H x + n` with `H` already
/// row-permuted so that `y = mat_isom(Y)`.
#[derive(Debug, Clone)]
pub struct RealModel {
    /// Row-permuted block-diagonal expansion of the complex channel,
    /// `2NrT × 2NtT`.
    pub h: DMatrix<f64>,
    /// Received vector `mat_isom(Y)`, when built from an observation.
    pub y: DVector<f64>,
    /// The row permutation `π` applied to the block-diagonal expansion.
    pub permutation: Vec<usize>,
}

impl RealModel {
    /// Build the real model for channel `hbar` (`Nt×Nr`) over `t` uses,
    /// taking the received complex array `y_complex` (`T×Nr`).
    pub fn from_complex(hbar: &DMatrix<Complex64>, y_complex: &DMatrix<Complex64>) -> Result<Self> {
        let (_, nr) = hbar.shape();
        let t = y_complex.nrows();
        if y_complex.ncols() != nr {
            return Err(Error::DimensionMismatch {
                context: "RealModel received array columns",
                expected: nr,
                got: y_complex.ncols(),
            });
        }
        let h = Self::permuted_channel(hbar, t)?;
        let y = mat_isom(y_complex)?;
        Ok(RealModel { h, y, permutation: output_permutation(nr, t) })
    }

    /// The row-permuted real channel alone (no observation).
    pub fn permuted_channel(hbar: &DMatrix<Complex64>, t: usize) -> Result<DMatrix<f64>> {
        let (_, nr) = hbar.shape();
        let hc = real_channel(hbar, t)?;
        let perm = output_permutation(nr, t);
        let mut h = DMatrix::zeros(hc.nrows(), hc.ncols());
        for (k, &src) in perm.iter().enumerate() {
            h.row_mut(k).copy_from(&hc.row(src));
        }
        Ok(h)
    }
}
