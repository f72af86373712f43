//! Total-degree multi-index sets and orthonormal tensor-product Legendre bases.
//!
//! Univariate factors are `sqrt(2k+1) * P_k(x)`, orthonormal with respect to the
//! uniform probability measure `dx/2` on `[-1, 1]`, so `psi_0 == 1` and the
//! coefficient of the constant term is the mean of the represented function.
//! Multi-indices are ordered graded-lexicographically: by total degree, then
//! by decreasing exponent of the first coordinate, recursively.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the number of basis functions in a multi-index set.
pub const DEFAULT_MAX_BASIS_SIZE: usize = 10_000_000;

/// Default ceiling on the number of entries of an assembled dense matrix.
pub const DEFAULT_MAX_MATRIX_ENTRIES: u128 = 200_000_000;

/// Exponent per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Memory guards applied when enumerating index sets and assembling matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_basis_size: usize,
    pub max_matrix_entries: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_basis_size: DEFAULT_MAX_BASIS_SIZE,
            max_matrix_entries: DEFAULT_MAX_MATRIX_ENTRIES,
        }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits {
            max_basis_size: usize::MAX,
            max_matrix_entries: u128::MAX,
        }
    }

    pub(crate) fn check_entries(&self, what: &'static str, rows: usize, cols: usize) -> Result<()> {
        let requested = rows as u128 * cols as u128;
        if requested > self.max_matrix_entries {
            return Err(Error::Capacity {
                what,
                requested,
                limit: self.max_matrix_entries,
            });
        }
        Ok(())
    }
}

/// Dimension of the total-degree space: `binomial(n + d, d)`.
pub fn subspace_dim(d: usize, n: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let overflow = || Error::Capacity {
        what: "subspace dimension",
        requested: u128::MAX,
        limit: usize::MAX as u128,
    };
    // binomial(n + d, k) with k = min(n, d); each partial product is itself a binomial
    let k = n.min(d);
    let top = n.checked_add(d).ok_or_else(overflow)?;
    let mut acc: u128 = 1;
    for i in 1..=k {
        let num = (top - k + i) as u128;
        acc = acc.checked_mul(num).ok_or_else(overflow)? / i as u128;
        if acc > usize::MAX as u128 {
            return Err(overflow());
        }
    }
    Ok(acc as usize)
}

/// Ordered set of all multi-indices with `|k| <= degree` in `dim` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    dim: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    // (coordinate, degree) pairs with degree > 0, per index
    sparse: Vec<Vec<(usize, usize)>>,
}

/// Serializable description of an index set; the set itself is rebuilt on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisMeta {
    pub dim: usize,
    pub degree: usize,
    pub ordering: String,
    pub normalization: String,
    pub size: usize,
}

pub const ORDERING: &str = "grlex";
pub const NORMALIZATION: &str = "legendre-orthonormal-dx/2";

pub fn total_degree_indices(d: usize, n: usize) -> Result<MultiIndexSet> {
    total_degree_indices_with_limit(d, n, DEFAULT_MAX_BASIS_SIZE)
}

pub fn total_degree_indices_with_limit(d: usize, n: usize, max_size: usize) -> Result<MultiIndexSet> {
    let size = subspace_dim(d, n)?;
    if size > max_size {
        return Err(Error::Capacity {
            what: "multi-index set",
            requested: size as u128,
            limit: max_size as u128,
        });
    }
    let mut indices = Vec::with_capacity(size);
    let mut current = vec![0u32; d];
    for grade in 0..=n {
        fill_grade(&mut current, 0, grade as u32, &mut indices);
    }
    debug_assert_eq!(indices.len(), size);
    let sparse = indices
        .iter()
        .map(|mi: &MultiIndex| {
            mi.0.iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| (i, k as usize))
                .collect()
        })
        .collect();
    Ok(MultiIndexSet {
        dim: d,
        degree: n,
        indices,
        sparse,
    })
}

fn fill_grade(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        current[pos] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k;
        fill_grade(current, pos + 1, remaining - k, out);
    }
    current[pos] = 0;
}

impl MultiIndexSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn meta(&self) -> BasisMeta {
        BasisMeta {
            dim: self.dim,
            degree: self.degree,
            ordering: ORDERING.to_string(),
            normalization: NORMALIZATION.to_string(),
            size: self.len(),
        }
    }

    pub fn from_meta(meta: &BasisMeta) -> Result<Self> {
        if meta.ordering != ORDERING || meta.normalization != NORMALIZATION {
            return Err(Error::Parse(format!(
                "unsupported basis ordering/normalization {}/{}",
                meta.ordering, meta.normalization
            )));
        }
        let set = total_degree_indices(meta.dim, meta.degree)?;
        if set.len() != meta.size {
            return Err(Error::Parse(format!(
                "basis size {} does not match dim={} degree={}",
                meta.size, meta.dim, meta.degree
            )));
        }
        Ok(set)
    }

    /// 1-D orthonormal Legendre values up to `degree` for every coordinate of `x`,
    /// laid out as `table[i * (degree + 1) + k]`.
    fn univariate_table(&self, x: &[f64], table: &mut Vec<f64>) {
        let stride = self.degree + 1;
        table.clear();
        table.resize(self.dim * stride, 0.0);
        for (i, &xi) in x.iter().enumerate() {
            legendre_fill(xi, &mut table[i * stride..(i + 1) * stride]);
        }
    }

    fn eval_into(&self, x: &[f64], table: &mut Vec<f64>, out: &mut [f64]) {
        self.univariate_table(x, table);
        let stride = self.degree + 1;
        for (slot, factors) in out.iter_mut().zip(&self.sparse) {
            let mut v = 1.0;
            for &(i, k) in factors {
                v *= table[i * stride + k];
            }
            *slot = v;
        }
    }
}

/// Fill `out[k] = sqrt(2k+1) P_k(x)` for `k = 0..out.len()`.
fn legendre_fill(x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let mut p_prev = 1.0;
    out[0] = 1.0;
    if n == 1 {
        return;
    }
    let mut p = x;
    out[1] = 3f64.sqrt() * x;
    for k in 1..n - 1 {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
        out[k + 1] = (2.0 * kf + 3.0).sqrt() * p;
    }
}

/// Orthonormal Legendre polynomial of degree `k` at `x`.
pub fn legendre_eval_1d(k: usize, x: f64) -> f64 {
    let mut buf = vec![0.0; k + 1];
    legendre_fill(x, &mut buf);
    buf[k]
}

/// `Psi(x)`: every basis function of `ms` evaluated at `x`.
pub fn basis_eval(ms: &MultiIndexSet, x: &[f64]) -> Result<DVector<f64>> {
    if x.len() != ms.dim {
        return Err(Error::dim("basis_eval point", ms.dim, x.len()));
    }
    let mut out = DVector::zeros(ms.len());
    let mut table = Vec::new();
    ms.eval_into(x, &mut table, out.as_mut_slice());
    Ok(out)
}

/// Vandermonde-like matrix: row `i` is `Psi(points[i])^T`.
///
/// `points` is a row-major `K x d` buffer.
pub fn vandermonde(ms: &MultiIndexSet, points: &[f64], limits: &Limits) -> Result<DMatrix<f64>> {
    let d = ms.dim;
    if !points.len().is_multiple_of(d) {
        return Err(Error::InvalidArgument(format!(
            "point buffer of length {} is not a multiple of dimension {d}",
            points.len()
        )));
    }
    let k = points.len() / d;
    limits.check_entries("vandermonde matrix", k, ms.len())?;
    let n = ms.len();
    let mut mat = DMatrix::zeros(k, n);
    let mut row = vec![0.0; n];
    let mut table = Vec::new();
    for (i, x) in points.chunks_exact(d).enumerate() {
        ms.eval_into(x, &mut table, &mut row);
        for (j, &v) in row.iter().enumerate() {
            mat[(i, j)] = v;
        }
    }
    Ok(mat)
}
