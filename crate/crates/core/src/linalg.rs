//! Tolerance-aware dense linear algebra on small symmetric matrices.
//!
//! Every spectral quantity (rank, pseudo-determinant, null space, square-root
//! factor) is read off a single [`Spectrum`], so all of them agree on which
//! eigenvalues count as zero.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng::stream_rng;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative eigenvalue threshold for rank decisions.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Residual tolerance for subspace containment checks.
pub const CONTAINMENT_TOL: f64 = 1e-8;
/// Gram-matrix tolerance for orthonormality.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;

fn check_finite(a: &Mat) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(invalid("matrix must have at least one row and one column"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    Ok(())
}

fn check_symmetric(a: &Mat) -> Result<()> {
    check_finite(a)?;
    if !a.is_square() {
        return Err(invalid(format!("expected a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    let scale = a.amax();
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// `Φ Σ Φᵀ`, symmetrized to remove rounding asymmetry.
pub fn congruence(phi: &Mat, sigma: &Mat) -> Mat {
    symmetrize(&(phi * sigma * phi.transpose()))
}

/// Eigendecomposition of a symmetric PSD matrix with a fixed rank threshold.
///
/// Eigenvalues are sorted in decreasing order; eigenvalues at or below the
/// threshold are treated as exact zeros by every accessor.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: Mat,
    threshold: f64,
}

impl Spectrum {
    pub fn of(a: &Mat, tol_rel: f64) -> Result<Self> {
        if tol_rel.is_nan() || tol_rel <= 0.0 {
            return Err(invalid("tol_rel must be positive"));
        }
        check_symmetric(a)?;
        let eig = SymmetricEigen::new(symmetrize(a));
        let n = a.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = Mat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        let lambda_max = values.first().copied().unwrap_or(0.0);
        let threshold = tol_rel * lambda_max.max(1.0);
        Ok(Self { values, vectors, threshold })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Raw eigenvalues, decreasing.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns, in the order of [`Spectrum::values`].
    pub fn vectors(&self) -> &Mat {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.values.iter().take_while(|&&l| l > self.threshold).count()
    }

    /// Eigenvalues above the threshold.
    pub fn nonzero_values(&self) -> &[f64] {
        &self.values[..self.rank()]
    }

    /// Eigenvalues with sub-threshold entries replaced by exact zeros.
    pub fn clamped_values(&self) -> Vec<f64> {
        let r = self.rank();
        (0..self.dim()).map(|i| if i < r { self.values[i] } else { 0.0 }).collect()
    }

    pub fn pdet(&self) -> f64 {
        self.nonzero_values().iter().product()
    }

    pub fn log_pdet(&self) -> f64 {
        self.nonzero_values().iter().map(|l| l.ln()).sum()
    }

    pub fn range_basis(&self) -> SubspaceBasis {
        let r = self.rank();
        SubspaceBasis::from_columns_unchecked(self.vectors.columns(0, r).into_owned())
    }

    pub fn null_basis(&self) -> SubspaceBasis {
        let r = self.rank();
        let n = self.dim();
        SubspaceBasis::from_columns_unchecked(self.vectors.columns(r, n - r).into_owned())
    }

    /// `n × r` factor `F` with `F Fᵀ` equal to the matrix restricted to its retained spectrum.
    pub fn sqrt_factor(&self) -> Mat {
        let r = self.rank();
        let mut f = self.vectors.columns(0, r).into_owned();
        for (c, lambda) in self.values[..r].iter().enumerate() {
            f.column_mut(c).scale_mut(lambda.sqrt());
        }
        f
    }
}

pub fn effective_rank(a: &Mat, tol_rel: f64) -> Result<usize> {
    Ok(Spectrum::of(a, tol_rel)?.rank())
}

/// Product of the eigenvalues above the rank threshold; 1 for a zero-rank matrix.
pub fn pseudo_det(a: &Mat, tol_rel: f64) -> Result<f64> {
    Ok(Spectrum::of(a, tol_rel)?.pdet())
}

pub fn null_space_basis(a: &Mat, tol_rel: f64) -> Result<SubspaceBasis> {
    Ok(Spectrum::of(a, tol_rel)?.null_basis())
}

pub fn psd_sqrt_factor(a: &Mat, tol_rel: f64) -> Result<Mat> {
    Ok(Spectrum::of(a, tol_rel)?.sqrt_factor())
}

/// An orthonormal list of vectors in `ℝ^ambient_dim`, stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    vectors: Mat,
}

impl SubspaceBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        Self { vectors: Mat::zeros(ambient_dim, 0) }
    }

    /// Wraps columns after checking that their Gram matrix is the identity.
    pub fn from_columns(vectors: Mat) -> Result<Self> {
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(invalid("basis has non-finite entries"));
        }
        let k = vectors.ncols();
        let gram = vectors.transpose() * &vectors;
        let err = (gram - Mat::identity(k, k)).amax();
        if err > ORTHONORMAL_TOL {
            return Err(invalid(format!("basis vectors are not orthonormal (Gram error {err:e})")));
        }
        Ok(Self { vectors })
    }

    pub(crate) fn from_columns_unchecked(vectors: Mat) -> Self {
        Self { vectors }
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    /// The basis vectors as columns.
    pub fn matrix(&self) -> &Mat {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vector {
        self.vectors.column(i).into_owned()
    }

    pub fn project(&self, v: &Vector) -> Vector {
        &self.vectors * (self.vectors.transpose() * v)
    }

    /// Norm of the component of `v` orthogonal to the span.
    pub fn residual_norm(&self, v: &Vector) -> f64 {
        (v - self.project(v)).norm()
    }
}

/// Orthonormal basis of `span(outer) ∩ span(inner)^⊥`.
///
/// Candidates are the outer vectors with the inner span projected out; they are
/// orthonormalized greedily, always taking the candidate with the largest
/// remaining residual, until `dim(outer) − dim(inner)` vectors are found.
pub fn complement_basis_within(inner: &SubspaceBasis, outer: &SubspaceBasis) -> Result<SubspaceBasis> {
    let n = outer.ambient_dim();
    if inner.ambient_dim() != n {
        return Err(invalid(format!("ambient dimensions differ: inner {}, outer {}", inner.ambient_dim(), n)));
    }
    for i in 0..inner.dim() {
        let res = outer.residual_norm(&inner.vector(i));
        if res > CONTAINMENT_TOL {
            return Err(invalid(format!("inner vector {i} is not contained in the outer span (residual {res:e})")));
        }
    }
    if inner.dim() > outer.dim() {
        return Err(invalid("inner basis is larger than the outer basis"));
    }
    let target = outer.dim() - inner.dim();
    let mut candidates: Vec<Vector> = (0..outer.dim())
        .map(|i| {
            let v = outer.vector(i);
            &v - inner.project(&v)
        })
        .collect();
    let mut chosen: Vec<Vector> = Vec::with_capacity(target);
    while chosen.len() < target {
        let (best, norm) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((usize::MAX, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == usize::MAX || norm <= CONTAINMENT_TOL {
            return Err(invalid("outer span does not contain enough directions beyond the inner span"));
        }
        let q = candidates.swap_remove(best) / norm;
        for c in candidates.iter_mut() {
            let coef = q.dot(c);
            c.axpy(-coef, &q, 1.0);
        }
        chosen.push(q);
    }
    let mut m = Mat::zeros(n, target);
    for (c, v) in chosen.iter().enumerate() {
        m.set_column(c, v);
    }
    Ok(SubspaceBasis::from_columns_unchecked(m))
}

/// Maximal linearly independent subset of the rows of `a`, in original order.
///
/// Rows are scanned top to bottom and kept when their residual against the rows
/// already kept exceeds the same threshold that decides `effective_rank(AᵀA)`.
pub fn independent_row_select(a: &Mat, tol_rel: f64) -> Result<Mat> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let cols = a.ncols();
    if a.nrows() == 0 || cols == 0 {
        return Ok(Mat::zeros(0, cols));
    }
    let spectrum = Spectrum::of(&symmetrize(&(a.transpose() * a)), tol_rel)?;
    let target = spectrum.rank();
    let threshold = spectrum.threshold();
    let mut basis: Vec<Vector> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for r in 0..a.nrows() {
        if kept.len() == target {
            break;
        }
        let mut v: Vector = a.row(r).transpose();
        for q in &basis {
            let coef = q.dot(&v);
            v.axpy(-coef, q, 1.0);
        }
        let norm2 = v.norm_squared();
        if norm2 > threshold {
            basis.push(v / norm2.sqrt());
            kept.push(r);
        }
    }
    Ok(Mat::from_fn(kept.len(), cols, |i, j| a[(kept[i], j)]))
}

/// `rows × cols` matrix of i.i.d. standard normals, filled row by row.
pub fn standard_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// diagonal of `R` forced nonnegative.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<Mat> {
    if n == 0 {
        return Err(invalid("random_orthogonal needs n >= 1"));
    }
    let mut rng = stream_rng(seed, 0);
    let g = standard_normal_matrix(n, n, &mut rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for c in 0..n {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    Ok(q)
}
