//! Measurement kernels: random Gaussian kernels and diversity-maximizing designs.
//!
//! The two-class zero-mean design measures the directions that lie in the null
//! space of one class but not in the common null space; the nonzero-mean design
//! uses a single direction of the common null space that sees the mean
//! difference. The multiclass designs stack pairwise rows and trim them to the
//! measurement budget.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    complement_basis_within, congruence, independent_row_select, standard_normal_matrix, symmetrize, Mat, Spectrum,
    SubspaceBasis, Vector, CONTAINMENT_TOL, DEFAULT_TOL,
};
use crate::rng::stream_rng;
use crate::source::GmmSource;

/// How a designed kernel was built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DesignRecipe {
    /// Rows from the two null-space complements, `first` taken from class 1's
    /// complement and `second` from class 2's.
    NullComplement { first: usize, second: usize },
    /// One row along the mean difference projected onto the common null space.
    MeanNullDirection,
    /// Pairwise complement rows stacked and trimmed to the budget.
    PairwiseComplementStack { rows_per_pair: usize },
    /// One common-null-space row per pair.
    PairwiseNullStack,
}

impl fmt::Display for DesignRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NullComplement { first, second } => write!(f, "null-complement({first}+{second})"),
            Self::MeanNullDirection => f.write_str("mean-null-direction"),
            Self::PairwiseComplementStack { rows_per_pair } => {
                write!(f, "pairwise-complement-stack({rows_per_pair}/pair)")
            }
            Self::PairwiseNullStack => f.write_str("pairwise-null-stack"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Random {
        seed: u64,
        normalized: bool,
    },
    Designed {
        recipe: DesignRecipe,
        pairs: Vec<(usize, usize)>,
    },
    /// Rows supplied directly by the caller.
    Explicit,
}

impl Provenance {
    /// Short kernel family name used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Random { .. } => "random",
            Self::Designed { .. } => "designed",
            Self::Explicit => "explicit",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Random { seed, normalized } => {
                write!(f, "random(seed={seed}, {})", if *normalized { "normalized" } else { "unnormalized" })
            }
            Self::Designed { recipe, pairs } => {
                write!(f, "designed({recipe}; pairs=")?;
                for (k, (i, j)) in pairs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}-{}", i + 1, j + 1)?;
                }
                f.write_str(")")
            }
            Self::Explicit => f.write_str("explicit"),
        }
    }
}

/// An `M × N` measurement matrix together with how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementKernel {
    phi: Mat,
    provenance: Provenance,
}

impl MeasurementKernel {
    pub fn explicit(phi: Mat) -> Result<Self> {
        if phi.nrows() == 0 || phi.ncols() == 0 {
            return Err(invalid("kernel needs at least one row and one column"));
        }
        if phi.iter().any(|x| !x.is_finite()) {
            return Err(invalid("kernel has non-finite entries"));
        }
        Ok(Self { phi, provenance: Provenance::Explicit })
    }

    fn designed(phi: Mat, recipe: DesignRecipe, pairs: Vec<(usize, usize)>) -> Self {
        Self { phi, provenance: Provenance::Designed { recipe, pairs } }
    }

    pub fn phi(&self) -> &Mat {
        &self.phi
    }

    /// Number of measurements (rows).
    pub fn m(&self) -> usize {
        self.phi.nrows()
    }

    /// Source dimension (columns).
    pub fn n(&self) -> usize {
        self.phi.ncols()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// First `m` rows of this kernel.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.m() {
            return Err(invalid(format!("cannot keep {m} of {} rows", self.m())));
        }
        Ok(Self { phi: self.phi.rows(0, m).into_owned(), provenance: self.provenance.clone() })
    }

    pub(crate) fn check_source(&self, src: &GmmSource) -> Result<()> {
        if self.n() != src.dim() {
            return Err(invalid(format!("kernel has {} columns but the source dimension is {}", self.n(), src.dim())));
        }
        Ok(())
    }
}

/// I.i.d. standard-normal kernel, optionally scaled by `M / tr(Φ′Φ′ᵀ)`.
pub fn random_gaussian_kernel(m: usize, n: usize, seed: u64, normalized: bool) -> Result<MeasurementKernel> {
    if m == 0 || n == 0 {
        return Err(invalid("random kernel needs M, N >= 1"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut phi = standard_normal_matrix(m, n, &mut rng);
    if normalized {
        let trace = phi.norm_squared();
        phi *= m as f64 / trace;
    }
    Ok(MeasurementKernel { phi, provenance: Provenance::Random { seed, normalized } })
}

/// Measurement-domain ranks and pseudo-determinants for one class pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPairGeometry {
    pub r_i: usize,
    pub r_j: usize,
    pub r_ij: usize,
    pub v_i: f64,
    pub v_j: f64,
    pub v_ij: f64,
}

impl ProjectedPairGeometry {
    /// `2 r_ij − r_i − r_j`: four times the pair's diversity-order.
    pub fn non_overlap(&self) -> usize {
        2 * self.r_ij - self.r_i - self.r_j
    }
}

pub fn projected_pair_geometry(
    k: &MeasurementKernel,
    src: &GmmSource,
    i: usize,
    j: usize,
    tol_rel: f64,
) -> Result<ProjectedPairGeometry> {
    k.check_source(src)?;
    let (a, b) = src.check_pair(i, j)?;
    let si = Spectrum::of(&congruence(k.phi(), a.covariance()), tol_rel)?;
    let sj = Spectrum::of(&congruence(k.phi(), b.covariance()), tol_rel)?;
    let sij = Spectrum::of(&congruence(k.phi(), &(a.covariance() + b.covariance())), tol_rel)?;
    Ok(ProjectedPairGeometry {
        r_i: si.rank(),
        r_j: sj.rank(),
        r_ij: sij.rank(),
        v_i: si.pdet(),
        v_j: sj.pdet(),
        v_ij: sij.pdet(),
    })
}

/// Candidate rows for a zero-mean pair: `v` spans the part of `Null(Σ1)` outside
/// the common null space, `w` the same for `Null(Σ2)`.
#[derive(Debug, Clone)]
struct ComplementRows {
    v: SubspaceBasis,
    w: SubspaceBasis,
}

impl ComplementRows {
    fn build(s1: &Mat, s2: &Mat) -> Result<Self> {
        if s1.shape() != s2.shape() {
            return Err(invalid("covariances have different shapes"));
        }
        let common = Spectrum::of(&symmetrize(&(s1 + s2)), DEFAULT_TOL)?.null_basis();
        let null1 = Spectrum::of(s1, DEFAULT_TOL)?.null_basis();
        let null2 = Spectrum::of(s2, DEFAULT_TOL)?.null_basis();
        Ok(Self { v: complement_basis_within(&common, &null1)?, w: complement_basis_within(&common, &null2)? })
    }

    fn total(&self) -> usize {
        self.v.dim() + self.w.dim()
    }

    /// All rows, `v` first then `w`.
    fn ordered_rows(&self) -> Vec<Vector> {
        (0..self.v.dim()).map(|c| self.v.vector(c)).chain((0..self.w.dim()).map(|c| self.w.vector(c))).collect()
    }
}

fn rows_to_mat(rows: &[Vector], n: usize) -> Mat {
    let mut m = Mat::zeros(rows.len(), n);
    for (r, v) in rows.iter().enumerate() {
        m.set_row(r, &v.transpose());
    }
    m
}

fn two_zero_mean(s1: &Mat, s2: &Mat, m: usize, pair: (usize, usize)) -> Result<MeasurementKernel> {
    if m == 0 {
        return Err(invalid("measurement budget must be at least 1"));
    }
    let rows = ComplementRows::build(s1, s2)?;
    let (n1, n2) = (rows.v.dim(), rows.w.dim());
    if n1 + n2 == 0 {
        return Err(Error::DesignImpossible { pair, no_dim: 0 });
    }
    // Budget beyond n1 + n2 adds no diversity and is left unused.
    let (first, second) = if m >= n1 + n2 {
        (n1, n2)
    } else {
        let first = n1.min(m.div_ceil(2));
        let second = n2.min(m - first);
        (n1.min(m - second), second)
    };
    let picked: Vec<Vector> =
        (0..first).map(|c| rows.v.vector(c)).chain((0..second).map(|c| rows.w.vector(c))).collect();
    Ok(MeasurementKernel::designed(
        rows_to_mat(&picked, s1.nrows()),
        DesignRecipe::NullComplement { first, second },
        vec![pair],
    ))
}

/// Two-class zero-mean design reaching the maximum diversity-order for budget `m`.
///
/// With `m` below the number of candidate rows, rows are split as evenly as
/// possible between the two complements.
pub fn design_two_zero_mean(s1: &Mat, s2: &Mat, m: usize) -> Result<MeasurementKernel> {
    two_zero_mean(s1, s2, m, (0, 1))
}

/// Unit vector along the component of `diff` in `Null(sum)`, when that component
/// is not negligible.
fn mean_null_direction(diff: &Vector, sum: &Mat) -> Result<Option<Vector>> {
    let norm = diff.norm();
    if norm == 0.0 {
        return Ok(None);
    }
    let image = Spectrum::of(&symmetrize(sum), DEFAULT_TOL)?.range_basis();
    let residual = diff - image.project(diff);
    let rnorm = residual.norm();
    Ok((rnorm > CONTAINMENT_TOL * norm).then(|| residual / rnorm))
}

pub fn design_two_nonzero_mean(mu1: &Vector, mu2: &Vector, s1: &Mat, s2: &Mat, m: usize) -> Result<MeasurementKernel> {
    if m == 0 {
        return Err(invalid("measurement budget must be at least 1"));
    }
    if mu1.len() != s1.nrows() || mu2.len() != s1.nrows() {
        return Err(invalid("mean lengths do not match the covariance size"));
    }
    match mean_null_direction(&(mu1 - mu2), &(s1 + s2))? {
        Some(phi) => Ok(MeasurementKernel::designed(
            rows_to_mat(&[phi], s1.nrows()),
            DesignRecipe::MeanNullDirection,
            vec![(0, 1)],
        )),
        None => two_zero_mean(s1, s2, m, (0, 1)),
    }
}

/// Multiclass zero-mean design.
///
/// 1. find the pair with the fewest non-overlapping dimensions `k`;
/// 2. take the first `k` complement rows (v then w) of every pair;
/// 3. stack the blocks;
/// 4. if the stack's rank exceeds `m`, drop the last row of every block and
///    restack; otherwise return the independent rows of the stack.
pub fn design_multi_zero_mean(src: &GmmSource, m: usize) -> Result<MeasurementKernel> {
    if m == 0 {
        return Err(invalid("measurement budget must be at least 1"));
    }
    let pairs: Vec<(usize, usize)> = src.pairs().collect();
    let mut min_pair = pairs[0];
    let mut min_no = usize::MAX;
    for &(i, j) in &pairs {
        let no = src.pair_geometry(i, j)?.no_dim;
        if no < min_no {
            min_no = no;
            min_pair = (i, j);
        }
    }
    if min_no == 0 {
        return Err(Error::DesignImpossible { pair: min_pair, no_dim: 0 });
    }
    let mut blocks: Vec<Vec<Vector>> = pairs
        .iter()
        .map(|&(i, j)| {
            let rows = ComplementRows::build(src.classes()[i].covariance(), src.classes()[j].covariance())?;
            debug_assert!(rows.total() >= min_no);
            let mut all = rows.ordered_rows();
            all.truncate(min_no);
            Ok(all)
        })
        .collect::<Result<_>>()?;
    let n = src.dim();
    loop {
        let stacked: Vec<Vector> = blocks.iter().flatten().cloned().collect();
        if stacked.is_empty() {
            return Err(Error::EmptyDesign { budget: m });
        }
        let phi = rows_to_mat(&stacked, n);
        let rank = Spectrum::of(&symmetrize(&(&phi * phi.transpose())), DEFAULT_TOL)?.rank();
        if rank <= m {
            let rows_per_pair = blocks.iter().map(Vec::len).max().unwrap_or(0);
            return Ok(MeasurementKernel::designed(
                independent_row_select(&phi, DEFAULT_TOL)?,
                DesignRecipe::PairwiseComplementStack { rows_per_pair },
                pairs,
            ));
        }
        for b in blocks.iter_mut() {
            b.pop();
        }
    }
}

/// Multiclass nonzero-mean design: one common-null-space row per pair when
/// every pair's mean difference leaves the image of `Σ_i + Σ_j` and the rows fit
/// the budget; otherwise the zero-mean design.
pub fn design_multi_nonzero_mean(src: &GmmSource, m: usize) -> Result<MeasurementKernel> {
    if m == 0 {
        return Err(invalid("measurement budget must be at least 1"));
    }
    let pairs: Vec<(usize, usize)> = src.pairs().collect();
    let mut rows = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let (a, b) = (&src.classes()[i], &src.classes()[j]);
        match mean_null_direction(&(a.mean() - b.mean()), &(a.covariance() + b.covariance()))? {
            Some(phi) => rows.push(phi),
            None => return design_multi_zero_mean(src, m),
        }
    }
    let phi = rows_to_mat(&rows, src.dim());
    let rank = Spectrum::of(&symmetrize(&(&phi * phi.transpose())), DEFAULT_TOL)?.rank();
    if rank > m {
        return design_multi_zero_mean(src, m);
    }
    let recipe = if pairs.len() == 1 { DesignRecipe::MeanNullDirection } else { DesignRecipe::PairwiseNullStack };
    Ok(MeasurementKernel::designed(independent_row_select(&phi, DEFAULT_TOL)?, recipe, pairs))
}

/// Designed kernel for any source: the two-class designs for `L = 2`, the
/// multiclass designs otherwise.
pub fn design_for_source(src: &GmmSource, m: usize) -> Result<MeasurementKernel> {
    if src.num_classes() == 2 {
        let (a, b) = (&src.classes()[0], &src.classes()[1]);
        design_two_nonzero_mean(a.mean(), b.mean(), a.covariance(), b.covariance(), m)
    } else {
        design_multi_nonzero_mean(src, m)
    }
}
