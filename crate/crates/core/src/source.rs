//! The L-class Gaussian mixture source and its pairwise subspace geometry.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg::{random_orthogonal, symmetrize, Mat, Spectrum, Vector, DEFAULT_TOL};
use crate::rng::stream_rng;

const PRIOR_SUM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// One mixture component: prior, mean and (possibly rank-deficient) covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    prior: f64,
    mean: Vector,
    covariance: Mat,
}

impl ClassModel {
    pub fn new(prior: f64, mean: Vector, covariance: Mat) -> Result<Self> {
        if !(0.0..=1.0).contains(&prior) {
            return Err(invalid(format!("prior {prior} outside [0, 1]")));
        }
        let n = mean.len();
        if n == 0 || covariance.nrows() != n || covariance.ncols() != n {
            return Err(invalid(format!(
                "mean has length {n} but covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(invalid("mean has non-finite entries"));
        }
        let spectrum = Spectrum::of(&covariance, DEFAULT_TOL)?;
        let lambda_max = spectrum.values()[0].max(0.0);
        let lambda_min = *spectrum.values().last().unwrap();
        if lambda_min < -PSD_TOL * lambda_max.max(f64::MIN_POSITIVE) {
            return Err(invalid(format!("covariance is not PSD (min eigenvalue {lambda_min:e})")));
        }
        Ok(Self { prior, mean, covariance: symmetrize(&covariance) })
    }

    /// `Σ = U diag(λ) Uᵀ`, with `U` the identity when no rotation is given.
    pub fn from_eigenvalues(prior: f64, mean: Vector, eigenvalues: &[f64], rotation: Option<&Mat>) -> Result<Self> {
        if eigenvalues.iter().any(|&l| l < 0.0 || !l.is_finite()) {
            return Err(invalid("eigenvalues must be finite and nonnegative"));
        }
        let d = Mat::from_diagonal(&Vector::from_column_slice(eigenvalues));
        let cov = match rotation {
            Some(u) => {
                if u.nrows() != eigenvalues.len() || !u.is_square() {
                    return Err(invalid("rotation size does not match the eigenvalue list"));
                }
                u * d * u.transpose()
            }
            None => d,
        };
        Self::new(prior, mean, symmetrize(&cov))
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn covariance(&self) -> &Mat {
        &self.covariance
    }
}

/// Pairwise source-domain geometry: ranks of `Σ_i`, `Σ_j`, `Σ_i + Σ_j` and the
/// number of non-overlapping dimensions `2 r_sij − r_si − r_sj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairGeometry {
    pub r_si: usize,
    pub r_sj: usize,
    pub r_sij: usize,
    pub no_dim: usize,
}

/// A validated Gaussian mixture with at least two classes.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmSource {
    dim: usize,
    classes: Vec<ClassModel>,
}

impl GmmSource {
    pub fn new(classes: Vec<ClassModel>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(invalid("a source needs at least two classes"));
        }
        let dim = classes[0].mean.len();
        if classes.iter().any(|c| c.mean.len() != dim) {
            return Err(invalid("classes have different dimensions"));
        }
        let total: f64 = classes.iter().map(|c| c.prior).sum();
        if (total - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(invalid(format!("priors sum to {total}, expected 1")));
        }
        Ok(Self { dim, classes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[ClassModel] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> Result<&ClassModel> {
        self.classes.get(i).ok_or(Error::IndexOutOfRange { index: i, classes: self.classes.len() })
    }

    pub(crate) fn check_pair(&self, i: usize, j: usize) -> Result<(&ClassModel, &ClassModel)> {
        let a = self.class(i)?;
        let b = self.class(j)?;
        if i == j {
            return Err(invalid(format!("pair needs two distinct classes, got ({i}, {i})")));
        }
        Ok((a, b))
    }

    /// All unordered pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let l = self.classes.len();
        (0..l).flat_map(move |i| ((i + 1)..l).map(move |j| (i, j)))
    }

    pub fn pair_geometry(&self, i: usize, j: usize) -> Result<PairGeometry> {
        let (a, b) = self.check_pair(i, j)?;
        let r_si = Spectrum::of(&a.covariance, DEFAULT_TOL)?.rank();
        let r_sj = Spectrum::of(&b.covariance, DEFAULT_TOL)?.rank();
        let r_sij = Spectrum::of(&(&a.covariance + &b.covariance), DEFAULT_TOL)?.rank();
        Ok(PairGeometry { r_si, r_sj, r_sij, no_dim: 2 * r_sij - r_si - r_sj })
    }

    /// Inverse-CDF label draw; `u` in `[0, 1)`. Ties go to the lower index.
    pub fn label_for(&self, u: f64) -> usize {
        let mut cum = 0.0;
        for (c, class) in self.classes.iter().enumerate() {
            cum += class.prior;
            if u < cum {
                return c;
            }
        }
        // rounding left the cumulative sum just below 1: take the last class with mass
        self.classes.iter().rposition(|c| c.prior > 0.0).unwrap_or(0)
    }

    /// `n` labeled draws `(c, μ_c + F_c z)`, deterministic given the seed.
    pub fn sample_labeled(&self, rng_seed: u64, n: usize) -> Result<Vec<(usize, Vector)>> {
        if n == 0 {
            return Err(invalid("sample count must be at least 1"));
        }
        let factors = self
            .classes
            .iter()
            .map(|c| Ok(Spectrum::of(&c.covariance, DEFAULT_TOL)?.sqrt_factor()))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = stream_rng(rng_seed, 0);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let c = self.label_for(rng.random::<f64>());
            let f = &factors[c];
            let z = Vector::from_fn(f.ncols(), |_, _| rng.sample(StandardNormal));
            out.push((c, &self.classes[c].mean + f * z));
        }
        Ok(out)
    }
}

/// Shared rotation for configs that build every covariance in one random basis.
pub fn rotation_for_seed(dim: usize, seed: u64) -> Result<Mat> {
    random_orthogonal(dim, seed)
}
