//! Bhattacharyya and union bounds on the MAP error, their low-noise asymptotics
//! (diversity-order and measurement gain) and their high-noise expansion.

use std::fmt;

use crate::classifier::check_sigma2;
use crate::error::{invalid, Result};
use crate::linalg::{congruence, Mat, Spectrum, Vector, CONTAINMENT_TOL, DEFAULT_TOL};
use crate::measurement::{projected_pair_geometry, MeasurementKernel, ProjectedPairGeometry};
use crate::source::GmmSource;

/// A diversity-order, stored as an exact multiple of ¼.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diversity(usize);

impl Diversity {
    pub fn from_quarters(quarters: usize) -> Self {
        Self(quarters)
    }

    pub fn quarters(self) -> usize {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 4.0
    }
}

impl fmt::Display for Diversity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (mut num, mut den) = (self.0, 4);
        while den > 1 && num % 2 == 0 {
            num /= 2;
            den /= 2;
        }
        if den == 1 {
            write!(f, "{num}")
        } else {
            write!(f, "{num}/{den}")
        }
    }
}

/// Low-noise behaviour of an error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticProfile {
    /// The bound tends to `floor_value` as `σ² → 0`.
    ErrorFloor { floor_value: f64 },
    /// The bound behaves as `(mean_factor · gain / σ²)^(−d)`.
    PolynomialDecay { diversity: Diversity, gain: f64, mean_factor: f64 },
    /// The bound decays as `exp(−c/σ²)`.
    ExponentialDecay,
}

impl AsymptoticProfile {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ErrorFloor { .. } => "error_floor",
            Self::PolynomialDecay { .. } => "polynomial_decay",
            Self::ExponentialDecay => "exponential_decay",
        }
    }

    pub fn diversity(&self) -> Option<Diversity> {
        match self {
            Self::PolynomialDecay { diversity, .. } => Some(*diversity),
            _ => None,
        }
    }

    /// `mean_factor · gain` for polynomial decay.
    pub fn effective_gain(&self) -> Option<f64> {
        match self {
            Self::PolynomialDecay { gain, mean_factor, .. } => Some(gain * mean_factor),
            _ => None,
        }
    }
}

impl fmt::Display for AsymptoticProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ErrorFloor { floor_value } => write!(f, "error_floor (floor = {floor_value:e})"),
            Self::PolynomialDecay { diversity, gain, mean_factor } => write!(
                f,
                "polynomial_decay (d = {diversity} = {}, g_m = {gain:e}, a = {mean_factor:e})",
                diversity.value()
            ),
            Self::ExponentialDecay => f.write_str("exponential_decay"),
        }
    }
}

/// Kernel-free prediction for a generic random kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictedProfile {
    ErrorFloor,
    PolynomialDecay(Diversity),
    ExponentialDecay,
}

impl PredictedProfile {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ErrorFloor => "error_floor",
            Self::PolynomialDecay(_) => "polynomial_decay",
            Self::ExponentialDecay => "exponential_decay",
        }
    }
}

/// Spectral data of one class pair under a fixed kernel, enough to evaluate the
/// Bhattacharyya exponent at any noise level.
#[derive(Debug, Clone)]
pub struct PairSpectra {
    prior_i: f64,
    prior_j: f64,
    /// Clamped eigenvalues of `Φ(Σ_i+Σ_j)Φᵀ`.
    sum_values: Vec<f64>,
    /// Squared coordinates of `Φ(μ_i−μ_j)` in the eigenbasis of `Φ(Σ_i+Σ_j)Φᵀ`.
    mean_coords: Vec<f64>,
    /// `Φ(μ_i−μ_j)` has a component outside the image of `Φ(Σ_i+Σ_j)Φᵀ`.
    mean_outside: bool,
    values_i: Vec<f64>,
    values_j: Vec<f64>,
    geometry: ProjectedPairGeometry,
}

impl PairSpectra {
    pub fn new(k: &MeasurementKernel, src: &GmmSource, i: usize, j: usize) -> Result<Self> {
        k.check_source(src)?;
        let (a, b) = src.check_pair(i, j)?;
        let phi = k.phi();
        let sum = Spectrum::of(&congruence(phi, &(a.covariance() + b.covariance())), DEFAULT_TOL)?;
        let si = Spectrum::of(&congruence(phi, a.covariance()), DEFAULT_TOL)?;
        let sj = Spectrum::of(&congruence(phi, b.covariance()), DEFAULT_TOL)?;
        let m: Vector = phi * (a.mean() - b.mean());
        let coords = sum.vectors().transpose() * &m;
        let mean_coords: Vec<f64> = coords.iter().map(|x| x * x).collect();
        let r = sum.rank();
        let outside_sq: f64 = mean_coords[r..].iter().sum();
        let mean_outside = outside_sq.sqrt() > CONTAINMENT_TOL * m.norm();
        let geometry = ProjectedPairGeometry {
            r_i: si.rank(),
            r_j: sj.rank(),
            r_ij: r,
            v_i: si.pdet(),
            v_j: sj.pdet(),
            v_ij: sum.pdet(),
        };
        Ok(Self {
            prior_i: a.prior(),
            prior_j: b.prior(),
            sum_values: sum.clamped_values(),
            mean_coords,
            mean_outside,
            values_i: si.clamped_values(),
            values_j: sj.clamped_values(),
            geometry,
        })
    }

    pub fn geometry(&self) -> &ProjectedPairGeometry {
        &self.geometry
    }

    pub fn priors(&self) -> (f64, f64) {
        (self.prior_i, self.prior_j)
    }

    /// `K_ij(σ²)`, clamped at zero.
    ///
    /// The `log σ²` terms of the three log-determinants cancel exactly, so each
    /// is accumulated as `log1p(λ/σ²)` sums; this keeps the exponent accurate
    /// both for `σ² → 0` and for `σ² → ∞`.
    pub fn exponent(&self, sigma2: f64) -> f64 {
        let quad: f64 =
            self.sum_values.iter().zip(&self.mean_coords).map(|(l, c)| c / (l + 2.0 * sigma2)).sum::<f64>() * 0.25;
        let ls: f64 = self.sum_values.iter().map(|l| (l / (2.0 * sigma2)).ln_1p()).sum();
        let la: f64 = self.values_i.iter().map(|l| (l / sigma2).ln_1p()).sum();
        let lb: f64 = self.values_j.iter().map(|l| (l / sigma2).ln_1p()).sum();
        (quad + 0.5 * (ls - 0.5 * la - 0.5 * lb)).max(0.0)
    }

    /// Mean term of the exponent as `σ² → 0` when the mean difference lies in
    /// the image: `¼ Σ_{λ>0} (uᵀm)²/λ`.
    fn limiting_mean_term(&self) -> f64 {
        0.25 * self.sum_values.iter().zip(&self.mean_coords).filter(|(l, _)| **l > 0.0).map(|(l, c)| c / l).sum::<f64>()
    }

    fn volume_ratio(&self) -> f64 {
        volume_ratio(&self.geometry)
    }

    pub fn asymptotics(&self) -> AsymptoticProfile {
        if self.mean_outside {
            return AsymptoticProfile::ExponentialDecay;
        }
        let sqrt_pp = (self.prior_i * self.prior_j).sqrt();
        let c = self.limiting_mean_term();
        let quarters = self.geometry.non_overlap();
        if quarters == 0 {
            return AsymptoticProfile::ErrorFloor {
                floor_value: sqrt_pp * self.volume_ratio().powf(-0.5) * (-c).exp(),
            };
        }
        let d = quarters as f64 / 4.0;
        let gain = pair_gain(&self.geometry, sqrt_pp);
        AsymptoticProfile::PolynomialDecay { diversity: Diversity(quarters), gain, mean_factor: (c / d).exp() }
    }

    /// `lim_{σ²→0} K_ij` for a pair whose bound floors.
    fn limiting_exponent(&self) -> f64 {
        (self.limiting_mean_term() + 0.5 * self.volume_ratio().ln()).max(0.0)
    }
}

/// `2^(−r_ij) v_ij / √(v_i v_j)`.
fn volume_ratio(g: &ProjectedPairGeometry) -> f64 {
    2f64.powi(-(g.r_ij as i32)) * g.v_ij / (g.v_i * g.v_j).sqrt()
}

/// Zero-mean measurement gain `[√(P_i P_j) (2^(−r_ij) v_ij/√(v_i v_j))^(−½)]^(−1/d)`.
fn pair_gain(g: &ProjectedPairGeometry, sqrt_pp: f64) -> f64 {
    let d = g.non_overlap() as f64 / 4.0;
    (sqrt_pp * volume_ratio(g).powf(-0.5)).powf(-1.0 / d)
}

/// Pairwise spectra for every pair of a source under one kernel.
#[derive(Debug, Clone)]
pub struct BoundEvaluator {
    num_classes: usize,
    pairs: Vec<((usize, usize), PairSpectra)>,
}

impl BoundEvaluator {
    pub fn new(k: &MeasurementKernel, src: &GmmSource) -> Result<Self> {
        let pairs = src.pairs().map(|(i, j)| Ok(((i, j), PairSpectra::new(k, src, i, j)?))).collect::<Result<_>>()?;
        Ok(Self { num_classes: src.num_classes(), pairs })
    }

    pub fn pairs(&self) -> impl Iterator<Item = &((usize, usize), PairSpectra)> {
        self.pairs.iter()
    }

    fn pair(&self, i: usize, j: usize) -> Result<&PairSpectra> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if i == j || b >= self.num_classes {
            return Err(invalid(format!("invalid class pair ({i}, {j})")));
        }
        Ok(&self.pairs.iter().find(|(p, _)| *p == (a, b)).expect("all pairs are stored").1)
    }

    pub fn exponent(&self, i: usize, j: usize, sigma2: f64) -> Result<f64> {
        check_sigma2(sigma2)?;
        Ok(self.pair(i, j)?.exponent(sigma2))
    }

    /// `log Σ_i Σ_{j≠i} P_i e^(−K_ij)`, finite even when the bound underflows.
    pub fn log_union(&self, sigma2: f64) -> Result<f64> {
        check_sigma2(sigma2)?;
        let terms: Vec<f64> =
            self.pairs.iter().map(|(_, p)| (p.prior_i + p.prior_j).ln() - p.exponent(sigma2)).collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Ok(top);
        }
        Ok(top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln())
    }

    pub fn union(&self, sigma2: f64) -> Result<f64> {
        check_sigma2(sigma2)?;
        Ok(self.pairs.iter().map(|(_, p)| (p.prior_i + p.prior_j) * (-p.exponent(sigma2)).exp()).sum())
    }

    /// Low-noise profile of the union bound.
    ///
    /// Any floored pair makes the whole bound floor, at the sum of the floored
    /// pairs' limiting terms. Otherwise the smallest pairwise diversity-order
    /// wins, with gain `[Σ_{(i,j)∈S_d} P_i 2^(r_ij) (v_ij/√(v_i v_j))^(−½)]^(−1/d)`
    /// summed over ordered pairs of minimum order.
    pub fn multiclass_asymptotics(&self) -> AsymptoticProfile {
        let profiles: Vec<(&PairSpectra, AsymptoticProfile)> =
            self.pairs.iter().map(|(_, p)| (p, p.asymptotics())).collect();
        let floored: Vec<&PairSpectra> = profiles
            .iter()
            .filter(|(_, a)| matches!(a, AsymptoticProfile::ErrorFloor { .. }))
            .map(|(p, _)| *p)
            .collect();
        if !floored.is_empty() {
            let floor_value = floored.iter().map(|p| (p.prior_i + p.prior_j) * (-p.limiting_exponent()).exp()).sum();
            return AsymptoticProfile::ErrorFloor { floor_value };
        }
        let Some(min_d) = profiles.iter().filter_map(|(_, a)| a.diversity()).min() else {
            return AsymptoticProfile::ExponentialDecay;
        };
        let d = min_d.value();
        let total: f64 = profiles
            .iter()
            .filter(|(_, a)| a.diversity() == Some(min_d))
            .map(|(p, _)| {
                let g = &p.geometry;
                let shape = 2f64.powi(g.r_ij as i32) * (g.v_ij / (g.v_i * g.v_j).sqrt()).powf(-0.5);
                (p.prior_i + p.prior_j) * shape
            })
            .sum();
        AsymptoticProfile::PolynomialDecay { diversity: min_d, gain: total.powf(-1.0 / d), mean_factor: 1.0 }
    }
}

pub fn bhattacharyya_exponent(k: &MeasurementKernel, src: &GmmSource, i: usize, j: usize, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    Ok(PairSpectra::new(k, src, i, j)?.exponent(sigma2))
}

/// `log(√(P_i P_j) e^(−K_ij))`.
pub fn log_pair_upper_bound(k: &MeasurementKernel, src: &GmmSource, i: usize, j: usize, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    let p = PairSpectra::new(k, src, i, j)?;
    Ok(0.5 * (p.prior_i.ln() + p.prior_j.ln()) - p.exponent(sigma2))
}

pub fn pair_upper_bound(k: &MeasurementKernel, src: &GmmSource, i: usize, j: usize, sigma2: f64) -> Result<f64> {
    Ok(log_pair_upper_bound(k, src, i, j, sigma2)?.exp())
}

/// `Σ_i Σ_{j≠i} P_i e^(−K_ij)`; not clamped to 1.
pub fn union_upper_bound(k: &MeasurementKernel, src: &GmmSource, sigma2: f64) -> Result<f64> {
    BoundEvaluator::new(k, src)?.union(sigma2)
}

pub fn asymptotic_pair(k: &MeasurementKernel, src: &GmmSource, i: usize, j: usize) -> Result<AsymptoticProfile> {
    Ok(PairSpectra::new(k, src, i, j)?.asymptotics())
}

/// Prediction for a generic `m × N` random kernel from source ranks alone.
///
/// Projected ranks take their generic values `min(m, r)`. A mean difference
/// outside `im(Σ_i + Σ_j)` gives exponential decay once `m > r_Σij`.
pub fn asymptotic_pair_source(src: &GmmSource, i: usize, j: usize, m: usize) -> Result<PredictedProfile> {
    if m == 0 {
        return Err(invalid("measurement count must be at least 1"));
    }
    let (a, b) = src.check_pair(i, j)?;
    let g = src.pair_geometry(i, j)?;
    let diff = a.mean() - b.mean();
    if m > g.r_sij && diff.norm() > 0.0 {
        let image = Spectrum::of(&(a.covariance() + b.covariance()), DEFAULT_TOL)?.range_basis();
        if image.residual_norm(&diff) > CONTAINMENT_TOL * diff.norm() {
            return Ok(PredictedProfile::ExponentialDecay);
        }
    }
    let quarters = 2 * m.min(g.r_sij) - m.min(g.r_si) - m.min(g.r_sj);
    Ok(if quarters == 0 {
        PredictedProfile::ErrorFloor
    } else {
        PredictedProfile::PolynomialDecay(Diversity(quarters))
    })
}

pub fn multiclass_asymptotics(k: &MeasurementKernel, src: &GmmSource) -> Result<AsymptoticProfile> {
    Ok(BoundEvaluator::new(k, src)?.multiclass_asymptotics())
}

/// Whether two projected covariances share the same image.
pub fn same_projected_image(k: &MeasurementKernel, src: &GmmSource, i: usize, j: usize) -> Result<bool> {
    let (a, b) = src.check_pair(i, j)?;
    let ia = Spectrum::of(&congruence(k.phi(), a.covariance()), DEFAULT_TOL)?.range_basis();
    let ib = Spectrum::of(&congruence(k.phi(), b.covariance()), DEFAULT_TOL)?.range_basis();
    if ia.dim() != ib.dim() {
        return Ok(false);
    }
    Ok((0..ia.dim()).all(|c| ib.residual_norm(&ia.vector(c)) <= CONTAINMENT_TOL))
}

pub fn projected_geometry(k: &MeasurementKernel, src: &GmmSource, i: usize, j: usize) -> Result<ProjectedPairGeometry> {
    projected_pair_geometry(k, src, i, j, DEFAULT_TOL)
}

/// Taylor coefficients of the pair bound in `s = 1/σ²` around `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighNoiseExpansion {
    pub constant: f64,
    pub linear_coeff: f64,
    /// Reported only when the means coincide.
    pub quadratic_coeff: Option<f64>,
}

/// Traces of the projected covariances `A = ΦΣ_iΦᵀ`, `B = ΦΣ_jΦᵀ`, `C = (A+B)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceTerms {
    pub tr_a: f64,
    pub tr_b: f64,
    pub tr_c: f64,
    pub tr_a2: f64,
    pub tr_b2: f64,
    pub tr_c2: f64,
}

impl TraceTerms {
    pub fn of(a: &Mat, b: &Mat) -> Self {
        let c = (a + b) * 0.5;
        Self {
            tr_a: a.trace(),
            tr_b: b.trace(),
            tr_c: c.trace(),
            tr_a2: a.norm_squared(),
            tr_b2: b.norm_squared(),
            tr_c2: c.norm_squared(),
        }
    }

    /// `tr C² − ½ tr A² − ½ tr B² + tr A · tr B − tr² C`, the coefficient the
    /// high-noise quadratic term is reported with.
    pub fn a_coefficient(&self) -> f64 {
        self.tr_c2 - 0.5 * self.tr_a2 - 0.5 * self.tr_b2 + self.tr_a * self.tr_b - self.tr_c * self.tr_c
    }

    /// `tr C² − ½ tr A² − ½ tr B² = −¼ tr (A−B)²`, the second derivative
    /// coefficient of `e^(−K)` itself. It differs from
    /// [`TraceTerms::a_coefficient`] by `¼ (tr A − tr B)²`.
    pub fn taylor_coefficient(&self) -> f64 {
        self.tr_c2 - 0.5 * self.tr_a2 - 0.5 * self.tr_b2
    }
}

const MEAN_EQUAL_TOL: f64 = 1e-12;

pub fn high_noise_pair(k: &MeasurementKernel, src: &GmmSource, i: usize, j: usize) -> Result<HighNoiseExpansion> {
    k.check_source(src)?;
    let (a, b) = src.check_pair(i, j)?;
    let sqrt_pp = (a.prior() * b.prior()).sqrt();
    let m = k.phi() * (a.mean() - b.mean());
    let scale = (k.phi() * a.mean()).norm().max((k.phi() * b.mean()).norm()).max(1.0);
    if m.norm() > MEAN_EQUAL_TOL * scale {
        return Ok(HighNoiseExpansion {
            constant: sqrt_pp,
            linear_coeff: -0.125 * sqrt_pp * m.norm_squared(),
            quadratic_coeff: None,
        });
    }
    let t = TraceTerms::of(&congruence(k.phi(), a.covariance()), &congruence(k.phi(), b.covariance()));
    Ok(HighNoiseExpansion {
        constant: sqrt_pp,
        linear_coeff: 0.0,
        quadratic_coeff: Some(0.25 * sqrt_pp * t.a_coefficient()),
    })
}

/// `E tr²(ΦSΦᵀ)` and friends for an `m × N` kernel with i.i.d. standard normal entries.
fn expected_square_trace(s: &Mat, m: f64) -> f64 {
    // E tr((ΦSΦᵀ)²) = m(m+1) tr S² + m tr² S
    m * (m + 1.0) * s.norm_squared() + m * s.trace().powi(2)
}

fn expected_trace_product(s: &Mat, t: &Mat, m: f64) -> f64 {
    // E tr(ΦSΦᵀ) tr(ΦTΦᵀ) = m² tr S tr T + 2m tr(ST)
    m * m * s.trace() * t.trace() + 2.0 * m * (s * t).trace()
}

/// Expected [`TraceTerms::a_coefficient`] over unnormalized Gaussian kernels.
pub fn expected_a_coefficient(s1: &Mat, s2: &Mat, m: usize) -> f64 {
    let m = m as f64;
    let c = (s1 + s2) * 0.5;
    expected_square_trace(&c, m) - 0.5 * expected_square_trace(s1, m) - 0.5 * expected_square_trace(s2, m)
        + expected_trace_product(s1, s2, m)
        - expected_trace_product(&c, &c, m)
}

/// High-noise coefficients averaged over `m × N` kernels with i.i.d. standard
/// normal entries (no trace normalization).
pub fn averaged_high_noise(src: &GmmSource, i: usize, j: usize, m: usize) -> Result<HighNoiseExpansion> {
    if m == 0 {
        return Err(invalid("measurement count must be at least 1"));
    }
    let (a, b) = src.check_pair(i, j)?;
    let sqrt_pp = (a.prior() * b.prior()).sqrt();
    let diff = a.mean() - b.mean();
    let scale = a.mean().norm().max(b.mean().norm()).max(1.0);
    if diff.norm() > MEAN_EQUAL_TOL * scale {
        return Ok(HighNoiseExpansion {
            constant: sqrt_pp,
            linear_coeff: -0.125 * sqrt_pp * m as f64 * diff.norm_squared(),
            quadratic_coeff: None,
        });
    }
    Ok(HighNoiseExpansion {
        constant: sqrt_pp,
        linear_coeff: 0.0,
        quadratic_coeff: Some(0.25 * sqrt_pp * expected_a_coefficient(a.covariance(), b.covariance(), m)),
    })
}

/// Single-row kernel `α(μ_1−μ_2)ᵀ` with unit row norm.
pub fn mean_aligned_kernel(mu1: &Vector, mu2: &Vector) -> Result<MeasurementKernel> {
    if mu1.len() != mu2.len() {
        return Err(invalid("means have different lengths"));
    }
    let diff = mu1 - mu2;
    let norm = diff.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(invalid("means coincide; no aligned direction"));
    }
    MeasurementKernel::explicit(Mat::from_row_slice(1, diff.len(), (diff / norm).as_slice()))
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("least squares needs at least two paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("least squares needs at least two distinct abscissae"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Slope and gain read off the low-noise end of a bound curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteFit {
    pub d_hat: f64,
    /// Absent when the curve is flat.
    pub g_m_hat: Option<f64>,
    pub floor: bool,
    /// Points inside the fit window.
    pub points: usize,
}

const FLOOR_SLOPE: f64 = 1e-3;
const FIT_DECADES: f64 = 2.0;

/// Fits `log bound = d log σ² + const` over the two lowest decades of `σ²`.
///
/// `d_hat` is the slope; `g_m_hat = σ²_min · bound(σ²_min)^(−1/d_hat)`.
pub fn fit_asymptote(curve: &[(f64, f64)]) -> Result<AsymptoteFit> {
    if curve.iter().any(|&(s, b)| !(s > 0.0 && s.is_finite() && b > 0.0 && b.is_finite())) {
        return Err(invalid("curve must be strictly positive and finite"));
    }
    let (s_min, b_min) =
        curve.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).ok_or_else(|| invalid("curve is empty"))?;
    let s_max = curve.iter().map(|p| p.0).fold(0.0, f64::max);
    let span = (s_max / s_min).log10();
    if span < FIT_DECADES * (1.0 - 1e-9) {
        return Err(invalid(format!("curve spans {span:.3} decades of σ², need {FIT_DECADES}")));
    }
    let limit = s_min * 10f64.powf(FIT_DECADES) * (1.0 + 1e-9);
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve.iter().filter(|p| p.0 <= limit).map(|&(s, b)| (s.ln(), b.ln())).unzip();
    let fit = least_squares(&xs, &ys)?;
    let floor = fit.slope.abs() < FLOOR_SLOPE;
    let g_m_hat = (!floor).then(|| s_min * b_min.powf(-1.0 / fit.slope));
    Ok(AsymptoteFit { d_hat: fit.slope, g_m_hat, floor, points: xs.len() })
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthogonal;
    use crate::measurement::random_gaussian_kernel;
    use crate::source::ClassModel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn diag(x: &[f64]) -> Mat {
        Mat::from_diagonal(&v(x))
    }

    fn two(p: f64, m1: &[f64], s1: Mat, m2: &[f64], s2: Mat) -> GmmSource {
        GmmSource::new(vec![ClassModel::new(p, v(m1), s1).unwrap(), ClassModel::new(1.0 - p, v(m2), s2).unwrap()])
            .unwrap()
    }

    fn eye(n: usize) -> MeasurementKernel {
        MeasurementKernel::explicit(Mat::identity(n, n)).unwrap()
    }

    fn fig1a(m: usize, kseed: u64) -> (MeasurementKernel, GmmSource) {
        let u = random_orthogonal(6, 11).unwrap();
        let z = Vector::zeros(6);
        let src = GmmSource::new(vec![
            ClassModel::from_eigenvalues(0.5, z.clone(), &[1., 1., 0., 0., 0., 0.], Some(&u)).unwrap(),
            ClassModel::from_eigenvalues(0.5, z, &[0., 1., 1., 1., 0., 0.], Some(&u)).unwrap(),
        ])
        .unwrap();
        (random_gaussian_kernel(m, 6, kseed, true).unwrap(), src)
    }

    /// Bhattacharyya exponent from explicit inverses and determinants.
    fn naive_exponent(k: &Mat, src: &GmmSource, sigma2: f64) -> f64 {
        let (a, b) = (&src.classes()[0], &src.classes()[1]);
        let m = k.nrows();
        let i = Mat::identity(m, m) * sigma2;
        let ca = k * a.covariance() * k.transpose() + &i;
        let cb = k * b.covariance() * k.transpose() + &i;
        let half = (&ca + &cb) * 0.5;
        let d = k * (a.mean() - b.mean());
        let quad = (d.transpose() * half.clone().try_inverse().unwrap() * &d)[(0, 0)] / 8.0;
        quad + 0.5 * (half.determinant() / (ca.determinant() * cb.determinant()).sqrt()).ln()
    }

    #[test]
    fn diversity_display() {
        assert_eq!(Diversity::from_quarters(1).to_string(), "1/4");
        assert_eq!(Diversity::from_quarters(2).to_string(), "1/2");
        assert_eq!(Diversity::from_quarters(3).to_string(), "3/4");
        assert_eq!(Diversity::from_quarters(4).to_string(), "1");
        assert_eq!(Diversity::from_quarters(6).to_string(), "3/2");
    }

    #[test]
    fn identical_classes_have_zero_exponent() {
        let s = two(0.5, &[1., 2.], diag(&[1., 0.]), &[1., 2.], diag(&[1., 0.]));
        assert_eq!(bhattacharyya_exponent(&eye(2), &s, 0, 1, 0.3).unwrap(), 0.0);
        assert_relative_eq!(pair_upper_bound(&eye(2), &s, 0, 1, 0.3).unwrap(), 0.5, epsilon = 1e-15);
        assert!(bhattacharyya_exponent(&eye(2), &s, 0, 1, 0.0).is_err());
        assert!(bhattacharyya_exponent(&eye(2), &s, 1, 1, 1.0).is_err());
    }

    #[test]
    fn scalar_low_noise_limit() {
        let s = two(0.5, &[0.], diag(&[1.]), &[0.], diag(&[3.]));
        // closed form: ½ log((1+3)/2 / √3)
        let want = 0.5 * (2.0 / 3f64.sqrt()).ln();
        assert_relative_eq!(want, 0.07192, epsilon = 1e-5);
        let k = bhattacharyya_exponent(&eye(1), &s, 0, 1, 1e-12).unwrap();
        assert_relative_eq!(k, want, epsilon = 1e-10);
        let b = pair_upper_bound(&eye(1), &s, 0, 1, 1e-12).unwrap();
        assert_relative_eq!(b, 0.5 * (-want).exp(), epsilon = 1e-10);
        assert_relative_eq!(b, 0.46530, epsilon = 1e-5);
    }

    #[test]
    fn matches_naive_formula() {
        let u = random_orthogonal(4, 3).unwrap();
        let s = GmmSource::new(vec![
            ClassModel::from_eigenvalues(0.3, v(&[1., 0., -1., 0.5]), &[2., 1., 0., 0.], Some(&u)).unwrap(),
            ClassModel::from_eigenvalues(0.7, v(&[0., 1., 0., 0.]), &[0., 1., 3., 0.5], Some(&u)).unwrap(),
        ])
        .unwrap();
        let k = random_gaussian_kernel(3, 4, 9, true).unwrap();
        for sigma2 in [1e-3, 0.1, 1.0, 10.0] {
            let got = bhattacharyya_exponent(&k, &s, 0, 1, sigma2).unwrap();
            assert_relative_eq!(got, naive_exponent(k.phi(), &s, sigma2), max_relative = 1e-9);
        }
    }

    #[test]
    fn large_noise_bound_tends_to_sqrt_priors() {
        let s = two(0.2, &[0., 1.], diag(&[1., 0.]), &[1., 0.], diag(&[0., 2.]));
        let b = pair_upper_bound(&eye(2), &s, 0, 1, 1e9).unwrap();
        assert_relative_eq!(b, (0.2f64 * 0.8).sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn union_bound_specializations() {
        let s = two(0.3, &[0., 1.], diag(&[1., 0.]), &[1., 0.], diag(&[0., 2.]));
        let k = eye(2);
        let kij = bhattacharyya_exponent(&k, &s, 0, 1, 0.2).unwrap();
        let u = union_upper_bound(&k, &s, 0.2).unwrap();
        assert_relative_eq!(u, (-kij).exp(), max_relative = 1e-14);
        assert!(u >= pair_upper_bound(&k, &s, 0, 1, 0.2).unwrap());

        for l in 2..6 {
            let classes =
                (0..l).map(|_| ClassModel::new(1.0 / l as f64, v(&[0., 0.]), diag(&[1., 1.])).unwrap()).collect();
            let s = GmmSource::new(classes).unwrap();
            assert_relative_eq!(union_upper_bound(&k, &s, 0.5).unwrap(), (l - 1) as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn log_union_handles_underflow() {
        let s = two(0.5, &[0.], diag(&[0.]), &[1.], diag(&[0.]));
        let ev = BoundEvaluator::new(&eye(1), &s).unwrap();
        assert_eq!(ev.union(1e-6).unwrap(), 0.0);
        assert_relative_eq!(ev.log_union(1e-6).unwrap(), -1.0 / (8.0 * 1e-6), max_relative = 1e-12);
    }

    #[test]
    fn gain_formula_arithmetic() {
        let g = ProjectedPairGeometry { r_i: 1, r_j: 1, r_ij: 2, v_i: 1.0, v_j: 1.0, v_ij: 4.0 };
        assert_relative_eq!(pair_gain(&g, 0.5), 4.0, max_relative = 1e-14);
    }

    #[test]
    fn orthogonal_lines_profile() {
        let s = two(0.5, &[0., 0.], diag(&[1., 0.]), &[0., 0.], diag(&[0., 1.]));
        let k = MeasurementKernel::explicit(Mat::identity(2, 2) * 2f64.sqrt()).unwrap();
        let g = projected_geometry(&k, &s, 0, 1).unwrap();
        assert_eq!((g.r_i, g.r_j, g.r_ij), (1, 1, 2));
        assert_relative_eq!(g.v_ij, 4.0, max_relative = 1e-12);
        let AsymptoticProfile::PolynomialDecay { diversity, gain, mean_factor } =
            asymptotic_pair(&k, &s, 0, 1).unwrap()
        else {
            panic!("expected polynomial decay")
        };
        assert_eq!(diversity, Diversity::from_quarters(2));
        assert_eq!(mean_factor, 1.0);
        // v = (2, 2, 4): g = [½ · (¼ · 4/2)^(−½)]^(−2) = 2
        assert_relative_eq!(gain, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn fig1a_profiles() {
        for kseed in 0..5 {
            let expect = [(2, None), (3, Some(1)), (4, Some(3)), (5, Some(3)), (6, Some(3))];
            for (m, q) in expect {
                let (k, s) = fig1a(m, kseed);
                let p = asymptotic_pair(&k, &s, 0, 1).unwrap();
                match q {
                    None => assert_eq!(p.kind(), "error_floor"),
                    Some(q) => assert_eq!(p.diversity(), Some(Diversity::from_quarters(q))),
                }
                let pred = asymptotic_pair_source(&s, 0, 1, m).unwrap();
                match q {
                    None => assert_eq!(pred, PredictedProfile::ErrorFloor),
                    Some(q) => assert_eq!(pred, PredictedProfile::PolynomialDecay(Diversity::from_quarters(q))),
                }
            }
        }
    }

    #[test]
    fn source_prediction_cases() {
        let (_, s) = fig1a(2, 0);
        assert_eq!(asymptotic_pair_source(&s, 0, 1, 1).unwrap(), PredictedProfile::ErrorFloor);
        assert!(asymptotic_pair_source(&s, 0, 1, 0).is_err());
        let same = two(0.5, &[0., 0., 0.], diag(&[1., 1., 0.]), &[0., 0., 1.], diag(&[1., 1., 0.]));
        assert_eq!(asymptotic_pair_source(&same, 0, 1, 2).unwrap(), PredictedProfile::ErrorFloor);
        assert_eq!(asymptotic_pair_source(&same, 0, 1, 3).unwrap(), PredictedProfile::ExponentialDecay);
        let inside = two(0.5, &[0., 0., 0.], diag(&[1., 1., 0.]), &[1., 1., 0.], diag(&[1., 1., 0.]));
        assert_eq!(asymptotic_pair_source(&inside, 0, 1, 3).unwrap(), PredictedProfile::ErrorFloor);
    }

    #[test]
    fn nonzero_mean_outside_image_decays_exponentially() {
        let u = random_orthogonal(6, 5).unwrap();
        let s = GmmSource::new(vec![
            ClassModel::from_eigenvalues(0.5, Vector::zeros(6), &[1., 1., 0., 0., 0., 0.], Some(&u)).unwrap(),
            ClassModel::from_eigenvalues(0.5, v(&[1., -0.5, 0.8, 0.3, -1., 0.6]), &[1., 1., 0., 0., 0., 0.], Some(&u))
                .unwrap(),
        ])
        .unwrap();
        for m in [1, 2] {
            let k = random_gaussian_kernel(m, 6, 3, true).unwrap();
            assert_eq!(asymptotic_pair(&k, &s, 0, 1).unwrap().kind(), "error_floor");
        }
        let k = random_gaussian_kernel(3, 6, 3, true).unwrap();
        assert_eq!(asymptotic_pair(&k, &s, 0, 1).unwrap(), AsymptoticProfile::ExponentialDecay);
    }

    #[test]
    fn floor_value_matches_bound_at_tiny_noise() {
        let (k, s) = fig1a(2, 1);
        let AsymptoticProfile::ErrorFloor { floor_value } = asymptotic_pair(&k, &s, 0, 1).unwrap() else {
            panic!("expected floor")
        };
        assert!(floor_value > 0.0 && floor_value <= 0.5);
        let b = pair_upper_bound(&k, &s, 0, 1, 1e-12).unwrap();
        assert_relative_eq!(b, floor_value, max_relative = 1e-3);

        // nonzero means inside the common image lower the floor by e^(−c)
        let s = two(0.5, &[0., 0.], diag(&[1., 2.]), &[1., 1.], diag(&[2., 1.]));
        let AsymptoticProfile::ErrorFloor { floor_value } = asymptotic_pair(&eye(2), &s, 0, 1).unwrap() else {
            panic!("expected floor")
        };
        assert_relative_eq!(pair_upper_bound(&eye(2), &s, 0, 1, 1e-12).unwrap(), floor_value, max_relative = 1e-6);
    }

    #[test]
    fn fit_recovers_polynomial_profile() {
        let (k, s) = fig1a(4, 2);
        let p = asymptotic_pair(&k, &s, 0, 1).unwrap();
        let curve: Vec<(f64, f64)> =
            log_grid(1e-9, 1e-7, 21).into_iter().map(|s2| (s2, pair_upper_bound(&k, &s, 0, 1, s2).unwrap())).collect();
        let fit = fit_asymptote(&curve).unwrap();
        assert_relative_eq!(fit.d_hat, 0.75, max_relative = 0.01);
        assert_relative_eq!(fit.g_m_hat.unwrap(), p.effective_gain().unwrap(), max_relative = 0.05);
    }

    #[test]
    fn mean_factor_matches_fit() {
        // means differ inside the image of Σ1+Σ2; polynomial decay with a > 1
        let s = two(0.5, &[0., 0., 0.], diag(&[1., 1., 0.]), &[0.7, 0., 0.], diag(&[0., 1., 1.]));
        let p = asymptotic_pair(&eye(3), &s, 0, 1).unwrap();
        let AsymptoticProfile::PolynomialDecay { mean_factor, .. } = p else { panic!("{p:?}") };
        assert!(mean_factor > 1.0);
        let curve: Vec<(f64, f64)> = log_grid(1e-9, 1e-7, 21)
            .into_iter()
            .map(|s2| (s2, pair_upper_bound(&eye(3), &s, 0, 1, s2).unwrap()))
            .collect();
        let fit = fit_asymptote(&curve).unwrap();
        assert_relative_eq!(fit.d_hat, p.diversity().unwrap().value(), max_relative = 0.01);
        assert_relative_eq!(fit.g_m_hat.unwrap(), p.effective_gain().unwrap(), max_relative = 0.05);
    }

    #[test]
    fn multiclass_reduces_and_dominates() {
        let (k, s) = fig1a(4, 0);
        let pair = asymptotic_pair(&k, &s, 0, 1).unwrap();
        let multi = multiclass_asymptotics(&k, &s).unwrap();
        assert_eq!(pair.kind(), multi.kind());
        assert_eq!(pair.diversity(), multi.diversity());

        let (k, s) = fig1a(2, 0);
        assert_eq!(multiclass_asymptotics(&k, &s).unwrap().kind(), "error_floor");

        let u = random_orthogonal(6, 11).unwrap();
        let z = Vector::zeros(6);
        let eigs: [&[f64]; 4] = [
            &[1., 1., 0., 0., 0., 0.],
            &[0., 1., 1., 1., 0., 0.],
            &[0., 0., 1., 1., 1., 0.],
            &[0., 0., 0., 0., 1., 1.],
        ];
        let s4 = GmmSource::new(
            eigs.iter().map(|e| ClassModel::from_eigenvalues(0.25, z.clone(), e, Some(&u)).unwrap()).collect(),
        )
        .unwrap();
        for m in 4..=6 {
            let k = random_gaussian_kernel(m, 6, 1, true).unwrap();
            let p = multiclass_asymptotics(&k, &s4).unwrap();
            assert_eq!(p.diversity(), Some(Diversity::from_quarters(2)), "M = {m}");
            assert_eq!(asymptotic_pair(&k, &s4, 1, 2).unwrap().diversity(), Some(Diversity::from_quarters(2)));
        }
        let k = random_gaussian_kernel(1, 6, 1, true).unwrap();
        assert_eq!(multiclass_asymptotics(&k, &s4).unwrap().kind(), "error_floor");
    }

    #[test]
    fn multiclass_floor_sums_pair_limits() {
        let s = GmmSource::new(vec![
            ClassModel::new(0.25, v(&[0., 0.]), diag(&[1., 2.])).unwrap(),
            ClassModel::new(0.25, v(&[0., 0.]), diag(&[2., 1.])).unwrap(),
            ClassModel::new(0.5, v(&[0., 0.]), diag(&[1., 1.])).unwrap(),
        ])
        .unwrap();
        let AsymptoticProfile::ErrorFloor { floor_value } = multiclass_asymptotics(&eye(2), &s).unwrap() else {
            panic!("expected floor")
        };
        assert_relative_eq!(union_upper_bound(&eye(2), &s, 1e-12).unwrap(), floor_value, max_relative = 1e-6);
    }

    #[test]
    fn projected_images_equal_iff_ranks_balance() {
        for seed in 0..30u64 {
            let (k, s) = fig1a(1 + (seed as usize % 6), seed);
            let g = projected_geometry(&k, &s, 0, 1).unwrap();
            assert_eq!(g.r_i + g.r_j == 2 * g.r_ij, same_projected_image(&k, &s, 0, 1).unwrap());
        }
        let s = two(0.5, &[0., 0.], diag(&[1., 0.]), &[0., 0.], diag(&[3., 0.]));
        assert!(same_projected_image(&eye(2), &s, 0, 1).unwrap());
    }

    #[test]
    fn high_noise_examples() {
        let s = two(0.5, &[0., 0.], diag(&[1., 2.]), &[0., 0.], diag(&[1., 2.]));
        let h = high_noise_pair(&eye(2), &s, 0, 1).unwrap();
        assert_eq!(h.constant, 0.5);
        assert_eq!(h.linear_coeff, 0.0);
        assert_eq!(h.quadratic_coeff, Some(0.0));

        let s = two(0.5, &[0.], diag(&[1.]), &[2.], diag(&[1.]));
        let h = high_noise_pair(&eye(1), &s, 0, 1).unwrap();
        assert_relative_eq!(h.linear_coeff, -0.25, epsilon = 1e-15);
        assert_eq!(h.quadratic_coeff, None);

        let s = two(0.5, &[1., 0., 0., 0., 0.], diag(&[1.; 5]), &[0.; 5], diag(&[1.; 5]));
        let h = averaged_high_noise(&s, 0, 1, 5).unwrap();
        assert_relative_eq!(h.linear_coeff / (-0.125 * 0.5), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn high_noise_taylor_coefficients() {
        // e^(−K) = 1 + q s² + O(s³) with q = ¼ taylor_coefficient; the reported
        // coefficient differs by the (tr A − tr B)² term
        let s = two(0.5, &[0., 0.], diag(&[1., 0.]), &[0., 0.], diag(&[0.5, 1.5]));
        let k = eye(2);
        let t = TraceTerms::of(&congruence(k.phi(), &diag(&[1., 0.])), &congruence(k.phi(), &diag(&[0.5, 1.5])));
        let ev = BoundEvaluator::new(&k, &s).unwrap();
        let sv = 1e-3;
        let q_fd = ((-ev.exponent(0, 1, 1.0 / sv).unwrap()).exp() - 1.0) / (sv * sv);
        assert_relative_eq!(q_fd, 0.25 * t.taylor_coefficient(), max_relative = 1e-2);
        // −¼ tr (A−B)² with A − B = diag(½, −3/2)
        assert_relative_eq!(t.taylor_coefficient(), -0.625, epsilon = 1e-14);
        let gap = t.taylor_coefficient() - t.a_coefficient();
        assert_relative_eq!(gap, 0.25 * (t.tr_a - t.tr_b).powi(2), epsilon = 1e-14);
    }

    #[test]
    fn averaged_coefficient_matches_sampling() {
        let u = random_orthogonal(4, 8).unwrap();
        let s1 = u.clone() * diag(&[2., 1., 0., 0.]) * u.transpose();
        let s2 = u.clone() * diag(&[0., 1., 1., 3.]) * u.transpose();
        let m = 3;
        let want = expected_a_coefficient(&s1, &s2, m);
        let n = 20_000;
        let mut total = 0.0;
        for seed in 0..n {
            let k = random_gaussian_kernel(m, 4, seed, false).unwrap();
            total += TraceTerms::of(&congruence(k.phi(), &s1), &congruence(k.phi(), &s2)).a_coefficient();
        }
        assert_relative_eq!(total / n as f64, want, max_relative = 0.03);
        assert_eq!(expected_a_coefficient(&s1, &s1, m), 0.0);
    }

    #[test]
    fn mean_aligned_kernel_is_unit() {
        let k = mean_aligned_kernel(&v(&[3., 0., 4.]), &v(&[0., 0., 0.])).unwrap();
        assert_relative_eq!(k.phi().row(0).norm(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(k.phi()[(0, 0)], 0.6, epsilon = 1e-15);
        assert!(mean_aligned_kernel(&v(&[1.]), &v(&[1.])).is_err());
    }

    #[test]
    fn fit_synthetic_and_flat() {
        let curve: Vec<(f64, f64)> = log_grid(1e-8, 1e-4, 41).into_iter().map(|s| (s, (2.0 / s).powf(-0.75))).collect();
        let fit = fit_asymptote(&curve).unwrap();
        assert_relative_eq!(fit.d_hat, 0.75, epsilon = 1e-6);
        assert_relative_eq!(fit.g_m_hat.unwrap(), 2.0, max_relative = 1e-6);
        assert_eq!(fit.points, 21);
        assert!(!fit.floor);

        let flat: Vec<(f64, f64)> = log_grid(1e-6, 1e-3, 10).into_iter().map(|s| (s, 0.3)).collect();
        let fit = fit_asymptote(&flat).unwrap();
        assert!(fit.floor);
        assert!(fit.g_m_hat.is_none());

        assert!(fit_asymptote(&[(1e-3, 0.1), (1e-2, 0.2)]).is_err());
        assert!(fit_asymptote(&[(1e-3, 0.1), (1.0, 0.0)]).is_err());
    }

    fn random_source() -> impl Strategy<Value = (GmmSource, MeasurementKernel)> {
        (
            2usize..5,
            1usize..5,
            any::<u64>(),
            prop::collection::vec(0.0f64..2.0, 8),
            prop::collection::vec(-1.0f64..1.0, 8),
            0.1f64..0.9,
        )
            .prop_map(|(n, m, seed, eigs, means, p)| {
                let u = random_orthogonal(n, seed).unwrap();
                let e1: Vec<f64> = eigs[..n].to_vec();
                let e2: Vec<f64> = eigs[4..4 + n].to_vec();
                let mu1 = Vector::from_column_slice(&means[..n]);
                let mu2 = Vector::from_column_slice(&means[4..4 + n]);
                let s = GmmSource::new(vec![
                    ClassModel::from_eigenvalues(p, mu1, &e1, Some(&u)).unwrap(),
                    ClassModel::from_eigenvalues(1.0 - p, mu2, &e2, None).unwrap(),
                ])
                .unwrap();
                (s, random_gaussian_kernel(m, n, seed ^ 0x5a5a, true).unwrap())
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exponent_nonnegative_and_symmetric((s, k) in random_source(), log_s2 in -8.0f64..3.0) {
            let s2 = 10f64.powf(log_s2);
            let kij = bhattacharyya_exponent(&k, &s, 0, 1, s2).unwrap();
            let kji = bhattacharyya_exponent(&k, &s, 1, 0, s2).unwrap();
            prop_assert!(kij >= 0.0);
            prop_assert!((kij - kji).abs() <= 1e-9 * kij.max(1.0));
            let (p0, p1) = (s.classes()[0].prior(), s.classes()[1].prior());
            prop_assert!(pair_upper_bound(&k, &s, 0, 1, s2).unwrap() <= (p0 * p1).sqrt() * (1.0 + 1e-12));
        }

        #[test]
        fn bound_nondecreasing_in_noise((s, k) in random_source()) {
            let ev = BoundEvaluator::new(&k, &s).unwrap();
            let mut prev = 0.0;
            for s2 in log_grid(1e-8, 1e3, 45) {
                let b = ev.union(s2).unwrap();
                prop_assert!(b >= prev * (1.0 - 1e-9), "σ² = {s2}: {b} < {prev}");
                prev = b;
            }
        }
    }
}
