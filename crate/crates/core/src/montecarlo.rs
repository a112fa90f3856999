//! Seeded Monte Carlo estimates of the MAP error and SNR sweeps.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::BoundEvaluator;
use crate::classifier::{argmax, check_sigma2, MapClassifier};
use crate::error::{invalid, Result};
use crate::linalg::{Mat, Spectrum, Vector, DEFAULT_TOL};
use crate::measurement::{MeasurementKernel, Provenance};
use crate::rng::{stream_rng, StreamRng};
use crate::source::GmmSource;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// An estimate of the misclassification probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub p_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Standard error used when comparing independent estimates.
    pub std_err: f64,
    pub n_trials: u64,
    pub seed: u64,
}

impl ErrorEstimate {
    /// Error count with a Wilson 95% interval. The standard error uses the
    /// Agresti–Coull proportion `(k+2)/(n+4)` so that zero counts keep a
    /// nonzero spread.
    pub fn from_count(errors: u64, n_trials: u64, seed: u64) -> Self {
        let n = n_trials as f64;
        let p = errors as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        let p_ac = (errors as f64 + 2.0) / (n + 4.0);
        Self {
            p_err: p,
            ci_low: (center - half).clamp(0.0, p),
            ci_high: (center + half).clamp(p, 1.0),
            std_err: (p_ac * (1.0 - p_ac) / (n + 4.0)).sqrt(),
            n_trials,
            seed,
        }
    }

    /// Mean of bounded per-sample values with a normal 95% interval.
    fn from_samples(sum: f64, sum_sq: f64, n_trials: u64, seed: u64) -> Self {
        let n = n_trials as f64;
        let mean = sum / n;
        let var = if n_trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        let se = (var / n).sqrt();
        Self {
            p_err: mean,
            ci_low: (mean - Z95 * se).clamp(0.0, mean),
            ci_high: (mean + Z95 * se).clamp(mean, 1.0),
            std_err: se,
            n_trials,
            seed,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Draws `y = Φ(μ_c + F_c z) + σ n` class by class.
struct MeasurementSampler<'a> {
    src: &'a GmmSource,
    centers: Vec<Vector>,
    /// `Φ F_c`, with `F_c F_cᵀ = Σ_c`.
    factors: Vec<Mat>,
    sigma: f64,
}

impl<'a> MeasurementSampler<'a> {
    fn new(k: &MeasurementKernel, src: &'a GmmSource, sigma2: f64) -> Result<Self> {
        let phi = k.phi();
        let factors = src
            .classes()
            .iter()
            .map(|c| Ok(phi * Spectrum::of(c.covariance(), DEFAULT_TOL)?.sqrt_factor()))
            .collect::<Result<_>>()?;
        let centers = src.classes().iter().map(|c| phi * c.mean()).collect();
        Ok(Self { src, centers, factors, sigma: sigma2.sqrt() })
    }

    /// Overwrites `y` and returns the drawn label. `z` is scratch of length `N`.
    fn draw(&self, rng: &mut StreamRng, z: &mut Vector, y: &mut Vector) -> usize {
        let c = self.src.label_for(rng.random::<f64>());
        let f = &self.factors[c];
        let r = f.ncols();
        for zi in z.iter_mut().take(r) {
            *zi = rng.sample(StandardNormal);
        }
        y.copy_from(&self.centers[c]);
        y.gemv(1.0, f, &z.rows(0, r), 1.0);
        for yi in y.iter_mut() {
            *yi += self.sigma * rng.sample::<f64, _>(StandardNormal);
        }
        c
    }
}

fn check_trials(n: u64) -> Result<()> {
    if n == 0 {
        return Err(invalid("trial count must be at least 1"));
    }
    Ok(())
}

fn count_errors(
    k: &MeasurementKernel,
    src: &GmmSource,
    sigma2: f64,
    n_trials: u64,
    seed: u64,
    stream: u64,
) -> Result<u64> {
    check_sigma2(sigma2)?;
    check_trials(n_trials)?;
    let clf = MapClassifier::new(k, src, sigma2)?;
    let sampler = MeasurementSampler::new(k, src, sigma2)?;
    let mut rng = stream_rng(seed, stream);
    let (mut z, mut y, mut scratch) = (Vector::zeros(src.dim()), Vector::zeros(k.m()), Vector::zeros(k.m()));
    let mut lp = vec![0.0; src.num_classes()];
    let mut errors = 0;
    for _ in 0..n_trials {
        let label = sampler.draw(&mut rng, &mut z, &mut y);
        clf.log_posteriors_into(&y, &mut scratch, &mut lp);
        if argmax(&lp) != label {
            errors += 1;
        }
    }
    Ok(errors)
}

/// Fraction of misclassified draws with a Wilson 95% interval.
pub fn estimate_perr(
    src: &GmmSource,
    k: &MeasurementKernel,
    sigma2: f64,
    n_trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    let errors = count_errors(k, src, sigma2, n_trials, seed, 0)?;
    Ok(ErrorEstimate::from_count(errors, n_trials, seed))
}

/// Conditional-expectation estimator of the two-class MAP error: the mean of
/// `min(P_1 p_1, P_2 p_2) / (P_1 p_1 + P_2 p_2)` over draws of `y`.
pub fn oracle_perr_two_class(
    src: &GmmSource,
    k: &MeasurementKernel,
    sigma2: f64,
    n_samples: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    if src.num_classes() != 2 {
        return Err(invalid(format!("oracle estimator needs two classes, source has {}", src.num_classes())));
    }
    check_sigma2(sigma2)?;
    check_trials(n_samples)?;
    let clf = MapClassifier::new(k, src, sigma2)?;
    let sampler = MeasurementSampler::new(k, src, sigma2)?;
    let mut rng = stream_rng(seed, 0);
    let (mut z, mut y, mut scratch) = (Vector::zeros(src.dim()), Vector::zeros(k.m()), Vector::zeros(k.m()));
    let mut lp = [0.0; 2];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        sampler.draw(&mut rng, &mut z, &mut y);
        clf.log_posteriors_into(&y, &mut scratch, &mut lp);
        let gap = (lp[0] - lp[1]).abs();
        let v = if gap.is_finite() { 1.0 / (1.0 + gap.exp()) } else { 0.0 };
        sum += v;
        sum_sq += v * v;
    }
    Ok(ErrorEstimate::from_samples(sum, sum_sq, n_samples, seed))
}

/// `σ² = 10^(−snr_db/10)`.
pub fn sigma2_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn snr_db_from_sigma2(sigma2: f64) -> f64 {
    -10.0 * sigma2.log10()
}

/// Strictly increasing list of SNR values in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid {
    points: Vec<f64>,
}

impl SnrGrid {
    /// `start, start+step, …` up to and including `stop` (within rounding).
    pub fn range(start_db: f64, stop_db: f64, step_db: f64) -> Result<Self> {
        if !(start_db.is_finite() && stop_db.is_finite() && step_db.is_finite()) {
            return Err(invalid("SNR grid bounds must be finite"));
        }
        if step_db.is_nan() || step_db <= 0.0 {
            return Err(invalid(format!("SNR step must be positive, got {step_db}")));
        }
        if stop_db < start_db {
            return Err(invalid(format!("SNR grid stops ({stop_db}) before it starts ({start_db})")));
        }
        let n = ((stop_db - start_db) / step_db + 1e-9).floor() as usize + 1;
        Ok(Self { points: (0..n).map(|k| start_db + k as f64 * step_db).collect() })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("SNR grid is empty"));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("SNR grid must be finite and strictly increasing"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub sigma2: f64,
    pub estimate: ErrorEstimate,
    pub union_bound: f64,
    /// Natural log of the union bound; finite where the bound underflows.
    pub log_union_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scenario: String,
    pub kernel: Provenance,
    pub m: usize,
    pub records: Vec<SweepRecord>,
}

/// One Monte Carlo estimate and one union bound per grid point. Point `p` uses
/// random stream `p` of `seed`, so points are independent of evaluation order.
pub fn snr_sweep(
    scenario: &str,
    src: &GmmSource,
    k: &MeasurementKernel,
    grid: &SnrGrid,
    trials_per_point: u64,
    seed: u64,
) -> Result<SweepResult> {
    check_trials(trials_per_point)?;
    if grid.is_empty() {
        return Err(invalid("SNR grid is empty"));
    }
    let bounds = BoundEvaluator::new(k, src)?;
    let point = |(p, &snr_db): (usize, &f64)| -> Result<SweepRecord> {
        let sigma2 = sigma2_from_snr_db(snr_db);
        let errors = count_errors(k, src, sigma2, trials_per_point, seed, p as u64)?;
        Ok(SweepRecord {
            snr_db,
            sigma2,
            estimate: ErrorEstimate::from_count(errors, trials_per_point, seed),
            union_bound: bounds.union(sigma2)?,
            log_union_bound: bounds.log_union(sigma2)?,
        })
    };
    #[cfg(feature = "parallel")]
    let records = grid.points().par_iter().enumerate().map(point).collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let records = grid.points().iter().enumerate().map(point).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { scenario: scenario.to_owned(), kernel: k.provenance().clone(), m: k.m(), records })
}
