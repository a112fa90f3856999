//! MAP classification of noisy compressive measurements.

use crate::error::{invalid, Result};
use crate::linalg::{congruence, Mat, Spectrum, Vector, DEFAULT_TOL};
use crate::measurement::MeasurementKernel;
use crate::source::GmmSource;

/// A measurement `y = Φx + n` together with the noise variance it was taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyObservation {
    y: Vector,
    sigma2: f64,
}

impl NoisyObservation {
    pub fn new(y: Vector, sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(invalid("observation has non-finite entries"));
        }
        Ok(Self { y, sigma2 })
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

pub(crate) fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(invalid(format!("noise variance must be positive and finite, got {sigma2}")));
    }
    Ok(())
}

/// Per-class whitening of `N(Φμ_c, ΦΣ_cΦᵀ + σ²I)`.
#[derive(Debug, Clone)]
struct ClassFactor {
    center: Vector,
    /// `diag(1/√(λ+σ²)) Uᵀ`
    whiten: Mat,
    /// `log P_c − ½ Σ log(λ+σ²)`
    offset: f64,
}

/// MAP classifier for one `(kernel, source, σ²)` triple.
///
/// Factorizations are computed once in [`MapClassifier::new`]; the classifier is
/// immutable afterwards and can be shared across threads.
#[derive(Debug, Clone)]
pub struct MapClassifier {
    sigma2: f64,
    classes: Vec<ClassFactor>,
}

impl MapClassifier {
    pub fn new(k: &MeasurementKernel, src: &GmmSource, sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        k.check_source(src)?;
        let phi = k.phi();
        let classes = src
            .classes()
            .iter()
            .map(|c| {
                let spec = Spectrum::of(&congruence(phi, c.covariance()), DEFAULT_TOL)?;
                let shifted: Vec<f64> = spec.clamped_values().iter().map(|l| l + sigma2).collect();
                let mut whiten = spec.vectors().transpose();
                for (r, s) in shifted.iter().enumerate() {
                    whiten.row_mut(r).scale_mut(1.0 / s.sqrt());
                }
                let half_logdet: f64 = 0.5 * shifted.iter().map(|s| s.ln()).sum::<f64>();
                Ok(ClassFactor { center: phi * c.mean(), whiten, offset: c.prior().ln() - half_logdet })
            })
            .collect::<Result<_>>()?;
        Ok(Self { sigma2, classes })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn measurement_dim(&self) -> usize {
        self.classes[0].center.len()
    }

    /// Writes `log P_c + log N(y; Φμ_c, ΦΣ_cΦᵀ + σ²I)` into `out`, omitting the
    /// shared `−(M/2) log 2π`. `scratch` must have length `M`.
    pub(crate) fn log_posteriors_into(&self, y: &Vector, scratch: &mut Vector, out: &mut [f64]) {
        for (c, f) in self.classes.iter().enumerate() {
            scratch.copy_from(y);
            *scratch -= &f.center;
            out[c] = f.offset - 0.5 * (&f.whiten * &*scratch).norm_squared();
        }
    }

    pub fn log_posteriors(&self, y: &Vector) -> Result<Vec<f64>> {
        if y.len() != self.measurement_dim() {
            return Err(invalid(format!("observation has length {}, expected {}", y.len(), self.measurement_dim())));
        }
        let mut scratch = Vector::zeros(y.len());
        let mut out = vec![0.0; self.classes.len()];
        self.log_posteriors_into(y, &mut scratch, &mut out);
        Ok(out)
    }

    pub fn classify(&self, y: &Vector) -> Result<usize> {
        Ok(argmax(&self.log_posteriors(y)?))
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = c;
        }
    }
    best
}

fn classifier_for(obs: &NoisyObservation, k: &MeasurementKernel, src: &GmmSource) -> Result<MapClassifier> {
    if obs.y.len() != k.m() {
        return Err(invalid(format!("observation has length {}, kernel has {} rows", obs.y.len(), k.m())));
    }
    MapClassifier::new(k, src, obs.sigma2)
}

pub fn log_posteriors(obs: &NoisyObservation, k: &MeasurementKernel, src: &GmmSource) -> Result<Vec<f64>> {
    classifier_for(obs, k, src)?.log_posteriors(&obs.y)
}

pub fn classify(obs: &NoisyObservation, k: &MeasurementKernel, src: &GmmSource) -> Result<usize> {
    classifier_for(obs, k, src)?.classify(&obs.y)
}
