//! Running a scenario, printing designed kernels and analyzing sweep CSVs.

use std::fmt::Write as _;

use super::config::ScenarioConfig;
use super::records::CsvRecord;
use crate::bounds::{
    fit_asymptote, least_squares, multiclass_asymptotics, AsymptoteFit, AsymptoticProfile, BoundEvaluator,
};
use crate::error::Result;
use crate::measurement::{design_for_source, MeasurementKernel, ProjectedPairGeometry};
use crate::montecarlo::{snr_sweep, SweepResult};
use crate::source::PairGeometry;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub kernel: MeasurementKernel,
    pub sweep: SweepResult,
    pub profile: AsymptoticProfile,
    /// Fit of the union-bound curve; `None` when the bound decays
    /// exponentially or too few positive points remain.
    pub fit: Option<AsymptoteFit>,
}

/// Builds the source and kernel, sweeps the SNR grid and summarizes the bound.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let src = cfg.build_source()?;
    let kernel = cfg.build_kernel(&src)?;
    let sweep = snr_sweep(&cfg.name, &src, &kernel, &cfg.snr_grid()?, cfg.trials, cfg.seed)?;
    let profile = multiclass_asymptotics(&kernel, &src)?;
    let fit = match profile {
        AsymptoticProfile::ExponentialDecay => None,
        _ => {
            let curve: Vec<(f64, f64)> =
                sweep.records.iter().filter(|r| r.union_bound > 0.0).map(|r| (r.sigma2, r.union_bound)).collect();
            fit_asymptote(&curve).ok()
        }
    };
    Ok(RunOutput { config: cfg.clone(), kernel, sweep, profile, fit })
}

impl RunOutput {
    /// Human-readable summary printed by the CLI.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.config.name);
        let _ = writeln!(s, "kernel: {} (M = {})", self.kernel.provenance(), self.kernel.m());
        let _ = writeln!(s, "profile: {}", self.profile);
        match &self.fit {
            Some(f) if f.floor => {
                let _ = writeln!(s, "fit: floor (d_hat = {:.4}, {} points)", f.d_hat, f.points);
            }
            Some(f) => {
                let _ = writeln!(
                    s,
                    "fit: d_hat = {:.4}, g_m_hat = {:e} ({} points)",
                    f.d_hat,
                    f.g_m_hat.unwrap_or(f64::NAN),
                    f.points
                );
            }
            None => {
                let _ = writeln!(s, "fit: skipped");
            }
        }
        let _ = writeln!(s, "points: {}, trials/point: {}", self.sweep.records.len(), self.config.trials);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub pair: (usize, usize),
    pub source: PairGeometry,
    pub projected: ProjectedPairGeometry,
    pub profile: AsymptoticProfile,
}

#[derive(Debug, Clone)]
pub struct DesignOutput {
    pub kernel: MeasurementKernel,
    pub pairs: Vec<PairReport>,
    pub profile: AsymptoticProfile,
}

/// Designed kernel for the scenario's source with budget `m`.
pub fn design(cfg: &ScenarioConfig, m: usize) -> Result<DesignOutput> {
    let src = cfg.build_source()?;
    let kernel = design_for_source(&src, m)?;
    let ev = BoundEvaluator::new(&kernel, &src)?;
    let pairs = ev
        .pairs()
        .map(|((i, j), p)| {
            Ok(PairReport {
                pair: (*i, *j),
                source: src.pair_geometry(*i, *j)?,
                projected: *p.geometry(),
                profile: p.asymptotics(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(DesignOutput { kernel, pairs, profile: ev.multiclass_asymptotics() })
}

impl DesignOutput {
    /// Kernel rows as CSV followed by `#`-prefixed per-pair geometry.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let n = self.kernel.n();
        let header: Vec<String> = (1..=n).map(|c| format!("x{c}")).collect();
        let _ = writeln!(s, "row,{}", header.join(","));
        for r in 0..self.kernel.m() {
            let vals: Vec<String> = self.kernel.phi().row(r).iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(s, "{},{}", r + 1, vals.join(","));
        }
        let _ = writeln!(s, "# kernel: {}", self.kernel.provenance());
        for p in &self.pairs {
            let g = &p.projected;
            let _ = writeln!(
                s,
                "# pair {}-{}: NO_Dim = {}, r_i = {}, r_j = {}, r_ij = {}, {}",
                p.pair.0 + 1,
                p.pair.1 + 1,
                p.source.no_dim,
                g.r_i,
                g.r_j,
                g.r_ij,
                p.profile
            );
        }
        let _ = writeln!(s, "# overall: {}", self.profile);
        s
    }
}

/// Asymptote fits for one `(scenario, kernel, M)` series of a CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesAnalysis {
    pub scenario: String,
    pub kernel: String,
    pub m: usize,
    pub points: usize,
    /// Fit of the bound column, or why it could not be fitted.
    pub bound_fit: std::result::Result<AsymptoteFit, String>,
    /// Log-log slope of the Monte Carlo column over the lowest two decades of
    /// `σ²` with nonzero error counts.
    pub mc_slope: Option<f64>,
}

pub fn analyze(records: &[CsvRecord]) -> Vec<SeriesAnalysis> {
    let mut keys: Vec<(String, String, usize)> = Vec::new();
    for r in records {
        let key = (r.scenario.clone(), r.kernel.clone(), r.m);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(scenario, kernel, m)| {
            let rows: Vec<&CsvRecord> =
                records.iter().filter(|r| r.scenario == scenario && r.kernel == kernel && r.m == m).collect();
            let curve: Vec<(f64, f64)> =
                rows.iter().filter(|r| r.perr_ub > 0.0).map(|r| (r.sigma2, r.perr_ub)).collect();
            let bound_fit = fit_asymptote(&curve).map_err(|e| e.to_string());
            SeriesAnalysis { scenario, kernel, m, points: rows.len(), bound_fit, mc_slope: mc_slope(&rows) }
        })
        .collect()
}

fn mc_slope(rows: &[&CsvRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.perr_mc > 0.0).map(|r| (r.sigma2, r.perr_mc)).collect();
    let s_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        pts.iter().filter(|p| p.0 <= 100.0 * s_min * (1.0 + 1e-9)).map(|p| (p.0.ln(), p.1.ln())).unzip();
    least_squares(&xs, &ys).ok().map(|f| f.slope)
}

pub fn format_analysis(rows: &[SeriesAnalysis]) -> String {
    let mut s = String::new();
    for a in rows {
        let _ = write!(s, "{} kernel={} M={} points={}: ", a.scenario, a.kernel, a.m, a.points);
        match &a.bound_fit {
            Ok(f) if f.floor => {
                let _ = write!(s, "bound floor (d_hat = {:.4})", f.d_hat);
            }
            Ok(f) => {
                let _ = write!(s, "bound d_hat = {:.4}, g_m_hat = {:e}", f.d_hat, f.g_m_hat.unwrap_or(f64::NAN));
            }
            Err(e) => {
                let _ = write!(s, "bound fit unavailable ({e})");
            }
        }
        match a.mc_slope {
            Some(m) => {
                let _ = writeln!(s, "; mc slope = {m:.4}");
            }
            None => {
                let _ = writeln!(s, "; mc slope unavailable");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::catalog::builtin;
    use crate::experiment::config::{Overrides, SnrConfig};
    use crate::experiment::records::sweep_records;

    fn small(name: &str, m: usize) -> ScenarioConfig {
        builtin(name)
            .unwrap()
            .with_overrides(&Overrides {
                m: Some(m),
                trials: Some(500),
                snr: Some(SnrConfig { start_db: 0.0, stop_db: 60.0, step_db: 10.0 }),
                ..Default::default()
            })
            .unwrap()
    }

    #[test]
    fn fig1a_m2_reports_floor() {
        let out = run(&small("fig1a-zero-mean-2class", 2)).unwrap();
        assert!(out.report().contains("error_floor"));
        assert!(out.fit.unwrap().floor);
    }

    #[test]
    fn fig5_m1_reports_quarter() {
        let out = run(&small("fig5-designed-2class-zero", 1)).unwrap();
        assert!(out.report().contains("polynomial_decay (d = 1/4"), "{}", out.report());
        assert_eq!(out.kernel.m(), 1);
    }

    #[test]
    fn fig1b_m3_skips_fit() {
        let out = run(&small("fig1b-nonzero-mean-2class", 3)).unwrap();
        assert_eq!(out.profile, AsymptoticProfile::ExponentialDecay);
        assert!(out.fit.is_none());
    }

    #[test]
    fn design_reports() {
        let d = design(&builtin("fig5-designed-2class-zero").unwrap(), 2).unwrap();
        let text = d.report();
        assert!(text.starts_with("row,x1,x2,x3\n"));
        assert!(text.contains("# pair 1-2: NO_Dim = 2"));
        let d = design(&builtin("fig6-designed-2class-nonzero").unwrap(), 1).unwrap();
        assert_eq!(d.profile, AsymptoticProfile::ExponentialDecay);
    }

    #[test]
    fn analyze_groups_series() {
        let mut rows = Vec::new();
        for m in [2, 4] {
            let out = run(&small("fig1a-zero-mean-2class", m)).unwrap();
            rows.extend(sweep_records(&out.sweep));
        }
        let a = analyze(&rows);
        assert_eq!(a.len(), 2);
        assert!(a[0].bound_fit.as_ref().unwrap().floor);
        let d4 = a[1].bound_fit.as_ref().unwrap().d_hat;
        assert!((d4 - 0.75).abs() < 0.05, "{d4}");
        assert!(format_analysis(&a).contains("M=4"));
    }
}
