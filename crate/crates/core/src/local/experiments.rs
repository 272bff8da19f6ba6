//! Convergence experiments along a grid of log|t|⁻¹ values.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use super::chart::{pseudonorm, ChartSystem};
use super::laurent::{common_shape, LaurentFamily};
use super::optimizer::OptimizerSpec;
use super::quadrature::{GaussRule, QuadratureSpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub seed: Option<u64>,
    pub m: u32,
    pub chain_length: u32,
    /// Largest (α, β) kept in each family.
    pub truncation: Vec<(u32, u32)>,
    pub log_t_inv: Vec<f64>,
    pub observed: Vec<f64>,
    pub reference: Vec<f64>,
    pub relative_error: Vec<f64>,
    /// Slope of log(relative error) against log(log|t|⁻¹), when it can be fitted.
    pub fitted_exponent: Option<f64>,
    /// Further per-row diagnostics, keyed by column name.
    pub extra: BTreeMap<String, Vec<f64>>,
}

impl ExperimentResult {
    fn new(experiment: &str, seed: Option<u64>, families: &[LaurentFamily], grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let (m, chain_length) = common_shape(families)?;
        Ok(ExperimentResult {
            experiment: experiment.into(),
            seed,
            m,
            chain_length,
            truncation: families.iter().map(|f| f.truncation()).collect(),
            log_t_inv: grid.to_vec(),
            observed: Vec::new(),
            reference: Vec::new(),
            relative_error: Vec::new(),
            fitted_exponent: None,
            extra: BTreeMap::new(),
        })
    }

    fn push(&mut self, observed: f64, reference: f64) {
        self.observed.push(observed);
        self.reference.push(reference);
        self.relative_error.push((observed - reference).abs() / reference.abs().max(f64::MIN_POSITIVE));
    }

    fn fit(&mut self) {
        self.fitted_exponent = fit_exponent(&self.log_t_inv, &self.relative_error);
    }

    /// One row per grid point: log|t|⁻¹, observed, reference, relative error.
    pub fn to_columns(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# experiment {}", self.experiment);
        let _ = writeln!(out, "# m {} chain_length {}", self.m, self.chain_length);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed {seed}");
        }
        let orders: Vec<String> = self.truncation.iter().map(|(a, b)| format!("{a},{b}")).collect();
        let _ = writeln!(out, "# truncation {}", orders.join(" "));
        match self.fitted_exponent {
            Some(e) => {
                let _ = writeln!(out, "# fitted_exponent {e:.6e}");
            }
            None => {
                let _ = writeln!(out, "# fitted_exponent none");
            }
        }
        let _ = writeln!(out, "log_t_inv observed reference relative_error");
        for i in 0..self.log_t_inv.len() {
            let _ = writeln!(
                out,
                "{:.6e} {:.12e} {:.12e} {:.6e}",
                self.log_t_inv[i], self.observed[i], self.reference[i], self.relative_error[i]
            );
        }
        out
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty log|t|^-1 grid".into()));
    }
    if grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("log|t|^-1 grid must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Least-squares slope of log y against log x over entries with y above round-off.
pub fn fit_exponent(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, y)| **y > 1e-13).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// ‖θ_t‖′ / (2πl log|t|⁻¹)^{m/2} along the grid.
pub fn norm_asymptotics_experiment(
    family: &LaurentFamily,
    chain_length: u32,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<ExperimentResult> {
    let family = family.clone().with_chain_length(chain_length)?;
    let mut out = ExperimentResult::new("norm", None, std::slice::from_ref(&family), grid)?;
    let m = family.m as f64;
    for &l in grid {
        let norm = pseudonorm(&[(Complex64::new(1.0, 0.0), family.clone())], l, spec)?;
        out.push(norm / (2.0 * PI * chain_length as f64 * l).powf(m / 2.0), 1.0);
    }
    out.fit();
    Ok(out)
}

/// NS mass of {|t|^β < |w| < |t|^α} weighted by f(log|w|/log|t|), against (1/l)∫_α^β f.
#[allow(clippy::too_many_arguments)]
pub fn region_mass_experiment(
    families: &[LaurentFamily],
    region: (f64, f64),
    f: &(dyn Fn(f64) -> f64 + Sync),
    grid: &[f64],
    spec: &QuadratureSpec,
    optimizer: &OptimizerSpec,
) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::new("region-mass", Some(optimizer.seed), families, grid)?;
    let (alpha, beta) = region;
    let reference = GaussRule::new(32).integrate(alpha, beta, f) / out.chain_length as f64;
    for &l in grid {
        let system = ChartSystem::new(families, l, spec, optimizer)?;
        out.push(system.region_mass(alpha, beta, f)?, reference);
    }
    out.fit();
    Ok(out)
}

/// A₁₁ / (2πl log|t|⁻¹)^m along the grid, with the normalized off-diagonal entries of the
/// pairing matrix as extra columns `offdiag_jk`.
pub fn pairing_experiment(
    families: &[LaurentFamily],
    grid: &[f64],
    spec: &QuadratureSpec,
    optimizer: &OptimizerSpec,
) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::new("pairing", Some(optimizer.seed), families, grid)?;
    let m = out.m as i32;
    let l = out.chain_length as f64;
    for &x in grid {
        let a = ChartSystem::new(families, x, spec, optimizer)?.pairing()?;
        out.push(a.get(0, 0).re / (2.0 * PI * l * x).powi(m), 1.0);
        for j in 0..a.dim() {
            for k in j + 1..a.dim() {
                out.extra.entry(format!("offdiag_{}{}", j + 1, k + 1)).or_default().push(a.normalized(j, k));
            }
        }
    }
    out.fit();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_pole_ratio_is_one() {
        let f = LaurentFamily::monomial(2, 2).unwrap();
        let r = norm_asymptotics_experiment(&f, 1, &[10.0, 100.0], &QuadratureSpec::default()).unwrap();
        assert!(r.relative_error.iter().all(|e| *e < 1e-9));
        let r = norm_asymptotics_experiment(&f, 3, &[10.0, 100.0], &QuadratureSpec::default()).unwrap();
        assert!(r.relative_error.iter().all(|e| *e < 1e-9));
    }

    #[test]
    fn residue_free_family_ratio_goes_to_zero() {
        let f = LaurentFamily::monomial(2, 1).unwrap();
        let r = norm_asymptotics_experiment(&f, 1, &[10.0, 100.0, 1000.0], &QuadratureSpec::default()).unwrap();
        assert!(r.observed.windows(2).all(|w| w[1] < w[0]));
        // both sides stay bounded, so the ratio decays like 1/log|t|⁻¹
        assert!(r.observed[2] < 5e-3);
        let slope = fit_exponent(&r.log_t_inv, &r.observed).unwrap();
        assert!((slope + 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn grid_must_increase() {
        let f = LaurentFamily::monomial(2, 2).unwrap();
        assert!(norm_asymptotics_experiment(&f, 1, &[100.0, 10.0], &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn exponent_fit() {
        let x = [10.0, 100.0, 1000.0];
        let y = [1e-1, 1e-2, 1e-3];
        assert!((fit_exponent(&x, &y).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(fit_exponent(&x, &[0.0, 0.0, 0.0]), None);
    }

    #[test]
    fn columns_have_one_row_per_point() {
        let f = LaurentFamily::monomial(2, 2).unwrap();
        let r = norm_asymptotics_experiment(&f, 1, &[10.0, 20.0], &QuadratureSpec::default()).unwrap();
        let text = r.to_columns();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
    }
}
