//! Gauss-Legendre panels in the log-radial variable s = −log|w| and trapezoid sums in the
//! angle.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use serde::Serialize;

use crate::error::{Error, NonConvergence, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per radial panel.
    pub radial_points: usize,
    /// Trapezoid nodes in the angle.
    pub angular_points: usize,
    /// Maximum number of doublings tried before giving up.
    pub refinement_levels: usize,
    /// Relative change between consecutive levels accepted as converged.
    pub tolerance: f64,
    /// Relative accuracy of integrals of the NS density, which is only Lipschitz where
    /// the maximizing section changes.
    pub density_tolerance: f64,
    /// Maximum number of times a radial panel is halved by the adaptive integrator.
    pub max_depth: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_points: 8,
            angular_points: 16,
            refinement_levels: 5,
            tolerance: 1e-10,
            density_tolerance: 1e-6,
            max_depth: 24,
        }
    }
}

impl QuadratureSpec {
    pub fn check(&self) -> Result<()> {
        if self.radial_points < 8 || self.angular_points < 8 {
            return Err(Error::InvalidInput(format!(
                "quadrature needs at least 8 radial and 8 angular points (got {} and {})",
                self.radial_points, self.angular_points
            )));
        }
        if !(self.tolerance > 0.0) || !(self.density_tolerance > 0.0) {
            return Err(Error::InvalidInput("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

/// Nodes and weights on [−1, 1].
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let rule = GaussLegendre::new(n.max(2)).expect("degree at least 2");
        let (nodes, weights) = rule.into_node_weight_pairs().into_iter().unzip();
        GaussRule { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b], appended to `out`.
    pub fn push_mapped(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            out.push((mid + half * x, half * w));
        }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }
}

/// Panels of [a, b] whose widths double away from both ends, each split into 2^level parts.
pub fn graded_panels(a: f64, b: f64, level: usize) -> Vec<(f64, f64)> {
    let len = b - a;
    let mut cuts = vec![a, b];
    let mut w = 1.0;
    while 2.0 * w < 0.5 * len {
        cuts.push(a + w);
        cuts.push(b - w);
        w *= 2.0;
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * len.max(1.0));
    split_panels(&cuts, level)
}

/// `count` equal panels of [a, b], each split into 2^level parts.
pub fn uniform_panels(a: f64, b: f64, count: usize, level: usize) -> Vec<(f64, f64)> {
    let cuts: Vec<f64> = (0..=count).map(|i| a + (b - a) * i as f64 / count as f64).collect();
    split_panels(&cuts, level)
}

fn split_panels(cuts: &[f64], level: usize) -> Vec<(f64, f64)> {
    let parts = 1usize << level;
    let mut out = Vec::new();
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        for k in 0..parts {
            let x0 = lo + (hi - lo) * k as f64 / parts as f64;
            let x1 = lo + (hi - lo) * (k + 1) as f64 / parts as f64;
            out.push((x0, x1));
        }
    }
    out
}

/// Radial nodes with weights over the given panels.
pub fn radial_nodes(panels: &[(f64, f64)], rule: &GaussRule) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels.len() * rule.nodes.len());
    for &(a, b) in panels {
        rule.push_mapped(a, b, &mut out);
    }
    out
}

/// Angles 2πk/n with the equal trapezoid weight 2π/n.
pub fn angular_nodes(n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|k| (2.0 * PI * k as f64 / n as f64, 2.0 * PI / n as f64)).collect()
}

/// Sizes used at refinement level `level`.
pub fn level_sizes(spec: &QuadratureSpec, level: usize) -> (usize, usize) {
    (spec.radial_points, spec.angular_points << level)
}

/// Runs `eval(level)` for increasing levels until two consecutive values agree to
/// `spec.tolerance` (relative, with `floor` as absolute scale).
pub fn refine<F>(routine: &str, spec: &QuadratureSpec, floor: f64, mut eval: F) -> Result<f64>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut previous = eval(0)?;
    let mut change = f64::INFINITY;
    for level in 1..=spec.refinement_levels {
        let current = eval(level)?;
        change = (current - previous).abs() / current.abs().max(floor);
        if change <= spec.tolerance {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NonConvergence(NonConvergence {
        routine: routine.into(),
        achieved: change,
        tolerance: spec.tolerance,
        detail: format!("last value {previous:e} after {} refinements", spec.refinement_levels),
    }))
}

/// Integral over the half annulus {e^{−L/2} < |w| < 1} of a density given in log-polar
/// form: `density(s, φ)` is |w|²ρ(w) at w = e^{−s+iφ}, so the result is ∫∫ density ds dφ.
pub fn integrate_halfannulus<F>(density: F, log_t_inv: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    spec.check()?;
    if !(log_t_inv > 0.0) {
        return Err(Error::InvalidInput(format!("log|t|^-1 must be positive (got {log_t_inv})")));
    }
    let rule = GaussRule::new(spec.radial_points);
    refine("integrate_halfannulus", spec, 1e-300, |level| {
        let radial = radial_nodes(&graded_panels(0.0, 0.5 * log_t_inv, level), &rule);
        let angular = angular_nodes(spec.angular_points << level);
        let mut total = 0.0;
        for &(s, ws) in &radial {
            let ring: f64 = angular.iter().map(|&(phi, wp)| wp * density(s, phi)).sum();
            total += ws * ring;
        }
        Ok(total)
    })
}
