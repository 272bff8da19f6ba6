//! Pseudonorms, NS densities and the Hermitian pairing on a chain of node charts.

use std::ops::{AddAssign, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::laurent::{common_shape, ChartPoint, LaurentFamily, Side};
use super::optimizer::{Maximum, NsMaximizer, OptimizerSpec, WeightedSamples};
use super::quadrature::{
    angular_nodes, graded_panels, integrate_halfannulus, uniform_panels, GaussRule, QuadratureSpec,
};
use crate::error::{Error, NonConvergence, Result};

fn check_log_t(log_t_inv: f64) -> Result<()> {
    if !(log_t_inv > 0.0) || !log_t_inv.is_finite() {
        return Err(Error::InvalidInput(format!("log|t|^-1 must be positive and finite (got {log_t_inv})")));
    }
    Ok(())
}

/// ‖Σ λ_i θ_i‖′ over the configured charts (both halves of every node chart).
pub fn pseudonorm(combination: &[(Complex64, LaurentFamily)], log_t_inv: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_log_t(log_t_inv)?;
    let families: Vec<LaurentFamily> = combination.iter().map(|(_, f)| f.clone()).collect();
    let (m, l) = common_shape(&families)?;
    let q = 2.0 / m as f64;
    let mut total = 0.0;
    for side in [Side::W, Side::Z] {
        total += integrate_halfannulus(
            |s, phi| {
                let p = ChartPoint { side, s, phi };
                let v: Complex64 = combination.iter().map(|(c, f)| c * f.value(log_t_inv, p)).sum();
                v.norm_sqr().powf(0.5 * q)
            },
            log_t_inv,
            spec,
        )?;
    }
    Ok((l as f64 * total).powf(m as f64 / 2.0))
}

/// Parameters of an adaptive ring quadrature: radial panels are halved where the two-panel
/// rule disagrees with the one-panel rule by more than the panel's share of the tolerance,
/// then the angular count is doubled until it no longer matters.
struct Refinement<'a> {
    routine: &'a str,
    tolerance: f64,
    spec: &'a QuadratureSpec,
}

impl Refinement<'_> {
    fn run<T, E, S>(&self, initial: &[Panel], zero: &T, eval: &E, size: &S) -> Result<(T, RingGrid)>
    where
        T: Clone + AddAssign + Sub<Output = T>,
        E: Fn(&[Panel], usize) -> Result<Vec<T>>,
        S: Fn(&T) -> f64,
    {
        let mut angular = self.spec.angular_points;
        let mut change = f64::INFINITY;
        for _ in 0..=self.spec.refinement_levels {
            let (value, panels) = self.radial(initial, angular, zero, eval, size)?;
            let finer = sum(zero, eval(&panels, 2 * angular)?);
            change = size(&(finer.clone() - value.clone())) / size(&finer).max(1e-300);
            if change <= self.tolerance {
                return Ok((value, RingGrid { panels, angular }));
            }
            angular *= 2;
        }
        Err(Error::NonConvergence(NonConvergence {
            routine: self.routine.into(),
            achieved: change,
            tolerance: self.tolerance,
            detail: format!("angular resolution still moving at {angular} nodes"),
        }))
    }

    fn radial<T, E, S>(&self, initial: &[Panel], angular: usize, zero: &T, eval: &E, size: &S) -> Result<(T, Vec<Panel>)>
    where
        T: Clone + AddAssign + Sub<Output = T>,
        E: Fn(&[Panel], usize) -> Result<Vec<T>>,
        S: Fn(&T) -> f64,
    {
        let coarse = eval(initial, angular)?;
        let mut active: Vec<(Panel, T)> = initial.iter().copied().zip(coarse).collect();
        let mut accepted: Vec<(Panel, T)> = Vec::new();
        for depth in 0..=self.spec.max_depth {
            if active.is_empty() {
                break;
            }
            let halves: Vec<Panel> = active.iter().flat_map(|(p, _)| p.halves()).collect();
            let values = eval(&halves, angular)?;
            let total = sum(zero, accepted.iter().map(|(_, v)| v.clone()).chain(values.iter().cloned()));
            let scale = size(&total).max(1e-300);
            let mut next = Vec::new();
            let mut worst: f64 = 0.0;
            for (i, (_, estimate)) in active.into_iter().enumerate() {
                let (left, right) = (values[2 * i].clone(), values[2 * i + 1].clone());
                let mut fine = left.clone();
                fine += right.clone();
                let defect = size(&(fine - estimate)) / scale;
                // each initial panel gets an equal share, split evenly between halves
                let allowed = self.tolerance / initial.len() as f64 / (1u64 << depth) as f64;
                let resolved = defect <= allowed;
                if !resolved {
                    worst = worst.max(defect / allowed);
                }
                let target = if resolved || depth == self.spec.max_depth { &mut accepted } else { &mut next };
                target.push((halves[2 * i], left));
                target.push((halves[2 * i + 1], right));
            }
            if depth == self.spec.max_depth && worst > 0.0 {
                return Err(Error::NonConvergence(NonConvergence {
                    routine: self.routine.into(),
                    achieved: worst * self.tolerance,
                    tolerance: self.tolerance,
                    detail: format!("radial panels still unresolved after {} halvings", self.spec.max_depth),
                }));
            }
            active = next;
        }
        accepted.sort_by(|a, b| (a.0.side, a.0.lo).partial_cmp(&(b.0.side, b.0.lo)).expect("finite panels"));
        let total = sum(zero, accepted.iter().map(|(_, v)| v.clone()));
        Ok((total, accepted.into_iter().map(|(p, _)| p).collect()))
    }
}

fn sum<T: Clone + AddAssign>(zero: &T, parts: impl IntoIterator<Item = T>) -> T {
    let mut total = zero.clone();
    for part in parts {
        total += part;
    }
    total
}

/// Both halves of a chart in graded panels.
fn chart_panels(log_t_inv: f64) -> Vec<Panel> {
    [Side::W, Side::Z]
        .into_iter()
        .flat_map(|side| graded_panels(0.0, 0.5 * log_t_inv, 0).into_iter().map(move |(lo, hi)| Panel { side, lo, hi }))
        .collect()
}

/// Nodes (point, weight) of a ring grid, panel by panel.
fn grid_nodes(panels: &[Panel], angular: usize, spec: &QuadratureSpec) -> Vec<Vec<(ChartPoint, f64)>> {
    let rule = GaussRule::new(spec.radial_points);
    let angles = angular_nodes(angular);
    panels
        .iter()
        .map(|panel| {
            let mut radial = Vec::with_capacity(rule.nodes.len());
            rule.push_mapped(panel.lo, panel.hi, &mut radial);
            radial
                .iter()
                .flat_map(|&(s, ws)| {
                    angles.iter().map(move |&(phi, wp)| (ChartPoint { side: panel.side, s, phi }, ws * wp))
                })
                .collect()
        })
        .collect()
}

/// The families on a chain of node charts, with a quadrature grid that resolves the basis
/// pseudonorms to the quadrature tolerance.
pub struct ChartSystem {
    pub families: Vec<LaurentFamily>,
    pub log_t_inv: f64,
    pub m: u32,
    pub chain_length: u32,
    /// Grid on which the basis pseudonorms are resolved to the quadrature tolerance.
    pub basis_grid: RingGrid,
    grid: WeightedSamples,
    maximizer: NsMaximizer,
    spec: QuadratureSpec,
    optimizer: OptimizerSpec,
}

impl ChartSystem {
    pub fn new(
        families: &[LaurentFamily],
        log_t_inv: f64,
        spec: &QuadratureSpec,
        optimizer: &OptimizerSpec,
    ) -> Result<Self> {
        check_log_t(log_t_inv)?;
        spec.check()?;
        let (m, l) = common_shape(families)?;
        let q = 2.0 / m as f64;
        let values = |p: ChartPoint| -> Vec<Complex64> { families.iter().map(|f| f.value(log_t_inv, p)).collect() };
        // basis pseudonorms on a coarse grid set the relative scale of each family
        let coarse = grid_nodes(&chart_panels(log_t_inv), spec.angular_points, spec);
        let mut scale = vec![0.0; families.len()];
        for &(p, w) in coarse.iter().flatten() {
            for (acc, v) in scale.iter_mut().zip(values(p)) {
                *acc += w * v.norm_sqr().powf(0.5 * q);
            }
        }
        if scale.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::InvalidInput("a family vanishes identically on the charts".into()));
        }
        let eval = |panels: &[Panel], angular: usize| -> Result<Vec<DVector<f64>>> {
            Ok(grid_nodes(panels, angular, spec)
                .iter()
                .map(|nodes| {
                    let mut acc = DVector::zeros(families.len());
                    for &(p, w) in nodes {
                        for (j, v) in values(p).into_iter().enumerate() {
                            acc[j] += w * v.norm_sqr().powf(0.5 * q) / scale[j];
                        }
                    }
                    acc
                })
                .collect())
        };
        let refinement = Refinement { routine: "chart grid", tolerance: spec.tolerance, spec };
        let zero = DVector::zeros(families.len());
        let (_, basis_grid) = refinement.run(&chart_panels(log_t_inv), &zero, &eval, &|v: &DVector<f64>| v.amax())?;
        let mut grid = WeightedSamples::new(families.len(), q);
        for &(p, w) in grid_nodes(&basis_grid.panels, basis_grid.angular, spec).iter().flatten() {
            grid.push(l as f64 * w, &values(p));
        }
        let maximizer = NsMaximizer::new(&grid, optimizer)?;
        Ok(ChartSystem {
            families: families.to_vec(),
            log_t_inv,
            m,
            chain_length: l,
            basis_grid,
            grid,
            maximizer,
            spec: spec.clone(),
            optimizer: optimizer.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.families.len()
    }

    /// Number of weighted samples behind the pseudonorm of a combination.
    pub fn sample_count(&self) -> usize {
        self.grid.len()
    }

    pub fn values_at(&self, p: ChartPoint) -> Vec<Complex64> {
        self.families.iter().map(|f| f.value(self.log_t_inv, p)).collect()
    }

    /// Σ over all charts of ∫|θ_c|^{2/m}, on the accepted grid.
    pub fn integral(&self, c: &[Complex64]) -> f64 {
        self.grid.integral(c)
    }

    /// NS density at `p` relative to ds dφ (that is, |w|² times the area density).
    pub fn density(&self, p: ChartPoint, warm: Option<&[Complex64]>) -> Result<Maximum> {
        self.maximizer.maximize(&self.values_at(p), warm)
    }

    /// Whether every section is so small here that τ underflows; the integrands are
    /// O(|θ|^{2/m}) and such points contribute nothing.
    fn negligible(&self, values: &[Complex64]) -> bool {
        let top = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        top.powf(2.0 / self.m as f64) < 1e-290
    }

    /// Per-panel integrals of `integrand(point, values, τ̂, weight)` with `angular` nodes per
    /// ring. Panels run in parallel; the optimizer is warm-started along each panel.
    fn panel_values<T, F>(&self, panels: &[Panel], angular: usize, zero: &T, integrand: &F) -> Result<Vec<T>>
    where
        T: Send + Sync + Clone + AddAssign,
        F: Fn(ChartPoint, &[Complex64], f64, f64) -> T + Sync,
    {
        grid_nodes(panels, angular, &self.spec)
            .par_iter()
            .map(|nodes| {
                let mut acc = zero.clone();
                let mut warm: Option<Vec<Complex64>> = None;
                for &(p, w) in nodes {
                    let values = self.values_at(p);
                    if self.negligible(&values) {
                        continue;
                    }
                    let best = self.maximizer.maximize(&values, warm.as_deref()).map_err(|e| match e {
                        Error::NonConvergence(mut nc) => {
                            nc.detail = format!("{} at {:?} side s = {}, φ = {}", nc.detail, p.side, p.s, p.phi);
                            Error::NonConvergence(nc)
                        }
                        e => e,
                    })?;
                    if !(best.value > 0.0) {
                        return Err(Error::Internal(format!("NS density vanished at {p:?}")));
                    }
                    acc += integrand(p, &values, best.value, w);
                    warm = Some(best.coefficients);
                }
                Ok(acc)
            })
            .collect()
    }

    /// Adaptive integral of `integrand(point, values, τ̂, weight)` to the density tolerance.
    fn adaptive<T, F, S>(&self, routine: &str, initial: Vec<Panel>, zero: T, integrand: F, size: S) -> Result<(T, RingGrid)>
    where
        T: Send + Sync + Clone + AddAssign + Sub<Output = T>,
        F: Fn(ChartPoint, &[Complex64], f64, f64) -> T + Sync,
        S: Fn(&T) -> f64,
    {
        let refinement = Refinement { routine, tolerance: self.density_tolerance(), spec: &self.spec };
        refinement.run(&initial, &zero, &|panels, angular| self.panel_values(panels, angular, &zero, &integrand), &size)
    }

    /// Accuracy of integrals that involve the optimized density.
    pub fn density_tolerance(&self) -> f64 {
        self.spec.density_tolerance.max(100.0 * self.optimizer.tolerance)
    }

    /// Total NS mass over all charts; equals the dimension of the span in the limit.
    pub fn ns_total_mass(&self) -> Result<f64> {
        let l = self.chain_length as f64;
        let (total, _) = self.adaptive("ns_total_mass", chart_panels(self.log_t_inv), 0.0, |_, _, tau, w| l * w * tau, |x| x.abs())?;
        Ok(total)
    }

    /// Region mass ∫∫ f(s/L) τ̂ ds dφ over s ∈ [αL, βL] on the w side of one chart.
    pub fn region_mass(&self, alpha: f64, beta: f64, f: &(dyn Fn(f64) -> f64 + Sync)) -> Result<f64> {
        if !(0.0 < alpha && alpha < beta && beta < 0.5) {
            return Err(Error::InvalidInput(format!("region [{alpha}, {beta}] must satisfy 0 < a < b < 1/2")));
        }
        let l = self.log_t_inv;
        let initial = uniform_panels(alpha * l, beta * l, 4, 0)
            .into_iter()
            .map(|(lo, hi)| Panel { side: Side::W, lo, hi })
            .collect();
        let (total, _) =
            self.adaptive("region_mass", initial, 0.0, |p, _, tau, w| w * tau * f(p.s / l), |x| x.abs())?;
        Ok(total)
    }

    /// A_jk = Σ over charts of ∫ θ_j θ̄_k / τ^{m−1}, on an adaptively refined grid.
    pub fn pairing(&self) -> Result<PairingMatrix> {
        let dim = self.dim();
        let m = self.m;
        let l = self.chain_length as f64;
        let (matrix, grid) = self.adaptive(
            "pairing_matrix",
            chart_panels(self.log_t_inv),
            DMatrix::<Complex64>::zeros(dim, dim),
            |_, values, tau, w| {
                let factor = l * w / tau.powi(m as i32 - 1);
                DMatrix::from_fn(dim, dim, |j, k| factor * values[j] * values[k].conj())
            },
            |a| a.norm(),
        )?;
        PairingMatrix::new(matrix, self.log_t_inv, grid)
    }

    /// Pluri-Bergman density at `p` relative to ds dφ.
    pub fn pb_density(&self, pairing: &PairingMatrix, p: ChartPoint) -> Result<f64> {
        let values = self.values_at(p);
        if self.negligible(&values) {
            return Ok(0.0);
        }
        let tau = self.density(p, None)?.value;
        if !(tau > 0.0) {
            return Err(Error::Internal(format!("NS density vanished at {p:?}")));
        }
        Ok(pairing.quadratic_form(&values) / tau.powi(self.m as i32 - 1))
    }

    /// ∫ of the pluri-Bergman density over all charts, on the grid the pairing used.
    pub fn pb_total_mass(&self, pairing: &PairingMatrix) -> Result<f64> {
        let l = self.chain_length as f64;
        let m = self.m;
        let parts = self.panel_values(&pairing.grid.panels, pairing.grid.angular, &0.0, &|_, values: &[Complex64], tau: f64, w| {
            l * w * pairing.quadratic_form(values) / tau.powi(m as i32 - 1)
        })?;
        Ok(parts.into_iter().sum())
    }
}

/// A radial panel of one half of a chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Panel {
    pub side: Side,
    pub lo: f64,
    pub hi: f64,
}

impl Panel {
    fn halves(&self) -> [Panel; 2] {
        let mid = 0.5 * (self.lo + self.hi);
        [Panel { hi: mid, ..*self }, Panel { lo: mid, ..*self }]
    }
}

/// Radial panels and the angular node count of an adaptive density quadrature.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingGrid {
    pub panels: Vec<Panel>,
    pub angular: usize,
}

impl RingGrid {
    pub fn node_count(&self, radial_points: usize) -> usize {
        self.panels.len() * radial_points * self.angular
    }
}

/// The Hermitian matrix of pairings ⟨θ_j, θ_k⟩.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingMatrix {
    pub log_t_inv: f64,
    pub grid: RingGrid,
    pub entries: Vec<Vec<Complex64>>,
    #[serde(skip)]
    inverse_conj: DMatrix<Complex64>,
}

impl PairingMatrix {
    fn new(matrix: DMatrix<Complex64>, log_t_inv: f64, grid: RingGrid) -> Result<Self> {
        let dim = matrix.nrows();
        let conj = matrix.map(|z| z.conj());
        let inverse_conj = conj.try_inverse().ok_or_else(|| Error::InvalidInput("pairing matrix is singular".into()))?;
        let entries = (0..dim).map(|j| (0..dim).map(|k| matrix[(j, k)]).collect()).collect();
        Ok(PairingMatrix { log_t_inv, grid, entries, inverse_conj })
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j][k]
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// max |A − A*| relative to the largest entry.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let scale = self.entries.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((self.entries[j][k] - self.entries[k][j].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn is_positive_definite(&self) -> bool {
        let n = self.dim();
        let sym = DMatrix::from_fn(n, n, |j, k| 0.5 * (self.entries[j][k] + self.entries[k][j].conj()));
        sym.cholesky().is_some()
    }

    /// |A_jk| / √(A_jj A_kk).
    pub fn normalized(&self, j: usize, k: usize) -> f64 {
        self.get(j, k).norm() / (self.get(j, j).re * self.get(k, k).re).sqrt()
    }

    /// Σ_jk (Ā⁻¹)_jk v_j v̄_k.
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut total = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                total += self.inverse_conj[(j, k)] * v[j] * v[k].conj();
            }
        }
        total.re
    }
}

/// NS density of the span of `families` at a chart point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsDensity {
    /// Density with respect to ds dφ, i.e. |w|² times the area density.
    pub scaled: f64,
    pub coefficients: Vec<Complex64>,
}

pub fn ns_density(
    families: &[LaurentFamily],
    log_t_inv: f64,
    point: ChartPoint,
    spec: &QuadratureSpec,
    optimizer: &OptimizerSpec,
) -> Result<NsDensity> {
    let system = ChartSystem::new(families, log_t_inv, spec, optimizer)?;
    let best = system.density(point, None)?;
    Ok(NsDensity { scaled: best.value, coefficients: best.coefficients })
}

pub fn pairing_matrix(
    families: &[LaurentFamily],
    log_t_inv: f64,
    spec: &QuadratureSpec,
    optimizer: &OptimizerSpec,
) -> Result<PairingMatrix> {
    ChartSystem::new(families, log_t_inv, spec, optimizer)?.pairing()
}

pub fn pb_density(
    families: &[LaurentFamily],
    log_t_inv: f64,
    point: ChartPoint,
    spec: &QuadratureSpec,
    optimizer: &OptimizerSpec,
) -> Result<f64> {
    let system = ChartSystem::new(families, log_t_inv, spec, optimizer)?;
    let pairing = system.pairing()?;
    system.pb_density(&pairing, point)
}

/// s-range of the neck region {|t|^{1/2} < |w| < (log|t|⁻¹)^{−k}} where the density is
/// expected to be close to 1/(2πlL) per ds dφ; `k` defaults to m.
pub fn neck_region(log_t_inv: f64, m: u32, exponent: Option<f64>) -> (f64, f64) {
    let k = exponent.unwrap_or(m as f64);
    ((k * log_t_inv.ln()).min(0.5 * log_t_inv), 0.5 * log_t_inv)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn pure_pole_pseudonorm() {
        for (m, l) in [(2u32, 10.0), (3, 100.0), (2, 1e3)] {
            let f = LaurentFamily::monomial(m, m).unwrap();
            let v = pseudonorm(&[(Complex64::new(1.0, 0.0), f)], l, &spec()).unwrap();
            let exact = (2.0 * PI * l).powf(m as f64 / 2.0);
            assert!((v / exact - 1.0).abs() < 1e-6, "m={m} L={l}: {v} vs {exact}");
        }
    }

    #[test]
    fn pseudonorm_is_homogeneous() {
        let f = LaurentFamily::perturbed_pole(3, 0.3).unwrap();
        let base = pseudonorm(&[(Complex64::new(1.0, 0.0), f.clone())], 50.0, &spec()).unwrap();
        let lambda = Complex64::new(-1.5, 2.0);
        let scaled = pseudonorm(&[(lambda, f)], 50.0, &spec()).unwrap();
        assert!((scaled / (lambda.norm() * base) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_family_density_has_unit_mass() {
        let f = LaurentFamily::perturbed_pole(2, 0.3).unwrap();
        let system = ChartSystem::new(&[f], 30.0, &spec(), &OptimizerSpec::default()).unwrap();
        let total = system.ns_total_mass().unwrap();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn density_in_the_neck_matches_the_cylinder() {
        let fams = [LaurentFamily::monomial(2, 2).unwrap(), LaurentFamily::monomial(2, 1).unwrap()];
        let l: f64 = 1e3;
        let s = 3.0 * l.ln();
        let d = ns_density(&fams, l, ChartPoint::w(s, 0.4), &spec(), &OptimizerSpec::default()).unwrap();
        let ratio = d.scaled * 2.0 * PI * l;
        assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn density_is_invariant_under_rescaling_families() {
        let fams = vec![LaurentFamily::perturbed_pole(2, 0.3).unwrap(), LaurentFamily::monomial(2, 1).unwrap()];
        let scaled =
            vec![fams[0].scaled(Complex64::new(0.0, 3.0)).unwrap(), fams[1].scaled(Complex64::new(0.25, 0.0)).unwrap()];
        let p = ChartPoint::w(1.3, 2.0);
        let a = ns_density(&fams, 40.0, p, &spec(), &OptimizerSpec::default()).unwrap();
        let b = ns_density(&scaled, 40.0, p, &spec(), &OptimizerSpec::default()).unwrap();
        assert!((a.scaled / b.scaled - 1.0).abs() < 1e-7);
    }

    #[test]
    fn tiny_sections_keep_a_positive_density() {
        // |θ|² of both families is below the smallest double at this point
        let fams = [LaurentFamily::monomial(2, 0).unwrap(), LaurentFamily::monomial(2, 1).unwrap()];
        let system = ChartSystem::new(&fams, 1e3, &spec(), &OptimizerSpec::default()).unwrap();
        let d = system.density(ChartPoint::w(428.6, 0.0), None).unwrap().value;
        let expected = (-428.6f64).exp() / system.integral(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!((d / expected - 1.0).abs() < 1e-9, "{d} vs {expected}");
    }

    #[test]
    fn one_dimensional_pairing_closed_form() {
        let f = LaurentFamily::perturbed_pole(2, 0.3).unwrap();
        let l = 20.0;
        let a = pairing_matrix(&[f.clone()], l, &spec(), &OptimizerSpec::default()).unwrap();
        let norm = pseudonorm(&[(Complex64::new(1.0, 0.0), f)], l, &spec()).unwrap();
        // for m = 2 the integral of |θ| over the charts is the pseudonorm itself
        let expected = norm * norm;
        assert!((a.get(0, 0).re / expected - 1.0).abs() < 1e-6, "{} vs {expected}", a.get(0, 0).re);
    }

    #[test]
    fn pairing_is_hermitian_positive_with_trace_identity() {
        let fams = [LaurentFamily::perturbed_pole(2, 0.3).unwrap(), LaurentFamily::monomial(2, 1).unwrap()];
        let system = ChartSystem::new(&fams, 30.0, &spec(), &OptimizerSpec::default()).unwrap();
        let a = system.pairing().unwrap();
        assert!(a.hermitian_defect() < 1e-12);
        assert!(a.is_positive_definite());
        let total = system.pb_total_mass(&a).unwrap();
        assert!((total - 2.0).abs() < 1e-9, "{total}");
        for s in [0.5, 3.0, 10.0] {
            assert!(system.pb_density(&a, ChartPoint::w(s, 1.0)).unwrap() >= 0.0);
        }
    }
}
