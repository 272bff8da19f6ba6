//! Maximization of |⟨c, a⟩|^q / I(c) over coefficient vectors c, where
//! I(c) = Σ_p w_p |⟨c, g_p⟩|^q is a quadrature of |θ_c|^{2/m}.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, NonConvergence, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerSpec {
    pub seed: u64,
    /// Random starting points on the coefficient sphere, shared by all evaluation points.
    pub random_starts: usize,
    /// Number of best starts refined by local ascent.
    pub polish: usize,
    pub max_iterations: usize,
    /// Accepted change of log of the objective between iterations.
    pub tolerance: f64,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec { seed: 0, random_starts: 24, polish: 1, max_iterations: 2000, tolerance: 1e-8 }
    }
}

impl OptimizerSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Weighted samples g_p ∈ ℂ^M of the basis sections, stored point-major.
#[derive(Clone, Debug)]
pub struct WeightedSamples {
    pub dim: usize,
    pub q: f64,
    pub weights: Vec<f64>,
    pub values: Vec<Complex64>,
}

#[inline]
fn dot(c: &[Complex64], g: &[Complex64]) -> Complex64 {
    c.iter().zip(g).map(|(a, b)| a * b).sum()
}

#[inline]
fn pow_q(norm_sqr: f64, q: f64) -> f64 {
    if q == 1.0 {
        norm_sqr.sqrt()
    } else {
        norm_sqr.powf(0.5 * q)
    }
}

impl WeightedSamples {
    pub fn new(dim: usize, q: f64) -> Self {
        WeightedSamples { dim, q, weights: Vec::new(), values: Vec::new() }
    }

    pub fn push(&mut self, weight: f64, values: &[Complex64]) {
        debug_assert_eq!(values.len(), self.dim);
        self.weights.push(weight);
        self.values.extend_from_slice(values);
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, p: usize) -> &[Complex64] {
        &self.values[p * self.dim..(p + 1) * self.dim]
    }

    pub fn integral(&self, c: &[Complex64]) -> f64 {
        let mut total = 0.0;
        for (p, w) in self.weights.iter().enumerate() {
            total += w * pow_q(dot(c, self.point(p)).norm_sqr(), self.q);
        }
        total
    }

    /// I(c) and 2∂I/∂c̄.
    fn integral_with_gradient(&self, c: &[Complex64], grad: &mut [Complex64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        let mut total = 0.0;
        for (p, w) in self.weights.iter().enumerate() {
            let g = self.point(p);
            let h = dot(c, g);
            let n2 = h.norm_sqr();
            if n2 == 0.0 {
                continue;
            }
            let val = pow_q(n2, self.q);
            total += w * val;
            let factor = w * self.q * val / n2;
            for (gj, v) in grad.iter_mut().zip(g) {
                *gj += factor * h * v.conj();
            }
        }
        total
    }

    fn scaled(&self, scale: &[f64]) -> WeightedSamples {
        let mut values = self.values.clone();
        for chunk in values.chunks_mut(self.dim) {
            for (v, s) in chunk.iter_mut().zip(scale) {
                *v *= *s;
            }
        }
        WeightedSamples { dim: self.dim, q: self.q, weights: self.weights.clone(), values }
    }
}

/// 1 − |⟨x, y⟩|² / (|x|²|y|²), zero iff x and y are proportional.
fn projective_distance(x: &[Complex64], y: &[Complex64]) -> f64 {
    let xy: Complex64 = x.iter().zip(y).map(|(a, b)| a * b.conj()).sum();
    let xx: f64 = x.iter().map(|a| a.norm_sqr()).sum();
    let yy: f64 = y.iter().map(|a| a.norm_sqr()).sum();
    (1.0 - xy.norm_sqr() / (xx * yy)).max(0.0)
}

/// Result of one maximization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Maximum {
    pub value: f64,
    /// Maximizing coefficients in the caller's basis, normalized to unit length.
    pub coefficients: Vec<Complex64>,
    pub converged: bool,
}

pub struct NsMaximizer {
    samples: WeightedSamples,
    scale: Vec<f64>,
    starts: Vec<(Vec<Complex64>, f64)>,
    spec: OptimizerSpec,
}

fn normalize(c: &mut [Complex64]) {
    let n = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        c.iter_mut().for_each(|x| *x /= n);
    }
}

impl NsMaximizer {
    /// Prepares the maximizer; fails if some basis section integrates to zero.
    pub fn new(samples: &WeightedSamples, spec: &OptimizerSpec) -> Result<Self> {
        let dim = samples.dim;
        if dim == 0 {
            return Err(Error::InvalidInput("empty basis".into()));
        }
        let mut scale = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut e = vec![Complex64::new(0.0, 0.0); dim];
            e[j] = Complex64::new(1.0, 0.0);
            let i = samples.integral(&e);
            if !(i > 0.0) || !i.is_finite() {
                return Err(Error::InvalidInput(format!("basis section {j} has zero or non-finite norm")));
            }
            scale.push(i.powf(-1.0 / samples.q));
        }
        let scaled = samples.scaled(&scale);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut starts = Vec::new();
        for j in 0..dim {
            let mut e = vec![Complex64::new(0.0, 0.0); dim];
            e[j] = Complex64::new(1.0, 0.0);
            starts.push(e);
        }
        if dim > 1 {
            for _ in 0..spec.random_starts {
                let mut c: Vec<Complex64> = (0..dim)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect();
                normalize(&mut c);
                starts.push(c);
            }
        }
        let starts = starts
            .into_iter()
            .map(|c| {
                let i = scaled.integral(&c);
                (c, i)
            })
            .filter(|(_, i)| *i > 0.0)
            .collect();
        Ok(NsMaximizer { samples: scaled, scale, starts, spec: spec.clone() })
    }

    pub fn dim(&self) -> usize {
        self.samples.dim
    }

    /// Scaled integral I(c) for coefficients in the caller's basis.
    pub fn integral(&self, c: &[Complex64]) -> f64 {
        let internal: Vec<Complex64> = c.iter().zip(&self.scale).map(|(x, s)| x / s).collect();
        self.samples.integral(&internal)
    }

    /// max_c |⟨c, a⟩|^q / I(c), with an optional starting guess in the caller's basis.
    pub fn maximize(&self, a: &[Complex64], warm: Option<&[Complex64]>) -> Result<Maximum> {
        let dim = self.dim();
        let q = self.samples.q;
        let a_hat: Vec<Complex64> = a.iter().zip(&self.scale).map(|(x, s)| x * s).collect();
        if dim == 1 {
            let value = pow_q(a_hat[0].norm_sqr(), q) / self.starts[0].1;
            return Ok(Maximum { value, coefficients: vec![Complex64::new(1.0, 0.0)], converged: true });
        }
        // the objective is homogeneous of degree q in `a`; rescale so that |a|² cannot underflow
        let top = a_hat.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if !(top > 0.0) {
            let mut out: Vec<Complex64> = self.starts[0].0.iter().zip(&self.scale).map(|(x, s)| x * s).collect();
            normalize(&mut out);
            return Ok(Maximum { value: 0.0, coefficients: out, converged: true });
        }
        let factor = top.powf(q);
        let a_hat: Vec<Complex64> = a_hat.iter().map(|x| x / top).collect();
        let mut candidates: Vec<(f64, Vec<Complex64>)> = self
            .starts
            .iter()
            .map(|(c, i)| (pow_q(dot(c, &a_hat).norm_sqr(), q) / i, c.clone()))
            .collect();
        if let Some(w) = warm {
            let mut c: Vec<Complex64> = w.iter().zip(&self.scale).map(|(x, s)| x / s).collect();
            normalize(&mut c);
            let i = self.samples.integral(&c);
            if i > 0.0 {
                candidates.push((pow_q(dot(&c, &a_hat).norm_sqr(), q) / i, c));
            }
        }
        candidates.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut best: Option<(f64, Vec<Complex64>, bool)> = None;
        let mut any_converged = false;
        let mut polished: Vec<Vec<Complex64>> = Vec::new();
        for (value0, start) in &candidates {
            if polished.len() >= self.spec.polish.max(1) {
                break;
            }
            if *value0 <= 0.0 {
                continue;
            }
            if polished.iter().any(|p| projective_distance(p, start) < 1e-6) {
                continue;
            }
            polished.push(start.clone());
            let found: Vec<&[Complex64]> = best.iter().map(|b| b.1.as_slice()).collect();
            let (value, c, converged) = self.ascend(&a_hat, start, &found);
            any_converged |= converged;
            if best.as_ref().is_none_or(|b| value > b.0) {
                best = Some((value, c, converged));
            }
        }
        let Some((value, c, _)) = best else {
            // the section values vanish at this point
            return Ok(Maximum { value: 0.0, coefficients: candidates[0].1.clone(), converged: true });
        };
        if !any_converged {
            return Err(Error::NonConvergence(NonConvergence {
                routine: "ns_density".into(),
                achieved: value * factor,
                tolerance: self.spec.tolerance,
                detail: format!("local ascent stagnated from every start; best value {:e}", value * factor),
            }));
        }
        let mut out: Vec<Complex64> = c.iter().zip(&self.scale).map(|(x, s)| x * s).collect();
        normalize(&mut out);
        Ok(Maximum { value: value * factor, coefficients: out, converged: true })
    }

    /// Quasi-Newton ascent of log F in the affine chart c_k = 1, k the largest entry.
    /// Stops early once the iterate is projectively close to one of `found`.
    fn ascend(&self, a: &[Complex64], start: &[Complex64], found: &[&[Complex64]]) -> (f64, Vec<Complex64>, bool) {
        let dim = self.dim();
        let n = 2 * (dim - 1);
        let mut c = start.to_vec();
        let mut grad_c = vec![Complex64::new(0.0, 0.0); dim];
        let mut iterations = 0;
        let mut last_gain = f64::INFINITY;
        'restart: loop {
            let k = (0..dim)
                .max_by(|&i, &j| c[i].norm_sqr().partial_cmp(&c[j].norm_sqr()).expect("finite"))
                .expect("nonempty");
            let pivot = c[k];
            c.iter_mut().for_each(|x| *x /= pivot);
            let others: Vec<usize> = (0..dim).filter(|&j| j != k).collect();
            let to_x = |c: &[Complex64]| -> Vec<f64> { others.iter().flat_map(|&j| [c[j].re, c[j].im]).collect() };
            let from_x = |x: &[f64]| -> Vec<Complex64> {
                let mut c = vec![Complex64::new(0.0, 0.0); dim];
                c[k] = Complex64::new(1.0, 0.0);
                for (i, &j) in others.iter().enumerate() {
                    c[j] = Complex64::new(x[2 * i], x[2 * i + 1]);
                }
                c
            };
            // negative log objective and its gradient in the chart
            let eval = |x: &[f64], grad_c: &mut [Complex64]| -> (f64, Vec<f64>) {
                let c = from_x(x);
                let s = dot(&c, a);
                let i = self.samples.integral_with_gradient(&c, grad_c);
                if s.norm_sqr() == 0.0 || !(i > 0.0) {
                    return (f64::INFINITY, vec![0.0; n]);
                }
                let f = -(0.5 * self.samples.q * s.norm_sqr().ln() - i.ln());
                let mut g = Vec::with_capacity(n);
                for &j in &others {
                    let d = self.samples.q * a[j].conj() / s.conj() - grad_c[j] / i;
                    g.push(-d.re);
                    g.push(-d.im);
                }
                (f, g)
            };
            let mut x = to_x(&c);
            let (mut f, mut g) = eval(&x, &mut grad_c);
            if !f.is_finite() {
                return (0.0, c, false);
            }
            let mut h = vec![vec![0.0; n]; n];
            for (i, row) in h.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            while iterations < self.spec.max_iterations {
                if iterations > 0 && found.iter().any(|y| projective_distance(&from_x(&x), y) < 1e-8) {
                    last_gain = 0.0;
                    break;
                }
                iterations += 1;
                let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if gnorm < 1e-12 {
                    last_gain = 0.0;
                    break;
                }
                let mut d: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| h[i][j] * g[j]).sum::<f64>()).collect();
                let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
                if slope >= 0.0 {
                    for (i, row) in h.iter_mut().enumerate() {
                        row.iter_mut().for_each(|v| *v = 0.0);
                        row[i] = 1.0;
                    }
                    d = g.iter().map(|v| -v).collect();
                    slope = -gnorm * gnorm;
                }
                if -slope < 1e-2 * self.spec.tolerance {
                    last_gain = 0.0;
                    break;
                }
                let try_step = |step: f64, grad_c: &mut [Complex64]| {
                    let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                    let (fnew, gnew) = eval(&xn, grad_c);
                    (fnew.is_finite() && fnew <= f + 1e-4 * step * slope).then_some((xn, fnew, gnew))
                };
                let mut accepted = try_step(1.0, &mut grad_c);
                if accepted.is_none() {
                    // a failed probe at a tiny step means x sits on a kink that is a local
                    // maximum along d
                    let dnorm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let tiny = 1e-7 / dnorm.max(1e-300);
                    if tiny < 1.0 && try_step(tiny, &mut grad_c).is_none() {
                        last_gain = 0.0;
                        break;
                    }
                    let mut step = 0.5;
                    while accepted.is_none() && step > tiny {
                        accepted = try_step(step, &mut grad_c);
                        step *= 0.5;
                    }
                }
                let Some((xn, fnew, gnew)) = accepted else {
                    last_gain = 0.0;
                    break;
                };
                last_gain = f - fnew;
                let sv: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let yv: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy: f64 = sv.iter().zip(&yv).map(|(a, b)| a * b).sum();
                if sy > 1e-300 {
                    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i][j] * yv[j]).sum()).collect();
                    let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
                    for i in 0..n {
                        for j in 0..n {
                            h[i][j] += ((sy + yhy) * sv[i] * sv[j]) / (sy * sy) - (hy[i] * sv[j] + sv[i] * hy[j]) / sy;
                        }
                    }
                }
                x = xn;
                f = fnew;
                g = gnew;
                let big = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                if last_gain < self.spec.tolerance {
                    break;
                }
                if big > 1e3 {
                    c = from_x(&x);
                    normalize(&mut c);
                    continue 'restart;
                }
            }
            let mut out = from_x(&x);
            normalize(&mut out);
            return ((-f).exp(), out, last_gain < self.spec.tolerance);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_samples() -> WeightedSamples {
        // two "sections" on a ring of points: 1 and e^{iφ}·r, weights uniform
        let mut s = WeightedSamples::new(2, 1.0);
        for k in 0..64 {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            for r in [0.2, 0.5, 0.9] {
                s.push(0.1, &[Complex64::new(1.0, 0.0), Complex64::from_polar(r, phi)]);
            }
        }
        s
    }

    fn brute_force(s: &WeightedSamples, a: &[Complex64]) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..=200 {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / 200.0;
            for k in 0..64 {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                let c = [Complex64::new(theta.cos(), 0.0), Complex64::from_polar(theta.sin(), phi)];
                let v = dot(&c, a).norm() / s.integral(&c);
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn matches_dense_sphere_search() {
        let s = toy_samples();
        let opt = NsMaximizer::new(&s, &OptimizerSpec::default()).unwrap();
        for a in [
            [Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.4)],
            [Complex64::new(0.2, 0.0), Complex64::new(0.0, 1.5)],
        ] {
            let got = opt.maximize(&a, None).unwrap();
            let dense = brute_force(&s, &a);
            assert!(got.value >= dense * (1.0 - 1e-9), "{} < {}", got.value, dense);
            assert!(got.value <= dense * (1.0 + 1e-2));
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let s = toy_samples();
        let a = [Complex64::new(1.0, 0.2), Complex64::new(-0.3, 0.4)];
        let x = NsMaximizer::new(&s, &OptimizerSpec::default().with_seed(7)).unwrap().maximize(&a, None).unwrap();
        let y = NsMaximizer::new(&s, &OptimizerSpec::default().with_seed(7)).unwrap().maximize(&a, None).unwrap();
        assert_eq!(x, y);
    }
}
