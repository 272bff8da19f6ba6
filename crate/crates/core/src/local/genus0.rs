//! Total NS mass of (ℙ¹, Σ a_i p_i) by quadrature on the round sphere.

use num_complex::Complex64;
use serde::Serialize;

use super::optimizer::{NsMaximizer, OptimizerSpec, WeightedSamples};
use super::quadrature::{graded_panels, GaussRule};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphereSpec {
    /// Gauss-Legendre nodes per panel of the log-radial variable in each cap.
    pub cap_radial: usize,
    pub cap_angular: usize,
    /// Gauss-Legendre nodes in cos θ for the part away from the caps.
    pub polar: usize,
    pub azimuthal: usize,
    /// Chordal distance below which points count as nearly coincident.
    pub coincidence: f64,
}

impl Default for SphereSpec {
    fn default() -> Self {
        SphereSpec { cap_radial: 8, cap_angular: 12, polar: 16, azimuthal: 32, coincidence: 1e-3 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Genus0Options {
    pub sphere: SphereSpec,
    pub optimizer: OptimizerSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Genus0Mass {
    pub mass: f64,
    pub error: f64,
    pub sections: usize,
    pub warnings: Vec<String>,
}

type Vec3 = [f64; 3];

fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn unit(a: Vec3) -> Vec3 {
    let n = dot3(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Inverse stereographic projection from the north pole.
fn to_sphere(w: Complex64) -> Vec3 {
    let r2 = w.norm_sqr();
    [2.0 * w.re / (1.0 + r2), 2.0 * w.im / (1.0 + r2), (r2 - 1.0) / (1.0 + r2)]
}

/// Smooth cutoff: 1 on [0, 1/2], 0 on [1, ∞).
fn bump(x: f64) -> f64 {
    if x <= 0.5 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let y = (1.0 - x) / 0.5;
    let f = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    f(y) / (f(y) + f(1.0 - y))
}

struct Configuration {
    points: Vec<(Complex64, u32)>,
    m: u32,
    d: usize,
    centers: Vec<Vec3>,
    radii: Vec<f64>,
}

impl Configuration {
    /// Basis values at a sphere point, times the area factor to the power m/2, so that
    /// |⟨c, g⟩|^{2/m} is the density of |θ_c|^{2/m} against the round area.
    fn values(&self, x: Vec3, out: &mut Vec<Complex64>) {
        out.clear();
        let exponent = self.m as f64 / 2.0;
        if x[2] <= 0.0 {
            let w = Complex64::new(x[0], x[1]) / (1.0 - x[2]);
            let mut common = Complex64::new(1.0, 0.0);
            for &(p, a) in &self.points {
                common /= (w - p).powu(a);
            }
            let jac = ((1.0 + w.norm_sqr()).powi(2) / 4.0).powf(exponent);
            let mut wk = Complex64::new(1.0, 0.0);
            for _ in 0..=self.d {
                out.push(common * wk * jac);
                wk *= w;
            }
        } else {
            let v = Complex64::new(x[0], -x[1]) / (1.0 + x[2]);
            let mut common = Complex64::new(1.0, 0.0);
            for &(p, a) in &self.points {
                common /= (Complex64::new(1.0, 0.0) - p * v).powu(a);
            }
            let jac = ((1.0 + v.norm_sqr()).powi(2) / 4.0).powf(exponent);
            for k in 0..=self.d {
                out.push(common * v.powu((self.d - k) as u32) * jac);
            }
        }
    }

    /// Quadrature samples on the sphere at a refinement level.
    fn samples(&self, spec: &SphereSpec, level: usize) -> WeightedSamples {
        let q = 2.0 / self.m as f64;
        let mut out = WeightedSamples::new(self.d + 1, q);
        let mut buf = Vec::with_capacity(self.d + 1);
        let scale = 1usize << level;
        let cap_rule = GaussRule::new(spec.cap_radial);
        let cap_angular = spec.cap_angular * scale;
        for (i, (&center, &rho)) in self.centers.iter().zip(&self.radii).enumerate() {
            let a = self.points[i].1 as f64;
            let kappa = 2.0 - 2.0 * a / self.m as f64;
            let sigma_max = (36.0 / kappa).min(600.0);
            let helper = if center[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
            let e1 = unit(cross(center, helper));
            let e2 = cross(center, e1);
            let mut radial = Vec::new();
            for (lo, hi) in graded_panels(0.0, sigma_max, level) {
                cap_rule.push_mapped(lo, hi, &mut radial);
            }
            for &(sigma, ws) in &radial {
                let psi = rho * (-sigma).exp();
                let weight_r = ws * bump(psi / rho) * psi.sin() * psi;
                for k in 0..cap_angular {
                    let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / cap_angular as f64;
                    let dir = [
                        phi.cos() * e1[0] + phi.sin() * e2[0],
                        phi.cos() * e1[1] + phi.sin() * e2[1],
                        phi.cos() * e1[2] + phi.sin() * e2[2],
                    ];
                    let x = [
                        psi.cos() * center[0] + psi.sin() * dir[0],
                        psi.cos() * center[1] + psi.sin() * dir[1],
                        psi.cos() * center[2] + psi.sin() * dir[2],
                    ];
                    self.values(x, &mut buf);
                    out.push(weight_r * 2.0 * std::f64::consts::PI / cap_angular as f64, &buf);
                }
            }
        }
        let polar = GaussRule::new(spec.polar * scale);
        let azimuthal = spec.azimuthal * scale;
        for (ct, wc) in polar.nodes.iter().zip(&polar.weights) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for k in 0..azimuthal {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / azimuthal as f64;
                let x = [st * phi.cos(), st * phi.sin(), *ct];
                let covered: f64 = self
                    .centers
                    .iter()
                    .zip(&self.radii)
                    .map(|(&c, &rho)| bump(dot3(x, c).clamp(-1.0, 1.0).acos() / rho))
                    .sum();
                let weight = (1.0 - covered) * wc * 2.0 * std::f64::consts::PI / azimuthal as f64;
                if weight <= 0.0 {
                    continue;
                }
                self.values(x, &mut buf);
                out.push(weight, &buf);
            }
        }
        out
    }
}

/// ∫ over the sphere of the NS density of {w^k Π(w−p_i)^{−a_i} dw^m : 0 ≤ k ≤ d}.
pub fn ns_mass_genus0(points: &[(Complex64, u32)], m: u32, options: &Genus0Options) -> Result<Genus0Mass> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("m below 2 (m = {m})")));
    }
    if let Some(&(p, a)) = points.iter().find(|(_, a)| *a == 0 || *a >= m) {
        return Err(Error::InvalidInput(format!("coefficient {a} at {p} is outside [1, m-1]")));
    }
    if points.iter().any(|(p, _)| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::InvalidInput("points must be finite".into()));
    }
    let total: u32 = points.iter().map(|(_, a)| a).sum();
    if total < 2 * m {
        return Err(Error::InvalidInput(format!("coefficients sum to {total} < 2m = {}", 2 * m)));
    }
    let d = (total - 2 * m) as usize;
    let centers: Vec<Vec3> = points.iter().map(|(p, _)| to_sphere(*p)).collect();
    let mut warnings = Vec::new();
    let mut radii = Vec::new();
    for (i, &c) in centers.iter().enumerate() {
        let mut nearest = std::f64::consts::PI;
        for (j, &o) in centers.iter().enumerate() {
            if i == j {
                continue;
            }
            let angle = dot3(c, o).clamp(-1.0, 1.0).acos();
            if angle == 0.0 {
                return Err(Error::InvalidInput(format!("points {} and {} coincide", points[i].0, points[j].0)));
            }
            let chord = 2.0 * (angle / 2.0).sin();
            if chord < options.sphere.coincidence && i < j {
                warnings.push(format!(
                    "points {} and {} are nearly coincident (chordal distance {chord:e})",
                    points[i].0, points[j].0
                ));
            }
            nearest = nearest.min(angle);
        }
        radii.push((0.45 * nearest).min(0.8));
    }
    let config = Configuration { points: points.to_vec(), m, d, centers, radii };
    let coarse = config.samples(&options.sphere, 0);
    let fine = config.samples(&options.sphere, 1);
    let maximizer = NsMaximizer::new(&coarse, &options.optimizer)?;
    let mass_on = |grid: &WeightedSamples| -> Result<f64> {
        let mut total = 0.0;
        let mut warm: Option<Vec<Complex64>> = None;
        for p in 0..grid.len() {
            let best = maximizer.maximize(grid.point(p), warm.as_deref())?;
            total += grid.weights[p] * best.value;
            warm = Some(best.coefficients);
        }
        Ok(total)
    };
    let mass = mass_on(&coarse)?;
    let refined = mass_on(&fine)?;
    // relative movement of the basis norms under refinement bounds the error of I(c)
    let mut norm_shift: f64 = 0.0;
    for j in 0..=d {
        let mut e = vec![Complex64::new(0.0, 0.0); d + 1];
        e[j] = Complex64::new(1.0, 0.0);
        let a = coarse.integral(&e);
        let b = fine.integral(&e);
        norm_shift = norm_shift.max((a - b).abs() / b);
    }
    let error = (refined - mass).abs() + norm_shift * mass + 10.0 * options.optimizer.tolerance * mass;
    Ok(Genus0Mass { mass, error, sections: d + 1, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_a_partition() {
        assert_eq!(bump(0.2), 1.0);
        assert_eq!(bump(1.2), 0.0);
        assert!((bump(0.75) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stereographic_charts_agree() {
        let c = Configuration {
            points: vec![(Complex64::new(0.0, 0.0), 1), (Complex64::new(1.0, 0.0), 1), (Complex64::new(-1.0, 0.0), 1), (Complex64::new(0.0, 1.0), 1), (Complex64::new(2.0, 0.0), 1)],
            m: 2,
            d: 1,
            centers: vec![],
            radii: vec![],
        };
        // on the equator both charts apply; values agree up to a common unimodular factor
        let x = to_sphere(Complex64::from_polar(1.0, 0.3));
        let mut a = Vec::new();
        c.values([x[0], x[1], -1e-15], &mut a);
        let mut b = Vec::new();
        c.values([x[0], x[1], 1e-15], &mut b);
        for k in 0..2 {
            assert!((a[k].norm() - b[k].norm()).abs() < 1e-9 * a[k].norm());
        }
        assert!(((a[0] * b[1]) - (a[1] * b[0])).norm() < 1e-9 * a[0].norm() * b[1].norm());
    }

    #[test]
    fn single_section_has_unit_mass() {
        let pts = [
            (Complex64::new(0.0, 0.0), 1),
            (Complex64::new(1.0, 0.0), 1),
            (Complex64::new(-1.0, 0.0), 1),
            (Complex64::new(0.0, 1.0), 1),
        ];
        let r = ns_mass_genus0(&pts, 2, &Genus0Options::default()).unwrap();
        assert_eq!(r.sections, 1);
        assert!((r.mass - 1.0).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn mass_is_mobius_invariant() {
        let pts = [
            (Complex64::new(0.0, 0.0), 2),
            (Complex64::new(1.0, 0.0), 2),
            (Complex64::new(-1.0, 0.0), 2),
            (Complex64::new(0.0, 1.0), 1),
        ];
        let moved: Vec<(Complex64, u32)> =
            pts.iter().map(|&(w, a)| ((2.0 * w + 1.0) / (w + 3.0), a)).collect();
        let opts = Genus0Options::default();
        let a = ns_mass_genus0(&pts, 3, &opts).unwrap();
        let b = ns_mass_genus0(&moved, 3, &opts).unwrap();
        assert_eq!(a.sections, 2);
        assert!(a.mass >= 1.0 && b.mass >= 1.0, "{a:?} {b:?}");
        assert!((a.mass - b.mass).abs() <= 2.0 * (a.error + b.error), "{a:?} {b:?}");
    }

    #[test]
    fn rejects_bad_coefficients() {
        let pts = [(Complex64::new(0.0, 0.0), 2), (Complex64::new(1.0, 0.0), 1)];
        assert!(ns_mass_genus0(&pts, 2, &Genus0Options::default()).is_err());
    }
}
