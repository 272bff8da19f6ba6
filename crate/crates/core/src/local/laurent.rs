//! Sections on a node chart given by finitely many Laurent coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Which half of the node chart {zw = t}: |w| ≥ √|t| or |z| ≥ √|t|.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    W,
    Z,
}

/// A point of one half of the chart: s = −log of the side's coordinate, φ its argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChartPoint {
    pub side: Side,
    pub s: f64,
    pub phi: f64,
}

impl ChartPoint {
    pub fn w(s: f64, phi: f64) -> Self {
        ChartPoint { side: Side::W, s, phi }
    }
}

/// θ_t = Σ c_{α,β} t^α w^{β−α−m} dw^m on a chain of `chain_length` identical node charts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaurentFamily {
    pub m: u32,
    pub chain_length: u32,
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl LaurentFamily {
    pub fn new(m: u32, chain_length: u32, terms: BTreeMap<(u32, u32), Complex64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInput(format!("m below 2 (m = {m})")));
        }
        if chain_length == 0 {
            return Err(Error::InvalidInput("chain length must be at least 1".into()));
        }
        let terms: BTreeMap<_, _> = terms.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect();
        if terms.is_empty() {
            return Err(Error::InvalidInput("family has no nonzero coefficient".into()));
        }
        if terms.values().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("family has a non-finite coefficient".into()));
        }
        Ok(LaurentFamily { m, chain_length, terms })
    }

    /// w^{−k} dw^m, constant in t.
    pub fn monomial(m: u32, pole_order: u32) -> Result<Self> {
        if pole_order > m {
            return Err(Error::InvalidInput(format!("pole order {pole_order} exceeds m = {m}")));
        }
        Self::new(m, 1, BTreeMap::from([((0, m - pole_order), Complex64::new(1.0, 0.0))]))
    }

    /// w^{−m}(1 + εw) dw^m.
    pub fn perturbed_pole(m: u32, epsilon: f64) -> Result<Self> {
        Self::new(
            m,
            1,
            BTreeMap::from([((0, 0), Complex64::new(1.0, 0.0)), ((0, 1), Complex64::new(epsilon, 0.0))]),
        )
    }

    pub fn with_chain_length(mut self, l: u32) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidInput("chain length must be at least 1".into()));
        }
        self.chain_length = l;
        Ok(self)
    }

    pub fn scaled(&self, lambda: Complex64) -> Result<Self> {
        Self::new(self.m, self.chain_length, self.terms.iter().map(|(&k, &c)| (k, c * lambda)).collect())
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Complex64> {
        &self.terms
    }

    /// Coefficient of w^{−m} at t = 0.
    pub fn residue(&self) -> Complex64 {
        self.terms.get(&(0, 0)).copied().unwrap_or_default()
    }

    /// Largest α and β with a nonzero coefficient.
    pub fn truncation(&self) -> (u32, u32) {
        let a = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let b = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        (a, b)
    }

    /// The restriction to the central fiber: the α = 0 slice.
    pub fn central_fiber(&self) -> Option<Self> {
        let terms: BTreeMap<_, _> = self.terms.iter().filter(|(k, _)| k.0 == 0).map(|(&k, &c)| (k, c)).collect();
        Self::new(self.m, self.chain_length, terms).ok()
    }

    /// θ_t(w) w^m at the chart point, for log|t|⁻¹ = `log_t_inv` and t > 0. Its modulus to
    /// the power 2/m is the density of |θ_t|^{2/m} with respect to ds dφ.
    pub fn value(&self, log_t_inv: f64, p: ChartPoint) -> Complex64 {
        let mut out = Complex64::new(0.0, 0.0);
        for (&(alpha, beta), &c) in &self.terms {
            let (a, b) = match p.side {
                Side::W => (alpha as f64, beta as f64),
                Side::Z => (beta as f64, alpha as f64),
            };
            let magnitude = (-(a * (log_t_inv - p.s) + b * p.s)).exp();
            if magnitude == 0.0 {
                continue;
            }
            out += c * Complex64::from_polar(magnitude, p.phi * (b - a));
        }
        out
    }

    /// Parses `c@α,β + c@α,β ...` where `c` is a real number or `(re,im)`.
    pub fn parse(text: &str, m: u32, chain_length: u32) -> Result<Self> {
        let mut terms: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for raw in text.split('+') {
            let term = raw.trim();
            let bad = || Error::InvalidInput(format!("cannot read family term `{term}` (expected c@alpha,beta)"));
            let (coef, orders) = term.split_once('@').ok_or_else(bad)?;
            let (alpha, beta) = orders.split_once(',').ok_or_else(bad)?;
            let alpha: u32 = alpha.trim().parse().map_err(|_| bad())?;
            let beta: u32 = beta.trim().parse().map_err(|_| bad())?;
            let coef = coef.trim();
            let c = if let Some(inner) = coef.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
                let (re, im) = inner.split_once(',').ok_or_else(bad)?;
                Complex64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?)
            } else {
                Complex64::new(coef.parse().map_err(|_| bad())?, 0.0)
            };
            *terms.entry((alpha, beta)).or_default() += c;
        }
        Self::new(m, chain_length, terms)
    }
}

impl fmt::Display for LaurentFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(a, b), c)| {
                if c.im == 0.0 {
                    format!("{}@{a},{b}", c.re)
                } else {
                    format!("({},{})@{a},{b}", c.re, c.im)
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Checks that families share m and chain length, returning them.
pub fn common_shape(families: &[LaurentFamily]) -> Result<(u32, u32)> {
    let first = families.first().ok_or_else(|| Error::InvalidInput("no families given".into()))?;
    if families.iter().any(|f| f.m != first.m || f.chain_length != first.chain_length) {
        return Err(Error::InvalidInput("families disagree on m or chain length".into()));
    }
    Ok((first.m, first.chain_length))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_pole_is_constant_on_both_sides() {
        let f = LaurentFamily::monomial(2, 2).unwrap();
        for side in [Side::W, Side::Z] {
            let v = f.value(100.0, ChartPoint { side, s: 13.0, phi: 0.7 });
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        assert_eq!(f.residue(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn subleading_term_decays_into_the_neck() {
        let f = LaurentFamily::monomial(2, 1).unwrap();
        let v = f.value(100.0, ChartPoint::w(3.0, 0.0));
        assert!((v.norm() - (-3.0f64).exp()).abs() < 1e-15);
        // on the other side w^{-1} dw^2 becomes a t-multiple of z^{-3} dz^2
        let z = f.value(100.0, ChartPoint { side: Side::Z, s: 3.0, phi: 0.0 });
        assert!((z.norm() - (-97.0f64).exp()).abs() < 1e-50);
    }

    #[test]
    fn parse_round_trip() {
        let f = LaurentFamily::parse("1@0,0 + 0.3@0,1 + (0,2)@1,0", 2, 1).unwrap();
        assert_eq!(f.terms().len(), 3);
        assert_eq!(f.truncation(), (1, 1));
        let g = LaurentFamily::parse(&f.to_string(), 2, 1).unwrap();
        assert_eq!(f, g);
        assert!(LaurentFamily::parse("1@0", 2, 1).is_err());
        assert_eq!(f.central_fiber().unwrap().terms().len(), 2);
    }
}
