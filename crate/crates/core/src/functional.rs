//! Exponential functionals ∫_E exp[c|u|^{n/(n−α)}] (plain, truncated and
//! power-weighted), the Ruf condition and the two elementary inequalities
//! behind the regularized and perturbed forms.

use crate::field::{annulus_measure, truncated_exp, weighted_annulus_measure, Layout, SampledFunction};
use crate::quad::pairwise_sum;
use crate::{Error, Result};
use serde::Serialize;

/// Exponents above this are reported as overflow.
pub const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    /// Everything the sampled function covers.
    Domain,
}

impl Region {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Region::Ball { radius } => (0.0, radius),
            Region::Annulus { inner, outer } => (inner, outer),
            Region::Domain => (0.0, f64::INFINITY),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Region::Ball { radius } => format!("ball:{radius}"),
            Region::Annulus { inner, outer } => format!("annulus:{inner}:{outer}"),
            Region::Domain => "domain".into(),
        }
    }

    /// Parses "ball:R", "annulus:a:b" or "domain".
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Config(format!("bad number {t} in region {s}")));
        match parts.as_slice() {
            ["ball", r] => Ok(Region::Ball { radius: num(r)? }),
            ["annulus", a, b] => Ok(Region::Annulus { inner: num(a)?, outer: num(b)? }),
            ["domain"] => Ok(Region::Domain),
            _ => Err(Error::Config(format!("unknown region {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    Lebesgue,
    /// dν = |x|^{(σ−1)n} dx.
    PowerWeight { sigma: f64 },
}

impl Measure {
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::Domain(format!("σ = {sigma} outside (0, 1]")));
        }
        Ok(if sigma == 1.0 { Measure::Lebesgue } else { Measure::PowerWeight { sigma } })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub value: f64,
    pub constant_used: f64,
    pub region: String,
    pub measure: Measure,
    pub truncation: Option<usize>,
    pub max_exponent: f64,
    /// First node whose exponent exceeded the overflow threshold.
    pub overflow_node: Option<usize>,
}

/// N = ⌈n/α − 2⌉, clamped at 0.
pub fn auto_truncation(n: usize, alpha: f64) -> usize {
    (n as f64 / alpha - 2.0).ceil().max(0.0) as usize
}

/// ν-measure of the part of cell i inside the region.
fn cell_measure(u: &SampledFunction, i: usize, region: &Region, measure: &Measure) -> f64 {
    let (a, b) = region.bounds();
    match u.layout {
        Layout::Radial => {
            let (lo, hi) = (u.edges[i].max(a), u.edges[i + 1].min(b));
            if hi <= lo {
                return 0.0;
            }
            let full = annulus_measure(u.n, u.edges[i], u.edges[i + 1]);
            let frac = u.weights[i] / full;
            frac * match *measure {
                Measure::Lebesgue => annulus_measure(u.n, lo, hi),
                Measure::PowerWeight { sigma } => weighted_annulus_measure(u.n, sigma, lo, hi),
            }
        }
        _ => {
            let rho = u.node_radius(i);
            if rho < a || rho > b {
                return 0.0;
            }
            u.weights[i]
                * match *measure {
                    Measure::Lebesgue => 1.0,
                    Measure::PowerWeight { sigma } => rho.powf((sigma - 1.0) * u.n as f64),
                }
        }
    }
}

/// ∫_E exp[c|u|^power] dν, or ∫_E exp_N[c|u|^power] dν with truncation N.
pub fn exp_functional(
    u: &SampledFunction,
    c: f64,
    region: Region,
    power: f64,
    sigma: f64,
    truncation: Option<usize>,
) -> Result<FunctionalReport> {
    if u.layout == Layout::Points {
        return Err(Error::Unsupported("point samples carry no quadrature weights".into()));
    }
    let measure = Measure::from_sigma(sigma)?;
    let (a, b) = region.bounds();
    if !(a >= 0.0 && b > a) {
        return Err(Error::Domain(format!("empty region {}", region.describe())));
    }
    if b.is_finite() && b > u.extent() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("region {} leaves the sampled domain of radius {}", region.describe(), u.extent())));
    }
    if let (Layout::Cartesian, Measure::PowerWeight { .. }) = (u.layout, measure) {
        if (0..u.len()).any(|i| u.node_radius(i) == 0.0) {
            return Err(Error::Domain("power weight is singular at a cell centre".into()));
        }
    }
    let mut terms = Vec::with_capacity(u.len());
    let mut max_exponent: f64 = 0.0;
    let mut overflow_node = None;
    for i in 0..u.len() {
        let w = cell_measure(u, i, &region, &measure);
        if w == 0.0 {
            continue;
        }
        let e = c * u.magnitude(i).powf(power);
        max_exponent = max_exponent.max(e);
        if e > MAX_EXPONENT {
            overflow_node.get_or_insert(i);
            continue;
        }
        let v = match truncation {
            Some(n) => truncated_exp(e, n),
            None => e.exp(),
        };
        terms.push(w * v);
    }
    let value = if overflow_node.is_some() { f64::INFINITY } else { pairwise_sum(&terms) };
    Ok(FunctionalReport {
        value,
        constant_used: c,
        region: region.describe(),
        measure,
        truncation,
        max_exponent,
        overflow_node,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * self.upper.abs().max(1.0);
        self.lower <= self.middle + slack && self.middle <= self.upper + slack
    }
}

/// ∫_{|u|≥1} e^{c|u|^{p'}} ∓ e^c‖u‖_p^p around ∫ exp_N(c|u|^{p'}), N = ⌈p − 2⌉.
pub fn regularization_sandwich(u: &SampledFunction, c: f64, p: f64) -> Result<Sandwich> {
    if !(p > 1.0) || !(c >= 0.0) {
        return Err(Error::Domain(format!("need p > 1 and c ≥ 0, got p = {p}, c = {c}")));
    }
    let pp = p / (p - 1.0);
    let n_trunc = (p - 2.0).ceil().max(0.0) as usize;
    let mut big = Vec::new();
    let mut mid = Vec::new();
    for i in 0..u.len() {
        let m = u.magnitude(i);
        let t = c * m.powf(pp);
        if m >= 1.0 {
            big.push(u.weights[i] * t.exp());
        }
        mid.push(u.weights[i] * truncated_exp(t, n_trunc));
    }
    let big = pairwise_sum(&big);
    let shift = c.exp() * u.lp_power(p)?;
    Ok(Sandwich { lower: big - shift, middle: pairwise_sum(&mid), upper: big + shift })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderMode {
    /// Multiplicative factor exp[(1/A)(τ^{β'}/(1 − p^{β'}))^{β/β'}].
    A,
    /// Additive shift τ(1 − p^{β'})^{1/β'}.
    B,
}

pub fn holder_perturbation(tau: f64, p: f64, a: f64, beta: f64, mode: HolderMode) -> Result<f64> {
    if !(tau >= 0.0) || !(0.0..=1.0).contains(&p) || !(a > 0.0) || !(beta > 1.0) {
        return Err(Error::Domain(format!("invalid arguments τ = {tau}, p = {p}, A = {a}, β = {beta}")));
    }
    let bp = beta / (beta - 1.0);
    match mode {
        HolderMode::A => {
            if p >= 1.0 {
                return Err(Error::Domain("mode A needs p < 1".into()));
            }
            Ok(((tau.powf(bp) / (1.0 - p.powf(bp))).powf(beta / bp) / a).exp())
        }
        HolderMode::B => Ok(tau * (1.0 - p.powf(bp)).powf(1.0 / bp)),
    }
}

/// (aθ^{1/β'} + b(1−θ)^{1/β'}, (a^β + b^β)^{1/β}); the first never exceeds
/// the second.
pub fn split_power_inequality(a: f64, b: f64, theta: f64, beta: f64) -> (f64, f64) {
    let bp = beta / (beta - 1.0);
    let lhs = a * theta.powf(1.0 / bp) + b * (1.0 - theta).powf(1.0 / bp);
    let rhs = (a.powf(beta) + b.powf(beta)).powf(1.0 / beta);
    (lhs, rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RufCheck {
    pub pass: bool,
    /// 1 − (‖f‖^{n/α} + ‖Tf‖^{n/α}).
    pub slack: f64,
}

pub fn ruf_check(f_norm: f64, tf_norm: f64, n: usize, alpha: f64) -> RufCheck {
    let p = n as f64 / alpha;
    let slack = 1.0 - (f_norm.powf(p) + tf_norm.powf(p));
    RufCheck { pass: slack >= -1e-12, slack }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::uniform_edges;
    use std::f64::consts::{E, PI};

    fn disk(v: f64) -> SampledFunction {
        SampledFunction::radial(2, uniform_edges(1.0, 16), vec![v; 16]).unwrap()
    }

    #[test]
    fn trivial_values() {
        let z = disk(0.0);
        let r = exp_functional(&z, 3.0, Region::Ball { radius: 1.0 }, 2.0, 1.0, None).unwrap();
        assert!((r.value - PI).abs() < 1e-13);
        let r = exp_functional(&z, 3.0, Region::Ball { radius: 1.0 }, 2.0, 1.0, Some(0)).unwrap();
        assert_eq!(r.value, 0.0);
        let one = disk(1.0);
        let r = exp_functional(&one, 0.7, Region::Ball { radius: 1.0 }, 2.0, 0.5, None).unwrap();
        assert!((r.value - 2.0 * PI * 0.7f64.exp()).abs() < 1e-12);
        assert!(exp_functional(&one, 0.7, Region::Ball { radius: 2.0 }, 2.0, 1.0, None).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let r = exp_functional(&disk(30.0), 1.0, Region::Domain, 2.0, 1.0, None).unwrap();
        assert_eq!(r.value, f64::INFINITY);
        assert_eq!(r.overflow_node, Some(0));
    }

    #[test]
    fn partial_cells() {
        let one = disk(1.0);
        let r = exp_functional(&one, 0.0, Region::Annulus { inner: 0.33, outer: 0.71 }, 2.0, 1.0, None).unwrap();
        assert!((r.value - PI * (0.71f64.powi(2) - 0.33f64.powi(2))).abs() < 1e-13);
    }

    #[test]
    fn single_level_sandwich() {
        let u = SampledFunction::radial(2, vec![0.0, PI.powf(-0.5)], vec![2.0]).unwrap();
        let s = regularization_sandwich(&u, 1.0, 2.0).unwrap();
        let e4 = 4f64.exp();
        assert!((s.lower - (e4 - 4.0 * E)).abs() < 1e-11);
        assert!((s.middle - (e4 - 1.0)).abs() < 1e-11);
        assert!((s.upper - (e4 + 4.0 * E)).abs() < 1e-11);
        assert!(s.holds());
    }

    #[test]
    fn holder_cases() {
        assert_eq!(holder_perturbation(0.0, 0.3, 2.0, 3.0, HolderMode::A).unwrap(), 1.0);
        let v = holder_perturbation(1.5, 0.0, 2.0, 3.0, HolderMode::A).unwrap();
        assert!((v - (1.5f64.powi(3) / 2.0).exp()).abs() < 1e-12 * v);
        assert!(holder_perturbation(1.0, 1.0, 2.0, 3.0, HolderMode::A).is_err());
        assert_eq!(holder_perturbation(2.0, 1.0, 2.0, 3.0, HolderMode::B).unwrap(), 0.0);
        let (l, r) = split_power_inequality(1.0, 1.0, 0.5, 2.0);
        assert!((l - 2f64.sqrt()).abs() < 1e-15 && (r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ruf_boundary() {
        let c = ruf_check(0.0, 0.0, 2, 1.0);
        assert!(c.pass && c.slack == 1.0);
        let c = ruf_check(1.0, 0.0, 2, 1.0);
        assert!(c.pass && c.slack == 0.0);
        assert!(!ruf_check(1.0, 0.1, 2, 1.0).pass);
    }
}
