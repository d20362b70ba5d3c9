//! Riesz-like kernels, their angular profiles, Taylor expansions and the
//! sharp constants of the exponential inequalities.

use crate::poly::{multi_indices, MultiIndex, Poly};
use crate::quad::{adaptive, adaptive_best, GaussLegendre, Tolerance};
use crate::special::{ball_volume, binomial, gamma, sphere_area};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type ProfileFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Angular part g(x*) of a kernel.
#[derive(Clone)]
pub enum AngularShape {
    /// g ≡ c (scalar).
    Constant(f64),
    /// g_j(ω) = c·ω_j, one component per coordinate.
    Coordinates(f64),
    /// Arbitrary profile with the given number of components.
    Custom { components: usize, eval: ProfileFn },
}

#[derive(Clone)]
pub struct AngularProfile {
    pub shape: AngularShape,
    pub lipschitz_bound: Option<f64>,
}

impl fmt::Debug for AngularProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match &self.shape {
            AngularShape::Constant(c) => format!("Constant({c})"),
            AngularShape::Coordinates(c) => format!("Coordinates({c})"),
            AngularShape::Custom { components, .. } => format!("Custom({components})"),
        };
        f.debug_struct("AngularProfile").field("shape", &s).field("lipschitz_bound", &self.lipschitz_bound).finish()
    }
}

impl AngularProfile {
    pub fn constant(c: f64) -> Self {
        AngularProfile { shape: AngularShape::Constant(c), lipschitz_bound: None }
    }

    pub fn custom(components: usize, eval: ProfileFn) -> Self {
        AngularProfile { shape: AngularShape::Custom { components, eval }, lipschitz_bound: None }
    }

    pub fn components(&self, n: usize) -> usize {
        match &self.shape {
            AngularShape::Constant(_) => 1,
            AngularShape::Coordinates(_) => n,
            AngularShape::Custom { components, .. } => *components,
        }
    }

    pub fn eval(&self, omega: &[f64]) -> Vec<f64> {
        match &self.shape {
            AngularShape::Constant(c) => vec![*c],
            AngularShape::Coordinates(c) => omega.iter().map(|w| c * w).collect(),
            AngularShape::Custom { eval, .. } => eval(omega),
        }
    }

    /// Euclidean length of the component values at ω.
    pub fn magnitude(&self, omega: &[f64]) -> f64 {
        match &self.shape {
            AngularShape::Constant(c) => c.abs(),
            AngularShape::Coordinates(c) => c.abs() * norm(omega),
            AngularShape::Custom { .. } => norm(&self.eval(omega)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KernelForm {
    /// g(x*)|x|^{α−n}.
    Homogeneous,
    /// |x|^{α−n}(1 + c·|x|^δ/(1 + |x|^δ)).
    Perturbed { delta: f64, coeff: f64 },
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub n: usize,
    pub alpha: f64,
    pub components: usize,
    pub angular: AngularProfile,
    pub correction_exponent: f64,
    /// Declared constant of the correction bound |K − g|x|^{α−n}| ≤ C|x|^{α−n+δ}.
    pub correction_bound: f64,
    pub global_bound: f64,
    pub regularity: usize,
    pub homogeneous: bool,
    pub form: KernelForm,
    pub id: String,
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_order(n: usize, alpha: f64) -> Result<()> {
    if !(1..=3).contains(&n) {
        return Err(Error::Domain(format!("dimension {n} outside 1..=3")));
    }
    if !(alpha > 0.0 && alpha < n as f64) {
        return Err(Error::Domain(format!("order {alpha} outside (0, {n})")));
    }
    Ok(())
}

impl KernelSpec {
    pub fn riesz(n: usize, alpha: f64) -> Result<Self> {
        check_order(n, alpha)?;
        let mut angular = AngularProfile::constant(1.0);
        angular.lipschitz_bound = Some(n as f64 - alpha);
        Ok(KernelSpec {
            n,
            alpha,
            components: 1,
            angular,
            correction_exponent: 1.0,
            correction_bound: 0.0,
            global_bound: 1.0,
            regularity: n,
            homogeneous: true,
            form: KernelForm::Homogeneous,
            id: "riesz".into(),
        })
    }

    /// Vector kernel c_{α+1}(n−α−1)|x|^{α−n−1}x.
    pub fn gradient(n: usize, alpha: f64) -> Result<Self> {
        check_order(n, alpha)?;
        let c = gradient_coefficient(n, alpha);
        Ok(KernelSpec {
            n,
            alpha,
            components: n,
            angular: AngularProfile { shape: AngularShape::Coordinates(c), lipschitz_bound: None },
            correction_exponent: 1.0,
            correction_bound: 0.0,
            global_bound: c.abs(),
            regularity: n,
            homogeneous: true,
            form: KernelForm::Homogeneous,
            id: "gradient".into(),
        })
    }

    /// Radial kernel |x|^{α−n}(1 + c·|x|^δ/(1 + |x|^δ)); it agrees with
    /// |x|^{α−n}(1 + c|x|^δ) to leading order near the origin.
    pub fn perturbed(n: usize, alpha: f64, delta: f64, coeff: f64) -> Result<Self> {
        check_order(n, alpha)?;
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("correction exponent {delta} must be positive")));
        }
        Ok(KernelSpec {
            n,
            alpha,
            components: 1,
            angular: AngularProfile::constant(1.0),
            correction_exponent: delta,
            correction_bound: coeff.abs(),
            global_bound: (1.0 + coeff).abs().max(1.0),
            regularity: n,
            homogeneous: false,
            form: KernelForm::Perturbed { delta, coeff },
            id: format!("perturbed:{delta}:{coeff}"),
        })
    }

    /// Homogeneous kernel g(x*)|x|^{α−n} with a caller-supplied profile.
    pub fn homogeneous_with(n: usize, alpha: f64, angular: AngularProfile, global_bound: f64) -> Result<Self> {
        check_order(n, alpha)?;
        let components = angular.components(n);
        Ok(KernelSpec {
            n,
            alpha,
            components,
            angular,
            correction_exponent: 1.0,
            correction_bound: 0.0,
            global_bound,
            regularity: n,
            homogeneous: true,
            form: KernelForm::Homogeneous,
            id: "custom".into(),
        })
    }

    /// Parses "riesz", "gradient" or "perturbed:<δ>:<c>".
    pub fn from_id(id: &str, n: usize, alpha: f64) -> Result<Self> {
        let parts: Vec<&str> = id.split(':').collect();
        match parts.as_slice() {
            ["riesz"] => KernelSpec::riesz(n, alpha),
            ["gradient"] => KernelSpec::gradient(n, alpha),
            ["perturbed", d, c] => {
                let d: f64 = d.parse().map_err(|_| Error::Config(format!("bad δ in kernel id {id}")))?;
                let c: f64 = c.parse().map_err(|_| Error::Config(format!("bad coefficient in kernel id {id}")))?;
                KernelSpec::perturbed(n, alpha, d, c)
            }
            _ => Err(Error::Config(format!("unknown kernel id {id}"))),
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.components == 1
    }

    /// Scalar kernel depending only on |x|.
    pub fn is_radial(&self) -> bool {
        matches!(self.angular.shape, AngularShape::Constant(_))
    }

    /// Exponent n/(n−α) of the sharp functional.
    pub fn conjugate_power(&self) -> f64 {
        self.n as f64 / (self.n as f64 - self.alpha)
    }

    /// Radial factor multiplying g: ρ^{α−n} or the perturbed profile.
    fn radial_factor(&self, rho: f64) -> f64 {
        let base = rho.powf(self.alpha - self.n as f64);
        match self.form {
            KernelForm::Homogeneous => base,
            KernelForm::Perturbed { delta, coeff } => {
                let s = rho.powf(delta);
                base * (1.0 + coeff * s / (1.0 + s))
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let rho = norm(x);
        if rho == 0.0 {
            return Err(Error::Singularity("kernel evaluated at the origin".into()));
        }
        let omega: Vec<f64> = x.iter().map(|v| v / rho).collect();
        let f = self.radial_factor(rho);
        Ok(self.angular.eval(&omega).into_iter().map(|g| g * f).collect())
    }

    /// Scalar value; errors for vector kernels.
    pub fn eval_scalar(&self, x: &[f64]) -> Result<f64> {
        if !self.is_scalar() {
            return Err(Error::Unsupported(format!("kernel {} has {} components", self.id, self.components)));
        }
        Ok(self.eval(x)?[0])
    }

    /// k(ρ) for radial kernels.
    pub fn radial_value(&self, rho: f64) -> f64 {
        let c = match self.angular.shape {
            AngularShape::Constant(c) => c,
            _ => f64::NAN,
        };
        c * self.radial_factor(rho)
    }

    /// ∫_0^ρ k(r) r^{n−1} dr for radial kernels.
    pub fn radial_cumulative(&self, rho: f64) -> f64 {
        let c = match self.angular.shape {
            AngularShape::Constant(c) => c,
            _ => f64::NAN,
        };
        c * self.factor_cumulative(rho)
    }

    /// ∫_0^ρ (radial factor)(r) r^{n−1} dr.
    fn factor_cumulative(&self, rho: f64) -> f64 {
        let a = self.alpha;
        if rho <= 0.0 {
            return 0.0;
        }
        let base = rho.powf(a) / a;
        match self.form {
            KernelForm::Homogeneous => base,
            KernelForm::Perturbed { delta, coeff } => {
                // ∫_0^ρ r^{α+δ−1}/(1+r^δ) dr with r = ρ·u^{1/(α+δ)}
                let e = a + delta;
                let scale = rho.powf(e) / e;
                let tol = Tolerance { abs: 0.0, rel: 1e-14, max_intervals: 200 };
                let mut h = |u: f64| {
                    let r = rho * u.powf(1.0 / e);
                    1.0 / (1.0 + r.powf(delta))
                };
                let corr = adaptive_best(&mut h, 0.0, 1.0, tol).value;
                base + coeff * scale * corr
            }
        }
    }

    /// ∫_0^ρ K(r·v) r^{n−1} dr per component, for a unit vector v.
    pub fn cumulative_along(&self, v: &[f64], rho: f64) -> Vec<f64> {
        let f = self.factor_cumulative(rho);
        self.angular.eval(v).into_iter().map(|g| g * f).collect()
    }
}

/// (n−α−1)c_{α+1} through the Gamma recurrence Γ((n−α+1)/2)/(2^α π^{n/2} Γ((α+1)/2)).
pub fn gradient_coefficient(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    gamma((nf - alpha + 1.0) / 2.0) / (2f64.powf(alpha) * PI.powf(nf / 2.0) * gamma((alpha + 1.0) / 2.0))
}

/// c_α = Γ((n−α)/2)/(2^α π^{n/2} Γ(α/2)).
pub fn constant_c_alpha(n: usize, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return Err(Error::Domain(format!("order {alpha} outside (0, {n})")));
    }
    Ok(gamma((nf - alpha) / 2.0) / (2f64.powf(alpha) * PI.powf(nf / 2.0) * gamma(alpha / 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    FractionalLaplacian,
    GradientPower,
}

/// Exponential constant γ(P) for P = (−Δ)^{α/2} or P = ∇(−Δ)^{(α−1)/2}.
pub fn constant_gamma(op: Operator, n: usize, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return Err(Error::Domain(format!("order {alpha} outside (0, {n})")));
    }
    let p = nf / (nf - alpha);
    let b1 = ball_volume::<f64>(n);
    match op {
        Operator::FractionalLaplacian => Ok(constant_c_alpha(n, alpha)?.powf(-p) / b1),
        Operator::GradientPower => {
            let odd = alpha.fract() == 0.0 && (alpha as i64) % 2 == 1;
            if !odd {
                return Err(Error::Unsupported(format!("gradient operator needs odd integer order, got {alpha}")));
            }
            Ok(gradient_coefficient(n, alpha).powf(-p) / b1)
        }
    }
}

/// γ(∇) = n·ω_{n−1}^{1/(n−1)} for the Dirichlet norm of the gradient.
pub fn moser_constant(n: usize) -> f64 {
    n as f64 * sphere_area::<f64>(n).powf(1.0 / (n as f64 - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpConstants {
    pub a_g: f64,
    pub c_alpha: f64,
    pub gamma: f64,
    pub ball_volume: f64,
}

pub fn sharp_constants(k: &KernelSpec) -> Result<SharpConstants> {
    Ok(SharpConstants {
        a_g: constant_a_g(k)?,
        c_alpha: constant_c_alpha(k.n, k.alpha)?,
        gamma: constant_gamma(Operator::FractionalLaplacian, k.n, k.alpha)?,
        ball_volume: ball_volume(k.n),
    })
}

/// A_g = (1/n)∫_{S^{n−1}} |g|^{n/(n−α)}; closed form when |g| is constant.
pub fn constant_a_g(k: &KernelSpec) -> Result<f64> {
    let p = k.conjugate_power();
    match k.angular.shape {
        AngularShape::Constant(c) | AngularShape::Coordinates(c) => Ok(c.abs().powf(p) * ball_volume::<f64>(k.n)),
        AngularShape::Custom { .. } => constant_a_g_quadrature(k),
    }
}

/// A_g by sphere quadrature: trapezoid in angle (n = 2), Gauss–Legendre in
/// cos θ times trapezoid in φ (n = 3).
pub fn constant_a_g_quadrature(k: &KernelSpec) -> Result<f64> {
    let p = k.conjugate_power();
    let n = k.n;
    let mag = |w: &[f64]| k.angular.magnitude(w).powf(p);
    let total = sphere_integral(n, 512, mag);
    if !total.is_finite() {
        return Err(Error::Tolerance { estimate: total, error: f64::INFINITY });
    }
    Ok(total / n as f64)
}

/// ∫_{S^{n−1}} h(ω) dω with `m` angular nodes per direction.
pub fn sphere_integral<F: Fn(&[f64]) -> f64>(n: usize, m: usize, h: F) -> f64 {
    match n {
        1 => h(&[1.0]) + h(&[-1.0]),
        2 => {
            let dphi = 2.0 * PI / m as f64;
            (0..m).map(|i| {
                let phi = i as f64 * dphi;
                h(&[phi.cos(), phi.sin()])
            })
            .sum::<f64>()
                * dphi
        }
        _ => {
            let gl = GaussLegendre::<f64>::new(m / 4);
            let mphi = m / 2;
            let dphi = 2.0 * PI / mphi as f64;
            let mut s = 0.0;
            for (ct, w) in gl.nodes.iter().zip(&gl.weights) {
                let st = (1.0 - ct * ct).sqrt();
                for j in 0..mphi {
                    let phi = j as f64 * dphi;
                    s += w * dphi * h(&[st * phi.cos(), st * phi.sin(), *ct]);
                }
            }
            s
        }
    }
}

/// Unit directions used for sampling: ±1 (n = 1), equiangular (n = 2),
/// Fibonacci lattice (n = 3).
pub fn sample_directions(n: usize, m: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..m)
            .map(|i| {
                let a = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
    }
}

/// ∫_{S^{n−1}} K(t·e_1 − s·ω) dω.
pub fn ring_average(k: &KernelSpec, t: f64, s: f64) -> Result<f64> {
    if !k.is_scalar() {
        return Err(Error::Unsupported("ring average needs a scalar kernel".into()));
    }
    if t < 0.0 || s < 0.0 || (t == 0.0 && s == 0.0) {
        return Err(Error::Domain(format!("radii ({t}, {s}) invalid")));
    }
    let n = k.n;
    if n == 1 {
        if t == s {
            return Err(Error::Singularity("t = s in one dimension".into()));
        }
        return Ok(k.eval_scalar(&[t - s])? + k.eval_scalar(&[t + s])?);
    }
    if t == 0.0 || s == 0.0 {
        if k.is_radial() {
            return Ok(sphere_area::<f64>(n) * k.radial_value(t.max(s)));
        }
    }
    if t == s && k.alpha <= 1.0 {
        return Err(Error::Singularity(format!(
            "ring average diverges at t = s for α = {} ≤ 1",
            k.alpha
        )));
    }
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 4000 };
    // |t e1 − s ω|² = (t−s)² + 4ts sin²(φ/2); φ = π u² concentrates nodes near φ = 0.
    let dist = |phi: f64| {
        let h = (0.5 * phi).sin();
        ((t - s) * (t - s) + 4.0 * t * s * h * h).sqrt()
    };
    if k.is_radial() {
        let w = if n == 2 { 2.0 } else { 2.0 * PI };
        let r = adaptive(
            |u: f64| {
                let phi = PI * u * u;
                let jac = 2.0 * PI * u;
                let sn = if n == 3 { phi.sin() } else { 1.0 };
                k.radial_value(dist(phi)) * sn * jac
            },
            0.0,
            1.0,
            tol,
        )?;
        return Ok(w * r.value);
    }
    if n == 2 {
        let half = |sign: f64| {
            adaptive(
                |u: f64| {
                    let phi = sign * PI * u * u;
                    let jac = 2.0 * PI * u;
                    let y = [t - s * phi.cos(), -s * phi.sin()];
                    k.eval_scalar(&y).unwrap_or(f64::NAN) * jac
                },
                0.0,
                1.0,
                tol,
            )
        };
        return Ok(half(1.0)?.value + half(-1.0)?.value);
    }
    Err(Error::Unsupported("ring average for non-radial kernels in three dimensions".into()))
}

/// Point cloud for condition checks: geometric radii times sampled directions.
#[derive(Debug, Clone, Copy)]
pub struct PointCloud {
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub directions: usize,
}

impl Default for PointCloud {
    fn default() -> Self {
        PointCloud { r_min: 1e-3, r_max: 1e3, radii: 61, directions: 32 }
    }
}

impl PointCloud {
    pub fn points(&self, n: usize) -> Vec<Vec<f64>> {
        let dirs = sample_directions(n, self.directions);
        let mut out = Vec::new();
        for i in 0..self.radii {
            let t = i as f64 / (self.radii.max(2) - 1) as f64;
            let r = self.r_min * (self.r_max / self.r_min).powf(t);
            for d in &dirs {
                out.push(d.iter().map(|v| v * r).collect());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub correction_ratio: f64,
    pub bound_ratio: f64,
    pub lipschitz_ratio: f64,
    pub pass: bool,
}

/// Worst sampled ratios for the three Riesz-like conditions.
pub fn verify_kernel_conditions(k: &KernelSpec, cloud: &PointCloud) -> Result<ConditionReport> {
    verify_kernel_conditions_with_slack(k, cloud, 1.05)
}

pub fn verify_kernel_conditions_with_slack(k: &KernelSpec, cloud: &PointCloud, slack: f64) -> Result<ConditionReport> {
    if cloud.r_min <= 0.0 {
        return Err(Error::Domain("sample contains the origin".into()));
    }
    let n = k.n as f64;
    let a = k.alpha;
    let pts = cloud.points(k.n);
    let offsets = sample_directions(k.n, 8);
    let mut corr: f64 = 0.0;
    let mut bound: f64 = 0.0;
    let mut lip: f64 = 0.0;
    for x in &pts {
        let r = norm(x);
        let omega: Vec<f64> = x.iter().map(|v| v / r).collect();
        let kx = k.eval(x)?;
        let g = k.angular.eval(&omega);
        let main = r.powf(a - n);
        let resid = norm(&kx.iter().zip(&g).map(|(kv, gv)| kv - gv * main).collect::<Vec<_>>());
        corr = corr.max(resid / r.powf(a - n + k.correction_exponent));
        bound = bound.max(norm(&kx) * r.powf(n - a));
        for (j, d) in offsets.iter().enumerate() {
            let step = r * [0.5, 0.125, 1.0 / 64.0][j % 3];
            let x2: Vec<f64> = x.iter().zip(d).map(|(xv, dv)| xv + step * dv).collect();
            let r2 = norm(&x2);
            let k2 = k.eval(&x2)?;
            let diff = norm(&kx.iter().zip(&k2).map(|(p, q)| p - q).collect::<Vec<_>>());
            let denom = step * r.powf(a - n - 1.0).max(r2.powf(a - n - 1.0));
            lip = lip.max(diff / denom);
        }
    }
    let ok1 = corr.is_finite() && corr <= k.correction_bound * slack + 1e-12;
    let ok2 = bound.is_finite() && bound <= k.global_bound * slack;
    let ok3 = lip.is_finite() && k.angular.lipschitz_bound.map_or(true, |b| lip <= b * slack);
    Ok(ConditionReport { correction_ratio: corr, bound_ratio: bound, lipschitz_ratio: lip, pass: ok1 && ok2 && ok3 })
}

/// Homogeneous degree-j term p_j(x, y) = (1/j!)·d^jK(x; −y) of the Taylor
/// expansion of y ↦ K(x − y), stored as coefficients of y^k.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorTerm {
    pub degree: usize,
    pub coefficients: BTreeMap<MultiIndex, f64>,
    pub base_point: Vec<f64>,
}

impl TaylorTerm {
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|(k, c)| c * (0..y.len()).map(|i| y[i].powi(k[i] as i32)).product::<f64>())
            .sum()
    }

    pub fn as_poly(&self) -> Poly {
        let mut p = Poly::zero(self.base_point.len());
        for (k, c) in &self.coefficients {
            p.add_term(*k, *c);
        }
        p
    }
}

pub fn taylor_term(k: &KernelSpec, x: &[f64], j: usize) -> Result<TaylorTerm> {
    if !k.is_scalar() {
        return Err(Error::Unsupported("Taylor terms of vector kernels".into()));
    }
    if j > k.n || j > k.regularity {
        return Err(Error::Unsupported(format!(
            "degree {j} exceeds dimension {} or regularity {}",
            k.n, k.regularity
        )));
    }
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::Singularity("Taylor expansion at the origin".into()));
    }
    let coefficients = match (k.form, &k.angular.shape) {
        (KernelForm::Homogeneous, AngularShape::Constant(c)) => riesz_taylor(k.n, k.alpha, x, j).scale(*c).terms,
        _ => finite_difference_taylor(k, x, j)?,
    };
    Ok(TaylorTerm { degree: j, coefficients, base_point: x.to_vec() })
}

/// Binomial expansion of |x − y|^{α−n}:
/// p_j = |x|^{α−n−j} Σ_{j/2≤k≤j} C((α−n)/2, k) C(k, 2k−j) (−2)^{2k−j} (x*·y)^{2k−j} |y|^{2(j−k)}.
pub fn riesz_taylor(n: usize, alpha: f64, x: &[f64], j: usize) -> Poly {
    let r = norm(x);
    let beta = (alpha - n as f64) / 2.0;
    let xs: Vec<f64> = x.iter().map(|v| v / r).collect();
    let lin = Poly::linear(&xs);
    let sq = Poly::norm_sq(n);
    let mut p = Poly::zero(n);
    for kk in j.div_ceil(2)..=j {
        let i = 2 * kk - j;
        let c = binomial(beta, kk) * binomial(kk as f64, i) * (-2f64).powi(i as i32);
        p = p.add(&lin.pow(i as u32).mul(&sq.pow((j - kk) as u32)).scale(c));
    }
    p.scale(r.powf(alpha - n as f64 - j as f64))
}

/// Central-difference weights for the d-th derivative on the integer stencil
/// −m..=m (Fornberg's recursion).
pub fn central_weights(d: usize, m: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..=2 * m).map(|i| i as f64 - m as f64).collect();
    let np = xs.len();
    let mut c = vec![vec![0.0; d + 1]; np];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0];
    for i in 1..np {
        let mn = i.min(d);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i];
        for jj in 0..i {
            let c3 = xs[i] - xs[jj];
            c2 *= c3;
            if jj == i - 1 {
                for kk in (1..=mn).rev() {
                    c[i][kk] = c1 * (kk as f64 * c[i - 1][kk - 1] - c5 * c[i - 1][kk]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for kk in (1..=mn).rev() {
                c[jj][kk] = (c4 * c[jj][kk] - kk as f64 * c[jj][kk - 1]) / c3;
            }
            c[jj][0] = c4 * c[jj][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[d]).collect()
}

fn finite_difference_taylor(k: &KernelSpec, x: &[f64], j: usize) -> Result<BTreeMap<MultiIndex, f64>> {
    let n = k.n;
    let r = norm(x);
    let m = 4usize;
    let h = if j <= 1 { 1e-4 * r } else { 1e-2 * r };
    let mut out = BTreeMap::new();
    for idx in multi_indices(n, j as u32) {
        let w: Vec<Vec<f64>> = (0..n).map(|i| central_weights(idx[i] as usize, m)).collect();
        let mut acc = 0.0;
        let size = 2 * m + 1;
        let total = size.pow(n as u32);
        for flat in 0..total {
            let mut rem = flat;
            let mut coef = 1.0;
            let mut pt = x.to_vec();
            for i in 0..n {
                let s = rem % size;
                rem /= size;
                coef *= w[i][s];
                pt[i] += (s as f64 - m as f64) * h;
            }
            if coef != 0.0 {
                acc += coef * k.eval_scalar(&pt)?;
            }
        }
        let deriv = acc / h.powi(j as i32);
        let fact: f64 = (0..n).map(|i| (1..=idx[i]).map(|v| v as f64).product::<f64>()).product();
        let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
        let c = sign * deriv / fact;
        if c != 0.0 {
            out.insert(idx, c);
        }
    }
    Ok(out)
}

/// ∫_{1≤|y|≤r} |K(y)|^{n/(n−α)} dy (negative of the integral over r ≤ |y| ≤ 1
/// when r < 1, for homogeneous kernels).
pub fn b_r_constant(k: &KernelSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    if k.homogeneous {
        return Ok(k.n as f64 * constant_a_g(k)? * r.ln());
    }
    if r < 1.0 {
        return Err(Error::Domain(format!("radius {r} < 1 for a non-homogeneous kernel")));
    }
    if r == 1.0 {
        return Ok(0.0);
    }
    let p = k.conjugate_power();
    let n = k.n;
    let res = adaptive(
        |lt: f64| {
            let rho = lt.exp();
            let dirs_mean = if k.is_radial() {
                k.radial_value(rho).abs().powf(p) * sphere_area::<f64>(n)
            } else {
                sphere_integral(n, 128, |w| {
                    let y: Vec<f64> = w.iter().map(|v| v * rho).collect();
                    norm(&k.eval(&y).unwrap_or_default()).powf(p)
                })
            };
            dirs_mean * rho.powi(n as i32)
        },
        0.0,
        r.ln(),
        Tolerance::rel(1e-12),
    )?;
    Ok(res.value)
}
