//! Extremal families: Adams profiles φ_{ε,r}, polynomial-moment
//! normalization, the Ruf normalization ψ = φ̃/‖(φ̃, Tφ̃)‖_q, parameter
//! schedules and Moser sequences.

use crate::field::{annulus_measure, geometric_edges, q_norm, Layout, SampledFunction};
use crate::kernel::{constant_a_g, norm, KernelForm, KernelSpec};
use crate::poly::{monomial_ball_integral, monomial_box_integral, multi_indices, MultiIndex, Poly};
use crate::potential::potential_lp_power;
use crate::quad::{pairwise_sum, GaussLegendre};
use crate::special::{ball_volume, sphere_area};
use crate::{Error, Result};
use serde::{Serialize, Serializer};

pub use crate::kernel::b_r_constant;

/// Default number of geometric cells between εr and r.
pub const PROFILE_CELLS: usize = 4096;

fn ser_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalSpec {
    pub epsilon: f64,
    pub r: f64,
    #[serde(serialize_with = "ser_extended")]
    pub q: f64,
    pub theta: Option<f64>,
    pub sigma: f64,
    pub a_g: f64,
    pub b_r: f64,
    /// A_g·log(1/(εr)^n) + b_r.
    pub b_eps_r: f64,
    /// Scale applied by the Ruf normalization, once known.
    pub normalization: Option<f64>,
}

impl ExtremalSpec {
    /// Radii r < 1 are accepted for homogeneous kernels, where b_r = n·A_g·log r
    /// is negative.
    pub fn new(k: &KernelSpec, epsilon: f64, r: f64, q: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!("ε = {epsilon} outside (0, 1)")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("radius {r} must be positive")));
        }
        if epsilon * r >= 1.0 {
            return Err(Error::Domain(format!("ε·r = {} must be < 1", epsilon * r)));
        }
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("q = {q} must lie in [1, ∞]")));
        }
        let a_g = constant_a_g(k)?;
        let b_r = b_r_constant(k, r)?;
        let b_eps_r = a_g * k.n as f64 * (1.0 / (epsilon * r)).ln() + b_r;
        Ok(ExtremalSpec { epsilon, r, q, theta: None, sigma: 1.0, a_g, b_r, b_eps_r, normalization: None })
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::Domain(format!("σ = {sigma} outside (0, 1]")));
        }
        self.sigma = sigma;
        Ok(self)
    }

    /// log(1/ε^n).
    pub fn log_inv_eps_n(&self, n: usize) -> f64 {
        n as f64 * (1.0 / self.epsilon).ln()
    }
}

/// Orthonormal basis of the polynomials of degree ≤ m in L²(B_r).
#[derive(Debug, Clone, PartialEq)]
pub struct BallPolyBasis {
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub basis: Vec<Poly>,
}

pub fn ball_poly_basis(n: usize, m: usize, r: f64) -> Result<BallPolyBasis> {
    if !(1..=3).contains(&n) {
        return Err(Error::Domain(format!("dimension {n} outside 1..=3")));
    }
    if m > n {
        return Err(Error::Domain(format!("degree {m} exceeds the dimension {n}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    let monos: Vec<MultiIndex> = (0..=m as u32).flat_map(|d| multi_indices(n, d)).collect();
    let d = monos.len();
    // orthonormalize on B_1, then transplant by v(y) ↦ r^{−n/2}v(y/r)
    let mut g = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let k = [monos[i][0] + monos[j][0], monos[i][1] + monos[j][1], monos[i][2] + monos[j][2]];
            g[i][j] = monomial_ball_integral(n, &k, 1.0);
        }
    }
    let l = cholesky(&g)?;
    let piv: Vec<f64> = (0..d).map(|i| l[i][i] * l[i][i]).collect();
    let cond = piv.iter().cloned().fold(0.0, f64::max) / piv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(cond <= 1e12) {
        return Err(Error::Precision(format!("monomial Gram matrix condition ≈ {cond:e}")));
    }
    // rows of L^{-1}
    let mut inv = vec![vec![0.0; d]; d];
    for i in 0..d {
        inv[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let s: f64 = (j..i).map(|k| l[i][k] * inv[k][j]).sum();
            inv[i][j] = -s / l[i][i];
        }
    }
    let basis = (0..d)
        .map(|i| {
            let mut p = Poly::zero(n);
            for j in 0..=i {
                let deg: u32 = monos[j].iter().sum();
                p.add_term(monos[j], inv[i][j] * r.powf(-(deg as f64) - 0.5 * n as f64));
            }
            p
        })
        .collect();
    Ok(BallPolyBasis { n, m, r, basis })
}

fn cholesky(g: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = g.len();
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = g[i][i] - s;
                if !(v > 0.0) {
                    return Err(Error::Precision("Gram matrix is not positive definite".into()));
                }
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = (g[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let d = b.len();
    for c in 0..d {
        let p = (c..d).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return Err(Error::Precision("singular moment system".into()));
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..d {
            let f = a[i][c] / a[c][c];
            for j in c..d {
                a[i][j] -= f * a[c][j];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}

impl BallPolyBasis {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Exact L²(B_r) Gram matrix of the basis.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.basis.iter().map(|a| self.basis.iter().map(|b| a.mul(b).ball_integral(self.r)).collect()).collect()
    }

    /// P_m^r(y, z) = Σ_k v_k(y)v_k(z).
    pub fn kernel(&self, y: &[f64], z: &[f64]) -> f64 {
        self.basis.iter().map(|v| v.eval(y) * v.eval(z)).sum()
    }

    /// ∫ f·v_k for every basis element, exact per cell for piecewise constant f.
    pub fn inner_products(&self, f: &SampledFunction) -> Result<Vec<f64>> {
        check_normalizable(f, self.n)?;
        Ok(self
            .basis
            .iter()
            .map(|v| {
                let terms: Vec<f64> = (0..f.len()).map(|i| f.value(i)[0] * cell_poly_integral(f, i, v)).collect();
                pairwise_sum(&terms)
            })
            .collect())
    }

    /// Cell averages of P_m^r f on the grid of f (zero outside B_r).
    pub fn project(&self, f: &SampledFunction) -> Result<SampledFunction> {
        let c = self.inner_products(f)?;
        let mut p = Poly::zero(self.n);
        for (ck, v) in c.iter().zip(&self.basis) {
            p = p.add(&v.scale(*ck));
        }
        let region = cells_in_ball(f, self.r);
        let values = (0..f.len())
            .map(|i| if region[i] { cell_poly_integral(f, i, &p) / cell_geometric_measure(f, i) * cell_fraction(f, i) } else { 0.0 })
            .collect();
        f.with_values(1, values)
    }
}

fn check_normalizable(f: &SampledFunction, n: usize) -> Result<()> {
    if f.n != n {
        return Err(Error::Domain("dimension mismatch between data and basis".into()));
    }
    if f.layout == Layout::Points {
        return Err(Error::Unsupported("point samples carry no cells".into()));
    }
    Ok(())
}

/// Measure of cell i ignoring any weight scaling.
fn cell_geometric_measure(f: &SampledFunction, i: usize) -> f64 {
    match f.layout {
        Layout::Radial => annulus_measure(f.n, f.edges[i], f.edges[i + 1]),
        _ => f.spacing.powi(f.n as i32),
    }
}

/// Weight of cell i relative to its full geometric measure (½ on half domains).
fn cell_fraction(f: &SampledFunction, i: usize) -> f64 {
    f.weights[i] / cell_geometric_measure(f, i)
}

/// ∫ over the full geometric cell i of p.
fn cell_poly_integral(f: &SampledFunction, i: usize, p: &Poly) -> f64 {
    match f.layout {
        Layout::Radial => {
            let (a, b) = (f.edges[i], f.edges[i + 1]);
            p.terms.iter().map(|(k, c)| c * crate::poly::monomial_annulus_integral(f.n, k, a, b)).sum()
        }
        _ => {
            let h = 0.5 * f.spacing;
            let x = f.node(i);
            let lo: Vec<f64> = x.iter().map(|v| v - h).collect();
            let hi: Vec<f64> = x.iter().map(|v| v + h).collect();
            p.terms.iter().map(|(k, c)| c * monomial_box_integral(f.n, k, &lo, &hi)).sum()
        }
    }
}

/// Radial: cells lying inside B_r. Cartesian: cells whose centre lies in B_r.
fn cells_in_ball(f: &SampledFunction, r: f64) -> Vec<bool> {
    let lim = r * (1.0 + 1e-12);
    (0..f.len())
        .map(|i| match f.layout {
            Layout::Radial => f.edges[i + 1] <= lim,
            _ => f.node_radius(i) <= lim,
        })
        .collect()
}

/// Returns f − Σ c_l A_l, where A_l are cell averages of the test polynomials
/// of degree ≤ m on B_r and the c_l make every moment ∫ f̃·y^k, |k| ≤ m, vanish
/// exactly on the piecewise constant representation. Radial data uses the
/// radial test polynomials |y|^{2j}, 2j ≤ m; vector data is normalized per
/// component.
pub fn moment_normalize(f: &SampledFunction, basis: &BallPolyBasis) -> Result<SampledFunction> {
    check_normalizable(f, basis.n)?;
    let r = basis.r;
    let region = cells_in_ball(f, r);
    for i in 0..f.len() {
        if !region[i] && f.magnitude(i) != 0.0 {
            return Err(Error::Domain(format!("support of the data exceeds the ball of radius {r}")));
        }
    }
    let n = f.n;
    let tests: Vec<Poly> = match f.layout {
        Layout::Radial => (0..=basis.m / 2).map(|j| Poly::norm_sq(n).pow(j as u32).scale(r.powi(-2 * j as i32))).collect(),
        _ => (0..=basis.m as u32)
            .flat_map(|d| multi_indices(n, d))
            .map(|k| Poly::monomial(n, k, r.powi(-(k.iter().sum::<u32>() as i32))))
            .collect(),
    };
    let cells: Vec<usize> = (0..f.len()).filter(|&i| region[i]).collect();
    // integrals[l][c] = ∫_cell P_l, averages from the same numbers
    let integrals: Vec<Vec<f64>> = tests.iter().map(|p| cells.iter().map(|&i| cell_poly_integral(f, i, p)).collect()).collect();
    let meas: Vec<f64> = cells.iter().map(|&i| cell_geometric_measure(f, i)).collect();
    let frac: Vec<f64> = cells.iter().map(|&i| cell_fraction(f, i)).collect();
    let d = tests.len();
    let mut g = vec![vec![0.0; d]; d];
    for j in 0..d {
        for l in 0..d {
            let terms: Vec<f64> = (0..cells.len()).map(|c| frac[c] * integrals[l][c] / meas[c] * integrals[j][c]).collect();
            g[j][l] = pairwise_sum(&terms);
        }
    }
    let comps = f.components;
    let mut values = f.values.clone();
    for comp in 0..comps {
        let rhs: Vec<f64> = (0..d)
            .map(|j| {
                let terms: Vec<f64> = cells.iter().enumerate().map(|(c, &i)| f.value(i)[comp] * frac[c] * integrals[j][c]).collect();
                pairwise_sum(&terms)
            })
            .collect();
        let coef = solve_dense(g.clone(), rhs)?;
        for (c, &i) in cells.iter().enumerate() {
            let corr: f64 = (0..d).map(|l| coef[l] * integrals[l][c] / meas[c]).sum();
            values[i * comps + comp] -= corr;
        }
    }
    f.with_values(comps, values)
}

/// Moment degree used by the extremal construction: n − 1, or none when
/// n/2 > α.
pub fn default_moment_degree(k: &KernelSpec) -> Option<usize> {
    if k.n as f64 / 2.0 > k.alpha {
        None
    } else {
        Some(k.n - 1)
    }
}

pub fn adams_profile(k: &KernelSpec, spec: &ExtremalSpec) -> Result<SampledFunction> {
    adams_profile_with(k, spec, PROFILE_CELLS)
}

/// φ_{ε,r}(y) = K(−y)|K(−y)|^{α/(n−α)−1} on εr < |y| ≤ r. Radial kernels use
/// `cells` geometric annuli whose values carry the exact ∫|K|^{n/(n−α)} of
/// each annulus; other kernels use a Cartesian grid on [−r, r]^n with
/// `cells` cells per side (capped per dimension).
pub fn adams_profile_with(k: &KernelSpec, spec: &ExtremalSpec, cells: usize) -> Result<SampledFunction> {
    let inner = spec.epsilon * spec.r;
    if inner >= 1.0 {
        return Err(Error::Domain(format!("ε·r = {inner} must be < 1")));
    }
    let n = k.n;
    let p = k.conjugate_power();
    let s = k.alpha / (n as f64 - k.alpha);
    if k.is_radial() {
        let edges = geometric_edges(inner, spec.r, cells);
        let om = sphere_area::<f64>(n);
        let gl = GaussLegendre::<f64>::new(8);
        let values = edges
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                if i == 0 {
                    return 0.0;
                }
                let (a, b) = (w[0], w[1]);
                let mass = match k.form {
                    KernelForm::Homogeneous => k.radial_value(1.0).abs().powf(p) * om * (b / a).ln(),
                    KernelForm::Perturbed { .. } => {
                        om * gl.integrate(a.ln(), b.ln(), |lt| {
                            let rho = lt.exp();
                            k.radial_value(rho).abs().powf(p) * rho.powi(n as i32)
                        })
                    }
                };
                let sign = k.radial_value((a * b).sqrt()).signum();
                sign * (mass / annulus_measure(n, a, b)).powf(k.alpha / n as f64)
            })
            .collect();
        return SampledFunction::radial(n, edges, values);
    }
    let per_side = match n {
        1 => cells,
        2 => cells.min(256),
        _ => cells.min(96),
    };
    let comps = k.components;
    SampledFunction::cartesian(n, spec.r, per_side, comps, |y| {
        let rho = norm(y);
        if rho <= inner || rho > spec.r {
            return vec![0.0; comps];
        }
        let minus: Vec<f64> = y.iter().map(|v| -v).collect();
        let kv = k.eval(&minus).unwrap_or_else(|_| vec![0.0; comps]);
        let mag = norm(&kv);
        if mag == 0.0 {
            return vec![0.0; comps];
        }
        kv.iter().map(|c| c * mag.powf(s - 1.0)).collect()
    })
}

/// Chooses r from r^n = (A_g/(2C_1))·(log(1/ε^n))^{1/q'}, with ε replaced by
/// e^{−1/((1−θ)n)} when θ is given, and enforces
/// b_{ε,r} ≥ ½A_g log(1/ε^n) and C_1 r^n/b_{ε,r} ≤ (log(1/ε^n))^{−1/q}.
pub fn schedule_parameters(k: &KernelSpec, epsilon: f64, q: f64, c1: f64, theta: Option<f64>) -> Result<ExtremalSpec> {
    if !(c1 > 0.0) || !c1.is_finite() {
        return Err(Error::Domain(format!("C_1 = {c1} must be positive")));
    }
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("q = {q} must lie in [1, ∞]")));
    }
    let n = k.n as f64;
    let eps = match theta {
        Some(t) => {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Domain(format!("θ = {t} outside (0, 1)")));
            }
            (-1.0 / ((1.0 - t) * n)).exp()
        }
        None => epsilon,
    };
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε = {eps} outside (0, 1)")));
    }
    let l = n * (1.0 / eps).ln();
    let (inv_q, inv_qp) = if q.is_infinite() { (0.0, 1.0) } else { (1.0 / q, 1.0 - 1.0 / q) };
    let a_g = constant_a_g(k)?;
    let r = (a_g / (2.0 * c1) * l.powf(inv_qp)).powf(1.0 / n);
    if r < 1.0 && !k.homogeneous {
        return Err(Error::Regime(format!("scheduled r = {r} < 1 for a non-homogeneous kernel")));
    }
    if eps * r >= 1.0 {
        return Err(Error::Regime(format!("ε·r = {} ≥ 1; need ε < {}", eps * r, 1.0 / r)));
    }
    let mut spec = ExtremalSpec::new(k, eps, r, q)?;
    spec.theta = theta;
    if spec.b_eps_r < 0.5 * a_g * l {
        return Err(Error::Regime(format!("b_(ε,r) = {} below ½A_g log(1/ε^n) = {}", spec.b_eps_r, 0.5 * a_g * l)));
    }
    let lhs = c1 * r.powf(n) / spec.b_eps_r;
    let bound = l.powf(-inv_q);
    if lhs > bound {
        return Err(Error::Regime(format!("C_1 r^n/b_(ε,r) = {lhs} exceeds (log 1/ε^n)^(−1/q) = {bound}")));
    }
    Ok(spec)
}

/// ψ = f̃/q_norm(‖f̃‖_{n/α}, ‖Tf̃‖_{n/α}) and the applied scale.
pub fn ruf_normalize(f_tilde: &SampledFunction, tf_norm: f64, q: f64, alpha: f64) -> Result<(SampledFunction, f64)> {
    let p = f_tilde.n as f64 / alpha;
    let a = f_tilde.lp_norm(p)?;
    let denom = q_norm(a, tf_norm, q, f_tilde.n, alpha);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Domain(format!("cannot normalize: norms ({a}, {tf_norm})")));
    }
    let scale = 1.0 / denom;
    Ok((f_tilde.scale(scale), scale))
}

/// One member of an extremal family with its norms.
#[derive(Debug, Clone)]
pub struct ExtremalFamily {
    pub spec: ExtremalSpec,
    pub profile: SampledFunction,
    /// φ̃, the moment-normalized profile.
    pub normalized: SampledFunction,
    /// ‖φ̃‖_{n/α}.
    pub profile_norm: f64,
    /// ‖Tφ̃‖_{n/α} over R^n.
    pub potential_norm: f64,
    pub psi: SampledFunction,
}

/// Builds φ_{ε,r}, normalizes its moments up to `moment_degree` and applies
/// the Ruf normalization. Needs a radial kernel.
pub fn extremal_family(k: &KernelSpec, spec: &ExtremalSpec, moment_degree: Option<usize>, cells: usize) -> Result<ExtremalFamily> {
    let profile = adams_profile_with(k, spec, cells)?;
    let normalized = match moment_degree {
        Some(m) => moment_normalize(&profile, &ball_poly_basis(k.n, m, spec.r)?)?,
        None => profile.clone(),
    };
    let p = k.n as f64 / k.alpha;
    let profile_norm = normalized.lp_norm(p)?;
    let potential_norm = potential_lp_power(k, &normalized, p)?.powf(1.0 / p);
    let (psi, scale) = ruf_normalize(&normalized, potential_norm, spec.q, k.alpha)?;
    let mut spec = *spec;
    spec.normalization = Some(scale);
    Ok(ExtremalFamily { spec, profile, normalized, profile_norm, potential_norm, psi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoserDomain {
    FullBall,
    /// The half ball {x_n > 0}; the origin sits on its boundary.
    HalfBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoserVariant {
    /// log(1/ε^n) on B_ε, log(1/|x|^n) up to 1/2, linear to 0 on [1/2, 3/4].
    Smoothed,
    /// log(1/ε) on B_ε, log(1/|x|) up to 1, 0 beyond.
    Truncated,
}

#[derive(Debug, Clone)]
pub struct MoserProfile {
    pub epsilon: f64,
    pub domain: MoserDomain,
    pub variant: MoserVariant,
    pub value: SampledFunction,
    /// |∇u| with cell values matching ∫|∇u|^n per cell.
    pub gradient: SampledFunction,
    /// Exact ∫_Ω |∇u|^n.
    pub gradient_power_exact: f64,
}

pub fn moser_profile(n: usize, epsilon: f64, domain: MoserDomain, variant: MoserVariant, cells: usize) -> Result<MoserProfile> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("ε = {epsilon} outside (0, 1/2)")));
    }
    if !(1..=3).contains(&n) {
        return Err(Error::Domain(format!("dimension {n} outside 1..=3")));
    }
    let nf = n as f64;
    let om = sphere_area::<f64>(n);
    let ln2 = 2f64.ln();
    let (edges, u, du, exact): (Vec<f64>, Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>, f64) = match variant {
        MoserVariant::Truncated => (
            geometric_edges(epsilon, 1.0, cells),
            Box::new(move |rho: f64| if rho <= epsilon { (1.0 / epsilon).ln() } else if rho < 1.0 { (1.0 / rho).ln() } else { 0.0 }),
            Box::new(move |rho: f64| if rho > epsilon && rho < 1.0 { 1.0 / rho } else { 0.0 }),
            om * (1.0 / epsilon).ln(),
        ),
        MoserVariant::Smoothed => {
            let mut e = geometric_edges(epsilon, 0.5, cells);
            let tail = 64;
            for i in 1..=tail {
                e.push(0.5 + 0.25 * i as f64 / tail as f64);
            }
            let slope = 4.0 * nf * ln2;
            (
                e,
                Box::new(move |rho: f64| {
                    if rho <= epsilon {
                        nf * (1.0 / epsilon).ln()
                    } else if rho <= 0.5 {
                        nf * (1.0 / rho).ln()
                    } else if rho <= 0.75 {
                        nf * ln2 * (0.75 - rho) * 4.0
                    } else {
                        0.0
                    }
                }),
                Box::new(move |rho: f64| {
                    if rho > epsilon && rho <= 0.5 {
                        nf / rho
                    } else if rho > 0.5 && rho < 0.75 {
                        slope
                    } else {
                        0.0
                    }
                }),
                om * (nf.powf(nf) * (0.5 / epsilon).ln() + slope.powf(nf) * (0.75f64.powf(nf) - 0.5f64.powf(nf)) / nf),
            )
        }
    };
    let value = SampledFunction::radial_from_fn(n, edges.clone(), &*u)?;
    let gradient = SampledFunction::radial_from_fn(n, edges, |rho| du(rho).powf(nf))?.map_values(|v| v.powf(1.0 / nf));
    let (value, gradient, exact) = match domain {
        MoserDomain::FullBall => (value, gradient, exact),
        MoserDomain::HalfBall => (value.scale_weights(0.5), gradient.scale_weights(0.5), 0.5 * exact),
    };
    Ok(MoserProfile { epsilon, domain, variant, value, gradient, gradient_power_exact: exact })
}

/// |B_r|, used to express radial moment corrections.
pub fn ball_measure(n: usize, r: f64) -> f64 {
    ball_volume::<f64>(n) * r.powi(n as i32)
}
