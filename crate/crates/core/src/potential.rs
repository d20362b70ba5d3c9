//! Potentials Tf = K * f of sampled functions.
//!
//! Radial data against radial kernels is handled exactly through ball
//! potentials U(t, R) = ∫_{B_R} K(t·e_1 − y) dy: a piecewise constant radial f
//! with cell values v_i on edges e_i has Tf(t) = Σ_k U(t, e_k)(v_{k−1} − v_k).
//! Cartesian data uses the midpoint rule far away, tensor Gauss rules in an
//! intermediate ring and an exact cone decomposition on the neighbouring cells.

use crate::field::{Layout, SampledFunction};
use crate::kernel::{KernelForm, KernelSpec};
use crate::quad::{adaptive_best, GaussLegendre, Tolerance};
use crate::special::{ball_volume, elliptic_ke, hyp2f1_series, sphere_area};
use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone)]
pub struct PotentialField {
    pub base: SampledFunction,
    pub kernel_id: String,
    /// Estimated relative error per point.
    pub quadrature_error: Vec<f64>,
    /// Points whose value is not trustworthy.
    pub flagged: Vec<bool>,
}

fn sigma(n: usize) -> f64 {
    // measure of S^{n−2}
    match n {
        2 => 2.0,
        3 => 2.0 * PI,
        _ => f64::NAN,
    }
}

/// ∫_{B_R} k(|t·e_1 − y|) dy by polar coordinates centred at t·e_1, where
/// `kc(ρ) = ∫_0^ρ k(s)s^{n−1} ds`.
fn polar_ball<F: Fn(f64) -> f64>(kc: F, n: usize, t: f64, big_r: f64) -> f64 {
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 400 };
    let w = |phi: f64| if n == 3 { phi.sin() } else { 1.0 };
    if t < big_r {
        let mut g = |u: f64| {
            let phi = PI * u * u;
            let s = phi.sin();
            let rho = -t * phi.cos() + (big_r * big_r - t * t * s * s).max(0.0).sqrt();
            kc(rho) * w(phi) * 2.0 * PI * u
        };
        sigma(n) * adaptive_best(&mut g, 0.0, 1.0, tol).value
    } else {
        // sin θ = (R/t) sin ψ, ψ ∈ [0, π/2]
        let mut g = |psi: f64| {
            let st = big_r / t * psi.sin();
            let ct = (1.0 - st * st).sqrt();
            let half = big_r * psi.cos();
            let (r1, r2) = (t * ct - half, t * ct + half);
            let jac = big_r * psi.cos() / (t * ct);
            let ang = if n == 3 { st } else { 1.0 };
            (kc(r2) - kc(r1.max(0.0))) * ang * jac
        };
        sigma(n) * adaptive_best(&mut g, 0.0, 0.5 * PI, tol).value
    }
}

/// u(τ) = ∫_{B_1} |τ·e_1 − y|^{α−n} dy.
pub fn unit_ball_potential(n: usize, alpha: f64, tau: f64) -> f64 {
    let nf = n as f64;
    if n == 1 {
        return if tau <= 1.0 {
            ((1.0 + tau).powf(alpha) + (1.0 - tau).powf(alpha)) / alpha
        } else {
            ((tau + 1.0).powf(alpha) - (tau - 1.0).powf(alpha)) / alpha
        };
    }
    if tau <= 0.5 {
        let om = sphere_area::<f64>(n);
        return om / alpha * hyp2f1_series((nf - alpha) / 2.0, -alpha / 2.0, nf / 2.0, tau * tau);
    }
    if tau >= 2.0 {
        let z = 1.0 / (tau * tau);
        let tail = hyp2f1_series((nf - alpha) / 2.0, 1.0 - alpha / 2.0, nf / 2.0 + 1.0, z) - 1.0;
        return ball_volume::<f64>(n) * tau.powf(alpha - nf) * (1.0 + tail);
    }
    if n == 2 && alpha == 1.0 {
        return if tau <= 1.0 {
            4.0 * elliptic_ke(tau).1
        } else {
            let (k, e) = elliptic_ke(1.0 / tau);
            4.0 * tau * (e - (1.0 - 1.0 / (tau * tau)) * k)
        };
    }
    if n == 3 && alpha == 2.0 {
        return if tau <= 1.0 { 2.0 * PI * (1.0 - tau * tau / 3.0) } else { 4.0 * PI / 3.0 / tau };
    }
    polar_ball(|rho: f64| rho.powf(alpha) / alpha, n, tau, 1.0)
}

/// Cached tabulation of u on [1/2, 2] for orders without a closed form.
struct BallTable {
    n: usize,
    alpha: f64,
    x0: f64,
    dx: f64,
    values: Vec<f64>,
}

const TABLE_NODES: usize = 4097;

impl BallTable {
    fn build(n: usize, alpha: f64) -> Self {
        let x0 = 0.5f64.ln();
        let dx = (4f64).ln() / (TABLE_NODES - 1) as f64;
        let values = (0..TABLE_NODES).map(|i| unit_ball_potential(n, alpha, (x0 + dx * i as f64).exp())).collect();
        BallTable { n, alpha, x0, dx, values }
    }

    /// Cubic Lagrange interpolation in log τ, never straddling τ = 1.
    fn eval(&self, tau: f64) -> f64 {
        let x = (tau.ln() - self.x0) / self.dx;
        let mid = (TABLE_NODES - 1) / 2;
        let i = x.floor() as isize;
        // keep the stencil on one side of τ = 1
        let (lo, hi) = if (i as usize) < mid { (0isize, mid as isize) } else { (mid as isize, TABLE_NODES as isize - 1) };
        let s = (i - 1).clamp(lo, hi - 3);
        let mut acc = 0.0;
        for a in 0..4 {
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    l *= (x - (s + b) as f64) / ((a - b) as f64);
                }
            }
            acc += l * self.values[(s + a) as usize];
        }
        acc
    }
}

static TABLES: OnceLock<std::sync::Mutex<Vec<std::sync::Arc<BallTable>>>> = OnceLock::new();

fn table_for(n: usize, alpha: f64) -> std::sync::Arc<BallTable> {
    let lock = TABLES.get_or_init(|| std::sync::Mutex::new(Vec::new()));
    {
        let g = lock.lock().unwrap();
        if let Some(t) = g.iter().find(|t| t.n == n && t.alpha == alpha) {
            return t.clone();
        }
    }
    let t = std::sync::Arc::new(BallTable::build(n, alpha));
    lock.lock().unwrap().push(t.clone());
    t
}

fn has_closed_form(n: usize, alpha: f64) -> bool {
    n == 1 || (n == 2 && alpha == 1.0) || (n == 3 && alpha == 2.0)
}

/// u(τ) using closed forms, series, or the interpolated table.
fn unit_ball_fast(n: usize, alpha: f64, tau: f64) -> f64 {
    // interpolation loses accuracy next to the kink at τ = 1
    if has_closed_form(n, alpha) || !(0.5..2.0).contains(&tau) || tau.ln().abs() < 0.03 {
        unit_ball_potential(n, alpha, tau)
    } else {
        table_for(n, alpha).eval(tau)
    }
}

/// U(t, R) = ∫_{B_R} K(t·e_1 − y) dy for a radial kernel.
pub fn ball_potential(k: &KernelSpec, t: f64, radius: f64) -> Result<f64> {
    if !k.is_radial() {
        return Err(Error::Unsupported(format!("ball potential of non-radial kernel {}", k.id)));
    }
    if radius <= 0.0 {
        return Ok(0.0);
    }
    Ok(match k.form {
        KernelForm::Homogeneous => k.radial_value(1.0) * radius.powf(k.alpha) * unit_ball_potential(k.n, k.alpha, t / radius),
        KernelForm::Perturbed { .. } => perturbed_ball(k, t, radius),
    })
}

fn ball_fast(k: &KernelSpec, t: f64, radius: f64) -> f64 {
    match k.form {
        KernelForm::Homogeneous => k.radial_value(1.0) * radius.powf(k.alpha) * unit_ball_fast(k.n, k.alpha, t / radius),
        KernelForm::Perturbed { .. } => perturbed_ball(k, t, radius),
    }
}

fn perturbed_ball(k: &KernelSpec, t: f64, radius: f64) -> f64 {
    if k.n == 1 {
        let kc = |x: f64| k.radial_cumulative(x.abs()) * x.signum();
        return kc(t + radius) - kc(t - radius);
    }
    polar_ball(|rho| k.radial_cumulative(rho), k.n, t, radius)
}

/// Tf(t) for radial f and radial kernel, with an absolute error scale.
pub fn radial_potential_at(k: &KernelSpec, f: &SampledFunction, t: f64) -> (f64, f64) {
    let mut acc = 0.0;
    let mut mag = 0.0;
    let m = f.values.len();
    for idx in 1..=m {
        let prev = f.values[idx - 1];
        let next = if idx < m { f.values[idx] } else { 0.0 };
        let dv = prev - next;
        if dv != 0.0 {
            let term = ball_fast(k, t, f.edges[idx]) * dv;
            acc += term;
            mag += term.abs();
        }
    }
    (acc, mag)
}

fn check_scalar_input(f: &SampledFunction) -> Result<()> {
    if f.components != 1 {
        return Err(Error::Unsupported("potentials of vector-valued data".into()));
    }
    Ok(())
}

/// Evaluates Tf at the nodes of `points`; the result keeps the layout and
/// weights of `points`.
pub fn apply_potential(k: &KernelSpec, f: &SampledFunction, points: &SampledFunction) -> Result<PotentialField> {
    check_scalar_input(f)?;
    if f.n != k.n || points.n != k.n {
        return Err(Error::Domain("dimension mismatch between kernel, data and points".into()));
    }
    let m = points.len();
    let (values, errors): (Vec<Vec<f64>>, Vec<f64>) = match f.layout {
        Layout::Radial => {
            if !k.is_radial() {
                return Err(Error::Unsupported(format!(
                    "kernel {} is not radial; resample the data onto a Cartesian grid",
                    k.id
                )));
            }
            if f.edges.first().copied() != Some(0.0) && f.values.first().copied().unwrap_or(0.0) != 0.0 {
                // inner hole: prepend a zero cell
                let mut edges = vec![0.0];
                edges.extend_from_slice(&f.edges);
                let mut vals = vec![0.0];
                vals.extend_from_slice(&f.values);
                let g = SampledFunction::radial(f.n, edges, vals)?;
                return apply_potential(k, &g, points);
            }
            (0..m)
                .into_par_iter()
                .map(|i| {
                    let t = points.node_radius(i);
                    let (v, mag) = radial_potential_at(k, f, t);
                    let err = 64.0 * f64::EPSILON * mag / v.abs().max(f64::MIN_POSITIVE);
                    (vec![v], err)
                })
                .unzip()
        }
        Layout::Cartesian => {
            let res: Vec<Result<(Vec<f64>, f64)>> = (0..m)
                .into_par_iter()
                .map(|i| {
                    let x = points_coords(points, i);
                    cartesian_potential_at(k, f, &x)
                })
                .collect();
            let mut vals = Vec::with_capacity(m);
            let mut errs = Vec::with_capacity(m);
            for r in res {
                let (v, e) = r?;
                vals.push(v);
                errs.push(e);
            }
            (vals, errs)
        }
        Layout::Points => return Err(Error::Unsupported("point samples carry no quadrature cells".into())),
    };
    let components = values.first().map_or(k.components, |v| v.len());
    let flat: Vec<f64> = values.into_iter().flatten().collect();
    let flagged = errors.iter().zip(flat.chunks(components)).map(|(e, v)| !(*e <= 1e-3) || v.iter().any(|x| !x.is_finite())).collect();
    Ok(PotentialField {
        base: points.with_values(components, flat)?,
        kernel_id: k.id.clone(),
        quadrature_error: errors,
        flagged,
    })
}

/// Cartesian coordinates of node i; radial nodes map to (r, 0, …).
fn points_coords(points: &SampledFunction, i: usize) -> Vec<f64> {
    match points.layout {
        Layout::Radial => {
            let mut x = vec![0.0; points.n];
            x[0] = points.nodes[i];
            x
        }
        _ => points.node(i).to_vec(),
    }
}

fn cartesian_potential_at(k: &KernelSpec, f: &SampledFunction, x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = k.n;
    let h = f.spacing;
    let comps = k.components;
    let mut acc = vec![0.0; comps];
    let mut err = 0.0;
    let exact_band = if n == 3 { 1.5 } else { 4.5 };
    let g2 = gauss_offsets(2);
    let g3 = gauss_offsets(3);
    let vol = h.powi(n as i32);
    let mut z = vec![0.0; n];
    for i in 0..f.len() {
        let v = f.values[i];
        if v == 0.0 {
            continue;
        }
        let c = f.node(i);
        let mut dmax: f64 = 0.0;
        for j in 0..n {
            z[j] = x[j] - c[j];
            dmax = dmax.max(z[j].abs());
        }
        if dmax < exact_band * h {
            let lo: Vec<f64> = (0..n).map(|j| c[j] - x[j] - 0.5 * h).collect();
            let hi: Vec<f64> = (0..n).map(|j| c[j] - x[j] + 0.5 * h).collect();
            let cell = cell_integral(k, &lo, &hi)?;
            for (a, b) in acc.iter_mut().zip(cell) {
                *a += v * b;
            }
        } else if dmax < 48.0 * h {
            let fine = product_rule(k, &z, h, &g3)?;
            let coarse = product_rule(k, &z, h, &g2)?;
            for c in 0..comps {
                err += (v * (fine[c] - coarse[c])).abs();
                acc[c] += v * if dmax < 16.0 * h { fine[c] } else { coarse[c] };
            }
        } else {
            for (a, b) in acc.iter_mut().zip(k.eval(&z)?) {
                *a += v * b * vol;
            }
        }
    }
    let size = acc.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok((acc, err / size.max(f64::MIN_POSITIVE)))
}

/// Gauss–Legendre nodes and weights on [−1/2, 1/2].
fn gauss_offsets(m: usize) -> Vec<(f64, f64)> {
    GaussLegendre::<f64>::new(m).mapped(-0.5, 0.5).collect()
}

/// Tensor Gauss rule for ∫_{cell centred at −z} K(x − y) dy.
fn product_rule(k: &KernelSpec, z: &[f64], h: f64, rule: &[(f64, f64)]) -> Result<Vec<f64>> {
    let n = z.len();
    let m = rule.len();
    let mut out = vec![0.0; k.components];
    let mut y = vec![0.0; n];
    for flat in 0..m.pow(n as u32) {
        let mut rem = flat;
        let mut w = h.powi(n as i32);
        for j in 0..n {
            let (o, wt) = rule[rem % m];
            rem /= m;
            y[j] = z[j] + o * h;
            w *= wt;
        }
        for (a, b) in out.iter_mut().zip(k.eval(&y)?) {
            *a += w * b;
        }
    }
    Ok(out)
}

const FACE_NODES: usize = 12;

fn face_rule() -> &'static GaussLegendre<f64> {
    static RULE: OnceLock<GaussLegendre<f64>> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(FACE_NODES))
}

/// ∫_a^b g(s) ds with s = d·sinh u, on panels of unit width in u.
fn sinh_integral<G: FnMut(f64) -> f64>(a: f64, b: f64, d: f64, mut g: G) -> f64 {
    let (ua, ub) = ((a / d).asinh(), (b / d).asinh());
    let panels = ((ub - ua).abs().ceil() as usize).max(1);
    let rule = face_rule();
    let w = (ub - ua) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = ua + w * p as f64;
        for (u, wt) in rule.mapped(lo, lo + w) {
            s += wt * g(d * u.sinh()) * d * u.cosh();
        }
    }
    s
}

/// ∫_{lo ≤ z ≤ hi} K(−z) dz by summing signed cones from the origin over the
/// faces of the box: Σ_faces ∫_face Kc(ω, |z|)(z·ν)/|z|^n dA, where Kc is the
/// radial primitive of K(−·) along ω = z/|z|.
pub fn cell_integral(k: &KernelSpec, lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    let n = k.n;
    let comps = k.components;
    let mut total = vec![0.0; comps];
    let cone = |z: &[f64], zn: f64| -> Vec<f64> {
        let rho = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let omega: Vec<f64> = z.iter().map(|v| -v / rho).collect();
        let s = zn / rho.powi(n as i32);
        k.cumulative_along(&omega, rho).into_iter().map(|c| c * s).collect()
    };
    for a in 0..n {
        for (plane, sign) in [(hi[a], 1.0), (lo[a], -1.0)] {
            if plane == 0.0 {
                continue;
            }
            let zn = sign * plane;
            let d = plane.abs();
            match n {
                1 => {
                    for (t, c) in total.iter_mut().zip(cone(&[plane], zn)) {
                        *t += c;
                    }
                }
                2 => {
                    let b = 1 - a;
                    for c in 0..comps {
                        let v = sinh_integral(lo[b], hi[b], d, |s| {
                            let mut z = [0.0; 2];
                            z[a] = plane;
                            z[b] = s;
                            cone(&z, zn)[c]
                        });
                        total[c] += v;
                    }
                }
                _ => {
                    let (b, cc) = match a {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    for comp in 0..comps {
                        let v = sinh_integral(lo[b], hi[b], d, |s| {
                            let d2 = (d * d + s * s).sqrt();
                            sinh_integral(lo[cc], hi[cc], d2, |t| {
                                let mut z = [0.0; 3];
                                z[a] = plane;
                                z[b] = s;
                                z[cc] = t;
                                cone(&z, zn)[comp]
                            })
                        });
                        total[comp] += v;
                    }
                }
            }
        }
    }
    if total.iter().any(|v| !v.is_finite()) {
        return Err(Error::Tolerance { estimate: total[0], error: f64::INFINITY });
    }
    Ok(total)
}

/// Moments ∫ f(y)|y|^{2i} dy of a radial piecewise constant f, exact per cell.
pub fn radial_moment(f: &SampledFunction, power: u32) -> f64 {
    let n = f.n;
    let e = n as f64 + power as f64;
    let om = sphere_area::<f64>(n);
    let terms: Vec<f64> = (0..f.len())
        .map(|i| {
            let full = crate::field::annulus_measure(n, f.edges[i], f.edges[i + 1]);
            let frac = f.weights[i] / full;
            f.values[i] * frac * om * (f.edges[i + 1].powf(e) - f.edges[i].powf(e)) / e
        })
        .collect();
    crate::quad::pairwise_sum(&terms)
}

/// Result of an L^p integral of a potential over a radial region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub value: f64,
    /// Extrapolated contribution beyond the last panel.
    pub remainder: f64,
    /// Fitted power of the per-panel contributions against ρ.
    pub decay_exponent: f64,
    pub panels: usize,
}

fn require_radial(k: &KernelSpec, f: &SampledFunction) -> Result<()> {
    check_scalar_input(f)?;
    if f.layout != Layout::Radial || !k.is_radial() {
        return Err(Error::Unsupported("tail norms need radial data and a radial kernel".into()));
    }
    Ok(())
}

/// ∫_{|x| ≥ 2r} |Tf|^p dx.
pub fn potential_tail_lp(k: &KernelSpec, f: &SampledFunction, r: f64, p: f64) -> Result<f64> {
    Ok(potential_tail_estimate(k, f, r, p)?.value)
}

pub fn potential_tail_estimate(k: &KernelSpec, f: &SampledFunction, r: f64, p: f64) -> Result<TailEstimate> {
    require_radial(k, f)?;
    if f.support_radius > r * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("support radius {} exceeds r = {r}", f.support_radius)));
    }
    let n = k.n as f64;
    // the first radial moment of degree j with (n − α + j)p ≤ n spoils integrability
    let l1 = f.map_values(f64::abs).integral();
    let mut j = 0u32;
    while (n - k.alpha + j as f64) * p <= n {
        let mj = radial_moment(f, j);
        let scale = l1 * f.support_radius.powi(j as i32);
        if mj.abs() > 1e-9 * scale {
            return Err(Error::Decay(format!(
                "moment of degree {j} is {mj:e}; the potential decays like |x|^{} which is not {p}-integrable \
                 at infinity (moments must vanish up to degree {})",
                k.alpha - n - j as f64,
                (2.0 * k.alpha - n).floor().max(0.0)
            )));
        }
        j += 2;
    }
    radial_lp_integral(k, f, 2.0 * r, f64::INFINITY, p)
}

/// ∫_{a ≤ |x| ≤ b} |Tf|^p dx on doubling panels; b = ∞ triggers power-law
/// extrapolation of the remainder.
pub fn radial_lp_integral(k: &KernelSpec, f: &SampledFunction, a: f64, b: f64, p: f64) -> Result<TailEstimate> {
    require_radial(k, f)?;
    if !(a >= 0.0) || !(b > a) {
        return Err(Error::Domain(format!("radial range [{a}, {b}] is empty or negative")));
    }
    let n = k.n;
    let om = sphere_area::<f64>(n);
    let rule = GaussLegendre::<f64>::new(10);
    // geometric panels cannot start at the origin; a small ball goes first on a linear rule
    let mut total = 0.0;
    let mut lo = a;
    if a == 0.0 {
        let a0 = (1e-3 * f.support_radius.max(f64::MIN_POSITIVE)).min(b);
        total = om * rule
            .mapped(0.0, a0)
            .map(|(t, w)| w * radial_potential_at(k, f, t).0.abs().powf(p) * t.powi(n as i32 - 1))
            .sum::<f64>();
        lo = a0;
        if lo >= b {
            return Ok(TailEstimate { value: total, remainder: 0.0, decay_exponent: f64::NAN, panels: 1 });
        }
    }
    let panel = |lo: f64, hi: f64| -> f64 {
        // Tf has kinks at the cell edges of f; panels break there
        let mut cuts = vec![lo];
        cuts.extend(f.edges.iter().copied().filter(|e| *e > lo && *e < hi));
        cuts.push(hi);
        let pts: Vec<(f64, f64)> = cuts.windows(2).flat_map(|w| rule.mapped(w[0].ln(), w[1].ln())).collect();
        let vals: Vec<f64> = pts
            .par_iter()
            .map(|&(x, w)| {
                let t = x.exp();
                let (v, _) = radial_potential_at(k, f, t);
                w * v.abs().powf(p) * t.powi(n as i32)
            })
            .collect();
        om * vals.iter().sum::<f64>()
    };
    let ratio = 2f64.powf(0.25);
    let mut contributions: Vec<f64> = Vec::new();
    let max_panels = 4 * 200;
    loop {
        let hi = if b.is_finite() { (lo * ratio).min(b) } else { lo * ratio };
        let c = panel(lo, hi);
        contributions.push(c);
        total += c;
        lo = hi;
        if b.is_finite() {
            if lo >= b {
                return Ok(TailEstimate { value: total, remainder: 0.0, decay_exponent: f64::NAN, panels: contributions.len() });
            }
            continue;
        }
        let m = contributions.len();
        let window = 14; // ≈ one decade of ρ
        if m >= window + 4 {
            let xs: Vec<f64> = (m - window..m).map(|i| i as f64 * ratio.ln()).collect();
            let ys: Vec<f64> = contributions[m - window..].iter().map(|c| c.max(f64::MIN_POSITIVE).ln()).collect();
            let fit = crate::fit::linear_fit(&xs, &ys).expect("distinct abscissae");
            let slope = fit.slope;
            if slope > -0.05 {
                if m >= 3 * window {
                    return Err(Error::Decay(format!(
                        "tail contributions do not decay (fitted power {slope:.3} of ρ); a moment condition is unmet"
                    )));
                }
                continue;
            }
            let q = ratio.powf(slope);
            let remainder = c * q / (1.0 - q);
            if remainder <= 1e-6 * total || total == 0.0 {
                return Ok(TailEstimate { value: total + remainder, remainder, decay_exponent: slope, panels: m });
            }
        }
        if m >= max_panels {
            return Err(Error::Decay(format!("tail integral not converged after {m} panels")));
        }
    }
}

/// ∫_{R^n} |Tf|^p: cell-wise Gauss rule inside the support, panels out to 2r,
/// and the extrapolated tail beyond.
pub fn potential_lp_power(k: &KernelSpec, f: &SampledFunction, p: f64) -> Result<f64> {
    require_radial(k, f)?;
    let r = *f.edges.last().unwrap();
    let rule = GaussLegendre::<f64>::new(3);
    let n = k.n;
    let om = sphere_area::<f64>(n);
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for w in f.edges.windows(2) {
        if w[0] == 0.0 {
            // Tf is smooth at the origin; a wider rule covers the first cell
            let r6 = GaussLegendre::<f64>::new(6);
            nodes.extend(r6.mapped(0.0, w[1]));
        } else {
            nodes.extend(rule.mapped(w[0], w[1]));
        }
    }
    let inner: Vec<f64> = nodes
        .par_iter()
        .map(|&(t, wt)| {
            let (v, _) = radial_potential_at(k, f, t);
            wt * v.abs().powf(p) * t.powi(n as i32 - 1)
        })
        .collect();
    let inner = om * crate::quad::pairwise_sum(&inner);
    let middle = radial_lp_integral(k, f, r, 2.0 * r, p)?.value;
    let tail = potential_tail_lp(k, f, r, p)?;
    Ok(inner + middle + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::uniform_edges;

    #[test]
    fn ball_potential_at_centre() {
        for &(n, a) in &[(1usize, 0.5), (2, 1.0), (2, 0.5), (3, 2.0), (3, 1.5)] {
            let k = KernelSpec::riesz(n, a).unwrap();
            let u = ball_potential(&k, 0.0, 1.0).unwrap();
            let exact = sphere_area::<f64>(n) / a;
            assert!((u - exact).abs() < 1e-13 * exact, "n={n} α={a}");
        }
    }

    #[test]
    fn branches_agree_at_boundaries() {
        for &(n, a) in &[(2usize, 1.0), (2, 0.5), (3, 1.5), (3, 2.0), (2, 1.7)] {
            for &tau in &[0.5, 2.0] {
                let series = unit_ball_potential(n, a, tau);
                let polar = polar_ball(|r: f64| r.powf(a) / a, n, tau, 1.0);
                assert!((series - polar).abs() < 1e-11 * series, "n={n} α={a} τ={tau}: {series} {polar}");
            }
        }
    }

    #[test]
    fn table_matches_direct() {
        for &tau in &[0.55, 0.8, 0.999, 1.0, 1.001, 1.3, 1.95] {
            let d = unit_ball_potential(2, 0.5, tau);
            let t = unit_ball_fast(2, 0.5, tau);
            assert!((d - t).abs() < 1e-10 * d, "τ={tau}");
        }
    }

    #[test]
    fn disk_indicator_at_origin() {
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let f = SampledFunction::radial(2, uniform_edges(1.0, 8), vec![1.0; 8]).unwrap();
        let pts = SampledFunction::points(2, vec![0.0, 0.0, 3.0, 0.0]).unwrap();
        let tf = apply_potential(&k, &f, &pts).unwrap();
        assert!((tf.base.values[0] - 2.0 * PI).abs() < 1e-13);
        let far = 4.0 * (3.0 * (elliptic_ke(1.0 / 3.0).1) - (1.0 - 1.0 / 9.0) * 3.0 * elliptic_ke(1.0 / 3.0).0);
        assert!((tf.base.values[1] - far).abs() < 1e-12);
    }

    #[test]
    fn cell_integral_unit_square() {
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let v = cell_integral(&k, &[0.0, 0.0], &[1.0, 1.0]).unwrap()[0];
        assert!((v - 2.0 * 1f64.asinh()).abs() < 1e-12);
        let v = cell_integral(&k, &[-1.0, -1.0], &[1.0, 1.0]).unwrap()[0];
        assert!((v - 8.0 * 1f64.asinh()).abs() < 1e-12);
        // off-centre box by brute force in polar coordinates
        let v = cell_integral(&k, &[0.3, -0.2], &[0.8, 0.4]).unwrap()[0];
        let gl = GaussLegendre::<f64>::new(40);
        let bf = gl.integrate(0.3, 0.8, |x| gl.integrate(-0.2, 0.4, |y| 1.0 / (x * x + y * y).sqrt()));
        assert!((v - bf).abs() < 1e-11);
    }

    #[test]
    fn cell_integral_three_dimensions() {
        let k = KernelSpec::riesz(3, 2.0).unwrap();
        // ∫_{[-1,1]^3} |z|^{-1} dz
        let v = cell_integral(&k, &[-1.0; 3], &[1.0; 3]).unwrap()[0];
        let gl = GaussLegendre::<f64>::new(30);
        let bf = 8.0
            * gl.integrate(0.0, 1.0, |x| {
                gl.integrate(0.0, 1.0, |y| gl.integrate(0.0, 1.0, |z| 1.0 / (x * x + y * y + z * z).sqrt()))
            });
        assert!((v - bf).abs() < 1e-5 * bf, "{v} {bf}");
    }

    #[test]
    fn cartesian_matches_radial_far_away() {
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let f = SampledFunction::cartesian(2, 1.0, 32, 1, |x| vec![if x[0].abs() < 0.5 && x[1].abs() < 0.5 { 1.0 } else { 0.0 }]).unwrap();
        let pts = SampledFunction::points(2, vec![0.0, 0.0, 0.01, 0.02]).unwrap();
        let tf = apply_potential(&k, &f, &pts).unwrap();
        let exact0 = 4.0 * 2.0 * (0.5f64 / 0.5).asinh() * 0.5;
        assert!((tf.base.values[0] - exact0).abs() < 1e-6 * exact0, "{} {}", tf.base.values[0], exact0);
        let x = [0.01, 0.02];
        let exact1 = cell_integral(&k, &[-0.5 - x[0], -0.5 - x[1]], &[0.5 - x[0], 0.5 - x[1]]).unwrap()[0];
        assert!((tf.base.values[1] - exact1).abs() < 1e-6 * exact1);
    }

    #[test]
    fn tail_decay_diagnostic() {
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let f = SampledFunction::radial(2, uniform_edges(1.0, 4), vec![1.0; 4]).unwrap();
        assert!(matches!(potential_tail_lp(&k, &f, 1.0, 2.0), Err(Error::Decay(_))));
    }

    #[test]
    fn tail_against_ring_average_oracle() {
        // Tf(t) = ∫_0^1 ring(t, s) s ds, then ∫_2^∞ 2π t |Tf|^4 dt
        let k = KernelSpec::riesz(2, 0.5).unwrap();
        let f = SampledFunction::radial(2, uniform_edges(1.0, 4), vec![1.0; 4]).unwrap();
        let est = potential_tail_estimate(&k, &f, 1.0, 4.0).unwrap();
        let gs = GaussLegendre::<f64>::new(24);
        let tf = |t: f64| gs.integrate(0.0, 1.0, |s| crate::kernel::ring_average(&k, t, s).unwrap() * s);
        let gt = GaussLegendre::<f64>::new(16);
        let mut oracle = 0.0;
        let mut lo = 2.0f64;
        while lo < 4096.0 {
            oracle += gt.integrate(lo.ln(), (2.0 * lo).ln(), |x| {
                let t = x.exp();
                2.0 * PI * t * t * tf(t).powi(4)
            });
            lo *= 2.0;
        }
        // Tf ≈ π t^{−3/2} beyond
        oracle += 2.0 * PI * PI.powi(4) * lo.powi(-4) / 4.0;
        assert!((est.value / oracle - 1.0).abs() < 1e-3, "{} {}", est.value, oracle);
        assert!((est.decay_exponent + 4.0).abs() < 0.1);
    }

    #[test]
    fn range_from_origin() {
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let f = SampledFunction::radial(2, uniform_edges(0.7, 7), vec![2.0, 1.0, 3.0, 0.5, 1.0, 2.0, 1.0]).unwrap();
        let got = radial_lp_integral(&k, &f, 0.0, 1.5, 2.0).unwrap().value;
        let rule = GaussLegendre::<f64>::new(10);
        let mut oracle = 0.0;
        for i in 0..600 {
            let (lo, hi) = (1.5 * i as f64 / 600.0, 1.5 * (i + 1) as f64 / 600.0);
            oracle += rule.mapped(lo, hi).map(|(t, w)| w * radial_potential_at(&k, &f, t).0.powi(2) * t).sum::<f64>();
        }
        oracle *= 2.0 * PI;
        assert!((got / oracle - 1.0).abs() < 1e-6, "{got} {oracle}");
        assert!(radial_lp_integral(&k, &f, 1.0, 1.0, 2.0).is_err());
    }
}
