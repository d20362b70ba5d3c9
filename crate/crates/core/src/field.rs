//! Sampled functions on R^n: radial cells, Cartesian cells or bare
//! evaluation points, with norms, dilations and the large/small split.

use crate::quad::{pairwise_sum, GaussLegendre};
use crate::special::{ball_volume, sphere_area};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Piecewise constant on annuli [edges[i], edges[i+1]].
    Radial,
    /// Piecewise constant on cubes of side `spacing` centred at the nodes.
    Cartesian,
    /// Evaluation points with unit weights.
    Points,
}

/// Values are stored row-major: node i owns `values[i*components..(i+1)*components]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub layout: Layout,
    pub n: usize,
    pub components: usize,
    /// Radii (radial) or flattened coordinates (stride n).
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub support_radius: f64,
    /// Radial cell edges, `nodes.len() + 1` of them; empty otherwise.
    pub edges: Vec<f64>,
    /// Cartesian cell side; zero otherwise.
    pub spacing: f64,
}

/// Measure of the annulus a ≤ |y| ≤ b in R^n.
pub fn annulus_measure(n: usize, a: f64, b: f64) -> f64 {
    ball_volume::<f64>(n) * (b.powi(n as i32) - a.powi(n as i32))
}

/// [0, r_min, …, r_max] with `cells` geometric cells between r_min and r_max.
pub fn geometric_edges(r_min: f64, r_max: f64, cells: usize) -> Vec<f64> {
    let mut e = Vec::with_capacity(cells + 2);
    e.push(0.0);
    let ratio = (r_max / r_min).ln();
    for i in 0..=cells {
        e.push(r_min * (ratio * i as f64 / cells as f64).exp());
    }
    *e.last_mut().unwrap() = r_max;
    e
}

pub fn uniform_edges(r_max: f64, cells: usize) -> Vec<f64> {
    (0..=cells).map(|i| r_max * i as f64 / cells as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationMode {
    /// f_λ(x) = λ^α f(λx); preserves the L^{n/α} norm.
    Density,
    /// u_λ(x) = u(λx).
    Plain,
    /// λ^n f(λx); preserves the integral.
    Mass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeSmallSplit {
    pub large: SampledFunction,
    pub small: SampledFunction,
}

impl SampledFunction {
    /// Radial function with given cell values on the given edges.
    pub fn radial(n: usize, edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || values.len() != edges.len() - 1 {
            return Err(Error::Domain("radial layout needs one value per cell".into()));
        }
        if edges[0] < 0.0 || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("radial edges must be increasing and nonnegative".into()));
        }
        let weights = edges.windows(2).map(|w| annulus_measure(n, w[0], w[1])).collect();
        let nodes = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut f = SampledFunction {
            layout: Layout::Radial,
            n,
            components: 1,
            nodes,
            values,
            weights,
            support_radius: 0.0,
            edges,
            spacing: 0.0,
        };
        f.support_radius = f.measured_support();
        Ok(f)
    }

    /// Radial function whose cell values are |y|^{n−1}-weighted averages of `g`.
    pub fn radial_from_fn<F: Fn(f64) -> f64>(n: usize, edges: Vec<f64>, g: F) -> Result<Self> {
        let gl = GaussLegendre::<f64>::new(4);
        let values = edges
            .windows(2)
            .map(|w| {
                let num = gl.integrate(w[0], w[1], |s| g(s) * s.powi(n as i32 - 1));
                let den = gl.integrate(w[0], w[1], |s| s.powi(n as i32 - 1));
                num / den
            })
            .collect();
        SampledFunction::radial(n, edges, values)
    }

    /// Uniform grid on [−half_width, half_width]^n with `cells` cells per side,
    /// values sampled at cell centres.
    pub fn cartesian<F: Fn(&[f64]) -> Vec<f64>>(n: usize, half_width: f64, cells: usize, components: usize, g: F) -> Result<Self> {
        let cap = match n {
            1 => 1 << 20,
            2 => 256,
            3 => 96,
            _ => return Err(Error::Domain(format!("dimension {n} outside 1..=3"))),
        };
        if cells == 0 || cells > cap {
            return Err(Error::Domain(format!("{cells} cells per side exceeds the cap {cap}")));
        }
        let h = 2.0 * half_width / cells as f64;
        let total = cells.pow(n as u32);
        let mut nodes = Vec::with_capacity(total * n);
        let mut values = Vec::with_capacity(total * components);
        for flat in 0..total {
            let mut rem = flat;
            let start = nodes.len();
            for _ in 0..n {
                let i = rem % cells;
                rem /= cells;
                nodes.push(-half_width + (i as f64 + 0.5) * h);
            }
            let v = g(&nodes[start..start + n]);
            if v.len() != components {
                return Err(Error::Domain("component count mismatch".into()));
            }
            values.extend(v);
        }
        let mut f = SampledFunction {
            layout: Layout::Cartesian,
            n,
            components,
            nodes,
            values,
            weights: vec![h.powi(n as i32); total],
            support_radius: 0.0,
            edges: Vec::new(),
            spacing: h,
        };
        f.support_radius = f.measured_support();
        Ok(f)
    }

    /// Bare evaluation points (flattened, stride n) with zero values.
    pub fn points(n: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 || coords.len() % n != 0 {
            return Err(Error::Domain("coordinate count not a multiple of n".into()));
        }
        let m = coords.len() / n;
        Ok(SampledFunction {
            layout: Layout::Points,
            n,
            components: 1,
            nodes: coords,
            values: vec![0.0; m],
            weights: vec![1.0; m],
            support_radius: 0.0,
            edges: Vec::new(),
            spacing: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.components..(i + 1) * self.components]
    }

    /// Euclidean length of the values at node i.
    pub fn magnitude(&self, i: usize) -> f64 {
        let v = self.value(i);
        if v.len() == 1 {
            v[0].abs()
        } else {
            v.iter().map(|x| x * x).sum::<f64>().sqrt()
        }
    }

    /// Coordinates of node i (radial nodes return their radius).
    pub fn node(&self, i: usize) -> &[f64] {
        match self.layout {
            Layout::Radial => &self.nodes[i..i + 1],
            _ => &self.nodes[i * self.n..(i + 1) * self.n],
        }
    }

    pub fn node_radius(&self, i: usize) -> f64 {
        match self.layout {
            Layout::Radial => self.nodes[i],
            _ => self.node(i).iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    /// Outer radius of the sampled region.
    pub fn extent(&self) -> f64 {
        match self.layout {
            Layout::Radial => *self.edges.last().unwrap_or(&0.0),
            Layout::Cartesian => {
                let half = 0.5 * self.spacing;
                (0..self.len())
                    .map(|i| self.node(i).iter().map(|x| (x.abs() + half).powi(2)).sum::<f64>().sqrt())
                    .fold(0.0, f64::max)
            }
            Layout::Points => (0..self.len()).map(|i| self.node_radius(i)).fold(0.0, f64::max),
        }
    }

    fn measured_support(&self) -> f64 {
        let mut s: f64 = 0.0;
        for i in 0..self.len() {
            if self.magnitude(i) != 0.0 {
                let r = match self.layout {
                    Layout::Radial => self.edges[i + 1],
                    Layout::Cartesian => {
                        let half = 0.5 * self.spacing;
                        self.node(i).iter().map(|x| (x.abs() + half).powi(2)).sum::<f64>().sqrt()
                    }
                    Layout::Points => self.node_radius(i),
                };
                s = s.max(r);
            }
        }
        s
    }

    /// Same nodes and weights with new values.
    pub fn with_values(&self, components: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() * components {
            return Err(Error::Domain("value count mismatch".into()));
        }
        let mut f = self.clone();
        f.components = components;
        f.values = values;
        f.support_radius = f.measured_support();
        Ok(f)
    }

    /// Multiplies every weight by `factor` (e.g. 1/2 for a half-space domain).
    pub fn scale_weights(&self, factor: f64) -> Self {
        let mut f = self.clone();
        for w in &mut f.weights {
            *w *= factor;
        }
        f
    }

    pub fn map_values<F: Fn(f64) -> f64>(&self, g: F) -> Self {
        let mut f = self.clone();
        for v in &mut f.values {
            *v = g(*v);
        }
        f.support_radius = f.measured_support();
        f
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_values(|v| s * v)
    }

    /// Pointwise combination a·self + b·other on shared nodes.
    pub fn combine(&self, a: f64, other: &SampledFunction, b: f64) -> Result<Self> {
        if self.nodes != other.nodes || self.components != other.components {
            return Err(Error::Domain("functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        self.with_values(self.components, values)
    }

    /// Sum of weights.
    pub fn measure(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Measure of {f ≠ 0}.
    pub fn support_measure(&self) -> f64 {
        let w: Vec<f64> = (0..self.len()).map(|i| if self.magnitude(i) != 0.0 { self.weights[i] } else { 0.0 }).collect();
        pairwise_sum(&w)
    }

    /// ∫ f for scalar data.
    pub fn integral(&self) -> f64 {
        let w: Vec<f64> = (0..self.len()).map(|i| self.weights[i] * self.value(i)[0]).collect();
        pairwise_sum(&w)
    }

    /// Σ w|f|^p, the p-th power of the L^p norm.
    pub fn lp_power(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || p.is_infinite() {
            return Err(Error::Domain(format!("exponent {p} must be finite and ≥ 1")));
        }
        let terms: Vec<f64> = (0..self.len()).map(|i| self.weights[i] * self.magnitude(i).powf(p)).collect();
        Ok(pairwise_sum(&terms))
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p == f64::INFINITY {
            return Ok((0..self.len()).map(|i| self.magnitude(i)).fold(0.0, f64::max));
        }
        Ok(self.lp_power(p)?.powf(1.0 / p))
    }

    pub fn dilate(&self, lambda: f64, mode: DilationMode, alpha: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("dilation factor {lambda} must be positive")));
        }
        let amp = match mode {
            DilationMode::Density => lambda.powf(alpha),
            DilationMode::Plain => 1.0,
            DilationMode::Mass => lambda.powi(self.n as i32),
        };
        let mut f = self.clone();
        let wscale = lambda.powi(-(self.n as i32));
        for x in &mut f.nodes {
            *x /= lambda;
        }
        for e in &mut f.edges {
            *e /= lambda;
        }
        f.spacing /= lambda;
        if self.layout != Layout::Points {
            for w in &mut f.weights {
                *w *= wscale;
            }
        }
        for v in &mut f.values {
            *v *= amp;
        }
        f.support_radius = self.support_radius / lambda;
        Ok(f)
    }

    /// f_ℓ = f where |f| ≥ 1, f_s = f − f_ℓ.
    pub fn split_large_small(&self) -> LargeSmallSplit {
        let c = self.components;
        let mut large = vec![0.0; self.values.len()];
        let mut small = vec![0.0; self.values.len()];
        for i in 0..self.len() {
            let dst = if self.magnitude(i) >= 1.0 { &mut large } else { &mut small };
            dst[i * c..(i + 1) * c].copy_from_slice(self.value(i));
        }
        LargeSmallSplit {
            large: self.with_values(c, large).expect("same layout"),
            small: self.with_values(c, small).expect("same layout"),
        }
    }

    /// Writes `node…, weight, value…` rows (radial: `r_lo, r_hi, weight, value…`;
    /// cartesian: `x…, h, weight, value…`; points: `x…, value…`).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = Vec::new();
        match self.layout {
            Layout::Radial => header.extend(["r_lo".into(), "r_hi".into()]),
            _ => header.extend((0..self.n).map(|i| format!("x{i}"))),
        }
        if self.layout == Layout::Cartesian {
            header.push("h".into());
        }
        if self.layout != Layout::Points {
            header.push("weight".into());
        }
        header.extend((0..self.components).map(|j| format!("v{j}")));
        if self.layout == Layout::Radial {
            header.push(format!("n={}", self.n));
        }
        wr.write_record(&header)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = Vec::new();
            match self.layout {
                Layout::Radial => {
                    row.push(fmt_float(self.edges[i]));
                    row.push(fmt_float(self.edges[i + 1]));
                }
                _ => row.extend(self.node(i).iter().map(|x| fmt_float(*x))),
            }
            if self.layout == Layout::Cartesian {
                row.push(fmt_float(self.spacing));
            }
            if self.layout != Layout::Points {
                row.push(fmt_float(self.weights[i]));
            }
            row.extend(self.value(i).iter().map(|x| fmt_float(*x)));
            if self.layout == Layout::Radial {
                row.push(String::new());
            }
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<f64>> = rd
            .records()
            .map(|rec| {
                let rec = rec?;
                rec.iter()
                    .filter(|s| !s.is_empty())
                    .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number {s}: {e}"))))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let nv = header.iter().filter(|h| h.starts_with('v')).count();
        if nv == 0 {
            return Err(Error::Config("no value columns".into()));
        }
        if header.first().map(String::as_str) == Some("r_lo") {
            let n: usize = header
                .iter()
                .find_map(|h| h.strip_prefix("n="))
                .ok_or_else(|| Error::Config("radial CSV lacks the n= column".into()))?
                .parse()
                .map_err(|_| Error::Config("bad dimension".into()))?;
            let mut edges = vec![];
            let mut values = vec![];
            let mut weights = vec![];
            for row in &rows {
                if edges.is_empty() {
                    edges.push(row[0]);
                }
                edges.push(row[1]);
                weights.push(row[2]);
                values.push(row[3]);
            }
            let mut f = SampledFunction::radial(n, edges, values)?;
            f.weights = weights;
            return Ok(f);
        }
        let n = header.iter().filter(|h| h.starts_with('x')).count();
        let cart = header.iter().any(|h| h == "h");
        let mut coords = vec![];
        let mut values = vec![];
        let mut weights = vec![];
        let mut spacing = 0.0;
        for row in &rows {
            coords.extend_from_slice(&row[..n]);
            let mut k = n;
            if cart {
                spacing = row[k];
                k += 1;
                weights.push(row[k]);
                k += 1;
            } else {
                weights.push(1.0);
            }
            values.extend_from_slice(&row[k..k + nv]);
        }
        let mut f = SampledFunction::points(n, coords)?;
        if cart {
            f.layout = Layout::Cartesian;
            f.spacing = spacing;
        }
        f.weights = weights;
        f.with_values(nv, values)
    }
}

/// Shortest round-trip decimal with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// e^t − Σ_{k≤N} t^k/k!.
pub fn truncated_exp(t: f64, n_terms: usize) -> f64 {
    if t < n_terms as f64 + 1.0 {
        // tail series Σ_{k>N} t^k/k!
        let mut term = 1.0f64;
        for k in 1..=n_terms + 1 {
            term *= t / k as f64;
        }
        let mut sum = 0.0f64;
        let mut k = n_terms + 1;
        while term.abs() > f64::EPSILON * sum.abs() || sum == 0.0 {
            sum += term;
            k += 1;
            term *= t / k as f64;
            if term == 0.0 || k > n_terms + 400 {
                break;
            }
        }
        sum
    } else {
        let mut head = 0.0;
        let mut term = 1.0f64;
        for k in 0..=n_terms {
            if k > 0 {
                term *= t / k as f64;
            }
            head += term;
        }
        t.exp() - head
    }
}

/// (a^{qn/α} + b^{qn/α})^{α/(qn)}, or max(a, b) for q = ∞.
pub fn q_norm(a: f64, b: f64, q: f64, n: usize, alpha: f64) -> f64 {
    if q.is_infinite() {
        return a.max(b);
    }
    let e = q * n as f64 / alpha;
    let m = a.max(b);
    if m == 0.0 {
        return 0.0;
    }
    m * ((a / m).powf(e) + (b / m).powf(e)).powf(1.0 / e)
}

/// ω_{n−1}∫_a^b ρ^{(σ−1)n} ρ^{n−1} dρ, the power-weight measure of an annulus.
pub fn weighted_annulus_measure(n: usize, sigma: f64, a: f64, b: f64) -> f64 {
    let e = sigma * n as f64;
    sphere_area::<f64>(n) * (b.powf(e) - a.powf(e)) / e
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_indicator_norm() {
        let f = SampledFunction::radial(2, uniform_edges(1.0, 10), vec![1.0; 10]).unwrap();
        assert!((f.lp_norm(2.0).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((f.measure() - PI).abs() < 1e-14);
        assert_eq!(f.support_radius, 1.0);
        assert!(f.lp_norm(0.5).is_err());
        assert_eq!(f.scale(0.0).lp_norm(3.0).unwrap(), 0.0);
    }

    #[test]
    fn cartesian_weights_sum_to_volume() {
        let f = SampledFunction::cartesian(3, 1.0, 10, 1, |_| vec![1.0]).unwrap();
        assert!((f.measure() - 8.0).abs() < 1e-12);
        assert!(SampledFunction::cartesian(2, 1.0, 512, 1, |_| vec![1.0]).is_err());
    }

    #[test]
    fn dilation_modes() {
        let f = SampledFunction::radial_from_fn(2, geometric_edges(1e-3, 1.0, 200), |s| (-s * s).exp()).unwrap();
        let g = f.dilate(2.0, DilationMode::Plain, 1.0).unwrap();
        let r = g.lp_power(2.0).unwrap() / f.lp_power(2.0).unwrap();
        assert!((r - 0.25).abs() < 1e-13);
        let d = f.dilate(2.0, DilationMode::Density, 1.0).unwrap();
        assert!((d.lp_norm(2.0).unwrap() - f.lp_norm(2.0).unwrap()).abs() < 1e-13);
        let m = f.dilate(0.5, DilationMode::Mass, 1.0).unwrap();
        assert!((m.integral() - f.integral()).abs() < 1e-13);
        assert_eq!(f.dilate(1.0, DilationMode::Density, 0.3).unwrap(), f);
    }

    #[test]
    fn split_examples() {
        let f = SampledFunction::radial(2, uniform_edges(1.0, 4), vec![3.0, 0.5, 1.0, -2.0]).unwrap();
        let s = f.split_large_small();
        assert_eq!(s.large.values, vec![3.0, 0.0, 1.0, -2.0]);
        assert_eq!(s.small.values, vec![0.0, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn truncated_exponential() {
        assert!((truncated_exp(1.0, 0) - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        let t = 1e-8;
        assert!((truncated_exp(t, 2) / (t * t * t / 6.0) - 1.0).abs() < 1e-3);
        assert_eq!(truncated_exp(0.0, 3), 0.0);
        assert!((truncated_exp(20.0, 1) - (20f64.exp() - 21.0)).abs() < 1e-6);
    }

    #[test]
    fn q_norms() {
        assert_eq!(q_norm(0.3, 0.8, f64::INFINITY, 2, 1.0), 0.8);
        assert!((q_norm(0.5, 0.5, 1.0, 2, 1.0) - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        let (a, b) = (0.6f64, 0.6f64);
        let v1 = q_norm(a, b, 1.0, 2, 1.0);
        let v2 = q_norm(a, b, 2.0, 2, 1.0);
        assert!((v1 - 0.848_528_137_423_857).abs() < 1e-12);
        assert!((v2 - 0.6 * 2f64.powf(0.25)).abs() < 1e-12);
        assert!(v1 >= v2 && v2 >= 0.6);
    }

    #[test]
    fn csv_round_trip() {
        let f = SampledFunction::radial(3, geometric_edges(0.01, 2.0, 5), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = SampledFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(f.values, g.values);
        assert_eq!(f.edges, g.edges);
        assert_eq!(f.weights, g.weights);
        let c = SampledFunction::cartesian(2, 1.0, 4, 2, |x| vec![x[0], x[1]]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let d = SampledFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(c, d);
    }
}
