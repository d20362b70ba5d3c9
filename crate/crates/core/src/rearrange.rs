//! Nonincreasing rearrangements f*, running averages f** and O'Neil's
//! inequality (Tf)**(t) ≤ tK**(t)f**(t) + ∫_t^∞ K*(s)f*(s) ds.

use crate::field::{annulus_measure, Layout, SampledFunction};
use crate::kernel::{constant_a_g, KernelForm, KernelSpec};
use crate::potential::radial_potential_at;
use crate::quad::GaussLegendre;
use crate::special::ball_volume;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Exact rearrangement of a piecewise constant function: f* equals
/// `levels[k]` on [breaks[k], breaks[k+1]).
#[derive(Debug, Clone, PartialEq)]
pub struct StepRearrangement {
    pub breaks: Vec<f64>,
    pub levels: Vec<f64>,
    /// ∫_0^{breaks[k]} f*.
    prefix: Vec<f64>,
}

impl StepRearrangement {
    pub fn from_levels(mut pairs: Vec<(f64, f64)>) -> Self {
        // (level, measure), sorted by decreasing level; ties keep input order
        pairs.retain(|&(v, w)| v > 0.0 && w > 0.0);
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut breaks = vec![0.0];
        let mut levels: Vec<f64> = Vec::new();
        let mut prefix = vec![0.0];
        for (v, w) in pairs {
            let t = *breaks.last().unwrap();
            let p = *prefix.last().unwrap();
            if levels.last() == Some(&v) {
                *breaks.last_mut().unwrap() = t + w;
                *prefix.last_mut().unwrap() = p + v * w;
            } else {
                levels.push(v);
                breaks.push(t + w);
                prefix.push(p + v * w);
            }
        }
        StepRearrangement { breaks, levels, prefix }
    }

    pub fn of(f: &SampledFunction) -> Self {
        StepRearrangement::from_levels((0..f.len()).map(|i| (f.magnitude(i), f.weights[i])).collect())
    }

    /// Measure of the support.
    pub fn support(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    fn segment(&self, t: f64) -> Option<usize> {
        if t >= self.support() || t < 0.0 {
            return None;
        }
        let k = self.breaks.partition_point(|&b| b <= t);
        Some(k - 1)
    }

    pub fn star(&self, t: f64) -> f64 {
        self.segment(t).map_or(0.0, |k| self.levels[k])
    }

    /// ∫_0^t f*.
    pub fn integral(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some(k) => self.prefix[k] + self.levels[k] * (t - self.breaks[k]),
            None => *self.prefix.last().unwrap(),
        }
    }

    pub fn double_star(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.levels.first().copied().unwrap_or(0.0);
        }
        self.integral(t) / t
    }

    /// μ(s) = |{|f| > s}|.
    pub fn distribution(&self, s: f64) -> f64 {
        let k = self.levels.partition_point(|&v| v > s);
        self.breaks[k]
    }

    /// ∫ (f*)^p dt.
    pub fn lp_power(&self, p: f64) -> f64 {
        self.levels.iter().zip(self.breaks.windows(2)).map(|(v, w)| v.powf(p) * (w[1] - w[0])).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecreasingProfile {
    pub t_grid: Vec<f64>,
    pub star: Vec<f64>,
    pub double_star: Vec<f64>,
}

/// 512 geometric points on [1e-4·m, 10·m].
pub fn default_t_grid(support_measure: f64) -> Vec<f64> {
    let m = if support_measure > 0.0 { support_measure } else { 1.0 };
    let (a, b) = (1e-4 * m, 10.0 * m);
    (0..512).map(|i| a * (b / a).powf(i as f64 / 511.0)).collect()
}

pub fn decreasing_rearrangement(f: &SampledFunction) -> DecreasingProfile {
    let step = StepRearrangement::of(f);
    decreasing_rearrangement_on(&step, &default_t_grid(step.support()))
}

pub fn decreasing_rearrangement_on(step: &StepRearrangement, t_grid: &[f64]) -> DecreasingProfile {
    DecreasingProfile {
        t_grid: t_grid.to_vec(),
        star: t_grid.iter().map(|&t| step.star(t)).collect(),
        double_star: t_grid.iter().map(|&t| step.double_star(t)).collect(),
    }
}

/// Rearrangement of a scalar kernel: K*, K** and ∫_a^b K* in closed form for
/// homogeneous kernels, through the radial primitive for radial kernels with
/// nonincreasing |k|.
#[derive(Debug, Clone)]
pub struct KernelRearrangement<'a> {
    kernel: &'a KernelSpec,
    a_g: f64,
}

impl<'a> KernelRearrangement<'a> {
    pub fn new(k: &'a KernelSpec) -> Result<Self> {
        if !k.is_scalar() {
            return Err(Error::Unsupported("rearrangement of a vector kernel".into()));
        }
        if k.form != KernelForm::Homogeneous {
            if !k.is_radial() {
                return Err(Error::Unsupported("non-radial inhomogeneous kernel".into()));
            }
            let mut prev = f64::INFINITY;
            for i in 0..=2000 {
                let rho = 10f64.powf(-10.0 + 20.0 * i as f64 / 2000.0);
                let v = k.radial_value(rho).abs();
                if v > prev * (1.0 + 1e-12) {
                    return Err(Error::Unsupported(format!("|k| increases near ρ = {rho:e}")));
                }
                prev = v;
            }
        }
        Ok(KernelRearrangement { kernel: k, a_g: constant_a_g(k)? })
    }

    fn beta(&self) -> f64 {
        (self.kernel.n as f64 - self.kernel.alpha) / self.kernel.n as f64
    }

    fn radius_of(&self, t: f64) -> f64 {
        (t / ball_volume::<f64>(self.kernel.n)).powf(1.0 / self.kernel.n as f64)
    }

    pub fn star(&self, t: f64) -> f64 {
        match self.kernel.form {
            KernelForm::Homogeneous => (self.a_g / t).powf(self.beta()),
            _ => self.kernel.radial_value(self.radius_of(t)).abs(),
        }
    }

    /// ∫_0^t K*.
    pub fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.kernel.form {
            KernelForm::Homogeneous => self.a_g.powf(self.beta()) * t.powf(1.0 - self.beta()) / (1.0 - self.beta()),
            _ => {
                let om = crate::special::sphere_area::<f64>(self.kernel.n);
                om * self.kernel.radial_cumulative(self.radius_of(t)).abs()
            }
        }
    }

    pub fn double_star(&self, t: f64) -> f64 {
        self.integral(t) / t
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OneilReport {
    pub t_grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub margins: Vec<f64>,
    pub pass: bool,
}

/// Compares (Tf)** with the O'Neil bound on `t_grid`. The potential is
/// averaged over the cells of a radial covering grid, which is widened until
/// its boundary value drops below (Tf)*(max t).
pub fn oneil_check(k: &KernelSpec, f: &SampledFunction, t_grid: &[f64]) -> Result<OneilReport> {
    if !k.is_radial() {
        return Err(Error::Unsupported("O'Neil check needs a scalar radial kernel".into()));
    }
    if f.layout != Layout::Radial || f.components != 1 {
        return Err(Error::Unsupported("O'Neil check needs scalar radial data".into()));
    }
    let kr = KernelRearrangement::new(k)?;
    let fs = StepRearrangement::of(f);
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let n = f.n;
    let gl = GaussLegendre::<f64>::new(3);
    let mut reach = (t_max.max(f.measure()) / ball_volume::<f64>(n)).powf(1.0 / n as f64) * 2.0;
    let mut tf_step = None;
    for _ in 0..8 {
        let mut edges: Vec<f64> = f.edges.iter().copied().filter(|&e| e < reach).collect();
        let last = *edges.last().unwrap();
        let extra = 64;
        for i in 1..=extra {
            edges.push(last * (reach / last).powf(i as f64 / extra as f64));
        }
        let cells: Vec<(f64, f64)> = edges
            .windows(2)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let mut num = 0.0;
                let mut den = 0.0;
                for (t, wt) in gl.mapped(a, b) {
                    let jac = wt * t.powi(n as i32 - 1);
                    num += jac * radial_potential_at(k, f, t).0.abs();
                    den += jac;
                }
                (num / den, annulus_measure(n, a, b))
            })
            .collect();
        let boundary = radial_potential_at(k, f, reach).0.abs();
        let step = StepRearrangement::from_levels(cells);
        if boundary <= step.star(t_max) || boundary == 0.0 {
            tf_step = Some(step);
            break;
        }
        reach *= 2.0;
    }
    let tf_step = tf_step.ok_or_else(|| Error::Resolution("covering grid cannot resolve (Tf)** at the largest t".into()))?;
    let mut lhs = Vec::with_capacity(t_grid.len());
    let mut rhs = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        lhs.push(tf_step.double_star(t));
        let mut tail = 0.0;
        for (j, v) in fs.levels.iter().enumerate() {
            let (a, b) = (fs.breaks[j].max(t), fs.breaks[j + 1]);
            if b > a {
                tail += v * (kr.integral(b) - kr.integral(a));
            }
        }
        rhs.push(t * kr.double_star(t) * fs.double_star(t) + tail);
    }
    let margins: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
    let pass = margins.iter().zip(&rhs).all(|(m, r)| *m >= -1e-6 * r.abs());
    Ok(OneilReport { t_grid: t_grid.to_vec(), lhs, rhs, margins, pass })
}
