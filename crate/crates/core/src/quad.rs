//! One-dimensional quadrature: Gauss–Legendre rules, globally adaptive
//! Gauss–Kronrod (7/15) integration, and deterministic pairwise summation.

use crate::{lit, Error, Real, Result};

/// Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = lit::<T>(n as f64);
        for i in 0..n.div_ceil(2) {
            let mut x = (T::PI() * (lit::<T>(i as f64) + lit::<T>(0.75)) / (nf + lit::<T>(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * lit::<T>(4.0) {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = lit::<T>(0.5) * (b - a);
        let mid = lit::<T>(0.5) * (a + b);
        let mut s = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s = s + *w * f(mid + half * *x);
        }
        s * half
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = lit::<T>(0.5) * (b - a);
        let mid = lit::<T>(0.5) * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * *x, *w * half))
    }
}

fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let k = lit::<T>(k as f64);
        let p2 = ((lit::<T>(2.0) * k - T::one()) * x * p1 - (k - T::one()) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = lit::<T>(n as f64);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn kronrod15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = lit::<T>(0.5) * (b - a);
    let mid = lit::<T>(0.5) * (a + b);
    let fc = f(mid);
    let mut rk = fc * lit::<T>(WGK[7]);
    let mut rg = fc * lit::<T>(WG[3]);
    for j in 0..7 {
        let dx = half * lit::<T>(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        rk = rk + lit::<T>(WGK[j]) * s;
        if j % 2 == 1 {
            rg = rg + lit::<T>(WG[j / 2]) * s;
        }
    }
    (rk * half, ((rk - rg) * half).abs())
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

/// Requested accuracy: stop when error ≤ max(abs, rel·|value|).
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 2000 }
    }
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance { rel, ..Default::default() }
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over [a, b].
/// Fails with [`Error::Tolerance`] when the interval budget runs out.
pub fn adaptive<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: Tolerance) -> Result<QuadResult<T>> {
    let res = adaptive_best(&mut f, a, b, tol);
    let target = lit::<T>(tol.abs).max(lit::<T>(tol.rel) * res.value.abs());
    if res.error <= target || res.error <= lit::<T>(64.0) * T::epsilon() * res.value.abs() {
        Ok(res)
    } else {
        Err(Error::Tolerance {
            estimate: res.value.to_f64().unwrap_or(f64::NAN),
            error: res.error.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Like [`adaptive`] but always returns the best estimate reached.
pub fn adaptive_best<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T, tol: Tolerance) -> QuadResult<T> {
    let (v, e) = kronrod15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut value = v;
    let mut error = e;
    let floor = lit::<T>(64.0) * T::epsilon();
    while parts.len() < tol.max_intervals {
        let target = lit::<T>(tol.abs).max(lit::<T>(tol.rel) * value.abs());
        if error <= target || error <= floor * value.abs() {
            break;
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, pv, pe) = parts.swap_remove(idx);
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            parts.push((lo, hi, pv, pe));
            break;
        }
        let (v1, e1) = kronrod15(f, lo, mid);
        let (v2, e2) = kronrod15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
        value = pairwise_sum(&parts.iter().map(|p| p.2).collect::<Vec<_>>());
        error = parts.iter().fold(T::zero(), |s, p| s + p.3);
    }
    QuadResult { value, error, intervals: parts.len() }
}

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= 16 {
        return xs.iter().fold(T::zero(), |s, &x| s + x);
    }
    let m = xs.len() / 2;
    pairwise_sum(&xs[..m]) + pairwise_sum(&xs[m..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in 1..=20 {
            let gl = GaussLegendre::<f64>::new(n);
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let v = gl.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, Tolerance::rel(1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        let r = adaptive(|x: f64| (x * x + 1e-6).recip(), -1.0, 1.0, Tolerance::rel(1e-12)).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-3).atan() / 1e-3;
        assert!((r.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn adaptive_reports_failure() {
        let tol = Tolerance { abs: 0.0, rel: 1e-15, max_intervals: 3 };
        let r = adaptive(|x: f64| x.powf(-0.9), 0.0, 1.0, tol);
        assert!(matches!(r, Err(Error::Tolerance { .. })));
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }
}
