//! Sparse multivariate polynomials in up to three variables and exact
//! monomial integrals over spheres, balls and boxes.

use crate::special::gamma;
use std::collections::BTreeMap;

pub type MultiIndex = [u32; 3];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub n: usize,
    pub terms: BTreeMap<MultiIndex, f64>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Poly::monomial(n, [0; 3], c)
    }

    pub fn monomial(n: usize, k: MultiIndex, c: f64) -> Self {
        let mut p = Poly::zero(n);
        if c != 0.0 {
            p.terms.insert(k, c);
        }
        p
    }

    /// The linear form Σ a_i y_i.
    pub fn linear(a: &[f64]) -> Self {
        let mut p = Poly::zero(a.len());
        for (i, &c) in a.iter().enumerate() {
            let mut k = [0; 3];
            k[i] = 1;
            p.add_term(k, c);
        }
        p
    }

    /// |y|² in n variables.
    pub fn norm_sq(n: usize) -> Self {
        let mut p = Poly::zero(n);
        for i in 0..n {
            let mut k = [0; 3];
            k[i] = 2;
            p.add_term(k, 1.0);
        }
        p
    }

    pub fn add_term(&mut self, k: MultiIndex, c: f64) {
        let e = self.terms.entry(k).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&k);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (k, c) in &other.terms {
            p.add_term(*k, *c);
        }
        p
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut p = Poly::zero(self.n);
        for (k, c) in &self.terms {
            p.add_term(*k, c * s);
        }
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero(self.n.max(other.n));
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                p.add_term([ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]], ca * cb);
            }
        }
        p
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut p = Poly::constant(self.n, 1.0);
        for _ in 0..e {
            p = p.mul(self);
        }
        p
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|k| k.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c * (0..self.n).map(|i| y[i].powi(k[i] as i32)).product::<f64>())
            .sum()
    }

    /// ∫_{B_r} p(y) dy.
    pub fn ball_integral(&self, r: f64) -> f64 {
        self.terms.iter().map(|(k, c)| c * monomial_ball_integral(self.n, k, r)).sum()
    }
}

/// All multi-indices in n variables of total degree exactly `d`, in
/// lexicographically decreasing order of the leading exponent.
pub fn multi_indices(n: usize, d: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    match n {
        1 => out.push([d, 0, 0]),
        2 => {
            for a in (0..=d).rev() {
                out.push([a, d - a, 0]);
            }
        }
        3 => {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    out.push([a, b, d - a - b]);
                }
            }
        }
        _ => panic!("dimension {n} not supported"),
    }
    out
}

/// ∫_{S^{n-1}} ω^k dω = 2∏Γ((k_i+1)/2)/Γ((|k|+n)/2), zero if any k_i is odd.
pub fn monomial_sphere_integral(n: usize, k: &MultiIndex) -> f64 {
    if (0..n).any(|i| k[i] % 2 == 1) {
        return 0.0;
    }
    if n == 1 {
        return 2.0;
    }
    let total: u32 = (0..n).map(|i| k[i]).sum();
    let num: f64 = (0..n).map(|i| gamma((k[i] as f64 + 1.0) / 2.0)).product();
    2.0 * num / gamma((total as f64 + n as f64) / 2.0)
}

/// ∫_{B_r} y^k dy.
pub fn monomial_ball_integral(n: usize, k: &MultiIndex, r: f64) -> f64 {
    let total: u32 = (0..n).map(|i| k[i]).sum();
    let e = n as f64 + total as f64;
    monomial_sphere_integral(n, k) * r.powf(e) / e
}

/// ∫ over the annulus a ≤ |y| ≤ b of y^k dy.
pub fn monomial_annulus_integral(n: usize, k: &MultiIndex, a: f64, b: f64) -> f64 {
    let total: u32 = (0..n).map(|i| k[i]).sum();
    let e = n as f64 + total as f64;
    monomial_sphere_integral(n, k) * (b.powf(e) - a.powf(e)) / e
}

/// ∫ over the box ∏[lo_i, hi_i] of y^k dy.
pub fn monomial_box_integral(n: usize, k: &MultiIndex, lo: &[f64], hi: &[f64]) -> f64 {
    (0..n)
        .map(|i| {
            let e = k[i] as i32 + 1;
            (hi[i].powi(e) - lo[i].powi(e)) / e as f64
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_integrals() {
        assert!((monomial_ball_integral(2, &[0, 0, 0], 1.0) - PI).abs() < 1e-13);
        assert!((monomial_ball_integral(2, &[2, 0, 0], 1.0) - PI / 4.0).abs() < 1e-13);
        assert!((monomial_ball_integral(3, &[0, 0, 0], 2.0) - 32.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(monomial_ball_integral(3, &[1, 2, 0], 1.0), 0.0);
        assert!((monomial_ball_integral(1, &[2, 0, 0], 1.0) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn algebra() {
        let x = Poly::linear(&[1.0, 0.0]);
        let y = Poly::linear(&[0.0, 1.0]);
        let p = x.add(&y).pow(2);
        assert_eq!(p.terms.len(), 3);
        assert!((p.eval(&[1.5, -0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(p.degree(), 2);
        assert_eq!(multi_indices(3, 2).len(), 6);
    }
}
