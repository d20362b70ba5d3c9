//! Special functions: Gamma, sphere measures, generalized binomials,
//! complete elliptic integrals and the Gauss hypergeometric series.

use crate::{lit, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(x: T) -> T {
    let mut a = lit::<T>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + lit::<T>(c) / (x + lit::<T>(i as f64));
    }
    a
}

/// Gamma function via the Lanczos approximation (g = 7, nine terms) with
/// reflection for arguments below 1/2.
pub fn gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let t = x + lit::<T>(LANCZOS_G) + half;
    (T::TAU()).sqrt() * t.powf(x + half) * (-t).exp() * lanczos_sum(x)
}

/// Natural logarithm of |Γ(x)| for x > 0.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let t = x + lit::<T>(LANCZOS_G) + half;
    half * T::TAU().ln() + (x + half) * t.ln() - t + lanczos_sum(x).ln()
}

/// Surface measure ω_{n-1} = 2π^{n/2}/Γ(n/2) of the unit sphere in R^n.
/// For n = 1 this is the counting measure of {−1, 1}.
pub fn sphere_area<T: Real>(n: usize) -> T {
    let h = lit::<T>(n as f64) / lit::<T>(2.0);
    lit::<T>(2.0) * T::PI().powf(h) / gamma(h)
}

/// Volume |B_1| = ω_{n-1}/n of the unit ball in R^n.
pub fn ball_volume<T: Real>(n: usize) -> T {
    sphere_area::<T>(n) / lit::<T>(n as f64)
}

/// Generalized binomial coefficient C(a, k) for real a.
pub fn binomial<T: Real>(a: T, k: usize) -> T {
    let mut c = T::one();
    for i in 0..k {
        let i = lit::<T>(i as f64);
        c = c * (a - i) / (i + T::one());
    }
    c
}

/// Complete elliptic integrals (K(k), E(k)) of modulus 0 ≤ k < 1 by the
/// arithmetic-geometric mean.
pub fn elliptic_ke<T: Real>(k: T) -> (T, T) {
    let half = lit::<T>(0.5);
    let mut a = T::one();
    let mut b = (T::one() - k * k).max(T::zero()).sqrt();
    let mut sum = half * k * k;
    let mut pow = half;
    for _ in 0..64 {
        let c = half * (a - b);
        if c.abs() <= T::epsilon() * a {
            break;
        }
        let a1 = half * (a + b);
        b = (a * b).sqrt();
        a = a1;
        pow = pow + pow;
        sum = sum + pow * c * c;
    }
    let kk = T::FRAC_PI_2() / a;
    (kk, kk * (T::one() - sum))
}

/// Gauss hypergeometric series ₂F₁(a, b; c; z), summed directly. Intended for
/// |z| ≤ 1/2 where the series converges geometrically.
pub fn hyp2f1_series<T: Real>(a: T, b: T, c: T, z: T) -> T {
    let mut term = T::one();
    let mut sum = T::one();
    let mut quiet = 0;
    for k in 0..2000 {
        let kf = lit::<T>(k as f64);
        term = term * (a + kf) * (b + kf) / ((c + kf) * (kf + T::one())) * z;
        sum = sum + term;
        if term == T::zero() {
            break;
        }
        if term.abs() <= T::epsilon() * sum.abs() {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    // High-precision reference values (40-digit arithmetic).
    const GAMMA_TABLE: [(f64, f64); 20] = [
        (0.05, 19.470085311255512864),
        (0.1, 9.5135076986687318363),
        (0.25, 3.6256099082219083119),
        (0.5, 1.7724538509055160273),
        (0.75, 1.2254167024651776451),
        (1.0, 1.0),
        (1.25, 0.90640247705547707798),
        (1.5, 0.88622692545275801365),
        (2.0, 1.0),
        (2.5, 1.3293403881791370205),
        (3.0, 2.0),
        (3.5, 3.3233509704478425512),
        (4.5, 11.631728396567448929),
        (5.5, 52.342777784553520181),
        (7.25, 1155.3810139199896872),
        (9.5, 119292.46199460900709),
        (12.0, 39916800.0),
        (15.5, 334838609873.55645697),
        (19.0, 6402373705728000.0),
        (20.0, 121645100408832000.0),
    ];

    #[test]
    fn gamma_matches_reference_table() {
        for (x, g) in GAMMA_TABLE {
            let rel = (gamma(x) - g).abs() / g;
            assert!(rel < 1e-13, "gamma({x}) rel err {rel:e}");
            let lrel = (ln_gamma(x) - g.ln()).abs() / g.ln().abs().max(1.0);
            assert!(lrel < 1e-13, "ln_gamma({x}) err {lrel:e}");
        }
    }

    #[test]
    fn gamma_f32_is_usable() {
        let g: f32 = gamma(4.5f32);
        assert!((g - 11.631_728).abs() < 1e-4);
    }

    #[test]
    fn sphere_measures() {
        let pi = std::f64::consts::PI;
        assert!((sphere_area::<f64>(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area::<f64>(2) - 2.0 * pi).abs() < 1e-14);
        assert!((sphere_area::<f64>(3) - 4.0 * pi).abs() < 1e-13);
        assert!((ball_volume::<f64>(3) - 4.0 * pi / 3.0).abs() < 1e-13);
        assert!((sphere_area::<f64>(4) - 2.0 * pi * pi).abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5.0f64, 2), 10.0);
        assert!((binomial(-0.5f64, 3) + 0.3125).abs() < 1e-15);
        assert_eq!(binomial(2.0f64, 3), 0.0);
    }

    #[test]
    fn elliptic_against_series() {
        // K(k) = π/2 ₂F₁(1/2,1/2;1;k²), E(k) = π/2 ₂F₁(-1/2,1/2;1;k²)
        for &k in &[0.0f64, 0.1, 0.3, 0.5, 0.7] {
            let (kk, ee) = elliptic_ke(k);
            let h = std::f64::consts::FRAC_PI_2;
            assert!((kk - h * hyp2f1_series(0.5, 0.5, 1.0, k * k)).abs() < 1e-14);
            assert!((ee - h * hyp2f1_series(-0.5, 0.5, 1.0, k * k)).abs() < 1e-14);
        }
        // Legendre relation at k = 1/√2
        let k = std::f64::consts::FRAC_1_SQRT_2;
        let (kk, ee) = elliptic_ke(k);
        let lhs = 2.0 * ee * kk - kk * kk;
        assert!((lhs - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn hypergeometric_closed_forms() {
        // ₂F₁(1,1;2;z) = -ln(1-z)/z
        let z = 0.4f64;
        assert!((hyp2f1_series(1.0, 1.0, 2.0, z) + (1.0 - z).ln() / z).abs() < 1e-14);
        // terminating series
        assert!((hyp2f1_series(0.5, -1.0, 1.5, 0.3f64) - 0.9).abs() < 1e-15);
    }
}
