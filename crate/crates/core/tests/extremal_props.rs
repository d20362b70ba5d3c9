use adamsq_core::extremal::{
    adams_profile_with, ball_measure, ball_poly_basis, default_moment_degree, moment_normalize, ExtremalSpec,
};
use adamsq_core::field::{uniform_edges, DilationMode, SampledFunction};
use adamsq_core::functional::{exp_functional, Region};
use adamsq_core::kernel::KernelSpec;
use adamsq_core::potential::{apply_potential, potential_lp_power, potential_tail_lp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CELLS: usize = 1024;

fn normalized(k: &KernelSpec, eps: f64, r: f64) -> (ExtremalSpec, SampledFunction, SampledFunction) {
    let spec = ExtremalSpec::new(k, eps, r, 1.0).unwrap();
    let phi = adams_profile_with(k, &spec, CELLS).unwrap();
    let m = default_moment_degree(k).unwrap();
    let tilde = moment_normalize(&phi, &ball_poly_basis(k.n, m, r).unwrap()).unwrap();
    (spec, phi, tilde)
}

fn orthogonality_defect(f: &SampledFunction, m: usize, r: f64) -> f64 {
    let basis = ball_poly_basis(f.n, m, r).unwrap();
    let ip = basis.inner_products(f).unwrap();
    // relative to ‖f‖_2 since every basis element has unit L² norm
    let scale = f.lp_norm(2.0).unwrap();
    ip.iter().fold(0.0f64, |a, v| a.max(v.abs())) / scale
}

#[test]
fn norm_growth_within_one_constant() {
    let k = KernelSpec::riesz(2, 1.0).unwrap();
    let mut worst = 0.0f64;
    for &eps in &[1e-2, 1e-3, 1e-4, 1e-5] {
        for &r in &[1.0, 2.0, 4.0] {
            let (spec, phi, tilde) = normalized(&k, eps, r);
            let dev = tilde.lp_power(2.0).unwrap() - spec.b_eps_r;
            // a radial profile only loses its mean: ‖φ̃‖² = ‖φ‖² − (∫φ)²/|B_r|, with ∫φ ≈ 2πr(1 − ε)
            let mass = phi.integral();
            let mean_part = mass * mass / ball_measure(2, r);
            assert!((dev + mean_part).abs() < 1e-9 * spec.b_eps_r, "ε = {eps}, r = {r}: {}", dev + mean_part);
            assert!((mass / (2.0 * std::f64::consts::PI * r * (1.0 - eps)) - 1.0).abs() < 1e-4);
            worst = worst.max(dev.abs());
        }
    }
    assert!(worst <= 4.0 * std::f64::consts::PI * (1.0 + 1e-4));
}

#[test]
fn moments_vanish_radial_and_cartesian() {
    let riesz = KernelSpec::riesz(2, 1.0).unwrap();
    for &(eps, r) in &[(1e-2, 1.0), (1e-3, 2.0), (1e-4, 0.5)] {
        let (_, _, tilde) = normalized(&riesz, eps, r);
        let d = orthogonality_defect(&tilde, 1, r);
        assert!(d <= 1e-9, "radial ε = {eps}, r = {r}: {d}");
    }
    for n in [2usize, 3] {
        let k = KernelSpec::gradient(n, 1.0).unwrap();
        let spec = ExtremalSpec::new(&k, 0.1, 1.0, 1.0).unwrap();
        let cells = if n == 2 { 128 } else { 24 };
        let phi = adams_profile_with(&k, &spec, cells).unwrap();
        let tilde = moment_normalize(&phi, &ball_poly_basis(n, n - 1, 1.0).unwrap()).unwrap();
        for comp in 0..tilde.components {
            let vals: Vec<f64> = (0..tilde.len()).map(|i| tilde.value(i)[comp]).collect();
            let d = orthogonality_defect(&tilde.with_values(1, vals).unwrap(), n - 1, 1.0);
            assert!(d <= 1e-9, "n = {n}, component {comp}: {d}");
        }
    }
}

#[test]
fn projection_scales_like_inverse_power() {
    let k = KernelSpec::riesz(2, 1.0).unwrap();
    let mut c = Vec::new();
    for &eps in &[1e-2, 1e-3, 1e-4] {
        for &r in &[1.0, 2.0, 4.0] {
            let spec = ExtremalSpec::new(&k, eps, r, 1.0).unwrap();
            let phi = adams_profile_with(&k, &spec, CELLS).unwrap();
            let p = ball_poly_basis(2, 1, r).unwrap().project(&phi).unwrap();
            let sup = (0..p.len()).map(|i| p.magnitude(i)).fold(0.0, f64::max);
            c.push(sup * r.powf(k.alpha));
        }
    }
    let (lo, hi) = c.iter().fold((f64::MAX, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi / lo < 2.0);
}

#[test]
fn tail_constant_independent_of_epsilon() {
    let k = KernelSpec::riesz(2, 1.0).unwrap();
    for &r in &[1.0, 2.0] {
        let mut c = Vec::new();
        for &eps in &[1e-2, 1e-3, 1e-4] {
            let (_, _, tilde) = normalized(&k, eps, r);
            c.push(potential_tail_lp(&k, &tilde, r, 2.0).unwrap() / r.powi(2));
        }
        let (lo, hi) = c.iter().fold((f64::MAX, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(hi / lo < 1.5);
    }
}

#[test]
fn potential_lower_bound_constant() {
    let k = KernelSpec::riesz(2, 1.0).unwrap();
    let mut c = Vec::new();
    for &eps in &[1e-2, 1e-3, 1e-4, 1e-5] {
        let (spec, _, tilde) = normalized(&k, eps, 1.0);
        let rad = 0.5 * eps;
        let pts = SampledFunction::radial(2, uniform_edges(rad, 32), vec![0.0; 32]).unwrap();
        let tf = apply_potential(&k, &tilde, &pts).unwrap().base;
        let min = (0..tf.len()).map(|i| tf.magnitude(i)).fold(f64::INFINITY, f64::min);
        let l = spec.log_inv_eps_n(2);
        assert!(min <= spec.b_eps_r * 1.02);
        c.push((1.0 - min / spec.b_eps_r) * l);
    }
    let (lo, hi) = c.iter().fold((f64::MAX, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(lo > 0.0 && hi / lo < 1.5);
}

#[test]
fn homogeneous_dilation_laws() {
    let k = KernelSpec::riesz(2, 1.0).unwrap();
    let (_, _, f) = normalized(&k, 1e-3, 1.0);
    for &lambda in &[2.0, 0.5] {
        let g = f.dilate(lambda, DilationMode::Density, k.alpha).unwrap();
        assert!((g.lp_norm(2.0).unwrap() / f.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-12);
        let tf = potential_lp_power(&k, &f, 2.0).unwrap();
        let tg = potential_lp_power(&k, &g, 2.0).unwrap();
        assert!((tg * lambda * lambda / tf - 1.0).abs() < 1e-3, "λ = {lambda}: {tf} vs {tg}");
        // Tf_λ(x/λ) = Tf(x), and ∫_E e^{|Tf|²/A_g} = λ^n ∫_{E/λ} e^{|Tf_λ|²/A_g}
        let rho = 0.4;
        let at = |h: &SampledFunction, r: f64| {
            let pts = SampledFunction::radial(2, uniform_edges(r, 64), vec![0.0; 64]).unwrap();
            apply_potential(&k, h, &pts).unwrap().base
        };
        let (a, b) = (at(&f, rho), at(&g, rho / lambda));
        for i in 0..a.len() {
            assert!((a.values[i] - b.values[i]).abs() <= 1e-3 * a.values[i].abs());
        }
        let c = 1.0 / std::f64::consts::PI;
        let ea = exp_functional(&a, c, Region::Ball { radius: rho }, 2.0, 1.0, None).unwrap().value;
        let eb = exp_functional(&b, c, Region::Ball { radius: rho / lambda }, 2.0, 1.0, None).unwrap().value;
        assert!((lambda * lambda * eb / ea - 1.0).abs() < 1e-3, "λ = {lambda}: {ea} vs {eb}");
    }
}

#[test]
fn gram_matrix_agrees_with_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for &(n, m, r) in &[(2usize, 2usize, 1.5), (3, 2, 0.7)] {
        let basis = ball_poly_basis(n, m, r).unwrap();
        let g = basis.gram();
        let samples = 200_000;
        let vol = ball_measure(n, r);
        let d = basis.len();
        let mut sum = vec![vec![0.0; d]; d];
        let mut sq = vec![vec![0.0; d]; d];
        let mut drawn = 0;
        while drawn < samples {
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-r..r)).collect();
            if y.iter().map(|v| v * v).sum::<f64>() > r * r {
                continue;
            }
            drawn += 1;
            let v: Vec<f64> = basis.basis.iter().map(|p| p.eval(&y)).collect();
            for i in 0..d {
                for j in 0..d {
                    let x = vol * v[i] * v[j];
                    sum[i][j] += x;
                    sq[i][j] += x * x;
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                let mean = sum[i][j] / samples as f64;
                let se = ((sq[i][j] / samples as f64 - mean * mean).max(0.0) / samples as f64).sqrt();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - want).abs() < 1e-10);
                assert!((mean - g[i][j]).abs() <= 5.0 * se + 1e-12, "({i}, {j}): {mean} vs {} ± {se}", g[i][j]);
            }
        }
    }
}
