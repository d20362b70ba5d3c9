use adamsq_core::experiment::{run_scenario, ExperimentReport, ScenarioConfig};
use adamsq_core::extremal::{adams_profile_with, ball_poly_basis, default_moment_degree, moment_normalize, ExtremalSpec};
use adamsq_core::field::{geometric_edges, uniform_edges, DilationMode, SampledFunction};
use adamsq_core::functional::{split_power_inequality, regularization_sandwich};
use adamsq_core::kernel::{constant_a_g, constant_c_alpha, constant_gamma, KernelSpec, Operator};
use adamsq_core::potential::potential_lp_power;
use adamsq_core::rearrange::{oneil_check, StepRearrangement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn scenario(id: &str) -> ExperimentReport {
    let cfg = ScenarioConfig::for_scenario(id).expect("built-in scenario");
    run_scenario(&cfg).expect("valid config")
}

fn describe(rep: &ExperimentReport) -> String {
    let mut parts: Vec<String> = rep
        .checks
        .iter()
        .map(|c| {
            let p: Vec<String> = c.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let tol = c.tolerance.max(c.half_width.unwrap_or(0.0));
            format!("{}[{}] {:.6e} vs {:.6e} (±{:.2e}) {}", c.quantity, p.join(","), c.measured, c.target, tol, if c.pass { "ok" } else { "off" })
        })
        .collect();
    if let Some(d) = &rep.diagnostic {
        parts.push(format!("diagnostic: {d}"));
    }
    parts.join("; ")
}

fn from_reports(reps: &[ExperimentReport]) -> Outcome {
    Outcome {
        pass: reps.iter().all(|r| r.pass),
        detail: reps.iter().map(|r| format!("{}: {}", r.scenario, describe(r))).collect::<Vec<_>>().join(" | "),
    }
}

fn constants() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    let mut check = |name: &str, got: f64, want: f64| {
        let err = (got - want).abs();
        ok &= err <= 1e-12;
        detail.push(format!("{name} err {err:.1e}"));
    };
    check("c_alpha(3,2)", constant_c_alpha(3, 2.0).unwrap(), 1.0 / (4.0 * PI));
    for (n, alpha, ball) in [(2usize, 1.0, PI), (2, 0.5, PI), (3, 1.0, 4.0 * PI / 3.0), (3, 2.0, 4.0 * PI / 3.0)] {
        let k = KernelSpec::riesz(n, alpha).unwrap();
        check(&format!("A_g({n},{alpha})"), constant_a_g(&k).unwrap(), ball);
    }
    check("gamma(grad)", constant_gamma(Operator::GradientPower, 2, 1.0).unwrap(), 4.0 * PI);
    check("gamma(frac)", constant_gamma(Operator::FractionalLaplacian, 2, 1.0).unwrap(), 4.0 * PI);
    Outcome { pass: ok, detail: detail.join(", ") }
}

fn random_radial(rng: &mut ChaCha8Rng, n: usize, top: f64) -> SampledFunction {
    let cells = rng.gen_range(1..24);
    let vals = (0..cells).map(|_| rng.gen_range(0.0..top)).collect();
    SampledFunction::radial(n, uniform_edges(rng.gen_range(0.2..3.0), cells), vals).unwrap()
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut detail = Vec::new();
    let mut total = 0usize;

    let t_grid: Vec<f64> = (0..24).map(|i| 1e-3 * 1.5f64.powi(i)).collect();
    let mut bad = 0;
    for i in 0..200 {
        let (n, alpha) = [(2usize, 1.0), (2, 0.5), (3, 1.0), (3, 2.0)][i % 4];
        let k = KernelSpec::riesz(n, alpha).unwrap();
        let f = random_radial(&mut rng, n, 5.0);
        if !oneil_check(&k, &f, &t_grid).map(|r| r.pass).unwrap_or(false) {
            bad += 1;
        }
    }
    detail.push(format!("oneil 200: {bad} violations"));
    total += bad;

    bad = 0;
    for _ in 0..100 {
        let f = random_radial(&mut rng, 2, 3.0);
        let vals = f.values.iter().map(|v| v - 1.5).collect();
        let u = f.with_values(1, vals).unwrap();
        let c = rng.gen_range(0.0..2.0);
        let p = rng.gen_range(1.1..7.0);
        if !regularization_sandwich(&u, c, p).map(|s| s.holds()).unwrap_or(false) {
            bad += 1;
        }
    }
    detail.push(format!("sandwich 100: {bad} violations"));
    total += bad;

    bad = 0;
    for _ in 0..10_000 {
        let a = rng.gen_range(0.0..10.0);
        let b = rng.gen_range(0.0..10.0);
        let theta = rng.gen_range(0.0..=1.0);
        let beta = 1.0 + 10f64.powf(rng.gen_range(-3.0..1.0));
        let (l, r) = split_power_inequality(a, b, theta, beta);
        if l - r > 1e-12 * r.max(1.0) {
            bad += 1;
        }
    }
    detail.push(format!("split power inequality 10^4: {bad} violations"));
    total += bad;

    bad = 0;
    for _ in 0..100 {
        let f = if rng.gen_bool(0.5) {
            let cells = rng.gen_range(1..60);
            let vals = (0..cells).map(|_| rng.gen_range(-5.0..5.0)).collect();
            SampledFunction::radial(2, uniform_edges(rng.gen_range(0.1..4.0), cells), vals).unwrap()
        } else {
            let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..3.0));
            SampledFunction::cartesian(2, 1.0, 24, 1, move |x| vec![a * x[0] + b * (3.0 * x[0] * x[1]).sin()]).unwrap()
        };
        let step = StepRearrangement::of(&f);
        for &p in &[1.0, 2.0, 4.0] {
            let (x, y) = (f.lp_power(p).unwrap(), step.lp_power(p));
            if (x - y).abs() > 1e-6 * x.max(f64::MIN_POSITIVE) {
                bad += 1;
            }
        }
    }
    detail.push(format!("equimeasurability: {bad} violations"));
    total += bad;

    bad = 0;
    let riesz = KernelSpec::riesz(2, 1.0).unwrap();
    let m = default_moment_degree(&riesz).unwrap();
    let mut normalized = Vec::new();
    for &(eps, r) in &[(1e-2, 1.0), (1e-3, 2.0), (1e-4, 0.5), (1e-5, 1.0)] {
        let spec = ExtremalSpec::new(&riesz, eps, r, 1.0).unwrap();
        let phi = adams_profile_with(&riesz, &spec, 1024).unwrap();
        let basis = ball_poly_basis(2, m, r).unwrap();
        let tilde = moment_normalize(&phi, &basis).unwrap();
        let scale = tilde.lp_norm(2.0).unwrap();
        let worst = basis.inner_products(&tilde).unwrap().iter().fold(0.0f64, |a, v| a.max(v.abs())) / scale;
        if worst > 1e-9 {
            bad += 1;
        }
        normalized.push(tilde);
    }
    detail.push(format!("moments: {bad} violations"));
    total += bad;

    bad = 0;
    let bump = SampledFunction::radial_from_fn(2, geometric_edges(1e-3, 3.0, 300), |s| (-s * s).exp() * (1.0 - s * s)).unwrap();
    let gauss = moment_normalize(&bump, &ball_poly_basis(2, m, 3.0).unwrap()).unwrap();
    for f in normalized.iter().take(2).chain(std::iter::once(&gauss)) {
        let base = f.lp_norm(2.0).unwrap();
        let tf = potential_lp_power(&riesz, f, 2.0).unwrap();
        for &lambda in &[0.5, 2.0] {
            let g = f.dilate(lambda, DilationMode::Density, 1.0).unwrap();
            let tg = potential_lp_power(&riesz, &g, 2.0).unwrap();
            // ‖f_λ‖ = ‖f‖ and ‖Tf_λ‖^{n/α} = λ^{−n}‖Tf‖^{n/α}
            if (g.lp_norm(2.0).unwrap() / base - 1.0).abs() > 1e-3 || (tg * lambda * lambda / tf - 1.0).abs() > 1e-3 {
                bad += 1;
            }
        }
    }
    detail.push(format!("dilation: {bad} violations"));
    total += bad;

    Outcome { pass: total == 0, detail: detail.join(", ") }
}

fn main() {
    type Run = Box<dyn Fn() -> Outcome>;
    let criteria: Vec<(&str, Duration, Run)> = vec![
        ("constants", Duration::from_secs(1), Box::new(constants)),
        ("norm growth", Duration::from_secs(30), Box::new(|| from_reports(&[scenario("norm_slope")]))),
        ("potential lower bound", Duration::from_secs(120), Box::new(|| from_reports(&[scenario("lower_bound")]))),
        ("sharpness blow-up", Duration::from_secs(180), Box::new(|| from_reports(&[scenario("blowup_q1"), scenario("bounded_at_one")]))),
        ("subcritical scaling", Duration::from_secs(300), Box::new(|| from_reports(&[scenario("adachi_scaling")]))),
        ("tail law", Duration::from_secs(120), Box::new(|| from_reports(&[scenario("tail_scaling")]))),
        ("taylor coefficients", Duration::from_secs(10), Box::new(|| from_reports(&[scenario("taylor_match")]))),
        ("inversion", Duration::from_secs(30), Box::new(|| from_reports(&[scenario("inversion")]))),
        ("property suites", Duration::from_secs(120), Box::new(property_suites)),
        ("half-disk desk check", Duration::from_secs(60), Box::new(|| from_reports(&[scenario("trudinger_domain")]))),
        ("trace measure", Duration::from_secs(180), Box::new(|| from_reports(&[scenario("trace_blowup")]))),
    ];
    // optional criterion numbers, e.g. `-- 2 9`
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name} ({:.2} s of {} s) {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", ran - failed, ran);
    if failed > 0 {
        std::process::exit(1);
    }
}
