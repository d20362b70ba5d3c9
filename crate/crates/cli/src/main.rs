use adamsq_core::experiment::{
    parse_extended, reports_to_csv, reports_to_json, run_scenario, ExperimentReport, ScenarioConfig, SCENARIOS,
};
use adamsq_core::extremal::{default_moment_degree, extremal_family, ExtremalSpec, PROFILE_CELLS};
use adamsq_core::field::{fmt_float, uniform_edges, SampledFunction};
use adamsq_core::functional::{auto_truncation, exp_functional, Region};
use adamsq_core::kernel::{constant_gamma, sharp_constants, KernelSpec, Operator};
use adamsq_core::potential::apply_potential;
use adamsq_core::rearrange::decreasing_rearrangement;
use adamsq_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "adamsq", version, about = "Riesz potentials and sharp exponential inequalities")]
struct Cli {
    /// JSON scenario configuration merged over the scenario defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct KernelArgs {
    /// riesz, gradient or perturbed:<δ>:<c>
    #[arg(long, default_value = "riesz")]
    kernel: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

impl KernelArgs {
    fn spec(&self) -> Result<KernelSpec, CliError> {
        KernelSpec::from_id(&self.kernel, self.n, self.alpha).map_err(CliError::usage)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sharp constants of a kernel, printed as JSON.
    Constants(KernelArgs),
    /// Evaluates Tf at the nodes of a sample file.
    Potential {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Sampled data (CSV); the indicator of the unit ball by default.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Evaluation nodes (CSV); the nodes of the data by default.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Decreasing rearrangement f* and maximal function f** of sampled data.
    Rearrange {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// One member ψ_{ε,r} of the extremal family.
    Extremal {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// q ∈ [1, ∞]; "inf" allowed.
        #[arg(long, default_value = "1")]
        q: String,
        #[arg(long, default_value_t = PROFILE_CELLS)]
        cells: usize,
    },
    /// ∫_E exp[c|u|^p] dν for sampled data u.
    Functional {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// ball:R, annulus:a:b or domain
        #[arg(long, default_value = "domain")]
        region: String,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Use the truncated exponential exp_N with the automatic N.
        #[arg(long)]
        truncate: bool,
    },
    /// Runs a scenario, or all of them, and reports the verdicts.
    Verify { scenario: String },
    /// Summarizes report files written by `verify`.
    Report { files: Vec<PathBuf> },
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        CliError { code: 2, message: e.to_string() }
    }

    fn from_core(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::Domain(_) | Error::Unsupported(_) | Error::Io(_) => 2,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("adamsq: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let ext = match cli.format {
        OutFormat::Csv => "csv",
        OutFormat::Json => "json",
    };
    match &cli.command {
        Command::Constants(k) => {
            let spec = k.spec()?;
            let c = sharp_constants(&spec).map_err(CliError::from_core)?;
            let gamma_gradient = constant_gamma(Operator::GradientPower, k.n, k.alpha).ok();
            let v = json!({
                "kernel": spec.id,
                "n": k.n,
                "alpha": k.alpha,
                "a_g": c.a_g,
                "c_alpha": c.c_alpha,
                "gamma": c.gamma,
                "gamma_gradient": gamma_gradient,
                "ball_volume": c.ball_volume,
            });
            emit(cli, "constants", "json", &pretty(&v))?;
        }
        Command::Potential { kernel, input, points } => {
            let k = kernel.spec()?;
            let f = load_or_indicator(input.as_deref(), k.n)?;
            let pts = match points {
                Some(p) => load(p)?,
                None => f.clone(),
            };
            let field = apply_potential(&k, &f, &pts).map_err(CliError::from_core)?;
            let text = match cli.format {
                OutFormat::Csv => {
                    let mut buf = Vec::new();
                    field.base.write_csv(&mut buf).map_err(CliError::from_core)?;
                    String::from_utf8(buf).map_err(CliError::usage)?
                }
                OutFormat::Json => pretty(&json!({
                    "kernel": field.kernel_id,
                    "radius": (0..field.base.len()).map(|i| field.base.node_radius(i)).collect::<Vec<_>>(),
                    "value": (0..field.base.len()).map(|i| field.base.magnitude(i)).collect::<Vec<_>>(),
                    "quadrature_error": field.quadrature_error,
                    "flagged": field.flagged,
                })),
            };
            emit(cli, "potential", ext, &text)?;
        }
        Command::Rearrange { n, input } => {
            let f = load_or_indicator(input.as_deref(), *n)?;
            let d = decreasing_rearrangement(&f);
            let text = match cli.format {
                OutFormat::Csv => {
                    let rows = (0..d.t_grid.len()).map(|i| vec![d.t_grid[i], d.star[i], d.double_star[i]]);
                    table(&["t", "star", "double_star"], rows)?
                }
                OutFormat::Json => pretty(&serde_json::to_value(&d).map_err(CliError::usage)?),
            };
            emit(cli, "rearrange", ext, &text)?;
        }
        Command::Extremal { kernel, epsilon, r, q, cells } => {
            let k = kernel.spec()?;
            let q = parse_extended(q).ok_or_else(|| CliError::usage(format!("bad q {q}")))?;
            let spec = ExtremalSpec::new(&k, *epsilon, *r, q).map_err(CliError::from_core)?;
            let fam = extremal_family(&k, &spec, default_moment_degree(&k), *cells).map_err(CliError::from_core)?;
            let text = match cli.format {
                OutFormat::Csv => {
                    let mut buf = Vec::new();
                    fam.psi.write_csv(&mut buf).map_err(CliError::from_core)?;
                    String::from_utf8(buf).map_err(CliError::usage)?
                }
                OutFormat::Json => pretty(&json!({
                    "spec": serde_json::to_value(fam.spec).map_err(CliError::usage)?,
                    "profile_norm": fam.profile_norm,
                    "potential_norm": fam.potential_norm,
                    "cells": fam.psi.len(),
                })),
            };
            emit(cli, "extremal", ext, &text)?;
        }
        Command::Functional { n, alpha, input, c, region, sigma, truncate } => {
            let u = load_or_indicator(input.as_deref(), *n)?;
            let region = Region::parse(region).map_err(CliError::from_core)?;
            let nf = *n as f64;
            if !(*alpha > 0.0 && *alpha < nf) {
                return Err(CliError::usage(format!("order {alpha} outside (0, {n})")));
            }
            let power = nf / (nf - alpha);
            let trunc = truncate.then(|| auto_truncation(*n, *alpha));
            let rep = exp_functional(&u, *c, region, power, *sigma, trunc).map_err(CliError::from_core)?;
            let text = match cli.format {
                OutFormat::Csv => {
                    let mut t = String::from("value,constant,region,max_exponent\n");
                    t.push_str(&format!(
                        "{},{},{},{}\n",
                        fmt_float(rep.value),
                        fmt_float(rep.constant_used),
                        rep.region,
                        fmt_float(rep.max_exponent)
                    ));
                    t
                }
                OutFormat::Json => pretty(&serde_json::to_value(&rep).map_err(CliError::usage)?),
            };
            emit(cli, "functional", ext, &text)?;
        }
        Command::Verify { scenario } => {
            let ids: Vec<&str> = if scenario == "all" {
                SCENARIOS.to_vec()
            } else if SCENARIOS.contains(&scenario.as_str()) {
                vec![scenario.as_str()]
            } else {
                return Err(CliError::usage(format!(
                    "unknown scenario {scenario}; expected all or one of {}",
                    SCENARIOS.join(", ")
                )));
            };
            let overrides = read_overrides(cli)?;
            let mut reports: Vec<ExperimentReport> = Vec::new();
            for id in ids {
                let cfg = scenario_config(id, &overrides, cli.seed)?;
                let rep = run_scenario(&cfg).map_err(CliError::from_core)?;
                eprintln!("{}: {}", rep.scenario, if rep.pass { "pass" } else { "fail" });
                reports.push(rep);
            }
            let text = match cli.format {
                OutFormat::Csv => reports_to_csv(&reports),
                OutFormat::Json => reports_to_json(&reports),
            }
            .map_err(CliError::from_core)?;
            let stem = if scenario == "all" { "report" } else { scenario.as_str() };
            emit(cli, stem, ext, &text)?;
            return Ok(reports.iter().all(|r| r.pass));
        }
        Command::Report { files } => {
            let files = if files.is_empty() {
                let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
                vec![dir.join("report.csv")]
            } else {
                files.clone()
            };
            return summarize(&files);
        }
    }
    Ok(true)
}

fn read_overrides(cli: &Cli) -> Result<serde_json::Map<String, Value>, CliError> {
    let Some(path) = &cli.config else {
        return Ok(serde_json::Map::new());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::usage("configuration must be a JSON object")),
        Err(e) => Err(CliError::usage(format!("{}: {e}", path.display()))),
    }
}

fn scenario_config(id: &str, overrides: &serde_json::Map<String, Value>, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    if let Some(s) = overrides.get("scenario").and_then(Value::as_str) {
        if s != id {
            return Err(CliError::usage(format!("configuration is for {s}, not {id}")));
        }
    }
    let mut m = overrides.clone();
    m.insert("scenario".into(), Value::from(id));
    if let Some(s) = seed {
        m.insert("seed".into(), Value::from(s));
    }
    ScenarioConfig::from_json(&Value::Object(m).to_string()).map_err(CliError::from_core)
}

fn summarize(files: &[PathBuf]) -> Result<bool, CliError> {
    let mut all_pass = true;
    println!("{:<18} {:>6} {:>6}  verdict", "scenario", "pass", "fail");
    for path in files {
        let mut rd = csv::Reader::from_path(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let headers = rd.headers().map_err(CliError::usage)?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::usage(format!("{}: no {name} column", path.display())))
        };
        let (sc, vc) = (col("scenario")?, col("verdict")?);
        let mut tally: Vec<(String, usize, usize)> = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(CliError::usage)?;
            let (s, v) = (&rec[sc], &rec[vc]);
            if v == "sample" {
                continue;
            }
            if tally.last().map(|t| t.0 != s).unwrap_or(true) {
                tally.push((s.to_string(), 0, 0));
            }
            let t = tally.last_mut().expect("pushed above");
            if v == "pass" {
                t.1 += 1;
            } else {
                t.2 += 1;
            }
        }
        for (s, p, f) in tally {
            let ok = f == 0 && p > 0;
            all_pass &= ok;
            println!("{s:<18} {p:>6} {f:>6}  {}", if ok { "pass" } else { "fail" });
        }
    }
    Ok(all_pass)
}

fn load(path: &Path) -> Result<SampledFunction, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    SampledFunction::read_csv(file).map_err(CliError::from_core)
}

fn load_or_indicator(path: Option<&Path>, n: usize) -> Result<SampledFunction, CliError> {
    match path {
        Some(p) => load(p),
        None => SampledFunction::radial(n, uniform_edges(1.0, 64), vec![1.0; 64]).map_err(CliError::from_core),
    }
}

fn table(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<String, CliError> {
    let mut t = header.join(",");
    t.push('\n');
    for row in rows {
        t.push_str(&row.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(","));
        t.push('\n');
    }
    Ok(t)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn emit(cli: &Cli, stem: &str, ext: &str, text: &str) -> Result<(), CliError> {
    match &cli.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
            let path = dir.join(format!("{stem}.{ext}"));
            std::fs::write(&path, text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
        }
    }
}
