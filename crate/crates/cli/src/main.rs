//! `qipm-opf`: solve DC-OPF cases with the classical or quantum-emulated
//! interior-point engines and export traces and summaries.
//!
//! Exit codes: 0 when the sweep completes (failed cells included), 1 for plan
//! or I/O errors, 2 for case files that fail to parse or validate.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qipm_opf::bench::{parse_sweep, run_experiment, ExperimentPlan, MonitorSettings, PlanOutputs, Summary};
use qipm_opf::ipm::{Engine, SolveStatus, EPS_CONV_LOOSE, EPS_CONV_STRICT};
use qipm_opf::linsys::{HhlBackend, HhlConfig, NoiseChannel, NoiseSpec};

#[derive(Parser, Debug)]
#[command(name = "qipm-opf", version, about = "DC optimal power flow with classical and quantum-emulated interior-point methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a case at one load scale or over a sweep of scales.
    Solve(SolveArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Backend {
    Spectral,
    ErrorModel,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// MATPOWER case file.
    #[arg(long)]
    case: PathBuf,
    /// ipm, qipm, nt-qipm or cnt-qipm.
    #[arg(long, value_parser = parse_engine)]
    engine: Engine,
    /// none, const20, rescale20, uniform10 or readout:SIGMA.
    #[arg(long, default_value = "none", value_parser = parse_noise)]
    noise: NoiseSpec,
    /// Phase-estimation register width.
    #[arg(long, default_value_t = 16)]
    hhl_bits: u32,
    #[arg(long, value_enum, default_value_t = Backend::ErrorModel)]
    hhl_backend: Backend,
    /// Measurement shots per solve; 0 keeps exact amplitudes.
    #[arg(long, default_value_t = 0)]
    shots: u64,
    /// Noise seed; repeat for several seeds per load scale.
    #[arg(long = "seed", default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long, conflicts_with = "sweep")]
    load_scale: Option<f64>,
    /// Inclusive load-scale grid, start:stop:step.
    #[arg(long, value_parser = parse_sweep_arg)]
    sweep: Option<Sweep>,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 200)]
    k_max: usize,
    /// Slow-convergence threshold: a number, `strict` (1e-4) or `loose` (1e-3).
    #[arg(long, default_value = "strict", value_parser = parse_eps_conv)]
    eps_conv: f64,
    #[arg(long)]
    out_trace: PathBuf,
    #[arg(long)]
    out_summary: PathBuf,
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse().map_err(|e: qipm_opf::Error| e.to_string())
}

fn parse_noise(s: &str) -> Result<NoiseSpec, String> {
    let spec = match s {
        "none" => NoiseSpec::none(),
        "const20" => NoiseSpec::constant_20(0),
        "rescale20" => NoiseSpec { channel: NoiseChannel::ConstantRescale, magnitude: 0.2, ..NoiseSpec::none() },
        "uniform10" => NoiseSpec::uniform_10(0),
        _ => match s.strip_prefix("readout:") {
            Some(sigma) => {
                let sigma: f64 = sigma.parse().map_err(|_| format!("bad readout sigma {sigma:?}"))?;
                NoiseSpec::readout(sigma, 0)
            }
            None => return Err(format!("unknown noise channel {s:?}")),
        },
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

#[derive(Clone, Debug)]
struct Sweep(Vec<f64>);

fn parse_sweep_arg(s: &str) -> Result<Sweep, String> {
    parse_sweep(s).map(Sweep).map_err(|e| e.to_string())
}

fn parse_eps_conv(s: &str) -> Result<f64, String> {
    match s {
        "strict" => Ok(EPS_CONV_STRICT),
        "loose" => Ok(EPS_CONV_LOOSE),
        _ => s.parse().map_err(|_| format!("eps-conv must be a number, strict or loose, got {s:?}")),
    }
}

fn plan_from(args: SolveArgs) -> ExperimentPlan {
    let load_scales = match (args.sweep, args.load_scale) {
        (Some(Sweep(scales)), _) => scales,
        (None, Some(x)) => vec![x],
        (None, None) => vec![1.0],
    };
    let backend = match args.hhl_backend {
        Backend::Spectral => HhlBackend::Spectral,
        Backend::ErrorModel => HhlBackend::ErrorModel,
    };
    let mut plan = ExperimentPlan::new(args.case, args.engine);
    plan.load_scales = load_scales;
    plan.seeds = args.seeds;
    plan.hhl = HhlConfig { work_bits: args.hhl_bits, shots: args.shots, backend, ..HhlConfig::default() };
    plan.noise = args.noise;
    plan.opts.eps = args.eps;
    plan.opts.k_max = args.k_max;
    plan.monitor = MonitorSettings { eps_conv: args.eps_conv, ..MonitorSettings::default() };
    plan.outputs = PlanOutputs { trace_csv: Some(args.out_trace), summary_json: Some(args.out_summary) };
    plan
}

fn report(summary: &Summary) {
    let p = &summary.problem;
    println!(
        "{} | {} buses, {} branches, {} generators | n = {}, m = {}",
        summary.plan.case_path.display(),
        p.buses,
        p.branches,
        p.generators,
        p.n,
        p.m
    );
    for c in &summary.cells {
        let status = match c.status {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::NumericalFailure => "numerical-failure",
        };
        let fmt = |v: Option<f64>, p: usize| v.map_or_else(|| "-".to_string(), |v| format!("{v:.p$e}"));
        println!(
            "scale {:.2} seed {:<3} {:<17} iters {:>3} (q {:>3}, c {:>3})  objective {}  rel.err {}",
            c.load_scale,
            c.seed,
            status,
            c.iterations,
            c.quantum_iterations,
            c.classical_iterations,
            fmt(c.objective, 6),
            fmt(c.relative_error, 2),
        );
        if let Some(msg) = &c.failure {
            println!("    {msg}");
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<qipm_opf::Error>() {
        Some(qipm_opf::Error::Parse { .. } | qipm_opf::Error::Validation(_)) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(args) => {
            let case = args.case.clone();
            let exp = run_experiment(&plan_from(args)).with_context(|| format!("running {}", case.display()))?;
            report(&exp.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
