//! `posapprox`: fit, evaluate, compare and sweep constrained polynomial
//! approximations from a config file.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use posapprox::experiment::{
    run_compare, run_eval, run_fit, run_gen_points, run_sweep, sweep_exit_code, ExperimentConfig, RunOptions,
    SamplerSpec, SweepParam, EXIT_ERROR, EXIT_OK, MODEL_FILE,
};
use posapprox::prelude::{Generator, Method};
use posapprox::Error;

#[derive(Parser, Debug)]
#[command(name = "posapprox", version, about = "Positivity-constrained least-squares polynomial approximation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Experiment config (TOML, or JSON when the extension is .json).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the config's output directory.
    #[arg(long, global = true, value_name = "PATH")]
    output_dir: Option<PathBuf>,
    /// Override the global seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Lift the capacity ceiling on assembled matrices.
    #[arg(long, global = true)]
    force: bool,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble, solve and write model.json, trace.csv and report.json.
    Fit,
    /// Evaluate a saved model at the rows of a points CSV.
    Eval {
        /// Model file; defaults to model.json in the output directory.
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        points: PathBuf,
        /// Output CSV; defaults to values.csv in the output directory.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run several solvers against a fixed-length r-FISTA reference.
    Compare {
        /// Comma-separated method names.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        methods: Vec<Method>,
        /// Iteration budget for each compared method.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// One fit per value of a single parameter.
    Sweep {
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated ascending values.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<usize>,
    },
    /// Write a point set as CSV with a metadata sidecar.
    GenPoints {
        #[arg(long)]
        kind: Generator,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        per_dim: Option<usize>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Points file for kind=external.
        #[arg(long, value_name = "PATH")]
        path: Option<PathBuf>,
        /// Output CSV; defaults to points.csv in the output directory.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn load_config(g: &Global) -> Result<ExperimentConfig, Error> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --config".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(dir) = &g.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn output_dir(g: &Global) -> PathBuf {
    g.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn run(cli: Cli) -> Result<i32, Error> {
    let g = &cli.global;
    let opts = RunOptions { force: g.force };
    let say = |msg: String| {
        if !g.quiet {
            println!("{msg}");
        }
    };
    match cli.command {
        Command::Fit => {
            let cfg = load_config(g)?;
            let out = run_fit(&cfg, &opts)?;
            for w in &out.report.warnings {
                eprintln!("warning: {w}");
            }
            let ev = &out.report.evaluation;
            say(format!(
                "{} after {} iterations: l2_error {:.3e}, negative_fraction {}, max_violation {:e} -> {}",
                out.status,
                out.report.iterations,
                ev.l2_error,
                ev.negative_fraction,
                ev.max_violation,
                display(&cfg.output_dir)
            ));
            Ok(out.exit_code())
        }
        Command::Eval { model, points, out } => {
            let dir = match &g.config {
                Some(_) => load_config(g)?.output_dir,
                None => output_dir(g),
            };
            let model = model.unwrap_or_else(|| dir.join(MODEL_FILE));
            let out = out.unwrap_or_else(|| dir.join("values.csv"));
            let values = run_eval(&model, &points, &out)?;
            say(format!("{} values -> {}", values.len(), display(&out)));
            Ok(EXIT_OK)
        }
        Command::Compare { methods, iterations } => {
            let mut cfg = load_config(g)?;
            if let Some(n) = iterations {
                cfg.solver.max_iter = n;
            }
            let out = run_compare(&cfg, &methods, &opts)?;
            for m in &out.summary.methods {
                match &m.error {
                    Some(e) => say(format!("{:<24} error: {e}", m.method)),
                    None => say(format!(
                        "{:<24} {} after {} iterations, final distance {:.3e}, below 1e-10 at {}",
                        m.method,
                        m.status,
                        m.iterations.unwrap_or(0),
                        m.final_distance.unwrap_or(f64::NAN),
                        m.first_below_1e_10.map_or("never".to_string(), |k| k.to_string())
                    )),
                }
            }
            Ok(out.exit_code())
        }
        Command::Sweep { param, values } => {
            let cfg = load_config(g)?;
            let rows = run_sweep(&cfg, param, &values, &opts)?;
            for r in &rows {
                match &r.error {
                    Some(e) => say(format!("{param}={}: error: {e}", r.value)),
                    None => say(format!(
                        "{param}={}: {} after {} iterations, l2_error {:.3e}, negative_fraction {}",
                        r.value, r.status, r.iterations, r.l2_error, r.negative_fraction
                    )),
                }
            }
            Ok(sweep_exit_code(&rows))
        }
        Command::GenPoints {
            kind,
            count,
            per_dim,
            dim,
            path,
            out,
        } => {
            let spec = SamplerSpec {
                kind,
                count,
                per_dim,
                seed: g.seed,
                path,
            };
            let out = out.unwrap_or_else(|| output_dir(g).join("points.csv"));
            let set = run_gen_points(&spec, dim, &out, &opts)?;
            say(format!("{} points in {} dimension(s) -> {}", set.len(), set.dim(), display(&out)));
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors are configuration errors; help and version are not errors
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
