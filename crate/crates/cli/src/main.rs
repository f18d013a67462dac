use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use boundedflow_cli::{cmd_attract, cmd_hypotheses, cmd_solve, cmd_verify, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "boundedflow", version, about = "Bounded whole-line solutions of x' + G(x,t) x = F(x,t)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Picard iteration; writes solution.csv and report.json.
    Solve(Common),
    /// Operator checks on a fixed corpus; writes verify.json.
    Verify(Common),
    /// Forward attraction experiment; writes trajectories.csv and attract.json.
    Attract(Common),
    /// Declared constants against sampled estimates; writes hypotheses.json.
    Hypotheses(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in problem id: ex0, ex1, c2pi, exatt.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "grid.t0", allow_negative_numbers = true)]
    grid_t0: Option<String>,
    #[arg(long = "grid.t1", allow_negative_numbers = true)]
    grid_t1: Option<String>,
    #[arg(long = "grid.n")]
    grid_n: Option<String>,
    #[arg(long = "tol.tail")]
    tol_tail: Option<String>,
    #[arg(long = "tol.quad")]
    tol_quad: Option<String>,
    #[arg(long = "tol.step")]
    tol_step: Option<String>,
    #[arg(long = "tol.residual")]
    tol_residual: Option<String>,
    #[arg(long = "tol.slack")]
    tol_slack: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    #[arg(long)]
    damping: Option<String>,
    /// Comma-separated list, e.g. `0.1,-0.1,0.3`.
    #[arg(long = "attract.perturbations", allow_hyphen_values = true)]
    perturbations: Option<String>,
    #[arg(long = "attract.horizon")]
    horizon: Option<String>,
    #[arg(long = "attract.h")]
    step: Option<String>,
    /// Any other dotted setting, e.g. `--set constants.L_G=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.problem {
            c.set("problem", p)?;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        let flags = [
            ("grid.t0", &self.grid_t0),
            ("grid.t1", &self.grid_t1),
            ("grid.n", &self.grid_n),
            ("tol.tail", &self.tol_tail),
            ("tol.quad", &self.tol_quad),
            ("tol.step", &self.tol_step),
            ("tol.residual", &self.tol_residual),
            ("tol.slack", &self.tol_slack),
            ("max_iter", &self.max_iter),
            ("damping", &self.damping),
            ("attract.perturbations", &self.perturbations),
            ("attract.horizon", &self.horizon),
            ("attract.h", &self.step),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                c.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got `{kv}`")))?;
            c.set(k.trim(), v)?;
        }
        Ok(c)
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("BOUNDEDFLOW_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("BOUNDEDFLOW_THREADS must be a count, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("configuration error: {e:#}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Solve(c) => c.config().and_then(|c| cmd_solve(&c)),
        Command::Verify(c) => c.config().and_then(|c| cmd_verify(&c)),
        Command::Attract(c) => c.config().and_then(|c| cmd_attract(&c)),
        Command::Hypotheses(c) => c.config().and_then(|c| cmd_hypotheses(&c)),
    };
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
