//! Command line front end: single solves and the two sweep experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sem_schwarz::experiment::{rows_to_csv_string, run_experiment, run_single_detailed, ExperimentKind, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "sem-schwarz", version, about = "Pressure Poisson solves with Schwarz preconditioners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one preconditioned solve and print its CSV row.
    Solve(Options),
    /// Run a full sweep: corner-study or fdm-timing.
    Experiment {
        name: ExperimentKind,
        #[command(flatten)]
        options: Options,
    },
}

/// Every flag mirrors a key of the config file; flags win.
#[derive(Args, Debug, Default)]
struct Options {
    /// key = value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mesh size, e.g. 8x8.
    #[arg(long)]
    elements: Option<String>,
    /// Velocity polynomial degree N.
    #[arg(long)]
    order: Option<String>,
    /// Comma separated degrees for experiments.
    #[arg(long)]
    orders: Option<String>,
    /// GL node layers borrowed from each neighbor.
    #[arg(long)]
    overlap: Option<String>,
    /// none, bj, ras, oras-o0 or oras-o2.
    #[arg(long)]
    precond: Option<String>,
    /// Include diagonal neighbors in the overlap: on or off.
    #[arg(long)]
    corners: Option<String>,
    /// Fast diagonalization for the local solves: on or off.
    #[arg(long)]
    fdm: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Domain lengths, e.g. 6.283,6.283.
    #[arg(long)]
    domain: Option<String>,
    /// Lowest tangential frequency, or auto.
    #[arg(long)]
    kmin: Option<String>,
    #[arg(long = "eta-shift")]
    eta_shift: Option<String>,
    /// outer-node, ghost or augmented.
    #[arg(long = "robin-site")]
    robin_site: Option<String>,
    /// consistent or lumped Q1 mass.
    #[arg(long)]
    mass: Option<String>,
    /// noise or manufactured.
    #[arg(long)]
    rhs: Option<String>,
    /// Timed repetitions per row (median reported).
    #[arg(long)]
    repetitions: Option<String>,
    /// Output CSV file.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Options {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let pairs = [
            ("elements", &self.elements),
            ("order", &self.order),
            ("orders", &self.orders),
            ("overlap", &self.overlap),
            ("precond", &self.precond),
            ("corners", &self.corners),
            ("fdm", &self.fdm),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("seed", &self.seed),
            ("domain", &self.domain),
            ("kmin", &self.kmin),
            ("eta-shift", &self.eta_shift),
            ("robin-site", &self.robin_site),
            ("mass", &self.mass),
            ("rhs", &self.rhs),
            ("repetitions", &self.repetitions),
        ];
        let mut out: Vec<_> = pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect();
        if let Some(p) = &self.out {
            out.push(("out", p.display().to_string()));
        }
        out
    }

    fn resolve(&self, mut config: RunConfig) -> Result<RunConfig> {
        if let Some(path) = &self.config {
            config
                .apply_kv_file(path)
                .with_context(|| format!("reading config {}", path.display()))?;
        }
        for (k, v) in self.flags() {
            config.set(k, &v).with_context(|| format!("--{k}"))?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(options) => {
            let config = options.resolve(RunConfig::default())?;
            let run = run_single_detailed(&config)?;
            let text = rows_to_csv_string(std::slice::from_ref(&run.row))?;
            match &config.output {
                Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            eprintln!(
                "setup {:.3}s, solve {:.3}s, {} iterations, converged: {}",
                run.setup_time_s, run.row.wall_time_s, run.row.iterations, run.row.converged
            );
        }
        Command::Experiment { name, options } => {
            let config = options.resolve(name.defaults())?;
            let out = config.output.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
            let result = run_experiment(name, &config, &config.orders, &out)?;
            for s in &result.speedups {
                eprintln!("N={}: RAS {:.3}s, ORAS-O0 {:.3}s, speedup {:.2}", s.order, s.ras_time_s, s.oras_o0_time_s, s.speedup);
            }
            for f in &result.files {
                eprintln!("wrote {}", f.display());
            }
            if !result.failures.is_empty() {
                bail!("{} configuration(s) failed; see the failure manifest", result.failures.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
