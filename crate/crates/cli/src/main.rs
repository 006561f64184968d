//! `ares`: synthesize, evaluate, verify and draw V-formation plans.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// Exit status of a failed command, with the message printed on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn planning(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ares", version, about = "Adaptive receding-horizon plan synthesis for bird flocks")]
struct Cli {
    /// JSON file of flat dotted keys, e.g. {"flock.v_max": 2, "ares.m": 30}.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output file (plan, eval) or directory (render).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "ARES_WORKERS", value_name = "INT")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Overrides shared by the subcommands that build a configuration.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// Number of birds.
    #[arg(long)]
    birds: Option<usize>,
    /// Cost threshold a plan has to reach.
    #[arg(long)]
    phi: Option<f64>,
    /// Maximum number of levels.
    #[arg(long = "levels", value_name = "M")]
    m: Option<usize>,
    /// Number of clones.
    #[arg(long = "clones", value_name = "N")]
    n: Option<usize>,
    /// Maximum prediction horizon.
    #[arg(long)]
    h_max: Option<usize>,
    /// Any config key, as KEY=VALUE with a JSON value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan from one random initial flock; writes plan JSON and a level log.
    Plan {
        #[command(flatten)]
        overrides: Overrides,
        /// Level-log CSV path; defaults to the plan path with `.levels.csv`.
        #[arg(long, value_name = "PATH")]
        log: Option<PathBuf>,
    },
    /// Run a batch of experiments and summarize them.
    Eval {
        #[command(flatten)]
        overrides: Overrides,
        /// Number of experiments; by default the Chernoff-Hoeffding bound.
        #[arg(short = 'N', long = "samples")]
        samples: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Per-experiment wall-clock budget in seconds (0 disables it).
        #[arg(long, value_name = "SECONDS")]
        budget: Option<f64>,
        /// JSON summary path; defaults to the CSV path with `.summary.json`.
        #[arg(long, value_name = "PATH")]
        summary: Option<PathBuf>,
        /// Leave the time_s column empty so repeated runs compare byte for byte.
        #[arg(long)]
        redact_time: bool,
    },
    /// Replay a plan file and check its recorded final cost.
    Replay {
        plan: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Draw the initial flock and the flock after every level as SVG files.
    Render {
        plan: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

impl Cli {
    fn run_config(&self, overrides: &Overrides) -> Result<RunConfig, Failure> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path).map_err(Failure::usage)?,
            None => RunConfig::default(),
        };
        for assignment in &overrides.set {
            c.apply_assignment(assignment).map_err(Failure::usage)?;
        }
        if let Some(v) = overrides.birds {
            c.birds = v;
        }
        if let Some(v) = overrides.phi {
            c.ares.phi = v;
        }
        if let Some(v) = overrides.m {
            c.ares.m = v;
        }
        if let Some(v) = overrides.n {
            c.ares.n = v;
        }
        if let Some(v) = overrides.h_max {
            c.ares.h_max = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Plan { overrides, log } => {
            let c = cli.run_config(overrides)?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("plan.json"));
            let log = log.clone().unwrap_or_else(|| out.with_extension("levels.csv"));
            commands::plan(&c, &out, &log)
        }
        Command::Eval { overrides, samples, epsilon, delta, budget, summary, redact_time } => {
            let mut c = cli.run_config(overrides)?;
            if samples.is_some() {
                c.samples = *samples;
            }
            c.epsilon = epsilon.unwrap_or(c.epsilon);
            c.delta = delta.unwrap_or(c.delta);
            c.budget_s = budget.unwrap_or(c.budget_s);
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("eval.csv"));
            let summary = summary.clone().unwrap_or_else(|| out.with_extension("summary.json"));
            commands::eval(&c, &out, &summary, *redact_time)
        }
        Command::Replay { plan, overrides } => commands::replay(&cli.run_config(overrides)?, plan),
        Command::Render { plan, overrides } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("frames"));
            commands::render(&cli.run_config(overrides)?, plan, &out)
        }
    }
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
        Err(f) => {
            eprintln!("ares: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
