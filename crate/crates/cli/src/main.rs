use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use ccq::harness::{fit_scaling, run_trial, sweep, CsvRow, ExperimentConfig, FitAxis};
use ccq::hypothesis::{builtin_space, epsilon_cover, write_space, SpaceSpec};
use ccq::measures::{class_disagreement_coefficient, class_splitting_index, SplitIndexConfig};
use ccq::Error;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ccq", version, about = "Class-conditional query learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial of the config's base cell.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every cell of the config's sweep and write a CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print disagreement coefficients or splitting indices as CSV.
    Measure {
        #[arg(long)]
        space: SpaceSpec,
        #[arg(long, value_enum)]
        what: Measure,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        tau_grid: Vec<f64>,
    },
    /// Build an eps-cover and write it in the text space format.
    Cover {
        #[arg(long)]
        space: SpaceSpec,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the log-log slope of median query counts in a sweep CSV.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        x: FitAxis,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    Theta,
    Rho,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn execute(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Run { config, seed, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let record = run_trial(&cfg.base_cell(), 0, seed.unwrap_or(cfg.seed))?;
            let sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(std::fs::File::create(p).map_err(io)?),
                None => Box::new(std::io::stdout()),
            };
            let mut w = csv::Writer::from_writer(sink);
            w.serialize(CsvRow::from(&record)).map_err(io)?;
            w.flush().map_err(io)?;
            if let Some(f) = &record.failure {
                eprintln!("learner failure: {f}");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out
                .or_else(|| cfg.out.clone())
                .ok_or_else(|| Error::Config("no output path: set `out` in the config or pass --out".into()))?;
            for s in sweep(&cfg, &out)? {
                eprintln!(
                    "cell {}: {} trials, success {:.3}, median ccq {}",
                    s.cell, s.trials, s.success_freq, s.median_ccq
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Measure {
            space,
            what,
            eps_grid,
            tau_grid,
        } => {
            let (dom, sp) = builtin_space(&space)?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            match what {
                Measure::Theta => {
                    w.write_record(["eps", "theta"]).map_err(io)?;
                    for eps in eps_grid {
                        let theta = class_disagreement_coefficient(&sp, &dom, eps)?;
                        w.write_record([eps.to_string(), theta.to_string()]).map_err(io)?;
                    }
                }
                Measure::Rho => {
                    w.write_record(["eps", "tau", "rho"]).map_err(io)?;
                    for &eps in &eps_grid {
                        for &tau in &tau_grid {
                            let rho = class_splitting_index(&sp, &dom, tau, eps, SplitIndexConfig::default())?;
                            w.write_record([eps.to_string(), tau.to_string(), rho.to_string()])
                                .map_err(io)?;
                        }
                    }
                }
            }
            w.flush().map_err(io)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Cover { space, eps, out } => {
            let (dom, sp) = builtin_space(&space)?;
            let cover = epsilon_cover(&sp, &dom, eps)?;
            eprintln!("cover of {} hypotheses out of {}", cover.len(), sp.len());
            let text = write_space(&dom, &cover);
            match out {
                Some(p) => std::fs::write(&p, text).map_err(io)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Fit { csv, x, reps, seed } => {
            let fit = fit_scaling(&csv, x, reps, seed)?;
            println!("slope {:.4} (95% bootstrap {:.4} .. {:.4})", fit.slope, fit.ci.0, fit.ci.1);
            for (x, m) in &fit.points {
                println!("{x}\t{m}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
