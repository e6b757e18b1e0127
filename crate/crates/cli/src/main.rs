//! `polyak`: run, audit and compare Polyak step-size experiments.
//!
//! Exit codes: 0 success, 1 audit or compliance failure, 2 usage or config error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polyak_core::harness::{
    compare_schedules, emit_report, parse_config_with_overrides, render_text_report, run_experiment, to_json, verify,
    write_outputs, HarnessError, Regime, ReportFormat,
};
use polyak_core::{b_t, r_t_gamma, BoundCase, BoundParams, BoundReport, ScheduleKind};

#[derive(Debug, Parser)]
#[command(name = "polyak", version, about = "Gradient descent with the Polyak step size")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        config: PathBuf,
        /// Directory for report.json, report.txt and trajectory.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override any config key, e.g. `--set objective.dimension=5`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long = "T", value_name = "T")]
        horizon: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        schedule: Option<ScheduleKind>,
        #[arg(long, value_parser = ["json", "text", "both"])]
        format: Option<String>,
        /// Also write trajectory.svg.
        #[arg(long)]
        svg: bool,
        /// Include wall-clock duration in the JSON report.
        #[arg(long)]
        timing: bool,
    },
    /// Run the built-in audit suite.
    Verify {
        #[arg(long, default_value = "all")]
        regime: String,
        /// Print the full reports as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run one config under several schedules.
    Compare {
        config: PathBuf,
        /// Comma-separated schedule names.
        #[arg(long, value_delimiter = ',', default_value = "polyak,constant,inv-t,inv-sqrt-t")]
        schedules: Vec<ScheduleKind>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Print B_T and R_T,gamma for the given constants.
    Bounds {
        #[arg(long = "G")]
        g: f64,
        #[arg(long)]
        d0: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Omit for nonsmooth objectives.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
}

enum Failure {
    Usage(String),
    Audit(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Audit(e.to_string())
        }
    }
}

impl From<polyak_core::Error> for Failure {
    fn from(e: polyak_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Audit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn execute(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Run {
            config,
            out,
            mut overrides,
            horizon,
            seed,
            schedule,
            format,
            svg,
            timing,
        } => {
            let text = read(&config)?;
            if let Some(t) = horizon {
                overrides.push(format!("T={t}"));
            }
            if let Some(s) = seed {
                overrides.push(format!("seed={s}"));
            }
            if let Some(s) = schedule {
                overrides.push(format!("schedule.name=\"{}\"", s.as_str()));
            }
            if let Some(f) = format {
                overrides.push(format!("output.report=\"{f}\""));
            }
            if svg {
                overrides.push("output.svg=true".into());
            }
            if timing {
                overrides.push("output.include_timing=true".into());
            }
            let cfg = parse_config_with_overrides(&text, &overrides)?;
            let outcome = run_experiment(&cfg)?;
            let dir = out.or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
            match dir {
                Some(dir) => {
                    for path in write_outputs(&outcome, &dir)? {
                        eprintln!("wrote {}", path.display());
                    }
                    print!("{}", render_text_report(&outcome.report));
                }
                None => match cfg.output.report {
                    ReportFormat::Json => print!("{}", emit_report(&outcome.report)?),
                    _ => print!("{}", render_text_report(&outcome.report)),
                },
            }
            Ok(outcome.report.passed)
        }
        Command::Verify { regime, json } => {
            let regime: Regime = regime.parse()?;
            let report = verify(regime)?;
            if json {
                print!("{}", to_json(&report)?);
            } else {
                print!("{}", report.render_text());
            }
            Ok(report.passed)
        }
        Command::Compare {
            config,
            schedules,
            overrides,
            json,
        } => {
            let cfg = parse_config_with_overrides(&read(&config)?, &overrides)?;
            let report = compare_schedules(&cfg, &schedules)?;
            if json {
                print!("{}", to_json(&report)?);
            } else {
                print!("{}", report.render_text());
            }
            Ok(report.passed())
        }
        Command::Bounds {
            g,
            d0,
            alpha,
            beta,
            horizon,
            gamma,
        } => {
            let params = BoundParams::new(g, d0, alpha, beta, horizon);
            let exact = b_t(&params)?;
            let relaxed = r_t_gamma(&params.with_gamma(gamma))?;
            println!("G={g:e} d0={d0:e} alpha={alpha:e} beta={} T={horizon}", opt(beta));
            print_bound_table(&[("B_T".to_owned(), exact), (format!("R_T,{gamma}"), relaxed)]);
            Ok(true)
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_else(|| "not-applicable".into())
}

fn print_bound_table(rows: &[(String, BoundReport)]) {
    print!("{:<10}", "");
    for case in BoundCase::ALL {
        print!(" {:>22}", case.label());
    }
    println!(" {:>22}  active", "min");
    for (label, report) in rows {
        print!("{label:<10}");
        for case in BoundCase::ALL {
            print!(" {:>22}", opt(report.term(case)));
        }
        println!(" {:>22e}  {}", report.bound_value, report.active_case);
    }
}
