use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use blowup_cli::{parse_emit, parse_sweep, run, summary_row, table_sweep, InitialChoice, RunConfig, SUMMARY_HEADER};
use clap::Parser;

/// Certify finite-time blow-up of the discretized exponential reaction-diffusion system.
#[derive(Debug, Parser)]
#[command(name = "blowup", version)]
struct Args {
    /// Grid size (even, at least 4)
    #[arg(long, required_unless_present = "sweep")]
    n: Option<usize>,
    /// Exponent of the nonlinearity
    #[arg(long, required_unless_present = "sweep")]
    m: Option<u32>,
    /// Reaction coefficient as a decimal
    #[arg(long, default_value = "1")]
    lambda: String,
    /// cosine_m1, cosine_m2 or file:<path>; defaults to the profile paired with m
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long)]
    hmin: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Target sublevel for the Lyapunov domain search
    #[arg(long)]
    epsilon_target: Option<f64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Comma list of json, csv, surface
    #[arg(long, default_value = "json,csv")]
    emit: String,
    /// File with one configuration per line as key=value pairs
    #[arg(long)]
    sweep: Option<PathBuf>,
}

fn base_config(args: &Args) -> Result<RunConfig, blowup_cli::CliError> {
    let m = args.m.unwrap_or(1);
    let mut cfg = RunConfig::new(args.n.unwrap_or(0), m);
    cfg.lambda = args.lambda.clone();
    if let Some(init) = &args.initial {
        cfg.initial = init.parse()?;
    } else {
        cfg.initial = InitialChoice::default_for(m);
    }
    if let Some(v) = args.order {
        cfg.order = v;
    }
    if let Some(v) = args.h0 {
        cfg.h0 = v;
    }
    if let Some(v) = args.hmin {
        cfg.hmin = v;
    }
    if let Some(v) = args.max_steps {
        cfg.max_steps = v;
    }
    cfg.epsilon_target = args.epsilon_target;
    cfg.out_dir = args.out_dir.clone();
    cfg.emit = parse_emit(&args.emit)?;
    Ok(cfg)
}

fn main() -> anyhow::Result<ExitCode> {
    let args = Args::parse();
    let base = match base_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(e.exit_code() as u8));
        }
    };

    if let Some(path) = &args.sweep {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading sweep file {}", path.display()))?;
        let mut rows = parse_sweep(&text, &base);
        if args.initial.is_some() {
            for (_, cfg) in rows.iter_mut() {
                if let Ok(c) = cfg {
                    c.initial = base.initial.clone();
                }
            }
        }
        let outcome = table_sweep(rows);
        print!("{}", outcome.table);
        return Ok(ExitCode::from(outcome.exit_code as u8));
    }

    match run(&base) {
        Ok(report) => {
            println!("{SUMMARY_HEADER}");
            println!("{}", summary_row(&report.certificate));
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(e.exit_code() as u8))
        }
    }
}
