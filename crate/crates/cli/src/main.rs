use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cqed_core::analysis::{fft_spectrum, rabi_peak};
use cqed_core::harness::{compare_variants, load_run, load_steps, render_table, run_experiment, solve, RunConfig, PRESETS};

#[derive(Parser)]
#[command(name = "cqed", version, about = "Simulate the open Tavis-Cummings model with emulation circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact populations on the configured time grid, as CSV.
    Solve {
        #[command(flatten)]
        source: Source,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full experiment: synthesize, transpile, execute, mitigate, analyze.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
        /// Parent directory for the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Summary table over persisted runs.
    Compare {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Also write the rows as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frequency spectrum of a run directory or a populations CSV.
    Spectrum {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a preset configuration as TOML.
    Config {
        #[arg(long, default_value = "zz")]
        variant: String,
    },
}

#[derive(Args)]
struct Source {
    #[arg(long, conflicts_with = "variant")]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    variant: Option<String>,
}

impl Source {
    fn load(&self) -> Result<RunConfig> {
        match (&self.config, &self.variant) {
            (Some(path), _) => RunConfig::load(path).with_context(|| format!("loading {}", path.display())),
            (None, Some(name)) => Ok(RunConfig::preset(name)?),
            (None, None) => bail!("give --config <file> or --variant <{}>", PRESETS.join("|")),
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { source, out } => {
            let series = solve(&source.load()?)?;
            series.to_writer(output(out.as_deref())?)?;
        }
        Command::Run { source, seed, out, jobs } => {
            let mut config = source.load()?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(j) = jobs {
                config.jobs = j;
            }
            let parent = out.or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("runs"));
            let result = run_experiment(&config)?;
            let dir = result.persist(&parent.join(&config.name))?;
            let s = &result.summary;
            println!("run {} -> {}", s.name, dir.display());
            println!("  mhd {} (raw {})", fmt(s.mhd), fmt(s.mhd_raw));
            if let Some(ci) = &s.ci {
                println!("  {:.0}% CI [{:.4}, {:.4}]", 100.0 * ci.level, ci.lo, ci.hi);
            }
            println!("  mean discard {:.4}, excluded steps {}", s.mean_discard_fraction, s.excluded_steps.len());
            println!("  peak {} cycles/ns (exact {:.4}, bin {:.4})", fmt(s.peak_frequency), s.exact_peak_frequency, s.bin_width);
        }
        Command::Compare { runs, out } => {
            let loaded = runs.iter().map(|d| load_run(d).with_context(|| format!("loading {}", d.display()))).collect::<Result<Vec<_>>>()?;
            let rows = compare_variants(&loaded)?;
            print!("{}", render_table(&rows));
            if let Some(p) = out {
                let mut w = output(Some(&p))?;
                serde_json::to_writer_pretty(&mut w, &rows)?;
                writeln!(w)?;
            }
        }
        Command::Spectrum { input, out } => {
            let csv = if input.is_dir() { input.join("steps.csv") } else { input };
            let series = load_steps(&csv)?;
            let spectrum = fft_spectrum(&series)?;
            let peak = rabi_peak(&spectrum)?;
            eprintln!("peak {peak:.4} cycles/ns (bin width {:.4})", spectrum.bin_width());
            spectrum.to_writer(output(out.as_deref())?)?;
        }
        Command::Config { variant } => print!("{}", RunConfig::preset(&variant)?.to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
