use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use giant_atoms::config::{Format, LayoutConfig, Output, Phase, ScenarioConfig};
use giant_atoms::output::{write_json, DataTable};
use giant_atoms::presets::{catalog, preset, run_study, Preset};
use giant_atoms::scenario::{run_scenario, ScenarioReport};
use giant_atoms::sweep::{init_thread_pool, Execution, Grid, Solver};
use giant_atoms::verify::{run_verification, VerifyOptions};

#[derive(Parser)]
#[command(name = "giant-atoms", version, about = "Single-photon scattering spectra of giant-atom arrays")]
struct Cli {
    /// Cap the number of worker threads.
    #[arg(long, global = true, env = "GIANT_ATOMS_THREADS")]
    threads: Option<usize>,
    /// Run sweeps on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    General,
    Cascade,
    Closed,
    All,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::General => Solver::General,
            SolverArg::Cascade => Solver::Cascade,
            SolverArg::Closed => Solver::ClosedForm,
            SolverArg::All => Solver::All,
        }
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output file (stdout if omitted). Extra tables go next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Detuning grid in units of γ, `min:max:count`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    grid: Option<Grid>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Reflection/transmission spectrum of a scenario file.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Collective modes (energies, decays, weights) of a scenario file.
    Modes {
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spectral-feature report (JSON) of a scenario file.
    Features {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Probed SSH chain of braided atoms.
    Ssh {
        #[arg(long, default_value_t = 16)]
        atoms: usize,
        #[arg(long, default_value = "0.2pi")]
        phi1: String,
        #[arg(long, default_value = "0.3pi")]
        phi2: String,
        #[arg(long, default_value = "0.1pi")]
        epsilon: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Seeded oracle-equivalence checks; exits non-zero on failure.
    Verify {
        #[arg(long, default_value_t = VerifyOptions::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = VerifyOptions::default().random_arrays)]
        arrays: usize,
        #[arg(long, default_value_t = VerifyOptions::default().detunings)]
        detunings: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a figure preset (`list` prints them all).
    Preset {
        id: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, count] = parts.as_slice() else {
        return Err("expected min:max:count".into());
    };
    let min: f64 = min.trim().parse().map_err(|e| format!("min: {e}"))?;
    let max: f64 = max.trim().parse().map_err(|e| format!("max: {e}"))?;
    let count: usize = count.trim().parse().map_err(|e| format!("count: {e}"))?;
    Grid::new(min, max, count).map_err(|e| e.to_string())
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn write_table(table: &DataTable, out: Option<&Path>) -> Result<()> {
    let mut w = writer(out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_json_to<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut w = writer(out)?;
    write_json(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn apply(config: &mut ScenarioConfig, run: &RunArgs) {
    if let Some(g) = run.grid {
        config.sweep = g;
    }
    if let Some(s) = run.solver {
        config.solver = s.into();
    }
    if let Some(f) = run.output.format {
        config.format = f.into();
    }
}

/// Write a scenario report: CSV puts the primary table at `out` and the rest
/// in sibling files; JSON writes the whole report.
fn emit(config: &ScenarioConfig, report: &ScenarioReport, out: Option<&Path>) -> Result<()> {
    for n in &report.notices {
        eprintln!("notice: {n}");
    }
    if config.format == Format::Json {
        return write_json_to(report, out);
    }
    let spectrum = config.wants(Output::Spectrum).then(|| report.spectrum_data()).flatten();
    let modes = config.wants(Output::Modes).then(|| report.modes_data()).flatten();
    let features: Vec<_> = report.features();

    let mut primary_written = false;
    if let Some(t) = &spectrum {
        write_table(t, out)?;
        primary_written = true;
    }
    if let Some(t) = &modes {
        match (primary_written, out) {
            (false, _) => {
                write_table(t, out)?;
                primary_written = true;
            }
            (true, Some(p)) => write_table(t, Some(&sibling(p, "modes", "csv")))?,
            (true, None) => {}
        }
    }
    if config.wants(Output::Features) {
        match (primary_written, out) {
            (false, _) => write_json_to(&features, out)?,
            (true, Some(p)) => write_json_to(&features, Some(&sibling(p, "features", "json")))?,
            (true, None) => {}
        }
    }
    Ok(())
}

fn scenario(mut config: ScenarioConfig, run: &RunArgs, execution: Execution) -> Result<()> {
    apply(&mut config, run);
    let report = run_scenario(&config, execution)?;
    emit(&config, &report, run.output.out.as_deref())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        init_thread_pool(n)?;
    }
    let execution = if cli.sequential { Execution::Sequential } else { Execution::Parallel };

    match cli.command {
        Command::Sweep { config, run } => {
            let mut c = ScenarioConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            if !c.wants(Output::Spectrum) {
                c.outputs.insert(0, Output::Spectrum);
            }
            scenario(c, &run, execution)?;
        }
        Command::Modes { config, output } => {
            let mut c = ScenarioConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            c.outputs = vec![Output::Modes];
            let run = RunArgs { grid: None, solver: None, output };
            scenario(c, &run, execution)?;
        }
        Command::Features { config, run } => {
            let mut c = ScenarioConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            c.outputs = vec![Output::Features];
            scenario(c, &run, execution)?;
        }
        Command::Ssh { atoms, phi1, phi2, epsilon, run } => {
            let layout = LayoutConfig::Ssh {
                atoms,
                phi1: Phase::Expr(phi1),
                phi2: Phase::Expr(phi2),
                epsilon: Phase::Expr(epsilon),
                gamma: 1.0,
            };
            let mut c = ScenarioConfig::new(layout, Grid::new(-3.0, 3.0, 3001)?);
            c.name = Some("ssh".into());
            c.outputs = vec![Output::Spectrum, Output::Features];
            scenario(c, &run, execution)?;
        }
        Command::Verify { seed, arrays, detunings, output } => {
            let options = VerifyOptions { seed, random_arrays: arrays, detunings };
            let report = run_verification(&options, execution);
            match output.format {
                Some(FormatArg::Json) => write_json_to(&report, output.out.as_deref())?,
                _ => {
                    let mut w = writer(output.out.as_deref())?;
                    for e in &report.entries {
                        writeln!(
                            w,
                            "{} {}: max deviation {:.3e} (tolerance {:.0e}) — {}",
                            if e.passed { "PASS" } else { "FAIL" },
                            e.name,
                            e.max_deviation,
                            e.tolerance,
                            e.detail
                        )?;
                    }
                    w.flush()?;
                }
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Preset { id, run } => {
            if id == "list" {
                let mut w = writer(run.output.out.as_deref())?;
                for (id, description) in catalog() {
                    writeln!(w, "{id:8} {description}")?;
                }
                w.flush()?;
                return Ok(ExitCode::SUCCESS);
            }
            match preset(&id)? {
                Preset::Scenario(c) => scenario(*c, &run, execution)?,
                Preset::Study { study, .. } => {
                    let report = run_study(&study, execution)?;
                    match run.output.format {
                        Some(FormatArg::Json) => write_json_to(&report, run.output.out.as_deref())?,
                        _ => {
                            for (k, v) in &report.summary {
                                eprintln!("{k} = {v}");
                            }
                            write_table(&report.table, run.output.out.as_deref())?;
                        }
                    }
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
