use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use peelfrag::harness::config::ExperimentConfig;
use peelfrag::harness::dump::{self, ExploreDump, GfDump};
use peelfrag::harness::experiments::{self, with_threads};
use peelfrag::harness::export::{write_csv, write_csv_to, write_json, write_json_to, Provenance, Table, WithProvenance};
use peelfrag::harness::report::ComparisonReport;
use peelfrag::harness::validate::{validate, ValidateConfig};
use peelfrag::OddSplit;

#[derive(Parser)]
#[command(name = "peelfrag", version, about = "Peeling by layers of Boltzmann triangulations and its growth-fragmentation limit")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory, or file for single-table commands.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat `key = value` experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Partition function, cycle and volume weights.
    Weights {
        #[arg(long, default_value_t = 100)]
        p_max: usize,
        /// Also list exact counts for `n <= N_MAX`, `p <= P_MAX`.
        #[arg(long, num_args = 2, value_names = ["N_MAX", "P_MAX"])]
        counts: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// One-step law, or the locally largest cycle row with `--llc`.
    Kernel {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        llc: bool,
        #[arg(long, default_value = "literal")]
        odd_split: OddSplit,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Explore Boltzmann triangulations layer by layer.
    Explore {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long)]
        max_height: Option<u32>,
        /// Advance all cycles layer by layer and record the martingales.
        #[arg(long)]
        sync: bool,
    },
    /// Locally largest cycle chain.
    Llc {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Index by height instead of step.
        #[arg(long)]
        heights: bool,
        #[arg(long, default_value = "literal")]
        odd_split: OddSplit,
    },
    /// Cell systems of the growth-fragmentation.
    Gf {
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 0.01)]
        floor: f64,
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// Psi and kappa on a grid.
    Cumulants {
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2,2.5,3,3.5,4")]
        q_grid: Vec<f64>,
    },
    /// Ranked cycle lengths against the growth-fragmentation.
    Theorem1(ExpArgs),
    /// Cutoff ladder: lost mass, frozen mass and frozen-hole heights.
    Theorem2(ExpArgs),
    /// Height of the map against the extinction time.
    Height(ExpArgs),
    /// Locally largest cycle scaling and kernel against engine.
    LlcScaling(ExpArgs),
    /// Martingale and volume means.
    Martingale(ExpArgs),
    /// Reweighted rows and the cycle martingale along the locally largest cycle.
    Uipt(ExpArgs),
    /// Laplace transform, self-similarity and time change of the continuum.
    Continuum(ExpArgs),
    /// Deterministic exact-identity suite.
    Validate {
        #[arg(long, default_value_t = 10_000)]
        p_max: usize,
        #[arg(long, default_value_t = 40)]
        counts_max: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    continuum_samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<usize>>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_threads(cli.threads, || execute(&cli)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn provenance(seed: u64, what: &str) -> Provenance {
    Provenance::new(seed, &peelfrag::harness::config::config_hash(what))
}

// Write one table to `out`, or to stdout.
fn emit(out: Option<&Path>, prov: &Provenance, table: &Table) -> Result<()> {
    match out {
        Some(path) => write_csv(path, prov, table).with_context(|| path.display().to_string())?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv_to(&mut lock, prov, table)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: serde::Serialize>(out: Option<&Path>, prov: &Provenance, body: &T) -> Result<()> {
    let doc = WithProvenance { provenance: prov, body };
    match out {
        Some(path) => write_json(path, &doc).with_context(|| path.display().to_string())?,
        None => write_json_to(std::io::stdout().lock(), &doc)?,
    }
    Ok(())
}

fn emit_dir(out: Option<&Path>, prov: &Provenance, tables: &[(String, Table)]) -> Result<PathBuf> {
    let dir = out.map_or_else(|| PathBuf::from("out"), Path::to_path_buf);
    std::fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
    for (name, t) in tables {
        write_csv(&dir.join(format!("{name}.csv")), prov, t)?;
    }
    Ok(dir)
}

fn execute(cli: &Cli) -> Result<bool> {
    let seed = cli.seed.unwrap_or(1);
    let out = cli.out.as_deref();
    match &cli.cmd {
        Cmd::Weights { p_max, counts, format } => {
            let counts = counts.as_ref().map(|c| (c[0], c[1]));
            let prov = provenance(0, &format!("weights p_max={p_max} counts={counts:?}"));
            match format {
                Format::Json => emit_json(out, &prov, &dump::weights_dump(*p_max, counts)?)?,
                Format::Csv => emit(out, &prov, &dump::weights_table(*p_max)?)?,
            }
        }
        Cmd::Kernel { p, llc, odd_split, format } => {
            let prov = provenance(0, &format!("kernel p={p} llc={llc} odd_split={odd_split:?}"));
            if *llc {
                let (row, t) = dump::llc_row_table(*p, *odd_split)?;
                match format {
                    Format::Json => emit_json(out, &prov, &row)?,
                    Format::Csv => emit(out, &prov, &t)?,
                }
            } else {
                let (law, t) = dump::step_law_table(*p)?;
                match format {
                    Format::Json => emit_json(out, &prov, &law)?,
                    Format::Csv => emit(out, &prov, &t)?,
                }
            }
        }
        Cmd::Explore { p, samples, cutoff, max_height, sync } => {
            let d = ExploreDump { p: *p, samples: *samples, seed, cutoff: *cutoff, max_height: *max_height, sync: *sync };
            let tables = dump::explore_tables(&d)?;
            let dir = emit_dir(out, &provenance(seed, &format!("{d:?}")), &tables)?;
            eprintln!("wrote {}", dir.display());
        }
        Cmd::Llc { p, samples, heights, odd_split } => {
            let t = dump::llc_table(*p, *samples, seed, *heights, *odd_split)?;
            let what = format!("llc p={p} samples={samples} heights={heights} odd_split={odd_split:?}");
            emit(out, &provenance(seed, &what), &t)?;
        }
        Cmd::Gf { x0, floor, delta, horizon, dt, samples } => {
            let d = GfDump { x0: *x0, floor: *floor, delta: *delta, horizon: *horizon, dt: *dt, samples: *samples, seed };
            let tables = dump::gf_tables(&d)?;
            let dir = emit_dir(out, &provenance(seed, &format!("{d:?}")), &tables)?;
            eprintln!("wrote {}", dir.display());
        }
        Cmd::Cumulants { q_grid } => {
            emit(out, &provenance(0, &format!("cumulants {q_grid:?}")), &dump::cumulants_table(q_grid)?)?;
        }
        Cmd::Validate { p_max, counts_max } => {
            let cfg = ValidateConfig { p_max: *p_max, k_max: *p_max, counts_max: *counts_max };
            let rep = validate(&cfg)?;
            return finish(&rep, out, None);
        }
        Cmd::Theorem1(a) => return experiment("theorem1", a, cli),
        Cmd::Theorem2(a) => return experiment("theorem2", a, cli),
        Cmd::Height(a) => return experiment("height", a, cli),
        Cmd::LlcScaling(a) => return experiment("llc", a, cli),
        Cmd::Martingale(a) => return experiment("martingale", a, cli),
        Cmd::Uipt(a) => return experiment("uipt", a, cli),
        Cmd::Continuum(a) => return experiment("continuum", a, cli),
    }
    Ok(true)
}

fn experiment(name: &str, a: &ExpArgs, cli: &Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let mut c = ExperimentConfig::load(path)?;
            if !c.experiment.is_empty() && c.experiment != name {
                bail!("{} configures {}, not {name}", path.display(), c.experiment);
            }
            c.experiment = name.to_string();
            c
        }
        None => experiments::preset(name)?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.samples {
        cfg.samples = n;
        if a.continuum_samples.is_none() && name != "continuum" {
            cfg.continuum_samples = n;
        }
    }
    if let Some(n) = a.continuum_samples {
        cfg.continuum_samples = n;
    }
    if let Some(p) = &a.p {
        cfg.p = p.clone();
    }
    for kv in &a.set {
        let (k, v) = kv.split_once('=').with_context(|| format!("--set {kv}: expected key=value"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    let outcome = experiments::run(&cfg)?;
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(name));
    outcome.write(&dir)?;
    std::fs::write(dir.join(format!("{name}.cfg")), cfg.canonical())?;
    finish(&outcome.report, None, Some(&dir))
}

fn finish(rep: &ComparisonReport, out: Option<&Path>, dir: Option<&Path>) -> Result<bool> {
    if let Some(path) = out {
        write_json(path, rep)?;
    }
    let mut text = rep.summary();
    if let Some(d) = dir {
        text.push_str(&format!("wrote {}\n", d.display()));
    }
    text.push_str(&format!("runtime {:.1} s\n", rep.runtime_s));
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    // a closed pipe is not an error for a summary
    if let Err(e) = lock.write_all(text.as_bytes()).and_then(|_| lock.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    Ok(rep.pass())
}
