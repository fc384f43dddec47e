//! `mixcut`: urn-chain mixing profiles, concentration bounds and two-host
//! epidemic cut-off experiments.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use commands::{bl, conc, epi, Subcommand};
use config::{field_names, layer, ConfigFile};
use output::{json_bytes, resolve_out, write_atomic, Format};

#[derive(Debug, Parser)]
#[command(name = "mixcut", version, about = "Mixing profiles, concentration bounds and cut-off experiments for Markov chains")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct Global {
    /// JSON file of option values; flags given on the command line take precedence
    #[arg(long, global = true, help_heading = "Global options")]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Validate the options, print the resolved set and exit
    #[arg(long, global = true, help_heading = "Global options")]
    #[serde(skip)]
    dry_run: bool,
    /// Worker threads for simulations [default: all cores]
    #[arg(long, global = true, help_heading = "Global options")]
    threads: Option<usize>,
    /// Output file (relative paths resolve against $MIXCUT_OUT_DIR when set) [default: stdout]
    #[arg(long, global = true, help_heading = "Global options")]
    out: Option<PathBuf>,
    /// Output format [default: depends on the subcommand]
    #[arg(long, global = true, value_enum, help_heading = "Global options")]
    format: Option<Format>,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    BlTv(bl::BlTv),
    BlCoupling(bl::BlCoupling),
    BlSurrogate(bl::BlSurrogate),
    BlWindow(bl::BlWindow),
    ConcBounds(conc::ConcBounds),
    ConcVerify(conc::ConcVerify),
    WalkHitting(conc::WalkHitting),
    EpiMean(epi::EpiMean),
    EpiSimulate(epi::EpiSimulate),
    EpiCoalesce(epi::EpiCoalesce),
    EpiCutoff(epi::EpiCutoff),
    EpiEquilibrium(epi::EpiEquilibrium),
}

fn run_one<T>(name: &str, parsed: T, global: Global, top: &ArgMatches, sub: &ArgMatches) -> Result<()>
where
    T: Subcommand + Serialize + DeserializeOwned,
{
    let file = global.config.as_deref().map(ConfigFile::load).transpose()?;
    if let Some(f) = &file {
        if let Some(cmd) = f.command() {
            if cmd != name {
                bail!("{}: config is for `{cmd}`, not `{name}`", f.path.display());
            }
        }
        let mut allowed = field_names(&parsed)?;
        allowed.extend(field_names(&global)?);
        f.check_keys(&allowed)?;
    }
    let mut opts = layer(parsed, &[sub], file.as_ref())?;
    let g = layer(global.clone(), &[top, sub], file.as_ref())?;
    opts.prepare()?;

    if global.dry_run {
        let mut resolved = serde_json::Map::new();
        resolved.insert("command".into(), name.into());
        if let serde_json::Value::Object(m) = serde_json::to_value(&g)? {
            resolved.extend(m);
        }
        if let serde_json::Value::Object(m) = serde_json::to_value(&opts)? {
            resolved.extend(m);
        }
        std::io::stdout().write_all(&json_bytes(&resolved)?)?;
        return Ok(());
    }

    if let Some(t) = g.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let bytes = opts.execute(g.format)?;
    match &g.out {
        Some(path) => write_atomic(&resolve_out(path), &bytes),
        None => Ok(std::io::stdout().write_all(&bytes)?),
    }
}

fn run() -> Result<()> {
    let matches = Cli::command().get_matches();
    let cli = Cli::from_arg_matches(&matches)?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let g = cli.global;
    match cli.command {
        Command::BlTv(a) => run_one(name, a, g, &matches, sub),
        Command::BlCoupling(a) => run_one(name, a, g, &matches, sub),
        Command::BlSurrogate(a) => run_one(name, a, g, &matches, sub),
        Command::BlWindow(a) => run_one(name, a, g, &matches, sub),
        Command::ConcBounds(a) => run_one(name, a, g, &matches, sub),
        Command::ConcVerify(a) => run_one(name, a, g, &matches, sub),
        Command::WalkHitting(a) => run_one(name, a, g, &matches, sub),
        Command::EpiMean(a) => run_one(name, a, g, &matches, sub),
        Command::EpiSimulate(a) => run_one(name, a, g, &matches, sub),
        Command::EpiCoalesce(a) => run_one(name, a, g, &matches, sub),
        Command::EpiCutoff(a) => run_one(name, a, g, &matches, sub),
        Command::EpiEquilibrium(a) => run_one(name, a, g, &matches, sub),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
