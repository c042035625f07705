use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twistedqd_cli::{output_path, run, CliError, RunManifest, Task, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "twistedqd", version, about = "Exact computations for twisted quantum double lattice models")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON run manifest; flags given on the command line override its fields
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// group family expression such as `dihedral(3)`, or a group JSON file
    #[arg(long, global = true)]
    group: Option<String>,
    /// cocycle family expression such as `cyclic(4,1)`, or a cocycle JSON file
    #[arg(long, global = true)]
    cocycle: Option<String>,
    /// lattice family expression such as `genus_polygon(2)`, or a lattice JSON file
    #[arg(long, global = true)]
    lattice: Option<String>,
    /// region `block(x0,y0,x1,y1[,bottom,right,top,left])` or region JSON file; repeat in order
    #[arg(long, global = true)]
    region: Vec<String>,
    /// numerical tolerance for the LTO and error-correction checks
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Hilbert dimension cap for the error-correction check
    #[arg(long, global = true)]
    cap: Option<u64>,
    /// seed for sampled spanning sets and sketches
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// report path; defaults to a file in $TWISTEDQD_OUT_DIR, else standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate the group, cocycle, lattice and regions
    Validate,
    /// Ground-state computations
    Gs {
        #[command(subcommand)]
        what: GsCommand,
    },
    /// Local topological order checks
    Lto {
        #[command(subcommand)]
        what: LtoCommand,
    },
    /// Knill-Laflamme error-correction check on a closed surface
    Qecc {
        /// maximal number of edges an error acts on
        #[arg(long)]
        weight: Option<usize>,
    },
    /// Compare ground-state dimensions on two lattices of the same surface
    Invariance {
        /// the second lattice
        #[arg(long)]
        lattice2: Option<String>,
    },
    /// Run the task named in the manifest
    Run {
        /// manifest path
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum GsCommand {
    /// Ground-state dimension
    Dim,
    /// Exact ground-state basis
    Basis,
}

#[derive(Subcommand, Debug)]
enum LtoCommand {
    /// Check one LTO axiom on the given regions
    Check {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        axiom: Option<u8>,
    },
}

/// Makes a command-line file reference independent of the manifest
/// directory by anchoring it at the working directory.
fn anchor(s: Option<String>) -> Option<String> {
    s.map(|v| {
        let p = Path::new(v.trim());
        if v.trim_end().ends_with(".json") && p.is_relative() {
            std::env::current_dir().map(|d| d.join(p).display().to_string()).unwrap_or(v)
        } else {
            v
        }
    })
}

fn build_manifest(cli: Cli) -> Result<RunManifest, CliError> {
    let c = cli.common;
    let mut flags = RunManifest {
        group: anchor(c.group),
        cocycle: anchor(c.cocycle),
        lattice: anchor(c.lattice),
        regions: c.region.into_iter().map(|r| anchor(Some(r)).unwrap_or_default()).collect(),
        tolerance: c.tolerance,
        cap: c.cap,
        seed: c.seed,
        out: c.out,
        ..RunManifest::default()
    };
    let mut manifest_path = c.manifest;
    match cli.command {
        Command::Validate => flags.task = Some(Task::Validate),
        Command::Gs { what: GsCommand::Dim } => flags.task = Some(Task::GsDim),
        Command::Gs { what: GsCommand::Basis } => flags.task = Some(Task::GsBasis),
        Command::Lto { what: LtoCommand::Check { axiom } } => {
            flags.task = Some(Task::Lto);
            flags.axiom = axiom;
        }
        Command::Qecc { weight } => {
            flags.task = Some(Task::Qecc);
            flags.weight = weight;
        }
        Command::Invariance { lattice2 } => {
            flags.task = Some(Task::Invariance);
            flags.lattice2 = anchor(lattice2);
        }
        Command::Run { manifest } => manifest_path = Some(manifest),
    }
    let base = match manifest_path {
        Some(p) => RunManifest::load(&p)?,
        None => RunManifest::default(),
    };
    Ok(base.merge(flags))
}

fn emit(manifest: &RunManifest, text: &str) -> Result<(), CliError> {
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match output_path(manifest, env_dir.as_deref()) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("output directory {}: {e}", dir.display())))?;
            }
            fs::write(&path, text).map_err(|e| CliError::Usage(format!("output {}: {e}", path.display())))?;
            eprintln!("report written to {}", path.display());
            Ok(())
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_manifest(cli).and_then(|m| {
        let report = run(&m)?;
        emit(&m, &report.to_json())?;
        eprintln!("{}: {}", report.task, if report.exit_code() == 0 { "pass" } else { "fail" });
        Ok(report.exit_code())
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("twistedqd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
