//! Command-line front end: generate catalog objects, validate files,
//! double a building into a twin, run the verification suite, and drive
//! the isometry-extension pipeline. Exit codes: 0 success, 1 a
//! mathematical check failed, 2 unusable input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use twinbuildings::twin::spherical_double;
use twinbuildings_workbench::catalog::{generate_building, CatalogId};
use twinbuildings_workbench::extension::{extension_report_json, run_extension};
use twinbuildings_workbench::format::{
    decode_building, decode_isometry, decode_twin, encode_building, encode_isometry, encode_twin,
    DecodeError,
};
use twinbuildings_workbench::suite::{run_verification, Level};

#[derive(Parser)]
#[command(
    name = "workbench",
    about = "Finite twin-building workbench: generation, validation, retraction and transport checks, isometry extension"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a catalog building and write it as canonical JSON.
    Gen {
        /// Catalog id: rank1(n), fano, pg23, pg32, or prod(id,id,...).
        #[arg(long)]
        id: String,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a file against the structure it claims to describe.
    Check {
        #[command(subcommand)]
        what: CheckCmd,
    },
    /// Read a building file and write the twin obtained by doubling it.
    Double {
        /// Input building file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output twin file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Grow a seed isometry through the extension pipeline.
    Extend {
        /// Source twin file.
        #[arg(long)]
        twin: PathBuf,
        /// Target twin file; defaults to the source twin.
        #[arg(long = "twin-prime")]
        twin_prime: Option<PathBuf>,
        /// Seed isometry file.
        #[arg(long)]
        seed: PathBuf,
        /// Output isometry file.
        #[arg(long)]
        out: PathBuf,
        /// Report file.
        #[arg(long)]
        report: PathBuf,
    },
    /// Run the verification suite on a twin file.
    Suite {
        /// Twin file.
        #[arg(long)]
        twin: PathBuf,
        /// exhaustive or sampled.
        #[arg(long, default_value = "exhaustive")]
        level: Level,
        /// Seed for the sampled draws.
        #[arg(long, default_value_t = 0)]
        rng: u64,
        /// Report file.
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Validate a building file.
    Building { file: PathBuf },
    /// Validate a twin file.
    Twin { file: PathBuf },
}

/// All the ways a run can end; the variant fixes the exit code.
enum Outcome {
    /// Everything passed.
    Pass,
    /// Input was well-formed but a mathematical check failed.
    CheckFailed(String),
    /// Input was unusable: parse, schema, catalog, or IO problems.
    BadInput(String),
}

fn read_file(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path)
        .map_err(|e| Outcome::BadInput(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), Outcome> {
    std::fs::write(path, content)
        .map_err(|e| Outcome::BadInput(format!("cannot write {}: {e}", path.display())))
}

fn decode_failure(e: DecodeError) -> Outcome {
    match e {
        DecodeError::Format(f) => Outcome::BadInput(f.to_string()),
        DecodeError::Content(c) => Outcome::CheckFailed(c.to_string()),
    }
}

fn run(cli: Cli) -> Outcome {
    match run_inner(cli) {
        Ok(()) => Outcome::Pass,
        Err(o) => o,
    }
}

fn run_inner(cli: Cli) -> Result<(), Outcome> {
    match cli.cmd {
        Cmd::Gen { id, out } => {
            let id: CatalogId = id
                .parse()
                .map_err(|e: twinbuildings_workbench::catalog::CatalogError| {
                    Outcome::BadInput(e.to_string())
                })?;
            let b = generate_building(&id);
            write_file(&out, &encode_building(&b))?;
            println!("wrote {} ({} chambers)", out.display(), b.n_chambers());
            Ok(())
        }
        Cmd::Check { what } => match what {
            CheckCmd::Building { file } => {
                let b = decode_building(&read_file(&file)?).map_err(decode_failure)?;
                println!(
                    "{}: valid building, {} chambers, rank {}",
                    file.display(),
                    b.n_chambers(),
                    b.group().rank()
                );
                Ok(())
            }
            CheckCmd::Twin { file } => {
                let t = decode_twin(&read_file(&file)?).map_err(decode_failure)?;
                println!(
                    "{}: valid twin, {}+{} chambers, rank {}",
                    file.display(),
                    t.building(twinbuildings::twin::Sign::Plus).n_chambers(),
                    t.building(twinbuildings::twin::Sign::Minus).n_chambers(),
                    t.group().rank()
                );
                Ok(())
            }
        },
        Cmd::Double { input, out } => {
            let b = decode_building(&read_file(&input)?).map_err(decode_failure)?;
            let twin = spherical_double(Arc::new(b))
                .map_err(|e| Outcome::CheckFailed(e.to_string()))?;
            write_file(&out, &encode_twin(&twin))?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Cmd::Extend {
            twin,
            twin_prime,
            seed,
            out,
            report,
        } => {
            let src = Arc::new(decode_twin(&read_file(&twin)?).map_err(decode_failure)?);
            let tgt = match twin_prime {
                Some(p) => Arc::new(decode_twin(&read_file(&p)?).map_err(decode_failure)?),
                None => Arc::clone(&src),
            };
            let pairs = decode_isometry(&read_file(&seed)?)
                .map_err(|e| Outcome::BadInput(e.to_string()))?;
            let outcome = run_extension(&src, &tgt, &pairs);
            write_file(&report, &extension_report_json(&outcome))?;
            match outcome {
                Ok((_, ext)) => {
                    let all: Vec<_> = ext.result.pairs().collect();
                    write_file(&out, &encode_isometry(&all))?;
                    println!(
                        "extended the seed to {} pairs; report in {}",
                        ext.result.len(),
                        report.display()
                    );
                    Ok(())
                }
                Err(e) => Err(Outcome::CheckFailed(e)),
            }
        }
        Cmd::Suite {
            twin,
            level,
            rng,
            report,
        } => {
            let t = Arc::new(decode_twin(&read_file(&twin)?).map_err(decode_failure)?);
            let rep = run_verification(&t, level, rng);
            write_file(&report, &rep.to_json())?;
            for r in &rep.records {
                let status = if r.pass { "pass" } else { "FAIL" };
                println!("{status}  {}  ({} ms)", r.tag, r.millis);
                if let Some(w) = &r.witness {
                    println!("      {w}");
                }
            }
            if rep.pass() {
                Ok(())
            } else {
                Err(Outcome::CheckFailed(format!(
                    "{} of {} checks failed",
                    rep.records.iter().filter(|r| !r.pass).count(),
                    rep.records.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Outcome::Pass => ExitCode::SUCCESS,
        Outcome::CheckFailed(msg) => {
            eprintln!("verification failure: {msg}");
            ExitCode::from(1)
        }
        Outcome::BadInput(msg) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
    }
}
