use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pffrac::commands::{cmd_mesh_info, cmd_run, cmd_verify, RunOptions};
use pffrac_core::verify::Fault;

#[derive(Parser)]
#[command(
    name = "pffrac",
    version,
    about = "Phase-field brittle fracture solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a load-stepping simulation from a JSON config.
    Run {
        config: PathBuf,
        /// Worker threads for assembly and solves; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides `out_dir` from the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print counts, bounding box, physical names and validation findings.
    MeshInfo { mesh: PathBuf },
    /// Run the built-in invariant suite.
    Verify {
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlipEtaSign,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PFFRAC_LOG", "warn")).init();
    let cli = Cli::parse();
    let mut out = io::stdout();
    let code = match cli.command {
        Command::Run {
            config,
            threads,
            out_dir,
        } => cmd_run(&config, &RunOptions { threads, out_dir }, &mut out),
        Command::MeshInfo { mesh } => cmd_mesh_info(&mesh, &mut out),
        Command::Verify { inject_fault } => {
            let fault = match inject_fault {
                Some(FaultArg::FlipEtaSign) => Fault::FlipEtaSign,
                None => Fault::None,
            };
            cmd_verify(fault, &mut out)
        }
    };
    ExitCode::from(code as u8)
}
