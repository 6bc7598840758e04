//! `mavkit`: frame inspection, keys, simulator, ground station and attacks.

/// Writes one line to stdout; a closed stdout ends the process quietly.
macro_rules! out {
    () => {
        $crate::out_raw("\n")
    };
    ($($t:tt)*) => {
        $crate::out_raw(&format!("{}\n", format_args!($($t)*)))
    };
}

mod attack;
mod dump;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use mavkit_core::catalog::Catalog;
use mavkit_core::signing::{load_key, store_key, SecretKey};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

pub fn out_raw(text: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
        .is_err()
    {
        std::process::exit(0);
    }
}

pub type CliResult = Result<(), CliError>;

pub fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "mavkit",
    version,
    about = "MAVLink toolkit: codec, signing, simulator, ground station, attacks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Decode frames from a hex string or a capture file.
    Mavdump(dump::MavdumpArgs),
    /// Write a new random 32-byte signing key as hex.
    Keygen(KeygenArgs),
    /// List every catalog message with its CRC seed.
    Catalog(CatalogArgs),
    /// Run the vehicle simulator.
    Sim(run::SimArgs),
    /// Ground station: send commands, upload missions, watch telemetry.
    Gcs(run::GcsArgs),
    /// Run attack scenarios and score them.
    Attack(attack::AttackArgs),
}

#[derive(Debug, Args)]
struct KeygenArgs {
    /// Output key file.
    out: PathBuf,
    /// Overwrite an existing file.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct CatalogArgs {
    /// One JSON object per message.
    #[arg(long)]
    machine: bool,
}

/// Key options shared by subcommands that sign or verify.
#[derive(Debug, Args, Clone)]
pub struct KeyArgs {
    /// Key file (64 hex characters).
    #[arg(long, env = "MAVKIT_KEYFILE")]
    pub key: Option<PathBuf>,
}

impl KeyArgs {
    pub fn load(&self) -> Result<Option<SecretKey>, CliError> {
        self.key
            .as_ref()
            .map(|p| load_key(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))))
            .transpose()
    }

    /// The key when `--signed` is given; missing keys are usage errors.
    pub fn for_signing(&self, signed: bool) -> Result<Option<SecretKey>, CliError> {
        if !signed {
            return Ok(None);
        }
        match self.load()? {
            Some(k) => Ok(Some(k)),
            None => Err(CliError::Usage(
                "--signed needs --key FILE or MAVKIT_KEYFILE".into(),
            )),
        }
    }
}

fn keygen(args: &KeygenArgs) -> CliResult {
    if args.out.exists() && !args.force {
        return Err(CliError::Runtime(format!(
            "{} exists; pass --force to overwrite",
            args.out.display()
        )));
    }
    let key = SecretKey::generate(&mut rand::rng());
    store_key(&key, &args.out).map_err(runtime)?;
    out!("key_file: {}", args.out.display());
    Ok(())
}

fn catalog(args: &CatalogArgs) -> CliResult {
    for (i, d) in Catalog::standard().iter().enumerate() {
        if args.machine {
            let fields: Vec<_> = d
                .fields
                .iter()
                .map(|f| serde_json::json!({"name": f.name, "type": f.ty.name(), "unit": f.unit}))
                .collect();
            out!(
                "{}",
                serde_json::json!({
                    "msgid": d.msgid,
                    "name": d.name,
                    "crc_seed": d.crc_seed,
                    "payload_len": d.payload_len(),
                    "fields": fields,
                })
            );
        } else {
            if i > 0 {
                out!();
            }
            out!("msgid: {}", d.msgid);
            out!("name: {}", d.name);
            out!("crc_seed: {}", d.crc_seed);
            out!("payload_len: {}", d.payload_len());
            let fields: Vec<String> = d
                .fields
                .iter()
                .map(|f| format!("{}:{}", f.name, f.ty.name()))
                .collect();
            out!("fields: {}", fields.join(" "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let res = match &cli.cmd {
        Cmd::Mavdump(a) => dump::mavdump(a),
        Cmd::Keygen(a) => keygen(a),
        Cmd::Catalog(a) => catalog(a),
        Cmd::Sim(a) => run::sim(a),
        Cmd::Gcs(a) => run::gcs(a),
        Cmd::Attack(a) => attack::attack(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mavkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
