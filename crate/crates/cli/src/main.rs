use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pbcap::commands::{
    harness_run, pap_compile, pap_keygen, pdp_classify, user_keygen, user_tag, ClassifyRequest, Env, Outcome,
    SuiteKind, TagRequest,
};
use pbcap::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "pbcap", version, about = "Classify encrypted documents by their encrypted provenance")]
struct Cli {
    /// Pairing suite.
    #[arg(long, value_enum, global = true, default_value = "production")]
    suite: SuiteKind,

    /// Deterministic seed. Accepted by the harness, and by the other
    /// commands only with `--suite mock`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Policy administration point.
    #[command(subcommand)]
    Pap(PapCommand),
    /// Data owner.
    #[command(subcommand)]
    User(UserCommand),
    /// Policy decision and enforcement point.
    #[command(subcommand)]
    Pdp(PdpCommand),
    /// Security game.
    #[command(subcommand)]
    Harness(HarnessCommand),
}

#[derive(Debug, Args)]
struct KeygenArgs {
    /// Writes `<OUT>.secret.json` and `<OUT>.public.json`.
    #[arg(long)]
    out: PathBuf,
    /// Overwrite existing key files.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Subcommand)]
enum PapCommand {
    /// Generate the administrator key pair.
    Keygen(KeygenArgs),
    /// Compile a policy file into trapdoors.
    Compile {
        policies: PathBuf,
        #[arg(long)]
        admin_secret_key: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Subcommand)]
enum UserCommand {
    /// Generate a user key pair.
    Keygen(KeygenArgs),
    /// Tag every fragment of a provenance graph and package the payload.
    Tag {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        admin_public_key: PathBuf,
        #[arg(long)]
        user_secret_key: PathBuf,
        #[arg(long)]
        payload: PathBuf,
        /// Name under which the payload is stored. Defaults to the payload's
        /// file name.
        #[arg(long)]
        file_id: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Subcommand)]
enum PdpCommand {
    /// Classify submissions and route their payloads.
    Classify {
        #[arg(required = true)]
        submissions: Vec<PathBuf>,
        #[arg(long)]
        compiled: PathBuf,
        #[arg(long)]
        admin_public_key: PathBuf,
        /// Registered user public key. Repeat for several users.
        #[arg(long = "user-public-key", required = true)]
        user_public_keys: Vec<PathBuf>,
        #[arg(long, env = "PBCAP_STORAGE_ROOT")]
        storage_root: PathBuf,
        /// Worker threads for the decision step.
        #[arg(long)]
        parallel: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
enum HarnessCommand {
    /// Play the game and print a JSON transcript summary.
    Run {
        #[arg(long)]
        attacker: String,
        #[arg(long)]
        trials: u64,
    },
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("report serializes"));
}

fn run(cli: Cli) -> Result<i32> {
    let env = Env { suite: cli.suite, seed: cli.seed };
    match cli.command {
        Command::Pap(PapCommand::Keygen(a)) => {
            let p = pap_keygen(&env, &a.out, a.force)?;
            eprintln!("wrote {} and {}", p.secret.display(), p.public.display());
        }
        Command::Pap(PapCommand::Compile { policies, admin_secret_key, out, force }) => {
            let n = pap_compile(&env, &policies, &admin_secret_key, &out, force)?;
            eprintln!("compiled {n} policies into {}", out.display());
        }
        Command::User(UserCommand::Keygen(a)) => {
            let p = user_keygen(&env, &a.out, a.force)?;
            eprintln!("wrote {} and {}", p.secret.display(), p.public.display());
        }
        Command::User(UserCommand::Tag { graph, admin_public_key, user_secret_key, payload, file_id, out, force }) => {
            let n = user_tag(
                &env,
                &TagRequest {
                    graph: &graph,
                    admin_public_key: &admin_public_key,
                    user_secret_key: &user_secret_key,
                    payload: &payload,
                    file_id: file_id.as_deref(),
                    out: &out,
                    force,
                },
            )?;
            eprintln!("wrote {n} tags to {}", out.display());
        }
        Command::Pdp(PdpCommand::Classify {
            submissions,
            compiled,
            admin_public_key,
            user_public_keys,
            storage_root,
            parallel,
        }) => {
            let report = pdp_classify(
                &env,
                &ClassifyRequest {
                    submissions: &submissions,
                    compiled: &compiled,
                    admin_public_key: &admin_public_key,
                    user_public_keys: &user_public_keys,
                    storage_root: &storage_root,
                    parallel,
                },
            )?;
            for outcome in &report.outcomes {
                match outcome {
                    Outcome::Routed { decision, .. } => print_json(decision),
                    Outcome::Unauthenticated { decision } => {
                        print_json(decision);
                        eprintln!("error: {}", CliError::Unauthenticated(decision.file_id.clone()));
                    }
                    Outcome::Failed { submission, error } => {
                        eprintln!("error: {}: {error}", submission.display());
                    }
                }
            }
            return Ok(report.exit_code());
        }
        Command::Harness(HarnessCommand::Run { attacker, trials }) => {
            let report = harness_run(&env, &attacker, trials)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
