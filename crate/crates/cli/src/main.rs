use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use qrg_core::bank::{Bank, Ledger};
use qrg_core::clonesim::StrategyId;
use qrg_core::cracker::{
    batches_from_constraints, read_constraints_csv, recover, salt_space, write_constraints_csv,
};
use qrg_core::harness::{
    remote_transaction, run_attack, run_curves, run_table1, RunConfig, TransactionStats,
};
use qrg_core::infotheory::write_curve_csv;
use qrg_core::mint::{mint_token, HashId};
use qrg_core::protocol::{serve, BankClient, BankService};
use qrg_core::terminal::write_sniff_log;

#[derive(Parser)]
#[command(
    name = "qrg",
    version,
    about = "Quantum-retrieval-game money: sniffing attack simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mutual information versus error rate, as CSV.
    Curves(CurvesArgs),
    /// Sniff transactions, extract constraints and recover the salt.
    Attack(AttackArgs),
    /// Minimal number of sniffed pairs per hash function.
    Table1(Table1Args),
    /// Recover the salt from a constraint CSV.
    Crack(CrackArgs),
    /// Print the token for a serial as JSON.
    Mint(MintArgs),
    /// Run the bank service.
    Serve(ServeArgs),
    /// Drive terminal sessions against a running bank.
    Transact(TransactArgs),
}

/// Settings shared by every subcommand. Each maps onto a `key=value` entry
/// of the optional config file and overrides it.
#[derive(Args, Default)]
struct Common {
    /// Flat key=value file, keys named like the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    fidelity: Option<f64>,
    #[arg(long)]
    success_prob: Option<f64>,
    /// i, ii or iii
    #[arg(long)]
    strategy: Option<String>,
    /// md5, sha1, sha256 or sha512
    #[arg(long)]
    hash: Option<String>,
    #[arg(long)]
    salt: Option<String>,
    #[arg(long)]
    salt_digits: Option<u32>,
    #[arg(long)]
    pairs_per_token: Option<usize>,
    #[arg(long)]
    serials: Option<usize>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    prune_every: Option<usize>,
    #[arg(long)]
    keep: Option<f64>,
    #[arg(long)]
    max_pairs: Option<usize>,
    #[arg(long)]
    error_threshold: Option<f64>,
    #[arg(long)]
    loss_threshold: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    post_select: Option<bool>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            cfg.apply_config_text(&text)?;
        }
        let pairs: Vec<(&str, Option<String>)> = vec![
            ("seed", self.seed.map(|v| v.to_string())),
            ("fidelity", self.fidelity.map(|v| v.to_string())),
            ("success-prob", self.success_prob.map(|v| v.to_string())),
            ("strategy", self.strategy.clone()),
            ("hash", self.hash.clone()),
            ("salt", self.salt.clone()),
            ("salt-digits", self.salt_digits.map(|v| v.to_string())),
            (
                "pairs-per-token",
                self.pairs_per_token.map(|v| v.to_string()),
            ),
            ("serials", self.serials.map(|v| v.to_string())),
            ("z", self.z.map(|v| v.to_string())),
            ("prune-every", self.prune_every.map(|v| v.to_string())),
            ("keep", self.keep.map(|v| v.to_string())),
            ("max-pairs", self.max_pairs.map(|v| v.to_string())),
            (
                "error-threshold",
                self.error_threshold.map(|v| v.to_string()),
            ),
            ("loss-threshold", self.loss_threshold.map(|v| v.to_string())),
            ("post-select", self.post_select.map(|v| v.to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if let Ok(seed) = std::env::var("QRG_SEED") {
            cfg.set("seed", &seed).context("QRG_SEED")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct CurvesArgs {
    #[command(flatten)]
    common: Common,
    /// Success probabilities to sweep; defaults to 1/3 and 1.
    #[arg(long = "p", value_delimiter = ',')]
    successes: Vec<f64>,
    #[arg(long, default_value_t = 51)]
    grid: usize,
    /// Post-select on both qubits being cloned.
    #[arg(long)]
    conditional: bool,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    common: Common,
    /// Search all four hash functions.
    #[arg(long)]
    generalized: bool,
}

#[derive(Args)]
struct Table1Args {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

#[derive(Args)]
struct CrackArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    constraints: PathBuf,
    #[arg(long)]
    generalized: bool,
}

#[derive(Args)]
struct MintArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    serial: String,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "127.0.0.1:7171")]
    listen: String,
    /// JSON-lines ledger; serials already in it are not reissued.
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Mark serials spent once accepted.
    #[arg(long)]
    spend: bool,
    /// Exit after this many connections.
    #[arg(long)]
    max_connections: Option<usize>,
}

#[derive(Args)]
struct TransactArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "127.0.0.1:7171")]
    connect: String,
    /// Answer honestly instead of running the configured attack strategy.
    #[arg(long)]
    honest: bool,
    /// Payments per card.
    #[arg(long, default_value_t = 1)]
    rounds: usize,
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn hashes(cfg: &RunConfig, generalized: bool) -> Vec<HashId> {
    if generalized {
        HashId::ALL.to_vec()
    } else {
        vec![cfg.encoding.hash]
    }
}

fn cmd_curves(args: CurvesArgs) -> Result<()> {
    let successes = if args.successes.is_empty() {
        vec![qrg_core::clonesim::P_LINEAR, 1.0]
    } else {
        args.successes
    };
    let strategies = match &args.common.strategy {
        Some(s) => vec![s.parse::<StrategyId>()?],
        None => StrategyId::ALL.to_vec(),
    };
    let points = run_curves(&strategies, &successes, args.grid, args.conditional)?;
    let mut out = open_out(&args.common.out)?;
    write_curve_csv(&points, &mut out)?;
    out.flush()?;
    Ok(())
}

fn write_artifacts(dir: &Path, report: &qrg_core::harness::AttackReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_sniff_log(
        &report.records,
        BufWriter::new(File::create(dir.join("sniff.jsonl"))?),
    )?;
    write_constraints_csv(
        &report.constraints,
        BufWriter::new(File::create(dir.join("constraints.csv"))?),
    )?;
    fs::write(dir.join("result.json"), report.result.to_json() + "\n")?;
    Ok(())
}

fn cmd_attack(args: AttackArgs) -> Result<()> {
    let mut cfg = args.common.config()?;
    cfg.generalized = args.generalized;
    let report = run_attack(&cfg)?;
    info!(
        "{} transactions, {} accepted, mean error {:.4}",
        report.stats.transactions, report.stats.accepted, report.stats.mean_error_rate
    );
    if let Some(dir) = &args.common.out {
        write_artifacts(dir, &report)?;
    }
    println!("{}", report.result.to_json());
    if report.result.found {
        let check = mint_token(&report.result.spec, &cfg.serial_names()[0]);
        let genuine = mint_token(&cfg.encoding, &cfg.serial_names()[0]);
        eprintln!(
            "recovered {} salt {} after {} pairs; counterfeit {} the bank's token",
            report.result.spec.hash,
            report.result.spec.salt,
            report.result.pairs_consumed,
            if check == genuine {
                "matches"
            } else {
                "differs from"
            }
        );
    }
    Ok(())
}

fn cmd_table1(args: Table1Args) -> Result<()> {
    let cfg = args.common.config()?;
    let rows = run_table1(&cfg, args.trials)?;
    let mut out = open_out(&args.common.out)?;
    writeln!(out, "hash,trials,successes,mean,std_error,median")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.1},{:.1},{:.1}",
            r.hash, r.trials, r.successes, r.mean, r.std_error, r.median
        )?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_crack(args: CrackArgs) -> Result<()> {
    let cfg = args.common.config()?;
    let constraints = read_constraints_csv(BufReader::new(
        File::open(&args.constraints)
            .with_context(|| format!("opening {}", args.constraints.display()))?,
    ))?;
    let batches = batches_from_constraints(&constraints);
    let result = recover(
        &batches,
        &hashes(&cfg, args.generalized),
        &salt_space(cfg.salt_digits),
        &cfg.encoding,
        &cfg.recovery,
    )?;
    let mut out = open_out(&args.common.out)?;
    writeln!(out, "{}", result.to_json())?;
    out.flush()?;
    Ok(())
}

fn cmd_mint(args: MintArgs) -> Result<()> {
    let cfg = args.common.config()?;
    let token = mint_token(&cfg.encoding, &args.serial);
    let mut out = open_out(&args.common.out)?;
    writeln!(
        out,
        "{}",
        serde_json::to_string(&token.to_record(cfg.encoding.hash))?
    )?;
    out.flush()?;
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let cfg = args.common.config()?;
    let ledger = match &args.ledger {
        Some(p) => Ledger::open(p)?,
        None => Ledger::in_memory(),
    };
    let mut bank = Bank::new(cfg.encoding.clone(), cfg.thresholds, ledger);
    bank.mark_spent = args.spend;
    for serial in cfg.serial_names() {
        if !bank.ledger().contains(&serial) {
            bank.issue(&serial)?;
        }
    }
    let listener =
        TcpListener::bind(&args.listen).with_context(|| format!("binding {}", args.listen))?;
    eprintln!(
        "bank listening on {} with {} issued serials",
        listener.local_addr()?,
        bank.ledger().len()
    );
    let service = BankService::new(bank, cfg.root().stream("bank"));
    serve(listener, service, args.max_connections)?;
    Ok(())
}

fn cmd_transact(args: TransactArgs) -> Result<()> {
    let cfg = args.common.config()?;
    let mut client = BankClient::connect(&args.connect)
        .with_context(|| format!("connecting to {}", args.connect))?;
    let mut rng = cfg.root().stream("terminal");
    let strategy = if args.honest {
        None
    } else {
        Some(cfg.strategy)
    };
    let mut stats = TransactionStats::default();
    let mut sniffed = Vec::new();
    let mut accepted = 0usize;
    for serial in cfg.serial_names() {
        // The simulated card carries the states the bank would have minted.
        let token = mint_token(&cfg.encoding, &serial);
        for _ in 0..args.rounds {
            let (verdict, log) =
                remote_transaction(&mut client, &token, strategy, cfg.clone, &mut rng)?;
            accepted += verdict.accepted as usize;
            stats.transactions += 1;
            sniffed.extend(log);
        }
    }
    stats.accepted = accepted;
    if let Some(path) = &args.common.out {
        write_sniff_log(&sniffed, BufWriter::new(File::create(path)?))?;
    }
    println!("{}", serde_json::to_string(&stats)?);
    if stats.transactions == 0 {
        bail!("no transactions were run");
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Curves(a) => cmd_curves(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Crack(a) => cmd_crack(a),
        Command::Mint(a) => cmd_mint(a),
        Command::Serve(a) => cmd_serve(a),
        Command::Transact(a) => cmd_transact(a),
    }
}
