//! End-to-end experiments: trade-off curves, a full sniff-and-crack run, the
//! minimal-pairs table, and transaction statistics.

use std::str::FromStr;

use serde::Serialize;

use crate::bank::{verify_token, Bank, Ledger, Thresholds, Verdict};
use crate::clonesim::{CloneParams, StrategyId, F_EXPERIMENT, P_LINEAR};
use crate::cracker::{
    batches_from_log, extract_constraints, minimal_pairs, recover, salt_space, Constraint,
    RecoveryResult, RecoverySettings,
};
use crate::error::{Error, Result};
use crate::infotheory::{fidelity_grid, trade_off_curve, CurvePoint};
use crate::mint::{mint_token, EncodingSpec, HashId, Token};
use crate::protocol::BankClient;
use crate::rng::{SeedRoot, SimRng};
use crate::terminal::{attack_respond, honest_respond, SniffRecord};

pub const DEFAULT_SEED: u64 = 2018;
pub const DEFAULT_SALT: &str = "527";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub clone: CloneParams,
    pub strategy: StrategyId,
    pub encoding: EncodingSpec,
    pub thresholds: Thresholds,
    pub recovery: RecoverySettings,
    /// Keep only pairs whose two qubits were both cloned, re-running
    /// transactions on a card until every pair position has one.
    pub post_select: bool,
    pub serials: usize,
    pub salt_digits: u32,
    /// Search every hash function instead of only the bank's.
    pub generalized: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            clone: CloneParams::new(F_EXPERIMENT, P_LINEAR).expect("valid defaults"),
            strategy: StrategyId::II,
            encoding: EncodingSpec::new(HashId::HmacSha512, DEFAULT_SALT).expect("valid defaults"),
            thresholds: Thresholds::default(),
            recovery: RecoverySettings::default(),
            post_select: true,
            serials: 101,
            salt_digits: 3,
            generalized: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "" | "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Parse(format!("bad boolean {value:?} for {key}"))),
    }
}

impl RunConfig {
    /// Applies one `key=value` setting. Keys are the long CLI flag names
    /// without the leading dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--");
        match key {
            "seed" => self.seed = parse(key, value)?,
            "fidelity" => self.clone = CloneParams::new(parse(key, value)?, self.clone.success())?,
            "success-prob" => {
                self.clone = CloneParams::new(self.clone.fidelity(), parse(key, value)?)?
            }
            "strategy" => self.strategy = value.trim().parse()?,
            "hash" => self.encoding.hash = value.trim().parse()?,
            "salt" => self.encoding.salt = value.trim().to_owned(),
            "salt-digits" => self.salt_digits = parse(key, value)?,
            "pairs-per-token" => {
                let n: usize = parse(key, value)?;
                self.encoding.pairs_per_token = n;
                self.encoding.keystream_len = self.encoding.keystream_len.max(n);
            }
            "keystream-len" => self.encoding.keystream_len = parse(key, value)?,
            "serials" => self.serials = parse(key, value)?,
            "z" => self.recovery.z_multiple = parse(key, value)?,
            "prune-every" => self.recovery.prune_every = parse(key, value)?,
            "keep" => self.recovery.keep_fraction = parse(key, value)?,
            "max-pairs" => self.recovery.max_pairs = Some(parse(key, value)?),
            "hint-weight" => self.recovery.hint_weight = parse(key, value)?,
            "error-threshold" => {
                self.thresholds = Thresholds::new(parse(key, value)?, self.thresholds.max_loss)?
            }
            "loss-threshold" => {
                self.thresholds = Thresholds::new(self.thresholds.max_error, parse(key, value)?)?
            }
            "post-select" => self.post_select = parse_bool(key, value)?,
            "generalized" => self.generalized = parse_bool(key, value)?,
            other => return Err(Error::Parse(format!("unknown setting {other:?}"))),
        }
        Ok(())
    }

    /// Flat `key=value` file; `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.encoding.validate()?;
        self.recovery.validate()?;
        if self.serials == 0 {
            return Err(Error::Parse("serials must be at least 1".into()));
        }
        if self.salt_digits == 0 || self.salt_digits > 7 {
            return Err(Error::Parse("salt-digits must be between 1 and 7".into()));
        }
        Ok(())
    }

    pub fn root(&self) -> SeedRoot {
        SeedRoot(self.seed)
    }

    pub fn serial_names(&self) -> Vec<String> {
        let width = (self.serials.saturating_sub(1)).to_string().len().max(3);
        (0..self.serials).map(|i| format!("{i:0width$}")).collect()
    }
}

pub fn run_curves(
    strategies: &[StrategyId],
    successes: &[f64],
    grid_points: usize,
    conditional: bool,
) -> Result<Vec<CurvePoint>> {
    let grid = fidelity_grid(grid_points);
    let mut out = Vec::new();
    for &st in strategies {
        if st == StrategyId::III {
            out.extend(trade_off_curve(st, 1.0, &grid, conditional)?);
            continue;
        }
        for &p in successes {
            out.extend(trade_off_curve(st, p, &grid, conditional)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TransactionStats {
    pub transactions: usize,
    pub accepted: usize,
    pub mean_error_rate: f64,
    pub mean_loss_rate: f64,
}

impl TransactionStats {
    fn push(&mut self, v: &Verdict) {
        let n = self.transactions as f64;
        self.mean_error_rate = (self.mean_error_rate * n + v.error_rate) / (n + 1.0);
        self.mean_loss_rate = (self.mean_loss_rate * n + v.loss_rate) / (n + 1.0);
        self.transactions += 1;
        self.accepted += v.accepted as usize;
    }

    pub fn acceptance(&self) -> f64 {
        if self.transactions == 0 {
            0.0
        } else {
            self.accepted as f64 / self.transactions as f64
        }
    }
}

/// Compromised-terminal traffic for every issued serial.
pub struct SniffRun {
    pub bank: Bank,
    pub records: Vec<SniffRecord>,
    pub stats: TransactionStats,
}

pub fn simulate_sniffing(config: &RunConfig, root: SeedRoot) -> Result<SniffRun> {
    config.validate()?;
    let mut bank = Bank::new(
        config.encoding.clone(),
        config.thresholds,
        Ledger::in_memory(),
    );
    let mut bank_rng = root.stream("bank");
    let mut clone_rng = root.stream("clone");
    let post_select = config.post_select && config.strategy.clones();
    let mut records = Vec::with_capacity(config.serials * config.encoding.pairs_per_token);
    let mut stats = TransactionStats::default();

    for serial in config.serial_names() {
        let token = bank.issue(&serial)?;
        let mut slots: Vec<Option<SniffRecord>> = vec![None; token.len()];
        loop {
            let challenge = bank.challenge(&serial, &mut bank_rng)?;
            let (response, log) = attack_respond(
                config.strategy,
                config.clone,
                &token,
                &challenge,
                &mut clone_rng,
            )?;
            stats.push(&bank.verify(&challenge, &response)?);
            if !post_select {
                records.extend(log);
                break;
            }
            for rec in log.into_iter().filter(SniffRecord::fully_cloned) {
                let slot = &mut slots[rec.pair_index];
                if slot.is_none() {
                    *slot = Some(rec);
                }
            }
            if slots.iter().all(Option::is_some) {
                records.extend(slots.into_iter().flatten());
                break;
            }
        }
    }
    Ok(SniffRun {
        bank,
        records,
        stats,
    })
}

pub struct AttackReport {
    pub truth: EncodingSpec,
    pub records: Vec<SniffRecord>,
    pub constraints: Vec<Constraint>,
    pub result: RecoveryResult,
    pub stats: TransactionStats,
}

impl AttackReport {
    pub fn recovered_truth(&self) -> bool {
        self.result.found
            && self.result.spec.hash == self.truth.hash
            && self.result.spec.salt == self.truth.salt
    }
}

fn hashes_for(config: &RunConfig) -> Vec<HashId> {
    if config.generalized {
        HashId::ALL.to_vec()
    } else {
        vec![config.encoding.hash]
    }
}

pub fn run_attack_with_root(config: &RunConfig, root: SeedRoot) -> Result<AttackReport> {
    let run = simulate_sniffing(config, root)?;
    let batches = batches_from_log(&run.records);
    let salts = salt_space(config.salt_digits);
    let result = recover(
        &batches,
        &hashes_for(config),
        &salts,
        &config.encoding,
        &config.recovery,
    )?;
    Ok(AttackReport {
        truth: config.encoding.clone(),
        constraints: extract_constraints(&run.records),
        records: run.records,
        result,
        stats: run.stats,
    })
}

pub fn run_attack(config: &RunConfig) -> Result<AttackReport> {
    run_attack_with_root(config, config.root())
}

/// Seed root of trial `t` in repeated experiments.
pub fn trial_root(config: &RunConfig, t: u64) -> SeedRoot {
    SeedRoot(
        config
            .seed
            .wrapping_add(t.wrapping_mul(0x9e37_79b9_7f4a_7c15))
            .rotate_left(17),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub hash: HashId,
    pub trials: usize,
    pub successes: usize,
    pub minimal_pairs: Vec<usize>,
    pub mean: f64,
    pub std_error: f64,
    pub median: f64,
}

fn summarize(hash: HashId, trials: usize, mut minimal: Vec<usize>) -> Table1Row {
    let n = minimal.len() as f64;
    let mean = if minimal.is_empty() {
        f64::NAN
    } else {
        minimal.iter().sum::<usize>() as f64 / n
    };
    let std_error = if minimal.len() < 2 {
        f64::NAN
    } else {
        let var = minimal
            .iter()
            .map(|&m| (m as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    };
    minimal.sort_unstable();
    Table1Row {
        hash,
        trials,
        successes: minimal.len(),
        median: median(&minimal),
        minimal_pairs: minimal,
        mean,
        std_error,
    }
}

pub fn median(sorted: &[usize]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
    }
}

/// Minimal sniffed-pair budget for a correct recovery in one seeded trial.
pub fn minimal_pairs_trial(config: &RunConfig, root: SeedRoot) -> Result<Option<usize>> {
    let run = simulate_sniffing(config, root)?;
    let batches = batches_from_log(&run.records);
    minimal_pairs(
        &batches,
        &hashes_for(config),
        &salt_space(config.salt_digits),
        &config.encoding,
        &config.recovery,
        &config.encoding,
    )
}

pub fn run_table1(config: &RunConfig, trials: usize) -> Result<Vec<Table1Row>> {
    if trials < 2 {
        return Err(Error::Parse("table1 needs at least 2 trials".into()));
    }
    HashId::ALL
        .iter()
        .map(|&hash| {
            let mut cfg = config.clone();
            cfg.encoding.hash = hash;
            cfg.generalized = false;
            let mut found = Vec::new();
            for t in 0..trials as u64 {
                if let Some(m) = minimal_pairs_trial(&cfg, trial_root(&cfg, t))? {
                    found.push(m);
                }
            }
            Ok(summarize(hash, trials, found))
        })
        .collect()
}

/// Local (in-process) transactions: one per token, each against a fresh
/// challenge, graded by the bank's rule.
pub fn transaction_stats(
    strategy: Option<StrategyId>,
    params: CloneParams,
    spec: &EncodingSpec,
    thresholds: Thresholds,
    tokens: usize,
    root: SeedRoot,
) -> Result<TransactionStats> {
    let mut bank_rng = root.stream("bank");
    let mut term_rng = root.stream("clone");
    let mut stats = TransactionStats::default();
    for i in 0..tokens {
        let token = mint_token(spec, &format!("{i:06}"));
        let challenge = crate::bank::make_challenge(&token.serial, token.len(), &mut bank_rng);
        let response = match strategy {
            None => honest_respond(&token, &challenge, &mut term_rng)?,
            Some(st) => attack_respond(st, params, &token, &challenge, &mut term_rng)?.0,
        };
        stats.push(&verify_token(&token, &challenge, &response, thresholds)?);
    }
    Ok(stats)
}

/// One payment over the wire. Returns the verdict and, for a compromised
/// terminal, the sniffed records.
pub fn remote_transaction(
    client: &mut BankClient,
    token: &Token,
    strategy: Option<StrategyId>,
    params: CloneParams,
    rng: &mut SimRng,
) -> Result<(Verdict, Vec<SniffRecord>)> {
    let challenge = client.request_challenge(&token.serial)?;
    let (response, log) = match strategy {
        None => (honest_respond(token, &challenge, rng)?, Vec::new()),
        Some(st) => attack_respond(st, params, token, &challenge, rng)?,
    };
    Ok((client.submit(&response)?, log))
}
