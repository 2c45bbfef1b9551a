//! The bank: issues tokens, draws basis challenges and grades responses.
//!
//! Only the matched qubit of each pair (the one prepared in the challenged
//! basis) is checked. Its partner was prepared in the conjugate basis and
//! yields a coin flip even for an honest terminal.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
use std::time::{SystemTime, UNIX_EPOCH};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mint::{mint_token, EncodingSpec, Token};
use crate::qstate::{Basis, Bit};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Challenge {
    pub serial: String,
    pub bases: Vec<Basis>,
}

/// Reported outcome of one qubit; `None` marks a lost qubit.
pub type QubitReport = Option<Bit>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub serial: String,
    pub outcomes: Vec<[QubitReport; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub error_rate: f64,
    pub loss_rate: f64,
    pub checked_qubits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub max_error: f64,
    pub max_loss: f64,
}

impl Thresholds {
    pub fn new(max_error: f64, max_loss: f64) -> Result<Thresholds> {
        for (name, v) in [("max_error", max_error), ("max_loss", max_loss)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidThresholds(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(Thresholds {
            max_error,
            max_loss,
        })
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            max_error: 0.25,
            max_loss: 0.75,
        }
    }
}

/// One independent uniform basis per pair.
pub fn make_challenge<R: Rng + ?Sized>(serial: &str, n_pairs: usize, rng: &mut R) -> Challenge {
    Challenge {
        serial: serial.to_owned(),
        bases: (0..n_pairs)
            .map(|_| {
                if rng.random_bool(0.5) {
                    Basis::Z
                } else {
                    Basis::X
                }
            })
            .collect(),
    }
}

pub fn verify_token(
    token: &Token,
    challenge: &Challenge,
    response: &Response,
    thresholds: Thresholds,
) -> Result<Verdict> {
    if challenge.serial != token.serial || response.serial != token.serial {
        let got = if challenge.serial != token.serial {
            &challenge.serial
        } else {
            &response.serial
        };
        return Err(Error::SerialMismatch {
            expected: token.serial.clone(),
            got: got.clone(),
        });
    }
    if challenge.bases.len() != token.len() {
        return Err(Error::LengthMismatch {
            expected: token.len(),
            got: challenge.bases.len(),
        });
    }
    if response.outcomes.len() != challenge.bases.len() {
        return Err(Error::LengthMismatch {
            expected: challenge.bases.len(),
            got: response.outcomes.len(),
        });
    }

    let mut errors = 0usize;
    let mut checked = 0usize;
    let mut lost = 0usize;
    for ((pair, &basis), outcome) in token
        .pairs
        .iter()
        .zip(&challenge.bases)
        .zip(&response.outcomes)
    {
        if let Some(b) = outcome.iter().flatten().find(|b| **b > 1) {
            return Err(Error::Protocol(format!("outcome {b} is not a bit")));
        }
        lost += outcome.iter().filter(|o| o.is_none()).count();
        let position = pair.matched_position(basis);
        let expected = pair.qubit(position).bit();
        let reported = match position {
            crate::qstate::Position::First => outcome[0],
            crate::qstate::Position::Second => outcome[1],
        };
        if let Some(bit) = reported {
            checked += 1;
            if bit != expected {
                errors += 1;
            }
        }
    }
    let error_rate = if checked == 0 {
        0.0
    } else {
        errors as f64 / checked as f64
    };
    let loss_rate = lost as f64 / (2 * token.len()) as f64;
    Ok(Verdict {
        accepted: error_rate <= thresholds.max_error && loss_rate <= thresholds.max_loss,
        error_rate,
        loss_rate,
        checked_qubits: checked,
    })
}

/// Grades a response against the token the bank would mint for its serial.
pub fn verify(
    spec: &EncodingSpec,
    challenge: &Challenge,
    response: &Response,
    thresholds: Thresholds,
) -> Result<Verdict> {
    let token = mint_token(spec, &challenge.serial);
    verify_token(&token, challenge, response, thresholds)
}

// Bare wasm has no clock; entries there are stamped 0.
#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
fn unix_now() -> u64 {
    0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub serial: String,
    pub issued_at: u64,
    pub spent: bool,
}

/// Append-only record of issued serials, optionally backed by a JSON-lines
/// file. A later line for the same serial supersedes earlier ones.
#[derive(Debug, Default)]
pub struct Ledger {
    entries: BTreeMap<String, LedgerEntry>,
    file: Option<PathBuf>,
}

impl Ledger {
    pub fn in_memory() -> Ledger {
        Ledger::default()
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Ledger> {
        let path = path.as_ref().to_path_buf();
        let mut entries = BTreeMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: LedgerEntry = serde_json::from_str(&line)?;
                entries.insert(entry.serial.clone(), entry);
            }
        }
        Ok(Ledger {
            entries,
            file: Some(path),
        })
    }

    fn append(&mut self, entry: LedgerEntry) -> Result<()> {
        if let Some(path) = &self.file {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{}", serde_json::to_string(&entry)?)?;
        }
        self.entries.insert(entry.serial.clone(), entry);
        Ok(())
    }

    pub fn record_issue(&mut self, serial: &str) -> Result<()> {
        if self.entries.contains_key(serial) {
            return Err(Error::DuplicateSerial(serial.to_owned()));
        }
        self.append(LedgerEntry {
            serial: serial.to_owned(),
            issued_at: unix_now(),
            spent: false,
        })
    }

    pub fn mark_spent(&mut self, serial: &str) -> Result<()> {
        let mut entry = self
            .entries
            .get(serial)
            .cloned()
            .ok_or_else(|| Error::UnknownSerial(serial.to_owned()))?;
        entry.spent = true;
        self.append(entry)
    }

    pub fn get(&self, serial: &str) -> Option<&LedgerEntry> {
        self.entries.get(serial)
    }

    pub fn contains(&self, serial: &str) -> bool {
        self.entries.contains_key(serial)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn serials(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[derive(Debug)]
pub struct Bank {
    spec: EncodingSpec,
    thresholds: Thresholds,
    ledger: Ledger,
    /// Refuse a serial once it has been accepted.
    pub mark_spent: bool,
}

impl Bank {
    pub fn new(spec: EncodingSpec, thresholds: Thresholds, ledger: Ledger) -> Bank {
        Bank {
            spec,
            thresholds,
            ledger,
            mark_spent: false,
        }
    }

    pub fn spec(&self) -> &EncodingSpec {
        &self.spec
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn issue(&mut self, serial: &str) -> Result<Token> {
        if serial.is_empty() {
            return Err(Error::Parse("serial must not be empty".into()));
        }
        self.ledger.record_issue(serial)?;
        Ok(mint_token(&self.spec, serial))
    }

    pub fn challenge<R: Rng + ?Sized>(&self, serial: &str, rng: &mut R) -> Result<Challenge> {
        self.check_known(serial)?;
        Ok(make_challenge(serial, self.spec.pairs_per_token, rng))
    }

    pub fn verify(&mut self, challenge: &Challenge, response: &Response) -> Result<Verdict> {
        self.check_known(&challenge.serial)?;
        let verdict = verify(&self.spec, challenge, response, self.thresholds)?;
        if verdict.accepted && self.mark_spent {
            self.ledger.mark_spent(&challenge.serial)?;
        }
        Ok(verdict)
    }

    fn check_known(&self, serial: &str) -> Result<()> {
        match self.ledger.get(serial) {
            None => Err(Error::UnknownSerial(serial.to_owned())),
            Some(e) if e.spent && self.mark_spent => Err(Error::AlreadySpent(serial.to_owned())),
            Some(_) => Ok(()),
        }
    }
}
