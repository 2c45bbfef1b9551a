//! Payment terminals: the honest one, and a compromised one that clones each
//! qubit before answering and keeps a log of what the clones showed.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bank::{Challenge, QubitReport, Response};
use crate::clonesim::{clone_and_measure_qubit, CloneParams, QubitCloneOutcome, StrategyId};
use crate::error::{Error, Result};
use crate::infotheory::QubitObservation;
use crate::mint::Token;
use crate::qstate::{measure, Basis, QubitState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SniffRecord {
    pub serial: String,
    pub pair_index: usize,
    pub basis: Basis,
    pub q1: QubitObservation,
    pub q2: QubitObservation,
}

impl SniffRecord {
    /// Both qubits of the pair were cloned successfully.
    pub fn fully_cloned(&self) -> bool {
        [self.q1, self.q2]
            .iter()
            .all(|q| matches!(q, QubitObservation::Cloned(QubitCloneOutcome::Clones(..))))
    }
}

fn check_lengths(token: &Token, challenge: &Challenge) -> Result<()> {
    if token.len() != challenge.bases.len() {
        return Err(Error::LengthMismatch {
            expected: token.len(),
            got: challenge.bases.len(),
        });
    }
    Ok(())
}

pub fn honest_respond<R: Rng + ?Sized>(
    token: &Token,
    challenge: &Challenge,
    rng: &mut R,
) -> Result<Response> {
    check_lengths(token, challenge)?;
    let outcomes = token
        .pairs
        .iter()
        .zip(&challenge.bases)
        .map(|(p, &b)| {
            [
                Some(measure(p.first, b, rng)),
                Some(measure(p.second, b, rng)),
            ]
        })
        .collect();
    Ok(Response {
        serial: token.serial.clone(),
        outcomes,
    })
}

fn attack_qubit<R: Rng + ?Sized>(
    strategy: StrategyId,
    params: CloneParams,
    state: QubitState,
    basis: Basis,
    rng: &mut R,
) -> (QubitReport, QubitObservation) {
    if strategy == StrategyId::III {
        let bit = measure(state, basis, rng);
        return (Some(bit), QubitObservation::Measured(bit));
    }
    let outcome = clone_and_measure_qubit(state, basis, params, rng);
    let report = match (outcome, strategy) {
        // Clone A answers the bank.
        (QubitCloneOutcome::Clones(a, _), _) => Some(a),
        (QubitCloneOutcome::Lost, StrategyId::I) => Some(rng.random_range(0..2)),
        (QubitCloneOutcome::Lost, _) => None,
    };
    (report, QubitObservation::Cloned(outcome))
}

pub fn attack_respond<R: Rng + ?Sized>(
    strategy: StrategyId,
    params: CloneParams,
    token: &Token,
    challenge: &Challenge,
    rng: &mut R,
) -> Result<(Response, Vec<SniffRecord>)> {
    check_lengths(token, challenge)?;
    let mut outcomes = Vec::with_capacity(token.len());
    let mut log = Vec::with_capacity(token.len());
    for (j, (pair, &basis)) in token.pairs.iter().zip(&challenge.bases).enumerate() {
        let (r1, o1) = attack_qubit(strategy, params, pair.first, basis, rng);
        let (r2, o2) = attack_qubit(strategy, params, pair.second, basis, rng);
        outcomes.push([r1, r2]);
        log.push(SniffRecord {
            serial: token.serial.clone(),
            pair_index: j,
            basis,
            q1: o1,
            q2: o2,
        });
    }
    Ok((
        Response {
            serial: token.serial.clone(),
            outcomes,
        },
        log,
    ))
}

#[derive(Serialize, Deserialize)]
struct SniffLine {
    serial: String,
    pair: usize,
    basis: Basis,
    q1: Option<Vec<u8>>,
    q2: Option<Vec<u8>>,
}

fn encode(o: QubitObservation) -> Option<Vec<u8>> {
    match o {
        QubitObservation::Cloned(QubitCloneOutcome::Lost) => None,
        QubitObservation::Cloned(QubitCloneOutcome::Clones(a, b)) => Some(vec![a, b]),
        QubitObservation::Measured(b) => Some(vec![b]),
    }
}

fn decode(v: Option<Vec<u8>>) -> Result<QubitObservation> {
    match v.as_deref() {
        None => Ok(QubitObservation::Cloned(QubitCloneOutcome::Lost)),
        Some([a, b]) if *a <= 1 && *b <= 1 => {
            Ok(QubitObservation::Cloned(QubitCloneOutcome::Clones(*a, *b)))
        }
        Some([b]) if *b <= 1 => Ok(QubitObservation::Measured(*b)),
        Some(other) => Err(Error::Parse(format!("bad sniff outcome {other:?}"))),
    }
}

pub fn write_sniff_log<W: Write>(records: &[SniffRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = SniffLine {
            serial: r.serial.clone(),
            pair: r.pair_index,
            basis: r.basis,
            q1: encode(r.q1),
            q2: encode(r.q2),
        };
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
    }
    Ok(())
}

pub fn read_sniff_log<R: BufRead>(input: R) -> Result<Vec<SniffRecord>> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let l: SniffLine = serde_json::from_str(&line)?;
        records.push(SniffRecord {
            serial: l.serial,
            pair_index: l.pair,
            basis: l.basis,
            q1: decode(l.q1)?,
            q2: decode(l.q2)?,
        });
    }
    Ok(records)
}
