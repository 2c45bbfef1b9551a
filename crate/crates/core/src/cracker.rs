//! Recovery of the bank's secret encoding from sniffed clone statistics.
//!
//! Every sniffed pair whose clones agree on one qubit and disagree on the
//! other pins that qubit's state (a [`Constraint`]). A candidate encoding
//! (hash function, salt) scores one agreement for each constraint its
//! predicted token satisfies. The true encoding agrees at rate `F²`, every
//! other candidate at the background rate ¼.
//!
//! [`recover`] consumes the constraints one serial at a time, periodically
//! drops the weakest half of the candidates and stops as soon as the leader
//! stands `z` standard deviations above the rest.

use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clonesim::{classify_pair, Inference};
use crate::error::{Error, Result};
use crate::infotheory::QubitObservation;
use crate::mint::{keystream, mint_token, EncodingSpec, HashId, Token};
use crate::qstate::{PairState, Position, QubitState};
use crate::terminal::SniffRecord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub serial: String,
    pub pair_index: usize,
    pub position: Position,
    pub state: QubitState,
}

impl Constraint {
    pub fn admits(&self, pair: PairState) -> bool {
        pair.qubit(self.position) == self.state
    }
}

/// A pair whose clones agreed on both qubits: one of four encodings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hint {
    pub serial: String,
    pub pair_index: usize,
    pub first: QubitState,
    pub second: QubitState,
}

impl Hint {
    pub fn admits(&self, pair: PairState) -> bool {
        pair.first == self.first || pair.second == self.second
    }
}

fn inference(record: &SniffRecord) -> Inference {
    match (record.q1, record.q2) {
        (QubitObservation::Cloned(o1), QubitObservation::Cloned(o2)) => {
            classify_pair(o1, o2, record.basis)
        }
        _ => Inference::NoInference,
    }
}

pub fn extract_constraints(log: &[SniffRecord]) -> Vec<Constraint> {
    log.iter()
        .filter_map(|r| match inference(r) {
            Inference::SixEliminated { position, state } => Some(Constraint {
                serial: r.serial.clone(),
                pair_index: r.pair_index,
                position,
                state,
            }),
            _ => None,
        })
        .collect()
}

pub fn extract_hints(log: &[SniffRecord]) -> Vec<Hint> {
    log.iter()
        .filter_map(|r| match inference(r) {
            Inference::FourCandidates(_) => {
                let (QubitObservation::Cloned(o1), QubitObservation::Cloned(o2)) = (r.q1, r.q2)
                else {
                    return None;
                };
                Some(Hint {
                    serial: r.serial.clone(),
                    pair_index: r.pair_index,
                    first: QubitState::new(r.basis, o1.agreed()?),
                    second: QubitState::new(r.basis, o2.agreed()?),
                })
            }
            _ => None,
        })
        .collect()
}

/// Evidence gathered from one serial. `ordinal` numbers the sniffed pairs
/// within the batch so a pair budget can cut a batch short.
#[derive(Debug, Clone, Default)]
pub struct SerialBatch {
    pub serial: String,
    pub pairs: usize,
    pub constraints: Vec<(usize, Constraint)>,
    pub hints: Vec<(usize, Hint)>,
}

/// Groups a sniff log into per-serial batches in order of first appearance.
pub fn batches_from_log(log: &[SniffRecord]) -> Vec<SerialBatch> {
    let mut order: Vec<SerialBatch> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for record in log {
        let slot = *index.entry(&record.serial).or_insert_with(|| {
            order.push(SerialBatch {
                serial: record.serial.clone(),
                ..SerialBatch::default()
            });
            order.len() - 1
        });
        let batch = &mut order[slot];
        let ordinal = batch.pairs;
        batch.pairs += 1;
        let single = std::slice::from_ref(record);
        if let Some(c) = extract_constraints(single).pop() {
            batch.constraints.push((ordinal, c));
        }
        if let Some(h) = extract_hints(single).pop() {
            batch.hints.push((ordinal, h));
        }
    }
    order
}

/// Batches from a bare constraint list, counting each constraint as one pair.
pub fn batches_from_constraints(constraints: &[Constraint]) -> Vec<SerialBatch> {
    let mut order: Vec<SerialBatch> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for c in constraints {
        let slot = *index.entry(&c.serial).or_insert_with(|| {
            order.push(SerialBatch {
                serial: c.serial.clone(),
                ..SerialBatch::default()
            });
            order.len() - 1
        });
        let batch = &mut order[slot];
        batch.constraints.push((batch.pairs, c.clone()));
        batch.pairs += 1;
    }
    order
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub hash: HashId,
    pub salt: String,
    pub agreements: usize,
    pub evaluated: usize,
    #[serde(default)]
    pub hint_agreements: usize,
    #[serde(default)]
    pub hints_evaluated: usize,
}

impl CandidateScore {
    fn empty(spec: &EncodingSpec) -> CandidateScore {
        CandidateScore {
            hash: spec.hash,
            salt: spec.salt.clone(),
            agreements: 0,
            evaluated: 0,
            hint_agreements: 0,
            hints_evaluated: 0,
        }
    }

    pub fn rate(&self) -> f64 {
        if self.evaluated == 0 {
            0.0
        } else {
            self.agreements as f64 / self.evaluated as f64
        }
    }

    fn weighted(&self, hint_weight: f64) -> f64 {
        self.agreements as f64 + hint_weight * self.hint_agreements as f64
    }
}

/// Agreement count of one candidate over a constraint list.
pub fn agreements(candidate: &EncodingSpec, constraints: &[Constraint]) -> CandidateScore {
    let mut score = CandidateScore::empty(candidate);
    let mut cache: HashMap<&str, Vec<u8>> = HashMap::new();
    for c in constraints {
        let stream = cache
            .entry(c.serial.as_str())
            .or_insert_with(|| keystream(candidate, &c.serial));
        score.evaluated += 1;
        if let Some(&byte) = stream
            .get(c.pair_index)
            .filter(|_| c.pair_index < candidate.pairs_per_token)
        {
            if c.admits(PairState::ALL[(byte % 8) as usize]) {
                score.agreements += 1;
            }
        }
    }
    score
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoverySettings {
    /// Leader must exceed the others' mean by this many standard deviations.
    pub z_multiple: f64,
    /// Prune after this many serials.
    pub prune_every: usize,
    /// Fraction of candidates kept at each prune.
    pub keep_fraction: f64,
    /// Cap on sniffed pairs consumed; `None` reads the whole stream.
    pub max_pairs: Option<usize>,
    /// Weight of four-candidate hints in the score; 0 ignores them.
    pub hint_weight: f64,
}

impl Default for RecoverySettings {
    fn default() -> Self {
        RecoverySettings {
            z_multiple: 5.0,
            prune_every: 10,
            keep_fraction: 0.5,
            max_pairs: None,
            hint_weight: 0.0,
        }
    }
}

impl RecoverySettings {
    pub fn validate(&self) -> Result<()> {
        if self.z_multiple.is_nan() || self.z_multiple <= 0.0 {
            return Err(Error::InvalidSettings(format!(
                "z_multiple {} must be > 0",
                self.z_multiple
            )));
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(Error::InvalidSettings(format!(
                "keep_fraction {} must be in (0, 1]",
                self.keep_fraction
            )));
        }
        if self.prune_every == 0 {
            return Err(Error::InvalidSettings(
                "prune_every must be at least 1".into(),
            ));
        }
        if self.hint_weight < 0.0 {
            return Err(Error::InvalidSettings(
                "hint_weight must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub found: bool,
    pub spec: EncodingSpec,
    pub score: CandidateScore,
    pub pairs_consumed: usize,
    pub serials_consumed: usize,
    pub survivors: usize,
    /// Leader's distance from the others' mean in standard deviations, when defined.
    pub leader_z: Option<f64>,
}

#[derive(Serialize)]
struct ResultRecord<'a> {
    found: bool,
    hash: HashId,
    salt: &'a str,
    agreements: usize,
    evaluated: usize,
    pairs_consumed: usize,
}

impl RecoveryResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ResultRecord {
            found: self.found,
            hash: self.spec.hash,
            salt: &self.spec.salt,
            agreements: self.score.agreements,
            evaluated: self.score.evaluated,
            pairs_consumed: self.pairs_consumed,
        })
        .expect("plain struct serialises")
    }
}

/// All salts with exactly `digits` decimal digits, zero padded.
pub fn salt_space(digits: u32) -> Vec<String> {
    (0..10u64.pow(digits))
        .map(|s| format!("{s:0width$}", width = digits as usize))
        .collect()
}

struct Tally {
    spec: EncodingSpec,
    score: CandidateScore,
    order: usize,
}

impl Tally {
    fn absorb(&mut self, batch: &SerialBatch, take: usize) {
        let used_c = batch.constraints.iter().filter(|(o, _)| *o < take);
        let used_h = batch.hints.iter().filter(|(o, _)| *o < take);
        let mut stream: Option<Vec<u8>> = None;
        let mut predicted = |j: usize| -> Option<PairState> {
            if j >= self.spec.pairs_per_token {
                return None;
            }
            let s = stream.get_or_insert_with(|| keystream(&self.spec, &batch.serial));
            Some(PairState::ALL[(s[j] % 8) as usize])
        };
        for (_, c) in used_c {
            self.score.evaluated += 1;
            if predicted(c.pair_index).is_some_and(|p| c.admits(p)) {
                self.score.agreements += 1;
            }
        }
        for (_, h) in used_h {
            self.score.hints_evaluated += 1;
            if predicted(h.pair_index).is_some_and(|p| h.admits(p)) {
                self.score.hint_agreements += 1;
            }
        }
    }
}

fn candidates(hashes: &[HashId], salts: &[String], layout: &EncodingSpec) -> Result<Vec<Tally>> {
    if hashes.is_empty() || salts.is_empty() {
        return Err(Error::EmptyCandidateSpace);
    }
    let mut out = Vec::with_capacity(hashes.len() * salts.len());
    for &hash in hashes {
        for salt in salts {
            let spec = layout.with_secret(hash, salt.clone());
            spec.validate()?;
            out.push(Tally {
                score: CandidateScore::empty(&spec),
                spec,
                order: out.len(),
            });
        }
    }
    Ok(out)
}

/// Index of the leader and its z-score against the other candidates.
fn leader(tallies: &[Tally], hint_weight: f64) -> (usize, Option<f64>) {
    let best = tallies
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            a.score
                .weighted(hint_weight)
                .total_cmp(&b.score.weighted(hint_weight))
                .then(b.order.cmp(&a.order))
        })
        .map(|(i, _)| i)
        .expect("non-empty candidate set");
    let others: Vec<f64> = tallies
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, t)| t.score.weighted(hint_weight))
        .collect();
    if others.len() < 2 {
        return (best, None);
    }
    let n = others.len() as f64;
    let mean = others.iter().sum::<f64>() / n;
    let var = others.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd <= 0.0 {
        return (best, None);
    }
    (
        best,
        Some((tallies[best].score.weighted(hint_weight) - mean) / sd),
    )
}

fn prune(tallies: &mut Vec<Tally>, keep_fraction: f64, hint_weight: f64) {
    let n = tallies.len();
    let keep = ((n as f64 * keep_fraction).ceil() as usize).max(3).min(n);
    tallies.sort_by(|a, b| {
        b.score
            .weighted(hint_weight)
            .total_cmp(&a.score.weighted(hint_weight))
            .then(a.order.cmp(&b.order))
    });
    tallies.truncate(keep);
    tallies.sort_by_key(|t| t.order);
}

/// Searches `hashes × salts` for the encoding behind the sniffed batches.
/// `layout` supplies the keystream and token lengths; its secret is ignored.
pub fn recover(
    batches: &[SerialBatch],
    hashes: &[HashId],
    salts: &[String],
    layout: &EncodingSpec,
    settings: &RecoverySettings,
) -> Result<RecoveryResult> {
    settings.validate()?;
    let mut tallies = candidates(hashes, salts, layout)?;
    let budget = settings.max_pairs.unwrap_or(usize::MAX);
    let mut pairs_consumed = 0usize;
    let mut serials_consumed = 0usize;
    let mut last_z = None;

    for batch in batches {
        if pairs_consumed >= budget {
            break;
        }
        let take = batch.pairs.min(budget - pairs_consumed);
        tallies.par_iter_mut().for_each(|t| t.absorb(batch, take));
        pairs_consumed += take;
        serials_consumed += 1;

        let (best, z) = leader(&tallies, settings.hint_weight);
        last_z = z;
        if z.is_some_and(|z| z > settings.z_multiple) {
            return Ok(finish(
                &tallies[best],
                true,
                pairs_consumed,
                serials_consumed,
                tallies.len(),
                z,
            ));
        }
        if serials_consumed.is_multiple_of(settings.prune_every) {
            prune(&mut tallies, settings.keep_fraction, settings.hint_weight);
        }
    }

    let (best, z) = leader(&tallies, settings.hint_weight);
    let z = z.or(last_z);
    Ok(finish(
        &tallies[best],
        false,
        pairs_consumed,
        serials_consumed,
        tallies.len(),
        z,
    ))
}

fn finish(
    t: &Tally,
    found: bool,
    pairs_consumed: usize,
    serials_consumed: usize,
    survivors: usize,
    leader_z: Option<f64>,
) -> RecoveryResult {
    RecoveryResult {
        found,
        spec: t.spec.clone(),
        score: t.score.clone(),
        pairs_consumed,
        serials_consumed,
        survivors,
        leader_z,
    }
}

/// [`recover`] over every supported hash function.
pub fn generalized_recover(
    batches: &[SerialBatch],
    salts: &[String],
    layout: &EncodingSpec,
    settings: &RecoverySettings,
) -> Result<RecoveryResult> {
    recover(batches, &HashId::ALL, salts, layout, settings)
}

/// Final agreement tallies for every candidate, without pruning or stopping.
pub fn score_all(
    batches: &[SerialBatch],
    hashes: &[HashId],
    salts: &[String],
    layout: &EncodingSpec,
) -> Result<Vec<CandidateScore>> {
    let mut tallies = candidates(hashes, salts, layout)?;
    tallies.par_iter_mut().for_each(|t| {
        for b in batches {
            t.absorb(b, b.pairs);
        }
    });
    Ok(tallies.into_iter().map(|t| t.score).collect())
}

/// Smallest pair budget under which [`recover`] stops on `truth`, found by
/// bisection over the budget. `None` when even the full stream is not enough.
pub fn minimal_pairs(
    batches: &[SerialBatch],
    hashes: &[HashId],
    salts: &[String],
    layout: &EncodingSpec,
    settings: &RecoverySettings,
    truth: &EncodingSpec,
) -> Result<Option<usize>> {
    let total: usize = batches.iter().map(|b| b.pairs).sum();
    let succeeds = |budget: usize| -> Result<bool> {
        let s = RecoverySettings {
            max_pairs: Some(budget),
            ..*settings
        };
        let r = recover(batches, hashes, salts, layout, &s)?;
        Ok(r.found && r.spec.hash == truth.hash && r.spec.salt == truth.salt)
    };
    if total == 0 || !succeeds(total)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0usize, total);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if succeeds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

pub fn counterfeit(result: &RecoveryResult, serial: &str) -> Result<Token> {
    if !result.found {
        return Err(Error::NotRecovered);
    }
    Ok(mint_token(&result.spec, serial))
}

#[derive(Serialize, Deserialize)]
struct ConstraintRow {
    serial: String,
    pair: usize,
    position: u8,
    state: String,
}

pub fn write_constraints_csv<W: Write>(constraints: &[Constraint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in constraints {
        w.serialize(ConstraintRow {
            serial: c.serial.clone(),
            pair: c.pair_index,
            position: c.position.number(),
            state: c.state.symbol().to_string(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_constraints_csv<R: Read>(input: R) -> Result<Vec<Constraint>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<ConstraintRow>()
        .map(|row| {
            let row = row?;
            Ok(Constraint {
                serial: row.serial,
                pair_index: row.pair,
                position: Position::from_number(row.position)?,
                state: row.state.parse()?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bank::make_challenge;
    use crate::clonesim::{CloneParams, QubitCloneOutcome, StrategyId};
    use crate::qstate::Basis;
    use crate::terminal::attack_respond;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn record(basis: Basis, q1: (u8, u8), q2: (u8, u8)) -> SniffRecord {
        SniffRecord {
            serial: "1".into(),
            pair_index: 0,
            basis,
            q1: QubitObservation::Cloned(QubitCloneOutcome::Clones(q1.0, q1.1)),
            q2: QubitObservation::Cloned(QubitCloneOutcome::Clones(q2.0, q2.1)),
        }
    }

    fn sniff(
        spec: &EncodingSpec,
        params: CloneParams,
        serials: usize,
        seed: u64,
    ) -> Vec<SniffRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut log = Vec::new();
        for i in 0..serials {
            let t = mint_token(spec, &format!("{i:03}"));
            let c = make_challenge(&t.serial, t.len(), &mut rng);
            log.extend(
                attack_respond(StrategyId::II, params, &t, &c, &mut rng)
                    .unwrap()
                    .1,
            );
        }
        log
    }

    #[test]
    fn constraint_from_single_agreeing_qubit() {
        let c = extract_constraints(&[record(Basis::Z, (0, 1), (1, 1))]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].position, Position::Second);
        assert_eq!(c[0].state, QubitState::One);
        assert!(extract_constraints(&[record(Basis::Z, (0, 0), (1, 1))]).is_empty());
        assert_eq!(extract_hints(&[record(Basis::Z, (0, 0), (1, 1))]).len(), 1);
        assert!(extract_constraints(&[record(Basis::Z, (0, 1), (1, 0))]).is_empty());
    }

    #[test]
    fn perfect_data_agrees_fully_with_truth() {
        let truth = EncodingSpec::new(HashId::HmacSha1, "123").unwrap();
        let log = sniff(&truth, CloneParams::new(1.0, 1.0).unwrap(), 20, 1);
        let cons = extract_constraints(&log);
        assert!(!cons.is_empty());
        let s = agreements(&truth, &cons);
        assert_eq!(s.agreements, s.evaluated);
        let wrong = agreements(&truth.with_secret(HashId::HmacSha1, "124"), &cons);
        assert!(wrong.rate() < 0.5);
    }

    #[test]
    fn batch_scoring_matches_direct_agreements() {
        let truth = EncodingSpec::new(HashId::HmacMd5, "77").unwrap();
        let log = sniff(&truth, CloneParams::new(0.8, 0.6).unwrap(), 15, 2);
        let batches = batches_from_log(&log);
        assert_eq!(batches.len(), 15);
        assert!(batches.iter().all(|b| b.pairs == 40));
        let salts: Vec<String> = ["76", "77", "78"].iter().map(|s| s.to_string()).collect();
        let scores = score_all(&batches, &[HashId::HmacMd5], &salts, &truth).unwrap();
        let cons = extract_constraints(&log);
        for s in scores {
            let direct = agreements(&truth.with_secret(s.hash, s.salt.clone()), &cons);
            assert_eq!(s.agreements, direct.agreements);
            assert_eq!(s.evaluated, direct.evaluated);
        }
    }

    #[test]
    fn recover_finds_salt_and_is_deterministic() {
        let truth = EncodingSpec::new(HashId::HmacSha256, "042").unwrap();
        let log = sniff(&truth, CloneParams::new(0.9, 1.0).unwrap(), 30, 3);
        let batches = batches_from_log(&log);
        let salts = salt_space(2)
            .into_iter()
            .map(|s| format!("0{s}"))
            .collect::<Vec<_>>();
        let settings = RecoverySettings::default();
        let a = recover(&batches, &[HashId::HmacSha256], &salts, &truth, &settings).unwrap();
        let b = recover(&batches, &[HashId::HmacSha256], &salts, &truth, &settings).unwrap();
        assert!(a.found);
        assert_eq!(a.spec, truth);
        assert_eq!(a, b);
        assert!(a.leader_z.unwrap() > 5.0);
        let t = counterfeit(&a, "999").unwrap();
        assert_eq!(t, mint_token(&truth, "999"));
    }

    #[test]
    fn absent_salt_is_not_found() {
        let truth = EncodingSpec::new(HashId::HmacSha256, "5000").unwrap();
        let log = sniff(&truth, CloneParams::new(0.803, 1.0).unwrap(), 40, 4);
        let batches = batches_from_log(&log);
        let salts = salt_space(3);
        let r = recover(
            &batches,
            &[HashId::HmacSha256],
            &salts,
            &truth,
            &RecoverySettings::default(),
        )
        .unwrap();
        assert!(!r.found);
        assert_eq!(r.pairs_consumed, 1600);
        assert!(matches!(counterfeit(&r, "1"), Err(Error::NotRecovered)));
    }

    #[test]
    fn budget_caps_consumption() {
        let truth = EncodingSpec::new(HashId::HmacSha256, "9").unwrap();
        let log = sniff(&truth, CloneParams::new(0.6, 1.0).unwrap(), 10, 5);
        let batches = batches_from_log(&log);
        let settings = RecoverySettings {
            max_pairs: Some(55),
            z_multiple: 1e9,
            ..RecoverySettings::default()
        };
        let r = recover(
            &batches,
            &[HashId::HmacSha256],
            &salt_space(1),
            &truth,
            &settings,
        )
        .unwrap();
        assert_eq!(r.pairs_consumed, 55);
        assert_eq!(r.serials_consumed, 2);
    }

    #[test]
    fn pruning_keeps_at_least_three() {
        let truth = EncodingSpec::new(HashId::HmacSha1, "3").unwrap();
        let log = sniff(&truth, CloneParams::new(0.5, 1.0).unwrap(), 12, 6);
        let batches = batches_from_log(&log);
        let settings = RecoverySettings {
            prune_every: 1,
            keep_fraction: 0.1,
            z_multiple: 1e9,
            ..RecoverySettings::default()
        };
        let r = recover(
            &batches,
            &[HashId::HmacSha1],
            &salt_space(2),
            &truth,
            &settings,
        )
        .unwrap();
        assert_eq!(r.survivors, 3);
    }

    #[test]
    fn invalid_inputs() {
        let layout = EncodingSpec::new(HashId::HmacSha1, "3").unwrap();
        assert!(matches!(
            recover(
                &[],
                &[HashId::HmacSha1],
                &[],
                &layout,
                &RecoverySettings::default()
            ),
            Err(Error::EmptyCandidateSpace)
        ));
        let bad = RecoverySettings {
            keep_fraction: 0.0,
            ..RecoverySettings::default()
        };
        assert!(recover(&[], &[HashId::HmacSha1], &salt_space(1), &layout, &bad).is_err());
        let bad = RecoverySettings {
            z_multiple: -1.0,
            ..RecoverySettings::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn constraint_csv_roundtrip() {
        let cons = vec![
            Constraint {
                serial: "000017".into(),
                pair_index: 4,
                position: Position::Second,
                state: QubitState::Minus,
            },
            Constraint {
                serial: "000018".into(),
                pair_index: 0,
                position: Position::First,
                state: QubitState::Zero,
            },
        ];
        let mut buf = Vec::new();
        write_constraints_csv(&cons, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "serial,pair,position,state\n000017,4,2,-\n000018,0,1,0\n"
        );
        assert_eq!(read_constraints_csv(&buf[..]).unwrap(), cons);
        let batches = batches_from_constraints(&cons);
        assert_eq!(batches.len(), 2);
    }

    #[test]
    fn result_json_fields() {
        let spec = EncodingSpec::new(HashId::HmacMd5, "7").unwrap();
        let r = RecoveryResult {
            found: true,
            score: CandidateScore::empty(&spec),
            spec,
            pairs_consumed: 80,
            serials_consumed: 2,
            survivors: 10,
            leader_z: Some(6.0),
        };
        assert_eq!(
            r.to_json(),
            "{\"found\":true,\"hash\":\"HMAC_MD5\",\"salt\":\"7\",\"agreements\":0,\"evaluated\":0,\"pairs_consumed\":80}"
        );
    }

    #[test]
    fn salt_space_is_zero_padded() {
        let s = salt_space(3);
        assert_eq!(s.len(), 1000);
        assert_eq!(s[0], "000");
        assert_eq!(s[999], "999");
    }
}
