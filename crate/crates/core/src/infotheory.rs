//! Exact joint distribution of (encoded pair, attacker observation) and the
//! information the attacker gains per qubit.
//!
//! The challenged basis is fixed to `Z`; the `X` table is the same up to a
//! relabelling of outcomes.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::clonesim::{error_rate, CloneParams, QubitCloneOutcome, StrategyId, F_SPCC_MAX};
use crate::error::{Error, Result};
use crate::qstate::{Basis, PairState, QubitState};

/// What the attacker holds about one qubit after the transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QubitObservation {
    Cloned(QubitCloneOutcome),
    Measured(u8),
}

pub type Observation = [QubitObservation; 2];

#[derive(Debug, Clone, Default)]
pub struct JointTable {
    cells: BTreeMap<(usize, Observation), f64>,
}

impl JointTable {
    fn add(&mut self, encoding: usize, obs: Observation, p: f64) {
        if p > 0.0 {
            *self.cells.entry((encoding, obs)).or_insert(0.0) += p;
        }
    }

    pub fn total(&self) -> f64 {
        self.cells.values().sum()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Observation, f64)> {
        self.cells.iter().map(|((k, o), p)| (*k, o, *p))
    }

    /// Restrict to the cells accepted by `keep` and renormalise.
    pub fn condition<F: Fn(&Observation) -> bool>(&self, keep: F) -> JointTable {
        let cells: BTreeMap<_, _> = self
            .cells
            .iter()
            .filter(|((_, o), _)| keep(o))
            .map(|(k, p)| (*k, *p))
            .collect();
        let z: f64 = cells.values().sum();
        JointTable {
            cells: cells.into_iter().map(|(k, p)| (k, p / z)).collect(),
        }
    }

    pub fn observation_marginal(&self) -> BTreeMap<Observation, f64> {
        let mut m = BTreeMap::new();
        for ((_, o), p) in &self.cells {
            *m.entry(*o).or_insert(0.0) += p;
        }
        m
    }

    pub fn encoding_marginal(&self) -> [f64; 8] {
        let mut m = [0.0; 8];
        for ((k, _), p) in &self.cells {
            m[*k] += p;
        }
        m
    }

    /// Observation distribution given one encoding.
    pub fn given_encoding(&self, encoding: usize) -> BTreeMap<Observation, f64> {
        let pk = self.encoding_marginal()[encoding];
        self.cells
            .iter()
            .filter(|((k, _), _)| *k == encoding)
            .map(|((_, o), p)| (*o, p / pk))
            .collect()
    }

    /// I(encoding; observation) in bits.
    pub fn mutual_information(&self) -> f64 {
        let pk = self.encoding_marginal();
        let po = self.observation_marginal();
        let info: f64 = self
            .cells
            .iter()
            .map(|((k, o), &p)| p * (p / (pk[*k] * po[o])).log2())
            .sum();
        info.max(0.0)
    }
}

fn qubit_observations(
    strategy: StrategyId,
    state: QubitState,
    params: CloneParams,
) -> Vec<(QubitObservation, f64)> {
    let basis = Basis::Z;
    if !strategy.clones() {
        return if state.basis() == basis {
            vec![(QubitObservation::Measured(state.bit()), 1.0)]
        } else {
            vec![
                (QubitObservation::Measured(0), 0.5),
                (QubitObservation::Measured(1), 0.5),
            ]
        };
    }
    let (f, p) = (params.fidelity(), params.success());
    let single = |bit: u8| -> f64 {
        if state.basis() != basis {
            0.5
        } else if bit == state.bit() {
            f
        } else {
            1.0 - f
        }
    };
    let mut out = vec![(QubitObservation::Cloned(QubitCloneOutcome::Lost), 1.0 - p)];
    for a in 0..2 {
        for b in 0..2 {
            out.push((
                QubitObservation::Cloned(QubitCloneOutcome::Clones(a, b)),
                p * single(a) * single(b),
            ));
        }
    }
    out
}

/// Full joint table over the eight equiprobable encodings. Strategies I and
/// II give the attacker identical data and share a table.
pub fn observation_distribution(strategy: StrategyId, params: CloneParams) -> JointTable {
    let mut table = JointTable::default();
    for (k, pair) in PairState::ALL.into_iter().enumerate() {
        let first = qubit_observations(strategy, pair.first, params);
        let second = qubit_observations(strategy, pair.second, params);
        for (o1, p1) in &first {
            for (o2, p2) in &second {
                table.add(k, [*o1, *o2], p1 * p2 / 8.0);
            }
        }
    }
    table
}

fn both_cloned(obs: &Observation) -> bool {
    obs.iter()
        .all(|o| !matches!(o, QubitObservation::Cloned(QubitCloneOutcome::Lost)))
}

pub fn mutual_info_per_qubit(strategy: StrategyId, params: CloneParams) -> f64 {
    observation_distribution(strategy, params).mutual_information() / 2.0
}

/// Per-qubit information after post-selecting on both qubits being cloned.
pub fn conditional_mutual_info_per_qubit(params: CloneParams) -> f64 {
    observation_distribution(StrategyId::II, params)
        .condition(both_cloned)
        .mutual_information()
        / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub strategy: StrategyId,
    pub success: f64,
    /// `None` for the no-cloning reference point.
    pub fidelity: Option<f64>,
    pub error_rate: f64,
    pub info_bits: f64,
    pub conditional: bool,
    pub physical: bool,
}

pub fn trade_off_curve(
    strategy: StrategyId,
    success: f64,
    f_grid: &[f64],
    conditional: bool,
) -> Result<Vec<CurvePoint>> {
    if f_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(&bad) = f_grid.iter().find(|f| !(0.5..=1.0).contains(*f)) {
        return Err(Error::GridOutOfRange(bad));
    }
    if !strategy.clones() {
        let params = CloneParams::new(1.0, 1.0)?;
        return Ok(vec![CurvePoint {
            strategy,
            success,
            fidelity: None,
            error_rate: error_rate(strategy, params),
            info_bits: mutual_info_per_qubit(strategy, params),
            conditional,
            physical: true,
        }]);
    }
    f_grid
        .iter()
        .map(|&f| {
            let params = CloneParams::new(f, success)?;
            let info_bits = if conditional {
                conditional_mutual_info_per_qubit(params)
            } else {
                mutual_info_per_qubit(strategy, params)
            };
            Ok(CurvePoint {
                strategy,
                success,
                fidelity: Some(f),
                error_rate: error_rate(strategy, params),
                info_bits,
                conditional,
                physical: f <= F_SPCC_MAX,
            })
        })
        .collect()
}

/// `n` evenly spaced fidelities from ½ to 1 inclusive.
pub fn fidelity_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n)
            .map(|i| 0.5 + 0.5 * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub const CURVE_CSV_HEADER: [&str; 7] = [
    "strategy",
    "P",
    "F",
    "epsilon",
    "I_bits_per_qubit",
    "conditional",
    "physical",
];

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_CSV_HEADER)?;
    for p in points {
        w.write_record([
            p.strategy.to_string(),
            p.success.to_string(),
            p.fidelity.map(|f| f.to_string()).unwrap_or_default(),
            p.error_rate.to_string(),
            p.info_bits.to_string(),
            p.conditional.to_string(),
            p.physical.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
