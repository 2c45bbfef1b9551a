//! Statistical model of a symmetric phase-covariant cloner followed by a
//! measurement of both clones in the challenged basis.
//!
//! Cloning succeeds with probability `P` per qubit. On success the two clone
//! outcomes are drawn independently: each reproduces the input bit with
//! probability `F` when the input lies in the measured basis, and is a fair
//! coin otherwise.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{Basis, Bit, PairState, Position, QubitState};

/// Optimal fidelity of symmetric phase-covariant 1→2 cloning, ½(1 + 1/√2).
pub const F_SPCC_MAX: f64 = 0.5 * (1.0 + std::f64::consts::FRAC_1_SQRT_2);
/// Fidelity reachable by measure-and-prepare copying.
pub const F_CLASSICAL: f64 = 0.75;
/// Success probability of the linear-optics cloner.
pub const P_LINEAR: f64 = 1.0 / 3.0;
/// Average clone fidelity measured in the reference experiment.
pub const F_EXPERIMENT: f64 = 0.803;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloneParams {
    fidelity: f64,
    success: f64,
}

impl CloneParams {
    pub fn new(fidelity: f64, success: f64) -> Result<CloneParams> {
        let ok = (0.5..=1.0).contains(&fidelity) && success > 0.0 && success <= 1.0;
        if !ok {
            return Err(Error::InvalidCloneParams { fidelity, success });
        }
        Ok(CloneParams { fidelity, success })
    }

    pub fn deterministic(fidelity: f64) -> Result<CloneParams> {
        CloneParams::new(fidelity, 1.0)
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    pub fn success(&self) -> f64 {
        self.success
    }

    /// Whether an actual cloner can reach this fidelity.
    pub fn is_physical(&self) -> bool {
        self.fidelity <= F_SPCC_MAX + 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QubitCloneOutcome {
    Lost,
    Clones(Bit, Bit),
}

impl QubitCloneOutcome {
    /// The common value when both clones agree.
    pub fn agreed(self) -> Option<Bit> {
        match self {
            QubitCloneOutcome::Clones(a, b) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn is_lost(self) -> bool {
        matches!(self, QubitCloneOutcome::Lost)
    }
}

pub fn clone_and_measure_qubit<R: Rng + ?Sized>(
    state: QubitState,
    basis: Basis,
    params: CloneParams,
    rng: &mut R,
) -> QubitCloneOutcome {
    if !rng.random_bool(params.success) {
        return QubitCloneOutcome::Lost;
    }
    let draw = |rng: &mut R| -> Bit {
        if state.basis() == basis {
            if rng.random_bool(params.fidelity) {
                state.bit()
            } else {
                state.bit() ^ 1
            }
        } else {
            rng.random_range(0..2)
        }
    };
    let a = draw(rng);
    let b = draw(rng);
    QubitCloneOutcome::Clones(a, b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inference {
    SixEliminated {
        position: Position,
        state: QubitState,
    },
    FourCandidates([PairState; 4]),
    NoInference,
}

impl Inference {
    /// Whether `pair` is among the encodings this inference leaves open.
    pub fn admits(&self, pair: PairState) -> bool {
        match self {
            Inference::SixEliminated { position, state } => pair.qubit(*position) == *state,
            Inference::FourCandidates(set) => set.contains(&pair),
            Inference::NoInference => true,
        }
    }
}

pub fn classify_pair(o1: QubitCloneOutcome, o2: QubitCloneOutcome, basis: Basis) -> Inference {
    if o1.is_lost() || o2.is_lost() {
        return Inference::NoInference;
    }
    match (o1.agreed(), o2.agreed()) {
        (Some(v), None) => Inference::SixEliminated {
            position: Position::First,
            state: QubitState::new(basis, v),
        },
        (None, Some(v)) => Inference::SixEliminated {
            position: Position::Second,
            state: QubitState::new(basis, v),
        },
        (Some(v1), Some(v2)) => {
            let first = QubitState::new(basis, v1);
            let second = QubitState::new(basis, v2);
            let mut set = PairState::ALL
                .into_iter()
                .filter(|p| p.first == first || p.second == second);
            let mut take = || set.next().expect("four candidates");
            Inference::FourCandidates([take(), take(), take(), take()])
        }
        (None, None) => Inference::NoInference,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventProbs {
    pub p_correct: f64,
    pub p_error: f64,
    pub p_total: f64,
}

/// Probabilities, per sniffed pair, of a correct and of a misleading
/// six-eliminated event.
pub fn event_probabilities(params: CloneParams) -> EventProbs {
    let f = params.fidelity;
    let p2 = params.success * params.success;
    let p_correct = 0.5 * p2 * f * f;
    let p_error = 0.5 * p2 * (1.0 - f) * (1.0 - f) + p2 * f * (1.0 - f);
    EventProbs {
        p_correct,
        p_error,
        p_total: p_correct + p_error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyId {
    /// Always answer; a random bit replaces a failed clone.
    I,
    /// Answer from the clone, report a loss when cloning fails.
    II,
    /// Measure honestly without cloning.
    III,
}

impl StrategyId {
    pub const ALL: [StrategyId; 3] = [StrategyId::I, StrategyId::II, StrategyId::III];

    pub fn clones(self) -> bool {
        !matches!(self, StrategyId::III)
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyId::I => "i",
            StrategyId::II => "ii",
            StrategyId::III => "iii",
        })
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(StrategyId::I),
            "ii" | "2" => Ok(StrategyId::II),
            "iii" | "3" => Ok(StrategyId::III),
            other => Err(Error::Parse(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Error rate the bank observes on matched qubits.
pub fn error_rate(strategy: StrategyId, params: CloneParams) -> f64 {
    let (f, p) = (params.fidelity, params.success);
    match strategy {
        StrategyId::I => 0.5 * (1.0 - p) + p * (1.0 - f),
        StrategyId::II => 1.0 - f,
        StrategyId::III => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use QubitCloneOutcome::{Clones, Lost};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn constants() {
        assert!((F_SPCC_MAX - 0.853_553_390_593_273_8).abs() < 1e-15);
        assert!(CloneParams::new(0.49, 1.0).is_err());
        assert!(CloneParams::new(0.8, 0.0).is_err());
        assert!(CloneParams::new(0.8, 1.01).is_err());
        assert!(CloneParams::new(0.5, P_LINEAR).is_ok());
    }

    #[test]
    fn perfect_cloning_of_eigenstate() {
        let cp = CloneParams::new(1.0, 1.0).unwrap();
        let mut r = rng(1);
        for _ in 0..1000 {
            assert_eq!(
                clone_and_measure_qubit(QubitState::One, Basis::Z, cp, &mut r),
                Clones(1, 1)
            );
        }
    }

    #[test]
    fn conjugate_clones_are_uniform() {
        let cp = CloneParams::new(0.9, 1.0).unwrap();
        let mut r = rng(2);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            match clone_and_measure_qubit(QubitState::Plus, Basis::Z, cp, &mut r) {
                Clones(a, b) => counts[(a * 2 + b) as usize] += 1,
                Lost => panic!("P = 1 never loses"),
            }
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!(
                (c as f64 - n as f64 / 4.0).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn loss_is_bernoulli() {
        let cp = CloneParams::new(0.854, 0.5).unwrap();
        let mut r = rng(3);
        let n = 100_000;
        let lost = (0..n)
            .filter(|i| {
                let s = QubitState::ALL[i % 4];
                let b = Basis::ALL[i % 2];
                clone_and_measure_qubit(s, b, cp, &mut r).is_lost()
            })
            .count();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((lost as f64 - n as f64 * 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn classify_named_cases() {
        assert_eq!(
            classify_pair(Clones(0, 1), Clones(1, 1), Basis::Z),
            Inference::SixEliminated {
                position: Position::Second,
                state: QubitState::One
            }
        );
        let four = classify_pair(Clones(0, 0), Clones(1, 1), Basis::Z);
        let expected: Vec<PairState> = ["|0+>", "|0->", "|+1>", "|-1>"]
            .iter()
            .map(|s| *PairState::ALL.iter().find(|p| p.to_string() == *s).unwrap())
            .collect();
        match four {
            Inference::FourCandidates(set) => {
                for p in &expected {
                    assert!(set.contains(p));
                }
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            classify_pair(Clones(0, 1), Clones(1, 0), Basis::Z),
            Inference::NoInference
        );
        assert_eq!(
            classify_pair(Lost, Clones(1, 1), Basis::X),
            Inference::NoInference
        );
    }

    /// Brute force over every four-bit outcome and both bases, checked
    /// against a count of which encodings remain consistent with "the
    /// agreeing qubit's clones are right".
    #[test]
    fn classify_exhaustive() {
        for basis in Basis::ALL {
            for bits in 0u8..16 {
                let (a1, b1, a2, b2) = (bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1);
                let inf = classify_pair(Clones(a1, b1), Clones(a2, b2), basis);
                let agree1 = a1 == b1;
                let agree2 = a2 == b2;
                let admitted: Vec<PairState> = PairState::ALL
                    .into_iter()
                    .filter(|p| inf.admits(*p))
                    .collect();
                match (agree1, agree2) {
                    (true, false) | (false, true) => {
                        assert_eq!(admitted.len(), 2);
                        let (pos, v) = if agree1 {
                            (Position::First, a1)
                        } else {
                            (Position::Second, a2)
                        };
                        for p in admitted {
                            assert_eq!(p.qubit(pos), QubitState::new(basis, v));
                        }
                    }
                    (true, true) => {
                        assert_eq!(admitted.len(), 4);
                        for p in admitted {
                            assert!(
                                p.first == QubitState::new(basis, a1)
                                    || p.second == QubitState::new(basis, a2)
                            );
                        }
                    }
                    (false, false) => assert_eq!(inf, Inference::NoInference),
                }
            }
        }
    }

    #[test]
    fn event_probabilities_values() {
        let e = event_probabilities(CloneParams::new(1.0, 1.0).unwrap());
        assert_eq!(e.p_correct, 0.5);
        assert_eq!(e.p_error, 0.0);

        // Substituted by hand: ½·(1/9)·0.854², ½·(1/9)·0.146² + (1/9)·0.854·0.146.
        let e = event_probabilities(CloneParams::new(0.854, P_LINEAR).unwrap());
        assert!((e.p_correct - 0.040_517_555_6).abs() < 1e-9);
        assert!((e.p_error - 0.015_038).abs() < 1e-9);
        assert!((e.p_total - 1.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn total_event_probability_is_half_p_squared() {
        for i in 0..10 {
            for j in 0..10 {
                let f = 0.5 + 0.5 * i as f64 / 9.0;
                let p = 0.05 + 0.95 * j as f64 / 9.0;
                let e = event_probabilities(CloneParams::new(f, p).unwrap());
                assert!((e.p_total - p * p / 2.0).abs() < 1e-12);
                assert!((e.p_total - (e.p_correct + e.p_error)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn error_rates() {
        let cp = |f, p| CloneParams::new(f, p).unwrap();
        assert_eq!(error_rate(StrategyId::II, cp(0.75, 0.2)), 0.25);
        assert!((error_rate(StrategyId::I, cp(0.854, P_LINEAR)) - 0.382).abs() < 1e-12);
        for f in [0.5, 0.7, 0.803, 0.9, 1.0] {
            let a = error_rate(StrategyId::I, cp(f, 1.0));
            let b = error_rate(StrategyId::II, cp(f, 1.0));
            assert!((a - b).abs() < 1e-15);
            assert!((a - (1.0 - f)).abs() < 1e-15);
            for p in [0.1, P_LINEAR, 0.9] {
                // difference is (1 - P)(F - ½)
                let gap =
                    error_rate(StrategyId::I, cp(f, p)) - error_rate(StrategyId::II, cp(f, p));
                assert!((gap - (1.0 - p) * (f - 0.5)).abs() < 1e-12);
                assert!(gap >= 0.0);
            }
            assert_eq!(error_rate(StrategyId::III, cp(f, 0.5)), 0.0);
        }
    }

    #[test]
    fn half_fidelity_outcomes_carry_no_state_information() {
        // At F = ½ every non-lost outcome is uniform whatever the input.
        let cp = CloneParams::new(0.5, 1.0).unwrap();
        let n = 40_000;
        let mut r = rng(11);
        let mut tallies = Vec::new();
        for s in QubitState::ALL {
            let mut counts = [0usize; 4];
            for _ in 0..n {
                if let Clones(a, b) = clone_and_measure_qubit(s, Basis::Z, cp, &mut r) {
                    counts[(a * 2 + b) as usize] += 1;
                }
            }
            tallies.push(counts);
        }
        let sigma = (n as f64 * 0.1875).sqrt();
        for counts in tallies {
            for c in counts {
                assert!((c as f64 - n as f64 / 4.0).abs() < 4.0 * sigma);
            }
        }
    }
}
