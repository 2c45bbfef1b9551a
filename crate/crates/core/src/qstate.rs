//! Single-qubit states from two conjugate bases and the eight two-qubit
//! encodings a token is built from.
//!
//! Every pair holds one qubit prepared in the computational basis (`Z`) and
//! one in the diagonal basis (`X`). Outcomes are always reported as a single
//! bit; in the `X` basis `+` maps to 0 and `-` maps to 1.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Bit = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Z, Basis::X];

    pub fn conjugate(self) -> Basis {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Z" | "z" => Ok(Basis::Z),
            "X" | "x" => Ok(Basis::X),
            other => Err(Error::Parse(format!("unknown basis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QubitState {
    Zero,
    One,
    Plus,
    Minus,
}

impl QubitState {
    pub const ALL: [QubitState; 4] = [
        QubitState::Zero,
        QubitState::One,
        QubitState::Plus,
        QubitState::Minus,
    ];

    pub fn new(basis: Basis, bit: Bit) -> QubitState {
        match (basis, bit & 1) {
            (Basis::Z, 0) => QubitState::Zero,
            (Basis::Z, _) => QubitState::One,
            (Basis::X, 0) => QubitState::Plus,
            (Basis::X, _) => QubitState::Minus,
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            QubitState::Zero | QubitState::One => Basis::Z,
            QubitState::Plus | QubitState::Minus => Basis::X,
        }
    }

    pub fn bit(self) -> Bit {
        match self {
            QubitState::Zero | QubitState::Plus => 0,
            QubitState::One | QubitState::Minus => 1,
        }
    }

    /// Short ket label: `0`, `1`, `+` or `-`.
    pub fn symbol(self) -> char {
        match self {
            QubitState::Zero => '0',
            QubitState::One => '1',
            QubitState::Plus => '+',
            QubitState::Minus => '-',
        }
    }
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.symbol())
    }
}

impl FromStr for QubitState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('|').trim_end_matches('>');
        match trimmed {
            "0" => Ok(QubitState::Zero),
            "1" => Ok(QubitState::One),
            "+" => Ok(QubitState::Plus),
            "-" | "\u{2212}" => Ok(QubitState::Minus),
            other => Err(Error::Parse(format!("unknown qubit state {other:?}"))),
        }
    }
}

/// Position of a qubit inside a pair, written 1 or 2 on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    First,
    Second,
}

impl Position {
    pub fn number(self) -> u8 {
        match self {
            Position::First => 1,
            Position::Second => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Position> {
        match n {
            1 => Ok(Position::First),
            2 => Ok(Position::Second),
            other => Err(Error::Parse(format!(
                "pair position must be 1 or 2, got {other}"
            ))),
        }
    }

    pub fn other(self) -> Position {
        match self {
            Position::First => Position::Second,
            Position::Second => Position::First,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairState {
    pub first: QubitState,
    pub second: QubitState,
}

use QubitState::{Minus, One, Plus, Zero};

impl PairState {
    /// The eight encodings in their canonical order.
    pub const ALL: [PairState; 8] = [
        PairState::new(Zero, Plus),
        PairState::new(Zero, Minus),
        PairState::new(One, Plus),
        PairState::new(One, Minus),
        PairState::new(Plus, Zero),
        PairState::new(Minus, Zero),
        PairState::new(Plus, One),
        PairState::new(Minus, One),
    ];

    const fn new(first: QubitState, second: QubitState) -> PairState {
        PairState { first, second }
    }

    pub fn from_index(k: usize) -> Result<PairState> {
        PairState::ALL
            .get(k)
            .copied()
            .ok_or(Error::PairIndexOutOfRange(k))
    }

    pub fn index(self) -> usize {
        // Bijective: the Z qubit's position picks the half, its bit and the
        // X qubit's bit pick the slot.
        match (self.first.basis(), self.second.basis()) {
            (Basis::Z, _) => (self.first.bit() * 2 + self.second.bit()) as usize,
            _ => 4 + (self.second.bit() * 2 + self.first.bit()) as usize,
        }
    }

    pub fn qubit(self, position: Position) -> QubitState {
        match position {
            Position::First => self.first,
            Position::Second => self.second,
        }
    }

    /// Position of the qubit whose basis matches `basis`. Exactly one exists.
    pub fn matched_position(self, basis: Basis) -> Position {
        if self.first.basis() == basis {
            Position::First
        } else {
            Position::Second
        }
    }
}

impl fmt::Display for PairState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}{}>", self.first.symbol(), self.second.symbol())
    }
}

/// Ideal projective measurement. Deterministic when the bases agree,
/// a fair coin otherwise.
pub fn measure<R: Rng + ?Sized>(state: QubitState, basis: Basis, rng: &mut R) -> Bit {
    if state.basis() == basis {
        state.bit()
    } else {
        rng.random_range(0..2)
    }
}
