//! Product basis `|n; j, m_z>` and its four-fold parity decomposition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// A Fock-times-Dicke product state, with the spin projection stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub n: usize,
    pub two_mz: i32,
}

impl BasisState {
    pub fn mz(&self) -> f64 {
        0.5 * self.two_mz as f64
    }
}

/// Eigenvalue class of the parity operator `exp(i pi (a^dag a / 2 + J_z + j))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParitySector {
    Plus1,
    PlusI,
    Minus1,
    MinusI,
}

impl ParitySector {
    pub const ALL: [ParitySector; 4] = [
        ParitySector::Plus1,
        ParitySector::PlusI,
        ParitySector::Minus1,
        ParitySector::MinusI,
    ];

    /// `(n + 2 m_z + 2j) mod 4`; the parity eigenvalue is `i^residue`.
    pub fn residue(self) -> u32 {
        match self {
            ParitySector::Plus1 => 0,
            ParitySector::PlusI => 1,
            ParitySector::Minus1 => 2,
            ParitySector::MinusI => 3,
        }
    }

    pub fn from_residue(residue: u32) -> Self {
        match residue % 4 {
            0 => ParitySector::Plus1,
            1 => ParitySector::PlusI,
            2 => ParitySector::Minus1,
            _ => ParitySector::MinusI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ParitySector::Plus1 => "+1",
            ParitySector::PlusI => "+i",
            ParitySector::Minus1 => "-1",
            ParitySector::MinusI => "-i",
        }
    }
}

impl fmt::Display for ParitySector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ParitySector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" | "p1" | "plus1" => Ok(ParitySector::Plus1),
            "-1" | "m1" | "minus1" => Ok(ParitySector::Minus1),
            "+i" | "i" | "pi" | "plusi" => Ok(ParitySector::PlusI),
            "-i" | "mi" | "minusi" => Ok(ParitySector::MinusI),
            other => Err(Error::InvalidArgument {
                name: "sector",
                reason: format!("unknown parity sector `{other}` (expected +1, -1, +i, -i)"),
            }),
        }
    }
}

/// Which basis an operator or spectrum lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisTag {
    Full,
    Sector(ParitySector),
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisTag::Full => f.write_str("full"),
            BasisTag::Sector(s) => write!(f, "{s}"),
        }
    }
}

/// All `(n_max + 1)(2j + 1)` product states, `n` outer and `m_z` inner (ascending).
pub fn build_basis(params: &ModelParams) -> Vec<BasisState> {
    let two_j = params.two_j as i32;
    (0..=params.n_max)
        .flat_map(|n| {
            (-two_j..=two_j)
                .step_by(2)
                .map(move |two_mz| BasisState { n, two_mz })
        })
        .collect()
}

pub fn parity_class(state: BasisState, params: &ModelParams) -> ParitySector {
    let shifted = (state.two_mz + params.two_j as i32) as usize;
    ParitySector::from_residue(((state.n + shifted) % 4) as u32)
}

/// An ordered basis (full or one parity sector) with reverse lookup.
#[derive(Debug, Clone)]
pub struct Basis {
    pub tag: BasisTag,
    pub two_j: u32,
    pub n_max: usize,
    pub states: Vec<BasisState>,
    /// Position of each full-basis state inside `states`.
    lookup: Vec<Option<usize>>,
}

impl Basis {
    pub fn new(params: &ModelParams, tag: BasisTag) -> Self {
        let full = build_basis(params);
        let mut lookup = vec![None; full.len()];
        let mut states = Vec::new();
        for (i, s) in full.into_iter().enumerate() {
            let keep = match tag {
                BasisTag::Full => true,
                BasisTag::Sector(sector) => parity_class(s, params) == sector,
            };
            if keep {
                lookup[i] = Some(states.len());
                states.push(s);
            }
        }
        Basis {
            tag,
            two_j: params.two_j,
            n_max: params.n_max,
            states,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of `state` in the full basis.
    pub fn full_index(&self, state: BasisState) -> Option<usize> {
        let two_j = self.two_j as i32;
        if state.n > self.n_max || state.two_mz.abs() > two_j || (state.two_mz + two_j) % 2 != 0 {
            return None;
        }
        Some(state.n * (self.two_j as usize + 1) + ((state.two_mz + two_j) / 2) as usize)
    }

    pub fn index_of(&self, state: BasisState) -> Option<usize> {
        self.full_index(state).and_then(|i| self.lookup[i])
    }
}
