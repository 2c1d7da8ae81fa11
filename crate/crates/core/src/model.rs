//! Matrix elements of the two-photon Dicke Hamiltonian and its observables
//! in the `|n; j, m_z>` basis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::{Basis, BasisState, BasisTag, ParitySector};
use crate::error::{Error, Result};
use crate::operator::{OperatorBuilder, SymmetricOperator};
use crate::params::ModelParams;

/// Ladder coefficient `C^+_{m} = sqrt(j(j+1) - m(m+1))` from doubled quantum numbers.
pub fn c_plus(two_j: u32, two_mz: i32) -> f64 {
    let tj = two_j as i64;
    let tm = two_mz as i64;
    0.5 * ((tj * (tj + 2) - tm * (tm + 2)) as f64).max(0.0).sqrt()
}

/// Ladder coefficient `C^-_{m} = sqrt(j(j+1) - m(m-1))`.
pub fn c_minus(two_j: u32, two_mz: i32) -> f64 {
    let tj = two_j as i64;
    let tm = two_mz as i64;
    0.5 * ((tj * (tj + 2) - tm * (tm - 2)) as f64).max(0.0).sqrt()
}

/// Two-photon matrix element `A_n = <n+2| a^dag^2 |n> = sqrt((n+1)(n+2))`.
pub fn two_photon_amplitude(n: usize) -> f64 {
    (((n + 1) * (n + 2)) as f64).sqrt()
}

fn basis_for(params: &ModelParams, sector: Option<ParitySector>) -> Basis {
    let tag = sector.map_or(BasisTag::Full, BasisTag::Sector);
    Basis::new(params, tag)
}

/// `H = w a^dag a + w0 J_z + (g/N)(a^dag^2 + a^2)(J_+ + J_-)`, optionally
/// restricted to one parity sector (the Hamiltonian never couples sectors).
pub fn hamiltonian(
    params: &ModelParams,
    sector: Option<ParitySector>,
) -> Result<SymmetricOperator> {
    params.validate()?;
    let basis = basis_for(params, sector);
    Ok(assemble_hamiltonian(params, &basis))
}

pub(crate) fn assemble_hamiltonian(params: &ModelParams, basis: &Basis) -> SymmetricOperator {
    let coupling = params.gamma / params.n_atoms();
    let two_j = params.two_j as i32;
    let mut b = OperatorBuilder::new(basis.len());
    for (i, s) in basis.states.iter().enumerate() {
        b.add(i, i, params.omega * s.n as f64 + params.omega0 * s.mz());
        if coupling == 0.0 || s.n + 2 > params.n_max {
            continue;
        }
        let a_n = two_photon_amplitude(s.n);
        for (dm, c) in [
            (2, c_plus(params.two_j, s.two_mz)),
            (-2, c_minus(params.two_j, s.two_mz)),
        ] {
            let two_mz = s.two_mz + dm;
            if two_mz.abs() > two_j {
                continue;
            }
            let target = BasisState { n: s.n + 2, two_mz };
            let k = basis
                .index_of(target)
                .expect("Hamiltonian coupled two parity sectors");
            b.add(i, k, coupling * a_n * c);
        }
    }
    b.build(basis.tag)
}

/// Observables available for expectation values and Peres lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    NumberOp,
    Jz,
    Jx,
    Jx2,
    JSquared,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::NumberOp => "n",
            Observable::Jz => "jz",
            Observable::Jx => "jx",
            Observable::Jx2 => "jx2",
            Observable::JSquared => "j2",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" | "number" | "ada" => Ok(Observable::NumberOp),
            "jz" => Ok(Observable::Jz),
            "jx" => Ok(Observable::Jx),
            "jx2" => Ok(Observable::Jx2),
            "j2" | "jsquared" => Ok(Observable::JSquared),
            other => Err(Error::InvalidArgument {
                name: "op",
                reason: format!("unknown observable `{other}`"),
            }),
        }
    }
}

fn jx_full(params: &ModelParams, basis: &Basis) -> SymmetricOperator {
    let two_j = params.two_j as i32;
    let mut b = OperatorBuilder::new(basis.len());
    for (i, s) in basis.states.iter().enumerate() {
        if s.two_mz + 2 <= two_j {
            let k = basis
                .index_of(BasisState {
                    n: s.n,
                    two_mz: s.two_mz + 2,
                })
                .expect("full basis contains every state");
            b.add(i, k, 0.5 * c_plus(params.two_j, s.two_mz));
        }
    }
    b.build(basis.tag)
}

/// Matrix of the named observable in the full basis or in one sector.
/// `Jx` changes parity, so asking for it inside a sector is an error.
pub fn observable(
    params: &ModelParams,
    which: Observable,
    sector: Option<ParitySector>,
) -> Result<SymmetricOperator> {
    params.validate()?;
    let basis = basis_for(params, sector);
    let diagonal = |f: &dyn Fn(&BasisState) -> f64| {
        let mut b = OperatorBuilder::new(basis.len());
        for (i, s) in basis.states.iter().enumerate() {
            b.add(i, i, f(s));
        }
        b.build(basis.tag)
    };
    let j = params.j();
    Ok(match which {
        Observable::NumberOp => diagonal(&|s| s.n as f64),
        Observable::Jz => diagonal(&|s| s.mz()),
        Observable::JSquared => diagonal(&|_| j * (j + 1.0)),
        Observable::Jx => {
            if sector.is_some() {
                return Err(Error::SectorMismatch);
            }
            jx_full(params, &basis)
        }
        Observable::Jx2 => {
            let full = Basis::new(params, BasisTag::Full);
            let sq = jx_full(params, &full).square();
            match sector {
                None => sq,
                Some(_) => {
                    let idx: Vec<usize> = basis
                        .states
                        .iter()
                        .map(|s| full.index_of(*s).unwrap())
                        .collect();
                    sq.restrict(&idx, basis.tag)
                }
            }
        }
    })
}

/// `H + epsilon J_x` in the full basis; the `J_x` term breaks parity.
pub fn perturbed_hamiltonian(params: &ModelParams, epsilon: f64) -> Result<SymmetricOperator> {
    if !epsilon.is_finite() {
        return Err(Error::InvalidArgument {
            name: "epsilon",
            reason: "must be finite".into(),
        });
    }
    let h = hamiltonian(params, None)?;
    if epsilon == 0.0 {
        return Ok(h);
    }
    h.add_scaled(&observable(params, Observable::Jx, None)?, epsilon)
}

/// Dense `(2j+1)`-dimensional `J_x` in the `m_z` basis (ascending `m_z`).
pub fn spin_jx(two_j: u32) -> Vec<Vec<f64>> {
    let d = two_j as usize + 1;
    let mut m = vec![vec![0.0; d]; d];
    for k in 0..d - 1 {
        let two_mz = -(two_j as i32) + 2 * k as i32;
        let v = 0.5 * c_plus(two_j, two_mz);
        m[k][k + 1] = v;
        m[k + 1][k] = v;
    }
    m
}
