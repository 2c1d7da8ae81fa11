//! Peres lattices: per-eigenstate expectation values against scaled energy.

use std::fmt;

use crate::basis::{Basis, BasisState, BasisTag};
use crate::eigen::{diagonalize, SpectrumResult};
use crate::error::{Error, Result};
use crate::integrable::{bogoliubov_at, cdagc_from_moments};
use crate::model::{observable, spin_jx, Observable};
use crate::operator::SymmetricOperator;
use crate::params::ModelParams;

/// Which product basis carries the larger single-component weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dominance {
    XBasis,
    ZBasis,
}

impl Dominance {
    pub fn label(self) -> &'static str {
        match self {
            Dominance::XBasis => "x",
            Dominance::ZBasis => "z",
        }
    }
}

impl fmt::Display for Dominance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeresPoint {
    pub k: usize,
    /// `E_k / j`.
    pub epsilon: f64,
    pub value: f64,
    pub value_over_j: f64,
    pub value_over_j2: f64,
    pub dominance: Option<Dominance>,
}

impl PeresPoint {
    fn new(k: usize, energy: f64, value: f64, j: f64) -> Self {
        PeresPoint {
            k,
            epsilon: energy / j,
            value,
            value_over_j: value / j,
            value_over_j2: value / (j * j),
            dominance: None,
        }
    }
}

fn converged_range(result: &SpectrumResult) -> Result<usize> {
    let vecs = result.vectors()?;
    Ok(result.converged_count.min(vecs.count()))
}

/// `<E_k| op |E_k>` for every converged eigenstate.
pub fn peres_lattice(
    result: &SpectrumResult,
    op: &SymmetricOperator,
    params: &ModelParams,
) -> Result<Vec<PeresPoint>> {
    if op.tag() != result.tag || op.dim() != result.dim() {
        return Err(Error::BasisMismatch {
            spectrum: result.tag,
            operator: op.tag(),
        });
    }
    let count = converged_range(result)?;
    let vecs = result.vectors()?;
    let j = params.j();
    Ok((0..count)
        .map(|k| PeresPoint::new(k, result.energies[k], op.expectation(vecs.column(k)), j))
        .collect())
}

/// Builds the named observable in the spectrum's own basis and evaluates it.
pub fn observable_lattice(
    result: &SpectrumResult,
    which: Observable,
    params: &ModelParams,
) -> Result<Vec<PeresPoint>> {
    let sector = match result.tag {
        BasisTag::Full => None,
        BasisTag::Sector(s) => Some(s),
    };
    let op = observable(params, which, sector)?;
    peres_lattice(result, &op, params)
}

/// Lattice of `c^dag c`, with the squeezing parameter of each eigenstate
/// taken at its own `<J_x>` (zero inside a parity sector).
pub fn cdagc_lattice(result: &SpectrumResult, params: &ModelParams) -> Result<Vec<PeresPoint>> {
    params.require_normal_phase()?;
    let count = converged_range(result)?;
    let vecs = result.vectors()?;
    let basis = Basis::new(params, result.tag);
    if basis.len() != result.dim() {
        return Err(Error::BasisMismatch {
            spectrum: result.tag,
            operator: basis.tag,
        });
    }
    let number = observable(
        params,
        Observable::NumberOp,
        match result.tag {
            BasisTag::Full => None,
            BasisTag::Sector(s) => Some(s),
        },
    )?;
    let jx = match result.tag {
        BasisTag::Full => Some(observable(params, Observable::Jx, None)?),
        BasisTag::Sector(_) => None,
    };
    let j = params.j();
    (0..count)
        .map(|k| {
            let v = vecs.column(k);
            let mx = jx.as_ref().map_or(0.0, |op| op.expectation(v));
            let sigma = bogoliubov_at(params, mx)?.sigma;
            let value = cdagc_from_moments(sigma, number.expectation(v), a_squared(&basis, v));
            Ok(PeresPoint::new(k, result.energies[k], value, j))
        })
        .collect()
}

/// `<a^2>` for a real state expressed in `basis`.
fn a_squared(basis: &Basis, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, s) in basis.states.iter().enumerate() {
        if s.n < 2 {
            continue;
        }
        let lower = BasisState {
            n: s.n - 2,
            two_mz: s.two_mz,
        };
        if let Some(l) = basis.index_of(lower) {
            acc += v[l] * v[i] * ((s.n * (s.n - 1)) as f64).sqrt();
        }
    }
    acc
}

/// Labels every converged eigenstate by comparing its largest single-component
/// probability in the `(n, m_z)` basis with that in the `(n, m_x)` basis.
/// `XBasis` requires the x-basis maximum to exceed the z-basis maximum by more
/// than `threshold`; ties go to `ZBasis`.
pub fn dominance_classify(
    result: &SpectrumResult,
    params: &ModelParams,
    threshold: f64,
) -> Result<Vec<Dominance>> {
    let count = converged_range(result)?;
    let vecs = result.vectors()?;
    let basis = Basis::new(params, result.tag);
    if basis.len() != result.dim() {
        return Err(Error::BasisMismatch {
            spectrum: result.tag,
            operator: basis.tag,
        });
    }
    let spin_dim = params.spin_dim();
    let rotation = jx_eigenbasis(params.two_j)?;
    let two_j = params.two_j as i32;
    let mut block = vec![0.0; spin_dim];
    let mut labels = Vec::with_capacity(count);
    for k in 0..count {
        let v = vecs.column(k);
        let max_z = v.iter().map(|c| c * c).fold(0.0, f64::max);
        let mut max_x: f64 = 0.0;
        let mut i = 0;
        while i < basis.states.len() {
            let n = basis.states[i].n;
            block.iter_mut().for_each(|b| *b = 0.0);
            while i < basis.states.len() && basis.states[i].n == n {
                block[((basis.states[i].two_mz + two_j) / 2) as usize] = v[i];
                i += 1;
            }
            for col in &rotation {
                let amp: f64 = col.iter().zip(&block).map(|(a, b)| a * b).sum();
                max_x = max_x.max(amp * amp);
            }
        }
        labels.push(if max_x > max_z + threshold {
            Dominance::XBasis
        } else {
            Dominance::ZBasis
        });
    }
    Ok(labels)
}

/// Eigenvectors of the spin `J_x` in the `m_z` basis, one per `m_x`.
fn jx_eigenbasis(two_j: u32) -> Result<Vec<Vec<f64>>> {
    let op = SymmetricOperator::from_dense(&spin_jx(two_j), BasisTag::Full)?;
    let evd = diagonalize(&op)?;
    let vecs = evd.vectors()?;
    Ok((0..vecs.count()).map(|k| vecs.column(k).to_vec()).collect())
}

/// Attaches dominance labels to lattice points produced from the same spectrum.
pub fn with_dominance(points: &mut [PeresPoint], labels: &[Dominance]) {
    for p in points.iter_mut() {
        p.dominance = labels.get(p.k).copied();
    }
}

/// Pads sector eigenvector `k` with zeros to a full-basis vector.
pub fn full_basis_vector(
    result: &SpectrumResult,
    params: &ModelParams,
    k: usize,
) -> Result<Vec<f64>> {
    let basis = Basis::new(params, result.tag);
    let full = Basis::new(params, BasisTag::Full);
    let v = result.vectors()?.column(k);
    let mut out = vec![0.0; full.len()];
    for (i, s) in basis.states.iter().enumerate() {
        out[full
            .index_of(*s)
            .expect("sector state lies in the full basis")] = v[i];
    }
    Ok(out)
}
