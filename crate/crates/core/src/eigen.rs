//! Dense symmetric diagonalization with the truncation-convergence filter.
//!
//! Eigenpairs come back sorted by ascending energy. Each eigenvector's sign
//! is fixed so that its largest-magnitude coefficient is positive, which
//! makes vector dumps reproducible across runs.

use faer::Side;

use crate::basis::{Basis, BasisTag, ParitySector};
use crate::error::{Error, Result};
use crate::model::{hamiltonian, perturbed_hamiltonian};
use crate::operator::SymmetricOperator;
use crate::params::ModelParams;

/// Tail-weight tolerance used when none is given.
pub const DEFAULT_DELTA: f64 = 1e-6;

/// Column-major eigenvector storage; column `k` belongs to energy `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvectors {
    dim: usize,
    data: Vec<f64>,
}

impl Eigenvectors {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    fn truncate(&mut self, count: usize) {
        self.data.truncate(count * self.dim);
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub tag: BasisTag,
    pub energies: Vec<f64>,
    pub vectors: Option<Eigenvectors>,
    /// Number of leading eigenstates that pass the convergence test.
    pub converged_count: usize,
    /// Present when the spectrum came from a model Hamiltonian.
    pub params: Option<ModelParams>,
}

impl SpectrumResult {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn converged_energies(&self) -> &[f64] {
        &self.energies[..self.converged_count]
    }

    pub fn vectors(&self) -> Result<&Eigenvectors> {
        self.vectors.as_ref().ok_or(Error::MissingVectors)
    }

    pub fn with_params(mut self, params: ModelParams) -> Self {
        self.params = Some(params);
        self
    }

    fn params(&self) -> Result<&ModelParams> {
        self.params.as_ref().ok_or_else(|| Error::InvalidArgument {
            name: "spectrum",
            reason: "spectrum carries no model parameters".into(),
        })
    }

    pub fn basis(&self) -> Result<Basis> {
        let b = Basis::new(self.params()?, self.tag);
        if b.len() != self.dim() {
            return Err(Error::InvalidArgument {
                name: "spectrum",
                reason: format!(
                    "dimension {} does not match basis size {}",
                    self.dim(),
                    b.len()
                ),
            });
        }
        Ok(b)
    }

    /// Recomputes and stores the converged count for tolerance `delta`.
    pub fn apply_convergence(&mut self, delta: f64) -> Result<usize> {
        let k = converged_count(self, delta)?;
        self.converged_count = k;
        Ok(k)
    }

    /// Drops eigenvectors past the converged prefix to save memory.
    pub fn keep_converged_vectors_only(&mut self) {
        let k = self.converged_count;
        if let Some(v) = self.vectors.as_mut() {
            v.truncate(k);
        }
    }
}

/// Full eigendecomposition of a symmetric operator.
pub fn diagonalize(matrix: &SymmetricOperator) -> Result<SpectrumResult> {
    decompose(matrix, true)
}

/// Eigenvalues only; `vectors` is `None`.
pub fn eigenvalues(matrix: &SymmetricOperator) -> Result<SpectrumResult> {
    decompose(matrix, false)
}

fn decompose(matrix: &SymmetricOperator, with_vectors: bool) -> Result<SpectrumResult> {
    if !matrix.is_finite() {
        return Err(Error::NumericalFailure(
            "matrix has non-finite entries".into(),
        ));
    }
    let n = matrix.dim();
    if n == 0 {
        return Ok(SpectrumResult {
            tag: matrix.tag(),
            energies: Vec::new(),
            vectors: with_vectors.then(|| Eigenvectors {
                dim: 0,
                data: Vec::new(),
            }),
            converged_count: 0,
            params: None,
        });
    }
    let dense = matrix.to_dense();
    let (energies, vectors) = if with_vectors {
        let evd = dense
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::NumericalFailure(format!("eigensolver did not converge: {e:?}")))?;
        drop(dense);
        let s = evd.S().column_vector();
        let u = evd.U();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
        let mut energies = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * n);
        for &k in &order {
            energies.push(s[k]);
            let start = data.len();
            data.extend((0..n).map(|i| u[(i, k)]));
            fix_phase(&mut data[start..]);
        }
        (energies, Some(Eigenvectors { dim: n, data }))
    } else {
        let mut e = dense
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::NumericalFailure(format!("eigensolver did not converge: {e:?}")))?;
        e.sort_by(f64::total_cmp);
        (e, None)
    };
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    Ok(SpectrumResult {
        tag: matrix.tag(),
        converged_count: energies.len(),
        energies,
        vectors,
        params: None,
    })
}

fn fix_phase(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Photon-number distribution `P_n = sum_{m_z} |c_{n, m_z}|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    pub probs: Vec<f64>,
}

impl PhotonDistribution {
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

pub fn photon_distribution(result: &SpectrumResult, k: usize) -> Result<PhotonDistribution> {
    let vectors = result.vectors()?;
    if k >= vectors.count() {
        return Err(Error::InvalidArgument {
            name: "k",
            reason: format!("eigenstate {k} out of range ({} stored)", vectors.count()),
        });
    }
    let basis = result.basis()?;
    Ok(distribution_from(&basis, vectors.column(k)))
}

fn distribution_from(basis: &Basis, v: &[f64]) -> PhotonDistribution {
    let mut probs = vec![0.0; basis.n_max + 1];
    for (s, c) in basis.states.iter().zip(v) {
        probs[s.n] += c * c;
    }
    PhotonDistribution { probs }
}

/// Index of the lowest-energy eigenstate whose weight on the two highest
/// photon numbers exceeds `delta`; every state below it passes.
pub fn converged_count(result: &SpectrumResult, delta: f64) -> Result<usize> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument {
            name: "delta",
            reason: "must be > 0".into(),
        });
    }
    let vectors = result.vectors()?;
    let basis = result.basis()?;
    let n_max = basis.n_max;
    let tail: Vec<usize> = basis
        .states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.n + 1 >= n_max)
        .map(|(i, _)| i)
        .collect();
    for k in 0..vectors.count() {
        let v = vectors.column(k);
        let weight: f64 = tail.iter().map(|&i| v[i] * v[i]).sum();
        if weight > delta {
            return Ok(k);
        }
    }
    Ok(vectors.count())
}

/// Diagonalizes the Hamiltonian in one sector (or the full basis) and applies
/// the convergence filter.
pub fn solve(
    params: &ModelParams,
    sector: Option<ParitySector>,
    delta: f64,
) -> Result<SpectrumResult> {
    let h = hamiltonian(params, sector)?;
    let mut r = diagonalize(&h)?.with_params(*params);
    r.apply_convergence(delta)?;
    Ok(r)
}

/// Full-basis spectrum of `H + epsilon J_x`.
pub fn solve_perturbed(params: &ModelParams, epsilon: f64, delta: f64) -> Result<SpectrumResult> {
    let h = perturbed_hamiltonian(params, epsilon)?;
    let mut r = diagonalize(&h)?.with_params(*params);
    r.apply_convergence(delta)?;
    Ok(r)
}

/// All four parity sectors, in `ParitySector::ALL` order.
pub fn solve_all_sectors(params: &ModelParams, delta: f64) -> Result<Vec<SpectrumResult>> {
    ParitySector::ALL
        .iter()
        .map(|&s| solve(params, Some(s), delta))
        .collect()
}
