//! Zero-splitting (`omega0 = 0`) limit.
//!
//! Each `J_x` eigenvalue `m_x` carries an independent squeezed oscillator
//! `Omega_{m_x} (c^dag c + 1/2) - omega/2` with
//! `lambda = 2 gamma m_x / (omega N)` and `Omega = omega sqrt(1 - 4 lambda^2)`.
//! All functions here ignore `params.omega0`.

use crate::basis::BasisTag;
use crate::eigen::SpectrumResult;
use crate::error::{Error, Result};
use crate::operator::{OperatorBuilder, SymmetricOperator};
use crate::params::ModelParams;

/// Samples per continuous overlay curve.
pub const OVERLAY_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovData {
    pub m_x: f64,
    pub lambda: f64,
    /// Oscillator frequency `Omega_{m_x}`.
    pub frequency: f64,
    /// Squeezing parameter (positive-root branch).
    pub sigma: f64,
}

fn check_two_mx(params: &ModelParams, two_mx: i32) -> Result<()> {
    let two_j = params.two_j as i32;
    if two_mx.abs() > two_j || (two_mx + two_j) % 2 != 0 {
        return Err(Error::InvalidArgument {
            name: "two_mx",
            reason: format!("2 m_x = {two_mx} is not a projection of 2j = {two_j}"),
        });
    }
    Ok(())
}

pub fn bogoliubov(params: &ModelParams, two_mx: i32) -> Result<BogoliubovData> {
    params.validate()?;
    check_two_mx(params, two_mx)?;
    bogoliubov_at(params, 0.5 * two_mx as f64)
}

/// Same as [`bogoliubov`] but for a continuous `m_x` (overlay curves and
/// per-eigenstate `sigma` at `<J_x>`).
pub fn bogoliubov_at(params: &ModelParams, m_x: f64) -> Result<BogoliubovData> {
    let lambda = 2.0 * params.gamma * m_x / (params.omega * params.n_atoms());
    if lambda.abs() >= 0.5 {
        return Err(Error::SpectralCollapse {
            lambda: lambda.abs(),
            gamma_collapse: params.j() * params.omega / (2.0 * m_x.abs()),
        });
    }
    let root = (1.0 - 4.0 * lambda * lambda).sqrt();
    Ok(BogoliubovData {
        m_x,
        lambda,
        frequency: params.omega * root,
        // (root - 1) / (2 lambda), rewritten without the cancellation at small lambda.
        sigma: -2.0 * lambda / (1.0 + root),
    })
}

/// Coupling at which the `m_x` oscillator collapses, `j omega / (2 |m_x|)`.
pub fn gamma_collapse(params: &ModelParams, two_mx: i32) -> Result<f64> {
    params.validate()?;
    check_two_mx(params, two_mx)?;
    if two_mx == 0 {
        return Err(Error::Unbounded);
    }
    Ok(params.j() * params.omega / (two_mx.abs() as f64 * 0.5 * 2.0))
}

pub fn analytic_energy(params: &ModelParams, n_c: usize, two_mx: i32) -> Result<f64> {
    let b = bogoliubov(params, two_mx)?;
    Ok(b.frequency * (n_c as f64 + 0.5) - 0.5 * params.omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticLevel {
    pub n_c: usize,
    pub two_mx: i32,
    pub energy: f64,
}

/// Every `(n_c <= n_c_max, m_x)` level, sorted by energy.
pub fn analytic_spectrum(params: &ModelParams, n_c_max: usize) -> Result<Vec<AnalyticLevel>> {
    params.require_normal_phase()?;
    let two_j = params.two_j as i32;
    let mut levels = Vec::with_capacity((n_c_max + 1) * params.spin_dim());
    for two_mx in (-two_j..=two_j).step_by(2) {
        for n_c in 0..=n_c_max {
            levels.push(AnalyticLevel {
                n_c,
                two_mx,
                energy: analytic_energy(params, n_c, two_mx)?,
            });
        }
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.two_mx.cmp(&b.two_mx)));
    Ok(levels)
}

/// One sample of an analytic overlay curve.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayPoint {
    pub curve_id: String,
    pub n_c: usize,
    /// `m_x` for `mx` curves, `m_x^2` for `mx2` curves.
    pub abscissa: f64,
    /// Scaled energy `E / j`.
    pub epsilon: f64,
}

/// Continuous-`m_x` curves at fixed `n_c`: one family over `m_x in [-j, j]`
/// and one over `m_x^2 in [0, j^2]` (for the `J_x^2` lattice).
pub fn overlay_curves(
    params: &ModelParams,
    n_c_max: usize,
    samples: usize,
) -> Result<Vec<OverlayPoint>> {
    params.require_normal_phase()?;
    let samples = samples.max(2);
    let j = params.j();
    let mut out = Vec::with_capacity(2 * (n_c_max + 1) * samples);
    for n_c in 0..=n_c_max {
        for i in 0..samples {
            let m_x = -j + 2.0 * j * i as f64 / (samples - 1) as f64;
            let b = bogoliubov_at(params, m_x)?;
            out.push(OverlayPoint {
                curve_id: format!("mx_nc{n_c}"),
                n_c,
                abscissa: m_x,
                epsilon: (b.frequency * (n_c as f64 + 0.5) - 0.5 * params.omega) / j,
            });
        }
        for i in 0..samples {
            let m_x2 = j * j * i as f64 / (samples - 1) as f64;
            let b = bogoliubov_at(params, m_x2.sqrt())?;
            out.push(OverlayPoint {
                curve_id: format!("mx2_nc{n_c}"),
                n_c,
                abscissa: m_x2,
                epsilon: (b.frequency * (n_c as f64 + 0.5) - 0.5 * params.omega) / j,
            });
        }
    }
    Ok(out)
}

/// `c^dag c = [(1 + s^2) a^dag a - s (a^dag^2 + a^2) + s^2] / (1 - s^2)` on the
/// Fock states `0..=n_max`, where `c = (a - s a^dag) / sqrt(1 - s^2)`.
pub fn cdagc_operator(sigma: f64, n_max: usize) -> Result<SymmetricOperator> {
    if !(sigma.abs() < 1.0) {
        return Err(Error::InvalidArgument {
            name: "sigma",
            reason: format!("|sigma| = {} must be < 1", sigma.abs()),
        });
    }
    let norm = 1.0 - sigma * sigma;
    let mut b = OperatorBuilder::new(n_max + 1);
    for n in 0..=n_max {
        b.add(
            n,
            n,
            ((1.0 + sigma * sigma) * n as f64 + sigma * sigma) / norm,
        );
        if n + 2 <= n_max {
            let a2 = (((n + 1) * (n + 2)) as f64).sqrt();
            b.add(n, n + 2, -sigma * a2 / norm);
        }
    }
    Ok(b.build(BasisTag::Full))
}

/// `<c^dag c>` from the photon moments `<a^dag a>` and `<a^2>` (real states).
pub fn cdagc_from_moments(sigma: f64, number: f64, a_squared: f64) -> f64 {
    let s2 = sigma * sigma;
    ((1.0 + s2) * number - 2.0 * sigma * a_squared + s2) / (1.0 - s2)
}

/// Outcome of pairing numerical levels with the analytic zero-splitting set.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// Number of numerical levels compared.
    pub compared: usize,
    /// Largest `|E_num - E_an| / max(1, |E_an|)` over the pairing.
    pub max_rel_deviation: f64,
    /// Index (into the sorted numerical list) where the largest deviation occurs.
    pub worst_index: usize,
    /// Lowest of the per-sector last converged energies; every analytic
    /// level below it must have a numerical partner.
    pub completeness_cut: f64,
    /// Analytic levels below the cut left without a partner.
    pub unmatched_below_cut: usize,
    /// Numerical levels whose nearest free analytic level was already taken
    /// beyond `tolerance` (a non-injective pairing).
    pub pairing_conflicts: usize,
}

/// Pairs each converged level of `spectra` with a distinct analytic level,
/// nearest first. `tolerance` is the relative deviation that counts as a match
/// when assessing completeness and conflicts.
pub fn compare_with_analytic(
    params: &ModelParams,
    spectra: &[SpectrumResult],
    tolerance: f64,
) -> Result<EquivalenceReport> {
    params.require_normal_phase()?;
    let mut numeric: Vec<f64> = spectra
        .iter()
        .flat_map(|s| s.converged_energies().iter().copied())
        .collect();
    numeric.sort_by(f64::total_cmp);
    // Truncated levels bound the exact ones from above, so within a sector
    // every exact level up to the last converged one has been found.
    let completeness_cut = spectra
        .iter()
        .map(|s| {
            s.converged_energies()
                .last()
                .copied()
                .unwrap_or(f64::NEG_INFINITY)
        })
        .fold(f64::INFINITY, f64::min);

    let e_top = numeric
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(completeness_cut.min(1e300));
    let lam_max = params.gamma / params.omega;
    let freq_min = params.omega * (1.0 - 4.0 * lam_max * lam_max).sqrt();
    let n_c_max = ((e_top.max(0.0) + params.omega) / freq_min).ceil() as usize + 2;
    let analytic: Vec<f64> = analytic_spectrum(params, n_c_max)?
        .into_iter()
        .map(|l| l.energy)
        .collect();

    let rel = |num: f64, an: f64| (num - an).abs() / an.abs().max(1.0);
    let mut used = vec![false; analytic.len()];
    let mut max_rel_deviation = 0.0;
    let mut worst_index = 0;
    let mut pairing_conflicts = 0;
    for (k, &e) in numeric.iter().enumerate() {
        let pos = analytic.partition_point(|&a| a < e);
        // Nearest unused analytic level, scanning outward.
        let mut best: Option<usize> = None;
        let (mut lo, mut hi) = (pos as isize - 1, pos);
        loop {
            let cand_lo = (lo >= 0).then_some(lo as usize);
            let cand_hi = (hi < analytic.len()).then_some(hi);
            if cand_lo.is_none() && cand_hi.is_none() {
                break;
            }
            let d_lo = cand_lo.map_or(f64::INFINITY, |i| (analytic[i] - e).abs());
            let d_hi = cand_hi.map_or(f64::INFINITY, |i| (analytic[i] - e).abs());
            if let Some(b) = best {
                if (analytic[b] - e).abs() <= d_lo.min(d_hi) {
                    break;
                }
            }
            if d_lo <= d_hi {
                let i = cand_lo.unwrap();
                if !used[i] && best.is_none_or(|b| d_lo < (analytic[b] - e).abs()) {
                    best = Some(i);
                }
                lo -= 1;
            } else {
                let i = cand_hi.unwrap();
                if !used[i] && best.is_none_or(|b| d_hi < (analytic[b] - e).abs()) {
                    best = Some(i);
                }
                hi += 1;
            }
        }
        let Some(b) = best else {
            pairing_conflicts += 1;
            continue;
        };
        used[b] = true;
        let d = rel(e, analytic[b]);
        if d > tolerance {
            // Was there a closer analytic level already claimed?
            let nearest = analytic
                .get(pos)
                .into_iter()
                .chain(pos.checked_sub(1).and_then(|p| analytic.get(p)))
                .any(|&a| rel(e, a) <= tolerance);
            if nearest {
                pairing_conflicts += 1;
            }
        }
        if d > max_rel_deviation {
            max_rel_deviation = d;
            worst_index = k;
        }
    }
    let guard = completeness_cut - tolerance * completeness_cut.abs().max(1.0);
    let unmatched_below_cut = analytic
        .iter()
        .zip(&used)
        .filter(|(&a, &u)| a < guard && !u)
        .count();

    Ok(EquivalenceReport {
        compared: numeric.len(),
        max_rel_deviation,
        worst_index,
        completeness_cut,
        unmatched_below_cut,
        pairing_conflicts,
    })
}
