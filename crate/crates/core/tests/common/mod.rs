//! Property checks shared by the proptest suite and the acceptance harness.
//!
//! Every check returns `Err(description)` on the first violation so callers
//! can either assert or tally.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twophoton_core::classical::{
    self, gradient, h_classical, q_plus, ClassicalState, ShellSampling,
};
use twophoton_core::eigen::{photon_distribution, solve, solve_all_sectors};
use twophoton_core::integrable::{bogoliubov, cdagc_operator, compare_with_analytic};
use twophoton_core::model::observable;
use twophoton_core::peres::{dominance_classify, full_basis_vector, observable_lattice, Dominance};
use twophoton_core::stats::{
    average_curves, goe_pdf, poisson_pdf, ratio_sequence, sample_goe_spectrum,
    sample_poisson_spectrum, unfold, windowed_mean_ratio,
};
use twophoton_core::{
    build_basis, eigenvalues, hamiltonian, parity_class, Basis, BasisState, BasisTag, Error,
    ModelParams, Observable, ParitySector, SymmetricOperator, Tolerances,
};

pub type Check = Result<(), String>;

/// Tail tolerance for checks that compare eigenvalues at the 1e-8 level.
pub const STRICT_DELTA: f64 = 1e-12;

/// `(2j, n_max)` grid every quantum draw is evaluated on.
pub const SIZES: [(u32, usize); 6] = [(1, 20), (1, 200), (2, 20), (2, 200), (10, 20), (10, 200)];

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail(e: Error) -> String {
    e.to_string()
}

/// Normal-phase parameters from three unit-interval numbers.
pub fn params_from_unit(u: [f64; 3], two_j: u32, n_max: usize) -> ModelParams {
    let omega = 0.5 + 1.5 * u[0];
    let omega0 = 0.05 + 1.95 * u[1];
    let gamma = omega * (0.02 + 0.43 * u[2]);
    ModelParams::new(omega, omega0, gamma, two_j, n_max).unwrap()
}

pub fn seeded_units(seed: u64) -> [f64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [rng.random(), rng.random(), rng.random()]
}

// ---------------------------------------------------------------------------
// Sparse helpers.

/// Row lists of a symmetric operator (both triangles).
pub fn rows_of(op: &SymmetricOperator) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); op.dim()];
    for &(i, j, v) in op.upper_entries() {
        rows[i].push((j, v));
        if i != j {
            rows[j].push((i, v));
        }
    }
    rows
}

fn product(a: &[Vec<(usize, f64)>], b: &[Vec<(usize, f64)>]) -> Vec<BTreeMap<usize, f64>> {
    a.iter()
        .map(|row| {
            let mut acc = BTreeMap::new();
            for &(k, x) in row {
                for &(j, y) in &b[k] {
                    *acc.entry(j).or_insert(0.0) += x * y;
                }
            }
            acc
        })
        .collect()
}

/// `max |(AB - BA)_ij|`.
pub fn commutator_max(a: &[Vec<(usize, f64)>], b: &[Vec<(usize, f64)>]) -> f64 {
    let ab = product(a, b);
    let ba = product(b, a);
    let mut worst: f64 = 0.0;
    for (r1, r2) in ab.iter().zip(&ba) {
        for (j, x) in r1 {
            worst = worst.max((x - r2.get(j).copied().unwrap_or(0.0)).abs());
        }
        for (j, y) in r2 {
            if !r1.contains_key(j) {
                worst = worst.max(y.abs());
            }
        }
    }
    worst
}

fn max_abs(rows: &[Vec<(usize, f64)>]) -> f64 {
    rows.iter().flatten().fold(0.0, |m, &(_, v)| m.max(v.abs()))
}

fn diagonal_rows(values: impl Iterator<Item = f64>) -> Vec<Vec<(usize, f64)>> {
    values.enumerate().map(|(i, v)| vec![(i, v)]).collect()
}

// ---------------------------------------------------------------------------
// Independent matrix elements.

fn ladder(two_j: u32, two_m: i32, up: bool) -> f64 {
    let j = 0.5 * two_j as f64;
    let m = 0.5 * two_m as f64;
    let s = if up { 1.0 } else { -1.0 };
    (j * (j + 1.0) - m * (m + s)).max(0.0).sqrt()
}

/// `<n', m'| H |n, m>` written out directly from the Hamiltonian.
pub fn oracle_element(p: &ModelParams, a: BasisState, b: BasisState) -> f64 {
    let g = p.gamma / p.two_j as f64;
    if a == b {
        return p.omega * a.n as f64 + p.omega0 * a.mz();
    }
    let (lo, hi) = if a.n < b.n { (a, b) } else { (b, a) };
    if hi.n != lo.n + 2 || (hi.two_mz - lo.two_mz).abs() != 2 {
        return 0.0;
    }
    let photons = (((lo.n + 1) * (lo.n + 2)) as f64).sqrt();
    let spin = ladder(p.two_j, lo.two_mz, hi.two_mz > lo.two_mz);
    g * photons * spin
}

/// `J_y^2` in the `m_z` basis of one `n`, built from `J_y = (J_+ - J_-)/2i`.
fn jy2_entry(two_j: u32, a: BasisState, b: BasisState) -> f64 {
    if a.n != b.n {
        return 0.0;
    }
    let j = 0.5 * two_j as f64;
    if a.two_mz == b.two_mz {
        let m = a.mz();
        return 0.5 * (j * (j + 1.0) - m * m);
    }
    let (lo, hi) = if a.two_mz < b.two_mz { (a, b) } else { (b, a) };
    if hi.two_mz - lo.two_mz != 4 {
        return 0.0;
    }
    -0.25 * ladder(two_j, lo.two_mz, true) * ladder(two_j, lo.two_mz + 2, true)
}

// ---------------------------------------------------------------------------
// model-core

pub fn params_validation(_: &ModelParams) -> Check {
    let bad = [
        ModelParams::new(0.0, 1.0, 0.1, 2, 10),
        ModelParams::new(-1.0, 1.0, 0.1, 2, 10),
        ModelParams::new(1.0, f64::NAN, 0.1, 2, 10),
        ModelParams::new(1.0, 1.0, -0.1, 2, 10),
        ModelParams::new(1.0, 1.0, 0.1, 0, 10),
        ModelParams::new(1.0, 1.0, 0.1, 2, 1),
    ];
    ensure(bad.iter().all(|r| r.is_err()), || {
        "invalid parameters accepted".into()
    })?;
    let collapsed = ModelParams::new(1.0, 1.0, 0.5, 2, 10).unwrap();
    ensure(collapsed.require_normal_phase().is_err(), || {
        "gamma = omega/2 passed the normal-phase gate".into()
    })
}

pub fn basis_enumeration(p: &ModelParams) -> Check {
    let states = build_basis(p);
    let d = p.two_j as usize + 1;
    ensure(states.len() == (p.n_max + 1) * d, || {
        format!("basis size {}", states.len())
    })?;
    for (i, s) in states.iter().enumerate() {
        let want = BasisState {
            n: i / d,
            two_mz: -(p.two_j as i32) + 2 * (i % d) as i32,
        };
        ensure(*s == want, || {
            format!("state {i} is {s:?}, expected {want:?}")
        })?;
    }
    Ok(())
}

pub fn sector_partition(p: &ModelParams) -> Check {
    let states = build_basis(p);
    let mut seen = vec![0usize; states.len()];
    for sector in ParitySector::ALL {
        ensure(
            ParitySector::from_residue(sector.residue()) == sector,
            || format!("residue map broken for {sector}"),
        )?;
        let basis = Basis::new(p, BasisTag::Sector(sector));
        for s in &basis.states {
            let residue = (s.n as i64 + s.two_mz as i64 + p.two_j as i64).rem_euclid(4) as u32;
            ensure(residue == sector.residue(), || {
                format!("{s:?} filed under {sector}")
            })?;
            seen[basis.full_index(*s).unwrap()] += 1;
        }
    }
    ensure(seen.iter().all(|&c| c == 1), || {
        "sectors do not partition the basis".into()
    })
}

pub fn sector_closure(p: &ModelParams) -> Check {
    let h = hamiltonian(p, None).map_err(fail)?;
    let states = build_basis(p);
    for &(i, j, v) in h.upper_entries() {
        if v != 0.0 {
            let (a, b) = (states[i], states[j]);
            ensure(parity_class(a, p) == parity_class(b, p), || {
                format!("H couples {a:?} and {b:?}")
            })?;
        }
    }
    Ok(())
}

/// Entries agree with the independent formula, are finite, and the stored
/// matrix equals its transpose.
pub fn hermiticity(p: &ModelParams) -> Check {
    let h = hamiltonian(p, None).map_err(fail)?;
    ensure(h.is_finite(), || "non-finite entry".into())?;
    let states = build_basis(p);
    let mut stored = BTreeMap::new();
    for &(i, j, v) in h.upper_entries() {
        stored.insert((i, j), v);
        let want = oracle_element(p, states[i], states[j]);
        ensure((v - want).abs() <= 1e-13 * want.abs().max(1.0), || {
            format!("H[{i},{j}] = {v}, expected {want}")
        })?;
        ensure(h.get(i, j) == h.get(j, i), || {
            format!("H[{i},{j}] != H[{j},{i}]")
        })?;
    }
    // Every nonzero of the formula must be present.
    for (i, a) in states.iter().enumerate() {
        for dn in [0usize, 2] {
            for dm in [-2i32, 0, 2] {
                let b = BasisState {
                    n: a.n + dn,
                    two_mz: a.two_mz + dm,
                };
                if b.n > p.n_max || b.two_mz.abs() > p.two_j as i32 {
                    continue;
                }
                let j = b.n * (p.two_j as usize + 1) + ((b.two_mz + p.two_j as i32) / 2) as usize;
                let want = oracle_element(p, *a, b);
                if want != 0.0 && i <= j {
                    ensure(stored.contains_key(&(i, j)), || {
                        format!("missing entry H[{i},{j}]")
                    })?;
                }
            }
        }
    }
    Ok(())
}

pub fn bandwidth(p: &ModelParams) -> Check {
    let h = hamiltonian(p, None).map_err(fail)?;
    let states = build_basis(p);
    for &(i, j, v) in h.upper_entries() {
        let (a, b) = (states[i], states[j]);
        let dn = a.n.abs_diff(b.n);
        let dm = (a.two_mz - b.two_mz).abs();
        ensure(
            v == 0.0 || ((dn == 0 || dn == 2) && (dm == 0 || dm == 2)),
            || format!("entry outside stencil between {a:?} and {b:?}"),
        )?;
    }
    Ok(())
}

pub fn commutation(p: &ModelParams) -> Check {
    let h = hamiltonian(p, None).map_err(fail)?;
    let rows = rows_of(&h);
    let states = build_basis(p);
    let j2 = observable(p, Observable::JSquared, None).map_err(fail)?;
    let c = commutator_max(&rows, &rows_of(&j2));
    ensure(c == 0.0, || format!("[H, J^2] = {c:e}"))?;
    for sector in ParitySector::ALL {
        let proj = diagonal_rows(
            states
                .iter()
                .map(|s| (parity_class(*s, p) == sector) as u8 as f64),
        );
        let c = commutator_max(&rows, &proj);
        ensure(c == 0.0, || format!("[H, P_{sector}] = {c:e}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// eigensolve

pub fn spectrum_shape(p: &ModelParams) -> Check {
    for r in solve_all_sectors(p, twophoton_core::DEFAULT_DELTA).map_err(fail)? {
        ensure(r.energies.windows(2).all(|w| w[0] <= w[1]), || {
            format!("{} energies unsorted", r.tag)
        })?;
        ensure(r.converged_count <= r.dim(), || {
            "converged_count exceeds dim".into()
        })?;
        for k in 0..r.dim() {
            let dist = photon_distribution(&r, k).map_err(fail)?;
            let total: f64 = dist.probs.iter().sum();
            ensure(dist.probs.iter().all(|&x| x >= 0.0), || {
                "negative photon probability".into()
            })?;
            ensure((total - 1.0).abs() <= 1e-10, || {
                format!("state {k}: photon weights sum to {total}")
            })?;
        }
    }
    Ok(())
}

pub fn orthonormality(p: &ModelParams) -> Check {
    for r in solve_all_sectors(p, twophoton_core::DEFAULT_DELTA).map_err(fail)? {
        let v = r.vectors().map_err(fail)?;
        let n = v.count();
        for a in 0..n {
            let ca = v.column(a);
            for b in a..n {
                let dot: f64 = ca.iter().zip(v.column(b)).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                ensure((dot - want).abs() <= 1e-10, || {
                    format!("{}: <v{a}|v{b}> = {dot:e}", r.tag)
                })?;
            }
        }
    }
    Ok(())
}

pub fn truncation_stability(p: &ModelParams) -> Check {
    let bigger = p.with_n_max(p.n_max + 100);
    for sector in ParitySector::ALL {
        let small = solve(p, Some(sector), STRICT_DELTA).map_err(fail)?;
        let large =
            eigenvalues(&hamiltonian(&bigger, Some(sector)).map_err(fail)?).map_err(fail)?;
        for (k, &e) in small.converged_energies().iter().enumerate() {
            let d = (e - large.energies[k]).abs();
            ensure(d <= 1e-8 * e.abs().max(1.0), || {
                format!("{sector} level {k}: E = {e}, shift {d:e} from n_max + 100")
            })?;
        }
    }
    Ok(())
}

/// Only meaningful at small sizes; larger truncations pass vacuously.
pub fn sector_union(p: &ModelParams) -> Check {
    if p.full_dim() > 300 {
        return Ok(());
    }
    let mut union: Vec<f64> = Vec::new();
    for sector in ParitySector::ALL {
        union.extend(
            eigenvalues(&hamiltonian(p, Some(sector)).map_err(fail)?)
                .map_err(fail)?
                .energies,
        );
    }
    union.sort_by(f64::total_cmp);
    let full = eigenvalues(&hamiltonian(p, None).map_err(fail)?)
        .map_err(fail)?
        .energies;
    ensure(union.len() == full.len(), || {
        "sector dimensions do not add up".into()
    })?;
    for (k, (a, b)) in union.iter().zip(&full).enumerate() {
        ensure((a - b).abs() <= 1e-9, || {
            format!("level {k}: sectors {a}, full {b}")
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// integrable

fn integrable(p: &ModelParams) -> ModelParams {
    ModelParams { omega0: 0.0, ..*p }
}

pub fn integrable_equivalence(p: &ModelParams) -> Check {
    let p0 = integrable(p);
    let spectra = solve_all_sectors(&p0, STRICT_DELTA).map_err(fail)?;
    let rep = compare_with_analytic(&p0, &spectra, 1e-8).map_err(fail)?;
    ensure(
        rep.max_rel_deviation <= 1e-8 && rep.unmatched_below_cut == 0 && rep.pairing_conflicts == 0,
        || format!("{rep:?}"),
    )
}

pub fn jx_commutant(p: &ModelParams) -> Check {
    let p0 = integrable(p);
    let h = rows_of(&hamiltonian(&p0, None).map_err(fail)?);
    let jx = rows_of(&observable(&p0, Observable::Jx, None).map_err(fail)?);
    let c = commutator_max(&h, &jx);
    // The two products differ only in the association of identical factors.
    let bound = 16.0 * f64::EPSILON * max_abs(&h) * max_abs(&jx);
    ensure(c <= bound, || {
        format!("[H, Jx] = {c:e} at omega0 = 0 (bound {bound:e})")
    })
}

pub fn cdagc_ladder(p: &ModelParams) -> Check {
    let data = bogoliubov(p, p.two_j as i32).map_err(fail)?;
    let spec = eigenvalues(&cdagc_operator(data.sigma, 400).map_err(fail)?).map_err(fail)?;
    for k in 0..10 {
        let e = spec.energies[k];
        ensure((e - k as f64).abs() <= 1e-8, || {
            format!("c^dag c level {k} = {e} (sigma {})", data.sigma)
        })?;
    }
    Ok(())
}

pub fn sigma_branch(p: &ModelParams) -> Check {
    for two_mx in (-(p.two_j as i32)..=p.two_j as i32).step_by(2) {
        let b = bogoliubov(p, two_mx).map_err(fail)?;
        ensure(b.lambda.abs() < 0.5 && b.sigma.abs() < 1.0, || {
            format!("{b:?}")
        })?;
        ensure(1.0 - b.sigma * b.sigma > 0.0, || format!("{b:?}"))?;
        ensure(b.sigma * b.lambda <= 0.0, || {
            format!("negative branch selected: {b:?}")
        })?;
        ensure(b.frequency > 0.0 && b.frequency <= p.omega, || {
            format!("{b:?}")
        })?;
        let identity = p.omega * (1.0 + 2.0 * b.lambda * b.sigma);
        ensure((identity - b.frequency).abs() <= 1e-12 * p.omega, || {
            format!(
                "Omega = {} but omega(1 + 2 lambda sigma) = {identity}",
                b.frequency
            )
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// peres

pub fn sum_rule(p: &ModelParams) -> Check {
    let j = p.j();
    for sector in ParitySector::ALL {
        let r = solve(p, Some(sector), twophoton_core::DEFAULT_DELTA).map_err(fail)?;
        let basis = r.basis().map_err(fail)?;
        let jx2 = observable(p, Observable::Jx2, Some(sector)).map_err(fail)?;
        let vecs = r.vectors().map_err(fail)?;
        for k in 0..r.converged_count {
            let v = vecs.column(k);
            let x2 = jx2.expectation(v);
            let mut y2 = 0.0;
            let mut z2 = 0.0;
            for (a, sa) in basis.states.iter().enumerate() {
                z2 += v[a] * v[a] * sa.mz() * sa.mz();
                for (b, sb) in basis
                    .states
                    .iter()
                    .enumerate()
                    .skip(a.saturating_sub(2 * p.two_j as usize + 2))
                {
                    if sb.n > sa.n {
                        break;
                    }
                    y2 += v[a] * v[b] * jy2_entry(p.two_j, *sa, *sb);
                }
            }
            let total = x2 + y2 + z2;
            ensure((total - j * (j + 1.0)).abs() <= 1e-9, || {
                format!("{sector} state {k}: <Jx^2 + Jy^2 + Jz^2> = {total}")
            })?;
        }
    }
    Ok(())
}

pub fn lattice_ranges(p: &ModelParams) -> Check {
    let j = p.j();
    for sector in ParitySector::ALL {
        let r = solve(p, Some(sector), twophoton_core::DEFAULT_DELTA).map_err(fail)?;
        for pt in observable_lattice(&r, Observable::Jx2, p).map_err(fail)? {
            ensure(pt.epsilon.is_finite(), || "non-finite epsilon".into())?;
            ensure(
                pt.value >= -1e-12 && pt.value <= j * (j + 1.0) + 1e-12,
                || format!("Jx^2 = {}", pt.value),
            )?;
        }
        for pt in observable_lattice(&r, Observable::NumberOp, p).map_err(fail)? {
            ensure(pt.value >= 0.0, || format!("<n> = {}", pt.value))?;
        }
    }
    Ok(())
}

pub fn parity_selection(p: &ModelParams) -> Check {
    let jx = observable(p, Observable::Jx, None).map_err(fail)?;
    for sector in ParitySector::ALL {
        let r = solve(p, Some(sector), twophoton_core::DEFAULT_DELTA).map_err(fail)?;
        for k in 0..r.converged_count {
            let v = full_basis_vector(&r, p, k).map_err(fail)?;
            let x = jx.expectation(&v);
            ensure(x.abs() <= 1e-10, || {
                format!("{sector} state {k}: <Jx> = {x:e}")
            })?;
        }
    }
    Ok(())
}

/// Zero-photon (`<n> <= 0.05`) z-dominated states sit on
/// `<Jx^2> = (j(j+1) - <Jz>^2)/2`. The splitting is set small against `omega`
/// but above the induced two-photon spin coupling `~ gamma^2 / omega`, which
/// otherwise mixes `m_z` inside the zero-photon band.
pub fn zero_photon_parabola(p: &ModelParams) -> Check {
    let omega0 = (0.05 * p.omega).max(20.0 * p.gamma * p.gamma / p.omega);
    let ps = ModelParams { omega0, ..*p };
    let j = ps.j();
    for sector in ParitySector::ALL {
        let r = solve(&ps, Some(sector), twophoton_core::DEFAULT_DELTA).map_err(fail)?;
        let labels = dominance_classify(&r, &ps, 0.0).map_err(fail)?;
        let jx2 = observable_lattice(&r, Observable::Jx2, &ps).map_err(fail)?;
        let jz = observable_lattice(&r, Observable::Jz, &ps).map_err(fail)?;
        let n = observable_lattice(&r, Observable::NumberOp, &ps).map_err(fail)?;
        for k in 0..labels.len() {
            if labels[k] != Dominance::ZBasis || n[k].value > 0.05 {
                continue;
            }
            let want = 0.5 * (j * (j + 1.0) - jz[k].value * jz[k].value);
            let d = (jx2[k].value - want).abs();
            ensure(d <= 0.05 * j * j, || {
                format!(
                    "{sector} state {k}: <Jx^2> = {}, parabola {want}",
                    jx2[k].value
                )
            })?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// spectral-stats

fn random_spectra(seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goe = sample_goe_spectrum(&mut rng, 600).unwrap();
    let poisson = sample_poisson_spectrum(&mut rng, 600);
    // Smoothly varying density.
    let mut warped: Vec<f64> = (0..800)
        .map(|_| {
            let u: f64 = rng.random();
            u * u * 50.0
        })
        .collect();
    warped.sort_by(f64::total_cmp);
    vec![goe, poisson, warped]
}

pub fn ratio_scale_invariance(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for e in random_spectra(seed) {
        let base = ratio_sequence(&e).map_err(fail)?;
        let pow2 = 2f64.powi(rng.random_range(-20..20));
        let exact: Vec<f64> = e.iter().map(|x| pow2 * x).collect();
        ensure(ratio_sequence(&exact).map_err(fail)? == base, || {
            format!("ratios changed under scaling by {pow2}")
        })?;
        let c: f64 = rng.random_range(0.01..100.0);
        let b: f64 = rng.random_range(-10.0..10.0);
        let moved: Vec<f64> = e.iter().map(|x| c * x + b).collect();
        let r = ratio_sequence(&moved).map_err(fail)?;
        let worst = r
            .iter()
            .zip(&base)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        ensure(worst <= 1e-9, || {
            format!("ratios moved by {worst:e} under {c} E + {b}")
        })?;
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        ensure((0.0..=1.0).contains(&mean), || format!("<r> = {mean}"))?;
    }
    Ok(())
}

pub fn unfolding_normalization(seed: u64) -> Check {
    for e in random_spectra(seed) {
        let sample = unfold(&e, twophoton_core::stats::DEFAULT_NU).map_err(fail)?;
        ensure(sample.s.iter().all(|&s| s >= 0.0), || {
            "negative unfolded spacing".into()
        })?;
        let m = sample.mean();
        ensure((m - 1.0).abs() <= 0.02, || {
            format!("mean unfolded spacing {m}")
        })?;
    }
    Ok(())
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

pub fn pdf_normalization(_: u64) -> Check {
    let goe = simpson(goe_pdf, 0.0, 12.0, 20_000);
    let poisson = simpson(poisson_pdf, 0.0, 50.0, 50_000);
    ensure((goe - 1.0).abs() <= 1e-8, || {
        format!("GOE pdf integrates to {goe}")
    })?;
    ensure((poisson - 1.0).abs() <= 1e-8, || {
        format!("Poisson pdf integrates to {poisson}")
    })
}

pub fn permutation_independence(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curves: Vec<_> = (0..4)
        .map(|_| {
            let e = sample_poisson_spectrum(&mut rng, 900);
            windowed_mean_ratio(&e, 200, 100).unwrap()
        })
        .collect();
    let reference = average_curves(&curves, 25).map_err(fail)?;
    for r in &reference {
        ensure((0.0..=1.0).contains(&r.r_mean), || {
            format!("r_mean {}", r.r_mean)
        })?;
    }
    let orders = [[3, 2, 1, 0], [1, 3, 0, 2], [2, 0, 3, 1]];
    for order in orders {
        let shuffled: Vec<_> = order.iter().map(|&i| curves[i].clone()).collect();
        ensure(
            average_curves(&shuffled, 25).map_err(fail)? == reference,
            || format!("curve order {order:?} changed the average"),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// classical

pub fn classical_params(seed: u64) -> ModelParams {
    let u = seeded_units(seed ^ 0xc1a55);
    params_from_unit(u, 2, 10)
}

fn interior_point(rng: &mut ChaCha8Rng) -> ClassicalState {
    let r = 1.9 * rng.random::<f64>().sqrt();
    let th = rng.random_range(0.0..std::f64::consts::TAU);
    ClassicalState::new(
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
        r * th.cos(),
        r * th.sin(),
    )
}

/// Vector relative error of the closed-form gradient against central differences.
pub fn gradient_error(x: &ClassicalState, p: &ModelParams) -> f64 {
    let g = gradient(x, p).unwrap();
    let h = 1e-6;
    let base = x.to_array();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..4 {
        let mut plus = base;
        let mut minus = base;
        plus[i] += h;
        minus[i] -= h;
        let fp = h_classical(&ClassicalState::from_array(plus), p).unwrap();
        let fm = h_classical(&ClassicalState::from_array(minus), p).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        num += (fd - g[i]).powi(2);
        den += g[i] * g[i];
    }
    (num / den.max(1e-300)).sqrt()
}

pub fn gradient_check(seed: u64, points: usize) -> Check {
    let p = classical_params(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..points {
        let x = interior_point(&mut rng);
        let e = gradient_error(&x, &p);
        ensure(e <= 1e-6, || {
            format!("point {k} {x:?}: gradient relative error {e:e}")
        })?;
    }
    Ok(())
}

pub fn gradient_invariant(seed: u64) -> Check {
    gradient_check(seed, 100)
}

fn shell_points(p: &ModelParams, eps: f64, count: usize, seed: u64) -> Vec<ClassicalState> {
    classical::sample_shell(eps, ShellSampling::Random { count, seed }, p).unwrap_or_default()
}

/// Trajectories that leave through the disk edge are not accepted and are skipped.
pub fn energy_conservation(seed: u64, t_max: f64) -> Check {
    let p = classical_params(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = -p.omega0 + rng.random_range(0.2..4.0);
    for x0 in shell_points(&p, eps, 2, seed) {
        match classical::integrate(&x0, t_max, &Tolerances::default(), &p) {
            Ok(t) => {
                ensure(
                    t.states.iter().all(|s| s.rho2() <= 4.0 && s.q.is_finite()),
                    || "left the Bloch disk".into(),
                )?;
                ensure(t.energy_drift <= 1e-8 * eps.abs().max(1.0), || {
                    format!("eps {eps}: drift {:e} from {x0:?}", t.energy_drift)
                })?;
            }
            Err(Error::DomainExit { .. }) => {}
            Err(e) => return Err(fail(e)),
        }
    }
    Ok(())
}

pub fn jx_conservation(seed: u64, t_max: f64) -> Check {
    let p = ModelParams {
        omega0: 0.0,
        ..classical_params(seed)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = rng.random_range(0.1..3.0);
    for x0 in shell_points(&p, eps, 2, seed) {
        match classical::integrate(&x0, t_max, &Tolerances::default(), &p) {
            Ok(t) => ensure(t.jx_drift <= 1e-8, || {
                format!("j_x drift {:e} from {x0:?}", t.jx_drift)
            })?,
            Err(Error::DomainExit { .. }) => {}
            Err(e) => return Err(fail(e)),
        }
    }
    Ok(())
}

pub const REVERSAL_TIME: f64 = 20.0;

pub fn time_reversal(seed: u64) -> Check {
    let p = classical_params(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = -p.omega0 + rng.random_range(0.2..4.0);
    let tol = Tolerances::default();
    for x0 in shell_points(&p, eps, 2, seed) {
        let fwd = match classical::integrate(&x0, REVERSAL_TIME, &tol, &p) {
            Ok(t) => t,
            Err(Error::DomainExit { .. }) => continue,
            Err(e) => return Err(fail(e)),
        };
        let end = *fwd.states.last().unwrap();
        let back = classical::integrate(&end, -REVERSAL_TIME, &tol, &p).map_err(fail)?;
        let home = back.states.last().unwrap().to_array();
        let d = home
            .iter()
            .zip(x0.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(d <= 1e-6, || format!("returned {d:e} away from {x0:?}"))?;
    }
    Ok(())
}

pub fn q_plus_round_trip(seed: u64) -> Check {
    let p = classical_params(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = 0;
    for _ in 0..200 {
        let x = interior_point(&mut rng);
        let eps = rng.random_range(-p.omega0..5.0);
        if let Ok(q) = q_plus(eps, x.p, x.q_atom, x.p_atom, &p) {
            found += 1;
            let h = h_classical(&ClassicalState { q, ..x }, &p).map_err(fail)?;
            ensure((h - eps).abs() <= 1e-12 * eps.abs().max(1.0), || {
                format!("h(q_plus) - eps = {:e}", h - eps)
            })?;
            ensure(q >= 0.0, || "negative root".into())?;
        }
    }
    ensure(found > 0, || "no root found in 200 draws".into())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Catalogue.

pub type QuantumCheck = fn(&ModelParams) -> Check;
pub type SeededCheck = fn(u64) -> Check;

pub const QUANTUM: &[(&str, QuantumCheck)] = &[
    ("params validation", params_validation),
    ("basis enumeration", basis_enumeration),
    ("sector partition", sector_partition),
    ("sector closure", sector_closure),
    ("hermiticity", hermiticity),
    ("commutation", commutation),
    ("bandwidth", bandwidth),
    ("spectrum shape", spectrum_shape),
    ("orthonormality", orthonormality),
    ("truncation stability", truncation_stability),
    ("sector union", sector_union),
    ("integrable equivalence", integrable_equivalence),
    ("jx commutant", jx_commutant),
    ("cdagc ladder", cdagc_ladder),
    ("sigma branch", sigma_branch),
    ("sum rule", sum_rule),
    ("lattice ranges", lattice_ranges),
    ("parity selection", parity_selection),
    ("zero-photon parabola", zero_photon_parabola),
];

pub const SEEDED: &[(&str, SeededCheck)] = &[
    ("ratio scale invariance", ratio_scale_invariance),
    ("unfolding normalization", unfolding_normalization),
    ("pdf normalization", pdf_normalization),
    ("permutation independence", permutation_independence),
    ("gradient", gradient_invariant),
    ("energy conservation", |s| energy_conservation(s, 1e3)),
    ("jx conservation", |s| jx_conservation(s, 1e3)),
    ("time reversal", time_reversal),
    ("q_plus round trip", q_plus_round_trip),
];
