//! Mean-field classical limit: Hamiltonian flow on `(q, p)` for the field and
//! `(Q, P)` on the Bloch disk `Q^2 + P^2 <= 4` for the collective spin.

pub mod dop853;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use dop853::{Control, DenseStep, Tolerances};

/// Distance to the disk edge (in `Q^2 + P^2`) treated as the boundary.
pub const BOUNDARY_EPS: f64 = 1e-9;
/// Default integration horizon.
pub const DEFAULT_T_MAX: f64 = 1e3;
/// Per-trajectory cap on recorded section crossings.
pub const MAX_CROSSINGS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub q: f64,
    pub p: f64,
    /// Atomic coordinate `Q`.
    pub q_atom: f64,
    /// Atomic momentum `P`.
    pub p_atom: f64,
}

impl ClassicalState {
    pub fn new(q: f64, p: f64, q_atom: f64, p_atom: f64) -> Self {
        ClassicalState {
            q,
            p,
            q_atom,
            p_atom,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q, self.p, self.q_atom, self.p_atom]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        ClassicalState::new(a[0], a[1], a[2], a[3])
    }

    /// `Q^2 + P^2`.
    pub fn rho2(&self) -> f64 {
        self.q_atom * self.q_atom + self.p_atom * self.p_atom
    }
}

fn bloch_factor(rho2: f64) -> Result<f64> {
    if !(rho2 <= 4.0) {
        return Err(Error::DomainViolation { rho2 });
    }
    Ok((1.0 - rho2 / 4.0).sqrt())
}

/// Scaled energy of a phase-space point.
pub fn h_classical(x: &ClassicalState, params: &ModelParams) -> Result<f64> {
    let f = bloch_factor(x.rho2())?;
    let (w, w0, g) = (params.omega, params.omega0, params.gamma);
    Ok(0.5 * w * (x.q * x.q + x.p * x.p) + 0.5 * w0 * x.rho2() - w0
        + g * (x.q * x.q - x.p * x.p) * x.q_atom * f)
}

/// `(dh/dq, dh/dp, dh/dQ, dh/dP)`; singular at the disk edge.
pub fn gradient(x: &ClassicalState, params: &ModelParams) -> Result<[f64; 4]> {
    let rho2 = x.rho2();
    if !(rho2 < 4.0 - BOUNDARY_EPS) {
        return Err(if rho2 > 4.0 {
            Error::DomainViolation { rho2 }
        } else {
            Error::BoundarySingularity { rho2 }
        });
    }
    let f = (1.0 - rho2 / 4.0).sqrt();
    let (w, w0, g) = (params.omega, params.omega0, params.gamma);
    let (q, p, qa, pa) = (x.q, x.p, x.q_atom, x.p_atom);
    let d = q * q - p * p;
    Ok([
        w * q + 2.0 * g * q * qa * f,
        w * p - 2.0 * g * p * qa * f,
        w0 * qa + g * d * (f - qa * qa / (4.0 * f)),
        w0 * pa - g * d * qa * pa / (4.0 * f),
    ])
}

/// Hamilton's equations `(dq/dt, dp/dt, dQ/dt, dP/dt)`.
pub fn equations_of_motion(x: &ClassicalState, params: &ModelParams) -> Result<[f64; 4]> {
    let g = gradient(x, params)?;
    Ok([g[1], -g[0], g[3], -g[2]])
}

/// `j_x = Q sqrt(1 - (Q^2 + P^2)/4)`, conserved when `omega0 = 0`.
pub fn jx_classical(x: &ClassicalState) -> f64 {
    x.q_atom * (1.0 - x.rho2() / 4.0).max(0.0).sqrt()
}

/// Non-negative `q` with `h(q, p, Q, P) = epsilon`.
pub fn q_plus(epsilon: f64, p: f64, q_atom: f64, p_atom: f64, params: &ModelParams) -> Result<f64> {
    let rho2 = q_atom * q_atom + p_atom * p_atom;
    let f = bloch_factor(rho2)?;
    let (w, w0, g) = (params.omega, params.omega0, params.gamma);
    let coeff = 0.5 * w + g * q_atom * f;
    if !(coeff > 0.0) {
        return Err(Error::OutsideShell { energy: epsilon });
    }
    let numer = epsilon - 0.5 * w * p * p - 0.5 * w0 * rho2 + w0 + g * p * p * q_atom * f;
    if numer < 0.0 {
        return Err(Error::OutsideShell { energy: epsilon });
    }
    Ok((numer / coeff).sqrt())
}

/// How initial `(Q, P)` points are laid out on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShellSampling {
    /// Regular `n x n` grid over `[-2, 2]^2`, restricted to the open disk.
    Grid { per_axis: usize },
    /// `count` uniform points on the shell drawn from a seeded generator.
    Random { count: usize, seed: u64 },
}

/// Initial conditions on the energy shell with `p = 0` and `q = q_plus`.
pub fn sample_shell(
    epsilon: f64,
    sampling: ShellSampling,
    params: &ModelParams,
) -> Result<Vec<ClassicalState>> {
    params.validate()?;
    if !epsilon.is_finite() || epsilon < -params.omega0 {
        return Err(Error::EmptyShell { energy: epsilon });
    }
    let on_shell = |qa: f64, pa: f64| -> Option<ClassicalState> {
        if qa * qa + pa * pa >= 4.0 - BOUNDARY_EPS {
            return None;
        }
        q_plus(epsilon, 0.0, qa, pa, params)
            .ok()
            .map(|q| ClassicalState::new(q, 0.0, qa, pa))
    };
    let mut out = Vec::new();
    match sampling {
        ShellSampling::Grid { per_axis } => {
            let n = per_axis.max(1);
            for a in 0..n {
                for b in 0..n {
                    let qa = -2.0 + 4.0 * (a as f64 + 0.5) / n as f64;
                    let pa = -2.0 + 4.0 * (b as f64 + 0.5) / n as f64;
                    out.extend(on_shell(qa, pa));
                }
            }
            if out.is_empty() && epsilon == -params.omega0 {
                out.push(ClassicalState::new(0.0, 0.0, 0.0, 0.0));
            }
        }
        ShellSampling::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let max_attempts = 1000 * count.max(1);
            let mut attempts = 0;
            while out.len() < count && attempts < max_attempts {
                attempts += 1;
                let qa = rng.random_range(-2.0..2.0);
                let pa = rng.random_range(-2.0..2.0);
                out.extend(on_shell(qa, pa));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyShell { energy: epsilon });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
    /// `max |h(x(t)) - h(x(0))|` over stored points.
    pub energy_drift: f64,
    /// `max |j_x(t) - j_x(0)|` over stored points.
    pub jx_drift: f64,
}

fn rhs(params: &ModelParams) -> impl FnMut(f64, &[f64; 4]) -> Result<[f64; 4]> + '_ {
    move |_t, y| equations_of_motion(&ClassicalState::from_array(*y), params)
}

/// Runs the flow from `x0` for `t_span` (negative for backward) and calls
/// `visit` on every accepted step. Fails with `DomainExit` (carrying the last
/// accepted time) if the disk edge is approached.
fn run<F>(
    x0: &ClassicalState,
    t_span: f64,
    tol: &Tolerances,
    params: &ModelParams,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&DenseStep<4>, &ClassicalState) -> Result<Control>,
{
    params.validate()?;
    h_classical(x0, params)?;
    gradient(x0, params)?;
    let mut t_last = 0.0;
    let result = dop853::integrate(rhs(params), 0.0, x0.to_array(), t_span, tol, |step, y| {
        let x = ClassicalState::from_array(*y);
        if 4.0 - x.rho2() < BOUNDARY_EPS {
            return Err(Error::DomainExit { t: step.t_new() });
        }
        t_last = step.t_new();
        visit(step, &x)
    });
    match result {
        Ok(_) => Ok(()),
        Err(Error::BoundarySingularity { .. } | Error::DomainViolation { .. }) => {
            Err(Error::DomainExit { t: t_last })
        }
        Err(e) => Err(e),
    }
}

/// Integrates `x0` for `t_max` and stores every accepted step.
pub fn integrate(
    x0: &ClassicalState,
    t_max: f64,
    tol: &Tolerances,
    params: &ModelParams,
) -> Result<Trajectory> {
    let e0 = h_classical(x0, params)?;
    let j0 = jx_classical(x0);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*x0],
        energy_drift: 0.0,
        jx_drift: 0.0,
    };
    run(x0, t_max, tol, params, |step, x| {
        traj.times.push(step.t_new());
        traj.states.push(*x);
        traj.energy_drift = traj.energy_drift.max((h_classical(x, params)? - e0).abs());
        traj.jx_drift = traj.jx_drift.max((jx_classical(x) - j0).abs());
        Ok(Control::Continue)
    })?;
    Ok(traj)
}

/// One crossing of the surface `p = 0` with `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub state: ClassicalState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub crossings: Vec<Crossing>,
    pub energy_drift: f64,
    /// True when the crossing cap ended the run before `t_max`.
    pub capped: bool,
    /// Time of a `DomainExit`, if the trajectory reached the disk edge;
    /// crossings found before it are kept.
    pub exit_time: Option<f64>,
}

/// Sub-intervals scanned per step when looking for sign changes of `p`.
const SCAN: usize = 8;

fn refine_crossing(step: &DenseStep<4>, mut a: f64, mut b: f64) -> f64 {
    let p = |t: f64| step.eval_component(1, t);
    let mut pa = p(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let pm = p(m);
        if pm.abs() <= 1e-10 || m == a || m == b {
            return m;
        }
        if (pm > 0.0) == (pa > 0.0) {
            a = m;
            pa = pm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Poincaré section on `p = 0` (crossed with `q > 0`), crossing times refined
/// by bisection on the dense output until `|p| <= 1e-10`.
pub fn poincare_section(
    x0: &ClassicalState,
    t_max: f64,
    tol: &Tolerances,
    params: &ModelParams,
    max_crossings: usize,
) -> Result<Section> {
    let e0 = h_classical(x0, params)?;
    let mut section = Section {
        crossings: Vec::new(),
        energy_drift: 0.0,
        capped: false,
        exit_time: None,
    };
    let outcome = run(x0, t_max, tol, params, |step, x| {
        section.energy_drift = section
            .energy_drift
            .max((h_classical(x, params)? - e0).abs());
        let mut t_prev = step.t_old;
        let mut p_prev = step.eval_component(1, t_prev);
        for i in 1..=SCAN {
            let t_next = step.t_old + step.h * i as f64 / SCAN as f64;
            let p_next = if i == SCAN {
                x.p
            } else {
                step.eval_component(1, t_next)
            };
            // Forward in time p goes + to - where q > 0.
            let down = if step.h > 0.0 {
                p_prev > 0.0 && p_next <= 0.0
            } else {
                p_prev < 0.0 && p_next >= 0.0
            };
            if down {
                let t = refine_crossing(step, t_prev, t_next);
                let state = ClassicalState::from_array(step.eval(t));
                if state.q > 0.0 {
                    section.crossings.push(Crossing { t, state });
                    if section.crossings.len() >= max_crossings {
                        section.capped = true;
                        return Ok(Control::Stop);
                    }
                }
            }
            t_prev = t_next;
            p_prev = p_next;
        }
        Ok(Control::Continue)
    });
    match outcome {
        Ok(()) => {}
        Err(Error::DomainExit { t }) => section.exit_time = Some(t),
        Err(e) => return Err(e),
    }
    Ok(section)
}

/// Largest `Q^2 + P^2` reachable on the `p = 0` slice of the shell, traced
/// along `n_theta` rays by bisection on `h(0, 0, Q, P) = epsilon`.
pub fn accessible_boundary(
    epsilon: f64,
    params: &ModelParams,
    n_theta: usize,
) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let g = |r: f64, th: f64| -> f64 {
        let r = r.min(2.0 - 1e-12);
        let x = ClassicalState::new(0.0, 0.0, r * th.cos(), r * th.sin());
        h_classical(&x, params).expect("inside the disk") - epsilon
    };
    if !(g(0.0, 0.0) <= 0.0) {
        return Err(Error::EmptyShell { energy: epsilon });
    }
    let n = n_theta.max(3);
    Ok((0..n)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let r = if g(2.0, th) <= 0.0 {
                2.0
            } else {
                let (mut lo, mut hi) = (0.0, 2.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid, th) <= 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-14 {
                        break;
                    }
                }
                0.5 * (lo + hi)
            };
            (r * th.cos(), r * th.sin())
        })
        .collect())
}

/// The bare Bloch-disk edge `Q^2 + P^2 = 4`.
pub fn bloch_boundary(n_theta: usize) -> Vec<(f64, f64)> {
    let n = n_theta.max(3);
    (0..n)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            (2.0 * th.cos(), 2.0 * th.sin())
        })
        .collect()
}

/// Whether `(Q, P)` lies on the `p = 0` slice of the shell.
pub fn is_accessible(epsilon: f64, q_atom: f64, p_atom: f64, params: &ModelParams) -> bool {
    let rho2 = q_atom * q_atom + p_atom * p_atom;
    rho2 < 4.0 && q_plus(epsilon, 0.0, q_atom, p_atom, params).is_ok()
}

/// Fraction of accessible cells of a `cells x cells` grid over the bounding
/// square of the accessible region that contain at least one point.
pub fn occupancy_fraction(
    points: &[(f64, f64)],
    epsilon: f64,
    params: &ModelParams,
    cells: usize,
) -> Result<f64> {
    let boundary = accessible_boundary(epsilon, params, 720)?;
    let radius = boundary
        .iter()
        .map(|(a, b)| (a * a + b * b).sqrt())
        .fold(0.0, f64::max);
    let n = cells.max(1);
    let width = 2.0 * radius / n as f64;
    let mut occupied = vec![false; n * n];
    for &(qa, pa) in points {
        let i = ((qa + radius) / width).floor();
        let j = ((pa + radius) / width).floor();
        if i >= 0.0 && j >= 0.0 && (i as usize) < n && (j as usize) < n {
            occupied[i as usize * n + j as usize] = true;
        }
    }
    let mut total = 0usize;
    let mut hit = 0usize;
    for i in 0..n {
        for j in 0..n {
            let qa = -radius + (i as f64 + 0.5) * width;
            let pa = -radius + (j as f64 + 0.5) * width;
            if is_accessible(epsilon, qa, pa, params) {
                total += 1;
                hit += occupied[i * n + j] as usize;
            }
        }
    }
    if total == 0 {
        return Err(Error::EmptyShell { energy: epsilon });
    }
    Ok(hit as f64 / total as f64)
}
