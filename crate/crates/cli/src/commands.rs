//! One function per subcommand. Each writes its CSVs into the output
//! directory and finishes with a manifest that lists them with hashes.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};

use twophoton_core::classical::{
    accessible_boundary, bloch_boundary, occupancy_fraction, poincare_section, sample_shell,
    ShellSampling,
};
use twophoton_core::eigen::{solve, solve_all_sectors, solve_perturbed};
use twophoton_core::integrable::{compare_with_analytic, overlay_curves, OVERLAY_SAMPLES};
use twophoton_core::io::{
    boundary_table, equivalence_table, histogram_table, overlay_table, peres_table, ratio_table,
    section_table, spectrum_table, Table,
};
use twophoton_core::peres::{
    cdagc_lattice, dominance_classify, observable_lattice, peres_lattice, with_dominance,
    PeresPoint,
};
use twophoton_core::stats::{
    anderson_darling, average_curves, log_fit, spacing_histogram, unfold, windowed_mean_ratio,
    RefModel, SpacingSample, AD_THRESHOLD,
};
use twophoton_core::{
    observable, Basis, BasisTag, ModelParams, Observable, ParitySector, RunManifest,
    SpectrumResult, Tolerances,
};

use crate::error::CliError;
use crate::options::{require, Options};

pub const MANIFEST: &str = "manifest.json";

/// Which parity blocks a command diagonalizes.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Sectors {
    All,
    Full,
    One(ParitySector),
}

fn sectors(opts: &Options) -> Result<Sectors, CliError> {
    match opts.sector.as_deref().unwrap_or("all").trim() {
        "all" => Ok(Sectors::All),
        "full" => Ok(Sectors::Full),
        s => Ok(Sectors::One(s.parse()?)),
    }
}

/// Model parameters; `j` may be skipped where only the classical limit is used.
pub fn model_params(opts: &Options, need_j: bool) -> Result<ModelParams, CliError> {
    let j = if need_j {
        require(&opts.j, "j")?
    } else {
        opts.j.unwrap_or(1.0)
    };
    let two_j = 2.0 * j;
    if !(two_j >= 1.0 && two_j.fract() == 0.0 && two_j <= u32::MAX as f64) {
        return Err(CliError::config(format!(
            "invalid value `{j}` for `j`: must be a positive multiple of 1/2"
        )));
    }
    Ok(ModelParams::new(
        require(&opts.omega, "omega")?,
        require(&opts.omega0, "omega0")?,
        require(&opts.gamma, "gamma")?,
        two_j as u32,
        require(&opts.nmax, "nmax")?,
    )?)
}

fn energies(opts: &Options) -> Result<Vec<f64>, CliError> {
    let raw = require(&opts.energy, "energy")?;
    raw.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::config(format!("invalid value `{raw}` for `energy`")))
        })
        .collect()
}

fn solve_spectra(
    p: &ModelParams,
    which: Sectors,
    delta: f64,
) -> Result<Vec<SpectrumResult>, CliError> {
    Ok(match which {
        Sectors::All => solve_all_sectors(p, delta)?,
        Sectors::Full => vec![solve(p, None, delta)?],
        Sectors::One(s) => vec![solve(p, Some(s), delta)?],
    })
}

/// Collects the outputs of one run and writes its manifest.
struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn new(command: &str, opts: &Options, params: Option<ModelParams>) -> Result<Self, CliError> {
        let dir = PathBuf::from(require(&opts.out_dir, "out-dir")?);
        fs::create_dir_all(&dir).map_err(|e| {
            CliError::config(format!("cannot create out-dir {}: {e}", dir.display()))
        })?;
        let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        let mut manifest = RunManifest::new(command, params, timestamp);
        for (k, v) in opts.pairs() {
            if k != "out-dir" {
                manifest.knob(k, v);
            }
        }
        Ok(Run { dir, manifest })
    }

    fn info(&mut self, name: &str, value: impl Into<serde_json::Value>) {
        self.manifest.knob(&format!("info.{name}"), value.into());
    }

    fn emit(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let mut rec = table.write(&self.dir.join(name))?;
        rec.path = PathBuf::from(name);
        info!(
            "wrote {} ({} rows)",
            self.dir.join(name).display(),
            table.rows.len()
        );
        self.manifest.outputs.push(rec);
        Ok(())
    }

    fn finish(self) -> Result<PathBuf, CliError> {
        let path = self.dir.join(MANIFEST);
        self.manifest.write(&path)?;
        Ok(path)
    }
}

pub fn spectrum(opts: &Options) -> Result<PathBuf, CliError> {
    let p = model_params(opts, true)?;
    let which = sectors(opts)?;
    let spectra = solve_spectra(&p, which, require(&opts.delta, "delta")?)?;
    for r in &spectra {
        info!(
            "{}: {} of {} levels converged",
            r.tag,
            r.converged_count,
            r.dim()
        );
    }
    let mut run = Run::new("spectrum", opts, Some(p))?;
    run.emit("spectrum.csv", &spectrum_table(&spectra, p.j()))?;
    run.finish()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Lattice {
    Plain(Observable),
    Cdagc,
}

fn lattice_ops(opts: &Options) -> Result<Vec<(String, Lattice)>, CliError> {
    let raw = opts.op.clone().unwrap_or_default();
    let ops: Vec<(String, Lattice)> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let op = match s.to_ascii_lowercase().as_str() {
                "cdagc" => Lattice::Cdagc,
                other => Lattice::Plain(other.parse()?),
            };
            Ok((s.to_ascii_lowercase(), op))
        })
        .collect::<Result<_, CliError>>()?;
    if ops.is_empty() {
        return Err(CliError::config(
            "`op` needs at least one observable (n, jz, jx, jx2, j2, cdagc)",
        ));
    }
    Ok(ops)
}

fn lattice(r: &SpectrumResult, p: &ModelParams, op: Lattice) -> Result<Vec<PeresPoint>, CliError> {
    Ok(match (op, r.tag) {
        (Lattice::Cdagc, _) => cdagc_lattice(r, p)?,
        // J_x couples sectors; its block inside one sector is the restriction
        // of the full operator (identically zero by parity).
        (Lattice::Plain(Observable::Jx), BasisTag::Sector(_)) => {
            let basis = Basis::new(p, r.tag);
            let idx: Vec<usize> = basis
                .states
                .iter()
                .filter_map(|s| basis.full_index(*s))
                .collect();
            let jx = observable(p, Observable::Jx, None)?.restrict(&idx, r.tag);
            peres_lattice(r, &jx, p)?
        }
        (Lattice::Plain(o), _) => observable_lattice(r, o, p)?,
    })
}

pub fn peres(opts: &Options) -> Result<PathBuf, CliError> {
    let p = model_params(opts, true)?;
    let ops = lattice_ops(opts)?;
    let delta = require(&opts.delta, "delta")?;
    let eps = require(&opts.epsilon_perturb, "epsilon-perturb")?;
    let spectra = if eps != 0.0 {
        vec![solve_perturbed(&p, eps, delta)?]
    } else {
        solve_spectra(&p, sectors(opts)?, delta)?
    };
    let threshold = require(&opts.threshold, "threshold")?;
    let labels = spectra
        .iter()
        .map(|r| dominance_classify(r, &p, threshold))
        .collect::<Result<Vec<_>, _>>()?;

    let mut run = Run::new("peres", opts, Some(p))?;
    for (name, op) in ops {
        let mut groups = Vec::new();
        for (r, l) in spectra.iter().zip(&labels) {
            let mut points = lattice(r, &p, op)?;
            with_dominance(&mut points, l);
            groups.push((r.tag.to_string(), points));
        }
        run.emit(&format!("peres_{name}.csv"), &peres_table(&groups))?;
    }
    if let Some(n_c) = opts.overlay_nc {
        // Analytic curves always use the zero-splitting model.
        let p0 = ModelParams { omega0: 0.0, ..p };
        run.emit(
            "overlay.csv",
            &overlay_table(&overlay_curves(&p0, n_c, OVERLAY_SAMPLES)?),
        )?;
    }
    run.finish()
}

pub fn ratio(opts: &Options) -> Result<PathBuf, CliError> {
    let p = model_params(opts, true)?;
    let spectra = solve_spectra(&p, sectors(opts)?, require(&opts.delta, "delta")?)?;
    let window = require(&opts.window, "window")?;
    let stride = require(&opts.stride, "stride")?;
    let mut curves = Vec::new();
    for r in &spectra {
        let eps: Vec<f64> = r.converged_energies().iter().map(|e| e / p.j()).collect();
        curves.push((
            r.tag.to_string(),
            windowed_mean_ratio(&eps, window, stride)?,
        ));
    }
    if curves.len() > 1 {
        let plain: Vec<_> = curves.iter().map(|(_, c)| c.clone()).collect();
        curves.push((
            "avg".into(),
            average_curves(&plain, require(&opts.grid, "grid")?)?,
        ));
    }
    let mut run = Run::new("ratio", opts, Some(p))?;
    run.emit("ratio.csv", &ratio_table(&curves))?;
    run.finish()
}

pub fn spacing(opts: &Options) -> Result<PathBuf, CliError> {
    let p = model_params(opts, true)?;
    let center = match energies(opts)?.as_slice() {
        [e] => *e,
        _ => {
            return Err(CliError::config(
                "`energy` must be a single value for spacing",
            ))
        }
    };
    let width = require(&opts.width, "width")?;
    let nu = require(&opts.nu, "nu")?;
    let spectra = solve_spectra(&p, sectors(opts)?, require(&opts.delta, "delta")?)?;

    let mut s = Vec::new();
    let mut selected = Vec::new();
    for r in &spectra {
        let eps: Vec<f64> = r
            .converged_energies()
            .iter()
            .map(|e| e / p.j())
            .filter(|e| (e - center).abs() <= width)
            .collect();
        match unfold(&eps, nu) {
            Ok(sample) => {
                s.extend(sample.s);
                selected.extend(eps);
            }
            Err(e) => warn!("{}: skipped ({e})", r.tag),
        }
    }
    if s.is_empty() {
        return Err(twophoton_core::Error::TooFewLevels {
            needed: 2 * nu + 2,
            got: 0,
        }
        .into());
    }
    let n = selected.len() as f64;
    let mean = selected.iter().sum::<f64>() / n;
    let sd = (selected.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n).sqrt();
    let sample = SpacingSample {
        s,
        window_center: mean,
        window_width: sd,
    };
    info!(
        "{} spacings, <eps> = {mean:.4}, sigma_eps = {sd:.4}",
        sample.s.len()
    );

    let hist = spacing_histogram(
        &sample,
        require(&opts.bins, "bins")?,
        require(&opts.s_max, "s-max")?,
    )?;
    let mut fit = Table {
        header: vec!["model", "a2", "threshold", "consistent"],
        rows: Vec::new(),
    };
    for model in [RefModel::Goe, RefModel::Poisson] {
        let a2 = anderson_darling(&sample.s, model)?;
        log_fit(model.label(), a2);
        fit.rows.push(vec![
            model.label().to_string(),
            twophoton_core::io::fmt_f64(a2),
            twophoton_core::io::fmt_f64(AD_THRESHOLD),
            (a2 <= AD_THRESHOLD).to_string(),
        ]);
    }
    let mut run = Run::new("spacing", opts, Some(p))?;
    run.info("window_center", mean);
    run.info("window_width", sd);
    run.info("clipped_fraction", hist.clipped_fraction);
    run.emit("spacing_hist.csv", &histogram_table(&hist))?;
    run.emit("spacing_fit.csv", &fit)?;
    run.finish()
}

pub fn poincare(opts: &Options) -> Result<PathBuf, CliError> {
    let p = model_params(opts, false)?;
    let tol = Tolerances {
        rtol: require(&opts.rtol, "rtol")?,
        atol: require(&opts.atol, "atol")?,
        ..Tolerances::default()
    };
    let t_max = require(&opts.tmax, "tmax")?;
    let count = require(&opts.trajectories, "trajectories")?;
    let seed = require(&opts.seed, "seed")?;
    let max_crossings = require(&opts.max_crossings, "max-crossings")?;
    let cells = require(&opts.cells, "cells")?;

    let mut run = Run::new("poincare", opts, Some(p))?;
    run.info("surface", "p = 0, q > 0");
    for (i, eps) in energies(opts)?.into_iter().enumerate() {
        let starts = sample_shell(eps, ShellSampling::Random { count, seed }, &p)?;
        let mut sections = Vec::with_capacity(starts.len());
        for x0 in &starts {
            let s = poincare_section(x0, t_max, &tol, &p, max_crossings)?;
            if let Some(t) = s.exit_time {
                warn!("eps {eps}: trajectory reached the Bloch disk edge at t = {t}");
            }
            sections.push(s);
        }
        let points: Vec<(f64, f64)> = sections
            .iter()
            .flat_map(|s| s.crossings.iter().map(|c| (c.state.q_atom, c.state.p_atom)))
            .collect();
        let drift = sections.iter().map(|s| s.energy_drift).fold(0.0, f64::max);
        let occupancy = occupancy_fraction(&points, eps, &p, cells)?;
        info!(
            "eps {eps}: {} crossings, occupancy {occupancy:.4}, max energy drift {drift:.2e}",
            points.len()
        );
        run.info(&format!("occupancy_{i}"), occupancy);
        run.info(&format!("energy_drift_{i}"), drift);
        run.emit(&format!("section_{i}.csv"), &section_table(&sections))?;
        run.emit(
            &format!("boundary_{i}.csv"),
            &boundary_table(&accessible_boundary(eps, &p, 720)?),
        )?;
    }
    run.emit("bloch.csv", &boundary_table(&bloch_boundary(720)))?;
    run.finish()
}

pub fn integrable_check(opts: &Options) -> Result<PathBuf, CliError> {
    let p = model_params(opts, true)?;
    p.require_normal_phase()?;
    let spectra = solve_spectra(&p, Sectors::All, require(&opts.delta, "delta")?)?;
    let report = compare_with_analytic(&p, &spectra, 1e-8)?;
    println!(
        "compared {} levels: max relative deviation {:.3e} (level {}), {} analytic levels unmatched below {:.6}, {} pairing conflicts",
        report.compared,
        report.max_rel_deviation,
        report.worst_index,
        report.unmatched_below_cut,
        report.completeness_cut,
        report.pairing_conflicts
    );
    let mut run = Run::new("integrable-check", opts, Some(p))?;
    run.emit("equivalence.csv", &equivalence_table(&report))?;
    run.finish()
}

/// Reruns the command recorded in `manifest` into `out_dir` and checks that
/// every output is byte-identical.
pub fn replay(manifest: &Path, out_dir: &Path) -> Result<PathBuf, CliError> {
    let original = RunManifest::read(manifest)?;
    let mut opts = Options::default();
    for (key, value) in &original.knobs {
        if key.starts_with("info.") {
            continue;
        }
        let text = value
            .as_str()
            .ok_or_else(|| CliError::config(format!("manifest knob `{key}` is not a string")))?;
        opts.set(key, text)?;
    }
    opts.out_dir = Some(out_dir.to_string_lossy().into_owned());
    let new_path = dispatch(&original.command, &opts)?;
    let fresh = RunManifest::read(&new_path)?;
    for old in &original.outputs {
        let new = fresh
            .outputs
            .iter()
            .find(|o| o.path == old.path)
            .ok_or_else(|| {
                CliError::numerical(format!("replay did not produce {}", old.path.display()))
            })?;
        if new.sha256 != old.sha256 {
            return Err(CliError::numerical(format!(
                "{} differs on replay",
                old.path.display()
            )));
        }
    }
    println!(
        "replayed {} outputs byte-identically",
        original.outputs.len()
    );
    Ok(new_path)
}

pub fn dispatch(command: &str, opts: &Options) -> Result<PathBuf, CliError> {
    match command {
        "spectrum" => spectrum(opts),
        "peres" => peres(opts),
        "ratio" => ratio(opts),
        "spacing" => spacing(opts),
        "poincare" => poincare(opts),
        "integrable-check" => integrable_check(opts),
        other => Err(CliError::config(format!("unknown command `{other}`"))),
    }
}
