//! Run options shared by every command.
//!
//! Values come from three layers: built-in defaults, then a `key = value`
//! config file (`--config`), then command-line flags. Config keys are the
//! flag names without the leading dashes; an unknown key is an error.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;

use crate::error::CliError;

macro_rules! options {
    ($($field:ident: $ty:ty = $key:literal, $help:literal;)*) => {
        #[derive(Debug, Clone, Default, PartialEq, Args)]
        pub struct Options {
            $(
                #[arg(long = $key, help = $help, allow_hyphen_values = true)]
                pub $field: Option<$ty>,
            )*
            /// Config file of `key = value` lines; flags override it.
            #[arg(long)]
            pub config: Option<PathBuf>,
        }

        impl Options {
            pub const KEYS: &'static [&'static str] = &[$($key),*];

            pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
                match key {
                    $($key => self.$field = Some(parse_value($key, value)?),)*
                    _ => {
                        return Err(CliError::config(format!(
                            "unknown key `{key}` (known: {})",
                            Self::KEYS.join(", ")
                        )))
                    }
                }
                Ok(())
            }

            /// Fields set here win; the rest fall back to `base`.
            pub fn over(self, base: Options) -> Options {
                Options {
                    $($field: self.$field.or(base.$field),)*
                    config: self.config.or(base.config),
                }
            }

            /// Every set option as `(key, value)` in declaration order.
            pub fn pairs(&self) -> Vec<(&'static str, String)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push(($key, v.to_string()));
                    }
                )*
                out
            }
        }
    };
}

options! {
    omega: f64 = "omega", "Field frequency";
    omega0: f64 = "omega0", "Atomic level splitting";
    gamma: f64 = "gamma", "Two-photon coupling";
    j: f64 = "j", "Pseudospin length (integer or half-integer)";
    nmax: usize = "nmax", "Fock-space truncation";
    delta: f64 = "delta", "Convergence tolerance on the two highest photon numbers";
    sector: String = "sector", "Parity sector: +1, -1, +i, -i, all or full";
    epsilon_perturb: f64 = "epsilon-perturb", "Strength of the parity-breaking J_x term";
    op: String = "op", "Comma-separated observables: n, jz, jx, jx2, j2, cdagc";
    threshold: f64 = "threshold", "Dominance margin for x/z basis labels";
    overlay_nc: usize = "overlay-nc", "Emit analytic overlay curves up to this n_c";
    window: usize = "window", "Levels per ratio window";
    stride: usize = "stride", "Levels between ratio windows";
    grid: usize = "grid", "Points of the sector-averaged ratio curve";
    nu: usize = "nu", "Unfolding half-width in spacings";
    energy: String = "energy", "Scaled energy (comma-separated list for poincare)";
    width: f64 = "width", "Half-width of the spacing energy window";
    bins: usize = "bins", "Histogram bins";
    s_max: f64 = "s-max", "Upper edge of the spacing histogram";
    tmax: f64 = "tmax", "Integration time per trajectory";
    trajectories: usize = "trajectories", "Initial conditions per energy";
    max_crossings: usize = "max-crossings", "Section crossings kept per trajectory";
    rtol: f64 = "rtol", "Relative integration tolerance";
    atol: f64 = "atol", "Absolute integration tolerance";
    cells: usize = "cells", "Occupancy grid cells per axis";
    seed: u64 = "seed", "Seed for sampled initial conditions";
    out_dir: String = "out-dir", "Output directory";
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("invalid value `{value}` for `{key}`")))
}

/// Parses a config file. Blank lines and `#` comments are skipped.
pub fn read_config(path: &Path) -> Result<Options, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
}

pub fn parse_config(text: &str) -> Result<Options, CliError> {
    let mut opts = Options::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        opts.set(key.trim(), value)
            .map_err(|e| CliError::config(format!("line {}: {}", lineno + 1, e.message)))?;
    }
    Ok(opts)
}

/// Built-in values for everything that has a sensible default.
pub fn defaults() -> Options {
    Options {
        omega: Some(1.0),
        nmax: Some(200),
        delta: Some(twophoton_core::DEFAULT_DELTA),
        sector: Some("all".into()),
        epsilon_perturb: Some(0.0),
        threshold: Some(0.0),
        window: Some(twophoton_core::stats::DEFAULT_WINDOW),
        stride: Some(twophoton_core::stats::DEFAULT_STRIDE),
        grid: Some(40),
        nu: Some(twophoton_core::stats::DEFAULT_NU),
        width: Some(0.5),
        bins: Some(40),
        s_max: Some(4.0),
        tmax: Some(twophoton_core::classical::DEFAULT_T_MAX),
        trajectories: Some(25),
        max_crossings: Some(twophoton_core::classical::MAX_CROSSINGS),
        rtol: Some(1e-12),
        atol: Some(1e-12),
        cells: Some(100),
        seed: Some(0),
        out_dir: Some(".".into()),
        ..Options::default()
    }
}

/// Applies the three layers.
pub fn resolve(flags: Options) -> Result<Options, CliError> {
    let file = match &flags.config {
        Some(p) => read_config(p)?,
        None => Options::default(),
    };
    Ok(flags.over(file).over(defaults()))
}

pub fn require<T: Clone>(value: &Option<T>, key: &str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::config(format!("missing required value `{key}`")))
}
