//! Level statistics: unfolding, spacing and ratio distributions, reference
//! ensembles and the Anderson-Darling goodness-of-fit statistic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use log::{info, warn};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::BasisTag;
use crate::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::operator::SymmetricOperator;

pub const DEFAULT_NU: usize = 10;
pub const DEFAULT_WINDOW: usize = 400;
pub const DEFAULT_STRIDE: usize = 200;
pub const MIN_WINDOW: usize = 50;
/// Decision threshold on `A^2`.
pub const AD_THRESHOLD: f64 = 2.5;

/// `<r>` for GOE spectra, `4 - 2 sqrt(3)`.
pub fn goe_mean_ratio() -> f64 {
    4.0 - 2.0 * 3f64.sqrt()
}

/// `<r>` for Poisson spectra, `2 ln 2 - 1`.
pub fn poisson_mean_ratio() -> f64 {
    2.0 * 2f64.ln() - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefModel {
    Goe,
    Poisson,
}

impl RefModel {
    pub fn pdf(self, s: f64) -> f64 {
        match self {
            RefModel::Goe => goe_pdf(s),
            RefModel::Poisson => poisson_pdf(s),
        }
    }

    pub fn cdf(self, s: f64) -> f64 {
        -self.log_survival(s).exp_m1()
    }

    /// `ln(1 - F(s))`.
    pub fn log_survival(self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self {
            RefModel::Goe => -PI * s * s / 4.0,
            RefModel::Poisson => -s,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RefModel::Goe => "goe",
            RefModel::Poisson => "poisson",
        }
    }
}

impl fmt::Display for RefModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RefModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "goe" => Ok(RefModel::Goe),
            "poisson" => Ok(RefModel::Poisson),
            _ => Err(Error::InvalidArgument {
                name: "model",
                reason: format!("unknown reference model '{s}'"),
            }),
        }
    }
}

/// Wigner surmise `(pi/2) s exp(-pi s^2 / 4)`.
pub fn goe_pdf(s: f64) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    0.5 * PI * s * (-PI * s * s / 4.0).exp()
}

pub fn poisson_pdf(s: f64) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    (-s).exp()
}

/// Sorts and collapses levels closer than `1e-12` times the spectrum scale.
/// Returns the merged list and how many levels were dropped.
pub fn merge_degenerate(energies: &[f64]) -> (Vec<f64>, usize) {
    let mut e = energies.to_vec();
    e.sort_by(f64::total_cmp);
    let (lo, hi) = match (e.first(), e.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return (e, 0),
    };
    let scale = lo.abs().max(hi.abs()).max(hi - lo).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    let before = e.len();
    e.dedup_by(|b, a| (*b - *a).abs() < tol);
    let merged = before - e.len();
    if merged > 0 {
        warn!("merged {merged} degenerate levels before computing statistics");
    }
    (e, merged)
}

/// Unfolded spacings of one spectrum segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingSample {
    pub s: Vec<f64>,
    /// Mean of the input levels.
    pub window_center: f64,
    /// Standard deviation of the input levels.
    pub window_width: f64,
}

impl SpacingSample {
    pub fn mean(&self) -> f64 {
        self.s.iter().sum::<f64>() / self.s.len().max(1) as f64
    }
}

/// Local unfolding: each raw spacing is divided by the mean of the `2 nu + 1`
/// raw spacings centred on it. Near the edges the window slides inward so it
/// always holds `2 nu + 1` spacings.
pub fn unfold(energies: &[f64], nu: usize) -> Result<SpacingSample> {
    let (e, _) = merge_degenerate(energies);
    let needed = 2 * nu + 2;
    if e.len() < needed {
        return Err(Error::TooFewLevels {
            needed,
            got: e.len(),
        });
    }
    let d: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
    let width = 2 * nu + 1;
    let mut prefix = Vec::with_capacity(d.len() + 1);
    prefix.push(0.0);
    for x in &d {
        prefix.push(prefix.last().unwrap() + x);
    }
    let s = (0..d.len())
        .map(|k| {
            let start = k.saturating_sub(nu).min(d.len() - width);
            let mean = (prefix[start + width] - prefix[start]) / width as f64;
            d[k] / mean
        })
        .collect();
    let n = e.len() as f64;
    let center = e.iter().sum::<f64>() / n;
    let var = e.iter().map(|x| (x - center).powi(2)).sum::<f64>() / n;
    Ok(SpacingSample {
        s,
        window_center: center,
        window_width: var.sqrt(),
    })
}

/// `r_k = min(d_k, d_{k-1}) / max(d_k, d_{k-1})` over raw spacings, for
/// `k = 1 .. len - 2`. Input must be sorted ascending.
pub fn ratio_sequence(energies: &[f64]) -> Result<Vec<f64>> {
    if energies.len() < 3 {
        return Err(Error::TooFewLevels {
            needed: 3,
            got: energies.len(),
        });
    }
    let d: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    if let Some(bad) = d.iter().position(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidArgument {
            name: "energies",
            reason: format!("levels not ascending at index {bad}"),
        });
    }
    d.windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (lo, hi) = if w[0] <= w[1] {
                (w[0], w[1])
            } else {
                (w[1], w[0])
            };
            if hi == 0.0 {
                Err(Error::ZeroSpacing { index: i + 1 })
            } else {
                Ok(lo / hi)
            }
        })
        .collect()
}

pub fn mean_ratio(energies: &[f64]) -> Result<f64> {
    let r = ratio_sequence(energies)?;
    Ok(r.iter().sum::<f64>() / r.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    pub epsilon_center: f64,
    pub r_mean: f64,
    pub n_levels: usize,
}

/// Sliding-window `<r>` over scaled energies. Windows hold `window` consecutive
/// levels and advance by `stride`; degenerate levels are merged first.
pub fn windowed_mean_ratio(
    epsilons: &[f64],
    window: usize,
    stride: usize,
) -> Result<Vec<RatioPoint>> {
    if window < MIN_WINDOW {
        return Err(Error::InvalidArgument {
            name: "window",
            reason: format!("{window} is below the minimum of {MIN_WINDOW} levels"),
        });
    }
    if stride == 0 {
        return Err(Error::InvalidArgument {
            name: "stride",
            reason: "must be positive".into(),
        });
    }
    let (e, _) = merge_degenerate(epsilons);
    if e.len() < window {
        return Err(Error::TooFewLevels {
            needed: window,
            got: e.len(),
        });
    }
    let mut out = Vec::new();
    let mut start = 0;
    while start + window <= e.len() {
        let w = &e[start..start + window];
        out.push(RatioPoint {
            epsilon_center: w.iter().sum::<f64>() / window as f64,
            r_mean: mean_ratio(w)?,
            n_levels: window,
        });
        start += stride;
    }
    Ok(out)
}

fn interpolate(curve: &[RatioPoint], x: f64) -> (f64, f64) {
    let i = curve.partition_point(|p| p.epsilon_center < x);
    if i == 0 {
        return (curve[0].r_mean, curve[0].n_levels as f64);
    }
    if i == curve.len() {
        let p = curve[curve.len() - 1];
        return (p.r_mean, p.n_levels as f64);
    }
    let (a, b) = (curve[i - 1], curve[i]);
    let t = (x - a.epsilon_center) / (b.epsilon_center - a.epsilon_center);
    (
        a.r_mean + t * (b.r_mean - a.r_mean),
        a.n_levels as f64 + t * (b.n_levels as f64 - a.n_levels as f64),
    )
}

/// Averages several ratio curves on a common energy grid spanning their
/// overlap. The result does not depend on the order of `curves`.
pub fn average_curves(curves: &[Vec<RatioPoint>], grid_points: usize) -> Result<Vec<RatioPoint>> {
    if curves.is_empty() || curves.iter().any(|c| c.is_empty()) {
        return Err(Error::TooFewLevels { needed: 1, got: 0 });
    }
    let lo = curves
        .iter()
        .map(|c| c[0].epsilon_center)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = curves
        .iter()
        .map(|c| c[c.len() - 1].epsilon_center)
        .fold(f64::INFINITY, f64::min);
    if !(lo <= hi) {
        return Err(Error::InvalidArgument {
            name: "curves",
            reason: "ratio curves do not overlap in energy".into(),
        });
    }
    let points = if lo == hi { 1 } else { grid_points.max(2) };
    let mut out = Vec::with_capacity(points);
    for g in 0..points {
        let x = if points == 1 {
            lo
        } else {
            lo + (hi - lo) * g as f64 / (points - 1) as f64
        };
        let mut rs: Vec<f64> = Vec::with_capacity(curves.len());
        let mut ns: Vec<f64> = Vec::with_capacity(curves.len());
        for c in curves {
            let (r, n) = interpolate(c, x);
            rs.push(r);
            ns.push(n);
        }
        // Sum in sorted order so the float result is order-independent.
        rs.sort_by(f64::total_cmp);
        ns.sort_by(f64::total_cmp);
        out.push(RatioPoint {
            epsilon_center: x,
            r_mean: rs.iter().sum::<f64>() / rs.len() as f64,
            n_levels: ns.iter().sum::<f64>().round() as usize,
        });
    }
    Ok(out)
}

/// Anderson-Darling `A^2` of `samples` against `model`, without small-sample
/// corrections. A zero sample against the Wigner CDF gives `+inf`.
pub fn anderson_darling(samples: &[f64], model: RefModel) -> Result<f64> {
    const MIN: usize = 20;
    if samples.len() < MIN {
        return Err(Error::TooFewSamples {
            needed: MIN,
            got: samples.len(),
        });
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "samples",
            reason: "non-finite sample".into(),
        });
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let ln_f = (-model.log_survival(x[i]).exp_m1()).ln();
        let ln_sf = model.log_survival(x[n - 1 - i]);
        acc += (2 * i + 1) as f64 * (ln_f + ln_sf);
    }
    Ok(-(n as f64) - acc / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub density: f64,
    pub goe_pdf_mid: f64,
    pub poisson_pdf_mid: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingHistogram {
    pub bins: Vec<HistogramBin>,
    /// Fraction of samples above `s_max`, left out of the histogram.
    pub clipped_fraction: f64,
}

/// Density-normalised histogram on `[0, s_max]` with both reference pdfs at
/// the bin midpoints. Samples above `s_max` are dropped (warning above 1%).
pub fn spacing_histogram(
    sample: &SpacingSample,
    bins: usize,
    s_max: f64,
) -> Result<SpacingHistogram> {
    if sample.s.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if bins == 0 || !(s_max > 0.0) {
        return Err(Error::InvalidArgument {
            name: "bins",
            reason: "need at least one bin and a positive s_max".into(),
        });
    }
    let width = s_max / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut clipped = 0usize;
    for &s in &sample.s {
        if s > s_max {
            clipped += 1;
        } else {
            counts[((s / width) as usize).min(bins - 1)] += 1;
        }
    }
    let clipped_fraction = clipped as f64 / sample.s.len() as f64;
    if clipped_fraction > 0.01 {
        warn!(
            "{:.2}% of spacings exceed s_max = {s_max} and were left out of the histogram",
            100.0 * clipped_fraction
        );
    }
    let kept = (sample.s.len() - clipped).max(1) as f64;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let left = i as f64 * width;
            let right = if i + 1 == bins {
                s_max
            } else {
                (i + 1) as f64 * width
            };
            let mid = 0.5 * (left + right);
            HistogramBin {
                left,
                right,
                density: c as f64 / (kept * (right - left)),
                goe_pdf_mid: goe_pdf(mid),
                poisson_pdf_mid: poisson_pdf(mid),
            }
        })
        .collect();
    Ok(SpacingHistogram {
        bins,
        clipped_fraction,
    })
}

/// Inverse-transform draws from the Wigner surmise.
pub fn sample_goe_spacings<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            (-4.0 * (-u).ln_1p() / PI).sqrt()
        })
        .collect()
}

pub fn sample_poisson_spacings<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| -(-rng.random::<f64>()).ln_1p()).collect()
}

/// Spectrum of one `n x n` matrix from the Gaussian orthogonal ensemble.
#[allow(clippy::needless_range_loop)]
pub fn sample_goe_spectrum<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        m[i][i] = d * 2f64.sqrt();
        for j in i + 1..n {
            let x: f64 = StandardNormal.sample(rng);
            m[i][j] = x;
            m[j][i] = x;
        }
    }
    let op = SymmetricOperator::from_dense(&m, BasisTag::Full)?;
    Ok(eigenvalues(&op)?.energies)
}

/// Running sum of i.i.d. uniform positions, sorted: a Poisson spectrum.
pub fn sample_poisson_spectrum<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * n as f64).collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Logs the headline numbers of an `A^2` test.
pub fn log_fit(label: &str, a2: f64) {
    let verdict = if a2 <= AD_THRESHOLD {
        "consistent"
    } else {
        "rejected"
    };
    info!("{label}: A^2 = {a2:.3} ({verdict} at threshold {AD_THRESHOLD})");
}
