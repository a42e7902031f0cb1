//! Self-similarity and cross-similarity distances of the Julia set and the
//! Mandelbrot boundary at a Misiurewicz point.
//!
//! Level `n` looks at scale `sep |mu|^-n`, where `sep` is the distance from the
//! landing point to the rest of the postcritical set. The Julia side pulls a
//! base sample (within `sep / |mu|` of the landing point, but not within
//! rounding distance of it) back `n - 1` times
//! by the local inverse branch of `f^p`; the Mandelbrot side classifies a grid
//! around `c` and keeps the band `sep |mu|^-(n+1) <= |nu (c' - c)| <= sep |mu|^-n`.
//! Both are reduced to the fundamental annulus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hausdorff::max_gap;
use super::sampling::{pull_back, sample_julia, sample_mandelbrot_boundary, Window};
use super::{hausdorff_annulus, rescale_to_annulus, Band, PointCloud};
use crate::backward::AnnulusCloud;
use crate::complex::BigComplex;
use crate::error::{Error, Result};
use crate::misiurewicz::MisiurewiczData;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub n_from: usize,
    pub n_to: usize,
    /// Mandelbrot grid cell in rescaled units (`|nu| |mu|^n` times parameter units).
    pub h: f64,
    /// Number of inverse-iteration samples of the Julia set.
    pub depth: usize,
    pub seed_state: u64,
    /// Escape-time iterations beyond `k + p n`; `None` uses [`escape_budget`].
    pub escape_extra: Option<usize>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { n_from: 1, n_to: 6, h: 0.01, depth: 20_000, seed_state: 1, escape_extra: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanLeiReport {
    pub config: ReportConfig,
    pub separation: f64,
    /// `(n, #J_n, #M_n)`.
    pub counts: Vec<(usize, usize, usize)>,
    /// (a) `(n, d_H(J_n, J_{n+1}))`.
    pub julia_self: Vec<(usize, f64)>,
    /// (b) `(n, d_H(M_n, M_{n+1}))`.
    pub mandelbrot_self: Vec<(usize, f64)>,
    /// (c) `d_H(J_N, M_N)` at the deepest level.
    pub cross: f64,
    /// Largest nearest-neighbour gaps of the deepest clouds.
    pub julia_resolution: f64,
    pub mandelbrot_resolution: f64,
}

/// Julia images `J_n` for every level in the configured range.
pub fn julia_levels(base: &MisiurewiczData, config: &ReportConfig) -> Result<Vec<AnnulusCloud>> {
    let sep = base.separation()?;
    let mu_abs = base.mu.abs_f64();
    let landing = base.landing_point();
    let julia = sample_julia(&base.c, config.depth, config.seed_state)?;
    let radius = sep / mu_abs;
    // offsets near the working precision would be magnified into noise
    let floor = sep * base.prec.tolerance(base.prec.bits() * 2 / 3).to_f64();
    let near: Vec<BigComplex> = julia
        .points
        .into_iter()
        .filter(|z| {
            let d = z.dist(landing).to_f64();
            floor <= d && d <= radius
        })
        .collect();
    let all = Band { inner: 0.0, outer: f64::INFINITY };
    (config.n_from..=config.n_to)
        .map(|n| {
            let points = near
                .par_iter()
                .map(|z| pull_back(base, z, n - 1))
                .collect::<Result<Vec<_>>>()?;
            let cloud = PointCloud { points, meta: julia.meta.clone() };
            rescale_to_annulus(&cloud, landing, &base.mu, &BigComplex::one(base.prec), all)
        })
        .collect()
}

/// Iterations beyond `k + p n` for the Mandelbrot grid: `p ceil(log_|mu| (1/h)) + 8`.
///
/// A parameter at rescaled distance `delta` from the limit set shadows the
/// cycle for about `log_|mu| (1/delta)` further periods before escaping, so
/// this budget thickens the sampled set by roughly one grid cell at every
/// level; the constant covers the final escape from unit scale.
pub fn escape_budget(base: &MisiurewiczData, h: f64) -> usize {
    let cycles = ((1.0 / h).ln() / base.mu.abs_f64().ln()).ceil().max(0.0) as usize;
    base.p * cycles + 8
}

/// Mandelbrot images `M_n` for every level in the configured range.
pub fn mandelbrot_levels(base: &MisiurewiczData, config: &ReportConfig) -> Result<Vec<AnnulusCloud>> {
    let sep = base.separation()?;
    let mu_abs = base.mu.abs_f64();
    let nu_abs = base.nu.abs_f64();
    let extra = config.escape_extra.unwrap_or_else(|| escape_budget(base, config.h));
    (config.n_from..=config.n_to)
        .map(|n| {
            let scale = sep * mu_abs.powi(-(n as i32));
            let unit = mu_abs.powi(-(n as i32)) / nu_abs;
            let window = Window::square(base.c.clone(), scale / nu_abs);
            let cloud = sample_mandelbrot_boundary(&window, config.h * unit, base.k + base.p * n + extra)?;
            let band = Band { inner: scale / mu_abs, outer: scale };
            rescale_to_annulus(&cloud, &base.c, &base.mu, &base.nu, band)
        })
        .collect()
}

pub fn tan_lei_report(base: &MisiurewiczData, config: &ReportConfig) -> Result<TanLeiReport> {
    if config.n_from == 0 || config.n_from > config.n_to {
        return Err(Error::InvalidArgument(format!(
            "level range {}..{} must be non-empty and start at 1 or later",
            config.n_from, config.n_to
        )));
    }
    let julia = julia_levels(base, config)?;
    let mandelbrot = mandelbrot_levels(base, config)?;
    let successive = |levels: &[AnnulusCloud]| -> Result<Vec<(usize, f64)>> {
        levels
            .windows(2)
            .zip(config.n_from..)
            .map(|(pair, n)| Ok((n, hausdorff_annulus(&pair[0], &pair[1])?)))
            .collect()
    };
    let (deep_j, deep_m) = (julia.last().unwrap(), mandelbrot.last().unwrap());
    let counts = julia
        .iter()
        .zip(&mandelbrot)
        .zip(config.n_from..)
        .map(|((j, m), n)| (n, j.len(), m.len()))
        .collect();
    Ok(TanLeiReport {
        config: config.clone(),
        separation: base.separation()?,
        counts,
        julia_self: successive(&julia)?,
        mandelbrot_self: successive(&mandelbrot)?,
        cross: hausdorff_annulus(deep_j, deep_m)?,
        julia_resolution: max_gap(&deep_j.approx(), deep_j.metric())?,
        mandelbrot_resolution: max_gap(&deep_m.approx(), deep_m.metric())?,
    })
}

impl TanLeiReport {
    /// Rows `series,n,value` for the three distance families and the resolutions.
    pub fn to_csv(&self) -> String {
        let mut table = crate::export::CsvTable::new(["series", "n", "value"]);
        for (n, d) in &self.julia_self {
            table.push(vec!["julia_self".into(), n.to_string(), format!("{d:e}")]);
        }
        for (n, d) in &self.mandelbrot_self {
            table.push(vec!["mandelbrot_self".into(), n.to_string(), format!("{d:e}")]);
        }
        let deepest = self.config.n_to.to_string();
        table.push(vec!["cross".into(), deepest.clone(), format!("{:e}", self.cross)]);
        table.push(vec!["julia_resolution".into(), deepest.clone(), format!("{:e}", self.julia_resolution)]);
        table.push(vec!["mandelbrot_resolution".into(), deepest, format!("{:e}", self.mandelbrot_resolution)]);
        table.render()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Precision;
    use crate::misiurewicz::solve_misiurewicz;

    fn tip() -> MisiurewiczData {
        let p = Precision::new(128).unwrap();
        solve_misiurewicz(2, 1, &BigComplex::new(p, -1.9, 0.0), p).unwrap()
    }

    #[test]
    fn single_level_has_only_the_cross_distance() {
        let config = ReportConfig { n_from: 3, n_to: 3, h: 0.05, depth: 4000, ..ReportConfig::default() };
        let report = tan_lei_report(&tip(), &config).unwrap();
        assert!(report.julia_self.is_empty() && report.mandelbrot_self.is_empty());
        assert!(report.cross.is_finite());
        assert_eq!(report.counts.len(), 1);
    }

    #[test]
    fn escape_budget_examples() {
        // |mu| = 4, h = 0.01: ceil(log_4 100) = 4
        assert_eq!(escape_budget(&tip(), 0.01), 12);
        assert_eq!(escape_budget(&tip(), 2.0), 8);
    }

    #[test]
    fn invalid_ranges() {
        let bad = ReportConfig { n_from: 0, ..ReportConfig::default() };
        assert!(tan_lei_report(&tip(), &bad).is_err());
        let bad = ReportConfig { n_from: 4, n_to: 3, ..ReportConfig::default() };
        assert!(tan_lei_report(&tip(), &bad).is_err());
    }
}
