//! Asymptotic self-similarity of `J(f_c)` and of `M` near a Misiurewicz point,
//! measured by Hausdorff distances on the fundamental annulus of `E_mu`.

pub mod hausdorff;
pub mod report;
pub mod sampling;

use rug::Float;

use crate::backward::{reduce_to_annulus, AnnulusCloud};
use crate::complex::BigComplex;
use crate::error::{Error, Result};
use hausdorff::{hausdorff_f64, Metric, C64};

pub use report::{tan_lei_report, ReportConfig, TanLeiReport};
pub use sampling::{pull_back, sample_julia, sample_mandelbrot_boundary, Window};

#[derive(Debug, Clone, PartialEq)]
pub struct CloudMeta {
    pub source: String,
    pub window: String,
    /// Sampling resolution the cloud was produced at.
    pub resolution: f64,
    pub precision: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<BigComplex>,
    pub meta: CloudMeta,
}

impl PointCloud {
    pub fn approx(&self) -> Vec<C64> {
        self.points.iter().map(BigComplex::to_f64_pair).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl AnnulusCloud {
    pub fn approx(&self) -> Vec<C64> {
        self.points.iter().map(BigComplex::to_f64_pair).collect()
    }

    pub fn metric(&self) -> Metric {
        Metric::Annulus { mu: self.mu.to_f64_pair() }
    }
}

/// Radial band `inner <= |z - center| <= outer`; `inner = 0` keeps every point
/// but the center itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub inner: f64,
    pub outer: f64,
}

/// `z -> reduce(pre_factor (z - center))` for the points of `cloud` whose
/// scaled offset `|pre_factor (z - center)|` lies in `band`.
pub fn rescale_to_annulus(
    cloud: &PointCloud,
    center: &BigComplex,
    mu: &BigComplex,
    pre_factor: &BigComplex,
    band: Band,
) -> Result<AnnulusCloud> {
    if pre_factor.is_zero() {
        return Err(Error::ZeroInput);
    }
    let bits = center.prec().bits();
    let (inner, outer) = (Float::with_val(bits, band.inner), Float::with_val(bits, band.outer));
    let mut points = Vec::new();
    for z in &cloud.points {
        let offset = (pre_factor * &(z - center)).checked("rescaling")?;
        if offset.is_zero() {
            continue;
        }
        let r = offset.abs();
        if r < inner || r > outer {
            continue;
        }
        points.push(reduce_to_annulus(&offset, mu)?);
    }
    if points.is_empty() {
        return Err(Error::AllPointsFiltered);
    }
    AnnulusCloud::new(mu.clone(), points)
}

pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    hausdorff_f64(&a.approx(), &b.approx(), Metric::Euclidean)
}

/// Hausdorff distance under the annulus metric of `a.mu`.
pub fn hausdorff_annulus(a: &AnnulusCloud, b: &AnnulusCloud) -> Result<f64> {
    if a.mu != b.mu {
        return Err(Error::InvalidArgument("annulus clouds use different multipliers".into()));
    }
    hausdorff_f64(&a.approx(), &b.approx(), a.metric())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backward::sample_limit_set;
    use crate::complex::Precision;
    use crate::misiurewicz::solve_misiurewicz;

    fn prec() -> Precision {
        Precision::new(128).unwrap()
    }

    fn cx(re: f64, im: f64) -> BigComplex {
        BigComplex::new(prec(), re, im)
    }

    fn cloud(points: Vec<BigComplex>) -> PointCloud {
        PointCloud {
            points,
            meta: CloudMeta { source: "test".into(), window: String::new(), resolution: 0.0, precision: 128 },
        }
    }

    const ALL: Band = Band { inner: 0.0, outer: f64::INFINITY };

    #[test]
    fn center_is_dropped() {
        let mu = cx(4.0, 0.0);
        let c = cloud(vec![cx(1.0, 0.0), cx(1.5, 0.0), cx(3.0, 0.0)]);
        let out = rescale_to_annulus(&c, &cx(1.0, 0.0), &mu, &cx(1.0, 0.0), ALL).unwrap();
        assert_eq!(out.points, vec![cx(2.0, 0.0), cx(2.0, 0.0)]);
        let lone = cloud(vec![cx(1.0, 0.0)]);
        assert_eq!(
            rescale_to_annulus(&lone, &cx(1.0, 0.0), &mu, &cx(1.0, 0.0), ALL).unwrap_err(),
            Error::AllPointsFiltered
        );
    }

    #[test]
    fn reduction_multiplies_by_powers_of_mu() {
        let mu = cx(1.0, 2.0);
        let pts: Vec<BigComplex> = [0.01, 0.3, 7.0, 100.0].iter().map(|t| mu.scale(*t)).collect();
        let out = rescale_to_annulus(&cloud(pts.clone()), &cx(0.0, 0.0), &mu, &cx(1.0, 0.0), ALL).unwrap();
        for (z, w) in pts.iter().zip(&out.points) {
            let ratio = w / z;
            let k = (ratio.abs_f64().ln() / mu.abs_f64().ln()).round() as i64;
            let power = mu.powi(k).unwrap();
            assert!(ratio.dist(&power).to_f64() < 1e-30 * power.abs_f64());
        }
    }

    #[test]
    fn tip_julia_cloud_matches_the_limit_set() {
        let data = solve_misiurewicz(2, 1, &cx(-1.9, 0.0), prec()).unwrap();
        let julia = sample_julia(&data.c, 4000, 5).unwrap();
        let window = data.separation().unwrap() / data.mu.abs_f64();
        let near: Vec<BigComplex> = julia
            .points
            .iter()
            .filter(|z| z.dist(data.landing_point()).to_f64() <= window)
            .map(|z| pull_back(&data, z, 6).unwrap())
            .collect();
        let image = rescale_to_annulus(&cloud(near), data.landing_point(), &data.mu, &cx(1.0, 0.0), ALL).unwrap();
        assert!(image.points.iter().all(|z| z.im().to_f64().abs() < 1e-20));
        let limit = sample_limit_set(&data, 14, 1 << 16).unwrap();
        let d = hausdorff_annulus(&image, &limit).unwrap();
        assert!(d < 0.05, "{d}");
    }

    #[test]
    fn annulus_metric_never_exceeds_euclidean() {
        let mu = cx(0.5, 3.0);
        let a = AnnulusCloud::new(mu.clone(), vec![cx(1.1, 0.2), cx(-2.0, 1.0)]).unwrap();
        let b = AnnulusCloud::new(mu.clone(), vec![cx(2.9, 0.1), cx(0.0, -1.5)]).unwrap();
        let plain = hausdorff_f64(&a.approx(), &b.approx(), Metric::Euclidean).unwrap();
        assert!(hausdorff_annulus(&a, &b).unwrap() <= plain);
    }
}
