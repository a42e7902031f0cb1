//! Finite samples of Julia sets and of the Mandelbrot boundary.

use rayon::prelude::*;

use super::hausdorff::{max_gap, thin, Metric, C64};
use super::{CloudMeta, PointCloud};
use crate::complex::BigComplex;
use crate::dynamics::{BranchSelector, QuadraticMap};
use crate::error::{Error, Result};
use crate::misiurewicz::MisiurewiczData;

const LCG_MUL: u64 = 6364136223846793005;
const LCG_INC: u64 = 1442695040888963407;

/// `state -> state * 6364136223846793005 + 1442695040888963407 (mod 2^64)`;
/// the top bit of the new state picks the square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_bit(&mut self) -> bool {
        self.0 = self.0.wrapping_mul(LCG_MUL).wrapping_add(LCG_INC);
        self.0 >> 63 == 1
    }
}

/// A repelling fixed point `(1 +- sqrt(1 - 4c)) / 2`, preferring `beta` (the `+` root).
pub fn repelling_fixed_point(c: &BigComplex) -> Result<BigComplex> {
    let prec = c.prec();
    let one = BigComplex::one(prec);
    let disc = (&one - &c.scale(4.0)).sqrt();
    for root in [&one + &disc, &one - &disc] {
        let z = root.scale(0.5);
        // |f'(z)| = |2z| > 1
        if z.is_finite() && z.abs_f64() > 0.5 + 1e-12 {
            return Ok(z);
        }
    }
    Err(Error::NoRepellingSeed)
}

/// `count` points of `J(f_c)` by inverse iteration from a repelling fixed
/// point, branches drawn from an LCG seeded with `seed_state`.
///
/// The declared resolution is the largest nearest-neighbour gap. Only
/// numerical duplicates (closer than `2^-(P/2)`) are dropped: thinning at a
/// fraction of the gap would discard the density near the cycle that the
/// rescaled images depend on.
pub fn sample_julia(c: &BigComplex, count: usize, seed_state: u64) -> Result<PointCloud> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let prec = c.prec();
    let f = QuadraticMap::new(c, prec);
    let mut rng = Lcg(seed_state);
    let mut z = repelling_fixed_point(c)?;
    let mut raw = Vec::with_capacity(count);
    for _ in 0..count {
        let root = f.inverse_step(&z, &BranchSelector::Principal)?;
        z = if rng.next_bit() { -root } else { root };
        raw.push(z.clone());
    }
    let approx: Vec<C64> = raw.iter().map(BigComplex::to_f64_pair).collect();
    let distinct: Vec<C64> = thin(&approx, 0.0).into_iter().map(|i| approx[i]).collect();
    let resolution = max_gap(&distinct, Metric::Euclidean)?;
    let keep = thin(&approx, prec.tolerance(prec.bits() / 2).to_f64());
    let points = keep.into_iter().map(|i| raw[i].clone()).collect();
    Ok(PointCloud {
        points,
        meta: CloudMeta {
            source: format!("julia c={} count={count} seed={seed_state}", c.to_decimal(17)),
            window: "disc |z| <= 2".into(),
            resolution,
            precision: prec.bits(),
        },
    })
}

/// The inverse branch of `f^p` near the landing point that fixes it,
/// applied `times` times; each step picks the root nearest the cycle point
/// it must approach.
pub fn pull_back(data: &MisiurewiczData, z: &BigComplex, times: usize) -> Result<BigComplex> {
    let f = data.map();
    let p = data.p;
    let mut w = z.with_prec(data.prec);
    for _ in 0..times {
        for step in 1..=p {
            let target = &data.orbit[(p - step % p) % p];
            w = f.inverse_step(&w, &BranchSelector::NearestTo(target.clone()))?;
        }
    }
    Ok(w)
}

/// Axis-aligned rectangle `center +- (half_width, half_height)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub center: BigComplex,
    pub half_width: f64,
    pub half_height: f64,
}

impl Window {
    pub fn square(center: BigComplex, half_width: f64) -> Self {
        Window { center, half_width, half_height: half_width }
    }
}

/// Escape-time classification of `center + offset` by perturbation around the
/// reference orbit of `center`, rebasing when the orbit approaches 0.
struct Perturbation {
    reference: Vec<C64>,
    max_iter: usize,
}

impl Perturbation {
    fn new(center: &BigComplex, max_iter: usize) -> Self {
        let mut reference = vec![(0.0, 0.0)];
        let mut z = BigComplex::zero(center.prec());
        for _ in 0..max_iter {
            z = z.square() + center;
            let pair = z.to_f64_pair();
            reference.push(pair);
            if !z.is_finite() || pair.0.hypot(pair.1) > 2.0 {
                break;
            }
        }
        Perturbation { reference, max_iter }
    }

    /// `true` if the orbit stays within radius 2 for `max_iter` steps.
    fn bounded(&self, dc: C64) -> bool {
        let mut d = (0.0f64, 0.0f64);
        let mut j = 0usize;
        for _ in 0..self.max_iter {
            let z_ref = self.reference[j];
            // d <- (2 Z + d) d + dc
            let two_z = (2.0 * z_ref.0 + d.0, 2.0 * z_ref.1 + d.1);
            d = (two_z.0 * d.0 - two_z.1 * d.1 + dc.0, two_z.0 * d.1 + two_z.1 * d.0 + dc.1);
            j += 1;
            let z = (self.reference[j].0 + d.0, self.reference[j].1 + d.1);
            let r2 = z.0 * z.0 + z.1 * z.1;
            if !r2.is_finite() || r2 > 4.0 {
                return false;
            }
            if r2 < d.0 * d.0 + d.1 * d.1 || j + 1 >= self.reference.len() {
                d = z;
                j = 0;
            }
        }
        true
    }
}

/// Centers of grid cells (side `h`, one cell centred on the window center)
/// whose boundedness flag differs from a 4-neighbour.
pub fn sample_mandelbrot_boundary(window: &Window, h: f64, max_iter: usize) -> Result<PointCloud> {
    let sizes = [h, window.half_width, window.half_height];
    if sizes.iter().any(|x| x.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::InvalidArgument("window and cell size must be positive".into()));
    }
    let kx = (window.half_width / h).ceil() as i64;
    let ky = (window.half_height / h).ceil() as i64;
    let engine = Perturbation::new(&window.center, max_iter);
    let width = (2 * kx + 1) as usize;
    let flags: Vec<Vec<bool>> = (-ky..=ky)
        .into_par_iter()
        .map(|j| (-kx..=kx).map(|i| engine.bounded((i as f64 * h, j as f64 * h))).collect())
        .collect();
    let height = flags.len();
    let mut offsets = Vec::new();
    for (row, line) in flags.iter().enumerate() {
        for col in 0..width {
            let here = line[col];
            let differs = (col > 0 && line[col - 1] != here)
                || (col + 1 < width && line[col + 1] != here)
                || (row > 0 && flags[row - 1][col] != here)
                || (row + 1 < height && flags[row + 1][col] != here);
            if differs {
                offsets.push(((col as i64 - kx) as f64 * h, (row as i64 - ky) as f64 * h));
            }
        }
    }
    if offsets.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let prec = window.center.prec();
    let points = offsets
        .into_iter()
        .map(|(x, y)| &window.center + &BigComplex::new(prec, x, y))
        .collect();
    Ok(PointCloud {
        points,
        meta: CloudMeta {
            source: format!("mandelbrot boundary max_iter={max_iter}"),
            window: format!(
                "center={} half_width={:e} half_height={:e}",
                window.center.to_decimal(17),
                window.half_width,
                window.half_height
            ),
            resolution: h,
            precision: prec.bits(),
        },
    })
}
