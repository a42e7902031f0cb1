//! Hausdorff distance between finite planar clouds, in the plane or on the
//! fundamental annulus of `E_mu`.
//!
//! Distances are evaluated in `f64` with `f64::hypot`; the bucketed search
//! returns exactly the value of the plain double loop.

use crate::error::{Error, Result};

pub type C64 = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Euclidean,
    /// `min_{k in {-1,0,1}} |a - b mu^k|`.
    Annulus { mu: C64 },
}

pub fn mul(a: C64, b: C64) -> C64 {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// `1 / mu` as `(re / |mu|^2, -im / |mu|^2)`.
pub fn inv(mu: C64) -> C64 {
    let n2 = mu.0 * mu.0 + mu.1 * mu.1;
    (mu.0 / n2, -mu.1 / n2)
}

pub fn dist(a: C64, b: C64) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

impl Metric {
    /// Representatives of `b` compared against: `b`, and `b / mu`, `b mu` on the annulus.
    pub fn images(&self, b: C64) -> Vec<C64> {
        match *self {
            Metric::Euclidean => vec![b],
            Metric::Annulus { mu } => vec![b, mul(b, inv(mu)), mul(b, mu)],
        }
    }

    pub fn distance(&self, a: C64, b: C64) -> f64 {
        self.images(b).into_iter().map(|w| dist(a, w)).fold(f64::INFINITY, f64::min)
    }
}

/// Uniform buckets over a point set for nearest-neighbour queries.
struct Buckets {
    points: Vec<C64>,
    /// Owner index of each stored point (several images share one owner).
    owners: Vec<usize>,
    origin: C64,
    cell: f64,
    nx: i64,
    ny: i64,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(points: Vec<C64>, owners: Vec<usize>) -> Self {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in &points {
            lo = (lo.0.min(p.0), lo.1.min(p.1));
            hi = (hi.0.max(p.0), hi.1.max(p.1));
        }
        let span = (hi.0 - lo.0).max(hi.1 - lo.1);
        let per_side = (points.len() as f64).sqrt().ceil().max(1.0);
        let cell = if span > 0.0 { span / per_side } else { 1.0 };
        let nx = ((hi.0 - lo.0) / cell).floor() as i64 + 1;
        let ny = ((hi.1 - lo.1) / cell).floor() as i64 + 1;
        let mut cells = vec![Vec::new(); (nx * ny) as usize];
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = (((p.0 - lo.0) / cell).floor() as i64, ((p.1 - lo.1) / cell).floor() as i64);
            cells[(cx.clamp(0, nx - 1) * ny + cy.clamp(0, ny - 1)) as usize].push(i);
        }
        Buckets { points, owners, origin: lo, cell, nx, ny, cells }
    }

    /// Minimum distance from `q` to stored points not owned by `exclude`; the
    /// search may stop early once a distance `< stop_below` is seen.
    fn nearest(&self, q: C64, exclude: Option<usize>, stop_below: f64) -> f64 {
        let qx = ((q.0 - self.origin.0) / self.cell).floor();
        let qy = ((q.1 - self.origin.1) / self.cell).floor();
        let limit = (self.nx + self.ny + 2) as f64;
        if qx.abs() > limit || qy.abs() > limit {
            return self.scan(q, exclude);
        }
        let (qx, qy) = (qx as i64, qy as i64);
        let max_ring = (qx.abs() + self.nx).max(qy.abs() + self.ny) + 1;
        let mut best = f64::INFINITY;
        for r in 0..=max_ring {
            for cx in (qx - r).max(0)..=(qx + r).min(self.nx - 1) {
                let on_edge = cx == qx - r || cx == qx + r;
                let ys: Vec<i64> = if on_edge {
                    ((qy - r).max(0)..=(qy + r).min(self.ny - 1)).collect()
                } else {
                    [qy - r, qy + r].into_iter().filter(|y| (0..self.ny).contains(y)).collect()
                };
                for cy in ys {
                    for &i in &self.cells[(cx * self.ny + cy) as usize] {
                        if Some(self.owners[i]) == exclude {
                            continue;
                        }
                        let d = dist(q, self.points[i]);
                        if d < best {
                            best = d;
                            if best < stop_below {
                                return best;
                            }
                        }
                    }
                }
            }
            // everything beyond ring r lies farther than r * cell; two cells
            // of margin absorb rounding in the cell index and in hypot
            if best <= (r as f64 - 2.0) * self.cell {
                break;
            }
        }
        best
    }

    fn scan(&self, q: C64, exclude: Option<usize>) -> f64 {
        self.points
            .iter()
            .zip(&self.owners)
            .filter(|(_, &o)| Some(o) != exclude)
            .map(|(&p, _)| dist(q, p))
            .fold(f64::INFINITY, f64::min)
    }
}

fn buckets_for(b: &[C64], metric: Metric) -> Buckets {
    let mut points = Vec::with_capacity(b.len() * 3);
    let mut owners = Vec::with_capacity(b.len() * 3);
    for (i, &p) in b.iter().enumerate() {
        for w in metric.images(p) {
            points.push(w);
            owners.push(i);
        }
    }
    Buckets::new(points, owners)
}

/// `sup_{a in A} min_{b in B} d(a, b)`.
pub fn directed(a: &[C64], b: &[C64], metric: Metric) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let buckets = buckets_for(b, metric);
    let mut worst = 0.0f64;
    for &p in a {
        // a point already closer than the running sup cannot raise it
        let d = buckets.nearest(p, None, worst);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

pub fn hausdorff_f64(a: &[C64], b: &[C64], metric: Metric) -> Result<f64> {
    Ok(directed(a, b, metric)?.max(directed(b, a, metric)?))
}

/// Largest nearest-neighbour distance within a cloud: a proxy for the
/// sampling resolution. Zero for a single point.
pub fn max_gap(points: &[C64], metric: Metric) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if points.len() == 1 {
        return Ok(0.0);
    }
    let buckets = buckets_for(points, metric);
    let mut worst = 0.0f64;
    for (i, &p) in points.iter().enumerate() {
        let d = buckets.nearest(p, Some(i), worst);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Greedy thinning: keep a point unless a kept point lies within `radius`.
pub fn thin(points: &[C64], radius: f64) -> Vec<usize> {
    if radius <= 0.0 {
        let mut seen = std::collections::HashSet::new();
        return (0..points.len())
            .filter(|&i| seen.insert((points[i].0.to_bits(), points[i].1.to_bits())))
            .collect();
    }
    // buckets no smaller than the radius, nor so small that keys saturate
    let span = points.iter().fold(0.0f64, |m, p| m.max(p.0.abs()).max(p.1.abs()));
    let cell = radius.max(span / (points.len() as f64).sqrt().max(1.0)).max(f64::MIN_POSITIVE);
    let mut grid: std::collections::HashMap<(i64, i64), Vec<usize>> = std::collections::HashMap::new();
    let mut kept = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        let key = ((p.0 / cell).floor() as i64, (p.1 / cell).floor() as i64);
        let clash = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                grid.get(&(key.0 + dx, key.1 + dy))
                    .is_some_and(|ids| ids.iter().any(|&j| dist(p, points[j]) < radius))
            })
        });
        if !clash {
            grid.entry(key).or_default().push(i);
            kept.push(i);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: &[C64], b: &[C64], metric: Metric) -> f64 {
        let one = |x: &[C64], y: &[C64]| {
            x.iter()
                .map(|&p| y.iter().map(|&q| metric.distance(p, q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one(a, b).max(one(b, a))
    }

    #[test]
    fn small_examples() {
        let e = Metric::Euclidean;
        assert_eq!(hausdorff_f64(&[(0.0, 0.0)], &[(0.0, 0.0), (1.0, 0.0)], e).unwrap(), 1.0);
        let a = [(0.5, 0.25), (-3.0, 2.0)];
        assert_eq!(hausdorff_f64(&a, &a, e).unwrap(), 0.0);
        assert_eq!(hausdorff_f64(&[], &a, e).unwrap_err(), Error::EmptyCloud);
    }

    #[test]
    fn annulus_identifies_the_boundary_circles() {
        let m = Metric::Annulus { mu: (4.0, 0.0) };
        // 1.01 and 3.99 are neighbours across the identification; the
        // directions see 3.99 / 4 and 1.01 * 4 respectively
        let d = hausdorff_f64(&[(1.01, 0.0)], &[(3.99, 0.0)], m).unwrap();
        assert!((d - 0.05).abs() < 1e-14, "{d}");
        assert!(d <= hausdorff_f64(&[(1.01, 0.0)], &[(3.99, 0.0)], Metric::Euclidean).unwrap());
    }

    #[test]
    fn clustered_and_far_clouds_match_brute_force() {
        let a: Vec<C64> = (0..40).map(|i| ((i as f64).sin() * 1e-3, (i as f64 * 0.7).cos() * 1e-3)).collect();
        let mut b: Vec<C64> = (0..30).map(|i| (5.0 + (i as f64).cos(), (i as f64 * 1.3).sin())).collect();
        b.push((0.0, 0.0));
        for metric in [Metric::Euclidean, Metric::Annulus { mu: (1.2, 5.1) }] {
            assert_eq!(hausdorff_f64(&a, &b, metric).unwrap(), brute(&a, &b, metric));
        }
    }

    #[test]
    fn gap_and_thinning() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (3.0, 0.0)];
        assert_eq!(max_gap(&pts, Metric::Euclidean).unwrap(), 2.0);
        assert_eq!(thin(&pts, 0.0), vec![0, 1, 3]);
        assert_eq!(thin(&pts, 1.5), vec![0, 3]);
    }
}
