//! Branch-tracked backward orbits of the critical point toward the repelling
//! cycle, the scaled limit `x`, and samples of the self-similar limit set.

use rug::Float;

use crate::complex::{BigComplex, Precision};
use crate::dynamics::{BranchSelector, QuadraticMap, CLOSURE_SLACK};
use crate::error::{Error, Result};
use crate::misiurewicz::MisiurewiczData;

/// Longest forward itinerary searched when locating `f^j(q0) = 0`.
const MAX_ITINERARY: usize = 64;

/// Branch choice for each backward step.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchPolicy {
    /// The same selector at every step; a sign sequence is consumed cyclically.
    Uniform(BranchSelector),
    /// Step `j` (producing `q_j`, `j >= 1`) uses `selectors[(j - 1) % len]`.
    Cyclic(Vec<BranchSelector>),
    /// Step `j` targets `O[(-j) mod p]`, so `q_{p k}` approaches the landing point.
    TrackCycle,
}

impl BranchPolicy {
    /// Short text form used in exported records.
    pub fn label(&self) -> String {
        fn one(sel: &BranchSelector) -> String {
            match sel {
                BranchSelector::Principal => "principal".into(),
                BranchSelector::NearestTo(z) => format!("nearest({})", z.to_decimal(12)),
                BranchSelector::SignSequence(signs) => {
                    let s: Vec<String> = signs.iter().map(|s| if *s < 0 { "-".into() } else { "+".into() }).collect();
                    format!("signs({})", s.concat())
                }
            }
        }
        match self {
            BranchPolicy::Uniform(sel) => format!("uniform:{}", one(sel)),
            BranchPolicy::Cyclic(sels) => {
                format!("cyclic:{}", sels.iter().map(one).collect::<Vec<_>>().join(","))
            }
            BranchPolicy::TrackCycle => "track-cycle".into(),
        }
    }

    fn selector(&self, step: usize, orbit: &[BigComplex]) -> Result<BranchSelector> {
        match self {
            BranchPolicy::Uniform(BranchSelector::SignSequence(signs)) if !signs.is_empty() => {
                Ok(BranchSelector::SignSequence(vec![signs[(step - 1) % signs.len()]]))
            }
            BranchPolicy::Uniform(sel) => Ok(sel.clone()),
            BranchPolicy::Cyclic(sels) if sels.is_empty() => {
                Err(Error::InvalidArgument("cyclic branch policy needs at least one selector".into()))
            }
            BranchPolicy::Cyclic(sels) => Ok(sels[(step - 1) % sels.len()].clone()),
            BranchPolicy::TrackCycle => {
                let p = orbit.len();
                Ok(BranchSelector::NearestTo(orbit[(p - step % p) % p].clone()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardOrbit {
    pub base: MisiurewiczData,
    pub q0: BigComplex,
    /// Forward-itinerary chain `[0, ..., q0]` with `f(chain[i+1]) = chain[i]`.
    pub itinerary: Vec<BigComplex>,
    pub policy: BranchPolicy,
    /// `q_0, ..., q_N` with `f(q_{j+1}) = q_j`.
    pub points: Vec<BigComplex>,
    /// Residue `j0` of the subsequence `q_{j0 + p k}` approaching the landing point.
    pub residue: usize,
    /// `s_k = mu^k (q_{j0 + p k} - landing point)`.
    pub scaled: Vec<BigComplex>,
    pub prec: Precision,
}

impl BackwardOrbit {
    /// Index into `points` of the `k`-th term of the landing subsequence.
    pub fn subsequence_index(&self, k: usize) -> usize {
        self.residue + self.base.p * k
    }

    pub fn distance_to_cycle(&self, z: &BigComplex) -> Float {
        distance_to_set(z, &self.base.orbit)
    }

    /// `mu^k (q_{r + p k} - O[i])` along the residue class approaching `O[i]`.
    pub fn scaled_toward(&self, orbit_index: usize) -> Result<Vec<BigComplex>> {
        let target = self
            .base
            .orbit
            .get(orbit_index)
            .ok_or_else(|| Error::InvalidArgument(format!("orbit index {orbit_index} out of range")))?;
        let residue = nearest_residue(&self.points, self.base.p, target);
        scaled_tail(&self.points, residue, self.base.p, target, &self.base.mu)
    }
}

fn distance_to_set(z: &BigComplex, set: &[BigComplex]) -> Float {
    set.iter()
        .map(|o| z.dist(o))
        .min_by(|a, b| a.partial_cmp(b).expect("finite distances"))
        .expect("non-empty set")
}

/// Residue class whose last member lies closest to `target`.
fn nearest_residue(points: &[BigComplex], p: usize, target: &BigComplex) -> usize {
    let last = points.len() - 1;
    (0..p.min(points.len()))
        .min_by(|&a, &b| {
            let ja = last - (last + p - a) % p;
            let jb = last - (last + p - b) % p;
            points[ja]
                .dist(target)
                .partial_cmp(&points[jb].dist(target))
                .expect("finite distances")
        })
        .unwrap_or(0)
}

fn scaled_tail(
    points: &[BigComplex],
    residue: usize,
    p: usize,
    target: &BigComplex,
    mu: &BigComplex,
) -> Result<Vec<BigComplex>> {
    let mut out = Vec::new();
    let mut power = BigComplex::one(mu.prec());
    let mut j = residue;
    while j < points.len() {
        out.push((&power * (&points[j] - target)).checked("scaled tail")?);
        power = &power * mu;
        j += p;
    }
    Ok(out)
}

/// Precision floor `2 ceil(N / p) log2|mu| + extra` for an `N`-step orbit.
pub fn precision_floor(data: &MisiurewiczData, steps: usize, extra: u32) -> u32 {
    let cycles = steps.div_ceil(data.p) as f64;
    (2.0 * cycles * data.mu.abs_f64().log2()).ceil() as u32 + extra
}

/// Chain `[0, ..., q0]` of forward images of `q0` back to the critical point.
fn itinerary(f: &QuadraticMap, q0: &BigComplex) -> Result<Vec<BigComplex>> {
    let prec = f.prec();
    let tol = prec.tolerance(CLOSURE_SLACK);
    let mut chain = vec![q0.with_prec(prec)];
    while chain.last().unwrap().abs() > tol {
        if chain.len() > MAX_ITINERARY {
            return Err(Error::InvalidArgument(
                "q0 does not reach the critical point under forward iteration".into(),
            ));
        }
        let next = f.apply(chain.last().unwrap())?;
        chain.push(next);
    }
    // snap the rounding-level residue to the exact critical point
    *chain.last_mut().unwrap() = BigComplex::zero(prec);
    chain.reverse();
    Ok(chain)
}

/// `N` inverse steps from `q0`, branch chosen by `policy`.
pub fn backward_orbit(
    data: &MisiurewiczData,
    q0: &BigComplex,
    policy: BranchPolicy,
    steps: usize,
) -> Result<BackwardOrbit> {
    let prec = data.prec;
    prec.require(precision_floor(data, steps, 64), "the backward-orbit precision schedule")?;
    let f = data.map();
    let chain = itinerary(&f, q0)?;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(q0.with_prec(prec));
    for j in 1..=steps {
        let sel = policy.selector(j, &data.orbit)?;
        let next = f.inverse_step(points.last().unwrap(), &sel)?;
        points.push(next);
    }
    let p = data.p;
    let burn_in = 2 * p;
    let dists: Vec<Float> = points.iter().map(|z| distance_to_set(z, &data.orbit)).collect();
    for j in (burn_in + p)..dists.len() {
        if dists[j] >= dists[j - p] {
            return Err(Error::ContractionLost(j));
        }
    }
    let residue = nearest_residue(&points, p, &data.orbit[0]);
    let scaled = scaled_tail(&points, residue, p, &data.orbit[0], &data.mu)?;
    Ok(BackwardOrbit {
        base: data.clone(),
        q0: q0.with_prec(prec),
        itinerary: chain,
        policy,
        points,
        residue,
        scaled,
        prec,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub value: BigComplex,
    pub error: f64,
}

/// Tail estimate of `lim s_k / nu` with error `|s_K - s_{K-1}| / |nu|`.
pub fn limit_x(orbit: &BackwardOrbit) -> Result<LimitEstimate> {
    let s = &orbit.scaled;
    if s.len() < 4 {
        return Err(Error::NotConverged(format!("only {} scaled terms", s.len())));
    }
    let n = s.len();
    let last = s[n - 1].dist(&s[n - 2]);
    let before = s[n - 2].dist(&s[n - 3]);
    if !last.is_zero() && last >= before {
        return Err(Error::NotConverged(format!(
            "successive differences {} then {} do not shrink",
            before.to_f64(),
            last.to_f64()
        )));
    }
    let nu = &orbit.base.nu;
    let value = (&s[n - 1] / nu).checked("limit")?;
    if value.is_zero() {
        return Err(Error::NotConverged("limit vanishes".into()));
    }
    Ok(LimitEstimate {
        value,
        error: last.to_f64() / nu.abs_f64(),
    })
}

/// `z mu^k` for the unique `k` with `1 <= |z mu^k| < |mu|`.
pub fn reduce_to_annulus(z: &BigComplex, mu: &BigComplex) -> Result<BigComplex> {
    if z.is_zero() {
        return Err(Error::ZeroInput);
    }
    let bits = z.prec().bits();
    let mu_abs = mu.abs();
    if mu_abs <= 1 {
        return Err(Error::InvalidArgument("annulus reduction needs |mu| > 1".into()));
    }
    let ratio = Float::with_val(bits, z.abs().ln_ref()) / Float::with_val(bits, mu_abs.ln_ref());
    let k = -ratio.floor().to_f64() as i64;
    let mut w = (z * &mu.powi(k)?).checked("annulus reduction")?;
    while w.abs() < 1 {
        w = &w * mu;
    }
    while w.abs() >= mu_abs {
        w = &w / mu;
    }
    Ok(w)
}

/// Points of the fundamental annulus `1 <= |z| < |mu|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusCloud {
    pub mu: BigComplex,
    pub points: Vec<BigComplex>,
}

impl AnnulusCloud {
    pub fn new(mu: BigComplex, points: Vec<BigComplex>) -> Result<Self> {
        let mu_abs = mu.abs();
        if let Some(bad) = points.iter().find(|z| {
            let a = z.abs();
            a < 1 || a >= mu_abs
        }) {
            return Err(Error::InvalidArgument(format!("{bad} lies outside the fundamental annulus")));
        }
        Ok(AnnulusCloud { mu, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Local window radius `|mu|^-2 * separation` around the landing point.
pub fn limit_set_window(data: &MisiurewiczData) -> Result<f64> {
    Ok(data.separation()? / data.mu.abs_f64().powi(2))
}

/// Iterated preimages of 0 (to `depth`) within the local window around the
/// landing point, shifted to it and reduced to the fundamental annulus.
pub fn sample_limit_set(data: &MisiurewiczData, depth: usize, cap: usize) -> Result<AnnulusCloud> {
    let needed = 1usize
        .checked_shl(depth as u32 + 1)
        .map_or(usize::MAX, |n| n - 1);
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let prec = data.prec;
    let window = Float::with_val(prec.bits(), limit_set_window(data)?);
    let f = data.map();
    let landing = data.landing_point().clone();
    let walker = PreimageWalker {
        f: &f,
        cycle: &data.orbit,
        landing: &landing,
        window: &window,
        mu: &data.mu,
    };
    let points = walker.walk(BigComplex::zero(prec), depth, 0)?;
    AnnulusCloud::new(data.mu.clone(), points)
}

struct PreimageWalker<'a> {
    f: &'a QuadraticMap,
    cycle: &'a [BigComplex],
    landing: &'a BigComplex,
    window: &'a Float,
    mu: &'a BigComplex,
}

/// Subtrees above this depth are explored with `rayon::join`.
const PARALLEL_LEVELS: usize = 4;

impl PreimageWalker<'_> {
    /// Depth-first, contracting branch first; output order is independent of
    /// how the subtrees are scheduled.
    fn walk(&self, z: BigComplex, remaining: usize, level: usize) -> Result<Vec<BigComplex>> {
        let mut out = Vec::new();
        let offset = &z - self.landing;
        if !offset.is_zero() && offset.abs() <= *self.window {
            out.push(reduce_to_annulus(&offset, self.mu)?);
        }
        if remaining == 0 {
            return Ok(out);
        }
        let root = (&z - self.f.c()).sqrt().checked("preimage tree")?;
        let other = -&root;
        let (first, second) = if distance_to_set(&root, self.cycle) <= distance_to_set(&other, self.cycle) {
            (root, other)
        } else {
            (other, root)
        };
        let (a, b) = if level < PARALLEL_LEVELS {
            rayon::join(
                || self.walk(first, remaining - 1, level + 1),
                || self.walk(second, remaining - 1, level + 1),
            )
        } else {
            (
                self.walk(first, remaining - 1, level + 1),
                self.walk(second, remaining - 1, level + 1),
            )
        };
        out.extend(a?);
        out.extend(b?);
        Ok(out)
    }
}
