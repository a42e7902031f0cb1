//! Surgery sequences: critically periodic parameters `c_n -> c` obtained by
//! Newton continuation of the backward-orbit equation
//! `H(c') = f_{c'}^m(0) - q_{j}(c') = 0`, `j = j0 + p n`, and the scaled
//! residuals `t_n = (c_n - c) mu^n`.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::backward::{limit_x, reduce_to_annulus, BackwardOrbit, LimitEstimate};
use crate::complex::BigComplex;
use crate::dynamics::{BranchSelector, QuadraticMap, NEWTON_MAX_STEPS};
use crate::error::{Error, Result};
use crate::export::{CsvTable, DecimalComplex};
use crate::misiurewicz::{MisiurewiczData, MisiurewiczRecord};

pub use crate::dynamics::in_mandelbrot;

/// Slack of the defining-equation residual: `|H(c_n)| < 2^-(P - 24)`.
pub const RESIDUAL_SLACK: u32 = 24;
const BOOTSTRAP_SEEDS: usize = 8;

/// Precision floor `2 n log2|mu| + 96` for entry `n`.
pub fn precision_floor(base: &MisiurewiczData, n: usize) -> u32 {
    (2.0 * n as f64 * base.mu.abs_f64().log2()).ceil() as u32 + 96
}

/// `c + x mu^-n`.
pub fn predict_seed(base: &MisiurewiczData, x: &BigComplex, n: usize) -> Result<BigComplex> {
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    let step = (x * &base.mu.powi(-(n as i64))?).checked("seed prediction")?;
    Ok(&base.c + &step)
}

/// Branch continuation of the stored points at a nearby parameter.
struct Continuation<'a> {
    orbit: &'a BackwardOrbit,
    /// Index of the backward-orbit point the equation uses.
    index: usize,
}

impl Continuation<'_> {
    fn step(f: &QuadraticMap, z: &BigComplex, reference: &BigComplex, count: usize) -> Result<BigComplex> {
        let root = match f.inverse_step(z, &BranchSelector::NearestTo(reference.clone())) {
            Ok(root) => root,
            Err(Error::BranchTie) => return Err(Error::BranchJump(count)),
            Err(e) => return Err(e),
        };
        // the choice is only meaningful while the reference is nearer the
        // chosen root than the midpoint 0 of the two roots
        if root.dist(reference) >= root.abs() {
            return Err(Error::BranchJump(count));
        }
        Ok(root)
    }

    /// `q_index(c')` reached from 0 through the itinerary, then backward.
    fn point(&self, c: &BigComplex) -> Result<BigComplex> {
        let f = QuadraticMap::new(c, c.prec());
        let mut z = BigComplex::zero(c.prec());
        let mut count = 0;
        for reference in &self.orbit.itinerary[1..] {
            count += 1;
            z = Self::step(&f, &z, reference, count)?;
        }
        for reference in &self.orbit.points[1..=self.index] {
            count += 1;
            z = Self::step(&f, &z, reference, count)?;
        }
        Ok(z)
    }

    fn residual(&self, c: &BigComplex) -> Result<BigComplex> {
        let m = self.orbit.base.m;
        let forward = QuadraticMap::new(c, c.prec()).critical_orbit(m)?;
        (forward.last() - &self.point(c)?).checked("surgery equation")
    }
}

/// Newton on `H` for entry `n` from `seed`; returns the root and `|H|`.
pub fn solve_surgery_step(
    base: &MisiurewiczData,
    orbit_ref: &BackwardOrbit,
    n: usize,
    seed: &BigComplex,
) -> Result<(BigComplex, f64)> {
    let prec = base.prec;
    prec.require(precision_floor(base, n), "the surgery precision schedule")?;
    let index = orbit_ref.subsequence_index(n);
    if index >= orbit_ref.points.len() {
        return Err(Error::InvalidArgument(format!(
            "entry {n} needs backward point {index}, orbit has {}",
            orbit_ref.points.len()
        )));
    }
    let eq = Continuation { orbit: orbit_ref, index };
    let h = BigComplex::from_real(prec, &(Float::with_val(prec.bits(), 1) >> (prec.bits() / 3)));
    let tol = prec.tolerance(16);
    let mut c = seed.with_prec(prec);
    for _ in 0..NEWTON_MAX_STEPS {
        let value = eq.residual(&c)?;
        let ahead = eq.residual(&(&c + &h))?;
        let behind = eq.residual(&(&c - &h))?;
        let deriv = ((ahead - behind) / h.scale(2.0)).checked("surgery derivative")?;
        if deriv.is_zero() {
            return Err(Error::DerivativeVanishes);
        }
        let delta = (&value / &deriv).checked("Newton step")?;
        c = (&c - &delta).checked("Newton iterate")?;
        let scale = c.abs().max(&Float::with_val(prec.bits(), 1));
        if delta.abs() < Float::with_val(prec.bits(), &tol * &scale) {
            let residual = eq.residual(&c)?.abs();
            if residual >= prec.tolerance(RESIDUAL_SLACK) {
                break;
            }
            return Ok((c, residual.to_f64()));
        }
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_STEPS,
        context: "surgery Newton",
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryEntry {
    pub n: usize,
    pub c: BigComplex,
    pub residual: f64,
    /// `(c_n - c) mu^n`.
    pub t: BigComplex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgerySequence {
    pub base: MisiurewiczData,
    pub orbit_ref: BackwardOrbit,
    pub entries: Vec<SurgeryEntry>,
    pub x_estimate: BigComplex,
    pub x_error: f64,
    /// The backward-orbit limit the estimate was checked against.
    pub backward_limit: LimitEstimate,
}

fn entry(base: &MisiurewiczData, n: usize, c: BigComplex, residual: f64) -> Result<SurgeryEntry> {
    let t = (&(&c - &base.c) * &base.mu.powi(n as i64)?).checked("scaled residual")?;
    Ok(SurgeryEntry { n, c, residual, t })
}

/// Minimum of `|a - b mu^k|` over `k in {-1, 0, 1}`: distance on the
/// annulus with its boundary circles identified.
pub fn annulus_distance(a: &BigComplex, b: &BigComplex, mu: &BigComplex) -> Result<f64> {
    let mut best = a.dist(b).to_f64();
    for k in [-1i64, 1] {
        best = best.min(a.dist(&(b * &mu.powi(k)?)).to_f64());
    }
    Ok(best)
}

/// Entries `n_from..=n_to`: the first from a ring of seeds around the
/// backward-orbit prediction, the rest from the running `t_n`.
pub fn build_sequence(
    base: &MisiurewiczData,
    orbit_ref: &BackwardOrbit,
    n_from: usize,
    n_to: usize,
) -> Result<SurgerySequence> {
    if n_from > n_to {
        return Err(Error::InvalidArgument(format!("empty index range {n_from}..{n_to}")));
    }
    base.prec.require(precision_floor(base, n_to), "the surgery precision schedule")?;
    let backward_limit = limit_x(orbit_ref)?;
    let x0 = &backward_limit.value;
    let first = bootstrap(base, orbit_ref, x0, n_from)?;
    let mut entries = vec![first];
    for n in n_from + 1..=n_to {
        let seed = predict_seed(base, &entries.last().unwrap().t, n)?;
        let (c, residual) = solve_surgery_step(base, orbit_ref, n, &seed)?;
        entries.push(entry(base, n, c, residual)?);
    }
    let x_estimate = entries.last().unwrap().t.clone();
    let x_error = match entries.len() {
        1 => f64::INFINITY,
        len => entries[len - 1].t.dist(&entries[len - 2].t).to_f64(),
    };
    if entries.len() > 1 {
        let reduced = reduce_to_annulus(&x_estimate, &base.mu)?;
        let backward = reduce_to_annulus(x0, &base.mu)?;
        let distance = annulus_distance(&reduced, &backward, &base.mu)?;
        let allowance = 4.0 * base.mu.abs_f64() * (x_error + backward_limit.error) + base.prec.tolerance(base.prec.bits() / 2).to_f64();
        if distance > allowance {
            let digits = 12;
            return Err(Error::InconsistentLimit {
                estimate: reduced.to_decimal(digits),
                backward: backward.to_decimal(digits),
                distance,
            });
        }
    }
    Ok(SurgerySequence {
        base: base.clone(),
        orbit_ref: orbit_ref.clone(),
        entries,
        x_estimate,
        x_error,
        backward_limit,
    })
}

fn bootstrap(base: &MisiurewiczData, orbit_ref: &BackwardOrbit, x0: &BigComplex, n: usize) -> Result<SurgeryEntry> {
    let prec = base.prec;
    let predicted = predict_seed(base, x0, n)?;
    let radius = (x0.abs_f64() * base.mu.abs_f64().powi(-(n as i32))).max(f64::MIN_POSITIVE);
    let mut seeds = vec![predicted.clone()];
    for j in 0..BOOTSTRAP_SEEDS {
        let angle = std::f64::consts::TAU * j as f64 / BOOTSTRAP_SEEDS as f64;
        seeds.push(&base.c + &BigComplex::new(prec, radius * angle.cos(), radius * angle.sin()));
    }
    let mut best: Option<(Float, BigComplex, f64)> = None;
    let mut last_err = None;
    for seed in &seeds {
        match solve_surgery_step(base, orbit_ref, n, seed) {
            Ok((c, residual)) => {
                let d = c.dist(&predicted);
                if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
                    best = Some((d, c, residual));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((_, c, residual)) => entry(base, n, c, residual),
        None => Err(last_err.unwrap_or(Error::NoConvergence {
            iterations: NEWTON_MAX_STEPS,
            context: "surgery bootstrap",
        })),
    }
}

/// Size of the postcritical set `{f^1(0), ..., f^L(0)}` of a critically
/// periodic parameter: the first return time `L` of 0, or `None` within `cap`.
pub fn postcritical_count(c: &BigComplex, cap: usize) -> Option<usize> {
    let prec = c.prec();
    let tol = prec.tolerance(prec.bits() / 2);
    let mut z = BigComplex::zero(prec);
    for len in 1..=cap {
        z = z.square() + c;
        if !z.is_finite() {
            return None;
        }
        if z.abs() < tol {
            return Some(len);
        }
    }
    None
}

/// `((n, |P|) per entry, slope, intercept)`.
pub type Growth = (Vec<(usize, usize)>, f64, f64);

/// Slope and intercept of `#P(f_n) = A + slope n`, from the first and last
/// entries; `None` when some count is unavailable.
pub fn postcritical_growth(seq: &SurgerySequence) -> Option<Growth> {
    let cap = seq.entries.last()?.n * seq.base.p + seq.base.m + seq.orbit_ref.itinerary.len() + 64;
    let counts: Vec<(usize, usize)> = seq
        .entries
        .iter()
        .map(|e| postcritical_count(&e.c, cap).map(|len| (e.n, len)))
        .collect::<Option<_>>()?;
    let (n0, l0) = *counts.first()?;
    let (n1, l1) = *counts.last()?;
    if n1 == n0 {
        return None;
    }
    let slope = (l1 as f64 - l0 as f64) / (n1 - n0) as f64;
    let intercept = l0 as f64 - slope * n0 as f64;
    Some((counts, slope, intercept))
}

/// `|f_c^j(z0)| <= bailout` for every `j <= max_iter`.
pub fn orbit_bounded(c: &BigComplex, z0: &BigComplex, max_iter: usize, bailout: f64) -> bool {
    let bail = bailout * bailout;
    let mut z = z0.with_prec(c.prec());
    for _ in 0..=max_iter {
        if !z.is_finite() || z.norm_sqr() > bail {
            return false;
        }
        z = z.square() + c;
    }
    true
}

/// `q_j(c_n)` for an entry: the continued backward point the equation matched.
pub fn continued_point(seq: &SurgerySequence, entry: &SurgeryEntry) -> Result<BigComplex> {
    let index = seq.orbit_ref.subsequence_index(entry.n);
    Continuation { orbit: &seq.orbit_ref, index }.point(&entry.c)
}

impl SurgerySequence {
    pub fn to_csv(&self, digits: usize) -> String {
        let mut table = CsvTable::new(["n", "re_c", "im_c", "residual", "re_t", "im_t"]);
        for e in &self.entries {
            table.push(vec![
                e.n.to_string(),
                e.c.re().to_string_radix(10, Some(digits)),
                e.c.im().to_string_radix(10, Some(digits)),
                format!("{:e}", e.residual),
                e.t.re().to_string_radix(10, Some(digits)),
                e.t.im().to_string_radix(10, Some(digits)),
            ]);
        }
        table.render()
    }

    pub fn to_record(&self) -> SurgeryRecord {
        SurgeryRecord {
            base: self.base.to_record(),
            policy: self.orbit_ref.policy.label(),
            residue: self.orbit_ref.residue,
            entries: self
                .entries
                .iter()
                .map(|e| SurgeryEntryRecord {
                    n: e.n,
                    c: DecimalComplex::from(&e.c),
                    residual: e.residual,
                    t: DecimalComplex::from(&e.t),
                })
                .collect(),
            x_estimate: DecimalComplex::from(&self.x_estimate),
            x_error: self.x_error,
            backward_limit: DecimalComplex::from(&self.backward_limit.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeryEntryRecord {
    pub n: usize,
    pub c: DecimalComplex,
    pub residual: f64,
    pub t: DecimalComplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeryRecord {
    pub base: MisiurewiczRecord,
    pub policy: String,
    pub residue: usize,
    pub entries: Vec<SurgeryEntryRecord>,
    pub x_estimate: DecimalComplex,
    pub x_error: f64,
    pub backward_limit: DecimalComplex,
}
