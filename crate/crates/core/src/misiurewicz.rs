//! Solving for and certifying Misiurewicz parameters of `z^2 + c`.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::complex::{BigComplex, Precision};
use crate::dynamics::{QuadraticMap, CLOSURE_SLACK, NEWTON_MAX_STEPS};
use crate::error::{Error, Result};
use crate::export::DecimalComplex;

/// A certified Misiurewicz parameter with its derived quantities.
///
/// `orbit` starts at the landing point `f_c^m(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MisiurewiczData {
    pub c: BigComplex,
    pub k: usize,
    pub p: usize,
    pub m: usize,
    pub orbit: Vec<BigComplex>,
    pub mu: BigComplex,
    pub nu: BigComplex,
    pub residual: f64,
    pub prec: Precision,
}

impl MisiurewiczData {
    pub fn map(&self) -> QuadraticMap {
        QuadraticMap::new(&self.c, self.prec)
    }

    pub fn landing_point(&self) -> &BigComplex {
        &self.orbit[0]
    }

    /// Points `f_c^j(0)` for `j = 1 .. k + p - 1`, i.e. the postcritical set.
    pub fn postcritical_set(&self) -> Result<Vec<BigComplex>> {
        let orbit = self.map().critical_orbit(self.k + self.p - 1)?;
        Ok(orbit.points.into_iter().skip(1).collect())
    }

    /// Distance from the landing point to the nearest other postcritical point.
    pub fn separation(&self) -> Result<f64> {
        let landing = self.landing_point();
        let tol = self.prec.tolerance(CLOSURE_SLACK);
        self.postcritical_set()?
            .iter()
            .map(|z| z.dist(landing))
            .filter(|d| *d > tol)
            .map(|d| d.to_f64())
            .min_by(f64::total_cmp)
            .ok_or_else(|| Error::DegenerateSolution("postcritical set is a single point".into()))
    }

    pub fn to_record(&self) -> MisiurewiczRecord {
        MisiurewiczRecord {
            precision_bits: self.prec.bits(),
            k: self.k,
            p: self.p,
            m: self.m,
            c: DecimalComplex::from(&self.c),
            orbit: self.orbit.iter().map(DecimalComplex::from).collect(),
            mu: DecimalComplex::from(&self.mu),
            nu: DecimalComplex::from(&self.nu),
            residual: self.residual,
        }
    }

    /// Reloads a record at its declared precision and re-certifies it.
    pub fn from_record(record: &MisiurewiczRecord) -> Result<Self> {
        let prec = Precision::new(record.precision_bits)?;
        let c = record.c.to_big(prec)?;
        let data = certify(&c, record.k, record.p, prec, record.residual)?;
        let stored_mu = record.mu.to_big(prec)?;
        let tol = prec.tolerance(CLOSURE_SLACK + 8);
        if data.mu.dist(&stored_mu) > tol {
            return Err(Error::DegenerateSolution("stored multiplier disagrees with recomputed value".into()));
        }
        Ok(data)
    }
}

/// Decimal-string record of a certified point, stable across reloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisiurewiczRecord {
    pub precision_bits: u32,
    pub k: usize,
    pub p: usize,
    pub m: usize,
    pub c: DecimalComplex,
    pub orbit: Vec<DecimalComplex>,
    pub mu: DecimalComplex,
    pub nu: DecimalComplex,
    pub residual: f64,
}

/// `(f_c^n(0), d/dc f_c^n(0))` for every `n <= len`.
fn orbit_with_derivatives(c: &BigComplex, len: usize) -> Result<Vec<(BigComplex, BigComplex)>> {
    let prec = c.prec();
    let one = BigComplex::one(prec);
    let mut out = Vec::with_capacity(len + 1);
    let mut z = BigComplex::zero(prec);
    let mut d = BigComplex::zero(prec);
    out.push((z.clone(), d.clone()));
    for _ in 0..len {
        d = ((&z * &d).scale(2.0) + &one).checked("parameter derivative")?;
        z = (z.square() + c).checked("critical orbit")?;
        out.push((z.clone(), d.clone()));
    }
    Ok(out)
}

fn max_one(x: Float) -> Float {
    if x > 1 {
        x
    } else {
        Float::with_val(x.prec(), 1)
    }
}

/// Newton's method on `G(c) = f_c^{k+p}(0) - f_c^k(0)`, followed by certification.
pub fn solve_misiurewicz(k: usize, p: usize, seed: &BigComplex, prec: Precision) -> Result<MisiurewiczData> {
    if k == 0 || p == 0 {
        return Err(Error::InvalidArgument("preperiod and period must both be >= 1".into()));
    }
    let bits = prec.bits();
    let step_tol = prec.tolerance(16);
    let escape = Float::with_val(bits, Float::i_exp(1, 64));
    let vanish = prec.tolerance(bits / 2);
    let mut c = seed.with_prec(prec);
    let mut converged = false;
    for _ in 0..NEWTON_MAX_STEPS {
        let delta = newton_delta(&c, k, p, &vanish)?;
        c = &c - &delta;
        if c.abs() > escape {
            break;
        }
        let scaled = Float::with_val(bits, &step_tol * max_one(c.abs()));
        if delta.abs() < scaled {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: NEWTON_MAX_STEPS,
            context: "Misiurewicz parameter",
        });
    }
    // one polishing step drives the residual to rounding level
    let delta = newton_delta(&c, k, p, &vanish)?;
    c = &c - &delta;
    let orbit = orbit_with_derivatives(&c, k + p)?;
    let residual = orbit[k + p].0.dist(&orbit[k].0).to_f64();
    certify(&c, k, p, prec, residual)
}

fn newton_delta(c: &BigComplex, k: usize, p: usize, vanish: &Float) -> Result<BigComplex> {
    let orbit = orbit_with_derivatives(c, k + p)?;
    let g = &orbit[k + p].0 - &orbit[k].0;
    let dg = &orbit[k + p].1 - &orbit[k].1;
    if dg.abs() <= *vanish {
        return Err(Error::DerivativeVanishes);
    }
    (g / dg).checked("Newton step")
}

/// Checks minimality, repulsion and landing time at `c`, and fills in `mu`, `nu`.
pub fn certify(c: &BigComplex, k: usize, p: usize, prec: Precision, residual: f64) -> Result<MisiurewiczData> {
    let c = c.with_prec(prec);
    let f = QuadraticMap::new(&c, prec);
    let points = f.critical_orbit(k + p)?.points;
    let tol = prec.tolerance(CLOSURE_SLACK);
    let close = |a: &BigComplex, b: &BigComplex| {
        let scale = max_one(a.abs());
        a.dist(b) < Float::with_val(prec.bits(), &tol * scale)
    };
    if !close(&points[k + p], &points[k]) {
        return Err(Error::DegenerateSolution(format!(
            "f^{}(0) != f^{}(0) at this parameter",
            k + p,
            k
        )));
    }
    if let Some((kk, pp)) = lower_cycle(&points, k, p, close) {
        return Err(Error::DegenerateSolution(format!(
            "parameter already satisfies preperiod {kk}, period {pp}"
        )));
    }
    let orbit: Vec<BigComplex> = points[k..k + p].to_vec();
    let zero = BigComplex::zero(prec);
    if orbit.iter().any(|z| close(z, &zero)) {
        return Err(Error::DegenerateSolution("critical point lies on the periodic orbit".into()));
    }
    let m = landing_time(&points, &orbit, close);
    if m != Some(k) {
        return Err(Error::DegenerateSolution(format!("landing time {m:?} differs from preperiod {k}")));
    }
    let mu = f.multiplier(&orbit[0], p)?;
    if mu.abs() <= 1 {
        return Err(Error::NotRepelling(mu.abs_f64()));
    }
    let mut data = MisiurewiczData {
        c,
        k,
        p,
        m: k,
        orbit,
        mu,
        nu: zero,
        residual,
        prec,
    };
    data.nu = nu(&data)?;
    if data.nu.abs() <= tol {
        return Err(Error::DegenerateSolution("nu vanishes".into()));
    }
    Ok(data)
}

/// The first `(k', p')` with `k' <= k`, `p' | p`, `(k', p') != (k, p)` that closes up.
fn lower_cycle(
    points: &[BigComplex],
    k: usize,
    p: usize,
    close: impl Fn(&BigComplex, &BigComplex) -> bool,
) -> Option<(usize, usize)> {
    for kk in 0..=k {
        for pp in (1..=p).filter(|d| p.is_multiple_of(*d)) {
            if (kk, pp) == (k, p) {
                continue;
            }
            if close(&points[kk + pp], &points[kk]) {
                return Some((kk, pp));
            }
        }
    }
    None
}

fn landing_time(
    points: &[BigComplex],
    orbit: &[BigComplex],
    close: impl Fn(&BigComplex, &BigComplex) -> bool,
) -> Option<usize> {
    points
        .iter()
        .position(|z| orbit.iter().any(|o| close(z, o)))
}

/// `nu = d/dc f_c^m(0) - d/dc (continued periodic point at f_c^m(0))`.
pub fn nu(data: &MisiurewiczData) -> Result<BigComplex> {
    let f = data.map();
    let r = f.param_derivative(data.m)?;
    let landing = f.critical_orbit(data.m)?.last().clone();
    let p = f.periodic_point_param_derivative(&landing, data.p)?;
    Ok(r - p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Re-checks every invariant of `data` at absolute tolerance `tol`.
/// Failures are reported, never raised.
pub fn verify(data: &MisiurewiczData, tol: f64) -> VerificationReport {
    let mut checks = Vec::new();
    let f = data.map();
    let (k, p) = (data.k, data.p);
    let Ok(orbit) = f.critical_orbit(k + p) else {
        checks.push(Check {
            name: "finite_orbit",
            passed: false,
            residual: f64::INFINITY,
        });
        return VerificationReport { checks };
    };
    let pts = &orbit.points;
    let dist = |a: &BigComplex, b: &BigComplex| a.dist(b).to_f64();

    let closing = dist(&pts[k + p], &pts[k]);
    checks.push(Check {
        name: "preperiodic",
        passed: closing <= tol,
        residual: closing,
    });

    let mut lowest = f64::INFINITY;
    for kk in 0..=k {
        for pp in (1..=p).filter(|d| p.is_multiple_of(*d)) {
            if (kk, pp) != (k, p) {
                lowest = lowest.min(dist(&pts[kk + pp], &pts[kk]));
            }
        }
    }
    checks.push(Check {
        name: "minimal",
        passed: lowest > tol,
        residual: lowest,
    });

    let zero = BigComplex::zero(data.prec);
    let nearest_zero = data
        .orbit
        .iter()
        .map(|z| dist(z, &zero))
        .fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "critical_not_periodic",
        passed: nearest_zero > tol,
        residual: nearest_zero,
    });

    let orbit_gap = data
        .orbit
        .iter()
        .zip(&pts[k..k + p])
        .map(|(a, b)| dist(a, b))
        .fold(if data.orbit.len() == p { 0.0 } else { f64::INFINITY }, f64::max);
    checks.push(Check {
        name: "orbit",
        passed: orbit_gap <= tol,
        residual: orbit_gap,
    });

    let landing = pts
        .iter()
        .position(|z| data.orbit.iter().any(|o| dist(z, o) <= tol));
    checks.push(Check {
        name: "landing_time",
        passed: landing == Some(data.m) && data.m == k,
        residual: landing.map_or(f64::INFINITY, |m| m.abs_diff(k) as f64),
    });

    let mu_abs = data.mu.abs_f64();
    checks.push(Check {
        name: "repelling",
        passed: mu_abs > 1.0,
        residual: mu_abs,
    });

    let mu_gap = data
        .orbit
        .first()
        .and_then(|z| f.multiplier(z, p).ok())
        .map_or(f64::INFINITY, |mu| dist(&mu, &data.mu));
    checks.push(Check {
        name: "multiplier",
        passed: mu_gap <= tol,
        residual: mu_gap,
    });

    let nu_abs = data.nu.abs_f64();
    checks.push(Check {
        name: "nu_nonzero",
        passed: nu_abs > tol,
        residual: nu_abs,
    });

    VerificationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::new(128).unwrap()
    }

    fn cx(re: f64, im: f64) -> BigComplex {
        BigComplex::new(prec(), re, im)
    }

    #[test]
    fn tip_of_the_real_axis() {
        let data = solve_misiurewicz(2, 1, &cx(-1.9, 0.0), prec()).unwrap();
        assert!(data.c.dist(&cx(-2.0, 0.0)).to_f64() < 1e-36);
        assert_eq!((data.k, data.p, data.m), (2, 1, 2));
        assert!(data.orbit[0].dist(&cx(2.0, 0.0)).to_f64() < 1e-35);
        assert!(data.mu.dist(&cx(4.0, 0.0)).to_f64() < 1e-35);
        let nu_expected = cx(-8.0, 0.0) / cx(3.0, 0.0);
        assert!(data.nu.dist(&nu_expected).to_f64() < 1e-35);
        assert!(data.residual < 1e-35);
    }

    #[test]
    fn parameter_i_is_preperiod_two_period_two() {
        let data = solve_misiurewicz(2, 2, &cx(0.1, 0.9), prec()).unwrap();
        assert!(data.c.dist(&cx(0.0, 1.0)).to_f64() < 1e-36);
        assert!(data.orbit[0].dist(&cx(-1.0, 1.0)).to_f64() < 1e-35);
        assert!(data.orbit[1].dist(&cx(0.0, -1.0)).to_f64() < 1e-35);
        assert!(data.mu.dist(&cx(4.0, 4.0)).to_f64() < 1e-34);
        assert!(data.nu.dist(&(cx(4.0, 8.0) / cx(5.0, 0.0))).to_f64() < 1e-34);
    }

    #[test]
    fn preperiod_one_period_two_from_near_i_is_degenerate() {
        // f^3(0) = f(0) reduces to c^2 (c + 1)^2 = 0: only periodic critical points
        let err = solve_misiurewicz(1, 2, &cx(0.1, 0.9), prec()).unwrap_err();
        assert!(
            matches!(err, Error::DegenerateSolution(_) | Error::NoConvergence { .. } | Error::DerivativeVanishes),
            "{err:?}"
        );
    }

    #[test]
    fn degenerate_root_rejected() {
        // f^4(0) = f^2(0) also vanishes at c = -2, which has period 1
        let err = solve_misiurewicz(2, 2, &cx(-1.95, 0.0), prec()).unwrap_err();
        assert!(matches!(err, Error::DegenerateSolution(_)), "{err:?}");
        let err = certify(&cx(-1.0, 0.0), 1, 2, prec(), 0.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateSolution(_)), "{err:?}");
    }

    #[test]
    fn verify_reports() {
        let data = solve_misiurewicz(2, 1, &cx(-1.9, 0.0), prec()).unwrap();
        let report = verify(&data, 1e-30);
        assert!(report.all_passed(), "{report:?}");

        let mut inflated = data.clone();
        inflated.k += 1;
        inflated.m += 1;
        let report = verify(&inflated, 1e-30);
        assert!(!report.check("minimal").unwrap().passed);

        let mut weak = data.clone();
        weak.mu = cx(0.5, 0.0);
        let report = verify(&weak, 1e-30);
        assert!(!report.check("repelling").unwrap().passed);
        assert!(report.check("preperiodic").unwrap().passed);
    }

    #[test]
    fn record_round_trip_is_bit_stable() {
        let data = solve_misiurewicz(2, 2, &cx(0.1, 0.9), prec()).unwrap();
        let json = serde_json::to_string(&data.to_record()).unwrap();
        let back: MisiurewiczRecord = serde_json::from_str(&json).unwrap();
        let reloaded = MisiurewiczData::from_record(&back).unwrap();
        assert_eq!(reloaded.c, data.c);
        assert_eq!(reloaded.mu, data.mu);
        assert_eq!(reloaded.nu, data.nu);
    }
}
