//! Elementary dynamics of `f_c(z) = z^2 + c`: orbits, parameter derivatives,
//! periodic points, multipliers and single inverse steps.

use rug::Float;

use crate::complex::{BigComplex, Precision};
use crate::error::{Error, Result};

/// Newton iteration cap shared by the periodic-point and parameter solvers.
pub const NEWTON_MAX_STEPS: usize = 200;
/// Bits of slack used when checking that an orbit closes up.
pub const CLOSURE_SLACK: u32 = 24;

/// A forward orbit `z_0, ..., z_n` with `z_{j+1} = z_j^2 + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSegment {
    pub c: BigComplex,
    pub z0: BigComplex,
    pub points: Vec<BigComplex>,
}

impl OrbitSegment {
    pub fn last(&self) -> &BigComplex {
        self.points.last().expect("orbit segment always holds z0")
    }
}

/// How to pick one of the two square roots in an inverse step.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchSelector {
    /// Non-negative real part (positive imaginary part on the imaginary axis).
    Principal,
    /// The root closer to the target; equidistant roots are an error.
    NearestTo(BigComplex),
    /// `±principal`; a single inverse step uses the first sign.
    SignSequence(Vec<i8>),
}

/// The quadratic map `z -> z^2 + c` evaluated at a fixed working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMap {
    c: BigComplex,
    prec: Precision,
}

impl QuadraticMap {
    pub fn new(c: &BigComplex, prec: Precision) -> Self {
        QuadraticMap {
            c: c.with_prec(prec),
            prec,
        }
    }

    pub fn c(&self) -> &BigComplex {
        &self.c
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    fn lift(&self, z: &BigComplex) -> BigComplex {
        z.with_prec(self.prec)
    }

    pub fn apply(&self, z: &BigComplex) -> Result<BigComplex> {
        (z.square() + &self.c).checked("forward iteration")
    }

    pub fn iterate(&self, z0: &BigComplex, n: usize) -> Result<OrbitSegment> {
        let z0 = self.lift(z0);
        let mut points = Vec::with_capacity(n + 1);
        points.push(z0.clone());
        for _ in 0..n {
            let next = self.apply(points.last().unwrap())?;
            points.push(next);
        }
        Ok(OrbitSegment {
            c: self.c.clone(),
            z0,
            points,
        })
    }

    pub fn critical_orbit(&self, n: usize) -> Result<OrbitSegment> {
        self.iterate(&BigComplex::zero(self.prec), n)
    }

    /// `d/dc f_c^n(0)` via `d_{j+1} = 2 z_j d_j + 1`, `d_0 = 0`.
    pub fn param_derivative(&self, n: usize) -> Result<BigComplex> {
        if n == 0 {
            return Err(Error::InvalidArgument("param_derivative needs n >= 1".into()));
        }
        let one = BigComplex::one(self.prec);
        let mut z = BigComplex::zero(self.prec);
        let mut d = BigComplex::zero(self.prec);
        for _ in 0..n {
            d = ((&z * &d).scale(2.0) + &one).checked("parameter derivative")?;
            z = self.apply(&z)?;
        }
        Ok(d)
    }

    /// Solves `f_c^p(z) = z` by Newton's method from `seed`.
    pub fn newton_periodic(&self, p: usize, seed: &BigComplex) -> Result<BigComplex> {
        if p == 0 {
            return Err(Error::InvalidArgument("period must be >= 1".into()));
        }
        let step_tol = self.prec.tolerance(16);
        let vanish_tol = self.prec.tolerance(self.prec.bits() / 2);
        let escape = Float::with_val(self.prec.bits(), Float::i_exp(1, 64));
        let one = BigComplex::one(self.prec);
        let mut z = self.lift(seed);
        for _ in 0..NEWTON_MAX_STEPS {
            let (image, deriv) = self.return_map(&z, p)?;
            let residual = &image - &z;
            let slope = &deriv - &one;
            if slope.abs() <= vanish_tol {
                return Err(Error::DerivativeVanishes);
            }
            let delta = (&residual / &slope).checked("Newton step")?;
            z = &z - &delta;
            let size = z.abs();
            if size > escape {
                break;
            }
            let scale = if size > 1 { size } else { Float::with_val(self.prec.bits(), 1) };
            if delta.abs() < Float::with_val(self.prec.bits(), &step_tol * &scale) {
                return Ok(z);
            }
        }
        Err(Error::NoConvergence {
            iterations: NEWTON_MAX_STEPS,
            context: "periodic point",
        })
    }

    /// `(f^p(z), (f^p)'(z))`.
    fn return_map(&self, z: &BigComplex, p: usize) -> Result<(BigComplex, BigComplex)> {
        let mut w = z.clone();
        let mut deriv = BigComplex::one(self.prec);
        for _ in 0..p {
            deriv = (&deriv * &w).scale(2.0).checked("return map derivative")?;
            w = self.apply(&w)?;
        }
        Ok((w, deriv))
    }

    fn ensure_periodic(&self, z: &BigComplex, p: usize) -> Result<(BigComplex, BigComplex)> {
        if p == 0 {
            return Err(Error::InvalidArgument("period must be >= 1".into()));
        }
        let (image, deriv) = self.return_map(z, p)?;
        let residual = image.dist(z);
        let size = z.abs();
        let scale = if size > 1 { size } else { Float::with_val(self.prec.bits(), 1) };
        if residual > Float::with_val(self.prec.bits(), self.prec.tolerance(CLOSURE_SLACK) * &scale) {
            return Err(Error::NotPeriodic {
                period: p,
                residual: residual.to_f64(),
            });
        }
        Ok((image, deriv))
    }

    /// Multiplier `(f^p)'(z) = prod 2 z_j` of the cycle through `z`.
    pub fn multiplier(&self, z: &BigComplex, p: usize) -> Result<BigComplex> {
        let z = self.lift(z);
        Ok(self.ensure_periodic(&z, p)?.1)
    }

    /// Derivative in `c` of the analytically continued periodic point through `z`.
    pub fn periodic_point_param_derivative(&self, z: &BigComplex, p: usize) -> Result<BigComplex> {
        let z = self.lift(z);
        let (_, mu) = self.ensure_periodic(&z, p)?;
        let one = BigComplex::one(self.prec);
        let gap = &one - &mu;
        if gap.abs() < self.prec.tolerance(self.prec.bits() / 2) {
            return Err(Error::ParabolicOrbit(gap.abs_f64()));
        }
        // e_{j+1} = 2 zeta_j e_j + 1, the c-derivative of f^p at fixed z
        let mut zeta = z;
        let mut e = BigComplex::zero(self.prec);
        for _ in 0..p {
            e = ((&zeta * &e).scale(2.0) + &one).checked("periodic point derivative")?;
            zeta = self.apply(&zeta)?;
        }
        (e / gap).checked("periodic point derivative")
    }

    /// One inverse step: a `q` with `q^2 + c = z`, branch chosen by `branch`.
    pub fn inverse_step(&self, z: &BigComplex, branch: &BranchSelector) -> Result<BigComplex> {
        let root = (self.lift(z) - &self.c).sqrt().checked("inverse step")?;
        match branch {
            BranchSelector::Principal => Ok(root),
            BranchSelector::SignSequence(signs) => match signs.first() {
                None | Some(1) => Ok(root),
                Some(-1) => Ok(-root),
                Some(other) => Err(Error::InvalidArgument(format!("branch sign must be +1 or -1, got {other}"))),
            },
            BranchSelector::NearestTo(target) => self.nearest_root(root, target),
        }
    }

    pub(crate) fn nearest_root(&self, root: BigComplex, target: &BigComplex) -> Result<BigComplex> {
        let target = self.lift(target);
        let other = -&root;
        let d_root = root.dist(&target);
        let d_other = other.dist(&target);
        let gap = Float::with_val(self.prec.bits(), &d_root - &d_other).abs();
        let larger = if d_root > d_other { &d_root } else { &d_other };
        let tie = Float::with_val(self.prec.bits(), self.prec.tolerance(self.prec.bits() / 2) * larger);
        if gap <= tie {
            return Err(Error::BranchTie);
        }
        Ok(if d_root < d_other { root } else { other })
    }
}

/// One-sided boundedness test: `|f_c^j(0)| <= bailout` for every `j <= max_iter`.
pub fn in_mandelbrot(c: &BigComplex, max_iter: usize, bailout: f64) -> bool {
    let bail = bailout * bailout;
    let mut z = BigComplex::zero(c.prec());
    for _ in 0..max_iter {
        z = z.square() + c;
        if !z.is_finite() || z.norm_sqr() > bail {
            return false;
        }
    }
    true
}
