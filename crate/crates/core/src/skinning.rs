//! The skinning map on the real slice of the normalized critically periodic
//! family `f(z) = -v z^2 + v`, its fixed points `v_n`, and the scaled series
//! `(v_n + sqrt 2) 4^n`.
//!
//! The orbit of 0 is indexed backwards: `w_0 = 0`, `w_1 = 1`, `f(w_j) = w_{j-1}`,
//! and `w_{n-1} = v`.

use rayon::prelude::*;
use rug::Float;

use crate::complex::Precision;
use crate::error::{Error, Result};
use crate::export::CsvTable;

pub const MAX_ITERATIONS: usize = 10_000;

/// A point `(w_2, ..., w_{n-2}, v)` of the slice; `w_0 = 0` and `w_1 = 1` are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct SkinningState {
    pub n: usize,
    /// `w_2, ..., w_{n-2}, v`: `n - 2` coordinates.
    pub coords: Vec<Float>,
}

impl SkinningState {
    pub fn new(n: usize, coords: Vec<Float>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("skinning needs n >= 3, got {n}")));
        }
        if coords.len() != n - 2 {
            return Err(Error::InvalidArgument(format!(
                "state for n = {n} has {} coordinates, expected {}",
                coords.len(),
                n - 2
            )));
        }
        Ok(SkinningState { n, coords })
    }

    /// Equally spaced `w_j = 1 + (j - 1)/10` and `v = -1.4`.
    pub fn seed(n: usize, prec: Precision) -> Result<Self> {
        let bits = prec.bits();
        let tenth = Float::with_val(bits, 1) / 10u32;
        let mut coords: Vec<Float> = (2..n.saturating_sub(1))
            .map(|j| Float::with_val(bits, &tenth * (j as u32 - 1)) + 1u32)
            .collect();
        coords.push(Float::with_val(bits, -14) / 10u32);
        Self::new(n, coords)
    }

    pub fn v(&self) -> &Float {
        self.coords.last().expect("non-empty state")
    }

    /// `c = -v^2`, the parameter conjugate to `-v z^2 + v`.
    pub fn c(&self) -> Float {
        -Float::with_val(self.v().prec(), self.v().square_ref())
    }

    /// Full orbit `w_0, ..., w_{n-1}`.
    pub fn orbit(&self) -> Vec<Float> {
        let bits = self.v().prec();
        let mut out = vec![Float::with_val(bits, 0), Float::with_val(bits, 1)];
        out.extend(self.coords.iter().cloned());
        out
    }

    /// Membership in the slice: `1 < w_2 < ... < w_{n-2}` and `v < 0`.
    pub fn in_slice(&self) -> bool {
        let (v, ws) = self.coords.split_last().expect("non-empty state");
        if !v.is_finite() || *v >= 0 {
            return false;
        }
        let mut prev = Float::with_val(v.prec(), 1);
        for w in ws {
            if !w.is_finite() || *w <= prev {
                return false;
            }
            prev = w.clone();
        }
        true
    }

    fn sup_distance(&self, other: &SkinningState) -> Float {
        let bits = self.v().prec();
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| Float::with_val(bits, a - b).abs())
            .fold(Float::with_val(bits, 0), |acc, d| if d > acc { d } else { acc })
    }
}

/// Signs for the default branch: positive roots, negative for the new `v`.
pub fn default_signs(n: usize) -> Vec<i8> {
    let mut signs = vec![1; n.saturating_sub(3)];
    signs.push(-1);
    signs
}

/// The pullback with the given root signs, one per output coordinate:
/// `w'_{j} = s_j sqrt(w_{j-1} - v) / sqrt(-v)`.
pub fn sigma_with_signs(state: &SkinningState, signs: &[i8]) -> Result<SkinningState> {
    if signs.len() != state.coords.len() {
        return Err(Error::InvalidArgument(format!(
            "{} signs for {} coordinates",
            signs.len(),
            state.coords.len()
        )));
    }
    let v = state.v();
    let bits = v.prec();
    if *v >= 0 {
        return Err(Error::OutOfDomain(format!("v = {} is not negative", v.to_f64())));
    }
    let scale = Float::with_val(bits, -v).sqrt();
    let orbit = state.orbit();
    let mut coords = Vec::with_capacity(state.coords.len());
    // orbit[1..n-1] = w_1 .. w_{n-2} feed w'_2 .. w'_{n-1}
    for (w, &sign) in orbit[1..state.n - 1].iter().zip(signs) {
        let radicand = Float::with_val(bits, w - v);
        if radicand <= 0 {
            return Err(Error::OutOfDomain(format!("radicand {} is not positive", radicand.to_f64())));
        }
        let root = radicand.sqrt() / &scale;
        coords.push(match sign {
            1 => root,
            -1 => -root,
            other => return Err(Error::InvalidArgument(format!("branch sign must be +1 or -1, got {other}"))),
        });
    }
    SkinningState::new(state.n, coords)
}

/// The skinning map on the slice; leaving the slice is an error.
pub fn sigma(state: &SkinningState) -> Result<SkinningState> {
    if !state.in_slice() {
        return Err(Error::OutOfDomain("input state is not in the slice".into()));
    }
    let out = sigma_with_signs(state, &default_signs(state.n))?;
    if !out.in_slice() {
        return Err(Error::OutOfDomain("image state is not in the slice".into()));
    }
    Ok(out)
}

/// Fixed-point iteration from `seed` until the sup-norm change drops below
/// `tol`; also returns the sequence of changes.
pub fn solve_fixed_point_traced(seed: SkinningState, tol: f64) -> Result<(SkinningState, Vec<f64>)> {
    let mut state = seed;
    let mut changes = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let next = sigma(&state)?;
        let change = next.sup_distance(&state);
        changes.push(change.to_f64());
        state = next;
        if change < tol {
            return Ok((state, changes));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        context: "skinning fixed point",
    })
}

pub fn solve_fixed_point_from(seed: SkinningState, tol: f64) -> Result<SkinningState> {
    Ok(solve_fixed_point_traced(seed, tol)?.0)
}

pub fn solve_fixed_point(n: usize, prec: Precision, tol: f64) -> Result<SkinningState> {
    solve_fixed_point_from(SkinningState::seed(n, prec)?, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkinningRow {
    pub n: usize,
    pub v: Float,
    pub c: Float,
    /// `(v_n + sqrt 2) 4^n`.
    pub s: Float,
}

fn scaled_gap(v: &Float, n: usize) -> Float {
    let bits = v.prec();
    let root2 = Float::with_val(bits, 2).sqrt();
    (Float::with_val(bits, v + &root2)) << (2 * n as u32)
}

/// Rows `n_min..=n_max`; the solves run in parallel and are ordered by `n`.
pub fn v_table(n_min: usize, n_max: usize, prec: Precision, tol: f64) -> Result<Vec<SkinningRow>> {
    if n_min < 3 || n_min > n_max {
        return Err(Error::InvalidArgument(format!("need 3 <= n_min <= n_max, got {n_min}..{n_max}")));
    }
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let state = solve_fixed_point(n, prec, tol)?;
            Ok(SkinningRow {
                n,
                v: state.v().clone(),
                c: state.c(),
                s: scaled_gap(state.v(), n),
            })
        })
        .collect()
}

pub fn table_csv(rows: &[SkinningRow], digits: usize) -> String {
    let mut table = CsvTable::new(["n", "v_n", "c_n", "s_n"]);
    for row in rows {
        table.push(vec![
            row.n.to_string(),
            fmt_float(&row.v, digits),
            fmt_float(&row.c, digits),
            fmt_float(&row.s, digits),
        ]);
    }
    table.render()
}

pub(crate) fn fmt_float(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSeries {
    /// `(n, s_n)` for `n = 3..=n_max`.
    pub terms: Vec<(usize, Float)>,
    pub limit: Float,
    pub error: f64,
}

/// Scaled series and a one-step Richardson extrapolation whose ratio is
/// estimated from the last three terms.
pub fn limit_series(n_max: usize, prec: Precision) -> Result<LimitSeries> {
    prec.require(4 * n_max as u32 + 64, "the skinning limit-series precision rule")?;
    if n_max < 5 {
        return Err(Error::InvalidArgument(format!("limit series needs n_max >= 5, got {n_max}")));
    }
    let tol = prec.tolerance(8).to_f64();
    let rows = v_table(3, n_max, prec, tol)?;
    let terms: Vec<(usize, Float)> = rows.into_iter().map(|r| (r.n, r.s)).collect();
    let bits = prec.bits();
    let k = terms.len();
    let (a, b, c) = (&terms[k - 3].1, &terms[k - 2].1, &terms[k - 1].1);
    let d1 = Float::with_val(bits, b - a);
    let d2 = Float::with_val(bits, c - b);
    if d1.is_zero() {
        return Ok(LimitSeries { limit: c.clone(), error: 0.0, terms });
    }
    let ratio = Float::with_val(bits, &d2 / &d1);
    if Float::with_val(bits, ratio.abs_ref()) >= 1 {
        return Err(Error::NotConverged(format!("series ratio {} is not contracting", ratio.to_f64())));
    }
    let one_minus = Float::with_val(bits, 1 - &ratio);
    let correction = Float::with_val(bits, &d2 * &ratio) / &one_minus;
    let limit = Float::with_val(bits, c + &correction);
    let error = correction.to_f64().abs().max(d2.to_f64().abs() * ratio.to_f64().abs().powi(2));
    Ok(LimitSeries { terms, limit, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::BigComplex;
    use crate::dynamics::in_mandelbrot;

    fn prec() -> Precision {
        Precision::new(128).unwrap()
    }

    const TABLE: [f64; 7] = [-1.32472, -1.39313, -1.40905, -1.41293, -1.41389, -1.41413, -1.41419];

    #[test]
    fn table_rows() {
        let rows = v_table(3, 9, prec(), 1e-30).unwrap();
        for (row, expect) in rows.iter().zip(TABLE) {
            assert!((row.v.to_f64() - expect).abs() < 5e-6, "n = {}: {}", row.n, row.v);
        }
        for pair in rows.windows(2) {
            assert!(pair[1].v < pair[0].v);
            assert!((pair[1].c.to_f64() + 2.0).abs() < (pair[0].c.to_f64() + 2.0).abs());
        }
    }

    #[test]
    fn period_three_center_by_bisection() {
        // real root of (c^2 + c)^2 + c = 0 in [-2, -1.5]
        let g = |c: f64| (c * c + c).powi(2) + c;
        let (mut lo, mut hi) = (-2.0f64, -1.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo).signum() == g(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let state = solve_fixed_point(3, prec(), 1e-30).unwrap();
        assert!((state.c().to_f64() - lo).abs() < 1e-13);
    }

    #[test]
    fn fixed_state_is_fixed() {
        let state = solve_fixed_point(7, prec(), 1e-32).unwrap();
        let image = sigma(&state).unwrap();
        assert!(image.sup_distance(&state) < 1e-31);
    }

    #[test]
    fn first_image_coordinate_exceeds_one() {
        let image = sigma(&SkinningState::seed(6, prec()).unwrap()).unwrap();
        assert!(image.coords[0] > 1);
    }

    #[test]
    fn changes_decrease_after_burn_in() {
        for n in [3, 6, 10] {
            let (_, changes) = solve_fixed_point_traced(SkinningState::seed(n, prec()).unwrap(), 1e-30).unwrap();
            for pair in changes[5..].windows(2) {
                assert!(pair[1] < pair[0], "n = {n}");
            }
        }
    }

    #[test]
    fn seed_independence() {
        let bits = prec().bits();
        for n in 3..=12 {
            let other: Vec<Float> = (2..n - 1)
                .map(|j| Float::with_val(bits, 1.0 + 0.3 * (j - 1) as f64))
                .chain([Float::with_val(bits, -0.5)])
                .collect();
            let a = solve_fixed_point(n, prec(), 1e-30).unwrap();
            let b = solve_fixed_point_from(SkinningState::new(n, other).unwrap(), 1e-30).unwrap();
            assert!(Float::with_val(bits, a.v() - b.v()).abs() < 1e-28, "n = {n}");
        }
    }

    #[test]
    fn parameters_lie_in_the_mandelbrot_set() {
        for row in v_table(3, 10, prec(), 1e-30).unwrap() {
            let c = BigComplex::from_real(prec(), &row.c);
            assert!(in_mandelbrot(&c, 500, 2.0), "n = {}", row.n);
        }
    }

    #[test]
    fn domain_errors() {
        let bits = prec().bits();
        let state = SkinningState::new(3, vec![Float::with_val(bits, 0.5)]).unwrap();
        assert!(matches!(sigma(&state), Err(Error::OutOfDomain(_))));
        let unordered = SkinningState::new(
            5,
            vec![Float::with_val(bits, 2), Float::with_val(bits, 1.5), Float::with_val(bits, -1)],
        )
        .unwrap();
        assert!(matches!(sigma(&unordered), Err(Error::OutOfDomain(_))));
        assert!(SkinningState::seed(2, prec()).is_err());
    }

    #[test]
    fn limit_series_precision_rule() {
        assert!(matches!(
            limit_series(20, prec()),
            Err(Error::PrecisionTooLow { required: 144, got: 128, .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let rows = v_table(3, 4, prec(), 1e-30).unwrap();
        let csv = table_csv(&rows, 10);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,v_n,c_n,s_n"));
        assert!(lines.next().unwrap().starts_with("3,-1.324717957"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn limit_series_extrapolates() {
        let series = limit_series(14, Precision::new(192).unwrap()).unwrap();
        let target = 3.0 * 2f64.sqrt() / 8.0 * std::f64::consts::PI.powi(2);
        assert!((series.limit.to_f64() - target).abs() < 1e-5, "{}", series.limit);
        assert!(series.error < 1e-4);
        assert_eq!(series.terms.len(), 12);
    }
}
