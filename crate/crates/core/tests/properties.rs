use std::sync::OnceLock;

use proptest::collection::vec;
use proptest::prelude::*;

use pcf_surgery::backward::{backward_orbit, reduce_to_annulus, sample_limit_set, BranchPolicy};
use pcf_surgery::dynamics::{BranchSelector, QuadraticMap};
use pcf_surgery::misiurewicz::{solve_misiurewicz, MisiurewiczData};
use pcf_surgery::similarity::hausdorff::{directed, hausdorff_f64, Metric, C64};
use pcf_surgery::similarity::sample_julia;
use pcf_surgery::skinning::{solve_fixed_point, solve_fixed_point_from, solve_fixed_point_traced, SkinningState};
use pcf_surgery::surgery::{annulus_distance, build_sequence, solve_surgery_step, SurgerySequence, RESIDUAL_SLACK};
use pcf_surgery::{BigComplex, Precision};

fn prec(bits: u32) -> Precision {
    Precision::new(bits).unwrap()
}

fn tip(bits: u32) -> MisiurewiczData {
    let p = prec(bits);
    solve_misiurewicz(2, 1, &BigComplex::new(p, -1.9, 0.0), p).unwrap()
}

fn rabbit_ear(bits: u32) -> MisiurewiczData {
    let p = prec(bits);
    solve_misiurewicz(2, 2, &BigComplex::new(p, 0.1, 1.1), p).unwrap()
}

fn tol(p: Precision, slack: u32) -> f64 {
    p.tolerance(slack).to_f64()
}

fn tip_sequence() -> &'static SurgerySequence {
    static SEQ: OnceLock<SurgerySequence> = OnceLock::new();
    SEQ.get_or_init(|| {
        let data = tip(192);
        let orbit = backward_orbit(&data, &BigComplex::zero(data.prec), BranchPolicy::TrackCycle, 30).unwrap();
        build_sequence(&data, &orbit, 3, 8).unwrap()
    })
}

fn brute(a: &[C64], b: &[C64], metric: Metric) -> f64 {
    let one = |x: &[C64], y: &[C64]| {
        x.iter()
            .map(|&p| y.iter().map(|&q| metric.distance(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

fn cloud(len: usize) -> impl Strategy<Value = Vec<C64>> {
    vec((-3.0f64..3.0, -3.0f64..3.0), 1..len)
}

#[test]
fn multiplier_is_the_same_from_every_cycle_point() {
    let p = prec(160);
    let airplane = QuadraticMap::new(&BigComplex::new(p, -1.7548776662466927, 0.0), p);
    let cases = [(rabbit_ear(160).map(), rabbit_ear(160).orbit), (tip(160).map(), tip(160).orbit)];
    for (f, orbit) in cases {
        let mus: Vec<BigComplex> = orbit.iter().map(|z| f.multiplier(z, orbit.len()).unwrap()).collect();
        for mu in &mus {
            assert!(mu.dist(&mus[0]).to_f64() <= tol(p, 8) * mus[0].abs_f64());
        }
    }
    // a period-3 cycle of the airplane's neighbour
    let z = airplane.newton_periodic(3, &BigComplex::new(p, -1.8, 0.0)).unwrap();
    let orbit = airplane.iterate(&z, 2).unwrap().points;
    let mus: Vec<BigComplex> = orbit.iter().map(|w| airplane.multiplier(w, 3).unwrap()).collect();
    for mu in &mus {
        assert!(mu.dist(&mus[0]).to_f64() <= tol(p, 8) * mus[0].abs_f64().max(1.0));
    }
}

#[test]
fn scaled_tails_are_cauchy() {
    for data in [tip(320), rabbit_ear(256)] {
        let orbit = backward_orbit(&data, &BigComplex::zero(data.prec), BranchPolicy::TrackCycle, 50).unwrap();
        let diffs: Vec<f64> = orbit.scaled.windows(2).map(|w| w[1].dist(&w[0]).to_f64()).collect();
        for w in diffs[3..].windows(2) {
            assert!(w[1] < w[0], "{diffs:?}");
        }
    }
}

#[test]
fn tip_limit_set_is_real() {
    let data = tip(128);
    let cloud = sample_limit_set(&data, 12, 1 << 14).unwrap();
    let worst = cloud.points.iter().map(|z| z.im().to_f64().abs()).fold(0.0, f64::max);
    assert!(worst <= tol(data.prec, 16));
}

#[test]
fn doubling_precision_keeps_the_leading_bits() {
    for (k, p, seed) in [(2, 1, (-1.9, 0.0)), (2, 2, (0.1, 1.1)), (3, 1, (-0.2, 1.0))] {
        let lo = solve_misiurewicz(k, p, &BigComplex::new(prec(128), seed.0, seed.1), prec(128)).unwrap();
        let hi = solve_misiurewicz(k, p, &BigComplex::new(prec(256), seed.0, seed.1), prec(256)).unwrap();
        let gap = hi.c.dist(&lo.c.with_prec(prec(256))).to_f64();
        assert!(gap <= 2f64.powi(-(64 - 16)) * hi.c.abs_f64(), "({k},{p}): {gap:e}");
    }
}

#[test]
fn skinning_iteration_is_attracting() {
    for n in [5, 8, 11] {
        let seed = SkinningState::seed(n, prec(128)).unwrap();
        let (_, changes) = solve_fixed_point_traced(seed, 1e-30).unwrap();
        for w in changes[5..].windows(2) {
            assert!(w[1] <= w[0], "n = {n}: {changes:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn iteration_composes(re in -2.0f64..0.5, im in -1.0f64..1.0, zr in -1.0f64..1.0, a in 0usize..12, b in 0usize..12) {
        let p = prec(128);
        let f = QuadraticMap::new(&BigComplex::new(p, re, im), p);
        let z0 = BigComplex::new(p, zr, 0.25);
        let Ok(whole) = f.iterate(&z0, a + b) else { return Ok(()); };
        let first = f.iterate(&z0, a).unwrap();
        let second = f.iterate(first.last(), b).unwrap();
        let (x, y) = (whole.last(), second.last());
        prop_assert!(x.dist(y).to_f64() <= tol(p, 8) * x.abs_f64().max(1.0));
    }

    #[test]
    fn inverse_then_forward_is_the_identity(
        re in -2.0f64..2.0, im in -2.0f64..2.0, zr in -3.0f64..3.0, zi in -3.0f64..3.0, pick in 0usize..3,
    ) {
        let p = prec(128);
        let f = QuadraticMap::new(&BigComplex::new(p, re, im), p);
        let z = BigComplex::new(p, zr, zi);
        let branch = match pick {
            0 => BranchSelector::Principal,
            1 => BranchSelector::SignSequence(vec![-1]),
            _ => BranchSelector::NearestTo(BigComplex::new(p, 1.0, -0.5)),
        };
        let Ok(q) = f.inverse_step(&z, &branch) else { return Ok(()); };
        let back = f.apply(&q).unwrap();
        prop_assert!(back.dist(&z).to_f64() <= tol(p, 8) * z.abs_f64().max(1.0));
    }

    #[test]
    fn param_derivative_matches_central_differences(re in -1.9f64..0.2, im in -0.6f64..0.6, n in 1usize..=12) {
        let p = prec(256);
        let c = BigComplex::new(p, re, im);
        let h = 2f64.powi(-(256 / 3));
        let step = BigComplex::new(p, h, 0.0);
        let at = |c: BigComplex| QuadraticMap::new(&c, p).critical_orbit(n).unwrap().last().clone();
        let fd = (at(&c + &step) - at(&c - &step)) / step.scale(2.0);
        let exact = QuadraticMap::new(&c, p).param_derivative(n).unwrap();
        // error ~ h^2 |f'''| / 6, allowed to grow like 4^n
        let scale = exact.abs_f64().max(1.0) * 2f64.powi(2 * n as i32);
        prop_assert!(fd.dist(&exact).to_f64() <= h * h * scale);
    }

    #[test]
    fn reduction_is_idempotent_and_mu_invariant(
        zr in -50.0f64..50.0, zi in -50.0f64..50.0, mr in 1.0f64..5.0, mi in -3.0f64..3.0,
    ) {
        let p = prec(128);
        let z = BigComplex::new(p, zr, zi);
        let mu = BigComplex::new(p, mr, mi);
        prop_assume!(!z.is_zero() && mu.abs_f64() > 1.2);
        let r = reduce_to_annulus(&z, &mu).unwrap();
        prop_assert!(r.abs_f64() >= 1.0 && r.abs() < mu.abs());
        prop_assert_eq!(reduce_to_annulus(&r, &mu).unwrap(), r.clone());
        let shifted = reduce_to_annulus(&(&z * &mu), &mu).unwrap();
        prop_assert!(annulus_distance(&shifted, &r, &mu).unwrap() <= tol(p, 16) * mu.abs_f64());
    }

    #[test]
    fn backward_then_forward_returns_to_the_start(k in 1usize..=20, ear in any::<bool>()) {
        let data = if ear { rabbit_ear(192) } else { tip(192) };
        let orbit = backward_orbit(&data, &BigComplex::zero(data.prec), BranchPolicy::TrackCycle, 20).unwrap();
        let image = data.map().iterate(&orbit.points[k], k).unwrap();
        // rounding at each step is amplified by |f'| = |2 q_j| on the way forward
        let gain: f64 = orbit.points[1..k].iter().map(|q| (2.0 * q.abs_f64()).max(1.0)).product();
        let bound = 2f64.powi(-(192 - 8)) * gain * 2f64.powi(k as i32);
        prop_assert!(image.last().dist(&orbit.points[0]).to_f64() <= bound);
    }

    #[test]
    fn perturbed_seeds_reach_the_same_parameter(r in 0.0f64..1e-3, angle in 0.0f64..std::f64::consts::TAU) {
        let p = prec(128);
        for (k, per, seed, exact) in [(2, 1, (-2.0, 0.0), tip(128)), (2, 2, (0.0, 1.0), rabbit_ear(128))] {
            let s = BigComplex::new(p, seed.0 + r * angle.cos(), seed.1 + r * angle.sin());
            let data = solve_misiurewicz(k, per, &s, p).unwrap();
            prop_assert!(data.c.dist(&exact.c).to_f64() <= tol(p, 20));
        }
    }

    #[test]
    fn skinning_fixed_point_is_seed_independent(n in 4usize..=12, shift in 0.0f64..0.3, v in -1.9f64..-1.05) {
        let p = prec(128);
        let coords = (2..=n - 2)
            .map(|j| rug::Float::with_val(128, 1.0 + shift * (j as f64).sin().abs()))
            .chain([rug::Float::with_val(128, v)])
            .collect();
        let Ok(seed) = SkinningState::new(n, coords) else { return Ok(()); };
        prop_assume!(seed.in_slice());
        let a = solve_fixed_point_from(seed, 1e-30).unwrap();
        let b = solve_fixed_point(n, p, 1e-30).unwrap();
        prop_assert!(rug::Float::with_val(128, a.v() - b.v()).abs().to_f64() <= 1e-25);
    }

    #[test]
    fn surgery_seeds_are_robust(angle in 0.0f64..std::f64::consts::TAU, pick in 0usize..6) {
        let seq = tip_sequence();
        let data = &seq.base;
        let e = &seq.entries[pick];
        let shift = 0.3 * data.mu.abs_f64().powi(-(e.n as i32));
        let seed = &e.c + &BigComplex::new(data.prec, shift * angle.cos(), shift * angle.sin());
        let (c, _) = solve_surgery_step(data, &seq.orbit_ref, e.n, &seed).unwrap();
        prop_assert!(c.dist(&e.c) < data.prec.tolerance(RESIDUAL_SLACK));
    }

    #[test]
    fn hausdorff_is_a_pseudometric(a in cloud(40), b in cloud(40), c in cloud(40)) {
        let e = Metric::Euclidean;
        let ab = hausdorff_f64(&a, &b, e).unwrap();
        prop_assert_eq!(ab, hausdorff_f64(&b, &a, e).unwrap());
        prop_assert_eq!(hausdorff_f64(&a, &a, e).unwrap(), 0.0);
        let ac = hausdorff_f64(&a, &c, e).unwrap();
        let bc = hausdorff_f64(&b, &c, e).unwrap();
        // exact up to the rounding of one addition
        prop_assert!(ac <= (ab + bc) * (1.0 + f64::EPSILON));
    }

    #[test]
    fn bucketed_search_equals_the_double_loop(a in cloud(60), b in cloud(60), mr in -3.0f64..3.0, mi in 1.5f64..4.0) {
        for metric in [Metric::Euclidean, Metric::Annulus { mu: (mr, mi) }] {
            prop_assert_eq!(hausdorff_f64(&a, &b, metric).unwrap(), brute(&a, &b, metric));
        }
    }

    #[test]
    fn annulus_distance_never_exceeds_euclidean(a in cloud(30), b in cloud(30), mr in -3.0f64..3.0, mi in 1.5f64..4.0) {
        let annulus = hausdorff_f64(&a, &b, Metric::Annulus { mu: (mr, mi) }).unwrap();
        prop_assert!(annulus <= hausdorff_f64(&a, &b, Metric::Euclidean).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn julia_samples_are_invariant(state in any::<u64>(), which in 0usize..3) {
        let p = prec(64);
        let c = [BigComplex::new(p, 0.0, 0.0), BigComplex::new(p, -2.0, 0.0), BigComplex::new(p, 0.0, 1.0)][which].clone();
        let cloud = sample_julia(&c, 2000, state).unwrap();
        let f = QuadraticMap::new(&c, p);
        let image: Vec<C64> = cloud.points.iter().map(|z| f.apply(z).unwrap().to_f64_pair()).collect();
        prop_assert!(directed(&image, &cloud.approx(), Metric::Euclidean).unwrap() <= cloud.meta.resolution);
    }
}
