use std::f64::consts::PI;

use gibbsfree_core::functions::{h, ramp_sum};
use gibbsfree_core::jumps::{circular_distance, wrap_angle};
use gibbsfree_core::prony::{prony_estimate, prony_observations, PronyConfig};
use gibbsfree_core::spectral::{convergence_slope, match_jump_sets};
use gibbsfree_core::JumpSet;
use num_complex::Complex64;
use proptest::prelude::*;

/// A band limit and a jump set whose locations are at least `2π/N` apart
/// with `N ≥ 4J`.
fn instances() -> impl Strategy<Value = (JumpSet, usize)> {
    (1usize..=5)
        .prop_flat_map(|j| {
            (
                prop::collection::vec((-PI..PI, 0.1f64..=10.0, any::<bool>()), j),
                (4 * j).max(8)..=64usize,
            )
        })
        .prop_filter_map("separated", |(raw, n)| {
            let sep = 2.0 * PI / n as f64;
            let ok = raw
                .iter()
                .enumerate()
                .all(|(i, a)| raw[i + 1..].iter().all(|b| circular_distance(a.0, b.0) >= sep));
            let pairs: Vec<(f64, f64)> = raw.iter().map(|&(x, a, neg)| (x, if neg { -a } else { a })).collect();
            if ok {
                JumpSet::from_pairs(&pairs).ok().map(|j| (j, n))
            } else {
                None
            }
        })
}

fn estimate(jumps: &JumpSet, n: usize, cfg: &PronyConfig) -> JumpSet {
    let spec = ramp_sum(jumps).fourier_coeffs_exact(n).unwrap();
    prony_estimate(&spec, cfg).unwrap().jumps
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn noiseless_ramp_sums_are_recovered(( jumps, n) in instances(), refine in any::<bool>()) {
        let cfg = PronyConfig { refine, ..PronyConfig::with_order(jumps.len()) };
        let m = match_jump_sets(&jumps, &estimate(&jumps, n, &cfg)).unwrap();
        prop_assert!(m.eps_location <= 1e-9 && m.delta_height <= 1e-9, "{:?}", m);
    }

    #[test]
    fn shifting_the_spectrum_shifts_the_locations((jumps, n) in instances(), s in -PI..PI) {
        let cfg = PronyConfig::with_order(jumps.len());
        let spec = ramp_sum(&jumps).fourier_coeffs_exact(n).unwrap();
        let base = prony_estimate(&spec, &cfg).unwrap().jumps;
        let moved = prony_estimate(&spec.shifted(s), &cfg).unwrap().jumps;
        let expected = JumpSet::from_pairs(
            &base.iter().map(|j| (wrap_angle(j.location + s), j.height)).collect::<Vec<_>>(),
        ).unwrap();
        let m = match_jump_sets(&expected, &moved).unwrap();
        prop_assert!(m.eps_location <= 1e-9 && m.delta_height <= 1e-9, "{:?}", m);
    }

    #[test]
    fn scaling_the_spectrum_scales_the_heights((jumps, n) in instances(), lambda in 0.1f64..10.0) {
        let cfg = PronyConfig::with_order(jumps.len());
        let spec = ramp_sum(&jumps).fourier_coeffs_exact(n).unwrap();
        let base = prony_estimate(&spec, &cfg).unwrap().jumps;
        let scaled = prony_estimate(&spec.scaled(lambda), &cfg).unwrap().jumps;
        let expected = JumpSet::from_pairs(
            &base.iter().map(|j| (j.location, lambda * j.height)).collect::<Vec<_>>(),
        ).unwrap();
        let m = match_jump_sets(&expected, &scaled).unwrap();
        prop_assert!(m.eps_location <= 1e-10, "{:?}", m);
        // Relative to the largest scaled height.
        let top = scaled.iter().map(|j| j.height.abs()).fold(1.0, f64::max);
        prop_assert!(m.delta_height <= 1e-10 * top, "{:?}", m);
    }
}

#[test]
fn three_ramps_at_band_16() {
    let truth = JumpSet::from_pairs(&[(-2.0, 0.5), (0.3, -1.25), (2.7, 2.0)]).unwrap();
    let m = match_jump_sets(&truth, &estimate(&truth, 16, &PronyConfig::with_order(3))).unwrap();
    assert!(m.eps_location <= 1e-10 && m.delta_height <= 1e-10, "{m:?}");
}

#[test]
fn unit_ramp_observations_are_pure_exponentials() {
    let truth = JumpSet::from_pairs(&[(1.0, 1.0)]).unwrap();
    let y = prony_observations(&ramp_sum(&truth).fourier_coeffs_exact(12).unwrap());
    for (i, v) in y.iter().enumerate() {
        let k = (i + 1) as f64;
        assert!((v - Complex64::from_polar(1.0, -k)).norm() < 1e-12);
    }
}

#[test]
fn h_errors_shrink_quadratically() {
    let f = h();
    let truth = f.jump_set();
    let ns = [25, 50, 100, 200];
    let mut eps = Vec::new();
    for &n in &ns {
        let spec = f.fourier_coeffs_exact(n).unwrap();
        // Raw linear prediction, without the nonlinear polish.
        let cfg = PronyConfig { refine: false, ..PronyConfig::with_order(6) };
        let m = match_jump_sets(&truth, &prony_estimate(&spec, &cfg).unwrap().jumps).unwrap();
        if n == 50 {
            assert!(m.eps_location <= 1e-2 && m.delta_height <= 1e-2, "{m:?}");
            let polished = prony_estimate(&spec, &PronyConfig::with_order(6)).unwrap().jumps;
            let p = match_jump_sets(&truth, &polished).unwrap();
            assert!(p.eps_location <= 1e-3, "{p:?}");
        }
        eps.push(m.eps_location);
    }
    let slope = convergence_slope(&ns, &eps).unwrap();
    assert!(slope <= -1.6, "{slope}");
}
