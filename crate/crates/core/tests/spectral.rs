use std::f64::consts::PI;

use gibbsfree_core::functions::{h, ramp_sum};
use gibbsfree_core::jumps::circular_distance;
use gibbsfree_core::spectral::{
    edge_augmented_sum, estimated_jump_error_bound, fit_bound_constant, l2_error, parseval_tail_error,
    partial_sum, perturb_jumps, points_away_from, tail_form_check, uniform_grid, Reconstruction,
};
use gibbsfree_core::{JumpSet, Side, Spectrum1D};
use num_complex::Complex64;
use proptest::prelude::*;

fn separated_jumps(min_sep: f64) -> impl Strategy<Value = JumpSet> {
    prop::collection::vec((-PI..PI, 0.1f64..10.0, any::<bool>()), 1..6).prop_filter_map("separated", move |raw| {
        let pairs: Vec<(f64, f64)> = raw.iter().map(|&(x, a, neg)| (x, if neg { -a } else { a })).collect();
        let ok = pairs
            .iter()
            .enumerate()
            .all(|(i, a)| pairs[i + 1..].iter().all(|b| circular_distance(a.0, b.0) >= min_sep));
        if ok {
            JumpSet::from_pairs(&pairs).ok()
        } else {
            None
        }
    })
}

fn real_spectrum() -> impl Strategy<Value = Spectrum1D> {
    (1usize..24).prop_flat_map(|band| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), band + 1).prop_map(move |c| {
            Spectrum1D::from_fn(band, |k| {
                let (re, im) = c[k.unsigned_abs() as usize];
                match k.signum() {
                    0 => Complex64::new(re, 0.0),
                    1 => Complex64::new(re, im),
                    _ => Complex64::new(re, -im),
                }
            })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn empty_jumps_equal_partial_sum_exactly(spec in real_spectrum(), n in 1usize..200) {
        let grid = uniform_grid(n);
        let a = partial_sum(&spec, &grid).unwrap();
        let b = edge_augmented_sum(&spec, &JumpSet::empty(), &grid).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn ramp_sums_are_reproduced_exactly(jumps in separated_jumps(1e-3), band in 1usize..64) {
        let f = ramp_sum(&jumps);
        let spec = f.fourier_coeffs_exact(band).unwrap();
        let grid = points_away_from(&uniform_grid(997), &jumps, 1e-6);
        let rec = edge_augmented_sum(&spec, &jumps, &grid).unwrap();
        for (x, v) in grid.iter().zip(&rec.values) {
            prop_assert!((v - f.eval(*x, Side::Average)).abs() <= 1e-12, "x = {}", x);
        }
    }
}

#[test]
fn tail_form_agrees_with_closed_form_for_h() {
    let f = h();
    let jumps = f.jump_set();
    let spec = f.fourier_coeffs_exact(20).unwrap();
    let grid = points_away_from(&uniform_grid(200), &jumps, 0.05);
    let d = tail_form_check(&spec, &jumps, &grid, 10_000).unwrap();
    assert!(d <= 5e-3, "{d}");
    assert_eq!(tail_form_check(&spec, &JumpSet::empty(), &grid, 10_000).unwrap(), 0.0);
}

#[test]
fn tail_form_discrepancy_shrinks_with_more_terms() {
    let jumps = JumpSet::from_pairs(&[(0.4, 1.0)]).unwrap();
    let spec = ramp_sum(&jumps).fourier_coeffs_exact(20).unwrap();
    let grid = points_away_from(&uniform_grid(64), &jumps, 0.05);
    let coarse = tail_form_check(&spec, &jumps, &grid, 10_000).unwrap();
    let fine = tail_form_check(&spec, &jumps, &grid, 20_000).unwrap();
    assert!(fine < coarse, "{fine} !< {coarse}");
}

#[test]
fn quadrature_l2_error_matches_parseval_tail() {
    let f = h();
    for band in [32, 128] {
        let spec = f.fourier_coeffs_exact(band).unwrap();
        let quad = l2_error(&f, &Reconstruction::standard(&spec), 16);
        let tail = parseval_tail_error(&f, band, 100_000).unwrap();
        assert!((quad - tail).abs() <= 1e-3 * tail, "N = {band}: {quad} vs {tail}");
    }
}

#[test]
fn standard_error_halves_when_band_quadruples() {
    let f = h();
    let e = |n| l2_error(&f, &Reconstruction::standard(&f.fourier_coeffs_exact(n).unwrap()), 16);
    let ratio = e(128) / e(32);
    assert!((ratio - 0.5).abs() <= 0.125, "{ratio}");
}

#[test]
fn partial_sum_converges_to_midpoint_at_a_jump() {
    let f = h();
    let x = -0.5 * PI;
    let mid = f.eval(x, Side::Average);
    let errs: Vec<f64> = [64, 256, 1024]
        .iter()
        .map(|&n| (Reconstruction::standard(&f.fourier_coeffs_exact(n).unwrap()).eval(x).unwrap() - mid).abs())
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn gibbs_overshoot_persists_at_band_100() {
    let f = h();
    let spec = f.fourier_coeffs_exact(100).unwrap();
    let rec = Reconstruction::standard(&spec);
    let x0 = -0.5 * PI;
    let jump = (f.eval(x0, Side::Right) - f.eval(x0, Side::Left)).abs();
    let worst = (1..200)
        .flat_map(|i| [x0 - 0.2 * i as f64 / 200.0, x0 + 0.2 * i as f64 / 200.0])
        .map(|x| (rec.eval(x).unwrap() - f.eval(x, Side::Average)).abs())
        .fold(0.0, f64::max);
    assert!(worst > 0.03 * jump, "{worst}");
}

#[test]
fn twenty_modes_with_true_jumps_beat_a_hundred_without() {
    let f = h();
    let jumps = f.jump_set();
    let grid = points_away_from(&uniform_grid(2000), &jumps, 0.05);
    let max_err = |rec: &Reconstruction| {
        grid.iter().map(|&x| (rec.eval(x).unwrap() - f.eval(x, Side::Average)).abs()).fold(0.0, f64::max)
    };
    let edge = max_err(&Reconstruction::edge_augmented(&f.fourier_coeffs_exact(20).unwrap(), &jumps));
    let plain = max_err(&Reconstruction::standard(&f.fourier_coeffs_exact(100).unwrap()));
    assert!(edge < plain, "{edge} vs {plain}");
}

#[test]
fn perturbed_jump_errors_stay_within_the_budget() {
    let f = h();
    let truth = f.jump_set();
    let ns = [16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512];
    let errors: Vec<f64> = ns
        .iter()
        .map(|&n| l2_error(&f, &Reconstruction::edge_augmented(&f.fourier_coeffs_exact(n).unwrap(), &truth), 16))
        .collect();
    let c = fit_bound_constant(&ns, &errors, 2.0).unwrap();
    let band = 64;
    let spec = f.fourier_coeffs_exact(band).unwrap();
    let levels = [1e-4, 1e-3, 1e-2, 1e-1];
    for eps in levels {
        for delta in levels {
            let est = perturb_jumps(&truth, eps, delta).unwrap();
            let err = l2_error(&f, &Reconstruction::edge_augmented(&spec, &est), 16);
            let bound = estimated_jump_error_bound(c, band, eps, delta, &truth).unwrap();
            assert!(err <= bound, "eps {eps} delta {delta}: {err} > {bound}");
        }
    }
}
