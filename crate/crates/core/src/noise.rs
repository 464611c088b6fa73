//! Complex Gaussian measurement noise on Fourier coefficients.
//!
//! For a target SNR in dB the per-coefficient variance is
//! `σ² = Σ_k |f̂_k|² / ((2N+1)·10^{SNR/10})`, and each coefficient receives an
//! independent `𝒞𝒩(0, σ²)` sample (real and imaginary parts `N(0, σ²/2)`).

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::Detector;
use crate::error::{Error, Result};
use crate::jumps::JumpSet;
use crate::spectral::match_jump_sets;
use crate::spectrum::Spectrum1D;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

pub fn noise_variance(spectrum: &Spectrum1D, snr_db: f64) -> Result<f64> {
    let energy = spectrum.energy();
    if energy == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let terms = (2 * spectrum.band() + 1) as f64;
    Ok(energy / (terms * 10f64.powf(snr_db / 10.0)))
}

/// Returns a noisy copy; the result is marked noisy so downstream realness
/// checks are relaxed.
pub fn add_noise(spectrum: &Spectrum1D, noise: NoiseSpec) -> Result<Spectrum1D> {
    let var = noise_variance(spectrum, noise.snr_db)?;
    let normal = Normal::new(0.0, (0.5 * var).sqrt())
        .map_err(|e| Error::InvalidConfig(format!("noise level: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(noise.seed);
    let mut out = spectrum.clone();
    for c in out.coeffs_mut() {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *c += Complex64::new(re, im);
    }
    out.mark_noisy();
    Ok(out)
}

/// Mixes the master seed with a trial index and band limit (splitmix64
/// finaliser on each input in turn).
pub fn sub_seed(master: u64, trial: u64, band: u64) -> u64 {
    let mut z = master;
    for v in [trial, band] {
        z = splitmix(z ^ splitmix(v.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    z
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One row of a noise sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepRow {
    #[serde(rename = "N")]
    pub band: usize,
    pub estimator: String,
    pub snr_db: f64,
    pub mean_eps: f64,
    pub mean_delta: f64,
    pub skip_fraction: f64,
}

/// Trial-averaged jump errors per band limit. `spectrum_for(N)` supplies the
/// clean spectrum; `snr_db = +∞` runs without noise. Trials whose estimate
/// has the wrong number of jumps (or fails outright) are skipped and counted.
pub fn noise_sweep<F>(
    spectrum_for: F,
    truth: &JumpSet,
    detector: &Detector,
    ns: &[usize],
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<NoiseSweepRow>>
where
    F: Fn(usize) -> Result<Spectrum1D> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    ns.iter()
        .map(|&n| {
            let clean = spectrum_for(n)?;
            let outcomes: Vec<Option<(f64, f64)>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let spec = if snr_db.is_infinite() && snr_db > 0.0 {
                        clean.clone()
                    } else {
                        let seed = sub_seed(seed, t as u64, n as u64);
                        add_noise(&clean, NoiseSpec { snr_db, seed }).ok()?
                    };
                    let est = detector.detect(&spec).ok()?;
                    let m = match_jump_sets(truth, &est).ok()?;
                    Some((m.eps_location, m.delta_height))
                })
                .collect();
            let kept: Vec<(f64, f64)> = outcomes.iter().flatten().copied().collect();
            let skip_fraction = 1.0 - kept.len() as f64 / trials as f64;
            let (mean_eps, mean_delta) = if kept.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                let c = kept.len() as f64;
                (
                    kept.iter().map(|p| p.0).sum::<f64>() / c,
                    kept.iter().map(|p| p.1).sum::<f64>() / c,
                )
            };
            Ok(NoiseSweepRow {
                band: n,
                estimator: detector.name().to_string(),
                snr_db,
                mean_eps,
                mean_delta,
                skip_fraction,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::h;

    #[test]
    fn unit_energy_at_zero_db() {
        let s = Spectrum1D::from_fn(4, |_| Complex64::new(1.0, 0.0));
        assert!((noise_variance(&s, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(noise_variance(&s, 400.0).unwrap() < 1e-39);
        assert!(matches!(noise_variance(&Spectrum1D::zeros(3), 10.0), Err(Error::ZeroSignal)));
    }

    #[test]
    fn deterministic_and_marked() {
        let s = h().fourier_coeffs_exact(50).unwrap();
        let spec = NoiseSpec { snr_db: 30.0, seed: 42 };
        let a = add_noise(&s, spec).unwrap();
        let b = add_noise(&s, spec).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        assert!(a.is_noisy());
        let quiet = add_noise(&s, NoiseSpec { snr_db: 300.0, seed: 1 }).unwrap();
        for (x, y) in quiet.coeffs().iter().zip(s.coeffs()) {
            assert!((x - y).norm() <= 1e-10 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn sub_seeds_differ() {
        let a = sub_seed(7, 0, 25);
        assert_ne!(a, sub_seed(7, 1, 25));
        assert_ne!(a, sub_seed(7, 0, 50));
        assert_ne!(a, sub_seed(8, 0, 25));
        assert_eq!(a, sub_seed(7, 0, 25));
    }
}
