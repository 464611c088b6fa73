//! Two-dimensional reconstruction by cross-sections.
//!
//! Rows first: each row `y = y_j` of the image has 1D coefficients
//! `Σ_ℓ f̂_{k,ℓ} e^{iℓy_j}`, which are fed to a 1D detector and an
//! edge-augmented sum. The row reconstructions, sampled on `M_over` rows, give
//! column coefficients by a plain DFT, and the column pass repeats the 1D
//! procedure to produce the final image.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::Detector;
use crate::error::{Error, Result};
use crate::spectral::{eval_series, Reconstruction, REALNESS_TOL};
use crate::spectrum::Spectrum1D;

/// `f̂_{k,ℓ}` for `(k, ℓ) ∈ [−N, N]²`, stored at `(k+N)(2N+1) + (ℓ+N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    band: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn zeros(band: usize) -> Self {
        let w = 2 * band + 1;
        Self { band, coeffs: vec![Complex64::new(0.0, 0.0); w * w] }
    }

    pub fn from_fn<F: FnMut(i64, i64) -> Complex64>(band: usize, mut f: F) -> Self {
        let n = band as i64;
        let mut coeffs = Vec::with_capacity((2 * band + 1).pow(2));
        for k in -n..=n {
            for l in -n..=n {
                coeffs.push(f(k, l));
            }
        }
        Self { band, coeffs }
    }

    pub fn band(&self) -> usize {
        self.band
    }

    fn index(&self, k: i64, l: i64) -> usize {
        let n = self.band as i64;
        assert!(k.abs() <= n && l.abs() <= n, "({k}, {l}) outside band {n}");
        ((k + n) * (2 * n + 1) + (l + n)) as usize
    }

    pub fn get(&self, k: i64, l: i64) -> Complex64 {
        self.coeffs[self.index(k, l)]
    }

    pub fn set(&mut self, k: i64, l: i64, value: Complex64) {
        let i = self.index(k, l);
        self.coeffs[i] = value;
    }

    /// Largest `|f̂_{−k,−ℓ} − conj(f̂_{k,ℓ})|`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.band as i64;
        let mut worst = 0.0_f64;
        for k in -n..=n {
            for l in -n..=n {
                worst = worst.max((self.get(-k, -l) - self.get(k, l).conj()).norm());
            }
        }
        worst
    }

    /// Writes `k,l,re,im` rows, `k` then `ℓ` ascending.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "l", "re", "im"])?;
        let n = self.band as i64;
        for k in -n..=n {
            for l in -n..=n {
                let c = self.get(k, l);
                w.write_record([k.to_string(), l.to_string(), c.re.to_string(), c.im.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            k: i64,
            l: i64,
            re: f64,
            im: f64,
        }
        let mut r = csv::Reader::from_reader(reader);
        let rows: Vec<Row> = r.deserialize().collect::<std::result::Result<_, _>>()?;
        let side = (rows.len() as f64).sqrt().round() as usize;
        if side * side != rows.len() || side % 2 == 0 {
            return Err(Error::InvalidSpec(format!("{} rows do not form a (2N+1)^2 band", rows.len())));
        }
        let band = side / 2;
        let mut out = Self::zeros(band);
        let mut seen = vec![false; rows.len()];
        for row in rows {
            if row.k.unsigned_abs() as usize > band || row.l.unsigned_abs() as usize > band {
                return Err(Error::InvalidSpec(format!("({}, {}) outside band {band}", row.k, row.l)));
            }
            let i = out.index(row.k, row.l);
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidSpec(format!("duplicate entry ({}, {})", row.k, row.l)));
            }
            out.coeffs[i] = Complex64::new(row.re, row.im);
        }
        Ok(out)
    }
}

/// `m` nodes `−π + 2πi/m`, `i = 0..m`, covering `[−π, π)`.
pub fn grid_nodes(m: usize) -> Vec<f64> {
    (0..m).map(|i| -PI + 2.0 * PI * i as f64 / m as f64).collect()
}

/// Square image on `grid_nodes(M)²`, row-major: `values[iy·M + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    m: usize,
    values: Vec<f64>,
}

const GRID_MAGIC: &[u8; 4] = b"G2D1";

impl Grid2D {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "{m}x{m} grid needs {} values, got {}",
                m * m,
                values.len()
            )));
        }
        Ok(Self { m, values })
    }

    pub fn zeros(m: usize) -> Self {
        Self { m, values: vec![0.0; m * m] }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync>(m: usize, f: F) -> Self {
        let nodes = grid_nodes(m);
        let values = (0..m * m)
            .into_par_iter()
            .map(|i| f(nodes[i % m], nodes[i / m]))
            .collect();
        Self { m, values }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.m + ix]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// 16-byte header (`G2D1`, little-endian `u32` M, 8 zero bytes), then
    /// the values as little-endian `f64`, row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = [0u8; 16];
        header[..4].copy_from_slice(GRID_MAGIC);
        let m = u32::try_from(self.m)
            .map_err(|_| Error::DimensionMismatch(format!("grid size {} exceeds u32", self.m)))?;
        header[4..8].copy_from_slice(&m.to_le_bytes());
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != GRID_MAGIC {
            return Err(Error::InvalidSpec("not a G2D1 grid file".into()));
        }
        let m = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() != 8 * m * m {
            return Err(Error::DimensionMismatch(format!(
                "{m}x{m} grid needs {} payload bytes, got {}",
                8 * m * m,
                buf.len()
            )));
        }
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self { m, values })
    }

    /// Binary greymap, linearly scaled from the value range to 0..=255, top
    /// row = largest y.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        write!(w, "P5\n{} {}\n255\n", self.m, self.m)?;
        let mut buf = Vec::with_capacity(self.m * self.m);
        for iy in (0..self.m).rev() {
            for ix in 0..self.m {
                let v = (self.get(ix, iy) - lo) / span;
                buf.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }
}

/// `S_{N,N} f` on the `M × M` grid, by two separable passes.
pub fn partial_sum_2d(spectrum: &Spectrum2D, m: usize) -> Result<Grid2D> {
    let band = spectrum.band();
    let n = band as i64;
    let nodes = grid_nodes(m);
    // inner[iy][k] = Σ_ℓ f̂_{k,ℓ} e^{iℓy}
    let inner: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|&y| {
            (-n..=n)
                .map(|k| {
                    let row = &spectrum.coeffs[spectrum.index(k, -n)..=spectrum.index(k, n)];
                    eval_series(row, band, y)
                })
                .collect()
        })
        .collect();
    let values = (0..m * m)
        .into_par_iter()
        .map(|i| {
            let (ix, iy) = (i % m, i / m);
            let z = eval_series(&inner[iy], band, nodes[ix]);
            if z.im.abs() > REALNESS_TOL * (1.0 + z.re.abs()) {
                return Err(Error::NonRealResult { residual: z.im.abs(), x: nodes[ix] });
            }
            Ok(z.re)
        })
        .collect::<Result<Vec<_>>>()?;
    Grid2D::new(m, values)
}

/// Coefficients of the row `y = y_j`: `Σ_ℓ f̂_{k,ℓ} e^{iℓy_j}`.
pub fn row_coeffs(spectrum: &Spectrum2D, y: f64) -> Spectrum1D {
    let band = spectrum.band();
    let n = band as i64;
    Spectrum1D::from_fn(band, |k| {
        eval_series(&spectrum.coeffs[spectrum.index(k, -n)..=spectrum.index(k, n)], band, y)
    })
}

/// DFT coefficients `(1/M) Σ_j s_j e^{−iℓy_j}` for `|ℓ| ≤ N` of samples on
/// `grid_nodes(M)`.
pub fn column_coeffs_from_samples(samples: &[f64], band: usize) -> Result<Spectrum1D> {
    let m = samples.len();
    if m < 2 * band + 1 {
        return Err(Error::UndersampledColumn { m_over: m, required: 2 * band + 1 });
    }
    let inv = 1.0 / m as f64;
    Ok(Spectrum1D::from_fn(band, |l| {
        let l_mod = l.rem_euclid(m as i64) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &s) in samples.iter().enumerate() {
            // e^{−iℓy_j} with y_j = −π + 2πj/M; the index is reduced mod M so
            // the phase stays accurate.
            let phase = -(2.0 * PI * ((l_mod * j) % m) as f64 * inv) + PI * l as f64;
            acc += s * Complex64::from_polar(1.0, phase);
        }
        acc * inv
    }))
}

/// Per-pass counts from [`edge_augmented_2d`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recon2dDiagnostics {
    pub rows: usize,
    pub rows_with_jumps: usize,
    pub row_fallbacks: usize,
    pub columns: usize,
    pub columns_with_jumps: usize,
    pub column_fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recon2d {
    pub grid: Grid2D,
    pub diagnostics: Recon2dDiagnostics,
}

/// 1D detection plus edge-augmented sampling, degrading to the partial sum
/// when detection or evaluation fails. Returns (values, had jumps, fell back).
fn cross_section(spec: &Spectrum1D, detector: &Detector, nodes: &[f64]) -> (Vec<f64>, bool, bool) {
    if let Ok(jumps) = detector.detect(spec) {
        let rec = Reconstruction::edge_augmented(spec, &jumps);
        if let Ok(values) = nodes.iter().map(|&x| rec.eval(x)).collect::<Result<Vec<_>>>() {
            return (values, !jumps.is_empty(), false);
        }
    }
    let rec = Reconstruction::standard(spec);
    let values = nodes
        .iter()
        .map(|&x| eval_series(rec.residual().coeffs(), spec.band(), x).re)
        .collect();
    (values, false, true)
}

/// Row pass on `M_over` rows, then column pass on the `M` output columns.
pub fn edge_augmented_2d(spectrum: &Spectrum2D, detector: &Detector, m: usize, m_over: usize) -> Result<Recon2d> {
    let band = spectrum.band();
    if m_over < 2 * band + 1 {
        return Err(Error::UndersampledColumn { m_over, required: 2 * band + 1 });
    }
    if m_over < m {
        return Err(Error::InvalidConfig(format!("M_over {m_over} is below M {m}")));
    }
    let x_nodes = grid_nodes(m);
    let y_over = grid_nodes(m_over);

    let rows: Vec<(Vec<f64>, bool, bool)> = y_over
        .par_iter()
        .map(|&y| cross_section(&row_coeffs(spectrum, y), detector, &x_nodes))
        .collect();

    let columns: Vec<Result<(Vec<f64>, bool, bool)>> = (0..m)
        .into_par_iter()
        .map(|ix| {
            let samples: Vec<f64> = rows.iter().map(|r| r.0[ix]).collect();
            let spec = column_coeffs_from_samples(&samples, band)?;
            Ok(cross_section(&spec, detector, &x_nodes))
        })
        .collect();

    let mut diagnostics = Recon2dDiagnostics {
        rows: rows.len(),
        rows_with_jumps: rows.iter().filter(|r| r.1).count(),
        row_fallbacks: rows.iter().filter(|r| r.2).count(),
        columns: m,
        ..Recon2dDiagnostics::default()
    };
    let mut values = vec![0.0; m * m];
    for (ix, col) in columns.into_iter().enumerate() {
        let (vals, had, fell) = col?;
        diagnostics.columns_with_jumps += had as usize;
        diagnostics.column_fallbacks += fell as usize;
        for (iy, v) in vals.into_iter().enumerate() {
            values[iy * m + ix] = v;
        }
    }
    Ok(Recon2d { grid: Grid2D::new(m, values)?, diagnostics })
}

/// `20·log₁₀(M·max|ref| / ‖ref − approx‖_F)`; `+∞` for identical grids.
pub fn psnr(reference: &Grid2D, approx: &Grid2D) -> Result<f64> {
    if reference.m != approx.m {
        return Err(Error::DimensionMismatch(format!(
            "grids are {0}x{0} and {1}x{1}",
            reference.m, approx.m
        )));
    }
    let peak = reference.max_abs();
    if peak == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff: f64 = reference
        .values
        .iter()
        .zip(&approx.values)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if diff == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (reference.m as f64 * peak / diff).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_single_pixel() {
        let r = Grid2D::new(10, vec![1.0; 100]).unwrap();
        let mut a = r.clone();
        assert_eq!(psnr(&r, &a).unwrap(), f64::INFINITY);
        a.values[37] = 2.0;
        assert!((psnr(&r, &a).unwrap() - 20.0).abs() < 1e-12);
        assert!(matches!(psnr(&Grid2D::zeros(10), &a), Err(Error::ZeroReference)));
    }

    #[test]
    fn dc_spectrum_sums_to_constant() {
        let mut s = Spectrum2D::zeros(3);
        s.set(0, 0, Complex64::new(0.7, 0.0));
        let g = partial_sum_2d(&s, 16).unwrap();
        assert!(g.values().iter().all(|v| (v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn dft_orthogonality() {
        let nodes = grid_nodes(64);
        let samples: Vec<f64> = nodes.iter().map(|&y| 2.0 * (3.0 * y).cos()).collect();
        let c = column_coeffs_from_samples(&samples, 10).unwrap();
        for l in -10..=10i64 {
            let want = if l.abs() == 3 { 1.0 } else { 0.0 };
            assert!((c.get(l) - Complex64::new(want, 0.0)).norm() < 1e-12, "{l}");
        }
        assert!(matches!(
            column_coeffs_from_samples(&samples[..20], 10),
            Err(Error::UndersampledColumn { m_over: 20, required: 21 })
        ));
    }

    #[test]
    fn separable_row_coeffs() {
        let a = |k: i64| Complex64::new(1.0 / (1 + k.abs()) as f64, 0.1 * k as f64);
        let b = |l: i64| Complex64::new(0.5, -0.2 * l as f64);
        let s = Spectrum2D::from_fn(4, |k, l| a(k) * b(l));
        let y = 0.9;
        let bsum: Complex64 = (-4..=4i64).map(|l| b(l) * Complex64::from_polar(1.0, l as f64 * y)).sum();
        let row = row_coeffs(&s, y);
        for k in -4..=4i64 {
            assert!((row.get(k) - a(k) * bsum).norm() < 1e-14);
        }
    }

    #[test]
    fn binary_layout_is_frozen() {
        let g = Grid2D::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"G2D1\x02\x00\x00\x00");
        assert_eq!(buf.len(), 16 + 32);
        assert_eq!(&buf[16..24], &1.0f64.to_le_bytes());
        assert_eq!(&buf[40..48], &4.0f64.to_le_bytes());
        assert_eq!(Grid2D::read_binary(&buf[..]).unwrap(), g);
        assert!(Grid2D::read_binary(&buf[..40]).is_err());
    }
}
