//! Fourier coefficients on a symmetric band `[-N, N]`.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex Fourier coefficients `f̂_k` for `k ∈ [-N, N]`, stored densely with
/// index `k + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum1D {
    band: usize,
    coeffs: Vec<Complex64>,
    noisy: bool,
}

impl Spectrum1D {
    pub fn zeros(band: usize) -> Self {
        Self {
            band,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * band + 1],
            noisy: false,
        }
    }

    pub fn from_coeffs(band: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * band + 1 {
            return Err(Error::DimensionMismatch(format!(
                "band {band} needs {} coefficients, got {}",
                2 * band + 1,
                coeffs.len()
            )));
        }
        Ok(Self { band, coeffs, noisy: false })
    }

    /// Builds a spectrum by evaluating `f(k)` for every `k` in the band.
    pub fn from_fn<F: FnMut(i64) -> Complex64>(band: usize, mut f: F) -> Self {
        let n = band as i64;
        Self {
            band,
            coeffs: (-n..=n).map(&mut f).collect(),
            noisy: false,
        }
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at index `k`; panics outside the band.
    pub fn get(&self, k: i64) -> Complex64 {
        self.coeffs[self.index(k)]
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        let i = self.index(k);
        self.coeffs[i] = value;
    }

    fn index(&self, k: i64) -> usize {
        let n = self.band as i64;
        assert!(k.abs() <= n, "index {k} outside band {n}");
        (k + n) as usize
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let n = self.band as i64;
        -n..=n
    }

    /// Marks the spectrum as carrying measurement noise. Realness guards in
    /// downstream sums are relaxed for such spectra.
    pub fn is_noisy(&self) -> bool {
        self.noisy
    }

    pub fn mark_noisy(&mut self) {
        self.noisy = true;
    }

    /// `Σ |f̂_k|²` over the band.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest relative violation of `f̂_{-k} = conj(f̂_k)`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.band as i64;
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        (0..=n)
            .map(|k| (self.get(-k) - self.get(k).conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Returns the spectrum restricted to a smaller band.
    pub fn truncate(&self, band: usize) -> Spectrum1D {
        assert!(band <= self.band);
        let n = band as i64;
        Spectrum1D {
            band,
            coeffs: (-n..=n).map(|k| self.get(k)).collect(),
            noisy: self.noisy,
        }
    }

    /// Multiplies every coefficient by `e^{-iks}`, i.e. shifts the underlying
    /// function right by `s`.
    pub fn shifted(&self, s: f64) -> Spectrum1D {
        let mut out = self.clone();
        for (k, c) in self.indices().zip(out.coeffs.iter_mut()) {
            *c *= Complex64::from_polar(1.0, -(k as f64) * s);
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Spectrum1D {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Writes `k,re,im` rows with `k` ascending.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "re", "im"])?;
        for (k, c) in self.indices().zip(&self.coeffs) {
            w.write_record([k.to_string(), c.re.to_string(), c.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows: Vec<(i64, Complex64)> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<&str> {
                rec.get(i)
                    .ok_or_else(|| Error::InvalidSpec(format!("spectrum row missing column {i}")))
            };
            let k: i64 = parse(0)?
                .trim()
                .parse()
                .map_err(|e| Error::InvalidSpec(format!("bad k: {e}")))?;
            let re: f64 = parse(1)?
                .trim()
                .parse()
                .map_err(|e| Error::InvalidSpec(format!("bad re: {e}")))?;
            let im: f64 = parse(2)?
                .trim()
                .parse()
                .map_err(|e| Error::InvalidSpec(format!("bad im: {e}")))?;
            rows.push((k, Complex64::new(re, im)));
        }
        if rows.is_empty() || rows.len() % 2 == 0 {
            return Err(Error::InvalidSpec(format!(
                "spectrum needs an odd number of rows, got {}",
                rows.len()
            )));
        }
        let band = rows.len() / 2;
        for (i, (k, _)) in rows.iter().enumerate() {
            if *k != i as i64 - band as i64 {
                return Err(Error::InvalidSpec(format!(
                    "spectrum rows must run k = -{band}..={band} ascending"
                )));
            }
        }
        Spectrum1D::from_coeffs(band, rows.into_iter().map(|(_, c)| c).collect())
    }
}

impl std::ops::Sub for &Spectrum1D {
    type Output = Spectrum1D;

    fn sub(self, rhs: &Spectrum1D) -> Spectrum1D {
        assert_eq!(self.band, rhs.band, "band mismatch in spectrum subtraction");
        Spectrum1D {
            band: self.band,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
            noisy: self.noisy || rhs.noisy,
        }
    }
}

impl std::ops::Add for &Spectrum1D {
    type Output = Spectrum1D;

    fn add(self, rhs: &Spectrum1D) -> Spectrum1D {
        assert_eq!(self.band, rhs.band, "band mismatch in spectrum addition");
        Spectrum1D {
            band: self.band,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
            noisy: self.noisy || rhs.noisy,
        }
    }
}
