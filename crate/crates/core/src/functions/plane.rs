//! Two-dimensional indicator images: boxes and discs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::exp_integral;
use crate::bessel::j1;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::recon2d::{Grid2D, Spectrum2D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    /// `[x0, x1] × [y0, y1]`
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disc { cx: f64, cy: f64, radius: f64 },
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Shape::Box { x0, x1, y0, y1 } => {
                let ok = x0 < x1 && y0 < y1 && x0 >= -PI && x1 <= PI && y0 >= -PI && y1 <= PI;
                if !ok {
                    return Err(Error::ShapeOutOfDomain(format!(
                        "box [{x0}, {x1}] x [{y0}, {y1}]"
                    )));
                }
            }
            Shape::Disc { cx, cy, radius } => {
                let ok = radius > 0.0
                    && cx - radius > -PI
                    && cx + radius < PI
                    && cy - radius > -PI
                    && cy + radius < PI;
                if !ok {
                    return Err(Error::ShapeOutOfDomain(format!(
                        "disc at ({cx}, {cy}) radius {radius}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Box { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
            Shape::Disc { radius, .. } => PI * radius * radius,
        }
    }

    /// Closed-form `(1/4π²) ∫∫ 1_shape e^{-i(kx+ℓy)}`.
    pub fn coefficient(&self, k: i64, l: i64) -> Complex64 {
        let (kf, lf) = (k as f64, l as f64);
        match *self {
            Shape::Box { x0, x1, y0, y1 } => {
                exp_integral(Complex64::new(0.0, -kf), x0, x1)
                    * exp_integral(Complex64::new(0.0, -lf), y0, y1)
                    / (4.0 * PI * PI)
            }
            Shape::Disc { cx, cy, radius } => {
                let q = kf.hypot(lf);
                if q == 0.0 {
                    return Complex64::new(radius * radius / (4.0 * PI), 0.0);
                }
                Complex64::from_polar(1.0, -(kf * cx + lf * cy)) * radius * j1(q * radius)
                    / (2.0 * PI * q)
            }
        }
    }

    /// Same coefficient by tensor Gauss-Legendre. Discs are integrated in the
    /// chord parametrisation `x = cx + R sin θ`, `y = cy + R cos θ · t`, where
    /// the integrand is smooth.
    pub fn coefficient_quadrature(&self, k: i64, l: i64, nodes: usize) -> Complex64 {
        let rule = GaussLegendre::cached(nodes);
        let (kf, lf) = (k as f64, l as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        match *self {
            Shape::Box { x0, x1, y0, y1 } => {
                for (x, wx) in rule.mapped(x0, x1) {
                    for (y, wy) in rule.mapped(y0, y1) {
                        acc += wx * wy * Complex64::from_polar(1.0, -(kf * x + lf * y));
                    }
                }
            }
            Shape::Disc { cx, cy, radius } => {
                for (theta, wt) in rule.mapped(-0.5 * PI, 0.5 * PI) {
                    let half = radius * theta.cos();
                    let x = cx + radius * theta.sin();
                    for (t, wu) in rule.mapped(-1.0, 1.0) {
                        let y = cy + half * t;
                        acc += wt * wu * half * half * Complex64::from_polar(1.0, -(kf * x + lf * y));
                    }
                }
            }
        }
        acc / (4.0 * PI * PI)
    }

    /// Indicator value with boundary points set to the two-sided average in
    /// each dimension separately.
    pub fn indicator(&self, x: f64, y: f64) -> f64 {
        let edge = |v: f64, lo: f64, hi: f64| {
            if v > lo && v < hi {
                1.0
            } else if v == lo || v == hi {
                0.5
            } else {
                0.0
            }
        };
        match *self {
            Shape::Box { x0, x1, y0, y1 } => edge(x, x0, x1) * edge(y, y0, y1),
            Shape::Disc { cx, cy, radius } => {
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                let r2 = radius * radius;
                if d2 < r2 {
                    1.0
                } else if d2 == r2 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }
}

/// Weighted sum of indicator shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarFn {
    pub components: Vec<(f64, Shape)>,
}

impl PlanarFn {
    pub fn new(components: Vec<(f64, Shape)>) -> Result<Self> {
        for (_, s) in &components {
            s.validate()?;
        }
        Ok(Self { components })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.components.iter().map(|(w, s)| w * s.indicator(x, y)).sum()
    }

    pub fn fourier_coeffs_exact(&self, band: usize) -> Spectrum2D {
        Spectrum2D::from_fn(band, |k, l| {
            self.components.iter().map(|(w, s)| *w * s.coefficient(k, l)).sum()
        })
    }

    /// Samples the exact image on the `M × M` grid of [`Grid2D`].
    pub fn sample(&self, m: usize) -> Grid2D {
        Grid2D::from_fn(m, |x, y| self.eval(x, y))
    }
}

/// Unit box on `[-1, 1]²`.
pub fn box_f1() -> PlanarFn {
    PlanarFn::new(vec![(1.0, Shape::Box { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 })])
        .expect("f1 is inside the domain")
}

/// A box and two discs with different intensities.
pub fn composite_f2() -> PlanarFn {
    PlanarFn::new(vec![
        (0.75, Shape::Box { x0: -2.25, x1: -0.25, y0: -2.5, y1: -0.5 }),
        (0.5, Shape::Disc { cx: 0.5, cy: 1.0, radius: 1.0 }),
        (0.35, Shape::Disc { cx: 1.25, cy: -1.25, radius: 0.5 }),
    ])
    .expect("f2 is inside the domain")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_mean_and_axis_coefficients() {
        let f = box_f1();
        let s = f.fourier_coeffs_exact(4);
        assert!((s.get(0, 0).re - 1.0 / (PI * PI)).abs() < 1e-15);
        for k in 1..=4i64 {
            let kf = k as f64;
            let want = kf.sin() / (PI * kf) / PI;
            assert!((s.get(k, 0) - Complex64::new(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn shapes_match_quadrature() {
        for (_, shape) in composite_f2().components.iter().chain(box_f1().components.iter()) {
            for (k, l) in [(0, 0), (1, 0), (3, -2), (7, 11), (-25, 25), (25, 0)] {
                let a = shape.coefficient(k, l);
                let b = shape.coefficient_quadrature(k, l, 96);
                assert!((a - b).norm() < 1e-8, "{shape:?} ({k},{l}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_shapes_outside_domain() {
        assert!(Shape::Disc { cx: 2.8, cy: 0.0, radius: 0.5 }.validate().is_err());
        assert!(Shape::Box { x0: -4.0, x1: 0.0, y0: 0.0, y1: 1.0 }.validate().is_err());
    }

    #[test]
    fn boundary_pixels_take_average() {
        let b = Shape::Box { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 };
        assert_eq!(b.indicator(1.0, 0.0), 0.5);
        assert_eq!(b.indicator(1.0, 1.0), 0.25);
        assert_eq!(b.indicator(0.0, 0.0), 1.0);
    }
}
