//! Piecewise-smooth 2π-periodic test functions.
//!
//! A [`PiecewiseFn`] is a list of pieces over half-open intervals `(a, b]`
//! that tile `(-π, π]`. Each piece is a [`Term`]: a polynomial, a scaled
//! exponential, a phased sinusoid, zero, or a sum of those. Every term kind
//! has a closed-form antiderivative against `e^{-ikx}`, so Fourier
//! coefficients are available exactly as well as by quadrature.

pub mod plane;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jumps::{wrap_angle, Jump, JumpSet};
use crate::quadrature::GaussLegendre;
use crate::spectrum::Spectrum1D;

/// One analytic component of a piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    /// `Σ coeffs[n] · xⁿ`
    Poly { coeffs: Vec<f64> },
    /// `scale · e^{rate·x}`
    Exp { scale: f64, rate: f64 },
    /// `amplitude · sin(freq·x + phase)`
    Sin { amplitude: f64, freq: f64, phase: f64 },
    Zero,
    Sum { terms: Vec<Term> },
}

impl Term {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Term::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            Term::Exp { scale, rate } => scale * (rate * x).exp(),
            Term::Sin { amplitude, freq, phase } => amplitude * (freq * x + phase).sin(),
            Term::Zero => 0.0,
            Term::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    /// `∫_a^b term(x) e^{-ikx} dx` in closed form.
    pub fn fourier_integral(&self, k: i64, a: f64, b: f64) -> Result<Complex64> {
        let kf = k as f64;
        let i = Complex64::i();
        Ok(match self {
            Term::Zero => Complex64::new(0.0, 0.0),
            Term::Poly { coeffs } => poly_fourier_integral(coeffs, kf, a, b),
            Term::Exp { scale, rate } => {
                *scale * exp_integral(Complex64::new(*rate, -kf), a, b)
            }
            Term::Sin { amplitude, freq, phase } => {
                let plus = Complex64::from_polar(1.0, *phase) * exp_integral(i * (freq - kf), a, b);
                let minus =
                    Complex64::from_polar(1.0, -*phase) * exp_integral(-i * (freq + kf), a, b);
                *amplitude * (plus - minus) / (2.0 * i)
            }
            Term::Sum { terms } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in terms {
                    acc += t.fourier_integral(k, a, b)?;
                }
                acc
            }
        })
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec("non-finite term parameter".into()))
            }
        };
        match self {
            Term::Poly { coeffs } => coeffs.iter().try_for_each(|&c| finite(c)),
            Term::Exp { scale, rate } => finite(*scale).and(finite(*rate)),
            Term::Sin { amplitude, freq, phase } => {
                finite(*amplitude).and(finite(*freq)).and(finite(*phase))
            }
            Term::Zero => Ok(()),
            Term::Sum { terms } => terms.iter().try_for_each(Term::validate),
        }
    }
}

/// `∫_a^b e^{cx} dx`, stable for small `|c|`.
pub(crate) fn exp_integral(c: Complex64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    let z = c * len;
    let phi1 = if z.norm() < 0.1 {
        // (e^z - 1)/z = Σ z^n/(n+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..20 {
            term *= z / (n as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    };
    (c * a).exp() * len * phi1
}

fn poly_fourier_integral(coeffs: &[f64], k: f64, a: f64, b: f64) -> Complex64 {
    if k == 0.0 {
        return coeffs
            .iter()
            .enumerate()
            .map(|(n, &cn)| {
                let p = n as i32 + 1;
                Complex64::new(cn * (b.powi(p) - a.powi(p)) / p as f64, 0.0)
            })
            .sum();
    }
    // I_n = [xⁿ e^{cx}/c]_a^b − (n/c) I_{n−1}, c = −ik
    let c = Complex64::new(0.0, -k);
    let eb = (c * b).exp();
    let ea = (c * a).exp();
    let mut integral = (eb - ea) / c;
    let mut total = coeffs.first().copied().unwrap_or(0.0) * integral;
    for (n, &cn) in coeffs.iter().enumerate().skip(1) {
        let nf = n as f64;
        integral = (eb * b.powi(n as i32) - ea * a.powi(n as i32)) / c - nf / c * integral;
        total += cn * integral;
    }
    total
}

/// Which limit to take when evaluating at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    /// `½[f(x⁻) + f(x⁺)]`, the limit of the Fourier partial sums.
    Average,
}

/// A term on the half-open interval `(interval[0], interval[1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub interval: [f64; 2],
    #[serde(flatten)]
    pub term: Term,
}

impl Piece {
    pub fn new(a: f64, b: f64, term: Term) -> Self {
        Self { interval: [a, b], term }
    }
}

/// A 2π-periodic piecewise-smooth function on `(-π, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseFnRepr", into = "PiecewiseFnRepr")]
pub struct PiecewiseFn {
    pieces: Vec<Piece>,
}

#[derive(Serialize, Deserialize)]
struct PiecewiseFnRepr {
    pieces: Vec<Piece>,
}

impl TryFrom<PiecewiseFnRepr> for PiecewiseFn {
    type Error = Error;

    fn try_from(r: PiecewiseFnRepr) -> Result<Self> {
        PiecewiseFn::new(r.pieces)
    }
}

impl From<PiecewiseFn> for PiecewiseFnRepr {
    fn from(f: PiecewiseFn) -> Self {
        PiecewiseFnRepr { pieces: f.pieces }
    }
}

const BREAK_TOL: f64 = 1e-12;

impl PiecewiseFn {
    /// Validates that the pieces tile `(-π, π]` in order. Endpoints within
    /// 1e-12 of ±π or of the neighbouring piece are snapped.
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidSpec("at least one piece is required".into()));
        }
        for p in &pieces {
            p.term.validate()?;
            let [a, b] = p.interval;
            if !(a.is_finite() && b.is_finite()) || a >= b {
                return Err(Error::InvalidSpec(format!("empty or invalid interval ({a}, {b}]")));
            }
            if a < -PI - BREAK_TOL || b > PI + BREAK_TOL {
                return Err(Error::InvalidSpec(format!("interval ({a}, {b}] leaves (-pi, pi]")));
            }
        }
        let last = pieces.len() - 1;
        if (pieces[0].interval[0] + PI).abs() > BREAK_TOL {
            return Err(Error::InvalidSpec("first piece must start at -pi".into()));
        }
        if (pieces[last].interval[1] - PI).abs() > BREAK_TOL {
            return Err(Error::InvalidSpec("last piece must end at pi".into()));
        }
        pieces[0].interval[0] = -PI;
        pieces[last].interval[1] = PI;
        for i in 0..last {
            let (b, a) = (pieces[i].interval[1], pieces[i + 1].interval[0]);
            if (a - b).abs() > BREAK_TOL {
                return Err(Error::InvalidSpec(format!(
                    "pieces must be contiguous: gap between {b} and {a}"
                )));
            }
            pieces[i + 1].interval[0] = b;
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints plus π.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.interval[1]).collect()
    }

    /// Left and right limits at `x` (wrapped into `(-π, π]`).
    pub fn limits(&self, x: f64) -> (f64, f64) {
        let x = wrap_angle(x);
        let n = self.pieces.len();
        let idx = self
            .pieces
            .iter()
            .position(|p| x <= p.interval[1])
            .unwrap_or(n - 1);
        let piece = &self.pieces[idx];
        if x == piece.interval[1] {
            let left = piece.term.eval(x);
            let right = if idx + 1 < n {
                self.pieces[idx + 1].term.eval(x)
            } else {
                self.pieces[0].term.eval(-PI)
            };
            (left, right)
        } else {
            let v = piece.term.eval(x);
            (v, v)
        }
    }

    pub fn eval(&self, x: f64, side: Side) -> f64 {
        let (l, r) = self.limits(x);
        match side {
            Side::Left => l,
            Side::Right => r,
            Side::Average => 0.5 * (l + r),
        }
    }

    /// Breakpoints with non-matching one-sided limits, including π when
    /// `f(π⁻) ≠ f(−π⁺)`.
    pub fn jump_set(&self) -> JumpSet {
        let jumps = self.breakpoints().into_iter().filter_map(|b| {
            let (l, r) = self.limits(b);
            let h = r - l;
            let scale = 1.0_f64.max(l.abs()).max(r.abs());
            (h.abs() > 1e-13 * scale).then_some(Jump { location: b, height: h })
        });
        JumpSet::new(jumps).expect("breakpoints are distinct and in (-pi, pi]")
    }

    /// `f̂_k = (1/2π) ∫ f e^{-ikx} dx` for `|k| ≤ band`, in closed form.
    pub fn fourier_coeffs_exact(&self, band: usize) -> Result<Spectrum1D> {
        let n = band as i64;
        let mut coeffs = Vec::with_capacity(2 * band + 1);
        for k in -n..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in &self.pieces {
                acc += p.term.fourier_integral(k, p.interval[0], p.interval[1])?;
            }
            coeffs.push(acc / (2.0 * PI));
        }
        Spectrum1D::from_coeffs(band, coeffs)
    }

    /// Same coefficients by per-piece Gauss-Legendre quadrature. Refuses
    /// rules with fewer than `max(32, ⌈4N/π⌉)` nodes per piece.
    pub fn fourier_coeffs_quadrature(&self, band: usize, nodes_per_piece: usize) -> Result<Spectrum1D> {
        let required = 32usize.max((4.0 * band as f64 / PI).ceil() as usize);
        if nodes_per_piece < required {
            return Err(Error::InsufficientNodes { nodes: nodes_per_piece, required });
        }
        let rule = GaussLegendre::cached(nodes_per_piece);
        let n = band as i64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * band + 1];
        for p in &self.pieces {
            for (x, w) in rule.mapped(p.interval[0], p.interval[1]) {
                let fx = p.term.eval(x) * w;
                if fx == 0.0 {
                    continue;
                }
                for (c, k) in coeffs.iter_mut().zip(-n..=n) {
                    *c += fx * Complex64::from_polar(1.0, -(k as f64) * x);
                }
            }
        }
        coeffs.iter_mut().for_each(|c| *c /= 2.0 * PI);
        Spectrum1D::from_coeffs(band, coeffs)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Named functions shipped with the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusId {
    H,
    S,
    Zero,
    Sine,
    Parabola,
}

impl CorpusId {
    pub const ALL: [CorpusId; 5] =
        [CorpusId::H, CorpusId::S, CorpusId::Zero, CorpusId::Sine, CorpusId::Parabola];

    pub fn build(self) -> PiecewiseFn {
        match self {
            CorpusId::H => h(),
            CorpusId::S => s(),
            CorpusId::Zero => zero(),
            CorpusId::Sine => sine(),
            CorpusId::Parabola => parabola(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CorpusId::H => "h",
            CorpusId::S => "s",
            CorpusId::Zero => "zero",
            CorpusId::Sine => "sine",
            CorpusId::Parabola => "parabola",
        }
    }
}

impl std::str::FromStr for CorpusId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorpusId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown function id {s:?}")))
    }
}

fn constant(c: f64) -> Term {
    if c == 0.0 {
        Term::Zero
    } else {
        Term::Poly { coeffs: vec![c] }
    }
}

/// Six-jump test function: 3/2 on [−3π/4, −π/2), 7/4 − x/2 + sin(x − 1/4) on
/// [−π/4, π/8), 11x/4 − 5 on [3π/8, 3π/4), zero elsewhere.
pub fn h() -> PiecewiseFn {
    let bounds = [-PI, -0.75 * PI, -0.5 * PI, -0.25 * PI, PI / 8.0, 3.0 * PI / 8.0, 0.75 * PI, PI];
    let terms = [
        Term::Zero,
        constant(1.5),
        Term::Zero,
        Term::Sum {
            terms: vec![
                Term::Poly { coeffs: vec![1.75, -0.5] },
                Term::Sin { amplitude: 1.0, freq: 1.0, phase: -0.25 },
            ],
        },
        Term::Zero,
        Term::Poly { coeffs: vec![-5.0, 2.75] },
        Term::Zero,
    ];
    let pieces = terms
        .into_iter()
        .enumerate()
        .map(|(i, t)| Piece::new(bounds[i], bounds[i + 1], t))
        .collect();
    PiecewiseFn::new(pieces).expect("h is well formed")
}

/// Three-jump test function: x² on (−π, −π/2], e^{x+3} on (−π/2, π/2],
/// e⁴x on (π/2, π]; the periodic wrap at π is the third jump.
pub fn s() -> PiecewiseFn {
    PiecewiseFn::new(vec![
        Piece::new(-PI, -0.5 * PI, Term::Poly { coeffs: vec![0.0, 0.0, 1.0] }),
        Piece::new(-0.5 * PI, 0.5 * PI, Term::Exp { scale: 3f64.exp(), rate: 1.0 }),
        Piece::new(0.5 * PI, PI, Term::Poly { coeffs: vec![0.0, 4f64.exp()] }),
    ])
    .expect("s is well formed")
}

pub fn zero() -> PiecewiseFn {
    PiecewiseFn::new(vec![Piece::new(-PI, PI, Term::Zero)]).expect("zero is well formed")
}

/// `sin x`: smooth and periodic, no jumps.
pub fn sine() -> PiecewiseFn {
    PiecewiseFn::new(vec![Piece::new(-PI, PI, Term::Sin { amplitude: 1.0, freq: 1.0, phase: 0.0 })])
        .expect("sine is well formed")
}

/// `x²`: continuous across the periodic wrap, kink at π only.
pub fn parabola() -> PiecewiseFn {
    PiecewiseFn::new(vec![Piece::new(-PI, PI, Term::Poly { coeffs: vec![0.0, 0.0, 1.0] })])
        .expect("parabola is well formed")
}

/// `Σ_j a_j r_j(x)`: a superposition of unit ramps scaled by the jump heights.
/// Its jump set is exactly `jumps`, and its Fourier coefficients are
/// `Σ_j a_j e^{-ikx_j}/(2πik)` with zero mean.
pub fn ramp_sum(jumps: &JumpSet) -> PiecewiseFn {
    let total: f64 = jumps.iter().map(|j| j.height).sum();
    // Each ramp carries its mean x_j/2π back out, leaving a zero-mean sum.
    let mean_shift: f64 = jumps.iter().map(|j| j.height * j.location).sum::<f64>() / (2.0 * PI);
    let slope = -total / (2.0 * PI);
    let mut bounds = vec![-PI];
    bounds.extend(jumps.locations());
    if *bounds.last().expect("non-empty") != PI {
        bounds.push(PI);
    }
    let pieces = bounds
        .windows(2)
        .map(|w| {
            let lo = w[0];
            // r_j = (±π − x)/2π with + once x has passed x_j.
            let c0: f64 = jumps
                .iter()
                .map(|j| if j.location <= lo { 0.5 * j.height } else { -0.5 * j.height })
                .sum::<f64>()
                + mean_shift;
            let term = if c0 == 0.0 && slope == 0.0 {
                Term::Zero
            } else {
                Term::Poly { coeffs: vec![c0, slope] }
            };
            Piece::new(w[0], w[1], term)
        })
        .collect();
    PiecewiseFn::new(pieces).expect("ramp sum is well formed")
}
