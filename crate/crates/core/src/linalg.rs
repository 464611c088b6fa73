//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

/// Minimum-norm least-squares solution via SVD, plus the 2-norm condition
/// number of `a`.
pub(crate) fn lstsq<T>(a: DMatrix<T>, b: &DVector<T>) -> Option<(DVector<T>, f64)>
where
    T: ComplexField<RealField = f64>,
{
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let eps = smax * 1e-14 * svd.singular_values.len().max(1) as f64;
    let x = svd.solve(b, eps).ok()?;
    Some((x, cond))
}

/// Singular values in descending order.
pub(crate) fn singular_values(a: DMatrix<Complex64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Roots of the monic polynomial `z^n + c[n-1] z^{n-1} + … + c[0]`:
/// companion-matrix eigenvalues, each polished by Newton steps.
pub(crate) fn monic_roots(c: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = c.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let one = Complex64::new(1.0, 0.0);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = one;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    let eig = m.schur().eigenvalues()?;
    let roots = eig
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..3 {
                // Horner for p and p'
                let mut p = one;
                let mut dp = Complex64::new(0.0, 0.0);
                for &ck in c.iter().rev() {
                    dp = dp * z + p;
                    p = p * z + ck;
                }
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                let candidate = z - step;
                if !candidate.re.is_finite() || !candidate.im.is_finite() || step.norm() > 1e-3 * (1.0 + z.norm()) {
                    break;
                }
                z = candidate;
            }
            z
        })
        .collect();
    Some(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_unit_circle_roots() {
        let roots = [
            Complex64::from_polar(1.0, 1.0),
            Complex64::from_polar(1.0, -2.0),
            Complex64::from_polar(1.0, 2.9),
        ];
        let mut p = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut q = vec![Complex64::new(0.0, 0.0); p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                q[i + 1] += *c;
                q[i] -= *c * r;
            }
            p = q;
        }
        let got = monic_roots(&p[..3]).unwrap();
        for r in roots {
            assert!(got.iter().any(|g| (g - r).norm() < 1e-13));
        }
    }

    #[test]
    fn least_squares_solves_overdetermined_system() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let (x, cond) = lstsq(a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        assert!((cond - 3f64.sqrt()).abs() < 1e-12);
    }
}
