//! Dense and tridiagonal linear algebra shared by the solvers.
//!
//! Dense systems go through faer's partial-pivoting LU. Symmetric
//! tridiagonal eigenproblems (the 1-D Sturm-Liouville discretizations) use
//! Sturm-sequence bisection plus inverse iteration, which is robust for the
//! handful of smallest eigenvalues on grids of a few thousand points.

use crate::error::{Error, Result};
use faer::prelude::*;
use num_complex::Complex64;

/// Solve a dense complex system built from an entry generator.
///
/// Returns the solution and a cheap lower bound on the 1-norm condition
/// number (random-probe estimate); fails if the computed solution is not
/// finite or leaves a large residual.
pub fn solve_dense_complex(
    n: usize,
    entry: impl Fn(usize, usize) -> Complex64,
    rhs: &[Complex64],
) -> Result<(Vec<Complex64>, f64)> {
    assert_eq!(rhs.len(), n);
    if n == 0 {
        return Ok((Vec::new(), 1.0));
    }
    let a = Mat::<c64>::from_fn(n, n, |i, j| entry(i, j));
    let b = Mat::<c64>::from_fn(n, 1, |i, _| rhs[i]);
    let lu = a.partial_piv_lu();
    let x = lu.solve(&b);
    let sol: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    if sol.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical(
            "dense solve produced non-finite values (matrix numerically singular)".into(),
        ));
    }
    // residual check against the assembled matrix
    let norm_a = one_norm(&a);
    let mut res_max = 0.0f64;
    let mut x_max = 0.0f64;
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += a[(i, j)] * sol[j];
        }
        res_max = res_max.max((acc - rhs[i]).norm());
        x_max = x_max.max(sol[i].norm());
    }
    let scale = norm_a * x_max + rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cond = condition_lower_bound(&lu, norm_a, n);
    if res_max > 1e-8 * scale.max(1e-300) {
        return Err(Error::Numerical(format!(
            "dense solve residual {res_max:.3e} too large (cond >= {cond:.3e})"
        )));
    }
    Ok((sol, cond))
}

/// Real dense solve via the complex path (systems here are small or real
/// symmetric-dominated; one code path keeps error handling uniform).
pub fn solve_dense_real(
    n: usize,
    entry: impl Fn(usize, usize) -> f64,
    rhs: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let rhs_c: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let (sol, cond) = solve_dense_complex(n, |i, j| Complex64::new(entry(i, j), 0.0), &rhs_c)?;
    Ok((sol.into_iter().map(|v| v.re).collect(), cond))
}

fn one_norm(a: &Mat<c64>) -> f64 {
    let (m, n) = (a.nrows(), a.ncols());
    (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// ||A||_1 * max_k ||A^{-1} b_k||_1 / ||b_k||_1 over a few fixed +-1 probe
/// vectors: a lower bound on cond_1(A), enough to flag ill conditioning.
fn condition_lower_bound(lu: &faer::linalg::solvers::PartialPivLu<c64>, norm_a: f64, n: usize) -> f64 {
    let mut best = 0.0f64;
    let mut state = 0x9e3779b97f4a7c15u64;
    for _ in 0..4 {
        let b = Mat::<c64>::from_fn(n, 1, |_, _| {
            // xorshift-style deterministic signs
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            if state & 1 == 0 {
                c64::new(1.0, 0.0)
            } else {
                c64::new(-1.0, 0.0)
            }
        });
        let x = lu.solve(&b);
        let num: f64 = (0..n).map(|i| x[(i, 0)].norm()).sum();
        best = best.max(num / n as f64);
    }
    norm_a * best
}

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Domain(format!(
                "tridiagonal sizes inconsistent: diag {}, off {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for k in 1..self.n() {
            let e2 = self.off[k - 1] * self.off[k - 1];
            let denom = if q.abs() < 1e-300 {
                1e-300f64.copysign(if q == 0.0 { 1.0 } else { q })
            } else {
                q
            };
            q = self.diag[k] - x - e2 / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `count` smallest eigenvalues, ascending, by bisection.
    pub fn smallest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        if count > self.n() {
            return Err(Error::Domain(format!(
                "requested {count} eigenvalues of a {}x{0} matrix",
                self.n()
            )));
        }
        // Gershgorin bounds
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..self.n() {
            let r = if k > 0 { self.off[k - 1].abs() } else { 0.0 }
                + if k < self.n() - 1 { self.off[k].abs() } else { 0.0 };
            lo = lo.min(self.diag[k] - r);
            hi = hi.max(self.diag[k] + r);
        }
        let mut out = Vec::with_capacity(count);
        for idx in 0..count {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if self.count_below(mid) > idx {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a < 1e-13 * (1.0 + mid.abs()) {
                    break;
                }
            }
            out.push(0.5 * (a + b));
        }
        Ok(out)
    }

    /// Normalized eigenvector for an eigenvalue estimate, by inverse
    /// iteration with a pivoted tridiagonal solve.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.n();
        // slight shift keeps (T - lambda I) invertible at round-off scale
        let shift = lambda + 1e-11 * (1.0 + lambda.abs());
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..4 {
            v = self.solve_shifted(shift, &v)?;
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::Numerical(
                    "inverse iteration diverged; eigenvalue estimate too poor".into(),
                ));
            }
            for x in &mut v {
                *x /= norm;
            }
        }
        Ok(v)
    }

    /// Solve (T - shift I) x = b with partial pivoting (LR factorization of
    /// a tridiagonal matrix; the fill-in is one superdiagonal band).
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let mut d: Vec<f64> = self.diag.iter().map(|&x| x - shift).collect();
        let mut u: Vec<f64> = self.off.clone(); // superdiagonal
        let mut u2 = vec![0.0; n]; // second superdiagonal fill-in
        let mut l = self.off.clone(); // subdiagonal (consumed)
        let mut x: Vec<f64> = b.to_vec();
        // row k is [d[k], u[k], u2[k]] in columns k, k+1, k+2; row k+1 still
        // holds [l[k], d[k+1], u[k+1]] when step k starts
        for k in 0..n - 1 {
            if l[k].abs() > d[k].abs() {
                let (dk_old, uk_old) = (d[k], u[k]);
                d[k] = l[k];
                u[k] = d[k + 1];
                l[k] = dk_old;
                d[k + 1] = uk_old;
                if k + 1 < n - 1 {
                    u2[k] = u[k + 1];
                    u[k + 1] = 0.0;
                }
                x.swap(k, k + 1);
            }
            if d[k].abs() < 1e-300 {
                d[k] = 1e-300;
            }
            let m = l[k] / d[k];
            d[k + 1] -= m * u[k];
            if k + 1 < n - 1 {
                u[k + 1] -= m * u2[k];
            }
            x[k + 1] -= m * x[k];
        }
        // back substitution
        for k in (0..n).rev() {
            let mut acc = x[k];
            if k + 1 < n {
                acc -= u[k] * x[k + 1];
            }
            if k + 2 < n {
                acc -= u2[k] * x[k + 2];
            }
            if d[k].abs() < 1e-300 {
                d[k] = 1e-300;
            }
            x[k] = acc / d[k];
        }
        Ok(x)
    }
}
