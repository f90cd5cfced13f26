//! Dense linear-algebra helpers for controller synthesis.
//!
//! Everything here works on small (< 20 states) dynamic matrices, so the
//! algorithms favour robustness over asymptotic cost: the Riccati solver is
//! a matrix-sign-function iteration polished by Newton–Kleinman steps, and
//! the Lyapunov solver goes through the Kronecker-vectorised linear system.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value threshold used for every numeric rank decision.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Solve the continuous algebraic Riccati equation
/// `AᵀP + PA − PBR⁻¹BᵀP + Q = 0` for the stabilizing solution `P`.
///
/// Stabilizability of `(A, B)` is checked up front so that a structurally
/// unsolvable problem is reported as [`Error::Unstabilizable`] rather than a
/// convergence failure.
pub fn care(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.nrows() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "care: A {:?}, B {:?}, Q {:?}, R {:?}",
            a.shape(),
            b.shape(),
            q.shape(),
            r.shape()
        )));
    }
    if let Some(mode) = uncontrollable_unstable_mode(a, b) {
        return Err(Error::Unstabilizable {
            mode: format_complex(mode),
        });
    }
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("control weight R is singular".into()))?;
    let g = b * &r_inv * b.transpose();

    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let w = matrix_sign(&h)?;
    let eye = DMatrix::<f64>::identity(n, n);
    let mut lhs = DMatrix::<f64>::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&w.view((0, n), (n, n)));
    lhs.view_mut((n, 0), (n, n))
        .copy_from(&(w.view((n, n), (n, n)) + &eye));
    let mut rhs = DMatrix::<f64>::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n))
        .copy_from(&(-(w.view((0, 0), (n, n)) + &eye)));
    rhs.view_mut((n, 0), (n, n))
        .copy_from(&(-w.view((n, 0), (n, n))));
    let p = lhs
        .svd(true, true)
        .solve(&rhs, 1e-300)
        .map_err(|e| Error::InvalidInput(format!("care: least-squares solve failed: {e}")))?;
    let mut p = symmetrize(&p);

    // Newton–Kleinman polish; each step solves one Lyapunov equation.
    for _ in 0..3 {
        let k = &r_inv * b.transpose() * &p;
        let ac = a - b * &k;
        if max_real_part(&eigenvalues(&ac)) >= 0.0 {
            break;
        }
        let rhs = q + k.transpose() * r * &k;
        p = symmetrize(&lyapunov(&ac, &rhs)?);
    }

    let residual = care_residual(a, &g, q, &p);
    let scale = 1.0 + q.norm() + (a.transpose() * &p).norm();
    if !residual.is_finite() || residual > 1e-8 * scale {
        return Err(Error::RiccatiNonConvergence {
            iterations: SIGN_MAX_ITER,
            residual,
        });
    }
    Ok(p)
}

fn care_residual(a: &DMatrix<f64>, g: &DMatrix<f64>, q: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    (a.transpose() * p + p * a - p * g * p + q).norm()
}

const SIGN_MAX_ITER: usize = 100;

/// Matrix sign function by the scaled Newton iteration.
fn matrix_sign(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = h.nrows() as f64;
    let mut z = h.clone();
    let mut scaling = true;
    for _ in 0..SIGN_MAX_ITER {
        let z_inv = z.clone().try_inverse().ok_or(Error::RiccatiNonConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        })?;
        let c = if scaling {
            let det = z.determinant().abs();
            let c = det.powf(1.0 / dim);
            if c.is_finite() && c > 0.0 {
                c
            } else {
                1.0
            }
        } else {
            1.0
        };
        let next = (&z / c + &z_inv * c) * 0.5;
        let change = (&next - &z).norm();
        let size = next.norm();
        z = next;
        if change <= 1e-3 * size {
            scaling = false;
        }
        if change <= 1e-13 * size {
            return Ok(z);
        }
    }
    Err(Error::RiccatiNonConvergence {
        iterations: SIGN_MAX_ITER,
        residual: f64::NAN,
    })
}

/// Solve `AᵀX + XA + Q = 0`.
pub fn lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    let op = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = -DVector::from_column_slice(q.as_slice());
    let x = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidInput("Lyapunov operator is singular".into()))?;
    Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a real square matrix (real Schur form).
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    a.clone().complex_eigenvalues().iter().copied().collect()
}

pub fn max_real_part(eigs: &[Complex<f64>]) -> f64 {
    eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Number of singular values above `RANK_TOLERANCE × σ_max`.
pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * largest).count()
}

fn numeric_rank_complex(m: &DMatrix<Complex<f64>>) -> usize {
    let sv = m.singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * largest).count()
}

/// Diagonal similarity `D` (powers of two) such that `D⁻¹AD` has balanced
/// row and column norms. Returns the diagonal of `D`.
pub fn balance(a: &DMatrix<f64>) -> DVector<f64> {
    let n = a.nrows();
    let mut d = DVector::from_element(n, 1.0);
    let mut m = a.clone();
    let radix = 2.0_f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * total {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            return d;
        }
    }
}

/// Apply a balancing diagonal: returns `(D⁻¹AD, D⁻¹B, CD)`.
pub fn apply_balance(
    d: &DVector<f64>,
    a: &DMatrix<f64>,
    b: Option<&DMatrix<f64>>,
    c: Option<&DMatrix<f64>>,
) -> (DMatrix<f64>, Option<DMatrix<f64>>, Option<DMatrix<f64>>) {
    let n = a.nrows();
    let ab = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * d[j] / d[i]);
    let bb = b.map(|b| DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] / d[i]));
    let cb = c.map(|c| DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)] * d[j]));
    (ab, bb, cb)
}

/// First eigenvalue with `Re ≥ 0` that fails the PBH controllability test.
pub fn uncontrollable_unstable_mode(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<Complex<f64>> {
    let d = balance(a);
    let (ab, bb, _) = apply_balance(&d, a, Some(b), None);
    let bb = bb.expect("b supplied");
    let n = a.nrows();
    for lambda in eigenvalues(&ab) {
        if lambda.re < -1e-9 {
            continue;
        }
        let mut m = DMatrix::<Complex<f64>>::zeros(n, n + bb.ncols());
        for i in 0..n {
            for j in 0..n {
                let diag = if i == j { lambda } else { Complex::new(0.0, 0.0) };
                m[(i, j)] = diag - Complex::new(ab[(i, j)], 0.0);
            }
            for j in 0..bb.ncols() {
                m[(i, n + j)] = Complex::new(bb[(i, j)], 0.0);
            }
        }
        if numeric_rank_complex(&m) < n {
            return Some(lambda);
        }
    }
    None
}

/// First eigenvalue with `Re ≥ 0` that fails the PBH observability test.
pub fn unobservable_unstable_mode(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Option<Complex<f64>> {
    uncontrollable_unstable_mode(&a.transpose(), &c.transpose())
}

/// Greedy nearest-neighbour matching between two spectra; returns the
/// largest `|λ_a − λ_b| / max(1, |λ_a|)` over matched pairs.
pub fn spectrum_mismatch(lhs: &[Complex<f64>], rhs: &[Complex<f64>]) -> f64 {
    if lhs.len() != rhs.len() {
        return f64::INFINITY;
    }
    let mut pool: Vec<Complex<f64>> = rhs.to_vec();
    let mut worst: f64 = 0.0;
    for l in lhs {
        let (idx, dist) = pool
            .iter()
            .enumerate()
            .map(|(i, r)| (i, (l - r).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            });
        pool.swap_remove(idx);
        worst = worst.max(dist / l.norm().max(1.0));
    }
    worst
}

pub(crate) fn format_complex(z: Complex<f64>) -> String {
    if z.im == 0.0 {
        format!("{:.4e}", z.re)
    } else {
        format!("{:.4e}{:+.4e}j", z.re, z.im)
    }
}
