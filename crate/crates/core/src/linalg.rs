//! Small dense linear-algebra helpers shared across the crate.
//!
//! Ambient dimensions here are tiny (n ≤ 4, bases of size ≤ 10), so every
//! routine goes through an SVD for deterministic, tolerance-explicit results
//! rather than anything clever.

use nalgebra::{DMatrix, DVector};

/// Number of singular values exceeding `rel_tol` times the largest one.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Orthonormal basis of the (numerical) kernel of `m`.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Vec::new();
    }
    // Pad with zero rows so the thin SVD carries all `cols` right singular
    // vectors even for wide inputs.
    let mut work = DMatrix::zeros(rows.max(cols), cols);
    work.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("SVD computed with right singular vectors");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut basis = Vec::new();
    for i in 0..v_t.nrows() {
        if max == 0.0 || svd.singular_values[i] <= rel_tol * max {
            basis.push(v_t.row(i).transpose());
        }
    }
    basis
}

/// Minimum-norm least-squares solution of `m·x = rhs`, together with the
/// max-abs residual of that solution.
pub fn least_squares(m: &DMatrix<f64>, rhs: &DVector<f64>, rel_tol: f64) -> (DVector<f64>, f64) {
    let svd = m.clone().svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = svd
        .solve(rhs, rel_tol * max)
        .expect("SVD solve with both factors computed");
    let residual = (m * &x - rhs).amax();
    (x, residual)
}

/// Matrix exponential by scaling and squaring.
///
/// The argument is scaled by a power of two until its Frobenius norm is at
/// most 0.5, the Taylor series is summed through order 18, and the result is
/// squared back. For the generator sizes in this crate (‖M‖·|t| up to ~50)
/// the truncation error sits below double-precision round-off.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.is_square(), "matrix exponential needs a square matrix");
    let n = m.nrows();
    let norm = m.norm();
    let squarings = if norm <= 0.5 {
        0
    } else {
        (norm / 0.5).log2().ceil() as u32
    };
    let scaled = m / 2f64.powi(squarings as i32);
    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=18u32 {
        term = (&term * &scaled) / f64::from(k);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Flip the sign of `v` so that its first coordinate of significant
/// magnitude (relative threshold 1e-9) is positive. Zero vectors pass
/// through unchanged.
pub fn canonical_sign(mut v: DVector<f64>) -> DVector<f64> {
    let scale = v.amax();
    if scale == 0.0 {
        return v;
    }
    for i in 0..v.len() {
        if v[i].abs() > 1e-9 * scale {
            if v[i] < 0.0 {
                v.neg_mut();
            }
            break;
        }
    }
    v
}
