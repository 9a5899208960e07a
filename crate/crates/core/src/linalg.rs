//! Small complex-matrix helpers shared by the Clifford, spin and operator layers.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix acting on a spinor fiber.
pub type CMat = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMat {
    CMat::zeros(dim, dim)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

/// `a ⊗ b` with `a` acting on the outer (slow) index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest entry modulus; every residual in the crate is reported in this norm.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn anti_hermitian_defect(m: &CMat) -> f64 {
    max_abs(&(m + m.adjoint()))
}

/// Returns `Some(λ)` when `m` equals `λ·Id` to within `tol`.
pub fn as_scalar(m: &CMat, tol: f64) -> Option<Complex64> {
    if !m.is_square() || m.nrows() == 0 {
        return None;
    }
    let lambda = m.trace() / c(m.nrows() as f64);
    let residual = max_abs_diff(m, &(identity(m.nrows()) * lambda));
    (residual <= tol).then_some(lambda)
}

/// Averages the outer factor away: for `m = Id_outer ⊗ x` this returns `x` exactly.
pub fn partial_trace_outer(m: &CMat, outer: usize, inner: usize) -> CMat {
    let mut out = CMat::zeros(inner, inner);
    for block in 0..outer {
        let offset = block * inner;
        out += m.view((offset, offset), (inner, inner));
    }
    out / c(outer as f64)
}

/// Real block matrix lifted to complex entries.
pub fn complexify(m: &DMatrix<f64>) -> CMat {
    m.map(c)
}
