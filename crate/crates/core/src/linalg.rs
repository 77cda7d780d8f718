//! Dense complex matrix helpers shared by the circuit, optics and tomography code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[inline]
pub fn expi(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Builds a square matrix from row-major entries.
pub fn from_rows(n: usize, entries: &[Complex64]) -> CMat {
    assert_eq!(entries.len(), n * n);
    CMat::from_row_slice(n, n, entries)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn diag(entries: &[Complex64]) -> CMat {
    CMat::from_diagonal(&CVec::from_row_slice(entries))
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    ms.iter()
        .fold(identity(1), |acc, m| kron(&acc, m))
}

/// Largest absolute entry-wise difference.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn unitarity_deviation(u: &CMat) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    unitarity_deviation(u) <= tol
}

pub fn hermiticity_deviation(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in ascending order.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CVec::from_iterator(vals.len(), vals.iter().map(|&v| r(f(v))));
    &vecs * CMat::from_diagonal(&d) * vecs.adjoint()
}

pub fn psd_sqrt(m: &CMat) -> CMat {
    hermitian_map(m, |v| v.max(0.0).sqrt())
}

/// Projects a Hermitian matrix onto the set of unit-trace positive semidefinite
/// matrices (closest in Frobenius norm), via simplex projection of the spectrum.
pub fn project_to_density(m: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let projected = project_to_simplex(&vals);
    let d = CVec::from_iterator(projected.len(), projected.iter().map(|&v| r(v)));
    let out = &vecs * CMat::from_diagonal(&d) * vecs.adjoint();
    (&out + out.adjoint()).scale(0.5)
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - 1.0) / (k as f64 + 1.0);
        if x - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|&x| (x - shift).max(0.0)).collect()
}

pub fn pauli_i() -> CMat {
    identity(2)
}

pub fn pauli_x() -> CMat {
    from_rows(2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMat {
    from_rows(2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMat {
    from_rows(2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    from_rows(2, &[r(s), r(s), r(s), r(-s)])
}

/// Pauli basis {I,X,Y,Z}^{⊗k}, ordered with the leftmost factor most significant.
pub fn pauli_basis(qubits: usize) -> Vec<CMat> {
    let singles = [pauli_i(), pauli_x(), pauli_y(), pauli_z()];
    let mut basis = vec![identity(1)];
    for _ in 0..qubits {
        basis = basis
            .iter()
            .flat_map(|b| singles.iter().map(move |p| kron(b, p)))
            .collect();
    }
    basis
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Reduced state on the qubits in `keep` (in register order); the rest are traced out.
pub fn partial_trace_qubits(rho: &CMat, qubits: usize, keep: &[usize]) -> CMat {
    let bit = |idx: usize, q: usize| (idx >> (qubits - 1 - q)) & 1;
    let d = 1usize << qubits;
    let dk = 1usize << keep.len();
    let reduced = |idx: usize| keep.iter().fold(0usize, |acc, &q| acc * 2 + bit(idx, q));
    let rest = |idx: usize| (0..qubits).filter(|q| !keep.contains(q)).fold(0usize, |acc, q| acc * 2 + bit(idx, q));
    let mut out = CMat::zeros(dk, dk);
    for i in 0..d {
        for j in 0..d {
            if rest(i) == rest(j) {
                out[(reduced(i), reduced(j))] += rho[(i, j)];
            }
        }
    }
    out
}
