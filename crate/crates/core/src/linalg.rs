// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix helpers on top of `nalgebra`.
//!
//! Everything here works on small dense matrices (dimensions in the tens),
//! so clarity wins over blocking or in-place tricks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

/// Pauli matrix σ₁, σ₂ or σ₃; index 0 gives the identity.
pub fn pauli(index: usize) -> CMat {
    match index {
        0 => identity(2),
        1 => CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli index {index} out of range"),
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

pub fn trace(a: &CMat) -> C64 {
    a.trace()
}

/// Frobenius norm.
pub fn fro(a: &CMat) -> f64 {
    a.norm()
}

/// Spectral (operator) norm, the largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// Operator norm of a Hermitian matrix via its eigenvalues.
pub fn herm_norm(a: &CMat) -> f64 {
    let e = eigh(a);
    e.values
        .first()
        .map(|lo| lo.abs().max(e.values.last().unwrap().abs()))
        .unwrap_or(0.0)
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// ‖A − A†‖_F.
pub fn hermitian_defect(a: &CMat) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending and
/// eigenvectors stored column-wise in the same order.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermEig {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigensolver. The input is symmetrised first so round-off in
/// the caller never leaks a spurious anti-Hermitian part into the result.
pub fn eigh(a: &CMat) -> HermEig {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh needs a square matrix");
    if n == 0 {
        return HermEig {
            values: Vec::new(),
            vectors: zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    HermEig { values, vectors }
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    eigh(a).min()
}

pub fn max_eigenvalue(a: &CMat) -> f64 {
    eigh(a).max()
}

/// `exp(i·phi·g)` for Hermitian `g`.
pub fn expm_i_hermitian(g: &CMat, phi: f64) -> CMat {
    let e = eigh(g);
    let n = g.nrows();
    let phases = CMat::from_diagonal(&CVec::from_iterator(
        n,
        e.values.iter().map(|&l| C64::from_polar(1.0, l * phi)),
    ));
    &e.vectors * phases * e.vectors.adjoint()
}

/// Row-major vectorisation: entry `(a, j)` lands at index `a * cols + j`.
/// This is `(A ⊗ 𝟙)|Φ⟩` for the unnormalised maximally entangled `|Φ⟩`.
pub fn vec_row_major(a: &CMat) -> CVec {
    let (r, cc) = a.shape();
    CVec::from_fn(r * cc, |idx, _| a[(idx / cc, idx % cc)])
}

/// Trace out the first tensor factor of a matrix on `C^{d_first} ⊗ C^{d_second}`.
pub fn partial_trace_first(m: &CMat, d_first: usize, d_second: usize) -> CMat {
    assert_eq!(m.nrows(), d_first * d_second);
    CMat::from_fn(d_second, d_second, |i, j| {
        (0..d_first)
            .map(|a| m[(a * d_second + i, a * d_second + j)])
            .sum()
    })
}

/// `(𝟙_left ⊗ A ⊗ 𝟙_right) · X`.
pub fn apply_left_local(a: &CMat, x: &CMat, left: usize, right: usize) -> CMat {
    let (ar, ac) = a.shape();
    assert_eq!(x.nrows(), left * ac * right, "local operator shape");
    let mut out = zeros(left * ar * right, x.ncols());
    for col in 0..x.ncols() {
        for l in 0..left {
            for p in 0..ar {
                for q in 0..ac {
                    let apq = a[(p, q)];
                    if apq == ZERO {
                        continue;
                    }
                    let src = (l * ac + q) * right;
                    let dst = (l * ar + p) * right;
                    for r in 0..right {
                        out[(dst + r, col)] += apq * x[(src + r, col)];
                    }
                }
            }
        }
    }
    out
}

/// `(𝟙 ⊗ A ⊗ 𝟙) · X · (𝟙 ⊗ B ⊗ 𝟙)†`.
pub fn sandwich_local(a: &CMat, x: &CMat, b: &CMat, left: usize, right: usize) -> CMat {
    let ax = apply_left_local(a, x, left, right);
    apply_left_local(b, &ax.adjoint(), left, right).adjoint()
}

/// Real orthonormal coordinates for Hermitian `n×n` matrices: `n` diagonal
/// entries followed by `(re, im)` pairs of the strict upper triangle.
pub fn hermitian_basis(n: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut e = zeros(n, n);
        e[(i, i)] = ONE;
        basis.push(e);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut re = zeros(n, n);
            re[(i, j)] = ONE;
            re[(j, i)] = ONE;
            basis.push(re);
            let mut im = zeros(n, n);
            im[(i, j)] = I;
            im[(j, i)] = -I;
            basis.push(im);
        }
    }
    basis
}

/// Inverse of [`hermitian_basis`] coordinates (up to the basis scaling: the
/// off-diagonal generators have Frobenius norm √2, so the coordinates are
/// the plain real and imaginary parts of the upper triangle).
pub fn hermitian_coords(a: &CMat) -> Vec<f64> {
    let n = a.nrows();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        v.push(a[(i, i)].re);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            v.push(a[(i, j)].re);
            v.push(a[(i, j)].im);
        }
    }
    v
}

pub fn from_hermitian_coords(n: usize, coords: &[f64]) -> CMat {
    hermitian_basis(n)
        .iter()
        .zip(coords)
        .fold(zeros(n, n), |acc, (e, &x)| acc + e.scale(x))
}

/// Inverse of a Hermitian positive definite matrix through its eigenbasis.
pub fn inverse_hpd(a: &CMat) -> CMat {
    let e = eigh(a);
    let n = a.nrows();
    let d = CMat::from_diagonal(&CVec::from_iterator(
        n,
        e.values.iter().map(|&l| c(1.0 / l, 0.0)),
    ));
    &e.vectors * d * e.vectors.adjoint()
}

/// `Re Tr(A B)`; the Hilbert–Schmidt inner product for Hermitian `A`.
pub fn re_trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}
