//! Raw matrix helpers shared by the typed wrappers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Which subsystem of a bipartite operator an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    First,
    Second,
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Maximum absolute deviation of `m` from its adjoint.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let diff = m - m.adjoint();
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0[0]
}

/// Square root of a positive semidefinite matrix; eigenvalues below zero are
/// clamped so that validity-tolerance negatives do not produce NaNs.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::new(v.max(0.0).sqrt(), 0.0)),
    ));
    &vectors * d * vectors.adjoint()
}

/// Sum of singular values of a Hermitian matrix (its trace norm).
pub fn hermitian_trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.iter().map(|v| v.abs()).sum()
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Quadratic form `<v|M|v>`, real part.
pub fn expectation(m: &CMatrix, v: &CVector) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

/// Kronecker product with the first factor on the slow (most significant)
/// index: `kron(a, b)[i_a*db + i_b, j_a*db + j_b] = a[i_a,j_a] b[i_b,j_b]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Partial trace of an operator on a bipartite space of dimensions
/// `(dim_first, dim_second)`, tracing out the subsystem named by `traced`.
pub fn partial_trace(
    m: &CMatrix,
    dim_first: usize,
    dim_second: usize,
    traced: Half,
) -> CMatrix {
    let (keep, other) = match traced {
        Half::First => (dim_second, dim_first),
        Half::Second => (dim_first, dim_second),
    };
    let mut out = CMatrix::zeros(keep, keep);
    for i in 0..keep {
        for j in 0..keep {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..other {
                let (row, col) = match traced {
                    Half::First => (t * keep + i, t * keep + j),
                    Half::Second => (i * other + t, j * other + t),
                };
                acc += m[(row, col)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}
