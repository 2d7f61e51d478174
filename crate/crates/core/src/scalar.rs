//! Scalar abstraction shared by every numerical module.
//!
//! All operator, basis and constraint-matrix code is written against [`Real`],
//! which is implemented for `f32` and `f64`. Dense storage goes through
//! `nalgebra`; the two spectral kernels the pipeline depends on (Hermitian
//! eigendecomposition and singular values) are delegated to `faer`, whose
//! tridiagonal solver stays accurate on the heavily clustered spectra that
//! symmetric spin chains produce.

use faer::complex_native::{c32, c64};
use faer::Side;
use nalgebra::{Complex, DMatrix};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type usable by the whole pipeline.
pub trait Real: nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Eigendecomposition of a real symmetric matrix.
    ///
    /// Eigenvalues are returned in ascending order; column `k` of the matrix is
    /// the eigenvector for eigenvalue `k`.
    fn symmetric_eigen(m: &DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>);

    /// Eigendecomposition of a complex Hermitian matrix, ascending eigenvalues.
    fn hermitian_eigen(m: &DMatrix<Complex<Self>>) -> (Vec<Self>, DMatrix<Complex<Self>>);

    /// Singular values in nonincreasing order.
    fn singular_values(m: &DMatrix<Self>) -> Vec<Self>;

    /// Singular values (nonincreasing) and the full `n × n` matrix of right
    /// singular vectors; columns beyond `min(rows, n)` span the remaining
    /// null directions.
    fn right_singular_vectors(m: &DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>);
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar converts to f64")
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

fn ascending_order<T: PartialOrd>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("NaN eigenvalue"));
    order
}

macro_rules! impl_real {
    ($real:ty, $complex:ident) => {
        impl Real for $real {
            fn symmetric_eigen(m: &DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>) {
                let n = m.nrows();
                assert_eq!(n, m.ncols(), "symmetric_eigen needs a square matrix");
                if n == 0 {
                    return (Vec::new(), DMatrix::zeros(0, 0));
                }
                let a = faer::Mat::<$real>::from_fn(n, n, |i, j| m[(i, j)]);
                let evd = a.selfadjoint_eigendecomposition(Side::Lower);
                let s = evd.s().column_vector();
                let u = evd.u();
                let raw: Vec<$real> = (0..n).map(|i| s.read(i)).collect();
                let order = ascending_order(&raw);
                let values = order.iter().map(|&k| raw[k]).collect();
                let vectors = DMatrix::from_fn(n, n, |i, j| u.read(i, order[j]));
                (values, vectors)
            }

            fn hermitian_eigen(m: &DMatrix<Complex<Self>>) -> (Vec<Self>, DMatrix<Complex<Self>>) {
                let n = m.nrows();
                assert_eq!(n, m.ncols(), "hermitian_eigen needs a square matrix");
                if n == 0 {
                    return (Vec::new(), DMatrix::zeros(0, 0));
                }
                let a = faer::Mat::<$complex>::from_fn(n, n, |i, j| {
                    let z = m[(i, j)];
                    $complex::new(z.re, z.im)
                });
                let evd = a.selfadjoint_eigendecomposition(Side::Lower);
                let s = evd.s().column_vector();
                let u = evd.u();
                let raw: Vec<$real> = (0..n).map(|i| s.read(i).re).collect();
                let order = ascending_order(&raw);
                let values = order.iter().map(|&k| raw[k]).collect();
                let vectors = DMatrix::from_fn(n, n, |i, j| {
                    let z = u.read(i, order[j]);
                    Complex::new(z.re, z.im)
                });
                (values, vectors)
            }

            fn singular_values(m: &DMatrix<Self>) -> Vec<Self> {
                if m.nrows() == 0 || m.ncols() == 0 {
                    return Vec::new();
                }
                let a = faer::Mat::<$real>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
                let mut s = a.singular_values();
                s.sort_by(|x, y| y.partial_cmp(x).expect("NaN singular value"));
                s
            }

            fn right_singular_vectors(m: &DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>) {
                let (rows, cols) = m.shape();
                if cols == 0 {
                    return (Vec::new(), DMatrix::zeros(0, 0));
                }
                if rows == 0 {
                    return (Vec::new(), DMatrix::identity(cols, cols));
                }
                let a = faer::Mat::<$real>::from_fn(rows, cols, |i, j| m[(i, j)]);
                let svd = a.svd();
                let s = svd.s_diagonal();
                let v = svd.v();
                let k = rows.min(cols);
                let raw: Vec<$real> = (0..k).map(|i| s.read(i)).collect();
                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by(|&x, &y| raw[y].partial_cmp(&raw[x]).expect("NaN singular value"));
                order.extend(k..cols);
                let values = order[..k].iter().map(|&i| raw[i]).collect();
                let vectors = DMatrix::from_fn(cols, cols, |i, j| v.read(i, order[j]));
                (values, vectors)
            }
        }
    };
}

impl_real!(f32, c32);
impl_real!(f64, c64);

/// Hermitian eigendecomposition that stays in real arithmetic when the input
/// has no imaginary part, so real matrices yield real eigenvectors.
pub fn hermitian_eigen_auto<T: Real>(m: &DMatrix<Complex<T>>) -> (Vec<T>, DMatrix<Complex<T>>) {
    if is_real_matrix(m) {
        let re = m.map(|z| z.re);
        let (values, vectors) = T::symmetric_eigen(&re);
        (values, vectors.map(|x| Complex::new(x, T::zero())))
    } else {
        T::hermitian_eigen(m)
    }
}

/// True when every imaginary part is exactly zero.
pub fn is_real_matrix<T: Real>(m: &DMatrix<Complex<T>>) -> bool {
    m.iter().all(|z| z.im == T::zero())
}

/// Largest entry magnitude of a complex matrix.
pub fn max_abs<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc.max(nalgebra::ComplexField::modulus(*z)))
}
