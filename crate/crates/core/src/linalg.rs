//! Small dense linear algebra: complex inner products, realification of
//! complex vectors and matrices, and a sorted symmetric eigensolver for real
//! symmetric matrices.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// `<a, b> = sum_i a_i conj(b_i)`.
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

pub fn cnorm(a: &CVec) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maps `c` in C^m to `(Re c, Im c)` in R^{2m}.
pub fn realify_vec(c: &CVec) -> RVec {
    let m = c.len();
    RVec::from_fn(2 * m, |i, _| if i < m { c[i].re } else { c[i - m].im })
}

pub fn complexify_vec(r: &RVec) -> CVec {
    let m = r.len() / 2;
    CVec::from_fn(m, |i, _| C64::new(r[i], r[i + m]))
}

/// Real 2m x 2m representation `[[Re A, -Im A], [Im A, Re A]]`, so that
/// `realify(A c) = realify(A) realify(c)`.
pub fn realify_mat(a: &CMat) -> RMat {
    let m = a.nrows();
    let mut r = RMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let z = a[(i, j)];
            r[(i, j)] = z.re;
            r[(i, j + m)] = -z.im;
            r[(i + m, j)] = z.im;
            r[(i + m, j + m)] = z.re;
        }
    }
    r
}

pub fn sym(x: &RMat) -> RMat {
    (x + x.transpose()) * 0.5
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint()
}

/// Eigen decomposition of a real symmetric matrix, eigenvalues ascending and
/// eigenvectors stored column-wise in matching order.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: RMat,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn min_vector(&self) -> RVec {
        self.vectors.column(0).into_owned()
    }
}

/// Eigen-decomposition of the symmetric part of `a`, eigenvalues ascending.
pub fn sym_eigen(a: &RMat) -> SymEigen {
    assert_eq!(a.nrows(), a.ncols(), "sym_eigen needs a square matrix");
    let n = a.nrows();
    let eig = sym(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = RMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    SymEigen { values, vectors }
}

/// Smallest eigenvalue of the Hermitian part of `a`, with a unit eigenvector.
/// `min_{|l|=1} Re<A l, l>`.
pub fn hermitian_part_min(a: &CMat) -> (f64, CVec) {
    let eig = sym_eigen(&sym(&realify_mat(a)));
    let z = eig.min_vector();
    (eig.min(), complexify_vec(&z))
}

pub fn max_abs_entry(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_real_symmetric(a: &CMat, tol: f64) -> bool {
    let m = a.nrows();
    let scale = max_abs_entry(a).max(1.0);
    for i in 0..m {
        for j in 0..m {
            if a[(i, j)].im.abs() > tol * scale {
                return false;
            }
            if (a[(i, j)].re - a[(j, i)].re).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn real_part(a: &CMat) -> RMat {
    a.map(|z| z.re)
}

pub fn cmat_from_real(a: &RMat) -> CMat {
    a.map(|x| C64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigen_diagonal_sorted() {
        let a = RMat::from_diagonal(&RVec::from_vec(vec![3.0, -1.0, 2.0]));
        let e = sym_eigen(&a);
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
        assert_relative_eq!(e.vectors[(1, 0)].abs(), 1.0);
    }

    #[test]
    fn eigen_reconstructs() {
        let a = RMat::from_row_slice(3, 3, &[4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, 3.0]);
        let e = sym_eigen(&a);
        let d = RMat::from_diagonal(&RVec::from_vec(e.values.clone()));
        let back = &e.vectors * d * e.vectors.transpose();
        assert!((back - &a).norm() < 1e-12);
        let orth = e.vectors.transpose() * &e.vectors - RMat::identity(3, 3);
        assert!(orth.norm() < 1e-13);
        let tr: f64 = e.values.iter().sum();
        assert_relative_eq!(tr, 9.0, epsilon = 1e-13);
    }

    #[test]
    fn eigen_two_by_two_trace_det() {
        let a = RMat::from_row_slice(2, 2, &[2.0, 1.5, 1.5, 5.0]);
        let e = sym_eigen(&a);
        assert_relative_eq!(e.values[0] + e.values[1], 7.0, epsilon = 1e-13);
        assert_relative_eq!(e.values[0] * e.values[1], 10.0 - 2.25, epsilon = 1e-12);
    }

    #[test]
    fn realification_matches_complex_product() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 2.0),
                C64::new(-0.5, 0.3),
                C64::new(0.0, -1.0),
                C64::new(2.0, 0.0),
            ],
        );
        let c = CVec::from_vec(vec![C64::new(0.3, -0.7), C64::new(1.1, 0.4)]);
        let lhs = realify_vec(&(&a * &c));
        let rhs = realify_mat(&a) * realify_vec(&c);
        assert!((lhs - rhs).norm() < 1e-14);
        let d = CVec::from_vec(vec![C64::new(-0.2, 0.9), C64::new(0.5, 0.5)]);
        assert_relative_eq!(inner(&c, &d).re, realify_vec(&c).dot(&realify_vec(&d)), epsilon = 1e-15);
    }

    #[test]
    fn hermitian_min_of_identity() {
        let (v, z) = hermitian_part_min(&CMat::identity(3, 3));
        assert_relative_eq!(v, 1.0, epsilon = 1e-14);
        assert_relative_eq!(cnorm(&z), 1.0, epsilon = 1e-14);
    }
}
