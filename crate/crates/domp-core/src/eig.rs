//! Dense symmetric eigendecomposition.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration, the classic pairing that underlies most portable symmetric
//! eigensolvers. Deterministic, allocation-light, and sized for the matrices
//! this crate produces (bordered lifts and constraint Gram matrices), it is
//! capped at [`MAX_DIM`] rather than tuned for large problems.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest accepted matrix dimension.
pub const MAX_DIM: usize = 200;

/// Eigendecomposition `A = V * diag(values) * V^T` of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Row-major `dim x dim` matrix whose column `c` is the unit
    /// eigenvector for `values[c]`.
    pub vectors: Vec<f64>,
    pub dim: usize,
}

/// Decomposes a dense row-major symmetric matrix. Only the averaged
/// symmetric part `(A + A^T) / 2` is used. Fails on dimension mismatches,
/// non-finite entries, `dim > MAX_DIM`, or (exceptionally) when the QL
/// iteration does not deflate within 30 sweeps per eigenvalue.
pub fn symmetric_eigen(a: &[f64], dim: usize) -> Result<SymEigen> {
    if dim == 0 {
        return Err(Error::InvalidArgument(String::from(
            "eigendecomposition of an empty matrix",
        )));
    }
    if dim > MAX_DIM {
        return Err(Error::ResourceLimit(format!(
            "matrix dimension {dim} exceeds the eigensolver cap {MAX_DIM}"
        )));
    }
    if a.len() != dim * dim {
        return Err(Error::LayoutMismatch(format!(
            "matrix buffer holds {} entries, expected {}",
            a.len(),
            dim * dim
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(String::from(
            "matrix entries must be finite",
        )));
    }

    let n = dim;
    let mut v = vec![0.0; n * n];
    for r in 0..n {
        v[r * n + r] = a[r * n + r];
        for c in r + 1..n {
            let s = 0.5 * (a[r * n + c] + a[c * n + r]);
            v[r * n + c] = s;
            v[c * n + r] = s;
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, n);
    tql2(&mut v, &mut d, &mut e, n)?;
    Ok(SymEigen {
        values: d,
        vectors: v,
        dim: n,
    })
}

/// Householder reduction of the symmetric matrix in `v` to tridiagonal
/// form, accumulating the orthogonal transformations back into `v`.
/// Leaves the diagonal in `d` and the subdiagonal in `e[1..]`.
fn tred2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }

    for i in (1..n).rev() {
        let mut h = 0.0;
        let mut scale = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            // Apply the Householder similarity transformation.
            for j in 0..i {
                let f = d[j];
                v[j * n + i] = f;
                let mut g = e[j] + v[j * n + j] * f;
                for k in j + 1..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n - 1 {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal form, rotating the
/// accumulated transformations in `v` along. Sorts the spectrum ascending.
fn tql2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 30 {
                    return Err(Error::NumericFailure(format!(
                        "QL iteration stalled at eigenvalue {l} of {n}"
                    )));
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        let h = v[k * n + i + 1];
                        v[k * n + i + 1] = s * v[k * n + i] + c * h;
                        v[k * n + i] = c * v[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort, carrying eigenvectors along.
    for i in 0..n - 1 {
        let mut k = i;
        let mut p = d[i];
        for j in i + 1..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                v.swap(j * n + i, j * n + k);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
        values.into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    fn reconstruction_error(a: &[f64], eigen: &SymEigen) -> f64 {
        let n = eigen.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let mut acc = 0.0;
                for t in 0..n {
                    acc += eigen.vectors[r * n + t] * eigen.values[t] * eigen.vectors[c * n + t];
                }
                worst = worst.max((acc - a[r * n + c]).abs());
            }
        }
        worst
    }

    fn orthogonality_error(eigen: &SymEigen) -> f64 {
        let n = eigen.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for t in 0..n {
                    acc += eigen.vectors[t * n + i] * eigen.vectors[t * n + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_matrix() {
        let a = vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let eigen = symmetric_eigen(&a, 3).unwrap();
        assert_eq!(eigen.values, vec![1.0, 2.0, 3.0]);
        assert!(reconstruction_error(&a, &eigen) <= 1e-14);
    }

    #[test]
    fn two_by_two_exact() {
        let a = vec![2.0, 1.0, 1.0, 2.0];
        let eigen = symmetric_eigen(&a, 2).unwrap();
        assert!((eigen.values[0] - 1.0).abs() <= 1e-14);
        assert!((eigen.values[1] - 3.0).abs() <= 1e-14);
        // Eigenvector for 3 is (1, 1) / sqrt(2) up to sign.
        let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
        let (x, y) = (eigen.vectors[1], eigen.vectors[3]);
        assert!((x.abs() - inv_sqrt2).abs() <= 1e-14);
        assert!((x - y).abs() <= 1e-14);
    }

    #[test]
    fn random_symmetric_reconstruction() {
        let mut rng = SplitMix64::new(0xE16);
        for &n in &[5usize, 30, 60] {
            let mut a = vec![0.0; n * n];
            for r in 0..n {
                for c in r..n {
                    let val = rng.next_f64() * 2.0 - 1.0;
                    a[r * n + c] = val;
                    a[c * n + r] = val;
                }
            }
            let eigen = symmetric_eigen(&a, n).unwrap();
            let scale = max_abs(a.iter().copied());
            assert!(
                reconstruction_error(&a, &eigen) <= 1e-10 * scale.max(1.0),
                "n={n}"
            );
            assert!(orthogonality_error(&eigen) <= 1e-12, "n={n}");
            for w in eigen.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn rank_one_spectrum() {
        // u u^T has one eigenvalue |u|^2 and the rest zero.
        let u = [1.0, 2.0, -1.0, 0.5, 3.0];
        let n = u.len();
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                a[r * n + c] = u[r] * u[c];
            }
        }
        let eigen = symmetric_eigen(&a, n).unwrap();
        let norm_sq: f64 = u.iter().map(|x| x * x).sum();
        assert!((eigen.values[n - 1] - norm_sq).abs() <= 1e-12 * norm_sq);
        for &v in &eigen.values[..n - 1] {
            assert!(v.abs() <= 1e-12 * norm_sq);
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        // 4x4 identity plus a rank-one bump keeps a triple eigenvalue.
        let n = 4;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        for r in 0..n {
            for c in 0..n {
                a[r * n + c] += 0.25;
            }
        }
        let eigen = symmetric_eigen(&a, n).unwrap();
        assert!((eigen.values[3] - 2.0).abs() <= 1e-13);
        for &v in &eigen.values[..3] {
            assert!((v - 1.0).abs() <= 1e-13);
        }
        assert!(reconstruction_error(&a, &eigen) <= 1e-13);
    }

    #[test]
    fn guards() {
        assert!(matches!(
            symmetric_eigen(&[], 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            symmetric_eigen(&[1.0; 4], 3),
            Err(Error::LayoutMismatch(_))
        ));
        let big = 201;
        assert!(matches!(
            symmetric_eigen(&vec![0.0; big * big], big),
            Err(Error::ResourceLimit(_))
        ));
        assert!(matches!(
            symmetric_eigen(&[f64::NAN, 0.0, 0.0, 1.0], 2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn one_by_one() {
        let eigen = symmetric_eigen(&[-4.0], 1).unwrap();
        assert_eq!(eigen.values, vec![-4.0]);
        assert_eq!(eigen.vectors, vec![1.0]);
    }
}
