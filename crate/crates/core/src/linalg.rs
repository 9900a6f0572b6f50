//! Dense linear algebra for small symmetric problems.
//!
//! Everything in the pipeline that needs an eigendecomposition works on
//! matrices of at most a few hundred rows (AO matrices, Hessians, Lanczos
//! tridiagonals), so a cyclic Jacobi solver is accurate, deterministic and
//! fast enough. Kept generic over the scalar so the whole crate can be
//! instantiated at either precision.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns. Eigenvector signs are fixed so the largest-magnitude component
/// is positive, which keeps downstream results reproducible.
pub fn eigh<T: Real>(a: &Array2<T>) -> (Array1<T>, Array2<T>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh requires a square matrix");
    let mut m = a.clone();
    let mut v = Array2::<T>::eye(n);
    if n <= 1 {
        return (m.diag().to_owned(), v);
    }

    let eps = T::epsilon() * T::of(1e2);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        let scale: T = m.diag().iter().map(|d| *d * *d).sum::<T>() + off;
        if off <= eps * eps * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let tau = (aqq - app) / (T::of(2.0) * apq);
                // Smaller-magnitude root of t^2 + 2 tau t - 1 = 0.
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[[i, i]].partial_cmp(&m[[j, j]]).expect("NaN eigenvalue")
    });
    let mut w = Array1::zeros(n);
    let mut vs = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        w[dst] = m[[src, src]];
        let mut best = T::zero();
        let mut flip = false;
        for k in 0..n {
            let val = v[[k, src]];
            if val.abs() > best {
                best = val.abs();
                flip = val < T::zero();
            }
        }
        for k in 0..n {
            let val = v[[k, src]];
            vs[[k, dst]] = if flip { -val } else { val };
        }
    }
    (w, vs)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky<T: Real>(a: &Array2<T>) -> Result<Array2<T>> {
    let n = a.nrows();
    let mut l = Array2::<T>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= T::zero() {
                    return Err(Error::Conditioning(format!(
                        "matrix not positive definite at pivot {i} ({sum:e})"
                    )));
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solve `L L^T x = b` given the lower Cholesky factor.
pub fn cho_solve<T: Real>(l: &Array2<T>, b: &Array1<T>) -> Array1<T> {
    let n = l.nrows();
    let mut y = b.clone();
    for i in 0..n {
        for k in 0..i {
            let yk = y[k];
            y[i] -= l[[i, k]] * yk;
        }
        y[i] /= l[[i, i]];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let yk = y[k];
            y[i] -= l[[k, i]] * yk;
        }
        y[i] /= l[[i, i]];
    }
    y
}

/// Solve a dense linear system by LU with partial pivoting.
pub fn lu_solve<T: Real>(a: &Array2<T>, b: &Array1<T>) -> Result<Array1<T>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[[perm[col], col]].abs();
        for row in (col + 1)..n {
            let v = m[[perm[row], col]].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best < T::epsilon() * T::of(1e3) {
            return Err(Error::Conditioning("singular linear system".into()));
        }
        perm.swap(col, piv);
        let p = perm[col];
        for row in (col + 1)..n {
            let r = perm[row];
            let f = m[[r, col]] / m[[p, col]];
            m[[r, col]] = f;
            for k in (col + 1)..n {
                let mpk = m[[p, k]];
                m[[r, k]] -= f * mpk;
            }
        }
    }
    let mut y = Array1::<T>::zeros(n);
    for i in 0..n {
        let mut sum = x[perm[i]];
        for k in 0..i {
            sum -= m[[perm[i], k]] * y[k];
        }
        y[i] = sum;
    }
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= m[[perm[i], k]] * x[k];
        }
        x[i] = sum / m[[perm[i], i]];
    }
    Ok(x)
}

/// Moore-Penrose pseudoinverse with a singular-value cutoff.
///
/// Computed through the eigendecomposition of `B B^T`, which is accurate
/// enough for the well-scaled Wilson B matrices this crate needs it for.
pub fn pinv<T: Real>(b: &Array2<T>, sv_cutoff: T) -> Array2<T> {
    let bbt = b.dot(&b.t());
    let (w, u) = eigh(&bbt);
    let n = bbt.nrows();
    let mut inv = Array2::<T>::zeros((n, n));
    for k in 0..n {
        let sigma2 = w[k];
        if sigma2 > sv_cutoff * sv_cutoff {
            for i in 0..n {
                for j in 0..n {
                    inv[[i, j]] += u[[i, k]] * u[[j, k]] / sigma2;
                }
            }
        }
    }
    b.t().dot(&inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    #[test]
    fn eigh_identity_and_diag() {
        let a: Array2<f64> = array![[3.0, 0.0], [0.0, 1.0]];
        let (w, v) = eigh(&a);
        assert!((w[0] - 1.0).abs() < 1e-14);
        assert!((w[1] - 3.0).abs() < 1e-14);
        assert!((v[[1, 0]].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_random_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for n in [2usize, 5, 9, 17] {
            let mut a = Array2::<f64>::zeros((n, n));
            for i in 0..n {
                for j in 0..=i {
                    let x = rng.gen_range(-1.0..1.0);
                    a[[i, j]] = x;
                    a[[j, i]] = x;
                }
            }
            let (w, v) = eigh(&a);
            // A v_k = w_k v_k
            for k in 0..n {
                let vk = v.column(k).to_owned();
                let av = a.dot(&vk);
                for i in 0..n {
                    assert!((av[i] - w[k] * vk[i]).abs() < 1e-11, "n={n} k={k}");
                }
            }
            for k in 1..n {
                assert!(w[k] >= w[k - 1]);
            }
        }
    }

    #[test]
    fn cholesky_solve_roundtrip() {
        let a: Array2<f64> = array![[4.0, 1.0, 0.2], [1.0, 3.0, 0.5], [0.2, 0.5, 2.0]];
        let b: Array1<f64> = array![1.0, -2.0, 0.5];
        let l = cholesky(&a).unwrap();
        let x = cho_solve(&l, &b);
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        let bad: Array2<f64> = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(&bad).is_err());
    }

    #[test]
    fn lu_solves_unsymmetric() {
        let a: Array2<f64> = array![[0.0, 2.0, 1.0], [1.0, -1.0, 0.5], [3.0, 0.1, -2.0]];
        let b: Array1<f64> = array![1.0, 0.0, -1.0];
        let x = lu_solve(&a, &b).unwrap();
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn pinv_recovers_rank_deficient() {
        // Rows 0 and 2 are identical: rank 2.
        let b: Array2<f64> = array![[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0]];
        let bp = pinv(&b, 1e-8);
        let bbp = b.dot(&bp).dot(&b.view());
        for (x, y) in bbp.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
