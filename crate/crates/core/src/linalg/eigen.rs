//! Hermitian eigendecomposition (cyclic complex Jacobi) and the matrix
//! functions built on it.

use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{c, cr, Real, C};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues (ascending) and eigenvectors (as columns) of a Hermitian matrix.
///
/// Only the Hermitian part of `a` is used implicitly: the rotations assume
/// a[q][p] = conj(a[p][q]).
pub fn eigh<T: Real>(a: &ComplexMatrix<T>) -> (Vec<T>, ComplexMatrix<T>) {
    assert!(a.is_square(), "eigh needs a square matrix");
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::<T>::identity(n);
    let scale = m.frobenius_norm().max(T::min_positive_value());
    let threshold = T::epsilon() * T::epsilon() * scale * scale;

    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    (values, vectors)
}

/// One Jacobi rotation zeroing m[p][q].
fn rotate<T: Real>(m: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == T::zero() {
        return;
    }
    let n = m.rows();
    let phase = apq / mag;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let t = if theta.is_infinite() {
        T::zero()
    } else {
        theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let cs = T::one() / (t * t + T::one()).sqrt();
    let sn = t * cs;
    // Column transform G with G[p][p]=c, G[p][q]=s, G[q][p]=-s·conj(phase), G[q][q]=c·conj(phase)
    // brings the (p, q) block to real diagonal form.
    let g_pp = cr(cs);
    let g_pq = cr(sn);
    let g_qp = phase.conj() * (-sn);
    let g_qq = phase.conj() * cs;
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * g_pp + mkq * g_qp;
        m[(k, q)] = mkp * g_pq + mkq * g_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
        m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
    }
    m[(p, q)] = C::zero();
    m[(q, p)] = C::zero();
    m[(p, p)] = cr(m[(p, p)].re);
    m[(q, q)] = cr(m[(q, q)].re);
}

/// f(A) = Q f(Λ) Q† for Hermitian `a`.
pub fn hermitian_function<T: Real>(a: &ComplexMatrix<T>, f: impl Fn(T) -> C<T>) -> ComplexMatrix<T> {
    let (values, q) = eigh(a);
    let n = a.rows();
    let fv: Vec<C<T>> = values.into_iter().map(f).collect();
    let mut scaled = q.clone();
    for r in 0..n {
        for k in 0..n {
            scaled[(r, k)] *= fv[k];
        }
    }
    scaled.matmul(&q.dagger())
}

/// e^{iεK} for Hermitian `k`.
///
/// Rejects generators whose Hermiticity defect exceeds 1e-8 relative to the
/// largest entry (absolute for entries below one).
pub fn expm_i_hermitian<T: Real>(k: &ComplexMatrix<T>, eps: T) -> Result<ComplexMatrix<T>> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch(format!("generator is {}x{}", k.rows(), k.cols())));
    }
    let defect = k.hermiticity_defect();
    let tol = T::tolerance(1e-8) * k.max_abs().max(T::one());
    if defect > tol {
        return Err(Error::NotHermitian { deviation: defect.as_f64() });
    }
    if eps == T::zero() || k.max_abs() == T::zero() {
        return Ok(ComplexMatrix::identity(k.rows()));
    }
    Ok(hermitian_function(k, |lambda| {
        let phase = eps * lambda;
        c(phase.cos(), phase.sin())
    }))
}

/// Nearest unitary in Frobenius norm, U (U†U)^{-1/2}.
pub fn polar_unitary<T: Real>(u: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let gram = u.dagger().matmul(u);
    let inv_sqrt = hermitian_function(&gram, |s| cr(T::one() / s.max(T::min_positive_value()).sqrt()));
    u.matmul(&inv_sqrt)
}

/// Identity-based sanity helper: Q Λ Q† reassembled from [`eigh`].
pub fn reconstruct<T: Real>(values: &[T], vectors: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let d: Vec<C<T>> = values.iter().map(|&v| cr(v)).collect();
    vectors.matmul(&ComplexMatrix::diagonal(&d)).matmul(&vectors.dagger())
}
