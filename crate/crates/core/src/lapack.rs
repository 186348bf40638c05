//! Thin safe wrappers over the LAPACK/BLAS routines used by this crate.
//!
//! All dense matrices handled here are square `Array2<Complex64>` in
//! column-major (Fortran) layout, so eigenvector columns are contiguous and
//! buffers can be handed to LAPACK without copies. `ensure_col_major`
//! converts when a caller holds a row-major array.

use ndarray::{Array2, ShapeBuilder};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

extern "C" {
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut C64,
        vl: *mut C64,
        ldvl: *const i32,
        vr: *mut C64,
        ldvr: *const i32,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zheev_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut f64,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgetrf_(
        m: *const i32,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        ipiv: *mut i32,
        info: *mut i32,
    );
    fn zgecon_(
        norm: *const u8,
        n: *const i32,
        a: *const C64,
        lda: *const i32,
        anorm: *const f64,
        rcond: *mut f64,
        work: *mut C64,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut C64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut C64,
        ldb: *const i32,
        info: *mut i32,
    );
    fn ztrsm_(
        side: *const u8,
        uplo: *const u8,
        transa: *const u8,
        diag: *const u8,
        m: *const i32,
        n: *const i32,
        alpha: *const C64,
        a: *const C64,
        lda: *const i32,
        b: *mut C64,
        ldb: *const i32,
    );
    fn zgemm_(
        transa: *const u8,
        transb: *const u8,
        m: *const i32,
        n: *const i32,
        k: *const i32,
        alpha: *const C64,
        a: *const C64,
        lda: *const i32,
        b: *const C64,
        ldb: *const i32,
        beta: *const C64,
        c: *mut C64,
        ldc: *const i32,
    );
    fn zgemv_(
        trans: *const u8,
        m: *const i32,
        n: *const i32,
        alpha: *const C64,
        a: *const C64,
        lda: *const i32,
        x: *const C64,
        incx: *const i32,
        beta: *const C64,
        y: *mut C64,
        incy: *const i32,
    );
}

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Column-major empty matrix.
pub fn zeros_cm(rows: usize, cols: usize) -> Array2<C64> {
    Array2::zeros((rows, cols).f())
}

/// Return the array in column-major layout, converting if necessary.
pub fn ensure_col_major(a: Array2<C64>) -> Array2<C64> {
    if a.as_slice_memory_order().is_some() && a.dim().1 <= 1 {
        return a;
    }
    let is_f = a.strides()[0] == 1;
    if is_f && a.as_slice_memory_order().is_some() {
        a
    } else {
        let mut out = zeros_cm(a.nrows(), a.ncols());
        out.assign(&a);
        out
    }
}

fn cm_slice(a: &Array2<C64>) -> &[C64] {
    debug_assert!(a.strides()[0] == 1);
    a.as_slice_memory_order().expect("matrix must be contiguous column-major")
}

fn cm_slice_mut(a: &mut Array2<C64>) -> &mut [C64] {
    debug_assert!(a.strides()[0] == 1);
    a.as_slice_memory_order_mut().expect("matrix must be contiguous column-major")
}

/// Which eigenvector sets an eigendecomposition should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorSets {
    None,
    Right,
    Both,
}

/// Eigenvalues plus the optional right and left eigenvector matrices.
pub type EigOutput = (Vec<C64>, Option<Array2<C64>>, Option<Array2<C64>>);

/// Full non-Hermitian eigendecomposition of a square complex matrix.
///
/// Consumes `a` (LAPACK overwrites the input). Returns eigenvalues plus,
/// depending on `want`, unit-norm right and left eigenvector matrices with
/// columns aligned index-wise to the eigenvalues. Left vectors u satisfy
/// uᴴ A = λ uᴴ; both sets come from one Schur form, so pairing is exact.
pub fn eig(a: Array2<C64>, want: VectorSets) -> Result<EigOutput> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eig requires a square matrix");
    let mut a = ensure_col_major(a);
    let ni = n as i32;
    let mut w = vec![ZERO; n];
    let (jobvl, jobvr) = match want {
        VectorSets::None => (b"N", b"N"),
        VectorSets::Right => (b"N", b"V"),
        VectorSets::Both => (b"V", b"V"),
    };
    let mut vl = if want == VectorSets::Both {
        zeros_cm(n, n)
    } else {
        zeros_cm(1, 1)
    };
    let mut vr = if want != VectorSets::None {
        zeros_cm(n, n)
    } else {
        zeros_cm(1, 1)
    };
    let ldvl = vl.nrows() as i32;
    let ldvr = vr.nrows() as i32;
    let mut rwork = vec![0f64; 2 * n.max(1)];
    let mut info = 0i32;

    // workspace query
    let mut wkopt = ZERO;
    let m1 = -1i32;
    unsafe {
        zgeev_(
            jobvl.as_ptr(),
            jobvr.as_ptr(),
            &ni,
            cm_slice_mut(&mut a).as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            cm_slice_mut(&mut vl).as_mut_ptr(),
            &ldvl,
            cm_slice_mut(&mut vr).as_mut_ptr(),
            &ldvr,
            &mut wkopt,
            &m1,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgeev(query)", info });
    }
    let lwork = (wkopt.re as i32).max(2 * ni.max(1));
    let mut work = vec![ZERO; lwork as usize];
    unsafe {
        zgeev_(
            jobvl.as_ptr(),
            jobvr.as_ptr(),
            &ni,
            cm_slice_mut(&mut a).as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            cm_slice_mut(&mut vl).as_mut_ptr(),
            &ldvl,
            cm_slice_mut(&mut vr).as_mut_ptr(),
            &ldvr,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgeev", info });
    }
    drop(a);
    let right = (want != VectorSets::None).then_some(vr);
    let left = (want == VectorSets::Both).then_some(vl);
    Ok((w, right, left))
}

/// Eigenvalues of a general complex matrix, cheapest path.
pub fn eigvals(a: Array2<C64>) -> Result<Vec<C64>> {
    Ok(eig(a, VectorSets::None)?.0)
}

/// Hermitian eigendecomposition (ascending eigenvalues, orthonormal columns).
pub fn eigh(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = ensure_col_major(a.clone());
    let ni = n as i32;
    let mut w = vec![0f64; n];
    let mut rwork = vec![0f64; (3 * n).max(1)];
    let mut info = 0i32;
    let mut wkopt = ZERO;
    let m1 = -1i32;
    unsafe {
        zheev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            cm_slice_mut(&mut m).as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut wkopt,
            &m1,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    let lwork = (wkopt.re as i32).max(2 * ni.max(1));
    let mut work = vec![ZERO; lwork as usize];
    unsafe {
        zheev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            cm_slice_mut(&mut m).as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheev", info });
    }
    Ok((w, m))
}

/// In-place LU factorization with partial pivoting: A = P L U.
///
/// Returns the LAPACK pivot vector (1-based interchanges).
pub fn lu_factor_inplace(a: &mut Array2<C64>) -> Result<Vec<i32>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    debug_assert!(a.strides()[0] == 1);
    let ni = n as i32;
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        zgetrf_(
            &ni,
            &ni,
            cm_slice_mut(a).as_mut_ptr(),
            &ni,
            ipiv.as_mut_ptr(),
            &mut info,
        );
    }
    if info < 0 {
        return Err(Error::Lapack { routine: "zgetrf", info });
    }
    // info > 0 means an exactly singular U; callers decide how to report it.
    Ok(ipiv)
}

/// Reciprocal 1-norm condition estimate for an LU-factored matrix.
pub fn rcond_1norm(factored: &Array2<C64>, anorm: f64) -> Result<f64> {
    let n = factored.nrows();
    let ni = n as i32;
    let mut rcond = 0f64;
    let mut work = vec![ZERO; 2 * n.max(1)];
    let mut rwork = vec![0f64; 2 * n.max(1)];
    let mut info = 0i32;
    unsafe {
        zgecon_(
            b"1".as_ptr(),
            &ni,
            cm_slice(factored).as_ptr(),
            &ni,
            &anorm,
            &mut rcond,
            work.as_mut_ptr(),
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgecon", info });
    }
    Ok(rcond)
}

/// 1-norm (maximum column sum) of a column-major matrix.
pub fn norm_1(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// B := B · U⁻¹ with U the upper triangle of `factored`.
pub fn trsm_right_upper(factored: &Array2<C64>, b: &mut Array2<C64>) {
    let m = b.nrows() as i32;
    let n = b.ncols() as i32;
    let lda = factored.nrows() as i32;
    unsafe {
        ztrsm_(
            b"R".as_ptr(),
            b"U".as_ptr(),
            b"N".as_ptr(),
            b"N".as_ptr(),
            &m,
            &n,
            &ONE,
            cm_slice(factored).as_ptr(),
            &lda,
            cm_slice_mut(b).as_mut_ptr(),
            &m,
        );
    }
}

/// B := B · (L_M ᴴ)⁻¹ with L_M the unit-lower triangle of `factored`.
pub fn trsm_right_lower_conj(factored: &Array2<C64>, b: &mut Array2<C64>) {
    let m = b.nrows() as i32;
    let n = b.ncols() as i32;
    let lda = factored.nrows() as i32;
    unsafe {
        ztrsm_(
            b"R".as_ptr(),
            b"L".as_ptr(),
            b"C".as_ptr(),
            b"U".as_ptr(),
            &m,
            &n,
            &ONE,
            cm_slice(factored).as_ptr(),
            &lda,
            cm_slice_mut(b).as_mut_ptr(),
            &m,
        );
    }
}

/// C = Aᴴ · B.
pub fn matmul_ah_b(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let k = a.nrows();
    let m = a.ncols();
    let n = b.ncols();
    assert_eq!(k, b.nrows());
    let mut c = zeros_cm(m, n);
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    unsafe {
        zgemm_(
            b"C".as_ptr(),
            b"N".as_ptr(),
            &mi,
            &ni,
            &ki,
            &ONE,
            cm_slice(a).as_ptr(),
            &ki,
            cm_slice(b).as_ptr(),
            &ki,
            &ZERO,
            cm_slice_mut(&mut c).as_mut_ptr(),
            &mi,
        );
    }
    c
}

/// C = A · B.
pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let m = a.nrows();
    let k = a.ncols();
    let n = b.ncols();
    assert_eq!(k, b.nrows());
    let mut c = zeros_cm(m, n);
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    unsafe {
        zgemm_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &mi,
            &ni,
            &ki,
            &ONE,
            cm_slice(a).as_ptr(),
            &mi,
            cm_slice(b).as_ptr(),
            &ki,
            &ZERO,
            cm_slice_mut(&mut c).as_mut_ptr(),
            &mi,
        );
    }
    c
}

/// y = A x.
pub fn matvec(a: &Array2<C64>, x: &[C64], y: &mut [C64]) {
    let m = a.nrows() as i32;
    let n = a.ncols() as i32;
    assert_eq!(x.len(), a.ncols());
    assert_eq!(y.len(), a.nrows());
    let inc = 1i32;
    unsafe {
        zgemv_(
            b"N".as_ptr(),
            &m,
            &n,
            &ONE,
            cm_slice(a).as_ptr(),
            &m,
            x.as_ptr(),
            &inc,
            &ZERO,
            y.as_mut_ptr(),
            &inc,
        );
    }
}

/// Solve A X = B in place (B becomes X, A becomes its LU factorization).
pub fn solve_inplace(a: &mut Array2<C64>, b: &mut Array2<C64>) -> Result<()> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.nrows());
    let ni = n as i32;
    let nrhs = b.ncols() as i32;
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        zgesv_(
            &ni,
            &nrhs,
            cm_slice_mut(a).as_mut_ptr(),
            &ni,
            ipiv.as_mut_ptr(),
            cm_slice_mut(b).as_mut_ptr(),
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgesv", info });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> Array2<C64> {
        // small deterministic LCG so these tests need no RNG crate plumbing
        let mut s = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        let mut next = move || {
            s = s.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = zeros_cm(n, n);
        for v in a.iter_mut() {
            *v = c(next(), next());
        }
        a
    }

    #[test]
    fn eig_diagonal() {
        let a = ensure_col_major(array![
            [c(1.0, 2.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-3.0, 0.5)]
        ]);
        let (mut w, _, _) = eig(a, VectorSets::None).unwrap();
        w.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((w[0] - c(-3.0, 0.5)).norm() < 1e-12);
        assert!((w[1] - c(1.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn eig_residuals_both_sets() {
        let n = 12;
        let a = random_matrix(n, 7);
        let (w, vr, vl) = eig(a.clone(), VectorSets::Both).unwrap();
        let vr = vr.unwrap();
        let vl = vl.unwrap();
        for k in 0..n {
            let mut rres = 0.0f64;
            let mut lres = 0.0f64;
            for i in 0..n {
                let mut av: C64 = ZERO;
                let mut ua: C64 = ZERO;
                for j in 0..n {
                    av += a[(i, j)] * vr[(j, k)];
                    ua += vl[(j, k)].conj() * a[(j, i)];
                }
                rres = rres.max((av - w[k] * vr[(i, k)]).norm());
                lres = lres.max((ua - w[k] * vl[(i, k)].conj()).norm());
            }
            assert!(rres < 1e-12, "right residual {rres}");
            assert!(lres < 1e-12, "left residual {lres}");
        }
    }

    #[test]
    fn eigh_orders_ascending() {
        let a = ensure_col_major(array![
            [c(2.0, 0.0), c(0.0, -1.0)],
            [c(0.0, 1.0), c(2.0, 0.0)]
        ]);
        let (w, v) = eigh(&a).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - 3.0).abs() < 1e-12);
        // columns orthonormal
        let g = matmul_ah_b(&v, &v);
        assert!((g[(0, 0)] - ONE).norm() < 1e-12);
        assert!(g[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn matmul_agrees_with_ndarray_dot() {
        let a = random_matrix(9, 1);
        let b = random_matrix(9, 2);
        let c1 = matmul(&a, &b);
        let c2 = a.dot(&b);
        for (x, y) in c1.iter().zip(c2.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
        let d1 = matmul_ah_b(&a, &b);
        let d2 = a.t().mapv(|v| v.conj()).dot(&b);
        for (x, y) in d1.iter().zip(d2.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn solve_roundtrip() {
        let a = random_matrix(8, 3);
        let x_true = random_matrix(8, 4);
        let b = matmul(&a, &x_true);
        let mut a2 = a.clone();
        let mut x = b;
        solve_inplace(&mut a2, &mut x).unwrap();
        for (u, v) in x.iter().zip(x_true.iter()) {
            assert!((u - v).norm() < 1e-9);
        }
    }

    #[test]
    fn trsm_inverts_triangles() {
        // factor a well-conditioned matrix, then check B U⁻¹ U = B
        let mut m = random_matrix(6, 11);
        for i in 0..6 {
            m[(i, i)] += c(4.0, 0.0);
        }
        let mut f = m.clone();
        lu_factor_inplace(&mut f).unwrap();
        let b0 = random_matrix(6, 12);
        let mut b = b0.clone();
        trsm_right_upper(&f, &mut b);
        // rebuild U and multiply back
        let mut u = zeros_cm(6, 6);
        for j in 0..6 {
            for i in 0..=j {
                u[(i, j)] = f[(i, j)];
            }
        }
        let back = matmul(&b, &u);
        for (x, y) in back.iter().zip(b0.iter()) {
            assert!((x - y).norm() < 1e-10);
        }
    }
}
