//! Dense matrix exponential by scaling-and-squaring with a Padé(13,13)
//! approximant (Higham 2005), used to build drive-period propagators.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lapack::{self, ensure_col_major, matmul, norm_1, solve_inplace};
use crate::sparse::DEFAULT_DENSE_BUDGET;

/// Padé(13,13) coefficients b_0..b_13 (Higham 2005, eq. 10.33).
const PADE_COEFFS: [f64; 14] = [
    1.0,
    0.5,
    0.12,
    1.833_333_333_333_333_4e-2,
    1.992_753_623_188_405_8e-3,
    1.630_434_782_608_696e-4,
    1.035_196_687_370_600_6e-5,
    5.175_983_436_853_003e-7,
    2.043_151_356_652_501e-8,
    6.306_022_705_717_595e-10,
    1.483_770_048_404_140_2e-11,
    2.529_153_491_597_966e-13,
    2.810_170_546_219_962_4e-15,
    1.544_049_750_670_308_9e-17,
];

/// θ_13 scaling threshold (Higham 2005, Table 10.2).
const THETA_13: f64 = 5.371_920_351_148_152;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// exp(A) for a square complex matrix.
///
/// The working set is roughly nine n×n buffers; the call refuses inputs whose
/// working set exceeds the budget (default 2 GiB).
pub fn expm(a: &Array2<C64>, budget: Option<usize>) -> Result<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    let budget = budget.unwrap_or(DEFAULT_DENSE_BUDGET);
    let required = 9 * n * n * std::mem::size_of::<C64>();
    if required > budget {
        return Err(Error::MemoryBudget { required, budget });
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    if n == 1 {
        let mut r = lapack::zeros_cm(1, 1);
        r[(0, 0)] = a[(0, 0)].exp();
        return Ok(r);
    }

    let norm = norm_1(&ensure_col_major(a.clone()));
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = ensure_col_major(a * c(1.0 / (1u64 << s) as f64));

    let eye = crate::sparse::eye(n);
    let a2 = matmul(&scaled, &scaled);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a2, &a4);

    let w1 = &a6 * c(PADE_COEFFS[13]) + &a4 * c(PADE_COEFFS[11]) + &a2 * c(PADE_COEFFS[9]);
    let w2 = matmul(&ensure_col_major(w1), &a6)
        + &a6 * c(PADE_COEFFS[7])
        + &a4 * c(PADE_COEFFS[5])
        + &a2 * c(PADE_COEFFS[3])
        + &eye * c(PADE_COEFFS[1]);
    let u = matmul(&scaled, &ensure_col_major(w2));

    let v1 = &a6 * c(PADE_COEFFS[12]) + &a4 * c(PADE_COEFFS[10]) + &a2 * c(PADE_COEFFS[8]);
    let v = matmul(&ensure_col_major(v1), &a6)
        + &a6 * c(PADE_COEFFS[6])
        + &a4 * c(PADE_COEFFS[4])
        + &a2 * c(PADE_COEFFS[2])
        + &eye * c(PADE_COEFFS[0]);

    // exp ≈ (V − U)⁻¹ (V + U)
    let mut q = ensure_col_major(&v - &u);
    let mut p = ensure_col_major(&v + &u);
    solve_inplace(&mut q, &mut p)?;

    let mut r = p;
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lapack::{eigh, matmul_ah_b, zeros_cm};
    use crate::sparse::eye;

    fn cc(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> Array2<C64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = zeros_cm(n, n);
        for v in a.iter_mut() {
            *v = cc(next(), next());
        }
        a
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = zeros_cm(4, 4);
        let e = expm(&z, None).unwrap();
        for ((i, j), v) in e.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - cc(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn exp_of_diagonal() {
        let mut d = zeros_cm(3, 3);
        d[(0, 0)] = cc(-1.0, 0.0);
        d[(1, 1)] = cc(0.5, 2.0);
        d[(2, 2)] = cc(0.0, -3.0);
        let e = expm(&d, None).unwrap();
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-13);
        }
        assert!(e[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn exp_of_nilpotent() {
        let mut a = zeros_cm(2, 2);
        a[(0, 1)] = cc(3.0, -1.0);
        let e = expm(&a, None).unwrap();
        assert!((e[(0, 0)] - cc(1.0, 0.0)).norm() < 1e-15);
        assert!((e[(0, 1)] - cc(3.0, -1.0)).norm() < 1e-15);
        assert!(e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn exp_inverse_is_exp_of_negation() {
        let a = random_matrix(8, 19) * cc(2.0, 0.0);
        let e = expm(&a, None).unwrap();
        let einv = expm(&ensure_col_major(a.mapv(|v| -v)), None).unwrap();
        let prod = matmul(&e, &einv);
        for ((i, j), v) in prod.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - cc(want, 0.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn unitary_exponential_of_hermitian_generator() {
        // exp(−iH) from expm must match the spectral construction from zheev
        let r = random_matrix(6, 4);
        let h = ensure_col_major(&r + &r.t().mapv(|v| v.conj()));
        let (w, vecs) = eigh(&h).unwrap();
        let mut phase = zeros_cm(6, 6);
        for (i, &wi) in w.iter().enumerate() {
            phase[(i, i)] = cc(0.0, -wi).exp();
        }
        let want = matmul(&matmul(&vecs, &phase), &ensure_col_major(vecs.t().mapv(|v| v.conj())));
        let mih = ensure_col_major(h.mapv(|v| v * cc(0.0, -1.0)));
        let got = expm(&mih, None).unwrap();
        for (x, y) in got.iter().zip(want.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
        // unitarity
        let g = matmul_ah_b(&got, &got);
        for ((i, j), v) in g.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - cc(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn scaling_consistency() {
        let a = random_matrix(7, 77) * cc(4.0, 0.0);
        let whole = expm(&a, None).unwrap();
        let half = expm(&ensure_col_major(a.mapv(|v| v * cc(0.5, 0.0))), None).unwrap();
        let squared = matmul(&half, &half);
        for (x, y) in whole.iter().zip(squared.iter()) {
            assert!((x - y).norm() < 1e-11);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let a = ensure_col_major(eye(64));
        match expm(&a, Some(1024)) {
            Err(Error::MemoryBudget { .. }) => {}
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }
}
