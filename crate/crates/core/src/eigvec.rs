//! Biorthogonalization of left/right eigenvector sets via pivoted LU of the
//! overlap matrix, participation ratios, and PR phase maps.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::build_basis;
use crate::lapack::{
    self, matmul_ah_b, norm_1, rcond_1norm, trsm_right_lower_conj, trsm_right_upper, VectorSets,
};
use crate::liouvillian::{build_liouvillian, parity_sectors};
use crate::params::ModelParams;
use crate::spectra::eigendecompose;

/// Maximum tolerated overlap defect ‖L†R − I‖_max after adjustment.
pub const BIORTH_TOL: f64 = 1e-8;

/// Condition-estimate threshold above which the overlap is treated as
/// singular (defective or near-degenerate eigenvalue cluster).
pub const COND_LIMIT: f64 = 1e12;

/// Left/right eigenvector matrices adjusted so that L†R = I.
#[derive(Debug, Clone)]
pub struct BiorthogonalPair {
    pub left: Array2<C64>,
    pub right: Array2<C64>,
    /// ‖L†R − I‖_max after adjustment.
    pub defect: f64,
}

/// Per-eigenstate participation ratios and their sector averages.
#[derive(Debug, Clone)]
pub struct PrReport {
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub biorth: Vec<f64>,
    pub avg_right: f64,
    pub avg_left: f64,
    pub avg_biorth: f64,
    pub sector_dim: usize,
    pub defect: f64,
}

/// Biorthogonalize eigenvector-paired left/right sets.
///
/// With M = L†R factored as P·M_L·M_U (partial pivoting, unit diagonal on
/// M_L), the adjustments are R → R·M_U⁻¹ and L → L·P·(M_L⁻¹)†, applied with
/// triangular solves. Consumes both matrices and adjusts them in place.
pub fn biorthogonalize(
    mut left: Array2<C64>,
    mut right: Array2<C64>,
) -> Result<BiorthogonalPair> {
    assert_eq!(left.dim(), right.dim());
    let n = left.ncols();
    left = lapack::ensure_col_major(left);
    right = lapack::ensure_col_major(right);

    let mut m = matmul_ah_b(&left, &right);
    let anorm = norm_1(&m);
    // uniformly tiny overlap (e.g. a fully defective spectrum) can be
    // well-conditioned in the relative sense; catch it on absolute scale
    if anorm < 1e-12 {
        return Err(Error::SingularOverlap {
            cond: f64::INFINITY,
            pivot: anorm,
            index: 0,
        });
    }
    let ipiv = lapack::lu_factor_inplace(&mut m)?;

    let (pivot, index) = (0..n)
        .map(|i| (m[(i, i)].norm(), i))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    let rcond = if pivot == 0.0 {
        0.0
    } else {
        rcond_1norm(&m, anorm)?
    };
    if rcond == 0.0 || 1.0 / rcond > COND_LIMIT {
        return Err(Error::SingularOverlap {
            cond: if rcond == 0.0 { f64::INFINITY } else { 1.0 / rcond },
            pivot,
            index,
        });
    }

    // R := R · M_U⁻¹
    trsm_right_upper(&m, &mut right);
    // L := L · P, applying the recorded interchanges to columns in order
    for (i, &p) in ipiv.iter().enumerate() {
        let j = (p - 1) as usize;
        if j != i {
            for row in 0..left.nrows() {
                let tmp = left[(row, i)];
                left[(row, i)] = left[(row, j)];
                left[(row, j)] = tmp;
            }
        }
    }
    // L := L · (M_L†)⁻¹
    trsm_right_lower_conj(&m, &mut left);
    drop(m);

    let overlap = matmul_ah_b(&left, &right);
    let mut defect: f64 = 0.0;
    for ((i, j), v) in overlap.indexed_iter() {
        let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        defect = defect.max((v - target).norm());
    }
    if defect > BIORTH_TOL {
        return Err(Error::ResidualTooLarge {
            residual: defect,
            tol: BIORTH_TOL,
        });
    }
    Ok(BiorthogonalPair {
        left,
        right,
        defect,
    })
}

/// Participation ratio of a single state over the computational basis:
/// with ψ_i = |c_i|², P = (Σ ψ_i)² / Σ ψ_i². Scalar-invariant by homogeneity.
pub fn participation_ratio(state: &[C64]) -> Result<f64> {
    let s2: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    if s2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let s4: f64 = state.iter().map(|c| c.norm_sqr().powi(2)).sum();
    Ok(s2 * s2 / s4)
}

/// Biorthogonal participation ratio of a pair with ⟨L|R⟩ = 1:
/// ψ̃_i = conj(l_i)·r_i, P = (Σ |ψ̃_i|)² / Σ |ψ̃_i|².
pub fn participation_ratio_biorthogonal(left: &[C64], right: &[C64]) -> Result<f64> {
    assert_eq!(left.len(), right.len());
    let overlap: C64 = left
        .iter()
        .zip(right.iter())
        .map(|(l, r)| l.conj() * r)
        .sum();
    if (overlap - C64::new(1.0, 0.0)).norm() > BIORTH_TOL {
        return Err(Error::NotBiorthogonal {
            overlap: overlap.norm(),
            tol: BIORTH_TOL,
        });
    }
    let abs: Vec<f64> = left
        .iter()
        .zip(right.iter())
        .map(|(l, r)| (l.conj() * r).norm())
        .collect();
    let s1: f64 = abs.iter().sum();
    let s2: f64 = abs.iter().map(|a| a * a).sum();
    if s2 == 0.0 {
        return Err(Error::DisjointSupport);
    }
    Ok(s1 * s1 / s2)
}

/// Column-wise participation ratios of an eigenvector matrix.
pub fn column_prs(vectors: &Array2<C64>) -> Result<Vec<f64>> {
    let mut buf = vec![C64::new(0.0, 0.0); vectors.nrows()];
    (0..vectors.ncols())
        .map(|k| {
            for (i, v) in vectors.column(k).iter().enumerate() {
                buf[i] = *v;
            }
            participation_ratio(&buf)
        })
        .collect()
}

/// Column-wise biorthogonal participation ratios of an adjusted pair.
pub fn column_prs_biorthogonal(pair: &BiorthogonalPair) -> Result<Vec<f64>> {
    let n = pair.right.ncols();
    let mut lbuf = vec![C64::new(0.0, 0.0); pair.right.nrows()];
    let mut rbuf = vec![C64::new(0.0, 0.0); pair.right.nrows()];
    (0..n)
        .map(|k| {
            for (i, v) in pair.left.column(k).iter().enumerate() {
                lbuf[i] = *v;
            }
            for (i, v) in pair.right.column(k).iter().enumerate() {
                rbuf[i] = *v;
            }
            participation_ratio_biorthogonal(&lbuf, &rbuf)
        })
        .collect()
}

/// Per-eigenstate PRs from the raw (unadjusted) vectors and the biorthogonal
/// PR from the adjusted pair; averages are divided by the sector dimension.
pub fn pr_report(
    raw_left: &Array2<C64>,
    raw_right: &Array2<C64>,
    pair: &BiorthogonalPair,
) -> Result<PrReport> {
    let n = raw_right.ncols();
    let right = column_prs(raw_right)?;
    let left = column_prs(raw_left)?;
    let biorth = column_prs_biorthogonal(pair)?;
    let avg = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    Ok(PrReport {
        avg_right: avg(&right),
        avg_left: avg(&left),
        avg_biorth: avg(&biorth),
        right,
        left,
        biorth,
        sector_dim: n,
        defect: pair.defect,
    })
}

/// Averaged PR values at one (g1, g2) grid point.
#[derive(Debug, Clone, Copy)]
pub struct PhaseValues {
    pub pr_left: f64,
    pub pr_right: f64,
    pub pr_biorth: f64,
    pub sector_dim: usize,
    pub defect: f64,
}

/// One grid point of a PR phase map; failures are recorded, not fatal.
#[derive(Debug, Clone)]
pub struct PhasePoint {
    pub g1: f64,
    pub g2: f64,
    pub values: std::result::Result<PhaseValues, String>,
}

/// Full PR computation for one coupling point on the even parity block.
pub fn pr_at_point(
    params: &ModelParams,
    g1: f64,
    g2: f64,
    budget: Option<usize>,
) -> Result<PhaseValues> {
    let basis = build_basis(params)?;
    let full = build_liouvillian(params, Some(g1), Some(g2))?;
    let (even, _, _) = parity_sectors(&full, &basis)?;
    drop(full);
    let spec = eigendecompose(&even, VectorSets::Both, budget)?;
    drop(even);
    // raw PRs first, so the vector matrices can be consumed by the
    // biorthogonalization without keeping copies alive
    let raw_left = column_prs(spec.left.as_ref().unwrap())?;
    let raw_right = column_prs(spec.right.as_ref().unwrap())?;
    let n = raw_right.len();
    let pair = biorthogonalize(spec.left.unwrap(), spec.right.unwrap())?;
    let biorth = column_prs_biorthogonal(&pair)?;
    let avg = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    Ok(PhaseValues {
        pr_left: avg(&raw_left),
        pr_right: avg(&raw_right),
        pr_biorth: avg(&biorth),
        sector_dim: n,
        defect: pair.defect,
    })
}

/// Sweep a coupling grid; each point is computed independently and failures
/// are carried in the output rather than aborting the sweep.
pub fn pr_phase_map(
    grid: &[(f64, f64)],
    params: &ModelParams,
    budget: Option<usize>,
) -> Vec<PhasePoint> {
    grid.iter()
        .map(|&(g1, g2)| PhasePoint {
            g1,
            g2,
            values: pr_at_point(params, g1, g2, budget).map_err(|e| e.to_string()),
        })
        .collect()
}
