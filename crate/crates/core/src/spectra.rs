//! Non-Hermitian eigendecomposition of Liouvillian sectors, gap extraction,
//! steady states, and gap-versus-size power-law fits.

use std::io::{BufReader, BufWriter, Read as IoRead, Write as IoWrite};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::dynamics::DensityState;
use crate::error::{Error, Result};
use crate::lapack::{self, VectorSets};
use crate::liouvillian::{Sector, SuperOperator};
use crate::params::ModelParams;

/// Default tolerance delimiting the zero cluster around the steady state.
pub const ZERO_TOL: f64 = 1e-9;

/// Complex spectrum of one Liouvillian sector.
///
/// Eigenvalues are sorted by real part descending, ties broken by imaginary
/// part ascending; vector columns follow the same order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    pub right: Option<Array2<C64>>,
    pub left: Option<Array2<C64>>,
    pub params: ModelParams,
    pub sector: Sector,
    /// Doubled-space indices of the sector's basis states, for parity blocks.
    pub embedding: Option<Vec<usize>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Power-law fit ln Δ = slope · ln(size) + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

fn sort_order(w: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&i, &j| {
        w[j].re
            .total_cmp(&w[i].re)
            .then(w[i].im.total_cmp(&w[j].im))
    });
    idx
}

fn permute_columns(a: &Array2<C64>, order: &[usize]) -> Array2<C64> {
    let mut out = lapack::zeros_cm(a.nrows(), a.ncols());
    for (new, &old) in order.iter().enumerate() {
        out.column_mut(new).assign(&a.column(old));
    }
    out
}

/// Dense eigendecomposition of a sector with sorted output and, when vectors
/// are requested, a residual check against the sparse operator.
pub fn eigendecompose(
    l: &SuperOperator,
    want: VectorSets,
    budget: Option<usize>,
) -> Result<Spectrum> {
    let dense = l.matrix.to_dense(budget)?;
    let (w, vr, vl) = lapack::eig(dense, want).map_err(|e| match e {
        Error::Lapack { info, .. } => Error::SolverFailure {
            info,
            sector: l.sector.as_str().into(),
            g1: l.params.g1,
            g2: l.params.g2,
        },
        other => other,
    })?;

    let order = sort_order(&w);
    let eigenvalues: Vec<C64> = order.iter().map(|&i| w[i]).collect();
    let right = vr.map(|m| permute_columns(&m, &order));
    let left = vl.map(|m| permute_columns(&m, &order));

    if let Some(r) = &right {
        verify_residuals(l, &eigenvalues, r)?;
    }

    Ok(Spectrum {
        eigenvalues,
        right,
        left,
        params: l.params,
        sector: l.sector,
        embedding: l.embedding.clone(),
    })
}

/// ‖𝓛 r_k − λ_k r_k‖ ≤ 1e−8 · ‖𝓛‖_F for every eigenpair.
fn verify_residuals(l: &SuperOperator, w: &[C64], r: &Array2<C64>) -> Result<()> {
    let n = l.dim();
    let norm = l.matrix.frobenius_norm().max(1.0);
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut y = vec![C64::new(0.0, 0.0); n];
    for (k, &lam) in w.iter().enumerate() {
        for (i, v) in r.column(k).iter().enumerate() {
            x[i] = *v;
        }
        l.matrix.matvec(&x, &mut y);
        let res: f64 = x
            .iter()
            .zip(y.iter())
            .map(|(xi, yi)| (yi - lam * xi).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if res > 1e-8 * norm {
            return Err(Error::ResidualTooLarge {
                residual: res / norm,
                tol: 1e-8,
            });
        }
    }
    Ok(())
}

/// Liouvillian gap of a merged eigenvalue set.
///
/// The steady-state cluster (|Re λ| ≤ tol) is excluded; the gap is the
/// smallest |Re λ| among the remaining decaying modes. A spectrum without a
/// zero eigenvalue (|λ| ≤ tol) signals truncation or solver failure.
pub fn gap_from_eigenvalues(w: &[C64], tol: f64) -> Result<f64> {
    if !w.iter().any(|v| v.norm() <= tol) {
        return Err(Error::NoZeroMode { tol });
    }
    w.iter()
        .filter(|v| v.re.abs() > tol)
        .map(|v| v.re.abs())
        .min_by(f64::total_cmp)
        .ok_or(Error::NoDecayingMode)
}

/// Gap Δ = min |Re λ| over decaying modes of one sector's spectrum.
pub fn liouvillian_gap(spec: &Spectrum) -> Result<f64> {
    gap_from_eigenvalues(&spec.eigenvalues, ZERO_TOL)
}

/// Gap of the union of several sector spectra (e.g. even + odd).
pub fn merged_gap(specs: &[&Spectrum]) -> Result<f64> {
    let merged: Vec<C64> = specs
        .iter()
        .flat_map(|s| s.eigenvalues.iter().copied())
        .collect();
    gap_from_eigenvalues(&merged, ZERO_TOL)
}

/// Positivity/Hermiticity diagnostics reported alongside a steady state.
#[derive(Debug, Clone, Copy)]
pub struct SteadyStateDiagnostics {
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub eigenvalue_norm: f64,
}

/// Extract the steady state from the zero-eigenvalue right vector.
///
/// For a parity block the vector is embedded back into the full doubled
/// space before reshaping. The matrix is Hermitized and trace-normalized.
pub fn steady_state(spec: &Spectrum) -> Result<(DensityState, SteadyStateDiagnostics)> {
    let right = spec
        .right
        .as_ref()
        .expect("steady_state needs right eigenvectors");
    let (k, lam) = spec
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, v)| (i, *v))
        .ok_or(Error::NoZeroMode { tol: ZERO_TOL })?;
    if lam.norm() > ZERO_TOL {
        return Err(Error::NoZeroMode { tol: ZERO_TOL });
    }

    let nd = spec.params.hilbert_dim();
    let mut full = vec![C64::new(0.0, 0.0); nd * nd];
    match &spec.embedding {
        Some(embed) => {
            for (i, v) in right.column(k).iter().enumerate() {
                full[embed[i]] = *v;
            }
        }
        None => {
            for (i, v) in right.column(k).iter().enumerate() {
                full[i] = *v;
            }
        }
    }

    let raw = DensityState::from_vec(&full, &spec.params);
    let defect = raw.hermiticity_defect();
    let mut state = DensityState::new(crate::dynamics::hermitize(&raw.matrix), &spec.params);
    state.normalize()?;
    let min_eig = state.min_eigenvalue()?;
    Ok((
        state,
        SteadyStateDiagnostics {
            hermiticity_defect: defect,
            min_eigenvalue: min_eig,
            eigenvalue_norm: lam.norm(),
        },
    ))
}

/// Ordinary least squares on (ln size, ln gap).
pub fn fit_gap_scaling(points: &[(f64, f64)]) -> Result<GapScalingFit> {
    if points.len() < 3 {
        return Err(Error::FitUnderdetermined(format!(
            "{} point(s)",
            points.len()
        )));
    }
    for &(size, gap) in points {
        if !(size > 0.0 && gap > 0.0) {
            return Err(Error::FitUnderdetermined(format!(
                "nonpositive sample (size {size}, gap {gap})"
            )));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    if sxx == 0.0 {
        return Err(Error::FitUnderdetermined("all sizes identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(GapScalingFit {
        slope,
        intercept,
        r_squared,
        n_points: points.len(),
    })
}

const CACHE_MAGIC: &[u8; 4] = b"DLSP";
const CACHE_VERSION: u32 = 1;

/// Persist a spectrum: magic "DLSP", version u32, params digest (32 bytes),
/// sector u8, dimension u64, flags u8 (bit 0 = right vectors, bit 1 = left),
/// eigenvalues as interleaved (re, im) f64 pairs, then each stored matrix
/// column-major as interleaved pairs. Little-endian throughout.
pub fn save_spectrum(spec: &Spectrum, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&spec.params.digest())?;
    let tag: u8 = match spec.sector {
        Sector::Full => 0,
        Sector::Even => 1,
        Sector::Odd => 2,
    };
    w.write_all(&[tag])?;
    w.write_all(&(spec.dim() as u64).to_le_bytes())?;
    let flags = spec.right.is_some() as u8 | (spec.left.is_some() as u8) << 1;
    w.write_all(&[flags])?;
    for v in &spec.eigenvalues {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    for m in [&spec.right, &spec.left].into_iter().flatten() {
        for col in m.columns() {
            for v in col {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Load a spectrum saved by `save_spectrum`, verifying the params digest.
pub fn load_spectrum(
    path: &Path,
    params: &ModelParams,
    embedding: Option<Vec<usize>>,
) -> Result<Spectrum> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    let mut u4 = [0u8; 4];
    r.read_exact(&mut u4)?;
    if u32::from_le_bytes(u4) != CACHE_VERSION {
        return Err(Error::CacheFormat("unsupported version".into()));
    }
    let mut digest = [0u8; 32];
    r.read_exact(&mut digest)?;
    if digest != params.digest() {
        return Err(Error::CacheFormat("params digest mismatch".into()));
    }
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1)?;
    let sector = match b1[0] {
        0 => Sector::Full,
        1 => Sector::Even,
        2 => Sector::Odd,
        t => return Err(Error::CacheFormat(format!("unknown sector tag {t}"))),
    };
    let mut u8b = [0u8; 8];
    r.read_exact(&mut u8b)?;
    let n = u64::from_le_bytes(u8b) as usize;
    r.read_exact(&mut b1)?;
    let flags = b1[0];

    let read_c64 = |r: &mut BufReader<std::fs::File>| -> Result<C64> {
        let mut buf = [0u8; 16];
        r.read_exact(&mut buf)?;
        Ok(C64::new(
            f64::from_le_bytes(buf[0..8].try_into().unwrap()),
            f64::from_le_bytes(buf[8..16].try_into().unwrap()),
        ))
    };
    let mut eigenvalues = Vec::with_capacity(n);
    for _ in 0..n {
        eigenvalues.push(read_c64(&mut r)?);
    }
    let read_matrix = |r: &mut BufReader<std::fs::File>| -> Result<Array2<C64>> {
        let mut m = lapack::zeros_cm(n, n);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] = read_c64(r)?;
            }
        }
        Ok(m)
    };
    let right = if flags & 1 != 0 {
        Some(read_matrix(&mut r)?)
    } else {
        None
    };
    let left = if flags & 2 != 0 {
        Some(read_matrix(&mut r)?)
    } else {
        None
    };
    Ok(Spectrum {
        eigenvalues,
        right,
        left,
        params: *params,
        sector,
        embedding,
    })
}
