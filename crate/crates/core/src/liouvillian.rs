//! Vectorized Lindblad superoperator, parity-sector reduction, and the
//! critical coupling line.
//!
//! Vectorization convention, fixed crate-wide: ρ is flattened row by row, so
//! the doubled-space index of |n_l, m_l⟩⟨n_r, m_r| is `l · N_D + r` and
//! A ρ B ↦ (A ⊗ Bᵀ) vec(ρ). Under this convention the superoperator is
//! literally
//!
//!   𝓛 = −i (H⊗I − I⊗Hᵀ) + κ (2 a⊗a* − a†a⊗I − I⊗a†a).

use std::io::{BufReader, BufWriter, Read as IoRead, Write as IoWrite};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{boson_operators, hamiltonian, BasisMap};
use crate::params::ModelParams;
use crate::sparse::{eye, kron, CooMatrix};

/// Which block of the doubled space a superoperator lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Full,
    Even,
    Odd,
}

impl Sector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sector::Full => "full",
            Sector::Even => "even",
            Sector::Odd => "odd",
        }
    }

    fn tag(&self) -> u8 {
        match self {
            Sector::Full => 0,
            Sector::Even => 1,
            Sector::Odd => 2,
        }
    }

    fn from_tag(t: u8) -> Option<Self> {
        match t {
            0 => Some(Sector::Full),
            1 => Some(Sector::Even),
            2 => Some(Sector::Odd),
            _ => None,
        }
    }
}

/// Sparse Liouvillian (or one of its parity blocks) with provenance.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    pub matrix: CooMatrix,
    pub sector: Sector,
    pub params: ModelParams,
    /// For a parity block, the doubled-space indices of its rows/columns in
    /// sector order; `None` for the full operator.
    pub embedding: Option<Vec<usize>>,
}

impl SuperOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    /// ‖vec(I)ᵀ · 𝓛‖₂ — zero for any trace-preserving generator.
    pub fn trace_preservation_defect(&self) -> f64 {
        let nd = (self.dim() as f64).sqrt().round() as usize;
        assert_eq!(nd * nd, self.dim(), "defined on the full doubled space");
        let mut row = vec![C64::new(0.0, 0.0); self.dim()];
        for &(r, c, v) in &self.matrix.entries {
            let r = r as usize;
            // vec(I) has support on the diagonal-pair indices l·N_D + l
            if r % nd == r / nd {
                row[c as usize] += v;
            }
        }
        row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Assemble the full vectorized Lindblad generator.
///
/// Coupling overrides let the driven-dynamics code build the shifted
/// Hamiltonians H± without cloning params.
pub fn build_liouvillian(
    params: &ModelParams,
    g1_override: Option<f64>,
    g2_override: Option<f64>,
) -> Result<SuperOperator> {
    params.validate()?;
    let h = hamiltonian(params, g1_override, g2_override)?;
    let nd = params.hilbert_dim();
    let (a_b, adag_b) = boson_operators(params.n_max);
    let a = kron(&a_b, &eye(params.spin_dim()));
    let n_op = kron(&adag_b.dot(&a_b), &eye(params.spin_dim()));
    let id = eye(nd);
    let ht = h.t().to_owned();
    let kappa = C64::new(params.kappa, 0.0);
    let mi = C64::new(0.0, -1.0);

    let mut entries = Vec::new();
    CooMatrix::push_scaled_kron(&mut entries, mi, &h, &id);
    CooMatrix::push_scaled_kron(&mut entries, -mi, &id, &ht);
    // a is real, so a* = a and (a†a)ᵀ = a†a
    CooMatrix::push_scaled_kron(&mut entries, 2.0 * kappa, &a, &a);
    CooMatrix::push_scaled_kron(&mut entries, -kappa, &n_op, &id);
    CooMatrix::push_scaled_kron(&mut entries, -kappa, &id, &n_op);

    Ok(SuperOperator {
        matrix: CooMatrix::from_entries(nd * nd, entries),
        sector: Sector::Full,
        params: *params,
        embedding: None,
    })
}

/// Super-parity of a doubled-space index: parity(l) · parity(r).
pub fn super_parity(basis: &BasisMap, flat: usize) -> i8 {
    let nd = basis.dim();
    basis.parity(flat / nd) * basis.parity(flat % nd)
}

/// Split the full Liouvillian into its even and odd super-parity blocks.
///
/// Returns (even, odd, permutation), where the permutation lists the
/// doubled-space indices in (even first, then odd) sector order. Any
/// cross-sector entry above 1e-12 is a basis-convention bug and is fatal.
pub fn parity_sectors(
    l: &SuperOperator,
    basis: &BasisMap,
) -> Result<(SuperOperator, SuperOperator, Vec<usize>)> {
    assert_eq!(l.sector, Sector::Full, "parity_sectors needs the full operator");
    let nl = l.dim();
    assert_eq!(nl, basis.dim() * basis.dim());

    let mut even_idx = Vec::new();
    let mut odd_idx = Vec::new();
    for i in 0..nl {
        if super_parity(basis, i) == 1 {
            even_idx.push(i);
        } else {
            odd_idx.push(i);
        }
    }
    // position of each doubled index inside its block
    let mut pos = vec![0usize; nl];
    for (p, &i) in even_idx.iter().enumerate() {
        pos[i] = p;
    }
    for (p, &i) in odd_idx.iter().enumerate() {
        pos[i] = p;
    }

    let mut even_entries = Vec::new();
    let mut odd_entries = Vec::new();
    for &(r, c, v) in &l.matrix.entries {
        let (r, c) = (r as usize, c as usize);
        let pr = super_parity(basis, r);
        if pr != super_parity(basis, c) {
            if v.norm() > 1e-12 {
                return Err(Error::ParityBlockLeak {
                    row: r,
                    col: c,
                    value: v.norm(),
                });
            }
            continue;
        }
        let e = (pos[r] as u32, pos[c] as u32, v);
        if pr == 1 {
            even_entries.push(e);
        } else {
            odd_entries.push(e);
        }
    }

    let even = SuperOperator {
        matrix: CooMatrix::from_entries(even_idx.len(), even_entries),
        sector: Sector::Even,
        params: l.params,
        embedding: Some(even_idx.clone()),
    };
    let odd = SuperOperator {
        matrix: CooMatrix::from_entries(odd_idx.len(), odd_entries),
        sector: Sector::Odd,
        params: l.params,
        embedding: Some(odd_idx.clone()),
    };
    let mut perm = even_idx;
    perm.extend_from_slice(&odd_idx);
    Ok((even, odd, perm))
}

/// Left side of the critical-line relation
/// (g1² − g2²)² − 2(g1² + g2²) ω ω₀ + (ω² + κ²) ω₀².
pub fn critical_residual(g1: f64, g2: f64, omega: f64, omega0: f64, kappa: f64) -> f64 {
    let (x, y) = (g1 * g1, g2 * g2);
    (x - y).powi(2) - 2.0 * (x + y) * omega * omega0
        + (omega * omega + kappa * kappa) * omega0 * omega0
}

/// Critical coupling on the isotropic line g1 = g2:
/// g* = ½ √(ω ω₀) √(1 + κ²/ω²).
pub fn critical_isotropic(omega: f64, omega0: f64, kappa: f64) -> Result<f64> {
    if omega <= 0.0 || omega0 <= 0.0 {
        return Err(Error::InvalidParams(
            "critical coupling needs omega, omega0 > 0".into(),
        ));
    }
    Ok(0.5 * (omega * omega0).sqrt() * (1.0 + kappa * kappa / (omega * omega)).sqrt())
}

/// All real nonnegative g2 roots of the critical-line relation at fixed g1.
///
/// The relation is quadratic in g2²; an empty vector means the critical line
/// has no real solution at this g1.
pub fn critical_g2_given_g1(g1: f64, omega: f64, omega0: f64, kappa: f64) -> Result<Vec<f64>> {
    if omega <= 0.0 || omega0 <= 0.0 {
        return Err(Error::InvalidParams(
            "critical coupling needs omega, omega0 > 0".into(),
        ));
    }
    let x = g1 * g1;
    // y² − 2(x + ωω₀) y + (x² − 2ωω₀x + (ω² + κ²)ω₀²) = 0 with y = g2²
    let b = x + omega * omega0;
    let c = x * x - 2.0 * omega * omega0 * x + (omega * omega + kappa * kappa) * omega0 * omega0;
    let disc = b * b - c;
    if disc < 0.0 {
        return Ok(Vec::new());
    }
    let s = disc.sqrt();
    let mut roots = Vec::new();
    for y in [b - s, b + s] {
        if y >= 0.0 {
            roots.push(y.sqrt());
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    Ok(roots)
}

const CACHE_MAGIC: &[u8; 4] = b"DLSO";
const CACHE_VERSION: u32 = 1;

/// Write the superoperator to a little-endian sparse-triplet cache file.
///
/// Layout: magic "DLSO", version u32, sector u8, dim u64, params digest
/// (32 bytes), nnz u64, then nnz records of (row u32, col u32, re f64, im f64).
pub fn save_cache(l: &SuperOperator, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&[l.sector.tag()])?;
    w.write_all(&(l.dim() as u64).to_le_bytes())?;
    w.write_all(&l.params.digest())?;
    w.write_all(&(l.matrix.nnz() as u64).to_le_bytes())?;
    for &(r, c, v) in &l.matrix.entries {
        w.write_all(&r.to_le_bytes())?;
        w.write_all(&c.to_le_bytes())?;
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Load a cached superoperator, verifying magic, version, and params digest.
///
/// The embedding of parity blocks is reconstructed by the caller; a cache hit
/// must match the digest of the params it is asked to serve.
pub fn load_cache(path: &Path, params: &ModelParams) -> Result<SuperOperator> {
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
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let sector = Sector::from_tag(tag[0])
        .ok_or_else(|| Error::CacheFormat(format!("unknown sector tag {}", tag[0])))?;
    let mut u8b = [0u8; 8];
    r.read_exact(&mut u8b)?;
    let dim = u64::from_le_bytes(u8b) as usize;
    let mut digest = [0u8; 32];
    r.read_exact(&mut digest)?;
    if digest != params.digest() {
        return Err(Error::CacheFormat("params digest mismatch".into()));
    }
    r.read_exact(&mut u8b)?;
    let nnz = u64::from_le_bytes(u8b) as usize;
    let mut entries = Vec::with_capacity(nnz);
    let mut rec = [0u8; 24];
    for _ in 0..nnz {
        r.read_exact(&mut rec)?;
        let row = u32::from_le_bytes(rec[0..4].try_into().unwrap());
        let col = u32::from_le_bytes(rec[4..8].try_into().unwrap());
        let re = f64::from_le_bytes(rec[8..16].try_into().unwrap());
        let im = f64::from_le_bytes(rec[16..24].try_into().unwrap());
        if (row as usize) >= dim || (col as usize) >= dim {
            return Err(Error::CacheFormat("index out of range".into()));
        }
        entries.push((row, col, C64::new(re, im)));
    }
    Ok(SuperOperator {
        matrix: CooMatrix::from_entries(dim, entries),
        sector,
        params: *params,
        embedding: None,
    })
}

/// Dense column-major form of a sector's matrix (budget-guarded).
pub fn to_dense(l: &SuperOperator, budget: Option<usize>) -> Result<Array2<C64>> {
    l.matrix.to_dense(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::build_basis;
    use crate::lapack;

    fn params(n_atoms: usize, n_max: usize, g1: f64, g2: f64, kappa: f64) -> ModelParams {
        ModelParams {
            g1,
            g2,
            kappa,
            ..ModelParams::bare(n_atoms, n_max)
        }
    }

    /// Greedy set comparison robust to ordering of near-degenerate values.
    fn assert_sets_close(a: &[C64], b: &[C64], tol: f64) {
        assert_eq!(a.len(), b.len());
        let mut used = vec![false; b.len()];
        for &x in a {
            let mut best = (f64::INFINITY, 0usize);
            for (j, &y) in b.iter().enumerate() {
                if !used[j] {
                    let d = (x - y).norm();
                    if d < best.0 {
                        best = (d, j);
                    }
                }
            }
            assert!(best.0 < tol, "unmatched eigenvalue {x} (closest {:.3e})", best.0);
            used[best.1] = true;
        }
    }

    #[test]
    fn kappa_zero_spectrum_is_bohr_frequencies() {
        let p = params(1, 2, 0.6, 0.3, 0.0);
        let l = build_liouvillian(&p, None, None).unwrap();
        let got = lapack::eigvals(to_dense(&l, None).unwrap()).unwrap();
        let h = hamiltonian(&p, None, None).unwrap();
        let (e, _) = lapack::eigh(&lapack::ensure_col_major(h)).unwrap();
        let mut want = Vec::new();
        for &ej in &e {
            for &ek in &e {
                want.push(C64::new(0.0, -(ej - ek)));
            }
        }
        assert_sets_close(&got, &want, 1e-8);
    }

    #[test]
    fn decoupled_damped_mode_spectrum() {
        let mut p = params(1, 3, 0.0, 0.0, 0.7);
        p.omega = 1.3;
        p.omega0 = 0.9;
        let l = build_liouvillian(&p, None, None).unwrap();
        let got = lapack::eigvals(to_dense(&l, None).unwrap()).unwrap();
        let basis = build_basis(&p).unwrap();
        let mut want = Vec::new();
        for li in 0..basis.dim() {
            for ri in 0..basis.dim() {
                let sl = basis.state(li);
                let sr = basis.state(ri);
                let re = -p.kappa * (sl.n + sr.n) as f64;
                let im = -(p.omega * (sl.n as f64 - sr.n as f64)
                    + p.omega0 * (sl.m() - sr.m()));
                want.push(C64::new(re, im));
            }
        }
        assert_sets_close(&got, &want, 1e-8);
    }

    #[test]
    fn trace_preservation_row_identity() {
        let p = params(2, 3, 1.1, 0.4, 0.8);
        let l = build_liouvillian(&p, None, None).unwrap();
        let defect = l.trace_preservation_defect();
        assert!(
            defect <= 1e-10 * l.matrix.frobenius_norm(),
            "trace defect {defect:.3e}"
        );
    }

    #[test]
    fn conjugate_pair_symmetry() {
        let p = params(2, 3, 1.25, 0.7, 1.0);
        let l = build_liouvillian(&p, None, None).unwrap();
        let w = lapack::eigvals(to_dense(&l, None).unwrap()).unwrap();
        let conj: Vec<C64> = w.iter().map(|v| v.conj()).collect();
        assert_sets_close(&w, &conj, 1e-9);
    }

    #[test]
    fn parity_blocks_split_and_locate_zero_mode() {
        let p = params(2, 4, 1.25, 0.7, 1.0);
        let basis = build_basis(&p).unwrap();
        let l = build_liouvillian(&p, None, None).unwrap();
        let (even, odd, perm) = parity_sectors(&l, &basis).unwrap();
        assert_eq!(even.dim(), 113);
        assert_eq!(odd.dim(), 112);
        assert_eq!(perm.len(), 225);
        let we = lapack::eigvals(to_dense(&even, None).unwrap()).unwrap();
        let wo = lapack::eigvals(to_dense(&odd, None).unwrap()).unwrap();
        let min_e = we.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        let min_o = wo.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        assert!(min_e <= 1e-10, "even sector zero mode missing ({min_e:.3e})");
        assert!(min_o > 1e-3, "odd sector should have no zero mode ({min_o:.3e})");
    }

    #[test]
    fn decoupled_nondissipative_blocks_are_diagonal() {
        let p = params(1, 2, 0.0, 0.0, 0.0);
        let basis = build_basis(&p).unwrap();
        let l = build_liouvillian(&p, None, None).unwrap();
        let (even, odd, _) = parity_sectors(&l, &basis).unwrap();
        for block in [&even, &odd] {
            for &(r, c, _) in &block.matrix.entries {
                assert_eq!(r, c, "{} block has off-diagonal entry", block.sector.as_str());
            }
        }
    }

    #[test]
    fn critical_isotropic_values() {
        let g = critical_isotropic(1.0, 1.0, 1.0).unwrap();
        assert!((g - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        let g0 = critical_isotropic(1.7, 0.8, 0.0).unwrap();
        assert!((g0 - 0.5 * (1.7f64 * 0.8).sqrt()).abs() < 1e-12);
        assert!((critical_residual(g, g, 1.0, 1.0, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn critical_g2_roots_satisfy_the_relation() {
        let roots = critical_g2_given_g1(1.25, 1.0, 1.0, 1.0).unwrap();
        assert!(!roots.is_empty());
        for g2 in roots {
            assert!(critical_residual(1.25, g2, 1.0, 1.0, 1.0).abs() < 1e-10);
        }
        // far outside the critical region there may be no real solution
        let none = critical_g2_given_g1(0.0, 1.0, 1.0, 10.0).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn cache_roundtrip_and_digest_check() {
        let p = params(1, 2, 0.5, 0.2, 0.3);
        let l = build_liouvillian(&p, None, None).unwrap();
        let dir = std::env::temp_dir().join("dl-liouv-cache-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("l.bin");
        save_cache(&l, &path).unwrap();
        let back = load_cache(&path, &p).unwrap();
        assert_eq!(back.matrix, l.matrix);
        assert_eq!(back.sector, Sector::Full);
        let mut q = p;
        q.g1 = 0.6;
        match load_cache(&path, &q) {
            Err(Error::CacheFormat(msg)) => assert!(msg.contains("digest")),
            other => panic!("expected digest mismatch, got {other:?}"),
        }
    }
}
