//! Truncated spin-boson Hilbert space, collective operators, and the
//! anisotropic Dicke Hamiltonian.
//!
//! Basis convention, fixed once for the whole crate: the product space is
//! boson ⊗ spin with boson-major ordering, i.e. the flat index of |n, m⟩ is
//! `n · (N + 1) + (m + J)`. Cached spectra are only comparable under this
//! ordering.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::sparse::{eye, kron};

/// One product basis state |n, m⟩. `twice_m` keeps m exact for half-integer J.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisState {
    pub n: usize,
    pub twice_m: i64,
}

impl BasisState {
    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }
}

/// Enumeration of the product basis with parity labels.
#[derive(Debug, Clone)]
pub struct BasisMap {
    pub n_atoms: usize,
    pub n_max: usize,
    entries: Vec<BasisState>,
}

impl BasisMap {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[BasisState] {
        &self.entries
    }

    pub fn state(&self, index: usize) -> BasisState {
        self.entries[index]
    }

    /// Flat index of |n, m⟩, or None if outside the truncation.
    pub fn index(&self, n: usize, twice_m: i64) -> Option<usize> {
        let spin_dim = self.n_atoms + 1;
        if n > self.n_max {
            return None;
        }
        let k = twice_m + self.n_atoms as i64;
        if k < 0 || k % 2 != 0 || (k / 2) as usize >= spin_dim {
            return None;
        }
        Some(n * spin_dim + (k / 2) as usize)
    }

    /// Parity sign (−1)^(n + m + J) of basis state `index`.
    pub fn parity(&self, index: usize) -> i8 {
        let s = self.entries[index];
        // m + J = (twice_m + N) / 2 is always a nonnegative integer.
        let expo = s.n as i64 + (s.twice_m + self.n_atoms as i64) / 2;
        if expo % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Number of (+1, −1) parity states.
    pub fn parity_counts(&self) -> (usize, usize) {
        let plus = (0..self.dim()).filter(|&i| self.parity(i) == 1).count();
        (plus, self.dim() - plus)
    }
}

/// Enumerate the product basis, boson-major (n outer, m inner).
pub fn build_basis(params: &ModelParams) -> Result<BasisMap> {
    params.validate()?;
    let n_atoms = params.n_atoms;
    let mut entries = Vec::with_capacity(params.hilbert_dim());
    for n in 0..=params.n_max {
        for k in 0..=n_atoms {
            entries.push(BasisState {
                n,
                twice_m: 2 * k as i64 - n_atoms as i64,
            });
        }
    }
    Ok(BasisMap {
        n_atoms,
        n_max: params.n_max,
        entries,
    })
}

/// Collective spin operators (Jz, J+, J−) on the (N+1)-dimensional maximal-J sector.
pub fn spin_operators(n_atoms: usize) -> (Array2<C64>, Array2<C64>, Array2<C64>) {
    assert!(n_atoms >= 1);
    let d = n_atoms + 1;
    let j = n_atoms as f64 / 2.0;
    let m = |k: usize| (2.0 * k as f64 - n_atoms as f64) / 2.0;
    let mut jz = Array2::zeros((d, d));
    let mut jp = Array2::zeros((d, d));
    for k in 0..d {
        jz[(k, k)] = C64::new(m(k), 0.0);
    }
    for k in 0..d - 1 {
        // J+ |J, m⟩ = sqrt(J(J+1) − m(m+1)) |J, m+1⟩
        let mk = m(k);
        jp[(k + 1, k)] = C64::new((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.t().mapv(|v| v.conj());
    (jz, jp, jm)
}

/// Truncated boson operators (a, a†) of dimension n_max + 1.
///
/// a† is the conjugate transpose of the truncated a, so a†|n_max⟩ = 0.
pub fn boson_operators(n_max: usize) -> (Array2<C64>, Array2<C64>) {
    assert!(n_max >= 1);
    let d = n_max + 1;
    let mut a = Array2::zeros((d, d));
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let adag = a.t().mapv(|v: C64| v.conj());
    (a, adag)
}

/// Full-space annihilation operator a ⊗ I_spin.
pub fn full_annihilation(params: &ModelParams) -> Array2<C64> {
    let (a, _) = boson_operators(params.n_max);
    kron(&a, &eye(params.spin_dim()))
}

/// Anisotropic Dicke Hamiltonian on the N_D-dimensional product space.
///
/// H = ω a†a + ω₀ Jz + (g1/√N)(a†J− + aJ+) + (g2/√N)(a†J+ + aJ−).
/// Coupling overrides serve the driven H± construction.
pub fn hamiltonian(
    params: &ModelParams,
    g1_override: Option<f64>,
    g2_override: Option<f64>,
) -> Result<Array2<C64>> {
    params.validate()?;
    let g1 = g1_override.unwrap_or(params.g1);
    let g2 = g2_override.unwrap_or(params.g2);
    let (jz, jp, jm) = spin_operators(params.n_atoms);
    let (a, adag) = boson_operators(params.n_max);
    let i_spin = eye(params.spin_dim());
    let i_boson = eye(params.boson_dim());
    let sqrt_n = (params.n_atoms as f64).sqrt();

    let mut h = kron(&adag.dot(&a), &i_spin) * C64::new(params.omega, 0.0);
    h = h + kron(&i_boson, &jz) * C64::new(params.omega0, 0.0);
    h = h + (kron(&adag, &jm) + kron(&a, &jp)) * C64::new(g1 / sqrt_n, 0.0);
    h = h + (kron(&adag, &jp) + kron(&a, &jm)) * C64::new(g2 / sqrt_n, 0.0);
    Ok(h)
}

/// Hermiticity defect ‖H − H†‖_F / ‖H‖_F.
pub fn hermiticity_defect(h: &Array2<C64>) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((i, j), &v) in h.indexed_iter() {
        num += (v - h[(j, i)].conj()).norm_sqr();
        den += v.norm_sqr();
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Reject Hamiltonians that are not Hermitian to 1e-12 relative Frobenius norm.
pub fn check_hermitian(h: &Array2<C64>) -> Result<()> {
    let defect = hermiticity_defect(h);
    if defect > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "Hamiltonian hermiticity defect {defect:.3e} exceeds 1e-12"
        )));
    }
    Ok(())
}
