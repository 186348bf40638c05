use crate::error::{Error, Result};

/// Physical and truncation parameters of the dissipative anisotropic Dicke model.
///
/// Energies are in units with ħ = 1. `drive_amp` and `drive_t` are only read by
/// the driven-dynamics code; the undriven Liouvillian ignores them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Boson mode frequency ω.
    pub omega: f64,
    /// Atomic level splitting ω₀.
    pub omega0: f64,
    /// Rotating coupling g₁.
    pub g1: f64,
    /// Counter-rotating coupling g₂.
    pub g2: f64,
    /// Cavity decay rate κ.
    pub kappa: f64,
    /// Atom number N.
    pub n_atoms: usize,
    /// Boson cutoff: maximum occupation n_max.
    pub n_max: usize,
    /// Drive amplitude Ω.
    pub drive_amp: f64,
    /// Base drive half-period T.
    pub drive_t: f64,
}

impl ModelParams {
    /// Parameters with couplings and dissipation off, at the given truncation.
    pub fn bare(n_atoms: usize, n_max: usize) -> Self {
        Self {
            omega: 1.0,
            omega0: 1.0,
            g1: 0.0,
            g2: 0.0,
            kappa: 0.0,
            n_atoms,
            n_max,
            drive_amp: 0.0,
            drive_t: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega >= 0.0 && self.omega0 >= 0.0 && self.kappa >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "omega, omega0, kappa must be nonnegative (got {}, {}, {})",
                self.omega, self.omega0, self.kappa
            )));
        }
        if self.n_atoms == 0 {
            return Err(Error::InvalidParams("n_atoms must be at least 1".into()));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidParams("n_max must be at least 1".into()));
        }
        if self.drive_t <= 0.0 {
            return Err(Error::InvalidParams("drive_t must be positive".into()));
        }
        for (name, v) in [
            ("omega", self.omega),
            ("omega0", self.omega0),
            ("g1", self.g1),
            ("g2", self.g2),
            ("kappa", self.kappa),
            ("drive_amp", self.drive_amp),
            ("drive_t", self.drive_t),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// Collective spin J = N/2.
    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    /// Spin-sector dimension N + 1.
    pub fn spin_dim(&self) -> usize {
        self.n_atoms + 1
    }

    /// Boson-sector dimension n_max + 1.
    pub fn boson_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Product Hilbert space dimension N_D = (N + 1)(n_max + 1).
    pub fn hilbert_dim(&self) -> usize {
        self.spin_dim() * self.boson_dim()
    }

    /// Doubled (vectorized) space dimension N_L = N_D².
    pub fn liouville_dim(&self) -> usize {
        self.hilbert_dim() * self.hilbert_dim()
    }

    /// Stable digest of all fields, used to key cached spectra and superoperators.
    pub fn digest(&self) -> [u8; 32] {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        let s = format!(
            "omega={:e};omega0={:e};g1={:e};g2={:e};kappa={:e};n_atoms={};n_max={};drive_amp={:e};drive_t={:e}",
            self.omega, self.omega0, self.g1, self.g2, self.kappa,
            self.n_atoms, self.n_max, self.drive_amp, self.drive_t
        );
        h.update(s.as_bytes());
        h.finalize().into()
    }
}
