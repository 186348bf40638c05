//! Density-matrix states, their observables, and quasiperiodically driven
//! Lindblad evolution.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::hilbert::{build_basis, spin_operators};
use crate::lapack;
use crate::liouvillian::{build_liouvillian, Sector, SuperOperator};
use crate::params::ModelParams;
use crate::sparse::{eye, CooMatrix};

/// Density matrix on the N_D-dimensional product space, with the truncation
/// it was built for.
#[derive(Debug, Clone)]
pub struct DensityState {
    pub matrix: Array2<C64>,
    pub n_atoms: usize,
    pub n_max: usize,
    /// Time stamp in units of ω₀⁻¹; zero for freshly constructed states.
    pub time: f64,
}

impl DensityState {
    pub fn new(matrix: Array2<C64>, params: &ModelParams) -> Self {
        assert_eq!(matrix.nrows(), params.hilbert_dim());
        assert_eq!(matrix.ncols(), params.hilbert_dim());
        Self {
            matrix,
            n_atoms: params.n_atoms,
            n_max: params.n_max,
            time: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn spin_dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    /// Re tr ρ².
    pub fn purity(&self) -> f64 {
        let mut p = C64::new(0.0, 0.0);
        for ((i, j), &v) in self.matrix.indexed_iter() {
            p += v * self.matrix[(j, i)];
        }
        p.re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::hilbert::hermiticity_defect(&self.matrix)
    }

    /// Divide by the trace; error if it is too small to normalize.
    pub fn normalize(&mut self) -> Result<()> {
        let t = self.trace();
        if t.norm() < 1e-12 {
            return Err(Error::UnnormalizableSteadyState { trace: t.norm() });
        }
        let inv = C64::new(1.0, 0.0) / t;
        self.matrix.mapv_inplace(|v| v * inv);
        Ok(())
    }

    /// Smallest eigenvalue of the Hermitized matrix (diagnostic for positivity).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = hermitize(&self.matrix);
        let (w, _) = lapack::eigh(&lapack::ensure_col_major(herm))?;
        Ok(w.first().copied().unwrap_or(0.0))
    }

    /// Row-major flattening, matching the crate's vectorization convention.
    pub fn vectorize(&self) -> Vec<C64> {
        let nd = self.dim();
        let mut v = Vec::with_capacity(nd * nd);
        for l in 0..nd {
            for r in 0..nd {
                v.push(self.matrix[(l, r)]);
            }
        }
        v
    }

    /// Inverse of `vectorize`.
    pub fn from_vec(vec: &[C64], params: &ModelParams) -> Self {
        let nd = params.hilbert_dim();
        assert_eq!(vec.len(), nd * nd);
        let mut m = Array2::zeros((nd, nd));
        for l in 0..nd {
            for r in 0..nd {
                m[(l, r)] = vec[l * nd + r];
            }
        }
        Self::new(m, params)
    }

    /// Reduced boson density matrix: trace out the spin.
    pub fn reduce_boson(&self) -> Array2<C64> {
        let sd = self.spin_dim();
        let bd = self.n_max + 1;
        let mut out = Array2::zeros((bd, bd));
        for n in 0..bd {
            for np in 0..bd {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..sd {
                    s += self.matrix[(n * sd + k, np * sd + k)];
                }
                out[(n, np)] = s;
            }
        }
        out
    }

    /// Reduced spin density matrix: trace out the boson.
    pub fn reduce_spin(&self) -> Array2<C64> {
        let sd = self.spin_dim();
        let bd = self.n_max + 1;
        let mut out = Array2::zeros((sd, sd));
        for k in 0..sd {
            for kp in 0..sd {
                let mut s = C64::new(0.0, 0.0);
                for n in 0..bd {
                    s += self.matrix[(n * sd + k, n * sd + kp)];
                }
                out[(k, kp)] = s;
            }
        }
        out
    }

    /// ⟨a†a⟩ = Σ_n n ⟨n|ρ_b|n⟩.
    pub fn avg_boson_number(&self) -> f64 {
        let rb = self.reduce_boson();
        let t: C64 = (0..=self.n_max)
            .map(|n| rb[(n, n)] * C64::new(n as f64, 0.0))
            .sum();
        assert!(
            t.im.abs() <= 1e-9,
            "avg boson number has imaginary residue {}",
            t.im
        );
        t.re
    }
}

/// (ρ + ρ†)/2.
pub fn hermitize(m: &Array2<C64>) -> Array2<C64> {
    let mut out = m.clone();
    for ((i, j), v) in out.indexed_iter_mut() {
        *v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
    }
    out
}

/// Von Neumann entropy −tr ρ ln ρ of a Hermitian (or near-Hermitian) matrix.
///
/// Eigenvalues below 1e-12 are treated as exact zeros (0·ln 0 = 0); small
/// negative values from truncation noise are clamped rather than poisoning
/// the logarithm, but anything below −1e−6 is rejected as an invalid state.
pub fn von_neumann_entropy(rho: &Array2<C64>) -> Result<f64> {
    let (w, _) = lapack::eigh(&lapack::ensure_col_major(hermitize(rho)))?;
    let mut s = 0.0;
    for p in w {
        if p < -1e-6 {
            return Err(Error::InvalidState { eigenvalue: p });
        }
        if p > 1e-12 {
            s -= p * p.ln();
        }
    }
    Ok(s)
}

/// Mutual information I = S(ρ_b) + S(ρ_s) − S(ρ) between boson and spin.
pub fn mutual_information(state: &DensityState) -> Result<f64> {
    let sb = von_neumann_entropy(&state.reduce_boson())?;
    let ss = von_neumann_entropy(&state.reduce_spin())?;
    let stot = von_neumann_entropy(&state.matrix)?;
    Ok(sb + ss - stot)
}

/// Tolerated trace drift during driven evolution before aborting.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

/// Which of the two shifted generators acts over one drive interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveSymbol {
    Plus,
    Minus,
}

/// Base drive interval from the drive frequency: T = 2π/ω_d.
///
/// The frequency-to-interval convention lives only here so it can be changed
/// in one place.
pub fn base_period(omega_d: f64) -> f64 {
    assert!(omega_d > 0.0, "drive frequency must be positive");
    2.0 * std::f64::consts::PI / omega_d
}

/// Thue-Morse drive protocol at a fixed sequence level.
#[derive(Debug, Clone)]
pub struct DriveSchedule {
    pub level: u32,
    /// Symbol word of length 2^level in time order (first entry acts first).
    pub word: Vec<DriveSymbol>,
    /// Base interval T between switches; t_k = kT.
    pub base_t: f64,
}

impl DriveSchedule {
    pub fn new(level: u32, base_t: f64) -> Self {
        assert!(base_t > 0.0, "base interval must be positive");
        Self {
            level,
            word: thue_morse_word(level),
            base_t,
        }
    }

    /// Time after k completed intervals.
    pub fn time_at(&self, steps: usize) -> f64 {
        steps as f64 * self.base_t
    }
}

/// Time-ordered Thue-Morse word of length 2^level.
///
/// Level 0 is (+) with companion (−); each level appends the companion of
/// the previous word in time order, so level 1 is (+, −) and level 2 is
/// (+, −, −, +). The result coincides with the popcount-parity sequence.
pub fn thue_morse_word(level: u32) -> Vec<DriveSymbol> {
    thue_morse_pair(level).0
}

/// The level-n word together with its companion word.
pub fn thue_morse_pair(level: u32) -> (Vec<DriveSymbol>, Vec<DriveSymbol>) {
    let mut word = vec![DriveSymbol::Plus];
    let mut comp = vec![DriveSymbol::Minus];
    for _ in 0..level {
        let next_word: Vec<_> = word.iter().chain(comp.iter()).copied().collect();
        let next_comp: Vec<_> = comp.iter().chain(word.iter()).copied().collect();
        word = next_word;
        comp = next_comp;
    }
    (word, comp)
}

/// The two shifted generators 𝓛± with coherent couplings g1 ± Ω, g2 ± Ω and
/// an identical dissipator.
pub fn drive_liouvillians(params: &ModelParams) -> Result<(SuperOperator, SuperOperator)> {
    let amp = params.drive_amp;
    let plus = build_liouvillian(params, Some(params.g1 + amp), Some(params.g2 + amp))?;
    let minus = build_liouvillian(params, Some(params.g1 - amp), Some(params.g2 - amp))?;
    Ok((plus, minus))
}

/// Dense interval propagator U = exp(𝓛 t).
pub fn propagator(l: &SuperOperator, t: f64, budget: Option<usize>) -> Result<Array2<C64>> {
    let dense = l.matrix.to_dense(budget)?;
    expm(
        &lapack::ensure_col_major(dense.mapv(|v| v * C64::new(t, 0.0))),
        budget,
    )
}

/// Apply the schedule symbol-by-symbol against precomputed interval
/// propagators, recording the state at t = 2ⁿT for each requested level n.
///
/// The trace is never silently renormalized: drift beyond `TRACE_DRIFT_TOL`
/// aborts the evolution, as do non-finite amplitudes.
pub fn evolve(
    rho_in: &DensityState,
    u_plus: &Array2<C64>,
    u_minus: &Array2<C64>,
    schedule: &DriveSchedule,
    record_levels: &[u32],
) -> Result<Vec<DensityState>> {
    let nd = rho_in.dim();
    let nl = nd * nd;
    assert_eq!(u_plus.nrows(), nl);
    assert_eq!(u_minus.nrows(), nl);
    let mut levels: Vec<u32> = record_levels.to_vec();
    levels.sort_unstable();
    levels.dedup();

    let bare = ModelParams::bare(rho_in.n_atoms, rho_in.n_max);
    let mut y = rho_in.vectorize();
    let mut buf = vec![C64::new(0.0, 0.0); nl];
    let mut out = Vec::with_capacity(levels.len());
    for (k, sym) in schedule.word.iter().enumerate() {
        let u = match sym {
            DriveSymbol::Plus => u_plus,
            DriveSymbol::Minus => u_minus,
        };
        lapack::matvec(u, &y, &mut buf);
        std::mem::swap(&mut y, &mut buf);
        let steps = k + 1;
        if !y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { steps });
        }
        let tr: C64 = (0..nd).map(|l| y[l * nd + l]).sum();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_DRIFT_TOL {
            return Err(Error::TraceDrift {
                trace: tr.norm(),
                steps,
            });
        }
        if steps.is_power_of_two() && levels.contains(&steps.trailing_zeros()) {
            let mut rec = DensityState::from_vec(&y, &bare);
            rec.time = schedule.time_at(steps);
            out.push(rec);
        }
    }
    Ok(out)
}

/// Lowest-energy eigenstates of the decoupled (g1 = g2 = 0) Hamiltonian as
/// pure-state projectors, plus candidate normalizations of the mean energy.
#[derive(Debug, Clone)]
pub struct InitialEnsemble {
    pub states: Vec<DensityState>,
    pub energies: Vec<f64>,
    /// Raw ensemble-mean energy.
    pub mean_energy: f64,
    /// Mean energy divided by the atom number.
    pub mean_energy_per_atom: f64,
    /// Mean energy measured from the decoupled ground state at −ω₀J.
    pub mean_energy_shifted: f64,
}

pub fn initial_ensemble(params: &ModelParams, count: usize) -> Result<InitialEnsemble> {
    params.validate()?;
    let nd = params.hilbert_dim();
    if count == 0 || count > nd {
        return Err(Error::InvalidParams(format!(
            "ensemble size {count} must lie between 1 and the space dimension {nd}"
        )));
    }
    let basis = build_basis(params)?;
    // the decoupled Hamiltonian is diagonal in the product basis: E = ω n + ω₀ m
    let mut order: Vec<(f64, usize)> = (0..nd)
        .map(|i| {
            let s = basis.state(i);
            (params.omega * s.n as f64 + params.omega0 * s.m(), i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if count < nd && (order[count].0 - order[count - 1].0).abs() < 1e-12 {
        log::warn!(
            "ensemble boundary is degenerate at energy {:.6}; tie broken by basis index",
            order[count].0
        );
    }

    let mut states = Vec::with_capacity(count);
    let mut energies = Vec::with_capacity(count);
    for &(e, idx) in order.iter().take(count) {
        let mut m = Array2::zeros((nd, nd));
        m[(idx, idx)] = C64::new(1.0, 0.0);
        states.push(DensityState::new(m, params));
        energies.push(e);
    }
    let mean = energies.iter().sum::<f64>() / count as f64;
    Ok(InitialEnsemble {
        states,
        energies,
        mean_energy: mean,
        mean_energy_per_atom: mean / params.n_atoms as f64,
        mean_energy_shifted: mean + params.omega0 * params.j(),
    })
}

/// Collective-decay spin-only generator from adiabatic elimination of the
/// boson: ρ̇_s = −i[ωJz, ρ_s] + κ_eff(2 J−ρJ+ − {J+J−, ρ_s}).
pub fn adiabatic_spin_liouvillian(params: &ModelParams, kappa_eff: f64) -> Result<SuperOperator> {
    params.validate()?;
    if !(kappa_eff > 0.0 && kappa_eff.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "kappa_eff must be positive and finite, got {kappa_eff}"
        )));
    }
    let (jz, jp, jm) = spin_operators(params.n_atoms);
    let sd = params.spin_dim();
    let id = eye(sd);
    let h = jz.mapv(|v| v * C64::new(params.omega, 0.0));
    let ht = h.t().to_owned();
    let jpjm = jp.dot(&jm);
    let jpjmt = jpjm.t().to_owned();
    let jpt = jp.t().to_owned();
    let keff = C64::new(kappa_eff, 0.0);
    let mi = C64::new(0.0, -1.0);

    let mut entries = Vec::new();
    CooMatrix::push_scaled_kron(&mut entries, mi, &h, &id);
    CooMatrix::push_scaled_kron(&mut entries, -mi, &id, &ht);
    CooMatrix::push_scaled_kron(&mut entries, 2.0 * keff, &jm, &jpt);
    CooMatrix::push_scaled_kron(&mut entries, -keff, &jpjm, &id);
    CooMatrix::push_scaled_kron(&mut entries, -keff, &id, &jpjmt);

    Ok(SuperOperator {
        matrix: CooMatrix::from_entries(sd * sd, entries),
        sector: Sector::Full,
        params: *params,
        embedding: None,
    })
}

/// Placeholder effective decay rate κ_eff = (g₁² + g₂²)/(2κN).
///
/// A convention for the adiabatic comparison limit, not a derived value;
/// callers with a better estimate should pass their own rate.
pub fn default_kappa_eff(params: &ModelParams) -> f64 {
    (params.g1 * params.g1 + params.g2 * params.g2)
        / (2.0 * params.kappa * params.n_atoms as f64)
}

/// One driven-dynamics configuration.
#[derive(Debug, Clone)]
pub struct DynamicsConfig {
    pub params: ModelParams,
    /// Drive frequency ω_d; the base interval is T = 2π/ω_d.
    pub omega_d: f64,
    /// Deepest Thue-Morse level; the word has 2^max_level symbols.
    pub max_level: u32,
    /// Number of low-energy initial states averaged over.
    pub ensemble: usize,
    /// Levels to record; empty means every level 0..=max_level.
    pub record_levels: Vec<u32>,
    /// Average density matrices before taking observables instead of
    /// averaging per-state observable curves.
    pub mixed_ensemble: bool,
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct ObservablePoint {
    pub level: u32,
    pub t: f64,
    pub n_av: f64,
    pub s_spin: f64,
    pub s_boson: f64,
    pub s_total: f64,
    pub mutual_info: f64,
}

/// Ensemble-averaged observables at the recorded times t_n = 2ⁿT.
#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub points: Vec<ObservablePoint>,
    pub ensemble_size: usize,
    pub mean_energy: f64,
}

fn observables_of(state: &DensityState, level: u32) -> Result<ObservablePoint> {
    let s_spin = von_neumann_entropy(&state.reduce_spin())?;
    let s_boson = von_neumann_entropy(&state.reduce_boson())?;
    let s_total = von_neumann_entropy(&state.matrix)?;
    Ok(ObservablePoint {
        level,
        t: state.time,
        n_av: state.avg_boson_number(),
        s_spin,
        s_boson,
        s_total,
        mutual_info: s_spin + s_boson - s_total,
    })
}

pub fn run_dynamics_experiment(config: &DynamicsConfig) -> Result<ObservableSeries> {
    let params = &config.params;
    params.validate()?;
    let schedule = DriveSchedule::new(config.max_level, base_period(config.omega_d));
    let levels: Vec<u32> = if config.record_levels.is_empty() {
        (0..=config.max_level).collect()
    } else {
        let mut l = config.record_levels.clone();
        l.sort_unstable();
        l.dedup();
        l.retain(|&n| n <= config.max_level);
        l
    };

    let (l_plus, l_minus) = drive_liouvillians(params)?;
    let u_plus = propagator(&l_plus, schedule.base_t, config.budget)?;
    drop(l_plus);
    let u_minus = propagator(&l_minus, schedule.base_t, config.budget)?;
    drop(l_minus);
    let ensemble = initial_ensemble(params, config.ensemble)?;
    let count = ensemble.states.len();

    let points = if config.mixed_ensemble {
        // average the density matrices first, then take observables
        let mut sums: Vec<Option<DensityState>> = vec![None; levels.len()];
        for state in &ensemble.states {
            let recorded = evolve(state, &u_plus, &u_minus, &schedule, &levels)?;
            for (slot, rec) in sums.iter_mut().zip(recorded) {
                match slot {
                    None => *slot = Some(rec),
                    Some(acc) => acc.matrix += &rec.matrix,
                }
            }
        }
        let scale = C64::new(1.0 / count as f64, 0.0);
        let mut pts = Vec::with_capacity(levels.len());
        for (slot, &lvl) in sums.into_iter().zip(levels.iter()) {
            let mut avg = slot.expect("every level is recorded");
            avg.matrix.mapv_inplace(|v| v * scale);
            pts.push(observables_of(&avg, lvl)?);
        }
        pts
    } else {
        // average per-state observable curves in deterministic ensemble order
        let mut acc: Vec<ObservablePoint> = Vec::new();
        for state in &ensemble.states {
            let recorded = evolve(state, &u_plus, &u_minus, &schedule, &levels)?;
            let pts: Vec<ObservablePoint> = recorded
                .iter()
                .zip(levels.iter())
                .map(|(rec, &lvl)| observables_of(rec, lvl))
                .collect::<Result<_>>()?;
            if acc.is_empty() {
                acc = pts;
            } else {
                for (a, p) in acc.iter_mut().zip(pts) {
                    a.n_av += p.n_av;
                    a.s_spin += p.s_spin;
                    a.s_boson += p.s_boson;
                    a.s_total += p.s_total;
                    a.mutual_info += p.mutual_info;
                }
            }
        }
        let inv = 1.0 / count as f64;
        for a in &mut acc {
            a.n_av *= inv;
            a.s_spin *= inv;
            a.s_boson *= inv;
            a.s_total *= inv;
            a.mutual_info *= inv;
        }
        acc
    };

    Ok(ObservableSeries {
        points,
        ensemble_size: count,
        mean_energy: ensemble.mean_energy,
    })
}

/// Run every configuration, isolating per-configuration failures so one bad
/// point cannot abort a sweep.
pub fn run_dynamics_sweep(
    configs: &[DynamicsConfig],
) -> Vec<std::result::Result<ObservableSeries, String>> {
    configs
        .iter()
        .map(|c| run_dynamics_experiment(c).map_err(|e| e.to_string()))
        .collect()
}
