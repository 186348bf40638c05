//! Shared plumbing: sector selection, spectrum caching, and the worker pool.

use std::path::{Path, PathBuf};

use dicke_lindblad::hilbert::build_basis;
use dicke_lindblad::lapack::VectorSets;
use dicke_lindblad::liouvillian::{build_liouvillian, parity_sectors, Sector, SuperOperator};
use dicke_lindblad::spectra::{eigendecompose, load_spectrum, save_spectrum, Spectrum};
use dicke_lindblad::{ModelParams, Result};

/// Options shared by every subcommand, resolved from the command line.
pub struct Ctx {
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub jobs: usize,
    pub seed: u64,
    /// Command-line sector override; wins over per-config sectors.
    pub sector: Option<Sector>,
}

impl Ctx {
    pub fn resolve_sector(&self, config_sector: &str) -> std::result::Result<Sector, String> {
        match self.sector {
            Some(s) => Ok(s),
            None => parse_sector(config_sector),
        }
    }

    /// Run `task` over `inputs` on a bounded worker pool, preserving input
    /// order in the output.
    pub fn run_tasks<I, O, F>(&self, inputs: Vec<I>, task: F) -> Vec<O>
    where
        I: Send,
        O: Send,
        F: Fn(I) -> O + Sync,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .expect("worker pool");
        pool.install(|| {
            use rayon::prelude::*;
            inputs.into_par_iter().map(&task).collect()
        })
    }
}

pub fn parse_sector(name: &str) -> std::result::Result<Sector, String> {
    match name {
        "even" => Ok(Sector::Even),
        "odd" => Ok(Sector::Odd),
        "full" => Ok(Sector::Full),
        other => Err(format!("unknown sector {other:?} (expected even, odd, or full)")),
    }
}

/// Build the Liouvillian and restrict it to the requested parity sector.
pub fn sector_operator(params: &ModelParams, sector: Sector) -> Result<SuperOperator> {
    let full = build_liouvillian(params, None, None)?;
    match sector {
        Sector::Full => Ok(full),
        Sector::Even | Sector::Odd => {
            let basis = build_basis(params)?;
            let (even, odd, _) = parity_sectors(&full, &basis)?;
            Ok(if sector == Sector::Even { even } else { odd })
        }
    }
}

fn digest_hex(params: &ModelParams) -> String {
    params.digest()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn cache_path(dir: &Path, params: &ModelParams, sector: Sector) -> PathBuf {
    dir.join(format!("spec_{}_{}.bin", digest_hex(params), sector.as_str()))
}

/// Eigenvalue-only spectrum of one sector, served from the cache when a file
/// for identical parameters exists and recomputed (and cached) otherwise.
pub fn spectrum_cached(
    params: &ModelParams,
    sector: Sector,
    cache_dir: Option<&Path>,
    budget: Option<usize>,
) -> Result<Spectrum> {
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, params, sector);
        if path.exists() {
            match load_spectrum(&path, params, None) {
                Ok(spec) if spec.sector == sector => return Ok(spec),
                Ok(_) => log::warn!("cache file {} has the wrong sector; recomputing", path.display()),
                Err(e) => log::warn!("ignoring unreadable cache file {}: {e}", path.display()),
            }
        }
    }
    let op = sector_operator(params, sector)?;
    let spec = eigendecompose(&op, VectorSets::None, budget)?;
    if let Some(dir) = cache_dir {
        std::fs::create_dir_all(dir)?;
        save_spectrum(&spec, &cache_path(dir, params, sector))?;
    }
    Ok(spec)
}
