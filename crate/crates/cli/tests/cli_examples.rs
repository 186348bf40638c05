//! Desk-scale checks of the CLI data products: exact synthetic-fit
//! reproduction, closed-form residual rows, the κ = 0 spectrum, and the
//! regular-vs-chaotic contrast visible in the scatter and spacing-ratio
//! artifacts.

use std::path::Path;
use std::process::Command;

use num_complex::Complex64 as C64;

use dicke_lindblad::hilbert::build_basis;
use dicke_lindblad::lapack::VectorSets;
use dicke_lindblad::liouvillian::{build_liouvillian, parity_sectors};
use dicke_lindblad::rmtstats::spacing_ratios;
use dicke_lindblad::spectra::eigendecompose;
use dicke_lindblad::ModelParams;

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dicke-lindblad"))
        .args(args)
        .output()
        .expect("spawn CLI")
}

fn run_ok(dir: &Path, command: &str, config: &str) {
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, config).expect("write config");
    let out = run_cli(&[
        command,
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
        "--jobs",
        "1",
    ]);
    assert!(
        out.status.success(),
        "{command} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Parse a CSV written by the CLI into rows of string fields, header dropped.
fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).expect("read csv");
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn synthetic_gap_series_reproduces_the_fit_exactly() {
    let dir = tempfile::tempdir().expect("tempdir");
    // gap = 2 · N⁻¹ → ln Δ = −1 · ln N + ln 2 exactly
    let config = "\
[model]
omega = 1.0
omega0 = 1.0
kappa = 1.0
n_atoms = 2
n_max = 3

[gap_scaling]
g1 = 1.25
g2 = []
n_atoms = []

[[gap_scaling.synthetic]]
g2 = 0.5
n = [4, 5, 6, 7, 8]
gap = [0.5, 0.4, 0.3333333333333333, 0.2857142857142857, 0.25]
";
    run_ok(dir.path(), "gap-scaling", config);
    let fits = read_rows(&dir.path().join("out/gap_fits.csv"));
    assert_eq!(fits.len(), 1);
    let slope_n: f64 = fits[0][2].parse().unwrap();
    let intercept_n: f64 = fits[0][3].parse().unwrap();
    let r2_n: f64 = fits[0][4].parse().unwrap();
    let slope_nl: f64 = fits[0][5].parse().unwrap();
    assert!((slope_n + 1.0).abs() <= 1e-12, "slope {slope_n}");
    assert!(
        (intercept_n - 2f64.ln()).abs() <= 1e-12,
        "intercept {intercept_n}"
    );
    assert!((r2_n - 1.0).abs() <= 1e-12, "r² {r2_n}");
    // with n_max held fixed, ln N_L = 2 ln(N+1) + const, so the N_L-abscissa
    // slope is about half the N-abscissa slope
    assert!(
        (slope_nl - slope_n / 2.0).abs() <= 0.1 * slope_n.abs(),
        "slope_nl {slope_nl} vs slope_n/2 {}",
        slope_n / 2.0
    );
}

#[test]
fn closed_system_spectrum_is_purely_imaginary() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = "\
[model]
omega = 1.0
omega0 = 1.0
kappa = 0.0
n_atoms = 3
n_max = 4

[spectrum]
g1 = [0.9]
g2 = [0.4]
";
    run_ok(dir.path(), "spectrum", config);
    let rows = read_rows(&dir.path().join("out/spectrum_000.csv"));
    assert!(!rows.is_empty());
    for row in rows {
        let re: f64 = row[2].parse().unwrap();
        assert!(re.abs() <= 1e-9, "κ = 0 eigenvalue has Re = {re}");
    }
}

#[test]
fn critical_line_rows_all_pass_the_residual_check() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = "\
[model]
omega = 1.0
omega0 = 1.0
kappa = 1.0
n_atoms = 2
n_max = 3

[critical_line]
g1_start = 0.1
g1_stop = 2.0
g1_count = 40
";
    run_ok(dir.path(), "critical-line", config);
    let rows = read_rows(&dir.path().join("out/critical_line.csv"));
    assert!(rows.len() >= 40);
    for row in rows {
        let residual: f64 = row[3].parse().unwrap();
        assert!(residual.abs() <= 1e-10, "residual {residual}");
    }
}

/// Even-sector eigenvalues at a desk-scale point of the regular or chaotic
/// regime (N = 5, n_max = 8, g1 = 1.25).
fn desk_spectrum(g2: f64) -> Vec<C64> {
    let p = ModelParams {
        omega: 1.0,
        omega0: 1.0,
        g1: 1.25,
        g2,
        kappa: 1.0,
        n_atoms: 5,
        n_max: 8,
        drive_amp: 0.0,
        drive_t: 1.0,
    };
    let basis = build_basis(&p).expect("basis");
    let full = build_liouvillian(&p, None, None).expect("liouvillian");
    let (even, _, _) = parity_sectors(&full, &basis).expect("sectors");
    eigendecompose(&even, VectorSets::None, None)
        .expect("spectrum")
        .eigenvalues
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Radial marginal |λ − λ̄| of the scatter; the supports of the regular and
/// chaotic spectra differ in extent, so the raw radii are compared.
fn radial_marginal(w: &[C64]) -> Vec<f64> {
    let centroid = w.iter().sum::<C64>() / w.len() as f64;
    w.iter().map(|v| (v - centroid).norm()).collect()
}

/// Pearson χ² statistic of the spacing-ratio angles against uniformity.
fn angle_chi2(w: &[C64], bins: usize) -> f64 {
    let z = spacing_ratios(w).expect("ratios").z;
    let mut counts = vec![0usize; bins];
    for v in &z {
        let frac = (v.arg() + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
        let k = ((frac * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let expected = z.len() as f64 / bins as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

#[test]
fn regular_and_chaotic_artifacts_are_distinguishable() {
    let regular = desk_spectrum(0.1);
    let chaotic = desk_spectrum(1.0);

    // scatter contrast: the radial marginals are distinct distributions
    let ks = ks_two_sample(&radial_marginal(&regular), &radial_marginal(&chaotic));
    // spacing-ratio scatter: isotropic in the regular regime, anisotropic in
    // the chaotic one (χ² uniformity of the angles at the 1% level, 11 dof)
    let crit_1pct = 24.725;
    let chi_regular = angle_chi2(&regular, 12);
    let chi_chaotic = angle_chi2(&chaotic, 12);
    println!(
        "radial KS = {ks:.4}, χ² regular = {chi_regular:.1}, χ² chaotic = {chi_chaotic:.1}"
    );

    // two-sample KS critical value at the 1% level
    let (na, nb) = (regular.len() as f64, chaotic.len() as f64);
    let ks_crit = 1.628 * ((na + nb) / (na * nb)).sqrt();
    assert!(
        ks >= ks_crit,
        "radial-marginal KS {ks:.4} below the 1% critical value {ks_crit:.4}"
    );
    assert!(
        chi_regular < crit_1pct,
        "regular point fails angle isotropy: χ² = {chi_regular:.1}"
    );
    assert!(
        chi_chaotic > crit_1pct,
        "chaotic point looks isotropic: χ² = {chi_chaotic:.1}"
    );
}
