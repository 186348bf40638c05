//! Spectral statistics for complex eigenvalue clouds: nearest-neighbor
//! spacings, Gaussian-kernel unfolding, 2D Poisson and GinUE reference
//! densities, and complex spacing ratios.

use std::sync::OnceLock;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::lapack;

/// Kernel width multiplier for the unfolding density estimate: σ = 4.5 s̄.
pub const SIGMA_FACTOR: f64 = 4.5;

/// Truncation order of the GinUE sum/product form. Terms decay factorially;
/// K = 100 leaves a tail below 1e-8 for s ≤ 6.
pub const GINUE_TRUNCATION: usize = 100;

const DEDUP_TOL: f64 = 1e-14;

/// Raw and unfolded nearest-neighbor spacings.
#[derive(Debug, Clone)]
pub struct UnfoldedSpacings {
    pub raw: Vec<f64>,
    pub rescaled: Vec<f64>,
    pub sigma: f64,
    pub sbar: f64,
}

/// Complex spacing ratios z_i = (E_NN − E_i)/(E_NNN − E_i) with summaries.
#[derive(Debug, Clone)]
pub struct SpacingRatios {
    pub z: Vec<C64>,
    pub mean_r: f64,
    pub mean_cos_theta: f64,
}

/// Remove exact duplicates (within 1e-14 in the complex plane).
///
/// Returns the surviving values and the number dropped; a nonzero drop count
/// is logged since zero spacings would poison every statistic downstream.
pub fn dedupe(eigenvalues: &[C64]) -> (Vec<C64>, usize) {
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| {
        eigenvalues[a]
            .re
            .total_cmp(&eigenvalues[b].re)
            .then(eigenvalues[a].im.total_cmp(&eigenvalues[b].im))
    });
    let mut keep = vec![true; eigenvalues.len()];
    for (p, &i) in idx.iter().enumerate() {
        if !keep[i] {
            continue;
        }
        for &j in idx[p + 1..].iter() {
            if eigenvalues[j].re - eigenvalues[i].re > DEDUP_TOL {
                break;
            }
            if keep[j] && (eigenvalues[j] - eigenvalues[i]).norm() <= DEDUP_TOL {
                keep[j] = false;
            }
        }
    }
    let out: Vec<C64> = eigenvalues
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(v, _)| *v)
        .collect();
    let dropped = eigenvalues.len() - out.len();
    if dropped > 0 {
        log::warn!("deduplicated {dropped} coincident eigenvalue(s)");
    }
    (out, dropped)
}

/// Nearest and next-nearest neighbor of each point: (index_nn, index_nnn).
///
/// Distance ties are broken by index order (lower index wins), which pins the
/// collinear-triple convention used by the spacing-ratio examples.
fn neighbor_indices(e: &[C64]) -> Vec<(usize, usize)> {
    let n = e.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut d1 = f64::INFINITY;
        let mut d2 = f64::INFINITY;
        let mut j1 = usize::MAX;
        let mut j2 = usize::MAX;
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = (e[j] - e[i]).norm();
            if d < d1 {
                d2 = d1;
                j2 = j1;
                d1 = d;
                j1 = j;
            } else if d < d2 {
                d2 = d;
                j2 = j;
            }
        }
        out.push((j1, j2));
    }
    out
}

/// Euclidean nearest-neighbor spacing of each eigenvalue.
pub fn nn_spacings(eigenvalues: &[C64]) -> Result<Vec<f64>> {
    let (e, _) = dedupe(eigenvalues);
    if e.len() < 3 {
        return Err(Error::Stats(format!(
            "need at least 3 distinct eigenvalues, got {}",
            e.len()
        )));
    }
    Ok(neighbor_indices(&e)
        .iter()
        .enumerate()
        .map(|(i, &(j, _))| (e[j] - e[i]).norm())
        .collect())
}

/// Unfold a complex spectrum: s′_i = s_i √ρ_av(E_i) / s̄, then rescale so the
/// mean of s′ is exactly 1. ρ_av is a Gaussian kernel density with σ = 4.5 s̄.
pub fn unfold(eigenvalues: &[C64]) -> Result<UnfoldedSpacings> {
    let (e, _) = dedupe(eigenvalues);
    if e.len() < 10 {
        return Err(Error::Stats(format!(
            "unfolding needs at least 10 eigenvalues, got {}",
            e.len()
        )));
    }
    let raw = nn_spacings(&e)?;
    let sbar = raw.iter().sum::<f64>() / raw.len() as f64;
    if sbar == 0.0 {
        return Err(Error::Stats("mean spacing is zero".into()));
    }
    let sigma = SIGMA_FACTOR * sbar;
    let n = e.len() as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma * n);
    let mut rescaled: Vec<f64> = e
        .iter()
        .zip(&raw)
        .map(|(&ei, &si)| {
            let rho: f64 = e
                .iter()
                .map(|&ej| (-(ej - ei).norm_sqr() / (2.0 * sigma * sigma)).exp())
                .sum::<f64>()
                * norm;
            si * rho.sqrt() / sbar
        })
        .collect();
    let mean = rescaled.iter().sum::<f64>() / n;
    for s in &mut rescaled {
        *s /= mean;
    }
    Ok(UnfoldedSpacings {
        raw,
        rescaled,
        sigma,
        sbar,
    })
}

/// 2D Poisson spacing density P(s) = (π/2) s exp(−π s²/4).
pub fn pdf_poisson2d(s: f64) -> f64 {
    use std::f64::consts::PI;
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

/// 2D Poisson spacing CDF, 1 − exp(−π s²/4).
pub fn cdf_poisson2d(s: f64) -> f64 {
    1.0 - (-0.25 * std::f64::consts::PI * s * s).exp()
}

/// Unnormalized-mean GinUE spacing density P̄(s) in the truncated
/// sum/product form,
/// P̄(s) = [Π_k Γ(1+k, s²)/k!] · Σ_j 2 s^{2j+1} e^{−s²} / Γ(1+j, s²).
pub fn pdf_ginue_bar(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let x = s * s;
    // regularized upper incomplete gamma: Q(k+1, x) = Γ(1+k, x)/k!
    let mut ln_prod = 0.0;
    let mut q = Vec::with_capacity(GINUE_TRUNCATION);
    for k in 1..=GINUE_TRUNCATION {
        let qk = gamma_ur(k as f64 + 1.0, x);
        q.push(qk);
        ln_prod += qk.ln();
    }
    let mut sum = 0.0;
    for j in 1..=GINUE_TRUNCATION {
        let qj = q[j - 1];
        if qj <= 0.0 {
            continue;
        }
        // term = 2 s^{2j+1} e^{−s²} / (Q(j+1, x) · j!)
        let ln_term = std::f64::consts::LN_2 + (2 * j + 1) as f64 * s.ln() - x
            - ln_gamma(j as f64 + 1.0)
            - qj.ln();
        sum += ln_term.exp();
    }
    (ln_prod + sum.ln()).exp()
}

fn ginue_mean() -> f64 {
    static MEAN: OnceLock<f64> = OnceLock::new();
    *MEAN.get_or_init(|| {
        // Simpson quadrature of s P̄(s) on [0, 8]; the integrand is far below
        // 1e-12 beyond s = 4
        let n = 8000;
        let h = 8.0 / n as f64;
        let f = |s: f64| s * pdf_ginue_bar(s);
        let mut acc = f(0.0) + f(8.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    })
}

/// Unit-mean GinUE spacing density P(s) = s̄ P̄(s̄ s) with s̄ = ∫ s P̄ ds.
pub fn pdf_ginue(s: f64) -> f64 {
    let m = ginue_mean();
    m * pdf_ginue_bar(m * s)
}

/// GinUE spacing CDF by cumulative quadrature (cached grid, linear interp).
pub fn cdf_ginue(s: f64) -> f64 {
    static GRID: OnceLock<Vec<f64>> = OnceLock::new();
    const STEP: f64 = 1e-3;
    const TOP: f64 = 8.0;
    let grid = GRID.get_or_init(|| {
        let n = (TOP / STEP) as usize;
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut prev = pdf_ginue(0.0);
        let mut acc = 0.0;
        for i in 1..=n {
            let cur = pdf_ginue(i as f64 * STEP);
            acc += 0.5 * (prev + cur) * STEP;
            cum.push(acc);
            prev = cur;
        }
        cum
    });
    if s <= 0.0 {
        return 0.0;
    }
    if s >= TOP {
        return 1.0;
    }
    let t = s / STEP;
    let i = t.floor() as usize;
    let frac = t - i as f64;
    (grid[i] * (1.0 - frac) + grid[i + 1] * frac).min(1.0)
}

/// Complex spacing ratios of a spectrum; no unfolding involved.
pub fn spacing_ratios(eigenvalues: &[C64]) -> Result<SpacingRatios> {
    let (e, _) = dedupe(eigenvalues);
    if e.len() < 3 {
        return Err(Error::Stats(format!(
            "need at least 3 distinct eigenvalues, got {}",
            e.len()
        )));
    }
    let nbrs = neighbor_indices(&e);
    let mut z = Vec::with_capacity(e.len());
    for (i, &(j1, j2)) in nbrs.iter().enumerate() {
        let nnn = e[j2] - e[i];
        if nnn.norm() == 0.0 {
            return Err(Error::Stats(format!(
                "next-nearest-neighbor distance vanishes at eigenvalue {i}"
            )));
        }
        z.push((e[j1] - e[i]) / nnn);
    }
    let n = z.len() as f64;
    let mean_r = z.iter().map(|v| v.norm()).sum::<f64>() / n;
    let mean_cos_theta = z.iter().map(|v| v.arg().cos()).sum::<f64>() / n;
    Ok(SpacingRatios {
        z,
        mean_r,
        mean_cos_theta,
    })
}

/// Eigenvalues of a dim×dim Ginibre matrix with entry variance 1/dim,
/// deterministic under the seed (circular-law support radius → 1).
pub fn sample_ginibre(dim: usize, seed: u64) -> Result<Vec<C64>> {
    assert!(dim >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (2.0 * dim as f64).sqrt();
    let mut a: Array2<C64> = lapack::zeros_cm(dim, dim);
    for v in a.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *v = C64::new(re * scale, im * scale);
    }
    lapack::eigvals(a)
}

/// Two-sample-free Kolmogorov–Smirnov distance of samples against a CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Stats("no samples for KS distance".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// One row of the exported spacing histogram.
#[derive(Debug, Clone, Copy)]
pub struct HistogramRow {
    pub bin_left: f64,
    pub bin_right: f64,
    pub empirical_density: f64,
    pub poisson2d: f64,
    pub ginue: f64,
}

/// Density histogram of unfolded spacings next to both reference densities
/// (evaluated at bin centers), ready for CSV export.
pub fn histogram_table(spacings: &[f64], bins: usize, max_s: f64) -> Result<Vec<HistogramRow>> {
    if spacings.is_empty() || bins == 0 || max_s <= 0.0 {
        return Err(Error::Stats("empty histogram request".into()));
    }
    let width = max_s / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in spacings {
        if (0.0..max_s).contains(&s) {
            counts[(s / width) as usize] += 1;
        }
    }
    let norm = 1.0 / (spacings.len() as f64 * width);
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let left = i as f64 * width;
            let center = left + 0.5 * width;
            HistogramRow {
                bin_left: left,
                bin_right: left + width,
                empirical_density: c as f64 * norm,
                poisson2d: pdf_poisson2d(center),
                ginue: pdf_ginue(center),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn collinear_spacings() {
        let s = nn_spacings(&[c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(s, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn unit_square_lattice_spacings() {
        let pts = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)];
        let s = nn_spacings(&pts).unwrap();
        assert!(s.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn spacings_match_independent_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pts: Vec<C64> = (0..500)
            .map(|_| {
                loop {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    let y: f64 = rng.gen_range(-1.0..1.0);
                    if x * x + y * y <= 1.0 {
                        return c(x, y);
                    }
                }
            })
            .collect();
        let got = nn_spacings(&pts).unwrap();
        for (i, &gi) in got.iter().enumerate() {
            let want = pts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &p)| (p - pts[i]).norm())
                .fold(f64::INFINITY, f64::min);
            assert!((gi - want).abs() < 1e-15);
        }
    }

    #[test]
    fn duplicates_are_dropped() {
        let (kept, dropped) = dedupe(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(kept.len(), 2);
        assert_eq!(dropped, 1);
        assert!(nn_spacings(&[c(0.5, 0.5); 5]).is_err());
    }

    #[test]
    fn unfolding_has_unit_mean_and_flattens_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<C64> = (0..900)
            .map(|_| c(rng.gen_range(0.0..30.0), rng.gen_range(0.0..30.0)))
            .collect();
        let u = unfold(&pts).unwrap();
        let mean = u.rescaled.iter().sum::<f64>() / u.rescaled.len() as f64;
        assert!((mean - 1.0).abs() < 1e-9);
        let var = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
        };
        let naive: Vec<f64> = u.raw.iter().map(|s| s / u.sbar).collect();
        assert!(
            var(&u.rescaled) < var(&naive),
            "unfolding should compress edge outliers: {} vs {}",
            var(&u.rescaled),
            var(&naive)
        );
    }

    #[test]
    fn unfold_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<C64> = (0..200)
            .map(|_| c(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)))
            .collect();
        let scaled: Vec<C64> = pts.iter().map(|&p| p * 7.3).collect();
        let a = unfold(&pts).unwrap();
        let b = unfold(&scaled).unwrap();
        for (x, y) in a.rescaled.iter().zip(b.rescaled.iter()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn poisson2d_density_properties() {
        assert_eq!(pdf_poisson2d(0.0), 0.0);
        assert!((simpson(pdf_poisson2d, 0.0, 12.0, 24000) - 1.0).abs() < 1e-10);
        // mode at sqrt(2/pi)
        let m = (2.0 / std::f64::consts::PI).sqrt();
        assert!(pdf_poisson2d(m) > pdf_poisson2d(m - 1e-4));
        assert!(pdf_poisson2d(m) > pdf_poisson2d(m + 1e-4));
        assert!((cdf_poisson2d(m) - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn ginue_density_properties() {
        // cubic small-s behavior: P(s)/s³ approaches a constant
        let r2 = pdf_ginue(1e-2) / 1e-6;
        let r3 = pdf_ginue(1e-3) / 1e-9;
        assert!((r2 / r3 - 1.0).abs() < 1e-3, "P/s³ ratios {r2} vs {r3}");
        assert!((simpson(pdf_ginue, 0.0, 8.0, 16000) - 1.0).abs() < 1e-6);
        assert!((simpson(|s| s * pdf_ginue(s), 0.0, 8.0, 16000) - 1.0).abs() < 1e-5);
        // frozen mean of the unnormalized form
        assert!((ginue_mean() - 1.1429294269).abs() < 1e-6);
    }

    #[test]
    fn spacing_ratio_tie_and_invariance() {
        let r = spacing_ratios(&[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        // middle eigenvalue: both neighbors at distance 1, tie broken by index
        assert!((r.z[1].norm() - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<C64> = (0..120)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let a = spacing_ratios(&pts).unwrap();
        assert!(a.z.iter().all(|z| z.norm() <= 1.0 + 1e-15));
        let moved: Vec<C64> = pts.iter().map(|&p| p * 3.7 + c(5.0, -2.0)).collect();
        let b = spacing_ratios(&moved).unwrap();
        for (x, y) in a.z.iter().zip(b.z.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn ginibre_sampler_is_deterministic_with_circular_law_radius() {
        let a = sample_ginibre(512, 7).unwrap();
        let b = sample_ginibre(512, 7).unwrap();
        assert_eq!(a, b);
        let radius = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((0.9..=1.15).contains(&radius), "radius {radius}");
        let c = sample_ginibre(512, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ginibre_spacing_ratio_mean_is_near_rmt_value() {
        let mut rs = Vec::new();
        for seed in 0..5 {
            let e = sample_ginibre(128, seed).unwrap();
            rs.push(spacing_ratios(&e).unwrap().mean_r);
        }
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        assert!((0.69..=0.77).contains(&mean), "mean r {mean}");
    }

    #[test]
    fn poisson_cloud_spacing_ratio_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<C64> = (0..4000)
            .map(|_| c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect();
        let r = spacing_ratios(&pts).unwrap().mean_r;
        assert!((0.64..=0.70).contains(&r), "mean r {r}");
    }

    #[test]
    fn unfolded_ginibre_matches_ginue_density() {
        let e = sample_ginibre(2048, 1).unwrap();
        let u = unfold(&e).unwrap();
        let d = ks_distance(&u.rescaled, cdf_ginue).unwrap();
        assert!(d <= 0.05, "KS distance {d}");
        let dp = ks_distance(&u.rescaled, cdf_poisson2d).unwrap();
        assert!(dp > d, "GinUE should fit better than Poisson ({d} vs {dp})");
    }

    #[test]
    fn histogram_rows_integrate_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let samples: Vec<f64> = (0..5000).map(|_| rng.gen_range(0.0..3.0)).collect();
        let rows = histogram_table(&samples, 30, 3.0).unwrap();
        let width = rows[0].bin_right - rows[0].bin_left;
        let total: f64 = rows.iter().map(|r| r.empirical_density * width).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
