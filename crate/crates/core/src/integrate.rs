//! Adaptive Dormand–Prince RK45 integration of linear ODEs ẏ = M y with a
//! sparse generator. Serves both as a step-integrator evolution path and as
//! an independent oracle for the propagator-based path.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::CooMatrix;

/// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// 5th-order solution weights (same as the last A row; FSAL property).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Embedded 4th-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate ẏ = M y from y0 over duration t with adaptive step control.
///
/// Error per step is bounded by atol + rtol·|y| componentwise (RMS-combined);
/// returns the state at time t.
pub fn evolve_rk45(
    m: &CooMatrix,
    y0: &[C64],
    t: f64,
    rtol: f64,
    atol: f64,
) -> Result<Vec<C64>> {
    assert_eq!(y0.len(), m.dim);
    if !(t.is_finite() && rtol > 0.0 && atol > 0.0) {
        return Err(Error::InvalidParams(
            "evolve_rk45 needs finite t and positive tolerances".into(),
        ));
    }
    if t == 0.0 {
        return Ok(y0.to_vec());
    }
    let n = y0.len();
    let dir = t.signum();
    let t_end = t.abs();
    let mut time = 0.0f64;
    let mut y = y0.to_vec();
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![C64::new(0.0, 0.0); n];

    // initial step: crude estimate from the generator norm
    let gen_scale = m.frobenius_norm().max(1e-12);
    let mut h = (0.1 / gen_scale).min(t_end);

    m.matvec(&y, &mut k[0]);
    let mut steps = 0usize;
    const MAX_STEPS: usize = 10_000_000;

    while time < t_end {
        h = h.min(t_end - time);
        for s in 0..6 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    if A[s][j] != 0.0 {
                        acc += kj[i] * C64::new(h * dir * A[s][j], 0.0);
                    }
                }
                stage[i] = acc;
            }
            m.matvec(&stage, &mut k[s + 1]);
        }

        // error estimate from the difference of the embedded solutions
        let mut err_sq = 0.0f64;
        for i in 0..n {
            let mut y5 = y[i];
            let mut y4 = y[i];
            for (j, kj) in k.iter().enumerate() {
                y5 += kj[i] * C64::new(h * dir * B5[j], 0.0);
                y4 += kj[i] * C64::new(h * dir * B4[j], 0.0);
            }
            let scale = atol + rtol * y5.norm().max(y[i].norm());
            err_sq += ((y5 - y4).norm() / scale).powi(2);
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            for i in 0..n {
                for (j, kj) in k.iter().enumerate() {
                    y[i] += kj[i] * C64::new(h * dir * B5[j], 0.0);
                }
            }
            time += h;
            if time < t_end {
                m.matvec(&y, &mut k[0]);
            }
        }
        // PI-free step update with the usual safety clamp
        let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h *= if err > 0.0 { factor } else { 5.0 };
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::SolverFailure {
                info: -1,
                sector: "rk45".into(),
                g1: f64::NAN,
                g2: f64::NAN,
            });
        }
        if !y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { steps });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expm::expm;
    use crate::lapack;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn scalar_decay() {
        let m = CooMatrix::from_entries(1, vec![(0, 0, c(-2.0, 0.0))]);
        let y = evolve_rk45(&m, &[c(1.0, 0.0)], 1.5, 1e-10, 1e-12).unwrap();
        assert!((y[0].re - (-3.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rotation_preserves_norm() {
        // ẏ = iω y rotates the phase without damping
        let m = CooMatrix::from_entries(1, vec![(0, 0, c(0.0, 3.0))]);
        let y = evolve_rk45(&m, &[c(1.0, 0.0)], 2.0, 1e-11, 1e-13).unwrap();
        assert!((y[0].norm() - 1.0).abs() < 1e-9);
        assert!((y[0].arg() - (6.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-8);
    }

    #[test]
    fn matches_matrix_exponential() {
        // random sparse 6×6 generator; RK45 and expm must agree
        let mut entries = Vec::new();
        let mut s = 12345u64;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for r in 0..6u32 {
            for col in 0..6u32 {
                if (r + col) % 2 == 0 {
                    entries.push((r, col, c(next(), next())));
                }
            }
        }
        let m = CooMatrix::from_entries(6, entries);
        let y0: Vec<C64> = (0..6).map(|i| c(1.0 / (i + 1) as f64, 0.2)).collect();
        let got = evolve_rk45(&m, &y0, 2.0, 1e-11, 1e-13).unwrap();
        let e = expm(
            &lapack::ensure_col_major(m.to_dense(None).unwrap().mapv(|v| v * c(2.0, 0.0))),
            None,
        )
        .unwrap();
        let mut want = vec![c(0.0, 0.0); 6];
        lapack::matvec(&e, &y0, &mut want);
        for (a, b) in got.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn linear_in_the_initial_state() {
        let m = CooMatrix::from_entries(
            2,
            vec![
                (0, 0, c(-0.5, 1.0)),
                (0, 1, c(0.3, 0.0)),
                (1, 0, c(0.0, -0.2)),
                (1, 1, c(-0.1, 0.0)),
            ],
        );
        let y0 = [c(1.0, 0.0), c(0.0, 1.0)];
        let scaled: Vec<C64> = y0.iter().map(|v| v * c(2.5, -1.0)).collect();
        let a = evolve_rk45(&m, &y0, 1.0, 1e-11, 1e-13).unwrap();
        let b = evolve_rk45(&m, &scaled, 1.0, 1e-11, 1e-13).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x * c(2.5, -1.0) - y).norm() < 1e-8);
        }
    }

    #[test]
    fn zero_duration_is_identity() {
        let m = CooMatrix::from_entries(1, vec![(0, 0, c(-1.0, 0.0))]);
        let y = evolve_rk45(&m, &[c(0.7, 0.1)], 0.0, 1e-9, 1e-12).unwrap();
        assert_eq!(y[0], c(0.7, 0.1));
    }
}
