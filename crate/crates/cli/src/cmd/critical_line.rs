//! Critical-line sampling: real g2 branches over a g1 range, each row
//! verified against the closed-form residual.

use dicke_lindblad::liouvillian::{critical_g2_given_g1, critical_isotropic, critical_residual};

use crate::config::CriticalLineConfig;
use crate::manifest::TaskRecord;
use crate::output::{f, write_csv};
use crate::support::Ctx;

pub fn run(ctx: &Ctx, cfg: &CriticalLineConfig) -> Result<Vec<TaskRecord>, String> {
    let samples = cfg.critical_line.samples()?;
    let m = &cfg.model;
    cfg.model.params().validate().map_err(|e| e.to_string())?;

    let task = TaskRecord::start(format!("critical line over {} g1 samples", samples.len()));
    let mut rows = Vec::new();
    for &g1 in &samples {
        let roots = match critical_g2_given_g1(g1, m.omega, m.omega0, m.kappa) {
            Ok(r) => r,
            Err(e) => return Ok(vec![task.fail(e.to_string())]),
        };
        for (branch, g2) in roots.iter().enumerate() {
            let residual = critical_residual(g1, *g2, m.omega, m.omega0, m.kappa);
            rows.push(format!("{},{branch},{},{}", f(g1), f(*g2), f(residual)));
        }
    }
    if let Err(e) = write_csv(
        &ctx.out_dir.join("critical_line.csv"),
        "g1,branch,g2,residual",
        rows,
    ) {
        return Ok(vec![task.fail(e.to_string())]);
    }

    let mut files = vec!["critical_line.csv".into()];
    if let Ok(g_star) = critical_isotropic(m.omega, m.omega0, m.kappa) {
        let row = [format!(
            "{},{}",
            f(g_star),
            f(critical_residual(g_star, g_star, m.omega, m.omega0, m.kappa))
        )];
        if let Err(e) = write_csv(
            &ctx.out_dir.join("critical_isotropic.csv"),
            "g_star,residual",
            row,
        ) {
            return Ok(vec![task.fail(e.to_string())]);
        }
        files.push("critical_isotropic.csv".into());
    }
    Ok(vec![task.ok(files)])
}
