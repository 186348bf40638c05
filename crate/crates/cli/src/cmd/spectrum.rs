//! Complex-spectrum scatter files, one CSV per coupling point.

use crate::config::SpectrumConfig;
use crate::manifest::TaskRecord;
use crate::output::{f, write_csv};
use crate::support::{spectrum_cached, Ctx};

pub fn run(ctx: &Ctx, cfg: &SpectrumConfig) -> Result<Vec<TaskRecord>, String> {
    let sector = ctx.resolve_sector(&cfg.spectrum.sector)?;
    if cfg.spectrum.g1.is_empty() || cfg.spectrum.g2.is_empty() {
        return Err("spectrum g1 and g2 grids must be nonempty".into());
    }
    cfg.model.params().validate().map_err(|e| e.to_string())?;

    let mut points = Vec::new();
    for &g1 in &cfg.spectrum.g1 {
        for &g2 in &cfg.spectrum.g2 {
            points.push((points.len(), g1, g2));
        }
    }

    Ok(ctx.run_tasks(points, |(idx, g1, g2)| {
        let task = TaskRecord::start(format!("spectrum[{idx}] g1={g1} g2={g2}"));
        let mut params = cfg.model.params();
        params.g1 = g1;
        params.g2 = g2;
        let file = format!("spectrum_{idx:03}.csv");
        let spec = match spectrum_cached(
            &params,
            sector,
            ctx.cache_dir.as_deref(),
            cfg.spectrum.budget_bytes,
        ) {
            Ok(s) => s,
            Err(e) => return task.fail(e.to_string()),
        };
        let rows = spec
            .eigenvalues
            .iter()
            .map(|w| format!("{},{},{},{}", f(g1), f(g2), f(w.re), f(w.im)));
        match write_csv(&ctx.out_dir.join(&file), "g1,g2,re,im", rows) {
            Ok(()) => task.ok(vec![file]),
            Err(e) => task.fail(e.to_string()),
        }
    }))
}
