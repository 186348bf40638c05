//! Average participation ratios over a coupling grid (even parity block).

use dicke_lindblad::eigvec::pr_at_point;

use crate::config::PrMapConfig;
use crate::manifest::TaskRecord;
use crate::output::{f, write_csv};
use crate::support::Ctx;

pub fn run(ctx: &Ctx, cfg: &PrMapConfig) -> Result<Vec<TaskRecord>, String> {
    let grid = cfg.pr_map.grid();
    if grid.is_empty() {
        return Err("pr_map grid is empty; give g1/g2 lists or explicit pairs".into());
    }
    cfg.model.params().validate().map_err(|e| e.to_string())?;
    let params = cfg.model.params();
    let budget = cfg.pr_map.budget_bytes;

    let results: Vec<(String, TaskRecord)> =
        ctx.run_tasks(grid.into_iter().enumerate().collect(), |(idx, (g1, g2))| {
            let task = TaskRecord::start(format!("pr[{idx}] g1={g1} g2={g2}"));
            match pr_at_point(&params, g1, g2, budget) {
                Ok(v) => (
                    format!(
                        "{},{},ok,{},{},{},{},{}",
                        f(g1),
                        f(g2),
                        v.sector_dim,
                        f(v.pr_left),
                        f(v.pr_right),
                        f(v.pr_biorth),
                        f(v.defect)
                    ),
                    task.ok(vec![]),
                ),
                Err(e) => (
                    format!(
                        "{},{},failed,0,{nan},{nan},{nan},{nan}",
                        f(g1),
                        f(g2),
                        nan = f(f64::NAN)
                    ),
                    task.fail(e.to_string()),
                ),
            }
        });

    let emit = TaskRecord::start("pr table");
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (row, record) in results {
        rows.push(row);
        records.push(record);
    }
    let written = write_csv(
        &ctx.out_dir.join("pr_map.csv"),
        "g1,g2,status,sector_dim,pr_left,pr_right,pr_biorth,defect",
        rows,
    );
    records.push(match written {
        Ok(()) => emit.ok(vec!["pr_map.csv".into()]),
        Err(e) => emit.fail(e.to_string()),
    });
    Ok(records)
}
