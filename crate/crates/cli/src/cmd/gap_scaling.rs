//! Liouvillian gap versus system size: raw gaps plus power-law fits against
//! both the atom number N and the doubled-space dimension N_L.

use dicke_lindblad::spectra::{fit_gap_scaling, gap_from_eigenvalues, ZERO_TOL};

use crate::config::GapScalingConfig;
use crate::manifest::TaskRecord;
use crate::output::{f, write_csv};
use crate::support::{spectrum_cached, Ctx};

struct GapPoint {
    g2: f64,
    n_atoms: usize,
    n_l: usize,
    gap: Result<f64, String>,
}

pub fn run(ctx: &Ctx, cfg: &GapScalingConfig) -> Result<Vec<TaskRecord>, String> {
    let table = &cfg.gap_scaling;
    let sector = ctx.resolve_sector(&table.sector)?;
    if table.g2.is_empty() && table.synthetic.is_empty() {
        return Err("gap_scaling needs a g2 grid or synthetic series".into());
    }
    if !table.g2.is_empty() && table.n_atoms.len() < 3 {
        return Err("gap_scaling needs at least 3 atom numbers to fit".into());
    }
    for s in &table.synthetic {
        if s.n.len() != s.gap.len() || s.n.len() < 3 {
            return Err(format!(
                "synthetic series at g2={} needs matching n/gap lists with >= 3 points",
                s.g2
            ));
        }
    }
    cfg.model.params().validate().map_err(|e| e.to_string())?;

    let mut jobs = Vec::new();
    for &g2 in &table.g2 {
        for &n in &table.n_atoms {
            jobs.push((g2, n));
        }
    }
    let mut records: Vec<TaskRecord> = Vec::new();
    let computed: Vec<(GapPoint, TaskRecord)> = ctx.run_tasks(jobs, |(g2, n)| {
        let task = TaskRecord::start(format!("gap g2={g2} N={n}"));
        let mut params = cfg.model.params();
        params.g1 = table.g1;
        params.g2 = g2;
        params.n_atoms = n;
        let n_l = params.liouville_dim();
        let gap = spectrum_cached(&params, sector, ctx.cache_dir.as_deref(), table.budget_bytes)
            .and_then(|spec| gap_from_eigenvalues(&spec.eigenvalues, ZERO_TOL))
            .map_err(|e| e.to_string());
        let point = GapPoint {
            g2,
            n_atoms: n,
            n_l,
            gap,
        };
        let record = match &point.gap {
            Ok(_) => task.ok(vec![]),
            Err(e) => task.fail(e.clone()),
        };
        (point, record)
    });

    let mut points: Vec<GapPoint> = Vec::new();
    for (point, record) in computed {
        points.push(point);
        records.push(record);
    }
    // synthetic series join the same tables, tagged by source
    for s in &table.synthetic {
        for (&n, &gap) in s.n.iter().zip(&s.gap) {
            let nd = (n + 1) * (cfg.model.n_max + 1);
            points.push(GapPoint {
                g2: s.g2,
                n_atoms: n,
                n_l: nd * nd,
                gap: Ok(gap),
            });
        }
    }

    let emit = TaskRecord::start("gap tables");
    let result = write_tables(ctx, cfg, &points);
    records.push(match result {
        Ok(files) => emit.ok(files),
        Err(e) => emit.fail(e),
    });
    Ok(records)
}

fn write_tables(
    ctx: &Ctx,
    cfg: &GapScalingConfig,
    points: &[GapPoint],
) -> Result<Vec<String>, String> {
    let n_computed = cfg.gap_scaling.g2.len() * cfg.gap_scaling.n_atoms.len();
    let source = |i: usize| if i < n_computed { "computed" } else { "synthetic" };

    let raw_rows: Vec<String> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let gap = match &p.gap {
                Ok(g) => f(*g),
                Err(_) => "failed".into(),
            };
            format!("{},{},{},{},{}", source(i), f(p.g2), p.n_atoms, p.n_l, gap)
        })
        .collect();
    write_csv(
        &ctx.out_dir.join("gap_scaling.csv"),
        "source,g2,n_atoms,n_l,gap",
        raw_rows,
    )
    .map_err(|e| e.to_string())?;

    // one fit row per (source, g2) series, against both abscissas
    let mut series: Vec<(String, f64)> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let key = (source(i).to_string(), p.g2);
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let mut fit_rows = Vec::new();
    for (src, g2) in &series {
        let good: Vec<&GapPoint> = points
            .iter()
            .enumerate()
            .filter(|(i, p)| source(*i) == src && p.g2 == *g2 && p.gap.is_ok())
            .map(|(_, p)| p)
            .collect();
        if good.len() < 3 {
            return Err(format!(
                "series {src} g2={g2} has only {} usable gaps; cannot fit",
                good.len()
            ));
        }
        let by_n: Vec<(f64, f64)> = good
            .iter()
            .map(|p| (p.n_atoms as f64, *p.gap.as_ref().unwrap()))
            .collect();
        let by_nl: Vec<(f64, f64)> = good
            .iter()
            .map(|p| (p.n_l as f64, *p.gap.as_ref().unwrap()))
            .collect();
        let fn_ = fit_gap_scaling(&by_n).map_err(|e| e.to_string())?;
        let fnl = fit_gap_scaling(&by_nl).map_err(|e| e.to_string())?;
        fit_rows.push(format!(
            "{src},{},{},{},{},{},{},{},{}",
            f(*g2),
            f(fn_.slope),
            f(fn_.intercept),
            f(fn_.r_squared),
            f(fnl.slope),
            f(fnl.intercept),
            f(fnl.r_squared),
            fn_.n_points
        ));
    }
    write_csv(
        &ctx.out_dir.join("gap_fits.csv"),
        "source,g2,slope_n,intercept_n,r2_n,slope_nl,intercept_nl,r2_nl,n_points",
        fit_rows,
    )
    .map_err(|e| e.to_string())?;
    Ok(vec!["gap_scaling.csv".into(), "gap_fits.csv".into()])
}
