use std::path::PathBuf;

use dw_core::photonics::{ExperimentBox, PhotonicsError};
use dw_core::quantum::C64;
use dw_core::snm::protocol::{abinitio_protocol, ProtocolConfig, ProtocolError, ProtocolRecord, ProtocolResult};
use dw_core::ExperimentModel;
use serde_json::{json, Value};

use super::{config_value, par_map};
use crate::error::CliError;
use crate::output::{json_bytes, Cell, Emitter, Table};
use crate::{grid, ExperimentArgs, ExperimentMode, Format, GlobalArgs};

const DEFAULT_COUNTS: u64 = 10_000;

const COLUMNS: [&str; 15] = [
    "delta",
    "phase",
    "counts",
    "eps_target",
    "mode",
    "run",
    "seed",
    "box_seed",
    "status",
    "eps_achieved",
    "eps_sigma",
    "chsh",
    "chsh_sigma",
    "agreement_residual",
    "error",
];

const TRACE_COLUMNS: [&str; 20] = [
    "eps_target", "run", "seed", "stage", "eval", "h1_0", "q1_0", "h2_0", "q2_0", "h1_1", "q1_1", "h2_1", "q2_1",
    "objective", "x1", "x2", "n00", "n01", "n10", "n11",
];

/// Decorrelates the count stream of a run from its optimizer stream.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn load_model(args: &ExperimentArgs, em: &mut Emitter) -> Result<ExperimentModel, CliError> {
    let base = match &args.config {
        Some(p) => {
            let bytes = em.read_input(p)?;
            Some(
                serde_json::from_slice::<ExperimentModel>(&bytes)
                    .map_err(|e| CliError::Input(format!("{}: not a model config: {e}", p.display())))?,
            )
        }
        None => None,
    };
    let (delta, phase, counts, seed, background) = match &base {
        Some(m) => (m.delta(), m.phase(), m.counts_per_setting(), m.seed(), m.background()),
        None => {
            let d = args.delta.ok_or_else(|| CliError::Input("pass --config or --delta".into()))?;
            (C64::new(d, 0.0), 0.0, DEFAULT_COUNTS, 0, 0.0)
        }
    };
    let delta = args.delta.map_or(delta, |d| C64::new(d, 0.0));
    let counts = args.counts.unwrap_or(counts);
    ExperimentModel::new(delta, phase, counts, seed)
        .and_then(|m| m.with_background(background))
        .map_err(|e| CliError::Input(format!("model: {e}")))
}

fn with_seed(m: &ExperimentModel, seed: u64) -> ExperimentModel {
    ExperimentModel::new(m.delta(), m.phase(), m.counts_per_setting(), seed)
        .and_then(|x| x.with_background(m.background()))
        .expect("validated model with a new seed is valid")
}

struct Row {
    eps_target: f64,
    run: usize,
    seed: u64,
    box_seed: Option<u64>,
    status: &'static str,
    eps_achieved: Option<f64>,
    eps_sigma: Option<f64>,
    chsh: Option<f64>,
    chsh_sigma: Option<f64>,
    agreement_residual: Option<f64>,
    error: Option<String>,
    trace: Vec<ProtocolRecord>,
}

impl Row {
    fn empty(eps_target: f64, run: usize, seed: u64, status: &'static str) -> Self {
        Row {
            eps_target,
            run,
            seed,
            box_seed: None,
            status,
            eps_achieved: None,
            eps_sigma: None,
            chsh: None,
            chsh_sigma: None,
            agreement_residual: None,
            error: None,
            trace: Vec::new(),
        }
    }
}

fn tomography_row(model: &ExperimentModel, eps: f64, seed: u64) -> Row {
    match model.tomography_optimum(eps, seed) {
        Ok(chsh) => Row {
            eps_achieved: Some(eps),
            eps_sigma: Some(0.0),
            chsh: Some(chsh),
            chsh_sigma: Some(0.0),
            ..Row::empty(eps, 0, seed, "OK")
        },
        Err(e @ PhotonicsError::Unreachable { .. }) => {
            Row { error: Some(e.to_string()), ..Row::empty(eps, 0, seed, "UNREACHABLE") }
        }
        Err(e) => Row { error: Some(e.to_string()), ..Row::empty(eps, 0, seed, "ERROR") },
    }
}

fn final_records(r: &ProtocolResult) -> ProtocolRecord {
    ProtocolRecord { stage: 3, eval: 0, params: r.angles, objective: -r.chsh, counts: r.final_counts.clone() }
}

fn abinitio_row(model: &ExperimentModel, eps: f64, run: usize, seed: u64) -> Row {
    let box_seed = model.seed() ^ splitmix64(seed);
    let mut source = ExperimentBox::new(with_seed(model, box_seed));
    let row = Row { box_seed: Some(box_seed), ..Row::empty(eps, run, seed, "OK") };
    match abinitio_protocol(&mut source, eps, &ProtocolConfig::new(seed)) {
        Ok(r) => {
            let mut trace = r.records.clone();
            trace.push(final_records(&r));
            Row {
                eps_achieved: Some(r.eps_achieved),
                eps_sigma: Some(r.eps_sigma),
                chsh: Some(r.chsh),
                chsh_sigma: Some(r.chsh_sigma),
                agreement_residual: Some(r.agreement_residual),
                trace,
                ..row
            }
        }
        Err(e @ ProtocolError::Stage1Failed { .. }) => {
            let msg = e.to_string();
            let ProtocolError::Stage1Failed { residual, records, .. } = e else { unreachable!() };
            Row {
                status: "STAGE1_FAILED",
                agreement_residual: Some(residual),
                error: Some(msg),
                trace: records,
                ..row
            }
        }
        Err(e) => Row { status: "ERROR", error: Some(e.to_string()), ..row },
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Per-target medians and the largest excess over 2 in units of σ.
fn summary(eps: &[f64], rows: &[Row]) -> Value {
    let per_target: Vec<Value> = eps
        .iter()
        .map(|&e| {
            let group: Vec<&Row> = rows.iter().filter(|r| r.eps_target == e).collect();
            let ok: Vec<&&Row> = group.iter().filter(|r| r.status == "OK").collect();
            let mut chsh: Vec<f64> = ok.iter().filter_map(|r| r.chsh).collect();
            let mut achieved: Vec<f64> = ok.iter().filter_map(|r| r.eps_achieved).collect();
            let max_sigma_excess = ok
                .iter()
                .filter_map(|r| match (r.chsh, r.chsh_sigma) {
                    (Some(c), Some(s)) if s > 0.0 => Some((c - 2.0) / s),
                    _ => None,
                })
                .fold(None, |m: Option<f64>, z| Some(m.map_or(z, |m| m.max(z))));
            json!({
                "eps_target": e,
                "runs": group.len(),
                "ok": ok.len(),
                "stage1_failed": group.iter().filter(|r| r.status == "STAGE1_FAILED").count(),
                "median_chsh": median(&mut chsh),
                "median_eps_achieved": median(&mut achieved),
                "max_sigma_excess": max_sigma_excess,
            })
        })
        .collect();
    Value::Array(per_target)
}

pub fn run(args: &ExperimentArgs, g: &GlobalArgs, argv: Vec<String>) -> Result<(), CliError> {
    let mut em = Emitter::new(argv, g.out.clone());
    let model = load_model(args, &mut em)?;
    let eps = grid::parse(&args.eps)?;
    if args.trace.is_some() && args.mode != ExperimentMode::Abinitio {
        return Err(CliError::Input("--trace applies to abinitio mode only".into()));
    }
    let (mode, tasks): (&str, Vec<(usize, f64, usize, u64)>) = match args.mode {
        ExperimentMode::TomographyOpt => {
            ("tomography-opt", eps.iter().enumerate().map(|(i, &e)| (i, e, 0, g.seed.wrapping_add(i as u64))).collect())
        }
        ExperimentMode::Abinitio => {
            if args.runs == 0 {
                return Err(CliError::Input("--runs must be at least 1".into()));
            }
            let tasks = eps
                .iter()
                .enumerate()
                .flat_map(|(i, &e)| {
                    (0..args.runs).map(move |r| (i, e, r, g.seed.wrapping_add((i * args.runs + r) as u64)))
                })
                .collect();
            ("abinitio", tasks)
        }
    };
    let rows = par_map(g.jobs, &tasks, |_, &(_, e, r, seed)| match args.mode {
        ExperimentMode::TomographyOpt => tomography_row(&model, e, seed),
        ExperimentMode::Abinitio => abinitio_row(&model, e, r, seed),
    })?;

    let mut table = Table::new(&COLUMNS);
    for r in &rows {
        table.push(vec![
            model.delta().norm().into(),
            model.phase().into(),
            model.counts_per_setting().into(),
            r.eps_target.into(),
            mode.into(),
            r.run.into(),
            r.seed.into(),
            r.box_seed.into(),
            r.status.into(),
            r.eps_achieved.into(),
            r.eps_sigma.into(),
            r.chsh.into(),
            r.chsh_sigma.into(),
            r.agreement_residual.into(),
            r.error.clone().into(),
        ]);
    }
    let summary = summary(&eps, &rows);
    let manifest = em.manifest_name();
    let mut side: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    if let Some(path) = &args.trace {
        let mut trace = Table::new(&TRACE_COLUMNS);
        for r in &rows {
            for rec in &r.trace {
                for &(x1, x2, n) in &rec.counts {
                    let mut row: Vec<Cell> =
                        vec![r.eps_target.into(), r.run.into(), r.seed.into(), (rec.stage as u64).into(), rec.eval.into()];
                    row.extend(rec.params.iter().map(|&p| Cell::from(p)));
                    row.extend([rec.objective.into(), x1.into(), x2.into()]);
                    row.extend(n.iter().map(|&k| Cell::from(k)));
                    trace.push(row);
                }
            }
        }
        side.push((path.clone(), trace.to_csv(manifest.as_deref())));
    }
    let body = match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            eprintln!("{}", serde_json::to_string(&summary).expect("summary serializes"));
            if let Some(out) = &g.out {
                let mut name = out.file_name().unwrap_or_default().to_os_string();
                name.push(".summary.json");
                side.push((out.with_file_name(name), json_bytes(&json!({ "manifest": manifest, "summary": summary }))));
            }
            table.to_csv(manifest.as_deref())
        }
        Format::Json => json_bytes(&json!({
            "manifest": manifest,
            "columns": table.columns,
            "rows": table.rows_json(),
            "summary": summary,
        })),
    };
    let seeds = json!({
        "base": g.seed,
        "model": model.seed(),
        "runs": rows.iter().map(|r| json!({ "eps_target": r.eps_target, "run": r.run, "seed": r.seed, "box_seed": r.box_seed })).collect::<Vec<_>>(),
    });
    em.finish(body, side, config_value("experiment", g, args), seeds)?;
    Ok(())
}
