use dw_core::behavior::{delta_min_ns_lp, delta_ns_lower};
use dw_core::npa::{delta_min_quantum, NpaConfig};
use dw_core::quantum::{analytic_constrained_chsh, optimize_constrained_chsh};
use dw_core::{BehaviorError, NpaError, NpaLevel, QuantumError};
use serde_json::json;

use super::{config_value, par_map};
use crate::error::CliError;
use crate::output::{json_bytes, Cell, Emitter, Table};
use crate::{grid, CurveArgs, CurveModel, Format, GlobalArgs};

/// Allowed shortfall against the analytic curve.
const QUANTUM_TOL: f64 = 1e-3;

pub fn parse_level(s: &str) -> Result<NpaLevel, CliError> {
    match s {
        "1" => Ok(NpaLevel::One),
        "1+AB" | "1+ab" => Ok(NpaLevel::OnePlusAB),
        "2" => Ok(NpaLevel::Two),
        "3" => Ok(NpaLevel::Three),
        "3-isolated" => Ok(NpaLevel::ThreeIsolated),
        _ => Err(CliError::Input(format!("unknown level {s:?}; expected 1, 1+AB, 2, 3 or 3-isolated"))),
    }
}

fn cross(chsh: &[f64], eps: &[f64]) -> Vec<(f64, f64)> {
    chsh.iter().flat_map(|&s| eps.iter().map(move |&e| (s, e))).collect()
}

struct Rows {
    table: Table,
    numerical_failures: usize,
}

fn ns_rows(points: &[(f64, f64)], jobs: Option<usize>) -> Result<Rows, CliError> {
    let mut table = Table::new(&["chsh", "epsilon", "delta_ns", "delta_ns_formula", "verdict", "error"]);
    let results = par_map(jobs, points, |_, &(s, e)| delta_min_ns_lp(s, e))?;
    for (&(s, e), r) in points.iter().zip(results) {
        let (delta, formula, verdict, error) = match r {
            Ok(d) => (Some(d), Some(delta_ns_lower(s, e)), "OK", None),
            Err(BehaviorError::Infeasible) => (None, None, "INFEASIBLE", Some(BehaviorError::Infeasible.to_string())),
            Err(err) => (None, None, "ERROR", Some(err.to_string())),
        };
        table.push(vec![s.into(), e.into(), delta.into(), formula.into(), verdict.into(), error.into()]);
    }
    Ok(Rows { table, numerical_failures: 0 })
}

fn quantum_rows(eps: &[f64], seed: u64, jobs: Option<usize>) -> Result<Rows, CliError> {
    let mut table = Table::new(&[
        "epsilon",
        "chsh",
        "chsh_analytic",
        "e00",
        "criterion_residual",
        "evals",
        "seed",
        "verdict",
        "error",
    ]);
    let results = par_map(jobs, eps, |i, &e| optimize_constrained_chsh(e, QUANTUM_TOL, seed.wrapping_add(i as u64)))?;
    let mut numerical_failures = 0;
    for (i, (&e, r)) in eps.iter().zip(results).enumerate() {
        let seed = Cell::from(seed.wrapping_add(i as u64));
        let analytic = if (0.0..=0.5).contains(&e) { Cell::from(analytic_constrained_chsh(e)) } else { Cell::Empty };
        let row = match r {
            Ok(o) => vec![
                e.into(),
                o.chsh.into(),
                analytic,
                o.e00.into(),
                o.criterion_residual.into(),
                o.evals.into(),
                seed,
                "OK".into(),
                Cell::Empty,
            ],
            Err(err) => {
                let verdict = if let QuantumError::NoConvergence(_) = err {
                    numerical_failures += 1;
                    "NO_CONVERGENCE"
                } else {
                    "ERROR"
                };
                let mut row = vec![e.into(), Cell::Empty, analytic, Cell::Empty, Cell::Empty, Cell::Empty, seed];
                row.extend([verdict.into(), err.to_string().into()]);
                row
            }
        };
        table.push(row);
    }
    Ok(Rows { table, numerical_failures })
}

fn npa_rows(points: &[(f64, f64)], level: NpaLevel, jobs: Option<usize>) -> Result<Rows, CliError> {
    let mut table = Table::new(&[
        "chsh",
        "epsilon",
        "level",
        "delta_ns",
        "delta_quantum",
        "delta_uncertified",
        "moment_size",
        "certificate_min_eig",
        "certificate_violation",
        "verdict",
        "error",
    ]);
    let cfg = NpaConfig::default();
    let results = par_map(jobs, points, |_, &(s, e)| delta_min_quantum(s, e, level, &cfg))?;
    for (&(s, e), r) in points.iter().zip(results) {
        let mut row: Vec<Cell> = vec![s.into(), e.into(), level.label().into()];
        match r {
            Ok(d) => row.extend([
                d.ns_bound.into(),
                d.delta.into(),
                d.lower.into(),
                d.size.into(),
                d.certificate_check.0.into(),
                d.certificate_check.1.into(),
                "OK".into(),
                Cell::Empty,
            ]),
            Err(err) => {
                let verdict = if let NpaError::Infeasible { .. } = err { "INFEASIBLE" } else { "ERROR" };
                row.extend(std::iter::repeat_n(Cell::Empty, 6));
                row.extend([verdict.into(), err.to_string().into()]);
            }
        }
        table.push(row);
    }
    Ok(Rows { table, numerical_failures: 0 })
}

pub fn run(args: &CurveArgs, g: &GlobalArgs, argv: Vec<String>) -> Result<(), CliError> {
    let em = Emitter::new(argv, g.out.clone());
    let eps_default = match args.model {
        CurveModel::QuantumOpt => "0:0.5:11",
        _ => "0",
    };
    let eps = grid::parse(args.eps.as_deref().unwrap_or(eps_default))?;
    let (rows, seeds) = match args.model {
        CurveModel::Ns => {
            let chsh = grid::parse(args.chsh.as_deref().unwrap_or("2:4:21"))?;
            (ns_rows(&cross(&chsh, &eps), g.jobs)?, json!({}))
        }
        CurveModel::QuantumOpt => {
            if args.chsh.is_some() {
                return Err(CliError::Input("quantum-opt computes CHSH; pass only --eps".into()));
            }
            let per_point: Vec<u64> = (0..eps.len() as u64).map(|i| g.seed.wrapping_add(i)).collect();
            (quantum_rows(&eps, g.seed, g.jobs)?, json!({ "base": g.seed, "points": per_point }))
        }
        CurveModel::Npa => {
            let level = parse_level(&args.level)?;
            let chsh = grid::parse(args.chsh.as_deref().unwrap_or("2.5"))?;
            (npa_rows(&cross(&chsh, &eps), level, g.jobs)?, json!({}))
        }
    };
    let manifest = em.manifest_name();
    let body = match g.format.unwrap_or(Format::Csv) {
        Format::Csv => rows.table.to_csv(manifest.as_deref()),
        Format::Json => json_bytes(&json!({
            "manifest": manifest,
            "columns": rows.table.columns,
            "rows": rows.table.rows_json(),
        })),
    };
    em.finish(body, Vec::new(), config_value("curve", g, args), seeds)?;
    if rows.numerical_failures > 0 {
        return Err(CliError::Numerical(format!(
            "{} grid point(s) did not converge; see the error column",
            rows.numerical_failures
        )));
    }
    Ok(())
}
