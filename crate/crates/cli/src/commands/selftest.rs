use dw_core::behavior::chsh_witness;
use dw_core::quantum::{
    born_behavior, make_max_violation_realization, make_product_realization, sos_expectation, sos_residual,
    swap_selftest,
};
use dw_core::{Behavior, QuantumRealization};
use serde_json::json;

use super::config_value;
use crate::error::CliError;
use crate::output::{json_bytes, Cell, Emitter, Table};
use crate::{Builtin, Format, GlobalArgs, SelftestArgs};

/// Largest `|p(b=0|x) − 1/2|` still reported as uniform.
const UNIFORM_TOL: f64 = 1e-6;

fn load(args: &SelftestArgs, em: &mut Emitter) -> Result<QuantumRealization, CliError> {
    let Some(path) = &args.file else {
        return Ok(match args.builtin.expect("clap enforces file or builtin") {
            Builtin::Max => make_max_violation_realization(),
            Builtin::Product => make_product_realization(),
        });
    };
    let bytes = em.read_input(path)?;
    match serde_json::from_slice::<QuantumRealization>(&bytes) {
        Ok(r) => Ok(r),
        Err(e) => {
            if serde_json::from_slice::<Behavior>(&bytes).is_ok() {
                return Err(CliError::Input(format!(
                    "{} is a behavior; the swap circuit needs the state and observables, \
                     so pass a realization with `rho`, `dims`, `obs_a` and `obs_b`",
                    path.display()
                )));
            }
            Err(CliError::Input(format!("{}: not a realization: {e}", path.display())))
        }
    }
}

pub fn run(args: &SelftestArgs, g: &GlobalArgs, argv: Vec<String>) -> Result<(), CliError> {
    let mut em = Emitter::new(argv, g.out.clone());
    let mut r = load(args, &mut em)?;
    if let Some(v) = args.noise {
        r = r.with_white_noise(v).map_err(|e| CliError::Input(format!("--noise: {e}")))?;
    }
    let witness = chsh_witness(&born_behavior(&r));
    let report = swap_selftest(&r);
    let (residual, residual_error) = match sos_residual(&r) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let deviation = report.marginals.iter().flatten().map(|m| (m - 0.5).abs()).fold(0.0, f64::max);
    let manifest = em.manifest_name();

    let body = match g.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&json!({
            "manifest": manifest,
            "chsh": witness.chsh,
            "epsilon": witness.epsilon,
            "e00": report.e00,
            "sos_expectation": sos_expectation(&r),
            "sos_residual": residual,
            "sos_residual_error": residual_error,
            "swap_fidelity": report.swap_fidelity,
            "marginals": report.marginals,
            "max_marginal_deviation": deviation,
            "uniform_marginals": deviation <= UNIFORM_TOL,
        })),
        Format::Csv => {
            let mut t = Table::new(&[
                "chsh",
                "epsilon",
                "e00",
                "sos_expectation",
                "sos_residual",
                "swap_fidelity",
                "max_marginal_deviation",
                "uniform_marginals",
                "error",
            ]);
            t.push(vec![
                witness.chsh.into(),
                witness.epsilon.into(),
                report.e00.into(),
                sos_expectation(&r).into(),
                residual.into(),
                report.swap_fidelity.into(),
                deviation.into(),
                (deviation <= UNIFORM_TOL).to_string().into(),
                Cell::from(residual_error),
            ]);
            t.to_csv(manifest.as_deref())
        }
    };
    em.finish(body, Vec::new(), config_value("selftest", g, args), json!({}))?;
    Ok(())
}
