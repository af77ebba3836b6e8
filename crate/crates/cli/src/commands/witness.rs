use dw_core::behavior::{chsh_witness, is_no_signalling, lhv_reconstruct, NO_SIGNALLING_TOL};
use dw_core::{Behavior, BehaviorError};
use serde_json::json;

use super::config_value;
use crate::error::CliError;
use crate::output::{json_bytes, Cell, Emitter, Table};
use crate::{Format, GlobalArgs, WitnessArgs};

/// Deficit `1 − p(b1=b2|x,x)` still counted as full agreement.
const AGREEMENT_TOL: f64 = 1e-9;

/// Result of testing a fully agreeing behavior against a local model.
fn agreement_verdict(b: &Behavior, no_signalling: bool) -> (bool, &'static str) {
    let full = (0..2).all(|x| b.agreement(x, x) >= 1.0 - AGREEMENT_TOL);
    if !no_signalling || !full {
        return (full, "not-applicable");
    }
    match lhv_reconstruct(b, AGREEMENT_TOL) {
        Ok(_) => (true, "local"),
        Err(BehaviorError::ReconstructionMismatch { .. }) => (true, "post-quantum"),
        Err(_) => (true, "not-applicable"),
    }
}

pub fn run(args: &WitnessArgs, g: &GlobalArgs, argv: Vec<String>) -> Result<(), CliError> {
    let mut em = Emitter::new(argv, g.out.clone());
    let bytes = em.read_input(&args.file)?;
    let b: Behavior = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: not a behavior: {e}", args.file.display())))?;
    let report = chsh_witness(&b);
    let no_signalling = is_no_signalling(&b, NO_SIGNALLING_TOL);
    let (full_agreement, verdict) = agreement_verdict(&b, no_signalling);
    let manifest = em.manifest_name();

    let body = match g.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&json!({
            "manifest": manifest,
            "chsh": report.chsh,
            "epsilon": report.epsilon,
            "delta_ns_lower": report.delta_ns_lower,
            "correlators": report.correlators,
            "no_signalling": no_signalling,
            "full_agreement": full_agreement,
            "full_agreement_verdict": verdict,
            "post_quantum_under_full_agreement": verdict == "post-quantum",
        })),
        Format::Csv => {
            let mut t = Table::new(&[
                "chsh",
                "epsilon",
                "delta_ns_lower",
                "e00",
                "e01",
                "e10",
                "e11",
                "no_signalling",
                "full_agreement",
                "full_agreement_verdict",
            ]);
            let e = report.correlators;
            t.push(vec![
                report.chsh.into(),
                report.epsilon.into(),
                report.delta_ns_lower.into(),
                e[0][0].into(),
                e[0][1].into(),
                e[1][0].into(),
                e[1][1].into(),
                no_signalling.to_string().into(),
                full_agreement.to_string().into(),
                Cell::from(verdict),
            ]);
            t.to_csv(manifest.as_deref())
        }
    };
    em.finish(body, Vec::new(), config_value("witness", g, args), json!({}))?;
    if !no_signalling {
        return Err(CliError::Semantic("behavior is signalling; the witness assumes no-signalling marginals".into()));
    }
    Ok(())
}

