use dw_core::behavior::make_pr_box;
use dw_core::quantum::{born_behavior, make_max_violation_realization};
use dw_core::{Behavior, ExperimentModel};
use serde_json::{json, Value};

use super::config_value;
use crate::error::CliError;
use crate::output::{json_bytes, Emitter};
use crate::{ExampleArgs, ExampleKind, GlobalArgs};

pub fn run(args: &ExampleArgs, g: &GlobalArgs, argv: Vec<String>) -> Result<(), CliError> {
    let value: Value = match args.kind {
        ExampleKind::PrBox => json!(make_pr_box()),
        ExampleKind::Uniform => json!(Behavior::uniform()),
        ExampleKind::MaxBehavior => json!(born_behavior(&make_max_violation_realization())),
        ExampleKind::MaxRealization => json!(make_max_violation_realization()),
        ExampleKind::Model => {
            json!(ExperimentModel::with_overlap(0.91, 10_000, 7).expect("fixed model is valid"))
        }
    };
    let em = Emitter::new(argv, g.out.clone());
    em.finish(json_bytes(&value), Vec::new(), config_value("example", g, args), json!({}))?;
    Ok(())
}
