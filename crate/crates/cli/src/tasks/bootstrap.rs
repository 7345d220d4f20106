use bose2d::lemmas::{run_bootstrap, BootstrapSearch};
use serde_json::json;

use super::{finish, num, scan};
use crate::config::{BootstrapTask, RunConfig};
use crate::report::{Payload, Table, Verdict};

pub(super) fn run(config: &RunConfig, task: &BootstrapTask) -> Payload {
    let search = BootstrapSearch { resolution: task.resolution, max_steps: task.max_steps, ..Default::default() };
    let betas = config.scan.betas.clone();
    let results = scan(config, 0,
        &betas,
        |b| json!({ "beta": b, "eps0": task.eps0, "resolution": task.resolution }),
        |&beta, _| {
            let run = run_bootstrap(beta, task.eps0, &search).map_err(|e| e.to_string())?;
            let out = json!({
                "steps": run.steps.len(),
                "reached_zero": run.reached_zero,
                "trajectory": run.trajectory.iter().map(|x| num(*x)).collect::<Vec<_>>(),
                "min_gain": num(run.steps.iter().map(|s| s.gain).fold(f64::INFINITY, f64::min)),
            });
            Ok((out, run))
        },
    );
    let mut table = Table::new(
        "bootstrap",
        &["beta", "step", "alpha", "a", "b", "delta", "lambda_exponent", "gain", "log_flags"],
    );
    let mut records = Vec::new();
    let mut verdicts = Vec::new();
    for (beta, (record, run)) in betas.iter().zip(results) {
        records.push(record);
        let Some(run) = run else {
            verdicts.push(Verdict::new(format!("termination[beta={beta}]"), false, "run failed"));
            continue;
        };
        table.push(vec![json!(beta), json!(0), num(2.0 * beta), json!(null), json!(null), num(0.5), num(2.0 * beta), json!(null), json!("")]);
        for (i, s) in run.steps.iter().enumerate() {
            table.push(vec![
                json!(beta),
                json!(i + 1),
                num(s.alpha),
                num(s.a_exp),
                num(s.b_exp),
                num(s.delta),
                num(s.lambda_exponent),
                num(s.gain),
                json!(s.log_flags.join(";")),
            ]);
        }
        let positive = run.steps.iter().all(|s| s.gain > 0.0);
        verdicts.push(Verdict::new(
            format!("termination[beta={beta}]"),
            run.reached_zero && positive,
            format!(
                "alpha from {} to {} in {} steps, gains all positive: {positive}",
                2.0 * beta,
                run.trajectory.last().copied().unwrap_or(f64::NAN),
                run.steps.len()
            ),
        ));
    }
    finish(records, vec![table], verdicts)
}
