mod bootstrap;
mod dynamics;
mod ed;
mod gn;
mod lemmas;
mod nls;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{validate, RunConfig, TaskConfig};
use crate::report::{Payload, Provenance, Record, Report};
use crate::CliError;

/// Validate `config` and run its task on the current rayon pool.
pub fn run_task(config: &RunConfig) -> Result<Report, CliError> {
    validate(config)?;
    let threads = rayon::current_num_threads();
    let (payload, a_star) = match config.task() {
        TaskConfig::Gn(_) => (gn::run(config)?, None),
        TaskConfig::Bootstrap(t) => (bootstrap::run(config, t), None),
        task => {
            let r = config.resolve()?;
            let payload = match task {
                TaskConfig::Nls(t) => nls::run(config, &r, t),
                TaskConfig::Ed(t) => ed::run(config, &r, t, false),
                TaskConfig::StabilityScan(t) => ed::run(config, &r, t, true),
                TaskConfig::Lemmas(t) => lemmas::run(config, &r, t)?,
                TaskConfig::Dynamics(t) => dynamics::run(config, &r, t),
                TaskConfig::Gn(_) | TaskConfig::Bootstrap(_) => unreachable!(),
            };
            (payload, Some(r.a_star))
        }
    };
    Ok(Report::new(config, threads, a_star, payload))
}

pub(crate) fn point_seed(config: &RunConfig, point: usize) -> u64 {
    config.seed.wrapping_add(point as u64)
}

pub(crate) fn provenance(config: &RunConfig, point: usize) -> Provenance {
    Provenance { task: config.task().kind().as_str().into(), point, seed: point_seed(config, point) }
}

/// Run `f` on every point in parallel; records come back in point order,
/// numbered from `offset`.
pub(crate) fn scan<P, O, F>(
    config: &RunConfig,
    offset: usize,
    points: &[P],
    inputs: impl Fn(&P) -> Value + Sync,
    f: F,
) -> Vec<(Record, Option<O>)>
where
    P: Sync,
    O: Send,
    F: Fn(&P, u64) -> Result<(Value, O), String> + Sync,
{
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let prov = provenance(config, offset + i);
            let seed = prov.seed;
            match f(p, seed) {
                Ok((out, o)) => (Record::ok(prov, inputs(p), out), Some(o)),
                Err(e) => (Record::failed(prov, inputs(p), e), None),
            }
        })
        .collect()
}

pub(crate) fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(x.to_string())
    }
}

pub(crate) fn fmt_g(g: f64) -> String {
    format!("{g}")
}

pub(crate) fn series_key(g: f64, beta: f64, d: usize) -> String {
    format!("g={},beta={},d={d}", fmt_g(g), beta)
}

pub(crate) fn finish(records: Vec<Record>, tables: Vec<crate::report::Table>, verdicts: Vec<crate::report::Verdict>) -> Payload {
    Payload { records, tables, verdicts }
}
