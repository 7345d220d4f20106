use bose2d::nls::{minimize_nls, Coupling, NlsProblem, NlsReport, NlsStatus};
use serde_json::{json, Value};

use super::{finish, fmt_g, num, scan};
use crate::config::{CouplingKind, NlsTask, Resolved, RunConfig};
use crate::report::{Payload, Table, Verdict};

struct Point {
    g: f64,
    scaling: Option<(usize, f64)>,
}

pub(super) fn run(config: &RunConfig, r: &Resolved, task: &NlsTask) -> Payload {
    let mut points = Vec::new();
    for g in config.attraction_axis() {
        match task.coupling {
            CouplingKind::Delta => points.push(Point { g, scaling: None }),
            CouplingKind::Hartree => {
                for &beta in &config.scan.betas {
                    for &n in &config.scan.particles {
                        points.push(Point { g, scaling: Some((n, beta)) });
                    }
                }
            }
        }
    }
    let tol = &config.tolerances;
    let results = scan(config, 0,
        &points,
        |p| {
            json!({
                "g": p.g,
                "coupling": task.coupling,
                "N": p.scaling.map(|s| s.0),
                "beta": p.scaling.map(|s| s.1),
            })
        },
        |p, seed| {
            let w = config.interaction(p.g, r.a_star);
            let coupling = match p.scaling {
                None => Coupling::Delta { b: w.integral() },
                Some((particles, beta)) => Coupling::Hartree { w: w.clone(), particles, beta },
            };
            let problem = NlsProblem::new(&r.grid, &r.potential, &r.vector_potential, coupling)
                .and_then(|pr| pr.with_tol(tol.nls))
                .map_err(|e| e.to_string())?
                .with_max_iter(task.max_iter);
            let res = minimize_nls(&problem, None, seed).map_err(|e| e.to_string())?;
            let rep = res.report();
            let out = json!({
                "b": num(w.integral()),
                "energy": num(rep.energy),
                "residual": num(rep.residual),
                "status": rep.status,
                "iterations": rep.iterations,
                "chemical_potential": num(rep.chemical_potential),
                "width": num(rep.width),
            });
            Ok((out, (w.integral(), rep)))
        },
    );
    let mut table = Table::new("nls", &["g", "N", "beta", "b", "E", "residual", "iterations", "status"]);
    let mut verdicts = Vec::new();
    let mut records = Vec::new();
    for (p, (record, out)) in points.iter().zip(results) {
        records.push(record);
        let (n, beta) = match p.scaling {
            Some((n, b)) => (json!(n), json!(b)),
            None => (Value::Null, Value::Null),
        };
        let Some((b, rep)) = out else {
            table.push(vec![json!(p.g), n, beta, Value::Null, Value::Null, Value::Null, Value::Null, json!("failed")]);
            continue;
        };
        let NlsReport { energy, residual, status, iterations, .. } = rep;
        table.push(vec![json!(p.g), n, beta, num(b), num(energy), num(residual), json!(iterations), json!(status.as_str())]);
        if p.scaling.is_none() && p.g != 1.0 {
            let expected = if p.g < 1.0 { NlsStatus::Converged } else { NlsStatus::CollapseDetected };
            verdicts.push(Verdict::new(
                format!("stability[g={}]", fmt_g(p.g)),
                status == expected,
                format!("status {} (expected {}), E = {energy:.10}", status.as_str(), expected.as_str()),
            ));
        }
        if let Some(e0) = task.expected_energy {
            verdicts.push(Verdict::new(
                format!("energy[g={}]", fmt_g(p.g)),
                status == NlsStatus::Converged && (energy - e0).abs() <= tol.energy,
                format!("E = {energy:.12} vs {e0} (tolerance {:.1e})", tol.energy),
            ));
        }
    }
    finish(records, vec![table], verdicts)
}
