use std::collections::BTreeMap;

use bose2d::manybody::{
    assemble_hamiltonian, evolve, evolve_mean_field, product_state, two_body_elements, EvolveOptions, FockBasis,
};
use bose2d::C64;
use serde_json::{json, Value};

use super::ed::{bases, point_inputs, points};
use super::{finish, num, scan, series_key};
use crate::config::{DynamicsTask, Resolved, RunConfig};
use crate::report::{Payload, Table, Verdict};

struct DynOut {
    times: Vec<f64>,
    distances: Vec<f64>,
    drifts: [f64; 4],
}

fn initial_state(task: &DynamicsTask, d: usize) -> Vec<C64> {
    let mut c: Vec<C64> = match &task.initial {
        Some(v) => v.iter().map(|[re, im]| C64::new(*re, *im)).collect(),
        None => (0..d).map(|k| C64::new(0.6f64.powi(k as i32), 0.0)).collect(),
    };
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|z| *z /= norm);
    c
}

pub(super) fn run(config: &RunConfig, r: &Resolved, task: &DynamicsTask) -> Payload {
    let pts = points(config);
    let tol = &config.tolerances;
    let bases = bases(config, r);
    let opts = EvolveOptions { cap: task.dim_cap, ..Default::default() };
    let results = scan(config, 0, &pts, point_inputs, |p, _seed| {
        let basis = bases.as_ref().map_err(|e| e.clone())?.get(&p.d).expect("basis per d");
        let w = config.interaction(p.g, r.a_star);
        let tensor = two_body_elements(basis, &w, p.n, p.beta).map_err(|e| e.to_string())?;
        let fock = FockBasis::new(p.n, p.d, task.dim_cap).map_err(|e| e.to_string())?;
        let h = assemble_hamiltonian(basis, &tensor, &fock, 0.0).map_err(|e| e.to_string())?;
        let c0 = initial_state(task, p.d);
        let mf = evolve_mean_field(&c0, basis.energies(), &tensor, task.t_final, task.dt).map_err(|e| e.to_string())?;
        let tr = evolve(&product_state(&fock, &c0), &h, &fock, task.t_final, task.dt, Some(&mf.states), &opts)
            .map_err(|e| e.to_string())?;
        let distances = tr.distances.clone().expect("reference supplied");
        let drifts = [tr.max_norm_drift, tr.max_energy_drift, mf.max_norm_drift, mf.max_energy_drift];
        let out = json!({
            "final_distance": num(*distances.last().expect("at least the initial time")),
            "norm_drift": num(drifts[0]),
            "energy_drift": num(drifts[1]),
            "mean_field_norm_drift": num(drifts[2]),
            "mean_field_energy_drift": num(drifts[3]),
            "substeps": tr.substeps,
            "rejected": tr.rejected,
        });
        Ok((out, DynOut { times: tr.times, distances, drifts }))
    });

    let mut trace = Table::new("dynamics", &["N", "beta", "g", "d", "t", "distance"]);
    let mut summary = Table::new(
        "dynamics_final",
        &["N", "beta", "g", "d", "distance", "norm_drift", "energy_drift", "mf_norm_drift", "mf_energy_drift", "status"],
    );
    let mut records = Vec::new();
    let mut series: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    let mut order = Vec::new();
    let mut worst = 0.0f64;
    let mut failed = 0;
    for (p, (record, out)) in pts.iter().zip(results) {
        records.push(record);
        let head = vec![json!(p.n), json!(p.beta), json!(p.g), json!(p.d)];
        match out {
            Some(o) => {
                for (t, dist) in o.times.iter().zip(&o.distances) {
                    let mut row = head.clone();
                    row.extend([num(*t), num(*dist)]);
                    trace.push(row);
                }
                let last = *o.distances.last().unwrap();
                worst = o.drifts.iter().fold(worst, |a, b| a.max(*b));
                let mut row = head;
                row.push(num(last));
                row.extend(o.drifts.iter().map(|x| num(*x)));
                row.push(json!("ok"));
                summary.push(row);
                let key = series_key(p.g, p.beta, p.d);
                if !series.contains_key(&key) {
                    order.push(key.clone());
                }
                series.entry(key).or_default().push((p.n, last));
            }
            None => {
                failed += 1;
                let mut row = head;
                row.extend(std::iter::repeat(Value::Null).take(5));
                row.push(json!("failed"));
                summary.push(row);
            }
        }
    }
    let mut verdicts = vec![Verdict::new(
        "conservation",
        failed == 0 && worst <= tol.conservation,
        format!("max norm/energy drift {worst:.3e} over both evolutions (tolerance {:.1e}); {failed} failed points", tol.conservation),
    )];
    for key in order {
        let mut seq = series.remove(&key).unwrap();
        seq.sort_by_key(|s| s.0);
        let decreasing = seq.windows(2).all(|w| w[1].1 < w[0].1);
        verdicts.push(Verdict::new(
            format!("mean-field approach[{key}]"),
            decreasing,
            format!("final distance over N: {:?}", seq.iter().map(|(n, x)| (*n, (x * 1e8).round() / 1e8)).collect::<Vec<_>>()),
        ));
    }
    finish(records, vec![trace, summary], verdicts)
}
