use std::collections::BTreeMap;

use bose2d::lemmas::{
    fit_definetti, interaction_tail_bound, localization_defect, moment_report, plane_wave_sweep, DeFinettiOptions,
};
use bose2d::manybody::{assemble_hamiltonian, ground_state, rdm1, rdm2, two_body_elements, FockBasis, ModeSelection};
use serde_json::{json, Value};

use super::ed::{bases, point_inputs, points};
use super::{finish, num, scan, series_key};
use crate::config::{LemmaPart, LemmasTask, Resolved, RunConfig};
use crate::report::{Payload, Record, Table, Verdict};
use crate::trend::spread;
use crate::CliError;

const DIRECTIONS: [(&str, (f64, f64)); 2] = [("x", (1.0, 0.0)), ("diagonal", (1.0, 1.0))];

struct PwOut {
    modes: usize,
    fitted_c: f64,
    max_norm: f64,
    rows: Vec<Vec<Value>>,
}

#[derive(Default)]
struct EdOut {
    localization: Vec<(usize, f64, f64, f64, f64)>,
    moments: Option<[f64; 5]>,
    definetti: Option<(f64, f64)>,
}

pub(super) fn run(config: &RunConfig, r: &Resolved, task: &LemmasTask) -> Result<Payload, CliError> {
    let tol = &config.tolerances;
    let has = |p: LemmaPart| task.parts.contains(&p);
    let mut records: Vec<Record> = Vec::new();
    let mut tables = Vec::new();
    let mut verdicts = Vec::new();

    let mut envelope_c: Option<f64> = None;
    if has(LemmaPart::PlaneWave) {
        let [k0, k1, dk] = task.k_range;
        let steps = ((k1 - k0) / dk + 1e-9).floor() as usize;
        let moduli: Vec<f64> = (0..=steps).map(|i| k0 + dk * i as f64).collect();
        let results = scan(
            config,
            records.len(),
            &task.cutoffs,
            |lam| json!({ "part": "plane-wave", "cutoff": lam, "k_range": task.k_range }),
            |&lam, _| {
                let basis = config.basis(r, ModeSelection::Cutoff(lam)).map_err(|e| e.to_string())?;
                let mut rows = Vec::new();
                let (mut c, mut max_norm) = (0.0f64, 0.0f64);
                for (label, dir) in DIRECTIONS {
                    let sw = plane_wave_sweep(&basis, &moduli, dir).map_err(|e| e.to_string())?;
                    c = c.max(sw.fitted_c);
                    max_norm = max_norm.max(sw.max_norm);
                    for s in &sw.samples {
                        rows.push(vec![
                            json!(lam),
                            json!(basis.dim()),
                            json!(label),
                            num(s.k),
                            json!(s.parity),
                            num(s.norm),
                            num(s.scaled),
                        ]);
                    }
                }
                let out = json!({ "modes": basis.dim(), "fitted_c": num(c), "max_norm": num(max_norm) });
                Ok((out, PwOut { modes: basis.dim(), fitted_c: c, max_norm, rows }))
            },
        );
        let mut samples = Table::new("plane_wave", &["cutoff", "d", "direction", "k", "parity", "norm", "scaled"]);
        let mut fits = Table::new("plane_wave_fit", &["cutoff", "d", "fitted_c", "max_norm"]);
        let mut cs = Vec::new();
        let mut worst_norm = 0.0f64;
        let mut failed = 0;
        for (lam, (record, out)) in task.cutoffs.iter().zip(results) {
            records.push(record);
            let Some(o) = out else {
                failed += 1;
                continue;
            };
            samples.rows.extend(o.rows);
            fits.push(vec![json!(lam), json!(o.modes), num(o.fitted_c), num(o.max_norm)]);
            cs.push(o.fitted_c);
            worst_norm = worst_norm.max(o.max_norm);
        }
        let s = spread(&cs);
        verdicts.push(Verdict::new(
            "plane-wave norm at most one",
            failed == 0 && worst_norm <= 1.0 + 1e-10,
            format!("max norm {worst_norm:.6}"),
        ));
        verdicts.push(Verdict::new(
            "plane-wave envelope constant",
            failed == 0 && s <= tol.envelope_spread,
            format!("fitted C per cutoff {:?}, spread {s:.3} (allowed {})", round(&cs, 1e4), tol.envelope_spread),
        ));
        envelope_c = cs.iter().cloned().reduce(f64::max);
        tables.push(samples);
        tables.push(fits);
    }

    let wants_ed = has(LemmaPart::Localization) || has(LemmaPart::Moments) || has(LemmaPart::Definetti);
    if wants_ed {
        let pts = points(config);
        let bases = bases(config, r);
        let dopts = DeFinettiOptions {
            atoms: task.definetti_atoms,
            restarts: task.definetti_restarts,
            ..Default::default()
        };
        let results = scan(
            config,
            records.len(),
            &pts,
            |p| {
                let mut v = point_inputs(p);
                v["part"] = json!("many-body");
                v
            },
            |p, seed| {
                let basis = bases.as_ref().map_err(|e| e.clone())?.get(&p.d).expect("basis per d");
                let w = config.interaction(p.g, r.a_star);
                let tensor = two_body_elements(basis, &w, p.n, p.beta).map_err(|e| e.to_string())?;
                let fock = FockBasis::new(p.n, p.d, task.dim_cap).map_err(|e| e.to_string())?;
                let mut out = EdOut::default();
                let mut json_out = serde_json::Map::new();
                if has(LemmaPart::Localization) || has(LemmaPart::Definetti) {
                    let h = assemble_hamiltonian(basis, &tensor, &fock, 0.0).map_err(|e| e.to_string())?;
                    let res = ground_state(&h, tol.lanczos, seed).map_err(|e| e.to_string())?;
                    let g2 = rdm2(&res.psi, &fock).map_err(|e| e.to_string())?;
                    json_out.insert("e_N".into(), num(res.per_particle));
                    if has(LemmaPart::Localization) {
                        let mut loc = Vec::new();
                        for &k in task.small_modes.iter().filter(|k| **k < p.d) {
                            let l = localization_defect(&g2, basis.energies(), &tensor, k, task.delta)
                                .map_err(|e| e.to_string())?;
                            out.localization.push((k, l.cutoff, l.lhs, l.shape, l.fitted_c));
                            loc.push(serde_json::to_value(&l).expect("report serializes"));
                        }
                        json_out.insert("localization".into(), Value::Array(loc));
                    }
                    if has(LemmaPart::Definetti) {
                        let opts = DeFinettiOptions { seed, ..dopts.clone() };
                        let f = fit_definetti(&g2, p.n, &opts).map_err(|e| e.to_string())?;
                        out.definetti = Some((f.error, f.reference));
                        json_out.insert("definetti".into(), serde_json::to_value(f.summary()).expect("summary serializes"));
                    }
                }
                if has(LemmaPart::Moments) {
                    let h = assemble_hamiltonian(basis, &tensor, &fock, task.eps).map_err(|e| e.to_string())?;
                    let res = ground_state(&h, tol.lanczos, seed).map_err(|e| e.to_string())?;
                    let g1 = rdm1(&res.psi, &fock).map_err(|e| e.to_string())?;
                    let g2 = rdm2(&res.psi, &fock).map_err(|e| e.to_string())?;
                    let m = moment_report(&res, &g1, &g2, basis.energies()).map_err(|e| e.to_string())?;
                    out.moments = Some([m.first_moment, m.second_moment, m.first_bound, m.second_bound, m.fitted_c]);
                    json_out.insert("moments".into(), serde_json::to_value(&m).expect("report serializes"));
                }
                Ok((Value::Object(json_out), out))
            },
        );

        let mut loc_t =
            Table::new("localization", &["N", "beta", "g", "d", "small", "cutoff", "lhs", "shape", "fitted_c"]);
        let mut mom_t = Table::new(
            "moments",
            &["N", "beta", "g", "d", "eps", "first", "second", "first_bound", "second_bound", "fitted_c"],
        );
        let mut df_t = Table::new("definetti", &["N", "beta", "g", "d", "error", "reference", "ratio"]);
        // keyed by (g, d): localization constants per small size, and moment constants
        let mut loc_c: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
        let mut mom_c: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut df_seq: BTreeMap<String, Vec<(usize, f64, f64)>> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();
        let mut failed = 0;
        for (p, (record, out)) in pts.iter().zip(results) {
            records.push(record);
            let Some(o) = out else {
                failed += 1;
                continue;
            };
            let head = vec![json!(p.n), json!(p.beta), json!(p.g), json!(p.d)];
            let family = format!("g={},d={}", p.g, p.d);
            if !order.contains(&family) {
                order.push(family.clone());
            }
            for (k, cutoff, lhs, shape, c) in o.localization {
                let mut row = head.clone();
                row.extend([json!(k), num(cutoff), num(lhs), num(shape), num(c)]);
                loc_t.push(row);
                loc_c.entry(family.clone()).or_default().entry(k).or_default().push(c);
            }
            if let Some([first, second, b1, b2, c]) = o.moments {
                let mut row = head.clone();
                row.extend([json!(task.eps), num(first), num(second), num(b1), num(b2), num(c)]);
                mom_t.push(row);
                mom_c.entry(family.clone()).or_default().push(c);
            }
            if let Some((err, reference)) = o.definetti {
                let mut row = head.clone();
                row.extend([num(err), num(reference), num(err / reference)]);
                df_t.push(row);
                df_seq.entry(series_key(p.g, p.beta, p.d)).or_default().push((p.n, err, reference));
            }
        }
        if failed > 0 {
            verdicts.push(Verdict::new("many-body points", false, format!("{failed} points failed")));
        }
        for family in &order {
            if let Some(per_size) = loc_c.get(family) {
                let all: Vec<f64> = per_size.values().flatten().copied().collect();
                let s = spread(&all);
                let per: Vec<String> = per_size.iter().map(|(k, v)| format!("small {k}: {:.3}", spread(v))).collect();
                let positive = all.iter().filter(|c| **c > 0.0).count();
                verdicts.push(Verdict::new(
                    format!("localization constant[{family}]"),
                    s <= tol.constant_spread,
                    format!(
                        "C_delta in [{:.4}, {:.4}] over {} points ({positive} with a defect), spread {s:.3} (allowed {}); {}",
                        all.iter().cloned().fold(f64::INFINITY, f64::min),
                        all.iter().cloned().fold(0.0, f64::max),
                        all.len(),
                        tol.constant_spread,
                        per.join(", ")
                    ),
                ));
            }
            if let Some(cs) = mom_c.get(family) {
                let s = spread(cs);
                verdicts.push(Verdict::new(
                    format!("moment constant[{family}]"),
                    s <= tol.constant_spread,
                    format!(
                        "C in [{:.4}, {:.4}], spread {s:.3} (allowed {})",
                        cs.iter().cloned().fold(f64::INFINITY, f64::min),
                        cs.iter().cloned().fold(0.0, f64::max),
                        tol.constant_spread
                    ),
                ));
            }
        }
        for (key, mut seq) in df_seq {
            seq.sort_by_key(|s| s.0);
            let non_increasing = seq.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9);
            let c = seq.iter().map(|(_, e, r)| e / r).fold(0.0, f64::max);
            verdicts.push(Verdict::new(
                format!("de Finetti trend[{key}]"),
                non_increasing,
                format!(
                    "errors over N: {:?}; fitted C = {c:.4} with error <= C sqrt(ln d / N)",
                    seq.iter().map(|(n, e, _)| (*n, (e * 1e6).round() / 1e6)).collect::<Vec<_>>()
                ),
            ));
        }
        if has(LemmaPart::Localization) {
            tables.push(loc_t);
        }
        if has(LemmaPart::Moments) {
            tables.push(mom_t);
        }
        if has(LemmaPart::Definetti) {
            tables.push(df_t);
        }
    }

    if has(LemmaPart::Tail) {
        let c = envelope_c.unwrap_or(1.0);
        let mut tpts = Vec::new();
        for g in config.attraction_axis() {
            for &beta in &config.scan.betas {
                for &n in &config.scan.particles {
                    for &lam in &task.tail_lambda {
                        tpts.push((g, beta, n, lam));
                    }
                }
            }
        }
        let results = scan(
            config,
            records.len(),
            &tpts,
            |&(g, beta, n, lam)| json!({ "part": "tail", "g": g, "beta": beta, "N": n, "lambda": lam, "c": c }),
            |&(g, beta, n, lam), _| {
                let w = config.interaction(g, r.a_star);
                let t = interaction_tail_bound(&w, n, beta, lam, c).map_err(|e| e.to_string())?;
                Ok((serde_json::to_value(&t).expect("bound serializes"), t))
            },
        );
        let mut table = Table::new("tail", &["N", "beta", "g", "lambda", "c", "inner", "middle", "outer", "total"]);
        for (&(g, beta, n, lam), (record, out)) in tpts.iter().zip(results) {
            records.push(record);
            if let Some(t) = out {
                table.push(vec![
                    json!(n),
                    json!(beta),
                    json!(g),
                    json!(lam),
                    num(c),
                    num(t.inner),
                    num(t.middle),
                    num(t.outer),
                    num(t.total),
                ]);
            }
        }
        tables.push(table);
    }
    Ok(finish(records, tables, verdicts))
}

fn round(v: &[f64], scale: f64) -> Vec<f64> {
    v.iter().map(|x| (x * scale).round() / scale).collect()
}
