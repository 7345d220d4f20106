use std::collections::BTreeMap;

use bose2d::linalg::hermitian_eigenvalues;
use bose2d::manybody::{
    assemble_hamiltonian, energy_identity_check, ground_state, rdm1, rdm2, two_body_elements, FockBasis, ModeBasis,
    ModeSelection,
};
use bose2d::nls::{minimize_nls, NlsProblem, NlsStatus};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{finish, num, scan, series_key};
use crate::config::{EdTask, Resolved, RunConfig};
use crate::report::{Payload, Table, Verdict};
use crate::trend::{classify, expected_verdict, non_increasing_within};

pub(crate) struct Point {
    pub g: f64,
    pub beta: f64,
    pub d: usize,
    pub n: usize,
}

/// Scan points in report order: attraction, then β, then d, then N.
pub(crate) fn points(config: &RunConfig) -> Vec<Point> {
    let s = &config.scan;
    let mut out = Vec::new();
    for g in config.attraction_axis() {
        for &beta in &s.betas {
            for &d in &s.modes {
                for &n in &s.particles {
                    out.push(Point { g, beta, d, n });
                }
            }
        }
    }
    out
}

/// One basis per entry of the modes axis, cut from the largest.
pub(crate) fn bases(config: &RunConfig, r: &Resolved) -> Result<BTreeMap<usize, ModeBasis>, String> {
    let d_max = config.scan.modes.iter().copied().max().unwrap_or(1);
    let big = config.basis(r, ModeSelection::Count(d_max)).map_err(|e| e.to_string())?;
    config.scan.modes.iter().map(|&d| Ok((d, big.truncated(d).map_err(|e| e.to_string())?))).collect()
}

pub(crate) fn point_inputs(p: &Point) -> Value {
    json!({ "N": p.n, "beta": p.beta, "g": p.g, "d": p.d })
}

struct EdOut {
    energy: f64,
    per_particle: f64,
    residual: f64,
    status: &'static str,
    identity: Option<f64>,
}

pub(super) fn run(config: &RunConfig, r: &Resolved, task: &EdTask, stability: bool) -> Payload {
    let pts = points(config);
    let tol = &config.tolerances;
    let bases = bases(config, r);
    let results = scan(config, 0, &pts, point_inputs, |p, seed| {
        let basis = bases.as_ref().map_err(|e| e.clone())?.get(&p.d).expect("basis per d");
        let w = config.interaction(p.g, r.a_star);
        let tensor = two_body_elements(basis, &w, p.n, p.beta).map_err(|e| e.to_string())?;
        let fock = FockBasis::new(p.n, p.d, task.dim_cap).map_err(|e| e.to_string())?;
        let h = assemble_hamiltonian(basis, &tensor, &fock, task.eps).map_err(|e| e.to_string())?;
        let res = ground_state(&h, tol.lanczos, seed).map_err(|e| e.to_string())?;
        let g1 = rdm1(&res.psi, &fock).map_err(|e| e.to_string())?;
        let occupations = hermitian_eigenvalues(g1.matrix());
        let fraction = occupations.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / g1.trace();
        let identity = if task.eps == 0.0 {
            let g2 = rdm2(&res.psi, &fock).map_err(|e| e.to_string())?;
            Some(energy_identity_check(&res, &g2, basis.energies(), &tensor).map_err(|e| e.to_string())?)
        } else {
            None
        };
        let status = if res.converged { "converged" } else { "not-converged" };
        let out = json!({
            "E": num(res.energy),
            "e_N": num(res.per_particle),
            "eps": task.eps,
            "residual": num(res.residual),
            "converged": res.converged,
            "degenerate": res.degenerate,
            "gap": res.gap.map(num),
            "dimension": fock.len(),
            "nnz": h.nnz(),
            "split_level": basis.split_level(),
            "condensate_fraction": num(fraction),
            "identity_residual": identity.map(num),
        });
        Ok((out, EdOut { energy: res.energy, per_particle: res.per_particle, residual: res.residual, status, identity }))
    });

    let name = if stability { "stability" } else { "ed" };
    let mut table = Table::new(name, &["N", "beta", "g", "d", "E", "e_N", "residual", "status"]);
    let mut records = Vec::new();
    let mut series: BTreeMap<(usize, usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    let mut identity_worst: Option<f64> = None;
    let mut unconverged = 0;
    let mut failed = 0;
    let (gi, bi, di) = axis_indices(config);
    for (p, (record, out)) in pts.iter().zip(results) {
        records.push(record);
        match out {
            Some(o) => {
                table.push(vec![
                    json!(p.n),
                    json!(p.beta),
                    json!(p.g),
                    json!(p.d),
                    num(o.energy),
                    num(o.per_particle),
                    num(o.residual),
                    json!(o.status),
                ]);
                if o.status != "converged" {
                    unconverged += 1;
                }
                if let Some(id) = o.identity {
                    identity_worst = Some(identity_worst.map_or(id, |w: f64| w.max(id)));
                }
                series.entry((gi(p.g), bi(p.beta), di(p.d))).or_default().push((p.n, o.per_particle));
            }
            None => {
                failed += 1;
                table.push(vec![
                    json!(p.n),
                    json!(p.beta),
                    json!(p.g),
                    json!(p.d),
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    json!("failed"),
                ]);
            }
        }
    }

    let mut verdicts = vec![Verdict::new(
        "lanczos converged",
        unconverged == 0 && failed == 0,
        format!("{unconverged} unconverged and {failed} failed of {} points", pts.len()),
    )];
    if let Some(worst) = identity_worst {
        verdicts.push(Verdict::new(
            "pair energy identity",
            worst <= tol.identity,
            format!("max |e_N - tr(H2 gamma2)/2| = {worst:.3e} (tolerance {:.1e})", tol.identity),
        ));
    }

    let attraction = config.attraction_axis();
    let nls_energies: Vec<Option<(f64, NlsStatus)>> = if stability {
        attraction
            .par_iter()
            .map(|&g| {
                let w = config.interaction(g, r.a_star);
                let pr = NlsProblem::delta(&r.grid, &r.potential, w.integral())
                    .and_then(|p| p.with_tol(tol.nls))
                    .ok()?;
                minimize_nls(&pr, None, config.seed).ok().map(|res| (res.energy, res.status))
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut stable_cols = vec![
        "g",
        "beta",
        "d",
        "points",
        "min_e_N",
        "last_e_N",
        "strictly_decreasing",
        "curvature",
        "verdict",
        "expected",
    ];
    if stability {
        stable_cols.extend(["E_nls", "nls_status", "lower_bound_ok", "gap_non_increasing"]);
    }
    let mut series_table = Table::new(&format!("{name}_series"), &stable_cols);
    if task.eps == 0.0 {
        for ((gk, bk, dk), mut seq) in series {
            seq.sort_by_key(|(n, _)| *n);
            let (g, beta, d) = (attraction[gk], config.scan.betas[bk], config.scan.modes[dk]);
            let ns: Vec<usize> = seq.iter().map(|s| s.0).collect();
            let e: Vec<f64> = seq.iter().map(|s| s.1).collect();
            let trend = classify(&ns, &e);
            let expected = expected_verdict(g);
            let min_e = e.iter().cloned().fold(f64::INFINITY, f64::min);
            let last = *e.last().unwrap();
            let mut passed = expected.map_or(true, |x| x == trend.verdict);
            let mut detail = format!(
                "e_N over N = {:?}: {:?}; verdict {} (expected {}), curvature {:.3e}",
                ns,
                e.iter().map(|x| (x * 1e6).round() / 1e6).collect::<Vec<_>>(),
                trend.verdict,
                expected.unwrap_or("none"),
                trend.curvature
            );
            let mut row = vec![
                json!(g),
                json!(beta),
                json!(d),
                json!(e.len()),
                num(min_e),
                num(last),
                json!(trend.strictly_decreasing),
                num(trend.curvature),
                json!(trend.verdict),
                json!(expected.unwrap_or("")),
            ];
            if stability {
                let nls = nls_energies[gk];
                let lower_ok = min_e >= last - tol.lower_margin;
                let gap_ok = match nls {
                    Some((e_nls, NlsStatus::Converged)) => {
                        let gaps: Vec<f64> = e.iter().map(|x| (x - e_nls).abs()).collect();
                        detail.push_str(&format!("; gaps to E_nls = {e_nls:.6}: {:?}", gaps.iter().map(|x| (x * 1e6).round() / 1e6).collect::<Vec<_>>()));
                        Some(non_increasing_within(&gaps, tol.gap_band))
                    }
                    _ => None,
                };
                if expected == Some(crate::trend::BOUNDED) {
                    passed &= lower_ok && gap_ok.unwrap_or(false);
                    detail.push_str(&format!("; min e_N >= last - {}: {lower_ok}", tol.lower_margin));
                }
                row.push(nls.map_or(Value::Null, |(x, _)| num(x)));
                row.push(json!(nls.map_or("failed", |(_, s)| s.as_str())));
                row.push(json!(lower_ok));
                row.push(gap_ok.map_or(Value::Null, |b| json!(b)));
            }
            series_table.push(row);
            verdicts.push(Verdict::new(format!("boundedness[{}]", series_key(g, beta, d)), passed, detail));
        }
    }
    finish(records, vec![table, series_table], verdicts)
}

/// Index lookups into the scan axes, so series keys sort in axis order.
fn axis_indices(
    config: &RunConfig,
) -> (impl Fn(f64) -> usize + '_, impl Fn(f64) -> usize + '_, impl Fn(usize) -> usize + '_) {
    let attraction = config.attraction_axis();
    (
        move |g: f64| attraction.iter().position(|x| *x == g).unwrap(),
        move |b: f64| config.scan.betas.iter().position(|x| *x == b).unwrap(),
        move |d: usize| config.scan.modes.iter().position(|x| *x == d).unwrap(),
    )
}
