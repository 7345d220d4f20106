use std::f64::consts::PI;

use bose2d::field::{Field, Grid2D};
use bose2d::nls::{compute_a_star, gn_quotient, GnMethod, GnResult};
use serde_json::json;

use super::{finish, num, provenance};
use crate::config::RunConfig;
use crate::report::{Payload, Record, Table, Verdict};
use crate::CliError;

fn method_row(r: &GnResult) -> Vec<serde_json::Value> {
    vec![json!(match r.method {
        GnMethod::GridQuotient => "grid-quotient",
        GnMethod::RadialShooting => "radial-shooting",
    }), num(r.a_star), num(r.residual), json!(r.iterations)]
}

pub(super) fn run(config: &RunConfig) -> Result<Payload, CliError> {
    let g = &config.problem.grid;
    let grid = Grid2D::new(g.n, g.half_width).map_err(|e| CliError::Validation(e.to_string()))?;
    let tol = &config.tolerances;
    let inputs = json!({ "n": g.n, "half_width": g.half_width, "tol": tol.gn });
    let prov = provenance(config, 0);
    let mut table = Table::new("gn", &["method", "a_star", "residual", "iterations"]);
    let mut verdicts = Vec::new();
    let record = match compute_a_star(&grid, tol.gn) {
        Ok(c) => {
            let q = gn_quotient(&Field::gaussian(&grid)).unwrap_or(f64::NAN);
            table.push(method_row(&c.grid));
            table.push(method_row(&c.shooting));
            verdicts.push(Verdict::new(
                "a_star methods agree",
                c.relative_gap <= tol.gn_gap,
                format!("relative gap {:.3e} (tolerance {:.1e})", c.relative_gap, tol.gn_gap),
            ));
            verdicts.push(Verdict::new(
                "gaussian quotient",
                (q - 4.0 * PI).abs() <= tol.energy,
                format!("quotient {q:.12} vs 4π = {:.12}", 4.0 * PI),
            ));
            Record::ok(
                prov,
                inputs,
                json!({
                    "a_star_grid": num(c.grid.a_star),
                    "a_star_shooting": num(c.shooting.a_star),
                    "relative_gap": num(c.relative_gap),
                    "gaussian_quotient": num(q),
                }),
            )
        }
        Err(e) => Record::failed(prov, inputs, e.to_string()),
    };
    Ok(finish(vec![record], vec![table], verdicts))
}
